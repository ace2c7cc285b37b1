//! TOML system configuration with CSV profile files.
//!
//! A configuration names the technologies, fuels and policies and points to
//! CSV files holding the hourly series. Each CSV has a header row and one
//! column per year label. Series without a file are generated by the
//! synthetic generator when a `[synthetic]` section is present.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gridplan_core::data::{
    eur_per_boe_to_usd_per_mmbtu, rescale_mean, scale_profile, Availability, Co2Policy,
    DataError, FuelSpec, HydroData, Profile, ReserveRules, StorageParams, SystemSpec, TechClass,
    TechnologySpec, YearData, DEFAULT_LIFETIME, HOURS_PER_YEAR, WEEKS_PER_YEAR,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiles::{read_columns, write_columns};
use crate::synth::{self, Shape};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: missing column `{column}`", path.display())]
    MissingColumn { path: PathBuf, column: String },
    #[error("{}: line {line}: {message}", path.display())]
    BadValue {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {found} rows, expected {expected}", path.display())]
    RowCount {
        path: PathBuf,
        found: usize,
        expected: usize,
    },
    #[error("invalid co2 policy `{0}`: expected none, total=X or intensity=X")]
    Co2(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

fn default_voll() -> f64 {
    13_000.0
}
fn default_penalty() -> f64 {
    1_000.0
}
fn default_rate() -> f64 {
    0.10
}
fn default_co2() -> String {
    "none".into()
}
fn default_hours() -> usize {
    HOURS_PER_YEAR
}
fn one() -> f64 {
    1.0
}
fn default_lifetime() -> u32 {
    DEFAULT_LIFETIME
}
fn half() -> f64 {
    0.5
}
fn tenth() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "default_voll")]
    pub voll: f64,
    #[serde(default = "default_penalty")]
    pub unmet_reserve_penalty: f64,
    #[serde(default = "default_rate")]
    pub discount_rate: f64,
    /// `none`, `total=<t/yr>` or `intensity=<g/kWh>`.
    #[serde(default = "default_co2")]
    pub co2: String,
    /// Rows expected in every hourly file.
    #[serde(default = "default_hours")]
    pub hours: usize,
    #[serde(default = "one")]
    pub hour_weight: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            voll: default_voll(),
            unmet_reserve_penalty: default_penalty(),
            discount_rate: default_rate(),
            co2: default_co2(),
            hours: default_hours(),
            hour_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YearsSection {
    pub labels: Vec<String>,
    /// Equal weights when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Every year is rescaled to this mean load before losses are added.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_mean_mw: Option<f64>,
    /// Network losses added on top of the load.
    #[serde(default)]
    pub loss_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflowSection {
    /// Weekly inflows in MWh, one column per year.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_annual_mwh: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuelConfig {
    pub name: String,
    /// Currency per MMBtu.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price: Option<f64>,
    /// Converted with the fixed boe and exchange-rate constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_eur_per_boe: Option<f64>,
    pub co2_content: f64,
    #[serde(default)]
    pub biofuel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechConfig {
    pub name: String,
    pub class: TechClass,
    #[serde(default)]
    pub inv_cost: f64,
    #[serde(default)]
    pub fixed_om: f64,
    #[serde(default)]
    pub var_om: f64,
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel: Option<String>,
    #[serde(default)]
    pub existing_capacity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_capacity: Option<f64>,
    #[serde(default)]
    pub retirable: bool,
    #[serde(default)]
    pub min_output_frac: f64,
    #[serde(default)]
    pub uc: bool,
    #[serde(default)]
    pub reserve: bool,
    #[serde(default = "default_lifetime")]
    pub lifetime: u32,
    /// Constant availability factor. VRE without it reads an hourly profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub availability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    /// Mean availability every year's profile is scaled to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_af: Option<f64>,
    /// Shape used when the profile is synthesized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    #[serde(default)]
    pub startup_cost: f64,
    #[serde(default)]
    pub capture_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_annual_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roundtrip_efficiency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_energy_capacity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroConfig {
    pub technology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir_capacity_mwh: Option<f64>,
    /// Reservoir energy per MW of turbine capacity, used when no capacity is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_to_energy_hours: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_level_mwh: Option<f64>,
    #[serde(default = "half")]
    pub initial_level_frac: f64,
    #[serde(default = "tenth")]
    pub end_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reserves: Option<ReserveRules>,
    pub years: YearsSection,
    #[serde(default)]
    pub demand: DemandSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflows: Option<InflowSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSection>,
    #[serde(default)]
    pub fuels: Vec<FuelConfig>,
    #[serde(default)]
    pub technologies: Vec<TechConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydro: Option<HydroConfig>,
}

/// Overrides applied while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoadOptions {
    /// Replace the configured years by `n` synthetic years from `seed`.
    pub synthetic_years: Option<(usize, u64)>,
}

/// Parses `none`, `total=X` or `intensity=X`.
pub fn parse_co2(s: &str) -> Result<Co2Policy, ConfigError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("none") {
        return Ok(Co2Policy::None);
    }
    let bad = || ConfigError::Co2(s.to_string());
    let (kind, value) = s.split_once('=').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    if value.is_nan() || value < 0.0 {
        return Err(bad());
    }
    match kind.trim() {
        "total" => Ok(Co2Policy::TotalCap(value)),
        "intensity" => Ok(Co2Policy::IntensityCap(value)),
        _ => Err(bad()),
    }
}

pub fn format_co2(policy: Co2Policy) -> String {
    match policy {
        Co2Policy::None => "none".into(),
        Co2Policy::TotalCap(v) => format!("total={v}"),
        Co2Policy::IntensityCap(v) => format!("intensity={v}"),
    }
}

pub fn read_config(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

/// `path` is only used in error messages.
pub fn parse_config(text: &str, path: &Path) -> Result<ConfigFile, ConfigError> {
    toml::from_str(text).map_err(|source| ConfigError::Toml {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads and validates the system described by the config file at `path`.
pub fn load_system(path: &Path) -> Result<SystemSpec, ConfigError> {
    load_system_with(path, LoadOptions::default())
}

pub fn load_system_with(path: &Path, opts: LoadOptions) -> Result<SystemSpec, ConfigError> {
    let cfg = read_config(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    resolve(&cfg, base, opts)
}

fn column<'a>(
    cols: &'a BTreeMap<String, Vec<f64>>,
    path: &Path,
    label: &str,
) -> Result<&'a Vec<f64>, ConfigError> {
    cols.get(label).ok_or_else(|| ConfigError::MissingColumn {
        path: path.to_path_buf(),
        column: label.to_string(),
    })
}

fn read_series(
    base: &Path,
    file: &str,
    rows: usize,
) -> Result<(PathBuf, BTreeMap<String, Vec<f64>>), ConfigError> {
    let path = base.join(file);
    let cols = read_columns(&path)?;
    if let Some(found) = cols.values().map(Vec::len).find(|&n| n != rows) {
        return Err(ConfigError::RowCount {
            path,
            found,
            expected: rows,
        });
    }
    Ok((path, cols))
}

/// Turns a parsed config into a validated [`SystemSpec`]. Relative file
/// paths are resolved against `base`.
pub fn resolve(cfg: &ConfigFile, base: &Path, opts: LoadOptions) -> Result<SystemSpec, ConfigError> {
    let hours = cfg.system.hours;
    if hours == 0 {
        return Err(ConfigError::Invalid("system.hours must be > 0".into()));
    }
    let (labels, weights, synthetic_seed) = match opts.synthetic_years {
        Some((n, seed)) => {
            if n == 0 {
                return Err(ConfigError::Invalid("synthetic years must be >= 1".into()));
            }
            let labels: Vec<String> = (1..=n).map(synth::year_label).collect();
            (labels, vec![1.0 / n as f64; n], Some(seed))
        }
        None => {
            let labels = cfg.years.labels.clone();
            let weights = match &cfg.years.weights {
                Some(w) if w.len() != labels.len() => {
                    return Err(ConfigError::Invalid(format!(
                        "{} weights for {} years",
                        w.len(),
                        labels.len()
                    )))
                }
                Some(w) => w.clone(),
                None => vec![1.0 / labels.len().max(1) as f64; labels.len()],
            };
            (labels, weights, cfg.synthetic.map(|s| s.seed))
        }
    };
    // Explicit files are ignored when synthetic years replace the data.
    let use_files = opts.synthetic_years.is_none();
    let gen = |what: &str| -> Result<u64, ConfigError> {
        synthetic_seed.ok_or_else(|| {
            ConfigError::Invalid(format!("no file for {what} and no [synthetic] section"))
        })
    };

    let mut fuels = Vec::with_capacity(cfg.fuels.len());
    for f in &cfg.fuels {
        let price = match (f.price, f.price_eur_per_boe) {
            (Some(p), None) => p,
            (None, Some(p)) => eur_per_boe_to_usd_per_mmbtu(p),
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "fuel `{}`: give exactly one of price and price_eur_per_boe",
                    f.name
                )))
            }
        };
        fuels.push(FuelSpec {
            name: f.name.clone(),
            price,
            co2_content: f.co2_content,
            biofuel: f.biofuel,
        });
    }

    // Demand.
    let mut demand: Vec<Vec<f64>> = match (&cfg.demand.file, use_files) {
        (Some(file), true) => {
            let (path, cols) = read_series(base, file, hours)?;
            labels
                .iter()
                .map(|l| column(&cols, &path, l).cloned())
                .collect::<Result<_, _>>()?
        }
        _ => {
            let seed = gen("demand")?;
            (0..labels.len())
                .map(|k| synth::series(seed, k, "demand", Shape::Load, hours))
                .collect()
        }
    };
    for (k, d) in demand.iter_mut().enumerate() {
        let p = Profile::hourly(labels[k].clone(), std::mem::take(d));
        let p = match cfg.demand.target_mean_mw {
            Some(target) => rescale_mean(&p, target)?,
            None => p,
        };
        let f = 1.0 + cfg.demand.loss_fraction;
        *d = if f == 1.0 {
            p.values
        } else {
            p.values.iter().map(|v| v * f).collect()
        };
    }

    // Technologies and their hourly profiles.
    let mut techs = Vec::with_capacity(cfg.technologies.len());
    let mut profiles: Vec<BTreeMap<String, Profile>> = vec![BTreeMap::new(); labels.len()];
    for t in &cfg.technologies {
        let hourly = t.availability.is_none() && t.class == TechClass::Vre;
        let storage = if t.class == TechClass::Storage {
            Some(StorageParams {
                duration: t.duration.ok_or_else(|| {
                    ConfigError::Invalid(format!("storage `{}` needs a duration", t.name))
                })?,
                roundtrip_efficiency: t.roundtrip_efficiency.unwrap_or(1.0),
                fixed_energy_capacity: t.fixed_energy_capacity,
            })
        } else {
            None
        };
        techs.push(TechnologySpec {
            name: t.name.clone(),
            class: t.class,
            inv_cost: t.inv_cost,
            fixed_om: t.fixed_om,
            var_om: t.var_om,
            efficiency: t.efficiency,
            fuel: t.fuel.clone(),
            existing_capacity: t.existing_capacity,
            max_capacity: t.max_capacity,
            retirable: t.retirable,
            min_output_frac: t.min_output_frac,
            uc: t.uc,
            reserve: t.reserve,
            lifetime: t.lifetime,
            availability: if hourly {
                Availability::Hourly
            } else {
                Availability::Constant(t.availability.unwrap_or(1.0))
            },
            startup_cost: t.startup_cost,
            capture_fraction: t.capture_fraction,
            max_annual_energy: t.max_annual_energy,
            storage,
        });
        if !hourly {
            continue;
        }
        let synthetic = !matches!((&t.profile, use_files), (Some(_), true));
        let series: Vec<Vec<f64>> = match (&t.profile, use_files) {
            (Some(file), true) => {
                let (path, cols) = read_series(base, file, hours)?;
                labels
                    .iter()
                    .map(|l| column(&cols, &path, l).cloned())
                    .collect::<Result<_, _>>()?
            }
            _ => {
                let seed = gen(&format!("technology `{}`", t.name))?;
                let shape = t.shape.unwrap_or_else(|| Shape::guess(&t.name));
                (0..labels.len())
                    .map(|k| synth::series(seed, k, &t.name, shape, hours))
                    .collect()
            }
        };
        for (k, values) in series.into_iter().enumerate() {
            let mut p = Profile::hourly(labels[k].clone(), values);
            if let (Some(target), true) = (t.target_af, synthetic) {
                match synth::fit_capped_mean(&p.values, target) {
                    Some(values) => p.values = values,
                    None => {
                        return Err(ConfigError::Invalid(format!(
                            "{}: synthetic profile cannot reach mean {target}",
                            t.name
                        )))
                    }
                }
            } else if let Some(target) = t.target_af {
                let scaled = scale_profile(&p, target)?;
                if scaled.clipped > 0 {
                    log::warn!(
                        "{} [{}]: {} hours clipped to 1.0 after scaling",
                        t.name,
                        labels[k],
                        scaled.clipped
                    );
                }
                p = scaled.profile;
            }
            profiles[k].insert(t.name.clone(), p);
        }
    }

    // Hydro reservoir.
    let mut inflows: Option<Vec<Vec<f64>>> = None;
    let hydro = match &cfg.hydro {
        None => None,
        Some(h) => {
            let tech = techs.iter().find(|t| t.name == h.technology).ok_or_else(|| {
                ConfigError::Invalid(format!("hydro technology `{}` not defined", h.technology))
            })?;
            let capacity = match (h.reservoir_capacity_mwh, h.power_to_energy_hours) {
                (Some(c), _) => c,
                (None, Some(ratio)) => ratio * tech.existing_capacity,
                (None, None) => {
                    return Err(ConfigError::Invalid(
                        "hydro needs reservoir_capacity_mwh or power_to_energy_hours".into(),
                    ))
                }
            };
            let weeks = hours.div_ceil(gridplan_core::data::HOURS_PER_WEEK);
            let weeks = if hours == HOURS_PER_YEAR { WEEKS_PER_YEAR } else { weeks };
            let section = cfg.inflows.clone().unwrap_or_default();
            let mut series: Vec<Vec<f64>> = match (&section.file, use_files) {
                (Some(file), true) => {
                    let (path, cols) = read_series(base, file, weeks)?;
                    labels
                        .iter()
                        .map(|l| column(&cols, &path, l).cloned())
                        .collect::<Result<_, _>>()?
                }
                _ => {
                    let seed = gen("inflows")?;
                    (0..labels.len())
                        .map(|k| synth::series(seed, k, "inflows", Shape::Inflow, weeks))
                        .collect()
                }
            };
            if let Some(annual) = section.target_annual_mwh {
                for (k, s) in series.iter_mut().enumerate() {
                    let p = Profile::weekly(labels[k].clone(), std::mem::take(s));
                    *s = rescale_mean(&p, annual / WEEKS_PER_YEAR as f64)?.values;
                }
            }
            inflows = Some(series);
            Some(HydroData {
                technology: h.technology.clone(),
                reservoir_capacity: capacity,
                initial_level: h.initial_level_mwh.unwrap_or(h.initial_level_frac * capacity),
                end_tolerance: h.end_tolerance,
            })
        }
    };

    let years = labels
        .iter()
        .enumerate()
        .map(|(k, label)| YearData {
            label: label.clone(),
            weight: weights[k],
            demand: Profile::hourly(label.clone(), std::mem::take(&mut demand[k])),
            availability: std::mem::take(&mut profiles[k]),
            inflows: inflows
                .as_mut()
                .map(|s| Profile::weekly(label.clone(), std::mem::take(&mut s[k]))),
        })
        .collect();

    let mut spec = SystemSpec::new(techs, fuels, years);
    spec.voll = cfg.system.voll;
    spec.unmet_reserve_penalty = cfg.system.unmet_reserve_penalty;
    spec.discount_rate = cfg.system.discount_rate;
    spec.co2_policy = parse_co2(&cfg.system.co2)?;
    spec.hour_weight = cfg.system.hour_weight;
    spec.reserve_rules = cfg.reserves.unwrap_or_default();
    spec.hydro = hydro;
    spec.validate(hours == HOURS_PER_YEAR)?;
    Ok(spec)
}

fn file_stem(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

/// Writes `spec` as `system.toml` plus CSV files into `dir`. Loading the
/// result reproduces `spec` exactly.
pub fn write_system(spec: &SystemSpec, dir: &Path) -> Result<PathBuf, ConfigError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ConfigError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let labels: Vec<String> = spec.years.iter().map(|y| y.label.clone()).collect();
    let demand: Vec<&[f64]> = spec.years.iter().map(|y| y.demand.values.as_slice()).collect();
    write_columns(&dir.join("demand.csv"), &labels, &demand)?;

    let mut technologies = Vec::with_capacity(spec.technologies.len());
    for (g, t) in spec.technologies.iter().enumerate() {
        let (availability, profile) = match t.availability {
            Availability::Constant(af) => (Some(af), None),
            Availability::Hourly => {
                let file = format!("profile_{g:02}_{}.csv", file_stem(&t.name));
                let cols: Vec<&[f64]> = spec
                    .years
                    .iter()
                    .map(|y| {
                        y.availability
                            .get(&t.name)
                            .map_or(&[][..], |p| p.values.as_slice())
                    })
                    .collect();
                write_columns(&dir.join(&file), &labels, &cols)?;
                (None, Some(file))
            }
        };
        if t.class != TechClass::Vre && availability.is_none() {
            return Err(ConfigError::Invalid(format!(
                "`{}`: hourly availability is only supported for vre",
                t.name
            )));
        }
        technologies.push(TechConfig {
            name: t.name.clone(),
            class: t.class,
            inv_cost: t.inv_cost,
            fixed_om: t.fixed_om,
            var_om: t.var_om,
            efficiency: t.efficiency,
            fuel: t.fuel.clone(),
            existing_capacity: t.existing_capacity,
            max_capacity: t.max_capacity,
            retirable: t.retirable,
            min_output_frac: t.min_output_frac,
            uc: t.uc,
            reserve: t.reserve,
            lifetime: t.lifetime,
            availability,
            profile,
            target_af: None,
            shape: None,
            startup_cost: t.startup_cost,
            capture_fraction: t.capture_fraction,
            max_annual_energy: t.max_annual_energy,
            duration: t.storage.as_ref().map(|s| s.duration),
            roundtrip_efficiency: t.storage.as_ref().map(|s| s.roundtrip_efficiency),
            fixed_energy_capacity: t.storage.as_ref().and_then(|s| s.fixed_energy_capacity),
        });
    }

    let inflows = if spec.years.iter().all(|y| y.inflows.is_some()) && spec.hydro.is_some() {
        let cols: Vec<&[f64]> = spec
            .years
            .iter()
            .map(|y| y.inflows.as_ref().map_or(&[][..], |p| p.values.as_slice()))
            .collect();
        write_columns(&dir.join("inflows.csv"), &labels, &cols)?;
        Some(InflowSection {
            file: Some("inflows.csv".into()),
            target_annual_mwh: None,
        })
    } else {
        None
    };

    let cfg = ConfigFile {
        system: SystemSection {
            voll: spec.voll,
            unmet_reserve_penalty: spec.unmet_reserve_penalty,
            discount_rate: spec.discount_rate,
            co2: format_co2(spec.co2_policy),
            hours: spec.hours(),
            hour_weight: spec.hour_weight,
        },
        reserves: Some(spec.reserve_rules),
        years: YearsSection {
            labels,
            weights: Some(spec.years.iter().map(|y| y.weight).collect()),
        },
        demand: DemandSection {
            file: Some("demand.csv".into()),
            target_mean_mw: None,
            loss_fraction: 0.0,
        },
        inflows,
        synthetic: None,
        fuels: spec
            .fuels
            .iter()
            .map(|f| FuelConfig {
                name: f.name.clone(),
                price: Some(f.price),
                price_eur_per_boe: None,
                co2_content: f.co2_content,
                biofuel: f.biofuel,
            })
            .collect(),
        technologies,
        hydro: spec.hydro.as_ref().map(|h| HydroConfig {
            technology: h.technology.clone(),
            reservoir_capacity_mwh: Some(h.reservoir_capacity),
            power_to_energy_hours: None,
            initial_level_mwh: Some(h.initial_level),
            initial_level_frac: 0.5,
            end_tolerance: h.end_tolerance,
        }),
    };
    let text = toml::to_string(&cfg).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let path = dir.join("system.toml");
    crate::io::write_atomic(&path, text.as_bytes()).map_err(io(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
[system]
hours = 2

[years]
labels = ["A"]

[demand]
file = "demand.csv"

[[fuels]]
name = "gas"
price = 5.0
co2_content = 0.053

[[technologies]]
name = "ccgt"
class = "thermal"
inv_cost = 10.0
var_om = 2.0
efficiency = 0.517
fuel = "gas"
"#;

    fn toy_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("system.toml"), TOY).unwrap();
        fs::write(dir.path().join("demand.csv"), "A\n10\n10\n").unwrap();
        dir
    }

    #[test]
    fn loads_toy() {
        let dir = toy_dir();
        let spec = load_system(&dir.path().join("system.toml")).unwrap();
        assert_eq!(spec.technologies.len(), 1);
        assert_eq!(spec.years[0].demand.values, vec![10.0, 10.0]);
        assert_eq!(spec.years[0].weight, 1.0);
        assert_eq!(spec.co2_policy, Co2Policy::None);
    }

    #[test]
    fn co2_strings() {
        assert_eq!(parse_co2("none").unwrap(), Co2Policy::None);
        assert_eq!(parse_co2("total=0").unwrap(), Co2Policy::TotalCap(0.0));
        assert_eq!(parse_co2("intensity=50").unwrap(), Co2Policy::IntensityCap(50.0));
        assert!(parse_co2("total=-1").is_err());
        assert!(parse_co2("cap=3").is_err());
        for p in [Co2Policy::None, Co2Policy::TotalCap(1.5), Co2Policy::IntensityCap(7.0)] {
            assert_eq!(parse_co2(&format_co2(p)).unwrap(), p);
        }
    }

    #[test]
    fn empty_technology_list_is_rejected() {
        let dir = toy_dir();
        let text = TOY.split("[[technologies]]").next().unwrap();
        fs::write(dir.path().join("system.toml"), text).unwrap();
        let err = load_system(&dir.path().join("system.toml")).unwrap_err();
        assert_eq!(err.to_string(), "no technologies");
    }

    #[test]
    fn wrong_row_count_is_rejected() {
        let dir = toy_dir();
        fs::write(dir.path().join("demand.csv"), "A\n10\n10\n10\n").unwrap();
        let err = load_system(&dir.path().join("system.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::RowCount { found: 3, expected: 2, .. }));
    }

    #[test]
    fn missing_file_names_the_path() {
        let dir = toy_dir();
        fs::remove_file(dir.path().join("demand.csv")).unwrap();
        let err = load_system(&dir.path().join("system.toml")).unwrap_err();
        assert!(err.to_string().contains("demand.csv"));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let dir = toy_dir();
        let text = TOY.replace("labels = [\"A\"]", "labels = [\"A\"]\nweights = [0.99]");
        fs::write(dir.path().join("system.toml"), text).unwrap();
        let err = load_system(&dir.path().join("system.toml")).unwrap_err();
        assert_eq!(err.to_string(), "weights sum 0.99 ≠ 1");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = TOY.replace("hours = 2", "hours = 2\nhoruz = 3");
        assert!(parse_config(&text, Path::new("x.toml")).is_err());
    }

    #[test]
    fn fuel_price_in_eur_per_boe() {
        let text = TOY.replace("price = 5.0", "price_eur_per_boe = 68.0");
        let cfg = parse_config(&text, Path::new("x.toml")).unwrap();
        let dir = toy_dir();
        let spec = resolve(&cfg, dir.path(), LoadOptions::default()).unwrap();
        assert!((spec.fuels[0].price - 68.0 * 1.10 / 5.698).abs() < 1e-12);
    }
}
