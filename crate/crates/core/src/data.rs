//! Domain types for a planning problem: fuels, technologies, hourly profiles
//! and the assembled [`SystemSpec`], plus validation and profile scaling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hours in a modeled year. Leap days are dropped from source data.
pub const HOURS_PER_YEAR: usize = 8760;
/// Weekly profiles (hydro inflows) carry one value per week.
pub const WEEKS_PER_YEAR: usize = 52;
/// Hours per week used to chunk the hydro reservoir balance.
pub const HOURS_PER_WEEK: usize = 168;
/// MMBtu of heat per MWh of electricity at 100 % efficiency.
pub const MMBTU_PER_MWH: f64 = 3.412142;
/// Energy in one barrel of oil equivalent.
pub const MMBTU_PER_BOE: f64 = 5.698;
/// Exchange rate applied once when converting euro-denominated fuel prices.
pub const USD_PER_EUR: f64 = 1.10;

const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("no technologies")]
    NoTechnologies,
    #[error("no years")]
    NoYears,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("technology `{tech}`: {reason}")]
    InvalidTechnology { tech: String, reason: String },
    #[error("fuel `{fuel}`: {reason}")]
    InvalidFuel { fuel: String, reason: String },
    #[error("technology `{tech}` references unknown fuel `{fuel}`")]
    DanglingFuel { tech: String, fuel: String },
    #[error("profile `{name}` has {found} values, expected {expected}")]
    ProfileLength { name: String, found: usize, expected: usize },
    #[error("profile `{name}` value {value} at index {index} is outside [0, 1]")]
    AvailabilityOutOfRange { name: String, index: usize, value: f64 },
    #[error("profile `{name}` value {value} at index {index} is not a finite non-negative number")]
    InvalidProfileValue { name: String, index: usize, value: f64 },
    #[error("profile `{0}` has zero mean")]
    ZeroMeanProfile(String),
    #[error("missing availability profile for `{tech}` in year `{year}`")]
    MissingProfile { tech: String, year: String },
    #[error("weights sum {0} ≠ 1")]
    WeightsSum(f64),
    #[error("invalid system parameter: {0}")]
    InvalidParameter(String),
    #[error("technology `{0}` is not a fueled technology")]
    NotFueled(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelSpec {
    pub name: String,
    /// Currency per MMBtu.
    pub price: f64,
    /// Tonnes CO2 per MMBtu.
    pub co2_content: f64,
    /// Biofuels are carbon neutral by convention; their content must be zero.
    #[serde(default)]
    pub biofuel: bool,
}

impl FuelSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |reason: &str| DataError::InvalidFuel {
            fuel: self.name.clone(),
            reason: reason.into(),
        };
        if !(self.price >= 0.0 && self.price.is_finite()) {
            return Err(bad("price must be >= 0"));
        }
        if !(self.co2_content >= 0.0 && self.co2_content.is_finite()) {
            return Err(bad("co2_content must be >= 0"));
        }
        if self.biofuel && self.co2_content != 0.0 {
            return Err(bad("biofuel must have zero co2_content"));
        }
        Ok(())
    }
}

/// Converts a fuel price in euro per barrel of oil equivalent into
/// dollars per MMBtu.
pub fn eur_per_boe_to_usd_per_mmbtu(price: f64) -> f64 {
    price * USD_PER_EUR / MMBTU_PER_BOE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TechClass {
    Thermal,
    Vre,
    HydroReservoir,
    Storage,
}

/// Where the hourly availability factor of a technology comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    /// Same factor in every hour (also used as a derating knob for thermal units).
    Constant(f64),
    /// Per-year hourly profile stored in [`YearData::availability`] under the
    /// technology name.
    Hourly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageParams {
    /// Energy-to-power ratio in hours.
    pub duration: f64,
    pub roundtrip_efficiency: f64,
    /// Exogenous energy capacity in MWh. Power is fixed to
    /// `fixed_energy_capacity / duration` and no investment is allowed.
    #[serde(default)]
    pub fixed_energy_capacity: Option<f64>,
}

impl StorageParams {
    /// Per-leg efficiency, the square root of the round trip.
    pub fn leg_efficiency(&self) -> f64 {
        libm::sqrt(self.roundtrip_efficiency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologySpec {
    pub name: String,
    pub class: TechClass,
    /// Currency per kW of power capacity.
    pub inv_cost: f64,
    /// Currency per kW-year.
    pub fixed_om: f64,
    /// Currency per MWh.
    pub var_om: f64,
    pub efficiency: f64,
    #[serde(default)]
    pub fuel: Option<String>,
    /// MW.
    pub existing_capacity: f64,
    /// MW cap on net capacity. `Some(existing)` disables investment.
    #[serde(default)]
    pub max_capacity: Option<f64>,
    #[serde(default)]
    pub retirable: bool,
    #[serde(default)]
    pub min_output_frac: f64,
    #[serde(default)]
    pub uc: bool,
    #[serde(default)]
    pub reserve: bool,
    pub lifetime: u32,
    pub availability: Availability,
    /// Currency per MW started.
    #[serde(default)]
    pub startup_cost: f64,
    /// Fraction of combustion CO2 captured.
    #[serde(default)]
    pub capture_fraction: f64,
    /// Annual generation cap in MWh.
    #[serde(default)]
    pub max_annual_energy: Option<f64>,
    #[serde(default)]
    pub storage: Option<StorageParams>,
}

impl TechnologySpec {
    /// A technology with zero costs, unit efficiency and availability, no
    /// existing capacity, unlimited investment and a 25-year lifetime.
    pub fn new(name: impl Into<String>, class: TechClass) -> Self {
        TechnologySpec {
            name: name.into(),
            class,
            inv_cost: 0.0,
            fixed_om: 0.0,
            var_om: 0.0,
            efficiency: 1.0,
            fuel: None,
            existing_capacity: 0.0,
            max_capacity: None,
            retirable: false,
            min_output_frac: 0.0,
            uc: false,
            reserve: false,
            lifetime: DEFAULT_LIFETIME,
            availability: Availability::Constant(1.0),
            startup_cost: 0.0,
            capture_fraction: 0.0,
            max_annual_energy: None,
            storage: None,
        }
    }

    pub fn is_storage(&self) -> bool {
        self.class == TechClass::Storage
    }

    /// True when net capacity may grow beyond the existing fleet.
    pub fn investable(&self) -> bool {
        if self.storage.as_ref().is_some_and(|s| s.fixed_energy_capacity.is_some()) {
            return false;
        }
        match self.max_capacity {
            Some(cap) => cap > self.existing_capacity,
            None => true,
        }
    }

    /// Heat rate in MMBtu/MWh.
    pub fn heat_rate(&self) -> f64 {
        MMBTU_PER_MWH / self.efficiency
    }

    /// Tonnes CO2 per MWh generated, looking the fuel up in `fuels`.
    pub fn emissions_rate(&self, fuels: &[FuelSpec]) -> Result<f64, DataError> {
        let fuel = self.fuel_spec(fuels)?;
        Ok(emissions_rate(self.efficiency, fuel, self.capture_fraction))
    }

    /// Fuel cost per MWh generated; zero for technologies without fuel.
    pub fn fuel_cost(&self, fuels: &[FuelSpec]) -> f64 {
        match self.fuel_spec(fuels) {
            Ok(fuel) => self.heat_rate() * fuel.price,
            Err(_) => 0.0,
        }
    }

    fn fuel_spec<'a>(&self, fuels: &'a [FuelSpec]) -> Result<&'a FuelSpec, DataError> {
        let name = self
            .fuel
            .as_deref()
            .ok_or_else(|| DataError::NotFueled(self.name.clone()))?;
        fuels
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| DataError::DanglingFuel {
                tech: self.name.clone(),
                fuel: name.into(),
            })
    }

    fn validate(&self, fuels: &[FuelSpec]) -> Result<(), DataError> {
        let bad = |reason: &str| DataError::InvalidTechnology {
            tech: self.name.clone(),
            reason: reason.into(),
        };
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        if !nonneg(self.inv_cost) || !nonneg(self.fixed_om) || !nonneg(self.var_om) {
            return Err(bad("costs must be >= 0"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(bad("efficiency must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.min_output_frac) {
            return Err(bad("min_output_frac must be in [0, 1)"));
        }
        if !nonneg(self.existing_capacity) {
            return Err(bad("existing_capacity must be >= 0"));
        }
        if let Some(cap) = self.max_capacity {
            if !(cap >= self.existing_capacity) {
                return Err(bad("max_capacity below existing capacity"));
            }
        }
        if self.lifetime == 0 {
            return Err(bad("lifetime must be >= 1"));
        }
        if !nonneg(self.startup_cost) {
            return Err(bad("startup_cost must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.capture_fraction) {
            return Err(bad("capture_fraction must be in [0, 1]"));
        }
        if let Availability::Constant(af) = self.availability {
            if !(0.0..=1.0).contains(&af) {
                return Err(bad("constant availability must be in [0, 1]"));
            }
        }
        match self.class {
            TechClass::Thermal => {
                if self.fuel.is_none() {
                    return Err(bad("thermal technology requires a fuel"));
                }
            }
            TechClass::Vre => {
                // A constant factor counts as a (flat) profile.
            }
            TechClass::Storage => {
                let Some(s) = &self.storage else {
                    return Err(bad("storage technology requires storage parameters"));
                };
                if !(s.duration > 0.0 && s.duration.is_finite()) {
                    return Err(bad("storage duration must be > 0"));
                }
                if !(s.roundtrip_efficiency > 0.0 && s.roundtrip_efficiency <= 1.0) {
                    return Err(bad("roundtrip efficiency must be in (0, 1]"));
                }
                if let Some(e) = s.fixed_energy_capacity {
                    if !nonneg(e) {
                        return Err(bad("fixed energy capacity must be >= 0"));
                    }
                }
            }
            TechClass::HydroReservoir => {}
        }
        if self.class != TechClass::Storage && self.storage.is_some() {
            return Err(bad("storage parameters on a non-storage technology"));
        }
        if let Some(fuel) = &self.fuel {
            if !fuels.iter().any(|f| &f.name == fuel) {
                return Err(DataError::DanglingFuel {
                    tech: self.name.clone(),
                    fuel: fuel.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Tonnes CO2 per MWh for a plant of the given efficiency burning `fuel`
/// with a fraction `capture_frac` of the CO2 captured.
pub fn emissions_rate(efficiency: f64, fuel: &FuelSpec, capture_frac: f64) -> f64 {
    MMBTU_PER_MWH / efficiency * fuel.co2_content * (1.0 - capture_frac)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Hourly,
    Weekly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub values: Vec<f64>,
    pub resolution: Resolution,
    pub year_label: String,
}

impl Profile {
    pub fn hourly(year_label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            values,
            resolution: Resolution::Hourly,
            year_label: year_label.into(),
        }
    }

    pub fn weekly(year_label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            values,
            resolution: Resolution::Weekly,
            year_label: year_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Checks the full-year length for the profile resolution.
    pub fn check_full_length(&self, name: &str) -> Result<(), DataError> {
        let expected = match self.resolution {
            Resolution::Hourly => HOURS_PER_YEAR,
            Resolution::Weekly => WEEKS_PER_YEAR,
        };
        if self.values.len() != expected {
            return Err(DataError::ProfileLength {
                name: name.into(),
                found: self.values.len(),
                expected,
            });
        }
        Ok(())
    }

    fn check_nonnegative(&self, name: &str) -> Result<(), DataError> {
        for (index, &value) in self.values.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(DataError::InvalidProfileValue {
                    name: name.into(),
                    index,
                    value,
                });
            }
        }
        Ok(())
    }

    fn check_unit_interval(&self, name: &str) -> Result<(), DataError> {
        for (index, &value) in self.values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(DataError::AvailabilityOutOfRange {
                    name: name.into(),
                    index,
                    value,
                });
            }
        }
        Ok(())
    }

    /// Keeps `len` values starting at `start`, wrapping around the end.
    pub fn window(&self, start: usize, len: usize) -> Profile {
        let n = self.values.len();
        let values = (0..len).map(|k| self.values[(start + k) % n]).collect();
        Profile {
            values,
            resolution: self.resolution,
            year_label: self.year_label.clone(),
        }
    }
}

/// Result of [`scale_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProfile {
    pub profile: Profile,
    /// Number of values clipped to 1.0 after scaling.
    pub clipped: usize,
}

/// Scales an availability profile linearly so its mean equals `target_mean`,
/// then clips values above 1.0.
pub fn scale_profile(p: &Profile, target_mean: f64) -> Result<ScaledProfile, DataError> {
    let mean = p.mean();
    if !(mean > 0.0) {
        return Err(DataError::ZeroMeanProfile(p.year_label.clone()));
    }
    if !(target_mean > 0.0 && target_mean.is_finite()) {
        return Err(DataError::InvalidParameter(alloc::format!(
            "target mean {target_mean} must be > 0"
        )));
    }
    if mean == target_mean {
        let clipped = p.values.iter().filter(|&&v| v > 1.0).count();
        let values = p.values.iter().map(|&v| v.min(1.0)).collect();
        return Ok(ScaledProfile {
            profile: Profile { values, ..p.clone() },
            clipped,
        });
    }
    let factor = target_mean / mean;
    let mut clipped = 0;
    let values = p
        .values
        .iter()
        .map(|&v| {
            let s = v * factor;
            if s > 1.0 {
                clipped += 1;
                1.0
            } else {
                s
            }
        })
        .collect();
    Ok(ScaledProfile {
        profile: Profile { values, ..p.clone() },
        clipped,
    })
}

/// Multiplies every value so the mean equals `target_mean` (no clipping);
/// used for load profiles.
pub fn rescale_mean(p: &Profile, target_mean: f64) -> Result<Profile, DataError> {
    let mean = p.mean();
    if !(mean > 0.0) {
        return Err(DataError::ZeroMeanProfile(p.year_label.clone()));
    }
    let factor = target_mean / mean;
    Ok(Profile {
        values: p.values.iter().map(|v| v * factor).collect(),
        ..p.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReserveRules {
    /// Operating reserve as a fraction of hourly load.
    pub op_load_frac: f64,
    /// Operating reserve as a fraction of available VRE generation.
    pub op_vre_frac: f64,
    /// Regulation reserve as a fraction of hourly load.
    pub reg_load_frac: f64,
}

impl Default for ReserveRules {
    fn default() -> Self {
        Self {
            op_load_frac: 0.03,
            op_vre_frac: 0.05,
            reg_load_frac: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Co2Policy {
    None,
    /// Tonnes per year.
    TotalCap(f64),
    /// Grams per kWh of demand.
    IntensityCap(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroData {
    /// Name of the hydro-reservoir technology this data belongs to.
    pub technology: String,
    /// MWh.
    pub reservoir_capacity: f64,
    /// MWh at the start of the year.
    pub initial_level: f64,
    /// Allowed relative deviation of the end-of-year level from the initial level.
    pub end_tolerance: f64,
}

/// Default technology lifetime in years.
pub const DEFAULT_LIFETIME: u32 = 25;

/// Everything that varies by weather/load year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearData {
    pub label: String,
    pub weight: f64,
    /// Hourly load in MW.
    pub demand: Profile,
    /// Hourly availability factors keyed by technology name.
    #[serde(default)]
    pub availability: BTreeMap<String, Profile>,
    /// Weekly reservoir inflows in MWh per week.
    #[serde(default)]
    pub inflows: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub technologies: Vec<TechnologySpec>,
    pub fuels: Vec<FuelSpec>,
    pub years: Vec<YearData>,
    pub reserve_rules: ReserveRules,
    /// Value of lost load, currency per MWh.
    pub voll: f64,
    /// Currency per MW-h of reserve shortfall.
    pub unmet_reserve_penalty: f64,
    pub discount_rate: f64,
    pub co2_policy: Co2Policy,
    #[serde(default)]
    pub hydro: Option<HydroData>,
    /// Multiplier turning the modeled hours into a year (8760 / hours when a
    /// window of the year is modeled, 1 otherwise).
    pub hour_weight: f64,
}

impl YearData {
    pub fn new(label: impl Into<String>, weight: f64, demand: Vec<f64>) -> Self {
        let label = label.into();
        YearData {
            demand: Profile::hourly(label.clone(), demand),
            label,
            weight,
            availability: BTreeMap::new(),
            inflows: None,
        }
    }
}

impl SystemSpec {
    /// A system with default reserve rules, VOLL 13 000 per MWh, reserve
    /// penalty 1 000 per MW-h, a 10 % discount rate and no CO2 policy.
    pub fn new(technologies: Vec<TechnologySpec>, fuels: Vec<FuelSpec>, years: Vec<YearData>) -> Self {
        SystemSpec {
            technologies,
            fuels,
            years,
            reserve_rules: ReserveRules::default(),
            voll: 13_000.0,
            unmet_reserve_penalty: 1_000.0,
            discount_rate: 0.10,
            co2_policy: Co2Policy::None,
            hydro: None,
            hour_weight: 1.0,
        }
    }

    /// Number of modeled hours per year.
    pub fn hours(&self) -> usize {
        self.years.first().map_or(0, |y| y.demand.len())
    }

    pub fn tech_index(&self, name: &str) -> Option<usize> {
        self.technologies.iter().position(|t| t.name == name)
    }

    pub fn year_index(&self, label: &str) -> Option<usize> {
        self.years.iter().position(|y| y.label == label)
    }

    pub fn fuel(&self, name: &str) -> Option<&FuelSpec> {
        self.fuels.iter().find(|f| f.name == name)
    }

    /// Availability factor of technology `tech` in year `year`, hour `t`.
    pub fn availability(&self, tech: usize, year: usize, t: usize) -> f64 {
        let spec = &self.technologies[tech];
        match spec.availability {
            Availability::Constant(af) => af,
            Availability::Hourly => self.years[year]
                .availability
                .get(&spec.name)
                .map_or(0.0, |p| p.values[t]),
        }
    }

    /// Tonnes CO2 per MWh for technology `tech`; zero for unfueled technologies.
    pub fn emissions_rate(&self, tech: usize) -> f64 {
        let t = &self.technologies[tech];
        if t.fuel.is_none() {
            return 0.0;
        }
        t.emissions_rate(&self.fuels).unwrap_or(0.0)
    }

    /// Replaces year weights with 1 / number of years.
    pub fn set_equal_weights(&mut self) {
        let n = self.years.len() as f64;
        for y in &mut self.years {
            y.weight = 1.0 / n;
        }
    }

    /// Checks every invariant. `full_year` additionally requires hourly
    /// profiles with exactly 8760 values and weekly inflows with 52.
    pub fn validate(&self, full_year: bool) -> Result<(), DataError> {
        if self.technologies.is_empty() {
            return Err(DataError::NoTechnologies);
        }
        if self.years.is_empty() {
            return Err(DataError::NoYears);
        }
        let mut names: Vec<&str> = self.technologies.iter().map(|t| t.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(DataError::DuplicateName(w[0].into()));
        }
        let mut fuel_names: Vec<&str> = self.fuels.iter().map(|f| f.name.as_str()).collect();
        fuel_names.sort_unstable();
        if let Some(w) = fuel_names.windows(2).find(|w| w[0] == w[1]) {
            return Err(DataError::DuplicateName(w[0].into()));
        }
        for fuel in &self.fuels {
            fuel.validate()?;
        }
        for tech in &self.technologies {
            tech.validate(&self.fuels)?;
        }
        if !(self.voll > 0.0 && self.voll.is_finite()) {
            return Err(DataError::InvalidParameter("voll must be > 0".into()));
        }
        if !(self.unmet_reserve_penalty >= 0.0 && self.unmet_reserve_penalty.is_finite()) {
            return Err(DataError::InvalidParameter(
                "unmet reserve penalty must be >= 0".into(),
            ));
        }
        if !(self.discount_rate > 0.0 && self.discount_rate.is_finite()) {
            return Err(DataError::InvalidParameter("discount rate must be > 0".into()));
        }
        if !(self.hour_weight > 0.0 && self.hour_weight.is_finite()) {
            return Err(DataError::InvalidParameter("hour weight must be > 0".into()));
        }
        let r = &self.reserve_rules;
        for f in [r.op_load_frac, r.op_vre_frac, r.reg_load_frac] {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(DataError::InvalidParameter(
                    "reserve fractions must be >= 0".into(),
                ));
            }
        }
        match self.co2_policy {
            Co2Policy::None => {}
            Co2Policy::TotalCap(c) | Co2Policy::IntensityCap(c) => {
                if !(c >= 0.0) {
                    return Err(DataError::InvalidParameter("co2 cap must be >= 0".into()));
                }
            }
        }
        let weight_sum: f64 = self.years.iter().map(|y| y.weight).sum();
        if (weight_sum - 1.0).abs() > WEIGHT_TOLERANCE
            || self.years.iter().any(|y| !(y.weight >= 0.0))
        {
            return Err(DataError::WeightsSum(weight_sum));
        }
        let hours = self.hours();
        if hours == 0 {
            return Err(DataError::InvalidParameter("empty demand profile".into()));
        }
        let mut labels: Vec<&str> = self.years.iter().map(|y| y.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(DataError::DuplicateName(w[0].into()));
        }
        for year in &self.years {
            let name = alloc::format!("demand[{}]", year.label);
            if full_year {
                year.demand.check_full_length(&name)?;
            } else if year.demand.len() != hours {
                return Err(DataError::ProfileLength {
                    name,
                    found: year.demand.len(),
                    expected: hours,
                });
            }
            year.demand.check_nonnegative(&name)?;
            for tech in &self.technologies {
                if tech.availability != Availability::Hourly {
                    continue;
                }
                let profile = year.availability.get(&tech.name).ok_or_else(|| {
                    DataError::MissingProfile {
                        tech: tech.name.clone(),
                        year: year.label.clone(),
                    }
                })?;
                let name = alloc::format!("{}[{}]", tech.name, year.label);
                if profile.len() != hours {
                    return Err(DataError::ProfileLength {
                        name,
                        found: profile.len(),
                        expected: hours,
                    });
                }
                profile.check_unit_interval(&name)?;
            }
            if let Some(inflows) = &year.inflows {
                let name = alloc::format!("inflows[{}]", year.label);
                if full_year {
                    inflows.check_full_length(&name)?;
                } else if inflows.is_empty() {
                    return Err(DataError::ProfileLength {
                        name,
                        found: 0,
                        expected: WEEKS_PER_YEAR,
                    });
                }
                inflows.check_nonnegative(&name)?;
            }
        }
        if let Some(hydro) = &self.hydro {
            let idx = self.tech_index(&hydro.technology).ok_or_else(|| {
                DataError::InvalidParameter(alloc::format!(
                    "hydro data references unknown technology `{}`",
                    hydro.technology
                ))
            })?;
            if self.technologies[idx].class != TechClass::HydroReservoir {
                return Err(DataError::InvalidParameter(
                    "hydro data must reference a hydro_reservoir technology".into(),
                ));
            }
            if !(hydro.reservoir_capacity >= 0.0)
                || !(hydro.initial_level >= 0.0 && hydro.initial_level <= hydro.reservoir_capacity)
                || !(0.0..=1.0).contains(&hydro.end_tolerance)
            {
                return Err(DataError::InvalidParameter(
                    "hydro reservoir levels out of range".into(),
                ));
            }
            if self.years.iter().any(|y| y.inflows.is_none()) {
                return Err(DataError::InvalidParameter(
                    "hydro data requires inflows for every year".into(),
                ));
            }
        }
        Ok(())
    }

    /// Restricts every hourly profile to `hours` consecutive hours starting at
    /// `start` and sets the hour weight so that modeled costs stay annual.
    pub fn window(&self, start: usize, hours: usize) -> SystemSpec {
        let full = self.hours();
        let mut out = self.clone();
        for year in &mut out.years {
            year.demand = year.demand.window(start, hours);
            for p in year.availability.values_mut() {
                *p = p.window(start, hours);
            }
            if let Some(inflows) = &mut year.inflows {
                let first = start / HOURS_PER_WEEK;
                let weeks = (start + hours).div_ceil(HOURS_PER_WEEK) - first;
                *inflows = inflows.window(first, weeks);
            }
        }
        out.hour_weight = self.hour_weight * full as f64 / hours as f64;
        out
    }
}
