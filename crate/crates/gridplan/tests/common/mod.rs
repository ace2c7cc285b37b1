#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gridplan::config::load_system;
use gridplan_core::data::SystemSpec;
use tempfile::TempDir;

pub struct Toy {
    pub dir: TempDir,
}

impl Toy {
    pub fn new(config: &str, files: &[(&str, &str)]) -> Toy {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("system.toml"), config).unwrap();
        for (name, text) in files {
            fs::write(dir.path().join(name), text).unwrap();
        }
        Toy { dir }
    }

    pub fn config(&self) -> PathBuf {
        self.dir.path().join("system.toml")
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn spec(&self) -> SystemSpec {
        load_system(&self.config()).unwrap()
    }
}

pub fn gridplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridplan"))
        .args(args)
        .env_remove("GRIDPLAN_CONFIG")
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub const GAS: &str = r#"
[[fuels]]
name = "gas"
price = 5.0
co2_content = 0.053
"#;

/// One CCGT serving a flat 10 MW load for two hours.
pub fn gas_toy() -> Toy {
    let config = format!(
        r#"
[system]
hours = 2

[years]
labels = ["A"]

[demand]
file = "demand.csv"
{GAS}
[[technologies]]
name = "ccgt"
class = "thermal"
inv_cost = 10.0
var_om = 2.0
efficiency = 0.517
fuel = "gas"
"#
    );
    Toy::new(&config, &[("demand.csv", "A\n10\n10\n")])
}

const FLEET: &str = r#"
[[fuels]]
name = "gas"
price_eur_per_boe = 68.0
co2_content = 0.053

[[fuels]]
name = "biofuel"
price_eur_per_boe = 108.0
co2_content = 0.0
biofuel = true

[[technologies]]
name = "CCGT"
class = "thermal"
inv_cost = 748.80
fixed_om = 17.55
var_om = 2.7
efficiency = 0.517
fuel = "gas"
uc = true
reserve = true
min_output_frac = 0.30
startup_cost = 50.0

[[technologies]]
name = "Solar PV"
class = "vre"
inv_cost = 531.18
fixed_om = 10.76
target_af = 0.173
shape = "solar"

[[technologies]]
name = "Bio electricity-only"
class = "thermal"
inv_cost = 1228.5
fixed_om = 27.26
var_om = 3.0
efficiency = 0.341
fuel = "biofuel"
uc = true
reserve = true
min_output_frac = 0.20
startup_cost = 50.0
"#;

pub const BATTERY: &str = r#"
[[technologies]]
name = "Battery: 3-hour"
class = "storage"
inv_cost = 561.6
fixed_om = 3.04
var_om = 0.64
reserve = true
duration = 3.0
roundtrip_efficiency = 0.85
"#;

/// Synthetic solar, gas and bio fleet with a 3-hour battery option over
/// `years` synthetic years of `hours` hours, annualized by the hour weight.
pub fn fleet_config(hours: usize, years: usize, seed: u64, battery: bool) -> String {
    let labels: Vec<String> = (1..=years).map(|k| format!("\"Y{k}\"")).collect();
    format!(
        r#"
[system]
hours = {hours}
hour_weight = {weight}
voll = 13000.0
discount_rate = 0.10

[years]
labels = [{labels}]

[demand]
target_mean_mw = 100.0

[synthetic]
seed = {seed}
{FLEET}{battery}"#,
        weight = 8760.0 / hours as f64,
        labels = labels.join(", "),
        battery = if battery { BATTERY } else { "" },
    )
}

pub fn fleet_toy(hours: usize, years: usize, seed: u64) -> Toy {
    Toy::new(&fleet_config(hours, years, seed, true), &[])
}

/// Two years whose wind is anti-correlated: year A blows during the peak,
/// year B does not.
pub fn anticorrelated_toy() -> Toy {
    let config = format!(
        r#"
[system]
hours = 2
hour_weight = 4380.0
voll = 13000.0

[reserves]
op_load_frac = 0.0
op_vre_frac = 0.0
reg_load_frac = 0.0

[years]
labels = ["A", "B"]

[demand]
file = "demand.csv"
{GAS}
[[technologies]]
name = "ccgt"
class = "thermal"
inv_cost = 748.8
fixed_om = 17.55
var_om = 2.7
efficiency = 0.517
fuel = "gas"

[[technologies]]
name = "wind"
class = "vre"
inv_cost = 1103.31
fixed_om = 14.04
profile = "wind.csv"
"#
    );
    Toy::new(
        &config,
        &[
            ("demand.csv", "A,B\n100,100\n20,20\n"),
            ("wind.csv", "A,B\n1.0,0.2\n0.2,1.0\n"),
        ],
    )
}
