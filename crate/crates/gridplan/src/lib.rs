//! Input files, synthetic data, scenario studies and the command line for
//! `gridplan-core`.
//!
//! Systems are described by a TOML file plus CSV time series (see
//! [`config`]). [`dataset`] bundles a reference system whose weather years are
//! generated by [`synth`]. [`scenario`] runs batches of cases in parallel and
//! writes one [`results::ScenarioResult`] per case.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod io;
pub mod manifest;
pub mod profiles;
pub mod results;
pub mod scenario;
pub mod synth;
