//! Reproducible synthetic weather and load years.
//!
//! Each series is a deterministic daily/seasonal shape times seeded
//! autocorrelated noise. Raw series are unscaled; the config loader scales
//! them to the configured mean availability or load. Every (seed, year,
//! series name) triple draws from its own ChaCha stream, so adding a series
//! never changes the others.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Daylight bell, longer and higher in summer, daily cloudiness.
    Solar,
    /// Persistent random variation, windier in winter.
    Wind,
    /// Hourly load with daily, weekly and seasonal cycles.
    Load,
    /// Weekly reservoir inflow with a spring peak.
    Inflow,
}

impl Shape {
    /// Solar for names mentioning solar or PV, wind otherwise.
    pub fn guess(name: &str) -> Shape {
        let n = name.to_ascii_lowercase();
        if n.contains("solar") || n.contains("pv") {
            Shape::Solar
        } else {
            Shape::Wind
        }
    }
}

/// Label of the `k`-th synthetic year (1-based).
pub fn year_label(k: usize) -> String {
    format!("syn{k:02}")
}

fn stream_id(name: &str, year: usize) -> u64 {
    // FNV-1a over the name, then the year.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes().chain((year as u64).to_le_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn rng(seed: u64, year: usize, name: &str) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream_id(name, year));
    r
}

/// AR(1) with unit stationary variance.
struct Ar1 {
    phi: f64,
    state: f64,
}

impl Ar1 {
    fn new(phi: f64, r: &mut ChaCha8Rng) -> Self {
        Ar1 {
            phi,
            state: StandardNormal.sample(r),
        }
    }

    fn next(&mut self, r: &mut ChaCha8Rng) -> f64 {
        let e: f64 = StandardNormal.sample(r);
        self.state = self.phi * self.state + (1.0 - self.phi * self.phi).sqrt() * e;
        self.state
    }
}

/// `len` values of series `name` in synthetic year `year` (0-based).
pub fn series(seed: u64, year: usize, name: &str, shape: Shape, len: usize) -> Vec<f64> {
    let mut r = rng(seed, year, name);
    match shape {
        Shape::Solar => solar(&mut r, len),
        Shape::Wind => wind(&mut r, len),
        Shape::Load => load(&mut r, len),
        Shape::Inflow => inflow(&mut r, len),
    }
}

/// Scales `values` by the factor that makes the mean of `min(1, f * v)`
/// equal `target`. `None` when no factor reaches it.
pub fn fit_capped_mean(values: &[f64], target: f64) -> Option<Vec<f64>> {
    let n = values.len() as f64;
    let capped = |f: f64| values.iter().map(|v| (f * v).min(1.0)).sum::<f64>() / n;
    let positive = values.iter().filter(|&&v| v > 0.0).count() as f64 / n;
    if !(target > 0.0 && target < positive) {
        return None;
    }
    let smallest = values.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (0.0, 1.0 / smallest);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if capped(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(values.iter().map(|v| (hi * v).min(1.0)).collect())
}

fn season(day: f64, peak_day: f64) -> f64 {
    (2.0 * PI * (day - peak_day) / 365.0).cos()
}

fn solar(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut clouds = Ar1::new(0.6, r);
    let mut cloud = 1.0;
    (0..len)
        .map(|t| {
            let day = (t / 24) as f64;
            let hour = (t % 24) as f64 + 0.5;
            if t % 24 == 0 {
                cloud = (0.75 + 0.25 * clouds.next(r)).clamp(0.1, 1.0);
            }
            let daylight = 12.0 + 3.5 * season(day, 172.0);
            let sunrise = 12.0 - daylight / 2.0;
            let x = (hour - sunrise) / daylight;
            if !(0.0..=1.0).contains(&x) {
                return 0.0;
            }
            let height = 0.8 + 0.2 * season(day, 172.0);
            (PI * x).sin() * height * cloud
        })
        .collect()
}

fn wind(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut weather = Ar1::new(0.97, r);
    (0..len)
        .map(|t| {
            let day = (t / 24) as f64;
            let hour = (t % 24) as f64;
            let level = (0.45 * weather.next(r)).exp() * (1.0 + 0.2 * season(day, 15.0));
            let diurnal = 1.0 + 0.08 * (2.0 * PI * (hour - 15.0) / 24.0).cos();
            (level * diurnal).powf(1.5) * 0.3
        })
        .collect()
}

fn load(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut noise = Ar1::new(0.9, r);
    (0..len)
        .map(|t| {
            let day = (t / 24) as f64;
            let hour = (t % 24) as f64;
            let seasonal = 1.0 + 0.10 * season(day, 15.0) + 0.08 * season(day, 200.0);
            let daily = 1.0
                + 0.16 * (2.0 * PI * (hour - 9.0) / 24.0).sin()
                + 0.05 * (4.0 * PI * (hour - 7.0) / 24.0).sin();
            let weekly = if (t / 24) % 7 >= 5 { 0.88 } else { 1.0 };
            seasonal * daily * weekly * (1.0 + 0.02 * noise.next(r))
        })
        .collect()
}

fn inflow(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut noise = Ar1::new(0.7, r);
    (0..len)
        .map(|w| {
            let day = w as f64 * 7.0 + 3.5;
            (1.0 + 0.5 * season(day, 130.0)) * (0.2 * noise.next(r)).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_independent() {
        let a = series(2050, 0, "wind", Shape::Wind, 500);
        let b = series(2050, 0, "wind", Shape::Wind, 500);
        assert_eq!(a, b);
        assert_ne!(a, series(2050, 1, "wind", Shape::Wind, 500));
        assert_ne!(a, series(2051, 0, "wind", Shape::Wind, 500));
        assert_ne!(a, series(2050, 0, "wind offshore", Shape::Wind, 500));
    }

    #[test]
    fn shapes_are_physical() {
        for shape in [Shape::Solar, Shape::Wind, Shape::Load, Shape::Inflow] {
            let s = series(1, 0, "x", shape, 8760);
            assert!(s.iter().all(|v| v.is_finite() && *v >= 0.0), "{shape:?}");
            assert!(s.iter().sum::<f64>() > 0.0);
        }
        let solar = series(1, 0, "pv", Shape::Solar, 8760);
        // Dark at midnight, every day.
        assert!(solar.iter().step_by(24).all(|&v| v == 0.0));
        let noon_summer: f64 = (172..179).map(|d| solar[d * 24 + 12]).sum();
        let noon_winter: f64 = (0..7).map(|d| solar[d * 24 + 12]).sum();
        assert!(noon_summer > noon_winter);
    }

    #[test]
    fn prefix_is_stable() {
        let long = series(3, 2, "demand", Shape::Load, 1000);
        let short = series(3, 2, "demand", Shape::Load, 100);
        assert_eq!(&long[..100], &short[..]);
    }

    #[test]
    fn capped_fit_hits_target() {
        let raw = series(4, 0, "offshore", Shape::Wind, 8760);
        let fit = fit_capped_mean(&raw, 0.506).unwrap();
        let mean = fit.iter().sum::<f64>() / fit.len() as f64;
        assert!((mean - 0.506).abs() < 1e-9, "{mean}");
        assert!(fit.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(fit_capped_mean(&[0.0, 1.0], 0.6).is_none());
    }

    #[test]
    fn guesses_shape_from_name() {
        assert_eq!(Shape::guess("Solar PV"), Shape::Solar);
        assert_eq!(Shape::guess("Wind: onshore"), Shape::Wind);
    }
}
