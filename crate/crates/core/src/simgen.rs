//! Simulation designs and the frequency-of-selection experiment.
//!
//! Five designs are provided. In each, features 1..4 are the active ones:
//!
//! 1. additive nonlinear model on uniform predictors;
//! 2. additive nonlinear model with heteroscedastic noise;
//! 3. equicorrelated Gaussian linear model in which `X4` is marginally
//!    uncorrelated with the response;
//! 4. a standardised Gaussian bump, signal concentrated near the origin;
//! 5. a varying-coefficient model indexed by `Z ~ U(0, 1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::baseline_screen;
use crate::dataset::Dataset;
use crate::error::{Result, ScreenError};
use crate::iterative::{iterative_screen, IterativeConfig};
use crate::report::{fmt_stat, Method, Selection};
use crate::rng::{stream_rng, CALIBRATION_STREAM, INDEX_STREAM, NOISE_STREAM};
use crate::screening::{screen, ScreeningConfig};
use crate::vc::{vc_screen, VcConfig};

/// Number of active features in every design.
pub const ACTIVE: usize = 4;

/// One simulation experiment.
///
/// `noise` is the noise variance for designs 1, 2, 3 and 5 and the noise
/// standard deviation for design 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub example_id: u8,
    pub n: usize,
    pub p: usize,
    pub noise: f64,
    pub reps: usize,
    pub seed: u64,
    pub method: Method,
    pub top_d: usize,
    /// Design 2 only: draw the noise with covariate-dependent variance.
    /// When false the variance is the constant with matching average power.
    pub heteroscedastic: bool,
}

impl SimulationSpec {
    /// Spec with the default noise level of the design and `reps = 100`.
    pub fn new(example_id: u8, n: usize, p: usize) -> Self {
        SimulationSpec {
            example_id,
            n,
            p,
            noise: default_noise(example_id),
            reps: 100,
            seed: 2024,
            method: if example_id == 5 { Method::VcEl } else { Method::El },
            top_d: 20,
            heteroscedastic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.example_id) {
            return Err(ScreenError::Config(format!(
                "example id must be in 1..=5, got {}",
                self.example_id
            )));
        }
        if self.n < 10 || self.p < 5 || self.reps < 1 {
            return Err(ScreenError::Config(format!(
                "need n >= 10, p >= 5, reps >= 1; got n={}, p={}, reps={}",
                self.n, self.p, self.reps
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(ScreenError::Config(format!(
                "noise must be finite and non-negative, got {}",
                self.noise
            )));
        }
        if self.top_d == 0 {
            return Err(ScreenError::Config("top_d must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn default_noise(example_id: u8) -> f64 {
    match example_id {
        2 => 0.5,
        4 => 0.5,
        5 => 0.1,
        _ => 1.0,
    }
}

pub fn g1(x: f64) -> f64 {
    x
}

pub fn g2(x: f64) -> f64 {
    (2.0 * x - 1.0).powi(2)
}

pub fn g3(x: f64) -> f64 {
    let s = (2.0 * PI * x).sin();
    s / (2.0 - s)
}

pub fn g4(x: f64) -> f64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c.powi(3) + 0.5 * s.powi(3)
}

pub fn h1(x: f64) -> f64 {
    (2.0 * x - 1.0).powi(2)
}

pub fn h2(x: f64) -> f64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    c / (2.0 + s)
}

pub fn h3(x: f64) -> f64 {
    let c = (2.0 * PI * x).cos();
    c / (2.0 - c)
}

pub fn h4(x: f64) -> f64 {
    ((2.0 * x - 1.0) * PI).cos()
}

/// Varying coefficients of design 5.
pub fn vc_coefficients(z: f64) -> [f64; 4] {
    let t = 2.0 * PI * z;
    [
        (t + PI / 4.0).sin(),
        t.sin(),
        t.cos(),
        (t + 3.0 * PI / 4.0).sin(),
    ]
}

/// Bump scales of design 4.
const BUMP_SCALES: [f64; 4] = [0.8, 0.9, 1.0, 1.1];

fn bump(x: [f64; 4]) -> f64 {
    let q: f64 = x
        .iter()
        .zip(BUMP_SCALES)
        .map(|(v, s)| v * v / (s * s))
        .sum();
    (-0.5 * q).exp()
}

/// Mean and standard deviation of the design-4 bump under standard normal
/// predictors, from the Gaussian integrals
/// `E exp(-a X^2 / 2) = (1 + a)^(-1/2)`.
pub fn bump_moments() -> (f64, f64) {
    let mean: f64 = BUMP_SCALES
        .iter()
        .map(|s| (1.0 + 1.0 / (s * s)).powf(-0.5))
        .product();
    let second: f64 = BUMP_SCALES
        .iter()
        .map(|s| (1.0 + 2.0 / (s * s)).powf(-0.5))
        .product();
    (mean, (second - mean * mean).sqrt())
}

/// `E[4 / (U1^2 + ... + U4^2)]` for independent uniforms, by Monte Carlo
/// with 10^6 draws. Computed once and cached.
pub fn homoscedastic_variance() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        let mut rng = stream_rng(0x5eed, 2, 0, CALIBRATION_STREAM);
        let draws = 1_000_000;
        let total: f64 = (0..draws)
            .map(|_| {
                let s: f64 = (0..4).map(|_| rng.gen::<f64>().powi(2)).sum();
                4.0 / s
            })
            .sum();
        total / draws as f64
    })
}

fn uniform_column(seed: u64, ex: u64, rep: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, ex, rep, stream);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

fn normal_column(seed: u64, ex: u64, rep: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, ex, rep, stream);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Draws replication `rep` of the design. Predictor `j` comes from stream
/// `j`, so data for one replication never depend on another. The response
/// is centred.
pub fn gen_example(spec: &SimulationSpec, rep: usize) -> Result<Dataset> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let (seed, ex, r) = (spec.seed, spec.example_id as u64, rep as u64);
    let eps = normal_column(seed, ex, r, NOISE_STREAM, n);

    let columns: Vec<Vec<f64>> = match spec.example_id {
        1 | 2 => (0..p)
            .into_par_iter()
            .map(|j| uniform_column(seed, ex, r, j as u64, n))
            .collect(),
        3 => {
            // X4 is the common factor: cov(Xj, X4) = 1/sqrt2, cov(Xj, Xk) = 1/2
            let w = normal_column(seed, ex, r, 3, n);
            (0..p)
                .into_par_iter()
                .map(|j| {
                    if j == 3 {
                        w.clone()
                    } else {
                        normal_column(seed, ex, r, j as u64, n)
                            .iter()
                            .zip(&w)
                            .map(|(e, w)| (w + e) * FRAC_1_SQRT_2)
                            .collect()
                    }
                })
                .collect()
        }
        _ => (0..p)
            .into_par_iter()
            .map(|j| normal_column(seed, ex, r, j as u64, n))
            .collect(),
    };
    let z = (spec.example_id == 5).then(|| uniform_column(seed, ex, r, INDEX_STREAM, n));

    let x = |j: usize, i: usize| columns[j][i];
    let y: Vec<f64> = (0..n)
        .map(|i| match spec.example_id {
            1 => {
                5.0 * g1(x(0, i))
                    + 3.0 * g2(x(1, i))
                    + 4.0 * g3(x(2, i))
                    + 6.0 * g4(x(3, i))
                    + spec.noise.sqrt() * eps[i]
            }
            2 => {
                let var = if spec.heteroscedastic {
                    4.0 / (0..4).map(|j| x(j, i).powi(2)).sum::<f64>()
                } else {
                    homoscedastic_variance()
                };
                -3.0 * h1(x(0, i)) + 2.5 * h2(x(1, i)) - 2.0 * h3(x(2, i))
                    + 1.5 * h4(x(3, i))
                    + spec.noise.sqrt() * var.sqrt() * eps[i]
            }
            3 => {
                2.0 * (x(0, i) + x(1, i) + x(2, i)) - 3.0 * SQRT_2 * x(3, i)
                    + spec.noise.sqrt() * eps[i]
            }
            4 => {
                let (mean, sd) = bump_moments();
                let m = (bump([x(0, i), x(1, i), x(2, i), x(3, i)]) - mean) / sd;
                m + spec.noise * eps[i]
            }
            _ => {
                let beta = vc_coefficients(z.as_ref().expect("design 5 has an index")[i]);
                (0..4).map(|j| x(j, i) * beta[j]).sum::<f64>() + spec.noise.sqrt() * eps[i]
            }
        })
        .collect();

    Ok(Dataset::new(columns, y, z)?.centered())
}

/// Method settings used by [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MethodConfig {
    pub screening: ScreeningConfig,
    pub vc: VcConfig,
    /// `None` uses [`IterativeConfig::for_n`].
    pub iterative: Option<IterativeConfig>,
}

/// Selected features for one dataset under `method`.
pub fn select_features(
    d: &Dataset,
    method: Method,
    top_d: usize,
    cfg: &MethodConfig,
    seed: u64,
) -> Result<Vec<usize>> {
    let selection = Selection::TopD(top_d);
    Ok(match method {
        Method::El => {
            let mut c = cfg.screening.clone();
            c.selection = selection;
            screen(d, &c)?.selected
        }
        Method::VcEl => {
            let mut c = cfg.vc.clone();
            c.selection = selection;
            vc_screen(d, &c)?.selected
        }
        Method::Sirs | Method::Dcsis | Method::ParametricEl => {
            baseline_screen(d, method, selection)?.selected
        }
        Method::IterativeEl => {
            let mut icfg = cfg
                .iterative
                .clone()
                .unwrap_or_else(|| IterativeConfig::for_n(d.n()));
            icfg.selector.seed = seed;
            iterative_screen(d, &cfg.screening, &icfg)?.final_set
        }
    })
}

/// Selection counts for the active features over replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub spec: SimulationSpec,
    /// Times each of features 1..4 was selected, out of `reps`.
    pub counts: Vec<usize>,
    /// Selection count averaged over the inactive features.
    pub inactive_mean: f64,
    /// Mean number of selected features per replication.
    pub mean_selected: f64,
    pub runtime_secs: f64,
}

/// Runs every replication of `spec` and tallies selections. A failing
/// replication aborts the experiment.
pub fn run_experiment(spec: &SimulationSpec) -> Result<FrequencyTable> {
    run_experiment_with(spec, &MethodConfig::default())
}

pub fn run_experiment_with(spec: &SimulationSpec, cfg: &MethodConfig) -> Result<FrequencyTable> {
    spec.validate()?;
    let start = Instant::now();
    let selections: Vec<Vec<usize>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let d = gen_example(spec, rep)?;
            let rep_seed = spec.seed ^ (rep as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            select_features(&d, spec.method, spec.top_d, cfg, rep_seed)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .enumerate()
        .map(|(rep, r)| {
            r.map_err(|e| ScreenError::Replication {
                rep,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut counts = vec![0usize; ACTIVE];
    let mut inactive_total = 0usize;
    let mut selected_total = 0usize;
    for sel in &selections {
        selected_total += sel.len();
        for &j in sel {
            if j < ACTIVE {
                counts[j] += 1;
            } else {
                inactive_total += 1;
            }
        }
    }
    Ok(FrequencyTable {
        spec: spec.clone(),
        counts,
        inactive_mean: inactive_total as f64 / (spec.p - ACTIVE) as f64,
        mean_selected: selected_total as f64 / spec.reps as f64,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

impl FrequencyTable {
    /// CSV with one row per active feature plus an `__inactive_mean__` row.
    /// Runtime is excluded so that reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "example", "n", "p", "noise", "feature", "count"])?;
        let s = &self.spec;
        let prefix = [
            s.method.to_string(),
            s.example_id.to_string(),
            s.n.to_string(),
            s.p.to_string(),
            fmt_stat(s.noise),
        ];
        for (j, c) in self.counts.iter().enumerate() {
            let mut row = prefix.to_vec();
            row.push(format!("X{}", j + 1));
            row.push(c.to_string());
            w.write_record(&row)?;
        }
        let mut row = prefix.to_vec();
        row.push("__inactive_mean__".into());
        row.push(fmt_stat(self.inactive_mean));
        w.write_record(&row)?;
        w.flush().map_err(|e| ScreenError::io("<frequency table>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SimulationSpec::new(6, 100, 10).validate().is_err());
        assert!(SimulationSpec::new(1, 5, 10).validate().is_err());
        assert!(SimulationSpec::new(1, 100, 4).validate().is_err());
        assert!(SimulationSpec::new(1, 100, 10).validate().is_ok());
        assert!(gen_example(&SimulationSpec::new(0, 100, 10), 0).is_err());
    }

    #[test]
    fn vc_coefficient_values() {
        let b = vc_coefficients(0.25);
        assert!((b[1] - 1.0).abs() < 1e-15);
        assert!(b[2].abs() < 1e-15);
        assert!((b[0] - (PI * 0.75).sin()).abs() < 1e-15);
    }

    #[test]
    fn bump_moments_match_monte_carlo() {
        let (mean, sd) = bump_moments();
        let mut rng = stream_rng(7, 4, 0, 0);
        let m = 400_000;
        let draws: Vec<f64> = (0..m)
            .map(|_| {
                let x: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                bump(x)
            })
            .collect();
        let mc_mean = draws.iter().sum::<f64>() / m as f64;
        let mc_sd = (draws.iter().map(|v| (v - mc_mean).powi(2)).sum::<f64>() / m as f64).sqrt();
        assert!((mc_mean - mean).abs() < 2e-3, "{mc_mean} vs {mean}");
        assert!((mc_sd - sd).abs() < 2e-3, "{mc_sd} vs {sd}");
    }

    #[test]
    fn rows_are_centered() {
        for ex in 1..=5 {
            let d = gen_example(&SimulationSpec::new(ex, 50, 8), 0).unwrap();
            assert!(d.y().iter().sum::<f64>().abs() < 1e-10);
            assert_eq!(d.z().is_some(), ex == 5);
        }
    }

    #[test]
    fn frequency_csv_layout() {
        let t = FrequencyTable {
            spec: SimulationSpec::new(1, 400, 1000),
            counts: vec![100, 97, 100, 100],
            inactive_mean: 1.5,
            mean_selected: 20.0,
            runtime_secs: 3.0,
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "method,example,n,p,noise,feature,count");
        assert_eq!(lines[2], "el,1,400,1000,1,X2,97");
        assert_eq!(lines[5], "el,1,400,1000,1,__inactive_mean__,1.5");
    }
}
