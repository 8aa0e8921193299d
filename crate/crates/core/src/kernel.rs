//! Smoothing kernels, Nadaraya–Watson regression and bandwidth selection.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreenError};

/// Second-order smoothing kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `0.75 (1 - u^2)` on `|u| <= 1`.
    #[default]
    Epanechnikov,
    /// Standard normal density.
    Gaussian,
}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

impl KernelFamily {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelFamily::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelFamily::Gaussian => FRAC_1_SQRT_2PI * (-0.5 * u * u).exp(),
        }
    }

    /// Half-width of the support in units of `u`, `None` when unbounded.
    pub fn radius(self) -> Option<f64> {
        match self {
            KernelFamily::Epanechnikov => Some(1.0),
            KernelFamily::Gaussian => None,
        }
    }

    /// Scaled kernel `K_h(u) = K(u / h) / h`.
    #[inline]
    pub fn scaled(self, u: f64, h: f64) -> f64 {
        self.eval(u / h) / h
    }
}

/// How a bandwidth is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(f64),
    LooCv,
    ReferenceRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub bandwidth: Bandwidth,
    /// Number of log-spaced candidate bandwidths for cross-validation.
    pub cv_grid_size: usize,
    /// Multipliers of the reference-rule bandwidth bounding the CV grid.
    pub cv_grid_span: (f64, f64),
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            family: KernelFamily::Epanechnikov,
            bandwidth: Bandwidth::LooCv,
            cv_grid_size: 20,
            cv_grid_span: (0.2, 5.0),
        }
    }
}

impl KernelConfig {
    pub fn fixed(family: KernelFamily, h: f64) -> Self {
        KernelConfig {
            family,
            bandwidth: Bandwidth::Fixed(h),
            ..Default::default()
        }
    }

    pub fn with_bandwidth(mut self, bandwidth: Bandwidth) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Bandwidth::Fixed(h) = self.bandwidth {
            check_bandwidth(h)?;
        }
        if self.cv_grid_size == 0 {
            return Err(ScreenError::Config("cv_grid_size must be at least 1".into()));
        }
        let (lo, hi) = self.cv_grid_span;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(ScreenError::Config(format!(
                "cv_grid_span must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }
}

pub fn kernel_eval(cfg: &KernelConfig, u: f64) -> f64 {
    cfg.family.eval(u)
}

pub(crate) fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(ScreenError::InvalidBandwidth(h))
    }
}

/// Nadaraya–Watson estimate of `E(y | x = x0)`.
///
/// Returns `Ok(None)` when every kernel weight vanishes at `x0`.
pub fn nw_estimate(
    x: &[f64],
    y: &[f64],
    h: f64,
    x0: f64,
    family: KernelFamily,
) -> Result<Option<f64>> {
    check_bandwidth(h)?;
    if x.len() != y.len() {
        return Err(ScreenError::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let w = family.scaled(xi - x0, h);
        num += w * yi;
        den += w;
    }
    if den > 0.0 {
        Ok(Some((num / n) / (den / n)))
    } else {
        Ok(None)
    }
}

/// Sample standard deviation with the `n - 1` denominator.
pub(crate) fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub(crate) fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Normal-reference bandwidth `1.06 min(sd, IQR / 1.34) n^(-1/5)`.
///
/// Falls back to `sd` alone when the interquartile range is zero.
pub fn reference_rule_bandwidth(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(ScreenError::InsufficientData(
            "reference rule needs at least 2 points".into(),
        ));
    }
    if is_constant(x) {
        return Err(ScreenError::DegenerateColumn("reference-rule bandwidth"));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sd = sample_sd(x);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(1.06 * spread * (x.len() as f64).powf(-0.2))
}

/// Candidate bandwidths for cross-validation: `cv_grid_size` log-spaced
/// points between the span multipliers of the reference-rule bandwidth.
pub fn cv_grid(x: &[f64], cfg: &KernelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let pilot = reference_rule_bandwidth(x)?;
    let (lo, hi) = (cfg.cv_grid_span.0 * pilot, cfg.cv_grid_span.1 * pilot);
    let m = cfg.cv_grid_size;
    if m == 1 {
        return Ok(vec![(lo * hi).sqrt()]);
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..m)
        .map(|k| {
            if k == m - 1 {
                hi
            } else {
                (llo + (lhi - llo) * k as f64 / (m - 1) as f64).exp()
            }
        })
        .collect())
}

/// A sample sorted by its smoothing variable, with prefix sums that make
/// Epanechnikov window sums O(1).
#[derive(Debug, Clone)]
pub(crate) struct SortedSample {
    /// Sorted smoothing variable.
    pub x: Vec<f64>,
    /// Response aligned with `x`.
    pub y: Vec<f64>,
}

impl SortedSample {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        SortedSample {
            x: order.iter().map(|&i| x[i]).collect(),
            y: order.iter().map(|&i| y[i]).collect(),
        }
    }

    /// Half-open range of sorted positions with `|x - x0| < radius`.
    #[inline]
    pub fn window(&self, x0: f64, radius: f64) -> (usize, usize) {
        let lo = self.x.partition_point(|&v| v <= x0 - radius);
        let hi = self.x.partition_point(|&v| v < x0 + radius);
        (lo, hi.max(lo))
    }
}

/// Prefix sums of `1, t, t^2` and `y, t y, t^2 y` with `t` the
/// mean-shifted sorted variable.
struct Moments {
    shift: f64,
    s: [Vec<f64>; 6],
}

impl Moments {
    fn new(sample: &SortedSample) -> Self {
        let n = sample.x.len();
        let shift = sample.x.iter().sum::<f64>() / n as f64;
        let mut s: [Vec<f64>; 6] = Default::default();
        for v in s.iter_mut() {
            v.reserve(n + 1);
            v.push(0.0);
        }
        let mut acc = [0.0f64; 6];
        for (&x, &y) in sample.x.iter().zip(&sample.y) {
            let t = x - shift;
            let terms = [1.0, t, t * t, y, t * y, t * t * y];
            for ((a, term), v) in acc.iter_mut().zip(terms).zip(s.iter_mut()) {
                *a += term;
                v.push(*a);
            }
        }
        Moments { shift, s }
    }

    #[inline]
    fn range(&self, k: usize, lo: usize, hi: usize) -> f64 {
        self.s[k][hi] - self.s[k][lo]
    }

    /// Unnormalised Epanechnikov weight sum and weighted response sum over
    /// sorted positions `lo..hi` for centre `x0`.
    #[inline]
    fn epanechnikov_sums(&self, lo: usize, hi: usize, x0: f64, h: f64) -> (f64, f64) {
        let c = x0 - self.shift;
        let inv_h2 = 1.0 / (h * h);
        let quad = |a: f64, b: f64, d: f64| a - (d - 2.0 * c * b + c * c * a) * inv_h2;
        let den = quad(
            self.range(0, lo, hi),
            self.range(1, lo, hi),
            self.range(2, lo, hi),
        );
        let num = quad(
            self.range(3, lo, hi),
            self.range(4, lo, hi),
            self.range(5, lo, hi),
        );
        (0.75 * den, 0.75 * num)
    }
}

/// Windows at or below this size are summed directly rather than through
/// prefix differences.
const DIRECT_WINDOW: usize = 32;

/// Leave-one-out squared prediction error of the NW smoother at bandwidth
/// `h`. Observations with an empty leave-one-out neighbourhood are
/// predicted by 0.
pub fn loo_cv_score(x: &[f64], y: &[f64], h: f64, family: KernelFamily) -> Result<f64> {
    check_bandwidth(h)?;
    if x.len() != y.len() {
        return Err(ScreenError::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let sample = SortedSample::new(x, y);
    Ok(match family {
        KernelFamily::Epanechnikov => {
            let moments = Moments::new(&sample);
            loo_score_epanechnikov(&sample, &moments, h)
        }
        KernelFamily::Gaussian => loo_score_direct(&sample, h, family),
    })
}

fn loo_score_direct(s: &SortedSample, h: f64, family: KernelFamily) -> f64 {
    let n = s.x.len();
    let mut total = 0.0;
    for i in 0..n {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..n {
            if k != i {
                let w = family.eval((s.x[k] - s.x[i]) / h);
                num += w * s.y[k];
                den += w;
            }
        }
        let pred = if den > 0.0 { num / den } else { 0.0 };
        total += (s.y[i] - pred).powi(2);
    }
    total
}

fn loo_score_epanechnikov(s: &SortedSample, m: &Moments, h: f64) -> f64 {
    let fam = KernelFamily::Epanechnikov;
    let mut total = 0.0;
    for i in 0..s.x.len() {
        let x0 = s.x[i];
        let (lo, hi) = s.window(x0, h);
        let others = hi - lo - 1;
        let pred = if others == 0 {
            0.0
        } else {
            let (mut den, mut num) = if others > DIRECT_WINDOW {
                let (den, num) = m.epanechnikov_sums(lo, hi, x0, h);
                (den - 0.75, num - 0.75 * s.y[i])
            } else {
                (0.0, 0.0)
            };
            if others <= DIRECT_WINDOW || den <= 1e-8 * others as f64 {
                den = 0.0;
                num = 0.0;
                for k in (lo..hi).filter(|&k| k != i) {
                    let w = fam.eval((s.x[k] - x0) / h);
                    den += w;
                    num += w * s.y[k];
                }
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        };
        total += (s.y[i] - pred).powi(2);
    }
    total
}

/// Cross-validation curve over the configured grid: `(h, score)` pairs in
/// increasing `h`.
pub fn cv_curve(x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<Vec<(f64, f64)>> {
    if x.len() != y.len() {
        return Err(ScreenError::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(ScreenError::InsufficientData(
            "cross-validation needs at least 3 points".into(),
        ));
    }
    let grid = cv_grid(x, cfg)?;
    let sample = SortedSample::new(x, y);
    let moments = match cfg.family {
        KernelFamily::Epanechnikov => Some(Moments::new(&sample)),
        KernelFamily::Gaussian => None,
    };
    Ok(grid
        .into_iter()
        .map(|h| {
            let score = match &moments {
                Some(m) => loo_score_epanechnikov(&sample, m, h),
                None => loo_score_direct(&sample, h, cfg.family),
            };
            (h, score)
        })
        .collect())
}

/// Grid bandwidth minimising the leave-one-out CV score; ties go to the
/// larger bandwidth.
pub fn loo_cv_bandwidth(x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<f64> {
    let curve = cv_curve(x, y, cfg)?;
    let mut best = curve[0];
    for &(h, score) in &curve[1..] {
        if score <= best.1 {
            best = (h, score);
        }
    }
    Ok(best.0)
}

/// Resolves the configured bandwidth policy for smoothing `y` on `x`.
pub fn resolve_bandwidth(x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<f64> {
    match cfg.bandwidth {
        Bandwidth::Fixed(h) => {
            check_bandwidth(h)?;
            Ok(h)
        }
        Bandwidth::ReferenceRule => reference_rule_bandwidth(x),
        Bandwidth::LooCv => loo_cv_bandwidth(x, y, cfg),
    }
}
