//! Local empirical-likelihood independence screening.
//!
//! For feature `j` and evaluation point `x0` the constraint values are
//! `v_i = K_h(x_ij - x0) y_i`; the local statistic is the EL log ratio of
//! `v`, and the feature statistic is its maximum over evaluation points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{rescale_column, Dataset, RescaleMode};
use crate::el::{ElSolver, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Result, ScreenError};
use crate::kernel::{self, check_bandwidth, KernelConfig, KernelFamily, SortedSample};
use crate::report::{Method, ScreeningReport, Selection};

/// Where the local statistic is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvalPolicy {
    /// At every observed value of the smoothing variable.
    #[default]
    ObservedPoints,
    /// At `m` equispaced points spanning the observed range.
    UniformGrid(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    pub kernel: KernelConfig,
    pub eval_policy: EvalPolicy,
    /// Minimum number of nonzero kernel weights at an evaluation point.
    pub min_support: usize,
    pub selection: Selection,
    /// Applied to each predictor before smoothing. Bandwidths are reported
    /// on the rescaled axis, argmax points on the original one.
    #[serde(default)]
    pub rescale: RescaleMode,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig {
            kernel: KernelConfig::default(),
            eval_policy: EvalPolicy::ObservedPoints,
            min_support: 5,
            selection: Selection::TopD(20),
            rescale: RescaleMode::None,
        }
    }
}

impl ScreeningConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.selection.validate()?;
        validate_local(self.min_support, self.eval_policy)
    }
}

pub(crate) fn validate_local(min_support: usize, eval_policy: EvalPolicy) -> Result<()> {
    if min_support < 2 {
        return Err(ScreenError::Config(format!(
            "min_support must be at least 2, got {min_support}"
        )));
    }
    if eval_policy == EvalPolicy::UniformGrid(0) {
        return Err(ScreenError::Config("uniform grid needs at least one point".into()));
    }
    Ok(())
}

/// Result of maximising the local statistic for one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureStat {
    /// Maximum local statistic, possibly `+inf`; 0 when no point qualified.
    pub stat: f64,
    pub argmax_point: Option<f64>,
    /// Evaluation points that failed the support rule.
    pub skipped: usize,
    pub bandwidth: Option<f64>,
}

impl FeatureStat {
    fn degenerate() -> Self {
        FeatureStat {
            stat: 0.0,
            argmax_point: None,
            skipped: 0,
            bandwidth: None,
        }
    }
}

/// Local statistic at a single point, or `None` when fewer than
/// `min_support` kernel weights are nonzero.
pub fn local_el_stat(
    x: &[f64],
    y: &[f64],
    h: f64,
    x0: f64,
    cfg: &ScreeningConfig,
) -> Result<Option<f64>> {
    check_bandwidth(h)?;
    if x.len() != y.len() {
        return Err(ScreenError::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let family = cfg.kernel.family;
    let mut support = 0;
    let v: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let w = family.scaled(xi - x0, h);
            if w > 0.0 {
                support += 1;
            }
            w * yi
        })
        .collect();
    if support < cfg.min_support {
        return Ok(None);
    }
    let mut solver = ElSolver::default();
    Ok(Some(solver.solve(&v, DEFAULT_TOL, DEFAULT_MAX_ITER, None)?.logratio))
}

/// Evaluation points for a smoothing variable with sorted values `sorted`.
pub(crate) fn eval_points(sorted: &[f64], policy: EvalPolicy) -> Vec<f64> {
    match policy {
        EvalPolicy::ObservedPoints => sorted.to_vec(),
        EvalPolicy::UniformGrid(m) => {
            let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
            if m == 1 {
                return vec![0.5 * (lo + hi)];
            }
            (0..m)
                .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
                .collect()
        }
    }
}

/// A local statistic profile: the value at each evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalProfile {
    pub points: Vec<f64>,
    /// `None` where the support rule skipped the point.
    pub values: Vec<Option<f64>>,
}

/// Power sums of the nonzero constraint values at one evaluation point.
#[derive(Debug, Default)]
struct PowerSums {
    s1: f64,
    s2: f64,
    s3: f64,
    min: f64,
    max: f64,
}

impl PowerSums {
    fn push(&mut self, t: f64) {
        let t2 = t * t;
        self.s1 += t;
        self.s2 += t2;
        self.s3 += t2 * t;
        self.min = self.min.min(t);
        self.max = self.max.max(t);
    }

    /// Upper bound on the log ratio from `log(1 + t) <= t - t^2/2 + t^3/3`
    /// (valid for `t > -1`), maximised over the feasible multipliers.
    /// Infinite when the constraint values do not straddle zero.
    fn upper_bound(&self) -> f64 {
        if !(self.min < 0.0 && self.max > 0.0) {
            return f64::INFINITY;
        }
        let p = |l: f64| l * self.s1 - 0.5 * l * l * self.s2 + l * l * l * self.s3 / 3.0;
        let (lo, hi) = (-1.0 / self.max, -1.0 / self.min);
        let mut best = p(lo).max(p(hi));
        // stationary points: s3 l^2 - s2 l + s1 = 0
        let (a, b, c) = (self.s3, -self.s2, self.s1);
        if a != 0.0 {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                for l in [(-b - r) / (2.0 * a), (-b + r) / (2.0 * a)] {
                    if l > lo && l < hi {
                        best = best.max(p(l));
                    }
                }
            }
        } else if b != 0.0 {
            let l = -c / b;
            if l > lo && l < hi {
                best = best.max(p(l));
            }
        }
        2.0 * best
    }
}

/// Maximises `EL(K_h(s_i - s0) * w_i)` over evaluation points `s0`.
///
/// `smoothing` is the variable the kernel localises on; `weights` multiply
/// the kernel values. Sorted once; windows come from binary search.
pub(crate) fn max_local_el(
    smoothing: &[f64],
    weights: &[f64],
    h: f64,
    family: KernelFamily,
    policy: EvalPolicy,
    min_support: usize,
    mut profile: Option<&mut LocalProfile>,
) -> Result<FeatureStat> {
    check_bandwidth(h)?;
    let sample = SortedSample::new(smoothing, weights);
    let points = eval_points(&sample.x, policy);
    let reach = family.radius().map(|r| r * h * (1.0 + 1e-12));

    let window = |x0: f64| match reach {
        Some(r) => sample.window(x0, r),
        None => (0, sample.x.len()),
    };
    let fill = |x0: f64, v: &mut Vec<f64>| {
        let (lo, hi) = window(x0);
        v.clear();
        let mut sums = PowerSums::default();
        for k in lo..hi {
            let w = family.scaled(sample.x[k] - x0, h);
            if w > 0.0 {
                let t = w * sample.y[k];
                sums.push(t);
                v.push(t);
            }
        }
        sums
    };

    let mut solver = ElSolver::default();
    let mut v = Vec::with_capacity(sample.x.len());
    let mut best = FeatureStat {
        stat: f64::NEG_INFINITY,
        argmax_point: None,
        skipped: 0,
        bandwidth: Some(h),
    };
    let mut warm: Option<f64> = None;

    if let Some(p) = profile.as_deref_mut() {
        // every value is wanted: solve in order, reusing repeated points
        let mut last: Option<(f64, Option<f64>)> = None;
        for &x0 in &points {
            let value = match last {
                Some((prev, val)) if prev == x0 => val,
                _ => {
                    fill(x0, &mut v);
                    if v.len() < min_support {
                        None
                    } else {
                        let out = solver.solve(&v, DEFAULT_TOL, DEFAULT_MAX_ITER, warm)?;
                        if out.logratio.is_finite() {
                            warm = Some(out.lambda);
                        }
                        Some(out.logratio)
                    }
                }
            };
            last = Some((x0, value));
            p.points.push(x0);
            p.values.push(value);
            match value {
                None => best.skipped += 1,
                Some(s) if s > best.stat => {
                    best.stat = s;
                    best.argmax_point = Some(x0);
                }
                Some(_) => {}
            }
        }
    } else {
        // bound every distinct point cheaply, then solve in decreasing
        // bound order until no remaining point can win
        let mut candidates: Vec<(usize, f64)> = Vec::with_capacity(points.len());
        let mut last: Option<(f64, bool)> = None;
        for (i, &x0) in points.iter().enumerate() {
            let supported = match last {
                Some((prev, ok)) if prev == x0 => {
                    if !ok {
                        best.skipped += 1;
                    }
                    last = Some((x0, ok));
                    continue;
                }
                _ => {
                    let sums = fill(x0, &mut v);
                    let ok = v.len() >= min_support;
                    if ok {
                        candidates.push((i, sums.upper_bound()));
                    } else {
                        best.skipped += 1;
                    }
                    ok
                }
            };
            last = Some((x0, supported));
        }
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut best_index = usize::MAX;
        for &(i, bound) in &candidates {
            if best_index != usize::MAX && bound < best.stat * (1.0 - 1e-9) - 1e-12 {
                break;
            }
            fill(points[i], &mut v);
            let out = solver.solve(&v, DEFAULT_TOL, DEFAULT_MAX_ITER, warm)?;
            if out.logratio.is_finite() {
                warm = Some(out.lambda);
            }
            let s = out.logratio;
            if s > best.stat || (s == best.stat && i < best_index) {
                best.stat = s;
                best.argmax_point = Some(points[i]);
                best_index = i;
            }
        }
    }
    if best.argmax_point.is_none() {
        best.stat = 0.0;
    }
    Ok(best)
}

/// Screening statistic for one feature: resolves the bandwidth, then
/// maximises the local statistic over the evaluation points.
///
/// A constant feature has statistic 0.
pub fn feature_stat(x: &[f64], y: &[f64], cfg: &ScreeningConfig) -> Result<FeatureStat> {
    if x.len() != y.len() {
        return Err(ScreenError::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if kernel::is_constant(x) {
        return Ok(FeatureStat::degenerate());
    }
    let scaled = match cfg.rescale {
        RescaleMode::None => None,
        mode => Some(rescale_column(x, mode)),
    };
    let u = scaled.as_deref().unwrap_or(x);
    let h = kernel::resolve_bandwidth(u, y, &cfg.kernel)?;
    let mut fs = max_local_el(
        u,
        y,
        h,
        cfg.kernel.family,
        cfg.eval_policy,
        cfg.min_support,
        None,
    )?;
    if let (Some(u), Some(a)) = (&scaled, fs.argmax_point) {
        // both transforms are monotone, so an observed point maps back
        // exactly; grid points fall back to the nearest observation
        let i = (0..u.len())
            .min_by(|&i, &k| (u[i] - a).abs().total_cmp(&(u[k] - a).abs()))
            .expect("non-empty column");
        fs.argmax_point = Some(x[i]);
    }
    Ok(fs)
}

/// Local statistic at every evaluation point for one feature, with the
/// bandwidth already chosen.
pub fn local_profile(
    x: &[f64],
    y: &[f64],
    h: f64,
    cfg: &ScreeningConfig,
) -> Result<(FeatureStat, LocalProfile)> {
    let mut profile = LocalProfile {
        points: Vec::new(),
        values: Vec::new(),
    };
    let stat = max_local_el(
        x,
        y,
        h,
        cfg.kernel.family,
        cfg.eval_policy,
        cfg.min_support,
        Some(&mut profile),
    )?;
    Ok((stat, profile))
}

/// Runs `stat` on every column in parallel and assembles a ranked report.
/// A failing feature gets statistic 0 and a diagnostic.
pub(crate) fn screen_columns<F>(
    d: &Dataset,
    columns: &[Vec<f64>],
    method: Method,
    selection: Selection,
    stat: F,
) -> ScreeningReport
where
    F: Fn(&[f64]) -> Result<FeatureStat> + Sync,
{
    let results: Vec<Result<FeatureStat>> = columns.par_iter().map(|c| stat(c)).collect();
    let p = results.len();
    let mut stats = Vec::with_capacity(p);
    let mut argmax = Vec::with_capacity(p);
    let mut bandwidths = Vec::with_capacity(p);
    let mut skipped = Vec::with_capacity(p);
    let mut diagnostics = Vec::new();
    for (j, r) in results.into_iter().enumerate() {
        let fs = r.unwrap_or_else(|e| {
            diagnostics.push((j, e.to_string()));
            FeatureStat::degenerate()
        });
        stats.push(fs.stat);
        argmax.push(fs.argmax_point);
        bandwidths.push(fs.bandwidth);
        skipped.push(fs.skipped);
    }
    ScreeningReport::assemble(
        method,
        d.feature_names().to_vec(),
        stats,
        argmax,
        bandwidths,
        skipped,
        diagnostics,
        selection,
    )
}

/// Screens every feature of `d` and applies the selection rule.
pub fn screen(d: &Dataset, cfg: &ScreeningConfig) -> Result<ScreeningReport> {
    cfg.validate()?;
    Ok(screen_columns(d, d.columns(), Method::El, cfg.selection, |x| {
        feature_stat(x, d.y(), cfg)
    }))
}
