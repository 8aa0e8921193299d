//! Iterative screening for features that are marginally null but jointly
//! relevant.
//!
//! Each round recruits candidates by local EL screening, then keeps a sparse
//! subset with a group-penalised additive spline fit. Later rounds screen
//! the remaining features after linearly regressing out the kept ones.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, ScreenError};
use crate::kernel::{is_constant, quantile_sorted};
use crate::report::Selection;
use crate::rng::{stream_rng, FOLD_STREAM};
use crate::screening::{screen, ScreeningConfig};

/// Penalty values tried by cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyGrid {
    /// `len` log-spaced values from the smallest penalty that zeroes every
    /// group down to `min_ratio` times that.
    Relative { len: usize, min_ratio: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseAdditiveConfig {
    /// B-spline functions per feature (cubic when at least 4).
    pub basis_size: usize,
    pub penalty_grid: PenaltyGrid,
    pub k_folds: usize,
    /// When set, a second pass penalises each group by
    /// `1 / norm^exponent` of its first-pass coefficients.
    pub adaptive_exponent: Option<f64>,
    /// Seeds the fold assignment.
    pub seed: u64,
}

impl Default for SparseAdditiveConfig {
    fn default() -> Self {
        SparseAdditiveConfig {
            basis_size: 5,
            penalty_grid: PenaltyGrid::Relative {
                len: 30,
                min_ratio: 1e-3,
            },
            k_folds: 5,
            adaptive_exponent: Some(2.0),
            seed: 0,
        }
    }
}

impl SparseAdditiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.basis_size < 3 {
            return Err(ScreenError::Config(format!(
                "basis_size must be at least 3, got {}",
                self.basis_size
            )));
        }
        if let Some(e) = self.adaptive_exponent {
            if !(e > 0.0 && e.is_finite()) {
                return Err(ScreenError::Config(format!(
                    "adaptive exponent must be positive, got {e}"
                )));
            }
        }
        if self.k_folds < 2 {
            return Err(ScreenError::Config("k_folds must be at least 2".into()));
        }
        match &self.penalty_grid {
            PenaltyGrid::Relative { len, min_ratio } => {
                if *len == 0 || !(*min_ratio > 0.0 && *min_ratio <= 1.0) {
                    return Err(ScreenError::Config(
                        "relative penalty grid needs len >= 1 and 0 < min_ratio <= 1".into(),
                    ));
                }
            }
            PenaltyGrid::Explicit(v) => {
                if v.is_empty() || v.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
                    return Err(ScreenError::Config(
                        "explicit penalty grid needs positive finite values".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// B-spline basis on a fixed knot vector.
#[derive(Debug, Clone)]
struct BSplineBasis {
    knots: Vec<f64>,
    degree: usize,
    size: usize,
}

impl BSplineBasis {
    /// `size` functions with interior knots at quantiles of `x`.
    fn new(x: &[f64], size: usize) -> Self {
        let degree = (size - 1).min(3);
        let interior = size - degree - 1;
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        let mut knots = vec![lo; degree + 1];
        knots.extend((1..=interior).map(|k| quantile_sorted(&sorted, k as f64 / (interior + 1) as f64)));
        knots.extend(std::iter::repeat(hi).take(degree + 1));
        BSplineBasis {
            knots,
            degree,
            size,
        }
    }

    /// Values of every basis function at `x` (Cox–de Boor).
    fn eval(&self, x: f64, out: &mut [f64]) {
        let t = &self.knots;
        let last = t.len() - self.degree - 2;
        // span index with t[k] <= x < t[k+1], clamped to the last interval
        let mut k = self.degree;
        while k < last && x >= t[k + 1] {
            k += 1;
        }
        let x = x.clamp(t[self.degree], t[last + 1]);
        let mut b = vec![0.0; self.degree + 1];
        b[0] = 1.0;
        for d in 1..=self.degree {
            let mut saved = 0.0;
            for r in 0..d {
                let left = t[k + r + 1 - d];
                let right = t[k + r + 1];
                let denom = right - left;
                let temp = if denom > 0.0 { b[r] / denom } else { 0.0 };
                b[r] = saved + (right - x) * temp;
                saved = (x - left) * temp;
            }
            b[d] = saved;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, &v) in b.iter().enumerate() {
            out[k - self.degree + r] = v;
        }
    }

    fn design(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(x.len(), self.size);
        let mut row = vec![0.0; self.size];
        for (i, &v) in x.iter().enumerate() {
            self.eval(v, &mut row);
            for (c, &b) in row.iter().enumerate() {
                m[(i, c)] = b;
            }
        }
        m
    }
}

/// A feature's basis block restricted to training rows, centred and
/// orthonormalised so that `Q^T Q / n = I`.
struct Group {
    q: DMatrix<f64>,
    mean: Vec<f64>,
    transform: DMatrix<f64>,
}

impl Group {
    fn new(block: &DMatrix<f64>, rows: &[usize]) -> Option<Self> {
        let n = rows.len();
        let k = block.ncols();
        let mut centred = DMatrix::zeros(n, k);
        let mut mean = vec![0.0; k];
        for c in 0..k {
            mean[c] = rows.iter().map(|&i| block[(i, c)]).sum::<f64>() / n as f64;
            for (r, &i) in rows.iter().enumerate() {
                centred[(r, c)] = block[(i, c)] - mean[c];
            }
        }
        let svd = centred.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.max();
        if !(smax > 0.0) {
            return None;
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-8 * smax)
            .collect();
        // transform = V_r diag(sqrt(n) / s_r)
        let mut transform = DMatrix::zeros(k, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let scale = (n as f64).sqrt() / svd.singular_values[i];
            for r in 0..k {
                transform[(r, c)] = v_t[(i, r)] * scale;
            }
        }
        let q = &centred * &transform;
        Some(Group { q, mean, transform })
    }

    fn dim(&self) -> usize {
        self.q.ncols()
    }

    /// Transformed basis values for rows of `block`.
    fn project(&self, block: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
        let k = block.ncols();
        let mut centred = DMatrix::zeros(rows.len(), k);
        for (r, &i) in rows.iter().enumerate() {
            for c in 0..k {
                centred[(r, c)] = block[(i, c)] - self.mean[c];
            }
        }
        centred * &self.transform
    }
}

/// Group lasso on orthonormal groups by block coordinate descent, for a
/// decreasing sequence of penalties with warm starts. Group `g` is
/// penalised by `lambda * weights[g] * sqrt(dim)`; an infinite weight keeps
/// the group at zero. Returns coefficients per penalty.
fn group_lasso_path(
    groups: &[Option<Group>],
    y: &[f64],
    lambdas: &[f64],
    weights: &[f64],
) -> Vec<Vec<Vec<f64>>> {
    let n = y.len() as f64;
    // stacked columns of the active groups and their offsets
    let active: Vec<usize> = (0..groups.len())
        .filter(|&g| groups[g].is_some() && weights[g].is_finite())
        .collect();
    let mut offset = vec![0usize; groups.len()];
    let mut total = 0;
    for &g in &active {
        offset[g] = total;
        total += groups[g].as_ref().map_or(0, Group::dim);
    }
    let mut stacked = DMatrix::zeros(y.len(), total);
    for &g in &active {
        let q = &groups[g].as_ref().expect("active group").q;
        stacked.columns_mut(offset[g], q.ncols()).copy_from(q);
    }
    let gram = stacked.tr_mul(&stacked) / n;
    // c = Q^T (y - Q beta) / n, kept current as coefficients move
    let mut c: Vec<f64> = (0..total)
        .map(|k| stacked.column(k).iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / n)
        .collect();
    let scale = (y.iter().map(|v| v * v).sum::<f64>() / n).sqrt().max(f64::MIN_POSITIVE);

    let mut beta: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| vec![0.0; g.as_ref().map_or(0, Group::dim)])
        .collect();
    let mut path = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        for _sweep in 0..10_000 {
            let mut max_change: f64 = 0.0;
            for &g in &active {
                let d = beta[g].len();
                let o = offset[g];
                // z = Q_g^T (resid + Q_g b) / n, using Q_g^T Q_g / n = I
                let z: Vec<f64> = (0..d).map(|k| c[o + k] + beta[g][k]).collect();
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                let shrink = if norm > 0.0 {
                    (1.0 - lambda * weights[g] * (d as f64).sqrt() / norm).max(0.0)
                } else {
                    0.0
                };
                for k in 0..d {
                    let delta = shrink * z[k] - beta[g][k];
                    if delta != 0.0 {
                        let col = gram.column(o + k);
                        c.iter_mut().zip(col.iter()).for_each(|(ci, gk)| *ci -= gk * delta);
                        beta[g][k] += delta;
                        max_change = max_change.max(delta.abs());
                    }
                }
            }
            if max_change < 1e-6 * scale {
                break;
            }
        }
        path.push(beta.clone());
    }
    path
}

/// Outcome of [`fit_sparse_additive`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseAdditiveFit {
    /// Retained candidate features (indices into the input columns).
    pub retained: Vec<usize>,
    /// In-sample additive prediction.
    pub fitted: Vec<f64>,
    /// Penalty chosen by cross-validation.
    pub penalty: f64,
    /// `(penalty, cv_error)` in decreasing penalty order.
    pub cv_curve: Vec<(f64, f64)>,
}

/// Basis blocks and fold assignment shared by every stage of a fit.
struct Problem<'a> {
    blocks: Vec<DMatrix<f64>>,
    y: &'a [f64],
    fold: Vec<usize>,
    k_folds: usize,
}

/// One penalised stage: penalty chosen by minimum CV error, then refit on
/// all rows. Returns the per-group coefficients at that penalty.
struct Stage {
    beta: Vec<Vec<f64>>,
    groups: Vec<Option<Group>>,
    penalty: f64,
    cv_curve: Vec<(f64, f64)>,
}

impl Problem<'_> {
    fn stage(&self, weights: &[f64], grid: &PenaltyGrid) -> Stage {
        let n = self.y.len();
        let all_rows: Vec<usize> = (0..n).collect();
        let full = build_groups(&self.blocks, &all_rows);
        let y_mean = self.y.iter().sum::<f64>() / n as f64;
        let yc: Vec<f64> = self.y.iter().map(|v| v - y_mean).collect();
        let lambdas = penalty_values(&full, &yc, weights, grid);

        let cv_err: Vec<f64> = (0..self.k_folds)
            .into_par_iter()
            .map(|f| {
                let train: Vec<usize> = (0..n).filter(|&i| self.fold[i] != f).collect();
                let test: Vec<usize> = (0..n).filter(|&i| self.fold[i] == f).collect();
                let groups = build_groups(&self.blocks, &train);
                let ty_mean = train.iter().map(|&i| self.y[i]).sum::<f64>() / train.len() as f64;
                let ty: Vec<f64> = train.iter().map(|&i| self.y[i] - ty_mean).collect();
                let path = group_lasso_path(&groups, &ty, &lambdas, weights);
                let test_q: Vec<Option<DMatrix<f64>>> = groups
                    .iter()
                    .zip(&self.blocks)
                    .map(|(g, b)| g.as_ref().map(|g| g.project(b, &test)))
                    .collect();
                path.iter()
                    .map(|beta| {
                        let mut pred = vec![ty_mean; test.len()];
                        for (q, b) in test_q.iter().zip(beta) {
                            if let Some(q) = q {
                                add_prediction(q, b, &mut pred);
                            }
                        }
                        test.iter()
                            .zip(&pred)
                            .map(|(&i, p)| (self.y[i] - p).powi(2))
                            .sum::<f64>()
                    })
                    .collect::<Vec<f64>>()
            })
            .reduce(
                || vec![0.0; lambdas.len()],
                |a, b| a.iter().zip(&b).map(|(u, v)| u + v).collect(),
            );

        // smallest CV error; ties go to the larger penalty (earlier in the grid)
        let mut best = 0;
        for k in 1..lambdas.len() {
            if cv_err[k] < cv_err[best] {
                best = k;
            }
        }
        let path = group_lasso_path(&full, &yc, &lambdas[..=best], weights);
        Stage {
            beta: path.into_iter().last().expect("non-empty path"),
            groups: full,
            penalty: lambdas[best],
            cv_curve: lambdas.iter().copied().zip(cv_err).collect(),
        }
    }
}

fn group_norm(b: &[f64]) -> f64 {
    b.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Group-penalised additive spline fit. Each column is expanded in a
/// B-spline basis and the penalty is chosen by k-fold cross-validation on
/// the grid. With an adaptive exponent, a second pass reweights each group
/// by an inverse power of its first-pass coefficient norm. Features whose coefficient
/// group is nonzero are retained.
pub fn fit_sparse_additive(
    columns: &[&[f64]],
    y: &[f64],
    cfg: &SparseAdditiveConfig,
) -> Result<SparseAdditiveFit> {
    cfg.validate()?;
    if columns.is_empty() {
        return Err(ScreenError::Config("candidate set is empty".into()));
    }
    let n = y.len();
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(ScreenError::LengthMismatch {
            expected: n,
            got: c.len(),
        });
    }
    if n < 2 * cfg.k_folds {
        return Err(ScreenError::InsufficientData(format!(
            "need at least {} observations for {}-fold CV",
            2 * cfg.k_folds,
            cfg.k_folds
        )));
    }
    // constant columns carry no basis and are never retained
    let usable: Vec<usize> = (0..columns.len())
        .filter(|&j| !is_constant(columns[j]))
        .collect();
    let blocks: Vec<DMatrix<f64>> = usable
        .iter()
        .map(|&j| BSplineBasis::new(columns[j], cfg.basis_size).design(columns[j]))
        .collect();

    // fold assignment: shuffled positions dealt round-robin
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(cfg.seed, 0, 0, FOLD_STREAM));
    let mut fold = vec![0usize; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold[i] = pos % cfg.k_folds;
    }
    let problem = Problem {
        blocks,
        y,
        fold,
        k_folds: cfg.k_folds,
    };

    let mut stage = problem.stage(&vec![1.0; usable.len()], &cfg.penalty_grid);
    if let Some(exponent) = cfg.adaptive_exponent.filter(|_| stage.beta.iter().any(|b| group_norm(b) > 0.0)) {
        let weights: Vec<f64> = stage
            .beta
            .iter()
            .map(|b| {
                let norm = group_norm(b);
                if norm > 0.0 {
                    norm.powf(-exponent)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        stage = problem.stage(&weights, &cfg.penalty_grid);
    }

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut fitted = vec![y_mean; n];
    let mut retained = Vec::new();
    for ((g, b), &j) in stage.groups.iter().zip(&stage.beta).zip(&usable) {
        if let Some(g) = g {
            if group_norm(b) > 1e-8 {
                retained.push(j);
            }
            add_prediction(&g.q, b, &mut fitted);
        }
    }
    Ok(SparseAdditiveFit {
        retained,
        fitted,
        penalty: stage.penalty,
        cv_curve: stage.cv_curve,
    })
}

/// Groups for the given rows. `None` marks a block with no variation on
/// those rows.
fn build_groups(blocks: &[DMatrix<f64>], rows: &[usize]) -> Vec<Option<Group>> {
    blocks.iter().map(|b| Group::new(b, rows)).collect()
}

fn add_prediction(q: &DMatrix<f64>, b: &[f64], pred: &mut [f64]) {
    for (c, &coef) in b.iter().enumerate() {
        if coef != 0.0 {
            pred.iter_mut()
                .zip(q.column(c).iter())
                .for_each(|(p, a)| *p += a * coef);
        }
    }
}

fn penalty_values(
    groups: &[Option<Group>],
    yc: &[f64],
    weights: &[f64],
    grid: &PenaltyGrid,
) -> Vec<f64> {
    match grid {
        PenaltyGrid::Explicit(v) => {
            let mut v = v.clone();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
        PenaltyGrid::Relative { len, min_ratio } => {
            let n = yc.len() as f64;
            // smallest penalty at which every group stays at zero
            let lmax = groups
                .iter()
                .zip(weights)
                .filter(|(_, w)| w.is_finite())
                .filter_map(|(g, &w)| g.as_ref().map(|g| (g, w)))
                .map(|(g, w)| {
                    let norm = (0..g.dim())
                        .map(|c| {
                            let s: f64 = g.q.column(c).iter().zip(yc).map(|(a, r)| a * r).sum();
                            (s / n).powi(2)
                        })
                        .sum::<f64>()
                        .sqrt();
                    norm / ((g.dim() as f64).sqrt() * w)
                })
                .fold(0.0, f64::max);
            let lmax = if lmax > 0.0 { lmax } else { 1.0 };
            if *len == 1 {
                return vec![lmax];
            }
            (0..*len)
                .map(|k| lmax * min_ratio.powf(k as f64 / (*len - 1) as f64))
                .collect()
        }
    }
}

/// Orthogonal projector onto the column span of `[1, X_selected]`.
pub struct LinearProjector {
    basis: DMatrix<f64>,
}

impl LinearProjector {
    /// Rank-deficient designs keep only directions with singular value above
    /// `1e-10` of the largest, which gives the minimum-norm least-squares
    /// residual.
    pub fn new(selected: &[&[f64]], n: usize) -> Self {
        let k = selected.len() + 1;
        let mut design = DMatrix::from_element(n, k, 1.0);
        for (c, col) in selected.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                design[(i, c + 1)] = v;
            }
        }
        let svd = design.svd(true, false);
        let u = svd.u.expect("requested U");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
            .collect();
        let basis = DMatrix::from_fn(n, keep.len(), |i, c| u[(i, keep[c])]);
        LinearProjector { basis }
    }

    /// `x - P x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = x.to_vec();
        for c in 0..self.basis.ncols() {
            let col = self.basis.column(c);
            let coef: f64 = col.iter().zip(x).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(col.iter()).for_each(|(v, a)| *v -= a * coef);
        }
        r
    }
}

/// Least-squares residual of `x` on an intercept and the selected columns.
pub fn residualize_feature(x: &[f64], selected: &[&[f64]]) -> Vec<f64> {
    LinearProjector::new(selected, x.len()).residual(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterativeConfig {
    /// Features recruited by each screening pass.
    pub per_round_recruit: usize,
    /// Stop once the retained set reaches this size.
    pub max_total: usize,
    pub max_rounds: usize,
    pub selector: SparseAdditiveConfig,
}

impl IterativeConfig {
    /// Recruits `round(n / ln n)` per pass, capped at 20, and stops at twice
    /// that many kept features.
    pub fn for_n(n: usize) -> Self {
        let recruit = ((n as f64) / (n as f64).ln()).round().clamp(1.0, 20.0) as usize;
        IterativeConfig {
            per_round_recruit: recruit,
            max_total: 2 * recruit,
            max_rounds: 5,
            selector: SparseAdditiveConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_round_recruit < 1 || self.max_total < self.per_round_recruit {
            return Err(ScreenError::Config(
                "need per_round_recruit >= 1 and max_total >= per_round_recruit".into(),
            ));
        }
        if self.max_rounds < 1 {
            return Err(ScreenError::Config("max_rounds must be at least 1".into()));
        }
        self.selector.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Recruit,
    Select,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub round: usize,
    pub phase: Phase,
    /// Sorted feature indices.
    pub features: Vec<usize>,
    /// The selector returned nothing and the top recruit was forced in.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterativeResult {
    /// Sorted feature indices kept after the last round.
    pub final_set: Vec<usize>,
    pub trace: Vec<TraceEntry>,
}

impl IterativeResult {
    pub fn rounds(&self) -> usize {
        self.trace.last().map_or(0, |t| t.round)
    }

    /// CSV with columns `round, phase, features`; features are 1-based and
    /// joined by `;`.
    pub fn write_trace_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["round", "phase", "features"])?;
        for t in &self.trace {
            let phase = match t.phase {
                Phase::Recruit => "recruit",
                Phase::Select => "select",
            };
            let feats: Vec<String> = t.features.iter().map(|j| (j + 1).to_string()).collect();
            w.write_record([t.round.to_string(), phase.to_string(), feats.join(";")])?;
        }
        w.flush().map_err(|e| ScreenError::io("<trace>", e))?;
        Ok(())
    }
}

/// Alternates EL recruitment and sparse additive selection until the
/// retained set stops changing, reaches `max_total`, or `max_rounds` pass.
pub fn iterative_screen(
    d: &Dataset,
    scfg: &ScreeningConfig,
    icfg: &IterativeConfig,
) -> Result<IterativeResult> {
    scfg.validate()?;
    icfg.validate()?;
    let mut trace = Vec::new();
    let mut current: Vec<usize> = Vec::new();

    for round in 1..=icfg.max_rounds {
        let budget = icfg.per_round_recruit.min(icfg.max_total - current.len());
        let remaining: Vec<usize> = (0..d.p()).filter(|j| !current.contains(j)).collect();
        if remaining.is_empty() || budget == 0 {
            break;
        }

        // recruit
        let pseudo: Vec<Vec<f64>> = if current.is_empty() {
            remaining.iter().map(|&j| d.column(j).to_vec()).collect()
        } else {
            let kept: Vec<&[f64]> = current.iter().map(|&j| d.column(j)).collect();
            let proj = LinearProjector::new(&kept, d.n());
            remaining
                .par_iter()
                .map(|&j| proj.residual(d.column(j)))
                .collect()
        };
        let pd = Dataset::with_names(
            pseudo,
            d.y().to_vec(),
            None,
            remaining.iter().map(|&j| d.feature_names()[j].clone()).collect(),
            d.response_name().to_string(),
            None,
        )?;
        let mut c = scfg.clone();
        c.selection = Selection::TopD(budget);
        let report = screen(&pd, &c)?;
        let recruits: Vec<usize> = report.selected.iter().map(|&k| remaining[k]).collect();
        trace.push(TraceEntry {
            round,
            phase: Phase::Recruit,
            features: sorted(recruits.clone()),
            forced: false,
        });

        // select
        let candidates: Vec<usize> = current.iter().chain(&recruits).copied().collect();
        let cols: Vec<&[f64]> = candidates.iter().map(|&j| d.column(j)).collect();
        let mut sel_cfg = icfg.selector.clone();
        sel_cfg.seed = sel_cfg.seed.wrapping_add(round as u64);
        let fit = fit_sparse_additive(&cols, d.y(), &sel_cfg)?;
        let mut next: Vec<usize> = fit.retained.iter().map(|&k| candidates[k]).collect();
        let forced = next.is_empty();
        if forced {
            next = current.clone();
            next.push(recruits[0]);
        }
        let next = sorted(next);
        trace.push(TraceEntry {
            round,
            phase: Phase::Select,
            features: next.clone(),
            forced,
        });

        let converged = next == current;
        current = next;
        if converged || current.len() >= icfg.max_total {
            break;
        }
    }
    Ok(IterativeResult {
        final_set: current,
        trace,
    })
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}
