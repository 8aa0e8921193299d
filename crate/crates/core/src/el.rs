//! Empirical likelihood ratio for a single zero-mean constraint.
//!
//! For values `v_1..v_n` the log ratio is `2 sum log(1 + lambda v_i)` where
//! `lambda` is the root of the score `sum v_i / (1 + lambda v_i)`. When zero
//! lies outside the convex hull of the nonzero values the constraint is
//! infeasible and the ratio is `+inf`.
//!
//! The solver works on `v / max|v|`, so the statistic is invariant to
//! rescaling `v` up to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreenError};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Relative shrink of the feasible multiplier interval before bracketing.
const BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElStatus {
    Converged,
    InfiniteHull,
    AllZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElOutcome {
    /// `-2 log` empirical likelihood ratio, `+inf` when infeasible.
    pub logratio: f64,
    /// Lagrange multiplier on the original scale of `v`; NaN when the
    /// ratio is infinite.
    pub lambda: f64,
    pub status: ElStatus,
    pub iterations: usize,
}

impl ElOutcome {
    fn infinite() -> Self {
        ElOutcome {
            logratio: f64::INFINITY,
            lambda: f64::NAN,
            status: ElStatus::InfiniteHull,
            iterations: 0,
        }
    }

    fn all_zero() -> Self {
        ElOutcome {
            logratio: 0.0,
            lambda: 0.0,
            status: ElStatus::AllZero,
            iterations: 0,
        }
    }
}

/// Log empirical likelihood ratio with the default tolerance and
/// iteration cap.
pub fn el_logratio(v: &[f64]) -> Result<ElOutcome> {
    el_logratio_with(v, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn el_logratio_with(v: &[f64], tol: f64, max_iter: usize) -> Result<ElOutcome> {
    let mut solver = ElSolver::default();
    solver.solve(v, tol, max_iter, None)
}

/// Reusable solver holding a scratch buffer; lets callers evaluating many
/// nearby constraints warm-start Newton from the previous multiplier.
#[derive(Debug, Default, Clone)]
pub struct ElSolver {
    scratch: Vec<f64>,
}

/// Sign summary of the nonzero entries.
struct Hull {
    max_abs: f64,
    has_pos: bool,
    has_neg: bool,
}

fn hull(v: &[f64]) -> Result<Hull> {
    let mut h = Hull {
        max_abs: 0.0,
        has_pos: false,
        has_neg: false,
    };
    for &x in v {
        if !x.is_finite() {
            return Err(ScreenError::Config(format!(
                "empirical likelihood input must be finite, got {x}"
            )));
        }
        h.has_pos |= x > 0.0;
        h.has_neg |= x < 0.0;
        h.max_abs = h.max_abs.max(x.abs());
    }
    Ok(h)
}

impl ElSolver {
    /// Solves for the multiplier. `warm_lambda`, on the original scale of
    /// `v`, seeds Newton when it is feasible.
    pub fn solve(
        &mut self,
        v: &[f64],
        tol: f64,
        max_iter: usize,
        warm_lambda: Option<f64>,
    ) -> Result<ElOutcome> {
        let h = hull(v)?;
        if !h.has_pos && !h.has_neg {
            return Ok(ElOutcome::all_zero());
        }
        if !(h.has_pos && h.has_neg) {
            return Ok(ElOutcome::infinite());
        }

        let scale = h.max_abs;
        self.scratch.clear();
        self.scratch
            .extend(v.iter().filter(|&&x| x != 0.0).map(|&x| x / scale));
        let u = &self.scratch;

        let (mut umin, mut umax, mut abs_sum) = (0.0f64, 0.0f64, 0.0);
        for &x in u {
            umin = umin.min(x);
            umax = umax.max(x);
            abs_sum += x.abs();
        }
        // 1 + lambda u_i > 0 for all i  <=>  lambda in (-1/umax, -1/umin)
        let lo_feasible = -1.0 / umax;
        let hi_feasible = -1.0 / umin;
        let mut lo = lo_feasible * (1.0 - BOUNDARY_MARGIN);
        let mut hi = hi_feasible * (1.0 - BOUNDARY_MARGIN);
        let width0 = hi - lo;
        let stop_score = tol * abs_sum;

        let mut lambda = match warm_lambda.map(|l| l * scale) {
            Some(l) if l > lo && l < hi && l.is_finite() => l,
            _ => 0.0,
        };
        let mut iterations = 0;
        loop {
            let (g, dg) = score(u, lambda);
            if g.abs() <= stop_score {
                break;
            }
            // the score is strictly decreasing in lambda
            if g > 0.0 {
                lo = lambda;
            } else {
                hi = lambda;
            }
            if hi - lo <= tol * width0 {
                lambda = 0.5 * (lo + hi);
                break;
            }
            iterations += 1;
            if iterations > max_iter {
                return Err(ScreenError::SolverFailure {
                    iterations: max_iter,
                    lo: lo / scale,
                    hi: hi / scale,
                });
            }
            let newton = lambda - g / dg;
            lambda = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }

        let logratio = 2.0 * u.iter().map(|&x| (lambda * x).ln_1p()).sum::<f64>();
        Ok(ElOutcome {
            logratio: logratio.max(0.0),
            lambda: lambda / scale,
            status: ElStatus::Converged,
            iterations,
        })
    }
}

/// Score and its derivative at `lambda`.
#[inline]
fn score(u: &[f64], lambda: f64) -> (f64, f64) {
    let (mut g, mut dg) = (0.0, 0.0);
    for &x in u {
        let r = x / (1.0 + lambda * x);
        g += r;
        dg -= r * r;
    }
    (g, dg)
}

/// Brute-force oracle: maximises the dual objective `2 sum log(1 + lambda v_i)`
/// over a uniform grid of `grid` multipliers spanning the feasible
/// interval, then refines the best cell by golden-section search on the
/// (concave) objective. No score equation is solved.
pub fn el_logratio_bruteforce(v: &[f64], grid: usize) -> f64 {
    let nz: Vec<f64> = v.iter().copied().filter(|&x| x != 0.0).collect();
    if nz.is_empty() {
        return 0.0;
    }
    let vmax = nz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vmin = nz.iter().copied().fold(f64::INFINITY, f64::min);
    if vmax <= 0.0 || vmin >= 0.0 {
        return f64::INFINITY;
    }
    let dual = |l: f64| -> f64 { 2.0 * nz.iter().map(|&x| (1.0 + l * x).ln()).sum::<f64>() };
    let lo = -1.0 / vmax;
    let hi = -1.0 / vmin;
    let grid = grid.max(3);
    let step = (hi - lo) / (grid - 1) as f64;
    // interior points only; the endpoints are infeasible
    let mut best_k = 1;
    let mut best = f64::NEG_INFINITY;
    for k in 1..grid - 1 {
        let val = dual(lo + step * k as f64);
        if val > best {
            best = val;
            best_k = k;
        }
    }
    let (mut a, mut b) = (
        lo + step * (best_k as f64 - 1.0),
        lo + step * (best_k as f64 + 1.0),
    );
    a = a.max(lo + 1e-15 * (hi - lo));
    b = b.min(hi - 1e-15 * (hi - lo));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if dual(c) >= dual(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(dual(0.5 * (a + b))).max(0.0)
}
