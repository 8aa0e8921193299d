//! Browser demo: simulate a design, screen it, and inspect the local
//! empirical likelihood behind one feature's statistic.
//!
//! The plain functions are host-testable; the `*_json` wrappers are what
//! the page calls through wasm-bindgen.

use elscreen::kernel::resolve_bandwidth;
use elscreen::screening::local_profile;
use elscreen::simgen::{gen_example, SimulationSpec};
use elscreen::{el_logratio, screen, vc_screen, ElStatus, ScreeningConfig, Selection, VcConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const MAX_N: usize = 1000;
pub const MAX_P: usize = 500;
const CURVE_POINTS: usize = 201;

/// Ranking of one simulated data set. Infinite statistics are reported
/// through `infinite` and left out of `stats`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenView {
    pub names: Vec<String>,
    pub stats: Vec<Option<f64>>,
    pub infinite: Vec<bool>,
    pub ranks: Vec<usize>,
    pub selected: Vec<bool>,
    /// Leading features that carry signal in every design.
    pub active: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileView {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Evaluation points in increasing order.
    pub points: Vec<f64>,
    /// `None` where the point was skipped or the statistic is infinite.
    pub values: Vec<Option<f64>>,
    pub infinite: Vec<bool>,
    pub bandwidth: f64,
    pub stat: String,
    pub argmax: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCurve {
    pub lambda: Vec<f64>,
    /// `2 sum log(1 + lambda v_i)` along `lambda`.
    pub value: Vec<f64>,
    pub lambda_hat: Option<f64>,
    pub logratio: String,
    pub status: String,
    /// Open interval of multipliers keeping every `1 + lambda v_i` positive.
    pub feasible: (Option<f64>, Option<f64>),
}

fn spec(example: u8, n: usize, p: usize, seed: u64) -> Result<SimulationSpec, String> {
    if n > MAX_N || p > MAX_P {
        return Err(format!("demo limits are n <= {MAX_N}, p <= {MAX_P}"));
    }
    let mut s = SimulationSpec::new(example, n, p);
    s.seed = seed;
    s.validate().map_err(|e| e.to_string())?;
    Ok(s)
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn screen_view(example: u8, n: usize, p: usize, seed: u64, top_d: usize) -> Result<ScreenView, String> {
    let s = spec(example, n, p, seed)?;
    let d = gen_example(&s, 0).map_err(|e| e.to_string())?;
    let selection = Selection::TopD(top_d.clamp(1, p));
    let report = if example == 5 {
        let cfg = VcConfig {
            selection,
            ..Default::default()
        };
        vc_screen(&d, &cfg)
    } else {
        let cfg = ScreeningConfig {
            selection,
            ..Default::default()
        };
        screen(&d, &cfg)
    }
    .map_err(|e| e.to_string())?;
    let mut selected = vec![false; p];
    for &j in &report.selected {
        selected[j] = true;
    }
    Ok(ScreenView {
        names: report.feature_names.clone(),
        stats: report.stats.iter().map(|&v| finite_or_none(v)).collect(),
        infinite: report.stats.iter().map(|v| v.is_infinite()).collect(),
        ranks: report.ranks.clone(),
        selected,
        active: 4,
    })
}

/// Local statistic along the observed values of one feature. Designs 1-4
/// only; design 5 localises on the index variable instead.
pub fn profile_view(example: u8, n: usize, p: usize, seed: u64, feature: usize) -> Result<ProfileView, String> {
    if example == 5 {
        return Err("the profile view covers designs 1 to 4".into());
    }
    let s = spec(example, n, p, seed)?;
    if feature >= p {
        return Err(format!("feature index {feature} out of range for p = {p}"));
    }
    let d = gen_example(&s, 0).map_err(|e| e.to_string())?;
    let cfg = ScreeningConfig::default();
    let (x, y) = (d.column(feature), d.y());
    let h = resolve_bandwidth(x, y, &cfg.kernel).map_err(|e| e.to_string())?;
    let (stat, prof) = local_profile(x, y, h, &cfg).map_err(|e| e.to_string())?;

    let mut order: Vec<usize> = (0..prof.points.len()).collect();
    order.sort_by(|&a, &b| prof.points[a].total_cmp(&prof.points[b]));
    Ok(ProfileView {
        x: x.to_vec(),
        y: y.to_vec(),
        points: order.iter().map(|&k| prof.points[k]).collect(),
        values: order.iter().map(|&k| prof.values[k].and_then(finite_or_none)).collect(),
        infinite: order
            .iter()
            .map(|&k| prof.values[k].is_some_and(f64::is_infinite))
            .collect(),
        bandwidth: h,
        stat: elscreen::report::fmt_stat(stat.stat),
        argmax: stat.argmax_point,
    })
}

/// Parses numbers separated by commas or whitespace.
pub fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err("enter at least one value".into());
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

/// The dual objective whose maximum over the feasible multipliers is the
/// log empirical likelihood ratio for `E[v] = 0`.
pub fn dual_curve(v: &[f64]) -> Result<DualCurve, String> {
    let out = el_logratio(v).map_err(|e| e.to_string())?;
    let vmax = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vmin = v.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = (vmax > 0.0).then(|| -1.0 / vmax);
    let hi = (vmin < 0.0).then(|| -1.0 / vmin);

    let scale = {
        let nz: Vec<f64> = v.iter().filter(|x| **x != 0.0).map(|x| x.abs()).collect();
        if nz.is_empty() {
            1.0
        } else {
            nz.len() as f64 / nz.iter().sum::<f64>()
        }
    };
    let (a, b) = match (lo, hi) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, a.abs().max(scale) * 3.0),
        (None, Some(b)) => (-b.abs().max(scale) * 3.0, b),
        (None, None) => (-scale, scale),
    };
    let lambda: Vec<f64> = (0..CURVE_POINTS)
        .map(|k| {
            let t = 0.005 + 0.99 * k as f64 / (CURVE_POINTS - 1) as f64;
            a + (b - a) * t
        })
        .collect();
    let value = lambda
        .iter()
        .map(|&l| 2.0 * v.iter().map(|&x| (l * x).ln_1p()).sum::<f64>())
        .collect();
    Ok(DualCurve {
        lambda,
        value,
        lambda_hat: finite_or_none(out.lambda),
        logratio: elscreen::report::fmt_stat(out.logratio),
        status: match out.status {
            ElStatus::Converged => "converged",
            ElStatus::InfiniteHull => "zero outside the convex hull",
            ElStatus::AllZero => "all values zero",
        }
        .into(),
        feasible: (lo, hi),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn screen_json(example: u8, n: usize, p: usize, seed: u32, top_d: usize) -> Result<String, JsValue> {
    to_json(screen_view(example, n, p, seed as u64, top_d))
}

#[wasm_bindgen]
pub fn profile_json(example: u8, n: usize, p: usize, seed: u32, feature: usize) -> Result<String, JsValue> {
    to_json(profile_view(example, n, p, seed as u64, feature))
}

#[wasm_bindgen]
pub fn dual_json(values: &str) -> Result<String, JsValue> {
    to_json(parse_values(values).and_then(|v| dual_curve(&v)))
}
