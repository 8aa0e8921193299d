//! Comparator screening statistics: sure independent ranking (SIRS),
//! distance correlation (DC-SIS) and the parametric marginal empirical
//! likelihood on `x * y`.

use crate::dataset::Dataset;
use crate::el::el_logratio;
use crate::error::{Result, ScreenError};
use crate::kernel::is_constant;
use crate::report::{Method, ScreeningReport, Selection};
use crate::screening::{screen_columns, FeatureStat};

fn check_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(ScreenError::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

/// `n^-1 sum_k [ n^-1 sum_i x~_i 1(y_i < y_k) ]^2` with `x~` standardised
/// to mean 0 and unit variance.
pub fn sirs_stat(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, y)?;
    let n = x.len();
    if n < 2 || is_constant(x) {
        return Ok(0.0);
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    let sd = var.sqrt();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));

    // walk y in increasing order; all observations tied with y_k share the
    // sum over strictly smaller responses
    let mut below = 0.0;
    let mut total = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && y[order[end]] == y[order[start]] {
            end += 1;
        }
        let inner = below / nf;
        total += (end - start) as f64 * inner * inner;
        for &i in &order[start..end] {
            below += (x[i] - mean) / sd;
        }
        start = end;
    }
    Ok(total / nf)
}

/// Row means and grand mean of `|v_i - v_j|`.
fn distance_means(v: &[f64]) -> (Vec<f64>, f64) {
    let n = v.len();
    let rows: Vec<f64> = v
        .iter()
        .map(|&a| v.iter().map(|&b| (a - b).abs()).sum::<f64>() / n as f64)
        .collect();
    let grand = rows.iter().sum::<f64>() / n as f64;
    (rows, grand)
}

/// Squared sample distance correlation, from double-centred pairwise
/// distance matrices. Zero when either distance variance vanishes.
pub fn dcsis_stat(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, y)?;
    let n = x.len();
    if n < 4 {
        return Err(ScreenError::InsufficientData(format!(
            "distance correlation needs n >= 4, got {n}"
        )));
    }
    let (ax, gx) = distance_means(x);
    let (ay, gy) = distance_means(y);
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let a = (x[i] - x[j]).abs() - ax[i] - ax[j] + gx;
            let b = (y[i] - y[j]).abs() - ay[i] - ay[j] + gy;
            xy += a * b;
            xx += a * a;
            yy += b * b;
        }
    }
    if xx <= 0.0 || yy <= 0.0 {
        return Ok(0.0);
    }
    Ok((xy / (xx * yy).sqrt()).clamp(0.0, 1.0))
}

/// Empirical likelihood ratio of the zero-mean constraint on `x_i y_i`.
pub fn parametric_el_stat(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, y)?;
    let v: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    Ok(el_logratio(&v)?.logratio)
}

/// Per-feature statistic for a baseline method.
pub fn baseline_stat(method: Method, x: &[f64], y: &[f64]) -> Result<f64> {
    match method {
        Method::Sirs => sirs_stat(x, y),
        Method::Dcsis => dcsis_stat(x, y),
        Method::ParametricEl => parametric_el_stat(x, y),
        other => Err(ScreenError::Config(format!(
            "`{other}` is not a baseline method"
        ))),
    }
}

/// Screens every feature with a baseline statistic.
pub fn baseline_screen(
    d: &Dataset,
    method: Method,
    selection: Selection,
) -> Result<ScreeningReport> {
    selection.validate()?;
    baseline_stat(method, &[0.0; 4], &[0.0; 4])?;
    Ok(screen_columns(d, d.columns(), method, selection, |x| {
        Ok(FeatureStat {
            stat: baseline_stat(method, x, d.y())?,
            argmax_point: None,
            skipped: 0,
            bandwidth: None,
        })
    }))
}
