//! Screening for varying-coefficient models.
//!
//! The response is residualised on the index variable `z` with a
//! Nadaraya–Watson fit, and the local statistic is formed from
//! `v_i = K_h(z_i - z0) x_ij (y_i - E^(y | z_i))`, localised in `z`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, ScreenError};
use crate::kernel::{self, Bandwidth, KernelConfig};
use crate::report::{Method, ScreeningReport, Selection};
use crate::screening::{max_local_el, screen_columns, validate_local, EvalPolicy, FeatureStat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcConfig {
    /// Kernel localising the statistic in `z`. A cross-validated policy
    /// smooths each feature's product `x_j * residual` on `z`.
    pub kernel_z: KernelConfig,
    /// Kernel for the nuisance regression of `y` on `z`.
    pub kernel_nuisance: KernelConfig,
    pub eval_policy: EvalPolicy,
    pub min_support: usize,
    pub selection: Selection,
}

impl Default for VcConfig {
    fn default() -> Self {
        VcConfig {
            kernel_z: KernelConfig::default().with_bandwidth(Bandwidth::ReferenceRule),
            kernel_nuisance: KernelConfig::default(),
            eval_policy: EvalPolicy::ObservedPoints,
            min_support: 5,
            selection: Selection::TopD(20),
        }
    }
}

impl VcConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel_z.validate()?;
        self.kernel_nuisance.validate()?;
        self.selection.validate()?;
        validate_local(self.min_support, self.eval_policy)
    }
}

/// Fitted `E^(y | z = z_i)` at every observation. Points where a compact
/// kernel leaves no weight fall back to the mean of `y`.
pub fn estimate_nuisance(z: &[f64], y: &[f64], cfg: &VcConfig) -> Result<Vec<f64>> {
    if z.len() != y.len() {
        return Err(ScreenError::LengthMismatch {
            expected: z.len(),
            got: y.len(),
        });
    }
    if kernel::is_constant(z) {
        return Err(ScreenError::DegenerateColumn("index-variable smoothing"));
    }
    let h = kernel::resolve_bandwidth(z, y, &cfg.kernel_nuisance)?;
    nuisance_at_bandwidth(z, y, h, cfg)
}

fn nuisance_at_bandwidth(z: &[f64], y: &[f64], h: f64, cfg: &VcConfig) -> Result<Vec<f64>> {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    z.iter()
        .map(|&z0| {
            Ok(kernel::nw_estimate(z, y, h, z0, cfg.kernel_nuisance.family)?.unwrap_or(mean))
        })
        .collect()
}

/// Bandwidth for the localisation in `z` given the product process.
fn z_bandwidth(z: &[f64], product: &[f64], cfg: &VcConfig) -> Result<f64> {
    kernel::resolve_bandwidth(z, product, &cfg.kernel_z)
}

/// Statistic for one feature given the residualised response.
pub fn vc_feature_stat_residualized(
    x: &[f64],
    residual: &[f64],
    z: &[f64],
    cfg: &VcConfig,
) -> Result<FeatureStat> {
    if x.len() != z.len() || residual.len() != z.len() {
        return Err(ScreenError::LengthMismatch {
            expected: z.len(),
            got: x.len().min(residual.len()),
        });
    }
    if kernel::is_constant(z) {
        return Err(ScreenError::DegenerateColumn("index-variable smoothing"));
    }
    let product: Vec<f64> = x.iter().zip(residual).map(|(a, b)| a * b).collect();
    let h = z_bandwidth(z, &product, cfg)?;
    max_local_el(
        z,
        &product,
        h,
        cfg.kernel_z.family,
        cfg.eval_policy,
        cfg.min_support,
        None,
    )
}

/// Statistic for one feature, fitting the nuisance regression first.
pub fn vc_feature_stat(x: &[f64], y: &[f64], z: &[f64], cfg: &VcConfig) -> Result<FeatureStat> {
    let fit = estimate_nuisance(z, y, cfg)?;
    let residual: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    vc_feature_stat_residualized(x, &residual, z, cfg)
}

/// Screens with a supplied nuisance fit, e.g. the true `E(y | z)`.
pub fn vc_screen_with_nuisance(
    d: &Dataset,
    nuisance: &[f64],
    cfg: &VcConfig,
) -> Result<ScreeningReport> {
    cfg.validate()?;
    let z = d
        .z()
        .ok_or_else(|| ScreenError::Config("varying-coefficient screening needs an index variable".into()))?;
    if nuisance.len() != d.n() {
        return Err(ScreenError::LengthMismatch {
            expected: d.n(),
            got: nuisance.len(),
        });
    }
    if kernel::is_constant(z) {
        return Err(ScreenError::DegenerateColumn("index-variable smoothing"));
    }
    let residual: Vec<f64> = d.y().iter().zip(nuisance).map(|(a, b)| a - b).collect();
    Ok(screen_columns(d, d.columns(), Method::VcEl, cfg.selection, |x| {
        vc_feature_stat_residualized(x, &residual, z, cfg)
    }))
}

/// Fits the nuisance once, then screens every feature.
pub fn vc_screen(d: &Dataset, cfg: &VcConfig) -> Result<ScreeningReport> {
    cfg.validate()?;
    let z = d
        .z()
        .ok_or_else(|| ScreenError::Config("varying-coefficient screening needs an index variable".into()))?;
    let fit = estimate_nuisance(z, d.y(), cfg)?;
    vc_screen_with_nuisance(d, &fit, cfg)
}
