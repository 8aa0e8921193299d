//! Ranked screening results and their CSV form.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreenError};

/// Screening procedure that produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    El,
    VcEl,
    Sirs,
    Dcsis,
    ParametricEl,
    IterativeEl,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::El,
        Method::VcEl,
        Method::Sirs,
        Method::Dcsis,
        Method::ParametricEl,
        Method::IterativeEl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::El => "el",
            Method::VcEl => "vc_el",
            Method::Sirs => "sirs",
            Method::Dcsis => "dcsis",
            Method::ParametricEl => "parametric_el",
            Method::IterativeEl => "iterative_el",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ScreenError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ScreenError::Config(format!("unknown method `{s}`")))
    }
}

/// Rule turning ranked statistics into a selected set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Keep the `d` top-ranked features.
    TopD(usize),
    /// Keep every feature whose statistic is at least `gamma`.
    Threshold(f64),
}

impl Default for Selection {
    fn default() -> Self {
        Selection::TopD(20)
    }
}

impl Selection {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Selection::TopD(0) => Err(ScreenError::Config("top-d requires d >= 1".into())),
            Selection::Threshold(g) if !(g > 0.0) => Err(ScreenError::Config(format!(
                "threshold requires gamma > 0, got {g}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Per-feature screening outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningReport {
    pub method: Method,
    pub feature_names: Vec<String>,
    /// Screening statistic per feature; may be `+inf`.
    pub stats: Vec<f64>,
    /// Evaluation point attaining the statistic (an `x` value, or a `z`
    /// value for varying-coefficient screening).
    pub argmax_points: Vec<Option<f64>>,
    /// 1-based rank of each feature, 1 for the largest statistic.
    pub ranks: Vec<usize>,
    /// Selected feature indices, in rank order.
    pub selected: Vec<usize>,
    pub bandwidths: Vec<Option<f64>>,
    pub skipped_points: Vec<usize>,
    /// Features whose statistic could not be computed, with the reason.
    pub diagnostics: Vec<(usize, String)>,
}

/// Descending order with `+inf` first and ties broken by feature index.
pub fn rank_order(stats: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| match stats[b].partial_cmp(&stats[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });
    order
}

impl ScreeningReport {
    /// Ranks `stats` and applies `selection`.
    pub fn assemble(
        method: Method,
        feature_names: Vec<String>,
        stats: Vec<f64>,
        argmax_points: Vec<Option<f64>>,
        bandwidths: Vec<Option<f64>>,
        skipped_points: Vec<usize>,
        diagnostics: Vec<(usize, String)>,
        selection: Selection,
    ) -> Self {
        let order = rank_order(&stats);
        let mut ranks = vec![0; stats.len()];
        for (r, &j) in order.iter().enumerate() {
            ranks[j] = r + 1;
        }
        let selected = match selection {
            Selection::TopD(d) => order.iter().copied().take(d).collect(),
            Selection::Threshold(g) => order.iter().copied().filter(|&j| stats[j] >= g).collect(),
        };
        ScreeningReport {
            method,
            feature_names,
            stats,
            argmax_points,
            ranks,
            selected,
            bandwidths,
            skipped_points,
            diagnostics,
        }
    }

    pub fn p(&self) -> usize {
        self.stats.len()
    }

    /// Feature indices from highest to lowest rank.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.ranks.len()];
        for (j, &r) in self.ranks.iter().enumerate() {
            order[r - 1] = j;
        }
        order
    }

    pub fn is_selected(&self, j: usize) -> bool {
        self.selected.contains(&j)
    }

    /// Writes the report as CSV. Varying-coefficient reports carry an extra
    /// `argmax_z` column; baseline reports lead with a `method` column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let baseline = matches!(
            self.method,
            Method::Sirs | Method::Dcsis | Method::ParametricEl
        );
        let vc = self.method == Method::VcEl;
        let mut w = csv::Writer::from_writer(writer);
        let mut header = Vec::new();
        if baseline {
            header.push("method");
        }
        header.extend([
            "feature",
            "stat",
            "argmax_point",
            "rank",
            "selected",
            "bandwidth",
            "skipped_points",
        ]);
        if vc {
            header.push("argmax_z");
        }
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(fmt_stat).unwrap_or_default();
        for j in 0..self.p() {
            let mut row = Vec::with_capacity(header.len());
            if baseline {
                row.push(self.method.to_string());
            }
            row.push(self.feature_names[j].clone());
            row.push(fmt_stat(self.stats[j]));
            row.push(opt(self.argmax_points[j]));
            row.push(self.ranks[j].to_string());
            row.push(if self.is_selected(j) { "1" } else { "0" }.to_string());
            row.push(opt(self.bandwidths[j]));
            row.push(self.skipped_points[j].to_string());
            if vc {
                row.push(opt(self.argmax_points[j]));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| ScreenError::io("<report>", e))?;
        Ok(())
    }
}

/// Shortest round-trip formatting; infinity is written as `inf`.
pub fn fmt_stat(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        v.to_string()
    }
}
