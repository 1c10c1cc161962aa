//! Evaluation: ROC AUC, noise estimation and benchmark sweeps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distances::DistanceKind;
use crate::embedding::PreferenceMode;
use crate::forest::Method;
use crate::models::{Dataset, Label, StructureModel};
use crate::{Error, Result};

mod pipeline;
mod sweep;

pub use pipeline::{embed_for_run, score_once, ScoreRun, ScoreSetup};
pub use sweep::{
    families_of, load_sweep_config, read_scores_csv, run_sweep, run_sweep_with_progress, save_report,
    scores_file_name, write_scores_csv, CellScores, EvalReport, RunRecord, SweepConfig,
    SweepOutcome, SweepReport,
};

/// Detector variants by their short names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodId {
    /// RuzHash forest on continuous preferences.
    #[serde(rename = "rhf")]
    Rhf,
    /// RuzHash forest on binary preferences.
    #[serde(rename = "rhf-b")]
    RhfB,
    /// Voronoi forest with the Tanimoto distance.
    #[serde(rename = "pif")]
    Pif,
    /// Voronoi forest with the Jaccard distance on binary preferences.
    #[serde(rename = "pif-b")]
    PifB,
    /// Voronoi forest with the Ruzicka distance.
    #[serde(rename = "pif-r")]
    PifR,
}

impl MethodId {
    pub const ALL: [MethodId; 5] = [
        MethodId::Rhf,
        MethodId::RhfB,
        MethodId::Pif,
        MethodId::PifB,
        MethodId::PifR,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Rhf => "rhf",
            MethodId::RhfB => "rhf-b",
            MethodId::Pif => "pif",
            MethodId::PifB => "pif-b",
            MethodId::PifR => "pif-r",
        }
    }

    pub fn forest_method(self) -> Method {
        match self {
            MethodId::Rhf | MethodId::RhfB => Method::RuzHash,
            MethodId::Pif => Method::PiForest(DistanceKind::Tanimoto),
            MethodId::PifB => Method::PiForest(DistanceKind::Jaccard),
            MethodId::PifR => Method::PiForest(DistanceKind::Ruzicka),
        }
    }

    pub fn preference_mode(self) -> PreferenceMode {
        match self {
            MethodId::RhfB | MethodId::PifB => PreferenceMode::Binary,
            _ => PreferenceMode::Continuous,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown method `{s}` (expected one of rhf, rhf-b, pif, pif-b, pif-r)"
                ))
            })
    }
}

/// Area under the ROC curve with anomalies as the positive class and larger
/// scores meaning more anomalous. Computed from the Mann–Whitney rank sum;
/// tied scores share their average rank.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let positives = labels.iter().filter(|l| l.is_anomaly()).count();
    let negatives = labels.len() - positives;
    if positives == 0 {
        return Err(Error::SingleClass("no anomalies"));
    }
    if negatives == 0 {
        return Err(Error::SingleClass("no genuine points"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start..end (0-based) share the midrank.
        let midrank = (start + end + 1) as f64 / 2.0;
        let tied_positives = order[start..end].iter().filter(|&&i| labels[i].is_anomaly()).count();
        positive_rank_sum += midrank * tied_positives as f64;
        start = end;
    }
    let p = positives as f64;
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// Sample standard deviation of the signed residuals of genuine points to
/// their nearest structure. Anomalies are ignored.
pub fn estimate_sigma(data: &Dataset, structures: &[StructureModel]) -> Result<f64> {
    if structures.is_empty() {
        return Err(Error::config("noise estimation needs at least one structure"));
    }
    let residuals: Vec<f64> = data
        .points()
        .iter()
        .zip(data.labels())
        .filter(|(_, l)| !l.is_anomaly())
        .map(|(p, _)| {
            structures
                .iter()
                .map(|s| s.signed_residual(p))
                .min_by(|a, b| a.abs().total_cmp(&b.abs()))
                .expect("structures nonempty")
        })
        .collect();
    if residuals.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: residuals.len(),
        });
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let ss: f64 = residuals.iter().map(|r| (r - mean).powi(2)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}
