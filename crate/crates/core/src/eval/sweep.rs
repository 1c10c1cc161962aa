use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{format_f64, generate, load_csv, load_structures, structures_path, SyntheticSpec, SCHEMA_VERSION};
use crate::embedding::{embed_dataset, EmbeddingConfig, PreferenceMode, SparsePreference};
use crate::forest::OpCounts;
use crate::models::{Dataset, Label, ModelKind, StructureModel};
use crate::{derive_seed, Error, Result};

use super::pipeline::{forest_config, run_pool, train_and_score};
use super::{estimate_sigma, roc_auc, MethodId};

const RUN_STREAM: u64 = 0x7275_6e73;

fn default_b_values() -> Vec<usize> {
    (1..=8).map(|e| 1 << e).collect()
}

/// A benchmark sweep over methods × branching factors × runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Synthetic scene, used unless `dataset_path` is set.
    pub dataset: SyntheticSpec,
    /// CSV dataset; a relative path is resolved against the config file.
    /// Its structures sidecar, if present, provides `σ` and model families.
    pub dataset_path: Option<PathBuf>,
    pub methods: Vec<MethodId>,
    pub b_values: Vec<usize>,
    #[serde(alias = "t")]
    pub trees: usize,
    pub psi: usize,
    pub k: f64,
    pub pool_mult: usize,
    pub runs: usize,
    pub seed: u64,
    /// Noise level; estimated from the ground-truth structures when absent.
    pub sigma: Option<f64>,
    /// Model families for the pool; defaults to those of the structures.
    pub families: Option<Vec<ModelKind>>,
    /// Evaluate (method, b) cells concurrently. Timings become less reliable.
    pub parallel: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dataset: SyntheticSpec::default(),
            dataset_path: None,
            methods: MethodId::ALL.to_vec(),
            b_values: default_b_values(),
            trees: 100,
            psi: 256,
            k: 3.0,
            pool_mult: 10,
            runs: 5,
            seed: 0,
            sigma: None,
            families: None,
            parallel: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::config("method list is empty"));
        }
        if self.b_values.is_empty() {
            return Err(Error::config("b value list is empty"));
        }
        if self.psi < 2 {
            return Err(Error::config(format!("psi must be at least 2, got {}", self.psi)));
        }
        if let Some(&b) = self.b_values.iter().find(|&&b| b < 2 || b > self.psi) {
            return Err(Error::config(format!("b = {b} outside [2, psi = {}]", self.psi)));
        }
        if self.trees == 0 || self.runs == 0 || self.pool_mult == 0 {
            return Err(Error::config("trees, runs and pool_mult must be positive"));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::config(format!("k must be positive, got {}", self.k)));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::config(format!("sigma must be positive, got {s}")));
            }
        }
        if self.families.as_ref().is_some_and(Vec::is_empty) {
            return Err(Error::config("family list is empty"));
        }
        if self.dataset_path.is_none() {
            self.dataset.validate()?;
        }
        Ok(())
    }
}

/// Reads a JSON sweep config, resolving `dataset_path` against its directory.
pub fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: SweepConfig = serde_json::from_str(&body).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    if let Some(p) = cfg.dataset_path.as_mut() {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    Ok(cfg)
}

/// Outcome of one (method, b, run) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: MethodId,
    pub b: usize,
    pub run: usize,
    pub seed: u64,
    pub auc: f64,
    /// Seconds.
    pub train_time: f64,
    pub test_time: f64,
    pub train_ops: OpCounts,
    pub test_ops: OpCounts,
    /// Deepest tree in the forest.
    pub max_depth: usize,
}

/// A (method, b) cell averaged over its runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: MethodId,
    pub b: usize,
    pub auc: f64,
    pub auc_runs: Vec<f64>,
    pub train_time: f64,
    pub test_time: f64,
    pub run_count: usize,
    /// Per-run mean of the test-time counters.
    pub test_rule_evaluations: f64,
    pub test_distance_evaluations: f64,
}

impl EvalReport {
    fn from_runs(runs: &[RunRecord]) -> Self {
        let n = runs.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(f).sum::<f64>() / n;
        let auc_runs: Vec<f64> = runs.iter().map(|r| r.auc).collect();
        Self {
            method: runs[0].method,
            b: runs[0].b,
            auc: auc_runs.iter().sum::<f64>() / n,
            auc_runs,
            train_time: mean(&|r| r.train_time),
            test_time: mean(&|r| r.test_time),
            run_count: runs.len(),
            test_rule_evaluations: mean(&|r| r.test_ops.rule_evaluations as f64),
            test_distance_evaluations: mean(&|r| r.test_ops.distance_evaluations as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: u32,
    pub config: SweepConfig,
    pub points: usize,
    pub anomalies: usize,
    pub sigma: f64,
    pub pool_size: usize,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<EvalReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellScores {
    pub method: MethodId,
    pub b: usize,
    pub run: usize,
    pub scores: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub report: SweepReport,
    pub labels: Vec<Label>,
    pub scores: Vec<CellScores>,
}

fn load_input(cfg: &SweepConfig) -> Result<(Dataset, Option<Vec<StructureModel>>)> {
    match &cfg.dataset_path {
        Some(path) => {
            let data = load_csv(path)?;
            let side = structures_path(path);
            let structures = if side.exists() { Some(load_structures(&side)?) } else { None };
            Ok((data, structures))
        }
        None => {
            let scene = generate(&cfg.dataset)?;
            Ok((scene.data, Some(scene.structures)))
        }
    }
}

/// Distinct families of `structures` in first-seen order.
pub fn families_of(structures: &[StructureModel]) -> Vec<ModelKind> {
    let mut out = Vec::new();
    for s in structures {
        if !out.contains(&s.kind()) {
            out.push(s.kind());
        }
    }
    out
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    run_sweep_with_progress(cfg, &|_| {})
}

/// Runs the sweep, calling `progress` once per finished (method, b) cell.
///
/// Every run draws a fresh pool from a seed derived from `(cfg.seed, run)`;
/// within a run all cells share that pool and the forest seed, so methods
/// are compared on identical embeddings.
pub fn run_sweep_with_progress(
    cfg: &SweepConfig,
    progress: &(dyn Fn(&EvalReport) + Sync),
) -> Result<SweepOutcome> {
    cfg.validate()?;
    let (data, structures) = load_input(cfg)?;
    let sigma = match (cfg.sigma, &structures) {
        (Some(s), _) => s,
        (None, Some(st)) => estimate_sigma(&data, st)?,
        (None, None) => {
            return Err(Error::config(
                "sigma is not set and the dataset has no structures sidecar to estimate it from",
            ))
        }
    };
    if !(sigma > 0.0) {
        return Err(Error::config(format!("noise level must be positive, got {sigma}")));
    }
    let families = match (&cfg.families, &structures) {
        (Some(f), _) => f.clone(),
        (None, Some(st)) => families_of(st),
        (None, None) => vec![ModelKind::Line],
    };

    let modes: BTreeSet<usize> = cfg.methods.iter().map(|m| mode_slot(m.preference_mode())).collect();
    let run_seeds: Vec<u64> = (0..cfg.runs).map(|r| derive_seed(cfg.seed, RUN_STREAM, r as u64)).collect();
    let mut embedded: Vec<[Option<Vec<SparsePreference>>; 2]> = Vec::with_capacity(cfg.runs);
    let mut pool_size = 0;
    for &seed in &run_seeds {
        let pool = run_pool(&data, &families, cfg.pool_mult, seed)?;
        pool_size = pool.len();
        let mut slots = [None, None];
        for &slot in &modes {
            let ecfg = EmbeddingConfig::new(sigma, cfg.k, slot_mode(slot))?;
            slots[slot] = Some(embed_dataset(&data, &pool, &ecfg).to_sparse());
        }
        embedded.push(slots);
    }

    let cells: Vec<(MethodId, usize)> = cfg
        .methods
        .iter()
        .flat_map(|&m| cfg.b_values.iter().map(move |&b| (m, b)))
        .collect();
    let eval_cell = |&(method, b): &(MethodId, usize)| -> Result<(Vec<RunRecord>, Vec<CellScores>)> {
        let mut records = Vec::with_capacity(cfg.runs);
        let mut scores = Vec::with_capacity(cfg.runs);
        for (run, &seed) in run_seeds.iter().enumerate() {
            let rows = embedded[run][mode_slot(method.preference_mode())]
                .as_ref()
                .expect("embedding prepared for every requested mode");
            let fcfg = forest_config(method, cfg.trees, cfg.psi, b, seed);
            let (s, forest, train_time, test_time, test_ops) = train_and_score(rows, pool_size, &fcfg)?;
            records.push(RunRecord {
                method,
                b,
                run,
                seed,
                auc: roc_auc(&s, data.labels())?,
                train_time,
                test_time,
                train_ops: forest.train_ops(),
                test_ops,
                max_depth: forest.trees().iter().map(|t| t.depth()).max().unwrap_or(0),
            });
            scores.push(CellScores { method, b, run, scores: s });
        }
        progress(&EvalReport::from_runs(&records));
        Ok((records, scores))
    };
    let results: Vec<(Vec<RunRecord>, Vec<CellScores>)> = if cfg.parallel {
        cells.par_iter().map(eval_cell).collect::<Result<_>>()?
    } else {
        cells.iter().map(eval_cell).collect::<Result<_>>()?
    };

    let aggregates = results.iter().map(|(r, _)| EvalReport::from_runs(r)).collect();
    let (runs, scores): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(SweepOutcome {
        report: SweepReport {
            schema: SCHEMA_VERSION,
            config: cfg.clone(),
            points: data.len(),
            anomalies: data.anomaly_count(),
            sigma,
            pool_size,
            runs: runs.into_iter().flatten().collect(),
            aggregates,
        },
        labels: data.labels().to_vec(),
        scores: scores.into_iter().flatten().collect(),
    })
}

fn mode_slot(mode: PreferenceMode) -> usize {
    match mode {
        PreferenceMode::Continuous => 0,
        PreferenceMode::Binary => 1,
    }
}

fn slot_mode(slot: usize) -> PreferenceMode {
    if slot == 0 {
        PreferenceMode::Continuous
    } else {
        PreferenceMode::Binary
    }
}

pub fn save_report(report: &SweepReport, path: &Path) -> Result<()> {
    let body = serde_json::to_string_pretty(report)?;
    std::fs::write(path, body + "\n").map_err(|e| Error::io(path, e))
}

/// `rhf_b4_run0.csv` and so on.
pub fn scores_file_name(method: MethodId, b: usize, run: usize) -> String {
    format!("{method}_b{b}_run{run}.csv")
}

/// Writes `index,score,label` rows.
pub fn write_scores_csv(path: &Path, scores: &[f64], labels: &[Label]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "index,score,label").map_err(io)?;
    for (i, (s, l)) in scores.iter().zip(labels).enumerate() {
        writeln!(out, "{i},{},{}", format_f64(*s), l.as_flag()).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads back the scores column of a file written by [`write_scores_csv`].
pub fn read_scores_csv(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut scores = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let score = record
            .get(1)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                line,
                message: "missing or invalid score".into(),
            })?;
        scores.push(score);
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            dataset: SyntheticSpec {
                points_per_structure: 60,
                ..Default::default()
            },
            methods: vec![MethodId::Rhf, MethodId::PifR, MethodId::PifB],
            b_values: vec![2, 8],
            trees: 10,
            psi: 64,
            pool_mult: 2,
            runs: 3,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn defaults() {
        let cfg: SweepConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.b_values, vec![2, 4, 8, 16, 32, 64, 128, 256]);
        assert_eq!((cfg.trees, cfg.psi, cfg.runs, cfg.pool_mult), (100, 256, 5, 10));
        assert_eq!(cfg.k, 3.0);
        let t: SweepConfig = serde_json::from_str(r#"{"t": 7}"#).unwrap();
        assert_eq!(t.trees, 7);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"tress": 7}"#).is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            SweepConfig { methods: vec![], ..small() },
            SweepConfig { b_values: vec![1], ..small() },
            SweepConfig { b_values: vec![128], ..small() },
            SweepConfig { runs: 0, ..small() },
            SweepConfig { sigma: Some(0.0), ..small() },
        ];
        for cfg in bad {
            assert!(matches!(run_sweep(&cfg), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn one_record_per_cell_and_run() {
        let out = run_sweep(&small()).unwrap();
        let r = &out.report;
        assert_eq!(r.schema, 1);
        assert_eq!(r.runs.len(), 3 * 2 * 3);
        assert_eq!(r.aggregates.len(), 3 * 2);
        assert_eq!(out.scores.len(), 18);
        assert_eq!(r.pool_size, 2 * 240);
        for agg in &r.aggregates {
            assert_eq!(agg.auc_runs.len(), 3);
            assert_eq!(agg.run_count, 3);
            let mean = agg.auc_runs.iter().sum::<f64>() / 3.0;
            assert!((agg.auc - mean).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&agg.auc));
        }
    }

    #[test]
    fn sweep_is_deterministic_apart_from_timings() {
        let strip = |o: SweepOutcome| {
            o.report
                .runs
                .into_iter()
                .map(|r| (r.method, r.b, r.run, r.seed, r.auc.to_bits(), r.train_ops, r.test_ops, r.max_depth))
                .collect::<Vec<_>>()
        };
        let a = run_sweep(&small()).unwrap();
        let b = run_sweep(&SweepConfig { parallel: true, ..small() }).unwrap();
        assert_eq!(a.scores, b.scores);
        assert_eq!(strip(a), strip(b));
    }

    #[test]
    fn b_equal_to_psi_still_reports() {
        let cfg = SweepConfig {
            methods: vec![MethodId::Rhf, MethodId::Pif],
            b_values: vec![64],
            runs: 1,
            ..small()
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.report.aggregates.len(), 2);
        assert!(out.report.runs.iter().all(|r| r.max_depth == 1));
    }

    #[test]
    fn sigma_comes_from_structures() {
        let out = run_sweep(&SweepConfig { runs: 1, b_values: vec![4], ..small() }).unwrap();
        assert!((out.report.sigma - 0.05).abs() < 0.01);
        let fixed = run_sweep(&SweepConfig { runs: 1, b_values: vec![4], sigma: Some(0.07), ..small() }).unwrap();
        assert_eq!(fixed.report.sigma, 0.07);
    }

    #[test]
    fn csv_dataset_without_sidecar_needs_sigma() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let scene = generate(&small().dataset).unwrap();
        crate::datagen::save_csv(&scene.data, &path).unwrap();
        let cfg = SweepConfig { dataset_path: Some(path.clone()), runs: 1, b_values: vec![4], ..small() };
        assert!(matches!(run_sweep(&cfg), Err(Error::InvalidConfig(_))));
        assert!(run_sweep(&SweepConfig { sigma: Some(0.05), ..cfg.clone() }).is_ok());
        crate::datagen::save_structures(&scene.structures, &structures_path(&path)).unwrap();
        assert!(run_sweep(&cfg).is_ok());
    }

    #[test]
    fn relative_dataset_path_resolves_against_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("sweep.json");
        std::fs::write(&cfg_path, r#"{"dataset_path": "data/d.csv"}"#).unwrap();
        let cfg = load_sweep_config(&cfg_path).unwrap();
        assert_eq!(cfg.dataset_path.unwrap(), dir.path().join("data/d.csv"));
    }

    #[test]
    fn scores_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(scores_file_name(MethodId::RhfB, 4, 2));
        assert!(path.ends_with("rhf-b_b4_run2.csv"));
        let scores = vec![0.25, 0.5, 1.0 / 3.0];
        let labels = vec![Label::Genuine, Label::Anomaly, Label::Genuine];
        write_scores_csv(&path, &scores, &labels).unwrap();
        assert_eq!(read_scores_csv(&path).unwrap(), scores);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("index,score,label\n0,2.5000000000000000e-1,0\n"));
    }
}
