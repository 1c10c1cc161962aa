use std::time::Instant;

use crate::embedding::{embed_dataset, EmbeddingConfig, PreferenceMatrix, SparsePreference};
use crate::forest::{build_forest_sparse, score_sparse, Forest, ForestConfig, OpCounts};
use crate::models::{sample_pool, Dataset, ModelKind, ModelPool};
use crate::{derive_seed, seeded_rng, Error, Result};

use super::MethodId;

const POOL_STREAM: u64 = 0x706f_6f6c;
const FOREST_STREAM: u64 = 0x666f_7265;

/// Everything needed to score one dataset once.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSetup {
    pub method: MethodId,
    pub trees: usize,
    pub psi: usize,
    pub branching: usize,
    /// Pool size as a multiple of the number of points.
    pub pool_mult: usize,
    pub k: f64,
    pub sigma: f64,
    pub families: Vec<ModelKind>,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct ScoreRun {
    pub scores: Vec<f64>,
    pub forest: Forest,
    pub pool_size: usize,
    /// Seconds.
    pub train_time: f64,
    pub test_time: f64,
    pub train_ops: OpCounts,
    pub test_ops: OpCounts,
}

/// Pool of `pool_mult · n` models drawn with a stream derived from `seed`.
pub(crate) fn run_pool(
    data: &Dataset,
    families: &[ModelKind],
    pool_mult: usize,
    seed: u64,
) -> Result<ModelPool> {
    let m = pool_mult
        .checked_mul(data.len())
        .ok_or_else(|| Error::config("pool size overflows"))?;
    let mut rng = seeded_rng(derive_seed(seed, POOL_STREAM, 0));
    sample_pool(data, m, families, &mut rng)
}

/// Samples the pool for `seed` and embeds `data` against it.
pub fn embed_for_run(data: &Dataset, setup: &ScoreSetup) -> Result<PreferenceMatrix> {
    let pool = run_pool(data, &setup.families, setup.pool_mult, setup.seed)?;
    let cfg = EmbeddingConfig::new(setup.sigma, setup.k, setup.method.preference_mode())?;
    Ok(embed_dataset(data, &pool, &cfg))
}

pub(crate) fn forest_config(method: MethodId, trees: usize, psi: usize, branching: usize, seed: u64) -> ForestConfig {
    ForestConfig::new(
        method.forest_method(),
        trees,
        psi,
        branching,
        derive_seed(seed, FOREST_STREAM, 0),
    )
}

/// Trains on all rows and scores them again, timing both phases.
pub(crate) fn train_and_score(
    rows: &[SparsePreference],
    dim: usize,
    cfg: &ForestConfig,
) -> Result<(Vec<f64>, Forest, f64, f64, OpCounts)> {
    let start = Instant::now();
    let forest = build_forest_sparse(rows, dim, cfg)?;
    let train_time = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let (scores, test_ops) = score_sparse(rows, &forest);
    let test_time = start.elapsed().as_secs_f64();
    Ok((scores, forest, train_time, test_time, test_ops))
}

/// Pool, embedding, forest and scores for one configuration.
pub fn score_once(data: &Dataset, setup: &ScoreSetup) -> Result<ScoreRun> {
    let matrix = embed_for_run(data, setup)?;
    let rows = matrix.to_sparse();
    let cfg = forest_config(setup.method, setup.trees, setup.psi, setup.branching, setup.seed);
    let (scores, forest, train_time, test_time, test_ops) = train_and_score(&rows, matrix.dim(), &cfg)?;
    Ok(ScoreRun {
        scores,
        pool_size: matrix.dim(),
        train_ops: forest.train_ops(),
        forest,
        train_time,
        test_time,
        test_ops,
    })
}
