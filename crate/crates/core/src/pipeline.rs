//! The full embedding pipeline, from raw vectors to trained coordinates.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::{build_graph, EdgeSampler};
use crate::init::{power_iteration_init, random_init, DEFAULT_POWER_ITERS};
use crate::knn::{build_hnsw, query_knn, HnswParams};
use crate::model::{DataMatrix, EmbeddingState, Hyperparams};
use crate::optimizer::{train_with_progress, EpochProgress, TrainReport};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitMethod {
    #[default]
    Spectral,
    Random,
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMethod::Spectral => "spectral",
            InitMethod::Random => "random",
        })
    }
}

impl FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(InitMethod::Spectral),
            "random" => Ok(InitMethod::Random),
            other => Err(Error::InvalidHyperparam {
                field: "init",
                reason: format!("must be spectral or random, got {other:?}"),
            }),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineConfig {
    pub hyper: Hyperparams,
    pub hnsw: HnswParams,
    pub init: InitMethod,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub knn: Duration,
    pub graph: Duration,
    pub init: Duration,
    pub train: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.knn + self.graph + self.init + self.train
    }
}

#[derive(Clone, Debug)]
pub struct EmbedOutput {
    pub embedding: EmbeddingState,
    pub report: TrainReport,
    pub timings: StageTimings,
}

pub fn embed(data: &DataMatrix, config: &PipelineConfig) -> Result<EmbedOutput> {
    embed_with_progress(data, config, |_| {})
}

pub fn embed_with_progress(
    data: &DataMatrix,
    config: &PipelineConfig,
    progress: impl FnMut(EpochProgress),
) -> Result<EmbedOutput> {
    let h = &config.hyper;
    h.validate(data.rows())?;
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(h.n_threads)
        .build()
        .map_err(|e| Error::InvalidData(format!("cannot start thread pool: {e}")))?;
    let knn = pool.install(|| {
        let index = build_hnsw(data, h.metric, config.hnsw, h.seed);
        query_knn(&index, data, h.k)
    })?;
    timings.knn = t.elapsed();

    let t = Instant::now();
    let graph = build_graph(&knn)?;
    let sampler = EdgeSampler::new(&graph)?;
    timings.graph = t.elapsed();

    let t = Instant::now();
    let mut embedding = match config.init {
        InitMethod::Spectral => {
            pool.install(|| power_iteration_init(&graph, h.dim, DEFAULT_POWER_ITERS, h.seed))
        }
        InitMethod::Random => random_init(data.rows(), h.dim, h.seed),
    };
    timings.init = t.elapsed();

    let t = Instant::now();
    let report = train_with_progress(&mut embedding, &sampler, h, progress)?;
    timings.train = t.elapsed();

    Ok(EmbedOutput {
        embedding,
        report,
        timings,
    })
}
