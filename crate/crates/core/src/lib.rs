//! Noise contrastive visualization of high-dimensional vectors.
//!
//! The pipeline builds a symmetric k-nearest-neighbor graph with an HNSW
//! index and treats its edges as samples of a data distribution. A
//! low-dimensional embedding is then fitted by noise-contrastive estimation.
//! The model `exp(-Q) / (1 + a |z_i - z_j|^(2b))` learns to tell graph edges
//! apart from noise edges, with the normalizer `Q` learned alongside the
//! coordinates so no partition function is ever computed. Training is plain per-sample
//! gradient ascent, run by several workers on shared parameters without
//! locks.
//!
//! ```no_run
//! use ncvis::{embed, read_csv, PipelineConfig};
//!
//! let data = read_csv("vectors.csv")?;
//! let out = embed(&data, &PipelineConfig::default())?;
//! println!("Q = {}", out.embedding.q);
//! # Ok::<(), ncvis::Error>(())
//! ```

pub mod alias;
pub mod cli;
pub mod distance;
pub mod error;
pub mod graph;
pub mod init;
pub mod io;
pub mod knn;
pub mod mle;
pub mod model;
pub mod nce;
pub mod optimizer;
pub mod pipeline;

pub use alias::{build_alias, AliasTable};
pub use error::{Error, Result};
pub use graph::{build_graph, noise_prob, EdgeSampler, NeighborGraph};
pub use init::{power_iteration_init, random_init};
pub use io::{read_bin, read_csv, write_embedding, write_svg_scatter, LabelFile};
pub use knn::{build_hnsw, exact_knn, query_knn, HnswIndex, HnswParams, KnnResult};
pub use model::{validate_hyperparams, DataMatrix, EmbeddingState, Hyperparams, Metric};
pub use optimizer::{train, TrainReport};
pub use pipeline::{embed, EmbedOutput, InitMethod, PipelineConfig, StageTimings};
