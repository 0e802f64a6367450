mod common;

use common::{blobs, gaussian, intra_inter, knn_label_agreement, two_blobs};
use ncvis::init::DEFAULT_POWER_ITERS;
use ncvis::nce::full_objective;
use ncvis::optimizer::train_with_progress;
use ncvis::{
    build_graph, embed, exact_knn, power_iteration_init, random_init, train, EdgeSampler,
    EmbeddingState, Error, Hyperparams, InitMethod, Metric, NeighborGraph, PipelineConfig,
};

fn graph_of(data: &ncvis::DataMatrix, k: usize) -> NeighborGraph {
    build_graph(&exact_knn(data, k, Metric::Euclidean).unwrap()).unwrap()
}

fn trained(graph: &NeighborGraph, h: &Hyperparams) -> EmbeddingState {
    let sampler = EdgeSampler::new(graph).unwrap();
    let mut state = power_iteration_init(graph, h.dim, DEFAULT_POWER_ITERS, h.seed);
    train(&mut state, &sampler, h).unwrap();
    state
}

fn blob_hyper(threads: usize, seed: u64) -> Hyperparams {
    Hyperparams {
        k: 5,
        n_epochs: 200,
        n_threads: threads,
        seed,
        ..Hyperparams::default()
    }
}

#[test]
fn two_blobs_separate() {
    let (data, labels) = two_blobs();
    let graph = graph_of(&data, 5);
    let state = trained(&graph, &blob_hyper(1, 3));
    assert!(state.is_finite());
    assert_separated(&state, &labels, "1 thread");
}

/// Nearly every point's five nearest embedding neighbors come from its own
/// blob, and blobs are farther apart than their members on average.
fn assert_separated(state: &EmbeddingState, labels: &[usize], what: &str) {
    let agree = knn_label_agreement(state, labels, 5);
    let (intra, inter) = intra_inter(state, labels);
    assert!(agree >= 0.95, "{what}: agreement {agree}");
    assert!(inter > intra, "{what}: intra {intra}, inter {inter}");
}

#[test]
fn single_thread_training_is_reproducible() {
    let (data, _) = two_blobs();
    let graph = graph_of(&data, 5);
    let h = blob_hyper(1, 9);
    let a = trained(&graph, &h);
    let b = trained(&graph, &h);
    assert_eq!(a.coords(), b.coords());
    assert_eq!(a.q.to_bits(), b.q.to_bits());
    let c = trained(&graph, &Hyperparams { seed: 10, ..h });
    assert_ne!(a.coords(), c.coords());
}

#[test]
fn every_thread_count_separates_blobs() {
    let (data, labels) = two_blobs();
    let graph = graph_of(&data, 5);
    for threads in [1, 2, 4, 8] {
        let state = trained(&graph, &blob_hyper(threads, 4));
        assert!(state.is_finite(), "{threads} threads");
        assert_separated(&state, &labels, &format!("{threads} threads"));
    }
}

#[test]
fn training_usually_improves_the_objective() {
    let trials = 40;
    let mut improved = 0;
    for seed in 0..trials {
        let data = gaussian(20, 3, 1000 + seed);
        let graph = graph_of(&data, 4);
        let h = Hyperparams {
            k: 4,
            seed,
            n_threads: 1,
            ..Hyperparams::default()
        };
        let sampler = EdgeSampler::new(&graph).unwrap();
        let mut state = power_iteration_init(&graph, 2, DEFAULT_POWER_ITERS, seed);
        let before = full_objective(&state, &graph, &h);
        train(&mut state, &sampler, &h).unwrap();
        if full_objective(&state, &graph, &h) > before {
            improved += 1;
        }
    }
    assert!(
        improved as f64 >= 0.95 * trials as f64,
        "{improved} of {trials} runs improved"
    );
}

#[test]
fn progress_reports_every_epoch() {
    let (data, _) = two_blobs();
    let graph = graph_of(&data, 5);
    let sampler = EdgeSampler::new(&graph).unwrap();
    let h = Hyperparams {
        k: 5,
        n_epochs: 30,
        n_samples_per_epoch: Some(200),
        n_threads: 1,
        ..Hyperparams::default()
    };
    let mut state = random_init(64, 2, 1);
    let mut seen = Vec::new();
    let report = train_with_progress(&mut state, &sampler, &h, |p| seen.push(p)).unwrap();
    assert_eq!(seen.len(), 30);
    assert_eq!(report.epochs_run, 30);
    assert_eq!(report.samples_processed, 30 * 200);
    assert_eq!(report.objective_trace.len(), 30);
    assert_eq!(report.final_q, state.q);
    assert!(seen.iter().enumerate().all(|(e, p)| p.epoch == e));
    assert!(seen
        .windows(2)
        .all(|w| w[1].learning_rate < w[0].learning_rate));
    // The sampled objective ends higher than it starts.
    let first: f64 = report.objective_trace[..5].iter().sum();
    let last: f64 = report.objective_trace[25..].iter().sum();
    assert!(last > first, "{first} -> {last}");
}

#[test]
fn huge_learning_rate_is_clipped_not_divergent() {
    let (data, _) = two_blobs();
    let graph = graph_of(&data, 5);
    let h = Hyperparams {
        k: 5,
        lr0: 1e3,
        n_epochs: 20,
        n_threads: 1,
        ..Hyperparams::default()
    };
    let state = trained(&graph, &h);
    assert!(state.is_finite());
}

#[test]
fn mismatched_sampler_is_rejected() {
    let (data, _) = two_blobs();
    let graph = graph_of(&data, 5);
    let sampler = EdgeSampler::new(&graph).unwrap();
    let mut state = random_init(10, 2, 0);
    let h = Hyperparams {
        k: 5,
        ..Hyperparams::default()
    };
    assert!(matches!(
        train(&mut state, &sampler, &h),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn pipeline_embeds_clusters_apart() {
    let (data, labels) = blobs(60, 3, 8, 12.0, 21);
    for init in [InitMethod::Spectral, InitMethod::Random] {
        let config = PipelineConfig {
            hyper: Hyperparams {
                n_epochs: 100,
                n_threads: 2,
                ..Hyperparams::default()
            },
            init,
            ..PipelineConfig::default()
        };
        let out = embed(&data, &config).unwrap();
        assert_eq!(out.embedding.n_points(), 180);
        assert_eq!(out.embedding.dim(), 2);
        let agree = knn_label_agreement(&out.embedding, &labels, 10);
        assert!(agree > 0.95, "{init}: agreement {agree}");
        assert!(out.timings.total() >= out.timings.train);
    }
}

#[test]
fn three_dimensional_output() {
    let (data, _) = two_blobs();
    let config = PipelineConfig {
        hyper: Hyperparams {
            k: 5,
            dim: 3,
            n_threads: 1,
            ..Hyperparams::default()
        },
        ..PipelineConfig::default()
    };
    let out = embed(&data, &config).unwrap();
    assert_eq!(out.embedding.dim(), 3);
    assert!(out.embedding.is_finite());
}

#[test]
fn invalid_settings_fail_before_work() {
    let (data, _) = two_blobs();
    for hyper in [
        Hyperparams {
            k: 64,
            ..Hyperparams::default()
        },
        Hyperparams {
            nu: 0,
            ..Hyperparams::default()
        },
        Hyperparams {
            lr0: f64::NAN,
            ..Hyperparams::default()
        },
    ] {
        let config = PipelineConfig {
            hyper,
            ..PipelineConfig::default()
        };
        assert!(embed(&data, &config).is_err());
    }
}
