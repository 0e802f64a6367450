//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::graph::build_graph;
use crate::io::{read_bin, read_csv, read_labels, write_embedding, write_svg_scatter};
use crate::knn::exact_knn;
use crate::mle::{mle_gradient_ascent, normalized_likelihood};
use crate::model::{default_threads, DataMatrix, Hyperparams, Metric};
use crate::pipeline::{embed, InitMethod, PipelineConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ncvis",
    version,
    about = "Noise contrastive visualization of vector datasets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a dataset into a low-dimensional space.
    Embed(EmbedArgs),
    /// Fit the normalized-likelihood reference on a small dataset.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Csv,
    Bin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Cosine,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Cosine => Metric::Cosine,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Spectral,
    Random,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input matrix, one row per point.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Csv)]
    pub format: InputFormat,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Tab-separated embedding, one line per point.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
    /// Optional SVG scatter plot (2-D output only).
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
    /// Optional per-row labels used to color the plot.
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 15)]
    pub k: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    /// Samples per epoch [default: number of points]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Noise samples per data sample.
    #[arg(long, default_value_t = 5)]
    pub nu: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Initial learning rate.
    #[arg(long, default_value_t = 1.0)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Spectral)]
    pub init: InitArg,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 15)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    /// Full-batch ascent steps.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Ascent step size.
    #[arg(long, default_value_t = 10.0)]
    pub step: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl EmbedArgs {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            hyper: Hyperparams {
                k: self.k,
                dim: self.dim,
                nu: self.nu,
                a: self.a,
                b: self.b,
                n_epochs: self.epochs,
                n_samples_per_epoch: self.samples,
                lr0: self.lr,
                seed: self.seed,
                n_threads: self.threads.unwrap_or_else(default_threads),
                metric: self.metric.into(),
                ..Hyperparams::default()
            },
            init: match self.init {
                InitArg::Spectral => InitMethod::Spectral,
                InitArg::Random => InitMethod::Random,
            },
            ..PipelineConfig::default()
        }
    }
}

fn load(input: &InputArgs) -> Result<DataMatrix> {
    match input.format {
        InputFormat::Csv => read_csv(&input.input),
        InputFormat::Bin => read_bin(&input.input),
    }
}

fn secs(d: std::time::Duration) -> f64 {
    d.as_secs_f64()
}

fn run_embed(args: &EmbedArgs, out: &mut impl Write) -> Result<()> {
    let data = load(&args.input)?;
    let labels = args.labels.as_deref().map(read_labels).transpose()?;
    if let Some(l) = &labels {
        if l.len() != data.rows() {
            return Err(Error::InvalidData(format!(
                "{} labels for {} rows",
                l.len(),
                data.rows()
            )));
        }
    }
    let config = args.config();
    let result = embed(&data, &config)?;
    write_embedding(&result.embedding, &args.output)?;
    if let Some(plot) = &args.plot {
        write_svg_scatter(&result.embedding, labels.as_ref(), plot)?;
    }

    let t = &result.timings;
    let r = &result.report;
    let _ = writeln!(
        out,
        "points {}  input dim {}  output dim {}  threads {}",
        data.rows(),
        data.cols(),
        config.hyper.dim,
        config.hyper.n_threads
    );
    for (name, d) in [
        ("knn", t.knn),
        ("graph", t.graph),
        ("init", t.init),
        ("train", t.train),
    ] {
        let _ = writeln!(out, "{name:<6} {:>10.3} s", secs(d));
    }
    let _ = writeln!(out, "{:<6} {:>10.3} s", "total", secs(t.total()));
    let _ = writeln!(
        out,
        "epochs {}  samples {}  final Q {:.6}",
        r.epochs_run, r.samples_processed, r.final_q
    );
    let _ = writeln!(out, "wrote {}", args.output.display());
    if let Some(plot) = &args.plot {
        let _ = writeln!(out, "wrote {}", plot.display());
    }
    Ok(())
}

fn run_oracle(args: &OracleArgs, out: &mut impl Write) -> Result<()> {
    let data = load(&args.input)?;
    let knn = exact_knn(&data, args.k, args.metric.into())?;
    let graph = build_graph(&knn)?;
    let state = mle_gradient_ascent(
        &graph, args.dim, args.a, args.b, args.steps, args.step, args.seed,
    );
    let l = normalized_likelihood(&state, &graph, args.a, args.b);
    let _ = writeln!(out, "normalized log-likelihood {l:.9}");
    if let Some(path) = &args.output {
        write_embedding(&state, path)?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Embed(a) => run_embed(a, &mut out),
        Command::Oracle(a) => run_oracle(a, &mut out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flag_defaults_match_hyperparams() {
        let cli = Cli::try_parse_from(["ncvis", "embed", "--input", "x.csv", "--output", "o.tsv"])
            .unwrap();
        let Command::Embed(args) = cli.command else {
            panic!("expected embed");
        };
        let got = args.config().hyper;
        let want = Hyperparams::default();
        assert_eq!(got, want);
        assert_eq!(args.input.format, InputFormat::Csv);
        assert_eq!(args.init, InitArg::Spectral);
    }

    #[test]
    fn missing_input_is_usage_error() {
        let err = Cli::try_parse_from(["ncvis", "embed", "--output", "o.tsv"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::MissingRequiredArgument);
        assert_ne!(err.exit_code(), 0);
    }
}
