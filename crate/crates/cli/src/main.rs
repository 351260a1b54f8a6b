mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use testtime::engine::{BlockOrder, ModelKind};
use testtime::faast::io::GRAPH_FORMAT_VERSION;
use testtime::miner::DEFAULT_SOURCE_ROOT;
use testtime::pipeline::{RunConfig, MODEL_FORMAT_VERSION};

/// Predict Java test execution times from flow-augmented syntax graphs.
#[derive(Parser)]
#[command(name = "testtime")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for file fan-out; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse one Java file and print a summary of its syntax tree.
    Parse {
        file: PathBuf,
        /// Print the whole tree (indented text, or JSON with --json).
        #[arg(long)]
        emit_ast: bool,
    },
    /// Build flow-augmented graphs for a file or every .java file under a directory.
    Graph {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
    },
    /// Corpus statistics over a directory of graph files.
    Stats { graph_dir: PathBuf },
    /// Pair Surefire reports with test sources and write a dataset manifest.
    Ingest {
        /// Directory searched recursively for TEST-*.xml; each subdirectory is one run.
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        repo: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Project label for every row; defaults to the repository directory name.
        #[arg(long)]
        project: Option<String>,
        /// Test source root suffix; may be repeated.
        #[arg(long = "source-root", default_value = DEFAULT_SOURCE_ROOT)]
        source_roots: Vec<String>,
    },
    /// Write the synthetic benchmark corpus and its manifest.
    Synth {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Split a manifest into train.jsonl and test.jsonl.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train_frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Train on every sample of a manifest and save the model.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(short, long)]
        out: PathBuf,
        /// Per-epoch loss CSV; defaults to the model path with extension `loss.csv`.
        #[arg(long)]
        loss_log: Option<PathBuf>,
    },
    /// Evaluate a saved model on a manifest.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Write actual and predicted times per file as CSV.
        #[arg(long)]
        scatter: Option<PathBuf>,
    },
    /// Train on all projects but one and test on the held-out project.
    CrossEval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        hold_out: String,
        #[arg(long)]
        scatter: Option<PathBuf>,
    },
    /// Train both model kinds on one shared split and compare them.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Directory for graphconv.csv and ggnn.csv scatter files.
        #[arg(long)]
        scatter_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Binary,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Skip samples faster than this many milliseconds.
    #[arg(long)]
    min_ms: Option<f64>,
}

/// Run configuration: a JSON file, then individual flag overrides.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    /// graphconv or ggnn
    #[arg(long)]
    model_kind: Option<ModelKind>,
    #[arg(long)]
    train_frac: Option<f64>,
    #[arg(long)]
    ggnn_steps: Option<usize>,
    /// norm_relu or relu_norm
    #[arg(long)]
    block_order: Option<BlockOrder>,
    #[arg(long)]
    value_cap: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        use anyhow::Context;
        let mut c = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(seed, epochs, lr, batch_size, hidden_dim, model_kind, train_frac, ggnn_steps, block_order, value_cap);
        c.validate()?;
        Ok(c)
    }
}

fn version() -> String {
    format!("{} (graph format {GRAPH_FORMAT_VERSION}, model format {MODEL_FORMAT_VERSION})", env!("CARGO_PKG_VERSION"))
}

fn usage_error(cmd: &mut clap::Command, err: clap::Error) -> ExitCode {
    let _ = err.print();
    let code = err.exit_code();
    if code != 0 && err.kind() != ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
        let name = std::env::args().skip(1).find(|a| !a.starts_with('-'));
        if let Some(sub) = name.and_then(|n| cmd.find_subcommand_mut(&n)) {
            let _ = writeln!(std::io::stderr(), "\n{}", sub.render_help());
        }
    }
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let mut cmd = Cli::command().version(version());
    let cli = match cmd.try_get_matches_from_mut(std::env::args_os()).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => return usage_error(&mut cmd, e),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();

    let mut out = String::new();
    let result = commands::run(cli, &mut out);
    // A closed stdout (for example `| head`) is not an error of the command.
    let _ = std::io::stdout().write_all(out.as_bytes());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e:#}");
            ExitCode::from(1)
        }
    }
}
