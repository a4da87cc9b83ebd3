//! `affectlag`: the pipeline from raw posts to Granger reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod cmd;
mod svg;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum Failure {
    /// Bad or inconsistent input.
    Data(String),
    /// A broken invariant inside the tool.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Data(m) => write!(f, "{m}"),
            Failure::Internal(m) => write!(f, "internal: {m}"),
        }
    }
}

pub type Result<T, E = Failure> = std::result::Result<T, E>;

/// Attaches context and classifies an error as a data error.
pub trait Context<T> {
    fn data(self, what: impl Display) -> Result<T>;
}

impl<T, E: Display> Context<T> for std::result::Result<T, E> {
    fn data(self, what: impl Display) -> Result<T> {
        self.map_err(|e| Failure::Data(format!("{what}: {}", one_line(&e.to_string()))))
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Parser)]
#[command(name = "affectlag", version, about = "Activity and happiness: user typing, emotion transfer, Granger tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a pipeline config with every default filled in.
    #[command(subcommand)]
    Config(ConfigCmd),
    /// Convert a Twitter v1.1 export (JSON array or JSONL) to a corpus.
    Ingest {
        input: PathBuf,
        out: PathBuf,
        /// Skip retweets.
        #[arg(long)]
        drop_retweets: bool,
    },
    /// Parse and check a corpus; prints user and post counts.
    Validate { corpus: PathBuf },
    /// Generate a synthetic corpus and the manifest of planted links.
    Synth {
        /// Pipeline config; its `synth` section is used.
        config: PathBuf,
        out_corpus: PathBuf,
        out_manifest: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Mention graph construction.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Node and word embeddings.
    #[command(subcommand)]
    Embed(EmbedCmd),
    /// Train the user-type or the emotion classifier.
    #[command(subcommand)]
    Train(TrainCmd),
    /// Apply a trained classifier.
    #[command(subcommand)]
    Classify(ClassifyCmd),
    /// Per-user activity and happiness series.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Per-user Granger tests.
    #[command(subcommand)]
    Granger(GrangerCmd),
    /// Render the rn/kn/nc table from one or more Granger run directories.
    Report {
        /// Run directories written by `granger run` or `granger control`,
        /// then the output file (`.json` selects JSON, anything else text).
        #[arg(required = true, num_args = 2.., value_name = "RUN_DIR... OUT")]
        paths: Vec<PathBuf>,
    },
    /// Daily totals of activity and happiness across users, for plotting.
    Plotdata {
        /// Series file or directory.
        series: PathBuf,
        out: PathBuf,
        /// Also draw both curves as an SVG line chart.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SeedArg {
    /// Overrides every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ConfigArg {
    /// Pipeline config (JSON). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ConfigCmd {
    Init {
        out: PathBuf,
        /// Narrow models and short walks for laptop-scale runs.
        #[arg(long)]
        desk: bool,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    Build {
        corpus: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Count mentions from every post, not only activity posts.
        #[arg(long)]
        all_posts: bool,
        /// Also write a tab-separated edge list.
        #[arg(long)]
        edge_list: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Random walks over the mention graph, then skip-gram.
    Nodes {
        graph: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Skip-gram over descriptions, locations and posts.
    Words {
        corpus: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmotionArch {
    /// Bi-LSTM with attention.
    Bilstm,
    /// Single-layer GRU baseline.
    Gru,
}

#[derive(Subcommand)]
enum TrainCmd {
    /// Joint user-type model. Users need a user type label.
    UserModel {
        corpus: PathBuf,
        config: PathBuf,
        ckpt: PathBuf,
        /// Word vectors from `embed words`.
        #[arg(long)]
        words: PathBuf,
        /// Node vectors from `embed nodes`. Without them the network block is zero.
        #[arg(long)]
        nodes: Option<PathBuf>,
        /// Write per-epoch losses as CSV.
        #[arg(long)]
        history: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Emotion classifier on posts that carry an emotion label.
    Emotion {
        source: PathBuf,
        config: PathBuf,
        ckpt: PathBuf,
        /// Word vectors; required for the Bi-LSTM model.
        #[arg(long)]
        words: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EmotionArch::Bilstm)]
        model: EmotionArch,
        #[arg(long)]
        history: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Subcommand)]
enum ClassifyCmd {
    /// User type per user, as JSONL.
    Users { corpus: PathBuf, ckpt: PathBuf, out: PathBuf },
    /// Emotion per post, as JSONL. Posts below the threshold get "ne".
    Emotion {
        corpus: PathBuf,
        ckpt: PathBuf,
        out: PathBuf,
        /// Minimum top probability; defaults to the checkpoint's setting.
        #[arg(long)]
        ne_threshold: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Any yoga post.
    Any,
    /// Only first-hand practice posts.
    Firsthand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BinArg {
    Day,
    Week,
    Month,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TypeArg {
    Practitioner,
    Promotional,
    Other,
}

#[derive(Subcommand)]
enum SeriesCmd {
    Build {
        corpus: PathBuf,
        /// Emotion predictions JSONL, or `gold` for the corpus labels.
        emotions: String,
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Activity definition [default: from config, firsthand]
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Bin width [default: from config, day]
        #[arg(long, value_enum)]
        bin: Option<BinArg>,
        /// Divide counts by the bin's post total.
        #[arg(long)]
        normalize: bool,
        /// User predictions from `classify users`, used with --keep-type.
        #[arg(long, requires = "keep_type")]
        user_types: Option<PathBuf>,
        /// Keep only users predicted as this type.
        #[arg(long, value_enum, requires = "user_types")]
        keep_type: Option<TypeArg>,
    },
}

#[derive(Args)]
pub struct TestArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Lags as `1..5`, `1,3,5` or `5` [default: from config, 1..5]
    #[arg(long)]
    lags: Option<String>,
    /// Significance level [default: from config, 0.05]
    #[arg(long)]
    alpha: Option<f64>,
    /// Lag summarized in the report [default: from config, 5]
    #[arg(long)]
    headline_lag: Option<usize>,
    /// Test statistic [default: from config, f]
    #[arg(long, value_enum)]
    test: Option<TestArg>,
    /// Divide alpha by the number of lags.
    #[arg(long)]
    bonferroni: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    F,
    Chi2,
}

#[derive(Subcommand)]
enum GrangerCmd {
    /// Does activity Granger-cause happiness? Writes results.csv,
    /// activity.csv, summary.json and summary.txt.
    Run {
        series_dir: PathBuf,
        out_dir: PathBuf,
        #[command(flatten)]
        test: TestArgs,
        /// Feature label shown in the report [default: from the series
        /// directory, else "y + 1st + h"]
        #[arg(long)]
        feature: Option<String>,
    },
    /// Control: does total post volume Granger-cause happiness?
    Control {
        corpus: PathBuf,
        /// Emotion predictions JSONL, or `gold`.
        emotions: String,
        out_dir: PathBuf,
        #[command(flatten)]
        test: TestArgs,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Config(ConfigCmd::Init { out, desk }) => cmd::config_init(&out, desk),
        Command::Ingest { input, out, drop_retweets } => cmd::ingest(&input, &out, drop_retweets),
        Command::Validate { corpus } => cmd::validate(&corpus),
        Command::Synth { config, out_corpus, out_manifest, seed } => {
            cmd::synth(&config, &out_corpus, &out_manifest, seed.seed)
        }
        Command::Graph(GraphCmd::Build { corpus, out, config, all_posts, edge_list }) => {
            cmd::graph_build(&corpus, &out, config.config.as_deref(), all_posts, edge_list.as_deref())
        }
        Command::Embed(EmbedCmd::Nodes { graph, out, config, seed }) => {
            cmd::embed_nodes(&graph, &out, config.config.as_deref(), seed.seed)
        }
        Command::Embed(EmbedCmd::Words { corpus, out, config, seed }) => {
            cmd::embed_words(&corpus, &out, config.config.as_deref(), seed.seed)
        }
        Command::Train(TrainCmd::UserModel { corpus, config, ckpt, words, nodes, history, seed }) => {
            cmd::train_user_model(&corpus, &config, &ckpt, &words, nodes.as_deref(), history.as_deref(), seed.seed)
        }
        Command::Train(TrainCmd::Emotion { source, config, ckpt, words, model, history, seed }) => {
            cmd::train_emotion(&source, &config, &ckpt, words.as_deref(), model, history.as_deref(), seed.seed)
        }
        Command::Classify(ClassifyCmd::Users { corpus, ckpt, out }) => cmd::classify_users(&corpus, &ckpt, &out),
        Command::Classify(ClassifyCmd::Emotion { corpus, ckpt, out, ne_threshold }) => {
            cmd::classify_emotion(&corpus, &ckpt, &out, ne_threshold)
        }
        Command::Series(SeriesCmd::Build {
            corpus,
            emotions,
            out_dir,
            config,
            mode,
            bin,
            normalize,
            user_types,
            keep_type,
        }) => cmd::series_build(
            &corpus,
            &emotions,
            &out_dir,
            config.config.as_deref(),
            cmd::SeriesFlags { mode, bin, normalize },
            user_types.as_deref().zip(keep_type),
        ),
        Command::Granger(GrangerCmd::Run { series_dir, out_dir, test, feature }) => {
            cmd::granger_run(&series_dir, &out_dir, &test, feature.as_deref())
        }
        Command::Granger(GrangerCmd::Control { corpus, emotions, out_dir, test }) => {
            cmd::granger_control(&corpus, &emotions, &out_dir, &test)
        }
        Command::Report { mut paths } => {
            let out = paths.pop().expect("clap enforces two paths");
            cmd::report(&paths, &out)
        }
        Command::Plotdata { series, out, svg } => cmd::plotdata(&series, &out, svg.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error");
            eprintln!("{}", if first.starts_with("error:") { first.to_string() } else { format!("error: {first}") });
            return ExitCode::from(1);
        }
    };
    // Panics are invariant violations: report them on one line, exit 3.
    std::panic::set_hook(Box::new(|info| {
        let msg = info
            .payload()
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| info.payload().downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        let at = info.location().map(|l| format!(" at {}:{}", l.file(), l.line())).unwrap_or_default();
        eprintln!("error: internal: {}{at}", one_line(&msg));
    }));
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
