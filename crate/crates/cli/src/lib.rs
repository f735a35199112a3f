use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use binclust::baseline::{gap_statistic, GapOptions, KMeansOptions};
use binclust::datagen::{generate, SyntheticSpec};
use binclust::eval::{cluster_feature_frequencies, matched_accuracy};
use binclust::io::{self, GapReportFile, ReportFile};
use binclust::preprocess::{percentile_binarize, Direction, TermFilter};
use binclust::sampler::{self, DEFAULT_K_INIT};
use binclust::state::compact_labels;
use binclust::{resolve_hyperparams, AnnealingSchedule, PriorPolicy};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "binclust",
    version,
    about = "Nonparametric clustering of binary data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic benchmark matrix and its true labels.
    Generate(GenerateArgs),
    /// Cluster a binary matrix with the annealed Gibbs sampler.
    Cluster(ClusterArgs),
    /// Print the matched accuracy of predicted labels against true labels.
    Evaluate(EvaluateArgs),
    /// Run k-means with the gap statistic.
    Baseline(BaselineArgs),
    /// Write per-cluster feature frequencies from a cluster report as CSV.
    Summarize(SummarizeArgs),
    /// Turn raw tables into binary matrices.
    #[command(subcommand)]
    Preprocess(Preprocess),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Percent of features carrying signal in each cluster.
    #[arg(long)]
    sd: f64,
    /// Percent of all cells flipped as noise.
    #[arg(long)]
    sn: f64,
    #[arg(long, default_value_t = 5)]
    k_true: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    labels_out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Dense,
    Sparse,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// Dense CSV or sparse coordinate file (detected from the first line).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Beta shape for feature presence, shared by all features.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Beta shape for feature absence: a number, or "empirical".
    #[arg(long, default_value = "empirical")]
    b: String,
    #[arg(long, default_value_t = 1.0)]
    t_init: f64,
    #[arg(long, default_value_t = 0.9)]
    lambda: f64,
    #[arg(long, default_value_t = 20)]
    block: usize,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = DEFAULT_K_INIT)]
    k_init: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Final labels, one per line.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Dense CSV of the input rows grouped by final cluster.
    #[arg(long)]
    order_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Labels file, or a JSON cluster report.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 15)]
    k_max: usize,
    #[arg(long, default_value_t = 10)]
    n_refs: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    #[arg(long)]
    report: PathBuf,
    /// Input matrix; when given, frequencies are recomputed from it instead of
    /// read from the report.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Preprocess {
    /// Keep terms repeated within some document and present in enough documents.
    TermFilter(TermFilterArgs),
    /// Threshold each column at a percentile of its own values.
    Percentile(PercentileArgs),
}

#[derive(Debug, Args)]
struct TermFilterArgs {
    /// Document-term counts: dense CSV, or "N V" header with "doc term count" lines.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Kept column indices, one per line.
    #[arg(long)]
    kept_out: Option<PathBuf>,
    #[arg(long, default_value_t = 11)]
    min_docs: usize,
    #[arg(long, default_value_t = 2)]
    min_peak: u32,
    #[arg(long, value_enum, default_value_t = OutputFormat::Dense)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Below,
    Above,
}

#[derive(Debug, Args)]
struct PercentileArgs {
    /// Real-valued CSV; empty, NA, NaN or ? mark missing values.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20.0)]
    pct: f64,
    #[arg(long, value_enum, default_value_t = DirectionArg::Below)]
    direction: DirectionArg,
    /// Keep rows with missing values (their missing cells become 0).
    #[arg(long)]
    keep_missing: bool,
    /// Indices of the removed rows, one per line.
    #[arg(long)]
    removed_out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(binclust::Error),
}

impl From<binclust::Error> for Failure {
    fn from(e: binclust::Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code: 0 success, 1 usage error, 2 data or format error.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Preprocess(Preprocess::TermFilter(a)) => cmd_term_filter(a),
        Command::Preprocess(Preprocess::Percentile(a)) => cmd_percentile(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn write_file(path: &PathBuf, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| {
        Failure::Data(binclust::Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let spec = SyntheticSpec {
        n_objects: a.n,
        n_features: a.d,
        info_pct: a.sd,
        noise_pct: a.sn,
        k_true: a.k_true,
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let synth = generate(&spec, &mut rng)?;
    write_file(&a.out, &io::write_dense(&synth.data))?;
    write_file(&a.labels_out, &io::write_labels(&synth.labels))
}

fn parse_b(raw: &str) -> Result<PriorPolicy, Failure> {
    if raw.eq_ignore_ascii_case("empirical") {
        return Ok(PriorPolicy::Empirical);
    }
    raw.parse::<f64>().map(PriorPolicy::Constant).map_err(|_| {
        Failure::Usage(format!(
            "--b expects a number or \"empirical\", got {raw:?}"
        ))
    })
}

fn cmd_cluster(a: ClusterArgs) -> CmdResult {
    let schedule = AnnealingSchedule {
        t_init: a.t_init,
        lambda: a.lambda,
        block: a.block,
        n_sweeps: a.sweeps,
    };
    schedule
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if a.k_init == 0 {
        return Err(Failure::Usage("--k-init must be at least 1".into()));
    }
    let a_policy = PriorPolicy::Constant(a.a);
    let b_policy = parse_b(&a.b)?;
    let data = io::load_matrix(&a.input)?;
    let hyper = resolve_hyperparams(&data, a_policy, b_policy, a.alpha)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let run = sampler::run(&data, &hyper, &schedule, a.k_init, a.seed)?;
    let freqs = cluster_feature_frequencies(&run.assignments, &data)?;
    println!(
        "{} clusters, final score {:.6}",
        run.n_clusters,
        run.score_trace.last().copied().unwrap_or(f64::NAN)
    );
    if let Some(path) = &a.labels_out {
        write_file(path, &io::write_labels(&run.assignments))?;
    }
    if let Some(path) = &a.order_out {
        let mut order: Vec<usize> = (0..data.n_rows()).collect();
        order.sort_by_key(|&i| run.assignments[i]);
        write_file(path, &io::write_dense(&data.select_rows(&order)?))?;
    }
    let report = ReportFile::new(run, a_policy, b_policy, freqs);
    if let Some(path) = &a.report {
        write_file(path, &io::to_json(&report)?)?;
    }
    Ok(())
}

fn load_pred(path: &PathBuf) -> Result<Vec<usize>, Failure> {
    let text = io::read_text(path)?;
    if text.trim_start().starts_with('{') {
        Ok(io::parse_report(&text)?.assignments)
    } else {
        Ok(io::parse_labels(&text)?)
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> CmdResult {
    let pred = load_pred(&a.pred)?;
    let truth = io::load_labels(&a.truth)?;
    let acc = matched_accuracy(&compact_labels(&pred), &compact_labels(&truth))?;
    println!("{acc:.6}");
    Ok(())
}

fn cmd_baseline(a: BaselineArgs) -> CmdResult {
    if a.k_max == 0 || a.n_refs == 0 || a.restarts == 0 || a.max_iters == 0 {
        return Err(Failure::Usage(
            "--k-max, --n-refs, --restarts and --max-iters must be positive".into(),
        ));
    }
    let data = io::load_matrix(&a.input)?;
    let options = GapOptions {
        k_max: a.k_max,
        n_refs: a.n_refs,
        kmeans: KMeansOptions {
            n_restarts: a.restarts,
            max_iters: a.max_iters,
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let gap = gap_statistic(&data, &options, &mut rng)?;
    println!("chosen k = {}", gap.chosen_k);
    if let Some(path) = &a.labels_out {
        write_file(path, &io::write_labels(&gap.labels))?;
    }
    if let Some(path) = &a.report {
        write_file(
            path,
            &io::to_json(&GapReportFile::new(&gap, a.seed, a.n_refs))?,
        )?;
    }
    Ok(())
}

fn cmd_summarize(a: SummarizeArgs) -> CmdResult {
    let report = io::load_report(&a.report)?;
    let freqs = match &a.input {
        Some(path) => cluster_feature_frequencies(&report.assignments, &io::load_matrix(path)?)?,
        None => report.feature_frequencies.clone(),
    };
    let labels = compact_labels(&report.assignments);
    let mut sizes = vec![0usize; freqs.len()];
    for l in labels {
        if let Some(s) = sizes.get_mut(l) {
            *s += 1;
        }
    }
    write_file(&a.out, &io::write_frequencies_csv(&freqs, &sizes))
}

fn cmd_term_filter(a: TermFilterArgs) -> CmdResult {
    let counts = io::parse_counts(&io::read_text(&a.input)?)?;
    let filter = TermFilter {
        min_peak_count: a.min_peak,
        min_doc_freq: a.min_docs,
    };
    let (matrix, kept) = filter.apply(&counts)?;
    let body = match a.format {
        OutputFormat::Dense => io::write_dense(&matrix),
        OutputFormat::Sparse => io::write_sparse(&matrix),
    };
    write_file(&a.out, &body)?;
    if let Some(path) = &a.kept_out {
        write_file(path, &io::write_labels(&kept))?;
    }
    println!(
        "kept {} of {} terms",
        kept.len(),
        counts.first().map_or(0, Vec::len)
    );
    Ok(())
}

fn cmd_percentile(a: PercentileArgs) -> CmdResult {
    if !(a.pct > 0.0 && a.pct < 100.0) {
        return Err(Failure::Usage(format!(
            "--pct must be in (0, 100), got {}",
            a.pct
        )));
    }
    let values = io::parse_real_matrix(&io::read_text(&a.input)?)?;
    let direction = match a.direction {
        DirectionArg::Below => Direction::Below,
        DirectionArg::Above => Direction::Above,
    };
    let out = percentile_binarize(&values, a.pct, direction)?;
    let matrix = if a.keep_missing {
        out.matrix.clone()
    } else {
        out.complete_rows()?
    };
    write_file(&a.out, &io::write_dense(&matrix))?;
    if let Some(path) = &a.removed_out {
        let removed = if a.keep_missing {
            &[][..]
        } else {
            &out.rows_with_missing[..]
        };
        write_file(path, &io::write_labels(removed))?;
    }
    Ok(())
}
