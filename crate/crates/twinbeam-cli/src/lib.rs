//! Terminal front end: seeded Monte Carlo runs, per-criterion analysis of
//! histogram files, and a full JSON report with a plot-ready K_n CSV.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or argument syntax),
//! 2 data error (unreadable files, malformed histograms, invalid configs).

pub mod format;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use twinbeam::{
    combined_test, gamma_wdsby, klyshko_k, klyshko_scan, lee_r_joint, mandel_q,
    significance_table, CountHistogram, CriterionKind, CriterionResult, ExperimentConfig,
    Geometry, JointCountHistogram, KlyshkoPoint, LeeCell, NbarPolicy,
};

use format::{parse_histogram, parse_joint_histogram, write_histogram, write_joint_histogram};
use report::{build_report, klyshko_csv, Report, ReportSpec};

/// Line to stdout without the panic `println!` hides: a consumer closing
/// the pipe early (`twinbeam ... | head`) is a normal way to stop reading,
/// so it ends the process quietly instead of crashing it.
fn out(line: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let outcome = stdout
        .write_fmt(line)
        .and_then(|()| stdout.write_all(b"\n"));
    if let Err(err) = outcome {
        if err.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing stdout: {err}");
        std::process::exit(2);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { out(format_args!($($arg)*)) };
}

#[derive(Debug, Parser)]
#[command(
    name = "twinbeam",
    version,
    about = "Simulate pulsed photon-pair experiments and test count histograms for nonclassicality"
)]
pub struct Cli {
    /// Worker threads for simulation (default: one per logical CPU).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded experiment and write its count histogram.
    Simulate {
        /// JSON run description; unknown keys are rejected.
        #[arg(long)]
        config: PathBuf,
        /// Histogram output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one criterion family on an existing histogram file.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Run the full battery and write a JSON report plus klyshko_kn.csv.
    Report {
        /// Joint signal/idler histogram (`n1,n2,count` rows).
        #[arg(long)]
        joint: PathBuf,
        /// Single-beam histogram for K_n / Gamma / Q; defaults to the
        /// signal marginal of the joint data.
        #[arg(long)]
        single: Option<PathBuf>,
        /// Report JSON destination; the CSV lands in the same directory.
        #[arg(long)]
        out: PathBuf,
        /// Trigger mean for the heralded Lee form: `estimate` or a number.
        #[arg(long, default_value = "estimate", value_parser = parse_nbar)]
        nbar: NbarPolicy,
        /// Trigger photon numbers to tabulate, as LO:HI or a bare N.
        #[arg(long, default_value = "1:3", value_parser = parse_span)]
        n1: Span,
        /// Conditioned photon numbers to tabulate, as LO:HI or a bare N.
        #[arg(long, default_value = "1:3", value_parser = parse_span)]
        n2: Span,
    },
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Klyshko K_n on a single-beam histogram.
    Klyshko {
        #[arg(long)]
        hist: PathBuf,
        /// Single order to evaluate; omit to scan every supported order.
        #[arg(long)]
        n: Option<usize>,
        /// Emit the result as pretty JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Gamma on bins 1..3 together with the combined two-test bound.
    Gamma {
        #[arg(long)]
        hist: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Lee R over a grid of (n1, n2) working points.
    Lee {
        /// Joint histogram path.
        #[arg(long)]
        joint: PathBuf,
        /// Which estimator to run; `nbar` only applies to `conditional`.
        #[arg(long, value_enum, default_value_t = LeeForm::Conditional)]
        form: LeeForm,
        #[arg(long, default_value = "estimate", value_parser = parse_nbar)]
        nbar: NbarPolicy,
        #[arg(long, default_value = "1:3", value_parser = parse_span)]
        n1: Span,
        #[arg(long, default_value = "1:3", value_parser = parse_span)]
        n2: Span,
        #[arg(long)]
        json: bool,
    },
    /// Mandel Q on a single-beam histogram.
    Q {
        #[arg(long)]
        hist: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeeForm {
    /// Heralded estimator built from conditional rows around the trigger.
    Conditional,
    /// Direct joint-probability estimator.
    Joint,
}

/// Inclusive 1-based order range, written `2:4` on the command line
/// (or a bare `3` for a single order).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

fn parse_span(text: &str) -> Result<Span, String> {
    let (lo, hi) = match text.split_once(':') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), text.trim()),
    };
    let parse = |part: &str| {
        part.parse::<usize>()
            .map_err(|_| format!("expected LO:HI or N, got `{text}`"))
    };
    let span = Span {
        lo: parse(lo)?,
        hi: parse(hi)?,
    };
    if span.lo < 1 || span.hi < span.lo {
        return Err(format!("need 1 <= LO <= HI, got `{text}`"));
    }
    Ok(span)
}

fn parse_nbar(text: &str) -> Result<NbarPolicy, String> {
    if text == "estimate" {
        return Ok(NbarPolicy::Estimate);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| format!("expected `estimate` or a positive number, got `{text}`"))?;
    if !value.is_finite() || value <= 0.0 {
        return Err(format!("trigger mean must be positive and finite, got `{text}`"));
    }
    Ok(NbarPolicy::Fixed(value))
}

/// Parse `args` and run the selected command. Never panics on user input;
/// the return value is the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version arrive here too; those are not errors.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.threads {
        None => dispatch(cli.command),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| dispatch(cli.command))),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Analyze(analyze) => run_analyze(analyze),
        Command::Report {
            joint,
            single,
            out,
            nbar,
            n1,
            n2,
        } => run_report(&joint, single.as_deref(), &out, nbar, n1, n2),
    }
}

fn simulate(config_path: &Path, out: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", config_path.display()))?;
    // Normalized config echo, so a histogram file names the exact run
    // (including defaulted fields) that produced it.
    let comments = vec![
        "twinbeam simulate".to_string(),
        format!("config: {}", serde_json::to_string(&config)?),
    ];
    match config.geometry {
        Geometry::TwinBeam => {
            let hist = twinbeam::simulate_twin_beam(&config)?;
            fs::write(out, write_joint_histogram(&hist, &comments))
                .with_context(|| format!("writing {}", out.display()))?;
            outln!(
                "twin-beam run: {} pulses, grid 0..={} per arm, {} overflow; wrote {}",
                hist.trials(),
                hist.n_max(),
                hist.overflow(),
                out.display()
            );
        }
        Geometry::Collinear => {
            let hist = twinbeam::simulate_collinear(&config)?;
            fs::write(out, write_histogram(&hist, &comments))
                .with_context(|| format!("writing {}", out.display()))?;
            outln!(
                "collinear run: {} pulses, bins 0..={}, {} overflow; wrote {}",
                hist.trials(),
                hist.n_max(),
                hist.overflow(),
                out.display()
            );
        }
    }
    Ok(())
}

fn run_analyze(analyze: Analyze) -> anyhow::Result<()> {
    match analyze {
        Analyze::Klyshko { hist, n, json } => {
            let hist = load_histogram(&hist)?;
            match n {
                Some(n) => emit_result(&klyshko_k(&hist, n)?, json),
                None => {
                    let series = klyshko_scan(&hist);
                    if json {
                        outln!("{}", serde_json::to_string_pretty(&series)?);
                    } else if series.is_empty() {
                        outln!("histogram too short for any K_n (needs bins up to n + 1)");
                    } else {
                        print_klyshko_table(&series);
                    }
                    Ok(())
                }
            }
        }
        Analyze::Gamma { hist, json } => {
            let hist = load_histogram(&hist)?;
            let gamma = gamma_wdsby(&hist);
            let combined = combined_test(&hist);
            if json {
                let doc = serde_json::json!({ "gamma": gamma, "combined": combined });
                outln!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                print_result(&gamma);
                print_result(&combined);
            }
            Ok(())
        }
        Analyze::Lee {
            joint,
            form,
            nbar,
            n1,
            n2,
            json,
        } => {
            let joint = load_joint_histogram(&joint)?;
            let cells = match form {
                LeeForm::Conditional => {
                    significance_table(&joint, (n1.lo, n1.hi), (n2.lo, n2.hi), nbar)?
                }
                LeeForm::Joint => joint_lee_table(&joint, n1, n2)?,
            };
            if json {
                outln!("{}", serde_json::to_string_pretty(&cells)?);
            } else {
                print_lee_table(&cells);
            }
            Ok(())
        }
        Analyze::Q { hist, json } => {
            let hist = load_histogram(&hist)?;
            emit_result(&mandel_q(&hist), json)
        }
    }
}

fn joint_lee_table(
    joint: &JointCountHistogram,
    n1: Span,
    n2: Span,
) -> anyhow::Result<Vec<LeeCell>> {
    let mut cells = Vec::with_capacity((n1.hi - n1.lo + 1) * (n2.hi - n2.lo + 1));
    for a in n1.lo..=n1.hi {
        for b in n2.lo..=n2.hi {
            cells.push(LeeCell {
                n1: a,
                n2: b,
                result: lee_r_joint(joint, a, b)?,
            });
        }
    }
    Ok(cells)
}

fn run_report(
    joint_path: &Path,
    single_path: Option<&Path>,
    out: &Path,
    nbar: NbarPolicy,
    n1: Span,
    n2: Span,
) -> anyhow::Result<()> {
    let joint_text = fs::read_to_string(joint_path)
        .with_context(|| format!("reading {}", joint_path.display()))?;
    let (joint, joint_provenance) = parse_joint_histogram(&joint_text)
        .with_context(|| format!("parsing {}", joint_path.display()))?;
    let single = match single_path {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let (hist, provenance) =
                parse_histogram(&text).with_context(|| format!("parsing {}", path.display()))?;
            Some((hist, path.display().to_string(), provenance))
        }
        None => None,
    };
    let report = build_report(ReportSpec {
        joint: &joint,
        joint_path: joint_path.display().to_string(),
        joint_provenance,
        single,
        nbar,
        lee_n1: (n1.lo, n1.hi),
        lee_n2: (n2.lo, n2.hi),
    })?;

    if let Some(dir) = out.parent().filter(|dir| !dir.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(out, json).with_context(|| format!("writing {}", out.display()))?;
    let csv_path = out.with_file_name("klyshko_kn.csv");
    fs::write(&csv_path, klyshko_csv(&report.klyshko))
        .with_context(|| format!("writing {}", csv_path.display()))?;

    outln!("report: {}", out.display());
    outln!("k_n csv: {}", csv_path.display());
    print_summary(&report);
    Ok(())
}

fn print_summary(report: &Report) {
    print_result(&report.gamma);
    print_result(&report.combined);
    print_result(&report.mandel_q);
    let orders: Vec<String> = report
        .klyshko
        .iter()
        .filter(|p| p.result.violated)
        .map(|p| p.n.to_string())
        .collect();
    outln!("klyshko orders violated: {}", join_or_none(&orders));
    let cells: Vec<String> = report
        .lee
        .iter()
        .filter(|c| c.result.violated)
        .map(|c| format!("({},{})", c.n1, c.n2))
        .collect();
    outln!("lee cells violated: {}", join_or_none(&cells));
}

fn join_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

fn load_histogram(path: &Path) -> anyhow::Result<CountHistogram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (hist, _) =
        parse_histogram(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(hist)
}

fn load_joint_histogram(path: &Path) -> anyhow::Result<JointCountHistogram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (hist, _) =
        parse_joint_histogram(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(hist)
}

fn emit_result(result: &CriterionResult, json: bool) -> anyhow::Result<()> {
    if json {
        outln!("{}", serde_json::to_string_pretty(result)?);
    } else {
        print_result(result);
    }
    Ok(())
}

fn kind_label(kind: CriterionKind) -> &'static str {
    match kind {
        CriterionKind::KlyshkoK => "klyshko_k",
        CriterionKind::GammaWdsby => "gamma",
        CriterionKind::Combined => "combined",
        CriterionKind::LeeJoint => "lee_joint",
        CriterionKind::LeeConditional => "lee_conditional",
        CriterionKind::MandelQ => "mandel_q",
    }
}

fn fmt_value(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.6}")
    } else {
        "undefined".to_string()
    }
}

fn fmt_sigma(opt: Option<f64>) -> String {
    opt.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

fn fmt_signif(opt: Option<f64>) -> String {
    opt.map_or_else(|| "-".to_string(), |v| format!("{v:+.2}"))
}

fn print_result(result: &CriterionResult) {
    outln!(
        "{:<16} value {:>12}  threshold {:>12}  sigma {:>12}  signif {:>9}  violated {:<5}  status {}",
        kind_label(result.name),
        fmt_value(result.value),
        fmt_value(result.threshold),
        fmt_sigma(result.std_error),
        fmt_signif(result.significance),
        result.violated,
        result.status,
    );
}

fn print_klyshko_table(series: &[KlyshkoPoint]) {
    outln!(
        "{:>3}  {:>12}  {:>12}  {:>9}  {:>8}  status",
        "n", "K", "sigma", "signif", "violated"
    );
    for point in series {
        outln!(
            "{:>3}  {:>12}  {:>12}  {:>9}  {:>8}  {}",
            point.n,
            fmt_value(point.result.value),
            fmt_sigma(point.result.std_error),
            fmt_signif(point.result.significance),
            point.result.violated,
            point.result.status,
        );
    }
}

fn print_lee_table(cells: &[LeeCell]) {
    outln!(
        "{:>3}  {:>3}  {:>12}  {:>12}  {:>9}  {:>8}  status",
        "n1", "n2", "R", "sigma", "signif", "violated"
    );
    for cell in cells {
        outln!(
            "{:>3}  {:>3}  {:>12}  {:>12}  {:>9}  {:>8}  {}",
            cell.n1,
            cell.n2,
            fmt_value(cell.result.value),
            fmt_sigma(cell.result.std_error),
            fmt_signif(cell.result.significance),
            cell.result.violated,
            cell.result.status,
        );
    }
}
