//! Command line front end.
//!
//! Subcommands: `walk`, `encode`, `qkd`, `pipeline`, `report`. Every value
//! flag can also come from a `--config` file of `key = value` lines (keys
//! are the flag names without dashes); explicit flags win over the file,
//! the file wins over defaults. Artifact files inside `--out` have fixed
//! names so downstream tooling can find them. Runs with a pinned `--seed`
//! write byte-identical artifacts; without one a fresh seed is drawn and
//! echoed in the report metadata.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, schema, parse), 2 usage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use crate::analytics::{
    self, correlation_matrix, export_report, import_report, key_match_rate, outcome_distribution,
    qber_series, CorrelationMatrix, Report, ReportFormat, ReportMeta,
};
use crate::cipher::{self, expand_key, Key};
use crate::dataset::{column_stats, load_dataset, normalize_row};
use crate::encoding::{
    amplitude_csv, amplitude_listing, encode_features, DEFAULT_THETA_MAX, FEATURE_COUNT,
    FEATURE_NAMES,
};
use crate::error::{Error, Result};
use crate::qkd::{
    run_sessions, EvePolicy, EveSchedule, QkdSessionResult, SeriesConfig, DEFAULT_QBER_THRESHOLD,
    DEFAULT_RAW_BITS, DEFAULT_SAMPLE_FRACTION,
};
use crate::rng::{derive_seed, random_seed, seeded_rng};
use crate::walk::{build_walk_circuit, default_topology, node_marginals, Topology};

const DEFAULT_STEPS: usize = 3;
const DEFAULT_SHOTS: usize = 4096;
const DEFAULT_SESSIONS: usize = 1;
const DEFAULT_EVE_PROB: f64 = 1.0;

/// Auxiliary RNG stream indices, far above any session index so derived
/// session seeds can never collide with them.
const OUTCOME_STREAM: u64 = u64::MAX - 1;
const EVE_FILL_STREAM: u64 = u64::MAX - 2;

#[derive(Parser)]
#[command(
    name = "qscada",
    version,
    about = "Quantum-assisted SCADA link security simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the node-exposure walk over a plant topology
    Walk(WalkArgs),
    /// Encode one traffic row into a quantum register
    Encode(EncodeArgs),
    /// Run BB84 key exchange sessions
    Qkd(QkdArgs),
    /// Full run: encode, exchange keys, encrypt, analyze
    Pipeline(PipelineArgs),
    /// Re-serialize a stored report
    Report(ReportArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory for artifact files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; drawn at random when omitted
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Topology file (`nodes N marked M` header plus `u v` lines)
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Walk steps
    #[arg(long)]
    steps: Option<String>,
    /// Measurement shots for the histogram
    #[arg(long)]
    shots: Option<String>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Traffic CSV to encode from
    #[arg(long)]
    dataset: PathBuf,
    /// Row index within the dataset
    #[arg(long)]
    row: Option<String>,
    /// Feature rotation scale in radians
    #[arg(long = "theta-max")]
    theta_max: Option<String>,
}

#[derive(Args)]
struct QkdArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Session count
    #[arg(long)]
    sessions: Option<String>,
    /// Raw qubits per session
    #[arg(long = "raw-bits")]
    raw_bits: Option<String>,
    /// Eavesdropper: off, all, schedule:A-B, per-qubit:p1,p2,...
    #[arg(long)]
    eve: Option<String>,
    /// Interception probability where the eavesdropper is active
    #[arg(long = "eve-prob")]
    eve_prob: Option<String>,
    /// Abort threshold on estimated error rate
    #[arg(long)]
    threshold: Option<String>,
    /// Fraction of the sifted key disclosed for error estimation
    #[arg(long = "sample-fraction")]
    sample_fraction: Option<String>,
    /// Report format: json or csv
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    qkd: QkdArgs,
    /// Traffic CSV driving the run
    #[arg(long)]
    dataset: PathBuf,
    /// Row index encrypted and inspected in detail
    #[arg(long)]
    row: Option<String>,
    /// Feature rotation scale in radians
    #[arg(long = "theta-max")]
    theta_max: Option<String>,
    /// Measurement shots for the outcome histogram
    #[arg(long)]
    shots: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored report (.json or .csv)
    #[arg(long)]
    input: PathBuf,
    /// Target format: json or csv
    #[arg(long)]
    format: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI against `argv` (including the program name) and returns the
/// process exit code. Never panics on bad input.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Walk(args) => cmd_walk(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Qkd(args) => cmd_qkd(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Flag/config/default resolution. Every resolved value is echoed into the
/// report metadata map.
struct Resolver {
    file: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, format!("expected `key = value`, got `{line}`")))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl Resolver {
    fn new(config: &Option<PathBuf>) -> Result<Self> {
        let file = match config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        Ok(Resolver {
            file,
            echo: BTreeMap::new(),
        })
    }

    fn resolve<T>(&mut self, flag: &Option<String>, key: &str, default: T) -> Result<T>
    where
        T: FromStr + fmt::Display,
    {
        let raw = flag
            .as_deref()
            .or_else(|| self.file.get(key).map(String::as_str));
        let value = match raw {
            Some(s) => s
                .parse()
                .map_err(|_| Error::usage(format!("bad value `{s}` for {key}")))?,
            None => default,
        };
        self.echo.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Seed resolution draws a fresh seed when neither flag nor config
    /// pins one.
    fn resolve_seed(&mut self, flag: &Option<String>) -> Result<u64> {
        self.resolve(flag, "seed", random_seed())
    }

    fn echo_path(&mut self, key: &str, path: &Path) {
        self.echo
            .insert(key.to_string(), path.display().to_string());
    }
}

/// Eavesdropper placement parsed from the `--eve` flag.
#[derive(Debug, Clone, PartialEq)]
enum EveSpec {
    Off,
    All,
    Schedule { start: usize, end: usize },
    PerQubit(Vec<f64>),
}

impl FromStr for EveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "off" {
            return Ok(EveSpec::Off);
        }
        if s == "all" {
            return Ok(EveSpec::All);
        }
        if let Some(range) = s.strip_prefix("schedule:") {
            let (a, b) = range.split_once('-').ok_or_else(|| {
                Error::usage(format!("bad eve schedule `{s}`, want schedule:A-B"))
            })?;
            let start = a
                .parse()
                .map_err(|_| Error::usage(format!("bad session index `{a}`")))?;
            let end = b
                .parse()
                .map_err(|_| Error::usage(format!("bad session index `{b}`")))?;
            if end < start {
                return Err(Error::usage(format!("empty eve schedule `{s}`")));
            }
            return Ok(EveSpec::Schedule { start, end });
        }
        if let Some(list) = s.strip_prefix("per-qubit:") {
            let probs = list
                .split(',')
                .map(|p| {
                    p.parse()
                        .map_err(|_| Error::usage(format!("bad probability `{p}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            return Ok(EveSpec::PerQubit(probs));
        }
        Err(Error::usage(format!(
            "unknown eve spec `{s}`, want off, all, schedule:A-B or per-qubit:p1,p2,..."
        )))
    }
}

impl fmt::Display for EveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EveSpec::Off => write!(f, "off"),
            EveSpec::All => write!(f, "all"),
            EveSpec::Schedule { start, end } => write!(f, "schedule:{start}-{end}"),
            EveSpec::PerQubit(probs) => {
                write!(f, "per-qubit:")?;
                for (i, p) in probs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl EveSpec {
    fn into_parts(self, eve_prob: f64) -> Result<(EveSchedule, EvePolicy)> {
        Ok(match self {
            EveSpec::Off => (EveSchedule::Off, EvePolicy::off()),
            EveSpec::All => (EveSchedule::All, EvePolicy::uniform(eve_prob)?),
            EveSpec::Schedule { start, end } => (
                EveSchedule::Range { start, end },
                EvePolicy::uniform(eve_prob)?,
            ),
            EveSpec::PerQubit(probs) => (EveSchedule::All, EvePolicy::per_qubit(probs)?),
        })
    }
}

/// Resolves and creates the artifact directory. Deliberately not echoed
/// into report metadata: two otherwise identical runs pointed at different
/// directories should produce identical artifact bytes.
fn ensure_out_dir(resolver: &Resolver, flag: &Option<PathBuf>) -> Result<PathBuf> {
    let out = match flag {
        Some(path) => path.clone(),
        None => match resolver.file.get("out") {
            Some(s) => PathBuf::from(s),
            None => PathBuf::from("."),
        },
    };
    fs::create_dir_all(&out)?;
    Ok(out)
}

fn write_artifact(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn cmd_walk(args: WalkArgs) -> Result<()> {
    let mut resolver = Resolver::new(&args.common.config)?;
    let steps: usize = resolver.resolve(&args.steps, "steps", DEFAULT_STEPS)?;
    let shots: usize = resolver.resolve(&args.shots, "shots", DEFAULT_SHOTS)?;
    let seed = resolver.resolve_seed(&args.common.seed)?;
    let out = ensure_out_dir(&resolver, &args.common.out)?;

    let topology = match &args.topology {
        Some(path) => {
            resolver.echo_path("topology", path);
            Topology::from_file(path)?
        }
        None => default_topology(),
    };
    let circuit = build_walk_circuit(&topology, steps)?;
    let state = circuit.run()?;

    let marginals = node_marginals(&state);
    let mut body = String::from("node,probability\n");
    for (node, p) in marginals.iter().enumerate() {
        body.push_str(&format!("{node},{p}\n"));
    }
    write_artifact(&out, "marginals.csv", &body)?;

    let mut rng = seeded_rng(seed);
    let bins = outcome_distribution(&state, shots, &mut rng)?;
    let mut body = String::from("index,frequency,prime\n");
    for b in &bins {
        body.push_str(&format!("{},{},{}\n", b.index, b.frequency, b.prime));
    }
    write_artifact(&out, "histogram.csv", &body)?;

    println!(
        "walk: {} nodes, {} edges, marked {}, {} steps, {} gates, seed {}",
        topology.n_nodes(),
        topology.edges().len(),
        topology.marked(),
        steps,
        circuit.len(),
        seed
    );
    Ok(())
}

fn load_row_features(
    dataset: &Path,
    row: usize,
) -> Result<(
    Vec<crate::dataset::TrafficRow>,
    Vec<crate::encoding::FeatureVector>,
)> {
    let loaded = load_dataset(dataset)?;
    if loaded.packet_sum_warnings > 0 {
        eprintln!(
            "warning: {} rows have tot_pkts != src_pkts + dst_pkts",
            loaded.packet_sum_warnings
        );
    }
    if row >= loaded.rows.len() {
        return Err(Error::usage(format!(
            "row {row} out of range, dataset has {} rows",
            loaded.rows.len()
        )));
    }
    let stats = column_stats(&loaded.rows)?;
    let features = loaded
        .rows
        .iter()
        .map(|r| normalize_row(r, &stats))
        .collect();
    Ok((loaded.rows, features))
}

fn cmd_encode(args: EncodeArgs) -> Result<()> {
    let mut resolver = Resolver::new(&args.common.config)?;
    let row: usize = resolver.resolve(&args.row, "row", 0)?;
    let theta_max: f64 = resolver.resolve(&args.theta_max, "theta-max", DEFAULT_THETA_MAX)?;
    let out = ensure_out_dir(&resolver, &args.common.out)?;
    resolver.echo_path("dataset", &args.dataset);

    let (_, features) = load_row_features(&args.dataset, row)?;
    let state = encode_features(&features[row], theta_max)?;

    write_artifact(&out, "amplitudes.csv", &amplitude_csv(&state))?;
    write_artifact(&out, "amplitudes.txt", &amplitude_listing(&state))?;
    println!(
        "encode: row {row}, theta_max {theta_max}, {} amplitudes",
        state.amplitudes().len()
    );
    Ok(())
}

/// QKD knobs shared by `qkd` and `pipeline`.
struct QkdRun {
    config: SeriesConfig,
    format: ReportFormat,
    seed: u64,
}

fn resolve_qkd(resolver: &mut Resolver, args: &QkdArgs) -> Result<QkdRun> {
    let sessions: usize = resolver.resolve(&args.sessions, "sessions", DEFAULT_SESSIONS)?;
    let raw_bits: usize = resolver.resolve(&args.raw_bits, "raw-bits", DEFAULT_RAW_BITS)?;
    let threshold: f64 = resolver.resolve(&args.threshold, "threshold", DEFAULT_QBER_THRESHOLD)?;
    let sample_fraction: f64 = resolver.resolve(
        &args.sample_fraction,
        "sample-fraction",
        DEFAULT_SAMPLE_FRACTION,
    )?;
    let eve_prob: f64 = resolver.resolve(&args.eve_prob, "eve-prob", DEFAULT_EVE_PROB)?;
    let eve_spec: EveSpec = resolver.resolve(&args.eve, "eve", EveSpec::Off)?;
    let format: ReportFormat = resolver.resolve(&args.format, "format", ReportFormat::Json)?;
    let seed = resolver.resolve_seed(&args.common.seed)?;
    let (eve_schedule, eve_policy) = eve_spec.into_parts(eve_prob)?;
    Ok(QkdRun {
        config: SeriesConfig {
            sessions,
            raw_bits,
            threshold,
            sample_fraction,
            eve_policy,
            eve_schedule,
        },
        format,
        seed,
    })
}

fn summarize_sessions(results: &[QkdSessionResult]) -> String {
    let flagged = results.iter().filter(|r| r.flagged).count();
    let mean_qber = results.iter().map(|r| r.qber).sum::<f64>() / results.len() as f64;
    format!(
        "sessions {}, flagged {}, mean qber {:.4}",
        results.len(),
        flagged,
        mean_qber
    )
}

fn cmd_qkd(args: QkdArgs) -> Result<()> {
    let mut resolver = Resolver::new(&args.common.config)?;
    let run = resolve_qkd(&mut resolver, &args)?;
    let out = ensure_out_dir(&resolver, &args.common.out)?;

    let results = run_sessions(&run.config, run.seed)?;
    let series = qber_series(&results);
    write_artifact(
        &out,
        "qber_series.csv",
        &analytics::qber_series_csv(&series),
    )?;

    let report = Report {
        meta: ReportMeta {
            seed: run.seed,
            config: resolver.echo.clone(),
        },
        qber_series: series,
        correlation: CorrelationMatrix::default(),
        key_match_rate: key_match_rate(&results)?,
        outcomes: Vec::new(),
    };
    let path = out.join(run.format.file_name());
    export_report(&report, run.format, &path)?;
    println!("wrote {}", path.display());
    println!(
        "{}, key match rate {:.4}, seed {}",
        summarize_sessions(&results),
        report.key_match_rate,
        run.seed
    );
    Ok(())
}

/// Key material selected for encryption: the first clean session's key.
fn select_key_session(results: &[QkdSessionResult]) -> Result<usize> {
    results
        .iter()
        .position(|r| !r.flagged && r.converged && !r.alice_key.is_empty())
        .ok_or_else(|| {
            Error::config(
                "no unflagged converged session left a key; add sessions or relax the eve schedule"
                    .to_string(),
            )
        })
}

/// Eve's best per-bit guess at the agreed key: her measured bit where she
/// intercepted that qubit, a coin flip elsewhere.
fn eve_key_guess(result: &QkdSessionResult, rng: &mut impl Rng) -> Vec<bool> {
    result
        .key_indices
        .iter()
        .map(|&raw| result.eve.bits[raw].unwrap_or_else(|| rng.random()))
        .collect()
}

fn feature_csv_row(label: &str, values: &[f64]) -> String {
    let mut row = String::from(label);
    for v in values {
        row.push_str(&format!(",{v}"));
    }
    row.push('\n');
    row
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let mut resolver = Resolver::new(&args.qkd.common.config)?;
    let row: usize = resolver.resolve(&args.row, "row", 0)?;
    let theta_max: f64 = resolver.resolve(&args.theta_max, "theta-max", DEFAULT_THETA_MAX)?;
    let shots: usize = resolver.resolve(&args.shots, "shots", DEFAULT_SHOTS)?;
    let run = resolve_qkd(&mut resolver, &args.qkd)?;
    let out = ensure_out_dir(&resolver, &args.qkd.common.out)?;
    resolver.echo_path("dataset", &args.dataset);

    let (_, features) = load_row_features(&args.dataset, row)?;

    // Encode the selected row and histogram its measurement outcomes.
    let state = encode_features(&features[row], theta_max)?;
    write_artifact(&out, "amplitudes.csv", &amplitude_csv(&state))?;
    write_artifact(&out, "amplitudes.txt", &amplitude_listing(&state))?;
    let mut outcome_rng = seeded_rng(derive_seed(run.seed, OUTCOME_STREAM));
    let outcomes = outcome_distribution(&state, shots, &mut outcome_rng)?;

    // Exchange keys.
    let results = run_sessions(&run.config, run.seed)?;
    let series = qber_series(&results);
    write_artifact(
        &out,
        "qber_series.csv",
        &analytics::qber_series_csv(&series),
    )?;

    // Encrypt with the first clean session's key, cyclically expanded to
    // the feature width.
    let key_session = select_key_session(&results)?;
    let session = &results[key_session];
    let key = expand_key(&Key::new(session.alice_key.clone())?, FEATURE_COUNT)?;
    let encrypted = cipher::transform(&features[row], &key)?;
    let decrypted = cipher::transform(&encrypted, &key)?;

    let mut fill_rng = seeded_rng(derive_seed(run.seed, EVE_FILL_STREAM));
    let eve_key = expand_key(
        &Key::new(eve_key_guess(session, &mut fill_rng))?,
        FEATURE_COUNT,
    )?;
    let eve_view = cipher::eve_reconstruct(&encrypted, &eve_key)?;

    let mut body = String::from("label");
    for name in FEATURE_NAMES {
        body.push_str(&format!(",{name}"));
    }
    body.push('\n');
    body.push_str(&feature_csv_row("original", features[row].values()));
    body.push_str(&feature_csv_row("encrypted", encrypted.values()));
    body.push_str(&feature_csv_row("decrypted", decrypted.values()));
    body.push_str(&feature_csv_row("eve", eve_view.values()));
    write_artifact(&out, "cipher.csv", &body)?;

    // Correlate original/processed feature columns over the whole dataset.
    let correlation = if features.len() >= 2 {
        let mut labels = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        type Variant<'a> = Box<
            dyn Fn(&crate::encoding::FeatureVector) -> Result<crate::encoding::FeatureVector> + 'a,
        >;
        let variants: [(&str, Variant); 4] = [
            ("original", Box::new(|fv| Ok(*fv))),
            ("encrypted", Box::new(|fv| cipher::transform(fv, &key))),
            (
                "decrypted",
                Box::new(|fv| {
                    let enc = cipher::transform(fv, &key)?;
                    cipher::transform(&enc, &key)
                }),
            ),
            (
                "eve",
                Box::new(|fv| {
                    let enc = cipher::transform(fv, &key)?;
                    cipher::eve_reconstruct(&enc, &eve_key)
                }),
            ),
        ];
        for (variant, map) in &variants {
            let rows = features
                .iter()
                .map(map)
                .collect::<Result<Vec<crate::encoding::FeatureVector>>>()?;
            for (f, name) in FEATURE_NAMES.iter().enumerate() {
                labels.push(format!("{name}_{variant}"));
                columns.push(rows.iter().map(|fv| fv.values()[f]).collect());
            }
        }
        correlation_matrix(&labels, &columns)?
    } else {
        eprintln!("warning: dataset has fewer than 2 rows, skipping correlation");
        CorrelationMatrix::default()
    };
    write_artifact(
        &out,
        "correlation.csv",
        &analytics::correlation_csv(&correlation),
    )?;

    let report = Report {
        meta: ReportMeta {
            seed: run.seed,
            config: resolver.echo.clone(),
        },
        qber_series: series,
        correlation,
        key_match_rate: key_match_rate(&results)?,
        outcomes,
    };
    let path = out.join(run.format.file_name());
    export_report(&report, run.format, &path)?;
    println!("wrote {}", path.display());
    println!(
        "{}, key session {}, key {}, key match rate {:.4}, seed {}",
        summarize_sessions(&results),
        key_session,
        key,
        report.key_match_rate,
        run.seed
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut resolver = Resolver::new(&None)?;
    let format: ReportFormat = resolver.resolve(&args.format, "format", ReportFormat::Json)?;
    let out = ensure_out_dir(&resolver, &args.out)?;
    let source = ReportFormat::from_path(&args.input)?;
    let report = import_report(&args.input, source)?;
    let path = out.join(format.file_name());
    export_report(&report, format, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
