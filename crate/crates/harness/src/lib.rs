//! Experiment runner over `ratlab-core`.
//!
//! Each command resolves a [`Settings`] (config file first, flags on top),
//! computes its report, writes every output atomically into the output
//! directory, and finishes with a `manifest.json` listing SHA-256 digests of
//! the outputs. Identical settings produce byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ratlab_core::diagonal::{
    antidiagonal_family_digits, verify_replay, AntidiagonalRule, Fate, Partner, PermuteMode,
    RowFamily, TableSpec, TieBreak,
};
use ratlab_core::enumerate::{parse_enumeration, unit_interval_adapter};
use ratlab_core::exact::{fmt_ratio, parse_ratio};
use ratlab_core::nesting::{condition_report, Termination, DEFAULT_DENOMINATOR_BOUND};
use ratlab_core::{
    antidiagonal, build_table, check_defining_index, check_exclusion, count_avoiding_periods,
    diagonal, displacement_track, epilog_scan, is_n_modular, modular_family, permute_dmodular,
    run_nesting, ExactRational, Interval, OpenInterval, SharedEnum,
};

/// Largest table window any command will materialize.
pub const MAX_WINDOW: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Invariant(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl From<ratlab_core::Error> for RunError {
    fn from(e: ratlab_core::Error) -> Self {
        match e {
            ratlab_core::Error::ReplayMismatch(_) => RunError::Invariant(e.to_string()),
            other => RunError::Usage(other.to_string()),
        }
    }
}

type Result<T, E = RunError> = std::result::Result<T, E>;

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every tunable, all optional so a config file and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Enumeration spec, e.g. `calkin-wilf` or `zigzag | window=0,1`.
    #[arg(long = "enum", global = true)]
    #[serde(rename = "enum")]
    pub enumeration: Option<String>,
    /// Open interval `lo,hi` as fractions.
    #[arg(long, global = true)]
    pub interval: Option<String>,
    /// Highest enumeration position a nest may examine.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Table window N.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Prefix length for the epilog scan.
    #[arg(long, global = true)]
    pub prefix: Option<usize>,
    /// `strict-window` or `synthesis`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// `first` or `seeded`.
    #[arg(long, global = true)]
    pub tie: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Generator families for even rows: `sqrt`, `champernowne`, `seeded[:S]`.
    #[arg(long, global = true)]
    pub rows: Option<String>,
    /// Displacement target fraction.
    #[arg(long, global = true)]
    pub target: Option<String>,
    /// Comma-separated windows for displacement.
    #[arg(long, global = true)]
    pub windows: Option<String>,
    /// Enumeration position the displacement target is moved to first.
    #[arg(long, global = true)]
    pub placement: Option<usize>,
    /// Period length L for counting.
    #[arg(long, global = true)]
    pub length: Option<u32>,
    /// Number of family members.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Digit prefix for a modular family, e.g. `3` or `0000000000`.
    #[arg(long, global = true)]
    pub digits: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
}

macro_rules! pick {
    ($self:ident, $top:ident, $($field:ident),*) => {
        Settings { $($field: $top.$field.or($self.$field),)* }
    };
}

impl Settings {
    /// `top` wins wherever it sets a field.
    pub fn overlay(self, top: Settings) -> Settings {
        pick!(self, top, enumeration, interval, budget, window, prefix, mode, tie, seed, rows,
            target, windows, placement, length, count, digits, out, format)
    }

    pub fn with_defaults(self) -> Settings {
        self.overlay_under(Settings {
            enumeration: Some("calkin-wilf".into()),
            interval: Some("0,1".into()),
            budget: Some(10_000),
            window: Some(1000),
            prefix: Some(100),
            mode: Some("synthesis".into()),
            tie: Some("first".into()),
            seed: Some(0),
            rows: Some("champernowne,seeded".into()),
            target: Some("7/33".into()),
            windows: Some("100,1000".into()),
            placement: Some(1),
            length: Some(10),
            count: Some(10),
            digits: None,
            out: Some(PathBuf::from("ratlab-out")),
            format: Some(Format::Json),
        })
    }

    fn overlay_under(self, base: Settings) -> Settings {
        base.overlay(self)
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    fn enumeration(&self) -> Result<SharedEnum> {
        Ok(parse_enumeration(self.enumeration.as_deref().unwrap_or_default())?)
    }

    fn interval(&self) -> Result<Interval> {
        Ok(OpenInterval::parse(self.interval.as_deref().unwrap_or_default())?)
    }

    fn positive(value: Option<usize>, name: &str) -> Result<usize> {
        match value {
            Some(v) if v > 0 => Ok(v),
            _ => Err(usage(format!("--{name} must be positive"))),
        }
    }

    fn window(&self) -> Result<usize> {
        let n = Self::positive(self.window, "window")?;
        if n > MAX_WINDOW {
            return Err(usage(format!("window {n} exceeds the supported maximum {MAX_WINDOW}")));
        }
        Ok(n)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or_default()
    }

    fn table_spec(&self) -> Result<TableSpec<BigInt>> {
        let rows = self.rows.as_deref().unwrap_or_default();
        let families = rows
            .split(',')
            .map(|f| match f.trim() {
                "seeded" => Ok(RowFamily::Seeded { seed: self.seed() }),
                other => RowFamily::parse(other),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let g = unit_interval_adapter(self.enumeration()?, OpenInterval::unit());
        Ok(TableSpec::new(g, families)?)
    }

    fn mode(&self) -> Result<PermuteMode> {
        Ok(self.mode.as_deref().unwrap_or_default().parse()?)
    }

    fn tie(&self) -> Result<TieBreak> {
        match self.tie.as_deref().unwrap_or_default() {
            "first" => Ok(TieBreak::First),
            "seeded" => Ok(TieBreak::Seeded { seed: self.seed() }),
            other => Err(usage(format!("unknown tie-break {other:?}"))),
        }
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Nested-interval refinement with condition reports.
    Nest,
    /// Running-minimum scan of a prefix.
    Epilog,
    /// Table window with its diagonal and antidiagonal.
    Diagonal,
    /// Single modular permutation pass with replay check.
    Permute,
    /// Antidiagonal family, plus a modular family when `--digits` is given.
    Family,
    /// Count of period blocks avoiding `1234567890…`.
    CountPeriods,
    /// Where a target row ends after synthesis passes.
    Displace,
}

#[derive(Debug, Parser)]
#[command(name = "ratlab", version, about = "Exact rational enumeration and digit-table experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON settings file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

/// One file to write, relative to the output directory.
#[derive(Debug, Clone)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub outputs: Vec<Output>,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Command,
    pub config: Settings,
    pub version: &'static str,
    pub wall_time_ms: u128,
    pub outputs: Vec<OutputDigest>,
}

fn json<T: Serialize>(name: &str, value: &T) -> Output {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    Output { name: name.into(), bytes }
}

fn csv_output<R: Serialize>(name: &str, records: impl IntoIterator<Item = R>) -> Result<Output> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| RunError::Invariant(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::Invariant(format!("csv: {e}")))?;
    Ok(Output { name: name.into(), bytes })
}

fn text(name: &str, body: String) -> Output {
    Output { name: name.into(), bytes: body.into_bytes() }
}

fn digit_string(ds: &[u8]) -> String {
    ds.iter().map(|d| char::from(b'0' + d)).collect()
}

/// Chooses between the JSON and CSV renderings of a report.
fn pick(format: Format, json: Output, csv: Output) -> Output {
    match format {
        Format::Json => json,
        Format::Csv => csv,
    }
}

#[derive(Serialize)]
struct StepRow {
    step: usize,
    a: String,
    b: String,
    idx_a: usize,
    idx_b: usize,
    width: String,
}

pub fn cmd_nest(s: &Settings) -> Result<Report> {
    let e = s.enumeration()?;
    let base = s.interval()?;
    let budget = Settings::positive(s.budget, "budget")?;
    let trace = run_nesting(&*e, &base, budget);
    let index = check_defining_index(&trace);
    let exclusion = check_exclusion(&trace, &*e, budget);
    if !index.is_empty() || !exclusion.is_empty() {
        return Err(RunError::Invariant(format!(
            "{} defining-index and {} exclusion violations",
            index.len(),
            exclusion.len()
        )));
    }
    let conditions = condition_report(&trace, &*e, DEFAULT_DENOMINATOR_BOUND);
    let steps = trace.steps.iter().enumerate().map(|(k, st)| StepRow {
        step: k + 1,
        a: fmt_ratio(&st.a),
        b: fmt_ratio(&st.b),
        idx_a: st.idx_a,
        idx_b: st.idx_b,
        width: fmt_ratio(&st.width),
    });
    let ending = match &trace.termination {
        Termination::BudgetExhausted => "budget exhausted".to_string(),
        Termination::FiniteSequenceExhausted { eta, .. } => format!("finite sequence exhausted, eta = {eta}"),
    };
    let summary = format!(
        "{} steps over {} positions; {ending}; last interval {}",
        trace.steps.len(),
        trace.scan_budget_used,
        trace.last_interval()
    );
    Ok(Report {
        outputs: vec![json("trace.json", &trace), json("conditions.json", &conditions), csv_output("steps.csv", steps)?],
        summary,
    })
}

#[derive(Serialize)]
struct UpdateRow {
    index: usize,
    value: String,
}

pub fn cmd_epilog(s: &Settings) -> Result<Report> {
    let e = s.enumeration()?;
    let base = s.interval()?;
    let n = s.prefix.ok_or_else(|| usage("--prefix is required"))?;
    let report = epilog_scan(&*e, &base, n);
    let brute = (1..=n)
        .map_while(|i| e.nth(i))
        .filter(|q| base.contains(q))
        .chain(std::iter::once(base.hi().clone()))
        .min()
        .expect("non-empty");
    if brute != report.x {
        return Err(RunError::Invariant(format!("scan gave {}, brute force {brute}", report.x)));
    }
    let updates = report.updates.iter().map(|u| UpdateRow { index: u.index, value: fmt_ratio(&u.value) });
    let out = pick(s.format(), json("epilog.json", &report), csv_output("updates.csv", updates)?);
    let summary = format!("x = {}, eta = {} after {} positions", report.x, report.eta, report.scanned);
    Ok(Report { outputs: vec![out], summary })
}

#[derive(Serialize)]
struct DiagonalReport {
    window: usize,
    rows: String,
    diagonal: String,
    antidiagonal: String,
}

#[derive(Serialize)]
struct DiagonalRow {
    k: usize,
    diagonal: u8,
    antidiagonal: u8,
}

pub fn cmd_diagonal(s: &Settings) -> Result<Report> {
    let n = s.window()?;
    let table = build_table(&s.table_spec()?, n)?;
    let diag = diagonal(&table, n)?;
    let anti = antidiagonal(&table, n, &AntidiagonalRule::default())?;
    if let Some(k) = (1..=n).find(|&k| anti[k - 1] == table.digit(k, k)) {
        return Err(RunError::Invariant(format!("antidiagonal matches row {k}")));
    }
    let report = DiagonalReport {
        window: n,
        rows: s.rows.clone().unwrap_or_default(),
        diagonal: digit_string(&diag),
        antidiagonal: digit_string(&anti),
    };
    let rows = (1..=n).map(|k| DiagonalRow { k, diagonal: diag[k - 1], antidiagonal: anti[k - 1] });
    let out = pick(s.format(), json("diagonal.json", &report), csv_output("diagonal.csv", rows)?);
    let shown = &report.diagonal[..n.min(40)];
    Ok(Report { outputs: vec![out, text("window.txt", table.dump())], summary: format!("diagonal {shown}…") })
}

#[derive(Serialize)]
struct ModularRow {
    position: usize,
    modular: bool,
    kind: &'static str,
}

pub fn cmd_permute(s: &Settings) -> Result<Report> {
    let n = s.window()?;
    let table = build_table(&s.table_spec()?, n)?;
    let (out, trace) = permute_dmodular(&table, n, s.mode()?, s.tie()?)?;
    verify_replay(&table, &trace, &out)?;
    if trace.swaps.iter().any(|sw| matches!(sw.partner, Partner::Position { j } if j <= sw.i)) {
        return Err(RunError::Invariant("swap partner not after its scan index".into()));
    }
    let rows: Vec<ModularRow> = (1..=n)
        .map(|i| ModularRow {
            position: i,
            modular: is_n_modular(&out.row(i).stream, i),
            kind: out.row(i).stream.kind().label(),
        })
        .collect();
    let modular = rows.iter().filter(|r| r.modular).count();
    let summary = format!(
        "{} swaps, {} failures, {} escaped; {modular}/{n} rows modular",
        trace.swaps.len(),
        trace.failures.len(),
        trace.escaped.len()
    );
    let primary = pick(s.format(), json("permutation.json", &trace), csv_output("modular.csv", rows)?);
    Ok(Report { outputs: vec![primary, text("window.txt", out.dump())], summary })
}

#[derive(Serialize)]
struct FamilyRow {
    family: &'static str,
    n: usize,
    expansion: String,
    value: String,
}

pub fn cmd_family(s: &Settings) -> Result<Report> {
    let count = Settings::positive(s.count, "count")?;
    let mut rows = Vec::new();
    for n in 1..=count {
        let digits = antidiagonal_family_digits(n)?;
        let value: ExactRational = digits.value()?;
        rows.push(FamilyRow { family: "antidiagonal", n, expansion: digits.to_string(), value: fmt_ratio(&value) });
    }
    if let Some(prefix) = &s.digits {
        let ds = prefix
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| usage(format!("--digits {prefix:?} is not a digit string")))?;
        let members: Vec<ExactRational> = modular_family(&ds, count)?;
        for (k, v) in members.iter().enumerate() {
            let expansion = ratlab_core::to_digit_stream(v)?.to_string();
            rows.push(FamilyRow { family: "modular", n: k + 1, expansion, value: fmt_ratio(v) });
        }
    }
    let summary = format!("{} family members", rows.len());
    let out = pick(s.format(), json("family.json", &rows), csv_output("family.csv", &rows)?);
    Ok(Report { outputs: vec![out], summary })
}

#[derive(Serialize)]
struct CountReport {
    length: u32,
    count: u64,
}

pub fn cmd_count(s: &Settings) -> Result<Report> {
    let length = s.length.ok_or_else(|| usage("--length is required"))?;
    let count = count_avoiding_periods(length)?;
    let report = CountReport { length, count };
    let out = pick(s.format(), json("count.json", &report), csv_output("count.csv", [&report])?);
    Ok(Report { outputs: vec![out], summary: count.to_string() })
}

#[derive(Serialize)]
struct DisplaceRow {
    window: usize,
    initial_position: Option<usize>,
    status: &'static str,
    position: Option<usize>,
    moves: usize,
}

pub fn cmd_displace(s: &Settings) -> Result<Report> {
    let target: ExactRational = parse_ratio(s.target.as_deref().unwrap_or_default())?;
    let windows = s
        .windows
        .as_deref()
        .unwrap_or_default()
        .split(',')
        .map(|w| w.trim().parse::<usize>().map_err(|_| usage(format!("bad window {w:?}"))))
        .collect::<Result<Vec<_>>>()?;
    for &w in &windows {
        Settings { window: Some(w), ..Settings::default() }.window()?;
    }
    let report = displacement_track(&target, &s.table_spec()?, &windows, s.placement)?;
    let rows: Vec<DisplaceRow> = report
        .iter()
        .map(|d| {
            let (status, position) = match d.fate {
                Fate::Final { position } => ("final", Some(position)),
                Fate::Escaped { at } => ("escaped", Some(at)),
                Fate::AbsentFromWindow => ("absent-from-window", None),
            };
            DisplaceRow { window: d.window, initial_position: d.initial_position, status, position, moves: d.moves }
        })
        .collect();
    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(summary, "N={} {}", r.window, r.status);
    }
    let out = pick(s.format(), json("displacement.json", &report), csv_output("displacement.csv", &rows)?);
    Ok(Report { outputs: vec![out], summary: summary.trim_end().to_string() })
}

pub fn dispatch(command: Command, s: &Settings) -> Result<Report> {
    match command {
        Command::Nest => cmd_nest(s),
        Command::Epilog => cmd_epilog(s),
        Command::Diagonal => cmd_diagonal(s),
        Command::Permute => cmd_permute(s),
        Command::Family => cmd_family(s),
        Command::CountPeriods => cmd_count(s),
        Command::Displace => cmd_displace(s),
    }
}

/// Writes to a sibling temporary file, then renames over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Resolves settings, runs the command, writes outputs and the manifest.
pub fn run(cli: &Cli) -> Result<(Report, RunManifest)> {
    let file = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let settings = file.overlay(cli.settings.clone()).with_defaults();
    let start = Instant::now();
    let report = dispatch(cli.command, &settings)?;
    let dir = settings.out.clone().unwrap_or_default();
    fs::create_dir_all(&dir)?;
    let mut digests = Vec::with_capacity(report.outputs.len());
    for o in &report.outputs {
        write_atomic(&dir.join(&o.name), &o.bytes)?;
        digests.push(OutputDigest { file: o.name.clone(), sha256: sha256_hex(&o.bytes) });
    }
    digests.sort_by(|a, b| a.file.cmp(&b.file));
    let manifest = RunManifest {
        command: cli.command,
        config: settings,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: start.elapsed().as_millis(),
        outputs: digests,
    };
    let m = json("manifest.json", &manifest);
    write_atomic(&dir.join(&m.name), &m.bytes)?;
    Ok((report, manifest))
}
