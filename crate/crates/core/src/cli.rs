//! Command-line front end: system files, the four analyses, CSV emission and
//! run manifests.
//!
//! System files are JSON. Matrices are lists of rows, each entry a `[re, im]` pair:
//!
//! ```json
//! {
//!   "n": 2,
//!   "drift": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
//!   "controls": [[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]],
//!   "kind": "auto"
//! }
//! ```
//!
//! `kind` is one of `auto`, `so`, `sp`, `su_pq(p,q)` or `su` and may be omitted.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::QslError;
use crate::grape::{estimate_qsl, uniform_grid, GrapeConfig, QslEstimate};
use crate::lie::{
    classify_control_group, is_controllable, orthogonal_complement, project_drift, ControlSystem, GroupKind,
    DEFAULT_RANK_TOL,
};
use crate::matrix::{frobenius, hermitian_defect, LieBasis, Mat, C64};
use crate::speed_limit::{qsl_bound, BoundReport};
use crate::tightness::{classify_tightness, TightnessVerdict, DEGENERACY_TOL};

/// Hermiticity defect above which loading warns before symmetrising.
pub const SYMMETRIZE_WARN_TOL: f64 = 1e-8;

/// Attached to every estimate manifest.
pub const GRID_CAVEAT: &str = "Minimal times are only resolved on the discrete time grid: there may be a fast \
solution at a specific low T that we don't see.";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("no tabulated diameter for {0}; supply kind or use grape estimate")]
    Unclassifiable(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Analysis(#[from] QslError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Unclassifiable(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Analysis(_) => 1,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

/// Exit code for a negative controllability verdict.
pub const EXIT_NOT_CONTROLLABLE: u8 = 3;

/// Declared control group of a system file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KindSpec {
    #[default]
    Auto,
    So,
    Sp,
    SuPq(usize, usize),
    Su,
}

impl FromStr for KindSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        match t.as_str() {
            "auto" => return Ok(KindSpec::Auto),
            "so" => return Ok(KindSpec::So),
            "sp" => return Ok(KindSpec::Sp),
            "su" => return Ok(KindSpec::Su),
            _ => {}
        }
        let args = t
            .strip_prefix("su_pq(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("unknown kind '{s}'; expected auto, so, sp, su_pq(p,q) or su"))?;
        let (p, q) = args.split_once(',').ok_or_else(|| format!("kind '{s}' needs two parameters"))?;
        let parse = |v: &str| v.parse::<usize>().map_err(|_| format!("bad parameter '{v}' in kind '{s}'"));
        Ok(KindSpec::SuPq(parse(p)?, parse(q)?))
    }
}

impl fmt::Display for KindSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KindSpec::Auto => f.write_str("auto"),
            KindSpec::So => f.write_str("so"),
            KindSpec::Sp => f.write_str("sp"),
            KindSpec::SuPq(p, q) => write!(f, "su_pq({p},{q})"),
            KindSpec::Su => f.write_str("su"),
        }
    }
}

impl Serialize for KindSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KindSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl KindSpec {
    /// Concrete group for a Hilbert-space dimension; `None` for `auto`.
    pub fn resolve(self, n: usize) -> Result<Option<GroupKind>, CliError> {
        let kind = match self {
            KindSpec::Auto => return Ok(None),
            KindSpec::So => GroupKind::So(n),
            KindSpec::Sp if n % 2 == 0 => GroupKind::Sp(n / 2),
            KindSpec::Sp => return Err(CliError::Parse(format!("kind sp needs even n, got {n}"))),
            KindSpec::SuPq(p, q) => GroupKind::SuPq(p, q),
            KindSpec::Su => GroupKind::FullSu(n),
        };
        kind.validate_for(n).map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(Some(kind))
    }
}

type RawMatrix = Vec<Vec<[f64; 2]>>;

/// On-disk form of a control system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpecFile {
    pub n: usize,
    pub drift: RawMatrix,
    pub controls: Vec<RawMatrix>,
    #[serde(default)]
    pub kind: KindSpec,
}

/// A validated system file: square, Hermitian matrices of a common size.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub n: usize,
    pub drift: Mat,
    pub controls: Vec<Mat>,
    pub kind: KindSpec,
}

fn decode(raw: &RawMatrix, n: usize, field: &str) -> Result<Mat, CliError> {
    if raw.len() != n {
        return Err(CliError::Parse(format!("{field}: {} rows, expected {n}", raw.len())));
    }
    for (r, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Parse(format!("{field}: row {r} has {} entries, expected {n}", row.len())));
        }
        if row.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::Parse(format!("{field}: row {r} has a non-finite entry")));
        }
    }
    let m = Mat::from_fn(n, n, |r, c| C64::new(raw[r][c][0], raw[r][c][1]));
    let defect = hermitian_defect(&m);
    if defect == 0.0 {
        return Ok(m);
    }
    if defect > SYMMETRIZE_WARN_TOL {
        log::warn!("{field}: not Hermitian (defect {defect:.3e}); using its Hermitian part");
    }
    Ok((&m + m.adjoint()) * C64::new(0.5, 0.0))
}

fn encode(m: &Mat) -> RawMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

impl SystemSpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("system file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<SystemSpec, CliError> {
        if self.n == 0 {
            return Err(CliError::Parse("n: must be positive".into()));
        }
        if self.controls.is_empty() {
            return Err(CliError::Parse("controls: at least one control is required".into()));
        }
        let drift = decode(&self.drift, self.n, "drift")?;
        let controls = self
            .controls
            .iter()
            .enumerate()
            .map(|(i, m)| decode(m, self.n, &format!("controls[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SystemSpec { n: self.n, drift, controls, kind: self.kind })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec files always serialise")
    }
}

impl SystemSpec {
    pub fn to_file(&self) -> SystemSpecFile {
        SystemSpecFile {
            n: self.n,
            drift: encode(&self.drift),
            controls: self.controls.iter().map(encode).collect(),
            kind: self.kind,
        }
    }

    pub fn system(&self) -> Result<ControlSystem, CliError> {
        Ok(ControlSystem::new(self.drift.clone(), self.controls.clone())?)
    }
}

/// Control algebra, its complement, the resolved group and the drift restricted to `p`.
pub struct Analysis {
    pub system: ControlSystem,
    pub k: LieBasis,
    pub p: LieBasis,
    pub kind: GroupKind,
    /// The system with its drift projected onto `p`.
    pub projected: ControlSystem,
}

pub fn analyze(spec: &SystemSpec, kind: KindSpec, tol: f64) -> Result<Analysis, CliError> {
    let system = spec.system()?;
    let k = system.control_algebra(tol)?;
    let p = orthogonal_complement(&k);
    let kind = match kind.resolve(spec.n)? {
        Some(declared) => {
            if declared.algebra_dim() != Some(k.len()) {
                log::warn!("declared {declared} but the controls generate a {}-dimensional algebra", k.len());
            }
            declared
        }
        None => classify_control_group(&k, tol.max(1e-9)),
    };
    let drift_p = project_drift(system.drift(), &k)?;
    let removed = frobenius(&(system.drift() - &drift_p));
    if removed > SYMMETRIZE_WARN_TOL {
        log::info!("drift component of norm {removed:.3e} lies in the control algebra and was projected out");
    }
    let projected = system.with_drift(drift_p)?;
    Ok(Analysis { system, k, p, kind, projected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSettings {
    pub kind: KindSpec,
    pub tol: f64,
    pub degeneracy_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSettings {
    pub kind: KindSpec,
    pub tol: f64,
    pub targets: usize,
    pub grid: Vec<f64>,
    pub grape: GrapeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Settings {
    Bound(BoundSettings),
    Estimate(EstimateSettings),
}

/// Everything needed to reproduce the files of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub started: String,
    pub finished: String,
    pub seed: Option<u64>,
    pub settings: Settings,
    pub system: SystemSpecFile,
    pub notes: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifests always serialise");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[derive(Debug, Parser)]
#[command(name = "qsl", version, about = "Quantum speed limits of bilinear control systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimension of the dynamical Lie algebra and the controllability verdict.
    Controllability {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        tol: f64,
    },
    /// Analytic lower bound on the time needed to reach every target.
    Bound {
        spec: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = DEGENERACY_TOL)]
        degeneracy_tol: f64,
        /// Also write bound.csv and a manifest here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Whether the analytic bound is exact.
    Tightness {
        spec: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = DEGENERACY_TOL)]
        degeneracy_tol: f64,
    },
    /// Numerical speed limit from optimised pulses on Haar-random targets.
    Estimate(EstimateArgs),
    /// Re-runs the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Overrides the kind declared in the system file.
    #[arg(long)]
    pub kind: Option<KindSpec>,
    /// Relative tolerance for Lie-algebra rank decisions.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    pub spec: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 20)]
    pub targets: usize,
    /// First grid time; defaults to one grid step.
    #[arg(long)]
    pub tmin: Option<f64>,
    /// Last grid time; defaults to 1.5 times the analytic bound.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of grid points.
    #[arg(long, default_value_t = 40)]
    pub tsteps: usize,
    #[arg(long, default_value_t = 100)]
    pub slots: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub cutoff: f64,
    /// Master seed; the QSL_SEED environment variable takes precedence.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optimise every grid point instead of stopping at the first success.
    #[arg(long)]
    pub full_grid: bool,
    /// Disable warm starts from the previous grid point.
    #[arg(long)]
    pub cold: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("QSL_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Parse(format!("QSL_SEED: '{v}' is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn load_spec(path: &Path) -> Result<(SystemSpecFile, SystemSpec), CliError> {
    let file = SystemSpecFile::load(path)?;
    let spec = file.validate()?;
    Ok((file, spec))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// Runs a parsed command line, writing human-readable output to `out`.
/// Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match cli.command {
        Command::Controllability { spec, tol } => {
            let (_, spec) = load_spec(&spec)?;
            cmd_controllability(&spec, tol, out)
        }
        Command::Bound { spec, common, degeneracy_tol, out_dir } => {
            let (file, spec) = load_spec(&spec)?;
            let settings = BoundSettings { kind: common.kind.unwrap_or(spec.kind), tol: common.tol, degeneracy_tol };
            cmd_bound(&file, &spec, &settings, out_dir.as_deref(), out)?;
            Ok(0)
        }
        Command::Tightness { spec, common, degeneracy_tol } => {
            let (_, spec) = load_spec(&spec)?;
            cmd_tightness(&spec, common.kind.unwrap_or(spec.kind), common.tol, degeneracy_tol, out)?;
            Ok(0)
        }
        Command::Estimate(args) => {
            let (file, spec) = load_spec(&args.spec)?;
            let settings = estimate_settings(&spec, &args)?;
            run_estimate(&file, &spec, settings, args.jobs, &args.out_dir, out)?;
            Ok(0)
        }
        Command::Replay { manifest, out_dir, jobs } => {
            let manifest = RunManifest::load(&manifest)?;
            let spec = manifest.system.validate()?;
            match manifest.settings {
                Settings::Bound(settings) => {
                    cmd_bound(&manifest.system, &spec, &settings, Some(&out_dir), out)?;
                }
                Settings::Estimate(mut settings) => {
                    if let Some(seed) = env_seed()? {
                        settings.grape.seed = seed;
                    }
                    run_estimate(&manifest.system, &spec, settings, jobs, &out_dir, out)?;
                }
            }
            Ok(0)
        }
    }
}

pub fn cmd_controllability(spec: &SystemSpec, tol: f64, out: &mut dyn Write) -> Result<u8, CliError> {
    let sys = spec.system()?;
    let dim = sys.dynamical_algebra(tol)?.len();
    let full = spec.n * spec.n - 1;
    let controllable = is_controllable(&sys, tol)?;
    let verdict = if controllable { "controllable" } else { "not controllable" };
    emit(out, &format!("dim {dim} of {full}: {verdict}\n"))?;
    Ok(if controllable { 0 } else { EXIT_NOT_CONTROLLABLE })
}

/// Bound plus tightness verdict for a system.
pub fn bound_report(spec: &SystemSpec, settings: &BoundSettings) -> Result<(Analysis, BoundReport), CliError> {
    let a = analyze(spec, settings.kind, settings.tol)?;
    if matches!(a.kind, GroupKind::Other | GroupKind::FullSu(_)) {
        return Err(CliError::Unclassifiable(a.kind.to_string()));
    }
    let mut report = qsl_bound(&a.projected, a.kind)?;
    report.tightness = Some(classify_tightness(&a.projected, a.kind, &a.k, &a.p, settings.degeneracy_tol)?);
    Ok((a, report))
}

fn render_verdict(v: &TightnessVerdict) -> String {
    let mut s = format!("tightness: {}\n", v.status);
    for r in &v.reasons {
        s += &format!("  - {r}\n");
    }
    s
}

fn render_bound(r: &BoundReport) -> String {
    let mut s = format!(
        "kind: {}\nn: {}\ndrift speed: {}\ndiameter: {}\nbound (theorem): {}\n",
        r.kind, r.n, r.drift_speed, r.diameter, r.bound_theorem
    );
    if let Some(p) = r.bound_published {
        s += &format!("bound (published formula): {p}\n");
        let ratio = p / r.bound_theorem;
        if (ratio - 1.0).abs() > 1e-9 {
            s += &format!("  note: published formula exceeds the theorem value by a factor {ratio:.9}\n");
        }
    }
    if let Some(b) = r.bound_single_control {
        s += &format!("bound (single control): {b}\n");
    }
    if let Some(v) = &r.tightness {
        s += &render_verdict(v);
    }
    s
}

#[derive(Serialize)]
struct BoundRow<'a> {
    kind: String,
    n: usize,
    drift_speed: f64,
    diameter: f64,
    bound_theorem: f64,
    bound_published: Option<f64>,
    bound_single_control: Option<f64>,
    tightness: Option<&'a str>,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(err) => CliError::io(path, err),
        other => CliError::Parse(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_bound_csv(dir: &Path, r: &BoundReport) -> Result<(), CliError> {
    let status = r.tightness.as_ref().map(|v| v.status.to_string());
    let row = BoundRow {
        kind: r.kind.to_string(),
        n: r.n,
        drift_speed: r.drift_speed,
        diameter: r.diameter,
        bound_theorem: r.bound_theorem,
        bound_published: r.bound_published,
        bound_single_control: r.bound_single_control,
        tightness: status.as_deref(),
    };
    write_csv(&dir.join("bound.csv"), [row])
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn cmd_bound(
    file: &SystemSpecFile,
    spec: &SystemSpec,
    settings: &BoundSettings,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<BoundReport, CliError> {
    let started = now();
    let (_, report) = bound_report(spec, settings)?;
    emit(out, &render_bound(&report))?;
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_bound_csv(dir, &report)?;
        RunManifest {
            artifact: artifact(),
            started,
            finished: now(),
            seed: None,
            settings: Settings::Bound(settings.clone()),
            system: file.clone(),
            notes: vec![],
        }
        .write(dir)?;
    }
    Ok(report)
}

pub fn cmd_tightness(
    spec: &SystemSpec,
    kind: KindSpec,
    tol: f64,
    degeneracy_tol: f64,
    out: &mut dyn Write,
) -> Result<TightnessVerdict, CliError> {
    let a = analyze(spec, kind, tol)?;
    let verdict = classify_tightness(&a.projected, a.kind, &a.k, &a.p, degeneracy_tol)?;
    let text = format!("kind: {}\ndim k = {}, dim p = {}\n{}", a.kind, a.k.len(), a.p.len(), render_verdict(&verdict));
    emit(out, &text)?;
    Ok(verdict)
}

fn artifact() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Resolves flags, environment and defaults into the settings of an estimate run.
pub fn estimate_settings(spec: &SystemSpec, args: &EstimateArgs) -> Result<EstimateSettings, CliError> {
    let kind = args.common.kind.unwrap_or(spec.kind);
    if args.targets == 0 {
        return Err(CliError::Parse("--targets must be at least 1".into()));
    }
    let tmax = match args.tmax {
        Some(t) => t,
        None => {
            let settings = BoundSettings { kind, tol: args.common.tol, degeneracy_tol: DEGENERACY_TOL };
            match bound_report(spec, &settings) {
                Ok((_, r)) => 1.5 * r.bound_theorem,
                Err(CliError::Unclassifiable(k)) => {
                    return Err(CliError::Parse(format!("no analytic bound for {k}; pass --tmax")));
                }
                Err(e) => return Err(e),
            }
        }
    };
    let tmin = args.tmin.unwrap_or(tmax / args.tsteps.max(1) as f64);
    let grid = uniform_grid(tmin, tmax, args.tsteps).map_err(|e| CliError::Parse(e.to_string()))?;
    let grape = GrapeConfig {
        slots: args.slots,
        restarts: args.restarts,
        max_iterations: args.max_iterations,
        cutoff: args.cutoff,
        warm_start: !args.cold,
        sweep_full_grid: args.full_grid,
        seed: env_seed()?.unwrap_or(args.seed),
        ..GrapeConfig::default()
    };
    grape.validate().map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(EstimateSettings { kind, tol: args.common.tol, targets: args.targets, grid, grape })
}

#[derive(Serialize)]
struct WaterfallRow {
    target_id: usize,
    #[serde(rename = "T")]
    t: f64,
    best_error: f64,
}

#[derive(Serialize)]
struct HistogramRow {
    target_id: usize,
    min_time: Option<f64>,
}

/// Writes waterfall.csv and histogram.csv for an estimate.
pub fn write_estimate_csv(dir: &Path, est: &QslEstimate) -> Result<(), CliError> {
    let waterfall = est.records.iter().flat_map(|r| {
        r.points.iter().map(move |p| WaterfallRow { target_id: r.target_id, t: p.horizon, best_error: p.best_error })
    });
    write_csv(&dir.join("waterfall.csv"), waterfall)?;
    let hist = est.records.iter().map(|r| HistogramRow { target_id: r.target_id, min_time: r.min_time });
    write_csv(&dir.join("histogram.csv"), hist)
}

/// Summary line comparing the estimate with the analytic bound.
pub fn summarize(est: &QslEstimate, bound: Option<f64>, grid: &[f64]) -> String {
    let step = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    match (est.estimate, bound) {
        (None, _) => {
            let missing = est.records.iter().filter(|r| r.min_time.is_none()).count();
            format!("qsl estimate: grid exhausted ({missing} of {} targets never converged)", est.records.len())
        }
        (Some(e), Some(b)) => {
            let flag = if e > b + step {
                "; estimate exceeds the bound by more than one grid step: bound not tight"
            } else if e < b - step {
                "; estimate below the bound by more than one grid step"
            } else {
                ""
            };
            format!("qsl estimate: {e} vs analytic bound {b} (ratio {:.4}){flag}", e / b)
        }
        (Some(e), None) => format!("qsl estimate: {e} (no analytic bound)"),
    }
}

pub fn run_estimate(
    file: &SystemSpecFile,
    spec: &SystemSpec,
    settings: EstimateSettings,
    jobs: Option<usize>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<QslEstimate, CliError> {
    let started = now();
    ensure_dir(out_dir)?;
    let sys = spec.system()?;
    let bound = match bound_report(
        spec,
        &BoundSettings { kind: settings.kind, tol: settings.tol, degeneracy_tol: DEGENERACY_TOL },
    ) {
        Ok((_, r)) => Some(r),
        Err(CliError::Unclassifiable(_)) => None,
        Err(e) => return Err(e),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Parse(format!("--jobs: {e}")))?;
    let est = pool.install(|| estimate_qsl(&sys, settings.targets, &settings.grid, &settings.grape))?;
    write_estimate_csv(out_dir, &est)?;
    if let Some(r) = &bound {
        write_bound_csv(out_dir, r)?;
    }
    let summary = summarize(&est, bound.as_ref().map(|r| r.bound_theorem), &settings.grid);
    emit(out, &(summary + "\n"))?;
    RunManifest {
        artifact: artifact(),
        started,
        finished: now(),
        seed: Some(settings.grape.seed),
        settings: Settings::Estimate(settings),
        system: file.clone(),
        notes: vec![GRID_CAVEAT.to_string()],
    }
    .write(out_dir)?;
    Ok(est)
}
