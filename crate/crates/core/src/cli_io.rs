//! Configuration parsing, run orchestration and CSV output.
//!
//! A configuration is plain text, one `key = value` per line, `#` starting a
//! comment. Each command has a fixed set of keys; unknown keys are rejected
//! and all missing required keys are reported together. Lists are
//! comma-separated.
//!
//! Every CSV starts with `#` lines echoing the command and the fully resolved
//! configuration (defaults included), followed by one header line of column
//! names. Floats are written in their shortest round-trip form, switching to
//! exponent notation outside `[1e-4, 1e16)`. Sweeps run on a worker pool but
//! rows are always sorted by the sweep variable, so output bytes depend only
//! on the configuration.
//!
//! | command | required keys | files |
//! |---|---|---|
//! | `sweep-transmission` | `m`, `p0`, `g` | `<stem>_spin1.csv`, `<stem>_spin_half.csv` |
//! | `lz-oracle` | `ratio` | `<output>` |
//! | `evolve` | `p0`, `width`, `m`, `g` | `<output>`, `<stem>_final.csv`, `<stem>_summary.csv`, snapshots |
//! | `ion-evolve` | `p0` | `<output>` |
//! | `crosscheck` | `p0` | `<output>` |
//!
//! ```
//! use maxwell_klein::cli_io::{parse_config, Command};
//!
//! let cfg = parse_config("command = evolve\np0 = 10.0\nwidth = 2.0\nm = 0.85\ng = 1.5").unwrap();
//! assert_eq!(cfg.command, Command::Evolve);
//! assert_eq!(cfg.value("points"), Some("4096"));
//! ```

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ion_emulator::{self, IonParams};
use crate::lz_analytics;
use crate::lz_oracle::{self, GapForm, SweepProblem};
use crate::spin_algebra::{Band, PhysicalParams, Spin};
use crate::wavepacket::{self, Grid1D, Observers, PacketSpec, SpinorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SweepTransmission,
    LzOracle,
    Evolve,
    IonEvolve,
    Crosscheck,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::SweepTransmission,
        Command::LzOracle,
        Command::Evolve,
        Command::IonEvolve,
        Command::Crosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SweepTransmission => "sweep-transmission",
            Command::LzOracle => "lz-oracle",
            Command::Evolve => "evolve",
            Command::IonEvolve => "ion-evolve",
            Command::Crosscheck => "crosscheck",
        }
    }

    fn schema(self) -> &'static [KeySpec] {
        match self {
            Command::SweepTransmission => SWEEP_KEYS,
            Command::LzOracle => ORACLE_KEYS,
            Command::Evolve => EVOLVE_KEYS,
            Command::IonEvolve | Command::Crosscheck => ION_KEYS,
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown command `{}` (expected one of: {})",
                    s.trim(),
                    Command::ALL.map(Command::name).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Positive,
    NonNegative,
    Real,
    /// Open interval `(0, π/2)`.
    Angle,
    Count(usize),
    PositiveList,
    Spin,
    Spinor,
    OptionalBand,
    GapForm,
    Bool,
    AutoPositive,
    AutoCount,
}

#[derive(Debug, Clone, Copy)]
struct KeySpec {
    name: &'static str,
    default: Option<&'static str>,
    kind: Kind,
}

const fn key(name: &'static str, default: Option<&'static str>, kind: Kind) -> KeySpec {
    KeySpec {
        name,
        default,
        kind,
    }
}

const SWEEP_KEYS: &[KeySpec] = &[
    key("m", None, Kind::NonNegative),
    key("p0", None, Kind::NonNegative),
    key("g", None, Kind::PositiveList),
    key("c", Some("1"), Kind::Positive),
    key("hbar", Some("1"), Kind::Positive),
    key("theta_max", Some("1.5"), Kind::Angle),
    key("theta_points", Some("181"), Kind::Count(2)),
];

const ORACLE_KEYS: &[KeySpec] = &[
    key("ratio", None, Kind::PositiveList),
    key("spin", Some("1"), Kind::Spin),
    key("initial_band", Some("plus"), Kind::OptionalBand),
    key("gap_form", Some("reduced"), Kind::GapForm),
    key("dt", Some("auto"), Kind::AutoPositive),
];

const EVOLVE_KEYS: &[KeySpec] = &[
    key("p0", None, Kind::Real),
    key("width", None, Kind::Positive),
    key("m", None, Kind::NonNegative),
    key("g", None, Kind::NonNegative),
    key("c", Some("1"), Kind::Positive),
    key("hbar", Some("1"), Kind::Positive),
    key("spin", Some("1"), Kind::Spin),
    key("spinor", Some("auto"), Kind::Spinor),
    key("project_band", Some("plus"), Kind::OptionalBand),
    key("center", Some("0"), Kind::Real),
    key("length", Some("auto"), Kind::AutoPositive),
    key("points", Some("4096"), Kind::Count(8)),
    key("t_final", Some("auto"), Kind::AutoPositive),
    key("dt", Some("auto"), Kind::AutoPositive),
    key("stride", Some("100"), Kind::Count(1)),
    key("snapshot_stride", Some("auto"), Kind::AutoCount),
    key("x_c", Some("0"), Kind::Real),
];

const ION_KEYS: &[KeySpec] = &[
    key("p0", None, Kind::Real),
    key("eta", Some("0.05"), Kind::Positive),
    key("omega1_tilde_khz", Some("10"), Kind::NonNegative),
    key("omega1_khz", Some("1"), Kind::NonNegative),
    key("omega2_tilde_khz", Some("50"), Kind::NonNegative),
    key("delta", Some("1"), Kind::Positive),
    key("n_fock", Some("256"), Kind::Count(16)),
    key("spinor", Some("1,0,0"), Kind::Spinor),
    key("project_band", Some("plus"), Kind::OptionalBand),
    key("t_final", Some("1"), Kind::Positive),
    key("records", Some("101"), Kind::Count(2)),
    key("reduce_ion2", Some("true"), Kind::Bool),
];

/// Keys accepted by every command; not echoed into output headers.
const RUNTIME_KEYS: [&str; 3] = ["command", "output", "threads"];

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|t| parse_f64(t.trim()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

fn parse_spin(s: &str) -> std::result::Result<Spin, String> {
    match s {
        "1" => Ok(Spin::One),
        "1/2" | "half" => Ok(Spin::Half),
        other => Err(format!("unknown spin `{other}` (expected 1 or 1/2)")),
    }
}

fn parse_band(s: &str) -> std::result::Result<Option<Band>, String> {
    if s == "none" {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

fn parse_auto<T>(
    s: &str,
    f: impl Fn(&str) -> std::result::Result<T, String>,
) -> std::result::Result<Option<T>, String> {
    if s == "auto" {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

fn parse_count(s: &str, min: usize) -> std::result::Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if v < min {
        return Err(format!("must be at least {min}, got {v}"));
    }
    Ok(v)
}

fn check(kind: Kind, s: &str) -> std::result::Result<(), String> {
    let sign = |v: f64, strict: bool| {
        if (strict && v > 0.0) || (!strict && v >= 0.0) {
            Ok(())
        } else if strict {
            Err(format!("must be positive, got {v}"))
        } else {
            Err(format!("must be non-negative, got {v}"))
        }
    };
    match kind {
        Kind::Positive => sign(parse_f64(s)?, true),
        Kind::NonNegative => sign(parse_f64(s)?, false),
        Kind::Real => parse_f64(s).map(drop),
        Kind::Angle => {
            let v = parse_f64(s)?;
            if v > 0.0 && v < PI / 2.0 {
                Ok(())
            } else {
                Err(format!("must lie in (0, pi/2), got {v}"))
            }
        }
        Kind::Count(min) => parse_count(s, min).map(drop),
        Kind::PositiveList => parse_list(s)?.into_iter().try_for_each(|v| sign(v, true)),
        Kind::Spin => parse_spin(s).map(drop),
        Kind::Spinor => parse_auto(s, parse_list).map(drop),
        Kind::OptionalBand => parse_band(s).map(drop),
        Kind::GapForm => match s {
            "reduced" | "literal" => Ok(()),
            other => Err(format!(
                "unknown gap form `{other}` (expected reduced or literal)"
            )),
        },
        Kind::Bool => s
            .parse::<bool>()
            .map(drop)
            .map_err(|_| format!("`{s}` is not true or false")),
        Kind::AutoPositive => parse_auto(s, |t| {
            let v = parse_f64(t)?;
            sign(v, true).map(|_| v)
        })
        .map(drop),
        Kind::AutoCount => parse_auto(s, |t| parse_count(t, 1)).map(drop),
    }
}

/// Parsed configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Primary output file; auxiliary files derive their names from its stem.
    pub output: PathBuf,
    /// Worker threads for sweeps; `0` lets the pool decide.
    pub threads: usize,
    values: BTreeMap<&'static str, String>,
}

impl RunConfig {
    /// Resolved value of `key`, defaults included.
    pub fn value(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Resolved `(key, value)` pairs in schema order.
    pub fn resolved(&self) -> Vec<(&'static str, &str)> {
        self.command
            .schema()
            .iter()
            .map(|k| (k.name, self.values[k.name].as_str()))
            .collect()
    }

    pub fn with_output(mut self, output: impl Into<PathBuf>) -> Self {
        self.output = output.into();
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    fn f64(&self, key: &str) -> f64 {
        parse_f64(&self.values[key]).expect("validated at parse time")
    }

    fn auto_f64(&self, key: &str) -> Option<f64> {
        parse_auto(&self.values[key], parse_f64).expect("validated at parse time")
    }

    fn count(&self, key: &str) -> usize {
        self.values[key].parse().expect("validated at parse time")
    }

    fn auto_count(&self, key: &str) -> Option<usize> {
        parse_auto(&self.values[key], |t| parse_count(t, 1)).expect("validated at parse time")
    }

    fn list(&self, key: &str) -> Vec<f64> {
        parse_list(&self.values[key]).expect("validated at parse time")
    }

    fn spin(&self) -> Spin {
        parse_spin(&self.values["spin"]).expect("validated at parse time")
    }

    fn band(&self, key: &str) -> Option<Band> {
        parse_band(&self.values[key]).expect("validated at parse time")
    }

    fn flag(&self, key: &str) -> bool {
        self.values[key].parse().expect("validated at parse time")
    }

    fn spinor(&self, spin: Spin) -> Result<Vec<f64>> {
        match parse_auto(&self.values["spinor"], parse_list).expect("validated at parse time") {
            None => {
                let mut v = vec![0.0; spin.dimension()];
                v[0] = 1.0;
                Ok(v)
            }
            Some(v) if v.len() == spin.dimension() => Ok(v),
            Some(v) => Err(Error::invalid(
                "spinor",
                format!(
                    "spin {spin:?} needs {} components, got {}",
                    spin.dimension(),
                    v.len()
                ),
            )),
        }
    }
}

/// Parse a configuration that names its own `command`.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = tokenize(text)?;
    let Some((_, value)) = entries.get("command") else {
        return Err(Error::MissingKeys(vec!["command".into()]));
    };
    let command: Command = value.parse()?;
    resolve(command, entries)
}

/// Parse a configuration for a command chosen elsewhere (e.g. on the command
/// line). A `command` key, if present, must agree.
pub fn parse_config_for(command: Command, text: &str) -> Result<RunConfig> {
    let entries = tokenize(text)?;
    if let Some((line, value)) = entries.get("command") {
        let named: Command = value.parse()?;
        if named != command {
            return Err(Error::ConfigParse {
                line: *line,
                key: "command".into(),
                reason: format!(
                    "file names `{}` but `{}` was requested",
                    named.name(),
                    command.name()
                ),
            });
        }
    }
    resolve(command, entries)
}

type Entries = BTreeMap<String, (usize, String)>;

fn tokenize(text: &str) -> Result<Entries> {
    let mut entries = Entries::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::ConfigParse {
                line,
                key: content.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::ConfigParse {
                line,
                key: k.to_string(),
                reason: "empty key or value".into(),
            });
        }
        if let Some((first, _)) = entries.insert(k.to_string(), (line, v.to_string())) {
            return Err(Error::ConfigParse {
                line,
                key: k.to_string(),
                reason: format!("already set on line {first}"),
            });
        }
    }
    Ok(entries)
}

fn resolve(command: Command, entries: Entries) -> Result<RunConfig> {
    let schema = command.schema();
    for (k, (line, _)) in &entries {
        if !RUNTIME_KEYS.contains(&k.as_str()) && !schema.iter().any(|s| s.name == k) {
            return Err(Error::ConfigParse {
                line: *line,
                key: k.clone(),
                reason: format!("unknown key for `{}`", command.name()),
            });
        }
    }
    for spec in schema {
        if let Some((line, value)) = entries.get(spec.name) {
            check(spec.kind, value).map_err(|reason| Error::ConfigParse {
                line: *line,
                key: spec.name.to_string(),
                reason,
            })?;
        }
    }
    let missing: Vec<String> = schema
        .iter()
        .filter(|s| s.default.is_none() && !entries.contains_key(s.name))
        .map(|s| s.name.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingKeys(missing));
    }

    let threads = match entries.get("threads") {
        Some((line, v)) => v.parse().map_err(|_| Error::ConfigParse {
            line: *line,
            key: "threads".into(),
            reason: format!("`{v}` is not a non-negative integer"),
        })?,
        None => 0,
    };
    let output = entries
        .get("output")
        .map(|(_, v)| PathBuf::from(v))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name())));
    let values = schema
        .iter()
        .map(|s| {
            let v = entries
                .get(s.name)
                .map(|(_, v)| v.clone())
                .or_else(|| s.default.map(str::to_string))
                .expect("missing keys reported above");
            (s.name, v)
        })
        .collect();
    Ok(RunConfig {
        command,
        output,
        threads,
        values,
    })
}

/// Shortest round-trip decimal form; exponent notation outside `[1e-4, 1e16)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// CSV text under construction: metadata header, column line, rows.
#[derive(Debug, Clone)]
pub struct CsvTable {
    text: String,
    columns: usize,
}

impl CsvTable {
    pub fn new(config: &RunConfig, extra_meta: &[(&str, String)], columns: &[&str]) -> Self {
        let mut text = format!(
            "# generator = maxwell-klein {}\n# command = {}\n",
            env!("CARGO_PKG_VERSION"),
            config.command.name()
        );
        for (k, v) in config.resolved() {
            let _ = writeln!(text, "# {k} = {v}");
        }
        for (k, v) in extra_meta {
            let _ = writeln!(text, "# {k} = {v}");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self {
            text,
            columns: columns.len(),
        }
    }

    pub fn row(&mut self, cells: &[f64]) {
        debug_assert_eq!(cells.len(), self.columns);
        let line: Vec<String> = cells.iter().map(|&v| format_float(v)).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    /// A row whose first cell is a label.
    pub fn labeled_row(&mut self, label: &str, cells: &[f64]) {
        debug_assert_eq!(cells.len() + 1, self.columns);
        self.text.push_str(label);
        for &v in cells {
            self.text.push(',');
            self.text.push_str(&format_float(v));
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                context: format!("creating {}", dir.display()),
                source,
            })?;
        }
        std::fs::write(path, &self.text).map_err(|source| Error::Io {
            context: format!("writing {}", path.display()),
            source,
        })
    }
}

/// `<dir>/<stem><suffix>.csv` next to `output`.
pub fn sibling_path(output: &Path, suffix: &str) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    output.with_file_name(format!("{stem}{suffix}.csv"))
}

/// Execute a configuration, returning the files written.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let tables = pool.install(|| match config.command {
        Command::SweepTransmission => sweep_transmission(config),
        Command::LzOracle => lz_oracle_table(config).map(|t| vec![(config.output.clone(), t)]),
        Command::Evolve => evolve_tables(config),
        Command::IonEvolve => ion_table(config).map(|t| vec![(config.output.clone(), t)]),
        Command::Crosscheck => crosscheck_table(config).map(|t| vec![(config.output.clone(), t)]),
    })?;
    for (path, table) in &tables {
        table.write(path)?;
    }
    Ok(tables.into_iter().map(|(p, _)| p).collect())
}

fn sweep_transmission(config: &RunConfig) -> Result<Vec<(PathBuf, CsvTable)>> {
    let slopes = config.list("g");
    let p0 = config.f64("p0");
    let base = PhysicalParams::new(
        config.f64("c"),
        config.f64("m"),
        slopes[0],
        config.f64("hbar"),
    )?;
    let thetas = lz_analytics::angle_grid(config.f64("theta_max"), config.count("theta_points"))?;
    let columns = [
        "g",
        "theta",
        "gamma_pp",
        "gamma_p0",
        "gamma_pm",
        "transmission",
    ];

    let mut out = Vec::new();
    for (spin, suffix) in [(Spin::One, "_spin1"), (Spin::Half, "_spin_half")] {
        let mut rows = slopes
            .par_iter()
            .map(|&g| {
                let rows = lz_analytics::angle_sweep(&base.with_slope(g), spin, p0, &thetas)?;
                Ok((g, rows))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut table = CsvTable::new(config, &[("spin", spin_label(spin).into())], &columns);
        for (g, sweep) in rows {
            for r in sweep {
                let p = r.probabilities;
                table.row(&[
                    g,
                    r.theta,
                    p.gamma_pp,
                    p.gamma_p0,
                    p.gamma_pm,
                    p.transmission,
                ]);
            }
        }
        out.push((sibling_path(&config.output, suffix), table));
    }
    Ok(out)
}

fn spin_label(spin: Spin) -> &'static str {
    match spin {
        Spin::One => "1",
        Spin::Half => "1/2",
    }
}

fn lz_oracle_table(config: &RunConfig) -> Result<CsvTable> {
    let spin = config.spin();
    let band = config
        .band("initial_band")
        .ok_or_else(|| Error::invalid("initial_band", "a sweep needs an initial band"))?;
    let gap_form = match config.value("gap_form") {
        Some("literal") => GapForm::Literal,
        _ => GapForm::Reduced,
    };
    let dt = config.auto_f64("dt");
    let mut rows = config
        .list("ratio")
        .par_iter()
        .map(|&ratio| {
            let problem = SweepProblem::from_ratio(spin, ratio, band)?.with_gap_form(gap_form);
            let p =
                lz_oracle::integrate_sweep(&problem, dt.unwrap_or_else(|| problem.default_dt()))?;
            let closed = closed_form(spin, ratio, band)?;
            Ok((ratio, p, closed))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut table = CsvTable::new(
        config,
        &[],
        &[
            "ratio",
            "w_plus",
            "w_zero",
            "w_minus",
            "closed_plus",
            "closed_zero",
            "closed_minus",
        ],
    );
    for (ratio, p, closed) in rows {
        let mut cells = vec![ratio];
        cells.extend(p.as_array());
        cells.extend(closed);
        table.row(&cells);
    }
    Ok(table)
}

/// Closed-form final populations from an initial band, where defined.
fn closed_form(spin: Spin, ratio: f64, band: Band) -> Result<[f64; 3]> {
    let p = match spin {
        Spin::One => lz_analytics::spin1_from_ratio(ratio)?,
        Spin::Half => lz_analytics::spin_half_from_ratio(ratio)?,
    };
    Ok(match band {
        Band::Plus => p.as_array(),
        // Reversing the sweep direction mirrors the populations.
        Band::Minus => {
            let [a, b, c] = p.as_array();
            [c, b, a]
        }
        Band::Zero => [f64::NAN; 3],
    })
}

struct ContinuumRun {
    params: PhysicalParams,
    evolution: wavepacket::Evolution,
}

fn continuum_run(
    params: PhysicalParams,
    grid: &Grid1D,
    spec: &PacketSpec,
    t_final: f64,
    dt: Option<f64>,
    observers: &Observers,
) -> Result<ContinuumRun> {
    let field = wavepacket::gaussian_packet(grid, spec, &params)?;
    let dt = dt.unwrap_or_else(|| wavepacket::default_dt(grid, &params));
    let evolution = wavepacket::evolve(field, t_final, dt, &params, observers)?;
    Ok(ContinuumRun { params, evolution })
}

fn evolve_tables(config: &RunConfig) -> Result<Vec<(PathBuf, CsvTable)>> {
    let spin = config.spin();
    let params = PhysicalParams::new(
        config.f64("c"),
        config.f64("m"),
        config.f64("g"),
        config.f64("hbar"),
    )?;
    let width = config.f64("width");
    let length = config.auto_f64("length").unwrap_or(40.0 * width);
    let grid = Grid1D::new(length, config.count("points"))?;
    let mut spec = PacketSpec::new(config.f64("p0"), width, &config.spinor(spin)?)
        .centered_at(config.f64("center"));
    spec.project_band = config.band("project_band");
    if spin == Spin::Half && spec.project_band == Some(Band::Zero) {
        return Err(Error::invalid("project_band", "spin-1/2 has no flat band"));
    }
    let t_final = config.auto_f64("t_final").unwrap_or(7.0 * width);
    let observers = Observers {
        stride: config.count("stride"),
        snapshot_stride: config.auto_count("snapshot_stride"),
    };
    let run = continuum_run(
        params,
        &grid,
        &spec,
        t_final,
        config.auto_f64("dt"),
        &observers,
    )?;
    let ev = &run.evolution;
    let meta = [
        ("steps", ev.steps.to_string()),
        ("dt", format_float(t_final / ev.steps.max(1) as f64)),
    ];

    let mut trace = CsvTable::new(
        config,
        &meta,
        &["t", "norm", "x_mean", "w_plus", "w_zero", "w_minus"],
    );
    for row in &ev.trace {
        let b = row.bands;
        trace.row(&[row.t, row.norm, row.x_mean, b.plus, b.zero, b.minus]);
    }
    let mut out = vec![(config.output.clone(), trace)];

    for (i, snap) in ev.snapshots.iter().enumerate() {
        let suffix = format!("_snapshot_{i:04}");
        out.push((
            sibling_path(&config.output, &suffix),
            snapshot_table(config, snap, &run.params),
        ));
    }
    out.push((
        sibling_path(&config.output, "_final"),
        snapshot_table(config, &ev.field, &run.params),
    ));

    let s = wavepacket::classify_scattering(&ev.field, &run.params, config.f64("x_c"));
    let mut summary = CsvTable::new(
        config,
        &meta,
        &[
            "t",
            "reflected",
            "localized",
            "transmitted",
            "residual",
            "not_separated",
        ],
    );
    summary.row(&[
        ev.field.time,
        s.reflected,
        s.localized,
        s.transmitted,
        s.residual,
        if s.not_separated { 1.0 } else { 0.0 },
    ]);
    out.push((sibling_path(&config.output, "_summary"), summary));
    Ok(out)
}

/// Position-space snapshot: amplitudes per component and band densities.
pub fn snapshot_table(
    config: &RunConfig,
    field: &SpinorField,
    params: &PhysicalParams,
) -> CsvTable {
    let mut columns = vec!["x"];
    let names = [
        "re_psi1", "im_psi1", "re_psi2", "im_psi2", "re_psi3", "im_psi3",
    ];
    columns.extend_from_slice(&names[..2 * field.components()]);
    columns.extend_from_slice(&[
        "abs2_plus_band",
        "abs2_zero_band",
        "abs2_minus_band",
        "abs2_total",
    ]);
    let mut table = CsvTable::new(config, &[("t", format_float(field.time))], &columns);
    let bands = wavepacket::band_densities(field, params);
    let total = field.density();
    let mut cells = Vec::with_capacity(columns.len());
    for (i, x) in field.grid().positions().enumerate() {
        cells.clear();
        cells.push(x);
        for s in 0..field.components() {
            let z = field.component(s)[i];
            cells.extend([z.re, z.im]);
        }
        cells.extend([bands[0][i], bands[1][i], bands[2][i], total[i]]);
        table.row(&cells);
    }
    table
}

fn ion_params(config: &RunConfig) -> Result<IonParams> {
    let two_pi = 2.0 * PI;
    let ion = IonParams {
        eta: config.f64("eta"),
        omega1_tilde: two_pi * config.f64("omega1_tilde_khz"),
        omega1: two_pi * config.f64("omega1_khz"),
        omega2_tilde: two_pi * config.f64("omega2_tilde_khz"),
        delta_spread: config.f64("delta"),
        n_fock: config.count("n_fock"),
        reduce_ion2: config.flag("reduce_ion2"),
    };
    ion.validate()?;
    Ok(ion)
}

fn ion_spinor(config: &RunConfig) -> Result<[Complex64; 3]> {
    let v = config.spinor(Spin::One)?;
    Ok([v[0].into(), v[1].into(), v[2].into()])
}

fn ion_meta(ion: &IonParams) -> Result<Vec<(&'static str, String)>> {
    let map = ion_emulator::map_parameters(ion)?;
    let p = map.physical;
    let mut meta = vec![
        ("mapped_c", format_float(p.c)),
        ("mapped_rest_energy", format_float(p.rest_energy())),
        ("mapped_g", format_float(p.g)),
        ("mapped_ratio", format_float(map.ratio)),
    ];
    if ion.outside_lamb_dicke() {
        meta.push(("warning", "eta above the Lamb-Dicke regime".into()));
    }
    Ok(meta)
}

fn ion_table(config: &RunConfig) -> Result<CsvTable> {
    let ion = ion_params(config)?;
    let state = ion_emulator::coherent_initial_state(
        &ion,
        config.f64("p0"),
        ion_spinor(config)?,
        config.band("project_band"),
    )?;
    let traj =
        ion_emulator::evolve_ion(&state, &ion, config.f64("t_final"), config.count("records"))?;
    let mut table = CsvTable::new(
        config,
        &ion_meta(&ion)?,
        &[
            "t_ms",
            "pop_a",
            "pop_b",
            "pop_c",
            "x_mean",
            "w_plus",
            "w_zero",
            "w_minus",
            "fock_tail",
        ],
    );
    for r in &traj.records {
        let [a, b, c] = r.internal;
        table.row(&[
            r.t,
            a,
            b,
            c,
            r.x_mean,
            r.bands.plus,
            r.bands.zero,
            r.bands.minus,
            r.fock_tail,
        ]);
    }
    Ok(table)
}

/// Final band populations from all four routes for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crosscheck {
    pub ratio: f64,
    pub analytic: [f64; 3],
    pub oracle: [f64; 3],
    pub wavepacket: [f64; 3],
    pub ion: [f64; 3],
}

/// Run the four routes concurrently for the ion parameters `ion`.
///
/// The continuum packet uses the mapped parameters, amplitude width `√2Δ` and
/// the ion's position grid; both dynamical runs stop at `t_final`.
pub fn crosscheck(
    ion: &IonParams,
    p0: f64,
    spinor: [Complex64; 3],
    project_band: Option<Band>,
    t_final: f64,
) -> Result<Crosscheck> {
    let map = ion_emulator::map_parameters(ion)?;
    let ratio = map.ratio;
    let closed = || -> Result<([f64; 3], [f64; 3])> {
        let analytic = lz_analytics::spin1_from_ratio(ratio)?.as_array();
        let problem = SweepProblem::from_ratio(Spin::One, ratio, Band::Plus)?;
        let oracle = lz_oracle::integrate_sweep(&problem, problem.default_dt())?.as_array();
        Ok((analytic, oracle))
    };
    let continuum = || -> Result<[f64; 3]> {
        let grid = ion_emulator::default_grid(ion)?;
        let mut spec = PacketSpec::new(p0, SQRT_2 * ion.delta_spread, &[0.0; 3]);
        spec.spinor = spinor.to_vec();
        spec.project_band = project_band;
        let observers = Observers {
            stride: usize::MAX,
            snapshot_stride: None,
        };
        let run = continuum_run(map.physical, &grid, &spec, t_final, None, &observers)?;
        Ok(run
            .evolution
            .trace
            .last()
            .expect("final row")
            .bands
            .as_array())
    };
    let ion_run = || -> Result<[f64; 3]> {
        let state = ion_emulator::coherent_initial_state(ion, p0, spinor, project_band)?;
        let traj = ion_emulator::evolve_ion(&state, ion, t_final, 2)?;
        Ok(traj.records.last().expect("final record").bands.as_array())
    };
    let ((closed, wavepacket), ion_bands) = rayon::join(|| rayon::join(closed, continuum), ion_run);
    let (analytic, oracle) = closed?;
    Ok(Crosscheck {
        ratio,
        analytic,
        oracle,
        wavepacket: wavepacket?,
        ion: ion_bands?,
    })
}

fn crosscheck_table(config: &RunConfig) -> Result<CsvTable> {
    let ion = ion_params(config)?;
    let c = crosscheck(
        &ion,
        config.f64("p0"),
        ion_spinor(config)?,
        config.band("project_band"),
        config.f64("t_final"),
    )?;
    let mut table = CsvTable::new(
        config,
        &ion_meta(&ion)?,
        &["method", "w_plus", "w_zero", "w_minus", "transmission"],
    );
    for (label, w) in [
        ("analytic", c.analytic),
        ("lz_oracle", c.oracle),
        ("wavepacket", c.wavepacket),
        ("ion_emulator", c.ion),
    ] {
        table.labeled_row(label, &[w[0], w[1], w[2], w[1] + w[2]]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_three_config_resolves_defaults() {
        let cfg =
            parse_config("command = evolve\np0 = 10.0\nwidth = 2.0\nm = 0.85\ng = 1.5").unwrap();
        assert_eq!(cfg.command, Command::Evolve);
        assert_eq!(cfg.value("p0"), Some("10.0"));
        assert_eq!(cfg.value("project_band"), Some("plus"));
        assert_eq!(cfg.output, PathBuf::from("evolve.csv"));
    }

    #[test]
    fn negative_slope_is_rejected_with_line() {
        let err = parse_config_for(Command::Evolve, "# comment\ng = -1").unwrap_err();
        match err {
            Error::ConfigParse { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key, "g");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_lists_every_required_key() {
        match parse_config_for(Command::Evolve, "").unwrap_err() {
            Error::MissingKeys(keys) => assert_eq!(keys, ["p0", "width", "m", "g"]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_config(""), Err(Error::MissingKeys(k)) if k == ["command"]));
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let err = parse_config("command = lz-oracle\nratio = 1\nratoi = 2").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 3, .. }));
        let err = parse_config("command = lz-oracle\nratio = 1\nratio = 2").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 3, .. }));
        let err = parse_config_for(Command::Evolve, "command = lz-oracle").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }));
        assert!(parse_config("command = teleport").is_err());
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [
            0.0,
            1.0,
            -2.5,
            0.1,
            1e-7,
            123456.789,
            3.0e20,
            0.28168,
            f64::MIN_POSITIVE,
        ] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_float(1e-7), "1e-7");
        assert_eq!(format_float(0.5), "0.5");
    }

    #[test]
    fn sibling_names() {
        assert_eq!(
            sibling_path(Path::new("out/run.csv"), "_final"),
            PathBuf::from("out/run_final.csv")
        );
    }
}
