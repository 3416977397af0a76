//! Config files and the `subsidy-game` command line.
//!
//! Exit codes: `0` success, `2` invalid input (bad flags, config or
//! parameters, unreadable or unwritable files), `3` numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dynamics::{IntegratorConfig, Trajectory};
use crate::game::{combination_label, equilibria, GameParams, StrategyState};
use crate::hotelling::{market_outcome, DemandParams, FormulaMode};
use crate::sweep::{run_sweep, threshold_report, Scenario, SweepError, SweepParameter, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const CSV_HEADER: &str = "t,x_company,y_government";

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

/// `game` section: like [`GameParams`] but profits may be left to the
/// demand layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    #[serde(default)]
    pub u1: f64,
    pub u2: f64,
    #[serde(default)]
    pub u3: f64,
    #[serde(default)]
    pub t: f64,
    pub t1: f64,
    pub t2: f64,
    pub s: f64,
    pub g_beta: f64,
    pub pi1: Option<f64>,
    pub pi2: Option<f64>,
    #[serde(default)]
    pub decay_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub game: GameSection,
    pub demand: Option<DemandParams>,
    pub init: StrategyState,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::parse(&text)
            .map_err(|e| CliError::Validation(format!("{}: {}", path.display(), e.message())))
    }

    /// Builds a validated scenario. Profits must be given unless `demand`
    /// supplies them.
    pub fn scenario(&self, name: &str) -> Result<Scenario, CliError> {
        let g = &self.game;
        let (pi1, pi2) = match (g.pi1, g.pi2, &self.demand) {
            (_, _, Some(_)) => (g.pi1.unwrap_or(0.0), g.pi2.unwrap_or(0.0)),
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(CliError::Validation(
                    "config: game.pi1 and game.pi2 are required without a demand section".into(),
                ))
            }
        };
        let scenario = Scenario {
            name: name.to_owned(),
            game: GameParams {
                u1: g.u1,
                u2: g.u2,
                u3: g.u3,
                t: g.t,
                t1: g.t1,
                t2: g.t2,
                s: g.s,
                g_beta: g.g_beta,
                pi1,
                pi2,
                decay_rate: g.decay_rate,
            },
            demand: self.demand,
            demand_mode: FormulaMode::Corrected,
            init: self.init,
            integrator: self.integrator,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    ConfigDocument::load(path)?.scenario(&name)
}

/// Trajectory as CSV with shortest round-trip number formatting.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(32 * (traj.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(out, "{t:?},{:?},{:?}", s.x, s.y);
    }
    out
}

pub fn trajectory_json(traj: &Trajectory) -> String {
    serde_json::to_string_pretty(traj).expect("trajectory values are finite")
}

#[derive(Debug, Parser)]
#[command(
    name = "subsidy-game",
    version,
    about = "Government subsidy vs. company technology adoption: evolutionary game simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Corrected,
    PaperVerbatim,
}

impl From<ModeArg> for FormulaMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Corrected => FormulaMode::Corrected,
            ModeArg::PaperVerbatim => FormulaMode::PaperVerbatim,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one scenario and write its trajectory.
    ///
    /// Integrator defaults: dt 0.01, t_end 100, tau 0, convergence_tol 1e-6,
    /// convergence_window 5.
    Simulate {
        /// JSON config with `game`, `init` and optional `demand`, `integrator`.
        config: PathBuf,
        /// Initial subsidy amount.
        #[arg(long)]
        s: Option<f64>,
        /// Observation delay (a whole number of steps; 0 disables).
        #[arg(long)]
        tau: Option<f64>,
        /// Step size (default 0.01).
        #[arg(long)]
        dt: Option<f64>,
        /// Horizon (default 100).
        #[arg(long)]
        t_end: Option<f64>,
        /// Initial company adoption probability.
        #[arg(long)]
        init_x: Option<f64>,
        /// Initial government subsidy probability.
        #[arg(long)]
        init_y: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = TrajectoryFormat::Csv)]
        format: TrajectoryFormat,
    },
    /// Run one simulation per value of a parameter.
    ///
    /// Writes `<param>_<value>.csv` per run and `sensitivity.json`.
    Sweep {
        config: PathBuf,
        /// One of s, tau, t1, t2, u2, g_beta, init_x, init_y.
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 0.5,0.75,1,1.25,1.5.
        #[arg(long)]
        values: String,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// List fixed points with eigenvalues and stability.
    Equilibria {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
    /// Evaluate the demand layer: indifference point, shares and profits.
    Hotelling {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Corrected)]
        mode: ModeArg,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Simulate {
            config,
            s,
            tau,
            dt,
            t_end,
            init_x,
            init_y,
            out,
            format,
        } => {
            let mut scenario = load_scenario(&config)?;
            let overrides = [
                (SweepParameter::S, s),
                (SweepParameter::Tau, tau),
                (SweepParameter::InitX, init_x),
                (SweepParameter::InitY, init_y),
            ];
            for (param, value) in overrides {
                if let Some(v) = value {
                    let name = scenario.name.clone();
                    scenario = param.apply(&scenario, v);
                    scenario.name = name;
                }
            }
            if let Some(v) = dt {
                scenario.integrator.dt = v;
            }
            if let Some(v) = t_end {
                scenario.integrator.t_end = v;
            }
            scenario.validate()?;
            cmd_simulate(&scenario, &out, format, stdout)
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let base = load_scenario(&config)?;
            let parameter: SweepParameter = param.parse().map_err(CliError::Validation)?;
            let values = parse_values(&values)?;
            cmd_sweep(
                &SweepSpec {
                    base,
                    parameter,
                    values,
                },
                &out,
                stdout,
            )
        }
        Command::Equilibria { config, format } => {
            let scenario = load_scenario(&config)?;
            cmd_equilibria(&scenario, format, stdout)
        }
        Command::Hotelling { config, mode, json } => {
            let doc = ConfigDocument::load(&config)?;
            let demand = doc.demand.ok_or_else(|| {
                CliError::Validation(format!("{}: no `demand` section", config.display()))
            })?;
            cmd_hotelling(&demand, mode.into(), json, stdout, stderr)
        }
    }
}

fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::Validation(format!("--values: `{v}` is not a finite number"))
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Validation("--values: empty list".into()));
    }
    Ok(values)
}

fn summary_line(traj: &Trajectory, game: &GameParams) -> String {
    let label = match combination_label(game) {
        Ok(c) => c.to_string(),
        Err(_) => "boundary".to_owned(),
    };
    match (traj.converged_to, traj.convergence_time) {
        (Some(p), Some(t)) => format!("converged to {p} at t = {t}; combination {label}"),
        _ => format!(
            "not converged by t = {}; final state {}; combination {label}",
            traj.times.last().copied().unwrap_or(0.0),
            traj.final_state()
        ),
    }
}

pub fn cmd_simulate(
    scenario: &Scenario,
    out: &Path,
    format: TrajectoryFormat,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let traj = scenario.simulate()?;
    let body = match format {
        TrajectoryFormat::Csv => trajectory_csv(&traj),
        TrajectoryFormat::Json => trajectory_json(&traj),
    };
    fs::write(out, body).map_err(|e| io_error(out, e))?;
    let game = scenario.resolved_game()?;
    let _ = writeln!(stdout, "{}", summary_line(&traj, &game));
    Ok(())
}

/// File name for one sweep run, e.g. `s_0.75.csv`.
pub fn sweep_file_name(parameter: SweepParameter, value: f64) -> String {
    format!("{}_{}.csv", parameter.name(), value)
}

pub fn cmd_sweep(spec: &SweepSpec, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let result = run_sweep(spec)?;
    let game = spec.base.resolved_game()?;

    let mut files: Vec<(String, String)> = Vec::with_capacity(result.runs.len() + 1);
    let mut run_reports = Vec::with_capacity(result.runs.len());
    for run in &result.runs {
        let name = sweep_file_name(spec.parameter, run.value);
        let swept = spec
            .parameter
            .apply(&spec.base, run.value)
            .resolved_game()?;
        run_reports.push(json!({
            "value": run.value,
            "file": name,
            "converged_to": run.trajectory.converged_to,
            "convergence_time": run.trajectory.convergence_time,
            "final_state": run.trajectory.final_state(),
            "combination": combination_label(&swept).ok().map(|c| c.number()),
        }));
        files.push((name, trajectory_csv(&run.trajectory)));
    }
    let report = json!({
        "parameter": spec.parameter.name(),
        "spread_government": result.sensitivity.spread_government,
        "spread_company": result.sensitivity.spread_company,
        "runs": run_reports,
        "threshold_report": threshold_report(&result),
    });
    files.push((
        "sensitivity.json".to_owned(),
        serde_json::to_string_pretty(&report).expect("report values are finite"),
    ));

    write_all_or_nothing(out, &files)?;
    let label = combination_label(&game)
        .map(|c| c.to_string())
        .unwrap_or_else(|_| "boundary".into());
    let _ = writeln!(
        stdout,
        "{} runs over {}; spread_government = {}, spread_company = {}; base combination {label}",
        result.runs.len(),
        spec.parameter,
        result.sensitivity.spread_government,
        result.sensitivity.spread_company
    );
    Ok(())
}

/// Writes every file into `dir`; on any failure removes what was written
/// (and `dir` itself if this call created it).
fn write_all_or_nothing(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    let created = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            if created {
                let _ = fs::remove_dir(dir);
            }
            return Err(io_error(&path, e));
        }
        written.push(path);
    }
    Ok(())
}

fn format_complex(z: &num_complex::Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

pub fn cmd_equilibria(
    scenario: &Scenario,
    format: ReportFormat,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let game = scenario.resolved_game()?;
    let (eqs, degeneracy) = equilibria(&game);
    let label = combination_label(&game);
    match format {
        ReportFormat::Json => {
            let doc = json!({
                "combination": label.ok().map(|c| c.number()),
                "boundary": label.err(),
                "degeneracy": degeneracy,
                "equilibria": eqs,
            });
            let _ = writeln!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&doc).expect("finite")
            );
        }
        ReportFormat::Table => {
            let rows: Vec<[String; 4]> = eqs
                .iter()
                .map(|e| {
                    [
                        e.point.to_string(),
                        format_complex(&e.eigenvalues[0]),
                        format_complex(&e.eigenvalues[1]),
                        e.classification.to_string(),
                    ]
                })
                .collect();
            let header = ["point", "eigenvalue_1", "eigenvalue_2", "classification"];
            let mut widths = header.map(str::len);
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let line = |cells: [&str; 4]| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                padded.join("  ").trim_end().to_owned()
            };
            let _ = writeln!(stdout, "{}", line(header));
            for row in &rows {
                let _ = writeln!(stdout, "{}", line([&row[0], &row[1], &row[2], &row[3]]));
            }
            match label {
                Ok(c) => {
                    let _ = writeln!(stdout, "combination: {c}");
                }
                Err(b) => {
                    let _ = writeln!(stdout, "combination: boundary ({b})");
                }
            }
            if let Some(d) = degeneracy {
                let _ = writeln!(
                    stdout,
                    "notice: degenerate parameters, {d}; interior point skipped"
                );
            }
        }
    }
    Ok(())
}

pub fn cmd_hotelling(
    demand: &DemandParams,
    mode: FormulaMode,
    as_json: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let m = market_outcome(demand, mode).map_err(|e| CliError::Validation(e.to_string()))?;
    if m.clamped {
        let _ = writeln!(
            stderr,
            "warning: x_star_raw = {} lies outside [0, 1]; clamped to {}",
            m.x_star_raw, m.x_star
        );
    }
    if as_json {
        let _ = writeln!(
            stdout,
            "{}",
            serde_json::to_string_pretty(&m).expect("finite")
        );
    } else {
        let _ = writeln!(stdout, "x_star_raw: {}", m.x_star_raw);
        let _ = writeln!(stdout, "x_star: {}", m.x_star);
        let _ = writeln!(stdout, "share_new: {}", m.share_new);
        let _ = writeln!(stdout, "share_traditional: {}", m.share_traditional);
        let _ = writeln!(stdout, "pi1: {}", m.pi1);
        let _ = writeln!(stdout, "pi2: {}", m.pi2);
        let _ = writeln!(
            stdout,
            "inconvenience_asymmetry_holds: {}",
            m.inconvenience_asymmetry_holds
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"{
        "game": {"u2": 0.5, "t1": 1, "g_beta": 1, "t2": 0.5, "pi1": 3, "pi2": 2, "s": 0.5},
        "init": {"x": 0.2, "y": 0.8}
    }"#;

    #[test]
    fn parses_reference_with_defaults() {
        let doc = ConfigDocument::parse(REFERENCE).unwrap();
        assert_eq!(doc.integrator, IntegratorConfig::default());
        let sc = doc.scenario("r").unwrap();
        assert_eq!(sc.game, GameParams::reference(0.5));
    }

    #[test]
    fn unknown_keys_rejected() {
        let typo = REFERENCE.replace("\"g_beta\"", "\"gbeta\"");
        assert!(ConfigDocument::parse(&typo).is_err());
        let extra = REFERENCE.replace("\"init\"", "\"colour\": 1, \"init\"");
        assert!(ConfigDocument::parse(&extra).is_err());
    }

    #[test]
    fn missing_required_number() {
        let missing = REFERENCE.replace("\"t1\": 1,", "");
        assert!(ConfigDocument::parse(&missing).is_err());
        let no_profit = REFERENCE.replace("\"pi1\": 3,", "");
        let doc = ConfigDocument::parse(&no_profit).unwrap();
        assert!(matches!(doc.scenario("x"), Err(CliError::Validation(_))));
    }

    #[test]
    fn csv_layout() {
        let sc = Scenario {
            integrator: IntegratorConfig {
                dt: 0.5,
                t_end: 1.0,
                ..IntegratorConfig::default()
            },
            ..Scenario::reference(0.5)
        };
        let csv = trajectory_csv(&sc.simulate().unwrap());
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0,0.2,0.8"));
    }

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0.5, 0.75,1").unwrap(), vec![0.5, 0.75, 1.0]);
        assert!(parse_values("0.5,abc").is_err());
        assert!(parse_values("").is_err());
        assert!(parse_values("inf").is_err());
        assert_eq!(sweep_file_name(SweepParameter::S, 1.0), "s_1.csv");
        assert_eq!(sweep_file_name(SweepParameter::S, 1.25), "s_1.25.csv");
    }

    #[test]
    fn help_exits_zero() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["subsidy-game", "--help"], &mut out, &mut err), EXIT_OK);
        assert!(String::from_utf8(out).unwrap().contains("simulate"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["subsidy-game", "bogus"], &mut out, &mut err),
            EXIT_VALIDATION
        );
    }
}
