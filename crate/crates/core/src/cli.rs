//! Command-line front end behind the `cvdj` binary.
//!
//! Subcommands: `run`, `sweep`, `classical`, `validate`. Every flag can
//! also come from a JSON file given with `--config`, using the same field
//! names (`function` for the function spec); flags override the file.
//!
//! Exit codes: 0 on success, 2 on usage, configuration or DSL errors,
//! 1 on internal failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::baseline::{separation_report, SeparationRow};
use crate::djcv::{
    run_sampled, sweep_resolution, ExperimentResult, PipelineParams, SweepEntry, X0,
};
use crate::error::Error;
use crate::gates::{ExecPath, OracleMode};
use crate::grid::{AncillaGrid, Grid};
use crate::promise::{classify, parse_fnspec, BalanceReport, Classification, PromiseFunction};

#[derive(Debug, Parser)]
#[command(
    name = "cvdj",
    version,
    about = "Discretized continuous-variable Deutsch-Jozsa simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline once and emit one result.
    Run(RunArgs),
    /// Run the same function over several grid sizes.
    Sweep(RunArgs),
    /// Classical-vs-quantum query table.
    Classical(RunArgs),
    /// Sample and classify a function without running the pipeline.
    Validate(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Run(a) | Command::Sweep(a) | Command::Classical(a) | Command::Validate(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Classical(_) => "classical",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Faithful,
    Fast,
}

impl From<ModeArg> for OracleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Faithful => OracleMode::Faithful,
            ModeArg::Fast => OracleMode::Fast,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON config file with the same field names as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Query grid cell count (even).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated cell counts for sweep/classical.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Function spec, or @path to read it from a file.
    #[arg(long = "fn")]
    pub function: Option<String>,
    /// Query position: a coordinate, or `center`.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long)]
    pub window_half_cells: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Ancilla cell count (even).
    #[arg(long)]
    pub m: Option<usize>,
    /// Decision threshold in (0, 1).
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random balanced instances per n for `classical`.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Use dense matrices instead of the fast paths.
    #[arg(long)]
    pub reference: bool,
    /// Write the final state in the binary dump format (`run` only).
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
}

/// Query position as written in a config file: a number or `"center"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Field {
    Coordinate(f64),
    Named(String),
}

/// Contents of a `--config` file. All fields optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub n: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub function: Option<String>,
    pub x0: Option<X0Field>,
    pub window_half_cells: Option<usize>,
    pub mode: Option<OracleMode>,
    pub m: Option<usize>,
    pub theta: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub reference: Option<bool>,
    pub dump_state: Option<PathBuf>,
}

pub const DEFAULT_TRIALS: u64 = 1000;

/// Flags merged over the config file, with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub n: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub function: Option<String>,
    pub x0: X0,
    pub window_half_cells: usize,
    pub mode: OracleMode,
    pub m: usize,
    pub theta: f64,
    pub seed: Option<u64>,
    pub trials: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub reference: bool,
    pub dump_state: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::StateDump(_) => CliError::Internal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<crate::error::DslError> for CliError {
    fn from(e: crate::error::DslError) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_x0(text: &str) -> CliResult<X0> {
    if text == "center" {
        return Ok(X0::Center);
    }
    text.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(X0::Coordinate)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "x0 must be a finite number or `center`, got `{text}`"
            ))
        })
}

pub fn resolve(cmd: &Command) -> CliResult<Resolved> {
    let args = cmd.args();
    let cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            let cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
            if let Some(sub) = &cfg.subcommand {
                if sub != cmd.name() {
                    return Err(CliError::Usage(format!(
                        "config is for `{sub}` but the `{}` subcommand was given",
                        cmd.name()
                    )));
                }
            }
            cfg
        }
        None => RunConfig::default(),
    };
    let x0 = match (&args.x0, &cfg.x0) {
        (Some(s), _) => parse_x0(s)?,
        (None, Some(X0Field::Coordinate(x))) => X0::Coordinate(*x),
        (None, Some(X0Field::Named(s))) => parse_x0(s)?,
        (None, None) => X0::Center,
    };
    Ok(Resolved {
        n: args.n.or(cfg.n),
        ns: args.ns.clone().or(cfg.ns),
        function: args.function.clone().or(cfg.function),
        x0,
        window_half_cells: args
            .window_half_cells
            .or(cfg.window_half_cells)
            .unwrap_or(0),
        mode: args
            .mode
            .map(OracleMode::from)
            .or(cfg.mode)
            .unwrap_or_default(),
        m: args.m.or(cfg.m).unwrap_or(AncillaGrid::DEFAULT_CELLS),
        theta: args
            .theta
            .or(cfg.theta)
            .unwrap_or(crate::djcv::DEFAULT_THRESHOLD),
        seed: args.seed.or(cfg.seed),
        trials: args.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS),
        out: args.out.clone().or(cfg.out),
        format: args.format.or(cfg.format).unwrap_or_default(),
        reference: args.reference || cfg.reference.unwrap_or(false),
        dump_state: args.dump_state.clone().or(cfg.dump_state),
    })
}

impl Resolved {
    fn params(&self) -> CliResult<PipelineParams> {
        Ok(PipelineParams {
            mode: self.mode,
            path: if self.reference {
                ExecPath::Reference
            } else {
                ExecPath::Fast
            },
            ancilla: AncillaGrid::new(self.m)
                .map_err(|e| CliError::Usage(format!("ancilla size: {e}")))?,
            theta: self.theta,
            seed: self.seed,
        })
    }

    fn grid(&self) -> CliResult<Grid> {
        let n = self
            .n
            .ok_or_else(|| CliError::Usage("--n is required".into()))?;
        Grid::new(n).map_err(|e| CliError::Usage(format!("--n: {e}")))
    }

    fn n_list(&self) -> CliResult<Vec<usize>> {
        match (&self.ns, self.n) {
            (Some(ns), _) if !ns.is_empty() => Ok(ns.clone()),
            (None, Some(n)) => Ok(vec![n]),
            _ => Err(CliError::Usage(
                "--ns (comma-separated list of even n) is required".into(),
            )),
        }
    }

    /// Function spec text, reading `@path` indirections.
    fn function_text(&self) -> CliResult<String> {
        let spec = self
            .function
            .as_deref()
            .ok_or_else(|| CliError::Usage("--fn is required".into()))?;
        match spec.strip_prefix('@') {
            Some(path) => fs::read_to_string(path)
                .map(|s| s.trim().to_string())
                .map_err(|e| CliError::Usage(format!("cannot read function file {path}: {e}"))),
            None => Ok(spec.to_string()),
        }
    }

    fn function(&self) -> CliResult<PromiseFunction> {
        Ok(parse_fnspec(&self.function_text()?)?)
    }
}

/// CSV header for experiment rows.
pub const RESULT_CSV_HEADER: [&str; 11] = [
    "n",
    "m",
    "x0_index",
    "window_half_width",
    "mode",
    "truth",
    "decision",
    "p_success",
    "oracle_calls",
    "correct",
    "wall_time_us",
];

fn result_csv_row(r: &ExperimentResult) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.m.to_string(),
        r.x0_index.to_string(),
        r.window.half_width_cells.to_string(),
        r.mode.to_string(),
        r.truth.to_string(),
        r.decision.to_string(),
        r.p_success.to_string(),
        r.oracle_calls.to_string(),
        r.correct.to_string(),
        r.wall_time_us.to_string(),
    ]
}

fn failed_csv_row(n: usize, params: &PipelineParams) -> Vec<String> {
    let mut row = vec![String::new(); RESULT_CSV_HEADER.len()];
    row[0] = n.to_string();
    row[1] = params.ancilla.len().to_string();
    row[4] = params.mode.to_string();
    row[5] = "FAILED".into();
    row[6] = "FAILED".into();
    row
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(internal)?;
    for r in rows {
        w.write_record(r).map_err(internal)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn json_line<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Internal(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub n: usize,
    pub function: String,
    pub classification: Classification,
    pub report: BalanceReport,
}

fn cmd_run(cfg: &Resolved) -> CliResult<String> {
    let grid = cfg.grid()?;
    let f = cfg.function()?;
    let sampled = f.sample(grid)?;
    let params = cfg.params()?;
    let x0_index = cfg.x0.resolve(grid)?;
    let (result, state) = run_sampled(
        &sampled,
        f.source(),
        x0_index,
        cfg.window_half_cells,
        &params,
    )?;
    if let Some(path) = &cfg.dump_state {
        let file = fs::File::create(path)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", path.display())))?;
        state.write_dump(std::io::BufWriter::new(file))?;
    }
    match cfg.format {
        Format::Json => json_line(&result),
        Format::Csv => csv_text(&RESULT_CSV_HEADER, &[result_csv_row(&result)]),
    }
}

fn cmd_sweep(cfg: &Resolved, stderr: &mut dyn Write) -> CliResult<String> {
    let ns = cfg.n_list()?;
    let params = cfg.params()?;
    let text = cfg.function_text()?;
    let entries = sweep_resolution(&text, &ns, cfg.x0, cfg.window_half_cells, &params)?;
    for e in &entries {
        if let SweepEntry::Failed { n, error } = e {
            let _ = writeln!(stderr, "warning: n = {n} failed: {error}");
        }
    }
    match cfg.format {
        Format::Json => entries.iter().map(json_line).collect(),
        Format::Csv => {
            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|e| match e {
                    SweepEntry::Ok(r) => result_csv_row(r),
                    SweepEntry::Failed { n, .. } => failed_csv_row(*n, &params),
                })
                .collect();
            csv_text(&RESULT_CSV_HEADER, &rows)
        }
    }
}

pub const SEPARATION_CSV_HEADER: [&str; 11] = [
    "n",
    "quantum_oracle_calls",
    "quantum_all_correct",
    "deterministic_worst_case",
    "deterministic_observed_max",
    "deterministic_all_correct",
    "randomized_k",
    "randomized_target_error",
    "randomized_empirical_error",
    "trials",
    "regime",
];

fn separation_csv_row(r: &SeparationRow) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.quantum_oracle_calls.to_string(),
        r.quantum_all_correct.to_string(),
        r.deterministic_worst_case.to_string(),
        r.deterministic_observed_max.to_string(),
        r.deterministic_all_correct.to_string(),
        r.randomized_k.to_string(),
        r.randomized_target_error.to_string(),
        r.randomized_empirical_error.to_string(),
        r.trials.to_string(),
        r.regime.clone(),
    ]
}

fn cmd_classical(cfg: &Resolved) -> CliResult<String> {
    let ns = cfg.n_list()?;
    let rows = separation_report(&ns, cfg.trials, cfg.seed.unwrap_or(0))?;
    match cfg.format {
        Format::Json => rows.iter().map(json_line).collect(),
        Format::Csv => {
            let rows: Vec<Vec<String>> = rows.iter().map(separation_csv_row).collect();
            csv_text(&SEPARATION_CSV_HEADER, &rows)
        }
    }
}

fn cmd_validate(cfg: &Resolved) -> CliResult<String> {
    let grid = cfg.grid()?;
    let f = cfg.function()?;
    let (classification, report) = classify(&f, grid)?;
    let out = ValidateOutput {
        n: grid.len(),
        function: f.source().to_string(),
        classification,
        report,
    };
    match cfg.format {
        Format::Json => json_line(&out),
        Format::Csv => csv_text(
            &[
                "n",
                "classification",
                "grid_count_0",
                "grid_count_1",
                "analytic_measure_0",
                "analytic_measure_1",
                "grid_balanced",
                "analytic_balanced",
            ],
            &[vec![
                out.n.to_string(),
                classification.to_string(),
                report.grid_count_0.to_string(),
                report.grid_count_1.to_string(),
                report.analytic_measure_0.to_string(),
                report.analytic_measure_1.to_string(),
                report.grid_balanced.to_string(),
                report.analytic_balanced.to_string(),
            ]],
        ),
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string())),
    }
}

/// Executes a parsed command.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let cfg = resolve(&cli.command)?;
    if cfg.dump_state.is_some() && !matches!(cli.command, Command::Run(_)) {
        return Err(CliError::Usage(
            "--dump-state is only valid for `run`".into(),
        ));
    }
    let text = match &cli.command {
        Command::Run(_) => cmd_run(&cfg)?,
        Command::Sweep(_) => cmd_sweep(&cfg, stderr)?,
        Command::Classical(_) => cmd_classical(&cfg)?,
        Command::Validate(_) => cmd_validate(&cfg)?,
    };
    write_output(cfg.out.as_deref(), &text, stdout)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["cvdj"];
        full.extend_from_slice(args);
        let code = main_with(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn run_constant() {
        let (code, out, _) = run(&["run", "--n", "64", "--fn", "constant(1)"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["decision"], "Constant");
        assert_eq!(v["oracle_calls"], 1);
        assert!((v["p_success"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(v["x0_index"], 32);
    }

    #[test]
    fn odd_n_is_usage_error() {
        let (code, _, err) = run(&["run", "--n", "63", "--fn", "constant(1)"]);
        assert_eq!(code, 2);
        assert!(err.contains("even"), "{err}");
    }

    #[test]
    fn validate_step() {
        let (code, out, _) = run(&[
            "validate",
            "--n",
            "8",
            "--fn",
            "piecewise{[-inf,0)->0, [0,inf)->1}",
        ]);
        assert_eq!(code, 0);
        let v: ValidateOutput = serde_json::from_str(&out).unwrap();
        assert_eq!(v.classification, Classification::GridBalanced);
        assert_eq!((v.report.grid_count_0, v.report.grid_count_1), (4, 4));
    }

    #[test]
    fn validate_neither_exits_zero() {
        let (code, out, _) = run(&[
            "validate",
            "--n",
            "4",
            "--fn",
            "piecewise{[-inf,0.4)->0} else->1",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("NeitherError"));
    }

    #[test]
    fn x0_snaps_to_nearest_cell() {
        let g = Grid::new(16).unwrap();
        let x = format!("{}", 0.6 * g.spacing());
        let (code, out, _) = run(&["run", "--n", "16", "--fn", "constant(0)", "--x0", &x]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["x0_index"], 9);
        let (code, _, _) = run(&["run", "--n", "16", "--fn", "constant(0)", "--x0", "-100"]);
        assert_eq!(code, 2);
        let (code, _, _) = run(&["run", "--n", "16", "--fn", "constant(0)", "--x0", "left"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn missing_and_unknown_flags() {
        assert_eq!(run(&["run", "--fn", "constant(0)"]).0, 2);
        assert_eq!(run(&["run", "--n", "4"]).0, 2);
        assert_eq!(
            run(&["run", "--n", "4", "--fn", "constant(0)", "--bogus"]).0,
            2
        );
        assert_eq!(run(&["sweep", "--fn", "constant(0)"]).0, 2);
        assert_eq!(
            run(&["run", "--n", "4", "--fn", "constant(0)", "--m", "3"]).0,
            2
        );
        assert_eq!(
            run(&["run", "--n", "4", "--fn", "constant(0)", "--theta", "1.5"]).0,
            2
        );
        assert_eq!(
            run(&["run", "--n", "8192", "--fn", "constant(0)", "--reference"]).0,
            2
        );
        assert_eq!(
            run(&[
                "validate",
                "--n",
                "4",
                "--fn",
                "constant(0)",
                "--dump-state",
                "x"
            ])
            .0,
            2
        );
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn sweep_csv() {
        let (code, out, err) = run(&[
            "sweep",
            "--ns",
            "4,6,16",
            "--fn",
            "constant(0)",
            "--format",
            "csv",
            "--mode",
            "faithful",
        ]);
        assert_eq!(code, 0, "{err}");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], RESULT_CSV_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(
            &fields[..7],
            &["4", "2", "2", "0", "faithful", "Constant0", "Constant"]
        );
        assert!((fields[7].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(fields[8], "1");
    }

    #[test]
    fn classical_json() {
        let (code, out, _) = run(&["classical", "--ns", "4,1024", "--trials", "10"]);
        assert_eq!(code, 0);
        let rows: Vec<SeparationRow> = out
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(rows[0].deterministic_worst_case, 3);
        assert_eq!(rows[1].deterministic_worst_case, 513);
        assert!(rows
            .iter()
            .all(|r| r.quantum_oracle_calls == 1 && r.randomized_k == 11));
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        fs::write(
            &cfg,
            r#"{"n": 16, "function": "constant(1)", "x0": "center", "mode": "faithful", "m": 4}"#,
        )
        .unwrap();
        let cfg_s = cfg.to_str().unwrap();
        let (code, out, err) = run(&["run", "--config", cfg_s]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(
            (v["n"].as_u64(), v["m"].as_u64(), v["mode"].as_str()),
            (Some(16), Some(4), Some("faithful"))
        );
        let (_, out, _) = run(&["run", "--config", cfg_s, "--n", "8"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["n"], 8);

        fs::write(&cfg, r#"{"n": 16, "fnspec": "constant(1)"}"#).unwrap();
        assert_eq!(run(&["run", "--config", cfg_s]).0, 2);
        fs::write(&cfg, r#"{"subcommand": "sweep", "ns": [4]}"#).unwrap();
        assert_eq!(run(&["run", "--config", cfg_s, "--fn", "constant(0)"]).0, 2);
    }

    #[test]
    fn function_from_file_and_out_path() {
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("f.txt");
        fs::write(&spec, "piecewise{\n  [-inf,0)->0,\n  [0,inf)->1\n}\n").unwrap();
        let out_path = dir.path().join("r.json");
        let fn_arg = format!("@{}", spec.display());
        let (code, stdout, _) = run(&[
            "run",
            "--n",
            "32",
            "--fn",
            &fn_arg,
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(stdout.is_empty());
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
        assert_eq!(v["decision"], "Balanced");
        assert_eq!(
            run(&["run", "--n", "32", "--fn", "@/nonexistent/f.txt"]).0,
            2
        );
    }

    #[test]
    fn dump_state_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bin");
        let p = path.to_str().unwrap();
        let (code, _, _) = run(&[
            "run",
            "--n",
            "8",
            "--fn",
            "constant(1)",
            "--mode",
            "faithful",
            "--dump-state",
            p,
        ]);
        assert_eq!(code, 0);
        let dump = crate::qstate::read_dump(fs::File::open(&path).unwrap()).unwrap();
        assert_eq!((dump.n, dump.m), (8, 2));
        let (code, _, _) = run(&["run", "--n", "8", "--fn", "constant(1)", "--dump-state", p]);
        assert_eq!(code, 0);
        let dump = crate::qstate::read_dump(fs::File::open(&path).unwrap()).unwrap();
        assert_eq!((dump.n, dump.m), (8, 1));
        // constant case collapses back onto |x0> up to sign
        assert!((dump.amps[4].norm() - 1.0).abs() < 1e-9);
    }
}
