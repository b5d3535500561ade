//! Scenario runner behind the `atsnc` binary. Each subcommand runs one
//! experiment, writes its data and a JSON report under the output directory,
//! and maps the verdict to the exit code: 0 pass, 1 usage or configuration
//! error, 2 claim violation.

mod config;

pub use config::{Candidates, CurveSpec, ParamSpec, ScenarioConfig};

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::adversary::{constraint_check, overdrive_trajectory, trajectory1, trajectory3, SpringParams, F1};
use crate::minplus::{leaky_bucket, rate_latency, Curve};
use crate::q::Q;
use crate::regulators::{ir_process_leboudec, trace_csv, IrConfig};
use crate::traffic::cumulative_of;
use crate::verify::{
    backlogged_periods, check_strict_sc_packets, default_theta_grid, delay_growth, equivalence_suite,
    inserted_packet_experiment, residual_rate_experiment, strict_sc_suite, CheckReport, Verdict, VerifyError, Witness,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "atsnc", version, about = "Regulator and service-curve experiments with exact rational arithmetic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario configuration (JSON); missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of Spring periods.
    #[arg(long, global = true)]
    pub periods: Option<usize>,
    /// Seed of the randomized suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Target delay of the inserted packet, e.g. `10` or `21/2`.
    #[arg(long = "M", global = true)]
    pub m: Option<Q>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Spring trajectory: regulator trace, delay growth, figure data.
    Spring,
    /// Strict service curves on the Spring run and on random instances.
    StrictSc,
    /// A claimed strict service curve on the overdrive trajectory.
    #[command(alias = "prop2")]
    Overdrive,
    /// Delay of a packet inserted into the Spring run.
    Xm,
    /// FIFO residual pipeline for candidate service curves.
    Residual,
    /// Agreement of the two regulator models on random sequences.
    Equivalence,
    /// All of the above.
    ReportAll,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spring => "spring",
            Command::StrictSc => "strict-sc",
            Command::Overdrive => "overdrive",
            Command::Xm => "xm",
            Command::Residual => "residual",
            Command::Equivalence => "equivalence",
            Command::ReportAll => "report-all",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

impl From<crate::adversary::ParamError> for CliError {
    fn from(e: crate::adversary::ParamError) -> CliError {
        CliError::Config(e.to_string())
    }
}

impl From<crate::minplus::CurveError> for CliError {
    fn from(e: crate::minplus::CurveError) -> CliError {
        CliError::Config(e.to_string())
    }
}

/// JSON report written by every subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub claim: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub params: Value,
    pub details: Value,
}

/// Verdict and the files a command wrote.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => EXIT_PASS,
            Verdict::Violation => EXIT_VIOLATION,
        }
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Violation
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

/// Loads the configuration file, if any, and applies flag overrides.
pub fn effective_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.display().to_string();
    }
    if let Some(n) = cli.periods {
        cfg.n_periods = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = cli.m {
        cfg.m = m;
    }
    Ok(cfg)
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &str) -> Result<Writer, CliError> {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Writer { dir, files: Vec::new() })
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        f.write_all(data).map_err(io_err(&path))?;
        self.files.push(path);
        Ok(())
    }

    fn report(&mut self, name: &str, r: &Report) -> Result<Verdict, CliError> {
        let mut text = serde_json::to_string_pretty(r).expect("report serializes");
        text.push('\n');
        self.bytes(name, text.as_bytes())?;
        Ok(r.verdict)
    }
}

fn spring_run(
    p: &SpringParams,
    periods: usize,
) -> Result<(crate::traffic::PacketSequence, crate::regulators::RegulatorTrace), CliError> {
    let b = trajectory3(p, periods);
    let trace = ir_process_leboudec(&b, &p.ir_config()).map_err(VerifyError::from)?;
    Ok((b, trace))
}

#[derive(Serialize)]
struct FigureRow {
    series: &'static str,
    t_n: i128,
    t_d: i128,
    value_n: i128,
    value_d: i128,
    right_n: i128,
    right_d: i128,
    t: String,
    value: String,
    right: String,
}

fn figure_row(series: &'static str, t: Q, value: Q, right: Q) -> FigureRow {
    let dec = |x: Q| format!("{:.6}", x.to_f64());
    FigureRow {
        series,
        t_n: t.numer(),
        t_d: t.denom(),
        value_n: value.numer(),
        value_d: value.denom(),
        right_n: right.numer(),
        right_d: right.denom(),
        t: dec(t),
        value: dec(value),
        right: dec(right),
    }
}

/// Input and output cumulative functions at every event instant, and the
/// aggregate arrival curve and the rate-latency strict service curve anchored
/// at the start of the last backlogged period.
fn figure_csv(
    p: &SpringParams,
    b: &crate::traffic::PacketSequence,
    d: &crate::traffic::PacketSequence,
) -> Result<Vec<u8>, CliError> {
    let (fb, fd) = (cumulative_of(b, None), cumulative_of(d, None));
    let mut instants: Vec<Q> = b.times().into_iter().chain(d.times()).chain([Q::ZERO]).collect();
    instants.sort();
    instants.dedup();
    let three = Q::int(3);
    let alpha = leaky_bucket(three * p.r, three * p.b + three * p.r * p.dcap)?;
    let beta = rate_latency(p.r, p.i)?;
    let anchor = backlogged_periods(&fb, &fd)?.last().map_or(Q::ZERO, |x| x.start);
    let mut rows = Vec::new();
    let v = |f: &Curve, t: Q| f.eval(t).unwrap();
    let vr = |f: &Curve, t: Q| f.eval_right(t).unwrap();
    for t in &instants {
        rows.push(figure_row("input", *t, v(&fb, *t), vr(&fb, *t)));
    }
    for t in &instants {
        rows.push(figure_row("output", *t, v(&fd, *t), vr(&fd, *t)));
    }
    let (base_b, base_d) = (v(&fb, anchor), v(&fd, anchor));
    for t in instants.iter().filter(|t| **t >= anchor) {
        let u = *t - anchor;
        rows.push(figure_row("arrival_curve", *t, base_b + v(&alpha, u), base_b + vr(&alpha, u)));
    }
    for t in instants.iter().filter(|t| **t >= anchor) {
        let u = *t - anchor;
        rows.push(figure_row("strict_service_curve", *t, base_d + v(&beta, u), base_d + vr(&beta, u)));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

fn cmd_spring(cfg: &ScenarioConfig, w: &mut Writer) -> Result<Verdict, CliError> {
    let p = cfg.params.build()?;
    let bundle = trajectory1(&p, cfg.n_periods);
    let constraints = constraint_check(&bundle);
    let (b, trace) = spring_run(&p, cfg.n_periods)?;
    let mut buf = Vec::new();
    trace_csv(&trace, &mut buf).map_err(|e| CliError::Config(e.to_string()))?;
    w.bytes("spring_trace.csv", &buf)?;
    w.bytes("spring_figure.csv", &figure_csv(&p, &b, &trace.departures)?)?;
    let expected = p.increment();
    let (growth, ok) = match delay_growth(&b, &trace.departures, 6) {
        Ok(g) => (to_value(&g), g.increment == expected),
        Err(VerifyError::TooShort { .. }) => (Value::Null, true),
        Err(e) => return Err(e.into()),
    };
    w.report(
        "spring.json",
        &Report {
            claim: "delay_growth_per_period".to_string(),
            verdict: verdict(ok && constraints.all_pass()),
            witness: None,
            params: to_value(&p),
            details: json!({
                "periods": cfg.n_periods,
                "expected_increment": expected,
                "growth": growth,
                "constraints": to_value(&constraints),
            }),
        },
    )
}

fn first_witness(reports: &[(String, CheckReport)]) -> Option<Witness> {
    reports.iter().find_map(|(_, r)| r.witness)
}

fn cmd_strict_sc(cfg: &ScenarioConfig, w: &mut Writer) -> Result<Verdict, CliError> {
    let p = cfg.params.build()?;
    let (b, trace) = spring_run(&p, cfg.n_periods)?;
    let mut checks = Vec::new();
    for c in &cfg.candidates.strict_sc {
        checks.push((c.label(), check_strict_sc_packets(&b, &trace.departures, &c.build()?)?));
    }
    let suite = strict_sc_suite(cfg.seed, cfg.strict_sc_count);
    let ok = checks.iter().all(|(_, r)| r.passed()) && suite.failures.is_empty();
    w.report(
        "strict_sc.json",
        &Report {
            claim: "strict_service_curve".to_string(),
            verdict: verdict(ok),
            witness: first_witness(&checks),
            params: to_value(&p),
            details: json!({ "spring": to_value(&checks), "suite": to_value(&suite) }),
        },
    )
}

fn cmd_overdrive(cfg: &ScenarioConfig, w: &mut Writer) -> Result<Verdict, CliError> {
    let p = cfg.params.build()?;
    let contract = p.contract(F1);
    let a = overdrive_trajectory(F1, &contract, cfg.overdrive_packets.max(1));
    let out = ir_process_leboudec(&a, &IrConfig::new([contract])).map_err(VerifyError::from)?;
    let candidate = &cfg.candidates.overdrive;
    let r = check_strict_sc_packets(&a, &out.departures, &candidate.build()?)?;
    w.report(
        "overdrive.json",
        &Report {
            claim: r.claim.clone(),
            verdict: r.verdict,
            witness: r.witness,
            params: to_value(&p),
            details: json!({
                "candidate": candidate.label(),
                "arrivals": a.times(),
                "departures": out.departure_times(),
            }),
        },
    )
}

fn cmd_xm(cfg: &ScenarioConfig, w: &mut Writer) -> Result<Verdict, CliError> {
    let p = cfg.params.build()?;
    let rep = inserted_packet_experiment(&p, cfg.b1, cfg.m, cfg.l_g)?;
    let mut refuted = Vec::new();
    for c in &cfg.candidates.xm {
        refuted.push(json!({ "candidate": c.label(), "refuted_at": rep.refutes(&c.build()?) }));
    }
    let any = refuted.iter().any(|r| !r["refuted_at"].is_null());
    w.report(
        "xm.json",
        &Report {
            claim: "individual_service_curve".to_string(),
            verdict: verdict(!any && rep.measured_delay >= cfg.m),
            witness: None,
            params: to_value(&p),
            details: json!({ "experiment": to_value(&rep), "candidates": refuted }),
        },
    )
}

fn cmd_residual(cfg: &ScenarioConfig, w: &mut Writer) -> Result<Verdict, CliError> {
    let p = cfg.params.build()?;
    let grid = cfg.theta_grid.clone().unwrap_or_else(|| default_theta_grid(&p));
    let mut runs = Vec::new();
    let mut flagged = false;
    for c in &cfg.candidates.residual {
        let rep = residual_rate_experiment(&p, &c.build()?, &grid)?;
        flagged |= rep.flagged;
        runs.push(json!({ "candidate": c.label(), "report": to_value(&rep) }));
    }
    w.report(
        "residual.json",
        &Report {
            claim: "long_term_rate_at_most_3r".to_string(),
            verdict: verdict(!flagged),
            witness: None,
            params: to_value(&p),
            details: json!({ "theta_grid": grid, "candidates": runs }),
        },
    )
}

fn cmd_equivalence(cfg: &ScenarioConfig, w: &mut Writer) -> Result<Verdict, CliError> {
    let s = equivalence_suite(cfg.seed, cfg.equivalence_count);
    w.report(
        "equivalence.json",
        &Report {
            claim: "regulator_models_agree".to_string(),
            verdict: verdict(s.mismatches.is_empty()),
            witness: None,
            params: json!({ "seed": cfg.seed, "count": cfg.equivalence_count }),
            details: to_value(&s),
        },
    )
}

/// Runs one subcommand with an already resolved configuration.
pub fn run_command(cmd: Command, cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    let mut w = Writer::new(&cfg.out_dir)?;
    let v = match cmd {
        Command::Spring => cmd_spring(cfg, &mut w)?,
        Command::StrictSc => cmd_strict_sc(cfg, &mut w)?,
        Command::Overdrive => cmd_overdrive(cfg, &mut w)?,
        Command::Xm => cmd_xm(cfg, &mut w)?,
        Command::Residual => cmd_residual(cfg, &mut w)?,
        Command::Equivalence => cmd_equivalence(cfg, &mut w)?,
        Command::ReportAll => {
            let all = [
                Command::Spring,
                Command::StrictSc,
                Command::Overdrive,
                Command::Xm,
                Command::Residual,
                Command::Equivalence,
            ];
            let mut summary = serde_json::Map::new();
            let mut worst = Verdict::Pass;
            for c in all {
                let o = run_command(c, cfg)?;
                if o.verdict == Verdict::Violation {
                    worst = Verdict::Violation;
                }
                summary.insert(c.name().to_string(), to_value(&o.verdict));
                w.files.extend(o.files);
            }
            let mut text = serde_json::to_string_pretty(&Value::Object(summary)).expect("summary serializes");
            text.push('\n');
            w.bytes("report_all.json", text.as_bytes())?;
            worst
        }
    };
    Ok(Outcome { verdict: v, files: w.files })
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match effective_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("atsnc: {e}");
            return EXIT_USAGE;
        }
    };
    if cli.print_config {
        let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return EXIT_PASS;
    }
    match run_command(cli.command, &cfg) {
        Ok(o) => {
            let mut out = std::io::stdout().lock();
            let status = if o.exit_code() == EXIT_PASS { "pass" } else { "violation" };
            let _ = writeln!(out, "{}: {status}", cli.command.name());
            for f in &o.files {
                let _ = writeln!(out, "  wrote {}", f.display());
            }
            o.exit_code()
        }
        Err(e) => {
            eprintln!("atsnc {}: {e}", cli.command.name());
            EXIT_USAGE
        }
    }
}
