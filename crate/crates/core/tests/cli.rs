use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use atsnc::adversary::SpringParams;
use atsnc::cli::{
    main_with_args, run_command, Command, CurveSpec, ParamSpec, ScenarioConfig, EXIT_PASS, EXIT_USAGE, EXIT_VIOLATION,
};
use atsnc::q::{q, Q};
use atsnc::verify::Verdict;
use serde_json::Value;

fn config_in(dir: &Path) -> ScenarioConfig {
    ScenarioConfig { out_dir: dir.display().to_string(), ..ScenarioConfig::default() }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rational(v: &Value) -> Q {
    q(v["n"].as_i64().unwrap() as i128, v["d"].as_i64().unwrap() as i128)
}

#[test]
fn config_round_trips_and_defaults_to_figure_parameters() {
    let cfg = ScenarioConfig::default();
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    assert_eq!(
        cfg.params.build().unwrap(),
        SpringParams::explicit(Q::ONE, Q::ONE, q(43, 50), q(17, 20), q(1, 20)).unwrap()
    );

    let frac = ParamSpec::fractions(Q::ONE, Q::ONE, q(43, 50), q(17, 20), q(1, 3));
    let text = serde_json::to_string(&frac).unwrap();
    assert_eq!(serde_json::from_str::<ParamSpec>(&text).unwrap(), frac);
    assert!(frac.build().is_ok());
    let mixed = ParamSpec { d: Some(q(1, 2)), ..frac };
    assert!(mixed.build().is_err());

    let partial: ScenarioConfig = serde_json::from_str(r#"{"n_periods": 3}"#).unwrap();
    assert_eq!(partial, ScenarioConfig { n_periods: 3, ..ScenarioConfig::default() });
    assert!(serde_json::from_str::<ScenarioConfig>(r#"{"n_period": 3}"#).is_err());
    let c: CurveSpec =
        serde_json::from_str(r#"{"kind": "rate_latency", "rate": {"n": 3, "d": 1}, "latency": {"n": 1, "d": 2}}"#)
            .unwrap();
    assert_eq!(c, CurveSpec::RateLatency { rate: Q::int(3), latency: q(1, 2) });
}

#[test]
fn spring_reports_growth_and_exact_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path());
    let o = run_command(Command::Spring, &cfg).unwrap();
    assert_eq!(o.verdict, Verdict::Pass);
    let rep = read_json(&dir.path().join("spring.json"));
    assert_eq!(rational(&rep["details"]["growth"]["increment"]), q(7, 10));

    let one = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig { n_periods: 1, ..config_in(one.path()) };
    run_command(Command::Spring, &cfg).unwrap();
    let mut rd = csv::Reader::from_path(one.path().join("spring_trace.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    let departures: Vec<Q> = rows.iter().map(|r| q(r[3].parse().unwrap(), r[4].parse().unwrap())).collect();
    assert_eq!(departures, [170, 270, 270, 370, 370, 470].map(|x| q(x, 100)));
    let arrivals: Vec<Q> = rows.iter().map(|r| q(r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert_eq!(arrivals, [170, 185, 190, 290, 295, 395].map(|x| q(x, 100)));

    let mut rd = csv::Reader::from_path(one.path().join("spring_figure.csv")).unwrap();
    let series: Vec<String> = rd.records().map(|r| r.unwrap()[0].to_string()).collect();
    for s in ["input", "output", "arrival_curve", "strict_service_curve"] {
        assert!(series.iter().any(|x| x == s), "missing {s}");
    }
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let cfg = ScenarioConfig { equivalence_count: 200, strict_sc_count: 20, ..config_in(d.path()) };
        assert_eq!(run_command(Command::ReportAll, &cfg).unwrap().verdict, Verdict::Violation);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
    let all = read_json(&a.path().join("report_all.json"));
    assert_eq!(all["spring"], "pass");
    assert_eq!(all["strict-sc"], "pass");
    assert_eq!(all["equivalence"], "pass");
    assert_eq!(all["overdrive"], "violation");
}

#[test]
fn subcommand_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path());
    assert_eq!(run_command(Command::Overdrive, &cfg).unwrap().exit_code(), EXIT_VIOLATION);
    let rep = read_json(&dir.path().join("overdrive.json"));
    let w = &rep["witness"];
    assert!(rational(&w["lhs"]) < rational(&w["rhs"]));

    run_command(Command::Xm, &cfg).unwrap();
    let rep = read_json(&dir.path().join("xm.json"));
    assert!(rational(&rep["details"]["experiment"]["measured_delay"]) >= Q::int(10));
    assert_eq!(rational(&rep["details"]["candidates"][0]["refuted_at"]), q(3, 2));

    run_command(Command::Residual, &cfg).unwrap();
    let rep = read_json(&dir.path().join("residual.json"));
    let flags: Vec<bool> = rep["details"]["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["report"]["flagged"].as_bool().unwrap())
        .collect();
    assert_eq!(flags, vec![true, false, false]);

    let ok = ScenarioConfig { seed: 42, equivalence_count: 10_000, ..config_in(dir.path()) };
    assert_eq!(run_command(Command::Equivalence, &ok).unwrap().exit_code(), EXIT_PASS);
    let rep = read_json(&dir.path().join("equivalence.json"));
    assert_eq!(rep["details"]["mismatches"].as_array().unwrap().len(), 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = ScenarioConfig {
        params: ParamSpec::explicit(Q::ONE, Q::ONE, q(43, 50), q(17, 20), q(1, 2)),
        ..config_in(dir.path())
    };
    let path = dir.path().join("bad.json");
    fs::write(&path, serde_json::to_string(&bad).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(main_with_args(["atsnc", "spring", "--config", p]), EXIT_USAGE);
    assert_eq!(main_with_args(["atsnc", "bogus"]), EXIT_USAGE);
    assert_eq!(main_with_args(["atsnc", "xm", "--M", "x"]), EXIT_USAGE);
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(main_with_args(["atsnc", "spring", "--out", o, "--periods", "4"]), EXIT_PASS);

    let bin = env!("CARGO_BIN_EXE_atsnc");
    let run = Proc::new(bin).args(["overdrive", "--out", o]).output().unwrap();
    assert_eq!(run.status.code(), Some(EXIT_VIOLATION));
    assert_eq!(main_with_args(["atsnc", "prop2", "--out", o]), EXIT_VIOLATION);
    let run = Proc::new(bin).args(["spring", "--print-config", "--M", "21/2", "--seed", "7"]).output().unwrap();
    assert_eq!(run.status.code(), Some(EXIT_PASS));
    let cfg: ScenarioConfig = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!((cfg.m, cfg.seed), (q(21, 2), 7));
    let run = Proc::new(bin).args(["spring", "--config", p]).output().unwrap();
    assert_eq!(run.status.code(), Some(EXIT_USAGE));
}
