use std::fs;
use std::process::Command;

use burstkin::cli::{run_experiment, run_sweep, ExperimentConfig, Mode, SweepSpec};
use burstkin::par::Exec;

const NB: &str =
    "rate.form = constant\nrate.lambda0 = 1\ndegradation.gamma = 1\nburst.form = geometric\nburst.b = 0.5\n";

fn burstkin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_burstkin")).args(args).output().unwrap()
}

#[test]
fn stationary_discrete_writes_pmf_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse_for(NB, Mode::StationaryDiscrete).unwrap();
    let s = run_experiment(&cfg, dir.path(), Exec::Parallel).unwrap();
    assert_eq!(s.files, ["pmf.csv"]);
    assert!(s.scalars["closed_form_sup_diff"] < 1e-12);
    let csv = fs::read_to_string(dir.path().join("pmf.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,p"));
    assert_eq!(lines.next(), Some("0,2.5000000000000006e-1"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "stationary-discrete");
    // the recorded config reproduces the run
    let again = ExperimentConfig::parse(summary["config"].as_str().unwrap()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let out = dir.path().join("out").to_string_lossy().into_owned();

    let ok = write("ok.cfg", NB);
    assert_eq!(burstkin(&["stationary-discrete", "--config", &ok, "--out", &out]).status.code(), Some(0));

    let bad_b = write("bad.cfg", &NB.replace("0.5", "1.5"));
    let o = burstkin(&["stationary-discrete", "--config", &bad_b, "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("burst.b"));

    let typo = write("typo.cfg", &format!("{NB}rate.lamda0 = 1\n"));
    let o = burstkin(&["stationary-discrete", "--config", &typo, "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 6"));

    // p = (λ + bγ)/γ = 2: the negative binomial is not normalizable
    let sup =
        write("sup.cfg", &NB.replace("constant", "linear").replace("lambda0 = 1", "lambda0 = 1\nrate.lambda1 = 1.5"));
    assert_eq!(burstkin(&["stationary-discrete", "--config", &sup, "--out", &out]).status.code(), Some(2));

    let missing = dir.path().join("nope.cfg").to_string_lossy().into_owned();
    assert_eq!(burstkin(&["stationary-discrete", "--config", &missing, "--out", &out]).status.code(), Some(1));
}

#[test]
fn sweep_writes_points_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse_for(NB, Mode::StationaryDiscrete).unwrap();
    let spec: SweepSpec = "burst.b=0.2:0.8:4".parse().unwrap();
    let points = run_sweep(&cfg, &spec, dir.path(), Exec::Parallel).unwrap();
    assert_eq!(points.len(), 4);
    assert!(points.iter().all(|p| p.status == 0));
    for p in &points {
        assert!(p.dir.join("pmf.csv").exists());
    }
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("index,value,status,"));

    let bad: SweepSpec = "burst.b=0.5:1.0:2".parse().unwrap();
    let points = run_sweep(&cfg, &bad, &dir.path().join("b"), Exec::Sequential).unwrap();
    assert_eq!(points.iter().map(|p| p.status).collect::<Vec<_>>(), [0, 1]);

    assert!("burst.b=0.1:0.2".parse::<SweepSpec>().is_err());
    let unknown: SweepSpec = "burst.q=0.1:0.2:2".parse().unwrap();
    assert!(run_sweep(&cfg, &unknown, dir.path(), Exec::Sequential).is_err());
}

#[test]
fn every_mode_runs_from_a_minimal_config() {
    let cont = "rate.form = constant\nrate.lambda0 = 2\ndegradation.gamma = 1\nburst.form = exponential\nburst.b = 1\n";
    let cases: [(Mode, String, &str); 9] = [
        (Mode::StationaryDiscrete, NB.to_string(), "pmf.csv"),
        (Mode::EvolveMaster, format!("{NB}numeric.n_max = 100\nnumeric.t_end = 5\n"), "trace.csv"),
        (Mode::SimulateDiscrete, format!("{NB}numeric.jumps = 1000\n"), "pmf.csv"),
        (Mode::Modes, NB.to_string(), "modes.csv"),
        (Mode::StationaryContinuous, cont.to_string(), "density.csv"),
        (Mode::SimulatePdmp, format!("{cont}numeric.jumps = 1000\n"), "trajectory.csv"),
        (Mode::KernelFixedPoint, format!("{cont}numeric.grid_knots = 128\n"), "post_jump.csv"),
        (Mode::InvertPhi, cont.to_string(), "phi.csv"),
        (Mode::Ergodicity, cont.to_string(), "margins.csv"),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (mode, text, file) in cases {
        let cfg = ExperimentConfig::parse_for(&text, mode).unwrap();
        let out = dir.path().join(mode.as_str());
        run_experiment(&cfg, &out, Exec::Parallel).unwrap_or_else(|e| panic!("{mode}: {e}"));
        assert!(out.join(file).exists(), "{mode}");
    }
    let cfg = ExperimentConfig::parse_for(cont, Mode::Modes).unwrap();
    let s = run_experiment(&cfg, &dir.path().join("cm"), Exec::Parallel).unwrap();
    assert_eq!(s.scalars["maxima"], 1.0);
    let text = fs::read_to_string(dir.path().join("cm/modes.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x_root,kind"));
    assert!(text.lines().nth(1).unwrap().ends_with(",max"));
}
