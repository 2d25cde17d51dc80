use std::fs;
use std::path::PathBuf;
use std::process::Command;

use nqcc::runner::{
    emit_report, load_report, run_scenario, verify_dir, ChooseNeuronParams, Overrides,
    RunnerError, ScenarioConfig, ScenarioParams,
};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn nqcc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nqcc"))
}

#[test]
fn every_shipped_scenario_passes() {
    let (report, _) = verify_dir(&scenarios(), Overrides::default()).unwrap();
    assert!(report.entries.len() >= 8);
    for e in &report.entries {
        assert!(e.passed, "{e:?}");
    }
    let names: Vec<_> = report.entries.iter().map(|e| e.name.clone().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn choose_neuron_two_targets_seed_42() {
    let config = ScenarioConfig::new(
        "n2",
        Some(42),
        100_000,
        ScenarioParams::ChooseNeuron(ChooseNeuronParams { targets: 2, sigmas: 3.0 }),
    );
    let report = run_scenario(&config).unwrap();
    let rate = report.statistics.iter().find(|s| s.name == "coupling_rate").unwrap();
    assert!((0.746..=0.754).contains(&rate.value), "{}", rate.value);
    assert!(report.passed);
}

#[test]
fn report_reloads_to_equal_value() {
    let config = ScenarioConfig::load(&scenarios().join("evolve-couplings.toml")).unwrap();
    let report = run_scenario(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/report.json");
    emit_report(&report, &path).unwrap();
    assert_eq!(load_report(&path).unwrap(), report);
}

#[test]
fn overrides_replace_seed_and_trials() {
    let (report, _) = verify_dir(&scenarios(), Overrides { seed: Some(99), trials: Some(10) }).unwrap();
    let cnot = report.reports.iter().find(|r| r.scenario.name == "cnot-equivalence").unwrap();
    assert_eq!(cnot.scenario.seed, Some(99));
    assert_eq!(cnot.scenario.trials, 10);
}

#[test]
fn missing_directory_is_an_io_error() {
    assert!(matches!(
        verify_dir(&scenarios().join("does-not-exist"), Overrides::default()),
        Err(RunnerError::Io { .. })
    ));
}

#[test]
fn cli_verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name).join("verify.json");
        let run = nqcc().arg("verify").arg(scenarios()).arg("--out").arg(&out).output().unwrap();
        assert!(run.status.success());
        fs::read(out).unwrap()
    };
    assert_eq!(run("a"), run("b"));
    assert!(dir.path().join("a/cnot-equivalence.truth-11.jsonl").exists());
}

#[test]
fn cli_exit_status_follows_checks() {
    let dir = tempfile::tempdir().unwrap();
    let failing = dir.path().join("failing.toml");
    fs::write(
        &failing,
        "name = \"bad-period\"\nkind = \"Ladder\"\n[params]\nrungs = 12\nskips = [3, 2]\nexpected_period = 5\n",
    )
    .unwrap();
    let out = nqcc().arg("run").arg(&failing).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL expected_period"));

    let invalid = dir.path().join("invalid.toml");
    fs::write(&invalid, "name = \"x\"\nkind = \"ChooseNeuron\"\nseed = 1\n[params]\ntargets = 0\n").unwrap();
    let out = nqcc().arg("run").arg(&invalid).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.targets"));

    let out = nqcc().arg("verify").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_run_writes_report_and_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cnot.json");
    let run = nqcc()
        .args(["run", "--trials", "20", "--out"])
        .arg(&out)
        .arg(scenarios().join("cnot-equivalence.toml"))
        .output()
        .unwrap();
    assert!(run.status.success());
    let report = load_report(&out).unwrap();
    assert_eq!(report.scenario.trials, 20);
    for t in &report.transcripts {
        let text = fs::read_to_string(dir.path().join(&t.file)).unwrap();
        assert_eq!(text.lines().count(), 4 + t.steps);
    }
}

#[test]
fn cli_worksheet_prints_table() {
    let out = nqcc().arg("worksheet").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for q in ["threshold_voltage", "frohlich_modules", "compressed_qubits"] {
        assert!(text.contains(q), "{q} missing");
    }
}
