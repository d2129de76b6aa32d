use std::path::Path;
use std::process::Command;

fn scpg() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_scpg"));
    c.env("RUST_LOG", "warn");
    c
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn print_config_dumps_resolved_toml() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"swim_basic\"\nduration = 2.0\n");
    let out = scpg().args(["run"]).arg(&cfg).args(["--seed", "9", "--print-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("duration = 2.0"));
    assert!(text.contains("seed = 9"));
    assert!(text.contains("[body.pd]"));
    // the dump is itself a complete config
    let again = write_config(dir.path(), &text);
    let out = scpg().args(["run"]).arg(&again).arg("--print-config").output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}

#[test]
fn invalid_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"swim_basic\"\nduration = -3.0\n");
    let out = scpg().args(["run"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration"));

    let cfg = write_config(dir.path(), "scenario = \"swim_basic\"\nunknown_key = 1\n");
    assert_eq!(scpg().args(["run"]).arg(&cfg).output().unwrap().status.code(), Some(2));

    let out = scpg().args(["run", "x.toml", "--backend", "quantum"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"isolated_cpg\"\nduration = 1.0\nideal_method = \"euler\"\n[network.cpg]\namplitude_gain = 1.0e6\n",
    );
    let out = scpg().args(["run"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("diverged at t ="), "{err}");
}

#[test]
fn run_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"swim_basic\"\nduration = 1.5\n");
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = scpg().args(["run"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(out_dir);
    }
    for file in ["psi.csv", "oscillators.csv", "drive.csv", "trajectory.csv"] {
        let a = std::fs::read(outputs[0].join(file)).unwrap();
        let b = std::fs::read(outputs[1].join(file)).unwrap();
        assert!(a == b, "{file} differs between runs");
    }
    let psi = std::fs::read_to_string(outputs[0].join("psi.csv")).unwrap();
    let lines: Vec<&str> = psi.lines().collect();
    assert_eq!(lines.len(), 1 + 1500);
    assert_eq!(lines[0].split(',').count(), 9);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outputs[0].join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "swim_basic");
    for entry in report["manifest"].as_array().unwrap() {
        assert!(Path::new(entry["path"].as_str().unwrap()).exists());
    }
}

#[test]
fn preset_lists_every_scenario() {
    for s in [
        "isolated_cpg",
        "swim_basic",
        "swim_neuron_sweep",
        "swim_steered",
        "barrier_open_loop",
        "barrier_steered",
        "perturbation",
        "asymmetric_drive",
    ] {
        let out = scpg().args(["preset", s]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8(out.stdout).unwrap().contains(&format!("scenario = \"{s}\"")));
    }
    assert_eq!(scpg().args(["preset", "nope"]).output().unwrap().status.code(), Some(2));
}
