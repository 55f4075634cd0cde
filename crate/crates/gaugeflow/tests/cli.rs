use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaugeflow"))
}

#[test]
fn list_names_every_scenario() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "vacuum_plane_wave",
        "sourced_oscillating_charge",
        "static_charge_equilibrium",
        "particle_constant_B",
        "particle_nonclosed_field_jacobi",
        "su2_pure_gauge",
        "chart_equivalence_su2",
    ] {
        assert!(text.contains(name), "{name} missing from list output");
    }
}

#[test]
fn check_then_run_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("static.toml");
    std::fs::write(
        &cfg,
        "scenario = \"static_charge_equilibrium\"\n[grid]\ndims = [8, 8, 8]\n",
    )
    .unwrap();

    let out = bin().arg("check").arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let results = dir.path().join("results");
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--output-dir")
        .arg(&results)
        .arg("--steps")
        .arg("40")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("status: PASS"), "{text}");
    assert!(text.contains("steps: 40"), "{text}");
    assert!(results.join("fields.csv").is_file());
    assert!(results.join("e_final.snap").is_file());
}

#[test]
fn shipped_configs_all_validate() {
    let configs = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        seen += 1;
        let out = bin().arg("check").arg(&path).output().unwrap();
        assert!(
            out.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert!(seen >= 8, "expected the shipped config set, found {seen}");
}

#[test]
fn unknown_scenario_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "scenario = \"does_not_exist\"\n").unwrap();
    let out = bin().arg("check").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown scenario"), "{err}");
}

#[test]
fn unstable_dt_exits_naming_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wave.toml");
    std::fs::write(&cfg, "scenario = \"vacuum_plane_wave\"\n").unwrap();
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--dt")
        .arg("100")
        .arg("--output-dir")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("stable range"), "{err}");
}

#[test]
fn missing_config_names_the_path() {
    let out = bin()
        .arg("check")
        .arg("no/such/file.toml")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no/such/file.toml"), "{err}");
}
