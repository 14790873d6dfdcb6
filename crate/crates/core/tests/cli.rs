use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use knot_morse::cli::{cmd_perturb, cmd_surfaces, run_analysis, KnotSpec, RunConfig, RunReport};
use knot_morse::morse::MorseError;

const CIRCLE: &str = "[knot]\nbuiltin = \"circle\"\nparams = [1.0]\n";

fn knot_morse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knot-morse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_circle_writes_report_and_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "circle.toml", CIRCLE);
    let out = dir.path().join("run");
    let result = knot_morse(&["analyze", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
    assert!(String::from_utf8_lossy(&result.stdout).contains("Morse code (0,1)"));

    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.morse_code.genera, [0, 1]);
    assert_eq!(report.critical_points.len(), 1);
    assert!(report.verification.all_passed());
    for i in 0..2 {
        assert!(out.join("meshes").join(format!("surface_{i}.obj")).is_file());
    }
}

#[test]
fn no_mesh_skips_obj_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "circle.toml", CIRCLE);
    let out = dir.path().join("run");
    let result = knot_morse(&[
        "--threads",
        "2",
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--no-mesh",
    ]);
    assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
    assert!(out.join("report.json").is_file());
    assert!(!out.join("meshes").exists());
}

#[test]
fn malformed_toml_exits_with_2_and_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.toml", "[knot]\nbuiltin = \"circle\"\n[surface\n");
    for command in ["analyze", "critical"] {
        let result = knot_morse(&[command, "--config", config.to_str().unwrap()]);
        assert_eq!(result.status.code(), Some(2));
        assert!(stderr(&result).contains("line 3"), "{}", stderr(&result));
    }
    let missing = dir.path().join("missing.toml");
    assert_eq!(knot_morse(&["critical", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn degenerate_critical_point_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "degenerate.toml", &format!("{CIRCLE}[search]\ndegenerate_tol = 0.9\n"));
    let result = knot_morse(&["critical", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    assert!(stderr(&result).contains("degenerate"), "{}", stderr(&result));
}

#[test]
fn critical_prints_one_row_for_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "circle.toml", CIRCLE);
    let result = knot_morse(&["critical", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));
    let text = String::from_utf8_lossy(&result.stdout);
    assert!(text.contains("6.2831853072"), "{text}");
    assert!(text.contains("1 point(s), m = 1, n = 0"));
}

#[test]
fn surfaces_refuses_critical_levels_and_meshes_regular_ones() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "circle.toml", CIRCLE);
    let out = dir.path().join("levels");
    let outcome = cmd_surfaces(&config, &[6.0], Some(&out), false).unwrap();
    assert_eq!(outcome.surfaces[0].topology.genera(), [0]);
    assert_eq!(outcome.mesh_paths, [out.join("meshes").join("level_6.obj")]);

    let result = knot_morse(&[
        "surfaces",
        "--config",
        config.to_str().unwrap(),
        "--levels",
        "6.283185307179586",
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("6.28"), "{}", stderr(&result));

    let trefoil = write_config(dir.path(), "trefoil.toml", "[knot]\nbuiltin = \"paper_trefoil\"\n");
    let v1 = 12.789535027;
    let err = cmd_surfaces(&trefoil, &[v1], None, true).err().unwrap();
    assert!(matches!(err, knot_morse::cli::CliError::Morse(MorseError::NotRegular { .. })), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn reruns_give_identical_reports() {
    let mut config = RunConfig::new(KnotSpec::builtin("circle", &[1.0]));
    config.output.write_meshes = false;
    let (a, _) = run_analysis(&config).unwrap();
    let (b, _) = run_analysis(&config).unwrap();
    assert_eq!(a.without_timings().to_json(), b.without_timings().to_json());

    config.search.rng_seed = 12345;
    let (c, _) = run_analysis(&config).unwrap();
    assert_eq!(c.morse_code, a.morse_code);
}

#[test]
fn perturb_writes_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "trefoil.toml", "[knot]\nbuiltin = \"paper_trefoil\"\n");
    let out = dir.path().join("perturbed");
    let outcome = cmd_perturb(&config, 0.05, 42, Some(&out)).unwrap();
    let path = outcome.path.unwrap();
    assert_eq!(path, out.join("trefoil_perturbed.toml"));
    let loaded = RunConfig::load(&path).unwrap();
    assert!(loaded.knot.expression.is_some());
    assert_eq!(loaded.knot, outcome.config.knot);

    let printed = knot_morse(&["perturb", "--config", config.to_str().unwrap(), "--amplitude", "0.05"]);
    assert_eq!(printed.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&printed.stdout), outcome.text);
}

#[test]
fn zero_amplitude_leaves_the_analysis_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "circle.toml", CIRCLE);
    let outcome = cmd_perturb(&config, 0.0, 9, None).unwrap();
    let mut base = RunConfig::load(&config).unwrap();
    let mut same = outcome.config;
    base.output.write_meshes = false;
    same.output.write_meshes = false;
    let (a, _) = run_analysis(&base).unwrap();
    let (b, _) = run_analysis(&same).unwrap();
    assert_eq!(a.critical_points, b.critical_points);
    assert_eq!(a.morse_code, b.morse_code);
    assert_eq!(a.surfaces, b.surfaces);
}

#[test]
fn bad_amplitudes_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "trefoil.toml", "[knot]\nbuiltin = \"paper_trefoil\"\n");
    let negative = knot_morse(&["perturb", "--config", config.to_str().unwrap(), "--amplitude", "-1"]);
    assert_eq!(negative.status.code(), Some(2));

    // a displacement of 10 dwarfs the knot; it may still be regular, but
    // if it is not the failure must be reported, not written
    let out = dir.path().join("big");
    let huge = knot_morse(&[
        "perturb",
        "--config",
        config.to_str().unwrap(),
        "--amplitude",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    match huge.status.code() {
        Some(0) => assert!(out.join("trefoil_perturbed.toml").is_file()),
        Some(3) => {
            assert!(stderr(&huge).contains("smaller amplitude"), "{}", stderr(&huge));
            assert!(!out.join("trefoil_perturbed.toml").exists());
        }
        other => panic!("unexpected exit {other:?}: {}", stderr(&huge)),
    }
}

#[test]
fn unwritable_output_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "circle.toml", CIRCLE);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let result = knot_morse(&["analyze", "--config", config.to_str().unwrap(), "--out", blocker.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(4), "{}", stderr(&result));
}
