//! End-to-end tests of the `geolingua` binary: exit codes, file round-trips
//! and artifact determinism. All runs are offline; formalization goes
//! through `--mock`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_geolingua"));
    // Hermetic environment: no ambient credentials or config.
    for var in [
        "GEOLINGUA_API_KEY",
        "GEOLINGUA_BASE_URL",
        "GEOLINGUA_MODEL",
        "GEOLINGUA_CONFIG",
        "GEOLINGUA_ALPHA",
        "GEOLINGUA_INNER",
        "GEOLINGUA_OUTER",
        "GEOLINGUA_RESTARTS",
        "GEOLINGUA_SEED",
    ] {
        cmd.env_remove(var);
    }
    cmd
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("geolingua-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

const SQUARE: &str = "shapes:\nSquare(ABCD)\nlength constraint:\nConnectPoints(AC)\nangle constraint:\nAngle(BAC,45)\n";
const VALID_JSON: &str = r#"{"shapes":["Polygon(ABC)"],"dependence":[],"length constraint":[],"angle constraint":["Angle(ABC,60)"]}"#;

#[test]
fn solve_render_eval_pipeline() {
    let dir = tempdir("pipeline");
    let program = dir.join("square.geo");
    write(&program, SQUARE);

    let solution = dir.join("square.solution.json");
    let status = run(bin()
        .args(["solve"])
        .arg(&program)
        .args(["--seed", "11", "-o"])
        .arg(&solution));
    assert!(status.status.success(), "{status:?}");
    assert!(solution.exists());

    let svg = dir.join("square.svg");
    let status = run(bin().args(["render"]).arg(&solution).arg("-o").arg(&svg));
    assert!(status.status.success());
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg "));
    assert_eq!(svg_text.matches("<path").count(), 5); // 4 sides + diagonal

    let report = dir.join("square.report.json");
    let status = run(bin()
        .args(["eval"])
        .arg(&program)
        .arg(&solution)
        .arg("-o")
        .arg(&report));
    assert!(status.status.success());
    let report_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report_json["schema_version"], 1);
    assert!(report_json["adi"].as_f64().unwrap().abs() < 1e-9);

    // The recomputed per-constraint scores equal the stored ones.
    let solution_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&solution).unwrap()).unwrap();
    assert_eq!(report_json["per_constraint"], solution_json["scores"]);
}

#[test]
fn solve_is_deterministic_across_runs_and_jobs() {
    let dir = tempdir("determinism");
    let program = dir.join("square.geo");
    write(&program, SQUARE);

    let mut outputs = Vec::new();
    for (tag, jobs) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let solution = dir.join(format!("{tag}.solution.json"));
        let svg = dir.join(format!("{tag}.svg"));
        assert!(run(bin()
            .args(["solve"])
            .arg(&program)
            .args(["--seed", "99", "--jobs", jobs, "-o"])
            .arg(&solution))
        .status
        .success());
        assert!(run(bin().args(["render"]).arg(&solution).arg("-o").arg(&svg))
            .status
            .success());
        outputs.push((std::fs::read(&solution).unwrap(), std::fs::read(&svg).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1], "same-seed runs must be byte-identical");
    assert_eq!(outputs[0], outputs[2], "thread count must not change artifacts");
}

#[test]
fn compile_errors_exit_4() {
    let dir = tempdir("compile-err");
    let bad_parse = dir.join("bad.geo");
    write(&bad_parse, "shapes:\nBlob(X)\n");
    assert_eq!(run(bin().args(["solve"]).arg(&bad_parse)).status.code(), Some(4));

    let bad_validate = dir.join("invalid.geo");
    write(&bad_validate, "shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABC,200)\n");
    assert_eq!(run(bin().args(["solve"]).arg(&bad_validate)).status.code(), Some(4));

    let bad_compile = dir.join("quad.geo");
    write(&bad_compile, "shapes:\nPolygon(ABCD)\nCircumscribedPolygon(O,ABCD)\n");
    let out = run(bin().args(["solve"]).arg(&bad_compile));
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported construction"));
}

#[test]
fn strict_nonconvergence_exits_5() {
    let dir = tempdir("strict");
    let program = dir.join("unsat.geo");
    write(
        &program,
        "shapes:\nPolygon(ABC)\nlength constraint:\nLengthRatio(AB,AB,Ratio(2,1))\n",
    );
    let out = run(bin()
        .args(["solve"])
        .arg(&program)
        .args(["--strict", "--inner", "50", "--outer", "20", "--restarts", "1"]));
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn render_of_empty_diagram_exits_6() {
    let dir = tempdir("empty");
    let solution = dir.join("empty.solution.json");
    write(
        &solution,
        r#"{
  "schema_version": 1, "converged": true, "final_loss": 0.0, "alpha": 0.05, "seed": 0,
  "assignment": [], "points": {},
  "diagram": {"points": [], "segments": [], "circles": [], "arcs": [], "labels": []},
  "scores": {"entries": [], "degeneracy_penalized": []},
  "degenerate_points": [],
  "telemetry": {"outer_iterations": [], "evaluations": 0, "winning_restart": 0, "trace": []}
}"#,
    );
    assert_eq!(run(bin().args(["render"]).arg(&solution)).status.code(), Some(6));
}

#[test]
fn formalize_exit_codes() {
    let dir = tempdir("formalize");
    let natural = dir.join("problem.txt");
    write(&natural, "Triangle ABC with a 60 degree angle at B.\n");

    // Valid response on the first attempt.
    let ok_mock = dir.join("ok.json");
    write(&ok_mock, &serde_json::to_string(&[VALID_JSON]).unwrap());
    let program_out = dir.join("program.json");
    let out = run(bin()
        .args(["formalize"])
        .arg(&natural)
        .arg("--mock")
        .arg(&ok_mock)
        .arg("-o")
        .arg(&program_out));
    assert!(out.status.success(), "{out:?}");
    let written = std::fs::read_to_string(&program_out).unwrap();
    assert!(written.contains("Polygon(ABC)"));

    // Exhausted filter.
    let bad_mock = dir.join("bad.json");
    write(
        &bad_mock,
        &serde_json::to_string(&["nope", "still nope", "{\"shapes\": []}"]).unwrap(),
    );
    let out = run(bin()
        .args(["formalize"])
        .arg(&natural)
        .arg("--mock")
        .arg(&bad_mock)
        .arg("--audit")
        .arg(dir.join("audit.json")));
    assert_eq!(out.status.code(), Some(2));
    let audit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("audit.json")).unwrap()).unwrap();
    assert_eq!(audit["attempts"].as_array().unwrap().len(), 3);

    // All-network failure.
    let net_mock = dir.join("net.json");
    write(
        &net_mock,
        r#"[{"error":"refused"},{"error":"refused"},{"error":"refused"}]"#,
    );
    let out = run(bin().args(["formalize"]).arg(&natural).arg("--mock").arg(&net_mock));
    assert_eq!(out.status.code(), Some(3));

    // No credential and no mock.
    let out = run(bin().args(["formalize"]).arg(&natural));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("GEOLINGUA_API_KEY"));
}

#[test]
fn run_pipeline_from_program() {
    let dir = tempdir("run-program");
    let program = dir.join("square.geo");
    write(&program, SQUARE);
    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["run"])
        .arg(&program)
        .arg("--out-dir")
        .arg(&out_dir)
        .args(["--seed", "4"]));
    assert!(out.status.success(), "{out:?}");
    for artifact in ["program.json", "solution.json", "report.json", "diagram.svg", "trace.csv", "manifest.json"] {
        assert!(out_dir.join(artifact).exists(), "{artifact} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["mode"], "program");
    assert_eq!(manifest["exit_status"], 0);
    let stages: Vec<&str> = manifest["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(stages, ["compile", "solve", "eval", "render"]);

    // Artifacts are reproducible run to run (manifest timings excluded).
    let out_dir2 = dir.join("out2");
    assert!(run(bin()
        .args(["run"])
        .arg(&program)
        .arg("--out-dir")
        .arg(&out_dir2)
        .args(["--seed", "4"]))
    .status
    .success());
    for artifact in ["program.json", "solution.json", "report.json", "diagram.svg", "trace.csv"] {
        assert_eq!(
            std::fs::read(out_dir.join(artifact)).unwrap(),
            std::fs::read(out_dir2.join(artifact)).unwrap(),
            "{artifact} differs between identical runs"
        );
    }
}

#[test]
fn run_writes_manifest_on_stage_failure() {
    let dir = tempdir("run-fail");
    let program = dir.join("bad.geo");
    write(&program, "shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABD,60)\n");
    let out_dir = dir.join("out");
    let out = run(bin().args(["run"]).arg(&program).arg("--out-dir").arg(&out_dir));
    assert_eq!(out.status.code(), Some(4));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["exit_status"], 4);
    let stages = manifest["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 1);
    assert_eq!(stages[0]["name"], "compile");
    assert_eq!(stages[0]["ok"], false);
}

#[test]
fn run_pipeline_from_natural_language() {
    let dir = tempdir("run-natural");
    let natural = dir.join("problem.txt");
    write(&natural, "Triangle ABC with a 60 degree angle at B.\n");
    let mock = dir.join("mock.json");
    write(&mock, &serde_json::to_string(&[VALID_JSON]).unwrap());
    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["run"])
        .arg(&natural)
        .arg("--out-dir")
        .arg(&out_dir)
        .arg("--mock")
        .arg(&mock)
        .args(["--seed", "4"]));
    assert!(out.status.success(), "{out:?}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["mode"], "natural");
    let stages: Vec<&str> = manifest["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(stages, ["formalize", "compile", "solve", "eval", "render"]);
    assert!(out_dir.join("audit.json").exists());
}

#[test]
fn batch_solve_handles_multiple_inputs() {
    let dir = tempdir("batch");
    let a = dir.join("a.geo");
    let b = dir.join("b.geo");
    write(&a, SQUARE);
    write(&b, "shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABC,60)\n");
    let out = run(bin()
        .args(["solve"])
        .arg(&a)
        .arg(&b)
        .args(["--jobs", "2", "--seed", "5"]));
    assert!(out.status.success(), "{out:?}");
    assert!(dir.join("a.solution.json").exists());
    assert!(dir.join("b.solution.json").exists());

    // Batch output, being derived per input, matches the single-file run.
    let single = dir.join("single.solution.json");
    assert!(run(bin()
        .args(["solve"])
        .arg(&a)
        .args(["--seed", "5", "-o"])
        .arg(&single))
    .status
    .success());
    assert_eq!(
        std::fs::read(dir.join("a.solution.json")).unwrap(),
        std::fs::read(&single).unwrap()
    );
}

#[test]
fn config_precedence_flags_over_env_over_file() {
    let dir = tempdir("config");
    let program = dir.join("square.geo");
    write(&program, SQUARE);
    let config = dir.join("config.toml");
    write(&config, "seed = 1\nrestarts = 2\nalpha = 0.01\n");

    // File value applies...
    let solution = dir.join("file.solution.json");
    assert!(run(bin()
        .args(["solve"])
        .arg(&program)
        .arg("--config")
        .arg(&config)
        .arg("-o")
        .arg(&solution))
    .status
    .success());
    let file_run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&solution).unwrap()).unwrap();
    assert_eq!(file_run["seed"], 1);
    assert_eq!(file_run["alpha"], 0.01);

    // ...environment overrides the file...
    let solution_env = dir.join("env.solution.json");
    assert!(run(bin()
        .args(["solve"])
        .arg(&program)
        .arg("--config")
        .arg(&config)
        .env("GEOLINGUA_SEED", "7")
        .arg("-o")
        .arg(&solution_env))
    .status
    .success());
    let env_run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&solution_env).unwrap()).unwrap();
    assert_eq!(env_run["seed"], 7);

    // ...and flags override everything.
    let solution_flag = dir.join("flag.solution.json");
    assert!(run(bin()
        .args(["solve"])
        .arg(&program)
        .arg("--config")
        .arg(&config)
        .env("GEOLINGUA_SEED", "7")
        .args(["--seed", "13"])
        .arg("-o")
        .arg(&solution_flag))
    .status
    .success());
    let flag_run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&solution_flag).unwrap()).unwrap();
    assert_eq!(flag_run["seed"], 13);
}
