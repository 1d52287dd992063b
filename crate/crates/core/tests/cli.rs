use std::path::Path;
use std::process::{Command, Output};

fn epitrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epitrace")).args(args).output().expect("spawn epitrace")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn empty_check_list_exits_zero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "e.json", r#"{"checks": [], "output": {"report": "r.json"}}"#);
    let out = epitrace(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(rep["checks"].as_array().unwrap().len(), 0);
    assert_eq!(rep["passed"], true);
}

#[test]
fn unknown_check_is_a_parse_error_with_position() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "u.json", "{\n  \"checks\": [\"constants\",\n    \"volume\"]\n}\n");
    let out = epitrace(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("column") && err.contains("volume"), "{err}");
}

#[test]
fn unreadable_config_exits_two() {
    assert_eq!(epitrace(&["run", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn hypothesis_violation_is_reported_per_check() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "p.json",
        r#"{"domain": {"kind": "half_space"}, "params": {"n": 2, "p": 3, "a": 2},
            "checks": ["constants", "trace_gn"], "output": {"report": "r.json"}}"#,
    );
    let out = epitrace(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("r.json")).unwrap()).unwrap();
    for c in rep["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], false);
        assert!(c["error"].as_str().unwrap().contains("n > p > 1"), "{c}");
    }
}

#[test]
fn failing_assertion_exits_one_and_others_still_run() {
    let d = tempfile::tempdir().unwrap();
    // the paraboloid is not a cone, so the trace check errors while the constants check passes
    let cfg = write(
        d.path(),
        "f.json",
        r#"{"domain": {"kind": "paraboloid", "params": [1.0]}, "params": {"n": 2, "p": 1.5, "a": 2.5},
            "checks": ["trace_gn", "derived_gap"], "output": {"report": "r.json"}}"#,
    );
    let out = epitrace(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("r.json")).unwrap()).unwrap();
    let checks = rep["checks"].as_array().unwrap();
    assert_eq!(checks[0]["passed"], false);
    assert!(checks[1]["error"].is_null(), "{}", checks[1]);
}

#[test]
fn reruns_are_identical_and_curves_have_headers() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"domain": {"kind": "cone", "params": [1.0]}, "params": {"n": 2, "p": 1.5, "a": 2.5, "h": [0.1, 0.05]},
        "checks": ["appendix_limit", "trace_gn", "hj_quotient", "equivalence_scan"],
        "quadrature": {"box": 4.0, "resolution": 25, "levels": 2, "step": 0.2},
        "output": {"report": "REPORT", "curves": "curves"}}"#;
    let a = write(d.path(), "a.json", &cfg.replace("REPORT", "a.json.out"));
    let b = write(d.path(), "b.json", &cfg.replace("REPORT", "b.json.out"));
    assert_eq!(epitrace(&["run", &a]).status.code(), Some(0));
    assert_eq!(epitrace(&["run", &b]).status.code(), Some(0));
    let ra = std::fs::read(d.path().join("a.json.out")).unwrap();
    assert_eq!(ra, std::fs::read(d.path().join("b.json.out")).unwrap());

    let head = |f: &str| std::fs::read_to_string(d.path().join("curves").join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(head("appendix_limit_appendix.csv"), "h,term_i,term_ii,term_iii,residual");
    assert_eq!(head("trace_gn_refinement.csv"), "dx,abs_ratio_minus_one");
    assert_eq!(head("equivalence_scan_phi.csv"), "h,phi,error");

    let out_dir = d.path().join("again");
    let out = epitrace(&["curves", d.path().join("a.json.out").to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for f in ["appendix_limit_appendix.csv", "trace_gn_refinement.csv", "equivalence_scan_phi.csv"] {
        assert_eq!(std::fs::read(out_dir.join(f)).unwrap(), std::fs::read(d.path().join("curves").join(f)).unwrap());
    }
}

#[test]
fn suite_rejects_unknown_criterion() {
    assert_eq!(epitrace(&["suite", "paper", "--only", "99"]).status.code(), Some(2));
}

#[test]
fn grid_file_fixture_resolves_relative_paths() {
    use epitrace::fixtures::ExtremalPair;
    use epitrace::quad::QuadSpec;
    use epitrace::{BblParams, EpigraphDomain, NormSpec};
    let d = tempfile::tempdir().unwrap();
    let dom = EpigraphDomain::half_space(2);
    let params = BblParams::new(2, 3.0, 1.5).unwrap();
    let pair = ExtremalPair::new(&dom, &NormSpec::Euclidean, &params, &QuadSpec::default()).unwrap();
    let (g, w) = pair.sample(&dom, 6.0, 25, None).unwrap();
    std::fs::create_dir(d.path().join("grids")).unwrap();
    for (name, f) in [("g.grid", &g), ("w.grid", &w)] {
        let mut out = Vec::new();
        epitrace::extgrid::write_grid(f, &mut out).unwrap();
        std::fs::write(d.path().join("grids").join(name), out).unwrap();
    }
    let cfg = write(
        d.path(),
        "g.json",
        r#"{"domain": {"kind": "half_space"}, "params": {"n": 2, "p": 1.5, "a": 3.0, "h": [0.5]},
            "fixture": {"kind": "grid_file", "g": "grids/g.grid", "w": "grids/w.grid"},
            "checks": ["bbl_gap"], "output": {"report": "r.json"}}"#,
    );
    let out = epitrace(&["run", &cfg]);
    assert!(out.status.code().is_some());
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("r.json")).unwrap()).unwrap();
    assert!(rep["checks"][0]["error"].is_null(), "{}", rep["checks"][0]);
    let direct = epitrace::bblcheck::bbl_gap(&g, &w, &params.with_h(0.5).unwrap(), None).unwrap();
    assert_eq!(rep["checks"][0]["result"][0]["gap"].as_f64().unwrap(), direct.gap);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "json") {
            epitrace::cli::ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
