use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ortho3r"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ortho3r-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn geometry_file(name: &str, body: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn arm(name: &str, p: [f64; 5]) -> PathBuf {
    geometry_file(
        name,
        &format!(r#"{{"d2":{},"d3":{},"r2":{},"r3":{},"d4":{}}}"#, p[0], p[1], p[2], p[3], p[4]),
    )
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn classify_reports_labels() {
    let out = run(bin().arg("classify").arg(arm("a1.json", [0.0, 2.0, 1.0, 0.0, 1.5])));
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["type_label"], "A1");
    assert!(v["computed"].is_null());

    let out = run(bin().arg("classify").arg(arm("generic.json", [1.0, 3.0, 2.0, 0.0, 4.0])));
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["type_label"], "GENERIC_R3ZERO");
    assert!(v["table1"].is_null());
}

#[test]
fn bad_input_exits_two() {
    let negative = arm("neg.json", [0.0, 2.0, 1.0, 0.0, -1.0]);
    let corrupt = geometry_file("corrupt.json", r#"{"d2": 0, "d3": "#);
    for sub in ["classify", "analyze", "validate"] {
        for file in [&negative, &corrupt] {
            let out = run(bin().arg(sub).arg(file));
            assert_eq!(out.status.code(), Some(2), "{sub} {}", file.display());
            assert!(!out.stderr.is_empty());
        }
    }
    let out = run(bin().arg("classify").arg(scratch("missing.json")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_writes_identical_json_and_svg() {
    let geom = arm("j.json", [1.0, 0.0, 0.0, 1.0, 2.0]);
    let (json, svg) = (scratch("j_report.json"), scratch("j.svg"));
    let out = run(bin().arg("analyze").arg(&geom).arg("--json").arg(&json).arg("--svg").arg(&svg));
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read(&json).unwrap();
    assert_eq!(written, out.stdout);
    let v = stdout_json(&out);
    assert_eq!(v["type_label"], "J");
    assert_eq!(v["computed"]["n_voids"], 1);
    assert_eq!(v["computed"]["n_nodes_offaxis"], 0);
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("#6E6E6E"));

    let again = run(bin().arg("analyze").arg(&geom));
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn analyze_flags_override_resolution() {
    let geom = arm("b1.json", [0.0, 2.0, 0.0, 0.0, 1.0]);
    let out = run(bin().arg("analyze").arg(&geom).arg("--grid").arg("360").arg("--raster").arg("400"));
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["config"]["grid_n"], 360);
    assert_eq!(v["config"]["raster_n"], 400);
    let out = run(bin().arg("analyze").arg(&geom).arg("--raster").arg("10"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv() {
    let csv = scratch("b.csv");
    let out = run(bin().args([
        "sweep", "--x", "d3:0.2:3:12", "--y", "d4:0.25:3.05:10", "--fixed", "d2=0", "r2=0", "r3=0", "--csv",
    ])
    .arg(&csv));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,label,on_transition");
    assert_eq!(lines.len(), 1 + 120);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 domains"));
}

#[test]
fn sweep_rejects_bad_ranges() {
    for args in [
        "--x d3:3:0.2:12 --y d4:0.2:4:10 --fixed d2=0 r2=0 r3=0",
        "--x d3:0.2:3:12 --y d3:0.2:4:10 --fixed d2=0 r2=0 r3=0",
        "--x d3:0.2:3:12 --y d4:0.2:4:10 --fixed d2=0 r2=0",
        "--x d3:0.2:3:0 --y d4:0.2:4:10 --fixed d2=0 r2=0 r3=0",
        "--x q:0.2:3:5 --y d4:0.2:4:10 --fixed d2=0 r2=0 r3=0",
    ] {
        let out = run(bin().arg("sweep").args(args.split(' ')));
        assert_eq!(out.status.code(), Some(2), "{args}");
    }
}

#[test]
fn validate_binary_type() {
    let out = run(bin()
        .arg("validate")
        .arg(arm("d6.json", [1.0, 0.7, 0.0, 0.0, 0.5]))
        .args(["--samples", "100", "--seed", "7"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS binary: max_ik = 2"), "{text}");
}

#[test]
fn validate_reference_arm() {
    let out = run(bin()
        .arg("validate")
        .arg(arm("reference.json", [1.0, 3.0, 2.0, 0.0, 4.0]))
        .args(["--samples", "200", "--seed", "7"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}
