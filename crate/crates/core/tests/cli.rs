use std::process::{Command, Output};

use mmfree::report::{parse_json, ModelTable, SimulationSet, SweepGrid};

fn mmfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmfree"))
        .args(args)
        .env_remove("MMFREE_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn models_listing() {
    let o = mmfree(&["models"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = text
        .lines()
        .filter(|l| l.starts_with("| ") && !l.starts_with("| model") && !l.starts_with("| ---"))
        .count();
    assert_eq!(rows, 13);
    assert!(text
        .lines()
        .any(|l| l.contains("opt-66b") && l.contains("WARN")));

    let o = mmfree(&["models", "--format", "json", "--no-timestamp"]);
    let doc = parse_json::<ModelTable>(&stdout(&o)).unwrap();
    assert_eq!(doc.payload.models.len(), 13);
    assert!(doc.generated_at.is_none());
}

#[test]
fn simulate_reports_fraction() {
    let o = mmfree(&[
        "simulate", "--model", "opt-1.3b", "--seqlen", "2048", "--hw", "cloud", "--format", "json",
    ]);
    assert!(o.status.success());
    let doc = parse_json::<SimulationSet>(&stdout(&o)).unwrap();
    assert!(doc.generated_at.is_some());
    assert_eq!(doc.hardware.unwrap().rows, 256);
    let r = &doc.payload.reports[0];
    assert!((r.f_compute - 0.50).abs() <= 0.10);
    assert_eq!(r.per_op.len(), 70);

    let o = mmfree(&[
        "simulate", "--model", "opt-350m", "--seqlen", "2048", "--metric", "memory", "--format",
        "json",
    ]);
    let doc = parse_json::<SimulationSet>(&stdout(&o)).unwrap();
    assert!((doc.payload.reports[0].f_memory - 0.74).abs() <= 0.12);
}

#[test]
fn simulate_projection_cycles_ignore_seqlen() {
    let o = mmfree(&[
        "simulate", "--model", "opt-350m", "--seqlen", "128", "--seqlen", "4096", "--format",
        "json",
    ]);
    let doc = parse_json::<SimulationSet>(&stdout(&o)).unwrap();
    let r = &doc.payload.reports;
    assert_eq!(r.len(), 2);
    assert_eq!(
        r[0].projection.compute_cycles,
        r[1].projection.compute_cycles
    );
    assert!(r[1].attention.compute_cycles > r[0].attention.compute_cycles);
}

#[test]
fn simulate_warns_on_uneven_heads_and_scales_layers() {
    let o = mmfree(&[
        "simulate", "--model", "opt-66b", "--seqlen", "2048", "--layers", "64",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("d mod h = 20"));
    assert!(stdout(&o).contains("whole model (64 blocks)"));
}

#[test]
fn usage_errors() {
    for args in [
        &["simulate", "--model", "opt-9000", "--seqlen", "128"][..],
        &["simulate", "--model", "opt-350m", "--seqlen", "64"],
        &[
            "simulate",
            "--model",
            "opt-350m",
            "--seqlen",
            "128",
            "--hw",
            "missing.toml",
        ],
        &["sweep", "--model", ""],
        &["amdahl", "--model", "opt-350m", "--s-max", "0"],
        &["footprint", "--model", "opt-350m", "--precision", "fp4"],
        &["frobnicate"],
    ] {
        let o = mmfree(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn sweep_csv_shape() {
    let o = mmfree(&[
        "sweep", "--model", "opt-350m", "--model", "opt-1.3b", "--seqlen", "128", "--seqlen",
        "2048", "--format", "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "seqlen,opt-350m,opt-1.3b");
    assert!(lines[2]
        .split(',')
        .skip(1)
        .all(|c| c.split('.').nth(1).unwrap().len() == 4));
    assert!(
        o.stderr.is_empty(),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn sweep_writes_to_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mmfree"))
        .args([
            "sweep",
            "--hw",
            "edge",
            "--format",
            "json",
            "--out",
            "grids/edge.json",
        ])
        .env("MMFREE_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("grids/edge.json")).unwrap();
    let doc = parse_json::<SweepGrid>(&text).unwrap();
    assert_eq!(doc.payload.hardware, "edge");
    assert_eq!(doc.payload.cells.len(), 6);
    assert_eq!(doc.payload.models.len(), 7);
}

#[test]
fn custom_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let hw = dir.path().join("tiny.toml");
    std::fs::write(
        &hw,
        "rows = 16\ncols = 16\ndataflow = \"ws\"\nsram_input_bytes = 65536\nsram_output_bytes = 65536\nsram_weight_bytes = 262144\nelement_bytes = 1\n",
    )
    .unwrap();
    let model = dir.path().join("toy.toml");
    std::fs::write(
        &model,
        "name = \"toy\"\nd = 512\nh = 8\nd_ff = 2048\nseqlen_min = 64\nseqlen_max = 1024\n",
    )
    .unwrap();

    let o = mmfree(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--seqlen",
        "256",
        "--hw",
        hw.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = parse_json::<SimulationSet>(&stdout(&o)).unwrap();
    let hwc = doc.hardware.unwrap();
    assert_eq!(
        (hwc.name.as_str(), hwc.rows, hwc.element_bytes),
        ("tiny", 16, 1)
    );
    assert_eq!(doc.payload.reports[0].model, "toy");
    assert_eq!(doc.payload.reports[0].per_op.len(), 22);

    std::fs::write(&model, "name = \"toy\"\nd = 0\nh = 8\nd_ff = 2048\n").unwrap();
    let o = mmfree(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--seqlen",
        "256",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn amdahl_curves_document() {
    let o = mmfree(&[
        "amdahl", "--model", "opt-66b", "--seqlen", "2048", "--format", "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 101);
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(last[0], 100.0);
    assert!(last[1] > 5.0 * last[2]);

    let o = mmfree(&[
        "amdahl", "--model", "opt-350m", "--s-max", "1", "--format", "csv",
    ]);
    assert_eq!(
        stdout(&o),
        "s_partial,projections,attention\n1,1.000000,1.000000\n"
    );
}

#[test]
fn dataflows_table() {
    let o = mmfree(&[
        "dataflows",
        "--model",
        "llama-7b",
        "--seqlen",
        "4096",
        "--hw",
        "edge",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    let totals: Vec<u64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(totals[0] <= totals[1] && totals[0] <= totals[2]);
    let md = stdout(&mmfree(&["dataflows", "--model", "llama-7b"]));
    assert!(md.contains("best: os"));
}

#[test]
fn validate_full_sweep() {
    let o = mmfree(&["validate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("shapes checked: 12288"));
    assert!(stdout(&o).contains("mismatches: 0"));

    let o = mmfree(&["validate", "--inject-cycle-offset", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatches: 12288"));
}

#[test]
fn footprint_report() {
    let o = mmfree(&[
        "footprint",
        "--model",
        "opt-350m",
        "--layers",
        "24",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("fp16,16,25165824,603979776,1\n"));
    assert!(text.contains("ternary,2,3145728,75497472,8\n"));
    assert!(text.contains("binary,1,1572864,37748736,16\n"));
}

#[test]
fn identical_invocations_identical_bytes() {
    let args = [
        "simulate",
        "--model",
        "gpt-125m",
        "--seqlen",
        "512",
        "--format",
        "json",
        "--no-timestamp",
    ];
    assert_eq!(mmfree(&args).stdout, mmfree(&args).stdout);
}
