use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tagspectra::synth::ari;

fn tagspectra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tagspectra"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_labels(path: &Path, column: &str) -> Vec<(String, usize)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == column).unwrap();
    let mut rows: Vec<(String, usize)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[idx].parse().unwrap())
        })
        .collect();
    rows.sort();
    rows
}

const SMALL: &str = "user\tresource\ttags\n\
                     u1\tr1\ta,b\n\
                     u2\tr1\ta\n\
                     u1\tr2\tb,c\n\
                     u3\tr3\tc,d\n";

#[test]
fn gamma_out_of_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("posts.tsv");
    fs::write(&input, SMALL).unwrap();
    let out_dir = dir.path().join("out");
    for cmd in ["run", "similarity"] {
        for gamma in ["0", "-0.5", "1.5"] {
            let out = tagspectra(&[cmd, "--input", p(&input), "--gamma", gamma, "--out-dir", p(&out_dir)]);
            assert_eq!(code(&out), 2, "{cmd} --gamma {gamma}");
        }
    }
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("posts.jsonl");
    fs::write(
        &input,
        "{\"user\": \"u1\", \"resource\": \"r1\", \"tags\": [\"a\"]}\n{not json\n",
    )
    .unwrap();
    let out = tagspectra(&["run", "--input", p(&input), "--out-dir", p(&dir.path().join("out"))]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tagspectra(&[
        "run",
        "--input",
        p(&dir.path().join("absent.tsv")),
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&tagspectra(&["run"])), 2);
    assert_eq!(code(&tagspectra(&["frobnicate"])), 2);
    assert_eq!(code(&tagspectra(&["--help"])), 0);
}

#[test]
fn noiseless_synth_then_run_recovers_communities() {
    let dir = tempfile::tempdir().unwrap();
    let synth_dir = dir.path().join("synth");
    let out = tagspectra(&[
        "synth",
        "--communities",
        "3",
        "--resources",
        "20",
        "--vocab-size",
        "15",
        "--shared-size",
        "5",
        "--taggings",
        "8",
        "--noise",
        "0",
        "--users",
        "50",
        "--seed",
        "3",
        "--out-dir",
        p(&synth_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out_dir = dir.path().join("out");
    let out = tagspectra(&[
        "run",
        "--input",
        p(&synth_dir.join("posts.jsonl")),
        "--out-dir",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let truth = read_labels(&synth_dir.join("ground_truth.csv"), "community");
    let found = read_labels(&out_dir.join("assignment.csv"), "community");
    assert_eq!(
        truth.iter().map(|r| &r.0).collect::<Vec<_>>(),
        found.iter().map(|r| &r.0).collect::<Vec<_>>()
    );
    let a: Vec<usize> = truth.iter().map(|r| r.1).collect();
    let b: Vec<usize> = found.iter().map(|r| r.1).collect();
    assert_eq!(ari(&a, &b).unwrap(), 1.0);

    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["k"], 3);
    assert_eq!(summary["zero_eigenvalues"], 3);
}

#[test]
fn forced_k_gives_that_many_report_sections() {
    let dir = tempfile::tempdir().unwrap();
    let synth_dir = dir.path().join("synth");
    let out = tagspectra(&[
        "synth",
        "--communities",
        "4",
        "--resources",
        "100",
        "--taggings",
        "20",
        "--seed",
        "8",
        "--out-dir",
        p(&synth_dir),
    ]);
    assert_eq!(code(&out), 0);
    let out_dir = dir.path().join("out");
    let out = tagspectra(&[
        "run",
        "--input",
        p(&synth_dir.join("posts.jsonl")),
        "--k",
        "6",
        "--out-dir",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let html = fs::read_to_string(out_dir.join("report.html")).unwrap();
    assert_eq!(html.matches("<section class=\"community\"").count(), 6);
}

#[test]
fn stage_commands_reproduce_the_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let synth_dir = dir.path().join("synth");
    assert_eq!(
        code(&tagspectra(&[
            "synth",
            "--resources",
            "15",
            "--seed",
            "2",
            "--out-dir",
            p(&synth_dir)
        ])),
        0
    );
    let input = synth_dir.join("posts.jsonl");

    let full = dir.path().join("full");
    assert_eq!(
        code(&tagspectra(&["run", "--input", p(&input), "--out-dir", p(&full)])),
        0
    );

    let sim = dir.path().join("sim");
    assert_eq!(
        code(&tagspectra(&["similarity", "--input", p(&input), "--out-dir", p(&sim)])),
        0
    );
    for name in [
        "similarity_raw.csv",
        "similarity.csv",
        "similarity.fsm",
        "histogram.csv",
    ] {
        assert_eq!(
            fs::read(sim.join(name)).unwrap(),
            fs::read(full.join(name)).unwrap(),
            "{name}"
        );
    }

    for matrix in ["similarity.csv", "similarity.fsm"] {
        let spec_dir = dir.path().join(format!("spec-{matrix}"));
        let out = tagspectra(&["spectrum", "--matrix", p(&sim.join(matrix)), "--out-dir", p(&spec_dir)]);
        assert_eq!(code(&out), 0);
        for name in ["spectrum.csv", "eigenvectors.csv"] {
            assert_eq!(
                fs::read(spec_dir.join(name)).unwrap(),
                fs::read(full.join(name)).unwrap(),
                "{name}"
            );
        }
    }

    let before = fs::read(full.join("report.html")).unwrap();
    fs::remove_file(full.join("report.html")).unwrap();
    assert_eq!(code(&tagspectra(&["report", "--out-dir", p(&full)])), 0);
    assert_eq!(fs::read(full.join("report.html")).unwrap(), before);

    assert_eq!(
        code(&tagspectra(&["report", "--out-dir", p(&dir.path().join("nothing"))])),
        4
    );
}
