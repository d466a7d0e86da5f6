//! End-to-end runs of the real binary: each test spawns the compiled
//! executable and checks stdout plus the exit-code contract (0 success,
//! 1 failure, 2 usage error).

use std::path::Path;
use std::process::{Command, Output};

fn mdload(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdload"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn assert_code(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// A small container most tests share: 2 experiments, trimmed logs/events.
fn generate_small(dir: &Path, name: &str) {
    let out = mdload(
        dir,
        &[
            "generate",
            "--experiments",
            "2",
            "--logs",
            "3",
            "--events",
            "40",
            "--out",
            name,
        ],
    );
    assert_code(&out, 0);
}

#[test]
fn census_of_a_ten_experiment_file_prints_the_expected_total() {
    let dir = tempfile::tempdir().unwrap();
    let out = mdload(
        dir.path(),
        &["generate", "--experiments", "10", "--out", "t.nxp"],
    );
    assert_code(&out, 0);
    assert!(stdout_of(&out).contains("11000 entries"));

    let out = mdload(dir.path(), &["inspect", "t.nxp", "--census"]);
    assert_code(&out, 0);
    let text = stdout_of(&out);
    let total_line = text
        .lines()
        .find(|l| l.starts_with("total"))
        .expect("census prints a total line");
    assert!(total_line.contains("11000"), "got: {total_line}");
}

#[test]
fn index_listing_is_tab_separated_and_sorted() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), "t.nxp");

    let out = mdload(dir.path(), &["inspect", "t.nxp", "--index"]);
    assert_code(&out, 0);
    let text = stdout_of(&out);

    let mut classes = Vec::new();
    for line in text.lines() {
        let (class, path) = line.split_once('\t').expect("class<TAB>path lines");
        assert!(path.starts_with('/'), "paths are absolute: {path}");
        classes.push(class.to_owned());
    }
    let mut sorted = classes.clone();
    sorted.sort();
    assert_eq!(classes, sorted, "classes appear in sorted order");
    assert!(text.contains("NXlog\t/MDEventWorkspace/experiment0/logs/"));
    assert!(text.contains("SDS\t/MDEventWorkspace/coordinate_system"));
}

#[test]
fn both_load_modes_report_the_same_digest_and_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), "t.nxp");

    let digest_line = |mode: &str| {
        let out = mdload(dir.path(), &["load", "t.nxp", "--mode", mode]);
        assert_code(&out, 0);
        stdout_of(&out)
            .lines()
            .find(|l| l.starts_with("digest "))
            .expect("load prints the digest")
            .to_owned()
    };
    assert_eq!(digest_line("naive"), digest_line("indexed"));

    // --verify runs both patterns itself, so it needs no --mode.
    let out = mdload(dir.path(), &["load", "t.nxp", "--verify"]);
    assert_code(&out, 0);
    assert!(stdout_of(&out).contains("digests match"));

    let out = mdload(
        dir.path(),
        &["load", "t.nxp", "--mode", "indexed", "--verify"],
    );
    assert_code(&out, 0);
    assert!(stdout_of(&out).contains("digests match"));
}

#[test]
fn slice_writes_a_parsable_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), "t.nxp");

    let out = mdload(
        dir.path(),
        &[
            "slice",
            "t.nxp",
            "--dims",
            "0,3",
            "--bins",
            "8x5",
            "--range",
            "-10.5:10.5,-20.5:80.5",
            "--out",
            "grid.csv",
        ],
    );
    assert_code(&out, 0);

    let text = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let mut lines = text.lines();
    assert!(
        lines.next().unwrap().starts_with('#'),
        "comment header first"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5, "one CSV row per y bin");
    let mut total = 0.0f64;
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 8, "one cell per x bin");
        for cell in cells {
            total += cell.parse::<f64>().expect("cells are numbers");
        }
    }
    assert!(total > 0.0, "the full-domain window catches every event");
}

#[test]
fn bench_writes_csv_or_json_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let out = mdload(
        dir.path(),
        &[
            "generate",
            "--experiments",
            "1",
            "--logs",
            "2",
            "--events",
            "10",
            "--out",
            "tiny.nxp",
        ],
    );
    assert_code(&out, 0);

    let out = mdload(
        dir.path(),
        &[
            "bench",
            "tiny.nxp",
            "--reps",
            "2",
            "--warmup",
            "1",
            "--out",
            "report.csv",
        ],
    );
    assert_code(&out, 0);
    assert!(stdout_of(&out).contains("median"));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with(
        "mode,rep,wall_ms,phase_index_ms,phase_meta_ms,phase_event_ms,entries_visited,buffer_allocations"
    ));

    let out = mdload(
        dir.path(),
        &[
            "bench",
            "tiny.nxp",
            "--reps",
            "2",
            "--warmup",
            "1",
            "--out",
            "report.json",
        ],
    );
    assert_code(&out, 0);
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(
        value.get("summaries").is_some(),
        "JSON report carries summaries"
    );
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), "t.nxp");

    assert_code(&mdload(dir.path(), &["frobnicate"]), 2);
    assert_code(&mdload(dir.path(), &["generate", "--experiments", "1"]), 2);
    assert_code(
        &mdload(dir.path(), &["load", "t.nxp", "--mode", "telepathic"]),
        2,
    );
    // Without --verify, a mode is mandatory.
    assert_code(&mdload(dir.path(), &["load", "t.nxp"]), 2);
    assert_code(
        &mdload(
            dir.path(),
            &[
                "slice", "t.nxp", "--dims", "0,0", "--bins", "4x4", "--range", "0:1,0:1", "--out",
                "g.csv",
            ],
        ),
        2,
    );
    assert_code(
        &mdload(
            dir.path(),
            &["bench", "t.nxp", "--reps", "0", "--out", "r.csv"],
        ),
        2,
    );
}

#[test]
fn runtime_failures_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();

    assert_code(
        &mdload(dir.path(), &["load", "missing.nxp", "--mode", "naive"]),
        1,
    );

    std::fs::write(dir.path().join("garbage.nxp"), b"NXP1 but not really").unwrap();
    let out = mdload(dir.path(), &["inspect", "garbage.nxp"]);
    assert_code(&out, 1);
}

#[cfg(unix)]
#[test]
fn closing_the_output_pipe_early_is_not_a_crash() {
    use std::os::unix::process::ExitStatusExt;
    use std::process::Stdio;

    let dir = tempfile::tempdir().unwrap();
    // Ten experiments give thousands of index lines — far more than one
    // pipe buffer — so the writer must outlive the reader.
    let out = mdload(
        dir.path(),
        &[
            "generate",
            "--experiments",
            "10",
            "--events",
            "10",
            "--out",
            "t.nxp",
        ],
    );
    assert_code(&out, 0);

    let mut child = Command::new(env!("CARGO_BIN_EXE_mdload"))
        .args(["inspect", "t.nxp", "--index"])
        .current_dir(dir.path())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary should spawn");
    drop(child.stdout.take()); // the reader hangs up immediately
    let out = child.wait_with_output().expect("child should exit");

    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(!stderr.contains("panicked"), "stderr:\n{stderr}");
    assert_eq!(
        out.status.signal(),
        Some(13),
        "dies quietly by SIGPIPE, like any line-oriented tool"
    );
}

#[test]
fn help_and_version_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let help = mdload(dir.path(), &["--help"]);
    assert_code(&help, 0);
    assert!(stdout_of(&help).contains("generate"));
    assert_code(&mdload(dir.path(), &["--version"]), 0);
}
