use std::process::Command;

fn lblab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lblab"))
}

#[test]
fn run_writes_csv_with_hash_header() {
    let dir = tempfile::tempdir().unwrap();
    let status = lblab()
        .args([
            "run",
            "--opt",
            "saga",
            "--iters",
            "10",
            "--seeds",
            "3",
            "--eta-grid",
            "3",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("run_saga.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "k,err_mean,err_stderr,worst_eta");
    assert_eq!(lines.count(), 11);
}

#[test]
fn config_errors_exit_with_three_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "[experiment]\nfamily = \"fsm\"\noptimizers = [\"adam\"]\n",
    )
    .unwrap();
    let out = lblab()
        .args(["run", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("adam"), "{err}");
}

#[test]
fn bad_flag_values_are_config_errors() {
    let out = lblab()
        .args(["run", "--family", "rlm", "--n", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn envelope_exit_code_reflects_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.toml");
    // A prefactor far above the achievable error forces violations.
    std::fs::write(
        &path,
        "[experiment]\noptimizers = [\"sag\"]\niterations = 10\nseeds = 3\n[grid]\npoints = 3\n[envelope]\nprefactor = 1e6\n",
    )
    .unwrap();
    let out = lblab()
        .arg("envelope")
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = lblab()
        .args([
            "envelope",
            "--opt",
            "sag",
            "--iters",
            "10",
            "--seeds",
            "3",
            "--eta-grid",
            "3",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn thread_count_does_not_change_bytes() {
    let outputs: Vec<String> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let st = lblab()
                .env("LBLAB_THREADS", threads)
                .args([
                    "run",
                    "--opt",
                    "sgd",
                    "--iters",
                    "12",
                    "--seeds",
                    "5",
                    "--eta-grid",
                    "4",
                    "--out",
                ])
                .arg(dir.path())
                .status()
                .unwrap();
            assert!(st.success());
            std::fs::read_to_string(dir.path().join("run_sgd.csv")).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bad_thread_setting_is_a_config_error() {
    let out = lblab()
        .env("LBLAB_THREADS", "zero")
        .arg("bounds")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
