//! Exit-code contract of the `uq` binary: 0 success, 1 validation error,
//! 2 IO/parse error, 3 training failure.

use std::process::Command;

fn uq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uq"))
}

fn write(path: &std::path::Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn success_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tiny.csv");
    let status = uq()
        .args([
            "synth",
            "--out",
            csv.to_str().unwrap(),
            "--samples",
            "20",
            "--input-dim",
            "9",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(csv.exists());
}

#[test]
fn validation_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    write(&config, "samples = 0\n");
    let status = uq()
        .args([
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // A dataset path that does not exist is caught at validation time.
    let config = dir.path().join("missing_data.toml");
    write(
        &config,
        "[dataset]\nkind = \"ferplus\"\npath = \"/nonexistent/x.csv\"\n",
    );
    let status = uq()
        .args(["sweep", "--config", config.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn io_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();

    // Missing config file.
    let status = uq()
        .args(["sweep", "--config", "/nonexistent/config.toml"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Malformed dataset row.
    let csv = dir.path().join("broken.csv");
    write(
        &csv,
        "usage,pixels,neutral,happiness,surprise,sadness,anger,disgust,fear,contempt,unknown,NF\n\
         Training,0 0 0 0,1,2\n",
    );
    let config = dir.path().join("broken.toml");
    write(
        &config,
        &format!(
            "[dataset]\nkind = \"ferplus\"\npath = \"{}\"\n",
            csv.display()
        ),
    );
    let status = uq()
        .args([
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn training_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("diverge.toml");
    // A step size at the edge of the float range overflows the parameters
    // within a few updates; the refused step surfaces as a training error.
    write(
        &config,
        r#"
            samples = 2

            [dataset]
            kind = "synthetic"
            num_samples = 100
            num_classes = 4
            input_dim = 4
            flip_rate = 0.1

            [model]
            hidden_dims = [8]

            [training]
            optimizer = "sgd"
            learning_rate = 1e308
            epochs = 3
        "#,
    );
    let status = uq()
        .args([
            "train",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
            "--method",
            "ensemble",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn unknown_method_is_a_usage_error() {
    // Flag value parsing is clap's domain; its usage errors exit 2.
    let status = uq().args(["sweep", "--method", "bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
