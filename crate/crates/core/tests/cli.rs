//! End-to-end tests of the command-line interface: output formats, exit
//! codes, and reproducibility.

mod support;

use std::process::{Command, Output};

use iseval_core::cards::{CanonicalHand, Deck};

fn iseval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iseval"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn parse_mean(line: &str) -> f64 {
    line.split_whitespace()
        .find_map(|field| field.strip_prefix("mean="))
        .expect("mean field")
        .parse()
        .expect("mean parses")
}

#[test]
fn rank_command_formats_hands() {
    let royal = iseval(&["rank", "--cards", "AsKsQsJsTs"]);
    assert_eq!(exit_code(&royal), 0);
    assert_eq!(stdout(&royal).trim(), "StraightFlush [A]");

    let seven = iseval(&["rank", "--cards", "AsAdKcKhKd2s3d"]);
    assert_eq!(exit_code(&seven), 0);
    assert_eq!(stdout(&seven).trim(), "FullHouse [K,A]");

    let six = iseval(&["rank", "--cards", "AsKsQsJsTs2d"]);
    assert_eq!(exit_code(&six), 2);

    let garbage = iseval(&["rank", "--cards", "1xKsQsJsTs"]);
    assert_eq!(exit_code(&garbage), 2);
}

#[test]
fn equity_mc_k1_prints_an_outcome_and_repeats_exactly() {
    let args = [
        "equity", "--hand", "AA", "--mode", "mc", "--k", "1", "--seed", "7",
    ];
    let first = iseval(&args);
    assert_eq!(exit_code(&first), 0);
    let mean = parse_mean(&stdout(&first));
    assert!([0.0, 0.5, 1.0].contains(&mean), "mean {mean}");

    let second = iseval(&args);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn equity_exact_on_reduced_deck_matches_naive_enumeration() {
    let output = iseval(&[
        "equity", "--hand", "AA", "--mode", "exact", "--deck", "short:5",
    ]);
    assert_eq!(exit_code(&output), 0);
    let mean = parse_mean(&stdout(&output));
    let deck = Deck::with_ranks(5).unwrap();
    let hole = CanonicalHand::parse("AA", &deck).unwrap();
    assert_eq!(mean, support::naive_exact_equity(hole, &deck));
    assert!(stdout(&output).contains("exact=true"));
}

#[test]
fn equity_exact_full_deck_requires_confirmation() {
    let refused = iseval(&["equity", "--hand", "AA", "--mode", "exact"]);
    assert_eq!(exit_code(&refused), 2);
    let message = String::from_utf8_lossy(&refused.stderr).to_string();
    assert!(message.contains("--confirm-long"), "{message}");
    assert!(message.contains("2.1e9"), "{message}");
}

#[test]
fn mc_command_is_shorthand_for_equity_mc() {
    let via_mc = iseval(&["mc", "--hand", "T9o", "--k", "100", "--seed", "3"]);
    let via_equity = iseval(&[
        "equity", "--hand", "T9o", "--mode", "mc", "--k", "100", "--seed", "3",
    ]);
    assert_eq!(exit_code(&via_mc), 0);
    assert_eq!(stdout(&via_mc), stdout(&via_equity));
}

#[test]
fn table_writes_csv_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let output = iseval(&[
        "table", "--deck", "short:5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("hand,equity,exact,samples\n"));
    assert_eq!(text.lines().count(), 26); // header + 25 classes
    let sidecar = dir.path().join("table.csv.meta.json");
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sidecar).unwrap()).unwrap();
    assert_eq!(meta["deck"], "short:5");
    assert_eq!(meta["mode"], "exact");
    assert!(meta["content_hash"].is_string());
}

#[test]
fn gen_respects_budget_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dataset.csv");
    let output = iseval(&[
        "gen",
        "--budget", "10",
        "--k", "3",
        "--provider", "poker",
        "--deck", "short:5",
        "--seed", "5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4); // header + floor(10/3) examples
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("dataset.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["evaluations_consumed"], 9);
    assert_eq!(meta["provider"], "poker:short:5");
}

#[test]
fn gen_synthetic_provider_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dataset.csv");
    let output = iseval(&[
        "gen",
        "--budget", "20",
        "--k", "2",
        "--provider", "synthetic:0,1;0,0.5,1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn train_runs_on_a_reduced_deck_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let dataset = dir.path().join("dataset.csv");
    let model = dir.path().join("model.json");
    let trajectory = dir.path().join("trajectory.csv");

    assert_eq!(
        exit_code(&iseval(&[
            "table", "--deck", "short:5", "--out", table.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        exit_code(&iseval(&[
            "gen",
            "--budget", "4000",
            "--k", "2",
            "--deck", "short:5",
            "--seed", "11",
            "--out", dataset.to_str().unwrap(),
            "--table", table.to_str().unwrap(),
        ])),
        0
    );
    let output = iseval(&[
        "train",
        "--dataset", dataset.to_str().unwrap(),
        "--table", table.to_str().unwrap(),
        "--deck", "short:5",
        "--hidden", "8",
        "--max-updates", "300",
        "--eval-every", "50",
        "--out", model.to_str().unwrap(),
        "--trajectory", trajectory.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    assert!(stdout(&output).contains("best_mae="));
    assert!(trajectory.exists());
    let trajectory_text = std::fs::read_to_string(&trajectory).unwrap();
    assert!(trajectory_text.starts_with("updates,evaluations,mae,mse\n"));
    // The checkpoint reloads into the library.
    let (mlp, _config) = iseval_core::regressor::Mlp::load(&model).unwrap();
    assert_eq!(mlp.input_dim(), 25);
}

#[test]
fn sweep_smoke_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    assert_eq!(
        exit_code(&iseval(&[
            "table", "--deck", "short:5", "--out", table.to_str().unwrap()
        ])),
        0
    );
    let out = dir.path().join("sweep");
    let output = iseval(&[
        "sweep",
        "--budget", "1000",
        "--ks", "1,3",
        "--seeds", "0",
        "--deck", "short:5",
        "--table", table.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
        "--max-updates", "100",
        "--update-budget", "100",
        "--eval-every", "20",
        "--hidden", "8",
    ]);
    assert_eq!(exit_code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let by_k = std::fs::read_to_string(out.join("summary_by_k.csv")).unwrap();
    assert_eq!(by_k.lines().count(), 3); // header + one row per k
    assert!(out.join("summary.csv").exists());
    assert!(out.join("long.csv").exists());
    assert!(out.join("trajectory_k0001_seed0.csv").exists());
    assert!(stdout(&output).contains("k,n,median_best_mae_evalaxis"));
}

#[test]
fn sweep_without_table_points_at_table_command() {
    let dir = tempfile::tempdir().unwrap();
    let output = iseval(&[
        "sweep",
        "--budget", "100",
        "--ks", "1",
        "--seeds", "0",
        "--table", dir.path().join("nope.csv").to_str().unwrap(),
        "--out", dir.path().join("sweep").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("iseval table"));
}

#[test]
fn sweep_unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    assert_eq!(
        exit_code(&iseval(&[
            "table", "--deck", "short:5", "--out", table.to_str().unwrap()
        ])),
        0
    );
    // A file where a directory is required: creation fails with an I/O
    // error regardless of process privileges.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, b"not a directory").unwrap();
    let output = iseval(&[
        "sweep",
        "--budget", "100",
        "--ks", "1",
        "--seeds", "0",
        "--deck", "short:5",
        "--table", table.to_str().unwrap(),
        "--out", blocker.join("sweep").to_str().unwrap(),
        "--max-updates", "20",
        "--update-budget", "20",
        "--eval-every", "10",
        "--hidden", "4",
    ]);
    assert_eq!(exit_code(&output), 4);
}

#[test]
fn gradcheck_passes_at_default_tolerance() {
    let output = iseval(&["gradcheck", "--layers", "27,8,1", "--seed", "3"]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("max_relative_error="));
}

#[test]
fn profile_error_prints_per_k_mae() {
    let output = iseval(&[
        "profile-error",
        "--holes", "AA,KQs",
        "--ks", "1,4",
        "--trials", "400",
        "--deck", "short:5",
        "--seed", "2",
    ]);
    assert_eq!(exit_code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    assert!(text.starts_with("k,trials,mean_abs_error\n"), "{text}");
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn unknown_flags_are_rejected() {
    let output = iseval(&["rank", "--cards", "AsKsQsJsTs", "--bogus"]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn commands_print_resolved_config_with_seed() {
    let output = iseval(&["mc", "--hand", "AA", "--k", "5", "--seed", "42"]);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("config:"), "{stderr}");
    assert!(stderr.contains("seed: 42"), "{stderr}");
}

#[test]
fn gen_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (name, workers) in [("a.csv", "1"), ("b.csv", "4")] {
        let out = dir.path().join(name);
        let status = iseval(&[
            "gen",
            "--workers", workers,
            "--budget", "5000",
            "--k", "2",
            "--deck", "short:6",
            "--seed", "13",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&status), 0);
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn out_dir_env_var_provides_default_output_location() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_iseval"))
        .env("ISEVAL_OUT_DIR", dir.path())
        .args(["table", "--deck", "short:5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(dir.path().join("preflop_equity.csv").exists());
}
