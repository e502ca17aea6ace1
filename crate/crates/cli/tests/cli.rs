//! End-to-end checks of the installed binary: exit codes, determinism of
//! emitted CSV, and the report formats of the single-instance solves.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tworelay"))
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("tworelay-cli-test-{}-{name}", std::process::id()));
    p
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const TINY_CONFIG: &str = r#"
budgets_dbw = [10.0]
realizations = 2
seed = 7
modes = ["maximin", "oneway_energy_efficiency"]
epsilon = 1e-3

[[scenarios]]
pairs = 1
relays = 1
antennas = 2
"#;

#[test]
fn sweep_repeats_byte_identically() {
    let cfg = temp_path("sweep.toml");
    std::fs::write(&cfg, TINY_CONFIG).unwrap();
    let out_a = temp_path("sweep-a.csv");
    let out_b = temp_path("sweep-b.csv");

    for out in [&out_a, &out_b] {
        let run = bin()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(run.status.success(), "stderr: {}", stderr(&run));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "repeated sweeps must emit identical bytes");

    let text = String::from_utf8(a).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "pairs,relays,antennas,budget_dbw,mode,metric,mean,stddev,n_success,mean_iterations"
    );
    // 2 modes x 4 metrics for the single cell
    assert_eq!(text.lines().count(), 1 + 2 * 4);

    for p in [&cfg, &out_a, &out_b] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn config_errors_exit_one_and_name_the_problem() {
    let cfg = temp_path("missing-field.toml");
    std::fs::write(&cfg, "realizations = 1\n").unwrap();
    let run = bin().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(
        stderr(&run).contains("scenarios"),
        "stderr must name the missing field: {}",
        stderr(&run)
    );
    let _ = std::fs::remove_file(&cfg);

    let run = bin()
        .args(["sweep", "--config", "/no/such/file.toml"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("cannot read"));

    let run = bin().args(["maximin", "--pairs", "0"]).output().unwrap();
    assert_eq!(run.status.code(), Some(1));

    let run = bin()
        .args(["sweep", "--config", "default", "--mode", "warp_drive"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("warp_drive"));
}

#[test]
fn unwritable_output_exits_two() {
    let cfg = temp_path("unwritable.toml");
    std::fs::write(&cfg, TINY_CONFIG).unwrap();
    let run = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--realizations", "1", "--out", "/no/such/dir/out.csv"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("cannot write"));
    let _ = std::fs::remove_file(&cfg);
}

#[test]
fn single_solves_report_and_honor_the_bits_flag() {
    let base = [
        "--pairs", "1", "--relays", "1", "--antennas", "2", "--budget-dbw", "10.0", "--seed",
        "5", "--epsilon", "1e-3",
    ];
    let grab = |text: &str, key: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(key))
            .unwrap_or_else(|| panic!("missing `{key}` in:\n{text}"))
            .split_whitespace()
            .rev()
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };

    let nats = bin().arg("maximin").args(base).output().unwrap();
    assert!(nats.status.success(), "stderr: {}", stderr(&nats));
    let nats_text = stdout(&nats);
    assert!(nats_text.contains("converged: true"));
    let v_nats = grab(&nats_text, "worst pair throughput:");

    let bits = bin().arg("maximin").args(base).arg("--bits").output().unwrap();
    let v_bits = grab(&stdout(&bits), "worst pair throughput:");
    let ratio = v_bits / v_nats;
    assert!(
        (ratio - std::f64::consts::LN_2.recip()).abs() < 1e-3,
        "bits/nats ratio {ratio}"
    );

    let ee = bin().arg("ee").args(base).output().unwrap();
    assert!(ee.status.success(), "stderr: {}", stderr(&ee));
    let ee_text = stdout(&ee);
    let floor = grab(&ee_text, "per-pair floor:");
    let worst = grab(&ee_text, "worst pair throughput:");
    assert!(
        worst >= floor - 1e-6,
        "floor {floor} not honored by worst throughput {worst}"
    );

    let ow = bin().arg("oneway").args(base).output().unwrap();
    assert!(ow.status.success(), "stderr: {}", stderr(&ow));
    let two_way_ee = grab(&ee_text, "energy efficiency:");
    let one_way_ee = grab(&stdout(&ow), "energy efficiency:");
    assert!(
        two_way_ee >= one_way_ee,
        "two-way efficiency {two_way_ee} below one-way {one_way_ee}"
    );

    let report = temp_path("maximin.txt");
    let run = bin()
        .arg("maximin")
        .args(base)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert!(run.status.success());
    assert!(stdout(&run).is_empty());
    // identical run, so everything but the wall-clock column matches
    let report_text = std::fs::read_to_string(&report).unwrap();
    assert!(report_text.contains("mode: fair throughput"));
    assert_eq!(grab(&report_text, "worst pair throughput:"), v_nats);
    let _ = std::fs::remove_file(&report);
}

#[test]
fn validate_passes_and_appends_a_summary() {
    let summary = temp_path("validate.csv");
    let _ = std::fs::remove_file(&summary);
    let run = bin()
        .args([
            "validate",
            "--samples",
            "300",
            "--instances",
            "5",
            "--oracle-instances",
            "1",
        ])
        .arg("--out")
        .arg(&summary)
        .output()
        .unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let text = stdout(&run);
    assert!(text.contains("validate: PASS"), "{text}");
    assert!(text.contains("0 violations"));

    let csv = std::fs::read_to_string(&summary).unwrap();
    assert!(csv.starts_with("suite,check,samples,violations,worst\n"));
    assert!(csv.contains("oracle,fair_ratio_seed_100"));
    let _ = std::fs::remove_file(&summary);
}
