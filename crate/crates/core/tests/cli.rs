//! The `skg` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use skg::{BitSeq, Rng};

fn skg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn run_into(dir: &Path, config: &Path, seed: &str) -> Output {
    skg(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--snr-db",
        "10,20",
        "--trials",
        "30",
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn run_writes_csv_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("campaign.toml");
    fs::write(&config, "scenario = \"relay\"\nbound_samples = 2000\n").unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let out = run_into(&a, &config, "9");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(run_into(&b, &config, "9").status.success());

    let metrics = fs::read_to_string(a.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("snr_db,trials,sessions,accepted,"));
    assert!(lines[1].starts_with("10,30,"));
    assert!(!metrics.contains('\r') && metrics.ends_with('\n'));
    for name in [
        "metrics.csv",
        "eve_ber_cdf.csv",
        "bounds.txt",
        "keystream.bin",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    assert!(fs::read_to_string(a.join("bounds.txt"))
        .unwrap()
        .contains("kind = fano"));
    assert!(stdout(&out).contains("metrics.csv"));
}

#[test]
fn run_rejects_unknown_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "snr = 20\n").unwrap();
    let out = skg(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("snr"));
}

#[test]
fn bounds_prints_terms() {
    let out = skg(&["bounds", "--scenario", "direct"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("guessing term  2^-34.94"), "{text}");
    assert!(text.contains("hash term      2^-32.00"), "{text}");

    let out = skg(&["bounds", "--scenario", "direct", "--mi", "0.01"]);
    assert!(
        stdout(&out).contains("guessing term  2^-36.7"),
        "{}",
        stdout(&out)
    );

    let out = skg(&[
        "bounds",
        "--scenario",
        "relay",
        "--mi",
        "1.39",
        "--h-q",
        "3.86",
    ]);
    assert!(out.status.success());
    assert!(
        stdout(&out).contains("bound          2^-10.5"),
        "{}",
        stdout(&out)
    );

    let out = skg(&["bounds", "--scenario", "relay", "--mi", "1.39"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nist_reports_pass_and_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let random = tmp.path().join("random.bin");
    let mut rng = Rng::seeded(77);
    fs::write(&random, rng.bits(1 << 20).to_bytes()).unwrap();
    let out = skg(&["nist", "--keystream", random.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert_eq!(stdout(&out).matches("pass").count(), 8);

    let zeros = tmp.path().join("zeros.bin");
    fs::write(&zeros, BitSeq::zeros(1 << 16).to_bytes()).unwrap();
    let out = skg(&["nist", "--keystream", zeros.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));

    let out = skg(&[
        "nist",
        "--keystream",
        tmp.path().join("missing").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
