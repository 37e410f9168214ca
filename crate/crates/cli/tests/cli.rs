use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn blocklab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blocklab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    fs::write(dir.path().join(name), text).unwrap();
    name.to_string()
}

#[test]
fn greedy_without_step_three_misses_the_big_item() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "trap.txt", "K=10\n1,1,1\n2,10,9\n");
    let o = blocklab(dir.path(), &["solve", &f, "--solver", "greedy01", "--solver", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0].as_str(), rows[0][3].as_str()), ("greedy01", "1"));
    assert_eq!((rows[1][0].as_str(), rows[1][3].as_str()), ("exact", "9"));
}

#[test]
fn solver_all_fans_out() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "three.txt", "K=5\n1,2,6\n2,3,7\n3,4,9\n");
    let o = blocklab(dir.path(), &["solve", &f, "--solver", "all"]);
    assert_eq!(o.status.code(), Some(0));
    let solvers: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(solvers, ["exact", "greedy", "fractional", "subsetsum"]);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let o = blocklab(dir.path(), &["solve", "missing.txt", "--solver", "exact"]);
    assert_eq!(o.status.code(), Some(2));
    let f = write(&dir, "bad.txt", "K=10\n1,1,1\n2,x,9\n");
    let o = blocklab(dir.path(), &["solve", &f, "--solver", "exact"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn oracle_limit_exits_three() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("K=50\n");
    for i in 1..=21 {
        text.push_str(&format!("{i},{i},{i}\n"));
    }
    let f = write(&dir, "big.txt", &text);
    let o = blocklab(dir.path(), &["solve", &f, "--solver", "brute"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn uniform_price_on_unit_bids() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.txt", "K=2\n1,1,5\n2,1,3\n3,1,2\n");
    let o = blocklab(dir.path(), &["auction", &f, "--rule", "up"]);
    assert_eq!(o.status.code(), Some(0));
    let payments: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().to_string())
        .collect();
    assert_eq!(payments, ["2", "2", "0"]);
}

#[test]
fn pay_as_bid_witness_is_expected() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.txt", "K=2\n1,1,5\n2,1,3\n3,1,2\n");
    let o = blocklab(
        dir.path(),
        &[
            "auction",
            &f,
            "--rule",
            "dp",
            "--verify",
            "truthful",
            "--expect-witness",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "DP");
    assert!(!row[5].is_empty(), "witness row expected: {text}");
    // without the flag the same witness is a violation
    let o = blocklab(dir.path(), &["auction", &f, "--rule", "dp", "--verify", "truthful"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn critical_pricing_survives_the_suite() {
    let dir = TempDir::new().unwrap();
    let o = blocklab(
        dir.path(),
        &["auction", "--rule", "critical", "--verify", "truthful", "--suite", "50"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..3], ["CRITICAL", "50", "0"]);
    assert!(row[4..].iter().all(|f| f.is_empty()));
}

#[test]
fn monotonicity_and_its_control() {
    let dir = TempDir::new().unwrap();
    let ok = blocklab(
        dir.path(),
        &["auction", "--rule", "up", "--verify", "monotone", "--suite", "50"],
    );
    assert_eq!(ok.status.code(), Some(0));
    let control = blocklab(
        dir.path(),
        &["auction", "--rule", "up", "--verify", "monotone", "--control"],
    );
    assert_eq!(control.status.code(), Some(1));
}

#[test]
fn pbs_epoch_writes_32_balanced_rows() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "pbs.toml", "[era]\nera = \"PBS_ERA\"\n");
    let o = blocklab(dir.path(), &["simulate", &s, "--out", "run"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let slots = fs::read_to_string(dir.path().join("run/slots.csv")).unwrap();
    let mut lines = slots.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<i128>> = lines
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != 1 && *i != header.len() - 1)
                .map(|(_, f)| f.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 32);
    // numeric columns shift left by one past `era`
    let at = |name: &str| col(name) - 1;
    for r in &rows {
        let sum = r[at("pi_u")] + r[at("pi_s")] + r[at("pi_b")] + r[at("pi_p")];
        assert_eq!(sum, r[at("Pi")]);
        assert_eq!(r[at("Pi")], r[at("V_hat")] + r[at("R")] - r[at("B")]);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "two.toml",
        "[era]\neras = [\"PGA_ERA\", \"EIP1559_ERA\"]\n[mempool]\ntx_count = 40\n",
    );
    for out in ["a", "b"] {
        let o = blocklab(dir.path(), &["--seed", "7", "simulate", "--config", &s, "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in [
        "slots.csv",
        "ledger.csv",
        "comparison.csv",
        "events_PGA_ERA.csv",
        "events_EIP1559_ERA.csv",
    ] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn scenario_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "bad.toml", "[era]\nera = \"BASELINE\"\nrelay_count = 1\n");
    assert_eq!(blocklab(dir.path(), &["simulate", &s]).status.code(), Some(2));
    let s = write(&dir, "typo.toml", "[mempol]\ntx_count = 4\n");
    assert_eq!(blocklab(dir.path(), &["simulate", &s]).status.code(), Some(2));
}

#[test]
fn fixed_mempool_file() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "pool.txt",
        "K=100000\n1,21000,2100000,PLAIN,0\n2,30000,3000000,VULNERABLE_FUNDS,50000\n3,60000,1200000,PLAIN,0\n",
    );
    let o = blocklab(dir.path(), &["simulate", "--mempool", &m]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 33);
}

fn ranking(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn one_seed_tournament_aggregates_to_itself() {
    let dir = TempDir::new().unwrap();
    let o = blocklab(dir.path(), &["tournament", "--seeds", "1", "--out", "t"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = ranking(&fs::read_to_string(dir.path().join("t/ranking.csv")).unwrap());
    assert_eq!(rows.len(), 6);
    for i in 0..3 {
        assert_eq!(rows[i][0], "seed");
        assert_eq!(rows[i + 3][0], "aggregate");
        assert_eq!(rows[i][2..], rows[i + 3][2..]);
    }
    assert!(dir.path().join("t/training.csv").exists());
}

#[test]
fn truthful_bidders_share_one_allocation() {
    let dir = TempDir::new().unwrap();
    let o = blocklab(dir.path(), &["tournament", "--seeds", "2", "--agents", "truthful"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = ranking(&stdout(&o));
    for seed_rows in rows.chunks(3) {
        assert!(seed_rows.iter().all(|r| r[4] == seed_rows[0][4]), "{seed_rows:?}");
    }
}

#[test]
fn base_fee_tool() {
    let dir = TempDir::new().unwrap();
    let o = blocklab(dir.path(), &["feemarket", "--threshold", "--issuance", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().nth(1).unwrap().rsplit(',').next(), Some("5001"));

    let o = blocklab(dir.path(), &["feemarket", "--blocks", "20"]);
    let rows = ranking(&stdout(&o));
    assert_eq!(rows.len(), 20);
    for w in rows.windows(2) {
        let base: u128 = w[0][1].parse().unwrap();
        let used: u128 = w[0][2].parse().unwrap();
        let next: u128 = w[1][1].parse().unwrap();
        let (t, d) = (15_000_000u128, 8u128);
        assert_eq!(next, (base * (t * (d - 1) + used) / (t * d)).max(1));
        let burn: u128 = w[0][3].parse().unwrap();
        assert_eq!(burn, base * used);
    }
}
