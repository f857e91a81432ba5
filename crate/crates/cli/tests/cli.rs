use std::path::{Path, PathBuf};
use std::process::Command;

use riskshare::config::RunConfig;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn riskshare(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_riskshare"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn shipped(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

/// Writes a shipped config with `edit` applied to its JSON tree.
fn variant(base: &str, name: &str, edit: impl FnOnce(&mut Value)) -> String {
    let mut v: Value =
        serde_json::from_str(&std::fs::read_to_string(shipped(base)).unwrap()).unwrap();
    edit(&mut v);
    let path = scratch(name);
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(run: &Run) -> Value {
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    serde_json::from_str(&run.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn canonical_prices() -> (f64, f64) {
    let e = 1f64.exp();
    (((2.0 + e) / 3.0).ln(), -((2.0 + 1.0 / e) / 3.0).ln())
}

#[test]
fn shipped_configs_round_trip() {
    for name in [
        "trinomial.json",
        "arbitrage.json",
        "quadrinomial_log.json",
        "mz_ou.json",
        "mz_constant.json",
    ] {
        let cfg = RunConfig::from_json(&std::fs::read_to_string(shipped(name)).unwrap()).unwrap();
        let text = cfg.to_json();
        let again = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg, again, "{name}");
        assert_eq!(text, again.to_json(), "{name}");
    }
}

#[test]
fn price_on_the_canonical_instance() {
    let v = json(&riskshare(&[
        "price",
        "--config",
        &shipped("trinomial.json"),
    ]));
    let (vs, vb) = canonical_prices();
    assert!((v["price"].as_f64().unwrap() - 0.5 * (vs + vb)).abs() < 1e-9);
    assert!((v["v_s"].as_f64().unwrap() - vs).abs() < 1e-9);
    assert!((v["v_b"].as_f64().unwrap() - vb).abs() < 1e-9);
    assert!((v["eps_s"].as_f64().unwrap() - v["eps_b"].as_f64().unwrap()).abs() < 1e-9);
    assert_eq!(v["inside_bounds"], Value::Bool(true));
    assert_eq!(v["arbitrage_interval"]["lower"].as_f64(), Some(0.0));
    assert_eq!(v["arbitrage_interval"]["upper"].as_f64(), Some(1.0));
}

#[test]
fn extreme_lambda_leaves_the_arbitrage_interval() {
    let path = variant("trinomial.json", "lambda_999.json", |v| {
        v["lambda"] = 0.999.into()
    });
    let v = json(&riskshare(&["price", "--config", &path]));
    assert_eq!(v["inside_bounds"], Value::Bool(false));
    let high = v["lambda_bounds"]["high"].as_f64().unwrap();
    assert!(high < 0.999);
}

#[test]
fn log_agents_price_inside_bounds() {
    let v = json(&riskshare(&[
        "price",
        "--config",
        &shipped("quadrinomial_log.json"),
    ]));
    assert_eq!(v["inside_bounds"], Value::Bool(true));
}

#[test]
fn exit_codes_follow_the_contract() {
    let r = riskshare(&["price", "--config", &shipped("arbitrage.json")]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("ArbitrageDetected"), "{}", r.stderr);
    assert_eq!(r.stderr.lines().count(), 1);

    let poor = variant("quadrinomial_log.json", "poor_seller.json", |v| {
        v["seller"]["wealth"] = 0.1.into()
    });
    let r = riskshare(&["price", "--config", &poor]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("InfeasibleWealth"), "{}", r.stderr);

    let both = variant("trinomial.json", "both_blocks.json", |v| {
        v["mz"] =
            serde_json::from_str::<Value>(&std::fs::read_to_string(shipped("mz_ou.json")).unwrap())
                .unwrap()["mz"]
                .clone();
    });
    assert_eq!(riskshare(&["price", "--config", &both]).code, 3);

    let unknown = variant("trinomial.json", "unknown_field.json", |v| {
        v["colour"] = "red".into()
    });
    assert_eq!(riskshare(&["price", "--config", &unknown]).code, 3);

    let power_mz = variant("mz_ou.json", "power_mz.json", |v| {
        v["seller"]["utility"] = serde_json::json!({ "kind": "log" })
    });
    let r = riskshare(&["mz", "price", "--config", &power_mz]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("WrongUtilityKind"), "{}", r.stderr);

    assert_eq!(
        riskshare(&["price", "--config", "/nonexistent.json"]).code,
        3
    );
    assert_eq!(riskshare(&["price"]).code, 3);
}

#[test]
fn curves_pass_through_indifference_prices() {
    let path = variant("trinomial.json", "curves.json", |v| {
        v["eps_grid"] = serde_json::json!({ "start": -0.2, "stop": 0.2, "count": 41 })
    });
    let r = riskshare(&["curves", "--config", &path]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("eps,P_s,P_b,dP_s,dP_b\n"));
    let rows = csv_rows(&r.stdout);
    assert_eq!(rows.len(), 41);
    let num = |s: &str| s.parse::<f64>().unwrap();
    let zero = rows.iter().find(|r| r[0] == "0").expect("eps = 0 row");
    let (vs, vb) = canonical_prices();
    assert!((num(&zero[1]) - vs).abs() < 1e-11);
    assert!((num(&zero[2]) - vb).abs() < 1e-11);
    for w in rows.windows(2) {
        assert!(num(&w[1][1]) < num(&w[0][1]));
        assert!(num(&w[1][2]) > num(&w[0][2]));
    }
    // exponential closed form with u(0) = -1
    for r in &rows {
        let eps = num(&r[0]);
        assert!((num(&r[1]) - (vs - (1.0 + eps).ln())).abs() < 1e-10);
        assert!((num(&r[2]) - (vb + (1.0 + eps).ln())).abs() < 1e-10);
    }
}

#[test]
fn sweep_lists_lambdas_and_bounds() {
    let r = riskshare(&["sweep", "--config", &shipped("trinomial.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.stdout);
    assert_eq!(rows.iter().filter(|r| r[0] == "sweep").count(), 99);
    for kind in [
        "lambda_low",
        "lambda_high",
        "lambda_exponential_low",
        "lambda_exponential_high",
    ] {
        assert!(rows.iter().any(|r| r[0] == kind), "{kind}");
    }
}

#[test]
fn constant_claim_prices_at_its_value() {
    let v = json(&riskshare(&[
        "mz",
        "price",
        "--config",
        &shipped("mz_constant.json"),
    ]));
    assert!((v["p_star"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let mc = json(&riskshare(&[
        "mz",
        "price",
        "--config",
        &shipped("mz_constant.json"),
        "--engine",
        "mc",
        "--paths",
        "1000",
    ]));
    assert!((mc["p_star"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn terminal_only_stopping_gives_the_expected_terminal_risk() {
    let out = scratch("stop_terminal.csv");
    let v = json(&riskshare(&[
        "mz",
        "stop",
        "--config",
        &shipped("mz_ou.json"),
        "--grid",
        "100,100",
        "--terminal-only",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(v["v0"], v["expected_terminal"]);
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("t,y,stop,value,total_risk\n"));
}

#[test]
fn field_covers_the_grid() {
    let r = riskshare(&[
        "mz",
        "field",
        "--config",
        &shipped("mz_ou.json"),
        "--grid",
        "200,150",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(csv_rows(&r.stdout).len(), 200 * 151);
    // too coarse for the residual check
    let r = riskshare(&[
        "mz",
        "field",
        "--config",
        &shipped("mz_ou.json"),
        "--grid",
        "20,10",
    ]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("GridTooCoarse"), "{}", r.stderr);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cases: [&[&str]; 7] = [
        &["price", "--config", &shipped("trinomial.json")],
        &["curves", "--config", &shipped("quadrinomial_log.json")],
        &["sweep", "--config", &shipped("trinomial.json")],
        &[
            "mz",
            "price",
            "--config",
            &shipped("mz_ou.json"),
            "--grid",
            "100,100",
        ],
        &[
            "mz",
            "price",
            "--config",
            &shipped("mz_ou.json"),
            "--engine",
            "mc",
            "--paths",
            "5000",
            "--seed",
            "9",
        ],
        &[
            "mz",
            "field",
            "--config",
            &shipped("mz_ou.json"),
            "--grid",
            "200,200",
        ],
        &[
            "mz",
            "stop",
            "--config",
            &shipped("mz_ou.json"),
            "--grid",
            "100,100",
        ],
    ];
    for (k, args) in cases.iter().enumerate() {
        let runs: Vec<(String, String)> = (0..2)
            .map(|r| {
                let out = scratch(&format!("det_{k}_{r}.csv"));
                let mut a = args.to_vec();
                let out_s = out.to_string_lossy().into_owned();
                a.extend(["--out", &out_s]);
                let run = riskshare(&a);
                assert_eq!(run.code, 0, "{args:?}: {}", run.stderr);
                (
                    run.stdout,
                    std::fs::read_to_string(&out).unwrap_or_default(),
                )
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{args:?}");
    }
}
