use std::process::{Command, Output};

fn cmdual(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmdual"))
        .args(args)
        .env_remove("CMDUAL_MAX_N")
        .output()
        .expect("spawn cmdual")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn params_text_and_json() {
    let o = cmdual(&["params", "--n", "8", "--k", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("w=7 parity=6 d=1094"));

    let o = cmdual(&["params", "--n", "8", "--k", "7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        (v["w"].as_u64(), v["parity"].as_u64(), v["d"].as_u64()),
        (Some(7), Some(6), Some(1094))
    );
    assert_eq!(v["branch"], "even");
}

#[test]
fn usage_errors_name_the_precondition() {
    let o = cmdual(&["params", "--n", "8", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k must be odd"));

    let o = cmdual(&["dual", "--n", "6", "--k", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gcd(n, k) must be 1"));

    let o = cmdual(&["dual", "--n", "5", "--k", "3", "--a", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = cmdual(&["params", "--n", "8"]);
    assert_eq!(o.status.code(), Some(2));

    let o = cmdual(&["verify", "--n", "6", "--k", "5", "--mode", "threeterm"]);
    assert_eq!(o.status.code(), Some(2));

    let o = cmdual(&["field", "--n", "3", "--modulus", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_passes_at_n5() {
    let o = cmdual(&[
        "verify", "--n", "5", "--k", "3", "--a", "1", "--mode", "all",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for check in [
        "bent: PASS",
        "dual: PASS",
        "universal: PASS",
        "threeterm: PASS",
    ] {
        assert!(text.contains(check), "{text}");
    }
}

#[test]
fn verify_json_with_dump() {
    let o = cmdual(&[
        "verify",
        "--n",
        "4",
        "--k",
        "3",
        "--mode",
        "dual",
        "--format",
        "json",
        "--dump-spectrum",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["a_input"], "g");
    assert_eq!(v["verified"], true);
    assert_eq!(v["report"]["per_lambda"].as_array().unwrap().len(), 81);
    let w = &v["report"]["reference_constant"];
    assert!(w["a"].is_i64() && w["b"].is_i64());
}

#[test]
fn dual_json_has_eight_terms() {
    let o = cmdual(&[
        "dual", "--n", "9", "--k", "7", "--a", "g", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 8);
    let text = stdout(&o);
    let positions: Vec<usize> = [
        "\"n\"",
        "\"k\"",
        "\"d\"",
        "\"w\"",
        "\"parity\"",
        "\"branch\"",
        "\"a\"",
        "\"terms\"",
    ]
    .iter()
    .map(|key| text.find(key).unwrap())
    .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
}

#[test]
fn dual_text_echoes_default_a() {
    let o = cmdual(&["dual", "--n", "5", "--k", "3"]);
    let text = stdout(&o);
    assert!(text.starts_with("a=g ("), "{text}");
    assert_eq!(text.matches("Tr(").count(), 3);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["dual", "--n", "8", "--k", "7", "--format", "json"][..],
        &["sets", "--n", "9", "--k", "7", "--full"][..],
        &["table", "--n-max", "12", "--format", "csv"][..],
    ] {
        assert_eq!(cmdual(args).stdout, cmdual(args).stdout);
    }
}

#[test]
fn sets_listing_and_size_cap() {
    let o = cmdual(&["sets", "--n", "8", "--k", "7"]);
    let text = stdout(&o);
    assert!(text.contains("U0 (13):") && text.contains("V0 (8):"));
    assert!(text.contains("|S0|=104 |S1|=64"));

    let o = cmdual(&["sets", "--n", "13", "--k", "5", "--full"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_cmdual"))
        .args(["sets", "--n", "13", "--k", "5", "--format", "json"])
        .env("CMDUAL_MAX_N", "13")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["s0_len"].is_u64());
}

#[test]
fn table_csv_columns() {
    let o = cmdual(&["table", "--n-min", "8", "--n-max", "9", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,k,w,parityCount,branch,termCount"));
    assert!(text.contains("8,7,7,6,even,21"));
    assert!(text.contains("9,7,4,3,odd,8"));
}

#[test]
fn predict_and_examples() {
    let o = cmdual(&["predict", "--n", "11", "--k", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("k|n-1: w=9 parity=4 branch=even terms=55 agrees"));

    let o = cmdual(&["examples", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["fixtures"].as_array().unwrap().len(), 8);
}

#[test]
fn threads_flag_and_modulus_override() {
    let o = cmdual(&[
        "verify",
        "--n",
        "5",
        "--k",
        "3",
        "--threads",
        "2",
        "--modulus",
        "100022",
    ]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("modulus=100022"));
}

#[test]
fn fixture_runner_reports_differences() {
    use cmdual_cli::fixtures::{run, Expected, Fixture};
    let bad = Fixture {
        id: "tampered",
        n: 8,
        k: 7,
        expected: Expected {
            w: Some(6),
            terms: Some(20),
            ..Default::default()
        },
    };
    let r = run(&bad);
    assert!(!r.passed());
    let fields: Vec<&str> = r.diffs.iter().map(|d| d.field.as_str()).collect();
    assert!(fields.contains(&"w") && fields.contains(&"terms"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(cmdual(&["--help"]).status.code(), Some(0));
}
