use std::process::{Command, Output};

use serde_json::Value;

fn wmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn moment_two_index() {
    let out = wmm(&["moment", "--cov", "builtin:diag:1,2", "--v", "0,1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["schema"], "wmm.moment.v1");
    assert_eq!(
        doc["result"]["value"],
        serde_json::json!([["5/1", "0/1"], ["0/1", "28/1"]])
    );
    assert_eq!(doc["params"]["v"], serde_json::json!([0, 1]));
}

#[test]
fn moment_identity() {
    let doc = json(&wmm(&["moment", "--cov", "builtin:I:3", "--v", "0"]));
    let v = &doc["result"]["value"];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(v[i][j], if i == j { "1/1" } else { "0/1" });
        }
    }
}

#[test]
fn moment_with_oracle() {
    let out = wmm(&["moment", "--v", "0,0", "--cov", "builtin:I:1", "--oracle"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["result"]["value"][0][0], "3/1");
    assert_eq!(doc["result"]["oracle"]["match"], true);
}

#[test]
fn central_and_bell() {
    let doc = json(&wmm(&[
        "central",
        "--cov",
        "builtin:diag:1,2",
        "--n",
        "2",
        "--oracle",
    ]));
    assert_eq!(
        doc["result"]["value"],
        serde_json::json!([["4/1", "0/1"], ["0/1", "10/1"]])
    );
    let doc = json(&wmm(&["bell", "--n", "3", "--cov", "builtin:I:1"]));
    assert_eq!(doc["result"]["value"], "15/1");
    assert_eq!(doc["result"]["recursion_match"], true);
}

#[test]
fn weighted_aggregates() {
    let doc = json(&wmm(&["weighted", "--m", "2", "--n", "1"]));
    assert_eq!(doc["schema"], "wmm.weighted.v1");
    assert!(doc["result"].is_object());
}

#[test]
fn tau_varpi_report() {
    let out = wmm(&[
        "inequalities",
        "--suite",
        "tau-varpi",
        "--cov",
        "builtin:I:1",
        "--max-m",
        "1",
        "--max-n",
        "0",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let reports = doc["result"]["reports"].as_array().unwrap();
    let verdict =
        |name: &str| reports.iter().find(|r| r["name"] == name).unwrap()["verdict"].clone();
    assert_eq!(verdict("tau-varpi/as-stated"), "violated-as-stated");
    assert_eq!(verdict("tau-varpi/corrected"), "pass");
}

#[test]
fn all_suites_exit_zero() {
    for cov in ["builtin:I:1", "builtin:diag:1,2", "builtin:random:3"] {
        let out = wmm(&["inequalities", "--cov", cov]);
        assert_eq!(code(&out), 0, "{cov}");
        assert_eq!(json(&out)["result"]["failed"], false);
    }
}

#[test]
fn verify_defaults_and_micro_run() {
    let out = wmm(&["verify"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["result"]["passed"], true);
    let out = wmm(&["verify", "--max-m", "1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn corrupted_verify_fails_with_reproducer() {
    let out = wmm(&["verify", "--max-m", "1", "--selftest-corrupt"]);
    assert_eq!(code(&out), 1);
    let rep = &json(&out)["result"]["first_failure"];
    assert_eq!(rep["v"], serde_json::json!([0]));
    assert!(rep["methods"].is_array());
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        &["moment", "--cov", "builtin:random:3", "--v", "1,0,2"][..],
        &[
            "inequalities",
            "--suite",
            "central",
            "--cov",
            "builtin:diag:1,2",
        ],
        &[
            "mc",
            "--cov",
            "builtin:diag:1,2",
            "--v",
            "0,1",
            "--samples",
            "20000",
            "--seed",
            "3",
        ],
    ] {
        assert_eq!(wmm(args).stdout, wmm(args).stdout, "{args:?}");
    }
}

#[test]
fn mc_is_thread_invariant() {
    let base = [
        "mc",
        "--cov",
        "builtin:diag:1,2",
        "--v",
        "0,0,1",
        "--samples",
        "50000",
    ];
    let a = wmm(&[&["--threads", "1"][..], &base].concat());
    let b = wmm(&[&["--threads", "4"][..], &base, &["--batch", "1"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(json(&a)["result"], json(&b)["result"]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&wmm(&["moment", "--v", "x"])), 2);
    assert_eq!(
        code(&wmm(&["moment", "--v", "0", "--cov", "builtin:diag:1,-2"])),
        2
    );
    assert_eq!(code(&wmm(&["--mode", "exact", "mc", "--v", "0"])), 2);
    let capped = Command::new(env!("CARGO_BIN_EXE_wmm"))
        .env("WMM_MAX_PERM_N", "2")
        .args(["moment", "--v", "0,0,0", "--oracle"])
        .output()
        .unwrap();
    assert_eq!(code(&capped), 3);
}

#[test]
fn pretty_output_is_the_same_document() {
    let a = json(&wmm(&["bell", "--n", "2"]));
    let b = json(&wmm(&["--output", "pretty", "bell", "--n", "2"]));
    assert_eq!(a, b);
}
