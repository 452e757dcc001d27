//! End-to-end tests of the `toral` binary: exact output formats, JSON
//! roundtrips, DOT export, determinism and exit codes.

use std::process::{Command, Output};

fn toral(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toral"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = toral(args);
    assert!(
        out.status.success(),
        "toral {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn census_mixed_action_mod_15() {
    let out = stdout(&["census", "-M", "0,12;1,6", "-n", "15"]);
    assert_eq!(out, "(1-t)(1-t^2)^2(1-t^4)^5\npretail points: 200\n");
}

#[test]
fn census_json_roundtrip() {
    let text = stdout(&["census", "-M", "0,12;1,6", "-n", "15"]);
    let zeta_line = text.lines().next().unwrap().to_string();

    let json = stdout(&["census", "-M", "0,12;1,6", "-n", "15", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["matrix"], "0,12;1,6");
    assert_eq!(v["modulus"], 15);
    assert_eq!(v["pretail_points"], 200);
    assert_eq!(v["zeta"], zeta_line.as_str());
    // re-render the factored polynomial from the cycles array
    let mut rendered = String::new();
    for c in v["cycles"].as_array().unwrap() {
        let (len, cnt) = (c["length"].as_u64().unwrap(), c["count"].as_u64().unwrap());
        if len == 1 {
            rendered.push_str("(1-t)");
        } else {
            rendered.push_str(&format!("(1-t^{len})"));
        }
        if cnt != 1 {
            rendered.push_str(&format!("^{cnt}"));
        }
    }
    assert_eq!(rendered, zeta_line);
}

#[test]
fn catmap_closed_forms() {
    assert_eq!(
        stdout(&["catmap", "arnold", "-pp", "5^1"]),
        "(1-t)(1-t^2)^2(1-t^10)^2\n"
    );
    assert_eq!(
        stdout(&["catmap", "arnold", "--pp", "2^2"]),
        "(1-t)(1-t^3)(1-t^3)^4\n"
    );
    assert_eq!(
        stdout(&["catmap", "fibonacci", "-pp", "2^1"]),
        "(1-t)(1-t^3)\n"
    );
}

#[test]
fn catmap_table_lists_constants() {
    let out = stdout(&["catmap", "arnold", "--table", "12"]);
    assert!(out.contains("p\tper_A(p)\tm_p"));
    assert!(out.contains("2\t3\t-"));
    assert!(out.contains("3\t4\t1"));
    assert!(out.contains("5\t10\t-"));
    assert!(out.contains("11\t5\t1")); // (5/11) = 1: per = (11-1)/2m
}

#[test]
fn pretail_dot_export() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("graph.dot");
    let tree = dir.path().join("tree.dot");
    let out = stdout(&[
        "pretail",
        "-M",
        "4,0;1,4",
        "-n",
        "6",
        "--dot",
        dot.to_str().unwrap(),
        "--tree-dot",
        tree.to_str().unwrap(),
    ]);
    assert!(out.contains("tree height: 2"));
    assert!(out.contains("level profile v: 1, 1, 2"));
    let dot_text = std::fs::read_to_string(&dot).unwrap();
    assert_eq!(dot_text.matches("[label=").count(), 36);
    assert_eq!(dot_text.matches(" -> ").count(), 36);
    let tree_text = std::fs::read_to_string(&tree).unwrap();
    assert_eq!(tree_text.matches("[label=").count(), 4);
}

#[test]
fn order_subcommand_reports_plateau() {
    let out = stdout(&["order", "-M", "2,1;1,1", "--pp", "2^5"]);
    assert!(out.contains("ord(M, 32) = 24"));
    assert!(out.contains("orders mod 2^i for i = 1..5: 3, 3, 6, 12, 24"));
    assert!(out.contains("s = 2, shape: initial plateau"));
}

#[test]
fn classify_subcommand() {
    let out = stdout(&["classify", "-M", "2,1;1,1", "-p", "5"]);
    assert!(out.contains("class: II"));
    assert!(out.contains("nontrivial orbits: 2 x len 2, 2 x len 10"));
}

#[test]
fn reversor_subcommand() {
    let out = stdout(&["reversor", "-M", "0,-4;1,0", "-n", "45"]);
    assert!(out.contains("mod 45: not reversible"));
    assert!(out.contains("mod 9: not reversible"));
    assert!(out.contains("mod 5: reversible [involution]"));

    let out = stdout(&["reversor", "-M", "4,9;7,16", "-n", "7"]);
    assert!(out.contains("mod 7: reversible"));
    assert!(out.contains("involutory reversor (normal-form construction):"));
}

#[test]
fn symmetries_subcommand() {
    let out = stdout(&["symmetries", "-M", "4,4;1,4", "-n", "8"]);
    assert!(out.contains("|S(M)| = 32"));
    assert!(out.contains("structure: C_8 x C_2 x C_2"));
    assert!(out.contains("determinant spectrum: {1, 5}"));
}

#[test]
fn conjugate_subcommand() {
    let out = stdout(&["conjugate", "-M", "2,1;1,1", "-N", "1,1;1,0", "-n", "5"]);
    assert!(out.contains("not conjugate mod every n"));
    assert!(out.contains("mod 5: not conjugate"));

    let out = stdout(&["conjugate", "-M", "4,9;7,16", "-N", "16,-9;-7,4", "-n", "10"]);
    assert!(out.contains("conjugate in GL(2, Z/nZ) for every n >= 2"));
    assert!(out.contains("mod 10: conjugate"));
    assert!(out.contains("witness P"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        vec!["census", "-M", "2,1;1,1", "-n", "25"],
        vec!["pretail", "-M", "4,4;1,4", "-n", "8"],
        vec!["symmetries", "-M", "4,4;1,4", "-n", "8"],
        vec!["catmap", "fibonacci", "--pp", "5^2"],
    ] {
        assert_eq!(stdout(&args), stdout(&args), "{args:?}");
    }
}

#[test]
fn exit_codes() {
    // usage error: unknown subcommand
    let out = toral(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    // usage error: unknown flag
    let out = toral(&["census", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // domain error: ragged matrix
    let out = toral(&["census", "-M", "1,2;3", "-n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    // domain error: missing modulus
    let out = toral(&["order", "-M", "2,1;1,1"]);
    assert_eq!(out.status.code(), Some(1));
    // domain error: enumeration cap exceeded names the required cap
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("big.dot");
    let out = toral(&[
        "pretail",
        "-M",
        "2,1;1,1",
        "-n",
        "3163",
        "--dot",
        dot.to_str().unwrap(),
        "--max-points",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("10004569"), "stderr: {err}");
    // success
    let out = toral(&["census", "-M", "2,1;1,1", "-n", "5"]);
    assert_eq!(out.status.code(), Some(0));
}
