use std::fs;
use std::path::PathBuf;

use primbase::cli::run;
use serde_json::Value;

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("primbase-cli-{}-{name}", std::process::id()))
}

fn run_json(args: &[&str], name: &str) -> (i32, Value) {
    let out = tmp(name);
    let mut argv = vec!["primbase"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let code = run(argv);
    let v = fs::read_to_string(&out).ok().map(|s| serde_json::from_str(&s).unwrap()).unwrap_or(Value::Null);
    (code, v)
}

#[test]
fn construct_subsets_example() {
    let (code, v) = run_json(&["construct", "--action", "subsets", "--m", "9", "--k", "3"], "subsets");
    assert_eq!(code, 0);
    assert_eq!(v["candidate"]["size"], 4);
    assert_eq!(v["candidate"]["bound_ref"], "subset_exact_value");
    assert_eq!(v["header"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["header"]["config"]["seed"], 0);
    assert_eq!(v["bound_refs"][0], "subset_exact_value");
}

#[test]
fn bruteforce_example() {
    let (code, v) = run_json(&["bruteforce", "--group", "sym", "--m", "5", "--action", "subsets", "--k", "2"], "bf");
    assert_eq!(code, 0);
    assert_eq!(v["b"], 3);
    assert_eq!(v["witness"].as_array().unwrap().len(), 3);
}

#[test]
fn bound_sp_affine_example() {
    let (code, v) = run_json(&["bound", "--family", "sp-affine", "--d", "4", "--q", "3"], "bound");
    assert_eq!(code, 0);
    assert_eq!(v["sp_identity"]["holds"], true);
    assert!(v["reports"][0]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(run(["primbase", "construct", "--bogus"]), 3);
    assert_eq!(run(["primbase", "frobnicate"]), 3);
    assert_eq!(run(["primbase", "construct", "--action", "subsets", "--m", "9"]), 3);
    assert_eq!(run(["primbase", "verify"]), 3);
}

#[test]
fn verify_round_trip_and_not_a_base() {
    let c = tmp("cand.json");
    let args = ["primbase", "construct", "--family", "sp", "--d", "6", "--q", "2", "--k", "2", "--orbit", "totsing", "--out"];
    assert_eq!(run(args.iter().copied().chain([c.to_str().unwrap()])), 0);
    let (code, v) = run_json(&["verify", "--input", c.to_str().unwrap()], "cert");
    assert_eq!(code, 0);
    assert!(matches!(v["certificate"]["status"].as_str(), Some("strong_base") | Some("group_base")));

    let mut cand: Value = serde_json::from_str(&fs::read_to_string(&c).unwrap()).unwrap();
    cand["candidate"]["elements"].as_array_mut().unwrap().truncate(1);
    let bad = tmp("bad.json");
    fs::write(&bad, cand.to_string()).unwrap();
    let (code, v) = run_json(&["verify", "--input", bad.to_str().unwrap()], "badcert");
    assert_eq!(code, 1);
    assert_eq!(v["certificate"]["status"], "not_a_base");
    assert!(v["certificate"]["witness"].is_object());
}

#[test]
fn budgets_exit_2() {
    let (code, _) = run_json(&["bruteforce", "--action", "subsets", "--m", "10", "--k", "3", "--degree-cap", "50"], "cap");
    assert_eq!(code, 2);
    // a two-dimensional algebra needs the unit search, which a cap of 1 cuts short
    let c = tmp("o8.json");
    let args = ["primbase", "construct", "--family", "o+", "--d", "8", "--q", "3", "--k", "4", "--out"];
    assert_eq!(run(args.iter().copied().chain([c.to_str().unwrap()])), 0);
    let (code, v) = run_json(&["verify", "--input", c.to_str().unwrap(), "--enum-cap", "1"], "o8cert");
    assert_eq!(code, 2);
    assert_eq!(v["certificate"]["status"], "inconclusive");
}

#[test]
fn unfaithful_orbit_exits_1() {
    assert_eq!(run(["primbase", "construct", "--family", "o", "--sign", "+", "--d", "4", "--q", "3", "--k", "2"]), 1);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["construct", "--family", "o-", "--d", "6", "--q", "3", "--k", "2", "--orbit", "nondeg", "--seed", "5"];
    let a = tmp("det-a.json");
    let b = tmp("det-b.json");
    for p in [&a, &b] {
        let argv = args.iter().copied().chain(["--out", p.to_str().unwrap()]);
        assert_eq!(run(std::iter::once("primbase").chain(argv)), 0);
    }
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    // only the recorded output path differs
    assert_eq!(ta.replace(a.to_str().unwrap(), ""), tb.replace(b.to_str().unwrap(), ""));
}

#[test]
fn survey_order_and_jobs() {
    let grid = tmp("grid.json");
    fs::write(
        &grid,
        r#"[{"command":"construct","action":"subsets","m":12,"k":3},
            {"command":"bruteforce","action":"partitions","a":2,"b":3},
            {"command":"bound","family":"lemma","m":100,"k":10},
            {"command":"construct","family":"sp","d":4,"q":3,"k":1,"orbit":"totsing"},
            {"command":"construct","action":"nope"}]"#,
    )
    .unwrap();
    let (c1, v1) = run_json(&["survey", "--input", grid.to_str().unwrap(), "--jobs", "1"], "s1");
    let (c4, v4) = run_json(&["survey", "--input", grid.to_str().unwrap(), "--jobs", "4"], "s4");
    assert_eq!(c1, 3);
    assert_eq!(c4, 3);
    assert_eq!(v1["results"], v4["results"]);
    let exits: Vec<i64> = v1["results"].as_array().unwrap().iter().map(|r| r["exit"].as_i64().unwrap()).collect();
    assert_eq!(exits, vec![0, 0, 0, 0, 3]);
    assert_eq!(v1["results"][0]["report"]["candidate"]["size"], 6);
}

#[test]
fn text_and_csv_formats() {
    let out = tmp("fmt.csv");
    let argv = ["primbase", "bound", "--family", "lemma", "--m", "1000", "--k", "31", "--format", "csv", "--out", out.to_str().unwrap()];
    assert_eq!(run(argv), 0);
    let s = fs::read_to_string(&out).unwrap();
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("# primbase "));
    assert_eq!(lines.next().unwrap(), "actual,holds,k,lower,m,upper");
    assert!(lines.next().unwrap().contains(",true,31,"));

    let out = tmp("fmt.txt");
    let argv = ["primbase", "construct", "--action", "vectors", "--d", "4", "--q", "3", "--format", "text", "--out", out.to_str().unwrap()];
    assert_eq!(run(argv), 0);
    let s = fs::read_to_string(&out).unwrap();
    assert!(s.lines().nth(1).unwrap().contains("size=4"));
}

#[test]
fn selftest_subset_criteria() {
    assert_eq!(run(["primbase", "selftest", "--only", "9", "--format", "text", "--out", tmp("st.txt").to_str().unwrap()]), 0);
    assert_eq!(run(["primbase", "selftest", "--only", "8", "--out", tmp("st8.json").to_str().unwrap()]), 1);
}
