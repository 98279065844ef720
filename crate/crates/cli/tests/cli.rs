use std::path::PathBuf;
use std::process::{Command, Output};

fn obslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obslab"))
        .args(args)
        .env_remove("OBSLAB_BUDGET")
        .output()
        .expect("run obslab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_problem(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("obslab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn heisenberg_injective_is_obstructed() {
    let o = obslab(&["heisenberg", "--k", "2", "--nu", "injective"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: OBSTRUCTED"));
    assert!(stdout(&o).contains("exhaustive: true"));
}

#[test]
fn heisenberg_zero_splits() {
    let o = obslab(&["heisenberg", "--k", "2", "--nu", "zero"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: SPLIT"));
}

#[test]
fn cohomology_of_z2() {
    let o = obslab(&["cohomology", "--group", "cyclic:2", "--module", "Z2", "--degree", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("H³ ≅ Z/2"));
}

#[test]
fn non_associative_table_reports_triple() {
    let o = obslab(&["group-check", "--table", "0 1 2 3 4;1 0 3 4 2;2 4 0 1 3;3 2 4 0 1;4 3 1 2 0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not associative"));
    assert!(stderr(&o).contains("triple (1, 1, 2)"));
}

#[test]
fn table_from_file() {
    let p = write_problem("z3.table", "0 1 2\n1 2 0\n2 0 1\n");
    let o = obslab(&["group-check", "--table", &p.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("VALID GROUP"));
}

#[test]
fn unknown_field_cites_line() {
    let p = write_problem("bad.toml", "[group]\nfamily = \"cyclic:4\"\n[module]\nspec = \"Z2\"\nbogus = 1\n");
    let o = obslab(&["cohomology", "--degree", "1", "--problem", &p.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn bad_subgroup_names_field() {
    let o = obslab(&["exactness", "--group", "cyclic:4", "--module", "Z2", "--l", "0,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("subgroups.l"));
}

#[test]
fn fiber_violation_exits_one() {
    let p = write_problem(
        "fiber.toml",
        "[group]\nfamily = \"cyclic:4\"\n[module]\nspec = \"Z2\"\n[subgroups]\nn = [0, 2]\n\
         [obstruction]\nc = [{ at = [1, 1, 1], value = 1 }]\nd1 = [{ at = [1, 1], value = 1 }]\nnu = [0, 0]\n",
    );
    let o = obslab(&["fiber-check", "--problem", &p.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FIBER VIOLATED at (1, 1)"));
}

#[test]
fn explicit_obstruction_round_trips() {
    let p = write_problem(
        "ob.toml",
        "[group]\nfamily = \"cyclic:4\"\n[module]\nspec = \"Z2\"\n[subgroups]\nn = [0, 2]\n\
         [obstruction]\nc = [{ at = [1, 1, 1], value = 1 }]\nnu = [0, 0]\n",
    );
    let o = obslab(&["resolve-obstruction", "--problem", &p.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: REALIZED"));
}

#[test]
fn characteristic_cocycle_from_file() {
    let p = write_problem(
        "chi.toml",
        "[group]\nfamily = \"cyclic:4\"\n[module]\nspec = \"Z2\"\n[subgroups]\nl = [0, 2]\n\
         [chi]\nlam_h = [{ at = [2, 1], value = 1 }, { at = [2, 3], value = 1 }]\n",
    );
    let o = obslab(&["delta-hjr", "--problem", &p.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"at\":[1,1,1]"));
    assert!(stdout(&o).contains("verdict: NONTRIVIAL"));
    let bad = write_problem(
        "chi-bad.toml",
        "[group]\nfamily = \"cyclic:4\"\n[module]\nspec = \"Z2\"\n[subgroups]\nl = [0, 2]\n\
         [chi]\nlam_h = [{ at = [2, 1], value = 1 }, { at = [2, 2], value = 1 }]\n",
    );
    let o = obslab(&["delta-hjr", "--problem", &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("homomorphism"));
}

#[test]
fn json_schema_has_stable_keys() {
    let o = obslab(&["--format", "json", "cohomology", "--group", "cyclic:4", "--module", "Z2", "--degree", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["command", "input_digest", "results", "verdict", "witnesses"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["results"]["class"]["invariant_factors"], serde_json::json!([2]));
    assert_eq!(v["witnesses"][0]["kind"], "cocycle");
    assert!(v["witnesses"][0]["target"]["degree"].is_u64());
}

#[test]
fn exactness_on_fx1_passes() {
    let o = obslab(&["exactness", "--fixture", "fx1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: EXACT"));
}

#[test]
fn budget_env_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_obslab"))
        .args(["oracle-compare", "--group", "cyclic:4", "--module", "Z3"])
        .env("OBSLAB_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget exceeded"));
}

#[test]
fn seed_controls_sampling_only() {
    let run = |seed: &str| stdout(&obslab(&["resolve", "--group", "cyclic:3", "--module", "Z3", "--samples", "4", "--seed", seed]));
    assert_eq!(run("1"), run("1"));
    assert!(run("1").contains("verdict: RESOLVED"));
}
