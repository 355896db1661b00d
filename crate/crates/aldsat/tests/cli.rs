//! Black-box checks of the command-line interface: exit codes, output
//! formats, determinism, and the experiment pipeline end to end.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aldsat"))
        .args(args)
        .output()
        .expect("spawn aldsat")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aldsat-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("scratch dir");
    dir.join(name)
}

fn write_scratch(name: &str, content: &str) -> PathBuf {
    let path = scratch(name);
    fs::write(&path, content).expect("write scratch file");
    path
}

/// Three pigeons, two holes: every pigeon gets a hole, no hole gets two.
const PIGEONS_3X2: &str = "p cnf 6 9\n\
    1 2 0\n3 4 0\n5 6 0\n\
    -1 -3 0\n-1 -5 0\n-3 -5 0\n\
    -2 -4 0\n-2 -6 0\n-4 -6 0\n";

#[test]
fn help_exits_zero_and_bad_flags_exit_one() {
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout_of(&help).contains("Usage"));

    let unknown = run(&["solve", "--no-such-flag", "x.cnf"]);
    assert_eq!(unknown.status.code(), Some(1));

    let missing = run(&["order", "--strategy", "alds"]);
    assert_eq!(missing.status.code(), Some(1), "required --depth missing");
}

#[test]
fn solve_reports_sat_with_a_model_that_checks_out() {
    let cnf = scratch("sat.cnf");
    let gen = run(&[
        "gen",
        "--vars",
        "40",
        "--ratio",
        "3.5",
        "--seed",
        "5",
        "-o",
        cnf.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));

    let out = run(&["solve", cnf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(10));
    let text = stdout_of(&out);
    assert!(text.contains("s SATISFIABLE"));
    assert!(text.contains("c nodes-expanded="));
    assert!(text.contains("c rank-of-first-solution="));

    // Parse the v lines and re-check every clause straight off the file.
    let mut values = vec![None::<bool>; 40];
    for line in text.lines().filter(|l| l.starts_with("v ")) {
        for token in line[2..].split_whitespace() {
            let lit: i64 = token.parse().expect("v-line literal");
            if lit != 0 {
                values[(lit.unsigned_abs() - 1) as usize] = Some(lit > 0);
            }
        }
    }
    let model: Vec<bool> = values
        .into_iter()
        .map(|v| v.expect("model must assign every variable"))
        .collect();
    let dimacs = fs::read_to_string(&cnf).unwrap();
    let ints: Vec<i64> = dimacs
        .lines()
        .filter(|l| !l.starts_with('c') && !l.starts_with('p'))
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().expect("dimacs literal"))
        .collect();
    let mut clause_satisfied = false;
    let mut clauses_checked = 0;
    for lit in ints {
        if lit == 0 {
            assert!(clause_satisfied, "emitted model falsifies a clause");
            clause_satisfied = false;
            clauses_checked += 1;
        } else {
            clause_satisfied |= model[(lit.unsigned_abs() - 1) as usize] == (lit > 0);
        }
    }
    assert_eq!(clauses_checked, 140);
}

#[test]
fn solve_reports_unsat_with_exit_twenty() {
    let cnf = write_scratch("pigeons.cnf", PIGEONS_3X2);
    for strategy in ["dfs", "ilds", "dds", "alds"] {
        let out = run(&["solve", "--strategy", strategy, cnf.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(20), "{strategy}");
        assert!(stdout_of(&out).contains("s UNSATISFIABLE"));
    }
}

#[test]
fn solve_rejects_the_repeating_strategy() {
    let cnf = write_scratch("lds-reject.cnf", PIGEONS_3X2);
    let out = run(&["solve", "--strategy", "lds", cnf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("lds"));
}

#[test]
fn unparseable_input_exits_one() {
    let cnf = write_scratch("garbage.cnf", "this is not a cnf file\n");
    let out = run(&["solve", cnf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr_of(&out).is_empty());
}

#[test]
fn exhausted_budget_exits_two() {
    let cnf = scratch("budget.cnf");
    run(&[
        "gen",
        "--vars",
        "30",
        "--ratio",
        "4.26",
        "--seed",
        "3",
        "-o",
        cnf.to_str().unwrap(),
    ]);
    let out = run(&["solve", "--budget", "1", cnf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout_of(&out).contains("s UNKNOWN"));
    assert!(stderr_of(&out).contains("budget"));
}

#[test]
fn order_prints_the_depth3_alds_sequence() {
    let out = run(&["order", "--strategy", "alds", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out), "0\n4\n2\n1\n6\n5\n3\n7\n");
}

#[test]
fn model_table_matches_known_depth12_values() {
    let args = ["model", "--depth", "12", "--linear", "0.56,0.015"];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for row in [
        "dfs,0.410188",
        "ilds,0.228320",
        "dds,0.267444",
        "alds,0.207261",
        "optimal,0.200357",
    ] {
        assert!(text.contains(row), "missing row {row}");
    }
    let again = run(&args);
    assert_eq!(out.stdout, again.stdout, "model output is not reproducible");
}

#[test]
fn gen_and_map_are_deterministic() {
    let a = run(&["gen", "--vars", "25", "--ratio", "4.2", "--seed", "9"]);
    let b = run(&["gen", "--vars", "25", "--ratio", "4.2", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let cnf = write_scratch("map.cnf", &stdout_of(&a));
    let map_args = ["map", "--depth", "3", cnf.to_str().unwrap()];
    let first = run(&map_args);
    let second = run(&map_args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let hex = stdout_of(&first);
    assert_eq!(hex.trim().len(), 2, "8 subtree bits pack into two hex digits");

    let json = run(&[
        "map",
        "--depth",
        "3",
        "--format",
        "json",
        cnf.to_str().unwrap(),
    ]);
    assert_eq!(json.status.code(), Some(0));
    let text = stdout_of(&json);
    assert!(text.contains("\"solution_count\""));
    assert!(text.contains("\"entered_count\""));
}

#[test]
fn experiment_pipeline_runs_end_to_end() {
    let dataset = scratch("pipeline.json");
    let build = run(&[
        "experiment",
        "build",
        "--count",
        "6",
        "--vars",
        "25",
        "--ratio",
        "4.2",
        "--depth",
        "4",
        "--seed",
        "11",
        "--dataset",
        dataset.to_str().unwrap(),
    ]);
    assert_eq!(build.status.code(), Some(0), "{}", stderr_of(&build));
    assert!(stderr_of(&build).contains("kept 6 instances"));

    let eval = run(&["experiment", "eval", "--dataset", dataset.to_str().unwrap()]);
    assert_eq!(eval.status.code(), Some(0));
    let eval_text = stdout_of(&eval);
    assert!(eval_text.starts_with("order,skip_dead,e_star"));
    assert!(eval_text.contains("rank,unsolved"));

    let order_file = scratch("greedy-order.txt");
    let greedy = run(&[
        "experiment",
        "greedy",
        "--dataset",
        dataset.to_str().unwrap(),
        "--emit-order",
        order_file.to_str().unwrap(),
    ]);
    assert_eq!(greedy.status.code(), Some(0));
    assert!(stdout_of(&greedy).starts_with("position,subtree,covered"));
    let emitted = fs::read_to_string(&order_file).unwrap();
    assert_eq!(emitted.lines().count(), 16, "one line per depth-4 subtree");

    let by_name = run(&[
        "experiment",
        "eval",
        "--dataset",
        dataset.to_str().unwrap(),
        "--order",
        "greedy",
        "--format",
        "json",
    ]);
    let by_file = run(&[
        "experiment",
        "eval",
        "--dataset",
        dataset.to_str().unwrap(),
        "--order",
        &format!("file:{}", order_file.display()),
        "--format",
        "json",
    ]);
    assert_eq!(by_name.status.code(), Some(0));
    assert_eq!(by_file.status.code(), Some(0));
    let left = stdout_of(&by_name);
    let right = stdout_of(&by_file);
    let e_star_of = |text: &str| {
        let tail = &text[text.find("\"e_star\"").expect("e_star field")..];
        tail.split(&[':', ','][..]).nth(1).unwrap().trim().to_owned()
    };
    assert_eq!(e_star_of(&left), e_star_of(&right));

    let split = run(&[
        "experiment",
        "split",
        "--dataset",
        dataset.to_str().unwrap(),
        "--seed",
        "2",
    ]);
    assert_eq!(split.status.code(), Some(0));
    let split_text = stdout_of(&split);
    assert!(split_text.starts_with("half,size,greedy_e_star,alds_e_star"));
    assert!(split_text.contains("train,3,"));
    assert!(split_text.contains("test,3,"));

    let sweep = run(&[
        "experiment",
        "sweep",
        "--dataset",
        dataset.to_str().unwrap(),
        "--xs",
        "0,0.0055,0.015",
    ]);
    assert_eq!(sweep.status.code(), Some(0));
    let sweep_text = stdout_of(&sweep);
    assert!(sweep_text.starts_with("x,e_star"));
    assert_eq!(sweep_text.lines().count(), 4, "header plus one row per slope");

    let missing = run(&["experiment", "eval", "--dataset", "no-such-file.json"]);
    assert_eq!(missing.status.code(), Some(1));
}
