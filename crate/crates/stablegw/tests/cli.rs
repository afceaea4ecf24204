use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};

use stablegw::gwtree::Tree;

const RDE_SMALL: [&str; 6] = ["--pool", "10000", "--iters", "5", "--readout", "20000"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stablegw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn rde_solve_json_has_estimator_keys() {
    let args = with(&["rde-solve", "--alpha", "2.0", "--seed", "7", "--format", "json"], &RDE_SMALL);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let doc: serde_json::Value = serde_json::from_str(&stdout(&args)).unwrap();
    let result = &doc["summary"]["results"][0];
    for key in ["lambda_chat_mean", "lambda_direct", "lambda_biased"] {
        assert!(result[key].is_f64(), "{key}");
        let se = result[format!("{key}_stderr")].as_f64().unwrap();
        assert!(se >= 0.0, "{key}");
    }
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"].is_boolean()));
}

#[test]
fn alpha_grid_gives_one_row_per_alpha_and_method() {
    let args = with(&["rde-solve", "--alpha-grid", "1.5,2.0"], &RDE_SMALL);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let csv = stdout(&args);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["experiment", "alpha", "method", "statistic", "value", "stderr", "n_samples"]);
    let mut seen = BTreeSet::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), header.len());
        assert!(f[5].parse::<f64>().unwrap() >= 0.0);
        assert!(f[6].parse::<u64>().unwrap() > 0);
        assert!(seen.insert((f[1].to_string(), f[2].to_string())), "duplicate row {line}");
    }
    let alphas: BTreeSet<&str> = seen.iter().map(|p| p.0.as_str()).collect();
    assert_eq!(alphas.len(), 2);
    assert_eq!(seen.len(), 8);
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["rde-solve", "--alpha", "2.5"][..],
        &["rde-solve", "--alpha", "1.0"],
        &["rde-solve", "--pool", "0"],
        &["thm1-scaling", "--n-grid", "16"],
        &["beta-scaling", "--n-grid", "32"],
        &["lambda-sweep", "--alpha-grid", "1.5:0.1:1.2"],
        &["rde-solve", "--no-such-flag"],
        &["rde-solve", "--alpha", "1.5", "--alpha-grid", "1.5,2.0"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for path in [&a, &b] {
        let args = with(&["rde-solve", "--alpha", "1.7", "--seed", "5", "--out", path.to_str().unwrap()], &RDE_SMALL);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        stdout(&args);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let json = |p: &PathBuf| std::fs::read(format!("{}.json", p.display())).unwrap();
    assert_eq!(json(&a), json(&b));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let cases: Vec<Vec<String>> = vec![
        with(&["rde-solve", "--alpha-grid", "1.5,2.0", "--format", "json"], &RDE_SMALL),
        with(&["lambda-sweep", "--alpha-grid", "1.6,2.0"], &RDE_SMALL),
        with(&["thm1-scaling", "--n-grid", "8,16,32", "--replicas", "60"], &RDE_SMALL),
        vec!["beta-scaling".into(), "--n-grid".into(), "8,16".into(), "--replicas".into(), "40".into()],
        with(
            &["backward", "--n-grid", "300", "--k", "10", "--replicas", "20", "--exact-depth", "100"],
            &RDE_SMALL,
        ),
        vec!["tree-dump".into(), "--kind".into(), "size-biased".into(), "--n-grid".into(), "6".into()],
    ];
    for case in cases {
        let outs: Vec<Vec<u8>> = ["1", "4", "16"]
            .iter()
            .map(|t| {
                let mut args: Vec<&str> = case.iter().map(String::as_str).collect();
                args.extend(["--seed", "11", "--threads", t]);
                run(&args).stdout
            })
            .collect();
        assert!(!outs[0].is_empty(), "{case:?}");
        assert!(outs.iter().all(|o| *o == outs[0]), "{case:?}");
    }
}

#[test]
fn tree_dump_parses_back() {
    for kind in ["conditioned", "reduced", "size-biased", "backward"] {
        let text = stdout(&["tree-dump", "--kind", kind, "--alpha", "1.5", "--n-grid", "5", "--seed", "3"]);
        let tree = Tree::parse_dump(&text).unwrap();
        assert!(tree.height() >= 5, "{kind}");
        assert_eq!(tree.generation(tree.root()), 0);
    }
}
