use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TOY: &str = "# triangle with a pendant vertex\n4 4\n0 1\n1 2\n0 2\n2 3\n";

fn maghom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maghom")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn toy_file(dir: &Path) -> String {
    let p = dir.join("toy.txt");
    fs::write(&p, TOY).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn compute_toy() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy_file(dir.path());
    let o = maghom(&["compute", "--graph", &g, "--k", "2", "--l", "2", "--theory", "all"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "theory,k,l,dim,rank_out,rank_in,betti,torsion\n\
         mc,2,2,18,4,0,14,na\n\
         emc,2,2,10,4,0,6,na\n\
         dmc,2,2,8,0,0,8,na\n"
    );
}

#[test]
fn enumerate_toy() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy_file(dir.path());
    let o = maghom(&["enumerate", "--graph", &g, "--k", "2", "--l", "2", "--theory", "mc"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 18);
    assert!(text.lines().all(|l| l.ends_with(" len=2")));
    assert!(text.contains("0,1,0 len=2\n"));
    let o = maghom(&["enumerate", "--graph", &g, "--k", "1", "--l", "2", "--theory", "emc"]);
    assert_eq!(stdout(&o), "0,3 len=2\n1,3 len=2\n3,0 len=2\n3,1 len=2\n");
}

#[test]
fn analyze_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy_file(dir.path());
    let o = maghom(&["analyze", "--graph", &g, "--k", "2"]);
    let text = stdout(&o);
    assert!(text.starts_with("start,end,k,size,structure_type,kernel_dim\n"));
    assert_eq!(text.lines().count(), 11);
    let kernel: usize = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(kernel, 6);
    let o = maghom(&["verify", "--graph", &g, "--l", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy_file(dir.path());
    let code = |args: &[&str]| maghom(args).status.code().unwrap();
    assert_eq!(code(&["compute", "--graph", &g, "--k", "2", "--l", "2", "--budget", "3"]), 3);
    assert_eq!(code(&["enumerate", "--graph", &g, "--k", "2", "--l", "2", "--budget", "3"]), 3);
    assert_eq!(code(&["compute", "--graph", "/nonexistent/graph.txt", "--k", "1", "--l", "1"]), 2);
    assert_eq!(code(&["compute", "--graph", &g, "--k", "1", "--l", "1", "--frobnicate"]), 2);
    assert_eq!(code(&["compute", "--graph", &g, "--k", "1", "--l", "1", "--theory", "xyz"]), 2);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "3 1\n0 7\n").unwrap();
    assert_eq!(code(&["compute", "--graph", bad.to_str().unwrap(), "--k", "1", "--l", "1"]), 2);
    assert_eq!(code(&["experiment", "er", "--n", "10", "--k", "2", "--p", "1.5"]), 2);
    assert_eq!(code(&["experiment", "er", "--n", "10", "--k", "2", "--r", "0.2"]), 2);
    assert_eq!(code(&["experiment", "er", "--n", "10", "--k", "2", "--trials", "0", "--p", "0.5"]), 2);
    assert_eq!(code(&["experiment", "er", "--n", "10", "--k", "2", "--p", "1", "--trials", "5", "--kind", "clt"]), 2);
}

#[test]
fn experiment_outputs_two_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("er");
    let o = maghom(&[
        "experiment", "er", "--n", "40", "--k", "2", "--q", "0.6,1.3", "--trials", "100", "--seed", "7", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text, fs::read_to_string(out.join("summary.csv")).unwrap());
    for f in ["trials_cell0.csv", "trials_cell1.csv", "threshold.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let o = maghom(&["experiment", "rgg", "--n", "30", "--k", "2", "--r", "0.2,0.4", "--trials", "10", "--area", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("rgg,30,2,r,"));
}

/// Every output file of the run, by name.
fn run_files(args: &[&str], workers: &str, dir: &Path) -> Vec<(String, Vec<u8>)> {
    let out = dir.join(format!("w{workers}"));
    let mut full: Vec<&str> = vec!["--workers", workers];
    full.extend_from_slice(args);
    let out_s = out.to_str().unwrap().to_string();
    full.extend_from_slice(&["--out", &out_s]);
    let o = maghom(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files.push(("stdout".into(), o.stdout));
    files
}

#[test]
fn byte_identical_under_1_2_8_workers() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy_file(dir.path());
    let invocations: Vec<Vec<&str>> = vec![
        vec!["experiment", "er", "--n", "14,18", "--k", "2", "--q", "0.3,0.7", "--trials", "30", "--seed", "5"],
        vec!["experiment", "rgg", "--n", "20", "--k", "2", "--q", "0.4,0.6", "--trials", "30", "--seed", "5"],
        vec!["experiment", "er", "--n", "10,14", "--k", "2", "--p", "0.9", "--trials", "30", "--kind", "ratio"],
        vec!["experiment", "er", "--n", "15", "--k", "2", "--p", "0.4", "--trials", "60", "--kind", "clt"],
        vec!["compute", "--graph", &g, "--k", "2", "--l", "3", "--torsion"],
        vec!["analyze", "--graph", &g, "--k", "2"],
    ];
    for (i, args) in invocations.iter().enumerate() {
        let base = dir.path().join(format!("run{i}"));
        let one = run_files(args, "1", &base);
        assert_eq!(one, run_files(args, "2", &base), "{args:?}");
        assert_eq!(one, run_files(args, "8", &base), "{args:?}");
    }
}
