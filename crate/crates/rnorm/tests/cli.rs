use std::path::Path;
use std::process::{Command, Output};

use rnorm::io::write_dense;
use rnorm_core::rng::gaussian_block;
use rnorm_core::{make_powerlaw_matrix, DenseMatrix, SpectrumSpec};

fn rnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnorm"))
        .args(args)
        .env_remove("RNORM_SEED")
        .env_remove("RNORM_JOBS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn rownorm_from_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("A.mtx");
    std::fs::write(
        &mtx,
        "%%MatrixMarket matrix coordinate real general\n4 6 5\n1 1 3\n1 2 4\n2 3 1\n3 6 -2\n4 5 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("est.csv");
    let o = rnorm(&[
        "rownorm",
        "--input",
        p(&mtx),
        "--budget",
        "16",
        "--method",
        "adaptive",
        "--seed",
        "7",
        "--out",
        p(&out),
        "--emit-exact",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# rnorm "), "{csv}");
    assert!(csv.contains("# method=adaptive seed=7 m_s=4 m_g=4"), "{csv}");
    assert!(csv.contains("# queries_forward="), "{csv}");
    assert!(csv.contains("\ni,estimate,exact\n"), "{csv}");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 4);
    // rank 4 ≤ m_s, so the estimate is exact
    let exact = [25.0, 1.0, 4.0, 0.25];
    for (row, want) in rows.iter().zip(exact) {
        let est: f64 = row[1].parse().unwrap();
        assert!((est - want).abs() < 1e-10, "{row:?}");
        assert_eq!(row[2].parse::<f64>().unwrap(), want);
    }
    assert!(stdout(&o).starts_with("total_estimate="));
}

#[test]
fn seeds_reproduce_and_env_overrides_default() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("A.bin");
    write_dense(&a, &make_powerlaw_matrix(&SpectrumSpec::new(40, 1.0, 3)).unwrap()).unwrap();
    let run = |extra: &[&str], env_seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_rnorm"));
        cmd.args(["rownorm", "--input", p(&a), "--m-s", "4", "--m-g", "3"])
            .args(extra);
        cmd.env_remove("RNORM_SEED");
        if let Some(s) = env_seed {
            cmd.env("RNORM_SEED", s);
        }
        let o = cmd.output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        data_rows(&stdout(&o))
    };
    let default = run(&[], None);
    assert_eq!(default, run(&["--seed", "7"], None));
    assert_eq!(run(&[], Some("11")), run(&["--seed", "11"], None));
    assert_ne!(default, run(&["--seed", "11"], None));
}

#[test]
fn jl_width_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("A.bin");
    write_dense(&a, &DenseMatrix::identity(8)).unwrap();
    let o = rnorm(&["rownorm", "--input", p(&a), "--method", "jl", "--width", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("queries_forward=5 queries_transpose=0"));
    let o2 = rnorm(&["rownorm", "--input", p(&a), "--method", "jl", "--budget", "5"]);
    assert_eq!(data_rows(&stdout(&o)), data_rows(&stdout(&o2)));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("A.bin");
    write_dense(&a, &DenseMatrix::identity(8)).unwrap();
    for args in [
        vec!["rownorm", "--input", p(&a), "--budget", "16", "--bogus"],
        vec!["rownorm", "--input", p(&a), "--budget", "16", "--m-s", "2"],
        vec!["rownorm", "--input", p(&a), "--m-s", "2"],
        vec![
            "rownorm",
            "--input",
            p(&a),
            "--method",
            "jl",
            "--m-s",
            "2",
            "--m-g",
            "2",
        ],
        vec!["rownorm", "--input", p(&a), "--budget", "2"],
        vec!["rownorm", "--input", p(&a), "--budget", "64"],
        vec!["sweep", "--d", "5000"],
        vec!["frobnicate"],
        vec![],
    ] {
        let o = rnorm(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert_eq!(code(&rnorm(&["--help"])), 0);
}

#[test]
fn data_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mtx");
    std::fs::write(
        &bad,
        "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 1 1\n9 1 1\n",
    )
    .unwrap();
    let o = rnorm(&["rownorm", "--input", p(&bad), "--budget", "4"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.mtx:4"), "{}", stderr(&o));

    let trunc = dir.path().join("t.bin");
    let mut bytes = b"RNORM-DENSE v1 131072 1024\n".to_vec();
    bytes.extend_from_slice(&[0u8; 80]);
    std::fs::write(&trunc, bytes).unwrap();
    let o = rnorm(&["rownorm", "--input", p(&trunc), "--budget", "8"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let o = rnorm(&[
        "rownorm",
        "--input",
        p(&dir.path().join("missing.bin")),
        "--budget",
        "8",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn singular_factor_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("rank1.bin");
    let m = DenseMatrix::from_fn(30, 3, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
    write_dense(&a, &m).unwrap();
    let o = rnorm(&["leverage", "--input", p(&a), "--r1", "12", "--m-s", "1", "--m-g", "1"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn leverage_prints_sum_and_three_columns() {
    let dir = tempfile::tempdir().unwrap();
    let tall = dir.path().join("tall.bin");
    write_dense(&tall, &gaussian_block(300, 8, 5, 9, 1.0)).unwrap();
    let out = dir.path().join("lev.csv");
    let o = rnorm(&[
        "leverage",
        "--input",
        p(&tall),
        "--r1",
        "64",
        "--budget",
        "16",
        "--emit-exact",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.starts_with("sum_theta_estimate="), "{line}");
    let total: f64 = line.trim().split(' ').next().unwrap()["sum_theta_estimate=".len()..]
        .parse()
        .unwrap();
    assert!((total - 8.0).abs() < 4.0, "{total}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("\nrow,theta_estimate,theta_exact\n"));
    assert!(csv.contains("r1=64"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 300);
    let exact_sum: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((exact_sum - 8.0).abs() < 1e-9);
}

#[test]
fn distance_with_pair_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("pts.bin");
    write_dense(
        &a,
        &DenseMatrix::from_rows(&[[0.0, 0.0, 0.0], [1.0, 2.0, 2.0], [0.0, 0.0, 0.0], [3.0, 0.0, 4.0]]),
    )
    .unwrap();
    let pairs = dir.path().join("pairs.csv");
    std::fs::write(&pairs, "0,1\n0,2\n3,0\n").unwrap();
    let o = rnorm(&[
        "distance",
        "--input",
        p(&a),
        "--pairs",
        p(&pairs),
        "--m-s",
        "2",
        "--m-g",
        "2",
        "--emit-exact",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][..2], ["0".to_string(), "1".to_string()]);
    assert_eq!(rows[1][2], "0");
    assert_eq!(rows[2][3], "25");

    std::fs::write(&pairs, "0,1\n1,0\n").unwrap();
    let o = rnorm(&[
        "distance",
        "--input",
        p(&a),
        "--pairs",
        p(&pairs),
        "--m-s",
        "2",
        "--m-g",
        "2",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("pairs.csv:2"), "{}", stderr(&o));
}

#[test]
fn oracle_and_generate() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("pl.bin");
    let o = rnorm(&[
        "generate",
        "--kind",
        "powerlaw",
        "--d",
        "16",
        "--c",
        "2",
        "--seed",
        "3",
        "--out",
        p(&a),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = rnorm(&["oracle", "--input", p(&a), "--kind", "rownorm"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let total: f64 = data_rows(&stdout(&o))
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .sum();
    let want: f64 = (1..=16).map(|i| (i as f64).powi(-4)).sum();
    assert!((total - want).abs() < 1e-12);

    let g = dir.path().join("g.bin");
    assert_eq!(
        code(&rnorm(&[
            "generate",
            "--kind",
            "gaussian",
            "--rows",
            "50",
            "--cols",
            "4",
            "--out",
            p(&g)
        ])),
        0
    );
    let o = rnorm(&["oracle", "--input", p(&g), "--kind", "leverage"]);
    assert!(stdout(&o).contains("sum_theta_exact=4"), "{}", stdout(&o));
    let o = rnorm(&["oracle", "--input", p(&g), "--kind", "distance"]);
    assert_eq!(data_rows(&stdout(&o)).len(), 50 * 49 / 2);
}

#[test]
fn sweep_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = rnorm(&[
        "sweep",
        "--d",
        "40",
        "--c",
        "0.5,2",
        "--budgets",
        "8,16,24",
        "--reps",
        "3",
        "--jobs",
        "2",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("\nmethod,c,d,budget,seed,max_elem_err,frob_err,wall_time_s\n"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2 * 3 * 3 * 2);
    assert_eq!(rows[0][..5], ["adaptive", "0.5", "40", "8", "7"].map(String::from));
    let summary = std::fs::read_to_string(dir.path().join("sweep.summary.csv")).unwrap();
    assert_eq!(data_rows(&summary).len(), 2 * 3 * 2);
    assert!(stdout(&o).contains("c=2 method=adaptive frobenius_slope="));

    // same invocation, different worker count: identical records apart from timings
    let out2 = dir.path().join("sweep2.csv");
    let o = rnorm(&[
        "sweep",
        "--d",
        "40",
        "--c",
        "0.5,2",
        "--budgets",
        "8,16,24",
        "--reps",
        "3",
        "--jobs",
        "1",
        "--out",
        p(&out2),
    ]);
    assert_eq!(code(&o), 0);
    let strip = |rows: Vec<Vec<String>>| {
        rows.into_iter()
            .map(|mut r| {
                r.pop();
                r
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(rows), strip(data_rows(&std::fs::read_to_string(&out2).unwrap())));
}
