use std::path::Path;
use std::process::{Command, Output};

fn logbarrier(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logbarrier"))
        .args(args)
        .current_dir(dir)
        .env("LOGBARRIER_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn without_elapsed(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [f[0], f[1], f[3], f[4]].join(",")
        })
        .collect()
}

#[test]
fn run_writes_trace_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = logbarrier(
        &[
            "run",
            "--problem",
            "kelly",
            "--d",
            "4",
            "--n",
            "50",
            "--budget",
            "iters:40",
            "--out",
            "t/k.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("t/k.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,epochs,elapsed_s,objective,metric"));
    assert!(csv.lines().last().unwrap().starts_with("40,0.8,"));
    let sidecar = std::fs::read_to_string(dir.path().join("t/k.json")).unwrap();
    assert!(sidecar.contains("\"schema\": \"logbarrier-trace/1\""));
    assert!(sidecar.contains("\"problem\": \"kelly\""));
}

#[test]
fn same_seed_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &'static str| {
        [
            "run",
            "--preset",
            "permanent-desk",
            "--budget",
            "iters:300",
            "--seed",
            "7",
            "--out",
            name,
        ]
    };
    assert_eq!(code(&logbarrier(&args("a.csv"), dir.path())), 0);
    assert_eq!(code(&logbarrier(&args("b.csv"), dir.path())), 0);
    let read = |n: &str| std::fs::read_to_string(dir.path().join(n)).unwrap();
    assert_eq!(without_elapsed(&read("a.csv")), without_elapsed(&read("b.csv")));
}

#[test]
fn generated_instance_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--problem", "pip", "--d", "16", "--n", "500", "--data-seed", "3"];
    let gen: Vec<&str> = ["gen"]
        .iter()
        .chain(&common)
        .chain(&["--out", "inst.pip"])
        .copied()
        .collect();
    assert_eq!(code(&logbarrier(&gen, dir.path())), 0);
    let run = |extra: &[&'static str], out: &'static str| {
        let args: Vec<&str> = ["run", "--budget", "iters:200"]
            .iter()
            .chain(&common)
            .chain(extra)
            .chain(&["--out", out])
            .copied()
            .collect();
        assert_eq!(code(&logbarrier(&args, dir.path())), 0);
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let direct = run(&[], "direct.csv");
    let loaded = run(&["--input", "inst.pip"], "loaded.csv");
    assert_eq!(without_elapsed(&direct), without_elapsed(&loaded));
}

#[test]
fn compare_writes_cells_and_merged_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = logbarrier(
        &[
            "compare",
            "--problem",
            "qst",
            "--d",
            "4",
            "--n",
            "500",
            "--groups",
            "6",
            "--budget",
            "iters:50",
            "--seeds",
            "1,2",
            "--out",
            "cmp",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for cell in ["qst-lbsda-s1", "qst-lbsda-s2", "qst-imle-s1", "qst-imle-s2"] {
        assert!(dir.path().join("cmp").join(format!("{cell}.csv")).exists(), "{cell}");
    }
    let merged = std::fs::read_to_string(dir.path().join("cmp/compare.csv")).unwrap();
    let mut lines = merged.lines();
    assert_eq!(
        lines.next(),
        Some("algo,seed,iter,epochs,elapsed_s,objective,metric,approx_error")
    );
    let errors: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(errors.iter().all(|e| *e >= 0.0));
    assert_eq!(errors.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&logbarrier(&["run", "--bogus"], dir.path())), 2);
    assert_eq!(code(&logbarrier(&["run"], dir.path())), 2);
    assert_eq!(
        code(&logbarrier(&["run", "--problem", "qst", "--algo", "em"], dir.path())),
        2
    );
    assert_eq!(code(&logbarrier(&["run", "--preset", "nope"], dir.path())), 2);
    assert_eq!(
        code(&logbarrier(&["run", "--problem", "pip", "--d", "15"], dir.path())),
        2
    );
    assert_eq!(
        code(&logbarrier(
            &["run", "--problem", "kelly", "--budget", "epochs:0"],
            dir.path()
        )),
        2
    );
    let missing = logbarrier(&["run", "--problem", "pip", "--input", "missing.pip"], dir.path());
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.pip"));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_logbarrier"))
        .args(["compare", "--problem", "kelly", "--budget", "iters:5"])
        .current_dir(dir.path())
        .env("LOGBARRIER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad_threads), 2);
}
