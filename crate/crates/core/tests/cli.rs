use std::fs;

use samplekit::cli::run;
use samplekit::io::{decode, OutputFormat};
use samplekit::samplers::{is_valid_sample, UniverseRange};

fn cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("samplekit").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, out, String::from_utf8(err).unwrap())
}

fn text(args: &[&str]) -> String {
    let (code, out, err) = cli(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    String::from_utf8(out).unwrap()
}

fn values(s: &str) -> Vec<u64> {
    s.lines().map(|l| l.parse().unwrap()).collect()
}

#[test]
fn sample_is_deterministic() {
    let args = ["sample", "--method", "r", "--n", "10", "--N", "1000", "--seed", "42"];
    let a = text(&args);
    assert_eq!(a, text(&args));
    let v = values(&a);
    assert_eq!(v.len(), 10);
    assert!(is_valid_sample(&v, UniverseRange::one_to(1000)));
}

#[test]
fn jobs_output_ignores_worker_count() {
    let base = [
        "sample", "--method", "jobs", "--n", "5000", "--N", "2^40", "--jobs", "64", "--seed", "3",
    ];
    let one = text(&[&base[..], &["--workers", "1"]].concat());
    let eight = text(&[&base[..], &["--workers", "8"]].concat());
    assert_eq!(one, eight);
}

#[test]
fn bernoulli_full_rate_lists_universe() {
    assert_eq!(
        text(&["sample", "--method", "bernoulli", "--rho", "1.0", "--N", "5"]),
        "1\n2\n3\n4\n5\n"
    );
}

#[test]
fn every_method_output_validates() {
    let r = UniverseRange::one_to(1 << 20);
    for m in ["s", "h", "d", "b", "r", "r-online", "parallel", "jobs"] {
        let mut args = vec!["sample", "--method", m, "--n", "2000", "--N", "2^20", "--sorted"];
        if m == "parallel" || m == "jobs" {
            args.extend(["--workers", "3"]);
        }
        let v = values(&text(&args));
        assert_eq!(v.len(), 2000, "{m}");
        assert!(is_valid_sample(&v, r), "{m}");
        assert!(v.windows(2).all(|w| w[0] < w[1]), "{m}");
    }
}

#[test]
fn binary_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.bin");
    let p = path.to_str().unwrap();
    let (code, out, _) = cli(&[
        "sample", "--method", "h", "--n", "300", "--N", "10000", "--format", "binary", "--output", p,
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v = decode(&fs::read(&path).unwrap(), OutputFormat::Binary).unwrap();
    let t = values(&text(&["sample", "--method", "h", "--n", "300", "--N", "10000"]));
    assert_eq!(v, t);
}

#[test]
fn zero_based_shift() {
    let one = values(&text(&["sample", "--method", "s", "--n", "4", "--N", "4"]));
    let zero = values(&text(&[
        "sample",
        "--method",
        "s",
        "--n",
        "4",
        "--N",
        "4",
        "--zero-based",
    ]));
    assert_eq!(one, vec![1, 2, 3, 4]);
    assert_eq!(zero, vec![0, 1, 2, 3]);
}

#[test]
fn seed_from_environment() {
    // the flag wins over the environment; without either the default seed is 0
    let a = text(&["sample", "--method", "r", "--n", "5", "--N", "1000000", "--seed", "0"]);
    let b = text(&["sample", "--method", "r", "--n", "5", "--N", "1000000"]);
    if std::env::var_os("SAMPLEKIT_SEED").is_none() {
        assert_eq!(a, b);
    }
}

#[test]
fn usage_errors() {
    for args in [
        &["sample", "--method", "r", "--n", "10", "--N", "100", "--rho", "0.5"][..],
        &["sample", "--method", "bernoulli", "--N", "100"],
        &["sample", "--method", "bernoulli", "--N", "100", "--rho", "1.5"],
        &[
            "sample",
            "--method",
            "jobs",
            "--n",
            "10",
            "--N",
            "100",
            "--jobs",
            "2",
            "--workers",
            "4",
        ],
        &[
            "sample", "--method", "r", "--n", "10", "--N", "100", "--n0", "3", "--m", "4",
        ],
        &["bench", "--methods", "s"],
        &["simulate", "--n", "3"],
    ] {
        let (code, _, err) = cli(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(err.starts_with("error"), "{args:?}: {err}");
    }
}

#[test]
fn bench_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let args = [
        "bench",
        "--methods",
        "r,h",
        "--n",
        "2^6,2^8,2^10",
        "--work",
        "2^12",
        "--output",
        path.to_str().unwrap(),
    ];
    let (code, _, err) = cli(&args);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,n,N,reps,total_ns,ns_per_sample,stddev");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].starts_with("r,64,1125899906842624,64,"));
}

#[test]
fn selftest_quick_and_negative_control() {
    let (code, out, _) = cli(&["selftest", "--level", "quick"]);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&out));
    let (code, _, _) = cli(&["selftest", "--inject-fault"]);
    assert_ne!(code, 0);
}

#[test]
fn graph_commands() {
    let edges = text(&["graph", "--model", "gnm", "--v", "4", "--m", "6", "--seed", "1"]);
    let mut lines: Vec<&str> = edges.lines().collect();
    lines.sort_unstable();
    assert_eq!(lines, ["0 1", "0 2", "0 3", "1 2", "1 3", "2 3"]);
    assert_eq!(text(&["graph", "--model", "gnp", "--v", "30", "--p", "0"]), "");
}

#[test]
fn simulate_commands() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let t = trace.to_str().unwrap();
    let lengths = "20,11,30,5,17,25,9,14,22,8,19,27,22";
    let (code, out, err) = cli(&[
        "simulate",
        "--lengths",
        lengths,
        "--n",
        "50",
        "--seed",
        "7",
        "--trace",
        t,
    ]);
    assert_eq!(code, 0, "{err}");
    let v = values(&String::from_utf8(out).unwrap());
    assert_eq!(v.len(), 50);
    assert!(is_valid_sample(&v, UniverseRange::one_to(229)));
    let assigned: u64 = err
        .lines()
        .filter_map(|l| l.split_whitespace().find_map(|kv| kv.strip_prefix("assigned=")))
        .map(|s| s.parse::<u64>().unwrap())
        .sum();
    assert_eq!(assigned, 50);
    let first = fs::read_to_string(&trace).unwrap();
    cli(&[
        "simulate",
        "--lengths",
        lengths,
        "--n",
        "50",
        "--seed",
        "7",
        "--trace",
        t,
    ]);
    assert_eq!(first, fs::read_to_string(&trace).unwrap());

    let sweep = text(&[
        "simulate",
        "--p",
        "4",
        "--length",
        "1000",
        "--n",
        "100",
        "--delta-sweep",
    ]);
    let mut lines = sweep.lines();
    assert_eq!(lines.next(), Some("delta,t,capacities"));
    assert!(lines.count() >= 3);

    let streams = dir.path().join("streams.txt");
    fs::write(&streams, "1 2 3\n4 5\n6 7 8 9\n").unwrap();
    let v = values(&text(&["simulate", "--streams", streams.to_str().unwrap(), "--n", "9"]));
    let mut v = v;
    v.sort_unstable();
    assert_eq!(v, (1..=9).collect::<Vec<_>>());
    fs::write(&streams, "1 2 x\n").unwrap();
    let (code, _, _) = cli(&["simulate", "--streams", streams.to_str().unwrap(), "--n", "1"]);
    assert_eq!(code, 2);
}
