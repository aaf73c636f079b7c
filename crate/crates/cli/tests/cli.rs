use std::collections::BTreeMap;
use std::process::Command;

use bgc_cli::{parse_config, run_experiments, write_rows, Format, ResultRow, TableFile};
use bgc_core::{GradientVector, SchemeParams, TableAttack};

fn bgc(args: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bgc"))
        .args(args.split_whitespace())
        .output()
        .unwrap()
}

fn config(args: &str) -> bgc_cli::ExperimentConfig {
    parse_config(std::iter::once("bgc").chain(args.split_whitespace())).unwrap()
}

#[test]
fn figure_sweep_through_the_binary() {
    let out =
        bgc("--s 10 --u 1 --p 16 --d 1 --sweep u=1..11 --adversary symmetrization --trials 50");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<ResultRow> = reader.deserialize().map(Result::unwrap).collect();
    let c_max: Vec<usize> = rows.iter().map(|r| r.c_max).collect();
    assert_eq!(c_max, vec![10, 5, 3, 2, 2, 1, 1, 1, 1, 1, 0]);
    assert!(rows.iter().all(ResultRow::passes));
}

#[test]
fn honest_single_trial_is_free() {
    let rows = run_experiments(&config("--s 3 --u 2 --p 8 --d 2 --trials 1")).unwrap();
    let r = &rows[0];
    assert_eq!((r.t_max, r.c_max, r.kappa_max), (0, 0, 0.0));
    assert_eq!(r.total_comm_max, (r.n * r.d) as f64);
}

#[test]
fn csv_round_trips_exactly() {
    let rows = run_experiments(&config(
        "--s 4 --u 1 --m 2 --p 16 --d 3 --q 7 --adversary flipflop --trials 30 --sweep u=1..5",
    ))
    .unwrap();
    let mut buf = Vec::new();
    write_rows(&rows, Format::Csv, &mut buf).unwrap();
    let back: Vec<ResultRow> = csv::Reader::from_reader(buf.as_slice())
        .deserialize()
        .map(Result::unwrap)
        .collect();
    assert_eq!(back, rows);
    let mut json = Vec::new();
    write_rows(&rows, Format::Json, &mut json).unwrap();
    let back: Vec<ResultRow> = serde_json::from_slice(&json).unwrap();
    assert_eq!(back, rows);
}

#[test]
fn table_file_adversary() {
    let dir = tempfile::tempdir().unwrap();
    let params = SchemeParams::new(1, 1, 1, 4, 1, 1 << 16).unwrap();
    let lie: Vec<_> = [1, 2, 3, -4]
        .iter()
        .map(|&v| GradientVector::from_signed(&[v], params.q))
        .collect();
    let attack = TableAttack {
        claims: BTreeMap::from([(0, lie)]),
    };
    let path = dir.path().join("claims.json");
    std::fs::write(
        &path,
        serde_json::to_string(&TableFile::from_attack(&params, &attack)).unwrap(),
    )
    .unwrap();
    let out = bgc(&format!(
        "--s 1 --u 1 --p 4 --d 1 --trials 20 --format json --adversary table:{}",
        path.display()
    ));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<ResultRow> = serde_json::from_slice(&out.stdout).unwrap();
    // the lie sits at a fixed index, so every trial needs exactly one computation
    assert_eq!((rows[0].c_max, rows[0].c_mean), (1, 1.0));
    assert_eq!(rows[0].adversary, format!("table:{}", path.display()));
}

#[test]
fn oversized_tables_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("claims.json");
    std::fs::write(
        &path,
        r#"{"q": 65536, "d": 1, "claims": {"0": [[0],[0],[0],[0]], "1": [[0],[0],[0],[0]]}}"#,
    )
    .unwrap();
    let out = bgc(&format!(
        "--s 1 --u 1 --p 4 --d 1 --adversary table:{}",
        path.display()
    ));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn usage_errors() {
    let out = bgc("--u 1 --p 8 --d 1");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`s`"));
    let out = bgc("--s 1 --u 1 --p 8 --d 1 --frobnicate");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_and_transcripts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.csv"));
        let dump = dir.path().join(tag);
        let status = bgc(&format!(
            "--s 3 --u 1 --m 2 --p 16 --d 2 --adversary symmetrization-coin --trials 15 --seed 77 --out {} --dump-transcripts {}",
            out.display(),
            dump.display()
        ));
        assert!(status.status.success());
        let mut files: Vec<_> = std::fs::read_dir(&dump)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        let transcripts: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        (std::fs::read(out).unwrap(), transcripts)
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert_eq!(a.1.len(), 15);
    let first = String::from_utf8(a.1[0].clone()).unwrap();
    let record: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(record["t"], 0);
    assert_eq!(record["direction"], "worker_to_main");
}

#[test]
fn figure_output() {
    let out = bgc("--s 10 --u 1 --p 10000 --d 1000000 --figure fig1");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("u,c_max,total_comm_symbols,draco_total_comm,reduction_fraction")
    );
    assert_eq!(lines.count(), 11);
    let out = bgc("--s 10 --u 1 --p 1000000 --d 1 --figure appendixF-convergence");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("p,ratio,ratio_limit\n13,"));
}
