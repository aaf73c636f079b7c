//! The acceptance criteria of the simulator, one function each. Every
//! function returns a one-line summary on success and the reason on failure.

use std::path::Path;

use bgc_cli::{execute, parse_config, run_experiments, run_trial, AdversarySpec, ExperimentConfig};
use bgc_core::bounds::kappa_ratio;
use bgc_core::rng::{substream, Stream};
use bgc_core::{
    comm_lower, draco_baseline, indistinguishability_check, local_comp_lower, ratio_limit,
    scheme_upper_bounds, DrawPolicy, SchemeParams,
};

pub type Outcome = Result<String, String>;

fn config(
    params: SchemeParams,
    adversary: AdversarySpec,
    trials: usize,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        params,
        adversary,
        trials,
        seed,
        sweep: None,
        out: None,
        format: Default::default(),
        dump_transcripts: None,
        figure: None,
        draw: DrawPolicy::LowestIndex,
    }
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

/// Every configuration of the recovery suite: all (s, u) with s <= 5 and
/// u <= s + 1, m in 1..=3, block length in {4, 8, 32}; d and q rotate.
fn suite() -> Vec<SchemeParams> {
    let mut out = Vec::new();
    let mut k = 0usize;
    for s in 0..=5 {
        for u in 1..=s + 1 {
            for m in 1..=3 {
                for len in [4, 8, 32] {
                    let d = 1 + k % 4;
                    let q = if k.is_multiple_of(2) { 1 << 16 } else { 2 };
                    out.push(SchemeParams::new(s, u, m, m * len, d, q).unwrap());
                    k += 1;
                }
            }
        }
    }
    out
}

pub fn exact_recovery() -> Outcome {
    let mut runs = 0;
    let mut configs = 0;
    for params in suite() {
        for adversary in AdversarySpec::SUITE {
            let rows = run_experiments(&config(params, adversary.clone(), 1000, 1))
                .map_err(|e| format!("{adversary}: {e}"))?;
            ensure(rows.iter().all(|r| r.correct), || {
                format!("{params:?} {adversary}: wrong output")
            })?;
            runs += rows[0].trials;
            configs += 1;
        }
    }
    Ok(format!(
        "{runs} runs over {configs} configurations, all exact, no honest worker eliminated"
    ))
}

pub fn computation_optimality() -> Outcome {
    let mut ticks = Vec::new();
    for u in 1..=11 {
        let params = SchemeParams::new(10, u, 1, 16, 1, 1 << 16).unwrap();
        let rows = run_experiments(&config(params, AdversarySpec::Symmetrization, 200, 2))
            .map_err(|e| e.to_string())?;
        ticks.push(rows[0].c_max);
    }
    let expected = vec![10, 5, 3, 2, 2, 1, 1, 1, 1, 1, 0];
    ensure(ticks == expected, || {
        format!("worst-case c = {ticks:?}, expected {expected:?}")
    })?;

    let mut witnesses = 0;
    let mut rng = substream(2, Stream::Adversary, 0);
    for s in 1..=5 {
        for u in 1..=s {
            let params = SchemeParams::new(s, u, 1, 8, 2, 1 << 16).unwrap();
            for budget in 0..local_comp_lower(&params) {
                for _ in 0..20 {
                    let w = indistinguishability_check(&params, budget, &mut rng)
                        .map_err(|e| e.to_string())?;
                    ensure(w.holds(), || {
                        format!("s={s} u={u} budget={budget}: no witness")
                    })?;
                    witnesses += 1;
                }
            }
        }
    }
    Ok(format!(
        "worst-case c = {ticks:?}; {witnesses} two-world witnesses below budget"
    ))
}

pub fn bound_compliance() -> Outcome {
    let mut rows = 0;
    for params in suite() {
        for adversary in [
            AdversarySpec::Symmetrization,
            AdversarySpec::SymmetrizationCollusive,
            AdversarySpec::FlipFlop,
            AdversarySpec::Random,
            AdversarySpec::Malformed,
        ] {
            let out = run_experiments(&config(params, adversary.clone(), 200, 3))
                .map_err(|e| e.to_string())?;
            ensure(out.iter().all(|r| r.bounds_ok), || {
                format!("{params:?} {adversary}: bound violated")
            })?;
            rows += out[0].trials;
        }
    }
    let params = SchemeParams::new(2, 1, 1, 8, 1, 1 << 16).unwrap();
    let b = scheme_upper_bounds::<f64>(&params);
    ensure(
        (b.rounds, b.c) == (6, 2) && (b.kappa - 12.3125).abs() <= 1e-9 * 12.3125,
        || format!("bound triple ({}, {}, {})", b.rounds, b.c, b.kappa),
    )?;
    let worst = run_experiments(&config(params, AdversarySpec::Symmetrization, 100, 3))
        .map_err(|e| e.to_string())?;
    ensure(worst[0].t_max == 6 && worst[0].c_max == 2, || {
        format!("worst case T = {}, c = {}", worst[0].t_max, worst[0].c_max)
    })?;
    Ok(format!(
        "{rows} transcripts within bounds; (T, c, kappa) <= (6, 2, 12.3125) attained T = 6, c = 2"
    ))
}

pub fn communication_reduction() -> Outcome {
    let total = |u: usize| {
        let params = SchemeParams::new(10, u, 1, 10_000, 1_000_000, 1 << 16).unwrap();
        (params.n * params.d) as f64 + scheme_upper_bounds::<f64>(&params).kappa
    };
    let ratio = total(1) / total(11);
    let draco = draco_baseline(&SchemeParams::new(10, 11, 1, 10_000, 1_000_000, 1 << 16).unwrap())
        .total_comm::<f64>();
    ensure(draco == total(11), || {
        format!("baseline {draco} differs from u = 11 total {}", total(11))
    })?;
    let target = 11.0 / 21.0;
    ensure((ratio - target).abs() / target < 0.01, || {
        format!("ratio {ratio}, expected {target}")
    })?;
    Ok(format!(
        "total_comm(u=1) / total_comm(u=11) = {ratio:.6} ({:.1}% reduction)",
        100.0 * (1.0 - ratio)
    ))
}

pub fn converse_and_limit() -> Outcome {
    let small = SchemeParams::new(2, 1, 1, 8, 1, 1 << 16).unwrap();
    let lower = comm_lower::<f64>(&small).map_err(|e| e.to_string())?;
    ensure((lower - 28f64.log2() / 16.0).abs() < 1e-12, || {
        format!("comm_lower = {lower}")
    })?;

    let mut points = 0;
    'sweep: for s in 0..=12 {
        for u in 1..=s + 1 {
            for exp in 1..=20 {
                for q in [2u64, 3, 16, 256, 1 << 16, 1 << 32] {
                    for m in [1, 2, 4] {
                        let len = (1usize << exp).max(s / u);
                        let params = SchemeParams::new(s, u, m, m * len, 1, q).unwrap();
                        let upper = scheme_upper_bounds::<f64>(&params).kappa;
                        let lower = comm_lower::<f64>(&params).map_err(|e| e.to_string())?;
                        ensure(upper >= lower, || {
                            format!("{params:?}: upper {upper} < lower {lower}")
                        })?;
                        points += 1;
                        if points == 10_000 {
                            break 'sweep;
                        }
                    }
                }
            }
        }
    }
    ensure(points == 10_000, || format!("only {points} sweep points"))?;

    let mut report = Vec::new();
    let mut failures = Vec::new();
    for u in [1, 2, 5] {
        let params = SchemeParams::new(10, u, 1, 1_000_000, 1, 1 << 16).unwrap();
        let ratio = kappa_ratio::<f64>(&params).map_err(|e| e.to_string())?;
        let limit = ratio_limit::<f64>(&params).map_err(|e| e.to_string())?;
        let gap = (ratio - limit).abs() / limit;
        report.push(format!(
            "u={u}: ratio {ratio:.2} vs limit {limit:.2} ({:.1}% off)",
            100.0 * gap
        ));
        if gap >= 0.05 {
            failures.push(format!(
                "u={u} is {:.1}% from its limit at p = 1e6",
                100.0 * gap
            ));
        }
        if u == 1 && limit != 320.0 {
            failures.push(format!("the u=1 limit evaluates to {limit}, not 320"));
        }
    }
    let detail = format!(
        "comm_lower exact; {points} points with upper >= lower; {}",
        report.join("; ")
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

pub fn replication_limit() -> Outcome {
    let mut runs = 0;
    let adversaries = [
        AdversarySpec::None,
        AdversarySpec::Symmetrization,
        AdversarySpec::SymmetrizationCollusive,
        AdversarySpec::SymmetrizationCoin,
        AdversarySpec::FlipFlop,
        AdversarySpec::Random,
        AdversarySpec::Malformed,
    ];
    for s in 0..=5 {
        for (m, len) in [(1, 4), (2, 8), (3, 32)] {
            let params = SchemeParams::new(s, s + 1, m, m * len, 1 + s % 3, 1 << 16).unwrap();
            for adversary in &adversaries {
                let c = config(params, adversary.clone(), 200, 6);
                let rows = run_experiments(&c).map_err(|e| e.to_string())?;
                let r = &rows[0];
                ensure(
                    r.t_max == 0 && r.c_max == 0 && r.kappa_max == 0.0 && r.correct,
                    || {
                        format!(
                            "{params:?} {adversary}: T = {}, c = {}, kappa = {}",
                            r.t_max, r.c_max, r.kappa_max
                        )
                    },
                )?;
                let trial = run_trial(&c, &params, 6).map_err(|e| e.to_string())?;
                ensure(
                    *trial.metrics.replication.numer() == 2 * s as u64 + 1
                        && *trial.metrics.replication.denom() == 1,
                    || format!("{params:?}: replication {}", trial.metrics.replication),
                )?;
                runs += r.trials;
            }
        }
    }
    Ok(format!(
        "{runs} runs at u = s + 1 with T = c = kappa = 0 and replication 2s + 1"
    ))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

pub fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (i, args) in [
        "--s 3 --u 1 --m 2 --p 16 --d 2 --adversary symmetrization --sweep u=1..4 --trials 25 --seed 9",
        "--s 4 --u 2 --p 8 --d 3 --q 2 --adversary flipflop --trials 40 --seed 11 --seeded-draw",
        "--s 5 --u 1 --m 3 --p 96 --d 1 --adversary random --sweep p=24,48,96 --trials 10 --seed 5 --format json",
    ]
    .iter()
    .enumerate()
    {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let dir = tmp.path().join(format!("{i}-{attempt}"));
            let out = tmp.path().join(format!("{i}-{attempt}.out"));
            let argv = format!("bgc {args} --out {} --dump-transcripts {}", out.display(), dir.display());
            let c = parse_config(argv.split_whitespace()).map_err(|e| e.to_string())?;
            let passed = execute(&c).map_err(|e| e.to_string())?;
            ensure(passed, || format!("`{args}` failed its checks"))?;
            outputs.push((std::fs::read(&out).unwrap(), read_dir_sorted(&dir)));
        }
        ensure(outputs[0] == outputs[1], || format!("`{args}` differs between runs"))?;
        ensure(!outputs[0].1.is_empty(), || format!("`{args}` dumped no transcripts"))?;
        compared += 1 + outputs[0].1.len();
    }
    Ok(format!("{compared} files byte-identical across reruns"))
}

pub type Criterion = (&'static str, fn() -> Outcome);

/// Every criterion with a short name, in order.
pub const CRITERIA: [Criterion; 7] = [
    ("exact recovery", exact_recovery),
    ("computation optimality", computation_optimality),
    ("bound compliance", bound_compliance),
    ("communication reduction", communication_reduction),
    ("converse bound and ratio limit", converse_and_limit),
    ("replication limit degeneracy", replication_limit),
    ("determinism", determinism),
];
