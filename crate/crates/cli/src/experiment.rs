use std::io::Write;
use std::path::PathBuf;

use bgc_core::rng::{substream, Stream};
use bgc_core::{
    check_compliance, comm_lower, draco_baseline, full_gradient, random_gradients, run_scheme,
    scheme_upper_bounds, AdversaryError, Metrics, ProtocolConfig, ProtocolError, SchemeParams,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Format};
use crate::table_file::TableFileError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Table(#[from] TableFileError),
    #[error("{params:?}: {source}")]
    Adversary {
        params: SchemeParams,
        source: AdversaryError,
    },
    #[error("{params:?}: {source}")]
    Protocol {
        params: SchemeParams,
        source: ProtocolError,
    },
    #[error(
        "wrong output for {params:?} at trial {trial}; reproduce with --seed {seed} --trials 1"
    )]
    Incorrect {
        params: SchemeParams,
        trial: usize,
        seed: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Aggregate of all trials at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub point: usize,
    pub n: usize,
    pub s: usize,
    pub u: usize,
    pub m: usize,
    pub p: usize,
    pub d: usize,
    pub q: u64,
    pub adversary: String,
    pub trials: usize,
    pub seed: u64,
    pub t_max: usize,
    pub t_mean: f64,
    pub c_max: usize,
    pub c_mean: f64,
    pub kappa_max: f64,
    pub kappa_mean: f64,
    pub total_comm_max: f64,
    pub total_comm_mean: f64,
    pub total_comm_bytes_max: f64,
    pub t_upper: usize,
    pub c_upper: usize,
    pub kappa_upper: f64,
    /// Empty when the block is shorter than `⌊s/u⌋`.
    pub kappa_lower: Option<f64>,
    pub c_lower: usize,
    pub draco_total_comm: f64,
    pub correct: bool,
    pub bounds_ok: bool,
}

impl ResultRow {
    pub fn passes(&self) -> bool {
        self.correct && self.bounds_ok
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub seed: u64,
    pub metrics: Metrics,
    pub correct: bool,
    pub bounds_ok: bool,
    pub transcript: String,
}

/// Seed of trial `trial`: running with `--seed <it> --trials 1` replays it.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

pub fn run_trial(
    config: &ExperimentConfig,
    params: &SchemeParams,
    seed: u64,
) -> Result<TrialResult, RunError> {
    let model = config.adversary.model(params)?;
    let truth = random_gradients(params, seed);
    let mut adversary = model
        .instantiate(params, &truth, substream(seed, Stream::Adversary, 0))
        .map_err(|source| RunError::Adversary {
            params: *params,
            source,
        })?;
    let mut rng = substream(seed, Stream::Protocol, 0);
    let protocol = ProtocolConfig {
        draw: config.draw,
        oracle_budget: None,
    };
    let out = run_scheme(params, &truth, &mut adversary, protocol, &mut rng).map_err(|source| {
        RunError::Protocol {
            params: *params,
            source,
        }
    })?;
    let honest_safe = out.eliminated.iter().all(|&j| adversary.is_malicious(j));
    let correct =
        out.complete && honest_safe && out.estimate == full_gradient(&truth).expect("p >= 1");
    let transcript = if config.dump_transcripts.is_some() {
        out.transcript.to_jsonl()
    } else {
        String::new()
    };
    Ok(TrialResult {
        seed,
        bounds_ok: check_compliance(params, &out.metrics).all(),
        metrics: out.metrics,
        correct,
        transcript,
    })
}

fn aggregate(
    config: &ExperimentConfig,
    point: usize,
    params: &SchemeParams,
    trials: &[TrialResult],
) -> ResultRow {
    let count = trials.len() as f64;
    let mean = |f: &dyn Fn(&TrialResult) -> f64| trials.iter().map(f).sum::<f64>() / count;
    let max = |f: &dyn Fn(&TrialResult) -> f64| trials.iter().map(f).fold(0.0, f64::max);
    let upper = scheme_upper_bounds::<f64>(params);
    let total_comm_max = max(&|t| t.metrics.total_comm::<f64>());
    ResultRow {
        point,
        n: params.n,
        s: params.s,
        u: params.u,
        m: params.m,
        p: params.p,
        d: params.d,
        q: params.q,
        adversary: config.adversary.to_string(),
        trials: trials.len(),
        seed: config.seed,
        t_max: trials.iter().map(|t| t.metrics.rounds).max().unwrap_or(0),
        t_mean: mean(&|t| t.metrics.rounds as f64),
        c_max: trials
            .iter()
            .map(|t| t.metrics.local_computations)
            .max()
            .unwrap_or(0),
        c_mean: mean(&|t| t.metrics.local_computations as f64),
        kappa_max: max(&|t| t.metrics.kappa::<f64>()),
        kappa_mean: mean(&|t| t.metrics.kappa::<f64>()),
        total_comm_max,
        total_comm_mean: mean(&|t| t.metrics.total_comm::<f64>()),
        total_comm_bytes_max: total_comm_max * params.bytes_per_symbol(),
        t_upper: upper.rounds,
        c_upper: upper.c,
        kappa_upper: upper.kappa,
        kappa_lower: comm_lower::<f64>(params).ok(),
        c_lower: bgc_core::local_comp_lower(params),
        draco_total_comm: draco_baseline(params).total_comm(),
        correct: trials.iter().all(|t| t.correct),
        bounds_ok: trials.iter().all(|t| t.bounds_ok),
    }
}

/// Runs every trial of every sweep point, in parallel, and aggregates per
/// point. Output does not depend on scheduling. Stops at the first trial
/// whose output is wrong.
pub fn run_experiments(config: &ExperimentConfig) -> Result<Vec<ResultRow>, RunError> {
    let points = config.points()?;
    if let Some(dir) = &config.dump_transcripts {
        std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|point| (0..config.trials).map(move |trial| (point, trial)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(point, trial)| {
            let params = &points[point];
            let seed = trial_seed(config.seed, trial);
            let result = run_trial(config, params, seed)?;
            if !result.correct {
                return Err(RunError::Incorrect {
                    params: *params,
                    trial,
                    seed,
                });
            }
            if let Some(dir) = &config.dump_transcripts {
                let path = dir.join(format!("point{point:03}-trial{trial:05}.jsonl"));
                std::fs::write(&path, &result.transcript)
                    .map_err(|source| RunError::Io { path, source })?;
            }
            Ok(result)
        })
        .collect::<Result<_, _>>()?;
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, params)| {
            aggregate(
                config,
                i,
                params,
                &results[i * config.trials..(i + 1) * config.trials],
            )
        })
        .collect())
}

pub fn write_rows<T: Serialize, W: Write>(
    rows: &[T],
    format: Format,
    mut out: W,
) -> Result<(), RunError> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush().map_err(|source| RunError::Io {
                path: PathBuf::from("<output>"),
                source,
            })?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n").map_err(|source| RunError::Io {
                path: PathBuf::from("<output>"),
                source,
            })?;
        }
    }
    Ok(())
}
