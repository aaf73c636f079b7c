//! Analytic data behind the tradeoff and ratio plots. Nothing here simulates.

use std::io::Write;

use bgc_core::bounds::kappa_ratio;
use bgc_core::{
    comm_lower, draco_baseline, local_comp_lower, ratio_limit, scheme_upper_bounds, BoundsError,
    SchemeParams,
};
use serde::{Deserialize, Serialize};

use crate::config::{Axis, ConfigError, ExperimentConfig, FigureKind, Format};
use crate::experiment::{write_rows, RunError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub u: usize,
    pub c_max: usize,
    pub total_comm_symbols: f64,
    pub draco_total_comm: f64,
    pub reduction_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub p: usize,
    pub kappa_upper: f64,
    pub kappa_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub p: usize,
    pub ratio: f64,
    pub ratio_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureData {
    Fig1(Vec<Fig1Row>),
    Ratio(Vec<RatioRow>),
    Convergence(Vec<ConvergenceRow>),
}

impl FigureData {
    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<(), RunError> {
        match self {
            FigureData::Fig1(rows) => write_rows(rows, format, out),
            FigureData::Ratio(rows) => write_rows(rows, format, out),
            FigureData::Convergence(rows) => write_rows(rows, format, out),
        }
    }
}

fn with(params: &SchemeParams, u: usize, p: usize) -> Result<SchemeParams, RunError> {
    SchemeParams::new(params.s, u, params.m, p, params.d, params.q).map_err(|e| {
        ConfigError::Invalid {
            key: "sweep",
            message: e.to_string(),
        }
        .into()
    })
}

/// Block lengths above `⌊s/u⌋` (where the lower bound is positive) up to
/// `p/m`, eight per decade, always ending at `p/m`.
pub fn block_grid(params: &SchemeParams) -> Vec<usize> {
    let lo = (local_comp_lower(params) + 1).max(2);
    let hi = params.block_len();
    let mut grid: Vec<usize> = (0..)
        .map(|k| 10f64.powf(f64::from(k) / 8.0).round() as usize)
        .take_while(|&len| len < hi)
        .filter(|&len| len >= lo)
        .collect();
    grid.push(hi);
    grid.dedup();
    grid
}

fn p_values(config: &ExperimentConfig) -> Vec<usize> {
    match &config.sweep {
        Some(sweep) if sweep.axis == Axis::P => sweep.values.iter().map(|&p| p as usize).collect(),
        _ => block_grid(&config.params)
            .into_iter()
            .map(|len| len * config.params.m)
            .collect(),
    }
}

pub fn emit_figure_data(
    which: FigureKind,
    config: &ExperimentConfig,
) -> Result<FigureData, RunError> {
    let base = config.params;
    let bounds = |e: BoundsError| ConfigError::Invalid {
        key: "u",
        message: e.to_string(),
    };
    Ok(match which {
        FigureKind::Fig1 => {
            let us: Vec<usize> = match &config.sweep {
                Some(sweep) if sweep.axis == Axis::U => {
                    sweep.values.iter().map(|&u| u as usize).collect()
                }
                _ => (1..=base.s + 1).collect(),
            };
            let draco = draco_baseline(&base).total_comm::<f64>();
            let rows = us
                .into_iter()
                .map(|u| {
                    let params = with(&base, u, base.p)?;
                    let total =
                        (params.n * params.d) as f64 + scheme_upper_bounds::<f64>(&params).kappa;
                    Ok(Fig1Row {
                        u,
                        c_max: local_comp_lower(&params),
                        total_comm_symbols: total,
                        draco_total_comm: draco,
                        reduction_fraction: 1.0 - total / draco,
                    })
                })
                .collect::<Result<_, RunError>>()?;
            FigureData::Fig1(rows)
        }
        FigureKind::Ratio => {
            let rows = p_values(config)
                .into_iter()
                .map(|p| {
                    let params = with(&base, base.u, p)?;
                    Ok(RatioRow {
                        p,
                        kappa_upper: scheme_upper_bounds::<f64>(&params).kappa,
                        kappa_lower: comm_lower::<f64>(&params).map_err(bounds)?,
                    })
                })
                .collect::<Result<_, RunError>>()?;
            FigureData::Ratio(rows)
        }
        FigureKind::Convergence => {
            let limit = ratio_limit::<f64>(&base).map_err(bounds)?;
            let rows = p_values(config)
                .into_iter()
                .map(|p| {
                    let params = with(&base, base.u, p)?;
                    Ok(ConvergenceRow {
                        p,
                        ratio: kappa_ratio::<f64>(&params).map_err(bounds)?,
                        ratio_limit: limit,
                    })
                })
                .collect::<Result<_, RunError>>()?;
            FigureData::Convergence(rows)
        }
    })
}
