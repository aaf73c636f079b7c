//! Configuration, seeded experiment sweeps, figure data and file formats for
//! the `bgc` binary.

pub mod config;
pub mod experiment;
pub mod figures;
pub mod table_file;

pub use config::{
    parse_config, AdversarySpec, ConfigError, ExperimentConfig, FigureKind, Format, Sweep,
};
pub use experiment::{
    run_experiments, run_trial, trial_seed, write_rows, ResultRow, RunError, TrialResult,
};
pub use figures::{emit_figure_data, FigureData};
pub use table_file::TableFile;

use std::fs::File;
use std::io::{self, BufWriter, Write};

/// Runs what `config` asks for and writes it to `--out` or stdout. Returns
/// whether every row passed its correctness and bound checks.
pub fn execute(config: &ExperimentConfig) -> Result<bool, RunError> {
    let mut out: Box<dyn Write> = match &config.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| {
            RunError::Io {
                path: path.clone(),
                source,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    let passed = match config.figure {
        Some(which) => {
            emit_figure_data(which, config)?.write(config.format, &mut out)?;
            true
        }
        None => {
            let rows = run_experiments(config)?;
            write_rows(&rows, config.format, &mut out)?;
            rows.iter().all(ResultRow::passes)
        }
    };
    out.flush().map_err(|source| RunError::Io {
        path: config.out.clone().unwrap_or_default(),
        source,
    })?;
    Ok(passed)
}
