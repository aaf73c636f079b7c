//! JSON claimed-gradient tables for `--adversary table:<file>`.
//!
//! ```json
//! { "q": 65536, "d": 1, "claims": { "0": [[1], [2], [3], [65532]] } }
//! ```
//!
//! `claims` maps a malicious worker (0-based) to its claims over its group's
//! block, one residue vector per gradient. Unlisted workers are honest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bgc_core::{GradientVector, SchemeParams, TableAttack};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableFileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("table is over Z_{q}^{d}, the run is over Z_{run_q}^{run_d}")]
    Shape {
        q: u64,
        d: usize,
        run_q: u64,
        run_d: usize,
    },
    #[error("worker {worker}: {message}")]
    Claim { worker: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub q: u64,
    pub d: usize,
    pub claims: BTreeMap<usize, Vec<Vec<u64>>>,
}

impl TableFile {
    pub fn load(path: &Path) -> Result<Self, TableFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| TableFileError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| TableFileError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn from_attack(params: &SchemeParams, attack: &TableAttack) -> Self {
        let claims = attack
            .claims
            .iter()
            .map(|(&j, row)| (j, row.iter().map(|g| g.coords().to_vec()).collect()))
            .collect();
        Self {
            q: params.q,
            d: params.d,
            claims,
        }
    }

    pub fn into_attack(self, params: &SchemeParams) -> Result<TableAttack, TableFileError> {
        if self.q != params.q || self.d != params.d {
            return Err(TableFileError::Shape {
                q: self.q,
                d: self.d,
                run_q: params.q,
                run_d: params.d,
            });
        }
        let mut claims = BTreeMap::new();
        for (worker, row) in self.claims {
            let row = row
                .into_iter()
                .map(|coords| {
                    if coords.len() != params.d {
                        return Err(format!(
                            "claim of length {}, expected {}",
                            coords.len(),
                            params.d
                        ));
                    }
                    GradientVector::from_coords(coords, params.q).map_err(|e| e.to_string())
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|message| TableFileError::Claim { worker, message })?;
            claims.insert(worker, row);
        }
        Ok(TableAttack { claims })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let file: TableFile = serde_json::from_str(
            r#"{ "q": 65536, "d": 1, "claims": { "0": [[1], [2], [3], [65532]] } }"#,
        )
        .unwrap();
        let params = SchemeParams::new(1, 1, 1, 4, 1, 65_536).unwrap();
        let attack = file.clone().into_attack(&params).unwrap();
        assert_eq!(
            attack.claims[&0][3],
            GradientVector::from_signed(&[-4], 65_536)
        );
        assert_eq!(TableFile::from_attack(&params, &attack), file);
    }

    #[test]
    fn rejects_mismatches() {
        let params = SchemeParams::new(1, 1, 1, 4, 1, 5).unwrap();
        let file = TableFile {
            q: 7,
            d: 1,
            claims: BTreeMap::new(),
        };
        assert!(matches!(
            file.into_attack(&params),
            Err(TableFileError::Shape { .. })
        ));
        let file = TableFile {
            q: 5,
            d: 1,
            claims: BTreeMap::from([(0, vec![vec![9]])]),
        };
        assert!(matches!(
            file.into_attack(&params),
            Err(TableFileError::Claim { worker: 0, .. })
        ));
    }
}
