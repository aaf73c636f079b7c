use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AdversaryError;
use crate::gradient::GradientVector;
use crate::matchtree::MatchTree;
use crate::message::{respond_from_claims, Message, Query};
use crate::params::SchemeParams;

/// Every worker's claimed value for every gradient assigned to it.
///
/// Row `j` holds the claims of worker `j` over its group's block, so claims
/// exist exactly where the fractional repetition assignment has a one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimedGradientTable {
    params: SchemeParams,
    rows: Vec<Vec<GradientVector>>,
}

impl ClaimedGradientTable {
    /// The table of an all-honest system: every claim equals the truth.
    pub fn honest(params: &SchemeParams, truth: &[GradientVector]) -> Self {
        let rows = (0..params.n)
            .map(|j| truth[params.group_gradients(params.group_of_worker(j))].to_vec())
            .collect();
        Self {
            params: *params,
            rows,
        }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// Claims of `worker` over its group block.
    pub fn row(&self, worker: usize) -> &[GradientVector] {
        &self.rows[worker]
    }

    /// Claim of `worker` for global gradient `index`, if assigned.
    pub fn claim(&self, worker: usize, index: usize) -> Option<&GradientVector> {
        let group = self.params.group_of_worker(worker);
        let block = self.params.group_gradients(group);
        block
            .contains(&index)
            .then(|| &self.rows[worker][index - block.start])
    }

    pub fn set_claim(&mut self, worker: usize, index: usize, value: GradientVector) {
        let block = self
            .params
            .group_gradients(self.params.group_of_worker(worker));
        assert!(
            block.contains(&index),
            "gradient {index} is not assigned to worker {worker}"
        );
        self.rows[worker][index - block.start] = value;
    }

    pub fn set_row(
        &mut self,
        worker: usize,
        row: Vec<GradientVector>,
    ) -> Result<(), AdversaryError> {
        let len = self.params.block_len();
        if row.len() != len {
            return Err(AdversaryError::TableShape(format!(
                "worker {worker}: {} claims, expected {len}",
                row.len()
            )));
        }
        if let Some(bad) = row
            .iter()
            .find(|g| g.dim() != self.params.d || g.q() != self.params.q)
        {
            return Err(AdversaryError::TableShape(format!(
                "worker {worker}: claim {bad} is not in Z_{}^{}",
                self.params.q, self.params.d
            )));
        }
        self.rows[worker] = row;
        Ok(())
    }

    pub fn tree(&self, worker: usize) -> MatchTree<'_> {
        MatchTree::new(self.params.group_of_worker(worker), &self.rows[worker])
            .expect("non-empty block")
    }

    /// Workers whose claims differ from `truth` anywhere.
    pub fn deviators(&self, truth: &[GradientVector]) -> Vec<usize> {
        (0..self.params.n)
            .filter(|&j| {
                let block = self.params.group_gradients(self.params.group_of_worker(j));
                self.rows[j] != truth[block]
            })
            .collect()
    }

    /// Global gradient indices on which `worker`'s claims differ from `truth`.
    pub fn deviations(&self, worker: usize, truth: &[GradientVector]) -> Vec<usize> {
        let block = self
            .params
            .group_gradients(self.params.group_of_worker(worker));
        block
            .filter(|&i| self.claim(worker, i) != Some(&truth[i]))
            .collect()
    }

    pub fn initial_response(&self, worker: usize) -> GradientVector {
        crate::gradient::full_gradient(&self.rows[worker]).expect("non-empty block")
    }

    pub fn respond(&self, worker: usize, query: &Query) -> Message {
        respond_from_claims(&self.rows[worker], query)
    }
}

/// Fixed claims for a set of malicious workers; everyone else is honest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableAttack {
    pub claims: BTreeMap<usize, Vec<GradientVector>>,
}

impl TableAttack {
    pub fn from_table(table: &ClaimedGradientTable, workers: &[usize]) -> Self {
        let claims = workers
            .iter()
            .map(|&j| (j, table.row(j).to_vec()))
            .collect();
        Self { claims }
    }

    pub fn workers(&self) -> Vec<usize> {
        self.claims.keys().copied().collect()
    }

    /// Overlays the malicious rows on the honest table for `truth`.
    pub fn materialize(
        &self,
        params: &SchemeParams,
        truth: &[GradientVector],
    ) -> Result<ClaimedGradientTable, AdversaryError> {
        let mut table = ClaimedGradientTable::honest(params, truth);
        for (&worker, row) in &self.claims {
            if worker >= params.n {
                return Err(AdversaryError::UnknownWorker(worker));
            }
            table.set_row(worker, row.clone())?;
        }
        Ok(table)
    }
}
