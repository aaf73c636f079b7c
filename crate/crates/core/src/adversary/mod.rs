//! Adversary strategies.
//!
//! An [`AdversaryModel`] is an immutable strategy. [`AdversaryModel::instantiate`]
//! turns it into a per-run [`Adversary`] that picks the malicious workers and
//! answers every query routed to them.

mod message_level;
mod symmetrization;
mod table;
mod worlds;

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

pub use message_level::{
    honest_block, AdversaryFactory, FlipFlop, Malformed, MessageAdversary, MessageStrategy, Uniform,
};
pub use symmetrization::{
    deviate, symmetrization_attack, DeviationSpread, DisagreementSet, LeftoverPolicy,
    SymmetrizationConfig, SymmetrizationMode, SymmetrizationOutcome,
};
pub use table::{ClaimedGradientTable, TableAttack};
pub use worlds::{symmetrized_base, two_case_worlds, worlds_around, World};

use crate::gradient::GradientVector;
use crate::message::{Message, Query};
use crate::params::SchemeParams;
use crate::protocol::Transcript;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("the attack needs exactly {expected} malicious workers, got {got}")]
    AttackSize { expected: usize, got: usize },
    #[error("malicious workers must lie in a single group")]
    SpansGroups,
    #[error("worker {0} does not exist")]
    UnknownWorker(usize),
    #[error("{used} malicious workers exceed the budget s = {budget}")]
    BudgetExceeded { budget: usize, used: usize },
    #[error("worker {0} is honest and answers for itself")]
    HonestWorker(usize),
    #[error("s = {s} < u = {u}: no disagreement index can be planted")]
    NoDisagreement { s: usize, u: usize },
    #[error("gradient {0} carries no competing value")]
    NotContested(usize),
    #[error("malformed claim table: {0}")]
    TableShape(String),
}

/// What a malicious worker may look at when answering: everything.
pub struct QueryContext<'a> {
    pub params: &'a SchemeParams,
    pub worker: usize,
    pub truth: &'a [GradientVector],
    pub malicious: &'a BTreeSet<usize>,
    pub transcript: &'a Transcript,
}

#[derive(Debug, Clone, Default)]
pub enum AdversaryModel {
    #[default]
    None,
    /// Symmetrization attack on one uniformly chosen group.
    Symmetrization(SymmetrizationConfig),
    Table(TableAttack),
    /// `s` workers of one uniformly chosen group run a free-form strategy.
    MessageLevel(MessageStrategy),
}

enum Behavior {
    Honest,
    Table(ClaimedGradientTable),
    Free(Box<dyn MessageAdversary>),
}

/// A per-run adversary: the malicious set plus its response state.
pub struct Adversary {
    malicious: BTreeSet<usize>,
    behavior: Behavior,
    rng: SimRng,
    disagreement: Option<DisagreementSet>,
}

impl std::fmt::Debug for Adversary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Adversary")
            .field("malicious", &self.malicious)
            .finish_non_exhaustive()
    }
}

fn pick_group_members<R: Rng + ?Sized>(
    params: &SchemeParams,
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let group = rng.random_range(0..params.m);
    let start = params.group_workers(group).start;
    let mut chosen: Vec<usize> = index::sample(rng, params.group_size(), count)
        .into_iter()
        .map(|j| start + j)
        .collect();
    chosen.sort_unstable();
    chosen
}

impl AdversaryModel {
    /// Draws the malicious set (and claim table, where applicable) for one run.
    pub fn instantiate(
        &self,
        params: &SchemeParams,
        truth: &[GradientVector],
        mut rng: SimRng,
    ) -> Result<Adversary, AdversaryError> {
        let (malicious, behavior, disagreement) = match self {
            AdversaryModel::None => (Vec::new(), Behavior::Honest, None),
            AdversaryModel::Symmetrization(config) => {
                let malicious = pick_group_members(params, params.s, &mut rng);
                let outcome = symmetrization_attack(params, truth, &malicious, config, &mut rng)?;
                (
                    malicious,
                    Behavior::Table(outcome.table),
                    Some(outcome.disagreement),
                )
            }
            AdversaryModel::Table(attack) => {
                let table = attack.materialize(params, truth)?;
                (attack.workers(), Behavior::Table(table), None)
            }
            AdversaryModel::MessageLevel(strategy) => (
                pick_group_members(params, params.s, &mut rng),
                Behavior::Free(strategy.spawn()),
                None,
            ),
        };
        if malicious.len() > params.s {
            return Err(AdversaryError::BudgetExceeded {
                budget: params.s,
                used: malicious.len(),
            });
        }
        Ok(Adversary {
            malicious: malicious.into_iter().collect(),
            behavior,
            rng,
            disagreement,
        })
    }
}

impl Adversary {
    /// An adversary with no malicious workers.
    pub fn honest(rng: SimRng) -> Self {
        Self {
            malicious: BTreeSet::new(),
            behavior: Behavior::Honest,
            rng,
            disagreement: None,
        }
    }

    pub fn malicious(&self) -> &BTreeSet<usize> {
        &self.malicious
    }

    pub fn is_malicious(&self, worker: usize) -> bool {
        self.malicious.contains(&worker)
    }

    /// `Ĩ`, when the strategy is a symmetrization attack.
    pub fn disagreement(&self) -> Option<&DisagreementSet> {
        self.disagreement.as_ref()
    }

    /// The claim table behind a consistent adversary.
    pub fn table(&self) -> Option<&ClaimedGradientTable> {
        match &self.behavior {
            Behavior::Table(table) => Some(table),
            _ => None,
        }
    }

    /// Answers `query` on behalf of malicious `worker`. Table adversaries
    /// evaluate their claims, so their answers are consistent across rounds;
    /// free-form adversaries may send anything, including messages of the
    /// wrong shape, which the protocol layer rejects.
    pub fn answer_query(
        &mut self,
        params: &SchemeParams,
        worker: usize,
        query: &Query,
        truth: &[GradientVector],
        transcript: &Transcript,
    ) -> Result<Message, AdversaryError> {
        if !self.malicious.contains(&worker) {
            return Err(AdversaryError::HonestWorker(worker));
        }
        match &mut self.behavior {
            Behavior::Honest => Err(AdversaryError::HonestWorker(worker)),
            Behavior::Table(table) => Ok(table.respond(worker, query)),
            Behavior::Free(strategy) => {
                let ctx = QueryContext {
                    params,
                    worker,
                    truth,
                    malicious: &self.malicious,
                    transcript,
                };
                Ok(strategy.respond(&ctx, query, &mut self.rng))
            }
        }
    }
}
