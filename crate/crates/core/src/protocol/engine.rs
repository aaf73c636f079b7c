use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::transcript::{
    Direction, EliminationEvent, EliminationReason, MatchRecord, MatchResolution, MessageRecord,
    Metrics, OracleRecord, Transcript,
};
use crate::adversary::{Adversary, AdversaryError};
use crate::gradient::{sub_mod, GradientVector};
use crate::matchtree::NodeRange;
use crate::message::{respond_from_claims, Message, MessageKind, Query};
use crate::params::SchemeParams;
use crate::rng::SimRng;
use crate::{Rational, Residue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("expected {expected} ground-truth gradients, got {got}")]
    TruthLength { expected: usize, got: usize },
    #[error("gradient {0} is not in Z_q^d for these parameters")]
    TruthShape(usize),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("group {0} was never resolved")]
    Unresolved(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("gradient {0} was already computed locally")]
    Repeated(usize),
    #[error("local computation budget of {0} exhausted")]
    Exhausted(usize),
}

/// How the elimination tournament picks the next two subsets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawPolicy {
    /// The two subsets with the lowest-index members.
    #[default]
    LowestIndex,
    /// Two subsets drawn uniformly from the protocol stream.
    Seeded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub draw: DrawPolicy,
    /// Cap on local computations. Once hit, unsettled groups fall back to
    /// their lowest surviving subset and the run is marked incomplete.
    pub oracle_budget: Option<usize>,
}

/// Workers of one group that sent the same `z_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistentSubset {
    pub group: usize,
    /// Sorted ascending.
    pub members: Vec<usize>,
    pub value: GradientVector,
}

impl ConsistentSubset {
    pub fn representative(&self) -> usize {
        self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Partitions well-formed initial responses by exact equality, ordered by
/// lowest member.
pub fn consistent_subsets(
    group: usize,
    responses: &[(usize, GradientVector)],
) -> Vec<ConsistentSubset> {
    let mut by_value: BTreeMap<&[Residue], (&GradientVector, Vec<usize>)> = BTreeMap::new();
    for (worker, value) in responses {
        by_value
            .entry(value.coords())
            .or_insert_with(|| (value, Vec::new()))
            .1
            .push(*worker);
    }
    let mut subsets: Vec<ConsistentSubset> = by_value
        .into_values()
        .map(|(value, mut members)| {
            members.sort_unstable();
            ConsistentSubset {
                group,
                members,
                value: value.clone(),
            }
        })
        .collect();
    subsets.sort_by_key(|w| w.representative());
    subsets
}

/// Ground truth behind local computation, counting distinct gradients.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    truth: &'a [GradientVector],
    budget: Option<usize>,
    computed: BTreeMap<usize, &'a GradientVector>,
}

impl<'a> Oracle<'a> {
    pub fn new(truth: &'a [GradientVector], budget: Option<usize>) -> Self {
        Self {
            truth,
            budget,
            computed: BTreeMap::new(),
        }
    }

    /// A gradient already computed, if any.
    pub fn computed(&self, index: usize) -> Option<&'a GradientVector> {
        self.computed.get(&index).copied()
    }

    pub fn used(&self) -> usize {
        self.computed.len()
    }

    pub fn local_compute(&mut self, index: usize, coord: usize) -> Result<Residue, OracleError> {
        if self.computed.contains_key(&index) {
            return Err(OracleError::Repeated(index));
        }
        if let Some(budget) = self.budget {
            if self.computed.len() >= budget {
                return Err(OracleError::Exhausted(budget));
            }
        }
        let gradient = &self.truth[index];
        self.computed.insert(index, gradient);
        Ok(gradient.coord(coord))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchOutcome {
    /// Reached leaf `position` (local to the group) where the two
    /// representatives' values at `coord` differ.
    Leaf {
        rounds: usize,
        position: usize,
        coord: usize,
        values: (Residue, Residue),
    },
    /// A representative answered out of shape; the match was abandoned.
    Malformed { rounds: usize, culprits: Vec<usize> },
}

impl MatchOutcome {
    pub fn rounds(&self) -> usize {
        match self {
            MatchOutcome::Leaf { rounds, .. } | MatchOutcome::Malformed { rounds, .. } => *rounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupOutcome {
    pub value: Option<GradientVector>,
    pub rounds: usize,
    pub resolved: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// `ĝ`.
    pub estimate: GradientVector,
    pub metrics: Metrics,
    pub transcript: Transcript,
    /// `S`: every worker marked malicious.
    pub eliminated: BTreeSet<usize>,
    /// False when the oracle budget stopped some group early.
    pub complete: bool,
}

/// State of one protocol execution.
pub struct Engine<'a> {
    params: &'a SchemeParams,
    truth: &'a [GradientVector],
    adversary: &'a mut Adversary,
    config: ProtocolConfig,
    rng: &'a mut SimRng,
    oracle: Oracle<'a>,
    transcript: Transcript,
    eliminated: BTreeSet<usize>,
}

impl<'a> Engine<'a> {
    pub fn new(
        params: &'a SchemeParams,
        truth: &'a [GradientVector],
        adversary: &'a mut Adversary,
        config: ProtocolConfig,
        rng: &'a mut SimRng,
    ) -> Self {
        Self {
            params,
            truth,
            adversary,
            config,
            rng,
            oracle: Oracle::new(truth, config.oracle_budget),
            transcript: Transcript::default(),
            eliminated: BTreeSet::new(),
        }
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn eliminated(&self) -> &BTreeSet<usize> {
        &self.eliminated
    }

    /// Sends `query` to `worker` and logs the response. Returns `None` for a
    /// response of the wrong shape.
    fn ask(&mut self, t: usize, worker: usize, query: &Query) -> Option<Message> {
        let response = if self.adversary.is_malicious(worker) {
            self.adversary
                .answer_query(self.params, worker, query, self.truth, &self.transcript)
                .expect("query routed to a malicious worker")
        } else {
            let block = self.params.group_gradients(query.group());
            respond_from_claims(&self.truth[block], query)
        };
        let (symbols, bits) = match query.kind() {
            MessageKind::Initial => (self.params.d as u64, 0),
            MessageKind::NodeLabel => (1, 0),
            MessageKind::Commit => (0, 1),
        };
        let well_formed = response.is_well_formed(query, self.params.d, self.params.q);
        self.transcript.messages.push(MessageRecord {
            t,
            group: query.group(),
            worker,
            direction: Direction::WorkerToMain,
            kind: query.kind(),
            symbols,
            bits,
            payload: Some(response.clone()),
        });
        well_formed.then_some(response)
    }

    fn eliminate(&mut self, t: usize, group: usize, workers: &[usize], reason: EliminationReason) {
        for &worker in workers {
            if self.eliminated.insert(worker) {
                self.transcript.eliminations.push(EliminationEvent {
                    t,
                    group,
                    worker,
                    reason,
                });
            }
        }
    }

    /// Collects `z_0` from every worker of `group`. Malformed senders are eliminated.
    pub fn initial_round(&mut self, group: usize) -> Vec<(usize, GradientVector)> {
        let mut responses = Vec::new();
        for worker in self.params.group_workers(group) {
            match self.ask(0, worker, &Query::Initial { group }) {
                Some(Message::Symbols(z)) => responses.push((
                    worker,
                    GradientVector::from_coords(z, self.params.q).expect("checked shape"),
                )),
                _ => self.eliminate(0, group, &[worker], EliminationReason::Malformed),
            }
        }
        responses
    }

    /// Bisection match between the representatives of `a` and `b`, starting after round `clock`.
    pub fn run_match(
        &mut self,
        a: &ConsistentSubset,
        b: &ConsistentSubset,
        clock: usize,
    ) -> MatchOutcome {
        let group = a.group;
        let q = self.params.q;
        let (rep_a, rep_b) = (a.representative(), b.representative());
        let coord = a
            .value
            .first_difference(&b.value)
            .expect("subsets hold different values");
        let mut cur = (a.value.coord(coord), b.value.coord(coord));
        let mut node = NodeRange::root(self.params.block_len());
        let mut rounds = 0;
        while !node.is_leaf() {
            let (left, right) = node.children().expect("internal node");
            rounds += 1;
            let query = Query::NodeLabel {
                group,
                node: left,
                coord,
            };
            let la = self.ask(clock + rounds, rep_a, &query);
            let lb = self.ask(clock + rounds, rep_b, &query);
            let (la, lb) = match (la, lb) {
                (Some(Message::Symbols(x)), Some(Message::Symbols(y))) => (x[0], y[0]),
                (la, lb) => {
                    let mut culprits = Vec::new();
                    if la.is_none() {
                        culprits.push(rep_a);
                    }
                    if lb.is_none() {
                        culprits.push(rep_b);
                    }
                    return MatchOutcome::Malformed { rounds, culprits };
                }
            };
            if la == lb {
                cur = (sub_mod(cur.0, la, q), sub_mod(cur.1, lb, q));
                node = right;
            } else {
                cur = (la, lb);
                node = left;
            }
        }
        MatchOutcome::Leaf {
            rounds,
            position: node.lo(),
            coord,
            values: cur,
        }
    }

    /// Asks every non-representative member of `subset` whether it endorses
    /// `value` at (`position`, `coord`). Returns `V`: the representative plus
    /// every endorser. Malformed answers eliminate the sender.
    pub fn commit_round(
        &mut self,
        t: usize,
        subset: &ConsistentSubset,
        position: usize,
        coord: usize,
        value: Residue,
    ) -> Vec<usize> {
        let group = subset.group;
        let mut committed = vec![subset.representative()];
        for &worker in &subset.members[1..] {
            match self.ask(
                t,
                worker,
                &Query::Commit {
                    group,
                    position,
                    coord,
                    value,
                },
            ) {
                Some(Message::Bit(true)) => committed.push(worker),
                Some(_) => {}
                None => self.eliminate(t, group, &[worker], EliminationReason::Malformed),
            }
        }
        committed
    }

    /// Coordinate `coord` of gradient `index` (global), computed by the main
    /// node. A gradient already computed is reused at no cost.
    pub fn local_compute(
        &mut self,
        t: usize,
        group: usize,
        index: usize,
        coord: usize,
    ) -> Option<Residue> {
        if let Some(gradient) = self.oracle.computed(index) {
            return Some(gradient.coord(coord));
        }
        let value = self.oracle.local_compute(index, coord).ok()?;
        self.transcript.oracle.push(OracleRecord {
            t,
            index,
            coord,
            group,
            value,
        });
        Some(value)
    }

    fn draw(&mut self, len: usize) -> (usize, usize) {
        match self.config.draw {
            DrawPolicy::LowestIndex => (0, 1),
            DrawPolicy::Seeded => {
                let pick = index::sample(self.rng, len, 2);
                (pick.index(0), pick.index(1))
            }
        }
    }

    /// Elimination tournament over the supported subsets of one group.
    pub fn elimination_tournament(
        &mut self,
        group: usize,
        mut pool: Vec<ConsistentSubset>,
    ) -> GroupOutcome {
        let u = self.params.u;
        let mut clock = 0;
        let mut resolved = true;
        while pool.len() > 1 {
            let (ia, ib) = self.draw(pool.len());
            let (a, b) = (pool[ia].clone(), pool[ib].clone());
            let outcome = self.run_match(&a, &b, clock);
            let start = clock + 1;
            clock += outcome.rounds();
            let t = clock;
            let mut record = MatchRecord {
                group,
                start,
                rounds: outcome.rounds(),
                reps: (a.representative(), b.representative()),
                coord: a.value.first_difference(&b.value).expect("distinct values"),
                leaf: None,
                values: None,
                resolution: MatchResolution::Malformed,
            };
            match outcome {
                MatchOutcome::Malformed { culprits, .. } => {
                    self.eliminate(t, group, &culprits, EliminationReason::Malformed);
                }
                MatchOutcome::Leaf {
                    position,
                    coord,
                    values,
                    ..
                } => {
                    let index = self.params.group_gradients(group).start + position;
                    record.leaf = Some(index);
                    record.values = Some(values);
                    let va = self.commit_round(t, &a, position, coord, values.0);
                    let vb = self.commit_round(t, &b, position, coord, values.1);
                    if va.len() < u || vb.len() < u {
                        record.resolution = MatchResolution::CommitShortfall;
                        for v in [&va, &vb] {
                            if v.len() < u {
                                self.eliminate(t, group, v, EliminationReason::CommitShortfall);
                            }
                        }
                    } else if let Some(truth) = self.local_compute(t, group, index, coord) {
                        record.resolution = MatchResolution::LocalComputation;
                        for (v, claimed) in [(&va, values.0), (&vb, values.1)] {
                            if claimed != truth {
                                self.eliminate(t, group, v, EliminationReason::LocalComputation);
                            }
                        }
                    } else {
                        record.resolution = MatchResolution::Unsettled;
                        self.transcript.matches.push(record);
                        resolved = false;
                        break;
                    }
                }
            }
            self.transcript.matches.push(record);

            let mut kept = Vec::with_capacity(pool.len());
            for mut subset in pool {
                subset.members.retain(|j| !self.eliminated.contains(j));
                if subset.len() >= u {
                    kept.push(subset);
                } else {
                    self.eliminate(t, group, &subset.members, EliminationReason::Unsupported);
                }
            }
            pool = kept;
        }
        GroupOutcome {
            value: pool.first().map(|w| w.value.clone()),
            rounds: clock,
            resolved: resolved && pool.len() == 1,
        }
    }

    /// Initial round, grouping and tournament for one group.
    pub fn run_group(&mut self, group: usize) -> GroupOutcome {
        let responses = self.initial_round(group);
        let subsets = consistent_subsets(group, &responses);
        if let Some(winner) = subsets.iter().find(|w| w.len() > self.params.s) {
            let winner = winner.clone();
            for other in subsets.iter().filter(|w| w.value != winner.value) {
                self.eliminate(0, group, &other.members, EliminationReason::Outvoted);
            }
            return GroupOutcome {
                value: Some(winner.value),
                rounds: 0,
                resolved: true,
            };
        }
        let (supported, unsupported): (Vec<_>, Vec<_>) =
            subsets.into_iter().partition(|w| w.len() >= self.params.u);
        for w in &unsupported {
            self.eliminate(0, group, &w.members, EliminationReason::Unsupported);
        }
        self.elimination_tournament(group, supported)
    }

    pub fn into_parts(self) -> (Transcript, BTreeSet<usize>) {
        (self.transcript, self.eliminated)
    }
}

/// `ĝ`: the sum of the surviving value of every group.
pub fn decode(
    params: &SchemeParams,
    values: &[Option<GradientVector>],
) -> Result<GradientVector, ProtocolError> {
    let mut sum = GradientVector::zeros(params.d, params.q);
    for (group, value) in values.iter().enumerate() {
        let value = value.as_ref().ok_or(ProtocolError::Unresolved(group))?;
        sum = &sum + value;
    }
    Ok(sum)
}

fn check_truth(params: &SchemeParams, truth: &[GradientVector]) -> Result<(), ProtocolError> {
    if truth.len() != params.p {
        return Err(ProtocolError::TruthLength {
            expected: params.p,
            got: truth.len(),
        });
    }
    if let Some(i) = truth
        .iter()
        .position(|g| g.dim() != params.d || g.q() != params.q)
    {
        return Err(ProtocolError::TruthShape(i));
    }
    Ok(())
}

/// Runs the whole scheme. Groups are independent and advance concurrently,
/// so `T` is the round count of the slowest group.
pub fn run_scheme(
    params: &SchemeParams,
    truth: &[GradientVector],
    adversary: &mut Adversary,
    config: ProtocolConfig,
    rng: &mut SimRng,
) -> Result<RunOutput, ProtocolError> {
    check_truth(params, truth)?;
    let used = adversary.malicious().len();
    if used > params.s {
        return Err(AdversaryError::BudgetExceeded {
            budget: params.s,
            used,
        }
        .into());
    }
    if let Some(&j) = adversary.malicious().iter().find(|&&j| j >= params.n) {
        return Err(AdversaryError::UnknownWorker(j).into());
    }

    let mut engine = Engine::new(params, truth, adversary, config, rng);
    let mut values = Vec::with_capacity(params.m);
    let mut rounds = 0;
    let mut complete = true;
    for group in 0..params.m {
        let outcome = engine.run_group(group);
        rounds = rounds.max(outcome.rounds);
        complete &= outcome.resolved;
        values.push(outcome.value);
    }
    let (mut transcript, eliminated) = engine.into_parts();
    transcript.rounds = rounds;
    let estimate = decode(params, &values)?;
    // equals the fractional repetition assignment's replication factor
    let replication = Rational::from_integer(params.group_size() as u64);
    let metrics = Metrics::from_transcript(&transcript, replication, params.q);
    Ok(RunOutput {
        estimate,
        metrics,
        transcript,
        eliminated,
        complete,
    })
}
