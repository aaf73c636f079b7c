//! Adversaries that answer every query freely, with no claim table behind them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::QueryContext;
use crate::gradient::{add_mod, GradientVector};
use crate::message::{respond_from_claims, Message, Query};
use crate::rng::SimRng;
use crate::Residue;

/// Per-run strategy of a message-level adversary. One instance serves all
/// malicious workers of one protocol execution and may keep state across rounds.
pub trait MessageAdversary: Send {
    fn respond(&mut self, ctx: &QueryContext<'_>, query: &Query, rng: &mut SimRng) -> Message;
}

pub type AdversaryFactory = Arc<dyn Fn() -> Box<dyn MessageAdversary> + Send + Sync>;

#[derive(Clone)]
pub enum MessageStrategy {
    /// Half the malicious workers of a group echo the honest `z_0`, the rest
    /// share a corrupted one; node labels alternate between truthful and
    /// corrupted across a worker's successive answers; commit bits are random.
    FlipFlop,
    /// Every symbol and bit uniformly random.
    Uniform,
    /// Responses of the wrong shape.
    Malformed,
    Custom(AdversaryFactory),
}

impl fmt::Debug for MessageStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FlipFlop => f.write_str("FlipFlop"),
            Self::Uniform => f.write_str("Uniform"),
            Self::Malformed => f.write_str("Malformed"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl MessageStrategy {
    pub fn spawn(&self) -> Box<dyn MessageAdversary> {
        match self {
            Self::FlipFlop => Box::new(FlipFlop::default()),
            Self::Uniform => Box::new(Uniform),
            Self::Malformed => Box::new(Malformed),
            Self::Custom(factory) => factory(),
        }
    }
}

fn honest_answer(ctx: &QueryContext<'_>, query: &Query) -> Message {
    let block = ctx.params.group_gradients(query.group());
    respond_from_claims(&ctx.truth[block], query)
}

fn nonzero<R: Rng + ?Sized>(q: u64, rng: &mut R) -> Residue {
    rng.random_range(1..q)
}

#[derive(Debug, Default)]
pub struct FlipFlop {
    corrupted: BTreeMap<usize, Vec<Residue>>,
    answers: BTreeMap<usize, usize>,
}

impl FlipFlop {
    fn infiltrates(ctx: &QueryContext<'_>) -> bool {
        let group = ctx.params.group_of_worker(ctx.worker);
        let peers: Vec<usize> = ctx
            .malicious
            .iter()
            .copied()
            .filter(|&j| ctx.params.group_of_worker(j) == group)
            .collect();
        let position = peers.iter().position(|&j| j == ctx.worker).unwrap_or(0);
        peers.len() >= 2 && position % 2 == 0
    }
}

impl MessageAdversary for FlipFlop {
    fn respond(&mut self, ctx: &QueryContext<'_>, query: &Query, rng: &mut SimRng) -> Message {
        let q = ctx.params.q;
        match *query {
            Query::Initial { group } => {
                let honest = honest_answer(ctx, query);
                if Self::infiltrates(ctx) {
                    return honest;
                }
                let Message::Symbols(truth) = honest else {
                    unreachable!()
                };
                let corrupted = self.corrupted.entry(group).or_insert_with(|| {
                    let k = rng.random_range(0..truth.len());
                    let mut v = truth.clone();
                    v[k] = add_mod(v[k], nonzero(q, rng), q);
                    v
                });
                Message::Symbols(corrupted.clone())
            }
            Query::NodeLabel { .. } => {
                let count = self.answers.entry(ctx.worker).or_default();
                *count += 1;
                let Message::Symbols(mut label) = honest_answer(ctx, query) else {
                    unreachable!()
                };
                if count.is_multiple_of(2) {
                    label[0] = add_mod(label[0], nonzero(q, rng), q);
                }
                Message::Symbols(label)
            }
            Query::Commit { .. } => Message::Bit(rng.random_bool(0.5)),
        }
    }
}

#[derive(Debug)]
pub struct Uniform;

impl MessageAdversary for Uniform {
    fn respond(&mut self, ctx: &QueryContext<'_>, query: &Query, rng: &mut SimRng) -> Message {
        let q = ctx.params.q;
        match query {
            Query::Initial { .. } => Message::Symbols(
                crate::gradient::uniform_vector(ctx.params.d, q, rng)
                    .coords()
                    .to_vec(),
            ),
            Query::NodeLabel { .. } => Message::Symbols(vec![rng.random_range(0..q)]),
            Query::Commit { .. } => Message::Bit(rng.random_bool(0.5)),
        }
    }
}

/// Sends a well-formed but wrong `z_0` from every other malicious worker and
/// an over-long one from the rest, then answers every later query with the
/// wrong message type.
#[derive(Debug)]
pub struct Malformed;

impl MessageAdversary for Malformed {
    fn respond(&mut self, ctx: &QueryContext<'_>, query: &Query, rng: &mut SimRng) -> Message {
        let q = ctx.params.q;
        match query {
            Query::Initial { .. } => {
                let Message::Symbols(mut z) = honest_answer(ctx, query) else {
                    unreachable!()
                };
                z[0] = add_mod(z[0], nonzero(q, rng), q);
                if ctx.worker % 2 == 1 {
                    z.push(0);
                }
                Message::Symbols(z)
            }
            Query::NodeLabel { .. } => Message::Symbols(vec![0, 0]),
            Query::Commit { .. } => Message::Symbols(vec![0]),
        }
    }
}

/// Convenience for custom strategies: the honest claims of `ctx.worker`'s group.
pub fn honest_block<'a>(ctx: &QueryContext<'a>) -> &'a [GradientVector] {
    &ctx.truth[ctx
        .params
        .group_gradients(ctx.params.group_of_worker(ctx.worker))]
}
