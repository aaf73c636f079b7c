//! Closed-form bounds on local computation, rounds and communication, the
//! converse witness, and the replication-only baseline.

use num_bigint::BigUint;
use num_traits::{Float, One, ToPrimitive};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{symmetrized_base, worlds_around, AdversaryError, DisagreementSet, World};
use crate::gradient::GradientVector;
use crate::matchtree::tree_height;
use crate::params::SchemeParams;
use crate::protocol::{
    run_scheme, MatchResolution, Metrics, ProtocolConfig, ProtocolError, RunOutput, Transcript,
};
use crate::rng::SimRng;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("floor(s/u) = 0 for s = {s}, u = {u}")]
    NoDisagreement { s: usize, u: usize },
    #[error("communication lower bound is zero at block length {len}")]
    ZeroLower { len: usize },
    #[error("block length {len} is shorter than floor(s/u) = {needed}")]
    BlockTooShort { len: usize, needed: usize },
    #[error("budget {budget} is not below floor(s/u) = {limit}")]
    BudgetTooLarge { budget: usize, limit: usize },
    #[error("every contested gradient was computed locally")]
    NoWitness,
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn cast<F: Float>(x: impl ToPrimitive) -> F {
    F::from(x).expect("representable")
}

/// Minimum number of local computations: `⌊s/u⌋`.
pub fn local_comp_lower(params: &SchemeParams) -> usize {
    params.s / params.u
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `log2 x` for `x > 0`, from the leading 53 bits.
pub fn log2_big<F: Float>(x: &BigUint) -> F {
    let bits = x.bits();
    if bits <= 53 {
        return cast::<F>(x.to_u64().expect("53 bits fit")).log2();
    }
    let shift = bits - 53;
    let top: u64 = (x >> shift).to_u64().expect("53 bits fit");
    cast::<F>(top).log2() + cast::<F>(shift)
}

/// Minimum protocol overhead in symbols: `log_q C(p/m, ⌊s/u⌋)`.
pub fn comm_lower<F: Float>(params: &SchemeParams) -> Result<F, BoundsError> {
    let c = local_comp_lower(params);
    let len = params.block_len();
    if c == 0 {
        return Ok(F::zero());
    }
    if len < c {
        return Err(BoundsError::BlockTooShort { len, needed: c });
    }
    Ok(log2_big::<F>(&binomial(len, c)) / cast::<F>(params.q).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBounds<F> {
    pub c: usize,
    pub rounds: usize,
    pub kappa: F,
}

/// What the tournament guarantees: `c <= ⌊s/u⌋`,
/// `T <= (s+1-u) ⌈log2 L⌉`, `κ <= (s+1-u) (2 ⌈log2 L⌉ + (s+3u) / (2 log2 q))`.
/// For `u > s + 1` every term is zero.
pub fn scheme_upper_bounds<F: Float>(params: &SchemeParams) -> UpperBounds<F> {
    let matches = (params.s + 1).saturating_sub(params.u);
    let height = tree_height(params.block_len());
    let per_match = cast::<F>(2 * height)
        + cast::<F>(params.s + 3 * params.u) / (cast::<F>(2) * cast::<F>(params.q).log2());
    UpperBounds {
        c: local_comp_lower(params),
        rounds: matches * height,
        kappa: cast::<F>(matches) * per_match,
    }
}

/// Large-`p` limit of `kappa_upper / kappa_lower`: `2 log2(q) (s-u+1) / ⌊s/u⌋`.
pub fn ratio_limit<F: Float>(params: &SchemeParams) -> Result<F, BoundsError> {
    let c = local_comp_lower(params);
    if c == 0 {
        return Err(BoundsError::NoDisagreement {
            s: params.s,
            u: params.u,
        });
    }
    Ok(
        cast::<F>(2) * cast::<F>(params.q).log2() * cast::<F>(params.s + 1 - params.u)
            / cast::<F>(c),
    )
}

/// `kappa_upper / kappa_lower` at `params`.
pub fn kappa_ratio<F: Float>(params: &SchemeParams) -> Result<F, BoundsError> {
    let lower = comm_lower::<F>(params)?;
    if lower == F::zero() {
        return Err(BoundsError::ZeroLower {
            len: params.block_len(),
        });
    }
    Ok(scheme_upper_bounds::<F>(params).kappa / lower)
}

/// Replication `2s+1` with majority decoding: no interaction, no local work.
pub fn draco_baseline(params: &SchemeParams) -> Metrics {
    let replication = 2 * params.s as u64 + 1;
    Metrics {
        rounds: 0,
        local_computations: 0,
        replication: Rational::from_integer(replication),
        overhead_symbols: 0,
        overhead_bits: 0,
        initial_symbols: params.m as u64 * replication * params.d as u64,
        q: params.q,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport<F> {
    pub c_lower: usize,
    pub kappa_lower: F,
    pub c_upper: usize,
    pub t_upper: usize,
    pub kappa_upper: F,
    /// Absent when `⌊s/u⌋ = 0`.
    pub ratio_limit: Option<F>,
    pub draco_total_comm: F,
}

impl<F: Float> BoundsReport<F> {
    pub fn new(params: &SchemeParams) -> Result<Self, BoundsError> {
        let upper = scheme_upper_bounds::<F>(params);
        Ok(Self {
            c_lower: local_comp_lower(params),
            kappa_lower: comm_lower(params)?,
            c_upper: upper.c,
            t_upper: upper.rounds,
            kappa_upper: upper.kappa,
            ratio_limit: ratio_limit(params).ok(),
            draco_total_comm: draco_baseline(params).total_comm(),
        })
    }
}

/// Which of the three upper bounds a run respected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Compliance {
    pub rounds: bool,
    pub computations: bool,
    pub kappa: bool,
}

impl Compliance {
    pub fn all(&self) -> bool {
        self.rounds && self.computations && self.kappa
    }
}

/// Checks `metrics` against [`scheme_upper_bounds`]; `κ` may exceed its bound
/// by `1e-9` relative.
pub fn check_compliance(params: &SchemeParams, metrics: &Metrics) -> Compliance {
    let bounds = scheme_upper_bounds::<f64>(params);
    let kappa = metrics.kappa::<f64>();
    Compliance {
        rounds: metrics.rounds <= bounds.rounds,
        computations: metrics.local_computations <= bounds.c,
        kappa: kappa <= bounds.kappa * (1.0 + 1e-9) + f64::EPSILON,
    }
}

/// Every locally computed gradient is contested, and every match that ended
/// on a contested gradient was settled by the oracle or by a commit shortfall.
pub fn disagreement_coverage_check(
    transcript: &Transcript,
    disagreement: &DisagreementSet,
) -> bool {
    let oracle_inside = transcript
        .oracle
        .iter()
        .all(|o| disagreement.contains(o.index));
    let settled = transcript
        .matches
        .iter()
        .filter(|m| m.leaf.is_some_and(|i| disagreement.contains(i)))
        .all(|m| {
            matches!(
                m.resolution,
                MatchResolution::LocalComputation | MatchResolution::CommitShortfall
            )
        });
    oracle_inside && settled
}

/// Two executions the decoder cannot tell apart whose full gradients differ.
#[derive(Debug, Clone)]
pub struct Witness {
    pub budget: usize,
    /// The contested gradient left uncomputed, around which world 2 is built.
    pub flip: usize,
    pub computed: Vec<usize>,
    pub worlds: (World, World),
    pub decoder_inputs: (Vec<u8>, Vec<u8>),
    pub full_gradients: (GradientVector, GradientVector),
    pub estimates: (GradientVector, GradientVector),
}

impl Witness {
    pub fn holds(&self) -> bool {
        self.decoder_inputs.0 == self.decoder_inputs.1
            && self.full_gradients.0 != self.full_gradients.1
    }
}

fn run_world(
    params: &SchemeParams,
    world: &World,
    budget: usize,
    protocol_seed: u64,
) -> Result<RunOutput, BoundsError> {
    let mut adversary =
        world
            .adversary()
            .instantiate(params, &world.truth, SimRng::seed_from_u64(0))?;
    let config = ProtocolConfig {
        oracle_budget: Some(budget),
        ..ProtocolConfig::default()
    };
    let mut rng = SimRng::seed_from_u64(protocol_seed);
    Ok(run_scheme(
        params,
        &world.truth,
        &mut adversary,
        config,
        &mut rng,
    )?)
}

/// Runs the scheme, cut off after `budget` local computations, against a
/// symmetrization table; then rebuilds the truth around a contested gradient
/// the run never computed and reruns. Both runs see identical inputs.
pub fn indistinguishability_check<R: Rng + ?Sized>(
    params: &SchemeParams,
    budget: usize,
    rng: &mut R,
) -> Result<Witness, BoundsError> {
    let limit = local_comp_lower(params);
    if budget >= limit {
        return Err(BoundsError::BudgetTooLarge { budget, limit });
    }
    let (truth, malicious, outcome) = symmetrized_base(params, rng)?;
    let protocol_seed = rng.random();
    let first = World {
        truth: truth.clone(),
        table: outcome.table.clone(),
        malicious: malicious.clone(),
    };
    let run1 = run_world(params, &first, budget, protocol_seed)?;
    let computed = run1.transcript.computed_indices();
    let flip = *outcome
        .deviations
        .keys()
        .find(|i| !computed.contains(i))
        .ok_or(BoundsError::NoWitness)?;
    let (first, second) = worlds_around(params, &truth, &malicious, &outcome, flip)?;
    let run2 = run_world(params, &second, budget, protocol_seed)?;
    Ok(Witness {
        budget,
        flip,
        computed,
        decoder_inputs: (
            run1.transcript.decoder_view(),
            run2.transcript.decoder_view(),
        ),
        full_gradients: (first.full_gradient(), second.full_gradient()),
        estimates: (run1.estimate, run2.estimate),
        worlds: (first, second),
    })
}
