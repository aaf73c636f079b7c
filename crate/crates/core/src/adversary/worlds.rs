//! Pairs of ground truths that a symmetrization table cannot tell apart.

use rand::seq::index;
use rand::Rng;

use super::symmetrization::{symmetrization_attack, SymmetrizationConfig, SymmetrizationOutcome};
use super::table::{ClaimedGradientTable, TableAttack};
use super::{AdversaryError, AdversaryModel};
use crate::gradient::{full_gradient, sample_gradients, GradientVector};
use crate::params::SchemeParams;

/// A complete system state: the truth, every worker's claims, and who is lying.
#[derive(Debug, Clone)]
pub struct World {
    pub truth: Vec<GradientVector>,
    pub table: ClaimedGradientTable,
    pub malicious: Vec<usize>,
}

impl World {
    pub fn full_gradient(&self) -> GradientVector {
        full_gradient(&self.truth).expect("non-empty truth")
    }

    /// The table restricted to this world's malicious workers.
    pub fn adversary(&self) -> AdversaryModel {
        AdversaryModel::Table(TableAttack::from_table(&self.table, &self.malicious))
    }
}

/// Draws a base truth and a per-index symmetrization table on group 0.
pub fn symmetrized_base<R: Rng + ?Sized>(
    params: &SchemeParams,
    rng: &mut R,
) -> Result<(Vec<GradientVector>, Vec<usize>, SymmetrizationOutcome), AdversaryError> {
    if params.s < params.u {
        return Err(AdversaryError::NoDisagreement {
            s: params.s,
            u: params.u,
        });
    }
    let truth = sample_gradients(params, rng);
    let mut malicious: Vec<usize> = index::sample(rng, params.group_size(), params.s).into_vec();
    malicious.sort_unstable();
    let outcome = symmetrization_attack(
        params,
        &truth,
        &malicious,
        &SymmetrizationConfig::per_index(),
        rng,
    )?;
    Ok((truth, malicious, outcome))
}

/// The two cases around disagreement index `flip`: world 1 keeps the base
/// truth `g'`, world 2 sets `g_flip = g''_flip`. Both share one claim table.
pub fn worlds_around(
    params: &SchemeParams,
    base_truth: &[GradientVector],
    malicious: &[usize],
    outcome: &SymmetrizationOutcome,
    flip: usize,
) -> Result<(World, World), AdversaryError> {
    let alternative = outcome
        .deviations
        .get(&flip)
        .ok_or(AdversaryError::NotContested(flip))?;
    let first = World {
        truth: base_truth.to_vec(),
        table: outcome.table.clone(),
        malicious: malicious.to_vec(),
    };
    let mut truth = base_truth.to_vec();
    truth[flip] = alternative.clone();
    let liars = outcome.table.deviators(&truth);
    if liars.len() > params.s {
        return Err(AdversaryError::BudgetExceeded {
            budget: params.s,
            used: liars.len(),
        });
    }
    let second = World {
        truth,
        table: outcome.table.clone(),
        malicious: liars,
    };
    Ok((first, second))
}

/// Two worlds with byte-identical claim tables and different full gradients.
pub fn two_case_worlds<R: Rng + ?Sized>(
    params: &SchemeParams,
    rng: &mut R,
) -> Result<(World, World), AdversaryError> {
    let (truth, malicious, outcome) = symmetrized_base(params, rng)?;
    let contested: Vec<usize> = outcome.deviations.keys().copied().collect();
    let flip = contested[rng.random_range(0..contested.len())];
    worlds_around(params, &truth, &malicious, &outcome, flip)
}
