//! The symmetrization attack: consistent claim tables that make several
//! ground truths produce identical worker behaviour.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::table::ClaimedGradientTable;
use super::AdversaryError;
use crate::gradient::{add_mod, GradientVector};
use crate::params::SchemeParams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetrizationMode {
    /// `⌊s/u⌋` disjoint subsets of `u` workers, each lying at its own index.
    #[default]
    PerIndex,
    /// Every malicious worker tells the same lie at one index of `Ĩ`.
    Collusive,
    /// Collusive with probability 1/2, per-index otherwise.
    CoinFlip,
}

/// What malicious workers left over after forming `⌊s/u⌋` subsets of size `u` do.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeftoverPolicy {
    /// Claim the truth everywhere.
    #[default]
    ClaimTruth,
    /// Jointly copy a uniformly chosen deviating subset, or the honest workers.
    Mimic,
}

/// Which coordinates of a deviating claim `g''` differ from the truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationSpread {
    #[default]
    SingleCoordinate,
    AllCoordinates,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrizationConfig {
    pub mode: SymmetrizationMode,
    pub leftover: LeftoverPolicy,
    pub spread: DeviationSpread,
}

impl SymmetrizationConfig {
    pub fn per_index() -> Self {
        Self::default()
    }

    pub fn collusive() -> Self {
        Self {
            mode: SymmetrizationMode::Collusive,
            ..Self::default()
        }
    }

    pub fn coin_flip() -> Self {
        Self {
            mode: SymmetrizationMode::CoinFlip,
            ..Self::default()
        }
    }
}

/// The set `Ĩ` of gradient indices (global, 0-based) carrying two competing values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisagreementSet {
    pub indices: BTreeSet<usize>,
}

impl DisagreementSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }
}

#[derive(Debug, Clone)]
pub struct SymmetrizationOutcome {
    pub table: ClaimedGradientTable,
    pub disagreement: DisagreementSet,
    /// Group the attack lives in.
    pub group: usize,
    /// Competing value `g''` for each index that is actually contested.
    pub deviations: BTreeMap<usize, GradientVector>,
    /// Workers claiming `g''` at each contested index.
    pub liars: BTreeMap<usize, Vec<usize>>,
    /// Whether the collusive branch was taken.
    pub collusive: bool,
}

/// A uniformly random vector unequal to `value`, differing in one uniformly
/// chosen coordinate or in all of them.
pub fn deviate<R: Rng + ?Sized>(
    value: &GradientVector,
    spread: DeviationSpread,
    rng: &mut R,
) -> GradientVector {
    let q = value.q();
    let mut out = value.clone();
    let mut shift = |k: usize, rng: &mut R| {
        let delta = rng.random_range(1..q);
        out.set_coord(k, add_mod(value.coord(k), delta, q));
    };
    match spread {
        DeviationSpread::SingleCoordinate => {
            let k = rng.random_range(0..value.dim());
            shift(k, rng);
        }
        DeviationSpread::AllCoordinates => {
            for k in 0..value.dim() {
                shift(k, rng);
            }
        }
    }
    out
}

/// Builds the claim table of the symmetrization attack.
///
/// `malicious` must hold exactly `s` workers, all from one group; they are
/// split in the given order into subsets of size `u`. The number of deviating
/// subsets is `⌊s/u⌋`, capped at the block length `p/m` since every subset
/// needs its own index.
pub fn symmetrization_attack<R: Rng + ?Sized>(
    params: &SchemeParams,
    truth: &[GradientVector],
    malicious: &[usize],
    config: &SymmetrizationConfig,
    rng: &mut R,
) -> Result<SymmetrizationOutcome, AdversaryError> {
    if malicious.len() != params.s {
        return Err(AdversaryError::AttackSize {
            expected: params.s,
            got: malicious.len(),
        });
    }
    if let Some(&j) = malicious.iter().find(|&&j| j >= params.n) {
        return Err(AdversaryError::UnknownWorker(j));
    }
    let group = malicious.first().map_or(0, |&j| params.group_of_worker(j));
    if malicious
        .iter()
        .any(|&j| params.group_of_worker(j) != group)
    {
        return Err(AdversaryError::SpansGroups);
    }

    let mut table = ClaimedGradientTable::honest(params, truth);
    let block = params.group_gradients(group);
    let subsets = params.disagreement_count().min(params.block_len());
    let disagreement: Vec<usize> = index::sample(rng, block.len(), subsets)
        .into_iter()
        .map(|i| block.start + i)
        .collect();

    let collusive = match config.mode {
        SymmetrizationMode::PerIndex => false,
        SymmetrizationMode::Collusive => true,
        SymmetrizationMode::CoinFlip => rng.random_bool(0.5),
    };

    let mut deviations = BTreeMap::new();
    let mut liars: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    if collusive {
        if !disagreement.is_empty() {
            let index = disagreement[rng.random_range(0..disagreement.len())];
            let value = deviate(&truth[index], config.spread, rng);
            for &j in malicious {
                table.set_claim(j, index, value.clone());
            }
            deviations.insert(index, value);
            liars.insert(index, malicious.to_vec());
        }
    } else {
        for (subset, &index) in malicious.chunks(params.u).zip(&disagreement) {
            let value = deviate(&truth[index], config.spread, rng);
            for &j in subset {
                table.set_claim(j, index, value.clone());
            }
            deviations.insert(index, value);
            liars.insert(index, subset.to_vec());
        }
        let leftovers = &malicious[(subsets * params.u).min(malicious.len())..];
        if config.leftover == LeftoverPolicy::Mimic && !leftovers.is_empty() {
            // choice `subsets` means "behave like the honest workers"
            let choice = rng.random_range(0..=subsets);
            if let Some(&index) = disagreement.get(choice) {
                for &j in leftovers {
                    table.set_claim(j, index, deviations[&index].clone());
                }
                liars
                    .get_mut(&index)
                    .expect("deviating subset")
                    .extend_from_slice(leftovers);
            }
        }
    }

    Ok(SymmetrizationOutcome {
        table,
        disagreement: DisagreementSet {
            indices: disagreement.into_iter().collect(),
        },
        group,
        deviations,
        liars,
        collusive,
    })
}
