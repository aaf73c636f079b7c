//! Vectors over the alphabet `Z_q` and ground-truth gradient synthesis.

use std::fmt;
use std::ops::{Add, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::SchemeParams;
use crate::Residue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradientError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("alphabet mismatch: q = {0} vs q = {1}")]
    Alphabet(u64, u64),
    #[error("coordinate {value} is not a residue mod {q}")]
    OutOfAlphabet { value: Residue, q: u64 },
    #[error("cannot sum an empty list of gradients")]
    Empty,
}

/// `(a + b) mod q` for residues `a, b < q`.
pub fn add_mod(a: Residue, b: Residue, q: u64) -> Residue {
    debug_assert!(a < q && b < q);
    if a >= q - b {
        a - (q - b)
    } else {
        a + b
    }
}

/// `(a - b) mod q` for residues `a, b < q`.
pub fn sub_mod(a: Residue, b: Residue, q: u64) -> Residue {
    debug_assert!(a < q && b < q);
    if a >= b {
        a - b
    } else {
        a + (q - b)
    }
}

/// A length-`d` vector over `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradientVector {
    q: u64,
    coords: Vec<Residue>,
}

impl GradientVector {
    pub fn zeros(d: usize, q: u64) -> Self {
        Self {
            q,
            coords: vec![0; d],
        }
    }

    pub fn from_coords(coords: Vec<Residue>, q: u64) -> Result<Self, GradientError> {
        if let Some(&value) = coords.iter().find(|&&c| c >= q) {
            return Err(GradientError::OutOfAlphabet { value, q });
        }
        Ok(Self { q, coords })
    }

    /// Reduces arbitrary integers into `Z_q`, e.g. `-4 -> q - 4`.
    pub fn from_signed(values: &[i64], q: u64) -> Self {
        let coords = values
            .iter()
            .map(|&v| i128::from(v).rem_euclid(i128::from(q)) as u64)
            .collect();
        Self { q, coords }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Residue] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> Residue {
        self.coords[k]
    }

    pub fn set_coord(&mut self, k: usize, value: Residue) {
        assert!(value < self.q, "{value} is not a residue mod {}", self.q);
        self.coords[k] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), GradientError> {
        if self.q != other.q {
            return Err(GradientError::Alphabet(self.q, other.q));
        }
        if self.dim() != other.dim() {
            return Err(GradientError::Dimension(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, GradientError> {
        self.check_compatible(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| add_mod(a, b, self.q))
            .collect();
        Ok(Self { q: self.q, coords })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, GradientError> {
        self.check_compatible(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| sub_mod(a, b, self.q))
            .collect();
        Ok(Self { q: self.q, coords })
    }

    pub fn add_assign_checked(&mut self, other: &Self) -> Result<(), GradientError> {
        self.check_compatible(other)?;
        for (a, &b) in self.coords.iter_mut().zip(&other.coords) {
            *a = add_mod(*a, b, self.q);
        }
        Ok(())
    }

    /// Index of the first coordinate where the two vectors differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        self.coords
            .iter()
            .zip(&other.coords)
            .position(|(a, b)| a != b)
    }
}

/// Panics on dimension or alphabet mismatch; use [`GradientVector::checked_add`] otherwise.
impl Add for &GradientVector {
    type Output = GradientVector;

    fn add(self, rhs: Self) -> GradientVector {
        self.checked_add(rhs)
            .expect("incompatible gradient vectors")
    }
}

impl Sub for &GradientVector {
    type Output = GradientVector;

    fn sub(self, rhs: Self) -> GradientVector {
        self.checked_sub(rhs)
            .expect("incompatible gradient vectors")
    }
}

impl fmt::Display for GradientVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The full gradient `Σ g_i`, coordinate-wise mod `q`.
pub fn full_gradient(gradients: &[GradientVector]) -> Result<GradientVector, GradientError> {
    let (first, rest) = gradients.split_first().ok_or(GradientError::Empty)?;
    let mut sum = first.clone();
    for g in rest {
        sum.add_assign_checked(g)?;
    }
    Ok(sum)
}

pub fn uniform_vector<R: Rng + ?Sized>(d: usize, q: u64, rng: &mut R) -> GradientVector {
    let coords = (0..d).map(|_| rng.random_range(0..q)).collect();
    GradientVector { q, coords }
}

/// `p` gradients drawn uniformly from `Z_q^d`, deterministic in `(params, seed)`.
pub fn random_gradients(params: &SchemeParams, seed: u64) -> Vec<GradientVector> {
    let mut rng = crate::rng::substream(seed, crate::rng::Stream::Truth, 0);
    sample_gradients(params, &mut rng)
}

pub fn sample_gradients<R: Rng + ?Sized>(
    params: &SchemeParams,
    rng: &mut R,
) -> Vec<GradientVector> {
    (0..params.p)
        .map(|_| uniform_vector(params.d, params.q, rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_helpers() {
        assert_eq!(add_mod(3, 4, 5), 2);
        assert_eq!(add_mod(u64::MAX - 1, u64::MAX - 1, u64::MAX), u64::MAX - 2);
        assert_eq!(sub_mod(2, 7, 1 << 16), 65531);
        assert_eq!(sub_mod(4, 4, 5), 0);
    }

    #[test]
    fn full_gradient_of_zeros() {
        let zeros = vec![GradientVector::zeros(3, 7); 5];
        assert!(full_gradient(&zeros).unwrap().is_zero());
    }

    #[test]
    fn full_gradient_toy_game() {
        let g: Vec<_> = (1..=4)
            .map(|i| GradientVector::from_signed(&[i], 1 << 16))
            .collect();
        assert_eq!(full_gradient(&g).unwrap().coords(), &[10]);
    }

    #[test]
    fn full_gradient_mod_five() {
        let g = vec![
            GradientVector::from_coords(vec![1, 2], 5).unwrap(),
            GradientVector::from_coords(vec![3, 4], 5).unwrap(),
            GradientVector::from_coords(vec![4, 4], 5).unwrap(),
        ];
        assert_eq!(full_gradient(&g).unwrap().coords(), &[3, 0]);
    }

    #[test]
    fn full_gradient_errors() {
        assert_eq!(full_gradient(&[]), Err(GradientError::Empty));
        let g = vec![GradientVector::zeros(2, 5), GradientVector::zeros(3, 5)];
        assert_eq!(full_gradient(&g), Err(GradientError::Dimension(2, 3)));
        let g = vec![GradientVector::zeros(2, 5), GradientVector::zeros(2, 7)];
        assert_eq!(full_gradient(&g), Err(GradientError::Alphabet(5, 7)));
    }

    #[test]
    fn rejects_out_of_alphabet() {
        assert_eq!(
            GradientVector::from_coords(vec![0, 5], 5),
            Err(GradientError::OutOfAlphabet { value: 5, q: 5 })
        );
        assert_eq!(
            GradientVector::from_signed(&[-4, 5], 1 << 16).coords(),
            &[65532, 5]
        );
    }

    #[test]
    fn random_gradients_are_deterministic() {
        let params = SchemeParams::new(1, 1, 2, 8, 3, 1 << 16).unwrap();
        assert_eq!(random_gradients(&params, 42), random_gradients(&params, 42));
    }

    #[test]
    fn random_gradients_depend_on_seed() {
        let params = SchemeParams::new(1, 1, 1, 4, 4, 1 << 16).unwrap();
        for seed in 0..100u64 {
            assert_ne!(
                random_gradients(&params, 2 * seed),
                random_gradients(&params, 2 * seed + 1)
            );
        }
    }

    #[test]
    fn random_gradients_respect_alphabet() {
        // p = 1 is not a valid scheme, so build the struct directly
        let params = SchemeParams {
            n: 2,
            s: 1,
            u: 1,
            m: 1,
            p: 1,
            d: 1,
            q: 2,
        };
        for seed in 0..50 {
            let g = random_gradients(&params, seed);
            assert_eq!(g.len(), 1);
            assert!(g[0].coord(0) < 2);
        }
    }
}
