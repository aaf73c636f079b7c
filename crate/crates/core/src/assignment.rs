//! Fractional repetition data assignment.

use num_rational::Ratio;

use crate::params::{ParamsError, SchemeParams};
use crate::Rational;

/// A `p × n` binary matrix; entry `(i, j)` is set iff gradient `i` is assigned to worker `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<bool>,
}

impl AssignmentMatrix {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let entries = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.cols + j]
    }

    pub fn row_sum(&self, i: usize) -> usize {
        (0..self.cols).filter(|&j| self.get(i, j)).count()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    /// Gradient indices assigned to worker `j`.
    pub fn assigned(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows).filter(move |&i| self.get(i, j))
    }

    pub fn ones(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count()
    }
}

/// Block-diagonal all-ones assignment: `A[i, j] = 1` iff `i` and `j` fall in the same group.
pub fn build_fractional_repetition(params: &SchemeParams) -> Result<AssignmentMatrix, ParamsError> {
    params.validate()?;
    let block = params.block_len();
    let group = params.group_size();
    Ok(AssignmentMatrix::from_fn(params.p, params.n, |i, j| {
        i / block == j / group
    }))
}

/// Average number of workers per gradient, `Σ A[i, j] / p`, as an exact rational.
pub fn replication_factor(assignment: &AssignmentMatrix) -> Rational {
    Ratio::new(assignment.ones() as u64, assignment.rows() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: usize, u: usize, m: usize, p: usize) -> SchemeParams {
        SchemeParams::new(s, u, m, p, 1, 1 << 16).unwrap()
    }

    #[test]
    fn single_group_is_all_ones() {
        let a = build_fractional_repetition(&params(2, 1, 1, 4)).unwrap();
        assert_eq!((a.rows(), a.cols()), (4, 3));
        assert_eq!(a.ones(), 12);
        assert_eq!(replication_factor(&a), Ratio::from_integer(3));
    }

    #[test]
    fn two_by_two_blocks() {
        let a = build_fractional_repetition(&params(1, 1, 2, 4)).unwrap();
        let expected = [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]];
        for (i, row) in expected.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert_eq!(a.get(i, j), e == 1, "entry ({i}, {j})");
            }
        }
    }

    #[test]
    fn six_workers_eight_gradients() {
        let a = build_fractional_repetition(&params(2, 1, 2, 8)).unwrap();
        for j in 0..3 {
            assert_eq!(a.assigned(j).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        }
        for j in 3..6 {
            assert_eq!(a.assigned(j).collect::<Vec<_>>(), vec![4, 5, 6, 7]);
        }
    }

    #[test]
    fn replication_matches_group_size() {
        let a = build_fractional_repetition(&params(10, 1, 1, 20)).unwrap();
        assert_eq!(replication_factor(&a), Ratio::from_integer(11));
        let a = build_fractional_repetition(&params(10, 11, 1, 20)).unwrap();
        assert_eq!(replication_factor(&a), Ratio::from_integer(21));
    }

    #[test]
    fn rejects_invalid_params() {
        let mut bad = params(1, 1, 1, 4);
        bad.n = 5;
        assert!(matches!(
            build_fractional_repetition(&bad),
            Err(ParamsError::WorkerCount { .. })
        ));
    }

    #[test]
    fn exhaustive_row_and_column_sums() {
        for m in 1..=12 {
            for group in 1..=24 / m {
                for u in 1..=group {
                    let s = group - u;
                    for p in (2 * m..=32).step_by(m) {
                        let params = SchemeParams::new(s, u, m, p, 1, 2).unwrap();
                        let a = build_fractional_repetition(&params).unwrap();
                        assert!((0..p).all(|i| a.row_sum(i) == params.n / m));
                        assert!((0..params.n).all(|j| a.col_sum(j) == p / m));
                        assert_eq!(replication_factor(&a), Ratio::from_integer((s + u) as u64));
                    }
                }
            }
        }
    }
}
