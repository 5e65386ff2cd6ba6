use serde::{Deserialize, Serialize};

use crate::error::{PerclabError, Result};

/// The M x M retention probabilities of the construction.
///
/// `p[i][j]` is the probability of keeping the subsquare with horizontal
/// digit `i` and vertical digit `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMatrix {
    m: usize,
    p: Vec<Vec<f64>>,
}

impl ProbabilityMatrix {
    pub fn new(m: usize, p: Vec<Vec<f64>>) -> Result<Self> {
        if !(2..=255).contains(&m) {
            return Err(PerclabError::InvalidGridOrder(m));
        }
        if p.len() != m || p.iter().any(|row| row.len() != m) {
            return Err(PerclabError::Domain(format!(
                "probability matrix must be {m}x{m}"
            )));
        }
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) || v.is_nan() {
                    return Err(PerclabError::InvalidProbability {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(Self { m, p })
    }

    /// Uniform retention probability on all M^2 cells.
    pub fn uniform(m: usize, p: f64) -> Result<Self> {
        Self::new(m, vec![vec![p; m]; m])
    }

    /// Uniform probability except one zeroed cell; `M = 3` with the center
    /// removed is the random Sierpinski carpet.
    pub fn with_hole(m: usize, p: f64, hole: (usize, usize)) -> Result<Self> {
        let mut rows = vec![vec![p; m]; m];
        if hole.0 >= m || hole.1 >= m {
            return Err(PerclabError::Domain(format!("hole {hole:?} outside {m}x{m}")));
        }
        rows[hole.0][hole.1] = 0.0;
        Self::new(m, rows)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    /// Total mass sum p_{i,j}; the mean offspring number of the square count
    /// branching process.
    pub fn sum_total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    /// Survival is possible iff sum p_{i,j} > 1.
    pub fn is_supercritical(&self) -> bool {
        self.sum_total() > 1.0
    }

    /// The standing assumption of the projection theorems: sum p_{i,j} > M,
    /// i.e. dimension above one. Operations only require the weaker
    /// supercriticality where they say so; both flags are reported, neither is
    /// enforced globally.
    pub fn exceeds_grid_order(&self) -> bool {
        self.sum_total() > self.m as f64
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.p[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        self.p.iter().map(|row| row[j]).sum()
    }

    /// True iff every row sum and every column sum exceeds 1 (the hypothesis
    /// covering the axis directions).
    pub fn column_row_condition(&self) -> bool {
        (0..self.m).all(|i| self.row_sum(i) > 1.0) && (0..self.m).all(|j| self.col_sum(j) > 1.0)
    }

    /// Entrywise order; used by the monotonicity tests.
    pub fn dominates(&self, other: &ProbabilityMatrix) -> bool {
        self.m == other.m
            && self
                .p
                .iter()
                .zip(&other.p)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x >= y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_entries() {
        assert!(ProbabilityMatrix::uniform(2, 0.5).is_ok());
        assert!(matches!(
            ProbabilityMatrix::uniform(1, 0.5),
            Err(PerclabError::InvalidGridOrder(1))
        ));
        assert!(matches!(
            ProbabilityMatrix::new(2, vec![vec![0.5, 1.2], vec![0.5, 0.5]]),
            Err(PerclabError::InvalidProbability { row: 0, col: 1, .. })
        ));
        assert!(ProbabilityMatrix::new(2, vec![vec![0.5; 2]; 3]).is_err());
    }

    #[test]
    fn sums_and_flags() {
        let m = ProbabilityMatrix::uniform(2, 0.9).unwrap();
        assert!((m.sum_total() - 3.6).abs() < 1e-12);
        assert!(m.is_supercritical());
        assert!(m.exceeds_grid_order());

        let sub = ProbabilityMatrix::uniform(2, 0.2).unwrap();
        assert!(!sub.is_supercritical());
        assert!(!sub.exceeds_grid_order());

        // survival possible but dimension below one
        let mid = ProbabilityMatrix::uniform(2, 0.4).unwrap();
        assert!(mid.is_supercritical());
        assert!(!mid.exceeds_grid_order());
    }

    #[test]
    fn sierpinski_column_row_condition() {
        let tight = ProbabilityMatrix::with_hole(3, 0.45, (1, 1)).unwrap();
        assert!((tight.col_sum(1) - 0.9).abs() < 1e-12);
        assert!(!tight.column_row_condition());

        let ok = ProbabilityMatrix::with_hole(3, 0.55, (1, 1)).unwrap();
        assert!((ok.col_sum(1) - 1.1).abs() < 1e-12);
        assert!((ok.col_sum(0) - 1.65).abs() < 1e-12);
        assert!(ok.column_row_condition());

        let full = ProbabilityMatrix::uniform(2, 1.0).unwrap();
        assert!(full.column_row_condition());
    }

    #[test]
    fn dominance() {
        let lo = ProbabilityMatrix::uniform(2, 0.5).unwrap();
        let hi = ProbabilityMatrix::uniform(2, 0.7).unwrap();
        assert!(hi.dominates(&lo));
        assert!(!lo.dominates(&hi));
    }
}
