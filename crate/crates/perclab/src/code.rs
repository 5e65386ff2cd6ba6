use serde::{Deserialize, Serialize};

use crate::error::{PerclabError, Result};
use crate::matrix::ProbabilityMatrix;

/// Address of a level-n M-adic square.
///
/// The digit sequences are packed positionally: `ix = sum_k i_k M^(n-k)`, so
/// the square's lower-left corner is `(ix M^-n, iy M^-n)` and its side is
/// `M^-n`. Prefix order on digit sequences coincides with square inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SquareCode {
    m: u32,
    level: u32,
    ix: u64,
    iy: u64,
}

impl SquareCode {
    pub fn root(m: usize) -> Self {
        Self {
            m: m as u32,
            level: 0,
            ix: 0,
            iy: 0,
        }
    }

    pub fn from_packed(m: usize, level: usize, ix: u64, iy: u64) -> Self {
        debug_assert!(ix < (m as u64).pow(level as u32).max(1) || level == 0);
        Self {
            m: m as u32,
            level: level as u32,
            ix,
            iy,
        }
    }

    /// Builds a code from explicit digit sequences (most significant first).
    pub fn from_digits(m: usize, digits_i: &[u8], digits_j: &[u8]) -> Result<Self> {
        if digits_i.len() != digits_j.len() {
            return Err(PerclabError::Domain(
                "digit sequences must have equal length".into(),
            ));
        }
        let mut ix = 0u64;
        let mut iy = 0u64;
        for (&di, &dj) in digits_i.iter().zip(digits_j) {
            if di as usize >= m || dj as usize >= m {
                return Err(PerclabError::Domain(format!(
                    "digit out of range for M = {m}"
                )));
            }
            ix = ix * m as u64 + di as u64;
            iy = iy * m as u64 + dj as u64;
        }
        Ok(Self {
            m: m as u32,
            level: digits_i.len() as u32,
            ix,
            iy,
        })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m as usize
    }

    #[inline]
    pub fn level(&self) -> usize {
        self.level as usize
    }

    #[inline]
    pub fn packed(&self) -> (u64, u64) {
        (self.ix, self.iy)
    }

    pub fn digits_i(&self) -> Vec<u8> {
        Self::unpack(self.ix, self.m as u64, self.level)
    }

    pub fn digits_j(&self) -> Vec<u8> {
        Self::unpack(self.iy, self.m as u64, self.level)
    }

    fn unpack(mut v: u64, m: u64, level: u32) -> Vec<u8> {
        let mut out = vec![0u8; level as usize];
        for slot in out.iter_mut().rev() {
            *slot = (v % m) as u8;
            v /= m;
        }
        out
    }

    pub fn parent(&self) -> Option<Self> {
        if self.level == 0 {
            return None;
        }
        Some(Self {
            m: self.m,
            level: self.level - 1,
            ix: self.ix / self.m as u64,
            iy: self.iy / self.m as u64,
        })
    }

    pub fn child(&self, di: usize, dj: usize) -> Self {
        Self {
            m: self.m,
            level: self.level + 1,
            ix: self.ix * self.m as u64 + di as u64,
            iy: self.iy * self.m as u64 + dj as u64,
        }
    }

    /// Square inclusion: `self` contains `other` iff the digit sequences of
    /// `self` are prefixes of those of `other`.
    pub fn contains(&self, other: &SquareCode) -> bool {
        if self.m != other.m || self.level > other.level {
            return false;
        }
        let shift = (self.m as u64).pow(other.level - self.level);
        other.ix / shift == self.ix && other.iy / shift == self.iy
    }

    /// Lower-left corner and side length of the square.
    pub fn geometry(&self) -> ((f64, f64), f64) {
        let side = (self.m as f64).powi(-(self.level as i32));
        ((self.ix as f64 * side, self.iy as f64 * side), side)
    }

    /// Product retention weight prod_k p_{i_k, j_k} along the digit path.
    pub fn weight(&self, matrix: &ProbabilityMatrix) -> f64 {
        let di = self.digits_i();
        let dj = self.digits_j();
        di.iter()
            .zip(&dj)
            .map(|(&a, &b)| matrix.prob(a as usize, b as usize))
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_examples() {
        let ((x, y), side) = SquareCode::root(2).geometry();
        assert_eq!((x, y, side), (0.0, 0.0, 1.0));

        let c = SquareCode::from_digits(2, &[1], &[0]).unwrap();
        let ((x, y), side) = c.geometry();
        assert_eq!((x, y, side), (0.5, 0.0, 0.5));

        // corner (1/3 + 2/9, 1/9), side 1/9
        let c = SquareCode::from_digits(3, &[1, 2], &[0, 1]).unwrap();
        let ((x, y), side) = c.geometry();
        assert!((x - 5.0 / 9.0).abs() < 1e-15);
        assert!((y - 1.0 / 9.0).abs() < 1e-15);
        assert!((side - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn digits_round_trip() {
        let c = SquareCode::from_digits(3, &[1, 2, 0], &[0, 1, 2]).unwrap();
        assert_eq!(c.digits_i(), vec![1, 2, 0]);
        assert_eq!(c.digits_j(), vec![0, 1, 2]);
        assert_eq!(c.level(), 3);
    }

    #[test]
    fn prefix_is_inclusion() {
        let parent = SquareCode::from_digits(2, &[1], &[0]).unwrap();
        let child = SquareCode::from_digits(2, &[1, 1], &[0, 1]).unwrap();
        let stranger = SquareCode::from_digits(2, &[0, 1], &[0, 1]).unwrap();
        assert!(parent.contains(&child));
        assert!(!parent.contains(&stranger));
        assert_eq!(child.parent().unwrap(), parent);
        assert!(SquareCode::root(2).contains(&stranger));
    }

    #[test]
    fn weight_is_digit_product() {
        let m = ProbabilityMatrix::new(2, vec![vec![0.5, 0.25], vec![1.0, 0.125]]).unwrap();
        let c = SquareCode::from_digits(2, &[0, 1], &[1, 0]).unwrap();
        // p[0][1] * p[1][0] = 0.25 * 1.0
        assert!((c.weight(&m) - 0.25).abs() < 1e-15);
        assert_eq!(SquareCode::root(2).weight(&m), 1.0);
    }
}
