//! Branching-process oracles for the square count process.
//!
//! The number of retained squares per level is a Galton-Watson process whose
//! offspring variable is the sum of M^2 independent retention indicators, so
//! its generating function is `h(s) = prod (1 - p_ij + p_ij s)` and the
//! extinction probability is the smallest fixed point of `h`.

use crate::error::{PerclabError, Result};
use crate::matrix::ProbabilityMatrix;
use crate::tree::RealizationTree;

/// Cap on fixed-point iterations; monotone convergence makes this generous.
const MAX_PGF_ITERATIONS: usize = 1_000_000;

/// Offspring generating function of the square count process.
pub fn offspring_pgf(matrix: &ProbabilityMatrix, s: f64) -> f64 {
    let mut acc = 1.0;
    for row in matrix.rows() {
        for &p in row {
            acc *= 1.0 - p + p * s;
        }
    }
    acc
}

/// Extinction probability: the smallest fixed point of the offspring PGF,
/// found by monotone iteration from 0. Exactly 1 when `sum p_ij <= 1`
/// (survival is possible iff the total mass exceeds 1).
pub fn extinction_probability(matrix: &ProbabilityMatrix, tol: f64) -> Result<f64> {
    if tol <= 0.0 {
        return Err(PerclabError::Precondition("tol must be positive".into()));
    }
    if matrix.sum_total() <= 1.0 {
        return Ok(1.0);
    }
    Ok(pgf_fixed_point(|s| offspring_pgf(matrix, s), tol))
}

/// Extinction probability truncated at finite depth: `P(E_depth empty)`,
/// i.e. `depth` iterations of the PGF from 0. This is the exact law of the
/// depth-D emptiness proxy used by the Monte Carlo tests.
pub fn extinction_probability_at_depth(matrix: &ProbabilityMatrix, depth: usize) -> f64 {
    let mut q = 0.0;
    for _ in 0..depth {
        q = offspring_pgf(matrix, q);
    }
    q
}

fn pgf_fixed_point(h: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut q = 0.0;
    for _ in 0..MAX_PGF_ITERATIONS {
        let next = h(q);
        if (next - q).abs() < tol {
            return next;
        }
        q = next;
    }
    q
}

/// Hausdorff dimension of the limit set conditioned on survival:
/// `log(sum p_ij) / log M`. Only defined in the supercritical regime.
pub fn theoretical_dimension(matrix: &ProbabilityMatrix) -> Result<f64> {
    let total = matrix.sum_total();
    if total <= 1.0 {
        return Err(PerclabError::Domain(format!(
            "dimension formula requires sum p_ij > 1, got {total}"
        )));
    }
    Ok(total.ln() / (matrix.m() as f64).ln())
}

/// Mean of `(1/n) log #E_n` over the surviving trees in the collection.
/// The limit of this statistic is `log sum p_ij`.
///
/// Takes trees by value so callers can stream realizations without holding
/// the whole collection in memory.
pub fn growth_rate_estimate<I>(trees: I, n: usize) -> Result<f64>
where
    I: IntoIterator<Item = RealizationTree>,
{
    let mut sum = 0.0;
    let mut surviving = 0usize;
    for tree in trees {
        let count = tree.level_count(n)?;
        if count > 0 {
            sum += (count as f64).ln() / n as f64;
            surviving += 1;
        }
    }
    if surviving == 0 {
        return Err(PerclabError::EmptySample(
            "no tree survives to the requested level".into(),
        ));
    }
    Ok(sum / surviving as f64)
}

/// Offspring PGF of the column process above a fixed abscissa with horizontal
/// digit `i`: each column square spawns the M squares of the next digit strip,
/// each kept independently, so `h_i(s) = prod_j (1 - p_ij + p_ij s)`.
pub fn column_offspring_pgf(matrix: &ProbabilityMatrix, digit: usize, vertical: bool, s: f64) -> f64 {
    let m = matrix.m();
    let mut acc = 1.0;
    for j in 0..m {
        let p = if vertical {
            matrix.prob(digit, j)
        } else {
            matrix.prob(j, digit)
        };
        acc *= 1.0 - p + p * s;
    }
    acc
}

/// Extinction probability of the digit-homogeneous column process.
pub fn column_extinction_probability(
    matrix: &ProbabilityMatrix,
    digit: usize,
    vertical: bool,
    tol: f64,
) -> f64 {
    let mean: f64 = (0..matrix.m())
        .map(|j| {
            if vertical {
                matrix.prob(digit, j)
            } else {
                matrix.prob(j, digit)
            }
        })
        .sum();
    if mean <= 1.0 {
        return 1.0;
    }
    pgf_fixed_point(|s| column_offspring_pgf(matrix, digit, vertical, s), tol)
}

/// Column-process extinction truncated at finite depth, for homogeneous
/// (uniform-probability) matrices where the digit does not matter.
pub fn column_extinction_at_depth(
    matrix: &ProbabilityMatrix,
    digit: usize,
    vertical: bool,
    depth: usize,
) -> f64 {
    let mut q = 0.0;
    for _ in 0..depth {
        q = column_offspring_pgf(matrix, digit, vertical, q);
    }
    q
}
