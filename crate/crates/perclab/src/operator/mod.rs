//! Exact computation with the expected inverse Markov operator on diagonal
//! functions, and the derivation pipeline that proposes certificate
//! candidates from a spectral-gap witness.
//!
//! The operator acts on functions of the diagonal parameter as
//!
//! `F f (x) = sum over cells (i,j) with x in image(K_ij) of
//!            p_ij * f(psi_ij(x))`
//!
//! where `psi_ij` is the linear expansion inverting the projected similarity
//! of the cell. Applied to piecewise-linear functions vanishing at the
//! endpoints it stays piecewise linear, and every quantity used here (node
//! values, interval minima, suprema over neighborhoods) is computed exactly
//! on that representation.

pub mod certify;
pub mod pl;
pub mod step;

pub use certify::{
    certify_a, robustness_extend, tile_angle_range, CertificateA, CertifyOutcome, SearchParams,
};
pub use pl::{build_tent, PiecewiseLinearFunction};
pub use step::{pushforward_indicator, recount_at, StepFunction};

use serde::{Deserialize, Serialize};

use crate::code::SquareCode;
use crate::error::{PerclabError, Result};
use crate::geometry::ProjectionFrame;
use crate::matrix::ProbabilityMatrix;

/// Additive safety margin over the exact threshold 2, absorbing float
/// accumulation across the sweep's additions.
pub const SWEEP_SAFETY: f64 = 1e-9;

/// Affine map `u -> scale * u + offset` on the diagonal parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
}

impl AffineMap {
    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        self.scale * u + self.offset
    }
}

/// The expansion `psi_code` inverting `u -> Pi_alpha(phi_code(point at u))`.
/// Expanding ratio exactly `M^n`, mapping the square's image interval onto
/// `[0, 1]`.
pub fn expansion_map(code: &SquareCode, frame: &ProjectionFrame) -> AffineMap {
    let (lo, _) = frame.project_square(code);
    let scale = (code.m() as f64).powi(code.level() as i32);
    AffineMap {
        scale,
        offset: -scale * lo,
    }
}

/// One application of the expected operator to a piecewise-linear function
/// vanishing at the endpoints. The result is exact: its breakpoints are the
/// images of the input breakpoints under the M^2 cell contractions, and each
/// node value is the finite weighted sum of input evaluations.
pub fn apply_expected(
    matrix: &ProbabilityMatrix,
    frame: &ProjectionFrame,
    f: &PiecewiseLinearFunction,
) -> Result<PiecewiseLinearFunction> {
    if !f.vanishes_at_ends() {
        return Err(PerclabError::Precondition(
            "operator input must vanish at the diagonal endpoints".into(),
        ));
    }
    let m = matrix.m();
    let side = 1.0 / m as f64;
    // image intervals and expansions of the level-1 cells
    let mut cells = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let code = SquareCode::from_digits(m, &[i as u8], &[j as u8]).expect("digit in range");
            let (lo, hi) = frame.project_square(&code);
            cells.push((lo, hi, matrix.prob(i, j)));
        }
    }

    let mut nodes: Vec<f64> = Vec::with_capacity(cells.len() * f.breakpoints().len());
    for &(lo, _, _) in &cells {
        for &b in f.breakpoints() {
            nodes.push(lo + b * side);
        }
    }
    nodes.push(0.0);
    nodes.push(1.0);
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes.dedup();
    nodes.retain(|&x| (0.0..=1.0).contains(&x));

    let values = nodes
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &(lo, hi, p) in &cells {
                if p > 0.0 && x >= lo && x <= hi {
                    acc += p * f.eval((x - lo) / side);
                }
            }
            acc
        })
        .collect();
    PiecewiseLinearFunction::new(nodes, values)
}

/// Margin report of the spectral-gap check `F f >= (1 + eps) f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionBReport {
    /// achieved margin: min ratio minus one
    pub margin: f64,
    /// where the minimum ratio is attained
    pub argmin: f64,
    /// margin >= the requested eps
    pub passes: bool,
}

/// Checks Condition B for a witness `f` that is positive on `(0, 1)` and
/// zero at the endpoints. The ratio `Ff / f` is monotone between breakpoints
/// and constant on the two end cells (both functions vanish linearly), so
/// the minimum over the evaluation nodes below is the exact infimum.
pub fn check_condition_b(
    matrix: &ProbabilityMatrix,
    frame: &ProjectionFrame,
    f: &PiecewiseLinearFunction,
    eps: f64,
) -> Result<ConditionBReport> {
    let ff = apply_expected(matrix, frame, f)?;
    let mut nodes: Vec<f64> = f
        .breakpoints()
        .iter()
        .chain(ff.breakpoints())
        .copied()
        .collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes.dedup();
    let mids: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    nodes.extend(mids);

    let mut best = f64::INFINITY;
    let mut argmin = 0.5;
    for &x in &nodes {
        if x <= 0.0 || x >= 1.0 {
            continue; // end cells carry the constant ratio of the adjacent node
        }
        let fx = f.eval(x);
        if fx <= 0.0 {
            return Err(PerclabError::Domain(format!(
                "witness vanishes at interior point {x}"
            )));
        }
        let ratio = ff.eval(x) / fx;
        if ratio < best {
            best = ratio;
            argmin = x;
        }
    }
    Ok(ConditionBReport {
        margin: best - 1.0,
        argmin,
        passes: best - 1.0 >= eps,
    })
}

/// Nested closed intervals `I1 subset int I2 subset int (0, 1)` with their
/// end gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalPair {
    pub i1: (f64, f64),
    pub i2: (f64, f64),
}

impl IntervalPair {
    pub fn new(i1: (f64, f64), i2: (f64, f64)) -> Result<Self> {
        let ok = i2.0 > 0.0
            && i2.1 < 1.0
            && i1.0 > i2.0
            && i1.1 < i2.1
            && i1.0 < i1.1;
        if !ok {
            return Err(PerclabError::Domain(format!(
                "need I1 strictly inside I2 strictly inside (0,1); got I1 = {i1:?}, I2 = {i2:?}"
            )));
        }
        Ok(Self { i1, i2 })
    }

    /// Minimum of the two end gaps between `I1` and `I2`.
    pub fn gap(&self) -> f64 {
        (self.i1.0 - self.i2.0).min(self.i2.1 - self.i1.1)
    }
}

/// Verifies `F(f restricted to I1) >= factor * f` on all of `I2`, exactly.
///
/// The restricted pushforward is piecewise linear between the image points of
/// the restriction endpoints and the cell boundaries, with possible jumps at
/// those breakpoints; on each open cell the active term set is constant. The
/// inequality of two linear functions on a cell holds everywhere iff it holds
/// at both ends (one-sided limits), which is what is checked.
pub fn restricted_apply_dominates(
    matrix: &ProbabilityMatrix,
    frame: &ProjectionFrame,
    f: &PiecewiseLinearFunction,
    i1: (f64, f64),
    i2: (f64, f64),
    factor: f64,
) -> bool {
    let m = matrix.m();
    let side = 1.0 / m as f64;
    let mut cells = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let code = SquareCode::from_digits(m, &[i as u8], &[j as u8]).expect("digit in range");
            let (lo, _) = frame.project_square(&code);
            cells.push((lo, matrix.prob(i, j)));
        }
    }

    // breakpoints: images of f's nodes and of the restriction endpoints
    let mut nodes = vec![i2.0, i2.1];
    for &(lo, _) in &cells {
        for &b in f.breakpoints() {
            let x = lo + b * side;
            if x > i2.0 && x < i2.1 {
                nodes.push(x);
            }
        }
        for &b in &[i1.0, i1.1] {
            let x = lo + b * side;
            if x > i2.0 && x < i2.1 {
                nodes.push(x);
            }
        }
    }
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes.dedup();

    for w in nodes.windows(2) {
        let (xl, xr) = (w[0], w[1]);
        let mid = 0.5 * (xl + xr);
        // the active term set is constant on the open cell (decided at the
        // midpoint); each active term is linear there, so the sum's one-sided
        // limits at the cell ends are plain evaluations
        let at = |x: f64| -> f64 {
            let mut acc = 0.0;
            for &(lo, p) in &cells {
                if p <= 0.0 {
                    continue;
                }
                let um = (mid - lo) / side;
                if (0.0..=1.0).contains(&um) && um >= i1.0 && um <= i1.1 {
                    acc += p * f.eval(((x - lo) / side).clamp(0.0, 1.0));
                }
            }
            acc
        };
        let tol = 1e-9;
        if at(xl) < factor * f.eval(xl) - tol || at(xr) < factor * f.eval(xr) - tol {
            return false;
        }
    }
    true
}

/// Projections of the mesh-1/M grid points, split into the diagonal
/// endpoints `W0` and the interior projections `W1`.
fn grid_projections(matrix: &ProbabilityMatrix, frame: &ProjectionFrame) -> (Vec<f64>, Vec<f64>) {
    let m = matrix.m();
    let mut w: Vec<f64> = Vec::new();
    for i in 0..=m {
        for j in 0..=m {
            w.push(frame.project_point(i as f64 / m as f64, j as f64 / m as f64));
        }
    }
    w.sort_by(|a, b| a.total_cmp(b));
    w.dedup();
    let (mut w0, mut w1) = (Vec::new(), Vec::new());
    for x in w {
        if x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12 {
            w0.push(x);
        } else {
            w1.push(x);
        }
    }
    (w0, w1)
}

/// Derives a certificate-candidate interval pair from a Condition-B witness.
///
/// Selects the largest dyadic `eta` (bisection, floor 1e-6) satisfying the
/// neighborhood inequality
///
/// `(eps/2) * min over B_{eta/M}(W1) of f  >  (M+1)^2 * sup over
/// B_{eta/M}(W0) of f`
///
/// and returns `I1 = [eta, 1-eta]`, `I2 = [eta/M, 1-eta/M]`, after
/// re-verifying the conclusion `F(f|I1) >= (1 + eps/2) f` on `I2` exactly;
/// `eta` is halved until the re-verification passes.
pub fn derive_intervals(
    f: &PiecewiseLinearFunction,
    eps: f64,
    matrix: &ProbabilityMatrix,
    frame: &ProjectionFrame,
) -> Result<IntervalPair> {
    const ETA_FLOOR: f64 = 1e-6;
    let m = matrix.m() as f64;
    let (w0, w1) = grid_projections(matrix, frame);

    let eq39 = |eta: f64| -> bool {
        let rad = eta / m;
        let min1 = w1
            .iter()
            .map(|&w| f.min_over((w - rad).max(0.0), (w + rad).min(1.0)))
            .fold(f64::INFINITY, f64::min);
        let sup0 = w0
            .iter()
            .map(|&w| f.max_over((w - rad).max(0.0), (w + rad).min(1.0)))
            .fold(0.0f64, f64::max);
        eps / 2.0 * min1 > (m + 1.0) * (m + 1.0) * sup0
    };

    if !eq39(ETA_FLOOR) {
        return Err(PerclabError::DerivationFailure(format!(
            "neighborhood inequality fails even at eta = {ETA_FLOOR}"
        )));
    }
    // monotone in eta: bisect for the largest passing value below 1/2
    let mut lo = ETA_FLOOR;
    let mut hi = 0.5;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if eq39(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut eta = lo;

    while eta >= ETA_FLOOR {
        let pair = IntervalPair::new((eta, 1.0 - eta), (eta / m, 1.0 - eta / m))?;
        if restricted_apply_dominates(matrix, frame, f, pair.i1, pair.i2, 1.0 + eps / 2.0) {
            return Ok(pair);
        }
        eta /= 2.0;
    }
    Err(PerclabError::DerivationFailure(
        "no eta above the floor passes the exact re-verification".into(),
    ))
}

/// Smallest `r` with `(1 + eps/2)^r >= 2 * max_{I1} f / min_{I2} f`.
pub fn derive_r(pair: &IntervalPair, f: &PiecewiseLinearFunction, eps: f64) -> usize {
    let target = 2.0 * f.max_over(pair.i1.0, pair.i1.1) / f.min_over(pair.i2.0, pair.i2.1);
    let base = 1.0 + eps / 2.0;
    let mut pow = 1.0;
    for r in 1..=64 {
        pow *= base;
        if pow >= target {
            return r;
        }
    }
    64
}
