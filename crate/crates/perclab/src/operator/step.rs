//! Step functions built by sweeping weighted interval endpoints, and the
//! exact pushforward of interval indicators.

use serde::{Deserialize, Serialize};

use crate::error::{PerclabError, Result};
use crate::geometry::ProjectionFrame;
use crate::matrix::ProbabilityMatrix;

/// Piecewise-constant function with the conservative breakpoint convention:
/// the value at a breakpoint is the minimum of the two adjacent cell values
/// (cells outside the breakpoint span count as zero). This keeps every
/// certificate sound against boundary-membership ambiguity of closed images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    cells: Vec<f64>,
}

impl StepFunction {
    /// Accumulates closed weighted intervals `[lo, hi]` with weight `w` into
    /// cells. Events are processed in one fixed sorted order, so the result
    /// is bit-stable regardless of input order or chunking.
    pub fn from_weighted_intervals(intervals: &[(f64, f64, f64)]) -> Self {
        // (position, signed weight to the right of it)
        let mut events: Vec<(f64, f64)> = Vec::with_capacity(intervals.len() * 2);
        for &(lo, hi, w) in intervals {
            debug_assert!(lo <= hi);
            events.push((lo, w));
            events.push((hi, -w));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

        // the running sum after all events at a position is the cell value
        // to the right of that position
        let mut breakpoints = Vec::new();
        let mut cells = Vec::new();
        let mut run = 0.0;
        let mut i = 0;
        while i < events.len() {
            let pos = events[i].0;
            while i < events.len() && events[i].0 == pos {
                run += events[i].1;
                i += 1;
            }
            breakpoints.push(pos);
            cells.push(run);
        }
        // beyond the last breakpoint the function is zero; drop the residue
        cells.pop();
        Self { breakpoints, cells }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cell_values(&self) -> &[f64] {
        &self.cells
    }

    fn cell_or_zero(&self, k: isize) -> f64 {
        if k < 0 || k as usize >= self.cells.len() {
            0.0
        } else {
            self.cells[k as usize]
        }
    }

    /// Conservative evaluation: cell value inside a cell, minimum of adjacent
    /// cells at a breakpoint, zero outside the span.
    pub fn eval(&self, x: f64) -> f64 {
        if self.breakpoints.is_empty() {
            return 0.0;
        }
        match self.breakpoints.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(k) => self
                .cell_or_zero(k as isize - 1)
                .min(self.cell_or_zero(k as isize)),
            Err(k) => {
                if k == 0 || k == self.breakpoints.len() {
                    0.0
                } else {
                    self.cells[k - 1]
                }
            }
        }
    }

    /// Exact minimum of the conservative evaluation over `[lo, hi]`.
    pub fn min_over(&self, lo: f64, hi: f64) -> f64 {
        if self.breakpoints.is_empty() {
            return 0.0;
        }
        let mut m = f64::INFINITY;
        let first = *self.breakpoints.first().unwrap();
        let last = *self.breakpoints.last().unwrap();
        if lo < first || hi > last {
            m = 0.0;
        }
        for k in 0..self.cells.len() {
            if self.breakpoints[k] < hi && self.breakpoints[k + 1] > lo {
                m = m.min(self.cells[k]);
            }
        }
        for &b in &self.breakpoints {
            if b >= lo && b <= hi {
                m = m.min(self.eval(b));
            }
        }
        if m == f64::INFINITY {
            // [lo, hi] sits strictly inside one cell with no breakpoint
            m = self.eval(0.5 * (lo + hi));
        }
        m
    }

    pub fn integral(&self) -> f64 {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, v)| v * (self.breakpoints[k + 1] - self.breakpoints[k]))
            .sum()
    }
}

/// Exact pushforward of the indicator of `i1` through `r` construction
/// levels:
///
/// `F^r 1_I1 (x) = sum over all level-r codes of p_code * [x in image(I1)]`,
///
/// computed by enumerating the M^(2r) codes (zero-weight branches pruned),
/// collecting the two weighted endpoints per code and sweeping. Exact up to
/// floating-point addition.
pub fn pushforward_indicator(
    matrix: &ProbabilityMatrix,
    frame: &ProjectionFrame,
    i1: (f64, f64),
    r: usize,
    budget: u64,
) -> Result<StepFunction> {
    let m = matrix.m() as u64;
    let needed = m.pow(2 * r as u32);
    if needed > budget {
        return Err(PerclabError::ResourceBudget {
            needed,
            cap: budget,
        });
    }
    let mut intervals: Vec<(f64, f64, f64)> = Vec::new();
    let side = (matrix.m() as f64).powi(-(r as i32));
    // depth-first enumeration in lexicographic digit order
    let mut stack: Vec<(usize, u64, u64, f64)> = vec![(0, 0, 0, 1.0)];
    while let Some((level, ix, iy, w)) = stack.pop() {
        if level == r {
            let lo = frame.square_lo(ix as f64 * side, iy as f64 * side, side);
            intervals.push((lo + i1.0 * side, lo + i1.1 * side, w));
            continue;
        }
        for di in 0..matrix.m() {
            for dj in 0..matrix.m() {
                let p = matrix.prob(di, dj);
                if p <= 0.0 {
                    continue;
                }
                stack.push((
                    level + 1,
                    ix * m + di as u64,
                    iy * m + dj as u64,
                    w * p,
                ));
            }
        }
    }
    Ok(StepFunction::from_weighted_intervals(&intervals))
}

/// Independent brute-force oracle for the pushforward value at one point:
/// re-enumerates the codes and sums weights of those whose closed image
/// interval contains `x`. Used to validate the sweep, never by it.
pub fn recount_at(
    matrix: &ProbabilityMatrix,
    frame: &ProjectionFrame,
    i1: (f64, f64),
    r: usize,
    x: f64,
) -> f64 {
    fn descend(
        matrix: &ProbabilityMatrix,
        frame: &ProjectionFrame,
        i1: (f64, f64),
        r: usize,
        x: f64,
        level: usize,
        ix: u64,
        iy: u64,
        w: f64,
    ) -> f64 {
        if level == r {
            let side = (matrix.m() as f64).powi(-(r as i32));
            let lo = frame.square_lo(ix as f64 * side, iy as f64 * side, side);
            let (a, b) = (lo + i1.0 * side, lo + i1.1 * side);
            return if a <= x && x <= b { w } else { 0.0 };
        }
        let m = matrix.m() as u64;
        let mut acc = 0.0;
        for di in 0..matrix.m() {
            for dj in 0..matrix.m() {
                let p = matrix.prob(di, dj);
                if p <= 0.0 {
                    continue;
                }
                acc += descend(
                    matrix,
                    frame,
                    i1,
                    r,
                    x,
                    level + 1,
                    ix * m + di as u64,
                    iy * m + dj as u64,
                    w * p,
                );
            }
        }
        acc
    }
    descend(matrix, frame, i1, r, x, 0, 0, 0, 1.0)
}
