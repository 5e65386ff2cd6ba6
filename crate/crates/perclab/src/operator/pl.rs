//! Exact piecewise-linear functions on the diagonal parameter `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{PerclabError, Result};
use crate::geometry::{Diagonal, ProjectionFrame};

/// Continuous piecewise-linear function given by node values at strictly
/// increasing breakpoints spanning `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() || breakpoints.len() < 2 {
            return Err(PerclabError::Domain(
                "piecewise-linear function needs matching breakpoint and value lists".into(),
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(PerclabError::Domain(
                "breakpoints must span [0, 1]".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PerclabError::Domain(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= 1.0 {
            return *self.values.last().unwrap();
        }
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(k) => self.values[k],
            Err(k) => {
                let (x0, x1) = (self.breakpoints[k - 1], self.breakpoints[k]);
                let (y0, y1) = (self.values[k - 1], self.values[k]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Exact minimum over `[lo, hi]`: attained at an endpoint or an interior
    /// node, since the function is linear between nodes.
    pub fn min_over(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.eval(lo).min(self.eval(hi));
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if *b > lo && *b < hi {
                m = m.min(*v);
            }
        }
        m
    }

    pub fn max_over(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.eval(lo).max(self.eval(hi));
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if *b > lo && *b < hi {
                m = m.max(*v);
            }
        }
        m
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Vanishes at both endpoints; required by the operator application to
    /// stay continuous and exact.
    pub fn vanishes_at_ends(&self) -> bool {
        self.values[0] == 0.0 && *self.values.last().unwrap() == 0.0
    }
}

/// Lower and upper admissible line-parameter bounds imposed by one coordinate
/// of the unit square, as linear functions of the diagonal parameter `u`.
struct LinearBound {
    a: f64,
    b: f64,
}

impl LinearBound {
    fn at(&self, u: f64) -> f64 {
        self.a + self.b * u
    }
}

/// Chord-length function of the square: `f(u) = |l^alpha(z(u)) ^ K|`, the
/// length of the intersection of the unit square with the full line through
/// the diagonal point at parameter `u` in direction `d(alpha)`.
///
/// Writing the admissible line-parameter range per coordinate, each of the
/// four bounds is linear in `u`, so the chord is piecewise linear with
/// breakpoints where active bounds exchange (at most two interior points),
/// and vanishes exactly at the corners `u = 0, 1`.
pub fn build_tent(frame: &ProjectionFrame) -> PiecewiseLinearFunction {
    let alpha = frame.alpha().radians();
    let (s, c) = alpha.sin_cos();
    let (dx, dy) = (c, -s);

    // diagonal point: zx = u; zy = u (main) or 1 - u (anti)
    let (zy_a, zy_b) = match frame.codomain() {
        Diagonal::Main => (0.0, 1.0),
        Diagonal::Anti => (1.0, -1.0),
    };

    // coordinate w in [0,1] with rate dw: parameter range is
    // [(0 - w)/dw, (1 - w)/dw] sorted by the sign of dw
    let bounds_of = |w_a: f64, w_b: f64, dw: f64| -> (LinearBound, LinearBound) {
        let first = LinearBound {
            a: -w_a / dw,
            b: -w_b / dw,
        };
        let second = LinearBound {
            a: (1.0 - w_a) / dw,
            b: -w_b / dw,
        };
        if dw > 0.0 {
            (first, second)
        } else {
            (second, first)
        }
    };
    let (lo_x, hi_x) = bounds_of(0.0, 1.0, dx);
    let (lo_y, hi_y) = bounds_of(zy_a, zy_b, dy);

    let chord = |u: f64| -> f64 {
        let hi = hi_x.at(u).min(hi_y.at(u));
        let lo = lo_x.at(u).max(lo_y.at(u));
        (hi - lo).max(0.0)
    };

    // candidate kinks: crossings of the upper pair and of the lower pair
    let crossing = |p: &LinearBound, q: &LinearBound| -> Option<f64> {
        let denom = p.b - q.b;
        if denom == 0.0 {
            return None;
        }
        let u = (q.a - p.a) / denom;
        (u > 0.0 && u < 1.0).then_some(u)
    };
    let mut nodes = vec![0.0, 1.0];
    nodes.extend(crossing(&hi_x, &hi_y));
    nodes.extend(crossing(&lo_x, &lo_y));
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();

    let values = nodes.iter().map(|&u| chord(u)).collect();
    PiecewiseLinearFunction::new(nodes, values).expect("tent nodes are valid")
}
