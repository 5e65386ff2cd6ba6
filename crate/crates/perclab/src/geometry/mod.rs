//! Exact geometry of the oblique, radial and co-radial projections onto the
//! diagonals of the unit square.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * The projection line through a point has direction `d(alpha) =
//!   (cos alpha, -sin alpha)`. For `alpha` in `(0, pi/2)` the lines have
//!   negative slope and the codomain is the main diagonal `(0,0)-(1,1)`; for
//!   `alpha` in `(pi/2, pi)` they have positive slope and the codomain is the
//!   anti diagonal `(0,1)-(1,0)`.
//! * Either diagonal is parametrized by the first coordinate `u` of its
//!   points, so the main diagonal point at `u` is `(u, u)` and the anti
//!   diagonal point is `(u, 1-u)`. The projection of the whole square is
//!   exactly `[0, 1]` in this parameter for every admissible angle.

pub mod family;
pub mod interval_set;
pub mod radial;

pub use family::{verify_almost_linear, AlmostLinearFamily, CenterBox, FamilyKind, FamilyReport};
pub use interval_set::{IntervalSet, MERGE_EPS};
pub use radial::{coradial_point, normalize_center, radial_point, radial_project_level, Center, CenterSide, ProjectedParam, RadialKind};

use serde::{Deserialize, Serialize};

use crate::code::SquareCode;
use crate::error::{PerclabError, Result};
use crate::tree::RealizationTree;

/// A direction angle in `(0, pi)`, with the two axis-parallel directions
/// excluded from the oblique-projection domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Result<Self> {
        if !(radians > 0.0 && radians < std::f64::consts::PI) {
            return Err(PerclabError::Domain(format!(
                "angle {radians} outside (0, pi)"
            )));
        }
        Ok(Self(radians))
    }

    #[inline]
    pub fn radians(&self) -> f64 {
        self.0
    }

    /// Membership in the oblique domain: `(0, pi/2) U (pi/2, pi)`.
    pub fn in_oblique_domain(&self) -> bool {
        self.0 != std::f64::consts::FRAC_PI_2
    }

    fn steep(&self) -> bool {
        self.0 > std::f64::consts::FRAC_PI_2
    }
}

/// Which diagonal carries the projection parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagonal {
    /// `(0,0)-(1,1)`; point at parameter `u` is `(u, u)`.
    Main,
    /// `(0,1)-(1,0)`; point at parameter `u` is `(u, 1-u)`.
    Anti,
}

impl Diagonal {
    pub fn point_at(&self, u: f64) -> (f64, f64) {
        match self {
            Diagonal::Main => (u, u),
            Diagonal::Anti => (u, 1.0 - u),
        }
    }
}

/// Oblique projection in a fixed direction onto the matching diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFrame {
    alpha: Angle,
    codomain: Diagonal,
    /// coefficients of the affine parameter map u = ax*x + ay*y + a0
    ax: f64,
    ay: f64,
    a0: f64,
}

impl ProjectionFrame {
    /// Builds the frame for an oblique angle. Fails on the axis directions;
    /// those are handled by [`axis_projection_cover`].
    pub fn new(alpha: Angle) -> Result<Self> {
        if !alpha.in_oblique_domain() {
            return Err(PerclabError::Domain(
                "alpha = pi/2 is an axis projection, not an oblique one".into(),
            ));
        }
        let (s, c) = alpha.radians().sin_cos();
        if alpha.steep() {
            // u = x + c (1 - x - y) / (c - s), affine with positive x and
            // (1-y) coefficients summing to 1
            let beta = c / (c - s);
            Ok(Self {
                alpha,
                codomain: Diagonal::Anti,
                ax: 1.0 - beta,
                ay: -beta,
                a0: beta,
            })
        } else {
            // u = (x s + y c) / (s + c)
            let d = s + c;
            Ok(Self {
                alpha,
                codomain: Diagonal::Main,
                ax: s / d,
                ay: c / d,
                a0: 0.0,
            })
        }
    }

    pub fn from_radians(alpha: f64) -> Result<Self> {
        Self::new(Angle::new(alpha)?)
    }

    #[inline]
    pub fn alpha(&self) -> Angle {
        self.alpha
    }

    pub fn codomain(&self) -> Diagonal {
        self.codomain
    }

    /// Parameter of the intersection of the line through `(x, y)` in
    /// direction `d(alpha)` with the codomain diagonal.
    #[inline]
    pub fn project_point(&self, x: f64, y: f64) -> f64 {
        self.ax * x + self.ay * y + self.a0
    }

    /// Exact image interval of a level-n square: both parameter coefficients
    /// have constant sign, so the extremes sit at opposite corners and the
    /// width is exactly `M^-n`.
    pub fn project_square(&self, code: &SquareCode) -> (f64, f64) {
        let ((cx, cy), side) = code.geometry();
        let lo = self.square_lo(cx, cy, side);
        (lo, lo + side)
    }

    #[inline]
    pub(crate) fn square_lo(&self, cx: f64, cy: f64, side: f64) -> f64 {
        match self.codomain {
            // ax, ay > 0: min at the lower-left corner
            Diagonal::Main => self.project_point(cx, cy),
            // ax > 0 > ay: min at the upper-left corner
            Diagonal::Anti => self.project_point(cx, cy + side),
        }
    }

    /// Image of the sub-interval `[a, b]` of the diagonal parameter under
    /// `Pi_alpha . phi_code`; the composition is `u -> side * u + lo`.
    pub fn project_subinterval(&self, code: &SquareCode, a: f64, b: f64) -> (f64, f64) {
        let ((cx, cy), side) = code.geometry();
        let lo = self.square_lo(cx, cy, side);
        (lo + a * side, lo + b * side)
    }
}

/// Shadow of the level-n squares: the normalized union of their image
/// intervals. Empty when the level is empty.
pub fn project_level(tree: &RealizationTree, n: usize, frame: &ProjectionFrame) -> Result<IntervalSet> {
    let m = tree.matrix().m();
    let side = (m as f64).powi(-(n as i32));
    let mut raw = Vec::with_capacity(tree.level_count(n)?);
    tree.visit_level(n, |ix, iy| {
        let lo = frame.square_lo(ix as f64 * side, iy as f64 * side, side);
        raw.push((lo, lo + side));
    })?;
    Ok(IntervalSet::from_intervals(raw, MERGE_EPS))
}

/// Which axis-parallel family of lines is used for the degenerate directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// horizontal lines; shadow lives on the y axis
    Horizontal,
    /// vertical lines; shadow lives on the x axis
    Vertical,
}

/// Shadow of the level-n squares under an axis projection: the union of
/// M-adic intervals below (or beside) retained squares. Exact dyadic
/// endpoints, no merge tolerance needed.
pub fn axis_projection_cover(tree: &RealizationTree, n: usize, axis: Axis) -> Result<IntervalSet> {
    let m = tree.matrix().m();
    let side = (m as f64).powi(-(n as i32));
    let mut raw = Vec::with_capacity(tree.level_count(n)?);
    tree.visit_level(n, |ix, iy| {
        let k = match axis {
            Axis::Vertical => ix,
            Axis::Horizontal => iy,
        };
        raw.push((k as f64 * side, (k as f64 + 1.0) * side));
    })?;
    Ok(IntervalSet::from_intervals(raw, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ProbabilityMatrix;
    use crate::tree::sample_tree;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn frame(alpha: f64) -> ProjectionFrame {
        ProjectionFrame::from_radians(alpha).unwrap()
    }

    #[test]
    fn project_point_closed_forms() {
        let f = frame(FRAC_PI_4);
        // point on the main diagonal is fixed
        assert!((f.project_point(0.3, 0.3) - 0.3).abs() < 1e-15);
        // (x + y)/2 at pi/4
        assert!((f.project_point(0.2, 0.6) - 0.4).abs() < 1e-15);

        let g = frame(3.0 * FRAC_PI_4);
        // (x - y + 1)/2 at 3pi/4
        assert!((g.project_point(0.2, 0.6) - 0.3).abs() < 1e-15);
        assert_eq!(g.codomain(), Diagonal::Anti);
    }

    #[test]
    fn axis_angle_rejected() {
        assert!(ProjectionFrame::from_radians(FRAC_PI_2).is_err());
        assert!(Angle::new(0.0).is_err());
        assert!(Angle::new(PI).is_err());
    }

    #[test]
    fn whole_square_projects_onto_unit_interval() {
        for &alpha in &[0.1, 0.5, FRAC_PI_4, 1.5, 1.65, 2.5, 3.0] {
            let f = frame(alpha);
            let root = SquareCode::root(2);
            let (lo, hi) = f.project_square(&root);
            assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12, "alpha {alpha}");
            // corners stay inside [0, 1]
            for &(x, y) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
                let u = f.project_point(x, y);
                assert!((-1e-12..=1.0 + 1e-12).contains(&u));
            }
        }
    }

    #[test]
    fn square_image_example_and_width() {
        let f = frame(FRAC_PI_4);
        let c = SquareCode::from_digits(2, &[0], &[0]).unwrap();
        let (lo, hi) = f.project_square(&c);
        assert!((lo - 0.0).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);

        // width exactly M^-n regardless of code and angle
        for &alpha in &[0.3, 1.2, 1.9, 2.9] {
            let f = frame(alpha);
            for m in [2usize, 3] {
                for level in 1..4 {
                    let code = SquareCode::from_digits(
                        m,
                        &vec![1u8; level],
                        &vec![(m - 1) as u8; level],
                    )
                    .unwrap();
                    let (lo, hi) = f.project_square(&code);
                    let width = hi - lo;
                    let expect = (m as f64).powi(-(level as i32));
                    assert!((width - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn project_level_full_and_empty() {
        let full = sample_tree(&ProbabilityMatrix::uniform(2, 1.0).unwrap(), 3, 0);
        let f = frame(1.1);
        let s = project_level(&full, 3, &f).unwrap();
        assert_eq!(s.intervals().len(), 1);
        let (lo, hi) = s.intervals()[0];
        assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        let dead = sample_tree(&ProbabilityMatrix::uniform(2, 0.0).unwrap(), 2, 0);
        assert!(project_level(&dead, 1, &f).unwrap().is_empty());
    }

    #[test]
    fn shadows_shrink_with_level() {
        let m = ProbabilityMatrix::uniform(2, 0.8).unwrap();
        let f = frame(2.0);
        for seed in 0..8 {
            let t = sample_tree(&m, 5, seed);
            for n in 0..5 {
                let outer = project_level(&t, n, &f).unwrap();
                let inner = project_level(&t, n + 1, &f).unwrap();
                assert!(outer.contains_set(&inner, 1e-9), "seed {seed} level {n}");
            }
        }
    }

    #[test]
    fn axis_cover_full_tree() {
        let full = sample_tree(&ProbabilityMatrix::uniform(2, 1.0).unwrap(), 2, 0);
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let s = axis_projection_cover(&full, 2, axis).unwrap();
            assert_eq!(s.intervals(), &[(0.0, 1.0)]);
        }
    }
}
