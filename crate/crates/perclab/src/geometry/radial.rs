//! Radial and co-radial reductions onto the diagonals.
//!
//! For a center `t` in diagonal position (both coordinates outside `[0,1]`)
//! the radial projection is reduced to the map sending `z` to the parameter
//! of the intersection of the ray `t -> z` with one diagonal, and the
//! co-radial projection to the map sending `z` to the parameter of the unique
//! diagonal point at distance `|z - t|` from `t`. For a lower-left center the
//! radial codomain is the anti diagonal and the co-radial codomain the main
//! diagonal; the other quadrants pair symmetrically.

use serde::{Deserialize, Serialize};

use crate::code::SquareCode;
use crate::error::{PerclabError, Result};
use crate::geometry::{Diagonal, IntervalSet, MERGE_EPS};
use crate::tree::RealizationTree;

/// Which corner region of the plane the center sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterSide {
    LowerLeft,
    LowerRight,
    UpperLeft,
    UpperRight,
}

/// Radial (visible angles) or co-radial (distances) reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialKind {
    Radial,
    Coradial,
}

/// A projection center in diagonal position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Center {
    x: f64,
    y: f64,
}

impl Center {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let outside = |v: f64| !(0.0..=1.0).contains(&v);
        if !outside(x) || !outside(y) {
            return Err(PerclabError::Domain(format!(
                "center ({x}, {y}) is not in diagonal position; both coordinates must be outside [0, 1]"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn coords(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn side(&self) -> CenterSide {
        match (self.x < 0.0, self.y < 0.0) {
            (true, true) => CenterSide::LowerLeft,
            (false, true) => CenterSide::LowerRight,
            (true, false) => CenterSide::UpperLeft,
            (false, false) => CenterSide::UpperRight,
        }
    }

    /// Codomain diagonal of the reduction of the given kind.
    pub fn codomain(&self, kind: RadialKind) -> Diagonal {
        let transversal = matches!(self.side(), CenterSide::LowerLeft | CenterSide::UpperRight);
        match (kind, transversal) {
            // rays from a lower-left center cross the anti diagonal
            (RadialKind::Radial, true) => Diagonal::Anti,
            (RadialKind::Radial, false) => Diagonal::Main,
            // circles around a lower-left center cross the main diagonal
            (RadialKind::Coradial, true) => Diagonal::Main,
            (RadialKind::Coradial, false) => Diagonal::Anti,
        }
    }
}

/// Result of mapping a point: the diagonal parameter, flagged when it falls
/// outside `[0, 1]`. Out-of-range values are reported, never silently
/// clamped, so no spurious interval coverage can be fabricated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectedParam {
    InRange(f64),
    OutOfRange(f64),
}

impl ProjectedParam {
    pub fn value(&self) -> f64 {
        match *self {
            ProjectedParam::InRange(u) | ProjectedParam::OutOfRange(u) => u,
        }
    }

    pub fn in_range(&self) -> bool {
        matches!(self, ProjectedParam::InRange(_))
    }
}

fn classify(u: f64) -> ProjectedParam {
    if (0.0..=1.0).contains(&u) {
        ProjectedParam::InRange(u)
    } else {
        ProjectedParam::OutOfRange(u)
    }
}

/// Parameter of the intersection of the ray `t -> z` with the radial
/// codomain diagonal.
pub fn radial_point(t: &Center, zx: f64, zy: f64) -> ProjectedParam {
    let (tx, ty) = t.coords();
    let dx = zx - tx;
    let dy = zy - ty;
    let u = match t.codomain(RadialKind::Radial) {
        Diagonal::Anti => {
            // x + y = 1 along the ray
            let denom = dx + dy;
            debug_assert!(denom.abs() > 0.0, "ray parallel to anti diagonal");
            tx + dx * (1.0 - tx - ty) / denom
        }
        Diagonal::Main => {
            // x = y along the ray
            let denom = dx - dy;
            debug_assert!(denom.abs() > 0.0, "ray parallel to main diagonal");
            tx + dx * (ty - tx) / denom
        }
    };
    classify(u)
}

/// Parameter of the codomain-diagonal point equidistant from `t` with `z`.
/// The distance along the diagonal is strictly monotone on the side facing
/// the center, so the quadratic has one admissible root.
pub fn coradial_point(t: &Center, zx: f64, zy: f64) -> ProjectedParam {
    let (tx, ty) = t.coords();
    let d2 = (zx - tx) * (zx - tx) + (zy - ty) * (zy - ty);
    // write the diagonal point in the form (u - e1, u - e2) relative to t
    let (e1, e2) = match t.codomain(RadialKind::Coradial) {
        Diagonal::Main => (tx, ty),
        Diagonal::Anti => (tx, 1.0 - ty),
    };
    // (u - e1)^2 + (u - e2)^2 = d^2
    let sum = e1 + e2;
    let disc = 2.0 * d2 - (e1 - e2) * (e1 - e2);
    if disc < 0.0 {
        // circle does not reach the diagonal line; report closest approach
        return ProjectedParam::OutOfRange(sum / 2.0);
    }
    let sq = disc.sqrt();
    // the vertex of the distance parabola sits at u = sum/2, outside [0, 1]
    // on the center's side; pick the root on the monotone branch over [0, 1]
    let u = if sum / 2.0 < 0.5 {
        (sum + sq) / 2.0
    } else {
        (sum - sq) / 2.0
    };
    classify(u)
}

fn point_of(t: &Center, kind: RadialKind, zx: f64, zy: f64) -> ProjectedParam {
    match kind {
        RadialKind::Radial => radial_point(t, zx, zy),
        RadialKind::Coradial => coradial_point(t, zx, zy),
    }
}

/// Exact image interval of a square. The parameter is monotone in each
/// coordinate of `z` for centers in diagonal position, so the extremes are
/// attained at corners.
pub fn square_image(t: &Center, kind: RadialKind, code: &SquareCode) -> (ProjectedParam, ProjectedParam) {
    let ((cx, cy), side) = code.geometry();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut all_in = true;
    for &(x, y) in &[
        (cx, cy),
        (cx + side, cy),
        (cx, cy + side),
        (cx + side, cy + side),
    ] {
        let p = point_of(t, kind, x, y);
        all_in &= p.in_range();
        lo = lo.min(p.value());
        hi = hi.max(p.value());
    }
    if all_in {
        (ProjectedParam::InRange(lo), ProjectedParam::InRange(hi))
    } else {
        (classify(lo), classify(hi))
    }
}

/// Shadow of the level-n squares under the reduction, with the number of
/// squares whose image left `[0, 1]` reported alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialShadow {
    pub set: IntervalSet,
    pub out_of_range_squares: usize,
}

pub fn radial_project_level(
    tree: &RealizationTree,
    n: usize,
    t: &Center,
    kind: RadialKind,
) -> Result<RadialShadow> {
    let m = tree.matrix().m();
    let mut raw = Vec::with_capacity(tree.level_count(n)?);
    let mut out_of_range = 0usize;
    tree.visit_level(n, |ix, iy| {
        let code = SquareCode::from_packed(m, n, ix, iy);
        let (lo, hi) = square_image(t, kind, &code);
        if !(lo.in_range() && hi.in_range()) {
            out_of_range += 1;
        }
        raw.push((lo.value().max(0.0), hi.value().min(1.0)));
    })?;
    Ok(RadialShadow {
        set: IntervalSet::from_intervals(raw, MERGE_EPS),
        out_of_range_squares: out_of_range,
    })
}

/// Pulls the center back through the similarity of `code`:
/// `phi_code^-1(t) = M^n (t - corner)`. Errors when `t` lies inside the
/// square; the result is validated as a center again, which checks that the
/// pulled-back point is still in diagonal position.
pub fn normalize_center(t: &Center, code: &SquareCode) -> Result<Center> {
    let ((cx, cy), side) = code.geometry();
    let (tx, ty) = t.coords();
    if (cx..=cx + side).contains(&tx) && (cy..=cy + side).contains(&ty) {
        return Err(PerclabError::Domain(
            "center lies inside the square being normalized".into(),
        ));
    }
    let scale = 1.0 / side;
    Center::new(scale * (tx - cx), scale * (ty - cy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ProjectionFrame;
    use crate::matrix::ProbabilityMatrix;
    use crate::tree::sample_tree;

    #[test]
    fn center_validation() {
        assert!(Center::new(-10.0, -10.0).is_ok());
        assert!(Center::new(-1.0, 2.0).is_ok());
        assert!(Center::new(0.5, -3.0).is_err());
        assert!(Center::new(-2.0, 1.0).is_err());
    }

    #[test]
    fn radial_point_examples() {
        let t = Center::new(-10.0, -10.0).unwrap();
        // z on the codomain diagonal is fixed
        match radial_point(&t, 0.5, 0.5) {
            ProjectedParam::InRange(u) => assert!((u - 0.5).abs() < 1e-12),
            p => panic!("{p:?}"),
        }
        // line-diagonal intersection arithmetic: u = -10 + 10.2 * 21/20.8
        match radial_point(&t, 0.2, 0.6) {
            ProjectedParam::InRange(u) => {
                assert!((u - (10.2 * (21.0 / 20.8) - 10.0)).abs() < 1e-12);
                assert!((u - 0.2980769230769).abs() < 1e-10);
            }
            p => panic!("{p:?}"),
        }
        // corner rays hit the diagonal endpoints
        assert!((radial_point(&t, 0.0, 1.0).value() - 0.0).abs() < 1e-12);
        assert!((radial_point(&t, 1.0, 0.0).value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coradial_fixes_diagonal_points() {
        for d in [2.0, 10.0, 100.0] {
            let t = Center::new(-d, -d).unwrap();
            for u0 in [0.0, 0.25, 0.7, 1.0] {
                let p = coradial_point(&t, u0, u0);
                assert!(p.in_range());
                assert!((p.value() - u0).abs() < 1e-9, "d={d} u0={u0}");
            }
        }
    }

    #[test]
    fn codomain_pairing() {
        let ll = Center::new(-3.0, -4.0).unwrap();
        assert_eq!(ll.codomain(RadialKind::Radial), Diagonal::Anti);
        assert_eq!(ll.codomain(RadialKind::Coradial), Diagonal::Main);
        let ul = Center::new(-3.0, 4.0).unwrap();
        assert_eq!(ul.codomain(RadialKind::Radial), Diagonal::Main);
        assert_eq!(ul.codomain(RadialKind::Coradial), Diagonal::Anti);
    }

    #[test]
    fn quadrant_points_stay_in_range() {
        let centers = [
            Center::new(-5.0, -7.0).unwrap(),
            Center::new(6.0, 8.0).unwrap(),
            Center::new(-5.0, 7.0).unwrap(),
            Center::new(6.0, -8.0).unwrap(),
        ];
        for t in centers {
            for kind in [RadialKind::Radial, RadialKind::Coradial] {
                for i in 0..=10 {
                    for j in 0..=10 {
                        let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                        let p = point_of(&t, kind, x, y);
                        assert!(
                            p.in_range(),
                            "t={t:?} kind={kind:?} z=({x},{y}) -> {p:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn square_image_extremes_at_corners() {
        let t = Center::new(-10.0, -10.0).unwrap();
        let code = SquareCode::from_digits(2, &[1, 0], &[0, 1]).unwrap();
        for kind in [RadialKind::Radial, RadialKind::Coradial] {
            let (lo, hi) = square_image(&t, kind, &code);
            let ((cx, cy), side) = code.geometry();
            // interior samples stay inside the corner interval
            for i in 1..7 {
                for j in 1..7 {
                    let x = cx + side * i as f64 / 7.0;
                    let y = cy + side * j as f64 / 7.0;
                    let u = point_of(&t, kind, x, y).value();
                    assert!(u >= lo.value() - 1e-12 && u <= hi.value() + 1e-12);
                }
            }
            // center contained
            let uc = point_of(&t, kind, cx + side / 2.0, cy + side / 2.0).value();
            assert!(uc > lo.value() && uc < hi.value());
        }
    }

    #[test]
    fn full_tree_radial_shadow_is_unit_interval() {
        let full = sample_tree(&ProbabilityMatrix::uniform(2, 1.0).unwrap(), 3, 0);
        let t = Center::new(-10.0, -10.0).unwrap();
        let s = radial_project_level(&full, 3, &t, RadialKind::Radial).unwrap();
        assert_eq!(s.out_of_range_squares, 0);
        let (lo, hi) = s.set.intervals()[0];
        assert!(lo.abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
        assert_eq!(s.set.intervals().len(), 1);

        let dead = sample_tree(&ProbabilityMatrix::uniform(2, 0.0).unwrap(), 2, 0);
        let s = radial_project_level(&dead, 1, &t, RadialKind::Radial).unwrap();
        assert!(s.set.is_empty());
    }

    #[test]
    fn normalize_center_examples() {
        let t = Center::new(-1.0, -1.0).unwrap();
        let c00 = SquareCode::from_digits(2, &[0], &[0]).unwrap();
        let n = normalize_center(&t, &c00).unwrap();
        assert_eq!(n.coords(), (-2.0, -2.0));

        let c11 = SquareCode::from_digits(2, &[1], &[1]).unwrap();
        let n = normalize_center(&t, &c11).unwrap();
        assert_eq!(n.coords(), (-3.0, -3.0));

        let root = SquareCode::root(2);
        let n = normalize_center(&t, &root).unwrap();
        assert_eq!(n.coords(), (-1.0, -1.0));
    }

    #[test]
    fn normalize_center_preserves_diagonal_position() {
        // pulling back through any subsquare keeps both coordinates outside
        // [0, 1]: (t - c)/side with t outside [0,1] and c + side <= 1 stays
        // outside
        let centers = [
            Center::new(1.5, 1.5).unwrap(),
            Center::new(1.2, -0.5).unwrap(),
            Center::new(-0.01, 7.0).unwrap(),
        ];
        for t in centers {
            for m in [2usize, 3] {
                for (di, dj) in [(0u8, 0u8), (1, 1), (1, 0)] {
                    let code = SquareCode::from_digits(m, &[di, dj], &[dj, di]).unwrap();
                    let n = normalize_center(&t, &code).unwrap();
                    assert_eq!(n.side(), t.side());
                }
            }
        }
        let t = Center::new(1.5, 1.5).unwrap();
        let c = SquareCode::from_digits(2, &[1], &[1]).unwrap();
        assert_eq!(normalize_center(&t, &c).unwrap().coords(), (2.0, 2.0));
    }

    #[test]
    fn radial_to_linear_limit() {
        // for t = (-d, -d) the radial image of a fixed square converges to
        // its oblique image at the limiting direction 3pi/4; the square is
        // chosen off the anti diagonal so the discrepancy is genuinely
        // positive at finite d
        let code = SquareCode::from_digits(2, &[0, 0], &[0, 1]).unwrap();
        let frame = ProjectionFrame::from_radians(3.0 * std::f64::consts::FRAC_PI_4).unwrap();
        let (olo, ohi) = frame.project_square(&code);
        let mut last = f64::INFINITY;
        for d in [1e2, 1e4] {
            let t = Center::new(-d, -d).unwrap();
            let (lo, hi) = square_image(&t, RadialKind::Radial, &code);
            let disc = (lo.value() - olo).abs().max((hi.value() - ohi).abs());
            assert!(disc < last, "discrepancy should shrink with d");
            last = disc;
        }
        assert!(last < 1e-4);
    }
}
