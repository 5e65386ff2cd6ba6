//! Deterministic SVG rendering of a level set with its shadow.
//!
//! Output bytes are a pure function of the inputs: elements are emitted in
//! construction order with fixed-precision coordinates, so golden-file tests
//! can compare bytes.

use std::fmt::Write as _;

use crate::error::Result;
use crate::geometry::radial::{radial_project_level, Center, RadialKind};
use crate::geometry::{project_level, IntervalSet, ProjectionFrame};
use crate::tree::RealizationTree;

const SIZE: f64 = 512.0;
const SHADOW_OFFSET: f64 = 48.0;

/// What the shadow line shows.
pub enum ShadowSource {
    Oblique(ProjectionFrame),
    Radial(Center, RadialKind),
}

/// Renders the level-`n` squares with the projected shadow drawn on a screen
/// line below the square.
pub fn render_svg(tree: &RealizationTree, n: usize, source: &ShadowSource) -> Result<String> {
    let shadow: IntervalSet = match source {
        ShadowSource::Oblique(frame) => project_level(tree, n, frame)?,
        ShadowSource::Radial(center, kind) => radial_project_level(tree, n, center, *kind)?.set,
    };

    let height = SIZE + SHADOW_OFFSET + 16.0;
    let mut out = String::new();
    out.push_str("<!-- perclab-svg v1 -->\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SIZE} {height}\" width=\"{SIZE}\" height=\"{height}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>"
    );

    let side = (tree.matrix().m() as f64).powi(-(n as i32));
    let px = side * SIZE;
    tree.visit_level(n, |ix, iy| {
        let x = ix as f64 * px;
        // svg y grows downward
        let y = SIZE - (iy as f64 + 1.0) * px;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.4}\" y=\"{y:.4}\" width=\"{px:.4}\" height=\"{px:.4}\" fill=\"#1a6baf\" stroke=\"none\"/>"
        );
    })?;

    let sy = SIZE + SHADOW_OFFSET;
    let _ = writeln!(
        out,
        "<line x1=\"0\" y1=\"{sy}\" x2=\"{SIZE}\" y2=\"{sy}\" stroke=\"#ccc\" stroke-width=\"1\"/>"
    );
    for &(a, b) in shadow.intervals() {
        let _ = writeln!(
            out,
            "<line x1=\"{:.4}\" y1=\"{sy}\" x2=\"{:.4}\" y2=\"{sy}\" stroke=\"#d22\" stroke-width=\"6\"/>",
            a * SIZE,
            b * SIZE
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ProbabilityMatrix;
    use crate::tree::sample_tree;

    #[test]
    fn full_tree_has_all_squares_and_one_shadow() {
        let t = sample_tree(&ProbabilityMatrix::uniform(2, 1.0).unwrap(), 2, 0);
        let frame = ProjectionFrame::from_radians(1.1).unwrap();
        let svg = render_svg(&t, 2, &ShadowSource::Oblique(frame)).unwrap();
        // 16 squares plus the outline rect
        assert_eq!(svg.matches("<rect").count(), 17);
        // one full-length shadow segment plus the screen line
        assert_eq!(svg.matches("<line").count(), 2);
        assert!(svg.starts_with("<!-- perclab-svg v1 -->"));
    }

    #[test]
    fn empty_tree_clean() {
        let t = sample_tree(&ProbabilityMatrix::uniform(2, 0.0).unwrap(), 2, 0);
        let frame = ProjectionFrame::from_radians(2.0).unwrap();
        let svg = render_svg(&t, 2, &ShadowSource::Oblique(frame)).unwrap();
        assert_eq!(svg.matches("<rect").count(), 1);
        assert_eq!(svg.matches("<line").count(), 1);
    }

    #[test]
    fn byte_identical_reruns() {
        let t = sample_tree(&ProbabilityMatrix::uniform(2, 0.7).unwrap(), 4, 9);
        let c = Center::new(-10.0, -10.0).unwrap();
        let a = render_svg(&t, 4, &ShadowSource::Radial(c, RadialKind::Radial)).unwrap();
        let b = render_svg(&t, 4, &ShadowSource::Radial(c, RadialKind::Radial)).unwrap();
        assert_eq!(a, b);
    }
}
