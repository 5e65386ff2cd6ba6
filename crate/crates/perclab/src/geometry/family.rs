//! Verification of the almost-linear-family conditions for parametrized
//! projection families.
//!
//! A family `S_t(x) = Pi_{alpha_t(x)}(x)` qualifies when (i) the direction
//! field stays inside a certified angle range, (ii) it is Lipschitz in `x`
//! with constant at most `gap/3`, and (iii) the parameter set tiles into
//! pieces whose joint angle oscillation over a level-n square decays like
//! `gap * M^-n / 3`, with tile counts growing at most exponentially.
//!
//! The checks here are numeric witnesses, not proofs: ranges and gradients
//! are evaluated on grids (exactly, where a closed form exists) and recorded
//! in the report next to each pass/fail flag.

use serde::{Deserialize, Serialize};

use crate::geometry::radial::{coradial_point, Center, RadialKind};

/// Axis-aligned box of centers; a degenerate box is a single center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterBox {
    pub lo: (f64, f64),
    pub hi: (f64, f64),
}

impl CenterBox {
    pub fn point(t: (f64, f64)) -> Self {
        Self { lo: t, hi: t }
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            self.lo,
            (self.hi.0, self.lo.1),
            (self.lo.0, self.hi.1),
            self.hi,
        ]
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.lo.0 + self.hi.0) / 2.0, (self.lo.1 + self.hi.1) / 2.0)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Minimum Euclidean distance to the unit square.
    pub fn distance_to_unit_square(&self) -> f64 {
        let gap = |lo: f64, hi: f64| -> f64 {
            if hi < 0.0 {
                -hi
            } else if lo > 1.0 {
                lo - 1.0
            } else {
                0.0
            }
        };
        let gx = gap(self.lo.0, self.hi.0);
        let gy = gap(self.lo.1, self.hi.1);
        (gx * gx + gy * gy).sqrt()
    }

    /// Every corner is a valid diagonal-position center.
    pub fn all_diagonal_position(&self) -> bool {
        self.corners().iter().all(|&(x, y)| Center::new(x, y).is_ok())
    }
}

/// Geometric rule generating the direction field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// constant direction: the ordinary oblique projection
    Constant,
    /// ray direction from the center through the point
    Radial,
    /// chord direction toward the equidistant diagonal point
    Coradial,
}

/// A parametrized family of projections together with the certificate data
/// it is checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostLinearFamily {
    pub kind: FamilyKind,
    /// parameter set T; ignored (single dummy tile) for `Constant`
    pub centers: CenterBox,
    /// constant angle for `Constant`
    pub constant_alpha: Option<f64>,
    /// certified angle range J
    pub cert_range: (f64, f64),
    /// Hausdorff gap `delta` between the certificate's interval pair
    pub gap: f64,
}

impl AlmostLinearFamily {
    /// Direction field: the angle in `(0, pi)` of the projection line at `x`
    /// for parameter `t`. For the radial rule the line is the ray `t -> x`;
    /// for the co-radial rule it is the chord from `x` to its image point
    /// (degenerating to the circle tangent on the diagonal itself).
    pub fn angle_at(&self, t: (f64, f64), x: (f64, f64)) -> f64 {
        match self.kind {
            FamilyKind::Constant => self.constant_alpha.expect("constant family carries alpha"),
            FamilyKind::Radial => line_angle(x.0 - t.0, x.1 - t.1),
            FamilyKind::Coradial => {
                let c = Center::new(t.0, t.1).expect("co-radial centers are diagonal position");
                let p = coradial_point(&c, x.0, x.1);
                let target = c.codomain(RadialKind::Coradial).point_at(p.value());
                // x and its image lie on one circle around t; the chord
                // direction is perpendicular to the bisector radius, which is
                // stable even where the chord itself degenerates on the
                // diagonal. Both view angles live in one quadrant cone for a
                // diagonal-position center, so averaging them is cut-free.
                let theta_x = (x.1 - t.1).atan2(x.0 - t.0);
                let theta_p = (target.1 - t.1).atan2(target.0 - t.0);
                let phi = 0.5 * (theta_x + theta_p) + std::f64::consts::FRAC_PI_2;
                line_angle(phi.cos(), phi.sin())
            }
        }
    }
}

/// Angle in `(0, pi)` whose direction `(cos a, -sin a)` spans the same line
/// as `(vx, vy)`.
fn line_angle(vx: f64, vy: f64) -> f64 {
    // normalize to the representative with negative y component
    let (wx, wy) = if vy > 0.0 { (-vx, -vy) } else { (vx, vy) };
    (-wy).atan2(wx)
}

/// Outcome of the three-condition verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    /// observed direction range over K x T, widened by the grid slack
    pub angle_min: f64,
    pub angle_max: f64,
    pub condition_i: bool,
    /// numeric Lipschitz bound of x -> alpha_t(x); exact 1/dist for radial
    pub lipschitz_bound: f64,
    pub condition_ii: bool,
    /// tile counts per level 0..=n_max, when condition iii is satisfiable
    pub tiles_per_level: Vec<u64>,
    /// count ratios between consecutive levels (bounded = exponential growth)
    pub growth_ratios: Vec<f64>,
    pub condition_iii: bool,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.condition_i && self.condition_ii && self.condition_iii
    }
}

const GRID: usize = 17;

fn sample_points() -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(GRID * GRID);
    for i in 0..GRID {
        for j in 0..GRID {
            pts.push((i as f64 / (GRID - 1) as f64, j as f64 / (GRID - 1) as f64));
        }
    }
    pts
}

/// Checks conditions i-iii against the family's certificate range and gap,
/// constructing the level tilings up to `n_max`.
pub fn verify_almost_linear(family: &AlmostLinearFamily, m: usize, n_max: usize) -> FamilyReport {
    let (j_lo, j_hi) = family.cert_range;
    let delta = family.gap;

    if family.kind == FamilyKind::Constant {
        let a = family.constant_alpha.expect("constant family carries alpha");
        let in_j = a >= j_lo && a <= j_hi;
        let tiles = vec![1u64; n_max + 1];
        return FamilyReport {
            angle_min: a,
            angle_max: a,
            condition_i: in_j,
            lipschitz_bound: 0.0,
            condition_ii: true,
            growth_ratios: vec![1.0; n_max],
            tiles_per_level: tiles,
            condition_iii: true,
        };
    }

    let dist = family.centers.distance_to_unit_square();
    let diagonal_ok = family.centers.all_diagonal_position() && dist > 0.0;

    // direction range over a grid of x in K and the corners of T
    let mut a_min = f64::INFINITY;
    let mut a_max = f64::NEG_INFINITY;
    let xs = sample_points();
    let t_samples: Vec<(f64, f64)> = {
        let mut v = family.centers.corners().to_vec();
        v.push(family.centers.center());
        v
    };
    for &t in &t_samples {
        for &x in &xs {
            let a = family.angle_at(t, x);
            a_min = a_min.min(a);
            a_max = a_max.max(a);
        }
    }

    // Lipschitz bound of x -> alpha_t(x). The radial field is the angle seen
    // from t, so its gradient norm is exactly 1/|x - t|; the co-radial bound
    // is measured by central differences over the grid with a safety factor.
    let lipschitz = if !diagonal_ok {
        f64::INFINITY
    } else {
        match family.kind {
            FamilyKind::Radial => 1.0 / dist,
            FamilyKind::Coradial => {
                let h = 1e-6;
                let mut worst: f64 = 0.0;
                for &t in &t_samples {
                    for &(x, y) in &xs {
                        let da = (family.angle_at(t, (x + h, y)) - family.angle_at(t, (x - h, y)))
                            / (2.0 * h);
                        let db = (family.angle_at(t, (x, y + h)) - family.angle_at(t, (x, y - h)))
                            / (2.0 * h);
                        worst = worst.max(da.hypot(db));
                    }
                }
                worst * 1.25
            }
            FamilyKind::Constant => unreachable!(),
        }
    };

    // widen the observed range by the grid + parameter slack before testing
    // membership in J
    let grid_step = 1.0 / (GRID - 1) as f64;
    let t_diam = (family.centers.hi.0 - family.centers.lo.0)
        .hypot(family.centers.hi.1 - family.centers.lo.1);
    let slack = lipschitz * grid_step * std::f64::consts::SQRT_2
        + if family.centers.is_point() { 0.0 } else { t_diam / dist.max(1e-300) };
    let condition_i = diagonal_ok && a_min - slack >= j_lo && a_max + slack <= j_hi;

    let condition_ii = lipschitz <= delta / 3.0;

    // condition iii: oscillation over one tile and one level-n square is at
    // most Lip * sqrt(2) * M^-n (the x part) plus tile_diam / dist (the t
    // part); solve for the tile size that keeps the sum under delta M^-n / 3
    let mut tiles_per_level = Vec::with_capacity(n_max + 1);
    let mut condition_iii = diagonal_ok;
    let per_x = lipschitz * std::f64::consts::SQRT_2;
    let t_rate = 1.0 / dist.max(1e-300); // |d alpha / d t| <= 1/dist for both rules
    for n in 0..=n_max {
        let scale = (m as f64).powi(-(n as i32));
        let budget = delta * scale / 3.0 - per_x * scale;
        if budget <= 0.0 {
            condition_iii = false;
            break;
        }
        if family.centers.is_point() {
            tiles_per_level.push(1);
            continue;
        }
        let tile_diam = budget / t_rate;
        let cell = tile_diam / std::f64::consts::SQRT_2;
        let nx = ((family.centers.hi.0 - family.centers.lo.0) / cell).ceil().max(1.0);
        let ny = ((family.centers.hi.1 - family.centers.lo.1) / cell).ceil().max(1.0);
        tiles_per_level.push(nx as u64 * ny as u64);
    }
    let growth_ratios = tiles_per_level
        .windows(2)
        .map(|w| w[1] as f64 / w[0] as f64)
        .collect();

    FamilyReport {
        angle_min: a_min,
        angle_max: a_max,
        condition_i,
        lipschitz_bound: lipschitz,
        condition_ii,
        tiles_per_level,
        growth_ratios,
        condition_iii,
    }
}

/// Representative centers of the level-n tiling (tile centers of the uniform
/// grid the report counted). Only meaningful when the report passed.
pub fn tiling_representatives(
    family: &AlmostLinearFamily,
    _m: usize,
    n: usize,
    report: &FamilyReport,
) -> Vec<(f64, f64)> {
    if family.kind == FamilyKind::Constant || family.centers.is_point() {
        return vec![family.centers.center()];
    }
    let count = report
        .tiles_per_level
        .get(n)
        .copied()
        .unwrap_or(1)
        .max(1);
    // recover the grid shape used by the counter
    let k = (count as f64).sqrt().ceil() as u64;
    let mut reps = Vec::new();
    let (lo, hi) = (family.centers.lo, family.centers.hi);
    for i in 0..k {
        for j in 0..k {
            reps.push((
                lo.0 + (hi.0 - lo.0) * (i as f64 + 0.5) / k as f64,
                lo.1 + (hi.1 - lo.1) * (j as f64 + 0.5) / k as f64,
            ));
        }
    }
    reps
}
