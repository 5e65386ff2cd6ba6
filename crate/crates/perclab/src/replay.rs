//! Replays the inductive covering argument on sampled realizations.
//!
//! For a certificate with intervals `I1 subset I2` and block size `r`, the
//! count `V_n(x)` is the number of retained level-`nr` squares whose
//! `I1`-image contains `x`. The induction tracks the good events
//! `min over the net X_n of V_n >= (3/2)^n`; a full pass implies the whole
//! of `I1` is covered by level-`n_max * r` square shadows. The
//! Hoeffding-product machinery turns the per-level counts into an explicit
//! lower bound on the probability that every level passes.

use serde::{Deserialize, Serialize};

use crate::error::{PerclabError, Result};
use crate::geometry::family::{tiling_representatives, verify_almost_linear, AlmostLinearFamily};
use crate::geometry::{project_level, ProjectionFrame};
use crate::operator::certify::CertificateA;
use crate::operator::SWEEP_SAFETY;
use crate::tree::RealizationTree;

/// Hard cap on generated net sizes.
const NET_BUDGET: usize = 50_000_000;

/// A regular evaluation net over `I1` (and optionally over an angle range),
/// with spacing at most `gap * M^(-n r) / 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub i1: (f64, f64),
    pub gap: f64,
    pub n: usize,
    pub r: usize,
    pub spacing: f64,
    pub points: Vec<f64>,
    pub angle_points: Option<Vec<f64>>,
    /// c with #X_n <= c * M^(n r)
    pub cardinality_constant: f64,
}

fn regular_net(lo: f64, hi: f64, max_spacing: f64) -> Result<Vec<f64>> {
    debug_assert!(hi >= lo && max_spacing > 0.0);
    let len = hi - lo;
    if len == 0.0 {
        return Ok(vec![lo]);
    }
    // the 1e-9 relative guard keeps an exact-ratio division (0.6 / (1/60))
    // from rounding up to one extra point
    let k = (len / max_spacing * (1.0 - 1e-9)).ceil() as usize;
    if k + 1 > NET_BUDGET {
        return Err(PerclabError::ResourceBudget {
            needed: (k + 1) as u64,
            cap: NET_BUDGET as u64,
        });
    }
    let step = len / k as f64;
    let mut pts: Vec<f64> = (0..=k).map(|i| lo + step * i as f64).collect();
    // endpoints exactly
    pts[0] = lo;
    pts[k] = hi;
    Ok(pts)
}

/// Builds the level-n net: endpoints of `I1` included, spacing at most
/// `gap * M^(-nr) / 3` (the denser variant that also serves the multi-angle
/// argument), and an angle net over `j` at the same spacing when given.
pub fn build_net(
    i1: (f64, f64),
    gap: f64,
    n: usize,
    r: usize,
    m: usize,
    j: Option<(f64, f64)>,
) -> Result<NetSpec> {
    if gap <= 0.0 {
        return Err(PerclabError::Precondition("net needs a positive gap".into()));
    }
    let scale = (m as f64).powi(-((n * r) as i32));
    let max_spacing = gap * scale / 3.0;
    let points = regular_net(i1.0, i1.1, max_spacing)?;
    let spacing = if points.len() > 1 {
        (i1.1 - i1.0) / (points.len() - 1) as f64
    } else {
        0.0
    };
    let angle_points = match j {
        Some((a, b)) => Some(regular_net(a, b, max_spacing)?),
        None => None,
    };
    let product = points.len() * angle_points.as_ref().map_or(1, |v| v.len());
    if product > NET_BUDGET {
        return Err(PerclabError::ResourceBudget {
            needed: product as u64,
            cap: NET_BUDGET as u64,
        });
    }
    let cardinality_constant = points.len() as f64 * scale;
    Ok(NetSpec {
        i1,
        gap,
        n,
        r,
        spacing,
        points,
        angle_points,
        cardinality_constant,
    })
}

/// Exact count of retained level-`level` squares whose closed `I`-image
/// contains `x`. Membership at image endpoints counts (closed convention).
///
/// The walk prunes subtrees whose full square image cannot contain `x`; the
/// prune test is slackened by 1e-9 so floating-point drift between a parent
/// and its descendants can never drop a leaf the closed test would accept.
pub fn count_cover(
    tree: &RealizationTree,
    x: f64,
    frame: &ProjectionFrame,
    interval: (f64, f64),
    level: usize,
) -> Result<u64> {
    if level > tree.depth() {
        return Err(PerclabError::LevelOutOfRange {
            requested: level,
            depth: tree.depth(),
        });
    }
    let m = tree.matrix().m() as u64;
    let mut count = 0u64;
    // stack of (level, node index, ix, iy)
    let mut stack: Vec<(usize, u32, u64, u64)> = vec![(0, 0, 0, 0)];
    while let Some((lvl, idx, ix, iy)) = stack.pop() {
        let side = (m as f64).powi(-(lvl as i32));
        let lo = frame.square_lo(ix as f64 * side, iy as f64 * side, side);
        if lvl == level {
            let (a, b) = (lo + interval.0 * side, lo + interval.1 * side);
            if a <= x && x <= b {
                count += 1;
            }
            continue;
        }
        if x < lo - 1e-9 || x > lo + side + 1e-9 {
            continue; // descendant images sit inside the square image
        }
        let (start, end) = tree.child_range(lvl, idx);
        for child in start..end {
            let (di, dj) = tree.node_digits(lvl + 1, child);
            stack.push((lvl + 1, child, ix * m + di, iy * m + dj));
        }
    }
    Ok(count)
}

/// Counts `V` at every point of a uniform net in one pass over the level:
/// each square's image interval covers a contiguous index range of the net,
/// accumulated through a difference array. Index bounds are located by
/// arithmetic and then adjusted by exact closed comparisons against the
/// stored net points, so the result agrees with [`count_cover`] bit for bit.
pub fn counts_over_net(
    tree: &RealizationTree,
    level: usize,
    frame: &ProjectionFrame,
    interval: (f64, f64),
    net: &[f64],
) -> Result<Vec<u64>> {
    if net.is_empty() {
        return Ok(Vec::new());
    }
    let m = tree.matrix().m();
    let side = (m as f64).powi(-(level as i32));
    let start = net[0];
    let step = if net.len() > 1 {
        (net[net.len() - 1] - net[0]) / (net.len() - 1) as f64
    } else {
        1.0
    };
    let mut diff = vec![0i64; net.len() + 1];
    tree.visit_level(level, |ix, iy| {
        let lo = frame.square_lo(ix as f64 * side, iy as f64 * side, side);
        let (a, b) = (lo + interval.0 * side, lo + interval.1 * side);
        // first index with net[k] >= a, last with net[k] <= b
        let mut ka = (((a - start) / step).ceil() as i64 - 2)
            .clamp(0, net.len() as i64) as usize;
        while ka < net.len() && net[ka] < a {
            ka += 1;
        }
        while ka > 0 && ka <= net.len() && net[ka - 1] >= a {
            ka -= 1;
        }
        let mut kb =
            ((((b - start) / step).floor() as i64) + 2).clamp(-1, net.len() as i64 - 1);
        while kb >= 0 && net[kb as usize] > b {
            kb -= 1;
        }
        while (kb + 1) < net.len() as i64 && net[(kb + 1) as usize] <= b {
            kb += 1;
        }
        if ka < net.len() && (ka as i64) <= kb {
            diff[ka] += 1;
            diff[kb as usize + 1] -= 1;
        }
    })?;
    let mut counts = Vec::with_capacity(net.len());
    let mut run = 0i64;
    for d in diff.iter().take(net.len()) {
        run += d;
        counts.push(run as u64);
    }
    Ok(counts)
}

/// `(3/2)^n` compared exactly: `v >= 3^n / 2^n` iff `v * 2^n >= 3^n`.
pub fn meets_threshold(count: u64, n: usize) -> bool {
    let num = 3u128.pow(n as u32);
    let den = 1u128 << n;
    (count as u128) * den >= num
}

/// Outcome of one inductive level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelOutcome {
    pub n: usize,
    pub min_count: u64,
    /// threshold as the exact rational 3^n / 2^n
    pub threshold_num: u64,
    pub threshold_den: u64,
    pub net_size: usize,
    pub passed: bool,
}

/// Result of a replay run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub alpha: f64,
    pub r: usize,
    pub i1: (f64, f64),
    pub i2: (f64, f64),
    pub n_max: usize,
    pub levels: Vec<LevelOutcome>,
    /// number of consecutive levels passed, starting at n = 1
    pub passed_through: usize,
    pub passed: bool,
    /// on a full pass: does the level-(n_max r) shadow contain I1
    pub containment_verified: Option<bool>,
    /// max over levels of #X_n / M^(nr)
    pub net_constant: f64,
    /// spot checks of the robustness inequality on neighbor net pairs
    /// (angle-range replays only): (checked, violations)
    pub robustness_spot_checks: Option<(usize, usize)>,
}

impl ReplayReport {
    fn from_levels(
        cert: &CertificateA,
        n_max: usize,
        levels: Vec<LevelOutcome>,
        net_constant: f64,
    ) -> Self {
        let passed_through = levels.iter().take_while(|l| l.passed).count();
        let passed = passed_through == n_max;
        ReplayReport {
            alpha: cert.alpha,
            r: cert.r,
            i1: cert.i1,
            i2: cert.i2,
            n_max,
            levels,
            passed_through,
            passed,
            containment_verified: None,
            net_constant,
            robustness_spot_checks: None,
        }
    }
}

fn check_depth(tree: &RealizationTree, needed: usize) -> Result<()> {
    if tree.depth() < needed {
        return Err(PerclabError::LevelOutOfRange {
            requested: needed,
            depth: tree.depth(),
        });
    }
    Ok(())
}

/// Replays the single-angle induction: for `n = 1..=n_max` checks
/// `min over X_n of V_n(x) >= (3/2)^n`, and on a full pass verifies the
/// implied covering of `I1` by the level-`n_max r` shadow.
pub fn replay_single_angle(
    tree: &RealizationTree,
    cert: &CertificateA,
    n_max: usize,
) -> Result<ReplayReport> {
    check_depth(tree, n_max * cert.r)?;
    let frame = ProjectionFrame::from_radians(cert.alpha)?;
    let m = tree.matrix().m();
    let gap = cert.pair_gap();

    let mut levels = Vec::with_capacity(n_max);
    let mut net_constant: f64 = 0.0;
    for n in 1..=n_max {
        let net = build_net(cert.i1, gap, n, cert.r, m, None)?;
        net_constant = net_constant.max(net.cardinality_constant);
        let counts = counts_over_net(tree, n * cert.r, &frame, cert.i1, &net.points)?;
        let min_count = counts.iter().copied().min().unwrap_or(0);
        levels.push(LevelOutcome {
            n,
            min_count,
            threshold_num: 3u64.pow(n as u32),
            threshold_den: 1u64 << n,
            net_size: net.points.len(),
            passed: meets_threshold(min_count, n),
        });
        if !levels.last().unwrap().passed {
            break;
        }
    }
    let mut report = ReplayReport::from_levels(cert, n_max, levels, net_constant);
    if report.passed {
        let shadow = project_level(tree, n_max * cert.r, &frame)?;
        report.containment_verified =
            Some(shadow.contains_closed_interval(cert.i1.0, cert.i1.1, SWEEP_SAFETY));
    }
    Ok(report)
}

/// Replays the induction over the product net `X_n x Y_n` for a certificate
/// holding on an angle interval, spot-verifying the robustness inequality on
/// sampled adjacent net pairs.
pub fn replay_angle_range(
    tree: &RealizationTree,
    cert: &CertificateA,
    n_max: usize,
) -> Result<ReplayReport> {
    let j = cert
        .angle_range
        .ok_or_else(|| PerclabError::Precondition("certificate carries no angle range".into()))?;
    check_depth(tree, n_max * cert.r)?;
    let m = tree.matrix().m();
    let gap = cert.pair_gap();

    let mut levels = Vec::with_capacity(n_max);
    let mut net_constant: f64 = 0.0;
    let mut spot_checked = 0usize;
    let mut spot_violations = 0usize;
    for n in 1..=n_max {
        let net = build_net(cert.i1, gap, n, cert.r, m, Some(j))?;
        let angles = net.angle_points.as_ref().expect("range net");
        net_constant = net_constant
            .max(net.points.len() as f64 * angles.len() as f64 / (m as f64).powi(2 * (n * cert.r) as i32));
        let mut min_count = u64::MAX;
        let mut per_angle: Vec<Vec<u64>> = Vec::with_capacity(angles.len());
        for &theta in angles {
            let frame = ProjectionFrame::from_radians(theta)?;
            let counts = counts_over_net(tree, n * cert.r, &frame, cert.i1, &net.points)?;
            min_count = min_count.min(counts.iter().copied().min().unwrap_or(0));
            per_angle.push(counts);
        }
        // robustness inequality on a few neighbor pairs: the count with the
        // larger interval at the neighboring angle dominates
        let level = n * cert.r;
        let sample_stride = (net.points.len() / 8).max(1);
        for ai in 0..angles.len().saturating_sub(1) {
            for xi in (0..net.points.len() - 1).step_by(sample_stride) {
                if spot_checked >= 64 {
                    break;
                }
                let wide = count_cover(
                    tree,
                    net.points[xi + 1],
                    &ProjectionFrame::from_radians(angles[ai + 1])?,
                    cert.i2,
                    level,
                )?;
                let narrow = per_angle[ai][xi];
                spot_checked += 1;
                if wide < narrow {
                    spot_violations += 1;
                }
            }
        }
        let passed = meets_threshold(min_count, n);
        levels.push(LevelOutcome {
            n,
            min_count,
            threshold_num: 3u64.pow(n as u32),
            threshold_den: 1u64 << n,
            net_size: net.points.len() * angles.len(),
            passed,
        });
        if !passed {
            break;
        }
    }
    let mut report = ReplayReport::from_levels(cert, n_max, levels, net_constant);
    report.robustness_spot_checks = Some((spot_checked, spot_violations));
    if report.passed {
        let frame = ProjectionFrame::from_radians(cert.alpha)?;
        let shadow = project_level(tree, n_max * cert.r, &frame)?;
        report.containment_verified =
            Some(shadow.contains_closed_interval(cert.i1.0, cert.i1.1, SWEEP_SAFETY));
    }
    Ok(report)
}

/// Count for the family replay: retained level squares whose `I`-image under
/// the projection linearized at the square's center (angle
/// `alpha_t(center)`) contains `x`. Pruning fattens ancestors' image
/// intervals by the possible angle drift across the subtree.
fn count_cover_family(
    tree: &RealizationTree,
    x: f64,
    t: (f64, f64),
    family: &AlmostLinearFamily,
    interval: (f64, f64),
    level: usize,
    lipschitz: f64,
) -> Result<u64> {
    if level > tree.depth() {
        return Err(PerclabError::LevelOutOfRange {
            requested: level,
            depth: tree.depth(),
        });
    }
    let m = tree.matrix().m() as u64;
    // |du/dalpha| over K stays below 4 for angles bounded away from the
    // domain ends; combined with the Lipschitz drift this fattens the prune
    let slack_rate = 4.0 * lipschitz * std::f64::consts::SQRT_2;
    let mut count = 0u64;
    let mut stack: Vec<(usize, u32, u64, u64)> = vec![(0, 0, 0, 0)];
    while let Some((lvl, idx, ix, iy)) = stack.pop() {
        let side = (m as f64).powi(-(lvl as i32));
        let center = (ix as f64 * side + side / 2.0, iy as f64 * side + side / 2.0);
        let alpha = family.angle_at(t, center);
        let frame = match ProjectionFrame::from_radians(alpha) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let lo = frame.square_lo(ix as f64 * side, iy as f64 * side, side);
        if lvl == level {
            let (a, b) = (lo + interval.0 * side, lo + interval.1 * side);
            if a <= x && x <= b {
                count += 1;
            }
            continue;
        }
        let slack = slack_rate * side + 1e-9;
        if x < lo - slack || x > lo + side + slack {
            continue;
        }
        let (start, end) = tree.child_range(lvl, idx);
        for child in start..end {
            let (di, dj) = tree.node_digits(lvl + 1, child);
            stack.push((lvl + 1, child, ix * m + di, iy * m + dj));
        }
    }
    Ok(count)
}

/// Replays the induction for an almost-linear family over the product of the
/// `I1`-net and the level tiling of the parameter set. Requires the family
/// verification to pass first.
pub fn replay_family(
    tree: &RealizationTree,
    family: &AlmostLinearFamily,
    cert: &CertificateA,
    n_max: usize,
) -> Result<ReplayReport> {
    check_depth(tree, n_max * cert.r)?;
    let m = tree.matrix().m();
    let verification = verify_almost_linear(family, m, n_max * cert.r);
    if !verification.passed() {
        return Err(PerclabError::Precondition(format!(
            "family verification failed: {verification:?}"
        )));
    }
    let gap = cert.pair_gap();

    let mut levels = Vec::with_capacity(n_max);
    let mut net_constant: f64 = 0.0;
    for n in 1..=n_max {
        let net = build_net(cert.i1, gap, n, cert.r, m, None)?;
        net_constant = net_constant.max(net.cardinality_constant);
        let reps = tiling_representatives(family, m, n * cert.r, &verification);
        let mut min_count = u64::MAX;
        for &t in &reps {
            for &x in &net.points {
                let c = count_cover_family(tree, x, t, family, cert.i1, n * cert.r, verification.lipschitz_bound)?;
                min_count = min_count.min(c);
            }
        }
        let passed = meets_threshold(min_count, n);
        levels.push(LevelOutcome {
            n,
            min_count,
            threshold_num: 3u64.pow(n as u32),
            threshold_den: 1u64 << n,
            net_size: net.points.len() * reps.len(),
            passed,
        });
        if !passed {
            break;
        }
    }
    Ok(ReplayReport::from_levels(cert, n_max, levels, net_constant))
}

/// One-sided Hoeffding tail for `k` independent variables in `[0, B]` with
/// per-variable mean at least `mu`:
///
/// `P(sum < s) <= exp(-2 (k mu - s)^2 / (k B^2))`.
///
/// Returns the bound together with a vacuity flag (`s > k mu` gives the
/// trivial bound 1).
pub fn hoeffding_tail(k: u64, b: f64, mu: f64, s: f64) -> Result<(f64, bool)> {
    if k == 0 || mu <= 0.0 || mu > b {
        return Err(PerclabError::Precondition(format!(
            "need k >= 1 and 0 < mu <= B; got k = {k}, mu = {mu}, B = {b}"
        )));
    }
    let kf = k as f64;
    if s > kf * mu {
        return Ok((1.0, true));
    }
    let dev = kf * mu - s;
    Ok(((-2.0 * dev * dev / (kf * b * b)).exp(), false))
}

/// One factor of the success product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessTerm {
    pub n: usize,
    /// variables available at this step: ceil((3/2)^n), the integer count
    /// guaranteed by the previous good event
    pub k: u64,
    pub gamma: f64,
    /// net points to control: ceil(c M^((n+1) r))
    pub exponent: f64,
    pub log_factor: f64,
}

/// Lower bound on the probability that every inductive level passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessBound {
    /// natural log of the bound; finite iff the bound is positive
    pub log_bound: f64,
    /// the bound itself; may underflow to zero for realistic constants even
    /// when `log_bound` certifies positivity
    pub bound: f64,
    pub terms: Vec<SuccessTerm>,
    /// bound on the mass of the truncated levels
    pub tail: f64,
    pub offending_term: Option<usize>,
    pub deterministic: bool,
}

/// Computes the product lower bound
///
/// `prod over n of (1 - gamma_n)^(c M^((n+1) r))`
///
/// with the per-level `gamma_n` from [`hoeffding_tail`] at `k =
/// ceil((3/2)^n)`, `B = 2 M^r`, `mu = 2`, `s = (3/2)^(n+1)`, accumulated in
/// log space, times a truncation factor `(1 - tail)` covering levels beyond
/// `n_terms`. The all-ones matrix has deterministic counts, no failure
/// probability, and bound exactly 1.
pub fn success_lower_bound(
    cert: &CertificateA,
    c: f64,
    n_terms: usize,
) -> Result<SuccessBound> {
    let m = cert.matrix.m() as f64;
    let deterministic = cert
        .matrix
        .rows()
        .iter()
        .all(|row| row.iter().all(|&p| p == 1.0));
    if deterministic {
        return Ok(SuccessBound {
            log_bound: 0.0,
            bound: 1.0,
            terms: Vec::new(),
            tail: 0.0,
            offending_term: None,
            deterministic: true,
        });
    }
    let b = 2.0 * m.powi(cert.r as i32);
    let ln_m = m.ln();

    let mut terms = Vec::with_capacity(n_terms + 1);
    let mut log_bound = 0.0f64;
    let mut offending = None;
    for n in 0..=n_terms {
        let k = (1.5f64.powi(n as i32)).ceil() as u64;
        let s = 1.5f64.powi(n as i32 + 1);
        let (gamma, vacuous) = hoeffding_tail(k, b, 2.0, s)?;
        let exponent = (c * m.powi(((n + 1) * cert.r) as i32)).ceil();
        let log_factor = if vacuous || gamma >= 1.0 {
            f64::NEG_INFINITY
        } else if gamma < 1e-10 {
            -exponent * gamma
        } else {
            exponent * (1.0 - gamma).ln()
        };
        if log_factor == f64::NEG_INFINITY && offending.is_none() {
            offending = Some(n);
        }
        log_bound += log_factor;
        terms.push(SuccessTerm {
            n,
            k,
            gamma,
            exponent,
            log_factor,
        });
    }

    // truncation: sum of exponent * gamma over the dropped levels, in log
    // space to survive the huge exponents
    let mut tail = 0.0f64;
    for n in (n_terms + 1)..(n_terms + 1 + 400) {
        let kf = 1.5f64.powi(n as i32).ceil();
        let s = 1.5f64.powi(n as i32 + 1);
        let dev = kf * 2.0 - s;
        if dev < 0.0 {
            tail = f64::INFINITY;
            break;
        }
        let ln_gamma = -2.0 * dev * dev / (kf * b * b);
        let ln_exp = c.ln() + ((n + 1) * cert.r) as f64 * ln_m;
        let ln_term = ln_exp + ln_gamma;
        if ln_term < -745.0 {
            break;
        }
        tail += ln_term.exp();
        if tail.is_infinite() {
            break;
        }
    }
    if tail < 1.0 {
        log_bound += (-tail).ln_1p();
    } else {
        log_bound = f64::NEG_INFINITY;
        if offending.is_none() {
            offending = Some(n_terms + 1);
        }
    }

    Ok(SuccessBound {
        log_bound,
        bound: log_bound.exp(),
        terms,
        tail,
        offending_term: offending,
        deterministic: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ProbabilityMatrix;
    use crate::operator::certify::CertificateA;
    use crate::tree::sample_tree;

    fn toy_cert(matrix: ProbabilityMatrix, alpha: f64, r: usize) -> CertificateA {
        CertificateA {
            matrix,
            alpha,
            angle_range: None,
            robustness_radius: None,
            i1: (0.25, 0.75),
            i2: (0.2, 0.8),
            r,
            min_value: 2.5,
            margin: 0.5,
        }
    }

    #[test]
    fn net_example_37_points() {
        // I1 = [0.2, 0.8], gap 0.1, M = 2, r = 1, n = 1: spacing 1/60,
        // 37 points
        let net = build_net((0.2, 0.8), 0.1, 1, 1, 2, None).unwrap();
        assert_eq!(net.points.len(), 37);
        assert!((net.spacing - 1.0 / 60.0).abs() < 1e-15);
        assert_eq!(net.points[0], 0.2);
        assert_eq!(*net.points.last().unwrap(), 0.8);
    }

    #[test]
    fn net_density_and_growth() {
        let gap = 0.07;
        let mut prev = 0usize;
        for n in 0..4 {
            let net = build_net((0.1, 0.9), gap, n, 1, 2, None).unwrap();
            let max_allowed = gap * 2f64.powi(-(n as i32)) / 3.0;
            for w in net.points.windows(2) {
                assert!(w[1] - w[0] <= max_allowed + 1e-15);
            }
            if n > 0 {
                // doubling n multiplies the size by at most M^r plus rounding
                assert!(net.points.len() <= prev * 2 + 2);
            }
            prev = net.points.len();
        }
        // n = 0 spacing is gap/3
        let net0 = build_net((0.1, 0.9), 0.3, 0, 1, 2, None).unwrap();
        assert!(net0.spacing <= 0.1 + 1e-15);
    }

    #[test]
    fn count_cover_examples() {
        let dead = sample_tree(&ProbabilityMatrix::uniform(2, 0.0).unwrap(), 3, 0);
        let frame = ProjectionFrame::from_radians(1.1).unwrap();
        assert_eq!(count_cover(&dead, 0.5, &frame, (0.0, 1.0), 2).unwrap(), 0);

        // full tree: equals the all-ones pushforward away from breakpoints
        let full = sample_tree(&ProbabilityMatrix::uniform(2, 1.0).unwrap(), 4, 0);
        let ones = ProbabilityMatrix::uniform(2, 1.0).unwrap();
        let step =
            crate::operator::pushforward_indicator(&ones, &frame, (0.3, 0.7), 3, 1 << 24).unwrap();
        for k in 0..50 {
            let x = 0.01 + 0.98 * k as f64 / 49.0;
            if step.breakpoints().iter().any(|b| (b - x).abs() < 1e-9) {
                continue;
            }
            let c = count_cover(&full, x, &frame, (0.3, 0.7), 3).unwrap();
            assert_eq!(c as f64, step.eval(x), "x = {x}");
        }

        // monotone in the interval
        let c_narrow = count_cover(&full, 0.41, &frame, (0.45, 0.55), 4).unwrap();
        let c_wide = count_cover(&full, 0.41, &frame, (0.0, 1.0), 4).unwrap();
        assert!(c_wide >= c_narrow);
    }

    #[test]
    fn count_cover_matches_brute_force() {
        let m = ProbabilityMatrix::uniform(2, 0.8).unwrap();
        let tree = sample_tree(&m, 6, 11);
        let frame = ProjectionFrame::from_radians(2.2).unwrap();
        let interval = (0.2, 0.9);
        let mut state = 5u64;
        for _ in 0..200 {
            state = crate::rng::mix_key(&[state]);
            let x = crate::rng::unit_from(state);
            let level = (state % 7) as usize;
            let pruned = count_cover(&tree, x, &frame, interval, level).unwrap();
            let side = 2f64.powi(-(level as i32));
            let mut brute = 0u64;
            tree.visit_level(level, |ix, iy| {
                let lo = frame.square_lo(ix as f64 * side, iy as f64 * side, side);
                if lo + interval.0 * side <= x && x <= lo + interval.1 * side {
                    brute += 1;
                }
            })
            .unwrap();
            assert_eq!(pruned, brute);
        }
    }

    #[test]
    fn bulk_counts_agree_with_count_cover() {
        let m = ProbabilityMatrix::uniform(2, 0.85).unwrap();
        let tree = sample_tree(&m, 6, 3);
        let frame = ProjectionFrame::from_radians(0.9).unwrap();
        let net = build_net((0.25, 0.75), 0.05, 1, 2, 2, None).unwrap();
        let bulk = counts_over_net(&tree, 4, &frame, (0.25, 0.75), &net.points).unwrap();
        for (k, &x) in net.points.iter().enumerate() {
            let single = count_cover(&tree, x, &frame, (0.25, 0.75), 4).unwrap();
            assert_eq!(bulk[k], single, "k = {k}");
        }
    }

    #[test]
    fn threshold_rational_comparison() {
        assert!(meets_threshold(2, 1)); // 2 >= 1.5
        assert!(!meets_threshold(1, 1));
        assert!(meets_threshold(3, 2)); // 3 >= 2.25
        assert!(!meets_threshold(2, 2));
        assert!(meets_threshold(6, 4)); // 6 >= 5.0625
        assert!(!meets_threshold(5, 4));
    }

    #[test]
    fn extinct_tree_fails_first_level() {
        let dead = sample_tree(&ProbabilityMatrix::uniform(2, 0.0).unwrap(), 4, 0);
        let cert = toy_cert(ProbabilityMatrix::uniform(2, 0.0).unwrap(), 1.1, 1);
        let rep = replay_single_angle(&dead, &cert, 4).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.passed_through, 0);
        assert_eq!(rep.levels[0].min_count, 0);
    }

    #[test]
    fn depth_precondition() {
        let t = sample_tree(&ProbabilityMatrix::uniform(2, 1.0).unwrap(), 3, 0);
        let cert = toy_cert(ProbabilityMatrix::uniform(2, 1.0).unwrap(), 1.1, 2);
        assert!(matches!(
            replay_single_angle(&t, &cert, 2),
            Err(PerclabError::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn hoeffding_examples() {
        // zero deviation: bound 1
        let (b, vac) = hoeffding_tail(5, 4.0, 2.0, 10.0).unwrap();
        assert_eq!(b, 1.0);
        assert!(!vac);
        // pinned arithmetic: exp(-2 * 4.5^2 / (9 * 64))
        let (b, vac) = hoeffding_tail(9, 8.0, 2.0, 13.5).unwrap();
        assert!((b - (-0.0703125f64).exp()).abs() < 1e-15);
        assert!((b - 0.9321024923595276).abs() < 1e-12);
        assert!(!vac);
        // vacuous case flagged
        let (b, vac) = hoeffding_tail(1, 8.0, 2.0, 3.0).unwrap();
        assert_eq!(b, 1.0);
        assert!(vac);
        // nonincreasing in k at fixed s/k below mu
        let (b4, _) = hoeffding_tail(4, 8.0, 2.0, 4.0 * 1.5).unwrap();
        let (b8, _) = hoeffding_tail(8, 8.0, 2.0, 8.0 * 1.5).unwrap();
        assert!(b8 < b4);
        assert!(hoeffding_tail(0, 8.0, 2.0, 1.0).is_err());
        assert!(hoeffding_tail(3, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn success_bound_deterministic_is_one() {
        let cert = toy_cert(ProbabilityMatrix::uniform(2, 1.0).unwrap(), 1.1, 2);
        let sb = success_lower_bound(&cert, 30.0, 10).unwrap();
        assert_eq!(sb.bound, 1.0);
        assert_eq!(sb.log_bound, 0.0);
        assert!(sb.deterministic);
    }

    #[test]
    fn success_bound_monotone_in_c() {
        let cert = toy_cert(ProbabilityMatrix::uniform(2, 0.9).unwrap(), 1.1, 2);
        let lo = success_lower_bound(&cert, 10.0, 12).unwrap();
        let hi = success_lower_bound(&cert, 40.0, 12).unwrap();
        assert!(hi.log_bound <= lo.log_bound);
    }
}
