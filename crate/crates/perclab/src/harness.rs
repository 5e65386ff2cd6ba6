//! Reproducible Monte Carlo campaigns: survival and growth statistics,
//! shadow coverage, replay pass rates, column-process coverage and the
//! self-similarity test, all against the exact branching oracles.
//!
//! Determinism: per-trial seeds derive from `(base seed, domain, trial
//! index)` through the same keyed mixer as the square draws, so trials are
//! independent of scheduling and identical configs give identical records.

use serde::{Deserialize, Serialize};

use crate::code::SquareCode;
use crate::error::{PerclabError, Result};
use crate::geometry::radial::{radial_project_level, Center, RadialKind};
use crate::geometry::{project_level, ProjectionFrame};
use crate::operator::certify::CertificateA;
use crate::replay::replay_single_angle;
use crate::rng;
use crate::tree::{sample_tree, survives_to_depth};
use crate::ProbabilityMatrix;

/// seed-derivation domains, one per independent randomness consumer
const DOMAIN_TRIAL: u64 = 1;
const DOMAIN_COLUMN: u64 = 2;
const DOMAIN_ROOT_LAW: u64 = 3;
const DOMAIN_COND_LAW: u64 = 4;

/// Cap on the expected number of materialized squares per trial.
const NODE_BUDGET: f64 = 2e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub matrix: ProbabilityMatrix,
    /// survival horizon, probed without materializing the tree
    pub depth: usize,
    /// levels materialized for counts and shadows (0 = survival only)
    pub count_depth: usize,
    pub trials: u64,
    pub base_seed: u64,
    /// oblique shadow angles
    pub angles: Vec<f64>,
    /// radial shadow centers
    pub centers: Vec<(f64, f64)>,
    /// shadow-length threshold echoed into the aggregates
    pub min_interval_length: f64,
    /// when present, replay this certificate on each materialized tree
    pub certificate: Option<CertificateA>,
    pub replay_n_max: usize,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(PerclabError::Config("campaign.trials must be >= 1".into()));
        }
        if self.count_depth > self.depth {
            return Err(PerclabError::Config(
                "campaign.count_depth cannot exceed tree.depth".into(),
            ));
        }
        let mean = self.matrix.sum_total();
        let mut expected = 1.0;
        let mut total = 1.0;
        for _ in 0..self.count_depth {
            expected *= mean;
            total += expected;
        }
        if total > NODE_BUDGET {
            return Err(PerclabError::Config(format!(
                "expected {total:.3e} squares at count_depth {}; lower campaign.count_depth",
                self.count_depth
            )));
        }
        for &a in &self.angles {
            let f = ProjectionFrame::from_radians(a)?;
            let _ = f;
        }
        for &(x, y) in &self.centers {
            Center::new(x, y)?;
        }
        if let Some(cert) = &self.certificate {
            if self.replay_n_max * cert.r > self.count_depth {
                return Err(PerclabError::Config(
                    "replay needs count_depth >= replay.n_max * r".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub survived: bool,
    /// retained squares per level 1..=count_depth
    pub counts: Vec<u64>,
    /// longest shadow interval length per configured angle, at count_depth
    pub shadow_lengths: Vec<f64>,
    /// longest radial shadow per configured center
    pub radial_lengths: Vec<f64>,
    pub replay_passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: u64,
    pub survived: u64,
    pub survival_frequency: f64,
    /// 3 sqrt(f (1-f) / N), the heuristic normal radius
    pub survival_radius: f64,
    pub discarded_extinct: u64,
    /// per angle: fraction of surviving trials whose longest shadow reaches
    /// the configured threshold
    pub shadow_hit_frequency: Vec<f64>,
    pub radial_hit_frequency: Vec<f64>,
    pub replay_pass_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config_echo: String,
    pub records: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

pub fn confidence_radius(freq: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    3.0 * (freq * (1.0 - freq) / n as f64).sqrt()
}

/// Recomputes the aggregate block from per-trial records; the campaign
/// stores exactly this, so files round-trip.
pub fn aggregate(records: &[TrialRecord], config: &CampaignConfig) -> Aggregates {
    let trials = records.len() as u64;
    let survived = records.iter().filter(|r| r.survived).count() as u64;
    let freq = survived as f64 / trials.max(1) as f64;
    let surviving: Vec<&TrialRecord> = records.iter().filter(|r| r.survived).collect();
    let hit = |lens: &dyn Fn(&TrialRecord) -> Option<f64>, idx: usize| -> f64 {
        let _ = idx;
        if surviving.is_empty() {
            return 0.0;
        }
        surviving
            .iter()
            .filter(|r| lens(r).map_or(false, |l| l >= config.min_interval_length))
            .count() as f64
            / surviving.len() as f64
    };
    let shadow_hit_frequency = (0..config.angles.len())
        .map(|k| hit(&|r: &TrialRecord| r.shadow_lengths.get(k).copied(), k))
        .collect();
    let radial_hit_frequency = (0..config.centers.len())
        .map(|k| hit(&|r: &TrialRecord| r.radial_lengths.get(k).copied(), k))
        .collect();
    let replayed: Vec<bool> = records.iter().filter_map(|r| r.replay_passed).collect();
    Aggregates {
        trials,
        survived,
        survival_frequency: freq,
        survival_radius: confidence_radius(freq, trials),
        discarded_extinct: trials - survived,
        shadow_hit_frequency,
        radial_hit_frequency,
        replay_pass_rate: if replayed.is_empty() {
            None
        } else {
            Some(replayed.iter().filter(|&&b| b).count() as f64 / replayed.len() as f64)
        },
    }
}

/// Runs the campaign. Survival is probed to `depth` by the short-circuit
/// walk; counts, shadows and replays are computed on the materialized
/// prefix to `count_depth` of the same realization.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let frames: Vec<ProjectionFrame> = config
        .angles
        .iter()
        .map(|&a| ProjectionFrame::from_radians(a))
        .collect::<Result<_>>()?;
    let centers: Vec<Center> = config
        .centers
        .iter()
        .map(|&(x, y)| Center::new(x, y))
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(config.trials as usize);
    for trial in 0..config.trials {
        let seed = rng::derive_seed(config.base_seed, DOMAIN_TRIAL, trial);
        let survived = survives_to_depth(&config.matrix, config.depth, seed);
        let mut counts = Vec::new();
        let mut shadow_lengths = Vec::new();
        let mut radial_lengths = Vec::new();
        let mut replay_passed = None;
        if config.count_depth > 0 {
            let tree = sample_tree(&config.matrix, config.count_depth, seed);
            counts = (1..=config.count_depth)
                .map(|n| tree.level_count(n).map(|c| c as u64))
                .collect::<Result<_>>()?;
            for frame in &frames {
                let shadow = project_level(&tree, config.count_depth, frame)?;
                shadow_lengths.push(shadow.longest().map_or(0.0, |(a, b)| b - a));
            }
            for center in &centers {
                let shadow =
                    radial_project_level(&tree, config.count_depth, center, RadialKind::Radial)?;
                radial_lengths.push(shadow.set.longest().map_or(0.0, |(a, b)| b - a));
            }
            if let Some(cert) = &config.certificate {
                let report = replay_single_angle(&tree, cert, config.replay_n_max)?;
                replay_passed = Some(report.passed);
            }
        }
        records.push(TrialRecord {
            trial,
            seed,
            survived,
            counts,
            shadow_lengths,
            radial_lengths,
            replay_passed,
        });
    }
    let aggregates = aggregate(&records, config);
    Ok(CampaignResult {
        config_echo: String::new(),
        records,
        aggregates,
    })
}

/// CSV serialization: a format-version line, a header row, one row per
/// trial.
pub fn campaign_csv(result: &CampaignResult, config: &CampaignConfig) -> String {
    let mut out = String::from("#format perclab-campaign-csv v1\n");
    out.push_str("trial,seed,survived");
    for n in 1..=config.count_depth {
        out.push_str(&format!(",count_{n}"));
    }
    for k in 0..config.angles.len() {
        out.push_str(&format!(",shadow_{k}"));
    }
    for k in 0..config.centers.len() {
        out.push_str(&format!(",radial_{k}"));
    }
    if config.certificate.is_some() {
        out.push_str(",replay_passed");
    }
    out.push('\n');
    for r in &result.records {
        out.push_str(&format!("{},{},{}", r.trial, r.seed, u8::from(r.survived)));
        for c in &r.counts {
            out.push_str(&format!(",{c}"));
        }
        for s in &r.shadow_lengths {
            out.push_str(&format!(",{s:.17}"));
        }
        for s in &r.radial_lengths {
            out.push_str(&format!(",{s:.17}"));
        }
        if let Some(p) = r.replay_passed {
            out.push_str(&format!(",{}", u8::from(p)));
        }
        out.push('\n');
    }
    out
}

/// Parses the campaign CSV back into records (used by the round-trip test
/// and by downstream consumers of the file format).
pub fn parse_campaign_csv(
    text: &str,
    config: &CampaignConfig,
) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("#format perclab-campaign-csv v1") => {}
        other => {
            return Err(PerclabError::Config(format!(
                "bad campaign csv header: {other:?}"
            )))
        }
    }
    let _header = lines.next();
    let mut records = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let mut next = || -> Result<&str> {
            it.next()
                .ok_or_else(|| PerclabError::Config(format!("short csv row: {line}")))
        };
        let trial = next()?.parse().map_err(|_| PerclabError::Config("bad trial".into()))?;
        let seed = next()?.parse().map_err(|_| PerclabError::Config("bad seed".into()))?;
        let survived = next()? == "1";
        let mut counts = Vec::new();
        for _ in 0..config.count_depth {
            counts.push(next()?.parse().map_err(|_| PerclabError::Config("bad count".into()))?);
        }
        let mut shadow_lengths = Vec::new();
        for _ in 0..config.angles.len() {
            shadow_lengths
                .push(next()?.parse().map_err(|_| PerclabError::Config("bad shadow".into()))?);
        }
        let mut radial_lengths = Vec::new();
        for _ in 0..config.centers.len() {
            radial_lengths
                .push(next()?.parse().map_err(|_| PerclabError::Config("bad radial".into()))?);
        }
        let replay_passed = if config.certificate.is_some() {
            Some(next()? == "1")
        } else {
            None
        };
        records.push(TrialRecord {
            trial,
            seed,
            survived,
            counts,
            shadow_lengths,
            radial_lengths,
            replay_passed,
        });
    }
    Ok(records)
}

/// Population cap for the column simulation. Declaring survival once the
/// column population reaches the cap biases the frequency by at most
/// `q^cap` per trial (`q` < 1 the single-line extinction probability),
/// far below any tolerance used here.
const COLUMN_CAP: u64 = 1024;

fn madic_digit(u: f64, m: usize, k: usize) -> usize {
    ((u * (m as f64).powi(k as i32)).floor() as u64 % m as u64) as usize
}

/// Empirical frequency that the column (or row) of M-adic cells above `u`
/// stays populated to `depth`. The column population is a branching process
/// with offspring the sum of one digit strip of independent retentions.
pub fn fixed_point_coverage(
    matrix: &ProbabilityMatrix,
    u: f64,
    vertical: bool,
    depth: usize,
    trials: u64,
    base_seed: u64,
) -> Result<f64> {
    let m = matrix.m();
    if !(0.0..1.0).contains(&u) {
        return Err(PerclabError::Domain("u must lie in [0, 1)".into()));
    }
    for k in 1..=depth {
        let scaled = u * (m as f64).powi(k as i32);
        if (scaled - scaled.round()).abs() < 1e-9 {
            return Err(PerclabError::Domain(format!(
                "u = {u} is M-adic at level {k}; the column is ambiguous"
            )));
        }
    }
    let mut survivors = 0u64;
    for trial in 0..trials {
        let seed = rng::derive_seed(base_seed, DOMAIN_COLUMN, trial);
        let mut population = 1u64;
        for level in 0..depth {
            if population == 0 || population >= COLUMN_CAP {
                break;
            }
            let digit = madic_digit(u, m, level + 1);
            let mut next = 0u64;
            for square in 0..population {
                for j in 0..m {
                    let p = if vertical {
                        matrix.prob(digit, j)
                    } else {
                        matrix.prob(j, digit)
                    };
                    if p <= 0.0 {
                        continue;
                    }
                    let draw = rng::unit_from(rng::mix_key(&[
                        seed,
                        level as u64,
                        square,
                        j as u64,
                    ]));
                    if draw < p {
                        next += 1;
                    }
                }
            }
            population = next;
        }
        if population > 0 {
            survivors += 1;
        }
    }
    Ok(survivors as f64 / trials as f64)
}

/// Empirical child-count histogram (0..=M^2 retained children): of the root
/// over fresh realizations, or of `code` conditioned on `code` retained.
/// Returns the histogram and the number of samples that entered it.
pub fn child_count_histogram(
    matrix: &ProbabilityMatrix,
    code: Option<&SquareCode>,
    trials: u64,
    base_seed: u64,
) -> Result<(Vec<u64>, u64)> {
    let m = matrix.m();
    let mut hist = vec![0u64; m * m + 1];
    let mut samples = 0u64;
    let (depth, domain) = match code {
        None => (1, DOMAIN_ROOT_LAW),
        Some(c) => (c.level() + 1, DOMAIN_COND_LAW),
    };
    for trial in 0..trials {
        let seed = rng::derive_seed(base_seed, domain, trial);
        let tree = sample_tree(matrix, depth, seed);
        match code {
            None => {
                hist[tree.level_count(1)?] += 1;
                samples += 1;
            }
            Some(c) => {
                if let Some(children) = tree.children_of(c) {
                    hist[children] += 1;
                    samples += 1;
                }
            }
        }
    }
    Ok((hist, samples))
}

/// Total-variation distance between two empirical histograms.
pub fn tv_distance(a: &[u64], b: &[u64]) -> f64 {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let mut d = 0.0;
    for k in 0..a.len().max(b.len()) {
        let fa = *a.get(k).unwrap_or(&0) as f64 / na.max(1) as f64;
        let fb = *b.get(k).unwrap_or(&0) as f64 / nb.max(1) as f64;
        d += (fa - fb).abs();
    }
    d / 2.0
}

/// Normal-approximation sampling radius for the TV distance between two
/// empirical histograms (heuristic, not a certificate).
pub fn tv_sampling_radius(a: &[u64], b: &[u64]) -> f64 {
    let half_width = |h: &[u64]| -> f64 {
        let n: u64 = h.iter().sum();
        if n == 0 {
            return f64::INFINITY;
        }
        let nf = n as f64;
        h.iter()
            .map(|&c| {
                let f = c as f64 / nf;
                (f * (1.0 - f)).sqrt()
            })
            .sum::<f64>()
            / (2.0 * nf.sqrt())
    };
    half_width(a) + half_width(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarityReport {
    pub tv: f64,
    pub radius: f64,
    pub root_samples: u64,
    pub conditioned_samples: u64,
    pub passes: bool,
}

/// Statistical self-similarity: the law of the child count of a retained
/// square equals the law of the root's child count. Conditioning is by
/// rejection; fewer than 100 conditioning events is an error.
pub fn self_similarity_test(
    matrix: &ProbabilityMatrix,
    trials: u64,
    code: &SquareCode,
    base_seed: u64,
) -> Result<SelfSimilarityReport> {
    let (root_hist, root_n) = child_count_histogram(matrix, None, trials, base_seed)?;
    let (cond_hist, cond_n) = child_count_histogram(matrix, Some(code), trials, base_seed)?;
    if cond_n < 100 {
        return Err(PerclabError::InsufficientSample {
            got: cond_n as usize,
            need: 100,
        });
    }
    let tv = tv_distance(&root_hist, &cond_hist);
    let radius = tv_sampling_radius(&root_hist, &cond_hist);
    Ok(SelfSimilarityReport {
        tv,
        radius,
        root_samples: root_n,
        conditioned_samples: cond_n,
        passes: tv <= 3.0 * radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching;

    fn basic_config(p: f64, depth: usize, count_depth: usize, trials: u64) -> CampaignConfig {
        CampaignConfig {
            matrix: ProbabilityMatrix::uniform(2, p).unwrap(),
            depth,
            count_depth,
            trials,
            base_seed: 42,
            angles: vec![1.1],
            centers: vec![(-10.0, -10.0)],
            min_interval_length: 0.2,
            certificate: None,
            replay_n_max: 0,
        }
    }

    #[test]
    fn full_matrix_campaign_trivial() {
        let cfg = basic_config(1.0, 3, 3, 2);
        let res = run_campaign(&cfg).unwrap();
        assert_eq!(res.aggregates.survival_frequency, 1.0);
        for r in &res.records {
            assert_eq!(r.counts, vec![4, 16, 64]);
            assert!((r.shadow_lengths[0] - 1.0).abs() < 1e-9);
            assert!((r.radial_lengths[0] - 1.0).abs() < 1e-9);
        }
        assert_eq!(res.aggregates.shadow_hit_frequency, vec![1.0]);
    }

    #[test]
    fn campaign_deterministic() {
        let cfg = basic_config(0.8, 6, 4, 20);
        let a = run_campaign(&cfg).unwrap();
        let b = run_campaign(&cfg).unwrap();
        assert_eq!(a, b);
        let csv1 = campaign_csv(&a, &cfg);
        let csv2 = campaign_csv(&b, &cfg);
        assert_eq!(csv1, csv2);
    }

    #[test]
    fn csv_round_trip_recomputes_aggregates() {
        let cfg = basic_config(0.75, 5, 3, 30);
        let res = run_campaign(&cfg).unwrap();
        let csv = campaign_csv(&res, &cfg);
        let records = parse_campaign_csv(&csv, &cfg).unwrap();
        assert_eq!(records.len(), res.records.len());
        for (a, b) in records.iter().zip(&res.records) {
            assert_eq!(a.trial, b.trial);
            assert_eq!(a.survived, b.survived);
            assert_eq!(a.counts, b.counts);
        }
        let agg = aggregate(&records, &cfg);
        assert_eq!(agg, res.aggregates);
    }

    #[test]
    fn config_validation() {
        let mut cfg = basic_config(0.9, 3, 5, 1);
        assert!(cfg.validate().is_err()); // count_depth > depth
        cfg.count_depth = 3;
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut deep = basic_config(0.9, 30, 30, 1);
        assert!(deep.validate().is_err()); // node budget
        deep.count_depth = 0;
        assert!(deep.validate().is_ok());
    }

    #[test]
    fn survival_matches_branching_oracle() {
        // p = 0.6 (mean 2.4): q solves q = (0.4 + 0.6 q)^4
        let matrix = ProbabilityMatrix::uniform(2, 0.6).unwrap();
        let cfg = CampaignConfig {
            matrix: matrix.clone(),
            depth: 22,
            count_depth: 0,
            trials: 3000,
            base_seed: 7,
            angles: vec![],
            centers: vec![],
            min_interval_length: 0.2,
            certificate: None,
            replay_n_max: 0,
        };
        let res = run_campaign(&cfg).unwrap();
        let q_d = branching::extinction_probability_at_depth(&matrix, 22);
        let extinct_freq = 1.0 - res.aggregates.survival_frequency;
        let radius = confidence_radius(q_d, cfg.trials);
        assert!(
            (extinct_freq - q_d).abs() <= radius,
            "extinct {extinct_freq} vs oracle {q_d} (radius {radius})"
        );
    }

    #[test]
    fn column_coverage_full_matrix() {
        let matrix = ProbabilityMatrix::uniform(2, 1.0).unwrap();
        let f = fixed_point_coverage(&matrix, 1.0 / std::f64::consts::PI, true, 10, 50, 3).unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn column_rejects_madic_u() {
        let matrix = ProbabilityMatrix::uniform(2, 0.9).unwrap();
        assert!(matches!(
            fixed_point_coverage(&matrix, 0.375, true, 10, 10, 3),
            Err(PerclabError::Domain(_))
        ));
    }

    #[test]
    fn self_similarity_full_matrix_zero_distance() {
        let matrix = ProbabilityMatrix::uniform(2, 1.0).unwrap();
        let code = SquareCode::from_digits(2, &[0], &[0]).unwrap();
        let rep = self_similarity_test(&matrix, 500, &code, 11).unwrap();
        assert_eq!(rep.tv, 0.0);
        assert!(rep.passes);
    }

    #[test]
    fn self_similarity_insufficient_sample() {
        let matrix = ProbabilityMatrix::uniform(2, 0.5).unwrap();
        let code = SquareCode::from_digits(2, &[0], &[0]).unwrap();
        assert!(matches!(
            self_similarity_test(&matrix, 50, &code, 11),
            Err(PerclabError::InsufficientSample { .. })
        ));
    }
}
