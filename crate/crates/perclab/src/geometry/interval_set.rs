use serde::{Deserialize, Serialize};

/// Merge tolerance used when normalizing unions of projected squares.
///
/// Mathematically adjacent squares project to exactly touching intervals, but
/// their endpoints are computed through independent trig expressions and can
/// land an ulp apart. Gaps at or below this width are treated as touching.
/// It is ten orders of magnitude below any interval-length threshold used by
/// the tests, so no containment verdict can flip on it.
pub const MERGE_EPS: f64 = 1e-12;

/// A finite union of disjoint closed intervals inside `[0, 1]`, kept sorted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Normalizes an arbitrary collection: sorts, drops empty intervals, and
    /// merges overlapping or touching ones (touching up to `merge_eps`).
    pub fn from_intervals(mut raw: Vec<(f64, f64)>, merge_eps: f64) -> Self {
        raw.retain(|&(a, b)| b >= a);
        raw.sort_by(|x, y| x.partial_cmp(y).expect("no NaN endpoints"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len().min(64));
        for (a, b) in raw {
            match merged.last_mut() {
                Some(last) if a <= last.1 + merge_eps => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// The longest single interval, if any.
    pub fn longest(&self) -> Option<(f64, f64)> {
        self.intervals
            .iter()
            .copied()
            .max_by(|x, y| (x.1 - x.0).partial_cmp(&(y.1 - y.0)).unwrap())
    }

    /// Longest contained interval together with the verdict `length >=
    /// min_length`. `None` when the set is empty.
    pub fn contains_interval(&self, min_length: f64) -> Option<((f64, f64), bool)> {
        self.longest().map(|iv| (iv, iv.1 - iv.0 >= min_length))
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Is the closed interval `[lo, hi]` contained in the union, allowing
    /// `slack` at the ends and across merged joints?
    pub fn contains_closed_interval(&self, lo: f64, hi: f64, slack: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(a, b)| a - slack <= lo && hi <= b + slack)
    }

    /// Set inclusion up to `slack` per interval end.
    pub fn contains_set(&self, other: &IntervalSet, slack: f64) -> bool {
        other
            .intervals
            .iter()
            .all(|&(a, b)| self.contains_closed_interval(a, b, slack))
    }
}
