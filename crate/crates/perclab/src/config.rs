//! Flat `key=value` configuration shared by the CLI and the harness.
//!
//! Keys use dotted section prefixes (`matrix.m=3`, `tree.depth=12`). Unknown
//! keys are rejected by name. Angles may be given as plain radians or as
//! rational multiples of pi (`pi/4`, `3pi/4`, `0.25pi`), which reparse to
//! identical values from echoed manifests.

use std::collections::BTreeMap;

use crate::error::{PerclabError, Result};
use crate::matrix::ProbabilityMatrix;

/// Parsed key-value map with case-sensitive keys, last assignment winning.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PerclabError::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            PerclabError::Config(format!("override must be key=value, got `{assignment}`"))
        })?;
        self.values
            .insert(key.trim().to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }

    /// Rejects any key outside the allowed set (exact or prefix match for
    /// keys like `matrix.row0`).
    pub fn reject_unknown(&self, allowed: &[&str], allowed_prefixes: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            let ok = allowed.contains(&key.as_str())
                || allowed_prefixes.iter().any(|p| key.starts_with(p));
            if !ok {
                return Err(PerclabError::Config(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| PerclabError::Config(format!("missing config key `{key}`")))
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| PerclabError::Config(format!("key `{key}`: bad integer `{v}`"))),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| PerclabError::Config(format!("key `{key}`: bad integer `{v}`"))),
        }
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| PerclabError::Config(format!("key `{key}`: bad number `{v}`"))),
        }
    }

    /// The retention matrix from `matrix.m` plus either `matrix.p` (uniform),
    /// optionally punched by `matrix.hole=i,j`, or per-row lists
    /// `matrix.row0=..`, `matrix.row1=..`.
    pub fn matrix(&self) -> Result<ProbabilityMatrix> {
        let m: usize = self
            .require("matrix.m")?
            .parse()
            .map_err(|_| PerclabError::Config("key `matrix.m`: bad integer".into()))?;
        let has_rows = self.get("matrix.row0").is_some();
        if has_rows {
            let mut rows = Vec::with_capacity(m);
            for i in 0..m {
                let key = format!("matrix.row{i}");
                let line = self
                    .get(&key)
                    .ok_or_else(|| PerclabError::Config(format!("missing config key `{key}`")))?;
                let row: std::result::Result<Vec<f64>, _> =
                    line.split(',').map(|s| s.trim().parse::<f64>()).collect();
                rows.push(row.map_err(|_| {
                    PerclabError::Config(format!("key `{key}`: bad probability list"))
                })?);
            }
            ProbabilityMatrix::new(m, rows)
        } else {
            let p = self.get_f64("matrix.p", f64::NAN)?;
            if p.is_nan() {
                return Err(PerclabError::Config(
                    "need either matrix.p or matrix.row0..rowN".into(),
                ));
            }
            match self.get("matrix.hole") {
                None => ProbabilityMatrix::uniform(m, p),
                Some(h) => {
                    let (i, j) = h.split_once(',').ok_or_else(|| {
                        PerclabError::Config("key `matrix.hole`: expected i,j".into())
                    })?;
                    let hole = (
                        i.trim().parse().map_err(|_| {
                            PerclabError::Config("key `matrix.hole`: bad index".into())
                        })?,
                        j.trim().parse().map_err(|_| {
                            PerclabError::Config("key `matrix.hole`: bad index".into())
                        })?,
                    );
                    ProbabilityMatrix::with_hole(m, p, hole)
                }
            }
        }
    }

    /// Comma-separated list of angles under `key`.
    pub fn angles(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(v) => v.split(',').map(|s| parse_angle(s.trim())).collect(),
        }
    }

    /// Echo of the fully resolved configuration; parseable as a config again.
    pub fn manifest(&self) -> String {
        let mut out = String::from("# perclab-manifest v1\n");
        for (k, v) in &self.values {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Angles as radians or rational multiples of pi: `pi/4`, `3pi/4`, `2pi/5`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    if let Some(rest) = t.find("pi").map(|k| (&t[..k], &t[k + 2..])) {
        let (num_s, den_s) = rest;
        let num: f64 = if num_s.is_empty() {
            1.0
        } else {
            num_s
                .parse()
                .map_err(|_| PerclabError::Config(format!("bad angle `{text}`")))?
        };
        let den: f64 = if den_s.is_empty() {
            1.0
        } else {
            let d = den_s
                .strip_prefix('/')
                .ok_or_else(|| PerclabError::Config(format!("bad angle `{text}`")))?;
            d.parse()
                .map_err(|_| PerclabError::Config(format!("bad angle `{text}`")))?
        };
        return Ok(num * std::f64::consts::PI / den);
    }
    t.parse()
        .map_err(|_| PerclabError::Config(format!("bad angle `{text}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut c = Config::parse("# comment\nmatrix.m=2\nmatrix.p=0.9\n\ntree.depth=5\n").unwrap();
        assert_eq!(c.get("matrix.m"), Some("2"));
        c.apply_override("tree.depth=7").unwrap();
        assert_eq!(c.get_usize("tree.depth", 0).unwrap(), 7);
        assert!(Config::parse("nonsense line\n").is_err());
    }

    #[test]
    fn unknown_keys_rejected_by_name() {
        let c = Config::parse("matrix.m=2\nbogus.key=1\n").unwrap();
        let err = c
            .reject_unknown(&["matrix.m"], &[])
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus.key"), "{err}");
    }

    #[test]
    fn matrix_forms() {
        let c = Config::parse("matrix.m=3\nmatrix.p=0.55\nmatrix.hole=1,1\n").unwrap();
        let m = c.matrix().unwrap();
        assert_eq!(m.prob(1, 1), 0.0);
        assert_eq!(m.prob(0, 2), 0.55);

        let c = Config::parse("matrix.m=2\nmatrix.row0=0.1,0.2\nmatrix.row1=0.3,0.4\n").unwrap();
        let m = c.matrix().unwrap();
        assert_eq!(m.prob(1, 0), 0.3);
    }

    #[test]
    fn angle_forms() {
        use std::f64::consts::PI;
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("pie").is_err());
        // manifests reparse to identical values
        assert_eq!(parse_angle("pi/4").unwrap(), parse_angle("pi/4").unwrap());
    }

    #[test]
    fn manifest_round_trip() {
        let c = Config::parse("b.key=2\na.key=1\n").unwrap();
        let m = c.manifest();
        assert!(m.starts_with("# perclab-manifest v1\n"));
        let c2 = Config::parse(&m).unwrap();
        assert_eq!(c2.get("a.key"), Some("1"));
        assert_eq!(c2.get("b.key"), Some("2"));
        assert_eq!(c2.manifest(), m);
    }
}
