//! Sampling and storage of the random nested square family.
//!
//! A realization is stored level by level. Each retained square records only
//! its digit pair relative to its parent plus the offset of its children in
//! the next level's array, so a node costs six bytes and absolute coordinates
//! are rebuilt while walking. Only retained squares are stored; discarded
//! subtrees cost nothing.

use std::fmt::Write as _;

use crate::code::SquareCode;
use crate::error::{PerclabError, Result};
use crate::matrix::ProbabilityMatrix;
use crate::rng;

/// One retained square: digit pair packed as `di * M + dj`, and the start of
/// its child block in the next level (children of consecutive nodes are
/// consecutive, so `child_start` of the next node closes the block).
#[derive(Debug, Clone, Copy)]
struct Node {
    digit_pair: u16,
    child_start: u32,
}

#[derive(Debug, Clone, Default)]
struct Level {
    nodes: Vec<Node>,
    /// one past the last child block; equals next level's length
    child_end: u32,
}

/// A sampled realization of the nested construction down to `depth`.
///
/// Immutable after sampling; a pure function of `(matrix, depth, seed)`.
#[derive(Debug, Clone)]
pub struct RealizationTree {
    matrix: ProbabilityMatrix,
    depth: usize,
    seed: u64,
    levels: Vec<Level>,
}

impl RealizationTree {
    pub fn matrix(&self) -> &ProbabilityMatrix {
        &self.matrix
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of retained squares at level `n`.
    pub fn level_count(&self, n: usize) -> Result<usize> {
        self.check_level(n)?;
        Ok(self.levels[n].nodes.len())
    }

    pub fn counts_per_level(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.nodes.len()).collect()
    }

    /// The realization survives to its full depth iff the deepest level is
    /// nonempty.
    pub fn survives(&self) -> bool {
        self.levels[self.depth].nodes.iter().len() > 0
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n > self.depth {
            return Err(PerclabError::LevelOutOfRange {
                requested: n,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// Visits every retained level-`n` square as packed corner coordinates
    /// `(ix, iy)` in units of M^-n, in construction order.
    pub fn visit_level<F: FnMut(u64, u64)>(&self, n: usize, mut f: F) -> Result<()> {
        self.check_level(n)?;
        let m = self.matrix.m() as u64;
        // iterative DFS carrying rebuilt coordinates
        let mut stack: Vec<(usize, u32, u64, u64)> = vec![(0, 0, 0, 0)];
        while let Some((level, index, ix, iy)) = stack.pop() {
            if level == n {
                f(ix, iy);
                continue;
            }
            let (start, end) = self.child_range(level, index);
            for child in (start..end).rev() {
                let node = self.levels[level + 1].nodes[child as usize];
                let di = (node.digit_pair / self.matrix.m() as u16) as u64;
                let dj = (node.digit_pair % self.matrix.m() as u16) as u64;
                stack.push((level + 1, child, ix * m + di, iy * m + dj));
            }
        }
        Ok(())
    }

    /// The retained level-`n` codes.
    pub fn level_codes(&self, n: usize) -> Result<Vec<SquareCode>> {
        let mut out = Vec::with_capacity(self.levels.get(n).map_or(0, |l| l.nodes.len()));
        let m = self.matrix.m();
        self.visit_level(n, |ix, iy| out.push(SquareCode::from_packed(m, n, ix, iy)))?;
        Ok(out)
    }

    #[inline]
    pub(crate) fn child_range(&self, level: usize, index: u32) -> (u32, u32) {
        let l = &self.levels[level];
        let start = l.nodes[index as usize].child_start;
        let end = l
            .nodes
            .get(index as usize + 1)
            .map_or(l.child_end, |next| next.child_start);
        (start, end)
    }

    #[inline]
    pub(crate) fn node_digits(&self, level: usize, index: u32) -> (u64, u64) {
        let node = self.levels[level].nodes[index as usize];
        let m = self.matrix.m() as u16;
        ((node.digit_pair / m) as u64, (node.digit_pair % m) as u64)
    }

    /// Locates a code by descending its digit path; `None` if not retained.
    fn find_node(&self, code: &SquareCode) -> Option<(usize, u32)> {
        if code.level() > self.depth || code.m() != self.matrix.m() {
            return None;
        }
        let di = code.digits_i();
        let dj = code.digits_j();
        let mut level = 0usize;
        let mut index = 0u32;
        for k in 0..code.level() {
            let (start, end) = self.child_range(level, index);
            let mut found = None;
            for child in start..end {
                let (ci, cj) = self.node_digits(level + 1, child);
                if ci == di[k] as u64 && cj == dj[k] as u64 {
                    found = Some(child);
                    break;
                }
            }
            index = found?;
            level += 1;
        }
        Some((level, index))
    }

    /// Is the code retained in this realization?
    pub fn contains_code(&self, code: &SquareCode) -> bool {
        self.find_node(code).is_some()
    }

    /// Number of retained children of `code`, or `None` when the code itself
    /// is not retained (or its children exceed the depth).
    pub fn children_of(&self, code: &SquareCode) -> Option<usize> {
        if code.level() + 1 > self.depth {
            return None;
        }
        let (level, index) = self.find_node(code)?;
        let (start, end) = self.child_range(level, index);
        Some((end - start) as usize)
    }

    /// Line-based text dump: a format header, a parameter line, then one code
    /// per line as `level<TAB>i-digits<TAB>j-digits` with comma-joined digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("# perclab-tree v1\n");
        let _ = writeln!(
            out,
            "# m={} depth={} seed={}",
            self.matrix.m(),
            self.depth,
            self.seed
        );
        for n in 0..=self.depth {
            let m = self.matrix.m();
            self.visit_level(n, |ix, iy| {
                let code = SquareCode::from_packed(m, n, ix, iy);
                let di: Vec<String> = code.digits_i().iter().map(|d| d.to_string()).collect();
                let dj: Vec<String> = code.digits_j().iter().map(|d| d.to_string()).collect();
                let _ = writeln!(out, "{}\t{}\t{}", n, di.join(","), dj.join(","));
            })
            .expect("level within depth");
        }
        out
    }
}

/// Samples a realization. Each child of a retained square is retained
/// independently with its matrix probability; the draw is keyed on
/// `(seed, child address)` so identical inputs give identical trees.
pub fn sample_tree(matrix: &ProbabilityMatrix, depth: usize, seed: u64) -> RealizationTree {
    let m = matrix.m();
    let mut levels = Vec::with_capacity(depth + 1);
    levels.push(Level {
        nodes: vec![Node {
            digit_pair: 0,
            child_start: 0,
        }],
        child_end: 0,
    });

    // coordinates of the current level's nodes, in node order
    let mut coords: Vec<(u64, u64)> = vec![(0, 0)];

    for level in 0..depth {
        let mut next_nodes: Vec<Node> = Vec::new();
        let mut next_coords: Vec<(u64, u64)> = Vec::new();
        for (node_idx, &(ix, iy)) in coords.iter().enumerate() {
            levels[level].nodes[node_idx].child_start = next_nodes.len() as u32;
            for di in 0..m {
                for dj in 0..m {
                    let p = matrix.prob(di, dj);
                    if p <= 0.0 {
                        continue;
                    }
                    let cx = ix * m as u64 + di as u64;
                    let cy = iy * m as u64 + dj as u64;
                    if rng::square_unit(seed, level as u32 + 1, cx, cy) < p {
                        next_nodes.push(Node {
                            digit_pair: (di * m + dj) as u16,
                            child_start: 0,
                        });
                        next_coords.push((cx, cy));
                    }
                }
            }
        }
        levels[level].child_end = next_nodes.len() as u32;
        levels.push(Level {
            nodes: next_nodes,
            child_end: 0,
        });
        coords = next_coords;
        if coords.is_empty() {
            // extinct: remaining levels are empty
            for _ in level + 1..depth {
                levels.push(Level::default());
            }
            break;
        }
    }
    while levels.len() < depth + 1 {
        levels.push(Level::default());
    }

    RealizationTree {
        matrix: matrix.clone(),
        depth,
        seed,
        levels,
    }
}

/// Depth-first survival probe: does the realization `(matrix, seed)` have a
/// retained square at `depth`? Explores the same Bernoulli field as
/// [`sample_tree`] (the draws are keyed by square address), but short-circuits
/// on the first surviving path and never materializes the tree, so it is
/// usable at depths where the supercritical tree itself would be astronomical.
pub fn survives_to_depth(matrix: &ProbabilityMatrix, depth: usize, seed: u64) -> bool {
    fn descend(matrix: &ProbabilityMatrix, seed: u64, level: u32, ix: u64, iy: u64, depth: u32) -> bool {
        if level == depth {
            return true;
        }
        let m = matrix.m();
        for di in 0..m {
            for dj in 0..m {
                let p = matrix.prob(di, dj);
                if p <= 0.0 {
                    continue;
                }
                let cx = ix * m as u64 + di as u64;
                let cy = iy * m as u64 + dj as u64;
                if rng::square_unit(seed, level + 1, cx, cy) < p
                    && descend(matrix, seed, level + 1, cx, cy, depth)
                {
                    return true;
                }
            }
        }
        false
    }
    descend(matrix, seed, 0, 0, 0, depth as u32)
}

/// Parses the text-dump format back into the retained code list per level.
/// Used by the CLI for rendering from a dump; invalid lines are rejected.
pub fn parse_dump(text: &str) -> Result<(usize, usize, u64, Vec<Vec<SquareCode>>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some("# perclab-tree v1") => {}
        other => {
            return Err(PerclabError::Config(format!(
                "bad tree dump header: {other:?}"
            )))
        }
    }
    let meta = lines
        .next()
        .ok_or_else(|| PerclabError::Config("missing tree dump metadata line".into()))?;
    let mut m = 0usize;
    let mut depth = 0usize;
    let mut seed = 0u64;
    for part in meta.trim_start_matches('#').split_whitespace() {
        if let Some(v) = part.strip_prefix("m=") {
            m = v.parse().map_err(|_| PerclabError::Config("bad m".into()))?;
        } else if let Some(v) = part.strip_prefix("depth=") {
            depth = v
                .parse()
                .map_err(|_| PerclabError::Config("bad depth".into()))?;
        } else if let Some(v) = part.strip_prefix("seed=") {
            seed = v
                .parse()
                .map_err(|_| PerclabError::Config("bad seed".into()))?;
        }
    }
    let mut levels: Vec<Vec<SquareCode>> = vec![Vec::new(); depth + 1];
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let level: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PerclabError::Config(format!("bad dump line: {line}")))?;
        let parse_digits = |s: &str| -> Result<Vec<u8>> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|d| {
                    d.parse::<u8>()
                        .map_err(|_| PerclabError::Config(format!("bad digit in line: {line}")))
                })
                .collect()
        };
        let di = parse_digits(parts.next().unwrap_or(""))?;
        let dj = parse_digits(parts.next().unwrap_or(""))?;
        if level > depth {
            return Err(PerclabError::Config(format!(
                "dump line level {level} exceeds depth {depth}"
            )));
        }
        levels[level].push(SquareCode::from_digits(m, &di, &dj)?);
    }
    Ok((m, depth, seed, levels))
}
