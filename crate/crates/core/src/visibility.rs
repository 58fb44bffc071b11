//! Visibility and invisibility graphs of a real-valued series.
//!
//! Node `i` is the `i`-th sample (0-based). A pair `i < j` is visible when
//! every intermediate sample lies strictly below the chord from `(i, y_i)`
//! to `(j, y_j)`; it is invisible (literal mode) when every intermediate
//! sample lies strictly above it. Pairs at distance one are always visible
//! and never invisible.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Vg,
    Ivg,
}

/// How invisibility edges are defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IvgMode {
    /// All intermediate samples strictly above the chord.
    #[default]
    Literal,
    /// Every non-adjacent pair that is not visible.
    Complement,
}

impl std::str::FromStr for IvgMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(IvgMode::Literal),
            "complement" => Ok(IvgMode::Complement),
            other => Err(Error::InvalidParameter(format!("unknown ivg mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for IvgMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IvgMode::Literal => "literal",
            IvgMode::Complement => "complement",
        })
    }
}

/// Number of unordered pairs on `n` nodes.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Row-major position of pair `(i, j)`, `i < j`, in packed upper-triangular
/// storage.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Undirected simple graph over time-indexed nodes, adjacency packed as one
/// bit per unordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityGraph {
    n: usize,
    bits: Vec<u64>,
    edges: usize,
    kind: GraphKind,
    ivg_mode: Option<IvgMode>,
}

impl VisibilityGraph {
    fn empty(n: usize, kind: GraphKind, ivg_mode: Option<IvgMode>) -> Self {
        Self {
            n,
            bits: vec![0; pair_count(n).div_ceil(64)],
            edges: 0,
            kind,
            ivg_mode,
        }
    }

    fn insert(&mut self, i: usize, j: usize) {
        let k = pair_index(self.n, i, j);
        let (word, bit) = (k / 64, k % 64);
        if self.bits[word] >> bit & 1 == 0 {
            self.bits[word] |= 1 << bit;
            self.edges += 1;
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn ivg_mode(&self) -> Option<IvgMode> {
        self.ivg_mode
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b || a >= self.n || b >= self.n {
            return false;
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let k = pair_index(self.n, i, j);
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }

    /// Edges `(i, j)` with `i < j` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
            .enumerate()
            .filter(move |(k, _)| self.bits[k / 64] >> (k % 64) & 1 == 1)
            .map(|(_, p)| p)
    }

    /// Writes `i,j` rows with 1-based node indices.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j"])?;
        for (i, j) in self.edges() {
            w.write_record([(i + 1).to_string(), (j + 1).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_series(y: &[f64]) -> Result<()> {
    if y.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: y.len(),
        });
    }
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Slope of the segment from `j` back to `k < j`, per step of distance.
/// Both builders compare exactly these values, so they agree bit for bit.
#[inline(always)]
fn back_slope(y: &[f64], k: usize, j: usize) -> f64 {
    (y[k] - y[j]) / (j - k) as f64
}

/// Calls `emit(i, j)` for every visible pair.
///
/// For each `j`, the scan walks backward keeping the steepest slope seen so
/// far; `i` is visible from `j` iff its slope beats that maximum. The scan
/// stops once the running prefix maximum cannot clear the current horizon.
pub(crate) fn sweep_visible(y: &[f64], mut emit: impl FnMut(usize, usize)) {
    let n = y.len();
    if n < 2 {
        return;
    }
    let mut prefix_max = Vec::with_capacity(n);
    let mut m = f64::NEG_INFINITY;
    for &v in y {
        m = m.max(v);
        prefix_max.push(m);
    }
    for j in 1..n {
        let yj = y[j];
        emit(j - 1, j);
        let mut s_max = y[j - 1] - yj;
        let mut i = j - 1;
        while i > 0 {
            // every candidate left of i sits at or below prefix_max[i - 1]
            let reach = if s_max >= 0.0 {
                yj + s_max * (j - i + 1) as f64
            } else {
                yj + s_max * j as f64
            };
            let bound = prefix_max[i - 1];
            let margin = 1e-9 * (bound.abs() + reach.abs() + yj.abs());
            if bound < reach - margin {
                break;
            }
            i -= 1;
            let s = back_slope(y, i, j);
            if s > s_max {
                emit(i, j);
                s_max = s;
            }
        }
    }
}

/// Brute-force visibility: each pair checks every intermediate sample.
pub fn vg_build_brute(y: &[f64]) -> Result<VisibilityGraph> {
    check_series(y)?;
    let n = y.len();
    let mut g = VisibilityGraph::empty(n, GraphKind::Vg, None);
    for i in 0..n {
        for j in (i + 1)..n {
            let s_ij = back_slope(y, i, j);
            if ((i + 1)..j).all(|k| back_slope(y, k, j) < s_ij) {
                g.insert(i, j);
            }
        }
    }
    Ok(g)
}

pub fn vg_build(y: &[f64]) -> Result<VisibilityGraph> {
    check_series(y)?;
    let mut g = VisibilityGraph::empty(y.len(), GraphKind::Vg, None);
    sweep_visible(y, |i, j| g.insert(i, j));
    Ok(g)
}

/// Calls `emit(i, j)` for every invisibility edge. Literal mode is the
/// visibility of the negated series, minus adjacent pairs.
pub(crate) fn sweep_invisible(y: &[f64], neg: &mut Vec<f64>, mut emit: impl FnMut(usize, usize)) {
    neg.clear();
    neg.extend(y.iter().map(|v| -v));
    sweep_visible(neg, |i, j| {
        if j - i > 1 {
            emit(i, j)
        }
    });
}

pub fn ivg_build(y: &[f64], mode: IvgMode) -> Result<VisibilityGraph> {
    check_series(y)?;
    let n = y.len();
    let mut g = VisibilityGraph::empty(n, GraphKind::Ivg, Some(mode));
    match mode {
        IvgMode::Literal => {
            let mut neg = Vec::with_capacity(n);
            sweep_invisible(y, &mut neg, |i, j| g.insert(i, j));
        }
        IvgMode::Complement => {
            let vg = vg_build(y)?;
            complement_into(&vg, &mut g);
        }
    }
    Ok(g)
}

fn complement_into(vg: &VisibilityGraph, g: &mut VisibilityGraph) {
    let n = vg.n;
    for i in 0..n {
        for j in (i + 2)..n {
            if !vg.has_edge(i, j) {
                g.insert(i, j);
            }
        }
    }
}

/// Pairwise evaluation of the invisibility criterion.
pub fn ivg_build_brute(y: &[f64], mode: IvgMode) -> Result<VisibilityGraph> {
    check_series(y)?;
    let n = y.len();
    let mut g = VisibilityGraph::empty(n, GraphKind::Ivg, Some(mode));
    match mode {
        IvgMode::Literal => {
            for i in 0..n {
                for j in (i + 2)..n {
                    let s_ij = back_slope(y, i, j);
                    if ((i + 1)..j).all(|k| back_slope(y, k, j) > s_ij) {
                        g.insert(i, j);
                    }
                }
            }
        }
        IvgMode::Complement => {
            let vg = vg_build_brute(y)?;
            complement_into(&vg, &mut g);
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Degrees {
    pub per_node: Vec<usize>,
    /// `2 * edges / n`
    pub mean: f64,
}

pub fn degrees(g: &VisibilityGraph) -> Degrees {
    let mut per_node = vec![0usize; g.n];
    for (i, j) in g.edges() {
        per_node[i] += 1;
        per_node[j] += 1;
    }
    let mean = if g.n == 0 {
        0.0
    } else {
        2.0 * g.edges as f64 / g.n as f64
    };
    Degrees { per_node, mean }
}

/// Exact count of nodes per degree value; `counts[d]` nodes have degree `d`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DegreeHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl DegreeHistogram {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn add(&mut self, degree: usize) {
        if degree >= self.counts.len() {
            self.counts.resize(degree + 1, 0);
        }
        self.counts[degree] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &DegreeHistogram) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
    }

    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let s: u64 = self.counts.iter().enumerate().map(|(d, c)| d as u64 * c).sum();
        s as f64 / self.total as f64
    }

    /// One sample per node, in ascending degree order.
    pub fn expand(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(d, &c)| std::iter::repeat_n(d as f64, c as usize))
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

pub fn degree_histogram(degrees: &[usize]) -> Result<DegreeHistogram> {
    if degrees.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut h = DegreeHistogram::default();
    for &d in degrees {
        h.add(d);
    }
    Ok(h)
}
