//! Agglomerative hierarchical clustering over a [`DistanceMatrix`].
//!
//! Node ids `0..m` are the leaves; the merge performed at step `s` creates
//! node `m + s`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Inter-cluster distance rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    /// Largest pairwise distance across the two clusters.
    #[default]
    Complete,
    /// Smallest pairwise distance.
    Single,
    /// Mean pairwise distance.
    Average,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [Linkage::Complete, Linkage::Single, Linkage::Average];

    pub fn name(&self) -> &'static str {
        match self {
            Linkage::Complete => "complete",
            Linkage::Single => "single",
            Linkage::Average => "average",
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete" => Ok(Linkage::Complete),
            "single" => Ok(Linkage::Single),
            "average" => Ok(Linkage::Average),
            _ => Err(format!("unknown linkage `{s}`")),
        }
    }
}

/// One merge step. `left < right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Checks that the merges form one binary tree over all labels.
    pub fn new(labels: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let m = labels.len();
        let bad = |msg: String| Err(Error::InvalidDendrogram(msg));
        if m < 2 {
            return bad(format!("need at least 2 leaves, got {m}"));
        }
        if merges.len() != m - 1 {
            return bad(format!("{} merges for {m} leaves", merges.len()));
        }
        let mut sizes = vec![1usize; m];
        let mut used = vec![false; 2 * m - 1];
        for (step, mg) in merges.iter().enumerate() {
            let id = m + step;
            for child in [mg.left, mg.right] {
                if child >= id {
                    return bad(format!("merge {step} refers to node {child} before it exists"));
                }
                if std::mem::replace(&mut used[child], true) {
                    return bad(format!("node {child} is merged twice"));
                }
            }
            if mg.left == mg.right {
                return bad(format!("merge {step} joins node {} with itself", mg.left));
            }
            let size = sizes[mg.left] + sizes[mg.right];
            if size != mg.size {
                return bad(format!("merge {step} has size {} instead of {size}", mg.size));
            }
            if !mg.height.is_finite() || mg.height < 0.0 {
                return bad(format!("merge {step} has invalid height {}", mg.height));
            }
            sizes.push(size);
        }
        Ok(Dendrogram { labels, merges })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn root(&self) -> usize {
        2 * self.labels.len() - 2
    }

    /// Height of a node; leaves sit at 0.
    pub fn height(&self, node: usize) -> f64 {
        let m = self.labels.len();
        if node < m {
            0.0
        } else {
            self.merges[node - m].height
        }
    }

    /// Children of an internal node, smaller subtree-minimum leaf first.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        let m = self.labels.len();
        if node < m {
            return None;
        }
        let mg = &self.merges[node - m];
        let (a, b) = (mg.left, mg.right);
        if self.min_leaf(a) <= self.min_leaf(b) {
            Some((a, b))
        } else {
            Some((b, a))
        }
    }

    fn min_leaf(&self, node: usize) -> usize {
        let m = self.labels.len();
        let mut stack = vec![node];
        let mut best = usize::MAX;
        while let Some(n) = stack.pop() {
            if n < m {
                best = best.min(n);
            } else {
                let mg = &self.merges[n - m];
                stack.push(mg.left);
                stack.push(mg.right);
            }
        }
        best
    }

    /// Leaf indices under a node, in ascending order.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let m = self.labels.len();
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if n < m {
                out.push(n);
            } else {
                let mg = &self.merges[n - m];
                stack.push(mg.left);
                stack.push(mg.right);
            }
        }
        out.sort_unstable();
        out
    }

    /// Leaves in drawing order: depth-first, smaller subtree-minimum first.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.labels.len());
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            match self.children(n) {
                None => out.push(n),
                Some((first, second)) => {
                    stack.push(second);
                    stack.push(first);
                }
            }
        }
        out
    }
}

/// Runs agglomerative clustering.
///
/// At each step the pair of active clusters with the smallest linkage
/// distance is merged; ties go to the lexicographically smallest
/// `(smaller id, larger id)`. Cluster distances are updated with the
/// Lance–Williams recurrences.
pub fn agglomerate(dm: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let m = dm.len();
    let total = 2 * m - 1;
    let mut dist = vec![vec![f64::NAN; total]; total];
    for (i, row) in dm.entries().iter().enumerate() {
        dist[i][..m].copy_from_slice(row);
    }
    let mut size = vec![1usize; total];
    let mut active: Vec<usize> = (0..m).collect();
    let mut merges = Vec::with_capacity(m - 1);

    for step in 0..m - 1 {
        let mut best = (0, 1, f64::INFINITY);
        for (ai, &a) in active.iter().enumerate() {
            for (bi, &b) in active.iter().enumerate().skip(ai + 1) {
                if dist[a][b] < best.2 {
                    best = (ai, bi, dist[a][b]);
                }
            }
        }
        let (ai, bi, height) = best;
        // These linkages are reducible, so heights never decrease beyond
        // rounding in the average update. Checked, never clamped.
        debug_assert!(
            merges.last().is_none_or(|p: &Merge| height >= p.height - 1e-12 * p.height.abs()),
            "merge heights decreased at step {step}"
        );
        let (a, b) = (active[ai], active[bi]);
        let id = m + step;
        size[id] = size[a] + size[b];
        for &c in &active {
            if c == a || c == b {
                continue;
            }
            let (da, db) = (dist[a][c], dist[b][c]);
            let d = match linkage {
                Linkage::Complete => da.max(db),
                Linkage::Single => da.min(db),
                Linkage::Average => {
                    let (na, nb) = (size[a] as f64, size[b] as f64);
                    (na * da + nb * db) / (na + nb)
                }
            };
            dist[id][c] = d;
            dist[c][id] = d;
        }
        active.remove(bi);
        active.remove(ai);
        active.push(id);
        merges.push(Merge {
            left: a,
            right: b,
            height,
            size: size[id],
        });
    }

    Ok(Dendrogram {
        labels: dm.labels().to_vec(),
        merges,
    })
}

/// Flat clustering into `k` groups by undoing the last `k - 1` merges.
///
/// Returns one cluster number per leaf; clusters are numbered in order of
/// their smallest leaf index.
pub fn cut(dend: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let m = dend.leaves();
    if k == 0 || k > m {
        return Err(Error::CutOutOfRange { k, m });
    }
    let mut parent: Vec<usize> = (0..2 * m - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, mg) in dend.merges()[..m - k].iter().enumerate() {
        let id = m + step;
        let ra = find(&mut parent, mg.left);
        let rb = find(&mut parent, mg.right);
        parent[ra] = id;
        parent[rb] = id;
    }
    let mut numbering = HashMap::new();
    Ok((0..m)
        .map(|leaf| {
            let root = find(&mut parent, leaf);
            let next = numbering.len();
            *numbering.entry(root).or_insert(next)
        })
        .collect())
}

/// Newick text for a dendrogram.
///
/// Branch lengths are parent height minus child height, so every leaf sits at
/// the depth of the root height.
pub fn to_newick(dend: &Dendrogram) -> String {
    let mut out = String::new();
    write_node(dend, dend.root(), &mut out);
    out.push(';');
    out
}

fn write_node(dend: &Dendrogram, node: usize, out: &mut String) {
    match dend.children(node) {
        None => out.push_str(&newick_label(&dend.labels()[node])),
        Some((first, second)) => {
            let h = dend.height(node);
            out.push('(');
            write_node(dend, first, out);
            let _ = write!(out, ":{}", h - dend.height(first));
            out.push(',');
            write_node(dend, second, out);
            let _ = write!(out, ":{}", h - dend.height(second));
            out.push(')');
        }
    }
}

fn newick_label(label: &str) -> String {
    let needs_quotes = label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || "()[]':;,".contains(c));
    if needs_quotes {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Adjusted Rand index between two partitions of the same items.
///
/// Returns 1 for identical partitions, including the degenerate case where
/// both put everything in one cluster or everything in singletons.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "partitions cover different item counts");
    let n = a.len();
    let pairs = |x: usize| (x * x.saturating_sub(1) / 2) as f64;
    let mut joint: HashMap<(&A, &B), usize> = HashMap::new();
    let mut rows: HashMap<&A, usize> = HashMap::new();
    let mut cols: HashMap<&B, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        return if index == max_index { 1.0 } else { 0.0 };
    }
    (index - expected) / (max_index - expected)
}
