//! Reference implementations used as test oracles. Nothing here calls into
//! the code paths it is used to check.
#![allow(dead_code)]

use std::f64::consts::TAU;

use leafdens_core::{rotate_density, CcdSequence, DistanceMatrix, Linkage, StepDensity};
use rand::Rng;

/// Total number of quadrature panels spread over the circle.
pub const PANELS: usize = 1_000_000;

pub fn random_sequence(rng: &mut impl Rng, min_len: usize, max_len: usize) -> CcdSequence {
    let n = rng.random_range(min_len..=max_len);
    let values = (0..n)
        .map(|_| 100.0 - rng.random_range(0.0..100.0))
        .collect();
    CcdSequence::new("r", values).unwrap()
}

/// A density on an irregular grid: a random trace rotated by a random angle.
pub fn random_density(rng: &mut impl Rng, min_len: usize, max_len: usize) -> StepDensity {
    let d = leafdens_core::density_from_ccd(&random_sequence(rng, min_len, max_len));
    rotate_density(&d, rng.random_range(0.0..TAU))
}

/// Height of a step function at `t` in (0, 2π], by direct search.
pub fn step_at(breakpoints: &[f64], heights: &[f64], t: f64) -> f64 {
    for k in 0..heights.len() {
        if t > breakpoints[k] && t <= breakpoints[k + 1] {
            return heights[k];
        }
    }
    panic!("{t} outside the support");
}

/// Midpoint panels aligned with the given breakpoints, about `PANELS` in
/// total. Yields `(midpoint, width)`.
pub fn aligned_panels(breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(PANELS + breakpoints.len());
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let count = ((PANELS as f64 * (b - a) / TAU).round() as usize).max(1);
        let width = (b - a) / count as f64;
        for i in 0..count {
            out.push((a + (i as f64 + 0.5) * width, width));
        }
    }
    out
}

/// `(∫ f cos(pt), ∫ f sin(pt))` for p = 1..=r by composite midpoint rule.
pub fn quadrature_moments(d: &StepDensity, r: usize) -> Vec<(f64, f64)> {
    let mut acc = vec![(0.0, 0.0); r];
    let (bp, hs) = (d.breakpoints(), d.heights());
    for k in 0..hs.len() {
        let h = hs[k];
        if h == 0.0 {
            continue;
        }
        let (a, b) = (bp[k], bp[k + 1]);
        let count = ((PANELS as f64 * (b - a) / TAU).round() as usize).max(1);
        let width = (b - a) / count as f64;
        for i in 0..count {
            let t = a + (i as f64 + 0.5) * width;
            let (s1, c1) = t.sin_cos();
            // Chebyshev recurrence for cos(pt), sin(pt).
            let (mut c_prev, mut s_prev) = (1.0, 0.0);
            let (mut c, mut s) = (c1, s1);
            for slot in acc.iter_mut() {
                slot.0 += h * c * width;
                slot.1 += h * s * width;
                let c_next = 2.0 * c1 * c - c_prev;
                let s_next = 2.0 * c1 * s - s_prev;
                c_prev = c;
                s_prev = s;
                c = c_next;
                s = s_next;
            }
        }
    }
    acc
}

fn union_breakpoints(f: &StepDensity, g: &StepDensity) -> Vec<f64> {
    let mut all: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// `(∫|f-g|, sup|f-g|, ∫(√f-√g)²)` sampled at panel midpoints.
pub fn grid_distances(f: &StepDensity, g: &StepDensity) -> (f64, f64, f64) {
    let panels = aligned_panels(&union_breakpoints(f, g));
    let (mut l1, mut sup, mut hel) = (0.0, 0.0f64, 0.0);
    let mut fk = 0;
    let mut gk = 0;
    for (t, w) in panels {
        // Panels are sorted, so walk both step functions forward.
        while f.breakpoints()[fk + 1] < t {
            fk += 1;
        }
        while g.breakpoints()[gk + 1] < t {
            gk += 1;
        }
        let (a, b) = (f.heights()[fk], g.heights()[gk]);
        l1 += (a - b).abs() * w;
        sup = sup.max((a - b).abs());
        let d = a.sqrt() - b.sqrt();
        hel += d * d * w;
    }
    (l1, sup, hel)
}

/// Agglomerative clustering recomputing every linkage from the leaf sets.
/// Returns `(members, height)` per merge, members sorted.
pub fn brute_force_clustering(dm: &DistanceMatrix, linkage: Linkage) -> Vec<(Vec<usize>, f64)> {
    let m = dm.len();
    let mut clusters: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best = (0, 0, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let ds: Vec<f64> = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&k| (i, k)))
                    .map(|(i, k)| dm.get(i, k))
                    .collect();
                let d = match linkage {
                    Linkage::Complete => ds.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    Linkage::Single => ds.iter().copied().fold(f64::INFINITY, f64::min),
                    Linkage::Average => ds.iter().sum::<f64>() / ds.len() as f64,
                };
                if d < best.2 {
                    best = (a, b, d);
                }
            }
        }
        let (a, b, d) = best;
        let right = clusters.remove(b);
        let mut merged = clusters.remove(a);
        merged.extend(right);
        merged.sort_unstable();
        out.push((merged.clone(), d));
        clusters.push(merged);
    }
    out
}

#[allow(clippy::needless_range_loop)]
pub fn random_matrix(rng: &mut impl Rng, m: usize) -> DistanceMatrix {
    let mut e = vec![vec![0.0; m]; m];
    for i in 0..m {
        for k in i + 1..m {
            let v = rng.random_range(0.01..10.0);
            e[i][k] = v;
            e[k][i] = v;
        }
    }
    let labels = (0..m).map(|i| format!("L{i}")).collect();
    DistanceMatrix::new(labels, e, None).unwrap()
}

/// Minimal Newick tree.
#[derive(Debug)]
pub struct NewickNode {
    pub label: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<NewickNode>,
}

/// Recursive-descent Newick parser (quoted labels, branch lengths).
pub fn parse_newick(text: &str) -> NewickNode {
    let chars: Vec<char> = text.trim().chars().collect();
    let mut pos = 0;
    let node = parse_subtree(&chars, &mut pos);
    assert_eq!(chars.get(pos), Some(&';'), "missing terminating semicolon");
    assert_eq!(pos + 1, chars.len(), "trailing text after tree");
    node
}

fn parse_subtree(c: &[char], pos: &mut usize) -> NewickNode {
    let mut children = Vec::new();
    if c[*pos] == '(' {
        *pos += 1;
        loop {
            children.push(parse_subtree(c, pos));
            match c[*pos] {
                ',' => *pos += 1,
                ')' => {
                    *pos += 1;
                    break;
                }
                other => panic!("unexpected `{other}` at {pos}"),
            }
        }
    }
    let label = parse_label(c, pos);
    let length = if c.get(*pos) == Some(&':') {
        *pos += 1;
        let start = *pos;
        while *pos < c.len() && !",);".contains(c[*pos]) {
            *pos += 1;
        }
        Some(c[start..*pos].iter().collect::<String>().parse().unwrap())
    } else {
        None
    };
    NewickNode {
        label,
        length,
        children,
    }
}

fn parse_label(c: &[char], pos: &mut usize) -> Option<String> {
    if c.get(*pos) == Some(&'\'') {
        let mut s = String::new();
        *pos += 1;
        loop {
            if c[*pos] == '\'' {
                if c.get(*pos + 1) == Some(&'\'') {
                    s.push('\'');
                    *pos += 2;
                    continue;
                }
                *pos += 1;
                return Some(s);
            }
            s.push(c[*pos]);
            *pos += 1;
        }
    }
    let start = *pos;
    while *pos < c.len() && !"(),:;".contains(c[*pos]) {
        *pos += 1;
    }
    (start < *pos).then(|| c[start..*pos].iter().collect())
}

/// `(leaf labels sorted, height)` for every internal node, heights measured
/// up from the deepest leaf.
pub fn newick_clades(root: &NewickNode) -> Vec<(Vec<String>, f64)> {
    fn depth_max(n: &NewickNode, acc: f64) -> f64 {
        if n.children.is_empty() {
            acc
        } else {
            n.children
                .iter()
                .map(|c| depth_max(c, acc + c.length.unwrap()))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
    fn walk(n: &NewickNode, depth: f64, total: f64, out: &mut Vec<(Vec<String>, f64)>) -> Vec<String> {
        if n.children.is_empty() {
            return vec![n.label.clone().unwrap()];
        }
        let mut leaves = Vec::new();
        for c in &n.children {
            leaves.extend(walk(c, depth + c.length.unwrap(), total, out));
        }
        leaves.sort();
        out.push((leaves.clone(), total - depth));
        leaves
    }
    let total = depth_max(root, 0.0);
    let mut out = Vec::new();
    walk(root, 0.0, total, &mut out);
    out
}
