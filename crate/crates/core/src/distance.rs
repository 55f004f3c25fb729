//! Dissimilarities between step densities and pairwise distance matrices.
//!
//! The three integral distances are evaluated exactly on the common refinement
//! of both breakpoint sets, where each density is constant.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ccd::{trig_moments, StepDensity, TrigMoments};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Moment order used by [`DistanceKind::MomentEuclidean`] unless overridden.
pub const DEFAULT_MOMENT_ORDER: usize = 5;

/// Which dissimilarity to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum DistanceKind {
    /// `∫ |f - g|`
    L1,
    /// `sup |f - g|`
    Sup,
    /// `∫ (√f - √g)²`, without the conventional ½ factor.
    HellingerSq,
    /// Euclidean distance between the first `order` moment pairs.
    MomentEuclidean { order: usize },
}

impl DistanceKind {
    pub const ALL_TAGS: [&'static str; 4] = ["l1", "sup", "hellinger", "moments"];

    /// All four kinds, with the given moment order for the moment distance.
    pub fn all(order: usize) -> [DistanceKind; 4] {
        [
            DistanceKind::L1,
            DistanceKind::Sup,
            DistanceKind::HellingerSq,
            DistanceKind::MomentEuclidean { order },
        ]
    }

    /// Short tag used in file names and on the command line.
    pub fn tag(&self) -> &'static str {
        match self {
            DistanceKind::L1 => "l1",
            DistanceKind::Sup => "sup",
            DistanceKind::HellingerSq => "hellinger",
            DistanceKind::MomentEuclidean { .. } => "moments",
        }
    }

    /// Parses a tag; the moment order applies to `moments` only.
    pub fn from_tag(tag: &str, order: usize) -> Option<Self> {
        match tag {
            "l1" => Some(DistanceKind::L1),
            "sup" => Some(DistanceKind::Sup),
            "hellinger" => Some(DistanceKind::HellingerSq),
            "moments" => Some(DistanceKind::MomentEuclidean { order }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistanceKind::MomentEuclidean { order: 0 } => Err(Error::ZeroMomentOrder),
            _ => Ok(()),
        }
    }

    /// Distance between two densities.
    pub fn distance(&self, f: &StepDensity, g: &StepDensity) -> Result<f64> {
        match *self {
            DistanceKind::L1 => Ok(dist_l1(f, g)),
            DistanceKind::Sup => Ok(dist_sup(f, g)),
            DistanceKind::HellingerSq => Ok(dist_hellinger_sq(f, g)),
            DistanceKind::MomentEuclidean { order } => dist_moment_euclidean(f, g, order),
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceKind::MomentEuclidean { order } => write!(f, "moments(r={order})"),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for DistanceKind {
    type Err = String;

    /// Accepts a bare tag or `moments(r=N)` / `moments:N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(order) = s
            .strip_prefix("moments(r=")
            .and_then(|rest| rest.strip_suffix(')'))
            .or_else(|| s.strip_prefix("moments:"))
        {
            let order = order
                .parse()
                .map_err(|_| format!("invalid moment order in `{s}`"))?;
            return Ok(DistanceKind::MomentEuclidean { order });
        }
        DistanceKind::from_tag(s, DEFAULT_MOMENT_ORDER)
            .ok_or_else(|| format!("unknown distance `{s}`"))
    }
}

/// Common refinement of two step densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub breakpoints: Vec<f64>,
    /// `(f height, g height)` on each refined interval.
    pub heights: Vec<(f64, f64)>,
}

impl Refinement {
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.heights)
            .map(|(w, &(hf, hg))| (w[1] - w[0], hf, hg))
    }
}

/// Sorted union of both breakpoint sets, with the height of each density on
/// every resulting interval.
pub fn merge_breakpoints(f: &StepDensity, g: &StepDensity) -> Refinement {
    let (bf, hf) = (f.breakpoints(), f.heights());
    let (bg, hg) = (g.breakpoints(), g.heights());
    let mut breakpoints = Vec::with_capacity(bf.len() + bg.len());
    let mut heights = Vec::with_capacity(hf.len() + hg.len());
    breakpoints.push(0.0);
    // i, k index the next breakpoint (interval end) of f and g.
    let (mut i, mut k) = (1, 1);
    while i < bf.len() && k < bg.len() {
        let pair = (hf[i - 1], hg[k - 1]);
        let end = bf[i].min(bg[k]);
        breakpoints.push(end);
        heights.push(pair);
        if bf[i] == end {
            i += 1;
        }
        if bg[k] == end {
            k += 1;
        }
    }
    Refinement {
        breakpoints,
        heights,
    }
}

/// `∫ |f - g|` over the circle.
pub fn dist_l1(f: &StepDensity, g: &StepDensity) -> f64 {
    let r = merge_breakpoints(f, g);
    compensated_sum(r.pieces().map(|(len, a, b)| (a - b).abs() * len))
}

/// `sup |f - g|` over the circle.
pub fn dist_sup(f: &StepDensity, g: &StepDensity) -> f64 {
    let r = merge_breakpoints(f, g);
    r.pieces()
        .map(|(_, a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// `∫ (√f - √g)²` over the circle.
pub fn dist_hellinger_sq(f: &StepDensity, g: &StepDensity) -> f64 {
    let r = merge_breakpoints(f, g);
    compensated_sum(r.pieces().map(|(len, a, b)| {
        let d = a.sqrt() - b.sqrt();
        d * d * len
    }))
}

/// Euclidean distance between `(α(1), β(1), …, α(r), β(r))` of both densities.
pub fn dist_moment_euclidean(f: &StepDensity, g: &StepDensity, r: usize) -> Result<f64> {
    let mf = trig_moments(f, r)?;
    let mg = trig_moments(g, r)?;
    Ok(moment_distance(&mf, &mg))
}

fn moment_distance(a: &TrigMoments, b: &TrigMoments) -> f64 {
    a.pairs()
        .iter()
        .zip(b.pairs())
        .map(|(&(a1, b1), &(a2, b2))| {
            let (da, db) = (a1 - a2, b1 - b2);
            da * da + db * db
        })
        .sum::<f64>()
        .sqrt()
}

/// Symmetric matrix of pairwise dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    /// `None` for matrices that did not come from a density distance.
    kind: Option<DistanceKind>,
    entries: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    /// Validates and wraps a square matrix.
    ///
    /// Requires at least two unique labels, exact symmetry, a zero diagonal
    /// and finite nonnegative entries.
    #[allow(clippy::needless_range_loop)]
    pub fn new(labels: Vec<String>, entries: Vec<Vec<f64>>, kind: Option<DistanceKind>) -> Result<Self> {
        let m = labels.len();
        let bad = |msg: String| Err(Error::InvalidMatrix(msg));
        if m < 2 {
            return bad(format!("need at least 2 labels, got {m}"));
        }
        check_unique(&labels)?;
        if entries.len() != m || entries.iter().any(|row| row.len() != m) {
            return bad(format!("entries are not {m}×{m}"));
        }
        for i in 0..m {
            if entries[i][i] != 0.0 {
                return bad(format!("diagonal entry {i} is {}", entries[i][i]));
            }
            for k in 0..m {
                let v = entries[i][k];
                if !v.is_finite() || v < 0.0 {
                    return bad(format!("entry ({i}, {k}) = {v} is negative or not finite"));
                }
                if v != entries[k][i] {
                    return bad(format!("entries ({i}, {k}) and ({k}, {i}) differ"));
                }
            }
        }
        Ok(DistanceMatrix {
            labels,
            kind,
            entries,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> Option<DistanceKind> {
        self.kind
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[i][k]
    }

    /// Same matrix with rows and columns reordered: new index `i` is old
    /// index `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        DistanceMatrix {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            kind: self.kind,
            entries: order
                .iter()
                .map(|&i| order.iter().map(|&k| self.entries[i][k]).collect())
                .collect(),
        }
    }
}

pub(crate) fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// Pairwise distances between densities.
///
/// Each unordered pair is computed once, in parallel; the result does not
/// depend on scheduling.
pub fn distance_matrix(
    densities: &[StepDensity],
    labels: &[String],
    kind: DistanceKind,
) -> Result<DistanceMatrix> {
    let m = densities.len();
    if labels.len() != m {
        return Err(Error::InvalidMatrix(format!(
            "{} labels for {m} densities",
            labels.len()
        )));
    }
    if m < 2 {
        return Err(Error::InvalidMatrix(format!("need at least 2 densities, got {m}")));
    }
    check_unique(labels)?;
    kind.validate()?;

    let moments: Option<Vec<TrigMoments>> = match kind {
        DistanceKind::MomentEuclidean { order } => Some(
            densities
                .par_iter()
                .map(|d| trig_moments(d, order))
                .collect::<Result<_>>()?,
        ),
        _ => None,
    };

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |k| (i, k)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, k)| match (&moments, kind) {
            (Some(ms), _) => moment_distance(&ms[i], &ms[k]),
            (None, DistanceKind::L1) => dist_l1(&densities[i], &densities[k]),
            (None, DistanceKind::Sup) => dist_sup(&densities[i], &densities[k]),
            (None, _) => dist_hellinger_sq(&densities[i], &densities[k]),
        })
        .collect();

    let mut entries = vec![vec![0.0; m]; m];
    for (&(i, k), &v) in pairs.iter().zip(&values) {
        entries[i][k] = v;
        entries[k][i] = v;
    }
    Ok(DistanceMatrix {
        labels: labels.to_vec(),
        kind: Some(kind),
        entries,
    })
}
