//! Centroid contour distance traces as piecewise-constant circular densities.
//!
//! A trace `y_1..y_n` is read as samples on the uniform angular grid
//! `x_j = 2πj/n`. The density is `y_j / (2π ȳ)` on `(x_{j-1}, x_j]`, which
//! removes the scale of the trace. Rotation is removed by shifting the density
//! so its mean direction sits at angle zero.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, wrap_angle, CompensatedSum};

/// Tolerance on the total mass of a [`StepDensity`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Resultant lengths at or below this value are treated as isotropic: the
/// mean direction is undefined and no rotation is applied.
pub const ISOTROPY_THRESHOLD: f64 = 1e-12;

/// A raw centroid contour distance trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdSequence {
    id: String,
    values: Vec<f64>,
}

impl CcdSequence {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if values.len() < 2 {
            return Err(Error::TooShort {
                id,
                len: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidValue { id, index, value });
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::AllZero { id });
        }
        Ok(CcdSequence { id, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Angle `2πj/n` of the j-th grid point, `j = 0..=n`. The last point is
    /// exactly `2π`.
    pub fn grid_angle(&self, j: usize) -> f64 {
        grid_angle(j, self.values.len())
    }

    /// Copy with every value multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        CcdSequence::new(self.id.clone(), self.values.iter().map(|v| v * k).collect())
    }

    /// Copy whose trace starts `s` positions later, wrapping around.
    pub fn cyclic_shift(&self, s: usize) -> Self {
        let mut values = self.values.clone();
        let n = values.len();
        values.rotate_left(s % n);
        CcdSequence {
            id: self.id.clone(),
            values,
        }
    }

    fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

fn grid_angle(j: usize, n: usize) -> f64 {
    if j == n {
        TAU
    } else {
        TAU * j as f64 / n as f64
    }
}

/// Piecewise-constant probability density on `(0, 2π]`.
///
/// Interval `k` is `(breakpoints[k], breakpoints[k + 1]]` with height
/// `heights[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDensity {
    source: String,
    /// Total rotation applied so far, in `[0, 2π)`.
    rotation: f64,
    /// Set when normalization found no defined mean direction.
    isotropic: bool,
    breakpoints: Vec<f64>,
    heights: Vec<f64>,
}

impl StepDensity {
    /// Builds a density from explicit breakpoints and heights, checking every
    /// structural invariant and the unit total mass.
    pub fn new(source: impl Into<String>, breakpoints: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidDensity(msg));
        if heights.is_empty() || breakpoints.len() != heights.len() + 1 {
            return invalid(format!(
                "{} breakpoints for {} heights",
                breakpoints.len(),
                heights.len()
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != TAU {
            return invalid("support must start at 0 and end at 2π exactly".into());
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0] || w[1].is_nan()) {
            return invalid("breakpoints must be strictly increasing".into());
        }
        if heights.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return invalid("heights must be finite and nonnegative".into());
        }
        let density = StepDensity {
            source: source.into(),
            rotation: 0.0,
            isotropic: false,
            breakpoints,
            heights,
        };
        let mass = density.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return invalid(format!("total mass {mass} differs from 1"));
        }
        Ok(density)
    }

    /// The uniform density `1/(2π)`.
    pub fn uniform(source: impl Into<String>) -> Self {
        StepDensity {
            source: source.into(),
            rotation: 0.0,
            isotropic: false,
            breakpoints: vec![0.0, TAU],
            heights: vec![1.0 / TAU],
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Number of constant pieces.
    pub fn intervals(&self) -> usize {
        self.heights.len()
    }

    /// Iterator over `(start, end, height)` triples.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.heights)
            .map(|(w, &h)| (w[0], w[1], h))
    }

    pub fn mass(&self) -> f64 {
        compensated_sum(self.pieces().map(|(a, b, h)| h * (b - a)))
    }

    /// Density value at angle `t`, taken modulo 2π.
    pub fn eval(&self, t: f64) -> f64 {
        let t = wrap_angle(t);
        let k = self.breakpoints.partition_point(|&b| b < t);
        self.heights[k.clamp(1, self.heights.len()) - 1]
    }
}

/// Builds the scale-free density of a trace on its uniform grid.
pub fn density_from_ccd(seq: &CcdSequence) -> StepDensity {
    let n = seq.len();
    let mean = seq.mean();
    StepDensity {
        source: seq.id.clone(),
        rotation: 0.0,
        isotropic: false,
        breakpoints: (0..=n).map(|j| grid_angle(j, n)).collect(),
        heights: seq.values.iter().map(|y| y / mean / TAU).collect(),
    }
}

/// First `r` cosine/sine moment pairs of a circular density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigMoments {
    pairs: Vec<(f64, f64)>,
}

impl TrigMoments {
    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// `E[cos(pT)]`, with `p` starting at 1.
    pub fn alpha(&self, p: usize) -> f64 {
        self.pairs[p - 1].0
    }

    /// `E[sin(pT)]`, with `p` starting at 1.
    pub fn beta(&self, p: usize) -> f64 {
        self.pairs[p - 1].1
    }

    pub fn resultant(&self, p: usize) -> f64 {
        let (a, b) = self.pairs[p - 1];
        a.hypot(b)
    }

    /// Flattened `(α(1), β(1), …, α(r), β(r))`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}

/// Exact trigonometric moments of a step density.
///
/// On a piece `(a, b]` with height `h`,
/// `∫ h cos(pt) dt = 2h cos(p(a+b)/2) sin(p(b-a)/2) / p` and
/// `∫ h sin(pt) dt = 2h sin(p(a+b)/2) sin(p(b-a)/2) / p`;
/// the product form avoids cancellation on short pieces.
pub fn trig_moments(d: &StepDensity, r: usize) -> Result<TrigMoments> {
    if r == 0 {
        return Err(Error::ZeroMomentOrder);
    }
    let pairs = (1..=r)
        .map(|p| {
            let p = p as f64;
            let mut alpha = CompensatedSum::default();
            let mut beta = CompensatedSum::default();
            for (a, b, h) in d.pieces() {
                if h == 0.0 {
                    continue;
                }
                let (sin_mid, cos_mid) = (0.5 * p * (a + b)).sin_cos();
                let w = 2.0 * h * (0.5 * p * (b - a)).sin() / p;
                alpha.add(w * cos_mid);
                beta.add(w * sin_mid);
            }
            (alpha.value(), beta.value())
        })
        .collect();
    Ok(TrigMoments { pairs })
}

/// Mean direction of a density together with its resultant length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanDirection {
    /// Angle in `(0, 2π]`; `0` when the direction is undefined.
    pub angle: f64,
    pub resultant: f64,
    pub defined: bool,
}

/// Mean direction from the first moment pair.
///
/// The angle is the quadrant-aware inverse tangent of `β/α` mapped into
/// `(0, 2π]`. A resultant at or below [`ISOTROPY_THRESHOLD`] yields an
/// undefined direction with angle 0.
pub fn mean_direction(d: &StepDensity) -> MeanDirection {
    let m = trig_moments(d, 1).expect("order 1 is valid");
    let (alpha, beta) = m.pairs[0];
    let resultant = alpha.hypot(beta);
    if resultant <= ISOTROPY_THRESHOLD {
        return MeanDirection {
            angle: 0.0,
            resultant,
            defined: false,
        };
    }
    let mut angle = beta.atan2(alpha);
    if angle <= 0.0 {
        angle += TAU;
    }
    MeanDirection {
        angle,
        resultant,
        defined: true,
    }
}

/// Returns `g(t) = d(t + mu)`, the law of `T - mu`, re-expressed on `(0, 2π]`.
///
/// The piece straddling `mu` is split in two so that the breakpoints start at
/// 0 and end at exactly 2π.
pub fn rotate_density(d: &StepDensity, mu: f64) -> StepDensity {
    let mut shift = mu.rem_euclid(TAU);
    if shift >= TAU {
        shift = 0.0;
    }
    let rotation = {
        let r = (d.rotation + mu).rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    };
    if shift == 0.0 {
        return StepDensity {
            rotation,
            ..d.clone()
        };
    }

    let bp = &d.breakpoints;
    let hs = &d.heights;
    let k_last = hs.len();
    // Piece j (1-based) is (bp[j-1], bp[j]] and contains the shift point.
    let j = bp.partition_point(|&b| b < shift);
    let tail = TAU - shift;

    let mut breakpoints = Vec::with_capacity(bp.len() + 1);
    let mut heights = Vec::with_capacity(hs.len() + 1);
    breakpoints.push(0.0);
    let mut push = |end: f64, h: f64| {
        let end = end.min(TAU);
        if end > *breakpoints.last().unwrap() {
            breakpoints.push(end);
            heights.push(h);
        }
    };
    if bp[j] > shift {
        push(bp[j] - shift, hs[j - 1]);
    }
    for k in j + 1..=k_last {
        push(bp[k] - shift, hs[k - 1]);
    }
    for k in 1..j {
        push(bp[k] + tail, hs[k - 1]);
    }
    push(TAU, hs[j - 1]);

    StepDensity {
        source: d.source.clone(),
        rotation,
        isotropic: d.isotropic,
        breakpoints,
        heights,
    }
}

/// Scale and rotation normalization of a trace.
///
/// Isotropic densities are left unrotated and flagged.
pub fn normalize_leaf(seq: &CcdSequence) -> StepDensity {
    let density = density_from_ccd(seq);
    let dir = mean_direction(&density);
    if dir.defined {
        rotate_density(&density, dir.angle)
    } else {
        StepDensity {
            isotropic: true,
            ..density
        }
    }
}

/// A leaf silhouette in Cartesian coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafOutline {
    pub id: String,
    pub points: Vec<(f64, f64)>,
}

/// Converts the polar pairs `(x_j, c y_j)` of a trace into Cartesian points.
///
/// With `rotated` set, angles are shifted back by the mean direction, the
/// same rotation [`normalize_leaf`] applies.
pub fn leaf_outline(seq: &CcdSequence, rotated: bool) -> LeafOutline {
    let density = density_from_ccd(seq);
    let mu = if rotated {
        mean_direction(&density).angle
    } else {
        0.0
    };
    let points = density
        .heights
        .iter()
        .enumerate()
        .map(|(i, &radius)| {
            let mut x = seq.grid_angle(i + 1);
            if mu != 0.0 {
                x = wrap_angle(x - mu);
            }
            let (s, c) = x.sin_cos();
            (radius * c, radius * s)
        })
        .collect();
    LeafOutline {
        id: seq.id.clone(),
        points,
    }
}
