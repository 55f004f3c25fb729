//! Synthetic contour-distance datasets with known group structure.
//!
//! Each group has a smooth periodic radius profile
//! `r(θ) = 1 + Σ a_h cos(hθ + φ_h)` with a strong first harmonic, so every
//! instance has a well-defined mean direction. Instances are sampled at a
//! random resolution, scaled by a random factor, cyclically shifted and
//! perturbed by multiplicative Gaussian noise.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ccd::CcdSequence;
use crate::error::{Error, Result};
use crate::io::Dataset;

const HARMONICS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub groups: usize,
    pub per_group: usize,
    /// Inclusive range of trace lengths.
    pub min_len: usize,
    pub max_len: usize,
    /// Standard deviation of the multiplicative noise factor.
    pub noise: f64,
    /// Apply a random cyclic shift to every trace.
    pub rotate: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            groups: 4,
            per_group: 5,
            min_len: 500,
            max_len: 4000,
            noise: 0.02,
            rotate: true,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.groups == 0 || self.per_group == 0 {
            return fail("groups and per_group must be at least 1".into());
        }
        if self.min_len < 2 || self.min_len > self.max_len {
            return fail(format!(
                "length range {}..={} must satisfy 2 <= min <= max",
                self.min_len, self.max_len
            ));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return fail(format!("noise level {} must be finite and nonnegative", self.noise));
        }
        Ok(())
    }
}

/// Radius profile of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    /// `(amplitude, phase)` for harmonics 1..=HARMONICS.
    terms: Vec<(f64, f64)>,
}

impl Template {
    fn random(rng: &mut impl Rng, signature: usize) -> Self {
        let mut terms: Vec<(f64, f64)> = (1..=HARMONICS)
            .map(|h| {
                let amp = if h == 1 {
                    rng.random_range(0.25..0.4)
                } else {
                    rng.random_range(0.0..0.12) / (h as f64 - 1.0).sqrt()
                };
                (amp, rng.random_range(0.0..TAU))
            })
            .collect();
        terms[signature].0 += 0.2;
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if total > 0.9 {
            let rest: f64 = total - terms[0].0;
            let scale = (0.9 - terms[0].0) / rest;
            for t in &mut terms[1..] {
                t.0 *= scale;
            }
        }
        // Fix the first harmonic's phase; instances are rotated anyway.
        terms[0].1 = 0.0;
        Template { terms }
    }

    pub fn radius(&self, theta: f64) -> f64 {
        1.0 + self
            .terms
            .iter()
            .enumerate()
            .map(|(i, &(a, phi))| a * ((i + 1) as f64 * theta + phi).cos())
            .sum::<f64>()
    }
}

/// Generates a dataset; groups are named `G1, G2, …` and ids `G<g>.<nnn>`.
pub fn generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let templates: Vec<Template> = (0..config.groups)
        .map(|g| Template::random(&mut rng, 1 + g % (HARMONICS - 1)))
        .collect();

    let mut sequences = Vec::with_capacity(config.groups * config.per_group);
    let mut groups = Vec::with_capacity(sequences.capacity());
    for (g, template) in templates.iter().enumerate() {
        let group = format!("G{}", g + 1);
        for i in 0..config.per_group {
            let n = rng.random_range(config.min_len..=config.max_len);
            let scale = rng.random_range(0.5f64.ln()..500f64.ln()).exp();
            let shift = if config.rotate { rng.random_range(0..n) } else { 0 };
            let mut values: Vec<f64> = (1..=n)
                .map(|j| {
                    let theta = TAU * j as f64 / n as f64;
                    let z: f64 = rng.sample(StandardNormal);
                    (scale * template.radius(theta) * (1.0 + config.noise * z)).max(0.0)
                })
                .collect();
            values.rotate_left(shift);
            sequences.push(CcdSequence::new(format!("{group}.{:03}", i + 1), values)?);
            groups.push(Some(group.clone()));
        }
    }
    Dataset::new(sequences, groups)
}
