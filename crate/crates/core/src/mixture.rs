//! Hard instances: a design embedded in `R^n` by a random orthonormal
//! projection, sampled as a mixture of linear classifiers.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{min_separation, WeightedDesign};
use crate::error::{Error, Result};
use crate::numeric::{dot, mean_and_stderr, pairwise_sum, sign};
use crate::rng::{self, Purpose, StreamRng, CHUNK};

/// An `m × n` matrix with orthonormal rows drawn from the Haar measure on
/// the Stiefel manifold.
///
/// A Gaussian `n × m` matrix is QR-factorized and the columns of `Q` are
/// flipped so that `R` has a positive diagonal, which makes the factor
/// unique and the distribution rotation invariant.
pub fn random_projection(m: usize, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "projection needs 1 ≤ m ≤ n, got m={m}, n={n}"
        )));
    }
    let mut rng = rng::stream(seed, Purpose::Projection, 0);
    let entries = rng::gaussian_vector(&mut rng, n * m);
    let g = DMatrix::from_row_slice(n, m, &entries);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut rows = vec![vec![0.0; n]; m];
    for (j, row) in rows.iter_mut().enumerate() {
        let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        for (i, v) in row.iter_mut().enumerate() {
            *v = s * q[(i, j)];
        }
    }
    Ok(rows)
}

/// `max |U Uᵀ − I|`.
pub fn orthonormality_defect(u: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in u.iter().enumerate() {
        for (j, b) in u.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample<'a> {
    pub x: &'a [f64],
    pub y: i8,
}

/// Samples stored row-major: `xs[i*n..(i+1)*n]` is the covariate of label
/// `ys[i] ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<i8>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn get(&self, i: usize) -> LabeledSample<'_> {
        LabeledSample {
            x: &self.xs[i * self.n..(i + 1) * self.n],
            y: self.ys[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = LabeledSample<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// CSV with header `x_1,…,x_n,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.n).map(|i| format!("x_{i}")).collect();
        header.push("y".into());
        w.write_record(&header).map_err(csv_err)?;
        let mut row = Vec::with_capacity(self.n + 1);
        for s in self.iter() {
            row.clear();
            row.extend(s.x.iter().map(|v| v.to_string()));
            row.push(s.y.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    fn concat(n: usize, parts: Vec<(Vec<f64>, Vec<i8>)>) -> Self {
        let mut xs = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
        let mut ys = Vec::with_capacity(parts.iter().map(|p| p.1.len()).sum());
        for (x, y) in parts {
            xs.extend(x);
            ys.extend(y);
        }
        SampleBatch { n, xs, ys }
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// The distribution `D_U`: `x ∼ N(0, I_n)`, component `ℓ` with probability
/// `w_ℓ`, label `sign(⟨Uᵀv_ℓ, x⟩)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureInstance {
    pub n: usize,
    pub m: usize,
    /// `m` rows of length `n`.
    pub projection: Vec<Vec<f64>>,
    pub design: WeightedDesign,
    /// Hidden directions `Uᵀv_ℓ`.
    pub directions: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Invariant checks of an instance, as stored in its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceChecks {
    pub orthonormality_defect: f64,
    /// `max |‖Uᵀvᵢ ± Uᵀvⱼ‖ − ‖vᵢ ± vⱼ‖|` over pairs.
    pub isometry_defect: f64,
    pub separation: Option<f64>,
}

impl MixtureInstance {
    /// Embeds `design` with a seeded Haar projection.
    pub fn build(design: &WeightedDesign, n: usize, seed: u64) -> Result<Self> {
        let u = random_projection(design.dim(), n, seed)?;
        Self::with_projection(design, u, seed)
    }

    pub fn with_projection(design: &WeightedDesign, projection: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let m = design.dim();
        if projection.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: projection.len(),
            });
        }
        let n = projection[0].len();
        if projection.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("ragged projection".into()));
        }
        let directions = design
            .points()
            .iter()
            .map(|v| {
                (0..n)
                    .map(|j| (0..m).map(|i| v[i] * projection[i][j]).sum())
                    .collect()
            })
            .collect();
        let inst = MixtureInstance {
            n,
            m,
            projection,
            design: design.clone(),
            directions,
            seed,
        };
        inst.validate(1e-10)?;
        Ok(inst)
    }

    pub fn checks(&self) -> InstanceChecks {
        let pts = self.design.points();
        let mut iso: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for s in [-1.0, 1.0] {
                    let hidden = distance(&pts[i], &pts[j], s);
                    let lifted = distance(&self.directions[i], &self.directions[j], s);
                    iso = iso.max((hidden - lifted).abs());
                }
            }
        }
        InstanceChecks {
            orthonormality_defect: orthonormality_defect(&self.projection),
            isometry_defect: iso,
            separation: min_separation(&self.directions).ok(),
        }
    }

    /// Re-checks `UUᵀ = I` and pairwise distance preservation.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.directions.len() != self.design.len()
            || self.design.dim() != self.m
            || self.directions.iter().any(|d| d.len() != self.n)
        {
            return Err(Error::InvalidDesign("instance does not match its design".into()));
        }
        let c = self.checks();
        if !(c.orthonormality_defect <= tol) {
            return Err(Error::InvalidDesign(format!(
                "projection rows are not orthonormal (defect {:e})",
                c.orthonormality_defect
            )));
        }
        if !(c.isometry_defect <= tol) {
            return Err(Error::InvalidDesign(format!(
                "embedding changes pairwise distances by {:e}",
                c.isometry_defect
            )));
        }
        Ok(())
    }

    /// `g(Ux) = Σ w_ℓ sign(v_ℓᵀUx) = E[y | x]`.
    pub fn conditional_mean(&self, x: &[f64]) -> f64 {
        self.directions
            .iter()
            .zip(self.design.weights())
            .map(|(d, w)| w * sign(dot(d, x)))
            .sum()
    }

    fn draw_component(&self, rng: &mut StreamRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let w = self.design.weights();
        for (i, wi) in w.iter().enumerate() {
            acc += wi;
            if u < acc {
                return i;
            }
        }
        // u landed in the rounding gap above the last partial sum
        w.iter().rposition(|&v| v > 0.0).unwrap_or(0)
    }

    /// `count` labeled samples; covariates and components come from
    /// separate streams, one pair per chunk.
    pub fn sample(&self, count: usize, seed: u64) -> SampleBatch {
        let parts = (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| self.sample_chunk(seed, c, CHUNK.min(count - c * CHUNK)))
            .collect();
        SampleBatch::concat(self.n, parts)
    }

    pub(crate) fn sample_chunk(&self, seed: u64, chunk: usize, len: usize) -> (Vec<f64>, Vec<i8>) {
        let n = self.n;
        let mut xr = rng::stream(seed, Purpose::Covariates, chunk as u64);
        let mut lr = rng::stream(seed, Purpose::Components, chunk as u64);
        let mut xs = Vec::with_capacity(len * n);
        let mut ys = Vec::with_capacity(len);
        for _ in 0..len {
            let x = rng::gaussian_vector(&mut xr, n);
            let l = self.draw_component(&mut lr);
            ys.push(sign(dot(&self.directions[l], &x)) as i8);
            xs.extend(x);
        }
        (xs, ys)
    }

    /// Monte-Carlo estimate of `d_TV(D_U, N_n × U{±1}) = E|g(Ux)|/2` with
    /// its standard error.
    pub fn tv_lower_estimate(&self, mc_count: usize, seed: u64) -> Result<(f64, f64)> {
        if mc_count == 0 {
            return Err(Error::InvalidArgument("need at least one Monte-Carlo sample".into()));
        }
        let n = self.n;
        let values = rng::chunked(seed, Purpose::TvEstimate, mc_count, |rng| {
            let x = rng::gaussian_vector(rng, n);
            0.5 * self.conditional_mean(&x).abs()
        });
        Ok(mean_and_stderr(&values))
    }
}

fn distance(a: &[f64], b: &[f64], s: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x + s * y).powi(2)).sum::<f64>().sqrt()
}

pub fn build_instance(design: &WeightedDesign, n: usize, seed: u64) -> Result<MixtureInstance> {
    MixtureInstance::build(design, n, seed)
}

pub fn conditional_mean(instance: &MixtureInstance, x: &[f64]) -> f64 {
    instance.conditional_mean(x)
}

pub fn sample(instance: &MixtureInstance, count: usize, seed: u64) -> SampleBatch {
    instance.sample(count, seed)
}

/// `x ∼ N(0, I_n)` with an independent uniform label.
pub fn null_sample(n: usize, count: usize, seed: u64) -> SampleBatch {
    let parts = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| null_chunk(n, seed, c, CHUNK.min(count - c * CHUNK)))
        .collect();
    SampleBatch::concat(n, parts)
}

pub(crate) fn null_chunk(n: usize, seed: u64, chunk: usize, len: usize) -> (Vec<f64>, Vec<i8>) {
    let mut xr = rng::stream(seed, Purpose::Covariates, chunk as u64);
    let mut yr = rng::stream(seed, Purpose::NullLabels, chunk as u64);
    let mut xs = Vec::with_capacity(len * n);
    let mut ys = Vec::with_capacity(len);
    for _ in 0..len {
        xs.extend(rng::gaussian_vector(&mut xr, n));
        ys.push(if yr.random::<bool>() { 1 } else { -1 });
    }
    (xs, ys)
}

pub fn tv_lower_estimate(instance: &MixtureInstance, mc_count: usize, seed: u64) -> Result<(f64, f64)> {
    instance.tv_lower_estimate(mc_count, seed)
}

/// Mean of `y` over a batch.
pub fn label_mean(batch: &SampleBatch) -> f64 {
    let ys: Vec<f64> = batch.ys.iter().map(|&y| y as f64).collect();
    pairwise_sum(&ys) / ys.len().max(1) as f64
}
