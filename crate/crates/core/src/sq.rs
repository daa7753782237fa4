//! Simulated statistical-query oracle and low-degree Hermite
//! distinguishers.
//!
//! A distinguisher asks for `E[y·H_J(x)]` for every normalized Hermite
//! product `H_J` with `|J| ≤ D`. Under the null (`y` independent of `x`)
//! each answer has mean 0 and, per sample, variance exactly 1, so
//! `z_J = √B · answer` is a standard score. Per-degree aggregates combine
//! the `z_J` of one degree through the `χ²` upper tail. Detection uses a
//! 3σ threshold with a Bonferroni correction over all statistics of a
//! report, fixed before any data are drawn.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::design::WeightedDesign;
use crate::error::{Error, Result};
use crate::hermite::design_hermite_correlation;
use crate::mixture::{csv_err, null_chunk, MixtureInstance};
use crate::numeric::{dot, norm, pairwise_sum, pairwise_sum_rows};
use crate::poly::{MonomialSet, MultiIndex};
use crate::rng::{child_seed, CHUNK};

/// Per-query failure probability of the sampled oracle.
pub const ORACLE_FAILURE_PROBABILITY: f64 = 1e-6;
/// Two-sided tail of a 3σ event.
pub const THREE_SIGMA_ALPHA: f64 = 0.0027;

/// Hoeffding tolerance of a `[−1, 1]` query averaged over `budget` samples
/// at failure probability [`ORACLE_FAILURE_PROBABILITY`].
pub fn hoeffding_tolerance(budget: u64) -> f64 {
    (2.0 * (2.0 / ORACLE_FAILURE_PROBABILITY).ln() / budget as f64).sqrt()
}

/// Smallest budget whose Hoeffding tolerance is at most `tau`.
pub fn hoeffding_budget(tau: f64) -> u64 {
    (2.0 * (2.0 / ORACLE_FAILURE_PROBABILITY).ln() / (tau * tau)).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Answers are empirical means over `budget` fresh samples.
    Sampled,
    /// Answers are exact expectations moved by at most `τ` toward the
    /// null's answer.
    Adversarial,
}

impl std::str::FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampled" => Ok(OracleMode::Sampled),
            "adversarial" => Ok(OracleMode::Adversarial),
            other => Err(Error::InvalidArgument(format!(
                "unknown oracle mode {other:?} (expected sampled or adversarial)"
            ))),
        }
    }
}

impl std::fmt::Display for OracleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleMode::Sampled => "sampled",
            OracleMode::Adversarial => "adversarial",
        })
    }
}

/// `STAT(τ)` oracle settings. `budget` and `tau` are tied by the Hoeffding
/// bound in both modes; in adversarial mode the budget only scales
/// z-scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatOracleConfig {
    pub tau: f64,
    pub budget: u64,
    pub mode: OracleMode,
    pub seed: u64,
}

impl StatOracleConfig {
    pub fn sampled(budget: u64, seed: u64) -> Self {
        StatOracleConfig {
            tau: hoeffding_tolerance(budget),
            budget,
            mode: OracleMode::Sampled,
            seed,
        }
    }

    pub fn adversarial(tau: f64, seed: u64) -> Self {
        StatOracleConfig {
            tau,
            budget: hoeffding_budget(tau),
            mode: OracleMode::Adversarial,
            seed,
        }
    }

    pub fn with_mode(budget: u64, mode: OracleMode, seed: u64) -> Self {
        StatOracleConfig {
            mode,
            ..Self::sampled(budget, seed)
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        StatOracleConfig { seed, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 || !(self.tau > 0.0) {
            return Err(Error::InvalidArgument("oracle needs a positive budget and tolerance".into()));
        }
        Ok(())
    }
}

/// The distribution an oracle answers about.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Instance(&'a MixtureInstance),
    /// `N(0, I_n) × U{±1}`.
    Null { n: usize },
}

impl Source<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Source::Instance(i) => i.n,
            Source::Null { n } => *n,
        }
    }

    fn chunk(&self, seed: u64, c: usize, len: usize) -> (Vec<f64>, Vec<i8>) {
        match self {
            Source::Instance(i) => i.sample_chunk(seed, c, len),
            Source::Null { n } => null_chunk(*n, seed, c, len),
        }
    }

    /// `E[y H_J(x)]`.
    pub fn hermite_expectation(&self, j: &MultiIndex) -> f64 {
        match self {
            Source::Instance(i) => design_hermite_correlation(&i.directions, i.design.weights(), j),
            Source::Null { .. } => 0.0,
        }
    }
}

/// A bounded query `f(x, y)`.
pub enum Query<'q> {
    Constant(f64),
    /// `f = y`.
    Label,
    /// `f = y · sign(uᵀx)`.
    LabelTimesHalfspace(Vec<f64>),
    Custom(Box<dyn Fn(&[f64], f64) -> f64 + Sync + 'q>),
}

impl Query<'_> {
    fn eval(&self, x: &[f64], y: f64) -> f64 {
        match self {
            Query::Constant(c) => *c,
            Query::Label => y,
            Query::LabelTimesHalfspace(u) => y * crate::numeric::sign(dot(u, x)),
            Query::Custom(f) => f(x, y),
        }
    }

    /// Exact expectation, when one is available in closed form.
    pub fn expectation(&self, source: &Source<'_>) -> Option<f64> {
        match (self, source) {
            (Query::Constant(c), _) => Some(*c),
            (Query::Label, _) => Some(0.0),
            (Query::LabelTimesHalfspace(_), Source::Null { .. }) => Some(0.0),
            (Query::LabelTimesHalfspace(u), Source::Instance(inst)) => {
                let un = norm(u);
                if un == 0.0 {
                    // sign(0) = +1, so the query is y itself
                    return Some(0.0);
                }
                let terms: Vec<f64> = inst
                    .directions
                    .iter()
                    .zip(inst.design.weights())
                    .map(|(d, w)| {
                        // angle via half-chords, accurate near 0 and π
                        let (mut minus, mut plus) = (0.0, 0.0);
                        for (a, b) in d.iter().zip(u) {
                            minus += (a - b / un).powi(2);
                            plus += (a + b / un).powi(2);
                        }
                        let angle = 2.0 * minus.sqrt().atan2(plus.sqrt());
                        w * (1.0 - 2.0 * angle / PI)
                    })
                    .collect();
                Some(pairwise_sum(&terms))
            }
            (Query::Custom(_), _) => None,
        }
    }
}

/// An oracle bound to one source; each query gets its own random stream.
pub struct StatOracle<'a> {
    source: Source<'a>,
    config: StatOracleConfig,
    issued: u64,
}

impl<'a> StatOracle<'a> {
    pub fn new(source: Source<'a>, config: StatOracleConfig) -> Result<Self> {
        config.validate()?;
        Ok(StatOracle {
            source,
            config,
            issued: 0,
        })
    }

    pub fn queries_issued(&self) -> u64 {
        self.issued
    }

    pub fn query(&mut self, q: &Query<'_>) -> Result<f64> {
        let index = self.issued;
        self.issued += 1;
        match self.config.mode {
            OracleMode::Adversarial => {
                let truth = q.expectation(&self.source).ok_or(Error::NoExactExpectation)?;
                let null = q.expectation(&Source::Null { n: self.source.dim() }).ok_or(Error::NoExactExpectation)?;
                Ok(toward_null(truth, null, self.config.tau))
            }
            OracleMode::Sampled => self.sampled(q, child_seed(self.config.seed, index)),
        }
    }

    fn sampled(&self, q: &Query<'_>, seed: u64) -> Result<f64> {
        let budget = self.config.budget as usize;
        let n = self.source.dim();
        let parts: Vec<Result<(f64, bool)>> = (0..budget.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let len = CHUNK.min(budget - c * CHUNK);
                let (xs, ys) = self.source.chunk(seed, c, len);
                let mut clamped = false;
                let mut vals = Vec::with_capacity(len);
                for (i, &y) in ys.iter().enumerate() {
                    let v = q.eval(&xs[i * n..(i + 1) * n], y as f64);
                    if !v.is_finite() {
                        return Err(Error::UnboundedQuery(v));
                    }
                    if v.abs() > 1.0 {
                        clamped = true;
                    }
                    vals.push(v.clamp(-1.0, 1.0));
                }
                Ok((pairwise_sum(&vals), clamped))
            })
            .collect();
        let mut sums = Vec::with_capacity(parts.len());
        let mut clamped = false;
        for p in parts {
            let (s, c) = p?;
            sums.push(s);
            clamped |= c;
        }
        if clamped {
            warn!("query values outside [-1, 1] were clamped");
        }
        Ok(pairwise_sum(&sums) / budget as f64)
    }
}

/// The answer within `tau` of `truth` closest to `null`.
fn toward_null(truth: f64, null: f64, tau: f64) -> f64 {
    let gap = truth - null;
    if gap.abs() <= tau {
        null
    } else {
        truth - tau * gap.signum()
    }
}

/// One query to a fresh oracle.
pub fn stat_query(source: Source<'_>, q: &Query<'_>, config: &StatOracleConfig) -> Result<f64> {
    StatOracle::new(source, *config)?.query(q)
}

/// Normalized Hermite products `H_J`, `|J| ≤ D`, in degree then graded-lex
/// order. Each `J` is built from its parent (the same index with its last
/// nonzero coordinate cleared) times one univariate factor.
#[derive(Debug, Clone)]
pub struct HermiteFamily {
    n: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
    parent: Vec<usize>,
    coord: Vec<usize>,
    power: Vec<usize>,
}

impl HermiteFamily {
    pub fn new(n: usize, max_degree: u32) -> Self {
        let mut indices = Vec::new();
        for s in 0..=max_degree {
            indices.extend(MonomialSet::new(s, n).to_multi_indices());
        }
        let lookup: HashMap<&[u32], usize> = indices.iter().enumerate().map(|(i, j)| (j.exponents(), i)).collect();
        let mut parent = vec![0; indices.len()];
        let mut coord = vec![0; indices.len()];
        let mut power = vec![0; indices.len()];
        for (f, j) in indices.iter().enumerate().skip(1) {
            let last = j.exponents().iter().rposition(|&e| e > 0).expect("nonzero index");
            let mut p = j.exponents().to_vec();
            p[last] = 0;
            parent[f] = lookup[p.as_slice()];
            coord[f] = last;
            power[f] = j.exponents()[last] as usize;
        }
        HermiteFamily {
            n,
            max_degree,
            indices,
            parent,
            coord,
            power,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// `Σᵢ yᵢ H_J(xᵢ)` for every `J`, over row-major samples.
    pub fn label_sums(&self, xs: &[f64], ys: &[i8]) -> Vec<f64> {
        const BLOCK: usize = 64;
        let n = self.n;
        let levels = self.max_degree as usize + 1;
        let f = self.len();
        let mut acc = vec![0.0; f];
        let mut feat = vec![0.0; f * BLOCK];
        let mut h = vec![0.0; n * levels * BLOCK];
        let mut yv = [0.0; BLOCK];
        for start in (0..ys.len()).step_by(BLOCK) {
            let len = BLOCK.min(ys.len() - start);
            for s in 0..BLOCK {
                yv[s] = if s < len { ys[start + s] as f64 } else { 0.0 };
            }
            for s in 0..len {
                let x = &xs[(start + s) * n..(start + s + 1) * n];
                for (i, &xi) in x.iter().enumerate() {
                    let base = i * levels * BLOCK;
                    let (mut prev, mut cur) = (0.0, 1.0);
                    h[base + s] = 1.0;
                    for k in 1..levels {
                        let kf = (k - 1) as f64;
                        let next = (xi * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
                        prev = cur;
                        cur = next;
                        h[base + k * BLOCK + s] = cur;
                    }
                }
            }
            feat[..BLOCK].fill(1.0);
            for j in 1..f {
                let (head, tail) = feat.split_at_mut(j * BLOCK);
                let src = &head[self.parent[j] * BLOCK..(self.parent[j] + 1) * BLOCK];
                let hb = (self.coord[j] * levels + self.power[j]) * BLOCK;
                let hrow = &h[hb..hb + BLOCK];
                for ((d, a), b) in tail[..BLOCK].iter_mut().zip(src).zip(hrow) {
                    *d = a * b;
                }
            }
            for (j, a) in acc.iter_mut().enumerate() {
                let row = &feat[j * BLOCK..(j + 1) * BLOCK];
                *a += row.iter().zip(&yv).map(|(u, v)| u * v).sum::<f64>();
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// `z_J` of a single query.
    Query,
    /// `χ²` score of all queries of one degree.
    DegreeAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub kind: StatisticKind,
    pub degree: u32,
    /// Multi-index of a query statistic.
    pub index: Option<MultiIndex>,
    /// Oracle answer (query) or sum of squared z-scores (aggregate).
    pub value: f64,
    pub z: f64,
}

impl Statistic {
    /// Evidence against the null: queries are two-sided, aggregates count
    /// only their upper tail.
    pub fn score(&self) -> f64 {
        match self.kind {
            StatisticKind::Query => self.z.abs(),
            StatisticKind::DegreeAggregate => self.z.max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherReport {
    pub degree: u32,
    pub mode: OracleMode,
    pub tau: f64,
    pub budget: u64,
    pub seed: u64,
    pub query_count: usize,
    pub threshold: f64,
    /// Largest detection score: `|z|` of a query, upper-tail `z` of an
    /// aggregate.
    pub max_score: f64,
    pub detected: bool,
    pub statistics: Vec<Statistic>,
}

impl DistinguisherReport {
    /// CSV rows `degree,multi_index,z_score,detect`; aggregates use `*` as
    /// the index.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["degree", "multi_index", "z_score", "detect"]).map_err(csv_err)?;
        for s in &self.statistics {
            let idx = s.index.as_ref().map_or("*".to_string(), |j| j.to_string());
            let detect = s.score() > self.threshold;
            w.write_record([s.degree.to_string(), idx, s.z.to_string(), detect.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `Φ⁻¹(1 − α/(2S))` for `S` statistics.
pub fn bonferroni_threshold(statistics: usize) -> f64 {
    let normal = Normal::standard();
    -normal.inverse_cdf(THREE_SIGMA_ALPHA / (2.0 * statistics.max(1) as f64))
}

/// Standard-normal score of the `χ²_df` upper tail at `x`.
pub fn chi_square_score(x: f64, df: usize) -> f64 {
    let k = df as f64;
    let chi = ChiSquared::new(k).expect("positive degrees of freedom");
    let sf = chi.sf(x);
    if sf > 0.5 {
        // lower tail, floored where the cdf underflows (x = 0 exactly)
        Normal::standard().inverse_cdf(chi.cdf(x).max(f64::MIN_POSITIVE))
    } else if sf > 1e-300 {
        -Normal::standard().inverse_cdf(sf)
    } else {
        // Wilson-Hilferty once the tail underflows
        let v = 2.0 / (9.0 * k);
        ((x / k).cbrt() - (1.0 - v)) / v.sqrt()
    }
}

/// Queries `y·H_J(x)` for all `|J| ≤ degree` and tests them against the
/// null answer 0.
pub fn lowdeg_distinguisher(source: Source<'_>, degree: u32, config: &StatOracleConfig) -> Result<DistinguisherReport> {
    config.validate()?;
    let family = HermiteFamily::new(source.dim(), degree);
    let b = config.budget as f64;
    let answers: Vec<f64> = match config.mode {
        OracleMode::Sampled => {
            let budget = config.budget as usize;
            let rows: Vec<Vec<f64>> = (0..budget.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    let (xs, ys) = source.chunk(config.seed, c, CHUNK.min(budget - c * CHUNK));
                    family.label_sums(&xs, &ys)
                })
                .collect();
            pairwise_sum_rows(&rows, family.len()).into_iter().map(|s| s / b).collect()
        }
        OracleMode::Adversarial => family
            .indices()
            .iter()
            .map(|j| toward_null(source.hermite_expectation(j), 0.0, config.tau))
            .collect(),
    };
    let mut statistics: Vec<Statistic> = family
        .indices()
        .iter()
        .zip(&answers)
        .map(|(j, &v)| Statistic {
            kind: StatisticKind::Query,
            degree: j.degree(),
            index: Some(j.clone()),
            value: v,
            z: b.sqrt() * v,
        })
        .collect();
    for s in 0..=degree {
        let zs: Vec<f64> = statistics.iter().filter(|st| st.degree == s).map(|st| st.z * st.z).collect();
        let chi = pairwise_sum(&zs);
        statistics.push(Statistic {
            kind: StatisticKind::DegreeAggregate,
            degree: s,
            index: None,
            value: chi,
            z: chi_square_score(chi, zs.len()),
        });
    }
    let threshold = bonferroni_threshold(statistics.len());
    let max_score = statistics.iter().map(Statistic::score).fold(0.0, f64::max);
    Ok(DistinguisherReport {
        degree,
        mode: config.mode,
        tau: config.tau,
        budget: config.budget,
        seed: config.seed,
        query_count: family.len(),
        threshold,
        max_score,
        detected: max_score > threshold,
        statistics,
    })
}

/// What a power experiment is run against.
#[derive(Debug, Clone)]
pub enum PowerFamily {
    /// Fresh random embeddings of a design into `R^n`.
    Design { design: WeightedDesign, n: usize },
    Null { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub degree: u32,
    pub runs: usize,
    pub detections: usize,
    pub rate: f64,
}

/// Detection rate per degree over `runs` seeded runs. Run `i` uses
/// instance seed `child(child(seed, i), 0)` and oracle seed
/// `child(child(seed, i), 1)` for every degree.
pub fn power_curve(family: &PowerFamily, degrees: &[u32], runs: usize, config: &StatOracleConfig) -> Result<Vec<PowerRow>> {
    let mut counts = vec![0usize; degrees.len()];
    if degrees.is_empty() {
        return Ok(vec![]);
    }
    for run in 0..runs {
        let run_seed = child_seed(config.seed, run as u64);
        let oracle = config.with_seed(child_seed(run_seed, 1));
        let instance = match family {
            PowerFamily::Design { design, n } => Some(MixtureInstance::build(design, *n, child_seed(run_seed, 0))?),
            PowerFamily::Null { .. } => None,
        };
        let source = match (&instance, family) {
            (Some(i), _) => Source::Instance(i),
            (None, PowerFamily::Null { n }) | (None, PowerFamily::Design { n, .. }) => Source::Null { n: *n },
        };
        for (c, &d) in counts.iter_mut().zip(degrees) {
            if lowdeg_distinguisher(source, d, &oracle)?.detected {
                *c += 1;
            }
        }
    }
    Ok(degrees
        .iter()
        .zip(counts)
        .map(|(&degree, detections)| PowerRow {
            degree,
            runs,
            detections,
            rate: if runs == 0 { 0.0 } else { detections as f64 / runs as f64 },
        })
        .collect())
}

/// CSV `degree,runs,detections,rate`.
pub fn write_power_csv<W: Write>(rows: &[PowerRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["degree", "runs", "detections", "rate"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.degree.to_string(), r.runs.to_string(), r.detections.to_string(), r.rate.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
