//! Monte-Carlo estimation of BICM, DBICM and coded-modulation capacities.
//!
//! All quantities are expectations of `log2` likelihood ratios over
//! `(label, noise)`. One [`CapacityEstimator`] pass draws the noise once and
//! evaluates any number of quantities on the same samples, so estimates taken
//! at different SNRs, under different delay schemes or for different bits
//! share common random numbers. Transmitted labels are stratified: sample `s`
//! sends label `s mod M`, which averages exactly uniformly over every
//! realization of the delayed bits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::channel::NoiseModel;
use crate::constellation::{Constellation, ConstellationKind, DelayScheme};
use crate::math;
use crate::par;
use crate::rng;

/// Samples per independent random stream.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum CapacityError {
    PositionOutOfRange(usize),
    /// The bit is delayed; its capacity is the BICM one.
    DelayedPosition(usize),
    SchemeLength { scheme: usize, bits: usize },
    TooFewSamples(usize),
    /// Target rate not reached inside the SNR bracket.
    Unreachable { target: f64, lo_db: f64, hi_db: f64 },
}

impl fmt::Display for CapacityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PositionOutOfRange(p) => write!(f, "bit position {p} out of range"),
            Self::DelayedPosition(p) => write!(f, "bit position {p} is delayed"),
            Self::SchemeLength { scheme, bits } => {
                write!(f, "delay scheme has {scheme} entries, constellation has {bits} bits")
            }
            Self::TooFewSamples(n) => write!(f, "{n} samples is too few (need >= 1000)"),
            Self::Unreachable { target, lo_db, hi_db } => write!(
                f,
                "capacity {target} not reached between {lo_db} dB and {hi_db} dB"
            ),
        }
    }
}

impl core::error::Error for CapacityError {}

/// A Monte-Carlo estimate in bits with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `self <= other` allowing `k` combined standard errors of slack.
    pub fn le_within(&self, other: &Estimate, k: f64) -> bool {
        self.value <= other.value + k * math::sqrt(self.stderr * self.stderr + other.stderr * other.stderr)
    }

    /// `|self - other|` within `k` combined standard errors.
    pub fn eq_within(&self, other: &Estimate, k: f64) -> bool {
        self.le_within(other, k) && other.le_within(self, k)
    }
}

/// One `log2` ratio inside an expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    /// `I(B_position; Y | B_known)`: the numerator runs over points agreeing
    /// with the sent label on `known_mask`, the denominator additionally on
    /// `position`.
    Bit { position: usize, known_mask: usize },
    /// `I(X; Y)`: whole constellation over the sent point alone.
    Symbol,
}

/// A sum of [`Term`]s evaluated per sample, so its standard error accounts
/// for correlation between the terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    terms: Vec<Term>,
}

impl Query {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn bicm_bit(position: usize) -> Self {
        Self::new(vec![Term::Bit { position, known_mask: 0 }])
    }

    /// Capacity of bit `position` given every bit with a larger delay.
    pub fn scheme_bit(scheme: &DelayScheme, position: usize) -> Self {
        Self::new(vec![Term::Bit {
            position,
            known_mask: scheme.known_mask(position),
        }])
    }

    pub fn scheme_total(scheme: &DelayScheme) -> Self {
        Self::new(
            (0..scheme.len())
                .map(|p| Term::Bit {
                    position: p,
                    known_mask: scheme.known_mask(p),
                })
                .collect(),
        )
    }

    pub fn cm() -> Self {
        Self::new(vec![Term::Symbol])
    }

    fn ceiling(&self, bits: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Bit { .. } => 1.0,
                Term::Symbol => bits as f64,
            })
            .sum()
    }
}

/// Common-random-number Monte-Carlo capacity estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityEstimator {
    samples: usize,
    seed: u64,
}

impl CapacityEstimator {
    pub fn new(samples: usize, seed: u64) -> Result<Self, CapacityError> {
        if samples < 1000 {
            return Err(CapacityError::TooFewSamples(samples));
        }
        Ok(Self { samples, seed })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Evaluates every query on one shared sample set.
    pub fn evaluate(&self, c: &Constellation, nm: NoiseModel, queries: &[Query]) -> Vec<Estimate> {
        let chunks = self.samples.div_ceil(CHUNK);
        let ids: Vec<usize> = (0..chunks).collect();
        let partials = par::map(ids, |chunk| self.run_chunk(c, nm, queries, chunk));
        let mut sum = vec![0.0; queries.len()];
        let mut sum_sq = vec![0.0; queries.len()];
        for (s, sq) in partials {
            for q in 0..queries.len() {
                sum[q] += s[q];
                sum_sq[q] += sq[q];
            }
        }
        let n = self.samples as f64;
        queries
            .iter()
            .enumerate()
            .map(|(q, query)| {
                let mean = sum[q] / n;
                let var = (sum_sq[q] / n - mean * mean).max(0.0) * n / (n - 1.0);
                Estimate {
                    value: query.ceiling(c.bits()) - mean,
                    stderr: math::sqrt(var / n),
                }
            })
            .collect()
    }

    fn run_chunk(
        &self,
        c: &Constellation,
        nm: NoiseModel,
        queries: &[Query],
        chunk: usize,
    ) -> (Vec<f64>, Vec<f64>) {
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(self.samples);
        let mut rng = rng::stream(self.seed, chunk as u64);
        let points = c.points();
        let order = points.len();
        let sigma = nm.sigma();
        let inv_two_sigma2 = 1.0 / (2.0 * nm.sigma2());
        let real_only = c.kind() == ConstellationKind::Pam;

        let mut ll = vec![0.0; order];
        let mut w = vec![0.0; order];
        let mut sum = vec![0.0; queries.len()];
        let mut sum_sq = vec![0.0; queries.len()];

        for s in start..end {
            let sent = s % order;
            let n_re: f64 = rng.sample(StandardNormal);
            let n_im: f64 = rng.sample(StandardNormal);
            let noise = if real_only {
                Complex64::new(sigma * n_re, 0.0)
            } else {
                Complex64::new(sigma * n_re, sigma * n_im)
            };
            let y = points[sent] + noise;
            let mut max = f64::NEG_INFINITY;
            for (j, p) in points.iter().enumerate() {
                let v = -(y - p).norm_sqr() * inv_two_sigma2;
                ll[j] = v;
                if v > max {
                    max = v;
                }
            }
            for j in 0..order {
                w[j] = math::exp(ll[j] - max);
            }
            for (q, query) in queries.iter().enumerate() {
                let mut acc = 0.0;
                for term in &query.terms {
                    acc += log_ratio(term, c, sent, &ll, &w);
                }
                sum[q] += acc;
                sum_sq[q] += acc * acc;
            }
        }
        (sum, sum_sq)
    }
}

/// `log2(num / den)` for one term at one sample.
fn log_ratio(term: &Term, c: &Constellation, sent: usize, ll: &[f64], w: &[f64]) -> f64 {
    let (num_mask, den_mask) = match *term {
        Term::Bit { position, known_mask } => (known_mask, known_mask | c.position_mask(position)),
        Term::Symbol => (0, usize::MAX),
    };
    let num_val = sent & num_mask;
    let den_val = sent & den_mask;
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, &wj) in w.iter().enumerate() {
        if j & num_mask == num_val {
            num += wj;
            if j & den_mask == den_val {
                den += wj;
            }
        }
    }
    if den > 0.0 {
        return math::log2(num / den);
    }
    // every candidate underflowed against the global maximum: redo in log domain
    let lse = |mask: usize, val: usize| {
        let sel: Vec<f64> = (0..ll.len())
            .filter(|&j| j & mask == val)
            .map(|j| ll[j])
            .collect();
        math::log_sum_exp(&sel)
    };
    (lse(num_mask, num_val) - lse(den_mask, den_val)) / math::LN_2
}

fn check_position(c: &Constellation, position: usize) -> Result<(), CapacityError> {
    if position >= c.bits() {
        Err(CapacityError::PositionOutOfRange(position))
    } else {
        Ok(())
    }
}

fn check_scheme(c: &Constellation, scheme: &DelayScheme) -> Result<(), CapacityError> {
    if scheme.len() != c.bits() {
        Err(CapacityError::SchemeLength {
            scheme: scheme.len(),
            bits: c.bits(),
        })
    } else {
        Ok(())
    }
}

/// `C_{i,BICM}`: capacity of bit-channel `position` without side information.
pub fn bicm_bit_capacity(
    c: &Constellation,
    position: usize,
    nm: NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<Estimate, CapacityError> {
    check_position(c, position)?;
    let est = CapacityEstimator::new(samples, seed)?;
    Ok(est.evaluate(c, nm, &[Query::bicm_bit(position)])[0])
}

/// `C^T_{k,DBICM}`: capacity of undelayed bit `position` when the delayed
/// bits of the same symbol are known.
pub fn dbicm_bit_capacity(
    c: &Constellation,
    position: usize,
    scheme: &DelayScheme,
    nm: NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<Estimate, CapacityError> {
    check_position(c, position)?;
    check_scheme(c, scheme)?;
    if scheme.delay(position) != 0 {
        return Err(CapacityError::DelayedPosition(position));
    }
    let est = CapacityEstimator::new(samples, seed)?;
    Ok(est.evaluate(c, nm, &[Query::scheme_bit(scheme, position)])[0])
}

/// Capacity of any bit under `scheme`: conditioned on every position with a
/// strictly larger delay. Equals [`dbicm_bit_capacity`] for undelayed bits
/// and [`bicm_bit_capacity`] for maximally delayed ones.
pub fn scheme_bit_capacity(
    c: &Constellation,
    position: usize,
    scheme: &DelayScheme,
    nm: NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<Estimate, CapacityError> {
    check_position(c, position)?;
    check_scheme(c, scheme)?;
    let est = CapacityEstimator::new(samples, seed)?;
    Ok(est.evaluate(c, nm, &[Query::scheme_bit(scheme, position)])[0])
}

/// `C^T_DBICM`: sum of the per-bit capacities under `scheme`.
pub fn dbicm_capacity(
    c: &Constellation,
    scheme: &DelayScheme,
    nm: NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<Estimate, CapacityError> {
    check_scheme(c, scheme)?;
    let est = CapacityEstimator::new(samples, seed)?;
    Ok(est.evaluate(c, nm, &[Query::scheme_total(scheme)])[0])
}

/// `C_BICM`.
pub fn bicm_capacity(
    c: &Constellation,
    nm: NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<Estimate, CapacityError> {
    dbicm_capacity(c, &DelayScheme::zeros(c.bits()), nm, samples, seed)
}

/// Constellation-constrained capacity `I(X; Y)` with uniform inputs.
pub fn cm_capacity(
    c: &Constellation,
    nm: NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<Estimate, CapacityError> {
    let est = CapacityEstimator::new(samples, seed)?;
    Ok(est.evaluate(c, nm, &[Query::cm()])[0])
}

/// Per-bit and aggregate capacities of one scheme over an SNR grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapacityReport {
    pub constellation: String,
    pub scheme: DelayScheme,
    /// Es/N0 grid in dB.
    pub snr_db: Vec<f64>,
    /// `per_bit[s][i]`: capacity of bit `i` at `snr_db[s]`.
    pub per_bit: Vec<Vec<Estimate>>,
    pub aggregate: Vec<Estimate>,
    pub samples: usize,
    pub seed: u64,
}

impl CapacityReport {
    /// Linear interpolation of every bit's capacity at `es_n0_db`, clamped to
    /// the grid ends.
    pub fn bit_capacities_at(&self, es_n0_db: f64) -> Vec<f64> {
        let bits = self.scheme.len();
        (0..bits)
            .map(|i| interpolate(&self.snr_db, &self.bit_curve(i), es_n0_db))
            .collect()
    }

    pub fn bit_curve(&self, position: usize) -> Vec<f64> {
        self.per_bit.iter().map(|row| row[position].value).collect()
    }
}

/// Piecewise-linear interpolation on an ascending grid, clamped at the ends.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.is_empty() {
        return f64::NAN;
    }
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// Capacities of every bit under `scheme` and their sum over `snr_db`.
pub fn capacity_report(
    c: &Constellation,
    scheme: &DelayScheme,
    snr_db: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CapacityReport, CapacityError> {
    check_scheme(c, scheme)?;
    let est = CapacityEstimator::new(samples, seed)?;
    let mut queries: Vec<Query> = (0..c.bits()).map(|i| Query::scheme_bit(scheme, i)).collect();
    queries.push(Query::scheme_total(scheme));
    let mut per_bit = Vec::with_capacity(snr_db.len());
    let mut aggregate = Vec::with_capacity(snr_db.len());
    for &db in snr_db {
        let mut r = est.evaluate(c, NoiseModel::from_es_n0_db(db), &queries);
        aggregate.push(r.pop().expect("aggregate query"));
        per_bit.push(r);
    }
    Ok(CapacityReport {
        constellation: c.name(),
        scheme: scheme.clone(),
        snr_db: snr_db.to_vec(),
        per_bit,
        aggregate,
        samples,
        seed,
    })
}

/// Smallest Es/N0 (dB) in `[lo_db, hi_db]` at which the nondecreasing
/// `capacity(es_n0_db)` reaches `target`, by bisection to `tol_db`.
pub fn snr_for_capacity<F>(
    mut capacity: F,
    target: f64,
    lo_db: f64,
    hi_db: f64,
    tol_db: f64,
) -> Result<f64, CapacityError>
where
    F: FnMut(f64) -> f64,
{
    if capacity(hi_db) < target {
        return Err(CapacityError::Unreachable { target, lo_db, hi_db });
    }
    if capacity(lo_db) >= target {
        return Ok(lo_db);
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if capacity(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Es/N0 (dB) at which `scheme` reaches `target` bits per symbol.
pub fn required_snr_db(
    c: &Constellation,
    scheme: &DelayScheme,
    target: f64,
    estimator: &CapacityEstimator,
    bracket: (f64, f64),
    tol_db: f64,
) -> Result<f64, CapacityError> {
    check_scheme(c, scheme)?;
    let query = [Query::scheme_total(scheme)];
    snr_for_capacity(
        |db| estimator.evaluate(c, NoiseModel::from_es_n0_db(db), &query)[0].value,
        target,
        bracket.0,
        bracket.1,
        tol_db,
    )
}

/// Es/N0 (dB) at which the constellation-constrained capacity reaches
/// `target`.
pub fn required_snr_db_cm(
    c: &Constellation,
    target: f64,
    estimator: &CapacityEstimator,
    bracket: (f64, f64),
    tol_db: f64,
) -> Result<f64, CapacityError> {
    let query = [Query::cm()];
    snr_for_capacity(
        |db| estimator.evaluate(c, NoiseModel::from_es_n0_db(db), &query)[0].value,
        target,
        bracket.0,
        bracket.1,
        tol_db,
    )
}

/// Deterministic Gauss-Hermite evaluation of a PAM scheme capacity, used to
/// cross-check the Monte-Carlo path on one-dimensional constellations.
pub fn pam_quadrature_capacity(
    c: &Constellation,
    scheme: &DelayScheme,
    nm: NoiseModel,
    order: usize,
) -> Result<f64, CapacityError> {
    check_scheme(c, scheme)?;
    assert_eq!(c.kind(), ConstellationKind::Pam, "quadrature path is PAM-only");
    let (nodes, weights) = gauss_hermite(order);
    let sigma = nm.sigma();
    let points = c.points();
    let terms: Vec<Term> = (0..c.bits())
        .map(|p| Term::Bit {
            position: p,
            known_mask: scheme.known_mask(p),
        })
        .collect();
    let mut ll = vec![0.0; points.len()];
    let mut w = vec![0.0; points.len()];
    let mut expectation = 0.0;
    for sent in 0..points.len() {
        for (x, wt) in nodes.iter().zip(&weights) {
            // probabilists' convention: E[f(Z)] = sum wt f(x) / sqrt(2 pi)
            let y = points[sent] + Complex64::new(sigma * x, 0.0);
            let mut max = f64::NEG_INFINITY;
            for (j, p) in points.iter().enumerate() {
                ll[j] = nm.log_likelihood(y, *p);
                max = max.max(ll[j]);
            }
            for j in 0..points.len() {
                w[j] = math::exp(ll[j] - max);
            }
            let v: f64 = terms.iter().map(|t| log_ratio(t, c, sent, &ll, &w)).sum();
            expectation += wt * v;
        }
    }
    expectation /= points.len() as f64;
    Ok(c.bits() as f64 - expectation)
}

/// Nodes and weights of `order`-point Gauss-Hermite quadrature for the
/// standard normal density (weights sum to 1).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    // Physicists' rule by Newton iteration on H_n, then rescaled.
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = 0.751_125_544_464_942_5; // pi^{-1/4}
    let half = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..half {
        z = match i {
            0 => math::sqrt(2.0 * nf + 1.0) - 1.85575 * math::powf(2.0 * nf + 1.0, -0.16667),
            1 => z - 1.14 * math::powf(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * math::sqrt(2.0 / (jf + 1.0)) * p2 - math::sqrt(jf / (jf + 1.0)) * p3;
            }
            pp = math::sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let sqrt_pi = math::sqrt(core::f64::consts::PI);
    let nodes = x.iter().map(|v| v * core::f64::consts::SQRT_2).collect();
    let weights = w.iter().map(|v| v / sqrt_pi).collect();
    (nodes, weights)
}
