use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::NoiseModel;
use crate::constellation::Constellation;
use crate::math;

/// Magnitude limit applied to every LLR handed to the decoder.
pub const LLR_CLAMP: f64 = 50.0;

/// What the receiver knows about one label position of a symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BitKnowledge {
    Unknown,
    /// Bit value known for certain (successful decode or a vacant slot).
    Known(u8),
    /// A-priori LLR from a failed decode.
    Prior(f64),
}

/// LLR of every position of `c` given `y`, excluding each position's own
/// prior. Positions that are `Known` get `+-LLR_CLAMP`.
pub fn demap(c: &Constellation, y: Complex64, nm: NoiseModel, knowledge: &[BitKnowledge], out: &mut [f64]) {
    let m = c.bits();
    debug_assert_eq!(knowledge.len(), m);
    let order = c.order();
    let mut metric = vec![0.0f64; order];
    let mut known_mask = 0usize;
    let mut known_val = 0usize;
    for (i, k) in knowledge.iter().enumerate() {
        if let BitKnowledge::Known(b) = k {
            known_mask |= c.position_mask(i);
            if *b != 0 {
                known_val |= c.position_mask(i);
            }
        }
    }
    for (j, p) in c.points().iter().enumerate() {
        if j & known_mask != known_val {
            metric[j] = f64::NEG_INFINITY;
            continue;
        }
        let mut v = nm.log_likelihood(y, *p);
        for (i, k) in knowledge.iter().enumerate() {
            if let BitKnowledge::Prior(l) = k {
                v += log_prior(*l, j & c.position_mask(i) != 0);
            }
        }
        metric[j] = v;
    }
    for i in 0..m {
        match knowledge[i] {
            BitKnowledge::Known(b) => {
                out[i] = if b == 0 { LLR_CLAMP } else { -LLR_CLAMP };
            }
            _ => {
                let own = match knowledge[i] {
                    BitKnowledge::Prior(l) => Some(l),
                    _ => None,
                };
                let mask = c.position_mask(i);
                let mut m0 = f64::NEG_INFINITY;
                let mut m1 = f64::NEG_INFINITY;
                for (j, &v) in metric.iter().enumerate() {
                    let one = j & mask != 0;
                    let v = match own {
                        Some(l) if v.is_finite() => v - log_prior(l, one),
                        _ => v,
                    };
                    if one {
                        m1 = m1.max(v);
                    } else {
                        m0 = m0.max(v);
                    }
                }
                let mut s0 = 0.0;
                let mut s1 = 0.0;
                for (j, &v) in metric.iter().enumerate() {
                    if !v.is_finite() {
                        continue;
                    }
                    let one = j & mask != 0;
                    let v = match own {
                        Some(l) => v - log_prior(l, one),
                        None => v,
                    };
                    if one {
                        s1 += math::exp(v - m1);
                    } else {
                        s0 += math::exp(v - m0);
                    }
                }
                out[i] = (m0 + math::ln(s0) - m1 - math::ln(s1)).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
    }
}

/// `ln P(b)` for a bit with LLR `l`.
fn log_prior(l: f64, one: bool) -> f64 {
    if one {
        -math::softplus(l)
    } else {
        -math::softplus(-l)
    }
}

/// LLRs of all positions without side information.
pub fn demap_initial(c: &Constellation, y: Complex64, nm: NoiseModel) -> Vec<f64> {
    let mut out = vec![0.0; c.bits()];
    demap(c, y, nm, &vec![BitKnowledge::Unknown; c.bits()], &mut out);
    out
}

/// LLRs with the listed `(position, value)` bits known.
pub fn demap_with_hard_feedback(c: &Constellation, y: Complex64, nm: NoiseModel, known: &[(usize, u8)]) -> Vec<f64> {
    let mut k = vec![BitKnowledge::Unknown; c.bits()];
    for &(p, b) in known {
        k[p] = BitKnowledge::Known(b);
    }
    let mut out = vec![0.0; c.bits()];
    demap(c, y, nm, &k, &mut out);
    out
}

/// LLRs with a-priori LLRs on the listed positions, weighting each point by
/// the prior probability of its label.
pub fn demap_with_soft_feedback(c: &Constellation, y: Complex64, nm: NoiseModel, priors: &[(usize, f64)]) -> Vec<f64> {
    let mut k = vec![BitKnowledge::Unknown; c.bits()];
    for &(p, l) in priors {
        k[p] = BitKnowledge::Prior(l);
    }
    let mut out = vec![0.0; c.bits()];
    demap(c, y, nm, &k, &mut out);
    out
}
