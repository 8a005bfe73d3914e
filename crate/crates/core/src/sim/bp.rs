use alloc::vec;
use alloc::vec::Vec;

use super::demap::LLR_CLAMP;
use crate::ldpc::TannerCode;
use crate::math;

/// Largest `|tanh(x/2)|` used in check updates; keeps `atanh` finite.
const TANH_LIMIT: f64 = 1.0 - 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct BpResult {
    pub bits: Vec<u8>,
    /// Zero syndrome reached.
    pub success: bool,
    pub iterations: usize,
    pub posterior: Vec<f64>,
    /// Posterior minus channel LLR.
    pub extrinsic: Vec<f64>,
}

/// Flooding sum-product decoder with edge tables precomputed for one code.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    n: usize,
    /// Edges are grouped by check: check `c` owns `chk_start[c]..chk_start[c+1]`.
    chk_start: Vec<usize>,
    edge_var: Vec<u32>,
    /// Edge ids of each variable node.
    var_edges: Vec<Vec<u32>>,
}

impl BpDecoder {
    pub fn new(code: &TannerCode) -> Self {
        let mut chk_start = Vec::with_capacity(code.checks() + 1);
        let mut edge_var = Vec::with_capacity(code.edge_count());
        let mut var_edges = vec![Vec::new(); code.n()];
        chk_start.push(0);
        for c in 0..code.checks() {
            for &v in code.check_neighbors(c) {
                var_edges[v as usize].push(edge_var.len() as u32);
                edge_var.push(v);
            }
            chk_start.push(edge_var.len());
        }
        Self {
            n: code.n(),
            chk_start,
            edge_var,
            var_edges,
        }
    }

    fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.chk_start.windows(2).all(|w| {
            self.edge_var[w[0]..w[1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ bits[v as usize])
                == 0
        })
    }

    /// Iterates until the hard decisions satisfy every check or `max_iter`
    /// iterations have run.
    pub fn decode(&self, channel: &[f64], max_iter: usize) -> BpResult {
        self.run(channel, max_iter, true)
    }

    /// Runs exactly `iterations` iterations regardless of the syndrome. On a
    /// cycle-free graph the posteriors are exact once `iterations` reaches
    /// the graph diameter.
    pub fn decode_fixed(&self, channel: &[f64], iterations: usize) -> BpResult {
        self.run(channel, iterations, false)
    }

    fn run(&self, channel: &[f64], max_iter: usize, early_stop: bool) -> BpResult {
        assert_eq!(channel.len(), self.n);
        let ch: Vec<f64> = channel.iter().map(|l| l.clamp(-LLR_CLAMP, LLR_CLAMP)).collect();
        let e = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| ch[v as usize]).collect();
        let mut c2v = vec![0.0f64; e];
        let mut posterior = ch.clone();
        let mut bits: Vec<u8> = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut iterations = 0;
        let mut success = self.syndrome_ok(&bits);
        let mut t = Vec::new();
        let mut suffix = Vec::new();
        while !(early_stop && success) && iterations < max_iter {
            iterations += 1;
            // check update with prefix/suffix products of tanh(x/2)
            for w in self.chk_start.windows(2) {
                let (s, end) = (w[0], w[1]);
                let d = end - s;
                t.clear();
                t.extend(v2c[s..end].iter().map(|&x| math::tanh(0.5 * x)));
                suffix.clear();
                suffix.resize(d + 1, 1.0);
                for k in (0..d).rev() {
                    suffix[k] = suffix[k + 1] * t[k];
                }
                let mut prefix = 1.0;
                for k in 0..d {
                    let p = (prefix * suffix[k + 1]).clamp(-TANH_LIMIT, TANH_LIMIT);
                    c2v[s + k] = 2.0 * math::atanh(p);
                    prefix *= t[k];
                }
            }
            // variable update
            for v in 0..self.n {
                let edges = &self.var_edges[v];
                let total = ch[v] + edges.iter().map(|&k| c2v[k as usize]).sum::<f64>();
                posterior[v] = total;
                bits[v] = u8::from(total < 0.0);
                for &k in edges {
                    v2c[k as usize] = (total - c2v[k as usize]).clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }
            success = self.syndrome_ok(&bits);
        }
        let extrinsic = posterior.iter().zip(&ch).map(|(p, c)| p - c).collect();
        BpResult {
            bits,
            success,
            iterations,
            posterior,
            extrinsic,
        }
    }
}

/// One-shot sum-product decode of `channel` LLRs on `code`.
pub fn bp_decode(code: &TannerCode, channel: &[f64], max_iter: usize) -> BpResult {
    BpDecoder::new(code).decode(channel, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming() -> TannerCode {
        TannerCode::from_dense(&[
            vec![1, 1, 0, 1, 1, 0, 0],
            vec![1, 0, 1, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 0, 0, 1],
        ])
        .unwrap()
    }

    #[test]
    fn valid_codeword_needs_no_iterations() {
        let h = hamming();
        let cw = [1u8, 1, 1, 0, 0, 0, 0];
        let llr: Vec<f64> = cw.iter().map(|&b| if b == 0 { 20.0 } else { -20.0 }).collect();
        let r = bp_decode(&h, &llr, 50);
        assert!(r.success);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.bits, cw);
    }

    #[test]
    fn corrects_single_weak_error() {
        let h = hamming();
        let mut llr = vec![4.0; 7];
        llr[2] = -0.5;
        let r = bp_decode(&h, &llr, 50);
        assert!(r.success);
        assert_eq!(r.bits, vec![0; 7]);
        assert!(r.extrinsic[2] > 0.0);
    }
}
