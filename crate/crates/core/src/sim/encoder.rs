use alloc::vec;
use alloc::vec::Vec;

use crate::ldpc::TannerCode;

/// Systematic encoder from a reduced row-echelon form of `H` over GF(2).
///
/// Pivot columns carry parity, all other columns carry information bits.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    words: usize,
    /// Reduced rows restricted to information columns, one per pivot.
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    info: Vec<usize>,
}

impl Encoder {
    pub fn new(code: &TannerCode) -> Self {
        let n = code.n();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = (0..code.checks())
            .map(|c| {
                let mut r = vec![0u64; words];
                for &v in code.check_neighbors(c) {
                    r[v as usize / 64] |= 1 << (v % 64);
                }
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            if rank == rows.len() {
                break;
            }
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    for (x, y) in row[w..].iter_mut().zip(&pivot[w..]) {
                        *x ^= *y;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        // clear pivot columns so a row holds only its information taps
        for row in &mut rows {
            for &p in &pivots {
                row[p / 64] &= !(1u64 << (p % 64));
            }
        }
        Self {
            n,
            words,
            rows,
            pivots,
            info,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension `K = N - rank(H)`.
    pub fn k(&self) -> usize {
        self.info.len()
    }

    /// Codeword positions of the information bits, in input order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info
    }

    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        assert_eq!(info.len(), self.info.len());
        let mut cw = vec![0u8; self.n];
        let mut packed = vec![0u64; self.words];
        for (&pos, &b) in self.info.iter().zip(info) {
            if b & 1 != 0 {
                cw[pos] = 1;
                packed[pos / 64] |= 1 << (pos % 64);
            }
        }
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            cw[p] = (ones & 1) as u8;
        }
        cw
    }

    /// Information bits of a codeword.
    pub fn extract(&self, codeword: &[u8]) -> Vec<u8> {
        self.info.iter().map(|&p| codeword[p]).collect()
    }
}
