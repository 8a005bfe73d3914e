use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::LdpcError;

/// Sparse parity-check matrix stored as Tanner-graph adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TannerCode {
    n: usize,
    var_adj: Vec<Vec<u32>>,
    chk_adj: Vec<Vec<u32>>,
    seed: Option<u64>,
}

impl TannerCode {
    /// Builds from `(check, variable)` pairs.
    pub fn from_edges(n: usize, checks: usize, edges: &[(usize, usize)]) -> Result<Self, LdpcError> {
        let mut var_adj = vec![Vec::new(); n];
        let mut chk_adj = vec![Vec::new(); checks];
        for &(c, v) in edges {
            if c >= checks || v >= n {
                return Err(LdpcError::InvalidGraph(format!("edge ({c}, {v}) out of range")));
            }
            chk_adj[c].push(v as u32);
            var_adj[v].push(c as u32);
        }
        for (c, row) in chk_adj.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(LdpcError::InvalidGraph(format!("duplicate edge on check {c}")));
            }
        }
        for col in &mut var_adj {
            col.sort_unstable();
        }
        Ok(Self {
            n,
            var_adj,
            chk_adj,
            seed: None,
        })
    }

    /// Builds from the variable indices of each check row.
    pub fn from_check_rows(n: usize, rows: &[Vec<usize>]) -> Result<Self, LdpcError> {
        let edges: Vec<(usize, usize)> = rows
            .iter()
            .enumerate()
            .flat_map(|(c, r)| r.iter().map(move |&v| (c, v)))
            .collect();
        Self::from_edges(n, rows.len(), &edges)
    }

    /// Dense 0/1 rows, mainly for small examples.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self, LdpcError> {
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(LdpcError::InvalidGraph("ragged rows".into()));
        }
        let sparse: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i).collect())
            .collect();
        Self::from_check_rows(n, &sparse)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Code length `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn checks(&self) -> usize {
        self.chk_adj.len()
    }

    /// `1 - checks / N`; the true rate is higher when `H` is rank deficient.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.checks() as f64 / self.n as f64
    }

    pub fn edge_count(&self) -> usize {
        self.chk_adj.iter().map(Vec::len).sum()
    }

    pub fn variable_neighbors(&self, v: usize) -> &[u32] {
        &self.var_adj[v]
    }

    pub fn check_neighbors(&self, c: usize) -> &[u32] {
        &self.chk_adj[c]
    }

    pub fn variable_degree(&self, v: usize) -> usize {
        self.var_adj[v].len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.chk_adj[c].len()
    }

    pub fn variable_degrees(&self) -> Vec<usize> {
        self.var_adj.iter().map(Vec::len).collect()
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        self.chk_adj.iter().map(Vec::len).collect()
    }

    /// Share of ones in `H`.
    pub fn density(&self) -> f64 {
        self.edge_count() as f64 / (self.n as f64 * self.checks() as f64)
    }

    /// Per-check parities of `bits`.
    pub fn syndrome(&self, bits: &[u8]) -> Vec<u8> {
        self.chk_adj
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v as usize] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.chk_adj
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v as usize] & 1)) == 0)
    }

    /// Length of the shortest cycle, or 0 for a cycle-free graph.
    pub fn girth(&self) -> usize {
        let n = self.n;
        let total = n + self.checks();
        let mut dist = vec![u32::MAX; total];
        let mut parent = vec![u32::MAX; total];
        let mut touched: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        let mut best = usize::MAX;
        for root in 0..n {
            for &t in &touched {
                dist[t] = u32::MAX;
                parent[t] = u32::MAX;
            }
            touched.clear();
            queue.clear();
            dist[root] = 0;
            touched.push(root);
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                let du = dist[u] as usize;
                if 2 * du >= best {
                    break;
                }
                let neigh: &[u32] = if u < n {
                    &self.var_adj[u]
                } else {
                    &self.chk_adj[u - n]
                };
                for &w in neigh {
                    let w = if u < n { w as usize + n } else { w as usize };
                    if parent[u] == w as u32 {
                        continue;
                    }
                    if dist[w] == u32::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u as u32;
                        touched.push(w);
                        queue.push_back(w);
                    } else {
                        best = best.min(du + dist[w] as usize + 1);
                    }
                }
            }
        }
        if best == usize::MAX {
            0
        } else {
            best
        }
    }

    /// Dense rows, for small codes and tests.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.chk_adj
            .iter()
            .map(|row| {
                let mut r = vec![0u8; self.n];
                for &v in row {
                    r[v as usize] = 1;
                }
                r
            })
            .collect()
    }
}
