use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::{check_count, BitChannelTypes, ChannelAssignment, DegreeDistribution, LdpcError, TannerCode};
use crate::rng;

/// Integer node counts `counts[i][j]` realizing `assign` at length `n`.
///
/// Rows are rounded by largest remainder to exactly `n m_i / m`, columns are
/// then pulled toward the rounded `n lambda_j`, and finally, when `edges` is
/// given, single nodes are moved between neighbouring degrees of the same
/// row until the edge total matches.
pub fn round_assignment(
    assign: &ChannelAssignment,
    n: usize,
    edges: Option<usize>,
) -> Result<Vec<Vec<usize>>, LdpcError> {
    let types = assign.types();
    let bits = types.bits();
    if n == 0 || n % bits != 0 {
        return Err(LdpcError::Indivisible { n, bits });
    }
    let degrees = assign.degrees();
    let rows = assign.rows();
    let nf = n as f64;
    let real: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|p| p * nf).collect()).collect();
    let mut counts: Vec<Vec<usize>> = Vec::with_capacity(rows.len());
    for (i, r) in real.iter().enumerate() {
        let total = n / bits * types.multiplicity(i);
        counts.push(largest_remainder(r, total));
    }

    // column repair
    let col_real: Vec<f64> = (0..degrees.len()).map(|j| real.iter().map(|r| r[j]).sum()).collect();
    let col_target = largest_remainder(&col_real, n);
    for _ in 0..(4 * n) {
        let col: Vec<usize> = (0..degrees.len()).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        let over = (0..degrees.len()).find(|&j| col[j] > col_target[j]);
        let under = (0..degrees.len()).find(|&j| col[j] < col_target[j]);
        let (Some(from), Some(to)) = (over, under) else { break };
        let row = (0..counts.len())
            .filter(|&i| counts[i][from] > 0)
            .max_by(|&a, &b| {
                move_score(&real, &counts, a, from, to).total_cmp(&move_score(&real, &counts, b, from, to))
            });
        match row {
            Some(i) => {
                counts[i][from] -= 1;
                counts[i][to] += 1;
            }
            None => break,
        }
    }

    if let Some(target) = edges {
        let lo = degrees[0] * n;
        let hi = degrees[degrees.len() - 1] * n;
        if target < lo || target > hi {
            return Err(LdpcError::InfeasibleRounding(format!(
                "{target} edges outside [{lo}, {hi}] for length {n}"
            )));
        }
        loop {
            let e: usize = counts
                .iter()
                .map(|r| r.iter().zip(degrees).map(|(c, d)| c * d).sum::<usize>())
                .sum();
            if e == target {
                break;
            }
            let up = e < target;
            let gap = e.abs_diff(target);
            let mut best: Option<(f64, usize, usize, usize)> = None;
            for i in 0..counts.len() {
                for j in 0..degrees.len() {
                    let k = if up {
                        j + 1
                    } else if j > 0 {
                        j - 1
                    } else {
                        continue;
                    };
                    if k >= degrees.len() || counts[i][j] == 0 || degrees[j].abs_diff(degrees[k]) > gap {
                        continue;
                    }
                    let s = move_score(&real, &counts, i, j, k);
                    if best.is_none_or(|b| s > b.0) {
                        best = Some((s, i, j, k));
                    }
                }
            }
            let Some((_, i, j, k)) = best else {
                return Err(LdpcError::InfeasibleRounding(format!(
                    "cannot reach {target} edges from {e}"
                )));
            };
            counts[i][j] -= 1;
            counts[i][k] += 1;
        }
    }
    Ok(counts)
}

/// Preference for moving one node of row `i` from column `from` to `to`:
/// large when `from` is over-filled and `to` under-filled.
fn move_score(real: &[Vec<f64>], counts: &[Vec<usize>], i: usize, from: usize, to: usize) -> f64 {
    (counts[i][from] as f64 - real[i][from]) + (real[i][to] - counts[i][to] as f64)
}

/// Rounds `values` to integers summing to `total`, giving the leftover units
/// to the largest fractional parts (lowest index first on ties).
fn largest_remainder(values: &[f64], total: usize) -> Vec<usize> {
    let mut out: Vec<usize> = values.iter().map(|v| crate::math::floor(v.max(0.0)) as usize).collect();
    let assigned: usize = out.iter().sum();
    if assigned > total {
        // values overshoot the total: trim from the smallest fractional parts
        let mut excess = assigned - total;
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| out[b].cmp(&out[a]));
        for j in order {
            let take = excess.min(out[j]);
            out[j] -= take;
            excess -= take;
            if excess == 0 {
                break;
            }
        }
        return out;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = values[a] - crate::math::floor(values[a]);
        let fb = values[b] - crate::math::floor(values[b]);
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = total - assigned;
    let mut k = 0;
    while left > 0 {
        out[order[k % order.len()]] += 1;
        left -= 1;
        k += 1;
    }
    out
}

/// Degree sequences `g_i`: for each type, its node degrees in ascending
/// blocks of the rounded counts.
pub fn expand_degree_sequences(
    assign: &ChannelAssignment,
    n: usize,
    edges: Option<usize>,
) -> Result<Vec<Vec<usize>>, LdpcError> {
    let counts = round_assignment(assign, n, edges)?;
    Ok(counts
        .iter()
        .map(|row| {
            row.iter()
                .zip(assign.degrees())
                .flat_map(|(&c, &d)| core::iter::repeat_n(d, c))
                .collect()
        })
        .collect())
}

/// Check nodes bucketed by current degree.
struct CheckPool {
    buckets: Vec<Vec<u32>>,
    slot: Vec<u32>,
    degree: Vec<usize>,
}

impl CheckPool {
    fn new(checks: usize, check_degree: usize) -> Self {
        let mut buckets = vec![Vec::new(); check_degree + 1];
        buckets[0] = (0..checks as u32).collect();
        Self {
            buckets,
            slot: (0..checks as u32).collect(),
            degree: vec![0; checks],
        }
    }

    fn bump(&mut self, c: usize) {
        let d = self.degree[c];
        let s = self.slot[c] as usize;
        let b = &mut self.buckets[d];
        let last = *b.last().expect("check in its bucket");
        b.swap_remove(s);
        if last as usize != c {
            self.slot[last as usize] = s as u32;
        }
        self.degree[c] = d + 1;
        self.slot[c] = self.buckets[d + 1].len() as u32;
        self.buckets[d + 1].push(c as u32);
    }
}

/// PEG-style construction under a channel-assignment constraint.
///
/// Variable node `v` sits on label position `v mod m` and takes the next
/// degree of its type's sequence. Each edge goes to a check node with free
/// sockets that is farthest from `v` in the graph built so far (unreachable
/// counts as farthest), preferring the lowest current check degree; remaining
/// ties are broken at random.
pub fn constrained_peg(
    assign: &ChannelAssignment,
    n: usize,
    rate: f64,
    check_degree: usize,
    seed: u64,
) -> Result<TannerCode, LdpcError> {
    let checks = check_count(n, rate)?;
    let seqs = expand_degree_sequences(assign, n, Some(checks * check_degree))?;
    let types = assign.types();
    let mut next = vec![0usize; types.len()];
    let mut var_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut chk_adj: Vec<Vec<u32>> = vec![Vec::new(); checks];
    let mut pool = CheckPool::new(checks, check_degree);
    let mut rng = rng::stream(seed, 0);

    let mut chk_seen = vec![0u32; checks];
    let mut var_seen = vec![0u32; n];
    let mut cand_mark = vec![0u32; checks];
    let mut epoch = 0u32;
    let mut frontier: Vec<u32> = Vec::new();
    let mut next_frontier: Vec<u32> = Vec::new();
    let mut cands: Vec<u32> = Vec::new();
    let mut picks: Vec<u32> = Vec::new();

    for v in 0..n {
        let t = types.type_of_variable(v);
        let degree = seqs[t][next[t]];
        next[t] += 1;
        for _ in 0..degree {
            epoch += 1;
            // candidates: checks with free sockets not yet adjacent to v
            cands.clear();
            for c in &var_adj[v] {
                chk_seen[*c as usize] = epoch;
            }
            for bucket in &pool.buckets[..check_degree] {
                cands.extend(bucket.iter().filter(|&&c| chk_seen[c as usize] != epoch));
            }
            if cands.is_empty() {
                return Err(LdpcError::NoCheckCapacity { variable: v });
            }
            for &c in &cands {
                cand_mark[c as usize] = epoch;
            }

            picks.clear();
            if var_adj[v].is_empty() {
                picks.extend_from_slice(&cands);
            } else {
                // breadth-first expansion from v, one check layer at a time
                var_seen[v] = epoch;
                frontier.clear();
                frontier.extend_from_slice(&var_adj[v]);
                let mut reached = 0usize;
                let mut last_layer: Vec<u32> = Vec::new();
                loop {
                    next_frontier.clear();
                    for &c in &frontier {
                        for &u in &chk_adj[c as usize] {
                            if var_seen[u as usize] == epoch {
                                continue;
                            }
                            var_seen[u as usize] = epoch;
                            for &c2 in &var_adj[u as usize] {
                                if chk_seen[c2 as usize] != epoch {
                                    chk_seen[c2 as usize] = epoch;
                                    next_frontier.push(c2);
                                }
                            }
                        }
                    }
                    if next_frontier.is_empty() {
                        break;
                    }
                    let layer: Vec<u32> = next_frontier
                        .iter()
                        .copied()
                        .filter(|&c| cand_mark[c as usize] == epoch)
                        .collect();
                    reached += layer.len();
                    if reached == cands.len() {
                        last_layer = layer;
                        break;
                    }
                    core::mem::swap(&mut frontier, &mut next_frontier);
                }
                if reached < cands.len() {
                    picks.extend(cands.iter().copied().filter(|&c| chk_seen[c as usize] != epoch));
                } else {
                    picks.extend_from_slice(&last_layer);
                }
            }
            let low = picks.iter().map(|&c| pool.degree[c as usize]).min().expect("non-empty");
            picks.retain(|&c| pool.degree[c as usize] == low);
            let c = picks[rng.random_range(0..picks.len())] as usize;
            if closes_four_cycle(&var_adj, &chk_adj, v, c)
                && reroute(&mut var_adj, &mut chk_adj, v, c, &mut rng)
            {
                pool.bump(c);
                continue;
            }
            var_adj[v].push(c as u32);
            chk_adj[c].push(v as u32);
            pool.bump(c);
        }
    }

    let edges: Vec<(usize, usize)> = chk_adj
        .iter()
        .enumerate()
        .flat_map(|(c, r)| r.iter().map(move |&v| (c, v as usize)))
        .collect();
    Ok(TannerCode::from_edges(n, checks, &edges)?.with_seed(seed))
}

/// True when edge `(c, v)`, present or about to be added, lies on a cycle of
/// length 4.
fn closes_four_cycle(var_adj: &[Vec<u32>], chk_adj: &[Vec<u32>], v: usize, c: usize) -> bool {
    chk_adj[c].iter().any(|&u| {
        u as usize != v
            && var_adj[u as usize]
                .iter()
                .any(|&c2| c2 as usize != c && var_adj[v].contains(&c2))
    })
}

/// When the only sockets left for `v` would close a 4-cycle through check
/// `c`, rewires an existing edge `(c2, u)` into `(c, u)` and `(c2, v)`.
/// Degrees are unchanged apart from the socket of `c` being used, so the
/// node counts of the ensemble are preserved. Returns false if no rewiring
/// free of 4-cycles is found.
fn reroute(
    var_adj: &mut [Vec<u32>],
    chk_adj: &mut [Vec<u32>],
    v: usize,
    c: usize,
    rng: &mut rng::Rng,
) -> bool {
    const ATTEMPTS: usize = 400;
    let checks = chk_adj.len();
    for _ in 0..ATTEMPTS {
        let c2 = rng.random_range(0..checks);
        if c2 == c || chk_adj[c2].is_empty() || var_adj[v].contains(&(c2 as u32)) {
            continue;
        }
        let u = chk_adj[c2][rng.random_range(0..chk_adj[c2].len())] as usize;
        if u == v || chk_adj[c].contains(&(u as u32)) {
            continue;
        }
        unlink(var_adj, chk_adj, u, c2);
        link(var_adj, chk_adj, u, c);
        link(var_adj, chk_adj, v, c2);
        let ok = !closes_four_cycle(var_adj, chk_adj, u, c)
            && !closes_four_cycle(var_adj, chk_adj, v, c2);
        if ok {
            return true;
        }
        unlink(var_adj, chk_adj, v, c2);
        unlink(var_adj, chk_adj, u, c);
        link(var_adj, chk_adj, u, c2);
    }
    false
}

fn link(var_adj: &mut [Vec<u32>], chk_adj: &mut [Vec<u32>], v: usize, c: usize) {
    var_adj[v].push(c as u32);
    chk_adj[c].push(v as u32);
}

fn unlink(var_adj: &mut [Vec<u32>], chk_adj: &mut [Vec<u32>], v: usize, c: usize) {
    var_adj[v].retain(|&x| x as usize != c);
    chk_adj[c].retain(|&x| x as usize != v);
}

/// Plain PEG for a single degree distribution (one bit-channel type).
pub fn conventional_peg(lambda: &DegreeDistribution, n: usize, rate: f64, seed: u64) -> Result<TannerCode, LdpcError> {
    let assign = ChannelAssignment::uniform(BitChannelTypes::single(1), lambda);
    constrained_peg(&assign, n, rate, lambda.check_degree(), seed)
}
