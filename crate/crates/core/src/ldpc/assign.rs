use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{DegreeDistribution, LdpcError, TannerCode};
use crate::capacity::CapacityReport;
use crate::constellation::{Constellation, ConstellationKind, DelayScheme};

/// Partition of label positions into bit-channel types of equal capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BitChannelTypes {
    bits: usize,
    groups: Vec<Vec<usize>>,
}

impl BitChannelTypes {
    /// `groups[i]` lists the positions of type `i`; together they must cover
    /// `0..bits` exactly once.
    pub fn new(bits: usize, mut groups: Vec<Vec<usize>>) -> Result<Self, LdpcError> {
        let mut seen = vec![false; bits];
        for g in &mut groups {
            if g.is_empty() {
                return Err(LdpcError::InvalidAssignment("empty bit-channel type".into()));
            }
            g.sort_unstable();
            for &p in g.iter() {
                if p >= bits || seen[p] {
                    return Err(LdpcError::InvalidAssignment(format!(
                        "position {p} repeated or out of range"
                    )));
                }
                seen[p] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(LdpcError::InvalidAssignment("types do not cover every position".into()));
        }
        Ok(Self { bits, groups })
    }

    /// One type holding every position.
    pub fn single(bits: usize) -> Self {
        Self {
            bits,
            groups: vec![(0..bits).collect()],
        }
    }

    /// Types implied by the real/imaginary symmetry of square QAM: position
    /// `i` pairs with `i + m/2` when both halves carry the same delays.
    /// Other cases fall back to one type per position.
    pub fn symmetric(c: &Constellation, scheme: &DelayScheme) -> Self {
        let m = c.bits();
        let paired = c.kind() == ConstellationKind::Qam
            && scheme.halves().map(|(a, b)| a == b).unwrap_or(false);
        let groups = if paired {
            (0..m / 2).map(|i| vec![i, i + m / 2]).collect()
        } else {
            (0..m).map(|i| vec![i]).collect()
        };
        Self { bits: m, groups }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Type of label position `position`.
    pub fn phi(&self, position: usize) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(&position))
            .expect("position covered by a type")
    }

    /// Number of positions in type `i`.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.groups[i].len()
    }

    /// `m_i / m`.
    pub fn share(&self, i: usize) -> f64 {
        self.groups[i].len() as f64 / self.bits as f64
    }

    /// Type of variable node `v` under the continuous mapping `v mod m`.
    pub fn type_of_variable(&self, v: usize) -> usize {
        self.phi(v % self.bits)
    }
}

/// Groups positions whose capacities at `design_snr_db` agree within
/// `k_stderr` combined standard errors; types are ordered by descending
/// capacity.
pub fn classify_bit_channels(report: &CapacityReport, design_snr_db: f64, k_stderr: f64) -> BitChannelTypes {
    let bits = report.scheme.len();
    let caps = report.bit_capacities_at(design_snr_db);
    let nearest = report
        .snr_db
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - design_snr_db).abs().total_cmp(&(b.1 - design_snr_db).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let se: Vec<f64> = (0..bits)
        .map(|i| report.per_bit.get(nearest).map_or(0.0, |r| r[i].stderr))
        .collect();
    let mut order: Vec<usize> = (0..bits).collect();
    order.sort_by(|&a, &b| caps[b].total_cmp(&caps[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for p in order {
        let joined = groups.iter_mut().find(|g| {
            let lead = g[0];
            let tol = k_stderr * crate::math::sqrt(se[lead] * se[lead] + se[p] * se[p]) + 1e-9;
            (caps[lead] - caps[p]).abs() <= tol
        });
        match joined {
            Some(g) => g.push(p),
            None => groups.push(vec![p]),
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    BitChannelTypes { bits, groups }
}

/// Channel-assignment matrix `P`: `p[i][j]` is the share of all variable
/// nodes that have degree `degrees[j]` and belong to type `i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelAssignment {
    types: BitChannelTypes,
    degrees: Vec<usize>,
    p: Vec<Vec<f64>>,
}

/// Tolerance for the row and total sums of a valid assignment.
pub const ASSIGNMENT_TOL: f64 = 1e-9;

impl ChannelAssignment {
    /// Validates entries in `[0, 1]`, total 1 and row sums `m_i / m` to
    /// [`ASSIGNMENT_TOL`].
    pub fn new(types: BitChannelTypes, degrees: Vec<usize>, p: Vec<Vec<f64>>) -> Result<Self, LdpcError> {
        let a = Self { types, degrees, p };
        a.validate(ASSIGNMENT_TOL)?;
        Ok(a)
    }

    /// Accepts a rounded published matrix: rows are rescaled to `m_i / m`
    /// while the column shares are kept.
    pub fn from_rounded(types: BitChannelTypes, degrees: Vec<usize>, p: Vec<Vec<f64>>) -> Result<Self, LdpcError> {
        let total: f64 = p.iter().flatten().sum();
        if total <= 0.0 {
            return Err(LdpcError::InvalidAssignment("all entries are zero".into()));
        }
        let cols = degrees.len();
        let col_targets: Vec<f64> = (0..cols)
            .map(|j| p.iter().map(|r| r[j].max(0.0)).sum::<f64>() / total)
            .collect();
        let row_targets: Vec<f64> = (0..types.len()).map(|i| types.share(i)).collect();
        let p = repair_assignment(&p, &row_targets, &col_targets, ASSIGNMENT_TOL)?;
        Self::new(types, degrees, p)
    }

    /// `p[i][j] = lambda_j * m_i / m`.
    pub fn uniform(types: BitChannelTypes, lambda: &DegreeDistribution) -> Self {
        let p = (0..types.len())
            .map(|i| lambda.lambda().iter().map(|l| l * types.share(i)).collect())
            .collect();
        Self {
            types,
            degrees: lambda.degrees().to_vec(),
            p,
        }
    }

    pub fn validate(&self, tol: f64) -> Result<(), LdpcError> {
        let s = self.types.len();
        if self.p.len() != s || self.p.iter().any(|r| r.len() != self.degrees.len()) {
            return Err(LdpcError::InvalidAssignment(format!(
                "matrix shape does not match {s} types x {} degrees",
                self.degrees.len()
            )));
        }
        if self.p.iter().flatten().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(LdpcError::InvalidAssignment("entry outside [0, 1]".into()));
        }
        let total: f64 = self.p.iter().flatten().sum();
        if (total - 1.0).abs() > tol {
            return Err(LdpcError::InvalidAssignment(format!("entries sum to {total}")));
        }
        for (i, row) in self.p.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - self.types.share(i)).abs() > tol {
                return Err(LdpcError::InvalidAssignment(format!(
                    "row {i} sums to {sum}, expected {}",
                    self.types.share(i)
                )));
            }
        }
        Ok(())
    }

    pub fn types(&self) -> &BitChannelTypes {
        &self.types
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    /// Column sums: the node-perspective degree fractions.
    pub fn lambda(&self) -> Vec<f64> {
        (0..self.degrees.len())
            .map(|j| self.p.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn degree_distribution(&self, check_degree: usize) -> Result<DegreeDistribution, LdpcError> {
        DegreeDistribution::new(self.degrees.clone(), self.lambda(), check_degree)
    }

    /// Measures the assignment realized by `code` under the continuous
    /// mapping of variable node `v` to position `v mod m`.
    pub fn measure(code: &TannerCode, types: &BitChannelTypes, degrees: &[usize]) -> Result<Self, LdpcError> {
        let n = code.n();
        let mut p = vec![vec![0.0; degrees.len()]; types.len()];
        for v in 0..n {
            let d = code.variable_degree(v);
            let j = degrees.iter().position(|&x| x == d).ok_or_else(|| {
                LdpcError::InvalidAssignment(format!("variable node {v} has unlisted degree {d}"))
            })?;
            p[types.type_of_variable(v)][j] += 1.0;
        }
        for row in &mut p {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        Ok(Self {
            types: types.clone(),
            degrees: degrees.to_vec(),
            p,
        })
    }

    /// Largest absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .flatten()
            .zip(other.p.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Alternating row/column rescaling of a nonnegative matrix onto the given
/// marginals, followed by clipping; iterated until every marginal is within
/// `tol`.
pub fn repair_assignment(
    p: &[Vec<f64>],
    row_targets: &[f64],
    col_targets: &[f64],
    tol: f64,
) -> Result<Vec<Vec<f64>>, LdpcError> {
    let rows = row_targets.len();
    let cols = col_targets.len();
    if p.len() != rows || p.iter().any(|r| r.len() != cols) {
        return Err(LdpcError::InvalidAssignment("matrix shape does not match marginals".into()));
    }
    let mut q: Vec<Vec<f64>> = p
        .iter()
        .map(|r| r.iter().map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 }).collect())
        .collect();
    // a column or row with a positive target needs some support
    for j in 0..cols {
        if col_targets[j] > 0.0 && q.iter().all(|r| r[j] == 0.0) {
            for (i, r) in q.iter_mut().enumerate() {
                r[j] = row_targets[i] * col_targets[j];
            }
        }
    }
    for (i, r) in q.iter_mut().enumerate() {
        if row_targets[i] > 0.0 && r.iter().all(|&v| v == 0.0) {
            for (j, v) in r.iter_mut().enumerate() {
                *v = row_targets[i] * col_targets[j];
            }
        }
    }
    for _ in 0..20_000 {
        for (i, r) in q.iter_mut().enumerate() {
            let s: f64 = r.iter().sum();
            if s > 0.0 {
                let f = row_targets[i] / s;
                r.iter_mut().for_each(|v| *v *= f);
            }
        }
        for j in 0..cols {
            let s: f64 = q.iter().map(|r| r[j]).sum();
            if s > 0.0 {
                let f = col_targets[j] / s;
                q.iter_mut().for_each(|r| r[j] *= f);
            }
        }
        for r in q.iter_mut() {
            r.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        }
        let row_err = q
            .iter()
            .zip(row_targets)
            .map(|(r, t)| (r.iter().sum::<f64>() - t).abs())
            .fold(0.0, f64::max);
        let col_err = (0..cols)
            .map(|j| (q.iter().map(|r| r[j]).sum::<f64>() - col_targets[j]).abs())
            .fold(0.0, f64::max);
        if row_err <= tol && col_err <= tol {
            return Ok(q);
        }
    }
    Err(LdpcError::InvalidAssignment("marginal repair did not converge".into()))
}
