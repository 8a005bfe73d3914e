use alloc::format;
use alloc::vec::Vec;

use super::LdpcError;

const SUM_TOL: f64 = 1e-9;

/// Node-perspective variable-node degree distribution with a concentrated
/// check-node degree.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DegreeDistribution {
    degrees: Vec<usize>,
    lambda: Vec<f64>,
    check_degree: usize,
}

impl DegreeDistribution {
    pub fn new(degrees: Vec<usize>, lambda: Vec<f64>, check_degree: usize) -> Result<Self, LdpcError> {
        if degrees.is_empty() || degrees.len() != lambda.len() {
            return Err(LdpcError::InvalidDistribution(format!(
                "{} degrees for {} fractions",
                degrees.len(),
                lambda.len()
            )));
        }
        if degrees[0] == 0 || degrees.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LdpcError::InvalidDistribution(
                "degrees must be positive and strictly increasing".into(),
            ));
        }
        if check_degree < 2 {
            return Err(LdpcError::InvalidDistribution("check degree below 2".into()));
        }
        if lambda.iter().any(|&l| !(-SUM_TOL..=1.0 + SUM_TOL).contains(&l)) {
            return Err(LdpcError::InvalidDistribution("fraction outside [0, 1]".into()));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(LdpcError::InvalidDistribution(format!("fractions sum to {sum}")));
        }
        let lambda = lambda.iter().map(|&l| l.clamp(0.0, 1.0) / sum).collect();
        Ok(Self {
            degrees,
            lambda,
            check_degree,
        })
    }

    /// Degrees `2..=max_degree`.
    pub fn with_max_degree(max_degree: usize, lambda: Vec<f64>, check_degree: usize) -> Result<Self, LdpcError> {
        Self::new((2..=max_degree).collect(), lambda, check_degree)
    }

    /// All variable nodes of degree `degree`.
    pub fn regular(degree: usize, check_degree: usize) -> Result<Self, LdpcError> {
        Self::new(alloc::vec![degree], alloc::vec![1.0], check_degree)
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn check_degree(&self) -> usize {
        self.check_degree
    }

    pub fn max_degree(&self) -> usize {
        *self.degrees.last().expect("non-empty")
    }

    /// Average variable-node degree.
    pub fn mean_degree(&self) -> f64 {
        self.degrees.iter().zip(&self.lambda).map(|(&d, &l)| d as f64 * l).sum()
    }

    /// `1 - mean_degree / check_degree`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.mean_degree() / self.check_degree as f64
    }

    /// Share of edges attached to each degree class.
    pub fn edge_perspective(&self) -> Vec<f64> {
        let mean = self.mean_degree();
        self.degrees
            .iter()
            .zip(&self.lambda)
            .map(|(&d, &l)| d as f64 * l / mean)
            .collect()
    }

    /// Projects onto the fractions consistent with `rate` at this check degree.
    pub fn projected(&self, rate: f64) -> Result<Self, LdpcError> {
        let target = (1.0 - rate) * self.check_degree as f64;
        let lambda = project_lambda(&self.lambda, &self.degrees, target)?;
        Ok(Self {
            degrees: self.degrees.clone(),
            lambda,
            check_degree: self.check_degree,
        })
    }
}

/// Euclidean projection of `x` onto `{l >= 0, sum l = 1, sum d l = mean}` by
/// Dykstra's alternating projections.
pub fn project_lambda(x: &[f64], degrees: &[usize], mean: f64) -> Result<Vec<f64>, LdpcError> {
    let n = x.len();
    let lo = degrees[0] as f64;
    let hi = *degrees.last().expect("non-empty") as f64;
    if n != degrees.len() || !(lo - 1e-12..=hi + 1e-12).contains(&mean) {
        return Err(LdpcError::InvalidDistribution(format!(
            "mean degree {mean} outside [{lo}, {hi}]"
        )));
    }
    if n == 1 {
        return Ok(alloc::vec![1.0]);
    }
    let d: Vec<f64> = degrees.iter().map(|&v| v as f64).collect();
    // affine projection onto {1'l = 1, d'l = mean}
    let nf = n as f64;
    let sd: f64 = d.iter().sum();
    let sdd: f64 = d.iter().map(|v| v * v).sum();
    let det = nf * sdd - sd * sd;
    let affine = |v: &[f64]| -> Vec<f64> {
        let r1 = v.iter().sum::<f64>() - 1.0;
        let r2 = v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() - mean;
        // solve [n sd; sd sdd] [a; b] = [r1; r2]
        let a = (sdd * r1 - sd * r2) / det;
        let b = (nf * r2 - sd * r1) / det;
        v.iter().zip(&d).map(|(vi, di)| vi - a - b * di).collect()
    };
    let mut y = x.to_vec();
    let mut p = alloc::vec![0.0; n];
    let mut q = alloc::vec![0.0; n];
    for _ in 0..100_000 {
        let a_in: Vec<f64> = y.iter().zip(&p).map(|(a, b)| a + b).collect();
        let z = affine(&a_in);
        for i in 0..n {
            p[i] = a_in[i] - z[i];
        }
        let b_in: Vec<f64> = z.iter().zip(&q).map(|(a, b)| a + b).collect();
        let next: Vec<f64> = b_in.iter().map(|v| v.max(0.0)).collect();
        for i in 0..n {
            q[i] = b_in[i] - next[i];
        }
        let change: f64 = next.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        y = next;
        let r1 = (y.iter().sum::<f64>() - 1.0).abs();
        let r2 = (y.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() - mean).abs();
        if change < 1e-14 && r1 < 1e-12 && r2 < 1e-11 {
            break;
        }
    }
    let sum: f64 = y.iter().sum();
    Ok(y.iter().map(|v| v / sum).collect())
}
