//! LDPC ensembles and Tanner-graph construction.
//!
//! Degree fractions are node-perspective throughout: `lambda[j]` is the share
//! of variable nodes with degree `degrees[j]`, and `P[i][j]` the share of all
//! variable nodes that have degree `degrees[j]` and sit on bit-channel type
//! `i`.

mod assign;
mod degree;
mod peg;
mod tanner;

use alloc::string::String;
use core::fmt;

pub use assign::{classify_bit_channels, repair_assignment, BitChannelTypes, ChannelAssignment};
pub use degree::{project_lambda, DegreeDistribution};
pub use peg::{constrained_peg, conventional_peg, expand_degree_sequences, round_assignment};
pub use tanner::TannerCode;

#[derive(Debug, Clone, PartialEq)]
pub enum LdpcError {
    InvalidDistribution(String),
    InvalidAssignment(String),
    /// Code length not divisible by the number of label bits.
    Indivisible { n: usize, bits: usize },
    /// `N (1 - R)` is not an integer.
    NonIntegralChecks { n: usize, rate: f64 },
    InfeasibleRounding(String),
    /// No check node left with free sockets for this variable node.
    NoCheckCapacity { variable: usize },
    InvalidGraph(String),
}

impl fmt::Display for LdpcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidDistribution(s) => write!(f, "invalid degree distribution: {s}"),
            Self::InvalidAssignment(s) => write!(f, "invalid channel assignment: {s}"),
            Self::Indivisible { n, bits } => {
                write!(f, "code length {n} is not divisible by {bits} label bits")
            }
            Self::NonIntegralChecks { n, rate } => {
                write!(f, "length {n} at rate {rate} gives a fractional number of checks")
            }
            Self::InfeasibleRounding(s) => write!(f, "cannot round ensemble to integers: {s}"),
            Self::NoCheckCapacity { variable } => {
                write!(f, "no check node has free sockets for variable node {variable}")
            }
            Self::InvalidGraph(s) => write!(f, "invalid parity-check matrix: {s}"),
        }
    }
}

impl core::error::Error for LdpcError {}

/// Number of check nodes `N (1 - R)`, which must be integral.
pub fn check_count(n: usize, rate: f64) -> Result<usize, LdpcError> {
    let exact = n as f64 * (1.0 - rate);
    let m = crate::math::round(exact);
    if !(rate > 0.0 && rate < 1.0) || (exact - m).abs() > 1e-6 || m < 1.0 {
        return Err(LdpcError::NonIntegralChecks { n, rate });
    }
    Ok(m as usize)
}
