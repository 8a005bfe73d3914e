//! Search for the binary delay scheme that reaches a target rate at the
//! lowest SNR.
//!
//! Square QAM is searched through its real-part PAM: the best PAM scheme is
//! found exhaustively and then applied to both the real and the imaginary
//! label halves.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::capacity::{self, CapacityError, CapacityEstimator};
use crate::constellation::{Constellation, ConstellationError, ConstellationKind, DelayScheme};

/// Es/N0 bracket (dB) for rate inversion.
pub const SNR_BRACKET_DB: (f64, f64) = (-15.0, 45.0);

/// Required-SNR differences below this are ties, resolved lexicographically.
const TIE_DB: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum DelayError {
    Capacity(CapacityError),
    Constellation(ConstellationError),
    InvalidRate(f64),
}

impl fmt::Display for DelayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Capacity(e) => write!(f, "{e}"),
            Self::Constellation(e) => write!(f, "{e}"),
            Self::InvalidRate(r) => write!(f, "code rate {r} must lie in (0, 1)"),
        }
    }
}

impl core::error::Error for DelayError {}

impl From<CapacityError> for DelayError {
    fn from(e: CapacityError) -> Self {
        Self::Capacity(e)
    }
}

impl From<ConstellationError> for DelayError {
    fn from(e: ConstellationError) -> Self {
        Self::Constellation(e)
    }
}

/// A scheme and the Es/N0 (dB) at which it reaches the target rate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredScheme {
    pub scheme: DelayScheme,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DelaySearchResult {
    pub constellation: String,
    pub rate: f64,
    /// Best scheme for the full constellation.
    pub scheme: DelayScheme,
    /// Es/N0 (dB) at which `scheme` reaches `bits * rate`.
    pub snr_db: f64,
    /// Es/N0 (dB) at which BICM reaches `bits * rate`.
    pub bicm_snr_db: f64,
    /// Every scheme scored during the exhaustive stage, in enumeration order.
    /// For QAM these are schemes of the real-part PAM.
    pub candidates: Vec<ScoredScheme>,
    /// Schemes equivalent to `scheme` by the real/imaginary symmetry.
    pub equivalents: Vec<DelayScheme>,
}

impl DelaySearchResult {
    /// SNR saving of the best scheme over BICM in dB.
    pub fn gain_db(&self) -> f64 {
        self.bicm_snr_db - self.snr_db
    }
}

/// Every binary scheme of length `bits` that has at least one undelayed
/// position, in lexicographic order (all-zero first).
pub fn enumerate_schemes(bits: usize) -> Vec<DelayScheme> {
    let full = (1usize << bits) - 1;
    (0..full)
        .map(|code| {
            let delays = (0..bits).map(|i| ((code >> (bits - 1 - i)) & 1) as u32).collect();
            DelayScheme::new(delays).expect("binary scheme with a zero entry")
        })
        .collect()
}

/// Every scheme with delays in `0..=t_max` and at least one undelayed
/// position, in lexicographic order. `t_max = 1` gives [`enumerate_schemes`].
pub fn enumerate_schemes_up_to(bits: usize, t_max: u32) -> Vec<DelayScheme> {
    let base = t_max as usize + 1;
    let total = base.pow(bits as u32);
    (0..total)
        .filter_map(|mut code| {
            let mut delays = alloc::vec![0u32; bits];
            for d in delays.iter_mut().rev() {
                *d = (code % base) as u32;
                code /= base;
            }
            DelayScheme::new(delays).ok()
        })
        .collect()
}

/// Schemes equivalent to `scheme` on `c`: for QAM the real and imaginary
/// halves may be swapped, PAM schemes are only equivalent to themselves.
pub fn scheme_equivalence_class(c: &Constellation, scheme: &DelayScheme) -> Vec<DelayScheme> {
    let mut out = alloc::vec![scheme.clone()];
    if c.kind() == ConstellationKind::Qam {
        if let Ok((a, b)) = scheme.halves() {
            if let Ok(swapped) = DelayScheme::concat(&b, &a) {
                if swapped != *scheme {
                    out.push(swapped);
                }
            }
        }
    }
    out.sort_by(|x, y| x.delays().cmp(y.delays()));
    out
}

/// Scores every scheme in `schemes` on `c` at `bits * rate` target.
pub fn score_schemes(
    c: &Constellation,
    schemes: &[DelayScheme],
    rate: f64,
    estimator: &CapacityEstimator,
    tol_db: f64,
) -> Result<Vec<ScoredScheme>, DelayError> {
    let target = c.bits() as f64 * rate;
    schemes
        .iter()
        .map(|t| {
            let snr_db = capacity::required_snr_db(c, t, target, estimator, SNR_BRACKET_DB, tol_db)?;
            Ok(ScoredScheme {
                scheme: t.clone(),
                snr_db,
            })
        })
        .collect()
}

/// Lowest required SNR; ties go to the lexicographically smallest scheme.
pub fn best_scheme(scored: &[ScoredScheme]) -> Option<&ScoredScheme> {
    let mut best: Option<&ScoredScheme> = None;
    for s in scored {
        best = match best {
            None => Some(s),
            Some(b) if s.snr_db < b.snr_db - TIE_DB => Some(s),
            Some(b) if (s.snr_db - b.snr_db).abs() <= TIE_DB && s.scheme.delays() < b.scheme.delays() => {
                Some(s)
            }
            keep => keep,
        };
    }
    best
}

/// Finds the binary delay scheme minimizing the Es/N0 needed to reach
/// `bits * rate` bits per symbol.
pub fn optimize_delay(
    c: &Constellation,
    rate: f64,
    estimator: &CapacityEstimator,
    tol_db: f64,
) -> Result<DelaySearchResult, DelayError> {
    optimize_delay_up_to(c, rate, 1, estimator, tol_db)
}

/// [`optimize_delay`] over delays `0..=t_max`.
pub fn optimize_delay_up_to(
    c: &Constellation,
    rate: f64,
    t_max: u32,
    estimator: &CapacityEstimator,
    tol_db: f64,
) -> Result<DelaySearchResult, DelayError> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(DelayError::InvalidRate(rate));
    }
    let (scheme, candidates) = match c.kind() {
        ConstellationKind::Pam => {
            let scored = score_schemes(c, &enumerate_schemes_up_to(c.bits(), t_max), rate, estimator, tol_db)?;
            let best = best_scheme(&scored).expect("non-empty").scheme.clone();
            (best, scored)
        }
        ConstellationKind::Qam => {
            let (re, _) = c.real_imag_split()?;
            let scored = score_schemes(&re, &enumerate_schemes_up_to(re.bits(), t_max), rate, estimator, tol_db)?;
            let half = best_scheme(&scored).expect("non-empty").scheme.clone();
            let full = DelayScheme::concat(half.delays(), half.delays())?;
            (full, scored)
        }
    };
    let target = c.bits() as f64 * rate;
    let snr_db = capacity::required_snr_db(c, &scheme, target, estimator, SNR_BRACKET_DB, tol_db)?;
    let bicm_snr_db = capacity::required_snr_db(
        c,
        &DelayScheme::zeros(c.bits()),
        target,
        estimator,
        SNR_BRACKET_DB,
        tol_db,
    )?;
    Ok(DelaySearchResult {
        constellation: c.name(),
        rate,
        equivalents: scheme_equivalence_class(c, &scheme),
        scheme,
        snr_db,
        bicm_snr_db,
        candidates,
    })
}

/// Exhaustive search over every binary scheme of the full constellation.
/// Used to confirm the reduced QAM search.
pub fn exhaustive_delay_search(
    c: &Constellation,
    rate: f64,
    estimator: &CapacityEstimator,
    tol_db: f64,
) -> Result<Vec<ScoredScheme>, DelayError> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(DelayError::InvalidRate(rate));
    }
    score_schemes(c, &enumerate_schemes(c.bits()), rate, estimator, tol_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{gray_pam, gray_qam};

    #[test]
    fn enumeration_is_lexicographic_and_excludes_all_ones() {
        let s = enumerate_schemes(3);
        assert_eq!(s.len(), 7);
        assert_eq!(s[0].delays(), &[0, 0, 0]);
        assert_eq!(s[1].delays(), &[0, 0, 1]);
        assert_eq!(s[6].delays(), &[1, 1, 0]);
        assert!(s.windows(2).all(|w| w[0].delays() < w[1].delays()));
    }

    #[test]
    fn deeper_enumeration_contains_binary_schemes() {
        assert_eq!(enumerate_schemes_up_to(3, 1), enumerate_schemes(3));
        let s = enumerate_schemes_up_to(2, 2);
        // 3^2 vectors minus those without a zero entry
        assert_eq!(s.len(), 9 - 4);
        assert!(s.iter().all(|t| t.delays().contains(&0)));
    }

    #[test]
    fn equivalence_class_swaps_halves() {
        let q = gray_qam(16).unwrap();
        let t = DelayScheme::parse("[0,1,1,0]").unwrap();
        let cls = scheme_equivalence_class(&q, &t);
        assert_eq!(cls.len(), 2);
        assert!(cls.contains(&t));
        assert!(cls.contains(&DelayScheme::parse("[1,0,0,1]").unwrap()));
        let sym = DelayScheme::parse("[0,1,0,1]").unwrap();
        assert_eq!(scheme_equivalence_class(&q, &sym), alloc::vec![sym.clone()]);
        let p = gray_pam(4).unwrap();
        assert_eq!(scheme_equivalence_class(&p, &DelayScheme::parse("[0,1]").unwrap()).len(), 1);
    }

    #[test]
    fn ties_break_lexicographically() {
        let a = ScoredScheme { scheme: DelayScheme::parse("[1,0]").unwrap(), snr_db: 3.0 };
        let b = ScoredScheme { scheme: DelayScheme::parse("[0,1]").unwrap(), snr_db: 3.0 };
        let c = ScoredScheme { scheme: DelayScheme::parse("[0,0]").unwrap(), snr_db: 3.5 };
        let v = alloc::vec![c, a, b.clone()];
        assert_eq!(best_scheme(&v).unwrap(), &b);
    }

    #[test]
    fn four_pam_distinct_delays_tie_at_cm() {
        let p = gray_pam(4).unwrap();
        let est = CapacityEstimator::new(20_000, 1).unwrap();
        let r = optimize_delay(&p, 0.5, &est, 0.01).unwrap();
        assert_eq!(r.scheme.delays(), &[0, 1]);
        let scores: Vec<f64> = r.candidates.iter().map(|s| s.snr_db).collect();
        assert!((scores[1] - scores[2]).abs() < 1e-9, "{scores:?}");
        assert!(r.gain_db() > 0.0);
    }

    #[test]
    fn rejects_bad_rate() {
        let p = gray_pam(4).unwrap();
        let est = CapacityEstimator::new(2_000, 1).unwrap();
        assert_eq!(
            optimize_delay(&p, 1.0, &est, 0.01).unwrap_err(),
            DelayError::InvalidRate(1.0)
        );
    }
}
