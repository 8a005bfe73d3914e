//! Gray-labeled PAM and square QAM constellations, label subsets, and delay
//! schemes.
//!
//! Points are stored in label order: `points[l]` is the symbol whose label has
//! integer value `l`. Bit position 0 is the most significant label bit, so for
//! QAM bits `0..m/2` select the real coordinate and bits `m/2..m` the
//! imaginary one.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::math;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstellationError {
    /// PAM level count is not a power of two (or is below 2).
    NotPowerOfTwo(usize),
    /// QAM order is not a power of four (or is below 4).
    NotSquare(usize),
    PositionOutOfRange { position: usize, bits: usize },
    DuplicatePosition(usize),
    /// Operation needs a QAM constellation.
    NotQam,
    /// The two PAM halves of a product differ.
    MismatchedHalves,
    InvalidScheme(String),
}

impl fmt::Display for ConstellationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotPowerOfTwo(n) => write!(f, "{n} is not a power of two >= 2"),
            Self::NotSquare(n) => write!(f, "{n} is not a power of four >= 4"),
            Self::PositionOutOfRange { position, bits } => {
                write!(f, "bit position {position} out of range for {bits}-bit labels")
            }
            Self::DuplicatePosition(p) => write!(f, "bit position {p} constrained twice"),
            Self::NotQam => write!(f, "operation requires a QAM constellation"),
            Self::MismatchedHalves => write!(f, "real and imaginary PAMs differ"),
            Self::InvalidScheme(msg) => write!(f, "invalid delay scheme: {msg}"),
        }
    }
}

impl core::error::Error for ConstellationError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConstellationKind {
    Pam,
    Qam,
}

/// A uniform Gray-labeled constellation with unit average symbol energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    bits: usize,
    points: Vec<Complex64>,
}

#[inline]
fn gray_decode(mut label: usize) -> usize {
    let mut pos = label;
    while label > 1 {
        label >>= 1;
        pos ^= label;
    }
    pos
}

/// Odd-integer amplitude of the point at ascending position `pos`.
#[inline]
fn odd_amplitude(pos: usize, levels: usize) -> f64 {
    (2 * pos) as f64 - (levels as f64 - 1.0)
}

/// Builds a Gray-labeled `levels`-PAM with amplitudes ascending along the
/// binary-reflected Gray sequence.
pub fn gray_pam(levels: usize) -> Result<Constellation, ConstellationError> {
    if levels < 2 || !levels.is_power_of_two() {
        return Err(ConstellationError::NotPowerOfTwo(levels));
    }
    let scale = math::sqrt((levels * levels - 1) as f64 / 3.0);
    let points = (0..levels)
        .map(|label| Complex64::new(odd_amplitude(gray_decode(label), levels) / scale, 0.0))
        .collect();
    Ok(Constellation {
        kind: ConstellationKind::Pam,
        bits: levels.trailing_zeros() as usize,
        points,
    })
}

/// Builds a square Gray-labeled QAM as the product of two identical Gray
/// PAMs: real-part bits first.
pub fn gray_qam(order: usize) -> Result<Constellation, ConstellationError> {
    if order < 4 || !order.is_power_of_two() || order.trailing_zeros() % 2 != 0 {
        return Err(ConstellationError::NotSquare(order));
    }
    let half = (order.trailing_zeros() / 2) as usize;
    let levels = 1usize << half;
    let scale = math::sqrt(2.0 * (levels * levels - 1) as f64 / 3.0);
    let points = (0..order)
        .map(|label| {
            let re = odd_amplitude(gray_decode(label >> half), levels);
            let im = odd_amplitude(gray_decode(label & (levels - 1)), levels);
            Complex64::new(re / scale, im / scale)
        })
        .collect();
    Ok(Constellation {
        kind: ConstellationKind::Qam,
        bits: 2 * half,
        points,
    })
}

impl Constellation {
    /// Parses `"16qam"`, `"8pam"`, `"qpsk"` or `"bpsk"`.
    pub fn from_name(name: &str) -> Result<Self, ConstellationError> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "bpsk" => return gray_pam(2),
            "qpsk" | "4qam" => return gray_qam(4),
            _ => {}
        }
        let parse = |digits: &str| digits.parse::<usize>().ok();
        if let Some(n) = lower.strip_suffix("qam").and_then(parse) {
            gray_qam(n)
        } else if let Some(n) = lower.strip_suffix("pam").and_then(parse) {
            gray_pam(n)
        } else {
            Err(ConstellationError::InvalidScheme(alloc::format!(
                "unknown modulation '{name}'"
            )))
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            ConstellationKind::Pam => alloc::format!("{}pam", self.order()),
            ConstellationKind::Qam => alloc::format!("{}qam", self.order()),
        }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    /// Number of label bits `m`.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Number of points `M = 2^m`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Points indexed by label value.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Value of bit `position` (0 = MSB) in `label`.
    #[inline]
    pub fn label_bit(&self, label: usize, position: usize) -> u8 {
        ((label >> (self.bits - 1 - position)) & 1) as u8
    }

    /// Label bits MSB first.
    pub fn label_bits(&self, label: usize) -> Vec<u8> {
        (0..self.bits).map(|p| self.label_bit(label, p)).collect()
    }

    /// Label value carrying `bits` (MSB first).
    pub fn label_of(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b as usize & 1))
    }

    /// Integer mask selecting bit `position` within a label value.
    #[inline]
    pub fn position_mask(&self, position: usize) -> usize {
        1 << (self.bits - 1 - position)
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Builds the mask/value pair for a set of `(position, bit)` constraints.
    pub fn constraint_mask(
        &self,
        known: &[(usize, u8)],
    ) -> Result<LabelMask, ConstellationError> {
        let mut mask = 0usize;
        let mut value = 0usize;
        for &(pos, bit) in known {
            if pos >= self.bits {
                return Err(ConstellationError::PositionOutOfRange {
                    position: pos,
                    bits: self.bits,
                });
            }
            let m = self.position_mask(pos);
            if mask & m != 0 {
                return Err(ConstellationError::DuplicatePosition(pos));
            }
            mask |= m;
            if bit & 1 == 1 {
                value |= m;
            }
        }
        Ok(LabelMask { mask, value })
    }

    /// Labels of every point matching all `(position, bit)` constraints.
    pub fn subset(&self, known: &[(usize, u8)]) -> Result<Vec<usize>, ConstellationError> {
        let lm = self.constraint_mask(known)?;
        Ok((0..self.order()).filter(|&l| lm.matches(l)).collect())
    }

    /// True when horizontally or vertically adjacent points differ in exactly
    /// one label bit.
    pub fn is_gray(&self) -> bool {
        let n = self.order();
        let step = self.min_distance();
        for a in 0..n {
            for b in (a + 1)..n {
                let pa = self.points[a];
                let pb = self.points[b];
                let adjacent = match self.kind {
                    ConstellationKind::Pam => ((pa.re - pb.re).abs() - step).abs() < 1e-9,
                    ConstellationKind::Qam => {
                        let same_re = (pa.re - pb.re).abs() < 1e-9;
                        let same_im = (pa.im - pb.im).abs() < 1e-9;
                        (same_re && ((pa.im - pb.im).abs() - step).abs() < 1e-9)
                            || (same_im && ((pa.re - pb.re).abs() - step).abs() < 1e-9)
                    }
                };
                if adjacent && (a ^ b).count_ones() != 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// Splits a QAM into its (real, imaginary) Gray PAMs with unit energy.
    ///
    /// Each half carries half the QAM symbol energy, so the QAM at noise
    /// variance `sigma2` corresponds to either PAM at `2 * sigma2`.
    pub fn real_imag_split(&self) -> Result<(Constellation, Constellation), ConstellationError> {
        if self.kind != ConstellationKind::Qam {
            return Err(ConstellationError::NotQam);
        }
        let levels = 1usize << (self.bits / 2);
        Ok((gray_pam(levels)?, gray_pam(levels)?))
    }

    /// Inverse of [`real_imag_split`](Self::real_imag_split).
    pub fn product(real: &Constellation, imag: &Constellation) -> Result<Self, ConstellationError> {
        if real.kind != ConstellationKind::Pam || imag.kind != ConstellationKind::Pam {
            return Err(ConstellationError::NotQam);
        }
        if real != imag {
            return Err(ConstellationError::MismatchedHalves);
        }
        let half = real.bits;
        let scale = core::f64::consts::FRAC_1_SQRT_2;
        let mask = real.order() - 1;
        let points: Vec<Complex64> = (0..real.order() * imag.order())
            .map(|label| {
                Complex64::new(real.points[label >> half].re, imag.points[label & mask].re) * scale
            })
            .collect();
        // Reuse the closed-form builder so the product is bit-identical to
        // `gray_qam` whenever both halves are canonical Gray PAMs.
        let canonical = gray_qam(points.len())?;
        let matches = canonical
            .points
            .iter()
            .zip(&points)
            .all(|(a, b)| (a - b).norm() < 1e-12);
        if matches {
            Ok(canonical)
        } else {
            Ok(Constellation {
                kind: ConstellationKind::Qam,
                bits: 2 * half,
                points,
            })
        }
    }
}

/// Compact form of a set of label constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelMask {
    pub mask: usize,
    pub value: usize,
}

impl LabelMask {
    #[inline]
    pub fn matches(&self, label: usize) -> bool {
        label & self.mask == self.value
    }

    pub fn count(&self) -> u32 {
        self.mask.count_ones()
    }
}

/// Per-bit-position delays, in time slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<u32>", into = "Vec<u32>"))]
pub struct DelayScheme {
    delays: Vec<u32>,
}

impl TryFrom<Vec<u32>> for DelayScheme {
    type Error = ConstellationError;

    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        DelayScheme::new(v)
    }
}

impl From<DelayScheme> for Vec<u32> {
    fn from(s: DelayScheme) -> Self {
        s.delays
    }
}

impl DelayScheme {
    /// A scheme must be non-empty and contain at least one undelayed position.
    pub fn new(delays: Vec<u32>) -> Result<Self, ConstellationError> {
        if delays.is_empty() {
            return Err(ConstellationError::InvalidScheme("empty delay vector".into()));
        }
        if delays.iter().copied().min() != Some(0) {
            return Err(ConstellationError::InvalidScheme(
                "minimum delay must be 0".into(),
            ));
        }
        Ok(Self { delays })
    }

    /// The BICM scheme: nothing delayed.
    pub fn zeros(bits: usize) -> Self {
        Self { delays: alloc::vec![0; bits] }
    }

    /// Parses a comma-separated list such as `"0,1,0,1"` (brackets and
    /// whitespace are ignored).
    pub fn parse(s: &str) -> Result<Self, ConstellationError> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        let delays = trimmed
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u32>().map_err(|_| {
                    ConstellationError::InvalidScheme(alloc::format!("bad delay '{}'", tok.trim()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(delays)
    }

    pub fn delays(&self) -> &[u32] {
        &self.delays
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn delay(&self, position: usize) -> u32 {
        self.delays[position]
    }

    pub fn t_max(&self) -> u32 {
        self.delays.iter().copied().max().unwrap_or(0)
    }

    pub fn is_bicm(&self) -> bool {
        self.t_max() == 0
    }

    /// Delayed positions `D`.
    pub fn delayed(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.delays[i] != 0).collect()
    }

    /// Undelayed positions.
    pub fn undelayed(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.delays[i] == 0).collect()
    }

    /// Positions whose bits are already decoded when bit `position` is
    /// demapped: every position with a strictly larger delay.
    pub fn known_before(&self, position: usize) -> Vec<usize> {
        let t = self.delays[position];
        (0..self.len()).filter(|&j| self.delays[j] > t).collect()
    }

    /// Label mask of [`known_before`](Self::known_before) for a constellation
    /// with `self.len()` bits.
    pub fn known_mask(&self, position: usize) -> usize {
        let m = self.len();
        self.known_before(position)
            .into_iter()
            .fold(0, |acc, j| acc | (1 << (m - 1 - j)))
    }

    /// Real-part and imaginary-part halves `(T_A, T_B)`.
    pub fn halves(&self) -> Result<(Vec<u32>, Vec<u32>), ConstellationError> {
        if self.len() % 2 != 0 {
            return Err(ConstellationError::InvalidScheme(
                "odd number of bit positions".into(),
            ));
        }
        let h = self.len() / 2;
        Ok((self.delays[..h].to_vec(), self.delays[h..].to_vec()))
    }

    /// Restriction of the scheme to `positions`; the result may have no
    /// zero entry, in which case it is re-based so its minimum is 0.
    pub fn restrict(&self, positions: core::ops::Range<usize>) -> Self {
        let part: Vec<u32> = self.delays[positions].to_vec();
        let min = part.iter().copied().min().unwrap_or(0);
        Self {
            delays: part.into_iter().map(|d| d - min).collect(),
        }
    }

    /// Concatenates two halves into a QAM scheme.
    pub fn concat(a: &[u32], b: &[u32]) -> Result<Self, ConstellationError> {
        let mut v = a.to_vec();
        v.extend_from_slice(b);
        Self::new(v)
    }
}

impl fmt::Display for DelayScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.delays.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn bpsk_points_and_labels() {
        let c = gray_pam(2).unwrap();
        assert!(approx(c.point(0).re, -1.0));
        assert!(approx(c.point(1).re, 1.0));
    }

    #[test]
    fn pam4_is_binary_reflected() {
        let c = gray_pam(4).unwrap();
        let s5 = math::sqrt(5.0);
        // ascending amplitude order carries labels 00, 01, 11, 10
        let expected = [(0b00, -3.0), (0b01, -1.0), (0b11, 1.0), (0b10, 3.0)];
        for (label, amp) in expected {
            assert!(approx(c.point(label).re, amp / s5), "label {label:02b}");
        }
        assert!(approx(c.mean_energy(), 1.0));
    }

    #[test]
    fn pam8_adjacent_labels_differ_in_one_bit() {
        let c = gray_pam(8).unwrap();
        let s21 = math::sqrt(21.0);
        let mut by_amp: Vec<(f64, usize)> = (0..8).map(|l| (c.point(l).re, l)).collect();
        by_amp.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (k, (amp, _)) in by_amp.iter().enumerate() {
            assert!(approx(*amp, (2.0 * k as f64 - 7.0) / s21));
        }
        for w in by_amp.windows(2) {
            assert_eq!((w[0].1 ^ w[1].1).count_ones(), 1);
        }
        assert!(c.is_gray());
    }

    #[test]
    fn qpsk_is_product_of_bpsk() {
        let c = gray_qam(4).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        for p in c.points() {
            assert!(approx(p.re.abs(), r) && approx(p.im.abs(), r));
        }
        // bit 0 drives the real sign, bit 1 the imaginary sign
        assert!(c.point(0b00).re < 0.0 && c.point(0b00).im < 0.0);
        assert!(c.point(0b10).re > 0.0 && c.point(0b10).im < 0.0);
        assert!(c.point(0b01).re < 0.0 && c.point(0b01).im > 0.0);
    }

    #[test]
    fn qam_energy_and_gray() {
        for order in [4, 16, 64, 256, 1024] {
            let c = gray_qam(order).unwrap();
            assert!((c.mean_energy() - 1.0).abs() < 1e-12, "order {order}");
            assert!(c.is_gray(), "order {order}");
            let mut seen = c.points().to_vec();
            seen.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
            for w in seen.windows(2) {
                assert!((w[0] - w[1]).norm() > 1e-9, "duplicate point");
            }
        }
        for levels in [2, 4, 8, 16, 32] {
            assert!((gray_pam(levels).unwrap().mean_energy() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_orders_rejected() {
        assert_eq!(gray_pam(6), Err(ConstellationError::NotPowerOfTwo(6)));
        assert_eq!(gray_pam(1), Err(ConstellationError::NotPowerOfTwo(1)));
        assert_eq!(gray_qam(8), Err(ConstellationError::NotSquare(8)));
        assert_eq!(gray_qam(2), Err(ConstellationError::NotSquare(2)));
        assert_eq!(gray_qam(12), Err(ConstellationError::NotSquare(12)));
    }

    #[test]
    fn qam_real_bits_drive_real_axis() {
        let c = gray_qam(16).unwrap();
        for a in 0..16usize {
            for b in 0..16usize {
                let same_real_bits = (a >> 2) == (b >> 2);
                let same_re = approx(c.point(a).re, c.point(b).re);
                assert_eq!(same_real_bits, same_re);
            }
        }
    }

    #[test]
    fn subset_sizes() {
        let c64 = gray_qam(64).unwrap();
        assert_eq!(c64.subset(&[(4, 0), (5, 0)]).unwrap().len(), 16);
        assert_eq!(c64.subset(&[]).unwrap().len(), 64);
        let c16 = gray_qam(16).unwrap();
        let one = c16.subset(&[(0, 0), (1, 0), (2, 0), (3, 0)]).unwrap();
        assert_eq!(one, vec![0]);
        assert_eq!(
            c16.subset(&[(1, 0), (1, 1)]),
            Err(ConstellationError::DuplicatePosition(1))
        );
        assert!(matches!(
            c16.subset(&[(4, 0)]),
            Err(ConstellationError::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn fig3_partition_of_64qam() {
        let c = gray_qam(64).unwrap();
        let mut union = Vec::new();
        for b4 in 0..2u8 {
            for b5 in 0..2u8 {
                let s = c.subset(&[(4, b4), (5, b5)]).unwrap();
                assert_eq!(s.len(), 16);
                union.extend(s);
            }
        }
        union.sort_unstable();
        assert_eq!(union, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn split_and_product_round_trip() {
        for order in [4, 16, 64, 256] {
            let c = gray_qam(order).unwrap();
            let (re, im) = c.real_imag_split().unwrap();
            assert_eq!(re.order() * im.order(), order);
            assert_eq!(re, gray_pam(re.order()).unwrap());
            let back = Constellation::product(&re, &im).unwrap();
            assert_eq!(back, c);
        }
        assert_eq!(
            gray_pam(4).unwrap().real_imag_split(),
            Err(ConstellationError::NotQam)
        );
    }

    #[test]
    fn scheme_parsing_and_sets() {
        let t = DelayScheme::parse("[0, 1, 0, 1]").unwrap();
        assert_eq!(t.delays(), &[0, 1, 0, 1]);
        assert_eq!(t.delayed(), vec![1, 3]);
        assert_eq!(t.undelayed(), vec![0, 2]);
        assert_eq!(t.t_max(), 1);
        assert_eq!(alloc::format!("{t}"), "[0,1,0,1]");
        assert!(DelayScheme::parse("1,1").is_err());
        assert!(DelayScheme::parse("0,x").is_err());
        let chain = DelayScheme::parse("0,1,2,3").unwrap();
        assert_eq!(chain.known_before(1), vec![2, 3]);
        assert_eq!(chain.known_mask(1), 0b0011);
    }

    #[test]
    fn names_parse() {
        assert_eq!(Constellation::from_name("16QAM").unwrap().order(), 16);
        assert_eq!(Constellation::from_name("8pam").unwrap().bits(), 3);
        assert_eq!(Constellation::from_name("qpsk").unwrap().order(), 4);
        assert!(Constellation::from_name("32qam").is_err());
        assert!(Constellation::from_name("foo").is_err());
    }
}
