//! Published optimized channel assignments for Gray 16-QAM and 64-QAM at
//! rates 1/4, 2/5 and 1/2, with and without delay, and the delay schemes
//! found optimal for 16/64-QAM.
//!
//! Entries are node fractions over degrees 2..=10, rounded to four decimals;
//! [`ReferenceDesign::assignment`] rescales them onto exact row sums.

use dbicm_core::constellation::{Constellation, DelayScheme};
use dbicm_core::ldpc::{BitChannelTypes, ChannelAssignment, LdpcError};

pub const REFERENCE_DEGREES: [usize; 9] = [2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceDesign {
    pub modulation: &'static str,
    pub rate_num: u32,
    pub rate_den: u32,
    pub delayed: bool,
    pub scheme: &'static [u32],
    pub check_degree: usize,
    /// Label positions of each row of `p`.
    pub groups: &'static [&'static [usize]],
    pub p: &'static [[f64; 9]],
    /// Eb/N0 threshold in dB at the published (long) length.
    pub threshold_db: f64,
}

impl ReferenceDesign {
    pub fn rate(&self) -> f64 {
        self.rate_num as f64 / self.rate_den as f64
    }

    /// For example `16qam-1/4-dbicm` or `64qam-2/5-bicm`.
    pub fn name(&self) -> String {
        format!(
            "{}-{}/{}-{}",
            self.modulation,
            self.rate_num,
            self.rate_den,
            if self.delayed { "dbicm" } else { "bicm" }
        )
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::from_name(self.modulation).expect("known modulation")
    }

    pub fn scheme(&self) -> DelayScheme {
        DelayScheme::new(self.scheme.to_vec()).expect("valid scheme")
    }

    pub fn types(&self) -> BitChannelTypes {
        let groups = self.groups.iter().map(|g| g.to_vec()).collect();
        BitChannelTypes::new(self.scheme.len(), groups).expect("groups partition the label")
    }

    pub fn assignment(&self) -> Result<ChannelAssignment, LdpcError> {
        ChannelAssignment::from_rounded(
            self.types(),
            REFERENCE_DEGREES.to_vec(),
            self.p.iter().map(|r| r.to_vec()).collect(),
        )
    }
}

const G16: &[&[usize]] = &[&[0, 2], &[1, 3]];
const G64: &[&[usize]] = &[&[0, 3], &[1, 4], &[2, 5]];

const fn entry(
    modulation: &'static str,
    rate: (u32, u32),
    delayed: bool,
    scheme: &'static [u32],
    p: &'static [[f64; 9]],
    threshold_db: f64,
) -> ReferenceDesign {
    let check_degree = match rate {
        (1, 4) => 4,
        (2, 5) => 5,
        _ => 7,
    };
    let groups = if scheme.len() == 4 { G16 } else { G64 };
    ReferenceDesign {
        modulation,
        rate_num: rate.0,
        rate_den: rate.1,
        delayed,
        scheme,
        check_degree,
        groups,
        p,
        threshold_db,
    }
}

const BICM16: &[u32] = &[0, 0, 0, 0];
const BICM64: &[u32] = &[0, 0, 0, 0, 0, 0];

pub static REFERENCE_DESIGNS: [ReferenceDesign; 12] = [
    entry(
        "16qam",
        (1, 4),
        true,
        &[0, 1, 0, 1],
        &[
            [0.3866, 0.0575, 0.0, 0.0006, 0.0003, 0.0, 0.0, 0.0113, 0.0436],
            [0.4020, 0.0381, 0.0, 0.0009, 0.0001, 0.0, 0.0002, 0.0007, 0.0580],
        ],
        0.8398,
    ),
    entry(
        "16qam",
        (1, 4),
        false,
        BICM16,
        &[
            [0.3580, 0.0793, 0.0, 0.0009, 0.0042, 0.0048, 0.0005, 0.0061, 0.0462],
            [0.4149, 0.0291, 0.0003, 0.0002, 0.0, 0.0027, 0.0005, 0.0040, 0.0484],
        ],
        1.3672,
    ),
    entry(
        "16qam",
        (2, 5),
        true,
        &[0, 1, 0, 1],
        &[
            [0.3039, 0.1868, 0.0, 0.0, 0.0030, 0.0038, 0.0013, 0.0009, 0.0002],
            [0.3375, 0.0601, 0.0060, 0.0002, 0.0124, 0.0057, 0.0008, 0.0081, 0.0693],
        ],
        1.8066,
    ),
    entry(
        "16qam",
        (2, 5),
        false,
        BICM16,
        &[
            [0.4918, 0.0, 0.0, 0.0017, 0.0019, 0.0, 0.0001, 0.0037, 0.0008],
            [0.1672, 0.2141, 0.0034, 0.0005, 0.0066, 0.0, 0.0513, 0.0567, 0.0001],
        ],
        2.0938,
    ),
    entry(
        "16qam",
        (1, 2),
        true,
        &[0, 1, 0, 1],
        &[
            [0.3579, 0.0887, 0.0, 0.0015, 0.0, 0.0, 0.0004, 0.0003, 0.0512],
            [0.2623, 0.1219, 0.0, 0.0017, 0.0016, 0.0, 0.0193, 0.0018, 0.0913],
        ],
        2.5703,
    ),
    entry(
        "16qam",
        (1, 2),
        false,
        BICM16,
        &[
            [0.2457, 0.1819, 0.0029, 0.0, 0.0001, 0.0013, 0.0004, 0.0093, 0.0583],
            [0.3464, 0.0605, 0.0035, 0.0, 0.0002, 0.0024, 0.0001, 0.0052, 0.0817],
        ],
        2.7266,
    ),
    entry(
        "64qam",
        (1, 4),
        true,
        &[1, 0, 1, 1, 0, 1],
        &[
            [0.2552, 0.0098, 0.0006, 0.0, 0.0021, 0.0001, 0.0006, 0.0043, 0.0605],
            [0.2671, 0.0658, 0.0004, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.2701, 0.0072, 0.0046, 0.0051, 0.0007, 0.0, 0.0003, 0.0031, 0.0422],
        ],
        2.1387,
    ),
    entry(
        "64qam",
        (1, 4),
        false,
        BICM64,
        &[
            [0.2449, 0.0592, 0.0071, 0.0037, 0.0016, 0.0007, 0.0002, 0.0002, 0.0159],
            [0.2109, 0.0264, 0.0012, 0.0004, 0.0038, 0.0015, 0.0001, 0.0002, 0.0887],
            [0.3249, 0.0062, 0.0013, 0.0008, 0.0001, 0.0, 0.0, 0.0, 0.0],
        ],
        2.8516,
    ),
    entry(
        "64qam",
        (2, 5),
        true,
        &[0, 0, 1, 0, 0, 1],
        &[
            [0.2058, 0.0033, 0.0065, 0.0162, 0.0, 0.0011, 0.0054, 0.0711, 0.0240],
            [0.2567, 0.0724, 0.0018, 0.0020, 0.0001, 0.0002, 0.0001, 0.0001, 0.0001],
            [0.2107, 0.1222, 0.0003, 0.0001, 0.0, 0.0, 0.0, 0.0, 0.0],
        ],
        3.6230,
    ),
    entry(
        "64qam",
        (2, 5),
        false,
        BICM64,
        &[
            [0.2216, 0.0059, 0.0042, 0.0, 0.0001, 0.0075, 0.0001, 0.0923, 0.0017],
            [0.2230, 0.0964, 0.0003, 0.0, 0.0002, 0.0107, 0.0, 0.0008, 0.0019],
            [0.2179, 0.1151, 0.0002, 0.0001, 0.0, 0.0, 0.0, 0.0, 0.0],
        ],
        4.1504,
    ),
    entry(
        "64qam",
        (1, 2),
        true,
        &[0, 0, 1, 0, 0, 1],
        &[
            [0.2401, 0.0071, 0.0005, 0.0010, 0.0002, 0.0, 0.0, 0.0005, 0.0840],
            [0.1576, 0.1398, 0.0004, 0.0009, 0.0, 0.0, 0.0, 0.0004, 0.0341],
            [0.1957, 0.0995, 0.0017, 0.0001, 0.0001, 0.0, 0.0, 0.0002, 0.0359],
        ],
        4.8340,
    ),
    entry(
        "64qam",
        (1, 2),
        false,
        BICM64,
        &[
            [0.1931, 0.0652, 0.0017, 0.0002, 0.0, 0.0003, 0.0, 0.0, 0.0728],
            [0.2215, 0.0855, 0.0005, 0.0015, 0.0001, 0.0001, 0.0, 0.0001, 0.0240],
            [0.1789, 0.0957, 0.0004, 0.0002, 0.0002, 0.0, 0.0, 0.0, 0.0580],
        ],
        5.2051,
    ),
];

/// Optimal delay schemes for Gray QAM: `(modulation, rate, scheme)`.
pub static OPTIMAL_SCHEMES: [(&str, (u32, u32), &[u32]); 8] = [
    ("16qam", (1, 4), &[0, 1, 0, 1]),
    ("16qam", (1, 3), &[0, 1, 0, 1]),
    ("16qam", (2, 5), &[0, 1, 0, 1]),
    ("16qam", (1, 2), &[0, 1, 0, 1]),
    ("64qam", (1, 4), &[1, 0, 1, 1, 0, 1]),
    ("64qam", (1, 3), &[0, 1, 0, 0, 1, 0]),
    ("64qam", (2, 5), &[0, 0, 1, 0, 0, 1]),
    ("64qam", (1, 2), &[0, 0, 1, 0, 0, 1]),
];

/// Capacity gain of the optimal scheme over BICM in dB, same order as
/// [`OPTIMAL_SCHEMES`].
pub static OPTIMAL_GAINS_DB: [f64; 8] = [0.55, 0.4, 0.3, 0.2, 0.7, 0.6, 0.55, 0.45];

pub fn reference_design(name: &str) -> Option<&'static ReferenceDesign> {
    let key = name.trim().to_ascii_lowercase();
    REFERENCE_DESIGNS.iter().find(|d| d.name() == key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_close_to_their_label_share() {
        for d in &REFERENCE_DESIGNS {
            let types = d.types();
            for (i, row) in d.p.iter().enumerate() {
                let s: f64 = row.iter().sum();
                assert!((s - types.share(i)).abs() < 2e-3, "{} row {i}: {s}", d.name());
            }
            assert!(d.assignment().is_ok(), "{}", d.name());
        }
    }

    #[test]
    fn mean_degree_matches_rate() {
        for d in &REFERENCE_DESIGNS {
            let a = d.assignment().unwrap();
            let mean: f64 = a.lambda().iter().zip(REFERENCE_DEGREES).map(|(l, j)| l * j as f64).sum();
            let want = (1.0 - d.rate()) * d.check_degree as f64;
            assert!((mean - want).abs() < 0.05, "{}: {mean} vs {want}", d.name());
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(reference_design("16QAM-1/4-DBICM").unwrap().threshold_db, 0.8398);
        assert!(reference_design("16qam-1/3-dbicm").is_none());
        assert_eq!(REFERENCE_DESIGNS.iter().filter(|d| d.delayed).count(), 6);
    }
}
