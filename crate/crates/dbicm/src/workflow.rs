//! Steps shared by the commands and the acceptance suite.

use anyhow::Result;
use dbicm_core::capacity::capacity_report;
use dbicm_core::channel::eb_n0_to_es_n0_db;
use dbicm_core::constellation::{Constellation, DelayScheme};
use dbicm_core::ldpc::{constrained_peg, ChannelAssignment};
use dbicm_core::pexit::{pexit_threshold, CapacityProfile, JTable, PexitConfig, Threshold};
use dbicm_core::TannerCode;

/// Es/N0 grid covering an Eb/N0 window plus one dB on each side.
pub fn profile_grid(window_eb_db: (f64, f64), rate: f64, bits: usize, step_db: f64) -> Vec<f64> {
    let lo = eb_n0_to_es_n0_db(window_eb_db.0, rate, bits) - 1.0;
    let hi = eb_n0_to_es_n0_db(window_eb_db.1, rate, bits) + 1.0;
    let count = ((hi - lo) / step_db).ceil() as usize + 1;
    (0..count).map(|k| lo + k as f64 * step_db).collect()
}

/// Per-position capacities of `scheme` over the Eb/N0 window, the input of
/// every threshold computation.
pub fn design_profile(
    c: &Constellation,
    scheme: &DelayScheme,
    rate: f64,
    window_eb_db: (f64, f64),
    step_db: f64,
    samples: usize,
    seed: u64,
) -> Result<CapacityProfile> {
    let grid = profile_grid(window_eb_db, rate, c.bits(), step_db);
    let report = capacity_report(c, scheme, &grid, samples, seed)?;
    Ok(CapacityProfile::from_report(&report))
}

/// Builds the code of `assign` at length `n` and finds its threshold.
pub fn build_and_score(
    assign: &ChannelAssignment,
    n: usize,
    rate: f64,
    check_degree: usize,
    seed: u64,
    profile: &CapacityProfile,
    window_eb_db: (f64, f64),
) -> Result<(TannerCode, Threshold)> {
    let code = constrained_peg(assign, n, rate, check_degree, seed)?;
    let th = pexit_threshold(
        &code,
        profile,
        rate,
        window_eb_db,
        JTable::shared(),
        &PexitConfig::default(),
    )?;
    Ok((code, th))
}
