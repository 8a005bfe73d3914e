//! The subcommands. Each takes resolved settings and writes its artifacts.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dbicm_core::capacity::{capacity_report, CapacityEstimator, Query};
use dbicm_core::constellation::{Constellation, DelayScheme};
use dbicm_core::de_opt::{optimize_assignment, optimize_lambda, DeConfig, DesignPoint};
use dbicm_core::delay_opt::optimize_delay_up_to;
use dbicm_core::ldpc::{BitChannelTypes, ChannelAssignment, DegreeDistribution};
use dbicm_core::pexit::{JTable, PexitConfig, Threshold};
use dbicm_core::rng::derive_seed;
use dbicm_core::sim::{FramePipeline, FrameTally};
use dbicm_core::NoiseModel;

use crate::alist::{parse_alist, write_alist};
use crate::artifact::{csv_text, fmt_f64, write_atomic, write_csv, write_json, Stamp};
use crate::config::{CapacityConfig, DesignCodeConfig, DumpConfig, OptimizeDelayConfig, SimulateConfig};
use crate::reference::reference_design;
use crate::sidecar::CodeSidecar;
use crate::workflow::{build_and_score, design_profile};

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(ext);
    PathBuf::from(s)
}

fn constellation(name: &str) -> Result<Constellation> {
    Ok(Constellation::from_name(name)?)
}

// ---------------------------------------------------------------- capacity

#[derive(Serialize)]
struct CapacityOutput {
    report: dbicm_core::CapacityReport,
    cm: Vec<dbicm_core::Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eb_n0_db: Option<Vec<f64>>,
}

pub fn capacity(cfg: &CapacityConfig) -> Result<Vec<PathBuf>> {
    let stamp = Stamp::new(cfg)?;
    let c = constellation(&cfg.modulation)?;
    let t = DelayScheme::new(cfg.scheme.clone())?;
    let report = capacity_report(&c, &t, &cfg.es_n0_db, cfg.samples, cfg.seed)?;
    let est = CapacityEstimator::new(cfg.samples, cfg.seed)?;
    let cm: Vec<_> = cfg
        .es_n0_db
        .iter()
        .map(|&db| est.evaluate(&c, NoiseModel::from_es_n0_db(db), &[Query::cm()])[0])
        .collect();
    let mut rows = Vec::new();
    for (s, &db) in cfg.es_n0_db.iter().enumerate() {
        for (i, e) in report.per_bit[s].iter().enumerate() {
            rows.push(vec![fmt_f64(db), i.to_string(), fmt_f64(e.value), fmt_f64(e.stderr)]);
        }
        let a = report.aggregate[s];
        rows.push(vec![fmt_f64(db), "sum".into(), fmt_f64(a.value), fmt_f64(a.stderr)]);
        rows.push(vec![fmt_f64(db), "cm".into(), fmt_f64(cm[s].value), fmt_f64(cm[s].stderr)]);
    }
    let csv_path = with_ext(&cfg.out, ".csv");
    let json_path = with_ext(&cfg.out, ".json");
    write_csv(&csv_path, &stamp, &["snr_db", "bit", "capacity", "stderr"], &rows)?;
    let out = CapacityOutput {
        report,
        cm,
        eb_n0_db: cfg.eb_n0_db.clone(),
    };
    write_json(&json_path, &stamp, "capacity", &out)?;
    Ok(vec![csv_path, json_path])
}

// ---------------------------------------------------------- optimize-delay

#[derive(Serialize)]
struct DelayOutput {
    #[serde(flatten)]
    result: dbicm_core::delay_opt::DelaySearchResult,
    gain_db: f64,
}

pub fn optimize_delay(cfg: &OptimizeDelayConfig) -> Result<Vec<PathBuf>> {
    let stamp = Stamp::new(cfg)?;
    let c = constellation(&cfg.modulation)?;
    let est = CapacityEstimator::new(cfg.samples, cfg.seed)?;
    let result = optimize_delay_up_to(&c, cfg.rate, cfg.tmax, &est, cfg.tol_db)?;
    let rows: Vec<Vec<String>> = result
        .candidates
        .iter()
        .map(|s| vec![join_delays(s.scheme.delays()), fmt_f64(s.snr_db)])
        .collect();
    let json_path = with_ext(&cfg.out, ".json");
    let csv_path = with_ext(&cfg.out, ".csv");
    write_csv(&csv_path, &stamp, &["scheme", "es_n0_db"], &rows)?;
    let gain_db = result.gain_db();
    write_json(&json_path, &stamp, "optimize-delay", &DelayOutput { result, gain_db })?;
    Ok(vec![json_path, csv_path])
}

fn join_delays(d: &[u32]) -> String {
    d.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

// ------------------------------------------------------------- design-code

#[derive(Serialize)]
struct StageReport {
    candidate: String,
    eb_n0_db: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct DesignOutput {
    lambda: Vec<f64>,
    degrees: Vec<usize>,
    groups: Vec<Vec<usize>>,
    assignment: Vec<Vec<f64>>,
    stages: Vec<StageReport>,
    lambda_history: Vec<f64>,
    assignment_history: Vec<f64>,
}

fn types_for(cfg: &DesignCodeConfig, c: &Constellation, t: &DelayScheme) -> BitChannelTypes {
    match cfg.types.as_str() {
        "single" => BitChannelTypes::single(c.bits()),
        "per-bit" => BitChannelTypes::new(c.bits(), (0..c.bits()).map(|i| vec![i]).collect())
            .expect("one type per position"),
        _ => BitChannelTypes::symmetric(c, t),
    }
}

pub fn design_code(cfg: &DesignCodeConfig) -> Result<Vec<PathBuf>> {
    let stamp = Stamp::new(cfg)?;
    let c = constellation(&cfg.modulation)?;
    let t = DelayScheme::new(cfg.scheme.clone())?;
    let profile = design_profile(&c, &t, cfg.rate, cfg.window, cfg.profile_step, cfg.samples, cfg.seed)?;
    let table = JTable::shared();
    let mut stages = Vec::new();
    let mut lambda_history = Vec::new();
    let mut assignment_history = Vec::new();
    let stage = |name: &str, th: Threshold| StageReport {
        candidate: name.to_string(),
        eb_n0_db: th.eb_n0_db,
        iterations: th.iterations,
    };

    let (types, assign) = match cfg.reference.as_deref() {
        Some(name) => {
            let d = reference_design(name).context("unknown reference design")?;
            (d.types(), d.assignment()?)
        }
        None => {
            let types = types_for(cfg, &c, &t);
            let design = DesignPoint {
                profile: profile.clone(),
                types: types.clone(),
                rate: cfg.rate,
                check_degree: cfg.check_degree,
                length: cfg.proto_length,
                window: cfg.window,
                pexit: PexitConfig::default(),
                peg_seed: cfg.seed,
            };
            let de = |population, seed| DeConfig {
                population,
                generations: cfg.generations,
                weight: cfg.weight,
                crossover: cfg.crossover,
                seed,
            };
            eprintln!("optimizing degree distribution");
            let l = optimize_lambda(
                &de(cfg.lambda_population, derive_seed(cfg.seed, 1)),
                &design,
                cfg.max_degree,
                table,
            )?;
            stages.push(stage("lambda", l.threshold));
            lambda_history = l.history;
            eprintln!("optimizing channel assignment");
            let a = optimize_assignment(
                &de(cfg.assign_population, derive_seed(cfg.seed, 2)),
                &l.lambda,
                &design,
                table,
            )?;
            stages.push(stage("assignment", a.threshold));
            assignment_history = a.history;
            (types, a.assignment)
        }
    };

    eprintln!("building length-{} code", cfg.length);
    let (code, th) = build_and_score(&assign, cfg.length, cfg.rate, cfg.check_degree, cfg.seed, &profile, cfg.window)?;
    stages.push(stage("final", th));
    let degrees = assign.degrees().to_vec();
    let mut side = CodeSidecar::describe(&code, &c, &t, cfg.rate, cfg.check_degree, &types, &degrees, cfg.seed)?;
    side.threshold_db = Some(th.eb_n0_db);
    side.config_sha256 = Some(stamp.config_sha256.clone());
    let dist: DegreeDistribution = assign.degree_distribution(cfg.check_degree)?;

    let alist_path = with_ext(&cfg.out, ".alist");
    let side_path = with_ext(&cfg.out, ".json");
    let lambda_path = with_ext(&cfg.out, ".lambda.csv");
    let assign_path = with_ext(&cfg.out, ".assign.csv");
    let thr_path = with_ext(&cfg.out, ".thresholds.csv");
    let design_path = with_ext(&cfg.out, ".design.json");
    write_atomic(&alist_path, write_alist(&code).as_bytes())?;
    write_atomic(&side_path, side.to_json()?.as_bytes())?;
    let lambda_rows: Vec<Vec<String>> = dist
        .degrees()
        .iter()
        .zip(dist.lambda())
        .map(|(d, l)| vec![d.to_string(), fmt_f64(*l)])
        .collect();
    write_csv(&lambda_path, &stamp, &["degree", "fraction"], &lambda_rows)?;
    let mut header: Vec<String> = vec!["bit_channels".into()];
    header.extend(degrees.iter().map(|d| format!("d{d}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let assign_rows: Vec<Vec<String>> = types
        .groups()
        .iter()
        .zip(&side.p)
        .map(|(g, row)| {
            let mut r = vec![join_delays(&g.iter().map(|&x| x as u32).collect::<Vec<_>>())];
            r.extend(row.iter().map(|v| format!("{v:.4}")));
            r
        })
        .collect();
    write_csv(&assign_path, &stamp, &header_refs, &assign_rows)?;
    let thr_rows: Vec<Vec<String>> = stages
        .iter()
        .map(|s| vec![s.candidate.clone(), fmt_f64(s.eb_n0_db), s.iterations.to_string()])
        .collect();
    write_csv(&thr_path, &stamp, &["candidate", "eb_n0_db", "iterations"], &thr_rows)?;
    let out = DesignOutput {
        lambda: dist.lambda().to_vec(),
        degrees,
        groups: types.groups().to_vec(),
        assignment: assign.rows().to_vec(),
        stages,
        lambda_history,
        assignment_history,
    };
    write_json(&design_path, &stamp, "design-code", &out)?;
    Ok(vec![alist_path, side_path, lambda_path, assign_path, thr_path, design_path])
}

// ---------------------------------------------------------------- simulate

/// Running tally of one SNR point, stored between batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Hash of the settings that determine each frame's outcome; frame
    /// budgets and stopping rules are left out so a run can be extended.
    pub frames_sha256: String,
    pub eb_n0_db: f64,
    pub tally: FrameTally,
}

fn done(t: &FrameTally, cfg: &SimulateConfig) -> bool {
    t.frames as usize >= cfg.frames || cfg.target_errors.is_some_and(|e| t.bit_errors >= e)
}

pub fn simulate(cfg: &SimulateConfig) -> Result<Vec<PathBuf>> {
    let stamp = Stamp::new(cfg)?;
    let identity = Stamp::new(&(
        &cfg.code_sha256,
        &cfg.modulation,
        &cfg.scheme,
        cfg.slots,
        cfg.max_iter,
        cfg.seed,
    ))?
    .config_sha256;
    let text = std::fs::read_to_string(&cfg.code).with_context(|| format!("reading {}", cfg.code.display()))?;
    let code = parse_alist(&text).with_context(|| format!("parsing {}", cfg.code.display()))?;
    if let Some(p) = &cfg.assign {
        CodeSidecar::load(p)?.validate(Some(&code))?;
    }
    let c = constellation(&cfg.modulation)?;
    let t = DelayScheme::new(cfg.scheme.clone())?;
    let pipe = FramePipeline::new(c, t, code, cfg.slots, cfg.max_iter).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut rows = Vec::new();
    for &eb in &cfg.eb_n0_db {
        let ck_path = cfg.checkpoint.as_ref().map(|d| d.join(format!("ebn0_{}.json", fmt_f64(eb))));
        let mut tally = match &ck_path {
            Some(p) if p.exists() => {
                let ck: Checkpoint = serde_json::from_str(&std::fs::read_to_string(p)?)
                    .with_context(|| format!("parsing {}", p.display()))?;
                if ck.frames_sha256 != identity || ck.eb_n0_db != eb {
                    bail!("{} belongs to a different configuration", p.display());
                }
                ck.tally
            }
            _ => FrameTally::default(),
        };
        let nm = pipe.noise_at(eb);
        let point_seed = derive_seed(cfg.seed, eb.to_bits());
        while !done(&tally, cfg) {
            let start = tally.frames;
            let end = (start + cfg.batch as u64).min(cfg.frames as u64);
            tally += pipe.run_frames(nm, start..end, point_seed);
            if let Some(p) = &ck_path {
                let ck = Checkpoint {
                    frames_sha256: identity.clone(),
                    eb_n0_db: eb,
                    tally,
                };
                write_atomic(p, serde_json::to_string_pretty(&ck)?.as_bytes())?;
            }
        }
        eprintln!(
            "Eb/N0 {eb} dB: ber {:.3e} fer {:.3e} ({} frames, {} bit errors)",
            tally.ber(),
            tally.fer(),
            tally.frames,
            tally.bit_errors
        );
        rows.push(vec![
            fmt_f64(eb),
            fmt_f64(tally.ber()),
            fmt_f64(tally.fer()),
            tally.frames.to_string(),
            tally.bit_errors.to_string(),
            tally.codewords.to_string(),
            tally.codeword_errors.to_string(),
            tally.info_bits.to_string(),
        ]);
    }
    write_csv(
        &cfg.out,
        &stamp,
        &["ebn0_db", "ber", "fer", "frames", "bit_errors", "codewords", "codeword_errors", "info_bits"],
        &rows,
    )?;
    Ok(vec![cfg.out.clone()])
}

// ------------------------------------------------------ dump-constellation

pub fn constellation_csv(cfg: &DumpConfig) -> Result<String> {
    let stamp = Stamp::new(cfg)?;
    let c = constellation(&cfg.modulation)?;
    let rows: Vec<Vec<String>> = (0..c.order())
        .map(|j| {
            let bits: String = c.label_bits(j).iter().map(|b| char::from(b'0' + b)).collect();
            let z = c.point(j);
            vec![j.to_string(), bits, fmt_f64(z.re), fmt_f64(z.im)]
        })
        .collect();
    csv_text(&stamp, &["index", "label", "re", "im"], &rows)
}

pub fn dump_constellation(cfg: &DumpConfig) -> Result<Vec<PathBuf>> {
    let text = constellation_csv(cfg)?;
    match &cfg.out {
        Some(p) => {
            write_atomic(p, text.as_bytes())?;
            Ok(vec![p.clone()])
        }
        None => {
            print!("{text}");
            Ok(Vec::new())
        }
    }
}

/// Reads an assignment back from a design's `.assign.csv`.
pub fn read_assignment_csv(path: &Path, types: BitChannelTypes) -> Result<ChannelAssignment> {
    let (header, rows) = crate::artifact::read_csv(path)?;
    let degrees = header[1..]
        .iter()
        .map(|h| h.trim_start_matches('d').parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .context("degree columns")?;
    let p = rows
        .iter()
        .map(|r| r[1..].iter().map(|v| v.parse::<f64>()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .context("assignment entries")?;
    Ok(ChannelAssignment::from_rounded(types, degrees, p)?)
}
