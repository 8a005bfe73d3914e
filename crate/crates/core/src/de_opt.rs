//! Two cascaded differential-evolution stages: the degree distribution first,
//! then the channel assignment with the degree distribution held fixed.
//!
//! Every candidate is scored by building a graph with the PEG constructor and
//! measuring its PEXIT threshold; lower is better.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;

use crate::ldpc::{
    self, conventional_peg, constrained_peg, repair_assignment, BitChannelTypes, ChannelAssignment,
    DegreeDistribution, LdpcError, TannerCode,
};
use crate::par;
use crate::pexit::{pexit_threshold, CapacityProfile, JTable, PexitConfig, Threshold};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeConfig {
    /// Population size `N1`.
    pub population: usize,
    /// Generations `N2`.
    pub generations: usize,
    /// Differential weight `F`.
    pub weight: f64,
    /// Crossover probability `CR`.
    pub crossover: f64,
    pub seed: u64,
}

impl DeConfig {
    /// `N1 = 10 (V - 1)`, ten generations, `F = CR = 0.5`.
    pub fn for_lambda(max_degree: usize, seed: u64) -> Self {
        Self {
            population: 10 * (max_degree - 1),
            generations: 10,
            weight: 0.5,
            crossover: 0.5,
            seed,
        }
    }

    /// `N1 = 10 (S V - 1)`, ten generations, `F = CR = 0.5`.
    pub fn for_assignment(types: usize, max_degree: usize, seed: u64) -> Self {
        Self {
            population: 10 * (types * max_degree - 1),
            generations: 10,
            weight: 0.5,
            crossover: 0.5,
            seed,
        }
    }

    fn validate(&self) -> Result<(), DeError> {
        if self.population == 0 || (self.generations > 0 && self.population < 4) {
            return Err(DeError::Config("population must be at least 4 when evolving"));
        }
        if !(0.0..=1.0).contains(&self.weight) || !(0.0..=1.0).contains(&self.crossover) {
            return Err(DeError::Config("weight and crossover must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeError {
    Config(&'static str),
    Ldpc(LdpcError),
    /// No candidate decoded inside the SNR window.
    NoFeasibleCandidate,
}

impl fmt::Display for DeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(s) => write!(f, "invalid evolution settings: {s}"),
            Self::Ldpc(e) => write!(f, "{e}"),
            Self::NoFeasibleCandidate => write!(f, "no candidate converges inside the SNR window"),
        }
    }
}

impl core::error::Error for DeError {}

impl From<LdpcError> for DeError {
    fn from(e: LdpcError) -> Self {
        Self::Ldpc(e)
    }
}

/// Everything a candidate is scored against.
#[derive(Debug, Clone)]
pub struct DesignPoint {
    pub profile: CapacityProfile,
    pub types: BitChannelTypes,
    pub rate: f64,
    pub check_degree: usize,
    /// Graph length used while scoring candidates.
    pub length: usize,
    /// Eb/N0 search window in dB.
    pub window: (f64, f64),
    pub pexit: PexitConfig,
    /// PEG seed shared by all candidates so they are compared on equal terms.
    pub peg_seed: u64,
}

#[derive(Debug, Clone)]
pub struct LambdaDesign {
    pub lambda: DegreeDistribution,
    pub threshold: Threshold,
    pub code: TannerCode,
    /// Best threshold after initialization and after each generation.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AssignmentDesign {
    pub assignment: ChannelAssignment,
    pub threshold: Threshold,
    pub code: TannerCode,
    pub history: Vec<f64>,
}

/// rand/1/bin: `child = x_r1 + F (x_r2 - x_r3)` crossed with the parent,
/// then `repair`ed. With `CR = 0` no coordinate is crossed over, so children
/// equal their parents. Returns `None` where repair rejects a child.
pub fn mutate_recombine<R>(
    population: &[Vec<f64>],
    weight: f64,
    crossover: f64,
    seed: u64,
    repair: R,
) -> Vec<Option<Vec<f64>>>
where
    R: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let np = population.len();
    let mut rng = rng::stream(seed, 0);
    let mut out = Vec::with_capacity(np);
    for (i, parent) in population.iter().enumerate() {
        let dim = parent.len();
        let mut child = parent.clone();
        if np >= 4 {
            let mut pick = |exclude: &[usize]| loop {
                let r = rng.random_range(0..np);
                if !exclude.contains(&r) {
                    break r;
                }
            };
            let r1 = pick(&[i]);
            let r2 = pick(&[i, r1]);
            let r3 = pick(&[i, r1, r2]);
            let forced = rng.random_range(0..dim.max(1));
            for j in 0..dim {
                let take: bool = rng.random::<f64>() < crossover || (crossover > 0.0 && j == forced);
                if take {
                    child[j] = population[r1][j] + weight * (population[r2][j] - population[r3][j]);
                }
            }
        }
        out.push(repair(&child));
    }
    out
}

/// Threshold cache keyed by the candidate rounded to 1e-4.
type Cache = BTreeMap<Vec<i64>, Option<(Threshold, TannerCode)>>;

fn cache_key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| crate::math::round(v * 1e4) as i64).collect()
}

/// Scores candidates not yet in `cache`, in parallel.
fn score_all<B>(xs: &[Vec<f64>], cache: &mut Cache, build: &B, design: &DesignPoint, table: &JTable)
where
    B: Fn(&[f64]) -> Result<TannerCode, LdpcError> + Sync + Send,
{
    let mut todo: Vec<(Vec<i64>, Vec<f64>)> = Vec::new();
    for x in xs {
        let k = cache_key(x);
        if !cache.contains_key(&k) && !todo.iter().any(|(t, _)| *t == k) {
            todo.push((k, x.clone()));
        }
    }
    let results = par::map(todo, |(k, x)| {
        let scored = build(&x).ok().and_then(|code| {
            pexit_threshold(&code, &design.profile, design.rate, design.window, table, &design.pexit)
                .ok()
                .map(|t| (t, code))
        });
        (k, scored)
    });
    for (k, s) in results {
        cache.insert(k, s);
    }
}

fn score_of(cache: &Cache, x: &[f64]) -> f64 {
    match cache.get(&cache_key(x)) {
        Some(Some((t, _))) => t.eb_n0_db,
        _ => f64::INFINITY,
    }
}

struct Evolved {
    best: Vec<f64>,
    threshold: Threshold,
    code: TannerCode,
    history: Vec<f64>,
}

fn evolve<B, R>(
    cfg: &DeConfig,
    mut population: Vec<Vec<f64>>,
    repair: R,
    build: B,
    design: &DesignPoint,
    table: &JTable,
) -> Result<Evolved, DeError>
where
    B: Fn(&[f64]) -> Result<TannerCode, LdpcError> + Sync + Send,
    R: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut cache = Cache::new();
    score_all(&population, &mut cache, &build, design, table);
    let mut scores: Vec<f64> = population.iter().map(|x| score_of(&cache, x)).collect();
    let best_index = |scores: &[f64]| {
        (0..scores.len())
            .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
            .expect("non-empty")
    };
    let mut best = population[best_index(&scores)].clone();
    let mut best_score = score_of(&cache, &best);
    let mut history = vec![best_score];
    for g in 0..cfg.generations {
        let children = mutate_recombine(
            &population,
            cfg.weight,
            cfg.crossover,
            rng::derive_seed(cfg.seed, g as u64 + 1),
            &repair,
        );
        let valid: Vec<Vec<f64>> = children.iter().flatten().cloned().collect();
        score_all(&valid, &mut cache, &build, design, table);
        for (i, child) in children.into_iter().enumerate() {
            if let Some(child) = child {
                let s = score_of(&cache, &child);
                if s <= scores[i] {
                    population[i] = child;
                    scores[i] = s;
                }
            }
        }
        let bi = best_index(&scores);
        if scores[bi] < best_score {
            best_score = scores[bi];
            best = population[bi].clone();
        }
        history.push(best_score);
    }
    match cache.get(&cache_key(&best)) {
        Some(Some((t, code))) => Ok(Evolved {
            best,
            threshold: *t,
            code: code.clone(),
            history,
        }),
        _ => Err(DeError::NoFeasibleCandidate),
    }
}

/// First stage: evolves node-perspective fractions over degrees
/// `2..=max_degree` at the design rate; candidates are built with plain PEG.
pub fn optimize_lambda(
    cfg: &DeConfig,
    design: &DesignPoint,
    max_degree: usize,
    table: &JTable,
) -> Result<LambdaDesign, DeError> {
    cfg.validate()?;
    ldpc::check_count(design.length, design.rate)?;
    let degrees: Vec<usize> = (2..=max_degree).collect();
    let mean = (1.0 - design.rate) * design.check_degree as f64;
    let project = |x: &[f64]| ldpc::project_lambda(x, &degrees, mean).ok();
    let mut rng = rng::stream(cfg.seed, 0);
    let mut population = Vec::with_capacity(cfg.population);
    while population.len() < cfg.population {
        let raw: Vec<f64> = (0..degrees.len()).map(|_| rng.random::<f64>()).collect();
        population.push(project(&raw).ok_or(DeError::Ldpc(LdpcError::InvalidDistribution(
            "design rate unreachable with these degrees".into(),
        )))?);
    }
    let build = |x: &[f64]| {
        let l = DegreeDistribution::new(degrees.clone(), x.to_vec(), design.check_degree)?;
        conventional_peg(&l, design.length, design.rate, design.peg_seed)
    };
    let ev = evolve(cfg, population, project, build, design, table)?;
    Ok(LambdaDesign {
        lambda: DegreeDistribution::new(degrees, ev.best, design.check_degree)?,
        threshold: ev.threshold,
        code: ev.code,
        history: ev.history,
    })
}

/// Second stage: evolves the channel assignment with column sums pinned to
/// `lambda`. The population starts from the uniform assignment plus jitter;
/// member 0 is the uniform assignment itself.
pub fn optimize_assignment(
    cfg: &DeConfig,
    lambda: &DegreeDistribution,
    design: &DesignPoint,
    table: &JTable,
) -> Result<AssignmentDesign, DeError> {
    cfg.validate()?;
    let types = design.types.clone();
    let s = types.len();
    let d = lambda.degrees().len();
    let row_targets: Vec<f64> = (0..s).map(|i| types.share(i)).collect();
    let col_targets = lambda.lambda().to_vec();
    let to_matrix = |x: &[f64]| -> Vec<Vec<f64>> { x.chunks(d).map(<[f64]>::to_vec).collect() };
    let repair = |x: &[f64]| {
        repair_assignment(&to_matrix(x), &row_targets, &col_targets, 1e-9)
            .ok()
            .map(|m| m.concat())
    };
    let uniform = ChannelAssignment::uniform(types.clone(), lambda);
    let base: Vec<f64> = uniform.rows().concat();
    let generations = if s == 1 { 0 } else { cfg.generations };
    let mut rng = rng::stream(cfg.seed, 0);
    let mut population = vec![base.clone()];
    let size = if s == 1 { 1 } else { cfg.population };
    while population.len() < size {
        let jittered: Vec<f64> = base
            .iter()
            .map(|&v| v * (1.0 + 0.9 * (2.0 * rng.random::<f64>() - 1.0)))
            .collect();
        if let Some(p) = repair(&jittered) {
            population.push(p);
        }
    }
    let degrees = lambda.degrees().to_vec();
    let build = |x: &[f64]| {
        let a = ChannelAssignment::new(types.clone(), degrees.clone(), to_matrix(x))?;
        constrained_peg(&a, design.length, design.rate, design.check_degree, design.peg_seed)
    };
    let stage = DeConfig {
        generations,
        population: size,
        ..*cfg
    };
    let ev = evolve(&stage, population, repair, build, design, table)?;
    Ok(AssignmentDesign {
        assignment: ChannelAssignment::new(types, degrees, to_matrix(&ev.best))?,
        threshold: ev.threshold,
        code: ev.code,
        history: ev.history,
    })
}
