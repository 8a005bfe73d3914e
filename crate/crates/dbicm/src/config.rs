//! Layered options: a TOML file (keys spelled like the flags) overridden by
//! command-line flags, then resolved into validated settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dbicm_core::constellation::{Constellation, DelayScheme};

use crate::grid::parse_grid;

/// Invalid configuration; reported with exit status 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

pub fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

macro_rules! layered {
    (
        $(#[$m:meta])*
        pub struct $name:ident {
            $( $(#[$fm:meta])* $f:ident : $t:ty ),* $(,)?
        }
    ) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, clap::Args, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $( $(#[$fm])* #[arg(long)] pub $f: Option<$t>, )*
        }

        impl $name {
            /// Values set in `top` win.
            pub fn overlay(self, top: Self) -> Self {
                Self { $( $f: top.$f.or(self.$f), )* }
            }
        }
    };
}

/// Reads a TOML file of options, rejecting unknown keys.
pub fn load_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// File options (if any) overridden by flags.
pub fn merge<T: Default + for<'de> Deserialize<'de>>(
    file: Option<&Path>,
    flags: T,
    overlay: impl FnOnce(T, T) -> T,
) -> Result<T, ConfigError> {
    let base = match file {
        Some(p) => load_toml(p)?,
        None => T::default(),
    };
    Ok(overlay(base, flags))
}

fn modulation(s: Option<&str>) -> Result<Constellation, ConfigError> {
    let s = s.ok_or_else(|| ConfigError("missing --modulation".into()))?;
    Constellation::from_name(s).map_err(|e| ConfigError(format!("modulation: {e}")))
}

fn scheme(s: Option<&str>, c: &Constellation) -> Result<DelayScheme, ConfigError> {
    let t = match s.map(str::trim) {
        None | Some("bicm") => DelayScheme::zeros(c.bits()),
        Some(s) => DelayScheme::parse(s).map_err(|e| ConfigError(format!("scheme: {e}")))?,
    };
    if t.len() != c.bits() {
        return invalid(format!(
            "scheme has {} entries but {} carries {} bits",
            t.len(),
            c.name(),
            c.bits()
        ));
    }
    Ok(t)
}

fn grid(s: &str, what: &str) -> Result<Vec<f64>, ConfigError> {
    parse_grid(s).map_err(|e| ConfigError(format!("{what}: {e}")))
}

fn rate(r: Option<f64>) -> Result<f64, ConfigError> {
    match r {
        Some(r) if r > 0.0 && r < 1.0 => Ok(r),
        Some(r) => invalid(format!("rate {r} outside (0, 1)")),
        None => invalid("missing --rate"),
    }
}

fn positive(v: Option<usize>, default: usize, what: &str) -> Result<usize, ConfigError> {
    match v.unwrap_or(default) {
        0 => invalid(format!("{what} must be positive")),
        x => Ok(x),
    }
}

fn out_path(p: Option<PathBuf>) -> Result<PathBuf, ConfigError> {
    p.ok_or_else(|| ConfigError("missing --out".into()))
}

/// Concentrated check degree used with each design rate.
pub fn default_check_degree(rate: f64) -> usize {
    if rate <= 0.26 {
        4
    } else if rate <= 0.41 {
        5
    } else {
        7
    }
}

// ---------------------------------------------------------------- capacity

layered! {
    pub struct CapacityOptions {
        /// e.g. 16qam, 8pam, qpsk
        modulation: String,
        /// Delay per label bit such as 0,1,0,1, or "bicm"
        scheme: String,
        /// Es/N0 grid in dB (start:step:stop or a comma list)
        esn0: String,
        /// Eb/N0 grid in dB; needs --rate
        ebn0: String,
        /// Code rate used to convert Eb/N0
        rate: f64,
        /// Monte-Carlo samples per SNR point
        samples: usize,
        seed: u64,
        /// Output path prefix; writes <out>.csv and <out>.json
        out: PathBuf,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityConfig {
    pub modulation: String,
    pub scheme: Vec<u32>,
    pub es_n0_db: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eb_n0_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
}

impl CapacityOptions {
    pub fn resolve(self) -> Result<CapacityConfig, ConfigError> {
        let c = modulation(self.modulation.as_deref())?;
        let t = scheme(self.scheme.as_deref(), &c)?;
        let (es, eb, rate) = match (self.esn0, self.ebn0) {
            (Some(_), Some(_)) => return invalid("give either --esn0 or --ebn0, not both"),
            (Some(g), None) => (grid(&g, "esn0")?, None, self.rate),
            (None, Some(g)) => {
                let r = rate(self.rate)?;
                let eb = grid(&g, "ebn0")?;
                let es = eb
                    .iter()
                    .map(|&x| dbicm_core::channel::eb_n0_to_es_n0_db(x, r, c.bits()))
                    .collect();
                (es, Some(eb), Some(r))
            }
            (None, None) => (grid("0:2:20", "esn0")?, None, self.rate),
        };
        let samples = positive(self.samples, 200_000, "samples")?;
        if samples < 1000 {
            return invalid("samples must be at least 1000");
        }
        Ok(CapacityConfig {
            modulation: c.name(),
            scheme: t.delays().to_vec(),
            es_n0_db: es,
            eb_n0_db: eb,
            rate,
            samples,
            seed: self.seed.unwrap_or(1),
            out: out_path(self.out)?,
        })
    }
}

// ---------------------------------------------------------- optimize-delay

layered! {
    pub struct OptimizeDelayOptions {
        modulation: String,
        rate: f64,
        /// Largest delay considered
        tmax: u32,
        samples: usize,
        seed: u64,
        /// Bisection tolerance in dB
        tol_db: f64,
        /// Output path prefix; writes <out>.json and <out>.csv
        out: PathBuf,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeDelayConfig {
    pub modulation: String,
    pub rate: f64,
    pub tmax: u32,
    pub samples: usize,
    pub seed: u64,
    pub tol_db: f64,
    #[serde(skip)]
    pub out: PathBuf,
}

impl OptimizeDelayOptions {
    pub fn resolve(self) -> Result<OptimizeDelayConfig, ConfigError> {
        let c = modulation(self.modulation.as_deref())?;
        let tmax = self.tmax.unwrap_or(1);
        if tmax == 0 {
            return invalid("tmax must be at least 1");
        }
        let tol_db = self.tol_db.unwrap_or(0.01);
        if tol_db <= 0.0 {
            return invalid("tol-db must be positive");
        }
        let samples = positive(self.samples, 200_000, "samples")?;
        if samples < 1000 {
            return invalid("samples must be at least 1000");
        }
        Ok(OptimizeDelayConfig {
            modulation: c.name(),
            rate: rate(self.rate)?,
            tmax,
            samples,
            seed: self.seed.unwrap_or(1),
            tol_db,
            out: out_path(self.out)?,
        })
    }
}

// ------------------------------------------------------------- design-code

layered! {
    pub struct DesignCodeOptions {
        modulation: String,
        rate: f64,
        /// Delay per label bit, or "bicm"
        scheme: String,
        /// Concentrated check-node degree (default 4, 5 or 7 by rate)
        check_degree: usize,
        /// Largest variable-node degree
        max_degree: usize,
        /// Length of the final code
        length: usize,
        /// Length of the graphs scored during optimization
        proto_length: usize,
        /// Capacity samples per SNR point of the design profile
        samples: usize,
        /// Eb/N0 search window in dB as lo:hi
        window: String,
        /// Es/N0 spacing of the design profile in dB
        profile_step: f64,
        /// Population of the degree-distribution stage (default 10 (V-1))
        lambda_population: usize,
        /// Population of the assignment stage (default 10 (S V - 1))
        assign_population: usize,
        /// Generations of each stage
        generations: usize,
        /// Differential weight
        weight: f64,
        /// Crossover probability
        crossover: f64,
        /// Bit-channel typing: symmetric, per-bit or single
        types: String,
        /// Skip optimization and build a built-in design such as 16qam-1/4-dbicm
        reference: String,
        seed: u64,
        /// Output path prefix; writes <out>.alist, <out>.json and CSV tables
        out: PathBuf,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignCodeConfig {
    pub modulation: String,
    pub rate: f64,
    pub scheme: Vec<u32>,
    pub check_degree: usize,
    pub max_degree: usize,
    pub length: usize,
    pub proto_length: usize,
    pub samples: usize,
    pub window: (f64, f64),
    pub profile_step: f64,
    pub lambda_population: usize,
    pub assign_population: usize,
    pub generations: usize,
    pub weight: f64,
    pub crossover: f64,
    pub types: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
}

impl DesignCodeOptions {
    pub fn resolve(self) -> Result<DesignCodeConfig, ConfigError> {
        let reference = match self.reference.as_deref() {
            Some(name) => Some(
                crate::reference::reference_design(name)
                    .ok_or_else(|| ConfigError(format!("unknown reference design '{name}'")))?,
            ),
            None => None,
        };
        let (c, t, r) = match reference {
            Some(d) => {
                if self.modulation.is_some() || self.scheme.is_some() || self.rate.is_some() {
                    return invalid("--reference fixes modulation, scheme and rate");
                }
                (d.constellation(), d.scheme(), d.rate())
            }
            None => {
                let c = modulation(self.modulation.as_deref())?;
                let t = scheme(self.scheme.as_deref(), &c)?;
                (c, t, rate(self.rate)?)
            }
        };
        let check_degree = match (reference, self.check_degree) {
            (Some(d), None) => d.check_degree,
            (_, Some(dc)) => dc,
            (None, None) => default_check_degree(r),
        };
        if check_degree < 2 {
            return invalid("check-degree must be at least 2");
        }
        let max_degree = self.max_degree.unwrap_or(10);
        if max_degree < 2 {
            return invalid("max-degree must be at least 2");
        }
        if reference.is_some() && max_degree != 10 {
            return invalid("reference designs use degrees 2..=10");
        }
        let m = c.bits();
        let length = positive(self.length, 12_000, "length")?;
        let proto_length = positive(self.proto_length, 1200, "proto-length")?;
        for (what, n) in [("length", length), ("proto-length", proto_length)] {
            if n % m != 0 {
                return invalid(format!("{what} {n} is not a multiple of {m}"));
            }
            let checks = n as f64 * (1.0 - r);
            if (checks - checks.round()).abs() > 1e-9 {
                return invalid(format!("{what} {n} gives a fractional check count at rate {r}"));
            }
        }
        let window = match self.window.as_deref() {
            None => (-2.0, 10.0),
            Some(w) => {
                let parts: Vec<Result<f64, _>> = w.split(':').map(|x| x.trim().parse::<f64>()).collect();
                match parts.as_slice() {
                    [Ok(lo), Ok(hi)] if lo < hi => (*lo, *hi),
                    _ => return invalid("window must be lo:hi with lo < hi"),
                }
            }
        };
        let types = self.types.unwrap_or_else(|| "symmetric".into());
        if !matches!(types.as_str(), "symmetric" | "per-bit" | "single") {
            return invalid(format!("types must be symmetric, per-bit or single, not '{types}'"));
        }
        let profile_step = self.profile_step.unwrap_or(0.1);
        if profile_step <= 0.0 {
            return invalid("profile-step must be positive");
        }
        let weight = self.weight.unwrap_or(0.5);
        let crossover = self.crossover.unwrap_or(0.5);
        if !(0.0..=1.0).contains(&weight) || !(0.0..=1.0).contains(&crossover) {
            return invalid("weight and crossover must lie in [0, 1]");
        }
        let s = match types.as_str() {
            "single" => 1,
            "per-bit" => m,
            _ => dbicm_core::ldpc::BitChannelTypes::symmetric(&c, &t).len(),
        };
        let samples = positive(self.samples, 200_000, "samples")?;
        if samples < 1000 {
            return invalid("samples must be at least 1000");
        }
        Ok(DesignCodeConfig {
            modulation: c.name(),
            rate: r,
            scheme: t.delays().to_vec(),
            check_degree,
            max_degree,
            length,
            proto_length,
            samples,
            window,
            profile_step,
            lambda_population: positive(self.lambda_population, 10 * (max_degree - 1), "lambda-population")?,
            assign_population: positive(self.assign_population, 10 * (s * max_degree - 1), "assign-population")?,
            generations: self.generations.unwrap_or(10),
            weight,
            crossover,
            types,
            reference: reference.map(|d| d.name()),
            seed: self.seed.unwrap_or(1),
            out: out_path(self.out)?,
        })
    }
}

// ---------------------------------------------------------------- simulate

layered! {
    pub struct SimulateOptions {
        /// Parity-check matrix in alist format
        code: PathBuf,
        /// JSON sidecar of the code (supplies modulation and scheme)
        assign: PathBuf,
        modulation: String,
        /// Delay per label bit, or "bicm"; overrides the sidecar
        scheme: String,
        /// Eb/N0 grid in dB
        ebn0: String,
        /// Largest number of frames per SNR point
        frames: usize,
        /// Codewords per frame
        slots: usize,
        /// Decoder iterations
        max_iter: usize,
        /// Stop a point once this many bit errors are counted
        target_errors: u64,
        /// Frames between checkpoints
        batch: usize,
        seed: u64,
        /// Directory for resumable tally files
        checkpoint: PathBuf,
        /// Output CSV
        out: PathBuf,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    #[serde(skip)]
    pub code: PathBuf,
    #[serde(skip)]
    pub assign: Option<PathBuf>,
    /// Hash of the alist text, so results follow the code and not its path.
    pub code_sha256: String,
    pub modulation: String,
    pub scheme: Vec<u32>,
    pub eb_n0_db: Vec<f64>,
    pub frames: usize,
    pub slots: usize,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_errors: Option<u64>,
    pub batch: usize,
    pub seed: u64,
    #[serde(skip)]
    pub checkpoint: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl SimulateOptions {
    pub fn resolve(self) -> Result<SimulateConfig, ConfigError> {
        use sha2::{Digest, Sha256};
        let code = self.code.ok_or_else(|| ConfigError("missing --code".into()))?;
        let text = std::fs::read(&code).map_err(|e| ConfigError(format!("{}: {e}", code.display())))?;
        let code_sha256 = Sha256::digest(&text).iter().map(|b| format!("{b:02x}")).collect();
        let side = match &self.assign {
            Some(p) => Some(
                crate::sidecar::CodeSidecar::load(p).map_err(|e| ConfigError(format!("{e:#}")))?,
            ),
            None => None,
        };
        let modulation_name = self
            .modulation
            .clone()
            .or_else(|| side.as_ref().map(|s| s.modulation.clone()));
        let c = modulation(modulation_name.as_deref())?;
        let scheme_text = self
            .scheme
            .clone()
            .or_else(|| side.as_ref().map(|s| s.scheme.iter().map(u32::to_string).collect::<Vec<_>>().join(",")));
        let t = scheme(scheme_text.as_deref(), &c)?;
        let ebn0 = self.ebn0.ok_or_else(|| ConfigError("missing --ebn0".into()))?;
        Ok(SimulateConfig {
            code,
            assign: self.assign,
            code_sha256,
            modulation: c.name(),
            scheme: t.delays().to_vec(),
            eb_n0_db: grid(&ebn0, "ebn0")?,
            frames: positive(self.frames, 100, "frames")?,
            slots: positive(self.slots, 10, "slots")?,
            max_iter: positive(self.max_iter, 100, "max-iter")?,
            target_errors: self.target_errors,
            batch: positive(self.batch, 8, "batch")?,
            seed: self.seed.unwrap_or(1),
            checkpoint: self.checkpoint,
            out: out_path(self.out)?,
        })
    }
}

// ------------------------------------------------------ dump-constellation

layered! {
    pub struct DumpOptions {
        modulation: String,
        /// Output CSV; stdout when absent
        out: PathBuf,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpConfig {
    pub modulation: String,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl DumpOptions {
    pub fn resolve(self) -> Result<DumpConfig, ConfigError> {
        let c = modulation(self.modulation.as_deref())?;
        Ok(DumpConfig {
            modulation: c.name(),
            out: self.out,
        })
    }
}
