//! JSON file stored next to an alist code: label mapping, channel
//! assignment and construction seed.

use std::path::Path;

use anyhow::{bail, Context, Result};
use dbicm_core::constellation::{Constellation, DelayScheme};
use dbicm_core::ldpc::{BitChannelTypes, ChannelAssignment};
use dbicm_core::TannerCode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSidecar {
    pub toolkit: String,
    pub modulation: String,
    pub scheme: Vec<u32>,
    pub rate: f64,
    pub check_degree: usize,
    pub n: usize,
    /// `phi[i]`: type of label position `i`; variable node `v` sits on
    /// position `v mod m`.
    pub phi: Vec<usize>,
    pub degrees: Vec<usize>,
    /// Assignment measured on the stored graph, one row per type.
    pub p: Vec<Vec<f64>>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
}

pub fn types_from_phi(phi: &[usize]) -> Result<BitChannelTypes> {
    let s = phi.iter().copied().max().map_or(0, |x| x + 1);
    let groups: Vec<Vec<usize>> = (0..s)
        .map(|t| (0..phi.len()).filter(|&p| phi[p] == t).collect())
        .collect();
    Ok(BitChannelTypes::new(phi.len(), groups)?)
}

pub fn phi_of(types: &BitChannelTypes) -> Vec<usize> {
    (0..types.bits()).map(|p| types.phi(p)).collect()
}

impl CodeSidecar {
    #[allow(clippy::too_many_arguments)]
    pub fn describe(
        code: &TannerCode,
        c: &Constellation,
        scheme: &DelayScheme,
        rate: f64,
        check_degree: usize,
        types: &BitChannelTypes,
        degrees: &[usize],
        seed: u64,
    ) -> Result<Self> {
        let measured = ChannelAssignment::measure(code, types, degrees)?;
        Ok(Self {
            toolkit: crate::artifact::TOOLKIT.to_string(),
            modulation: c.name(),
            scheme: scheme.delays().to_vec(),
            rate,
            check_degree,
            n: code.n(),
            phi: phi_of(types),
            degrees: degrees.to_vec(),
            p: measured.rows().to_vec(),
            seed,
            threshold_db: None,
            config_sha256: None,
        })
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Ok(Constellation::from_name(&self.modulation)?)
    }

    pub fn delay_scheme(&self) -> Result<DelayScheme> {
        Ok(DelayScheme::new(self.scheme.clone())?)
    }

    pub fn types(&self) -> Result<BitChannelTypes> {
        types_from_phi(&self.phi)
    }

    /// Checks the sidecar against itself and, if given, against the code.
    pub fn validate(&self, code: Option<&TannerCode>) -> Result<()> {
        let c = self.constellation()?;
        if self.scheme.len() != c.bits() || self.phi.len() != c.bits() {
            bail!("scheme and phi must have one entry per label bit of {}", self.modulation);
        }
        self.delay_scheme()?;
        let types = self.types()?;
        let a = ChannelAssignment::new(types.clone(), self.degrees.clone(), self.p.clone())
            .or_else(|_| ChannelAssignment::from_rounded(types.clone(), self.degrees.clone(), self.p.clone()))?;
        if let Some(code) = code {
            if code.n() != self.n {
                bail!("sidecar describes length {}, code has {}", self.n, code.n());
            }
            let measured = ChannelAssignment::measure(code, &types, &self.degrees)?;
            if measured.max_abs_diff(&a) > 1e-6 {
                bail!("assignment in sidecar does not match the code");
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
