use alloc::vec;
use alloc::vec::Vec;
use core::ops::AddAssign;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::bp::BpDecoder;
use super::demap::{demap, BitKnowledge};
use super::encoder::Encoder;
use crate::channel::{self, NoiseModel};
use crate::constellation::{Constellation, DelayScheme};
use crate::ldpc::TannerCode;
use crate::{par, rng};

/// Channel LLRs of one codeword in code order.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    llrs: Vec<f64>,
}

impl LlrFrame {
    /// Returns `None` if any value is not finite.
    pub fn new(llrs: Vec<f64>) -> Option<Self> {
        llrs.iter().all(|l| l.is_finite()).then_some(Self { llrs })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.llrs
    }
}

/// Error and work counters, summable over frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameTally {
    pub frames: u64,
    pub codewords: u64,
    pub codeword_errors: u64,
    pub info_bits: u64,
    pub bit_errors: u64,
    /// Decoder calls.
    pub decodes: u64,
    /// Decodes that ended with a zero syndrome.
    pub decode_successes: u64,
    /// Symbols demapped on arrival without side information.
    pub initial_demaps: u64,
    /// Symbol demaps repeated with decoder feedback.
    pub refined_demaps: u64,
    pub bp_iterations: u64,
}

impl FrameTally {
    pub fn ber(&self) -> f64 {
        if self.info_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.info_bits as f64
        }
    }

    pub fn fer(&self) -> f64 {
        if self.codewords == 0 {
            0.0
        } else {
            self.codeword_errors as f64 / self.codewords as f64
        }
    }
}

impl AddAssign for FrameTally {
    fn add_assign(&mut self, o: Self) {
        self.frames += o.frames;
        self.codewords += o.codewords;
        self.codeword_errors += o.codeword_errors;
        self.info_bits += o.info_bits;
        self.bit_errors += o.bit_errors;
        self.decodes += o.decodes;
        self.decode_successes += o.decode_successes;
        self.initial_demaps += o.initial_demaps;
        self.refined_demaps += o.refined_demaps;
        self.bp_iterations += o.bp_iterations;
    }
}

/// Decoder output kept for demapping later slots.
enum Feedback {
    Hard(Vec<u8>),
    Soft(Vec<f64>),
}

/// One frame of `slots` codewords sent through the delay structure of
/// `scheme`: sub-block `i` of codeword `t` (the bits of variable nodes
/// `v = s m + i`) rides in slot `t + T_i`. Vacant sub-blocks at both ends of
/// the frame are zero and known to the receiver.
#[derive(Debug, Clone)]
pub struct FramePipeline {
    constellation: Constellation,
    scheme: DelayScheme,
    code: TannerCode,
    encoder: Encoder,
    decoder: BpDecoder,
    slots: usize,
    max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineError {
    LengthMismatch { n: usize, bits: usize },
    SchemeLength { scheme: usize, bits: usize },
    NoSlots,
}

impl core::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::LengthMismatch { n, bits } => write!(f, "code length {n} not divisible by {bits}"),
            Self::SchemeLength { scheme, bits } => {
                write!(f, "delay scheme has {scheme} entries, constellation has {bits} bits")
            }
            Self::NoSlots => write!(f, "a frame needs at least one slot"),
        }
    }
}

impl core::error::Error for PipelineError {}

impl FramePipeline {
    pub fn new(
        constellation: Constellation,
        scheme: DelayScheme,
        code: TannerCode,
        slots: usize,
        max_iterations: usize,
    ) -> Result<Self, PipelineError> {
        let bits = constellation.bits();
        if code.n() % bits != 0 {
            return Err(PipelineError::LengthMismatch { n: code.n(), bits });
        }
        if scheme.len() != bits {
            return Err(PipelineError::SchemeLength {
                scheme: scheme.len(),
                bits,
            });
        }
        if slots == 0 {
            return Err(PipelineError::NoSlots);
        }
        let encoder = Encoder::new(&code);
        let decoder = BpDecoder::new(&code);
        Ok(Self {
            constellation,
            scheme,
            code,
            encoder,
            decoder,
            slots,
            max_iterations,
        })
    }

    pub fn code(&self) -> &TannerCode {
        &self.code
    }

    pub fn scheme(&self) -> &DelayScheme {
        &self.scheme
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Information bits per channel use including the frame-end overhead.
    pub fn spectral_efficiency(&self) -> f64 {
        channel::spectral_efficiency(
            self.constellation.bits(),
            self.code.design_rate(),
            self.slots,
            self.scheme.t_max(),
        )
    }

    /// Noise at `eb_n0_db` for the design rate of the code.
    pub fn noise_at(&self, eb_n0_db: f64) -> NoiseModel {
        NoiseModel::from_eb_n0_db(eb_n0_db, self.code.design_rate(), self.constellation.bits())
    }

    /// Transmits and decodes one frame.
    pub fn run_frame(&self, nm: NoiseModel, seed: u64) -> FrameTally {
        let c = &self.constellation;
        let m = c.bits();
        let n = self.code.n();
        let symbols = n / m;
        let t_n = self.slots;
        let t_max = self.scheme.t_max() as usize;
        let delays: Vec<usize> = self.scheme.delays().iter().map(|&d| d as usize).collect();
        let mut data_rng = rng::stream(seed, 0);
        let mut noise_rng = rng::stream(seed, 1);
        let k = self.encoder.k();

        let codewords: Vec<Vec<u8>> = (0..t_n)
            .map(|_| {
                let info: Vec<u8> = (0..k).map(|_| data_rng.random::<u8>() & 1).collect();
                self.encoder.encode(&info)
            })
            .collect();
        let bit_of = |t: isize, v: usize| -> u8 {
            if t < 0 || t as usize >= t_n {
                0
            } else {
                codewords[t as usize][v]
            }
        };

        let total_slots = t_n + t_max;
        let mut received: Vec<Vec<Complex64>> = Vec::with_capacity(total_slots);
        let mut initial: Vec<Vec<f64>> = Vec::with_capacity(total_slots);
        let mut feedback: Vec<Option<Feedback>> = (0..t_n).map(|_| None).collect();
        let mut tally = FrameTally {
            frames: 1,
            ..FrameTally::default()
        };
        let sigma = nm.sigma();
        let unknown = vec![BitKnowledge::Unknown; m];
        let mut knowledge = vec![BitKnowledge::Unknown; m];
        let mut out = vec![0.0; m];

        for slot in 0..total_slots {
            // transmit
            let ys: Vec<Complex64> = (0..symbols)
                .map(|s| {
                    let mut label = 0usize;
                    for i in 0..m {
                        let b = bit_of(slot as isize - delays[i] as isize, s * m + i);
                        if b != 0 {
                            label |= c.position_mask(i);
                        }
                    }
                    let re: f64 = noise_rng.sample(StandardNormal);
                    let im: f64 = noise_rng.sample(StandardNormal);
                    c.point(label) + Complex64::new(sigma * re, sigma * im)
                })
                .collect();
            let mut llr = vec![0.0; n];
            for (s, &y) in ys.iter().enumerate() {
                demap(c, y, nm, &unknown, &mut out);
                llr[s * m..(s + 1) * m].copy_from_slice(&out);
            }
            tally.initial_demaps += symbols as u64;
            received.push(ys);
            initial.push(llr);

            // decode the codeword whose last sub-block just arrived
            if slot < t_max {
                continue;
            }
            let t = slot - t_max;
            if t >= t_n {
                continue;
            }
            let mut frame_llr = vec![0.0; n];
            let mut distinct: Vec<usize> = delays.clone();
            distinct.sort_unstable();
            distinct.dedup();
            for &d in &distinct {
                let src = t + d;
                let group: Vec<usize> = (0..m).filter(|&i| delays[i] == d).collect();
                for s in 0..symbols {
                    let mut any = false;
                    for kpos in 0..m {
                        let owner = src as isize - delays[kpos] as isize;
                        knowledge[kpos] = if delays[kpos] > d {
                            any = true;
                            if owner < 0 || owner as usize >= t_n {
                                BitKnowledge::Known(0)
                            } else {
                                match &feedback[owner as usize] {
                                    Some(Feedback::Hard(b)) => BitKnowledge::Known(b[s * m + kpos]),
                                    Some(Feedback::Soft(l)) => BitKnowledge::Prior(l[s * m + kpos]),
                                    None => BitKnowledge::Unknown,
                                }
                            }
                        } else if owner as usize >= t_n {
                            any = true;
                            BitKnowledge::Known(0)
                        } else {
                            BitKnowledge::Unknown
                        };
                    }
                    if any {
                        demap(c, received[src][s], nm, &knowledge, &mut out);
                        tally.refined_demaps += 1;
                        for &i in &group {
                            frame_llr[s * m + i] = out[i];
                        }
                    } else {
                        for &i in &group {
                            frame_llr[s * m + i] = initial[src][s * m + i];
                        }
                    }
                }
            }
            let r = self.decoder.decode(&frame_llr, self.max_iterations);
            tally.decodes += 1;
            tally.bp_iterations += r.iterations as u64;
            let truth = &codewords[t];
            let errors = self
                .encoder
                .info_positions()
                .iter()
                .filter(|&&p| r.bits[p] != truth[p])
                .count() as u64;
            tally.codewords += 1;
            tally.info_bits += k as u64;
            tally.bit_errors += errors;
            tally.codeword_errors += u64::from(errors > 0);
            feedback[t] = Some(if r.success {
                tally.decode_successes += 1;
                Feedback::Hard(r.bits)
            } else {
                Feedback::Soft(r.extrinsic)
            });
        }
        tally
    }

    /// Runs `frames` independent frames (frame `f` seeded from `(seed, f)`).
    pub fn run(&self, nm: NoiseModel, frames: usize, seed: u64) -> FrameTally {
        self.run_frames(nm, 0..frames as u64, seed)
    }

    /// Runs the frames with the given indices; splitting a range into
    /// batches gives the same total as running it at once.
    pub fn run_frames(&self, nm: NoiseModel, frames: core::ops::Range<u64>, seed: u64) -> FrameTally {
        let ids: Vec<u64> = frames.collect();
        let parts = par::map(ids, |f| self.run_frame(nm, rng::derive_seed(seed, f)));
        let mut total = FrameTally::default();
        for p in parts {
            total += p;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::gray_qam;
    use crate::ldpc::{conventional_peg, DegreeDistribution};

    fn code(n: usize) -> TannerCode {
        let l = DegreeDistribution::regular(3, 6).unwrap();
        conventional_peg(&l, n, 0.5, 1).unwrap()
    }

    #[test]
    fn high_snr_is_error_free() {
        let p = FramePipeline::new(gray_qam(16).unwrap(), DelayScheme::parse("0,1,0,1").unwrap(), code(240), 4, 50)
            .unwrap();
        let t = p.run(p.noise_at(12.0), 3, 9);
        assert_eq!(t.bit_errors, 0);
        assert_eq!(t.codewords, 12);
        assert_eq!(t.decodes, 12);
        assert_eq!(t.decode_successes, 12);
    }

    #[test]
    fn undelayed_bits_demapped_at_most_twice() {
        let p = FramePipeline::new(gray_qam(16).unwrap(), DelayScheme::parse("0,1,0,1").unwrap(), code(240), 5, 50)
            .unwrap();
        let t = p.run_frame(p.noise_at(3.0), 1);
        let symbols = 60u64;
        assert_eq!(t.initial_demaps, 6 * symbols);
        // one refinement per symbol of each codeword: undelayed group always,
        // delayed group only for the last codeword (vacant next slot)
        assert_eq!(t.refined_demaps, 5 * symbols + symbols);
    }

    #[test]
    fn bicm_scheme_never_refines() {
        let p = FramePipeline::new(gray_qam(16).unwrap(), DelayScheme::zeros(4), code(240), 3, 50).unwrap();
        let t = p.run_frame(p.noise_at(2.0), 4);
        assert_eq!(t.refined_demaps, 0);
        assert_eq!(t.initial_demaps, 3 * 60);
        assert!((p.spectral_efficiency() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let p = FramePipeline::new(gray_qam(16).unwrap(), DelayScheme::parse("0,1,0,1").unwrap(), code(240), 3, 30)
            .unwrap();
        let nm = p.noise_at(1.0);
        assert_eq!(p.run(nm, 4, 5), p.run(nm, 4, 5));
        let mut split = p.run_frames(nm, 0..1, 5);
        split += p.run_frames(nm, 1..4, 5);
        assert_eq!(split, p.run(nm, 4, 5));
    }
}
