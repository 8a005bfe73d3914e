//! Delayed bit-interleaved coded modulation (DBICM) toolkit.
//!
//! The crate is split along the processing chain:
//!
//! * [`constellation`] and [`channel`] describe Gray-labeled PAM/QAM signal
//!   sets, delay schemes and the AWGN channel.
//! * [`capacity`] estimates BICM, DBICM and coded-modulation capacities by
//!   Monte-Carlo integration, and [`delay_opt`] searches for the delay scheme
//!   that reaches a target spectral efficiency at the lowest SNR.
//! * [`ldpc`] holds degree distributions, channel-assignment matrices and the
//!   PEG-style Tanner-graph constructors; [`pexit`] scores a concrete graph
//!   with a per-edge EXIT recursion and [`de_opt`] optimizes degree
//!   distributions and channel assignments by differential evolution.
//! * [`sim`] runs the full transmitter/receiver chain with decoder feedback.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The `parallel` feature spreads Monte-Carlo work over a rayon
//! pool; results do not depend on the number of workers.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod capacity;
pub mod channel;
pub mod constellation;
pub mod de_opt;
pub mod delay_opt;
pub mod ldpc;
pub mod math;
pub mod pexit;
pub mod rng;
pub mod sim;

mod par;

pub use capacity::{CapacityEstimator, CapacityReport, Estimate};
pub use channel::NoiseModel;
pub use constellation::{Constellation, ConstellationKind, DelayScheme};
pub use ldpc::{ChannelAssignment, DegreeDistribution, TannerCode};

