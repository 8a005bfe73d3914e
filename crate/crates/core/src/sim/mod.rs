//! Transmitter/receiver chain: systematic encoding, delayed sub-block
//! transmission, demapping with decoder feedback and belief-propagation
//! decoding.
//!
//! LLRs are `ln P(b = 0) - ln P(b = 1)` throughout.

mod bp;
mod demap;
mod encoder;
mod pipeline;

pub use bp::{bp_decode, BpDecoder, BpResult};
pub use demap::{
    demap, demap_initial, demap_with_hard_feedback, demap_with_soft_feedback, BitKnowledge, LLR_CLAMP,
};
pub use encoder::Encoder;
pub use pipeline::{FramePipeline, FrameTally, LlrFrame, PipelineError};
