//! Blind detection of polar-coded control candidates.
//!
//! The crate is organised bottom-up:
//!
//! * [`code`]: reliability ordering, code construction with ID-bit placement, encoding.
//! * [`channel`]: BPSK over AWGN and LLR demodulation.
//! * [`decoder`]: a unified SC/SCL decoder with min-sum kernels, LLR-based path
//!   metrics and per-ID-bit early stopping.
//! * [`blind`]: the two-phase detection pipeline (coarse phase, candidate
//!   selection, list-decoding phase with early stopping).
//! * [`latency`]: closed-form cycle model of the hardware decoder array.
//! * [`sim`]: Monte Carlo harness for BLER / MDR / FAR and estimated-bit statistics.

pub mod blind;
pub mod channel;
pub mod code;
pub mod config;
pub mod decoder;
mod error;
pub mod latency;
pub mod sim;

pub use blind::{BlindDetectionConfig, Detection, PhaseOneMetric, PhaseOneRecord, TrialStats};
pub use code::{IdMode, PolarCode};
pub use decoder::{DecodeOptions, DecodeResult};
pub use error::{Error, Result};
pub use latency::LatencyParams;

/// Bits are stored one per byte, each 0 or 1.
pub type Bit = u8;
