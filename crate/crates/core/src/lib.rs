//! Probabilistic amplitude shaping (PAS) with constant-composition distribution
//! matching (CCDM), simulated end to end over a dual-polarization WDM fiber link.
//!
//! The crate is organised along the signal path:
//!
//! * [`dist_match`]: composition design, CCDM encode/decode, rate loss and the
//!   i.i.d. emulation generator.
//! * [`pas_codec`]: Gray labeling, sign-bit generation, burst and symbol
//!   interleavers, QAM mapping, LLR computation and the hard-decision decoder.
//! * [`fiber`]: RRC pulse shaping, WDM multiplexing, split-step Fourier
//!   propagation with lumped amplification, and a reference AWGN channel.
//! * [`rx_dsp`]: the idealized coherent receiver.
//! * [`metrics`]: effective SNR, BMD rate and finite-length AIR.
//! * [`experiment`]: sweep orchestration, CSV output and calibration checks.
//!
//! Batch loops go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and plain iterators otherwise. Results are bit-identical
//! either way because every random stream is seeded from [`seed`].

pub mod dist_match;
pub mod error;
pub mod experiment;
pub mod fiber;
pub mod field_io;
pub mod metrics;
pub mod par;
pub mod pas_codec;
pub mod rx_dsp;
pub mod seed;

pub use error::{Error, Result};
pub use num_complex::Complex64;
