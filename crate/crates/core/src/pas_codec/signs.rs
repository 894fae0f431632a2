//! Sign-bit sources.
//!
//! In PAS the sign bits are the parity bits of a systematic FEC code. No
//! decoding-dependent quantity is simulated here, so the parity is replaced by
//! a surrogate that keeps the FEC frame structure: within each frame an
//! accumulator runs over the information bits (as in a repeat-accumulate
//! code) and is XORed with a seeded keystream. The keystream makes every
//! parity bit exactly uniform and independent of the amplitude sequence.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSource {
    #[default]
    SystematicParitySurrogate,
    UniformRandom,
}

/// Generates one sign bit per amplitude.
///
/// `amplitude_bits` holds `amp_bits` bits per amplitude; frames span
/// `amps_per_frame` amplitudes.
pub fn generate_signs(
    amplitude_bits: &[bool],
    amp_bits: usize,
    amps_per_frame: usize,
    source: SignSource,
    seed: u64,
) -> Result<Vec<bool>> {
    if amp_bits == 0 {
        // Two-level ASK carries no amplitude bits; the frame is all parity.
        if !amplitude_bits.is_empty() {
            return Err(Error::Config("amplitude bits given for a 1-bit labeling".into()));
        }
    } else if !amplitude_bits.len().is_multiple_of(amp_bits) {
        return Err(Error::NotFrameDivisible { len: amplitude_bits.len(), frame: amp_bits });
    }
    let amps = amplitude_bits.len().checked_div(amp_bits).unwrap_or(0);
    match source {
        SignSource::UniformRandom => {
            let mut rng = seed::rng(seed);
            Ok((0..amps).map(|_| rng.random::<bool>()).collect())
        }
        SignSource::SystematicParitySurrogate => {
            if amps_per_frame == 0 || !amps.is_multiple_of(amps_per_frame) {
                return Err(Error::NotFrameDivisible { len: amps, frame: amps_per_frame });
            }
            let mut out = Vec::with_capacity(amps);
            for (f, info) in amplitude_bits.chunks_exact(amps_per_frame * amp_bits).enumerate() {
                let mut keystream = seed::rng(seed::derive(seed, &[f as u64]));
                let mut acc = false;
                for group in info.chunks_exact(amp_bits) {
                    acc ^= group.iter().fold(false, |a, &b| a ^ b);
                    out.push(acc ^ keystream.random::<bool>());
                }
            }
            Ok(out)
        }
    }
}
