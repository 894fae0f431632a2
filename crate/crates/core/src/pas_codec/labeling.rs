//! Per-dimension binary-reflected Gray labeling.
//!
//! Each real dimension carries an ASK symbol with `2L` points indexed
//! `0..2L` from most negative to most positive. The label of point `j` is the
//! `b`-bit reflected Gray code `j ^ (j >> 1)`; its MSB is the sign bit
//! (1 = positive) and the remaining `b - 1` bits label the amplitude. Because
//! the code is reflected, both signs of an amplitude share the same amplitude
//! bits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayLabeling {
    amp_levels: usize,
    bits_per_dim: usize,
    amp_label: Vec<u32>,
    amp_from_label: Vec<usize>,
}

impl GrayLabeling {
    /// Labeling for `amp_levels` amplitudes per dimension (a power of two).
    pub fn new(amp_levels: usize) -> Result<Self> {
        if amp_levels == 0 || !amp_levels.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude level count must be a power of two, got {amp_levels}"
            )));
        }
        let bits_per_dim = (2 * amp_levels).trailing_zeros() as usize;
        let mask = (amp_levels as u32) - 1;
        let amp_label: Vec<u32> = (0..amp_levels)
            .map(|a| gray((amp_levels + a) as u32) & mask)
            .collect();
        let mut amp_from_label = vec![usize::MAX; amp_levels];
        for (a, &l) in amp_label.iter().enumerate() {
            amp_from_label[l as usize] = a;
        }
        Ok(Self { amp_levels, bits_per_dim, amp_label, amp_from_label })
    }

    pub fn amp_levels(&self) -> usize {
        self.amp_levels
    }

    /// Bits per real dimension, sign bit included.
    pub fn bits_per_dim(&self) -> usize {
        self.bits_per_dim
    }

    pub fn amp_bits(&self) -> usize {
        self.bits_per_dim - 1
    }

    pub fn ask_points(&self) -> usize {
        2 * self.amp_levels
    }

    /// Full `b`-bit label of ASK point `j`.
    pub fn label(&self, ask_index: usize) -> u32 {
        gray(ask_index as u32)
    }

    pub fn ask_index(&self, sign_positive: bool, amp: usize) -> usize {
        if sign_positive {
            self.amp_levels + amp
        } else {
            self.amp_levels - 1 - amp
        }
    }

    /// Splits an ASK index into (sign bit, amplitude index).
    pub fn split(&self, ask_index: usize) -> (bool, usize) {
        if ask_index >= self.amp_levels {
            (true, ask_index - self.amp_levels)
        } else {
            (false, self.amp_levels - 1 - ask_index)
        }
    }

    pub fn amp_label(&self, amp: usize) -> u32 {
        self.amp_label[amp]
    }

    pub fn amp_from_label(&self, label: u32) -> usize {
        self.amp_from_label[label as usize]
    }

    /// Appends the amplitude bits of `amp`, MSB first.
    pub fn push_amp_bits(&self, amp: usize, out: &mut Vec<bool>) {
        let label = self.amp_label[amp];
        for t in (0..self.amp_bits()).rev() {
            out.push((label >> t) & 1 == 1);
        }
    }

    /// Reads one amplitude from `amp_bits()` bits, MSB first.
    pub fn amp_from_bits(&self, bits: &[bool]) -> usize {
        let label = bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
        self.amp_from_label(label)
    }

    /// Bit `t` of the label of ASK point `j`, `t = 0` being the sign bit.
    pub fn bit(&self, ask_index: usize, t: usize) -> bool {
        (self.label(ask_index) >> (self.bits_per_dim - 1 - t)) & 1 == 1
    }
}

fn gray(j: u32) -> u32 {
    j ^ (j >> 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_points_differ_in_one_bit() {
        for levels in [1, 2, 4, 8] {
            let g = GrayLabeling::new(levels).unwrap();
            for j in 1..g.ask_points() {
                assert_eq!((g.label(j) ^ g.label(j - 1)).count_ones(), 1);
            }
            let mut labels: Vec<u32> = (0..g.ask_points()).map(|j| g.label(j)).collect();
            labels.sort_unstable();
            labels.dedup();
            assert_eq!(labels.len(), g.ask_points());
        }
    }

    #[test]
    fn sign_is_msb_and_amp_bits_are_shared() {
        let g = GrayLabeling::new(4).unwrap();
        assert_eq!(g.bits_per_dim(), 3);
        for j in 0..8 {
            let (pos, amp) = g.split(j);
            assert_eq!(g.ask_index(pos, amp), j);
            assert_eq!(g.bit(j, 0), pos);
            assert_eq!(g.label(j) & 0b11, g.amp_label(amp));
            let mut bits = Vec::new();
            g.push_amp_bits(amp, &mut bits);
            assert_eq!(g.amp_from_bits(&bits), amp);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(GrayLabeling::new(3).is_err());
        assert!(GrayLabeling::new(0).is_err());
    }
}
