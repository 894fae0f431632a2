//! Seeded burst and symbol interleavers.
//!
//! A permutation `perm` is applied as `out[i] = in[perm[i]]`.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

pub type Permutation = Vec<u32>;

/// Uniform random permutation of `0..len`.
pub fn random_permutation(len: usize, seed: u64) -> Permutation {
    let mut perm: Permutation = (0..len as u32).collect();
    perm.shuffle(&mut seed::rng(seed));
    perm
}

pub fn apply<T: Copy>(items: &[T], perm: &[u32]) -> Vec<T> {
    perm.iter().map(|&p| items[p as usize]).collect()
}

pub fn invert<T: Copy + Default>(items: &[T], perm: &[u32]) -> Vec<T> {
    let mut out = vec![T::default(); items.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p as usize] = items[i];
    }
    out
}

/// Seed for the burst permutation of FEC frame `frame`.
pub fn frame_seed(seed: u64, frame: usize) -> u64 {
    seed::derive(seed, &[frame as u64])
}

/// Permutes `bits` within consecutive frames of `frame_len` entries, moving
/// groups of `group` adjacent entries as a unit. Frame `f` uses the
/// permutation seeded by [`frame_seed`]`(seed, f)`. Returns the interleaved
/// sequence and the per-frame group permutations.
pub fn burst_interleave<T: Copy>(
    bits: &[T],
    frame_len: usize,
    group: usize,
    seed: u64,
) -> Result<(Vec<T>, Vec<Permutation>)> {
    check_frames(bits.len(), frame_len, group)?;
    let groups_per_frame = frame_len / group;
    let mut out = Vec::with_capacity(bits.len());
    let mut perms = Vec::with_capacity(bits.len() / frame_len);
    for (f, frame) in bits.chunks_exact(frame_len).enumerate() {
        let perm = random_permutation(groups_per_frame, frame_seed(seed, f));
        for &p in &perm {
            let start = p as usize * group;
            out.extend_from_slice(&frame[start..start + group]);
        }
        perms.push(perm);
    }
    Ok((out, perms))
}

/// Inverse of [`burst_interleave`] given the recorded permutations.
pub fn burst_deinterleave<T: Copy + Default>(
    bits: &[T],
    frame_len: usize,
    group: usize,
    perms: &[Permutation],
) -> Result<Vec<T>> {
    check_frames(bits.len(), frame_len, group)?;
    if perms.len() != bits.len() / frame_len {
        return Err(Error::LengthMismatch(perms.len(), bits.len() / frame_len));
    }
    let mut out = vec![T::default(); bits.len()];
    for ((frame_in, frame_out), perm) in bits
        .chunks_exact(frame_len)
        .zip(out.chunks_exact_mut(frame_len))
        .zip(perms)
    {
        for (i, &p) in perm.iter().enumerate() {
            let src = i * group;
            let dst = p as usize * group;
            frame_out[dst..dst + group].copy_from_slice(&frame_in[src..src + group]);
        }
    }
    Ok(out)
}

fn check_frames(len: usize, frame_len: usize, group: usize) -> Result<()> {
    if frame_len == 0 || group == 0 || !frame_len.is_multiple_of(group) {
        return Err(Error::NotFrameDivisible { len: frame_len, frame: group.max(1) });
    }
    if !len.is_multiple_of(frame_len) {
        return Err(Error::NotFrameDivisible { len, frame: frame_len });
    }
    Ok(())
}

/// One seeded permutation over the whole sequence.
pub fn symbol_interleave<T: Copy>(symbols: &[T], seed: u64) -> (Vec<T>, Permutation) {
    let perm = random_permutation(symbols.len(), seed);
    (apply(symbols, &perm), perm)
}

pub fn symbol_deinterleave<T: Copy + Default>(symbols: &[T], perm: &[u32]) -> Result<Vec<T>> {
    if symbols.len() != perm.len() {
        return Err(Error::LengthMismatch(symbols.len(), perm.len()));
    }
    Ok(invert(symbols, perm))
}
