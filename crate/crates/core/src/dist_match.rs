//! Constant-composition distribution matching.
//!
//! A [`Composition`] fixes how often each amplitude level occurs in a block of
//! `n` amplitudes. The matcher maps a `k`-bit word, read as an integer index,
//! onto the index-th permutation of that multiset in lexicographic order
//! (levels compared by index), with `k = floor(log2(n! / prod(c_i!)))`.
//! Ranking and unranking use exact integer arithmetic, so the mapping is
//! invertible for every block length.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Positive amplitude levels with a target probability per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeAlphabet {
    levels: Vec<f64>,
    probs: Vec<f64>,
}

impl AmplitudeAlphabet {
    pub fn new(levels: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.len() != probs.len() {
            return Err(Error::InvalidAlphabet(format!(
                "{} levels but {} probabilities",
                levels.len(),
                probs.len()
            )));
        }
        if levels.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidAlphabet("levels must be positive".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAlphabet("levels must be strictly increasing".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidAlphabet("probabilities must be nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidAlphabet(format!("probabilities sum to {sum}")));
        }
        Ok(Self { levels, probs })
    }

    /// Odd-integer ASK amplitudes `1, 3, ..., 2L-1`.
    pub fn odd_levels(probs: Vec<f64>) -> Result<Self> {
        let levels = (0..probs.len()).map(|i| (2 * i + 1) as f64).collect();
        Self::new(levels, probs)
    }

    /// Shaped 16QAM amplitudes {1, 3} with distribution [0.7, 0.3].
    pub fn shaped_16qam() -> Self {
        Self::odd_levels(vec![0.7, 0.3]).unwrap()
    }

    /// Shaped 64QAM amplitudes {1, 3, 5, 7} with distribution [0.4, 0.3, 0.2, 0.1].
    pub fn shaped_64qam() -> Self {
        Self::odd_levels(vec![0.4, 0.3, 0.2, 0.1]).unwrap()
    }

    pub fn uniform(num_levels: usize) -> Result<Self> {
        Self::odd_levels(vec![1.0 / num_levels as f64; num_levels])
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Amplitude entropy H(A) in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    /// Mean squared amplitude under the target distribution.
    pub fn mean_energy(&self) -> f64 {
        self.levels.iter().zip(&self.probs).map(|(l, p)| l * l * p).sum()
    }
}

pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Occurrence count per amplitude level in every CCDM codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    counts: Vec<u32>,
    n: u32,
    k: u32,
    codewords: BigUint,
}

impl Composition {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidComposition("no levels".into()));
        }
        let n: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if n == 0 {
            return Err(Error::InvalidComposition("block length is zero".into()));
        }
        let n = u32::try_from(n)
            .map_err(|_| Error::InvalidComposition("block length overflows u32".into()))?;
        let codewords = multinomial(&counts);
        // floor(log2(m)) for m >= 1
        let k = (codewords.bits() - 1) as u32;
        Ok(Self { counts, n, k, codewords })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Block length in amplitudes.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Input length in bits.
    pub fn k(&self) -> usize {
        self.k as usize
    }

    /// Number of distinct codewords, `n! / prod(c_i!)`.
    pub fn codewords(&self) -> &BigUint {
        &self.codewords
    }

    /// DM rate k/n in bits per amplitude.
    pub fn rate(&self) -> f64 {
        f64::from(self.k) / f64::from(self.n)
    }

    /// The empirical distribution `c_i / n`.
    pub fn distribution(&self) -> Vec<f64> {
        let n = f64::from(self.n);
        self.counts.iter().map(|&c| f64::from(c) / n).collect()
    }
}

/// `n! / prod(c_i!)` as a product of binomials.
pub fn multinomial(counts: &[u32]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total = 0u64;
    for &c in counts {
        let c = u64::from(c);
        total += c;
        // C(total, c), built up exactly: r_j = r_{j-1} * (total - c + j) / j
        let mut binom = BigUint::one();
        for j in 1..=c {
            binom *= total - c + j;
            binom /= j;
        }
        acc *= binom;
    }
    acc
}

/// Informational divergence D(c/n || p) in bits; infinite if a level with
/// zero probability is used.
pub fn divergence(counts: &[u32], probs: &[f64]) -> f64 {
    let n: u32 = counts.iter().sum();
    let n = f64::from(n);
    counts
        .iter()
        .zip(probs)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &p)| {
            let q = f64::from(c) / n;
            if p > 0.0 {
                q * (q / p).log2()
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

/// Divergence differences below this are treated as ties.
const TIE_EPS: f64 = 1e-13;

/// The composition of length `n` closest to the target distribution in
/// informational divergence. Ties go to the lexicographically smallest counts.
pub fn quantize_composition(alphabet: &AmplitudeAlphabet, n: usize) -> Result<Composition> {
    if n == 0 {
        return Err(Error::InvalidComposition("block length must be positive".into()));
    }
    let n32 = u32::try_from(n)
        .map_err(|_| Error::InvalidComposition("block length overflows u32".into()))?;
    let probs = alphabet.probs();
    // The objective sum_i c_i log(c_i / (n p_i)) is separable and convex in
    // each c_i, so adding one symbol at a time where the marginal cost is
    // smallest reaches the optimum.
    let nf = f64::from(n32);
    let marginal = |c: u32, p: f64| {
        let next = f64::from(c + 1) * (f64::from(c + 1) / (nf * p)).log2();
        let cur = if c == 0 { 0.0 } else { f64::from(c) * (f64::from(c) / (nf * p)).log2() };
        next - cur
    };
    let mut counts = vec![0u32; probs.len()];
    for _ in 0..n32 {
        let mut best: Option<(f64, usize)> = None;
        for (i, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let d = marginal(counts[i], p);
            // on ties the later level wins, which keeps the result
            // lexicographically smallest
            if best.is_none_or(|(bd, _)| d <= bd + TIE_EPS * bd.abs().max(1.0)) {
                best = Some((d, i));
            }
        }
        counts[best.expect("at least one level has positive probability").1] += 1;
    }
    Composition::new(counts)
}

/// `H(A) - k/n`, in bits per amplitude.
pub fn rate_loss(alphabet: &AmplitudeAlphabet, composition: &Composition) -> f64 {
    alphabet.entropy() - composition.rate()
}

/// A block of amplitude indices, with the bits it encodes when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmplitudeBlock {
    pub symbols: Vec<usize>,
    pub source_bits: Option<Vec<bool>>,
}

impl AmplitudeBlock {
    pub fn histogram(&self, num_levels: usize) -> Vec<u32> {
        histogram(&self.symbols, num_levels)
    }
}

pub fn histogram(symbols: &[usize], num_levels: usize) -> Vec<u32> {
    let mut h = vec![0u32; num_levels];
    for &s in symbols {
        h[s] += 1;
    }
    h
}

/// Integer arithmetic used by ranking and unranking. Small codeword spaces run
/// on `u128`; the rest on `BigUint`.
trait IndexInt: Clone + Ord {
    /// `self * num / den`, exact by construction at every call site.
    fn scale(&self, num: u32, den: u32) -> Self;
    fn sub_in_place(&mut self, other: &Self);
    fn add_in_place(&mut self, other: &Self);
}

impl IndexInt for u128 {
    fn scale(&self, num: u32, den: u32) -> Self {
        self * u128::from(num) / u128::from(den)
    }
    fn sub_in_place(&mut self, other: &Self) {
        *self -= other;
    }
    fn add_in_place(&mut self, other: &Self) {
        *self += other;
    }
}

impl IndexInt for BigUint {
    fn scale(&self, num: u32, den: u32) -> Self {
        self * num / den
    }
    fn sub_in_place(&mut self, other: &Self) {
        *self -= other;
    }
    fn add_in_place(&mut self, other: &Self) {
        *self += other;
    }
}

fn unrank<T: IndexInt>(mut index: T, counts: &[u32], mut total: T) -> Vec<usize> {
    let mut remaining_counts = counts.to_vec();
    let n: u32 = counts.iter().sum();
    let mut out = Vec::with_capacity(n as usize);
    for pos in 0..n {
        let remaining = n - pos;
        let mut chosen = None;
        for (level, &c) in remaining_counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sub = total.scale(c, remaining);
            if index < sub {
                chosen = Some((level, sub));
                break;
            }
            index.sub_in_place(&sub);
        }
        let (level, sub) = chosen.expect("index lies within the permutation count");
        remaining_counts[level] -= 1;
        total = sub;
        out.push(level);
    }
    out
}

fn rank<T: IndexInt>(symbols: &[usize], counts: &[u32], mut total: T, zero: T) -> T {
    let mut remaining_counts = counts.to_vec();
    let n = symbols.len() as u32;
    let mut index = zero;
    for (pos, &sym) in symbols.iter().enumerate() {
        let remaining = n - pos as u32;
        for &c in &remaining_counts[..sym] {
            if c > 0 {
                index.add_in_place(&total.scale(c, remaining));
            }
        }
        total = total.scale(remaining_counts[sym], remaining);
        remaining_counts[sym] -= 1;
    }
    index
}

// `scale` multiplies by up to n before dividing, so keep 32 bits of headroom.
fn fits_u128(composition: &Composition) -> bool {
    composition.codewords.bits() + 32 <= 128
}

fn bits_to_biguint(bits: &[bool]) -> BigUint {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    // little-endian bytes, most significant bit first in `bits`
    for (i, &b) in bits.iter().rev().enumerate() {
        if b {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    BigUint::from_bytes_le(&bytes)
}

fn biguint_to_bits(value: &BigUint, k: usize) -> Vec<bool> {
    (0..k).rev().map(|i| value.bit(i as u64)).collect()
}

/// Maps a `k`-bit word (MSB first) to a codeword of the composition.
pub fn ccdm_encode(bits: &[bool], composition: &Composition) -> Result<AmplitudeBlock> {
    let k = composition.k();
    if bits.len() != k {
        return Err(Error::BitLength { expected: k, actual: bits.len() });
    }
    let symbols = if fits_u128(composition) {
        let index = bits.iter().fold(0u128, |acc, &b| (acc << 1) | u128::from(b));
        let total = composition.codewords.to_u128().unwrap();
        unrank(index, &composition.counts, total)
    } else {
        unrank(bits_to_biguint(bits), &composition.counts, composition.codewords.clone())
    };
    Ok(AmplitudeBlock { symbols, source_bits: Some(bits.to_vec()) })
}

/// Inverts [`ccdm_encode`].
pub fn ccdm_decode(symbols: &[usize], composition: &Composition) -> Result<Vec<bool>> {
    let levels = composition.counts.len();
    if symbols.len() != composition.n() || symbols.iter().any(|&s| s >= levels) {
        return Err(Error::CompositionMismatch {
            expected: composition.counts.clone(),
            actual: histogram_clamped(symbols, levels),
        });
    }
    let actual = histogram(symbols, levels);
    if actual != composition.counts {
        return Err(Error::CompositionMismatch { expected: composition.counts.clone(), actual });
    }
    let k = composition.k();
    if fits_u128(composition) {
        let total = composition.codewords.to_u128().unwrap();
        let index = rank(symbols, &composition.counts, total, 0u128);
        if k < 128 && index >> k != 0 {
            return Err(Error::OutOfImage { k: composition.k });
        }
        Ok((0..k).rev().map(|i| (index >> i) & 1 == 1).collect())
    } else {
        let index = rank(
            symbols,
            &composition.counts,
            composition.codewords.clone(),
            BigUint::zero(),
        );
        if index.bits() > k as u64 {
            return Err(Error::OutOfImage { k: composition.k });
        }
        Ok(biguint_to_bits(&index, k))
    }
}

fn histogram_clamped(symbols: &[usize], levels: usize) -> Vec<u32> {
    let mut h = vec![0u32; levels];
    for &s in symbols {
        if s < levels {
            h[s] += 1;
        }
    }
    h
}

/// I.i.d. amplitude indices drawn from the target distribution.
pub fn draw_emulated(alphabet: &AmplitudeAlphabet, count: usize, seed: u64) -> Vec<usize> {
    let dist = WeightedIndex::new(alphabet.probs()).expect("validated alphabet");
    let mut rng = seed::rng(seed);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthStats {
    /// Longest run of consecutive occurrences, per level.
    pub max_run: Vec<usize>,
    /// Per aligned window of `window` amplitudes, the count of each level.
    pub window_counts: Vec<Vec<usize>>,
}

/// Run lengths and aligned-window occupancy of an amplitude sequence.
pub fn run_length_stats(symbols: &[usize], num_levels: usize, window: usize) -> RunLengthStats {
    let mut max_run = vec![0usize; num_levels];
    let mut current = 0usize;
    for (i, &s) in symbols.iter().enumerate() {
        current = if i > 0 && symbols[i - 1] == s { current + 1 } else { 1 };
        max_run[s] = max_run[s].max(current);
    }
    let window_counts = if window == 0 {
        Vec::new()
    } else {
        symbols
            .chunks_exact(window)
            .map(|w| {
                let mut c = vec![0usize; num_levels];
                for &s in w {
                    c[s] += 1;
                }
                c
            })
            .collect()
    };
    RunLengthStats { max_run, window_counts }
}
