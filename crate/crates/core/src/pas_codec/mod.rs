//! The PAS transmit and receive chain.
//!
//! Transmit, per polarization:
//!
//! 1. payload bits → CCDM blocks → amplitude sequence (two amplitudes per
//!    complex symbol, I then Q);
//! 2. amplitudes → Gray amplitude bits, optionally burst-interleaved within
//!    each FEC frame;
//! 3. sign bits from the selected [`SignSource`];
//! 4. signs and amplitudes → unit-energy QAM symbols, optionally
//!    symbol-interleaved.
//!
//! In emulation mode steps 1–3 are replaced by i.i.d. draws from the target
//! amplitude distribution and uniform signs.

pub mod interleave;
pub mod labeling;
pub mod llr;
pub mod signs;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist_match::{
    ccdm_decode, ccdm_encode, draw_emulated, quantize_composition, AmplitudeAlphabet,
    AmplitudeBlock, Composition,
};
use crate::error::{Error, Result};
use crate::seed;

pub use interleave::{
    burst_deinterleave, burst_interleave, symbol_deinterleave, symbol_interleave, Permutation,
};
pub use labeling::GrayLabeling;
pub use llr::{compute_llrs, hard_decisions, Constellation};
pub use signs::{generate_signs, SignSource};

pub const POLARIZATIONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QamOrder {
    #[serde(rename = "16qam", alias = "16")]
    Qam16,
    #[serde(rename = "64qam", alias = "64")]
    Qam64,
}

impl QamOrder {
    pub fn amp_levels(self) -> usize {
        match self {
            QamOrder::Qam16 => 2,
            QamOrder::Qam64 => 4,
        }
    }

    /// Bits per complex symbol.
    pub fn bits_per_symbol(self) -> usize {
        match self {
            QamOrder::Qam16 => 4,
            QamOrder::Qam64 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QamOrder::Qam16 => "16qam",
            QamOrder::Qam64 => "64qam",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    EndToEnd,
    EndToEndInterleaved,
    Emulation,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::EndToEnd => "end_to_end",
            Mode::EndToEndInterleaved => "end_to_end_interleaved",
            Mode::Emulation => "emulation",
        }
    }

    pub fn uses_dm(self) -> bool {
        self != Mode::Emulation
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "end_to_end" | "e2e" => Ok(Mode::EndToEnd),
            "end_to_end_interleaved" | "e2e_interleaved" | "interleaved" => {
                Ok(Mode::EndToEndInterleaved)
            }
            "emulation" => Ok(Mode::Emulation),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Whether the symbol interleaver permutes each polarization separately or
/// both polarizations as one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolInterleaverScope {
    #[default]
    PerPolarization,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeedSet {
    pub data: u64,
    pub interleavers: u64,
    pub signs: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PasConfig {
    pub qam: QamOrder,
    pub alphabet: AmplitudeAlphabet,
    pub block_len: usize,
    pub mode: Mode,
    pub fec_frame_bits: usize,
    pub sign_source: SignSource,
    pub symbols_per_pol: usize,
    pub interleaver_scope: SymbolInterleaverScope,
    pub seeds: SeedSet,
}

impl PasConfig {
    pub fn new(
        qam: QamOrder,
        alphabet: AmplitudeAlphabet,
        block_len: usize,
        mode: Mode,
        symbols_per_pol: usize,
    ) -> Self {
        Self {
            qam,
            alphabet,
            block_len,
            mode,
            fec_frame_bits: symbols_per_pol * qam.bits_per_symbol(),
            sign_source: SignSource::default(),
            symbols_per_pol,
            interleaver_scope: SymbolInterleaverScope::default(),
            seeds: SeedSet::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.qam.bits_per_symbol();
        if self.alphabet.len() != self.qam.amp_levels() {
            return Err(Error::Config(format!(
                "{} needs {} amplitude levels, alphabet has {}",
                self.qam.name(),
                self.qam.amp_levels(),
                self.alphabet.len()
            )));
        }
        if self.symbols_per_pol == 0 {
            return Err(Error::Config("symbols_per_pol must be positive".into()));
        }
        if self.block_len == 0 {
            return Err(Error::Config("block length must be positive".into()));
        }
        if self.mode.uses_dm() && !(2 * self.symbols_per_pol).is_multiple_of(self.block_len) {
            return Err(Error::Config(format!(
                "{} amplitudes per polarization are not a multiple of n = {}",
                2 * self.symbols_per_pol,
                self.block_len
            )));
        }
        if self.fec_frame_bits == 0 || !self.fec_frame_bits.is_multiple_of(m) {
            return Err(Error::Config(format!(
                "FEC frame of {} bits is not a multiple of {m} bits per symbol",
                self.fec_frame_bits
            )));
        }
        if !(self.symbols_per_pol * m).is_multiple_of(self.fec_frame_bits) {
            return Err(Error::Config(format!(
                "{} coded bits per polarization are not a multiple of the {}-bit FEC frame",
                self.symbols_per_pol * m,
                self.fec_frame_bits
            )));
        }
        Ok(())
    }

    pub fn symbols_per_frame(&self) -> usize {
        self.fec_frame_bits / self.qam.bits_per_symbol()
    }

    pub fn composition(&self) -> Result<Composition> {
        quantize_composition(&self.alphabet, self.block_len)
    }

    pub fn blocks_per_pol(&self) -> usize {
        2 * self.symbols_per_pol / self.block_len
    }

    /// Payload bits for both polarizations.
    pub fn payload_bits(&self) -> Result<usize> {
        if !self.mode.uses_dm() {
            return Ok(0);
        }
        Ok(POLARIZATIONS * self.blocks_per_pol() * self.composition()?.k())
    }

    /// Amplitude distribution the constellation is normalized with: the
    /// composition for DM modes, the target distribution for emulation.
    pub fn amplitude_distribution(&self) -> Result<Vec<f64>> {
        if self.mode.uses_dm() {
            Ok(self.composition()?.distribution())
        } else {
            Ok(self.alphabet.probs().to_vec())
        }
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::new(self.alphabet.levels(), &self.amplitude_distribution()?)
    }
}

/// One polarization of a [`ShapedFrame`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationFrame {
    /// Transmitted symbols, after any interleaving.
    pub symbols: Vec<Complex64>,
    /// ASK point indices (I, Q) of `symbols`, same order.
    pub points: Vec<[u8; 2]>,
    /// CCDM blocks in generation order; empty in emulation mode.
    pub amplitude_blocks: Vec<AmplitudeBlock>,
    /// Sign bits, one per amplitude, in pre-symbol-interleaving order.
    pub sign_bits: Vec<bool>,
    /// Per-FEC-frame amplitude permutations of the burst interleaver.
    pub burst_permutations: Vec<Permutation>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolPermutation {
    None,
    PerPolarization(Vec<Permutation>),
    Joint(Permutation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapedFrame {
    pub polarizations: Vec<PolarizationFrame>,
    pub symbol_permutation: SymbolPermutation,
    pub payload_bits: Vec<bool>,
    pub constellation: Constellation,
}

impl ShapedFrame {
    pub fn symbols(&self, pol: usize) -> &[Complex64] {
        &self.polarizations[pol].symbols
    }

    /// Transmitted label bits of one polarization, `m` per symbol.
    pub fn tx_bits(&self, pol: usize) -> Vec<bool> {
        self.constellation.symbol_bits(&self.polarizations[pol].points)
    }

    pub fn mean_energy(&self) -> f64 {
        let (sum, count) = self.polarizations.iter().fold((0.0, 0usize), |(s, c), p| {
            (s + p.symbols.iter().map(|x| x.norm_sqr()).sum::<f64>(), c + p.symbols.len())
        });
        sum / count as f64
    }

    /// Undoes the symbol interleaver on per-polarization sequences.
    pub fn deinterleave_symbols<T: Copy + Default>(&self, seqs: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        match &self.symbol_permutation {
            SymbolPermutation::None => Ok(seqs.to_vec()),
            SymbolPermutation::PerPolarization(perms) => seqs
                .iter()
                .zip(perms)
                .map(|(s, p)| symbol_deinterleave(s, p))
                .collect(),
            SymbolPermutation::Joint(perm) => {
                let joined: Vec<T> = seqs.concat();
                let out = symbol_deinterleave(&joined, perm)?;
                let len = seqs[0].len();
                Ok(out.chunks(len).map(|c| c.to_vec()).collect())
            }
        }
    }
}

/// Runs the transmit chain for both polarizations.
pub fn pas_encode(data_bits: &[bool], config: &PasConfig) -> Result<ShapedFrame> {
    config.validate()?;
    let constellation = config.constellation()?;
    let labeling = constellation.labeling().clone();
    let amp_bits = labeling.amp_bits();
    let amps_per_pol = 2 * config.symbols_per_pol;
    let amps_per_frame = 2 * config.symbols_per_frame();

    let composition = if config.mode.uses_dm() { Some(config.composition()?) } else { None };
    let expected = config.payload_bits()?;
    if data_bits.len() != expected {
        return Err(Error::PayloadLength { expected, actual: data_bits.len() });
    }
    if let Some(c) = &composition {
        if c.k() == 0 && !data_bits.is_empty() {
            return Err(Error::PayloadLength { expected: 0, actual: data_bits.len() });
        }
    }

    let mut polarizations = Vec::with_capacity(POLARIZATIONS);
    for pol in 0..POLARIZATIONS {
        let sign_seed = seed::derive(config.seeds.signs, &[pol as u64]);
        let (amplitudes, blocks, signs, burst_permutations) = match &composition {
            None => {
                let amps = draw_emulated(
                    &config.alphabet,
                    amps_per_pol,
                    seed::derive(config.seeds.data, &[pol as u64]),
                );
                let signs = generate_signs(
                    &vec![false; amps_per_pol * amp_bits],
                    amp_bits,
                    amps_per_frame,
                    SignSource::UniformRandom,
                    sign_seed,
                )?;
                (amps, Vec::new(), signs, Vec::new())
            }
            Some(comp) => {
                let k = comp.k();
                let per_pol = config.blocks_per_pol() * k;
                let payload = &data_bits[pol * per_pol..(pol + 1) * per_pol];
                let blocks = if k == 0 {
                    let b = ccdm_encode(&[], comp)?;
                    vec![b; config.blocks_per_pol()]
                } else {
                    payload
                        .chunks_exact(k)
                        .map(|bits| ccdm_encode(bits, comp))
                        .collect::<Result<Vec<_>>>()?
                };
                let mut amps: Vec<usize> = blocks.iter().flat_map(|b| b.symbols.iter().copied()).collect();
                let mut perms = Vec::new();
                if config.mode == Mode::EndToEndInterleaved {
                    let burst_seed = seed::derive(config.seeds.interleavers, &[pol as u64, 0]);
                    let (shuffled, p) = burst_interleave(&amps, amps_per_frame, 1, burst_seed)?;
                    amps = shuffled;
                    perms = p;
                }
                let mut bits = Vec::with_capacity(amps.len() * amp_bits);
                for &a in &amps {
                    labeling.push_amp_bits(a, &mut bits);
                }
                let signs =
                    generate_signs(&bits, amp_bits, amps_per_frame, config.sign_source, sign_seed)?;
                (amps, blocks, signs, perms)
            }
        };

        let points: Vec<[u8; 2]> = amplitudes
            .chunks_exact(2)
            .zip(signs.chunks_exact(2))
            .map(|(a, s)| {
                [labeling.ask_index(s[0], a[0]) as u8, labeling.ask_index(s[1], a[1]) as u8]
            })
            .collect();
        polarizations.push(PolarizationFrame {
            symbols: Vec::new(),
            points,
            amplitude_blocks: blocks,
            sign_bits: signs,
            burst_permutations,
        });
    }

    let symbol_permutation = if config.mode == Mode::EndToEndInterleaved {
        let sym_seed = seed::derive(config.seeds.interleavers, &[u64::MAX]);
        match config.interleaver_scope {
            SymbolInterleaverScope::PerPolarization => {
                let mut perms = Vec::new();
                for (pol, p) in polarizations.iter_mut().enumerate() {
                    let (pts, perm) = symbol_interleave(&p.points, seed::derive(sym_seed, &[pol as u64]));
                    p.points = pts;
                    perms.push(perm);
                }
                SymbolPermutation::PerPolarization(perms)
            }
            SymbolInterleaverScope::Joint => {
                let joined: Vec<[u8; 2]> =
                    polarizations.iter().flat_map(|p| p.points.iter().copied()).collect();
                let (pts, perm) = symbol_interleave(&joined, sym_seed);
                for (p, chunk) in polarizations.iter_mut().zip(pts.chunks(config.symbols_per_pol)) {
                    p.points = chunk.to_vec();
                }
                SymbolPermutation::Joint(perm)
            }
        }
    } else {
        SymbolPermutation::None
    };

    for p in &mut polarizations {
        p.symbols = p.points.iter().map(|&pt| constellation.symbol(pt)).collect();
    }
    if !config.mode.uses_dm() {
        // i.i.d. frames only match the target energy on average
        let frame = ShapedFrame {
            polarizations: polarizations.clone(),
            symbol_permutation: SymbolPermutation::None,
            payload_bits: Vec::new(),
            constellation: constellation.clone(),
        };
        let norm = 1.0 / frame.mean_energy().sqrt();
        for p in &mut polarizations {
            for s in &mut p.symbols {
                *s *= norm;
            }
        }
    }

    Ok(ShapedFrame {
        polarizations,
        symbol_permutation,
        payload_bits: data_bits.to_vec(),
        constellation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub bits: Vec<bool>,
    /// Blocks whose hard-decided histogram violated the composition.
    pub composition_mismatches: usize,
    /// Blocks with a valid histogram but an index outside the encoder image.
    pub out_of_image: usize,
}

/// Hard-decision receive chain: decide, deinterleave, strip signs, invert the
/// matcher. Failed blocks decode to zeros and are counted.
pub fn pas_decode(
    received: &[Vec<Complex64>],
    frame: &ShapedFrame,
    config: &PasConfig,
    noise_variance: Option<f64>,
) -> Result<DecodeOutcome> {
    config.validate()?;
    if !config.mode.uses_dm() {
        return Err(Error::Config("emulation frames carry no payload to decode".into()));
    }
    if received.len() != POLARIZATIONS {
        return Err(Error::LengthMismatch(received.len(), POLARIZATIONS));
    }
    for r in received {
        if r.len() != config.symbols_per_pol {
            return Err(Error::LengthMismatch(r.len(), config.symbols_per_pol));
        }
    }
    let constellation = &frame.constellation;
    let labeling = constellation.labeling();
    let comp = config.composition()?;
    let k = comp.k();
    let amps_per_frame = 2 * config.symbols_per_frame();

    let decided: Vec<Vec<[u8; 2]>> = received
        .iter()
        .map(|r| hard_decisions(r, noise_variance, constellation))
        .collect();
    let decided = frame.deinterleave_symbols(&decided)?;

    let mut outcome = DecodeOutcome { bits: Vec::new(), composition_mismatches: 0, out_of_image: 0 };
    for (pol, points) in decided.iter().enumerate() {
        let mut amps: Vec<usize> = points
            .iter()
            .flat_map(|p| [labeling.split(p[0] as usize).1, labeling.split(p[1] as usize).1])
            .collect();
        if config.mode == Mode::EndToEndInterleaved {
            let perms = &frame.polarizations[pol].burst_permutations;
            amps = burst_deinterleave(&amps, amps_per_frame, 1, perms)?;
        }
        for block in amps.chunks_exact(config.block_len) {
            match ccdm_decode(block, &comp) {
                Ok(bits) => outcome.bits.extend(bits),
                Err(e) => {
                    match e {
                        Error::OutOfImage { .. } => outcome.out_of_image += 1,
                        _ => outcome.composition_mismatches += 1,
                    }
                    outcome.bits.extend(std::iter::repeat_n(false, k));
                }
            }
        }
    }
    Ok(outcome)
}

/// Uniform random payload for a configuration.
pub fn random_payload(config: &PasConfig, seed: u64) -> Result<Vec<bool>> {
    use rand::Rng;
    let mut rng = seed::rng(seed);
    Ok((0..config.payload_bits()?).map(|_| rng.random::<bool>()).collect())
}
