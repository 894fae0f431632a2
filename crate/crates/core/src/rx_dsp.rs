//! Idealized coherent receiver: CD compensation, channel selection, matched
//! RRC filtering, symbol-rate sampling at the known timing, and a data-aided
//! constant complex gain per polarization.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fiber::{
    angular_frequencies, channel_bin_shift, channel_offset, rrc_response, FftPair, LinkSpec,
    OpticalField, WdmSpec,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RxChain {
    /// Channel index in `0..channel_count`.
    pub target_channel: usize,
    pub channel_count: usize,
    pub grid_spacing: f64,
    pub symbol_rate: f64,
    pub rolloff: f64,
    /// Accumulated `beta2 * L` to undo, in s^2.
    pub cdc_beta2_length: f64,
}

impl RxChain {
    /// Receiver for the center channel of `wdm` after `link`.
    pub fn for_link(wdm: &WdmSpec, link: &LinkSpec) -> Self {
        Self {
            target_channel: wdm.center_channel(),
            channel_count: wdm.channel_count,
            grid_spacing: wdm.grid_spacing(),
            symbol_rate: wdm.symbol_rate(),
            rolloff: wdm.rolloff,
            cdc_beta2_length: link.beta2() * link.total_length_m(),
        }
    }

    /// Receiver with no dispersion to compensate.
    pub fn back_to_back(wdm: &WdmSpec) -> Self {
        Self {
            target_channel: wdm.center_channel(),
            channel_count: wdm.channel_count,
            grid_spacing: wdm.grid_spacing(),
            symbol_rate: wdm.symbol_rate(),
            rolloff: wdm.rolloff,
            cdc_beta2_length: 0.0,
        }
    }
}

/// Filtered and sampled symbols, before any gain correction.
pub fn receive_raw(field: &OpticalField, chain: &RxChain) -> Result<Vec<Vec<Complex64>>> {
    if chain.target_channel >= chain.channel_count {
        return Err(Error::Config(format!(
            "channel {} outside a {}-channel plan",
            chain.target_channel, chain.channel_count
        )));
    }
    let len = field.len();
    let sps_f = field.sample_rate / chain.symbol_rate;
    let sps = sps_f.round() as usize;
    if sps == 0 || (sps_f - sps as f64).abs() > 1e-9 || !len.is_multiple_of(sps) {
        return Err(Error::Config(format!(
            "field of {len} samples at {} samples/symbol is not symbol-aligned",
            sps_f
        )));
    }
    let omega = angular_frequencies(len, field.sample_rate);
    let shift = channel_bin_shift(
        channel_offset(chain.target_channel, chain.channel_count),
        chain.grid_spacing,
        len,
        field.sample_rate,
    );
    let mut fft = FftPair::new(len);
    let mut out = Vec::with_capacity(2);
    for pol in field.pols() {
        let mut spec = pol.to_vec();
        fft.forward(&mut spec);
        for (v, w) in spec.iter_mut().zip(&omega) {
            *v *= Complex64::from_polar(1.0, -chain.cdc_beta2_length / 2.0 * w * w);
        }
        // move the target channel to baseband, then matched-filter
        spec.rotate_left(shift.rem_euclid(len as i64) as usize);
        for (v, w) in spec.iter_mut().zip(&omega) {
            *v *= rrc_response(w / (2.0 * PI), chain.symbol_rate, chain.rolloff);
        }
        fft.inverse_normalized(&mut spec);
        out.push(spec.iter().step_by(sps).copied().collect());
    }
    Ok(out)
}

/// Least-squares complex gain `<x, y> / <x, x>` mapping `x` onto `y`.
pub fn estimate_phase_scale(x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let xx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    if xx == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let xy: Complex64 = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
    Ok(xy / xx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub symbols: Vec<Vec<Complex64>>,
    /// The gain removed from each polarization.
    pub gains: Vec<Complex64>,
}

/// Full receiver: [`receive_raw`] followed by per-polarization division by the
/// gain estimated against the `known` transmitted symbols.
pub fn receive(field: &OpticalField, chain: &RxChain, known: &[&[Complex64]]) -> Result<Received> {
    let raw = receive_raw(field, chain)?;
    if known.len() != raw.len() {
        return Err(Error::LengthMismatch(known.len(), raw.len()));
    }
    let mut symbols = Vec::with_capacity(raw.len());
    let mut gains = Vec::with_capacity(raw.len());
    for (y, x) in raw.into_iter().zip(known) {
        let h = estimate_phase_scale(x, &y)?;
        symbols.push(y.into_iter().map(|v| v / h).collect());
        gains.push(h);
    }
    Ok(Received { symbols, gains })
}
