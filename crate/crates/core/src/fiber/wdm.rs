use num_complex::Complex64;

use super::fft::FftPair;
use super::{OpticalField, WdmSpec};
use crate::error::{Error, Result};

/// Grid offset of channel `index` (0-based, centered on the middle channel).
pub fn channel_offset(index: usize, channel_count: usize) -> i64 {
    index as i64 - (channel_count / 2) as i64
}

/// Frequency shift of a channel, rounded to whole DFT bins so that the
/// shifted field stays periodic over the block.
pub fn channel_bin_shift(offset: i64, grid_spacing: f64, len: usize, sample_rate: f64) -> i64 {
    (offset as f64 * grid_spacing * len as f64 / sample_rate).round() as i64
}

fn rotate_into(dst: &mut [Complex64], src: &[Complex64], shift: i64) {
    let len = src.len() as i64;
    for (j, &v) in src.iter().enumerate() {
        let k = (j as i64 + shift).rem_euclid(len) as usize;
        dst[k] += v;
    }
}

/// Shifts each channel to its grid slot and sums them.
pub fn wdm_mux(channels: &[OpticalField], wdm: &WdmSpec) -> Result<OpticalField> {
    wdm.validate()?;
    if channels.len() != wdm.channel_count {
        return Err(Error::Config(format!(
            "{} channel fields for a {}-channel grid",
            channels.len(),
            wdm.channel_count
        )));
    }
    let first = &channels[0];
    let len = first.len();
    for ch in channels {
        if ch.len() != len || ch.sample_rate != first.sample_rate {
            return Err(Error::Config("WDM channels differ in length or sample rate".into()));
        }
    }
    let mut fft = FftPair::new(len);
    let mut x = vec![Complex64::default(); len];
    let mut y = vec![Complex64::default(); len];
    let mut buf = vec![Complex64::default(); len];
    for (i, ch) in channels.iter().enumerate() {
        let shift = channel_bin_shift(
            channel_offset(i, channels.len()),
            wdm.grid_spacing(),
            len,
            first.sample_rate,
        );
        for (src, dst) in [(&ch.x, &mut x), (&ch.y, &mut y)] {
            buf.copy_from_slice(src);
            fft.forward(&mut buf);
            rotate_into(dst, &buf, shift);
        }
    }
    fft.inverse_normalized(&mut x);
    fft.inverse_normalized(&mut y);
    let mut out = OpticalField::new(x, y, first.sample_rate)?;
    out.center_frequency = first.center_frequency;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::rrc_shape;
    use rand::Rng;

    fn channel(seed: u64, power: f64, wdm: &WdmSpec) -> (OpticalField, Vec<Complex64>) {
        let mut rng = crate::seed::rng(seed);
        let syms: Vec<Complex64> = (0..2048)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let f = rrc_shape(&[&syms, &syms], wdm.rolloff, wdm.sim_oversampling, wdm.symbol_rate(), power)
            .unwrap();
        (f, syms)
    }

    #[test]
    fn single_channel_is_identity() {
        let wdm = WdmSpec { channel_count: 1, ..WdmSpec::desk() };
        let (f, _) = channel(1, 1e-3, &wdm);
        let out = wdm_mux(std::slice::from_ref(&f), &wdm).unwrap();
        for (a, b) in out.x.iter().zip(&f.x) {
            assert!((a - b).norm() < 1e-12 * 1e-3f64.sqrt() * 100.0);
        }
    }

    #[test]
    fn powers_add() {
        let wdm = WdmSpec::desk();
        let chans: Vec<_> = (0..3).map(|i| channel(i, 1e-3 * (i + 1) as f64, &wdm).0).collect();
        let out = wdm_mux(&chans, &wdm).unwrap();
        assert!((out.power() / 6e-3 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_wrong_channel_count() {
        let wdm = WdmSpec::desk();
        let (f, _) = channel(1, 1e-3, &wdm);
        assert!(wdm_mux(&[f], &wdm).is_err());
    }
}
