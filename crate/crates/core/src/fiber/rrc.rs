use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{angular_frequencies, FftPair};
use super::OpticalField;
use crate::error::{Error, Result};

/// Root-raised-cosine amplitude response at frequency `f` (Hz).
pub fn rrc_response(f: f64, symbol_rate: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let lo = (1.0 - rolloff) * symbol_rate / 2.0;
    let hi = (1.0 + rolloff) * symbol_rate / 2.0;
    if f <= lo {
        1.0
    } else if f > hi {
        0.0
    } else {
        (0.5 * (1.0 + (PI / (rolloff * symbol_rate) * (f - lo)).cos())).sqrt()
    }
}

/// Upsamples each polarization's symbols by `oversampling`, filters the
/// impulse train with an RRC response over the whole (circular) block, and
/// scales the result to a mean power of `power_w` over both polarizations.
pub fn rrc_shape(
    symbols: &[&[Complex64]; 2],
    rolloff: f64,
    oversampling: usize,
    symbol_rate: f64,
    power_w: f64,
) -> Result<OpticalField> {
    if !(rolloff > 0.0 && rolloff <= 1.0) {
        return Err(Error::Config(format!("rolloff {rolloff} outside (0, 1]")));
    }
    if (oversampling as f64) < 1.0 + rolloff || oversampling < 2 {
        return Err(Error::Config(format!(
            "{oversampling} samples per symbol cannot carry a rolloff-{rolloff} pulse"
        )));
    }
    if symbols[0].len() != symbols[1].len() {
        return Err(Error::LengthMismatch(symbols[0].len(), symbols[1].len()));
    }
    let len = symbols[0].len() * oversampling;
    let sample_rate = symbol_rate * oversampling as f64;
    let response: Vec<f64> = angular_frequencies(len, sample_rate)
        .into_iter()
        .map(|w| rrc_response(w / (2.0 * PI), symbol_rate, rolloff))
        .collect();
    let mut fft = FftPair::new(len);
    let mut pols = symbols.iter().map(|syms| {
        let mut buf = vec![Complex64::default(); len];
        for (i, &s) in syms.iter().enumerate() {
            buf[i * oversampling] = s;
        }
        fft.forward(&mut buf);
        for (v, h) in buf.iter_mut().zip(&response) {
            *v *= h;
        }
        fft.inverse_normalized(&mut buf);
        buf
    });
    let x = pols.next().unwrap();
    let y = pols.next().unwrap();
    let mut field = OpticalField::new(x, y, sample_rate)?;
    let p = field.power();
    if p > 0.0 {
        field.scale((power_w / p).sqrt());
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::db_to_linear;
    use rand::Rng;

    fn qpsk(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = crate::seed::rng(seed);
        (0..len)
            .map(|_| {
                let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(re, im) / 2f64.sqrt()
            })
            .collect()
    }

    #[test]
    fn matched_pair_is_nyquist() {
        // impulse through RRC x RRC sampled at symbol instants
        let rs = 42e9;
        let (sps, nsym) = (8, 256);
        let len = sps * nsym;
        let mut buf = vec![Complex64::default(); len];
        buf[0] = Complex64::new(1.0, 0.0);
        let mut fft = FftPair::new(len);
        fft.forward(&mut buf);
        for (v, w) in buf.iter_mut().zip(angular_frequencies(len, rs * sps as f64)) {
            let h = rrc_response(w / (2.0 * PI), rs, 0.1);
            *v *= h * h;
        }
        fft.inverse_normalized(&mut buf);
        let peak = buf[0].norm();
        for k in 1..nsym {
            assert!(buf[k * sps].norm() < 1e-10 * peak, "tap {k}: {}", buf[k * sps].norm());
        }
    }

    #[test]
    fn spectrum_is_band_limited() {
        let rs = 42e9;
        let syms = qpsk(1024, 1);
        let field = rrc_shape(&[&syms, &syms], 0.1, 4, rs, 1e-3).unwrap();
        let mut spec = field.x.clone();
        FftPair::new(spec.len()).forward(&mut spec);
        let w = angular_frequencies(spec.len(), field.sample_rate);
        let peak = spec.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        let edge = 1.1 * rs / 2.0;
        for (v, w) in spec.iter().zip(w) {
            if (w / (2.0 * PI)).abs() > edge * (1.0 + 1e-9) {
                assert!(v.norm_sqr() < peak * db_to_linear(-60.0));
            }
        }
    }

    #[test]
    fn launch_power() {
        let syms = qpsk(4096, 2);
        let field = rrc_shape(&[&syms, &syms], 0.1, 6, 42e9, crate::fiber::dbm_to_watts(1.0)).unwrap();
        assert!((field.power() / 1.258_925_411_794_167_2e-3 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_undersampling() {
        let syms = qpsk(16, 3);
        assert!(rrc_shape(&[&syms, &syms], 0.1, 1, 42e9, 1e-3).is_err());
        assert!(rrc_shape(&[&syms, &syms], 1.5, 4, 42e9, 1e-3).is_err());
    }
}
