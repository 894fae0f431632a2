//! Symmetric split-step Fourier solution of the Manakov equation
//!
//! ```text
//! dE/dz = -a/2 E + j b2/2 w^2 E (frequency domain) + j 8/9 g |E|^2 E
//! ```
//!
//! with `|E|^2 = |Ex|^2 + |Ey|^2`, followed after each span by a lumped
//! amplifier and additive ASE.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::fft::{angular_frequencies, FftPair};
use super::{effective_length, LinkSpec, OpticalField};
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Seed for the per-span ASE streams.
    pub ase_seed: u64,
    /// With zero nonlinearity, propagate each span in one exact linear step.
    pub linear_fast_path: bool,
}

impl PropagationOptions {
    pub fn new(ase_seed: u64) -> Self {
        Self { ase_seed, linear_fast_path: true }
    }
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Linear operator over `dz`, with the inverse-FFT `1/N` folded in.
fn linear_operator(omega: &[f64], alpha: f64, beta2: f64, dz: f64) -> Vec<Complex64> {
    let n = omega.len() as f64;
    let amp = (-alpha / 2.0 * dz).exp() / n;
    omega
        .iter()
        .map(|w| Complex64::from_polar(amp, beta2 / 2.0 * w * w * dz))
        .collect()
}

fn apply_linear(fft: &mut FftPair, field: &mut OpticalField, op: &[Complex64]) {
    for pol in [&mut field.x, &mut field.y] {
        fft.forward(pol);
        for (v, h) in pol.iter_mut().zip(op) {
            *v *= h;
        }
        fft.inverse(pol);
    }
}

fn apply_nonlinear(field: &mut OpticalField, coeff: f64) {
    for (a, b) in field.x.iter_mut().zip(field.y.iter_mut()) {
        let phi = coeff * (a.norm_sqr() + b.norm_sqr());
        let (s, c) = phi.sin_cos();
        let rot = Complex64::new(c, s);
        *a *= rot;
        *b *= rot;
    }
}

fn add_ase(field: &mut OpticalField, variance: f64, seed: u64, span: usize) {
    let sigma = (variance / 2.0).sqrt();
    for (pol, samples) in [&mut field.x, &mut field.y].into_iter().enumerate() {
        let mut rng = seed::stream_rng(seed, Stream::Ase, &[span as u64, pol as u64]);
        for v in samples.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v += Complex64::new(sigma * re, sigma * im);
        }
    }
}

/// Propagates `field` over every span of `link`.
pub fn ssfm_propagate(
    field: &OpticalField,
    link: &LinkSpec,
    options: &PropagationOptions,
) -> Result<OpticalField> {
    link.validate()?;
    if field.x.len() != field.y.len() {
        return Err(Error::LengthMismatch(field.x.len(), field.y.len()));
    }
    let mut out = field.clone();
    if out.is_empty() {
        return Ok(out);
    }
    let omega = angular_frequencies(out.len(), out.sample_rate);
    let alpha = link.alpha_per_m();
    let beta2 = link.beta2();
    let gamma = link.gamma_per_w_m();
    let h = link.step_size_m;
    let steps = link.steps_per_span();
    let mut fft = FftPair::new(out.len());

    let amp_gain = link.gain_linear().sqrt();
    let ase_variance = link.ase_psd_per_pol() * out.sample_rate;

    let linear_only = gamma == 0.0 && options.linear_fast_path;
    let (half, full, span_op) = if linear_only {
        (Vec::new(), Vec::new(), linear_operator(&omega, alpha, beta2, link.span_length_m()))
    } else {
        (
            linear_operator(&omega, alpha, beta2, h / 2.0),
            linear_operator(&omega, alpha, beta2, h),
            Vec::new(),
        )
    };
    // The nonlinear step acts half a step into each segment; referring the
    // power back to the segment start gives an exact effective length.
    let nl_coeff = MANAKOV_FACTOR * gamma * effective_length(alpha, h) * (alpha * h / 2.0).exp();

    for span in 0..link.span_count {
        if linear_only {
            apply_linear(&mut fft, &mut out, &span_op);
        } else {
            apply_linear(&mut fft, &mut out, &half);
            for step in 0..steps {
                apply_nonlinear(&mut out, nl_coeff);
                let op = if step + 1 == steps { &half } else { &full };
                apply_linear(&mut fft, &mut out, op);
            }
        }
        out.scale(amp_gain);
        if ase_variance > 0.0 {
            add_ase(&mut out, ase_variance, options.ase_seed, span);
        }
        if !out.is_finite() {
            return Err(Error::NonFinite { span, step: steps });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{rrc_shape, WdmSpec};
    use rand::Rng;

    fn test_field(nsym: usize, power: f64, seed: u64, single_pol: bool) -> OpticalField {
        let mut rng = crate::seed::rng(seed);
        let mut gen = || -> Vec<Complex64> {
            (0..nsym)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        };
        let x = gen();
        let y = if single_pol { vec![Complex64::default(); nsym] } else { gen() };
        let wdm = WdmSpec::desk();
        rrc_shape(&[&x, &y], 0.1, 6, wdm.symbol_rate(), power).unwrap()
    }

    fn max_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn dispersion_only_matches_closed_form() {
        let link = LinkSpec { span_count: 2, ..LinkSpec::default() }.linear().noiseless();
        let input = test_field(512, 1e-3, 1, false);
        let opts = PropagationOptions { ase_seed: 0, linear_fast_path: false };
        let out = ssfm_propagate(&input, &link, &opts).unwrap();
        let omega = angular_frequencies(input.len(), input.sample_rate);
        let total = link.total_length_m();
        let mut fft = FftPair::new(input.len());
        for (got, src) in [(&out.x, &input.x), (&out.y, &input.y)] {
            let mut expect = src.clone();
            fft.forward(&mut expect);
            for (v, w) in expect.iter_mut().zip(&omega) {
                *v *= Complex64::from_polar(1.0, link.beta2() / 2.0 * w * w * total);
            }
            fft.inverse_normalized(&mut expect);
            let err = max_rel_err(got, &expect);
            assert!(err < 1e-9, "{err}");
        }
        let fast = ssfm_propagate(&input, &link, &PropagationOptions::new(0)).unwrap();
        assert!(max_rel_err(&fast.x, &out.x) < 1e-9);
    }

    #[test]
    fn spm_only_matches_closed_form() {
        let link = LinkSpec { dispersion_ps_per_nm_km: 0.0, span_count: 2, ..LinkSpec::default() }
            .noiseless();
        let input = test_field(512, 5e-3, 2, true);
        let out = ssfm_propagate(&input, &link, &PropagationOptions::new(0)).unwrap();
        let phase_per_watt = MANAKOV_FACTOR * link.gamma_per_w_m() * link.span_effective_length_m()
            * link.span_count as f64;
        let expect: Vec<Complex64> = input
            .x
            .iter()
            .map(|v| v * Complex64::from_polar(1.0, phase_per_watt * v.norm_sqr()))
            .collect();
        let err = max_rel_err(&out.x, &expect);
        assert!(err < 1e-9, "{err}");
        assert!(out.y.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn lossless_propagation_conserves_energy() {
        let link = LinkSpec {
            alpha_db_per_km: 0.0,
            amp_gain_db: 0.0,
            span_count: 1,
            span_length_km: 20.0,
            ..LinkSpec::default()
        }
        .noiseless();
        let input = test_field(512, 20e-3, 3, false);
        let out = ssfm_propagate(&input, &link, &PropagationOptions::new(0)).unwrap();
        assert!((out.power() / input.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn amplifiers_restore_power() {
        let link = LinkSpec { span_count: 1, ..LinkSpec::default() }.noiseless();
        let input = test_field(512, 1e-3, 4, false);
        let out = ssfm_propagate(&input, &link, &PropagationOptions::new(0)).unwrap();
        assert!((out.power() / input.power() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn linear_channel_is_homogeneous() {
        let link = LinkSpec::default().linear().noiseless();
        let input = test_field(512, 1e-3, 5, false);
        let mut doubled = input.clone();
        doubled.scale(2.0);
        let a = ssfm_propagate(&input, &link, &PropagationOptions::new(0)).unwrap();
        let b = ssfm_propagate(&doubled, &link, &PropagationOptions::new(0)).unwrap();
        for (p, q) in a.x.iter().zip(&b.x) {
            assert!((2.0 * p - q).norm() < 1e-12 * q.norm().max(1e-3));
        }
    }

    #[test]
    fn ase_power_budget() {
        let link = LinkSpec::default().linear();
        let len = 1 << 16;
        let zero = OpticalField::new(vec![Complex64::default(); len], vec![Complex64::default(); len], 252e9)
            .unwrap();
        let out = ssfm_propagate(&zero, &link, &PropagationOptions::new(7)).unwrap();
        let budget = link.span_count as f64 * link.ase_psd_per_pol() * zero.sample_rate;
        for pol in 0..2 {
            let p = out.pol_power(pol);
            assert!((p / budget - 1.0).abs() < 0.01, "pol {pol}: {p} vs {budget}");
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let link = LinkSpec { span_count: 2, ..LinkSpec::default() }.linear();
        let input = test_field(256, 1e-3, 6, false);
        let a = ssfm_propagate(&input, &link, &PropagationOptions::new(1)).unwrap();
        let b = ssfm_propagate(&input, &link, &PropagationOptions::new(1)).unwrap();
        let c = ssfm_propagate(&input, &link, &PropagationOptions::new(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn overflow_is_reported() {
        let link = LinkSpec { span_count: 1, ..LinkSpec::default() }.noiseless();
        let mut input = test_field(64, 1e-3, 8, false);
        input.x[3] = Complex64::new(f64::INFINITY, 0.0);
        assert!(matches!(
            ssfm_propagate(&input, &link, &PropagationOptions::new(0)),
            Err(Error::NonFinite { span: 0, .. })
        ));
    }
}
