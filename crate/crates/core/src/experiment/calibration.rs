use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{run_cell, Cell, ChannelModel, ExperimentSpec, FormatSpec};
use crate::error::Result;
use crate::fiber::{
    angular_frequencies, awgn_channel, rrc_response, rrc_shape, ssfm_propagate, FftPair, LinkSpec, OpticalField,
    PropagationOptions, WdmSpec,
};
use crate::metrics::{effective_snr, linear_to_db};
use crate::par::{self, Execution};
use crate::pas_codec::{Constellation, Mode};
use crate::rx_dsp::{receive, RxChain};
use crate::seed;

#[derive(Debug, Clone, Copy, Default)]
pub struct CalibrationOptions {
    pub execution: Execution,
    /// Also run the 100 m vs 50 m step-halving check on a full nonlinear link.
    pub step_convergence: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// Measured deviation, in the unit of `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub unit: &'static str,
    pub passed: bool,
}

impl Check {
    fn below(name: &'static str, value: f64, tolerance: f64, unit: &'static str) -> Self {
        Self { name, value, tolerance, unit, passed: value.abs() < tolerance }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} {:>12.4e} (limit {:.1e} {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance,
            self.unit
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub checks: Vec<Check>,
}

impl CalibrationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

type CheckFn = fn(u64) -> Result<Check>;

/// Runs the analytic-limit checks. Failures are report entries; an `Err`
/// means a check could not run at all.
pub fn run_calibration(options: &CalibrationOptions) -> Result<CalibrationReport> {
    let mut checks: Vec<CheckFn> = vec![
        dispersion_only,
        spm_only,
        ase_budget,
        awgn_identity,
        rrc_nyquist,
        back_to_back,
        linear_snr_budget,
    ];
    if options.step_convergence {
        checks.push(step_convergence);
    }
    let seed = options.seed;
    let checks = par::try_map_range(options.execution, checks.len(), |i| checks[i](seed::derive(seed, &[i as u64])))?;
    Ok(CalibrationReport { checks })
}

fn test_symbols(symbols: usize, both_pols: bool, seed: u64) -> [Vec<Complex64>; 2] {
    let mut rng = seed::rng(seed);
    let mut draw = || Complex64::new(if rng.random() { 1.0 } else { -1.0 }, if rng.random() { 1.0 } else { -1.0 }) / 2f64.sqrt();
    let x = (0..symbols).map(|_| draw()).collect();
    let y = if both_pols { (0..symbols).map(|_| draw()).collect() } else { vec![Complex64::default(); symbols] };
    [x, y]
}

fn test_field(wdm: &WdmSpec, symbols: usize, both_pols: bool, seed: u64) -> Result<OpticalField> {
    let [x, y] = test_symbols(symbols, both_pols, seed);
    rrc_shape(&[&x, &y], wdm.rolloff, wdm.sim_oversampling, wdm.symbol_rate(), wdm.channel_power_w())
}

fn max_relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let peak = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max) / peak
}

fn dispersion_only(seed: u64) -> Result<Check> {
    let wdm = WdmSpec::desk();
    let link = LinkSpec::default().noiseless().linear();
    let input = test_field(&wdm, 1024, true, seed)?;
    let options = PropagationOptions { linear_fast_path: false, ..PropagationOptions::new(0) };
    let out = ssfm_propagate(&input, &link, &options)?;

    let omega = angular_frequencies(input.len(), input.sample_rate);
    let bl = link.beta2() * link.total_length_m();
    let mut fft = FftPair::new(input.len());
    let mut err: f64 = 0.0;
    for (pol, got) in input.pols().into_iter().zip(out.pols()) {
        let mut expect = pol.to_vec();
        fft.forward(&mut expect);
        for (v, w) in expect.iter_mut().zip(&omega) {
            *v *= Complex64::from_polar(1.0, bl / 2.0 * w * w);
        }
        fft.inverse_normalized(&mut expect);
        err = err.max(max_relative_error(got, &expect));
    }
    Ok(Check::below("dispersion_only", err, 1e-6, "relative"))
}

fn spm_only(seed: u64) -> Result<Check> {
    let wdm = WdmSpec::desk();
    let link = LinkSpec { dispersion_ps_per_nm_km: 0.0, ..LinkSpec::default().noiseless() };
    let input = test_field(&wdm, 1024, false, seed)?;
    let out = ssfm_propagate(&input, &link, &PropagationOptions::new(0))?;
    let k = 8.0 / 9.0 * link.gamma_per_w_m() * link.span_effective_length_m() * link.span_count as f64;
    let expect: Vec<Complex64> = input
        .x
        .iter()
        .zip(&input.y)
        .map(|(x, y)| x * Complex64::from_polar(1.0, k * (x.norm_sqr() + y.norm_sqr())))
        .collect();
    Ok(Check::below("spm_only", max_relative_error(&out.x, &expect), 1e-6, "relative"))
}

fn ase_budget(seed: u64) -> Result<Check> {
    let wdm = WdmSpec::desk();
    let link = LinkSpec::default().linear();
    let len = 1 << 16;
    let zero = vec![Complex64::default(); len];
    let input = OpticalField::new(zero.clone(), zero, wdm.sample_rate())?;
    let out = ssfm_propagate(&input, &link, &PropagationOptions::new(seed))?;
    let budget = link.span_count as f64 * link.ase_psd_per_pol() * wdm.sample_rate();
    let dev = (0..2).map(|p| (out.pol_power(p) / budget - 1.0).abs()).fold(0.0, f64::max);
    Ok(Check::below("ase_budget", dev, 0.01, "relative"))
}

fn awgn_identity(seed: u64) -> Result<Check> {
    let c = Constellation::new(&[1.0, 3.0], &[0.5, 0.5])?;
    let mut rng = seed::rng(seed);
    let x: Vec<Complex64> = (0..1_000_000).map(|_| c.symbol([rng.random_range(0..4), rng.random_range(0..4)])).collect();
    let set = 14.0;
    let y = awgn_channel(&x, set, seed::derive(seed, &[1]));
    let measured = effective_snr(&[&x], &[&y])?.joint_db();
    Ok(Check::below("awgn_snr", measured - set, 0.05, "dB"))
}

fn rrc_nyquist(_seed: u64) -> Result<Check> {
    let (rs, sps, rolloff) = (42e9, 16usize, 0.1);
    let len = 1024 * sps;
    let mut h: Vec<Complex64> = angular_frequencies(len, rs * sps as f64)
        .into_iter()
        .map(|w| Complex64::from(rrc_response(w / (2.0 * std::f64::consts::PI), rs, rolloff).powi(2)))
        .collect();
    FftPair::new(len).inverse_normalized(&mut h);
    let peak = h[0].norm();
    let worst = h.iter().step_by(sps).skip(1).map(|v| v.norm()).fold(0.0, f64::max);
    Ok(Check::below("rrc_nyquist", worst / peak, 1e-10, "relative"))
}

fn back_to_back(seed: u64) -> Result<Check> {
    let wdm = WdmSpec::desk();
    let field = test_field(&wdm, 4096, true, seed)?;
    let tx = test_symbols(4096, true, seed);
    let rx = receive(&field, &RxChain::back_to_back(&wdm), &[&tx[0], &tx[1]])?;
    let y: Vec<&[Complex64]> = rx.symbols.iter().map(|v| v.as_slice()).collect();
    let evm_db = linear_to_db(effective_snr(&[&tx[0], &tx[1]], &y)?.joint_mse);
    Ok(Check { name: "back_to_back_evm", value: evm_db, tolerance: -50.0, unit: "dB", passed: evm_db < -50.0 })
}

/// SNR of the center channel with the Kerr term off, against
/// `P_ch / (2 * N_ase * R_s)`.
fn linear_snr_budget(seed: u64) -> Result<Check> {
    let mut spec = ExperimentSpec::desk();
    spec.channel = ChannelModel::Linear;
    spec.master_seed = seed;
    let cell = Cell { mode: Mode::EndToEnd, format: FormatSpec::SHAPED_64QAM, n: 10, run: 0 };
    let got = run_cell(&spec, cell, Execution::Sequential, None)?.metrics.snr.joint_db();
    let link = &spec.link;
    let noise = link.span_count as f64 * link.ase_psd_per_pol() * spec.wdm.symbol_rate();
    let expect = linear_to_db(spec.wdm.channel_power_w() / (2.0 * noise));
    Ok(Check::below("linear_snr_budget", got - expect, 0.1, "dB"))
}

/// Center-channel SNR change when the step is halved, same data and noise.
fn step_convergence(seed: u64) -> Result<Check> {
    let mut spec = ExperimentSpec::desk();
    spec.master_seed = seed;
    spec.symbols_per_polarization = 2000;
    spec.fec_frame_bits = 6000;
    let cell = Cell { mode: Mode::Emulation, format: FormatSpec::SHAPED_64QAM, n: 10, run: 0 };
    let coarse = run_cell(&spec, cell, Execution::Sequential, None)?.metrics.snr.joint_db();
    spec.link.step_size_m /= 2.0;
    let fine = run_cell(&spec, cell, Execution::Sequential, None)?.metrics.snr.joint_db();
    Ok(Check::below("step_convergence", coarse - fine, 0.02, "dB"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_checks_pass() {
        for (name, f) in [
            ("spm_only", spm_only as CheckFn),
            ("awgn_snr", awgn_identity),
            ("rrc_nyquist", rrc_nyquist),
            ("back_to_back_evm", back_to_back),
        ] {
            let c = f(3).unwrap();
            assert_eq!(c.name, name);
            assert!(c.passed, "{c}");
        }
    }
}
