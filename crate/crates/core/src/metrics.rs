//! Effective SNR, bit-metric decoding rate and finite-length AIR.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Reported in place of an infinite SNR (zero error variance).
pub const SNR_CAP_DB: f64 = 100.0;

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Converts an error variance to an SNR in dB for unit-energy data.
pub fn mse_to_snr_db(mse: f64) -> f64 {
    if mse <= 0.0 {
        SNR_CAP_DB
    } else {
        (-linear_to_db(mse)).min(SNR_CAP_DB)
    }
}

/// Variance of `y - x` (mean removed).
pub fn error_variance(x: &[Complex64], y: &[Complex64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::LengthMismatch(0, 0));
    }
    let n = x.len() as f64;
    let mean: Complex64 = x.iter().zip(y).map(|(a, b)| b - a).sum::<Complex64>() / n;
    Ok(x.iter().zip(y).map(|(a, b)| (b - a - mean).norm_sqr()).sum::<f64>() / n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrReport {
    pub per_pol_mse: Vec<f64>,
    /// Error variance over both polarizations jointly.
    pub joint_mse: f64,
}

impl SnrReport {
    pub fn per_pol_db(&self) -> Vec<f64> {
        self.per_pol_mse.iter().map(|&m| mse_to_snr_db(m)).collect()
    }

    pub fn joint_db(&self) -> f64 {
        mse_to_snr_db(self.joint_mse)
    }
}

/// Effective SNR `1 / var(y - x)` per polarization and over all
/// polarizations together.
pub fn effective_snr(x: &[&[Complex64]], y: &[&[Complex64]]) -> Result<SnrReport> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let per_pol_mse = x
        .iter()
        .zip(y)
        .map(|(a, b)| error_variance(a, b))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<Complex64> = x.iter().flat_map(|s| s.iter().copied()).collect();
    let ys: Vec<Complex64> = y.iter().flat_map(|s| s.iter().copied()).collect();
    let joint_mse = error_variance(&xs, &ys)?;
    Ok(SnrReport { per_pol_mse, joint_mse })
}

/// `log2(1 + e^z)` without overflow.
fn log2_one_plus_exp(z: f64) -> f64 {
    (z.max(0.0) + (-z.abs()).exp().ln_1p()) / std::f64::consts::LN_2
}

/// BMD rate `H(C) - sum_i H(C_i | Y)` in bits per complex symbol.
///
/// `llrs` and `bits` are aligned, `bits_per_symbol` per symbol; each
/// conditional entropy is the empirical mean of `log2(1 + e^{-(1-2c)L})`.
pub fn bmd_rate(llrs: &[f64], bits: &[bool], bits_per_symbol: usize, symbol_entropy: f64) -> Result<f64> {
    if llrs.len() != bits.len() {
        return Err(Error::LengthMismatch(llrs.len(), bits.len()));
    }
    if bits_per_symbol == 0 || !bits.len().is_multiple_of(bits_per_symbol) || bits.is_empty() {
        return Err(Error::NotFrameDivisible { len: bits.len(), frame: bits_per_symbol });
    }
    let symbols = (bits.len() / bits_per_symbol) as f64;
    let total: f64 = llrs
        .iter()
        .zip(bits)
        .map(|(&l, &c)| log2_one_plus_exp(if c { l } else { -l }))
        .sum();
    Ok((symbol_entropy - total / symbols).max(0.0))
}

/// Finite-length AIR per 4D symbol from the BMD rate per 2D symbol and the
/// DM rate loss per amplitude (two amplitudes per 2D symbol).
pub fn air_n(bmd_per_2d: f64, rate_loss_per_amplitude: f64) -> f64 {
    2.0 * (bmd_per_2d - 2.0 * rate_loss_per_amplitude)
}

/// Rate loss per amplitude expressed per 4D symbol.
pub fn rate_loss_per_4d(rate_loss_per_amplitude: f64) -> f64 {
    4.0 * rate_loss_per_amplitude
}

/// Per-run figures of merit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub snr: SnrReport,
    pub bmd_b4d: f64,
    pub rate_loss_b4d: f64,
    pub air_b4d: f64,
}

impl RunMetrics {
    pub fn new(snr: SnrReport, bmd_per_2d: f64, rate_loss_per_amplitude: f64) -> Self {
        Self {
            snr,
            bmd_b4d: 2.0 * bmd_per_2d,
            rate_loss_b4d: rate_loss_per_4d(rate_loss_per_amplitude),
            air_b4d: air_n(bmd_per_2d, rate_loss_per_amplitude),
        }
    }
}

/// Averages over runs. SNRs are averaged as error variances and converted to
/// dB afterwards; rates are averaged arithmetically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub snr_db_per_pol: Vec<f64>,
    pub snr_db: f64,
    pub bmd_b4d: f64,
    pub rate_loss_b4d: f64,
    pub air_b4d: f64,
    pub run_count: usize,
    /// Standard error of the per-run joint SNR in dB.
    pub snr_db_stderr: f64,
}

impl MetricReport {
    pub fn average(runs: &[RunMetrics]) -> Option<Self> {
        if runs.is_empty() {
            return None;
        }
        let n = runs.len() as f64;
        let pols = runs[0].snr.per_pol_mse.len();
        let snr_db_per_pol = (0..pols)
            .map(|p| mse_to_snr_db(runs.iter().map(|r| r.snr.per_pol_mse[p]).sum::<f64>() / n))
            .collect();
        let snr_db = mse_to_snr_db(runs.iter().map(|r| r.snr.joint_mse).sum::<f64>() / n);
        let mean = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).sum::<f64>() / n;
        let bmd_b4d = mean(|r| r.bmd_b4d);
        let rate_loss_b4d = mean(|r| r.rate_loss_b4d);
        let per_run_db: Vec<f64> = runs.iter().map(|r| r.snr.joint_db()).collect();
        let mean_db = per_run_db.iter().sum::<f64>() / n;
        let snr_db_stderr = if runs.len() > 1 {
            (per_run_db.iter().map(|d| (d - mean_db).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Some(Self {
            snr_db_per_pol,
            snr_db,
            bmd_b4d,
            rate_loss_b4d,
            air_b4d: bmd_b4d - rate_loss_b4d,
            run_count: runs.len(),
            snr_db_stderr,
        })
    }
}
