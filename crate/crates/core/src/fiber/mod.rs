//! Transmitter front end and the fiber link.
//!
//! All quantities are SI internally (seconds, meters, hertz, watts); the
//! serialized link and WDM records use the customary engineering units named
//! in their field names.

mod awgn;
mod fft;
mod rrc;
mod ssfm;
mod wdm;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use awgn::awgn_channel;
pub use fft::{angular_frequencies, FftPair};
pub use rrc::{rrc_response, rrc_shape};
pub use ssfm::{ssfm_propagate, PropagationOptions};
pub use wdm::{channel_bin_shift, channel_offset, wdm_mux};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Fiber, amplifier and span plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSpec {
    pub alpha_db_per_km: f64,
    pub gamma_per_w_km: f64,
    pub dispersion_ps_per_nm_km: f64,
    pub span_length_km: f64,
    pub span_count: usize,
    pub step_size_m: f64,
    pub amp_gain_db: f64,
    /// `-inf` disables ASE.
    pub amp_noise_figure_db: f64,
    pub center_wavelength_nm: f64,
}

impl Default for LinkSpec {
    fn default() -> Self {
        Self {
            alpha_db_per_km: 0.2,
            gamma_per_w_km: 1.37,
            dispersion_ps_per_nm_km: 17.0,
            span_length_km: 80.0,
            span_count: 10,
            step_size_m: 100.0,
            amp_gain_db: 16.0,
            amp_noise_figure_db: 6.0,
            center_wavelength_nm: 1550.0,
        }
    }
}

impl LinkSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("gamma_per_w_km", self.gamma_per_w_km),
            ("dispersion_ps_per_nm_km", self.dispersion_ps_per_nm_km),
            ("amp_gain_db", self.amp_gain_db),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::ConfigAt { path: format!("link.{name}"), message: format!("{v} is not a nonnegative number") });
            }
        }
        let positive = [
            ("span_length_km", self.span_length_km),
            ("step_size_m", self.step_size_m),
            ("center_wavelength_nm", self.center_wavelength_nm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ConfigAt { path: format!("link.{name}"), message: format!("{v} is not positive") });
            }
        }
        if self.span_count == 0 {
            return Err(Error::ConfigAt { path: "link.span_count".into(), message: "must be at least 1".into() });
        }
        let ratio = self.span_length_m() / self.step_size_m;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::ConfigAt {
                path: "link.step_size_m".into(),
                message: format!("step {} m does not divide the {} km span", self.step_size_m, self.span_length_km),
            });
        }
        let loss = self.alpha_db_per_km * self.span_length_km;
        if (loss - self.amp_gain_db).abs() > 1e-9 {
            return Err(Error::ConfigAt {
                path: "link.amp_gain_db".into(),
                message: format!("gain {} dB does not cancel the {loss} dB span loss", self.amp_gain_db),
            });
        }
        Ok(())
    }

    /// A copy without Kerr nonlinearity.
    pub fn linear(&self) -> Self {
        Self { gamma_per_w_km: 0.0, ..self.clone() }
    }

    /// A copy without ASE.
    pub fn noiseless(&self) -> Self {
        Self { amp_noise_figure_db: f64::NEG_INFINITY, ..self.clone() }
    }

    pub fn span_length_m(&self) -> f64 {
        self.span_length_km * 1e3
    }

    pub fn total_length_m(&self) -> f64 {
        self.span_length_m() * self.span_count as f64
    }

    pub fn steps_per_span(&self) -> usize {
        (self.span_length_m() / self.step_size_m).round() as usize
    }

    /// Power attenuation coefficient in 1/m.
    pub fn alpha_per_m(&self) -> f64 {
        self.alpha_db_per_km * std::f64::consts::LN_10 / 10.0 / 1e3
    }

    pub fn gamma_per_w_m(&self) -> f64 {
        self.gamma_per_w_km / 1e3
    }

    pub fn wavelength_m(&self) -> f64 {
        self.center_wavelength_nm * 1e-9
    }

    /// Group-velocity dispersion in s^2/m.
    pub fn beta2(&self) -> f64 {
        let d = self.dispersion_ps_per_nm_km * 1e-6; // s/m^2
        let l = self.wavelength_m();
        -d * l * l / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
    }

    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength_m()
    }

    pub fn gain_linear(&self) -> f64 {
        db_to_linear(self.amp_gain_db)
    }

    pub fn has_noise(&self) -> bool {
        self.amp_noise_figure_db.is_finite()
    }

    /// Spontaneous emission factor `NF / 2`.
    pub fn n_sp(&self) -> f64 {
        if self.has_noise() {
            db_to_linear(self.amp_noise_figure_db) / 2.0
        } else {
            0.0
        }
    }

    /// ASE power spectral density per polarization of one amplifier, W/Hz.
    pub fn ase_psd_per_pol(&self) -> f64 {
        self.n_sp() * PLANCK * self.carrier_frequency() * (self.gain_linear() - 1.0)
    }

    /// Effective length of one span, `(1 - e^{-aL}) / a`.
    pub fn span_effective_length_m(&self) -> f64 {
        effective_length(self.alpha_per_m(), self.span_length_m())
    }
}

pub(crate) fn effective_length(alpha: f64, len: f64) -> f64 {
    if alpha == 0.0 {
        len
    } else {
        -(-alpha * len).exp_m1() / alpha
    }
}

/// WDM grid and transmitter settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WdmSpec {
    pub channel_count: usize,
    pub symbol_rate_gbd: f64,
    pub grid_spacing_ghz: f64,
    pub per_channel_power_dbm: f64,
    pub rolloff: f64,
    pub sim_oversampling: usize,
}

impl Default for WdmSpec {
    fn default() -> Self {
        Self::desk()
    }
}

impl WdmSpec {
    /// 7 x 42 GBd on a 50 GHz grid, 16 samples per symbol.
    pub fn paper_42gbd() -> Self {
        Self {
            channel_count: 7,
            symbol_rate_gbd: 42.0,
            grid_spacing_ghz: 50.0,
            per_channel_power_dbm: 1.0,
            rolloff: 0.1,
            sim_oversampling: 16,
        }
    }

    /// 5 x 64 GBd on a 75 GHz grid, 10 samples per symbol.
    pub fn paper_64gbd() -> Self {
        Self {
            channel_count: 5,
            symbol_rate_gbd: 64.0,
            grid_spacing_ghz: 75.0,
            per_channel_power_dbm: 2.0,
            rolloff: 0.1,
            sim_oversampling: 10,
        }
    }

    /// 3 x 42 GBd, 6 samples per symbol.
    pub fn desk() -> Self {
        Self { channel_count: 3, sim_oversampling: 6, ..Self::paper_42gbd() }
    }

    pub fn symbol_rate(&self) -> f64 {
        self.symbol_rate_gbd * 1e9
    }

    pub fn grid_spacing(&self) -> f64 {
        self.grid_spacing_ghz * 1e9
    }

    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate() * self.sim_oversampling as f64
    }

    pub fn channel_power_w(&self) -> f64 {
        dbm_to_watts(self.per_channel_power_dbm)
    }

    pub fn center_channel(&self) -> usize {
        self.channel_count / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel_count == 0 || self.channel_count.is_multiple_of(2) {
            return Err(Error::ConfigAt {
                path: "wdm.channel_count".into(),
                message: format!("{} is not an odd positive count", self.channel_count),
            });
        }
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::ConfigAt { path: "wdm.rolloff".into(), message: format!("{} is outside (0, 1]", self.rolloff) });
        }
        if !(self.symbol_rate_gbd > 0.0 && self.grid_spacing_ghz > 0.0) {
            return Err(Error::ConfigAt { path: "wdm.symbol_rate_gbd".into(), message: "rates must be positive".into() });
        }
        if self.sim_oversampling < 2 {
            return Err(Error::ConfigAt { path: "wdm.sim_oversampling".into(), message: "need at least 2 samples per symbol".into() });
        }
        if self.symbol_rate_gbd * (1.0 + self.rolloff) > self.grid_spacing_ghz + 1e-9 {
            return Err(Error::ConfigAt {
                path: "wdm.grid_spacing_ghz".into(),
                message: format!(
                    "{} GBd with rolloff {} does not fit a {} GHz grid",
                    self.symbol_rate_gbd, self.rolloff, self.grid_spacing_ghz
                ),
            });
        }
        let band = self.channel_count as f64 * self.grid_spacing_ghz;
        if self.symbol_rate_gbd * self.sim_oversampling as f64 + 1e-9 < 1.5 * band {
            return Err(Error::ConfigAt {
                path: "wdm.sim_oversampling".into(),
                message: format!(
                    "{} GHz simulation bandwidth is below 1.5 x the {band} GHz WDM band",
                    self.symbol_rate_gbd * self.sim_oversampling as f64
                ),
            });
        }
        Ok(())
    }
}

/// Dual-polarization complex baseband field, samples in sqrt(W).
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub sample_rate: f64,
    pub center_frequency: f64,
}

impl OpticalField {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        Ok(Self { x, y, sample_rate, center_frequency: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Mean of `|x|^2 + |y|^2`, in W.
    pub fn power(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let e: f64 = self.x.iter().chain(&self.y).map(|s| s.norm_sqr()).sum();
        e / self.len() as f64
    }

    pub fn pol_power(&self, pol: usize) -> f64 {
        let s = if pol == 0 { &self.x } else { &self.y };
        s.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|s| s.re.is_finite() && s.im.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.x.iter_mut().chain(self.y.iter_mut()) {
            *s *= factor;
        }
    }

    pub fn pols(&self) -> [&[Complex64]; 2] {
        [&self.x, &self.y]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_link_is_consistent() {
        let link = LinkSpec::default();
        link.validate().unwrap();
        assert_eq!(link.steps_per_span(), 800);
        // D = 17 ps/nm/km at 1550 nm is about -21.7 ps^2/km
        assert!((link.beta2() * 1e27 + 21.68).abs() < 0.01, "{}", link.beta2());
        assert!((link.n_sp() - 1.9905).abs() < 1e-3);
        assert!((dbm_to_watts(1.0) - 1.258_925_4e-3).abs() < 1e-9);
    }

    #[test]
    fn link_validation() {
        let mut link = LinkSpec { step_size_m: 300.0, ..LinkSpec::default() };
        assert!(link.validate().is_err());
        link.step_size_m = 100.0;
        link.amp_gain_db = 20.0;
        assert!(link.validate().is_err());
        assert!(LinkSpec::default().noiseless().validate().is_ok());
    }

    #[test]
    fn wdm_presets() {
        WdmSpec::paper_42gbd().validate().unwrap();
        WdmSpec::paper_64gbd().validate().unwrap();
        WdmSpec::desk().validate().unwrap();
        let bad = WdmSpec { sim_oversampling: 4, ..WdmSpec::desk() };
        assert!(bad.validate().is_err());
        let bad = WdmSpec { grid_spacing_ghz: 45.0, ..WdmSpec::desk() };
        assert!(bad.validate().is_err());
        let bad = WdmSpec { channel_count: 4, ..WdmSpec::desk() };
        assert!(bad.validate().is_err());
    }
}
