//! Block-length sweeps over modes and formats, and the calibration suite.

mod calibration;
mod run;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dist_match::AmplitudeAlphabet;
use crate::error::{Error, Result};
use crate::fiber::{LinkSpec, WdmSpec};
use crate::pas_codec::{Mode, PasConfig, QamOrder, SeedSet, SignSource, SymbolInterleaverScope};

pub use calibration::{run_calibration, CalibrationOptions, CalibrationReport, Check};
pub use run::{
    run_cell, run_experiment, write_csv, write_histograms, Cell, CellResult, CsvRow,
    run_seed, ExperimentReport, GroupSummary, RunOptions,
};

/// The CCDM block lengths of the default sweep.
pub const DEFAULT_N_LIST: [usize; 9] = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shaping {
    /// The fixed shaped distributions: [0.7, 0.3] for 16QAM and
    /// [0.4, 0.3, 0.2, 0.1] for 64QAM.
    Shaped,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormatSpec {
    pub qam: QamOrder,
    pub shaping: Shaping,
}

impl FormatSpec {
    pub const SHAPED_64QAM: Self = Self { qam: QamOrder::Qam64, shaping: Shaping::Shaped };
    pub const SHAPED_16QAM: Self = Self { qam: QamOrder::Qam16, shaping: Shaping::Shaped };
    pub const UNIFORM_64QAM: Self = Self { qam: QamOrder::Qam64, shaping: Shaping::Uniform };

    pub fn alphabet(&self) -> AmplitudeAlphabet {
        match (self.qam, self.shaping) {
            (QamOrder::Qam16, Shaping::Shaped) => AmplitudeAlphabet::shaped_16qam(),
            (QamOrder::Qam64, Shaping::Shaped) => AmplitudeAlphabet::shaped_64qam(),
            (q, Shaping::Uniform) => AmplitudeAlphabet::uniform(q.amp_levels()).unwrap(),
        }
    }

    /// Label used in the CSV `qam` column.
    pub fn label(&self) -> String {
        match self.shaping {
            Shaping::Shaped => self.qam.name().to_string(),
            Shaping::Uniform => format!("{}-uniform", self.qam.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelModel {
    /// The full nonlinear link.
    Fiber,
    /// The link with the Kerr nonlinearity switched off.
    Linear,
    /// Symbol-level AWGN on the center channel only.
    Awgn { snr_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::Config(format!("unknown scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_list: Vec<usize>,
    pub modes: Vec<Mode>,
    pub formats: Vec<FormatSpec>,
    pub symbols_per_polarization: usize,
    pub fec_frame_bits: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub output: PathBuf,
    pub channel: ChannelModel,
    pub sign_source: SignSource,
    pub interleaver_scope: SymbolInterleaverScope,
    pub wdm: WdmSpec,
    pub link: LinkSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentSpec {
    /// Minutes per sweep cell on one core: 3 channels, 15000 symbols per
    /// polarization, 4 runs.
    pub fn desk() -> Self {
        Self {
            n_list: DEFAULT_N_LIST.to_vec(),
            modes: vec![Mode::EndToEnd],
            formats: vec![FormatSpec::SHAPED_64QAM],
            symbols_per_polarization: 15_000,
            fec_frame_bits: 30_000,
            runs: 4,
            master_seed: 1,
            output: PathBuf::from("sweep.csv"),
            channel: ChannelModel::Fiber,
            sign_source: SignSource::default(),
            interleaver_scope: SymbolInterleaverScope::default(),
            wdm: WdmSpec::desk(),
            link: LinkSpec::default(),
        }
    }

    /// 7 x 42 GBd, 330000 symbols per polarization in 66000-bit FEC frames,
    /// 10 runs.
    pub fn paper() -> Self {
        Self {
            symbols_per_polarization: 330_000,
            fec_frame_bits: 66_000,
            runs: 10,
            wdm: WdmSpec::paper_42gbd(),
            ..Self::desk()
        }
    }

    pub fn at_scale(scale: Scale) -> Self {
        match scale {
            Scale::Desk => Self::desk(),
            Scale::Paper => Self::paper(),
        }
    }

    /// Parses a TOML document; absent keys keep their desk-scale defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Like [`from_toml`](Self::from_toml) but with defaults from `base`.
    pub fn from_toml_over(text: &str, base: &Self) -> Result<Self> {
        let mut merged = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
        let overrides: toml::Table = toml::from_str(text)?;
        merge_tables(&mut merged, overrides);
        Ok(merged.try_into()?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// Hash of the canonical TOML form.
    pub fn config_hash(&self) -> u64 {
        crate::field_io::config_hash(&self.to_toml())
    }

    pub fn pas_config(&self, mode: Mode, format: FormatSpec, n: usize) -> PasConfig {
        PasConfig {
            qam: format.qam,
            alphabet: format.alphabet(),
            block_len: n,
            mode,
            fec_frame_bits: self.fec_frame_bits,
            sign_source: self.sign_source,
            symbols_per_pol: self.symbols_per_polarization,
            interleaver_scope: self.interleaver_scope,
            seeds: SeedSet::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let at = |path: &str, message: String| Error::ConfigAt { path: path.into(), message };
        if self.n_list.is_empty() {
            return Err(at("n_list", "empty sweep".into()));
        }
        if self.modes.is_empty() {
            return Err(at("modes", "no modes selected".into()));
        }
        if self.formats.is_empty() {
            return Err(at("formats", "no formats selected".into()));
        }
        if self.runs == 0 {
            return Err(at("runs", "need at least one run".into()));
        }
        for (fi, &format) in self.formats.iter().enumerate() {
            for &mode in &self.modes {
                for (i, &n) in self.n_list.iter().enumerate() {
                    self.pas_config(mode, format, n).validate().map_err(|e| {
                        let path = if mode.uses_dm() { format!("n_list[{i}]") } else { format!("formats[{fi}]") };
                        at(&path, e.to_string())
                    })?;
                }
            }
        }
        match self.channel {
            ChannelModel::Fiber | ChannelModel::Linear => {
                self.wdm.validate()?;
                self.link.validate()?;
            }
            ChannelModel::Awgn { snr_db } => {
                if snr_db.is_nan() {
                    return Err(at("channel.snr_db", "not a number".into()));
                }
            }
        }
        Ok(())
    }
}

fn merge_tables(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
