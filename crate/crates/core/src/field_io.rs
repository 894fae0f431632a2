//! Binary sample files for symbol frames and field snapshots.
//!
//! Layout, all little endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `PASF`                              |
//! | 2     | format version (1)                        |
//! | 2     | polarization count `P`                    |
//! | 8     | config hash (u64)                         |
//! | 8     | sample rate in Hz (f64, 0 = symbol-spaced) |
//! | 8     | center frequency in Hz (f64)              |
//! | 8     | samples per polarization `N` (u64)        |
//! | 16·N·P | per polarization, `N` pairs of f64 (I, Q) |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fiber::OpticalField;
use crate::pas_codec::ShapedFrame;

const MAGIC: &[u8; 4] = b"PASF";
const VERSION: u16 = 1;

/// First eight bytes of the SHA-256 of a configuration's canonical text.
pub fn config_hash(canonical: &str) -> u64 {
    let digest = Sha256::digest(canonical.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFile {
    pub config_hash: u64,
    pub sample_rate: f64,
    pub center_frequency: f64,
    pub polarizations: Vec<Vec<Complex64>>,
}

impl SampleFile {
    pub fn from_frame(frame: &ShapedFrame, config_hash: u64) -> Self {
        Self {
            config_hash,
            sample_rate: 0.0,
            center_frequency: 0.0,
            polarizations: frame.polarizations.iter().map(|p| p.symbols.clone()).collect(),
        }
    }

    pub fn from_symbols(symbols: &[Vec<Complex64>], config_hash: u64) -> Self {
        Self { config_hash, sample_rate: 0.0, center_frequency: 0.0, polarizations: symbols.to_vec() }
    }

    pub fn from_field(field: &OpticalField, config_hash: u64) -> Self {
        Self {
            config_hash,
            sample_rate: field.sample_rate,
            center_frequency: field.center_frequency,
            polarizations: vec![field.x.clone(), field.y.clone()],
        }
    }

    pub fn into_field(self) -> Result<OpticalField> {
        if self.polarizations.len() != 2 {
            return Err(Error::Format(format!(
                "a field needs 2 polarizations, file has {}",
                self.polarizations.len()
            )));
        }
        if self.sample_rate <= 0.0 {
            return Err(Error::Format("symbol-spaced file has no sample rate".into()));
        }
        let mut pols = self.polarizations.into_iter();
        let mut field = OpticalField::new(pols.next().unwrap(), pols.next().unwrap(), self.sample_rate)?;
        field.center_frequency = self.center_frequency;
        Ok(field)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let count = self.polarizations.first().map_or(0, Vec::len);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.polarizations.len() as u16).to_le_bytes())?;
        w.write_all(&self.config_hash.to_le_bytes())?;
        w.write_all(&self.sample_rate.to_le_bytes())?;
        w.write_all(&self.center_frequency.to_le_bytes())?;
        w.write_all(&(count as u64).to_le_bytes())?;
        for pol in &self.polarizations {
            for s in pol {
                w.write_all(&s.re.to_le_bytes())?;
                w.write_all(&s.im.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut b2 = [0u8; 2];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b2).map_err(io)?;
        let version = u16::from_le_bytes(b2);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        r.read_exact(&mut b2).map_err(io)?;
        let pols = u16::from_le_bytes(b2) as usize;
        r.read_exact(&mut b8).map_err(io)?;
        let config_hash = u64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        let sample_rate = f64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        let center_frequency = f64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut polarizations = Vec::with_capacity(pols);
        let mut buf = [0u8; 16];
        for _ in 0..pols {
            let mut samples = Vec::with_capacity(count);
            for _ in 0..count {
                r.read_exact(&mut buf).map_err(io)?;
                let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
                let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
                samples.push(Complex64::new(re, im));
            }
            polarizations.push(samples);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(io)? != 0 {
            return Err(Error::Format("trailing bytes after the last sample".into()));
        }
        Ok(Self { config_hash, sample_rate, center_frequency, polarizations })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(f)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let f = SampleFile {
            config_hash: 0x0102_0304_0506_0708,
            sample_rate: 252e9,
            center_frequency: 0.0,
            polarizations: vec![vec![Complex64::new(1.0, -2.0)], vec![Complex64::new(0.5, 0.25)]],
        };
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 40 + 2 * 16);
        assert_eq!(&bytes[..4], b"PASF");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..8], &[2, 0]);
        assert_eq!(&bytes[8..16], &[8, 7, 6, 5, 4, 3, 2, 1]);
        assert_eq!(&bytes[32..40], &1u64.to_le_bytes());
        assert_eq!(&bytes[40..48], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[48..56], &(-2.0f64).to_le_bytes());
        let field = SampleFile::read_from(&bytes[..]).unwrap().into_field().unwrap();
        assert_eq!(field.sample_rate, 252e9);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(SampleFile::read_from(&b"NOPE"[..]).is_err());
        let f = SampleFile::from_symbols(&[vec![Complex64::new(1.0, 0.0); 3]], 1);
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        assert!(SampleFile::read_from(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(SampleFile::read_from(&bytes[..]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(hash: u64, pols in 1usize..3, samples in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..50)) {
            let data: Vec<Complex64> = samples.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let f = SampleFile { config_hash: hash, sample_rate: 1e9, center_frequency: 3.0, polarizations: vec![data; pols] };
            let mut bytes = Vec::new();
            f.write_to(&mut bytes).unwrap();
            prop_assert_eq!(SampleFile::read_from(&bytes[..]).unwrap(), f);
        }
    }
}
