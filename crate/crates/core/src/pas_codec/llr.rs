//! Bit-wise soft demapping and hard decisions.
//!
//! The demapper assumes an auxiliary circular Gaussian channel with variance
//! `sigma2` per complex symbol. The square-QAM constellation and its prior
//! are products of two identical ASK factors, so each dimension is demapped
//! on its own with the metric `-(y - x)^2 / sigma2`.

use num_complex::Complex64;

use super::labeling::GrayLabeling;
use crate::dist_match::entropy_bits;
use crate::error::{Error, Result};

/// Unit-energy square QAM built from ASK amplitudes and their probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    labeling: GrayLabeling,
    points: Vec<f64>,
    priors: Vec<f64>,
    log_priors: Vec<f64>,
    scale: f64,
}

impl Constellation {
    /// `levels` are the positive amplitudes, `amp_probs` their probabilities.
    pub fn new(levels: &[f64], amp_probs: &[f64]) -> Result<Self> {
        if levels.len() != amp_probs.len() {
            return Err(Error::LengthMismatch(levels.len(), amp_probs.len()));
        }
        let labeling = GrayLabeling::new(levels.len())?;
        let dim_energy: f64 = levels.iter().zip(amp_probs).map(|(l, p)| l * l * p).sum();
        let scale = 1.0 / (2.0 * dim_energy).sqrt();
        let l = levels.len();
        let mut points = vec![0.0; 2 * l];
        let mut priors = vec![0.0; 2 * l];
        for j in 0..2 * l {
            let (positive, amp) = labeling.split(j);
            let v = levels[amp] * scale;
            points[j] = if positive { v } else { -v };
            priors[j] = amp_probs[amp] / 2.0;
        }
        let log_priors = priors.iter().map(|p| p.ln()).collect();
        Ok(Self { labeling, points, priors, log_priors, scale })
    }

    pub fn labeling(&self) -> &GrayLabeling {
        &self.labeling
    }

    /// Normalized ASK values by point index.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Per-dimension point probabilities.
    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Factor mapping raw amplitude levels to the unit-energy constellation.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Bits per complex symbol.
    pub fn bits_per_symbol(&self) -> usize {
        2 * self.labeling.bits_per_dim()
    }

    /// Entropy of the complex symbol distribution, in bits.
    pub fn symbol_entropy(&self) -> f64 {
        2.0 * entropy_bits(&self.priors)
    }

    /// Mean energy under the priors (1 by construction).
    pub fn mean_energy(&self) -> f64 {
        2.0 * self.points.iter().zip(&self.priors).map(|(x, p)| x * x * p).sum::<f64>()
    }

    pub fn symbol(&self, point: [u8; 2]) -> Complex64 {
        Complex64::new(self.points[point[0] as usize], self.points[point[1] as usize])
    }

    /// The `m` label bits of a complex symbol, I dimension first.
    pub fn push_symbol_bits(&self, point: [u8; 2], out: &mut Vec<bool>) {
        let b = self.labeling.bits_per_dim();
        for &j in &point {
            for t in 0..b {
                out.push(self.labeling.bit(j as usize, t));
            }
        }
    }

    pub fn symbol_bits(&self, points: &[[u8; 2]]) -> Vec<bool> {
        let mut out = Vec::with_capacity(points.len() * self.bits_per_symbol());
        for &p in points {
            self.push_symbol_bits(p, &mut out);
        }
        out
    }
}

fn log_sum_exp(max: f64, terms: impl Iterator<Item = f64>) -> f64 {
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Per-bit LLRs `ln P(c=0|y) / P(c=1|y)`, `m` values per symbol in label
/// order.
pub fn compute_llrs(
    received: &[Complex64],
    noise_variance: f64,
    constellation: &Constellation,
) -> Result<Vec<f64>> {
    if noise_variance.is_nan() || noise_variance <= 0.0 {
        return Err(Error::NoiseVariance(noise_variance));
    }
    let b = constellation.labeling.bits_per_dim();
    let npts = constellation.points.len();
    let mut out = Vec::with_capacity(received.len() * 2 * b);
    let mut metric = vec![0.0; npts];
    for y in received {
        for v in [y.re, y.im] {
            for (j, m) in metric.iter_mut().enumerate() {
                let d = v - constellation.points[j];
                *m = constellation.log_priors[j] - d * d / noise_variance;
            }
            for t in 0..b {
                let (mut max0, mut max1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (j, &m) in metric.iter().enumerate() {
                    if constellation.labeling.bit(j, t) {
                        max1 = max1.max(m);
                    } else {
                        max0 = max0.max(m);
                    }
                }
                let lse0 = log_sum_exp(
                    max0,
                    (0..npts).filter(|&j| !constellation.labeling.bit(j, t)).map(|j| metric[j]),
                );
                let lse1 = log_sum_exp(
                    max1,
                    (0..npts).filter(|&j| constellation.labeling.bit(j, t)).map(|j| metric[j]),
                );
                out.push(lse0 - lse1);
            }
        }
    }
    Ok(out)
}

/// Symbol decisions: MAP under the priors when a noise variance is given,
/// nearest point otherwise.
pub fn hard_decisions(
    received: &[Complex64],
    noise_variance: Option<f64>,
    constellation: &Constellation,
) -> Vec<[u8; 2]> {
    let decide = |v: f64| -> u8 {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (j, &x) in constellation.points.iter().enumerate() {
            let d = v - x;
            let m = match noise_variance {
                Some(s2) => constellation.log_priors[j] - d * d / s2,
                None => -d * d,
            };
            if m > best.0 {
                best = (m, j);
            }
        }
        best.1 as u8
    };
    received.iter().map(|y| [decide(y.re), decide(y.im)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform16() -> Constellation {
        Constellation::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn unit_energy() {
        let c = Constellation::new(&[1.0, 3.0, 5.0, 7.0], &[0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!((c.mean_energy() - 1.0).abs() < 1e-12);
        assert_eq!(c.bits_per_symbol(), 6);
        assert!((uniform16().symbol_entropy() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_llrs_reproduce_labels() {
        let c = uniform16();
        for i in 0..4u8 {
            for q in 0..4u8 {
                let y = c.symbol([i, q]);
                let llrs = compute_llrs(&[y], 1e-3, &c).unwrap();
                let bits = c.symbol_bits(&[[i, q]]);
                for (l, bit) in llrs.iter().zip(bits) {
                    assert!(l.abs() > 20.0);
                    assert_eq!(*l < 0.0, bit);
                }
            }
        }
    }

    #[test]
    fn sign_llr_vanishes_at_origin() {
        let llrs = compute_llrs(&[Complex64::new(0.0, 0.0)], 0.1, &uniform16()).unwrap();
        assert_eq!(llrs[0], 0.0);
        assert_eq!(llrs[2], 0.0);
    }

    #[test]
    fn priors_shift_amplitude_llr() {
        let uniform = uniform16();
        let shaped = Constellation::new(&[1.0, 3.0], &[0.7, 0.3]).unwrap();
        for (c, expect_shift) in [(&uniform, 0.0), (&shaped, (0.7f64 / 0.3).ln())] {
            // midpoint between amplitude 1 and amplitude 3, in each constellation's scale
            let y = Complex64::new(2.0 * c.scale(), 0.0);
            let sigma2 = 0.05;
            let llr = compute_llrs(&[y], sigma2, c).unwrap()[1];
            // same point, same noise, uniform-prior reference in the same scale
            let reference = Constellation {
                log_priors: vec![(0.25f64).ln(); 4],
                ..(*c).clone()
            };
            let base = compute_llrs(&[y], sigma2, &reference).unwrap()[1];
            // amp bit is 1 for amplitude 1 under this labeling, hence the sign
            assert_eq!(c.labeling().amp_label(0), 1);
            assert!(((base - llr) - expect_shift).abs() < 1e-12, "{base} {llr}");
        }
    }

    #[test]
    fn bad_variance() {
        assert!(compute_llrs(&[], 0.0, &uniform16()).is_err());
        assert!(compute_llrs(&[], -1.0, &uniform16()).is_err());
    }

    #[test]
    fn decisions() {
        let c = uniform16();
        let y = c.symbol([3, 1]) + Complex64::new(0.05, -0.05);
        assert_eq!(hard_decisions(&[y], None, &c), vec![[3, 1]]);
        assert_eq!(hard_decisions(&[y], Some(0.01), &c), vec![[3, 1]]);
    }
}
