use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::seed;

/// Adds circular Gaussian noise of variance `10^(-snr_db/10)` per complex
/// sample. An infinite SNR returns the input unchanged.
pub fn awgn_channel(symbols: &[Complex64], snr_db: f64, seed: u64) -> Vec<Complex64> {
    if snr_db == f64::INFINITY {
        return symbols.to_vec();
    }
    let sigma = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let mut rng = seed::rng(seed);
    symbols
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(sigma * re, sigma * im)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_snr_matches_setting() {
        let x: Vec<Complex64> = (0..1_000_000)
            .map(|i| Complex64::from_polar(1.0, i as f64 * 0.7))
            .collect();
        let y = awgn_channel(&x, 14.0, 3);
        let mse = x.iter().zip(&y).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>() / x.len() as f64;
        let snr = -10.0 * mse.log10();
        assert!((snr - 14.0).abs() < 0.05, "{snr}");
        assert_eq!(awgn_channel(&x[..100], 14.0, 3), y[..100].to_vec());
        assert_eq!(awgn_channel(&x[..100], f64::INFINITY, 3), x[..100].to_vec());
    }
}
