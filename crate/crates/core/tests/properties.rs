use pas_core::dist_match::{
    ccdm_decode, ccdm_encode, histogram, multinomial, quantize_composition, rate_loss, AmplitudeAlphabet,
    Composition,
};
use pas_core::fiber::awgn_channel;
use pas_core::metrics::bmd_rate;
use pas_core::pas_codec::{compute_llrs, Constellation};
use proptest::prelude::*;
use rand::Rng;

fn composition() -> impl Strategy<Value = Composition> {
    prop::collection::vec(0u32..7, 2..5)
        .prop_filter("need two codewords", |c| multinomial(c) >= 2u32.into())
        .prop_map(|c| Composition::new(c).unwrap())
}

fn word(k: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), k)
}

proptest! {
    #[test]
    fn encode_hits_composition_and_decodes(
        (comp, bits) in composition().prop_flat_map(|c| { let k = c.k(); (Just(c), word(k)) })
    ) {
        let block = ccdm_encode(&bits, &comp).unwrap();
        prop_assert_eq!(histogram(&block.symbols, comp.counts().len()), comp.counts().to_vec());
        prop_assert_eq!(ccdm_decode(&block.symbols, &comp).unwrap(), bits);
    }

    #[test]
    fn encoder_is_order_preserving(
        (comp, a, b) in composition().prop_flat_map(|c| { let k = c.k(); (Just(c), word(k), word(k)) })
    ) {
        let sa = ccdm_encode(&a, &comp).unwrap().symbols;
        let sb = ccdm_encode(&b, &comp).unwrap().symbols;
        prop_assert_eq!(a.cmp(&b), sa.cmp(&sb));
    }

    #[test]
    fn long_blocks_round_trip(n in prop::sample::select(vec![500usize, 2000, 5000]), seed in any::<u64>()) {
        let comp = quantize_composition(&AmplitudeAlphabet::shaped_64qam(), n).unwrap();
        let mut rng = pas_core::seed::rng(seed);
        let bits: Vec<bool> = (0..comp.k()).map(|_| rng.random()).collect();
        let block = ccdm_encode(&bits, &comp).unwrap();
        prop_assert_eq!(ccdm_decode(&block.symbols, &comp).unwrap(), bits);
    }

    #[test]
    fn quantized_composition_sums_to_n(n in 1usize..3000, p in 0.05f64..0.95) {
        let alphabet = AmplitudeAlphabet::odd_levels(vec![p, 1.0 - p]).unwrap();
        let comp = quantize_composition(&alphabet, n).unwrap();
        prop_assert_eq!(comp.n(), n);
        prop_assert!(comp.k() as f64 <= n as f64 * alphabet.entropy() + 1e-9);
        prop_assert!(rate_loss(&alphabet, &comp) > -1e-9);
    }
}

/// Bit-level mutual information of Gray-labeled uniform 4-ASK at per-dimension
/// noise variance `s2`, by trapezoidal integration over a fine grid.
fn ask4_bitwise_mi(points: [f64; 4], labels: [[bool; 2]; 4], s2: f64) -> f64 {
    let pdf = |y: f64, x: f64| (-(y - x).powi(2) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
    let span = points[3] + 12.0 * s2.sqrt();
    let steps = 200_000;
    let dy = 2.0 * span / steps as f64;
    let mut mi = 0.0;
    for bit in 0..2 {
        let mut acc = 0.0;
        for i in 0..=steps {
            let y = -span + i as f64 * dy;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let all: f64 = points.iter().map(|&x| pdf(y, x)).sum::<f64>() / 4.0;
            for c in [false, true] {
                let given: f64 = points
                    .iter()
                    .zip(&labels)
                    .filter(|(_, l)| l[bit] == c)
                    .map(|(&x, _)| pdf(y, x))
                    .sum::<f64>()
                    / 2.0;
                if given > 0.0 {
                    acc += w * 0.5 * given * (given / all).log2();
                }
            }
        }
        mi += acc * dy;
    }
    mi
}

#[test]
fn bmd_rate_matches_integration_oracle() {
    let c = Constellation::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap();
    let snr_db = 10.0;
    let s2 = 10f64.powf(-snr_db / 10.0) / 2.0;
    let points: [f64; 4] = std::array::from_fn(|j| c.points()[j]);
    let labels: [[bool; 2]; 4] = std::array::from_fn(|j| [c.labeling().bit(j, 0), c.labeling().bit(j, 1)]);
    let oracle = 2.0 * ask4_bitwise_mi(points, labels, s2);

    let mut rng = pas_core::seed::rng(5);
    let pts: Vec<[u8; 2]> = (0..1_000_000).map(|_| [rng.random_range(0..4), rng.random_range(0..4)]).collect();
    let x: Vec<_> = pts.iter().map(|&p| c.symbol(p)).collect();
    let y = awgn_channel(&x, snr_db, 6);
    let llrs = compute_llrs(&y, 2.0 * s2, &c).unwrap();
    let bmd = bmd_rate(&llrs, &c.symbol_bits(&pts), 4, c.symbol_entropy()).unwrap();
    assert!((bmd - oracle).abs() < 0.01, "monte carlo {bmd}, oracle {oracle}");
}

#[test]
fn shaped_distributions_have_decreasing_rate_loss() {
    for alphabet in [AmplitudeAlphabet::shaped_16qam(), AmplitudeAlphabet::shaped_64qam()] {
        let losses: Vec<f64> = pas_core::experiment::DEFAULT_N_LIST
            .iter()
            .map(|&n| rate_loss(&alphabet, &quantize_composition(&alphabet, n).unwrap()))
            .collect();
        assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
    }
}
