use pas_core::dist_match::AmplitudeAlphabet;
use pas_core::experiment::{run_experiment, write_csv, ChannelModel, ExperimentSpec, RunOptions};
use pas_core::fiber::awgn_channel;
use pas_core::par::Execution;
use pas_core::pas_codec::{pas_decode, pas_encode, random_payload, Mode, PasConfig, QamOrder, SignSource};
use pas_core::Complex64;

#[test]
fn awgn_30db_16qam_decodes_100_frames_error_free() {
    let mut cfg = PasConfig::new(QamOrder::Qam16, AmplitudeAlphabet::shaped_16qam(), 100, Mode::EndToEndInterleaved, 0);
    // 100 frames of 64800 bits over both polarizations
    cfg.symbols_per_pol = 50 * 64_800 / 4;
    cfg.fec_frame_bits = 64_800;
    let payload = random_payload(&cfg, 11).unwrap();
    let frame = pas_encode(&payload, &cfg).unwrap();
    let rx: Vec<Vec<Complex64>> = (0..2).map(|p| awgn_channel(frame.symbols(p), 30.0, 20 + p as u64)).collect();
    let out = pas_decode(&rx, &frame, &cfg, Some(1e-3)).unwrap();
    assert_eq!(out.composition_mismatches, 0);
    assert_eq!(out.out_of_image, 0);
    assert_eq!(out.bits, payload);
}

fn csv_bytes(spec: &ExperimentSpec, execution: Execution) -> Vec<u8> {
    let report = run_experiment(spec, &RunOptions { execution, dump_dir: None }).unwrap();
    let mut buf = Vec::new();
    write_csv(&report, &mut buf).unwrap();
    buf
}

#[test]
fn csv_is_identical_across_execution_policies() {
    let mut spec = ExperimentSpec::desk();
    spec.channel = ChannelModel::Linear;
    spec.symbols_per_polarization = 1500;
    spec.fec_frame_bits = 3000;
    spec.n_list = vec![10, 50];
    spec.modes = vec![Mode::EndToEnd, Mode::EndToEndInterleaved, Mode::Emulation];
    spec.runs = 2;
    let seq = csv_bytes(&spec, Execution::Sequential);
    assert_eq!(seq, csv_bytes(&spec, Execution::Parallel));
    assert_eq!(seq, csv_bytes(&spec, Execution::Parallel));
    spec.master_seed += 1;
    assert_ne!(seq, csv_bytes(&spec, Execution::Sequential));
}

#[test]
fn sign_sources_are_indistinguishable_on_linear_channel() {
    let mut spec = ExperimentSpec::desk();
    spec.channel = ChannelModel::Linear;
    spec.n_list = vec![10];
    spec.runs = 2;
    let snr = |source| {
        let mut s = spec.clone();
        s.sign_source = source;
        let report = run_experiment(&s, &RunOptions::default()).unwrap();
        report.groups[0].report.snr_db
    };
    let surrogate = snr(SignSource::SystematicParitySurrogate);
    let uniform = snr(SignSource::UniformRandom);
    assert!((surrogate - uniform).abs() < 0.05, "{surrogate} vs {uniform}");
}
