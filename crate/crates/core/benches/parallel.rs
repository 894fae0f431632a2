use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pas_core::dist_match::{ccdm_encode, quantize_composition, AmplitudeAlphabet};
use pas_core::experiment::{run_experiment, ChannelModel, ExperimentSpec, RunOptions};
use pas_core::par::{self, Execution};
use pas_core::pas_codec::Mode;
use rand::Rng;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ccdm_blocks(c: &mut Criterion) {
    let alphabet = AmplitudeAlphabet::shaped_64qam();
    let mut group = c.benchmark_group("ccdm_encode_blocks");
    for n in [100usize, 1000] {
        let comp = quantize_composition(&alphabet, n).unwrap();
        let mut rng = pas_core::seed::rng(n as u64);
        let words: Vec<Vec<bool>> = (0..256).map(|_| (0..comp.k()).map(|_| rng.random()).collect()).collect();
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| par::map_range(exec, words.len(), |i| ccdm_encode(&words[i], &comp).unwrap()))
            });
        }
    }
    group.finish();
}

fn awgn_sweep(c: &mut Criterion) {
    let mut spec = ExperimentSpec::desk();
    spec.channel = ChannelModel::Awgn { snr_db: 15.0 };
    spec.modes = vec![Mode::EndToEnd];
    spec.symbols_per_polarization = 5000;
    spec.fec_frame_bits = 6000;
    spec.n_list = vec![10, 100, 1000];
    spec.runs = 2;
    let mut group = c.benchmark_group("awgn_sweep");
    group.sample_size(10);
    for (name, execution) in POLICIES {
        let options = RunOptions { execution, dump_dir: None };
        group.bench_function(name, |b| b.iter(|| run_experiment(&spec, &options).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, ccdm_blocks, awgn_sweep);
criterion_main!(benches);
