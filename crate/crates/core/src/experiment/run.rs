use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use super::{ChannelModel, ExperimentSpec, FormatSpec};
use crate::dist_match::rate_loss;
use crate::error::{Error, Result};
use crate::fiber::{awgn_channel, rrc_shape, ssfm_propagate, wdm_mux, OpticalField, PropagationOptions};
use crate::field_io::SampleFile;
use crate::metrics::{bmd_rate, effective_snr, MetricReport, RunMetrics};
use crate::par::{self, Execution};
use crate::pas_codec::{compute_llrs, pas_encode, random_payload, Mode, PasConfig, SeedSet, ShapedFrame};
use crate::rx_dsp::{receive, RxChain};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub execution: Execution,
    /// Write the center channel's transmitted and received symbols here.
    pub dump_dir: Option<PathBuf>,
}

/// One (mode, format, n, run) point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub mode: Mode,
    pub format: FormatSpec,
    pub n: usize,
    pub run: usize,
}

impl Cell {
    fn tag(&self) -> String {
        format!("{}_{}_n{}_run{}", self.mode.name(), self.format.label(), self.n, self.run)
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub seed: u64,
    pub metrics: RunMetrics,
    /// Amplitude-level counts of the center channel, both polarizations.
    pub histogram: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub mode: String,
    pub qam: String,
    pub n: usize,
    pub run: String,
    pub channel_power_dbm: f64,
    pub snr_db_x: f64,
    pub snr_db_y: f64,
    pub snr_db_avg: f64,
    pub bmd_b4d: f64,
    pub rate_loss_b4d: f64,
    pub air_b4d: f64,
    pub seed: u64,
}

/// Averages over runs of one (mode, format, n).
#[derive(Debug, Clone)]
pub struct GroupSummary {
    pub mode: Mode,
    pub format: FormatSpec,
    pub n: usize,
    pub report: MetricReport,
    pub histogram: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
    pub groups: Vec<GroupSummary>,
    pub channel_power_dbm: f64,
    pub master_seed: u64,
}

impl ExperimentReport {
    pub fn group(&self, mode: Mode, format: FormatSpec, n: usize) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.mode == mode && g.format == format && g.n == n)
    }

    /// Per-run rows, each group followed by its `mean` row.
    pub fn rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        for g in &self.groups {
            for c in self.cells.iter().filter(|c| c.cell.mode == g.mode && c.cell.format == g.format && c.cell.n == g.n) {
                let db = c.metrics.snr.per_pol_db();
                rows.push(CsvRow {
                    mode: g.mode.name().into(),
                    qam: g.format.label(),
                    n: g.n,
                    run: c.cell.run.to_string(),
                    channel_power_dbm: self.channel_power_dbm,
                    snr_db_x: db[0],
                    snr_db_y: db[1],
                    snr_db_avg: c.metrics.snr.joint_db(),
                    bmd_b4d: c.metrics.bmd_b4d,
                    rate_loss_b4d: c.metrics.rate_loss_b4d,
                    air_b4d: c.metrics.air_b4d,
                    seed: c.seed,
                });
            }
            let r = &g.report;
            rows.push(CsvRow {
                mode: g.mode.name().into(),
                qam: g.format.label(),
                n: g.n,
                run: "mean".into(),
                channel_power_dbm: self.channel_power_dbm,
                snr_db_x: r.snr_db_per_pol[0],
                snr_db_y: r.snr_db_per_pol[1],
                snr_db_avg: r.snr_db,
                bmd_b4d: r.bmd_b4d,
                rate_loss_b4d: r.rate_loss_b4d,
                air_b4d: r.air_b4d,
                seed: self.master_seed,
            });
        }
        rows
    }
}

/// Seed of run `run`; independent of mode and block length so that every
/// sweep point sees the same payload, interleaver, sign and noise streams.
pub fn run_seed(master: u64, run: usize) -> u64 {
    seed::derive(master, &[run as u64])
}

fn channel_config(spec: &ExperimentSpec, cell: &Cell, run_seed: u64, channel: usize) -> PasConfig {
    let c = channel as u64;
    let mut config = spec.pas_config(cell.mode, cell.format, cell.n);
    config.seeds = SeedSet {
        data: seed::derive_stream(run_seed, Stream::Data, &[c]),
        interleavers: seed::derive_stream(run_seed, Stream::BurstInterleaver, &[c]),
        signs: seed::derive_stream(run_seed, Stream::Signs, &[c]),
    };
    config
}

fn encode_channel(spec: &ExperimentSpec, cell: &Cell, run_seed: u64, channel: usize) -> Result<ShapedFrame> {
    let config = channel_config(spec, cell, run_seed, channel);
    let payload = random_payload(&config, seed::derive_stream(run_seed, Stream::Data, &[channel as u64, 1]))?;
    pas_encode(&payload, &config)
}

fn histogram(frame: &ShapedFrame) -> Vec<u64> {
    let labeling = frame.constellation.labeling();
    let mut counts = vec![0u64; labeling.amp_levels()];
    for pol in &frame.polarizations {
        for p in &pol.points {
            for &j in p {
                counts[labeling.split(j as usize).1] += 1;
            }
        }
    }
    counts
}

/// Transmits every channel of one cell, receives the center channel and
/// scores it. `execution` applies to the per-channel transmitters.
pub fn run_cell(spec: &ExperimentSpec, cell: Cell, execution: Execution, dump_dir: Option<&Path>) -> Result<CellResult> {
    let seed = run_seed(spec.master_seed, cell.run);
    let (frame, received) = match spec.channel {
        ChannelModel::Awgn { snr_db } => {
            let center = spec.wdm.center_channel();
            let frame = encode_channel(spec, &cell, seed, center)?;
            let rx: Vec<Vec<Complex64>> = (0..2)
                .map(|p| awgn_channel(frame.symbols(p), snr_db, seed::derive_stream(seed, Stream::Awgn, &[p as u64])))
                .collect();
            (frame, rx)
        }
        ChannelModel::Fiber | ChannelModel::Linear => {
            let wdm = &spec.wdm;
            let link = if spec.channel == ChannelModel::Linear { spec.link.linear() } else { spec.link.clone() };
            let frames = par::try_map_range(execution, wdm.channel_count, |c| encode_channel(spec, &cell, seed, c))?;
            let fields = par::try_map_range(execution, wdm.channel_count, |c| {
                let f = &frames[c];
                rrc_shape(&[f.symbols(0), f.symbols(1)], wdm.rolloff, wdm.sim_oversampling, wdm.symbol_rate(), wdm.channel_power_w())
            })?;
            let tx = wdm_mux(&fields, wdm)?;
            drop(fields);
            let options = PropagationOptions::new(seed::derive_stream(seed, Stream::Ase, &[]));
            let out: OpticalField = ssfm_propagate(&tx, &link, &options)?;
            drop(tx);
            let frame = frames.into_iter().nth(wdm.center_channel()).expect("center channel exists");
            let rx = receive(&out, &RxChain::for_link(wdm, &link), &[frame.symbols(0), frame.symbols(1)])?;
            (frame, rx.symbols)
        }
    };
    let metrics = score(spec, &cell, &frame, &received)?;
    if let Some(dir) = dump_dir {
        let hash = spec.config_hash();
        let tag = cell.tag();
        SampleFile::from_frame(&frame, hash).save(&dir.join(format!("{tag}_tx.pasf")))?;
        SampleFile::from_symbols(&received, hash).save(&dir.join(format!("{tag}_rx.pasf")))?;
    }
    Ok(CellResult { cell, seed, metrics, histogram: histogram(&frame) })
}

fn score(spec: &ExperimentSpec, cell: &Cell, frame: &ShapedFrame, received: &[Vec<Complex64>]) -> Result<RunMetrics> {
    let tx: Vec<&[Complex64]> = (0..2).map(|p| frame.symbols(p)).collect();
    let rx: Vec<&[Complex64]> = received.iter().map(|v| v.as_slice()).collect();
    let snr = effective_snr(&tx, &rx)?;

    let constellation = &frame.constellation;
    let points: Vec<_> = frame.polarizations.iter().map(|p| p.points.clone()).collect();
    let points = frame.deinterleave_symbols(&points)?;
    let received = frame.deinterleave_symbols(received)?;
    let mut llrs = Vec::new();
    let mut bits = Vec::new();
    for (y, pts) in received.iter().zip(&points) {
        llrs.extend(compute_llrs(y, snr.joint_mse, constellation)?);
        bits.extend(constellation.symbol_bits(pts));
    }
    let bmd = bmd_rate(&llrs, &bits, constellation.bits_per_symbol(), constellation.symbol_entropy())?;

    let config = spec.pas_config(cell.mode, cell.format, cell.n);
    let loss = rate_loss(&config.alphabet, &config.composition()?);
    Ok(RunMetrics::new(snr, bmd, loss))
}

/// Runs every cell of `spec`. Cells are the unit of parallelism; results
/// are collected in a fixed order, so the report does not depend on the
/// execution policy.
pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<ExperimentReport> {
    spec.validate()?;
    if let Some(dir) = &options.dump_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut cells = Vec::new();
    for &mode in &spec.modes {
        for &format in &spec.formats {
            for &n in &spec.n_list {
                for run in 0..spec.runs {
                    cells.push(Cell { mode, format, n, run });
                }
            }
        }
    }
    // one level of parallelism is enough; channels run sequentially inside
    let results = par::try_map_range(options.execution, cells.len(), |i| {
        run_cell(spec, cells[i], Execution::Sequential, options.dump_dir.as_deref())
    })?;

    let groups = results
        .chunks(spec.runs)
        .map(|chunk| {
            let c = chunk[0].cell;
            let runs: Vec<RunMetrics> = chunk.iter().map(|r| r.metrics.clone()).collect();
            let mut histogram = vec![0u64; chunk[0].histogram.len()];
            for r in chunk {
                for (h, v) in histogram.iter_mut().zip(&r.histogram) {
                    *h += v;
                }
            }
            GroupSummary {
                mode: c.mode,
                format: c.format,
                n: c.n,
                report: MetricReport::average(&runs).expect("runs >= 1"),
                histogram,
            }
        })
        .collect();
    Ok(ExperimentReport {
        cells: results,
        groups,
        channel_power_dbm: spec.wdm.per_channel_power_dbm,
        master_seed: spec.master_seed,
    })
}

pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in report.rows() {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    mode: &'a str,
    qam: String,
    n: usize,
    level: usize,
    count: u64,
    fraction: f64,
}

/// Amplitude histograms of the center channel, summed over runs.
pub fn write_histograms<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for g in &report.groups {
        let total: u64 = g.histogram.iter().sum();
        for (level, &count) in g.histogram.iter().enumerate() {
            w.serialize(HistogramRow {
                mode: g.mode.name(),
                qam: g.format.label(),
                n: g.n,
                level,
                count,
                fraction: count as f64 / total as f64,
            })?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
