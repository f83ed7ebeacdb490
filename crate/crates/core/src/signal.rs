//! Pulse, noise, and window generation.
//!
//! An *event* is one simulated stretch of receiver output: a noise stream of
//! length `H + max_shift`, with the pulse (if present) starting `max_shift`
//! samples in. The shift-`D` processing window is the slice starting at
//! `max_shift − D`, so it sees `D` leading noise samples and loses the last
//! `D` pulse samples off its tail. All window views of one event share the
//! same noise realization, which is what makes margins across shifts
//! correlated rather than independent.

use crate::error::{Result, WavedetError};
use crate::rng::{substream, DOMAIN_NOISE_EVENT, DOMAIN_PULSE_EVENT};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const DATASET_SCHEMA: &str = "wavedet-dataset/1";

/// Deterministic linear chirp definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// N, number of pulse samples; must be a power of two.
    pub n_samples: usize,
    /// Start of the sweep, cycles/sample.
    pub f_start: f64,
    /// End of the sweep, cycles/sample.
    pub f_end: f64,
    /// Phase at n = 0, radians.
    pub initial_phase: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_start > 0.0 && self.f_start < self.f_end && self.f_end < 0.5) {
            return Err(WavedetError::Parameter(format!(
                "need 0 < f_start < f_end < 0.5, got f_start={} f_end={}",
                self.f_start, self.f_end
            )));
        }
        if self.n_samples == 0 || !self.n_samples.is_power_of_two() {
            return Err(WavedetError::Parameter(format!(
                "n_samples must be a power of two, got {}",
                self.n_samples
            )));
        }
        if !self.initial_phase.is_finite() {
            return Err(WavedetError::Parameter("initial_phase must be finite".into()));
        }
        Ok(())
    }
}

impl Default for PulseSpec {
    /// The sweep enters the level-4 detail band mid-pulse and stays inside
    /// it through the tail, so truncating the tail costs band energy and the
    /// complete-pulse window is the strongest projection.
    fn default() -> Self {
        PulseSpec {
            n_samples: 1024,
            f_start: 0.005,
            f_end: 0.0575,
            initial_phase: 0.1,
        }
    }
}

/// White Gaussian noise description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(WavedetError::Parameter(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { sigma: 1.0, seed: 1729 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Pulse,
    NoiseOnly,
}

/// Which stage of the pipeline a dataset row belongs to. The four sets are
/// disjoint by construction; training code additionally asserts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    BankTrain,
    IntegratorTrain,
    Calibration,
    Test,
}

/// Geometry and labeling of one processing window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// H, window length in samples (H = N regime).
    pub window_len: usize,
    /// D, how many samples of the pulse tail fall outside the window.
    pub shift: usize,
    /// Event SNR in dB; `-inf` for noise-only windows (amplitude 0).
    pub snr_db: f64,
    pub label: Label,
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.shift >= self.window_len {
            return Err(WavedetError::Parameter(format!(
                "shift {} must be < window_len {}",
                self.shift, self.window_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowObservation {
    pub samples: Vec<f64>,
    pub spec: WindowSpec,
}

/// s(n) = sin(φ0 + 2π·(f_start·n + (f_end − f_start)·n²/(2N))), n = 0..N−1.
pub fn generate_chirp(spec: &PulseSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n_samples as f64;
    let df = spec.f_end - spec.f_start;
    Ok((0..spec.n_samples)
        .map(|i| {
            let t = i as f64;
            (spec.initial_phase
                + std::f64::consts::TAU * (spec.f_start * t + df * t * t / (2.0 * n)))
                .sin()
        })
        .collect())
}

/// i.i.d. N(0, sigma²) samples, reproducible from the spec seed.
pub fn generate_awgn(count: usize, noise: &NoiseSpec) -> Result<Vec<f64>> {
    noise.validate()?;
    if count == 0 {
        return Err(WavedetError::Parameter("count must be > 0".into()));
    }
    let mut rng = substream(noise.seed, crate::rng::DOMAIN_GENERIC, 0);
    let mut out = vec![0.0; count];
    awgn_into(&mut rng, noise.sigma, &mut out);
    Ok(out)
}

/// Fill `out` with N(0, sigma²) draws from an explicit generator.
pub fn awgn_into<R: Rng>(rng: &mut R, sigma: f64, out: &mut [f64]) {
    let normal = Normal::new(0.0, sigma).expect("sigma validated by caller");
    for v in out.iter_mut() {
        *v = normal.sample(rng);
    }
}

/// Amplitude A with 10·log10(A²·meansq(pulse)/σ²) = snr_db.
pub fn snr_amplitude(snr_db: f64, pulse: &[f64], sigma: f64) -> Result<f64> {
    let meansq = pulse.iter().map(|x| x * x).sum::<f64>() / pulse.len().max(1) as f64;
    if !(meansq > 0.0) {
        return Err(WavedetError::Parameter(
            "degenerate input: pulse has zero mean-square power".into(),
        ));
    }
    if snr_db == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok(sigma * 10f64.powf(snr_db / 20.0) / meansq.sqrt())
}

/// Build one window directly: `D` leading noise samples, then the
/// amplitude-scaled pulse (tail-truncated by `D`) plus noise; or pure noise.
pub fn assemble_window<R: Rng>(
    pulse: &[f64],
    spec: &WindowSpec,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<WindowObservation> {
    noise.validate()?;
    spec.validate()?;
    if spec.window_len != pulse.len() {
        return Err(WavedetError::Parameter(format!(
            "window_len {} must equal pulse length {} (H = N regime)",
            spec.window_len,
            pulse.len()
        )));
    }
    let h = spec.window_len;
    let d = spec.shift;
    let mut samples = vec![0.0; h];
    awgn_into(rng, noise.sigma, &mut samples);
    if spec.label == Label::Pulse {
        let a = snr_amplitude(spec.snr_db, pulse, noise.sigma)?;
        for (w, p) in samples[d..].iter_mut().zip(pulse[..h - d].iter()) {
            *w += a * p;
        }
    }
    Ok(WindowObservation {
        samples,
        spec: spec.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMeta {
    pub index: usize,
    pub label: Label,
    /// None for noise-only rows.
    pub snr_db: Option<f64>,
    pub partition: Partition,
}

/// Sidecar metadata for a dataset file pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema: String,
    pub pulse: PulseSpec,
    pub sigma: f64,
    pub seed: u64,
    pub window_len: usize,
    pub shifts: Vec<usize>,
    pub stream_len: usize,
    pub rows: Vec<RowMeta>,
}

/// Event-stream dataset: one row per event, windows sliced on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub streams: Vec<Vec<f64>>,
}

/// How many events of each class go to each pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetCounts {
    pub pulse_bank: usize,
    pub pulse_integrator: usize,
    pub pulse_test: usize,
    pub noise_bank: usize,
    pub noise_integrator: usize,
    pub noise_calibration: usize,
    pub noise_test: usize,
}

impl DatasetCounts {
    pub fn total_pulse(&self) -> usize {
        self.pulse_bank + self.pulse_integrator + self.pulse_test
    }
    pub fn total_noise(&self) -> usize {
        self.noise_bank + self.noise_integrator + self.noise_calibration + self.noise_test
    }
}

impl Default for DatasetCounts {
    fn default() -> Self {
        DatasetCounts {
            pulse_bank: 6000,
            pulse_integrator: 4000,
            pulse_test: 2000,
            noise_bank: 6000,
            noise_integrator: 4000,
            noise_calibration: 20000,
            noise_test: 20000,
        }
    }
}

impl Dataset {
    pub fn max_shift(&self) -> usize {
        *self.meta.shifts.last().unwrap_or(&0)
    }

    pub fn stream(&self, row: usize) -> &[f64] {
        &self.streams[row]
    }

    /// Slice of the shift-`d` window of `row` (no copy).
    pub fn window_view(&self, row: usize, d: usize) -> Result<&[f64]> {
        let h = self.meta.window_len;
        let dm = self.max_shift();
        if d > dm {
            return Err(WavedetError::Parameter(format!(
                "shift {d} exceeds dataset max shift {dm}"
            )));
        }
        let start = dm - d;
        Ok(&self.streams[row][start..start + h])
    }

    /// Materialize the shift-`d` window of `row` with its spec.
    pub fn window_observation(&self, row: usize, d: usize) -> Result<WindowObservation> {
        let samples = self.window_view(row, d)?.to_vec();
        let meta = &self.meta.rows[row];
        Ok(WindowObservation {
            samples,
            spec: WindowSpec {
                window_len: self.meta.window_len,
                shift: d,
                snr_db: meta.snr_db.unwrap_or(f64::NEG_INFINITY),
                label: meta.label,
            },
        })
    }

    /// The M aligned window views of one event, in shift order.
    pub fn window_group(&self, row: usize) -> Result<Vec<WindowObservation>> {
        self.meta
            .shifts
            .clone()
            .into_iter()
            .map(|d| self.window_observation(row, d))
            .collect()
    }

    pub fn rows_in(&self, partition: Partition) -> Vec<usize> {
        self.meta
            .rows
            .iter()
            .filter(|r| r.partition == partition)
            .map(|r| r.index)
            .collect()
    }
}

fn build_stream(
    pulse: &[f64],
    amplitude: f64,
    sigma: f64,
    stream_len: usize,
    pulse_start: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let mut s = vec![0.0; stream_len];
    awgn_into(rng, sigma, &mut s);
    if amplitude != 0.0 {
        for (v, p) in s[pulse_start..].iter_mut().zip(pulse.iter()) {
            *v += amplitude * p;
        }
    }
    s
}

/// Generate a labeled, partitioned event dataset. Each row derives its own
/// generator from `(seed, class domain, ordinal)`, so the result does not
/// depend on construction order and is bit-identical across runs.
pub fn build_dataset(
    pulse_spec: &PulseSpec,
    shifts: &[usize],
    snr_grid: &[f64],
    counts: &DatasetCounts,
    noise: &NoiseSpec,
) -> Result<Dataset> {
    pulse_spec.validate()?;
    noise.validate()?;
    if shifts.is_empty() {
        return Err(WavedetError::Parameter("shifts must be non-empty".into()));
    }
    if shifts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(WavedetError::Parameter(
            "shifts must be strictly increasing".into(),
        ));
    }
    let h = pulse_spec.n_samples;
    if *shifts.last().unwrap() >= h {
        return Err(WavedetError::Parameter(format!(
            "max shift {} must be < window length {h}",
            shifts.last().unwrap()
        )));
    }
    if counts.total_pulse() + counts.total_noise() == 0 {
        return Err(WavedetError::Parameter("all counts are zero".into()));
    }
    if counts.total_pulse() > 0 && snr_grid.is_empty() {
        return Err(WavedetError::Parameter(
            "snr_grid must be non-empty when pulse rows are requested".into(),
        ));
    }
    let pulse = generate_chirp(pulse_spec)?;
    let max_shift = *shifts.last().unwrap();
    let stream_len = h + max_shift;

    let pulse_partitions = [
        (Partition::BankTrain, counts.pulse_bank),
        (Partition::IntegratorTrain, counts.pulse_integrator),
        (Partition::Test, counts.pulse_test),
    ];
    let noise_partitions = [
        (Partition::BankTrain, counts.noise_bank),
        (Partition::IntegratorTrain, counts.noise_integrator),
        (Partition::Calibration, counts.noise_calibration),
        (Partition::Test, counts.noise_test),
    ];

    let mut rows = Vec::with_capacity(counts.total_pulse() + counts.total_noise());
    // (class ordinal, label, partition) in a fixed global order: pulse rows
    // first, then noise rows.
    let mut plan = Vec::with_capacity(rows.capacity());
    let mut ordinal = 0usize;
    for (part, n) in pulse_partitions {
        for _ in 0..n {
            plan.push((ordinal, Label::Pulse, part));
            ordinal += 1;
        }
    }
    ordinal = 0;
    for (part, n) in noise_partitions {
        for _ in 0..n {
            plan.push((ordinal, Label::NoiseOnly, part));
            ordinal += 1;
        }
    }

    let streams_meta: Vec<(Vec<f64>, Option<f64>)> = plan
        .par_iter()
        .map(|&(class_ord, label, _)| {
            let (domain, is_pulse) = match label {
                Label::Pulse => (DOMAIN_PULSE_EVENT, true),
                Label::NoiseOnly => (DOMAIN_NOISE_EVENT, false),
            };
            let mut rng = substream(noise.seed, domain, class_ord as u64);
            let snr_db = if is_pulse {
                Some(snr_grid[rng.gen_range(0..snr_grid.len())])
            } else {
                None
            };
            let a = match snr_db {
                Some(db) => snr_amplitude(db, &pulse, noise.sigma).expect("pulse non-zero"),
                None => 0.0,
            };
            let s = build_stream(&pulse, a, noise.sigma, stream_len, max_shift, &mut rng);
            (s, snr_db)
        })
        .collect();

    let mut streams = Vec::with_capacity(plan.len());
    for (index, ((stream, snr_db), &(_, label, partition))) in
        streams_meta.into_iter().zip(plan.iter()).enumerate()
    {
        streams.push(stream);
        rows.push(RowMeta {
            index,
            label,
            snr_db,
            partition,
        });
    }

    Ok(Dataset {
        meta: DatasetMeta {
            schema: DATASET_SCHEMA.to_string(),
            pulse: pulse_spec.clone(),
            sigma: noise.sigma,
            seed: noise.seed,
            window_len: h,
            shifts: shifts.to_vec(),
            stream_len,
            rows,
        },
        streams,
    })
}

/// Write the binary sample matrix (f64 little-endian, row-major) and the
/// JSON sidecar next to each other.
pub fn write_dataset(ds: &Dataset, bin_path: &Path, sidecar_path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(ds.streams.len() * ds.meta.stream_len * 8);
    for row in &ds.streams {
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(bin_path)?;
    f.write_all(&buf)?;
    let sidecar = serde_json::to_string_pretty(&ds.meta)?;
    std::fs::write(sidecar_path, sidecar)?;
    Ok(())
}

pub fn read_dataset(bin_path: &Path, sidecar_path: &Path) -> Result<Dataset> {
    let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
    if meta.schema != DATASET_SCHEMA {
        return Err(WavedetError::Data(format!(
            "unsupported dataset schema {:?}, expected {:?}",
            meta.schema, DATASET_SCHEMA
        )));
    }
    let mut raw = Vec::new();
    std::fs::File::open(bin_path)?.read_to_end(&mut raw)?;
    let expect = meta.rows.len() * meta.stream_len * 8;
    if raw.len() != expect {
        return Err(WavedetError::Data(format!(
            "dataset binary is {} bytes, sidecar implies {expect}",
            raw.len()
        )));
    }
    let streams = raw
        .chunks_exact(meta.stream_len * 8)
        .map(|row| {
            row.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok(Dataset { meta, streams })
}
