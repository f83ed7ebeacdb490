//! Monte Carlo evaluation: detection/false-alarm rates with exact
//! confidence intervals, margin cross-correlation matrices, mean-P_d
//! performance curves, and the multiply-add complexity report.

use crate::detector::{threshold_for_scores, IntegrationPipeline, ShiftBank};
use crate::error::{Result, WavedetError};
use crate::rng::{substream, DOMAIN_EVAL_NOISE, DOMAIN_EVAL_PULSE};
use crate::signal::{awgn_into, generate_chirp, snr_amplitude, PulseSpec};
use crate::wavelet::{dwt, WaveletConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const RATES_SCHEMA: &str = "wavedet-rates/1";

/// Point estimates with exact 95% Clopper–Pearson intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesEstimate {
    pub schema: String,
    pub p_d: f64,
    pub p_fa: f64,
    pub trials_pulse: u64,
    pub trials_noise: u64,
    pub ci_pd_95: (f64, f64),
    pub ci_pfa_95: (f64, f64),
}

impl RatesEstimate {
    pub fn validate(&self) -> Result<()> {
        if self.schema != RATES_SCHEMA {
            return Err(WavedetError::Data(format!(
                "unsupported rates schema {:?}, expected {RATES_SCHEMA:?}",
                self.schema
            )));
        }
        for (point, (lo, hi)) in [(self.p_d, self.ci_pd_95), (self.p_fa, self.ci_pfa_95)] {
            if !(0.0..=1.0).contains(&point)
                || !(0.0..=1.0).contains(&lo)
                || !(0.0..=1.0).contains(&hi)
            {
                return Err(WavedetError::Invariant(
                    "rates and interval bounds must lie in [0,1]".into(),
                ));
            }
            if point < lo || point > hi {
                return Err(WavedetError::Invariant(format!(
                    "point estimate {point} outside its interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Beta(a,b) quantile by bisection on the regularized incomplete beta.
/// (The distribution type's own inverse has a coarse accuracy floor.)
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    use statrs::function::beta::beta_reg;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact binomial confidence interval via Beta quantiles.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(WavedetError::Parameter(
            "interval needs at least one trial".into(),
        ));
    }
    if successes > trials {
        return Err(WavedetError::Parameter(format!(
            "{successes} successes exceed {trials} trials"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(WavedetError::Parameter(format!(
            "confidence must lie in (0,1), got {confidence}"
        )));
    }
    let alpha = 1.0 - confidence;
    let (x, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        beta_quantile(x, n - x + 1.0, alpha / 2.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        beta_quantile(x + 1.0, n - x, 1.0 - alpha / 2.0)
    };
    Ok((lower, upper))
}

fn noise_stream(seed: u64, trial: u64, len: usize, sigma: f64) -> Vec<f64> {
    let mut rng = substream(seed, DOMAIN_EVAL_NOISE, trial);
    let mut out = vec![0.0; len];
    awgn_into(&mut rng, sigma, &mut out);
    out
}

fn pulse_stream(
    seed: u64,
    trial: u64,
    onset: usize,
    pulse: &[f64],
    amplitude: f64,
    sigma: f64,
) -> Vec<f64> {
    let mut rng = substream(seed, DOMAIN_EVAL_PULSE, trial);
    let mut out = vec![0.0; onset + pulse.len()];
    awgn_into(&mut rng, sigma, &mut out);
    for (o, p) in out[onset..].iter_mut().zip(pulse.iter()) {
        *o += amplitude * p;
    }
    out
}

fn check_event_setup(bank: &ShiftBank, pulse: &PulseSpec, sigma: f64) -> Result<()> {
    pulse.validate()?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(WavedetError::Parameter(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    if pulse.n_samples != bank.window_len() {
        return Err(WavedetError::Config(format!(
            "pulse length {} does not match the bank window length {}",
            pulse.n_samples,
            bank.window_len()
        )));
    }
    Ok(())
}

/// Fresh Monte Carlo P_d / P_fa estimate at one SNR.
pub fn estimate_rates(
    pipeline: &IntegrationPipeline,
    pulse: &PulseSpec,
    sigma: f64,
    snr_db: f64,
    n_pulse: usize,
    n_noise: usize,
    seed: u64,
) -> Result<RatesEstimate> {
    check_event_setup(&pipeline.bank, pulse, sigma)?;
    if n_pulse == 0 || n_noise == 0 {
        return Err(WavedetError::Parameter(
            "trial counts must be positive".into(),
        ));
    }
    let wave = generate_chirp(pulse)?;
    let amplitude = snr_amplitude(snr_db, &wave, sigma)?;
    let onset = pipeline.bank.max_shift();

    let detections: u64 = (0..n_pulse as u64)
        .into_par_iter()
        .map(|t| {
            let stream = pulse_stream(seed, t, onset, &wave, amplitude, sigma);
            Ok(u64::from(pipeline.score_event(&stream, onset)?.detected))
        })
        .sum::<Result<u64>>()?;
    let alarms: u64 = (0..n_noise as u64)
        .into_par_iter()
        .map(|t| {
            let stream = noise_stream(seed, t, onset + wave.len(), sigma);
            Ok(u64::from(pipeline.score_event(&stream, onset)?.detected))
        })
        .sum::<Result<u64>>()?;

    let estimate = RatesEstimate {
        schema: RATES_SCHEMA.to_string(),
        p_d: detections as f64 / n_pulse as f64,
        p_fa: alarms as f64 / n_noise as f64,
        trials_pulse: n_pulse as u64,
        trials_noise: n_noise as u64,
        ci_pd_95: clopper_pearson(detections, n_pulse as u64, 0.95)?,
        ci_pfa_95: clopper_pearson(alarms, n_noise as u64, 0.95)?,
    };
    estimate.validate()?;
    Ok(estimate)
}

/// Margin vectors of the full bank over fresh pulse events at one SNR —
/// the raw material of the cross-correlation tables.
pub fn pulse_margin_table(
    bank: &ShiftBank,
    pulse: &PulseSpec,
    sigma: f64,
    snr_db: f64,
    n_events: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_event_setup(bank, pulse, sigma)?;
    if n_events == 0 {
        return Err(WavedetError::Parameter("event count must be positive".into()));
    }
    let wave = generate_chirp(pulse)?;
    let amplitude = snr_amplitude(snr_db, &wave, sigma)?;
    let onset = bank.max_shift();
    let h = bank.window_len();
    (0..n_events as u64)
        .into_par_iter()
        .map(|t| {
            let stream = pulse_stream(seed, t, onset, &wave, amplitude, sigma);
            let views: Vec<&[f64]> = bank
                .shifts
                .iter()
                .map(|&d| &stream[onset - d..onset - d + h])
                .collect();
            bank.margins_for_views(&views)
        })
        .collect()
}

/// Labels the bank's detectors the way tables and CSV headers name them.
pub fn shift_labels(shifts: &[usize]) -> Vec<String> {
    shifts.iter().map(|d| format!("shift{d}")).collect()
}

/// Pearson cross-correlation of margin columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn validate(&self) -> Result<()> {
        let m = self.labels.len();
        if self.entries.len() != m || self.entries.iter().any(|r| r.len() != m) {
            return Err(WavedetError::Invariant(
                "correlation matrix shape does not match labels".into(),
            ));
        }
        for i in 0..m {
            if self.entries[i][i] != 1.0 {
                return Err(WavedetError::Invariant(format!(
                    "diagonal entry {i} is {}, expected 1",
                    self.entries[i][i]
                )));
            }
            for j in 0..m {
                let v = self.entries[i][j];
                if !(-1.0..=1.0).contains(&v) {
                    return Err(WavedetError::Invariant(format!(
                        "entry ({i},{j}) = {v} outside [-1,1]"
                    )));
                }
                if (v - self.entries[j][i]).abs() > 1e-12 {
                    return Err(WavedetError::Invariant(format!(
                        "asymmetry at ({i},{j})"
                    )));
                }
            }
        }
        let min_eig = jacobi_eigenvalues(&self.entries)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(WavedetError::Invariant(format!(
                "correlation matrix is not positive semidefinite (min eigenvalue {min_eig})"
            )));
        }
        Ok(())
    }

    /// Largest off-diagonal entry as ((row, col), value).
    pub fn max_off_diagonal(&self) -> Option<((usize, usize), f64)> {
        let m = self.labels.len();
        let mut best: Option<((usize, usize), f64)> = None;
        for i in 0..m {
            for j in (i + 1)..m {
                let v = self.entries[i][j];
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some(((i, j), v));
                }
            }
        }
        best
    }
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(WavedetError::Parameter("matrix must be square".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if (matrix[i][j] - matrix[j][i]).abs() > 1e-9 {
                return Err(WavedetError::Parameter(
                    "matrix must be symmetric".into(),
                ));
            }
        }
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-30 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i][i]).collect())
}

/// Pearson correlation matrix of an n×M margin table.
pub fn correlation_matrix(
    margin_table: &[Vec<f64>],
    labels: &[String],
) -> Result<CorrelationMatrix> {
    let n = margin_table.len();
    let m = labels.len();
    if n < 2 {
        return Err(WavedetError::Parameter(
            "correlation needs at least two rows".into(),
        ));
    }
    if margin_table.iter().any(|r| r.len() != m) {
        return Err(WavedetError::Parameter(format!(
            "margin rows must have {m} columns to match the labels"
        )));
    }
    let mut mean = vec![0.0_f64; m];
    for row in margin_table {
        for (s, v) in mean.iter_mut().zip(row.iter()) {
            *s += v;
        }
    }
    for s in mean.iter_mut() {
        *s /= n as f64;
    }
    // centered cross-products, accumulated in a fixed row order
    let mut cross = vec![vec![0.0_f64; m]; m];
    for row in margin_table {
        for i in 0..m {
            let di = row[i] - mean[i];
            for j in i..m {
                cross[i][j] += di * (row[j] - mean[j]);
            }
        }
    }
    for (idx, label) in labels.iter().enumerate() {
        if cross[idx][idx] == 0.0 {
            return Err(WavedetError::Data(format!(
                "column {label:?} is constant; correlation undefined"
            )));
        }
    }
    let mut entries = vec![vec![0.0_f64; m]; m];
    for i in 0..m {
        entries[i][i] = 1.0;
        for j in (i + 1)..m {
            let r = (cross[i][j] / (cross[i][i] * cross[j][j]).sqrt()).clamp(-1.0, 1.0);
            entries[i][j] = r;
            entries[j][i] = r;
        }
    }
    let matrix = CorrelationMatrix {
        labels: labels.to_vec(),
        entries,
    };
    matrix.validate()?;
    Ok(matrix)
}

/// One (scheme, target) sample of a performance curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub scheme: String,
    pub pfa_target: f64,
    pub neg_log10_pfa: f64,
    pub mean_pd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCurve {
    pub points: Vec<CurvePoint>,
    pub snr_grid: Vec<f64>,
}

impl PerformanceCurve {
    /// Every scheme's mean P_d must be non-increasing in −log10(P_fa).
    pub fn validate_monotone(&self) -> Result<()> {
        let mut schemes: Vec<&str> = self.points.iter().map(|p| p.scheme.as_str()).collect();
        schemes.dedup();
        for scheme in schemes {
            let mut pts: Vec<&CurvePoint> = self
                .points
                .iter()
                .filter(|p| p.scheme == scheme)
                .collect();
            pts.sort_by(|a, b| a.neg_log10_pfa.total_cmp(&b.neg_log10_pfa));
            for pair in pts.windows(2) {
                if pair[1].mean_pd > pair[0].mean_pd + 1e-12 {
                    return Err(WavedetError::Invariant(format!(
                        "scheme {scheme}: mean P_d rises from {} to {} as the threshold grows",
                        pair[0].mean_pd, pair[1].mean_pd
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mean_pd(&self, scheme: &str, pfa_target: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.scheme == scheme && p.pfa_target == pfa_target)
            .map(|p| p.mean_pd)
    }
}

/// Frozen per-scheme scores: one noise sample, one pulse sample per SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeScores {
    pub name: String,
    pub noise: Vec<f64>,
    pub pulse_per_snr: Vec<Vec<f64>>,
}

impl SchemeScores {
    /// Mean over the SNR grid of the detection fraction above `threshold`.
    pub fn mean_pd_at(&self, threshold: f64) -> f64 {
        self.pulse_per_snr
            .iter()
            .map(|scores| {
                scores.iter().filter(|&&s| s > threshold).count() as f64 / scores.len() as f64
            })
            .sum::<f64>()
            / self.pulse_per_snr.len() as f64
    }
}

/// How a variant's score is obtained for each shared event.
enum VariantPath {
    /// The variant's bank is a sub-bank of the reference: its margins are
    /// these columns of the reference margins, bit-for-bit.
    ReuseMargins(Vec<usize>),
    /// Unrelated bank; run its own windows.
    Rescore,
}

fn variant_paths(
    variants: &[(&str, &IntegrationPipeline)],
    largest: &IntegrationPipeline,
) -> Vec<VariantPath> {
    variants
        .iter()
        .map(|(_, p)| {
            if p.bank.wavelet != largest.bank.wavelet
                || p.bank.feature_norm != largest.bank.feature_norm
            {
                return VariantPath::Rescore;
            }
            let idxs: Option<Vec<usize>> = p
                .bank
                .shifts
                .iter()
                .map(|d| largest.bank.shifts.iter().position(|x| x == d))
                .collect();
            match idxs {
                Some(idxs)
                    if idxs
                        .iter()
                        .enumerate()
                        .all(|(k, &i)| p.bank.models[k] == largest.bank.models[i]) =>
                {
                    VariantPath::ReuseMargins(idxs)
                }
                _ => VariantPath::Rescore,
            }
        })
        .collect()
}

/// Score the same Monte Carlo events under every scheme and freeze the
/// results.
///
/// Schemes are the named integrated `variants` plus one individual scheme
/// per detector of the largest variant's bank (its raw margins).  All
/// schemes score the same events: per-trial substreams depend only on
/// `seed` and the trial index, and every variant reads its windows around
/// one shared onset, so margins for shared shifts agree bit-for-bit.
#[allow(clippy::too_many_arguments)]
pub fn collect_scheme_scores(
    variants: &[(&str, &IntegrationPipeline)],
    pulse: &PulseSpec,
    sigma: f64,
    snr_grid: &[f64],
    n_noise: usize,
    n_pulse_per_snr: usize,
    seed: u64,
) -> Result<Vec<SchemeScores>> {
    if variants.is_empty() {
        return Err(WavedetError::Parameter(
            "at least one pipeline variant is required".into(),
        ));
    }
    if snr_grid.is_empty() || n_pulse_per_snr == 0 || n_noise == 0 {
        return Err(WavedetError::Parameter(
            "snr grid and trial counts must be non-empty".into(),
        ));
    }
    for (_, p) in variants {
        check_event_setup(&p.bank, pulse, sigma)?;
    }

    let onset = variants
        .iter()
        .map(|(_, p)| p.bank.max_shift())
        .max()
        .unwrap();
    let largest = variants
        .iter()
        .map(|(_, p)| *p)
        .max_by_key(|p| p.bank.size())
        .unwrap();
    let individual_labels = shift_labels(&largest.bank.shifts);
    {
        let mut names: Vec<&str> = variants.iter().map(|(n, _)| *n).collect();
        names.extend(individual_labels.iter().map(|s| s.as_str()));
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(WavedetError::Parameter(
                "scheme names must be unique (variant names collide with shift labels)".into(),
            ));
        }
    }
    let paths = variant_paths(variants, largest);

    let wave = generate_chirp(pulse)?;
    let n_individual = largest.bank.size();
    let n_schemes = n_individual + variants.len();

    // score one event stream under every scheme
    let score_stream = |stream: &[f64]| -> Result<Vec<f64>> {
        let mut scores = Vec::with_capacity(n_schemes);
        let reference = largest.score_event(stream, onset)?;
        scores.extend_from_slice(&reference.per_shift_margins);
        for ((_, p), path) in variants.iter().zip(paths.iter()) {
            scores.push(match path {
                VariantPath::ReuseMargins(idxs) => {
                    let sub: Vec<f64> =
                        idxs.iter().map(|&i| reference.per_shift_margins[i]).collect();
                    p.score_margins(&sub)?
                }
                VariantPath::Rescore => p.score_event(stream, onset)?.score,
            });
        }
        Ok(scores)
    };

    let noise_rows: Vec<Vec<f64>> = (0..n_noise as u64)
        .into_par_iter()
        .map(|t| score_stream(&noise_stream(seed, t, onset + wave.len(), sigma)))
        .collect::<Result<Vec<_>>>()?;

    let mut pulse_rows_per_snr = Vec::with_capacity(snr_grid.len());
    for (snr_idx, &snr_db) in snr_grid.iter().enumerate() {
        let amplitude = snr_amplitude(snr_db, &wave, sigma)?;
        let base = (snr_idx * n_pulse_per_snr) as u64;
        let rows: Vec<Vec<f64>> = (0..n_pulse_per_snr as u64)
            .into_par_iter()
            .map(|t| score_stream(&pulse_stream(seed, base + t, onset, &wave, amplitude, sigma)))
            .collect::<Result<Vec<_>>>()?;
        pulse_rows_per_snr.push(rows);
    }

    let scheme_names: Vec<String> = individual_labels
        .into_iter()
        .chain(variants.iter().map(|(n, _)| n.to_string()))
        .collect();
    Ok(scheme_names
        .into_iter()
        .enumerate()
        .map(|(col, name)| SchemeScores {
            name,
            noise: noise_rows.iter().map(|r| r[col]).collect(),
            pulse_per_snr: pulse_rows_per_snr
                .iter()
                .map(|rows| rows.iter().map(|r| r[col]).collect())
                .collect(),
        })
        .collect())
}

/// Re-threshold frozen scores at each target and tabulate mean P_d.
pub fn curve_from_scores(
    schemes: &[SchemeScores],
    snr_grid: &[f64],
    pfa_targets: &[f64],
) -> Result<PerformanceCurve> {
    if schemes.is_empty() || pfa_targets.is_empty() {
        return Err(WavedetError::Parameter(
            "schemes and targets must be non-empty".into(),
        ));
    }
    let n_noise = schemes[0].noise.len();
    for s in schemes {
        if s.noise.len() != n_noise || s.pulse_per_snr.len() != snr_grid.len() {
            return Err(WavedetError::Parameter(format!(
                "scheme {:?} has inconsistent sample shapes",
                s.name
            )));
        }
    }
    let min_target = check_pfa_targets(pfa_targets)?;
    let required = (10.0 / min_target).ceil() as usize;
    if n_noise < required {
        return Err(WavedetError::Calibration {
            required,
            available: n_noise,
            target_pfa: min_target,
        });
    }

    let mut points = Vec::with_capacity(schemes.len() * pfa_targets.len());
    for scheme in schemes {
        for &target in pfa_targets {
            let threshold = threshold_for_scores(&scheme.noise, target)?;
            points.push(CurvePoint {
                scheme: scheme.name.clone(),
                pfa_target: target,
                neg_log10_pfa: -target.log10(),
                mean_pd: scheme.mean_pd_at(threshold),
            });
        }
    }
    let curve = PerformanceCurve {
        points,
        snr_grid: snr_grid.to_vec(),
    };
    curve.validate_monotone()?;
    Ok(curve)
}

fn check_pfa_targets(pfa_targets: &[f64]) -> Result<f64> {
    let mut min_target = f64::INFINITY;
    for &t in pfa_targets {
        if !(t > 0.0 && t <= 1.0) {
            return Err(WavedetError::Parameter(format!(
                "P_fa target {t} outside (0, 1]"
            )));
        }
        min_target = min_target.min(t);
    }
    Ok(min_target)
}

/// Mean-P_d curves over re-thresholded frozen scores; see
/// [`collect_scheme_scores`] for the scheme roster and event sharing.
#[allow(clippy::too_many_arguments)]
pub fn performance_curve(
    variants: &[(&str, &IntegrationPipeline)],
    pulse: &PulseSpec,
    sigma: f64,
    snr_grid: &[f64],
    pfa_targets: &[f64],
    n_noise: usize,
    n_pulse_per_snr: usize,
    seed: u64,
) -> Result<PerformanceCurve> {
    // fail on an undersized noise sample before the expensive part
    let min_target = check_pfa_targets(pfa_targets)?;
    let required = (10.0 / min_target).ceil() as usize;
    if n_noise < required {
        return Err(WavedetError::Calibration {
            required,
            available: n_noise,
            target_pfa: min_target,
        });
    }
    let schemes = collect_scheme_scores(
        variants,
        pulse,
        sigma,
        snr_grid,
        n_noise,
        n_pulse_per_snr,
        seed,
    )?;
    curve_from_scores(&schemes, snr_grid, pfa_targets)
}

/// Per-stage multiply-add accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub window_len: usize,
    pub wavelet_ops: u64,
    pub ops_per_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub rows: Vec<ComplexityRow>,
    pub bank_size: usize,
    pub feature_dim: usize,
    /// M·S multiply-adds per group for the collapsed linear bank.
    pub bank_ops: u64,
    pub integrator_sv_count: usize,
    /// Kernel-expansion cost per group (support vectors × M), for reference.
    pub integrator_kernel_ops: u64,
    /// Deployed cost per group of the collapsed low-degree form.
    pub integrator_fused_ops: u64,
    /// Wavelet ops at the bank's own window length.
    pub bank_window_wavelet_ops: u64,
}

impl ComplexityReport {
    /// Wavelet count at the bank's window length over the downstream
    /// stages, as deployed.
    pub fn dominance_ratio(&self) -> f64 {
        self.bank_window_wavelet_ops as f64
            / (self.bank_ops + self.integrator_fused_ops) as f64
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("multiply-add accounting\n\n");
        out.push_str("wavelet stage (per window):\n");
        out.push_str("  window_len  ops       ops/sample\n");
        for row in &self.rows {
            out.push_str(&format!(
                "  {:<10}  {:<8}  {}\n",
                row.window_len, row.wavelet_ops, row.ops_per_sample
            ));
        }
        out.push_str(&format!(
            "\nbank stage (per group): {} detectors x {} features = {} ops\n",
            self.bank_size, self.feature_dim, self.bank_ops
        ));
        out.push_str(&format!(
            "integrator stage (per group): {} support vectors\n",
            self.integrator_sv_count
        ));
        out.push_str(&format!(
            "  kernel expansion: {} ops\n  collapsed form (deployed): {} ops\n",
            self.integrator_kernel_ops, self.integrator_fused_ops
        ));
        out.push_str(&format!(
            "\nwavelet ops at the bank window: {}\ndominance ratio (wavelet / downstream): {:.2}\n",
            self.bank_window_wavelet_ops,
            self.dominance_ratio()
        ));
        out
    }
}

/// Count multiply-adds per stage and check the wavelet stage dominates.
pub fn complexity_report(
    wavelet_cfg: &WaveletConfig,
    h_list: &[usize],
    bank: &ShiftBank,
    pipeline: &IntegrationPipeline,
) -> Result<ComplexityReport> {
    if h_list.is_empty() {
        return Err(WavedetError::Parameter(
            "at least one window length is required".into(),
        ));
    }
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let ops = dwt(&vec![0.0; h], wavelet_cfg)?.op_count;
        rows.push(ComplexityRow {
            window_len: h,
            wavelet_ops: ops,
            ops_per_sample: ops as f64 / h as f64,
        });
    }
    let bank_ops = (bank.size() * bank.feature_dim()) as u64;
    let m = pipeline.bank.size() as u64;
    let sv = pipeline.integrator.support_vectors.len();
    let report = ComplexityReport {
        rows,
        bank_size: bank.size(),
        feature_dim: bank.feature_dim(),
        bank_ops,
        integrator_sv_count: sv,
        integrator_kernel_ops: sv as u64 * m,
        integrator_fused_ops: pipeline.fused_ops_per_group(),
        bank_window_wavelet_ops: dwt(&vec![0.0; bank.window_len()], wavelet_cfg)?.op_count,
    };
    if report.dominance_ratio() <= 1.0 {
        return Err(WavedetError::Invariant(format!(
            "wavelet stage no longer dominates (ratio {:.3})",
            report.dominance_ratio()
        )));
    }
    Ok(report)
}

/// `scheme,pfa_target,neg_log10_pfa,mean_pd,n_noise,n_pulse_per_snr,seed`
pub fn render_curves_csv(
    curve: &PerformanceCurve,
    n_noise: usize,
    n_pulse_per_snr: usize,
    seed: u64,
) -> String {
    let mut out = String::from("scheme,pfa_target,neg_log10_pfa,mean_pd,n_noise,n_pulse_per_snr,seed\n");
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.scheme, p.pfa_target, p.neg_log10_pfa, p.mean_pd, n_noise, n_pulse_per_snr, seed
        ));
    }
    out
}

pub fn write_curves_csv(
    curve: &PerformanceCurve,
    n_noise: usize,
    n_pulse_per_snr: usize,
    seed: u64,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, render_curves_csv(curve, n_noise, n_pulse_per_snr, seed))?;
    Ok(())
}

/// Header row of labels, then M rows of M full-precision entries.
pub fn render_corr_csv(matrix: &CorrelationMatrix) -> String {
    let mut out = matrix.labels.join(",");
    out.push('\n');
    for row in &matrix.entries {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_corr_csv(matrix: &CorrelationMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, render_corr_csv(matrix))?;
    Ok(())
}

pub fn write_rates_json(rates: &RatesEstimate, path: &Path) -> Result<()> {
    rates.validate()?;
    std::fs::write(path, serde_json::to_string_pretty(rates)?)?;
    Ok(())
}

pub fn read_rates_json(path: &Path) -> Result<RatesEstimate> {
    let rates: RatesEstimate = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    rates.validate()?;
    Ok(rates)
}
