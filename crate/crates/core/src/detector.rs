//! The detector proper: a bank of linear SVMs over wavelet features at
//! staggered window shifts, a polynomial fusion SVM over their margins,
//! CFAR threshold calibration, and the sliding-scan entry point.

use crate::error::{Result, WavedetError};
use crate::signal::{Dataset, Label, Partition, WindowObservation};
use crate::svm::{self, KernelSpec, SvmModel, TrainConfig};
use crate::wavelet::{dwt, extract_scale, WaveletConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const PIPELINE_SCHEMA: &str = "wavedet-pipeline/1";

/// Detail scale whose coefficients feed the detectors (the d4 band).
pub const FEATURE_SCALE: usize = 4;

/// Per-dimension standardization, fitted on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNorm {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureNorm {
    /// Population mean and standard deviation per dimension.  A constant
    /// dimension gets scale 1 so standardization stays defined.
    pub fn fit(rows: &[Vec<f64>]) -> Result<FeatureNorm> {
        let n = rows.len();
        if n == 0 {
            return Err(WavedetError::Training(
                "cannot fit normalization on an empty sample".into(),
            ));
        }
        let dim = rows[0].len();
        let mut mean = vec![0.0_f64; dim];
        for row in rows {
            if row.len() != dim {
                return Err(WavedetError::Parameter(
                    "ragged rows in normalization input".into(),
                ));
            }
            for (m, v) in mean.iter_mut().zip(row.iter()) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let mut var = vec![0.0_f64; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row.iter()).zip(mean.iter()) {
                let d = v - m;
                *s += d * d;
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n as f64).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        let norm = FeatureNorm { mean, scale };
        norm.validate()?;
        Ok(norm)
    }

    pub fn identity(dim: usize) -> FeatureNorm {
        FeatureNorm {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.scale.len() {
            return Err(WavedetError::Data(
                "normalization mean/scale length mismatch".into(),
            ));
        }
        if self.mean.iter().any(|v| !v.is_finite())
            || self.scale.iter().any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(WavedetError::Data(
                "normalization values must be finite with positive scales".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(WavedetError::Parameter(format!(
                "normalization expects dimension {}, got {}",
                self.mean.len(),
                x.len()
            )));
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(self.scale.iter()))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }
}

/// d4 detail coefficients of one window — the detector feature vector.
pub fn extract_features(window: &WindowObservation, cfg: &WaveletConfig) -> Result<Vec<f64>> {
    extract_features_raw(&window.samples, cfg)
}

/// Same as [`extract_features`] on a bare sample slice.
pub fn extract_features_raw(samples: &[f64], cfg: &WaveletConfig) -> Result<Vec<f64>> {
    if cfg.levels < FEATURE_SCALE {
        return Err(WavedetError::Parameter(format!(
            "feature extraction reads detail scale {FEATURE_SCALE}; config has {} levels",
            cfg.levels
        )));
    }
    let pyramid = dwt(samples, cfg)?;
    Ok(extract_scale(&pyramid, FEATURE_SCALE)?.to_vec())
}

/// A bank of linear detectors, one per window shift, sharing one feature
/// normalization.
#[derive(Debug, Clone)]
pub struct ShiftBank {
    pub shifts: Vec<usize>,
    pub models: Vec<SvmModel>,
    pub feature_norm: FeatureNorm,
    pub wavelet: WaveletConfig,
    /// Collapsed weight vector per model (valid because kernels are linear).
    weights: Vec<Vec<f64>>,
}

impl ShiftBank {
    pub fn new(
        shifts: Vec<usize>,
        models: Vec<SvmModel>,
        feature_norm: FeatureNorm,
        wavelet: WaveletConfig,
    ) -> Result<ShiftBank> {
        wavelet.validate()?;
        feature_norm.validate()?;
        if shifts.is_empty() {
            return Err(WavedetError::Config("bank needs at least one shift".into()));
        }
        if shifts[0] != 0 {
            return Err(WavedetError::Config(
                "the first bank shift must be 0 (complete-pulse detector)".into(),
            ));
        }
        if !shifts.windows(2).all(|w| w[0] < w[1]) {
            return Err(WavedetError::Config(
                "bank shifts must be strictly increasing".into(),
            ));
        }
        if models.len() != shifts.len() {
            return Err(WavedetError::Config(format!(
                "{} shifts but {} models",
                shifts.len(),
                models.len()
            )));
        }
        let dim = feature_norm.dim();
        let mut weights = Vec::with_capacity(models.len());
        for model in &models {
            model.validate()?;
            if model.feature_dim != dim {
                return Err(WavedetError::Config(format!(
                    "bank model dimension {} does not match normalization dimension {dim}",
                    model.feature_dim
                )));
            }
            let w = model.linear_weights().ok_or_else(|| {
                WavedetError::Config("bank models must use the linear kernel".into())
            })?;
            weights.push(w);
        }
        Ok(ShiftBank {
            shifts,
            models,
            feature_norm,
            wavelet,
            weights,
        })
    }

    /// M, the number of detectors.
    pub fn size(&self) -> usize {
        self.shifts.len()
    }

    /// S, the d4 feature length.
    pub fn feature_dim(&self) -> usize {
        self.feature_norm.dim()
    }

    /// H, reconstructed from the feature length (S·2^scale).
    pub fn window_len(&self) -> usize {
        self.feature_dim() << FEATURE_SCALE
    }

    pub fn max_shift(&self) -> usize {
        *self.shifts.last().unwrap()
    }

    /// The collapsed per-detector weight vectors (standardized space).
    pub fn weight_vectors(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// A bank over a subset of this bank's shifts, sharing its models.
    pub fn sub_bank(&self, shifts: &[usize]) -> Result<ShiftBank> {
        let mut models = Vec::with_capacity(shifts.len());
        for d in shifts {
            let idx = self
                .shifts
                .iter()
                .position(|s| s == d)
                .ok_or_else(|| {
                    WavedetError::Config(format!("shift {d} is not part of this bank"))
                })?;
            models.push(self.models[idx].clone());
        }
        ShiftBank::new(
            shifts.to_vec(),
            models,
            self.feature_norm.clone(),
            self.wavelet,
        )
    }

    /// Margins for M aligned raw windows (one per shift, in shift order).
    pub fn margins_for_views(&self, windows: &[&[f64]]) -> Result<Vec<f64>> {
        if windows.len() != self.size() {
            return Err(WavedetError::Parameter(format!(
                "group has {} windows but the bank has {} detectors",
                windows.len(),
                self.size()
            )));
        }
        let h = self.window_len();
        let mut margins = Vec::with_capacity(self.size());
        for (i, view) in windows.iter().enumerate() {
            if view.len() != h {
                return Err(WavedetError::Parameter(format!(
                    "window {i} has length {}, expected {h}",
                    view.len()
                )));
            }
            let features = extract_features_raw(view, &self.wavelet)?;
            let z = self.feature_norm.apply(&features)?;
            let w = &self.weights[i];
            let dot: f64 = w.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
            margins.push(dot + self.models[i].bias);
        }
        Ok(margins)
    }
}

/// Decision values of every detector on one aligned window group — the
/// bank's "smooth outputs".
pub fn bank_margins(bank: &ShiftBank, group: &[WindowObservation]) -> Result<Vec<f64>> {
    if group.len() != bank.size() {
        return Err(WavedetError::Parameter(format!(
            "group size {} does not match bank size {}",
            group.len(),
            bank.size()
        )));
    }
    for (obs, d) in group.iter().zip(bank.shifts.iter()) {
        if obs.spec.shift != *d {
            return Err(WavedetError::Parameter(format!(
                "group window labeled shift {} where the bank expects {d}",
                obs.spec.shift
            )));
        }
    }
    let views: Vec<&[f64]> = group.iter().map(|o| o.samples.as_slice()).collect();
    bank.margins_for_views(&views)
}

/// Train one linear SVM per shift on standardized d4 features.
///
/// Features are normalized by a single mean/scale pooled over every shift
/// and both classes of the bank-training partition.
pub fn train_bank(
    dataset: &Dataset,
    shifts: &[usize],
    svm_cfg: &TrainConfig,
    wavelet_cfg: &WaveletConfig,
) -> Result<ShiftBank> {
    svm_cfg.validate()?;
    wavelet_cfg.validate()?;
    for d in shifts {
        if !dataset.meta.shifts.contains(d) {
            return Err(WavedetError::Config(format!(
                "dataset provides shifts {:?}; requested shift {d} is missing",
                dataset.meta.shifts
            )));
        }
    }
    let rows = dataset.rows_in(Partition::BankTrain);
    let n_pulse = rows
        .iter()
        .filter(|&&r| dataset.meta.rows[r].label == Label::Pulse)
        .count();
    if n_pulse == 0 || n_pulse == rows.len() {
        return Err(WavedetError::Config(format!(
            "bank-training partition needs both classes (has {n_pulse} pulse rows of {})",
            rows.len()
        )));
    }

    // features[shift][row]
    let features: Vec<Vec<Vec<f64>>> = shifts
        .par_iter()
        .map(|&d| {
            rows.par_iter()
                .map(|&r| extract_features_raw(dataset.window_view(r, d)?, wavelet_cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let pooled: Vec<Vec<f64>> = features.iter().flatten().cloned().collect();
    let norm = FeatureNorm::fit(&pooled)?;
    drop(pooled);

    let labels: Vec<f64> = rows
        .iter()
        .map(|&r| match dataset.meta.rows[r].label {
            Label::Pulse => 1.0,
            Label::NoiseOnly => -1.0,
        })
        .collect();

    let models: Vec<SvmModel> = features
        .into_par_iter()
        .map(|rows_d| {
            let standardized = rows_d
                .iter()
                .map(|f| norm.apply(f))
                .collect::<Result<Vec<_>>>()?;
            svm::train(&standardized, &labels, &KernelSpec::Linear, svm_cfg, 0)
        })
        .collect::<Result<Vec<_>>>()?;

    ShiftBank::new(shifts.to_vec(), models, norm, *wavelet_cfg)
}

/// Exact low-degree polynomial collapse of the fusion SVM:
/// f(x) = xᵀQx + w·x + c with Q = Σ cᵢ svᵢsvᵢᵀ (degree 2 only).
#[derive(Debug, Clone)]
struct FusedEvaluator {
    /// Row-major M×M symmetric matrix; None for affine decision functions.
    quad: Option<Vec<f64>>,
    lin: Vec<f64>,
    constant: f64,
}

impl FusedEvaluator {
    fn from_model(model: &SvmModel) -> Result<FusedEvaluator> {
        let m = model.feature_dim;
        let coef_sum: f64 = model.coefficients.iter().sum();
        let mut weighted = vec![0.0_f64; m];
        for (c, sv) in model.coefficients.iter().zip(model.support_vectors.iter()) {
            for (w, v) in weighted.iter_mut().zip(sv.iter()) {
                *w += c * v;
            }
        }
        match model.kernel {
            KernelSpec::Linear => Ok(FusedEvaluator {
                quad: None,
                lin: weighted,
                constant: model.bias,
            }),
            KernelSpec::Poly { degree: 1, offset } => Ok(FusedEvaluator {
                quad: None,
                lin: weighted,
                constant: offset * coef_sum + model.bias,
            }),
            KernelSpec::Poly { degree: 2, offset } => {
                let mut quad = vec![0.0_f64; m * m];
                for (c, sv) in model.coefficients.iter().zip(model.support_vectors.iter()) {
                    for i in 0..m {
                        let ci = c * sv[i];
                        let row = &mut quad[i * m..(i + 1) * m];
                        for (q, v) in row.iter_mut().zip(sv.iter()) {
                            *q += ci * v;
                        }
                    }
                }
                for w in weighted.iter_mut() {
                    *w *= 2.0 * offset;
                }
                Ok(FusedEvaluator {
                    quad: Some(quad),
                    lin: weighted,
                    constant: offset * offset * coef_sum + model.bias,
                })
            }
            KernelSpec::Poly { degree, .. } => Err(WavedetError::Parameter(format!(
                "fusion supports polynomial degree 1 or 2, got {degree}"
            ))),
        }
    }

    fn score(&self, x: &[f64]) -> f64 {
        let m = x.len();
        let mut f = self.constant;
        if let Some(q) = &self.quad {
            for i in 0..m {
                let row = &q[i * m..(i + 1) * m];
                let rx: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                f += x[i] * rx;
            }
        }
        f += self.lin.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
        f
    }

    /// Multiply-adds per evaluation of the collapsed form.
    fn ops_per_eval(&self) -> u64 {
        let m = self.lin.len() as u64;
        match self.quad {
            Some(_) => m * m + 2 * m,
            None => m,
        }
    }
}

/// Bank + fusion SVM + score normalization + decision threshold.
#[derive(Debug, Clone)]
pub struct IntegrationPipeline {
    pub bank: ShiftBank,
    pub integrator: SvmModel,
    pub score_norm: FeatureNorm,
    pub threshold: f64,
    fused: FusedEvaluator,
}

/// Outcome of one group evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub score: f64,
    pub detected: bool,
    pub per_shift_margins: Vec<f64>,
}

impl IntegrationPipeline {
    pub fn new(
        bank: ShiftBank,
        integrator: SvmModel,
        score_norm: FeatureNorm,
        threshold: f64,
    ) -> Result<IntegrationPipeline> {
        integrator.validate()?;
        score_norm.validate()?;
        if integrator.feature_dim != bank.size() {
            return Err(WavedetError::Config(format!(
                "integrator expects {} inputs but the bank has {} detectors",
                integrator.feature_dim,
                bank.size()
            )));
        }
        if score_norm.dim() != bank.size() {
            return Err(WavedetError::Config(
                "score normalization dimension does not match the bank".into(),
            ));
        }
        let fused = FusedEvaluator::from_model(&integrator)?;
        Ok(IntegrationPipeline {
            bank,
            integrator,
            score_norm,
            threshold,
            fused,
        })
    }

    /// Fused score from raw bank margins.
    pub fn score_margins(&self, margins: &[f64]) -> Result<f64> {
        let z = self.score_norm.apply(margins)?;
        Ok(self.fused.score(&z))
    }

    /// Evaluate the group whose pulse-onset hypothesis sits at `onset`
    /// within `stream` (the shift-D window starts at onset − D).
    pub fn score_event(&self, stream: &[f64], onset: usize) -> Result<DetectionResult> {
        let h = self.bank.window_len();
        let dm = self.bank.max_shift();
        if onset < dm || onset + h > stream.len() {
            return Err(WavedetError::Parameter(format!(
                "onset {onset} out of range [{dm}, {}] for stream length {}",
                stream.len().saturating_sub(h),
                stream.len()
            )));
        }
        let views: Vec<&[f64]> = self
            .bank
            .shifts
            .iter()
            .map(|&d| &stream[onset - d..onset - d + h])
            .collect();
        let margins = self.bank.margins_for_views(&views)?;
        let score = self.score_margins(&margins)?;
        Ok(DetectionResult {
            score,
            detected: score > self.threshold,
            per_shift_margins: margins,
        })
    }

    /// Multiply-adds per group spent in the fusion stage.
    pub fn fused_ops_per_group(&self) -> u64 {
        self.fused.ops_per_eval()
    }
}

/// Train the fusion SVM on the integrator partition's margin vectors.
///
/// `input_shifts` selects which detectors feed the fusion (e.g. `[0,11,23]`
/// or all five); the returned pipeline carries the matching sub-bank, so
/// it is self-contained.  The margin vectors come from a partition that is
/// disjoint from the bank's training rows by dataset construction.
pub fn train_integrator(
    bank: &ShiftBank,
    dataset: &Dataset,
    input_shifts: &[usize],
    kernel: &KernelSpec,
    svm_cfg: &TrainConfig,
) -> Result<IntegrationPipeline> {
    svm_cfg.validate()?;
    let sub = bank.sub_bank(input_shifts)?;
    let rows = dataset.rows_in(Partition::IntegratorTrain);
    let n_pulse = rows
        .iter()
        .filter(|&&r| dataset.meta.rows[r].label == Label::Pulse)
        .count();
    if n_pulse == 0 || n_pulse == rows.len() {
        return Err(WavedetError::Config(format!(
            "integrator partition needs both classes (has {n_pulse} pulse rows of {})",
            rows.len()
        )));
    }

    let margins: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&r| {
            let views = sub
                .shifts
                .iter()
                .map(|&d| dataset.window_view(r, d))
                .collect::<Result<Vec<_>>>()?;
            sub.margins_for_views(&views)
        })
        .collect::<Result<Vec<_>>>()?;

    let score_norm = FeatureNorm::fit(&margins)?;
    let standardized = margins
        .iter()
        .map(|m| score_norm.apply(m))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<f64> = rows
        .iter()
        .map(|&r| match dataset.meta.rows[r].label {
            Label::Pulse => 1.0,
            Label::NoiseOnly => -1.0,
        })
        .collect();
    let integrator = svm::train(&standardized, &labels, kernel, svm_cfg, 0)?;
    IntegrationPipeline::new(sub, integrator, score_norm, 0.0)
}

/// CFAR threshold over a frozen noise-score sample: the smallest order
/// statistic t with fraction(scores > t) ≤ target_pfa.
pub fn threshold_for_scores(scores: &[f64], target_pfa: f64) -> Result<f64> {
    if !(target_pfa > 0.0) {
        return Err(WavedetError::Parameter(format!(
            "target P_fa must be positive, got {target_pfa}"
        )));
    }
    if target_pfa >= 1.0 {
        // Everything may alarm: the sentinel admits every score.
        return Ok(f64::NEG_INFINITY);
    }
    // The order statistic is meaningless unless at least one score is
    // expected above it; callers that need tighter estimates (the curve
    // harness wants ten-fold coverage) enforce their own floor.
    let required = (1.0 / target_pfa).ceil() as usize;
    if scores.len() < required {
        return Err(WavedetError::Calibration {
            required,
            available: scores.len(),
            target_pfa,
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(WavedetError::Parameter(
            "noise scores must be finite for calibration".into(),
        ));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = ((target_pfa * n as f64).floor() as usize).min(n - 1);
    Ok(sorted[n - 1 - k])
}

/// Calibrate and install the pipeline threshold for a target false-alarm
/// rate, returning the threshold.
pub fn calibrate_threshold(
    pipeline: &mut IntegrationPipeline,
    noise_scores: &[f64],
    target_pfa: f64,
) -> Result<f64> {
    let t = threshold_for_scores(noise_scores, target_pfa)?;
    pipeline.threshold = t;
    Ok(t)
}

/// Evaluate one aligned window group against the pipeline threshold.
pub fn detect(pipeline: &IntegrationPipeline, group: &[WindowObservation]) -> Result<DetectionResult> {
    let margins = bank_margins(&pipeline.bank, group)?;
    let score = pipeline.score_margins(&margins)?;
    Ok(DetectionResult {
        score,
        detected: score > pipeline.threshold,
        per_shift_margins: margins,
    })
}

/// Scan a long stream: every position p is a pulse-onset hypothesis whose
/// group reads the shift-D window from stream[p−D .. p−D+H).
pub fn sliding_scan(
    pipeline: &IntegrationPipeline,
    stream: &[f64],
    step: usize,
) -> Result<Vec<(usize, DetectionResult)>> {
    if step == 0 {
        return Err(WavedetError::Parameter("scan step must be >= 1".into()));
    }
    let h = pipeline.bank.window_len();
    let dm = pipeline.bank.max_shift();
    if stream.len() < h + dm {
        return Err(WavedetError::Parameter(format!(
            "stream length {} is shorter than window {h} + max shift {dm}",
            stream.len()
        )));
    }
    let positions: Vec<usize> = (dm..=stream.len() - h).step_by(step).collect();
    positions
        .into_par_iter()
        .map(|p| Ok((p, pipeline.score_event(stream, p)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub schema: String,
    pub shifts: Vec<usize>,
    pub wavelet: WaveletConfig,
    pub dataset_seeds: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct NormsFile {
    feature_norm: FeatureNorm,
    score_norm: FeatureNorm,
}

fn bank_model_filename(shift: usize) -> String {
    format!("model_shift{shift}.json")
}

/// Write a self-contained pipeline bundle directory.
///
/// Refuses to overwrite an existing bundle unless `force` is set.  The
/// manifest is written last so a complete bundle is marked by its presence.
pub fn save_pipeline(
    pipeline: &IntegrationPipeline,
    dataset_seeds: &[u64],
    dir: &Path,
    force: bool,
) -> Result<()> {
    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() && !force {
        return Err(WavedetError::Io(std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            format!(
                "pipeline bundle already exists at {} (use force to overwrite)",
                dir.display()
            ),
        )));
    }
    std::fs::create_dir_all(dir)?;
    for (d, model) in pipeline.bank.shifts.iter().zip(pipeline.bank.models.iter()) {
        svm::save_model(model, &dir.join(bank_model_filename(*d)))?;
    }
    svm::save_model(&pipeline.integrator, &dir.join("integrator.json"))?;
    let norms = NormsFile {
        feature_norm: pipeline.bank.feature_norm.clone(),
        score_norm: pipeline.score_norm.clone(),
    };
    std::fs::write(dir.join("norms.json"), serde_json::to_string_pretty(&norms)?)?;
    // Text keeps the -inf sentinel representable; Display round-trips f64.
    std::fs::write(dir.join("threshold.txt"), format!("{}\n", pipeline.threshold))?;
    let manifest = PipelineManifest {
        schema: PIPELINE_SCHEMA.to_string(),
        shifts: pipeline.bank.shifts.clone(),
        wavelet: pipeline.bank.wavelet,
        dataset_seeds: dataset_seeds.to_vec(),
    };
    std::fs::write(manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn load_manifest(dir: &Path) -> Result<PipelineManifest> {
    let manifest: PipelineManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    if manifest.schema != PIPELINE_SCHEMA {
        return Err(WavedetError::Data(format!(
            "unsupported pipeline schema {:?}, expected {PIPELINE_SCHEMA:?}",
            manifest.schema
        )));
    }
    Ok(manifest)
}

/// Load a bundle written by [`save_pipeline`], revalidating every part.
pub fn load_pipeline(dir: &Path) -> Result<IntegrationPipeline> {
    let manifest = load_manifest(dir)?;
    let mut models = Vec::with_capacity(manifest.shifts.len());
    for d in &manifest.shifts {
        models.push(svm::load_model(&dir.join(bank_model_filename(*d)))?);
    }
    let integrator = svm::load_model(&dir.join("integrator.json"))?;
    let norms: NormsFile =
        serde_json::from_str(&std::fs::read_to_string(dir.join("norms.json"))?)?;
    let raw = std::fs::read_to_string(dir.join("threshold.txt"))?;
    let threshold: f64 = raw
        .trim()
        .parse()
        .map_err(|e| WavedetError::Data(format!("bad threshold file: {e}")))?;
    let bank = ShiftBank::new(
        manifest.shifts,
        models,
        norms.feature_norm,
        manifest.wavelet,
    )?;
    IntegrationPipeline::new(bank, integrator, norms.score_norm, threshold)
}
