//! Experiment configuration: one JSON file covering every stage, with
//! field-wise defaults, dotted-path overrides, and fail-fast validation.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};
use wavedet::error::{Result, WavedetError};
use wavedet::signal::{DatasetCounts, NoiseSpec, PulseSpec};
use wavedet::svm::TrainConfig;
use wavedet::wavelet::WaveletConfig;

/// Per-stage SVM penalties and stopping rules.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmStages {
    pub bank: TrainConfig,
    pub integrator: TrainConfig,
}

impl Default for SvmStages {
    fn default() -> Self {
        SvmStages {
            bank: TrainConfig::default(),
            integrator: TrainConfig::default(),
        }
    }
}

/// Monte Carlo sample sizes for the performance curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalKnobs {
    pub n_noise: usize,
    pub n_pulse_per_snr: usize,
}

impl Default for EvalKnobs {
    fn default() -> Self {
        EvalKnobs {
            n_noise: 100_000,
            n_pulse_per_snr: 1000,
        }
    }
}

/// Margin-correlation study: event count and the SNR the margins are
/// sampled at.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrKnobs {
    pub n_events: usize,
    pub snr_db: f64,
}

impl Default for CorrKnobs {
    fn default() -> Self {
        CorrKnobs {
            n_events: 10_000,
            snr_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub pulse: PulseSpec,
    pub noise: NoiseSpec,
    pub shifts: Vec<usize>,
    pub wavelet: WaveletConfig,
    pub svm: SvmStages,
    pub snr_grid: Vec<f64>,
    pub pfa_targets: Vec<f64>,
    pub counts: DatasetCounts,
    /// Master seed for evaluation-time Monte Carlo (curves, correlation,
    /// rates). Dataset generation uses `noise.seed`.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub eval: EvalKnobs,
    pub corr: CorrKnobs,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pulse: PulseSpec::default(),
            noise: NoiseSpec::default(),
            shifts: vec![0, 11, 23, 37, 53],
            wavelet: WaveletConfig::default(),
            svm: SvmStages::default(),
            snr_grid: (0..16).map(|k| -(k as f64)).collect(),
            pfa_targets: vec![1e-1, 1e-2, 1e-3],
            counts: DatasetCounts::default(),
            seed: 1009,
            output_dir: PathBuf::from("wavedet-out"),
            eval: EvalKnobs::default(),
            corr: CorrKnobs::default(),
        }
    }
}

impl ExperimentConfig {
    /// Every nested invariant plus the cross-stage floors, before any file
    /// is touched.
    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        self.noise.validate()?;
        self.wavelet.validate()?;
        self.svm.bank.validate()?;
        self.svm.integrator.validate()?;
        if self.shifts.is_empty() {
            return Err(WavedetError::Config("need at least one shift".into()));
        }
        if !self.shifts.windows(2).all(|w| w[0] < w[1]) {
            return Err(WavedetError::Config(
                "shifts must be strictly increasing".into(),
            ));
        }
        let dm = *self.shifts.last().unwrap();
        if dm >= self.pulse.n_samples {
            return Err(WavedetError::Config(format!(
                "max shift {dm} must be smaller than the window length {}",
                self.pulse.n_samples
            )));
        }
        if self.snr_grid.is_empty() || !self.snr_grid.iter().all(|v| v.is_finite()) {
            return Err(WavedetError::Config(
                "snr_grid must be non-empty and finite".into(),
            ));
        }
        if self.pfa_targets.is_empty() {
            return Err(WavedetError::Config("need at least one P_fa target".into()));
        }
        let mut min_target = f64::INFINITY;
        for &t in &self.pfa_targets {
            if !(t > 0.0 && t <= 1.0) {
                return Err(WavedetError::Config(format!(
                    "P_fa target {t} outside (0, 1]"
                )));
            }
            min_target = min_target.min(t);
        }
        if self.counts.pulse_bank == 0 || self.counts.noise_bank == 0 {
            return Err(WavedetError::Config(
                "bank training needs pulse and noise rows".into(),
            ));
        }
        if self.counts.pulse_integrator == 0 || self.counts.noise_integrator == 0 {
            return Err(WavedetError::Config(
                "integrator training needs pulse and noise rows".into(),
            ));
        }
        let cal_floor = (1.0 / min_target).ceil() as usize;
        if self.counts.noise_calibration < cal_floor {
            return Err(WavedetError::Config(format!(
                "calibrating at P_fa {min_target} needs noise_calibration >= {cal_floor}, \
                 got {}",
                self.counts.noise_calibration
            )));
        }
        let curve_floor = (10.0 / min_target).ceil() as usize;
        if self.eval.n_noise < curve_floor {
            return Err(WavedetError::Config(format!(
                "curves at P_fa {min_target} need eval.n_noise >= {curve_floor}, got {}",
                self.eval.n_noise
            )));
        }
        if self.eval.n_pulse_per_snr == 0 {
            return Err(WavedetError::Config(
                "eval.n_pulse_per_snr must be >= 1".into(),
            ));
        }
        if self.corr.n_events < 2 {
            return Err(WavedetError::Config(
                "correlation needs corr.n_events >= 2".into(),
            ));
        }
        if !self.corr.snr_db.is_finite() {
            return Err(WavedetError::Config("corr.snr_db must be finite".into()));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(WavedetError::Config("output_dir must be non-empty".into()));
        }
        Ok(())
    }
}

/// Overlay `overlay` onto `base`, recursing through objects and replacing
/// scalars and arrays wholesale. A key missing from the base skeleton is an
/// unknown field at any depth, which rejects typos like `pulse.f_strat`.
fn merge_checked(base: &mut Value, overlay: Value, path: &str) -> Result<()> {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let child = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match b.get_mut(&k) {
                    Some(slot) => merge_checked(slot, v, &child)?,
                    None => {
                        return Err(WavedetError::Config(format!(
                            "unknown config field {child:?}"
                        )))
                    }
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

/// `KEY=VALUE` with a dotted KEY becomes a one-branch nested object.
/// VALUE is parsed as JSON when possible, else taken as a string.
fn override_tree(spec: &str) -> Result<Value> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| {
        WavedetError::Config(format!("--set expects KEY=VALUE, got {spec:?}"))
    })?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(WavedetError::Config(format!("--set key {key:?} is malformed")));
    }
    let mut value: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    for seg in key.rsplit('.') {
        let mut obj = serde_json::Map::new();
        obj.insert(seg.to_string(), value);
        value = Value::Object(obj);
    }
    Ok(value)
}

/// Defaults, then the config file (field-wise), then `--set` overrides,
/// then the WAVEDET_SEED environment variable; validated at the end.
pub fn load(path: Option<&Path>, sets: &[String]) -> Result<ExperimentConfig> {
    let mut value = serde_json::to_value(ExperimentConfig::default())
        .map_err(|e| WavedetError::Config(format!("default config: {e}")))?;
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| WavedetError::Config(format!("{}: {e}", p.display())))?;
        merge_checked(&mut value, file, "")?;
    }
    for spec in sets {
        merge_checked(&mut value, override_tree(spec)?, "")?;
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| WavedetError::Config(e.to_string()))?;
    if let Ok(raw) = std::env::var("WAVEDET_SEED") {
        cfg.seed = raw.trim().parse().map_err(|_| {
            WavedetError::Config(format!("WAVEDET_SEED must be a u64, got {raw:?}"))
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}
