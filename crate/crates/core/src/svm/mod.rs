//! Soft-margin SVMs with independent per-class penalties.
//!
//! The trainer lives in [`smo`]; [`qp`] holds a slow projected-gradient
//! solver of the same dual used to cross-check the trainer.

pub mod qp;
mod smo;

pub use smo::{train, train_with_report, TrainReport};

use crate::error::{Result, WavedetError};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_SCHEMA: &str = "wavedet-svm/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Poly { degree: u32, offset: f64 },
}

impl KernelSpec {
    pub fn poly2() -> Self {
        KernelSpec::Poly {
            degree: 2,
            offset: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelSpec::Poly { degree, offset } = self {
            if *degree < 1 {
                return Err(WavedetError::Parameter("poly degree must be >= 1".into()));
            }
            if !(*offset > 0.0) {
                return Err(WavedetError::Parameter(
                    "inhomogeneous polynomial kernel needs offset > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// K(x, y).
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(WavedetError::Parameter(format!(
            "kernel dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    spec.validate()?;
    let dot: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    Ok(match spec {
        KernelSpec::Linear => dot,
        KernelSpec::Poly { degree, offset } => (dot + offset).powi(*degree as i32),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Penalty for the +1 (pulse) class.
    pub c_plus: f64,
    /// Penalty for the -1 (noise) class.
    pub c_minus: f64,
    /// Stop when the worst KKT violation is below this.
    pub kkt_tol: f64,
    /// Cap on pair updates, in units of rounds-per-sample.
    pub max_passes: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_plus > 0.0 && self.c_minus > 0.0) {
            return Err(WavedetError::Parameter(
                "penalties c_plus and c_minus must be positive".into(),
            ));
        }
        if !(self.kkt_tol > 0.0) {
            return Err(WavedetError::Parameter("kkt_tol must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(WavedetError::Parameter("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c_plus: 1.0,
            c_minus: 4.0,
            kkt_tol: 1e-3,
            max_passes: 10_000,
        }
    }
}

/// Trained model: only the vectors with α > 0 are kept, and each
/// coefficient is αᵢ·yᵢ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub schema: String,
    pub kernel: KernelSpec,
    pub feature_dim: usize,
    pub bias: f64,
    pub coefficients: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
}

impl SvmModel {
    pub fn validate(&self) -> Result<()> {
        if self.schema != MODEL_SCHEMA {
            return Err(WavedetError::Data(format!(
                "unsupported model schema {:?}, expected {MODEL_SCHEMA:?}",
                self.schema
            )));
        }
        self.kernel.validate()?;
        if self.coefficients.len() != self.support_vectors.len() {
            return Err(WavedetError::Data(
                "coefficient / support-vector count mismatch".into(),
            ));
        }
        if self
            .support_vectors
            .iter()
            .any(|sv| sv.len() != self.feature_dim)
        {
            return Err(WavedetError::Data("support vector dimension mismatch".into()));
        }
        if !self.bias.is_finite()
            || self.coefficients.iter().any(|c| !c.is_finite())
            || self
                .support_vectors
                .iter()
                .any(|sv| sv.iter().any(|v| !v.is_finite()))
        {
            return Err(WavedetError::Data("non-finite model values".into()));
        }
        // dual equality: Σ αᵢyᵢ is the plain sum of signed coefficients
        let eq: f64 = self.coefficients.iter().sum();
        if eq.abs() > 1e-6 {
            return Err(WavedetError::Invariant(format!(
                "dual equality violated: sum of signed coefficients = {eq}"
            )));
        }
        Ok(())
    }

    /// For a linear kernel, the expansion collapses to one weight vector.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != KernelSpec::Linear {
            return None;
        }
        let mut w = vec![0.0; self.feature_dim];
        for (c, sv) in self.coefficients.iter().zip(self.support_vectors.iter()) {
            for (wk, v) in w.iter_mut().zip(sv.iter()) {
                *wk += c * v;
            }
        }
        Some(w)
    }
}

/// f(x) = Σᵢ coefᵢ·K(svᵢ, x) + b — the "smooth output".
pub fn decision_value(model: &SvmModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.feature_dim {
        return Err(WavedetError::Parameter(format!(
            "feature dimension {} does not match model dimension {}",
            x.len(),
            model.feature_dim
        )));
    }
    let mut f = model.bias;
    for (c, sv) in model.coefficients.iter().zip(model.support_vectors.iter()) {
        f += c * kernel_eval(&model.kernel, sv, x)?;
    }
    Ok(f)
}

/// Strict inequality: ties go to the not-detected side.
pub fn classify(model: &SvmModel, x: &[f64], threshold: f64) -> Result<bool> {
    Ok(decision_value(model, x)? > threshold)
}

/// W(α) = Σαᵢ − ½ΣΣ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ).
pub fn dual_objective(
    samples: &[Vec<f64>],
    labels: &[f64],
    alphas: &[f64],
    kernel: &KernelSpec,
) -> Result<f64> {
    if samples.len() != labels.len() || samples.len() != alphas.len() {
        return Err(WavedetError::Parameter(format!(
            "size mismatch: {} samples, {} labels, {} alphas",
            samples.len(),
            labels.len(),
            alphas.len()
        )));
    }
    let mut obj: f64 = alphas.iter().sum();
    for i in 0..samples.len() {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..samples.len() {
            if alphas[j] == 0.0 {
                continue;
            }
            let k = kernel_eval(kernel, &samples[i], &samples[j])?;
            obj -= 0.5 * alphas[i] * alphas[j] * labels[i] * labels[j] * k;
        }
    }
    Ok(obj)
}

pub fn save_model(model: &SvmModel, path: &Path) -> Result<()> {
    model.validate()?;
    std::fs::write(path, serde_json::to_string_pretty(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SvmModel> {
    let model: SvmModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    model.validate()?;
    Ok(model)
}
