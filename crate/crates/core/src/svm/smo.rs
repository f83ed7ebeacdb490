//! Sequential minimal optimization for the two-fold-penalty dual.
//!
//! Pair selection is the max-violating-pair rule: the index sets
//!
//!   I_up  = {k : (y_k = +1 and α_k < C_k) or (y_k = -1 and α_k > 0)}
//!   I_low = {k : (y_k = +1 and α_k > 0) or (y_k = -1 and α_k < C_k)}
//!
//! are scanned for i = argmax_{I_up}(-E_k) and j = argmin_{I_low}(-E_k),
//! where E_k = u_k - y_k and u_k = Σ_m α_m y_m K(x_m, x_k).  The pair's
//! KKT violation is (-E_i) - (-E_j); the solver stops when it drops to
//! kkt_tol.  Selection and updates involve no randomness, so training is
//! bit-reproducible for a given input order.

use super::{kernel_eval, KernelSpec, SvmModel, TrainConfig, MODEL_SCHEMA};
use crate::error::{Result, WavedetError};
use std::collections::{HashMap, VecDeque};

/// Diagnostics from a training run, aligned with the input sample order.
#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Final dual variables, one per training sample (zeros included).
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Number of pair updates performed.
    pub iterations: u64,
    /// Worst KKT violation at exit.
    pub violation: f64,
}

const CACHE_BYTES: usize = 256 << 20;
/// Alphas closer than this to a box edge are snapped onto it.
const SNAP: f64 = 1e-10;

struct RowCache<'a> {
    samples: &'a [Vec<f64>],
    kernel: KernelSpec,
    rows: HashMap<usize, Vec<f64>>,
    order: VecDeque<usize>,
    cap: usize,
}

impl<'a> RowCache<'a> {
    fn new(samples: &'a [Vec<f64>], kernel: KernelSpec) -> Self {
        let row_bytes = 8 * samples.len().max(1);
        let cap = (CACHE_BYTES / row_bytes).max(2);
        RowCache {
            samples,
            kernel,
            rows: HashMap::new(),
            order: VecDeque::new(),
            cap,
        }
    }

    /// Make row `i` resident without evicting `keep`.
    fn ensure(&mut self, i: usize, keep: usize) -> Result<()> {
        if self.rows.contains_key(&i) {
            return Ok(());
        }
        let xi = &self.samples[i];
        let mut row = Vec::with_capacity(self.samples.len());
        for x in self.samples {
            row.push(kernel_eval(&self.kernel, xi, x)?);
        }
        while self.rows.len() >= self.cap {
            match self.order.pop_front() {
                Some(old) if old == keep => self.order.push_back(old),
                Some(old) => {
                    self.rows.remove(&old);
                }
                None => break,
            }
        }
        self.rows.insert(i, row);
        self.order.push_back(i);
        Ok(())
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[&i]
    }
}

fn validate_inputs(samples: &[Vec<f64>], labels: &[f64], config: &TrainConfig) -> Result<()> {
    config.validate()?;
    if samples.len() != labels.len() {
        return Err(WavedetError::Parameter(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    if samples.len() < 2 {
        return Err(WavedetError::Training(
            "training needs at least two samples".into(),
        ));
    }
    let dim = samples[0].len();
    if dim == 0 {
        return Err(WavedetError::Parameter("empty feature vectors".into()));
    }
    for (idx, s) in samples.iter().enumerate() {
        if s.len() != dim {
            return Err(WavedetError::Parameter(format!(
                "sample {idx} has dimension {} but sample 0 has {dim}",
                s.len()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(WavedetError::Parameter(format!(
                "sample {idx} contains a non-finite feature"
            )));
        }
    }
    for (idx, &y) in labels.iter().enumerate() {
        if y != 1.0 && y != -1.0 {
            return Err(WavedetError::Parameter(format!(
                "label {idx} is {y}, expected +1 or -1"
            )));
        }
    }
    let pos = labels.iter().filter(|&&y| y > 0.0).count();
    if pos == 0 || pos == labels.len() {
        return Err(WavedetError::Training(
            "training set contains a single class".into(),
        ));
    }
    Ok(())
}

/// Train and keep per-sample diagnostics.  The `seed` is accepted for
/// interface stability; the deterministic pair rule never consumes it.
pub fn train_with_report(
    samples: &[Vec<f64>],
    labels: &[f64],
    kernel: &KernelSpec,
    config: &TrainConfig,
    _seed: u64,
) -> Result<(SvmModel, TrainReport)> {
    kernel.validate()?;
    validate_inputs(samples, labels, config)?;
    let n = samples.len();
    let box_of = |k: usize| if labels[k] > 0.0 { config.c_plus } else { config.c_minus };

    let mut diag = Vec::with_capacity(n);
    for s in samples {
        diag.push(kernel_eval(kernel, s, s)?);
    }

    let mut cache = RowCache::new(samples, *kernel);
    let mut alphas = vec![0.0_f64; n];
    let mut u = vec![0.0_f64; n]; // Σ α y K, bias-free margin
    let mut iterations = 0_u64;
    let max_iters = (config.max_passes as u128).saturating_mul(n as u128);

    let (bias, violation) = loop {
        // Max-violating pair over the current gradient.
        let mut up_best = f64::NEG_INFINITY;
        let mut low_best = f64::INFINITY;
        let mut i_sel = usize::MAX;
        let mut j_sel = usize::MAX;
        for k in 0..n {
            let neg_e = labels[k] - u[k];
            let positive = labels[k] > 0.0;
            let a = alphas[k];
            let c = box_of(k);
            if (positive && a < c) || (!positive && a > 0.0) {
                if neg_e > up_best {
                    up_best = neg_e;
                    i_sel = k;
                }
            }
            if (positive && a > 0.0) || (!positive && a < c) {
                if neg_e < low_best {
                    low_best = neg_e;
                    j_sel = k;
                }
            }
        }
        let violation = up_best - low_best;
        if !(violation > config.kkt_tol) || i_sel == j_sel {
            // Converged.  Bias from strictly interior vectors when any
            // exist, else the midpoint of the feasible interval.
            let mut sum = 0.0;
            let mut count = 0_usize;
            for k in 0..n {
                if alphas[k] > 0.0 && alphas[k] < box_of(k) {
                    sum += labels[k] - u[k];
                    count += 1;
                }
            }
            let bias = if count > 0 {
                sum / count as f64
            } else {
                0.5 * (up_best + low_best)
            };
            break (bias, violation.max(f64::NEG_INFINITY));
        }
        if iterations as u128 >= max_iters {
            return Err(WavedetError::Training(format!(
                "SMO exceeded {max_iters} pair updates (KKT violation still {violation:.3e})"
            )));
        }

        let (i, j) = (i_sel, j_sel);
        cache.ensure(i, usize::MAX)?;
        cache.ensure(j, i)?;

        // Move along α_i += y_i t, α_j -= y_j t, which keeps Σαy fixed.
        // dW/dt = E_j - E_i > 0 and d²W/dt² = -(K_ii + K_jj - 2K_ij).
        let kij = cache.row(i)[j];
        let eta = diag[i] + diag[j] - 2.0 * kij;
        let slope = violation; // E_j - E_i
        let t_hi_i = if labels[i] > 0.0 { box_of(i) - alphas[i] } else { alphas[i] };
        let t_hi_j = if labels[j] > 0.0 { alphas[j] } else { box_of(j) - alphas[j] };
        let t_max = t_hi_i.min(t_hi_j);
        let t = if eta > 1e-12 { (slope / eta).min(t_max) } else { t_max };

        let new_i = alphas[i] + labels[i] * t;
        let new_j = alphas[j] - labels[j] * t;
        alphas[i] = snap_to_box(new_i, box_of(i));
        alphas[j] = snap_to_box(new_j, box_of(j));

        let (ri, rj) = (cache.row(i), cache.row(j));
        for k in 0..n {
            u[k] += t * (ri[k] - rj[k]);
        }
        iterations += 1;
    };

    let mut coefficients = Vec::new();
    let mut support_vectors = Vec::new();
    for k in 0..n {
        if alphas[k] > 0.0 {
            coefficients.push(alphas[k] * labels[k]);
            support_vectors.push(samples[k].clone());
        }
    }
    // The box keeps each |coefficient| within its class penalty; the
    // snapped alphas satisfy the dual equality to working precision.
    let model = SvmModel {
        schema: MODEL_SCHEMA.to_string(),
        kernel: *kernel,
        feature_dim: samples[0].len(),
        bias,
        coefficients,
        support_vectors,
    };
    model.validate()?;
    Ok((
        model,
        TrainReport {
            alphas,
            bias,
            iterations,
            violation,
        },
    ))
}

fn snap_to_box(a: f64, c: f64) -> f64 {
    let tol = SNAP * c.max(1.0);
    if a < tol {
        0.0
    } else if a > c - tol {
        c
    } else {
        a
    }
}

/// Train a soft-margin SVM with independent class penalties.
pub fn train(
    samples: &[Vec<f64>],
    labels: &[f64],
    kernel: &KernelSpec,
    config: &TrainConfig,
    seed: u64,
) -> Result<SvmModel> {
    Ok(train_with_report(samples, labels, kernel, config, seed)?.0)
}
