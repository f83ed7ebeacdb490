//! Reference solver for the SVM dual, used to verify the SMO trainer.
//!
//! Maximizes W(α) = Σα − ½ΣΣ ααyyK over the box 0 ≤ αᵢ ≤ Cᵢ intersected
//! with the hyperplane Σ αᵢyᵢ = 0, by projected gradient ascent with a
//! fixed 1/L step.  Each projection is solved exactly (to bisection
//! precision) in the multiplier λ of the equality constraint.  It is slow
//! and simple on purpose: no working sets, no caching, no shortcuts —
//! just a different algorithm arriving at the same optimum.

use super::{kernel_eval, KernelSpec};
use crate::error::{Result, WavedetError};

/// Euclidean projection of `v` onto {0 ≤ β ≤ boxes, Σ βᵢyᵢ = 0}.
///
/// The KKT form is βᵢ = clip(vᵢ − λyᵢ), where φ(λ) = Σ yᵢβᵢ(λ) is
/// non-increasing, so λ is found by bisection.
fn project(v: &[f64], labels: &[f64], boxes: &[f64]) -> Vec<f64> {
    let phi = |lambda: f64| -> f64 {
        v.iter()
            .zip(labels.iter().zip(boxes.iter()))
            .map(|(&vi, (&yi, &ci))| yi * (vi - lambda * yi).clamp(0.0, ci))
            .sum()
    };
    let span = v
        .iter()
        .map(|x| x.abs())
        .chain(boxes.iter().copied())
        .fold(1.0_f64, f64::max);
    let mut lo = -2.0 * span;
    let mut hi = 2.0 * span;
    debug_assert!(phi(lo) >= 0.0 && phi(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    v.iter()
        .zip(labels.iter().zip(boxes.iter()))
        .map(|(&vi, (&yi, &ci))| (vi - lambda * yi).clamp(0.0, ci))
        .collect()
}

/// Solve the dual to high accuracy and return the optimal alphas.
///
/// `boxes[i]` is the upper bound for αᵢ (the class penalty of sample i).
pub fn solve_dual(
    samples: &[Vec<f64>],
    labels: &[f64],
    boxes: &[f64],
    kernel: &KernelSpec,
) -> Result<Vec<f64>> {
    let n = samples.len();
    if labels.len() != n || boxes.len() != n {
        return Err(WavedetError::Parameter(
            "samples, labels and boxes must have equal length".into(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // Dense Gram matrix; this solver is only meant for small instances.
    let mut q = vec![vec![0.0_f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let k = kernel_eval(kernel, &samples[i], &samples[j])?
                * labels[i]
                * labels[j];
            q[i][j] = k;
            q[j][i] = k;
        }
    }
    // λ_max(Q) ≤ trace(Q) for PSD Q gives a safe 1/L step.
    let trace: f64 = (0..n).map(|i| q[i][i]).sum();
    let step = 1.0 / trace.max(1e-12);

    let mut alpha = project(&vec![0.0; n], labels, boxes);
    let mut best = f64::NEG_INFINITY;
    let mut stalled = 0_u32;
    for _ in 0..400_000_u32 {
        // gradient of W: 1 - (Qα)ᵢ
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let g: f64 = 1.0 - q[i].iter().zip(alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
            v.push(alpha[i] + step * g);
        }
        alpha = project(&v, labels, boxes);

        let mut w: f64 = alpha.iter().sum();
        for i in 0..n {
            let qa: f64 = q[i].iter().zip(alpha.iter()).map(|(a, b)| a * b).sum();
            w -= 0.5 * alpha[i] * qa;
        }
        if w > best + 1e-16 {
            best = w;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 300 {
                break;
            }
        }
    }
    Ok(alpha)
}
