//! Pulsed-signal detection in white Gaussian noise with a wavelet
//! front end and a two-stage SVM back end.
//!
//! The processing chain, in the order the modules implement it:
//!
//! 1. [`signal`] — chirp pulse synthesis, AWGN, labelled dataset
//!    generation with deterministic per-event RNG substreams.
//! 2. [`wavelet`] — periodic Daubechies DWT pyramid; the level-4
//!    detail band is the feature extractor.
//! 3. [`svm`] — linear and low-degree polynomial SVMs trained by
//!    sequential minimal optimization with class-weighted penalties.
//! 4. [`detector`] — a bank of linear detectors at staggered window
//!    shifts, a polynomial integration stage over their margins, CFAR
//!    threshold calibration, and the serialized pipeline bundle.
//! 5. [`eval`] — Monte Carlo P_d/P_fa estimation with exact binomial
//!    intervals, margin correlation tables, performance curves, and
//!    multiply-add complexity accounting.
//!
//! All randomness flows from one `u64` seed through keyed substreams
//! ([`rng`]), so every dataset, trained model, and Monte Carlo figure
//! is bit-reproducible across runs and thread counts.

pub mod detector;
pub mod error;
pub mod eval;
pub mod rng;
pub mod signal;
pub mod svm;
pub mod wavelet;

pub use detector::{
    bank_margins, calibrate_threshold, detect, load_pipeline, save_pipeline, sliding_scan,
    train_bank, train_integrator, DetectionResult, FeatureNorm, IntegrationPipeline, ShiftBank,
};
pub use error::{Result, WavedetError};
pub use eval::{
    clopper_pearson, collect_scheme_scores, complexity_report, correlation_matrix, curve_from_scores,
    estimate_rates, performance_curve, ComplexityReport, CorrelationMatrix, PerformanceCurve,
    RatesEstimate, SchemeScores,
};
pub use signal::{build_dataset, generate_chirp, Dataset, DatasetCounts, NoiseSpec, PulseSpec};
pub use svm::{train, KernelSpec, SvmModel, TrainConfig};
pub use wavelet::{dwt, idwt, WaveletConfig};
