//! Acceptance gate: one test per criterion, each printing a single
//! `[A#] PASS — detail` line (visible with `--nocapture`; the test verdict
//! itself carries the result either way).  Criteria share one trained
//! pipeline fixture and one frozen Monte Carlo score set, both seeded.

use rand::Rng;
use std::sync::OnceLock;
use wavedet::detector::{threshold_for_scores, train_bank, train_integrator, IntegrationPipeline, ShiftBank};
use wavedet::error::WavedetError;
use wavedet::eval::{
    clopper_pearson, collect_scheme_scores, complexity_report, correlation_matrix,
    curve_from_scores, pulse_margin_table, shift_labels, SchemeScores,
};
use wavedet::rng::{substream, DOMAIN_GENERIC};
use wavedet::signal::{awgn_into, build_dataset, generate_chirp, DatasetCounts, NoiseSpec, PulseSpec};
use wavedet::svm::{dual_objective, qp, train_with_report, KernelSpec, TrainConfig};
use wavedet::wavelet::{dwt, idwt, WaveletConfig};

const SHIFTS: [usize; 5] = [0, 11, 23, 37, 53];
const SIGMA: f64 = 1.0;
const DATA_SEED: u64 = 7;
const CORR_SEED: u64 = 501;
const EVAL_SEED: u64 = 1009;
const N_NOISE: usize = 100_000;
const N_PULSE_PER_SNR: usize = 1000;

fn snr_grid() -> Vec<f64> {
    (0..16).map(|k| -(k as f64)).collect()
}

struct Fixture {
    bank: ShiftBank,
    integ5: IntegrationPipeline,
    integ3: IntegrationPipeline,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let pulse = PulseSpec::default();
        let counts = DatasetCounts {
            pulse_bank: 6000,
            pulse_integrator: 4000,
            pulse_test: 0,
            noise_bank: 6000,
            noise_integrator: 4000,
            noise_calibration: 0,
            noise_test: 0,
        };
        let dataset = build_dataset(
            &pulse,
            &SHIFTS,
            &snr_grid(),
            &counts,
            &NoiseSpec {
                sigma: SIGMA,
                seed: DATA_SEED,
            },
        )
        .expect("dataset");
        let svm_cfg = TrainConfig::default();
        let wavelet_cfg = WaveletConfig::default();
        let bank = train_bank(&dataset, &SHIFTS, &svm_cfg, &wavelet_cfg).expect("bank");
        let integ5 = train_integrator(&bank, &dataset, &SHIFTS, &KernelSpec::poly2(), &svm_cfg)
            .expect("integ5");
        let integ3 =
            train_integrator(&bank, &dataset, &[0, 11, 23], &KernelSpec::poly2(), &svm_cfg)
                .expect("integ3");
        Fixture {
            bank,
            integ5,
            integ3,
        }
    })
}

fn scheme_scores() -> &'static [SchemeScores] {
    static SCORES: OnceLock<Vec<SchemeScores>> = OnceLock::new();
    SCORES.get_or_init(|| {
        let f = fixture();
        collect_scheme_scores(
            &[("integrated3", &f.integ3), ("integrated5", &f.integ5)],
            &PulseSpec::default(),
            SIGMA,
            &snr_grid(),
            N_NOISE,
            N_PULSE_PER_SNR,
            EVAL_SEED,
        )
        .expect("scheme scores")
    })
}

fn scheme<'a>(scores: &'a [SchemeScores], name: &str) -> &'a SchemeScores {
    scores
        .iter()
        .find(|s| s.name == name)
        .unwrap_or_else(|| panic!("scheme {name} missing"))
}

#[test]
fn a1_wavelet_reconstruction_and_parseval() {
    let cfg = WaveletConfig::default();
    let mut worst_rec = 0.0_f64;
    let mut worst_energy = 0.0_f64;
    for trial in 0..100 {
        let mut rng = substream(0xA1, DOMAIN_GENERIC, trial);
        let mut x = vec![0.0; 1024];
        awgn_into(&mut rng, 1.0, &mut x);
        let pyramid = dwt(&x, &cfg).unwrap();
        let back = idwt(&pyramid, &cfg).unwrap();
        let rec = x
            .iter()
            .zip(back.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ep: f64 = pyramid
            .details
            .iter()
            .flat_map(|d| d.iter())
            .chain(pyramid.approx.iter())
            .map(|v| v * v)
            .sum();
        worst_rec = worst_rec.max(rec);
        worst_energy = worst_energy.max(((ex - ep) / ex).abs());
    }
    assert!(
        worst_rec < 1e-9,
        "[A1] FAIL — reconstruction error {worst_rec:.3e}"
    );
    assert!(
        worst_energy < 1e-9,
        "[A1] FAIL — Parseval relative error {worst_energy:.3e}"
    );
    let flat = dwt(&vec![3.7; 1024], &cfg).unwrap();
    let leak = flat
        .details
        .iter()
        .flat_map(|d| d.iter())
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    assert!(leak < 1e-10, "[A1] FAIL — constant input leaks {leak:.3e}");
    println!(
        "[A1] PASS — reconstruction {worst_rec:.2e}, Parseval {worst_energy:.2e}, \
         constant-input detail leak {leak:.2e} over 100 random signals"
    );
}

#[test]
fn a2_shift_variance_and_dyadic_covariance() {
    let cfg = WaveletConfig::default();
    let pulse = generate_chirp(&PulseSpec::default()).unwrap();

    // an 11-sample window shift is not any circular shift of d4
    let d0 = dwt(&pulse, &cfg).unwrap().details[3].clone();
    let mut win = vec![0.0; 1024];
    win[11..].copy_from_slice(&pulse[..1013]);
    let d11 = dwt(&win, &cfg).unwrap().details[3].clone();
    let unit = |v: &[f64]| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let (u0, u11) = (unit(&d0), unit(&d11));
    let mut min_dist = f64::INFINITY;
    for c in 0..u0.len() {
        let dist: f64 = u11
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = u0[(i + c) % u0.len()];
                (v - w) * (v - w)
            })
            .sum::<f64>()
            .sqrt();
        min_dist = min_dist.min(dist);
    }
    assert!(
        min_dist > 0.01,
        "[A2] FAIL — d4 of the shifted window realigns to distance {min_dist:.4}"
    );

    // dyadic covariance: a 16-sample circular input shift moves d4 by 1 tap
    let mut rotated = pulse.clone();
    rotated.rotate_right(16);
    let da = dwt(&pulse, &cfg).unwrap().details[3].clone();
    let db = dwt(&rotated, &cfg).unwrap().details[3].clone();
    let mut expected = da.clone();
    expected.rotate_right(1);
    let cov_err = expected
        .iter()
        .zip(db.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(
        cov_err < 1e-12,
        "[A2] FAIL — dyadic covariance error {cov_err:.3e}"
    );
    println!(
        "[A2] PASS — min normalized d4 distance {min_dist:.4} (> 0.01), \
         dyadic covariance exact to {cov_err:.2e}"
    );
}

/// Labeled points that a reference hyperplane separates with a real margin;
/// the huge-penalty instances need a finite hard-margin optimum.
fn separable_instance(
    rng: &mut impl rand::Rng,
    n: usize,
    dim: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    loop {
        let w: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let b: f64 = rng.gen::<f64>() - 0.5;
        let mut samples = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            loop {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
                let m: f64 = x.iter().zip(w.iter()).map(|(a, c)| a * c).sum::<f64>() + b;
                if m.abs() > 0.3 {
                    labels.push(m.signum());
                    samples.push(x);
                    break;
                }
            }
        }
        if labels.iter().any(|&l| l > 0.0) && labels.iter().any(|&l| l < 0.0) {
            return (samples, labels);
        }
    }
}

fn overlapping_instance(
    rng: &mut impl rand::Rng,
    n: usize,
    dim: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    loop {
        let mut samples = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let l = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let x: Vec<f64> = (0..dim)
                .map(|d| {
                    let center = if d == 0 { 0.5 * l } else { 0.0 };
                    center + 0.6 * (rng.gen::<f64>() * 2.0 - 1.0)
                })
                .collect();
            samples.push(x);
            labels.push(l);
        }
        if labels.iter().any(|&l| l > 0.0) && labels.iter().any(|&l| l < 0.0) {
            return (samples, labels);
        }
    }
}

#[test]
fn a3_smo_matches_qp_oracle() {
    let ratios = [1.0, 4.0, 1e6];
    let mut max_gap = f64::NEG_INFINITY;
    for trial in 0..50u64 {
        let mut rng = substream(0xA3, DOMAIN_GENERIC, trial);
        let n = 4 + (rng.gen::<u64>() % 17) as usize; // 4..=20
        let dim = 2 + (rng.gen::<u64>() % 4) as usize; // 2..=5
        let ratio = ratios[(trial % 3) as usize];
        let (samples, labels) = if ratio > 100.0 {
            separable_instance(&mut rng, n, dim)
        } else {
            overlapping_instance(&mut rng, n, dim)
        };
        let kernel = if trial % 2 == 0 {
            KernelSpec::Linear
        } else {
            KernelSpec::poly2()
        };
        let config = TrainConfig {
            c_plus: 1.0,
            c_minus: ratio,
            kkt_tol: 1e-8,
            max_passes: 100_000,
        };
        let (_, report) =
            train_with_report(&samples, &labels, &kernel, &config, trial).unwrap();
        let w_smo = dual_objective(&samples, &labels, &report.alphas, &kernel).unwrap();

        // KKT: equality constraint and per-class boxes
        let eq: f64 = report
            .alphas
            .iter()
            .zip(labels.iter())
            .map(|(a, y)| a * y)
            .sum();
        assert!(
            eq.abs() < 1e-9,
            "[A3] FAIL — trial {trial}: dual equality residue {eq:.3e}"
        );
        for (a, y) in report.alphas.iter().zip(labels.iter()) {
            let c = if *y > 0.0 { config.c_plus } else { config.c_minus };
            assert!(
                *a >= -1e-9 && *a <= c + 1e-9,
                "[A3] FAIL — trial {trial}: alpha {a} outside [0, {c}]"
            );
        }

        let boxes: Vec<f64> = labels
            .iter()
            .map(|&y| if y > 0.0 { config.c_plus } else { config.c_minus })
            .collect();
        let oracle = qp::solve_dual(&samples, &labels, &boxes, &kernel).unwrap();
        let w_ref = dual_objective(&samples, &labels, &oracle, &kernel).unwrap();
        let gap = (w_ref - w_smo).abs();
        max_gap = max_gap.max(gap);
        assert!(
            gap < 1e-6,
            "[A3] FAIL — trial {trial} (n={n}, dim={dim}, ratio={ratio}): \
             SMO objective {w_smo} vs oracle {w_ref}"
        );
    }
    println!(
        "[A3] PASS — 50 instances, max |SMO − oracle| objective gap {max_gap:.2e} (< 1e-6), \
         KKT equality and boxes hold"
    );
}

#[test]
fn a4_threshold_calibration_coverage() {
    let target = 1e-3;
    let mut cal = vec![0.0; 1_000_000];
    let mut rng = substream(0xA4, DOMAIN_GENERIC, 0);
    awgn_into(&mut rng, 1.0, &mut cal);
    let t = threshold_for_scores(&cal, target).unwrap();
    assert!(
        (3.04..=3.14).contains(&t),
        "[A4] FAIL — threshold {t} outside [3.04, 3.14]"
    );

    let held_n = 20_000usize;
    let mut covered = 0;
    for rep in 0..20u64 {
        let mut cal = vec![0.0; 1_000_000];
        let mut rng = substream(0xA4C0, DOMAIN_GENERIC, rep);
        awgn_into(&mut rng, 1.0, &mut cal);
        let t = threshold_for_scores(&cal, target).unwrap();

        let mut held = vec![0.0; held_n];
        let mut rng = substream(0xA4BE, DOMAIN_GENERIC, rep);
        awgn_into(&mut rng, 1.0, &mut held);
        let alarms = held.iter().filter(|&&s| s > t).count() as u64;
        let (lo, hi) = clopper_pearson(alarms, held_n as u64, 0.95).unwrap();
        if lo <= target && target <= hi {
            covered += 1;
        }
    }
    assert!(
        covered >= 18,
        "[A4] FAIL — target covered in only {covered}/20 repetitions"
    );
    println!(
        "[A4] PASS — calibrated threshold {t:.4} in [3.04, 3.14]; \
         held-out interval covered the target in {covered}/20 repetitions"
    );
}

// Reference correlation values for the five-shift margin study; measured
// deltas against these are reported for information only, never asserted.
const CORR_REFERENCE: [[f64; 5]; 5] = [
    [1.0000, 0.9123, 0.9573, 0.9209, 0.9201],
    [0.9123, 1.0000, 0.8977, 0.9131, 0.9171],
    [0.9573, 0.8977, 1.0000, 0.9474, 0.9449],
    [0.9209, 0.9131, 0.9474, 1.0000, 0.9951],
    [0.9201, 0.9171, 0.9449, 0.9951, 1.0000],
];

#[test]
fn a5_margin_correlation_structure() {
    let f = fixture();
    let table = pulse_margin_table(&f.bank, &PulseSpec::default(), SIGMA, 0.0, 10_000, CORR_SEED)
        .unwrap();
    let labels = shift_labels(&f.bank.shifts);
    // construction re-validates symmetry, unit diagonal and PSD
    let corr = correlation_matrix(&table, &labels).unwrap();

    let mut min_off = f64::INFINITY;
    for i in 0..5 {
        for j in (i + 1)..5 {
            let v = corr.entries[i][j];
            assert!(
                v > 0.5 && v < 1.0,
                "[A5] FAIL — entry ({},{}) = {v:.4} outside (0.5, 1.0)",
                labels[i],
                labels[j]
            );
            min_off = min_off.min(v);
        }
    }
    let ((bi, bj), max_off) = corr.max_off_diagonal().unwrap();
    assert!(
        (bi, bj) == (3, 4),
        "[A5] FAIL — largest off-diagonal at ({},{}) = {max_off:.4}, expected (shift37, shift53)",
        labels[bi],
        labels[bj]
    );

    let mut max_delta = 0.0_f64;
    let mut within = 0;
    for i in 0..5 {
        for j in (i + 1)..5 {
            let d = (corr.entries[i][j] - CORR_REFERENCE[i][j]).abs();
            max_delta = max_delta.max(d);
            if d <= 0.10 {
                within += 1;
            }
        }
    }
    println!(
        "[A5] PASS — off-diagonals in ({min_off:.4}, {max_off:.4}), maximum at (shift37, shift53); \
         informational: {within}/10 reference entries within ±0.10, max |Δ| = {max_delta:.4}"
    );
}

#[test]
fn a6_complete_pulse_scheme_dominates() {
    let scores = scheme_scores();
    let targets = [1e-1, 1e-2, 1e-3];
    let curve = curve_from_scores(scores, &snr_grid(), &targets).unwrap();
    let mut summary = Vec::new();
    for &target in &targets {
        let pd0 = curve.mean_pd("shift0", target).unwrap();
        let mut best_rival = f64::NEG_INFINITY;
        for d in [11, 23, 37, 53] {
            let pd = curve.mean_pd(&format!("shift{d}"), target).unwrap();
            best_rival = best_rival.max(pd);
            assert!(
                pd0 >= pd - 0.01,
                "[A6] FAIL — at P_fa {target}: shift0 mean P_d {pd0:.4} < shift{d} {pd:.4} - 0.01"
            );
        }
        summary.push(format!(
            "P_fa {target}: shift0 {pd0:.4} vs best rival {best_rival:.4}"
        ));
    }
    println!("[A6] PASS — {}", summary.join("; "));
}

#[test]
fn a7_integration_gain() {
    let scores = scheme_scores();
    let target = 1e-3;
    let curve = curve_from_scores(scores, &snr_grid(), &[1e-1, 1e-2, target]).unwrap();
    curve.validate_monotone().unwrap();

    let pd0 = curve.mean_pd("shift0", target).unwrap();
    let pd3 = curve.mean_pd("integrated3", target).unwrap();
    let pd5 = curve.mean_pd("integrated5", target).unwrap();
    assert!(
        pd5 >= pd0 + 0.01,
        "[A7] FAIL — integrated5 mean P_d {pd5:.4} < shift0 {pd0:.4} + 0.01"
    );
    assert!(
        pd5 >= pd3,
        "[A7] FAIL — integrated5 mean P_d {pd5:.4} < integrated3 {pd3:.4}"
    );

    // qualitative false-alarm upgrade: matching the 0-shift scheme's mean
    // P_d, the integrated scheme must get by with at most a third of the
    // false alarms
    let s5 = scheme(scores, "integrated5");
    let mut desc = s5.noise.clone();
    desc.sort_by(|a, b| b.total_cmp(a));
    let pd_at_rank = |k: usize| s5.mean_pd_at(desc[k - 1]);
    assert!(
        pd_at_rank(desc.len()) >= pd0,
        "[A7] FAIL — integrated5 cannot reach the 0-shift mean P_d at any threshold"
    );
    let (mut lo, mut hi) = (1usize, desc.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pd_at_rank(mid) >= pd0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let matched_threshold = desc[lo - 1];
    let achieved_pfa =
        s5.noise.iter().filter(|&&v| v > matched_threshold).count() as f64 / desc.len() as f64;
    assert!(
        achieved_pfa <= target / 3.0,
        "[A7] FAIL — matched-P_d false-alarm rate {achieved_pfa:.2e} exceeds {:.2e}",
        target / 3.0
    );
    println!(
        "[A7] PASS — at P_fa {target}: integrated5 {pd5:.4} ≥ shift0 {pd0:.4} + 0.01, \
         ≥ integrated3 {pd3:.4}; curves monotone; matched-P_d false-alarm rate \
         {achieved_pfa:.2e} ≤ {:.2e}",
        target / 3.0
    );
}

#[test]
fn a8_complexity_accounting() {
    let f = fixture();
    let cfg = WaveletConfig::default();
    let lengths = [256usize, 512, 1024, 2048];
    let report = complexity_report(&cfg, &lengths, &f.bank, &f.integ5).unwrap();

    let ops_at = |h: usize| {
        report
            .rows
            .iter()
            .find(|r| r.window_len == h)
            .unwrap()
            .wavelet_ops
    };
    assert_eq!(ops_at(1024), 19200, "[A8] FAIL — H=1024 count");
    // closed form: W · 2H · (1 - 2^-K) per window
    for &h in &lengths {
        let expected = (10.0 * 2.0 * h as f64 * (1.0 - 0.0625)) as u64;
        assert_eq!(ops_at(h), expected, "[A8] FAIL — count at H={h}");
    }
    let per_sample = report.rows[0].ops_per_sample;
    for row in &report.rows {
        assert!(
            (row.ops_per_sample - per_sample).abs() < 1e-12,
            "[A8] FAIL — ops/sample varies with H"
        );
    }
    assert_eq!(report.bank_ops, 320, "[A8] FAIL — bank multiply-adds");
    let ratio = report.dominance_ratio();
    assert!(
        ratio >= 10.0,
        "[A8] FAIL — wavelet/downstream ratio {ratio:.2} below 10"
    );
    println!(
        "[A8] PASS — 19200 multiply-adds at H=1024, {per_sample} ops/sample constant across H, \
         bank 320 ops, wavelet dominates downstream by {ratio:.1}×"
    );
}

/// The curve invariant the criteria quote alongside A6: every incomplete
/// scheme sits at or below the complete-pulse scheme, already covered, and
/// calibration floors reject undersized noise samples end to end.
#[test]
fn curve_rejects_undersized_noise_sample() {
    let scores = scheme_scores();
    let tiny: Vec<SchemeScores> = scores
        .iter()
        .map(|s| SchemeScores {
            name: s.name.clone(),
            noise: s.noise[..100].to_vec(),
            pulse_per_snr: s.pulse_per_snr.clone(),
        })
        .collect();
    match curve_from_scores(&tiny, &snr_grid(), &[1e-3]) {
        Err(WavedetError::Calibration {
            required,
            available,
            ..
        }) => {
            assert_eq!(required, 10_000);
            assert_eq!(available, 100);
        }
        other => panic!("expected a calibration error, got {other:?}"),
    }
}
