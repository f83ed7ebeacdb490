//! The four subcommands: gen, train, eval, corr.

use crate::config::ExperimentConfig;
use rayon::prelude::*;
use std::path::PathBuf;
use wavedet::detector::{
    calibrate_threshold, load_pipeline, save_pipeline, threshold_for_scores, train_bank,
    train_integrator, IntegrationPipeline,
};
use wavedet::error::{Result, WavedetError};
use wavedet::eval::{
    clopper_pearson, collect_scheme_scores, complexity_report, correlation_matrix,
    curve_from_scores, pulse_margin_table, shift_labels, write_corr_csv, write_curves_csv,
    CorrelationMatrix, RatesEstimate, SchemeScores, RATES_SCHEMA,
};
use wavedet::rng::{substream_seed, DOMAIN_GENERIC};
use wavedet::signal::{build_dataset, read_dataset, write_dataset, Partition};
use wavedet::svm::KernelSpec;

fn dataset_paths(cfg: &ExperimentConfig) -> (PathBuf, PathBuf) {
    (
        cfg.output_dir.join("dataset.bin"),
        cfg.output_dir.join("dataset.json"),
    )
}

fn bundle_dir(cfg: &ExperimentConfig, size: usize) -> PathBuf {
    cfg.output_dir.join(format!("pipeline-integ{size}"))
}

/// The reduced integrator covers the leading half of the shift list,
/// rounded up: five shifts give the first three.
fn sub_shifts(shifts: &[usize]) -> Vec<usize> {
    shifts[..shifts.len().div_ceil(2)].to_vec()
}

pub fn cmd_gen(cfg: &ExperimentConfig, force: bool) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let (bin, sidecar) = dataset_paths(cfg);
    if !force {
        for p in [&bin, &sidecar] {
            if p.exists() {
                return Err(WavedetError::Io(std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    format!("{} exists; pass --force to regenerate", p.display()),
                )));
            }
        }
    }
    let ds = build_dataset(&cfg.pulse, &cfg.shifts, &cfg.snr_grid, &cfg.counts, &cfg.noise)?;
    write_dataset(&ds, &bin, &sidecar)?;
    let c = &cfg.counts;
    println!(
        "wrote {} ({} streams of {} samples) + {}",
        bin.display(),
        ds.streams.len(),
        ds.meta.stream_len,
        sidecar.display()
    );
    println!("  bank_train:       {} pulse / {} noise", c.pulse_bank, c.noise_bank);
    println!(
        "  integrator_train: {} pulse / {} noise",
        c.pulse_integrator, c.noise_integrator
    );
    println!("  calibration:      {} noise", c.noise_calibration);
    println!("  test:             {} pulse / {} noise", c.pulse_test, c.noise_test);
    Ok(())
}

pub fn cmd_train(cfg: &ExperimentConfig, force: bool) -> Result<()> {
    let subs = sub_shifts(&cfg.shifts);
    let dir_full = bundle_dir(cfg, cfg.shifts.len());
    let dir_sub = bundle_dir(cfg, subs.len());
    if !force {
        // refuse before burning training time; save_pipeline re-checks
        for d in [&dir_full, &dir_sub] {
            if d.join("manifest.json").exists() {
                return Err(WavedetError::Io(std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    format!("{} exists; pass --force to retrain", d.display()),
                )));
            }
        }
    }
    let (bin, sidecar) = dataset_paths(cfg);
    let ds = read_dataset(&bin, &sidecar)?;
    let bank = train_bank(&ds, &cfg.shifts, &cfg.svm.bank, &cfg.wavelet)?;
    let kernel = KernelSpec::poly2();
    let mut full = train_integrator(&bank, &ds, &cfg.shifts, &kernel, &cfg.svm.integrator)?;
    let mut sub = train_integrator(&bank, &ds, &subs, &kernel, &cfg.svm.integrator)?;

    let rows = ds.rows_in(Partition::Calibration);
    if rows.is_empty() {
        return Err(WavedetError::Config(
            "dataset has no calibration partition; regenerate with noise_calibration > 0".into(),
        ));
    }
    let dm = ds.max_shift();
    let score_rows = |p: &IntegrationPipeline| -> Result<Vec<f64>> {
        rows.par_iter()
            .map(|&r| p.score_event(ds.stream(r), dm).map(|d| d.score))
            .collect()
    };
    let scores_full = score_rows(&full)?;
    let scores_sub = score_rows(&sub)?;

    println!("thresholds over {} calibration noise groups:", rows.len());
    let full_name = format!("integrated{}", cfg.shifts.len());
    let sub_name = format!("integrated{}", subs.len());
    let mut full_ts = Vec::with_capacity(cfg.pfa_targets.len());
    let mut sub_ts = Vec::with_capacity(cfg.pfa_targets.len());
    for &t in &cfg.pfa_targets {
        let tf = threshold_for_scores(&scores_full, t)?;
        let ts = threshold_for_scores(&scores_sub, t)?;
        println!("  P_fa {t:e}: {full_name} {tf:.6}, {sub_name} {ts:.6}");
        full_ts.push(tf);
        sub_ts.push(ts);
    }
    // the bundles carry the strictest target's threshold
    let strictest = cfg.pfa_targets.iter().copied().fold(f64::INFINITY, f64::min);
    calibrate_threshold(&mut full, &scores_full, strictest)?;
    calibrate_threshold(&mut sub, &scores_sub, strictest)?;

    save_pipeline(&full, &[ds.meta.seed], &dir_full, force)?;
    println!("wrote {} (threshold at P_fa {strictest:e})", dir_full.display());
    if subs.len() != cfg.shifts.len() {
        save_pipeline(&sub, &[ds.meta.seed], &dir_sub, force)?;
        println!("wrote {} (threshold at P_fa {strictest:e})", dir_sub.display());
    }

    let mut record = serde_json::Map::new();
    record.insert(
        "pfa_targets".into(),
        serde_json::to_value(&cfg.pfa_targets)?,
    );
    record.insert(full_name, serde_json::to_value(&full_ts)?);
    if subs.len() != cfg.shifts.len() {
        record.insert(sub_name, serde_json::to_value(&sub_ts)?);
    }
    let thresholds_path = cfg.output_dir.join("thresholds.json");
    std::fs::write(
        &thresholds_path,
        serde_json::to_string_pretty(&serde_json::Value::Object(record))?,
    )?;
    println!("wrote {}", thresholds_path.display());
    Ok(())
}

fn margin_correlation(
    cfg: &ExperimentConfig,
    pipeline: &IntegrationPipeline,
) -> Result<CorrelationMatrix> {
    // a separate substream keeps the correlation study's events disjoint
    // from the curve run under the same master seed
    let corr_seed = substream_seed(cfg.seed, DOMAIN_GENERIC, 2);
    let table = pulse_margin_table(
        &pipeline.bank,
        &cfg.pulse,
        cfg.noise.sigma,
        cfg.corr.snr_db,
        cfg.corr.n_events,
        corr_seed,
    )?;
    correlation_matrix(&table, &shift_labels(&pipeline.bank.shifts))
}

fn describe_corr(matrix: &CorrelationMatrix) -> String {
    match matrix.max_off_diagonal() {
        Some(((i, j), v)) => format!(
            "{}x{}, max off-diagonal {v:.4} at ({}, {})",
            matrix.labels.len(),
            matrix.labels.len(),
            matrix.labels[i],
            matrix.labels[j]
        ),
        None => "1x1".to_string(),
    }
}

/// Per-SNR rates for one scheme at one target, from the frozen curve
/// scores, so rates.json and curves.csv cannot disagree.
fn rates_at_target(scheme: &SchemeScores, target: f64) -> Result<Vec<RatesEstimate>> {
    let threshold = threshold_for_scores(&scheme.noise, target)?;
    let n_noise = scheme.noise.len() as u64;
    let alarms = scheme.noise.iter().filter(|&&v| v > threshold).count() as u64;
    let ci_pfa_95 = clopper_pearson(alarms, n_noise, 0.95)?;
    let p_fa = alarms as f64 / n_noise as f64;
    let mut out = Vec::with_capacity(scheme.pulse_per_snr.len());
    for scores in &scheme.pulse_per_snr {
        let n = scores.len() as u64;
        let hits = scores.iter().filter(|&&v| v > threshold).count() as u64;
        let est = RatesEstimate {
            schema: RATES_SCHEMA.to_string(),
            p_d: hits as f64 / n as f64,
            p_fa,
            trials_pulse: n,
            trials_noise: n_noise,
            ci_pd_95: clopper_pearson(hits, n, 0.95)?,
            ci_pfa_95,
        };
        est.validate()?;
        out.push(est);
    }
    Ok(out)
}

/// Dyadic window ladder around the deployed length, trimmed to sizes the
/// decomposition depth allows.
fn window_ladder(h: usize, levels: usize, order: usize) -> Vec<usize> {
    let floor = (1usize << levels).max(2 * order);
    [h / 4, h / 2, h, h * 2]
        .into_iter()
        .filter(|&x| x >= floor)
        .collect()
}

pub fn cmd_eval(cfg: &ExperimentConfig) -> Result<()> {
    let full = load_pipeline(&bundle_dir(cfg, cfg.shifts.len()))?;
    let subs = sub_shifts(&cfg.shifts);
    let sub = if subs.len() != cfg.shifts.len() {
        Some(load_pipeline(&bundle_dir(cfg, subs.len()))?)
    } else {
        None
    };
    let full_name = format!("integrated{}", cfg.shifts.len());
    let sub_name = format!("integrated{}", subs.len());
    let mut variants: Vec<(&str, &IntegrationPipeline)> = Vec::new();
    if let Some(p) = &sub {
        variants.push((sub_name.as_str(), p));
    }
    variants.push((full_name.as_str(), &full));

    let scores = collect_scheme_scores(
        &variants,
        &cfg.pulse,
        cfg.noise.sigma,
        &cfg.snr_grid,
        cfg.eval.n_noise,
        cfg.eval.n_pulse_per_snr,
        cfg.seed,
    )?;
    let curve = curve_from_scores(&scores, &cfg.snr_grid, &cfg.pfa_targets)?;
    let curves_path = cfg.output_dir.join("curves.csv");
    write_curves_csv(
        &curve,
        cfg.eval.n_noise,
        cfg.eval.n_pulse_per_snr,
        cfg.seed,
        &curves_path,
    )?;
    println!(
        "wrote {} ({} schemes x {} targets)",
        curves_path.display(),
        scores.len(),
        cfg.pfa_targets.len()
    );

    let matrix = margin_correlation(cfg, &full)?;
    let corr_path = cfg.output_dir.join("corr.csv");
    write_corr_csv(&matrix, &corr_path)?;
    println!("wrote {} ({})", corr_path.display(), describe_corr(&matrix));

    let strictest = cfg.pfa_targets.iter().copied().fold(f64::INFINITY, f64::min);
    let headline = scores
        .iter()
        .find(|s| s.name == full_name)
        .ok_or_else(|| WavedetError::Invariant(format!("scheme {full_name} missing")))?;
    let rates = rates_at_target(headline, strictest)?;
    let mean_pd: f64 = rates.iter().map(|r| r.p_d).sum::<f64>() / rates.len() as f64;
    let envelope = serde_json::json!({
        "schema": RATES_SCHEMA,
        "scheme": full_name,
        "target_pfa": strictest,
        "snr_grid_db": cfg.snr_grid,
        "rates": rates,
    });
    let rates_path = cfg.output_dir.join("rates.json");
    std::fs::write(&rates_path, serde_json::to_string_pretty(&envelope)?)?;
    println!(
        "wrote {} ({full_name} at P_fa {strictest:e}, mean P_d {mean_pd:.4})",
        rates_path.display()
    );

    let ladder = window_ladder(full.bank.window_len(), cfg.wavelet.levels, cfg.wavelet.order);
    let report = complexity_report(&cfg.wavelet, &ladder, &full.bank, &full)?;
    let complexity_path = cfg.output_dir.join("complexity.txt");
    std::fs::write(&complexity_path, report.render())?;
    println!(
        "wrote {} (wavelet/downstream ratio {:.1})",
        complexity_path.display(),
        report.dominance_ratio()
    );
    Ok(())
}

pub fn cmd_corr(cfg: &ExperimentConfig) -> Result<()> {
    let full = load_pipeline(&bundle_dir(cfg, cfg.shifts.len()))?;
    let matrix = margin_correlation(cfg, &full)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let corr_path = cfg.output_dir.join("corr.csv");
    write_corr_csv(&matrix, &corr_path)?;
    println!("wrote {} ({})", corr_path.display(), describe_corr(&matrix));
    Ok(())
}
