//! Daubechies filter banks and the periodic multi-level DWT.
//!
//! Analysis uses the correlation form with even-phase downsampling:
//! `out[m] = Σ_t f[t]·x[(2m+t) mod n]`. Synthesis is its adjoint, which for
//! an orthonormal bank is the exact inverse. Every output coefficient costs
//! `W` multiply-adds and is charged to `op_count`.

use crate::error::{Result, WavedetError};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Orthonormal lowpass filters for orders 1..=10 (h0 first), generated by
/// spectral factorization at 60-digit working precision and rounded to 17
/// significant digits. Invariants are re-checked at construction.
const DB_LOWPASS: [&[f64]; 10] = [
    &[0.70710678118654752, 0.70710678118654752],
    &[0.48296291314453414, 0.83651630373780791, 0.22414386804201338, -0.12940952255126038],
    &[0.33267055295008262, 0.80689150931109258, 0.45987750211849157, -0.13501102001025459,
      -0.085441273882026662, 0.035226291885709537],
    &[0.23037781330889650, 0.71484657055291565, 0.63088076792985891, -0.027983769416859854,
      -0.18703481171909308, 0.030841381835560764, 0.032883011666885200, -0.010597401785069032],
    &[0.16010239797419291, 0.60382926979718967, 0.72430852843777293, 0.13842814590132073,
      -0.24229488706638203, -0.032244869584638375, 0.077571493840045714, -0.0062414902127982743,
      -0.012580751999081999, 0.0033357252854737713],
    &[0.11154074335010946, 0.49462389039845309, 0.75113390802109535, 0.31525035170919763,
      -0.22626469396543982, -0.12976686756726194, 0.097501605587323049, 0.027522865530305729,
      -0.031582039317486030, 0.00055384220116149614, 0.0047772575109455106, -0.0010773010853084796],
    &[0.077852054085009179, 0.39653931948191731, 0.72913209084623512, 0.46978228740519312,
      -0.14390600392856498, -0.22403618499387498, 0.071309219266830265, 0.080612609151083072,
      -0.038029936935014414, -0.016574541630666881, 0.012550998556099841, 0.00042957797292136652,
      -0.0018016407040474909, 0.00035371379997452025],
    &[0.054415842243104010, 0.31287159091429997, 0.67563073629728981, 0.58535468365420671,
      -0.015829105256349306, -0.28401554296154693, 0.00047248457391328277, 0.12874742662047846,
      -0.017369301001807546, -0.044088253930794752, 0.013981027917398282, 0.0087460940474057767,
      -0.0048703529934515743, -0.00039174037337694705, 0.00067544940645056937,
      -0.00011747678412476953],
    &[0.038077947363878347, 0.24383467461259035, 0.60482312369011111, 0.65728807805130054,
      0.13319738582500758, -0.29327378327917491, -0.096840783222976461, 0.14854074933810638,
      0.030725681479333379, -0.067632829061329974, 0.00025094711483145196, 0.022361662123679097,
      -0.0047232047577513973, -0.0042815036824634298, 0.0018476468830562265,
      0.00023038576352319597, -0.00025196318894271014, 3.9347320316271599e-5],
    &[0.026670057900555554, 0.18817680007769149, 0.52720118893172559, 0.68845903945360357,
      0.28117234366057746, -0.24984642432731538, -0.19594627437737704, 0.12736934033579326,
      0.093057364603572351, -0.071394147166397087, -0.029457536821875813, 0.033212674059341002,
      0.0036065535669561697, -0.010733175483330575, 0.0013953517470529012, 0.0019924052951850561,
      -0.00068585669495971163, -0.00011646685512928545, 9.3588670320069591e-5,
      -1.3264202894521245e-5],
];

#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
    pub order: usize,
}

impl FilterPair {
    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    fn check_invariants(&self) -> Result<()> {
        let w = self.lowpass.len();
        if w != 2 * self.order || self.highpass.len() != w {
            return Err(WavedetError::Invariant(format!(
                "filter length {w} != 2*order {}",
                self.order
            )));
        }
        let sum: f64 = self.lowpass.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > 1e-12 {
            return Err(WavedetError::Invariant(format!(
                "lowpass sum {sum} != sqrt(2)"
            )));
        }
        let energy: f64 = self.lowpass.iter().map(|h| h * h).sum();
        if (energy - 1.0).abs() > 1e-12 {
            return Err(WavedetError::Invariant(format!(
                "lowpass energy {energy} != 1"
            )));
        }
        for (k, (&g, &h)) in self.highpass.iter().zip(self.lowpass.iter().rev()).enumerate() {
            let want = if k % 2 == 0 { h } else { -h };
            if g != want {
                return Err(WavedetError::Invariant("highpass is not the QMF mirror".into()));
            }
        }
        for m in 1..self.order {
            let dot: f64 = (0..w - 2 * m)
                .map(|n| self.lowpass[n] * self.lowpass[n + 2 * m])
                .sum();
            if dot.abs() > 1e-12 {
                return Err(WavedetError::Invariant(format!(
                    "even-shift orthogonality fails at lag {m}: {dot}"
                )));
            }
        }
        Ok(())
    }
}

/// Standard orthonormal Daubechies pair of length 2·order.
pub fn daubechies_filters(order: usize) -> Result<FilterPair> {
    if !(1..=10).contains(&order) {
        return Err(WavedetError::Parameter(format!(
            "unsupported Daubechies order {order}, expected 1..=10"
        )));
    }
    let lowpass = DB_LOWPASS[order - 1].to_vec();
    let w = lowpass.len();
    let highpass: Vec<f64> = (0..w)
        .map(|k| {
            let h = lowpass[w - 1 - k];
            if k % 2 == 0 {
                h
            } else {
                -h
            }
        })
        .collect();
    let pair = FilterPair {
        lowpass,
        highpass,
        order,
    };
    pair.check_invariants()?;
    Ok(pair)
}

fn cached_filters(order: usize) -> Result<&'static FilterPair> {
    static CACHE: [OnceLock<FilterPair>; 10] = [const { OnceLock::new() }; 10];
    if !(1..=10).contains(&order) {
        return Err(WavedetError::Parameter(format!(
            "unsupported Daubechies order {order}, expected 1..=10"
        )));
    }
    if CACHE[order - 1].get().is_none() {
        let pair = daubechies_filters(order)?;
        let _ = CACHE[order - 1].set(pair);
    }
    Ok(CACHE[order - 1].get().unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletConfig {
    pub order: usize,
    /// K, number of decomposition levels.
    pub levels: usize,
    pub boundary: Boundary,
}

impl WaveletConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=10).contains(&self.order) {
            return Err(WavedetError::Parameter(format!(
                "unsupported Daubechies order {}",
                self.order
            )));
        }
        if self.levels == 0 {
            return Err(WavedetError::Parameter("levels must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for WaveletConfig {
    fn default() -> Self {
        WaveletConfig {
            order: 5,
            levels: 4,
            boundary: Boundary::Periodic,
        }
    }
}

/// Output of a K-level decomposition. `details[j]` is level j+1 (length
/// H/2^(j+1)); `approx` has length H/2^K.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPyramid {
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
    pub op_count: u64,
}

impl CoefficientPyramid {
    pub fn energy(&self) -> f64 {
        let d: f64 = self
            .details
            .iter()
            .map(|lvl| lvl.iter().map(|x| x * x).sum::<f64>())
            .sum();
        d + self.approx.iter().map(|x| x * x).sum::<f64>()
    }
}

/// One analysis level: periodic correlation with each filter, keeping even
/// phases. Returns (approx, detail).
fn analyze_level(x: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let w = lo.len();
    let half = n / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    // windows that stay inside the buffer need no modulo
    let no_wrap = if n >= w { (n - w) / 2 + 1 } else { 0 };
    for m in 0..no_wrap {
        let base = 2 * m;
        let mut sa = 0.0;
        let mut sd = 0.0;
        for t in 0..w {
            let v = x[base + t];
            sa += lo[t] * v;
            sd += hi[t] * v;
        }
        a[m] = sa;
        d[m] = sd;
    }
    for m in no_wrap..half {
        let mut sa = 0.0;
        let mut sd = 0.0;
        for t in 0..w {
            let v = x[(2 * m + t) % n];
            sa += lo[t] * v;
            sd += hi[t] * v;
        }
        a[m] = sa;
        d[m] = sd;
    }
    (a, d)
}

/// Mallat pyramid, periodic boundary.
pub fn dwt(signal: &[f64], cfg: &WaveletConfig) -> Result<CoefficientPyramid> {
    cfg.validate()?;
    let h = signal.len();
    if h == 0 || h % (1 << cfg.levels) != 0 {
        return Err(WavedetError::Parameter(format!(
            "input length {h} is not divisible by 2^levels = {}",
            1 << cfg.levels
        )));
    }
    let filters = cached_filters(cfg.order)?;
    let w = filters.len() as u64;
    let mut details = Vec::with_capacity(cfg.levels);
    let mut cur = signal.to_vec();
    let mut op_count = 0u64;
    for _ in 0..cfg.levels {
        let (a, d) = analyze_level(&cur, &filters.lowpass, &filters.highpass);
        op_count += w * (a.len() + d.len()) as u64;
        details.push(d);
        cur = a;
    }
    Ok(CoefficientPyramid {
        details,
        approx: cur,
        op_count,
    })
}

/// One synthesis level: adjoint of `analyze_level`.
fn synth_level(a: &[f64], d: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = a.len() * 2;
    let w = lo.len();
    let mut x = vec![0.0; n];
    for m in 0..a.len() {
        let am = a[m];
        let dm = d[m];
        let base = 2 * m;
        if base + w <= n {
            for t in 0..w {
                x[base + t] += lo[t] * am + hi[t] * dm;
            }
        } else {
            for t in 0..w {
                x[(base + t) % n] += lo[t] * am + hi[t] * dm;
            }
        }
    }
    x
}

/// Perfect reconstruction from a pyramid produced by `dwt`.
pub fn idwt(pyramid: &CoefficientPyramid, cfg: &WaveletConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if pyramid.details.len() != cfg.levels {
        return Err(WavedetError::Parameter(format!(
            "pyramid has {} detail levels, config says {}",
            pyramid.details.len(),
            cfg.levels
        )));
    }
    let mut len = pyramid.approx.len();
    for lvl in (0..cfg.levels).rev() {
        if pyramid.details[lvl].len() != len {
            return Err(WavedetError::Parameter(format!(
                "detail level {} has length {}, expected {len}",
                lvl + 1,
                pyramid.details[lvl].len()
            )));
        }
        len *= 2;
    }
    let filters = cached_filters(cfg.order)?;
    let mut cur = pyramid.approx.clone();
    for d in pyramid.details.iter().rev() {
        cur = synth_level(&cur, d, &filters.lowpass, &filters.highpass);
    }
    Ok(cur)
}

/// The d_k detail sequence (level k), length H/2^k.
pub fn extract_scale(pyramid: &CoefficientPyramid, k: usize) -> Result<&[f64]> {
    if k == 0 || k > pyramid.details.len() {
        return Err(WavedetError::Parameter(format!(
            "scale {k} out of range 1..={}",
            pyramid.details.len()
        )));
    }
    Ok(&pyramid.details[k - 1])
}
