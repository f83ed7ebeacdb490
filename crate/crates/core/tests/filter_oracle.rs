//! Independent re-derivation of the embedded Daubechies filters.
//!
//! The crate ships the coefficients as constants; this test rebuilds them
//! from first principles — binomial half-band polynomial, Durand–Kerner
//! root finding, minimal-phase spectral factorization — sharing no code
//! with the implementation, and checks the analytic invariants directly.

use wavedet::wavelet::daubechies_filters;

#[derive(Clone, Copy, Debug)]
struct C {
    re: f64,
    im: f64,
}

impl C {
    fn new(re: f64, im: f64) -> C {
        C { re, im }
    }
    fn add(self, o: C) -> C {
        C::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: C) -> C {
        C::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: C) -> C {
        C::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    fn div(self, o: C) -> C {
        let d = o.re * o.re + o.im * o.im;
        C::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0_f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Convolution of real polynomial coefficient vectors (ascending powers).
fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of Q(z) = z^(p-1) · B(y(z)) where y(z) = (2 - z - 1/z)/4
/// and B(y) = Σ_{k<p} C(p-1+k, k) y^k.  Using Y(z) = z·y(z) = -(z-1)²/4,
/// each term is C(p-1+k,k) · Y(z)^k · z^(p-1-k), all non-negative powers.
fn half_band_poly(p: usize) -> Vec<f64> {
    let y = vec![-0.25, 0.5, -0.25]; // -(z-1)²/4, ascending
    let mut q = vec![0.0; 2 * p - 1];
    let mut y_pow = vec![1.0];
    for k in 0..p {
        let shift = p - 1 - k;
        let coef = binomial(p - 1 + k, k);
        for (i, &v) in y_pow.iter().enumerate() {
            q[i + shift] += coef * v;
        }
        y_pow = conv(&y_pow, &y);
    }
    q
}

/// All roots of a real polynomial by Durand–Kerner iteration.
fn roots(coeffs: &[f64]) -> Vec<C> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |x: C| {
        let mut v = C::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            v = v.mul(x).add(C::new(c, 0.0));
        }
        v
    };
    let seed = C::new(0.4, 0.9);
    let mut xs: Vec<C> = (0..deg)
        .map(|k| {
            let mut v = C::new(1.0, 0.0);
            for _ in 0..=k {
                v = v.mul(seed);
            }
            v
        })
        .collect();
    for _ in 0..600 {
        let mut moved = 0.0_f64;
        for i in 0..deg {
            let mut denom = C::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom = denom.mul(xs[i].sub(xs[j]));
                }
            }
            let delta = eval(xs[i]).div(denom);
            xs[i] = xs[i].sub(delta);
            moved = moved.max(delta.abs());
        }
        if moved < 1e-15 {
            break;
        }
    }
    xs
}

/// Daubechies lowpass of order p by minimal-phase spectral factorization.
fn derive_lowpass(p: usize) -> Vec<f64> {
    // ((1+z)/2)^p as complex polynomial
    let mut h: Vec<C> = vec![C::new(1.0, 0.0)];
    for _ in 0..p {
        let mut next = vec![C::new(0.0, 0.0); h.len() + 1];
        for (i, &c) in h.iter().enumerate() {
            next[i] = next[i].add(c.mul(C::new(0.5, 0.0)));
            next[i + 1] = next[i + 1].add(c.mul(C::new(0.5, 0.0)));
        }
        h = next;
    }
    if p > 1 {
        let inside: Vec<C> = roots(&half_band_poly(p))
            .into_iter()
            .filter(|r| r.abs() < 1.0)
            .collect();
        assert_eq!(
            inside.len(),
            p - 1,
            "expected {} roots inside the unit circle",
            p - 1
        );
        for r in inside {
            // multiply by (z - r)
            let mut next = vec![C::new(0.0, 0.0); h.len() + 1];
            for (i, &c) in h.iter().enumerate() {
                next[i] = next[i].sub(c.mul(r));
                next[i + 1] = next[i + 1].add(c);
            }
            h = next;
        }
    }
    // roots come in conjugate pairs, so the product is real
    let max_im = h.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    assert!(max_im < 1e-10, "imaginary residue {max_im}");
    let sum: f64 = h.iter().map(|c| c.re).sum();
    let scale = std::f64::consts::SQRT_2 / sum;
    h.iter().map(|c| c.re * scale).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn embedded_filters_match_independent_factorization() {
    for order in 1..=10 {
        let derived = derive_lowpass(order);
        let pair = daubechies_filters(order).unwrap();
        assert_eq!(pair.lowpass.len(), 2 * order);
        assert_eq!(derived.len(), 2 * order);
        // factorization determines the filter up to time reversal
        let reversed: Vec<f64> = derived.iter().rev().copied().collect();
        let err = max_abs_diff(&derived, &pair.lowpass)
            .min(max_abs_diff(&reversed, &pair.lowpass));
        assert!(err < 1e-9, "order {order}: coefficient mismatch {err:.3e}");
    }
}

#[test]
fn embedded_filters_satisfy_analytic_invariants() {
    for order in 1..=10 {
        let pair = daubechies_filters(order).unwrap();
        let lo = &pair.lowpass;
        let w = lo.len();

        let sum: f64 = lo.iter().sum();
        assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);

        let energy: f64 = lo.iter().map(|v| v * v).sum();
        assert!((energy - 1.0).abs() < 1e-12);

        // orthogonality to even translates
        for shift in (2..w).step_by(2) {
            let dot: f64 = (0..w - shift).map(|i| lo[i] * lo[i + shift]).sum();
            assert!(dot.abs() < 1e-12, "order {order} shift {shift}: {dot}");
        }

        // quadrature mirror and its vanishing moments up to the order
        let hi: Vec<f64> = (0..w)
            .map(|k| if k % 2 == 0 { lo[w - 1 - k] } else { -lo[w - 1 - k] })
            .collect();
        assert_eq!(hi, pair.highpass);
        for m in 0..order {
            let moment: f64 = hi
                .iter()
                .enumerate()
                .map(|(k, &g)| g * (k as f64).powi(m as i32))
                .sum();
            let scale = (w as f64).powi(m as i32);
            assert!(
                moment.abs() / scale < 1e-9,
                "order {order} moment {m}: {moment}"
            );
        }
    }
}
