//! Complex log-gamma, digamma and the overflow-safe trigonometric helpers
//! they need.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// A branch of `log Gamma(z)`.
///
/// Lanczos kernel for `Re z >= 1/2`, reflection otherwise. Returns a real part
/// of `+inf` exactly at the poles.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let s = log_sin(z * PI);
        if s.re == f64::NEG_INFINITY {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        return Complex64::new(PI.ln(), 0.0) - s - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + x.ln()
}

/// `Gamma(z)` for finite values; `None` when it overflows `f64`.
pub fn gamma(z: Complex64) -> Option<Complex64> {
    let l = ln_gamma(z);
    if l.re >= super::value::LN_F64_MAX || !l.re.is_finite() {
        None
    } else {
        Some(l.exp())
    }
}

/// `log sin(w)` without overflow for large `|Im w|`.
pub fn log_sin(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im.abs() < 20.0 {
        let s = w.sin();
        if s.norm() == 0.0 {
            return Complex64::new(f64::NEG_INFINITY, 0.0);
        }
        return s.ln();
    }
    let two_i_ln = Complex64::new(2.0f64.ln(), PI / 2.0);
    if w.im > 0.0 {
        // sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        -i * w + ((2.0 * i * w).exp() - 1.0).ln() - two_i_ln
    } else {
        // sin w = e^{iw} (1 - e^{-2iw}) / (2i)
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - two_i_ln
    }
}

/// `cot(w)`, stable for large `|Im w|`.
pub fn cot(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im >= 0.0 {
        let q = (2.0 * i * w).exp();
        i * (q + 1.0) / (q - 1.0)
    } else {
        let q = (-2.0 * i * w).exp();
        i * (1.0 + q) / (1.0 - q)
    }
}

/// Digamma `psi(z) = Gamma'(z) / Gamma(z)`.
pub fn digamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let one = Complex64::new(1.0, 0.0);
        return digamma(one - z) - PI * cot(z * PI);
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.norm() < 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Bernoulli tail: B_{2k} / (2k z^{2k})
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + z.ln() - 0.5 * inv - tail
}

/// `e^w - 1` without cancellation near `w = 0`.
pub fn expm1(w: Complex64) -> Complex64 {
    if w.norm() > 0.5 {
        return w.exp() - 1.0;
    }
    let em1 = w.re.exp_m1();
    let half = (0.5 * w.im).sin();
    Complex64::new(
        em1 * w.im.cos() - 2.0 * half * half,
        w.re.exp() * w.im.sin(),
    )
}
