use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Values of `log |f|` above this are carried in log form.
pub const OVERFLOW_LOG: f64 = 700.0;

/// Largest `x` with `exp(x)` finite in `f64`.
pub const LN_F64_MAX: f64 = 709.782712893384;

/// Result of evaluating a meromorphic function at a point.
///
/// `Overflow` keeps `log |f(z)|` and `arg f(z)` so growth computations stay
/// meaningful far beyond the double-precision range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ComplexValue {
    Finite { re: f64, im: f64 },
    PoleHit,
    Overflow { log_modulus: f64, phase: f64 },
}

impl ComplexValue {
    pub fn finite(z: Complex64) -> Self {
        ComplexValue::Finite { re: z.re, im: z.im }
    }

    /// Builds a value from any branch of `log f(z)`.
    pub fn from_log(l: Complex64) -> Self {
        if l.re.is_nan() {
            return ComplexValue::PoleHit;
        }
        if l.re > OVERFLOW_LOG {
            let phase = if l.im.is_finite() { wrap_phase(l.im) } else { 0.0 };
            return ComplexValue::Overflow {
                log_modulus: l.re,
                phase,
            };
        }
        if l.re == f64::NEG_INFINITY || !l.im.is_finite() {
            return ComplexValue::finite(Complex64::new(0.0, 0.0));
        }
        ComplexValue::finite(l.exp())
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            ComplexValue::Finite { re, im } => Some(Complex64::new(re, im)),
            _ => None,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, ComplexValue::PoleHit)
    }

    /// `log |f|`; `+inf` at poles and `-inf` at zeros.
    pub fn log_modulus(&self) -> f64 {
        match *self {
            ComplexValue::Finite { re, im } => Complex64::new(re, im).norm().ln(),
            ComplexValue::PoleHit => f64::INFINITY,
            ComplexValue::Overflow { log_modulus, .. } => log_modulus,
        }
    }

    /// A branch of `log f`, principal for finite values.
    pub fn ln(&self) -> Option<Complex64> {
        match *self {
            ComplexValue::Finite { re, im } => {
                let z = Complex64::new(re, im);
                if z.norm() == 0.0 {
                    None
                } else {
                    Some(z.ln())
                }
            }
            ComplexValue::PoleHit => None,
            ComplexValue::Overflow { log_modulus, phase } => {
                Some(Complex64::new(log_modulus, phase))
            }
        }
    }

    /// Converts an overflow value back to a complex number when `f64` can
    /// still hold it.
    pub fn to_complex(&self) -> Option<Complex64> {
        match *self {
            ComplexValue::Finite { re, im } => Some(Complex64::new(re, im)),
            ComplexValue::PoleHit => None,
            ComplexValue::Overflow { log_modulus, phase } => {
                if log_modulus < LN_F64_MAX {
                    Some(Complex64::from_polar(log_modulus.exp(), phase))
                } else {
                    None
                }
            }
        }
    }

    pub fn conj(&self) -> Self {
        match *self {
            ComplexValue::Finite { re, im } => ComplexValue::Finite { re, im: -im },
            ComplexValue::PoleHit => ComplexValue::PoleHit,
            ComplexValue::Overflow { log_modulus, phase } => ComplexValue::Overflow {
                log_modulus,
                phase: wrap_phase(-phase),
            },
        }
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_phase(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}
