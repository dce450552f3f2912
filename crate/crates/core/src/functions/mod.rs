//! The registered family of meromorphic functions.
//!
//! Every model evaluates to a [`ComplexValue`], switching to log form once
//! `|f|` leaves the double-precision range and reporting [`ComplexValue::PoleHit`]
//! inside `pole_radius` of a declared pole.

mod derivative;
mod gamma;
mod value;

pub use derivative::{numeric_derivative, DerivativeUnstable};
pub use gamma::{cot, digamma, expm1, gamma as gamma_fn, ln_gamma, log_sin};
pub use value::{wrap_phase, ComplexValue, LN_F64_MAX, OVERFLOW_LOG};

use crate::tower::LogTower;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

pub const DEFAULT_POLE_RADIUS: f64 = 1e-9;

/// `|Im log f|` beyond which the phase of a far value is numerically lost.
const PHASE_RESOLVABLE: f64 = 1e15;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("bad parameter in `{0}`")]
    BadParameter(String),
    #[error("lambda must be nonzero")]
    ZeroLambda,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `e^z`
    Exp,
    /// `e^{e^z}`
    ExpExp,
    /// `lambda (e^{2z} - 1) / (e^z - 1/z)`
    Example1 { lambda: Complex64 },
    /// `Gamma(z)`
    Gamma,
    /// `Gamma(z + 1)`
    GammaShift1,
    /// `Gamma(z + 1) cos z`
    GammaCos,
}

/// Default threshold, seed and window used to locate a model's tract.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TractDefaults {
    pub threshold: f64,
    pub seed: Complex64,
    /// `[re_min, re_max, im_min, im_max]`
    pub window: [f64; 4],
}

/// Value of `f` at a point `w` too large for `f64`, given `log w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FarValue {
    /// `f(w)` is (approximately) an ordinary number.
    Finite(Complex64),
    /// `|f(w)| = exp(log_modulus)`; the phase is `None` once lost to rounding.
    Huge {
        log_modulus: LogTower,
        phase: Option<f64>,
    },
    /// Asymptotics do not decide the size of `f(w)`.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionModel {
    id: String,
    kind: ModelKind,
    parameters: BTreeMap<String, Complex64>,
    pole_radius: f64,
}

impl FunctionModel {
    pub fn new(kind: ModelKind) -> Self {
        let mut parameters = BTreeMap::new();
        let id = match kind {
            ModelKind::Exp => "exp".to_string(),
            ModelKind::ExpExp => "expexp".to_string(),
            ModelKind::Example1 { lambda } => {
                parameters.insert("lambda".to_string(), lambda);
                if lambda.im == 0.0 {
                    format!("example1:lambda={}", lambda.re)
                } else {
                    format!("example1:lambda={},{}", lambda.re, lambda.im)
                }
            }
            ModelKind::Gamma => "gamma".to_string(),
            ModelKind::GammaShift1 => "gamma_shift1".to_string(),
            ModelKind::GammaCos => "gamma_cos".to_string(),
        };
        FunctionModel {
            id,
            kind,
            parameters,
            pole_radius: DEFAULT_POLE_RADIUS,
        }
    }

    pub fn example1(lambda: f64) -> Self {
        FunctionModel::new(ModelKind::Example1 {
            lambda: Complex64::new(lambda, 0.0),
        })
    }

    /// Parses a selection string such as `gamma_cos` or
    /// `example1:lambda=0.5` / `example1:lambda=1,0.25`.
    pub fn parse(spec: &str) -> Result<Self, ModelError> {
        let spec = spec.trim();
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let kind = match name {
            "exp" => ModelKind::Exp,
            "expexp" => ModelKind::ExpExp,
            "gamma" => ModelKind::Gamma,
            "gamma_shift1" => ModelKind::GammaShift1,
            "gamma_cos" => ModelKind::GammaCos,
            "example1" => {
                let mut lambda = Complex64::new(1.0, 0.0);
                if let Some(p) = params {
                    let value = p
                        .strip_prefix("lambda=")
                        .ok_or_else(|| ModelError::BadParameter(spec.to_string()))?;
                    lambda = parse_complex(value)
                        .ok_or_else(|| ModelError::BadParameter(spec.to_string()))?;
                }
                if lambda.norm() == 0.0 {
                    return Err(ModelError::ZeroLambda);
                }
                ModelKind::Example1 { lambda }
            }
            _ => return Err(ModelError::UnknownModel(spec.to_string())),
        };
        if params.is_some() && !matches!(kind, ModelKind::Example1 { .. }) {
            return Err(ModelError::BadParameter(spec.to_string()));
        }
        Ok(FunctionModel::new(kind))
    }

    /// Overrides a named parameter; only `lambda` of `example1` exists.
    pub fn with_parameter(self, name: &str, value: Complex64) -> Result<Self, ModelError> {
        match (self.kind, name) {
            (ModelKind::Example1 { .. }, "lambda") => {
                if value.norm() == 0.0 {
                    return Err(ModelError::ZeroLambda);
                }
                Ok(FunctionModel::new(ModelKind::Example1 { lambda: value }).with_pole_radius(self.pole_radius))
            }
            _ => Err(ModelError::BadParameter(format!("{}:{}", self.id, name))),
        }
    }

    pub fn with_pole_radius(mut self, r: f64) -> Self {
        self.pole_radius = r;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn parameters(&self) -> &BTreeMap<String, Complex64> {
        &self.parameters
    }

    pub fn pole_radius(&self) -> f64 {
        self.pole_radius
    }

    /// True when `f(conj z) = conj f(z)`.
    pub fn is_real_symmetric(&self) -> bool {
        match self.kind {
            ModelKind::Example1 { lambda } => lambda.im == 0.0,
            _ => true,
        }
    }

    pub fn tract_defaults(&self) -> TractDefaults {
        match self.kind {
            ModelKind::Exp => TractDefaults {
                threshold: 1.0,
                seed: Complex64::new(3.0, 0.0),
                window: [-5.0, 5.0, -5.0, 5.0],
            },
            ModelKind::ExpExp => TractDefaults {
                threshold: std::f64::consts::E,
                seed: Complex64::new(1.0, 0.0),
                window: [-3.0, 5.0, -4.0, 4.0],
            },
            ModelKind::Example1 { .. } => TractDefaults {
                threshold: 20.0,
                seed: Complex64::new(6.0, 0.0),
                window: [-10.0, 8.0, -12.0, 12.0],
            },
            ModelKind::Gamma | ModelKind::GammaShift1 | ModelKind::GammaCos => TractDefaults {
                threshold: 10.0,
                seed: Complex64::new(8.0, 0.0),
                window: [-5.0, 10.0, -10.0, 10.0],
            },
        }
    }

    /// Known fixed points with their multipliers, for regression checks.
    pub fn reference_fixed_points(&self) -> Vec<(Complex64, Complex64)> {
        let euler = 0.577_215_664_901_532_9;
        match self.kind {
            ModelKind::Example1 { .. } => vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))],
            ModelKind::Gamma => vec![(Complex64::new(1.0, 0.0), Complex64::new(-euler, 0.0))],
            ModelKind::GammaShift1 => vec![
                (Complex64::new(1.0, 0.0), Complex64::new(1.0 - euler, 0.0)),
                // Gamma(3) = 2, multiplier 2 psi(3)
                (Complex64::new(2.0, 0.0), Complex64::new(2.0 * (1.5 - euler), 0.0)),
            ],
            _ => Vec::new(),
        }
    }

    /// Evaluates `f(z)`.
    pub fn eval(&self, z: Complex64) -> ComplexValue {
        if self.is_near_pole(z) {
            return ComplexValue::PoleHit;
        }
        match self.kind {
            ModelKind::Exp => {
                if z.re.abs() <= OVERFLOW_LOG {
                    ComplexValue::finite(z.exp())
                } else {
                    ComplexValue::from_log(z)
                }
            }
            ModelKind::ExpExp => {
                if z.re > LN_F64_MAX {
                    // Re e^z overflows; only its sign survives.
                    return if z.im.cos() > 0.0 {
                        ComplexValue::Overflow {
                            log_modulus: f64::INFINITY,
                            phase: 0.0,
                        }
                    } else {
                        ComplexValue::finite(Complex64::new(0.0, 0.0))
                    };
                }
                ComplexValue::from_log(z.exp())
            }
            ModelKind::Example1 { lambda } => example1_eval(lambda, z),
            ModelKind::Gamma => ComplexValue::from_log(ln_gamma(z)),
            ModelKind::GammaShift1 => ComplexValue::from_log(ln_gamma(z + 1.0)),
            ModelKind::GammaCos => {
                let l = ln_gamma(z + 1.0) + log_sin(z + PI / 2.0);
                ComplexValue::from_log(l)
            }
        }
    }

    /// Analytic derivative; `None` when the model has none registered.
    pub fn derivative(&self, z: Complex64) -> Option<ComplexValue> {
        if self.is_near_pole(z) {
            return Some(ComplexValue::PoleHit);
        }
        let d = match self.kind {
            ModelKind::Exp => self.eval(z),
            ModelKind::ExpExp => {
                if z.re > LN_F64_MAX {
                    self.eval(z)
                } else {
                    ComplexValue::from_log(z + z.exp())
                }
            }
            ModelKind::Example1 { lambda } => example1_derivative(lambda, z),
            ModelKind::Gamma => {
                let psi = digamma(z);
                log_product(ln_gamma(z), psi)
            }
            ModelKind::GammaShift1 => {
                let w = z + 1.0;
                log_product(ln_gamma(w), digamma(w))
            }
            ModelKind::GammaCos => {
                let w = z + 1.0;
                let inner = digamma(w) * z.cos() - z.sin();
                log_product(ln_gamma(w), inner)
            }
        };
        Some(d)
    }

    /// Analytic derivative, falling back to Richardson-extrapolated central
    /// differences.
    pub fn derivative_or_numeric(&self, z: Complex64) -> Result<ComplexValue, DerivativeUnstable> {
        match self.derivative(z) {
            Some(d) => Ok(d),
            None => numeric_derivative(self, z),
        }
    }

    /// Logarithmic derivative `f'/f`, defined where `f` is finite and nonzero.
    pub fn log_derivative(&self, z: Complex64) -> Option<Complex64> {
        if self.is_near_pole(z) {
            return None;
        }
        let l = match self.kind {
            ModelKind::Exp => Complex64::new(1.0, 0.0),
            ModelKind::ExpExp => z.exp(),
            ModelKind::Example1 { .. } => example1_log_derivative(z)?,
            ModelKind::Gamma => digamma(z),
            ModelKind::GammaShift1 => digamma(z + 1.0),
            ModelKind::GammaCos => digamma(z + 1.0) + cot(z + PI / 2.0),
        };
        if l.re.is_finite() && l.im.is_finite() {
            Some(l)
        } else {
            None
        }
    }

    /// Whether `z` lies within `pole_radius` of a pole.
    pub fn is_near_pole(&self, z: Complex64) -> bool {
        match self.kind {
            ModelKind::Exp | ModelKind::ExpExp => false,
            ModelKind::Gamma => near_nonpositive_integer(z, self.pole_radius),
            ModelKind::GammaShift1 | ModelKind::GammaCos => {
                near_nonpositive_integer(z + 1.0, self.pole_radius)
            }
            ModelKind::Example1 { .. } => {
                if z.re > 50.0 || z.re < -700.0 {
                    return false;
                }
                // simple zeros of z e^z - 1; Newton distance to the nearest one
                let e = z.exp();
                let d = z * e - 1.0;
                let dd = (z + 1.0) * e;
                dd.norm() > 0.0 && d.norm() < self.pole_radius * dd.norm()
            }
        }
    }

    /// All poles inside the closed box `[re_min, re_max] x [im_min, im_max]`.
    pub fn poles_in(&self, re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Vec<Complex64> {
        let inside = |p: &Complex64| p.re >= re_min && p.re <= re_max && p.im >= im_min && p.im <= im_max;
        match self.kind {
            ModelKind::Exp | ModelKind::ExpExp => Vec::new(),
            ModelKind::Gamma | ModelKind::GammaShift1 | ModelKind::GammaCos => {
                let shift = if self.kind == ModelKind::Gamma { 0.0 } else { -1.0 };
                let mut out = Vec::new();
                let mut n = 0.0;
                loop {
                    let p = Complex64::new(shift - n, 0.0);
                    if p.re < re_min {
                        break;
                    }
                    if inside(&p) {
                        out.push(p);
                    }
                    n += 1.0;
                }
                out
            }
            ModelKind::Example1 { .. } => {
                let kmax = (im_min.abs().max(im_max.abs()) / (2.0 * PI)).ceil() as i64 + 2;
                let mut out: Vec<Complex64> = Vec::new();
                for k in -kmax..=kmax {
                    if let Some(p) = lambert_w_of_one(k) {
                        if inside(&p) && !out.iter().any(|q| (q - p).norm() < 1e-9) {
                            out.push(p);
                        }
                    }
                }
                out.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
                out
            }
        }
    }

    /// Heights added to a log-tower by one application of `M_D` once the
    /// radius itself is no longer representable.
    ///
    /// `log M_D(r)` behaves like `r` for `exp` and `example1`, like
    /// `r log r` for the gamma models and like `e^r` for `expexp`.
    pub fn tower_increment(&self) -> u32 {
        match self.kind {
            ModelKind::ExpExp => 2,
            _ => 1,
        }
    }

    /// `log f(z)` on some branch, for models evaluated through logarithms.
    ///
    /// Unlike [`eval`](Self::eval) this keeps values below `f64` range.
    pub fn log_eval(&self, z: Complex64) -> Option<Complex64> {
        if self.is_near_pole(z) {
            return None;
        }
        match self.kind {
            ModelKind::Exp => Some(z),
            ModelKind::ExpExp => (z.re <= LN_F64_MAX).then(|| z.exp()),
            ModelKind::Example1 { .. } => None,
            ModelKind::Gamma => Some(ln_gamma(z)),
            ModelKind::GammaShift1 => Some(ln_gamma(z + 1.0)),
            ModelKind::GammaCos => Some(ln_gamma(z + 1.0) + log_sin(z + PI / 2.0)),
        }
    }

    /// Leading-order value of `f(w)` for `w = exp(log_w)` beyond `f64` range,
    /// large or tiny.
    pub fn far_eval(&self, log_w: Complex64) -> FarValue {
        let big_l = log_w.re;
        let phi = log_w.im;
        if big_l < -OVERFLOW_LOG {
            return match self.kind {
                // residue 1 at the pole: Gamma(w) ~ 1/w
                ModelKind::Gamma => FarValue::Huge {
                    log_modulus: LogTower::from_f64(-big_l),
                    phase: Some(wrap_phase(-phi)),
                },
                _ => match self.eval(Complex64::new(0.0, 0.0)).as_finite() {
                    Some(v) => FarValue::Finite(v),
                    None => FarValue::Unknown,
                },
            };
        }
        let (c, s) = (phi.cos(), phi.sin());
        // phase of e^{L} * (x + i y) when it can still be resolved
        let resolvable_phase = |y: f64| -> Option<f64> {
            if y == 0.0 {
                return Some(0.0);
            }
            let log_abs = big_l + y.abs().ln();
            if log_abs < PHASE_RESOLVABLE.ln() {
                Some(wrap_phase(log_abs.exp() * y.signum()))
            } else {
                None
            }
        };
        match self.kind {
            ModelKind::Exp => {
                if c <= 0.0 {
                    return FarValue::Finite(Complex64::new(0.0, 0.0));
                }
                FarValue::Huge {
                    log_modulus: LogTower::exp_of(big_l + c.ln()),
                    phase: resolvable_phase(s),
                }
            }
            ModelKind::ExpExp => {
                if c <= 0.0 {
                    return FarValue::Finite(Complex64::new(1.0, 0.0));
                }
                let im_w = match resolvable_phase(s) {
                    Some(_) if s == 0.0 => 0.0,
                    Some(_) => (big_l + s.abs().ln()).exp() * s.signum(),
                    None => return FarValue::Unknown,
                };
                if im_w.cos() <= 0.0 {
                    return FarValue::Finite(Complex64::new(0.0, 0.0));
                }
                FarValue::Huge {
                    log_modulus: LogTower::exp_of(big_l + c.ln()).exp(),
                    phase: None,
                }
            }
            ModelKind::Example1 { lambda } => {
                let ll = lambda.ln();
                if c > 0.0 {
                    let phase = resolvable_phase(s).map(|p| wrap_phase(p + ll.im));
                    FarValue::Huge {
                        log_modulus: LogTower::exp_of(big_l + c.ln()).add_small(ll.re),
                        phase,
                    }
                } else {
                    // f(w) ~ lambda w
                    FarValue::Huge {
                        log_modulus: LogTower::from_f64(big_l + ll.re),
                        phase: Some(wrap_phase(phi + ll.im)),
                    }
                }
            }
            ModelKind::Gamma | ModelKind::GammaShift1 | ModelKind::GammaCos => {
                // log Gamma(w + 1) ~ w (log w - 1) + (log w) / 2 + log(2 pi) / 2
                let mut cr = (big_l - 1.0) * c - phi * s;
                let ci = (big_l - 1.0) * s + phi * c;
                let mut small = 0.5 * big_l + 0.5 * (2.0 * PI).ln();
                let mut phase_known = true;
                if self.kind == ModelKind::Gamma {
                    small -= big_l;
                }
                if self.kind == ModelKind::GammaCos {
                    // |cos w| ~ e^{|Im w|} / 2 off the real axis, bounded on it
                    cr += s.abs();
                    phase_known = false;
                }
                if cr <= 0.0 {
                    // underflows to 0, which is a pole of Gamma itself
                    if self.kind == ModelKind::Gamma {
                        return FarValue::Unknown;
                    }
                    return FarValue::Finite(Complex64::new(0.0, 0.0));
                }
                let phase = if phase_known { resolvable_phase(ci) } else { None };
                FarValue::Huge {
                    log_modulus: LogTower::exp_of(big_l + cr.ln()).add_small(small),
                    phase,
                }
            }
        }
    }
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let mut parts = s.split(',');
    let re: f64 = parts.next()?.trim().parse().ok()?;
    let im: f64 = match parts.next() {
        Some(p) => p.trim().parse().ok()?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return None;
    }
    Some(Complex64::new(re, im))
}

fn near_nonpositive_integer(z: Complex64, radius: f64) -> bool {
    let n = z.re.round();
    n <= 0.0 && (z - n).norm() < radius
}

/// `exp(log_a) * b` as a value.
fn log_product(log_a: Complex64, b: Complex64) -> ComplexValue {
    if b.norm() == 0.0 {
        return ComplexValue::finite(Complex64::new(0.0, 0.0));
    }
    ComplexValue::from_log(log_a + b.ln())
}

// Written as lambda z (e^{2z} - 1) / (z e^z - 1), which is regular at 0.
fn example1_eval(lambda: Complex64, z: Complex64) -> ComplexValue {
    if z.re > 20.0 {
        let l = lambda.ln() + z + (1.0 - (-2.0 * z).exp()).ln() - (1.0 - (-z).exp() / z).ln();
        return ComplexValue::from_log(l);
    }
    let num = z * expm1(2.0 * z);
    let den = z * z.exp() - 1.0;
    ComplexValue::finite(lambda * num / den)
}

fn example1_log_derivative(z: Complex64) -> Option<Complex64> {
    if z.norm() == 0.0 {
        return None;
    }
    let nn = if z.re > 20.0 {
        1.0 / z + 2.0 / (1.0 - (-2.0 * z).exp())
    } else {
        1.0 / z + 2.0 * (2.0 * z).exp() / expm1(2.0 * z)
    };
    let dd = (1.0 + z) / (z - (-z).exp());
    Some(nn - dd)
}

fn example1_derivative(lambda: Complex64, z: Complex64) -> ComplexValue {
    if z.re > 20.0 {
        let f = example1_eval(lambda, z);
        return match (f.ln(), example1_log_derivative(z)) {
            (Some(lf), Some(ld)) => log_product(lf, ld),
            _ => ComplexValue::PoleHit,
        };
    }
    let e = z.exp();
    let e2m1 = expm1(2.0 * z);
    let num = z * e2m1;
    let dnum = e2m1 + 2.0 * z * e * e;
    let den = z * e - 1.0;
    let dden = (1.0 + z) * e;
    ComplexValue::finite(lambda * (dnum * den - num * dden) / (den * den))
}

/// Branch `k` of the Lambert W function at 1, i.e. the solution of
/// `w + Log w = 2 pi i k`.
pub fn lambert_w_of_one(k: i64) -> Option<Complex64> {
    let target = Complex64::new(0.0, 2.0 * PI * k as f64);
    let mut w = if k == 0 {
        Complex64::new(0.5, 0.0)
    } else {
        target - target.ln()
    };
    for _ in 0..100 {
        let g = w + w.ln() - target;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.norm() < 1e-15 * w.norm().max(1.0) {
            break;
        }
    }
    let residual = (w * w.exp() - 1.0).norm();
    if residual < 1e-10 && (w + w.ln() - target).norm() < 1e-9 {
        Some(w)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_at_zero_is_one() {
        let m = FunctionModel::parse("exp").unwrap();
        assert_eq!(m.eval(c(0.0, 0.0)), ComplexValue::finite(c(1.0, 0.0)));
    }

    #[test]
    fn exp_at_thousand_overflows() {
        let m = FunctionModel::parse("exp").unwrap();
        assert_eq!(
            m.eval(c(1000.0, 0.0)),
            ComplexValue::Overflow {
                log_modulus: 1000.0,
                phase: 0.0
            }
        );
    }

    #[test]
    fn example1_near_zero_vanishes() {
        let m = FunctionModel::parse("example1:lambda=1").unwrap();
        let v = m.eval(c(1e-8, 0.0)).as_finite().unwrap();
        assert!(v.norm() < 1e-6);
        // and is quadratic there: f(z) ~ -2 lambda z^2
        let v = m.eval(c(1e-4, 0.0)).as_finite().unwrap();
        assert!((v.re + 2e-8).abs() < 1e-11);
    }

    #[test]
    fn example1_literal_formula_agrees_away_from_zero() {
        let m = FunctionModel::parse("example1:lambda=0.5,0.25").unwrap();
        let lambda = c(0.5, 0.25);
        for &z in &[c(1.3, 0.7), c(-2.0, 3.0), c(4.0, -1.0), c(25.0, 1.0)] {
            let lit = lambda * ((2.0 * z).exp() - 1.0) / (z.exp() - 1.0 / z);
            let v = m.eval(z).as_finite().unwrap();
            assert!((v - lit).norm() < 1e-12 * lit.norm(), "z={z}");
        }
    }

    #[test]
    fn example1_bounded_on_re_one() {
        let m = FunctionModel::example1(1.0);
        let bound = (1f64.exp().powi(2) + 1.0) / (1f64.exp() - 1.0);
        for k in -200..=200 {
            let v = m.eval(c(1.0, k as f64 * 0.25));
            assert!(v.log_modulus().exp() <= bound + 1e-9);
        }
    }

    #[test]
    fn gamma_poles_are_hits() {
        let g = FunctionModel::parse("gamma").unwrap();
        assert!(g.eval(c(0.0, 0.0)).is_pole());
        assert!(g.eval(c(-3.0, 0.0)).is_pole());
        assert!(!g.eval(c(-3.0 + 1e-6, 0.0)).is_pole());
        let g1 = FunctionModel::parse("gamma_shift1").unwrap();
        assert!(!g1.eval(c(0.0, 0.0)).is_pole());
        assert!(g1.eval(c(-1.0, 0.0)).is_pole());
        assert_eq!(g1.eval(c(0.0, 0.0)).as_finite().unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn example1_poles_are_lambert_values() {
        let m = FunctionModel::example1(1.0);
        let poles = m.poles_in(-10.0, 8.0, -12.0, 12.0);
        assert!(poles.iter().any(|p| (p - c(0.567_143_290_409_783_8, 0.0)).norm() < 1e-12));
        for p in &poles {
            assert!((p * p.exp() - 1.0).norm() < 1e-10);
            assert!(m.eval(*p).is_pole());
            assert!(!m.eval(*p + 1e-6).is_pole());
        }
        // W_{+-1}, W_{+-2} have |Im| < 12
        assert_eq!(poles.len(), 5);
    }

    #[test]
    fn gamma_cos_value() {
        let m = FunctionModel::parse("gamma_cos").unwrap();
        let z = c(1.5, 0.3);
        let want = gamma_fn(z + 1.0).unwrap() * z.cos();
        let got = m.eval(z).as_finite().unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn analytic_derivatives_match_numeric() {
        let models = ["exp", "expexp", "example1:lambda=2", "gamma", "gamma_shift1", "gamma_cos"];
        let pts = [c(0.7, 0.2), c(2.5, -1.0), c(-0.4, 1.3)];
        for id in models {
            let m = FunctionModel::parse(id).unwrap();
            for &z in &pts {
                let a = m.derivative(z).unwrap().as_finite().unwrap();
                let n = numeric_derivative(&m, z).unwrap().as_finite().unwrap();
                assert!((a - n).norm() < 1e-7 * a.norm().max(1.0), "{id} at {z}: {a} vs {n}");
            }
        }
    }

    #[test]
    fn log_derivative_matches_ratio() {
        let models = ["exp", "example1:lambda=1", "gamma", "gamma_shift1", "gamma_cos"];
        for id in models {
            let m = FunctionModel::parse(id).unwrap();
            for &z in &[c(3.0, 0.5), c(6.0, -2.0), c(30.0, 1.0)] {
                let f = m.eval(z).ln().unwrap();
                let d = m.derivative(z).unwrap().ln().unwrap();
                let want = (d - f).exp();
                let got = m.log_derivative(z).unwrap();
                assert!((got - want).norm() < 1e-9 * want.norm().max(1.0), "{id} at {z}");
            }
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(FunctionModel::parse("sin"), Err(ModelError::UnknownModel(_))));
        assert!(FunctionModel::parse("example1:mu=1").is_err());
        assert!(FunctionModel::parse("example1:lambda=0").is_err());
        assert!(FunctionModel::parse("gamma:lambda=1").is_err());
        let m = FunctionModel::parse("example1:lambda=1,2").unwrap();
        assert_eq!(m.parameters()["lambda"], c(1.0, 2.0));
        assert_eq!(m.id(), "example1:lambda=1,2");
    }

    #[test]
    fn far_eval_exp_along_real_axis() {
        let m = FunctionModel::parse("exp").unwrap();
        match m.far_eval(c(800.0, 0.0)) {
            FarValue::Huge { log_modulus, phase } => {
                assert_eq!(log_modulus, LogTower::new(1, 800.0));
                assert_eq!(phase, Some(0.0));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(m.far_eval(c(800.0, 2.0)), FarValue::Finite(c(0.0, 0.0)));
    }

    #[test]
    fn far_eval_example1_left_half_plane_is_linear() {
        let m = FunctionModel::example1(2.0);
        match m.far_eval(c(800.0, PI)) {
            FarValue::Huge { log_modulus, phase } => {
                assert!((log_modulus.to_f64().unwrap() - (800.0 + 2f64.ln())).abs() < 1e-12);
                assert!((phase.unwrap().abs() - PI).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
