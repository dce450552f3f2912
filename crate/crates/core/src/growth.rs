//! Growth functionals of a tract: `B(r)`, `a(r)` and `M_D(r)`.
//!
//! `B(r)` is the maximum of `log(|f|/R)` over the part of the circle
//! `|z| = r` lying in the tract, `a(r)` its derivative in `log r`, and
//! `log M_D(r) = B(r) + log R`.

use crate::exec::Exec;
use crate::functions::FarValue;
use crate::tower::LogTower;
use crate::tract::TractDescriptor;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Spacing of profile radii in `log r`.
pub const LOG_STEP: f64 = 0.02;
/// Absolute tolerance on second differences of `B` in `log r`.
pub const CONVEX_TOL: f64 = 1e-6;
pub const DEFAULT_COARSE: usize = 256;
const MAX_COARSE: usize = 16_384;
const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("circle |z| = {0} misses the tract")]
    CircleMissesTract(f64),
    #[error("at least 64 coarse samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("radius {0} is outside the profile range")]
    OutOfRange(f64),
    #[error("radius range [{0}, {1}] is invalid")]
    BadRange(f64, f64),
    #[error("M_D({rho}) = exp({log_md}) does not exceed rho")]
    NotExpanding { rho: f64, log_md: f64 },
    #[error("profile must span a decade of radii")]
    ProfileTooShort,
    #[error("asymptotics cannot size M_D at exp({0})")]
    Undetermined(f64),
}

/// Maximum of `log(|f|/R)` on the in-tract part of a circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CircleMax {
    pub b: f64,
    pub zr: Complex64,
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `B(r)` and a maximizer `z_r`.
///
/// A coarse scan over `max(coarse, 8r)` equally spaced angles (at most
/// 16384) keeps only in-tract points; the best one is refined by golden
/// section to `1e-10` in angle. Ties go to the smallest nonnegative angle.
pub fn maximize_on_circle(tract: &TractDescriptor, r: f64, coarse: usize) -> Result<CircleMax, GrowthError> {
    if coarse < 64 {
        return Err(GrowthError::TooFewSamples(coarse));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(GrowthError::CircleMissesTract(r));
    }
    let n = coarse.max((8.0 * r).ceil().min(MAX_COARSE as f64) as usize);
    let log_r = tract.log_threshold();
    let v = |theta: f64| -> f64 {
        let z = Complex64::from_polar(r, theta);
        let val = tract.model.eval(z);
        if tract.contains_with_value(z, &val) {
            val.log_modulus() - log_r
        } else {
            f64::NEG_INFINITY
        }
    };
    let step = 2.0 * PI / n as f64;
    let mut best: Option<(usize, f64)> = None;
    for k in 0..n {
        let x = v(k as f64 * step);
        if x > f64::NEG_INFINITY && best.is_none_or(|(_, b)| x > b) {
            best = Some((k, x));
        }
    }
    let (k, coarse_b) = best.ok_or(GrowthError::CircleMissesTract(r))?;
    let center = k as f64 * step;
    let (theta, b) = golden_max(v, center - step, center + step, ANGLE_TOL);
    let (theta, b) = if b > coarse_b { (theta, b) } else { (center, coarse_b) };
    Ok(CircleMax {
        b,
        zr: Complex64::from_polar(r, theta.rem_euclid(2.0 * PI)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthSample {
    pub r: f64,
    pub b: f64,
    pub log_md: f64,
    pub zr: Complex64,
    /// `None` at the ends of the profile, where no centered difference exists.
    pub a: Option<f64>,
    pub exceptional: bool,
}

/// `B`, `a` and `M_D` at radii spaced about [`LOG_STEP`] apart in `log r`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthProfile<'a> {
    #[serde(skip)]
    pub tract: &'a TractDescriptor,
    pub threshold: f64,
    pub log_step: f64,
    pub coarse: usize,
    pub samples: Vec<GrowthSample>,
}

/// Radii from `r_min` to `r_max` equally spaced in `log r`, with spacing as
/// close to `log_step` as the range allows. Returns the radii and the spacing.
pub fn log_radii(r_min: f64, r_max: f64, log_step: f64) -> (Vec<f64>, f64) {
    let span = (r_max / r_min).ln();
    let steps = (span / log_step).round() as usize;
    if steps == 0 {
        return (vec![r_min], log_step);
    }
    let h = span / steps as f64;
    let radii = (0..=steps)
        .map(|k| if k == steps { r_max } else { r_min * (k as f64 * h).exp() })
        .collect();
    (radii, h)
}

pub fn build_profile(tract: &TractDescriptor, r_min: f64, r_max: f64) -> Result<GrowthProfile<'_>, GrowthError> {
    build_profile_with(tract, r_min, r_max, DEFAULT_COARSE, Exec::default())
}

/// Samples the tract on log-spaced circles. Radii whose circle misses the
/// tract are dropped; the profile fails only if every circle misses.
pub fn build_profile_with(
    tract: &TractDescriptor,
    r_min: f64,
    r_max: f64,
    coarse: usize,
    exec: Exec,
) -> Result<GrowthProfile<'_>, GrowthError> {
    if !(r_min > 0.0) || !(r_max >= r_min) || !r_max.is_finite() {
        return Err(GrowthError::BadRange(r_min, r_max));
    }
    let (radii, h) = log_radii(r_min, r_max, LOG_STEP);
    let maxima = exec.map_slice(&radii, |&r| maximize_on_circle(tract, r, coarse));
    if let Some(Err(GrowthError::TooFewSamples(n))) = maxima.first() {
        return Err(GrowthError::TooFewSamples(*n));
    }
    let log_r = tract.log_threshold();
    let mut samples = Vec::new();
    for (k, m) in maxima.iter().enumerate() {
        let Ok(m) = m else { continue };
        let a = match (k.checked_sub(1).and_then(|p| maxima[p].as_ref().ok()), maxima.get(k + 1).and_then(|n| n.as_ref().ok())) {
            (Some(lo), Some(hi)) => Some(((hi.b - lo.b) / (2.0 * h)).max(0.0)),
            _ => None,
        };
        samples.push(GrowthSample {
            r: radii[k],
            b: m.b,
            log_md: m.b + log_r,
            zr: m.zr,
            a,
            exceptional: false,
        });
    }
    if samples.is_empty() {
        return Err(GrowthError::CircleMissesTract(r_min));
    }
    Ok(GrowthProfile {
        tract,
        threshold: tract.threshold,
        log_step: h,
        coarse,
        samples,
    })
}

/// `a(r)` by a centered difference of `B` over `log r +- LOG_STEP`.
pub fn a_at(tract: &TractDescriptor, r: f64, coarse: usize) -> Result<f64, GrowthError> {
    let h = LOG_STEP;
    let hi = maximize_on_circle(tract, r * h.exp(), coarse)?.b;
    let lo = maximize_on_circle(tract, r * (-h).exp(), coarse)?.b;
    Ok(((hi - lo) / (2.0 * h)).max(0.0))
}

/// `log M_D(r) = B(r) + log R`.
pub fn log_md(tract: &TractDescriptor, r: f64) -> Result<f64, GrowthError> {
    Ok(maximize_on_circle(tract, r, DEFAULT_COARSE)?.b + tract.log_threshold())
}

impl GrowthProfile<'_> {
    pub fn r_min(&self) -> f64 {
        self.samples.first().map_or(f64::NAN, |s| s.r)
    }

    pub fn r_max(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.r)
    }

    /// `a(r)` by a centered difference of `B` in `log r`, recomputing `B` at
    /// `r e^{+-LOG_STEP}`.
    pub fn a_of_r(&self, r: f64) -> Result<f64, GrowthError> {
        if !(r > self.r_min() && r < self.r_max()) {
            return Err(GrowthError::OutOfRange(r));
        }
        a_at(self.tract, r, self.coarse)
    }

    /// `B` at `r` by linear interpolation in `log r`.
    pub fn b_at(&self, r: f64) -> Option<f64> {
        interpolate(&self.samples, r.ln(), |s| Some(s.b))
    }

    /// Radii where the Borel–Nevanlinna inequalities for `T = a`, `x = log r`
    /// fail. Sets the `exceptional` flags and returns the flagged radii.
    pub fn scan_exceptional(&mut self, alpha: f64, beta: f64) -> Vec<f64> {
        let flagged = scan_exceptional(&self.samples, alpha, beta);
        for s in &mut self.samples {
            s.exceptional = flagged.contains(&s.r);
        }
        flagged
    }

    pub fn check_a_bound(&self, epsilon: f64) -> ABoundReport {
        check_a_bound(&self.samples, epsilon)
    }

    pub fn check_sqrt_growth(&self) -> Result<SqrtGrowth, GrowthError> {
        check_sqrt_growth(&self.samples)
    }

    /// Largest violation of `B'' >= 0` in `log r`, as a (nonpositive) second
    /// difference; 0 when convex.
    pub fn min_second_difference(&self) -> f64 {
        self.samples
            .windows(3)
            .filter(|w| consecutive(w[0].r, w[1].r, self.log_step) && consecutive(w[1].r, w[2].r, self.log_step))
            .map(|w| w[2].b - 2.0 * w[1].b + w[0].b)
            .fold(0.0, f64::min)
    }

    /// Radii where `a(r) < (B(r) - B(r0)) / log(r / r0) - tol` for some
    /// earlier sample `r0`.
    pub fn lower_bound_violations(&self, tol: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for (k, s) in self.samples.iter().enumerate() {
            let Some(a) = s.a else { continue };
            let bad = self.samples[..k]
                .iter()
                .any(|s0| a < (s.b - s0.b) / (s.r / s0.r).ln() - tol);
            if bad {
                out.push(s.r);
            }
        }
        out
    }

    /// `B(r) / log r` over samples past `r = 10`: whether it is nondecreasing
    /// (to `tol`), and its final value.
    pub fn faster_growth(&self, tol: f64) -> (bool, f64) {
        let ratios: Vec<f64> = self.samples.iter().filter(|s| s.r >= 10.0).map(|s| s.b / s.r.ln()).collect();
        let monotone = ratios.windows(2).all(|w| w[1] >= w[0] - tol);
        (monotone, ratios.last().copied().unwrap_or(f64::NAN))
    }

    /// CSV with columns `r,B,a,re_zr,im_zr,exceptional`; `a` is empty where
    /// undefined.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r", "B", "a", "re_zr", "im_zr", "exceptional"]).expect("in-memory write");
        for s in &self.samples {
            w.write_record([
                s.r.to_string(),
                s.b.to_string(),
                s.a.map(|a| a.to_string()).unwrap_or_default(),
                s.zr.re.to_string(),
                s.zr.im.to_string(),
                s.exceptional.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

fn consecutive(r0: f64, r1: f64, h: f64) -> bool {
    ((r1 / r0).ln() - h).abs() < 1e-9
}

/// Linear interpolation of `get` in `x = log r` over samples where it is
/// defined; `None` outside their range.
fn interpolate(samples: &[GrowthSample], x: f64, get: impl Fn(&GrowthSample) -> Option<f64>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples.iter().filter_map(|s| get(s).map(|v| (s.r.ln(), v))).collect();
    if pts.is_empty() || x < pts[0].0 - 1e-12 || x > pts[pts.len() - 1].0 + 1e-12 {
        return None;
    }
    let k = pts.partition_point(|p| p.0 < x);
    if k == 0 {
        return Some(pts[0].1);
    }
    if k == pts.len() {
        return Some(pts[k - 1].1);
    }
    let (x0, y0) = pts[k - 1];
    let (x1, y1) = pts[k];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// See [`GrowthProfile::scan_exceptional`]. Checks whose shifted argument
/// leaves the sampled range are skipped.
pub fn scan_exceptional(samples: &[GrowthSample], alpha: f64, beta: f64) -> Vec<f64> {
    let t_at = |x: f64| interpolate(samples, x, |s| s.a);
    let mut out = Vec::new();
    for s in samples {
        let Some(t) = s.a else { continue };
        if !(t > 0.0) {
            out.push(s.r);
            continue;
        }
        let x = s.r.ln();
        let dx = t.powf(-beta);
        let upper_fails = t_at(x + dx).is_some_and(|tp| tp >= (1.0 + t.powf(-alpha)) * t);
        let lower_fails = t_at(x - dx).is_some_and(|tm| tm <= (1.0 - t.powf(-alpha)) * t);
        if upper_fails || lower_fails {
            out.push(s.r);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ABoundReport {
    pub fraction: f64,
    pub checked: usize,
    pub violations: Vec<f64>,
}

/// Fraction of samples with `a <= B^{1 + epsilon}`.
pub fn check_a_bound(samples: &[GrowthSample], epsilon: f64) -> ABoundReport {
    let mut checked = 0;
    let mut violations = Vec::new();
    for s in samples {
        let Some(a) = s.a else { continue };
        checked += 1;
        if a > s.b.max(0.0).powf(1.0 + epsilon) {
            violations.push(s.r);
        }
    }
    let fraction = if checked == 0 {
        1.0
    } else {
        (checked - violations.len()) as f64 / checked as f64
    };
    ABoundReport {
        fraction,
        checked,
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SqrtGrowth {
    pub c: f64,
    pub holds: bool,
}

/// `c = min B(r) / sqrt r` over samples with `r >= 10`, and whether
/// `c sqrt r >= (log 2r)^2` at the largest radius.
pub fn check_sqrt_growth(samples: &[GrowthSample]) -> Result<SqrtGrowth, GrowthError> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(GrowthError::ProfileTooShort);
    };
    if last.r < 10.0 * first.r * (1.0 - 1e-9) {
        return Err(GrowthError::ProfileTooShort);
    }
    let c = samples
        .iter()
        .filter(|s| s.r >= 10.0 * (1.0 - 1e-12))
        .map(|s| s.b / s.r.sqrt())
        .fold(f64::INFINITY, f64::min);
    if !c.is_finite() {
        return Err(GrowthError::ProfileTooShort);
    }
    let holds = c > 0.0 && c * last.r.sqrt() >= (2.0 * last.r).ln().powi(2);
    Ok(SqrtGrowth { c, holds })
}

/// `M_D^n(rho)` as an iterated exponential.
///
/// While the radius is an ordinary number, `log M_D` comes from
/// [`maximize_on_circle`]. Once only `log r` is representable the model's
/// far-field asymptotics on the positive axis give `log M_D`. Past that each
/// application adds [`tower_increment`](crate::functions::FunctionModel::tower_increment)
/// levels to the tower.
pub fn iterate_md(tract: &TractDescriptor, rho: f64, n: usize) -> Result<LogTower, GrowthError> {
    let first = log_md(tract, rho)?;
    if !(first > rho.ln()) {
        return Err(GrowthError::NotExpanding { rho, log_md: first });
    }
    let mut x = LogTower::from_f64(rho);
    for _ in 0..n {
        x = md_step(tract, x)?;
    }
    Ok(x)
}

/// One application of `M_D` in tower form.
pub fn md_step(tract: &TractDescriptor, x: LogTower) -> Result<LogTower, GrowthError> {
    match x.height {
        0 => {
            let r = x.top;
            match maximize_on_circle(tract, r, DEFAULT_COARSE) {
                Ok(m) if m.b.is_finite() => Ok(LogTower::exp_of(m.b + tract.log_threshold())),
                Ok(_) => far_md(tract, r.ln()),
                Err(e) => Err(e),
            }
        }
        1 => far_md(tract, x.top),
        h => {
            let mut t = LogTower::new(h + tract.model.tower_increment(), x.top);
            t.saturated |= x.saturated;
            Ok(t)
        }
    }
}

fn far_md(tract: &TractDescriptor, log_r: f64) -> Result<LogTower, GrowthError> {
    match tract.model.far_eval(Complex64::new(log_r, 0.0)) {
        FarValue::Huge { log_modulus, .. } => Ok(log_modulus.exp()),
        FarValue::Finite(v) => Ok(LogTower::from_f64(v.norm())),
        FarValue::Unknown => Err(GrowthError::Undetermined(log_r)),
    }
}
