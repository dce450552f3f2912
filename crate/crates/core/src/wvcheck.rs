//! Numerical checks of the Wiman–Valiron type asymptotics on a tract.
//!
//! Near a maximizer `z_r` of `|f|` on `|z| = r`, `f(z)` should behave like
//! `(z / z_r)^a f(z_r)` on the disc of radius `r / a^tau`, and `log f` should
//! map a slightly larger disc onto a neighbourhood of `log f(z_r)`.

use crate::exec::Exec;
use crate::growth::{a_at, log_radii, maximize_on_circle, GrowthError, DEFAULT_COARSE};
use crate::tract::TractDescriptor;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

pub const DEFAULT_TAU: f64 = 0.75;
const RINGS: usize = 16;
const TRACK_DIVISIONS: usize = 64;
const MAX_HALVINGS: u32 = 12;
const LOCAL_RADII: usize = 65;
const COVER_GRID: usize = 9;
const COVER_STAGES: usize = 8;
const COVER_RESIDUAL: f64 = 1e-8;
const ALPHA_LIMIT: f64 = 64.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WvError {
    #[error("tau must exceed 1/2, got {0}")]
    BadTau(f64),
    #[error("a({r}) = {a} does not exceed 1")]
    ExpansionTooWeak { r: f64, a: f64 },
    #[error("log f cannot be continued through {0}")]
    BranchTrackingFailed(Complex64),
    #[error("need beta > 1 and gamma > pi")]
    BadRectangle,
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

/// Outcome of [`wv_verify`] at one radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WVReport {
    pub r: f64,
    pub tau: f64,
    pub zr: Complex64,
    pub a: f64,
    pub disc_radius: f64,
    pub disc_in_tract: bool,
    /// `sup |f(z) / ((z/z_r)^a f(z_r)) - 1|` over the samples.
    pub rel_err_value: f64,
    /// `sup | |f(z)| / M_D(|z|) - 1 |`.
    pub rel_err_modulus: f64,
    /// `sup |f'(z) / ((a/z) (z/z_r)^a f(z_r)) - 1|`.
    pub rel_err_derivative: f64,
    pub samples: usize,
    /// First point where `log f` could not be continued, if any.
    pub branch_failure: Option<Complex64>,
}

/// Continues a branch of `log f` from `start` (where it equals `log_start`)
/// to `end` along the segment, in steps of at most `max_step`; steps are
/// halved while `arg f` turns by more than `pi/4`.
pub fn track_log(
    tract: &TractDescriptor,
    start: Complex64,
    log_start: Complex64,
    end: Complex64,
    max_step: f64,
) -> Result<Complex64, WvError> {
    let len = (end - start).norm();
    if len == 0.0 {
        return Ok(log_start);
    }
    let n = (len / max_step).ceil().max(1.0) as usize;
    let mut cur = log_start;
    let mut z = start;
    for k in 1..=n {
        let next = start + (end - start) * (k as f64 / n as f64);
        cur = continue_log(tract, z, cur, next, 0)?;
        z = next;
    }
    Ok(cur)
}

fn continue_log(tract: &TractDescriptor, z: Complex64, l: Complex64, next: Complex64, depth: u32) -> Result<Complex64, WvError> {
    let p = tract.model.eval(next).ln().ok_or(WvError::BranchTrackingFailed(next))?;
    let turn = (p.im - l.im + PI).rem_euclid(2.0 * PI) - PI;
    if turn.abs() > PI / 4.0 {
        if depth >= MAX_HALVINGS {
            return Err(WvError::BranchTrackingFailed(next));
        }
        let mid = 0.5 * (z + next);
        let lm = continue_log(tract, z, l, mid, depth + 1)?;
        return continue_log(tract, mid, lm, next, depth + 1);
    }
    Ok(Complex64::new(p.re, l.im + turn))
}

/// Checks disc containment and the value, modulus and derivative relations
/// on `samples` points spread over 16 rings of `D(z_r, r / a^tau)`.
pub fn wv_verify(tract: &TractDescriptor, r: f64, tau: f64, samples: usize) -> Result<WVReport, WvError> {
    if !(tau > 0.5) {
        return Err(WvError::BadTau(tau));
    }
    let m = maximize_on_circle(tract, r, DEFAULT_COARSE)?;
    let a = a_at(tract, r, DEFAULT_COARSE)?;
    if !(a > 1.0) {
        return Err(WvError::ExpansionTooWeak { r, a });
    }
    let zr = m.zr;
    let disc_radius = r / a.powf(tau);
    let l0 = tract.model.eval(zr).ln().ok_or(WvError::BranchTrackingFailed(zr))?;
    let local = local_log_md(tract, r, disc_radius);
    let rays = samples.div_ceil(RINGS).max(8);
    let step = disc_radius / TRACK_DIVISIONS as f64;

    let mut report = WVReport {
        r,
        tau,
        zr,
        a,
        disc_radius,
        disc_in_tract: true,
        rel_err_value: 0.0,
        rel_err_modulus: 0.0,
        rel_err_derivative: 0.0,
        samples: 0,
        branch_failure: None,
    };
    'rays: for j in 0..rays {
        let dir = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / rays as f64);
        let mut z = zr;
        let mut l = l0;
        for k in 1..=RINGS {
            let next = zr + dir * (disc_radius * k as f64 / RINGS as f64);
            l = match track_log(tract, z, l, next, step) {
                Ok(l) => l,
                Err(WvError::BranchTrackingFailed(p)) => {
                    report.branch_failure.get_or_insert(p);
                    report.disc_in_tract = false;
                    continue 'rays;
                }
                Err(e) => return Err(e),
            };
            z = next;
            report.samples += 1;
            if !tract.contains(z) {
                report.disc_in_tract = false;
            }
            let delta = l - l0 - a * (z / zr).ln();
            report.rel_err_value = report.rel_err_value.max((delta.exp() - 1.0).norm());
            if let Some(lmd) = interpolate(&local, z.norm()) {
                let e = (l.re - lmd).exp() - 1.0;
                report.rel_err_modulus = report.rel_err_modulus.max(e.abs());
            }
            if let Some(g) = tract.model.log_derivative(z) {
                let d1 = delta + (z * g / a).ln();
                report.rel_err_derivative = report.rel_err_derivative.max((d1.exp() - 1.0).norm());
            }
        }
    }
    Ok(report)
}

/// `(log s, log M_D(s))` on radii covering `[r - rho, r + rho]`.
fn local_log_md(tract: &TractDescriptor, r: f64, rho: f64) -> Vec<(f64, f64)> {
    let lo = (r - rho).max(r * 1e-3);
    let hi = r + rho;
    (0..LOCAL_RADII)
        .filter_map(|k| {
            let s = lo * ((hi / lo).ln() * k as f64 / (LOCAL_RADII - 1) as f64).exp();
            maximize_on_circle(tract, s, DEFAULT_COARSE)
                .ok()
                .map(|m| (s.ln(), m.b + tract.log_threshold()))
        })
        .collect()
}

fn interpolate(pts: &[(f64, f64)], s: f64) -> Option<f64> {
    let x = s.ln();
    let k = pts.partition_point(|p| p.0 < x);
    if k == 0 || k == pts.len() {
        return pts.iter().find(|p| (p.0 - x).abs() < 1e-12).map(|p| p.1);
    }
    let (x0, y0) = pts[k - 1];
    let (x1, y1) = pts[k];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    pub r: f64,
    pub a: f64,
    pub alpha_used: f64,
    pub covered: bool,
    pub targets: usize,
    /// Targets not reached with the final `alpha`.
    pub failures: Vec<Complex64>,
}

/// Whether `log f` maps `D(z_r, alpha r / a)` over the rectangle
/// `|Re w - log|f(z_r)|| <= log beta`, `|Im w - arg f(z_r)| <= gamma`.
///
/// `alpha` doubles from 1 until every target on a 9x9 grid of the rectangle
/// is reached or `alpha` exceeds 64.
pub fn covering_check(tract: &TractDescriptor, r: f64, beta: f64, gamma: f64) -> Result<CoveringReport, WvError> {
    let mut alpha = 1.0;
    loop {
        let rep = covering_with_alpha(tract, r, beta, gamma, alpha)?;
        if rep.covered || alpha * 2.0 > ALPHA_LIMIT {
            return Ok(rep);
        }
        alpha *= 2.0;
    }
}

/// Covering check with a fixed `alpha`.
pub fn covering_with_alpha(tract: &TractDescriptor, r: f64, beta: f64, gamma: f64, alpha: f64) -> Result<CoveringReport, WvError> {
    if !(beta > 1.0) || !(gamma > PI) {
        return Err(WvError::BadRectangle);
    }
    let m = maximize_on_circle(tract, r, DEFAULT_COARSE)?;
    let a = a_at(tract, r, DEFAULT_COARSE)?;
    if !(a > 0.0) {
        return Err(WvError::ExpansionTooWeak { r, a });
    }
    let zr = m.zr;
    let l0 = tract.model.eval(zr).ln().ok_or(WvError::BranchTrackingFailed(zr))?;
    let radius = alpha * r / a;
    let n = COVER_GRID;
    let mut targets = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = beta.ln() * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            let y = gamma * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
            targets.push(l0 + Complex64::new(x, y));
        }
    }
    let reached = Exec::Sequential.map_slice(&targets, |&w| solve_log(tract, zr, l0, w, radius).is_some());
    let failures: Vec<Complex64> = targets.iter().zip(&reached).filter(|(_, &ok)| !ok).map(|(&w, _)| w).collect();
    Ok(CoveringReport {
        r,
        a,
        alpha_used: alpha,
        covered: failures.is_empty(),
        targets: targets.len(),
        failures,
    })
}

/// Solves `log f(z) = w` by damped Newton with continuation from `z_r`,
/// keeping every iterate inside `D(z_r, radius)` and the tract.
fn solve_log(tract: &TractDescriptor, zr: Complex64, l0: Complex64, w: Complex64, radius: f64) -> Option<Complex64> {
    let admissible = |z: Complex64| (z - zr).norm() <= radius && tract.contains(z);
    let mut z = zr;
    let mut l = l0;
    for s in 1..=COVER_STAGES {
        let target = l0 + (w - l0) * (s as f64 / COVER_STAGES as f64);
        let mut converged = false;
        for _ in 0..60 {
            let res = l - target;
            if res.norm() < COVER_RESIDUAL {
                converged = true;
                break;
            }
            let g = tract.model.log_derivative(z)?;
            let delta = -res / g;
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..30 {
                let cand = z + delta * t;
                if admissible(cand) {
                    if let Some(p) = tract.model.eval(cand).ln() {
                        // branch nearest the linear prediction
                        let predicted = l + g * (cand - z);
                        let k = ((predicted.im - p.im) / (2.0 * PI)).round();
                        let lc = Complex64::new(p.re, p.im + 2.0 * PI * k);
                        if (lc - target).norm() < res.norm() {
                            z = cand;
                            l = lc;
                            moved = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if !converged && (l - target).norm() >= COVER_RESIDUAL {
            return None;
        }
    }
    Some(z)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEntry {
    pub r: f64,
    pub report: Option<WVReport>,
    pub error: Option<String>,
    pub flagged: bool,
}

/// [`wv_verify`] at log-spaced radii in `[r_min, r_max]`, `log_step` apart.
///
/// A radius is flagged as candidate-exceptional when the disc leaves the
/// tract, `log f` cannot be continued, the check errors, or `relErrValue`
/// exceeds five times the sweep's 90th percentile.
pub fn exceptional_sweep(
    tract: &TractDescriptor,
    r_min: f64,
    r_max: f64,
    log_step: f64,
    tau: f64,
    samples: usize,
    exec: Exec,
) -> Vec<SweepEntry> {
    if !(r_min > 0.0) || !(r_max >= r_min) || !r_max.is_finite() {
        return Vec::new();
    }
    let (radii, _) = log_radii(r_min, r_max, log_step);
    let results = exec.map_slice(&radii, |&r| wv_verify(tract, r, tau, samples));
    let mut errs: Vec<f64> = results.iter().filter_map(|x| x.as_ref().ok()).map(|x| x.rel_err_value).collect();
    errs.sort_by(f64::total_cmp);
    let p90 = if errs.is_empty() {
        f64::INFINITY
    } else {
        errs[((errs.len() - 1) as f64 * 0.9).round() as usize]
    };
    radii
        .iter()
        .zip(results)
        .map(|(&r, res)| match res {
            Ok(rep) => {
                let flagged = !rep.disc_in_tract || rep.branch_failure.is_some() || rep.rel_err_value > 5.0 * p90;
                SweepEntry {
                    r,
                    report: Some(rep),
                    error: None,
                    flagged,
                }
            }
            Err(e) => SweepEntry {
                r,
                report: None,
                error: Some(e.to_string()),
                flagged: true,
            },
        })
        .collect()
}

/// CSV with columns
/// `r,a,discRadius,discInTract,relErrValue,relErrModulus,relErrDerivative,flagged`.
pub fn sweep_csv(entries: &[SweepEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "r",
        "a",
        "discRadius",
        "discInTract",
        "relErrValue",
        "relErrModulus",
        "relErrDerivative",
        "flagged",
    ])
    .expect("in-memory write");
    for e in entries {
        let mut row = vec![e.r.to_string()];
        match &e.report {
            Some(rep) => row.extend([
                rep.a.to_string(),
                rep.disc_radius.to_string(),
                rep.disc_in_tract.to_string(),
                rep.rel_err_value.to_string(),
                rep.rel_err_modulus.to_string(),
                rep.rel_err_derivative.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 6)),
        }
        row.push(e.flagged.to_string());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// Fraction of `log r` range covered by flagged radii, each standing for the
/// half-steps on either side of it.
pub fn flagged_log_fraction(entries: &[SweepEntry]) -> f64 {
    if entries.len() < 2 {
        return if entries.iter().any(|e| e.flagged) { 1.0 } else { 0.0 };
    }
    let xs: Vec<f64> = entries.iter().map(|e| e.r.ln()).collect();
    let span = xs[xs.len() - 1] - xs[0];
    let mut measure = 0.0;
    for (k, e) in entries.iter().enumerate() {
        if !e.flagged {
            continue;
        }
        let lo = if k == 0 { xs[0] } else { 0.5 * (xs[k - 1] + xs[k]) };
        let hi = if k + 1 == xs.len() { xs[k] } else { 0.5 * (xs[k] + xs[k + 1]) };
        measure += hi - lo;
    }
    measure / span
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionModel;
    use crate::tract::{locate_tract, Window};

    fn tract_of(spec: &str) -> TractDescriptor {
        let m = FunctionModel::parse(spec).unwrap();
        let d = m.tract_defaults();
        let w = Window::from_bounds(d.window, 200, 200).unwrap();
        locate_tract(&m, d.threshold, d.seed, w).unwrap()
    }

    fn closed_form(r: f64) -> f64 {
        let h = r.powf(-0.75);
        (r * (h.exp() - 1.0 - h)).exp() - 1.0
    }

    #[test]
    fn exp_value_relation_matches_closed_form() {
        let t = tract_of("exp");
        let rep = wv_verify(&t, 100.0, 0.75, 256).unwrap();
        assert!(rep.disc_in_tract);
        let cf = closed_form(100.0);
        assert!(rep.rel_err_value / cf < 1.5 && cf / rep.rel_err_value < 1.5, "{} vs {cf}", rep.rel_err_value);
        assert!(rep.rel_err_modulus <= rep.rel_err_value + 1e-6);
        assert!(rep.rel_err_derivative > 0.0);
        assert_eq!(rep.samples, 256);
        assert!((rep.disc_radius - 100.0 / rep.a.powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn tracked_branch_is_path_independent() {
        let t = tract_of("gamma_shift1");
        let zr = maximize_on_circle(&t, 30.0, 256).unwrap().zr;
        let l0 = t.model.eval(zr).ln().unwrap();
        let target = zr + Complex64::new(-1.5, 2.0);
        let direct = track_log(&t, zr, l0, target, 0.01).unwrap();
        let corner = zr + Complex64::new(0.0, 2.0);
        let via = track_log(&t, zr, l0, corner, 0.01).unwrap();
        let via = track_log(&t, corner, via, target, 0.01).unwrap();
        assert!((direct - via).norm() < 1e-8);
    }

    #[test]
    fn weak_expansion_and_bad_tau_are_rejected() {
        let t = tract_of("exp");
        assert!(matches!(wv_verify(&t, 100.0, 0.5, 64), Err(WvError::BadTau(_))));
        assert!(matches!(wv_verify(&t, 0.5, 0.75, 64), Err(WvError::ExpansionTooWeak { .. })));
    }

    #[test]
    fn exp_covering_needs_alpha_above_corner_distance() {
        let t = tract_of("exp");
        let rep = covering_check(&t, 50.0, 4.0, 3.5).unwrap();
        assert!(rep.covered);
        assert!(rep.alpha_used >= 3.7);
        let forced = covering_with_alpha(&t, 50.0, 4.0, 3.5, 2.0).unwrap();
        assert!(!forced.covered);
        assert!(!forced.failures.is_empty());
    }

    #[test]
    fn empty_sweep() {
        let t = tract_of("exp");
        assert!(exceptional_sweep(&t, 50.0, 20.0, 0.02, 0.75, 64, Exec::Sequential).is_empty());
    }

    #[test]
    fn flagged_fraction_counts_half_steps() {
        let e = |r: f64, flagged| SweepEntry {
            r,
            report: None,
            error: None,
            flagged,
        };
        let entries = vec![e(1.0, false), e(std::f64::consts::E, true), e(std::f64::consts::E.powi(2), false)];
        assert!((flagged_log_fraction(&entries) - 0.5).abs() < 1e-12);
    }
}
