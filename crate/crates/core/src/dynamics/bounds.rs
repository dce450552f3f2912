use super::DynamicsError;
use crate::tract::{LogarithmicVerdict, TractDescriptor};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivBoundConfig {
    /// `[re_min, re_max, im_min, im_max]` sampled by a Halton sequence.
    pub window: [f64; 4],
    pub samples: usize,
    /// Only points with `|z| > min_abs` are tested.
    pub min_abs: f64,
    /// Only points with `log|f(z)| > min_log_f` are tested.
    pub min_log_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivBoundReport {
    pub tested: usize,
    pub drawn: usize,
    pub violations: Vec<Complex64>,
    /// Smallest `|f'(z)| 16 pi |z| / (|f(z)| log|f(z)|)` seen.
    pub min_ratio: f64,
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Tests `|f'(z)| >= |f(z)| log|f(z)| / (16 pi |z|)` at tract points drawn from
/// a Halton sequence, until `samples` points passed the filters or
/// `50 * samples` were drawn.
pub fn derivative_bound_check(tract: &TractDescriptor, config: &DerivBoundConfig) -> Result<DerivBoundReport, DynamicsError> {
    if tract.logarithmic != LogarithmicVerdict::Heuristic {
        return Err(DynamicsError::NotLogarithmic);
    }
    let [a, b, c, d] = config.window;
    let model = &tract.model;
    let mut report = DerivBoundReport {
        tested: 0,
        drawn: 0,
        violations: Vec::new(),
        min_ratio: f64::INFINITY,
    };
    let limit = 50 * config.samples;
    let mut i = 0;
    while report.tested < config.samples && report.drawn < limit {
        i += 1;
        report.drawn += 1;
        let z = Complex64::new(a + (b - a) * halton(i, 2), c + (d - c) * halton(i, 3));
        if z.norm() <= config.min_abs {
            continue;
        }
        let v = model.eval(z);
        if v.is_pole() || !tract.contains_with_value(z, &v) {
            continue;
        }
        let lf = v.log_modulus();
        if !(lf > config.min_log_f) || lf <= 0.0 {
            continue;
        }
        let Some(g) = model.log_derivative(z) else {
            continue;
        };
        report.tested += 1;
        // |f'|/|f| = |g|; compare logs to stay finite for huge f
        let log_ratio = g.norm().ln() + (16.0 * PI * z.norm()).ln() - lf.ln();
        report.min_ratio = report.min_ratio.min(log_ratio.exp());
        if log_ratio < 0.0 {
            report.violations.push(z);
        }
    }
    Ok(report)
}

/// Smallest of `candidates` above which no violation is found.
pub fn empirical_r1(
    tract: &TractDescriptor,
    config: &DerivBoundConfig,
    candidates: &[f64],
) -> Result<Option<f64>, DynamicsError> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    for r1 in sorted {
        let cfg = DerivBoundConfig {
            min_abs: r1,
            min_log_f: r1.ln(),
            ..*config
        };
        let rep = derivative_bound_check(tract, &cfg)?;
        if rep.tested > 0 && rep.violations.is_empty() {
            return Ok(Some(r1));
        }
    }
    Ok(None)
}
