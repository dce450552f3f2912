use super::fixed::Basin;
use super::{in_tract, step, DynamicsError, OrbitPoint, Step};
use crate::functions::ComplexValue;
use crate::growth::{log_md, md_step, GrowthError};
use crate::tower::{LogTower, TOWER_CAP};
use crate::tract::TractDescriptor;
use num_complex::Complex64;
use serde::Serialize;

/// Number of iterates kept in an [`OrbitRecord`].
pub const RECORDED_ITERATES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    EscapingInTract,
    /// Escaping, and from the entry index on the orbit dominates the iterated
    /// maximum modulus.
    FastEscaping,
    Basin { id: usize },
    /// `hit_index` is the index of the iterate that lands on a pole.
    Prepole { hit_index: usize },
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub z0: Complex64,
    pub classification: Classification,
    /// The first iterates, capped at [`RECORDED_ITERATES`].
    pub iterates: Vec<ComplexValue>,
    pub steps: usize,
    /// Index from which the orbit stays in the tract with nondecreasing
    /// modulus. The iterate crossing the escape bound is only required to
    /// continue the growth.
    pub entry_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitParams {
    pub max_iter: usize,
    pub escape_log_bound: f64,
    /// `log M_D^k(rho)` for `k = 0..`, enabling the fast-escaping class.
    pub fast_bounds: Option<Vec<LogTower>>,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            max_iter: 200,
            escape_log_bound: 1e4,
            fast_bounds: None,
        }
    }
}

impl OrbitParams {
    /// Enables [`Classification::FastEscaping`] for the given `rho`.
    pub fn with_fast_rho(mut self, tract: &TractDescriptor, rho: f64) -> Result<Self, GrowthError> {
        self.fast_bounds = Some(md_towers(tract, rho, TOWER_CAP as usize)?);
        Ok(self)
    }
}

/// `|M_D^k(rho)|` as towers for `k = 0..=n`.
fn md_towers(tract: &TractDescriptor, rho: f64, n: usize) -> Result<Vec<LogTower>, GrowthError> {
    let lm = log_md(tract, rho)?;
    if lm <= rho.ln() {
        return Err(GrowthError::NotExpanding { rho, log_md: lm });
    }
    let mut out = vec![LogTower::from_f64(rho)];
    let mut x = LogTower::from_f64(rho);
    for _ in 0..n {
        x = md_step(tract, x)?;
        out.push(x);
    }
    Ok(out)
}

/// Iterates `f` from `z0` and classifies the orbit.
pub fn iterate(
    tract: &TractDescriptor,
    basins: &[Basin],
    z0: Complex64,
    params: &OrbitParams,
) -> Result<OrbitRecord, DynamicsError> {
    if params.max_iter == 0 {
        return Err(DynamicsError::BadMaxIter);
    }
    let model = &tract.model;
    let bound = LogTower::from_f64(params.escape_log_bound);
    let mut iterates = Vec::new();
    let mut moduli: Vec<LogTower> = Vec::new();
    let mut entry: Option<usize> = None;
    let mut prev: Option<LogTower> = None;
    let mut cur = OrbitPoint::Plain(z0);
    let mut n = 0;
    let class = loop {
        if iterates.len() < RECORDED_ITERATES {
            iterates.push(cur.as_value());
        }
        if let OrbitPoint::Plain(z) = cur {
            if let Some(b) = basins.iter().find(|b| b.traps(z)) {
                break Classification::Basin { id: b.id };
            }
        }
        let next = step(model, &cur);
        if next == Step::Pole {
            break Classification::Prepole { hit_index: n };
        }
        let lm = cur.log_modulus();
        let growing = prev.is_none_or(|p| lm >= p);
        if lm > bound && growing {
            // judged by the in-tract streak that led here
            match entry {
                Some(e) if fast(params, &moduli[e..], lm) => break Classification::FastEscaping,
                Some(_) => break Classification::EscapingInTract,
                None => {}
            }
        }
        let inside = match in_tract(tract, &cur, &next) {
            Some(b) => b,
            // undecidable far out: keep the streak alive only if it was growing
            None => entry.is_some() && growing,
        };
        if inside && (entry.is_none() || growing) {
            entry.get_or_insert(n);
        } else {
            entry = None;
        }
        moduli.push(lm);
        prev = Some(lm);
        if n == params.max_iter {
            break Classification::Other;
        }
        match next {
            Step::Next(p) => cur = p,
            _ => break Classification::Other,
        }
        n += 1;
    };
    Ok(OrbitRecord {
        z0,
        classification: class,
        iterates,
        steps: n,
        entry_index: entry,
    })
}

fn fast(params: &OrbitParams, log_moduli: &[LogTower], last: LogTower) -> bool {
    let Some(bounds) = &params.fast_bounds else {
        return false;
    };
    log_moduli
        .iter()
        .chain(std::iter::once(&last))
        .zip(bounds)
        .all(|(lm, b)| b.ln() <= *lm)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FastEscapeReport {
    pub passed: bool,
    pub depth_checked: usize,
    pub failed_at: Option<usize>,
    /// `|f^n(z0)|` as towers.
    pub moduli: Vec<LogTower>,
    /// `M_D^n(rho)` as towers.
    pub bounds: Vec<LogTower>,
}

/// Checks `f^n(z0) in D` and `|f^n(z0)| >= M_D^n(rho)` for `n = 0..=depth`.
///
/// Past the tower cap only in-tract monotone growth is required.
pub fn fast_escape_test(
    tract: &TractDescriptor,
    z0: Complex64,
    rho: f64,
    depth: usize,
) -> Result<FastEscapeReport, GrowthError> {
    let capped = depth.min(TOWER_CAP as usize);
    let bounds = md_towers(tract, rho, capped)?;
    let mut moduli = Vec::new();
    let mut cur = OrbitPoint::Plain(z0);
    let mut failed_at = None;
    for n in 0..=depth {
        let next = step(&tract.model, &cur);
        let m = cur.log_modulus().exp();
        let inside = in_tract(tract, &cur, &next).unwrap_or_else(|| moduli.last().is_some_and(|p| m >= *p));
        let ok = inside
            && match bounds.get(n) {
                Some(b) => m >= *b,
                None => moduli.last().is_some_and(|p| m >= *p),
            };
        moduli.push(m);
        if !ok {
            failed_at = Some(n);
            break;
        }
        if n == depth {
            break;
        }
        match next {
            Step::Next(p) => cur = p,
            _ => {
                failed_at = Some(n + 1);
                break;
            }
        }
    }
    Ok(FastEscapeReport {
        passed: failed_at.is_none(),
        depth_checked: moduli.len().saturating_sub(1),
        failed_at,
        moduli,
        bounds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FastEscapeSeed {
    /// Real starting point of the search.
    pub x: f64,
    /// Number of iterations applied before the test.
    pub shift: usize,
    /// `f^shift(x)`, the point passing [`fast_escape_test`].
    pub z: Complex64,
}

/// Scans `count` real points of `[x_min, x_max]` and shifts `0..=max_shift`
/// for an orbit point passing [`fast_escape_test`].
pub fn find_fast_escape_seed(
    tract: &TractDescriptor,
    rho: f64,
    depth: usize,
    (x_min, x_max): (f64, f64),
    count: usize,
    max_shift: usize,
) -> Result<Option<FastEscapeSeed>, GrowthError> {
    for k in 0..count.max(1) {
        let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
        let x = x_min + (x_max - x_min) * t;
        let mut z = Complex64::new(x, 0.0);
        for shift in 0..=max_shift {
            if shift > 0 {
                match tract.model.eval(z).as_finite() {
                    Some(w) => z = w,
                    None => break,
                }
            }
            if fast_escape_test(tract, z, rho, depth)?.passed {
                return Ok(Some(FastEscapeSeed { x, shift, z }));
            }
        }
    }
    Ok(None)
}
