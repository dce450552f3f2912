//! Orbits, fixed points, escaping-set classification, figure rendering and
//! outer sequences.

mod bounds;
mod fixed;
mod orbit;
mod outer;
mod render;

pub use bounds::{derivative_bound_check, empirical_r1, DerivBoundConfig, DerivBoundReport};
pub use fixed::{attracting_basins, find_fixed_points, Basin, FixedPointInfo, FixedPointType};
pub use orbit::{
    fast_escape_test, find_fast_escape_seed, iterate, Classification, FastEscapeReport, FastEscapeSeed, OrbitParams,
    OrbitRecord,
};
pub use outer::{outer_sequence, outer_sequence_step, LogPolarRegion, OuterConfig, OuterStep};
pub use render::{render, render_with, write_ppm, Histogram, Palette, PixelClass, RenderOutput, RenderSpec};

use crate::functions::{wrap_phase, ComplexValue, FarValue, FunctionModel, LN_F64_MAX};
use crate::tower::LogTower;
use crate::tract::TractDescriptor;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("no tract found: {0}")]
    TractNotFound(String),
    #[error("max_iter must be at least 1")]
    BadMaxIter,
    #[error("the tract is not flagged logarithmic")]
    NotLogarithmic,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("forward image reaches log|w| = {reached}, beyond the target {target}")]
    ImageEscapesWindow { reached: f64, target: f64 },
    #[error(transparent)]
    Growth(#[from] crate::growth::GrowthError),
}

/// A point of an orbit, kept in log form once it leaves `f64` range in
/// either direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum OrbitPoint {
    Plain(Complex64),
    Far {
        /// `log |w|`
        log_modulus: LogTower,
        /// `arg w`, when still resolvable.
        phase: Option<f64>,
    },
}

const TINY: f64 = 1e-300;

/// Outcome of applying `f` to an [`OrbitPoint`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Step {
    Pole,
    Next(OrbitPoint),
    Undetermined,
}

impl OrbitPoint {
    /// `log |w|` as a tower.
    pub(crate) fn log_modulus(&self) -> LogTower {
        match *self {
            OrbitPoint::Plain(z) => LogTower::from_f64(z.norm().ln()),
            OrbitPoint::Far { log_modulus, .. } => log_modulus,
        }
    }

    pub(crate) fn as_value(&self) -> ComplexValue {
        match *self {
            OrbitPoint::Plain(z) => ComplexValue::finite(z),
            OrbitPoint::Far { log_modulus, phase } => ComplexValue::Overflow {
                log_modulus: log_modulus.approx(),
                phase: phase.unwrap_or(f64::NAN),
            },
        }
    }

    fn from_value(v: ComplexValue) -> Step {
        match v {
            ComplexValue::PoleHit => Step::Pole,
            ComplexValue::Finite { re, im } => Step::Next(OrbitPoint::Plain(Complex64::new(re, im))),
            ComplexValue::Overflow { log_modulus, phase } => {
                if log_modulus < LN_F64_MAX {
                    Step::Next(OrbitPoint::Plain(Complex64::from_polar(log_modulus.exp(), phase)))
                } else {
                    Step::Next(OrbitPoint::Far {
                        log_modulus: LogTower::from_f64(log_modulus),
                        phase: Some(phase),
                    })
                }
            }
        }
    }
}

/// Applies `f`, switching to far-field asymptotics for points beyond `f64`.
pub(crate) fn step(model: &FunctionModel, p: &OrbitPoint) -> Step {
    match *p {
        OrbitPoint::Plain(z) => {
            let v = model.eval(z);
            if let Some(w) = v.as_finite() {
                // keep underflowed values in log form
                if w.norm() < TINY {
                    if let Some(lw) = model.log_eval(z).filter(|l| l.re < TINY.ln()) {
                        return Step::Next(OrbitPoint::Far {
                            log_modulus: LogTower::from_f64(lw.re),
                            phase: Some(wrap_phase(lw.im)),
                        });
                    }
                }
            }
            OrbitPoint::from_value(v)
        }
        OrbitPoint::Far { log_modulus, phase } => {
            let (Some(l), Some(phi)) = (log_modulus.to_f64(), phase) else {
                return Step::Undetermined;
            };
            match model.far_eval(Complex64::new(l, phi)) {
                FarValue::Finite(w) => Step::Next(OrbitPoint::Plain(w)),
                FarValue::Huge { log_modulus, phase } => {
                    if let (Some(lm), Some(ph)) = (log_modulus.to_f64(), phase) {
                        if lm < LN_F64_MAX {
                            return Step::Next(OrbitPoint::Plain(Complex64::from_polar(lm.exp(), ph)));
                        }
                    }
                    Step::Next(OrbitPoint::Far { log_modulus, phase })
                }
                FarValue::Unknown => Step::Undetermined,
            }
        }
    }
}

/// Tract membership of `p` given the result of stepping it; `None` when
/// undecidable.
pub(crate) fn in_tract(tract: &TractDescriptor, p: &OrbitPoint, next: &Step) -> Option<bool> {
    let log_r = LogTower::from_f64(tract.log_threshold());
    let above = match next {
        Step::Pole => return Some(false),
        Step::Undetermined => None,
        Step::Next(q) => Some(q.log_modulus() > log_r),
    };
    match *p {
        OrbitPoint::Plain(z) => match tract.raster.label_at(z) {
            Some(l) => above.map(|a| a && l == 1),
            None => above.map(|a| a && tract.in_sector(z)),
        },
        OrbitPoint::Far { log_modulus, .. } if log_modulus.height == 0 && log_modulus.top < 0.0 => {
            let origin = tract.raster.label_at(Complex64::new(0.0, 0.0)) == Some(1);
            above.map(|a| a && origin)
        }
        OrbitPoint::Far { phase, .. } => {
            let phi = phase?;
            let sector = tract.sector.is_some_and(|s| s.contains_angle(phi));
            if !sector {
                return Some(false);
            }
            above
        }
    }
}
