use crate::exec::Exec;
use crate::functions::FunctionModel;
use crate::tract::Window;
use num_complex::Complex64;
use serde::Serialize;

const NEWTON_ITERS: usize = 80;
const DEDUP_TOL: f64 = 1e-7;
const VALID_TOL: f64 = 1e-9;
const SUPER_TOL: f64 = 1e-6;
const INDIFFERENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointType {
    Superattracting,
    Attracting,
    Indifferent,
    Repelling,
}

impl FixedPointType {
    pub fn of_multiplier(m: Complex64) -> Self {
        let a = m.norm();
        if a <= SUPER_TOL {
            Self::Superattracting
        } else if (a - 1.0).abs() <= INDIFFERENT_TOL {
            Self::Indifferent
        } else if a < 1.0 {
            Self::Attracting
        } else {
            Self::Repelling
        }
    }

    pub fn is_attracting(self) -> bool {
        matches!(self, Self::Superattracting | Self::Attracting)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPointInfo {
    pub point: Complex64,
    pub multiplier: Complex64,
    #[serde(rename = "type")]
    pub kind: FixedPointType,
}

/// Fixed points of `f` in `window`, by Newton's method on `f(z) - z` from a
/// `grid x grid` lattice of seeds, sorted by real then imaginary part.
pub fn find_fixed_points(model: &FunctionModel, window: &Window, grid: usize, exec: Exec) -> Vec<FixedPointInfo> {
    let Ok(seeds) = Window::from_bounds(window.bounds(), grid.max(1), grid.max(1)) else {
        return Vec::new();
    };
    let found = exec.map(seeds.len(), |k| {
        let z0 = seeds.pixel_center(k % seeds.width, k / seeds.width);
        newton(model, z0).filter(|z| window.contains(*z))
    });
    let mut points: Vec<Complex64> = Vec::new();
    for z in found.into_iter().flatten() {
        if points.iter().all(|p| (p - z).norm() > DEDUP_TOL * z.norm().max(1.0)) {
            points.push(z);
        }
    }
    points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    points
        .into_iter()
        .filter_map(|z| {
            let m = model.derivative_or_numeric(z).ok()?.as_finite()?;
            Some(FixedPointInfo {
                point: z,
                multiplier: m,
                kind: FixedPointType::of_multiplier(m),
            })
        })
        .collect()
}

fn newton(model: &FunctionModel, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..NEWTON_ITERS {
        let fz = model.eval(z).as_finite()?;
        let d = model.derivative_or_numeric(z).ok()?.as_finite()?;
        let g = fz - z;
        let dg = d - 1.0;
        if dg.norm() == 0.0 {
            return None;
        }
        let mut dz = g / dg;
        // keep wild early steps from jumping across the plane
        if dz.norm() > 2.0 {
            dz *= 2.0 / dz.norm();
        }
        z -= dz;
        if !z.is_finite() {
            return None;
        }
        if dz.norm() <= 1e-14 * z.norm().max(1.0) {
            break;
        }
    }
    let fz = model.eval(z).as_finite()?;
    ((fz - z).norm() <= VALID_TOL * z.norm().max(1.0)).then_some(z)
}

/// An attracting fixed point with a disc that `f` maps into itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Basin {
    pub id: usize,
    pub fixed_point: FixedPointInfo,
    pub trap_radius: f64,
}

impl Basin {
    pub fn traps(&self, z: Complex64) -> bool {
        (z - self.fixed_point.point).norm() < self.trap_radius
    }
}

const TRAP_RAYS: usize = 64;

/// Trap discs for the attracting points of `fixed`.
///
/// The radius is halved until `|f'| <= min(0.95, (1 + |m|)/2)` on the
/// bounding circle and the disc is pole free, so `f` contracts the disc.
pub fn attracting_basins(model: &FunctionModel, fixed: &[FixedPointInfo]) -> Vec<Basin> {
    fixed
        .iter()
        .filter(|p| p.kind.is_attracting())
        .enumerate()
        .filter_map(|(id, p)| {
            let bound = 0.95f64.min(0.5 * (1.0 + p.multiplier.norm()));
            let mut r = 0.25 * p.point.norm().max(1.0);
            for _ in 0..40 {
                if contracts(model, p.point, r, bound) {
                    return Some(Basin {
                        id,
                        fixed_point: *p,
                        trap_radius: r,
                    });
                }
                r *= 0.5;
            }
            None
        })
        .collect()
}

fn contracts(model: &FunctionModel, c: Complex64, r: f64, bound: f64) -> bool {
    if !model.poles_in(c.re - r, c.re + r, c.im - r, c.im + r).is_empty() {
        return false;
    }
    (0..TRAP_RAYS).all(|k| {
        let z = c + Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / TRAP_RAYS as f64);
        model
            .derivative_or_numeric(z)
            .ok()
            .and_then(|d| d.as_finite())
            .is_some_and(|d| d.norm() <= bound)
    })
}
