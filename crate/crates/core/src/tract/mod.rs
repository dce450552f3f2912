//! Direct tracts as connected components of `{|f| > R}` on a sampled window.

mod contour;
mod raster;

pub use raster::{level_region, level_region_with, Connectivity, RegionRaster, Window};

use crate::exec::Exec;
use crate::functions::{ComplexValue, FunctionModel};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TractError {
    #[error("window needs re_min < re_max, im_min < im_max and at least one pixel")]
    DegenerateWindow,
    #[error("window of {width}x{height} pixels is too coarse, need at least 8x8")]
    WindowTooCoarse { width: usize, height: usize },
    #[error("threshold must be positive and finite, got {0}")]
    BadThreshold(f64),
    #[error("log|f(seed)| = {log_modulus} does not exceed log R = {log_threshold} at {seed}")]
    SeedBelowThreshold {
        seed: Complex64,
        log_modulus: f64,
        log_threshold: f64,
    },
    #[error("seed {0} lies outside the window")]
    SeedOutsideWindow(Complex64),
    #[error("point {0} lies outside the tract window")]
    OutsideWindow(Complex64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectVerdict {
    /// No pole of the model lies in the component.
    DirectCandidate,
    /// A declared pole lies in the component.
    ContainsPole,
    /// A pixel center hit a pole the model did not declare.
    Unknown,
}

/// Evidence on whether `f` is a universal covering of `{|w| > R}` on the tract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogarithmicVerdict {
    /// No critical point was detected in the sampled component.
    Heuristic,
    CriticalPointsFound(usize),
}

/// Angular range `[start, start + width]` through which a component leaves
/// its window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sector {
    pub start: f64,
    pub width: f64,
}

impl Sector {
    pub fn contains_angle(&self, theta: f64) -> bool {
        (theta - self.start).rem_euclid(2.0 * PI) <= self.width
    }
}

/// One component of `{|f| > R}` together with the verdicts computed on it.
#[derive(Clone, Debug, Serialize)]
pub struct TractDescriptor {
    pub model: FunctionModel,
    pub threshold: f64,
    pub seed: Complex64,
    /// The seed's component, relabeled to 1.
    pub raster: RegionRaster,
    pub pixels: usize,
    pub direct: DirectVerdict,
    pub poles_inside: Vec<Complex64>,
    /// True when no part of the complement touches the window edge. Only
    /// meaningful relative to the window.
    pub complement_bounded: bool,
    pub logarithmic: LogarithmicVerdict,
    /// Where the component crosses the window edge; `None` if it does not.
    pub sector: Option<Sector>,
}

/// Locates the component of `{|f| > R}` containing `seed`.
pub fn locate_tract(model: &FunctionModel, threshold: f64, seed: Complex64, window: Window) -> Result<TractDescriptor, TractError> {
    locate_tract_with(model, threshold, seed, window, Exec::default())
}

pub fn locate_tract_with(
    model: &FunctionModel,
    threshold: f64,
    seed: Complex64,
    window: Window,
    exec: Exec,
) -> Result<TractDescriptor, TractError> {
    let region = level_region_with(model, threshold, window, Connectivity::Four, exec)?;
    let log_r = threshold.ln();
    let lm = model.eval(seed).log_modulus();
    if !(lm > log_r) {
        return Err(TractError::SeedBelowThreshold {
            seed,
            log_modulus: lm,
            log_threshold: log_r,
        });
    }
    let (si, sj) = window.pixel_of(seed).ok_or(TractError::SeedOutsideWindow(seed))?;
    let label = seed_label(&region, si, sj).ok_or(TractError::SeedBelowThreshold {
        seed,
        log_modulus: lm,
        log_threshold: log_r,
    })?;
    Ok(describe(model, threshold, seed, &region, label, exec))
}

/// The seed pixel's label, or that of a 4-neighbour when the seed sits on a
/// super-threshold point inside a sub-threshold pixel.
fn seed_label(region: &RegionRaster, i: usize, j: usize) -> Option<u32> {
    let w = region.window;
    let here = region.label(i, j);
    if here != 0 {
        return Some(here);
    }
    let candidates = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
    candidates.iter().find_map(|&(di, dj)| {
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        if ni < 0 || nj < 0 || ni >= w.width as i64 || nj >= w.height as i64 {
            return None;
        }
        match region.label(ni as usize, nj as usize) {
            0 => None,
            l => Some(l),
        }
    })
}

fn describe(model: &FunctionModel, threshold: f64, seed: Complex64, region: &RegionRaster, label: u32, exec: Exec) -> TractDescriptor {
    let w = region.window;
    let raster = region.restrict(label);
    let pixels = raster.count(1);

    let poles_inside: Vec<Complex64> = model
        .poles_in(w.re_min, w.re_max, w.im_min, w.im_max)
        .into_iter()
        .filter(|&p| raster.label_at(p) == Some(1))
        .collect();
    let stray_pole = (0..w.len()).any(|k| raster.labels[k] == 1 && raster.field[k] == f64::INFINITY && {
        let c = w.pixel_center(k % w.width, k / w.width);
        !poles_inside.iter().any(|p| (p - c).norm() < w.dx().hypot(w.dy()))
    });
    let direct = if !poles_inside.is_empty() {
        DirectVerdict::ContainsPole
    } else if stray_pole {
        DirectVerdict::Unknown
    } else {
        DirectVerdict::DirectCandidate
    };

    let on_edge = |i: usize, j: usize| i == 0 || j == 0 || i + 1 == w.width || j + 1 == w.height;
    let mut complement_bounded = true;
    let mut edge_angles = Vec::new();
    let mut min_edge_radius = f64::INFINITY;
    for j in 0..w.height {
        for i in 0..w.width {
            if !on_edge(i, j) {
                continue;
            }
            if raster.label(i, j) == 1 {
                let c = w.pixel_center(i, j);
                edge_angles.push(c.arg());
                min_edge_radius = min_edge_radius.min(c.norm());
            } else {
                complement_bounded = false;
            }
        }
    }
    let slack = 0.5 * w.dx().hypot(w.dy()) / min_edge_radius.max(1e-300);
    let sector = angular_hull(&mut edge_angles).map(|s| Sector {
        start: s.start - slack,
        width: (s.width + 2.0 * slack).min(2.0 * PI),
    });

    let critical = count_critical_points(model, &raster, exec);
    let logarithmic = if critical == 0 {
        LogarithmicVerdict::Heuristic
    } else {
        LogarithmicVerdict::CriticalPointsFound(critical)
    };

    TractDescriptor {
        model: model.clone(),
        threshold,
        seed,
        raster,
        pixels,
        direct,
        poles_inside,
        complement_bounded,
        logarithmic,
        sector,
    }
}

/// Smallest arc containing all angles: the complement of the widest gap.
fn angular_hull(angles: &mut [f64]) -> Option<Sector> {
    if angles.is_empty() {
        return None;
    }
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let mut best_gap = angles[0] + 2.0 * PI - angles[n - 1];
    let mut start = angles[0];
    for k in 1..n {
        let gap = angles[k] - angles[k - 1];
        if gap > best_gap {
            best_gap = gap;
            start = angles[k];
        }
    }
    Some(Sector {
        start,
        width: 2.0 * PI - best_gap,
    })
}

/// Zeros of `f'/f` detected by the winding of `f'/f` around 2x2 pixel cells
/// lying wholly in the component.
fn count_critical_points(model: &FunctionModel, raster: &RegionRaster, exec: Exec) -> usize {
    let w = raster.window;
    let inside = |i: usize, j: usize| raster.label(i, j) == 1 && raster.value(i, j).is_finite();
    let rows: Vec<Vec<Option<Complex64>>> = exec.map(w.height, |j| {
        (0..w.width)
            .map(|i| {
                if inside(i, j) {
                    model.log_derivative(w.pixel_center(i, j))
                } else {
                    None
                }
            })
            .collect()
    });
    let counts = exec.map(w.height.saturating_sub(1), |j| {
        let mut n = 0;
        for i in 0..w.width - 1 {
            let corners = [rows[j][i], rows[j][i + 1], rows[j + 1][i + 1], rows[j + 1][i]];
            let Some(g) = corners.iter().copied().collect::<Option<Vec<_>>>() else {
                continue;
            };
            let mut turn = 0.0;
            for k in 0..4 {
                turn += (g[(k + 1) % 4] / g[k]).arg();
            }
            if (turn / (2.0 * PI)).round() != 0.0 {
                n += 1;
            }
        }
        n
    });
    counts.into_iter().sum()
}

impl TractDescriptor {
    pub fn window(&self) -> Window {
        self.raster.window
    }

    pub fn log_threshold(&self) -> f64 {
        self.threshold.ln()
    }

    /// Membership for a point inside the window: its pixel must carry the
    /// tract's label and `|f(z)| > R` must hold at `z` itself.
    pub fn contains_point(&self, z: Complex64) -> Result<bool, TractError> {
        match self.raster.label_at(z) {
            None => Err(TractError::OutsideWindow(z)),
            Some(l) => Ok(l == 1 && self.above_threshold(&self.model.eval(z))),
        }
    }

    /// Membership anywhere in the plane.
    ///
    /// Outside the window a point belongs to the tract when its argument lies
    /// in the sector through which the component leaves the window and
    /// `|f(z)| > R`.
    pub fn contains(&self, z: Complex64) -> bool {
        match self.contains_point(z) {
            Ok(b) => b,
            Err(_) => self.in_sector(z) && self.above_threshold(&self.model.eval(z)),
        }
    }

    /// Same as [`contains`](Self::contains) with `f(z)` already known.
    pub fn contains_with_value(&self, z: Complex64, value: &ComplexValue) -> bool {
        if !self.above_threshold(value) {
            return false;
        }
        match self.raster.label_at(z) {
            Some(l) => l == 1,
            None => self.in_sector(z),
        }
    }

    pub fn in_sector(&self, z: Complex64) -> bool {
        self.sector.is_some_and(|s| s.contains_angle(z.arg()))
    }

    fn above_threshold(&self, v: &ComplexValue) -> bool {
        !v.is_pole() && v.log_modulus() > self.log_threshold()
    }

    /// Marching-squares contour of `|f| = R` along the component boundary.
    pub fn boundary_curve(&self) -> Vec<Vec<Complex64>> {
        contour::trace(&self.raster, 1)
    }

    /// Fraction of window pixels in the tract.
    pub fn area_fraction(&self) -> f64 {
        self.pixels as f64 / self.window().len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_tract() -> TractDescriptor {
        let m = FunctionModel::parse("exp").unwrap();
        let w = Window::new(-5.0, 5.0, -5.0, 5.0, 200, 200).unwrap();
        locate_tract(&m, 1.0, c(3.0, 0.0), w).unwrap()
    }

    fn example1_tract(threshold: f64, seed: f64) -> Result<TractDescriptor, TractError> {
        let m = FunctionModel::example1(1.0);
        let w = Window::new(-10.0, 8.0, -12.0, 12.0, 400, 400).unwrap();
        locate_tract(&m, threshold, c(seed, 0.0), w)
    }

    #[test]
    fn exp_tract_is_the_right_half() {
        let t = exp_tract();
        assert_eq!(t.direct, DirectVerdict::DirectCandidate);
        assert_eq!(t.pixels, 100 * 200);
        assert!(!t.complement_bounded);
        assert_eq!(t.logarithmic, LogarithmicVerdict::Heuristic);
        assert_eq!(t.contains_point(c(1.0, 0.0)), Ok(true));
        assert_eq!(t.contains_point(c(-1.0, 0.0)), Ok(false));
        assert!(matches!(t.contains_point(c(6.0, 0.0)), Err(TractError::OutsideWindow(_))));
        assert!(t.contains(c(40.0, 3.0)));
        assert!(!t.contains(c(-40.0, 3.0)));
        let s = t.sector.unwrap();
        assert!(s.contains_angle(0.0));
        assert!(s.contains_angle(1.5));
        assert!(!s.contains_angle(PI));
    }

    #[test]
    fn example1_right_tract_stays_right_of_re_one() {
        let t = example1_tract(20.0, 6.0).unwrap();
        assert_eq!(t.direct, DirectVerdict::DirectCandidate);
        let w = t.window();
        for j in 0..w.height {
            for i in 0..w.width {
                if t.raster.label(i, j) == 1 {
                    assert!(w.pixel_center(i, j).re > 1.0);
                }
            }
        }
        assert_eq!(t.contains_point(c(0.5, 0.0)), Ok(false));
    }

    #[test]
    fn example1_no_pole_in_right_tract() {
        // poles solve z e^z = 1; locate them independently by Newton from a grid
        let t = example1_tract(20.0, 6.0).unwrap();
        let mut found = Vec::new();
        for a in -10..=8 {
            for b in -12..=12 {
                let mut z = c(a as f64, b as f64);
                for _ in 0..100 {
                    let e = z.exp();
                    z -= (z * e - 1.0) / ((z + 1.0) * e);
                }
                let w = t.window();
                if (z * z.exp() - 1.0).norm() < 1e-12 && w.contains(z) && !found.iter().any(|p: &Complex64| (p - z).norm() < 1e-8) {
                    found.push(z);
                }
            }
        }
        assert_eq!(found.len(), 5);
        for p in found {
            assert_eq!(t.contains_point(p), Ok(false), "{p}");
        }
    }

    #[test]
    fn example1_negative_axis_component() {
        // |f(-8)| is about 8, below 20
        assert!(matches!(example1_tract(20.0, -8.0), Err(TractError::SeedBelowThreshold { .. })));
        let t = example1_tract(5.0, -8.0).unwrap();
        assert_eq!(t.direct, DirectVerdict::ContainsPole);
        assert!(!t.poles_inside.is_empty());
    }

    #[test]
    fn gamma_tract_contains_real_segment() {
        let m = FunctionModel::parse("gamma").unwrap();
        let w = Window::new(-5.0, 10.0, -10.0, 10.0, 300, 400).unwrap();
        let t = locate_tract(&m, 10.0, c(8.0, 0.0), w).unwrap();
        for k in 0..=40 {
            let x = 6.0 + k as f64 * 0.1;
            assert!(t.contains(c(x, 0.0)), "{x}");
        }
    }

    #[test]
    fn boundary_of_gamma_shift1_tract_is_on_level_set() {
        let m = FunctionModel::parse("gamma_shift1").unwrap();
        let w = Window::new(-5.0, 10.0, -10.0, 10.0, 300, 400).unwrap();
        let t = locate_tract(&m, 10.0, c(8.0, 0.0), w).unwrap();
        let lines = t.boundary_curve();
        assert!(!lines.is_empty());
        for p in lines.iter().flatten() {
            let f = m.eval(*p).log_modulus().exp();
            assert!((f - 10.0).abs() / 10.0 <= 0.05, "{p}: {f}");
        }
    }

    #[test]
    fn angular_hull_wraps_around() {
        let mut a = vec![3.0, -3.0, 3.1];
        let s = angular_hull(&mut a).unwrap();
        assert!((s.start - 3.0).abs() < 1e-15);
        assert!((s.width - (2.0 * PI - 6.0 + 0.0)).abs() < 1e-12);
        assert!(s.contains_angle(PI));
        assert!(!s.contains_angle(0.0));
    }
}
