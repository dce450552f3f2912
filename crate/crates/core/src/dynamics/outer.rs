//! Outer sequences `G_{n+1} = fill(f(G_n ∩ D))` on log-polar rasters.
//!
//! For `B` bounded with `f` holomorphic near its closure, the boundary of
//! `f(B)` lies in `f(∂B)`, so the filled image is the complement of the
//! unbounded component of the complement of `f(∂B)`. Only the boundary is
//! mapped; it is refined until consecutive image points are within half a
//! cell, rasterized, and the exterior is flood filled from the outer edge.

use super::{in_tract, step, DynamicsError, OrbitPoint, Step};
use crate::exec::Exec;
use crate::growth::md_step;
use crate::tower::LogTower;
use crate::tract::{RegionRaster, TractDescriptor};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

/// A region on the grid `u = log|z|` by `theta = arg z`.
///
/// Rows are `u` bands from `u_min` up, columns are `theta` bands from `-pi`.
/// When `core` is set the disc `|z| < e^{u_min}` belongs to the region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogPolarRegion {
    pub u_min: f64,
    pub u_max: f64,
    pub nu: usize,
    pub ntheta: usize,
    #[serde(skip)]
    pub inside: Vec<bool>,
    pub core: bool,
}

impl LogPolarRegion {
    pub fn du(&self) -> f64 {
        (self.u_max - self.u_min) / self.nu as f64
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.ntheta as f64
    }

    fn cell_center(&self, iu: usize, it: usize) -> (f64, f64) {
        (
            self.u_min + (iu as f64 + 0.5) * self.du(),
            -PI + (it as f64 + 0.5) * self.dtheta(),
        )
    }

    fn build(u_min: f64, u_max: f64, nu: usize, ntheta: usize, core: bool, member: impl Fn(Complex64) -> bool) -> Self {
        let mut r = Self {
            u_min,
            u_max,
            nu,
            ntheta,
            inside: Vec::new(),
            core,
        };
        r.inside = (0..nu * ntheta)
            .map(|k| {
                let (u, t) = r.cell_center(k / ntheta, k % ntheta);
                member(Complex64::from_polar(u.exp(), t))
            })
            .collect();
        r
    }

    /// The disc `|z - center| < radius` on `[u_min, u_max]`.
    pub fn disc(center: Complex64, radius: f64, (u_min, u_max): (f64, f64), nu: usize, ntheta: usize) -> Self {
        let core = center.norm() + u_min.exp() <= radius;
        Self::build(u_min, u_max, nu, ntheta, core, |z| (z - center).norm() < radius)
    }

    /// Samples a component of a raster at the cell centres.
    pub fn from_raster(raster: &RegionRaster, label: u32, (u_min, u_max): (f64, f64), nu: usize, ntheta: usize) -> Self {
        let core = raster.label_at(Complex64::new(0.0, 0.0)) == Some(label);
        Self::build(u_min, u_max, nu, ntheta, core, |z| raster.label_at(z) == Some(label))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let u = z.norm().ln();
        if u < self.u_min {
            return self.core;
        }
        if u >= self.u_max {
            return false;
        }
        let iu = (((u - self.u_min) / self.du()) as usize).min(self.nu - 1);
        let it = (((z.arg() + PI) / self.dtheta()) as usize) % self.ntheta;
        self.inside[iu * self.ntheta + it]
    }

    /// `log` of the largest `r` with `{|z| <= r}` inside, if the core is.
    pub fn inner_log_radius(&self) -> Option<f64> {
        if !self.core {
            return None;
        }
        let du = self.du();
        let row = (0..self.nu).find(|&iu| (0..self.ntheta).any(|it| !self.inside[iu * self.ntheta + it]));
        Some(row.map_or(self.u_max, |iu| self.u_min + iu as f64 * du))
    }

    /// Largest `u` reached by the region.
    pub fn outer_log_radius(&self) -> f64 {
        let row = (0..self.nu)
            .rev()
            .find(|&iu| (0..self.ntheta).any(|it| self.inside[iu * self.ntheta + it]));
        row.map_or(self.u_min, |iu| self.u_min + (iu + 1) as f64 * self.du())
    }

    /// Cell edges separating the region from its complement, as segments in
    /// `(u, theta)`.
    fn boundary_edges(&self) -> Vec<[(f64, f64); 2]> {
        let (du, dt) = (self.du(), self.dtheta());
        let at = |iu: usize, it: usize| self.inside[iu * self.ntheta + it];
        let mut out = Vec::new();
        for iu in 0..self.nu {
            let u0 = self.u_min + iu as f64 * du;
            let u1 = u0 + du;
            for it in 0..self.ntheta {
                if !at(iu, it) {
                    continue;
                }
                let t0 = -PI + it as f64 * dt;
                let t1 = t0 + dt;
                if iu + 1 == self.nu || !at(iu + 1, it) {
                    out.push([(u1, t0), (u1, t1)]);
                }
                if (iu == 0 && !self.core) || (iu > 0 && !at(iu - 1, it)) {
                    out.push([(u0, t0), (u0, t1)]);
                }
                if !at(iu, (it + 1) % self.ntheta) {
                    out.push([(u0, t1), (u1, t1)]);
                }
                if !at(iu, (it + self.ntheta - 1) % self.ntheta) {
                    out.push([(u0, t0), (u1, t0)]);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OuterConfig {
    pub nu: usize,
    pub ntheta: usize,
    /// Upper `log|w|` of the image raster; derived from `M_D` when `None`.
    pub target_log: Option<f64>,
    /// Lower bound on `log r_n` for a step to apply.
    pub min_log_radius: f64,
    pub max_depth: u32,
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self {
            nu: 1024,
            ntheta: 1024,
            target_log: None,
            min_log_radius: 0.0,
            max_depth: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterStep {
    pub region: LogPolarRegion,
    /// `log r_{n+1}`; `r_{n+1}` itself may exceed `f64`.
    pub log_r: f64,
    pub log_r_prev: f64,
    pub target_log: f64,
    pub image_cells: usize,
    /// Boundary pieces whose image stayed coarser than a cell at full depth.
    pub gaps: usize,
}

impl OuterStep {
    pub fn r(&self) -> f64 {
        self.log_r.exp()
    }

    /// `r_{n+1} >= 2 r_n`
    pub fn doubles(&self) -> bool {
        self.log_r >= self.log_r_prev + std::f64::consts::LN_2
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Sample {
    Outside,
    Image(f64, f64),
    Unbounded,
}

struct ImageGrid {
    u_lo: f64,
    du: f64,
    dt: f64,
    nu: usize,
    ntheta: usize,
}

impl ImageGrid {
    fn cell(&self, u: f64, t: f64) -> u32 {
        let iu = (((u - self.u_lo) / self.du).max(0.0) as usize).min(self.nu - 1);
        let it = (((t + PI).rem_euclid(TAU) / self.dt) as usize) % self.ntheta;
        (iu * self.ntheta + it) as u32
    }

    fn close(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let dtheta = (a.1 - b.1 + PI).rem_euclid(TAU) - PI;
        (a.0 - b.0).abs() <= 0.5 * self.du && dtheta.abs() <= 0.5 * self.dt
    }
}

#[derive(Default)]
struct EdgeImage {
    cells: Vec<u32>,
    gaps: usize,
    max_u: f64,
    outside: bool,
    unbounded: bool,
}

impl EdgeImage {
    fn mark(&mut self, grid: &ImageGrid, s: Sample) {
        if let Sample::Image(u, t) = s {
            let c = grid.cell(u, t);
            if self.cells.last() != Some(&c) {
                self.cells.push(c);
            }
            self.max_u = self.max_u.max(u);
        }
    }
}

fn sample(tract: &TractDescriptor, u: f64, t: f64) -> Sample {
    let p = if u < 700.0 {
        OrbitPoint::Plain(Complex64::from_polar(u.exp(), t))
    } else {
        OrbitPoint::Far {
            log_modulus: LogTower::from_f64(u),
            phase: Some(t),
        }
    };
    let next = step(&tract.model, &p);
    match in_tract(tract, &p, &next) {
        Some(true) => {}
        Some(false) => return Sample::Outside,
        None => return Sample::Unbounded,
    }
    match next {
        Step::Next(OrbitPoint::Plain(w)) => Sample::Image(w.norm().ln(), w.arg()),
        Step::Next(OrbitPoint::Far {
            log_modulus,
            phase: Some(ph),
        }) => match log_modulus.to_f64() {
            Some(l) => Sample::Image(l, ph),
            None => Sample::Unbounded,
        },
        _ => Sample::Unbounded,
    }
}

const PROBE_DEPTH: u32 = 2;

fn refine(
    tract: &TractDescriptor,
    grid: &ImageGrid,
    a: ((f64, f64), Sample),
    b: ((f64, f64), Sample),
    depth: u32,
    max_depth: u32,
    acc: &mut EdgeImage,
) {
    let split = match (a.1, b.1) {
        (Sample::Unbounded, _) | (_, Sample::Unbounded) => {
            acc.unbounded = true;
            return;
        }
        (Sample::Outside, Sample::Outside) => {
            acc.outside = true;
            depth < PROBE_DEPTH
        }
        (Sample::Image(ua, ta), Sample::Image(ub, tb)) => !grid.close((ua, ta), (ub, tb)),
        _ => {
            acc.outside = true;
            true
        }
    };
    if !split || depth >= max_depth {
        if split && matches!((a.1, b.1), (Sample::Image(..), Sample::Image(..))) {
            acc.gaps += 1;
        }
        acc.mark(grid, a.1);
        acc.mark(grid, b.1);
        return;
    }
    let m = (0.5 * (a.0 .0 + b.0 .0), 0.5 * (a.0 .1 + b.0 .1));
    let sm = (m, sample(tract, m.0, m.1));
    refine(tract, grid, a, sm, depth + 1, max_depth, acc);
    refine(tract, grid, sm, b, depth + 1, max_depth, acc);
}

/// One step of the outer sequence: `G_{n+1}` and `log r_{n+1}`, where
/// `r_{n+1}` is the largest radius with `{|w| <= r_{n+1}}` in `G_{n+1}`.
pub fn outer_sequence_step(
    tract: &TractDescriptor,
    region: &LogPolarRegion,
    config: &OuterConfig,
    exec: Exec,
) -> Result<OuterStep, DynamicsError> {
    let log_r_prev = region
        .inner_log_radius()
        .ok_or_else(|| DynamicsError::PreconditionViolated("region does not surround the origin".into()))?;
    if log_r_prev < config.min_log_radius {
        return Err(DynamicsError::PreconditionViolated(format!(
            "inscribed radius e^{log_r_prev:.3} is below e^{:.3}",
            config.min_log_radius
        )));
    }
    if config.nu < 2 || config.ntheta < 4 {
        return Err(DynamicsError::PreconditionViolated("image raster too coarse".into()));
    }
    let log_r = tract.log_threshold();
    let target = match config.target_log {
        Some(t) => t,
        None => {
            let outer = LogTower::exp_of(region.outer_log_radius());
            let md = md_step(tract, outer)?.ln();
            let md = md.to_f64().ok_or(DynamicsError::ImageEscapesWindow {
                reached: md.approx(),
                target: f64::MAX,
            })?;
            // leave a few free rows above the largest possible image
            md + (4.0 * (md - log_r) / config.nu as f64).max(1.0)
        }
    };
    let u_lo = log_r - 0.5;
    if !(target > log_r) {
        return Err(DynamicsError::PreconditionViolated("target below the threshold".into()));
    }
    let grid = ImageGrid {
        u_lo,
        du: (target - u_lo) / config.nu as f64,
        dt: TAU / config.ntheta as f64,
        nu: config.nu,
        ntheta: config.ntheta,
    };

    let edges = region.boundary_edges();
    let images = exec.map_slice(&edges, |&[p, q]| {
        let mut acc = EdgeImage::default();
        let a = (p, sample(tract, p.0, p.1));
        let b = (q, sample(tract, q.0, q.1));
        refine(tract, &grid, a, b, 0, config.max_depth, &mut acc);
        acc
    });

    let mut marked = vec![false; config.nu * config.ntheta];
    let mut reached = f64::NEG_INFINITY;
    let mut gaps = 0;
    let mut ring = !tract.contains(Complex64::new(0.0, 0.0));
    for img in &images {
        if img.unbounded {
            return Err(DynamicsError::ImageEscapesWindow {
                reached: f64::INFINITY,
                target,
            });
        }
        reached = reached.max(img.max_u);
        gaps += img.gaps;
        ring |= img.outside;
        for &c in &img.cells {
            marked[c as usize] = true;
        }
    }
    if reached >= target - grid.du {
        return Err(DynamicsError::ImageEscapesWindow { reached, target });
    }
    if ring {
        // the part of ∂B on ∂D maps into |w| = R
        let iu = grid.cell(log_r, 0.0) as usize / config.ntheta;
        for it in 0..config.ntheta {
            marked[iu * config.ntheta + it] = true;
        }
    }
    let image_cells = marked.iter().filter(|&&m| m).count();

    let n = config.ntheta;
    let mut exterior = vec![false; config.nu * n];
    let mut queue = VecDeque::new();
    let top = config.nu - 1;
    for it in 0..n {
        let k = top * n + it;
        if !marked[k] {
            exterior[k] = true;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        let (iu, it) = (k / n, k % n);
        if iu == 0 {
            return Err(DynamicsError::PreconditionViolated(
                "forward image does not surround |w| = R".into(),
            ));
        }
        let mut nbrs = vec![(iu - 1) * n + it, iu * n + (it + 1) % n, iu * n + (it + n - 1) % n];
        if iu + 1 < config.nu {
            nbrs.push((iu + 1) * n + it);
        }
        for m in nbrs {
            if !marked[m] && !exterior[m] {
                exterior[m] = true;
                queue.push_back(m);
            }
        }
    }
    let first = exterior.iter().position(|&e| e).unwrap_or(config.nu * n);
    let log_r_next = u_lo + (first / n) as f64 * grid.du;
    Ok(OuterStep {
        region: LogPolarRegion {
            u_min: u_lo,
            u_max: target,
            nu: config.nu,
            ntheta: n,
            inside: exterior.iter().map(|e| !e).collect(),
            core: true,
        },
        log_r: log_r_next,
        log_r_prev,
        target_log: target,
        image_cells,
        gaps,
    })
}

/// Up to `steps` outer-sequence steps from `g0`, stopping at the first error.
pub fn outer_sequence(
    tract: &TractDescriptor,
    g0: &LogPolarRegion,
    steps: usize,
    config: &OuterConfig,
    exec: Exec,
) -> (Vec<OuterStep>, Option<DynamicsError>) {
    let mut out: Vec<OuterStep> = Vec::new();
    for _ in 0..steps {
        let region = out.last().map_or(g0, |s| &s.region);
        match outer_sequence_step(tract, region, config, exec) {
            Ok(s) => out.push(s),
            Err(e) => return (out, Some(e)),
        }
    }
    (out, None)
}
