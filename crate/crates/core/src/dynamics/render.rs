use super::fixed::{attracting_basins, find_fixed_points, Basin, FixedPointInfo};
use super::orbit::{iterate, Classification, OrbitParams};
use super::DynamicsError;
use crate::exec::Exec;
use crate::functions::FunctionModel;
use crate::tract::{locate_tract_with, TractDescriptor, Window};
use num_complex::Complex64;
use serde::Serialize;
use std::io::{self, Write};

/// Side of the raster on which the tract is located for a render.
pub const TRACT_RESOLUTION: usize = 256;
/// Seed lattice for the fixed-point search.
pub const FIXED_POINT_GRID: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Palette {
    pub basin: [u8; 3],
    pub escaping: [u8; 3],
    pub other: [u8; 3],
}

impl Palette {
    /// Grey basins, black escaping points, white elsewhere.
    pub fn fig1() -> Self {
        Self {
            basin: [128, 128, 128],
            escaping: [0, 0, 0],
            other: [255, 255, 255],
        }
    }

    /// Black escaping points, grey basins, white elsewhere.
    pub fn fig2() -> Self {
        Self {
            basin: [160, 160, 160],
            escaping: [0, 0, 0],
            other: [255, 255, 255],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "fig1" => Some(Self::fig1()),
            "fig2" => Some(Self::fig2()),
            _ => None,
        }
    }

    pub fn color(&self, class: PixelClass) -> [u8; 3] {
        match class {
            PixelClass::Basin => self.basin,
            PixelClass::Escaping | PixelClass::FastEscaping => self.escaping,
            PixelClass::Prepole | PixelClass::Other => self.other,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PixelClass {
    Basin,
    Escaping,
    FastEscaping,
    Prepole,
    #[default]
    Other,
}

impl From<Classification> for PixelClass {
    fn from(c: Classification) -> Self {
        match c {
            Classification::EscapingInTract => Self::Escaping,
            Classification::FastEscaping => Self::FastEscaping,
            Classification::Basin { .. } => Self::Basin,
            Classification::Prepole { .. } => Self::Prepole,
            Classification::Other => Self::Other,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub basin: usize,
    pub escaping: usize,
    pub fast_escaping: usize,
    pub prepole: usize,
    pub other: usize,
}

impl Histogram {
    fn add(&mut self, c: PixelClass) {
        match c {
            PixelClass::Basin => self.basin += 1,
            PixelClass::Escaping => self.escaping += 1,
            PixelClass::FastEscaping => self.fast_escaping += 1,
            PixelClass::Prepole => self.prepole += 1,
            PixelClass::Other => self.other += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.basin + self.escaping + self.fast_escaping + self.prepole + self.other
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    pub model: FunctionModel,
    pub window: Window,
    pub palette: Palette,
    pub params: OrbitParams,
    /// Tract threshold and seed; the model defaults when `None`.
    pub threshold: Option<f64>,
    pub seed: Option<Complex64>,
    /// Enables the fast-escaping class.
    pub rho: Option<f64>,
}

impl RenderSpec {
    pub fn new(model: FunctionModel, window: Window, palette: Palette) -> Self {
        Self {
            model,
            window,
            palette,
            params: OrbitParams::default(),
            threshold: None,
            seed: None,
            rho: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RenderOutput {
    pub width: usize,
    pub height: usize,
    #[serde(skip)]
    pub rgb: Vec<u8>,
    #[serde(skip)]
    pub classes: Vec<PixelClass>,
    pub histogram: Histogram,
    pub fixed_points: Vec<FixedPointInfo>,
    pub basins: Vec<Basin>,
    #[serde(skip)]
    pub tract: TractDescriptor,
}

impl RenderOutput {
    pub fn class_at(&self, z: Complex64, window: &Window) -> Option<PixelClass> {
        let (i, j) = window.pixel_of(z)?;
        Some(self.classes[j * self.width + i])
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

pub fn write_ppm<W: Write>(out: &RenderOutput, mut w: W) -> io::Result<()> {
    w.write_all(&out.to_ppm())
}

pub fn render(spec: &RenderSpec) -> Result<RenderOutput, DynamicsError> {
    render_with(spec, Exec::default())
}

/// Classifies every pixel centre of the window and colours it.
///
/// The tract is located on a fixed-size raster over the hull of the render
/// window and the model's default tract window, so the picture does not
/// depend on the output resolution.
pub fn render_with(spec: &RenderSpec, exec: Exec) -> Result<RenderOutput, DynamicsError> {
    if spec.params.max_iter == 0 {
        return Err(DynamicsError::BadMaxIter);
    }
    let model = &spec.model;
    let defaults = model.tract_defaults();
    let default_window = Window::from_bounds(defaults.window, TRACT_RESOLUTION, TRACT_RESOLUTION)
        .map_err(|e| DynamicsError::TractNotFound(e.to_string()))?;
    let hull = spec
        .window
        .hull(&default_window)
        .with_resolution(TRACT_RESOLUTION, TRACT_RESOLUTION)
        .map_err(|e| DynamicsError::TractNotFound(e.to_string()))?;
    let tract = locate_tract_with(
        model,
        spec.threshold.unwrap_or(defaults.threshold),
        spec.seed.unwrap_or(defaults.seed),
        hull,
        exec,
    )
    .map_err(|e| DynamicsError::TractNotFound(e.to_string()))?;

    let fixed_points = find_fixed_points(model, &spec.window, FIXED_POINT_GRID, exec);
    let basins = attracting_basins(model, &fixed_points);
    let params = match spec.rho {
        Some(rho) => spec.params.clone().with_fast_rho(&tract, rho)?,
        None => spec.params.clone(),
    };

    let w = spec.window.width;
    let h = spec.window.height;
    let mut classes = vec![PixelClass::Other; w * h];
    exec.fill_chunks(&mut classes, w, |j, row| {
        for (i, px) in row.iter_mut().enumerate() {
            let z = spec.window.pixel_center(i, j);
            *px = iterate(&tract, &basins, z, &params)
                .map(|r| r.classification.into())
                .unwrap_or_default();
        }
    });
    let mut histogram = Histogram::default();
    let mut rgb = Vec::with_capacity(3 * w * h);
    for &c in &classes {
        histogram.add(c);
        rgb.extend_from_slice(&spec.palette.color(c));
    }
    Ok(RenderOutput {
        width: w,
        height: h,
        rgb,
        classes,
        histogram,
        fixed_points,
        basins,
        tract,
    })
}
