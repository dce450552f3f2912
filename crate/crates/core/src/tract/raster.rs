use super::TractError;
use crate::exec::Exec;
use crate::functions::{ComplexValue, FunctionModel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::VecDeque;

/// A rectangle of the plane sampled on a `width x height` pixel grid.
///
/// Pixel `(i, j)` is column `i` and row `j`; row 0 is the top (`im_max`) and
/// every pixel stands for the center of its cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub width: usize,
    pub height: usize,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, width: usize, height: usize) -> Result<Self, TractError> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || re_min >= re_max || im_min >= im_max || width == 0 || height == 0 {
            return Err(TractError::DegenerateWindow);
        }
        Ok(Window {
            re_min,
            re_max,
            im_min,
            im_max,
            width,
            height,
        })
    }

    /// `bounds` is `[re_min, re_max, im_min, im_max]`.
    pub fn from_bounds(bounds: [f64; 4], width: usize, height: usize) -> Result<Self, TractError> {
        Window::new(bounds[0], bounds[1], bounds[2], bounds[3], width, height)
    }

    pub fn bounds(&self) -> [f64; 4] {
        [self.re_min, self.re_max, self.im_min, self.im_max]
    }

    pub fn dx(&self) -> f64 {
        (self.re_max - self.re_min) / self.width as f64
    }

    pub fn dy(&self) -> f64 {
        (self.im_max - self.im_min) / self.height as f64
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.re_min + (i as f64 + 0.5) * self.dx(),
            self.im_max - (j as f64 + 0.5) * self.dy(),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// The pixel whose cell contains `z`.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        if !self.contains(z) {
            return None;
        }
        let i = (((z.re - self.re_min) / self.dx()) as usize).min(self.width - 1);
        let j = (((self.im_max - z.im) / self.dy()) as usize).min(self.height - 1);
        Some((i, j))
    }

    /// Same rectangle at a different resolution.
    pub fn with_resolution(&self, width: usize, height: usize) -> Result<Self, TractError> {
        Window::new(self.re_min, self.re_max, self.im_min, self.im_max, width, height)
    }

    /// Smallest window covering both rectangles, at this window's pixel size.
    pub fn hull(&self, other: &Window) -> Window {
        let (dx, dy) = (self.dx(), self.dy());
        let re_min = self.re_min.min(other.re_min);
        let re_max = self.re_max.max(other.re_max);
        let im_min = self.im_min.min(other.im_min);
        let im_max = self.im_max.max(other.im_max);
        Window {
            re_min,
            re_max,
            im_min,
            im_max,
            width: ((re_max - re_min) / dx).round().max(1.0) as usize,
            height: ((im_max - im_min) / dy).round().max(1.0) as usize,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        }
    }
}

/// Connected components of `{|f| > R}` on a window.
///
/// Label 0 marks pixels at or below the threshold. Alongside the labels the
/// raster keeps `log|f| - log R` at every pixel center (`+inf` at poles).
#[derive(Clone, Debug, PartialEq)]
pub struct RegionRaster {
    pub window: Window,
    pub connectivity: Connectivity,
    pub labels: Vec<u32>,
    pub components: u32,
    pub field: Vec<f64>,
}

impl RegionRaster {
    pub fn label(&self, i: usize, j: usize) -> u32 {
        self.labels[j * self.window.width + i]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.field[j * self.window.width + i]
    }

    pub fn label_at(&self, z: Complex64) -> Option<u32> {
        self.window.pixel_of(z).map(|(i, j)| self.label(i, j))
    }

    /// Number of pixels carrying `label`.
    pub fn count(&self, label: u32) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Pixel counts per label, index = label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.components as usize + 1];
        for &l in &self.labels {
            out[l as usize] += 1;
        }
        out
    }

    /// Copy keeping only `label`, renumbered to 1.
    pub fn restrict(&self, label: u32) -> RegionRaster {
        RegionRaster {
            window: self.window,
            connectivity: self.connectivity,
            labels: self.labels.iter().map(|&l| u32::from(l == label && label != 0)).collect(),
            components: 1,
            field: self.field.clone(),
        }
    }

    /// Binary PGM (`P5`), one byte per pixel holding the label mod 256.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.window.width, self.window.height).into_bytes();
        out.extend(self.labels.iter().map(|&l| (l % 256) as u8));
        out
    }

    /// Run-length encoding of the labels in row-major order.
    pub fn runs(&self) -> Vec<(u32, usize)> {
        let mut runs: Vec<(u32, usize)> = Vec::new();
        for &l in &self.labels {
            match runs.last_mut() {
                Some((last, n)) if *last == l => *n += 1,
                _ => runs.push((l, 1)),
            }
        }
        runs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("raster serializes")
    }
}

impl Serialize for RegionRaster {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Export<'a> {
            window: &'a Window,
            connectivity: Connectivity,
            runs: Vec<(u32, usize)>,
        }
        Export {
            window: &self.window,
            connectivity: self.connectivity,
            runs: self.runs(),
        }
        .serialize(s)
    }
}

/// `log|f| - log R`, with poles mapped to `+inf`.
pub(crate) fn excess(value: &ComplexValue, log_r: f64) -> f64 {
    match value {
        ComplexValue::PoleHit => f64::INFINITY,
        v => v.log_modulus() - log_r,
    }
}

pub fn level_region(model: &FunctionModel, threshold: f64, window: Window) -> Result<RegionRaster, TractError> {
    level_region_with(model, threshold, window, Connectivity::Four, Exec::default())
}

/// Samples `log|f| - log R` at every pixel center and labels the
/// super-threshold pixels in scan order.
pub fn level_region_with(
    model: &FunctionModel,
    threshold: f64,
    window: Window,
    connectivity: Connectivity,
    exec: Exec,
) -> Result<RegionRaster, TractError> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(TractError::BadThreshold(threshold));
    }
    if window.width < 8 || window.height < 8 {
        return Err(TractError::WindowTooCoarse {
            width: window.width,
            height: window.height,
        });
    }
    let log_r = threshold.ln();
    let mut field = vec![0.0; window.len()];
    exec.fill_chunks(&mut field, window.width, |j, row| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = excess(&model.eval(window.pixel_center(i, j)), log_r);
        }
    });
    let (labels, components) = label_components(&field, window.width, window.height, connectivity);
    Ok(RegionRaster {
        window,
        connectivity,
        labels,
        components,
        field,
    })
}

/// Breadth-first labeling of the pixels with positive value.
pub(crate) fn label_components(field: &[f64], width: usize, height: usize, connectivity: Connectivity) -> (Vec<u32>, u32) {
    let mut labels = vec![0u32; field.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..field.len() {
        if labels[start] != 0 || !(field[start] > 0.0) {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let (x, y) = ((p % width) as i64, (p / width) as i64);
            for &(ox, oy) in connectivity.offsets() {
                let (nx, ny) = (x + ox, y + oy);
                if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                    continue;
                }
                let q = ny as usize * width + nx as usize;
                if labels[q] == 0 && field[q] > 0.0 {
                    labels[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    (labels, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_centers_and_lookup_round_trip() {
        let w = Window::new(-1.0, 1.0, -2.0, 2.0, 4, 8).unwrap();
        assert_eq!(w.pixel_center(0, 0), Complex64::new(-0.75, 1.75));
        assert_eq!(w.pixel_center(3, 7), Complex64::new(0.75, -1.75));
        for j in 0..8 {
            for i in 0..4 {
                assert_eq!(w.pixel_of(w.pixel_center(i, j)), Some((i, j)));
            }
        }
        assert_eq!(w.pixel_of(Complex64::new(1.0, -2.0)), Some((3, 7)));
        assert!(w.pixel_of(Complex64::new(1.1, 0.0)).is_none());
    }

    #[test]
    fn degenerate_windows_are_rejected() {
        assert!(Window::new(1.0, 1.0, 0.0, 1.0, 8, 8).is_err());
        assert!(Window::new(0.0, 1.0, 0.0, 1.0, 0, 8).is_err());
        assert!(Window::new(0.0, f64::NAN, 0.0, 1.0, 8, 8).is_err());
    }

    #[test]
    fn labels_follow_scan_order_and_connectivity() {
        // two diagonal blobs: joined under 8-connectivity only
        #[rustfmt::skip]
        let f = [
            1.0, 0.0, 0.0,
            0.0, 1.0, 0.0,
            0.0, 0.0, -1.0,
        ];
        let (l4, n4) = label_components(&f, 3, 3, Connectivity::Four);
        assert_eq!(n4, 2);
        assert_eq!(l4[0], 1);
        assert_eq!(l4[4], 2);
        let (l8, n8) = label_components(&f, 3, 3, Connectivity::Eight);
        assert_eq!(n8, 1);
        assert_eq!(l8[4], 1);
    }

    #[test]
    fn exp_half_plane_is_one_component() {
        let m = FunctionModel::parse("exp").unwrap();
        let w = Window::new(-5.0, 5.0, -5.0, 5.0, 200, 200).unwrap();
        let r = level_region(&m, 1.0, w).unwrap();
        assert_eq!(r.components, 1);
        for j in 0..200 {
            for i in 0..200 {
                let inside = w.pixel_center(i, j).re > 0.0;
                assert_eq!(r.label(i, j) == 1, inside);
            }
        }
    }

    #[test]
    fn coarse_window_is_rejected() {
        let m = FunctionModel::parse("exp").unwrap();
        let w = Window::new(-5.0, 5.0, -5.0, 5.0, 7, 200).unwrap();
        assert!(matches!(level_region(&m, 1.0, w), Err(TractError::WindowTooCoarse { .. })));
    }

    #[test]
    fn exports() {
        let m = FunctionModel::parse("exp").unwrap();
        let w = Window::new(-1.0, 1.0, -1.0, 1.0, 8, 8).unwrap();
        let r = level_region(&m, 1.0, w).unwrap();
        let pgm = r.to_pgm();
        assert!(pgm.starts_with(b"P5\n8 8\n255\n"));
        assert_eq!(pgm.len(), b"P5\n8 8\n255\n".len() + 64);
        let runs = r.runs();
        assert_eq!(runs.iter().map(|r| r.1).sum::<usize>(), 64);
        assert_eq!(runs[0], (0, 4));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["connectivity"], "four");
        assert_eq!(json["runs"][1], serde_json::json!([1, 4]));
    }
}
