//! Marching squares on the sampled field `log|f| - log R`.

use super::raster::RegionRaster;
use num_complex::Complex64;
use std::collections::HashMap;

const CLAMP: f64 = 50.0;
const OUTSIDE: f64 = -1e-6;

/// Zero set of the field restricted to pixels carrying `label`, as polylines.
///
/// Pixels outside the component count as below threshold even when their own
/// value is positive, so neighbouring components never leak into the curve.
pub fn trace(raster: &RegionRaster, label: u32) -> Vec<Vec<Complex64>> {
    let w = raster.window.width;
    let h = raster.window.height;
    if w < 2 || h < 2 {
        return Vec::new();
    }
    #[allow(clippy::manual_clamp)]
    let value = |i: usize, j: usize| -> f64 {
        let v = raster.value(i, j);
        if raster.label(i, j) == label {
            v.min(CLAMP)
        } else {
            v.min(OUTSIDE).max(-CLAMP)
        }
    };
    let h_edges = (w - 1) * h;
    let h_id = |i: usize, j: usize| j * (w - 1) + i;
    let v_id = |i: usize, j: usize| h_edges + j * w + i;

    let mut points: HashMap<usize, Complex64> = HashMap::new();
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut cross = |id: usize, a: (usize, usize), b: (usize, usize), va: f64, vb: f64| {
        points.entry(id).or_insert_with(|| {
            let pa = raster.window.pixel_center(a.0, a.1);
            let pb = raster.window.pixel_center(b.0, b.1);
            pa + (pb - pa) * (va / (va - vb))
        });
        id
    };

    for j in 0..h - 1 {
        for i in 0..w - 1 {
            let tl = value(i, j);
            let tr = value(i + 1, j);
            let br = value(i + 1, j + 1);
            let bl = value(i, j + 1);
            let case = (tl > 0.0) as u8 * 8 + (tr > 0.0) as u8 * 4 + (br > 0.0) as u8 * 2 + (bl > 0.0) as u8;
            if case == 0 || case == 15 {
                continue;
            }
            let top = if (tl > 0.0) != (tr > 0.0) {
                Some(cross(h_id(i, j), (i, j), (i + 1, j), tl, tr))
            } else {
                None
            };
            let right = if (tr > 0.0) != (br > 0.0) {
                Some(cross(v_id(i + 1, j), (i + 1, j), (i + 1, j + 1), tr, br))
            } else {
                None
            };
            let bottom = if (bl > 0.0) != (br > 0.0) {
                Some(cross(h_id(i, j + 1), (i, j + 1), (i + 1, j + 1), bl, br))
            } else {
                None
            };
            let left = if (tl > 0.0) != (bl > 0.0) {
                Some(cross(v_id(i, j), (i, j), (i, j + 1), tl, bl))
            } else {
                None
            };
            match (top, right, bottom, left) {
                (Some(t), Some(r), Some(b), Some(l)) => {
                    let center = 0.25 * (tl + tr + br + bl);
                    // cut off the corners whose sign differs from the center
                    let cut_tl = (tl > 0.0) != (center > 0.0);
                    if cut_tl {
                        segments.push((t, l));
                        segments.push((r, b));
                    } else {
                        segments.push((t, r));
                        segments.push((l, b));
                    }
                }
                (t, r, b, l) => {
                    let ends: Vec<usize> = [t, r, b, l].into_iter().flatten().collect();
                    if ends.len() == 2 {
                        segments.push((ends[0], ends[1]));
                    }
                }
            }
        }
    }
    chain(&segments, &points)
}

fn chain(segments: &[(usize, usize)], points: &HashMap<usize, Complex64>) -> Vec<Vec<Complex64>> {
    let mut at: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        at.entry(a).or_default().push(k);
        at.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start: usize, used: &mut Vec<bool>| -> Vec<Complex64> {
        let mut line = vec![points[&start]];
        let mut cur = start;
        while let Some(&k) = at[&cur].iter().find(|&&k| !used[k]) {
            used[k] = true;
            let (a, b) = segments[k];
            cur = if a == cur { b } else { a };
            line.push(points[&cur]);
        }
        line
    };

    // open pieces end at the raster border; walk those from an end first
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (a, b) = segments[k];
        let start = if at[&a].len() == 1 {
            a
        } else if at[&b].len() == 1 {
            b
        } else {
            continue;
        };
        out.push(walk(start, &mut used));
    }
    for k in 0..segments.len() {
        if !used[k] {
            out.push(walk(segments[k].0, &mut used));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionModel;
    use crate::tract::{level_region, Window};

    #[test]
    fn exp_contour_is_a_vertical_line() {
        let m = FunctionModel::parse("exp").unwrap();
        let w = Window::new(-5.0, 5.0, -5.0, 5.0, 64, 64).unwrap();
        for (r, x) in [(1.0, 0.0), (std::f64::consts::E, 1.0)] {
            let raster = level_region(&m, r, w).unwrap();
            let lines = trace(&raster, 1);
            assert_eq!(lines.len(), 1);
            assert_eq!(lines[0].len(), 64);
            for p in &lines[0] {
                assert!((p.re - x).abs() < 1e-9, "{p}");
            }
        }
    }

    #[test]
    fn closed_contours_are_closed() {
        let m = FunctionModel::parse("gamma").unwrap();
        let w = Window::new(-3.7, -2.3, -0.7, 0.7, 64, 64).unwrap();
        let raster = level_region(&m, 1.0, w).unwrap();
        let label = raster.label_at(Complex64::new(-3.0, 0.0)).unwrap();
        let lines = trace(&raster, label);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert_eq!(l.first(), l.last());
        for p in l {
            assert!((p + 3.0).norm() < 0.7);
        }
    }
}
