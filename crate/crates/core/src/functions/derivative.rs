use super::{ComplexValue, FunctionModel};
use num_complex::Complex64;
use thiserror::Error;

/// Successive Richardson extrapolants failed to agree.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("numeric derivative unstable at {z}: best relative disagreement {disagreement:e}")]
pub struct DerivativeUnstable {
    pub z: Complex64,
    pub disagreement: f64,
}

const LEVELS: usize = 8;
const TOLERANCE: f64 = 1e-4;

/// Central differences along the real direction, extrapolated with
/// Richardson's scheme on steps `h, h/2, h/4, ...`.
///
/// Every sample in the stencil must be finite; overflow or a pole in the
/// neighbourhood makes the estimate unstable.
pub fn numeric_derivative(model: &FunctionModel, z: Complex64) -> Result<ComplexValue, DerivativeUnstable> {
    let f = |w: Complex64| model.eval(w).as_finite();
    let h0 = 0.05 * z.norm().max(1.0);
    let unstable = |d: f64| DerivativeUnstable { z, disagreement: d };

    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(LEVELS);
    let mut best: Option<(Complex64, f64)> = None;
    for i in 0..LEVELS {
        let h = h0 / f64::powi(2.0, i as i32);
        let (Some(a), Some(b)) = (f(z + h), f(z - h)) else {
            return Err(unstable(f64::INFINITY));
        };
        let mut row = vec![(a - b) / (2.0 * h)];
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            let prev = row[j - 1];
            let up = table[i - 1][j - 1];
            row.push(prev + (prev - up) / (factor - 1.0));
        }
        if i > 0 {
            let cur = row[i];
            let err = (cur - table[i - 1][i - 1]).norm() / cur.norm().max(1e-12);
            match best {
                Some((_, e)) if e <= err => {
                    // rounding has taken over; keep the earlier estimate
                    if err > 10.0 * e {
                        break;
                    }
                }
                _ => best = Some((cur, err)),
            }
        }
        table.push(row);
    }
    match best {
        Some((d, err)) if err <= TOLERANCE => Ok(ComplexValue::finite(d)),
        Some((_, err)) => Err(unstable(err)),
        None => Err(unstable(f64::INFINITY)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_derivative_at_two() {
        let m = FunctionModel::parse("exp").unwrap();
        let d = numeric_derivative(&m, Complex64::new(2.0, 0.0)).unwrap();
        let d = d.as_finite().unwrap();
        let e2 = 2f64.exp();
        assert!((d.re - e2).abs() / e2 < 1e-7);
        assert!(d.im.abs() < 1e-9);
    }

    #[test]
    fn example1_superattracting_derivative_is_tiny() {
        let m = FunctionModel::example1(1.0);
        let d = numeric_derivative(&m, Complex64::new(1e-7, 0.0)).unwrap();
        assert!(d.as_finite().unwrap().norm() < 1e-3);
    }

    #[test]
    fn pole_in_stencil_is_unstable() {
        let m = FunctionModel::parse("gamma").unwrap();
        // the stencil at z = 0.05 reaches the pole at 0
        assert!(numeric_derivative(&m, Complex64::new(0.05, 0.0)).is_err());
    }
}
