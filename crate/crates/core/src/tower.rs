//! Iterated-exponential numbers for values far beyond `f64` range.

use crate::functions::LN_F64_MAX;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Largest tower height that is tracked; beyond it only the height matters.
pub const TOWER_CAP: u32 = 8;

/// The number `exp^height(top)`.
///
/// Kept normalized: when `height > 0` the top is larger than `ln(f64::MAX)`,
/// so a taller tower always denotes a larger number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogTower {
    pub height: u32,
    pub top: f64,
    /// Set once the height had to be clamped at [`TOWER_CAP`].
    pub saturated: bool,
}

impl LogTower {
    pub fn from_f64(v: f64) -> Self {
        LogTower {
            height: 0,
            top: v,
            saturated: false,
        }
    }

    /// The number `e^x`.
    pub fn exp_of(x: f64) -> Self {
        LogTower::from_f64(x).exp()
    }

    pub fn new(height: u32, top: f64) -> Self {
        LogTower {
            height,
            top,
            saturated: false,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        while self.height > 0 && self.top <= LN_F64_MAX {
            self.top = self.top.exp();
            self.height -= 1;
        }
        if self.height > TOWER_CAP {
            self.height = TOWER_CAP;
            self.saturated = true;
        }
        self
    }

    pub fn exp(self) -> Self {
        if self.height == 0 && self.top <= LN_F64_MAX {
            return LogTower {
                top: self.top.exp(),
                ..self
            };
        }
        LogTower {
            height: self.height + 1,
            ..self
        }
        .normalized()
    }

    /// Natural logarithm; `NaN` for nonpositive plain values.
    pub fn ln(self) -> Self {
        if self.height == 0 {
            LogTower {
                top: self.top.ln(),
                ..self
            }
        } else {
            LogTower {
                height: self.height - 1,
                ..self
            }
        }
    }

    /// Adds a modest real offset; only visible when the number is plain.
    pub fn add_small(self, delta: f64) -> Self {
        if self.height == 0 {
            LogTower {
                top: self.top + delta,
                ..self
            }
        } else {
            self
        }
    }

    pub fn to_f64(self) -> Option<f64> {
        if self.height == 0 {
            Some(self.top)
        } else {
            None
        }
    }

    /// `f64` view that saturates to infinity.
    pub fn approx(self) -> f64 {
        self.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl PartialOrd for LogTower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.height.cmp(&other.height) {
            Ordering::Equal => self.top.partial_cmp(&other.top),
            o => Some(o),
        }
    }
}

impl std::fmt::Display for LogTower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.height == 0 {
            write!(f, "{}", self.top)
        } else {
            write!(f, "exp^{}({})", self.height, self.top)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exp_of_small_values_stays_plain() {
        let t = LogTower::exp_of(1.0).exp();
        assert_eq!(t.height, 0);
        assert!((t.top - std::f64::consts::E.exp()).abs() < 1e-12);
    }

    #[test]
    fn exp_of_large_values_grows_height() {
        let t = LogTower::exp_of(1000.0);
        assert_eq!(t.height, 1);
        assert_eq!(t.top, 1000.0);
        assert_eq!(t.ln().to_f64(), Some(1000.0));
        let t2 = t.exp();
        assert_eq!(t2.height, 2);
        assert!(t2 > t);
    }

    #[test]
    fn height_saturates_at_cap() {
        let mut t = LogTower::exp_of(1000.0);
        for _ in 0..20 {
            t = t.exp();
        }
        assert_eq!(t.height, TOWER_CAP);
        assert!(t.saturated);
    }

    proptest! {
        #[test]
        fn ordering_matches_plain_ordering(a in -700.0f64..700.0, b in -700.0f64..700.0) {
            let ta = LogTower::exp_of(a);
            let tb = LogTower::exp_of(b);
            prop_assert_eq!(ta.partial_cmp(&tb), a.exp().partial_cmp(&b.exp()));
        }

        #[test]
        fn new_normalizes_to_the_same_number(top in 1.0f64..6.0) {
            // exp(exp(top)) is representable for top < 6.56
            let t = LogTower::new(2, top);
            prop_assert_eq!(t.height, 0);
            prop_assert!((t.top - top.exp().exp()).abs() <= 1e-12 * t.top);
        }
    }
}
