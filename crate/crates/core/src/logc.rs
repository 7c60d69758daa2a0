//! Complex numbers stored as `(ln |w|, arg w)`.

use std::f64::consts::PI;
use std::ops::{Div, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

/// Reduces an angle into `(−π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        phase: 0.0,
    };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                log_mag,
                phase: wrap_phase(phase),
            }
        }
    }

    /// `r·e^{iθ}` for `r > 0`.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r.ln(), theta)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self::new(z.norm().ln(), z.arg())
        }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(x.abs().ln(), if x < 0.0 { PI } else { 0.0 })
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// Converts back; overflows to infinity for `log_mag > ~709`.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.log_mag.exp(), self.phase)
    }

    pub fn powf(&self, p: f64) -> Self {
        if self.is_zero() {
            return if p > 0.0 { Self::ZERO } else { Self::ONE };
        }
        Self::new(p * self.log_mag, p * self.phase)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.log_mag, -self.phase)
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag - rhs.log_mag, self.phase - rhs.phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_convention() {
        let z = LogComplex::from_complex(Complex64::new(0.0, 0.0));
        assert!(z.is_zero());
        assert_eq!(z.phase, 0.0);
        assert!((z * LogComplex::from_real(5.0)).is_zero());
    }

    #[test]
    fn negative_real_has_phase_pi() {
        let w = LogComplex::from_real(-1.0);
        assert_eq!(w.log_mag, 0.0);
        assert_eq!(w.phase, PI);
        assert_eq!(wrap_phase(-PI), PI);
    }

    #[test]
    fn huge_magnitudes_multiply() {
        let a = LogComplex::new(1e6, 1.0);
        let b = LogComplex::new(-1e6 + 2.0, 0.5);
        let p = a * b;
        assert_eq!(p.log_mag, 2.0);
        assert!((p.phase - 1.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn phase_always_wrapped(theta in -1e4f64..1e4) {
            let t = wrap_phase(theta);
            prop_assert!(t > -PI && t <= PI);
            prop_assert!(((theta - t) / (2.0 * PI)).round() * 2.0 * PI - (theta - t) < 1e-9);
        }

        #[test]
        fn complex_round_trip(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            prop_assume!(re != 0.0 || im != 0.0);
            let z = Complex64::new(re, im);
            let back = LogComplex::from_complex(z).to_complex();
            prop_assert!((back - z).norm() <= 1e-12 * z.norm());
        }
    }
}
