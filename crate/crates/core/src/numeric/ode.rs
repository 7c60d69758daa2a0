//! Dormand–Prince 5(4) with adaptive step control, for small fixed-size systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 100_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive integrator that remembers its step size between calls, so a
/// table can be filled by advancing node to node.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    control: StepControl,
    h: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(control: StepControl, h_init: f64) -> Self {
        Self {
            control,
            h: h_init,
            steps: 0,
            rejected: 0,
        }
    }

    /// Advances `y` from `x0` to `x1` (exactly).
    pub fn advance<const N: usize, F>(&mut self, f: &F, x0: f64, y: &mut [f64; N], x1: f64) -> Result<()>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut x = x0;
        let mut k1 = f(x, y);
        let mut budget = self.control.max_steps;
        while x < x1 {
            if budget == 0 {
                return Err(Error::Convergence(format!("ODE step budget exhausted at x = {x}")));
            }
            budget -= 1;
            let last = x + self.h >= x1;
            let h = if last { x1 - x } else { self.h };
            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = *y;
                for (i, yi) in ys.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][i];
                    }
                    *yi += h * acc;
                }
                k[s] = f(x + C[s] * h, &ys);
            }
            // Stage 7 is evaluated at the 5th-order solution (FSAL).
            let mut y_new = *y;
            for (i, yi) in y_new.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..6 {
                    acc += A[6][j] * k[j][i];
                }
                *yi += h * acc;
            }
            let mut err2 = 0.0;
            for i in 0..N {
                let mut e = 0.0;
                for j in 0..7 {
                    e += E[j] * k[j][i];
                }
                let scale = self.control.atol + self.control.rtol * y[i].abs().max(y_new[i].abs());
                err2 += (h * e / scale).powi(2);
            }
            let err = (err2 / N as f64).sqrt();
            if !err.is_finite() {
                self.h *= 0.1;
                self.rejected += 1;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                x = if last { x1 } else { x + h };
                *y = y_new;
                k1 = k[6];
                self.steps += 1;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
                self.rejected += 1;
            }
            if self.h <= f64::EPSILON * x.abs().max(1.0) {
                return Err(Error::Convergence(format!("ODE step size underflow at x = {x}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let mut solver = Dopri5::new(StepControl::default(), 1e-3);
        let mut y = [1.0];
        let f = |_x: f64, y: &[f64; 1]| [y[0]];
        let mut x = 0.0;
        for _ in 0..10 {
            solver.advance(&f, x, &mut y, x + 0.5).unwrap();
            x += 0.5;
        }
        assert!((y[0] - 5f64.exp()).abs() / 5f64.exp() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_returns() {
        let mut solver = Dopri5::new(StepControl::default(), 1e-2);
        let mut y = [1.0, 0.0];
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        solver
            .advance(&f, 0.0, &mut y, 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9);
        assert!(y[1].abs() < 1e-9);
    }
}
