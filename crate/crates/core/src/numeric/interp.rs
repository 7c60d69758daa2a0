//! Shape-preserving cubic Hermite interpolation.
//!
//! Nodes carry values and derivatives. When derivatives are known exactly the
//! interpolant is fourth-order accurate; the Fritsch–Carlson limiter is applied
//! on top so monotone data always yields a monotone interpolant.

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl HermiteTable {
    /// Builds from nodes, values and slopes. `xs` must be strictly increasing.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, mut ds: Vec<f64>) -> Self {
        assert!(xs.len() >= 2, "need at least two nodes");
        assert!(xs.len() == ys.len() && ys.len() == ds.len());
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        for k in 0..xs.len() - 1 {
            let secant = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
            if secant == 0.0 {
                ds[k] = 0.0;
                ds[k + 1] = 0.0;
                continue;
            }
            // Slopes must share the sign of the secant.
            if ds[k] * secant < 0.0 {
                ds[k] = 0.0;
            }
            if ds[k + 1] * secant < 0.0 {
                ds[k + 1] = 0.0;
            }
            let a = ds[k] / secant;
            let b = ds[k + 1] / secant;
            let norm = a * a + b * b;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                ds[k] = tau * a * secant;
                ds[k + 1] = tau * b * secant;
            }
        }
        Self { xs, ys, ds }
    }

    /// Builds with slopes estimated from the data (three-point differences).
    pub fn from_values(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut ds = vec![0.0; n];
        for k in 0..n {
            ds[k] = if k == 0 {
                (ys[1] - ys[0]) / (xs[1] - xs[0])
            } else if k == n - 1 {
                (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2])
            } else {
                let h0 = xs[k] - xs[k - 1];
                let h1 = xs[k + 1] - xs[k];
                let s0 = (ys[k] - ys[k - 1]) / h0;
                let s1 = (ys[k + 1] - ys[k]) / h1;
                (h1 * s0 + h0 * s1) / (h0 + h1)
            };
        }
        Self::new(xs, ys, ds)
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.xs[0] && x <= self.x_max()) {
            return None;
        }
        let i = self.xs.partition_point(|&v| v <= x);
        Some(i.clamp(1, self.xs.len() - 1) - 1)
    }

    /// Value at `x`, or `None` outside the tabulated range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let k = self.locate(x)?;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(h00 * self.ys[k] + h10 * h * self.ds[k] + h01 * self.ys[k + 1] + h11 * h * self.ds[k + 1])
    }

    /// Derivative of the interpolant at `x`.
    pub fn slope(&self, x: f64) -> Option<f64> {
        let k = self.locate(x)?;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        Some((d00 * self.ys[k] + d01 * self.ys[k + 1]) / h + d10 * self.ds[k] + d11 * self.ds[k + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64 * 0.7).collect();
        let f = |x: f64| x * x * x + x;
        let df = |x: f64| 3.0 * x * x + 1.0;
        let t = HermiteTable::new(
            xs.clone(),
            xs.iter().map(|&x| f(x)).collect(),
            xs.iter().map(|&x| df(x)).collect(),
        );
        for i in 0..100 {
            let x = 3.5 * i as f64 / 99.0;
            assert!((t.eval(x).unwrap() - f(x)).abs() < 1e-12);
        }
        assert!(t.eval(-0.1).is_none());
        assert!(t.eval(3.6).is_none());
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in prop::collection::vec(0.0f64..5.0, 3..20),
            gaps in prop::collection::vec(0.1f64..2.0, 20),
        ) {
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (i, s) in steps.iter().enumerate() {
                xs.push(xs[i] + gaps[i]);
                ys.push(ys[i] + s);
            }
            let t = HermiteTable::from_values(xs.clone(), ys);
            let n = 500;
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=n {
                let x = (t.x_max() * i as f64 / n as f64).min(t.x_max());
                let v = t.eval(x).unwrap();
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
