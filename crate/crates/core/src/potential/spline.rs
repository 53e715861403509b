//! Clamped cubic spline on a uniform grid.

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    start: f64,
    step: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    /// Spline through `values` at `start + i*step` with zero end slopes.
    ///
    /// Requires at least two values and `step > 0`.
    pub fn clamped_zero_slope(start: f64, step: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        assert!(n >= 2 && step > 0.0);
        let h = step;
        // Tridiagonal system for the second derivatives (Thomas algorithm).
        let mut diag = vec![4.0; n];
        let upper = vec![1.0; n];
        let lower = vec![1.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        rhs[0] = 6.0 / h * ((values[1] - values[0]) / h);
        rhs[n - 1] = 6.0 / h * (-(values[n - 1] - values[n - 2]) / h);
        for i in 1..n - 1 {
            rhs[i] = 6.0 / (h * h) * (values[i + 1] - 2.0 * values[i] + values[i - 1]);
        }
        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - upper[i] * second[i + 1]) / diag[i];
        }
        Self {
            start,
            step,
            values,
            second,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let n = self.values.len();
        let pos = ((x - self.start) / self.step).floor();
        let i = if pos < 0.0 {
            0
        } else {
            (pos as usize).min(n - 2)
        };
        let left = x - (self.start + i as f64 * self.step);
        let right = self.step - left;
        (i, left, right)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, l, r) = self.locate(x);
        let h = self.step;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        m0 * r * r * r / (6.0 * h)
            + m1 * l * l * l / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * r
            + (y1 / h - m1 * h / 6.0) * l
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, l, r) = self.locate(x);
        let h = self.step;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        -m0 * r * r / (2.0 * h) + m1 * l * l / (2.0 * h) - (y0 / h - m0 * h / 6.0)
            + (y1 / h - m1 * h / 6.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_and_clamps_slopes() {
        let ys: Vec<f64> = (0..11).map(|i| ((i as f64) * 0.3).sin()).collect();
        let s = CubicSpline::clamped_zero_slope(1.0, 0.5, ys.clone());
        for (i, y) in ys.iter().enumerate() {
            assert!((s.eval(1.0 + 0.5 * i as f64) - y).abs() < 1e-14);
        }
        assert!(s.derivative(1.0).abs() < 1e-12);
        assert!(s.derivative(s.end()).abs() < 1e-12);
    }

    #[test]
    fn reproduces_smooth_function() {
        let f = |x: f64| (-(x - 2.0) * (x - 2.0)).exp();
        let n = 401;
        let h = 4.0 / (n - 1) as f64;
        let ys = (0..n).map(|i| f(i as f64 * h)).collect();
        let s = CubicSpline::clamped_zero_slope(0.0, h, ys);
        for j in 0..97 {
            let x = 0.3 + j as f64 * 0.035;
            assert!((s.eval(x) - f(x)).abs() < 1e-7);
        }
    }
}
