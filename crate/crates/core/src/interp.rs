//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).

#[derive(Debug, Clone)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// `xs` strictly increasing, at least two points.
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        assert!(xs.len() == ys.len() && xs.len() >= 2);
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes = vec![delta[0]; 2];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Indices `i` with y_i < level ≤ y_{i+1}.
    pub fn upward_brackets(&self, level: f64) -> Vec<usize> {
        (0..self.xs.len() - 1)
            .filter(|&i| self.ys[i] < level && self.ys[i + 1] >= level)
            .collect()
    }

    /// Crossing of `level` inside bracket `i`, by bisection.
    pub fn solve_in(&self, i: usize, level: f64) -> f64 {
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (self.xs[i + 1] - self.xs[i]) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let p = Pchip::new(&xs, &ys);
        assert!((p.eval(1.234) - 1.468).abs() < 1e-14);
        let b = p.upward_brackets(2.0);
        assert_eq!(b.len(), 1);
        assert!((p.solve_in(b[0], 2.0) - 1.5).abs() < 1e-13);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [0.0, 0.0, 1.0, 1.0, 5.0];
        let p = Pchip::new(&xs, &ys);
        let mut last = f64::NEG_INFINITY;
        for i in 0..=400 {
            let y = p.eval(i as f64 * 0.01);
            assert!(y >= last - 1e-15);
            last = y;
        }
    }
}
