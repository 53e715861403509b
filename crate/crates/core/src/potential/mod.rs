//! Symmetric one-dimensional barriers confined to `[a, b]`.

mod spline;

pub use spline::CubicSpline;

use crate::error::{Error, Result};
use crate::quadrature::PanelRule;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub width: f64,
    pub height: f64,
}

/// Tabulated profile interpolated by a zero-slope clamped cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    spline: CubicSpline,
    offset: f64,
}

impl SampledProfile {
    pub fn samples(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Rectangular { height: f64 },
    PiecewiseConstant { segments: Vec<Segment> },
    Sampled(SampledProfile),
}

/// A piece of the barrier on which V is either constant or smooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    /// `Some(h)` when V = h on the whole piece.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    a: f64,
    b: f64,
    center: f64,
    width: f64,
    shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub max_asymmetry: f64,
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidBarrier("edges must be finite".into()));
    }
    if a <= 0.0 {
        return Err(Error::InvalidBarrier(format!("left edge must be positive, got a = {a}")));
    }
    if a >= b {
        return Err(Error::InvalidBarrier(format!("need a < b, got a = {a}, b = {b}")));
    }
    Ok(())
}

impl Barrier {
    /// Rectangular barrier (or well, for negative `height`) on `[a, b]`.
    pub fn rectangular(a: f64, b: f64, height: f64) -> Result<Self> {
        check_interval(a, b)?;
        if !height.is_finite() {
            return Err(Error::InvalidBarrier("height must be finite".into()));
        }
        Ok(Self::from_parts(a, b, Shape::Rectangular { height }))
    }

    /// Piecewise-constant barrier starting at `a`; segment order is left to right.
    pub fn piecewise(a: f64, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidBarrier("no segments".into()));
        }
        if segments
            .iter()
            .any(|s| !(s.width > 0.0) || !s.width.is_finite() || !s.height.is_finite())
        {
            return Err(Error::InvalidBarrier(
                "segment widths must be positive and heights finite".into(),
            ));
        }
        let b = a + segments.iter().map(|s| s.width).sum::<f64>();
        check_interval(a, b)?;
        let barrier = Self::from_parts(a, b, Shape::PiecewiseConstant { segments });
        barrier.require_symmetric()?;
        Ok(barrier)
    }

    /// Barrier tabulated at `values.len()` uniform points spanning `[a, b]`.
    pub fn sampled(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        check_interval(a, b)?;
        if values.len() < 3 {
            return Err(Error::InvalidBarrier("need at least 3 samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBarrier("samples must be finite".into()));
        }
        let step = (b - a) / (values.len() - 1) as f64;
        let spline = CubicSpline::clamped_zero_slope(a, step, values);
        let barrier = Self::from_parts(a, b, Shape::Sampled(SampledProfile { spline, offset: 0.0 }));
        barrier.require_symmetric()?;
        Ok(barrier)
    }

    /// Tabulate `profile` at `n + 1` uniform points of `[a, b]`.
    pub fn sampled_fn(a: f64, b: f64, n: usize, profile: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidBarrier("need at least 2 intervals".into()));
        }
        let step = (b - a) / n as f64;
        let values = (0..=n).map(|i| profile(a + step * i as f64)).collect();
        Self::sampled(a, b, values)
    }

    pub(crate) fn from_parts(a: f64, b: f64, shape: Shape) -> Self {
        Self {
            a,
            b,
            center: 0.5 * (a + b),
            width: b - a,
            shape,
        }
    }

    fn require_symmetric(&self) -> Result<()> {
        let report = validate_symmetry(self, 1001);
        if report.symmetric {
            Ok(())
        } else {
            Err(Error::Asymmetric {
                max_asymmetry: report.max_asymmetry,
            })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Height of a rectangular barrier.
    pub fn rectangular_height(&self) -> Option<f64> {
        match self.shape {
            Shape::Rectangular { height } => Some(height),
            _ => None,
        }
    }

    /// Same geometry with V raised by `delta` on `[a, b]`.
    pub fn with_offset(&self, delta: f64) -> Self {
        let shape = match &self.shape {
            Shape::Rectangular { height } => Shape::Rectangular {
                height: height + delta,
            },
            Shape::PiecewiseConstant { segments } => Shape::PiecewiseConstant {
                segments: segments
                    .iter()
                    .map(|s| Segment {
                        width: s.width,
                        height: s.height + delta,
                    })
                    .collect(),
            },
            Shape::Sampled(p) => Shape::Sampled(SampledProfile {
                spline: p.spline.clone(),
                offset: p.offset + delta,
            }),
        };
        Self { shape, ..self.clone() }
    }

    /// Pieces covering `[a, b]` left to right.
    pub fn pieces(&self) -> Vec<Piece> {
        match &self.shape {
            Shape::Rectangular { height } => vec![Piece {
                start: self.a,
                end: self.b,
                constant: Some(*height),
            }],
            Shape::PiecewiseConstant { segments } => {
                let mut x = self.a;
                let last = segments.len() - 1;
                segments
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let end = if i == last { self.b } else { x + s.width };
                        let p = Piece {
                            start: x,
                            end,
                            constant: Some(s.height),
                        };
                        x = end;
                        p
                    })
                    .collect()
            }
            Shape::Sampled(_) => vec![Piece {
                start: self.a,
                end: self.b,
                constant: None,
            }],
        }
    }

    /// Pieces covering `[x_c, b]`, split at the centre.
    pub fn right_half_pieces(&self) -> Vec<Piece> {
        self.pieces()
            .into_iter()
            .filter(|p| p.end > self.center)
            .map(|p| Piece {
                start: p.start.max(self.center),
                ..p
            })
            .filter(|p| p.end - p.start > 1e-14 * self.width)
            .collect()
    }

    /// Sorted points where the integrand of spatial quadratures may have kinks:
    /// edges, centre and internal jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = vec![self.a, self.center, self.b];
        for p in self.pieces() {
            pts.push(p.start);
            pts.push(p.end);
        }
        pts.sort_by(f64::total_cmp);
        let tol = 1e-12 * self.width;
        pts.dedup_by(|x, y| (*x - *y).abs() <= tol);
        pts
    }

    /// Gauss–Legendre nodes over [a, b], with panels split at the breakpoints.
    pub fn quadrature_nodes(&self, rule: &PanelRule, max_width: f64) -> (Vec<f64>, Vec<f64>) {
        let (mut xs, mut ws) = (Vec::new(), Vec::new());
        for w in self.breakpoints().windows(2) {
            rule.lay(w[0], w[1], max_width, &mut xs, &mut ws);
        }
        (xs, ws)
    }

    /// Panel width resolving oscillation at `k_max` and decay for energies down to `e_min`.
    pub fn panel_width(&self, k_max: f64, e_min: f64, two_m_over_hbar2: f64) -> f64 {
        let kappa_max = (two_m_over_hbar2 * (self.max_potential() - e_min).max(0.0)).sqrt();
        (0.5 * self.width())
            .min(4.0 * std::f64::consts::PI / k_max)
            .min(10.0 / kappa_max.max(1e-300))
    }

    /// Potential evaluated inside a given piece (avoids edge ambiguity).
    pub fn piece_potential(&self, piece: &Piece, x: f64) -> f64 {
        match piece.constant {
            Some(h) => h,
            None => self.smooth_potential(x),
        }
    }

    fn smooth_potential(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Sampled(p) => p.spline.eval(x) + p.offset,
            _ => self.potential(x),
        }
    }

    /// V(x); exactly zero outside `[a, b]`.
    pub fn potential(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        match &self.shape {
            Shape::Rectangular { height } => *height,
            Shape::PiecewiseConstant { .. } => {
                let pieces = self.pieces();
                pieces
                    .iter()
                    .find(|p| x < p.end)
                    .or(pieces.last())
                    .and_then(|p| p.constant)
                    .unwrap_or(0.0)
            }
            Shape::Sampled(_) => self.smooth_potential(x),
        }
    }

    /// Average of the left and right limits of V at `x`.
    pub fn potential_mean_limit(&self, x: f64) -> f64 {
        let eps = 1e-9 * self.width;
        let on_jump = self
            .jumps()
            .iter()
            .any(|(xj, _)| (x - xj).abs() <= 1e-12 * self.width.max(1.0));
        if on_jump {
            0.5 * (self.potential(x - eps) + self.potential(x + eps))
        } else {
            self.potential(x)
        }
    }

    /// Discontinuities of V as `(x, V(x+) − V(x−))`, including the edges.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let pieces = self.pieces();
        let mut out = Vec::with_capacity(pieces.len() + 1);
        let left_value = |p: &Piece| self.piece_potential(p, p.start);
        let right_value = |p: &Piece| self.piece_potential(p, p.end);
        let mut previous = 0.0;
        for p in &pieces {
            let v = left_value(p);
            if v != previous {
                out.push((p.start, v - previous));
            }
            previous = right_value(p);
        }
        if previous != 0.0 {
            out.push((self.b, -previous));
        }
        out
    }

    /// dV/dx away from jumps (zero for constant pieces).
    pub fn smooth_derivative(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        match &self.shape {
            Shape::Sampled(p) => p.spline.derivative(x),
            _ => 0.0,
        }
    }

    pub fn has_smooth_part(&self) -> bool {
        matches!(self.shape, Shape::Sampled(_))
    }

    /// Largest value of V on the barrier (sampled shapes are scanned).
    pub fn max_potential(&self) -> f64 {
        self.scan().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_potential(&self) -> f64 {
        self.scan().fold(f64::INFINITY, f64::min)
    }

    fn scan(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match &self.shape {
            Shape::Rectangular { height } => Box::new(std::iter::once(*height)),
            Shape::PiecewiseConstant { segments } => Box::new(segments.iter().map(|s| s.height)),
            Shape::Sampled(_) => {
                let n = 2000;
                Box::new((0..=n).map(move |i| {
                    self.smooth_potential(self.a + self.width * i as f64 / n as f64)
                }))
            }
        }
    }
}

/// Check V(x_c + s) = V(x_c − s) on `n_samples` points of `[0, d/2]`.
pub fn validate_symmetry(barrier: &Barrier, n_samples: usize) -> SymmetryReport {
    if let Shape::Rectangular { .. } = barrier.shape {
        return SymmetryReport {
            symmetric: true,
            max_asymmetry: 0.0,
        };
    }
    let n = n_samples.max(2);
    let half = 0.5 * barrier.width;
    let mut max_asym = 0.0f64;
    let mut max_v = 0.0f64;
    for i in 0..n {
        let s = half * i as f64 / (n - 1) as f64;
        let right = barrier.potential_mean_limit(barrier.center + s);
        let left = barrier.potential_mean_limit(barrier.center - s);
        max_asym = max_asym.max((right - left).abs());
        max_v = max_v.max(right.abs()).max(left.abs());
    }
    SymmetryReport {
        symmetric: max_asym <= SYMMETRY_TOL * max_v.max(1.0),
        max_asymmetry: max_asym,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangular_geometry() {
        let b = Barrier::rectangular(200.0, 215.0, 0.2).unwrap();
        assert_eq!(b.width(), 15.0);
        assert_eq!(b.center(), 207.5);
        let b = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        assert_eq!((b.center(), b.width()), (2.0, 2.0));
        assert_eq!(b.center() - b.a(), b.b() - b.center());
    }

    #[test]
    fn well_is_valid_and_symmetric() {
        let b = Barrier::rectangular(1.0, 2.0, -0.5).unwrap();
        assert!(validate_symmetry(&b, 100).symmetric);
        assert_eq!(b.potential(1.5), -0.5);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Barrier::rectangular(3.0, 3.0, 1.0).is_err());
        assert!(Barrier::rectangular(4.0, 3.0, 1.0).is_err());
        assert!(Barrier::rectangular(0.0, 3.0, 1.0).is_err());
        assert!(Barrier::rectangular(-1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn zero_outside_support() {
        let b = Barrier::rectangular(1.0, 3.0, 2.0).unwrap();
        for x in [-5.0, 0.0, 0.999999, 3.000001, 1e6] {
            assert_eq!(b.potential(x), 0.0);
        }
        let g = Barrier::sampled_fn(1.0, 3.0, 64, |x| (-(x - 2.0f64).powi(2) * 8.0).exp()).unwrap();
        for x in [0.5, 0.99, 3.01, 10.0] {
            assert_eq!(g.potential(x), 0.0);
        }
    }

    #[test]
    fn gaussian_bump_is_symmetric() {
        let g = Barrier::sampled_fn(1.0, 3.0, 200, |x| 0.3 * (-(x - 2.0f64).powi(2) * 4.0).exp())
            .unwrap();
        let r = validate_symmetry(&g, 777);
        assert!(r.symmetric, "{r:?}");
    }

    #[test]
    fn linear_ramp_is_not_symmetric() {
        let n = 64;
        let step = 2.0 / n as f64;
        let values: Vec<f64> = (0..=n).map(|i| 0.5 * i as f64 * step).collect();
        let spline = CubicSpline::clamped_zero_slope(1.0, step, values.clone());
        let ramp = Barrier::from_parts(
            1.0,
            3.0,
            Shape::Sampled(SampledProfile { spline, offset: 0.0 }),
        );
        let r = validate_symmetry(&ramp, 100);
        assert!(!r.symmetric);
        assert!(r.max_asymmetry > 0.1);
        assert!(matches!(
            Barrier::sampled(1.0, 3.0, values),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn piecewise_requires_mirror_segments() {
        let seg = |w, h| Segment { width: w, height: h };
        let ok = Barrier::piecewise(1.0, vec![seg(0.5, 1.0), seg(1.0, 2.0), seg(0.5, 1.0)]).unwrap();
        assert_eq!(ok.b(), 3.0);
        assert_eq!(ok.jumps(), vec![(1.0, 1.0), (1.5, 1.0), (2.5, -1.0), (3.0, -1.0)]);
        assert!(Barrier::piecewise(1.0, vec![seg(0.5, 1.0), seg(1.0, 2.0)]).is_err());
    }

    #[test]
    fn offset_shifts_every_shape() {
        let r = Barrier::rectangular(1.0, 2.0, 1.0).unwrap().with_offset(0.25);
        assert_eq!(r.rectangular_height(), Some(1.25));
        let g = Barrier::sampled_fn(1.0, 3.0, 32, |x| (-(x - 2.0f64).powi(2)).exp()).unwrap();
        let shifted = g.with_offset(-0.1);
        assert!((shifted.potential(2.0) - g.potential(2.0) + 0.1).abs() < 1e-15);
        assert_eq!(shifted.potential(0.5), 0.0);
    }

    #[test]
    fn right_half_splits_at_centre() {
        let seg = |w, h| Segment { width: w, height: h };
        let b = Barrier::piecewise(1.0, vec![seg(0.5, 1.0), seg(1.0, 2.0), seg(0.5, 1.0)]).unwrap();
        let half = b.right_half_pieces();
        assert_eq!(half.len(), 2);
        assert_eq!(half[0].start, 2.0);
        assert_eq!(half[0].end, 2.5);
        assert_eq!(half[1].constant, Some(1.0));
    }
}
