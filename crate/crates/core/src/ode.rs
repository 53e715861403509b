//! Dormand–Prince 5(4) for small real linear systems, with mesh recording.
//!
//! An adaptive run records every accepted node. The same mesh can later be
//! replayed with fixed steps, which makes the result a smooth function of
//! any parameter in the right-hand side (needed for finite differences).

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub type State = [f64; 4];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-11,
            max_steps: 200_000,
        }
    }
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

struct Step {
    /// 5th-order solution
    y: State,
    err: State,
    /// Derivative at the new point (FSAL).
    k_end: State,
    /// y − y_old before rounding
    incr: State,
}

/// One DOPRI5 step.
fn step<F: Fn(f64, &State) -> State>(f: &F, x: f64, y: &State, k1: &State, h: f64) -> Step {
    let k2 = f(x + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(x + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        x + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        x + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let incr = axpy(&[0.0; 4], h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let mut y_new = *y;
    for i in 0..4 {
        y_new[i] += incr[i];
    }
    let k7 = f(x + h, &y_new);
    let mut err = [0.0; 4];
    for i in 0..4 {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Step { y: y_new, err, k_end: k7, incr }
}

/// Accepted nodes of an integration and the states there.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub ys: Vec<State>,
}

impl Trajectory {
    pub fn last(&self) -> State {
        *self.ys.last().expect("non-empty trajectory")
    }

    /// State at `x` by a single fresh step from the nearest node on the left.
    pub fn eval<F: Fn(f64, &State) -> State>(&self, f: &F, x: f64) -> State {
        let i = match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let i = i.min(self.xs.len() - 1);
        let h = x - self.xs[i];
        if h == 0.0 {
            return self.ys[i];
        }
        let k1 = f(self.xs[i], &self.ys[i]);
        step(f, self.xs[i], &self.ys[i], &k1, h).y
    }
}

/// Adaptive integration from `x0` to `x1` (`x1 > x0`).
pub fn integrate<F: Fn(f64, &State) -> State>(
    f: &F,
    x0: f64,
    y0: State,
    x1: f64,
    tol: &Tolerance,
) -> Result<Trajectory> {
    let span = x1 - x0;
    if !(span > 0.0) {
        return Err(Error::InvalidArgument(format!("empty interval [{x0}, {x1}]")));
    }
    let mut xs = vec![x0];
    let mut ys = vec![y0];
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = initial_step(&y, &k1, span, tol);
    let mut last_rejected = false;
    let mut steps = 0usize;
    while x < x1 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::Integration {
                x,
                reason: format!("more than {} steps", tol.max_steps),
            });
        }
        let hit_end = x + h >= x1 - 1e-14 * span;
        let h_try = if hit_end { x1 - x } else { h };
        let Step {
            y: y_new,
            err,
            k_end: k_new,
            ..
        } = step(f, x, &y, &k1, h_try);
        let mut norm = 0.0f64;
        for i in 0..4 {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            norm += (err[i] / sc).powi(2);
        }
        let norm = (norm / 4.0).sqrt();
        if !norm.is_finite() {
            return Err(Error::Integration {
                x,
                reason: "non-finite state".into(),
            });
        }
        if norm <= 1.0 {
            x = if hit_end { x1 } else { x + h_try };
            y = y_new;
            k1 = k_new;
            xs.push(x);
            ys.push(y);
            let mut fac = 0.9 * norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 5.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = h_try * fac;
            last_rejected = false;
        } else {
            h = h_try * (0.9 * norm.powf(-0.2)).max(0.1);
            last_rejected = true;
        }
        if h < 1e-15 * span {
            return Err(Error::Integration {
                x,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
    }
    Ok(Trajectory { xs, ys })
}

/// Fixed-step integration over a given increasing mesh.
pub fn replay<F: Fn(f64, &State) -> State>(f: &F, mesh: &[f64], y0: State) -> Trajectory {
    let mut ys = Vec::with_capacity(mesh.len());
    let mut y = y0;
    // Kahan carry: over thousands of steps the rounding of y + incr is
    // otherwise the dominant noise in differences between nearby parameters.
    let mut carry = [0.0; 4];
    ys.push(y);
    for w in mesh.windows(2) {
        let k1 = f(w[0], &y);
        let incr = step(f, w[0], &y, &k1, w[1] - w[0]).incr;
        for i in 0..4 {
            let add = incr[i] - carry[i];
            let sum = y[i] + add;
            carry[i] = (sum - y[i]) - add;
            y[i] = sum;
        }
        ys.push(y);
    }
    Trajectory {
        xs: mesh.to_vec(),
        ys,
    }
}

fn initial_step(y: &State, f0: &State, span: f64, tol: &Tolerance) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..4 {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d0 = d0.max(y[i].abs() / sc);
        d1 = d1.max(f0[i].abs() / sc);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h.min(0.1 * span).max(1e-12 * span)
}

/// Union of several meshes on the same interval, merging near-duplicates.
pub fn merge_meshes(meshes: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = meshes.iter().flat_map(|m| m.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let span = all.last().copied().unwrap_or(0.0) - all.first().copied().unwrap_or(0.0);
    let tol = 1e-13 * span.abs().max(1e-300);
    all.dedup_by(|x, y| (*x - *y).abs() <= tol);
    all
}
