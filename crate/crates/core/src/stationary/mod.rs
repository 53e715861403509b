//! Stationary scattering states at fixed wavenumber.
//!
//! The barrier interior is spanned by a real odd solution `u` and a real even
//! solution `v` about the centre. Everything else (amplitudes, the full field
//! and its transmitted/reflected parts) is assembled from their values at `b`.

mod oracle;
mod transfer;

pub use oracle::{rectangular_oracle, OracleRecord};
pub use transfer::{transfer_dwell_time, transfer_matrix_oracle, TransferRecord};

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{self, State, Tolerance, Trajectory};
use crate::parallel;
use crate::potential::{Barrier, Piece, Shape};
use crate::special::{cosh_sqrt, sinhc};
use crate::units::UnitSystem;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest κ·d/2 for which the analytic rectangular basis is evaluated.
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisValues {
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
}

#[derive(Debug, Clone)]
struct NumericPiece {
    piece: Piece,
    trajectory: Trajectory,
}

#[derive(Debug, Clone)]
enum Profile {
    /// u = w·sinh(κs)/κ, v = cosh(κs) with κ² = `kappa2` (either sign).
    Analytic { kappa2: f64, w: f64 },
    Numeric {
        barrier: Arc<Barrier>,
        factor: f64,
        energy: f64,
        pieces: Arc<Vec<NumericPiece>>,
    },
}

/// Accepted ODE meshes, one per right-half piece.
pub type MeshSet = Arc<Vec<Vec<f64>>>;

#[derive(Debug, Clone, Default)]
pub enum BasisMethod {
    /// Analytic for rectangular barriers, adaptive ODE otherwise.
    #[default]
    Auto,
    /// Adaptive ODE regardless of shape.
    Ode(Tolerance),
    /// Fixed-step ODE on a previously accepted mesh.
    Replay(MeshSet),
}

#[derive(Debug, Clone)]
pub struct StationaryBasis {
    pub k: f64,
    pub energy: f64,
    /// u, u′, v, v′ at x = b.
    pub at_b: BasisValues,
    /// u′v − v′u, measured at b.
    pub wronskian: f64,
    pub q: Complex64,
    pub p: Complex64,
    half_width: f64,
    profile: Profile,
}

impl StationaryBasis {
    /// Basis values at offset `s = x − x_c`, |s| ≤ d/2.
    pub fn at(&self, s: f64) -> BasisValues {
        let r = s.abs().min(self.half_width);
        let val = match &self.profile {
            Profile::Analytic { kappa2, w } => {
                let z = kappa2 * r * r;
                let sc = sinhc(z);
                BasisValues {
                    u: w * r * sc,
                    du: w * cosh_sqrt(z),
                    v: cosh_sqrt(z),
                    dv: kappa2 * r * sc,
                }
            }
            Profile::Numeric {
                barrier,
                factor,
                energy,
                pieces,
            } => {
                let x = barrier.center() + r;
                let idx = pieces
                    .iter()
                    .position(|p| x <= p.piece.end)
                    .unwrap_or(pieces.len() - 1);
                let np = &pieces[idx];
                let f = rhs(barrier, &np.piece, *factor, *energy);
                let y = np.trajectory.eval(&f, x);
                BasisValues {
                    u: y[0],
                    du: y[1],
                    v: y[2],
                    dv: y[3],
                }
            }
        };
        if s < 0.0 {
            BasisValues {
                u: -val.u,
                du: val.du,
                v: val.v,
                dv: -val.dv,
            }
        } else {
            val
        }
    }

    /// Meshes accepted by the integrator, if the basis came from one.
    pub fn mesh(&self) -> Option<MeshSet> {
        match &self.profile {
            Profile::Numeric { pieces, .. } => Some(Arc::new(
                pieces.iter().map(|p| p.trajectory.xs.clone()).collect(),
            )),
            Profile::Analytic { .. } => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.profile, Profile::Analytic { .. })
    }

    /// Largest |u′v − v′u − W| / |W| over the accepted nodes.
    pub fn wronskian_drift(&self) -> f64 {
        match &self.profile {
            Profile::Analytic { .. } => 0.0,
            Profile::Numeric { pieces, .. } => pieces
                .iter()
                .flat_map(|p| p.trajectory.ys.iter())
                .map(|y| ((y[1] * y[2] - y[3] * y[0]) - self.wronskian).abs() / self.wronskian.abs())
                .fold(0.0, f64::max),
        }
    }
}

fn rhs<'a>(
    barrier: &'a Barrier,
    piece: &'a Piece,
    factor: f64,
    energy: f64,
) -> impl Fn(f64, &State) -> State + 'a {
    move |x, y| {
        let w = factor * (barrier.piece_potential(piece, x) - energy);
        [y[1], w * y[0], y[3], w * y[2]]
    }
}

pub fn solve_basis(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<StationaryBasis> {
    solve_basis_with(barrier, k, units, &BasisMethod::Auto)
}

pub fn solve_basis_with(
    barrier: &Barrier,
    k: f64,
    units: &UnitSystem,
    method: &BasisMethod,
) -> Result<StationaryBasis> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
    }
    let energy = units.energy(k);
    let factor = units.two_m_over_hbar2();
    let half = 0.5 * barrier.width();
    let (profile, at_b) = match (barrier.shape(), method) {
        (Shape::Rectangular { height }, BasisMethod::Auto) => {
            let kappa2 = factor * (height - energy);
            let kappa = kappa2.abs().sqrt();
            if kappa * half > MAX_EXPONENT && kappa2 > 0.0 {
                return Err(Error::BasisOverflow {
                    k,
                    exponent: kappa * half,
                });
            }
            let w = if kappa * barrier.width() >= 1e-3 { kappa } else { 1.0 };
            let profile = Profile::Analytic { kappa2, w };
            let probe = StationaryBasis {
                k,
                energy,
                at_b: BasisValues {
                    u: 0.0,
                    du: 0.0,
                    v: 0.0,
                    dv: 0.0,
                },
                wronskian: 0.0,
                q: Complex64::new(0.0, 0.0),
                p: Complex64::new(0.0, 0.0),
                half_width: half,
                profile: profile.clone(),
            };
            (profile, probe.at(half))
        }
        _ => {
            let shared = Arc::new(barrier.clone());
            let pieces = barrier.right_half_pieces();
            let mut y = [0.0, 1.0, 1.0, 0.0];
            let mut out = Vec::with_capacity(pieces.len());
            for (i, piece) in pieces.iter().enumerate() {
                let f = rhs(barrier, piece, factor, energy);
                let trajectory = match method {
                    BasisMethod::Replay(meshes) => {
                        let mesh = meshes.get(i).ok_or_else(|| {
                            Error::InvalidArgument("mesh set does not match barrier".into())
                        })?;
                        ode::replay(&f, mesh, y)
                    }
                    BasisMethod::Ode(tol) => ode::integrate(&f, piece.start, y, piece.end, tol)?,
                    BasisMethod::Auto => {
                        ode::integrate(&f, piece.start, y, piece.end, &Tolerance::default())?
                    }
                };
                y = trajectory.last();
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Integration {
                        x: piece.end,
                        reason: "solution overflowed".into(),
                    });
                }
                out.push(NumericPiece {
                    piece: *piece,
                    trajectory,
                });
            }
            let profile = Profile::Numeric {
                barrier: shared,
                factor,
                energy,
                pieces: Arc::new(out),
            };
            (
                profile,
                BasisValues {
                    u: y[0],
                    du: y[1],
                    v: y[2],
                    dv: y[3],
                },
            )
        }
    };
    // The value at b is consistent with Q and P, which keeps T + R = 1 at
    // roundoff; it cancels catastrophically when the barrier is opaque, and
    // then the conserved value 1 is used instead.
    let wronskian = match &profile {
        Profile::Analytic { w, .. } => *w,
        Profile::Numeric { .. } => {
            let w_b = at_b.du * at_b.v - at_b.dv * at_b.u;
            let magnitude = (at_b.du * at_b.v).abs() + (at_b.dv * at_b.u).abs();
            if magnitude <= WRONSKIAN_CANCELLATION * w_b.abs() {
                w_b
            } else {
                1.0
            }
        }
    };
    Ok(StationaryBasis {
        k,
        energy,
        at_b,
        wronskian,
        q: Complex64::new(at_b.du, k * at_b.u),
        p: Complex64::new(at_b.dv, k * at_b.v),
        half_width: half,
        profile,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    pub k: f64,
    pub a_out: Complex64,
    pub b_out: Complex64,
    pub a_full: Complex64,
    pub b_full: Complex64,
    pub a_tr_in: Complex64,
    pub a_ref_in: Complex64,
    /// Coefficient of u in ψ_tr on [a, x_c].
    pub a_tr: Complex64,
    /// Coefficient of u in ψ_ref on [a, x_c].
    pub c_ref: Complex64,
    pub t: f64,
    pub r: f64,
    pub lambda: f64,
    pub j: f64,
}

/// Phase in (−π, π].
fn arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

pub fn amplitudes_from_basis(
    basis: &StationaryBasis,
    barrier: &Barrier,
) -> Result<ScatteringAmplitudes> {
    let (q, p, w, k) = (basis.q, basis.p, basis.wronskian, basis.k);
    if q.norm() < 1e-300 || p.norm() < 1e-300 || w == 0.0 {
        return Err(Error::DegenerateBasis {
            k,
            q_abs: q.norm(),
            p_abs: p.norm(),
        });
    }
    let (bu, bv) = (basis.at_b, basis.at_b);
    let denom = q.conj() * p.conj();
    // Equal to (Q/Q* − P/P*)/2 and −(Q/Q* + P/P*)/2 without the cancellation
    // that ruins those forms for opaque barriers.
    let a_out = -I * k * w / denom;
    let b_out = -Complex64::new(bu.du * bv.dv + k * k * bu.u * bv.v, 0.0) / denom;
    let phase = Complex64::from_polar(1.0, k * barrier.a());
    let a_full = -p.conj() * a_out * phase / w;
    let b_full = q.conj() * a_out * phase / w;
    let scale = |z: Complex64| z.norm() / w.abs() * (1.0 + b_out.norm());
    let a_alt = (p + p.conj() * b_out) * phase / w;
    let b_alt = (q + q.conj() * b_out) * phase / w;
    let mis_a = (a_full - a_alt).norm() / scale(p);
    let mis_b = (b_full - b_alt).norm() / scale(q);
    if mis_a > 1e-9 || mis_b > 1e-9 {
        return Err(Error::Internal(format!(
            "in-barrier coefficients disagree at k = {k}: {mis_a:e}, {mis_b:e}"
        )));
    }
    let a_ref_in = b_out.conj() * (b_out + a_out);
    let a_tr_in = a_out * (a_out.conj() - b_out.conj());
    let a_tr = p * a_tr_in * phase / w;
    // (P·A_ref_in + P*·b_out)e^{ika}/w in exact arithmetic; that form loses
    // digits against the stable a_full when the barrier is opaque.
    let c_ref = a_full - a_tr;
    let t = a_out.norm_sqr();
    let r = b_out.norm_sqr();
    Ok(ScatteringAmplitudes {
        k,
        a_out,
        b_out,
        a_full,
        b_full,
        a_tr_in,
        a_ref_in,
        a_tr,
        c_ref,
        t,
        r,
        lambda: arg(a_ref_in),
        j: arg(a_out),
    })
}

/// A value for each of the three stationary fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fields<T> {
    pub full: T,
    pub tr: T,
    pub refl: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// x ≤ a
    Left,
    /// a < x < x_c
    InnerLeft,
    /// x_c ≤ x ≤ b
    InnerRight,
    /// x > b
    Right,
}

/// Values and one-sided slopes at the barrier centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentreData {
    pub psi: Fields<Complex64>,
    pub slope_left: Fields<Complex64>,
    pub slope_right: Fields<Complex64>,
}

#[derive(Debug, Clone)]
pub struct StationaryTriple {
    pub amplitudes: ScatteringAmplitudes,
    pub basis: StationaryBasis,
    a: f64,
    xc: f64,
    b: f64,
    d: f64,
}

type Pair = (Fields<Complex64>, Fields<Complex64>);

impl StationaryTriple {
    pub fn new(amplitudes: ScatteringAmplitudes, basis: StationaryBasis, barrier: &Barrier) -> Self {
        Self {
            amplitudes,
            basis,
            a: barrier.a(),
            xc: barrier.center(),
            b: barrier.b(),
            d: barrier.width(),
        }
    }

    pub fn k(&self) -> f64 {
        self.amplitudes.k
    }

    pub fn region_of(&self, x: f64) -> Region {
        if x <= self.a {
            Region::Left
        } else if x < self.xc {
            Region::InnerLeft
        } else if x <= self.b {
            Region::InnerRight
        } else {
            Region::Right
        }
    }

    pub fn eval(&self, x: f64) -> Fields<Complex64> {
        self.eval_in(x, self.region_of(x)).0
    }

    /// Values and x-derivatives.
    pub fn eval_with_slope(&self, x: f64) -> Pair {
        self.eval_in(x, self.region_of(x))
    }

    /// Evaluate the formula of `region` at `x`, wherever `x` is.
    pub fn eval_in(&self, x: f64, region: Region) -> Pair {
        let am = &self.amplitudes;
        let k = am.k;
        match region {
            Region::Left => {
                let inc = Complex64::from_polar(1.0, k * x);
                let refl = am.b_out * Complex64::from_polar(1.0, k * (2.0 * self.a - x));
                let tr = am.a_tr_in * inc;
                let rf = am.a_ref_in * inc + refl;
                let ik = I * k;
                (
                    Fields {
                        full: inc + refl,
                        tr,
                        refl: rf,
                    },
                    Fields {
                        full: ik * (inc - refl),
                        tr: ik * tr,
                        refl: ik * (am.a_ref_in * inc - refl),
                    },
                )
            }
            Region::InnerLeft | Region::InnerRight => {
                let bv = self.basis.at(x - self.xc);
                let comb = |cu: Complex64, cv: Complex64| (cu * bv.u + cv * bv.v, cu * bv.du + cv * bv.dv);
                let (full, dfull) = comb(am.a_full, am.b_full);
                if region == Region::InnerRight {
                    let zero = Complex64::new(0.0, 0.0);
                    (
                        Fields {
                            full,
                            tr: full,
                            refl: zero,
                        },
                        Fields {
                            full: dfull,
                            tr: dfull,
                            refl: zero,
                        },
                    )
                } else {
                    let (tr, dtr) = comb(am.a_tr, am.b_full);
                    let (rf, drf) = comb(am.c_ref, Complex64::new(0.0, 0.0));
                    (
                        Fields { full, tr, refl: rf },
                        Fields {
                            full: dfull,
                            tr: dtr,
                            refl: drf,
                        },
                    )
                }
            }
            Region::Right => {
                let out = am.a_out * Complex64::from_polar(1.0, k * (x - self.d));
                let zero = Complex64::new(0.0, 0.0);
                (
                    Fields {
                        full: out,
                        tr: out,
                        refl: zero,
                    },
                    Fields {
                        full: I * k * out,
                        tr: I * k * out,
                        refl: zero,
                    },
                )
            }
        }
    }

    pub fn centre(&self) -> CentreData {
        let (psi, left) = self.eval_in(self.xc, Region::InnerLeft);
        let (_, right) = self.eval_in(self.xc, Region::InnerRight);
        CentreData {
            psi: Fields {
                refl: Complex64::new(0.0, 0.0),
                ..psi
            },
            slope_left: left,
            slope_right: right,
        }
    }
}

/// Solve, build amplitudes and assemble the triple at one wavenumber.
pub fn stationary_triple(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<StationaryTriple> {
    stationary_triple_with(barrier, k, units, &BasisMethod::Auto)
}

pub fn stationary_triple_with(
    barrier: &Barrier,
    k: f64,
    units: &UnitSystem,
    method: &BasisMethod,
) -> Result<StationaryTriple> {
    let basis = solve_basis_with(barrier, k, units, method)?;
    let amplitudes = amplitudes_from_basis(&basis, barrier)?;
    Ok(StationaryTriple::new(amplitudes, basis, barrier))
}

/// Method giving results that vary smoothly over `ks`: analytic where
/// possible, otherwise replay on the union of meshes accepted at the ends
/// and the middle of the grid.
/// Largest ratio of term size to the Wronskian at b before it is distrusted.
const WRONSKIAN_CANCELLATION: f64 = 1e1;

pub fn grid_method(barrier: &Barrier, ks: &[f64], units: &UnitSystem) -> Result<BasisMethod> {
    grid_method_with(barrier, ks, units, Tolerance::default())
}

fn grid_method_with(barrier: &Barrier, ks: &[f64], units: &UnitSystem, tol: Tolerance) -> Result<BasisMethod> {
    if matches!(barrier.shape(), Shape::Rectangular { .. }) || ks.is_empty() {
        return Ok(BasisMethod::Auto);
    }
    let probes = [ks[0], ks[ks.len() / 2], ks[ks.len() - 1]];
    let meshes = probes
        .iter()
        .map(|&k| {
            solve_basis_with(barrier, k, units, &BasisMethod::Ode(tol))
                .map(|b| b.mesh().expect("numeric basis"))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = meshes[0].len();
    let merged = (0..n)
        .map(|i| ode::merge_meshes(&meshes.iter().map(|m| m[i].as_slice()).collect::<Vec<_>>()))
        .collect();
    Ok(BasisMethod::Replay(Arc::new(merged)))
}

/// Method for evaluating near a single wavenumber (and nearby barrier
/// heights) on one fixed mesh.
pub fn local_method(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<BasisMethod> {
    grid_method_with(barrier, &[k], units, LOCAL_TOLERANCE)
}

/// Tighter than the grid default: τ⁰ can be 1e-4 of τ_end and inherits the
/// mesh's absolute error.
const LOCAL_TOLERANCE: Tolerance = Tolerance {
    rtol: 1e-13,
    atol: 1e-13,
    max_steps: 200_000,
};

/// Triples over a wavenumber grid, in grid order.
pub fn solve_grid(barrier: &Barrier, ks: &[f64], units: &UnitSystem) -> Result<Vec<StationaryTriple>> {
    let method = grid_method(barrier, ks, units)?;
    parallel::try_map(ks, |&k| stationary_triple_with(barrier, k, units, &method))
}

/// Probability current ħ/m · Im(ψ* ψ′).
pub fn current(units: &UnitSystem, psi: Complex64, slope: Complex64) -> f64 {
    units.hbar / units.mass * (psi.conj() * slope).im
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural() -> UnitSystem {
        UnitSystem::natural(1.0).unwrap()
    }

    #[test]
    fn rectangular_basis_below_top() {
        let u = natural();
        let bar = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        let basis = solve_basis(&bar, 1.0, &u).unwrap();
        let kappa = 1.0f64;
        assert!((basis.at_b.u - kappa.sinh()).abs() < 1e-14);
        assert!((basis.at_b.v - kappa.cosh()).abs() < 1e-14);
        assert!((basis.wronskian - kappa).abs() < 1e-14);
        let c = basis.at(0.0);
        assert_eq!((c.u, c.dv), (0.0, 0.0));
    }

    #[test]
    fn analytic_point_transmission() {
        let u = natural();
        let bar = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        let t = stationary_triple(&bar, 1.0, &u).unwrap();
        let expected = 1.0 / (2.0f64).cosh().powi(2);
        assert!((t.amplitudes.t - expected).abs() < 1e-14);
    }

    #[test]
    fn amplitudes_invariant_under_basis_scaling() {
        let u = natural();
        let bar = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        let analytic = stationary_triple(&bar, 0.3, &u).unwrap();
        let ode = stationary_triple_with(&bar, 0.3, &u, &BasisMethod::Ode(Tolerance::default())).unwrap();
        assert!((ode.basis.wronskian - 1.0).abs() < 1e-9);
        assert!((analytic.basis.wronskian - 1.0).abs() > 0.1);
        let da = (analytic.amplitudes.a_out - ode.amplitudes.a_out).norm();
        let db = (analytic.amplitudes.b_out - ode.amplitudes.b_out).norm();
        assert!(da < 1e-9 && db < 1e-9, "{da} {db}");
    }

    #[test]
    fn above_barrier_and_well() {
        let u = natural();
        for v0 in [0.3, -0.5] {
            let bar = Barrier::rectangular(2.0, 4.5, v0).unwrap();
            let t = stationary_triple(&bar, 1.1, &u).unwrap();
            assert!((t.amplitudes.t + t.amplitudes.r - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn tiny_barrier_is_transparent() {
        let u = natural();
        let bar = Barrier::rectangular(1.0, 3.0, 1e-12).unwrap();
        let t = stationary_triple(&bar, 0.7, &u).unwrap();
        assert!((t.amplitudes.t - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_nonpositive_k() {
        let bar = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        assert!(solve_basis(&bar, 0.0, &natural()).is_err());
        assert!(solve_basis(&bar, -1.0, &natural()).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let bar = Barrier::rectangular(1.0, 3000.0, 1.0).unwrap();
        assert!(matches!(
            solve_basis(&bar, 0.5, &natural()),
            Err(Error::BasisOverflow { .. })
        ));
    }

    #[test]
    fn centre_values_vanish_for_reflection() {
        let u = natural();
        let bar = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        let t = stationary_triple(&bar, 0.8, &u).unwrap();
        let c = t.centre();
        assert_eq!(c.psi.refl, Complex64::new(0.0, 0.0));
        let via_left = t.eval_in(2.0, Region::InnerLeft).0;
        assert!(via_left.refl.norm() < 1e-15);
    }
}
