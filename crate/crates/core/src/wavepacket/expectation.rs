//! Norms, centre-of-mass and momentum expectations, and the force balance.

use num_complex::Complex64;

use super::grid::{density, edge_ratio, Snapshot, Want, BOUNDARY_RATIO};
use super::{FieldKind, Packet};
use crate::error::{Error, Result};
use crate::parallel;
use crate::stationary::Fields;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    X,
    P,
    Norm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub norm: f64,
}

/// Expectations of one field, divided by that field's norm at the same instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationSeries {
    pub field: FieldKind,
    pub times: Vec<f64>,
    pub x_mean: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub norm: Vec<f64>,
}

impl ExpectationSeries {
    pub fn values(&self, obs: Observable) -> &[f64] {
        match obs {
            Observable::X => &self.x_mean,
            Observable::P => &self.p_mean,
            Observable::Norm => &self.norm,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = SeriesPoint> + '_ {
        (0..self.times.len()).map(|i| SeriesPoint {
            t: self.times[i],
            x_mean: self.x_mean[i],
            p_mean: self.p_mean[i],
            norm: self.norm[i],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub t: f64,
    /// ⟨ψ_tr|ψ_tr⟩
    pub t_norm: f64,
    /// ⟨ψ_ref|ψ_ref⟩
    pub r_norm: f64,
    pub full_norm: f64,
    /// Re⟨ψ_tr|ψ_ref⟩
    pub re_overlap: f64,
}

/// Norms of the transmitted fields of two packets and their overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub t: f64,
    pub n_first: f64,
    pub n_second: f64,
    /// ⟨ψ_tr,first|ψ_tr,second⟩
    pub overlap: Complex64,
}

/// d⟨p⟩/dt against the potential force and the x_c boundary term, for the
/// unnormalised field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceTerms {
    pub t: f64,
    pub lhs: f64,
    pub force: f64,
    pub boundary: f64,
    pub residual: f64,
}

fn pick(f: &Fields<Complex64>, field: FieldKind) -> Complex64 {
    match field {
        FieldKind::Full | FieldKind::Free => f.full,
        FieldKind::Tr => f.tr,
        FieldKind::Ref => f.refl,
    }
}

struct Moments {
    norm: f64,
    x: f64,
    p: f64,
}

fn moments(snap: &Snapshot, field: FieldKind, hbar: f64) -> Moments {
    let mut m = Moments {
        norm: 0.0,
        x: 0.0,
        p: 0.0,
    };
    for i in 0..snap.xs.len() {
        let psi = pick(&snap.psi[i], field);
        let rho = snap.ws[i] * psi.norm_sqr();
        m.norm += rho;
        m.x += rho * snap.xs[i];
        m.p += snap.ws[i] * hbar * (psi.conj() * pick(&snap.slope[i], field)).im;
    }
    m
}

impl Packet {
    fn moments_at(&self, field: FieldKind, t: f64) -> Result<Moments> {
        let snap = self.snapshot(field, t, Want { slopes: true })?;
        Ok(moments(&snap, field, self.units.hbar))
    }

    pub fn expectation_series(&self, field: FieldKind, times: &[f64]) -> Result<ExpectationSeries> {
        let rows = parallel::try_map(times, |&t| self.moments_at(field, t))?;
        let mut s = ExpectationSeries {
            field,
            times: times.to_vec(),
            x_mean: Vec::with_capacity(times.len()),
            p_mean: Vec::with_capacity(times.len()),
            norm: Vec::with_capacity(times.len()),
        };
        for m in rows {
            s.norm.push(m.norm);
            s.x_mean.push(m.x / m.norm);
            s.p_mean.push(m.p / m.norm);
        }
        Ok(s)
    }

    pub fn norm_series(&self, times: &[f64]) -> Result<Vec<NormSample>> {
        parallel::try_map(times, |&t| {
            let snap = self.snapshot(FieldKind::Full, t, Want { slopes: false })?;
            let mut s = NormSample {
                t,
                t_norm: 0.0,
                r_norm: 0.0,
                full_norm: 0.0,
                re_overlap: 0.0,
            };
            for (f, w) in snap.psi.iter().zip(&snap.ws) {
                s.t_norm += w * f.tr.norm_sqr();
                s.r_norm += w * f.refl.norm_sqr();
                s.full_norm += w * f.full.norm_sqr();
                s.re_overlap += w * (f.tr.conj() * f.refl).re;
            }
            Ok(s)
        })
    }

    /// ∫_a^b |ψ|² dx at `t`.
    pub fn barrier_density(&self, field: FieldKind, t: f64) -> f64 {
        let snap = self.snapshot_on(&Default::default(), t, Want { slopes: false });
        snap.psi
            .iter()
            .zip(&snap.ws)
            .map(|(f, w)| w * pick(f, field).norm_sqr())
            .sum()
    }

    /// Transmitted-field norms and overlap with a packet built on the same
    /// barrier nodes (see [`Packet::build_on_nodes_of`]).
    pub fn pair_series(&self, other: &Packet, times: &[f64]) -> Result<Vec<PairSample>> {
        if self.nodes.len() != other.nodes.len()
            || self.nodes.iter().zip(&other.nodes).any(|(p, q)| p.x != q.x)
        {
            return Err(Error::InvalidArgument("packets do not share barrier nodes".into()));
        }
        let inner = (self.barrier.a(), self.barrier.b());
        parallel::try_map(times, |&t| {
            let domain = self.domain(t, 1.0);
            let mut first = self.snapshot_on(&domain, t, Want { slopes: false });
            let mut second = other.snapshot_on(&domain, t, Want { slopes: false });
            let ratio = edge_ratio(&domain, &first, inner).max(edge_ratio(&domain, &second, inner));
            if ratio > BOUNDARY_RATIO {
                let peak = first.psi.iter().chain(&second.psi).map(density).fold(0.0, f64::max);
                let wide = self.widen(false, t, peak, |d| {
                    self.edge_density(false, d, t).max(other.edge_density(false, d, t))
                })?;
                first = self.snapshot_on(&wide, t, Want { slopes: false });
                second = other.snapshot_on(&wide, t, Want { slopes: false });
            }
            let mut s = PairSample {
                t,
                n_first: 0.0,
                n_second: 0.0,
                overlap: Complex64::new(0.0, 0.0),
            };
            for i in 0..first.xs.len() {
                let (p, q) = (first.psi[i].tr, second.psi[i].tr);
                let w = first.ws[i];
                s.n_first += w * p.norm_sqr();
                s.n_second += w * q.norm_sqr();
                s.overlap += w * p.conj() * q;
            }
            Ok(s)
        })
    }

    /// Unnormalised ⟨p⟩ at `t`.
    fn momentum(&self, field: FieldKind, t: f64) -> Result<f64> {
        Ok(self.moments_at(field, t)?.p)
    }

    pub fn ehrenfest_balance(&self, field: FieldKind, t: f64) -> Result<BalanceTerms> {
        let h = 1e-3 * self.free_crossing_time();
        let central = |h: f64| -> Result<f64> {
            Ok((self.momentum(field, t + h)? - self.momentum(field, t - h)?) / (2.0 * h))
        };
        let coarse = central(h)?;
        let fine = central(0.5 * h)?;
        let lhs = (4.0 * fine - coarse) / 3.0;

        let (force, boundary) = if field == FieldKind::Free {
            (0.0, 0.0)
        } else {
            let mut force: f64 = self
                .barrier
                .jumps()
                .iter()
                .map(|&(x, dv)| -dv * self.evaluate(field, x, t).norm_sqr())
                .sum();
            if self.barrier.has_smooth_part() {
                let snap = self.snapshot_on(&Default::default(), t, Want { slopes: false });
                for i in 0..snap.xs.len() {
                    let dv = self.barrier.smooth_derivative(snap.xs[i]);
                    force -= snap.ws[i] * dv * pick(&snap.psi[i], field).norm_sqr();
                }
            }
            let c = self.centre(t);
            let scale = self.units.hbar.powi(2) / (2.0 * self.units.mass);
            let boundary = scale
                * (pick(&c.slope_right, field).norm_sqr() - pick(&c.slope_left, field).norm_sqr());
            (force, boundary)
        };
        Ok(BalanceTerms {
            t,
            lhs,
            force,
            boundary,
            residual: lhs - force - boundary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Barrier;
    use crate::units::UnitSystem;
    use crate::wavepacket::build_profile;

    #[test]
    fn free_centre_moves_uniformly() {
        let u = UnitSystem::natural(1.0).unwrap();
        let bar = Barrier::rectangular(200.0, 202.0, 0.0).unwrap();
        let p = build_profile(2.0, 5.0, 512, 8.0).unwrap();
        let pk = Packet::build(&bar, p, &u).unwrap();
        let times = [0.0, 5.0, 10.0];
        let s = pk.expectation_series(FieldKind::Free, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            assert!((s.norm[i] - 1.0).abs() < 1e-8);
            assert!((s.x_mean[i] - 2.0 * t).abs() < 1e-6, "{}", s.x_mean[i]);
            assert!((s.p_mean[i] - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn full_norm_conserved_through_barrier() {
        let u = UnitSystem::natural(1.0).unwrap();
        let bar = Barrier::rectangular(60.0, 62.0, 1.0).unwrap();
        let p = build_profile(1.2, 8.0, 512, 8.0).unwrap();
        let pk = Packet::build(&bar, p, &u).unwrap();
        let ns = pk.norm_series(&[0.0, 50.0, 100.0]).unwrap();
        for s in ns {
            assert!((s.full_norm - 1.0).abs() < 1e-6, "{s:?}");
            assert!((s.r_norm - pk.reflection()).abs() < 1e-6, "{s:?}");
        }
    }
}
