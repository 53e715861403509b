//! Larmor clock: the field derivative ψ̃, per-wavenumber clock times,
//! packet averages and the two-component spinor simulation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd;
use crate::parallel;
use crate::potential::Barrier;
use crate::quadrature::PanelRule;
use crate::stationary::{self, BasisMethod, StationaryTriple};
use crate::timing::dwell_time;
use crate::units::UnitSystem;
use crate::wavepacket::{FieldKind, Packet, SpectralProfile};

const FD_TOL: f64 = 1e-5;

/// Relative step in the barrier height for derivatives in V0.
const HEIGHT_STEP: f64 = 1e-4;
/// Clock times fall back to the smaller step near resonances.
const CLOCK_STEPS: [f64; 2] = [HEIGHT_STEP, 3e-5];

/// ψ̃ = (ħ/2) ∂ψ_tr/∂V0 at one wavenumber, from triples on barriers
/// shifted by ±h and ±h/2.
#[derive(Debug, Clone)]
pub struct PerturbationField {
    pub k: f64,
    pub step: f64,
    hbar: f64,
    /// +h, −h, +h/2, −h/2
    shifted: [StationaryTriple; 4],
}

fn height_scale(barrier: &Barrier, energy: f64) -> f64 {
    barrier
        .max_potential()
        .abs()
        .max(barrier.min_potential().abs())
        .max(energy)
}

pub fn perturbation_field(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<PerturbationField> {
    let method = stationary::local_method(barrier, k, units)?;
    perturbation_with(barrier, k, units, &method, HEIGHT_STEP)
}

fn perturbation_with(
    barrier: &Barrier,
    k: f64,
    units: &UnitSystem,
    method: &BasisMethod,
    rel_step: f64,
) -> Result<PerturbationField> {
    let h = rel_step * height_scale(barrier, units.energy(k));
    let at = |delta: f64| stationary::stationary_triple_with(&barrier.with_offset(delta), k, units, method);
    Ok(PerturbationField {
        k,
        step: h,
        hbar: units.hbar,
        shifted: [at(h)?, at(-h)?, at(0.5 * h)?, at(-0.5 * h)?],
    })
}

impl PerturbationField {
    fn combine(&self, f: impl Fn(&StationaryTriple) -> Complex64) -> (Complex64, Complex64) {
        let h = self.step;
        let coarse = (f(&self.shifted[0]) - f(&self.shifted[1])) / (2.0 * h);
        let fine = (f(&self.shifted[2]) - f(&self.shifted[3])) / h;
        (0.5 * self.hbar * coarse, 0.5 * self.hbar * fine)
    }

    fn extrapolated(&self, f: impl Fn(&StationaryTriple) -> Complex64) -> Complex64 {
        let (c, f) = self.combine(f);
        (4.0 * f - c) / 3.0
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.extrapolated(|t| t.eval(x).tr)
    }

    /// ψ̃ and ∂ψ̃/∂x.
    pub fn eval_with_slope(&self, x: f64) -> (Complex64, Complex64) {
        (self.eval(x), self.extrapolated(|t| t.eval_with_slope(x).1.tr))
    }

    /// ψ̃(x_c) and the one-sided slopes at x_c∓0, checked for convergence.
    pub fn centre(&self, floor: f64) -> Result<(Complex64, Complex64, Complex64)> {
        let parts: [fn(&StationaryTriple) -> Complex64; 3] = [
            |t| t.centre().psi.tr,
            |t| t.centre().slope_left.tr,
            |t| t.centre().slope_right.tr,
        ];
        let (mut coarse, mut fine) = (Vec::new(), Vec::new());
        for p in parts {
            let (c, f) = self.combine(p);
            coarse.extend([c.re, c.im]);
            fine.extend([f.re, f.im]);
        }
        let v = fd::extrapolate(&coarse, &fine, floor, FD_TOL, self.step)?;
        Ok((
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
        ))
    }
}

/// Per-wavenumber clock times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockTimes {
    pub k: f64,
    pub t: f64,
    pub tau0: f64,
    pub tau_end: f64,
    pub tau_int: f64,
    pub tau_dwell: f64,
    /// False when τ_dwell had to come from the closed form.
    pub dwell_numeric: bool,
    /// τ_end − (τ⁰ + τ_dwell + τ_int)
    pub identity_residual: f64,
}

pub fn clock_times(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<ClockTimes> {
    let method = stationary::local_method(barrier, k, units)?;
    clock_times_with(barrier, k, units, &method)
}

fn clock_times_with(barrier: &Barrier, k: f64, units: &UnitSystem, method: &BasisMethod) -> Result<ClockTimes> {
    let base = stationary::stationary_triple_with(barrier, k, units, method)?;
    let mut last = None;
    for rel_step in CLOCK_STEPS {
        match clock_times_at(barrier, k, units, method, &base, rel_step) {
            Err(e @ Error::FiniteDifference { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one step"))
}

fn clock_times_at(
    barrier: &Barrier,
    k: f64,
    units: &UnitSystem,
    method: &BasisMethod,
    base: &StationaryTriple,
    rel_step: f64,
) -> Result<ClockTimes> {
    let field = perturbation_with(barrier, k, units, method, rel_step)?;
    let free_time = units.mass * barrier.width() / (units.hbar * k);
    let h = field.step;
    let phase_rate = |f: fn(&StationaryTriple) -> Complex64, p: usize, m: usize, step: f64| {
        -units.hbar * (f(&field.shifted[p]) / f(&field.shifted[m])).arg() / step
    };
    let a_out: fn(&StationaryTriple) -> Complex64 = |t| t.amplitudes.a_out;
    let a_tr: fn(&StationaryTriple) -> Complex64 = |t| t.amplitudes.a_tr_in;
    let coarse = [phase_rate(a_out, 0, 1, 2.0 * h), phase_rate(a_tr, 0, 1, 2.0 * h)];
    let fine = [phase_rate(a_out, 2, 3, h), phase_rate(a_tr, 2, 3, h)];
    let times = fd::extrapolate(&coarse, &fine, free_time, FD_TOL, h)?;
    let (tau_end, tau0) = (times[0], times[1]);

    let c = base.centre();
    let psi_floor = 0.5 * free_time * c.psi.tr.norm().max(c.slope_right.tr.norm());
    let (pt, pt_left, pt_right) = field.centre(psi_floor)?;
    let t = base.amplitudes.t;
    let jump = c.slope_right.tr - c.slope_left.tr;
    let tilde_jump = pt_right - pt_left;
    let tau_int = (c.psi.tr * tilde_jump.conj() - pt.conj() * jump).re / (k * t);

    let dwell = dwell_time(barrier, k, units)?;
    Ok(ClockTimes {
        k,
        t,
        tau0,
        tau_end,
        tau_int,
        tau_dwell: dwell.tau_dwell,
        dwell_numeric: dwell.numeric,
        identity_residual: tau_end - (tau0 + dwell.tau_dwell + tau_int),
    })
}

/// Packet-averaged clock times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LarmorTimes {
    pub tau_l: f64,
    /// Time integral of the barrier norm, when computed.
    pub tau_l_direct: Option<f64>,
    pub tau_int: f64,
    pub tau0: f64,
    pub tau_end: f64,
    pub identity_residual: f64,
    /// Σ w|A|²T
    pub transmission: f64,
}

/// Clock times at every wavenumber of the packet grid.
pub fn spectral_clock_times(packet: &Packet) -> Result<Vec<ClockTimes>> {
    let bar = packet.barrier();
    let units = packet.units();
    let ks = &packet.profile().ks;
    let method = stationary::grid_method(bar, ks, units)?;
    parallel::try_map(ks, |&k| clock_times_with(bar, k, units, &method))
}

/// (1/**T**) Σ w ϖ T τ over the grid.
fn average(packet: &Packet, clocks: &[ClockTimes], f: impl Fn(&ClockTimes) -> f64) -> f64 {
    let p = packet.profile();
    let sum: f64 = (0..p.len())
        .map(|j| p.weights[j] * p.varpi(j) * clocks[j].t * f(&clocks[j]))
        .sum();
    sum / packet.transmission()
}

pub fn larmor_times(packet: &Packet, direct: bool) -> Result<LarmorTimes> {
    let clocks = spectral_clock_times(packet)?;
    let tau_l = average(packet, &clocks, |c| c.tau_dwell);
    let tau_int = average(packet, &clocks, |c| c.tau_int);
    let tau0 = average(packet, &clocks, |c| c.tau0);
    let tau_end = average(packet, &clocks, |c| c.tau_end);
    Ok(LarmorTimes {
        tau_l,
        tau_l_direct: if direct { Some(larmor_time_direct(packet)?) } else { None },
        tau_int,
        tau0,
        tau_end,
        identity_residual: tau_end - (tau0 + tau_l + tau_int),
        transmission: packet.transmission(),
    })
}

pub fn larmor_time(packet: &Packet) -> Result<f64> {
    let clocks = spectral_clock_times(packet)?;
    Ok(average(packet, &clocks, |c| c.tau_dwell))
}

pub fn interference_time(packet: &Packet) -> Result<f64> {
    let clocks = spectral_clock_times(packet)?;
    Ok(average(packet, &clocks, |c| c.tau_int))
}

/// (τ⁰, τ_end) averaged over the packet.
pub fn clock_readings(packet: &Packet) -> Result<(f64, f64)> {
    let clocks = spectral_clock_times(packet)?;
    Ok((
        average(packet, &clocks, |c| c.tau0),
        average(packet, &clocks, |c| c.tau_end),
    ))
}

/// Edge-to-peak ratio above which the time window counts as truncated.
const WINDOW_RATIO: f64 = 1e-10;

/// (1/**T**) ∫dt ∫_a^b |ψ_tr(x,t)|² dx, by Gauss–Legendre panels in time.
pub fn larmor_time_direct(packet: &Packet) -> Result<f64> {
    let units = packet.units();
    let prof = packet.profile();
    let bar = packet.barrier();
    let v = units.hbar * prof.k0 / units.mass;
    let t_c = bar.center() / v;
    let sigma_k = 0.5 / prof.l0;
    let spread = (prof.l0.powi(2) + (units.hbar * sigma_k * t_c / units.mass).powi(2)).sqrt();
    let sigma_t = spread / v;
    let margin = 12.0 * sigma_t + 4.0 * packet.free_crossing_time();
    let (lo, hi) = (t_c - margin, t_c + margin);
    let rule = PanelRule::new(32);
    let (mut ts, mut ws) = (Vec::new(), Vec::new());
    rule.lay(lo, hi, sigma_t, &mut ts, &mut ws);
    let values = parallel::map(&ts, |&t| packet.barrier_density(FieldKind::Tr, t));
    let peak = values.iter().copied().fold(0.0, f64::max);
    let edge = packet
        .barrier_density(FieldKind::Tr, lo)
        .max(packet.barrier_density(FieldKind::Tr, hi));
    if peak > 0.0 && edge / peak > WINDOW_RATIO {
        return Err(Error::TimeWindow { ratio: edge / peak });
    }
    let integral: f64 = values.iter().zip(&ws).map(|(f, w)| f * w).sum();
    Ok(integral / packet.transmission())
}

/// Transmitted-subensemble spin projections over time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSeries {
    pub omega: f64,
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
    pub theta: Vec<f64>,
    /// Unwrapped azimuth.
    pub phi: Vec<f64>,
    pub phi0: f64,
    pub phi_end: f64,
    /// Spectral transmissions of the two components.
    pub t_up: f64,
    pub t_down: f64,
}

impl SpinSeries {
    /// (ħ/2)(T↑ − T↓)/(T↑ + T↓)
    pub fn sz_expected(&self, hbar: f64) -> f64 {
        0.5 * hbar * (self.t_up - self.t_down) / (self.t_up + self.t_down)
    }
}

/// Spin-up and spin-down packets on barriers shifted by ∓ħω/2, sharing
/// quadrature nodes.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub omega: f64,
    pub up: Packet,
    pub down: Packet,
}

impl SpinorField {
    pub fn build(profile: &SpectralProfile, barrier: &Barrier, units: &UnitSystem, omega: f64) -> Result<Self> {
        let half = 0.5 * units.hbar * omega;
        let scale = barrier.max_potential().abs().max(barrier.min_potential().abs());
        if !(omega > 0.0) || half >= 1e-3 * scale {
            return Err(Error::LarmorField(format!(
                "need 0 < ħω/2 < 1e-3·|V|max, got ħω/2 = {half:e} against {scale:e}"
            )));
        }
        let up = Packet::build(&barrier.with_offset(-half), profile.clone(), units)?;
        let down = Packet::build_on_nodes_of(&barrier.with_offset(half), profile.clone(), units, &up)?;
        Ok(Self { omega, up, down })
    }

    pub fn series(&self, times: &[f64]) -> Result<SpinSeries> {
        let hbar = self.up.units().hbar;
        let pairs = self.up.pair_series(&self.down, times)?;
        let mut s = SpinSeries {
            omega: self.omega,
            times: times.to_vec(),
            sx: Vec::new(),
            sy: Vec::new(),
            sz: Vec::new(),
            theta: Vec::new(),
            phi: Vec::new(),
            phi0: 0.0,
            phi_end: 0.0,
            t_up: self.up.transmission(),
            t_down: self.down.transmission(),
        };
        let mut last: Option<f64> = None;
        for p in &pairs {
            let tt = 0.5 * (p.n_first + p.n_second);
            let sx = 0.5 * hbar * p.overlap.re / tt;
            let sy = 0.5 * hbar * p.overlap.im / tt;
            let sz = 0.25 * hbar * (p.n_first - p.n_second) / tt;
            let raw = sy.atan2(sx);
            let phi = match last {
                None => raw,
                Some(prev) => {
                    let two_pi = 2.0 * std::f64::consts::PI;
                    raw + two_pi * ((prev - raw) / two_pi).round()
                }
            };
            last = Some(phi);
            s.sx.push(sx);
            s.sy.push(sy);
            s.sz.push(sz);
            s.theta.push((sx * sx + sy * sy).sqrt().atan2(sz));
            s.phi.push(phi);
        }
        s.phi0 = s.phi.first().copied().unwrap_or(0.0);
        s.phi_end = s.phi.last().copied().unwrap_or(0.0);
        Ok(s)
    }
}

pub fn spinor_simulation(
    profile: &SpectralProfile,
    barrier: &Barrier,
    units: &UnitSystem,
    omega: f64,
    times: &[f64],
) -> Result<SpinSeries> {
    SpinorField::build(profile, barrier, units, omega)?.series(times)
}

/// Precession between the first and last of `times`, as Δφ/(−ω),
/// Richardson-extrapolated from ω and ω/2.
#[derive(Debug, Clone, PartialEq)]
pub struct Precession {
    pub coarse: SpinSeries,
    pub fine: SpinSeries,
    pub rate_coarse: f64,
    pub rate_fine: f64,
    pub extrapolated: f64,
}

pub fn precession(
    profile: &SpectralProfile,
    barrier: &Barrier,
    units: &UnitSystem,
    omega: f64,
    times: &[f64],
) -> Result<Precession> {
    let coarse = spinor_simulation(profile, barrier, units, omega, times)?;
    let fine = spinor_simulation(profile, barrier, units, 0.5 * omega, times)?;
    let rate_coarse = (coarse.phi_end - coarse.phi0) / -omega;
    let rate_fine = (fine.phi_end - fine.phi0) / (-0.5 * omega);
    Ok(Precession {
        extrapolated: (4.0 * rate_fine - rate_coarse) / 3.0,
        coarse,
        fine,
        rate_coarse,
        rate_fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_times_at_half_height() {
        let u = UnitSystem::natural(1.0).unwrap();
        let bar = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        let c = clock_times(&bar, 1.0, &u).unwrap();
        let (s, ch, th) = ((2.0f64).sinh(), (2.0f64).cosh(), (2.0f64).tanh());
        assert!((c.tau_end - th).abs() < 1e-7 * th, "{}", c.tau_end);
        assert!((c.tau0 - 2.0 / ch).abs() < 1e-7, "{}", c.tau0);
        let int = th - 2.0 / ch - s;
        assert!((c.tau_int - int).abs() < 1e-6 * int.abs(), "{} {int}", c.tau_int);
        assert!(c.identity_residual.abs() < 1e-6);
    }

    #[test]
    fn rejects_strong_field() {
        let u = UnitSystem::natural(1.0).unwrap();
        let bar = Barrier::rectangular(100.0, 102.0, 1.0).unwrap();
        let p = crate::wavepacket::build_profile(1.0, 50.0, 128, 6.0).unwrap();
        assert!(matches!(
            SpinorField::build(&p, &bar, &u, 0.1),
            Err(Error::LarmorField(_))
        ));
    }
}
