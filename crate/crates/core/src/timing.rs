//! Group and dwell times of the transmitted subprocess, and width sweeps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd;
use crate::interp::Pchip;
use crate::larmor::clock_times;
use crate::parallel;
use crate::potential::Barrier;
use crate::quadrature::PanelRule;
use crate::stationary::{self, rectangular_oracle, StationaryTriple};
use crate::units::UnitSystem;
use crate::wavepacket::{ExpectationSeries, Packet};

/// Below this transmission the numeric dwell time loses all precision.
const T_FLOOR: f64 = 1e-280;
const FD_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellResult {
    pub k: f64,
    /// ∫_a^b |ψ_tr|² dx / I_tr
    pub tau_dwell: f64,
    /// 2∫_{x_c}^b |ψ_full|² dx / I_full
    pub tau_dwell_alt: f64,
    /// I_tr = T ħk/m
    pub current: f64,
    pub both_forms_delta: f64,
    /// Rectangular barriers only.
    pub closed_form: Option<f64>,
    /// False when the value comes from the closed form because the
    /// stationary fields could not be represented.
    pub numeric: bool,
}

/// Both dwell-time integrals for one triple, on the given barrier nodes.
pub(crate) fn dwell_integrals(triple: &StationaryTriple, xs: &[f64], ws: &[f64], xc: f64) -> (f64, f64) {
    let (mut all, mut right) = (0.0, 0.0);
    for (&x, &w) in xs.iter().zip(ws) {
        let f = triple.eval(x);
        all += w * f.tr.norm_sqr();
        if x >= xc {
            right += w * f.full.norm_sqr();
        }
    }
    (all, 2.0 * right)
}

pub fn dwell_time(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<DwellResult> {
    let oracle = match barrier.rectangular_height() {
        Some(_) => Some(rectangular_oracle(barrier, k, units)?),
        None => None,
    };
    let closed = oracle.map(|o| o.tau_dwell);
    let triple = match stationary::stationary_triple(barrier, k, units) {
        Ok(t) if t.amplitudes.t >= T_FLOOR => Some(t),
        Ok(_) | Err(Error::BasisOverflow { .. }) if oracle.is_some() => None,
        Ok(t) => {
            return Err(Error::InvalidArgument(format!(
                "transmission {:e} too small for a numeric dwell time",
                t.amplitudes.t
            )))
        }
        Err(e) => return Err(e),
    };
    let velocity = units.hbar * k / units.mass;
    match triple {
        Some(tr) => {
            let rule = PanelRule::new(32);
            let width = barrier.panel_width(k, tr.basis.energy, units.two_m_over_hbar2());
            let (xs, ws) = barrier.quadrature_nodes(&rule, width);
            let current = tr.amplitudes.t * velocity;
            let (f1, f2) = dwell_integrals(&tr, &xs, &ws, barrier.center());
            let (tau, alt) = (f1 / current, f2 / current);
            Ok(DwellResult {
                k,
                tau_dwell: tau,
                tau_dwell_alt: alt,
                current,
                both_forms_delta: (tau - alt).abs(),
                closed_form: closed,
                numeric: true,
            })
        }
        None => {
            let o = oracle.expect("closed form available");
            Ok(DwellResult {
                k,
                tau_dwell: o.tau_dwell,
                tau_dwell_alt: o.tau_dwell,
                current: o.ln_t.exp() * velocity,
                both_forms_delta: 0.0,
                closed_form: closed,
                numeric: false,
            })
        }
    }
}

/// Per-wavenumber group length d_gr(k) = J′(k) − λ′(k).
pub fn group_length(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
    }
    let method = stationary::local_method(barrier, k, units)?;
    let central = |h: f64| -> Result<Vec<f64>> {
        let p = stationary::stationary_triple_with(barrier, k + h, units, &method)?.amplitudes;
        let m = stationary::stationary_triple_with(barrier, k - h, units, &method)?.amplitudes;
        let dj = (p.a_out / m.a_out).arg();
        let dl = (p.a_tr_in / m.a_tr_in).arg();
        Ok(vec![(dj - dl) / (2.0 * h)])
    };
    Ok(fd::derivative(central, 1e-3 * k, barrier.width(), FD_TOL)?[0])
}

/// Phase slopes of `z` along the grid: central differences of the argument
/// of neighbour ratios, one-sided at the ends.
fn phase_slopes(ks: &[f64], z: &[Complex64]) -> Result<Vec<f64>> {
    let n = ks.len();
    let mut steps = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let jump = (z[j + 1] / z[j]).arg();
        if !jump.is_finite() || jump.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::GridTooCoarse {
                k_left: ks[j],
                k_right: ks[j + 1],
                jump,
            });
        }
        steps.push(jump);
    }
    Ok((0..n)
        .map(|j| {
            if j == 0 {
                steps[0] / (ks[1] - ks[0])
            } else if j == n - 1 {
                steps[n - 2] / (ks[n - 1] - ks[n - 2])
            } else {
                (steps[j - 1] + steps[j]) / (ks[j + 1] - ks[j - 1])
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticTimes {
    /// ⟨J′⟩_out − ⟨λ′⟩_in
    pub d_gr: f64,
    pub tau_as: f64,
    pub tau_free: f64,
    /// −⟨λ′⟩_in
    pub x_start: f64,
    /// ⟨k⟩ over the transmitted weights.
    pub k_tr: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl AsymptoticTimes {
    /// Time to get from a − l1 to b + l2.
    pub fn interval_time(&self, l1: f64, l2: f64) -> f64 {
        self.mass * (self.d_gr + l1 + l2) / (self.hbar * self.k_tr)
    }
}

pub fn asymptotic_group_time(packet: &Packet) -> Result<AsymptoticTimes> {
    let prof = packet.profile();
    let triples = packet.triples();
    let ks = &prof.ks;
    let a_out: Vec<Complex64> = triples.iter().map(|t| t.amplitudes.a_out).collect();
    let a_tr: Vec<Complex64> = triples.iter().map(|t| t.amplitudes.a_tr_in).collect();
    let j_slope = phase_slopes(ks, &a_out)?;
    let l_slope = phase_slopes(ks, &a_tr)?;
    let wt = |j: usize| triples[j].amplitudes.t;
    let total = prof.weighted_sum(wt);
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("packet has no transmitted weight".into()));
    }
    let mean = |f: &dyn Fn(usize) -> f64| prof.weighted_sum(|j| wt(j) * f(j)) / total;
    let jp = mean(&|j| j_slope[j]);
    let lp = mean(&|j| l_slope[j]);
    let k_tr = mean(&|j| ks[j]);
    let u = packet.units();
    let d_gr = jp - lp;
    Ok(AsymptoticTimes {
        d_gr,
        tau_as: u.mass * d_gr / (u.hbar * k_tr),
        tau_free: packet.free_crossing_time(),
        x_start: -lp,
        k_tr,
        mass: u.mass,
        hbar: u.hbar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossings {
    /// First upward crossing of `a`.
    pub t1: f64,
    /// Last upward crossing of `b`.
    pub t2: f64,
    pub tau_exact: f64,
    /// Number of upward crossings found at each level.
    pub count_a: usize,
    pub count_b: usize,
}

/// Crossing instants of the normalised centre of mass at `a` and `b`.
pub fn exact_group_time(series: &ExpectationSeries, a: f64, b: f64) -> Result<Crossings> {
    if series.times.len() < 2 {
        return Err(Error::InvalidArgument("need at least two time samples".into()));
    }
    let p = Pchip::new(&series.times, &series.x_mean);
    let at_a = p.upward_brackets(a);
    let at_b = p.upward_brackets(b);
    let first = *at_a.first().ok_or(Error::NoCrossing { level: a })?;
    let last = *at_b.last().ok_or(Error::NoCrossing { level: b })?;
    let t1 = p.solve_in(first, a);
    let t2 = p.solve_in(last, b);
    Ok(Crossings {
        t1,
        t2,
        tau_exact: t2 - t1,
        count_a: at_a.len(),
        count_b: at_b.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupTimeResult {
    pub t1: f64,
    pub t2: f64,
    pub tau_exact: f64,
    pub tau_as: f64,
    pub d_gr: f64,
    pub tau_free: f64,
    pub x_start: f64,
    pub k_tr: f64,
}

/// Exact and asymptotic group times from a transmitted CM series.
pub fn group_times(packet: &Packet, tr_series: &ExpectationSeries) -> Result<GroupTimeResult> {
    let bar = packet.barrier();
    let c = exact_group_time(tr_series, bar.a(), bar.b())?;
    let asym = asymptotic_group_time(packet)?;
    Ok(GroupTimeResult {
        t1: c.t1,
        t2: c.t2,
        tau_exact: c.tau_exact,
        tau_as: asym.tau_as,
        d_gr: asym.d_gr,
        tau_free: asym.tau_free,
        x_start: asym.x_start,
        k_tr: asym.k_tr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub d: f64,
    pub t: f64,
    pub d_gr: f64,
    pub tau_dwell: f64,
    pub tau0: f64,
    pub tau_end: f64,
    pub tau_int: f64,
    /// Values from the stationary pipeline rather than the closed forms.
    pub numeric: bool,
}

/// Rectangular barriers [a, a + d] of height `v0` at fixed `k`. With
/// `numeric`, each row comes from the stationary pipeline where the fields
/// are representable and from the closed forms otherwise.
pub fn hartman_sweep(
    a: f64,
    v0: f64,
    k: f64,
    widths: &[f64],
    units: &UnitSystem,
    numeric: bool,
) -> Result<Vec<SweepRow>> {
    parallel::try_map(widths, |&d| {
        let bar = Barrier::rectangular(a, a + d, v0)?;
        let o = rectangular_oracle(&bar, k, units)?;
        let closed = SweepRow {
            d,
            t: o.t,
            d_gr: o.d_gr,
            tau_dwell: o.tau_dwell,
            tau0: o.tau0,
            tau_end: o.tau_end,
            tau_int: o.tau_int,
            numeric: false,
        };
        if !numeric {
            return Ok(closed);
        }
        let clocks = match clock_times(&bar, k, units) {
            Ok(c) if c.dwell_numeric => c,
            Ok(_) | Err(Error::BasisOverflow { .. }) => return Ok(closed),
            Err(e) => return Err(e),
        };
        Ok(SweepRow {
            d,
            t: clocks.t,
            d_gr: group_length(&bar, k, units)?,
            tau_dwell: clocks.tau_dwell,
            tau0: clocks.tau0,
            tau_end: clocks.tau_end,
            tau_int: clocks.tau_int,
            numeric: true,
        })
    })
}
