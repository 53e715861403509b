//! Time-dependent packets built by spectral superposition of stationary
//! states, and their expectation values.

mod expectation;
mod grid;

pub use expectation::{
    BalanceTerms, ExpectationSeries, NormSample, Observable, PairSample, SeriesPoint,
};
pub use grid::Domain;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::parallel;
use crate::potential::Barrier;
use crate::quadrature::PanelRule;
use crate::stationary::{self, Fields, Region, StationaryTriple};
use crate::units::UnitSystem;

/// Gaussian spectral profile on a uniform, trapezoid-weighted k-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    pub k0: f64,
    pub l0: f64,
    pub halfwidth_sigmas: f64,
    pub ks: Vec<f64>,
    pub weights: Vec<f64>,
    pub amplitude: Vec<f64>,
}

/// A(k) = (2 l0²/π)^{1/4} exp(−l0²(k − k0)²), normalised in ∫|A|²dk.
pub fn gaussian_amplitude(k0: f64, l0: f64, k: f64) -> f64 {
    (2.0 * l0 * l0 / PI).powf(0.25) * (-(l0 * (k - k0)).powi(2)).exp()
}

pub fn build_profile(k0: f64, l0: f64, n_samples: usize, halfwidth_sigmas: f64) -> Result<SpectralProfile> {
    if !(k0 > 0.0) || !(l0 > 0.0) || !(halfwidth_sigmas > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need k0 > 0, l0 > 0 and a positive half-width (got {k0}, {l0}, {halfwidth_sigmas})"
        )));
    }
    if n_samples < 64 {
        return Err(Error::InvalidArgument(format!(
            "need at least 64 spectral samples, got {n_samples}"
        )));
    }
    let half = halfwidth_sigmas / (std::f64::consts::SQRT_2 * l0);
    let lo = k0 - half;
    if lo <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "spectral grid reaches k = {lo:.4e} ≤ 0; narrow it or raise k0·l0"
        )));
    }
    let dk = 2.0 * half / (n_samples - 1) as f64;
    let ks: Vec<f64> = (0..n_samples)
        .map(|j| if j == n_samples - 1 { k0 + half } else { lo + dk * j as f64 })
        .collect();
    let mut weights = vec![dk; n_samples];
    weights[0] *= 0.5;
    weights[n_samples - 1] *= 0.5;
    let amplitude = ks.iter().map(|&k| gaussian_amplitude(k0, l0, k)).collect();
    Ok(SpectralProfile {
        k0,
        l0,
        halfwidth_sigmas,
        ks,
        weights,
        amplitude,
    })
}

impl SpectralProfile {
    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn dk(&self) -> f64 {
        self.ks[1] - self.ks[0]
    }

    pub fn norm(&self) -> f64 {
        self.weighted_sum(|_| 1.0)
    }

    /// Σ w |A|² f(j).
    pub fn weighted_sum(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.len())
            .map(|j| self.weights[j] * self.amplitude[j].powi(2) * f(j))
            .sum()
    }

    pub fn mean_k(&self) -> f64 {
        self.weighted_sum(|j| self.ks[j]) / self.norm()
    }

    /// |A(k)|² − |A(−k)|².
    pub fn varpi(&self, j: usize) -> f64 {
        self.amplitude[j].powi(2) - gaussian_amplitude(self.k0, self.l0, -self.ks[j]).powi(2)
    }

    /// |A(k0)| / |A(−k0)|, as a base-10 logarithm.
    pub fn log10_completion_ratio(&self) -> f64 {
        (2.0 * self.l0 * self.k0).powi(2) / std::f64::consts::LN_10
    }
}

/// Which spectral superposition to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Full,
    Tr,
    Ref,
    Free,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierNode {
    pub x: f64,
    pub w: f64,
    pub region: Region,
}

/// Centre, spread and drift of one outgoing component, from its spectral weights.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kinematics {
    pub k_mean: f64,
    pub sigma_k: f64,
    pub shift: f64,
}

/// A packet over a fixed barrier: stationary triples on the profile grid
/// plus basis values cached at the barrier quadrature nodes.
#[derive(Debug, Clone)]
pub struct Packet {
    pub(crate) units: UnitSystem,
    pub(crate) barrier: Barrier,
    pub(crate) profile: SpectralProfile,
    pub(crate) triples: Vec<StationaryTriple>,
    pub(crate) coeff: Vec<f64>,
    pub(crate) energies: Vec<f64>,
    pub(crate) b_refl: Vec<Complex64>,
    pub(crate) out: Vec<Complex64>,
    pub(crate) nodes: Vec<BarrierNode>,
    /// Node-major: `cache[node * nk + j]` = (u, u′, v, v′).
    pub(crate) cache: Vec<[f64; 4]>,
    pub(crate) kin_in: Kinematics,
    pub(crate) kin_ref: Kinematics,
    pub(crate) kin_tr: Kinematics,
    pub(crate) outer_width: f64,
    pub(crate) rule: PanelRule,
    t_total: f64,
    r_total: f64,
}

impl Packet {
    pub fn build(barrier: &Barrier, profile: SpectralProfile, units: &UnitSystem) -> Result<Self> {
        let triples = stationary::solve_grid(barrier, &profile.ks, units)?;
        Self::from_triples(barrier, profile, units, triples)
    }

    pub fn from_triples(
        barrier: &Barrier,
        profile: SpectralProfile,
        units: &UnitSystem,
        triples: Vec<StationaryTriple>,
    ) -> Result<Self> {
        Self::assemble(barrier, profile, units, triples, None)
    }

    /// Build on the barrier nodes of `other`, so node-wise products of the
    /// two packets are meaningful.
    pub fn build_on_nodes_of(
        barrier: &Barrier,
        profile: SpectralProfile,
        units: &UnitSystem,
        other: &Packet,
    ) -> Result<Self> {
        let triples = stationary::solve_grid(barrier, &profile.ks, units)?;
        Self::assemble(barrier, profile, units, triples, Some(other.barrier_nodes()))
    }

    fn assemble(
        barrier: &Barrier,
        profile: SpectralProfile,
        units: &UnitSystem,
        triples: Vec<StationaryTriple>,
        layout: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Result<Self> {
        let nk = profile.len();
        let coeff: Vec<f64> = (0..nk)
            .map(|j| profile.weights[j] * profile.amplitude[j] / (2.0 * PI).sqrt())
            .collect();
        let energies = profile.ks.iter().map(|&k| units.energy(k)).collect();
        let a = barrier.a();
        let d = barrier.width();
        let b_refl = triples
            .iter()
            .map(|t| t.amplitudes.b_out * Complex64::from_polar(1.0, 2.0 * t.k() * a))
            .collect();
        let out = triples
            .iter()
            .map(|t| t.amplitudes.a_out * Complex64::from_polar(1.0, -t.k() * d))
            .collect();

        let rule = PanelRule::new(32);
        let k_max = profile.ks[nk - 1];
        let (xs, ws) = match layout {
            Some(l) => l,
            None => {
                let width = barrier.panel_width(k_max, units.energy(profile.ks[0]), units.two_m_over_hbar2());
                barrier.quadrature_nodes(&rule, width)
            }
        };
        let xc = barrier.center();
        let nodes: Vec<BarrierNode> = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| BarrierNode {
                x,
                w,
                region: if x < xc { Region::InnerLeft } else { Region::InnerRight },
            })
            .collect();
        let per_k: Vec<Vec<[f64; 4]>> = parallel::map(&triples, |t| {
            nodes
                .iter()
                .map(|n| {
                    let bv = t.basis.at(n.x - xc);
                    [bv.u, bv.du, bv.v, bv.dv]
                })
                .collect()
        });
        let mut cache = vec![[0.0; 4]; nodes.len() * nk];
        for (j, col) in per_k.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                cache[i * nk + j] = *v;
            }
        }

        let w2 = |j: usize| profile.weights[j] * profile.amplitude[j].powi(2);
        let t_total: f64 = (0..nk).map(|j| w2(j) * triples[j].amplitudes.t).sum();
        let r_total: f64 = (0..nk).map(|j| w2(j) * triples[j].amplitudes.r).sum();
        let kin = |weight: &dyn Fn(usize) -> f64, phase: &dyn Fn(usize) -> Complex64| {
            let total: f64 = (0..nk).map(|j| w2(j) * weight(j)).sum();
            if total <= 0.0 {
                return Kinematics {
                    k_mean: profile.k0,
                    sigma_k: 0.5 / profile.l0,
                    shift: 0.0,
                };
            }
            let mean: f64 = (0..nk).map(|j| w2(j) * weight(j) * profile.ks[j]).sum::<f64>() / total;
            let var: f64 = (0..nk)
                .map(|j| w2(j) * weight(j) * (profile.ks[j] - mean).powi(2))
                .sum::<f64>()
                / total;
            let mut shift = 0.0;
            let mut sw = 0.0;
            for j in 0..nk - 1 {
                let (p0, p1) = (phase(j), phase(j + 1));
                if p0.norm() == 0.0 || p1.norm() == 0.0 {
                    continue;
                }
                let slope = (p1 / p0).arg() / (profile.ks[j + 1] - profile.ks[j]);
                let wt = 0.5 * (w2(j) * weight(j) + w2(j + 1) * weight(j + 1));
                shift += wt * slope;
                sw += wt;
            }
            Kinematics {
                k_mean: mean,
                sigma_k: var.sqrt().max(1e-3 / profile.l0),
                shift: if sw > 0.0 { shift / sw } else { 0.0 },
            }
        };
        let kin_in = kin(&|_| 1.0, &|_| Complex64::new(1.0, 0.0));
        let kin_ref = kin(&|j| triples[j].amplitudes.r, &|j| triples[j].amplitudes.b_out);
        let mut kin_tr = kin(&|j| triples[j].amplitudes.t, &|j| triples[j].amplitudes.a_out);
        // Out-asymptote of ψ_tr: ħkt/m − J′ + d.
        kin_tr.shift = d - kin_tr.shift;
        let mut kin_ref = kin_ref;
        // Reflected packet sits at 2a + (arg b)′ − ħkt/m.
        kin_ref.shift += 2.0 * a;

        Ok(Self {
            units: *units,
            barrier: barrier.clone(),
            outer_width: 4.0 * PI / k_max,
            profile,
            triples,
            coeff,
            energies,
            b_refl,
            out,
            nodes,
            cache,
            kin_in,
            kin_ref,
            kin_tr,
            rule,
            t_total,
            r_total,
        })
    }

    pub fn profile(&self) -> &SpectralProfile {
        &self.profile
    }

    pub fn barrier(&self) -> &Barrier {
        &self.barrier
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn triples(&self) -> &[StationaryTriple] {
        &self.triples
    }

    /// Spectral transmission Σ w|A|²T (the constant **T**).
    pub fn transmission(&self) -> f64 {
        self.t_total
    }

    pub fn reflection(&self) -> f64 {
        self.r_total
    }

    /// Barrier quadrature nodes and weights.
    pub fn barrier_nodes(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.nodes.iter().map(|n| n.x).collect(),
            self.nodes.iter().map(|n| n.w).collect(),
        )
    }

    /// c_j e^{−iE_j t/ħ}.
    pub(crate) fn phases(&self, t: f64) -> Vec<Complex64> {
        self.coeff
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| Complex64::from_polar(*c, -e * t / self.units.hbar))
            .collect()
    }

    /// Direct spectral sum at a single point, in grid order.
    pub fn evaluate(&self, field: FieldKind, x: f64, t: f64) -> Complex64 {
        let alpha = self.phases(t);
        let mut sum = Complex64::new(0.0, 0.0);
        for (tr, al) in self.triples.iter().zip(&alpha) {
            let v = match field {
                FieldKind::Free => Complex64::from_polar(1.0, tr.k() * x),
                FieldKind::Full => tr.eval(x).full,
                FieldKind::Tr => tr.eval(x).tr,
                FieldKind::Ref => tr.eval(x).refl,
            };
            sum += al * v;
        }
        sum
    }

    /// Values and one-sided slopes of ψ_full, ψ_tr, ψ_ref at x_c.
    pub fn centre(&self, t: f64) -> stationary::CentreData {
        let alpha = self.phases(t);
        let zero = Complex64::new(0.0, 0.0);
        let z = Fields {
            full: zero,
            tr: zero,
            refl: zero,
        };
        let mut acc = stationary::CentreData {
            psi: z,
            slope_left: z,
            slope_right: z,
        };
        let add = |s: &mut Fields<Complex64>, f: &Fields<Complex64>, al: Complex64| {
            s.full += al * f.full;
            s.tr += al * f.tr;
            s.refl += al * f.refl;
        };
        for (tr, al) in self.triples.iter().zip(&alpha) {
            let c = tr.centre();
            add(&mut acc.psi, &c.psi, *al);
            add(&mut acc.slope_left, &c.slope_left, *al);
            add(&mut acc.slope_right, &c.slope_right, *al);
        }
        acc
    }

    /// Free-motion time across the barrier, m d/(ħ k0).
    pub fn free_crossing_time(&self) -> f64 {
        self.units.mass * self.barrier.width() / (self.units.hbar * self.profile.k0)
    }
}
