//! Closed forms for the rectangular barrier.
//!
//! With κ² = 2m(V0 − E)/ħ² (either sign) and z = κ²d², every quantity is
//! written through even functions of √z, so the same expressions cover
//! tunnelling, E = V0 and above-barrier energies. For κd > 30 the
//! exponentials are factored out and combined in log space.

use crate::error::{Error, Result};
use crate::potential::Barrier;
use crate::special::{c2, cosh_sqrt, g3, sinhc};
use crate::units::UnitSystem;

const LOG_SWITCH: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRecord {
    pub k: f64,
    /// κ² (negative above the barrier).
    pub kappa2: f64,
    pub kappa0: f64,
    pub t: f64,
    pub ln_t: f64,
    /// arg a_out in (−π, π].
    pub j: f64,
    pub d_gr: f64,
    pub tau_dwell: f64,
    pub ln_tau_dwell: f64,
    pub tau_end: f64,
    pub tau0: f64,
    /// τ_end − τ⁰ − τ_dwell.
    pub tau_int: f64,
}

impl OracleRecord {
    /// Limit of τ_end for d → ∞ (tunnelling only).
    pub fn tau_end_limit(&self, units: &UnitSystem) -> Option<f64> {
        (self.kappa2 > 0.0).then(|| {
            2.0 * units.mass * self.k / (units.hbar * self.kappa2.sqrt() * self.kappa0.powi(2))
        })
    }
}

fn wrap(a: f64) -> f64 {
    let w = a - 2.0 * std::f64::consts::PI * (a / (2.0 * std::f64::consts::PI)).round();
    if w <= -std::f64::consts::PI {
        w + 2.0 * std::f64::consts::PI
    } else {
        w
    }
}

pub fn rectangular_oracle(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<OracleRecord> {
    let v0 = barrier.rectangular_height().ok_or_else(|| {
        Error::InvalidArgument("closed forms need a rectangular barrier".into())
    })?;
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
    }
    let (m, hbar) = (units.mass, units.hbar);
    let factor = units.two_m_over_hbar2();
    let d = barrier.width();
    let kappa2 = factor * (v0 - units.energy(k));
    let k02 = factor * v0;
    let kappa0 = k02.abs().sqrt();
    let k2 = k * k;
    let x = kappa2.max(0.0).sqrt() * d;

    let rec = if x <= LOG_SWITCH {
        let z = kappa2 * d * d;
        let s1 = d * sinhc(z);
        let den = 4.0 * k2 + k02 * k02 * s1 * s1;
        let t = 4.0 * k2 / den;
        let d_gr = 4.0 * (k2 + 0.5 * k02 * z * c2(z)) * (k02 * d.powi(3) * g3(z) + d) / den;
        let tau_dwell = m / (2.0 * hbar * k) * (2.0 * d + k02 * d.powi(3) * g3(z));
        let tau_end = m * k / hbar * (4.0 * d + 8.0 * k02 * d.powi(3) * g3(4.0 * z)) / den;
        let tau0 = 2.0 * m * k / hbar
            * (2.0 * d + k02 * d.powi(3) * c2(z) + (kappa2 - k2) * d.powi(3) * g3(z))
            / den;
        OracleRecord {
            k,
            kappa2,
            kappa0,
            t,
            ln_t: t.ln(),
            j: wrap(-(s1 * (kappa2 - k2)).atan2(2.0 * k * cosh_sqrt(z))),
            d_gr,
            tau_dwell,
            ln_tau_dwell: tau_dwell.ln(),
            tau_end,
            tau0,
            tau_int: tau_end - tau0 - tau_dwell,
        }
    } else {
        // sinh, cosh ~ e^x/2; e1 = e^{−x} carries the exact corrections.
        let e1 = (-x).exp();
        let e2 = e1 * e1;
        let d3 = d.powi(3);
        let ln_s1 = d.ln() + x - std::f64::consts::LN_2 - x.ln() + (-e2).ln_1p();
        let big = 2.0 * k02.ln() + 2.0 * ln_s1;
        let ln_den = big + (4.0 * k2 * (-big).exp()).ln_1p();
        let ln_t = (4.0 * k2).ln() - ln_den;
        let g3_scaled = |ee1: f64, xx: f64| (1.0 - ee1 * ee1 - 2.0 * xx * ee1) / (2.0 * xx.powi(3));
        let ln_num_gr = 4.0f64.ln()
            + x
            + (k2 * e1 + 0.25 * k02 * (1.0 - e1).powi(2)).ln()
            + x
            + (k02 * d3 * g3_scaled(e1, x) + d * e1).ln();
        let ln_dwell_bracket = x + (2.0 * d * e1 + k02 * d3 * g3_scaled(e1, x)).ln();
        let ln_tau_dwell = (m / (2.0 * hbar * k)).ln() + ln_dwell_bracket;
        let end_bracket = 2.0 * x + (4.0 * d * e2 + k02 * d3 * g3_scaled(e2, 2.0 * x) * 8.0).ln();
        let tau_end = m * k / hbar * (end_bracket - ln_den).exp();
        let b0 = 2.0 * d * e1
            + k02 * d3 * (1.0 - e1).powi(2) / (2.0 * x * x)
            + (kappa2 - k2) * d3 * g3_scaled(e1, x);
        let tau0 = 2.0 * m * k / hbar * b0.signum() * (x + b0.abs().ln() - ln_den).exp();
        let tau_dwell = ln_tau_dwell.exp();
        OracleRecord {
            k,
            kappa2,
            kappa0,
            t: ln_t.exp(),
            ln_t,
            j: wrap(-((kappa2 - k2) * (1.0 - e2) / kappa2.sqrt()).atan2(2.0 * k * (1.0 + e2))),
            d_gr: (ln_num_gr - ln_den).exp(),
            tau_dwell,
            ln_tau_dwell,
            tau_end,
            tau0,
            tau_int: tau_end - tau0 - tau_dwell,
        }
    };
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point() -> OracleRecord {
        let u = UnitSystem::natural(1.0).unwrap();
        let bar = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
        rectangular_oracle(&bar, 1.0, &u).unwrap()
    }

    #[test]
    fn analytic_point() {
        let r = point();
        let (s, c) = ((2.0f64).sinh(), (2.0f64).cosh());
        assert!((r.t - 1.0 / (c * c)).abs() < 1e-15);
        assert!((r.tau_dwell - s).abs() < 1e-14);
        assert!((r.tau_end - (2.0f64).tanh()).abs() < 1e-14);
        assert!((r.tau0 - 2.0 / c).abs() < 1e-14);
        assert!((r.d_gr - (2.0 * s - 2.0) / c).abs() < 1e-14);
        assert!((r.tau_int - ((2.0f64).tanh() - 2.0 / c - s)).abs() < 1e-13);
    }

    #[test]
    fn log_branch_joins_direct_branch() {
        let u = UnitSystem::natural(1.0).unwrap();
        // κ = 1, so κd crosses the switch between these widths.
        for d in [29.999, 30.001] {
            let bar = Barrier::rectangular(1.0, 1.0 + d, 1.0).unwrap();
            let r = rectangular_oracle(&bar, 1.0, &u).unwrap();
            let x = d;
            let den = 4.0 + 4.0 * x.sinh().powi(2);
            assert!(((r.t - 4.0 / den) / r.t).abs() < 1e-12);
            let dwell = 0.5 * (2.0 * x.sinh());
            assert!(((r.tau_dwell - dwell) / dwell).abs() < 1e-12);
            let end = (2.0 * (2.0 * x).sinh()) / den;
            assert!(((r.tau_end - end) / end).abs() < 1e-12);
            let t0 = 2.0 * (2.0 * x * x.cosh()) / den;
            assert!(((r.tau0 - t0) / t0).abs() < 1e-12);
            let gr = 4.0 * (1.0 + 2.0 * (x / 2.0).sinh().powi(2)) * (2.0 * x.sinh() - x) / den;
            assert!(((r.d_gr - gr) / gr).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_matches_transfer_matrix() {
        let u = UnitSystem::natural(1.0).unwrap();
        for (v0, d, k) in [(1.0, 2.0, 1.0), (1.0, 40.0, 0.7), (0.2, 3.0, 1.5), (-1.0, 2.5, 0.4)] {
            let bar = Barrier::rectangular(0.5, 0.5 + d, v0).unwrap();
            let r = rectangular_oracle(&bar, k, &u).unwrap();
            let tm = crate::stationary::transfer_matrix_oracle(&bar, k, &u).unwrap();
            let diff = wrap(r.j - tm.a_out.arg());
            assert!(diff.abs() < 1e-12, "{v0} {d} {k}: {diff}");
        }
    }

    #[test]
    fn opaque_limit_of_tau_end() {
        let u = UnitSystem::natural(1.0).unwrap();
        let bar = Barrier::rectangular(1.0, 1001.0, 1.0).unwrap();
        let r = rectangular_oracle(&bar, 1.0, &u).unwrap();
        assert!((r.tau_end - r.tau_end_limit(&u).unwrap()).abs() < 1e-12);
        assert!(r.t < 1e-300 && r.ln_t.is_finite());
    }

    #[test]
    fn series_at_top_of_barrier() {
        let u = UnitSystem::natural(1.0).unwrap();
        let bar = Barrier::rectangular(1.0, 3.0, 0.5).unwrap();
        let r = rectangular_oracle(&bar, 1.0, &u).unwrap();
        let (k, d, k02) = (1.0, 2.0, 1.0);
        let den = 4.0 * k * k + k02 * k02 * d * d;
        assert!((r.t - 4.0 * k * k / den).abs() < 1e-15);
        assert!((r.tau_end - k * (4.0 * d + 4.0 / 3.0 * k02 * d.powi(3)) / den).abs() < 1e-14);
        assert!((r.tau0 - 2.0 * k * (2.0 * d + k02 * d.powi(3) / 3.0) / den).abs() < 1e-14);
    }
}
