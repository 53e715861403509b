//! Transfer matrices for piecewise-constant barriers.
//!
//! (ψ, ψ′) is carried from b, where the outgoing wave is e^{ik(x−b)}, back
//! to a and matched there to e^{ikx} + b_out e^{ik(2a−x)}.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{Barrier, Piece};
use crate::quadrature::PanelRule;
use crate::special::{cosh_sqrt, sinhc};
use crate::units::UnitSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferRecord {
    pub a_out: Complex64,
    pub b_out: Complex64,
    pub t: f64,
    pub r: f64,
}

fn constant_pieces(barrier: &Barrier) -> Result<Vec<(Piece, f64)>> {
    barrier
        .pieces()
        .into_iter()
        .map(|p| {
            p.constant
                .map(|h| (p, h))
                .ok_or_else(|| Error::InvalidArgument("transfer matrices need constant pieces".into()))
        })
        .collect()
}

/// Carry (ψ, ψ′) backwards by `h` through a region where ψ″ = κ²ψ.
fn step_back(kappa2: f64, h: f64, psi: Complex64, dpsi: Complex64) -> (Complex64, Complex64) {
    let z = kappa2 * h * h;
    let c = cosh_sqrt(z);
    let s = h * sinhc(z);
    (c * psi - s * dpsi, -kappa2 * s * psi + c * dpsi)
}

pub fn transfer_matrix_oracle(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<TransferRecord> {
    let pieces = constant_pieces(barrier)?;
    let e = units.energy(k);
    let factor = units.two_m_over_hbar2();
    let ik = Complex64::new(0.0, k);
    let mut psi = Complex64::new(1.0, 0.0);
    let mut dpsi = ik;
    for (p, h) in pieces.iter().rev() {
        (psi, dpsi) = step_back(factor * (h - e), p.end - p.start, psi, dpsi);
    }
    // Here ψ is the physical field divided by a_out e^{ika}.
    let big_a = 0.5 * (psi + dpsi / ik);
    let big_b = 0.5 * (psi - dpsi / ik);
    let a_out = 1.0 / big_a;
    let b_out = big_b / big_a;
    Ok(TransferRecord {
        a_out,
        b_out,
        t: a_out.norm_sqr(),
        r: b_out.norm_sqr(),
    })
}

/// Dwell time from 2∫_{x_c}^b |ψ_full|² dx / I, with ψ from the transfer matrices.
pub fn transfer_dwell_time(barrier: &Barrier, k: f64, units: &UnitSystem) -> Result<f64> {
    let pieces = constant_pieces(barrier)?;
    let e = units.energy(k);
    let factor = units.two_m_over_hbar2();
    let ik = Complex64::new(0.0, k);
    let rule = PanelRule::new(32);
    let xc = barrier.center();
    let mut psi = Complex64::new(1.0, 0.0);
    let mut dpsi = ik;
    let mut integral = 0.0;
    for (p, h) in pieces.iter().rev() {
        let kappa2 = factor * (h - e);
        let lo = p.start.max(xc);
        if p.end > lo {
            let width = 8.0 / kappa2.abs().sqrt().max(k).max(1e-300);
            let (mut xs, mut ws) = (Vec::new(), Vec::new());
            rule.lay(lo, p.end, width, &mut xs, &mut ws);
            for (x, w) in xs.iter().zip(&ws) {
                let (v, _) = step_back(kappa2, p.end - x, psi, dpsi);
                integral += w * v.norm_sqr();
            }
        }
        (psi, dpsi) = step_back(kappa2, p.end - p.start, psi, dpsi);
    }
    let current = units.hbar * k / units.mass;
    // |ψ_phys|² = T |ψ|², and I = T ħk/m, so T cancels.
    Ok(2.0 * integral / current)
}
