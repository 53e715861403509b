//! Unit system shared by every computation.
//!
//! Internally ħ = 1 and the particle mass is carried explicitly. Two systems
//! are supported: `nm-eV`, where internal lengths are nanometres and internal
//! energies are electron-volts, and `natural`, where everything is
//! dimensionless and the mass is given directly. Conversions to nm/eV/ps only
//! happen when reading configuration and writing output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ħ²/(2 m_e) in eV·nm².
pub const HBAR2_OVER_2ME_EV_NM2: f64 = 0.0380998;

/// ħ in eV·ps.
pub const HBAR_EV_PS: f64 = 6.582119569e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Always 1 internally; kept as a field so formulas read naturally.
    pub hbar: f64,
    /// Mass in internal units (ħ = 1).
    pub mass: f64,
    /// Mass as a multiple of the free-electron mass, when physical.
    pub mass_multiplier: Option<f64>,
    /// Nanometres per internal length.
    pub length_unit: f64,
    /// eV per internal energy.
    pub energy_unit: f64,
    /// Picoseconds per internal time.
    pub time_unit: f64,
}

impl UnitSystem {
    /// Lengths in nm, energies in eV, times reported in ps.
    pub fn nm_ev(mass_multiplier: f64) -> Result<Self> {
        if !(mass_multiplier > 0.0) || !mass_multiplier.is_finite() {
            return Err(Error::InvalidUnits(format!(
                "mass multiplier must be positive, got {mass_multiplier}"
            )));
        }
        Ok(Self {
            hbar: 1.0,
            mass: mass_multiplier / (2.0 * HBAR2_OVER_2ME_EV_NM2),
            mass_multiplier: Some(mass_multiplier),
            length_unit: 1.0,
            energy_unit: 1.0,
            time_unit: HBAR_EV_PS,
        })
    }

    /// Dimensionless units with ħ = 1 and the given mass.
    pub fn natural(mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidUnits(format!(
                "mass must be positive, got {mass}"
            )));
        }
        Ok(Self {
            hbar: 1.0,
            mass,
            mass_multiplier: None,
            length_unit: 1.0,
            energy_unit: 1.0,
            time_unit: 1.0,
        })
    }

    pub fn energy(&self, k: f64) -> f64 {
        self.hbar * self.hbar * k * k / (2.0 * self.mass)
    }

    /// Wavenumber of a free particle with energy `e` (> 0).
    pub fn wavenumber(&self, e: f64) -> f64 {
        (2.0 * self.mass * e).sqrt() / self.hbar
    }

    pub fn velocity(&self, k: f64) -> f64 {
        self.hbar * k / self.mass
    }

    /// 2m/ħ², the factor in ψ'' = (2m/ħ²)(V − E)ψ.
    pub fn two_m_over_hbar2(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }

    pub fn length_from_nm(&self, nm: f64) -> f64 {
        nm / self.length_unit
    }

    pub fn length_to_nm(&self, x: f64) -> f64 {
        x * self.length_unit
    }

    pub fn energy_from_ev(&self, ev: f64) -> f64 {
        ev / self.energy_unit
    }

    pub fn energy_to_ev(&self, e: f64) -> f64 {
        e * self.energy_unit
    }

    pub fn time_to_ps(&self, t: f64) -> f64 {
        t * self.time_unit
    }

    pub fn time_from_ps(&self, ps: f64) -> f64 {
        ps / self.time_unit
    }
}
