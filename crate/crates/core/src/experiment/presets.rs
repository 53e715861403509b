//! Named configurations.

use super::config::{
    BarrierBlock, BarrierKind, ExperimentConfig, ExperimentKind, LarmorBlock, ProfileBlock, SweepBlock,
    TimeGrid, UnitKind, UnitsBlock,
};
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 3] = ["fig1", "e-half-v0", "free"];

/// Rectangular 15 nm barrier of 0.2 eV hit by a 10 nm packet at 0.05 eV.
///
/// The mass is 0.067 mₑ (GaAs conduction band). With the free-electron
/// mass the free crossing time m·d/(ħk0) would be 0.113 ps; at 0.067 mₑ it
/// is 0.029 ps. The spectral half-width is 4.1σ because k0·l0 ≈ 2.97 leaves
/// no room for a wider grid above k = 0.
pub fn fig1() -> ExperimentConfig {
    ExperimentConfig {
        experiment: None,
        seed: None,
        output: None,
        units: UnitsBlock {
            system: UnitKind::NmEv,
            mass: 0.067,
        },
        barrier: BarrierBlock {
            kind: BarrierKind::Rectangular,
            a_nm: 200.0,
            b_nm: Some(215.0),
            v0_ev: Some(0.2),
            segments: None,
            samples_file: None,
        },
        profile: ProfileBlock {
            k0: None,
            e0_ev: Some(0.05),
            l0_nm: 10.0,
            n_samples: 2048,
            halfwidth_sigmas: 4.1,
        },
        times: Some(TimeGrid {
            start_ps: 0.0,
            end_ps: 1.2,
            samples: 121,
        }),
        sweep: None,
        larmor: None,
    }
}

/// m = ħ = 1, V0 = 1, k0 = 1 (E = V0/2), d = 2, with a narrow packet.
pub fn e_half_v0() -> ExperimentConfig {
    ExperimentConfig {
        experiment: None,
        seed: None,
        output: None,
        units: UnitsBlock {
            system: UnitKind::Natural,
            mass: 1.0,
        },
        barrier: BarrierBlock {
            kind: BarrierKind::Rectangular,
            a_nm: 500.0,
            b_nm: Some(502.0),
            v0_ev: Some(1.0),
            segments: None,
            samples_file: None,
        },
        profile: ProfileBlock {
            k0: Some(1.0),
            e0_ev: None,
            l0_nm: 50.0,
            n_samples: 512,
            halfwidth_sigmas: 8.0,
        },
        times: Some(TimeGrid {
            start_ps: 0.0,
            end_ps: 1000.0,
            samples: 101,
        }),
        sweep: Some(SweepBlock {
            d_min_nm: 1.0,
            d_max_nm: 12.0,
            count: 23,
            numeric: true,
        }),
        larmor: Some(LarmorBlock {
            hbar_omega_ev: Some(1e-6),
            direct: false,
        }),
    }
}

/// The fig1 packet with the barrier switched off.
pub fn free() -> ExperimentConfig {
    let mut c = fig1();
    c.barrier.v0_ev = Some(0.0);
    c
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "fig1" => Ok(fig1()),
        "e-half-v0" => Ok(e_half_v0()),
        "free" => Ok(free()),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Experiment run by `preset <name>`.
pub fn default_experiment(name: &str) -> Result<ExperimentKind> {
    match name {
        "fig1" => Ok(ExperimentKind::PacketTrace),
        "e-half-v0" => Ok(ExperimentKind::HartmanSweep),
        "free" => Ok(ExperimentKind::Times),
        other => Err(Error::Config(format!("unknown preset {other:?}"))),
    }
}
