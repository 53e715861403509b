//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Barrier, Segment};
use crate::units::UnitSystem;
use crate::wavepacket::{build_profile, SpectralProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Amplitudes,
    Times,
    PacketTrace,
    HartmanSweep,
    Larmor,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Amplitudes => "amplitudes",
            Self::Times => "times",
            Self::PacketTrace => "packet-trace",
            Self::HartmanSweep => "hartman-sweep",
            Self::Larmor => "larmor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitKind {
    /// nm, eV, ps; `mass` is a multiple of the electron mass.
    NmEv,
    /// ħ = 1; `mass` is the mass itself and the `_nm`/`_ev`/`_ps` suffixes
    /// are read as plain numbers.
    Natural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsBlock {
    pub system: UnitKind,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentBlock {
    pub width_nm: f64,
    pub height_ev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierKind {
    Rectangular,
    Piecewise,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierBlock {
    pub kind: BarrierKind,
    pub a_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<SegmentBlock>>,
    /// Whitespace-separated potential values (eV) at uniform points of [a, b].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    #[serde(default, rename = "E0_ev", skip_serializing_if = "Option::is_none")]
    pub e0_ev: Option<f64>,
    pub l0_nm: f64,
    pub n_samples: usize,
    #[serde(default = "default_sigmas")]
    pub halfwidth_sigmas: f64,
}

fn default_sigmas() -> f64 {
    8.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start_ps: f64,
    pub end_ps: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn values_ps(&self) -> Vec<f64> {
        let n = self.samples;
        let step = (self.end_ps - self.start_ps) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.end_ps } else { self.start_ps + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub d_min_nm: f64,
    pub d_max_nm: f64,
    pub count: usize,
    /// Stationary pipeline where representable, closed forms otherwise.
    #[serde(default = "yes")]
    pub numeric: bool,
}

fn yes() -> bool {
    true
}

impl SweepBlock {
    pub fn widths_nm(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.d_min_nm];
        }
        let step = (self.d_max_nm - self.d_min_nm) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.d_max_nm } else { self.d_min_nm + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LarmorBlock {
    /// ħω_L; defaults to 1e−5 of the largest |V|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar_omega_ev: Option<f64>,
    /// Also integrate the barrier norm over time.
    #[serde(default)]
    pub direct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    /// Only used to seed property-style sampling; the experiments are deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub units: UnitsBlock,
    pub barrier: BarrierBlock,
    pub profile: ProfileBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub larmor: Option<LarmorBlock>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(f) = cfg.barrier.samples_file.as_mut() {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    *f = dir.join(&*f);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serialises")
    }

    /// Pick the experiment to run: the requested one must agree with the
    /// file when both are given.
    pub fn select(&self, requested: Option<ExperimentKind>) -> Result<ExperimentKind> {
        match (requested, self.experiment) {
            (Some(r), Some(f)) if r != f => Err(config_err(format!(
                "command asks for {} but the configuration selects {}",
                r.name(),
                f.name()
            ))),
            (Some(r), _) => Ok(r),
            (None, Some(f)) => Ok(f),
            (None, None) => Err(config_err("no experiment selected")),
        }
    }

    pub fn unit_system(&self) -> Result<UnitSystem> {
        positive("units.mass", self.units.mass)?;
        let u = match self.units.system {
            UnitKind::NmEv => UnitSystem::nm_ev(self.units.mass),
            UnitKind::Natural => UnitSystem::natural(self.units.mass),
        };
        u.map_err(|e| config_err(e.to_string()))
    }

    pub fn build_barrier(&self, units: &UnitSystem) -> Result<Barrier> {
        let b = &self.barrier;
        let len = |nm: f64| units.length_from_nm(nm);
        let en = |ev: f64| units.energy_from_ev(ev);
        let need_b = || b.b_nm.ok_or_else(|| config_err("barrier.b_nm is required for this kind"));
        let built = match b.kind {
            BarrierKind::Rectangular => {
                let v0 = b.v0_ev.ok_or_else(|| config_err("barrier.v0_ev is required"))?;
                Barrier::rectangular(len(b.a_nm), len(need_b()?), en(v0))
            }
            BarrierKind::Piecewise => {
                let segs = b
                    .segments
                    .as_ref()
                    .ok_or_else(|| config_err("barrier.segments is required"))?;
                let segs = segs
                    .iter()
                    .map(|s| Segment {
                        width: len(s.width_nm),
                        height: en(s.height_ev),
                    })
                    .collect();
                Barrier::piecewise(len(b.a_nm), segs)
            }
            BarrierKind::Sampled => {
                let path = b
                    .samples_file
                    .as_ref()
                    .ok_or_else(|| config_err("barrier.samples_file is required"))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                let values = text
                    .split_whitespace()
                    .enumerate()
                    .map(|(i, w)| {
                        w.parse::<f64>().map(en).map_err(|e| {
                            config_err(format!("{}: value {}: {e}", path.display(), i + 1))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Barrier::sampled(len(b.a_nm), len(need_b()?), values)
            }
        };
        built.map_err(|e| config_err(format!("barrier: {e}")))
    }

    pub fn k0(&self, units: &UnitSystem) -> Result<f64> {
        match (self.profile.k0, self.profile.e0_ev) {
            (Some(k), None) => {
                positive("profile.k0", k)?;
                Ok(k / units.length_from_nm(1.0))
            }
            (None, Some(e)) => {
                positive("profile.E0_ev", e)?;
                Ok(units.wavenumber(units.energy_from_ev(e)))
            }
            _ => Err(config_err("give exactly one of profile.k0 and profile.E0_ev")),
        }
    }

    pub fn build_profile(&self, units: &UnitSystem) -> Result<SpectralProfile> {
        let k0 = self.k0(units)?;
        positive("profile.l0_nm", self.profile.l0_nm)?;
        build_profile(
            k0,
            units.length_from_nm(self.profile.l0_nm),
            self.profile.n_samples,
            self.profile.halfwidth_sigmas,
        )
        .map_err(|e| config_err(format!("profile: {e}")))
    }

    pub fn time_grid(&self) -> Result<&TimeGrid> {
        let g = self.times.as_ref().ok_or_else(|| config_err("a [times] block is required"))?;
        if g.samples < 2 || !(g.end_ps > g.start_ps) || !g.start_ps.is_finite() || !g.end_ps.is_finite() {
            return Err(config_err("times needs end_ps > start_ps and at least 2 samples"));
        }
        Ok(g)
    }

    pub fn sweep_block(&self) -> Result<&SweepBlock> {
        let s = self.sweep.as_ref().ok_or_else(|| config_err("a [sweep] block is required"))?;
        positive("sweep.d_min_nm", s.d_min_nm)?;
        positive("sweep.d_max_nm", s.d_max_nm)?;
        if s.count == 0 || s.d_max_nm < s.d_min_nm {
            return Err(config_err("sweep needs d_max_nm ≥ d_min_nm and count ≥ 1"));
        }
        Ok(s)
    }

    /// Validate every block the selected experiment will read.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let units = self.unit_system()?;
        self.build_barrier(&units)?;
        self.build_profile(&units)?;
        match kind {
            ExperimentKind::Amplitudes => {}
            ExperimentKind::Times | ExperimentKind::PacketTrace => {
                self.time_grid()?;
            }
            ExperimentKind::HartmanSweep => {
                if self.barrier.kind != BarrierKind::Rectangular {
                    return Err(config_err("hartman-sweep needs a rectangular barrier"));
                }
                self.sweep_block()?;
            }
            ExperimentKind::Larmor => {
                self.time_grid()?;
                if let Some(w) = self.larmor.as_ref().and_then(|l| l.hbar_omega_ev) {
                    positive("larmor.hbar_omega_ev", w)?;
                }
            }
        }
        Ok(())
    }
}
