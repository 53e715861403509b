//! Configured experiments and their CSV outputs.

pub mod config;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind};
pub use presets::{default_experiment, preset, PRESET_NAMES};

use crate::error::{Error, Result};
use crate::larmor;
use crate::stationary::{self, rectangular_oracle};
use crate::timing;
use crate::units::UnitSystem;
use crate::wavepacket::{FieldKind, Packet};

use output::{write_manifest, write_summary, write_table};

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    /// Files written, manifest last.
    pub files: Vec<PathBuf>,
    pub summary: Vec<(String, f64)>,
}

impl RunReport {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Run `kind` with `cfg`, writing into `out` (created if missing).
pub fn run(cfg: &ExperimentConfig, kind: ExperimentKind, out: &Path) -> Result<RunReport> {
    cfg.validate(kind)?;
    std::fs::create_dir_all(out)?;
    let (mut files, summary) = match kind {
        ExperimentKind::Amplitudes => amplitudes(cfg, out)?,
        ExperimentKind::Times => trajectory(cfg, out, true)?,
        ExperimentKind::PacketTrace => trajectory(cfg, out, false)?,
        ExperimentKind::HartmanSweep => sweep(cfg, out)?,
        ExperimentKind::Larmor => spin(cfg, out)?,
    };
    let mut resolved = cfg.clone();
    resolved.experiment = Some(kind);
    resolved.output = None;
    files.push(write_manifest(out, kind.name(), &resolved.to_toml(), &files)?);
    Ok(RunReport {
        experiment: kind,
        files,
        summary: summary.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

type Outcome = (Vec<PathBuf>, Vec<(&'static str, f64)>);

fn packet(cfg: &ExperimentConfig) -> Result<(UnitSystem, Packet)> {
    let units = cfg.unit_system()?;
    let barrier = cfg.build_barrier(&units)?;
    let profile = cfg.build_profile(&units)?;
    Ok((units, Packet::build(&barrier, profile, &units)?))
}

fn per_nm(units: &UnitSystem, k: f64) -> f64 {
    k * units.length_from_nm(1.0)
}

fn amplitudes(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let units = cfg.unit_system()?;
    let barrier = cfg.build_barrier(&units)?;
    let profile = cfg.build_profile(&units)?;
    let triples = stationary::solve_grid(&barrier, &profile.ks, &units)?;
    let rows: Vec<Vec<f64>> = triples
        .iter()
        .map(|t| {
            let a = &t.amplitudes;
            vec![
                per_nm(&units, t.k()),
                units.energy_to_ev(t.basis.energy),
                a.t,
                a.r,
                a.j,
                a.lambda,
            ]
        })
        .collect();
    let table = write_table(out, "amplitudes.csv", &["k_inv_nm", "E_ev", "T", "R", "J", "lambda"], &rows)?;
    let t_packet = profile.weighted_sum(|j| triples[j].amplitudes.t);
    let r_packet = profile.weighted_sum(|j| triples[j].amplitudes.r);
    let summary = vec![
        ("k0_inv_nm", per_nm(&units, profile.k0)),
        ("transmission", t_packet),
        ("reflection", r_packet),
    ];
    let s = write_summary(out, "amplitudes_summary.csv", &summary)?;
    Ok((vec![table, s], summary))
}

fn trajectory(cfg: &ExperimentConfig, out: &Path, with_times: bool) -> Result<Outcome> {
    let (units, pk) = packet(cfg)?;
    let ps = cfg.time_grid()?.values_ps();
    let times: Vec<f64> = ps.iter().map(|&t| units.time_from_ps(t)).collect();
    let tr = pk.expectation_series(FieldKind::Tr, &times)?;
    let free = pk.expectation_series(FieldKind::Free, &times)?;
    let norms = pk.norm_series(&times)?;
    let nm = |x: f64| units.length_to_nm(x);
    let rows: Vec<Vec<f64>> = (0..times.len())
        .map(|i| vec![ps[i], nm(tr.x_mean[i]), nm(free.x_mean[i]), norms[i].t_norm, norms[i].r_norm])
        .collect();
    let table = write_table(
        out,
        "trajectory.csv",
        &["t_ps", "x_tr_nm", "x_free_nm", "norm_tr", "norm_ref"],
        &rows,
    )?;
    let deviation = norms
        .iter()
        .map(|n| (n.t_norm - (1.0 - n.r_norm)).abs())
        .fold(0.0, f64::max);
    let last = times.len() - 1;
    let mut summary = vec![
        ("transmission", pk.transmission()),
        ("reflection", pk.reflection()),
        ("max_norm_deviation_rel", deviation / pk.transmission()),
        ("final_lead_nm", nm(tr.x_mean[last] - free.x_mean[last])),
    ];
    if with_times {
        let g = timing::group_times(&pk, &tr)?;
        let ps = |t: f64| units.time_to_ps(t);
        summary.extend([
            ("tau_exact_ps", ps(g.tau_exact)),
            ("tau_as_ps", ps(g.tau_as)),
            ("tau_free_ps", ps(g.tau_free)),
            ("t1_ps", ps(g.t1)),
            ("t2_ps", ps(g.t2)),
            ("d_gr_nm", nm(g.d_gr)),
            ("x_start_nm", nm(g.x_start)),
            ("k_tr_inv_nm", per_nm(&units, g.k_tr)),
        ]);
    }
    let name = if with_times { "times_summary.csv" } else { "trace_summary.csv" };
    let s = write_summary(out, name, &summary)?;
    Ok((vec![table, s], summary))
}

fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let units = cfg.unit_system()?;
    let barrier = cfg.build_barrier(&units)?;
    let v0 = barrier
        .rectangular_height()
        .ok_or_else(|| Error::Config("hartman-sweep needs a rectangular barrier".into()))?;
    let k = cfg.k0(&units)?;
    let block = cfg.sweep_block()?;
    let widths: Vec<f64> = block.widths_nm().iter().map(|&d| units.length_from_nm(d)).collect();
    let rows = timing::hartman_sweep(barrier.a(), v0, k, &widths, &units, block.numeric)?;
    let ps = |t: f64| units.time_to_ps(t);
    let nm = |x: f64| units.length_to_nm(x);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![nm(r.d), r.t, nm(r.d_gr), ps(r.tau_dwell), ps(r.tau0), ps(r.tau_end), ps(r.tau_int)])
        .collect();
    let file = write_table(
        out,
        "sweep.csv",
        &["d_nm", "T", "d_gr_nm", "tau_dwell_ps", "tau0_ps", "tau_end_ps", "tau_int_ps"],
        &table,
    )?;
    let probe = rectangular_oracle(&barrier, k, &units)?;
    let mut summary = vec![
        ("k_inv_nm", per_nm(&units, k)),
        ("closed_form_rows", rows.iter().filter(|r| !r.numeric).count() as f64),
    ];
    if let Some(limit) = probe.tau_end_limit(&units) {
        summary.push(("tau_end_limit_ps", ps(limit)));
    }
    let s = write_summary(out, "sweep_summary.csv", &summary)?;
    Ok((vec![file, s], summary))
}

fn spin(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let (units, pk) = packet(cfg)?;
    let block = cfg.larmor.clone().unwrap_or(config::LarmorBlock {
        hbar_omega_ev: None,
        direct: false,
    });
    let bar = pk.barrier();
    let scale = bar.max_potential().abs().max(bar.min_potential().abs());
    let hw = match block.hbar_omega_ev {
        Some(e) => units.energy_from_ev(e),
        None => 1e-5 * scale,
    };
    let omega = hw / units.hbar;
    let ps: Vec<f64> = cfg.time_grid()?.values_ps();
    let times: Vec<f64> = ps.iter().map(|&t| units.time_from_ps(t)).collect();
    let clocks = larmor::larmor_times(&pk, block.direct)?;
    let prec = larmor::precession(pk.profile(), bar, &units, omega, &times)?;
    let s = &prec.coarse;
    let rows: Vec<Vec<f64>> = (0..times.len())
        .map(|i| vec![ps[i], s.sx[i], s.sy[i], s.sz[i], s.theta[i], s.phi[i]])
        .collect();
    let table = write_table(out, "larmor.csv", &["t_ps", "Sx", "Sy", "Sz", "theta", "phi"], &rows)?;
    let tp = |t: f64| units.time_to_ps(t);
    let mut summary = vec![
        ("tau0_ps", tp(clocks.tau0)),
        ("tau_l_ps", tp(clocks.tau_l)),
        ("tau_int_ps", tp(clocks.tau_int)),
        ("tau_end_ps", tp(clocks.tau_end)),
        ("identity_residual_ps", tp(clocks.identity_residual)),
        ("precession_ps", tp(prec.extrapolated)),
        ("precession_coarse_ps", tp(prec.rate_coarse)),
        ("precession_fine_ps", tp(prec.rate_fine)),
        ("sz_expected", s.sz_expected(units.hbar)),
        ("hbar_omega_ev", units.energy_to_ev(hw)),
        ("transmission", clocks.transmission),
    ];
    if let Some(d) = clocks.tau_l_direct {
        summary.push(("tau_l_direct_ps", tp(d)));
    }
    let f = write_summary(out, "larmor_summary.csv", &summary)?;
    Ok((vec![table, f], summary))
}
