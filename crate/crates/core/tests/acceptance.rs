//! Acceptance criteria 1 to 9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::time::Instant;

use hartman::experiment::{self, ExperimentKind};
use hartman::larmor::clock_times;
use hartman::stationary::{
    rectangular_oracle, stationary_triple, transfer_dwell_time, transfer_matrix_oracle, TransferRecord,
};
use hartman::timing::{dwell_time, group_length, hartman_sweep};
use hartman::wavepacket::{build_profile, FieldKind, Packet};
use hartman::{Barrier, Segment, UnitSystem};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

struct Verdict {
    pass: bool,
    detail: String,
}

fn natural() -> UnitSystem {
    UnitSystem::natural(1.0).unwrap()
}

fn rel(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}

fn wrap(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    a - two_pi * (a / two_pi).round()
}

// Criterion 1

#[derive(Debug, Clone)]
enum Shape {
    Rect { a: f64, d: f64, v0: f64 },
    Steps { a: f64, half: Vec<(f64, f64)> },
}

fn shapes() -> impl Strategy<Value = (Shape, f64)> {
    let rect = (0.5..40.0f64, 0.1..8.0f64, -2.0..5.0f64).prop_map(|(a, d, v0)| Shape::Rect { a, d, v0 });
    let steps = (0.5..40.0f64, prop::collection::vec((0.1..2.0f64, -2.0..5.0f64), 1..4))
        .prop_map(|(a, half)| Shape::Steps { a, half });
    (prop_oneof![rect, steps], 0.05..3.0f64)
}

fn build(shape: &Shape) -> Barrier {
    match shape {
        Shape::Rect { a, d, v0 } => Barrier::rectangular(*a, a + d, *v0).unwrap(),
        Shape::Steps { a, half } => {
            let mut segs: Vec<Segment> = half.iter().map(|&(width, height)| Segment { width, height }).collect();
            let mirror: Vec<Segment> = segs.iter().rev().cloned().collect();
            segs.extend(mirror);
            Barrier::piecewise(*a, segs).unwrap()
        }
    }
}

fn criterion_1() -> Verdict {
    let u = natural();
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let mut worst = [0.0f64; 5];
    let outcome = runner.run(&shapes(), |(shape, k)| {
        let bar = build(&shape);
        let tr = stationary_triple(&bar, k, &u).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let a = tr.amplitudes;
        let e = [
            (a.t + a.r - 1.0).abs(),
            (a.a_tr_in + a.a_ref_in - 1.0).norm(),
            (a.a_tr_in.norm_sqr() + a.a_ref_in.norm_sqr() - 1.0).abs(),
            rel(a.a_tr.norm(), a.a_full.norm()),
            {
                let (lo, hi) = (bar.a() - 3.0, bar.b() + 3.0);
                let mut peak = 0.0f64;
                let mut err = 0.0f64;
                for i in 0..=200 {
                    let f = tr.eval(lo + (hi - lo) * i as f64 / 200.0);
                    peak = peak.max(f.full.norm());
                    err = err.max((f.tr + f.refl - f.full).norm());
                }
                err / peak
            },
        ];
        let limits = [1e-10, 1e-10, 1e-10, 1e-9, 1e-10];
        for i in 0..5 {
            prop_assert!(e[i] <= limits[i], "check {} gave {:e} for {:?} at k = {}", i, e[i], shape, k);
        }
        Ok(())
    });
    // Second deterministic pass to report the worst errors.
    let mut rng_runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    for _ in 0..200 {
        let (shape, k) = shapes().new_tree(&mut rng_runner).unwrap().current();
        if let Ok(tr) = stationary_triple(&build(&shape), k, &u) {
            let a = tr.amplitudes;
            worst[0] = worst[0].max((a.t + a.r - 1.0).abs());
            worst[1] = worst[1].max((a.a_tr_in + a.a_ref_in - 1.0).norm());
            worst[2] = worst[2].max((a.a_tr_in.norm_sqr() + a.a_ref_in.norm_sqr() - 1.0).abs());
            worst[3] = worst[3].max(rel(a.a_tr.norm(), a.a_full.norm()));
        }
    }
    match outcome {
        Ok(()) => Verdict {
            pass: true,
            detail: format!(
                "1000 barriers; sampled worst T+R-1 {:.1e}, Atr+Aref-1 {:.1e}, |Atr|^2+|Aref|^2-1 {:.1e}, |a_tr|/|a_full| {:.1e}",
                worst[0], worst[1], worst[2], worst[3]
            ),
        },
        Err(e) => Verdict {
            pass: false,
            detail: e.to_string(),
        },
    }
}

// Criterion 2

/// Transfer-matrix amplitudes with the barrier raised by `dv`.
fn tm(bar: &Barrier, k: f64, dv: f64, u: &UnitSystem) -> TransferRecord {
    transfer_matrix_oracle(&bar.with_offset(dv), k, u).unwrap()
}

fn a_tr_in(r: &TransferRecord) -> Complex64 {
    r.a_out * (r.a_out.conj() - r.b_out.conj())
}

/// Richardson-extrapolated central difference.
fn richardson(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let c = (f(h) - f(-h)) / (2.0 * h);
    let m = (f(h / 2.0) - f(-h / 2.0)) / h;
    (4.0 * m - c) / 3.0
}

struct Row {
    t: f64,
    j: f64,
    d_gr: f64,
    dwell: f64,
    tau0: f64,
    tau_end: f64,
}

fn transfer_row(bar: &Barrier, k: f64, u: &UnitSystem) -> Row {
    let base = tm(bar, k, 0.0, u);
    let v0 = bar.rectangular_height().unwrap();
    let hv = 1e-4 * v0.abs().max(u.energy(k));
    let hk = 1e-3 * k;
    let phase_k = |dk: f64| {
        let r = transfer_matrix_oracle(bar, k + dk, u).unwrap();
        (r.a_out / base.a_out).arg() - (a_tr_in(&r) / a_tr_in(&base)).arg()
    };
    let phase_v = |f: fn(&TransferRecord) -> Complex64| {
        move |dv: f64| (f(&tm(bar, k, dv, u)) / f(&base)).arg()
    };
    Row {
        t: base.t,
        j: base.a_out.arg(),
        d_gr: richardson(phase_k, hk),
        dwell: transfer_dwell_time(bar, k, u).unwrap(),
        tau0: -u.hbar * richardson(phase_v(a_tr_in), hv),
        tau_end: -u.hbar * richardson(phase_v(|r| r.a_out), hv),
    }
}

fn ode_row(bar: &Barrier, k: f64, u: &UnitSystem) -> hartman::Result<Row> {
    let tr = stationary_triple(bar, k, u)?;
    let c = clock_times(bar, k, u)?;
    Ok(Row {
        t: tr.amplitudes.t,
        j: tr.amplitudes.j,
        d_gr: group_length(bar, k, u)?,
        dwell: dwell_time(bar, k, u)?.tau_dwell,
        tau0: c.tau0,
        tau_end: c.tau_end,
    })
}

fn criterion_2() -> Verdict {
    let u = natural();
    let mut worst = [0.0f64; 6];
    let mut failures = Vec::new();
    let mut count = 0;
    for v0 in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for d in [0.5, 1.0, 2.0, 3.0, 4.0] {
            for ratio in [0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.5, 2.5] {
                count += 1;
                let k = u.wavenumber(ratio * v0);
                let rect = Barrier::rectangular(1.0, 1.0 + d, v0).unwrap();
                let steps = Barrier::piecewise(1.0, vec![Segment { width: d, height: v0 }]).unwrap();
                let o = rectangular_oracle(&rect, k, &u).unwrap();
                let ode = match ode_row(&steps, k, &u) {
                    Ok(r) => r,
                    Err(e) => {
                        failures.push(format!("V0={v0} d={d} E/V0={ratio}: {e}"));
                        continue;
                    }
                };
                for row in [ode, transfer_row(&rect, k, &u)] {
                    let errs = [
                        rel(row.t, o.t),
                        wrap(row.j - o.j).abs(),
                        rel(row.d_gr, o.d_gr),
                        rel(row.dwell, o.tau_dwell),
                        rel(row.tau0, o.tau0),
                        rel(row.tau_end, o.tau_end),
                    ];
                    for (w, e) in worst.iter_mut().zip(errs) {
                        *w = w.max(e);
                    }
                }
            }
        }
    }
    let pass = failures.is_empty() && worst.iter().all(|&e| e <= 1e-8);
    Verdict {
        pass,
        detail: format!(
            "{count} lattice points; worst rel T {:.1e}, arg a_out {:.1e} rad, d_gr {:.1e}, dwell {:.1e}, tau0 {:.1e}, tau_end {:.1e}{}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4],
            worst[5],
            if failures.is_empty() { String::new() } else { format!("; errors: {}", failures.join("; ")) }
        ),
    }
}

// Criterion 3

fn criterion_3() -> Verdict {
    let u = natural();
    let (s, c, th) = (2.0f64.sinh(), 2.0f64.cosh(), 2.0f64.tanh());
    let expected = [s, th, 2.0 / c, (2.0 * s - 2.0) / c, 1.0 / (c * c), th - 2.0 / c - s];
    let rect = Barrier::rectangular(1.0, 3.0, 1.0).unwrap();
    let steps = Barrier::piecewise(1.0, vec![Segment { width: 2.0, height: 1.0 }]).unwrap();
    let mut worst = 0.0f64;
    for bar in [rect, steps] {
        let clocks = clock_times(&bar, 1.0, &u).unwrap();
        let got = [
            dwell_time(&bar, 1.0, &u).unwrap().tau_dwell,
            clocks.tau_end,
            clocks.tau0,
            group_length(&bar, 1.0, &u).unwrap(),
            stationary_triple(&bar, 1.0, &u).unwrap().amplitudes.t,
            clocks.tau_int,
        ];
        for (g, e) in got.iter().zip(expected) {
            worst = worst.max(rel(*g, e));
        }
    }
    Verdict {
        pass: worst <= 1e-6,
        detail: format!("analytic and ODE bases; worst relative error {worst:.1e} (dwell, tau_end, tau0, d_gr, T, tau_int)"),
    }
}

// Criteria 4, 5, 9 share preset runs.

fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn criterion_4(dir: &Path) -> (Verdict, Option<f64>) {
    let cfg = experiment::preset("fig1").unwrap();
    let start = Instant::now();
    let report = match experiment::run(&cfg, ExperimentKind::Times, dir) {
        Ok(r) => r,
        Err(e) => {
            return (
                Verdict {
                    pass: false,
                    detail: format!("run failed: {e}"),
                },
                None,
            )
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let get = |k: &str| report.get(k).unwrap();
    let (free, as_, exact) = (get("tau_free_ps"), get("tau_as_ps"), get("tau_exact_ps"));
    let rows = read_rows(&dir.join("trajectory.csv"));
    let last = rows.last().unwrap();
    let ahead = last[1] > last[2];
    let checks = [
        rel(free, 0.025) <= 0.15,
        rel(as_, 0.01) <= 0.25,
        rel(exact, 0.155) <= 0.15,
        ahead,
        elapsed < 300.0,
    ];
    (
        Verdict {
            pass: checks.iter().all(|&c| c),
            detail: format!(
                "tau_free {free:.4} ps ({:+.1}%, {}), tau_as {as_:.4} ps ({:+.1}%, {}), tau_exact {exact:.4} ps ({:+.1}%, {}), CM lead at {} ps {:.1} nm ({}), {elapsed:.0} s",
                100.0 * (free / 0.025 - 1.0),
                ok(checks[0]),
                100.0 * (as_ / 0.01 - 1.0),
                ok(checks[1]),
                100.0 * (exact / 0.155 - 1.0),
                ok(checks[2]),
                last[0],
                last[1] - last[2],
                ok(checks[3]),
            ),
        },
        Some(get("max_norm_deviation_rel")),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out of tolerance"
    }
}

fn criterion_5(wide: Option<f64>) -> Verdict {
    let u = UnitSystem::nm_ev(0.067).unwrap();
    let bar = Barrier::rectangular(200.0, 215.0, 0.2).unwrap();
    let k0 = u.wavenumber(0.05);
    let pk = Packet::build(&bar, build_profile(k0, 200.0, 512, 8.0).unwrap(), &u).unwrap();
    let times: Vec<f64> = (0..=200).map(|i| u.time_from_ps(-5.0 + 0.05 * i as f64)).collect();
    let norms = pk.norm_series(&times).unwrap();
    let narrow = norms
        .iter()
        .map(|n| (n.t_norm - (1.0 - n.r_norm)).abs())
        .fold(0.0, f64::max)
        / pk.transmission();
    let wide_ok = wide.is_some_and(|w| w <= 0.05);
    Verdict {
        pass: wide_ok && narrow <= 1e-3,
        detail: format!(
            "fig1 max|T(t)-(1-R)|/T = {} ({}), l0 = 200 nm: {narrow:.3e} ({})",
            wide.map_or("unavailable".into(), |w| format!("{w:.3e}")),
            ok(wide_ok),
            ok(narrow <= 1e-3)
        ),
    }
}

fn criterion_9(root: &Path) -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in experiment::PRESET_NAMES {
        let cfg = experiment::preset(name).unwrap();
        let kind = experiment::default_experiment(name).unwrap();
        let dirs = [root.join(format!("{name}-1")), root.join(format!("{name}-2"))];
        let mut outputs = Vec::new();
        for d in &dirs {
            match experiment::run(&cfg, kind, d) {
                Ok(r) => outputs.push(r.files),
                Err(e) => {
                    pass = false;
                    notes.push(format!("{name}: {e}"));
                }
            }
        }
        if outputs.len() == 2 {
            let same = outputs[0].iter().zip(&outputs[1]).all(|(a, b)| {
                std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
            });
            pass &= same;
            notes.push(format!("{name} {}", if same { "identical" } else { "DIFFERS" }));
        }
    }
    Verdict {
        pass,
        detail: notes.join(", "),
    }
}

// Criterion 6

fn criterion_6() -> Verdict {
    let u = natural();
    let k = 1.0;
    let widths: Vec<f64> = (0..=18).map(|i| 3.0 + 0.5 * i as f64).collect();
    let rows = hartman_sweep(1.0, 1.0, k, &widths, &u, true).unwrap();
    let probe = rectangular_oracle(&Barrier::rectangular(1.0, 3.0, 1.0).unwrap(), k, &u).unwrap();
    let kappa = probe.kappa2.sqrt();
    let limit = probe.tau_end_limit(&u).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.tau_end - limit).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let n = gaps.len();
    let final_close = rel(rows[n - 1].tau_end, limit) <= 1e-3 && rel(rows[n - 2].tau_end, limit) <= 1e-3;
    let xs: Vec<f64> = rows.iter().map(|r| r.d).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.tau_dwell.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let negative = rows.iter().all(|r| r.tau_int < 0.0);
    let last = rows[n - 1];
    let share = last.tau_int.abs() / last.tau_dwell;
    let numeric = rows.iter().filter(|r| r.numeric).count();
    let pass = monotone && final_close && rel(slope, kappa) <= 0.01 && negative && (0.5..=1.0).contains(&share);
    Verdict {
        pass,
        detail: format!(
            "kappa d in [3, 12]: tau_end gap monotone {monotone}, final {:.2e} rel; log dwell slope {slope:.5} vs kappa {kappa}; tau_int < 0 {negative}; |tau_int|/dwell {share:.6}; {numeric}/{n} rows numeric",
            rel(last.tau_end, limit)
        ),
    }
}

// Criterion 7

fn criterion_7(dir: &Path) -> Verdict {
    let mut cfg = experiment::preset("e-half-v0").unwrap();
    if let Some(l) = cfg.larmor.as_mut() {
        l.direct = true;
    }
    let start = Instant::now();
    let report = match experiment::run(&cfg, ExperimentKind::Larmor, dir) {
        Ok(r) => r,
        Err(e) => {
            return Verdict {
                pass: false,
                detail: format!("run failed: {e}"),
            }
        }
    };
    let get = |k: &str| report.get(k).unwrap();
    let (tau_l, tau_int, tau_end) = (get("tau_l_ps"), get("tau_int_ps"), get("tau_end_ps"));
    let identity = get("identity_residual_ps").abs() / tau_l.max(tau_end);
    let prec = rel(get("precession_ps"), tau_l + tau_int);
    let rows = read_rows(&dir.join("larmor.csv"));
    let theta: Vec<f64> = rows.iter().map(|r| r[4]).collect();
    let spread = theta.iter().copied().fold(f64::MIN, f64::max) - theta.iter().copied().fold(f64::MAX, f64::min);
    let expected = get("sz_expected");
    // Before and after the collision the instantaneous norms are asymptotic.
    let sz = rel(rows[0][3], expected).max(rel(rows[rows.len() - 1][3], expected));
    let elapsed = start.elapsed().as_secs_f64();
    let pass = identity <= 1e-4 && prec <= 1e-3 && spread <= 1e-6 && sz <= 1e-8 && elapsed < 300.0;
    Verdict {
        pass,
        detail: format!(
            "identity residual {identity:.1e} of max(dwell, tau_end); precession vs tau_L+tau_int {prec:.1e}; theta spread {spread:.1e}; Sz {sz:.1e} rel; direct tau_L {:.1e} rel; {elapsed:.0} s",
            rel(get("tau_l_direct_ps"), tau_l)
        ),
    }
}

// Criterion 8

fn criterion_8() -> Verdict {
    let u = natural();
    let bar = Barrier::rectangular(1000.0, 1002.0, 1.0).unwrap();
    let mut boundary_peaks = Vec::new();
    let mut residual_share = 0.0f64;
    let mut ref_max = f64::MIN;
    for l0 in [50.0, 100.0] {
        let pk = Packet::build(&bar, build_profile(1.0, l0, 512, 8.0).unwrap(), &u).unwrap();
        let (mut force, mut residual, mut boundary) = (0.0f64, 0.0f64, 0.0f64);
        for i in -6..=6 {
            let t = bar.center() + 0.5 * l0 * i as f64;
            let tr = pk.ehrenfest_balance(FieldKind::Tr, t).unwrap();
            let rf = pk.ehrenfest_balance(FieldKind::Ref, t).unwrap();
            force = force.max(tr.force.abs());
            residual = residual.max(tr.residual.abs());
            boundary = boundary.max(tr.boundary.abs());
            ref_max = ref_max.max(rf.boundary);
        }
        if l0 == 50.0 {
            residual_share = residual / force;
        }
        boundary_peaks.push(boundary);
    }
    let ratio = boundary_peaks[1] / boundary_peaks[0];
    Verdict {
        pass: residual_share < 1e-3 && ref_max <= 0.0 && ratio < 0.5,
        detail: format!(
            "transmitted residual {residual_share:.1e} of peak force; max reflected boundary term {ref_max:.2e}; boundary peak ratio on doubling l0 {ratio:.3}"
        ),
    }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, Verdict)> = Vec::new();
    // ACCEPTANCE_ONLY=2,3 restricts the run to those criteria.
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|p| p.trim().parse().ok()).collect());
    let want = |n: usize| only.as_ref().is_none_or(|o| o.contains(&n));
    let mut record = |n: usize, v: Verdict| {
        println!("criterion {n}: {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((n, v));
    };
    if want(1) {
        record(1, criterion_1());
    }
    if want(2) {
        record(2, criterion_2());
    }
    if want(3) {
        record(3, criterion_3());
    }
    let mut wide = None;
    if want(4) || want(5) {
        let (c4, w) = criterion_4(&tmp.path().join("fig1-times"));
        wide = w;
        if want(4) {
            record(4, c4);
        }
    }
    if want(5) {
        record(5, criterion_5(wide));
    }
    if want(6) {
        record(6, criterion_6());
    }
    if want(7) {
        record(7, criterion_7(&tmp.path().join("larmor")));
    }
    if want(8) {
        record(8, criterion_8());
    }
    if want(9) {
        record(9, criterion_9(tmp.path()));
    }
    let failed: Vec<String> = results.iter().filter(|(_, v)| !v.pass).map(|(n, _)| n.to_string()).collect();
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}
