//! Spatial quadrature domains that follow the packet components in time.

use num_complex::Complex64;

use super::{FieldKind, Kinematics, Packet};
use crate::error::{Error, Result};
use crate::parallel;
use crate::stationary::{Fields, Region};

/// Initial half-width of each component window, in position spreads.
const SPREAD_MULTIPLE: f64 = 8.0;
pub(crate) const BOUNDARY_RATIO: f64 = 1e-12;
pub(crate) const MAX_WIDENINGS: usize = 10;
/// Plane waves are re-anchored every this many recurrence steps.
const ANCHOR: usize = 32;

/// Outer quadrature nodes left of a and right of b (the barrier nodes are
/// owned by the packet). Each group also records its interval ends.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Domain {
    pub left: Vec<(f64, f64)>,
    pub right: Vec<(f64, f64)>,
    pub left_intervals: Vec<(f64, f64)>,
    pub right_intervals: Vec<(f64, f64)>,
}

/// Which sums a snapshot needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Want {
    pub slopes: bool,
}

/// Fields (and optionally slopes) at every node of a domain, in the order
/// left nodes, barrier nodes, right nodes.
#[derive(Debug, Clone)]
pub(crate) struct Snapshot {
    pub xs: Vec<f64>,
    pub ws: Vec<f64>,
    pub psi: Vec<Fields<Complex64>>,
    pub slope: Vec<Fields<Complex64>>,
}

fn zero() -> Fields<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    Fields {
        full: z,
        tr: z,
        refl: z,
    }
}

fn merge(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.retain(|(lo, hi)| hi > lo);
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in iv {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

impl Packet {
    fn window(&self, kin: &Kinematics, t: f64, sign: f64, scale: f64) -> (f64, f64) {
        let (m, hbar) = (self.units.mass, self.units.hbar);
        let centre = kin.shift + sign * hbar * kin.k_mean * t / m;
        let sigma0 = 0.5 / kin.sigma_k;
        let spread = (sigma0.powi(2) + (hbar * kin.sigma_k * t / m).powi(2)).sqrt();
        let half = scale * SPREAD_MULTIPLE * spread + self.barrier.width();
        (centre - half, centre + half)
    }

    /// Domain for the scattered fields at time `t`, widened by `scale`.
    pub fn domain(&self, t: f64, scale: f64) -> Domain {
        let a = self.barrier.a();
        let b = self.barrier.b();
        let (lo_i, hi_i) = self.window(&self.kin_in, t, 1.0, scale);
        let (lo_r, hi_r) = self.window(&self.kin_ref, t, -1.0, scale);
        let (lo_t, hi_t) = self.window(&self.kin_tr, t, 1.0, scale);
        let left_intervals = merge(vec![(lo_i, hi_i.min(a)), (lo_r, hi_r.min(a))]);
        let right_intervals = merge(vec![(lo_t.max(b), hi_t)]);
        self.lay(left_intervals, right_intervals)
    }

    /// Domain for the free packet at time `t`.
    pub fn free_domain(&self, t: f64, scale: f64) -> Domain {
        let (lo, hi) = self.window(&self.kin_in, t, 1.0, scale);
        self.lay(vec![(lo, hi)], Vec::new())
    }

    fn lay(&self, left_intervals: Vec<(f64, f64)>, right_intervals: Vec<(f64, f64)>) -> Domain {
        let nodes = |iv: &[(f64, f64)]| {
            let (mut xs, mut ws) = (Vec::new(), Vec::new());
            for (lo, hi) in iv {
                self.rule.lay(*lo, *hi, self.outer_width, &mut xs, &mut ws);
            }
            xs.into_iter().zip(ws).collect::<Vec<_>>()
        };
        Domain {
            left: nodes(&left_intervals),
            right: nodes(&right_intervals),
            left_intervals,
            right_intervals,
        }
    }

    /// Evaluate the scattered fields on `domain` plus the barrier nodes.
    pub(crate) fn snapshot_on(&self, domain: &Domain, t: f64, want: Want) -> Snapshot {
        let nk = self.profile.len();
        let alpha = self.phases(t);
        let ks = &self.profile.ks;
        let am = |f: &dyn Fn(usize) -> Complex64| (0..nk).map(|j| alpha[j] * f(j)).collect::<Vec<_>>();
        let inc = alpha.clone();
        let refl = am(&|j| self.b_refl[j]);
        let tr_in = am(&|j| self.triples[j].amplitudes.a_tr_in);
        let out = am(&|j| self.out[j]);
        let af = am(&|j| self.triples[j].amplitudes.a_full);
        let bf = am(&|j| self.triples[j].amplitudes.b_full);
        let atr = am(&|j| self.triples[j].amplitudes.a_tr);
        let i = Complex64::new(0.0, 1.0);

        let left = parallel::map(&domain.left, |&(x, _)| {
            let (mut sa, mut sb, mut st) = (Complex64::default(), Complex64::default(), Complex64::default());
            let (mut ska, mut skb, mut skt) = (Complex64::default(), Complex64::default(), Complex64::default());
            let rho = Complex64::from_polar(1.0, (ks[1] - ks[0]) * x);
            let mut p = Complex64::new(1.0, 0.0);
            for j in 0..nk {
                if j % ANCHOR == 0 {
                    p = Complex64::from_polar(1.0, ks[j] * x);
                }
                let pc = p.conj();
                let (ta, tb, tt) = (inc[j] * p, refl[j] * pc, tr_in[j] * p);
                sa += ta;
                sb += tb;
                st += tt;
                if want.slopes {
                    ska += ta * ks[j];
                    skb += tb * ks[j];
                    skt += tt * ks[j];
                }
                p *= rho;
            }
            let psi = Fields {
                full: sa + sb,
                tr: st,
                refl: sa + sb - st,
            };
            let slope = Fields {
                full: i * (ska - skb),
                tr: i * skt,
                refl: i * (ska - skb - skt),
            };
            (psi, slope)
        });
        let right = parallel::map(&domain.right, |&(x, _)| {
            let (mut s, mut sk) = (Complex64::default(), Complex64::default());
            let rho = Complex64::from_polar(1.0, (ks[1] - ks[0]) * x);
            let mut p = Complex64::new(1.0, 0.0);
            for j in 0..nk {
                if j % ANCHOR == 0 {
                    p = Complex64::from_polar(1.0, ks[j] * x);
                }
                let term = out[j] * p;
                s += term;
                if want.slopes {
                    sk += term * ks[j];
                }
                p *= rho;
            }
            let z = Complex64::default();
            (
                Fields { full: s, tr: s, refl: z },
                Fields {
                    full: i * sk,
                    tr: i * sk,
                    refl: z,
                },
            )
        });
        let inner = parallel::map_range(self.nodes.len(), |n| {
            let node = &self.nodes[n];
            let row = &self.cache[n * nk..(n + 1) * nk];
            let (mut fu, mut fv, mut tu) = (Complex64::default(), Complex64::default(), Complex64::default());
            let (mut dfu, mut dfv, mut dtu) = (Complex64::default(), Complex64::default(), Complex64::default());
            let left_half = node.region == Region::InnerLeft;
            for j in 0..nk {
                let [u, du, v, dv] = row[j];
                fu += af[j] * u;
                fv += bf[j] * v;
                if left_half {
                    tu += atr[j] * u;
                }
                if want.slopes {
                    dfu += af[j] * du;
                    dfv += bf[j] * dv;
                    if left_half {
                        dtu += atr[j] * du;
                    }
                }
            }
            let full = fu + fv;
            let dfull = dfu + dfv;
            if left_half {
                let tr = tu + fv;
                let dtr = dtu + dfv;
                (
                    Fields {
                        full,
                        tr,
                        refl: full - tr,
                    },
                    Fields {
                        full: dfull,
                        tr: dtr,
                        refl: dfull - dtr,
                    },
                )
            } else {
                let z = Complex64::default();
                (
                    Fields { full, tr: full, refl: z },
                    Fields {
                        full: dfull,
                        tr: dfull,
                        refl: z,
                    },
                )
            }
        });

        let n_total = left.len() + inner.len() + right.len();
        let mut snap = Snapshot {
            xs: Vec::with_capacity(n_total),
            ws: Vec::with_capacity(n_total),
            psi: Vec::with_capacity(n_total),
            slope: Vec::with_capacity(n_total),
        };
        let mut push = |x: f64, w: f64, (p, s): (Fields<Complex64>, Fields<Complex64>)| {
            snap.xs.push(x);
            snap.ws.push(w);
            snap.psi.push(p);
            snap.slope.push(if want.slopes { s } else { zero() });
        };
        for (&(x, w), v) in domain.left.iter().zip(left) {
            push(x, w, v);
        }
        for (node, v) in self.nodes.iter().zip(inner) {
            push(node.x, node.w, v);
        }
        for (&(x, w), v) in domain.right.iter().zip(right) {
            push(x, w, v);
        }
        snap
    }

    /// Free packet on `domain.left` (values in `full`, slopes likewise).
    pub(crate) fn free_snapshot_on(&self, domain: &Domain, t: f64, want: Want) -> Snapshot {
        let nk = self.profile.len();
        let alpha = self.phases(t);
        let ks = &self.profile.ks;
        let i = Complex64::new(0.0, 1.0);
        let vals = parallel::map(&domain.left, |&(x, _)| {
            let (mut s, mut sk) = (Complex64::default(), Complex64::default());
            let rho = Complex64::from_polar(1.0, (ks[1] - ks[0]) * x);
            let mut p = Complex64::new(1.0, 0.0);
            for j in 0..nk {
                if j % ANCHOR == 0 {
                    p = Complex64::from_polar(1.0, ks[j] * x);
                }
                let term = alpha[j] * p;
                s += term;
                if want.slopes {
                    sk += term * ks[j];
                }
                p *= rho;
            }
            (s, i * sk)
        });
        let z = Complex64::default();
        Snapshot {
            xs: domain.left.iter().map(|p| p.0).collect(),
            ws: domain.left.iter().map(|p| p.1).collect(),
            psi: vals.iter().map(|v| Fields { full: v.0, tr: z, refl: z }).collect(),
            slope: vals.iter().map(|v| Fields { full: v.1, tr: z, refl: z }).collect(),
        }
    }

    fn domain_for(&self, free: bool, t: f64, scale: f64) -> Domain {
        if free {
            self.free_domain(t, scale)
        } else {
            self.domain(t, scale)
        }
    }

    fn snapshot_for(&self, free: bool, domain: &Domain, t: f64, want: Want) -> Snapshot {
        if free {
            self.free_snapshot_on(domain, t, want)
        } else {
            self.snapshot_on(domain, t, want)
        }
    }

    pub(crate) fn inner_edges(&self, free: bool) -> (f64, f64) {
        if free {
            (f64::INFINITY, f64::NEG_INFINITY)
        } else {
            (self.barrier.a(), self.barrier.b())
        }
    }

    /// Largest density at the outer ends of `domain`, evaluated at those
    /// points only.
    pub(crate) fn edge_density(&self, free: bool, domain: &Domain, t: f64) -> f64 {
        let probe = edge_points(domain, self.inner_edges(free));
        let snap = self.snapshot_for(free, &probe, t, Want { slopes: false });
        let n = snap.psi.len();
        snap.psi[..probe.left.len()]
            .iter()
            .chain(&snap.psi[n - probe.right.len()..])
            .map(density)
            .fold(0.0, f64::max)
    }

    /// Widen the scale-1 domain by factors of 1.5 until `edge(domain)` is at
    /// most BOUNDARY_RATIO of `peak`.
    pub(crate) fn widen(
        &self,
        free: bool,
        t: f64,
        peak: f64,
        edge: impl Fn(&Domain) -> f64,
    ) -> Result<Domain> {
        let mut scale = 1.0;
        let mut ratio = f64::INFINITY;
        for _ in 0..MAX_WIDENINGS {
            scale *= 1.5;
            let d = self.domain_for(free, t, scale);
            ratio = edge(&d) / peak;
            if ratio <= BOUNDARY_RATIO {
                return Ok(d);
            }
        }
        let d = self.domain_for(free, t, scale * 1.5);
        let all: Vec<f64> = d
            .left_intervals
            .iter()
            .chain(&d.right_intervals)
            .flat_map(|(lo, hi)| [*lo, *hi])
            .collect();
        Err(Error::DomainTruncated {
            t,
            ratio,
            suggested_lo: all.iter().copied().fold(f64::INFINITY, f64::min),
            suggested_hi: all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Snapshot on a domain widened until the outer edges carry negligible density.
    pub(crate) fn snapshot(&self, field: FieldKind, t: f64, want: Want) -> Result<Snapshot> {
        let free = field == FieldKind::Free;
        let first = self.domain_for(free, t, 1.0);
        let snap = self.snapshot_for(free, &first, t, want);
        let peak = snap.psi.iter().map(density).fold(0.0, f64::max);
        if peak == 0.0 || edge_ratio(&first, &snap, self.inner_edges(free)) <= BOUNDARY_RATIO {
            return Ok(snap);
        }
        let domain = self.widen(free, t, peak, |d| self.edge_density(free, d, t))?;
        Ok(self.snapshot_for(free, &domain, t, want))
    }
}

/// The interval ends of `domain` that must carry negligible density, as a
/// node-only domain with zero weights.
fn edge_points(domain: &Domain, inner: (f64, f64)) -> Domain {
    let mut left = Vec::new();
    for &(lo, hi) in &domain.left_intervals {
        left.push((lo, 0.0));
        if hi < inner.0 {
            left.push((hi, 0.0));
        }
    }
    let mut right = Vec::new();
    for &(lo, hi) in &domain.right_intervals {
        if lo > inner.1 {
            right.push((lo, 0.0));
        }
        right.push((hi, 0.0));
    }
    Domain {
        left,
        right,
        left_intervals: Vec::new(),
        right_intervals: Vec::new(),
    }
}

pub(crate) fn density(f: &Fields<Complex64>) -> f64 {
    f.full.norm_sqr() + f.tr.norm_sqr() + f.refl.norm_sqr()
}

/// Largest density at an outer interval end relative to the peak density.
/// Interval ends at or beyond `inner` (a, b) are skipped since the field
/// continues into the barrier there.
pub(crate) fn edge_ratio(domain: &Domain, snap: &Snapshot, inner: (f64, f64)) -> f64 {
    let peak = snap.psi.iter().map(density).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    let mut check = |idx: usize| worst = worst.max(density(&snap.psi[idx]) / peak);
    let mut offset = 0;
    for (_, hi) in &domain.left_intervals {
        let count = domain.left[offset..].iter().take_while(|(x, _)| x <= hi).count();
        if count > 0 {
            check(offset);
            if *hi < inner.0 {
                check(offset + count - 1);
            }
        }
        offset += count;
    }
    let base = snap.xs.len() - domain.right.len();
    let mut offset = 0;
    for (lo, hi) in &domain.right_intervals {
        let count = domain.right[offset..].iter().take_while(|(x, _)| x <= hi).count();
        if count > 0 {
            if *lo > inner.1 {
                check(base + offset);
            }
            check(base + offset + count - 1);
        }
        offset += count;
    }
    worst
}
