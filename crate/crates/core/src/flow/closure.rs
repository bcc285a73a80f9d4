//! Closure certificates: return residual at length 2π, the residual-minimizing
//! length in a window around 2π, and a self-intersection test.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

use super::integrator::{propagate, trace_geodesic, IntegratorOptions, TraceSample};
use super::{FlowState, PhasePoint, Vec3};
use crate::error::Result;
use crate::metric::MetricOfRevolution;

/// Initial condition parameters in `(cos θ₀, φ₀, direction)` form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StartCondition {
    pub index: usize,
    pub cos_theta: f64,
    pub phi: f64,
    /// Angle from `∂_θ` towards `∂_φ` in a g-orthonormal frame.
    pub direction: f64,
}

impl StartCondition {
    pub fn theta(&self) -> f64 {
        self.cos_theta.acos()
    }

    pub fn state(&self, metric: &MetricOfRevolution) -> FlowState {
        FlowState::from_angles(metric, self.theta(), self.phi, self.direction)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureOptions {
    /// Half-width of the length window scanned for the best return.
    pub window: f64,
    /// Segments closer than this in (cyclic) arclength are never tested
    /// against each other for intersection.
    pub neighbor_exclusion: f64,
    pub integrator: IntegratorOptions,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            window: 0.2,
            neighbor_exclusion: 0.1,
            integrator: IntegratorOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureCertificate {
    pub start: StartCondition,
    pub initial: PhasePoint,
    /// Length in `[2π - w, 2π + w]` minimizing the phase-space return distance.
    pub closure_length: f64,
    /// Phase-space distance between the state at length 2π and the start.
    pub residual: f64,
    pub simple: bool,
    pub clairaut_drift: f64,
}

/// Chordal position distance plus momentum distance in a g₀-orthonormal frame.
pub fn phase_distance(metric: &MetricOfRevolution, a: &FlowState, b: &FlowState) -> f64 {
    (a.x - b.x).norm() + (a.momentum_sharp(metric) - b.momentum_sharp(metric)).norm()
}

pub fn closure_certificate(
    metric: &MetricOfRevolution,
    start: &StartCondition,
    opts: &ClosureOptions,
) -> Result<ClosureCertificate> {
    let mut s0 = start.state(metric);
    s0.normalize(metric);
    let main = trace_geodesic(metric, &s0, TAU, &opts.integrator)?;
    let end = *main.end();
    let residual = phase_distance(metric, &end, &s0);

    let tail = trace_geodesic(metric, &end, opts.window, &opts.integrator)?;
    let mut window: Vec<TraceSample> = main
        .samples
        .iter()
        .filter(|t| t.s >= TAU - opts.window)
        .copied()
        .collect();
    window.extend(tail.samples.iter().skip(1).map(|t| TraceSample {
        s: TAU + t.s,
        state: t.state,
    }));
    let closure_length = best_return(metric, &s0, &window, &opts.integrator)?;

    let positions: Vec<Vec3> = main.samples.iter().map(|t| t.state.x).collect();
    let arclengths: Vec<f64> = main.samples.iter().map(|t| t.s).collect();
    let simple = !self_intersects(&positions, &arclengths, TAU, opts.neighbor_exclusion);

    Ok(ClosureCertificate {
        start: *start,
        initial: s0.to_phase(metric),
        closure_length,
        residual,
        simple,
        clairaut_drift: main.clairaut_drift.max(
            tail.samples
                .iter()
                .map(|t| (t.state.clairaut(metric) - s0.clairaut(metric)).abs())
                .fold(0.0, f64::max),
        ),
    })
}

/// Golden-section refinement of the return distance around the best window sample.
fn best_return(
    metric: &MetricOfRevolution,
    s0: &FlowState,
    window: &[TraceSample],
    integ: &IntegratorOptions,
) -> Result<f64> {
    let dist: Vec<f64> = window
        .iter()
        .map(|t| phase_distance(metric, &t.state, s0))
        .collect();
    let (k, _) =
        dist.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, &d)| if d < acc.1 { (i, d) } else { acc },
        );
    let base = window[k.saturating_sub(1)];
    let lo = base.s;
    let hi = window[(k + 1).min(window.len() - 1)].s;
    if hi <= lo {
        return Ok(window[k].s);
    }
    let eval = |s: f64| -> Result<f64> {
        let st = propagate(metric, &base.state, s - base.s, integ)?;
        Ok(phase_distance(metric, &st, s0))
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > 1e-12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
    }
    let mid = 0.5 * (a + b);
    // keep the sample if it beats the bracket interior
    if dist[k] < eval(mid)? {
        Ok(window[k].s)
    } else {
        Ok(mid)
    }
}

/// Whether the closed polygon through `points` (on the unit sphere, with
/// arclength parameters `s` over a loop of length `period`) crosses itself.
/// Segment pairs within `exclusion` of each other in cyclic arclength are
/// skipped. Candidate pairs come from a uniform grid over bounding boxes.
pub fn self_intersects(points: &[Vec3], s: &[f64], period: f64, exclusion: f64) -> bool {
    let n = points.len();
    if n < 4 {
        return false;
    }
    let segs = n - 1;
    let max_chord = (0..segs)
        .map(|i| (points[i + 1] - points[i]).norm())
        .fold(0.0, f64::max);
    let cell = (2.0 * max_chord).max(0.05);
    let key = |p: f64| (p / cell).floor() as i64;
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..segs {
        let (a, b) = (points[i], points[i + 1]);
        let lo = a.inf(&b).add_scalar(-1e-9);
        let hi = a.sup(&b).add_scalar(1e-9);
        for cx in key(lo.x)..=key(hi.x) {
            for cy in key(lo.y)..=key(hi.y) {
                for cz in key(lo.z)..=key(hi.z) {
                    grid.entry((cx, cy, cz)).or_default().push(i);
                }
            }
        }
    }
    let cyclic_gap = |i: usize, j: usize| {
        let d = (s[i] - s[j]).abs() % period;
        d.min(period - d)
    };
    let mut keys: Vec<_> = grid.keys().copied().collect();
    keys.sort_unstable();
    for k in keys {
        let bucket = &grid[&k];
        for (ii, &i) in bucket.iter().enumerate() {
            for &j in &bucket[ii + 1..] {
                // a segment spans [s_i, s_{i+1}]; compare nearest ends
                let gap = cyclic_gap(i, j)
                    .min(cyclic_gap(i + 1, j))
                    .min(cyclic_gap(i, j + 1))
                    .min(cyclic_gap(i + 1, j + 1));
                if gap < exclusion {
                    continue;
                }
                if arcs_cross(points[i], points[i + 1], points[j], points[j + 1]) {
                    return true;
                }
            }
        }
    }
    false
}

/// Proper crossing of two short great-circle arcs.
fn arcs_cross(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> bool {
    let n1 = a.cross(&b);
    let n2 = c.cross(&d);
    let s1 = n1.dot(&c);
    let s2 = n1.dot(&d);
    let s3 = n2.dot(&a);
    let s4 = n2.dot(&b);
    s1 * s2 < 0.0 && s3 * s4 < 0.0 && (a + b).dot(&(c + d)) > 0.0
}

/// Certificates for `n_starts` low-discrepancy starts, in start order.
pub fn length_spectrum_sample(
    metric: &MetricOfRevolution,
    n_starts: usize,
    seed: u64,
    opts: &ClosureOptions,
) -> Result<Vec<ClosureCertificate>> {
    let starts = super::low_discrepancy_starts(n_starts, seed);
    starts
        .par_iter()
        .map(|st| closure_certificate(metric, st, opts))
        .collect()
}
