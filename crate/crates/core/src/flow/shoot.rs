//! Geodesic distance by shooting.
//!
//! [`shoot_distance`] fans out directions from `a`, brackets sign changes of
//! the signed miss distance at closest approach to `b` and bisects them.
//! [`local_geodesic`] solves the short-range two-point problem by Newton
//! iteration on direction and length.

use std::f64::consts::TAU;

use super::integrator::{propagate, trace_geodesic, IntegratorOptions, TraceSample};
use super::{FlowState, SpherePoint, Vec3};
use crate::error::{Result, ZollError};
use crate::metric::{conformal_bounds, MetricOfRevolution};

#[derive(Clone, Copy, Debug)]
pub struct ShootOptions {
    pub fan: usize,
    pub max_fan: usize,
    /// Chordal miss below which a shot counts as connecting.
    pub connect_tol: f64,
    /// Trace length per shot; `None` uses `2π sqrt(C₂)`.
    pub max_length: Option<f64>,
    pub integrator: IntegratorOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            fan: 48,
            max_fan: 768,
            connect_tol: 1e-9,
            max_length: None,
            integrator: IntegratorOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Shot {
    /// Signed chordal distance to the target at closest approach.
    miss: f64,
    /// Arclength of closest approach.
    length: f64,
}

/// Minimal connecting geodesic length from `a` to `b` found by the fan search.
pub fn shoot_distance(
    metric: &MetricOfRevolution,
    a: SpherePoint,
    b: SpherePoint,
    opts: &ShootOptions,
) -> Result<f64> {
    if (a.0 - b.0).norm() < 1e-14 {
        return Ok(0.0);
    }
    let max_len = opts
        .max_length
        .unwrap_or_else(|| TAU * conformal_bounds(metric).1.sqrt().max(1.0));
    let (e1, e2) = tangent_basis(a.0);
    let shot = |psi: f64| -> Result<Shot> {
        let dir = e1 * psi.cos() + e2 * psi.sin();
        let start = FlowState::from_direction(metric, a, dir);
        fire(metric, &start, b.0, max_len, &opts.integrator)
    };

    let mut n = opts.fan.max(4);
    loop {
        let psis: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let shots: Vec<Shot> = psis.iter().map(|&p| shot(p)).collect::<Result<_>>()?;
        let mut best = f64::INFINITY;
        for k in 0..n {
            let (s0, s1) = (shots[k], shots[(k + 1) % n]);
            if s0.miss.abs() < opts.connect_tol {
                best = best.min(s0.length);
                continue;
            }
            if s0.miss * s1.miss >= 0.0 || s1.miss.abs() < opts.connect_tol {
                continue;
            }
            let (mut lo, mut hi) = (psis[k], if k + 1 == n { TAU } else { psis[k + 1] });
            let mut f_lo = s0.miss;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let sm = shot(mid)?;
                if sm.miss.abs() < opts.connect_tol {
                    best = best.min(sm.length);
                    break;
                }
                if sm.miss * f_lo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = sm.miss;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
        }
        if best.is_finite() {
            return Ok(best);
        }
        if n >= opts.max_fan {
            return Err(ZollError::NoConnectionFound { directions: n });
        }
        n *= 2;
    }
}

fn tangent_basis(x: Vec3) -> (Vec3, Vec3) {
    let helper = if x.z.abs() < 0.9 {
        Vec3::z()
    } else {
        Vec3::x()
    };
    let e1 = (helper - x * x.dot(&helper)).normalize();
    (e1, x.cross(&e1))
}

/// Traces from `start` and locates the closest approach to `target`.
fn fire(
    metric: &MetricOfRevolution,
    start: &FlowState,
    target: Vec3,
    max_len: f64,
    integ: &IntegratorOptions,
) -> Result<Shot> {
    let tr = trace_geodesic(metric, start, max_len, integ)?;
    let samples = &tr.samples;
    let (k, _) = samples
        .iter()
        .enumerate()
        .skip(1)
        .fold((1, f64::INFINITY), |acc, (i, t)| {
            let d = (t.state.x - target).norm_squared();
            if d < acc.1 {
                (i, d)
            } else {
                acc
            }
        });
    let lo = samples[k - 1];
    let hi = samples[(k + 1).min(samples.len() - 1)];
    let (s, st) = closest_approach(metric, &lo, hi.s, target, integ)?;
    let chord = (st.x - target).norm();
    let side = st.x.cross(&st.v).dot(&target);
    Ok(Shot {
        miss: if side < 0.0 { -chord } else { chord },
        length: s,
    })
}

/// Root of `d/ds ½|x(s) - target|² = v·(x - target)` on `[lo.s, hi_s]`
/// (Illinois regula falsi), or the better endpoint if there is no sign change.
fn closest_approach(
    metric: &MetricOfRevolution,
    lo: &TraceSample,
    hi_s: f64,
    target: Vec3,
    integ: &IntegratorOptions,
) -> Result<(f64, FlowState)> {
    let at = |s: f64| -> Result<FlowState> { propagate(metric, &lo.state, s - lo.s, integ) };
    let slope = |st: &FlowState| st.v.dot(&(st.x - target));
    let (mut a, mut b) = (lo.s, hi_s);
    let mut sa = lo.state;
    let mut sb = at(b)?;
    let (mut fa, mut fb) = (slope(&sa), slope(&sb));
    if fa * fb > 0.0 {
        let da = (sa.x - target).norm();
        let db = (sb.x - target).norm();
        return Ok(if da <= db { (a, sa) } else { (b, sb) });
    }
    let mut side = 0i8;
    for _ in 0..100 {
        if fa == 0.0 {
            return Ok((a, sa));
        }
        if fb == 0.0 {
            return Ok((b, sb));
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let sc = at(c)?;
        let fc = slope(&sc);
        if (b - a).abs() < 1e-13 || fc == 0.0 {
            return Ok((c, sc));
        }
        if fc * fb < 0.0 {
            a = b;
            sa = sb;
            fa = fb;
            b = c;
            sb = sc;
            fb = fc;
            side = 0;
        } else {
            b = c;
            sb = sc;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < 1e-13 {
            return Ok((b, sb));
        }
    }
    Ok((b, sb))
}

/// Solution of the short two-point problem.
#[derive(Clone, Copy, Debug)]
pub struct LocalGeodesic {
    /// Unit-speed initial state at the first endpoint.
    pub initial: FlowState,
    pub length: f64,
}

impl LocalGeodesic {
    /// Point at g-arclength `fraction * length`.
    pub fn point_at(
        &self,
        metric: &MetricOfRevolution,
        fraction: f64,
        integ: &IntegratorOptions,
    ) -> Result<SpherePoint> {
        Ok(SpherePoint(
            propagate(metric, &self.initial, fraction * self.length, integ)?.x,
        ))
    }
}

/// Newton iteration on `(direction, length)` so that the geodesic from `a`
/// lands on `b`. Intended for points well inside the injectivity radius.
pub fn local_geodesic(
    metric: &MetricOfRevolution,
    a: SpherePoint,
    b: SpherePoint,
    integ: &IntegratorOptions,
) -> Result<LocalGeodesic> {
    let (e1, e2) = tangent_basis(a.0);
    let (f1, f2) = tangent_basis(b.0);
    if (a.0 - b.0).norm() < 1e-14 {
        return Ok(LocalGeodesic {
            initial: FlowState::from_direction(metric, a, e1),
            length: 0.0,
        });
    }
    // great-arc direction and g-length as the initial guess
    let chord_dir = b.0 - a.0 * a.0.dot(&b.0);
    let mut psi = chord_dir.dot(&e2).atan2(chord_dir.dot(&e1));
    let start_guess = FlowState::from_direction(metric, a, chord_dir);
    let angle = a.0.dot(&b.0).clamp(-1.0, 1.0).acos();
    let g0_speed = start_guess.v.norm();
    let mut len = angle / g0_speed.max(1e-300);

    let residual = |psi: f64, len: f64| -> Result<(FlowState, [f64; 2])> {
        let st = FlowState::from_direction(metric, a, e1 * psi.cos() + e2 * psi.sin());
        let end = propagate(metric, &st, len, integ)?;
        let d = end.x - b.0;
        Ok((st, [d.dot(&f1), d.dot(&f2)]))
    };
    let scale = len.max(1e-12);
    for _ in 0..30 {
        let (st, r) = residual(psi, len)?;
        let rn = r[0].hypot(r[1]);
        if rn < 1e-13 * scale.max(1.0) || rn < 1e-15 {
            return Ok(LocalGeodesic {
                initial: st,
                length: len,
            });
        }
        let dp = 1e-7;
        let dl = 1e-7 * scale;
        let (_, rp) = residual(psi + dp, len)?;
        let (_, rl) = residual(psi, len + dl)?;
        let j = [
            [(rp[0] - r[0]) / dp, (rl[0] - r[0]) / dl],
            [(rp[1] - r[1]) / dp, (rl[1] - r[1]) / dl],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let d_psi = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let d_len = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        psi -= d_psi;
        len -= d_len;
        if len <= 0.0 {
            break;
        }
    }
    Err(ZollError::NoConnectionFound { directions: 0 })
}
