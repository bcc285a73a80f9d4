//! Discrete 1-sweepouts of the sphere by closed polygons and a Birkhoff
//! pull-tight, giving an upper-bound-flavored estimate of the first width.
//!
//! Vertices live on the coordinate sphere. During shortening a segment is
//! measured by the g-length of the coordinate great arc between its ends
//! (three-point Gauss–Legendre); the final readout replaces that by the
//! shooting distance. Birkhoff steps move every other vertex to the
//! approximate geodesic midpoint of its neighbors, and only when the local
//! length does not grow, so measured length never increases.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Result, ZollError};
use crate::flow::{acceleration, local_geodesic, IntegratorOptions, SpherePoint, Vec3};
use crate::metric::MetricOfRevolution;

/// Curves shorter than this are points.
pub const COLLAPSE_TOL: f64 = 1e-3;
/// Radius of the balls used by the vertex-concentration check.
pub const BALL_RADIUS: f64 = 0.2;
/// Maximal fraction of vertices allowed in one ball before re-meshing.
pub const BALL_FRACTION: f64 = 0.25;
/// Rounds between concentration checks.
const CONCENTRATION_EVERY: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentModel {
    /// g-length of the coordinate great arc.
    GreatArc,
    /// Shooting distance between the segment ends.
    Shooting,
}

/// Closed polygon on the sphere; vertex 0 follows vertex `n - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    vertices: Vec<Vec3>,
}

impl DiscreteCurve {
    /// Rejects fewer than three vertices and repeated consecutive vertices,
    /// unless every vertex is the same point.
    pub fn new(vertices: Vec<SpherePoint>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(ZollError::InvalidArgument(
                "a discrete curve needs at least 3 vertices".into(),
            ));
        }
        let vertices: Vec<Vec3> = vertices.into_iter().map(|p| p.0.normalize()).collect();
        let n = vertices.len();
        let point = vertices.iter().all(|v| *v == vertices[0]);
        if !point && (0..n).any(|i| vertices[i] == vertices[(i + 1) % n]) {
            return Err(ZollError::InvalidArgument(
                "consecutive duplicate vertices".into(),
            ));
        }
        Ok(DiscreteCurve { vertices })
    }

    /// Latitude circle `θ = theta` with `n` vertices starting at azimuth `phase`.
    pub fn latitude(theta: f64, n: usize, phase: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|k| SpherePoint::from_angles(theta, phase + 2.0 * PI * k as f64 / n as f64))
                .collect(),
        )
    }

    pub fn vertices(&self) -> Vec<SpherePoint> {
        self.vertices.iter().map(|&v| SpherePoint(v)).collect()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn length(&self, metric: &MetricOfRevolution, model: SegmentModel) -> Result<f64> {
        let n = self.vertices.len();
        match model {
            SegmentModel::GreatArc => Ok((0..n)
                .map(|i| great_arc_length(metric, &self.vertices[i], &self.vertices[(i + 1) % n]))
                .sum()),
            SegmentModel::Shooting => {
                let integ = IntegratorOptions::default();
                (0..n)
                    .map(|i| {
                        let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                        if a == b {
                            return Ok(0.0);
                        }
                        local_geodesic(metric, SpherePoint(a), SpherePoint(b), &integ)
                            .map(|g| g.length)
                    })
                    .sum()
            }
        }
    }

    /// Rotation about the polar axis.
    pub fn rotated(&self, alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        DiscreteCurve {
            vertices: self
                .vertices
                .iter()
                .map(|p| Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z))
                .collect(),
        }
    }

    /// `max_i |v_i - m_i| / ℓ_i` where `m_i` is the shooting midpoint of the
    /// neighbors and `ℓ_i` the mean adjacent segment chord.
    pub fn geodesic_residual(&self, metric: &MetricOfRevolution) -> Result<f64> {
        let integ = IntegratorOptions::default();
        let n = self.vertices.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let prev = self.vertices[(i + n - 1) % n];
            let next = self.vertices[(i + 1) % n];
            let seg = 0.5 * ((self.vertices[i] - prev).norm() + (next - self.vertices[i]).norm());
            let lg = local_geodesic(metric, SpherePoint(prev), SpherePoint(next), &integ)?;
            let mid = lg.point_at(metric, 0.5, &integ)?;
            worst = worst.max((mid.0 - self.vertices[i]).norm() / seg);
        }
        Ok(worst)
    }
}

/// g-length of the coordinate great arc from `a` to `b`.
pub(crate) fn great_arc_length(metric: &MetricOfRevolution, a: &Vec3, b: &Vec3) -> f64 {
    let cos = a.dot(b).clamp(-1.0, 1.0);
    let angle = cos.acos();
    if angle == 0.0 {
        return 0.0;
    }
    // unit tangent at a towards b
    let perp = b - a * cos;
    let pn = perp.norm();
    if pn == 0.0 {
        return f64::NAN;
    }
    let t = perp / pn;
    const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut acc = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        let s = 0.5 * angle * (1.0 + x);
        let (sn, cs) = s.sin_cos();
        let p = a * cs + t * sn;
        let dp = (t * cs - a * sn) * angle;
        acc += w * metric.ambient_norm2(p.z, [dp.x, dp.y, dp.z]).sqrt();
    }
    0.5 * acc
}

/// Geodesic midpoint of nearby `a`, `b`, to leading order: the great-arc
/// midpoint corrected by `-E/8`, `E` the difference between the g and g₀
/// geodesic accelerations there.
pub(crate) fn approx_midpoint(metric: &MetricOfRevolution, a: &Vec3, b: &Vec3) -> Vec3 {
    let sum = a + b;
    let sn = sum.norm();
    if sn == 0.0 {
        return *a;
    }
    let m0 = sum / sn;
    let angle = a.dot(b).clamp(-1.0, 1.0).acos();
    let chord = b - a;
    let cn = chord.norm();
    if cn == 0.0 {
        return *a;
    }
    let vel = chord * (angle / cn);
    let extra = acceleration(metric, &m0, &vel) + m0 * vel.norm_squared();
    let m = m0 - extra / 8.0;
    m / m.norm()
}

/// Approximate g-distance for nearby points: chord measured at the midpoint.
fn chord_distance(metric: &MetricOfRevolution, a: &Vec3, b: &Vec3) -> f64 {
    let d = b - a;
    let zm = 0.5 * (a.z + b.z);
    metric.ambient_norm2(zm, [d.x, d.y, d.z]).sqrt()
}

fn curve_length(metric: &MetricOfRevolution, v: &[Vec3]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| great_arc_length(metric, &v[i], &v[(i + 1) % n]))
        .sum()
}

/// True if some ball of radius [`BALL_RADIUS`] centered at a vertex holds
/// more than [`BALL_FRACTION`] of all vertices.
fn concentrated(metric: &MetricOfRevolution, v: &[Vec3]) -> bool {
    let n = v.len();
    let cap = (BALL_FRACTION * n as f64).floor() as usize;
    v.iter().any(|c| {
        v.iter()
            .filter(|p| chord_distance(metric, c, p) < BALL_RADIUS)
            .count()
            > cap
    })
}

/// Redistributes vertices at equal great-arc g-length along the polygon.
fn remesh(metric: &MetricOfRevolution, v: &[Vec3]) -> Vec<Vec3> {
    let n = v.len();
    let seg: Vec<f64> = (0..n)
        .map(|i| great_arc_length(metric, &v[i], &v[(i + 1) % n]))
        .collect();
    let total: f64 = seg.iter().sum();
    if total <= 0.0 {
        return v.to_vec();
    }
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut acc = 0.0;
    for k in 0..n {
        let target = total * k as f64 / n as f64;
        while i < n - 1 && acc + seg[i] < target {
            acc += seg[i];
            i += 1;
        }
        let frac = if seg[i] > 0.0 {
            ((target - acc) / seg[i]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(slerp(&v[i], &v[(i + 1) % n], frac));
    }
    out
}

fn slerp(a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
    let angle = a.dot(b).clamp(-1.0, 1.0).acos();
    if angle < 1e-12 {
        let p = a + (b - a) * t;
        return p / p.norm();
    }
    let s = angle.sin();
    a * (((1.0 - t) * angle).sin() / s) + b * ((t * angle).sin() / s)
}

/// Lengths after each round of a Birkhoff run.
#[derive(Clone, Debug)]
pub struct ShortenHistory {
    pub curve: DiscreteCurve,
    /// `lengths[0]` is the initial length, `lengths[r]` the length after round `r`.
    pub lengths: Vec<f64>,
    /// Round at which the curve fell below [`COLLAPSE_TOL`].
    pub collapsed_at: Option<usize>,
    /// Number of accepted re-meshes.
    pub remeshes: usize,
}

/// Runs up to `rounds` Birkhoff rounds, stopping at collapse.
pub fn birkhoff_history(
    metric: &MetricOfRevolution,
    curve: &DiscreteCurve,
    rounds: usize,
) -> ShortenHistory {
    let mut v = curve.vertices.clone();
    let n = v.len();
    let mut len = curve_length(metric, &v);
    let mut lengths = vec![len];
    let mut remeshes = 0;
    if len < COLLAPSE_TOL {
        return ShortenHistory {
            curve: curve.clone(),
            lengths,
            collapsed_at: Some(0),
            remeshes,
        };
    }
    for round in 1..=rounds {
        // one average segment chord bounds the displacement of any vertex
        let cap = (0..n).map(|i| (v[(i + 1) % n] - v[i]).norm()).sum::<f64>() / n as f64;
        for parity in 0..2 {
            for i in (parity..n).step_by(2) {
                let prev = v[(i + n - 1) % n];
                let next = v[(i + 1) % n];
                let cur = v[i];
                let mut m = approx_midpoint(metric, &prev, &next);
                let shift = m - cur;
                let d = shift.norm();
                if d > cap && d > 0.0 {
                    m = cur + shift * (cap / d);
                    m /= m.norm();
                }
                let old =
                    great_arc_length(metric, &prev, &cur) + great_arc_length(metric, &cur, &next);
                let new = great_arc_length(metric, &prev, &m) + great_arc_length(metric, &m, &next);
                if new <= old && m != prev && m != next {
                    v[i] = m;
                }
            }
        }
        if round % CONCENTRATION_EVERY == 0 && concentrated(metric, &v) {
            let w = remesh(metric, &v);
            if curve_length(metric, &w) <= curve_length(metric, &v) {
                v = w;
                remeshes += 1;
            }
        }
        len = curve_length(metric, &v);
        lengths.push(len);
        if len < COLLAPSE_TOL {
            return ShortenHistory {
                curve: DiscreteCurve { vertices: v },
                lengths,
                collapsed_at: Some(round),
                remeshes,
            };
        }
    }
    ShortenHistory {
        curve: DiscreteCurve { vertices: v },
        lengths,
        collapsed_at: None,
        remeshes,
    }
}

/// Birkhoff curve shortening; `CollapseDetected` when the curve shrinks to a point.
pub fn birkhoff_shorten(
    metric: &MetricOfRevolution,
    curve: &DiscreteCurve,
    rounds: usize,
) -> Result<DiscreteCurve> {
    if rounds == 0 {
        return Err(ZollError::InvalidArgument(
            "rounds must be at least 1".into(),
        ));
    }
    let h = birkhoff_history(metric, curve, rounds);
    match h.collapsed_at {
        Some(r) => Err(ZollError::CollapseDetected {
            length: *h.lengths.last().unwrap(),
            rounds: r,
        }),
        None => Ok(h.curve),
    }
}

/// Discrete family of closed curves indexed by `t_k = k / (T - 1)`.
#[derive(Clone, Debug)]
pub struct SweepoutFamily {
    pub t: Vec<f64>,
    pub curves: Vec<DiscreteCurve>,
    pub lengths: Vec<f64>,
    pub max_length: f64,
    pub argmax: usize,
    pub width_estimate: f64,
}

impl SweepoutFamily {
    fn from_curves(metric: &MetricOfRevolution, t: Vec<f64>, curves: Vec<DiscreteCurve>) -> Self {
        let lengths: Vec<f64> = curves
            .iter()
            .map(|c| curve_length(metric, &c.vertices))
            .collect();
        let (argmax, max_length) = max_with_index(&lengths);
        SweepoutFamily {
            t,
            curves,
            lengths,
            max_length,
            argmax,
            width_estimate: max_length,
        }
    }

    /// `(t, θ, φ)` rows of every vertex, for plotting.
    pub fn plot_rows(&self) -> Vec<(f64, f64, f64)> {
        self.t
            .iter()
            .zip(&self.curves)
            .flat_map(|(&t, c)| {
                c.vertices()
                    .into_iter()
                    .map(move |p| (t, p.theta(), p.phi()))
            })
            .collect()
    }
}

fn max_with_index(v: &[f64]) -> (usize, f64) {
    v.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
    )
}

/// Latitude circles `θ = t π`; the end curves are the poles.
pub fn initial_sweepout(
    metric: &MetricOfRevolution,
    t_count: usize,
    n_vertices: usize,
) -> Result<SweepoutFamily> {
    initial_sweepout_rotated(metric, t_count, n_vertices, 0.0)
}

pub fn initial_sweepout_rotated(
    metric: &MetricOfRevolution,
    t_count: usize,
    n_vertices: usize,
    phase: f64,
) -> Result<SweepoutFamily> {
    if t_count < 3 {
        return Err(ZollError::InvalidArgument("T must be at least 3".into()));
    }
    if n_vertices < 8 {
        return Err(ZollError::InvalidArgument(
            "n_vertices must be at least 8".into(),
        ));
    }
    let t: Vec<f64> = (0..t_count)
        .map(|k| k as f64 / (t_count - 1) as f64)
        .collect();
    let curves = t
        .iter()
        .map(|&tk| {
            if tk == 0.0 || tk == 1.0 {
                let pole = SpherePoint::from_angles(tk * PI, 0.0);
                DiscreteCurve::new(vec![pole; n_vertices])
            } else {
                DiscreteCurve::latitude(tk * PI, n_vertices, phase)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepoutFamily::from_curves(metric, t, curves))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinmaxParams {
    pub t_count: usize,
    pub n_vertices: usize,
    pub rounds: usize,
    /// Azimuthal rotation of the initial family.
    pub phase: f64,
}

impl Default for MinmaxParams {
    fn default() -> Self {
        MinmaxParams {
            t_count: 65,
            n_vertices: 256,
            rounds: 200,
            phase: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunLogRow {
    pub round: usize,
    pub max_length: f64,
    pub argmax_t: f64,
    pub collapse_count: usize,
}

#[derive(Clone, Debug)]
pub struct MinmaxOutcome {
    /// Max over the pulled-tight family of shooting-measured lengths.
    pub estimate: f64,
    /// Same maximum under the great-arc model.
    pub coarse_estimate: f64,
    pub family: SweepoutFamily,
    pub log: Vec<RunLogRow>,
    /// Whether every curve's length was nonincreasing over all rounds.
    pub monotone: bool,
    pub histories: Vec<Vec<f64>>,
}

/// Pulls the latitude sweepout tight with Birkhoff rounds (curves are
/// shortened independently and in parallel) and returns the final max length.
pub fn minmax_estimate(
    metric: &MetricOfRevolution,
    params: &MinmaxParams,
) -> Result<MinmaxOutcome> {
    if params.rounds == 0 {
        return Err(ZollError::InvalidArgument(
            "rounds must be at least 1".into(),
        ));
    }
    let family = initial_sweepout_rotated(metric, params.t_count, params.n_vertices, params.phase)?;
    let runs: Vec<ShortenHistory> = family
        .curves
        .par_iter()
        .map(|c| birkhoff_history(metric, c, params.rounds))
        .collect();

    let log = (0..=params.rounds)
        .map(|r| {
            let at = |h: &ShortenHistory| *h.lengths.get(r).unwrap_or(h.lengths.last().unwrap());
            let lens: Vec<f64> = runs.iter().map(at).collect();
            let (k, max_length) = max_with_index(&lens);
            RunLogRow {
                round: r,
                max_length,
                argmax_t: family.t[k],
                collapse_count: runs
                    .iter()
                    .filter(|h| h.collapsed_at.is_some_and(|c| c <= r))
                    .count(),
            }
        })
        .collect();
    let monotone = runs
        .iter()
        .all(|h| h.lengths.windows(2).all(|w| w[1] <= w[0]));
    let histories = runs.iter().map(|h| h.lengths.clone()).collect();
    let curves: Vec<DiscreteCurve> = runs.into_iter().map(|h| h.curve).collect();
    let tight = SweepoutFamily::from_curves(metric, family.t.clone(), curves);

    let exact: Vec<f64> = tight
        .curves
        .par_iter()
        .zip(&tight.lengths)
        .map(|(c, &coarse)| {
            if coarse < COLLAPSE_TOL {
                Ok(coarse)
            } else {
                c.length(metric, SegmentModel::Shooting)
            }
        })
        .collect::<Result<_>>()?;
    let (argmax, estimate) = max_with_index(&exact);
    let coarse_estimate = tight.max_length;
    let family = SweepoutFamily {
        width_estimate: estimate,
        max_length: estimate,
        argmax,
        lengths: exact,
        ..tight
    };
    Ok(MinmaxOutcome {
        estimate,
        coarse_estimate,
        family,
        log,
        monotone,
        histories,
    })
}
