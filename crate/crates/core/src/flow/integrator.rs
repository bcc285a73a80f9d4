//! Dormand–Prince 5(4) on the ambient geodesic system with projection onto
//! the unit cosphere after every accepted step.

use super::{acceleration, FlowState, PhasePoint, Vec3};
use crate::error::{Result, ZollError};
use crate::metric::MetricOfRevolution;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    /// Embedded error estimate with the given absolute/relative tolerance.
    Adaptive { tol: f64 },
    /// Fixed step, fifth-order solution.
    Fixed { h: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub control: StepControl,
    /// Upper bound on any single step; also bounds the gap between trace samples.
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Project back onto the unit cosphere after each accepted step.
    pub project: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            control: StepControl::Adaptive { tol: 1e-12 },
            h_max: 0.05,
            h_min: 1e-13,
            max_steps: 2_000_000,
            project: true,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorOptions {
            control: StepControl::Adaptive { tol },
            ..Default::default()
        }
    }

    pub fn fixed(h: f64) -> Self {
        IntegratorOptions {
            control: StepControl::Fixed { h },
            h_max: h,
            ..Default::default()
        }
    }

    fn initial_step(&self) -> f64 {
        match self.control {
            StepControl::Adaptive { tol } => (0.2 * tol.powf(0.2)).min(self.h_max),
            StepControl::Fixed { h } => h,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    /// g-arclength from the start.
    pub s: f64,
    pub state: FlowState,
}

#[derive(Clone, Debug)]
pub struct GeodesicTrace {
    pub samples: Vec<TraceSample>,
    pub total_length: f64,
    /// `max |p_φ(s) - p_φ(0)|`.
    pub clairaut_drift: f64,
}

impl GeodesicTrace {
    pub fn end(&self) -> &FlowState {
        &self.samples.last().expect("trace has samples").state
    }

    pub fn phase_points(&self, metric: &MetricOfRevolution) -> Vec<(f64, PhasePoint)> {
        self.samples
            .iter()
            .map(|t| (t.s, t.state.to_phase(metric)))
            .collect()
    }

    /// `(s, θ, φ)` rows for plotting.
    pub fn plot_rows(&self) -> Vec<(f64, f64, f64)> {
        self.samples
            .iter()
            .map(|t| {
                let p = super::SpherePoint(t.state.x);
                (t.s, p.theta(), p.phi())
            })
            .collect()
    }
}

type Y = [f64; 6];

fn pack(s: &FlowState) -> Y {
    [s.x.x, s.x.y, s.x.z, s.v.x, s.v.y, s.v.z]
}

fn unpack(y: &Y) -> FlowState {
    FlowState {
        x: Vec3::new(y[0], y[1], y[2]),
        v: Vec3::new(y[3], y[4], y[5]),
    }
}

fn rhs(metric: &MetricOfRevolution, y: &Y) -> Y {
    let x = Vec3::new(y[0], y[1], y[2]);
    let v = Vec3::new(y[3], y[4], y[5]);
    let a = acceleration(metric, &x, &v);
    [v.x, v.y, v.z, a.x, a.y, a.z]
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step; returns the new state and the error estimate.
fn dp5_step(metric: &MetricOfRevolution, y: &Y, h: f64) -> (Y, Y) {
    let mut k = [[0.0; 6]; 7];
    k[0] = rhs(metric, y);
    for stage in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..6 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[stage] = rhs(metric, &ys);
    }
    let mut out = *y;
    let mut err = [0.0; 6];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..6 {
            out[i] += h * B[j] * kj[i];
            err[i] += h * E[j] * kj[i];
        }
    }
    (out, err)
}

/// Rotation-invariant scaled error norm (Euclidean norms of the position and
/// velocity blocks).
fn error_norm(y: &Y, err: &Y, tol: f64) -> f64 {
    let n3 = |a: &[f64]| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let ex = n3(&err[0..3]) / (tol + tol * n3(&y[0..3]));
    let ev = n3(&err[3..6]) / (tol + tol * n3(&y[3..6]));
    ex.max(ev)
}

/// Integrates exactly `length` of g-arclength from `start`, calling `visit`
/// after every accepted step with `(s, state)`.
fn integrate<F: FnMut(f64, &FlowState)>(
    metric: &MetricOfRevolution,
    start: &FlowState,
    length: f64,
    opts: &IntegratorOptions,
    mut visit: F,
) -> Result<FlowState> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(ZollError::InvalidArgument(format!(
            "integration length must be nonnegative, got {length}"
        )));
    }
    let mut state = *start;
    state.normalize(metric);
    let mut s = 0.0;
    let mut h = opts.initial_step();
    let mut steps = 0usize;
    while s < length {
        let remaining = length - s;
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };
        let y = pack(&state);
        let (y_new, err) = dp5_step(metric, &y, h_try);
        match opts.control {
            StepControl::Fixed { .. } => {}
            StepControl::Adaptive { tol } => {
                let e = error_norm(&y, &err, tol);
                if !e.is_finite() || e > 1.0 {
                    let factor = if e.is_finite() {
                        (0.9 * e.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
                    h = h_try * factor;
                    if h < opts.h_min {
                        return Err(ZollError::StepUnderflow { s, h });
                    }
                    continue;
                }
                let grow = if e == 0.0 {
                    5.0
                } else {
                    (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    h = (h_try * grow).min(opts.h_max);
                }
            }
        }
        state = unpack(&y_new);
        if opts.project {
            state.normalize(metric);
        }
        s = if last { length } else { s + h_try };
        visit(s, &state);
        steps += 1;
        if steps > opts.max_steps {
            return Err(ZollError::StepUnderflow { s, h });
        }
    }
    Ok(state)
}

/// Advances `start` by g-arclength `length`.
pub fn propagate(
    metric: &MetricOfRevolution,
    start: &FlowState,
    length: f64,
    opts: &IntegratorOptions,
) -> Result<FlowState> {
    integrate(metric, start, length, opts, |_, _| {})
}

/// Integrates `length` and keeps every accepted step as a sample.
pub fn trace_geodesic(
    metric: &MetricOfRevolution,
    start: &FlowState,
    length: f64,
    opts: &IntegratorOptions,
) -> Result<GeodesicTrace> {
    if length <= 0.0 {
        return Err(ZollError::InvalidArgument(format!(
            "trace length must be positive, got {length}"
        )));
    }
    let mut first = *start;
    first.normalize(metric);
    let p0 = first.clairaut(metric);
    let mut samples = vec![TraceSample {
        s: 0.0,
        state: first,
    }];
    let mut drift: f64 = 0.0;
    integrate(metric, &first, length, opts, |s, st| {
        drift = drift.max((st.clairaut(metric) - p0).abs());
        samples.push(TraceSample { s, state: *st });
    })?;
    Ok(GeodesicTrace {
        samples,
        total_length: length,
        clairaut_drift: drift,
    })
}

/// Advances a chart state by `ds` along the flow.
pub fn geodesic_step(
    metric: &MetricOfRevolution,
    state: &PhasePoint,
    ds: f64,
    opts: &IntegratorOptions,
) -> Result<PhasePoint> {
    if ds <= 0.0 {
        return Err(ZollError::InvalidArgument(format!(
            "ds must be positive, got {ds}"
        )));
    }
    let speed = state.speed2(metric);
    if (speed - 1.0).abs() > 1e-6 {
        return Err(ZollError::InvalidArgument(format!(
            "state is not unit speed (g^ij p_i p_j = {speed})"
        )));
    }
    let start = FlowState::from_phase(metric, state)?;
    let end = propagate(metric, &start, ds, opts)?;
    Ok(end.to_phase(metric))
}
