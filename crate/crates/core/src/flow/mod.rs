//! Geodesic flow on the unit cotangent bundle of a metric of revolution.
//!
//! States are carried in the ambient form: a point `x` on the coordinate unit
//! sphere and a tangent velocity `v` of unit g-length. [`PhasePoint`] is the
//! chart view `(θ, φ, p_θ, p_φ)` and is converted at the boundary.

mod closure;
mod integrator;
mod sampling;
mod shoot;

pub use closure::{
    closure_certificate, length_spectrum_sample, phase_distance, self_intersects,
    ClosureCertificate, ClosureOptions, StartCondition,
};
pub use integrator::{
    geodesic_step, propagate, trace_geodesic, GeodesicTrace, IntegratorOptions, StepControl,
    TraceSample,
};
pub use sampling::low_discrepancy_starts;
pub use shoot::{local_geodesic, shoot_distance, LocalGeodesic, ShootOptions};

use nalgebra::Vector3;

use crate::error::{Result, ZollError};
use crate::metric::{MetricOfRevolution, POLE_GUARD};

pub type Vec3 = Vector3<f64>;

/// A point of the coordinate sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint(pub Vec3);

impl SpherePoint {
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        SpherePoint(Vec3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ))
    }

    pub fn theta(&self) -> f64 {
        self.0.x.hypot(self.0.y).atan2(self.0.z)
    }

    pub fn phi(&self) -> f64 {
        let p = self.0.y.atan2(self.0.x);
        if p < 0.0 {
            p + std::f64::consts::TAU
        } else {
            p
        }
    }

    /// Orthonormal (for g₀) tangent basis `(e_θ, e_φ)`, extended smoothly-ish
    /// at the poles by picking `φ = 0`.
    pub fn frame(&self) -> (Vec3, Vec3) {
        let (t, p) = (self.theta(), self.phi());
        (
            Vec3::new(t.cos() * p.cos(), t.cos() * p.sin(), -t.sin()),
            Vec3::new(-p.sin(), p.cos(), 0.0),
        )
    }
}

/// Cotangent-bundle state in the `(θ, φ)` chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub theta: f64,
    pub phi: f64,
    pub p_theta: f64,
    /// Clairaut constant.
    pub p_phi: f64,
}

impl PhasePoint {
    /// Unit-speed covector at `(θ, φ)` making angle `direction` with `∂_θ`
    /// (measured in a g-orthonormal frame, towards `∂_φ`).
    pub fn unit(metric: &MetricOfRevolution, theta: f64, phi: f64, direction: f64) -> Self {
        let gtt = metric.g_theta_theta(theta);
        let gpp = metric.g_phi_phi(theta);
        PhasePoint {
            theta,
            phi,
            p_theta: direction.cos() * gtt.sqrt(),
            p_phi: direction.sin() * gpp.sqrt(),
        }
    }

    /// `g^{ij} p_i p_j`.
    pub fn speed2(&self, metric: &MetricOfRevolution) -> f64 {
        self.p_theta * self.p_theta / metric.g_theta_theta(self.theta)
            + self.p_phi * self.p_phi / metric.g_phi_phi(self.theta)
    }

    pub fn in_guard_band(&self) -> bool {
        (POLE_GUARD..=std::f64::consts::PI - POLE_GUARD).contains(&self.theta)
    }
}

/// Ambient state: position on the coordinate sphere and velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowState {
    pub x: Vec3,
    pub v: Vec3,
}

impl FlowState {
    /// Unit-speed state from a g₀ tangent direction `dir` at `point`.
    pub fn from_direction(metric: &MetricOfRevolution, point: SpherePoint, dir: Vec3) -> Self {
        let x = point.0;
        let d = dir - x * x.dot(&dir);
        let mut s = FlowState { x, v: d };
        s.normalize(metric);
        s
    }

    /// Start at `(θ, φ)` heading at angle `direction` from `∂_θ` in a
    /// g-orthonormal frame.
    pub fn from_angles(metric: &MetricOfRevolution, theta: f64, phi: f64, direction: f64) -> Self {
        let p = SpherePoint::from_angles(theta, phi);
        let (e_t, e_p) = p.frame();
        let a = 1.0 + metric.h(theta.cos());
        let lam = metric.scale().sqrt();
        FlowState {
            x: p.0,
            v: e_t * (direction.cos() / (lam * a)) + e_p * (direction.sin() / lam),
        }
    }

    pub fn from_phase(metric: &MetricOfRevolution, p: &PhasePoint) -> Result<Self> {
        if !p.in_guard_band() {
            return Err(ZollError::PoleEvaluation { theta: p.theta });
        }
        let pt = SpherePoint::from_angles(p.theta, p.phi);
        let (e_t, e_p) = pt.frame();
        let theta_dot = p.p_theta / metric.g_theta_theta(p.theta);
        let phi_dot = p.p_phi / metric.g_phi_phi(p.theta);
        Ok(FlowState {
            x: pt.0,
            v: e_t * theta_dot + e_p * (phi_dot * p.theta.sin()),
        })
    }

    pub fn to_phase(&self, metric: &MetricOfRevolution) -> PhasePoint {
        let pt = SpherePoint(self.x);
        let theta = pt.theta();
        let (e_t, _) = pt.frame();
        let (w, _) = metric.ambient_weight(self.x.z);
        let lam = metric.scale();
        PhasePoint {
            theta,
            phi: pt.phi(),
            p_theta: lam * (self.v.dot(&e_t) + w * self.v.z * e_t.z),
            p_phi: self.clairaut(metric),
        }
    }

    /// `p_φ = g(v, ∂_φ)`.
    pub fn clairaut(&self, metric: &MetricOfRevolution) -> f64 {
        metric.scale() * (self.x.x * self.v.y - self.x.y * self.v.x)
    }

    /// The momentum covector as a tangent vector via g₀ duality.
    pub fn momentum_sharp(&self, metric: &MetricOfRevolution) -> Vec3 {
        let (w, _) = metric.ambient_weight(self.x.z);
        let n = Vec3::z() - self.x * self.x.z;
        (self.v + n * (w * self.v.z)) * metric.scale()
    }

    /// `g(v, v)`.
    pub fn speed2(&self, metric: &MetricOfRevolution) -> f64 {
        metric.ambient_norm2(self.x.z, [self.v.x, self.v.y, self.v.z])
    }

    /// Projects onto the unit cosphere bundle: `|x| = 1`, `v ⟂ x`, `g(v,v) = 1`.
    pub fn normalize(&mut self, metric: &MetricOfRevolution) {
        self.x /= self.x.norm();
        self.v -= self.x * self.x.dot(&self.v);
        let s = self.speed2(metric);
        if s > 0.0 {
            self.v /= s.sqrt();
        }
    }

    pub fn reversed(&self) -> Self {
        FlowState {
            x: self.x,
            v: -self.v,
        }
    }

    /// Rotation by `alpha` about the polar axis.
    pub fn rotated(&self, alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        let r = |p: Vec3| Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z);
        FlowState {
            x: r(self.x),
            v: r(self.v),
        }
    }
}

/// Geodesic acceleration for the constrained ambient Lagrangian
/// `L = ½ scale (|v|² + w(z) v_z²)` on `|x| = 1`.
pub(crate) fn acceleration(metric: &MetricOfRevolution, x: &Vec3, v: &Vec3) -> Vec3 {
    let z = x.z;
    let (w, dw) = metric.ambient_weight(z);
    let a = 1.0 + metric.h(z);
    let v2 = v.norm_squared();
    let c = 0.5 * dw * v.z * v.z;
    let coeff = (v2 * w * z - c) / (a * a);
    let n = Vec3::z() - x * z;
    n * coeff - x * v2
}
