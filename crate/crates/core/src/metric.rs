//! Rotationally symmetric metrics on the 2-sphere,
//!
//! ```text
//! g = scale * [ (1 + h(cos θ))² dθ² + sin²θ dφ² ],
//! ```
//!
//! built from a profile polynomial `h` with `h(±1) = 0` and `|h| < 1`. When
//! `h` is odd and `scale = 1` every geodesic closes with length 2π.
//!
//! The flow module never works in `(θ, φ)`: with `z = cos θ` the metric is the
//! restriction to the unit sphere of `I + w(z) e_z e_zᵀ`, where
//! `w = h (2 + h) / (1 - z²)` is again a polynomial because `h` vanishes at
//! `z = ±1`. That form has no pole singularity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, ZollError};
use crate::poly::Poly;
use crate::quadrature::GaussLegendre;

/// Pointwise evaluation in `(θ, φ)` is refused within this distance of a pole.
pub const POLE_GUARD: f64 = 1e-6;

/// Default number of θ (or u) samples used by sup/inf searches.
pub const DEFAULT_SAMPLES: usize = 4096;

const ENDPOINT_TOL: f64 = 1e-12;

/// General profile `h(u) = Σ a_k u^k` on `[-1, 1]`.
///
/// Only used directly for non-Zoll control metrics; Zoll metrics come from
/// [`OddProfile`].
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    poly: Poly,
}

impl Profile {
    /// Validates `h(±1) = 0` and `sup |h| < 1`.
    pub fn new(monomial_coeffs: Vec<f64>) -> Result<Self> {
        if monomial_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ZollError::ProfileInvalid("non-finite coefficient".into()));
        }
        let poly = Poly::new(if monomial_coeffs.is_empty() {
            vec![0.0]
        } else {
            monomial_coeffs
        });
        let scale = poly.coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        for end in [1.0, -1.0] {
            let v = poly.eval(end);
            if v.abs() > ENDPOINT_TOL * scale {
                return Err(ZollError::ProfileInvalid(format!(
                    "h({end}) = {v:e}, must vanish for the metric to be smooth at the poles"
                )));
            }
        }
        if !sup_abs_below_one(&poly) {
            return Err(ZollError::ProfileInvalid(
                "sup |h| >= 1 on [-1, 1], metric would degenerate".into(),
            ));
        }
        Ok(Profile { poly })
    }

    pub fn zero() -> Self {
        Profile { poly: Poly::zero() }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.poly.eval(u)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn is_odd(&self) -> bool {
        self.poly
            .coeffs
            .iter()
            .enumerate()
            .all(|(k, &c)| k % 2 == 1 || c == 0.0)
    }
}

/// Checks `sup_{[-1,1]} |p| < 1` by sampling, then bisecting every interval on
/// which the Lipschitz bound cannot rule out `|p| >= 1`.
fn sup_abs_below_one(p: &Poly) -> bool {
    let lip = p.derivative_bound();
    let n = DEFAULT_SAMPLES;
    let step = 2.0 / n as f64;
    let mut stack: Vec<(f64, f64, u32)> = Vec::new();
    for k in 0..n {
        let a = -1.0 + k as f64 * step;
        let b = if k + 1 == n { 1.0 } else { a + step };
        stack.push((a, b, 0));
    }
    while let Some((a, b, depth)) = stack.pop() {
        let m = p.eval(a).abs().max(p.eval(b).abs());
        if m >= 1.0 {
            return false;
        }
        if m + 0.5 * lip * (b - a) < 1.0 {
            continue;
        }
        if depth > 40 {
            return false;
        }
        let mid = 0.5 * (a + b);
        stack.push((a, mid, depth + 1));
        stack.push((mid, b, depth + 1));
    }
    true
}

/// Odd profile `h(u) = Σ c_k u^{2k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddProfile {
    coeffs: Vec<f64>,
}

impl OddProfile {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let p = OddProfile { coeffs };
        Profile::new(p.monomials())?;
        Ok(p)
    }

    /// `h(u) = ε (u - u³)`.
    pub fn cubic(epsilon: f64) -> Result<Self> {
        Self::new(vec![epsilon, -epsilon])
    }

    pub fn zero() -> Self {
        OddProfile { coeffs: vec![] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u2 = u * u;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u2 + c) * u
    }

    /// Expansion in the full monomial basis.
    pub fn monomials(&self) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.coeffs.len()];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[2 * k + 1] = c;
        }
        out
    }
}

impl From<&OddProfile> for Profile {
    fn from(p: &OddProfile) -> Self {
        Profile {
            poly: Poly::new(if p.coeffs.is_empty() {
                vec![0.0]
            } else {
                p.monomials()
            }),
        }
    }
}

/// Metric of revolution `scale * ((1 + h(cos θ))² dθ² + sin²θ dφ²)`.
#[derive(Clone, Debug)]
pub struct MetricOfRevolution {
    profile: Profile,
    scale: f64,
    dh: Poly,
    // ambient weight w(z) = h(2 + h)/(1 - z²) and its derivative
    w: Poly,
    dw: Poly,
}

/// Builds the Zoll metric of revolution for an odd profile.
pub fn make_metric(profile: &OddProfile) -> Result<MetricOfRevolution> {
    MetricOfRevolution::new(Profile::from(profile), 1.0)
}

impl MetricOfRevolution {
    pub fn new(profile: Profile, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ZollError::ProfileInvalid(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let h = profile.poly.clone();
        let (q, rem) = h.div_one_minus_x2();
        let rem_scale = h.coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        if rem[0].abs() > 1e-10 * rem_scale || rem[1].abs() > 1e-10 * rem_scale {
            return Err(ZollError::ProfileInvalid(
                "h is not divisible by 1 - u^2".into(),
            ));
        }
        let w = q.mul(&h.add(&Poly::constant(2.0)));
        let dw = w.derivative();
        let dh = h.derivative();
        Ok(MetricOfRevolution {
            profile,
            scale,
            dh,
            w,
            dw,
        })
    }

    /// The unit round metric.
    pub fn round() -> Self {
        Self::new(Profile::zero(), 1.0).expect("round metric")
    }

    /// `c² g₀`.
    pub fn scaled_round(c_squared: f64) -> Result<Self> {
        Self::new(Profile::zero(), c_squared)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True for odd profiles at unit scale, the family expected to be Zoll.
    pub fn is_zoll_candidate(&self) -> bool {
        self.profile.is_odd() && self.scale == 1.0
    }

    pub fn h(&self, u: f64) -> f64 {
        self.profile.eval(u)
    }

    pub fn dh(&self, u: f64) -> f64 {
        self.dh.eval(u)
    }

    /// `(w(z), w'(z))` for the ambient form of the metric.
    pub fn ambient_weight(&self, z: f64) -> (f64, f64) {
        (self.w.eval(z), self.dw.eval(z))
    }

    pub fn g_theta_theta(&self, theta: f64) -> f64 {
        let a = 1.0 + self.h(theta.cos());
        self.scale * a * a
    }

    pub fn g_phi_phi(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.scale * s * s
    }

    /// Component matrix in the `(θ, φ)` chart.
    pub fn components(&self, theta: f64, _phi: f64) -> [[f64; 2]; 2] {
        [
            [self.g_theta_theta(theta), 0.0],
            [0.0, self.g_phi_phi(theta)],
        ]
    }

    /// Squared g-length of an ambient tangent vector `v` at a point with height `z`.
    pub fn ambient_norm2(&self, z: f64, v: [f64; 3]) -> f64 {
        let (w, _) = self.ambient_weight(z);
        self.scale * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + w * v[2] * v[2])
    }

    /// Gauss curvature at polar angle θ.
    pub fn gauss_curvature(&self, theta: f64) -> Result<f64> {
        if !(POLE_GUARD..=PI - POLE_GUARD).contains(&theta) {
            return Err(ZollError::PoleEvaluation { theta });
        }
        Ok(self.gauss_curvature_u(theta.cos()))
    }

    /// Gauss curvature as a function of `u = cos θ`; regular at the poles.
    ///
    /// `K = (1 + h - u h') / (scale (1 + h)³)`.
    pub fn gauss_curvature_u(&self, u: f64) -> f64 {
        let a = 1.0 + self.h(u);
        (a - u * self.dh(u)) / (self.scale * a * a * a)
    }

    /// `∫ K dA`, by composite Gauss–Legendre quadrature in `u`.
    pub fn total_curvature(&self) -> f64 {
        let gl = GaussLegendre::new(16);
        2.0 * PI
            * gl.integrate_composite(-1.0, 1.0, 64, |u| {
                let a = 1.0 + self.h(u);
                (a - u * self.dh(u)) / (a * a)
            })
    }

    pub fn area(&self) -> f64 {
        let gl = GaussLegendre::new(16);
        2.0 * PI * self.scale * gl.integrate_composite(-1.0, 1.0, 8, |u| 1.0 + self.h(u))
    }

    /// `(K_min, K_max)` over the sphere.
    pub fn curvature_range(&self) -> (f64, f64) {
        let k = |u: f64| self.gauss_curvature_u(u);
        let kmax = maximize(&k, -1.0, 1.0, DEFAULT_SAMPLES);
        let kmin = -maximize(&|u: f64| -k(u), -1.0, 1.0, DEFAULT_SAMPLES);
        (kmin, kmax)
    }

    /// Stable content hash of the metric (profile bits and scale bits).
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"metric-of-revolution/v1;");
        hasher.update(self.scale.to_bits().to_le_bytes());
        for c in &self.profile.poly.coeffs {
            hasher.update(c.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// `||g - g'||_{C⁰(g₀)}`: sup over θ of the operator norm of the component
/// difference in the frame `(e_θ, e_φ / sin θ)`.
pub fn c0_distance(g: &MetricOfRevolution, other: &MetricOfRevolution) -> f64 {
    c0_distance_sampled(g, other, DEFAULT_SAMPLES)
}

pub fn c0_distance_sampled(
    g: &MetricOfRevolution,
    other: &MetricOfRevolution,
    samples: usize,
) -> f64 {
    let phi_phi = (g.scale - other.scale).abs();
    let theta_theta = |t: f64| (g.g_theta_theta(t) - other.g_theta_theta(t)).abs();
    maximize(&theta_theta, 0.0, PI, samples).max(phi_phi)
}

/// Tightest sampled `(C₁, C₂)` with `C₁ g₀ <= g <= C₂ g₀`.
pub fn conformal_bounds(g: &MetricOfRevolution) -> (f64, f64) {
    let gtt = |t: f64| g.g_theta_theta(t);
    let hi = maximize(&gtt, 0.0, PI, DEFAULT_SAMPLES);
    let lo = -maximize(&|t: f64| -gtt(t), 0.0, PI, DEFAULT_SAMPLES);
    (lo.min(g.scale), hi.max(g.scale))
}

/// Grid maximum over `[a, b]` followed by one golden-section refinement on
/// the bracket around the best sample.
pub(crate) fn maximize<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    let step = (b - a) / (n - 1) as f64;
    let (best_k, best) =
        (0..n)
            .map(|k| (k, f(a + k as f64 * step)))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
    let lo = a + best_k.saturating_sub(1) as f64 * step;
    let hi = (a + (best_k + 1) as f64 * step).min(b);
    golden_max(f, lo, hi, 1e-13).max(best)
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f1.max(f2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        best = best.max(f1).max(f2);
    }
    best
}

/// Profile description as read from config files.
///
/// `coeffs` are odd-monomial coefficients (`u, u³, u⁵, ...`) multiplied by
/// `epsilon`. If `coeffs` is empty and `epsilon` is set, the cubic profile
/// `ε (u - u³)` is used. `even_coeffs` (`u⁰, u², u⁴, ...`) add a non-odd part
/// and exist for control runs only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub even_coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl ProfileSpec {
    pub fn cubic(epsilon: f64) -> Self {
        ProfileSpec {
            epsilon: Some(epsilon),
            ..Default::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ZollError::Config(e.to_string()))
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("profile spec serializes")
    }

    /// Effective monomial coefficients of `h`.
    pub fn monomials(&self) -> Vec<f64> {
        let odd: Vec<f64> = match (self.coeffs.is_empty(), self.epsilon) {
            (true, Some(e)) => vec![e, -e],
            (_, e) => self.coeffs.iter().map(|c| c * e.unwrap_or(1.0)).collect(),
        };
        let n = (2 * odd.len()).max(2 * self.even_coeffs.len());
        let mut out = vec![0.0; n.max(1)];
        for (k, &c) in odd.iter().enumerate() {
            out[2 * k + 1] += c;
        }
        for (k, &c) in self.even_coeffs.iter().enumerate() {
            out[2 * k] += c;
        }
        out
    }

    pub fn build(&self) -> Result<MetricOfRevolution> {
        MetricOfRevolution::new(Profile::new(self.monomials())?, self.scale.unwrap_or(1.0))
    }
}

/// How the diameter entry of a [`CurvatureReport`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiameterMethod {
    /// Max of shooting distances over a `grid x grid` set of meridian point pairs.
    ShootingGrid {
        grid: usize,
    },
    Skipped,
}

impl std::fmt::Display for DiameterMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiameterMethod::ShootingGrid { grid } => write!(f, "shooting-grid-{grid}x{grid}"),
            DiameterMethod::Skipped => write!(f, "skipped"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureReport {
    pub k_min: f64,
    pub k_max: f64,
    pub total_curvature: f64,
    pub diameter_estimate: f64,
    pub diameter_method: DiameterMethod,
    pub area: f64,
}

impl CurvatureReport {
    pub const CSV_HEADER: &'static str =
        "k_min,k_max,total_curvature,area,diameter_estimate,diameter_method";

    pub fn csv_row(&self) -> String {
        use crate::report::fmt12;
        format!(
            "{},{},{},{},{},{}",
            fmt12(self.k_min),
            fmt12(self.k_max),
            fmt12(self.total_curvature),
            fmt12(self.area),
            fmt12(self.diameter_estimate),
            self.diameter_method
        )
    }
}

impl std::fmt::Display for CurvatureReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use crate::report::{fmt12, pi_annotation};
        writeln!(
            f,
            "Gauss curvature   K in [{}, {}]",
            fmt12(self.k_min),
            fmt12(self.k_max)
        )?;
        writeln!(
            f,
            "total curvature   {}{}",
            fmt12(self.total_curvature),
            pi_annotation(self.total_curvature)
        )?;
        writeln!(
            f,
            "area              {}{}",
            fmt12(self.area),
            pi_annotation(self.area)
        )?;
        write!(
            f,
            "diameter          {}{} ({})",
            fmt12(self.diameter_estimate),
            pi_annotation(self.diameter_estimate),
            self.diameter_method
        )
    }
}

/// Options for [`curvature_report`].
#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    /// Side of the point-pair grid for the diameter estimate; 0 skips it.
    pub diameter_grid: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { diameter_grid: 3 }
    }
}

pub fn curvature_report(
    metric: &MetricOfRevolution,
    opts: ReportOptions,
) -> Result<CurvatureReport> {
    let (k_min, k_max) = metric.curvature_range();
    let (diameter_estimate, diameter_method) = if opts.diameter_grid == 0 {
        (f64::NAN, DiameterMethod::Skipped)
    } else {
        (
            diameter_estimate(metric, opts.diameter_grid)?,
            DiameterMethod::ShootingGrid {
                grid: opts.diameter_grid,
            },
        )
    };
    Ok(CurvatureReport {
        k_min,
        k_max,
        total_curvature: metric.total_curvature(),
        diameter_estimate,
        diameter_method,
        area: metric.area(),
    })
}

/// Max shooting distance between `(θ_a, 0)` with θ_a in `[0, π/2]` and
/// `(θ_b, π)` with θ_b in `[π/2, π]`, on `grid` equally spaced values each.
/// An estimate: rotational symmetry puts extremal pairs on a meridian circle.
pub fn diameter_estimate(metric: &MetricOfRevolution, grid: usize) -> Result<f64> {
    use crate::flow::{shoot_distance, ShootOptions, SpherePoint};
    use rayon::prelude::*;
    let grid = grid.max(1);
    let theta = |k: usize, lo: f64| {
        if grid == 1 {
            lo + 0.25 * PI
        } else {
            lo + 0.5 * PI * k as f64 / (grid - 1) as f64
        }
    };
    let pairs: Vec<(f64, f64)> = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (i, j)))
        .map(|(i, j)| (theta(i, 0.0), theta(j, 0.5 * PI)))
        .collect();
    let opts = ShootOptions::default();
    let dists: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(ta, tb)| {
            shoot_distance(
                metric,
                SpherePoint::from_angles(ta, 0.0),
                SpherePoint::from_angles(tb, PI),
                &opts,
            )
        })
        .collect();
    let mut best: f64 = 0.0;
    for d in dists {
        best = best.max(d?);
    }
    Ok(best)
}
