//! Deterministic initial conditions from the additive recurrence
//! `x_n = frac(1/2 + n α)` with `α = (1/ϕ, 1/ϕ², 1/ϕ³)`, ϕ the real root of `x⁴ = x + 1`
//! (the three-dimensional generalized golden ratio).

use std::f64::consts::TAU;

use super::closure::StartCondition;
use crate::metric::POLE_GUARD;

const PHI_3: f64 = 1.220_744_084_605_759_5;

/// `n` starts `(cos θ₀, φ₀, direction)`; the sequence is offset by `seed`.
pub fn low_discrepancy_starts(n: usize, seed: u64) -> Vec<StartCondition> {
    let alpha = [1.0 / PHI_3, 1.0 / PHI_3.powi(2), 1.0 / PHI_3.powi(3)];
    let max_cos = POLE_GUARD.cos();
    (0..n)
        .map(|index| {
            let k = (index as u64).wrapping_add(seed) as f64;
            let r = alpha.map(|a| (0.5 + k * a).fract());
            StartCondition {
                index,
                cos_theta: (2.0 * r[0] - 1.0).clamp(-max_cos, max_cos),
                phi: TAU * r[1],
                direction: TAU * r[2],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_zero_starts_on_a_meridian() {
        let s = &low_discrepancy_starts(1, 0)[0];
        assert_eq!(s.cos_theta, 0.0);
        assert_eq!(s.direction, std::f64::consts::PI);
    }

    #[test]
    fn sequence_is_well_spread() {
        let starts = low_discrepancy_starts(256, 7);
        // every octant of (cos θ, φ, direction) space is hit
        let mut seen = [false; 8];
        for s in &starts {
            let i = (s.cos_theta > 0.0) as usize
                + 2 * (s.phi > std::f64::consts::PI) as usize
                + 4 * (s.direction > std::f64::consts::PI) as usize;
            seen[i] = true;
        }
        assert!(seen.iter().all(|&b| b));
        assert_eq!(starts, low_discrepancy_starts(256, 7));
    }
}
