//! Number formatting and CSV emitters.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::flow::ClosureCertificate;
use crate::sweepout::{RunLogRow, SweepoutFamily};
use crate::width::{ContinuityCheck, WidthSpectrum};

/// Twelve significant digits, scientific notation outside `[1e-4, 1e12)`.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.11e}", x)
    }
}

/// ` (= kπ)` when `x` is within `1e-9` relative of an integer multiple of π.
pub fn pi_annotation(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return String::new();
    }
    let k = x / PI;
    let r = k.round();
    if r != 0.0 && (k - r).abs() <= 1e-9 * r.abs() {
        match r as i64 {
            1 => " (= π)".to_string(),
            -1 => " (= -π)".to_string(),
            n => format!(" (= {n}π)"),
        }
    } else {
        String::new()
    }
}

pub const CERTIFICATION_HEADER: &str =
    "start_index,theta0,phi0,direction,closure_length,residual,simple,clairaut_drift";

pub fn certification_csv(certs: &[ClosureCertificate]) -> String {
    let mut out = String::with_capacity(96 * (certs.len() + 1));
    out.push_str(CERTIFICATION_HEADER);
    out.push('\n');
    for c in certs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.start.index,
            fmt12(c.start.theta()),
            fmt12(c.start.phi),
            fmt12(c.start.direction),
            fmt12(c.closure_length),
            fmt12(c.residual),
            c.simple,
            fmt12(c.clairaut_drift)
        );
    }
    out
}

pub const SPECTRUM_HEADER: &str = "p,omega_p,omega_p_over_2pi,provenance";

pub fn spectrum_csv(spectrum: &WidthSpectrum) -> String {
    let mut out = String::with_capacity(48 * (spectrum.entries.len() + 1));
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for e in &spectrum.entries {
        let ratio = match e.multiple {
            Some(k) => k.to_string(),
            None => fmt12(e.value / (2.0 * PI)),
        };
        let _ = writeln!(out, "{},{},{},{}", e.p, fmt12(e.value), ratio, e.provenance);
    }
    out
}

/// Rows `(trajectory, s, θ, φ)`.
pub fn trajectory_plot_csv(rows: &[(usize, f64, f64, f64)]) -> String {
    let mut out = String::from("trajectory,s,theta,phi\n");
    for (k, s, theta, phi) in rows {
        let _ = writeln!(out, "{k},{},{},{}", fmt12(*s), fmt12(*theta), fmt12(*phi));
    }
    out
}

pub fn run_log_csv(log: &[RunLogRow]) -> String {
    let mut out = String::from("round,max_length,argmax_t,collapse_count\n");
    for r in log {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.round,
            fmt12(r.max_length),
            fmt12(r.argmax_t),
            r.collapse_count
        );
    }
    out
}

pub fn family_plot_csv(family: &SweepoutFamily) -> String {
    let mut out = String::from("t,theta,phi\n");
    for (t, theta, phi) in family.plot_rows() {
        let _ = writeln!(out, "{},{},{}", fmt12(t), fmt12(theta), fmt12(phi));
    }
    out
}

pub fn continuity_csv(checks: &[ContinuityCheck]) -> String {
    let mut out = String::from("p,lhs,rhs,k,c0_distance,c1,c2,satisfied\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.p,
            fmt12(c.lhs),
            fmt12(c.rhs),
            fmt12(c.k_used),
            fmt12(c.c0_distance),
            fmt12(c.bounds.0),
            fmt12(c.bounds.1),
            c.satisfied
        );
    }
    out
}
