//! Width spectra on the Zoll component of the round sphere.
//!
//! Every primitive closed geodesic of a Zoll metric has length 2π, so any
//! width realized by a sum of primitive geodesics with multiplicities is a
//! positive integer multiple of 2π. Along a continuous path of Zoll metrics
//! the widths are continuous and therefore constant, equal to the round values
//! `ω_p = 2π ⌊√p⌋`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZollError};
use crate::flow::{length_spectrum_sample, ClosureCertificate, ClosureOptions};
use crate::metric::{c0_distance, conformal_bounds, MetricOfRevolution};
use crate::sweepout::{minmax_estimate, MinmaxParams};

/// Relative tolerance for "is an integer multiple of 2π".
pub const MULTIPLE_TOL: f64 = 1e-9;

/// Largest `n` for which [`geodesic_sum_decompose`] lists the partitions.
pub const PARTITION_CAP: u64 = 12;

/// `⌊√p⌋`, the number of 2π in `ω_p` of the round sphere.
pub fn zoll_width_multiple(p: u64) -> u64 {
    p.isqrt()
}

/// `ω_p = 2π ⌊√p⌋` on the Zoll component.
pub fn zoll_width(p: u64) -> f64 {
    TAU * zoll_width_multiple(p) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ExactZoll,
    GeodesicSum,
    MinmaxEstimate,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::ExactZoll => "exact-zoll",
            Provenance::GeodesicSum => "geodesic-sum",
            Provenance::MinmaxEstimate => "minmax-estimate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WidthEntry {
    pub p: u64,
    pub value: f64,
    /// `value / 2π` when known exactly.
    pub multiple: Option<u64>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WidthSpectrum {
    pub entries: Vec<WidthEntry>,
}

impl WidthSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// True when all entries are exact and nondecreasing; estimates are only
    /// required to be finite.
    pub fn is_monotone(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| match (w[0].multiple, w[1].multiple) {
                (Some(a), Some(b)) => a <= b,
                _ => w[0].value <= w[1].value,
            })
    }

    /// Same `p` range and identical exact multiples.
    pub fn identical_to(&self, other: &WidthSpectrum) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| {
                a.p == b.p
                    && match (a.multiple, b.multiple) {
                        (Some(x), Some(y)) => x == y,
                        _ => a.value == b.value,
                    }
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectrumMode {
    /// `2π⌊√p⌋`; requires a passing certification in the store.
    ExactZoll,
    /// Sweepout min-max estimate for `p = 1` only.
    MinmaxEstimate(MinmaxParams),
}

/// Width spectrum for `p = 1..=p_max`.
pub fn spectrum(
    metric: &MetricOfRevolution,
    p_max: u64,
    mode: SpectrumMode,
    store: &CertificationStore,
) -> Result<WidthSpectrum> {
    if p_max < 1 {
        return Err(ZollError::InvalidArgument("P must be at least 1".into()));
    }
    match mode {
        SpectrumMode::ExactZoll => {
            store.require(metric)?;
            Ok(WidthSpectrum {
                entries: (1..=p_max)
                    .map(|p| {
                        let k = zoll_width_multiple(p);
                        WidthEntry {
                            p,
                            value: TAU * k as f64,
                            multiple: Some(k),
                            provenance: Provenance::ExactZoll,
                        }
                    })
                    .collect(),
            })
        }
        SpectrumMode::MinmaxEstimate(params) => {
            if p_max != 1 {
                return Err(ZollError::InvalidArgument(
                    "minmax-estimate mode covers p = 1 only".into(),
                ));
            }
            let value = minmax_estimate(metric, &params)?.estimate;
            Ok(WidthSpectrum {
                entries: vec![WidthEntry {
                    p: 1,
                    value,
                    multiple: None,
                    provenance: Provenance::MinmaxEstimate,
                }],
            })
        }
    }
}

/// `Σ m_j L_j` over primitive closed geodesics.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSum {
    /// `(m_j, L_j)`
    pub terms: Vec<(u64, f64)>,
    pub total: f64,
}

impl GeodesicSum {
    pub fn new(terms: Vec<(u64, f64)>) -> Result<Self> {
        if terms.iter().any(|&(m, l)| m == 0 || l <= 0.0) {
            return Err(ZollError::InvalidArgument(
                "multiplicities must be >= 1 and lengths > 0".into(),
            ));
        }
        let total = terms.iter().map(|&(m, l)| m as f64 * l).sum();
        Ok(GeodesicSum { terms, total })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decomposition {
    /// Every representation as a sum of primitive 2π geodesics, one per
    /// partition of `n` (parts in nonincreasing order).
    Enumerated(Vec<GeodesicSum>),
    /// Above the enumeration cap only the number of partitions is reported.
    CountOnly { n: u64, count: u128 },
}

impl Decomposition {
    pub fn count(&self) -> u128 {
        match self {
            Decomposition::Enumerated(v) => v.len() as u128,
            Decomposition::CountOnly { count, .. } => *count,
        }
    }
}

/// Integer `n` with `value = 2π n` within [`MULTIPLE_TOL`] relative.
pub fn multiple_of_two_pi(value: f64) -> Result<u64> {
    let k = value / TAU;
    let n = k.round();
    if value.is_nan() || value <= 0.0 || n < 1.0 || (k - n).abs() > MULTIPLE_TOL * n {
        return Err(ZollError::NotMultipleOf2Pi { value });
    }
    Ok(n as u64)
}

/// All ways of writing `value` as `Σ m_j · 2π` on a Zoll sphere.
pub fn geodesic_sum_decompose(value: f64) -> Result<Decomposition> {
    let n = multiple_of_two_pi(value)?;
    if n > PARTITION_CAP {
        return Ok(Decomposition::CountOnly {
            n,
            count: partition_count(n),
        });
    }
    let mut out = Vec::new();
    let mut parts = Vec::new();
    partitions_into(n, n, &mut parts, &mut out);
    Ok(Decomposition::Enumerated(
        out.into_iter()
            .map(|ps| GeodesicSum::new(ps.into_iter().map(|m| (m, TAU)).collect()))
            .collect::<Result<_>>()?,
    ))
}

fn partitions_into(rest: u64, max_part: u64, parts: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if rest == 0 {
        out.push(parts.clone());
        return;
    }
    for m in (1..=rest.min(max_part)).rev() {
        parts.push(m);
        partitions_into(rest - m, m, parts, out);
        parts.pop();
    }
}

/// Partition function by dynamic programming over part sizes.
pub fn partition_count(n: u64) -> u128 {
    let n = n as usize;
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            ways[total] += ways[total - part];
        }
    }
    ways[n]
}

/// Result of comparing `|ω_p(g) - ω_p(g')|` with `K √p ||g - g'||_{C⁰(g₀)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityCheck {
    pub p: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub k_used: f64,
    pub c0_distance: f64,
    /// Sampled `(C₁, C₂)` covering both metrics.
    pub bounds: (f64, f64),
    pub satisfied: bool,
}

pub fn continuity_check(
    g: &MetricOfRevolution,
    other: &MetricOfRevolution,
    p: u64,
    k: f64,
    store: &CertificationStore,
) -> Result<ContinuityCheck> {
    Ok(continuity_battery(g, other, p, k, store)?
        .pop()
        .expect("battery has p entries"))
}

/// [`continuity_check`] for every `p` in `1..=p_max`, sharing the C⁰ distance.
pub fn continuity_battery(
    g: &MetricOfRevolution,
    other: &MetricOfRevolution,
    p_max: u64,
    k: f64,
    store: &CertificationStore,
) -> Result<Vec<ContinuityCheck>> {
    if k.is_nan() || k <= 0.0 {
        return Err(ZollError::InvalidArgument(format!(
            "K must be positive, got {k}"
        )));
    }
    let a = spectrum(g, p_max, SpectrumMode::ExactZoll, store)?;
    let b = spectrum(other, p_max, SpectrumMode::ExactZoll, store)?;
    let dist = c0_distance(g, other);
    let (ca, cb) = (conformal_bounds(g), conformal_bounds(other));
    let bounds = (ca.0.min(cb.0), ca.1.max(cb.1));
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| {
            // exact multiples subtract in integers
            let lhs = TAU * x.multiple.unwrap().abs_diff(y.multiple.unwrap()) as f64;
            let rhs = k * (x.p as f64).sqrt() * dist;
            ContinuityCheck {
                p: x.p,
                lhs,
                rhs,
                k_used: k,
                c0_distance: dist,
                bounds,
                satisfied: lhs <= rhs,
            }
        })
        .collect())
}

/// Curvature ranges differing by more than this certify non-isometry.
pub const CURVATURE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct IsospectralVerdict {
    pub p_max: u64,
    pub isospectral: bool,
    pub distinct_geometry: bool,
    pub counterexample: bool,
    pub k_range: (f64, f64),
    pub other_k_range: (f64, f64),
}

impl fmt::Display for IsospectralVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::report::fmt12;
        writeln!(f, "p_max = {}", self.p_max)?;
        writeln!(f, "isospectral = {}", self.isospectral)?;
        writeln!(f, "distinct_geometry = {}", self.distinct_geometry)?;
        writeln!(f, "counterexample = {}", self.counterexample)?;
        writeln!(
            f,
            "curvature_range_a = [{}, {}]",
            fmt12(self.k_range.0),
            fmt12(self.k_range.1)
        )?;
        writeln!(
            f,
            "curvature_range_b = [{}, {}]",
            fmt12(self.other_k_range.0),
            fmt12(self.other_k_range.1)
        )?;
        write!(f, "verdict = {}", self.headline())
    }
}

impl IsospectralVerdict {
    pub fn headline(&self) -> &'static str {
        match (self.isospectral, self.distinct_geometry) {
            (true, true) => "ISOSPECTRAL, NOT ISOMETRIC: counterexample reproduced",
            (true, false) => "isospectral, geometrically indistinguishable at tolerance",
            (false, _) => "NOT isospectral",
        }
    }
}

pub fn isospectral_verdict(
    g: &MetricOfRevolution,
    other: &MetricOfRevolution,
    p_max: u64,
    store: &CertificationStore,
) -> Result<IsospectralVerdict> {
    let a = spectrum(g, p_max, SpectrumMode::ExactZoll, store)?;
    let b = spectrum(other, p_max, SpectrumMode::ExactZoll, store)?;
    let ka = g.curvature_range();
    let kb = other.curvature_range();
    let isospectral = a.identical_to(&b);
    let distinct_geometry =
        (ka.0 - kb.0).abs() > CURVATURE_TOL || (ka.1 - kb.1).abs() > CURVATURE_TOL;
    Ok(IsospectralVerdict {
        p_max,
        isospectral,
        distinct_geometry,
        counterexample: isospectral && distinct_geometry,
        k_range: ka,
        other_k_range: kb,
    })
}

/// Record of a certification run, keyed by the metric's content hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationArtifact {
    pub metric_hash: String,
    pub n_starts: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub max_residual: f64,
    pub max_closure_offset: f64,
    pub worst_start: u64,
    pub all_simple: bool,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub n_starts: usize,
    pub seed: u64,
    /// Residual threshold at length 2π.
    pub tolerance: f64,
    pub closure: ClosureOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            n_starts: 100,
            seed: 0,
            tolerance: 1e-6,
            closure: ClosureOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificationRun {
    pub certificates: Vec<ClosureCertificate>,
    pub artifact: CertificationArtifact,
}

/// Samples closure certificates and summarizes them into an artifact.
pub fn certify(metric: &MetricOfRevolution, opts: &CertifyOptions) -> Result<CertificationRun> {
    if opts.n_starts == 0 {
        return Err(ZollError::InvalidArgument(
            "n_starts must be at least 1".into(),
        ));
    }
    if opts.tolerance.is_nan() || opts.tolerance <= 0.0 {
        return Err(ZollError::InvalidArgument(
            "tolerance must be positive".into(),
        ));
    }
    let certificates = length_spectrum_sample(metric, opts.n_starts, opts.seed, &opts.closure)?;
    let (worst_start, max_residual) = certificates
        .iter()
        .map(|c| (c.start.index as u64, c.residual))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let max_closure_offset = certificates
        .iter()
        .map(|c| (c.closure_length - TAU).abs())
        .fold(0.0, f64::max);
    let all_simple = certificates.iter().all(|c| c.simple);
    let passed = all_simple && certificates.iter().all(|c| c.residual < opts.tolerance);
    Ok(CertificationRun {
        artifact: CertificationArtifact {
            metric_hash: metric.content_hash(),
            n_starts: opts.n_starts as u64,
            seed: opts.seed,
            tolerance: opts.tolerance,
            max_residual,
            max_closure_offset,
            worst_start,
            all_simple,
            passed,
        },
        certificates,
    })
}

/// Append-only store of certification artifacts, optionally mirrored to a
/// directory as `<hash>.cert` files. Re-recording a hash replaces the entry.
#[derive(Clone, Debug, Default)]
pub struct CertificationStore {
    entries: BTreeMap<String, CertificationArtifact>,
    dir: Option<PathBuf>,
}

impl CertificationStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a directory-backed store and loads its artifacts.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let mut entries = BTreeMap::new();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "cert"))
            .collect();
        files.sort();
        for path in files {
            let text = std::fs::read_to_string(&path)?;
            let art: CertificationArtifact = toml::from_str(&text)
                .map_err(|e| ZollError::Config(format!("{}: {e}", path.display())))?;
            entries.insert(art.metric_hash.clone(), art);
        }
        Ok(CertificationStore {
            entries,
            dir: Some(dir),
        })
    }

    pub fn record(&mut self, artifact: CertificationArtifact) -> Result<()> {
        if let Some(dir) = &self.dir {
            let text = toml::to_string(&artifact).expect("artifact serializes");
            std::fs::write(dir.join(format!("{}.cert", artifact.metric_hash)), text)?;
        }
        self.entries.insert(artifact.metric_hash.clone(), artifact);
        Ok(())
    }

    pub fn get(&self, metric: &MetricOfRevolution) -> Option<&CertificationArtifact> {
        self.entries.get(&metric.content_hash())
    }

    pub fn is_certified(&self, metric: &MetricOfRevolution) -> bool {
        self.get(metric).is_some_and(|a| a.passed)
    }

    pub fn require(&self, metric: &MetricOfRevolution) -> Result<()> {
        if self.is_certified(metric) {
            Ok(())
        } else {
            Err(ZollError::NotCertifiedZoll {
                hash: metric.content_hash(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn width_formula_values() {
        assert_eq!(zoll_width(1), 2.0 * PI);
        assert_eq!(zoll_width(3), 2.0 * PI);
        assert_eq!(zoll_width(4), 4.0 * PI);
        assert_eq!(zoll_width(99), 18.0 * PI);
        assert_eq!(zoll_width(100), 20.0 * PI);
        for k in 1..2000u64 {
            assert_eq!(zoll_width_multiple(k * k), k);
            assert_eq!(zoll_width_multiple(k * k - 1), k - 1);
        }
        assert_eq!(zoll_width_multiple(u64::MAX), 4_294_967_295);
    }

    #[test]
    fn exact_mode_requires_certificate() {
        let store = CertificationStore::in_memory();
        let err = spectrum(
            &MetricOfRevolution::round(),
            4,
            SpectrumMode::ExactZoll,
            &store,
        );
        assert!(matches!(err, Err(ZollError::NotCertifiedZoll { .. })));
    }

    #[test]
    fn failed_artifact_does_not_certify() {
        let g = MetricOfRevolution::round();
        let mut store = CertificationStore::in_memory();
        store
            .record(CertificationArtifact {
                metric_hash: g.content_hash(),
                n_starts: 1,
                seed: 0,
                tolerance: 1e-6,
                max_residual: 1.0,
                max_closure_offset: 0.0,
                worst_start: 0,
                all_simple: true,
                passed: false,
            })
            .unwrap();
        assert!(store.require(&g).is_err());
    }

    #[test]
    fn small_decompositions() {
        match geodesic_sum_decompose(2.0 * PI).unwrap() {
            Decomposition::Enumerated(v) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].terms, vec![(1, TAU)]);
            }
            _ => panic!(),
        }
        match geodesic_sum_decompose(4.0 * PI).unwrap() {
            Decomposition::Enumerated(v) => {
                assert_eq!(v[0].terms, vec![(2, TAU)]);
                assert_eq!(v[1].terms, vec![(1, TAU), (1, TAU)]);
                assert!(v.iter().all(|s| (s.total - 4.0 * PI).abs() < 1e-12));
            }
            _ => panic!(),
        }
        assert_eq!(geodesic_sum_decompose(6.0 * PI).unwrap().count(), 3);
        assert!(matches!(
            geodesic_sum_decompose(7.0),
            Err(ZollError::NotMultipleOf2Pi { .. })
        ));
        assert!(geodesic_sum_decompose(0.0).is_err());
        assert!(geodesic_sum_decompose(-TAU).is_err());
        match geodesic_sum_decompose(13.0 * TAU).unwrap() {
            Decomposition::CountOnly { n, count } => {
                assert_eq!(n, 13);
                assert_eq!(count, 101);
            }
            _ => panic!(),
        }
        assert_eq!(partition_count(100), 190_569_292);
    }

    #[test]
    fn geodesic_sum_rejects_bad_terms() {
        assert!(GeodesicSum::new(vec![(0, TAU)]).is_err());
        assert!(GeodesicSum::new(vec![(1, -1.0)]).is_err());
    }
}
