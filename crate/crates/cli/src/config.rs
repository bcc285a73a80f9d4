//! Run configuration: a TOML file with one table per subcommand. Every key
//! has a default, so an empty file is a valid config for the round metric.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zoll_core::metric::ProfileSpec;
use zoll_core::{Result, ZollError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    /// Worker threads; the hardware parallelism when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub metric: ProfileSpec,
    /// Second metric for `compare`; the round metric when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<ProfileSpec>,
    pub certify: CertifySection,
    pub spectrum: SpectrumSection,
    pub compare: CompareSection,
    pub minmax: MinmaxSection,
    pub report: ReportSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            out_dir: PathBuf::from("zoll-out"),
            workers: None,
            metric: ProfileSpec::default(),
            other: None,
            certify: CertifySection::default(),
            spectrum: SpectrumSection::default(),
            compare: CompareSection::default(),
            minmax: MinmaxSection::default(),
            report: ReportSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifySection {
    pub n_starts: usize,
    pub seed: u64,
    /// Closure residual threshold.
    pub tolerance: f64,
    /// Integrator error tolerance.
    pub integrator_tol: f64,
    /// Number of trajectories written to the plot-data file.
    pub plot_trajectories: usize,
}

impl Default for CertifySection {
    fn default() -> Self {
        CertifySection {
            n_starts: 100,
            seed: 0,
            tolerance: 1e-6,
            integrator_tol: 1e-12,
            plot_trajectories: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumModeName {
    ExactZoll,
    Minmax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub p_max: u64,
    pub mode: SpectrumModeName,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            p_max: 100,
            mode: SpectrumModeName::ExactZoll,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub p_max: u64,
    /// Constant of the width continuity bound.
    pub k: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection { p_max: 100, k: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinmaxSection {
    pub curves: usize,
    pub vertices: usize,
    pub rounds: usize,
    /// Azimuthal rotation of the initial family.
    pub phase: f64,
}

impl Default for MinmaxSection {
    fn default() -> Self {
        MinmaxSection {
            curves: 65,
            vertices: 256,
            rounds: 200,
            phase: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub diameter_grid: usize,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { diameter_grid: 3 }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ZollError::Config(e.to_string()))
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ZollError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(ZollError::Config(msg.to_string()));
        let c = &self.certify;
        if c.n_starts < 1 {
            return bad("certify.n_starts must be at least 1");
        }
        if [c.tolerance, c.integrator_tol]
            .iter()
            .any(|t| t.is_nan() || *t <= 0.0)
        {
            return bad("tolerances must be positive");
        }
        if self.spectrum.p_max < 1 || self.compare.p_max < 1 {
            return bad("p_max must be at least 1");
        }
        if self.compare.k.is_nan() || self.compare.k <= 0.0 {
            return bad("compare.k must be positive");
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1");
        }
        let m = &self.minmax;
        if m.curves < 3 || m.vertices < 8 || m.rounds < 1 || !m.phase.is_finite() {
            return bad("minmax needs curves >= 3, vertices >= 8, rounds >= 1");
        }
        if self.report.diameter_grid == 1 {
            return bad("report.diameter_grid must be 0 (skip) or at least 2");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("[certify]\nn_start = 3").is_err());
    }

    #[test]
    fn sections_parse() {
        let c = RunConfig::parse(
            "out_dir = \"x\"\n[metric]\ncoeffs = [1.0, -1.0]\nepsilon = 0.3\n[spectrum]\nmode = \"minmax\"\np_max = 1\n",
        )
        .unwrap();
        assert_eq!(c.metric.epsilon, Some(0.3));
        assert_eq!(c.spectrum.mode, SpectrumModeName::Minmax);
        assert_eq!(c.out_dir, PathBuf::from("x"));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.certify.tolerance = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.spectrum.p_max = 0;
        assert!(c.validate().is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e3..1e3f64, 1e-15..1e-3f64]
    }

    fn profile() -> impl Strategy<Value = ProfileSpec> {
        (
            prop::collection::vec(finite(), 0..4),
            prop::option::of(finite()),
            prop::collection::vec(finite(), 0..3),
            prop::option::of(1e-3..1e3f64),
        )
            .prop_map(|(coeffs, epsilon, even_coeffs, scale)| ProfileSpec {
                coeffs,
                epsilon,
                even_coeffs,
                scale,
            })
    }

    fn config() -> impl Strategy<Value = RunConfig> {
        (
            "[a-z0-9_/]{1,12}",
            prop::option::of(1usize..64),
            profile(),
            prop::option::of(profile()),
            (
                1usize..10_000,
                any::<u32>(),
                1e-15..1.0f64,
                1e-15..1.0f64,
                0usize..20,
            ),
            (1u64..1 << 40, any::<bool>(), 1u64..1000, 1e-3..10.0f64),
            (
                3usize..200,
                8usize..1024,
                1usize..1000,
                finite(),
                0usize..20,
            ),
        )
            .prop_map(|(dir, workers, metric, other, c, s, m)| RunConfig {
                out_dir: PathBuf::from(dir),
                workers,
                metric,
                other,
                certify: CertifySection {
                    n_starts: c.0,
                    seed: c.1 as u64,
                    tolerance: c.2,
                    integrator_tol: c.3,
                    plot_trajectories: c.4,
                },
                spectrum: SpectrumSection {
                    p_max: s.0,
                    mode: if s.1 {
                        SpectrumModeName::ExactZoll
                    } else {
                        SpectrumModeName::Minmax
                    },
                },
                compare: CompareSection { p_max: s.2, k: s.3 },
                minmax: MinmaxSection {
                    curves: m.0,
                    vertices: m.1,
                    rounds: m.2,
                    phase: m.3,
                },
                report: ReportSection { diameter_grid: m.4 },
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(c in config()) {
            prop_assert_eq!(RunConfig::parse(&c.render()).unwrap(), c);
        }
    }
}
