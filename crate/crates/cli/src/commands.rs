//! Subcommand bodies. Each writes its CSV files under the output directory
//! and prints a short human-readable summary.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use zoll_core::flow::{trace_geodesic, ClosureOptions, IntegratorOptions};
use zoll_core::metric::{curvature_report, CurvatureReport, ProfileSpec, ReportOptions};
use zoll_core::report::{
    certification_csv, continuity_csv, family_plot_csv, fmt12, pi_annotation, run_log_csv,
    spectrum_csv, trajectory_plot_csv,
};
use zoll_core::sweepout::{minmax_estimate, MinmaxParams};
use zoll_core::width::{
    certify as certify_metric, continuity_battery, isospectral_verdict, spectrum as width_spectrum,
    CertificationArtifact, CertificationStore, CertifyOptions, SpectrumMode,
};
use zoll_core::{MetricOfRevolution, ZollError};

use crate::config::{RunConfig, SpectrumModeName};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_MISSING: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
    pub hint: Option<String>,
}

impl Failure {
    pub fn config(message: String) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message,
            hint: None,
        }
    }

    fn failed(message: String) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message,
            hint: None,
        }
    }
}

impl From<ZollError> for Failure {
    fn from(e: ZollError) -> Self {
        let code = match &e {
            ZollError::ProfileInvalid(_) | ZollError::InvalidArgument(_) | ZollError::Config(_) => {
                EXIT_CONFIG
            }
            ZollError::NotCertifiedZoll { .. } => EXIT_MISSING,
            _ => EXIT_FAILURE,
        };
        let hint = matches!(e, ZollError::NotCertifiedZoll { .. }).then(|| {
            "run `zoll certify` with the same metric settings and --out-dir first".to_string()
        });
        Failure {
            code,
            message: e.to_string(),
            hint,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn build(spec: &ProfileSpec) -> Result<MetricOfRevolution, Failure> {
    Ok(spec.build()?)
}

fn short(metric: &MetricOfRevolution) -> String {
    metric.content_hash()[..12].to_string()
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, Failure> {
    std::fs::write(&path, text).map_err(|e| Failure::failed(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::failed(format!("{}: {e}", cfg.out_dir.display())))?;
    Ok(&cfg.out_dir)
}

fn open_store(cfg: &RunConfig) -> Result<CertificationStore, Failure> {
    Ok(CertificationStore::open(out_dir(cfg)?.join("certs"))?)
}

fn certify_options(cfg: &RunConfig) -> CertifyOptions {
    CertifyOptions {
        n_starts: cfg.certify.n_starts,
        seed: cfg.certify.seed,
        tolerance: cfg.certify.tolerance,
        closure: ClosureOptions {
            integrator: IntegratorOptions::with_tol(cfg.certify.integrator_tol),
            ..Default::default()
        },
    }
}

fn failure_reason(a: &CertificationArtifact) -> String {
    format!(
        "certification failed: metric={} worst_residual={} failing_start={} all_simple={} tolerance={}",
        &a.metric_hash[..12],
        fmt12(a.max_residual),
        a.worst_start,
        a.all_simple,
        fmt12(a.tolerance)
    )
}

/// Runs a certification, writes its reports and records the artifact.
fn run_certification(
    cfg: &RunConfig,
    metric: &MetricOfRevolution,
    store: &mut CertificationStore,
) -> Result<CertificationArtifact, Failure> {
    let opts = certify_options(cfg);
    let run = certify_metric(metric, &opts)?;
    let dir = out_dir(cfg)?;
    let tag = short(metric);
    let report = write(
        dir.join(format!("certification-{tag}.csv")),
        &certification_csv(&run.certificates),
    )?;

    let mut rows = Vec::new();
    for c in run.certificates.iter().take(cfg.certify.plot_trajectories) {
        let trace = trace_geodesic(
            metric,
            &c.start.state(metric),
            TAU,
            &opts.closure.integrator,
        )?;
        rows.extend(
            trace
                .plot_rows()
                .into_iter()
                .map(|(s, t, p)| (c.start.index, s, t, p)),
        );
    }
    let plot = write(
        dir.join(format!("trajectories-{tag}.csv")),
        &trajectory_plot_csv(&rows),
    )?;

    let a = &run.artifact;
    let passing = run
        .certificates
        .iter()
        .filter(|c| c.simple && c.residual < opts.tolerance)
        .count();
    println!("metric {tag}");
    println!(
        "  certificates passing: {passing}/{}",
        run.certificates.len()
    );
    println!("  max residual: {}", fmt12(a.max_residual));
    println!(
        "  max |closure length - 2π|: {}",
        fmt12(a.max_closure_offset)
    );
    println!("  all simple: {}", a.all_simple);
    println!("  report: {}", report.display());
    println!("  plot data: {}", plot.display());
    store.record(run.artifact.clone())?;
    Ok(run.artifact)
}

pub fn certify(cfg: &RunConfig) -> CmdResult {
    let metric = build(&cfg.metric)?;
    let mut store = open_store(cfg)?;
    let artifact = run_certification(cfg, &metric, &mut store)?;
    if artifact.passed {
        println!("certified: {}", artifact.metric_hash);
        Ok(())
    } else {
        Err(Failure::failed(failure_reason(&artifact)))
    }
}

pub fn spectrum(cfg: &RunConfig) -> CmdResult {
    let metric = build(&cfg.metric)?;
    let store = open_store(cfg)?;
    let mode = match cfg.spectrum.mode {
        SpectrumModeName::ExactZoll => SpectrumMode::ExactZoll,
        SpectrumModeName::Minmax => SpectrumMode::MinmaxEstimate(minmax_params(cfg)),
    };
    let s = width_spectrum(&metric, cfg.spectrum.p_max, mode, &store)?;
    let path = write(
        out_dir(cfg)?.join(format!("spectrum-{}.csv", short(&metric))),
        &spectrum_csv(&s),
    )?;
    const SHOWN: usize = 20;
    for e in s.entries.iter().take(SHOWN) {
        println!("ω_{} = {}{}", e.p, fmt12(e.value), pi_annotation(e.value));
    }
    if s.entries.len() > SHOWN {
        println!("... {} more", s.entries.len() - SHOWN);
    }
    println!("spectrum: {}", path.display());
    Ok(())
}

/// Reuses a passing artifact from the store or certifies now.
fn ensure_certified(
    cfg: &RunConfig,
    metric: &MetricOfRevolution,
    store: &mut CertificationStore,
) -> CmdResult {
    if store.is_certified(metric) {
        println!("metric {}: certified (stored artifact)", short(metric));
        return Ok(());
    }
    let a = run_certification(cfg, metric, store)?;
    if a.passed {
        Ok(())
    } else {
        Err(Failure::failed(failure_reason(&a)))
    }
}

pub fn compare(cfg: &RunConfig) -> CmdResult {
    let a = build(&cfg.metric)?;
    let b = build(&cfg.other.clone().unwrap_or_default())?;
    let mut store = open_store(cfg)?;
    ensure_certified(cfg, &a, &mut store)?;
    ensure_certified(cfg, &b, &mut store)?;

    let p = cfg.compare.p_max;
    let verdict = isospectral_verdict(&a, &b, p, &store)?;
    let battery = continuity_battery(&a, &b, p, cfg.compare.k, &store)?;
    let dir = out_dir(cfg)?;
    let tag = format!("{}-{}", short(&a), short(&b));
    let record = format!(
        "metric_a = {}\nmetric_b = {}\n{verdict}\n",
        a.content_hash(),
        b.content_hash()
    );
    let vpath = write(dir.join(format!("verdict-{tag}.txt")), &record)?;
    let cpath = write(
        dir.join(format!("continuity-{tag}.csv")),
        &continuity_csv(&battery),
    )?;

    let held = battery.iter().filter(|c| c.satisfied).count();
    println!("{verdict}");
    println!(
        "continuity (K = {}, C⁰ distance {}): {held}/{} satisfied",
        fmt12(cfg.compare.k),
        fmt12(battery[0].c0_distance),
        battery.len()
    );
    println!("verdict record: {}", vpath.display());
    println!("continuity: {}", cpath.display());
    if held < battery.len() {
        let first = battery.iter().find(|c| !c.satisfied).unwrap();
        return Err(Failure::failed(format!(
            "continuity bound violated at p={} lhs={} rhs={}",
            first.p,
            fmt12(first.lhs),
            fmt12(first.rhs)
        )));
    }
    Ok(())
}

fn minmax_params(cfg: &RunConfig) -> MinmaxParams {
    MinmaxParams {
        t_count: cfg.minmax.curves,
        n_vertices: cfg.minmax.vertices,
        rounds: cfg.minmax.rounds,
        phase: cfg.minmax.phase,
    }
}

pub fn minmax(cfg: &RunConfig) -> CmdResult {
    let metric = build(&cfg.metric)?;
    let store = open_store(cfg)?;
    let out = minmax_estimate(&metric, &minmax_params(cfg))?;
    let dir = out_dir(cfg)?;
    let tag = short(&metric);
    let log = write(
        dir.join(format!("runlog-{tag}.csv")),
        &run_log_csv(&out.log),
    )?;
    let fam = write(
        dir.join(format!("family-{tag}.csv")),
        &family_plot_csv(&out.family),
    )?;

    println!("width estimate: {}", fmt12(out.estimate));
    println!("great-arc model estimate: {}", fmt12(out.coarse_estimate));
    println!(
        "maximizing curve: t = {}",
        fmt12(out.family.t[out.family.argmax])
    );
    println!("monotone descent: {}", out.monotone);
    if store.is_certified(&metric) {
        println!(
            "relative error against 2π: {}",
            fmt12((out.estimate - TAU) / TAU)
        );
    }
    println!("run log: {}", log.display());
    println!("family: {}", fam.display());
    if !out.monotone {
        return Err(Failure::failed(
            "curve length increased during shortening".into(),
        ));
    }
    Ok(())
}

pub fn report(cfg: &RunConfig) -> CmdResult {
    let metric = build(&cfg.metric)?;
    let r = curvature_report(
        &metric,
        ReportOptions {
            diameter_grid: cfg.report.diameter_grid,
        },
    )?;
    let path = write(
        out_dir(cfg)?.join(format!("curvature-{}.csv", short(&metric))),
        &format!("{}\n{}\n", CurvatureReport::CSV_HEADER, r.csv_row()),
    )?;
    println!("{r}");
    println!("report: {}", path.display());
    Ok(())
}
