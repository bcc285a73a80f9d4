use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::Failure;
use config::{RunConfig, SpectrumModeName};
use zoll_core::metric::ProfileSpec;

#[derive(Parser)]
#[command(
    name = "zoll",
    version,
    about = "Closed-geodesic certification and width spectra of Zoll spheres of revolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample closed geodesics and store a certification artifact.
    Certify(Overrides),
    /// Print the width spectrum of a certified metric.
    Spectrum(Overrides),
    /// Compare the spectra and geometry of two metrics.
    Compare(Overrides),
    /// Estimate the first width by a pulled-tight sweepout.
    Minmax(Overrides),
    /// Curvature, area and diameter of the metric.
    Report(Overrides),
}

/// Flags override the matching config keys.
#[derive(clap::Args, Debug, Default)]
struct Overrides {
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Profile file for the metric (`coeffs = [...]`, `epsilon = ...`).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Amplitude of the profile; alone it selects h(u) = ε(u - u³).
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Profile file for the second metric of `compare`.
    #[arg(long)]
    other_profile: Option<PathBuf>,
    /// Amplitude for the second metric of `compare`.
    #[arg(long, allow_hyphen_values = true)]
    other_epsilon: Option<f64>,
    #[arg(long)]
    p_max: Option<u64>,
    #[arg(long)]
    n_starts: Option<usize>,
    /// Closure residual threshold.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<SpectrumModeName>,
    /// Continuity constant for `compare`.
    #[arg(long)]
    k: Option<f64>,
    /// Curves in the sweepout family.
    #[arg(long)]
    curves: Option<usize>,
    /// Vertices per curve.
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
}

fn load_profile(path: &PathBuf) -> Result<ProfileSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    Ok(ProfileSpec::parse(&text)?)
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.profile {
            cfg.metric = load_profile(p)?;
        }
        if let Some(e) = self.epsilon {
            cfg.metric.epsilon = Some(e);
        }
        if let Some(p) = &self.other_profile {
            cfg.other = Some(load_profile(p)?);
        }
        if let Some(e) = self.other_epsilon {
            cfg.other.get_or_insert_with(ProfileSpec::default).epsilon = Some(e);
        }
        if let Some(p) = self.p_max {
            cfg.spectrum.p_max = p;
            cfg.compare.p_max = p;
        }
        if let Some(n) = self.n_starts {
            cfg.certify.n_starts = n;
        }
        if let Some(t) = self.tolerance {
            cfg.certify.tolerance = t;
        }
        if let Some(s) = self.seed {
            cfg.certify.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(m) = self.mode {
            cfg.spectrum.mode = m;
        }
        if let Some(k) = self.k {
            cfg.compare.k = k;
        }
        if let Some(c) = self.curves {
            cfg.minmax.curves = c;
        }
        if let Some(v) = self.vertices {
            cfg.minmax.vertices = v;
        }
        if let Some(r) = self.rounds {
            cfg.minmax.rounds = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

type Handler = fn(&RunConfig) -> Result<(), Failure>;

fn run(cli: Cli) -> Result<(), Failure> {
    let (args, cmd): (&Overrides, Handler) = match &cli.command {
        Command::Certify(a) => (a, commands::certify),
        Command::Spectrum(a) => (a, commands::spectrum),
        Command::Compare(a) => (a, commands::compare),
        Command::Minmax(a) => (a, commands::minmax),
        Command::Report(a) => (a, commands::report),
    };
    let cfg = args.resolve()?;
    if let Some(w) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::config(e.to_string()))?;
    }
    // the resolved config, so a run can be repeated without its flags
    std::fs::create_dir_all(&cfg.out_dir)
        .and_then(|_| std::fs::write(cfg.out_dir.join("run.toml"), cfg.render()))
        .map_err(|e| Failure::config(format!("{}: {e}", cfg.out_dir.display())))?;
    cmd(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(hint) = &f.hint {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(f.code)
        }
    }
}
