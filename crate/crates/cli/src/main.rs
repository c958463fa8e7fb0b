use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use cwikel_cli::config::{ExperimentConfig, ExperimentKind, FieldSource};
use cwikel_cli::report::write_text;
use cwikel_cli::{emit_plots, init_threads, run, CliError, Report};
use cwikel_core::io::save_grid;
use cwikel_core::{Domain, Encoding, Profile};

#[derive(Parser)]
#[command(name = "cwikel", version, about = "Cwikel-type singular value estimates at desk scale")]
struct Cli {
    /// Also write every table, report.json and SVG plots here.
    #[arg(long, global = true)]
    report_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Target {
    /// Where the primary table goes; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decreasing rearrangement and Orlicz norms of a grid.
    Rearrange {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        target: Target,
    },
    /// Equal-budget covering of the torus.
    Cover {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        target: Target,
    },
    /// Finite-rank approximation error of u weighted by f.
    Approx {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Serialized operator; single n only.
        #[arg(long)]
        kn: Option<PathBuf>,
    },
    /// Singular values of the truncated Cwikel operator.
    Spectrum {
        #[arg(long = "f")]
        input: PathBuf,
        #[arg(long = "N")]
        cutoff: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        target: Target,
    },
    /// Normalized quasinorm ratio over several cutoffs.
    Sweep {
        #[arg(long = "f", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        cutoffs: Vec<usize>,
        #[command(flatten)]
        target: Target,
    },
    /// Ball-union family with fixed Orlicz norm and growing quasinorm.
    Counterexample {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long = "N")]
        cutoff: usize,
        #[arg(long)]
        resolution: Option<usize>,
        #[command(flatten)]
        target: Target,
    },
    /// Inversion-based norm equivalence on a box grid.
    Equivalence {
        #[arg(long = "f")]
        input: PathBuf,
        #[command(flatten)]
        target: Target,
    },
    /// Bound-state counts by both sides of the Birman-Schwinger identity.
    BsCount {
        #[arg(long = "f")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long = "N")]
        cutoff: usize,
        #[command(flatten)]
        target: Target,
    },
    /// Runs a JSON experiment config.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's out_dir, then the current directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Samples a closed-form profile into a grid file.
    Sample {
        /// Profile as JSON, e.g. '{"profile":"power","exponent":0.5}'.
        #[arg(long)]
        profile: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        resolution: usize,
        /// Box half-width; torus if omitted.
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn file(path: PathBuf) -> FieldSource {
    FieldSource::File { path }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn primary<'a>(report: &'a Report, name: &str) -> &'a str {
    report.table(name).unwrap_or_else(|| panic!("runner produced no {name}"))
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    use ExperimentKind as K;
    let (cfg, out, table) = match cli.command {
        Command::Sample { profile, d, resolution, half_width, binary, out } => {
            let profile: Profile = serde_json::from_str(&profile).map_err(|e| CliError::Config(e.to_string()))?;
            let domain = half_width.map_or(Domain::Torus, |l| Domain::Box { half_width: l });
            let f = profile.sample(d, domain, resolution)?;
            save_grid(&f, if binary { Encoding::F64le } else { Encoding::Csv }, &out)?;
            return Ok(true);
        }
        Command::Report { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
            let report = cwikel_cli::run_in(&cfg, &base)?;
            let dir = out_dir.or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            finish(&report, &dir)?;
            return Ok(report.passed());
        }
        Command::Rearrange { input, target } => {
            let mut cfg = ExperimentConfig::new(K::Rearrange);
            cfg.inputs = vec![file(input)];
            (cfg, target.out, "rearrangement.csv")
        }
        Command::Cover { input, n, tol, target } => {
            let mut cfg = ExperimentConfig::new(K::Cover);
            cfg.inputs = vec![file(input)];
            cfg.n = vec![n];
            if let Some(t) = tol {
                cfg.tol = t;
            }
            (cfg, target.out, "covering.json")
        }
        Command::Approx { input, u, n, report, kn } => {
            if kn.is_some() && n.len() != 1 {
                return Err(CliError::Config("--kn needs a single --n".into()));
            }
            let mut cfg = ExperimentConfig::new(K::Approx);
            cfg.inputs = vec![file(input)];
            cfg.u = Some(file(u));
            cfg.n = n;
            let rep = run(&cfg)?;
            if let Some(path) = kn {
                write_text(&path, primary(&rep, "kn.json"))?;
            }
            emit(primary(&rep, "approx.csv"), report.as_deref())?;
            return after(&rep, cli.report_dir.as_deref());
        }
        Command::Spectrum { input, cutoff, p, target } => {
            let mut cfg = ExperimentConfig::new(K::Spectrum);
            cfg.inputs = vec![file(input)];
            cfg.cutoffs = vec![cutoff];
            cfg.p = p;
            let rep = run(&cfg)?;
            emit(primary(&rep, "spectrum.csv"), target.out.as_deref())?;
            eprint!("{}", primary(&rep, "summary.csv"));
            return after(&rep, cli.report_dir.as_deref());
        }
        Command::Sweep { inputs, cutoffs, target } => {
            let mut cfg = ExperimentConfig::new(K::Sweep);
            cfg.inputs = inputs.into_iter().map(file).collect();
            cfg.cutoffs = cutoffs;
            (cfg, target.out, "sweep.csv")
        }
        Command::Counterexample { d, ns, cutoff, resolution, target } => {
            let mut cfg = ExperimentConfig::new(K::Counterexample);
            cfg.dim = Some(d);
            cfg.ns = ns;
            cfg.cutoffs = vec![cutoff];
            cfg.resolution = resolution;
            (cfg, target.out, "growth.csv")
        }
        Command::Equivalence { input, target } => {
            let mut cfg = ExperimentConfig::new(K::Equivalence);
            cfg.inputs = vec![file(input)];
            (cfg, target.out, "equivalence.json")
        }
        Command::BsCount { input, t, cutoff, target } => {
            let mut cfg = ExperimentConfig::new(K::BsCount);
            cfg.inputs = vec![file(input)];
            cfg.couplings = t;
            cfg.cutoffs = vec![cutoff];
            (cfg, target.out, "counts.csv")
        }
    };
    let rep = run(&cfg)?;
    emit(primary(&rep, table), out.as_deref())?;
    after(&rep, cli.report_dir.as_deref())
}

fn after(report: &Report, dir: Option<&Path>) -> Result<bool, CliError> {
    match dir {
        Some(d) => finish(report, d)?,
        None => eprint!("{}", report.summary()),
    }
    Ok(report.passed())
}

fn finish(report: &Report, dir: &Path) -> Result<(), CliError> {
    let mut written = report.write_to(dir)?;
    written.extend(emit_plots(report, dir)?);
    for p in &written {
        info!("wrote {}", p.display());
    }
    eprint!("{}", report.summary());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = init_threads().and_then(|_| execute(cli));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
