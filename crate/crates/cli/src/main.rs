//! `nrlab` command-line driver: symbolic normal forms, single runs,
//! convergence sweeps and the self-check suite.
//!
//! Exit status is 0 when the reported check passes, 1 when it fails and 2 on
//! errors (bad arguments, unreadable config, integration failure).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nrlab_core::hamalg::{
    expand_dispersion_components, expand_nonlinearity, expand_nonlinearity_complex, normal_form,
    normal_form_complex,
};
use nrlab_core::harness::{
    exp_evolve, exp_galerkin_tail, exp_global_bound, exp_linear_longtime, exp_nonlinear_locuniform,
    exp_scaling_identity, exp_transform_gain, run_validation_suite, ConvergenceReport, Experiment,
    ExperimentConfig,
};
use nrlab_core::propagators::{write_trajectory_csv, write_trajectory_snapshots};
use nrlab_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nrlab",
    version,
    about = "Nonrelativistic-limit normal-form laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the ε-expansion of the dispersion and of the nonlinearity.
    Coeffs {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        r: usize,
        /// Two-component (complex) system.
        #[arg(long)]
        complex: bool,
    },
    /// Print the normal-form Hamiltonians Z_j and generators χ_j.
    Normalform {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        r: usize,
        /// Two-component (complex) system.
        #[arg(long)]
        complex: bool,
    },
    /// Integrate one system and write the trajectory.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// linear_longtime, scaling_identity or galerkin_tail.
    ConvergeLinear {
        #[arg(long)]
        config: PathBuf,
    },
    /// nonlinear_locuniform or global_bound.
    ConvergeNonlinear {
        #[arg(long)]
        config: PathBuf,
    },
    /// NLKG against the order-2 normal form with and without the Lie transform.
    TransformGain {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the self-check suite.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<bool> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Command::Coeffs { l, r, complex } => coeffs(&mut out, l, r, complex),
        Command::Normalform { l, r, complex } => normalform(&mut out, l, r, complex),
        Command::Evolve { config } => evolve(&mut out, &load(&config, None)?),
        Command::ConvergeLinear { config } => {
            let cfg = load(&config, Some(Experiment::LinearLongtime))?;
            match cfg.experiment {
                Experiment::LinearLongtime => emit(&mut out, &cfg, &exp_linear_longtime(&cfg)?),
                Experiment::ScalingIdentity => emit(&mut out, &cfg, &exp_scaling_identity(&cfg)?),
                Experiment::GalerkinTail => emit(&mut out, &cfg, &exp_galerkin_tail(&cfg)?.0),
                other => Err(wrong_experiment("converge-linear", other)),
            }
        }
        Command::ConvergeNonlinear { config } => {
            let cfg = load(&config, Some(Experiment::NonlinearLocuniform))?;
            match cfg.experiment {
                Experiment::NonlinearLocuniform => {
                    emit(&mut out, &cfg, &exp_nonlinear_locuniform(&cfg)?)
                }
                Experiment::GlobalBound => emit(&mut out, &cfg, &exp_global_bound(&cfg)?),
                other => Err(wrong_experiment("converge-nonlinear", other)),
            }
        }
        Command::TransformGain { config } => {
            let cfg = load(&config, Some(Experiment::TransformGain))?;
            if cfg.experiment != Experiment::TransformGain {
                return Err(wrong_experiment("transform-gain", cfg.experiment));
            }
            let rep = exp_transform_gain(&cfg)?;
            for side in [&rep.untransformed, &rep.inverse_metric] {
                eprintln!("# {} {}", side.experiment, side.summary_line());
                for n in &side.notes {
                    eprintln!("#   {n}");
                }
            }
            emit(&mut out, &cfg, &rep.transformed)?;
            Ok(rep.pass())
        }
        Command::Validate => {
            let s = run_validation_suite();
            writeln!(out, "{s}")?;
            Ok(s.pass())
        }
    }
}

fn wrong_experiment(cmd: &str, e: Experiment) -> Error {
    Error::Config(format!("experiment '{}' is not handled by {cmd}", e.name()))
}

/// Reads a config; a missing `experiment` key selects `default`.
fn load(path: &Path, default: Option<Experiment>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let has_key = text
        .lines()
        .any(|l| l.trim_start().starts_with("experiment"));
    let text = match (has_key, default) {
        (false, Some(e)) => format!("experiment = {}\n{text}", e.name()),
        _ => text,
    };
    ExperimentConfig::parse(&text)
}

fn coeffs(out: &mut impl Write, l: usize, r: usize, complex: bool) -> Result<bool> {
    let (h, dc) = expand_dispersion_components(r, complex);
    let f = if complex {
        expand_nonlinearity_complex(l, r)
    } else {
        expand_nonlinearity(l, r)
    };
    for (j, (a, b)) in dc.a.iter().zip(&dc.b).enumerate() {
        writeln!(out, "a_{} = {a}", j + 1)?;
        writeln!(out, "b_{} = {b}", j + 1)?;
    }
    for (j, (hj, fj)) in h.iter().zip(&f).enumerate() {
        writeln!(out, "h_{}:\n{hj}", j + 1)?;
        writeln!(out, "F_{}:\n{fj}", j + 1)?;
    }
    Ok(true)
}

fn normalform(out: &mut impl Write, l: usize, r: usize, complex: bool) -> Result<bool> {
    let nf = if complex {
        normal_form_complex(l, r)?
    } else {
        normal_form(l, r)?
    };
    for (j, (z, chi)) in nf.z.iter().zip(&nf.chi).enumerate() {
        writeln!(out, "Z_{}:\n{z}", j + 1)?;
        writeln!(out, "chi_{}:\n{chi}", j + 1)?;
    }
    writeln!(out, "CERTIFIED={}", nf.certified())?;
    Ok(nf.certified())
}

fn evolve(out: &mut impl Write, cfg: &ExperimentConfig) -> Result<bool> {
    let run = exp_evolve(cfg)?;
    match &cfg.output {
        Some(p) => write_trajectory_csv(
            BufWriter::new(File::create(p)?),
            &run.trajectory,
            &run.modes,
        )?,
        None => write_trajectory_csv(&mut *out, &run.trajectory, &run.modes)?,
    }
    if let Some(p) = &cfg.snapshot {
        let mut w = BufWriter::new(File::create(p)?);
        write_trajectory_snapshots(&mut w, &run.trajectory)?;
        w.flush()?;
    }
    writeln!(
        out,
        "SYSTEM={} DT={:.6e} SAMPLES={} DRIFT={:.6e} PASS=true",
        cfg.system.name(),
        run.dt,
        run.trajectory.times.len(),
        run.trajectory.max_relative_drift()
    )?;
    Ok(true)
}

/// CSV to `output` (or stdout), optional `.dat`, notes on stderr, summary line on stdout.
fn emit(out: &mut impl Write, cfg: &ExperimentConfig, rep: &ConvergenceReport) -> Result<bool> {
    match &cfg.output {
        Some(p) => rep.write_csv(BufWriter::new(File::create(p)?))?,
        None => rep.write_csv(&mut *out)?,
    }
    if let Some(p) = &cfg.dat {
        rep.write_dat(BufWriter::new(File::create(p)?))?;
    }
    for n in &rep.notes {
        eprintln!("# {n}");
    }
    writeln!(out, "{}", rep.summary_line())?;
    Ok(rep.pass())
}
