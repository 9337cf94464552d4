//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected. Lists are comma separated.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{make_grid, Field, Grid, C64};
use crate::propagators::SystemKind;

/// Experiment selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    LinearLongtime,
    NonlinearLocuniform,
    TransformGain,
    GlobalBound,
    ScalingIdentity,
    GalerkinTail,
    Evolve,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::LinearLongtime,
        Experiment::NonlinearLocuniform,
        Experiment::TransformGain,
        Experiment::GlobalBound,
        Experiment::ScalingIdentity,
        Experiment::GalerkinTail,
        Experiment::Evolve,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LinearLongtime => "linear_longtime",
            Experiment::NonlinearLocuniform => "nonlinear_locuniform",
            Experiment::TransformGain => "transform_gain",
            Experiment::GlobalBound => "global_bound",
            Experiment::ScalingIdentity => "scaling_identity",
            Experiment::GalerkinTail => "galerkin_tail",
            Experiment::Evolve => "evolve",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Initial datum family; every family is scaled by `amplitude`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Datum {
    /// `e^{ix₁} + ½ e^{-2ix₁}`.
    TwoMode,
    /// Seeded random field with modes `|k_a| ≤ 4` and unit L² norm.
    Random,
    /// `exp(cos x₁ - 1)` summed over axes, a smooth periodic bump.
    Bump,
    /// `1/(1.2 - cos x₁)`, analytic with geometric Fourier decay.
    Galerkin,
}

impl FromStr for Datum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_mode" => Ok(Datum::TwoMode),
            "random" => Ok(Datum::Random),
            "bump" => Ok(Datum::Bump),
            "galerkin" => Ok(Datum::Galerkin),
            _ => Err(Error::Config(format!("unknown datum '{s}'"))),
        }
    }
}

impl Datum {
    pub fn name(&self) -> &'static str {
        match self {
            Datum::TwoMode => "two_mode",
            Datum::Random => "random",
            Datum::Bump => "bump",
            Datum::Galerkin => "galerkin",
        }
    }

    /// Samples the datum on `grid`, using coordinates scaled to period `2π`.
    pub fn sample(&self, grid: &Grid, amplitude: f64, seed: u64) -> Field {
        use rand::SeedableRng;
        let s = 2.0 * std::f64::consts::PI / grid.length();
        let a = C64::new(amplitude, 0.0);
        match self {
            Datum::TwoMode => Field::from_fn(grid, |x| {
                a * (C64::from_polar(1.0, s * x[0]) + C64::from_polar(0.5, -2.0 * s * x[0]))
            }),
            Datum::Random => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                Field::random_bandlimited(grid, &mut rng, 4, amplitude)
            }
            Datum::Bump => Field::from_fn(grid, |x| {
                a * x.iter().map(|xi| ((s * xi).cos() - 1.0).exp()).sum::<f64>()
            }),
            Datum::Galerkin => Field::from_fn(grid, |x| a / (1.2 - (s * x[0]).cos())),
        }
    }
}

/// Injected error in one λ-homogeneous part of `Z₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fault {
    /// 0: `∫ψ̄Δ²ψ`, 1: `∫|ψ|²(ψ̄Δψ+ψΔψ̄)`, 2: `∫|ψ|⁶`.
    pub lambda_degree: u32,
    pub factor: f64,
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, factor) = match s.split_once(':') {
            Some((n, f)) => (
                n,
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("fault factor: {e}")))?,
            ),
            None => (s, 0.0),
        };
        let lambda_degree = match name.trim() {
            "dispersion" => 0,
            "derivative" => 1,
            "sextic" => 2,
            other => return Err(Error::Config(format!("unknown fault '{other}'"))),
        };
        Ok(Fault {
            lambda_degree,
            factor,
        })
    }
}

/// All experiment settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub c: Vec<f64>,
    pub r: usize,
    pub l: u32,
    pub lambda: f64,
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    /// Sobolev index of the error norm.
    pub k: f64,
    /// Base window `T₀`.
    pub t0: f64,
    /// User step-size cap; the dt policy may reduce it.
    pub dt: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub dat: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub amplitude: f64,
    pub datum: Datum,
    pub samples: usize,
    pub sigma: Vec<f64>,
    /// Cut-off levels for `galerkin_tail`.
    pub levels: Vec<u32>,
    pub system: SystemKind,
    pub t_end: f64,
    pub gauge_peeled: bool,
    pub fault: Option<Fault>,
    pub expected_slope: Option<f64>,
    pub tolerance: Option<f64>,
    pub residual_max: f64,
    pub guard: f64,
    /// Largest allowed `ω·dt` for the fastest nonlinear phase.
    pub phase_cap: f64,
    /// Largest sup-norm ratio allowed by `global_bound`.
    pub bound: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::LinearLongtime,
            c: vec![4.0, 8.0, 16.0, 32.0],
            r: 1,
            l: 2,
            lambda: 1.0,
            dim: 1,
            n: 256,
            length: 2.0 * std::f64::consts::PI,
            k: 2.0,
            t0: 1.0,
            dt: 0.01,
            seed: 0,
            output: None,
            dat: None,
            snapshot: None,
            amplitude: 0.1,
            datum: Datum::TwoMode,
            samples: 200,
            sigma: vec![1.0, 2.0],
            levels: vec![2, 3, 4, 5],
            system: SystemKind::Nlkg,
            t_end: 1.0,
            gauge_peeled: false,
            fault: None,
            expected_slope: None,
            tolerance: None,
            residual_max: 0.25,
            guard: 1e-6,
            phase_cap: 0.5,
            bound: 2.0,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| Error::Config(format!("{key}: cannot parse '{v}': {e}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',').map(|s| parse_num(key, s.trim())).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected a boolean, got '{v}'"
        ))),
    }
}

fn parse_length(v: &str) -> Result<f64> {
    let t = v.replace(' ', "");
    let pi = std::f64::consts::PI;
    if t == "pi" {
        return Ok(pi);
    }
    if let Some(m) = t
        .strip_suffix("pi")
        .and_then(|m| m.strip_suffix('*').or(Some(m)))
    {
        return Ok(parse_num::<f64>("length", m)? * pi);
    }
    parse_num("length", &t)
}

impl ExperimentConfig {
    /// Parses `key = value` lines over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = v.parse()?,
            "c" => self.c = parse_list(key, v)?,
            "r" => self.r = parse_num(key, v)?,
            "l" => self.l = parse_num(key, v)?,
            "lambda" => self.lambda = parse_num(key, v)?,
            "dim" => self.dim = parse_num(key, v)?,
            "n" => self.n = parse_num(key, v)?,
            "length" => self.length = parse_length(v)?,
            "k" => self.k = parse_num(key, v)?,
            "t0" => self.t0 = parse_num(key, v)?,
            "dt" => self.dt = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "dat" => self.dat = Some(PathBuf::from(v)),
            "snapshot" => self.snapshot = Some(PathBuf::from(v)),
            "amplitude" => self.amplitude = parse_num(key, v)?,
            "datum" => self.datum = v.parse()?,
            "samples" => self.samples = parse_num(key, v)?,
            "sigma" => self.sigma = parse_list(key, v)?,
            "levels" => self.levels = parse_list(key, v)?,
            "system" => self.system = v.parse()?,
            "t_end" => self.t_end = parse_num(key, v)?,
            "gauge_peeled" => self.gauge_peeled = parse_bool(key, v)?,
            "fault" => self.fault = if v == "none" { None } else { Some(v.parse()?) },
            "expected_slope" => self.expected_slope = Some(parse_num(key, v)?),
            "tolerance" => self.tolerance = Some(parse_num(key, v)?),
            "residual_max" => self.residual_max = parse_num(key, v)?,
            "guard" => self.guard = parse_num(key, v)?,
            "phase_cap" => self.phase_cap = parse_num(key, v)?,
            "bound" => self.bound = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Checks cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        let sweep = matches!(
            self.experiment,
            Experiment::LinearLongtime
                | Experiment::NonlinearLocuniform
                | Experiment::TransformGain
        );
        if sweep && self.c.len() < 3 {
            return Err(Error::Config(
                "c list needs at least 3 values for a slope fit".into(),
            ));
        }
        if self.c.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("c list must be strictly increasing".into()));
        }
        if self.c.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::Config("c values must be positive".into()));
        }
        if self.r < 1 {
            return Err(Error::Config("r must be >= 1".into()));
        }
        if self.l < 2 {
            return Err(Error::Config("l must be >= 2".into()));
        }
        if self.samples < 1 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.dim, self.n, self.length)
    }

    pub fn datum_field(&self, grid: &Grid) -> Field {
        self.datum.sample(grid, self.amplitude, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg = ExperimentConfig::parse(
            "# comment\nexperiment = nonlinear_locuniform\nc = 4, 8, 16\nlambda=0.5\nlength = 2pi\nfault = sextic:-8\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::NonlinearLocuniform);
        assert_eq!(cfg.c, vec![4.0, 8.0, 16.0]);
        assert_eq!(cfg.lambda, 0.5);
        assert!((cfg.length - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(
            cfg.fault,
            Some(Fault {
                lambda_degree: 2,
                factor: -8.0
            })
        );
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("c = 4, 8").is_err());
        assert!(ExperimentConfig::parse("c = 8, 4, 16").is_err());
        assert!(ExperimentConfig::parse("n = 100").is_err());
        assert!(ExperimentConfig::parse("just words").is_err());
    }

    #[test]
    fn default_datum_matches_two_mode_formula() {
        let cfg = ExperimentConfig::default();
        let g = cfg.grid().unwrap();
        let f = cfg.datum_field(&g);
        let k1 = g.mode_index(&[1]).unwrap();
        let km2 = g.mode_index(&[-2]).unwrap();
        let sc = (g.len() as f64).sqrt();
        assert!((f.spectral()[k1].re / sc - 0.1).abs() < 1e-14);
        assert!((f.spectral()[km2].re / sc - 0.05).abs() < 1e-14);
    }
}
