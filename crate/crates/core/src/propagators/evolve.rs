//! Trajectories: stepping to `t_end`, sampling, and conservation logs.

use super::lawson::LawsonStepper;
use super::system::{EvolutionSpec, State, System};
use crate::error::{Error, Result};
use crate::grid::{Grid, C64};

/// Samples of one time integration in the lab frame.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub hamiltonian: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    /// `max_t |H(t) - H(0)| / |H(0)|`.
    pub fn max_relative_drift(&self) -> f64 {
        let h0 = self.hamiltonian[0];
        self.hamiltonian
            .iter()
            .map(|h| (h - h0).abs() / h0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Moves a state from the integration frame to the lab frame at time `t`.
fn to_lab(system: &System, state: &[Vec<C64>], t: f64) -> State {
    let comps = state
        .iter()
        .enumerate()
        .map(|(comp, s)| {
            let phase = C64::from_polar(1.0, system.peeled_shift(comp) * t);
            s.iter().map(|z| z * phase).collect()
        })
        .collect();
    State { comps }
}

/// Diagonal linear flow evaluated exactly at time `t`.
fn linear_exact(system: &System, init: &State, t: f64) -> State {
    let comps = init
        .comps
        .iter()
        .enumerate()
        .map(|(comp, s)| {
            let common = C64::from_polar(
                1.0,
                system.params().c.powi(2) * t * if comp == 0 { 1.0 } else { -1.0 },
            );
            s.iter()
                .zip(system.omega(comp))
                .map(|(z, &w)| z * common * C64::from_polar(1.0, w * t))
                .collect()
        })
        .collect();
    State { comps }
}

/// Integrates `init` (lab frame) according to `spec`.
pub fn evolve(grid: &Grid, spec: &EvolutionSpec, init: &State) -> Result<Trajectory> {
    let system = System::new(grid, spec)?;
    evolve_system(&system, spec, init)
}

/// As [`evolve`] with a prebuilt system.
pub fn evolve_system(system: &System, spec: &EvolutionSpec, init: &State) -> Result<Trajectory> {
    if init.comps.len() != system.components() {
        return Err(Error::InvalidParameter(format!(
            "{} expects {} components, got {}",
            system.kind(),
            system.components(),
            init.comps.len()
        )));
    }
    let grid = system.grid().clone();
    for c in &init.comps {
        if c.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: c.len(),
            });
        }
    }
    let steps = spec.steps()?;
    let every = spec.sample_every.max(1);
    let w = grid.weight();
    let mut traj = Trajectory {
        grid: grid.clone(),
        times: vec![],
        states: vec![],
        hamiltonian: vec![],
        mass: vec![],
    };
    let mut record = |t: f64, s: State, h: f64| {
        traj.mass.push(s.norm_l2(w).powi(2));
        traj.times.push(t);
        traj.states.push(s);
        traj.hamiltonian.push(h);
    };
    if system.is_linear() {
        let h = system.hamiltonian(&init.comps);
        record(0.0, init.clone(), h);
        for k in 1..=steps {
            if k % every == 0 || k == steps {
                let t = k as f64 * spec.dt;
                let s = linear_exact(system, init, t);
                let hk = system.hamiltonian(&s.comps);
                record(t, s, hk);
            }
        }
        return Ok(traj);
    }
    let stepper = LawsonStepper::new(system, spec.dt);
    // Integration frame coincides with the lab frame at t = 0.
    let mut u = init.comps.clone();
    let mut h_prev = system.hamiltonian(&u);
    record(0.0, init.clone(), h_prev);
    for k in 1..=steps {
        u = stepper.step(&u);
        let t = k as f64 * spec.dt;
        let sample = k % every == 0 || k == steps;
        if spec.guard.is_some() || sample {
            let lab = to_lab(system, &u, t);
            let h = system.hamiltonian(&lab.comps);
            if let Some(guard) = spec.guard {
                let drift = (h - h_prev).abs() / h_prev.abs().max(f64::MIN_POSITIVE);
                if !drift.is_finite() || drift > guard {
                    return Err(Error::StepRejected { t, drift, guard });
                }
            }
            h_prev = h;
            if sample {
                record(t, lab, h);
            }
        }
    }
    Ok(traj)
}
