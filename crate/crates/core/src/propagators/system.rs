//! Right-hand sides of the evolution equations in the form
//! `∂_t X̂ = i ω(ξ) X̂ + N(X)`, with the diagonal part kept separate.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::linear::{kg_kinetic_table, ur_kinetic_table};
use crate::error::{Error, Result};
use crate::grid::{Field, FieldPair, Grid, C64};
use crate::hamalg::coeff::coeff_to_c64;
use crate::hamalg::{normal_form, normal_form_complex, CompiledHamiltonian, HamPoly, NormalForm};
use crate::multipliers::{Multiplier, PhysicalParams};

/// Which equation to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    KgLinear,
    UrLinear,
    Nlkg,
    NfOrder1,
    NfOrder2,
    NlkgComplex,
    NfComplexOrder1,
}

impl SystemKind {
    pub const ALL: [SystemKind; 7] = [
        SystemKind::KgLinear,
        SystemKind::UrLinear,
        SystemKind::Nlkg,
        SystemKind::NfOrder1,
        SystemKind::NfOrder2,
        SystemKind::NlkgComplex,
        SystemKind::NfComplexOrder1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::KgLinear => "kg_linear",
            SystemKind::UrLinear => "u_r_linear",
            SystemKind::Nlkg => "nlkg",
            SystemKind::NfOrder1 => "nf_order1",
            SystemKind::NfOrder2 => "nf_order2",
            SystemKind::NlkgComplex => "nlkg_complex",
            SystemKind::NfComplexOrder1 => "nf_complex_order1",
        }
    }

    pub fn components(&self) -> usize {
        match self {
            SystemKind::NlkgComplex | SystemKind::NfComplexOrder1 => 2,
            _ => 1,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, SystemKind::KgLinear | SystemKind::UrLinear)
    }

    /// Normal-form systems commute with the gauge flow, so the `e^{ic²t}` phase may be factored out.
    pub fn is_gauge_invariant(&self) -> bool {
        !matches!(self, SystemKind::Nlkg | SystemKind::NlkgComplex)
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown system '{s}'")))
    }
}

/// Parameters of one time integration.
#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    pub system: SystemKind,
    pub params: PhysicalParams,
    /// Truncation order for `u_r_linear`.
    pub r: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Integrate in the frame rotating with `e^{ic²t}`; samples are still reported in the lab frame.
    pub gauge_peeled: bool,
    /// Record every `sample_every` steps (the final state is always recorded).
    pub sample_every: usize,
    /// Largest relative Hamiltonian change allowed in one step.
    pub guard: Option<f64>,
    pub dealias: bool,
}

impl EvolutionSpec {
    pub fn new(system: SystemKind, params: PhysicalParams, dt: f64, t_end: f64) -> Self {
        Self {
            system,
            params,
            r: 1,
            dt,
            t_end,
            gauge_peeled: false,
            sample_every: 1,
            guard: Some(1e-6),
            dealias: true,
        }
    }

    /// Number of steps; `dt` must divide `t_end` up to rounding.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} does not divide t_end = {}",
                self.dt, self.t_end
            )));
        }
        Ok(n as usize)
    }
}

/// Spectral coefficients of each component.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub comps: Vec<Vec<C64>>,
}

impl State {
    pub fn from_field(f: &Field) -> Self {
        Self {
            comps: vec![f.transform()],
        }
    }

    pub fn from_pair(p: &FieldPair) -> Self {
        Self {
            comps: vec![p.psi.transform(), p.phi.transform()],
        }
    }

    pub fn field(&self, grid: &Grid, comp: usize) -> Field {
        Field::from_spectral(grid, self.comps[comp].clone()).expect("grid length")
    }

    pub fn pair(&self, grid: &Grid) -> FieldPair {
        FieldPair {
            psi: self.field(grid, 0),
            phi: self.field(grid, 1),
        }
    }

    /// `(Σ_comps ∫|X|²)^{1/2}` with quadrature weight `w`.
    pub fn norm_l2(&self, weight: f64) -> f64 {
        (weight
            * self
                .comps
                .iter()
                .flatten()
                .map(|z| z.norm_sqr())
                .sum::<f64>())
        .sqrt()
    }

    pub fn distance(&self, other: &State, weight: f64) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()))
            .sum();
        (weight * s).sqrt()
    }
}

enum Nonlinear {
    None,
    /// `i(λ/2^l) S[(2 Re Sψ)^{2l-1}]`.
    Nlkg {
        s: Vec<f64>,
    },
    /// `±i(λ/2^l) S[ρ^{l-1} U]` per component, `ρ = U² + V²`.
    NlkgComplex {
        s: Vec<f64>,
    },
    Compiled(Box<CompiledHamiltonian>),
}

/// A concrete system on a grid, ready to be stepped.
pub struct System {
    kind: SystemKind,
    grid: Grid,
    params: PhysicalParams,
    /// Per component: `ω(ξ) - σ c²` where `σ = ±1` is the component sign.
    omega: Vec<Vec<f64>>,
    peeled: bool,
    nonlinear: Nonlinear,
    keep: Vec<bool>,
    dealias: bool,
}

fn sigma(comp: usize) -> f64 {
    if comp == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_m a_m (-|ξ|²)^m` from the quadratic part of a normal-form Hamiltonian.
fn quadratic_symbol(
    grid: &Grid,
    parts: &[(f64, &std::collections::BTreeMap<u32, crate::hamalg::Coeff>)],
) -> Vec<f64> {
    grid.xi2()
        .iter()
        .map(|&x2| {
            parts
                .iter()
                .map(|(scale, map)| {
                    map.iter()
                        .map(|(&m, a)| scale * coeff_to_c64(a).re * (-x2).powi(m as i32))
                        .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

impl System {
    pub fn new(grid: &Grid, spec: &EvolutionSpec) -> Result<Self> {
        let nf = match spec.system {
            SystemKind::NfOrder1 => Some(normal_form(spec.params.l as usize, 1)?),
            SystemKind::NfOrder2 => Some(normal_form(spec.params.l as usize, 2)?),
            SystemKind::NfComplexOrder1 => Some(normal_form_complex(spec.params.l as usize, 1)?),
            _ => None,
        };
        Self::with_normal_form(grid, spec, nf.as_ref())
    }

    /// As [`System::new`] but reusing a precomputed normal form for nf systems.
    pub fn with_normal_form(
        grid: &Grid,
        spec: &EvolutionSpec,
        nf: Option<&NormalForm>,
    ) -> Result<Self> {
        let p = spec.params;
        if spec.gauge_peeled && !spec.system.is_gauge_invariant() {
            return Err(Error::InvalidParameter(format!(
                "{} is not gauge invariant; gauge peeling is unavailable",
                spec.system
            )));
        }
        let c = p.c;
        let smoothing = || -> Vec<f64> {
            Multiplier::smoothing(c, 0.5)
                .table(grid)
                .iter()
                .map(|z| z.re)
                .collect()
        };
        let (omega, nonlinear) = match spec.system {
            SystemKind::KgLinear => (vec![kg_kinetic_table(grid, c)], Nonlinear::None),
            SystemKind::UrLinear => {
                if spec.r < 1 {
                    return Err(Error::InvalidParameter("r must be >= 1".into()));
                }
                (vec![ur_kinetic_table(grid, c, spec.r)], Nonlinear::None)
            }
            SystemKind::Nlkg => (
                vec![kg_kinetic_table(grid, c)],
                Nonlinear::Nlkg { s: smoothing() },
            ),
            SystemKind::NlkgComplex => {
                let k = kg_kinetic_table(grid, c);
                let neg: Vec<f64> = k.iter().map(|w| -w).collect();
                (vec![k, neg], Nonlinear::NlkgComplex { s: smoothing() })
            }
            SystemKind::NfOrder1 | SystemKind::NfOrder2 | SystemKind::NfComplexOrder1 => {
                let nf =
                    nf.ok_or_else(|| Error::InvalidParameter("normal form required".into()))?;
                let order = if spec.system == SystemKind::NfOrder2 {
                    2
                } else {
                    1
                };
                if nf.z.len() < order
                    || nf.two_components != (spec.system.components() == 2)
                    || nf.l != p.l as usize
                {
                    return Err(Error::InvalidParameter(
                        "normal form does not match the system".into(),
                    ));
                }
                let eps = p.eps();
                let mut compiled = CompiledHamiltonian::new(grid, p.lambda);
                compiled.set_dealias(spec.dealias);
                let mut quads = Vec::new();
                for j in 1..=order {
                    let (lin, rest) = nf.z[j - 1].split_quadratic();
                    let scale = eps.powi(j as i32 - 1);
                    compiled.add(&rest, Complex64::new(scale, 0.0));
                    quads.push((scale, lin));
                }
                let omega = (0..spec.system.components())
                    .map(|comp| {
                        let parts: Vec<(f64, &_)> =
                            quads.iter().map(|(s, lin)| (*s, &lin[comp])).collect();
                        quadratic_symbol(grid, &parts)
                            .into_iter()
                            .map(|w| sigma(comp) * w)
                            .collect()
                    })
                    .collect();
                (omega, Nonlinear::Compiled(Box::new(compiled)))
            }
        };
        Ok(Self {
            kind: spec.system,
            grid: grid.clone(),
            params: p,
            omega,
            peeled: spec.gauge_peeled,
            nonlinear,
            keep: grid.dealias_mask().to_vec(),
            dealias: spec.dealias,
        })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn components(&self) -> usize {
        self.omega.len()
    }

    /// The common phase rate `σ c²` of component `comp` in the integration frame.
    pub fn frame_shift(&self, comp: usize) -> f64 {
        if self.peeled {
            0.0
        } else {
            sigma(comp) * self.params.c * self.params.c
        }
    }

    /// Phase rate that converts integration-frame states back to the lab frame.
    pub fn peeled_shift(&self, comp: usize) -> f64 {
        if self.peeled {
            sigma(comp) * self.params.c * self.params.c
        } else {
            0.0
        }
    }

    pub fn omega(&self, comp: usize) -> &[f64] {
        &self.omega[comp]
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.nonlinear, Nonlinear::None)
    }

    fn finish(&self, mut v: Vec<C64>, factor: C64) -> Vec<C64> {
        for (x, &k) in v.iter_mut().zip(&self.keep) {
            *x = if k || !self.dealias {
                *x * factor
            } else {
                C64::new(0.0, 0.0)
            };
        }
        v
    }

    /// Nonlinear part `N(X)` of the right-hand side on spectral input.
    pub fn nonlinear(&self, state: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let l = self.params.l as i32;
        let coef = self.params.lambda / 2f64.powi(l);
        match &self.nonlinear {
            Nonlinear::None => state
                .iter()
                .map(|s| vec![C64::new(0.0, 0.0); s.len()])
                .collect(),
            Nonlinear::Nlkg { s } => {
                let mut w: Vec<C64> = state[0].iter().zip(s).map(|(p, s)| p * s).collect();
                self.grid.inverse(&mut w);
                for v in w.iter_mut() {
                    *v = C64::new((2.0 * v.re).powi(2 * l - 1), 0.0);
                }
                self.grid.forward(&mut w);
                for (v, s) in w.iter_mut().zip(s) {
                    *v *= s;
                }
                vec![self.finish(w, C64::new(0.0, coef))]
            }
            Nonlinear::NlkgComplex { s } => {
                let mut a: Vec<C64> = state[0].iter().zip(s).map(|(p, s)| p * s).collect();
                let mut b: Vec<C64> = state[1].iter().zip(s).map(|(p, s)| p * s).collect();
                self.grid.inverse(&mut a);
                self.grid.inverse(&mut b);
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let (u, v) = (2.0 * x.re, 2.0 * y.re);
                    let rho = (u * u + v * v).powi(l - 1);
                    *x = C64::new(rho * u, 0.0);
                    *y = C64::new(rho * v, 0.0);
                }
                self.grid.forward(&mut a);
                self.grid.forward(&mut b);
                for ((x, y), s) in a.iter_mut().zip(b.iter_mut()).zip(s) {
                    *x *= s;
                    *y *= s;
                }
                vec![
                    self.finish(a, C64::new(0.0, coef)),
                    self.finish(b, C64::new(0.0, -coef)),
                ]
            }
            Nonlinear::Compiled(h) => {
                let comps: Vec<&[C64]> = state.iter().map(|v| v.as_slice()).collect();
                h.rhs_spectral(&comps)
            }
        }
    }

    /// Conserved energy in the lab frame (the rest-energy term `c² ∫|X|²` included).
    pub fn hamiltonian(&self, state: &[Vec<C64>]) -> f64 {
        let w = self.grid.weight();
        let c2 = self.params.c * self.params.c;
        let mut h = 0.0;
        for (comp, s) in state.iter().enumerate() {
            let sg = sigma(comp);
            h += w * s
                .iter()
                .zip(&self.omega[comp])
                .map(|(z, om)| (c2 + sg * om) * z.norm_sqr())
                .sum::<f64>();
        }
        let l = self.params.l as i32;
        let pref = self.params.lambda / (2f64.powi(l + 1) * l as f64);
        match &self.nonlinear {
            Nonlinear::None => h,
            Nonlinear::Nlkg { s } => {
                let mut a: Vec<C64> = state[0].iter().zip(s).map(|(p, s)| p * s).collect();
                self.grid.inverse(&mut a);
                h + pref * w * a.iter().map(|v| (2.0 * v.re).powi(2 * l)).sum::<f64>()
            }
            Nonlinear::NlkgComplex { s } => {
                let mut a: Vec<C64> = state[0].iter().zip(s).map(|(p, s)| p * s).collect();
                let mut b: Vec<C64> = state[1].iter().zip(s).map(|(p, s)| p * s).collect();
                self.grid.inverse(&mut a);
                self.grid.inverse(&mut b);
                let sum: f64 = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (4.0 * (x.re * x.re + y.re * y.re)).powi(l))
                    .sum();
                h + pref * w * sum
            }
            Nonlinear::Compiled(ch) => {
                let grid = &self.grid;
                let field =
                    |i: usize| Field::from_spectral(grid, state[i].clone()).expect("grid length");
                let v = if state.len() == 1 {
                    ch.value_field(&field(0))
                } else {
                    ch.value_pair(&FieldPair {
                        psi: field(0),
                        phi: field(1),
                    })
                };
                h + v.re
            }
        }
    }

    /// Nonlinear part of a normal-form Hamiltonian as a symbolic object, for inspection.
    pub fn normal_form_nonlinearity(nf: &NormalForm, order: usize) -> HamPoly {
        let mut out = HamPoly::new();
        for j in 1..=order {
            out.add_assign(&nf.z_nonlinear(j));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn system_names_roundtrip() {
        for k in SystemKind::ALL {
            assert_eq!(k.name().parse::<SystemKind>().unwrap(), k);
        }
        assert!("nls".parse::<SystemKind>().is_err());
    }

    #[test]
    fn steps_must_divide() {
        let p = PhysicalParams::new(4.0, 1.0, 2).unwrap();
        assert_eq!(
            EvolutionSpec::new(SystemKind::Nlkg, p, 0.01, 1.0)
                .steps()
                .unwrap(),
            100
        );
        assert!(EvolutionSpec::new(SystemKind::Nlkg, p, 0.3, 1.0)
            .steps()
            .is_err());
        assert!(EvolutionSpec::new(SystemKind::Nlkg, p, -0.1, 1.0)
            .steps()
            .is_err());
        assert_eq!(
            EvolutionSpec::new(SystemKind::Nlkg, p, 0.1, 0.0)
                .steps()
                .unwrap(),
            0
        );
    }

    #[test]
    fn nlkg_gauge_peeling_rejected() {
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        let p = PhysicalParams::new(4.0, 1.0, 2).unwrap();
        let mut spec = EvolutionSpec::new(SystemKind::Nlkg, p, 0.01, 1.0);
        spec.gauge_peeled = true;
        assert!(System::new(&g, &spec).is_err());
    }

    #[test]
    fn nf_order2_linear_symbol_matches_expansion() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let p = PhysicalParams::new(4.0, 1.0, 2).unwrap();
        let sys = System::new(&g, &EvolutionSpec::new(SystemKind::NfOrder2, p, 0.01, 1.0)).unwrap();
        let ur = ur_kinetic_table(&g, 4.0, 2);
        for (a, b) in sys.omega(0).iter().zip(&ur) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn nlkg_nonlinearity_matches_hamiltonian_gradient() {
        // Directional derivative of H along δ equals 2 Re⟨∂H/∂ψ̄, δ⟩ = 2 Re⟨-i N, δ⟩.
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [
            SystemKind::Nlkg,
            SystemKind::NfOrder2,
            SystemKind::NlkgComplex,
            SystemKind::NfComplexOrder1,
        ] {
            let p = PhysicalParams::new(3.0, 0.7, 2).unwrap();
            let mut spec = EvolutionSpec::new(kind, p, 0.01, 1.0);
            spec.dealias = false;
            let sys = System::new(&g, &spec).unwrap();
            let nc = kind.components();
            let x: Vec<Vec<C64>> = (0..nc)
                .map(|_| Field::random_bandlimited(&g, &mut rng, 4, 1.0).transform())
                .collect();
            let d: Vec<Vec<C64>> = (0..nc)
                .map(|_| Field::random_bandlimited(&g, &mut rng, 4, 1.0).transform())
                .collect();
            let h = 1e-5;
            let shifted = |s: f64| -> Vec<Vec<C64>> {
                x.iter()
                    .zip(&d)
                    .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + q * s).collect())
                    .collect()
            };
            let fd = (sys.hamiltonian(&shifted(h)) - sys.hamiltonian(&shifted(-h))) / (2.0 * h);
            let n = sys.nonlinear(&x);
            let c2 = p.c * p.c;
            let mut pairing = 0.0;
            for comp in 0..nc {
                let sg = sigma(comp);
                for i in 0..g.len() {
                    // Full X_H = iσ ∂H/∂X̄ ⇒ ∂H/∂X̄ = -iσ X_H.
                    let xh = C64::new(0.0, 1.0) * (sg * c2 + sys.omega(comp)[i]) * x[comp][i]
                        + n[comp][i];
                    let grad = C64::new(0.0, -sg) * xh;
                    pairing += 2.0 * (grad.conj() * d[comp][i]).re * g.weight();
                }
            }
            assert!(
                (fd - pairing).abs() < 1e-6 * pairing.abs().max(1.0),
                "{kind}: {fd} vs {pairing}"
            );
        }
    }
}
