//! Numeric consistency checks between symbolic Hamiltonians and their compiled
//! evaluation: finite-difference gradients, the homological identity and the
//! gauge-average oracle.

use rand::Rng;

use super::compile::CompiledHamiltonian;
use super::gram::{FieldVar, PHI_BAR, PSI, PSI_BAR};
use super::normal_form::NormalForm;
use super::oracle::{numeric_gauge_average_oracle, numeric_gauge_average_oracle_pair};
use super::poly::HamPoly;
use crate::error::Result;
use crate::grid::{Field, FieldPair, Grid, C64};
use crate::multipliers::PhysicalParams;

fn physical_vars(two: bool, psi: &Field, phi: Option<&Field>) -> [Vec<C64>; 4] {
    let conj = |f: &Field| f.values().iter().map(|z| z.conj()).collect::<Vec<_>>();
    let zeros = vec![C64::new(0.0, 0.0); psi.values().len()];
    match (two, phi) {
        (true, Some(p)) => [
            psi.values().to_vec(),
            conj(psi),
            p.values().to_vec(),
            conj(p),
        ],
        _ => [psi.values().to_vec(), conj(psi), zeros.clone(), zeros],
    }
}

fn slots(v: &[Vec<C64>; 4], two: bool) -> [Option<&[C64]>; 4] {
    if two {
        [Some(&v[0]), Some(&v[1]), Some(&v[2]), Some(&v[3])]
    } else {
        [Some(&v[0]), Some(&v[1]), None, None]
    }
}

/// Relative mismatch between the compiled vector field of `h` and a central
/// difference of `H` along a random direction in each conjugate slot.
///
/// The slots are perturbed independently, so the check covers non-real `H`.
pub fn gradient_fd_error<R: Rng>(
    h: &HamPoly,
    grid: &Grid,
    params: &PhysicalParams,
    rng: &mut R,
) -> f64 {
    let two = h.uses_component_two();
    let mut compiled = CompiledHamiltonian::from_poly(h, grid, params.lambda);
    compiled.set_dealias(false);
    let psi = Field::random_bandlimited(grid, rng, 3, 0.5);
    let phi = Field::random_bandlimited(grid, rng, 3, 0.5);
    let base = physical_vars(two, &psi, Some(&phi));
    let (x_psi, x_phi) = if two {
        let v = compiled.vector_field_pair(&FieldPair {
            psi: psi.clone(),
            phi: phi.clone(),
        });
        (v.psi, Some(v.phi))
    } else {
        (compiled.vector_field(&psi), None)
    };
    let targets: Vec<(FieldVar, Field, C64)> = {
        // ∂H/∂ψ̄ = -i X_ψ and ∂H/∂φ̄ = i X_φ.
        let mut t = vec![(PSI_BAR, x_psi, C64::new(0.0, -1.0))];
        if let Some(x) = x_phi {
            t.push((PHI_BAR, x, C64::new(0.0, 1.0)));
        }
        t
    };
    let step = 1e-3;
    let mut worst = 0.0f64;
    for (var, x, factor) in targets {
        let eta = Field::random_bandlimited(grid, rng, 3, 0.5);
        let shifted = |s: f64| {
            let mut v = base.clone();
            for (a, e) in v[var.index()].iter_mut().zip(eta.values()) {
                *a += e * s;
            }
            compiled.value(&slots(&v, two))
        };
        // Fourth-order central difference.
        let fd = ((shifted(step) - shifted(-step)) * 8.0
            - (shifted(2.0 * step) - shifted(-2.0 * step)))
            / (12.0 * step);
        let pairing: C64 = x
            .values()
            .iter()
            .zip(eta.values())
            .map(|(g, e)| factor * g * e)
            .sum::<C64>()
            * grid.weight();
        let scale = pairing.norm().max(fd.norm()).max(1e-300);
        worst = worst.max((fd - pairing).norm() / scale);
    }
    worst
}

/// `{χ, h₀}` evaluated from compiled gradients: `∫ i ψ̄ ∂χ/∂ψ̄ - i ψ ∂χ/∂ψ`
/// (plus the opposite-sign terms on the second component).
pub fn bracket_with_h0_numeric(
    chi: &HamPoly,
    grid: &Grid,
    params: &PhysicalParams,
    psi: &Field,
    phi: Option<&Field>,
) -> C64 {
    let two = chi.uses_component_two() || phi.is_some();
    let mut compiled = CompiledHamiltonian::from_poly(chi, grid, params.lambda);
    compiled.set_dealias(false);
    let v = physical_vars(two, psi, phi);
    let s = slots(&v, two);
    let i = C64::new(0.0, 1.0);
    let pair = |x: usize, xbar: FieldVar, x_var: FieldVar, sigma: f64| -> C64 {
        let gbar = compiled.gradient(&s, xbar);
        let g = compiled.gradient(&s, x_var);
        let sum: C64 = (0..v[x].len())
            .map(|j| i * sigma * (v[x + 1][j] * gbar[j] - v[x][j] * g[j]))
            .sum();
        sum * grid.weight()
    };
    let mut total = pair(0, PSI_BAR, PSI, 1.0);
    if two {
        total += pair(2, PHI_BAR, super::gram::PHI, -1.0);
    }
    total
}

/// Relative size of `{χ₁, h₀} + G₁ - Z₁` on `samples` random fields, with
/// `G₁ = h₁ + F₁` and the bracket taken numerically.
pub fn homological_residual<R: Rng>(
    nf: &NormalForm,
    grid: &Grid,
    params: &PhysicalParams,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let two = nf.two_components;
    let mut f = CompiledHamiltonian::from_poly(&nf.h[0].add(&nf.f[0]), grid, params.lambda);
    f.set_dealias(false);
    let mut z = CompiledHamiltonian::from_poly(&nf.z[0], grid, params.lambda);
    z.set_dealias(false);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let psi = Field::random_bandlimited(grid, rng, 3, 0.5);
        let phi = Field::random_bandlimited(grid, rng, 3, 0.5);
        let (fv, zv, b) = if two {
            let pair = FieldPair {
                psi: psi.clone(),
                phi: phi.clone(),
            };
            (
                f.value_pair(&pair),
                z.value_pair(&pair),
                bracket_with_h0_numeric(&nf.chi[0], grid, params, &psi, Some(&phi)),
            )
        } else {
            (
                f.value_field(&psi),
                z.value_field(&psi),
                bracket_with_h0_numeric(&nf.chi[0], grid, params, &psi, None),
            )
        };
        let scale = fv.norm().max(zv.norm()).max(1e-300);
        worst = worst.max((b + fv - zv).norm() / scale);
    }
    worst
}

/// `|⟨H⟩(ψ) - oracle(ψ)|` for the symbolic gauge average against trapezoid
/// quadrature with `q = 2·max|grade| + 3` nodes.
pub fn oracle_gap<R: Rng>(
    h: &HamPoly,
    grid: &Grid,
    params: &PhysicalParams,
    rng: &mut R,
) -> Result<f64> {
    let q = (2 * h.max_grade() + 3) as usize;
    let avg = h.gauge_average();
    let mut compiled = CompiledHamiltonian::from_poly(&avg, grid, params.lambda);
    compiled.set_dealias(false);
    let psi = Field::random_bandlimited(grid, rng, 3, 0.5);
    if h.uses_component_two() {
        let phi = Field::random_bandlimited(grid, rng, 3, 0.5);
        let pair = FieldPair { psi, phi };
        let oracle = numeric_gauge_average_oracle_pair(h, &pair, params, q)?;
        Ok((compiled.value_pair(&pair) - oracle).norm())
    } else {
        let oracle = numeric_gauge_average_oracle(h, &psi, params, q)?;
        Ok((compiled.value_field(&psi) - oracle).norm())
    }
}
