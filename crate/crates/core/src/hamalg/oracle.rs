//! Numeric gauge averaging by trapezoid quadrature over the phase circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::compile::CompiledHamiltonian;
use super::poly::HamPoly;
use crate::error::{Error, Result};
use crate::grid::{Field, FieldPair, C64};
use crate::multipliers::PhysicalParams;

fn check_q(h: &HamPoly, q: usize) -> Result<()> {
    let grade = h.max_grade();
    if q < (2 * grade + 1) as usize {
        return Err(Error::QuadratureTooSmall { q, grade });
    }
    Ok(())
}

/// `(1/Q) Σ_q H(e^{it_q}ψ, e^{-it_q}ψ̄)`, `t_q = 2πq/Q`. Exact once `Q ≥ 2·max|grade| + 1`.
pub fn numeric_gauge_average_oracle(
    h: &HamPoly,
    psi: &Field,
    params: &PhysicalParams,
    q: usize,
) -> Result<C64> {
    check_q(h, q)?;
    let compiled = CompiledHamiltonian::from_poly(h, psi.grid(), params.lambda);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..q {
        let t = 2.0 * PI * k as f64 / q as f64;
        let rotated = psi.scale(Complex64::from_polar(1.0, t));
        acc += compiled.value_field(&rotated);
    }
    Ok(acc / q as f64)
}

/// Two-component version; `φ` rotates with the opposite phase.
pub fn numeric_gauge_average_oracle_pair(
    h: &HamPoly,
    pair: &FieldPair,
    params: &PhysicalParams,
    q: usize,
) -> Result<C64> {
    check_q(h, q)?;
    let compiled = CompiledHamiltonian::from_poly(h, pair.grid(), params.lambda);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..q {
        let t = 2.0 * PI * k as f64 / q as f64;
        let rotated = FieldPair {
            psi: pair.psi.scale(Complex64::from_polar(1.0, t)),
            phi: pair.phi.scale(Complex64::from_polar(1.0, -t)),
        };
        acc += compiled.value_pair(&rotated);
    }
    Ok(acc / q as f64)
}
