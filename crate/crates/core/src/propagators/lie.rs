//! The canonical change of variables `T⁽¹⁾`: the time-one flow of `ε χ₁`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, C64};
use crate::hamalg::{normal_form, CompiledHamiltonian, HamPoly};
use crate::multipliers::PhysicalParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Compiled generator together with the substep refinement policy.
pub struct LieTransform {
    grid: Grid,
    generator: CompiledHamiltonian,
    pub initial_substeps: usize,
    pub max_refinements: usize,
    /// Relative change between successive refinements accepted as converged.
    pub tolerance: f64,
}

impl LieTransform {
    /// `T⁽¹⁾` for real NLKG with power `l`, generator `ε χ₁`.
    pub fn first_order(grid: &Grid, params: &PhysicalParams) -> Result<Self> {
        let nf = normal_form(params.l as usize, 1)?;
        Ok(Self::from_generator(grid, params, &nf.chi[0], params.eps()))
    }

    /// Time-one flow of `scale · χ`.
    pub fn from_generator(grid: &Grid, params: &PhysicalParams, chi: &HamPoly, scale: f64) -> Self {
        let mut generator = CompiledHamiltonian::new(grid, params.lambda);
        generator.add(chi, Complex64::new(scale, 0.0));
        Self {
            grid: grid.clone(),
            generator,
            initial_substeps: 4,
            max_refinements: 10,
            tolerance: 1e-13,
        }
    }

    fn rhs(&self, x: &[C64], sign: f64) -> Vec<C64> {
        let mut v = self.generator.rhs_spectral(&[x]).remove(0);
        for z in v.iter_mut() {
            *z *= sign;
        }
        v
    }

    fn integrate(&self, x0: &[C64], sign: f64, m: usize) -> Vec<C64> {
        let h = 1.0 / m as f64;
        let mut x = x0.to_vec();
        let add = |a: &[C64], s: f64, b: &[C64]| -> Vec<C64> {
            a.iter().zip(b).map(|(p, q)| p + q * s).collect()
        };
        for _ in 0..m {
            let k1 = self.rhs(&x, sign);
            let k2 = self.rhs(&add(&x, 0.5 * h, &k1), sign);
            let k3 = self.rhs(&add(&x, 0.5 * h, &k2), sign);
            let k4 = self.rhs(&add(&x, h, &k3), sign);
            for i in 0..x.len() {
                x[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
        }
        x
    }

    /// Applies the transform to spectral coefficients, doubling the number of
    /// substeps until two successive results agree.
    pub fn apply_spectral(&self, x0: &[C64], direction: Direction) -> Result<Vec<C64>> {
        if x0.len() != self.grid.len() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                got: x0.len(),
            });
        }
        let sign = match direction {
            Direction::Forward => 1.0,
            Direction::Inverse => -1.0,
        };
        if self.generator.is_empty() {
            return Ok(x0.to_vec());
        }
        let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = norm(x0).max(f64::MIN_POSITIVE);
        let mut m = self.initial_substeps.max(1);
        let mut prev = self.integrate(x0, sign, m);
        let mut change = f64::INFINITY;
        for _ in 0..self.max_refinements {
            m *= 2;
            let next = self.integrate(x0, sign, m);
            change = next
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / scale;
            prev = next;
            if change <= self.tolerance {
                return Ok(prev);
            }
        }
        Err(Error::NonConvergence {
            refinements: self.max_refinements,
            change,
        })
    }

    pub fn apply(&self, f: &Field, direction: Direction) -> Result<Field> {
        let out = self.apply_spectral(f.spectral(), direction)?;
        Field::from_spectral(&self.grid, out)
    }
}

/// `T⁽¹⁾(ψ)` or its inverse for real NLKG parameters.
pub fn lie_transform(f: &Field, params: &PhysicalParams, direction: Direction) -> Result<Field> {
    LieTransform::first_order(f.grid(), params)?.apply(f, direction)
}
