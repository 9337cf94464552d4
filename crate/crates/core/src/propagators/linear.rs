//! Exact diagonal flows of the linear Klein-Gordon equation and of its
//! truncated nonrelativistic expansions.

use crate::grid::{Field, Grid, C64};
use crate::multipliers::{kinetic_part, truncated_kinetic, Multiplier};

/// `exp(i t c⟨∇⟩_c) ψ₀`.
pub fn kg_linear_flow(psi0: &Field, c: f64, t: f64) -> Field {
    Multiplier::kg_phase(c, t).apply(psi0)
}

/// `exp(i t σ_r(D)) ψ₀` with `σ_r = c² Σ_{j≤r} binom(1/2,j)(|ξ|²/c²)^j`.
pub fn ur_linear_flow(psi0: &Field, c: f64, r: usize, t: f64) -> Field {
    Multiplier::ur_phase(c, r, t).apply(psi0)
}

/// Frequencies `ω(ξ) - c²` of `c⟨ξ⟩_c`, one per mode.
pub fn kg_kinetic_table(grid: &Grid, c: f64) -> Vec<f64> {
    grid.xi2().iter().map(|&x2| kinetic_part(c, x2)).collect()
}

/// Frequencies `σ_r(ξ) - c²`, one per mode.
pub fn ur_kinetic_table(grid: &Grid, c: f64, r: usize) -> Vec<f64> {
    grid.xi2()
        .iter()
        .map(|&x2| truncated_kinetic(c, x2, r))
        .collect()
}

/// Multiplies spectral coefficients by `exp(i t (shift + ω))`, splitting off
/// the large common phase so it is evaluated once.
pub fn apply_phase(spec: &mut [C64], omega: &[f64], shift: f64, t: f64) {
    let common = C64::from_polar(1.0, shift * t);
    for (v, &w) in spec.iter_mut().zip(omega) {
        *v *= common * C64::from_polar(1.0, w * t);
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
    fn zero_mode_phase_and_identity() {
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        let one = Field::from_fn(&g, |_| C64::new(1.0, 0.0));
        let (c, t) = (3.0, 0.7);
        let out = kg_linear_flow(&one, c, t);
        let expected = C64::from_polar(1.0, t * c * c);
        assert!(out.values().iter().all(|z| (z - expected).norm() < 1e-12));
        for r in 1..=3 {
            let out = ur_linear_flow(&one, c, r, t);
            assert!(out.values().iter().all(|z| (z - expected).norm() < 1e-12));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Field::random_bandlimited(&g, &mut rng, 7, 1.0);
        assert!(kg_linear_flow(&f, c, 0.0).sub(&f).unwrap().norm_l2() < 1e-14);
    }

    #[test]
    fn schrodinger_phase_at_first_order() {
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        let w = Field::from_fn(&g, |x| C64::from_polar(1.0, 2.0 * x[0]));
        let (c, t) = (5.0, 0.3);
        let out = ur_linear_flow(&w, c, 1, t);
        let phase = C64::from_polar(1.0, t * (c * c + 2.0));
        for (a, b) in out.values().iter().zip(w.values()) {
            assert!((a - phase * b).norm() < 1e-12);
        }
    }

    #[test]
    fn group_law_and_reversibility() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Field::random_bandlimited(&g, &mut rng, 6, 1.0);
        let c = 4.0;
        let a = kg_linear_flow(&kg_linear_flow(&f, c, 0.3), c, 0.45);
        let b = kg_linear_flow(&f, c, 0.75);
        assert!(a.sub(&b).unwrap().norm_l2() < 1e-12);
        let back = ur_linear_flow(&ur_linear_flow(&f, c, 2, 1.3), c, 2, -1.3);
        assert!(back.sub(&f).unwrap().norm_l2() < 1e-12);
        assert!((kg_linear_flow(&f, c, 10.0).norm_l2() - f.norm_l2()).abs() < 1e-12);
    }
}
