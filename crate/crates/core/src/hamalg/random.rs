//! Seeded random polynomial Hamiltonians for property checks.

use rand::Rng;

use super::coeff::{rat, Coeff};
use super::gram::{FieldVar, PHI, PHI_BAR, PSI, PSI_BAR};
use super::poly::{Factor, HamPoly, Monomial};

/// Shape of the random polynomials.
#[derive(Clone, Copy, Debug)]
pub struct RandomPolySpec {
    pub max_terms: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub max_lap: u32,
    pub two_components: bool,
}

impl Default for RandomPolySpec {
    fn default() -> Self {
        Self {
            max_terms: 4,
            min_degree: 1,
            max_degree: 6,
            max_lap: 1,
            two_components: false,
        }
    }
}

fn random_rat<R: Rng>(rng: &mut R) -> num_rational::BigRational {
    let p = rng.gen_range(-9..=9);
    let q = rng.gen_range(1..=8);
    rat(p, q)
}

/// Random sum of Laplacian monomials with Gaussian-rational coefficients.
pub fn random_hampoly<R: Rng>(rng: &mut R, spec: &RandomPolySpec) -> HamPoly {
    let vars: &[FieldVar] = if spec.two_components {
        &[PSI, PSI_BAR, PHI, PHI_BAR]
    } else {
        &[PSI, PSI_BAR]
    };
    let nterms = rng.gen_range(1..=spec.max_terms);
    let mut ms = Vec::with_capacity(nterms);
    for _ in 0..nterms {
        let deg = rng.gen_range(spec.min_degree..=spec.max_degree);
        let factors = (0..deg)
            .map(|_| {
                Factor::new(
                    vars[rng.gen_range(0..vars.len())],
                    rng.gen_range(0..=spec.max_lap),
                )
            })
            .collect();
        let coeff = Coeff::new(random_rat(rng), random_rat(rng));
        ms.push(Monomial::new(coeff, rng.gen_range(0..=1), factors));
    }
    HamPoly::from_monomials(&ms)
}
