//! ε-expansions of the relativistic dispersion and the smoothed nonlinearity.

use num_traits::{One, Zero};

use super::coeff::{binomial, rat, rat_int, real, Rat};
use super::gram::{FieldVar, Gram, SymPoly, PHI, PHI_BAR, PSI, PSI_BAR};
use super::poly::{Factor, HamPoly, Monomial, Origin};

/// Exact Taylor data: `a_j` for `c⟨∇⟩_c`, `b_j` for `(c/⟨∇⟩_c)^{1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionCoeffs {
    pub a: Vec<Rat>,
    pub b: Vec<Rat>,
}

impl DispersionCoeffs {
    /// `a_j = (-1)^j binom(1/2, j)`, `b_j = (-1)^j binom(-1/4, j)` for `j = 1..=r`.
    pub fn new(r: usize) -> Self {
        let sign = |j: usize| {
            if j.is_multiple_of(2) {
                Rat::one()
            } else {
                -Rat::one()
            }
        };
        let a = (1..=r)
            .map(|j| sign(j) * binomial(&rat(1, 2), j as u32))
            .collect();
        let b = (1..=r)
            .map(|j| sign(j) * binomial(&rat(-1, 4), j as u32))
            .collect();
        Self { a, b }
    }

    /// `b_j` including `b_0 = 1`.
    pub fn b_with_zero(&self, j: usize) -> Rat {
        if j == 0 {
            Rat::one()
        } else {
            self.b[j - 1].clone()
        }
    }
}

/// `h_j = a_j ∫ X̄ Δ^j X` for `j = 1..=r`, summed over the requested components.
pub fn expand_dispersion_components(
    r: usize,
    two_components: bool,
) -> (Vec<HamPoly>, DispersionCoeffs) {
    let coeffs = DispersionCoeffs::new(r);
    let hs = (1..=r)
        .map(|j| {
            let mut ms = vec![Monomial::new(
                real(coeffs.a[j - 1].clone()),
                0,
                vec![Factor::new(PSI_BAR, 0), Factor::new(PSI, j as u32)],
            )];
            if two_components {
                ms.push(Monomial::new(
                    real(coeffs.a[j - 1].clone()),
                    0,
                    vec![Factor::new(PHI_BAR, 0), Factor::new(PHI, j as u32)],
                ));
            }
            HamPoly::from_monomials(&ms).with_origin(Origin::Dispersion(j), j)
        })
        .collect();
    (hs, coeffs)
}

pub fn expand_dispersion(r: usize) -> (Vec<HamPoly>, DispersionCoeffs) {
    expand_dispersion_components(r, false)
}

/// Compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Prefactor `λ/(2^{l+1} l)` without the λ.
fn nonlinear_prefactor(l: usize) -> Rat {
    Rat::one() / rat_int((1i64 << (l + 1)) * l as i64)
}

/// Expands `K ∫ Π_i S(w_i)` where factor `i` ranges over `choices[i]`
/// and `S = Σ_k b_k ε^k Δ^k`; returns the ε^{j-1} parts for `j = 1..=r`.
fn expand_smoothed_product(
    choices: &[Vec<FieldVar>],
    weight: &Rat,
    r: usize,
    origin_base: usize,
) -> Vec<HamPoly> {
    let coeffs = DispersionCoeffs::new(r);
    let nf = choices.len();
    let mut out = Vec::with_capacity(r);
    for j in 1..=r {
        let mut h = HamPoly::new();
        for comp in compositions(j - 1, nf) {
            let mut w = weight.clone();
            let mut gram = Gram::one();
            let mut total = 0;
            for (i, &k) in comp.iter().enumerate() {
                w *= coeffs.b_with_zero(k);
                if k > 0 {
                    gram = gram.mul(&Gram(vec![((i as u8, i as u8), k as u32)]));
                    total += k;
                }
            }
            if w.is_zero() {
                continue;
            }
            if total % 2 == 1 {
                w = -w;
            }
            let mut poly = SymPoly::new();
            poly.insert(gram, Rat::one());
            let coeff = real(w);
            // Every assignment of kinds to factors.
            let mut idx = vec![0usize; nf];
            loop {
                let shape: Vec<FieldVar> = idx.iter().zip(choices).map(|(&k, c)| c[k]).collect();
                h.add_raw(1, &shape, &poly, &coeff);
                let mut a = 0;
                while a < nf {
                    idx[a] += 1;
                    if idx[a] < choices[a].len() {
                        break;
                    }
                    idx[a] = 0;
                    a += 1;
                }
                if a == nf {
                    break;
                }
            }
        }
        out.push(h.with_origin(Origin::Nonlinearity(origin_base + j - 1), j));
    }
    out
}

/// `F_1..F_r` of `λ/(2^{l+1} l) ∫ [S(ψ+ψ̄)]^{2l}`.
pub fn expand_nonlinearity(l: usize, r: usize) -> Vec<HamPoly> {
    let choices = vec![vec![PSI, PSI_BAR]; 2 * l];
    expand_smoothed_product(&choices, &nonlinear_prefactor(l), r, 1)
}

/// `F_1..F_r` of `λ/(2^{l+1} l) ∫ [(S(ψ+ψ̄))² + (S(φ+φ̄))²]^l`.
pub fn expand_nonlinearity_complex(l: usize, r: usize) -> Vec<HamPoly> {
    let mut total: Vec<HamPoly> = vec![HamPoly::new(); r];
    // Choose u² or v² for each of the l pairs; binomial multiplicities come out of the sum.
    for mask in 0..(1usize << l) {
        let mut choices = Vec::with_capacity(2 * l);
        for p in 0..l {
            let pair = if mask >> p & 1 == 0 {
                vec![PSI, PSI_BAR]
            } else {
                vec![PHI, PHI_BAR]
            };
            choices.push(pair.clone());
            choices.push(pair);
        }
        let parts = expand_smoothed_product(&choices, &nonlinear_prefactor(l), r, 1);
        for (t, p) in total.iter_mut().zip(parts) {
            t.add_assign(&p);
        }
    }
    total
        .into_iter()
        .enumerate()
        .map(|(j, h)| h.with_origin(Origin::Nonlinearity(j + 1), j + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::coeff::coeff_to_c64;
    use super::*;

    #[test]
    fn dispersion_coefficients() {
        let d = DispersionCoeffs::new(3);
        assert_eq!(d.a, vec![rat(-1, 2), rat(-1, 8), rat(-1, 16)]);
        assert_eq!(d.b, vec![rat(1, 4), rat(5, 32), rat(15, 128)]);
    }

    #[test]
    fn dispersion_matches_taylor_series_numerically() {
        // c(c²+x)^{1/2} = c² Σ binom(1/2,j) (x/c²)^j and Δ^j ↔ (-x)^j.
        let d = DispersionCoeffs::new(3);
        let x: f64 = 1e-2;
        let exact = (1.0 + x).sqrt();
        let mut approx = 1.0;
        for (j, a) in d.a.iter().enumerate() {
            let aj = coeff_to_c64(&real(a.clone())).re;
            approx += aj * (-x).powi(j as i32 + 1);
        }
        assert!((exact - approx).abs() < 1e-9);
        let exact_s = (1.0 + x).powf(-0.25);
        let mut approx_s = 1.0;
        for (j, b) in d.b.iter().enumerate() {
            approx_s += coeff_to_c64(&real(b.clone())).re * (-x).powi(j as i32 + 1);
        }
        assert!((exact_s - approx_s).abs() < 1e-8);
    }

    #[test]
    fn quartic_has_binomial_coefficients() {
        let f = expand_nonlinearity(2, 1).remove(0);
        assert_eq!(f.len(), 5);
        let mut coeffs: Vec<Rat> = f.terms().map(|(_, c)| c.re.clone() * rat_int(16)).collect();
        coeffs.sort();
        assert_eq!(
            coeffs,
            vec![rat_int(1), rat_int(1), rat_int(4), rat_int(4), rat_int(6)]
        );
    }

    #[test]
    fn binomial_sum_at_constant_field() {
        for l in 2..=4 {
            let f = expand_nonlinearity(l, 1).remove(0);
            let s: Rat = f.terms().map(|(_, c)| c.re.clone()).sum();
            let expected = nonlinear_prefactor(l) * rat_int(1i64 << (2 * l));
            assert_eq!(s, expected);
        }
    }

    #[test]
    fn second_order_quartic_has_one_laplacian() {
        let f2 = expand_nonlinearity(2, 2).remove(1);
        assert!(f2.terms().all(|(t, _)| t.gram.degree() == 1));
        let f1 = expand_nonlinearity(2, 2).remove(0);
        assert!(f1.terms().all(|(t, _)| t.gram.is_one()));
    }

    #[test]
    fn complex_quartic_at_phi_zero_is_real_quartic() {
        let fc = expand_nonlinearity_complex(2, 1).remove(0);
        let only_psi = fc.filter(|t| t.shape.iter().all(|v| v.comp == 1));
        assert_eq!(only_psi, expand_nonlinearity(2, 1).remove(0));
    }
}
