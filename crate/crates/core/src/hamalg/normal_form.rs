//! Order-r normal form by iterated Lie transforms.
//!
//! The rescaled Hamiltonian is `h₀ + Σ_j ε^j (h_j + F_j)`. Step `m` solves the
//! homological equation for the ε^m coefficient, pushes every coefficient
//! forward by `exp(ε^m {χ_m, ·})` truncated at order `r`, and records the
//! resonant ε^m part as `Z_m`.

use super::coeff::{factorial, Rat};
use super::expand::{
    expand_dispersion_components, expand_nonlinearity, expand_nonlinearity_complex,
    DispersionCoeffs,
};
use super::poly::{poisson_bracket, HamPoly, Origin};
use crate::error::{Error, Result};

/// Output of [`normal_form`].
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub l: usize,
    pub r: usize,
    pub two_components: bool,
    pub coeffs: DispersionCoeffs,
    /// `h_1..h_r`.
    pub h: Vec<HamPoly>,
    /// `F_1..F_r`.
    pub f: Vec<HamPoly>,
    /// `Z_1..Z_r`, all resonant.
    pub z: Vec<HamPoly>,
    /// `χ_1..χ_r`.
    pub chi: Vec<HamPoly>,
    /// Per step: `{χ_m, h₀} + G_m - Z_m` vanished and every term of `Z_m` has grade 0.
    pub residual_certificate: Vec<bool>,
}

impl NormalForm {
    /// `Z_j` with the quadratic dispersion split off: `(per-component symbol coefficients, nonlinear part)`.
    pub fn z_nonlinear(&self, j: usize) -> HamPoly {
        self.z[j - 1].split_quadratic().1
    }

    pub fn certified(&self) -> bool {
        self.residual_certificate.iter().all(|&ok| ok)
    }
}

/// Normal form of real NLKG with power `l` up to order `r` (1 to 3).
pub fn normal_form(l: usize, r: usize) -> Result<NormalForm> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("l must be >= 2, got {l}")));
    }
    if !(1..=3).contains(&r) {
        return Err(Error::Unsupported(format!(
            "normal form order r = {r}; supported range is 1..=3"
        )));
    }
    let (h, coeffs) = expand_dispersion_components(r, false);
    let f = expand_nonlinearity(l, r);
    Ok(run(l, r, false, coeffs, h, f))
}

/// Normal form of the two-component system; only `r = 1` is supported.
pub fn normal_form_complex(l: usize, r: usize) -> Result<NormalForm> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("l must be >= 2, got {l}")));
    }
    if r != 1 {
        return Err(Error::Unsupported(format!(
            "two-component normal form order r = {r}; only r = 1 is supported"
        )));
    }
    let (h, coeffs) = expand_dispersion_components(r, true);
    let f = expand_nonlinearity_complex(l, r);
    Ok(run(l, r, true, coeffs, h, f))
}

fn run(
    l: usize,
    r: usize,
    two: bool,
    coeffs: DispersionCoeffs,
    h: Vec<HamPoly>,
    f: Vec<HamPoly>,
) -> NormalForm {
    let h0 = HamPoly::h0(two);
    // k[j] is the ε^j coefficient of the current Hamiltonian.
    let mut k: Vec<HamPoly> = Vec::with_capacity(r + 1);
    k.push(h0.clone());
    for j in 0..r {
        k.push(h[j].add(&f[j]));
    }
    let mut z = Vec::with_capacity(r);
    let mut chi = Vec::with_capacity(r);
    let mut cert = Vec::with_capacity(r);
    for m in 1..=r {
        let g = k[m].clone();
        let zm = g.gauge_average();
        let chim = g.solve_homological();
        let identity = poisson_bracket(&chim, &h0).add(&g).sub(&zm);
        let resonant = zm.terms().all(|(t, _)| t.grade() == 0);
        cert.push(identity.is_zero() && resonant);

        // Lie series: new[j + m·p] += (1/p!) L^p k[j] with L = {χ_m, ·}.
        let mut next = k.clone();
        for j in 0..=r {
            let mut term = k[j].clone();
            let mut p = 1;
            while j + m * p <= r {
                term = poisson_bracket(&chim, &term);
                if term.is_zero() {
                    break;
                }
                let inv = Rat::from_integer(1.into()) / factorial(p as u32);
                next[j + m * p].add_assign(&term.scale_rat(&inv));
                p += 1;
            }
        }
        k = next;
        debug_assert_eq!(k[m], zm);
        z.push(zm.with_origin(Origin::NormalForm(m), m));
        chi.push(chim.with_origin(Origin::Generator(m), m));
    }
    NormalForm {
        l,
        r,
        two_components: two,
        coeffs,
        h,
        f,
        z,
        chi,
        residual_certificate: cert,
    }
}
