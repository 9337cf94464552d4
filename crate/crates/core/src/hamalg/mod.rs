//! Exact symbolic algebra for polynomial Hamiltonians in `(ψ, ψ̄)` and `(φ, φ̄)`.
//!
//! Coefficients are Gaussian rationals with a separate λ-degree. Derivative
//! structure is kept as a Gram-polynomial symbol (see [`gram`]), which is
//! closed under Poisson brackets. Laplacian monomials `∫ Π Δ^{m_i} X_i` are
//! the construction and display vocabulary.
//!
//! Conventions: `X_H = (i ∂H/∂ψ̄, -i ∂H/∂ψ)` on component 1 and the opposite
//! sign on component 2; `{F, G} = dG·X_F`; `h₀ = ∫ ψ̄ψ` generates
//! `ψ ↦ e^{it}ψ`, so `{χ, h₀} = -i n χ` for a grade-`n` term and the
//! homological equation `{χ, h₀} + F = ⟨F⟩` is solved by `χ_n = F_n/(i n)`.

pub mod checks;
pub mod coeff;
pub mod compile;
pub mod display;
pub mod expand;
pub mod gram;
pub mod normal_form;
pub mod oracle;
pub mod poly;
pub mod random;

pub use checks::{bracket_with_h0_numeric, gradient_fd_error, homological_residual, oracle_gap};
pub use coeff::{Coeff, Rat};
pub use compile::{compile_vector_field, CompiledHamiltonian, Deriv};
pub use display::to_monomials;
pub use expand::{
    expand_dispersion, expand_dispersion_components, expand_nonlinearity,
    expand_nonlinearity_complex, DispersionCoeffs,
};
pub use gram::{FieldVar, Gram, PHI, PHI_BAR, PSI, PSI_BAR};
pub use normal_form::{normal_form, normal_form_complex, NormalForm};
pub use oracle::{numeric_gauge_average_oracle, numeric_gauge_average_oracle_pair};
pub use poly::{poisson_bracket, Factor, HamPoly, Monomial, Origin, Term};

/// Grade-zero part of `F`.
pub fn gauge_average(f: &HamPoly) -> HamPoly {
    f.gauge_average()
}

/// `χ` with `{χ, h₀} + F = ⟨F⟩`.
pub fn solve_homological(f: &HamPoly) -> HamPoly {
    f.solve_homological()
}
