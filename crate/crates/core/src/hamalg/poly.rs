//! Canonical polynomial Hamiltonians, Poisson brackets, gauge averaging and
//! the homological equation.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::coeff::{c_i, c_one, rat_int, real, Coeff, Rat};
use super::gram::{
    canonicalize, eliminate, poly_mul, poly_relabel, FieldVar, Gram, SymPoly, PHI, PHI_BAR, PSI,
    PSI_BAR,
};

/// Key of a canonical term: λ-degree, sorted factor kinds, Gram symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Term {
    pub lambda: u32,
    pub shape: Vec<FieldVar>,
    pub gram: Gram,
}

impl Term {
    pub fn grade(&self) -> i64 {
        self.shape.iter().map(|v| v.grade()).sum()
    }

    pub fn degree(&self) -> usize {
        self.shape.len()
    }
}

/// A factor `Δ^lap X` of a monomial.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Factor {
    pub var: FieldVar,
    pub lap: u32,
}

impl Factor {
    pub fn new(var: FieldVar, lap: u32) -> Self {
        Self { var, lap }
    }
}

/// `coeff · λ^lambda · ∫ Π Δ^{lap_i} X_i dx`.
#[derive(Clone, PartialEq, Debug)]
pub struct Monomial {
    pub coeff: Coeff,
    pub lambda: u32,
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn new(coeff: Coeff, lambda: u32, factors: Vec<Factor>) -> Self {
        Self {
            coeff,
            lambda,
            factors,
        }
    }

    /// Plain monomial without derivatives, e.g. `vars(&[PSI, PSI, PSI_BAR])`.
    pub fn plain(coeff: Coeff, lambda: u32, vars: &[FieldVar]) -> Self {
        Self::new(
            coeff,
            lambda,
            vars.iter().map(|&v| Factor::new(v, 0)).collect(),
        )
    }

    pub fn grade(&self) -> i64 {
        self.factors.iter().map(|f| f.var.grade()).sum()
    }

    /// Gram symbol of the factor list, `Π (-g_ii)^{lap_i}`, as (sign, monomial).
    pub fn symbol(&self) -> (Rat, Gram) {
        let mut g = Gram::one();
        let mut total = 0;
        for (i, f) in self.factors.iter().enumerate() {
            if f.lap > 0 {
                g = g.mul(&Gram(vec![((i as u8, i as u8), f.lap)]));
                total += f.lap;
            }
        }
        let sign = if total % 2 == 0 {
            Rat::one()
        } else {
            -Rat::one()
        };
        (sign, g)
    }
}

/// Where a polynomial came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Origin {
    Dispersion(usize),
    Nonlinearity(usize),
    NormalForm(usize),
    Generator(usize),
    #[default]
    Derived,
}

/// Canonical sum of terms with nonzero Gaussian-rational coefficients.
#[derive(Clone, Default)]
pub struct HamPoly {
    terms: BTreeMap<Term, Coeff>,
    pub origin: Origin,
    pub eps_order: Option<usize>,
}

impl PartialEq for HamPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl fmt::Debug for HamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HamPoly({})", self)
    }
}

impl HamPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_origin(mut self, origin: Origin, eps_order: usize) -> Self {
        self.origin = origin;
        self.eps_order = Some(eps_order);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Coeff)> {
        self.terms.iter()
    }

    /// Adds `coeff · ∫ poly(ξ) Π shape`, canonicalizing first.
    pub fn add_raw(&mut self, lambda: u32, shape: &[FieldVar], poly: &SymPoly, coeff: &Coeff) {
        if coeff.is_zero() {
            return;
        }
        let (sorted, canon) = canonicalize(shape, poly);
        for (g, r) in canon {
            let term = Term {
                lambda,
                shape: sorted.clone(),
                gram: g,
            };
            let c = Coeff::new(&coeff.re * &r, &coeff.im * &r);
            self.add_term(term, c);
        }
    }

    /// Adds an already canonical term.
    pub fn add_term(&mut self, term: Term, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&term) {
            Some(e) => {
                *e = &*e + c;
                if e.is_zero() {
                    self.terms.remove(&term);
                }
            }
            None => {
                self.terms.insert(term, c);
            }
        }
    }

    pub fn add_monomial(&mut self, m: &Monomial) {
        let (sign, g) = m.symbol();
        let mut p = SymPoly::new();
        p.insert(g, sign);
        let shape: Vec<FieldVar> = m.factors.iter().map(|f| f.var).collect();
        self.add_raw(m.lambda, &shape, &p, &m.coeff);
    }

    pub fn from_monomials(ms: &[Monomial]) -> Self {
        let mut h = Self::new();
        for m in ms {
            h.add_monomial(m);
        }
        h
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Self::from_monomials(&[m])
    }

    /// `h₀ = ∫ ψ̄ψ` (plus `∫ φ̄φ` for two components).
    pub fn h0(two_components: bool) -> Self {
        let mut ms = vec![Monomial::plain(c_one(), 0, &[PSI, PSI_BAR])];
        if two_components {
            ms.push(Monomial::plain(c_one(), 0, &[PHI, PHI_BAR]));
        }
        Self::from_monomials(&ms)
    }

    pub fn add(&self, other: &HamPoly) -> HamPoly {
        let mut out = self.clone();
        out.origin = Origin::Derived;
        out.eps_order = None;
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &HamPoly) {
        for (t, c) in &other.terms {
            self.add_term(t.clone(), c.clone());
        }
    }

    pub fn scale(&self, s: &Coeff) -> HamPoly {
        let mut out = HamPoly::new();
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c * s);
        }
        out
    }

    pub fn scale_rat(&self, s: &Rat) -> HamPoly {
        self.scale(&real(s.clone()))
    }

    pub fn sub(&self, other: &HamPoly) -> HamPoly {
        self.add(&other.scale_rat(&-Rat::one()))
    }

    pub fn max_grade(&self) -> i64 {
        self.terms
            .keys()
            .map(|t| t.grade().abs())
            .max()
            .unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|t| t.degree()).max().unwrap_or(0)
    }

    pub fn uses_component_two(&self) -> bool {
        self.terms
            .keys()
            .any(|t| t.shape.iter().any(|v| v.comp == 2))
    }

    /// Keeps the terms with the given λ-degree.
    pub fn lambda_part(&self, deg: u32) -> HamPoly {
        self.filter(|t| t.lambda == deg)
    }

    pub fn filter(&self, keep: impl Fn(&Term) -> bool) -> HamPoly {
        let mut out = HamPoly::new();
        for (t, c) in &self.terms {
            if keep(t) {
                out.terms.insert(t.clone(), c.clone());
            }
        }
        out
    }

    /// Coefficient of a canonical term (zero if absent).
    pub fn coeff_of(&self, term: &Term) -> Coeff {
        self.terms.get(term).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Coefficient of the canonical form of a single monomial, assuming the
    /// monomial's canonical form is a single term.
    pub fn coeff_of_monomial(&self, m: &Monomial) -> Option<Coeff> {
        let probe = HamPoly::from_monomial(Monomial {
            coeff: c_one(),
            ..m.clone()
        });
        if probe.len() != 1 {
            return None;
        }
        let (t, unit) = probe.terms.iter().next().unwrap();
        Some(self.coeff_of(t) / unit)
    }

    /// Gauge average: the grade-zero part.
    pub fn gauge_average(&self) -> HamPoly {
        self.filter(|t| t.grade() == 0)
    }

    /// Solves `{χ, h₀} + F = ⟨F⟩`: each grade-`n` term is divided by `i·n`.
    pub fn solve_homological(&self) -> HamPoly {
        let mut out = HamPoly::new();
        for (t, c) in &self.terms {
            let n = t.grade();
            if n != 0 {
                let d = Coeff::new(Rat::zero(), rat_int(n));
                out.terms.insert(t.clone(), c / d);
            }
        }
        out
    }

    /// `{F, G} = dG·X_F` with `X_F = (iσ ∂F/∂X̄, -iσ ∂F/∂X)`, `σ = +1` on
    /// component 1 and `-1` on component 2.
    pub fn bracket(&self, other: &HamPoly) -> HamPoly {
        poisson_bracket(self, other)
    }

    /// Splits off gauge-invariant quadratic terms `∫ X̄ Δ^m X`, returning
    /// per component the coefficients of `(-|ξ|²)^m` and the remainder.
    pub fn split_quadratic(&self) -> (Vec<BTreeMap<u32, Coeff>>, HamPoly) {
        let mut lin = vec![BTreeMap::new(), BTreeMap::new()];
        let mut rest = HamPoly::new();
        for (t, c) in &self.terms {
            let quad = t.shape.len() == 2
                && t.shape[0].comp == t.shape[1].comp
                && t.shape[0].conj != t.shape[1].conj
                && t.gram.0.iter().all(|&(k, _)| k == (0, 0));
            if quad && t.lambda == 0 {
                let m = t.gram.degree();
                // g_00^m is (-1)^m Δ^m on factor 0.
                let sign = if m % 2 == 0 { Rat::one() } else { -Rat::one() };
                let e: &mut Coeff = lin[t.shape[0].comp as usize - 1]
                    .entry(m)
                    .or_insert_with(Coeff::zero);
                *e = &*e + c * real(sign);
            } else {
                rest.terms.insert(t.clone(), c.clone());
            }
        }
        (lin, rest)
    }
}

/// Functional derivative pieces of one term with slot `i` opened.
struct Opened {
    kind: FieldVar,
    lambda: u32,
    rest: Vec<FieldVar>,
    symbol: SymPoly,
}

fn open_slots(h: &HamPoly) -> Vec<(Opened, Coeff)> {
    let mut out = Vec::new();
    for (t, c) in &h.terms {
        let n = t.shape.len() as u8;
        for i in 0..t.shape.len() {
            let symbol = eliminate(&t.gram, i as u8, n);
            if symbol.is_empty() {
                continue;
            }
            let mut rest = t.shape.clone();
            let kind = rest.remove(i);
            out.push((
                Opened {
                    kind,
                    lambda: t.lambda,
                    rest,
                    symbol,
                },
                c.clone(),
            ));
        }
    }
    out
}

/// Poisson bracket `{F, G}`; see [`HamPoly::bracket`] for the convention.
pub fn poisson_bracket(f: &HamPoly, g: &HamPoly) -> HamPoly {
    let fo = open_slots(f);
    let go = open_slots(g);
    let mut out = HamPoly::new();
    let i = c_i();
    for (a, ca) in &fo {
        for (b, cb) in &go {
            if a.kind.comp != b.kind.comp || a.kind.conj == b.kind.conj {
                continue;
            }
            // F's conjugated slot against G's plain slot enters with +iσ.
            let sign = if a.kind.conj {
                a.kind.sigma()
            } else {
                -a.kind.sigma()
            };
            let na = a.rest.len() as u8;
            let map: Vec<u8> = (0..b.rest.len() as u8).map(|q| q + na).collect();
            let shifted = poly_relabel(&b.symbol, &map);
            let prod = poly_mul(&a.symbol, &shifted);
            if prod.is_empty() {
                continue;
            }
            let mut shape = a.rest.clone();
            shape.extend_from_slice(&b.rest);
            let c = ca * cb * &i * real(rat_int(sign));
            out.add_raw(a.lambda + b.lambda, &shape, &prod, &c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::coeff::{imag, rat};
    use super::*;

    fn mono(c: Rat, lambda: u32, f: &[(FieldVar, u32)]) -> Monomial {
        Monomial::new(
            real(c),
            lambda,
            f.iter().map(|&(v, l)| Factor::new(v, l)).collect(),
        )
    }

    #[test]
    fn h0_commutes_with_resonant_quartic() {
        let q = HamPoly::from_monomial(Monomial::plain(c_one(), 0, &[PSI, PSI, PSI_BAR, PSI_BAR]));
        assert!(poisson_bracket(&HamPoly::h0(false), &q).is_zero());
    }

    #[test]
    fn h0_bracket_multiplies_by_grade() {
        let f = HamPoly::from_monomial(Monomial::plain(c_one(), 0, &[PSI, PSI, PSI, PSI_BAR]));
        let b = poisson_bracket(&HamPoly::h0(false), &f);
        assert_eq!(b, f.scale(&imag(rat(2, 1))));
        let b = poisson_bracket(&f, &HamPoly::h0(false));
        assert_eq!(b, f.scale(&imag(rat(-2, 1))));
    }

    #[test]
    fn second_component_grades_reverse() {
        let f = HamPoly::from_monomial(Monomial::plain(c_one(), 0, &[PHI, PHI]));
        let b = poisson_bracket(&f, &HamPoly::h0(true));
        // grade of φ² is -2, so {χ,h0} = -i n χ = 2i χ.
        assert_eq!(b, f.scale(&imag(rat(2, 1))));
    }

    #[test]
    fn homological_single_monomial() {
        let f = HamPoly::from_monomial(Monomial::plain(c_one(), 0, &[PSI, PSI]));
        let chi = f.solve_homological();
        assert_eq!(chi, f.scale(&imag(rat(-1, 2))));
        let lhs = poisson_bracket(&chi, &HamPoly::h0(false))
            .add(&f)
            .sub(&f.gauge_average());
        assert!(lhs.is_zero());
    }

    #[test]
    fn laplacian_position_is_irrelevant() {
        let a = HamPoly::from_monomial(mono(rat(1, 1), 0, &[(PSI, 1), (PSI_BAR, 0)]));
        let b = HamPoly::from_monomial(mono(rat(1, 1), 0, &[(PSI, 0), (PSI_BAR, 1)]));
        assert_eq!(a, b);
    }

    #[test]
    fn free_schrodinger_bracket() {
        // {h1, ∫ψ} with h1 = -½∫ψ̄Δψ is -½ i ∫ ψ with derivatives killed.
        let h1 = HamPoly::from_monomial(mono(rat(-1, 2), 0, &[(PSI, 1), (PSI_BAR, 0)]));
        let lin = HamPoly::from_monomial(Monomial::plain(c_one(), 0, &[PSI]));
        assert!(poisson_bracket(&h1, &lin).is_zero());
        let quad = HamPoly::from_monomial(Monomial::plain(c_one(), 0, &[PSI, PSI_BAR]));
        assert!(poisson_bracket(&h1, &quad).is_zero());
    }

    #[test]
    fn split_quadratic_extracts_dispersion() {
        let h = HamPoly::from_monomials(&[
            mono(rat(-1, 8), 0, &[(PSI, 2), (PSI_BAR, 0)]),
            mono(
                rat(3, 8),
                1,
                &[(PSI, 0), (PSI, 0), (PSI_BAR, 0), (PSI_BAR, 0)],
            ),
        ]);
        let (lin, rest) = h.split_quadratic();
        assert_eq!(lin[0].get(&2), Some(&real(rat(-1, 8))));
        assert_eq!(rest.len(), 1);
    }
}
