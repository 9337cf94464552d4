//! Compilation of symbolic Hamiltonians into grid functionals and vector fields.
//!
//! Laplacian monomials compile directly. Terms that need mixed gradients are
//! expanded into explicit axis contractions, `g_ij → -Σ_a ∂_a(i) ∂_a(j)`.
//! Derivative arrays are computed once per (variable, derivative) pair and
//! shared between terms.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::coeff::{coeff_to_c64, Coeff};
use super::display::to_monomials;
use super::gram::FieldVar;
use super::poly::HamPoly;
use crate::grid::{Field, FieldPair, Grid, C64};
use crate::multipliers::PhysicalParams;

const MONOMIAL_REWRITE_MAX_TERMS: usize = 24;

/// A derivative `Δ^lap ∂^axes` applied to one factor.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Deriv {
    pub lap: u32,
    pub axes: [u8; 3],
}

impl Deriv {
    pub fn laplacian(lap: u32) -> Self {
        Self { lap, axes: [0; 3] }
    }

    fn order_parity_odd(&self) -> bool {
        self.axes.iter().map(|&a| a as u32).sum::<u32>() % 2 == 1
    }

    /// Fourier symbol `(-|ξ|²)^lap Π_a (iξ_a)^{axes_a}` for every mode.
    pub fn table(&self, grid: &Grid) -> Vec<C64> {
        let odd = self.order_parity_odd();
        let half = -(grid.n() as i64) / 2;
        (0..grid.len())
            .map(|i| {
                if odd && grid.mode(i)[..grid.dim()].contains(&half) {
                    return C64::new(0.0, 0.0);
                }
                let mut v = C64::new((-grid.xi2()[i]).powi(self.lap as i32), 0.0);
                let xi = grid.wavevector(i);
                for a in 0..3 {
                    for _ in 0..self.axes[a] {
                        v *= C64::new(0.0, xi[a]);
                    }
                }
                v
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct CFactor {
    var: usize,
    d: Deriv,
}

#[derive(Clone, Debug)]
struct CTerm {
    coeff: C64,
    factors: Vec<CFactor>,
}

/// Where the values of one field variable come from.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    /// Spectral coefficients of the variable.
    Spectral(&'a [C64]),
    /// Pointwise conjugate of another variable (index `0..4`).
    ConjOf(usize),
}

/// A Hamiltonian functional on a grid together with its gradients.
#[derive(Clone)]
pub struct CompiledHamiltonian {
    grid: Grid,
    lambda: f64,
    terms: Vec<CTerm>,
    dealias: bool,
}

impl std::fmt::Debug for CompiledHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CompiledHamiltonian({} terms)", self.terms.len())
    }
}

/// Compiles `H` for the given grid and λ; dealiasing on.
pub fn compile_vector_field(
    h: &HamPoly,
    grid: &Grid,
    params: &PhysicalParams,
) -> CompiledHamiltonian {
    let mut c = CompiledHamiltonian::new(grid, params.lambda);
    c.add(h, Complex64::new(1.0, 0.0));
    c
}

impl CompiledHamiltonian {
    pub fn new(grid: &Grid, lambda: f64) -> Self {
        Self {
            grid: grid.clone(),
            lambda,
            terms: Vec::new(),
            dealias: true,
        }
    }

    pub fn from_poly(h: &HamPoly, grid: &Grid, lambda: f64) -> Self {
        let mut c = Self::new(grid, lambda);
        c.add(h, Complex64::new(1.0, 0.0));
        c
    }

    pub fn set_dealias(&mut self, on: bool) {
        self.dealias = on;
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn numeric(&self, c: &Coeff, lambda_deg: u32, scale: C64) -> C64 {
        coeff_to_c64(c) * self.lambda.powi(lambda_deg as i32) * scale
    }

    /// Adds `scale · H`.
    pub fn add(&mut self, h: &HamPoly, scale: C64) {
        // The Laplacian rewrite needs exact linear algebra whose cost grows
        // quickly with the number of terms; large inputs compile from Gram form.
        let (monos, rest) = if h.len() <= MONOMIAL_REWRITE_MAX_TERMS {
            to_monomials(h)
        } else {
            (Vec::new(), h.clone())
        };
        for m in monos {
            let coeff = self.numeric(&m.coeff, m.lambda, scale);
            let factors = m
                .factors
                .iter()
                .map(|f| CFactor {
                    var: f.var.index(),
                    d: Deriv::laplacian(f.lap),
                })
                .collect();
            self.terms.push(CTerm { coeff, factors });
        }
        let dim = self.grid.dim();
        for (t, c) in rest.terms() {
            let base = self.numeric(c, t.lambda, scale);
            let sign = if t.gram.degree() % 2 == 0 { 1.0 } else { -1.0 };
            let mut laps = vec![0u32; t.shape.len()];
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for &((i, j), e) in &t.gram.0 {
                if i == j {
                    laps[i as usize] += e;
                } else {
                    for _ in 0..e {
                        edges.push((i as usize, j as usize));
                    }
                }
            }
            let combos = dim.pow(edges.len() as u32);
            for combo in 0..combos {
                let mut axes = vec![[0u8; 3]; t.shape.len()];
                let mut rem = combo;
                for &(i, j) in &edges {
                    let a = rem % dim;
                    rem /= dim;
                    axes[i][a] += 1;
                    axes[j][a] += 1;
                }
                // g_ii → -Δ_i and g_ij → -Σ_a ∂_a(i)∂_a(j): one sign per Gram degree.
                let coeff = base * sign;
                let factors = t
                    .shape
                    .iter()
                    .enumerate()
                    .map(|(k, v)| CFactor {
                        var: v.index(),
                        d: Deriv {
                            lap: laps[k],
                            axes: axes[k],
                        },
                    })
                    .collect();
                self.terms.push(CTerm { coeff, factors });
            }
        }
    }

    fn needed(&self) -> Vec<(usize, Deriv)> {
        let mut keys: Vec<(usize, Deriv)> = self
            .terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| (f.var, f.d)))
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }

    fn arrays(&self, sources: &[Option<Source>; 4]) -> HashMap<(usize, Deriv), Vec<C64>> {
        let mut out: HashMap<(usize, Deriv), Vec<C64>> = HashMap::new();
        let keys = self.needed();
        // Direct sources first, then conjugates.
        for pass in 0..2 {
            for &(var, d) in &keys {
                match (pass, sources[var]) {
                    (0, Some(Source::Spectral(s))) => {
                        let table = d.table(&self.grid);
                        let mut v: Vec<C64> =
                            s.iter().zip(table.iter()).map(|(a, m)| a * m).collect();
                        self.grid.inverse(&mut v);
                        out.insert((var, d), v);
                    }
                    (1, Some(Source::ConjOf(other))) => {
                        let v = match out.get(&(other, d)) {
                            Some(v) => v.iter().map(|z| z.conj()).collect(),
                            None => match sources[other] {
                                Some(Source::Spectral(s)) => {
                                    let table = d.table(&self.grid);
                                    let mut v: Vec<C64> =
                                        s.iter().zip(table.iter()).map(|(a, m)| a * m).collect();
                                    self.grid.inverse(&mut v);
                                    v.iter().map(|z| z.conj()).collect()
                                }
                                _ => panic!("conjugate source must point at a spectral source"),
                            },
                        };
                        out.insert((var, d), v);
                    }
                    (_, None) if pass == 0 => panic!(
                        "compiled Hamiltonian needs variable {}",
                        FieldVar::from_index(var).symbol()
                    ),
                    _ => {}
                }
            }
        }
        out
    }

    fn value_from(&self, arrays: &HashMap<(usize, Deriv), Vec<C64>>) -> C64 {
        let n = self.grid.len();
        let mut total = C64::new(0.0, 0.0);
        for t in &self.terms {
            let cols: Vec<&Vec<C64>> = t.factors.iter().map(|f| &arrays[&(f.var, f.d)]).collect();
            let mut s = C64::new(0.0, 0.0);
            for x in 0..n {
                let mut p = C64::new(1.0, 0.0);
                for c in &cols {
                    p *= c[x];
                }
                s += p;
            }
            total += t.coeff * s;
        }
        total * self.grid.weight()
    }

    /// Spectral gradient `∂H/∂X` for variable index `target`, dealiased if enabled.
    fn gradient_from(&self, arrays: &HashMap<(usize, Deriv), Vec<C64>>, target: usize) -> Vec<C64> {
        let n = self.grid.len();
        let mut by_deriv: BTreeMap<Deriv, Vec<C64>> = BTreeMap::new();
        for t in &self.terms {
            for (s, fs) in t.factors.iter().enumerate() {
                if fs.var != target {
                    continue;
                }
                let acc = by_deriv
                    .entry(fs.d)
                    .or_insert_with(|| vec![C64::new(0.0, 0.0); n]);
                let cols: Vec<&Vec<C64>> = t
                    .factors
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != s)
                    .map(|(_, f)| &arrays[&(f.var, f.d)])
                    .collect();
                for x in 0..n {
                    let mut p = t.coeff;
                    for c in &cols {
                        p *= c[x];
                    }
                    acc[x] += p;
                }
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (d, mut acc) in by_deriv {
            self.grid.forward(&mut acc);
            let table = d.table(&self.grid);
            let adj = if d.order_parity_odd() { -1.0 } else { 1.0 };
            for ((o, a), m) in out.iter_mut().zip(acc.iter()).zip(table.iter()) {
                *o += a * m * adj;
            }
        }
        if self.dealias {
            self.grid.dealias(&mut out);
        }
        out
    }

    fn spectral_inputs(&self, vars: &[Option<&[C64]>; 4]) -> Vec<Option<Vec<C64>>> {
        vars.iter()
            .map(|v| {
                v.map(|a| {
                    let mut s = a.to_vec();
                    self.grid.forward(&mut s);
                    s
                })
            })
            .collect()
    }

    /// `H` on independent physical arrays for `ψ, ψ̄, φ, φ̄`.
    pub fn value(&self, vars: &[Option<&[C64]>; 4]) -> C64 {
        let specs = self.spectral_inputs(vars);
        let sources: [Option<Source>; 4] =
            std::array::from_fn(|i| specs[i].as_deref().map(Source::Spectral));
        self.value_from(&self.arrays(&sources))
    }

    /// Physical `∂H/∂target` on independent physical arrays.
    pub fn gradient(&self, vars: &[Option<&[C64]>; 4], target: FieldVar) -> Vec<C64> {
        let specs = self.spectral_inputs(vars);
        let sources: [Option<Source>; 4] =
            std::array::from_fn(|i| specs[i].as_deref().map(Source::Spectral));
        let mut g = self.gradient_from(&self.arrays(&sources), target.index());
        self.grid.inverse(&mut g);
        g
    }

    /// `H(ψ, ψ̄)`.
    pub fn value_field(&self, psi: &Field) -> C64 {
        let sources = [
            Some(Source::Spectral(psi.spectral())),
            Some(Source::ConjOf(0)),
            None,
            None,
        ];
        self.value_from(&self.arrays(&sources))
    }

    /// `H(ψ, ψ̄, φ, φ̄)`.
    pub fn value_pair(&self, pair: &FieldPair) -> C64 {
        let sources = [
            Some(Source::Spectral(pair.psi.spectral())),
            Some(Source::ConjOf(0)),
            Some(Source::Spectral(pair.phi.spectral())),
            Some(Source::ConjOf(2)),
        ];
        self.value_from(&self.arrays(&sources))
    }

    /// Spectral right-hand sides `iσ ∂H/∂X̄` for one or two components given
    /// their spectral coefficients.
    pub fn rhs_spectral(&self, comps: &[&[C64]]) -> Vec<Vec<C64>> {
        let mut sources: [Option<Source>; 4] = [None; 4];
        sources[0] = Some(Source::Spectral(comps[0]));
        sources[1] = Some(Source::ConjOf(0));
        if comps.len() > 1 {
            sources[2] = Some(Source::Spectral(comps[1]));
            sources[3] = Some(Source::ConjOf(2));
        }
        let arrays = self.arrays(&sources);
        (0..comps.len())
            .map(|c| {
                let target = 2 * c + 1;
                let sigma = if c == 0 { 1.0 } else { -1.0 };
                let mut g = self.gradient_from(&arrays, target);
                for v in g.iter_mut() {
                    *v *= C64::new(0.0, sigma);
                }
                g
            })
            .collect()
    }

    /// `X_H(ψ) = i ∂H/∂ψ̄` as a field.
    pub fn vector_field(&self, psi: &Field) -> Field {
        let spec = self.rhs_spectral(&[psi.spectral()]).remove(0);
        Field::from_spectral(&self.grid, spec).expect("grid length")
    }

    /// `(i ∂H/∂ψ̄, -i ∂H/∂φ̄)`.
    pub fn vector_field_pair(&self, pair: &FieldPair) -> FieldPair {
        let mut out = self.rhs_spectral(&[pair.psi.spectral(), pair.phi.spectral()]);
        let phi = Field::from_spectral(&self.grid, out.remove(1)).expect("grid length");
        let psi = Field::from_spectral(&self.grid, out.remove(0)).expect("grid length");
        FieldPair { psi, phi }
    }
}

#[cfg(test)]
mod tests {
    use super::super::coeff::{rat, real};
    use super::super::gram::{PSI, PSI_BAR};
    use super::super::poly::Monomial;
    use super::*;
    use crate::grid::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> PhysicalParams {
        PhysicalParams::new(8.0, 1.0, 2).unwrap()
    }

    #[test]
    fn h0_vector_field_is_i_times_field() {
        let g = make_grid(1, 64, 2.0 * std::f64::consts::PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Field::random_bandlimited(&g, &mut rng, 8, 1.0);
        let v = compile_vector_field(&HamPoly::h0(false), &g, &params()).vector_field(&f);
        for (a, b) in v.values().iter().zip(f.values()) {
            assert!((a - C64::new(0.0, 1.0) * b).norm() < 1e-13);
        }
    }

    #[test]
    fn quartic_vector_field_is_cubic_nls() {
        let g = make_grid(1, 64, 2.0 * std::f64::consts::PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Field::random_bandlimited(&g, &mut rng, 5, 1.0);
        let h = HamPoly::from_monomial(Monomial::plain(
            real(rat(3, 8)),
            1,
            &[PSI, PSI, PSI_BAR, PSI_BAR],
        ));
        let p = PhysicalParams::new(8.0, 1.7, 2).unwrap();
        let v = compile_vector_field(&h, &g, &p).vector_field(&f);
        for (a, b) in v.values().iter().zip(f.values()) {
            let expected = C64::new(0.0, 0.75 * 1.7) * b.norm_sqr() * b;
            assert!((a - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_term_value() {
        // -½∫ψ̄Δψ = ½∫|∇ψ|² = ½ |k|² ∫|ψ|² for a plane wave.
        let g = make_grid(1, 32, 2.0 * std::f64::consts::PI).unwrap();
        let f = Field::from_fn(&g, |x| C64::from_polar(1.0, 3.0 * x[0]));
        let h = HamPoly::from_monomial(Monomial::new(
            real(rat(-1, 2)),
            0,
            vec![
                super::super::poly::Factor::new(PSI_BAR, 0),
                super::super::poly::Factor::new(PSI, 1),
            ],
        ));
        let v = compile_vector_field(&h, &g, &params()).value_field(&f);
        assert!((v.re - 4.5 * 2.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!(v.im.abs() < 1e-10);
    }
}
