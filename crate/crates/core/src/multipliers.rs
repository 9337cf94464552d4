//! Fourier multipliers: relativistic operators, smoothing, Littlewood-Paley
//! and sharp projectors, and the `(u, v) ↔ ψ` change of variables.
//!
//! Symbols are radial unless noted and are evaluated from stable forms such
//! as `c·hypot(c, |ξ|)` so that `c = 10⁶` neither overflows nor cancels.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, C64};

/// Physical parameters `(c, λ, l)` with `m = ħ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub c: f64,
    pub lambda: f64,
    pub l: u32,
}

impl PhysicalParams {
    pub fn new(c: f64, lambda: f64, l: u32) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "c must be positive, got {c}"
            )));
        }
        if l < 2 {
            return Err(Error::InvalidParameter(format!("l must be >= 2, got {l}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        Ok(Self { c, lambda, l })
    }

    /// `ε = 1/c²`.
    pub fn eps(&self) -> f64 {
        1.0 / (self.c * self.c)
    }
}

type Symbol = dyn Fn(&[f64; 3]) -> C64 + Send + Sync;

/// A diagonal Fourier operator `m(D)`.
#[derive(Clone)]
pub struct Multiplier {
    name: String,
    params: Vec<(&'static str, f64)>,
    symbol: Arc<Symbol>,
    odd: bool,
}

impl std::fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Multiplier({}, {:?})", self.name, self.params)
    }
}

fn norm3(xi: &[f64; 3]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
}

/// `c·(hypot(c, |ξ|) - c)`, the dispersion without the rest energy.
pub fn kinetic_part(c: f64, xi2: f64) -> f64 {
    c * xi2 / ((c * c + xi2).sqrt() + c)
}

/// `c²((1+x)^{1/2} - Σ_{j≤r} binom(1/2,j) x^j)` with `x = |ξ|²/c²`, without cancellation.
pub fn dispersion_remainder(c: f64, xi2: f64, r: usize) -> f64 {
    let x = xi2 / (c * c);
    if x < 0.25 {
        let mut coef = 1.0;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for j in 1..200 {
            coef *= (0.5 - (j - 1) as f64) / j as f64;
            pow *= x;
            if j > r {
                let term = coef * pow;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
            }
        }
        c * c * sum
    } else {
        c * c * ((1.0 + x).sqrt() - binomial_half_poly(x, r))
    }
}

/// `Σ_{j=0}^{r} binom(1/2, j) x^j`.
pub fn binomial_half_poly(x: f64, r: usize) -> f64 {
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 1.0;
    for j in 1..=r {
        coef *= (0.5 - (j - 1) as f64) / j as f64;
        pow *= x;
        sum += coef * pow;
    }
    sum
}

/// `σ_r(ξ) - c²`: the truncated dispersion without the rest energy.
pub fn truncated_kinetic(c: f64, xi2: f64, r: usize) -> f64 {
    let x = xi2 / (c * c);
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for j in 1..=r {
        coef *= (0.5 - (j - 1) as f64) / j as f64;
        pow *= x;
        sum += coef * pow;
    }
    c * c * sum
}

fn smooth_step(x: f64) -> f64 {
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        f(x) / (f(x) + f(1.0 - x))
    }
}

/// Radial bump: 1 on `|ξ| ≤ 1/2`, 0 on `|ξ| ≥ 1`, built from `exp(-1/x)`.
pub fn phi0(r: f64) -> f64 {
    smooth_step(2.0 * (1.0 - r))
}

/// Littlewood-Paley piece `φ_j(|ξ|)`.
pub fn phi_j(j: u32, r: f64) -> f64 {
    if j == 0 {
        phi0(r)
    } else {
        phi0(r / 2f64.powi(j as i32)) - phi0(r / 2f64.powi(j as i32 - 1))
    }
}

impl Multiplier {
    pub fn new(
        name: impl Into<String>,
        params: Vec<(&'static str, f64)>,
        odd: bool,
        symbol: impl Fn(&[f64; 3]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            params,
            symbol: Arc::new(symbol),
            odd,
        }
    }

    fn radial(
        name: &str,
        params: Vec<(&'static str, f64)>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, params, false, move |xi| C64::new(f(norm3(xi)), 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(&'static str, f64)] {
        &self.params
    }

    pub fn eval(&self, xi: &[f64; 3]) -> C64 {
        (self.symbol)(xi)
    }

    /// Symbol on every grid mode; the Nyquist modes are zeroed for odd symbols.
    pub fn table(&self, grid: &Grid) -> Vec<C64> {
        let half = -(grid.n() as i64) / 2;
        (0..grid.len())
            .map(|i| {
                if self.odd && grid.mode(i)[..grid.dim()].contains(&half) {
                    C64::new(0.0, 0.0)
                } else {
                    self.eval(&grid.wavevector(i))
                }
            })
            .collect()
    }

    pub fn apply(&self, f: &Field) -> Field {
        f.apply_table(&self.table(f.grid()))
    }

    /// Product symbol.
    pub fn compose(&self, other: &Multiplier) -> Multiplier {
        let (a, b) = (self.symbol.clone(), other.symbol.clone());
        let mut params = self.params.clone();
        params.extend(other.params.iter().cloned());
        Multiplier::new(
            format!("{}∘{}", self.name, other.name),
            params,
            self.odd ^ other.odd,
            move |xi| a(xi) * b(xi),
        )
    }

    /// `⟨∇⟩_c^k`, symbol `(c² + |ξ|²)^{k/2}`.
    pub fn japc(c: f64, k: f64) -> Self {
        Self::radial("japc", vec![("c", c), ("k", k)], move |r| {
            c.hypot(r).powf(k)
        })
    }

    /// `(c/⟨∇⟩_c)^k`.
    pub fn smoothing(c: f64, k: f64) -> Self {
        Self::radial("smoothing", vec![("c", c), ("k", k)], move |r| {
            (c / c.hypot(r)).powf(k)
        })
    }

    /// `c^{-k}⟨∇⟩_c^k`, the weight of the relativistic Sobolev norm.
    pub fn relativistic_weight(c: f64, k: f64) -> Self {
        Self::radial("relweight", vec![("c", c), ("k", k)], move |r| {
            (1.0 + (r / c).powi(2)).powf(k / 2.0)
        })
    }

    /// `Δ^m`.
    pub fn laplacian(m: u32) -> Self {
        Self::radial("laplacian", vec![("m", m as f64)], move |r| {
            (-r * r).powi(m as i32)
        })
    }

    /// `∂_axis`, an odd symbol.
    pub fn derivative(axis: usize) -> Self {
        Self::new("d", vec![("axis", axis as f64)], true, move |xi| {
            C64::new(0.0, xi[axis])
        })
    }

    /// `exp(i t c⟨∇⟩_c)`.
    pub fn kg_phase(c: f64, t: f64) -> Self {
        Self::new("kg_phase", vec![("c", c), ("t", t)], false, move |xi| {
            let x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            Complex64::from_polar(1.0, t * c * c)
                * Complex64::from_polar(1.0, t * kinetic_part(c, x2))
        })
    }

    /// `exp(i t σ_r(ξ))` with `σ_r = c² Σ_{j≤r} binom(1/2,j)(|ξ|²/c²)^j`.
    pub fn ur_phase(c: f64, r: usize, t: f64) -> Self {
        Self::new(
            "ur_phase",
            vec![("c", c), ("r", r as f64), ("t", t)],
            false,
            move |xi| {
                let x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                Complex64::from_polar(1.0, t * c * c)
                    * Complex64::from_polar(1.0, t * truncated_kinetic(c, x2, r))
            },
        )
    }

    /// `φ_j(D)`.
    pub fn lp_piece(j: u32) -> Self {
        Self::radial("lp_piece", vec![("j", j as f64)], move |r| phi_j(j, r))
    }

    /// `Π_N = Σ_{j≤N} φ_j(D)`, symbol `φ₀(2^{-N}|ξ|)`.
    pub fn lp_cutoff(n: u32) -> Self {
        Self::radial("lp_cutoff", vec![("N", n as f64)], move |r| {
            phi0(r / 2f64.powi(n as i32))
        })
    }

    /// Sharp Fourier projector onto `|ξ| ≤ N`.
    pub fn sharp(n: f64) -> Self {
        Self::radial("sharp", vec![("N", n)], move |r| {
            if r <= n * (1.0 + 1e-14) {
                1.0
            } else {
                0.0
            }
        })
    }
}

pub fn japc_apply(f: &Field, c: f64, k: f64) -> Field {
    Multiplier::japc(c, k).apply(f)
}

pub fn smoothing_apply(f: &Field, c: f64, k: f64) -> Field {
    Multiplier::smoothing(c, k).apply(f)
}

/// `‖c^{-k}⟨∇⟩_c^k f‖_{L²}`.
pub fn norm_hck(f: &Field, c: f64, k: f64) -> f64 {
    f.grid()
        .weighted_norm(f.spectral(), |x2| (1.0 + x2 / (c * c)).powf(k))
}

/// `‖c^{-k}⟨∇⟩_c^k f‖_{L^p}` by quadrature of the multiplier output.
pub fn norm_wckp(f: &Field, c: f64, k: f64, p: f64) -> f64 {
    Multiplier::relativistic_weight(c, k).apply(f).norm_lp(p)
}

pub fn lp_projector(f: &Field, j: u32) -> Field {
    Multiplier::lp_piece(j).apply(f)
}

pub fn lp_cutoff(f: &Field, n: u32) -> Field {
    Multiplier::lp_cutoff(n).apply(f)
}

pub fn sharp_projector(f: &Field, n: f64) -> Field {
    Multiplier::sharp(n).apply(f)
}

/// Smallest `J` with `2^{J-1} > max|ξ|` on the grid.
pub fn lp_depth(grid: &Grid) -> u32 {
    let m = grid.max_abs_xi();
    let mut j = 0;
    while 2f64.powi(j as i32 - 1) <= m {
        j += 1;
    }
    j
}

fn check_real(f: &Field) -> Result<()> {
    let residue = f.max_imag() / f.max_abs().max(1.0);
    if residue > 1e-10 {
        return Err(Error::NonRealResidue { residue });
    }
    Ok(())
}

/// `ψ = (1/√2)[(⟨∇⟩_c/c)^{1/2} u - i (c/⟨∇⟩_c)^{1/2} v]`; `u` and `v` must be real.
pub fn to_complex(u: &Field, v: &Field, c: f64) -> Result<Field> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    check_real(u)?;
    check_real(v)?;
    let a = Multiplier::smoothing(c, -0.5).table(u.grid());
    let spec = u
        .spectral()
        .iter()
        .zip(v.spectral())
        .zip(a.iter())
        .map(|((uh, vh), a)| (a * uh - C64::new(0.0, 1.0) * vh / a) / SQRT_2)
        .collect();
    Field::from_spectral(u.grid(), spec)
}

/// Inverse of [`to_complex`]; fails if `u` or `v` would not be real.
pub fn from_complex(psi: &Field, c: f64) -> Result<(Field, Field)> {
    let grid = psi.grid();
    let b = Multiplier::smoothing(c, 0.5).table(grid);
    let bar = psi.conj();
    let sum: Vec<C64> = psi
        .spectral()
        .iter()
        .zip(bar.spectral())
        .map(|(p, q)| p + q)
        .collect();
    let diff: Vec<C64> = psi
        .spectral()
        .iter()
        .zip(bar.spectral())
        .map(|(p, q)| p - q)
        .collect();
    let u_hat = sum
        .iter()
        .zip(b.iter())
        .map(|(s, b)| s * b / SQRT_2)
        .collect();
    let v_hat = diff
        .iter()
        .zip(b.iter())
        .map(|(d, b)| C64::new(0.0, 1.0) * d / b / SQRT_2)
        .collect();
    let u = Field::from_spectral(grid, u_hat)?;
    let v = Field::from_spectral(grid, v_hat)?;
    check_real(&u)?;
    check_real(&v)?;
    let re = |f: &Field| {
        Field::new(
            grid,
            f.values().iter().map(|z| C64::new(z.re, 0.0)).collect(),
        )
    };
    Ok((re(&u)?, re(&v)?))
}

/// `H(u, v) = (c²/2)⟨v, v⟩ + ½⟨u, ⟨∇⟩_c² u⟩ + (λ/2l) ∫ u^{2l}` for real `u, v`.
pub fn hamiltonian_uv(u: &Field, v: &Field, params: &PhysicalParams) -> f64 {
    let c = params.c;
    let g = u.grid();
    let kin = 0.5 * c * c * v.norm_l2().powi(2);
    let pot = 0.5 * g.weighted_norm(u.spectral(), |x2| c * c + x2).powi(2);
    let l2 = 2 * params.l as i32;
    let nl: f64 = u.values().iter().map(|z| z.re.powi(l2)).sum::<f64>() * g.weight();
    kin + pot + params.lambda / l2 as f64 * nl
}

/// `H(ψ, ψ̄) = ⟨ψ̄, c⟨∇⟩_c ψ⟩ + (λ/(2^{l+1} l)) ∫ [S(ψ+ψ̄)]^{2l}`, `S = (c/⟨∇⟩_c)^{1/2}`.
pub fn hamiltonian_psi(psi: &Field, params: &PhysicalParams) -> f64 {
    let c = params.c;
    let g = psi.grid();
    let lin = g
        .weighted_norm(psi.spectral(), |x2| c * (c * c + x2).sqrt())
        .powi(2);
    let s = Multiplier::smoothing(c, 0.5).apply(psi);
    let l2 = 2 * params.l as i32;
    let nl: f64 = s
        .values()
        .iter()
        .map(|z| (2.0 * z.re).powi(l2))
        .sum::<f64>()
        * g.weight();
    lin + params.lambda / (2f64.powi(params.l as i32 + 1) * params.l as f64) * nl
}

/// Constants of the Littlewood-Paley family measured on a grid.
#[derive(Clone, Debug)]
pub struct AdmissibleReport {
    pub depth: u32,
    /// `max |Σ_j π_j f - f|` over the sample.
    pub reconstruction_error: f64,
    /// `max |⟨π_j f, g⟩ - ⟨f, π_j g⟩|` over the sample.
    pub self_adjoint_error: f64,
    /// Square-function bounds `K₁‖f‖² ≤ Σ_j ‖π_j f‖² ≤ K₂‖f‖²` (mode-wise extremes).
    pub k1: f64,
    pub k2: f64,
    /// Largest observed `‖π_j f‖_{L^p}/‖f‖_{L^p}` (reported, not a bound).
    pub k_prime: f64,
}

/// Checks the admissible-family axioms on random samples.
pub fn admissible_family_report<R: Rng>(
    grid: &Grid,
    p: f64,
    samples: usize,
    rng: &mut R,
) -> AdmissibleReport {
    let depth = lp_depth(grid);
    let tables: Vec<Vec<C64>> = (0..=depth)
        .map(|j| Multiplier::lp_piece(j).table(grid))
        .collect();
    let (mut k1, mut k2) = (f64::INFINITY, 0.0f64);
    for i in 0..grid.len() {
        let s: f64 = tables.iter().map(|t| t[i].norm_sqr()).sum();
        k1 = k1.min(s);
        k2 = k2.max(s);
    }
    let band = (grid.n() / 2 - 1) as i64;
    let mut rec = 0.0f64;
    let mut adj = 0.0f64;
    let mut kp = 0.0f64;
    for _ in 0..samples {
        let f = Field::random_bandlimited(grid, rng, band, 1.0);
        let g = Field::random_bandlimited(grid, rng, band, 1.0);
        let mut total = vec![C64::new(0.0, 0.0); grid.len()];
        for t in &tables {
            let pf = f.apply_table(t);
            let pg = g.apply_table(t);
            for (a, b) in total.iter_mut().zip(pf.values()) {
                *a += b;
            }
            adj = adj.max((pf.inner(&g) - f.inner(&pg)).norm());
            kp = kp.max(pf.norm_lp(p) / f.norm_lp(p));
        }
        for (a, b) in total.iter().zip(f.values()) {
            rec = rec.max((a - b).norm());
        }
    }
    AdmissibleReport {
        depth,
        reconstruction_error: rec,
        self_adjoint_error: adj,
        k1,
        k2,
        k_prime: kp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> Grid {
        make_grid(1, n, 2.0 * PI).unwrap()
    }

    #[test]
    fn japc_examples() {
        let g = grid1(16);
        let one = Field::from_fn(&g, |_| C64::new(1.0, 0.0));
        let out = japc_apply(&one, 5.0, 1.0);
        assert!(out.values().iter().all(|z| (z - 5.0).norm() < 1e-12));
        let w = Field::from_fn(&g, |x| C64::from_polar(1.0, x[0]));
        let out = japc_apply(&w, 1.0, 2.0);
        for (a, b) in out.values().iter().zip(w.values()) {
            assert!((a - 2.0 * b).norm() < 1e-12);
        }
    }

    #[test]
    fn smoothing_examples() {
        let m = Multiplier::smoothing(1e6, 1.0);
        assert!((m.eval(&[3.0, 0.0, 0.0]).re - 1.0).abs() < 1e-9);
        assert_eq!(m.eval(&[0.0; 3]).re, 1.0);
        let m = Multiplier::smoothing(1.0, 2.0);
        assert!((m.eval(&[1.0, 0.0, 0.0]).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hck_norm_examples() {
        let g = grid1(64);
        let f = Field::from_fn(&g, |x| C64::new((x[0].cos()).exp(), 0.0));
        for k in [0.5, 1.0, 2.0] {
            assert!((norm_hck(&f, 1.0, k) - f.norm_hk(k)).abs() < 1e-12 * f.norm_hk(k));
        }
        let one = Field::from_fn(&g, |_| C64::new(3.0, 0.0));
        assert!((norm_hck(&one, 7.0, 1.5) - one.norm_hk(0.0)).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for e in 0..=8 {
            let v = norm_hck(&f, 2f64.powi(e), 0.5);
            assert!(v < prev);
            assert!(v >= f.norm_hk(0.0));
            prev = v;
        }
    }

    #[test]
    fn partition_of_unity() {
        let g = grid1(256);
        let depth = lp_depth(&g);
        assert!(2f64.powi(depth as i32 - 1) > g.max_abs_xi());
        for i in 0..g.len() {
            let r = g.xi2()[i].sqrt();
            let s: f64 = (0..=depth).map(|j| phi_j(j, r)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bump_plateau_and_support() {
        assert_eq!(phi0(0.0), 1.0);
        assert_eq!(phi0(0.5), 1.0);
        assert_eq!(phi0(1.0), 0.0);
        assert!(phi0(0.75) > 0.0 && phi0(0.75) < 1.0);
    }

    #[test]
    fn sharp_projector_examples() {
        let g = grid1(32);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Field::random_bandlimited(&g, &mut rng, 15, 1.0);
        let id = sharp_projector(&f, 100.0);
        assert!(id.sub(&f).unwrap().norm_l2() < 1e-13);
        let mean = sharp_projector(&f, 0.0);
        let s = mean.spectral();
        assert!(s[1..].iter().all(|z| z.norm() < 1e-13));
        let p = sharp_projector(&f, 4.0);
        let pp = sharp_projector(&p, 4.0);
        assert_eq!(p.spectral(), pp.spectral());
    }

    #[test]
    fn change_of_variables_roundtrip_and_energy() {
        let g = grid1(64);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let real_field = |rng: &mut ChaCha8Rng| {
            let f = Field::random_bandlimited(&g, rng, 10, 1.0);
            Field::new(&g, f.values().iter().map(|z| C64::new(z.re, 0.0)).collect()).unwrap()
        };
        let (u, v) = (real_field(&mut rng), real_field(&mut rng));
        let c = 7.0;
        let psi = to_complex(&u, &v, c).unwrap();
        let (u2, v2) = from_complex(&psi, c).unwrap();
        assert!(u2.sub(&u).unwrap().norm_l2() < 1e-12 * u.norm_l2());
        assert!(v2.sub(&v).unwrap().norm_l2() < 1e-12 * v.norm_l2());
        let zero = Field::zeros(&g);
        assert_eq!(to_complex(&zero, &zero, c).unwrap().max_abs(), 0.0);
        for l in [2, 3] {
            let p = PhysicalParams::new(c, 0.8, l).unwrap();
            let a = hamiltonian_uv(&u, &v, &p);
            let b = hamiltonian_psi(&psi, &p);
            assert!((a - b).abs() < 1e-10 * a.abs());
        }
    }

    #[test]
    fn from_complex_flags_non_real_residue() {
        let g = grid1(32);
        let psi = Field::from_fn(&g, |x| C64::new(1.0, 1.0) * C64::from_polar(1.0, x[0]));
        let (u, v) = from_complex(&psi, 3.0).unwrap();
        assert!(u.max_imag() == 0.0 && v.max_imag() == 0.0);
        let u = Field::from_fn(&g, |x| C64::new(0.0, x[0].sin()));
        assert!(matches!(
            to_complex(&u, &Field::zeros(&g), 3.0),
            Err(Error::NonRealResidue { .. })
        ));
    }

    #[test]
    fn canonical_pairing_is_preserved() {
        let g = grid1(64);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = 5.0;
        let re = |f: Field| {
            Field::new(&g, f.values().iter().map(|z| C64::new(z.re, 0.0)).collect()).unwrap()
        };
        for _ in 0..5 {
            let du1 = re(Field::random_bandlimited(&g, &mut rng, 12, 1.0));
            let dv1 = re(Field::random_bandlimited(&g, &mut rng, 12, 1.0));
            let du2 = re(Field::random_bandlimited(&g, &mut rng, 12, 1.0));
            let dv2 = re(Field::random_bandlimited(&g, &mut rng, 12, 1.0));
            let lhs = dv1.inner(&du2).re - du1.inner(&dv2).re;
            let p1 = to_complex(&du1, &dv1, c).unwrap();
            let p2 = to_complex(&du2, &dv2, c).unwrap();
            let rhs = 2.0 * p1.inner(&p2).im;
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn composition_and_inverse_powers() {
        let g = grid1(64);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = Field::random_bandlimited(&g, &mut rng, 20, 1.0);
        let back = japc_apply(&japc_apply(&f, 3.0, 1.0), 3.0, -1.0);
        assert!(back.sub(&f).unwrap().norm_l2() < 1e-12 * f.norm_l2());
        let m = Multiplier::japc(2.0, 1.0).compose(&Multiplier::smoothing(2.0, 2.0));
        let direct = Multiplier::smoothing(2.0, 1.0);
        for i in 0..g.len() {
            let xi = g.wavevector(i);
            let a = m.eval(&xi);
            let b = direct.eval(&xi) * 2.0;
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn dispersion_remainder_is_stable() {
        for &c in &[4.0f64, 64.0, 1e4] {
            for &xi2 in &[1.0f64, 4.0, 100.0] {
                for r in 1..=3 {
                    let direct = c * (c * c + xi2).sqrt() - c * c - truncated_kinetic(c, xi2, r);
                    let stable = dispersion_remainder(c, xi2, r);
                    if c < 100.0 {
                        assert!((direct - stable).abs() < 1e-9 * (1.0 + c * c));
                    }
                    assert!(stable.is_finite());
                }
            }
        }
        // Leading remainder term binom(1/2, r+1) x^{r+1} c².
        let (c, xi2) = (1e4f64, 4.0f64);
        let lead = 1.0 / 16.0 * (xi2 / (c * c)).powi(3) * c * c;
        assert!((dispersion_remainder(c, xi2, 2) - lead).abs() < 1e-6 * lead);
    }

    #[test]
    fn admissible_family_axioms() {
        let g = grid1(64);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rep = admissible_family_report(&g, 4.0, 3, &mut rng);
        assert!(rep.reconstruction_error < 1e-12);
        assert!(rep.self_adjoint_error < 1e-12);
        assert!(rep.k1 > 0.0 && rep.k2 <= 1.0 + 1e-12);
        assert!(rep.k_prime.is_finite());
    }
}
