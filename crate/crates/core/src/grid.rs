//! Periodic torus grids with unitary FFTs, quadrature and discrete norms.
//!
//! Storage is row-major with the last axis fastest. Spectral arrays use the
//! FFT ordering, so flat index `i` along an axis maps to the integer offset
//! `i` for `i < n/2` and `i - n` otherwise. Both transform directions carry a
//! factor `1/sqrt(n)` per axis, which makes Parseval exact.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    offsets: Vec<i64>,
    axis_xi: Vec<f64>,
    xi2: Vec<f64>,
    keep: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Immutable periodic grid on `[0, length)^dim`, cheap to clone and share.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.n == other.inner.n
                && self.inner.length == other.inner.length)
    }
}

/// Builds a grid; `n` must be a power of two with `n >= 8`.
pub fn make_grid(dim: usize, n: usize, length: f64) -> Result<Grid> {
    Grid::new(dim, n, length)
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dim must be 1, 2 or 3, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive, got {length}"
            )));
        }
        let offsets: Vec<i64> = (0..n)
            .map(|i| {
                if i < n / 2 {
                    i as i64
                } else {
                    i as i64 - n as i64
                }
            })
            .collect();
        let scale = 2.0 * PI / length;
        let axis_xi: Vec<f64> = offsets.iter().map(|&k| scale * k as f64).collect();
        let total = n.pow(dim as u32);
        let mut xi2 = vec![0.0; total];
        let mut keep = vec![true; total];
        for (flat, (x2, kp)) in xi2.iter_mut().zip(keep.iter_mut()).enumerate() {
            let mut rem = flat;
            let mut s = 0.0;
            let mut ok = true;
            for _ in 0..dim {
                let i = rem % n;
                rem /= n;
                s += axis_xi[i] * axis_xi[i];
                if 3 * offsets[i].unsigned_abs() as usize >= n {
                    ok = false;
                }
            }
            *x2 = s;
            *kp = ok;
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                length,
                offsets,
                axis_xi,
                xi2,
                keep,
                fwd,
                inv,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of grid points (and modes).
    pub fn len(&self) -> usize {
        self.inner.xi2.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `(length/n)^dim`.
    pub fn weight(&self) -> f64 {
        (self.inner.length / self.inner.n as f64).powi(self.inner.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.inner.dim as i32)
    }

    /// Wavenumbers along one axis in FFT order.
    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.inner.axis_xi
    }

    /// Integer offsets along one axis in FFT order.
    pub fn axis_offsets(&self) -> &[i64] {
        &self.inner.offsets
    }

    /// `|ξ|²` for every mode in storage order.
    pub fn xi2(&self) -> &[f64] {
        &self.inner.xi2
    }

    /// Mask of modes kept by the 2/3 dealiasing rule.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.keep
    }

    pub fn max_abs_xi(&self) -> f64 {
        self.inner.xi2.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    /// Per-axis index of a flat position (axis 0 slowest).
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let (n, d) = (self.inner.n, self.inner.dim);
        let mut out = [0; 3];
        let mut rem = flat;
        for a in (0..d).rev() {
            out[a] = rem % n;
            rem /= n;
        }
        out
    }

    /// Wavevector of a flat mode index; unused axes are zero.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut out = [0.0; 3];
        for a in 0..self.inner.dim {
            out[a] = self.inner.axis_xi[idx[a]];
        }
        out
    }

    /// Integer mode offsets of a flat mode index.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.unravel(flat);
        let mut out = [0; 3];
        for a in 0..self.inner.dim {
            out[a] = self.inner.offsets[idx[a]];
        }
        out
    }

    /// Flat storage index of an integer mode, if it is on the grid.
    pub fn mode_index(&self, mode: &[i64]) -> Option<usize> {
        let n = self.inner.n as i64;
        if mode.len() != self.inner.dim {
            return None;
        }
        let mut flat = 0usize;
        for &k in mode {
            if k < -n / 2 || k >= n / 2 {
                return None;
            }
            flat = flat * self.inner.n + k.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    /// Physical coordinates of a flat grid point.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.inner.length / self.inner.n as f64;
        let mut out = [0.0; 3];
        for a in 0..self.inner.dim {
            out[a] = h * idx[a] as f64;
        }
        out
    }

    /// Sorted list of distinct wavenumbers along one axis.
    pub fn sorted_wavenumbers(&self) -> Vec<f64> {
        let mut v = self.inner.axis_xi.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }

    fn transform_axes(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let (n, d) = (self.inner.n, self.inner.dim);
        let norm = 1.0 / (n as f64).sqrt();
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        if d == 1 {
            plan.process_with_scratch(data, &mut scratch);
        } else {
            let total = data.len();
            let mut line = vec![C64::new(0.0, 0.0); n];
            for axis in 0..d {
                let stride = n.pow((d - 1 - axis) as u32);
                let block = stride * n;
                for base in (0..total).step_by(block) {
                    for off in 0..stride {
                        let start = base + off;
                        for (j, v) in line.iter_mut().enumerate() {
                            *v = data[start + j * stride];
                        }
                        plan.process_with_scratch(&mut line, &mut scratch);
                        for (j, v) in line.iter().enumerate() {
                            data[start + j * stride] = *v;
                        }
                    }
                }
            }
        }
        let s = norm.powi(d as i32);
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// In-place unitary forward transform.
    pub fn forward(&self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.len());
        self.transform_axes(data, &self.inner.fwd);
    }

    /// In-place unitary inverse transform.
    pub fn inverse(&self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.len());
        self.transform_axes(data, &self.inner.inv);
    }

    /// Zeroes the modes removed by the 2/3 rule.
    pub fn dealias(&self, spec: &mut [C64]) {
        for (v, &k) in spec.iter_mut().zip(self.inner.keep.iter()) {
            if !k {
                *v = C64::new(0.0, 0.0);
            }
        }
    }

    /// `∫ |f|² dx` from spectral coefficients.
    pub fn spectral_mass(&self, spec: &[C64]) -> f64 {
        self.weight() * spec.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Weighted spectral norm `(w Σ weight(|ξ|²) |f̂|²)^{1/2}`.
    pub fn weighted_norm(&self, spec: &[C64], weight: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = spec
            .iter()
            .zip(self.inner.xi2.iter())
            .map(|(z, &x2)| weight(x2) * z.norm_sqr())
            .sum();
        (self.weight() * s).sqrt()
    }

    /// H^k norm of spectral coefficients.
    pub fn spectral_hk(&self, spec: &[C64], k: f64) -> f64 {
        self.weighted_norm(spec, |x2| (1.0 + x2).powf(k))
    }
}

/// Complex field on a grid with a lazily computed spectral view.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<C64>,
    spectral: OnceLock<Vec<C64>>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<C64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self {
            grid: grid.clone(),
            values,
            spectral: OnceLock::new(),
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![C64::new(0.0, 0.0); grid.len()],
            spectral: OnceLock::new(),
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> C64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).collect();
        Self {
            grid: grid.clone(),
            values,
            spectral: OnceLock::new(),
        }
    }

    /// Builds a field from spectral coefficients in FFT order.
    pub fn from_spectral(grid: &Grid, spec: Vec<C64>) -> Result<Self> {
        grid.check_len(spec.len())?;
        let mut values = spec.clone();
        grid.inverse(&mut values);
        let cache = OnceLock::new();
        let _ = cache.set(spec);
        Ok(Self {
            grid: grid.clone(),
            values,
            spectral: cache,
        })
    }

    /// Band-limited random field with modes `|k_a| <= band`, coefficients
    /// decaying like `(1+|ξ|²)^{-1}` and unit L² norm scaled by `amplitude`.
    pub fn random_bandlimited<R: Rng>(grid: &Grid, rng: &mut R, band: i64, amplitude: f64) -> Self {
        let mut spec = vec![C64::new(0.0, 0.0); grid.len()];
        for (i, s) in spec.iter_mut().enumerate() {
            let m = grid.mode(i);
            if m[..grid.dim()].iter().all(|k| k.abs() <= band) {
                let decay = 1.0 / (1.0 + grid.xi2()[i]);
                *s = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
            }
        }
        let norm = grid.spectral_mass(&spec).sqrt();
        if norm > 0.0 {
            for s in spec.iter_mut() {
                *s *= amplitude / norm;
            }
        }
        Self::from_spectral(grid, spec).expect("length matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Physical values.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Mutable physical values; invalidates the spectral view.
    pub fn values_mut(&mut self) -> &mut [C64] {
        self.spectral = OnceLock::new();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Spectral coefficients (unitary DFT), computed on first use.
    pub fn spectral(&self) -> &[C64] {
        self.spectral.get_or_init(|| {
            let mut s = self.values.clone();
            self.grid.forward(&mut s);
            s
        })
    }

    /// Forward transform as an owned array.
    pub fn transform(&self) -> Vec<C64> {
        self.spectral().to_vec()
    }

    /// Physical values recovered from the spectral view.
    pub fn inverse_transform(&self) -> Vec<C64> {
        let mut v = self.spectral().to_vec();
        self.grid.inverse(&mut v);
        v
    }

    /// Sobolev norm `(Σ ⟨ξ⟩^{2k} |f̂|²)^{1/2}` scaled so that `k = 0` is `‖f‖_{L²}`.
    pub fn norm_hk(&self, k: f64) -> f64 {
        self.grid.spectral_hk(self.spectral(), k)
    }

    /// `(∫ |f|^p dx)^{1/p}` by grid quadrature.
    pub fn norm_lp(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm().powf(p)).sum();
        (self.grid.weight() * s).powf(1.0 / p)
    }

    /// L² norm from physical values.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (self.grid.weight() * s).sqrt()
    }

    /// `∫ conj(f) g dx`.
    pub fn inner(&self, other: &Field) -> C64 {
        let s: C64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.grid.weight()
    }

    pub fn conj(&self) -> Field {
        Field::new(&self.grid, self.values.iter().map(|z| z.conj()).collect()).unwrap()
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: C64, other: &Field, b: C64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let v = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(x, y)| a * x + b * y)
            .collect();
        Field::new(&self.grid, v)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpby(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, a: C64) -> Field {
        Field::new(&self.grid, self.values.iter().map(|z| a * z).collect()).unwrap()
    }

    /// Multiplies spectral coefficients by a precomputed table.
    pub fn apply_table(&self, table: &[C64]) -> Field {
        let spec = self
            .spectral()
            .iter()
            .zip(table.iter())
            .map(|(f, m)| f * m)
            .collect();
        Field::from_spectral(&self.grid, spec).unwrap()
    }

    /// Largest imaginary part in physical space.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Two-component state `(ψ, φ)` on one grid.
#[derive(Clone, Debug)]
pub struct FieldPair {
    pub psi: Field,
    pub phi: Field,
}

impl FieldPair {
    pub fn new(psi: Field, phi: Field) -> Result<Self> {
        if psi.grid() != phi.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { psi, phi })
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    pub fn norm_hk(&self, k: f64) -> f64 {
        (self.psi.norm_hk(k).powi(2) + self.phi.norm_hk(k).powi(2)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn wavenumber_tables() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        assert_eq!(
            g.sorted_wavenumbers(),
            vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
        );
        let g = make_grid(1, 8, PI).unwrap();
        assert_eq!(
            g.sorted_wavenumbers(),
            vec![-8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0]
        );
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.sorted_wavenumbers().first(), Some(&-8.0));
        assert_eq!(g.sorted_wavenumbers().last(), Some(&7.0));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(1, 12, 1.0).is_err());
        assert!(make_grid(4, 8, 1.0).is_err());
        assert!(make_grid(0, 8, 1.0).is_err());
        assert!(make_grid(1, 4, 1.0).is_err());
        assert!(make_grid(1, 8, -1.0).is_err());
    }

    #[test]
    fn quadrature_weight() {
        let g = make_grid(3, 8, 3.0).unwrap();
        assert!(rel(g.weight() * g.len() as f64, 27.0) < 1e-15);
        let one = Field::from_fn(&g, |_| C64::new(1.0, 0.0));
        assert!(rel(one.norm_lp(1.5), 27f64.powf(1.0 / 1.5)) < 1e-14);
    }

    #[test]
    fn constant_and_plane_wave_spectra() {
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        let one = Field::from_fn(&g, |_| C64::new(1.0, 0.0));
        let s = one.spectral();
        assert!((s[0].norm() - 4.0).abs() < 1e-12);
        assert!(s[1..].iter().all(|z| z.norm() < 1e-12));
        let w = Field::from_fn(&g, |x| C64::from_polar(1.0, x[0]));
        let s = w.spectral();
        let k1 = g.mode_index(&[1]).unwrap();
        for (i, z) in s.iter().enumerate() {
            if i == k1 {
                assert!((z.norm() - 4.0).abs() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_wave_sobolev_norms() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let f = Field::from_fn(&g, |x| C64::from_polar(1.0, x[0]));
        assert!(rel(f.norm_hk(1.0), 2f64.sqrt() * f.norm_hk(0.0)) < 1e-13);
        let c = Field::from_fn(&g, |_| C64::new(2.5, 0.0));
        assert!(rel(c.norm_hk(3.0), c.norm_hk(0.0)) < 1e-13);
    }

    #[test]
    fn multidimensional_roundtrip_and_modes() {
        let g = make_grid(3, 8, 2.0 * PI).unwrap();
        let f = Field::from_fn(&g, |x| C64::from_polar(1.0, 2.0 * x[0] - x[2]));
        let k = g.mode_index(&[2, 0, -1]).unwrap();
        let s = f.spectral();
        assert!((s[k].norm() - (g.len() as f64).sqrt()).abs() < 1e-10);
        assert_eq!(g.mode(k), [2, 0, -1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Field::random_bandlimited(&g, &mut rng, 3, 1.0);
        let back = r.inverse_transform();
        for (a, b) in back.iter().zip(r.values()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn dealias_mask_two_thirds() {
        let g = make_grid(1, 256, 2.0 * PI).unwrap();
        let kept = g.dealias_mask().iter().filter(|&&k| k).count();
        assert_eq!(kept, 2 * 85 + 1);
    }
}
