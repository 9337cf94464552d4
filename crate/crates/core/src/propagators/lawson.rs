//! Lawson fourth-order Runge-Kutta: the diagonal linear part is applied
//! exactly and the classical four-stage scheme runs in the rotated frame.

use super::system::System;
use crate::grid::C64;

/// Precomputed phase tables `e^{iωh}` and `e^{iωh/2}` for one step size.
pub struct LawsonStepper<'a> {
    system: &'a System,
    h: f64,
    full: Vec<Vec<C64>>,
    half: Vec<Vec<C64>>,
}

fn phases(system: &System, t: f64) -> Vec<Vec<C64>> {
    (0..system.components())
        .map(|comp| {
            let common = C64::from_polar(1.0, system.frame_shift(comp) * t);
            system
                .omega(comp)
                .iter()
                .map(|&w| common * C64::from_polar(1.0, w * t))
                .collect()
        })
        .collect()
}

fn mul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).collect())
        .collect()
}

/// `a + s·b`.
fn axpy(a: &[Vec<C64>], s: f64, b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q * s).collect())
        .collect()
}

impl<'a> LawsonStepper<'a> {
    pub fn new(system: &'a System, h: f64) -> Self {
        Self {
            system,
            h,
            full: phases(system, h),
            half: phases(system, 0.5 * h),
        }
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    /// Advances `u` by one step.
    pub fn step(&self, u: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let (h, e, e2) = (self.h, &self.full, &self.half);
        if self.system.is_linear() {
            return mul(e, u);
        }
        let n = |x: &[Vec<C64>]| self.system.nonlinear(x);
        let k1 = n(u);
        let k2 = n(&mul(e2, &axpy(u, 0.5 * h, &k1)));
        let e2u = mul(e2, u);
        let k3 = n(&axpy(&e2u, 0.5 * h, &k2));
        let eu = mul(e, u);
        let k4 = n(&axpy(&eu, h, &mul(e2, &k3)));
        let ek1 = mul(e, &k1);
        let mid = mul(e2, &axpy(&k2, 1.0, &k3));
        let mut out = eu;
        for c in 0..out.len() {
            for i in 0..out[c].len() {
                out[c][i] += h / 6.0 * (ek1[c][i] + 2.0 * mid[c][i] + k4[c][i]);
            }
        }
        out
    }
}
