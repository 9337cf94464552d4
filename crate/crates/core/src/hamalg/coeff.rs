//! Exact Gaussian-rational coefficients.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::grid::C64;

pub type Rat = BigRational;
pub type Coeff = Complex<BigRational>;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

pub fn real(r: Rat) -> Coeff {
    Coeff::new(r, Rat::zero())
}

pub fn imag(r: Rat) -> Coeff {
    Coeff::new(Rat::zero(), r)
}

pub fn c_one() -> Coeff {
    Coeff::new(Rat::one(), Rat::zero())
}

pub fn c_i() -> Coeff {
    Coeff::new(Rat::zero(), Rat::one())
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        // Huge numerators or denominators: scale down before dividing.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900);
        let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
        n / d
    }
}

pub fn coeff_to_c64(c: &Coeff) -> C64 {
    C64::new(rat_to_f64(&c.re), rat_to_f64(&c.im))
}

/// Generalized binomial coefficient `binom(alpha, j)`.
pub fn binomial(alpha: &Rat, j: u32) -> Rat {
    let mut out = Rat::one();
    for m in 0..j {
        out = out * (alpha - rat_int(m as i64)) / rat_int(m as i64 + 1);
    }
    out
}

pub fn factorial(n: u32) -> Rat {
    (1..=n as i64).fold(Rat::one(), |acc, k| acc * rat_int(k))
}

/// `p/q` or `p` for integers.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Real coefficients print as `p/q`, imaginary ones as `p/q*i`, mixed ones in parentheses.
pub fn format_coeff(c: &Coeff) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => format_rat(&c.re),
        (true, false) => format!("{}*i", format_rat(&c.im)),
        (false, false) => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!(
                "({}{}{}*i)",
                format_rat(&c.re),
                sign,
                format_rat(&c.im.abs())
            )
        }
    }
}
