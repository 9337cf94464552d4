//! Least-squares slopes on log-log data.

use crate::error::{Error, Result};

/// Fit of `log₂ y = slope · log₂ x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log₂ y`.
    pub residual: f64,
    /// Standard error of the slope (zero for two points).
    pub stderr: f64,
}

impl SlopeFit {
    /// Half-width of a two-sided band of `z` standard errors.
    pub fn band(&self, z: f64) -> f64 {
        z * self.stderr
    }
}

/// Ordinary least squares of `log₂ y` against `log₂ x`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!(
            "length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    if let Some(bad) = x.iter().chain(y).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(format!(
            "non-positive or non-finite value {bad}"
        )));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    fit_linear(&lx, &ly)
}

/// Ordinary least squares of `y` against `x`.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let residual = (ss / n).sqrt();
    let stderr = if x.len() > 2 {
        (ss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
        stderr,
    })
}

/// Slopes between consecutive points.
pub fn local_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(a, b)| (b[1] / b[0]).log2() / (a[1] / a[0]).log2())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_laws() {
        let x = [4.0, 8.0, 16.0, 32.0, 64.0];
        for s in [-4.0, -2.0, 0.5, 3.0] {
            let y: Vec<f64> = x.iter().map(|c: &f64| 3.7 * c.powf(s)).collect();
            let f = fit_loglog(&x, &y).unwrap();
            assert!((f.slope - s).abs() < 1e-10);
            assert!(f.residual < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog(&[1.0], &[1.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(fit_loglog(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn local_slopes_of_power_law() {
        let x = [2.0, 4.0, 8.0];
        let y = [1.0, 0.25, 0.0625];
        for s in local_slopes(&x, &y) {
            assert!((s + 2.0).abs() < 1e-12);
        }
    }
}
