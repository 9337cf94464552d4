//! Convergence reports and their CSV, `.dat` and summary renderings.

use std::io::Write;

use super::fit::{fit_loglog, local_slopes, SlopeFit};
use crate::error::Result;

/// One measurement: sweep parameter (`c`, or `N` for cut-off sweeps), window, error.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub c: f64,
    pub t: f64,
    pub error: f64,
    pub norm: String,
    /// Step-halving estimate of the time-discretization error, if any.
    pub temporal_error: Option<f64>,
}

/// Outcome of one experiment.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub rows: Vec<Row>,
    pub fit: Option<SlopeFit>,
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub residual_max: f64,
    /// False when a row failed its validity checks (temporal error, hypotheses).
    pub valid: bool,
    /// Extra pass condition beyond the slope (for bound-type experiments).
    pub extra_pass: Option<bool>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn new(
        experiment: &str,
        rows: Vec<Row>,
        expected: Option<f64>,
        tolerance: f64,
        residual_max: f64,
    ) -> Self {
        let xs: Vec<f64> = rows.iter().map(|r| r.c).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let fit = fit_loglog(&xs, &ys).ok();
        Self {
            experiment: experiment.to_string(),
            rows,
            fit,
            expected,
            tolerance,
            residual_max,
            valid: true,
            extra_pass: None,
            notes: Vec::new(),
        }
    }

    pub fn slope(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope)
    }

    pub fn residual(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.residual)
    }

    /// Slope within tolerance, residual below threshold, rows valid, extra condition met.
    pub fn pass(&self) -> bool {
        let slope_ok = match (self.expected, self.fit) {
            (Some(e), Some(f)) => {
                (f.slope - e).abs() <= self.tolerance && f.residual <= self.residual_max
            }
            (Some(_), None) => false,
            (None, _) => true,
        };
        slope_ok && self.valid && self.extra_pass.unwrap_or(true)
    }

    pub fn local_slopes(&self) -> Vec<f64> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.c).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.error).collect();
        local_slopes(&xs, &ys)
    }

    /// Running slope: fit over rows `0..=i`.
    pub fn running_slopes(&self) -> Vec<Option<f64>> {
        (0..self.rows.len())
            .map(|i| {
                let xs: Vec<f64> = self.rows[..=i].iter().map(|r| r.c).collect();
                let ys: Vec<f64> = self.rows[..=i].iter().map(|r| r.error).collect();
                fit_loglog(&xs, &ys).ok().map(|f| f.slope)
            })
            .collect()
    }

    /// CSV with header `c,T,error,norm,slope_running`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["c", "T", "error", "norm", "slope_running"])?;
        for (row, s) in self.rows.iter().zip(self.running_slopes()) {
            w.write_record([
                format!("{}", row.c),
                format!("{:.12e}", row.t),
                format!("{:.12e}", row.error),
                row.norm.clone(),
                s.map_or_else(String::new, |v| format!("{v:.6}")),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Gnuplot-friendly columns `log2(c) log2(error) c error`.
    pub fn write_dat<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {} : log2(c) log2(error) c error", self.experiment)?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.12} {:.12} {} {:.12e}",
                r.c.log2(),
                r.error.log2(),
                r.c,
                r.error
            )?;
        }
        Ok(())
    }

    /// `SLOPE=<float> RESIDUAL=<float> PASS=<bool>`.
    pub fn summary_line(&self) -> String {
        format!(
            "SLOPE={:.6} RESIDUAL={:.6} PASS={}",
            self.slope(),
            self.residual(),
            self.pass()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(s: f64) -> Vec<Row> {
        [4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&c: &f64| Row {
                c,
                t: 1.0,
                error: 2.0 * c.powf(s),
                norm: "H^2".into(),
                temporal_error: None,
            })
            .collect()
    }

    #[test]
    fn summary_and_csv() {
        let r = ConvergenceReport::new("demo", rows(-2.0), Some(-2.0), 0.25, 0.25);
        assert!(r.pass());
        assert_eq!(
            r.summary_line(),
            "SLOPE=-2.000000 RESIDUAL=0.000000 PASS=true"
        );
        let csv = r.csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "c,T,error,norm,slope_running");
        assert!(lines[1].ends_with(','));
        assert!(lines[2].ends_with("-2.000000"));
        let bad = ConvergenceReport::new("demo", rows(-1.0), Some(-2.0), 0.25, 0.25);
        assert!(!bad.pass());
        let mut invalid = ConvergenceReport::new("demo", rows(-2.0), Some(-2.0), 0.25, 0.25);
        invalid.valid = false;
        assert!(!invalid.pass());
    }
}
