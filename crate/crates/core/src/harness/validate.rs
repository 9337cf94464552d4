//! Self-check suite: golden coefficients, symbolic/numeric consistency and
//! the invariants of grids, multipliers, flows and the fitter.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Datum, ExperimentConfig};
use super::experiments::{exp_galerkin_tail, exp_linear_longtime, exp_scaling_identity};
use super::fit::fit_loglog;
use crate::grid::{make_grid, Field, Grid, C64};
use crate::hamalg::coeff::{c_one, imag, rat, real};
use crate::hamalg::random::{random_hampoly, RandomPolySpec};
use crate::hamalg::{
    gradient_fd_error, homological_residual, normal_form, normal_form_complex, oracle_gap, Factor,
    HamPoly, Monomial, Rat, PHI, PHI_BAR, PSI, PSI_BAR,
};
use crate::multipliers::{from_complex, to_complex, PhysicalParams};
use crate::propagators::{
    evolve, kg_linear_flow, lie_transform, Direction, EvolutionSpec, State, SystemKind,
};

/// One named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// All checks in execution order.
#[derive(Clone, Debug, Default)]
pub struct ValidationSummary {
    pub checks: Vec<CheckResult>,
}

impl ValidationSummary {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    fn push(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationSummary {
    /// One `CHECK <name> PASS|FAIL <detail>` line per check, then `SUMMARY`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "CHECK {} {} {}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.detail
            )?;
        }
        let failed = self.failures().len();
        write!(
            f,
            "SUMMARY passed={} failed={} PASS={}",
            self.checks.len() - failed,
            failed,
            self.pass()
        )
    }
}

fn lap(var: crate::hamalg::FieldVar, m: u32) -> Factor {
    Factor::new(var, m)
}

/// `-(1/2)∫ψ̄Δψ + (3/8)λ∫|ψ|⁴`.
pub fn expected_z1() -> HamPoly {
    HamPoly::from_monomials(&[
        Monomial::new(real(rat(-1, 2)), 0, vec![lap(PSI_BAR, 0), lap(PSI, 1)]),
        Monomial::plain(real(rat(3, 8)), 1, &[PSI, PSI, PSI_BAR, PSI_BAR]),
    ])
}

/// `κλ²∫|ψ|⁶ + (3/16)λ∫|ψ|²(ψ̄Δψ + ψΔψ̄) - (1/8)∫ψ̄Δ²ψ` for a given `κ`.
pub fn expected_z2(kappa: Rat) -> HamPoly {
    HamPoly::from_monomials(&[
        Monomial::plain(real(kappa), 2, &[PSI, PSI, PSI, PSI_BAR, PSI_BAR, PSI_BAR]),
        Monomial::new(
            real(rat(3, 16)),
            1,
            vec![lap(PSI, 0), lap(PSI_BAR, 0), lap(PSI_BAR, 0), lap(PSI, 1)],
        ),
        Monomial::new(
            real(rat(3, 16)),
            1,
            vec![lap(PSI, 0), lap(PSI_BAR, 0), lap(PSI, 0), lap(PSI_BAR, 1)],
        ),
        Monomial::new(real(rat(-1, 8)), 0, vec![lap(PSI_BAR, 0), lap(PSI, 2)]),
    ])
}

/// `(λ/8)[3(|ψ|²+|φ|²)² + k(ψφ - ψ̄φ̄)²]`.
pub fn expected_complex_quartic(k: Rat) -> HamPoly {
    let eighth = |r: Rat| real(r / rat(8, 1));
    HamPoly::from_monomials(&[
        Monomial::plain(eighth(rat(3, 1)), 1, &[PSI, PSI, PSI_BAR, PSI_BAR]),
        Monomial::plain(eighth(rat(3, 1)), 1, &[PHI, PHI, PHI_BAR, PHI_BAR]),
        Monomial::plain(
            eighth(rat(6, 1) - k.clone() * rat(2, 1)),
            1,
            &[PSI, PSI_BAR, PHI, PHI_BAR],
        ),
        Monomial::plain(eighth(k.clone()), 1, &[PSI, PSI, PHI, PHI]),
        Monomial::plain(eighth(k), 1, &[PSI_BAR, PSI_BAR, PHI_BAR, PHI_BAR]),
    ])
}

/// `(λ/16)[(ψ⁴ - ψ̄⁴)/(4i) + (2/i)(ψ³ψ̄ - ψψ̄³)]`.
pub fn expected_chi1() -> HamPoly {
    let m = |vars: &[crate::hamalg::FieldVar]| {
        HamPoly::from_monomial(Monomial::plain(c_one(), 1, vars))
    };
    let p4 = m(&[PSI; 4]);
    let pb4 = m(&[PSI_BAR; 4]);
    let p31 = m(&[PSI, PSI, PSI, PSI_BAR]);
    let p13 = m(&[PSI, PSI_BAR, PSI_BAR, PSI_BAR]);
    p4.sub(&pb4)
        .scale(&imag(rat(-1, 4)))
        .add(&p31.sub(&p13).scale(&imag(rat(-2, 1))))
        .scale_rat(&rat(1, 16))
}

fn small_grid() -> Grid {
    make_grid(1, 64, 2.0 * PI).expect("valid grid")
}

fn golden(s: &mut ValidationSummary) {
    match normal_form(2, 2) {
        Ok(nf) => {
            s.push("normal_form_certified_l2_r2", nf.certified(), "");
            s.push(
                "z1_l2",
                nf.z[0] == expected_z1(),
                format!("got {}", one_line(&nf.z[0])),
            );
            s.push(
                "z2_l2_derived_sextic_-17/64",
                nf.z[1] == expected_z2(rat(-17, 64)),
                format!("got {}", one_line(&nf.z[1])),
            );
            s.push(
                "z2_l2_reference_sextic_17/8",
                nf.z[1] == expected_z2(rat(17, 8)),
                "reference sextic coefficient; the recomputed value is -17/64",
            );
            s.push(
                "chi1_l2",
                nf.chi[0] == expected_chi1(),
                format!("got {}", one_line(&nf.chi[0])),
            );
        }
        Err(e) => s.push("normal_form_l2_r2", false, e.to_string()),
    }
    match normal_form_complex(2, 1) {
        Ok(nf) => {
            let quartic = nf.z[0].lambda_part(1);
            s.push("complex_z1_certified", nf.certified(), "");
            s.push(
                "complex_z1_derived_k=1",
                quartic == expected_complex_quartic(rat(1, 1)),
                format!("got {}", one_line(&quartic)),
            );
            s.push(
                "complex_z1_reference_k=2",
                quartic == expected_complex_quartic(rat(2, 1)),
                "reference (psi phi - conj)^2 coefficient; the recomputed value is 1",
            );
        }
        Err(e) => s.push("normal_form_complex", false, e.to_string()),
    }
    for (l, r) in [(2, 1), (2, 3), (3, 1), (3, 2)] {
        let ok = normal_form(l, r).map(|nf| nf.certified()).unwrap_or(false);
        s.push(&format!("normal_form_certified_l{l}_r{r}"), ok, "");
    }
}

fn one_line(h: &HamPoly) -> String {
    h.to_string()
        .lines()
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(" + ")
}

fn algebra(s: &mut ValidationSummary) {
    let g = small_grid();
    let p = PhysicalParams::new(5.0, 0.8, 2).expect("valid params");
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for nf in [
        normal_form(2, 1),
        normal_form(3, 1),
        normal_form_complex(2, 1),
    ]
    .into_iter()
    .flatten()
    {
        worst = worst.max(homological_residual(&nf, &g, &p, 20, &mut rng));
    }
    s.push(
        "homological_identity_numeric",
        worst <= 1e-9,
        format!("max relative residual {worst:.2e}"),
    );

    let mut worst_gap = 0.0f64;
    let mut worst_grad = 0.0f64;
    let mut antisymmetric = true;
    for i in 0..20 {
        let spec = RandomPolySpec {
            two_components: i % 2 == 1,
            ..Default::default()
        };
        let h = random_hampoly(&mut rng, &spec);
        worst_gap = worst_gap.max(oracle_gap(&h, &g, &p, &mut rng).unwrap_or(f64::INFINITY));
        worst_grad = worst_grad.max(gradient_fd_error(&h, &g, &p, &mut rng));
        let small = random_hampoly(
            &mut rng,
            &RandomPolySpec {
                max_degree: 4,
                ..spec
            },
        );
        let h0 = HamPoly::h0(spec.two_components);
        antisymmetric &= small.bracket(&h0).add(&h0.bracket(&small)).is_zero();
    }
    s.push(
        "gauge_average_oracle",
        worst_gap <= 1e-10,
        format!("max gap {worst_gap:.2e}"),
    );
    s.push(
        "bracket_antisymmetry",
        antisymmetric,
        "{H, h0} + {h0, H} = 0 on random polynomials",
    );
    s.push(
        "gradient_finite_difference",
        worst_grad <= 1e-6,
        format!("max relative mismatch {worst_grad:.2e}"),
    );
}

fn numerics(s: &mut ValidationSummary) {
    let g = small_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let f = Field::random_bandlimited(&g, &mut rng, 12, 1.0);
    let phys = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.weight();
    let spec = g.spectral_mass(&f.transform());
    s.push(
        "parseval",
        (phys - spec).abs() <= 1e-12 * phys,
        format!("{phys:.15e} vs {spec:.15e}"),
    );

    let moved = kg_linear_flow(&f, 8.0, 0.731);
    let drift = (moved.norm_l2() - f.norm_l2()).abs() / f.norm_l2();
    s.push(
        "linear_flow_unitary",
        drift <= 1e-12,
        format!("relative L2 change {drift:.2e}"),
    );

    let p = PhysicalParams::new(8.0, 1.0, 2).expect("valid params");
    let real = |f: &Field| {
        Field::new(&g, f.values().iter().map(|z| C64::new(z.re, 0.0)).collect())
            .expect("grid length")
    };
    let (u, v) = (real(&f), real(&f.scale(C64::new(0.0, 1.0))));
    let rt = to_complex(&u, &v, p.c)
        .and_then(|psi| from_complex(&psi, p.c))
        .and_then(|(u2, v2)| Ok(u2.sub(&u)?.max_abs().max(v2.sub(&v)?.max_abs())));
    let rt = rt.unwrap_or(f64::INFINITY);
    s.push(
        "change_of_variables_roundtrip",
        rt <= 1e-12,
        format!("max error {rt:.2e}"),
    );

    let datum = Field::from_fn(&g, |x| {
        C64::from_polar(0.1, x[0]) + C64::from_polar(0.05, -2.0 * x[0])
    });
    let lie = lie_transform(&datum, &p, Direction::Forward)
        .and_then(|t| lie_transform(&t, &p, Direction::Inverse));
    let lie_err = lie
        .and_then(|b| b.sub(&datum))
        .map(|d| d.max_abs())
        .unwrap_or(f64::INFINITY);
    s.push(
        "lie_transform_roundtrip",
        lie_err <= 1e-10,
        format!("max error {lie_err:.2e}"),
    );

    let mut spec = EvolutionSpec::new(SystemKind::Nlkg, p, 1.0 / 1024.0, 1.0);
    spec.sample_every = 64;
    spec.guard = None;
    let drift = evolve(&g, &spec, &State::from_field(&datum))
        .map(|t| t.max_relative_drift())
        .unwrap_or(f64::INFINITY);
    s.push(
        "nlkg_hamiltonian_drift",
        drift < 1e-8,
        format!("max relative drift {drift:.2e} at c = 8, T = 1"),
    );

    let x = [4.0, 8.0, 16.0, 32.0];
    let y: Vec<f64> = x.iter().map(|c: &f64| 0.3 * c.powf(-3.0)).collect();
    let fit = fit_loglog(&x, &y)
        .map(|f| (f.slope + 3.0).abs())
        .unwrap_or(f64::INFINITY);
    s.push(
        "slope_fit_recovery",
        fit <= 1e-10,
        format!("slope error {fit:.2e}"),
    );
}

fn experiments(s: &mut ValidationSummary) {
    let mut cfg = ExperimentConfig {
        c: vec![4.0, 8.0, 16.0, 32.0, 64.0],
        n: 64,
        ..Default::default()
    };
    for r in 1..=3 {
        cfg.r = r;
        match exp_linear_longtime(&cfg) {
            Ok(rep) => s.push(
                &format!("linear_longtime_r{r}"),
                rep.pass(),
                rep.summary_line(),
            ),
            Err(e) => s.push(&format!("linear_longtime_r{r}"), false, e.to_string()),
        }
    }
    cfg.r = 1;
    let a = exp_linear_longtime(&cfg).map(|r| r.csv_string());
    let b = exp_linear_longtime(&cfg).map(|r| r.csv_string());
    s.push(
        "csv_deterministic",
        matches!((&a, &b), (Ok(x), Ok(y)) if x == y),
        "",
    );

    let sc = ExperimentConfig {
        c: vec![2.0, 4.0],
        datum: Datum::Random,
        ..Default::default()
    };
    match exp_scaling_identity(&sc) {
        Ok(rep) => s.push(
            "scaling_identity",
            rep.pass(),
            format!(
                "max mismatch {:.2e}",
                rep.rows.iter().map(|r| r.error).fold(0.0, f64::max)
            ),
        ),
        Err(e) => s.push("scaling_identity", false, e.to_string()),
    }
    let gt = ExperimentConfig {
        datum: Datum::Galerkin,
        sigma: vec![1.0, 2.0],
        ..Default::default()
    };
    match exp_galerkin_tail(&gt) {
        Ok((rep, _)) => s.push("galerkin_tail", rep.pass(), rep.notes.join("; ")),
        Err(e) => s.push("galerkin_tail", false, e.to_string()),
    }
}

/// Runs every check. Reference-value checks that disagree with the
/// recomputed algebra fail here by design.
pub fn run_validation_suite() -> ValidationSummary {
    let mut s = ValidationSummary::default();
    golden(&mut s);
    algebra(&mut s);
    numerics(&mut s);
    experiments(&mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_polynomials_are_distinct() {
        assert_ne!(expected_z2(rat(-17, 64)), expected_z2(rat(17, 8)));
        assert_ne!(
            expected_complex_quartic(rat(1, 1)),
            expected_complex_quartic(rat(2, 1))
        );
    }
}
