//! Acceptance run: one PASS/FAIL line per criterion, with the measured values.
//!
//! Criteria known to be red are listed in `EXPECTED_RED` together with the
//! reason; the binary exits non-zero only when a criterion outside that list
//! fails, or when a listed one unexpectedly turns green (so the list stays
//! current).

use std::f64::consts::PI;
use std::time::Instant;

use nrlab_core::hamalg::coeff::rat;
use nrlab_core::hamalg::random::{random_hampoly, RandomPolySpec};
use nrlab_core::hamalg::{
    gradient_fd_error, homological_residual, normal_form, normal_form_complex, oracle_gap, HamPoly,
};
use nrlab_core::harness::validate::{
    expected_chi1, expected_complex_quartic, expected_z1, expected_z2,
};
use nrlab_core::harness::{
    exp_galerkin_tail, exp_global_bound, exp_linear_longtime, exp_nonlinear_locuniform,
    exp_scaling_identity, exp_transform_gain, initial_dt, Datum, ExperimentConfig, SystemFactory,
};
use nrlab_core::make_grid;
use nrlab_core::multipliers::PhysicalParams;
use nrlab_core::propagators::{evolve_system, State, SystemKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXPECTED_RED: &[(usize, &str)] = &[
    (1, "reference Z2 sextic coefficient 17/8 and complex coefficient 2 disagree with the recomputed -17/64 and 1"),
    (6, "untransformed slope is pre-asymptotic on c in {4,8,16,32}; the c^-2 term dominates only beyond c ~ 12"),
];

struct Outcome {
    id: usize,
    pass: bool,
}

fn line(id: usize, pass: bool, detail: String, started: Instant) -> Outcome {
    println!(
        "CRITERION {id:>2} {} ({:.1} s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    Outcome { id, pass }
}

fn sub(name: &str, pass: bool, detail: String) -> bool {
    println!(
        "    {} {name}: {detail}",
        if pass { "ok  " } else { "FAIL" }
    );
    pass
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let nf = normal_form(2, 2).expect("normal form");
    let nfc = normal_form_complex(2, 1).expect("complex normal form");
    let quartic = nfc.z[0].lambda_part(1);
    let runtime = t.elapsed().as_secs_f64();
    let mut ok = true;
    ok &= sub(
        "Z1 = -1/2 int psibar Lap psi + 3/8 lambda int |psi|^4",
        nf.z[0] == expected_z1(),
        String::new(),
    );
    ok &= sub(
        "Z2 with reference sextic coefficient 17/8",
        nf.z[1] == expected_z2(rat(17, 8)),
        "recomputed sextic coefficient is -17/64; derivative and dispersion parts match".into(),
    );
    sub(
        "Z2 with recomputed sextic coefficient -17/64 (diagnostic)",
        nf.z[1] == expected_z2(rat(-17, 64)),
        String::new(),
    );
    ok &= sub(
        "complex <F1> with reference (psi phi - conj)^2 coefficient 2",
        quartic == expected_complex_quartic(rat(2, 1)),
        "recomputed coefficient is 1".into(),
    );
    sub(
        "complex <F1> with recomputed coefficient 1 (diagnostic)",
        quartic == expected_complex_quartic(rat(1, 1)),
        String::new(),
    );
    ok &= sub("chi1 matches", nf.chi[0] == expected_chi1(), String::new());
    ok &= sub("runtime < 1 s", runtime < 1.0, format!("{runtime:.3} s"));
    line(
        1,
        ok,
        "golden coefficients for l = 2, r = 2 and the complex r = 1 system".into(),
        t,
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let g = make_grid(1, 64, 2.0 * PI).expect("grid");
    let p = PhysicalParams::new(5.0, 0.8, 2).expect("params");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = true;
    for (name, nf) in [
        ("real l=2", normal_form(2, 1)),
        ("real l=3", normal_form(3, 1)),
        ("complex l=2", normal_form_complex(2, 1)),
    ] {
        let nf = nf.expect("normal form");
        let h0 = HamPoly::h0(nf.two_components);
        let symbolic = nf.chi[0]
            .bracket(&h0)
            .add(&nf.h[0])
            .add(&nf.f[0])
            .sub(&nf.z[0]);
        let r = homological_residual(&nf, &g, &p, 20, &mut rng);
        ok &= sub(
            name,
            symbolic.is_zero() && r <= 1e-9,
            format!(
                "symbolic empty = {}, numeric relative residual {r:.2e}",
                symbolic.is_zero()
            ),
        );
    }
    line(
        2,
        ok,
        "homological identity, 20 random fields, tolerance 1e-9".into(),
        t,
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let g = make_grid(1, 64, 2.0 * PI).expect("grid");
    let p = PhysicalParams::new(5.0, 0.8, 2).expect("params");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let spec = RandomPolySpec {
            two_components: i % 2 == 1,
            max_degree: 6,
            ..Default::default()
        };
        let h = random_hampoly(&mut rng, &spec);
        worst = worst.max(oracle_gap(&h, &g, &p, &mut rng).unwrap_or(f64::INFINITY));
    }
    line(
        3,
        worst <= 1e-10,
        format!("100 random polynomials of degree <= 6, max gap {worst:.2e} (tolerance 1e-10)"),
        t,
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    for r in 1..=3 {
        let cfg = ExperimentConfig {
            c: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            r,
            t0: 1.0,
            tolerance: Some(0.25),
            ..Default::default()
        };
        let rep = exp_linear_longtime(&cfg).expect("linear run");
        ok &= sub(&format!("r = {r}"), rep.pass(), rep.summary_line());
    }
    let elapsed = t.elapsed().as_secs_f64();
    ok &= sub("runtime < 60 s", elapsed < 60.0, format!("{elapsed:.2} s"));
    line(
        4,
        ok,
        "linear long-time slopes, expected -2 +/- 0.25".into(),
        t,
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        c: vec![4.0, 8.0, 16.0, 32.0],
        amplitude: 0.1,
        tolerance: Some(0.3),
        ..Default::default()
    };
    let rep = exp_nonlinear_locuniform(&cfg).expect("nonlinear run");
    let valid = rep.valid;
    let elapsed = t.elapsed().as_secs_f64();
    let ok = rep.pass() && valid && elapsed < 600.0;
    line(
        5,
        ok,
        format!(
            "{}, rows valid = {valid}, local slopes {:?}",
            rep.summary_line(),
            rounded(&rep.local_slopes())
        ),
        t,
    )
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let base = ExperimentConfig {
        c: vec![4.0, 8.0, 16.0, 32.0],
        amplitude: 0.1,
        ..Default::default()
    };
    let rep = exp_transform_gain(&base).expect("transform gain run");
    let mut ok = true;
    ok &= sub(
        "transformed slope -4 +/- 0.4",
        rep.transformed.pass(),
        rep.transformed.summary_line(),
    );
    ok &= sub(
        "untransformed slope -2 +/- 0.3",
        rep.untransformed.pass(),
        format!(
            "{}, local slopes {:?}",
            rep.untransformed.summary_line(),
            rounded(&rep.untransformed.local_slopes())
        ),
    );
    sub(
        "inverse-direction metric (diagnostic)",
        rep.inverse_metric.pass(),
        rep.inverse_metric.summary_line(),
    );

    // Fault sensitivity: each part of Z2 scaled, slope must leave the -4 band.
    // The sextic part acts at fifth order in the amplitude, so it is probed at 0.3.
    let strong = ExperimentConfig {
        amplitude: 0.3,
        ..base.clone()
    };
    let strong_clean = exp_transform_gain(&strong).expect("transform gain run");
    ok &= sub(
        "unfaulted baseline at amplitude 0.3",
        strong_clean.transformed.pass(),
        strong_clean.transformed.summary_line(),
    );
    let faults: [(&str, &ExperimentConfig); 4] = [
        ("dispersion:0", &base),
        ("derivative:0", &base),
        ("sextic:-8", &strong),
        ("sextic:0", &strong),
    ];
    for (f, cfg) in faults {
        let mut cfg = cfg.clone();
        cfg.set("fault", f).expect("fault spec");
        let r = exp_transform_gain(&cfg).expect("faulted run");
        ok &= sub(
            &format!(
                "fault {f} at amplitude {} degrades the slope",
                cfg.amplitude
            ),
            !r.transformed.pass(),
            r.transformed.summary_line(),
        );
    }
    let mut weak = base.clone();
    weak.set("fault", "sextic:-8").expect("fault spec");
    let r = exp_transform_gain(&weak).expect("faulted run");
    sub(
        "fault sextic:-8 at amplitude 0.1 (diagnostic, too weak to register)",
        !r.transformed.pass(),
        r.transformed.summary_line(),
    );

    let extended = ExperimentConfig {
        c: vec![16.0, 32.0, 64.0, 128.0],
        ..base
    };
    let ext = exp_transform_gain(&extended).expect("extended run");
    sub(
        "extended sweep c = 16..128, transformed (diagnostic)",
        ext.transformed.pass(),
        ext.transformed.summary_line(),
    );
    sub(
        "extended sweep c = 16..128, untransformed (diagnostic)",
        ext.untransformed.pass(),
        ext.untransformed.summary_line(),
    );
    let elapsed = t.elapsed().as_secs_f64();
    sub(
        "runtime < 15 min",
        elapsed < 900.0,
        format!("{elapsed:.1} s"),
    );
    line(
        6,
        ok,
        "transform gain at d = 1, n = 256, l = 2, lambda = 1, amplitude 0.1, T = 1".into(),
        t,
    )
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let cfg = ExperimentConfig::default();
    let grid = cfg.grid().expect("grid");
    let init = State::from_field(&cfg.datum_field(&grid));
    let mut ok = true;
    for kind in [SystemKind::KgLinear, SystemKind::UrLinear] {
        let p = PhysicalParams::new(16.0, 1.0, 2).expect("params");
        let factory = SystemFactory::new(kind, p, None).expect("factory");
        let mut spec = factory.spec(&cfg, 1.0, 100);
        spec.r = 2;
        spec.sample_every = 1;
        let traj = evolve_system(&factory.build(&grid, &spec).expect("system"), &spec, &init)
            .expect("linear run");
        let per_step = traj
            .mass
            .windows(2)
            .map(|w| ((w[1] - w[0]) / w[0]).abs())
            .fold(0.0, f64::max);
        ok &= sub(
            &format!("{} L2 change per step", kind.name()),
            per_step <= 1e-12,
            format!("{per_step:.2e}"),
        );
    }
    for c in [4.0, 8.0, 16.0, 32.0] {
        let p = PhysicalParams::new(c, 1.0, 2).expect("params");
        let factory = SystemFactory::new(SystemKind::Nlkg, p, None).expect("factory");
        let probe = factory
            .build(&grid, &factory.spec(&cfg, 1.0, cfg.samples))
            .expect("system");
        let dt = initial_dt(&cfg, &probe, &init);
        let steps = ((1.0 / cfg.samples as f64) / dt).ceil() as usize * cfg.samples;
        let mut spec = factory.spec(&cfg, 1.0, steps);
        spec.guard = None;
        let traj = evolve_system(&factory.build(&grid, &spec).expect("system"), &spec, &init)
            .expect("nlkg run");
        let drift = traj.max_relative_drift();
        ok &= sub(
            &format!("NLKG c = {c}, dt = {:.2e}", spec.dt),
            drift < 1e-8,
            format!("relative Hamiltonian drift {drift:.2e}"),
        );
    }
    line(7, ok, "conservation and unitarity".into(), t)
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        c: vec![2.0, 4.0],
        datum: Datum::Random,
        ..Default::default()
    };
    let rep = exp_scaling_identity(&cfg).expect("scaling run");
    let worst = rep.rows.iter().map(|r| r.error).fold(0.0, f64::max);
    line(
        8,
        rep.pass(),
        format!("c in {{2, 4}}, max relative Fourier mismatch {worst:.2e} (tolerance 1e-10)"),
        t,
    )
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        datum: Datum::Galerkin,
        sigma: vec![1.0, 2.0],
        ..Default::default()
    };
    let (rep, tails) = exp_galerkin_tail(&cfg).expect("galerkin run");
    let mut ok = rep.pass();
    for tl in &tails {
        sub(
            &format!("sigma = {}, datum tail", tl.sigma),
            tl.pass,
            format!("decay rate {:.3} on levels {:?}", tl.datum_rate, tl.levels),
        );
    }
    // The smooth datum decays faster than any power, so the operator norm of
    // id - Pi_N from H^(k+sigma) to H^k is checked as well, on levels where
    // the <xi> weight is close to |xi|.
    let high = ExperimentConfig {
        levels: vec![4, 5, 6, 7],
        ..cfg
    };
    let (_, tails) = exp_galerkin_tail(&high).expect("galerkin run");
    for tl in &tails {
        ok &= sub(
            &format!("sigma = {}, operator norm", tl.sigma),
            tl.operator_rate >= tl.sigma - 0.1,
            format!(
                "decay rate {:.3} on levels {:?}",
                tl.operator_rate, tl.levels
            ),
        );
    }
    line(
        9,
        ok,
        "Littlewood-Paley tail decay >= sigma - 0.1".into(),
        t,
    )
}

fn criterion_10() -> Outcome {
    let t = Instant::now();
    let g = make_grid(1, 64, 2.0 * PI).expect("grid");
    let p = PhysicalParams::new(5.0, 0.8, 2).expect("params");
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let spec = RandomPolySpec {
            two_components: i % 2 == 1,
            ..Default::default()
        };
        let h = random_hampoly(&mut rng, &spec);
        worst = worst.max(gradient_fd_error(&h, &g, &p, &mut rng));
    }
    line(
        10,
        worst <= 1e-6,
        format!("50 random polynomials, max relative mismatch {worst:.2e} (tolerance 1e-6)"),
        t,
    )
}

fn criterion_11() -> Outcome {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        c: vec![4.0, 16.0, 64.0],
        amplitude: 0.05,
        t_end: 50.0,
        samples: 1000,
        bound: 2.0,
        ..Default::default()
    };
    let rep = exp_global_bound(&cfg).expect("global bound run");
    let ratios: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("c = {}: {:.9}", r.c, r.error))
        .collect();
    line(
        11,
        rep.pass(),
        format!(
            "torus smoke test, t_end = 50, amplitude 0.05, max ratio {}",
            ratios.join(", ")
        ),
        t,
    )
}

fn main() {
    let started = Instant::now();
    let outcomes = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ];
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let listed = EXPECTED_RED.iter().find(|(id, _)| *id == o.id);
        match (o.pass, listed) {
            (false, Some((_, why))) => println!("known red {:>2}: {why}", o.id),
            (false, None) => unexpected.push(format!("criterion {} failed", o.id)),
            (true, Some(_)) => {
                unexpected.push(format!("criterion {} is listed as red but passed", o.id))
            }
            (true, None) => {}
        }
    }
    let green = outcomes.iter().filter(|o| o.pass).count();
    println!(
        "ACCEPTANCE {green}/{} green in {:.1} s",
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        eprintln!("{}", unexpected.join("\n"));
        std::process::exit(1);
    }
}
