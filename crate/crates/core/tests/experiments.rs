//! Integration tests for the experiment drivers and configuration handling.

use nrlab_core::harness::{
    exp_evolve, exp_galerkin_tail, exp_global_bound, exp_nonlinear_locuniform, Datum,
    ExperimentConfig,
};
use nrlab_core::propagators::{kg_linear_flow, SystemKind};
use nrlab_core::Error;

fn quick(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).expect("config parses")
}

#[test]
fn nlkg_without_coupling_follows_the_linear_flow() {
    let cfg = quick("experiment = evolve\nsystem = nlkg\nlambda = 0\nc = 6\nn = 64\ndt = 0.001\nt_end = 0.25\nsamples = 5\n");
    let run = exp_evolve(&cfg).unwrap();
    let grid = cfg.grid().unwrap();
    let exact = kg_linear_flow(&cfg.datum_field(&grid), 6.0, 0.25);
    let got = run.trajectory.last().field(&grid, 0);
    let err = got.sub(&exact).unwrap().max_abs() / exact.max_abs();
    assert!(err < 1e-11, "{err}");
}

#[test]
fn evolve_is_deterministic_and_samples_as_requested() {
    let cfg = quick("experiment = evolve\nsystem = nf_order1\nc = 8\nn = 64\ndt = 0.01\nt_end = 0.5\nsamples = 10\n");
    let a = exp_evolve(&cfg).unwrap();
    let b = exp_evolve(&cfg).unwrap();
    assert_eq!(a.trajectory.times, b.trajectory.times);
    assert_eq!(a.trajectory.last().comps, b.trajectory.last().comps);
    assert_eq!(a.trajectory.times.len(), 11);
    assert!((a.trajectory.times.last().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn nonlinear_error_grows_with_amplitude() {
    let err = |amp: f64| {
        let cfg = ExperimentConfig {
            c: vec![8.0, 16.0],
            amplitude: amp,
            n: 64,
            ..Default::default()
        };
        exp_nonlinear_locuniform(&cfg).unwrap().rows[0].error
    };
    let (small, large) = (err(0.02), err(0.08));
    assert!(large > 2.0 * small, "{small} vs {large}");
}

#[test]
fn global_bound_holds_for_small_data_on_a_short_window() {
    let cfg = ExperimentConfig {
        c: vec![4.0, 8.0],
        amplitude: 0.05,
        t_end: 2.0,
        n: 64,
        samples: 20,
        ..Default::default()
    };
    let rep = exp_global_bound(&cfg).unwrap();
    assert!(rep.pass());
    assert!(rep
        .rows
        .iter()
        .all(|r| r.error >= 1.0 - 1e-9 && r.error <= 2.0));
}

#[test]
fn galerkin_rejects_levels_beyond_the_grid() {
    let cfg = ExperimentConfig {
        datum: Datum::Galerkin,
        n: 32,
        levels: vec![3, 4, 5, 6],
        ..Default::default()
    };
    assert!(matches!(
        exp_galerkin_tail(&cfg),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn band_limited_datum_has_no_tail_above_its_band() {
    let cfg = ExperimentConfig {
        datum: Datum::TwoMode,
        sigma: vec![1.0],
        levels: vec![4, 5, 6],
        ..Default::default()
    };
    let (_, tails) = exp_galerkin_tail(&cfg).unwrap();
    assert!(
        tails[0].datum_ratio.iter().all(|&r| r < 1e-12),
        "{:?}",
        tails[0].datum_ratio
    );
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    assert!(matches!(
        ExperimentConfig::parse("colour = red\n"),
        Err(Error::Config(_))
    ));
    assert!(ExperimentConfig::parse("c = 4, x\n").is_err());
    assert!(ExperimentConfig::parse("system = tachyon\n").is_err());
}

#[test]
fn config_parses_comments_lists_and_faults() {
    let cfg = quick("# comment\nexperiment = transform_gain\nc = 4, 8, 16\nfault = sextic:0\nsystem = nf_order2\n");
    assert_eq!(cfg.c, vec![4.0, 8.0, 16.0]);
    assert!(cfg.fault.is_some());
    assert_eq!(cfg.system, SystemKind::NfOrder2);
}
