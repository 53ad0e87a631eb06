use std::collections::HashMap;
use std::f64::consts::PI;

use blgv_core::grid::GridRef;
use blgv_core::solver::{make_initial_data_with, DtPolicy, GeneratorParams, InitialData};
use blgv_core::verify::{
    monitored_run, run_jobs, uniqueness_experiment, viscosity_limit_study, Check, RunParams,
};
use blgv_core::Grid;

fn grid() -> GridRef {
    Grid::new(2.0 * PI, 16, 8.0, 64).unwrap()
}

fn params(t_end: f64) -> RunParams {
    RunParams {
        theta_e: 1.0,
        nu: 0.0,
        delta: 1.0,
        lambda: 1.0,
        dt: DtPolicy::Fixed(2e-3),
        t_end,
        norm_every: 5,
        snapshot_every: 0,
        audit_tolerance: 0.1,
    }
}

fn data(u_norm: f64, epsilon: f64, seed: u64) -> InitialData {
    let p = GeneratorParams {
        u_norm,
        modes: 5,
        ..GeneratorParams::new(1.0, epsilon, 1.0, seed)
    };
    make_initial_data_with(&grid(), &p).unwrap()
}

#[test]
fn zero_data_gives_trivial_reports() {
    let rec = monitored_run(&data(0.0, 0.0, 1), &params(0.05)).unwrap();
    assert!(!rec.apriori.is_empty());
    assert!(rec
        .apriori
        .iter()
        .all(|r| r.trivial && r.lhs == 0.0 && r.ratio == 0.0));
    assert!(rec
        .radius
        .iter()
        .all(|r| r.predicted == 1.0 && r.measured().is_none()));
    assert!(rec.mu.iter().all(|s| s.mu == 0.0));
    assert!(rec.abort.is_none() && rec.t_star.is_none());
    assert_eq!(rec.min_temperature, 1.0);
}

#[test]
fn accumulated_norms_never_decrease() {
    let rec = monitored_run(&data(0.1, 0.1, 7), &params(0.1)).unwrap();
    let mut last: HashMap<&str, f64> = HashMap::new();
    for n in &rec.norms {
        let prev = last.insert(n.name.as_str(), n.value).unwrap_or(0.0);
        assert!(n.value >= prev, "{} fell at t = {}", n.name, n.t);
    }
    assert_eq!(last.len(), 12);
    assert!(rec.apriori.windows(2).all(|w| w[1].lhs >= w[0].lhs));
    assert!(rec.mu.windows(2).all(|w| w[1].mu >= w[0].mu));
}

#[test]
fn doubling_the_data_doubles_the_right_side() {
    let p = params(0.002);
    let a = monitored_run(&data(0.1, 0.1, 3), &p).unwrap();
    let b = monitored_run(&data(0.2, 0.2, 3), &p).unwrap();
    let (ra, rb) = (a.apriori[0].rhs, b.apriori[0].rhs);
    assert!((rb - 2.0 * ra).abs() < 1e-8 * rb, "{ra} {rb}");
}

#[test]
fn identical_twins_do_not_separate() {
    let d = data(0.1, 0.1, 7);
    let pert = data(0.1, 0.1, 8);
    let r = uniqueness_experiment(&d, (&pert.u0, &pert.theta0), 0.0, &params(0.05)).unwrap();
    assert_eq!(r.max_difference(), 0.0);
    assert_eq!(r.amplification(), 0.0);
}

#[test]
fn viscosity_study_of_zero_data() {
    let r =
        viscosity_limit_study(&data(0.0, 0.0, 1), &[1e-2, 5e-3, 2.5e-3], &params(0.02)).unwrap();
    assert!(r.failures.is_empty());
    assert_eq!(r.differences, vec![0.0, 0.0]);
    assert!(r.runs.iter().all(|n| n.uniform_norm == 0.0));
    assert_eq!(r.bound_spread(), 1.0);
    assert!(viscosity_limit_study(&data(0.0, 0.0, 1), &[1e-2, 5e-3], &params(0.02)).is_err());
}

#[test]
fn jobs_keep_input_order() {
    let out = run_jobs((0..37).collect(), |i: u64| i * i);
    assert_eq!(out, (0..37).map(|i| i * i).collect::<Vec<_>>());
}

#[test]
fn check_directions() {
    assert!(Check::at_most("a", 1.0, 1.0).pass);
    assert!(!Check::at_most("a", 1.5, 1.0).pass);
    assert!(Check::at_least("b", 2.0, 1.0).pass);
    assert!(!Check::at_least("b", f64::NAN, 1.0).pass);
}
