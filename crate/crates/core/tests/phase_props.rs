use std::f64::consts::PI;

use blgv_core::grid::{forward_transform, GridRef};
use blgv_core::lpaley::{DyadicPartition, WeightProfile};
use blgv_core::phase::{
    apply_phase, convexity_check, measured_radius, mu_rhs, mu_terms, phased_tables, PhaseState,
};
use blgv_core::{Field, Grid, SpectralField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

fn exponential_spectrum(g: &GridRef, rho: f64, noise: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SpectralField::zeros(g, 0.0);
    for m in 1..(g.nx() / 2) as i64 {
        let xi = g.wavenumber(g.bin(m)).abs();
        let amp = (-rho * xi).exp() * (1.0 + noise * rng.gen_range(-1.0..1.0));
        for jy in 0..g.ny() {
            let c = Complex64::new(amp * (-(g.y_nodes()[jy])).exp(), 0.0);
            s.set(g.bin(m), jy, c);
            s.set(g.bin(-m), jy, c);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phase_composes(r1 in 0.0f64..0.5, r2 in 0.0f64..0.5, seed in 0u64..1000) {
        let g = Grid::new(2.0 * PI, 32, 3.0, 16).unwrap();
        let s = forward_transform(&blgv_core::verify::random_field(&g, seed, 10));
        let a = apply_phase(&apply_phase(&s, r1).unwrap(), r2).unwrap();
        let b = apply_phase(&s, r1 + r2).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12 * b.max_abs().max(1.0));
    }

    #[test]
    fn phase_is_subadditive(xi in -1e4f64..1e4, eta in -1e4f64..1e4, frac in 0.0f64..1.0, lambda in 0.1f64..100.0) {
        let mut p = PhaseState::new(1.0, lambda);
        p.mu = frac / lambda;
        prop_assert!(convexity_check(&p, xi, eta));
    }

    #[test]
    fn mu_is_monotone(rates in prop::collection::vec(-1.0f64..3.0, 1..60)) {
        let mut p = PhaseState::new(1.0, 1.0);
        for r in &rates {
            p.advance_mu(*r, 0.01);
        }
        prop_assert!(p.history.windows(2).all(|w| w[1].mu >= w[0].mu && w[1].radius <= w[0].radius));
    }

    #[test]
    fn measured_radius_is_scale_invariant(rho in 0.2f64..1.0, c in 1e-6f64..1e6) {
        let g = Grid::new(2.0 * PI, 64, 3.0, 16).unwrap();
        let s = exponential_spectrum(&g, rho, 0.0, 0);
        let a = measured_radius(&s).unwrap();
        let b = measured_radius(&s.multiply_symbol(|_| c)).unwrap();
        prop_assert!((a - rho).abs() < 1e-9);
        prop_assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn exhaustive_convexity_grid() {
    for lambda in [1.0, 10.0, 100.0] {
        for step in 0..=10 {
            let mut p = PhaseState::new(1.0, lambda);
            p.mu = step as f64 * 0.1 / lambda;
            for i in -20..=20 {
                for j in -20..=20 {
                    assert!(convexity_check(&p, i as f64 * 0.7, j as f64 * 1.3));
                }
            }
        }
    }
}

#[test]
fn constant_rate_t_star() {
    let (delta, lambda, rate, dt) = (0.5, 4.0, 0.25, 1e-3);
    let mut p = PhaseState::new(delta, lambda);
    while !p.t_star_reached {
        p.advance_mu(rate, dt);
    }
    let t_star = delta / (lambda * rate);
    assert!((p.t - t_star).abs() <= dt + 1e-12, "{} {t_star}", p.t);
    assert!(p.radius() <= 1e-12);
}

#[test]
fn phase_undoes_double_decay() {
    let g = Grid::new(2.0 * PI, 64, 3.0, 16).unwrap();
    let delta = 0.4;
    let s = exponential_spectrum(&g, 2.0 * delta, 0.0, 0);
    let phased = apply_phase(&s, delta).unwrap();
    let target = exponential_spectrum(&g, delta, 0.0, 0);
    assert!(phased.max_abs_diff(&target) < 1e-14);
    assert!((measured_radius(&phased).unwrap() - delta).abs() < 1e-9);
}

#[test]
fn measured_radius_tolerates_noise() {
    let g = Grid::new(2.0 * PI, 64, 3.0, 16).unwrap();
    for seed in 0..20 {
        let s = exponential_spectrum(&g, 0.6, 0.01, seed);
        let r = measured_radius(&s).unwrap();
        assert!((r - 0.6).abs() < 0.05, "seed {seed}: {r}");
    }
}

#[test]
fn mu_rhs_of_zero_data_vanishes() {
    let g = Grid::new(2.0 * PI, 16, 6.0, 48).unwrap();
    let w = WeightProfile::new(&g, 1.0, 0.0);
    let z = Field::zeros(&g, 0.0);
    assert_eq!(mu_rhs(&z, &z, &w, &PhaseState::new(1.0, 1.0)).unwrap(), 0.0);
}

#[test]
fn mu_terms_scale_by_degree() {
    let g = Grid::new(2.0 * PI, 16, 8.0, 96).unwrap();
    let w = WeightProfile::new(&g, 1.0, 0.0);
    let u = blgv_core::verify::random_field(&g, 11, 5);
    let th = blgv_core::verify::random_field(&g, 12, 5);
    let terms = |c: f64| {
        let (tu, tt) = phased_tables(&u.scale(c), &th.scale(c), &w, 0.3).unwrap();
        mu_terms(&tu, &tt, 0.5)
    };
    let (a, b) = (terms(1.0), terms(3.0));
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs();
    assert!(close(b.linear, 3.0 * a.linear));
    assert!(close(b.quadratic, 9.0 * a.quadratic));
    assert!(close(b.cross, 9.0 * a.cross));
    assert!(close(b.quartic, 81.0 * a.quartic));
}

fn simpson(f: impl Fn(f64) -> f64, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    let mut s = f(0.0) + f(b);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn mu_rhs_single_mode_quadrature() {
    let (k, a, r, ymax) = (3.0, 0.2, 0.25, 8.0);
    let g = Grid::new(2.0 * PI, 16, ymax, 1601).unwrap();
    let w = WeightProfile::new(&g, 1.0, 0.0);
    let u = Field::from_fn(&g, 0.0, |x, y| a * (k * x).cos() * (-y * y).exp());
    let th = Field::zeros(&g, 0.0);
    let mut phase = PhaseState::new(1.0, 1.0);
    phase.mu = 1.0 - r;
    let got = mu_rhs(&u, &th, &w, &phase).unwrap();

    let derivs: [fn(f64) -> f64; 4] = [
        |y| (-y * y).exp(),
        |y| -2.0 * y * (-y * y).exp(),
        |y| (4.0 * y * y - 2.0) * (-y * y).exp(),
        |y| (-8.0 * y.powi(3) + 12.0 * y) * (-y * y).exp(),
    ];
    let n: Vec<f64> = derivs
        .iter()
        .map(|d| (0.5 * simpson(|y| (d(y) * (y * y / 16.0).exp()).powi(2), ymax, 20_000)).sqrt())
        .collect();
    let b = |s: f64| -> f64 {
        (-1..=8)
            .map(|j| 2f64.powf(j as f64 * s) * DyadicPartition::block_symbol(j, k))
            .sum::<f64>()
            * a
            * (r * k).exp()
    };
    let linear = b(0.5) * (n[1] + n[2] + n[3]);
    let quadratic = (b(1.0) * n[0]).powi(2) + (b(0.5) * (n[1] + n[2])).powi(2);
    let quartic = (b(0.5) * (n[1] + n[2])).powi(4);
    let cross = b(0.5) * n[3] * b(0.5) * (n[1] + n[2]);
    let expect = linear + quadratic + quartic + cross;
    assert!((got - expect).abs() < 1e-6 * expect, "{got} {expect}");
}
