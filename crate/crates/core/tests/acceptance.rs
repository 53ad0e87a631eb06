//! Acceptance suite: twelve criteria, each reported on its own PASS/FAIL
//! line on stderr.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use blgv_core::grid::{forward_transform, inverse_transform};
use blgv_core::lpaley::{
    bony_decompose, chi, dyadic_block, hardy_weight_check, phi, DyadicPartition, WeightProfile,
};
use blgv_core::mms::standard_studies;
use blgv_core::solver::{
    make_initial_data, make_initial_data_with, step, DtPolicy, GeneratorParams, InitialData,
    SolveState,
};
use blgv_core::verify::{
    monitored_run, uniqueness_experiment, viscosity_limit_study, RunParams, RunRecord,
};
use blgv_core::{Error, Field, Grid, GridRef, SpectralField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest a priori ratio of the canonical run, recorded at first release.
const RECORDED_RATIO: f64 = 1.9096;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn canonical_grid() -> GridRef {
    Grid::new(2.0 * PI, 32, 10.0, 128).unwrap()
}

fn canonical_params(t_end: f64) -> RunParams {
    RunParams {
        theta_e: 1.0,
        nu: 0.0,
        delta: 1.0,
        lambda: 1.0,
        dt: DtPolicy::Fixed(1e-3),
        t_end,
        norm_every: 50,
        snapshot_every: 0,
        audit_tolerance: 0.1,
    }
}

fn canonical_data(epsilon: f64) -> InitialData {
    make_initial_data(&canonical_grid(), 1.0, epsilon, 1.0, 7).unwrap()
}

fn canonical_run() -> &'static RunRecord {
    static RUN: OnceLock<RunRecord> = OnceLock::new();
    RUN.get_or_init(|| monitored_run(&canonical_data(0.1), &canonical_params(1.0)).unwrap())
}

/// Real field with random coefficients on modes `|m| <= max_mode`.
fn random_band_limited(grid: &GridRef, rng: &mut ChaCha8Rng, max_mode: i64) -> Field {
    let mut s = SpectralField::zeros(grid, 0.0);
    for jy in 0..grid.ny() {
        let env = (-(grid.y_nodes()[jy] / 3.0).powi(2)).exp();
        for m in 0..=max_mode {
            let re = rng.gen_range(-1.0..1.0) * env;
            let im = if m == 0 {
                0.0
            } else {
                rng.gen_range(-1.0..1.0) * env
            };
            let c = rustfft::num_complex::Complex64::new(re, im);
            s.set(grid.bin(m), jy, c);
            if m > 0 {
                s.set(grid.bin(-m), jy, c.conj());
            }
        }
    }
    inverse_transform(&s).unwrap()
}

fn lp_identities() -> Outcome {
    let mut partition: f64 = 0.0;
    for (lx, nx) in [(2.0 * PI, 32), (2.0 * PI, 256), (4.0 * PI, 64), (1.0, 128)] {
        let g = Grid::new(lx, nx, 4.0, 16).unwrap();
        for m in 0..=nx as i64 / 2 {
            let xi = 2.0 * PI * m as f64 / lx;
            let s: f64 = chi(xi) + (0..80).map(|k| phi(xi / 2f64.powi(k))).sum::<f64>();
            partition = partition.max((s - 1.0).abs());
        }
        partition = partition.max(DyadicPartition::for_grid(&g).partition_defect(&g));
    }
    let g = Grid::new(2.0 * PI, 128, 6.0, 16).unwrap();
    let part = DyadicPartition::for_grid(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut sum_err, mut orth_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let f = random_band_limited(&g, &mut rng, 63);
        let fs = forward_transform(&f);
        let blocks: Vec<_> = part.blocks().map(|k| (k, dyadic_block(&fs, k))).collect();
        let mut total = SpectralField::zeros(&g, 0.0);
        for (_, b) in &blocks {
            total = total.add(b).unwrap();
        }
        sum_err = sum_err.max(total.max_abs_diff(&fs) / fs.max_abs());
        for (k, b) in &blocks {
            for (kp, _) in &blocks {
                if (k - kp).abs() >= 2 {
                    orth_err = orth_err.max(dyadic_block(b, *kp).max_abs());
                }
            }
        }
    }
    outcome(
        partition < 1e-12 && sum_err < 1e-12 && orth_err < 1e-12,
        format!("partition {partition:.1e}, block sum {sum_err:.1e}, orthogonality {orth_err:.1e}"),
    )
}

fn bony() -> Outcome {
    let g = Grid::new(2.0 * PI, 64, 6.0, 24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut err: f64 = 0.0;
    for _ in 0..50 {
        // modes up to nx/4 keep the pointwise product alias-free
        let f = random_band_limited(&g, &mut rng, 15);
        let h = random_band_limited(&g, &mut rng, 15);
        let (a, b, r) = bony_decompose(&f, &h).unwrap();
        let prod = f.mul(&h).unwrap();
        err = err.max(
            a.add(&b)
                .unwrap()
                .add(&r)
                .unwrap()
                .sub(&prod)
                .unwrap()
                .max_abs(),
        );
    }
    outcome(err < 1e-10, format!("max reconstruction error {err:.1e}"))
}

fn weight_identity() -> Outcome {
    let mut err: f64 = 0.0;
    let mut formula: f64 = 0.0;
    for te in [0.5f64, 1.0, 4.0] {
        let g = Grid::new(2.0 * PI, 8, 10.0 * te.sqrt(), 257).unwrap();
        for t in [0.0, 1.0, 10.0] {
            let w = WeightProfile::new(&g, te, t);
            for (j, &y) in g.y_nodes().iter().enumerate() {
                let psi = y * y / (16.0 * te * (1.0 + t));
                formula = formula.max((w.psi()[j] - psi).abs());
                err = err.max((w.dt_psi()[j] + 4.0 * te * w.dy_psi()[j].powi(2)).abs());
            }
        }
    }
    outcome(
        err < 1e-13 && formula < 1e-13,
        format!("max |d_t Psi + 4 theta_E (d_y Psi)^2| = {err:.1e}"),
    )
}

fn hardy_constant(grid: &GridRef, theta_e: f64) -> f64 {
    let w = WeightProfile::new(grid, theta_e, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let l = theta_e.sqrt();
    let mut c: f64 = 0.0;
    for _ in 0..100 {
        let a = rng.gen_range(0.3..2.0);
        let b = rng.gen_range(0.0..3.0);
        let m = rng.gen_range(0..4) as f64;
        let ph = rng.gen_range(0.0..2.0 * PI);
        let k0 = 2.0 * PI / grid.lx();
        let f = Field::from_fn(grid, 0.0, |x, y| {
            let s = y / l;
            (1.0 + 0.5 * (m * k0 * x + ph).cos()) * (1.0 + b * s) * (-a * s * s).exp()
        });
        let (lhs, rhs) = hardy_weight_check(&f, &w).unwrap();
        c = c.max(lhs / rhs);
    }
    c
}

fn hardy() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for te in [0.5f64, 1.0, 4.0] {
        let cs: Vec<f64> = [
            (32, 2.0 * PI),
            (64, 2.0 * PI),
            (32, 4.0 * PI),
            (64, 4.0 * PI),
        ]
        .iter()
        .map(|&(nx, lx)| hardy_constant(&Grid::new(lx, nx, 10.0 * te.sqrt(), 200).unwrap(), te))
        .collect();
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        let dev = cs
            .iter()
            .map(|c| (c / mean - 1.0).abs())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
        details.push(format!("C({te}) = {mean:.4}"));
    }
    outcome(
        worst <= 0.2,
        format!(
            "{}, max deviation {:.1}%",
            details.join(", "),
            100.0 * worst
        ),
    )
}

fn mms() -> Outcome {
    let (space, time) = standard_studies().unwrap();
    let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let mut space_worst = min(space.solution_orders()).min(min(space.wall_orders()));
    let mut time_worst = min(time.solution_orders()).min(min(time.wall_orders()));
    for k in 0..4 {
        space_worst = space_worst.min(min(space.residual_orders(k)));
        time_worst = time_worst.min(min(time.residual_orders(k)));
    }
    outcome(
        space_worst >= 1.8 && time_worst >= 0.9 && space.levels.len() >= 3 && time.levels.len() >= 3,
        format!("worst order in dy {space_worst:.2}, in dt {time_worst:.2} (solution, residuals, wall identity)"),
    )
}

fn zero_fixed_point() -> Outcome {
    let g = canonical_grid();
    let mut worst: f64 = 0.0;
    for nu in [0.0, 0.01] {
        let mut s =
            SolveState::new(Field::zeros(&g, 0.0), Field::zeros(&g, 0.0), nu, 1.0, 1e-3).unwrap();
        for _ in 0..1000 {
            s = step(&s, None).unwrap();
        }
        worst = worst.max(s.u.max_abs()).max(s.theta.max_abs());
    }
    outcome(
        worst < 1e-14,
        format!("max |u|, |theta| after 1000 steps = {worst:.1e}"),
    )
}

fn positivity() -> Outcome {
    let rec = canonical_run();
    let floor_ok = rec.abort.is_none() && rec.min_temperature >= 0.5;
    let mut p = GeneratorParams::new(1.0, 2.0, 1.0, 7);
    p.allow_out_of_theory = true;
    let big = make_initial_data_with(&canonical_grid(), &p).unwrap();
    let r = monitored_run(&big, &canonical_params(1.0)).unwrap();
    let gated = matches!(r.abort, Some(Error::TemperatureFloor { .. }));
    outcome(
        floor_ok && gated,
        format!(
            "min(theta + theta_E) = {:.4} on [0, {}]; eps = 2 theta_E stopped by {:?}",
            rec.min_temperature,
            rec.t_final,
            r.abort.map(|e| e.to_string())
        ),
    )
}

fn smallness() -> Outcome {
    const K: f64 = 1.0;
    let ks: Vec<f64> = [1.0 / 40.0, 1.0 / 20.0, 1.0 / 10.0]
        .iter()
        .map(|&eps| {
            let r = monitored_run(&canonical_data(eps), &canonical_params(1.0)).unwrap();
            assert!(r.abort.is_none() && r.t_star.is_none());
            r.max_theta_smallness()
        })
        .collect();
    let worst = ks.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= K,
        format!("||theta_Phi|| / eps = {ks:.4?}, K = {K}"),
    )
}

fn apriori() -> Outcome {
    let rec = canonical_run();
    let ratio = rec.max_ratio();
    let budget = rec.max_mu() < 1.0 / 1.0;
    let drift = (ratio / RECORDED_RATIO - 1.0).abs();
    outcome(
        drift <= 0.1 && budget && rec.t_star.is_none() && rec.t_final >= 1.0 - 1e-12,
        format!(
            "max ratio {ratio:.4} (recorded {RECORDED_RATIO}), max mu {:.4} < delta/lambda = 1",
            rec.max_mu()
        ),
    )
}

fn radius() -> Outcome {
    let rec = canonical_run();
    let tol = 0.1;
    let resolved = rec.radius.iter().all(|s| s.measured().is_some());
    let margin = rec.audit_margin(tol).unwrap_or(f64::NEG_INFINITY);
    outcome(
        resolved && margin >= 0.0 && !rec.radius.is_empty(),
        format!("{} samples, worst margin {margin:.4}", rec.radius.len()),
    )
}

fn uniqueness() -> Outcome {
    let data = canonical_data(0.1);
    let pert = make_initial_data(&canonical_grid(), 1.0, 0.1, 1.0, 8).unwrap();
    let p = canonical_params(0.5);
    let run = |s: f64| uniqueness_experiment(&data, (&pert.u0, &pert.theta0), s, &p).unwrap();
    let zero = run(0.0);
    let a = run(1e-6);
    let b = run(5e-7);
    let twin = zero.max_difference();
    let ratio = a.final_difference() / b.final_difference();
    outcome(
        twin < 1e-12 && (ratio - 2.0).abs() <= 0.3 && a.truncated_at.is_none(),
        format!("twin difference {twin:.1e}, sigma / (sigma/2) ratio {ratio:.4}"),
    )
}

fn nu_limit() -> Outcome {
    let r = viscosity_limit_study(
        &canonical_data(0.1),
        &[1e-2, 5e-3, 2.5e-3],
        &canonical_params(0.5),
    )
    .unwrap();
    let spread = r.bound_spread();
    outcome(
        r.failures.is_empty() && r.runs.len() == 3 && spread <= 1.1 && r.differences_decrease(),
        format!("bound spread {spread:.5}, differences {:?}", r.differences),
    )
}

#[test]
fn acceptance_suite() {
    let criteria: [(&str, fn() -> Outcome, Duration); 12] = [
        (
            "1 Littlewood-Paley identities",
            lp_identities,
            Duration::from_secs(10),
        ),
        ("2 Bony reconstruction", bony, Duration::from_secs(30)),
        ("3 weight identity", weight_identity, Duration::from_secs(1)),
        ("4 weighted Hardy constant", hardy, Duration::from_secs(60)),
        ("5 solver MMS orders", mms, Duration::from_secs(300)),
        (
            "6 zero fixed point",
            zero_fixed_point,
            Duration::from_secs(10),
        ),
        ("7 positivity gate", positivity, Duration::from_secs(120)),
        (
            "8 smallness propagation",
            smallness,
            Duration::from_secs(300),
        ),
        ("9 a priori ratio", apriori, Duration::from_secs(300)),
        ("10 radius audit", radius, Duration::from_secs(120)),
        ("11 uniqueness", uniqueness, Duration::from_secs(300)),
        ("12 viscosity limit", nu_limit, Duration::from_secs(600)),
    ];
    canonical_run();
    let mut failed = Vec::new();
    for (name, f, budget) in criteria {
        let t0 = Instant::now();
        let o = f();
        let took = t0.elapsed();
        let pass = o.pass && took <= budget;
        let line = format!(
            "[{}] {name}: {} ({:.2}s, budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
        writeln!(std::io::stderr(), "{line}").unwrap();
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
