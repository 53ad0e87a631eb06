use std::path::Path;

use blgv_core::config::RunConfig;
use blgv_core::mms::standard_studies;
use blgv_core::report::{emit_plots, ReportDir, Status};
use blgv_core::solver::{make_initial_data_with, GeneratorParams, InitialData};
use blgv_core::verify::{
    lp_selftest, mms_checks, monitored_run, run_jobs, uniqueness_experiment, viscosity_limit_study,
    Check, RunParams, RunRecord,
};
use blgv_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Run,
    Mms,
    Apriori,
    Radius,
    Uniqueness,
    NuLimit,
    LpSelftest,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Mms => "mms",
            Experiment::Apriori => "apriori",
            Experiment::Radius => "radius",
            Experiment::Uniqueness => "uniqueness",
            Experiment::NuLimit => "nu_limit",
            Experiment::LpSelftest => "lp_selftest",
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub checks: Vec<Check>,
    pub extra: Vec<(String, String)>,
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn initial_data(cfg: &RunConfig) -> Result<InitialData> {
    make_initial_data_with(&cfg.build_grid()?, &cfg.generator())
}

fn write_run(dir: &ReportDir, rec: &RunRecord) -> Result<()> {
    dir.write_norms(&rec.norms)?;
    dir.write_mu(&rec.mu)?;
    dir.write_apriori(&rec.apriori)?;
    dir.write_radius(&rec.radius)?;
    dir.write_spectrum(&rec.spectrum)?;
    dir.write_snapshots(&rec.snapshots)
}

fn run_extras(rec: &RunRecord) -> Vec<(String, String)> {
    let mut e = vec![
        kv("t_final", rec.t_final),
        kv("steps", rec.steps),
        kv("min_temperature", rec.min_temperature),
        kv("max_mu", rec.max_mu()),
        kv("max_ratio", rec.max_ratio()),
        kv("max_theta_smallness", rec.max_theta_smallness()),
        kv(
            "t_star",
            rec.t_star.map_or("none".to_string(), |t| t.to_string()),
        ),
    ];
    for (i, w) in rec.warnings.iter().enumerate() {
        e.push(kv(&format!("warning.{i}"), w));
    }
    if let Some(a) = &rec.abort {
        e.push(kv("abort", a));
    }
    e
}

fn run_status(rec: &RunRecord, checks: &[Check]) -> Status {
    if rec.abort.is_some() {
        Status::Aborted
    } else {
        Status::from_checks(checks)
    }
}

fn budget_check(rec: &RunRecord, p: &RunParams) -> Check {
    let used = rec.max_mu() * p.lambda / p.delta;
    Check {
        name: "mu_below_budget".into(),
        value: used,
        limit: 1.0,
        pass: used < 1.0 && rec.t_star.is_none(),
    }
}

pub fn execute(exp: Experiment, cfg: &RunConfig, dir: &ReportDir) -> Result<Outcome> {
    dir.write_config(&cfg.to_toml())?;
    let p = cfg.run_params();
    let outcome = match exp {
        Experiment::Run => {
            let rec = monitored_run(&initial_data(cfg)?, &p)?;
            write_run(dir, &rec)?;
            Outcome {
                status: run_status(&rec, &[]),
                checks: Vec::new(),
                extra: run_extras(&rec),
            }
        }
        Experiment::Apriori => {
            let data = initial_data(cfg)?;
            let rec = monitored_run(&data, &p)?;
            write_run(dir, &rec)?;
            let floor = 0.5 * p.theta_e;
            let checks = vec![
                Check::at_most(
                    "apriori_ratio",
                    rec.max_ratio(),
                    cfg.experiments.ratio_bound,
                ),
                budget_check(&rec, &p),
                Check::at_most(
                    "theta_smallness",
                    rec.max_theta_smallness(),
                    cfg.experiments.smallness_bound,
                ),
                Check::at_least("min_temperature", rec.min_temperature, floor),
            ];
            Outcome {
                status: run_status(&rec, &checks),
                extra: run_extras(&rec),
                checks,
            }
        }
        Experiment::Radius => {
            let rec = monitored_run(&initial_data(cfg)?, &p)?;
            write_run(dir, &rec)?;
            let tol = cfg.experiments.radius_tolerance * p.delta;
            let margin = rec.audit_margin(tol);
            let checks = vec![
                Check {
                    name: "radius_margin".into(),
                    value: margin.unwrap_or(f64::NAN),
                    limit: 0.0,
                    pass: margin.is_some_and(|m| m >= 0.0),
                },
                budget_check(&rec, &p),
            ];
            Outcome {
                status: run_status(&rec, &checks),
                extra: run_extras(&rec),
                checks,
            }
        }
        Experiment::Uniqueness => {
            let data = initial_data(cfg)?;
            let pert = make_initial_data_with(
                data.u0.grid(),
                &GeneratorParams {
                    seed: cfg.experiments.perturbation_seed,
                    ..cfg.generator()
                },
            )?;
            let q = RunParams {
                t_end: cfg.experiments.uniqueness_t_end,
                ..p
            };
            let sigma = cfg.experiments.sigma;
            let reports = run_jobs(vec![sigma, 0.5 * sigma, 0.0], |s| {
                uniqueness_experiment(&data, (&pert.u0, &pert.theta0), s, &q)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            dir.write_uniqueness(&reports)?;
            let ratio = reports[0].final_difference() / reports[1].final_difference();
            let checks = vec![
                Check::at_most("twin_difference", reports[2].max_difference(), 1e-12),
                Check::at_most("halving_ratio_error", (ratio - 2.0).abs(), 0.3),
            ];
            let mut extra = vec![
                kv("final_difference.sigma", reports[0].final_difference()),
                kv("final_difference.half_sigma", reports[1].final_difference()),
                kv("halving_ratio", ratio),
            ];
            if let Some(t) = reports[0].truncated_at {
                extra.push(kv("truncated_at", t));
            }
            Outcome {
                status: Status::from_checks(&checks),
                checks,
                extra,
            }
        }
        Experiment::NuLimit => {
            let data = initial_data(cfg)?;
            let q = RunParams {
                t_end: cfg.experiments.nu_t_end,
                ..p
            };
            let r = viscosity_limit_study(&data, &cfg.experiments.nus, &q)?;
            dir.write_nu_limit(&r)?;
            let worst = r
                .differences
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(0.0, f64::max);
            let checks = vec![
                Check::at_most(
                    "uniform_bound_spread",
                    r.bound_spread(),
                    cfg.experiments.nu_spread_bound,
                ),
                Check {
                    name: "difference_decay".into(),
                    value: worst,
                    limit: 1.0,
                    pass: r.differences_decrease() && r.failures.is_empty(),
                },
            ];
            let mut extra: Vec<_> = r
                .failures
                .iter()
                .map(|(nu, m)| kv(&format!("failure.{nu}"), m))
                .collect();
            extra.extend(
                r.differences
                    .iter()
                    .enumerate()
                    .map(|(i, d)| kv(&format!("difference.{i}"), d)),
            );
            let status = if r.failures.is_empty() {
                Status::from_checks(&checks)
            } else {
                Status::Aborted
            };
            Outcome {
                status,
                checks,
                extra,
            }
        }
        Experiment::Mms => {
            let (space, time) = standard_studies()?;
            dir.write_mms(&[&space, &time])?;
            let checks = mms_checks(&space, &time);
            Outcome {
                status: Status::from_checks(&checks),
                checks,
                extra: Vec::new(),
            }
        }
        Experiment::LpSelftest => {
            let checks = lp_selftest(cfg.data.seed)?;
            Outcome {
                status: Status::from_checks(&checks),
                checks,
                extra: Vec::new(),
            }
        }
    };
    dir.write_checks(&outcome.checks)?;
    dir.write_summary(exp.name(), outcome.status, &outcome.checks, &outcome.extra)?;
    let plots = emit_plots(dir.path())?;
    log::debug!(
        "plot scripts: {:?}, absent series: {:?}",
        plots.written,
        plots.missing
    );
    Ok(outcome)
}

/// Exit code for an error that ended an experiment early.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) => 1,
        e if e.is_abort() => 3,
        _ => 2,
    }
}

pub fn plots(dir: &Path) -> Result<()> {
    let out = emit_plots(dir)?;
    if out.written.is_empty() {
        log::warn!(
            "no CSV series in {}; no plot scripts written",
            dir.display()
        );
    }
    for m in &out.missing {
        println!("missing {m}");
    }
    for w in &out.written {
        println!("wrote {}", w.display());
    }
    Ok(())
}
