//! Experiment drivers: the monitored run (a priori ratio, smallness,
//! analyticity-radius audit), the two-trajectory uniqueness experiment and
//! the vanishing-viscosity study.

use std::num::NonZeroUsize;

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{
    d_dx, d_dy, dealiased_product, forward_transform, Field, Grid, GridRef, SpectralField,
};
use crate::lpaley::{
    bony_decompose, dyadic_block, hardy_weight_check, BlockTable, CheminLernerAccumulator,
    DyadicPartition, ModeEnergy, TimeExponent, WeightProfile,
};
use crate::mms::MmsStudy;
use crate::phase::{measured_radius, mu_terms, phased_tables, PhaseSample, PhaseState};
use crate::solver::{
    initial_norms, integrate, Control, DerivedEquation, DtPolicy, InitialData, SolveState,
};

/// Physical and numerical parameters shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub theta_e: f64,
    pub nu: f64,
    pub delta: f64,
    pub lambda: f64,
    pub dt: DtPolicy,
    pub t_end: f64,
    /// Record diagnostics every `norm_every` steps.
    pub norm_every: usize,
    /// Keep a copy of the state every `snapshot_every` steps (0: never).
    pub snapshot_every: usize,
    /// Radius-audit slack as a fraction of `delta`.
    pub audit_tolerance: f64,
}

/// Maximum number of worker threads: `BLGV_THREADS` if set, otherwise the
/// available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("BLGV_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(NonZeroUsize::get)
                .unwrap_or(1)
        })
}

/// Runs independent jobs on at most [`thread_cap`] threads, returning
/// results in input order.
pub fn run_jobs<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let cap = thread_cap().max(1);
    let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let mut pending: Vec<(usize, T)> = items.into_iter().enumerate().collect();
    while !pending.is_empty() {
        let batch: Vec<(usize, T)> = pending.drain(..cap.min(pending.len())).collect();
        let f = &f;
        let done: Vec<(usize, R)> = std::thread::scope(|s| {
            let handles: Vec<_> = batch
                .into_iter()
                .map(|(i, item)| s.spawn(move || (i, f(item))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        for (i, r) in done {
            out[i] = Some(r);
        }
    }
    out.into_iter().map(|r| r.unwrap()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriReport {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; zero for trivial (zero) data.
    pub ratio: f64,
    /// `||theta_Phi||_{L~^inf_t(B^{1,1})} / epsilon` (zero when epsilon = 0).
    pub theta_smallness: f64,
    pub trivial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSample {
    pub t: f64,
    pub predicted: f64,
    /// `None` when the spectrum was underresolved.
    pub measured_u: Option<f64>,
    pub measured_theta: Option<f64>,
}

impl RadiusSample {
    /// Smaller of the resolved measurements.
    pub fn measured(&self) -> Option<f64> {
        match (self.measured_u, self.measured_theta) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSample {
    pub t: f64,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub t: f64,
    pub mode: i64,
    pub abs_xi: f64,
    pub amp_u: f64,
    pub amp_theta: f64,
}

/// Everything recorded along one monitored trajectory.
#[derive(Debug)]
pub struct RunRecord {
    pub apriori: Vec<AprioriReport>,
    pub norms: Vec<NormSample>,
    pub mu: Vec<PhaseSample>,
    pub radius: Vec<RadiusSample>,
    pub spectrum: Vec<SpectrumRow>,
    pub snapshots: Vec<(Field, Field)>,
    pub min_temperature: f64,
    pub t_final: f64,
    pub steps: u64,
    /// Time at which `mu` reached `delta / lambda`, if it did.
    pub t_star: Option<f64>,
    /// Temperature floor or blow-up that ended the run.
    pub abort: Option<Error>,
    /// Non-fatal analyticity deficits reported during the run.
    pub warnings: Vec<String>,
}

impl RunRecord {
    pub fn max_ratio(&self) -> f64 {
        self.apriori.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn max_theta_smallness(&self) -> f64 {
        self.apriori
            .iter()
            .map(|r| r.theta_smallness)
            .fold(0.0, f64::max)
    }

    /// Worst `measured - (predicted - tol)` over resolved samples.
    pub fn audit_margin(&self, tol: f64) -> Option<f64> {
        self.radius
            .iter()
            .filter_map(|s| s.measured().map(|m| m - (s.predicted - tol)))
            .reduce(f64::min)
    }

    pub fn max_mu(&self) -> f64 {
        self.mu.iter().map(|s| s.mu).fold(0.0, f64::max)
    }
}

/// The left side of the a priori estimate as per-field accumulators.
struct AprioriAcc {
    // (field index, accumulator, density is mu_dot, norm name)
    groups: Vec<(usize, CheminLernerAccumulator, bool, String)>,
}

const FIELDS: [&str; 2] = ["u", "theta"];
const DERIV: [&str; 4] = ["", "dy_", "dyy_", "dyyy_"];

fn s_label(s: f64) -> &'static str {
    if s == 0.5 {
        "1/2"
    } else if s == 1.0 {
        "1"
    } else {
        "3/2"
    }
}

impl AprioriAcc {
    fn new() -> Self {
        use TimeExponent::{Inf, Two};
        // (s, lowest normal derivative, j, exponent, mu-weighted)
        let specs = [
            (1.0, 0, 1, Inf, false),
            (1.0, 1, 1, Two, false),
            (0.5, 2, 0, Inf, false),
            (0.5, 3, 0, Two, false),
            (1.5, 0, 1, Two, true),
            (1.0, 2, 0, Two, true),
        ];
        let mut groups = Vec::new();
        for (fi, f) in FIELDS.iter().enumerate() {
            for &(s, lo, j, p, mu) in &specs {
                let pname = match (p, mu) {
                    (Inf, _) => "inf",
                    (Two, false) => "2",
                    (Two, true) => "2mu",
                };
                let name = format!("{}{}:B{}_{}w_L{}", DERIV[lo], f, s_label(s), j, pname);
                groups.push((fi, CheminLernerAccumulator::new(s, lo, lo + j, p), mu, name));
            }
        }
        Self { groups }
    }

    fn update_inf(&mut self, tables: [&BlockTable; 2]) {
        for (fi, acc, _, _) in &mut self.groups {
            if acc.p == TimeExponent::Inf {
                acc.update(tables[*fi], 0.0, 0.0);
            }
        }
    }

    fn update_two(&mut self, tables: [&BlockTable; 2], dt: f64, mu_dot: f64) {
        for (fi, acc, mu, _) in &mut self.groups {
            if acc.p == TimeExponent::Two {
                let density = if *mu { mu_dot } else { 1.0 };
                acc.update(tables[*fi], dt, density);
            }
        }
    }

    fn lhs(&self, lambda: f64) -> f64 {
        self.groups
            .iter()
            .map(|(_, acc, mu, _)| {
                if *mu {
                    lambda.sqrt() * acc.value()
                } else {
                    acc.value()
                }
            })
            .sum()
    }

    /// `||theta_Phi||_{L~^inf_t(B^{1,1})}`, the first theta group.
    fn theta_inf(&self) -> f64 {
        self.groups[6].1.value()
    }
}

fn spectrum_rows(u: &Field, theta: &Field, t: f64) -> Vec<SpectrumRow> {
    let g = u.grid();
    let (su, st) = (forward_transform(u), forward_transform(theta));
    (0..g.nx() / 2)
        .map(|m| SpectrumRow {
            t,
            mode: m as i64,
            abs_xi: g.wavenumber(m),
            amp_u: (0..g.ny()).map(|j| su.at(m, j).norm()).sum(),
            amp_theta: (0..g.ny()).map(|j| st.at(m, j).norm()).sum(),
        })
        .collect()
}

/// Runs the solver from `data` while tracking `mu`, the a priori ratio,
/// the smallness of `theta_Phi` and the measured analyticity radius.
/// Temperature-floor and blow-up aborts end the run and are stored in the
/// record rather than returned as errors.
pub fn monitored_run(data: &InitialData, p: &RunParams) -> Result<RunRecord> {
    let grid = data.u0.grid().clone();
    let (ru, ru2) = initial_norms(&data.u0, p.delta, p.theta_e)?;
    let (rt, rt2) = initial_norms(&data.theta0, p.delta, p.theta_e)?;
    let rhs = ru + ru2 + rt + rt2;
    let dt0 = match p.dt {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Adaptive { cap } => cap,
    };
    let state = SolveState::new(data.u0.clone(), data.theta0.clone(), p.nu, p.theta_e, dt0)?;

    let mut phase = PhaseState::new(p.delta, p.lambda);
    let mut acc = AprioriAcc::new();
    let mut rec = RunRecord {
        apriori: Vec::new(),
        norms: Vec::new(),
        mu: Vec::new(),
        radius: Vec::new(),
        spectrum: spectrum_rows(&data.u0, &data.theta0, 0.0),
        snapshots: Vec::new(),
        min_temperature: state.min_temperature(),
        t_final: 0.0,
        steps: 0,
        t_star: None,
        abort: None,
        warnings: Vec::new(),
    };
    let mut prev: Option<(BlockTable, BlockTable, f64, f64)> = None;
    let norm_every = p.norm_every.max(1) as u64;

    let result = integrate(
        state,
        p.dt,
        p.t_end,
        None,
        |s: &SolveState| -> Result<Control> {
            rec.min_temperature = rec.min_temperature.min(s.min_temperature());
            rec.t_final = s.t;
            rec.steps = s.step_index;
            if let Some((tu, tt, t_prev, mu_dot)) = prev.take() {
                let dt = s.t - t_prev;
                acc.update_two([&tu, &tt], dt, mu_dot);
                phase.advance_mu(mu_dot, dt);
                if phase.t_star_reached {
                    rec.t_star = Some(phase.t);
                    return Ok(Control::Stop);
                }
            }
            let w = WeightProfile::new(&grid, p.theta_e, s.t);
            let (tu, tt) = match phased_tables(&s.u, &s.theta, &w, phase.radius()) {
                Ok(t) => t,
                Err(e @ Error::AnalyticityDeficit { .. }) => {
                    rec.warnings.push(format!("t = {}: {e}", s.t));
                    return Ok(Control::Stop);
                }
                Err(e) => return Err(e),
            };
            let terms = mu_terms(&tu, &tt, s.t);
            acc.update_inf([&tu, &tt]);
            if s.step_index % norm_every == 0 {
                let lhs = acc.lhs(p.lambda);
                let trivial = rhs == 0.0;
                rec.apriori.push(AprioriReport {
                    t: s.t,
                    lhs,
                    rhs,
                    ratio: if trivial { 0.0 } else { lhs / rhs },
                    theta_smallness: if data.epsilon > 0.0 {
                        acc.theta_inf() / data.epsilon
                    } else {
                        0.0
                    },
                    trivial,
                });
                for (_, a, _, name) in &acc.groups {
                    rec.norms.push(NormSample {
                        t: s.t,
                        name: name.clone(),
                        value: a.value(),
                    });
                }
                let fit = |f: &Field| measured_radius(&forward_transform(f)).ok();
                rec.radius.push(RadiusSample {
                    t: s.t,
                    predicted: phase.radius(),
                    measured_u: fit(&s.u),
                    measured_theta: fit(&s.theta),
                });
            }
            if p.snapshot_every > 0 && s.step_index % p.snapshot_every as u64 == 0 {
                rec.snapshots.push((s.u.clone(), s.theta.clone()));
            }
            prev = Some((tu, tt, s.t, terms.total));
            Ok(Control::Continue)
        },
    );
    match result {
        Ok(s) => rec.spectrum.extend(spectrum_rows(&s.u, &s.theta, s.t)),
        Err(e) if e.is_abort() => rec.abort = Some(e),
        Err(e) => return Err(e),
    }
    rec.mu = phase.history.clone();
    if rec.mu.is_empty() {
        rec.mu.push(PhaseSample {
            t: 0.0,
            mu: 0.0,
            mu_dot: phase.mu_dot,
            radius: phase.radius(),
            t_star_reached: false,
        });
    }
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessSample {
    pub t: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub m: f64,
    pub radius_hat: f64,
    pub diff_u: f64,
    pub diff_theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub sigma: f64,
    pub samples: Vec<UniquenessSample>,
    /// Time at which `delta/2 - lambda M` reached zero, if before the end.
    pub truncated_at: Option<f64>,
}

impl UniquenessReport {
    pub fn final_difference(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.diff_u + s.diff_theta)
    }

    pub fn max_difference(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.diff_u + s.diff_theta)
            .fold(0.0, f64::max)
    }

    /// `(difference at the end) / (difference at t = 0)`.
    pub fn amplification(&self) -> f64 {
        let d0 = self
            .samples
            .first()
            .map_or(0.0, |s| s.diff_u + s.diff_theta);
        if d0 == 0.0 {
            0.0
        } else {
            self.final_difference() / d0
        }
    }
}

fn trajectory(u0: Field, th0: Field, p: &RunParams) -> Result<Vec<SolveState>> {
    let dt0 = match p.dt {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Adaptive { cap } => cap,
    };
    let state = SolveState::new(u0, th0, p.nu, p.theta_e, dt0)?;
    let mut out = Vec::new();
    integrate(state, p.dt, p.t_end, None, |s| {
        out.push(s.clone());
        Ok(Control::Continue)
    })?;
    Ok(out)
}

/// `mu_i'` of the uniqueness argument for one trajectory.
fn mu_i_rate(tu: &BlockTable, tt: &BlockTable, t: f64) -> f64 {
    let tw = 1.0 + t;
    tw.powf(0.25)
        * (tu.besov(0.5, 1, 2) + tt.besov(0.5, 1, 2) + tu.besov(1.0, 0, 0) + tt.besov(1.0, 0, 0))
        + tw.sqrt() * (tu.besov(1.0, 0, 1).powi(2) + tt.besov(1.0, 0, 1).powi(2))
        + tu.besov(1.0, 1, 1).powi(4)
        + tt.besov(1.0, 1, 1).powi(4)
        + tu.besov(1.0, 1, 1) * tu.besov(1.0, 2, 2)
}

/// Runs trajectories from `data` and from `data + sigma * perturbation`
/// with identical numerics and measures their difference in
/// `L~^inf_t(B^{1,0})` under the phase `(delta/2 - lambda M) |xi|`.
pub fn uniqueness_experiment(
    data: &InitialData,
    perturbation: (&Field, &Field),
    sigma: f64,
    p: &RunParams,
) -> Result<UniquenessReport> {
    let grid: GridRef = data.u0.grid().clone();
    let u2 = data.u0.add(&perturbation.0.scale(sigma))?;
    let t2 = data.theta0.add(&perturbation.1.scale(sigma))?;
    let jobs = vec![(data.u0.clone(), data.theta0.clone()), (u2, t2)];
    let mut runs = run_jobs(jobs, |(u, t)| trajectory(u, t, p));
    let r2 = runs.pop().unwrap()?;
    let r1 = runs.pop().unwrap()?;
    let part = DyadicPartition::for_grid(&grid);
    let n = r1.len().min(r2.len());
    let (mut mu1, mut mu2, mut extra) = (0.0, 0.0, 0.0);
    let mut acc_u = CheminLernerAccumulator::new(1.0, 0, 0, TimeExponent::Inf);
    let mut acc_t = CheminLernerAccumulator::new(1.0, 0, 0, TimeExponent::Inf);
    let mut samples = Vec::with_capacity(n);
    let mut truncated_at = None;
    for k in 0..n {
        let (s1, s2) = (&r1[k], &r2[k]);
        let t = s1.t;
        let w = WeightProfile::new(&grid, p.theta_e, t);
        let m = mu1 + mu2 + extra;
        let radius_hat = 0.5 * p.delta - p.lambda * m;
        if radius_hat <= 0.0 {
            truncated_at = Some(t);
            break;
        }
        let (a1, b1) = phased_tables(&s1.u, &s1.theta, &w, p.delta - p.lambda * mu1)?;
        let (a2, b2) = phased_tables(&s2.u, &s2.theta, &w, p.delta - p.lambda * mu2)?;
        let du = s1.u.sub(&s2.u)?;
        let dth = s1.theta.sub(&s2.theta)?;
        acc_u.update(
            &ModeEnergy::new(&du, 0, &w)?.block_table(&part, radius_hat)?,
            0.0,
            0.0,
        );
        acc_t.update(
            &ModeEnergy::new(&dth, 0, &w)?.block_table(&part, radius_hat)?,
            0.0,
            0.0,
        );
        samples.push(UniquenessSample {
            t,
            mu1,
            mu2,
            m,
            radius_hat,
            diff_u: acc_u.value(),
            diff_theta: acc_t.value(),
        });
        if k + 1 < n {
            let dt = r1[k + 1].t - t;
            mu1 += dt * mu_i_rate(&a1, &b1, t);
            mu2 += dt * mu_i_rate(&a2, &b2, t);
            extra += dt
                * (1.0 + t).sqrt()
                * (a1.besov(1.0, 2, 2).powi(2)
                    + a2.besov(1.0, 2, 2).powi(2)
                    + b1.besov(1.0, 2, 2).powi(2)
                    + b2.besov(1.0, 2, 2).powi(2));
        }
    }
    Ok(UniquenessReport {
        sigma,
        samples,
        truncated_at,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuRun {
    pub nu: f64,
    /// `sup_t ||.||_{H^{3,1}} + (int ||.||^2_{H^{3,2}})^{1/2}` for `u` plus
    /// the same for `theta`.
    pub uniform_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuLimitReport {
    pub runs: Vec<NuRun>,
    /// `||(u, theta)^{nu_k} - (u, theta)^{nu_{k+1}}||` in `L^2(0,T; H^1)`
    /// on the window `[0, lx] x [0, ymax/2]`.
    pub differences: Vec<f64>,
    /// Index and message of any run that failed.
    pub failures: Vec<(f64, String)>,
}

impl NuLimitReport {
    pub fn bound_spread(&self) -> f64 {
        let max = self.runs.iter().map(|r| r.uniform_norm).fold(0.0, f64::max);
        let min = self
            .runs
            .iter()
            .map(|r| r.uniform_norm)
            .fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            1.0
        } else {
            max / min
        }
    }

    pub fn differences_decrease(&self) -> bool {
        self.differences.windows(2).all(|w| w[1] < w[0])
    }
}

/// Squared `H^1` norm on `[0, lx] x [0, ymax/2]` with the normalized
/// tangential measure.
pub fn window_h1_sq(f: &Field) -> Result<f64> {
    let g = f.grid();
    let fx = d_dx(f, 1);
    let fy = d_dy(f, 1)?;
    let ys = g.y_nodes();
    let top = ys.iter().rposition(|&y| y <= 0.5 * g.ymax()).unwrap_or(0);
    let h = g.dy();
    let mut s = 0.0;
    for ix in 0..g.nx() {
        for jy in 0..=top {
            let w = if jy == 0 || jy == top { 0.5 * h } else { h };
            s += w * (f.at(ix, jy).powi(2) + fx.at(ix, jy).powi(2) + fy.at(ix, jy).powi(2));
        }
    }
    Ok(s / g.nx() as f64)
}

/// Runs one trajectory per viscosity in parallel and compares them.
pub fn viscosity_limit_study(
    data: &InitialData,
    nus: &[f64],
    p: &RunParams,
) -> Result<NuLimitReport> {
    if nus.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least three viscosities, got {}",
            nus.len()
        )));
    }
    let every = p.norm_every.max(1);
    let jobs: Vec<f64> = nus.to_vec();
    let results = run_jobs(jobs, |nu| -> Result<(f64, Vec<(f64, Field, Field)>)> {
        let q = RunParams { nu, ..*p };
        let states = trajectory(data.u0.clone(), data.theta0.clone(), &q)?;
        let unit = WeightProfile::unit(data.u0.grid());
        let mut sup = 0.0f64;
        let mut int = 0.0;
        let mut kept = Vec::new();
        for (k, s) in states.iter().enumerate() {
            let eu = ModeEnergy::new(&s.u, 2, &unit)?;
            let et = ModeEnergy::new(&s.theta, 2, &unit)?;
            sup = sup.max(eu.sobolev_sq(3, 1).sqrt() + et.sobolev_sq(3, 1).sqrt());
            if k + 1 < states.len() {
                let dt = states[k + 1].t - s.t;
                int += dt * (eu.sobolev_sq(3, 2) + et.sobolev_sq(3, 2));
            }
            if k % every == 0 || k + 1 == states.len() {
                kept.push((s.t, s.u.clone(), s.theta.clone()));
            }
        }
        Ok((sup + int.sqrt(), kept))
    });
    let mut runs = Vec::new();
    let mut traj = Vec::new();
    let mut failures = Vec::new();
    for (nu, r) in nus.iter().zip(results) {
        match r {
            Ok((norm, kept)) => {
                runs.push(NuRun {
                    nu: *nu,
                    uniform_norm: norm,
                });
                traj.push(kept);
            }
            Err(e) => failures.push((*nu, e.to_string())),
        }
    }
    let mut differences = Vec::new();
    if failures.is_empty() {
        for pair in traj.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let n = a.len().min(b.len());
            let mut s = 0.0;
            for k in 0..n.saturating_sub(1) {
                let dt = a[k + 1].0 - a[k].0;
                s += dt
                    * (window_h1_sq(&a[k].1.sub(&b[k].1)?)? + window_h1_sq(&a[k].2.sub(&b[k].2)?)?);
            }
            differences.push(s.sqrt());
        }
    }
    Ok(NuLimitReport {
        runs,
        differences,
        failures,
    })
}

/// One named pass/fail check with the measured value and its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            pass: value >= limit,
        }
    }
}

/// Random real field with tangential modes `|m| <= max_mode` and smooth,
/// decaying normal profiles.
pub fn random_field(grid: &GridRef, seed: u64, max_mode: usize) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64, f64, f64)> = (0..=max_mode)
        .map(|m| {
            (
                m as f64,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.0..2.0),
            )
        })
        .collect();
    let k0 = 2.0 * std::f64::consts::PI / grid.lx();
    Field::from_fn(grid, 0.0, |x, y| {
        terms
            .iter()
            .map(|&(m, a, ph, w, c)| {
                a * (m * k0 * x + ph).cos() * (1.0 + c * y) * (-w * y * y).exp()
            })
            .sum()
    })
}

/// Empirical constant `max lhs / rhs` of the weighted Hardy inequality over
/// `samples` random profiles.
pub fn hardy_constant(grid: &GridRef, theta_e: f64, samples: usize, seed: u64) -> Result<f64> {
    let w = WeightProfile::new(grid, theta_e, 0.0);
    let mut c: f64 = 0.0;
    for i in 0..samples {
        let f = random_field(grid, seed.wrapping_add(i as u64), 4.min(grid.nx() / 3));
        let (lhs, rhs) = hardy_weight_check(&f, &w)?;
        if rhs > 0.0 {
            c = c.max(lhs / rhs);
        }
    }
    Ok(c)
}

/// Partition of unity, block reconstruction and orthogonality, Bony
/// reconstruction, the weight identity and Hardy-constant stability.
pub fn lp_selftest(seed: u64) -> Result<Vec<Check>> {
    let grid = Grid::new(2.0 * std::f64::consts::PI, 64, 8.0, 32)?;
    let part = DyadicPartition::for_grid(&grid);
    let mut checks = vec![Check::at_most(
        "partition_of_unity",
        part.partition_defect(&grid),
        1e-12,
    )];

    let (mut sum_err, mut orth_err, mut bony_err) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..50 {
        let f = random_field(&grid, seed.wrapping_add(i), grid.nx() / 2 - 1);
        let fs = forward_transform(&f);
        let blocks: Vec<_> = part.blocks().map(|k| dyadic_block(&fs, k)).collect();
        let mut total = SpectralField::zeros(&grid, 0.0);
        for b in &blocks {
            total = total.add(b)?;
        }
        sum_err = sum_err.max(total.max_abs_diff(&fs));
        for (a, ka) in part.blocks().enumerate() {
            for kb in part.blocks() {
                if (ka - kb).abs() >= 2 {
                    orth_err = orth_err.max(dyadic_block(&blocks[a], kb).max_abs());
                }
            }
        }
        let f = random_field(&grid, seed.wrapping_add(1000 + i), grid.nx() / 3);
        let g = random_field(&grid, seed.wrapping_add(2000 + i), grid.nx() / 3);
        let (a, b, r) = bony_decompose(&f, &g)?;
        let prod = dealiased_product(&[&f, &g])?;
        bony_err = bony_err.max(a.add(&b)?.add(&r)?.sub(&prod)?.max_abs());
    }
    checks.push(Check::at_most("block_reconstruction", sum_err, 1e-12));
    checks.push(Check::at_most("block_orthogonality", orth_err, 1e-12));
    checks.push(Check::at_most("bony_reconstruction", bony_err, 1e-10));

    let mut weight_err = 0.0f64;
    for theta_e in [0.5f64, 1.0, 4.0] {
        let g = Grid::new(2.0 * std::f64::consts::PI, 8, 10.0 * theta_e.sqrt(), 64)?;
        for t in [0.0, 1.0, 10.0] {
            let r = WeightProfile::new(&g, theta_e, t).identity_residual();
            weight_err = r.iter().fold(weight_err, |m, x| m.max(x.abs()));
        }
    }
    checks.push(Check::at_most("weight_identity", weight_err, 1e-13));

    let mut spread = 0.0f64;
    for theta_e in [0.5f64, 1.0, 4.0] {
        let ymax = 10.0 * theta_e.sqrt();
        let mut cs = Vec::new();
        for nx in [32, 64] {
            for lx in [2.0, 4.0] {
                let g = Grid::new(lx * std::f64::consts::PI, nx, ymax, 128)?;
                cs.push(hardy_constant(&g, theta_e, 100, seed)?);
            }
        }
        let c0 = cs[0];
        spread = cs.iter().fold(spread, |m, c| m.max((c / c0 - 1.0).abs()));
    }
    checks.push(Check::at_most("hardy_constant_spread", spread, 0.2));
    Ok(checks)
}

/// Order checks for the spatial and temporal refinement studies.
pub fn mms_checks(space: &MmsStudy, time: &MmsStudy) -> Vec<Check> {
    let mut checks = Vec::new();
    for (study, label, min) in [(space, "dy", 1.8), (time, "dt", 0.9)] {
        let worst = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least(
            &format!("order_{label}.solution"),
            worst(study.solution_orders()),
            min,
        ));
        for (k, which) in DerivedEquation::ALL.iter().enumerate() {
            checks.push(Check::at_least(
                &format!("order_{label}.{}", which.name()),
                worst(study.residual_orders(k)),
                min,
            ));
        }
        checks.push(Check::at_least(
            &format!("order_{label}.wall_identity"),
            worst(study.wall_orders()),
            min,
        ));
    }
    checks
}
