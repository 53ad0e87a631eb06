//! The analytic multiplier `e^{Phi(t, D)}` with
//! `Phi(t, xi) = (delta - lambda mu(t)) |xi|`, the growth law of `mu`, and
//! the empirical decay-rate measurement it is audited against.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::grid::SpectralField;
use crate::lpaley::{BlockTable, DyadicPartition, ModeEnergy, WeightProfile, OVERFLOW_THRESHOLD};

/// Relative amplitude below which a mode counts as round-off.
pub const NOISE_FLOOR: f64 = 1e-13;
/// Minimum number of resolved modes for a decay-rate fit.
pub const MIN_MODES: usize = 6;

/// `c_m -> e^{radius |xi_m|} c_m`.
pub fn apply_phase(f: &SpectralField, radius: f64) -> Result<SpectralField> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "phase radius {radius} < 0"
        )));
    }
    let g = f.grid().clone();
    for i in 0..g.nx() {
        let xi = g.wavenumber(i).abs();
        let a = (radius * xi).exp();
        for jy in 0..g.ny() {
            let c = f.at(i, jy).norm();
            if c > 0.0 && !(a * c < OVERFLOW_THRESHOLD) {
                return Err(Error::AnalyticityDeficit {
                    mode: g.mode(i),
                    xi,
                    value: a * c,
                });
            }
        }
    }
    Ok(f.multiply_symbol(|i| (radius * g.wavenumber(i).abs()).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub t: f64,
    pub mu: f64,
    pub mu_dot: f64,
    pub radius: f64,
    pub t_star_reached: bool,
}

#[derive(Debug, Clone)]
pub struct PhaseState {
    pub delta: f64,
    pub lambda: f64,
    pub t: f64,
    pub mu: f64,
    pub mu_dot: f64,
    pub t_star_reached: bool,
    pub history: Vec<PhaseSample>,
}

impl PhaseState {
    pub fn new(delta: f64, lambda: f64) -> Self {
        Self {
            delta,
            lambda,
            t: 0.0,
            mu: 0.0,
            mu_dot: 0.0,
            t_star_reached: false,
            history: Vec::new(),
        }
    }

    /// `delta - lambda mu`, the current multiplier radius.
    pub fn radius(&self) -> f64 {
        self.delta - self.lambda * self.mu
    }

    /// Explicit Euler step `mu += dt * rhs`. Marks `T*` once
    /// `mu >= delta / lambda`.
    pub fn advance_mu(&mut self, rhs: f64, dt: f64) {
        debug_assert!(dt > 0.0);
        let rhs = rhs.max(0.0);
        if self.history.is_empty() {
            self.record(rhs);
        }
        self.mu += dt * rhs;
        self.t += dt;
        self.mu_dot = rhs;
        if self.mu >= self.delta / self.lambda {
            self.t_star_reached = true;
        }
        self.record(rhs);
    }

    fn record(&mut self, rhs: f64) {
        self.history.push(PhaseSample {
            t: self.t,
            mu: self.mu,
            mu_dot: rhs,
            radius: self.radius(),
            t_star_reached: self.t_star_reached,
        });
    }
}

/// Whether `Phi(xi) <= Phi(xi - eta) + Phi(eta)` holds at the current
/// radius.
pub fn convexity_check(phase: &PhaseState, xi: f64, eta: f64) -> bool {
    let r = phase.radius();
    let lhs = r * xi.abs();
    let rhs = r * (xi - eta).abs() + r * eta.abs();
    lhs <= rhs + 4.0 * f64::EPSILON * rhs.abs().max(lhs.abs())
}

/// Fitted exponential decay rate `rho` of `sum_j |c_m(y_j)| ~ e^{-rho |xi_m|}`
/// over the modes `m >= 1` above the relative noise floor.
pub fn measured_radius(f: &SpectralField) -> Result<f64> {
    let g = f.grid();
    let amps: Vec<(f64, f64)> = (1..g.nx() / 2)
        .map(|m| {
            let s: f64 = (0..g.ny()).map(|jy| f.at(m, jy).norm()).sum();
            (g.wavenumber(m), s)
        })
        .collect();
    let peak = amps.iter().map(|a| a.1).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = amps
        .into_iter()
        .filter(|&(_, a)| a > NOISE_FLOOR * peak && a > 0.0)
        .map(|(xi, a)| (xi, -a.ln()))
        .collect();
    if pts.len() < MIN_MODES {
        return Err(Error::SpectrumUnderresolved {
            usable: pts.len(),
            required: MIN_MODES,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// The norm groups entering the growth law of `mu`, all evaluated on the
/// phase-amplified fields `u_Phi`, `theta_Phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuTerms {
    pub linear: f64,
    pub quadratic: f64,
    pub quartic: f64,
    pub cross: f64,
    pub total: f64,
}

/// Block tables of `u` and `theta` up to three normal derivatives.
pub fn phased_tables(
    u: &Field,
    theta: &Field,
    w: &WeightProfile,
    radius: f64,
) -> Result<(BlockTable, BlockTable)> {
    let part = DyadicPartition::for_grid(u.grid());
    let tu = ModeEnergy::new(u, 3, w)?.block_table(&part, radius)?;
    let tt = ModeEnergy::new(theta, 3, w)?.block_table(&part, radius)?;
    Ok((tu, tt))
}

/// Right side of the `mu` growth law from precomputed tables.
pub fn mu_terms(tu: &BlockTable, tt: &BlockTable, t: f64) -> MuTerms {
    let tw = 1.0 + t;
    let dyu_12 = tu.besov(0.5, 1, 3);
    let dyt_12 = tt.besov(0.5, 1, 3);
    let linear = tw.powf(0.25) * (dyu_12 + dyt_12);
    let dyu_11 = tu.besov(0.5, 1, 2);
    let dyt_11 = tt.besov(0.5, 1, 2);
    let quadratic = tw.sqrt()
        * (tu.besov(1.0, 0, 0).powi(2) + tt.besov(0.5, 0, 0).powi(2) + (dyu_11 + dyt_11).powi(2));
    let t_11 = tt.besov(0.5, 0, 1);
    let quartic = dyu_11.powi(4) + t_11.powi(4);
    let cross = tu.besov(0.5, 3, 3) * (dyu_11 + t_11) + tt.besov(0.5, 3, 3) * tu.besov(0.5, 1, 1);
    MuTerms {
        linear,
        quadratic,
        quartic,
        cross,
        total: linear + quadratic + quartic + cross,
    }
}

/// `mu'(t)` for the state `(u, theta)` at the phase's current radius.
pub fn mu_rhs(u: &Field, theta: &Field, w: &WeightProfile, phase: &PhaseState) -> Result<f64> {
    if phase.t_star_reached {
        return Err(Error::PhaseExhausted {
            t: phase.t,
            radius: phase.radius(),
        });
    }
    let (tu, tt) = phased_tables(u, theta, w, phase.radius())?;
    Ok(mu_terms(&tu, &tt, u.t).total)
}
