//! Manufactured solutions and refinement studies for the time stepper.
//!
//! `u* = A(t) X(x) p(y)`, `theta* = B(t) Z(x) q(y)` on a `2 pi`-periodic
//! strip with `X = sin x + c0`, `Z = cos x + 1/2` and either Gaussian
//! profiles `p = y e^{-y^2}`, `q = e^{-y^2}` or quadratic ones
//! `p = 4 y (Y - y) / Y^2`, `q = 1 - (y / Y)^2` vanishing at `y = Y`. The
//! normal velocity is integrated in closed form and the forcing that makes
//! `(u*, theta*)` an exact solution is evaluated pointwise.
//!
//! The quadratic profiles are reproduced exactly by the normal stencils and
//! the cumulative integral, which isolates the time-stepping error.

use std::f64::consts::PI;

use statrs::function::erf::erf;

use crate::error::Result;
use crate::grid::{Field, Grid, GridRef};
use crate::solver::{
    derived_equation_residual, enforce_wall_neumann, step, DerivedEquation, SolveState,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub amp_u: f64,
    pub amp_theta: f64,
    /// Angular frequency of the amplitude modulation; zero gives a steady
    /// solution.
    pub omega: f64,
    pub c0: f64,
    pub theta_e: f64,
    pub nu: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Gaussian,
    Quadratic { ymax: f64 },
}

impl Default for Manufactured {
    fn default() -> Self {
        Self {
            amp_u: 0.5,
            amp_theta: 0.1,
            omega: 0.0,
            c0: 0.3,
            theta_e: 1.0,
            nu: 0.0,
            profile: Profile::Gaussian,
        }
    }
}

struct Profiles {
    p: f64,
    p1: f64,
    p2: f64,
    q: f64,
    q1: f64,
    q2: f64,
    /// `int_0^y p`
    pi: f64,
    /// `int_0^y p'^2`
    p1sq: f64,
}

fn profiles(kind: Profile, y: f64) -> Profiles {
    match kind {
        Profile::Gaussian => gaussian(y),
        Profile::Quadratic { ymax } => quadratic(ymax, y),
    }
}

fn quadratic(l: f64, y: f64) -> Profiles {
    let l2 = l * l;
    Profiles {
        p: 4.0 * y * (l - y) / l2,
        p1: 4.0 * (l - 2.0 * y) / l2,
        p2: -8.0 / l2,
        q: 1.0 - y * y / l2,
        q1: -2.0 * y / l2,
        q2: -2.0 / l2,
        pi: 4.0 * (l * y * y / 2.0 - y.powi(3) / 3.0) / l2,
        p1sq: 16.0 * (l.powi(3) - (l - 2.0 * y).powi(3)) / (6.0 * l2 * l2),
    }
}

fn gaussian(y: f64) -> Profiles {
    let g = (-y * y).exp();
    let g2 = g * g;
    let e = (PI / 8.0).sqrt() * erf(2f64.sqrt() * y);
    let m2 = -y * g2 / 4.0 + e / 4.0;
    let m4 = -y.powi(3) * g2 / 4.0 + 0.75 * m2;
    Profiles {
        p: y * g,
        p1: (1.0 - 2.0 * y * y) * g,
        p2: (4.0 * y.powi(3) - 6.0 * y) * g,
        q: g,
        q1: -2.0 * y * g,
        q2: (4.0 * y * y - 2.0) * g,
        pi: 0.5 * (1.0 - g),
        p1sq: e - 4.0 * m2 + 4.0 * m4,
    }
}

impl Manufactured {
    fn a(&self, t: f64) -> (f64, f64) {
        let w = self.omega;
        (
            self.amp_u * (1.0 + 0.5 * (w * t).sin()),
            self.amp_u * 0.5 * w * (w * t).cos(),
        )
    }

    fn b(&self, t: f64) -> (f64, f64) {
        let w = self.omega;
        (
            self.amp_theta * (1.0 + 0.5 * (w * t).cos()),
            -self.amp_theta * 0.5 * w * (w * t).sin(),
        )
    }

    pub fn u(&self, t: f64, x: f64, y: f64) -> f64 {
        self.a(t).0 * (x.sin() + self.c0) * profiles(self.profile, y).p
    }

    pub fn theta(&self, t: f64, x: f64, y: f64) -> f64 {
        self.b(t).0 * (x.cos() + 0.5) * profiles(self.profile, y).q
    }

    pub fn v(&self, t: f64, x: f64, y: f64) -> f64 {
        let (a, _) = self.a(t);
        let (b, _) = self.b(t);
        let pr = profiles(self.profile, y);
        let xx = x.sin() + self.c0;
        -a * x.cos() * pr.pi + a * a * xx * xx * pr.p1sq + b * (x.cos() + 0.5) * pr.q1
    }

    /// Forcing of the `u` and `theta` equations at `(t, x, y)`.
    pub fn forcing_at(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        let (a, da) = self.a(t);
        let (b, db) = self.b(t);
        let pr = profiles(self.profile, y);
        let (xx, x1, x2) = (x.sin() + self.c0, x.cos(), -x.sin());
        let (z, z1, z2) = (x.cos() + 0.5, -x.sin(), -x.cos());
        let u = a * xx * pr.p;
        let th = b * z * pr.q;
        let v = self.v(t, x, y);
        let temp = th + self.theta_e;
        let uy = a * xx * pr.p1;
        let fu = da * xx * pr.p + u * a * x1 * pr.p + v * uy
            - self.nu * a * x2 * pr.p
            - temp * a * xx * pr.p2;
        let ft = db * z * pr.q + u * b * z1 * pr.q + v * b * z * pr.q1
            - self.nu * b * z2 * pr.q
            - temp * b * z * pr.q2
            - temp * uy * uy;
        (fu, ft)
    }

    pub fn forcing(&self, grid: &GridRef, t: f64) -> (Field, Field) {
        let fu = Field::from_fn(grid, t, |x, y| self.forcing_at(t, x, y).0);
        let ft = Field::from_fn(grid, t, |x, y| self.forcing_at(t, x, y).1);
        (fu, ft)
    }

    pub fn exact(&self, grid: &GridRef, t: f64) -> (Field, Field) {
        (
            Field::from_fn(grid, t, |x, y| self.u(t, x, y)),
            Field::from_fn(grid, t, |x, y| self.theta(t, x, y)),
        )
    }
}

/// One refinement level: step size, errors and residuals at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsLevel {
    pub h: f64,
    pub dt: f64,
    pub err_u: f64,
    pub err_theta: f64,
    /// Residuals of the differentiated equations, in `DerivedEquation::ALL`
    /// order.
    pub residuals: [f64; 4],
    pub wall: f64,
}

impl MmsLevel {
    pub fn error(&self) -> f64 {
        self.err_u.max(self.err_theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    Space,
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsStudy {
    pub kind: Refinement,
    pub levels: Vec<MmsLevel>,
}

fn slope(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

impl MmsStudy {
    fn step_of(&self, l: &MmsLevel) -> f64 {
        match self.kind {
            Refinement::Space => l.h,
            Refinement::Time => l.dt,
        }
    }

    /// Observed orders between consecutive levels of `metric`.
    pub fn orders(&self, metric: impl Fn(&MmsLevel) -> f64) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| {
                slope(
                    metric(&w[0]),
                    metric(&w[1]),
                    self.step_of(&w[0]),
                    self.step_of(&w[1]),
                )
            })
            .collect()
    }

    pub fn solution_orders(&self) -> Vec<f64> {
        self.orders(MmsLevel::error)
    }

    pub fn residual_orders(&self, k: usize) -> Vec<f64> {
        self.orders(|l| l.residuals[k])
    }

    pub fn wall_orders(&self) -> Vec<f64> {
        self.orders(|l| l.wall)
    }
}

/// Runs the manufactured problem on one grid to `t_end` with step `dt`.
pub fn run_level(m: &Manufactured, grid: &GridRef, dt: f64, t_end: f64) -> Result<MmsLevel> {
    let (u0, th0) = m.exact(grid, 0.0);
    let mut state = SolveState::new(u0, enforce_wall_neumann(&th0), m.nu, m.theta_e, dt)?;
    let n = (t_end / dt).round() as u64;
    let mut prev = state.clone();
    for k in 0..n {
        let (fu, ft) = m.forcing(grid, state.t);
        prev = state;
        state = step(&prev, Some((&fu, &ft)))?;
        state.t = (k + 1) as f64 * dt;
    }
    let (ue, te) = m.exact(grid, state.t);
    let (fu, ft) = m.forcing(grid, state.t);
    let mut residuals = [0.0; 4];
    let mut wall = 0.0;
    for (k, which) in DerivedEquation::ALL.into_iter().enumerate() {
        let r = derived_equation_residual(&prev, &state, which, Some((&fu, &ft)))?;
        residuals[k] = r.max;
        if let Some(w) = r.wall {
            wall = w;
        }
    }
    Ok(MmsLevel {
        h: grid.dy(),
        dt,
        err_u: state.u.sub(&ue)?.max_abs(),
        err_theta: state.theta.sub(&te)?.max_abs(),
        residuals,
        wall,
    })
}

/// Normal-direction refinement with a steady solution, whose discrete fixed
/// point does not depend on `dt`.
pub fn spatial_study(nys: &[usize], ymax: f64, dt: f64, t_end: f64) -> Result<MmsStudy> {
    let m = Manufactured::default();
    let levels = nys
        .iter()
        .map(|&ny| run_level(&m, &Grid::new(2.0 * PI, 16, ymax, ny)?, dt, t_end))
        .collect::<Result<Vec<_>>>()?;
    Ok(MmsStudy {
        kind: Refinement::Space,
        levels,
    })
}

/// Time-step refinement with a time-dependent solution whose normal
/// profiles the spatial operators reproduce exactly.
pub fn temporal_study(dts: &[f64], ny: usize, ymax: f64, t_end: f64) -> Result<MmsStudy> {
    let m = Manufactured {
        omega: 2.0,
        profile: Profile::Quadratic { ymax },
        ..Manufactured::default()
    };
    let grid = Grid::new(2.0 * PI, 16, ymax, ny)?;
    let levels = dts
        .iter()
        .map(|&dt| run_level(&m, &grid, dt, t_end))
        .collect::<Result<Vec<_>>>()?;
    Ok(MmsStudy {
        kind: Refinement::Time,
        levels,
    })
}

/// The spatial (`ny` in 48, 96, 192) and temporal (`dt` in 0.01, 0.005,
/// 0.0025) studies used by the `mms` experiment.
pub fn standard_studies() -> Result<(MmsStudy, MmsStudy)> {
    Ok((
        spatial_study(&[48, 96, 192], 8.0, 0.01, 1.0)?,
        temporal_study(&[0.01, 0.005, 0.0025], 32, 3.0, 0.5)?,
    ))
}
