//! Time stepping for the regularized boundary-layer system
//!
//! ```text
//! u_t + u u_x + v u_y         = nu u_xx + (theta + theta_E) u_yy
//! theta_t + u theta_x + v theta_y = nu theta_xx + (theta + theta_E) theta_yy
//!                                 + (theta + theta_E) u_y^2
//! v = -int_0^y u_x + int_0^y u_y^2 + theta_y
//! ```
//!
//! with `u = v = theta_y = 0` at the wall and `u = theta = 0` at `ymax`,
//! plus initial-data generation and residuals of the differentiated
//! equations.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fd::BandedMatrix;
use crate::grid::{
    cumulative_integral_y, d_dx, d_dy, d_dy_any, dealiased_product, forward_transform,
    inverse_unchecked, Field, GridRef,
};
use crate::lpaley::{DyadicPartition, ModeEnergy, WeightProfile};

pub const CFL_SAFETY: f64 = 0.4;
pub const BLOWUP_THRESHOLD: f64 = 1e6;
/// Largest wall value of `theta_y` accepted by [`recover_v`].
pub const WALL_FLUX_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// Constant step; the run fails if it exceeds the advective bound.
    Fixed(f64),
    /// `min(cap, advective bound)`.
    Adaptive { cap: f64 },
}

#[derive(Debug, Clone)]
pub struct SolveState {
    pub u: Field,
    pub theta: Field,
    pub v: Field,
    pub t: f64,
    pub nu: f64,
    pub theta_e: f64,
    pub dt: f64,
    pub step_index: u64,
}

impl SolveState {
    pub fn new(u: Field, theta: Field, nu: f64, theta_e: f64, dt: f64) -> Result<Self> {
        if **u.grid() != **theta.grid() {
            return Err(Error::GridMismatch);
        }
        if !(theta_e > 0.0) || !(nu >= 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need theta_E > 0, nu >= 0, dt > 0 (got {theta_e}, {nu}, {dt})"
            )));
        }
        let t = u.t;
        let v = recover_v(&u, &theta)?;
        Ok(Self {
            u,
            theta,
            v,
            t,
            nu,
            theta_e,
            dt,
            step_index: 0,
        })
    }

    pub fn grid(&self) -> &GridRef {
        self.u.grid()
    }

    pub fn min_temperature(&self) -> f64 {
        self.theta.min() + self.theta_e
    }
}

/// Normal velocity from the divergence constraint.
pub fn recover_v(u: &Field, theta: &Field) -> Result<Field> {
    let ty = d_dy(theta, 1)?;
    let g = u.grid();
    for ix in 0..g.nx() {
        let w = ty.at(ix, 0);
        if w.abs() > WALL_FLUX_TOL {
            return Err(Error::Compatibility(format!(
                "theta_y = {w:e} at the wall (ix = {ix})"
            )));
        }
    }
    let ux = d_dx(u, 1);
    let uy = d_dy(u, 1)?;
    let sq = dealiased_product(&[&uy, &uy])?;
    cumulative_integral_y(&sq)
        .sub(&cumulative_integral_y(&ux))?
        .add(&ty)
}

/// Adjusts the wall row so that the discrete `theta_y` vanishes there.
pub fn enforce_wall_neumann(theta: &Field) -> Field {
    let g = theta.grid();
    let st = &g.stencils(1)[0];
    let ny = g.ny();
    let mut vals = theta.values().to_vec();
    for ix in 0..g.nx() {
        let col = &mut vals[ix * ny..(ix + 1) * ny];
        let rest: f64 = st.weights[1..]
            .iter()
            .zip(&col[1..st.weights.len()])
            .map(|(w, v)| w * v)
            .sum();
        col[0] = -rest / st.weights[0];
    }
    Field::from_raw(g, vals, theta.t)
}

/// Advective step bound `0.4 min(dx / max|u|, dy / max|v|)`.
pub fn stable_dt(state: &SolveState) -> f64 {
    let g = state.grid();
    let bu = g.dx() / state.u.max_abs();
    let bv = g.dy() / state.v.max_abs();
    CFL_SAFETY * bu.min(bv)
}

fn check_floor(state: &SolveState) -> Result<()> {
    let min = state.min_temperature();
    let floor = 0.5 * state.theta_e;
    if !(min >= floor) {
        return Err(Error::TemperatureFloor {
            t: state.t,
            min,
            floor,
        });
    }
    Ok(())
}

/// Solves `(I - dt a D2) x = rhs` column by column with the given wall row.
fn implicit_normal(rhs: &Field, a: &Field, dt: f64, neumann: bool) -> Field {
    let g = rhs.grid();
    let ny = g.ny();
    let d2 = g.stencils(2);
    let d1 = &g.stencils(1)[0];
    let mut out = Vec::with_capacity(g.len());
    let base = BandedMatrix::zeros(ny, 4, 4);
    for ix in 0..g.nx() {
        let ac = a.profile(ix);
        let mut m_col = base.clone();
        if neumann {
            for (k, w) in d1.weights.iter().enumerate() {
                m_col.set(0, d1.start + k, *w);
            }
        } else {
            m_col.set(0, 0, 1.0);
        }
        for j in 1..ny - 1 {
            let st = &d2[j];
            for (k, w) in st.weights.iter().enumerate() {
                let c = st.start + k;
                let id = if c == j { 1.0 } else { 0.0 };
                m_col.set(j, c, id - dt * ac[j] * w);
            }
        }
        m_col.set(ny - 1, ny - 1, 1.0);
        let mut b = rhs.profile(ix).to_vec();
        b[0] = 0.0;
        b[ny - 1] = 0.0;
        let ok = m_col.factor();
        debug_assert!(ok, "singular implicit matrix");
        m_col.solve(&mut b);
        out.extend_from_slice(&b);
    }
    Field::from_raw(g, out, rhs.t)
}

fn implicit_tangential(f: &Field, nu: f64, dt: f64) -> Field {
    if nu == 0.0 {
        return f.clone();
    }
    let g = f.grid().clone();
    let s = forward_transform(f);
    inverse_unchecked(&s.multiply_symbol(|i| 1.0 / (1.0 + dt * nu * g.wavenumber(i).powi(2))))
}

/// One implicit-explicit step of size `state.dt`. `forcing` is added to the
/// right sides of the `u` and `theta` equations.
pub fn step(state: &SolveState, forcing: Option<(&Field, &Field)>) -> Result<SolveState> {
    check_floor(state)?;
    let dt = state.dt;
    let bound = stable_dt(state);
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let (u, th, v) = (&state.u, &state.theta, &state.v);
    let ux = d_dx(u, 1);
    let uy = d_dy(u, 1)?;
    let tx = d_dx(th, 1);
    let ty = d_dy(th, 1)?;
    let a = th.map(|x| x + state.theta_e);

    let mut nu_u = dealiased_product(&[u, &ux])?
        .add(&dealiased_product(&[v, &uy])?)?
        .scale(-1.0);
    let mut nu_t = dealiased_product(&[&a, &uy, &uy])?
        .sub(&dealiased_product(&[u, &tx])?)?
        .sub(&dealiased_product(&[v, &ty])?)?;
    if let Some((fu, ft)) = forcing {
        nu_u = nu_u.add(fu)?;
        nu_t = nu_t.add(ft)?;
    }
    let u_star = u.add(&nu_u.scale(dt))?;
    let t_star = th.add(&nu_t.scale(dt))?;
    let u_star = implicit_tangential(&u_star, state.nu, dt);
    let t_star = implicit_tangential(&t_star, state.nu, dt);
    let t_new = state.t + dt;
    let u_new = implicit_normal(&u_star, &a, dt, false).with_time(t_new);
    let th_new = implicit_normal(&t_star, &a, dt, true).with_time(t_new);

    if u_new.has_non_finite() || th_new.has_non_finite() {
        return Err(Error::BlowUp {
            t: t_new,
            reason: "non-finite value".into(),
        });
    }
    let umax = u_new.max_abs();
    if umax > BLOWUP_THRESHOLD {
        return Err(Error::BlowUp {
            t: t_new,
            reason: format!("max|u| = {umax:e}"),
        });
    }
    let v_new = recover_v(&u_new, &th_new)?;
    Ok(SolveState {
        u: u_new,
        theta: th_new,
        v: v_new,
        t: t_new,
        nu: state.nu,
        theta_e: state.theta_e,
        dt,
        step_index: state.step_index + 1,
    })
}

/// Whether the time loop should keep going after an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Steps from `state` to `t_end`. The observer sees the initial state and
/// every subsequent one; `forcing(t)` is evaluated at the start of each
/// step.
pub fn integrate<O>(
    mut state: SolveState,
    policy: DtPolicy,
    t_end: f64,
    forcing: Option<&dyn Fn(f64) -> (Field, Field)>,
    mut observe: O,
) -> Result<SolveState>
where
    O: FnMut(&SolveState) -> Result<Control>,
{
    if observe(&state)? == Control::Stop {
        return Ok(state);
    }
    let t0 = state.t;
    let mut n: u64 = 0;
    let n_fixed = match policy {
        DtPolicy::Fixed(dt) => {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!("dt = {dt}")));
            }
            Some(((t_end - t0) / dt).round().max(0.0) as u64)
        }
        DtPolicy::Adaptive { .. } => None,
    };
    loop {
        match (policy, n_fixed) {
            (DtPolicy::Fixed(dt), Some(total)) => {
                if n >= total {
                    break;
                }
                state.dt = dt;
            }
            (DtPolicy::Adaptive { cap }, _) => {
                let left = t_end - state.t;
                if left <= 1e-12 * t_end.abs().max(1.0) {
                    break;
                }
                state.dt = cap.min(stable_dt(&state)).min(left);
            }
            _ => unreachable!(),
        }
        let f = forcing.map(|f| f(state.t));
        state = step(&state, f.as_ref().map(|(a, b)| (a, b)))?;
        if let Some(total) = n_fixed {
            // avoid drift from repeated addition
            state.t = t0 + (n + 1) as f64 * state.dt;
            if n + 1 == total {
                state.t = t0 + total as f64 * state.dt;
            }
            state.u.t = state.t;
            state.theta.t = state.t;
            state.v.t = state.t;
        }
        n += 1;
        if observe(&state)? == Control::Stop {
            break;
        }
    }
    Ok(state)
}

/// Parameters of the random analytic initial-data generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub delta: f64,
    pub epsilon: f64,
    pub theta_e: f64,
    pub seed: u64,
    /// Target `||e^{delta|D|} u_0||_{B^{1,1}_{Psi_0}}`.
    pub u_norm: f64,
    /// Highest tangential mode; capped at `nx / 3`.
    pub modes: usize,
    /// Permit `epsilon >= theta_E`.
    pub allow_out_of_theory: bool,
}

impl GeneratorParams {
    pub fn new(delta: f64, epsilon: f64, theta_e: f64, seed: u64) -> Self {
        Self {
            delta,
            epsilon,
            theta_e,
            seed,
            u_norm: 0.1,
            modes: 10,
            allow_out_of_theory: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Field,
    pub theta0: Field,
    pub delta: f64,
    pub epsilon: f64,
    pub theta_e: f64,
}

/// Amplified initial-data norms `||e^{delta|D|} f||_{B^{1,1}_{Psi_0}}` and
/// `||e^{delta|D|} f_yy||_{B^{1/2,0}_{Psi_0}}`.
pub fn initial_norms(f: &Field, delta: f64, theta_e: f64) -> Result<(f64, f64)> {
    let g = f.grid();
    let part = DyadicPartition::for_grid(g);
    let w = WeightProfile::new(g, theta_e, 0.0);
    let table = ModeEnergy::new(f, 2, &w)?.block_table(&part, delta)?;
    Ok((table.besov(1.0, 0, 1), table.besov(0.5, 2, 2)))
}

impl InitialData {
    /// Checks wall compatibility, finiteness of the amplified norms and the
    /// smallness bound on `theta_0`.
    pub fn check(&self) -> Result<()> {
        let g = self.u0.grid();
        let ty = d_dy(&self.theta0, 1)?;
        for ix in 0..g.nx() {
            if self.u0.at(ix, 0).abs() > 1e-10 {
                return Err(Error::Compatibility(format!(
                    "u0 != 0 at the wall (ix = {ix})"
                )));
            }
            if ty.at(ix, 0).abs() > 1e-10 {
                return Err(Error::Compatibility(format!(
                    "theta0_y != 0 at the wall (ix = {ix})"
                )));
            }
        }
        initial_norms(&self.u0, self.delta, self.theta_e)?;
        let (nt, _) = initial_norms(&self.theta0, self.delta, self.theta_e)?;
        if nt > self.epsilon * (1.0 + 1e-10) + 1e-300 {
            return Err(Error::InvalidParameter(format!(
                "theta0 amplified norm {nt} exceeds epsilon {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Random data with tangential coefficients decaying like `e^{-2 delta |xi|}`
/// and Gaussian normal profiles; `theta_0` is scaled to amplified norm
/// `epsilon / 2`.
pub fn make_initial_data(
    grid: &GridRef,
    delta: f64,
    epsilon: f64,
    theta_e: f64,
    seed: u64,
) -> Result<InitialData> {
    make_initial_data_with(grid, &GeneratorParams::new(delta, epsilon, theta_e, seed))
}

pub fn make_initial_data_with(grid: &GridRef, p: &GeneratorParams) -> Result<InitialData> {
    if !(p.delta > 0.0 && p.theta_e > 0.0 && p.epsilon >= 0.0 && p.u_norm >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need delta > 0, theta_E > 0, epsilon >= 0, u_norm >= 0 (got {}, {}, {}, {})",
            p.delta, p.theta_e, p.epsilon, p.u_norm
        )));
    }
    if p.epsilon >= p.theta_e && !p.allow_out_of_theory {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {} must be below theta_E = {}",
            p.epsilon, p.theta_e
        )));
    }
    let g = grid;
    let m_max = p.modes.min(g.nx() / 3).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut a = Vec::with_capacity(m_max + 1);
    let mut b = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let xi = 2.0 * PI * m as f64 / g.lx();
        let decay = (-2.0 * p.delta * xi).exp();
        let (ra, pa): (f64, f64) = (rng.gen_range(0.5..=1.0), rng.gen_range(0.0..2.0 * PI));
        let (rb, pb): (f64, f64) = (rng.gen_range(0.25..=0.5), rng.gen_range(0.0..2.0 * PI));
        if m == 0 {
            a.push((ra, 0.0));
            b.push((-1.0, 0.0));
        } else {
            a.push((decay * ra, pa));
            b.push((decay * rb, pb));
        }
    }
    // real series: c_0 + 2 sum_{m>=1} |c_m| cos(xi_m x + phase_m)
    let series = |c: &[(f64, f64)], x: f64| -> f64 {
        c.iter()
            .enumerate()
            .map(|(m, &(r, ph))| {
                let xi = 2.0 * PI * m as f64 / g.lx();
                if m == 0 {
                    r
                } else {
                    2.0 * r * (xi * x + ph).cos()
                }
            })
            .sum()
    };
    let l = p.theta_e.sqrt();
    let u = Field::from_fn(g, 0.0, |x, y| {
        let s = y / l;
        series(&a, x) * s * (-s * s).exp()
    });
    let th = enforce_wall_neumann(&Field::from_fn(g, 0.0, |x, y| {
        let s = y / l;
        series(&b, x) * (-s * s).exp()
    }));
    let u0 = if p.u_norm == 0.0 {
        Field::zeros(g, 0.0)
    } else {
        let (n, _) = initial_norms(&u, p.delta, p.theta_e)?;
        u.scale(p.u_norm / n)
    };
    let theta0 = if p.epsilon == 0.0 {
        Field::zeros(g, 0.0)
    } else {
        let (n, _) = initial_norms(&th, p.delta, p.theta_e)?;
        th.scale(0.5 * p.epsilon / n)
    };
    let data = InitialData {
        u0,
        theta0,
        delta: p.delta,
        epsilon: p.epsilon,
        theta_e: p.theta_e,
    };
    data.check()?;
    Ok(data)
}

/// Selects one of the differentiated evolution equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedEquation {
    /// for `u_y`
    DyU,
    /// for `theta_y`
    DyTheta,
    /// for `u_yy`
    DyyU,
    /// for `theta_yy`, with the wall identity
    DyyTheta,
}

impl DerivedEquation {
    pub const ALL: [DerivedEquation; 4] = [
        DerivedEquation::DyU,
        DerivedEquation::DyTheta,
        DerivedEquation::DyyU,
        DerivedEquation::DyyTheta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DerivedEquation::DyU => "dy_u",
            DerivedEquation::DyTheta => "dy_theta",
            DerivedEquation::DyyU => "dyy_u",
            DerivedEquation::DyyTheta => "dyy_theta",
        }
    }
}

/// Rows next to each edge whose derivatives use one-sided stencils.
pub const CLOSURE_ROWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// Max-norm over the rows `CLOSURE_ROWS..ny - CLOSURE_ROWS`, where all
    /// normal derivatives use centered stencils.
    pub max: f64,
    /// Max-norm over the whole grid.
    pub max_all: f64,
    /// Max over `x` of the wall identity (only for `DyyTheta`).
    pub wall: Option<f64>,
}

struct Derivs {
    u: Field,
    ux: Field,
    ub: Field,
    ubx: Field,
    w: Field,
    wx: Field,
    uyyy: Field,
    uyyyy: Field,
    tx: Field,
    tb: Field,
    tbx: Field,
    s: Field,
    sx: Field,
    tyyy: Field,
    tyyyy: Field,
    a: Field,
}

impl Derivs {
    fn new(st: &SolveState) -> Self {
        let u = st.u.clone();
        let th = &st.theta;
        let ub = d_dy_any(&u, 1);
        let w = d_dy_any(&u, 2);
        let tb = d_dy_any(th, 1);
        let s = d_dy_any(th, 2);
        Self {
            ux: d_dx(&u, 1),
            ubx: d_dx(&ub, 1),
            wx: d_dx(&w, 1),
            uyyy: d_dy_any(&u, 3),
            uyyyy: d_dy_any(&u, 4),
            tx: d_dx(th, 1),
            tbx: d_dx(&tb, 1),
            sx: d_dx(&s, 1),
            tyyy: d_dy_any(th, 3),
            tyyyy: d_dy_any(th, 4),
            a: th.map(|x| x + st.theta_e),
            u,
            ub,
            w,
            tb,
            s,
        }
    }
}

/// Residual of a differentiated equation at `cur`, with the time
/// derivative taken as the backward difference from `prev`. `forcing`, if
/// present, is the right-side forcing of the `(u, theta)` equations at
/// `cur.t`.
pub fn derived_equation_residual(
    prev: &SolveState,
    cur: &SolveState,
    which: DerivedEquation,
    forcing: Option<(&Field, &Field)>,
) -> Result<Residual> {
    let g = cur.grid().clone();
    if **prev.grid() != *g {
        return Err(Error::GridMismatch);
    }
    let dt = cur.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "states not ordered in time (dt = {dt})"
        )));
    }
    let d = Derivs::new(cur);
    let p = Derivs::new(prev);
    let i1 = cumulative_integral_y(&d.ux);
    let i2 = cumulative_integral_y(&d.ub.mul(&d.ub)?);
    let nu = cur.nu;
    let zero = Field::zeros(&g, cur.t);
    let (dfu, dft, d2fu, d2ft) = match forcing {
        Some((fu, ft)) => (
            d_dy_any(fu, 1),
            d_dy_any(ft, 1),
            d_dy_any(fu, 2),
            d_dy_any(ft, 2),
        ),
        None => (zero.clone(), zero.clone(), zero.clone(), zero.clone()),
    };
    let n = g.len();
    let vals = |f: &Field| f.values().to_vec();
    let (u, ux, ub, ubx, w, wx) = (
        vals(&d.u),
        vals(&d.ux),
        vals(&d.ub),
        vals(&d.ubx),
        vals(&d.w),
        vals(&d.wx),
    );
    let (uyyy, uyyyy, tx, tb, tbx) = (
        vals(&d.uyyy),
        vals(&d.uyyyy),
        vals(&d.tx),
        vals(&d.tb),
        vals(&d.tbx),
    );
    let (s, sx, tyyy, tyyyy, a) = (
        vals(&d.s),
        vals(&d.sx),
        vals(&d.tyyy),
        vals(&d.tyyyy),
        vals(&d.a),
    );
    let (i1, i2) = (vals(&i1), vals(&i2));
    let mut r = vec![0.0; n];
    let mut wall = None;
    match which {
        DerivedEquation::DyU => {
            let dt_f = d.ub.sub(&p.ub)?.scale(1.0 / dt);
            let visc = d_dx(&d.ub, 2).scale(nu);
            for k in 0..n {
                r[k] = dt_f.values()[k]
                    + u[k] * ubx[k]
                    + ub[k] * s[k]
                    + ub[k].powi(3)
                    + (-i1[k] + i2[k]) * w[k]
                    - a[k] * uyyy[k]
                    - visc.values()[k]
                    - dfu.values()[k];
            }
        }
        DerivedEquation::DyTheta => {
            let dt_f = d.tb.sub(&p.tb)?.scale(1.0 / dt);
            let visc = d_dx(&d.tb, 2).scale(nu);
            for k in 0..n {
                r[k] = dt_f.values()[k] + ub[k] * tx[k] + u[k] * tbx[k] - tb[k] * ux[k]
                    + (-i1[k] + i2[k] + tb[k]) * s[k]
                    - a[k] * tyyy[k]
                    - 2.0 * a[k] * ub[k] * w[k]
                    - visc.values()[k]
                    - dft.values()[k];
            }
        }
        DerivedEquation::DyyU => {
            let dt_f = d.w.sub(&p.w)?.scale(1.0 / dt);
            let visc = d_dx(&d.w, 2).scale(nu);
            for k in 0..n {
                r[k] = dt_f.values()[k]
                    + u[k] * wx[k]
                    + (ubx[k] + tyyy[k]) * ub[k]
                    + (-ux[k] + 4.0 * ub[k] * ub[k] + s[k]) * w[k]
                    + (-i1[k] + i2[k] - tb[k]) * uyyy[k]
                    - a[k] * uyyyy[k]
                    - visc.values()[k]
                    - d2fu.values()[k];
            }
        }
        DerivedEquation::DyyTheta => {
            let dt_f = d.s.sub(&p.s)?.scale(1.0 / dt);
            let visc = d_dx(&d.s, 2).scale(nu);
            for k in 0..n {
                let lhs = dt_f.values()[k] + ub[k] * tbx[k] - tb[k] * ubx[k]
                    + u[k] * sx[k]
                    + (-2.0 * ux[k] + s[k] + ub[k] * ub[k]) * s[k]
                    + (-i1[k] + tb[k] + i2[k]) * tyyy[k]
                    - 2.0 * tb[k] * ub[k] * w[k]
                    - 2.0 * a[k] * w[k] * w[k]
                    - 2.0 * a[k] * ub[k] * uyyy[k];
                let flux = tb[k] * tyyy[k] + a[k] * tyyyy[k] - w[k] * tx[k] - ub[k] * tbx[k];
                r[k] = lhs - flux - visc.values()[k] - d2ft.values()[k];
            }
            let ny = g.ny();
            let mut wmax: f64 = 0.0;
            for ix in 0..g.nx() {
                let k = ix * ny;
                let id =
                    ub[k] * tx[k] - a[k] * tyyy[k] - 2.0 * a[k] * ub[k] * w[k] - dft.values()[k];
                wmax = wmax.max(id.abs());
            }
            wall = Some(wmax);
        }
    }
    let ny = g.ny();
    let interior = r
        .iter()
        .enumerate()
        .filter(|(k, _)| (CLOSURE_ROWS..ny - CLOSURE_ROWS).contains(&(k % ny)))
        .fold(0.0, |m: f64, (_, x)| m.max(x.abs()));
    Ok(Residual {
        max: interior,
        max_all: r.iter().fold(0.0, |m, x| m.max(x.abs())),
        wall,
    })
}
