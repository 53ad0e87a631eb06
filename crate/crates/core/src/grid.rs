//! Discretization of the half-plane: a periodic Fourier grid in `x` and a
//! truncated uniform grid in `y`.
//!
//! Values are stored `values[ix * ny + jy]`, so a contiguous slice is the
//! normal profile at one tangential station. Spectral coefficients use the
//! same layout with `ix` replaced by the FFT bin, normalized so that
//! `f(x) = sum_m c_m e^{i xi_m x}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fd::{derivative_stencils, Stencil};

pub type GridRef = Arc<Grid>;

/// Tolerance for the conjugate-symmetry check of `inverse_transform`.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub struct Grid {
    lx: f64,
    nx: usize,
    ymax: f64,
    ny: usize,
    y: Vec<f64>,
    trapezoid: Vec<f64>,
    stencils: [Vec<Stencil>; 4],
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_pad: Arc<dyn Fft<f64>>,
    inv_pad: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("lx", &self.lx)
            .field("nx", &self.nx)
            .field("ymax", &self.ymax)
            .field("ny", &self.ny)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.lx == other.lx && self.nx == other.nx && self.ymax == other.ymax && self.ny == other.ny
    }
}

impl Grid {
    /// Uniform normal grid on `[0, ymax]` with `ny` nodes.
    pub fn new(lx: f64, nx: usize, ymax: f64, ny: usize) -> Result<GridRef> {
        if nx < 8 || !nx.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "nx = {nx} must be a power of two >= 8"
            )));
        }
        if ny < 16 {
            return Err(Error::InvalidGrid(format!("ny = {ny} must be >= 16")));
        }
        if !(lx > 0.0 && lx.is_finite() && ymax > 0.0 && ymax.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "lx = {lx} and ymax = {ymax} must be positive"
            )));
        }
        let dy = ymax / (ny - 1) as f64;
        let mut y: Vec<f64> = (0..ny).map(|j| j as f64 * dy).collect();
        y[ny - 1] = ymax;
        let mut trapezoid = vec![dy; ny];
        trapezoid[0] = 0.5 * dy;
        trapezoid[ny - 1] = 0.5 * dy;
        let stencils = [
            derivative_stencils(&y, 1),
            derivative_stencils(&y, 2),
            derivative_stencils(&y, 3),
            derivative_stencils(&y, 4),
        ];
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            lx,
            nx,
            ymax,
            ny,
            trapezoid,
            stencils,
            fwd: planner.plan_fft_forward(nx),
            inv: planner.plan_fft_inverse(nx),
            fwd_pad: planner.plan_fft_forward(2 * nx),
            inv_pad: planner.plan_fft_inverse(2 * nx),
            y,
        }))
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ymax(&self) -> f64 {
        self.ymax
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn y_nodes(&self) -> &[f64] {
        &self.y
    }
    pub fn dy(&self) -> f64 {
        self.y[1] - self.y[0]
    }
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.dx()
    }
    /// Trapezoid weights in `y`.
    pub fn trapezoid_weights(&self) -> &[f64] {
        &self.trapezoid
    }
    pub(crate) fn stencils(&self, order: usize) -> &[Stencil] {
        &self.stencils[order - 1]
    }

    /// Signed mode number of FFT bin `i`, in `-nx/2 ..= nx/2 - 1`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.nx / 2 {
            i as i64
        } else {
            i as i64 - self.nx as i64
        }
    }

    #[inline]
    pub fn bin(&self, mode: i64) -> usize {
        mode.rem_euclid(self.nx as i64) as usize
    }

    /// Tangential wavenumber `2 pi m / lx` of FFT bin `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.mode(i) as f64 / self.lx
    }

    /// Largest `|xi|` on the grid (the Nyquist bin).
    pub fn nyquist(&self) -> f64 {
        PI * self.nx as f64 / self.lx
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Real samples on the grid at time `t`.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridRef,
    values: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn new(grid: &GridRef, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                ix: k / grid.ny,
                jy: k % grid.ny,
                value: values[k],
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            t,
        })
    }

    pub fn zeros(grid: &GridRef, t: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            t,
        }
    }

    /// Samples `f(x, y)` at the nodes. Panics on non-finite samples.
    pub fn from_fn(grid: &GridRef, t: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for ix in 0..grid.nx {
            let x = grid.x(ix);
            for &y in &grid.y {
                values.push(f(x, y));
            }
        }
        Self::new(grid, values, t).expect("from_fn produced a non-finite sample")
    }

    pub(crate) fn from_raw(grid: &GridRef, values: Vec<f64>, t: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
            t,
        }
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    #[inline]
    pub fn at(&self, ix: usize, jy: usize) -> f64 {
        self.values[ix * self.grid.ny + jy]
    }
    /// Normal profile at tangential station `ix`.
    pub fn profile(&self, ix: usize) -> &[f64] {
        let ny = self.grid.ny;
        &self.values[ix * ny..(ix + 1) * ny]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn has_non_finite(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(
            &self.grid,
            self.values.iter().map(|&v| f(v)).collect(),
            self.t,
        )
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            self.t,
        ))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }
    /// Pointwise product without dealiasing.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a * b)
    }
    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn with_time(mut self, t: f64) -> Field {
        self.t = t;
        self
    }

    /// Discrete `L^2_+` norm with the normalized tangential measure
    /// `(1/L_x) dx` and the trapezoid rule in `y`.
    pub fn l2(&self) -> f64 {
        let g = &self.grid;
        let w = &g.trapezoid;
        let mut s = 0.0;
        for ix in 0..g.nx {
            for (jy, v) in self.profile(ix).iter().enumerate() {
                s += w[jy] * v * v;
            }
        }
        (s / g.nx as f64).sqrt()
    }
}

/// Per-row tangential Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridRef,
    coeffs: Vec<Complex64>,
    pub t: f64,
}

impl SpectralField {
    pub fn zeros(grid: &GridRef, t: f64) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
            t,
        }
    }

    pub fn from_coeffs(grid: &GridRef, coeffs: Vec<Complex64>, t: f64) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            t,
        })
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
    /// Coefficient of FFT bin `i` on row `jy`.
    #[inline]
    pub fn at(&self, i: usize, jy: usize) -> Complex64 {
        self.coeffs[i * self.grid.ny + jy]
    }
    #[inline]
    pub fn set(&mut self, i: usize, jy: usize, c: Complex64) {
        let ny = self.grid.ny;
        self.coeffs[i * ny + jy] = c;
    }

    /// Multiplies bin `i` of every row by `symbol(i)`.
    pub fn multiply_symbol(&self, symbol: impl Fn(usize) -> f64) -> SpectralField {
        let ny = self.grid.ny;
        let mut out = self.clone();
        for i in 0..self.grid.nx {
            let s = symbol(i);
            for c in &mut out.coeffs[i * ny..(i + 1) * ny] {
                *c *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|c_{-m} - conj(c_m)|` over all bins and rows.
    pub fn symmetry_defect(&self) -> (f64, i64, usize) {
        let g = &self.grid;
        let mut worst = (0.0, 0, 0);
        for i in 0..g.nx {
            let j = (g.nx - i) % g.nx;
            for jy in 0..g.ny {
                let d = (self.at(j, jy) - self.at(i, jy).conj()).norm();
                if d > worst.0 {
                    worst = (d, g.mode(i), jy);
                }
            }
        }
        worst
    }
}

/// Row-wise DFT in `x`.
pub fn forward_transform(f: &Field) -> SpectralField {
    let g = &f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); nx];
    let scale = 1.0 / nx as f64;
    for jy in 0..ny {
        for ix in 0..nx {
            buf[ix] = Complex64::new(f.values[ix * ny + jy], 0.0);
        }
        g.fwd.process(&mut buf);
        for i in 0..nx {
            out[i * ny + jy] = buf[i] * scale;
        }
    }
    SpectralField {
        grid: g.clone(),
        coeffs: out,
        t: f.t,
    }
}

/// Inverse of [`forward_transform`]; rejects spectra that are not the
/// transform of real data.
pub fn inverse_transform(spec: &SpectralField) -> Result<Field> {
    let (defect, mode, row) = spec.symmetry_defect();
    let scale = spec.max_abs().max(1.0);
    if defect > SYMMETRY_TOL * scale {
        return Err(Error::SymmetryViolation { mode, row, defect });
    }
    Ok(inverse_unchecked(spec))
}

/// Inverse transform keeping only the real part, for spectra that are known
/// to be symmetric by construction.
pub(crate) fn inverse_unchecked(spec: &SpectralField) -> Field {
    let g = &spec.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![0.0; g.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); nx];
    for jy in 0..ny {
        for i in 0..nx {
            buf[i] = spec.coeffs[i * ny + jy];
        }
        g.inv.process(&mut buf);
        for ix in 0..nx {
            out[ix * ny + jy] = buf[ix].re;
        }
    }
    Field::from_raw(g, out, spec.t)
}

/// Spectral tangential derivative of order `order`.
pub fn d_dx(f: &Field, order: u32) -> Field {
    if order == 0 {
        return f.clone();
    }
    let g = f.grid.clone();
    let spec = forward_transform(f);
    let mut out = spec.clone();
    let ny = g.ny;
    for i in 0..g.nx {
        let factor = if order % 2 == 1 && i == g.nx / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, g.wavenumber(i)).powu(order)
        };
        for c in &mut out.coeffs[i * ny..(i + 1) * ny] {
            *c *= factor;
        }
    }
    inverse_unchecked(&out)
}

/// Normal derivative of order 1, 2 or 3 with fourth-order stencils.
pub fn d_dy(f: &Field, order: usize) -> Result<Field> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "d_dy order {order} not in 1..=3"
        )));
    }
    Ok(d_dy_any(f, order))
}

/// Normal derivative of order 0..=4; order 4 is used only by residual
/// checks of the differentiated equations.
pub(crate) fn d_dy_any(f: &Field, order: usize) -> Field {
    if order == 0 {
        return f.clone();
    }
    let g = &f.grid;
    let st = g.stencils(order);
    let mut out = Vec::with_capacity(g.len());
    for ix in 0..g.nx {
        let prof = f.profile(ix);
        out.extend(st.iter().map(|s| s.apply(prof)));
    }
    Field::from_raw(g, out, f.t)
}

/// Antiderivative in `y` vanishing at `y = 0`.
///
/// Each cell integral uses the cubic through the four nearest nodes, so the
/// rule is exact for cubics and fourth-order accurate.
pub fn cumulative_integral_y(f: &Field) -> Field {
    let g = &f.grid;
    let ny = g.ny;
    let h = g.dy();
    let mut out = Vec::with_capacity(g.len());
    for ix in 0..g.nx {
        let p = f.profile(ix);
        let mut acc = 0.0;
        out.push(0.0);
        for j in 0..ny - 1 {
            let cell = if j == 0 {
                9.0 * p[0] + 19.0 * p[1] - 5.0 * p[2] + p[3]
            } else if j == ny - 2 {
                p[ny - 4] - 5.0 * p[ny - 3] + 19.0 * p[ny - 2] + 9.0 * p[ny - 1]
            } else {
                -p[j - 1] + 13.0 * p[j] + 13.0 * p[j + 1] - p[j + 2]
            };
            acc += cell * h / 24.0;
            out.push(acc);
        }
    }
    Field::from_raw(g, out, f.t)
}

/// Product of real fields computed on a grid padded to `2 nx` and truncated
/// back, so products of up to three factors carry no aliasing error. The
/// Nyquist bin of the result is zeroed.
pub fn dealiased_product(factors: &[&Field]) -> Result<Field> {
    assert!(!factors.is_empty());
    let g = factors[0].grid.clone();
    for f in &factors[1..] {
        g.check_same(&f.grid)?;
    }
    let (nx, ny) = (g.nx, g.ny);
    let np = 2 * nx;
    let half = nx / 2;
    let specs: Vec<SpectralField> = factors.iter().map(|f| forward_transform(f)).collect();
    let mut out = SpectralField::zeros(&g, factors[0].t);
    let mut prod = vec![Complex64::new(0.0, 0.0); np];
    let mut buf = vec![Complex64::new(0.0, 0.0); np];
    for jy in 0..ny {
        prod.iter_mut().for_each(|c| *c = Complex64::new(1.0, 0.0));
        for s in &specs {
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for i in 0..nx {
                let m = g.mode(i);
                let c = s.at(i, jy);
                if i == half {
                    // split the Nyquist bin between +nx/2 and -nx/2
                    buf[half] = c * 0.5;
                    buf[np - half] = c * 0.5;
                } else {
                    buf[m.rem_euclid(np as i64) as usize] = c;
                }
            }
            g.inv_pad.process(&mut buf);
            for (p, b) in prod.iter_mut().zip(&buf) {
                *p *= b.re;
            }
        }
        g.fwd_pad.process(&mut prod);
        let scale = 1.0 / np as f64;
        for i in 0..nx {
            if i == half {
                continue;
            }
            let m = g.mode(i);
            out.set(i, jy, prod[m.rem_euclid(np as i64) as usize] * scale);
        }
    }
    Ok(inverse_unchecked(&out))
}

/// Zeroes every mode with `|m| > max_mode`.
pub fn truncate_modes(f: &Field, max_mode: i64) -> Field {
    let spec = forward_transform(f);
    let g = f.grid.clone();
    inverse_unchecked(&spec.multiply_symbol(|i| {
        if g.mode(i).abs() <= max_mode && i != g.nx / 2 {
            1.0
        } else {
            0.0
        }
    }))
}
