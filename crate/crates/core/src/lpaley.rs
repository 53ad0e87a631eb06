//! Dyadic frequency calculus in the tangential variable: the cutoffs `chi`
//! and `phi`, block filters, Bony's paraproduct split, the Gaussian weight
//! `e^Psi`, and the weighted Besov and Chemin-Lerner norms built on them.

use crate::error::{Error, Result};
use crate::grid::{
    d_dy_any, dealiased_product, forward_transform, inverse_unchecked, Field, Grid, SpectralField,
};

/// Weighted magnitudes above this are treated as overflow.
pub const OVERFLOW_THRESHOLD: f64 = 1e150;

const CHI_IN: f64 = 0.75;
const CHI_OUT: f64 = 4.0 / 3.0;

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth radial cutoff: 1 on `[0, 3/4]`, 0 on `[4/3, inf)`.
pub fn chi(r: f64) -> f64 {
    let r = r.abs();
    if r <= CHI_IN {
        return 1.0;
    }
    if r >= CHI_OUT {
        return 0.0;
    }
    let s = (r - CHI_IN) / (CHI_OUT - CHI_IN);
    let a = bump(1.0 - s);
    a / (a + bump(s))
}

/// Annular bump `chi(r/2) - chi(r)`, supported in `[3/4, 8/3]`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Block range and symbols of the dyadic decomposition on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPartition {
    k_max: i32,
}

impl DyadicPartition {
    /// Blocks `-1 ..= k_max`, where `k_max` is the first block whose
    /// support starts at or beyond the Nyquist wavenumber.
    pub fn for_grid(grid: &Grid) -> Self {
        let k_max = (CHI_OUT * grid.nyquist()).log2().ceil().max(0.0) as i32;
        Self { k_max }
    }

    pub fn k_min(&self) -> i32 {
        -1
    }
    pub fn k_max(&self) -> i32 {
        self.k_max
    }
    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.k_max
    }
    pub fn n_blocks(&self) -> usize {
        (self.k_max + 2) as usize
    }

    /// Symbol of `Delta_k` at `|xi| = r`.
    pub fn block_symbol(k: i32, r: f64) -> f64 {
        match k {
            k if k <= -2 => 0.0,
            -1 => chi(r),
            k => phi(r * 0.5f64.powi(k)),
        }
    }

    /// Symbol of `S_k = sum_{j <= k-1} Delta_j`: `chi(2^{-k} r)` for
    /// `k >= 0` and zero below.
    pub fn low_symbol(k: i32, r: f64) -> f64 {
        if k < 0 {
            0.0
        } else {
            chi(r * 0.5f64.powi(k))
        }
    }

    /// Worst deviation of `chi + sum_k phi(2^-k .)` from one over the
    /// nonnegative grid wavenumbers.
    pub fn partition_defect(&self, grid: &Grid) -> f64 {
        (0..=grid.nx() / 2)
            .map(|m| {
                let r = 2.0 * std::f64::consts::PI * m as f64 / grid.lx();
                let s: f64 = self.blocks().map(|k| Self::block_symbol(k, r)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `Delta_k F`.
pub fn dyadic_block(f: &SpectralField, k: i32) -> SpectralField {
    let g = f.grid().clone();
    f.multiply_symbol(|i| DyadicPartition::block_symbol(k, g.wavenumber(i).abs()))
}

/// `S_k F`.
pub fn low_pass(f: &SpectralField, k: i32) -> SpectralField {
    let g = f.grid().clone();
    f.multiply_symbol(|i| DyadicPartition::low_symbol(k, g.wavenumber(i).abs()))
}

/// Splits `fg` into `(T_f g, T_g f, R(f, g))`. All products are
/// dealiased, so the three parts add up to `dealiased_product(&[f, g])`.
pub fn bony_decompose(f: &Field, g: &Field) -> Result<(Field, Field, Field)> {
    let grid = f.grid().clone();
    if **f.grid() != **g.grid() {
        return Err(Error::GridMismatch);
    }
    let part = DyadicPartition::for_grid(&grid);
    let (fs, gs) = (forward_transform(f), forward_transform(g));
    let blocks_f: Vec<Field> = part
        .blocks()
        .map(|k| inverse_unchecked(&dyadic_block(&fs, k)))
        .collect();
    let blocks_g: Vec<Field> = part
        .blocks()
        .map(|k| inverse_unchecked(&dyadic_block(&gs, k)))
        .collect();
    let mut tfg = Field::zeros(&grid, f.t);
    let mut tgf = Field::zeros(&grid, f.t);
    let mut r = Field::zeros(&grid, f.t);
    let idx = |k: i32| (k + 1) as usize;
    for k in part.blocks() {
        let low_f = inverse_unchecked(&low_pass(&fs, k - 1));
        let low_g = inverse_unchecked(&low_pass(&gs, k - 1));
        tfg = tfg.add(&dealiased_product(&[&low_f, &blocks_g[idx(k)]])?)?;
        tgf = tgf.add(&dealiased_product(&[&low_g, &blocks_f[idx(k)]])?)?;
        for kp in (k - 1).max(-1)..=(k + 1).min(part.k_max()) {
            r = r.add(&dealiased_product(&[
                &blocks_f[idx(kp)],
                &blocks_g[idx(k)],
            ])?)?;
        }
    }
    Ok((tfg, tgf, r))
}

/// Gaussian weight `Psi(t, y) = y^2 / (16 theta_E (1 + t))` at the nodes.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    pub theta_e: f64,
    pub t: f64,
    psi: Vec<f64>,
    exp_psi: Vec<f64>,
    dy_psi: Vec<f64>,
    dt_psi: Vec<f64>,
}

impl WeightProfile {
    pub fn new(grid: &Grid, theta_e: f64, t: f64) -> Self {
        let tt = 1.0 + t;
        let ys = grid.y_nodes();
        let psi: Vec<f64> = ys.iter().map(|y| y * y / (16.0 * theta_e * tt)).collect();
        Self {
            theta_e,
            t,
            exp_psi: psi.iter().map(|p| p.exp()).collect(),
            dy_psi: ys.iter().map(|y| y / (8.0 * theta_e * tt)).collect(),
            dt_psi: ys
                .iter()
                .map(|y| -y * y / (16.0 * theta_e * tt * tt))
                .collect(),
            psi,
        }
    }

    /// A weight of one everywhere, used for unweighted norms.
    pub fn unit(grid: &Grid) -> Self {
        let n = grid.ny();
        Self {
            theta_e: f64::INFINITY,
            t: 0.0,
            psi: vec![0.0; n],
            exp_psi: vec![1.0; n],
            dy_psi: vec![0.0; n],
            dt_psi: vec![0.0; n],
        }
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }
    pub fn exp_psi(&self) -> &[f64] {
        &self.exp_psi
    }
    pub fn dy_psi(&self) -> &[f64] {
        &self.dy_psi
    }
    pub fn dt_psi(&self) -> &[f64] {
        &self.dt_psi
    }

    /// `d_t Psi + 4 theta_E (d_y Psi)^2` at every node.
    pub fn identity_residual(&self) -> Vec<f64> {
        self.dt_psi
            .iter()
            .zip(&self.dy_psi)
            .map(|(dt, dy)| dt + 4.0 * self.theta_e * dy * dy)
            .collect()
    }
}

/// Index set of a Besov norm `B^{s,j}` (optionally with the weight).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub j: usize,
    pub weighted: bool,
}

impl BesovSpec {
    pub fn new(s: f64, j: usize, weighted: bool) -> Self {
        Self { s, j, weighted }
    }
}

/// Per-mode weighted `L^2` energies of `d_y^i f` for `i = 0..=max_order`.
///
/// `energy[i][bin] = sum_j w_j e^{2 Psi_j} |c_bin(y_j)|^2`, so by Parseval
/// the squared weighted `L^2_+` norm of a Fourier multiplier `m(D)` applied
/// to `d_y^i f` is `sum_bin m^2 energy[i][bin]`.
#[derive(Debug, Clone)]
pub struct ModeEnergy {
    abs_xi: Vec<f64>,
    energy: Vec<Vec<f64>>,
}

impl ModeEnergy {
    pub fn new(f: &Field, max_order: usize, w: &WeightProfile) -> Result<Self> {
        let g = f.grid().clone();
        let ew = w.exp_psi();
        let trap = g.trapezoid_weights();
        let mut energy = Vec::with_capacity(max_order + 1);
        for i in 0..=max_order {
            let d = d_dy_any(f, i);
            for ix in 0..g.nx() {
                for (jy, v) in d.profile(ix).iter().enumerate() {
                    let m = (v * ew[jy]).abs();
                    if !(m < OVERFLOW_THRESHOLD) {
                        return Err(Error::InsufficientDecay { row: jy, value: m });
                    }
                }
            }
            let spec = forward_transform(&d);
            let mut e = vec![0.0; g.nx()];
            for (bin, eb) in e.iter_mut().enumerate() {
                *eb = (0..g.ny())
                    .map(|jy| trap[jy] * ew[jy] * ew[jy] * spec.at(bin, jy).norm_sqr())
                    .sum();
            }
            energy.push(e);
        }
        Ok(Self {
            abs_xi: (0..g.nx()).map(|i| g.wavenumber(i).abs()).collect(),
            energy,
        })
    }

    pub fn max_order(&self) -> usize {
        self.energy.len() - 1
    }

    /// Blockwise norms of `e^{radius |D|} d_y^i f`.
    pub fn block_table(&self, part: &DyadicPartition, radius: f64) -> Result<BlockTable> {
        let mut vals = vec![vec![0.0; self.energy.len()]; part.n_blocks()];
        let mut amp = Vec::with_capacity(self.abs_xi.len());
        for (bin, &xi) in self.abs_xi.iter().enumerate() {
            let a = (2.0 * radius * xi).exp();
            for e in &self.energy {
                if e[bin] > 0.0 && !(a * e[bin] < OVERFLOW_THRESHOLD * OVERFLOW_THRESHOLD) {
                    let nx = self.abs_xi.len() as i64;
                    let mode = if (bin as i64) < nx / 2 {
                        bin as i64
                    } else {
                        bin as i64 - nx
                    };
                    return Err(Error::AnalyticityDeficit {
                        mode,
                        xi,
                        value: (a * e[bin]).sqrt(),
                    });
                }
            }
            amp.push(a);
        }
        for (kk, k) in part.blocks().enumerate() {
            for (i, e) in self.energy.iter().enumerate() {
                let s: f64 = self
                    .abs_xi
                    .iter()
                    .zip(e)
                    .zip(&amp)
                    .map(|((&xi, &eb), &a)| {
                        let sym = DyadicPartition::block_symbol(k, xi);
                        sym * sym * a * eb
                    })
                    .sum();
                vals[kk][i] = s.sqrt();
            }
        }
        Ok(BlockTable {
            k_min: part.k_min(),
            vals,
        })
    }

    /// Squared unweighted-in-x Sobolev-type sum
    /// `sum_{a <= ax} sum_{b <= by} ||d_x^a d_y^b f||^2` for the
    /// anisotropic `H^{ax, by}` norms.
    pub fn sobolev_sq(&self, ax: u32, by: usize) -> f64 {
        let mut s = 0.0;
        for e in &self.energy[..=by] {
            for (xi, eb) in self.abs_xi.iter().zip(e) {
                s += (0..=ax).map(|a| xi.powi(2 * a as i32)).sum::<f64>() * eb;
            }
        }
        s
    }
}

/// `vals[k - k_min][i] = ||e^Psi Delta_k d_y^i f_Phi||_{L^2_+}`.
#[derive(Debug, Clone)]
pub struct BlockTable {
    k_min: i32,
    vals: Vec<Vec<f64>>,
}

impl BlockTable {
    pub fn block(&self, k: i32, order: usize) -> f64 {
        self.vals[(k - self.k_min) as usize][order]
    }

    pub fn blocks(&self) -> impl Iterator<Item = (i32, &[f64])> {
        self.vals
            .iter()
            .enumerate()
            .map(move |(kk, v)| (kk as i32 + self.k_min, v.as_slice()))
    }

    /// `sum_k 2^{ks} sum_{i = lo..=hi} vals[k][i]`: the `B^{s, hi-lo}` norm
    /// of `d_y^lo f`.
    pub fn besov(&self, s: f64, lo: usize, hi: usize) -> f64 {
        self.blocks()
            .map(|(k, v)| 2f64.powf(k as f64 * s) * v[lo..=hi].iter().sum::<f64>())
            .sum()
    }
}

/// `||f||_{B^{s,j}_Psi}` (or unweighted if `spec.weighted` is false).
pub fn besov_norm(f: &Field, spec: BesovSpec, w: &WeightProfile) -> Result<f64> {
    besov_norm_phased(f, spec, w, 0.0)
}

/// Besov norm of `e^{radius |D|} f`.
pub fn besov_norm_phased(
    f: &Field,
    spec: BesovSpec,
    w: &WeightProfile,
    radius: f64,
) -> Result<f64> {
    let unit;
    let w = if spec.weighted {
        w
    } else {
        unit = WeightProfile::unit(f.grid());
        &unit
    };
    let part = DyadicPartition::for_grid(f.grid());
    let table = ModeEnergy::new(f, spec.j, w)?.block_table(&part, radius)?;
    Ok(table.besov(spec.s, 0, spec.j))
}

/// Time exponent of a Chemin-Lerner norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeExponent {
    Two,
    Inf,
}

/// Running per-block accumulator for `L~^p_t(B^{s,j})` and the
/// density-weighted `L~^2_{t,f}(B^{s,j})`.
#[derive(Debug, Clone)]
pub struct CheminLernerAccumulator {
    pub s: f64,
    pub lo: usize,
    pub hi: usize,
    pub p: TimeExponent,
    acc: Vec<Vec<f64>>,
}

impl CheminLernerAccumulator {
    /// Accumulates blocks of orders `lo..=hi` of a table, i.e. the
    /// `B^{s, hi - lo}` norm of `d_y^lo f`.
    pub fn new(s: f64, lo: usize, hi: usize, p: TimeExponent) -> Self {
        Self {
            s,
            lo,
            hi,
            p,
            acc: Vec::new(),
        }
    }

    pub fn for_spec(spec: BesovSpec, p: TimeExponent) -> Self {
        Self::new(spec.s, 0, spec.j, p)
    }

    /// Adds one time step: left-rectangle `dt * density * |block|^2` for
    /// `p = 2`, running maximum for `p = inf` (`dt`, `density` ignored).
    pub fn update(&mut self, table: &BlockTable, dt: f64, density: f64) {
        debug_assert!(dt >= 0.0 && density >= 0.0);
        if self.acc.is_empty() {
            self.acc = vec![vec![0.0; self.hi - self.lo + 1]; table.vals.len()];
        }
        for (a, v) in self.acc.iter_mut().zip(&table.vals) {
            for (ai, vi) in a.iter_mut().zip(&v[self.lo..=self.hi]) {
                match self.p {
                    TimeExponent::Two => *ai += dt * density * vi * vi,
                    TimeExponent::Inf => *ai = ai.max(*vi),
                }
            }
        }
    }

    /// Convenience wrapper computing the block table of `f` first.
    pub fn update_field(
        &mut self,
        f: &Field,
        w: &WeightProfile,
        radius: f64,
        dt: f64,
        density: f64,
    ) -> Result<()> {
        let part = DyadicPartition::for_grid(f.grid());
        let table = ModeEnergy::new(f, self.hi, w)?.block_table(&part, radius)?;
        self.update(&table, dt, density);
        Ok(())
    }

    pub fn value(&self) -> f64 {
        let k_min = -1;
        self.acc
            .iter()
            .enumerate()
            .map(|(kk, a)| {
                let k = kk as i32 + k_min;
                let inner: f64 = match self.p {
                    TimeExponent::Two => a.iter().map(|x| x.sqrt()).sum(),
                    TimeExponent::Inf => a.iter().sum(),
                };
                2f64.powf(k as f64 * self.s) * inner
            })
            .sum()
    }
}

/// Both sides of the weighted Hardy-type inequality
/// `int |d_y Psi f|^2 e^{2 Psi} <= C int |d_y f|^2 e^{2 Psi}`, with the
/// normalized tangential measure.
pub fn hardy_weight_check(f: &Field, w: &WeightProfile) -> Result<(f64, f64)> {
    let g = f.grid();
    let ew = w.exp_psi();
    let dpsi = w.dy_psi();
    let trap = g.trapezoid_weights();
    let df = d_dy_any(f, 1);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for ix in 0..g.nx() {
        let p = f.profile(ix);
        let dp = df.profile(ix);
        for jy in 0..g.ny() {
            let a = p[jy] * ew[jy];
            if !(a.abs() < OVERFLOW_THRESHOLD) {
                return Err(Error::InsufficientDecay {
                    row: jy,
                    value: a.abs(),
                });
            }
            lhs += trap[jy] * (dpsi[jy] * a).powi(2);
            rhs += trap[jy] * (dp[jy] * ew[jy]).powi(2);
        }
    }
    let n = g.nx() as f64;
    Ok((lhs / n, rhs / n))
}
