//! Finite-difference weights and the banded linear solver used by the
//! implicit normal-diffusion step.

/// Fornberg's recursion: weights for derivatives `0..=max_order` at `x0`
/// from values at `nodes`. Returned as `w[order][node]`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A stencil anchored at `start`: `sum_i w[i] * f[start + i]`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    #[inline]
    pub fn apply(&self, f: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&f[self.start..self.start + self.weights.len()])
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Fourth-order stencils for derivative `order` (1..=4) at every node.
///
/// Interior nodes get the centered stencil (5 points for orders 1 and 2,
/// 7 points for orders 3 and 4); nodes too close to an end get a one-sided window
/// of `order + 4` points, which keeps fourth-order accuracy.
pub fn derivative_stencils(nodes: &[f64], order: usize) -> Vec<Stencil> {
    assert!((1..=4).contains(&order));
    let n = nodes.len();
    let half = if order >= 3 { 3 } else { 2 };
    let edge = order + 4;
    (0..n)
        .map(|j| {
            let (start, len) = if j >= half && j + half < n {
                (j - half, 2 * half + 1)
            } else {
                let start = j.saturating_sub(edge / 2).min(n - edge);
                (start, edge)
            };
            let w = fornberg_weights(nodes[j], &nodes[start..start + len], order);
            Stencil {
                start,
                weights: w[order].clone(),
            }
        })
        .collect()
}

/// Banded matrix with LU factorization by partial pivoting.
///
/// Storage is row-oriented: row `i` keeps columns `i - kl ..= i + ku + kl`,
/// the extra `kl` upper diagonals absorbing fill-in from row swaps.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
            factored: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i},{j}) outside band"
        );
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// In-place LU with partial pivoting. Returns false on an exactly
    /// singular pivot.
    pub fn factor(&mut self) -> bool {
        let n = self.n;
        let kl = self.kl;
        let hi = self.ku + self.kl;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.pivots[k] = p;
            if best == 0.0 {
                return false;
            }
            let col_end = (k + hi).min(n - 1);
            if p != k {
                for j in k..=col_end {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let s = self.slot(i, k);
                let l = self.data[s] / pivot;
                self.data[s] = l;
                if l != 0.0 {
                    for j in k + 1..=col_end {
                        let src = self.data[self.slot(k, j)];
                        let dst = self.slot(i, j);
                        self.data[dst] -= l * src;
                    }
                }
            }
        }
        self.factored = true;
        true
    }

    /// Solves in place after `factor`.
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored, "solve before factor");
        let n = self.n;
        let kl = self.kl;
        let hi = self.ku + self.kl;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            let bk = b[k];
            for i in k + 1..=last {
                b[i] -= self.data[self.slot(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let col_end = (k + hi).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=col_end {
                s -= self.data[self.slot(k, j)] * b[j];
            }
            b[k] = s / self.data[self.slot(k, k)];
        }
    }
}
