//! Direct solvers for the structured systems produced by the finite-volume
//! discretizations: scalar tridiagonal, 2x2 block tridiagonal and banded LU.

use crate::error::{Error, Result};

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting: callers pass
/// diagonally dominant (M-matrix) systems.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Singular(0));
    }
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular(i));
        }
        c[i] = upper[i] / beta;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// 2x2 block, row-major `[a00, a01, a10, a11]`.
pub type Block2 = [f64; 4];

fn block_mul(a: &Block2, b: &Block2) -> Block2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn block_vec(a: &Block2, v: [f64; 2]) -> [f64; 2] {
    [a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]]
}

fn block_inv(a: &Block2) -> Option<Block2> {
    let det = a[0] * a[3] - a[1] * a[2];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([a[3] / det, -a[1] / det, -a[2] / det, a[0] / det])
}

/// Block Thomas algorithm for a tridiagonal system of 2x2 blocks.
pub fn solve_block_tridiagonal(
    lower: &[Block2],
    diag: &[Block2],
    upper: &[Block2],
    rhs: &[[f64; 2]],
) -> Result<Vec<[f64; 2]>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c: Vec<Block2> = vec![[0.0; 4]; n];
    let mut d: Vec<[f64; 2]> = vec![[0.0; 2]; n];
    let inv = block_inv(&diag[0]).ok_or(Error::Singular(0))?;
    c[0] = block_mul(&inv, &upper[0]);
    d[0] = block_vec(&inv, rhs[0]);
    for i in 1..n {
        let lc = block_mul(&lower[i], &c[i - 1]);
        let m = [
            diag[i][0] - lc[0],
            diag[i][1] - lc[1],
            diag[i][2] - lc[2],
            diag[i][3] - lc[3],
        ];
        let inv = block_inv(&m).ok_or(Error::Singular(i))?;
        c[i] = block_mul(&inv, &upper[i]);
        let ld = block_vec(&lower[i], d[i - 1]);
        d[i] = block_vec(&inv, [rhs[i][0] - ld[0], rhs[i][1] - ld[1]]);
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let cx = block_vec(&c[i], x[i + 1]);
        x[i] = [x[i][0] - cx[0], x[i][1] - cx[1]];
    }
    Ok(x)
}

/// Square banded matrix with equal lower and upper bandwidth, stored by rows.
///
/// Entry `(i, j)` with `|i - j| <= bw` lives at `data[i * (2 bw + 1) + (j + bw - i)]`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (2 * bw + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bw, "({i}, {j}) outside band {}", self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let w = 2 * self.bw + 1;
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                let row = &self.data[i * w..(i + 1) * w];
                (lo..=hi).map(|j| row[j + self.bw - i] * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization without pivoting followed by a solve.
    /// Consumes the matrix storage.
    pub fn solve_in_place(mut self, rhs: &mut [f64]) -> Result<()> {
        let n = self.n;
        let bw = self.bw;
        let w = 2 * bw + 1;
        for k in 0..n {
            let pivot = self.data[k * w + bw];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Singular(k));
            }
            let hi = (k + bw).min(n - 1);
            for i in k + 1..=hi {
                let ik = i * w + (k + bw - i);
                let factor = self.data[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[ik] = factor;
                // row i, columns k+1..=hi: offset (j + bw - i)
                let (head, tail) = self.data.split_at_mut(i * w);
                let krow = &head[k * w..k * w + w];
                let irow = &mut tail[..w];
                for j in k + 1..=hi {
                    irow[j + bw - i] -= factor * krow[j + bw - k];
                }
                rhs[i] -= factor * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let hi = (k + bw).min(n - 1);
            let row = &self.data[k * w..k * w + w];
            let mut s = rhs[k];
            for j in k + 1..=hi {
                s -= row[j + bw - k] * rhs[j];
            }
            rhs[k] = s / row[bw];
        }
        Ok(())
    }
}

/// Bernoulli function `x / (e^x - 1)`, the weight of exponentially fitted
/// (Scharfetter-Gummel) two-point fluxes.
pub fn bernoulli(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x / x.exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense_solution() {
        // -x'' = 1 on 5 interior nodes, h = 1
        let n = 5;
        let lower = vec![-1.0; n];
        let diag = vec![2.0; n];
        let upper = vec![-1.0; n];
        let rhs = vec![1.0; n];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        // exact: x_i = i (n + 1 - i) / 2 for i = 1..n
        for (i, xi) in x.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!((xi - k * (n as f64 + 1.0 - k) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_reports_singular_pivot() {
        let r = solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::Singular(0))));
    }

    #[test]
    fn block_tridiagonal_decoupled_blocks_reduce_to_scalar() {
        let n = 6;
        let lower = vec![[-1.0, 0.0, 0.0, -2.0]; n];
        let diag = vec![[3.0, 0.0, 0.0, 5.0]; n];
        let upper = vec![[-1.0, 0.0, 0.0, -2.0]; n];
        let rhs: Vec<[f64; 2]> = (0..n).map(|i| [i as f64, 1.0 - i as f64]).collect();
        let x = solve_block_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        let a = solve_tridiagonal(&vec![-1.0; n], &vec![3.0; n], &vec![-1.0; n], &rhs.iter().map(|r| r[0]).collect::<Vec<_>>()).unwrap();
        let b = solve_tridiagonal(&vec![-2.0; n], &vec![5.0; n], &vec![-2.0; n], &rhs.iter().map(|r| r[1]).collect::<Vec<_>>()).unwrap();
        for i in 0..n {
            assert!((x[i][0] - a[i]).abs() < 1e-12);
            assert!((x[i][1] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn band_lu_solves_2d_laplacian() {
        // 5-point Laplacian on a 7x4 grid with Dirichlet zero boundary, ordering i * ny + j
        let (nx, ny) = (7usize, 4usize);
        let n = nx * ny;
        let mut a = BandMatrix::zeros(n, ny);
        for i in 0..nx {
            for j in 0..ny {
                let k = i * ny + j;
                a.add(k, k, 4.0);
                if i > 0 {
                    a.add(k, k - ny, -1.0);
                }
                if i + 1 < nx {
                    a.add(k, k + ny, -1.0);
                }
                if j > 0 {
                    a.add(k, k - 1, -1.0);
                }
                if j + 1 < ny {
                    a.add(k, k + 1, -1.0);
                }
            }
        }
        let x_true: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x_true);
        a.solve_in_place(&mut b).unwrap();
        for (x, t) in b.iter().zip(&x_true) {
            assert!((x - t).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_limits() {
        assert_eq!(bernoulli(0.0), 1.0);
        assert!((bernoulli(1e-9) - (1.0 - 0.5e-9)).abs() < 1e-15);
        assert!((bernoulli(-2.0) - bernoulli(2.0) - 2.0).abs() < 1e-14);
        assert_eq!(bernoulli(800.0), 0.0);
        assert!((bernoulli(-800.0) - 800.0).abs() < 1e-12);
    }
}
