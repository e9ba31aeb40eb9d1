//! LU factorization of a shifted upper Hessenberg matrix with adjacent-row
//! partial pivoting. Solves with the matrix and with its (non-conjugated)
//! transpose, which is what inverse iteration for right and left eigenvectors
//! needs.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex;

type C64 = Complex<f64>;

pub(crate) struct ShiftedHessenbergLu {
    n: usize,
    /// Upper triangle, row-major.
    u: Vec<C64>,
    multipliers: Vec<C64>,
    swapped: Vec<bool>,
}

impl ShiftedHessenbergLu {
    /// Factors `h - shift * I`. Pivots smaller than `tiny` are replaced by
    /// `tiny`, which keeps inverse iteration well defined at an exact eigenvalue.
    pub(crate) fn new(h: &DMatrix<f64>, shift: C64, tiny: f64) -> Self {
        let n = h.nrows();
        let mut u = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                u[i * n + j] = C64::new(h[(i, j)], 0.0);
            }
            u[i * n + i] -= shift;
        }
        let mut multipliers = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            if u[(k + 1) * n + k].norm() > u[k * n + k].norm() {
                for j in k..n {
                    u.swap(k * n + j, (k + 1) * n + j);
                }
                swapped[k] = true;
            }
            if u[k * n + k].norm() < tiny {
                u[k * n + k] = C64::new(tiny, 0.0);
            }
            let l = u[(k + 1) * n + k] / u[k * n + k];
            u[(k + 1) * n + k] = C64::new(0.0, 0.0);
            for j in k + 1..n {
                let ukj = u[k * n + j];
                u[(k + 1) * n + j] -= l * ukj;
            }
            multipliers[k] = l;
        }
        if n > 0 && u[(n - 1) * n + n - 1].norm() < tiny {
            u[(n - 1) * n + n - 1] = C64::new(tiny, 0.0);
        }
        Self {
            n,
            u,
            multipliers,
            swapped,
        }
    }

    /// Overwrites `b` with `(h - shift)^{-1} b`.
    pub(crate) fn solve(&self, b: &mut [C64]) {
        let n = self.n;
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
            let bk = b[k];
            b[k + 1] -= self.multipliers[k] * bk;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.u[i * n + j] * b[j];
            }
            b[i] = s / self.u[i * n + i];
        }
    }

    /// Overwrites `b` with `(h - shift)^{-T} b`.
    pub(crate) fn solve_transpose(&self, b: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.u[j * n + i] * b[j];
            }
            b[i] = s / self.u[i * n + i];
        }
        for k in (0..n.saturating_sub(1)).rev() {
            let next = b[k + 1];
            b[k] -= self.multipliers[k] * next;
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
        }
    }
}
