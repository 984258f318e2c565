//! Sparse symmetric matrices, conjugate gradients and a Lanczos solver for
//! the smallest eigenpair.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    /// D A D for a diagonal D.
    pub fn scaled_symmetric(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.vals[k] *= d[i] * d[self.cols[k]];
            }
        }
        out
    }

    /// Upper bound on the spectral radius (Gershgorin).
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for SPD systems, starting from
/// `x`. Returns the iteration count.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<usize> {
    let n = a.dim();
    let diag = a.diagonal();
    let mut ax = vec![0.0; n];
    a.mul_vec(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let precond = |r: &[f64]| -> Vec<f64> { r.iter().zip(&diag).map(|(r, d)| r / d).collect() };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        if norm(&r) <= rel_tol * bnorm {
            return Ok(it);
        }
        a.mul_vec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if norm(&r) <= rel_tol * bnorm {
        Ok(max_iter)
    } else {
        Err(Error::EigenConvergence(norm(&r) / bnorm))
    }
}

/// Lowest eigenpairs from the solver.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// ‖A v − λ v‖₂ with ‖v‖₂ = 1.
    pub residual: f64,
    /// Lowest Ritz values of the final Krylov space, ascending.
    pub spectrum: Vec<f64>,
}

/// Smallest eigenpair of a symmetric matrix by Lanczos with full
/// reorthogonalization and explicit restarts on the current Ritz vector.
pub fn lanczos_smallest(a: &CsrMatrix, tol: f64, krylov_dim: usize, max_restarts: usize) -> Result<Eigenpair> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::domain("empty operator"));
    }
    let m = krylov_dim.min(n).max(1);
    // deterministic, non-symmetric start
    let mut start: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.618_033_988_75).fract()).collect();
    let mut best = None;
    for _ in 0..=max_restarts {
        let s = norm(&start);
        start.iter_mut().for_each(|x| *x /= s);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![0.0; n];
        for j in 0..m {
            a.mul_vec(&basis[j], &mut w);
            alpha.push(dot(&w, &basis[j]));
            // two passes of Gram–Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let b = norm(&w);
            if j + 1 == m || b <= 1e-14 * alpha[j].abs().max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let i0 = order[0];
        let theta = eig.eigenvalues[i0];
        let mut y = vec![0.0; n];
        for (c, q) in eig.eigenvectors.column(i0).iter().zip(&basis) {
            y.iter_mut().zip(q).for_each(|(yi, qi)| *yi += c * qi);
        }
        let s = norm(&y);
        y.iter_mut().for_each(|x| *x /= s);
        a.mul_vec(&y, &mut w);
        let residual = norm(&w.iter().zip(&y).map(|(ay, y)| ay - theta * y).collect::<Vec<_>>());
        let spectrum = order.iter().take(6).map(|&i| eig.eigenvalues[i]).collect();
        let pair = Eigenpair {
            value: theta,
            vector: y.clone(),
            residual,
            spectrum,
        };
        let done = residual < tol;
        best = Some(pair);
        if done {
            break;
        }
        start = y;
    }
    let pair = best.unwrap();
    if pair.residual < tol {
        Ok(pair)
    } else {
        Err(Error::EigenConvergence(pair.residual))
    }
}

/// Dense reference for small problems.
pub fn dense_smallest(a: &CsrMatrix) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(a.to_dense());
    let i = eig.eigenvalues.imin();
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift * (i as f64 / n as f64)));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]);
        let mut y = [0.0; 2];
        a.mul_vec(&[1.0, 1.0], &mut y);
        assert_eq!(y, [3.0, 4.0]);
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = path_laplacian(50, 1.0);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 50];
        conjugate_gradient(&a, &b, &mut x, 1e-12, 500).unwrap();
        let mut ax = vec![0.0; 50];
        a.mul_vec(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn lanczos_matches_dense_oracle() {
        let a = path_laplacian(300, -3.0);
        let pair = lanczos_smallest(&a, 1e-9, 120, 200).unwrap();
        let (value, vector) = dense_smallest(&a);
        assert!((pair.value - value).abs() < 1e-9);
        let overlap: f64 = pair.vector.iter().zip(vector.iter()).map(|(x, y)| x * y).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-8);
    }
}
