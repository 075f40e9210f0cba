//! Dense complex linear algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn diag(d: &[C64]) -> Mat {
    Mat::from_diagonal(&Vector::from_column_slice(d))
}

pub fn diag_real(d: &[f64]) -> Mat {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { c(d[i]) } else { ZERO })
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Entrywise max difference.
pub fn dist(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_diagonal(m: &Mat, tol: f64) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j && m[(i, j)].norm() > tol {
                return false;
            }
        }
    }
    true
}

/// `a·b` over the nonzero entries of both factors.
pub fn spmul(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.nrows(), "shape mismatch");
    let cols: Vec<Vec<(usize, C64)>> = (0..a.ncols())
        .map(|k| a.column(k).iter().enumerate().filter(|(_, x)| **x != ZERO).map(|(i, x)| (i, *x)).collect())
        .collect();
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for (k, col) in cols.iter().enumerate() {
            let v = b[(k, j)];
            if v != ZERO {
                for &(i, x) in col {
                    out[(i, j)] += x * v;
                }
            }
        }
    }
    out
}

/// Column-compressed matrix; rows within a column are sorted and distinct.
#[derive(Debug, Clone)]
pub struct SparseCols {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, C64)>>,
}

impl SparseCols {
    pub fn from_dense(m: &Mat) -> Self {
        let cols = (0..m.ncols())
            .map(|k| m.column(k).iter().enumerate().filter(|(_, x)| **x != ZERO).map(|(i, x)| (i, *x)).collect())
            .collect();
        SparseCols { rows: m.nrows(), cols }
    }

    /// Builds from unsorted column entries, summing duplicates.
    pub fn from_columns(rows: usize, raw: Vec<Vec<(usize, C64)>>) -> Self {
        let cols = raw
            .into_iter()
            .map(|mut col| {
                col.sort_by_key(|e| e.0);
                let mut out: Vec<(usize, C64)> = Vec::with_capacity(col.len());
                for (i, v) in col {
                    match out.last_mut() {
                        Some(last) if last.0 == i => last.1 += v,
                        _ => out.push((i, v)),
                    }
                }
                out
            })
            .collect();
        SparseCols { rows, cols }
    }

    /// `self · other`.
    pub fn mul(&self, other: &SparseCols) -> SparseCols {
        assert_eq!(self.cols.len(), other.rows, "shape mismatch");
        let raw = other
            .cols
            .iter()
            .map(|col| col.iter().flat_map(|&(k, v)| self.cols[k].iter().map(move |&(i, x)| (i, x * v))).collect())
            .collect();
        SparseCols::from_columns(self.rows, raw)
    }

    /// Largest entrywise difference.
    pub fn dist(&self, other: &SparseCols) -> f64 {
        assert_eq!(self.cols.len(), other.cols.len(), "shape mismatch");
        let mut worst: f64 = 0.0;
        for (a, b) in self.cols.iter().zip(&other.cols) {
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let d = match (a.get(i), b.get(j)) {
                    (Some(x), Some(y)) if x.0 == y.0 => {
                        i += 1;
                        j += 1;
                        x.1 - y.1
                    }
                    (Some(x), Some(y)) if x.0 < y.0 => {
                        i += 1;
                        x.1
                    }
                    (Some(x), None) => {
                        i += 1;
                        x.1
                    }
                    (_, Some(y)) => {
                        j += 1;
                        y.1
                    }
                    (None, None) => unreachable!(),
                };
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Frobenius inner product `tr(self* other)`.
    pub fn inner(&self, other: &SparseCols) -> C64 {
        let mut acc = ZERO;
        for (a, b) in self.cols.iter().zip(&other.cols) {
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].0.cmp(&b[j].0) {
                    std::cmp::Ordering::Equal => {
                        acc += a[i].1.conj() * b[j].1;
                        i += 1;
                        j += 1;
                    }
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                }
            }
        }
        acc
    }
}

/// `max |ab − ba|` over entries.
pub fn sparse_commutator_norm(a: &SparseCols, b: &SparseCols) -> f64 {
    a.mul(b).dist(&b.mul(a))
}

/// Numerical rank of a family of sparse matrices from its Frobenius Gram matrix.
pub fn sparse_span_rank(mats: &[SparseCols], tol: f64) -> usize {
    let k = mats.len();
    let gram = Mat::from_fn(k, k, |i, j| mats[i].inner(&mats[j]));
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    eig.eigenvalues.iter().filter(|&&v| v > tol * tol * top.max(1e-300)).count()
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    spmul(a, b) - spmul(b, a)
}

/// Frobenius inner product `tr(a* b)`.
pub fn inner(a: &Mat, b: &Mat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal basis (Frobenius inner product) of the span of `mats`, by Gram–Schmidt with
/// one reorthogonalization pass. Vectors whose residual falls below `tol·scale` are dropped.
pub fn span_basis(mats: &[Mat], tol: f64) -> Vec<Mat> {
    let scale = mats.iter().map(|m| m.norm()).fold(0.0, f64::max).max(1e-300);
    let mut basis: Vec<Mat> = Vec::new();
    for m in mats {
        let mut v = m.clone();
        for _ in 0..2 {
            for b in &basis {
                let p = inner(b, &v);
                v -= b * p;
            }
        }
        let nv = v.norm();
        if nv > tol * scale {
            basis.push(v / c(nv));
        }
    }
    basis
}

/// Distance from `m` to the span of an orthonormal basis (Frobenius norm of the residual).
pub fn span_residual(basis: &[Mat], m: &Mat) -> f64 {
    let mut v = m.clone();
    for _ in 0..2 {
        for b in basis {
            let p = inner(b, &v);
            v -= b * p;
        }
    }
    v.norm()
}

/// Coefficients `x` minimizing `‖Σ x_k mats[k] − target‖`, plus the residual norm.
pub fn least_squares(mats: &[Mat], target: &Mat) -> (Vec<C64>, f64) {
    let k = mats.len();
    let mut gram = Mat::zeros(k, k);
    let mut rhs = Vector::zeros(k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = inner(&mats[i], &mats[j]);
        }
        rhs[i] = inner(&mats[i], target);
    }
    let x = pseudo_solve(&gram, &rhs);
    let mut fit = Mat::zeros(target.nrows(), target.ncols());
    for (i, m) in mats.iter().enumerate() {
        fit += m * x[i];
    }
    let res = (fit - target).norm();
    (x.iter().copied().collect(), res)
}

/// Solves a Hermitian positive semidefinite system through its eigendecomposition.
pub fn pseudo_solve(a: &Mat, b: &Vector) -> Vector {
    let eig = a.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = Vector::zeros(b.len());
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > 1e-12 * top.max(1e-300) {
            let u = eig.eigenvectors.column(i);
            let coef = u.dotc(b) / c(lam);
            x += u * coef;
        }
    }
    x
}

/// Null space of `a`: eigenvectors of `a*a` with singular value below `tol·σ_max`.
pub fn null_space(a: &Mat, tol: f64) -> Vec<Vector> {
    let gram = a.adjoint() * a;
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v)).max(1.0).sqrt();
    (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i].max(0.0).sqrt() <= tol * top)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

/// Basis of `{Y : Y G = G Y for all G in gens}` on `C^n`. Diagonal generators are used first
/// to restrict the admissible pattern of `Y`.
pub fn commutant(gens: &[Mat], n: usize, tol: f64) -> Vec<Mat> {
    let mut allowed: Vec<(usize, usize)> = Vec::new();
    let (diags, others): (Vec<&Mat>, Vec<&Mat>) = gens.iter().partition(|g| is_diagonal(g, 0.0));
    for i in 0..n {
        for j in 0..n {
            if diags.iter().all(|d| (d[(i, i)] - d[(j, j)]).norm() <= tol) {
                allowed.push((i, j));
            }
        }
    }
    if others.is_empty() {
        return allowed.iter().map(|&(i, j)| unit_matrix(n, i, j)).collect();
    }
    let rows = others.len() * n * n;
    let mut a = Mat::zeros(rows, allowed.len());
    for (col, &(i, j)) in allowed.iter().enumerate() {
        let e = unit_matrix(n, i, j);
        for (k, g) in others.iter().enumerate() {
            let cm = commutator(&e, g);
            for (t, z) in cm.iter().enumerate() {
                a[(k * n * n + t, col)] = *z;
            }
        }
    }
    null_space(&a, tol)
        .into_iter()
        .map(|v| {
            let mut y = Mat::zeros(n, n);
            for (col, &(i, j)) in allowed.iter().enumerate() {
                y[(i, j)] = v[col];
            }
            y
        })
        .collect()
}

pub fn unit_matrix(n: usize, i: usize, j: usize) -> Mat {
    let mut e = Mat::zeros(n, n);
    e[(i, j)] = ONE;
    e
}

/// Dimension of the intersection of two spans: `dim A + dim B − dim(A + B)`.
pub fn intersection_dim(a: &[Mat], b: &[Mat], tol: f64) -> usize {
    let da = span_basis(a, tol).len();
    let db = span_basis(b, tol).len();
    let all: Vec<Mat> = a.iter().chain(b.iter()).cloned().collect();
    let dab = span_basis(&all, tol).len();
    da + db - dab
}

/// `H^{it}` for a positive definite Hermitian `H`.
pub fn hermitian_power_it(h: &Mat, t: f64) -> Mat {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut out = Mat::zeros(n, n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, t * lam.ln());
        let u = eig.eigenvectors.column(i);
        out += u * u.adjoint() * phase;
    }
    out
}

pub fn min_eigenvalue(h: &Mat) -> f64 {
    let herm = (h + h.adjoint()) * c(0.5);
    herm.symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_and_intersection() {
        let a = vec![unit_matrix(2, 0, 0), unit_matrix(2, 1, 1), unit_matrix(2, 0, 0) * c(3.0)];
        assert_eq!(span_basis(&a, 1e-10).len(), 2);
        let b = vec![Mat::identity(2, 2), unit_matrix(2, 0, 1)];
        assert_eq!(intersection_dim(&a, &b, 1e-10), 1);
    }

    #[test]
    fn commutant_of_full_matrix_algebra_is_scalars() {
        let gens = vec![unit_matrix(3, 0, 0), unit_matrix(3, 1, 1), unit_matrix(3, 0, 1) + unit_matrix(3, 1, 2)];
        let cm = commutant(&gens, 3, 1e-10);
        assert_eq!(cm.len(), 1);
        let y = &cm[0];
        assert!((y[(0, 0)] - y[(2, 2)]).norm() < 1e-10);
    }

    #[test]
    fn power_it_of_diagonal() {
        let h = diag_real(&[2.0, 0.5]);
        let p = hermitian_power_it(&h, 0.7);
        assert!((p[(0, 0)] - C64::from_polar(1.0, 0.7 * 2f64.ln())).norm() < 1e-12);
    }

    #[test]
    fn least_squares_recovers_coefficients() {
        let mats = vec![unit_matrix(2, 0, 0), unit_matrix(2, 0, 1)];
        let target = unit_matrix(2, 0, 0) * c(2.0) - unit_matrix(2, 0, 1);
        let (x, res) = least_squares(&mats, &target);
        assert!(res < 1e-12);
        assert!((x[0] - c(2.0)).norm() < 1e-12 && (x[1] + c(1.0)).norm() < 1e-12);
    }
}
