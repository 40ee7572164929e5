//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, LU};
use num_complex::Complex64;

/// Largest absolute entry strictly above the diagonal.
pub fn max_upper(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..j.min(a.nrows()) {
            worst = worst.max(a[(i, j)].abs());
        }
    }
    worst
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).amax()
}

pub fn all_finite(a: &DMatrix<f64>) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Lower Cholesky factor with positive diagonal, `None` if `a` is not
/// numerically positive definite.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(symmetrize(a)).map(|c| c.unpack())
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenvalue of a Hermitian matrix, computed through its real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`.
pub fn hermitian_min_eig(h: &DMatrix<Complex64>) -> f64 {
    let m = h.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = h[(i, j)];
            big[(i, j)] = z.re;
            big[(i + m, j + m)] = z.re;
            big[(i, j + m)] = -z.im;
            big[(i + m, j)] = z.im;
        }
    }
    sym_eigenvalues(&big)[0]
}

pub fn complexify(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn lower_inverse(l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = l.nrows();
    if (0..n).any(|i| l[(i, i)] == 0.0) {
        return None;
    }
    l.solve_lower_triangular(&DMatrix::identity(n, n))
}

/// Factored square system: solution plus the sign of the determinant.
pub struct Factored {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factored {
    pub fn new(a: DMatrix<f64>) -> Self {
        Self { lu: LU::new(a) }
    }

    pub fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let x = self.lu.solve(b)?;
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// Sign of the determinant: +1, -1, or 0 for an exactly singular factor.
    pub fn det_sign(&self) -> i8 {
        let u = self.lu.u();
        let mut sign = self.lu.p().determinant::<f64>();
        for i in 0..u.nrows() {
            let d = u[(i, i)];
            if d == 0.0 {
                return 0;
            }
            if d < 0.0 {
                sign = -sign;
            }
        }
        if sign > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `out += alpha * a * b^T`.
pub fn add_abt(out: &mut DMatrix<f64>, alpha: f64, a: &DMatrix<f64>, b: &DMatrix<f64>) {
    let (r, c, inner) = (a.nrows(), b.nrows(), a.ncols());
    for j in 0..c {
        for i in 0..r {
            let mut s = 0.0;
            for k in 0..inner {
                s += a[(i, k)] * b[(j, k)];
            }
            out[(i, j)] += alpha * s;
        }
    }
}

/// Frobenius norm of a sequence of matrices viewed as one long vector.
pub fn seq_norm(mats: &[DMatrix<f64>]) -> f64 {
    mats.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}
