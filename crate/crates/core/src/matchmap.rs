//! The covariance matching map `f_C(A) = 1/2 [H A^* + A H^*]`, its
//! coordinates on `R^N`, its Jacobian, and the data homotopy.

use nalgebra::{DMatrix, DVector};

use crate::covdata::CovSequence;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matpoly::{
    ensure_conformable, sym_outer_unchecked, trunc_product_unchecked, MatPoly, PseudoPoly,
    LOWER_TRI_TOL,
};

/// `N = m(m+1)/2 + m^2 n`.
pub fn coord_len(m: usize, n: usize) -> usize {
    m * (m + 1) / 2 + m * m * n
}

/// Coordinates of a polynomial with lower-triangular `A_0`: the lower
/// triangle of `A_0` column by column, then `A_1..A_n` column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurCoords {
    pub m: usize,
    pub n: usize,
    pub x: DVector<f64>,
}

/// Coordinates of a pseudo-polynomial: lower triangle of `P_0` column by
/// column, then `P_1..P_n` column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCoords {
    pub m: usize,
    pub n: usize,
    pub r: DVector<f64>,
}

fn pack(m: usize, coeffs: &[DMatrix<f64>]) -> DVector<f64> {
    let n = coeffs.len() - 1;
    let mut x = Vec::with_capacity(coord_len(m, n));
    for j in 0..m {
        for i in j..m {
            x.push(coeffs[0][(i, j)]);
        }
    }
    for c in &coeffs[1..] {
        x.extend(c.iter());
    }
    DVector::from_vec(x)
}

fn unpack(m: usize, n: usize, x: &[f64]) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut a0 = DMatrix::zeros(m, m);
    let mut pos = 0;
    for j in 0..m {
        for i in j..m {
            a0[(i, j)] = x[pos];
            pos += 1;
        }
    }
    out.push(a0);
    for _ in 0..n {
        out.push(DMatrix::from_column_slice(m, m, &x[pos..pos + m * m]));
        pos += m * m;
    }
    out
}

pub fn vectorize(a: &MatPoly) -> Result<SchurCoords> {
    let upper = linalg::max_upper(a.coeff(0));
    if upper > LOWER_TRI_TOL {
        return Err(Error::NotLowerTriangular(upper));
    }
    let (m, n) = a.shape();
    Ok(SchurCoords {
        m,
        n,
        x: pack(m, a.coeffs()),
    })
}

pub fn devectorize(c: &SchurCoords) -> Result<MatPoly> {
    if c.x.len() != coord_len(c.m, c.n) {
        return Err(Error::DimensionMismatch(format!(
            "coordinate vector has length {}, expected {}",
            c.x.len(),
            coord_len(c.m, c.n)
        )));
    }
    MatPoly::new(unpack(c.m, c.n, c.x.as_slice()))
}

pub fn vectorize_pseudo(p: &PseudoPoly) -> ResidualCoords {
    let (m, n) = p.shape();
    ResidualCoords {
        m,
        n,
        r: pack(m, p.coeffs()),
    }
}

pub fn devectorize_pseudo(r: &ResidualCoords) -> Result<PseudoPoly> {
    if r.r.len() != coord_len(r.m, r.n) {
        return Err(Error::DimensionMismatch("residual coordinates".into()));
    }
    let mut c = unpack(r.m, r.n, r.r.as_slice());
    c[0] = &c[0] + c[0].transpose() - DMatrix::from_diagonal(&c[0].diagonal());
    PseudoPoly::new(c)
}

/// `f_C(A)`.
pub fn f_map(a: &MatPoly, data: &CovSequence) -> Result<PseudoPoly> {
    ensure_conformable(a.shape(), data.shape(), "f_map")?;
    let h = trunc_product_unchecked(a, data.coeffs());
    Ok(sym_outer_unchecked(&h, a))
}

/// `f_O(A) = A(z) A(z^{-1})^T`.
pub fn f_o(a: &MatPoly) -> PseudoPoly {
    crate::matpoly::poly_product_full(a)
}

/// Directional derivative of `f_C` at `A` along `V`:
/// `W = 1/2 [R A^* + H V^* + V H^* + A R^*]` with `R` the truncated
/// product of `V` with the data.
pub fn jacobian_apply(a: &MatPoly, v: &MatPoly, data: &CovSequence) -> Result<PseudoPoly> {
    ensure_conformable(a.shape(), data.shape(), "jacobian_apply")?;
    ensure_conformable(v.shape(), data.shape(), "jacobian_apply")?;
    let h = trunc_product_unchecked(a, data.coeffs());
    Ok(apply_with_h(a, &h, v, data))
}

fn apply_with_h(a: &MatPoly, h: &MatPoly, v: &MatPoly, data: &CovSequence) -> PseudoPoly {
    let r = trunc_product_unchecked(v, data.coeffs());
    let w1 = sym_outer_unchecked(&r, a);
    let w2 = sym_outer_unchecked(h, v);
    w1.axpy(1.0, &w2)
}

/// The `N x N` Jacobian of `f_C` in Schur/residual coordinates, assembled
/// column by column from [`jacobian_apply`] on basis directions.
pub fn jacobian_matrix(a: &MatPoly, data: &CovSequence) -> Result<DMatrix<f64>> {
    ensure_conformable(a.shape(), data.shape(), "jacobian_matrix")?;
    let (m, n) = a.shape();
    let len = coord_len(m, n);
    let h = trunc_product_unchecked(a, data.coeffs());
    let mut jac = DMatrix::zeros(len, len);
    let mut e = vec![0.0; len];
    for j in 0..len {
        e[j] = 1.0;
        let v = MatPoly::new(unpack(m, n, &e))?;
        e[j] = 0.0;
        let w = apply_with_h(a, &h, &v, data);
        jac.set_column(j, &vectorize_pseudo(&w).r);
    }
    Ok(jac)
}

/// Central-difference Jacobian of `f_C`, used as an independent check of
/// [`jacobian_matrix`]. The step is `step_rel * (1 + |x|)`.
pub fn jacobian_fd(a: &MatPoly, data: &CovSequence, step_rel: f64) -> Result<DMatrix<f64>> {
    let base = vectorize(a)?;
    let len = base.x.len();
    let h = step_rel * (1.0 + base.x.norm());
    let mut jac = DMatrix::zeros(len, len);
    for j in 0..len {
        let mut plus = base.clone();
        plus.x[j] += h;
        let mut minus = base.clone();
        minus.x[j] -= h;
        let fp = vectorize_pseudo(&f_map(&devectorize(&plus)?, data)?).r;
        let fm = vectorize_pseudo(&f_map(&devectorize(&minus)?, data)?).r;
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    Ok(jac)
}

/// Max relative deviation `|J - J_fd|_max / max(1, |J|_max)`.
pub fn jacobian_fd_deviation(a: &MatPoly, data: &CovSequence) -> Result<f64> {
    let j = jacobian_matrix(a, data)?;
    let fd = jacobian_fd(a, data, 1e-6)?;
    Ok((&j - fd).amax() / j.amax().max(1.0))
}

/// `F(A, t) = f_{Sigma(t)}(A)` with `Sigma(t) = t C + (1 - t) O`.
pub fn homotopy_map(a: &MatPoly, data: &CovSequence, t: f64) -> Result<PseudoPoly> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    f_map(a, &data.blend(t))
}

/// `dF/dt = f_C(A) - f_O(A)`, exact since `f` is linear in the data.
pub fn homotopy_dt(a: &MatPoly, data: &CovSequence) -> Result<PseudoPoly> {
    Ok(f_map(a, data)?.axpy(-1.0, &f_o(a)))
}
