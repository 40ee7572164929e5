//! Covariance data: block-Toeplitz assembly, positivity, the `U_C` matrix
//! and normalization to `C_0 = I`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matpoly::{MatPoly, PseudoPoly};

/// Covariance matrices `C_0..C_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovSequence {
    m: usize,
    coeffs: Vec<DMatrix<f64>>,
}

impl CovSequence {
    /// Validates shapes and finiteness; `C_0` is replaced by its symmetric part.
    pub fn new(mut coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("covariance sequence is empty".into()))?;
        let m = first.nrows();
        if m == 0 {
            return Err(Error::InvalidInput("covariances have dimension 0".into()));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.nrows() != m || c.ncols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "C_{k} is {}x{}, expected {m}x{m}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            if !linalg::all_finite(c) {
                return Err(Error::InvalidInput(format!("C_{k} has non-finite entries")));
            }
        }
        let asym = linalg::asymmetry(&coeffs[0]);
        if asym > 1e-8 {
            log::warn!("C_0 asymmetric by {asym:e}; using its symmetric part");
        }
        coeffs[0] = linalg::symmetrize(&coeffs[0]);
        Ok(Self { m, coeffs })
    }

    pub fn from_scalars(c: &[f64]) -> Result<Self> {
        Self::new(c.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect())
    }

    /// The data `(I, 0, ..., 0)`, for which the matching map is `A A^*`.
    pub fn identity(m: usize, n: usize) -> Self {
        let mut coeffs = vec![DMatrix::zeros(m, m); n + 1];
        coeffs[0] = DMatrix::identity(m, m);
        Self { m, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.order())
    }

    pub fn coeff(&self, k: usize) -> &DMatrix<f64> {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// `t C + (1 - t) O` with `O = (I, 0, ..., 0)`.
    pub fn blend(&self, t: f64) -> Self {
        let id = DMatrix::<f64>::identity(self.m, self.m);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == 0 {
                    c * t + &id * (1.0 - t)
                } else {
                    c * t
                }
            })
            .collect();
        Self { m: self.m, coeffs }
    }

    /// Congruence `C_k -> L C_k L^T`, the inverse of [`normalize`].
    pub fn congruence(&self, l: &DMatrix<f64>) -> Self {
        let mut coeffs: Vec<_> = self.coeffs.iter().map(|c| l * c * l.transpose()).collect();
        coeffs[0] = linalg::symmetrize(&coeffs[0]);
        Self { m: self.m, coeffs }
    }
}

/// Spectrum summary of `T_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToeplitzReport {
    pub lambda_min: f64,
    pub is_pd: bool,
    pub chol_ok: bool,
}

/// `T_n` with block `(i, j)` equal to `C_{j-i}` above the diagonal and
/// `C_{i-j}^T` below it.
pub fn build_toeplitz(data: &CovSequence) -> DMatrix<f64> {
    let (m, n) = data.shape();
    let size = (n + 1) * m;
    let mut t = DMatrix::zeros(size, size);
    for i in 0..=n {
        for j in i..=n {
            let c = &data.coeffs[j - i];
            t.view_mut((i * m, j * m), (m, m)).copy_from(c);
            if i != j {
                t.view_mut((j * m, i * m), (m, m)).copy_from(&c.transpose());
            }
        }
    }
    t
}

/// Positive-definiteness verdict, relative to the spectral norm of `T_n`.
pub fn check_pd(data: &CovSequence) -> ToeplitzReport {
    let t = build_toeplitz(data);
    let ev = linalg::sym_eigenvalues(&t);
    let lambda_min = ev[0];
    let norm = ev.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    ToeplitzReport {
        lambda_min,
        is_pd: lambda_min > 1e-12 * norm,
        chol_ok: linalg::cholesky_lower(&t).is_some(),
    }
}

/// Block upper-triangular Toeplitz `U_C`: `C_0` on the diagonal and `2 C_k`
/// on the `k`-th block super-diagonal.
pub fn build_u(data: &CovSequence) -> DMatrix<f64> {
    let (m, n) = data.shape();
    let size = (n + 1) * m;
    let mut u = DMatrix::zeros(size, size);
    for i in 0..=n {
        for j in i..=n {
            let w = if i == j { 1.0 } else { 2.0 };
            u.view_mut((i * m, j * m), (m, m))
                .copy_from(&(&data.coeffs[j - i] * w));
        }
    }
    u
}

/// Returns `(C~, L)` with `C~_k = L^{-1} C_k L^{-T}` and `L` the Cholesky
/// factor of `C_0`; `C~_0` is exactly the identity.
pub fn normalize(data: &CovSequence) -> Result<(CovSequence, DMatrix<f64>)> {
    let m = data.dim();
    let l = linalg::cholesky_lower(&data.coeffs[0]).ok_or(Error::C0NotPd)?;
    let linv = linalg::lower_inverse(&l).ok_or(Error::C0NotPd)?;
    let mut coeffs: Vec<_> = data
        .coeffs
        .iter()
        .map(|c| &linv * c * linv.transpose())
        .collect();
    coeffs[0] = DMatrix::identity(m, m);
    Ok((CovSequence { m, coeffs }, l))
}

/// `A(z) = A~(z) L^{-1}`.
pub fn denormalize_solution(a_tilde: &MatPoly, l: &DMatrix<f64>) -> Result<MatPoly> {
    if l.nrows() != a_tilde.dim() || l.ncols() != a_tilde.dim() {
        return Err(Error::DimensionMismatch("normalization factor".into()));
    }
    if linalg::max_upper(l) > 0.0 {
        return Err(Error::NotLowerTriangular(linalg::max_upper(l)));
    }
    let linv = linalg::lower_inverse(l).ok_or(Error::SingularFactor)?;
    let mut out = a_tilde.mul_right(&linv);
    // keep A_0 exactly lower triangular
    let mut c = out.clone().into_coeffs();
    c[0].fill_upper_triangle(0.0, 1);
    out = MatPoly::new(c)?;
    Ok(out)
}

/// Quantities entering the existence conditions
/// `det P_n != 0` and `trace P_0 < min(1, lambda_min) mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceReport {
    pub det_pn: f64,
    pub trace_p0: f64,
    pub lambda_min: f64,
    pub mu: f64,
    pub det_ok: bool,
    pub trace_ok: bool,
}

impl ExistenceReport {
    pub fn holds(&self) -> bool {
        self.det_ok && self.trace_ok
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.det_ok {
            w.push(format!(
                "existence condition det P_n != 0 violated (det P_n = {:e})",
                self.det_pn
            ));
        }
        if !self.trace_ok {
            w.push(format!(
                "existence condition trace P_0 < min(1, lambda_min) mu violated \
                 (trace P_0 = {}, lambda_min = {}, mu = {})",
                self.trace_p0, self.lambda_min, self.mu
            ));
        }
        w
    }
}

/// Advisory check of the existence conditions; never fails.
pub fn existence_check(data: &CovSequence, p: &PseudoPoly, mu: f64) -> Result<ExistenceReport> {
    crate::matpoly::ensure_conformable(data.shape(), p.shape(), "existence_check")?;
    let n = p.order();
    let m = p.dim();
    let pn = p.coeff(n);
    let det_pn = pn.determinant();
    // scale-aware zero test for det P_n
    let scale = p.coeff(0).norm().max(f64::MIN_POSITIVE).powi(m as i32);
    let det_ok = det_pn.abs() > 1e-12 * scale;
    let trace_p0 = p.coeff(0).trace();
    let lambda_min = check_pd(data).lambda_min;
    let bound = lambda_min.min(1.0) * mu;
    Ok(ExistenceReport {
        det_pn,
        trace_p0,
        lambda_min,
        mu,
        det_ok,
        trace_ok: lambda_min > 0.0 && trace_p0 < bound,
    })
}
