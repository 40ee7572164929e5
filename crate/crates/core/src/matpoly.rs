//! Matrix polynomials in `z^{-1}`, Hermitian pseudo-polynomials, and the
//! Schur-class membership test.
//!
//! A [`MatPoly`] of dimension `m` and order `n` stores `M_0..M_n` for
//! `M(z) = sum_k M_k z^{-k}`. A [`PseudoPoly`] stores `P_0..P_n` of
//! `P(z) = sum_{k=-n}^{n} P_k z^{-k}` with `P_{-k} = P_k^T` implied.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::covdata::CovSequence;
use crate::error::{Error, Result};
use crate::linalg;

/// Upper-triangle tolerance for "lower triangular".
pub const LOWER_TRI_TOL: f64 = 1e-12;

fn check_square_family(coeffs: &[DMatrix<f64>], what: &str) -> Result<usize> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::InvalidInput(format!("{what} needs at least one coefficient")))?;
    let m = first.nrows();
    if m == 0 {
        return Err(Error::InvalidInput(format!("{what} has dimension 0")));
    }
    for (k, c) in coeffs.iter().enumerate() {
        if c.nrows() != m || c.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "{what} coefficient {k} is {}x{}, expected {m}x{m}",
                c.nrows(),
                c.ncols()
            )));
        }
        if !linalg::all_finite(c) {
            return Err(Error::InvalidInput(format!(
                "{what} coefficient {k} has non-finite entries"
            )));
        }
    }
    Ok(m)
}

pub(crate) fn ensure_conformable(
    (m1, n1): (usize, usize),
    (m2, n2): (usize, usize),
    what: &str,
) -> Result<()> {
    if m1 != m2 || n1 != n2 {
        return Err(Error::DimensionMismatch(format!(
            "{what}: (m={m1}, n={n1}) vs (m={m2}, n={n2})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatPoly {
    m: usize,
    coeffs: Vec<DMatrix<f64>>,
}

impl MatPoly {
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let m = check_square_family(&coeffs, "matrix polynomial")?;
        Ok(Self { m, coeffs })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            coeffs: vec![DMatrix::zeros(m, m); n + 1],
        }
    }

    /// The constant polynomial `I`, padded to order `n`.
    pub fn identity(m: usize, n: usize) -> Self {
        let mut p = Self::zeros(m, n);
        p.coeffs[0] = DMatrix::identity(m, m);
        p
    }

    /// Scalar (`m = 1`) polynomial from its coefficients.
    pub fn from_scalars(c: &[f64]) -> Result<Self> {
        Self::new(c.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect())
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

    pub fn into_coeffs(self) -> Vec<DMatrix<f64>> {
        self.coeffs
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &MatPoly) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        Self {
            m: self.m,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * alpha)
                .collect(),
        }
    }

    /// `M_k <- M_k s^k`, which maps every root `z` of `det M` to `s z`.
    pub fn root_scaled(&self, s: f64) -> Self {
        let mut pow = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * pow;
                pow *= s;
                out
            })
            .collect();
        Self { m: self.m, coeffs }
    }

    /// Right-multiplies every coefficient by `r`.
    pub fn mul_right(&self, r: &DMatrix<f64>) -> Self {
        Self {
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Frobenius norm of the stacked coefficients.
    pub fn norm(&self) -> f64 {
        linalg::seq_norm(&self.coeffs)
    }

    /// `trace(sum_k M_k M_k^T)`, the integral of `trace M M^*` over the circle.
    pub fn trace_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_squared()).sum()
    }

    /// `M(e^{i theta}) = sum_k M_k e^{-i k theta}`.
    pub fn eval_on_circle(&self, theta: f64) -> DMatrix<Complex64> {
        let mut out = DMatrix::<Complex64>::zeros(self.m, self.m);
        for (k, c) in self.coeffs.iter().enumerate() {
            let w = Complex64::from_polar(1.0, -(k as f64) * theta);
            out.zip_apply(c, |o, v| *o += w * v);
        }
        out
    }

    /// Block companion matrix of `z^n M(z)` normalized by `M_0^{-1}`, or
    /// `None` when `M_0` is singular. Its nonzero eigenvalues are the roots
    /// of `det M(z)`.
    pub fn companion(&self) -> Option<DMatrix<f64>> {
        let (m, n) = self.shape();
        let lu = self.coeffs[0].clone().lu();
        if !lu.is_invertible() {
            return None;
        }
        let mut comp = DMatrix::zeros(m * n, m * n);
        for k in 1..=n {
            let block = -lu.solve(&self.coeffs[k])?;
            comp.view_mut((0, (k - 1) * m), (m, m)).copy_from(&block);
        }
        for k in 1..n {
            comp.view_mut((k * m, (k - 1) * m), (m, m))
                .fill_with_identity();
        }
        Some(comp)
    }

    /// Largest modulus among the roots of `det M(z)`; 0 for `n = 0`.
    pub fn spectral_radius(&self) -> Option<f64> {
        if self.order() == 0 {
            return self.companion().map(|_| 0.0);
        }
        // trailing zero coefficients only add exact zero roots, and would
        // otherwise make the companion defective
        let order = (0..=self.order())
            .rev()
            .find(|&k| self.coeffs[k].iter().any(|&v| v != 0.0))
            .unwrap_or(0);
        let trimmed = MatPoly {
            m: self.m,
            coeffs: self.coeffs[..=order].to_vec(),
        };
        if order == 0 {
            return trimmed.companion().map(|_| 0.0);
        }
        let comp = trimmed.companion()?;
        Some(companion_radius(&comp))
    }
}

/// Spectral radius of a companion matrix. The QR iteration can stall on
/// exactly nilpotent inputs (e.g. the companion of `I`), so on failure it is
/// retried on shifted copies `C + s I`, whose eigenvalues are `lambda + s`.
fn companion_radius(comp: &DMatrix<f64>) -> f64 {
    let k = comp.nrows();
    for shift in [0.0, 0.5, -0.75, 1.25] {
        let shifted = comp + DMatrix::<f64>::identity(k, k) * shift;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 10_000) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| (z - shift).norm())
                .fold(0.0, f64::max);
        }
    }
    // unknown radius; membership tests compare with <= and so reject it
    f64::NAN
}

/// Hermitian matrix pseudo-polynomial with `P_{-k} = P_k^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPoly {
    m: usize,
    coeffs: Vec<DMatrix<f64>>,
}

impl PseudoPoly {
    /// Builds from `P_0..P_n`; `P_0` is symmetrized.
    pub fn new(mut coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let m = check_square_family(&coeffs, "pseudo-polynomial")?;
        let asym = linalg::asymmetry(&coeffs[0]);
        if asym > 1e-8 * (1.0 + coeffs[0].amax()) {
            log::warn!("P_0 asymmetric by {asym:e}; symmetrizing");
        }
        coeffs[0] = linalg::symmetrize(&coeffs[0]);
        Ok(Self { m, coeffs })
    }

    pub fn from_scalars(c: &[f64]) -> Result<Self> {
        Self::new(c.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect())
    }

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

    pub fn norm(&self) -> f64 {
        linalg::seq_norm(&self.coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + alpha * other`, coefficientwise.
    pub fn axpy(&self, alpha: f64, other: &PseudoPoly) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        let mut coeffs: Vec<_> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * alpha)
            .collect();
        coeffs[0] = linalg::symmetrize(&coeffs[0]);
        Self { m: self.m, coeffs }
    }

    /// `P(e^{i theta}) = P_0 + sum_{k>=1} (P_k e^{-ik theta} + P_k^T e^{ik theta})`.
    pub fn eval_on_circle(&self, theta: f64) -> DMatrix<Complex64> {
        let mut out = linalg::complexify(&self.coeffs[0]);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let w = Complex64::from_polar(1.0, -(k as f64) * theta);
            let wc = w.conj();
            let ct = c.transpose();
            for i in 0..self.m {
                for j in 0..self.m {
                    out[(i, j)] += w * c[(i, j)] + wc * ct[(i, j)];
                }
            }
        }
        out
    }
}

/// `H(z)`: the order-`n` truncation of `A(z) (C_0 + 2C_1 z^{-1} + ... + 2C_n z^{-n})`.
pub fn trunc_product(a: &MatPoly, data: &CovSequence) -> Result<MatPoly> {
    ensure_conformable(a.shape(), data.shape(), "trunc_product")?;
    Ok(trunc_product_unchecked(a, data.coeffs()))
}

pub(crate) fn trunc_product_unchecked(a: &MatPoly, c: &[DMatrix<f64>]) -> MatPoly {
    let (m, n) = a.shape();
    let coeffs = (0..=n)
        .map(|k| {
            let mut h = DMatrix::zeros(m, m);
            for j in 0..=k {
                let w = if k == j { 1.0 } else { 2.0 };
                h.gemm(w, &a.coeffs[j], &c[k - j], 1.0);
            }
            h
        })
        .collect();
    MatPoly { m, coeffs }
}

/// `P(z) = 1/2 [H(z) A(z^{-1})^T + A(z) H(z^{-1})^T]`, truncated to `|k| <= n`.
pub fn sym_outer(h: &MatPoly, a: &MatPoly) -> Result<PseudoPoly> {
    ensure_conformable(h.shape(), a.shape(), "sym_outer")?;
    Ok(sym_outer_unchecked(h, a))
}

pub(crate) fn sym_outer_unchecked(h: &MatPoly, a: &MatPoly) -> PseudoPoly {
    let (m, n) = a.shape();
    let mut coeffs: Vec<DMatrix<f64>> = (0..=n)
        .map(|k| {
            let mut p = DMatrix::zeros(m, m);
            for l in 0..=(n - k) {
                linalg::add_abt(&mut p, 0.5, &h.coeffs[l + k], &a.coeffs[l]);
                linalg::add_abt(&mut p, 0.5, &a.coeffs[l + k], &h.coeffs[l]);
            }
            p
        })
        .collect();
    coeffs[0] = linalg::symmetrize(&coeffs[0]);
    PseudoPoly { m, coeffs }
}

/// `B(z) B(z^{-1})^T` as a pseudo-polynomial: `P_k = sum_l B_{l+k} B_l^T`.
pub fn poly_product_full(b: &MatPoly) -> PseudoPoly {
    let (m, n) = b.shape();
    let mut coeffs: Vec<DMatrix<f64>> = (0..=n)
        .map(|k| {
            let mut p = DMatrix::zeros(m, m);
            for l in 0..=(n - k) {
                linalg::add_abt(&mut p, 1.0, &b.coeffs[l + k], &b.coeffs[l]);
            }
            p
        })
        .collect();
    coeffs[0] = linalg::symmetrize(&coeffs[0]);
    PseudoPoly { m, coeffs }
}

/// Parameters of the Schur class used by [`is_schur`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurClassSpec {
    /// Bound on `trace(sum M_k M_k^T)`; `f64::INFINITY` means unbounded.
    pub mu: f64,
    /// Largest accepted companion spectral radius.
    pub rho_max: f64,
    /// Diagonal entries of `M_0` must exceed this.
    pub diag_min: f64,
}

impl Default for SchurClassSpec {
    fn default() -> Self {
        Self {
            mu: f64::INFINITY,
            rho_max: 1.0 - 1e-9,
            diag_min: 0.0,
        }
    }
}

impl SchurClassSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_max > 0.0 && self.rho_max < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rho_max must lie in (0, 1), got {}",
                self.rho_max
            )));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Which membership condition failed.
#[derive(Debug, Clone, PartialEq)]
pub enum SchurWitness {
    NotLowerTriangular { max_upper: f64 },
    DiagonalTooSmall { index: usize, value: f64 },
    SingularLeading,
    RootOutside { spectral_radius: f64 },
    TraceBound { trace: f64 },
}

impl std::fmt::Display for SchurWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotLowerTriangular { max_upper } => {
                write!(f, "M_0 not lower triangular (upper entry {max_upper:e})")
            }
            Self::DiagonalTooSmall { index, value } => {
                write!(f, "M_0 diagonal entry {index} is {value:e}")
            }
            Self::SingularLeading => write!(f, "M_0 singular"),
            Self::RootOutside { spectral_radius } => {
                write!(f, "spectral radius {spectral_radius} exceeds margin")
            }
            Self::TraceBound { trace } => write!(f, "trace norm {trace} exceeds mu"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurVerdict {
    pub spectral_radius: Option<f64>,
    pub trace: f64,
    pub failure: Option<SchurWitness>,
}

impl SchurVerdict {
    pub fn is_member(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn is_schur(poly: &MatPoly, spec: &SchurClassSpec) -> SchurVerdict {
    let trace = poly.trace_norm();
    let verdict = |spectral_radius, failure| SchurVerdict {
        spectral_radius,
        trace,
        failure,
    };
    let m0 = poly.coeff(0);
    let upper = linalg::max_upper(m0);
    if upper > LOWER_TRI_TOL {
        return verdict(
            None,
            Some(SchurWitness::NotLowerTriangular { max_upper: upper }),
        );
    }
    if let Some(i) = (0..poly.dim()).find(|&i| !(m0[(i, i)] > spec.diag_min)) {
        let failure = if m0[(i, i)] == 0.0 {
            SchurWitness::SingularLeading
        } else {
            SchurWitness::DiagonalTooSmall {
                index: i,
                value: m0[(i, i)],
            }
        };
        return verdict(None, Some(failure));
    }
    let Some(rho) = poly.spectral_radius() else {
        return verdict(None, Some(SchurWitness::SingularLeading));
    };
    if !(rho <= spec.rho_max) {
        return verdict(
            Some(rho),
            Some(SchurWitness::RootOutside {
                spectral_radius: rho,
            }),
        );
    }
    if !(trace < spec.mu) {
        return verdict(Some(rho), Some(SchurWitness::TraceBound { trace }));
    }
    verdict(Some(rho), None)
}

/// Smallest eigenvalue of `P(e^{i theta_j})` over `theta_j = 2 pi j / K`.
pub fn min_eig_on_grid(p: &PseudoPoly, grid: usize) -> Result<f64> {
    if grid < 2 * p.order() + 1 {
        return Err(Error::GridTooSmall(format!(
            "grid {grid} < 2n+1 = {}",
            2 * p.order() + 1
        )));
    }
    Ok((0..grid)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / grid as f64;
            linalg::hermitian_min_eig(&p.eval_on_circle(theta))
        })
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn scal(c: &[f64]) -> MatPoly {
        MatPoly::from_scalars(c).unwrap()
    }

    fn assert_scalars(p: &[DMatrix<f64>], want: &[f64], tol: f64) {
        assert_eq!(p.len(), want.len());
        for (got, w) in p.iter().zip(want) {
            assert!((got[(0, 0)] - w).abs() < tol, "{} vs {w}", got[(0, 0)]);
        }
    }

    #[test]
    fn identity_polynomials_are_schur_at_every_order() {
        for m in 1..=3 {
            for n in 0..=8 {
                let v = is_schur(&MatPoly::identity(m, n), &SchurClassSpec::default());
                assert!(v.is_member(), "m={m} n={n}: {:?}", v.failure);
                assert!(v.spectral_radius.unwrap() < 1e-3);
            }
        }
    }

    #[test]
    fn trunc_product_scalar_examples() {
        let data = CovSequence::from_scalars(&[1.0, 0.2]).unwrap();
        let h = trunc_product(&scal(&[1.0, 0.5]), &data).unwrap();
        assert_scalars(h.coeffs(), &[1.0, 0.9], 1e-15);

        let data = CovSequence::from_scalars(&[4.0 / 3.0, 2.0 / 3.0]).unwrap();
        let h = trunc_product(&scal(&[1.0, -0.5]), &data).unwrap();
        assert_scalars(h.coeffs(), &[4.0 / 3.0, 2.0 / 3.0], 1e-15);
    }

    #[test]
    fn trunc_product_identity_data_is_exact() {
        let a = MatPoly::new(vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.3, 2.0]),
            DMatrix::from_row_slice(2, 2, &[0.1, -0.7, 0.25, 0.4]),
        ])
        .unwrap();
        let h = trunc_product(&a, &CovSequence::identity(2, 1)).unwrap();
        assert_eq!(h, a);
    }

    #[test]
    fn trunc_product_rejects_mismatch() {
        let data = CovSequence::identity(1, 2);
        assert!(matches!(
            trunc_product(&scal(&[1.0, 0.5]), &data),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sym_outer_examples() {
        let p = sym_outer(&scal(&[1.0, 0.9]), &scal(&[1.0, 0.5])).unwrap();
        assert_scalars(p.coeffs(), &[1.45, 0.7], 1e-15);
        let p = sym_outer(&scal(&[1.0, 0.5]), &scal(&[1.0, 0.5])).unwrap();
        assert_scalars(p.coeffs(), &[1.25, 0.5], 1e-15);
        let id = MatPoly::identity(3, 2);
        assert_eq!(sym_outer(&id, &id).unwrap(), PseudoPoly::identity(3, 2));
    }

    #[test]
    fn poly_product_full_examples() {
        assert_scalars(
            poly_product_full(&scal(&[1.0, 0.5])).coeffs(),
            &[1.25, 0.5],
            1e-15,
        );
        let s = 2f64.sqrt();
        assert_scalars(
            poly_product_full(&scal(&[s, 1.0 / s])).coeffs(),
            &[2.5, 1.0],
            1e-15,
        );
        assert_eq!(
            poly_product_full(&MatPoly::identity(2, 3)),
            PseudoPoly::identity(2, 3)
        );
    }

    #[test]
    fn eval_on_circle_examples() {
        let m = scal(&[1.0, -0.5]);
        assert!((m.eval_on_circle(0.0)[(0, 0)] - 0.5).norm() < 1e-15);
        assert!((m.eval_on_circle(PI)[(0, 0)] - 1.5).norm() < 1e-15);
        let p = PseudoPoly::from_scalars(&[1.25, 0.5]).unwrap();
        assert!((p.eval_on_circle(PI / 2.0)[(0, 0)] - 1.25).norm() < 1e-15);
    }

    #[test]
    fn schur_scalar_examples() {
        let spec = SchurClassSpec::default();
        let v = is_schur(&scal(&[1.0, -0.5]), &spec);
        assert!(v.is_member());
        assert!((v.spectral_radius.unwrap() - 0.5).abs() < 1e-14);

        let v = is_schur(&scal(&[1.0, -2.0]), &spec);
        assert!(!v.is_member());
        assert!((v.spectral_radius.unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(v.failure, Some(SchurWitness::RootOutside { .. })));
    }

    #[test]
    fn schur_unbounded_coefficient_example() {
        // det M(z) = 1 + z^{-1}/2 regardless of the off-diagonal entry.
        let m = MatPoly::new(vec![
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[0.5, 10.0, 0.0, 0.0]),
        ])
        .unwrap();
        let v = is_schur(&m, &SchurClassSpec::default());
        assert!(v.is_member());
        assert!((v.spectral_radius.unwrap() - 0.5).abs() < 1e-12);

        let bounded = SchurClassSpec {
            mu: 50.0,
            ..Default::default()
        };
        assert!(matches!(
            is_schur(&m, &bounded).failure,
            Some(SchurWitness::TraceBound { .. })
        ));
    }

    #[test]
    fn schur_leading_coefficient_failures() {
        let spec = SchurClassSpec::default();
        let upper =
            MatPoly::new(vec![DMatrix::from_row_slice(2, 2, &[1.0, 1e-6, 0.0, 1.0])]).unwrap();
        assert!(matches!(
            is_schur(&upper, &spec).failure,
            Some(SchurWitness::NotLowerTriangular { .. })
        ));
        let singular = scal(&[0.0, 1.0]);
        assert_eq!(
            is_schur(&singular, &spec).failure,
            Some(SchurWitness::SingularLeading)
        );
        let negative = scal(&[-1.0, 0.1]);
        assert!(matches!(
            is_schur(&negative, &spec).failure,
            Some(SchurWitness::DiagonalTooSmall { .. })
        ));
    }

    #[test]
    fn min_eig_examples() {
        assert_eq!(
            min_eig_on_grid(&PseudoPoly::identity(2, 1), 8).unwrap(),
            1.0
        );
        let p = PseudoPoly::from_scalars(&[1.25, 0.5]).unwrap();
        assert!((min_eig_on_grid(&p, 512).unwrap() - 0.25).abs() < 1e-12);
        let p = PseudoPoly::from_scalars(&[1.0, 0.6]).unwrap();
        assert!((min_eig_on_grid(&p, 512).unwrap() + 0.2).abs() < 1e-12);
        assert!(min_eig_on_grid(&p, 2).is_err());
    }

    fn mat_strategy(m: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-1.0..1.0f64, m * m)
            .prop_map(move |v| DMatrix::from_column_slice(m, m, &v))
    }

    fn poly_strategy() -> impl Strategy<Value = MatPoly> {
        (1usize..=3, 0usize..=3).prop_flat_map(|(m, n)| {
            proptest::collection::vec(mat_strategy(m), n + 1).prop_map(move |mut c| {
                // lower-triangular leading coefficient with a healthy diagonal
                for j in 0..m {
                    for i in 0..j {
                        c[0][(i, j)] = 0.0;
                    }
                    c[0][(j, j)] = 1.0 + c[0][(j, j)].abs();
                }
                MatPoly::new(c).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn sym_outer_is_symmetric_in_arguments((h, a) in poly_strategy().prop_flat_map(|a| {
            let (m, n) = a.shape();
            (proptest::collection::vec(mat_strategy(m), n + 1), Just(a))
        })) {
            let h = MatPoly::new(h).unwrap();
            let p = sym_outer(&h, &a).unwrap();
            let q = sym_outer(&a, &h).unwrap();
            prop_assert_eq!(p.coeff(0), &p.coeff(0).transpose());
            for k in 0..=a.order() {
                prop_assert!((p.coeff(k) - q.coeff(k)).amax() < 1e-15);
            }
        }

        #[test]
        fn pseudo_eval_is_hermitian(a in poly_strategy(), theta in -10.0..10.0f64) {
            let p = poly_product_full(&a);
            let e = p.eval_on_circle(theta);
            prop_assert!((&e - e.adjoint()).iter().all(|z| z.norm() < 1e-12));
        }

        #[test]
        fn root_contraction_never_hurts_margin(a in poly_strategy(), s in 0.05..0.99f64) {
            let before = a.spectral_radius().unwrap();
            let after = a.root_scaled(s).spectral_radius().unwrap();
            prop_assert!(after <= before + 1e-9 * (1.0 + before));
            prop_assert!((after - s * before).abs() <= 1e-6 * (1.0 + before));
        }
    }
}
