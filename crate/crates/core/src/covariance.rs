//! Covariances `Sigma_0..Sigma_n` of the VARMA model `A(z) y = B(z) w`,
//! computed two independent ways, and covariance-match verification.
//!
//! The linear route solves `H A^* + A H^* = 2 B B^*` and back-substitutes
//! through the block lower-triangular `L_A`. The grid route evaluates the
//! spectral density on `K` circle points and averages `e^{ik theta} Phi`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::covdata::CovSequence;
use crate::error::{Error, Result};
use crate::factor::solve_symmetric_eq;
use crate::linalg;
use crate::matpoly::{ensure_conformable, is_schur, poly_product_full, MatPoly, SchurClassSpec};

/// Bound on the imaginary part of grid-averaged covariances.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Linear,
    Fft,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovOracleConfig {
    pub method: OracleMethod,
    pub fft_grid: usize,
    pub tol: f64,
}

impl Default for CovOracleConfig {
    fn default() -> Self {
        Self {
            method: OracleMethod::Both,
            fft_grid: 4096,
            tol: 1e-8,
        }
    }
}

pub fn varma_cov_linear(a: &MatPoly, b: &MatPoly) -> Result<CovSequence> {
    ensure_conformable(a.shape(), b.shape(), "varma_cov_linear")?;
    if let Some(w) = is_schur(a, &SchurClassSpec::default()).failure {
        return Err(Error::NotSchur(w.to_string()));
    }
    let (m, n) = a.shape();
    let h = solve_symmetric_eq(a, &poly_product_full(b))?;
    let a0 = a.coeff(0);
    // row k of L_A: A_k S_0 + 2 sum_{j<k} A_j S_{k-j} = H_k
    let mut sigma: Vec<DMatrix<f64>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut rhs = h.coeff(k).clone();
        if k > 0 {
            rhs.gemm(-1.0, a.coeff(k), &sigma[0], 1.0);
            for j in 1..k {
                rhs.gemm(-2.0, a.coeff(j), &sigma[k - j], 1.0);
            }
        }
        let mut s = a0
            .solve_lower_triangular(&rhs)
            .ok_or_else(|| Error::NotSchur("A_0 singular".into()))?;
        if k > 0 {
            s *= 0.5;
        }
        sigma.push(s);
    }
    // Sigma_0 comes out as Sigma + Q with Q skew; Sigma_{k>=1} are exact.
    sigma[0] = linalg::symmetrize(&sigma[0]);
    debug_assert_eq!(sigma[0].nrows(), m);
    CovSequence::new(sigma)
}

pub fn varma_cov_fft(a: &MatPoly, b: &MatPoly, grid: usize) -> Result<CovSequence> {
    ensure_conformable(a.shape(), b.shape(), "varma_cov_fft")?;
    let (m, n) = a.shape();
    if grid < 8 * (n + 1) || !grid.is_power_of_two() {
        return Err(Error::GridTooSmall(format!(
            "grid {grid} must be a power of two and at least {}",
            8 * (n + 1)
        )));
    }
    let mut acc = vec![DMatrix::<Complex64>::zeros(m, m); n + 1];
    for j in 0..grid {
        let theta = std::f64::consts::TAU * j as f64 / grid as f64;
        let av = a.eval_on_circle(theta);
        let bv = b.eval_on_circle(theta);
        let x = av
            .lu()
            .solve(&bv)
            .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .ok_or(Error::SingularOnGrid { theta })?;
        let phi = &x * x.adjoint();
        for (k, slot) in acc.iter_mut().enumerate() {
            let w = Complex64::from_polar(1.0, k as f64 * theta);
            slot.zip_apply(&phi, |s, v| *s += w * v);
        }
    }
    let scale = 1.0 / grid as f64;
    let mut out = Vec::with_capacity(n + 1);
    for c in &acc {
        let re = c.map(|z| z.re * scale);
        let im = c.map(|z| z.im * scale).amax();
        if im > IMAG_RESIDUE_TOL * (1.0 + re.amax()) {
            return Err(Error::ImaginaryResidue(im));
        }
        out.push(re);
    }
    CovSequence::new(out)
}

/// Largest `|S_k - C_k|_F / (1 + |C_k|_F)` over `k`.
pub fn max_deviation(sigma: &CovSequence, data: &CovSequence) -> f64 {
    sigma
        .coeffs()
        .iter()
        .zip(data.coeffs())
        .map(|(s, c)| (s - c).norm() / (1.0 + c.norm()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchVerdict {
    pub pass: bool,
    pub max_deviation: f64,
    pub linear_deviation: Option<f64>,
    pub fft_deviation: Option<f64>,
}

/// Compares the model covariances against `data` with the configured oracle(s).
pub fn verify_match(
    a: &MatPoly,
    b: &MatPoly,
    data: &CovSequence,
    cfg: &CovOracleConfig,
) -> Result<MatchVerdict> {
    ensure_conformable(a.shape(), data.shape(), "verify_match")?;
    let linear_deviation = match cfg.method {
        OracleMethod::Linear | OracleMethod::Both => {
            Some(max_deviation(&varma_cov_linear(a, b)?, data))
        }
        OracleMethod::Fft => None,
    };
    let fft_deviation = match cfg.method {
        OracleMethod::Fft | OracleMethod::Both => {
            Some(max_deviation(&varma_cov_fft(a, b, cfg.fft_grid)?, data))
        }
        OracleMethod::Linear => None,
    };
    let max_deviation = linear_deviation
        .into_iter()
        .chain(fft_deviation)
        .fold(0.0, f64::max);
    Ok(MatchVerdict {
        pass: max_deviation <= cfg.tol,
        max_deviation,
        linear_deviation,
        fft_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scal(c: &[f64]) -> MatPoly {
        MatPoly::from_scalars(c).unwrap()
    }

    fn assert_cov(c: &CovSequence, want: &[f64], tol: f64) {
        for (k, w) in want.iter().enumerate() {
            assert!(
                (c.coeff(k)[(0, 0)] - w).abs() < tol,
                "S_{k} = {} vs {w}",
                c.coeff(k)[(0, 0)]
            );
        }
    }

    #[test]
    fn ar1_both_routes() {
        let a = scal(&[1.0, -0.5]);
        let b = scal(&[1.0, 0.0]);
        assert_cov(
            &varma_cov_linear(&a, &b).unwrap(),
            &[4.0 / 3.0, 2.0 / 3.0],
            1e-14,
        );
        assert_cov(
            &varma_cov_fft(&a, &b, 4096).unwrap(),
            &[4.0 / 3.0, 2.0 / 3.0],
            1e-10,
        );
    }

    #[test]
    fn arma11_closed_form() {
        // y_t = 0.5 y_{t-1} + w_t + 0.5 w_{t-1}:
        // gamma_0 = (1 + 2 phi theta + theta^2) / (1 - phi^2) = 7/3,
        // gamma_1 = (1 + phi theta)(phi + theta) / (1 - phi^2) = 5/3.
        let a = scal(&[1.0, -0.5]);
        let b = scal(&[1.0, 0.5]);
        assert_cov(
            &varma_cov_linear(&a, &b).unwrap(),
            &[7.0 / 3.0, 5.0 / 3.0],
            1e-13,
        );
        assert_cov(
            &varma_cov_fft(&a, &b, 4096).unwrap(),
            &[7.0 / 3.0, 5.0 / 3.0],
            1e-10,
        );
    }

    #[test]
    fn identity_ar_gives_ma_covariances() {
        let b = MatPoly::new(vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 2.0]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.1, -0.4, 0.2]),
        ])
        .unwrap();
        let sigma = varma_cov_linear(&MatPoly::identity(2, 1), &b).unwrap();
        let p = poly_product_full(&b);
        for k in 0..2 {
            assert!((sigma.coeff(k) - p.coeff(k)).amax() < 1e-14);
        }
    }

    #[test]
    fn equal_polynomials_give_white_noise() {
        let a = MatPoly::new(vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 2.0]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.1, -0.4, 0.2]),
        ])
        .unwrap();
        let sigma = varma_cov_fft(&a, &a, 4096).unwrap();
        assert!((sigma.coeff(0) - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert!(sigma.coeff(1).amax() < 1e-12);
        let sigma = varma_cov_linear(&a, &a).unwrap();
        assert!((sigma.coeff(0) - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn verify_examples() {
        let a = scal(&[1.0, -0.5]);
        let b = scal(&[1.0, 0.0]);
        let cfg = CovOracleConfig::default();
        let good = CovSequence::from_scalars(&[4.0 / 3.0, 2.0 / 3.0]).unwrap();
        let v = verify_match(&a, &b, &good, &cfg).unwrap();
        assert!(v.pass && v.max_deviation < 1e-10);

        let bad = CovSequence::from_scalars(&[1.0, 0.0]).unwrap();
        let v = verify_match(&a, &b, &bad, &cfg).unwrap();
        assert!(!v.pass);
        assert!((v.max_deviation - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn grid_validation() {
        let a = scal(&[1.0, -0.5]);
        assert!(matches!(
            varma_cov_fft(&a, &a, 12),
            Err(Error::GridTooSmall(_))
        ));
        assert!(matches!(
            varma_cov_fft(&a, &a, 8),
            Err(Error::GridTooSmall(_))
        ));
    }

    #[test]
    fn linear_rejects_non_schur() {
        let a = scal(&[1.0, -2.0]);
        assert!(matches!(varma_cov_linear(&a, &a), Err(Error::NotSchur(_))));
    }

    #[test]
    fn scaling_b_scales_covariances() {
        let a = scal(&[1.0, -0.3, 0.2]);
        let b = scal(&[1.0, 0.4, 0.1]);
        let s1 = varma_cov_linear(&a, &b).unwrap();
        let s2 = varma_cov_linear(&a, &b.scale(3.0)).unwrap();
        for k in 0..3 {
            assert!((s2.coeff(k) - s1.coeff(k) * 9.0).amax() < 1e-12);
        }
    }
}
