//! Matrix spectral factorization `A(z) A(z^{-1})^T = P(z)` and the linear
//! symmetric polynomial equation `H A^* + A H^* = 2P`.

use nalgebra::DMatrix;

use crate::covdata::CovSequence;
use crate::error::{Error, Result};
use crate::linalg::{self, Factored};
use crate::matchmap::{
    devectorize, f_o, jacobian_matrix, vectorize, vectorize_pseudo, SchurCoords,
};
use crate::matpoly::{is_schur, min_eig_on_grid, MatPoly, PseudoPoly, SchurClassSpec};

/// Condition number above which the symmetric equation is treated as singular.
pub const SYM_EQ_MAX_COND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorConfig {
    /// Block rows before the first convergence test; `None` means `16 (n + 1)`.
    pub bauer_l_init: Option<usize>,
    pub bauer_l_max: usize,
    pub bauer_tol: f64,
    pub refine_tol: f64,
    pub refine_max_iter: usize,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self {
            bauer_l_init: None,
            bauer_l_max: 4096,
            bauer_tol: 1e-8,
            refine_tol: 1e-12,
            refine_max_iter: 50,
        }
    }
}

impl FactorConfig {
    fn l_init(&self, n: usize) -> usize {
        self.bauer_l_init.unwrap_or(16 * (n + 1))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.bauer_tol > 0.0 && self.refine_tol > 0.0) {
            return Err(Error::InvalidInput(
                "factor tolerances must be positive".into(),
            ));
        }
        if self.l_init(n) > self.bauer_l_max {
            return Err(Error::InvalidInput(
                "bauer_l_init exceeds bauer_l_max".into(),
            ));
        }
        Ok(())
    }
}

/// Bauer's method: block Cholesky of the banded block-Toeplitz matrix with
/// `P_k` on the `k`-th block sub-diagonal, grown row by row until the last
/// block row settles. Returns the estimate and the number of rows used.
pub fn bauer_estimate(p: &PseudoPoly, cfg: &FactorConfig) -> Result<(MatPoly, usize, bool)> {
    let (m, n) = p.shape();
    let not_pd = || Error::PNotPositive { min_eig: f64::NAN };
    // rows[i][d] = G_{i, i-d}
    let mut rows: Vec<Vec<DMatrix<f64>>> = Vec::new();
    let mut prev: Option<Vec<DMatrix<f64>>> = None;
    let l_init = cfg.l_init(n).max(n + 1);
    for i in 0..cfg.bauer_l_max {
        let dmax = i.min(n);
        let mut row = vec![DMatrix::<f64>::zeros(m, m); n + 1];
        // off-diagonal blocks, left to right
        for d in (1..=dmax).rev() {
            let j = i - d;
            let mut s = p.coeff(d).clone();
            // k runs over columns i-dmax ..= j-1, i.e. offsets (d+1)..=dmax
            for (e, g_ik) in row.iter().enumerate().take(dmax + 1).skip(d + 1) {
                // G_{j,k} with k = i - e sits at offset j - k = e - d
                linalg::add_abt(&mut s, -1.0, g_ik, &rows[j][e - d]);
            }
            let gjj = &rows[j][0];
            let xt = gjj
                .solve_lower_triangular(&s.transpose())
                .ok_or_else(not_pd)?;
            row[d] = xt.transpose();
        }
        let mut diag = p.coeff(0).clone();
        for blk in row.iter().take(dmax + 1).skip(1) {
            linalg::add_abt(&mut diag, -1.0, blk, blk);
        }
        row[0] = linalg::cholesky_lower(&diag).ok_or_else(not_pd)?;
        if i >= n {
            let current: Vec<DMatrix<f64>> = row.clone();
            if let Some(old) = &prev {
                let diff = current
                    .iter()
                    .zip(old)
                    .map(|(a, b)| (a - b).amax())
                    .fold(0.0, f64::max);
                if i + 1 >= l_init && diff < cfg.bauer_tol {
                    return Ok((MatPoly::new(current)?, i + 1, true));
                }
            }
            prev = Some(current);
        }
        rows.push(row);
    }
    let last = prev.ok_or_else(|| Error::FactorizationFailed("no Bauer estimate".into()))?;
    Ok((MatPoly::new(last)?, cfg.bauer_l_max, false))
}

fn relative_residual(a: &MatPoly, p: &PseudoPoly) -> f64 {
    f_o(a).axpy(-1.0, p).norm() / p.norm()
}

/// Outer spectral factor of `P`, the unique Schur-class `A` with `A A^* = P`.
pub fn spectral_factor(p: &PseudoPoly, cfg: &FactorConfig) -> Result<MatPoly> {
    let (m, n) = p.shape();
    cfg.validate(n)?;
    let min_eig = min_eig_on_grid(p, 512.max(2 * n + 1))?;
    if !(min_eig > 0.0) {
        return Err(Error::PNotPositive { min_eig });
    }
    let (mut a, rows, converged) = bauer_estimate(p, cfg)?;
    if !converged {
        log::debug!("Bauer estimate did not settle within {rows} rows; refining anyway");
    }
    let ident = CovSequence::identity(m, n);
    let spec = SchurClassSpec::default();
    let mut res = relative_residual(&a, p);
    let mut iters = 0;
    while res > cfg.refine_tol {
        if iters == cfg.refine_max_iter {
            return Err(Error::FactorizationFailed(format!(
                "residual {res:e} after {iters} Newton steps"
            )));
        }
        iters += 1;
        let jac = Factored::new(jacobian_matrix(&a, &ident)?);
        let rhs = vectorize_pseudo(&p.axpy(-1.0, &f_o(&a))).r;
        let delta = jac
            .solve(&rhs)
            .ok_or_else(|| Error::FactorizationFailed("singular Jacobian".into()))?;
        let x = vectorize(&a)?.x;
        let start_in_class = is_schur(&a, &spec).is_member();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = devectorize(&SchurCoords {
                m,
                n,
                x: &x + &delta * alpha,
            })?;
            let cand_res = relative_residual(&cand, p);
            if cand_res < res && (!start_in_class || is_schur(&cand, &spec).is_member()) {
                accepted = Some((cand, cand_res));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, cand_res)) => {
                a = cand;
                res = cand_res;
            }
            None => {
                return Err(Error::FactorizationFailed(format!(
                    "Newton refinement stalled at residual {res:e}"
                )))
            }
        }
    }
    let verdict = is_schur(&a, &spec);
    if let Some(w) = verdict.failure {
        return Err(Error::FactorizationFailed(format!(
            "factor not in Schur class: {w}"
        )));
    }
    Ok(a)
}

/// Unique `H` with lower-triangular `H_0` solving `H A^* + A H^* = 2P`.
pub fn solve_symmetric_eq(a: &MatPoly, p: &PseudoPoly) -> Result<MatPoly> {
    crate::matpoly::ensure_conformable(a.shape(), p.shape(), "solve_symmetric_eq")?;
    let verdict = is_schur(a, &SchurClassSpec::default());
    if let Some(w) = verdict.failure {
        return Err(Error::NotSchur(w.to_string()));
    }
    let (m, n) = a.shape();
    let jac = jacobian_matrix(a, &CovSequence::identity(m, n))?;
    let cond = linalg::condition_number(&jac);
    if !(cond <= SYM_EQ_MAX_COND) {
        return Err(Error::NearBoundary { cond });
    }
    let rhs = vectorize_pseudo(p).r * 2.0;
    let h = Factored::new(jac)
        .solve(&rhs)
        .ok_or(Error::NearBoundary { cond })?;
    devectorize(&SchurCoords { m, n, x: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matpoly::poly_product_full;

    fn scal(c: &[f64]) -> MatPoly {
        MatPoly::from_scalars(c).unwrap()
    }

    fn assert_poly(a: &MatPoly, want: &[f64], tol: f64) {
        for (k, w) in want.iter().enumerate() {
            assert!(
                (a.coeff(k)[(0, 0)] - w).abs() < tol,
                "A_{k} = {} vs {w}",
                a.coeff(k)[(0, 0)]
            );
        }
    }

    #[test]
    fn factor_identity() {
        let a = spectral_factor(&PseudoPoly::identity(3, 2), &FactorConfig::default()).unwrap();
        assert!((a.axpy(-1.0, &MatPoly::identity(3, 2))).norm() < 1e-14);
    }

    #[test]
    fn factor_scalar_examples() {
        let cfg = FactorConfig::default();
        let s = 2f64.sqrt();
        let a = spectral_factor(&PseudoPoly::from_scalars(&[2.5, 1.0]).unwrap(), &cfg).unwrap();
        assert_poly(&a, &[s, 1.0 / s], 1e-12);
        let a = spectral_factor(&PseudoPoly::from_scalars(&[1.25, 0.5]).unwrap(), &cfg).unwrap();
        assert_poly(&a, &[1.0, 0.5], 1e-12);
    }

    #[test]
    fn bauer_orientation_matches_factor() {
        let b = MatPoly::new(vec![
            DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.4, 0.8]),
            DMatrix::from_row_slice(2, 2, &[0.3, -0.2, 0.1, 0.25]),
        ])
        .unwrap();
        let (est, _, converged) =
            bauer_estimate(&poly_product_full(&b), &FactorConfig::default()).unwrap();
        assert!(converged);
        assert!(est.axpy(-1.0, &b).norm() < 1e-7);
    }

    #[test]
    fn factor_rejects_nonpositive() {
        let p = PseudoPoly::from_scalars(&[1.0, 0.6]).unwrap();
        assert!(matches!(
            spectral_factor(&p, &FactorConfig::default()),
            Err(Error::PNotPositive { .. })
        ));
        // zero on the circle at theta = pi
        let p = PseudoPoly::from_scalars(&[1.0, 0.5]).unwrap();
        assert!(matches!(
            spectral_factor(&p, &FactorConfig::default()),
            Err(Error::PNotPositive { .. })
        ));
    }

    #[test]
    fn symmetric_eq_examples() {
        let a = scal(&[1.0, -0.5]);
        let h = solve_symmetric_eq(&a, &PseudoPoly::identity(1, 1)).unwrap();
        assert_poly(&h, &[4.0 / 3.0, 2.0 / 3.0], 1e-14);

        let a = MatPoly::new(vec![
            DMatrix::from_row_slice(2, 2, &[1.2, 0.0, -0.3, 0.9]),
            DMatrix::from_row_slice(2, 2, &[0.2, 0.1, -0.1, 0.3]),
        ])
        .unwrap();
        let h = solve_symmetric_eq(&a, &f_o(&a)).unwrap();
        assert!(h.axpy(-1.0, &a).norm() < 1e-12);
    }

    #[test]
    fn symmetric_eq_identity_reduction() {
        let p0 = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let p1 = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, -0.4, 0.5]);
        let p = PseudoPoly::new(vec![p0.clone(), p1.clone()]).unwrap();
        let h = solve_symmetric_eq(&MatPoly::identity(2, 1), &p).unwrap();
        let h0 = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.6, 1.0]);
        assert!((h.coeff(0) - h0).amax() < 1e-14);
        assert!((h.coeff(1) - p1 * 2.0).amax() < 1e-14);
    }

    #[test]
    fn symmetric_eq_requires_schur() {
        let a = scal(&[1.0, -2.0]);
        assert!(matches!(
            solve_symmetric_eq(&a, &PseudoPoly::identity(1, 1)),
            Err(Error::NotSchur(_))
        ));
    }

    #[test]
    fn symmetric_eq_near_boundary() {
        let a = scal(&[1.0, -(1.0 - 1e-13)]);
        let err = solve_symmetric_eq(&a, &PseudoPoly::identity(1, 1));
        assert!(matches!(
            err,
            Err(Error::NearBoundary { .. }) | Err(Error::NotSchur(_))
        ));
    }
}
