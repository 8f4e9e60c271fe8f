//! Dense spectral kernel: symmetric/Hermitian eigendecompositions and the
//! matrix functions derived from them.

mod eigen;
mod matrix;
mod scalar;

use num_complex::Complex64;

pub use eigen::{
    eigen_jacobi, eigen_ql, eigenvalues_ql, EigenDecomposition, JACOBI_MAX_SWEEPS, JACOBI_REL_TOL,
};
pub use matrix::{HermitianMatrix, Matrix, SymmetricMatrix};
pub use scalar::Scalar;

use crate::{Error, Result};

/// Relative eigenvalue cutoff below which `pinv_herm` treats a direction as null.
pub const DEFAULT_PINV_CUTOFF: f64 = 1e-10;

/// Selects the eigensolver used by the `*_with` entry points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EigenMethod {
    #[default]
    TridiagonalQl,
    Jacobi,
}

pub fn herm_eigen(h: &HermitianMatrix) -> Result<EigenDecomposition<Complex64>> {
    eigen_ql(h.as_matrix())
}

pub fn herm_eigen_with(
    h: &HermitianMatrix,
    method: EigenMethod,
) -> Result<EigenDecomposition<Complex64>> {
    match method {
        EigenMethod::TridiagonalQl => eigen_ql(h.as_matrix()),
        EigenMethod::Jacobi => eigen_jacobi(h.as_matrix()),
    }
}

/// Ascending eigenvalues without eigenvectors.
pub fn herm_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    eigenvalues_ql(h.as_matrix())
}

pub fn sym_eigen(s: &SymmetricMatrix) -> Result<EigenDecomposition<f64>> {
    eigen_ql(s.as_matrix())
}

pub fn sym_eigen_with(s: &SymmetricMatrix, method: EigenMethod) -> Result<EigenDecomposition<f64>> {
    match method {
        EigenMethod::TridiagonalQl => eigen_ql(s.as_matrix()),
        EigenMethod::Jacobi => eigen_jacobi(s.as_matrix()),
    }
}

pub fn sym_eigenvalues(s: &SymmetricMatrix) -> Result<Vec<f64>> {
    eigenvalues_ql(s.as_matrix())
}

pub fn herm_lambda_min(h: &HermitianMatrix) -> Result<f64> {
    Ok(herm_eigenvalues(h)?[0])
}

pub fn herm_lambda_max(h: &HermitianMatrix) -> Result<f64> {
    Ok(*herm_eigenvalues(h)?.last().expect("non-empty"))
}

/// Spectral norm of a symmetric matrix.
pub fn sym_op_norm(s: &SymmetricMatrix) -> Result<f64> {
    let ev = sym_eigenvalues(s)?;
    Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
}

/// Symmetric PSD square root. Eigenvalues in `[−tol, 0)` are clipped to zero.
pub fn psd_sqrt(s: &SymmetricMatrix, tol: f64) -> Result<SymmetricMatrix> {
    let e = sym_eigen(s)?;
    let lambda_min = e.eigenvalues[0];
    if lambda_min < -tol {
        return Err(Error::NotPsd { lambda_min });
    }
    SymmetricMatrix::new(e.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Moore–Penrose pseudo-inverse through the eigendecomposition; eigenvalues
/// with `|λ| ≤ rel_cutoff·max|λ|` are sent to zero.
pub fn pinv_herm(h: &HermitianMatrix, rel_cutoff: f64) -> Result<HermitianMatrix> {
    Ok(pinv_herm_report(h, rel_cutoff)?.0)
}

/// As [`pinv_herm`], also returning the number of directions dropped.
pub fn pinv_herm_report(h: &HermitianMatrix, rel_cutoff: f64) -> Result<(HermitianMatrix, usize)> {
    let e = herm_eigen(h)?;
    let scale = e.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let cut = rel_cutoff * scale;
    let dropped = e.eigenvalues.iter().filter(|l| l.abs() <= cut).count();
    let inv = e.reconstruct_with(|l| if l.abs() <= cut { 0.0 } else { 1.0 / l });
    Ok((HermitianMatrix::new(inv)?, dropped))
}

/// `log det S` as a sum of log-eigenvalues.
pub fn log_det_spd(s: &SymmetricMatrix) -> Result<f64> {
    let ev = sym_eigenvalues(s)?;
    if ev[0] <= 0.0 {
        return Err(Error::NotPd { lambda_min: ev[0] });
    }
    Ok(ev.iter().map(|l| l.ln()).sum())
}

/// `[[Re H, −Im H], [Im H, Re H]]`.
pub fn real_embed(h: &HermitianMatrix) -> SymmetricMatrix {
    let d = h.dim();
    let m = Matrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = h.get(i % d, j % d);
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    SymmetricMatrix::new(m).expect("embedding of a Hermitian matrix is symmetric")
}

/// Lower Cholesky factor of a Hermitian positive definite matrix, or `None`
/// when a pivot is not strictly positive.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.rows();
    let mut l = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j).re();
        for k in 0..j {
            d -= l.get(j, k).abs_sq();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l.set(j, j, T::from_re(djj));
        let inv = 1.0 / djj;
        for i in j + 1..n {
            let mut s = a.get(i, j);
            let (li, lj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= li[k] * lj[k].conj();
            }
            l.set(i, j, s.scale(inv));
        }
    }
    Some(l)
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
pub fn cholesky_inverse<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    // Linv lower triangular, by forward substitution column by column.
    let mut linv = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        linv.set(j, j, T::from_re(1.0 / l.get(j, j).re()));
        for i in j + 1..n {
            let mut s = T::zero();
            for k in j..i {
                s += l.get(i, k) * linv.get(k, j);
            }
            linv.set(i, j, (-s).scale(1.0 / l.get(i, i).re()));
        }
    }
    // A⁻¹ = Linvᴴ Linv
    let mut out = Matrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = T::zero();
            for k in j..n {
                s += linv.get(k, i).conj() * linv.get(k, j);
            }
            out.set(i, j, s);
            out.set(j, i, s.conj());
        }
    }
    out
}

/// Solve `A x = b` given the lower Cholesky factor of `A`.
pub fn cholesky_solve(l: &Matrix<f64>, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let s: f64 = row[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
        y[i] = (y[i] - s) / row[i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn ij2() -> HermitianMatrix {
        HermitianMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C::new(0.0, 1.0),
            (1, 0) => C::new(0.0, -1.0),
            _ => C::new(0.0, 0.0),
        })
        .unwrap()
    }

    #[test]
    fn ij2_spectrum() {
        let ev = herm_eigenvalues(&ij2()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_spectrum() {
        let ev = herm_eigenvalues(&HermitianMatrix::identity(4)).unwrap();
        assert_eq!(ev, vec![1.0; 4]);
    }

    #[test]
    fn small_symmetric_examples() {
        let ev = sym_eigenvalues(&SymmetricMatrix::diag(&[3.0, 1.0])).unwrap();
        assert_eq!(ev, vec![1.0, 3.0]);
        let s = SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ev = sym_eigenvalues(&s).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psd_sqrt_examples() {
        let r = psd_sqrt(&SymmetricMatrix::identity(4), 1e-12).unwrap();
        assert!(r.as_matrix().sub(&Matrix::identity(4)).max_abs() < 1e-15);
        let r = psd_sqrt(&SymmetricMatrix::diag(&[4.0, 9.0]), 1e-12).unwrap();
        assert!((r.get(0, 0) - 2.0).abs() < 1e-15 && (r.get(1, 1) - 3.0).abs() < 1e-15);
        assert!(r.get(0, 1).abs() < 1e-15);
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        match psd_sqrt(&SymmetricMatrix::diag(&[1.0, -0.5]), 1e-8) {
            Err(Error::NotPsd { lambda_min }) => assert!((lambda_min + 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        // within tolerance: clipped
        let r = psd_sqrt(&SymmetricMatrix::diag(&[1.0, -1e-12]), 1e-8).unwrap();
        assert_eq!(r.get(1, 1), 0.0);
    }

    #[test]
    fn pinv_rank_deficient() {
        let h = HermitianMatrix::identity(2).add(&ij2());
        let (p, dropped) = pinv_herm_report(&h, DEFAULT_PINV_CUTOFF).unwrap();
        assert_eq!(dropped, 1);
        // H = 2·P₊ so H⁻ = P₊/2 = H/4.
        let want = h.scale(0.25);
        assert!(p.sub(&want).as_matrix().max_abs() < 1e-15);
    }

    #[test]
    fn pinv_diag() {
        let h = SymmetricMatrix::diag(&[2.0, 5.0]).to_hermitian();
        let p = pinv_herm(&h, DEFAULT_PINV_CUTOFF).unwrap();
        assert!((p.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((p.get(1, 1).re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(log_det_spd(&SymmetricMatrix::identity(6)).unwrap(), 0.0);
        let e = std::f64::consts::E;
        let v = log_det_spd(&SymmetricMatrix::diag(&[e, e * e])).unwrap();
        assert!((v - 3.0).abs() < 1e-14);
        assert!(matches!(
            log_det_spd(&SymmetricMatrix::diag(&[1.0, 0.0])),
            Err(Error::NotPd { .. })
        ));
    }

    #[test]
    fn real_embed_examples() {
        let ev = sym_eigenvalues(&real_embed(&ij2())).unwrap();
        for (x, y) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((x - y).abs() < 1e-14);
        }
        let s = SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let e = real_embed(&s.to_hermitian());
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i < 2) == (j < 2) { s.get(i % 2, j % 2) } else { 0.0 };
                assert_eq!(e.get(i, j), want);
            }
        }
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = Matrix::from_rows(&[
            vec![4.0, 2.0, 0.4],
            vec![2.0, 5.0, 1.0],
            vec![0.4, 1.0, 3.0],
        ])
        .unwrap();
        let l = cholesky(&a).unwrap();
        assert!(l.matmul(&l.transpose()).sub(&a).max_abs() < 1e-14);
        let inv = cholesky_inverse(&l);
        assert!(inv.matmul(&a).sub(&Matrix::identity(3)).max_abs() < 1e-14);
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0]);
        let back = a.matvec(&x);
        for (b, w) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - w).abs() < 1e-14);
        }
        assert!(cholesky(&Matrix::diag(&[1.0, -1.0])).is_none());
    }

    #[test]
    fn complex_cholesky_inverse() {
        let h = HermitianMatrix::identity(2).scale(2.0).add(&ij2());
        let l = cholesky(h.as_matrix()).unwrap();
        let inv = cholesky_inverse(&l);
        let prod = inv.matmul(h.as_matrix());
        assert!(prod.sub(&Matrix::identity(2)).max_abs() < 1e-14);
    }
}
