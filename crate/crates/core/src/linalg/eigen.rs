//! Hermitian eigensolvers.
//!
//! The default route reduces the matrix to real tridiagonal form with
//! Householder reflectors (working on the upper triangle only, with the
//! rank-2 update of one step fused into the matrix-vector product of the
//! next) and finishes with implicit QL. Cyclic Jacobi is kept as an
//! independent second route.

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::scalar::Scalar;
use crate::{Error, Result};

/// Eigenvalues ascending; column `k` of `eigenvectors` belongs to `eigenvalues[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    /// Largest `‖H v_k − λ_k v_k‖₂` over all pairs.
    pub fn residual(&self, h: &Matrix<T>) -> f64 {
        let v = &self.eigenvectors;
        let hv = h.matmul(v);
        let n = v.rows();
        (0..v.cols())
            .map(|k| {
                (0..n)
                    .map(|i| (hv.get(i, k) - v.get(i, k).scale(self.eigenvalues[k])).abs_sq())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max |VᴴV − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let g = v.adjoint().matmul(v);
        let mut r: f64 = 0.0;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let target = if i == j { T::one() } else { T::zero() };
                r = r.max((g.get(i, j) - target).abs());
            }
        }
        r
    }

    /// `V diag(f(λ)) Vᴴ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix<T> {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            let vi = v.row(i);
            for j in i..n {
                let vj = v.row(j);
                let mut acc = T::zero();
                for k in 0..fl.len() {
                    if fl[k] != 0.0 {
                        acc += vi[k].scale(fl[k]) * vj[k].conj();
                    }
                }
                out.set(i, j, acc);
                out.set(j, i, acc.conj());
            }
        }
        out
    }
}

/// Iteration budget of the QL sweep, per eigenvalue.
const QL_MAX_ITER: usize = 60;

/// Jacobi sweep cap and relative off-diagonal stopping threshold.
pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const JACOBI_REL_TOL: f64 = 1e-13;

struct Tridiagonal<T> {
    diag: Vec<f64>,
    /// `sub[k]` is the (k+1, k) entry before phase normalization.
    sub: Vec<T>,
    /// Reflector scalars; the reflector vectors live in the rows of the work matrix.
    tau: Vec<f64>,
}

#[inline]
fn update_row<T: Scalar>(row: &mut [T], i: usize, u: &[T], w: &[T]) {
    // row[j] -= u_i conj(w_j) + w_i conj(u_j), j ≥ i
    let (ui, wi) = (u[i], w[i]);
    for ((r, &uj), &wj) in row[i..].iter_mut().zip(&u[i..]).zip(&w[i..]) {
        *r -= ui * wj.conj() + wi * uj.conj();
    }
}

/// Householder reduction of a Hermitian matrix given in full row-major
/// storage (only the upper triangle is read). On return row `k` of `a`
/// holds the reflector vector of step `k` in columns `k+1..n`.
fn tridiagonalize<T: Scalar>(a: &mut [T], n: usize) -> Tridiagonal<T> {
    let mut diag = vec![0.0; n];
    let mut sub = vec![T::zero(); n.saturating_sub(1)];
    let mut tau = vec![0.0; n.saturating_sub(1)];
    let mut pending: Option<(Vec<T>, Vec<T>)> = None;
    let mut p = vec![T::zero(); n];

    for k in 0..n {
        if let Some((u, w)) = &pending {
            update_row(&mut a[k * n..(k + 1) * n], k, u, w);
        }
        diag[k] = a[k * n + k].re();
        if k + 1 == n {
            break;
        }

        let tail = &a[k * n + k + 1..(k + 1) * n];
        let alpha = tail.iter().map(|v| v.abs_sq()).sum::<f64>().sqrt();
        let x0 = tail[0].conj();
        let x0_abs = x0.abs();
        let reflect = tail[1..].iter().any(|v| *v != T::zero());

        if !reflect {
            sub[k] = x0;
            if let Some((u, w)) = pending.take() {
                for i in k + 1..n {
                    update_row(&mut a[i * n..(i + 1) * n], i, &u, &w);
                }
            }
            // Leave a zero reflector in row k.
            for v in &mut a[k * n + k + 1..(k + 1) * n] {
                *v = T::zero();
            }
            continue;
        }

        let phase = if x0_abs > 0.0 {
            x0.scale(1.0 / x0_abs)
        } else {
            T::one()
        };
        let mut u = vec![T::zero(); n];
        for (j, v) in a[k * n + k + 1..(k + 1) * n].iter().enumerate() {
            u[k + 1 + j] = v.conj();
        }
        u[k + 1] += phase.scale(alpha);
        sub[k] = -phase.scale(alpha);
        let t = 1.0 / (alpha * (alpha + x0_abs));
        tau[k] = t;
        a[k * n + k + 1..(k + 1) * n].copy_from_slice(&u[k + 1..]);

        // Fused: apply the previous rank-2 update row by row, then use the
        // fresh row for the symmetric product p = B u.
        p[k + 1..].iter_mut().for_each(|v| *v = T::zero());
        for i in k + 1..n {
            let row = &mut a[i * n..(i + 1) * n];
            if let Some((pu, pw)) = &pending {
                update_row(row, i, pu, pw);
            }
            let ui = u[i];
            let mut acc = T::from_re(row[i].re()) * ui;
            for ((&bij, &uj), pj) in row[i + 1..]
                .iter()
                .zip(&u[i + 1..])
                .zip(&mut p[i + 1..])
            {
                acc += bij * uj;
                *pj += bij.conj() * ui;
            }
            p[i] += acc;
        }
        let mut kdot = 0.0;
        for i in k + 1..n {
            p[i] = p[i].scale(t);
            kdot += (u[i].conj() * p[i]).re();
        }
        let kk = 0.5 * t * kdot;
        let mut w = vec![T::zero(); n];
        for i in k + 1..n {
            w[i] = p[i] - u[i].scale(kk);
        }
        pending = Some((u, w));
    }
    Tridiagonal { diag, sub, tau }
}

/// Phase-normalize the sub-diagonal: returns `(|sub|, δ)` with `T = D T_r Dᴴ`.
fn normalize_phases<T: Scalar>(sub: &[T], n: usize) -> (Vec<f64>, Vec<T>) {
    let mut e = vec![0.0; n];
    let mut delta = vec![T::one(); n];
    for k in 0..sub.len() {
        let b = sub[k].abs();
        e[k] = b;
        delta[k + 1] = if b > 0.0 {
            delta[k] * sub[k].scale(1.0 / b)
        } else {
            delta[k]
        };
    }
    (e, delta)
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[i]` couples
/// `i` and `i+1`, `e[n-1]` is ignored. When `zt` is given its rows are
/// rotated alongside (row `i` ↔ basis vector `i`).
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn check_input<T: Scalar>(h: &Matrix<T>) -> Result<usize> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    if h.as_slice().iter().any(|v| !v.re().is_finite() || !v.im().is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(h.rows())
}

/// Eigenvalues only, ascending (tridiagonal + QL).
pub fn eigenvalues_ql<T: Scalar>(h: &Matrix<T>) -> Result<Vec<f64>> {
    let n = check_input(h)?;
    let mut a = h.as_slice().to_vec();
    let tri = tridiagonalize(&mut a, n);
    let (mut e, _) = normalize_phases(&tri.sub, n);
    let mut d = tri.diag;
    tql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Full decomposition (tridiagonal + QL + back-transformation).
pub fn eigen_ql<T: Scalar>(h: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let n = check_input(h)?;
    let mut a = h.as_slice().to_vec();
    let tri = tridiagonalize(&mut a, n);
    let (mut e, delta) = normalize_phases(&tri.sub, n);
    let mut d = tri.diag;
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut zt))?;

    // Y = D Z, row-major: Y[i][col] = δ_i Z[i][col] = δ_i zt[col][i].
    let order = ascending_order(&d);
    let mut y = vec![T::zero(); n * n];
    for (col, &src) in order.iter().enumerate() {
        let zrow = &zt[src * n..(src + 1) * n];
        for i in 0..n {
            y[i * n + col] = delta[i].scale(zrow[i]);
        }
    }
    // V = H_0 ⋯ H_{n-2} Y.
    let mut r = vec![T::zero(); n];
    for k in (0..n.saturating_sub(1)).rev() {
        let t = tri.tau[k];
        if t == 0.0 {
            continue;
        }
        let u = &a[k * n + k + 1..(k + 1) * n];
        r.iter_mut().for_each(|v| *v = T::zero());
        for (off, &ui) in u.iter().enumerate() {
            let cu = ui.conj();
            let yrow = &y[(k + 1 + off) * n..(k + 2 + off) * n];
            for (rj, &yv) in r.iter_mut().zip(yrow) {
                *rj += cu * yv;
            }
        }
        for (off, &ui) in u.iter().enumerate() {
            let f = ui.scale(t);
            let yrow = &mut y[(k + 1 + off) * n..(k + 2 + off) * n];
            for (yv, &rj) in yrow.iter_mut().zip(&r) {
                *yv -= f * rj;
            }
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: order.iter().map(|&i| d[i]).collect(),
        eigenvectors: Matrix::from_vec(n, n, y)?,
    })
}

/// Cyclic Jacobi: sweeps over all pairs until the off-diagonal Frobenius
/// mass drops below `JACOBI_REL_TOL·‖H‖_F`.
pub fn eigen_jacobi<T: Scalar>(h: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let n = check_input(h)?;
    let mut a = h.clone();
    let mut v = Matrix::<T>::identity(n);
    let norm = h.frobenius_norm();
    let off = |a: &Matrix<T>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.get(i, j).abs_sq();
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    loop {
        let o = off(&a);
        if o <= JACOBI_REL_TOL * norm || o == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual: o,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let mag = apq.abs();
                if mag < f64::MIN_POSITIVE {
                    continue;
                }
                let ph = apq.scale(1.0 / mag);
                let (app, aqq) = (a.get(p, p).re(), a.get(q, q).re());
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.is_finite() {
                    1.0_f64.copysign(theta) / (theta.abs() + theta.hypot(1.0))
                } else {
                    0.0
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let cph = ph.conj();
                // A ← A W
                for r in 0..n {
                    let (x, y) = (a.get(r, p), a.get(r, q));
                    a.set(r, p, x.scale(c) - cph * y.scale(s));
                    a.set(r, q, x.scale(s) + cph * y.scale(c));
                }
                // A ← Wᴴ A
                for col in 0..n {
                    let (x, y) = (a.get(p, col), a.get(q, col));
                    a.set(p, col, x.scale(c) - ph * y.scale(s));
                    a.set(q, col, x.scale(s) + ph * y.scale(c));
                }
                a.set(p, q, T::zero());
                a.set(q, p, T::zero());
                a.set(p, p, T::from_re(a.get(p, p).re()));
                a.set(q, q, T::from_re(a.get(q, q).re()));
                // V ← V W
                for r in 0..n {
                    let (x, y) = (v.get(r, p), v.get(r, q));
                    v.set(r, p, x.scale(c) - cph * y.scale(s));
                    v.set(r, q, x.scale(s) + cph * y.scale(c));
                }
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re()).collect();
    let order = ascending_order(&diag);
    Ok(EigenDecomposition {
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors: Matrix::from_fn(n, n, |i, k| v.get(i, order[k])),
    })
}
