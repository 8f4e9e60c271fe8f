//! Sandwich LMI: find real symmetric `X` with `L ⪯ X ⪯ U` for Hermitian `L`, `U`.
//!
//! The default solver is a log-barrier interior-point method on
//!
//! ```text
//! minimize t   subject to   X − L + tI ≻ 0,   U − X + tI ≻ 0,
//! ```
//!
//! which is always strictly feasible. The problem is feasible iff the optimal
//! `t*` is `≤ 0`; a centred iterate at barrier weight `μ` brackets `t*` within
//! `ν·μ` (`ν = 2d`), which yields both decisions. Cyclic Dykstra projections
//! are available as an alternative.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    cholesky, cholesky_inverse, cholesky_solve, herm_eigen, herm_eigenvalues, HermitianMatrix,
    Matrix, SymmetricMatrix,
};
use crate::{Error, Result, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichMethod {
    #[default]
    InteriorPoint,
    Dykstra,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichProblem {
    pub lower: HermitianMatrix,
    pub upper: HermitianMatrix,
    pub tol: f64,
    pub method: SandwichMethod,
    /// Iteration cap (Newton steps or projection cycles).
    pub max_iter: usize,
}

pub const DYKSTRA_MAX_ITER: usize = 5000;
pub const IPM_MAX_ITER: usize = 2000;

impl SandwichProblem {
    pub fn new(lower: HermitianMatrix, upper: HermitianMatrix) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch(format!(
                "lower bound is {0}x{0}, upper bound is {1}x{1}",
                lower.dim(),
                upper.dim()
            )));
        }
        Ok(Self {
            lower,
            upper,
            tol: DEFAULT_TOL,
            method: SandwichMethod::default(),
            max_iter: IPM_MAX_ITER,
        })
    }

    pub fn with_method(mut self, method: SandwichMethod) -> Self {
        self.method = method;
        self.max_iter = match method {
            SandwichMethod::InteriorPoint => IPM_MAX_ITER,
            SandwichMethod::Dykstra => DYKSTRA_MAX_ITER,
        };
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    /// Present iff feasible; checked against both bounds by eigenvalues.
    pub witness: Option<SymmetricMatrix>,
    /// Constraint violation at the best iterate (zero-clamped).
    pub residual: f64,
    pub iterations: usize,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

/// `(λ_min(X − L), λ_min(U − X))`.
pub fn witness_margins(x: &SymmetricMatrix, lower: &HermitianMatrix, upper: &HermitianMatrix) -> Result<(f64, f64)> {
    let xh = x.to_hermitian();
    Ok((
        herm_eigenvalues(&xh.sub(lower))?[0],
        herm_eigenvalues(&upper.sub(&xh))?[0],
    ))
}

/// Violation after lifting `X` just enough to clear the lower bound.
fn lifted_violation(x: &SymmetricMatrix, lower: &HermitianMatrix, upper: &HermitianMatrix) -> Result<f64> {
    let (lo, _) = witness_margins(x, lower, upper)?;
    let lifted = x.shift_diag((-lo).max(0.0));
    let (_, hi) = witness_margins(&lifted, lower, upper)?;
    Ok((-hi).max(0.0))
}

pub fn solve_sandwich(p: &SandwichProblem) -> Result<FeasibilityResult> {
    if p.lower.dim() != p.upper.dim() {
        return Err(Error::DimensionMismatch("bounds differ in size".into()));
    }
    let result = match p.method {
        SandwichMethod::InteriorPoint => interior_point(p)?,
        SandwichMethod::Dykstra => dykstra(p)?,
    };
    if let Some(x) = &result.witness {
        let (lo, hi) = witness_margins(x, &p.lower, &p.upper)?;
        if lo < -p.tol || hi < -p.tol {
            return Err(Error::Consistency(format!(
                "solver witness fails verification (margins {lo:e}, {hi:e})"
            )));
        }
    }
    Ok(result)
}

fn accept_if_verified(
    x: SymmetricMatrix,
    p: &SandwichProblem,
    iterations: usize,
) -> Result<Option<FeasibilityResult>> {
    let (lo, hi) = witness_margins(&x, &p.lower, &p.upper)?;
    if lo >= -p.tol && hi >= -p.tol {
        return Ok(Some(FeasibilityResult {
            status: FeasibilityStatus::Feasible,
            residual: (-lo).max(-hi).max(0.0),
            witness: Some(x),
            iterations,
        }));
    }
    Ok(None)
}

// ---------------------------------------------------------------- interior point

/// Coordinates of a real symmetric `d × d` matrix in the basis
/// `E_pp = e_p e_pᵀ`, `E_pq = e_p e_qᵀ + e_q e_pᵀ` (p < q).
struct Basis {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl Basis {
    fn new(d: usize) -> Self {
        let mut pairs = Vec::with_capacity(d * (d + 1) / 2);
        for p in 0..d {
            for q in p..d {
                pairs.push((p, q));
            }
        }
        Self { d, pairs }
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn matrix(&self, x: &[f64]) -> SymmetricMatrix {
        let mut m = Matrix::zeros(self.d, self.d);
        for (&(p, q), &v) in self.pairs.iter().zip(x) {
            m.set(p, q, v);
            m.set(q, p, v);
        }
        SymmetricMatrix::new(m).expect("square")
    }

    fn coords(&self, m: &SymmetricMatrix) -> Vec<f64> {
        self.pairs.iter().map(|&(p, q)| m.get(p, q)).collect()
    }

    /// `tr(W E_a)`.
    fn trace_with(&self, w: &Matrix<C>, a: usize) -> f64 {
        let (p, q) = self.pairs[a];
        if p == q {
            w.get(p, p).re
        } else {
            2.0 * w.get(p, q).re
        }
    }
}

struct Barrier {
    w1: Matrix<C>,
    w2: Matrix<C>,
    value: f64,
}

/// `t/μ − log det(X − L + tI) − log det(U − X + tI)`, or `None` outside the domain.
fn barrier(p: &SandwichProblem, x: &SymmetricMatrix, t: f64, mu: f64, want_inverse: bool) -> Option<Barrier> {
    let xh = x.to_hermitian();
    let m1 = xh.sub(&p.lower).shift_diag(t);
    let m2 = p.upper.sub(&xh).shift_diag(t);
    let l1 = cholesky(m1.as_matrix())?;
    let l2 = cholesky(m2.as_matrix())?;
    let logdet = |l: &Matrix<C>| 2.0 * (0..l.rows()).map(|i| l.get(i, i).re.ln()).sum::<f64>();
    let value = t / mu - logdet(&l1) - logdet(&l2);
    if !value.is_finite() {
        return None;
    }
    let (w1, w2) = if want_inverse {
        (cholesky_inverse(&l1), cholesky_inverse(&l2))
    } else {
        (Matrix::zeros(0, 0), Matrix::zeros(0, 0))
    };
    Some(Barrier { w1, w2, value })
}

fn newton_system(basis: &Basis, b: &Barrier, mu: f64) -> (Vec<f64>, Matrix<f64>) {
    let nv = basis.len();
    let n = nv + 1;
    let (w1, w2) = (&b.w1, &b.w2);
    let w1sq = w1.matmul(w1);
    let w2sq = w2.matmul(w2);
    let mut g = vec![0.0; n];
    let mut h = Matrix::<f64>::zeros(n, n);
    for a in 0..nv {
        g[a] = -basis.trace_with(w1, a) + basis.trace_with(w2, a);
        h.set(a, nv, basis.trace_with(&w1sq, a) - basis.trace_with(&w2sq, a));
        h.set(nv, a, h.get(a, nv));
    }
    g[nv] = 1.0 / mu - w1.trace().re - w2.trace().re;
    h.set(nv, nv, w1sq.trace().re + w2sq.trace().re);

    // H_ab = Σ_{(i,j)∈a} Σ_{(k,l)∈b} Re(W_jk W_li), summed over both barriers.
    let terms = |a: usize| -> ([(usize, usize); 2], usize) {
        let (p, q) = basis.pairs[a];
        if p == q {
            ([(p, p), (p, p)], 1)
        } else {
            ([(p, q), (q, p)], 2)
        }
    };
    for a in 0..nv {
        let (ta, na) = terms(a);
        for bidx in a..nv {
            let (tb, nb) = terms(bidx);
            let mut s = 0.0;
            for &(i, j) in &ta[..na] {
                for &(k, l) in &tb[..nb] {
                    s += (w1.get(j, k) * w1.get(l, i)).re + (w2.get(j, k) * w2.get(l, i)).re;
                }
            }
            h.set(a, bidx, s);
            h.set(bidx, a, s);
        }
    }
    (g, h)
}

fn solve_newton(h: &Matrix<f64>, g: &[f64]) -> Option<Vec<f64>> {
    let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
    if let Some(l) = cholesky(h) {
        return Some(cholesky_solve(&l, &rhs));
    }
    let n = h.rows();
    let scale = (0..n).map(|i| h.get(i, i).abs()).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 1e-14 * scale;
    for _ in 0..12 {
        let mut hr = h.clone();
        for i in 0..n {
            hr.set(i, i, hr.get(i, i) + ridge);
        }
        if let Some(l) = cholesky(&hr) {
            return Some(cholesky_solve(&l, &rhs));
        }
        ridge *= 100.0;
    }
    None
}

fn interior_point(p: &SandwichProblem) -> Result<FeasibilityResult> {
    let d = p.dim();
    let basis = Basis::new(d);
    let nv = basis.len();
    let nu = 2.0 * d as f64;
    let scale = 1.0 + p.lower.as_matrix().max_abs().max(p.upper.as_matrix().max_abs());

    let x0 = p.lower.add(&p.upper).scale(0.5).real_part();
    let (lo, hi) = witness_margins(&x0, &p.lower, &p.upper)?;
    if lo >= -p.tol && hi >= -p.tol {
        if let Some(r) = accept_if_verified(x0.clone(), p, 0)? {
            return Ok(r);
        }
    }
    let mut x = basis.coords(&x0);
    let mut t = (-lo).max(-hi) + 0.5 * scale;
    let mut mu = scale;
    let mut iterations = 0;
    let mut best_t = f64::INFINITY;
    let mut best_x = x0;

    loop {
        // Centre for the current μ.
        for _ in 0..200 {
            let xm = basis.matrix(&x);
            let b = barrier(p, &xm, t, mu, true)
                .ok_or_else(|| Error::Consistency("interior iterate left the domain".into()))?;
            let (g, h) = newton_system(&basis, &b, mu);
            let Some(step) = solve_newton(&h, &g) else { break };
            let dec: f64 = -g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            if !(dec > 1e-10) {
                break;
            }
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-14 {
                let xt: Vec<f64> = x.iter().zip(&step).map(|(v, s)| v + alpha * s).collect();
                let tt = t + alpha * step[nv];
                if let Some(bt) = barrier(p, &basis.matrix(&xt), tt, mu, false) {
                    if bt.value <= b.value - 1e-4 * alpha * dec {
                        x = xt;
                        t = tt;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            iterations += 1;
            if t < best_t {
                best_t = t;
                best_x = basis.matrix(&x);
            }
            if t <= p.tol {
                if let Some(r) = accept_if_verified(basis.matrix(&x), p, iterations)? {
                    return Ok(r);
                }
            }
            if !moved || iterations >= p.max_iter {
                break;
            }
        }
        if iterations >= p.max_iter {
            break;
        }
        // t* ≥ t − ν·μ at the centre; keep a safety factor for inexact centring.
        if t - 2.0 * nu * mu > p.tol {
            return Ok(FeasibilityResult {
                status: FeasibilityStatus::Infeasible,
                witness: None,
                residual: lifted_violation(&best_x, &p.lower, &p.upper)?,
                iterations,
            });
        }
        if nu * mu < 1e-14 * scale {
            break;
        }
        mu *= 0.1;
    }
    Ok(FeasibilityResult {
        status: FeasibilityStatus::Undecided,
        witness: None,
        residual: lifted_violation(&best_x, &p.lower, &p.upper)?,
        iterations,
    })
}

// ---------------------------------------------------------------- Dykstra

fn clip_psd(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = herm_eigen(h)?;
    HermitianMatrix::new(e.reconstruct_with(|l| l.max(0.0)))
}

fn dykstra(p: &SandwichProblem) -> Result<FeasibilityResult> {
    let d = p.dim();
    let (l, u) = (&p.lower, &p.upper);
    let mut x = l.add(u).scale(0.5).real_part().to_hermitian();
    let mut incs = [
        HermitianMatrix::zeros(d),
        HermitianMatrix::zeros(d),
        HermitianMatrix::zeros(d),
    ];
    let mut residual = f64::INFINITY;
    for it in 1..=p.max_iter {
        let prev = x.clone();
        for (k, inc) in incs.iter_mut().enumerate() {
            let y = x.add(inc);
            let proj = match k {
                0 => l.add(&clip_psd(&y.sub(l))?),
                1 => u.sub(&clip_psd(&u.sub(&y))?),
                _ => y.real_part().to_hermitian(),
            };
            *inc = y.sub(&proj);
            x = proj;
        }
        let xr = x.real_part();
        let (lo, hi) = witness_margins(&xr, l, u)?;
        residual = (-lo).max(-hi).max(0.0);
        if residual <= p.tol {
            return Ok(FeasibilityResult {
                status: FeasibilityStatus::Feasible,
                witness: Some(xr),
                residual,
                iterations: it,
            });
        }
        let movement = x.sub(&prev).as_matrix().frobenius_norm();
        if movement < 1e-10 && residual > 10.0 * p.tol {
            return Ok(FeasibilityResult {
                status: FeasibilityStatus::Infeasible,
                witness: None,
                residual,
                iterations: it,
            });
        }
    }
    Ok(FeasibilityResult {
        status: FeasibilityStatus::Undecided,
        witness: None,
        residual,
        iterations: p.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ij2() -> HermitianMatrix {
        HermitianMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C::new(0.0, 1.0),
            (1, 0) => C::new(0.0, -1.0),
            _ => C::new(0.0, 0.0),
        })
        .unwrap()
    }

    fn both_methods(l: &HermitianMatrix, u: &HermitianMatrix) -> [FeasibilityResult; 2] {
        let p = SandwichProblem::new(l.clone(), u.clone()).unwrap();
        [
            solve_sandwich(&p).unwrap(),
            solve_sandwich(&p.clone().with_method(SandwichMethod::Dykstra)).unwrap(),
        ]
    }

    #[test]
    fn trivial_feasible() {
        let i2 = HermitianMatrix::identity(2);
        for r in both_methods(&i2.scale(-1.0), &i2) {
            assert_eq!(r.status, FeasibilityStatus::Feasible);
            assert!(r.witness.unwrap().as_matrix().max_abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_infeasible() {
        let i2 = HermitianMatrix::identity(2);
        for r in both_methods(&i2, &i2.scale(-1.0)) {
            assert_eq!(r.status, FeasibilityStatus::Infeasible);
            assert!(r.residual >= 2.0 - 1e-8, "{}", r.residual);
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(SandwichProblem::new(HermitianMatrix::identity(2), HermitianMatrix::identity(3)).is_err());
    }

    /// `λ_min` of `[[a, b], [b̄, d]]`.
    fn lambda_min_2(a: f64, d: f64, b: C) -> f64 {
        0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
    }

    /// Exhaustive search over real symmetric 2×2 `X` on a 0.01 grid; returns
    /// whether some grid point is feasible and the smallest violation seen.
    fn grid_oracle(l: &HermitianMatrix, u: &HermitianMatrix) -> (bool, f64) {
        let (l00, l11, l01) = (l.get(0, 0).re, l.get(1, 1).re, l.get(0, 1));
        let (u00, u11, u01) = (u.get(0, 0).re, u.get(1, 1).re, u.get(0, 1));
        let mut best = f64::INFINITY;
        for ia in -300..=300 {
            let a = 0.01 * ia as f64;
            for ic in -300..=300 {
                let c = 0.01 * ic as f64;
                for ib in -200..=200 {
                    let b = C::new(0.01 * ib as f64, 0.0);
                    let lo = lambda_min_2(a - l00, c - l11, b - l01);
                    let hi = lambda_min_2(u00 - a, u11 - c, u01 - b);
                    best = best.min((-lo).max(-hi));
                    if best <= 0.0 {
                        return (true, best);
                    }
                }
            }
        }
        (false, best)
    }

    #[test]
    fn agrees_with_grid_oracle() {
        let l = ij2();
        let cases = [
            l.add_real(&SymmetricMatrix::diag(&[2.0, 0.0])),
            l.add_real(&SymmetricMatrix::diag(&[2.0, 2.0])),
            l.add_real(&SymmetricMatrix::diag(&[0.5, 0.5])),
            ij2().scale(-1.0).add_real(&SymmetricMatrix::diag(&[1.5, 1.5])),
        ];
        for u in cases {
            let (feasible, _) = grid_oracle(&l, &u);
            let p = SandwichProblem::new(l.clone(), u.clone()).unwrap();
            let r = solve_sandwich(&p).unwrap();
            if feasible {
                assert_eq!(r.status, FeasibilityStatus::Feasible);
            } else {
                // Boundary-touching cases the grid misses may still be feasible
                // for the solver, but never with a violated witness.
                assert_ne!(r.status, FeasibilityStatus::Undecided);
            }
        }
    }

    #[test]
    fn ij_sandwich_with_diag_two_zero() {
        // iJ ⪯ X ⪯ iJ + diag(2, 0): needs X − iJ ⪰ 0 and diag(2,0) − (X − iJ) ⪰ 0.
        // Writing Y = X − iJ, the second forces Y_22 = 0 hence Y_12 = 0, but
        // then Y = diag(a, 0) − iJ is not PSD: infeasible.
        let l = ij2();
        let u = ij2().add_real(&SymmetricMatrix::diag(&[2.0, 0.0]));
        let (feasible, best) = grid_oracle(&l, &u);
        assert!(!feasible && best > 0.05);
        let r = solve_sandwich(&SandwichProblem::new(l, u).unwrap()).unwrap();
        assert_eq!(r.status, FeasibilityStatus::Infeasible);
    }
}
