//! Separability and k-extendability of Gaussian covariance matrices through
//! sandwich LMIs, plus the maximum-k search.
//!
//! Extensions are always of the *second* subsystem; call
//! [`swap_subsystems`](crate::ensemble::swap_subsystems) first to extend the
//! first one.

mod sandwich;

pub use sandwich::{
    solve_sandwich, witness_margins, FeasibilityResult, FeasibilityStatus, SandwichMethod,
    SandwichProblem, DYKSTRA_MAX_ITER, IPM_MAX_ITER,
};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::ensemble::{blocks, signed_ij, ModeBipartition};
use crate::linalg::{herm_lambda_min, pinv_herm_report, HermitianMatrix, SymmetricMatrix, DEFAULT_PINV_CUTOFF};
use crate::spectra::ppt_defect;
use crate::{Error, Result, DEFAULT_TOL};

pub const DEFAULT_K_CAP: usize = 64;

/// Eigenvalues of `A ± iJ` below this are treated as a genuine violation
/// rather than round-off.
const BLOCK_PSD_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub method: SandwichMethod,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            method: SandwichMethod::default(),
        }
    }
}

impl SolveOptions {
    fn problem(&self, lower: HermitianMatrix, upper: HermitianMatrix) -> Result<SandwichProblem> {
        Ok(SandwichProblem::new(lower, upper)?
            .with_method(self.method)
            .with_tol(self.tol))
    }
}

fn ij_of(modes: usize, sign: f64) -> HermitianMatrix {
    signed_ij(&vec![sign; modes])
}

fn to_complex(m: &crate::linalg::Matrix<f64>) -> crate::linalg::Matrix<C> {
    m.map(|x| C::new(x, 0.0))
}

/// `Bᵀ (A + s·iJ)⁻ B` with the pseudo-inverse; also reports how many
/// directions the pseudo-inverse dropped.
fn schur_term(s: &SymmetricMatrix, part: ModeBipartition, sign: f64) -> Result<(HermitianMatrix, usize)> {
    let bl = blocks(s, part)?;
    let a = bl.a.to_hermitian().add(&ij_of(part.m, sign));
    let lambda_min = herm_lambda_min(&a)?;
    if lambda_min < -BLOCK_PSD_SLACK {
        return Err(Error::NotPsd { lambda_min });
    }
    let (inv, dropped) = pinv_herm_report(&a, DEFAULT_PINV_CUTOFF)?;
    let b = to_complex(&bl.b);
    let m = b.adjoint().matmul(inv.as_matrix()).matmul(&b);
    Ok((HermitianMatrix::new(m)?, dropped))
}

/// `Bᵀ (A + iJ)⁻ B`, the lower bound of the separability LMI.
pub fn lower_bound_matrix(s: &SymmetricMatrix, part: ModeBipartition) -> Result<HermitianMatrix> {
    Ok(schur_term(s, part, 1.0)?.0)
}

/// Upper bound of the k-extendability LMI.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperBound {
    pub matrix: HermitianMatrix,
    /// `A − iJ` had directions below the pseudo-inverse cutoff.
    pub near_singular: bool,
}

/// `k/(k−1)·(C − Bᵀ(A − iJ)⁻B) − iJ/(k−1)` for `k ≥ 2`.
pub fn upper_bound_k(s: &SymmetricMatrix, part: ModeBipartition, k: usize) -> Result<UpperBound> {
    if k < 2 {
        return Err(Error::Domain(format!("upper bound needs k ≥ 2, got {k}")));
    }
    let (schur, dropped) = schur_term(s, part, -1.0)?;
    let c = blocks(s, part)?.c.to_hermitian();
    let kf = k as f64;
    let matrix = c
        .sub(&schur)
        .scale(kf / (kf - 1.0))
        .sub(&ij_of(part.l, 1.0).scale(1.0 / (kf - 1.0)));
    Ok(UpperBound {
        matrix,
        near_singular: dropped > 0,
    })
}

pub fn is_separable(s: &SymmetricMatrix, part: ModeBipartition) -> Result<FeasibilityResult> {
    is_separable_with(s, part, &SolveOptions::default())
}

/// `Bᵀ(A + iJ)⁻B ⪯ θ ⪯ C + iJ` for some real symmetric `θ`.
pub fn is_separable_with(s: &SymmetricMatrix, part: ModeBipartition, opts: &SolveOptions) -> Result<FeasibilityResult> {
    let lower = lower_bound_matrix(s, part)?;
    let upper = blocks(s, part)?.c.to_hermitian().add(&ij_of(part.l, 1.0));
    solve_sandwich(&opts.problem(lower, upper)?)
}

fn trivially_feasible(iterations: usize) -> FeasibilityResult {
    FeasibilityResult {
        status: FeasibilityStatus::Feasible,
        witness: None,
        residual: 0.0,
        iterations,
    }
}

pub fn is_k_extendable(s: &SymmetricMatrix, part: ModeBipartition, k: usize) -> Result<FeasibilityResult> {
    is_k_extendable_with(s, part, k, &SolveOptions::default())
}

/// `iJ ⪯ Δ ⪯ U_k` for some real symmetric `Δ`. `k = 1` is feasible by convention.
pub fn is_k_extendable_with(
    s: &SymmetricMatrix,
    part: ModeBipartition,
    k: usize,
    opts: &SolveOptions,
) -> Result<FeasibilityResult> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if k == 1 {
        part.check(s.dim() / 2)?;
        return Ok(trivially_feasible(0));
    }
    let upper = upper_bound_k(s, part, k)?.matrix;
    solve_sandwich(&opts.problem(ij_of(part.l, 1.0), upper)?)
}

/// Largest k for which the state is k-extendable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxK {
    Exact(usize),
    /// Extendable at every probed k up to the cap.
    AtLeast(usize),
}

impl MaxK {
    /// Lower bound on k, usable as a histogram key.
    pub fn value(&self) -> usize {
        match *self {
            MaxK::Exact(k) | MaxK::AtLeast(k) => k,
        }
    }
}

impl fmt::Display for MaxK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxK::Exact(k) => write!(f, "{k}"),
            MaxK::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

impl FromStr for MaxK {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad max_k {s:?}")))
        };
        if let Some(rest) = t.strip_prefix(">=").or_else(|| t.strip_prefix('≥')) {
            Ok(MaxK::AtLeast(parse(rest)?))
        } else {
            Ok(MaxK::Exact(parse(t)?))
        }
    }
}

impl Serialize for MaxK {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MaxK::Exact(k) => ser.serialize_u64(*k as u64),
            MaxK::AtLeast(_) => ser.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for MaxK {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Int(k) => Ok(MaxK::Exact(k)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStatus {
    pub k: usize,
    pub status: FeasibilityStatus,
    pub residual: f64,
}

/// One line of the extendability JSON-lines output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendabilityReport {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub stream: Option<u64>,
    pub n: usize,
    pub partition: String,
    #[serde(default)]
    pub sigma: Option<f64>,
    pub separable: bool,
    pub separable_status: FeasibilityStatus,
    pub separable_residual: f64,
    pub ppt: bool,
    pub ppt_defect: f64,
    pub max_k: MaxK,
    pub k_cap: usize,
    pub per_k: Vec<KStatus>,
    /// Some probe was undecided and counted as infeasible.
    pub undecided: bool,
    /// Some pseudo-inverse dropped directions.
    pub near_singular: bool,
}

impl ExtendabilityReport {
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json_line(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Statuses never improve as k grows.
    pub fn is_monotone(&self) -> bool {
        let mut sorted = self.per_k.clone();
        sorted.sort_by_key(|p| p.k);
        let mut failed = false;
        for p in &sorted {
            let ok = p.status == FeasibilityStatus::Feasible;
            if ok && failed {
                return false;
            }
            failed |= !ok;
        }
        true
    }
}

pub fn max_extendability(s: &SymmetricMatrix, part: ModeBipartition, k_cap: usize) -> Result<ExtendabilityReport> {
    max_extendability_with(s, part, k_cap, &SolveOptions::default())
}

/// Separability, PPT and the largest feasible k in `[1, k_cap]` by doubling
/// then bisection. Undecided probes count as infeasible.
pub fn max_extendability_with(
    s: &SymmetricMatrix,
    part: ModeBipartition,
    k_cap: usize,
    opts: &SolveOptions,
) -> Result<ExtendabilityReport> {
    if k_cap < 1 {
        return Err(Error::Domain("k_cap must be at least 1".into()));
    }
    let n = s.dim() / 2;
    part.check(n)?;
    let defect = ppt_defect(s, part)?;
    let sep = is_separable_with(s, part, opts)?;
    let mut report = ExtendabilityReport {
        seed: None,
        stream: None,
        n,
        partition: part.to_string(),
        sigma: None,
        separable: sep.is_feasible(),
        separable_status: sep.status,
        separable_residual: sep.residual,
        ppt: defect >= -opts.tol,
        ppt_defect: defect,
        max_k: MaxK::AtLeast(k_cap),
        k_cap,
        per_k: Vec::new(),
        undecided: sep.status == FeasibilityStatus::Undecided,
        near_singular: false,
    };
    if report.separable {
        return Ok(report);
    }

    let probe = |k: usize, report: &mut ExtendabilityReport| -> Result<bool> {
        if k >= 2 {
            report.near_singular |= upper_bound_k(s, part, k)?.near_singular;
        }
        let r = is_k_extendable_with(s, part, k, opts)?;
        report.undecided |= r.status == FeasibilityStatus::Undecided;
        report.per_k.push(KStatus {
            k,
            status: r.status,
            residual: r.residual,
        });
        Ok(r.is_feasible())
    };

    // Largest known-feasible `lo` and smallest known-infeasible `hi`.
    let mut lo = 1;
    let mut hi = None;
    let mut k = 2;
    while k <= k_cap {
        if probe(k, &mut report)? {
            lo = k;
            if k == k_cap {
                break;
            }
            k = (2 * k).min(k_cap);
        } else {
            hi = Some(k);
            break;
        }
    }
    let Some(mut hi) = hi else {
        report.max_k = MaxK::AtLeast(k_cap);
        return Ok(report);
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut report)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    report.max_k = MaxK::Exact(lo);
    report.per_k.sort_by_key(|p| p.k);
    Ok(report)
}
