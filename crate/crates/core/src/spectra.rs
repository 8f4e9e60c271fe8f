//! Observables of a covariance matrix: ordinary and symplectic spectra,
//! purity, PPT and QCM defects.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ensemble::{signed_ij, symplectic_form, ModeBipartition, QuantumCovarianceMatrix};
use crate::io::{self, CsvDoc, Meta};
use crate::linalg::{herm_eigenvalues, herm_lambda_min, log_det_spd, psd_sqrt, sym_eigenvalues, SymmetricMatrix};
use crate::{Error, Result, DEFAULT_TOL};

/// Symplectic eigenvalues below this are reported as zero.
pub const SYMPLECTIC_ZERO: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Ordinary,
    Symplectic,
    PptDefect,
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ordinary => "ordinary",
            Self::Symplectic => "symplectic",
            Self::PptDefect => "ppt_defect",
        })
    }
}

impl std::str::FromStr for SpectrumKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordinary" => Ok(Self::Ordinary),
            "symplectic" => Ok(Self::Symplectic),
            "ppt_defect" => Ok(Self::PptDefect),
            _ => Err(Error::Parse(format!("unknown spectrum kind {s:?}"))),
        }
    }
}

pub const SPECTRUM_SCHEMA: &str = "rqcm.spectrum/1";

/// Ascending values of one kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub kind: SpectrumKind,
    pub values: Vec<f64>,
    /// Set when symplectic values were clipped to zero (singular `S`).
    #[serde(default)]
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Meta::is_empty")]
    pub meta: Meta,
}

impl SpectralSample {
    pub fn new(kind: SpectrumKind, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            kind,
            values,
            degenerate: false,
            meta: Meta::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut meta = self.meta.clone();
        meta.insert("kind".into(), self.kind.to_string());
        meta.insert("degenerate".into(), self.degenerate.to_string());
        let mut out = String::new();
        io::write_header(&mut out, SPECTRUM_SCHEMA, &meta);
        out.push_str("value\n");
        for v in &self.values {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let doc = CsvDoc::parse(s, SPECTRUM_SCHEMA)?;
        let mut meta = doc.meta.clone();
        meta.remove("kind");
        meta.remove("degenerate");
        Ok(Self {
            kind: doc.meta_str("kind")?.parse()?,
            values: doc.column_f64("value")?,
            degenerate: doc.meta_str("degenerate").map(|v| v == "true").unwrap_or(false),
            meta,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["schema"] = SPECTRUM_SCHEMA.into();
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn spectrum(s: &QuantumCovarianceMatrix) -> Result<SpectralSample> {
    Ok(SpectralSample::new(
        SpectrumKind::Ordinary,
        sym_eigenvalues(s.matrix())?,
    ))
}

/// Positive half of the spectrum of `√S·iJ·√S`; `S` must be PSD within `tol`.
pub fn symplectic_eigenvalues(s: &SymmetricMatrix, tol: f64) -> Result<(Vec<f64>, bool)> {
    let d = s.dim();
    if d % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("odd dimension {d}")));
    }
    let n = d / 2;
    let r = psd_sqrt(s, tol)?.to_hermitian();
    let ij = symplectic_form(n)?.ij;
    let h = crate::linalg::HermitianMatrix::new(
        r.as_matrix().matmul(ij.as_matrix()).matmul(r.as_matrix()),
    )?;
    let ev = herm_eigenvalues(&h)?;
    let mut degenerate = false;
    let vals = ev[n..]
        .iter()
        .map(|&v| {
            if v < SYMPLECTIC_ZERO {
                degenerate = true;
                0.0
            } else {
                v
            }
        })
        .collect();
    Ok((vals, degenerate))
}

pub fn symplectic_spectrum(s: &QuantumCovarianceMatrix) -> Result<SpectralSample> {
    let (vals, degenerate) = symplectic_eigenvalues(s.matrix(), DEFAULT_TOL)?;
    let mut out = SpectralSample::new(SpectrumKind::Symplectic, vals);
    out.degenerate = degenerate;
    Ok(out)
}

/// `log μ` with `μ = det(S)^{-1/2}`, and the rate `−log μ / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Purity {
    pub log_mu: f64,
    pub rate: f64,
}

pub fn log_purity(s: &QuantumCovarianceMatrix) -> Result<Purity> {
    let log_mu = -0.5 * log_det_spd(s.matrix())?;
    Ok(Purity {
        log_mu,
        rate: -log_mu / s.modes() as f64,
    })
}

/// `λ_min(S + i(J_{2m} ⊕ −J_{2l}))`; PPT iff this is `≥ −tol`.
pub fn ppt_defect(s: &SymmetricMatrix, part: ModeBipartition) -> Result<f64> {
    let d = s.dim();
    if d % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("odd dimension {d}")));
    }
    part.check(d / 2)?;
    let signs: Vec<f64> = (0..part.modes())
        .map(|k| if k < part.m { 1.0 } else { -1.0 })
        .collect();
    herm_lambda_min(&s.to_hermitian().add(&signed_ij(&signs)))
}

/// `λ_min(S − iJ)`.
pub fn qcm_defect(s: &SymmetricMatrix) -> Result<f64> {
    let d = s.dim();
    if d % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("odd dimension {d}")));
    }
    let ij = symplectic_form(d / 2)?.ij;
    herm_lambda_min(&s.to_hermitian().sub(&ij))
}
