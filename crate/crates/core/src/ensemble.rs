//! Seeded GOE and RQCM sampling, the symplectic form, marginals and blocks.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{self, CsvDoc, Meta};
use crate::linalg::{herm_lambda_max, HermitianMatrix, Matrix, SymmetricMatrix};
use crate::spectra::qcm_defect;
use crate::{Error, Result, DEFAULT_TOL};

/// `(seed, stream_id)`; equal pairs give bit-identical draws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    pub fn gaussians(&self) -> GaussianSource {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        GaussianSource { rng, spare: None }
    }
}

/// Standard normal variates by the Box–Muller transform.
#[derive(Clone, Debug)]
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 ∈ (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoeSpec {
    /// Number of modes `n`; matrices are `2n × 2n`.
    pub half_dim: usize,
    pub sigma: f64,
    /// Use `σ/√(2n)` as the entry scale.
    pub normalized: bool,
}

impl GoeSpec {
    pub fn new(half_dim: usize, sigma: f64, normalized: bool) -> Result<Self> {
        if half_dim == 0 {
            return Err(Error::Domain("number of modes must be at least 1".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            half_dim,
            sigma,
            normalized,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn effective_sigma(&self) -> f64 {
        if self.normalized {
            self.sigma / (self.dim() as f64).sqrt()
        } else {
            self.sigma
        }
    }
}

/// `J = [[0,1],[−1,0]]^{⊕n}` and its Hermitian companion `iJ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    pub j: Matrix<f64>,
    pub ij: HermitianMatrix,
}

pub fn symplectic_form(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::Domain("symplectic form needs n ≥ 1".into()));
    }
    let d = 2 * n;
    let j = Matrix::from_fn(d, d, |r, c| {
        if r / 2 != c / 2 {
            0.0
        } else if r + 1 == c && r % 2 == 0 {
            1.0
        } else if c + 1 == r && c % 2 == 0 {
            -1.0
        } else {
            0.0
        }
    });
    let ij = HermitianMatrix::new(j.map(|x| Complex64::new(0.0, x)))?;
    Ok(SymplecticForm { j, ij })
}

/// `iJ` of size `2n` with `sign = ±1` per mode block.
pub(crate) fn signed_ij(signs: &[f64]) -> HermitianMatrix {
    let d = 2 * signs.len();
    HermitianMatrix::from_fn(d, |r, c| {
        if r / 2 == c / 2 && r != c {
            let s = signs[r / 2];
            Complex64::new(0.0, if r < c { s } else { -s })
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expect("square")
}

/// Block-diagonal rotation by `angles[k]` on mode `k`; orthogonal and symplectic.
pub fn mode_rotation(angles: &[f64]) -> Matrix<f64> {
    let d = 2 * angles.len();
    Matrix::from_fn(d, d, |r, c| {
        if r / 2 != c / 2 {
            return 0.0;
        }
        let (s, co) = angles[r / 2].sin_cos();
        match (r % 2, c % 2) {
            (0, 0) | (1, 1) => co,
            (0, 1) => s,
            _ => -s,
        }
    })
}

pub fn sample_goe(spec: &GoeSpec, seed: RngSeed) -> SymmetricMatrix {
    sample_goe_from(spec, &mut seed.gaussians())
}

/// Fills the upper triangle row by row: diagonal `N(0, 2σ²)`, off-diagonal `N(0, σ²)`.
pub fn sample_goe_from(spec: &GoeSpec, g: &mut GaussianSource) -> SymmetricMatrix {
    let d = spec.dim();
    let s = spec.effective_sigma();
    let sd = s * std::f64::consts::SQRT_2;
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m.set(i, i, sd * g.next_gaussian());
        for j in i + 1..d {
            let v = s * g.next_gaussian();
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    SymmetricMatrix::new(m).expect("square")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftRule {
    /// Always shift by `λ_max(iJ − G)`, also when negative.
    #[default]
    Unclamped,
    /// Shift by `max(0, λ_max(iJ − G))`.
    Clamped,
}

/// A `2n × 2n` real symmetric `S` with `S − iJ ⪰ 0` up to tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumCovarianceMatrix {
    matrix: SymmetricMatrix,
    modes: usize,
    qcm_defect: f64,
    shift: Option<f64>,
}

impl QuantumCovarianceMatrix {
    /// Validates `λ_min(S − iJ) ≥ −tol`; the defect is always recomputed.
    pub fn new(s: SymmetricMatrix, tol: f64) -> Result<Self> {
        let modes = modes_of(&s)?;
        let defect = qcm_defect(&s)?;
        if defect < -tol {
            return Err(Error::NotQuantumCovariance { defect });
        }
        Ok(Self {
            matrix: s,
            modes,
            qcm_defect: defect,
            shift: None,
        })
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    /// `λ_min(S − iJ)`.
    pub fn qcm_defect(&self) -> f64 {
        self.qcm_defect
    }

    /// The shift applied when built from a GOE draw.
    pub fn shift(&self) -> Option<f64> {
        self.shift
    }
}

fn modes_of(s: &SymmetricMatrix) -> Result<usize> {
    let d = s.dim();
    if d % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "covariance matrices have even dimension, got {d}"
        )));
    }
    Ok(d / 2)
}

/// `λ_max(iJ − G)`.
pub fn rqcm_shift(g: &SymmetricMatrix) -> Result<f64> {
    let n = modes_of(g)?;
    let ij = symplectic_form(n)?.ij;
    herm_lambda_max(&ij.sub(&g.to_hermitian()))
}

pub fn rqcm_from(g: &SymmetricMatrix) -> Result<QuantumCovarianceMatrix> {
    rqcm_from_with(g, ShiftRule::Unclamped)
}

pub fn rqcm_from_with(g: &SymmetricMatrix, rule: ShiftRule) -> Result<QuantumCovarianceMatrix> {
    let raw = rqcm_shift(g)?;
    let shift = match rule {
        ShiftRule::Unclamped => raw,
        ShiftRule::Clamped => raw.max(0.0),
    };
    let mut q = QuantumCovarianceMatrix::new(g.shift_diag(shift), DEFAULT_TOL)?;
    q.shift = Some(shift);
    Ok(q)
}

pub fn sample_rqcm(spec: &GoeSpec, seed: RngSeed) -> Result<QuantumCovarianceMatrix> {
    rqcm_from(&sample_goe(spec, seed))
}

/// Split `n = m + l` modes into a first and second subsystem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeBipartition {
    pub m: usize,
    pub l: usize,
}

impl ModeBipartition {
    pub fn new(m: usize, l: usize) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::InvalidPartition { m, l, n: m + l });
        }
        Ok(Self { m, l })
    }

    /// Even split `⌈n/2⌉ : ⌊n/2⌋`.
    pub fn even(n: usize) -> Result<Self> {
        Self::new(n.div_ceil(2), n / 2)
    }

    pub fn modes(&self) -> usize {
        self.m + self.l
    }

    pub fn swapped(&self) -> Self {
        Self {
            m: self.l,
            l: self.m,
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.m == 0 || self.l == 0 || self.modes() != n {
            return Err(Error::InvalidPartition {
                m: self.m,
                l: self.l,
                n,
            });
        }
        Ok(())
    }
}

impl fmt::Display for ModeBipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.m, self.l)
    }
}

impl FromStr for ModeBipartition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("partition must look like m:l, got {s:?}")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad mode count {x:?}")))
        };
        Self::new(parse(a)?, parse(b)?)
    }
}

/// The first `m` modes: top-left `2m × 2m` block.
pub fn marginal(s: &QuantumCovarianceMatrix, m: usize) -> Result<QuantumCovarianceMatrix> {
    if m == 0 || m >= s.modes {
        return Err(Error::InvalidPartition {
            m,
            l: s.modes.saturating_sub(m),
            n: s.modes,
        });
    }
    QuantumCovarianceMatrix::new(s.matrix.principal_block(0, 2 * m), DEFAULT_TOL)
}

/// `S = [[A, B], [Bᵀ, C]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub a: SymmetricMatrix,
    pub b: Matrix<f64>,
    pub c: SymmetricMatrix,
}

impl Blocks {
    pub fn reassemble(&self) -> SymmetricMatrix {
        let (da, dc) = (self.a.dim(), self.c.dim());
        let d = da + dc;
        let m = Matrix::from_fn(d, d, |i, j| match (i < da, j < da) {
            (true, true) => self.a.get(i, j),
            (true, false) => self.b.get(i, j - da),
            (false, true) => self.b.get(j, i - da),
            (false, false) => self.c.get(i - da, j - da),
        });
        SymmetricMatrix::new(m).expect("square")
    }
}

pub fn blocks(s: &SymmetricMatrix, part: ModeBipartition) -> Result<Blocks> {
    part.check(modes_of(s)?)?;
    let (da, dc) = (2 * part.m, 2 * part.l);
    Ok(Blocks {
        a: s.principal_block(0, da),
        b: s.as_matrix().submatrix(0, da, da, dc),
        c: s.principal_block(da, dc),
    })
}

/// `[[C, Bᵀ], [B, A]]`, i.e. the same state with the subsystems exchanged.
pub fn swap_subsystems(s: &SymmetricMatrix, part: ModeBipartition) -> Result<SymmetricMatrix> {
    let bl = blocks(s, part)?;
    Ok(Blocks {
        a: bl.c,
        b: bl.b.transpose(),
        c: bl.a,
    }
    .reassemble())
}

pub const MATRIX_SCHEMA: &str = "rqcm.matrix/1";

/// Serialized covariance (or GOE) matrix with its sampling parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub schema: String,
    pub n: usize,
    pub sigma: f64,
    pub normalized: bool,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Meta::is_empty")]
    pub meta: Meta,
    pub data: Vec<Vec<f64>>,
}

impl MatrixRecord {
    pub fn new(spec: &GoeSpec, seed: RngSeed, matrix: &SymmetricMatrix, shift: Option<f64>) -> Self {
        Self {
            schema: MATRIX_SCHEMA.into(),
            n: spec.half_dim,
            sigma: spec.sigma,
            normalized: spec.normalized,
            seed: seed.seed,
            stream: seed.stream_id,
            shift,
            meta: Meta::new(),
            data: matrix.as_matrix().to_rows(),
        }
    }

    pub fn matrix(&self) -> Result<SymmetricMatrix> {
        if self.data.len() != 2 * self.n {
            return Err(Error::Parse(format!(
                "matrix has {} rows, expected {}",
                self.data.len(),
                2 * self.n
            )));
        }
        SymmetricMatrix::from_rows(&self.data)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)?;
        if r.schema != MATRIX_SCHEMA {
            return Err(Error::Parse(format!("unexpected schema {}", r.schema)));
        }
        Ok(r)
    }

    pub fn to_csv(&self) -> String {
        let mut meta = self.meta.clone();
        meta.insert("n".into(), self.n.to_string());
        meta.insert("sigma".into(), self.sigma.to_string());
        meta.insert("normalized".into(), self.normalized.to_string());
        meta.insert("seed".into(), self.seed.to_string());
        meta.insert("stream".into(), self.stream.to_string());
        if let Some(s) = self.shift {
            meta.insert("shift".into(), s.to_string());
        }
        let mut out = String::new();
        io::write_header(&mut out, MATRIX_SCHEMA, &meta);
        let cols: Vec<String> = (0..self.data.len()).map(|j| format!("c{j}")).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
        for row in &self.data {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let doc = CsvDoc::parse(s, MATRIX_SCHEMA)?;
        let parse_u = |k: &str| -> Result<u64> {
            doc.meta_str(k)?
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer for {k}")))
        };
        let data = doc
            .rows
            .iter()
            .map(|r| r.iter().map(|c| io::parse_f64(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut meta = doc.meta.clone();
        for k in ["n", "sigma", "normalized", "seed", "stream", "shift"] {
            meta.remove(k);
        }
        Ok(Self {
            schema: MATRIX_SCHEMA.into(),
            n: parse_u("n")? as usize,
            sigma: doc.meta_f64("sigma")?,
            normalized: doc.meta_str("normalized")? == "true",
            seed: parse_u("seed")?,
            stream: parse_u("stream").unwrap_or(0),
            shift: doc.meta_f64("shift").ok(),
            meta,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{herm_eigenvalues, sym_eigenvalues};

    #[test]
    fn symplectic_form_one_mode() {
        let f = symplectic_form(1).unwrap();
        assert_eq!(f.j.to_rows(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn symplectic_form_properties() {
        for n in 1..5 {
            let f = symplectic_form(n).unwrap();
            let sq = f.j.matmul(&f.j);
            assert_eq!(sq, Matrix::identity(2 * n).scale(-1.0));
            let ev = herm_eigenvalues(&f.ij).unwrap();
            for (k, v) in ev.iter().enumerate() {
                let want = if k < n { -1.0 } else { 1.0 };
                assert!((v - want).abs() < 1e-14);
            }
        }
        let two = symplectic_form(2).unwrap().j;
        let one = symplectic_form(1).unwrap().j;
        assert_eq!(two.submatrix(2, 2, 2, 2), one);
        assert_eq!(two.submatrix(0, 2, 2, 2), Matrix::zeros(2, 2));
    }

    #[test]
    fn goe_is_deterministic() {
        let spec = GoeSpec::new(3, 1.0, false).unwrap();
        let a = sample_goe(&spec, RngSeed::new(11, 2));
        let b = sample_goe(&spec, RngSeed::new(11, 2));
        let c = sample_goe(&spec, RngSeed::new(11, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn goe_small_sigma_is_near_zero() {
        let spec = GoeSpec::new(2, 1e-12, false).unwrap();
        assert!(sample_goe(&spec, RngSeed::new(1, 0)).as_matrix().max_abs() < 1e-10);
    }

    #[test]
    fn goe_variances() {
        let spec = GoeSpec::new(1, 1.0, false).unwrap();
        let mut g = RngSeed::new(5, 0).gaussians();
        let (mut s11, mut s12, mut m12) = (0.0, 0.0, 0.0);
        let count = 100_000;
        for _ in 0..count {
            let m = sample_goe_from(&spec, &mut g);
            s11 += m.get(0, 0).powi(2);
            s12 += m.get(0, 1).powi(2);
            m12 += m.get(0, 1);
        }
        let c = count as f64;
        assert!((s11 / c - 2.0).abs() < 0.06, "{}", s11 / c);
        assert!((s12 / c - 1.0).abs() < 0.03, "{}", s12 / c);
        assert!((m12 / c).abs() < 0.02);
    }

    #[test]
    fn normalized_scale() {
        let spec = GoeSpec::new(8, 2.0, true).unwrap();
        assert!((spec.effective_sigma() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rqcm_from_zero_and_scaled_identity() {
        let q = rqcm_from(&SymmetricMatrix::zeros(2)).unwrap();
        assert!((q.shift().unwrap() - 1.0).abs() < 1e-14);
        assert!(q.matrix().as_matrix().sub(&Matrix::identity(2)).max_abs() < 1e-14);

        let g = SymmetricMatrix::identity(2).scale(3.0);
        let oracle = herm_eigenvalues(&symplectic_form(1).unwrap().ij.sub(&g.to_hermitian()))
            .unwrap()[1];
        let q = rqcm_from(&g).unwrap();
        assert!((q.shift().unwrap() - oracle).abs() < 1e-14);
        assert!((q.shift().unwrap() + 2.0).abs() < 1e-14);
        assert!(q.matrix().as_matrix().sub(&Matrix::identity(2)).max_abs() < 1e-14);

        let q = rqcm_from_with(&g, ShiftRule::Clamped).unwrap();
        assert_eq!(q.shift(), Some(0.0));
    }

    #[test]
    fn sampled_rqcm_saturates() {
        for seed in 0..5 {
            let spec = GoeSpec::new(4, 1.0, true).unwrap();
            let q = sample_rqcm(&spec, RngSeed::new(seed, 0)).unwrap();
            assert!(q.qcm_defect().abs() < 1e-8);
        }
    }

    #[test]
    fn tiny_sigma_gives_vacuum() {
        let spec = GoeSpec::new(1, 1e-6, false).unwrap();
        let q = sample_rqcm(&spec, RngSeed::new(3, 0)).unwrap();
        assert!(q.matrix().as_matrix().sub(&Matrix::identity(2)).max_abs() < 1e-4);
    }

    #[test]
    fn ortho_symplectic_covariance() {
        let spec = GoeSpec::new(3, 1.0, false).unwrap();
        let g = sample_goe(&spec, RngSeed::new(9, 0));
        let u = mode_rotation(&[0.3, -1.1, 2.0]);
        let j = symplectic_form(3).unwrap().j;
        assert!(u.matmul(&j).matmul(&u.transpose()).sub(&j).max_abs() < 1e-15);
        let lhs = rqcm_from(&g.congruence(&u)).unwrap();
        let rhs = rqcm_from(&g).unwrap().matrix().congruence(&u);
        assert!(lhs.matrix().as_matrix().sub(rhs.as_matrix()).max_abs() < 1e-10);
        let (a, b) = (
            sym_eigenvalues(lhs.matrix()).unwrap(),
            sym_eigenvalues(&rhs).unwrap(),
        );
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_examples() {
        let q = QuantumCovarianceMatrix::new(SymmetricMatrix::identity(8), 1e-8).unwrap();
        let m = marginal(&q, 1).unwrap();
        assert_eq!(m.matrix(), &SymmetricMatrix::identity(2));
        assert!(marginal(&q, 0).is_err());
        assert!(marginal(&q, 4).is_err());

        let spec = GoeSpec::new(5, 1.0, false).unwrap();
        let g = sample_goe(&spec, RngSeed::new(4, 0));
        let s = rqcm_from(&g).unwrap();
        let nested = marginal(&marginal(&s, 3).unwrap(), 2).unwrap();
        assert_eq!(nested.matrix(), marginal(&s, 2).unwrap().matrix());

        // The marginal equals the sub-draw's own RQCM plus a non-negative multiple of I.
        let m = marginal(&s, 2).unwrap();
        let own = rqcm_from(&g.principal_block(0, 4)).unwrap();
        let diff = m.matrix().sub(own.matrix());
        let delta = diff.get(0, 0);
        assert!(delta >= -1e-12);
        assert!(diff.sub(&SymmetricMatrix::identity(4).scale(delta)).as_matrix().max_abs() < 1e-12);
        assert!(m.qcm_defect() >= -1e-8);
    }

    #[test]
    fn blocks_examples() {
        let i8 = SymmetricMatrix::identity(8);
        let part = ModeBipartition::new(1, 3).unwrap();
        let b = blocks(&i8, part).unwrap();
        assert_eq!(b.a, SymmetricMatrix::identity(2));
        assert_eq!(b.b, Matrix::zeros(2, 6));
        assert_eq!(b.c, SymmetricMatrix::identity(6));

        let spec = GoeSpec::new(4, 1.0, false).unwrap();
        let s = sample_rqcm(&spec, RngSeed::new(8, 0)).unwrap();
        let b = blocks(s.matrix(), part).unwrap();
        assert_eq!(&b.reassemble(), s.matrix());
        assert_eq!(&b.a, marginal(&s, 1).unwrap().matrix());
        assert!(blocks(s.matrix(), ModeBipartition::new(2, 3).unwrap()).is_err());

        let sw = swap_subsystems(s.matrix(), part).unwrap();
        let back = swap_subsystems(&sw, part.swapped()).unwrap();
        assert_eq!(&back, s.matrix());
    }

    #[test]
    fn partition_parse() {
        assert_eq!("5:5".parse::<ModeBipartition>().unwrap(), ModeBipartition { m: 5, l: 5 });
        assert!("5".parse::<ModeBipartition>().is_err());
        assert!("0:3".parse::<ModeBipartition>().is_err());
        assert_eq!(ModeBipartition::even(5).unwrap().to_string(), "3:2");
    }

    #[test]
    fn record_roundtrips() {
        let spec = GoeSpec::new(2, 0.7, true).unwrap();
        let seed = RngSeed::new(42, 1);
        let q = sample_rqcm(&spec, seed).unwrap();
        let mut rec = MatrixRecord::new(&spec, seed, q.matrix(), q.shift());
        rec.meta.insert("version".into(), "test".into());
        let back = MatrixRecord::from_csv(&rec.to_csv()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(&back.matrix().unwrap(), q.matrix());
        let back = MatrixRecord::from_json(&rec.to_json().unwrap()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn qcm_validation_rejects() {
        assert!(matches!(
            QuantumCovarianceMatrix::new(SymmetricMatrix::zeros(2), 1e-8),
            Err(Error::NotQuantumCovariance { .. })
        ));
        assert!(QuantumCovarianceMatrix::new(SymmetricMatrix::identity(3), 1e-8).is_err());
    }
}
