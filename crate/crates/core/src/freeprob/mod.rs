//! Large-mode limit laws.
//!
//! - `μ_σ = (½δ₋₁ + ½δ₁) ⊞ SC_σ`: spectrum of `iJ − G/√(2n)`.
//! - `SC_{R(σ),σ}`: ordinary spectrum of the normalized RQCM.
//! - `B ⊠ SC_{R(σ),σ}`: its non-negative part (doubled) is the symplectic spectrum.
//!
//! The two convolutions are computed from cubic equations for their Cauchy
//! transforms, solved in closed form and inverted by `−Im g(x + iε)/π`.

mod cubic;
mod quad;

use std::fmt;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

pub use cubic::poly3_roots;
pub use quad::{adaptive_simpson, integrate_sqrt_edges};

use crate::io::{self, CsvDoc, Meta};
use crate::{Error, Result};

/// Imaginary offset used for Stieltjes inversion.
pub const STIELTJES_EPS: f64 = 1e-7;
/// Absolute quadrature tolerance for masses and moments.
pub const QUAD_TOL: f64 = 1e-9;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must be positive, got {sigma}")))
    }
}

/// Density of `SC_{m,σ}`.
pub fn semicircle_density(m: f64, sigma: f64, x: f64) -> f64 {
    let r2 = 4.0 * sigma * sigma - (x - m) * (x - m);
    if r2 <= 0.0 {
        0.0
    } else {
        r2.sqrt() / (2.0 * std::f64::consts::PI * sigma * sigma)
    }
}

/// Right edge `R(σ)` of `μ_σ`; also the centre of the limiting RQCM spectrum.
pub fn edge_r(sigma: f64) -> f64 {
    let q = (8.0 + sigma * sigma).sqrt();
    (1.0 + sigma / 4.0 * (q - sigma)) * (1.0 + sigma / 2.0 * (q + sigma)).sqrt()
}

/// Inner edge `L(σ)` of `μ_σ`, which has a gap `(−L, L)` only for `σ < 1`.
pub fn edge_l(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if sigma >= 1.0 {
        return Err(Error::Domain(format!(
            "inner edge exists only for sigma < 1, got {sigma}"
        )));
    }
    let q = (8.0 + sigma * sigma).sqrt();
    Ok((1.0 - sigma / 4.0 * (q + sigma)) * (1.0 - sigma / 2.0 * (q - sigma)).sqrt())
}

/// Right edge `√F(σ)` of the symplectic spectrum.
pub fn edge_sqrt_f(sigma: f64) -> f64 {
    let s = sigma;
    let q = (s * s + 8.0).sqrt();
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s2 * s2;
    let s5 = s4 * s;
    let s6 = s3 * s3;
    let inner = -4096.0 * s6 + 78336.0 * s4 + 49152.0 * s2 + 4096.0 * q * s + 4096.0 * q * s5
        + 33280.0 * q * s3
        + 1024.0;
    let f = 0.5 - s4 / 8.0 + 4.0 * s2 + q * s + q * s3 / 8.0 + inner.sqrt() / 64.0;
    f.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSet {
    pub sigma: f64,
    pub r: f64,
    pub l: Option<f64>,
    pub sqrt_f: f64,
}

pub fn edges(sigma: f64) -> Result<EdgeSet> {
    check_sigma(sigma)?;
    Ok(EdgeSet {
        sigma,
        r: edge_r(sigma),
        l: edge_l(sigma).ok(),
        sqrt_f: edge_sqrt_f(sigma),
    })
}

/// Which cubic to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cubic {
    /// `σ⁴g³ − 2σ²z g² + (z² − 1 + σ²) g − z = 0`
    MuSigma,
    /// `zσ⁴G³ − σ²(2z² + σ²)G² + z(z² + 2σ² − R²)G − z² = 0`
    BoxTimes,
}

fn coefficients(kind: Cubic, sigma: f64, z: C) -> [C; 4] {
    let s2 = sigma * sigma;
    let s4 = s2 * s2;
    match kind {
        Cubic::MuSigma => [C::new(s4, 0.0), z * (-2.0 * s2), z * z + (s2 - 1.0), -z],
        Cubic::BoxTimes => {
            let r = edge_r(sigma);
            [
                z * s4,
                (z * z * 2.0 + s2) * (-s2),
                z * (z * z + (2.0 * s2 - r * r)),
                -(z * z),
            ]
        }
    }
}

/// The Cauchy transform maps the upper half-plane into the lower one, and
/// exactly one root of either cubic lies there.
fn select_root(roots: &[C]) -> Result<C> {
    let g = roots
        .iter()
        .copied()
        .min_by(|a, b| a.im.total_cmp(&b.im))
        .ok_or_else(|| Error::Domain("cubic has no roots".into()))?;
    if g.im > 1e-12 * (1.0 + g.norm()) {
        return Err(Error::BranchAmbiguity { re: g.re, im: g.im });
    }
    Ok(g)
}

fn cauchy(kind: Cubic, sigma: f64, z: C) -> Result<C> {
    check_sigma(sigma)?;
    if !(z.im > 0.0) {
        return Err(Error::Domain("Cauchy transform needs Im z > 0".into()));
    }
    let [a, b, c, d] = coefficients(kind, sigma, z);
    select_root(&poly3_roots(a, b, c, d))
}

/// Cauchy transform of `μ_σ` for `Im z > 0`.
pub fn mu_sigma_cauchy(sigma: f64, z: C) -> Result<C> {
    cauchy(Cubic::MuSigma, sigma, z)
}

/// Cauchy transform of `B ⊠ SC_{R(σ),σ}` for `Im z > 0`.
pub fn box_times_cauchy(sigma: f64, z: C) -> Result<C> {
    cauchy(Cubic::BoxTimes, sigma, z)
}

/// `−Im g(x + iε)/π`, Richardson-extrapolated from `ε` and `ε/2`, clamped at zero.
fn stieltjes_density(kind: Cubic, sigma: f64, x: f64) -> Result<f64> {
    let at = |eps: f64| -> Result<f64> {
        Ok(-cauchy(kind, sigma, C::new(x, eps))?.im / std::f64::consts::PI)
    };
    let f1 = at(STIELTJES_EPS)?;
    let f2 = at(0.5 * STIELTJES_EPS)?;
    Ok((2.0 * f2 - f1).max(0.0))
}

/// Density of `μ_σ`.
pub fn mu_sigma_density(sigma: f64, x: f64) -> Result<f64> {
    stieltjes_density(Cubic::MuSigma, sigma, x)
}

/// Limiting density of symplectic eigenvalues: twice the density of
/// `B ⊠ SC_{R(σ),σ}` on `x > 0`, zero for `x < 0`.
pub fn symplectic_limit_density(sigma: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        check_sigma(sigma)?;
        return Ok(0.0);
    }
    Ok(2.0 * stieltjes_density(Cubic::BoxTimes, sigma, x)?)
}

/// Limiting ordinary spectrum of the normalized RQCM: `SC_{R(σ),σ}`.
pub fn eigen_limit_density(sigma: f64, x: f64) -> f64 {
    semicircle_density(edge_r(sigma), sigma, x)
}

/// Limiting spectrum of the `t`-fraction marginal: `SC_{R(σ), √t·σ}`.
pub fn theoretical_marginal_density(sigma: f64, t: f64, x: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("marginal fraction t must lie in (0, 1], got {t}")));
    }
    Ok(semicircle_density(edge_r(sigma), t.sqrt() * sigma, x))
}

/// `LD(σ) = ∫ log x dSC_{R(σ),σ}(x)`, the purity decay rate.
pub fn purity_rate_ld(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let r = edge_r(sigma);
    let (a, b) = (r - 2.0 * sigma, r + 2.0 * sigma);
    if a <= 0.0 {
        return Err(Error::Domain("semicircle reaches non-positive values".into()));
    }
    Ok(integrate_sqrt_edges(
        |x| x.ln() * semicircle_density(r, sigma, x),
        a,
        b,
        QUAD_TOL,
    ))
}

/// `∫₀^∞ x ρ(x) dx` for the symplectic limit density `ρ`.
pub fn energy_per_mode(sigma: f64) -> Result<f64> {
    symplectic_moment(sigma, 1)
}

fn symplectic_moment(sigma: f64, k: i32) -> Result<f64> {
    check_sigma(sigma)?;
    let mut err = None;
    let v = integrate_sqrt_edges(
        |x| match symplectic_limit_density(sigma, x) {
            Ok(d) => x.powi(k) * d,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        1.0,
        edge_sqrt_f(sigma),
        QUAD_TOL,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Support of a density curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Support {
    Interval(f64, f64),
    TwoIntervals((f64, f64), (f64, f64)),
}

impl Support {
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        match *self {
            Self::Interval(a, b) => vec![(a, b)],
            Self::TwoIntervals(p, q) => vec![p, q],
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals().iter().any(|&(a, b)| a <= x && x <= b)
    }

    pub fn lo(&self) -> f64 {
        self.intervals()[0].0
    }

    pub fn hi(&self) -> f64 {
        self.intervals().last().expect("non-empty").1
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals()
            .iter()
            .map(|(a, b)| format!("{a}..{b}"))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

impl std::str::FromStr for Support {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let ivs = s
            .split(';')
            .map(|p| {
                let (a, b) = p
                    .split_once("..")
                    .ok_or_else(|| Error::Parse(format!("bad interval {p:?}")))?;
                Ok((io::parse_f64(a)?, io::parse_f64(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        match ivs.as_slice() {
            [(a, b)] => Ok(Self::Interval(*a, *b)),
            [p, q] => Ok(Self::TwoIntervals(*p, *q)),
            _ => Err(Error::Parse(format!("bad support {s:?}"))),
        }
    }
}

/// Support of `μ_σ`.
pub fn mu_sigma_support(sigma: f64) -> Result<Support> {
    let r = edge_r(sigma);
    Ok(match edge_l(sigma) {
        Ok(l) => Support::TwoIntervals((-r, -l), (l, r)),
        Err(_) => {
            check_sigma(sigma)?;
            Support::Interval(-r, r)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    /// `μ_σ`
    Mu,
    /// `SC_{R(σ),σ}`
    Eigen,
    /// Symplectic limit density.
    Symplectic,
    /// `SC_{R(σ),√t·σ}`
    Marginal,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mu => "mu",
            Self::Eigen => "eigen",
            Self::Symplectic => "symplectic",
            Self::Marginal => "marginal",
        })
    }
}

impl std::str::FromStr for CurveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Self::Mu),
            "eigen" => Ok(Self::Eigen),
            "symplectic" => Ok(Self::Symplectic),
            "marginal" => Ok(Self::Marginal),
            _ => Err(Error::Parse(format!("unknown curve kind {s:?}"))),
        }
    }
}

pub const DENSITY_SCHEMA: &str = "rqcm.density/1";

/// Sampled theoretical density on a grid covering its support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub kind: CurveKind,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub support: Support,
    /// Mass of the exact density over the support, by quadrature.
    pub total_mass: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    #[serde(default, skip_serializing_if = "Meta::is_empty")]
    pub meta: Meta,
}

/// Chebyshev–Lobatto nodes on `[a, b]`: dense near the edges.
fn lobatto(a: f64, b: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / (count - 1) as f64;
            a + (b - a) * 0.5 * (1.0 - th.cos())
        })
        .collect()
}

impl DensityCurve {
    /// Builds the curve for `kind` with about `points` grid points.
    pub fn build(kind: CurveKind, sigma: f64, t: Option<f64>, points: usize) -> Result<Self> {
        check_sigma(sigma)?;
        let points = points.max(4);
        let (support, f): (Support, Box<dyn Fn(f64) -> Result<f64>>) = match kind {
            CurveKind::Mu => (
                mu_sigma_support(sigma)?,
                Box::new(move |x| mu_sigma_density(sigma, x)),
            ),
            CurveKind::Eigen => {
                let r = edge_r(sigma);
                (
                    Support::Interval(r - 2.0 * sigma, r + 2.0 * sigma),
                    Box::new(move |x| Ok(eigen_limit_density(sigma, x))),
                )
            }
            CurveKind::Symplectic => (
                Support::Interval(1.0, edge_sqrt_f(sigma)),
                Box::new(move |x| symplectic_limit_density(sigma, x)),
            ),
            CurveKind::Marginal => {
                let t = t.ok_or_else(|| Error::Domain("marginal curve needs t".into()))?;
                theoretical_marginal_density(sigma, t, 0.0)?;
                let (r, w) = (edge_r(sigma), 2.0 * t.sqrt() * sigma);
                (
                    Support::Interval(r - w, r + w),
                    Box::new(move |x| theoretical_marginal_density(sigma, t, x)),
                )
            }
        };
        let ivs = support.intervals();
        let total_len: f64 = ivs.iter().map(|(a, b)| b - a).sum();
        let mut grid = Vec::with_capacity(points + 2);
        for &(a, b) in &ivs {
            let share = ((points as f64) * (b - a) / total_len).round() as usize;
            grid.extend(lobatto(a, b, share));
        }
        let density = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        let mut err = None;
        let total_mass = ivs
            .iter()
            .map(|&(a, b)| {
                integrate_sqrt_edges(
                    |x| {
                        f(x).unwrap_or_else(|e| {
                            err.get_or_insert(e);
                            0.0
                        })
                    },
                    a,
                    b,
                    QUAD_TOL,
                )
            })
            .sum();
        if let Some(e) = err {
            return Err(e);
        }
        Ok(Self {
            kind,
            sigma,
            t: if kind == CurveKind::Marginal { t } else { None },
            support,
            total_mass,
            grid,
            density,
            meta: Meta::new(),
        })
    }

    /// Trapezoid integral of the sampled values.
    pub fn trapezoid_mass(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Piecewise-linear interpolation, zero off the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&v| v <= x);
        if i == 0 {
            return self.density[0];
        }
        if i >= g.len() {
            return self.density[g.len() - 1];
        }
        let (x0, x1) = (g[i - 1], g[i]);
        if x1 == x0 {
            return self.density[i];
        }
        let w = (x - x0) / (x1 - x0);
        self.density[i - 1] * (1.0 - w) + self.density[i] * w
    }

    pub fn to_csv(&self) -> String {
        let mut meta = self.meta.clone();
        meta.insert("kind".into(), self.kind.to_string());
        meta.insert("sigma".into(), self.sigma.to_string());
        if let Some(t) = self.t {
            meta.insert("t".into(), t.to_string());
        }
        meta.insert("support".into(), self.support.to_string());
        meta.insert("total_mass".into(), self.total_mass.to_string());
        let mut out = String::new();
        io::write_header(&mut out, DENSITY_SCHEMA, &meta);
        out.push_str("x,density\n");
        for (x, d) in self.grid.iter().zip(&self.density) {
            out.push_str(&format!("{x},{d}\n"));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let doc = CsvDoc::parse(s, DENSITY_SCHEMA)?;
        let mut meta = doc.meta.clone();
        for k in ["kind", "sigma", "t", "support", "total_mass"] {
            meta.remove(k);
        }
        Ok(Self {
            kind: doc.meta_str("kind")?.parse()?,
            sigma: doc.meta_f64("sigma")?,
            t: doc.meta_f64("t").ok(),
            support: doc.meta_str("support")?.parse()?,
            total_mass: doc.meta_f64("total_mass")?,
            grid: doc.column_f64("x")?,
            density: doc.column_f64("density")?,
            meta,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["schema"] = DENSITY_SCHEMA.into();
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn semicircle_examples() {
        assert!((semicircle_density(0.0, 1.0, 0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle_density(0.0, 1.0, 2.0), 0.0);
        assert_eq!(semicircle_density(0.0, 1.0, -2.0), 0.0);
        let m = integrate_sqrt_edges(|x| semicircle_density(1.5, 0.7, x), 0.1, 2.9, 1e-10);
        assert!((m - 1.0).abs() < 1e-6);
    }

    #[test]
    fn edge_values() {
        assert!((edge_r(1.0) - 1.5 * 3f64.sqrt()).abs() < 1e-14);
        assert!((edge_r(1.0) - 2.598076).abs() < 1e-6);
        let s = 0.01;
        assert!((edge_r(s) - (1.0 + 2f64.sqrt() * s + s * s / 4.0)).abs() <= 1e-5);
        assert!((edge_l(0.5).unwrap() - 0.36901).abs() < 1e-4);
        assert!(matches!(edge_l(1.0), Err(Error::Domain(_))));
        assert!(matches!(edge_l(2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sqrt_f_values() {
        let want = (9.0 * 3f64.sqrt() / 2.0 + 31.0 / 4.0).sqrt();
        assert!((edge_sqrt_f(1.0) - want).abs() < 1e-12);
        assert!((edge_sqrt_f(1.0) - 3.94262).abs() < 1e-4);
        assert!((edge_sqrt_f(0.01) - (1.0 + 2.0 * 2f64.sqrt() * 0.01)).abs() <= 1e-3);
        let ratio = edge_sqrt_f(100.0) / 100.0;
        let limit = (5.5 + 2.5 * 5f64.sqrt()).sqrt();
        assert!((ratio / limit - 1.0).abs() < 0.01, "{ratio} vs {limit}");
    }

    #[test]
    fn edge_set_invariants() {
        for s in [0.05, 0.3, 0.9, 1.0, 3.0, 50.0] {
            let e = edges(s).unwrap();
            assert!(e.r > 0.0 && e.sqrt_f >= 1.0);
            if let Some(l) = e.l {
                assert!(s < 1.0 && 0.0 < l && l < e.r);
            } else {
                assert!(s >= 1.0);
            }
        }
        assert!(edges(0.0).is_err());
    }

    #[test]
    fn mu_cubic_small_sigma_is_bernoulli() {
        // (z² − 1)g = z  ⇒  g = z/(z² − 1)
        let z = C::new(0.3, 0.8);
        let g = mu_sigma_cauchy(1e-6, z).unwrap();
        assert!((g - z / (z * z - 1.0)).norm() < 1e-6);
    }

    #[test]
    fn branch_behaviour_at_infinity() {
        for s in [0.1, 0.5, 1.0, 2.0, 10.0] {
            for th in [0.25, 0.5, 0.75] {
                let z = C::from_polar(1e3, PI * th);
                let g = mu_sigma_cauchy(s, z).unwrap();
                assert!(g.im < 0.0 && (z * g - 1.0).norm() < 1e-3 * (1.0 + s * s));
                let g = box_times_cauchy(s, z).unwrap();
                assert!(g.im < 0.0 && (z * g - 1.0).norm() < 1e-3 * (1.0 + s * s));
            }
            let z = C::new(1e3, STIELTJES_EPS);
            let g = mu_sigma_cauchy(s, z).unwrap();
            assert!(g.im < 0.0 && (z * g - 1.0).norm() < 1e-3 * (1.0 + s * s));
        }
    }

    #[test]
    fn mu_density_support_and_mass() {
        for s in [0.5, 1.0, 2.0] {
            let c = DensityCurve::build(CurveKind::Mu, s, None, 400).unwrap();
            assert!((c.total_mass - 1.0).abs() < 1e-3, "{s}: {}", c.total_mass);
            let r = edge_r(s);
            for x in [r + 2e-3, r + 0.1, -r - 1e-2] {
                assert!(mu_sigma_density(s, x).unwrap() < 1e-6);
            }
        }
        let l = edge_l(0.5).unwrap();
        for x in [0.0, 0.1, 0.3, l - 1e-3] {
            assert!(mu_sigma_density(0.5, x).unwrap() < 1e-6, "{x}");
        }
        assert!(mu_sigma_density(1.0, 0.5).unwrap() > 0.01);
    }

    #[test]
    fn phase_transition() {
        let l = edge_l(0.99).unwrap();
        assert!(l > 0.0);
        assert!(mu_sigma_density(0.99, 0.0).unwrap() < 1e-6);
        assert!(mu_sigma_density(1.01, 0.0).unwrap() > 1e-3);
    }

    /// Explicit density at σ = 1, evaluated with principal complex roots.
    fn closed_form_sigma_one(x: f64) -> f64 {
        let x2 = x * x;
        let x4 = x2 * x2;
        let x6 = x4 * x2;
        let rad = C::new(-16.0 * x6 + 264.0 * x4 - 237.0 * x2 - 11.0, 0.0).sqrt();
        let inner = (rad * 9.0 + 73.0) * (3.0 * x2) + (-8.0 * x6 + 510.0 * x4 + 8.0);
        let c = inner.powf(1.0 / 3.0);
        let num = c * c + (-4.0 * x4 - 73.0 * x2 - 4.0);
        (num / (c * (2.0 * 3f64.sqrt() * PI * x))).re
    }

    #[test]
    fn symplectic_matches_closed_form_at_sigma_one() {
        let top = edge_sqrt_f(1.0);
        for k in 0..20 {
            let x = 1.0 + (top - 1.0) * (k as f64 + 0.5) / 20.0;
            let a = symplectic_limit_density(1.0, x).unwrap();
            let b = closed_form_sigma_one(x);
            assert!((a - b).abs() < 1e-6, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn symplectic_support_and_mass() {
        for s in [0.5, 1.0, 10.0] {
            let c = DensityCurve::build(CurveKind::Symplectic, s, None, 400).unwrap();
            assert!((c.total_mass - 1.0).abs() < 1e-3, "{s}: {}", c.total_mass);
            let top = edge_sqrt_f(s);
            assert!(symplectic_limit_density(s, top + 1e-3).unwrap() < 1e-6);
            assert!(symplectic_limit_density(s, 1.0 - 1e-3).unwrap() < 1e-6);
            assert!(symplectic_limit_density(s, 0.5 * (1.0 + top)).unwrap() > 1e-3);
        }
        assert_eq!(symplectic_limit_density(1.0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn ld_and_energy() {
        assert!((purity_rate_ld(1.0).unwrap() - 0.865668).abs() < 1e-4);
        assert!(purity_rate_ld(0.01).unwrap() <= 0.02);
        for s in [0.1, 0.5, 1.0, 2.0] {
            assert!(purity_rate_ld(s).unwrap() <= edge_r(s).ln());
        }
        let e = energy_per_mode(1.0).unwrap();
        assert!((e - 2.49289).abs() < 1e-3, "{e}");
        assert!(e > 1.0 && e < edge_sqrt_f(1.0));
    }

    #[test]
    fn marginal_law() {
        let r = edge_r(1.0);
        assert_eq!(
            theoretical_marginal_density(1.0, 1.0, 2.0).unwrap(),
            eigen_limit_density(1.0, 2.0)
        );
        let c = DensityCurve::build(CurveKind::Marginal, 1.0, Some(0.25), 100).unwrap();
        assert!((c.support.lo() - (r - 1.0)).abs() < 1e-12);
        assert!((c.support.hi() - (r + 1.0)).abs() < 1e-12);
        for t in [0.1, 0.5, 0.9] {
            let c = DensityCurve::build(CurveKind::Marginal, 1.0, Some(t), 50).unwrap();
            assert!((0.5 * (c.support.lo() + c.support.hi()) - r).abs() < 1e-12);
        }
        assert!(theoretical_marginal_density(1.0, 0.0, 1.0).is_err());
        assert!(DensityCurve::build(CurveKind::Marginal, 1.0, None, 10).is_err());
    }

    #[test]
    fn curve_invariants_and_roundtrip() {
        for kind in [CurveKind::Mu, CurveKind::Eigen, CurveKind::Symplectic] {
            for s in [0.5, 1.0] {
                let c = DensityCurve::build(kind, s, None, 600).unwrap();
                assert!(c.density.iter().all(|&d| d >= 0.0));
                assert!((c.trapezoid_mass() - c.total_mass).abs() < 1e-3, "{kind} {s}");
                for (x, d) in c.grid.iter().zip(&c.density) {
                    if *d > 1e-9 {
                        assert!(c.support.contains(*x));
                    }
                }
            }
        }
        let c = DensityCurve::build(CurveKind::Mu, 0.5, None, 50).unwrap();
        assert_eq!(DensityCurve::from_csv(&c.to_csv()).unwrap(), c);
        assert_eq!(DensityCurve::from_json(&c.to_json().unwrap()).unwrap(), c);
        let mid = 0.5 * (c.grid[3] + c.grid[4]);
        let lin = 0.5 * (c.density[3] + c.density[4]);
        assert!((c.eval(mid) - lin).abs() < 1e-12);
        assert_eq!(c.eval(100.0), 0.0);
    }
}
