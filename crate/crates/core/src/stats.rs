//! Histograms, histogram-to-density distances and seeded Monte Carlo sweeps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_rqcm, GoeSpec, ModeBipartition, RngSeed};
use crate::extend::{is_separable_with, max_extendability_with, FeasibilityStatus, MaxK, SolveOptions};
use crate::freeprob::DensityCurve;
use crate::io::{self, CsvDoc, Meta};
use crate::spectra::{log_purity, ppt_defect, spectrum, symplectic_spectrum};
use crate::{Error, Result, DEFAULT_TOL};

pub const DEFAULT_BINS: usize = 100;
pub const HISTOGRAM_SCHEMA: &str = "rqcm.histogram/1";
pub const SWEEP_SCHEMA: &str = "rqcm.sweep/1";
/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "RQCM_THREADS";

/// Equal-width bins; `[lo, hi)` except the last, which is closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    /// Values that landed in a bin.
    pub total: u64,
    /// Values outside the range, or not finite.
    #[serde(default)]
    pub outside: u64,
    #[serde(default, skip_serializing_if = "Meta::is_empty")]
    pub meta: Meta,
}

pub fn histogram(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    let finite = || values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Domain(format!("bad histogram range ({lo}, {hi})")));
            }
            (lo, hi)
        }
        None => {
            let lo = finite().fold(f64::INFINITY, f64::min);
            let hi = finite().fold(f64::NEG_INFINITY, f64::max);
            if lo > hi {
                (0.0, 1.0)
            } else if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        }
    };
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0u64; bins];
    let mut outside = 0;
    for &v in values {
        if !v.is_finite() || v < lo || v > hi {
            outside += 1;
            continue;
        }
        let mut i = (((v - lo) / width) as usize).min(bins - 1);
        // Guard against round-off near the edges.
        while i > 0 && v < bin_edges[i] {
            i -= 1;
        }
        while i + 1 < bins && v >= bin_edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    let total: u64 = counts.iter().sum();
    let density = counts
        .iter()
        .zip(bin_edges.windows(2))
        .map(|(&c, e)| if total == 0 { 0.0 } else { c as f64 / (total as f64 * (e[1] - e[0])) })
        .collect();
    Ok(Histogram {
        bin_edges,
        counts,
        density,
        total,
        outside,
        meta: Meta::new(),
    })
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// `Σ density·width`; 1 when non-empty.
    pub fn mass(&self) -> f64 {
        self.density
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut meta = self.meta.clone();
        meta.insert("total".into(), self.total.to_string());
        meta.insert("outside".into(), self.outside.to_string());
        io::write_header(&mut out, HISTOGRAM_SCHEMA, &meta);
        out.push_str("bin_left,bin_right,count,density\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                c,
                self.density[i]
            ));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let doc = CsvDoc::parse(s, HISTOGRAM_SCHEMA)?;
        let left = doc.column_f64("bin_left")?;
        let right = doc.column_f64("bin_right")?;
        let counts = doc
            .column_f64("count")?
            .into_iter()
            .map(|c| {
                if c >= 0.0 && c.fract() == 0.0 {
                    Ok(c as u64)
                } else {
                    Err(Error::Parse(format!("bad count {c}")))
                }
            })
            .collect::<Result<Vec<u64>>>()?;
        let density = doc.column_f64("density")?;
        let Some(&last) = right.last() else {
            return Err(Error::Parse("histogram without bins".into()));
        };
        let mut bin_edges = left;
        bin_edges.push(last);
        let mut meta = doc.meta.clone();
        meta.remove("total");
        meta.remove("outside");
        Ok(Self {
            bin_edges,
            total: counts.iter().sum(),
            counts,
            density,
            outside: doc.meta_f64("outside").map(|v| v as u64).unwrap_or(0),
            meta,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["schema"] = HISTOGRAM_SCHEMA.into();
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Anything that can be evaluated as a density on the real line.
pub trait DensityFn {
    fn density_at(&self, x: f64) -> f64;
}

impl DensityFn for DensityCurve {
    fn density_at(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl<F: Fn(f64) -> f64> DensityFn for F {
    fn density_at(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `Σ |density_i − f(mid_i)|·width_i`.
pub fn l1_distance(h: &Histogram, f: &impl DensityFn) -> f64 {
    h.density
        .iter()
        .zip(h.bin_edges.windows(2))
        .map(|(d, e)| (d - f.density_at(0.5 * (e[0] + e[1]))).abs() * (e[1] - e[0]))
        .sum()
}

// ---------------------------------------------------------------- sweeps

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Spectrum,
    Symplectic,
    Ppt,
    Separability,
    MaxK,
    Purity,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::Spectrum,
        Observable::Symplectic,
        Observable::Ppt,
        Observable::Separability,
        Observable::MaxK,
        Observable::Purity,
    ];

    fn name(&self) -> &'static str {
        match self {
            Observable::Spectrum => "spectrum",
            Observable::Symplectic => "symplectic",
            Observable::Ppt => "ppt",
            Observable::Separability => "separability",
            Observable::MaxK => "max_k",
            Observable::Purity => "purity",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|o| o.name() == t)
            .ok_or_else(|| Error::Parse(format!("unknown observable {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub partition: ModeBipartition,
    pub sigma: f64,
    pub normalized: bool,
    pub samples: usize,
    /// Sample `i` uses stream `seed.stream_id + i`.
    pub seed: RngSeed,
    pub k_cap: usize,
    pub tol: f64,
    pub bins: usize,
    pub what: BTreeSet<Observable>,
    /// Worker count; `None` reads the environment, then uses all cores.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(n: usize, sigma: f64, samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            partition: ModeBipartition::even(n)?,
            sigma,
            normalized: false,
            samples,
            seed: RngSeed::new(seed, 0),
            k_cap: crate::extend::DEFAULT_K_CAP,
            tol: DEFAULT_TOL,
            bins: DEFAULT_BINS,
            what: [Observable::Ppt, Observable::Separability].into_iter().collect(),
            threads: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Domain("a sweep needs at least one sample".into()));
        }
        self.partition.check(self.n)?;
        GoeSpec::new(self.n, self.sigma, self.normalized)?;
        if self.k_cap == 0 || self.bins == 0 {
            return Err(Error::Domain("k_cap and bins must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn wants(&self, o: Observable) -> bool {
        self.what.contains(&o)
    }

    fn sample_seed(&self, index: usize) -> RngSeed {
        self.seed.with_stream(self.seed.stream_id.wrapping_add(index as u64))
    }
}

/// Per-sample observables; one JSON line each in the sample log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub seed: u64,
    pub stream: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ppt_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separable: Option<FeasibilityStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separable_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_k: Option<MaxK>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_k_undecided: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity_rate: Option<f64>,
    #[serde(skip)]
    pub spectrum: Vec<f64>,
    #[serde(skip)]
    pub symplectic: Vec<f64>,
}

impl SampleOutcome {
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub samples: usize,
    pub separable: usize,
    pub entangled: usize,
    pub undecided: usize,
    pub ppt: usize,
    pub non_ppt: usize,
}

/// Fractions over decided samples; `None` when nothing was decided.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    pub separable: Option<f64>,
    pub entangled: Option<f64>,
    pub ppt: Option<f64>,
    pub non_ppt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance (0 for a single value).
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

pub fn moment_stats(values: &[f64]) -> Option<MomentStats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some(MomentStats {
        count: values.len(),
        mean,
        variance,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema: String,
    pub config: SweepConfig,
    pub counts: Counts,
    pub fractions: Fractions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_stats: Option<MomentStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity_stats: Option<MomentStats>,
    /// Max-k over entangled samples, one unit-width bin per k.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_k_histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub max_k_counts: BTreeMap<String, usize>,
    /// Samples whose max-k search met an undecided probe.
    #[serde(default)]
    pub max_k_flagged: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symplectic_histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "Meta::is_empty")]
    pub meta: Meta,
}

impl SweepSummary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: SweepSummary = serde_json::from_str(s)?;
        if v.schema != SWEEP_SCHEMA {
            return Err(Error::Parse(format!(
                "schema mismatch: expected {SWEEP_SCHEMA}, found {}",
                v.schema
            )));
        }
        Ok(v)
    }
}

fn run_one(cfg: &SweepConfig, spec: &GoeSpec, index: usize) -> Result<SampleOutcome> {
    let seed = cfg.sample_seed(index);
    let q = sample_rqcm(spec, seed)?;
    let s = q.matrix();
    let opts = SolveOptions {
        tol: cfg.tol,
        ..SolveOptions::default()
    };
    let mut out = SampleOutcome {
        index,
        seed: seed.seed,
        stream: seed.stream_id,
        ppt_defect: None,
        separable: None,
        separable_residual: None,
        max_k: None,
        max_k_undecided: None,
        purity_rate: None,
        spectrum: Vec::new(),
        symplectic: Vec::new(),
    };
    let needs_ppt = cfg.wants(Observable::Ppt) || cfg.wants(Observable::Separability) || cfg.wants(Observable::MaxK);
    if needs_ppt {
        out.ppt_defect = Some(ppt_defect(s, cfg.partition)?);
    }
    if cfg.wants(Observable::MaxK) {
        let rep = max_extendability_with(s, cfg.partition, cfg.k_cap, &opts)?;
        out.separable = Some(rep.separable_status);
        out.separable_residual = Some(rep.separable_residual);
        out.max_k = Some(rep.max_k);
        out.max_k_undecided = Some(rep.undecided);
    } else if cfg.wants(Observable::Separability) {
        let r = is_separable_with(s, cfg.partition, &opts)?;
        out.separable = Some(r.status);
        out.separable_residual = Some(r.residual);
    }
    if let (Some(FeasibilityStatus::Feasible), Some(d)) = (out.separable, out.ppt_defect) {
        if d < -10.0 * cfg.tol {
            return Err(Error::Consistency(format!(
                "sample {index} (seed {}, stream {}) is separable but has PPT defect {d:e}",
                seed.seed, seed.stream_id
            )));
        }
    }
    if cfg.wants(Observable::Purity) {
        out.purity_rate = Some(log_purity(&q)?.rate);
    }
    if cfg.wants(Observable::Spectrum) {
        out.spectrum = spectrum(&q)?.values;
    }
    if cfg.wants(Observable::Symplectic) {
        out.symplectic = symplectic_spectrum(&q)?.values;
    }
    Ok(out)
}

fn worker_count(cfg: &SweepConfig) -> Result<Option<usize>> {
    if let Some(t) = cfg.threads {
        return Ok(Some(t.max(1)));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let t: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            Ok(Some(t.max(1)))
        }
        Err(_) => Ok(None),
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    Ok(run_sweep_detailed(cfg)?.0)
}

/// As [`run_sweep`], also returning the per-sample outcomes in index order.
pub fn run_sweep_detailed(cfg: &SweepConfig) -> Result<(SweepSummary, Vec<SampleOutcome>)> {
    cfg.validate()?;
    let spec = GoeSpec::new(cfg.n, cfg.sigma, cfg.normalized)?;
    let work = || -> Result<Vec<SampleOutcome>> {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| run_one(cfg, &spec, i))
            .collect()
    };
    let outcomes = match worker_count(cfg)? {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start {t} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok((summarize(cfg, &outcomes)?, outcomes))
}

fn summarize(cfg: &SweepConfig, outcomes: &[SampleOutcome]) -> Result<SweepSummary> {
    let mut counts = Counts {
        samples: outcomes.len(),
        ..Counts::default()
    };
    let mut defects = Vec::new();
    let mut purities = Vec::new();
    let mut max_ks = Vec::new();
    let mut max_k_counts = BTreeMap::new();
    let mut max_k_flagged = 0;
    for o in outcomes {
        if let Some(d) = o.ppt_defect {
            defects.push(d);
            if d >= -cfg.tol {
                counts.ppt += 1;
            } else {
                counts.non_ppt += 1;
            }
        }
        match o.separable {
            Some(FeasibilityStatus::Feasible) => counts.separable += 1,
            Some(FeasibilityStatus::Infeasible) => counts.entangled += 1,
            Some(FeasibilityStatus::Undecided) => counts.undecided += 1,
            None => {}
        }
        if o.max_k_undecided == Some(true) {
            max_k_flagged += 1;
        }
        if let (Some(k), Some(FeasibilityStatus::Infeasible)) = (o.max_k, o.separable) {
            max_ks.push(k.value() as f64);
            *max_k_counts.entry(k.to_string()).or_insert(0) += 1;
        }
        if let Some(p) = o.purity_rate {
            purities.push(p);
        }
    }
    let frac = |a: usize, b: usize| (a + b > 0).then(|| a as f64 / (a + b) as f64);
    let fractions = Fractions {
        separable: frac(counts.separable, counts.entangled),
        entangled: frac(counts.entangled, counts.separable),
        ppt: frac(counts.ppt, counts.non_ppt),
        non_ppt: frac(counts.non_ppt, counts.ppt),
    };
    let mut meta = Meta::new();
    meta.insert("n".into(), cfg.n.to_string());
    meta.insert("sigma".into(), cfg.sigma.to_string());
    meta.insert("seed".into(), cfg.seed.seed.to_string());
    meta.insert("samples".into(), cfg.samples.to_string());
    let with_meta = |mut h: Histogram, kind: &str| {
        h.meta = meta.clone();
        h.meta.insert("kind".into(), kind.into());
        h
    };
    let max_k_histogram = if cfg.wants(Observable::MaxK) {
        let h = histogram(&max_ks, cfg.k_cap, Some((0.5, cfg.k_cap as f64 + 0.5)))?;
        Some(with_meta(h, "max_k"))
    } else {
        None
    };
    let pooled = |f: fn(&SampleOutcome) -> &Vec<f64>| -> Vec<f64> {
        outcomes.iter().flat_map(|o| f(o).iter().copied()).collect()
    };
    let spectrum_histogram = if cfg.wants(Observable::Spectrum) {
        Some(with_meta(histogram(&pooled(|o| &o.spectrum), cfg.bins, None)?, "spectrum"))
    } else {
        None
    };
    let symplectic_histogram = if cfg.wants(Observable::Symplectic) {
        Some(with_meta(histogram(&pooled(|o| &o.symplectic), cfg.bins, None)?, "symplectic"))
    } else {
        None
    };
    Ok(SweepSummary {
        schema: SWEEP_SCHEMA.into(),
        config: cfg.clone(),
        counts,
        fractions,
        defect_stats: moment_stats(&defects),
        purity_stats: moment_stats(&purities),
        max_k_histogram,
        max_k_counts,
        max_k_flagged,
        spectrum_histogram,
        symplectic_histogram,
        meta: Meta::new(),
    })
}
