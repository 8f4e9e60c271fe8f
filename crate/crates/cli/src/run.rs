use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rqcm::ensemble::{sample_rqcm, GoeSpec, MatrixRecord, ModeBipartition, RngSeed};
use rqcm::extend::{max_extendability_with, SolveOptions};
use rqcm::freeprob::{edges, energy_per_mode, purity_rate_ld, CurveKind, DensityCurve};
use rqcm::io::{write_header, Meta};
use rqcm::spectra::{spectrum, symplectic_spectrum, SpectralSample, SpectrumKind};
use rqcm::stats::{histogram, run_sweep_detailed, Observable, SweepConfig, SweepSummary};
use rqcm::Error;

use crate::{Command, Common, Curve, Format, SpectrumArgs, SweepArgs, TheoryArgs};

pub const PPT_SCHEMA: &str = "rqcm.ppt/1";
pub const EXTEND_SCHEMA: &str = "rqcm.extend/1";
pub const TABLE_SCHEMA: &str = "rqcm.table/1";

pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch(_)
            | Error::Domain(_)
            | Error::InvalidPartition { .. }
            | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Usage(msg.into()))
}

/// Flags after validation.
struct Ctx<'a> {
    c: &'a Common,
    format: Format,
    meta: Meta,
}

impl<'a> Ctx<'a> {
    fn new(c: &'a Common, command: &str, invocation: &str) -> Res<Self> {
        let format = match (c.format, &c.out) {
            (Some(f), _) => f,
            (None, Some(p)) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json") || e.eq_ignore_ascii_case("jsonl")) => Format::Json,
            _ => Format::Csv,
        };
        if !(c.tol > 0.0 && c.tol.is_finite()) {
            return usage(format!("--tol must be positive, got {}", c.tol));
        }
        if c.bins == 0 {
            return usage("--bins must be at least 1");
        }
        if c.k_cap == 0 {
            return usage("--k-cap must be at least 1");
        }
        if c.samples == 0 {
            return usage("--samples must be at least 1");
        }
        let mut meta = Meta::new();
        meta.insert("command".into(), command.into());
        meta.insert("invocation".into(), invocation.into());
        meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        Ok(Self { c, format, meta })
    }

    fn sigmas(&self) -> Res<Vec<f64>> {
        let mut out = Vec::new();
        for part in self.c.sigma.split(',') {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad --sigma value {part:?}")))?;
            if !(v > 0.0 && v.is_finite()) {
                return usage(format!("--sigma must be positive, got {v}"));
            }
            out.push(v);
        }
        Ok(out)
    }

    fn sigma(&self) -> Res<f64> {
        let s = self.sigmas()?;
        if s.len() != 1 {
            return usage("this command takes a single --sigma value");
        }
        Ok(s[0])
    }

    fn spec(&self) -> Res<GoeSpec> {
        Ok(GoeSpec::new(self.c.modes, self.sigma()?, self.c.normalized)?)
    }

    fn partition(&self) -> Res<ModeBipartition> {
        let p = match &self.c.partition {
            Some(s) => s.parse::<ModeBipartition>()?,
            None => ModeBipartition::even(self.c.modes)?,
        };
        p.check(self.c.modes)?;
        Ok(p)
    }

    fn seed(&self, i: usize) -> RngSeed {
        RngSeed::new(self.c.seed, i as u64)
    }

    fn sample_meta(&self) -> Res<Meta> {
        let mut m = self.meta.clone();
        m.insert("n".into(), self.c.modes.to_string());
        m.insert("sigma".into(), self.sigma()?.to_string());
        m.insert("normalized".into(), self.c.normalized.to_string());
        m.insert("seed".into(), self.c.seed.to_string());
        m.insert("samples".into(), self.c.samples.to_string());
        Ok(m)
    }

    fn emit(&self, text: &str) -> Res<()> {
        write_out(self.c.out.as_deref(), text)
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Numerical(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Numerical(format!("cannot write to stdout: {e}")))
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> Res<String> {
    serde_json::to_string(v).map_err(|e| Failure::Numerical(e.to_string()))
}

fn header_line(schema: &str, meta: &Meta) -> Res<String> {
    json(&serde_json::json!({ "schema": schema, "meta": meta }))
}

pub fn dispatch(cmd: &Command, invocation: &str) -> Res<()> {
    // The program path varies between machines; the flags are what matter.
    let invocation = match invocation.split_once(' ') {
        Some((_, rest)) => format!("rqcm {rest}"),
        None => "rqcm".to_string(),
    };
    match cmd {
        Command::Sample(c) => sample(&Ctx::new(c, "sample", &invocation)?),
        Command::Spectrum(a) => spectra(a, SpectrumKind::Ordinary, &invocation),
        Command::Symplectic(a) => spectra(a, SpectrumKind::Symplectic, &invocation),
        Command::Ppt(c) => ppt(&Ctx::new(c, "ppt", &invocation)?),
        Command::Extend(c) => extend(&Ctx::new(c, "extend", &invocation)?),
        Command::Sweep(a) => sweep(a, &invocation),
        Command::Theory(a) => theory(a, &invocation),
    }
}

fn sample(ctx: &Ctx) -> Res<()> {
    let spec = ctx.spec()?;
    if ctx.c.samples > 1 && ctx.format == Format::Csv {
        return usage("CSV holds one matrix; use --format json for several samples");
    }
    let mut out = String::new();
    for i in 0..ctx.c.samples {
        let seed = ctx.seed(i);
        let q = sample_rqcm(&spec, seed)?;
        let mut rec = MatrixRecord::new(&spec, seed, q.matrix(), q.shift());
        rec.meta = ctx.meta.clone();
        match ctx.format {
            Format::Csv => out.push_str(&rec.to_csv()),
            Format::Json if ctx.c.samples == 1 => {
                out.push_str(&rec.to_json()?);
                out.push('\n');
            }
            Format::Json => {
                out.push_str(&json(&rec)?);
                out.push('\n');
            }
        }
    }
    ctx.emit(&out)
}

fn spectra(a: &SpectrumArgs, kind: SpectrumKind, invocation: &str) -> Res<()> {
    let name = if kind == SpectrumKind::Symplectic { "symplectic" } else { "spectrum" };
    let ctx = Ctx::new(&a.common, name, invocation)?;
    let spec = ctx.spec()?;
    let mut values = Vec::new();
    let mut degenerate = false;
    for i in 0..ctx.c.samples {
        let q = sample_rqcm(&spec, ctx.seed(i))?;
        let s = match kind {
            SpectrumKind::Symplectic => symplectic_spectrum(&q)?,
            _ => spectrum(&q)?,
        };
        degenerate |= s.degenerate;
        values.extend(s.values);
    }
    let mut meta = ctx.sample_meta()?;
    if a.raw {
        let mut s = SpectralSample::new(kind, values);
        s.degenerate = degenerate;
        s.meta = meta;
        let text = match ctx.format {
            Format::Csv => s.to_csv(),
            Format::Json => s.to_json()? + "\n",
        };
        return ctx.emit(&text);
    }
    meta.insert("kind".into(), kind.to_string());
    let mut h = histogram(&values, ctx.c.bins, None)?;
    h.meta = meta;
    let text = match ctx.format {
        Format::Csv => h.to_csv(),
        Format::Json => h.to_json()? + "\n",
    };
    ctx.emit(&text)
}

fn sweep_config(ctx: &Ctx, what: BTreeSet<Observable>) -> Res<SweepConfig> {
    let mut cfg = SweepConfig::new(ctx.c.modes, ctx.sigma()?, ctx.c.samples, ctx.c.seed)?;
    cfg.partition = ctx.partition()?;
    cfg.normalized = ctx.c.normalized;
    cfg.k_cap = ctx.c.k_cap;
    cfg.tol = ctx.c.tol;
    cfg.bins = ctx.c.bins;
    cfg.what = what;
    cfg.validate()?;
    Ok(cfg)
}

fn ppt(ctx: &Ctx) -> Res<()> {
    let cfg = sweep_config(ctx, [Observable::Ppt].into_iter().collect())?;
    let (_, outcomes) = run_sweep_detailed(&cfg)?;
    let mut meta = ctx.sample_meta()?;
    meta.insert("partition".into(), cfg.partition.to_string());
    meta.insert("tol".into(), ctx.c.tol.to_string());
    let mut out = String::new();
    match ctx.format {
        Format::Csv => {
            write_header(&mut out, PPT_SCHEMA, &meta);
            out.push_str("index,seed,stream,ppt_defect,ppt\n");
            for o in &outcomes {
                let d = o.ppt_defect.unwrap_or(f64::NAN);
                let _ = writeln!(out, "{},{},{},{},{}", o.index, o.seed, o.stream, d, d >= -ctx.c.tol);
            }
        }
        Format::Json => {
            out.push_str(&header_line(PPT_SCHEMA, &meta)?);
            out.push('\n');
            for o in &outcomes {
                out.push_str(&o.to_json_line()?);
                out.push('\n');
            }
        }
    }
    ctx.emit(&out)
}

fn extend(ctx: &Ctx) -> Res<()> {
    let spec = ctx.spec()?;
    let part = ctx.partition()?;
    let opts = SolveOptions {
        tol: ctx.c.tol,
        ..SolveOptions::default()
    };
    let mut meta = ctx.sample_meta()?;
    meta.insert("partition".into(), part.to_string());
    meta.insert("k_cap".into(), ctx.c.k_cap.to_string());
    meta.insert("tol".into(), ctx.c.tol.to_string());
    let mut out = String::new();
    match ctx.format {
        Format::Csv => {
            write_header(&mut out, EXTEND_SCHEMA, &meta);
            out.push_str("index,seed,stream,separable,separable_status,ppt,ppt_defect,max_k,undecided,near_singular\n");
        }
        Format::Json => {
            out.push_str(&header_line(EXTEND_SCHEMA, &meta)?);
            out.push('\n');
        }
    }
    for i in 0..ctx.c.samples {
        let seed = ctx.seed(i);
        let q = sample_rqcm(&spec, seed)?;
        let mut rep = max_extendability_with(q.matrix(), part, ctx.c.k_cap, &opts)?;
        rep.seed = Some(seed.seed);
        rep.stream = Some(seed.stream_id);
        rep.sigma = Some(spec.sigma);
        match ctx.format {
            Format::Csv => {
                let status = json(&rep.separable_status)?;
                let _ = writeln!(
                    out,
                    "{i},{},{},{},{},{},{},{},{},{}",
                    seed.seed,
                    seed.stream_id,
                    rep.separable,
                    status.trim_matches('"'),
                    rep.ppt,
                    rep.ppt_defect,
                    rep.max_k,
                    rep.undecided,
                    rep.near_singular
                );
            }
            Format::Json => {
                out.push_str(&rep.to_json_line()?);
                out.push('\n');
            }
        }
    }
    ctx.emit(&out)
}

fn sweep(a: &SweepArgs, invocation: &str) -> Res<()> {
    let ctx = Ctx::new(&a.common, "sweep", invocation)?;
    let what = a
        .what
        .iter()
        .filter(|w| !w.trim().is_empty())
        .map(|w| w.parse::<Observable>())
        .collect::<Result<BTreeSet<_>, _>>()?;
    if what.is_empty() {
        return usage("--what needs at least one observable");
    }
    let cfg = sweep_config(&ctx, what)?;
    let (mut summary, outcomes) = run_sweep_detailed(&cfg)?;
    summary.meta = ctx.meta.clone();
    if let Some(log) = &a.log {
        let mut text = header_line("rqcm.samples/1", &ctx.meta)?;
        text.push('\n');
        for o in &outcomes {
            text.push_str(&o.to_json_line()?);
            text.push('\n');
        }
        write_out(Some(log), &text)?;
    }
    let text = match ctx.format {
        Format::Json => summary.to_json()? + "\n",
        Format::Csv => summary_csv(&summary),
    };
    ctx.emit(&text)
}

/// Scalar results as `quantity,value` rows.
fn summary_csv(s: &SweepSummary) -> String {
    let mut meta = s.meta.clone();
    let cfg = &s.config;
    meta.insert("n".into(), cfg.n.to_string());
    meta.insert("partition".into(), cfg.partition.to_string());
    meta.insert("sigma".into(), cfg.sigma.to_string());
    meta.insert("normalized".into(), cfg.normalized.to_string());
    meta.insert("seed".into(), cfg.seed.seed.to_string());
    meta.insert("samples".into(), cfg.samples.to_string());
    meta.insert("k_cap".into(), cfg.k_cap.to_string());
    meta.insert("tol".into(), cfg.tol.to_string());
    let mut out = String::new();
    write_header(&mut out, rqcm::stats::SWEEP_SCHEMA, &meta);
    out.push_str("quantity,value\n");
    let c = s.counts;
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    for (k, v) in [
        ("samples", c.samples),
        ("separable", c.separable),
        ("entangled", c.entangled),
        ("undecided", c.undecided),
        ("ppt", c.ppt),
        ("non_ppt", c.non_ppt),
        ("max_k_flagged", s.max_k_flagged),
    ] {
        row(k, v.to_string());
    }
    let f = s.fractions;
    for (k, v) in [
        ("fraction_separable", f.separable),
        ("fraction_entangled", f.entangled),
        ("fraction_ppt", f.ppt),
        ("fraction_non_ppt", f.non_ppt),
    ] {
        if let Some(v) = v {
            row(k, v.to_string());
        }
    }
    for (name, st) in [("defect", s.defect_stats), ("purity_rate", s.purity_stats)] {
        if let Some(st) = st {
            row(&format!("{name}_mean"), st.mean.to_string());
            row(&format!("{name}_variance"), st.variance.to_string());
        }
    }
    for (k, v) in &s.max_k_counts {
        row(&format!("max_k={k}"), v.to_string());
    }
    out
}

fn theory(a: &TheoryArgs, invocation: &str) -> Res<()> {
    let ctx = Ctx::new(&a.common, "theory", invocation)?;
    if a.t.is_some() && a.curve != Curve::Marginal {
        return usage("--t only applies to --curve marginal");
    }
    let kind = match a.curve {
        Curve::Mu => Some(CurveKind::Mu),
        Curve::Eigen => Some(CurveKind::Eigen),
        Curve::Symplectic => Some(CurveKind::Symplectic),
        Curve::Marginal => {
            if a.t.is_none() {
                return usage("--curve marginal needs --t");
            }
            Some(CurveKind::Marginal)
        }
        Curve::Edges | Curve::Ld | Curve::Energy => None,
    };
    let mut meta = ctx.meta.clone();
    if let Some(kind) = kind {
        let sigma = ctx.sigma()?;
        let mut curve = DensityCurve::build(kind, sigma, a.t, ctx.c.bins + 1)?;
        curve.meta = meta;
        let text = match ctx.format {
            Format::Csv => curve.to_csv(),
            Format::Json => curve.to_json()? + "\n",
        };
        return ctx.emit(&text);
    }
    let sigmas = ctx.sigmas()?;
    let (columns, rows): (Vec<&str>, Vec<Vec<Option<f64>>>) = match a.curve {
        Curve::Edges => (
            vec!["sigma", "r", "l", "sqrt_f"],
            sigmas
                .iter()
                .map(|&s| edges(s).map(|e| vec![Some(s), Some(e.r), e.l, Some(e.sqrt_f)]))
                .collect::<Result<_, _>>()?,
        ),
        Curve::Ld => (
            vec!["sigma", "ld"],
            sigmas
                .iter()
                .map(|&s| purity_rate_ld(s).map(|v| vec![Some(s), Some(v)]))
                .collect::<Result<_, _>>()?,
        ),
        _ => (
            vec!["sigma", "energy"],
            sigmas
                .iter()
                .map(|&s| energy_per_mode(s).map(|v| vec![Some(s), Some(v)]))
                .collect::<Result<_, _>>()?,
        ),
    };
    let table = match a.curve {
        Curve::Edges => "edges",
        Curve::Ld => "ld",
        _ => "energy",
    };
    meta.insert("table".into(), table.into());
    let text = match ctx.format {
        Format::Csv => {
            let mut out = String::new();
            write_header(&mut out, TABLE_SCHEMA, &meta);
            out.push_str(&columns.join(","));
            out.push('\n');
            for r in &rows {
                let cells: Vec<String> = r.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let records: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), serde_json::json!(v)))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect();
            let doc = serde_json::json!({ "schema": TABLE_SCHEMA, "meta": meta, "rows": records });
            serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numerical(e.to_string()))? + "\n"
        }
    };
    ctx.emit(&text)
}
