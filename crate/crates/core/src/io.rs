//! Shared plumbing for the CSV formats: `# key: value` metadata lines
//! followed by a column header and comma-separated rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

pub type Meta = BTreeMap<String, String>;

pub fn write_header(out: &mut String, schema: &str, meta: &Meta) {
    let _ = writeln!(out, "# schema: {schema}");
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}: {}", v.replace('\n', " "));
    }
}

/// Parsed CSV document: schema, metadata, column names and data rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvDoc {
    pub schema: String,
    pub meta: Meta,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn parse(text: &str, expect_schema: &str) -> Result<Self> {
        let mut schema = None;
        let mut meta = Meta::new();
        let mut columns = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .trim()
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("line {}: bad metadata line", lineno + 1)))?;
                let (k, v) = (k.trim().to_string(), v.trim().to_string());
                if k == "schema" {
                    schema = Some(v);
                } else {
                    meta.insert(k, v);
                }
                continue;
            }
            let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if columns.is_none() {
                columns = Some(cells);
            } else {
                rows.push(cells);
            }
        }
        let schema = schema.ok_or_else(|| Error::Parse("missing schema line".into()))?;
        if schema != expect_schema {
            return Err(Error::Parse(format!(
                "schema mismatch: expected {expect_schema}, found {schema}"
            )));
        }
        let columns = columns.ok_or_else(|| Error::Parse("missing column header".into()))?;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            return Err(Error::Parse(format!(
                "data row {} has {} cells, header has {}",
                i + 1,
                r.len(),
                columns.len()
            )));
        }
        Ok(Self {
            schema,
            meta,
            columns,
            rows,
        })
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name}")))?;
        self.rows.iter().map(|r| parse_f64(&r[idx])).collect()
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.meta_str(key)?)
    }

    pub fn meta_str(&self, key: &str) -> Result<&str> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("missing metadata {key}")))
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}
