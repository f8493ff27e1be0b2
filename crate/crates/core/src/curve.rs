//! Rate-curve records and their CSV form. Values are written with 17
//! significant digits so curve files double as regression fixtures: a file
//! read back and re-emitted is byte-identical.

use crate::error::{Error, Result};
use crate::prob::EntropyUnit;
use serde::Serialize;

/// One `(C, R)` sample with provenance and named auxiliary values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    pub c: f64,
    pub r: f64,
    pub method: String,
    /// Aligned with the owning curve's `aux_columns`; `None` renders empty.
    pub aux: Vec<Option<f64>>,
}

/// A rate curve with a fixed auxiliary column set, sorted by `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurve {
    pub aux_columns: Vec<String>,
    pub records: Vec<CurveRecord>,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl RateCurve {
    pub fn new(aux_columns: &[&str]) -> Self {
        RateCurve {
            aux_columns: aux_columns.iter().map(|s| s.to_string()).collect(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, c: f64, r: f64, method: &str, aux: Vec<Option<f64>>) {
        assert_eq!(aux.len(), self.aux_columns.len());
        self.records.push(CurveRecord {
            c,
            r,
            method: method.to_string(),
            aux,
        });
    }

    pub fn sort_by_c(&mut self) {
        self.records.sort_by(|a, b| a.c.partial_cmp(&b.c).unwrap());
    }

    /// Copy with the rate columns converted from bits into `unit`.
    pub fn in_unit(&self, unit: EntropyUnit) -> RateCurve {
        let mut out = self.clone();
        for rec in &mut out.records {
            rec.c = unit.from_bits(rec.c);
            rec.r = unit.from_bits(rec.r);
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("C,R,method");
        for a in &self.aux_columns {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for rec in &self.records {
            out.push_str(&fmt(rec.c));
            out.push(',');
            out.push_str(&fmt(rec.r));
            out.push(',');
            out.push_str(&rec.method);
            for a in &rec.aux {
                out.push(',');
                if let Some(v) = a {
                    out.push_str(&fmt(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<RateCurve> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty curve file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "C" || cols[1] != "R" || cols[2] != "method" {
            return Err(Error::Parse(format!("unexpected curve header {header:?}")));
        }
        let aux_columns: Vec<String> = cols[3..].iter().map(|s| s.to_string()).collect();
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "row {i} has {} fields, expected {}",
                    fields.len(),
                    cols.len()
                )));
            }
            let parse = |tok: &str| -> Result<f64> {
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number {tok:?} in row {i}: {e}")))
            };
            let mut aux = Vec::with_capacity(aux_columns.len());
            for tok in &fields[3..] {
                aux.push(if tok.is_empty() {
                    None
                } else {
                    Some(parse(tok)?)
                });
            }
            records.push(CurveRecord {
                c: parse(fields[0])?,
                r: parse(fields[1])?,
                method: fields[2].to_string(),
                aux,
            });
        }
        Ok(RateCurve {
            aux_columns,
            records,
        })
    }

    /// `R` nondecreasing along the curve within `tol`.
    pub fn r_is_nondecreasing(&self, tol: f64) -> bool {
        self.records.windows(2).all(|w| w[1].r >= w[0].r - tol)
    }

    /// Chord slopes nonincreasing within `tol` (concavity check that is
    /// robust to non-uniform grids).
    pub fn r_is_concave(&self, tol: f64) -> bool {
        let mut slopes = Vec::new();
        for w in self.records.windows(2) {
            let dc = w[1].c - w[0].c;
            if dc > 1e-12 {
                slopes.push((w[1].r - w[0].r) / dc);
            }
        }
        slopes.windows(2).all(|s| s[1] <= s[0] + tol)
    }
}

/// Inclusive grid `start:stop:count`.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "grid spec must be start:stop:count, got {spec:?}"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|e| Error::Parse(format!("bad grid start: {e}")))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|e| Error::Parse(format!("bad grid stop: {e}")))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| Error::Parse(format!("bad grid count: {e}")))?;
    if count == 0 || stop < start {
        return Err(Error::Parse(format!("degenerate grid spec {spec:?}")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}
