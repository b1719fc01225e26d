use std::io::{BufRead, Write};

use super::{StepSizes, Variant};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "k,f_x,f_s,g_s,F_k_s,residual_s,dx_norm";

/// Per-iteration measurements. `penalty_s` is F_k(s^k) with the weight of
/// the scheme (σk for the basic schemes, γΣ_{k−1} for the accelerated ones).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub f_x: f64,
    pub f_s: f64,
    pub g_s: f64,
    pub penalty_s: f64,
    pub residual_s: f64,
    pub dx_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    FX,
    FS,
    GS,
    PenaltyS,
    ResidualS,
    DxNorm,
}

impl TraceRecord {
    pub fn get(&self, c: Column) -> f64 {
        match c {
            Column::FX => self.f_x,
            Column::FS => self.f_s,
            Column::GS => self.g_s,
            Column::PenaltyS => self.penalty_s,
            Column::ResidualS => self.residual_s,
            Column::DxNorm => self.dx_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub k: usize,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub variant: Variant,
    pub steps: StepSizes,
    pub f_star: f64,
    pub records: Vec<TraceRecord>,
    pub snapshots: Vec<Snapshot>,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// (k, value) pairs of one column.
    pub fn series(&self, c: Column) -> Vec<(usize, f64)> {
        self.records.iter().map(|r| (r.k, r.get(c))).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_records(&self.records, w)
    }
}

pub fn write_records<W: Write>(records: &[TraceRecord], mut w: W) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.k, r.f_x, r.f_s, r.g_s, r.penalty_s, r.residual_s, r.dx_norm
        )?;
    }
    Ok(())
}

/// Reads records written by [`Trace::write_csv`]; the header is mandatory.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<TraceRecord>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TRACE_HEADER {
        return Err(Error::parse("line 1", format!("expected header '{TRACE_HEADER}'")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let loc = format!("line {}", i + 2);
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 7 {
            return Err(Error::parse(loc, format!("expected 7 fields, found {}", fields.len())));
        }
        let k = fields[0]
            .parse::<usize>()
            .map_err(|e| Error::parse(loc.clone(), e.to_string()))?;
        let mut v = [0.0; 6];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = f.parse::<f64>().map_err(|e| Error::parse(loc.clone(), e.to_string()))?;
        }
        out.push(TraceRecord {
            k,
            f_x: v[0],
            f_s: v[1],
            g_s: v[2],
            penalty_s: v[3],
            residual_s: v[4],
            dx_norm: v[5],
        });
    }
    Ok(out)
}
