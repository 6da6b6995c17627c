use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact header of the trace CSV.
pub const TRACE_HEADER: [&str; 11] = [
    "iter",
    "f",
    "aug_lagrangian",
    "primal_residual",
    "violation_pz",
    "delta_w",
    "r1",
    "r2",
    "r3",
    "r4",
    "r5",
];

/// Diagnostics of one iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub f: f64,
    pub aug_lagrangian: f64,
    /// `‖Ax − z‖`.
    pub primal_residual: f64,
    /// `‖p − z‖²`.
    pub violation_pz: f64,
    /// `Δ_k = ‖w^k − w^{k−1}‖²` with `w = (y, x, p, z)`.
    pub delta_w: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub r5: f64,
}

impl IterationRecord {
    pub fn stationarity(&self) -> [f64; 5] {
        [self.r1, self.r2, self.r3, self.r4, self.r5]
    }

    pub fn is_finite(&self) -> bool {
        [
            self.f,
            self.aug_lagrangian,
            self.primal_residual,
            self.violation_pz,
            self.delta_w,
            self.r1,
            self.r2,
            self.r3,
            self.r4,
            self.r5,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Which iterations end up in the trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceMode {
    /// Every iteration up to 1000, every 100th afterwards, plus the last.
    #[default]
    Thinned,
    /// Every iteration.
    Full,
    /// Only the last iteration.
    Off,
}

impl TraceMode {
    pub fn keeps(&self, iter: usize) -> bool {
        match self {
            TraceMode::Thinned => iter <= 1000 || iter.is_multiple_of(100),
            TraceMode::Full => true,
            TraceMode::Off => false,
        }
    }
}

pub fn write_trace_csv<W: Write>(w: W, records: &[IterationRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(TRACE_HEADER)
        .map_err(|e| Error::Parse(e.to_string()))?;
    for r in records {
        wtr.write_record(&[
            r.iter.to_string(),
            format!("{:e}", r.f),
            format!("{:e}", r.aug_lagrangian),
            format!("{:e}", r.primal_residual),
            format!("{:e}", r.violation_pz),
            format!("{:e}", r.delta_w),
            format!("{:e}", r.r1),
            format!("{:e}", r.r2),
            format!("{:e}", r.r3),
            format!("{:e}", r.r4),
            format!("{:e}", r.r5),
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: std::io::Read>(r: R) -> Result<Vec<IterationRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected trace header {header:?}")));
    }
    rdr.deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}
