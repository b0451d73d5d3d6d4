use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::psi_sum;

use super::{fmt_real, with_jobs};

/// CSV header of a sweep.
pub const SWEEP_COLUMNS: [&str; 7] = [
    "t",
    "p",
    "delta",
    "psi_sum",
    "prop_residual",
    "delta_scaled",
    "error",
];

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t: u64,
    pub p: u64,
    pub delta: f64,
    pub psi_sum: f64,
    /// `psi_sum - (pi t - P(t)) / 8`.
    pub prop_residual: f64,
    pub extra: BTreeMap<String, f64>,
}

/// A row or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: u64,
    pub outcome: std::result::Result<SweepRecord, String>,
}

/// `points` values from `t_min` to `t_max`, evenly spaced in `ln t`, rounded.
pub fn log_spaced(t_min: u64, t_max: u64, points: usize) -> Result<Vec<u64>> {
    if t_min < 1 {
        return Err(Error::Precondition("t_min must be at least 1".into()));
    }
    if points < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 points, got {points}"
        )));
    }
    if t_max < t_min {
        return Err(Error::Precondition(format!(
            "t_max = {t_max} below t_min = {t_min}"
        )));
    }
    let (a, b) = ((t_min as f64).ln(), (t_max as f64).ln());
    let last = points - 1;
    Ok((0..points)
        .map(|i| match i {
            0 => t_min,
            _ if i == last => t_max,
            _ => (a + (b - a) * i as f64 / last as f64).exp().round() as u64,
        })
        .collect())
}

fn row(t: u64) -> SweepRow {
    let outcome = psi_sum(t)
        .and_then(|s| crate::lattice::count_lattice_points(t).map(|c| (s, c)))
        .map(|(s, c)| {
            let mut extra = BTreeMap::new();
            extra.insert("delta_scaled".to_string(), c.delta / (t as f64).powf(0.25));
            SweepRecord {
                t,
                p: c.p,
                delta: c.delta,
                psi_sum: s.sum,
                prop_residual: s.residual,
                extra,
            }
        })
        .map_err(|e| e.to_string());
    SweepRow { t, outcome }
}

/// Evaluates every row on `jobs` workers; rows come back in `t` order.
pub fn sweep(t_min: u64, t_max: u64, points: usize, jobs: usize) -> Result<Vec<SweepRow>> {
    let ts = log_spaced(t_min, t_max, points)?;
    with_jobs(jobs, || ts.par_iter().map(|&t| row(t)).collect())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        let fields: Vec<String> = match &r.outcome {
            Ok(rec) => vec![
                rec.t.to_string(),
                rec.p.to_string(),
                fmt_real(rec.delta),
                fmt_real(rec.psi_sum),
                fmt_real(rec.prop_residual),
                fmt_real(rec.extra["delta_scaled"]),
                String::new(),
            ],
            Err(msg) => {
                let mut v = vec![r.t.to_string()];
                v.extend(std::iter::repeat_n(String::new(), 5));
                v.push(msg.clone());
                v
            }
        };
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// A sweep rendered as CSV text.
pub fn sweep_csv(t_min: u64, t_max: u64, points: usize, jobs: usize) -> Result<String> {
    let rows = sweep(t_min, t_max, points, jobs)?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows)?;
    String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
}

/// Largest `|psi_sum - (pi t - P(t)) / 8|` over every `1 <= t <= t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub t_max: u64,
    pub max_abs_residual: f64,
    pub argmax: u64,
}

pub fn calibrate_proposition(t_max: u64, jobs: usize) -> Result<Calibration> {
    crate::lattice::check_t(t_max)?;
    let best = with_jobs(jobs, || {
        (1..=t_max)
            .into_par_iter()
            .map(|t| (psi_sum(t).map(|s| s.residual.abs()).unwrap_or(f64::NAN), t))
            .reduce(
                || (0.0, 0),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                },
            )
    })?;
    Ok(Calibration {
        t_max,
        max_abs_residual: best.0,
        argmax: best.1,
    })
}
