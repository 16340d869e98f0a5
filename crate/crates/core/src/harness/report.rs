use std::collections::BTreeMap;
use std::io::Write;

use super::TouchRecord;
use crate::error::{Error, Result};

pub const RECORDS_HEADER: &str =
    "run_id,criterion,touch_index,pos_err_m,rot_err_deg,adi_m,gain,planning_ms,filter_ms,fallback";

const SUMMARY_NOTE: &str =
    "# quartiles: linear interpolation between order statistics, q(p) = x[floor(h)] + (h - floor(h))(x[floor(h)+1] - x[floor(h)]), h = (n - 1)p";
const SUMMARY_HEADER: &str = "criterion,touch_index,metric,count,mean,median,min,max,q1,q3";

/// Nine significant digits.
fn float(v: f64) -> String {
    format!("{v:.8e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn write_records_csv<W: Write>(records: &[TouchRecord], mut out: W) -> Result<()> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.run_id,
            r.criterion.name(),
            r.touch_index,
            float(r.pos_err_m),
            float(r.rot_err_deg),
            float(r.adi_m),
            optional(r.gain),
            optional(r.planning_ms),
            optional(r.filter_ms),
            u8::from(r.fallback),
        )?;
    }
    Ok(())
}

/// Quantile of ascending `sorted` data by linear interpolation.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub criterion: String,
    pub touch_index: usize,
    pub metric: &'static str,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub q3: f64,
}

type Metric = (&'static str, fn(&TouchRecord) -> f64);

const METRICS: [Metric; 3] = [
    ("pos_err_m", |r| r.pos_err_m),
    ("rot_err_deg", |r| r.rot_err_deg),
    ("adi_m", |r| r.adi_m),
];

/// Statistics across runs for every criterion, touch index and error metric.
/// Rows follow the order in which criteria first appear, then touch index.
pub fn summarize(records: &[TouchRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::invalid("no records to summarize"));
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<&TouchRecord>> = BTreeMap::new();
    for r in records {
        let name = r.criterion.name().to_string();
        let c = match order.iter().position(|n| *n == name) {
            Some(c) => c,
            None => {
                order.push(name);
                order.len() - 1
            }
        };
        groups.entry((c, r.touch_index)).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((c, touch_index), group) in groups {
        for (metric, get) in METRICS {
            let mut v: Vec<f64> = group.iter().map(|r| get(r)).collect();
            v.sort_by(f64::total_cmp);
            rows.push(SummaryRow {
                criterion: order[c].clone(),
                touch_index,
                metric,
                count: v.len(),
                mean: v.iter().sum::<f64>() / v.len() as f64,
                median: quantile(&v, 0.5),
                min: v[0],
                max: v[v.len() - 1],
                q1: quantile(&v, 0.25),
                q3: quantile(&v, 0.75),
            });
        }
    }
    Ok(rows)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_NOTE}")?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.criterion,
            r.touch_index,
            r.metric,
            r.count,
            float(r.mean),
            float(r.median),
            float(r.min),
            float(r.max),
            float(r.q1),
            float(r.q3),
        )?;
    }
    Ok(())
}
