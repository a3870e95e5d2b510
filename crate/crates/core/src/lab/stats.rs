use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::sweep::SweepRow;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum GroupBy {
    Operator,
    InitialCondition,
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stat {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupSummary {
    pub key: usize,
    pub rows: usize,
    /// Rows that equilibrated and enter the statistics.
    pub used: usize,
    pub censored: usize,
    pub annihilated: usize,
    pub t_eq: Option<Stat>,
    pub complexity: Option<Stat>,
    pub entropy: Option<Stat>,
}

/// Per-group statistics over equilibrated rows; censored and annihilated
/// rows are only counted. Groups come out sorted by key.
pub fn summarize(rows: &[SweepRow], by: GroupBy) -> Result<Vec<GroupSummary>> {
    if rows.is_empty() {
        return Err(Error::EmptyGroup("no rows to summarize".into()));
    }
    let mut groups: BTreeMap<usize, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        let key = match by {
            GroupBy::Operator => r.operator_index,
            GroupBy::InitialCondition => r.ic_index,
        };
        groups.entry(key).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(key, members)| {
            let used: Vec<&&SweepRow> = members.iter().filter(|r| r.usable()).collect();
            let column = |f: &dyn Fn(&SweepRow) -> Option<f64>| -> Option<Stat> {
                Stat::of(&used.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            GroupSummary {
                key,
                rows: members.len(),
                used: used.len(),
                censored: members.iter().filter(|r| r.censored).count(),
                annihilated: members.iter().filter(|r| r.annihilated).count(),
                t_eq: column(&|r| r.t_eq.map(|t| t as f64)),
                complexity: column(&|r| r.complexity_at_eq),
                entropy: column(&|r| r.entropy_at_eq),
            }
        })
        .collect())
}

/// One line per group; statistics of groups without equilibrated rows are
/// left empty.
pub fn write_summary_csv<W: Write>(
    summaries: &[GroupSummary],
    key_name: &str,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        key_name,
        "rows",
        "used",
        "censored",
        "annihilated",
        "t_eq_mean",
        "t_eq_std",
        "complexity_mean",
        "complexity_std",
        "entropy_mean",
        "entropy_std",
    ])?;
    let pair = |s: Option<Stat>| {
        s.map_or([String::new(), String::new()], |s| {
            [s.mean.to_string(), s.std.to_string()]
        })
    };
    for g in summaries {
        let mut rec = vec![
            g.key.to_string(),
            g.rows.to_string(),
            g.used.to_string(),
            g.censored.to_string(),
            g.annihilated.to_string(),
        ];
        for s in [g.t_eq, g.complexity, g.entropy] {
            rec.extend(pair(s));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub x_label: String,
    pub y_label: String,
    pub point_count: usize,
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64], x_label: &str, y_label: &str) -> Result<FitReport> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} x values, {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if let Some(v) = xs.iter().chain(ys).find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "log fit needs positive finite values, got {v}"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("zero variance in ln x".into()));
    }
    if ss_tot <= 0.0 {
        return Err(Error::DegenerateFit("zero variance in ln y".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(FitReport {
        slope,
        intercept,
        r_squared: (1.0 - ss_res / ss_tot).clamp(0.0, 1.0),
        x_label: x_label.into(),
        y_label: y_label.into(),
        point_count: lx.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TableFits {
    pub complexity: FitReport,
    pub entropy: Option<FitReport>,
    /// Operators with at least one equilibrated row.
    pub operators_used: usize,
    pub censored_rows: usize,
    pub annihilated_rows: usize,
    /// Rows with `tEq = 0`, counted as one step before taking logs.
    pub zero_shifted_rows: usize,
}

/// ln–ln fits across operators of mean `tEq` against mean complexity and
/// against mean entropy, from the equilibrated rows only.
pub fn fit_operator_means(rows: &[SweepRow]) -> Result<TableFits> {
    let mut by_op: BTreeMap<usize, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.usable()) {
        by_op.entry(r.operator_index).or_default().push(r);
    }
    let mean = |v: &[&SweepRow], f: &dyn Fn(&SweepRow) -> f64| {
        v.iter().map(|r| f(r)).sum::<f64>() / v.len() as f64
    };
    let t_means: Vec<f64> = by_op
        .values()
        .map(|v| mean(v, &|r| r.t_eq.unwrap_or(0).max(1) as f64))
        .collect();
    let c_means: Vec<f64> = by_op
        .values()
        .map(|v| mean(v, &|r| r.complexity_at_eq.unwrap_or(f64::NAN)))
        .collect();
    let h_means: Vec<f64> = by_op
        .values()
        .map(|v| mean(v, &|r| r.entropy_at_eq.unwrap_or(f64::NAN)))
        .collect();
    let complexity = loglog_fit(&t_means, &c_means, "ln mean tEq", "ln mean complexity")?;
    let entropy = loglog_fit(&t_means, &h_means, "ln mean tEq", "ln mean entropy").ok();
    Ok(TableFits {
        complexity,
        entropy,
        operators_used: by_op.len(),
        censored_rows: rows.iter().filter(|r| r.censored).count(),
        annihilated_rows: rows.iter().filter(|r| r.annihilated).count(),
        zero_shifted_rows: rows
            .iter()
            .filter(|r| r.usable() && r.t_eq == Some(0))
            .count(),
    })
}
