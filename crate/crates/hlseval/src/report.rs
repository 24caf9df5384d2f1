// SPDX-License-Identifier: Apache-2.0

//! pass@k aggregation over persisted sample records, and report emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use hlseval_core::passk::{mean_pass_at_k, PassAtKError};
use hlseval_core::prompts::TaskId;
use hlseval_core::score::Metric;
use hlseval_core::table::{MetricRow, MetricTable};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::SampleRecord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("no records for model `{model}`, task `{task}`")]
    NoRecords { model: String, task: String },
    #[error("case `{case}`: {source}")]
    PassAtK {
        case: String,
        #[source]
        source: PassAtKError,
    },
    #[error(transparent)]
    Aggregate(#[from] PassAtKError),
    #[error("unknown report format `{0}` (expected markdown, csv, or json)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(ReportError::UnknownFormat(s.into())),
        }
    }
}

/// `(n, c)` per case for one (model, task, metric), in case-name order.
pub fn case_counts(records: &[SampleRecord], model: &str, task: TaskId, metric: Metric) -> Vec<(String, u32, u32)> {
    let mut per_case: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.model_id == model && r.task_id == task) {
        let e = per_case.entry(&r.case_name).or_default();
        e.0 += 1;
        e.1 += u32::from(r.flags().get(metric));
    }
    per_case.into_iter().map(|(c, (n, k))| (c.to_string(), n, k)).collect()
}

/// Mean pass@k over the distinct cases of `records` for one (model, task,
/// metric). Cases must share one sample count unless `allow_mixed_n`.
pub fn aggregate(
    records: &[SampleRecord],
    model: &str,
    task: TaskId,
    metric: Metric,
    k: u32,
    allow_mixed_n: bool,
) -> Result<f64, ReportError> {
    let counts = case_counts(records, model, task, metric);
    if counts.is_empty() {
        return Err(ReportError::NoRecords {
            model: model.into(),
            task: task.to_string(),
        });
    }
    for (case, n, _) in &counts {
        if k > *n {
            return Err(ReportError::PassAtK {
                case: case.clone(),
                source: PassAtKError::KOutOfRange { n: *n, k },
            });
        }
    }
    let pairs: Vec<(u32, u32)> = counts.iter().map(|(_, n, c)| (*n, *c)).collect();
    Ok(mean_pass_at_k(&pairs, k, allow_mixed_n)?)
}

/// Smallest per-case sample count among `records` of `task`.
fn min_n(records: &[SampleRecord], task: TaskId) -> Option<u32> {
    let mut per: BTreeMap<(&str, &str), u32> = BTreeMap::new();
    for r in records.iter().filter(|r| r.task_id == task) {
        *per.entry((&r.model_id, &r.case_name)).or_default() += 1;
    }
    per.into_values().min()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TableOptions {
    /// Second k column; defaults to the per-case sample count.
    pub k: Option<u32>,
    pub allow_mixed_n: bool,
}

/// One table per task present in `records`, one row per model.
///
/// Columns are pass@1 and pass@k for each metric; when k is 1 there is a
/// single column per metric.
pub fn build_tables(records: &[SampleRecord], opts: TableOptions) -> Result<Vec<(TaskId, MetricTable)>, ReportError> {
    let mut tasks: Vec<TaskId> = records.iter().map(|r| r.task_id).collect();
    tasks.sort();
    tasks.dedup();
    let mut out = Vec::new();
    for task in tasks {
        let n = min_n(records, task).unwrap_or(1);
        let k = opts.k.unwrap_or(n);
        let ks = if k == 1 { vec![1] } else { vec![1, k] };
        let mut models: Vec<&str> = records.iter().filter(|r| r.task_id == task).map(|r| r.model_id.as_str()).collect();
        models.sort();
        models.dedup();
        let mut table = MetricTable::new(format!("Task: {task}"), ks.clone());
        for model in models {
            let mut rates: [Vec<f64>; 4] = Default::default();
            for (slot, metric) in rates.iter_mut().zip(Metric::ALL) {
                for &k in &ks {
                    slot.push(aggregate(records, model, task, metric, k, opts.allow_mixed_n)?);
                }
            }
            table.rows.push(MetricRow {
                model: model.to_string(),
                rates,
            });
        }
        out.push((task, table));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    task: TaskId,
    #[serde(flatten)]
    table: MetricTable,
}

pub fn emit_report(tables: &[(TaskId, MetricTable)], format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => {
            let mut out = String::new();
            for (i, (_, table)) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "### {}\n", table.title);
                out.push_str(&table.to_markdown());
            }
            out
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let _ = w.write_record(["task", "model", "metric", "k", "rate"]);
            for (task, table) in tables {
                for row in &table.rows {
                    for (metric, values) in Metric::ALL.iter().zip(&row.rates) {
                        for (k, v) in table.ks.iter().zip(values) {
                            let _ = w.write_record([task.as_str(), &row.model, metric.as_str(), &k.to_string(), &v.to_string()]);
                        }
                    }
                }
            }
            String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
        }
        ReportFormat::Json => {
            let list: Vec<JsonTable> = tables
                .iter()
                .map(|(task, table)| JsonTable {
                    task: *task,
                    table: table.clone(),
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&list).expect("tables serialize");
            s.push('\n');
            s
        }
    }
}

/// Parses the JSON emitted by [`emit_report`].
pub fn parse_json_report(text: &str) -> serde_json::Result<Vec<(TaskId, MetricTable)>> {
    let list: Vec<JsonTable> = serde_json::from_str(text)?;
    Ok(list.into_iter().map(|t| (t.task, t.table)).collect())
}
