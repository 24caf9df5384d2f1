// SPDX-License-Identifier: Apache-2.0

//! Metric tables: one row per model, one column group per metric, one column
//! per reported k.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::score::Metric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    /// `rates[metric][j]` is pass@`ks[j]` for `Metric::ALL[metric]`.
    pub rates: [Vec<f64>; 4],
}

impl MetricRow {
    pub fn rate(&self, metric: Metric, k_index: usize) -> f64 {
        let m = Metric::ALL.iter().position(|&x| x == metric).unwrap_or(0);
        self.rates[m][k_index]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub title: String,
    pub ks: Vec<u32>,
    pub rows: Vec<MetricRow>,
}

impl MetricTable {
    pub fn new(title: impl Into<String>, ks: Vec<u32>) -> Self {
        MetricTable {
            title: title.into(),
            ks,
            rows: Vec::new(),
        }
    }

    /// Column names after `Model`, e.g. `Can Parse pass@1`.
    pub fn column_names(&self) -> Vec<String> {
        Metric::ALL
            .iter()
            .flat_map(|m| self.ks.iter().map(move |k| format!("{} pass@{k}", m.label())))
            .collect()
    }

    /// Every rate lies in `[0, 1]` and every row has one value per k.
    pub fn is_well_formed(&self) -> bool {
        self.rows.iter().all(|r| {
            r.rates
                .iter()
                .all(|v| v.len() == self.ks.len() && v.iter().all(|x| (0.0..=1.0).contains(x)))
        })
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("| Model |");
        for name in self.column_names() {
            let _ = write!(out, " {name} |");
        }
        out.push_str("\n|:---|");
        for _ in 0..Metric::ALL.len() * self.ks.len() {
            out.push_str("---:|");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} |", row.model);
            for values in &row.rates {
                for v in values {
                    let _ = write!(out, " {} |", format_percent(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// One-decimal percentage, e.g. `0.941` -> `94.1%`.
pub fn format_percent(rate: f64) -> String {
    format!("{:.1}%", rate * 100.0)
}
