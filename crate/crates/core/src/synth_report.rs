// SPDX-License-Identifier: Apache-2.0

//! Parsing of HLS synthesis reports (the `csynth.rpt` table layout).
//!
//! Only two things are read: the worst-case latency in cycles from the
//! `Latency (cycles)` summary table, and the `Total` row of the utilization
//! summary. Anything unrecognized is ignored.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthReport {
    pub latency_cycles: Option<u64>,
    /// Resource name to count, e.g. `LUT`, `FF`, `DSP`, `BRAM`.
    pub resources: BTreeMap<String, u64>,
}

fn cells(line: &str) -> Option<Vec<&str>> {
    let t = line.trim();
    if !t.starts_with('|') {
        return None;
    }
    let inner = t.trim_start_matches('|').trim_end_matches('|');
    Some(inner.split('|').map(str::trim).collect())
}

fn resource_name(header: &str) -> String {
    match header {
        "BRAM_18K" | "BRAM" => "BRAM".to_string(),
        other => other.to_string(),
    }
}

pub fn parse_synth_report(text: &str) -> SynthReport {
    let mut report = SynthReport::default();
    let lines: Vec<&str> = text.lines().collect();

    if let Some(pos) = lines.iter().position(|l| l.contains("Latency (cycles)")) {
        // Header rows are followed by a separator and then the first data row.
        let data = lines[pos + 1..]
            .iter()
            .filter_map(|l| cells(l))
            .find(|c| c.first().is_some_and(|v| v.parse::<u64>().is_ok() || *v == "?"));
        if let Some(row) = data {
            // min, max: the max column is the worst case.
            let max = row.get(1).or(row.first());
            report.latency_cycles = max.and_then(|v| v.parse().ok());
        }
    }

    let mut header: Option<Vec<&str>> = None;
    for line in &lines {
        let Some(row) = cells(line) else { continue };
        if row.first() == Some(&"Name") && row.len() > 1 {
            header = Some(row);
        } else if row.first() == Some(&"Total") {
            if let Some(h) = &header {
                for (name, value) in h.iter().zip(row.iter()).skip(1) {
                    if let Ok(n) = value.parse::<u64>() {
                        report.resources.insert(resource_name(name), n);
                    }
                }
                break;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const LATENCY_ONLY: &str = "\
+ Latency:
    * Summary:
    +---------+---------+-----------+-----------+-----+-----+---------+
    |  Latency (cycles) |   Latency (absolute)  |  Interval | Pipeline|
    |   min   |   max   |    min    |    max    | min | max |   Type  |
    +---------+---------+-----------+-----------+-----+-----+---------+
    |       40|       42|   0.400 us|   0.420 us|   41|   43|       no|
    +---------+---------+-----------+-----------+-----+-----+---------+
";

    const RESOURCES_ONLY: &str = "\
== Utilization Estimates
================================================================
* Summary:
+---------------------+---------+------+---------+---------+-----+
|         Name        | BRAM_18K|  DSP |    FF   |   LUT   | URAM|
+---------------------+---------+------+---------+---------+-----+
|DSP                  |        -|     4|        -|        -|    -|
|Expression           |        -|     -|        0|       56|    -|
+---------------------+---------+------+---------+---------+-----+
|Total                |        2|    16|     1146|     1066|    0|
+---------------------+---------+------+---------+---------+-----+
|Available            |      280|   220|   106400|    53200|    0|
";

    #[test]
    fn latency_table() {
        let r = parse_synth_report(LATENCY_ONLY);
        assert_eq!(r.latency_cycles, Some(42));
        assert!(r.resources.is_empty());
    }

    #[test]
    fn resources_without_latency() {
        let r = parse_synth_report(RESOURCES_ONLY);
        assert_eq!(r.latency_cycles, None);
        assert_eq!(r.resources["BRAM"], 2);
        assert_eq!(r.resources["DSP"], 16);
        assert_eq!(r.resources["FF"], 1146);
        assert_eq!(r.resources["LUT"], 1066);
        assert_eq!(r.resources["URAM"], 0);
    }

    #[test]
    fn empty_text() {
        assert_eq!(parse_synth_report(""), SynthReport::default());
    }

    #[test]
    fn undefined_latency() {
        let text = LATENCY_ONLY.replace("       40|       42|", "        ?|        ?|");
        assert_eq!(parse_synth_report(&text).latency_cycles, None);
    }
}
