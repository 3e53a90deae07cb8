//! CSV export of partition matrices, coefficient vectors, and trajectories.
//!
//! Partition strings contain commas, so they are always double-quoted.
//! Floats are written with Rust's shortest round-trip formatting.

use crate::linearizer::PartitionMatrix;
use crate::measure::ProductMeasure;
use crate::partition::SetPartition;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Square matrix with a header row of canonical partition strings; each
/// data row starts with its own partition string.
pub fn matrix_csv(m: &PartitionMatrix) -> String {
    let parts = m.enumeration().partitions();
    let mut out = String::from("partition");
    for p in parts {
        out.push(',');
        out.push_str(&quote(&p.to_string()));
    }
    out.push('\n');
    for (i, p) in parts.iter().enumerate() {
        out.push_str(&quote(&p.to_string()));
        for j in 0..parts.len() {
            out.push(',');
            out.push_str(&m.entries()[[i, j]].to_string());
        }
        out.push('\n');
    }
    out
}

/// Coefficient rows over time: header of partition strings, one row per
/// time label.
pub fn coefficients_csv(partitions: &[SetPartition], rows: &[(String, Vec<f64>)]) -> String {
    let mut out = String::from("t");
    for p in partitions {
        out.push(',');
        out.push_str(&quote(&p.to_string()));
    }
    out.push('\n');
    for (label, values) in rows {
        out.push_str(label);
        for v in values {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// One row per (time, configuration, weight); configurations are dash-joined
/// site values, so no quoting is needed.
pub fn trajectory_csv(labels: &[String], measures: &[ProductMeasure]) -> String {
    let mut out = String::from("t,configuration,weight\n");
    for (label, m) in labels.iter().zip(measures) {
        let space = m.space();
        for (idx, w) in m.weights().iter().enumerate() {
            let cfg = space.config_of(idx);
            let cfg_str = cfg
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join("-");
            out.push_str(&format!("{label},{cfg_str},{w}\n"));
        }
    }
    out
}
