//! Partition summaries and timing reports.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::parallel::TimingReport;
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceEntry {
    pub parts: [u16; 2],
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub n_parts: usize,
    pub part_sizes: Vec<usize>,
    pub imbalance: f64,
    pub interface_nodes: usize,
    pub interfaces: Vec<InterfaceEntry>,
    /// Part of each element in mesh order.
    pub labels: Vec<u16>,
}

impl PartitionFile {
    pub fn new(p: &Partition) -> Self {
        Self {
            n_parts: p.n_parts,
            part_sizes: p.part_sizes.clone(),
            imbalance: p.imbalance(),
            interface_nodes: p.interface_nodes().len(),
            interfaces: p
                .interfaces
                .iter()
                .map(|(&(a, b), v)| InterfaceEntry { parts: [a, b], nodes: v.len() })
                .collect(),
            labels: p.labels.clone(),
        }
    }
}

pub fn partition_json(p: &Partition) -> String {
    serde_json::to_string_pretty(&PartitionFile::new(p)).expect("partition serializes")
}

/// One row per worker: `worker,t_c,t_w,t_t` in seconds.
pub fn timing_csv(report: &TimingReport) -> String {
    let mut s = String::from("worker,t_c [s],t_w [s],t_t [s]\n");
    for w in &report.workers {
        writeln!(s, "{},{:.16e},{:.16e},{:.16e}", w.worker, w.t_c, w.t_w, w.t_t).unwrap();
    }
    s
}

/// Table rows `N, t_C, t_W, t_T, s, η` against the first report, which is
/// taken as the serial run.
pub fn timing_table(reports: &[TimingReport]) -> String {
    let mut s = format!("{:>6} {:>12} {:>12} {:>12} {:>8} {:>6}\n", "N", "t_C [s]", "t_W [s]", "t_T [s]", "s", "eta");
    let Some(base) = reports.first() else { return s };
    for r in reports {
        writeln!(
            s,
            "{:>6} {:>12.4} {:>12.4} {:>12.4} {:>8.2} {:>6.2}",
            r.n_workers,
            r.t_c,
            r.t_w,
            r.t_t,
            r.speedup_over(base),
            r.efficiency_over(base)
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::WorkerTiming;

    fn report(t: &[f64]) -> TimingReport {
        TimingReport::from_workers(
            t.iter().enumerate().map(|(w, &t)| WorkerTiming { worker: w, t_c: t, t_w: 0.0, t_t: t }).collect(),
        )
    }

    #[test]
    fn table_reports_speedup_and_efficiency() {
        let table = timing_table(&[report(&[6566.12]), report(&[3234.37, 3200.0])]);
        let last = table.lines().last().unwrap();
        assert!(last.ends_with("2.03   1.02"), "{last}");
    }

    #[test]
    fn csv_lists_workers() {
        let csv = timing_csv(&report(&[1.0, 2.0]));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().starts_with("1,2.0000000000000000e0"));
    }
}
