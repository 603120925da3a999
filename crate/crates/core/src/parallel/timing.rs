//! Calculation, waiting and total times, speedup and efficiency.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerTiming {
    pub worker: usize,
    /// Calculation time.
    pub t_c: f64,
    /// Waiting and communication time.
    pub t_w: f64,
    /// Total time from the earliest worker start to this worker's finish.
    pub t_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub n_workers: usize,
    pub workers: Vec<WorkerTiming>,
    /// Average calculation time over workers.
    pub t_c: f64,
    /// Average waiting and communication time over workers.
    pub t_w: f64,
    /// Slowest worker's total time.
    pub t_t: f64,
}

/// Raw per-worker clock readings in seconds on a common time base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkerClock {
    pub start: f64,
    pub end: f64,
    pub compute: f64,
    pub wait: f64,
}

pub fn speedup(t_t_serial: f64, t_t_parallel: f64) -> f64 {
    t_t_serial / t_t_parallel
}

pub fn efficiency(speedup: f64, n_workers: usize) -> f64 {
    speedup / n_workers as f64
}

impl TimingReport {
    /// All workers are taken to commence when the earliest one starts.
    pub fn from_clocks(clocks: &[WorkerClock]) -> Self {
        let t0 = clocks.iter().map(|c| c.start).fold(f64::INFINITY, f64::min);
        let workers: Vec<WorkerTiming> = clocks
            .iter()
            .enumerate()
            .map(|(w, c)| WorkerTiming { worker: w, t_c: c.compute, t_w: c.wait + (c.start - t0), t_t: c.end - t0 })
            .collect();
        Self::from_workers(workers)
    }

    pub fn from_workers(workers: Vec<WorkerTiming>) -> Self {
        let n = workers.len().max(1) as f64;
        Self {
            n_workers: workers.len(),
            t_c: workers.iter().map(|w| w.t_c).sum::<f64>() / n,
            t_w: workers.iter().map(|w| w.t_w).sum::<f64>() / n,
            t_t: workers.iter().map(|w| w.t_t).fold(0.0, f64::max),
            workers,
        }
    }

    pub fn speedup_over(&self, serial: &TimingReport) -> f64 {
        speedup(serial.t_t, self.t_t)
    }

    pub fn efficiency_over(&self, serial: &TimingReport) -> f64 {
        efficiency(self.speedup_over(serial), self.n_workers)
    }
}

/// Bulk-synchronous replay: `compute[w][s]` and `exchange[w][s]` are the
/// calculation and communication times of worker `w` in step `s`. Every
/// step ends when the slowest worker has finished both.
pub fn replay(compute: &[Vec<f64>], exchange: &[Vec<f64>]) -> TimingReport {
    let n_w = compute.len();
    let n_s = compute.iter().map(Vec::len).max().unwrap_or(0);
    let at = |v: &[Vec<f64>], w: usize, s: usize| v.get(w).and_then(|x| x.get(s)).copied().unwrap_or(0.0);
    let mut workers: Vec<WorkerTiming> =
        (0..n_w).map(|w| WorkerTiming { worker: w, t_c: 0.0, t_w: 0.0, t_t: 0.0 }).collect();
    let mut clock = 0.0;
    for s in 0..n_s {
        let step = (0..n_w).map(|w| at(compute, w, s) + at(exchange, w, s)).fold(0.0, f64::max);
        clock += step;
        for (w, t) in workers.iter_mut().enumerate() {
            let c = at(compute, w, s);
            t.t_c += c;
            t.t_w += step - c;
            t.t_t = clock;
        }
    }
    TimingReport::from_workers(workers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_core_row_from_the_scaling_table() {
        let s = speedup(6566.12, 3234.37);
        assert_eq!(format!("{s:.2}"), "2.03");
        assert_eq!(format!("{:.2}", efficiency(s, 2)), "1.02");
    }

    #[test]
    fn large_run_efficiency() {
        assert_eq!(format!("{:.2}", efficiency(84.3, 128)), "0.66");
    }

    #[test]
    fn equal_workloads_do_not_wait() {
        let c = vec![vec![1.0; 10]; 4];
        let x = vec![vec![0.0; 10]; 4];
        let r = replay(&c, &x);
        assert_eq!(r.t_w, 0.0);
        assert_eq!(r.t_t, 10.0);
        for w in &r.workers {
            assert_eq!(w.t_c + w.t_w, w.t_t);
        }
    }

    #[test]
    fn straggler_gap_shows_up_as_waiting() {
        let mut c = vec![vec![1.0; 10]; 4];
        c[2] = vec![2.0; 10];
        let r = replay(&c, &vec![vec![0.0; 10]; 4]);
        for w in &r.workers {
            let expect = if w.worker == 2 { 0.0 } else { 10.0 };
            assert_eq!(w.t_w, expect);
        }
        assert_eq!(r.t_t, 20.0);
    }

    #[test]
    fn clocks_use_earliest_start() {
        let r = TimingReport::from_clocks(&[
            WorkerClock { start: 1.0, end: 5.0, compute: 3.0, wait: 1.0 },
            WorkerClock { start: 1.5, end: 5.0, compute: 3.0, wait: 0.5 },
        ]);
        assert_eq!(r.t_t, 4.0);
        assert_eq!(r.workers[1].t_w, 1.0);
        for w in &r.workers {
            assert_eq!(w.t_c + w.t_w, w.t_t);
        }
    }
}
