//! SPMD drivers. Both backends run the same worker phases; they differ only
//! in how workers are scheduled and how outboxes are shared.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Barrier, Mutex, RwLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{Snapshot, StepContext, TransientOutput, TransientState};
use crate::error::{Error, Result};

use super::plan::ExchangePlan;
use super::timing::{replay, TimingReport, WorkerClock};
use super::worker::Worker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Workers interleaved on the calling thread in a fixed order.
    #[default]
    Sim,
    /// One OS thread per worker with a barrier per step.
    #[serde(alias = "threads")]
    Proc,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim" => Ok(Backend::Sim),
            "proc" | "threads" => Ok(Backend::Proc),
            _ => Err(crate::error::invalid(format!("unknown backend {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpmdOutput {
    pub output: TransientOutput,
    pub state: TransientState,
    pub timing: TimingReport,
}

/// Snapshot node index and its displacement.
type NodeValue = (usize, [f64; 3]);

/// What one worker produced, merged after the run.
#[derive(Default)]
struct Collected {
    probes: Vec<(usize, [f64; 7])>,
    snapshots: Vec<(usize, Vec<NodeValue>)>,
}

impl Collected {
    fn record(&mut self, w: &Worker<'_>, ctx: &StepContext<'_>, n: usize) {
        if n % ctx.record_every == 0 {
            self.probes.extend(w.probe_rows(ctx, n));
        }
        if ctx.snapshot_every.is_some_and(|k| n % k == 0) {
            self.snapshots.push((n, w.snapshot_values()));
        }
    }
}

fn merge(ctx: &StepContext<'_>, collected: Vec<Collected>) -> TransientOutput {
    let mut out = TransientOutput::new(ctx);
    let mut snaps: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
    for c in collected {
        for (p, row) in c.probes {
            out.probes[p].rows.push(row);
        }
        for (n, values) in c.snapshots {
            let buf = snaps.entry(n).or_insert_with(|| vec![0.0; 3 * ctx.snapshot_nodes.len()]);
            for (i, v) in values {
                buf[3 * i..3 * i + 3].copy_from_slice(&v);
            }
        }
    }
    out.snapshots =
        snaps.into_iter().map(|(step, displacement)| Snapshot { step, time: ctx.time(step), displacement }).collect();
    out
}

fn gather_state(
    plan: &ExchangePlan,
    workers: &[Worker<'_>],
    step: usize,
    guard: crate::integrator::DivergenceGuard,
) -> TransientState {
    let mut u_prev = vec![0.0; plan.n_dof];
    let mut u_curr = vec![0.0; plan.n_dof];
    for w in workers.iter().rev() {
        for (l, &d) in w.plan.dofs.iter().enumerate() {
            u_prev[d as usize] = w.u_prev[l];
            u_curr[d as usize] = w.u_curr[l];
        }
    }
    TransientState { step, u_prev, u_curr, guard }
}

fn check_plan(ctx: &StepContext<'_>, plan: &ExchangePlan) -> Result<()> {
    ctx.validate()?;
    if plan.n_dof != ctx.tables.n_dof {
        return Err(Error::LengthMismatch { expected: ctx.tables.n_dof, got: plan.n_dof });
    }
    Ok(())
}

/// Runs steps `state.step ..= last_step` on `plan.n_workers()` workers.
/// Probe rows and snapshots are bitwise identical to the serial driver.
pub fn spmd_run(
    ctx: &StepContext<'_>,
    plan: &ExchangePlan,
    backend: Backend,
    state: TransientState,
    last_step: usize,
) -> Result<SpmdOutput> {
    check_plan(ctx, plan)?;
    match backend {
        Backend::Sim => run_sim(ctx, plan, state, last_step),
        Backend::Proc => run_threads(ctx, plan, state, last_step),
    }
}

fn run_sim(ctx: &StepContext<'_>, plan: &ExchangePlan, state: TransientState, last_step: usize) -> Result<SpmdOutput> {
    let n_w = plan.n_workers();
    let coef = ctx.coefficients();
    let mut workers: Vec<Worker<'_>> = (0..n_w).map(|w| Worker::new(w, plan, ctx, &state)).collect();
    let mut outboxes: Vec<Vec<f64>> = plan.workers.iter().map(|w| Vec::with_capacity(w.outbox_len)).collect();
    let mut collected: Vec<Collected> = (0..n_w).map(|_| Collected::default()).collect();
    let mut compute = vec![Vec::new(); n_w];
    let mut exchange = vec![Vec::new(); n_w];
    let mut step = state.step;
    while step <= last_step {
        let mut c = vec![0.0; n_w];
        for (w, worker) in workers.iter_mut().enumerate() {
            let t = Instant::now();
            worker.compute_forces(ctx, &mut outboxes[w]);
            c[w] = t.elapsed().as_secs_f64();
        }
        let views: Vec<&[f64]> = outboxes.iter().map(Vec::as_slice).collect();
        for (w, worker) in workers.iter_mut().enumerate() {
            let t = Instant::now();
            worker.sync(plan, &views);
            exchange[w].push(t.elapsed().as_secs_f64());
        }
        for (w, worker) in workers.iter_mut().enumerate() {
            let t = Instant::now();
            worker.update(ctx, &coef, step)?;
            collected[w].record(worker, ctx, step);
            worker.rotate();
            compute[w].push(c[w] + t.elapsed().as_secs_f64());
        }
        step += 1;
    }
    let state = gather_state(plan, &workers, step, state.guard);
    Ok(SpmdOutput { output: merge(ctx, collected), state, timing: replay(&compute, &exchange) })
}

fn run_threads(
    ctx: &StepContext<'_>,
    plan: &ExchangePlan,
    state: TransientState,
    last_step: usize,
) -> Result<SpmdOutput> {
    let n_w = plan.n_workers();
    let coef = ctx.coefficients();
    let barrier = Barrier::new(n_w);
    // double-buffered by step parity: a fast worker writing step n+1 never
    // races a slow one still reading step n
    let outboxes: Vec<[RwLock<Vec<f64>>; 2]> = plan
        .workers
        .iter()
        .map(|w| [RwLock::new(Vec::with_capacity(w.outbox_len)), RwLock::new(Vec::with_capacity(w.outbox_len))])
        .collect();
    let abort = [AtomicBool::new(false), AtomicBool::new(false)];
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let fail = |step: usize, e: Error| {
        let mut f = failure.lock().unwrap_or_else(|p| p.into_inner());
        if f.is_none() {
            *f = Some(e);
        }
        abort[step % 2].store(true, Ordering::SeqCst);
    };
    let t0 = Instant::now();
    let first = state.step;
    let results: Vec<(Worker<'_>, Collected, WorkerClock)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_w)
            .map(|w| {
                let (barrier, outboxes, abort, fail, state) = (&barrier, &outboxes, &abort, &fail, &state);
                scope.spawn(move || {
                    let mut worker = Worker::new(w, plan, ctx, state);
                    let mut collected = Collected::default();
                    let (mut compute, mut wait) = (0.0, 0.0);
                    barrier.wait();
                    let start = t0.elapsed().as_secs_f64();
                    let mut step = first;
                    let mut failed = false;
                    while step <= last_step {
                        let p = step % 2;
                        let t = Instant::now();
                        if !failed {
                            let mut out = outboxes[w][p].write().unwrap_or_else(|e| e.into_inner());
                            if catch_unwind(AssertUnwindSafe(|| worker.compute_forces(ctx, &mut out))).is_err() {
                                failed = true;
                                fail(
                                    step,
                                    Error::Worker { worker: w, reason: format!("panic in force phase at step {step}") },
                                );
                            }
                        }
                        compute += t.elapsed().as_secs_f64();
                        let t = Instant::now();
                        barrier.wait();
                        if abort[p].load(Ordering::SeqCst) {
                            break;
                        }
                        {
                            let guards: Vec<_> =
                                outboxes.iter().map(|o| o[p].read().unwrap_or_else(|e| e.into_inner())).collect();
                            let views: Vec<&[f64]> = guards.iter().map(|g| g.as_slice()).collect();
                            worker.sync(plan, &views);
                        }
                        wait += t.elapsed().as_secs_f64();
                        let t = Instant::now();
                        match catch_unwind(AssertUnwindSafe(|| worker.update(ctx, &coef, step))) {
                            Ok(Ok(())) => {
                                collected.record(&worker, ctx, step);
                                worker.rotate();
                            }
                            // everyone has passed barrier `step` already, so stop at the next one
                            Ok(Err(e)) => {
                                failed = true;
                                fail(step + 1, e);
                            }
                            Err(_) => {
                                failed = true;
                                fail(
                                    step + 1,
                                    Error::Worker {
                                        worker: w,
                                        reason: format!("panic in update phase at step {step}"),
                                    },
                                );
                            }
                        }
                        compute += t.elapsed().as_secs_f64();
                        step += 1;
                    }
                    let end = t0.elapsed().as_secs_f64();
                    (worker, collected, WorkerClock { start, end, compute, wait })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
    });
    if let Some(e) = failure.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(e);
    }
    let clocks: Vec<WorkerClock> = results.iter().map(|r| r.2).collect();
    let (workers, collected): (Vec<Worker<'_>>, Vec<Collected>) = results.into_iter().map(|(w, c, _)| (w, c)).unzip();
    let end = if first <= last_step { last_step + 1 } else { first };
    let state = gather_state(plan, &workers, end, state.guard);
    Ok(SpmdOutput { output: merge(ctx, collected), state, timing: TimingReport::from_clocks(&clocks) })
}
