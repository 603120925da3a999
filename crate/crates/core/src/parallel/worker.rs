//! Per-worker state and the three phases of one bulk-synchronous step.

use crate::assembly::{probe_row, StepContext, TransientState};
use crate::error::Result;
use crate::integrator::{CdmCoefficients, DivergenceGuard};

use super::plan::{ExchangePlan, WorkerPlan};

/// A probe or snapshot value this worker is responsible for writing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OutputSlot {
    /// Position in the probe list or snapshot node list.
    pub index: usize,
    /// Local index of the x component.
    pub local: usize,
}

pub(crate) struct Worker<'p> {
    pub plan: &'p WorkerPlan,
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub u_next: Vec<f64>,
    pub r_int: Vec<f64>,
    pub r_ext: Vec<f64>,
    pub inv_mass: Vec<f64>,
    pub fixed: Vec<usize>,
    /// `(local DOF, amplitude, signal)` in the global load order.
    pub loads: Vec<(usize, f64, usize)>,
    pub probes: Vec<OutputSlot>,
    pub snapshot: Vec<OutputSlot>,
    pub guard: DivergenceGuard,
}

impl<'p> Worker<'p> {
    pub fn new(id: usize, plan: &'p ExchangePlan, ctx: &StepContext<'_>, state: &TransientState) -> Self {
        let wp = &plan.workers[id];
        let pick = |v: &[f64]| wp.dofs.iter().map(|&d| v[d as usize]).collect::<Vec<_>>();
        let fixed = ctx.bcs.fixed.iter().filter_map(|&d| wp.local_of(d)).collect();
        let loads =
            ctx.bcs.loads.iter().filter_map(|l| wp.local_of(l.dof).map(|i| (i, l.amplitude, l.signal))).collect();
        let owned = |node: u32| plan.owner(3 * node) == Some(id);
        let slot = |(index, node): (usize, u32)| {
            owned(node).then(|| OutputSlot { index, local: wp.local_of(3 * node).expect("owner stores node") })
        };
        let probes = ctx.probes.iter().map(|p| p.node).enumerate().filter_map(slot).collect();
        let snapshot = ctx.snapshot_nodes.iter().copied().enumerate().filter_map(slot).collect();
        let n = wp.dofs.len();
        Self {
            plan: wp,
            u_prev: pick(&state.u_prev),
            u_curr: pick(&state.u_curr),
            u_next: vec![0.0; n],
            r_int: vec![0.0; n],
            r_ext: vec![0.0; n],
            inv_mass: pick(&ctx.tables.inv_mass),
            fixed,
            loads,
            probes,
            snapshot,
            guard: state.guard,
        }
    }

    /// Element forces of owned elements: internal DOFs are summed locally in
    /// ascending element order, shared DOFs are written to `outbox`.
    pub fn compute_forces(&mut self, ctx: &StepContext<'_>, outbox: &mut Vec<f64>) {
        outbox.clear();
        self.r_int.iter_mut().for_each(|v| *v = 0.0);
        let mut ue = [0.0; crate::assembly::tables::MAX_ELEMENT_DOF];
        let mut fe = [0.0; crate::assembly::tables::MAX_ELEMENT_DOF];
        for (k, &e) in self.plan.elements.iter().enumerate() {
            let (g, i) = ctx.tables.locate[e as usize];
            let group = &ctx.tables.groups[g as usize];
            let map = &group.maps[i as usize];
            let local = &self.plan.element_local[k];
            let shared = &self.plan.element_shared[k];
            for (a, &l) in local.iter().enumerate() {
                ue[a] = map.signs[a] as f64 * self.u_curr[l as usize];
            }
            group.element_force_gathered(i as usize, &ue, &mut fe);
            for (a, &l) in local.iter().enumerate() {
                let v = map.signs[a] as f64 * fe[a];
                if shared[a] {
                    outbox.push(v);
                } else {
                    self.r_int[l as usize] += v;
                }
            }
        }
    }

    /// Shared DOF sums in the plan's canonical contribution order.
    pub fn sync(&mut self, plan: &ExchangePlan, outboxes: &[&[f64]]) {
        for &(l, k) in &self.plan.interface {
            let mut acc = 0.0;
            for c in &plan.recipes[k as usize] {
                acc += outboxes[c.worker as usize][c.slot as usize];
            }
            self.r_int[l as usize] = acc;
        }
    }

    /// CDM update, Dirichlet zeroing and the divergence check for `U_{n+1}`.
    pub fn update(&mut self, ctx: &StepContext<'_>, coef: &CdmCoefficients, n: usize) -> Result<()> {
        self.r_ext.iter_mut().for_each(|v| *v = 0.0);
        let t = ctx.time(n);
        for &(l, amp, s) in &self.loads {
            self.r_ext[l] += amp * ctx.signals[s].eval(t);
        }
        for i in 0..self.u_next.len() {
            self.u_next[i] =
                coef.update(self.u_prev[i], self.u_curr[i], self.r_ext[i], self.r_int[i], self.inv_mass[i]);
        }
        for &l in &self.fixed {
            self.u_next[l] = 0.0;
        }
        self.guard.check(&self.u_next, n + 1)
    }

    pub fn probe_rows(&self, ctx: &StepContext<'_>, n: usize) -> Vec<(usize, [f64; 7])> {
        let inv_dt2 = 1.0 / (ctx.dt * ctx.dt);
        self.probes
            .iter()
            .map(|p| {
                let b = p.local;
                (
                    p.index,
                    probe_row(ctx.time(n), inv_dt2, |d| (self.u_prev[b + d], self.u_curr[b + d], self.u_next[b + d])),
                )
            })
            .collect()
    }

    pub fn snapshot_values(&self) -> Vec<(usize, [f64; 3])> {
        self.snapshot
            .iter()
            .map(|s| (s.index, [self.u_curr[s.local], self.u_curr[s.local + 1], self.u_curr[s.local + 2]]))
            .collect()
    }

    pub fn rotate(&mut self) {
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        std::mem::swap(&mut self.u_curr, &mut self.u_next);
    }
}
