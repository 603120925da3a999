//! Serial explicit driver: EBE internal force, CDM update, probes and snapshots.

use crate::error::{invalid, Result};
use crate::excitation::Signal;
use crate::integrator::{CdmCoefficients, DivergenceGuard};

use super::bc::BoundaryConditions;
use super::tables::SolverTables;

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub node: u32,
}

/// Everything the step loop reads. Shared by the serial and parallel drivers.
#[derive(Debug, Clone)]
pub struct StepContext<'a> {
    pub tables: &'a SolverTables,
    pub bcs: &'a BoundaryConditions,
    pub signals: &'a [Signal],
    pub dt: f64,
    pub alpha: f64,
    pub probes: &'a [Probe],
    /// Probe rows are taken at steps divisible by this.
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
    /// Nodes written to snapshots (cell corners).
    pub snapshot_nodes: &'a [u32],
}

impl StepContext<'_> {
    pub fn validate(&self) -> Result<()> {
        if self.record_every == 0 || self.snapshot_every == Some(0) {
            return Err(invalid("output cadence must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(invalid("time step must be positive"));
        }
        for p in self.probes {
            if 3 * p.node as usize >= self.tables.n_dof {
                return Err(invalid(format!("probe {} references missing node {}", p.name, p.node)));
            }
        }
        self.bcs.validate(self.tables.n_dof, self.signals.len())
    }

    pub fn coefficients(&self) -> CdmCoefficients {
        CdmCoefficients::new(self.dt, self.alpha)
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// Displacements at steps `step - 1` and `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientState {
    pub step: usize,
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub guard: DivergenceGuard,
}

/// Rows of `(t, u_x, u_y, u_z, a_x, a_y, a_z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeHistory {
    pub name: String,
    pub node: u32,
    pub rows: Vec<[f64; 7]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    /// Displacement of each snapshot node, three components each.
    pub displacement: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientOutput {
    pub probes: Vec<ProbeHistory>,
    pub snapshots: Vec<Snapshot>,
}

impl TransientOutput {
    pub fn new(ctx: &StepContext<'_>) -> Self {
        Self {
            probes: ctx
                .probes
                .iter()
                .map(|p| ProbeHistory { name: p.name.clone(), node: p.node, rows: Vec::new() })
                .collect(),
            snapshots: Vec::new(),
        }
    }

    pub fn append(&mut self, other: TransientOutput) {
        for (a, b) in self.probes.iter_mut().zip(other.probes) {
            a.rows.extend(b.rows);
        }
        self.snapshots.extend(other.snapshots);
    }

    /// Record step `n` given displacements at `n-1`, `n`, `n+1`.
    pub fn record(&mut self, ctx: &StepContext<'_>, n: usize, up: &[f64], uc: &[f64], un: &[f64]) {
        let inv_dt2 = 1.0 / (ctx.dt * ctx.dt);
        if n % ctx.record_every == 0 {
            for (h, p) in self.probes.iter_mut().zip(ctx.probes) {
                let b = 3 * p.node as usize;
                h.rows.push(probe_row(ctx.time(n), inv_dt2, |d| (up[b + d], uc[b + d], un[b + d])));
            }
        }
        if let Some(k) = ctx.snapshot_every {
            if n % k == 0 {
                let displacement =
                    ctx.snapshot_nodes.iter().flat_map(|&i| (0..3).map(move |d| uc[3 * i as usize + d])).collect();
                self.snapshots.push(Snapshot { step: n, time: ctx.time(n), displacement });
            }
        }
    }
}

/// `(t, u, a)` with the acceleration from the central second difference.
#[inline]
pub fn probe_row(t: f64, inv_dt2: f64, value: impl Fn(usize) -> (f64, f64, f64)) -> [f64; 7] {
    let mut row = [0.0; 7];
    row[0] = t;
    for d in 0..3 {
        let (up, uc, un) = value(d);
        row[1 + d] = uc;
        row[4 + d] = (un - 2.0 * uc + up) * inv_dt2;
    }
    row
}

/// Initial state from `U0`, `V0`, with `A0 = M⁻¹(R_ext(0) − K U0)`.
pub fn initial_state(ctx: &StepContext<'_>, u0: Option<&[f64]>, v0: Option<&[f64]>) -> Result<TransientState> {
    ctx.validate()?;
    let n = ctx.tables.n_dof;
    let zeros = vec![0.0; n];
    let u0 = u0.unwrap_or(&zeros);
    let v0 = v0.unwrap_or(&zeros);
    if u0.len() != n || v0.len() != n {
        return Err(crate::Error::LengthMismatch { expected: n, got: u0.len().min(v0.len()) });
    }
    let mut r_int = vec![0.0; n];
    let mut r_ext = vec![0.0; n];
    ctx.tables.internal_force(u0, &mut r_int);
    ctx.bcs.external_force(ctx.signals, 0.0, &mut r_ext);
    let a0: Vec<f64> = (0..n).map(|i| ctx.tables.inv_mass[i] * (r_ext[i] - r_int[i])).collect();
    let mut u_prev = crate::integrator::init_history(u0, v0, &a0, ctx.dt)?;
    let mut u_curr = u0.to_vec();
    ctx.bcs.apply_dirichlet(&mut u_prev);
    ctx.bcs.apply_dirichlet(&mut u_curr);
    let umax = u0.iter().chain(v0).fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = umax.max(ctx.bcs.load_scale(ctx.signals));
    Ok(TransientState { step: 0, u_prev, u_curr, guard: DivergenceGuard::new(scale) })
}

/// Advance until `last_step` has been recorded (state ends at `last_step + 1`).
pub fn advance(ctx: &StepContext<'_>, state: &mut TransientState, last_step: usize) -> Result<TransientOutput> {
    let n_dof = ctx.tables.n_dof;
    let coef = ctx.coefficients();
    let mut out = TransientOutput::new(ctx);
    let mut r_int = vec![0.0; n_dof];
    let mut r_ext = vec![0.0; n_dof];
    let mut u_next = vec![0.0; n_dof];
    let mut buffer = Vec::new();
    while state.step <= last_step {
        let n = state.step;
        ctx.tables.internal_force_parallel(&state.u_curr, &mut buffer, &mut r_int);
        ctx.bcs.external_force(ctx.signals, ctx.time(n), &mut r_ext);
        for i in 0..n_dof {
            u_next[i] = coef.update(state.u_prev[i], state.u_curr[i], r_ext[i], r_int[i], ctx.tables.inv_mass[i]);
        }
        ctx.bcs.apply_dirichlet(&mut u_next);
        state.guard.check(&u_next, n + 1)?;
        out.record(ctx, n, &state.u_prev, &state.u_curr, &u_next);
        std::mem::swap(&mut state.u_prev, &mut state.u_curr);
        std::mem::swap(&mut state.u_curr, &mut u_next);
        state.step += 1;
    }
    Ok(out)
}

/// Zero-initial-condition run over steps `0..=steps`.
pub fn run_transient(ctx: &StepContext<'_>, steps: usize) -> Result<(TransientOutput, TransientState)> {
    let mut state = initial_state(ctx, None, None)?;
    let out = advance(ctx, &mut state, steps)?;
    Ok((out, state))
}
