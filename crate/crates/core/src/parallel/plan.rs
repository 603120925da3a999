//! Node-cut exchange plan: which DOFs each worker stores, which of them are
//! shared, and the canonical order in which shared force sums are reduced.

use crate::assembly::SolverTables;
use crate::error::{invalid, Error, Result};

/// One contribution to an interface DOF: the `slot`-th value in the outbox
/// of `worker`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contribution {
    pub worker: u16,
    pub slot: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerPlan {
    /// Owned elements, ascending.
    pub elements: Vec<u32>,
    /// Global DOF of each local DOF, ascending.
    pub dofs: Vec<u32>,
    /// Local DOFs touched only by this worker's elements.
    pub internal: Vec<u32>,
    /// `(local DOF, index into ExchangePlan::interface_dofs)`, ascending.
    pub interface: Vec<(u32, u32)>,
    /// Per owned element, the local index of each element DOF.
    pub element_local: Vec<Vec<u32>>,
    /// Per owned element and element DOF: true when the DOF is shared, in
    /// which case the signed force goes to the outbox instead of `R_int`.
    pub element_shared: Vec<Vec<bool>>,
    pub outbox_len: usize,
}

impl WorkerPlan {
    pub fn local_of(&self, global: u32) -> Option<usize> {
        self.dofs.binary_search(&global).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangePlan {
    pub n_dof: usize,
    pub workers: Vec<WorkerPlan>,
    /// Shared DOFs, ascending (equivalently by ascending node id).
    pub interface_dofs: Vec<u32>,
    /// For each shared DOF, its contributions by ascending element id.
    pub recipes: Vec<Vec<Contribution>>,
    /// Workers storing each shared DOF, ascending.
    pub sharers: Vec<Vec<u16>>,
}

impl ExchangePlan {
    pub fn n_workers(&self) -> usize {
        self.workers.len()
    }

    /// Lowest worker storing `dof`; used to pick a single writer for output.
    pub fn owner(&self, dof: u32) -> Option<usize> {
        self.workers.iter().position(|w| w.local_of(dof).is_some())
    }
}

pub fn plan_exchange(tables: &SolverTables, labels: &[u16], n_workers: usize) -> Result<ExchangePlan> {
    let n_e = tables.n_elements();
    if labels.len() != n_e {
        return Err(Error::LengthMismatch { expected: n_e, got: labels.len() });
    }
    if n_workers == 0 || n_workers > u16::MAX as usize {
        return Err(invalid("worker count out of range"));
    }
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= n_workers) {
        return Err(invalid(format!("label {l} exceeds worker count {n_workers}")));
    }
    let n_dof = tables.n_dof;
    // workers touching each DOF, ascending and unique
    let mut touch: Vec<Vec<u16>> = vec![Vec::new(); n_dof];
    for e in 0..n_e {
        for &d in &tables.element_map(e).dofs {
            let t = &mut touch[d as usize];
            if t.last() != Some(&labels[e]) && !t.contains(&labels[e]) {
                t.push(labels[e]);
            }
        }
    }
    if let Some(d) = touch.iter().position(Vec::is_empty) {
        return Err(invalid(format!("dof {d} belongs to no element")));
    }
    for t in &mut touch {
        t.sort_unstable();
    }
    let mut interface_index = vec![u32::MAX; n_dof];
    let mut interface_dofs = Vec::new();
    let mut sharers = Vec::new();
    for (d, t) in touch.iter().enumerate() {
        if t.len() >= 2 {
            interface_index[d] = interface_dofs.len() as u32;
            interface_dofs.push(d as u32);
            sharers.push(t.clone());
        }
    }
    let mut dofs_of: Vec<Vec<u32>> = vec![Vec::new(); n_workers];
    for (d, t) in touch.iter().enumerate() {
        for &w in t {
            dofs_of[w as usize].push(d as u32);
        }
    }
    let mut recipes = vec![Vec::new(); interface_dofs.len()];
    let mut slots = vec![0u32; n_workers];
    let mut workers: Vec<WorkerPlan> = dofs_of
        .into_iter()
        .map(|dofs| {
            let mut internal = Vec::new();
            let mut interface = Vec::new();
            for (l, &d) in dofs.iter().enumerate() {
                match interface_index[d as usize] {
                    u32::MAX => internal.push(l as u32),
                    k => interface.push((l as u32, k)),
                }
            }
            WorkerPlan {
                elements: Vec::new(),
                dofs,
                internal,
                interface,
                element_local: Vec::new(),
                element_shared: Vec::new(),
                outbox_len: 0,
            }
        })
        .collect();
    // ascending element id fixes both outbox layout and recipe order
    for e in 0..n_e {
        let w = labels[e] as usize;
        let plan = &mut workers[w];
        let map = tables.element_map(e);
        let mut local = Vec::with_capacity(map.dofs.len());
        let mut shared = Vec::with_capacity(map.dofs.len());
        for &d in &map.dofs {
            local.push(plan.local_of(d).expect("worker stores its element DOFs") as u32);
            let k = interface_index[d as usize];
            shared.push(k != u32::MAX);
            if k != u32::MAX {
                recipes[k as usize].push(Contribution { worker: w as u16, slot: slots[w] });
                slots[w] += 1;
            }
        }
        plan.elements.push(e as u32);
        plan.element_local.push(local);
        plan.element_shared.push(shared);
    }
    for (w, plan) in workers.iter_mut().enumerate() {
        plan.outbox_len = slots[w] as usize;
    }
    Ok(ExchangePlan { n_dof, workers, interface_dofs, recipes, sharers })
}
