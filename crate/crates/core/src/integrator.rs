//! Central difference time stepping with diagonal mass and mass-proportional damping.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::OctreeMesh;
use crate::pattern::PatternCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSettings {
    /// Fixed step; `None` selects `safety · Δt_cr`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub duration: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
}

fn default_safety() -> f64 {
    0.95
}

impl TimeSettings {
    pub fn new(duration: f64) -> Self {
        Self { dt: None, duration, alpha: 0.0, safety: default_safety() }
    }

    /// Step size and number of steps `⌈T/Δt⌉`.
    pub fn resolve(&self, dt_cr: f64) -> Result<(f64, usize)> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(invalid(format!("safety factor must lie in (0, 1], got {}", self.safety)));
        }
        if !(self.alpha >= 0.0) {
            return Err(invalid("damping coefficient must be non-negative"));
        }
        let dt = self.dt.unwrap_or(self.safety * dt_cr);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        if !(self.duration >= dt) {
            return Err(invalid("duration shorter than one step"));
        }
        Ok((dt, (self.duration / dt - 1e-9).ceil() as usize))
    }
}

/// Minimum over cells of `√(ρ/E) · L · 2/ω_max_unit`.
pub fn critical_time_step(mesh: &OctreeMesh, catalog: &PatternCatalog) -> Result<f64> {
    let mut best = f64::INFINITY;
    for c in &mesh.cells {
        let mat = mesh.materials.get(c.material)?;
        let master = catalog.get(c.canonical_id, mat.nu)?;
        let dt = (mat.rho / mat.e).sqrt() * c.size * 2.0 / master.omega_max;
        best = best.min(dt);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(invalid("mesh has no cells"))
    }
}

/// Fictitious displacement at step `-1`.
pub fn init_history(u0: &[f64], v0: &[f64], a0: &[f64], dt: f64) -> Result<Vec<f64>> {
    for v in [v0, a0] {
        if v.len() != u0.len() {
            return Err(Error::LengthMismatch { expected: u0.len(), got: v.len() });
        }
    }
    Ok((0..u0.len()).map(|i| u0[i] - dt * v0[i] + 0.5 * dt * dt * a0[i]).collect())
}

/// Precomputed per-run CDM coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdmCoefficients {
    pub dt2: f64,
    pub c_prev: f64,
    pub inv_denom: f64,
}

impl CdmCoefficients {
    pub fn new(dt: f64, alpha: f64) -> Self {
        let h = 0.5 * alpha * dt;
        Self { dt2: dt * dt, c_prev: 1.0 - h, inv_denom: 1.0 / (1.0 + h) }
    }

    #[inline]
    pub fn update(&self, up: f64, uc: f64, r_ext: f64, r_int: f64, inv_m: f64) -> f64 {
        (self.dt2 * inv_m * (r_ext - r_int) + 2.0 * uc - self.c_prev * up) * self.inv_denom
    }
}

/// Componentwise central difference update into `un`.
#[allow(clippy::too_many_arguments)]
pub fn cdm_step(
    up: &[f64],
    uc: &[f64],
    r_ext: &[f64],
    r_int: &[f64],
    m_diag: &[f64],
    alpha: f64,
    dt: f64,
    un: &mut [f64],
) -> Result<()> {
    let n = uc.len();
    for v in [up, r_ext, r_int, m_diag, &*un] {
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
    }
    let c = CdmCoefficients::new(dt, alpha);
    for i in 0..n {
        un[i] = c.update(up[i], uc[i], r_ext[i], r_int[i], 1.0 / m_diag[i]);
    }
    Ok(())
}

/// Aborts on non-finite values or growth beyond `1e12 · scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceGuard {
    pub limit: f64,
}

impl DivergenceGuard {
    pub fn new(scale: f64) -> Self {
        let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
        Self { limit: 1e12 * scale }
    }

    pub fn check(&self, u: &[f64], step: usize) -> Result<()> {
        for &v in u {
            if !(v.abs() <= self.limit) {
                return Err(Error::Divergence { step, last_stable: step.saturating_sub(1) });
            }
        }
        Ok(())
    }
}
