//! Analytic eigenfrequencies of a cube with roller supports on all faces and
//! the relative L2 frequency error.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::material::Material;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeSpec {
    pub e: f64,
    pub nu: f64,
    pub rho: f64,
    pub l: f64,
}

impl CubeSpec {
    pub fn validate(&self) -> Result<()> {
        Material::new(self.e, self.nu, self.rho)?;
        if !(self.l > 0.0) {
            return Err(invalid("cube edge length must be positive"));
        }
        Ok(())
    }
}

/// Which modulus drives the dilatational branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeReference {
    /// `E/(1-ν²)` for dilatational modes, the plane-stress modulus in the closed form.
    PlaneStress,
    /// The 3D P-wave modulus `E(1-ν)/((1+ν)(1-2ν))`; shear modes unchanged.
    Elastic,
}

/// The first `count` angular frequencies, ascending, one entry per mode.
/// Triples `(l, m, n)` with two zeros carry one dilatational mode, one zero
/// adds one shear mode and none zero adds two.
pub fn cube_eigenfrequencies(spec: &CubeSpec, count: usize, reference: CubeReference) -> Result<Vec<f64>> {
    spec.validate()?;
    let base = spec.e * std::f64::consts::PI.powi(2) / (spec.rho * (1.0 - spec.nu * spec.nu) * spec.l * spec.l);
    let g_p = match reference {
        CubeReference::PlaneStress => 1.0,
        CubeReference::Elastic => (1.0 - spec.nu).powi(2) / (1.0 - 2.0 * spec.nu),
    };
    let g_s = (1.0 - spec.nu) / 2.0;
    // the shear branch is the slower one, so enough triples have
    // l²+m²+n² ≤ s_max where s_max covers `count` dilatational-free modes
    let mut s_max = 4usize;
    loop {
        let mut out = Vec::new();
        let r = (s_max as f64).sqrt() as usize + 1;
        for l in 0..=r {
            for m in 0..=r {
                for n in 0..=r {
                    let s = l * l + m * m + n * n;
                    if s == 0 || s > s_max {
                        continue;
                    }
                    let zeros = [l, m, n].iter().filter(|&&v| v == 0).count();
                    let w = |g: f64| (base * s as f64 * g).sqrt();
                    out.push(w(g_p));
                    for _ in 0..(2 - zeros) {
                        out.push(w(g_s));
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        // every mode below the cutoff frequency has been enumerated
        let cutoff = (base * s_max as f64 * g_s.min(g_p)).sqrt();
        let complete = out.iter().filter(|&&w| w <= cutoff).count();
        if complete >= count {
            out.truncate(count);
            return Ok(out);
        }
        s_max *= 2;
    }
}

/// `sqrt(Σ(ω_num − ω_ref)² / Σ ω_ref²)`.
pub fn modal_error(numeric: &[f64], reference: &[f64]) -> Result<f64> {
    if numeric.len() != reference.len() {
        return Err(Error::LengthMismatch { expected: reference.len(), got: numeric.len() });
    }
    let num: f64 = numeric.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    Ok((num / den).sqrt())
}
