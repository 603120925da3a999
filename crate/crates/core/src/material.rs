use std::collections::BTreeMap;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Matrix6 = SMatrix<f64, 6, 6>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    /// Young's modulus (Pa).
    pub e: f64,
    pub nu: f64,
    /// Density (kg/m^3).
    pub rho: f64,
}

impl Material {
    pub fn new(e: f64, nu: f64, rho: f64) -> Result<Self> {
        let m = Self { e, nu, rho };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0 && self.e.is_finite()) {
            return Err(invalid(format!("Young's modulus must be positive, got {}", self.e)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(invalid(format!("density must be positive, got {}", self.rho)));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(invalid(format!("Poisson ratio must lie in (-1, 0.5), got {}", self.nu)));
        }
        Ok(())
    }

    pub fn lame(&self) -> (f64, f64) {
        let lambda = self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu));
        let mu = self.e / (2.0 * (1.0 + self.nu));
        (lambda, mu)
    }

    /// Isotropic elasticity matrix in Voigt order `xx yy zz yz xz xy`.
    pub fn elasticity(&self) -> Matrix6 {
        elasticity(self.e, self.nu)
    }
}

pub fn elasticity(e: f64, nu: f64) -> Matrix6 {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut d = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            d[(i, j)] = lambda;
        }
        d[(i, i)] = lambda + 2.0 * mu;
        d[(i + 3, i + 3)] = mu;
    }
    d
}

/// Poisson ratio quantized for use as a lookup key.
pub fn nu_key(nu: f64) -> i64 {
    (nu * 1e9).round() as i64
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaterialTable(pub BTreeMap<u16, Material>);

impl MaterialTable {
    pub fn single(m: Material) -> Self {
        let mut t = BTreeMap::new();
        t.insert(1, m);
        Self(t)
    }

    pub fn insert(&mut self, id: u16, m: Material) -> Result<()> {
        if id == 0 {
            return Err(invalid("material id 0 is reserved for void"));
        }
        m.validate()?;
        self.0.insert(id, m);
        Ok(())
    }

    pub fn get(&self, id: u16) -> Result<&Material> {
        self.0.get(&id).ok_or_else(|| invalid(format!("unknown material id {id}")))
    }

    pub fn validate(&self) -> Result<()> {
        for (&id, m) in &self.0 {
            if id == 0 {
                return Err(invalid("material id 0 is reserved for void"));
            }
            m.validate()?;
        }
        Ok(())
    }
}
