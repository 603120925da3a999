//! Axial waves in a rod fixed at `x = 0` and loaded by an end pressure at
//! `x = L`. With `ν = 0` the prismatic 3D beam reduces to this 1D problem.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::excitation::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RodSpec {
    pub e: f64,
    pub rho: f64,
    pub length: f64,
}

impl RodSpec {
    pub fn wave_speed(&self) -> f64 {
        (self.e / self.rho).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.e > 0.0 && self.rho > 0.0 && self.length > 0.0) {
            return Err(invalid("rod needs positive modulus, density and length"));
        }
        Ok(())
    }
}

/// Displacement and acceleration at `x` and `t` for the end traction
/// `σ(L, t) = −P(t)`, summed over the reflections between the fixed and
/// the loaded end. Exact for any causal load.
pub fn rod_response(rod: &RodSpec, signal: &Signal, x: f64, t: f64) -> Result<(f64, f64)> {
    rod.validate()?;
    if !(0.0..=rod.length).contains(&x) {
        return Err(invalid(format!("x = {x} lies outside the rod")));
    }
    let c = rod.wave_speed();
    let k = -c / rod.e;
    let l = rod.length;
    let (mut u, mut a) = (0.0, 0.0);
    for n in 0usize.. {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let inbound = t - (2.0 * n as f64 * l + l - x) / c;
        if inbound < 0.0 {
            break;
        }
        let outbound = t - (2.0 * n as f64 * l + l + x) / c;
        u += sign * k * (signal.integral(inbound)? - signal.integral(outbound)?);
        a += sign * k * (signal.derivative(inbound) - if outbound > 0.0 { signal.derivative(outbound) } else { 0.0 });
    }
    Ok((u, a))
}

/// Modal superposition with a static correction: Duhamel's integral per
/// mode `sin(β_k x)` up to `modes`, plus the quasi-static share of the
/// truncated modes. Slow; used to cross-check [`rod_response`].
pub fn rod_modal_displacement(rod: &RodSpec, signal: &Signal, x: f64, t: f64, modes: usize) -> Result<f64> {
    rod.validate()?;
    let c = rod.wave_speed();
    let l = rod.length;
    // unit cross-section: modal mass ρL/2, end force −P(t)
    let m = 0.5 * rod.rho * l;
    let mut u = 0.0;
    let mut quasi_static = 0.0;
    for k in 1..=modes {
        let beta = (2 * k - 1) as f64 * std::f64::consts::PI / (2.0 * l);
        let w = c * beta;
        let shape = (beta * x).sin() * (beta * l).sin();
        let q = crate::numeric::integrate(&|s| -signal.eval(s) * (w * (t - s)).sin(), 0.0, t, 1e-11)? / (m * w);
        u += shape * q;
        quasi_static += shape / (m * w * w);
    }
    let p = signal.eval(t);
    Ok(u - p * (x / rod.e - quasi_static))
}

/// Relative L2 error over all recorded samples.
pub fn history_error(numeric: &[f64], reference: &[f64]) -> Result<f64> {
    if numeric.len() != reference.len() || numeric.is_empty() {
        return Err(invalid("histories differ in length"));
    }
    let num: f64 = numeric.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(invalid("reference history is identically zero"));
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROD: RodSpec = RodSpec { e: 1.0e4, rho: 1.0, length: 16.0 };
    const RICKER: Signal = Signal::Ricker { t1: 0.015, p0: 1.0 };

    #[test]
    fn causal_before_first_arrival() {
        let (u, a) = rod_response(&ROD, &RICKER, 4.0, 0.119).unwrap();
        assert_eq!((u, a), (0.0, 0.0));
        let (u, _) = rod_response(&ROD, &RICKER, 4.0, 0.121).unwrap();
        assert!(u != 0.0);
    }

    #[test]
    fn constant_load_oscillates_about_static_solution() {
        let step = Signal::Constant { p0: 2.0 };
        // the step response at x averages to the static −P x/E over a period 4L/c
        let period = 4.0 * ROD.length / ROD.wave_speed();
        let n = 4000;
        let mean: f64 = (0..n)
            .map(|i| rod_response(&ROD, &step, 8.0, 3.0 * period + period * (i as f64 + 0.5) / n as f64).unwrap().0)
            .sum::<f64>()
            / n as f64;
        assert!((mean + 2.0 * 8.0 / ROD.e).abs() < 1e-6);
        // and the loaded end reaches twice the static value
        let peak = rod_response(&ROD, &step, 16.0, 2.0 * ROD.length / ROD.wave_speed() - 1e-9).unwrap().0;
        assert!((peak + 2.0 * 2.0 * 16.0 / ROD.e).abs() < 1e-9);
    }

    #[test]
    fn reflections_agree_with_modal_superposition() {
        for (x, t) in [(4.0, 0.2), (12.0, 0.07), (16.0, 0.31), (8.0, 0.45)] {
            let exact = rod_response(&ROD, &RICKER, x, t).unwrap().0;
            let modal = rod_modal_displacement(&ROD, &RICKER, x, t, 120).unwrap();
            assert!((exact - modal).abs() <= 1e-4 * 1.0e-4, "{x} {t}: {exact} vs {modal}");
        }
    }

    #[test]
    fn acceleration_is_second_derivative() {
        let h = 1e-5;
        for (x, t) in [(4.0, 0.13), (16.0, 0.02), (9.0, 0.24)] {
            let u = |s| rod_response(&ROD, &RICKER, x, s).unwrap().0;
            let fd = (u(t + h) - 2.0 * u(t) + u(t - h)) / (h * h);
            let a = rod_response(&ROD, &RICKER, x, t).unwrap().1;
            assert!((a - fd).abs() <= 1e-4 * 1.0e-2 + 1e-4 * a.abs(), "{a} vs {fd}");
        }
    }

    #[test]
    fn history_error_is_relative() {
        assert_eq!(history_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((history_error(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(history_error(&[1.0], &[1.0, 2.0]).is_err());
    }
}
