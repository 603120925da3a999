//! Load signals, their amplitude spectra, and wave-based mesh sizing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{bisect_increasing, integrate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Signal {
    Ricker {
        t1: f64,
        p0: f64,
    },
    Triangle {
        t1: f64,
        p0: f64,
    },
    SineBurst {
        t1: f64,
        p0: f64,
        n: u32,
    },
    /// Step load of constant amplitude, used for static limits.
    Constant {
        p0: f64,
    },
}

const SPECTRUM_TOL: f64 = 1e-9;

impl Signal {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Signal::Ricker { t1, .. } | Signal::Triangle { t1, .. } if !(t1 > 0.0) => {
                Err(invalid(format!("t1 must be positive, got {t1}")))
            }
            Signal::SineBurst { t1, n, .. } if !(t1 > 0.0) || n == 0 => {
                Err(invalid("sine burst needs t1 > 0 and n >= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn p0(&self) -> f64 {
        match *self {
            Signal::Ricker { p0, .. }
            | Signal::Triangle { p0, .. }
            | Signal::SineBurst { p0, .. }
            | Signal::Constant { p0 } => p0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Signal::Ricker { t1, p0 } => {
                let tau = (t - t1) / (t1 / 5.0);
                (1.0 - tau * tau) * (-0.5 * tau * tau).exp() * p0
            }
            Signal::Triangle { t1, p0 } => {
                if (0.0..=2.0 * t1).contains(&t) {
                    (1.0 - (t / t1 - 1.0).abs()) * p0
                } else {
                    0.0
                }
            }
            Signal::SineBurst { t1, p0, n } => {
                if (0.0..=t1).contains(&t) {
                    (2.0 * PI * n as f64 * t / t1).sin() * (PI * t / t1).sin().powi(2) * p0
                } else {
                    0.0
                }
            }
            Signal::Constant { p0 } => p0,
        }
    }

    /// `∫₀ᵗ P(s) ds`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        match *self {
            Signal::Ricker { t1, p0 } => {
                let w = t1 / 5.0;
                let g = |tau: f64| tau * (-0.5 * tau * tau).exp();
                Ok(p0 * w * (g((t - t1) / w) - g(-5.0)))
            }
            Signal::Triangle { t1, p0 } => {
                let s = t.min(2.0 * t1);
                Ok(p0 * if s <= t1 { 0.5 * s * s / t1 } else { t1 - 0.5 * (2.0 * t1 - s).powi(2) / t1 })
            }
            Signal::SineBurst { t1, .. } => integrate(&|s| self.eval(s), 0.0, t.min(t1), 1e-12),
            Signal::Constant { p0 } => Ok(p0 * t),
        }
    }

    /// `dP/dt`; one-sided at the kinks of the triangle.
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Signal::Ricker { t1, p0 } => {
                let w = t1 / 5.0;
                let tau = (t - t1) / w;
                p0 * (tau.powi(3) - 3.0 * tau) * (-0.5 * tau * tau).exp() / w
            }
            Signal::Triangle { t1, p0 } => match t {
                t if (0.0..t1).contains(&t) => p0 / t1,
                t if (t1..2.0 * t1).contains(&t) => -p0 / t1,
                _ => 0.0,
            },
            Signal::SineBurst { t1, p0, n } => {
                if !(0.0..=t1).contains(&t) {
                    return 0.0;
                }
                let (a, b) = (2.0 * PI * n as f64 / t1, PI / t1);
                p0 * (a * (a * t).cos() * (b * t).sin().powi(2) + (a * t).sin() * b * (2.0 * b * t).sin())
            }
            Signal::Constant { .. } => 0.0,
        }
    }

    /// End of the support; the Ricker tail is negligible beyond `2 t1`.
    pub fn duration(&self) -> f64 {
        match *self {
            Signal::Ricker { t1, .. } | Signal::Triangle { t1, .. } => 2.0 * t1,
            Signal::SineBurst { t1, .. } => t1,
            Signal::Constant { .. } => f64::INFINITY,
        }
    }

    /// Central frequency: `5/(√2 π t1)` for Ricker, `n/t1` for the sine
    /// burst and `1/t1` for the triangle.
    pub fn central_frequency(&self) -> Option<f64> {
        match *self {
            Signal::Ricker { t1, .. } => Some(5.0 / (2f64.sqrt() * PI * t1)),
            Signal::Triangle { t1, .. } => Some(1.0 / t1),
            Signal::SineBurst { t1, n, .. } => Some(n as f64 / t1),
            Signal::Constant { .. } => None,
        }
    }

    /// Amplitude spectrum in the shape used for the energy criterion.
    pub fn spectrum(&self, f: f64) -> Result<f64> {
        match *self {
            Signal::Ricker { .. } => {
                let r = f / self.central_frequency().unwrap();
                Ok(2.0 / PI.sqrt() * r * r * (-r * r).exp())
            }
            Signal::Triangle { t1, .. } => {
                let x = PI * f * t1;
                Ok(if x == 0.0 { 1.0 } else { (x.sin() / x).powi(2) })
            }
            Signal::SineBurst { t1, n, .. } => {
                // sin(at) sin²(πt/t1) = ½ sin(at) − ¼ [sin((a+b)t) + sin((a−b)t)], b = 2π/t1
                let a = 2.0 * PI * n as f64 / t1;
                let b = 2.0 * PI / t1;
                let om = 2.0 * PI * f;
                let (mut re, mut im) = (0.0, 0.0);
                for (w, c) in [(a, 0.5), (a + b, -0.25), (a - b, -0.25)] {
                    let (r, i) = sine_transform(w, om, t1);
                    re += c * r;
                    im += c * i;
                }
                Ok(re.hypot(im))
            }
            Signal::Constant { .. } => Err(invalid("constant load has no finite spectrum")),
        }
    }
}

/// `∫₀^t1 sin(wt) e^{−iωt} dt` as (real, imaginary).
fn sine_transform(w: f64, om: f64, t1: f64) -> (f64, f64) {
    // (∫ cos kt, ∫ sin kt) over [0, t1]
    let parts = |k: f64| {
        if k.abs() < 1e-12 {
            (t1, 0.5 * k * t1 * t1)
        } else {
            ((k * t1).sin() / k, (1.0 - (k * t1).cos()) / k)
        }
    };
    let (c1, s1) = parts(w - om);
    let (c2, s2) = parts(w + om);
    (0.5 * (s1 + s2), -0.5 * (c1 - c2))
}

/// Smallest `f1` whose cumulative spectrum reaches `fraction` of the total
/// up to `50 f_m`.
pub fn critical_frequency(signal: &Signal, fraction: f64) -> Result<f64> {
    signal.validate()?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid(format!("energy fraction must lie in (0, 1), got {fraction}")));
    }
    let fm = signal.central_frequency().ok_or_else(|| invalid("signal has no spectrum"))?;
    let upper = 50.0 * fm;
    let a = |f: f64| signal.spectrum(f).unwrap_or(f64::NAN);
    let cumulative = |x: f64| integrate(&a, 0.0, x, SPECTRUM_TOL);
    let total = cumulative(upper)?;
    if !total.is_finite() {
        return Err(crate::Error::Integration("spectrum evaluation failed".into()));
    }
    bisect_increasing(&|x| Ok(cumulative(x)? - fraction * total), 0.0, upper, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveProperties {
    pub v_p: f64,
    pub v_s: f64,
    pub l_p: f64,
    pub l_s: f64,
    pub f1: f64,
}

pub fn wave_speeds(e: f64, nu: f64, rho: f64) -> Result<(f64, f64)> {
    if nu >= 0.5 || nu <= -1.0 {
        return Err(invalid(format!("Poisson ratio {nu} gives no finite dilatational speed")));
    }
    if !(e > 0.0 && rho > 0.0) {
        return Err(invalid("E and rho must be positive"));
    }
    let v_p = (e * (1.0 - nu) / (rho * (1.0 + nu) * (1.0 - 2.0 * nu))).sqrt();
    let v_s = (e / (2.0 * rho * (1.0 + nu))).sqrt();
    Ok((v_p, v_s))
}

pub fn wave_properties(e: f64, nu: f64, rho: f64, f1: f64) -> Result<WaveProperties> {
    if !(f1 > 0.0) {
        return Err(invalid("f1 must be positive"));
    }
    let (v_p, v_s) = wave_speeds(e, nu, rho)?;
    Ok(WaveProperties { v_p, v_s, l_p: v_p / f1, l_s: v_s / f1, f1 })
}

/// Largest element edge giving `nodes_per_wavelength` linear nodes over the
/// shortest wavelength. Advisory only.
pub fn recommended_element_size(w: &WaveProperties, nodes_per_wavelength: f64) -> Result<f64> {
    if !(nodes_per_wavelength >= 2.0) {
        return Err(invalid("need at least two nodes per wavelength"));
    }
    Ok(w.l_p.min(w.l_s) / (nodes_per_wavelength - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::golden_max;

    #[test]
    fn integral_and_derivative_agree_with_eval() {
        let signals = [
            Signal::Ricker { t1: 0.015, p0: 2.0 },
            Signal::Triangle { t1: 0.2, p0: 1.5 },
            Signal::SineBurst { t1: 0.4, p0: 1.0, n: 5 },
        ];
        for s in signals {
            for k in 1..40 {
                let t = k as f64 * s.duration() / 31.0;
                let quad = integrate(&|x| s.eval(x), 0.0, t, 1e-12).unwrap();
                assert!((s.integral(t).unwrap() - quad).abs() <= 1e-9 * s.p0() * s.duration());
                let h = 1e-6 * s.duration();
                let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
                if !matches!(s, Signal::Triangle { .. }) || (t / 0.2 - (t / 0.2).round()).abs() > 1e-3 {
                    assert!((s.derivative(t) - fd).abs() <= 1e-5 * s.p0() / s.duration() * 100.0, "{s:?} at {t}");
                }
            }
        }
    }

    #[test]
    fn signal_landmarks() {
        let r = Signal::Ricker { t1: 0.015, p0: 3.0 };
        assert_eq!(r.eval(0.015), 3.0);
        let t = Signal::Triangle { t1: 0.2, p0: 1.0 };
        assert_eq!(t.eval(0.4), 0.0);
        assert_eq!(t.eval(0.2), 1.0);
        let s = Signal::SineBurst { t1: 1.0, p0: 1.0, n: 5 };
        assert_eq!(s.eval(0.0), 0.0);
        assert!(s.eval(1.0).abs() < 1e-15);
        assert_eq!(s.eval(1.5), 0.0);
    }

    #[test]
    fn amplitudes_bounded_by_p0() {
        let sigs = [
            Signal::Ricker { t1: 1.0, p0: 2.0 },
            Signal::Triangle { t1: 1.0, p0: 2.0 },
            Signal::SineBurst { t1: 1.0, p0: 2.0, n: 5 },
        ];
        for s in sigs {
            for i in 0..4000 {
                assert!(s.eval(i as f64 * 1e-3).abs() <= 2.0 + 1e-15);
            }
        }
    }

    #[test]
    fn ricker_spectrum_peaks_at_central_frequency() {
        let r = Signal::Ricker { t1: 0.5, p0: 1.0 };
        let fm = r.central_frequency().unwrap();
        let peak = golden_max(&|f| r.spectrum(f).unwrap(), 0.0, 5.0 * fm, 1e-10);
        assert!((peak - fm).abs() < 1e-6 * fm);
    }

    #[test]
    fn sine_burst_spectrum_matches_quadrature() {
        let s = Signal::SineBurst { t1: 0.7, p0: 1.0, n: 5 };
        for f in [0.0, 0.5, 3.0, 7.142857142857143, 7.5, 20.0] {
            let w = 2.0 * PI * f;
            let re = integrate(&|t| s.eval(t) * (w * t).cos(), 0.0, 0.7, 1e-11).unwrap();
            let im = integrate(&|t| s.eval(t) * (w * t).sin(), 0.0, 0.7, 1e-11).unwrap();
            assert!((s.spectrum(f).unwrap() - re.hypot(im)).abs() < 1e-9, "{f}");
        }
    }

    #[test]
    fn wave_speed_relations() {
        let (vp, vs) = wave_speeds(1.0, 0.0, 1.0).unwrap();
        assert!((vp / vs - 2f64.sqrt()).abs() < 1e-14);
        assert!(wave_speeds(1.0, 0.5, 1.0).is_err());
        let w = wave_properties(1e4, 0.0, 1.0, 150.0).unwrap();
        assert!((w.v_p - 100.0).abs() < 1e-12);
        assert!((w.l_p - 0.667).abs() < 1e-3);
    }

    #[test]
    fn element_size_rules() {
        let w = WaveProperties { v_p: 1.0, v_s: 1.0, l_p: 80.0, l_s: 36.9, f1: 1.0 };
        assert!((recommended_element_size(&w, 11.0).unwrap() - 3.69).abs() < 1e-12);
        assert_eq!(recommended_element_size(&w, 2.0).unwrap(), 36.9);
        assert!(recommended_element_size(&w, 1.0).is_err());
        let beam = WaveProperties { v_p: 100.0, v_s: 70.7, l_p: 0.67, l_s: 0.67, f1: 150.0 };
        assert!((recommended_element_size(&beam, 11.0).unwrap() - 0.067).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(critical_frequency(&Signal::Ricker { t1: 1.0, p0: 1.0 }, 1.2).is_err());
        assert!(critical_frequency(&Signal::Ricker { t1: -1.0, p0: 1.0 }, 0.9).is_err());
        assert!(Signal::SineBurst { t1: 1.0, p0: 1.0, n: 0 }.validate().is_err());
    }
}
