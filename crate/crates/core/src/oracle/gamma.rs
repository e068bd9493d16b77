//! The Γ function, Lanczos approximation (g = 7, nine terms) with the
//! reflection formula below 1/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(a) for a > 0.
pub fn gamma_eval(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("gamma_eval requires a finite a > 0, got {a}")));
    }
    Ok(gamma_unchecked(a))
}

pub(crate) fn gamma_unchecked(a: f64) -> f64 {
    if a < 0.5 {
        PI / ((PI * a).sin() * gamma_unchecked(1.0 - a))
    } else if a > 171.7 {
        f64::INFINITY
    } else {
        let z = a - 1.0;
        let mut sum = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            sum += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
    }
}

/// (1/κ)·Γ((1+τ)/κ) = ∫₀^∞ t^τ e^{-t^κ} dt, the mass constant of the limit law.
pub fn mass_constant(kappa: f64, tau: f64) -> f64 {
    gamma_unchecked((1.0 + tau) / kappa) / kappa
}
