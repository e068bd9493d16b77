//! Builtin shapes `u` and `v`.

use std::sync::Arc;

use super::{Sign, ShapeU, ShapeV, ThetaData};
use crate::error::{Error, Result};

/// `u(t) = 1 − c·|t − t0|^{κ_σ}` with σ the side of `t0`.
#[derive(Debug, Clone, Copy)]
pub struct PowerShape {
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub scale: f64,
    pub t0: f64,
}

impl ShapeU for PowerShape {
    fn u(&self, t: f64) -> f64 {
        1.0 - self.u_tilde(t - self.t0)
    }

    fn t0(&self) -> f64 {
        self.t0
    }

    fn kappa(&self, side: Sign) -> f64 {
        match side {
            Sign::Minus => self.kappa_minus,
            Sign::Plus => self.kappa_plus,
        }
    }

    fn u_tilde(&self, s: f64) -> f64 {
        self.scale * s.abs().powf(self.kappa(Sign::of(s)))
    }

    fn tilde_scale(&self, _side: Sign) -> Option<f64> {
        Some(self.scale)
    }

    fn name(&self) -> &'static str {
        "power"
    }
}

/// `u(t) = cos(t − t0)`; `ũ(s) = 1 − cos s = 2 sin²(s/2)`.
#[derive(Debug, Clone, Copy)]
pub struct Cosine {
    pub t0: f64,
}

impl ShapeU for Cosine {
    fn u(&self, t: f64) -> f64 {
        (t - self.t0).cos()
    }

    fn t0(&self) -> f64 {
        self.t0
    }

    fn kappa(&self, _side: Sign) -> f64 {
        2.0
    }

    fn u_tilde(&self, s: f64) -> f64 {
        let h = (0.5 * s).sin();
        2.0 * h * h
    }

    fn tilde_scale(&self, _side: Sign) -> Option<f64> {
        Some(0.5)
    }

    fn name(&self) -> &'static str {
        "cosine"
    }
}

/// `v(t) = sin(t − t0)`: `ρ = 0`, `ṽ(s) = −sin s`, `δ = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Sine {
    pub t0: f64,
}

impl ShapeV for Sine {
    fn v(&self, t: f64) -> f64 {
        (t - self.t0).sin()
    }

    fn t0(&self) -> f64 {
        self.t0
    }

    fn delta(&self) -> f64 {
        1.0
    }

    fn v_sign(&self) -> Sign {
        Sign::Minus
    }

    fn rho(&self) -> f64 {
        0.0
    }

    fn v_tilde(&self, s: f64) -> f64 {
        -s.sin()
    }

    fn tilde_scale(&self) -> Option<f64> {
        Some(-1.0)
    }

    fn name(&self) -> &'static str {
        "sine"
    }
}

/// `v(t) = ρ − d·|t − t0|^δ`, so `ṽ(s) = d·|s|^δ`.
#[derive(Debug, Clone, Copy)]
pub struct PowerV {
    pub rho: f64,
    pub delta: f64,
    pub d: f64,
    pub t0: f64,
}

impl ShapeV for PowerV {
    fn v(&self, t: f64) -> f64 {
        self.rho - self.v_tilde(t - self.t0)
    }

    fn t0(&self) -> f64 {
        self.t0
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn v_sign(&self) -> Sign {
        Sign::of(self.d)
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn v_tilde(&self, s: f64) -> f64 {
        if s == 0.0 { 0.0 } else { self.d * s.abs().powf(self.delta) }
    }

    fn tilde_scale(&self) -> Option<f64> {
        Some(self.d)
    }

    fn name(&self) -> &'static str {
        "power"
    }
}

/// Leading term `ṽ(s) ~ coef·s^index` at `0+`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Leading {
    coef: f64,
    index: f64,
}

/// Numerical fallback when `u` has no closed-form leading coefficient.
fn measured_leading(v_tilde: impl Fn(f64) -> f64) -> Leading {
    let (a, b) = (1e-6, 1e-5);
    let (fa, fb) = (v_tilde(a), v_tilde(b));
    let index = (fb.abs() / fa.abs()).ln() / (b / a).ln();
    Leading { coef: fa / a.powf(index), index }
}

/// `v(t) = θ(t)·u(t)` with `θ(t) = θ(t0) + θ⁽ⁿ⁾(t0)/n!·(t − t0)ⁿ`. `n = 1`,
/// `θ′ = 1` is the linear family `v(t) = (t − t0 + ρ)·u(t)`.
#[derive(Debug, Clone)]
pub struct ThetaPolynomial {
    data: ThetaData,
    u: Arc<dyn ShapeU>,
    leading: Leading,
    linear: bool,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl ThetaPolynomial {
    pub fn new(u: Arc<dyn ShapeU>, theta_t0: f64, n: u32, theta_n_deriv_at_t0: f64) -> Result<Self> {
        Self::build(u, theta_t0, n, theta_n_deriv_at_t0, false)
    }

    /// `v(t) = (t − t0 + ρ)·u(t)`.
    pub fn linear(u: Arc<dyn ShapeU>, rho: f64) -> Result<Self> {
        Self::build(u, rho, 1, 1.0, true)
    }

    fn build(u: Arc<dyn ShapeU>, theta_t0: f64, n: u32, theta_n_deriv_at_t0: f64, linear: bool) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("shape_v.n", "must be >= 1"));
        }
        if theta_n_deriv_at_t0 == 0.0 || !theta_n_deriv_at_t0.is_finite() {
            return Err(Error::invalid("shape_v.theta_n_deriv", "must be finite and nonzero"));
        }
        let data = ThetaData { theta_t0, n, theta_n_deriv_at_t0 };
        let mut shape = Self { data, u, leading: Leading { coef: 0.0, index: 0.0 }, linear };
        shape.leading = shape.compute_leading()?;
        Ok(shape)
    }

    fn taylor_coef(&self) -> f64 {
        self.data.theta_n_deriv_at_t0 / factorial(self.data.n)
    }

    // ṽ(s) = θ0·ũ(s) − a·sⁿ·(1 − ũ(s)), a = θ⁽ⁿ⁾/n!
    fn compute_leading(&self) -> Result<Leading> {
        let theta0 = self.data.theta_t0;
        let a = self.taylor_coef();
        let n = f64::from(self.data.n);
        let kappa = self.u.kappa(Sign::Plus);
        let Some(c) = self.u.tilde_scale(Sign::Plus) else {
            return Ok(measured_leading(|s| self.v_tilde(s)));
        };
        let lead = if theta0 == 0.0 || kappa > n {
            Leading { coef: -a, index: n }
        } else if kappa < n {
            Leading { coef: theta0 * c, index: kappa }
        } else if theta0 * c != a {
            Leading { coef: theta0 * c - a, index: n }
        } else if self.linear {
            // κ = 1, ρc = 1: next order of (ρ + s)ũ(s) − s is c·s²
            Leading { coef: c, index: 2.0 }
        } else {
            return Err(Error::invalid(
                "shape_v.theta_n_deriv",
                "leading terms of v_tilde cancel (theta(t0)*c = theta^(n)/n!); index undetermined",
            ));
        };
        Ok(lead)
    }
}

impl ShapeV for ThetaPolynomial {
    fn v(&self, t: f64) -> f64 {
        self.theta(t).unwrap_or(f64::NAN) * self.u.u(t)
    }

    fn t0(&self) -> f64 {
        self.u.t0()
    }

    fn delta(&self) -> f64 {
        self.leading.index
    }

    fn v_sign(&self) -> Sign {
        Sign::of(self.leading.coef)
    }

    fn rho(&self) -> f64 {
        self.data.theta_t0
    }

    fn v_tilde(&self, s: f64) -> f64 {
        let a = self.taylor_coef();
        let ut = self.u.u_tilde(s);
        self.data.theta_t0 * ut - a * s.powi(self.data.n as i32) * (1.0 - ut)
    }

    fn theta(&self, t: f64) -> Option<f64> {
        let s = t - self.t0();
        if self.linear {
            Some(s + self.data.theta_t0)
        } else {
            Some(self.data.theta_t0 + self.taylor_coef() * s.powi(self.data.n as i32))
        }
    }

    fn theta_data(&self) -> Option<ThetaData> {
        Some(self.data)
    }

    fn tilde_scale(&self) -> Option<f64> {
        Some(self.leading.coef)
    }

    fn name(&self) -> &'static str {
        if self.linear { "seifert_linear" } else { "theta_polynomial" }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_u_tilde(u: &dyn ShapeU, s: f64) -> f64 {
        u.u(u.t0()) - u.u(u.t0() + s)
    }

    fn default_v_tilde(v: &dyn ShapeV, s: f64) -> f64 {
        v.v(v.t0()) - v.v(v.t0() + s)
    }

    #[test]
    fn tilde_overrides_agree_with_pointwise_definition() {
        let power = PowerShape { kappa_minus: 1.0, kappa_plus: 2.0, scale: 0.7, t0: 0.25 };
        let cosine = Cosine { t0: -0.5 };
        let shapes: [&dyn ShapeU; 2] = [&power, &cosine];
        for u in shapes {
            assert!((u.u(u.t0()) - 1.0).abs() <= 1e-12);
            for s in [-0.4, -0.05, 0.01, 0.3] {
                assert!((u.u_tilde(s) - default_u_tilde(u, s)).abs() < 1e-15, "{u:?} s {s}");
            }
        }
        let u: Arc<dyn ShapeU> = Arc::new(power);
        let vs: Vec<Box<dyn ShapeV>> = vec![
            Box::new(Sine { t0: 0.25 }),
            Box::new(PowerV { rho: 0.4, delta: 1.5, d: -2.0, t0: 0.25 }),
            Box::new(ThetaPolynomial::linear(u.clone(), 0.3).unwrap()),
            Box::new(ThetaPolynomial::new(u, 0.5, 3, 6.0).unwrap()),
        ];
        for v in &vs {
            assert!((v.rho() - v.v(v.t0())).abs() <= 1e-12, "{v:?}");
            for s in [0.01, 0.1, 0.3] {
                assert!((v.v_tilde(s) - default_v_tilde(v.as_ref(), s)).abs() < 1e-14, "{v:?} s {s}");
            }
        }
    }

    #[test]
    fn power_shape_example() {
        let u = PowerShape { kappa_minus: 2.0, kappa_plus: 2.0, scale: 1.0, t0: 0.0 };
        assert_eq!(u.u_tilde(0.3), 0.3 * 0.3);
        assert_eq!(u.u_tilde(-0.3), 0.3 * 0.3);
        assert_eq!(u.u_tilde(1e-9), 1e-18);
    }

    #[test]
    fn seifert_indices_follow_kappa_and_rho() {
        let u = |k: f64| -> Arc<dyn ShapeU> {
            Arc::new(PowerShape { kappa_minus: k, kappa_plus: k, scale: 1.0, t0: 0.0 })
        };
        // κ > 1 or ρ = 0: δ = 1 and ṽ < 0
        let v = ThetaPolynomial::linear(u(2.0), 0.5).unwrap();
        assert_eq!((v.delta(), v.v_sign()), (1.0, Sign::Minus));
        let v = ThetaPolynomial::linear(u(0.5), 0.0).unwrap();
        assert_eq!((v.delta(), v.v_sign()), (1.0, Sign::Minus));
        // κ < 1, ρ > 0: δ = κ, ṽ > 0
        let v = ThetaPolynomial::linear(u(0.5), 0.5).unwrap();
        assert_eq!((v.delta(), v.v_sign()), (0.5, Sign::Plus));
        // κ = 1, ρc = 1: second order
        let v = ThetaPolynomial::linear(u(1.0), 1.0).unwrap();
        assert_eq!((v.delta(), v.v_sign()), (2.0, Sign::Plus));
        assert_relative_eq!(v.v_tilde(1e-4) / 1e-8, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn theta_identity_holds() {
        let u: Arc<dyn ShapeU> = Arc::new(Cosine { t0: 0.0 });
        let v = ThetaPolynomial::new(u.clone(), 0.2, 2, 4.0).unwrap();
        for t in [-0.7, 0.0, 0.1, 0.9] {
            assert_relative_eq!(v.v(t), v.theta(t).unwrap() * u.u(t), max_relative = 1e-15);
        }
        assert_relative_eq!(v.theta(0.5).unwrap(), 0.2 + 2.0 * 0.25, max_relative = 1e-15);
        // κ = n = 2 with θ0·c = a cancels
        assert!(ThetaPolynomial::new(u, 4.0, 2, 4.0).is_err());
    }
}
