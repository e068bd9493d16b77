//! Builtin model catalogue.

use std::sync::Arc;

use super::angular::{PowerAngular, Uniform};
use super::radial::{Exponential, HalfNormal, WeibullTail};
use super::shape::{Cosine, PowerShape, PowerV, Sine, ThetaPolynomial};
use super::{AngularLaw, PolarModel, RadialLaw, ShapeU, ShapeV, Sidedness};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RadialSpec {
    Exponential { rate: f64 },
    WeibullTail { beta: f64 },
    HalfNormal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AngularSpec {
    Uniform { lo: f64, hi: f64 },
    SymmetricPower { tau: f64, half_width: f64 },
    AsymmetricPower { tau_minus: f64, tau_plus: f64, weight: f64, half_width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeUSpec {
    Power { kappa_minus: f64, kappa_plus: f64, scale: f64 },
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeVSpec {
    Sine,
    SeifertLinear { rho: f64 },
    Power { rho: f64, delta: f64, d: f64 },
    ThetaPolynomial { theta_t0: f64, n: u32, theta_n_deriv: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub t0: f64,
    pub sidedness: Sidedness,
    pub radial: RadialSpec,
    pub angular: AngularSpec,
    pub shape_u: ShapeUSpec,
    pub shape_v: Option<ShapeVSpec>,
}

impl ModelSpec {
    /// Exp(1) radius, uniform angle on [−1, 1], `u = 1 − t²`, no `v`.
    pub fn fixture_f1() -> Self {
        Self {
            t0: 0.0,
            sidedness: Sidedness::TwoSided,
            radial: RadialSpec::Exponential { rate: 1.0 },
            angular: AngularSpec::Uniform { lo: -1.0, hi: 1.0 },
            shape_u: ShapeUSpec::Power { kappa_minus: 2.0, kappa_plus: 2.0, scale: 1.0 },
            shape_v: None,
        }
    }
}

fn require(cond: bool, field: &str, reason: &str) -> Result<()> {
    if cond { Ok(()) } else { Err(Error::invalid(field, reason)) }
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

pub fn build_builtin_model(spec: &ModelSpec) -> Result<PolarModel> {
    let t0 = spec.t0;
    require(finite(t0), "model.t0", "must be finite")?;

    let radial: Arc<dyn RadialLaw> = match spec.radial {
        RadialSpec::Exponential { rate } => {
            require(finite(rate) && rate > 0.0, "radial.rate", "must be > 0")?;
            Arc::new(Exponential { rate })
        }
        RadialSpec::WeibullTail { beta } => {
            require(finite(beta) && beta > 0.0, "radial.beta", "must be > 0")?;
            Arc::new(WeibullTail { beta })
        }
        RadialSpec::HalfNormal => Arc::new(HalfNormal),
    };

    let angular: Arc<dyn AngularLaw> = match spec.angular {
        AngularSpec::Uniform { lo, hi } => {
            require(finite(lo) && finite(hi) && lo < hi, "angular.hi", "need lo < hi")?;
            Arc::new(Uniform { lo, hi, t0 })
        }
        AngularSpec::SymmetricPower { tau, half_width } => {
            require(finite(tau) && tau > -1.0, "angular.tau", "must be > -1")?;
            require(finite(half_width) && half_width > 0.0, "angular.half_width", "must be > 0")?;
            Arc::new(PowerAngular::symmetric(tau, half_width, t0))
        }
        AngularSpec::AsymmetricPower { tau_minus, tau_plus, weight, half_width } => {
            require(finite(tau_minus) && tau_minus > -1.0, "angular.tau_minus", "must be > -1")?;
            require(finite(tau_plus) && tau_plus > -1.0, "angular.tau_plus", "must be > -1")?;
            require((0.0..=1.0).contains(&weight), "angular.weight", "must be in [0, 1]")?;
            require(finite(half_width) && half_width > 0.0, "angular.half_width", "must be > 0")?;
            Arc::new(PowerAngular { tau_minus, tau_plus, weight, half_width, t0 })
        }
    };

    let shape_u: Arc<dyn ShapeU> = match spec.shape_u {
        ShapeUSpec::Power { kappa_minus, kappa_plus, scale } => {
            require(finite(kappa_minus) && kappa_minus > 0.0, "shape_u.kappa_minus", "must be > 0")?;
            require(finite(kappa_plus) && kappa_plus > 0.0, "shape_u.kappa_plus", "must be > 0")?;
            require(finite(scale) && scale > 0.0, "shape_u.scale", "must be > 0")?;
            Arc::new(PowerShape { kappa_minus, kappa_plus, scale, t0 })
        }
        ShapeUSpec::Cosine => Arc::new(Cosine { t0 }),
    };

    let shape_v: Option<Arc<dyn ShapeV>> = match spec.shape_v {
        None => None,
        Some(ShapeVSpec::Sine) => Some(Arc::new(Sine { t0 })),
        Some(ShapeVSpec::SeifertLinear { rho }) => {
            require(finite(rho), "shape_v.rho", "must be finite")?;
            Some(Arc::new(ThetaPolynomial::linear(shape_u.clone(), rho)?))
        }
        Some(ShapeVSpec::Power { rho, delta, d }) => {
            require(finite(rho), "shape_v.rho", "must be finite")?;
            require(finite(delta) && delta >= 0.0, "shape_v.delta", "must be >= 0")?;
            require(finite(d) && d != 0.0, "shape_v.d", "must be finite and nonzero")?;
            Some(Arc::new(PowerV { rho, delta, d, t0 }))
        }
        Some(ShapeVSpec::ThetaPolynomial { theta_t0, n, theta_n_deriv }) => {
            require(finite(theta_t0), "shape_v.theta_t0", "must be finite")?;
            Some(Arc::new(ThetaPolynomial::new(shape_u.clone(), theta_t0, n, theta_n_deriv)?))
        }
    };

    PolarModel::new(radial, angular, shape_u, shape_v, spec.sidedness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sign;

    #[test]
    fn f1_has_closed_form_components() {
        let m = build_builtin_model(&ModelSpec::fixture_f1()).unwrap();
        assert_eq!(m.radial.aux_psi(37.0), 1.0);
        assert_eq!(m.shape_u.u_tilde(0.3), 0.09);
        assert_eq!(m.shape_u.kappa(Sign::Plus), 2.0);
        assert_eq!(m.shape_u.kappa(Sign::Minus), 2.0);
        assert_eq!(m.angular.g_tilde(0.1), 0.5);
    }

    #[test]
    fn weibull_two_psi() {
        let spec = ModelSpec { radial: RadialSpec::WeibullTail { beta: 2.0 }, ..ModelSpec::fixture_f1() };
        let m = build_builtin_model(&spec).unwrap();
        assert!((m.radial.aux_psi(8.0) - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn out_of_range_names_field() {
        let cases = [
            (ModelSpec { radial: RadialSpec::Exponential { rate: 0.0 }, ..ModelSpec::fixture_f1() }, "radial.rate"),
            (ModelSpec { radial: RadialSpec::WeibullTail { beta: -1.0 }, ..ModelSpec::fixture_f1() }, "radial.beta"),
            (
                ModelSpec {
                    shape_u: ShapeUSpec::Power { kappa_minus: 1.0, kappa_plus: 0.0, scale: 1.0 },
                    ..ModelSpec::fixture_f1()
                },
                "shape_u.kappa_plus",
            ),
            (
                ModelSpec {
                    angular: AngularSpec::SymmetricPower { tau: -1.0, half_width: 1.0 },
                    ..ModelSpec::fixture_f1()
                },
                "angular.tau",
            ),
            (
                ModelSpec {
                    shape_v: Some(ShapeVSpec::Power { rho: 0.0, delta: -0.5, d: 1.0 }),
                    ..ModelSpec::fixture_f1()
                },
                "shape_v.delta",
            ),
        ];
        for (spec, field) in cases {
            match build_builtin_model(&spec) {
                Err(Error::InvalidParameter { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected error on {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn t0_outside_support_rejected() {
        let spec = ModelSpec { t0: 3.0, ..ModelSpec::fixture_f1() };
        assert!(build_builtin_model(&spec).is_err());
    }
}
