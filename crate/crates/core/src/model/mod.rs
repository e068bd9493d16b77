//! The probabilistic model `(R, T, u, v)`.
//!
//! Each component is a trait so that callers can plug in their own laws;
//! the builtin catalogue lives in [`radial`], [`angular`] and [`shape`] and is
//! assembled from a [`ModelSpec`] by [`build_builtin_model`].
//!
//! The tilde functions `ũ(s) = u(t₀) − u(t₀+s)`, `ṽ(s) = v(t₀) − v(t₀+s)` and
//! `g̃(s) = g(t₀+s)` are always derived from `u`, `v`, `g`. Builtins override
//! the default with an algebraically identical expression that does not
//! cancel catastrophically for tiny `s`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

pub mod angular;
pub mod builtin;
pub mod config;
pub mod radial;
pub mod shape;
pub mod validate;

pub use builtin::{build_builtin_model, AngularSpec, ModelSpec, RadialSpec, ShapeUSpec, ShapeVSpec};
pub use validate::{validate_model, CheckEntry, ValidationGrid, ValidationReport};

/// Side of `t₀`. `T = t₀` is assigned [`Sign::Plus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn factor(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn of(s: f64) -> Sign {
        if s < 0.0 { Sign::Minus } else { Sign::Plus }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sidedness {
    /// Regularity assumed only on the right of `t₀`.
    OneSidedRight,
    TwoSided,
}

impl Sidedness {
    pub fn sides(self) -> &'static [Sign] {
        match self {
            Sidedness::OneSidedRight => &[Sign::Plus],
            Sidedness::TwoSided => &Sign::BOTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialFamily {
    Exponential { rate: f64 },
    WeibullTail { beta: f64 },
    HalfNormal,
    Custom,
}

/// Law of the radial variable `R ≥ 0`, assumed in the Gumbel domain with
/// auxiliary function `ψ`.
pub trait RadialLaw: Send + Sync + fmt::Debug {
    fn survival(&self, r: f64) -> f64;

    /// `ln H̄(r)`; override when `H̄` underflows in the range of interest.
    fn log_survival(&self, r: f64) -> f64 {
        self.survival(r).ln()
    }

    fn aux_psi(&self, x: f64) -> f64;

    /// Quantile `p` of `R` given `R > x_floor`, i.e. the `r` with
    /// `H̄(r) = H̄(x_floor)·(1 − p)`.
    fn tail_quantile(&self, p: f64, x_floor: f64) -> f64;

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        use rand::Rng;
        self.tail_quantile(rng.random::<f64>(), self.support_lower_bound())
    }

    fn support_lower_bound(&self) -> f64 {
        0.0
    }

    fn family(&self) -> RadialFamily {
        RadialFamily::Custom
    }
}

/// Law of the angular variable `T` with density `g`.
pub trait AngularLaw: Send + Sync + fmt::Debug {
    fn density(&self, t: f64) -> f64;
    fn t0(&self) -> f64;
    /// Regular-variation index of `g̃` on the given side of 0.
    fn tau(&self, side: Sign) -> f64;
    fn sample(&self, rng: &mut StreamRng) -> f64;
    /// Closed support interval `[lo, hi]`.
    fn support(&self) -> (f64, f64);

    fn g_tilde(&self, s: f64) -> f64 {
        self.density(self.t0() + s)
    }

    /// `a` with `g̃(σs) ~ a·s^{τ_σ}` as `s → 0+`, when known in closed form.
    fn tilde_scale(&self, _side: Sign) -> Option<f64> {
        None
    }

    fn name(&self) -> &'static str {
        "custom"
    }
}

/// The shape `u` of `X = R·u(T)`, maximal (= 1) at `t₀`.
pub trait ShapeU: Send + Sync + fmt::Debug {
    fn u(&self, t: f64) -> f64;
    fn t0(&self) -> f64;
    fn kappa(&self, side: Sign) -> f64;

    fn u_tilde(&self, s: f64) -> f64 {
        self.u(self.t0()) - self.u(self.t0() + s)
    }

    /// `c` with `ũ(σs) ~ c·s^{κ_σ}` as `s → 0+`, when known in closed form.
    fn tilde_scale(&self, _side: Sign) -> Option<f64> {
        None
    }

    fn name(&self) -> &'static str {
        "custom"
    }
}

/// Data for `v = θ·u` with `θ` having its first nonvanishing derivative of
/// order `n` at `t₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaData {
    pub theta_t0: f64,
    pub n: u32,
    pub theta_n_deriv_at_t0: f64,
}

/// The shape `v` of `Y = R·v(T)`.
pub trait ShapeV: Send + Sync + fmt::Debug {
    fn v(&self, t: f64) -> f64;
    fn t0(&self) -> f64;
    /// Regular-variation index of `|ṽ|` at `0+`.
    fn delta(&self) -> f64;
    /// Eventual sign of `ṽ(s)` as `s → 0+`.
    fn v_sign(&self) -> Sign;

    fn rho(&self) -> f64 {
        self.v(self.t0())
    }

    fn v_tilde(&self, s: f64) -> f64 {
        self.rho() - self.v(self.t0() + s)
    }

    /// `θ(t) = v(t)/u(t)` when the shape is built that way.
    fn theta(&self, _t: f64) -> Option<f64> {
        None
    }

    fn theta_data(&self) -> Option<ThetaData> {
        None
    }

    /// `d` with `ṽ(s) ~ d·s^δ` as `s → 0+`, when known in closed form.
    fn tilde_scale(&self) -> Option<f64> {
        None
    }

    fn name(&self) -> &'static str {
        "custom"
    }
}

/// `(X, Y) = (R·u(T), R·v(T))` with `R ⟂ T`.
#[derive(Debug, Clone)]
pub struct PolarModel {
    pub radial: Arc<dyn RadialLaw>,
    pub angular: Arc<dyn AngularLaw>,
    pub shape_u: Arc<dyn ShapeU>,
    pub shape_v: Option<Arc<dyn ShapeV>>,
    pub sidedness: Sidedness,
}

impl PolarModel {
    /// Assembles a model, checking that the components agree on `t₀` and
    /// that `t₀` sits inside the angular support (strictly inside on every
    /// side the sidedness declares).
    pub fn new(
        radial: Arc<dyn RadialLaw>,
        angular: Arc<dyn AngularLaw>,
        shape_u: Arc<dyn ShapeU>,
        shape_v: Option<Arc<dyn ShapeV>>,
        sidedness: Sidedness,
    ) -> Result<Self> {
        if radial.support_lower_bound() < 0.0 {
            return Err(Error::invalid("radial.support", "radial support must lie in [0, inf)"));
        }
        let t0 = angular.t0();
        if (shape_u.t0() - t0).abs() > 1e-12 {
            return Err(Error::invalid(
                "shape_u.t0",
                format!("u peaks at {} but the angular law is centred at {t0}", shape_u.t0()),
            ));
        }
        if let Some(v) = &shape_v {
            if (v.t0() - t0).abs() > 1e-12 {
                return Err(Error::invalid("shape_v.t0", "v and u disagree on t0"));
            }
        }
        let (lo, hi) = angular.support();
        if !(lo <= t0 && t0 < hi) {
            return Err(Error::invalid("angular.support", format!("t0 = {t0} not inside [{lo}, {hi})")));
        }
        if sidedness == Sidedness::TwoSided && !(lo < t0) {
            return Err(Error::invalid("angular.support", "two-sided model needs support on both sides of t0"));
        }
        Ok(Self { radial, angular, shape_u, shape_v, sidedness })
    }

    pub fn t0(&self) -> f64 {
        self.angular.t0()
    }

    pub fn sides(&self) -> &'static [Sign] {
        self.sidedness.sides()
    }

    pub fn is_two_sided(&self) -> bool {
        self.sidedness == Sidedness::TwoSided
    }

    /// Distance from `t₀` to the edge of the angular support on `side`.
    pub fn support_radius(&self, side: Sign) -> f64 {
        let (lo, hi) = self.angular.support();
        match side {
            Sign::Minus => self.t0() - lo,
            Sign::Plus => hi - self.t0(),
        }
    }

    pub fn x_of(&self, r: f64, t: f64) -> f64 {
        r * self.shape_u.u(t)
    }

    pub fn shape_v(&self) -> Result<&Arc<dyn ShapeV>> {
        self.shape_v
            .as_ref()
            .ok_or_else(|| Error::Precondition("model has no shape_v".into()))
    }

    /// Same model with another sidedness (the components are shared).
    pub fn with_sidedness(&self, sidedness: Sidedness) -> Result<Self> {
        Self::new(
            self.radial.clone(),
            self.angular.clone(),
            self.shape_u.clone(),
            self.shape_v.clone(),
            sidedness,
        )
    }
}
