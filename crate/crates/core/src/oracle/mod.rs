//! Numerical ground truth: Γ, adaptive quadrature, exact tail probabilities
//! and density normalizations.

pub mod gamma;
pub mod quadrature;

pub use gamma::gamma_eval;
pub use quadrature::{QuadratureResult, Tolerance};

use crate::asymptotics::compute_phi;
use crate::error::{Error, Result};
use crate::model::{PolarModel, Sign};
use crate::montecarlo::Condition;
use quadrature::{graded_points, integrate_breakpoints, integrate_to_infinity};

const TAIL_REL_TOL: f64 = 1e-9;
const GRADED_LEVELS: u32 = 40;

fn angular_range(model: &PolarModel, condition: Condition) -> (f64, f64) {
    let (lo, hi) = model.angular.support();
    match condition {
        Condition::RightSided => (model.t0(), hi),
        Condition::Unrestricted => (lo, hi),
    }
}

/// `P{X > x; condition} / H̄(x) = ∫ H̄(x/u(t))/H̄(x)·g(t) dt` over
/// `{u > 0}`. Scaling by `H̄(x)` keeps the integrand representable when
/// `H̄(x)` underflows.
pub fn tail_probability_scaled(model: &PolarModel, x: f64, condition: Condition) -> Result<QuadratureResult> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("threshold x = {x} must be finite and >= 0")));
    }
    let (lo, hi) = angular_range(model, condition);
    let t0 = model.t0();
    let base = model.radial.log_survival(x);
    let width = (hi - lo).max(t0 - lo).min(1.0);
    let points = graded_points(lo, t0, hi, 0.5 * width, GRADED_LEVELS);
    let integrand = |t: f64| {
        let u = model.shape_u.u(t);
        let g = model.angular.density(t);
        if u <= 0.0 || g == 0.0 {
            return 0.0;
        }
        let r = x / u;
        let ratio = if r.is_finite() { (model.radial.log_survival(r) - base).exp() } else { 0.0 };
        ratio * g
    };
    let res = integrate_breakpoints(integrand, &points, Tolerance::new(0.0, TAIL_REL_TOL).with_max_panels(20_000));
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "tail quadrature at x = {x}: error estimate {:e} on value {:e}",
            res.abs_error_estimate, res.value
        )));
    }
    Ok(res)
}

/// `P{X > x; condition}` by quadrature, relative tolerance 1e−9.
pub fn tail_probability_quadrature(model: &PolarModel, x: f64, condition: Condition) -> Result<QuadratureResult> {
    let scaled = tail_probability_scaled(model, x, condition)?;
    let h = model.radial.survival(x);
    Ok(QuadratureResult { value: scaled.value * h, abs_error_estimate: scaled.abs_error_estimate * h, ..scaled })
}

/// `∫₀^∞ ∫_{I(r)} f(r, t) dt dr` where `I(r)` is the union of the intervals
/// returned by `t_intervals(r)`. The `r` integral is mapped to `(0, 1)` by
/// `r = −ln(1 − w)`; each inner interval gets a mesh graded towards both
/// ends, where the `t^τ` singularities of limit densities sit.
pub fn density_normalization<F, S>(density: F, t_intervals: S) -> Result<QuadratureResult>
where
    F: Fn(f64, f64) -> f64,
    S: Fn(f64) -> Vec<(f64, f64)>,
{
    let inner_tol = Tolerance::new(1e-15, 1e-11).with_max_panels(4000);
    let mut inner_evals = 0;
    let mut inner_failed = false;
    let mut inner_err = 0.0_f64;
    let outer = integrate_to_infinity(
        |r| {
            let mut total = 0.0;
            for (a, b) in t_intervals(r) {
                if !(b > a) {
                    continue;
                }
                let pts = end_graded(a, b, 30);
                let res = integrate_breakpoints(|t| density(r, t), &pts, inner_tol);
                inner_evals += res.evaluations;
                inner_failed |= !res.converged;
                if res.value != 0.0 {
                    inner_err = inner_err.max(res.abs_error_estimate / res.value.abs());
                }
                total += res.value;
            }
            total
        },
        0.0,
        &(1..30).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>(),
        Tolerance::new(1e-13, 1e-10).with_max_panels(4000),
    );
    let abs_error_estimate = outer.abs_error_estimate + inner_err * outer.value.abs();
    let converged = outer.converged && !inner_failed;
    if !converged {
        return Err(Error::NonConvergence(format!(
            "2-D normalization: value {:e}, error estimate {abs_error_estimate:e}",
            outer.value
        )));
    }
    Ok(QuadratureResult {
        value: outer.value,
        abs_error_estimate,
        evaluations: outer.evaluations + inner_evals,
        converged,
    })
}

fn end_graded(a: f64, b: f64, levels: i32) -> Vec<f64> {
    let h = b - a;
    let mut pts = vec![a, b];
    for k in 1..=levels {
        let d = h * 0.5f64.powi(k);
        pts.push(a + d);
        pts.push(b - d);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallAngleMass {
    /// `P{0 < T − t₀ ≤ θφ(x)}` by quadrature.
    pub lhs: f64,
    /// `φ(x)·g̃(φ(x))·θ^{1+τ}/(1+τ)`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Compares the angular mass of `(t₀, t₀ + θφ(x)]` with its regular-variation
/// asymptotic `φ·g̃(φ)·∫₀^θ y^τ dy`.
pub fn small_t_mass_check(model: &PolarModel, theta: f64, x: f64) -> Result<SmallAngleMass> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::invalid("theta", "must be positive (the interval would be empty)"));
    }
    let tau = model.angular.tau(Sign::Plus);
    if !(tau > -1.0) {
        return Err(Error::invalid("angular.tau_plus", "must be > -1"));
    }
    let phi = compute_phi(model, Sign::Plus, x)?;
    let t0 = model.t0();
    let hi = t0 + theta * phi;
    let res = integrate_breakpoints(
        |t| model.angular.density(t),
        &end_graded(t0, hi, 40),
        Tolerance::new(0.0, 1e-12).with_max_panels(10_000),
    );
    if !res.converged {
        return Err(Error::NonConvergence(format!("angular mass on (t0, t0 + {theta}·phi]")));
    }
    let rhs = phi * model.angular.g_tilde(phi) * theta.powf(1.0 + tau) / (1.0 + tau);
    Ok(SmallAngleMass { lhs: res.value, rhs, ratio: res.value / rhs })
}
