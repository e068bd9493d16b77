//! Normalizers `ψ(x)`, `φ_σ(x)`, `φ*(x)`, mixture weights `p_σ`, `q_σ` and
//! the closed-form tail asymptotic.
//!
//! `φ_σ(x)` is the exact root of `ũ(σφ) = ψ(x)/x`. Any function
//! asymptotically equivalent to it would serve; the exact root makes the
//! power-law fixtures exact.

use crate::error::{Error, Result};
use crate::model::{PolarModel, Sign};
use crate::montecarlo::Condition;
use crate::oracle::gamma::gamma_eval;

/// Root-solver settings for [`compute_phi_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiOptions {
    pub bracket_lo: f64,
    /// Upper end of the bracket; `None` means half the support radius.
    pub s_max: Option<f64>,
    pub max_residual: f64,
    /// Points per decade of the monotonicity check on the bracket.
    pub monotone_points_per_decade: usize,
}

impl Default for PhiOptions {
    fn default() -> Self {
        Self { bracket_lo: 1e-14, s_max: None, max_residual: 1e-10, monotone_points_per_decade: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiSolution {
    pub phi: f64,
    /// `|ũ(σφ)·x/ψ(x) − 1|`.
    pub residual: f64,
}

pub fn compute_phi(model: &PolarModel, side: Sign, x: f64) -> Result<f64> {
    compute_phi_with(model, side, x, &PhiOptions::default()).map(|s| s.phi)
}

pub fn compute_phi_with(model: &PolarModel, side: Sign, x: f64, opts: &PhiOptions) -> Result<PhiSolution> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("threshold x = {x} must be positive and finite")));
    }
    let target = model.radial.aux_psi(x) / x;
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::Domain(format!("psi(x)/x = {target} at x = {x}")));
    }
    let sign = side.factor();
    let ut = |s: f64| model.shape_u.u_tilde(sign * s);
    let lo = opts.bracket_lo;
    let hi = opts.s_max.unwrap_or(0.5 * model.support_radius(side));
    if !(hi > lo) {
        return Err(Error::Bracket { side, x, target, lo: f64::NAN, hi: f64::NAN });
    }

    let decades = (hi / lo).log10();
    let n = (decades * opts.monotone_points_per_decade as f64).ceil() as usize + 1;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..n {
        let s = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let v = ut(s);
        if !v.is_finite() || v < prev || (v == prev && v > 0.0) {
            return Err(Error::Monotonicity { side, at: s });
        }
        prev = v;
    }

    let (u_lo, u_hi) = (ut(lo), ut(hi));
    if !(u_lo <= target && target <= u_hi) {
        return Err(Error::Bracket { side, x, target, lo: u_lo, hi: u_hi });
    }
    // Geometric bisection: the bracket spans many decades.
    let (mut a, mut b) = (lo, hi);
    for _ in 0..400 {
        let mid = (a * b).sqrt();
        if !(mid > a && mid < b) {
            break;
        }
        if ut(mid) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    let res = |s: f64| (ut(s) / target - 1.0).abs();
    let (phi, residual) = if res(a) < res(b) { (a, res(a)) } else { (b, res(b)) };
    if residual > opts.max_residual {
        return Err(Error::NonConvergence(format!(
            "phi root on side {side} at x = {x}: residual {residual:e} (u_tilde not continuous?)"
        )));
    }
    Ok(PhiSolution { phi, residual })
}

/// Per-`x` normalizers. `p` and `q` hold the finite-`x` ratios
/// `φ_σ g̃(σφ_σ)/Σ` and `φ_σ/φ*`, indexed by [`Sign::index`]; absent sides
/// of one-sided models carry `φ = None` and weight 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizers {
    pub x: f64,
    pub psi_x: f64,
    pub phi: [Option<f64>; 2],
    pub residual: [Option<f64>; 2],
    pub phi_star: f64,
    pub p: [f64; 2],
    pub q: [f64; 2],
}

impl Normalizers {
    pub fn compute(model: &PolarModel, x: f64) -> Result<Self> {
        Self::compute_with(model, x, &PhiOptions::default())
    }

    pub fn compute_with(model: &PolarModel, x: f64, opts: &PhiOptions) -> Result<Self> {
        let psi_x = model.radial.aux_psi(x);
        let mut phi = [None; 2];
        let mut residual = [None; 2];
        let mut mass = [0.0; 2];
        for &side in model.sides() {
            let sol = compute_phi_with(model, side, x, opts)?;
            phi[side.index()] = Some(sol.phi);
            residual[side.index()] = Some(sol.residual);
            mass[side.index()] = sol.phi * model.angular.g_tilde(side.factor() * sol.phi);
        }
        let phi_star = phi[0].unwrap_or(0.0) + phi[1].unwrap_or(0.0);
        let p = normalize_pair(mass)
            .ok_or_else(|| Error::Domain(format!("angular density vanishes at both phi at x = {x}")))?;
        let q = [phi[0].unwrap_or(0.0) / phi_star, phi[1].unwrap_or(0.0) / phi_star];
        Ok(Self { x, psi_x, phi, residual, phi_star, p, q })
    }

    pub fn phi(&self, side: Sign) -> Option<f64> {
        self.phi[side.index()]
    }

    pub fn phi_plus(&self) -> Result<f64> {
        self.phi(Sign::Plus).ok_or_else(|| Error::Precondition("phi_plus not computed".into()))
    }
}

fn normalize_pair(w: [f64; 2]) -> Option<[f64; 2]> {
    let total = w[0] + w[1];
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let plus = w[1] / total;
    Some([1.0 - plus, plus])
}

/// Limits `p_σ`, `q_σ`, indexed by [`Sign::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureLimits {
    pub p: [f64; 2],
    pub q: [f64; 2],
}

/// Limit of the per-side weights for laws whose leading terms
/// `ũ(σs) ~ c_σ s^{κ_σ}` and `g̃(σs) ~ a_σ s^{τ_σ}` are known in closed form.
/// Returns `None` when a leading coefficient is unavailable.
pub fn closed_form_limits(model: &PolarModel) -> Option<MixtureLimits> {
    if !model.is_two_sided() {
        return Some(MixtureLimits { p: [0.0, 1.0], q: [0.0, 1.0] });
    }
    let mut exp_p = [0.0; 2];
    let mut coef_p = [0.0; 2];
    let mut exp_q = [0.0; 2];
    let mut coef_q = [0.0; 2];
    for side in Sign::BOTH {
        let c = model.shape_u.tilde_scale(side)?;
        let a = model.angular.tilde_scale(side)?;
        let kappa = model.shape_u.kappa(side);
        let tau = model.angular.tau(side);
        let i = side.index();
        // φ_σ ~ (ε/c)^{1/κ} with ε = ψ(x)/x → 0
        exp_p[i] = (1.0 + tau) / kappa;
        coef_p[i] = a * c.powf(-exp_p[i]);
        exp_q[i] = 1.0 / kappa;
        coef_q[i] = c.powf(-exp_q[i]);
    }
    Some(MixtureLimits { p: dominant_weights(exp_p, coef_p)?, q: dominant_weights(exp_q, coef_q)? })
}

// Weights of coef_σ·ε^{exp_σ} as ε → 0: the smaller exponent wins.
fn dominant_weights(exp: [f64; 2], coef: [f64; 2]) -> Option<[f64; 2]> {
    let alive = [coef[0] > 0.0, coef[1] > 0.0];
    match alive {
        [false, false] => None,
        [true, false] => Some([1.0, 0.0]),
        [false, true] => Some([0.0, 1.0]),
        [true, true] => {
            if (exp[0] - exp[1]).abs() <= 1e-12 {
                normalize_pair(coef)
            } else if exp[0] < exp[1] {
                Some([1.0, 0.0])
            } else {
                Some([0.0, 1.0])
            }
        }
    }
}

/// Limit of a ratio along an `x` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLimit {
    pub minus: f64,
    pub plus: f64,
    /// Largest change of the plus weight between successive grid points.
    pub max_change: f64,
    /// `(x, minus, plus)` per grid point.
    pub path: Vec<(f64, f64, f64)>,
}

pub const DEFAULT_GRID_THRESHOLD: f64 = 0.1;

fn check_grid(model: &PolarModel, x_grid: &[f64]) -> Result<()> {
    if !model.is_two_sided() {
        return Err(Error::Precondition("mixture limits need a two-sided model".into()));
    }
    if x_grid.len() < 4 {
        return Err(Error::Precondition("x grid needs at least 4 points".into()));
    }
    if !x_grid.windows(2).all(|w| w[1] > w[0]) || x_grid[0] <= 0.0 {
        return Err(Error::Precondition("x grid must be positive and strictly increasing".into()));
    }
    if x_grid[x_grid.len() - 1] / x_grid[0] < 100.0 {
        return Err(Error::Precondition("x grid must span at least two decades".into()));
    }
    Ok(())
}

fn grid_limit(
    model: &PolarModel,
    x_grid: &[f64],
    threshold: f64,
    what: &str,
    pick: impl Fn(&Normalizers) -> [f64; 2],
) -> Result<GridLimit> {
    check_grid(model, x_grid)?;
    let mut path = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let w = pick(&Normalizers::compute(model, x)?);
        path.push((x, w[0], w[1]));
    }
    let max_change = path.windows(2).map(|w| (w[1].2 - w[0].2).abs()).fold(0.0, f64::max);
    if max_change > threshold {
        return Err(Error::NonConvergence(format!(
            "{what} changes by {max_change:.3e} between grid points (threshold {threshold:e}); limit may not exist"
        )));
    }
    let &(_, minus, plus) = path.last().expect("grid checked nonempty");
    Ok(GridLimit { minus, plus, max_change, path })
}

/// `p_σ` along `x_grid`, reported at the largest `x`.
pub fn mixture_p(model: &PolarModel, x_grid: &[f64], threshold: f64) -> Result<GridLimit> {
    grid_limit(model, x_grid, threshold, "p_plus", |n| n.p)
}

/// `q_σ = φ_σ/φ*` along `x_grid`, reported at the largest `x`.
pub fn ratio_q(model: &PolarModel, x_grid: &[f64], threshold: f64) -> Result<GridLimit> {
    grid_limit(model, x_grid, threshold, "q_plus", |n| n.q)
}

/// Closed-form limits when available, otherwise the grid limit on
/// `x ∈ {10², 10^{2.5}, …, 10⁶}`.
pub fn mixture_limits(model: &PolarModel) -> Result<MixtureLimits> {
    if let Some(l) = closed_form_limits(model) {
        return Ok(l);
    }
    let grid: Vec<f64> = (0..9).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
    let p = mixture_p(model, &grid, DEFAULT_GRID_THRESHOLD)?;
    let q = ratio_q(model, &grid, DEFAULT_GRID_THRESHOLD)?;
    Ok(MixtureLimits { p: [p.minus, p.plus], q: [q.minus, q.plus] })
}

/// `P{X > x, sign(T − t₀) = σ} / H̄(x)` to first order:
/// `φ_σ·g̃(σφ_σ)·Γ((1+τ_σ)/κ_σ)/κ_σ`.
pub fn tail_asymptotic_scaled(model: &PolarModel, side: Sign, x: f64) -> Result<f64> {
    let phi = compute_phi(model, side, x)?;
    let kappa = model.shape_u.kappa(side);
    let tau = model.angular.tau(side);
    let g = model.angular.g_tilde(side.factor() * phi);
    Ok(phi * g * gamma_eval((1.0 + tau) / kappa)? / kappa)
}

/// First-order asymptotic of `P{X > x, sign(T − t₀) = σ}`.
pub fn tail_asymptotic(model: &PolarModel, side: Sign, x: f64) -> Result<f64> {
    Ok(tail_asymptotic_scaled(model, side, x)? * model.radial.survival(x))
}

/// [`tail_asymptotic_scaled`] summed over the sides a condition admits.
pub fn tail_asymptotic_condition_scaled(model: &PolarModel, x: f64, condition: Condition) -> Result<f64> {
    match condition {
        Condition::RightSided => tail_asymptotic_scaled(model, Sign::Plus, x),
        Condition::Unrestricted => {
            model.sides().iter().map(|&s| tail_asymptotic_scaled(model, s, x)).sum()
        }
    }
}
