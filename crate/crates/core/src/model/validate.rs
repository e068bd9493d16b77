//! Grid checks of the model assumptions.
//!
//! A passing report means "not falsified at this resolution": the assumptions
//! are asymptotic and no finite grid decides them.

use std::fmt;

use super::{PolarModel, Sign};
use crate::error::{Error, Result};
use crate::oracle::quadrature::{graded_points, integrate_breakpoints, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationGrid {
    pub points_per_decade: usize,
    /// Points of the uniform grid over the angular support.
    pub dense_points: usize,
    pub gamma_x: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub gamma_tol: f64,
    pub slope_range: (f64, f64),
    pub index_tol: f64,
    pub epsilons: Vec<f64>,
    pub norm_tol: f64,
    /// Range of `x` for the `ψ(x)/x` monotonicity check.
    pub psi_range: (f64, f64),
}

impl Default for ValidationGrid {
    fn default() -> Self {
        Self {
            points_per_decade: 64,
            dense_points: 20_001,
            gamma_x: vec![20.0, 50.0, 100.0],
            lambdas: vec![-1.0, 0.0, 1.0, 2.0],
            gamma_tol: 0.05,
            slope_range: (1e-4, 1e-2),
            index_tol: 0.05,
            epsilons: vec![0.05, 0.1, 0.5],
            norm_tol: 1e-8,
            psi_range: (1.0, 1e3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: Option<f64>,
    /// Distance to the failure boundary; negative when failed.
    pub margin: f64,
    pub detail: String,
}

impl CheckEntry {
    fn new(name: impl Into<String>, passed: bool, measured: f64, margin: f64) -> Self {
        Self { name: name.into(), passed, measured, expected: None, margin, detail: String::new() }
    }

    fn expected(mut self, e: f64) -> Self {
        self.expected = Some(e);
        self
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    fn non_finite(name: impl Into<String>, at: f64) -> Self {
        Self::new(name, false, f64::NAN, f64::NEG_INFINITY).detail(format!("non-finite evaluation at {at:e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub entries: Vec<CheckEntry>,
    pub grid: ValidationGrid,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let status = if e.passed { "pass" } else { "FAIL" };
            write!(f, "{status} {:<24} measured={:.6e} margin={:.3e}", e.name, e.measured, e.margin)?;
            if let Some(x) = e.expected {
                write!(f, " expected={x}")?;
            }
            if !e.detail.is_empty() {
                write!(f, " ({})", e.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `n ≥ 2` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Least-squares slope of `ln|f(s)|` against `ln s` over `[lo, hi]`.
/// `None` when some `f(s)` is zero or non-finite.
pub fn loglog_slope(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Option<f64> {
    let mut pts = Vec::with_capacity(n);
    for s in log_grid(lo, hi, n) {
        let y = f(s).abs();
        if !(y.is_finite() && y > 0.0) {
            return None;
        }
        pts.push((s.ln(), y.ln()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

fn decades(lo: f64, hi: f64) -> f64 {
    (hi / lo).log10()
}

fn slope_entry(name: String, f: impl Fn(f64) -> f64, declared: f64, grid: &ValidationGrid) -> CheckEntry {
    let (lo, hi) = grid.slope_range;
    let n = (decades(lo, hi) * grid.points_per_decade as f64).ceil() as usize + 1;
    match loglog_slope(f, lo, hi, n) {
        Some(slope) => {
            let margin = grid.index_tol - (slope - declared).abs();
            CheckEntry::new(name, margin >= 0.0, slope, margin).expected(declared)
        }
        None => CheckEntry::new(name, false, f64::NAN, f64::NEG_INFINITY)
            .expected(declared)
            .detail("zero or non-finite value in slope window"),
    }
}

fn side_label(side: Sign) -> &'static str {
    match side {
        Sign::Minus => "minus",
        Sign::Plus => "plus",
    }
}

/// Runs every assumption check on `model`. Failures are report entries;
/// only a too-coarse grid is an error.
pub fn validate_model(model: &PolarModel, grid: &ValidationGrid) -> Result<ValidationReport> {
    if grid.points_per_decade < 64 {
        return Err(Error::Precondition(format!(
            "validation grid needs >= 64 points per decade, got {}",
            grid.points_per_decade
        )));
    }
    if grid.dense_points < 2 {
        return Err(Error::Precondition("dense grid needs at least 2 points".into()));
    }
    let mut entries = vec![
        check_radial_survival(model, grid),
        check_gamma_class(model, grid),
        check_psi_little_o(model, grid),
        check_angular_normalization(model, grid),
    ];
    for &side in model.sides() {
        let g = model.angular.clone();
        let sign = side.factor();
        entries.push(slope_entry(
            format!("tau_{}", side_label(side)),
            move |s| g.g_tilde(sign * s),
            model.angular.tau(side),
            grid,
        ));
    }
    entries.push(check_u_peak(model));
    let dense = dense_support_grid(model, grid);
    for &eps in &grid.epsilons {
        entries.push(check_sup_outside(model, &dense, eps));
    }
    entries.push(check_u_bounded(model, &dense));
    for &side in model.sides() {
        entries.push(check_u_tilde_positive(model, side, grid));
        let u = model.shape_u.clone();
        let sign = side.factor();
        entries.push(slope_entry(
            format!("kappa_{}", side_label(side)),
            move |s| u.u_tilde(sign * s),
            model.shape_u.kappa(side),
            grid,
        ));
    }
    if let Some(v) = &model.shape_v {
        let rho_gap = (v.rho() - v.v(model.t0())).abs();
        let entry = if rho_gap.is_finite() {
            CheckEntry::new("v_rho", rho_gap <= 1e-12, v.rho(), 1e-12 - rho_gap).expected(v.v(model.t0()))
        } else {
            CheckEntry::non_finite("v_rho", model.t0())
        };
        entries.push(entry);
        entries.push(check_v_sign(model, grid));
        let vv = v.clone();
        entries.push(slope_entry("delta".into(), move |s| vv.v_tilde(s), v.delta(), grid));
    }
    Ok(ValidationReport { entries, grid: grid.clone() })
}

fn check_radial_survival(model: &PolarModel, grid: &ValidationGrid) -> CheckEntry {
    let name = "radial_survival";
    let lb = model.radial.support_lower_bound();
    if lb < 0.0 {
        return CheckEntry::new(name, false, lb, lb).detail("support lower bound below 0");
    }
    let s0 = model.radial.survival(lb);
    if !s0.is_finite() {
        return CheckEntry::non_finite(name, lb);
    }
    let hi = grid.psi_range.1;
    let mut prev = f64::INFINITY;
    let mut worst_increase = 0.0_f64;
    for r in log_grid(lb.max(1e-3), hi, grid.points_per_decade * 6) {
        let ls = model.radial.log_survival(r);
        if ls.is_nan() || ls > 0.0 {
            return CheckEntry::non_finite(name, r);
        }
        worst_increase = worst_increase.max(ls - prev);
        prev = ls;
    }
    let far = model.radial.survival(hi);
    let passed = (s0 - 1.0).abs() <= 1e-12 && worst_increase <= 1e-12 && far < 1e-3;
    CheckEntry::new(name, passed, s0, 1e-12 - (s0 - 1.0).abs())
        .expected(1.0)
        .detail(format!("max log-survival increase {worst_increase:e}, survival({hi}) = {far:e}"))
}

fn check_gamma_class(model: &PolarModel, grid: &ValidationGrid) -> CheckEntry {
    let name = "gamma_class";
    let mut errs = Vec::with_capacity(grid.gamma_x.len());
    for &x in &grid.gamma_x {
        let psi = model.radial.aux_psi(x);
        let base = model.radial.log_survival(x);
        let mut err = 0.0_f64;
        for &lam in &grid.lambdas {
            let ratio = (model.radial.log_survival(x + psi * lam) - base).exp();
            if !ratio.is_finite() || !psi.is_finite() {
                return CheckEntry::non_finite(name, x);
            }
            err = err.max((ratio - (-lam).exp()).abs());
        }
        errs.push(err);
    }
    let last = *errs.last().unwrap_or(&f64::NAN);
    let monotone = errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let margin = grid.gamma_tol - last;
    CheckEntry::new(name, margin >= 0.0 && monotone, last, margin)
        .detail(format!("errors {} along x = {:?}", fmt_list(&errs), grid.gamma_x))
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|e| format!("{e:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn check_psi_little_o(model: &PolarModel, grid: &ValidationGrid) -> CheckEntry {
    let name = "psi_over_x";
    let (lo, hi) = grid.psi_range;
    let n = (decades(lo, hi) * grid.points_per_decade as f64).ceil() as usize + 1;
    let mut prev = f64::INFINITY;
    let mut first = f64::NAN;
    for x in log_grid(lo, hi, n) {
        let q = model.radial.aux_psi(x) / x;
        if !(q.is_finite() && q > 0.0) {
            return CheckEntry::non_finite(name, x);
        }
        if first.is_nan() {
            first = q;
        }
        if q > prev * (1.0 + 1e-12) {
            return CheckEntry::new(name, false, q, prev - q).detail(format!("psi(x)/x increases at x = {x:e}"));
        }
        prev = q;
    }
    CheckEntry::new(name, prev < first, prev, first - prev).detail(format!("psi(x)/x from {first:e} to {prev:e}"))
}

fn check_angular_normalization(model: &PolarModel, grid: &ValidationGrid) -> CheckEntry {
    let name = "angular_normalization";
    let (lo, hi) = model.angular.support();
    let t0 = model.t0();
    let width = (hi - lo).min(1.0);
    let pts = graded_points(lo, t0, hi, 0.5 * width, 30);
    let g = &model.angular;
    let mut bad = None;
    let res = integrate_breakpoints(
        |t| {
            let d = g.density(t);
            if !d.is_finite() && bad.is_none() {
                bad = Some(t);
            }
            d
        },
        &pts,
        Tolerance::new(1e-12, 1e-12).with_max_panels(20_000),
    );
    if let Some(t) = bad {
        return CheckEntry::non_finite(name, t);
    }
    let gap = (res.value - 1.0).abs();
    CheckEntry::new(name, gap <= grid.norm_tol, res.value, grid.norm_tol - gap)
        .expected(1.0)
        .detail(format!("quadrature error estimate {:e}", res.abs_error_estimate))
}

fn check_u_peak(model: &PolarModel) -> CheckEntry {
    let u0 = model.shape_u.u(model.t0());
    if !u0.is_finite() {
        return CheckEntry::non_finite("u_at_t0", model.t0());
    }
    let gap = (u0 - 1.0).abs();
    CheckEntry::new("u_at_t0", gap <= 1e-12, u0, 1e-12 - gap).expected(1.0)
}

fn dense_support_grid(model: &PolarModel, grid: &ValidationGrid) -> Vec<f64> {
    let (lo, hi) = model.angular.support();
    let n = grid.dense_points;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn check_sup_outside(model: &PolarModel, dense: &[f64], eps: f64) -> CheckEntry {
    let name = format!("sup_outside_{eps}");
    let t0 = model.t0();
    let mut sup = f64::NEG_INFINITY;
    let mut arg = f64::NAN;
    for &t in dense.iter().filter(|t| (*t - t0).abs() > eps) {
        let u = model.shape_u.u(t);
        if !u.is_finite() {
            return CheckEntry::non_finite(name, t);
        }
        if u > sup {
            sup = u;
            arg = t;
        }
    }
    if sup == f64::NEG_INFINITY {
        return CheckEntry::new(name, true, f64::NAN, f64::INFINITY).detail("no support points outside the band");
    }
    let margin = 1.0 - sup;
    CheckEntry::new(name, margin > 0.0, sup, margin).detail(format!("attained at t = {arg}"))
}

// Only u ≤ 1 is needed for {X > x} ⊆ {R > x} with R ≥ 0; u may go below −1.
fn check_u_bounded(model: &PolarModel, dense: &[f64]) -> CheckEntry {
    let name = "u_at_most_one";
    let mut max = f64::NEG_INFINITY;
    for &t in dense {
        let u = model.shape_u.u(t);
        if !u.is_finite() {
            return CheckEntry::non_finite(name, t);
        }
        max = max.max(u);
    }
    let margin = 1.0 + 1e-12 - max;
    CheckEntry::new(name, margin >= 0.0, max, margin)
}

fn check_u_tilde_positive(model: &PolarModel, side: Sign, grid: &ValidationGrid) -> CheckEntry {
    let name = format!("u_tilde_positive_{}", side_label(side));
    let hi = grid.slope_range.1.min(0.5 * model.support_radius(side));
    let lo = hi * 1e-6;
    let mut min = f64::INFINITY;
    for s in log_grid(lo, hi, 6 * grid.points_per_decade) {
        let v = model.shape_u.u_tilde(side.factor() * s);
        if !v.is_finite() {
            return CheckEntry::non_finite(name, s);
        }
        min = min.min(v);
    }
    CheckEntry::new(name, min > 0.0, min, min)
}

fn check_v_sign(model: &PolarModel, grid: &ValidationGrid) -> CheckEntry {
    let name = "v_sign";
    let Some(v) = &model.shape_v else { unreachable!("called only with shape_v") };
    let expected = v.v_sign();
    let hi = grid.slope_range.1;
    let mut worst = f64::INFINITY;
    for s in log_grid(hi * 1e-6, hi, 6 * grid.points_per_decade) {
        let d = v.v_tilde(s);
        if !d.is_finite() {
            return CheckEntry::non_finite(name, s);
        }
        let signed = expected.factor() * d;
        worst = worst.min(signed);
        if signed <= 0.0 {
            return CheckEntry::new(name, false, d, signed).detail(format!("v_tilde({s:e}) has the wrong sign"));
        }
    }
    CheckEntry::new(name, true, expected.factor(), worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin::{build_builtin_model, AngularSpec, ModelSpec, RadialSpec, ShapeUSpec, ShapeVSpec};
    use crate::model::Sidedness;

    fn report(spec: &ModelSpec) -> ValidationReport {
        validate_model(&build_builtin_model(spec).unwrap(), &ValidationGrid::default()).unwrap()
    }

    #[test]
    fn f1_passes_everything() {
        let r = report(&ModelSpec::fixture_f1());
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.entry("kappa_plus").unwrap().expected, Some(2.0));
    }

    #[test]
    fn builtin_catalogue_passes() {
        let base = ModelSpec::fixture_f1();
        let specs = [
            ModelSpec { radial: RadialSpec::WeibullTail { beta: 2.0 }, ..base.clone() },
            ModelSpec { radial: RadialSpec::WeibullTail { beta: 0.7 }, ..base.clone() },
            ModelSpec { radial: RadialSpec::HalfNormal, ..base.clone() },
            ModelSpec { angular: AngularSpec::SymmetricPower { tau: 1.0, half_width: 1.0 }, ..base.clone() },
            ModelSpec { angular: AngularSpec::SymmetricPower { tau: -0.5, half_width: 1.0 }, ..base.clone() },
            ModelSpec {
                angular: AngularSpec::AsymmetricPower { tau_minus: 0.5, tau_plus: -0.3, weight: 0.3, half_width: 1.0 },
                ..base.clone()
            },
            ModelSpec {
                shape_u: ShapeUSpec::Power { kappa_minus: 1.0, kappa_plus: 2.0, scale: 1.0 },
                ..base.clone()
            },
            ModelSpec { shape_u: ShapeUSpec::Cosine, shape_v: Some(ShapeVSpec::Sine), ..base.clone() },
            ModelSpec { shape_v: Some(ShapeVSpec::SeifertLinear { rho: 0.5 }), ..base.clone() },
            ModelSpec { shape_v: Some(ShapeVSpec::Power { rho: 1.0, delta: 3.0, d: -2.0 }), ..base.clone() },
            ModelSpec {
                shape_v: Some(ShapeVSpec::ThetaPolynomial { theta_t0: 0.0, n: 2, theta_n_deriv: 4.0 }),
                ..base.clone()
            },
            ModelSpec { sidedness: Sidedness::OneSidedRight, ..base },
        ];
        for spec in &specs {
            let r = report(spec);
            assert!(r.all_passed(), "{spec:?}\n{r}");
        }
    }

    #[test]
    fn wide_support_with_negative_u_still_bounded_above() {
        let spec = ModelSpec { angular: AngularSpec::Uniform { lo: -3.0, hi: 3.0 }, ..ModelSpec::fixture_f1() };
        let r = report(&spec);
        assert!(r.entry("u_at_most_one").unwrap().passed);
        assert!(r.entry("sup_outside_0.5").unwrap().passed);
        assert!(r.entry("u_at_most_one").unwrap().measured <= 1.0);
    }

    #[test]
    fn cosine_with_second_maximum_fails_sup_check() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let spec = ModelSpec {
            angular: AngularSpec::Uniform { lo: -two_pi, hi: two_pi },
            shape_u: ShapeUSpec::Cosine,
            ..ModelSpec::fixture_f1()
        };
        let r = report(&spec);
        for eps in ["0.05", "0.1", "0.5"] {
            assert!(!r.entry(&format!("sup_outside_{eps}")).unwrap().passed);
        }
        assert!(!r.all_passed());
    }

    #[test]
    fn coarse_grid_rejected() {
        let m = build_builtin_model(&ModelSpec::fixture_f1()).unwrap();
        let grid = ValidationGrid { points_per_decade: 10, ..ValidationGrid::default() };
        assert!(matches!(validate_model(&m, &grid), Err(Error::Precondition(_))));
    }

    #[test]
    fn report_is_deterministic() {
        assert_eq!(report(&ModelSpec::fixture_f1()), report(&ModelSpec::fixture_f1()));
    }

    #[test]
    fn slope_of_pure_power() {
        let s = loglog_slope(|s| 3.0 * s.powf(1.7), 1e-4, 1e-2, 129).unwrap();
        assert!((s - 1.7).abs() < 1e-12);
        assert!(loglog_slope(|_| 0.0, 1e-4, 1e-2, 10).is_none());
    }
}
