//! Exact sampling of `(R, T)` given `{X > x}` (optionally also `T > t₀`).
//!
//! Proposals are `R ~ (R | R > x)` by tail inversion and `T` from the angular
//! law; a proposal is kept iff `R·u(T) > x` (and `T > t₀` when right-sided).
//! Since `u ≤ 1` and `R ≥ 0`, `{X > x} ⊆ {R > x}`, so the kept pairs follow
//! the conditional law exactly and `H̄(x)·accepted/proposals` is unbiased for
//! the tail probability.
//!
//! Proposals are generated in fixed-size batches; batch `k` draws from
//! `seed.substream(k)`. Batches run in parallel waves and are merged in
//! batch order, so the output depends on the seed and batch size only, not
//! on the number of workers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::asymptotics::Normalizers;
use crate::error::{Error, Result};
use crate::limitlaw::{CorollaryCase, CorollaryParams};
use crate::model::{PolarModel, Sign};
use crate::rng::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `X > x` and `T > t₀`.
    RightSided,
    /// `X > x`.
    Unrestricted,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::RightSided => "right_sided",
            Condition::Unrestricted => "unrestricted",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right_sided" => Ok(Condition::RightSided),
            "unrestricted" => Ok(Condition::Unrestricted),
            other => Err(Error::UnknownFamily { component: "condition", name: other.to_string() }),
        }
    }
}

/// Scale applied to `T − t₀` in the normalized pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormScale {
    /// `φ₊(x)`.
    PlusPhi,
    /// `φ_σ(x)` with `σ` the sign of `T − t₀`.
    PerSign,
    /// `φ*(x) = φ₋(x) + φ₊(x)`.
    Star,
}

impl NormScale {
    pub fn name(self) -> &'static str {
        match self {
            NormScale::PlusPhi => "phi_plus",
            NormScale::PerSign => "phi_sign",
            NormScale::Star => "phi_star",
        }
    }
}

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_BATCH_SIZE: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOptions {
    /// Proposals per batch. Part of the stream assignment: changing it
    /// changes the draws.
    pub batch_size: usize,
    /// Cap on proposals before giving up with [`Error::BudgetExceeded`].
    pub budget: u64,
    /// Worker threads; does not affect the output.
    pub workers: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { batch_size: DEFAULT_BATCH_SIZE, budget: DEFAULT_BUDGET, workers: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceStats {
    pub proposals: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    /// `H̄(x)`, the mass of the proposal region.
    pub radial_tail_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSample {
    pub x: f64,
    pub condition: Condition,
    pub scale: NormScale,
    pub normalizers: Normalizers,
    /// `(R, T)` in acceptance order.
    pub raw: Vec<(f64, f64)>,
    /// `((R − x)/ψ(x), (T − t₀)/scale)`.
    pub normalized: Vec<(f64, f64)>,
    pub acceptance: AcceptanceStats,
    pub seed: SeedStream,
}

impl ConditionalSample {
    pub fn r_norm(&self) -> Vec<f64> {
        self.normalized.iter().map(|p| p.0).collect()
    }

    pub fn t_norm(&self) -> Vec<f64> {
        self.normalized.iter().map(|p| p.1).collect()
    }

    /// Scale used for `T − t₀` on `side`.
    pub fn scale_for(&self, side: Sign) -> Option<f64> {
        scale_value(&self.normalizers, self.scale, side)
    }
}

fn scale_value(n: &Normalizers, scale: NormScale, side: Sign) -> Option<f64> {
    match scale {
        NormScale::PlusPhi => n.phi(Sign::Plus),
        NormScale::PerSign => n.phi(side),
        NormScale::Star => Some(n.phi_star),
    }
}

enum Stop {
    Accepted(u64),
    Proposals(u64),
}

struct Batch {
    proposals: u64,
    /// `(index within batch, R, T)`.
    accepted: Vec<(u64, f64, f64)>,
}

fn accepts(model: &PolarModel, x: f64, condition: Condition, r: f64, t: f64) -> bool {
    r * model.shape_u.u(t) > x && (condition == Condition::Unrestricted || t > model.t0())
}

fn run_batch(model: &PolarModel, x: f64, condition: Condition, stream: SeedStream, size: u64) -> Batch {
    let mut rng = stream.rng();
    let mut accepted = Vec::new();
    for i in 0..size {
        let r = model.radial.tail_quantile(rng.random::<f64>(), x);
        let t = model.angular.sample(&mut rng);
        if accepts(model, x, condition, r, t) {
            accepted.push((i, r, t));
        }
    }
    Batch { proposals: size, accepted }
}

struct Engine<'a> {
    model: &'a PolarModel,
    x: f64,
    condition: Condition,
    stream: SeedStream,
    opts: SampleOptions,
}

impl Engine<'_> {
    fn run(&self, stop: Stop) -> Result<(Vec<(f64, f64)>, u64)> {
        let bs = self.opts.batch_size.max(1) as u64;
        let workers = self.opts.workers.max(1);
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        let mut out = Vec::new();
        let mut proposals = 0u64;
        let mut next_batch = 0u64;
        loop {
            let sizes: Vec<(u64, u64)> = (0..workers as u64)
                .map(|j| next_batch + j)
                .filter_map(|k| {
                    let size = match stop {
                        Stop::Accepted(_) => bs,
                        Stop::Proposals(n) => n.saturating_sub(k * bs).min(bs),
                    };
                    (size > 0).then_some((k, size))
                })
                .collect();
            if sizes.is_empty() {
                return Ok((out, proposals));
            }
            next_batch += sizes.len() as u64;
            let work = |&(k, size): &(u64, u64)| {
                run_batch(self.model, self.x, self.condition, self.stream.substream(k), size)
            };
            let batches: Vec<Batch> = match &pool {
                Some(p) => p.install(|| sizes.par_iter().map(work).collect()),
                None => sizes.iter().map(work).collect(),
            };
            for b in batches {
                if let Stop::Accepted(target) = stop {
                    let need = (target - out.len() as u64) as usize;
                    if b.accepted.len() >= need {
                        let (last_idx, _, _) = b.accepted[need - 1];
                        let total = proposals + last_idx + 1;
                        if total > self.opts.budget {
                            return Err(self.over_budget(self.opts.budget, out.len() as u64));
                        }
                        out.extend(b.accepted[..need].iter().map(|&(_, r, t)| (r, t)));
                        return Ok((out, total));
                    }
                }
                out.extend(b.accepted.iter().map(|&(_, r, t)| (r, t)));
                proposals += b.proposals;
                if matches!(stop, Stop::Accepted(_)) && proposals >= self.opts.budget {
                    return Err(self.over_budget(proposals, out.len() as u64));
                }
            }
        }
    }

    fn over_budget(&self, proposals: u64, accepted: u64) -> Error {
        Error::BudgetExceeded { proposals, accepted, cap: self.opts.budget }
    }
}

/// Exactly `n_target` accepted pairs from `(R, T) | condition`.
pub fn sample_conditional(
    model: &PolarModel,
    x: f64,
    n_target: usize,
    condition: Condition,
    scale: NormScale,
    seed: SeedStream,
    opts: &SampleOptions,
) -> Result<ConditionalSample> {
    if n_target == 0 {
        return Err(Error::EmptyInput("n_target must be >= 1"));
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("threshold x = {x} must be positive and finite")));
    }
    let normalizers = Normalizers::compute(model, x)?;
    if scale_value(&normalizers, scale, Sign::Plus).is_none() {
        return Err(Error::Precondition(format!("scale {} unavailable for this model", scale.name())));
    }
    if scale == NormScale::PerSign && condition == Condition::Unrestricted && !model.is_two_sided() {
        return Err(Error::Precondition("per-sign scaling of unrestricted draws needs a two-sided model".into()));
    }
    let engine = Engine { model, x, condition, stream: seed, opts: *opts };
    let (raw, proposals) = engine.run(Stop::Accepted(n_target as u64))?;
    let psi = normalizers.psi_x;
    let t0 = model.t0();
    let normalized = raw
        .iter()
        .map(|&(r, t)| {
            let s = t - t0;
            // Left-side draws of a one-sided model fall back to φ₊.
            let sc = scale_value(&normalizers, scale, Sign::of(s)).unwrap_or(normalizers.phi_star);
            ((r - x) / psi, s / sc)
        })
        .collect();
    let accepted = raw.len() as u64;
    Ok(ConditionalSample {
        x,
        condition,
        scale,
        normalizers,
        raw,
        normalized,
        acceptance: AcceptanceStats {
            proposals,
            accepted,
            acceptance_rate: accepted as f64 / proposals as f64,
            radial_tail_prob: model.radial.survival(x),
        },
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// `estimate / H̄(x)`; representable when `H̄(x)` underflows.
    pub scaled_estimate: f64,
    pub scaled_std_error: f64,
    pub acceptance: AcceptanceStats,
}

/// `P{X > x; condition} ≈ H̄(x)·accepted/n_proposals` with its binomial
/// standard error.
pub fn estimate_tail_probability(
    model: &PolarModel,
    x: f64,
    n_proposals: u64,
    condition: Condition,
    seed: SeedStream,
    opts: &SampleOptions,
) -> Result<TailEstimate> {
    if n_proposals == 0 {
        return Err(Error::EmptyInput("n_proposals must be >= 1"));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("threshold x = {x} must be finite and >= 0")));
    }
    let engine = Engine { model, x, condition, stream: seed, opts: *opts };
    let (acc, proposals) = engine.run(Stop::Proposals(n_proposals))?;
    let n = proposals as f64;
    let phat = acc.len() as f64 / n;
    let se = (phat * (1.0 - phat) / n).sqrt();
    let h = model.radial.survival(x);
    Ok(TailEstimate {
        estimate: h * phat,
        std_error: h * se,
        scaled_estimate: phat,
        scaled_std_error: se,
        acceptance: AcceptanceStats {
            proposals,
            accepted: acc.len() as u64,
            acceptance_rate: phat,
            radial_tail_prob: h,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignFrequency {
    pub minus: f64,
    pub plus: f64,
    pub n: usize,
}

impl SignFrequency {
    /// Binomial standard error of `plus` around `p`.
    pub fn std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n as f64).sqrt()
    }
}

/// Frequencies of `sign(T − t₀)` among `n` draws given `{X > x}`.
pub fn empirical_sign_freq(
    model: &PolarModel,
    x: f64,
    n: usize,
    seed: SeedStream,
    opts: &SampleOptions,
) -> Result<SignFrequency> {
    if !model.is_two_sided() {
        return Err(Error::Precondition("sign frequencies need a two-sided model".into()));
    }
    let sample = sample_conditional(model, x, n, Condition::Unrestricted, NormScale::PerSign, seed, opts)?;
    Ok(sign_frequency(model, &sample.raw))
}

pub fn sign_frequency(model: &PolarModel, raw: &[(f64, f64)]) -> SignFrequency {
    let t0 = model.t0();
    let plus = raw.iter().filter(|p| Sign::of(p.1 - t0) == Sign::Plus).count();
    let n = raw.len();
    let fp = plus as f64 / n as f64;
    SignFrequency { minus: (n - plus) as f64 / n as f64, plus: fp, n }
}

const CASE_GRID: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// `ũ(s)/ṽ(s)` on the right of `t₀` along `s = 10⁻², …, 10⁻⁶`.
pub fn u_over_v_path(model: &PolarModel) -> Result<Vec<f64>> {
    let v = model.shape_v()?;
    Ok(CASE_GRID.iter().map(|&s| model.shape_u.u_tilde(s) / v.v_tilde(s)).collect())
}

/// Case parameters read off the model: `κ = κ₊`, `δ`, `ρ`, the measured
/// limit `C` of `ũ/ṽ` (when it settles) and the θ data.
pub fn case_params_from_model(model: &PolarModel) -> Result<CorollaryParams> {
    let v = model.shape_v()?;
    let path = u_over_v_path(model)?;
    let c = settled_limit(&path);
    let theta = v.theta_data();
    Ok(CorollaryParams {
        kappa: Some(model.shape_u.kappa(Sign::Plus)),
        delta: Some(v.delta()),
        rho: Some(v.rho()),
        c,
        n: theta.map(|d| d.n),
        theta_n_deriv: theta.map(|d| d.theta_n_deriv_at_t0),
    })
}

fn settled_limit(path: &[f64]) -> Option<f64> {
    let (a, b) = (path[path.len() - 2], path[path.len() - 1]);
    let ok = a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-2 * b.abs().max(1.0);
    ok.then_some(b)
}

fn mismatch(case: &CorollaryCase, why: impl fmt::Display) -> Error {
    Error::CaseMismatch(format!("{}: {why}", case.kind()))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Checks on a grid that the model satisfies the case's condition.
pub fn check_case(model: &PolarModel, case: &CorollaryCase) -> Result<()> {
    let v = model.shape_v()?;
    if !close(case.kappa(), model.shape_u.kappa(Sign::Plus)) {
        return Err(mismatch(case, format!("kappa {} differs from the model's {}", case.kappa(), model.shape_u.kappa(Sign::Plus))));
    }
    let path = u_over_v_path(model)?;
    if path.iter().any(|r| r.is_nan()) {
        return Err(mismatch(case, "u_tilde/v_tilde undefined on the grid"));
    }
    let rho = v.rho();
    match *case {
        CorollaryCase::Fs { delta, .. } => {
            if !close(delta, v.delta()) {
                return Err(mismatch(case, format!("delta {delta} differs from the model's {}", v.delta())));
            }
            let scaled: Vec<f64> = path.iter().map(|r| (rho * r).abs()).collect();
            let last = scaled[scaled.len() - 1];
            let shrinking = scaled.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
            if rho != 0.0 && !(last <= 1e-2 && shrinking) {
                return Err(mismatch(case, format!("rho*u_tilde/v_tilde does not vanish (reaches {last:e})")));
            }
        }
        CorollaryCase::DeltaGtKappa { rho: r, .. } => {
            if !close(r, rho) {
                return Err(mismatch(case, format!("rho {r} differs from the model's {rho}")));
            }
            let growing = path.windows(2).all(|w| w[1].abs() > w[0].abs());
            let last = path[path.len() - 1].abs();
            if !(growing && last >= 1e2) {
                return Err(mismatch(case, format!("u_tilde/v_tilde does not diverge (reaches {last:e})")));
            }
        }
        CorollaryCase::RatioC { delta, rho: r, c, .. } => {
            if !close(r, rho) || !close(delta, v.delta()) {
                return Err(mismatch(case, "rho or delta differ from the model"));
            }
            match settled_limit(&path) {
                Some(m) if (m - c).abs() <= 1e-2 * m.abs().max(1.0) => {}
                Some(m) => return Err(mismatch(case, format!("C = {c} but u_tilde/v_tilde tends to {m}"))),
                None => return Err(mismatch(case, "u_tilde/v_tilde has no finite limit on the grid")),
            }
        }
        CorollaryCase::Seifert { .. } => {
            let linear = v.theta_data().is_some_and(|d| d.n == 1 && d.theta_n_deriv_at_t0 == 1.0);
            if !linear {
                return Err(mismatch(case, "v is not (t - t0 + rho)*u"));
            }
        }
        CorollaryCase::ThetaN { n, theta_n_deriv, .. } => match v.theta_data() {
            Some(d) if d.n == n && close(d.theta_n_deriv_at_t0, theta_n_deriv) => {}
            Some(d) => {
                return Err(mismatch(
                    case,
                    format!("model has n = {}, theta^(n) = {}", d.n, d.theta_n_deriv_at_t0),
                ))
            }
            None => return Err(mismatch(case, "v carries no theta data")),
        },
    }
    Ok(())
}

/// Normalized `(X, Y)` for the corollary `case`, computed from the raw draws
/// of a right-sided sample.
pub fn bivariate_normalized(
    model: &PolarModel,
    case: &CorollaryCase,
    sample: &ConditionalSample,
) -> Result<Vec<(f64, f64)>> {
    let v = model.shape_v()?;
    if sample.condition != Condition::RightSided {
        return Err(Error::Precondition("corollary normalizations need a right-sided sample".into()));
    }
    check_case(model, case)?;
    let x = sample.x;
    let n = &sample.normalizers;
    let psi = n.psi_x;
    let phi = n.phi_plus()?;
    let rho = v.rho();
    let theta0 = v.theta_data().map(|d| d.theta_t0).unwrap_or(rho);
    let second: Box<dyn Fn(f64, f64) -> f64> = match *case {
        CorollaryCase::Fs { .. } | CorollaryCase::RatioC { .. } => {
            let denom = x * v.v_tilde(phi);
            Box::new(move |_, yy| (yy - rho * x) / denom)
        }
        CorollaryCase::DeltaGtKappa { .. } => Box::new(move |_, yy| (yy - rho * x) / psi),
        CorollaryCase::Seifert { .. } => Box::new(move |xx, yy| (yy / xx - rho) / phi),
        CorollaryCase::ThetaN { n, .. } => {
            let scale = phi.powi(n as i32);
            Box::new(move |xx, yy| (yy / xx - theta0) / scale)
        }
    };
    Ok(sample
        .raw
        .iter()
        .map(|&(r, t)| {
            let xx = r * model.shape_u.u(t);
            let yy = r * v.v(t);
            ((xx - x) / psi, second(xx, yy))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::limitlaw::CorollaryKind;
    use crate::model::builtin::{build_builtin_model, ModelSpec, ShapeUSpec, ShapeVSpec};
    use crate::model::{ShapeU, Sidedness};
    use crate::oracle::tail_probability_quadrature;

    fn f1() -> PolarModel {
        build_builtin_model(&ModelSpec::fixture_f1()).unwrap()
    }

    fn with_v(v: ShapeVSpec) -> PolarModel {
        build_builtin_model(&ModelSpec { shape_v: Some(v), ..ModelSpec::fixture_f1() }).unwrap()
    }

    fn opts() -> SampleOptions {
        SampleOptions { batch_size: 1024, ..SampleOptions::default() }
    }

    #[test]
    fn accepted_pairs_satisfy_condition() {
        let m = f1();
        let s = sample_conditional(&m, 50.0, 5000, Condition::RightSided, NormScale::PlusPhi, SeedStream::new(1), &opts())
            .unwrap();
        assert_eq!(s.raw.len(), 5000);
        for (&(r, t), &(a, _)) in s.raw.iter().zip(&s.normalized) {
            assert!(r * m.shape_u.u(t) > 50.0);
            assert!(t > 0.0 && r > 50.0 && a > 0.0);
        }
        assert!(s.acceptance.accepted <= s.acceptance.proposals);
    }

    #[test]
    fn acceptance_rate_matches_tail_asymptotic() {
        let m = f1();
        let s = sample_conditional(&m, 50.0, 10_000, Condition::RightSided, NormScale::PlusPhi, SeedStream::new(2), &opts())
            .unwrap();
        let predicted = crate::asymptotics::tail_asymptotic_scaled(&m, Sign::Plus, 50.0).unwrap();
        assert!((predicted - 0.0626).abs() < 1e-3);
        assert!((s.acceptance.acceptance_rate / predicted - 1.0).abs() < 0.1);
    }

    #[test]
    fn independent_of_workers_and_repeatable() {
        let m = f1();
        let run = |workers| {
            let o = SampleOptions { workers, ..opts() };
            sample_conditional(&m, 25.0, 3000, Condition::Unrestricted, NormScale::Star, SeedStream::new(9), &o).unwrap()
        };
        let a = run(1);
        assert_eq!(a, run(1));
        assert_eq!(a, run(4));
        assert_eq!(a, run(3));
    }

    #[test]
    fn tail_estimate_against_quadrature() {
        let m = f1();
        let exact = tail_probability_quadrature(&m, 10.0, Condition::RightSided).unwrap().value;
        let est = estimate_tail_probability(&m, 10.0, 1_000_000, Condition::RightSided, SeedStream::new(4), &opts())
            .unwrap();
        assert_eq!(est.acceptance.proposals, 1_000_000);
        assert!((est.estimate - exact).abs() <= 3.0 * est.std_error, "{} vs {exact}", est.estimate);
    }

    #[test]
    fn tail_estimate_rejects_zero_proposals() {
        assert!(estimate_tail_probability(&f1(), 10.0, 0, Condition::RightSided, SeedStream::new(0), &opts()).is_err());
    }

    #[test]
    fn flat_shape_accepts_every_right_sided_proposal() {
        #[derive(Debug)]
        struct Flat;
        impl ShapeU for Flat {
            fn u(&self, _: f64) -> f64 {
                1.0
            }
            fn t0(&self) -> f64 {
                0.0
            }
            fn kappa(&self, _: Sign) -> f64 {
                1.0
            }
        }
        let f = f1();
        let m = PolarModel::new(f.radial.clone(), f.angular.clone(), Arc::new(Flat), None, Sidedness::TwoSided)
            .unwrap();
        let n = 200_000;
        let est = estimate_tail_probability(&m, 3.0, n, Condition::RightSided, SeedStream::new(5), &opts()).unwrap();
        let target = (-3.0f64).exp() * 0.5;
        assert!((est.estimate - target).abs() <= 3.0 * est.std_error);
        let all = estimate_tail_probability(&m, 3.0, 1000, Condition::Unrestricted, SeedStream::new(5), &opts()).unwrap();
        assert_eq!(all.acceptance.accepted, 1000);
    }

    #[test]
    fn budget_cap_is_enforced() {
        let o = SampleOptions { budget: 5000, ..opts() };
        let err = sample_conditional(&f1(), 100.0, 10_000, Condition::RightSided, NormScale::PlusPhi, SeedStream::new(1), &o)
            .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { cap: 5000, .. }));
    }

    #[test]
    fn symmetric_sign_frequency() {
        let f = empirical_sign_freq(&f1(), 50.0, 20_000, SeedStream::new(6), &opts()).unwrap();
        assert!((f.minus + f.plus - 1.0).abs() < 1e-15);
        assert!((f.plus - 0.5).abs() <= 3.0 * f.std_error(0.5));
    }

    #[test]
    fn one_sided_support_gives_all_plus() {
        let spec = ModelSpec {
            angular: crate::model::AngularSpec::Uniform { lo: 0.0, hi: 1.0 },
            sidedness: Sidedness::OneSidedRight,
            ..ModelSpec::fixture_f1()
        };
        let m = build_builtin_model(&spec).unwrap();
        assert!(empirical_sign_freq(&m, 50.0, 100, SeedStream::new(1), &opts()).is_err());
        let s = sample_conditional(&m, 50.0, 2000, Condition::Unrestricted, NormScale::PlusPhi, SeedStream::new(1), &opts())
            .unwrap();
        assert_eq!(sign_frequency(&m, &s.raw).plus, 1.0);
    }

    #[test]
    fn seifert_identity_is_exact() {
        let m = with_v(ShapeVSpec::SeifertLinear { rho: 0.4 });
        let case = CorollaryCase::build(CorollaryKind::Seifert, &case_params_from_model(&m).unwrap()).unwrap();
        let s = sample_conditional(&m, 100.0, 2000, Condition::RightSided, NormScale::PlusPhi, SeedStream::new(7), &opts())
            .unwrap();
        let phi = s.normalizers.phi_plus().unwrap();
        let biv = bivariate_normalized(&m, &case, &s).unwrap();
        for (&(_, t), &(_, b)) in s.raw.iter().zip(&biv) {
            assert!((b - t / phi).abs() <= 1e-12);
        }
    }

    #[test]
    fn fs_sine_second_coordinate() {
        let m = with_v(ShapeVSpec::Sine);
        let params = case_params_from_model(&m).unwrap();
        let case = CorollaryCase::build(CorollaryKind::Fs, &params).unwrap();
        let s = sample_conditional(&m, 100.0, 500, Condition::RightSided, NormScale::PlusPhi, SeedStream::new(8), &opts())
            .unwrap();
        let phi = s.normalizers.phi_plus().unwrap();
        let biv = bivariate_normalized(&m, &case, &s).unwrap();
        for (&(r, t), &(_, b)) in s.raw.iter().zip(&biv) {
            let direct = r * t.sin() / (100.0 * -phi.sin());
            assert!((b - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            assert!(b < 0.0);
        }
    }

    #[test]
    fn case_checks_reject_wrong_cases() {
        let sine = with_v(ShapeVSpec::Sine);
        let p = case_params_from_model(&sine).unwrap();
        assert!(matches!(
            check_case(&sine, &CorollaryCase::build(CorollaryKind::Seifert, &p).unwrap()),
            Err(Error::CaseMismatch(_))
        ));
        let p_dk = CorollaryParams { rho: Some(0.0), ..p };
        assert!(matches!(
            check_case(&sine, &CorollaryCase::build(CorollaryKind::DeltaGtKappa, &p_dk).unwrap()),
            Err(Error::CaseMismatch(_))
        ));
        // δ = 3 > κ = 2: ũ/ṽ diverges
        let steep = with_v(ShapeVSpec::Power { rho: 1.0, delta: 3.0, d: 1.0 });
        let ps = case_params_from_model(&steep).unwrap();
        assert!(ps.c.is_none());
        check_case(&steep, &CorollaryCase::build(CorollaryKind::DeltaGtKappa, &ps).unwrap()).unwrap();
        let fs = CorollaryCase::Fs { kappa: 2.0, delta: 3.0 };
        assert!(matches!(check_case(&steep, &fs), Err(Error::CaseMismatch(_))));
        // δ = κ: finite C = c/d
        let flat = with_v(ShapeVSpec::Power { rho: 1.0, delta: 2.0, d: 4.0 });
        let pf = case_params_from_model(&flat).unwrap();
        assert!((pf.c.unwrap() - 0.25).abs() < 1e-12);
        check_case(&flat, &CorollaryCase::build(CorollaryKind::RatioC, &pf).unwrap()).unwrap();
        let wrong_c = CorollaryCase::RatioC { kappa: 2.0, delta: 2.0, rho: 1.0, c: 3.0 };
        assert!(matches!(check_case(&flat, &wrong_c), Err(Error::CaseMismatch(_))));
    }

    #[test]
    fn missing_shape_v_is_an_error() {
        let m = f1();
        let s = sample_conditional(&m, 50.0, 10, Condition::RightSided, NormScale::PlusPhi, SeedStream::new(1), &opts())
            .unwrap();
        let case = CorollaryCase::Seifert { kappa: 2.0 };
        assert!(matches!(bivariate_normalized(&m, &case, &s), Err(Error::Precondition(_))));
    }

    #[test]
    fn theta_n_normalization() {
        let spec = ModelSpec {
            shape_u: ShapeUSpec::Power { kappa_minus: 2.0, kappa_plus: 2.0, scale: 1.0 },
            shape_v: Some(ShapeVSpec::ThetaPolynomial { theta_t0: 0.5, n: 2, theta_n_deriv: 4.0 }),
            ..ModelSpec::fixture_f1()
        };
        let m = build_builtin_model(&spec).unwrap();
        let case = CorollaryCase::build(CorollaryKind::ThetaN, &case_params_from_model(&m).unwrap()).unwrap();
        let s = sample_conditional(&m, 100.0, 500, Condition::RightSided, NormScale::PlusPhi, SeedStream::new(2), &opts())
            .unwrap();
        let phi = s.normalizers.phi_plus().unwrap();
        for (&(_, t), &(_, b)) in s.raw.iter().zip(&bivariate_normalized(&m, &case, &s).unwrap()) {
            let expected = 2.0 * (t / phi).powi(2);
            assert!((b - expected).abs() <= 1e-9 * expected.max(1.0));
        }
    }
}
