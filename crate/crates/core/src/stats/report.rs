//! Convergence tables: Monte Carlo against the exact limit along an `x` grid.

use crate::asymptotics::{mixture_limits, tail_asymptotic_condition_scaled};
use crate::error::{Error, Result};
use crate::limitlaw::{pushforward_corollary, CorollaryCase, LimitLawOneSided, LimitLawTwoSided, Scaling};
use crate::model::{PolarModel, Sign};
use crate::montecarlo::{bivariate_normalized, sample_conditional, Condition, NormScale, SampleOptions};
use crate::oracle::tail_probability_scaled;
use crate::rng::SeedStream;
use crate::stats::chi2::{cell_masses, chi_square_2d, Binning};
use crate::stats::ks::ks_two_sample;

/// What is compared with its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReportCase {
    /// `((R − x)/ψ, (T − t₀)/φ₊)` given `X > x, T > t₀` against the one-sided
    /// limit with `(κ₊, τ₊)`.
    RightSided,
    /// `((R − x)/ψ, (T − t₀)/scale)` given `X > x` against the two-sided limit.
    Unrestricted(Scaling),
    /// Normalized `(X, Y)` against the pushforward of one-sided limit draws.
    Corollary(CorollaryCase),
}

impl ReportCase {
    fn condition(&self) -> Condition {
        match self {
            ReportCase::Unrestricted(_) => Condition::Unrestricted,
            _ => Condition::RightSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub sampling: SampleOptions,
    /// Tolerated increase between successive KS distances.
    pub noise: f64,
    /// Grid `bins × bins` for the joint χ² (0 disables it).
    pub chi2_bins: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { sampling: SampleOptions::default(), noise: 0.01, chi2_bins: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub x: f64,
    pub n: usize,
    /// KS distance of the first coordinate.
    pub ks_r: f64,
    /// KS distance of the second coordinate.
    pub ks_t: f64,
    /// χ² p-value of the joint law; `None` when not applicable.
    pub chi2_p: Option<f64>,
    pub acceptance_rate: f64,
    /// Quadrature tail probability over its first-order asymptotic.
    pub tail_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub ks_r_decreasing: bool,
    pub ks_t_decreasing: bool,
    /// `|tail_ratio − 1|` strictly decreasing.
    pub tail_ratio_improving: bool,
}

impl ConvergenceReport {
    pub fn last(&self) -> &ConvergenceRow {
        self.rows.last().expect("report has at least one row")
    }
}

/// One row per `x`: two-sample KS of each coordinate against `n` exact limit
/// draws, the joint χ² p-value, the acceptance rate and the tail ratio.
/// Row `i` uses substreams `2i` (Monte Carlo) and `2i + 1` (limit draws).
pub fn convergence_report(
    model: &PolarModel,
    case: ReportCase,
    x_grid: &[f64],
    n: usize,
    seed: SeedStream,
    opts: &ReportOptions,
) -> Result<ConvergenceReport> {
    if x_grid.is_empty() {
        return Err(Error::EmptyInput("x grid"));
    }
    if !x_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Precondition("x grid must be strictly increasing".into()));
    }
    let limit = LimitPair::new(model, &case)?;
    let condition = case.condition();
    let scale = match case {
        ReportCase::Unrestricted(Scaling::PerSignNorming) => NormScale::PerSign,
        ReportCase::Unrestricted(Scaling::StarNorming) => NormScale::Star,
        _ => NormScale::PlusPhi,
    };
    let (binning, masses) = if opts.chi2_bins > 0 && !matches!(case, ReportCase::Corollary(_)) {
        let (b, m) = limit.binning(opts.chi2_bins)?;
        (Some(b), m)
    } else {
        (None, Vec::new())
    };
    let mut rows = Vec::with_capacity(x_grid.len());
    for (i, &x) in x_grid.iter().enumerate() {
        let row = (|| -> Result<ConvergenceRow> {
            let mc = sample_conditional(model, x, n, condition, scale, seed.substream(2 * i as u64), &opts.sampling)?;
            let draws = limit.sample(n, seed.substream(2 * i as u64 + 1));
            let pairs = match case {
                ReportCase::Corollary(c) => bivariate_normalized(model, &c, &mc)?,
                _ => mc.normalized.clone(),
            };
            let first: (Vec<f64>, Vec<f64>) = (pairs.iter().map(|p| p.0).collect(), draws.iter().map(|p| p.0).collect());
            let second: (Vec<f64>, Vec<f64>) = (pairs.iter().map(|p| p.1).collect(), draws.iter().map(|p| p.1).collect());
            let ks_r = ks_two_sample(&first.0, &first.1)?.statistic;
            let ks_t = ks_two_sample(&second.0, &second.1)?.statistic;
            let chi2_p = match &binning {
                Some(b) => Some(chi_square_2d(&pairs, &masses, b, 1.0)?.p_value),
                None => None,
            };
            let quad = tail_probability_scaled(model, x, condition)?.value;
            let asym = tail_asymptotic_condition_scaled(model, x, condition)?;
            Ok(ConvergenceRow {
                x,
                n,
                ks_r,
                ks_t,
                chi2_p,
                acceptance_rate: mc.acceptance.acceptance_rate,
                tail_ratio: quad / asym,
            })
        })()
        .map_err(Error::at(x))?;
        rows.push(row);
    }
    let noisy_decrease = |f: fn(&ConvergenceRow) -> f64| rows.windows(2).all(|w| f(&w[1]) <= f(&w[0]) + opts.noise);
    let ks_r_decreasing = noisy_decrease(|r| r.ks_r);
    let ks_t_decreasing = noisy_decrease(|r| r.ks_t);
    let tail_ratio_improving = rows.windows(2).all(|w| (w[1].tail_ratio - 1.0).abs() < (w[0].tail_ratio - 1.0).abs());
    Ok(ConvergenceReport { rows, ks_r_decreasing, ks_t_decreasing, tail_ratio_improving })
}

/// The exact limit a report compares against.
enum LimitPair {
    One(LimitLawOneSided),
    Two(LimitLawTwoSided),
    Pushed(LimitLawOneSided, CorollaryCase),
}

impl LimitPair {
    fn new(model: &PolarModel, case: &ReportCase) -> Result<Self> {
        let one = || LimitLawOneSided::new(model.shape_u.kappa(Sign::Plus), model.angular.tau(Sign::Plus));
        Ok(match *case {
            ReportCase::RightSided => LimitPair::One(one()?),
            ReportCase::Corollary(c) => LimitPair::Pushed(one()?, c),
            ReportCase::Unrestricted(scaling) => {
                if !model.is_two_sided() {
                    return Err(Error::Precondition("unrestricted report needs a two-sided model".into()));
                }
                let lim = mixture_limits(model)?;
                let kappa = [model.shape_u.kappa(Sign::Minus), model.shape_u.kappa(Sign::Plus)];
                let tau = [model.angular.tau(Sign::Minus), model.angular.tau(Sign::Plus)];
                LimitPair::Two(LimitLawTwoSided::new(kappa, tau, lim.p, lim.q, scaling)?)
            }
        })
    }

    fn sample(&self, n: usize, stream: SeedStream) -> Vec<(f64, f64)> {
        match self {
            LimitPair::One(l) => l.sample(n, stream),
            LimitPair::Two(l) => l.sample(n, stream),
            LimitPair::Pushed(l, c) => pushforward_corollary(c, &l.sample(n, stream)),
        }
    }

    /// `bins × bins` grid on `[0, 12] × t-range` and its cell masses.
    fn binning(&self, bins: usize) -> Result<(Binning, Vec<f64>)> {
        const R_MAX: f64 = 12.0;
        match self {
            LimitPair::One(l) => {
                let b = Binning::uniform((0.0, R_MAX), bins, (0.0, R_MAX.powf(1.0 / l.kappa)), bins);
                let m = cell_masses(|r, t| l.density(r, t), |r| crate::limitlaw::one_sided_support(l.kappa, r), &b)?;
                Ok((b, m))
            }
            LimitPair::Two(l) => {
                let edge = |i: usize| {
                    let scale = match l.scaling {
                        Scaling::PerSignNorming => 1.0,
                        Scaling::StarNorming => l.q[i],
                    };
                    scale * R_MAX.powf(1.0 / l.kappa[i])
                };
                let b = Binning::uniform((0.0, R_MAX), bins, (-edge(0).max(1e-12), edge(1).max(1e-12)), bins);
                let m = cell_masses(|r, t| l.density(r, t), |r| l.support(r), &b)?;
                Ok((b, m))
            }
            LimitPair::Pushed(..) => Err(Error::Precondition("no joint density for pushforward laws".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin::{build_builtin_model, ModelSpec};

    fn f1() -> PolarModel {
        build_builtin_model(&ModelSpec::fixture_f1()).unwrap()
    }

    fn small() -> ReportOptions {
        ReportOptions { chi2_bins: 8, ..ReportOptions::default() }
    }

    #[test]
    fn single_row_is_vacuously_monotone() {
        let r = convergence_report(&f1(), ReportCase::RightSided, &[50.0], 2000, SeedStream::new(1), &small()).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.ks_r_decreasing && r.ks_t_decreasing && r.tail_ratio_improving);
        let row = r.last();
        assert!((0.0..=1.0).contains(&row.ks_r) && (0.0..=1.0).contains(&row.ks_t));
        assert!(row.chi2_p.unwrap() >= 0.0);
    }

    #[test]
    fn infeasible_row_is_named() {
        let err = convergence_report(&f1(), ReportCase::RightSided, &[1.0, 50.0], 100, SeedStream::new(1), &small())
            .unwrap_err();
        assert!(matches!(err, Error::AtThreshold { x, .. } if x == 1.0));
        assert!(err.is_numeric());
    }

    #[test]
    fn deterministic() {
        let run = || convergence_report(&f1(), ReportCase::RightSided, &[20.0, 60.0], 1000, SeedStream::new(3), &small()).unwrap();
        assert_eq!(run(), run());
    }
}
