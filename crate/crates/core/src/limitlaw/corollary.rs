//! Bivariate limit laws as pushforwards of the one-sided limit `(𝒭, 𝒯)`.
//!
//! | case | condition on the model | limit of the normalized `(X, Y)` |
//! |---|---|---|
//! | [`CorollaryCase::Fs`] | `ρ·ũ/ṽ → 0` | `(𝒭 − 𝒯^κ, −𝒯^δ)` |
//! | [`CorollaryCase::DeltaGtKappa`] | `ũ/ṽ → ∞` | `(𝒭 − 𝒯^κ, ρ𝒭)` |
//! | [`CorollaryCase::RatioC`] | `ũ/ṽ → C` finite | `(𝒭 − 𝒯^κ, Cρ𝒭 − 𝒯^δ)` |
//! | [`CorollaryCase::Seifert`] | `v = (t − t₀ + ρ)·u` | `(𝒭 − 𝒯^κ, 𝒯)` |
//! | [`CorollaryCase::ThetaN`] | `v = θ·u`, `θ⁽ᵏ⁾(t₀) = 0` for `0 < k < n` | `(𝒭 − 𝒯^κ, 𝒯ⁿθ⁽ⁿ⁾(t₀)/n!)` |

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorollaryKind {
    Fs,
    DeltaGtKappa,
    RatioC,
    Seifert,
    ThetaN,
}

impl CorollaryKind {
    pub const ALL: [CorollaryKind; 5] =
        [Self::Fs, Self::DeltaGtKappa, Self::RatioC, Self::Seifert, Self::ThetaN];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fs => "fs",
            Self::DeltaGtKappa => "delta_gt_kappa",
            Self::RatioC => "ratio_c",
            Self::Seifert => "seifert",
            Self::ThetaN => "theta_n",
        }
    }
}

impl fmt::Display for CorollaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorollaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownFamily { component: "corollary case", name: s.to_string() })
    }
}

/// Loose parameter bag from which a [`CorollaryCase`] is assembled.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CorollaryParams {
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub n: Option<u32>,
    pub theta_n_deriv: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorollaryCase {
    Fs { kappa: f64, delta: f64 },
    DeltaGtKappa { kappa: f64, rho: f64 },
    RatioC { kappa: f64, delta: f64, rho: f64, c: f64 },
    Seifert { kappa: f64 },
    ThetaN { kappa: f64, n: u32, theta_n_deriv: f64 },
}

fn need<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::MissingParameter(format!("case.{key}")))
}

impl CorollaryCase {
    pub fn build(kind: CorollaryKind, p: &CorollaryParams) -> Result<Self> {
        let kappa = need(p.kappa, "kappa")?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid("case.kappa", "must be > 0"));
        }
        let case = match kind {
            CorollaryKind::Fs => Self::Fs { kappa, delta: need(p.delta, "delta")? },
            CorollaryKind::DeltaGtKappa => Self::DeltaGtKappa { kappa, rho: need(p.rho, "rho")? },
            CorollaryKind::RatioC => Self::RatioC {
                kappa,
                delta: need(p.delta, "delta")?,
                rho: need(p.rho, "rho")?,
                c: need(p.c, "c")?,
            },
            CorollaryKind::Seifert => Self::Seifert { kappa },
            CorollaryKind::ThetaN => {
                Self::ThetaN { kappa, n: need(p.n, "n")?, theta_n_deriv: need(p.theta_n_deriv, "theta_n_deriv")? }
            }
        };
        case.check()?;
        Ok(case)
    }

    fn check(&self) -> Result<()> {
        match *self {
            Self::Fs { delta, .. } | Self::RatioC { delta, .. } if !(delta.is_finite() && delta >= 0.0) => {
                Err(Error::invalid("case.delta", "must be finite and >= 0"))
            }
            Self::RatioC { c, .. } if !c.is_finite() => Err(Error::invalid("case.c", "must be finite")),
            Self::ThetaN { n: 0, .. } => Err(Error::invalid("case.n", "must be >= 1")),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> CorollaryKind {
        match self {
            Self::Fs { .. } => CorollaryKind::Fs,
            Self::DeltaGtKappa { .. } => CorollaryKind::DeltaGtKappa,
            Self::RatioC { .. } => CorollaryKind::RatioC,
            Self::Seifert { .. } => CorollaryKind::Seifert,
            Self::ThetaN { .. } => CorollaryKind::ThetaN,
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            Self::Fs { kappa, .. }
            | Self::DeltaGtKappa { kappa, .. }
            | Self::RatioC { kappa, .. }
            | Self::Seifert { kappa }
            | Self::ThetaN { kappa, .. } => kappa,
        }
    }

    /// Image of one limit draw `(r, t)`.
    pub fn map(&self, r: f64, t: f64) -> (f64, f64) {
        let first = r - t.powf(self.kappa());
        let second = match *self {
            Self::Fs { delta, .. } => -t.powf(delta),
            Self::DeltaGtKappa { rho, .. } => rho * r,
            Self::RatioC { delta, rho, c, .. } => c * rho * r - t.powf(delta),
            Self::Seifert { .. } => t,
            Self::ThetaN { n, theta_n_deriv, .. } => {
                let fact: f64 = (1..=n).map(f64::from).product();
                t.powi(n as i32) * theta_n_deriv / fact
            }
        };
        (first, second)
    }
}

pub fn pushforward_corollary(case: &CorollaryCase, pairs: &[(f64, f64)]) -> Vec<(f64, f64)> {
    pairs.iter().map(|&(r, t)| case.map(r, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitlaw::LimitLawOneSided;
    use crate::rng::SeedStream;
    use proptest::prelude::*;

    fn params() -> CorollaryParams {
        CorollaryParams {
            kappa: Some(2.0),
            delta: Some(1.0),
            rho: Some(0.7),
            c: Some(0.0),
            n: Some(2),
            theta_n_deriv: Some(4.0),
        }
    }

    #[test]
    fn worked_maps() {
        let fs = CorollaryCase::build(CorollaryKind::Fs, &params()).unwrap();
        assert_eq!(fs.map(1.0, 0.5), (0.75, -0.5));
        let th = CorollaryCase::build(CorollaryKind::ThetaN, &params()).unwrap();
        assert_eq!(th.map(1.0, 0.5), (0.75, 0.5));
        let se = CorollaryCase::build(CorollaryKind::Seifert, &params()).unwrap();
        for (r, t) in [(1.0, 0.5), (3.3, 1.2), (0.01, 0.09)] {
            assert_eq!(se.map(r, t).1, t);
        }
        let dk = CorollaryCase::build(CorollaryKind::DeltaGtKappa, &params()).unwrap();
        assert_eq!(dk.map(2.0, 0.5), (1.75, 1.4));
    }

    #[test]
    fn missing_parameter_is_named() {
        let p = CorollaryParams { delta: None, ..params() };
        let err = CorollaryCase::build(CorollaryKind::Fs, &p).unwrap_err();
        assert!(matches!(&err, Error::MissingParameter(k) if k == "case.delta"));
        let p = CorollaryParams { c: None, ..params() };
        assert!(err_names(CorollaryCase::build(CorollaryKind::RatioC, &p), "case.c"));
        let p = CorollaryParams { theta_n_deriv: None, ..params() };
        assert!(err_names(CorollaryCase::build(CorollaryKind::ThetaN, &p), "case.theta_n_deriv"));
        let p = CorollaryParams { c: Some(f64::INFINITY), ..params() };
        assert!(CorollaryCase::build(CorollaryKind::RatioC, &p).is_err());
    }

    fn err_names(r: Result<CorollaryCase>, key: &str) -> bool {
        matches!(r, Err(Error::MissingParameter(k)) if k == key)
    }

    #[test]
    fn ratio_zero_is_fs() {
        let draws = LimitLawOneSided::new(2.0, 0.0).unwrap().sample(1000, SeedStream::new(1));
        let fs = CorollaryCase::build(CorollaryKind::Fs, &params()).unwrap();
        let rc = CorollaryCase::build(CorollaryKind::RatioC, &params()).unwrap();
        assert_eq!(pushforward_corollary(&fs, &draws), pushforward_corollary(&rc, &draws));
    }

    #[test]
    fn ratio_over_c_tends_to_delta_gt_kappa() {
        let dk = CorollaryCase::build(CorollaryKind::DeltaGtKappa, &params()).unwrap();
        for (r, t) in [(1.0, 0.5), (4.0, 1.9), (0.2, 0.1)] {
            let mut prev = f64::INFINITY;
            for c in [1e3, 1e6] {
                let rc = CorollaryCase::build(CorollaryKind::RatioC, &CorollaryParams { c: Some(c), ..params() }).unwrap();
                let err = (rc.map(r, t).1 / c - dk.map(r, t).1).abs();
                // error is exactly t^δ/C
                assert!(err <= 1.000001 * t / c);
                assert!(err < prev);
                prev = err;
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in CorollaryKind::ALL {
            assert_eq!(k.name().parse::<CorollaryKind>().unwrap(), k);
        }
        assert!("nope".parse::<CorollaryKind>().is_err());
    }

    proptest! {
        #[test]
        fn first_coordinate_positive(kappa in 0.3f64..4.0, tau in -0.9f64..3.0, seed in any::<u64>()) {
            let draws = LimitLawOneSided::new(kappa, tau).unwrap().sample(64, SeedStream::new(seed));
            let p = CorollaryParams { kappa: Some(kappa), ..params() };
            for kind in CorollaryKind::ALL {
                let case = CorollaryCase::build(kind, &p).unwrap();
                for (a, _) in pushforward_corollary(&case, &draws) {
                    prop_assert!(a > 0.0);
                }
            }
        }
    }
}
