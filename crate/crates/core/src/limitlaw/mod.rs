//! Limit laws of the normalized conditional pair `((R − x)/ψ(x), (T − t₀)/φ(x))`.
//!
//! One-sided limit: density `κ/Γ((1+τ)/κ)·t^τ·e^{−r}` on `0 < t < r^{1/κ}`.
//! Exact sampler: `G ~ Gamma((1+τ)/κ)`, `𝒯 = G^{1/κ}`, `𝒭 = 𝒯^κ + E` with
//! `E ~ Exp(1)`; the marginal of `𝒯` is `∝ t^τ e^{−t^κ}` and `𝒭 − 𝒯^κ` is
//! an independent standard exponential.

pub mod corollary;
pub mod sampler;

pub use corollary::{pushforward_corollary, CorollaryCase, CorollaryKind, CorollaryParams};
pub use sampler::sample_gamma;

use crate::error::{Error, Result};
use crate::model::Sign;
use crate::oracle::gamma::gamma_eval;
use crate::rng::{SeedStream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitLawOneSided {
    pub kappa: f64,
    pub tau: f64,
    /// `κ/Γ((1+τ)/κ)`.
    pub norm_const: f64,
}

impl LimitLawOneSided {
    pub fn new(kappa: f64, tau: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid("kappa", "must be > 0"));
        }
        if !(tau.is_finite() && tau > -1.0) {
            return Err(Error::invalid("tau", "must be > -1"));
        }
        let norm_const = kappa / gamma_eval((1.0 + tau) / kappa)?;
        Ok(Self { kappa, tau, norm_const })
    }

    /// Gamma shape of `𝒯^κ`.
    pub fn gamma_shape(&self) -> f64 {
        (1.0 + self.tau) / self.kappa
    }

    pub fn density(&self, r: f64, t: f64) -> f64 {
        if t > 0.0 && r > 0.0 && t < r.powf(1.0 / self.kappa) {
            self.norm_const * t.powf(self.tau) * (-r).exp()
        } else {
            0.0
        }
    }

    /// One exact draw `(𝒭, 𝒯)` with `0 < 𝒯 < 𝒭^{1/κ}` and `𝒭 − 𝒯^κ > 0`
    /// in floating point.
    pub fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        let t = loop {
            let g = sample_gamma(self.gamma_shape(), rng);
            let t = g.powf(1.0 / self.kappa);
            if t > 0.0 && t.is_finite() {
                break t;
            }
        };
        let tk = t.powf(self.kappa);
        loop {
            let r = tk + sampler::sample_exp1(rng);
            if r - tk > 0.0 && t < r.powf(1.0 / self.kappa) {
                return (r, t);
            }
        }
    }

    pub fn sample(&self, n: usize, stream: SeedStream) -> Vec<(f64, f64)> {
        let mut rng = stream.rng();
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }
}

/// `t`-intervals of the one-sided support at radius `r`.
pub fn one_sided_support(kappa: f64, r: f64) -> Vec<(f64, f64)> {
    if r > 0.0 { vec![(0.0, r.powf(1.0 / kappa))] } else { Vec::new() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignLaw {
    pub prob_minus: f64,
    pub prob_plus: f64,
}

impl SignLaw {
    pub fn prob(&self, side: Sign) -> f64 {
        match side {
            Sign::Minus => self.prob_minus,
            Sign::Plus => self.prob_plus,
        }
    }
}

fn check_pair(name: &str, w: [f64; 2]) -> Result<()> {
    if w.iter().any(|v| !(0.0..=1.0).contains(v)) || (w[0] + w[1] - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(name, format!("must be probabilities summing to 1, got {w:?}")));
    }
    Ok(())
}

/// `P(𝒮 = σ) ∝ (p_σ/κ_σ)·Γ((1+τ_σ)/κ_σ)`. Arrays are indexed by [`Sign::index`].
pub fn sign_probability(kappa: [f64; 2], tau: [f64; 2], p: [f64; 2]) -> Result<SignLaw> {
    check_pair("p", p)?;
    let mut w = [0.0; 2];
    for side in Sign::BOTH {
        let i = side.index();
        if !(kappa[i].is_finite() && kappa[i] > 0.0) {
            return Err(Error::invalid(format!("kappa_{side}"), "must be > 0"));
        }
        if !(tau[i].is_finite() && tau[i] > -1.0) {
            return Err(Error::invalid(format!("tau_{side}"), "must be > -1"));
        }
        w[i] = p[i] / kappa[i] * gamma_eval((1.0 + tau[i]) / kappa[i])?;
    }
    let prob_plus = w[1] / (w[0] + w[1]);
    Ok(SignLaw { prob_minus: 1.0 - prob_plus, prob_plus })
}

/// How the angular coordinate is normed in the two-sided limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// `(T − t₀)/φ_S(x)`: limit `(𝒭, 𝒮·𝒯_𝒮)`.
    PerSignNorming,
    /// `(T − t₀)/φ*(x)`: limit `(𝒭, q_𝒮·𝒮·𝒯_𝒮)`.
    StarNorming,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitLawTwoSided {
    pub kappa: [f64; 2],
    pub tau: [f64; 2],
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub sign_law: SignLaw,
    pub scaling: Scaling,
    sides: [LimitLawOneSided; 2],
    /// `Σ_σ (p_σ/κ_σ)Γ((1+τ_σ)/κ_σ)`.
    normalizer: f64,
}

impl LimitLawTwoSided {
    pub fn new(kappa: [f64; 2], tau: [f64; 2], p: [f64; 2], q: [f64; 2], scaling: Scaling) -> Result<Self> {
        check_pair("q", q)?;
        let sign_law = sign_probability(kappa, tau, p)?;
        let sides = [LimitLawOneSided::new(kappa[0], tau[0])?, LimitLawOneSided::new(kappa[1], tau[1])?];
        let normalizer = (0..2).map(|i| p[i] / sides[i].norm_const).sum();
        Ok(Self { kappa, tau, p, q, sign_law, scaling, sides, normalizer })
    }

    pub fn side_law(&self, side: Sign) -> &LimitLawOneSided {
        &self.sides[side.index()]
    }

    /// Density of `(𝒭, 𝒮·𝒯_𝒮)`, the per-sign normed limit.
    pub fn density_per_sign(&self, r: f64, t: f64) -> f64 {
        let side = Sign::of(t);
        let i = side.index();
        let a = t.abs();
        if side.factor() * t > 0.0 && r > 0.0 && a.powf(self.kappa[i]) < r {
            a.powf(self.tau[i]) * (-r).exp() * self.p[i] / self.normalizer
        } else {
            0.0
        }
    }

    /// Density under the configured scaling. With star norming the side with
    /// `q_σ = 0` collapses to an atom at `t = 0`, which has no density.
    pub fn density(&self, r: f64, t: f64) -> f64 {
        match self.scaling {
            Scaling::PerSignNorming => self.density_per_sign(r, t),
            Scaling::StarNorming => {
                let q = self.q[Sign::of(t).index()];
                if q == 0.0 { 0.0 } else { self.density_per_sign(r, t / q) / q }
            }
        }
    }

    /// `t`-intervals carrying density at radius `r`.
    pub fn support(&self, r: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if r <= 0.0 {
            return out;
        }
        for side in Sign::BOTH {
            let i = side.index();
            let scale = match self.scaling {
                Scaling::PerSignNorming => 1.0,
                Scaling::StarNorming => self.q[i],
            };
            if self.p[i] == 0.0 || scale == 0.0 {
                continue;
            }
            let edge = scale * r.powf(1.0 / self.kappa[i]);
            out.push(match side {
                Sign::Minus => (-edge, 0.0),
                Sign::Plus => (0.0, edge),
            });
        }
        out
    }

    /// Draws `𝒮`, then `(𝒭, 𝒯_𝒮)` from the `𝒮`-side one-sided law.
    pub fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        use rand::Rng;
        let side = if rng.random::<f64>() < self.sign_law.prob_plus { Sign::Plus } else { Sign::Minus };
        let (r, t) = self.sides[side.index()].draw(rng);
        let scale = match self.scaling {
            Scaling::PerSignNorming => 1.0,
            Scaling::StarNorming => self.q[side.index()],
        };
        (r, scale * side.factor() * t)
    }

    pub fn sample(&self, n: usize, stream: SeedStream) -> Vec<(f64, f64)> {
        let mut rng = stream.rng();
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }
}
