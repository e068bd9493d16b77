//! Builtin angular laws.

use rand::Rng;

use super::{AngularLaw, Sign};
use crate::rng::StreamRng;

/// Uniform on `[lo, hi]`, centred (for the model) at `t0`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
    pub t0: f64,
}

impl AngularLaw for Uniform {
    fn density(&self, t: f64) -> f64 {
        if t >= self.lo && t <= self.hi { 1.0 / (self.hi - self.lo) } else { 0.0 }
    }

    fn t0(&self) -> f64 {
        self.t0
    }

    fn tau(&self, _side: Sign) -> f64 {
        0.0
    }

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        self.lo + (self.hi - self.lo) * rng.random::<f64>()
    }

    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn tilde_scale(&self, _side: Sign) -> Option<f64> {
        Some(1.0 / (self.hi - self.lo))
    }

    fn name(&self) -> &'static str {
        "uniform"
    }
}

/// Density proportional to `|t − t0|^{τ_σ}` on each side of `t0`, with mass
/// `weight` on the right and `1 − weight` on the left, supported on
/// `[t0 − w, t0 + w]`. The symmetric law is `τ₋ = τ₊`, `weight = 1/2`.
#[derive(Debug, Clone, Copy)]
pub struct PowerAngular {
    pub tau_minus: f64,
    pub tau_plus: f64,
    pub weight: f64,
    pub half_width: f64,
    pub t0: f64,
}

impl PowerAngular {
    pub fn symmetric(tau: f64, half_width: f64, t0: f64) -> Self {
        Self { tau_minus: tau, tau_plus: tau, weight: 0.5, half_width, t0 }
    }

    fn side_mass(&self, side: Sign) -> f64 {
        match side {
            Sign::Minus => 1.0 - self.weight,
            Sign::Plus => self.weight,
        }
    }

    fn side_tau(&self, side: Sign) -> f64 {
        match side {
            Sign::Minus => self.tau_minus,
            Sign::Plus => self.tau_plus,
        }
    }

    fn coefficient(&self, side: Sign) -> f64 {
        let tau = self.side_tau(side);
        self.side_mass(side) * (1.0 + tau) / self.half_width.powf(1.0 + tau)
    }
}

impl AngularLaw for PowerAngular {
    fn density(&self, t: f64) -> f64 {
        let s = t - self.t0;
        if s.abs() > self.half_width {
            return 0.0;
        }
        let side = Sign::of(s);
        let tau = self.side_tau(side);
        if s == 0.0 {
            // open-support convention at the peak/pole
            return if tau == 0.0 { self.coefficient(side) } else { 0.0 };
        }
        self.coefficient(side) * s.abs().powf(tau)
    }

    fn t0(&self) -> f64 {
        self.t0
    }

    fn tau(&self, side: Sign) -> f64 {
        self.side_tau(side)
    }

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        let side = if rng.random::<f64>() < self.weight { Sign::Plus } else { Sign::Minus };
        let u: f64 = rng.random();
        // |s| = w·U^{1/(1+τ)} inverts the one-sided CDF (|s|/w)^{1+τ}.
        let mag = self.half_width * u.powf(1.0 / (1.0 + self.side_tau(side)));
        self.t0 + side.factor() * mag
    }

    fn support(&self) -> (f64, f64) {
        (self.t0 - self.half_width, self.t0 + self.half_width)
    }

    fn tilde_scale(&self, side: Sign) -> Option<f64> {
        Some(self.coefficient(side))
    }

    fn name(&self) -> &'static str {
        if self.tau_minus == self.tau_plus && self.weight == 0.5 {
            "symmetric_power"
        } else {
            "asymmetric_power"
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::quadrature::{graded_points, integrate_breakpoints, Tolerance};
    use crate::rng::SeedStream;

    #[test]
    fn power_density_normalised() {
        for law in [
            PowerAngular::symmetric(0.0, 1.0, 0.0),
            PowerAngular::symmetric(1.0, 0.5, 0.3),
            PowerAngular { tau_minus: -0.5, tau_plus: 2.0, weight: 0.3, half_width: 2.0, t0: 0.0 },
            PowerAngular { tau_minus: 0.5, tau_plus: 2.0, weight: 0.3, half_width: 2.0, t0: -1.0 },
        ] {
            let (lo, hi) = law.support();
            let pts = graded_points(lo, law.t0, hi, 0.5, 40);
            let r = integrate_breakpoints(|t| law.density(t), &pts, Tolerance::new(0.0, 1e-12));
            assert!((r.value - 1.0).abs() < 1e-9, "{law:?}: {}", r.value);
        }
    }

    #[test]
    fn power_sampler_side_mass_and_moment() {
        let law = PowerAngular { tau_minus: 0.0, tau_plus: 1.0, weight: 0.3, half_width: 1.0, t0: 0.0 };
        let mut rng = SeedStream::new(7).rng();
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        let plus: Vec<f64> = draws.iter().copied().filter(|t| *t >= 0.0).collect();
        let frac = plus.len() as f64 / n as f64;
        assert!((frac - 0.3).abs() < 4.0 * (0.3 * 0.7 / n as f64).sqrt());
        // right side density 2s on (0,1): E[s] = 2/3, sd = sqrt(1/18)
        let mean = plus.iter().sum::<f64>() / plus.len() as f64;
        assert!((mean - 2.0 / 3.0).abs() < 4.0 * (1.0 / 18.0 / plus.len() as f64).sqrt());
    }

    #[test]
    fn uniform_basics() {
        let u = Uniform { lo: -1.0, hi: 1.0, t0: 0.0 };
        assert_eq!(u.density(0.3), 0.5);
        assert_eq!(u.density(1.5), 0.0);
        assert_eq!(u.g_tilde(0.2), 0.5);
        let mut rng = SeedStream::new(1).rng();
        assert!((0..1000).map(|_| u.sample(&mut rng)).all(|t| (-1.0..1.0).contains(&t)));
    }
}
