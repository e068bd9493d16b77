//! Builtin radial laws. All live on `[0, ∞)` and are in the Gumbel
//! max-domain of attraction.

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use statrs::function::erf::erfc;

use super::{RadialFamily, RadialLaw};

/// `H̄(r) = e^{-λr}`, `ψ ≡ 1/λ`.
#[derive(Debug, Clone, Copy)]
pub struct Exponential {
    pub rate: f64,
}

impl RadialLaw for Exponential {
    fn survival(&self, r: f64) -> f64 {
        if r <= 0.0 { 1.0 } else { (-self.rate * r).exp() }
    }

    fn log_survival(&self, r: f64) -> f64 {
        if r <= 0.0 { 0.0 } else { -self.rate * r }
    }

    fn aux_psi(&self, _x: f64) -> f64 {
        1.0 / self.rate
    }

    fn tail_quantile(&self, p: f64, x_floor: f64) -> f64 {
        x_floor.max(0.0) - (-p).ln_1p() / self.rate
    }

    fn family(&self) -> RadialFamily {
        RadialFamily::Exponential { rate: self.rate }
    }
}

/// `H̄(r) = exp(−r^β)`, `ψ(x) = x^{1−β}/β` (exactly `H̄/(−H̄′)`).
#[derive(Debug, Clone, Copy)]
pub struct WeibullTail {
    pub beta: f64,
}

impl RadialLaw for WeibullTail {
    fn survival(&self, r: f64) -> f64 {
        self.log_survival(r).exp()
    }

    fn log_survival(&self, r: f64) -> f64 {
        if r <= 0.0 { 0.0 } else { -r.powf(self.beta) }
    }

    fn aux_psi(&self, x: f64) -> f64 {
        x.powf(1.0 - self.beta) / self.beta
    }

    fn tail_quantile(&self, p: f64, x_floor: f64) -> f64 {
        let base = x_floor.max(0.0).powf(self.beta);
        (base - (-p).ln_1p()).powf(1.0 / self.beta).max(x_floor.max(0.0))
    }

    fn family(&self) -> RadialFamily {
        RadialFamily::WeibullTail { beta: self.beta }
    }
}

/// `R = |Z|`, `Z` standard normal; `ψ` is the exact Mills ratio `H̄/h`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfNormal;

/// ln erfc(z) for z ≥ 0, switching to the asymptotic series where erfc
/// underflows.
fn ln_erfc(z: f64) -> f64 {
    if z < 20.0 {
        erfc(z).ln()
    } else {
        let w = 1.0 / (2.0 * z * z);
        let series = 1.0 - w + 3.0 * w * w - 15.0 * w * w * w + 105.0 * w.powi(4);
        -z * z - (z * PI.sqrt()).ln() + series.ln()
    }
}

impl RadialLaw for HalfNormal {
    fn survival(&self, r: f64) -> f64 {
        if r <= 0.0 { 1.0 } else { erfc(r / SQRT_2) }
    }

    fn log_survival(&self, r: f64) -> f64 {
        if r <= 0.0 { 0.0 } else { ln_erfc(r / SQRT_2) }
    }

    fn aux_psi(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        // H̄(x)/h(x) with h(x) = √(2/π)·e^{−x²/2}
        let ln_h = (FRAC_2_SQRT_PI / SQRT_2).ln() - 0.5 * x * x;
        (self.log_survival(x) - ln_h).exp()
    }

    fn tail_quantile(&self, p: f64, x_floor: f64) -> f64 {
        let floor = x_floor.max(0.0);
        if p <= 0.0 {
            return floor;
        }
        let target = self.log_survival(floor) + (-p).ln_1p();
        // ln H̄ is concave and decreasing with slope −1/ψ, so Newton steps
        // overshoot once and then converge monotonically from the right.
        let mut r = floor;
        for _ in 0..200 {
            let step = (self.log_survival(r) - target) * self.aux_psi(r);
            let next = (r + step).max(floor);
            if (next - r).abs() <= 4.0 * f64::EPSILON * next.max(1.0) {
                return next;
            }
            r = next;
        }
        r
    }

    fn family(&self) -> RadialFamily {
        RadialFamily::HalfNormal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_psi_is_constant() {
        let e = Exponential { rate: 1.0 };
        for x in [0.5, 10.0, 1e4] {
            assert_eq!(e.aux_psi(x), 1.0);
        }
        assert_eq!(Exponential { rate: 4.0 }.aux_psi(3.0), 0.25);
    }

    #[test]
    fn weibull_psi_matches_survival_over_minus_derivative() {
        // β = 2: ψ(x) = 1/(2x)
        let w = WeibullTail { beta: 2.0 };
        for x in [0.5, 3.0, 40.0] {
            assert_relative_eq!(w.aux_psi(x), 0.5 / x, max_relative = 1e-15);
            // finite-difference oracle for H̄/(−H̄′) via ln H̄
            let h = 1e-6 * x;
            let dlog = (w.log_survival(x + h) - w.log_survival(x - h)) / (2.0 * h);
            assert_relative_eq!(w.aux_psi(x), -1.0 / dlog, max_relative = 1e-7);
        }
    }

    #[test]
    fn half_normal_mills_ratio() {
        let h = HalfNormal;
        assert_relative_eq!(h.aux_psi(0.0), (PI / 2.0).sqrt(), max_relative = 1e-12);
        // ψ(x) ~ 1/x
        assert_relative_eq!(h.aux_psi(200.0) * 200.0, 1.0, max_relative = 1e-4);
        for x in [0.3f64, 2.0, 15.0, 27.0, 45.0] {
            let eps = 1e-6 * x.max(1.0);
            let dlog = (h.log_survival(x + eps) - h.log_survival(x - eps)) / (2.0 * eps);
            assert_relative_eq!(h.aux_psi(x), -1.0 / dlog, max_relative = 1e-6);
        }
    }

    #[test]
    fn ln_erfc_branches_agree() {
        for z in [19.5, 19.9, 20.0] {
            let direct = erfc(z).ln();
            let w = 1.0 / (2.0 * z * z);
            let series = 1.0 - w + 3.0 * w * w - 15.0 * w * w * w + 105.0 * w.powi(4);
            let asym = -z * z - (z * PI.sqrt()).ln() + series.ln();
            assert_relative_eq!(direct, asym, max_relative = 1e-12);
        }
    }

    #[test]
    fn tail_quantiles_invert_survival() {
        let laws: [&dyn RadialLaw; 4] =
            [&Exponential { rate: 1.5 }, &WeibullTail { beta: 2.0 }, &WeibullTail { beta: 0.7 }, &HalfNormal];
        for law in laws {
            for floor in [0.0, 1.0, 7.5, 60.0] {
                for p in [0.0, 0.1, 0.5, 0.99] {
                    let r = law.tail_quantile(p, floor);
                    assert!(r >= floor);
                    let lhs = law.log_survival(r);
                    let rhs = law.log_survival(floor) + (-p).ln_1p();
                    assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{law:?} floor {floor} p {p}");
                }
            }
        }
    }
}
