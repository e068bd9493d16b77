//! Gamma variates (Marsaglia–Tsang) for the exact limit samplers.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::rng::StreamRng;

/// One Gamma(`shape`, 1) draw, exact for every `shape > 0`. Shapes below 1
/// use the boost `G_a = G_{a+1}·U^{1/a}`, taken in log space so tiny values
/// do not round to zero prematurely.
pub fn sample_gamma(shape: f64, rng: &mut StreamRng) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let g = marsaglia_tsang(shape + 1.0, rng);
        let u: f64 = rng.sample(Open01);
        return (g.ln() + u.ln() / shape).exp();
    }
    marsaglia_tsang(shape, rng)
}

fn marsaglia_tsang(shape: f64, rng: &mut StreamRng) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.sample(Open01);
        if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
            return d * v;
        }
    }
}

pub fn sample_exp1(rng: &mut StreamRng) -> f64 {
    rng.sample(Exp1)
}
