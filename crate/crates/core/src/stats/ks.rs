//! Kolmogorov–Smirnov statistics with asymptotic p-values.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`, the Kolmogorov survival function.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = f64::from(k);
        let term = sign * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn p_value(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
}

/// Asymptotic critical value `c(α)/√n_eff` with `c(α) = √(−ln(α/2)/2)`;
/// `c(0.01) ≈ 1.63`.
pub fn ks_critical_value(alpha: f64, n_eff: f64) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / n_eff.sqrt()
}

fn sorted(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in KS sample".into()));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Two-sample statistic `sup |F_a − F_b|`, ties handled by stepping past
/// equal values in both samples together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("ks_two_sample needs two nonempty samples"));
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsResult { statistic: d, p_value: p_value(d, n * m / (n + m)) })
}

/// One-sample statistic `max_i max(i/n − F(x_(i)), F(x_(i)) − (i−1)/n)`.
/// `cdf` must map into `[0, 1]` and be nondecreasing along the sample.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("ks_one_sample needs a nonempty sample"));
    }
    let xs = sorted(sample)?;
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    let mut prev = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Domain(format!("cdf({x}) = {f} outside [0, 1]")));
        }
        if f < prev {
            return Err(Error::Domain(format!("cdf decreases at {x}")));
        }
        prev = f;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult { statistic: d, p_value: p_value(d, n) })
}
