//! Pearson χ² against cell masses of a 2-D density.

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::oracle::quadrature::{integrate, Tolerance};

pub const MIN_EXPECTED: f64 = 5.0;

/// Rectangular grid `r_edges × t_edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    pub r_edges: Vec<f64>,
    pub t_edges: Vec<f64>,
}

impl Binning {
    pub fn uniform(r: (f64, f64), nr: usize, t: (f64, f64), nt: usize) -> Self {
        let edges = |(lo, hi): (f64, f64), n: usize| (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        Self { r_edges: edges(r, nr), t_edges: edges(t, nt) }
    }

    fn validate(&self) -> Result<()> {
        for (name, e) in [("r", &self.r_edges), ("t", &self.t_edges)] {
            if e.len() < 2 || !e.windows(2).all(|w| w[1] > w[0]) || e.iter().any(|x| !x.is_finite()) {
                return Err(Error::Binning(format!("{name} edges must be finite, strictly increasing, >= 2")));
            }
        }
        Ok(())
    }

    fn cell_of(&self, r: f64, t: f64) -> Option<usize> {
        let i = locate(&self.r_edges, r)?;
        let j = locate(&self.t_edges, t)?;
        Some(i * (self.t_edges.len() - 1) + j)
    }

    pub fn cells(&self) -> usize {
        (self.r_edges.len() - 1) * (self.t_edges.len() - 1)
    }
}

fn locate(edges: &[f64], v: f64) -> Option<usize> {
    if !(v >= edges[0] && v < edges[edges.len() - 1]) {
        return None;
    }
    Some(edges.partition_point(|e| *e <= v) - 1)
}

/// Cell masses `∫∫_cell f` in row-major `(r, t)` order. The inner `t`
/// integral runs over `cell ∩ support(r)` so support edges do not cut panels.
pub fn cell_masses<F, S>(density: F, t_support: S, binning: &Binning) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64,
    S: Fn(f64) -> Vec<(f64, f64)>,
{
    binning.validate()?;
    let tol = Tolerance::new(1e-12, 1e-9).with_max_panels(2000);
    let mut out = Vec::with_capacity(binning.cells());
    for rw in binning.r_edges.windows(2) {
        for tw in binning.t_edges.windows(2) {
            let mut failed = false;
            let res = integrate(
                |r| {
                    let mut total = 0.0;
                    for (a, b) in t_support(r) {
                        let (lo, hi) = (a.max(tw[0]), b.min(tw[1]));
                        if hi > lo {
                            let inner = integrate(|t| density(r, t), lo, hi, tol);
                            failed |= !inner.converged;
                            total += inner.value;
                        }
                    }
                    total
                },
                rw[0],
                rw[1],
                tol,
            );
            if failed || !res.converged {
                return Err(Error::NonConvergence(format!(
                    "cell mass on r in [{}, {}], t in [{}, {}]",
                    rw[0], rw[1], tw[0], tw[1]
                )));
            }
            out.push(res.value);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins entering the statistic, including the merged tail bin.
    pub bins: usize,
}

/// Pearson χ² of `pairs` against `masses` (from [`cell_masses`]). Mass not
/// covered by the grid, `total_mass − Σ masses`, and every cell expecting
/// fewer than 5 counts go to a single tail bin.
pub fn chi_square_2d(pairs: &[(f64, f64)], masses: &[f64], binning: &Binning, total_mass: f64) -> Result<ChiSquare> {
    binning.validate()?;
    if masses.len() != binning.cells() {
        return Err(Error::Binning(format!("{} masses for {} cells", masses.len(), binning.cells())));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput("chi_square_2d needs pairs"));
    }
    let covered: f64 = masses.iter().sum();
    if !(covered > 0.0) || !(total_mass > 0.0) {
        return Err(Error::Binning("zero total expected mass".into()));
    }
    let n = pairs.len() as f64;
    let mut observed = vec![0u64; masses.len()];
    let mut outside = 0u64;
    for &(r, t) in pairs {
        match binning.cell_of(r, t) {
            Some(c) => observed[c] += 1,
            None => outside += 1,
        }
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut tail_e = n * (total_mass - covered).max(0.0) / total_mass;
    let mut tail_o = outside as f64;
    for (m, o) in masses.iter().zip(&observed) {
        let e = n * m / total_mass;
        if e >= MIN_EXPECTED {
            bins.push((*o as f64, e));
        } else {
            tail_e += e;
            tail_o += *o as f64;
        }
    }
    if tail_e >= MIN_EXPECTED {
        bins.push((tail_o, tail_e));
    } else if tail_e > 0.0 || tail_o > 0.0 {
        // too small to stand alone: fold into the smallest retained bin
        match bins.iter_mut().min_by(|a, b| a.1.total_cmp(&b.1)) {
            Some(b) => {
                b.0 += tail_o;
                b.1 += tail_e;
            }
            None => bins.push((tail_o, tail_e)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::Binning(format!("only {} bin(s) with expected count >= 5", bins.len())));
    }
    let statistic: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let p_value = gamma_ur(dof as f64 / 2.0, statistic / 2.0);
    Ok(ChiSquare { statistic, dof, p_value, bins: bins.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use rand::Rng;

    fn unit_square(_: f64) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0)]
    }

    #[test]
    fn uniform_cell_masses() {
        let b = Binning::uniform((0.0, 1.0), 4, (0.0, 1.0), 5);
        let m = cell_masses(|_, _| 1.0, unit_square, &b).unwrap();
        assert_eq!(m.len(), 20);
        for v in m {
            assert!((v - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn self_sampled_pairs_rarely_rejected() {
        let b = Binning::uniform((0.0, 1.0), 10, (0.0, 1.0), 10);
        let masses = cell_masses(|r, t| 4.0 * r * t, unit_square, &b).unwrap();
        let mut low = 0;
        for seed in 0..100 {
            let mut rng = SeedStream::new(seed).rng();
            let pairs: Vec<(f64, f64)> =
                (0..5000).map(|_| (rng.random::<f64>().sqrt(), rng.random::<f64>().sqrt())).collect();
            if chi_square_2d(&pairs, &masses, &b, 1.0).unwrap().p_value <= 0.001 {
                low += 1;
            }
        }
        assert!(low <= 1, "{low} seeds with p <= 0.001");
    }

    #[test]
    fn gross_mismatch() {
        let b = Binning::uniform((0.0, 1.0), 5, (0.0, 1.0), 5);
        let masses = cell_masses(|_, _| 1.0, unit_square, &b).unwrap();
        let pairs = vec![(0.1, 0.1); 1000];
        let c = chi_square_2d(&pairs, &masses, &b, 1.0).unwrap();
        assert!(c.p_value < 1e-100);
        assert!(c.statistic >= 0.0);
    }

    #[test]
    fn zero_mass_rejected() {
        let b = Binning::uniform((0.0, 1.0), 2, (0.0, 1.0), 2);
        assert!(matches!(chi_square_2d(&[(0.5, 0.5)], &[0.0; 4], &b, 1.0), Err(Error::Binning(_))));
        let bad = Binning { r_edges: vec![0.0, 0.0], t_edges: vec![0.0, 1.0] };
        assert!(cell_masses(|_, _| 1.0, unit_square, &bad).is_err());
    }

    #[test]
    fn out_of_grid_mass_goes_to_tail() {
        // grid covers half the square; the other half must be the tail bin
        let b = Binning::uniform((0.0, 0.5), 5, (0.0, 1.0), 5);
        let masses = cell_masses(|_, _| 1.0, unit_square, &b).unwrap();
        let mut rng = SeedStream::new(1).rng();
        let pairs: Vec<(f64, f64)> = (0..4000).map(|_| (rng.random(), rng.random())).collect();
        let c = chi_square_2d(&pairs, &masses, &b, 1.0).unwrap();
        assert_eq!(c.bins, 26);
        assert!(c.p_value > 1e-4);
    }
}
