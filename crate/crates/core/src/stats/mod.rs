//! Distances between Monte Carlo samples and limit laws.

pub mod chi2;
pub mod ks;
pub mod report;

pub use chi2::{cell_masses, chi_square_2d, Binning, ChiSquare};
pub use ks::{ks_critical_value, ks_one_sample, ks_two_sample, KsResult};
pub use report::{convergence_report, ConvergenceReport, ConvergenceRow, ReportCase, ReportOptions};

use crate::error::{Error, Result};

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::EmptyInput("pearson needs two samples of equal length >= 2"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Domain("pearson: constant sample".into()));
    }
    Ok(sab / (saa * sbb).sqrt())
}
