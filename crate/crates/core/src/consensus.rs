//! Matrix form of the pairwise traversing-time updates.
//!
//! A meeting on link `i` (robots `i`, `i + 1`) maps `e` to `P_i e` with
//!
//! ```text
//! P_i  = I - eps_i V^-1 L_i          eps_i = v_i v_{i+1} / (v_i + v_{i+1})
//! P~_i = V^1/2 P_i V^-1/2 = I - L~_i  L~_i  = eps_i V^-1/2 L_i V^-1/2
//! ```
//!
//! where `L_i` is the unweighted Laplacian of the single link. `P~_i` is
//! symmetric and similar to `P_i`, so its spectrum is computed with a
//! symmetric eigensolver. This module works in `f64` only.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matrices of one link `(i, i + 1)`, 0-based.
#[derive(Debug, Clone)]
pub struct LinkMatrices {
    pub link: usize,
    pub eps: f64,
    pub p: DMatrix<f64>,
    pub p_tilde: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub laplacian_tilde: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct ConsensusMatrices {
    pub n: usize,
    pub speeds: Vec<f64>,
    pub v: DMatrix<f64>,
    pub links: Vec<LinkMatrices>,
}

pub fn build_matrices(speeds: &[f64]) -> Result<ConsensusMatrices> {
    let n = speeds.len();
    if n < 2 {
        return Err(Error::TooFewRobots(n));
    }
    if let Some(i) = speeds.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::InvalidRobot {
            id: i as u32 + 1,
            reason: format!("speed {} is not positive", speeds[i]),
        });
    }
    let v = DMatrix::from_diagonal(&DVector::from_column_slice(speeds));
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(n, speeds.iter().map(|s| 1.0 / s.sqrt())));
    let links = (0..n - 1)
        .map(|i| {
            let (vi, vj) = (speeds[i], speeds[i + 1]);
            let eps = vi * vj / (vi + vj);
            let mut lap = DMatrix::zeros(n, n);
            lap[(i, i)] = 1.0;
            lap[(i + 1, i + 1)] = 1.0;
            lap[(i, i + 1)] = -1.0;
            lap[(i + 1, i)] = -1.0;

            let mut p = DMatrix::identity(n, n);
            p[(i, i)] = 1.0 - eps / vi;
            p[(i + 1, i + 1)] = 1.0 - eps / vj;
            p[(i, i + 1)] = eps / vi;
            p[(i + 1, i)] = eps / vj;

            let lap_tilde = &inv_sqrt * &lap * &inv_sqrt * eps;
            let p_tilde = DMatrix::identity(n, n) - &lap_tilde;
            LinkMatrices {
                link: i,
                eps,
                p,
                p_tilde,
                laplacian: lap,
                laplacian_tilde: lap_tilde,
            }
        })
        .collect();
    Ok(ConsensusMatrices {
        n,
        speeds: speeds.to_vec(),
        v,
        links,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpectrum {
    pub link: usize,
    /// Eigenvalues of `P~_i` (equal to those of `P_i`), ascending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub links: Vec<LinkSpectrum>,
    /// Largest eigenvalue modulus of `P~_1 ... P~_{n-1}`.
    pub product_spectral_radius: f64,
    pub product_spectral_norm: f64,
    /// Some power of the link product is entrywise positive.
    pub primitive: bool,
    pub violations: Vec<String>,
}

impl SpectrumReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Ordered product `P~_1 P~_2 ... P~_{n-1}`.
pub fn link_product(m: &ConsensusMatrices) -> DMatrix<f64> {
    m.links
        .iter()
        .fold(DMatrix::identity(m.n, m.n), |acc, l| acc * &l.p_tilde)
}

pub fn check_spectrum(m: &ConsensusMatrices, tol: f64) -> SpectrumReport {
    let mut violations = Vec::new();
    let mut links = Vec::with_capacity(m.links.len());
    for l in &m.links {
        let asym = (&l.p_tilde - l.p_tilde.transpose()).amax();
        if asym > tol {
            violations.push(format!("link {}: P~ not symmetric (max asymmetry {asym:e})", l.link + 1));
        }
        for (row, sum) in [l.link, l.link + 1].iter().map(|&r| (r, l.p.row(r).sum())) {
            if (sum - 1.0).abs() > tol {
                violations.push(format!("link {}: row {} of P sums to {sum}", l.link + 1, row + 1));
            }
        }
        let ev = symmetric_eigenvalues(&l.p_tilde);
        if let Some(bad) = ev.iter().find(|&&x| x <= -1.0 || x > 1.0 + tol) {
            violations.push(format!("link {}: eigenvalue {bad} outside (-1, 1]", l.link + 1));
        }
        let lap_min = symmetric_eigenvalues(&l.laplacian_tilde)[0];
        if lap_min < -tol {
            violations.push(format!("link {}: L~ has negative eigenvalue {lap_min}", l.link + 1));
        }
        links.push(LinkSpectrum {
            link: l.link,
            eigenvalues: ev,
        });
    }

    let product = link_product(m);
    let product_spectral_radius = product
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let product_spectral_norm = product.clone().svd(false, false).singular_values.max();
    if product_spectral_norm > 1.0 + tol {
        violations.push(format!("product spectral norm {product_spectral_norm} exceeds 1"));
    }
    let power = (1..m.n).fold(product.clone(), |acc, _| acc * &product);
    let primitive = power.iter().all(|&x| x > 0.0);
    if !primitive {
        violations.push("link product is not primitive".into());
    }
    SpectrumReport {
        n: m.n,
        links,
        product_spectral_radius,
        product_spectral_norm,
        primitive,
        violations,
    }
}

/// Applies `P_link` to `e` in place, touching only the two affected rows.
pub fn apply_link(m: &ConsensusMatrices, e: &mut [f64], link: usize) {
    let p = &m.links[link].p;
    let (i, j) = (link, link + 1);
    let (ei, ej) = (e[i], e[j]);
    e[i] = p[(i, i)] * ei + p[(i, j)] * ej;
    e[j] = p[(j, i)] * ei + p[(j, j)] * ej;
}

/// Applies the links in order and returns the final vector.
pub fn iterate_consensus<I>(m: &ConsensusMatrices, e0: &[f64], links: I) -> Vec<f64>
where
    I: IntoIterator<Item = usize>,
{
    let mut e = e0.to_vec();
    for link in links {
        apply_link(m, &mut e, link);
    }
    e
}

/// Speed-weighted mean `Σ v_j e_j / Σ v_j`, the common limit of every entry.
pub fn weighted_fixed_point(speeds: &[f64], e0: &[f64]) -> f64 {
    let num: f64 = speeds.iter().zip(e0).map(|(v, e)| v * e).sum();
    num / speeds.iter().sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusRun {
    pub target: f64,
    pub sweeps: usize,
    pub max_error: f64,
    pub e: Vec<f64>,
}

/// Round-robin sweeps over links `1..n-1` until every entry is within
/// `rtol * max(|target|, 1)` of the weighted mean.
pub fn round_robin_to_fixed_point(
    m: &ConsensusMatrices,
    e0: &[f64],
    rtol: f64,
    max_sweeps: usize,
) -> Result<ConsensusRun> {
    let target = weighted_fixed_point(&m.speeds, e0);
    let tol = rtol * target.abs().max(1.0);
    let err = |e: &[f64]| e.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
    let mut e = e0.to_vec();
    let mut max_error = err(&e);
    let mut sweeps = 0;
    while max_error > tol {
        if sweeps == max_sweeps {
            return Err(Error::NotConverged {
                deviation: max_error,
                tolerance: tol,
            });
        }
        for link in 0..m.n - 1 {
            apply_link(m, &mut e, link);
        }
        sweeps += 1;
        max_error = err(&e);
    }
    Ok(ConsensusRun {
        target,
        sweeps,
        max_error,
        e,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub spectrum: SpectrumReport,
    pub fixed_point: f64,
    pub fixed_point_error: f64,
    pub sweeps: usize,
}

/// Spectral checks plus a round-robin run from `e0`, bundled for JSON output.
pub fn consensus_report(speeds: &[f64], e0: &[f64], rtol: f64, max_sweeps: usize) -> Result<ConsensusReport> {
    let m = build_matrices(speeds)?;
    if e0.len() != m.n {
        return Err(Error::Invalid(format!("{} speeds but {} initial values", m.n, e0.len())));
    }
    let spectrum = check_spectrum(&m, 1e-9);
    let run = round_robin_to_fixed_point(&m, e0, rtol, max_sweeps)?;
    Ok(ConsensusReport {
        spectrum,
        fixed_point: run.target,
        fixed_point_error: run.max_error,
        sweeps: run.sweeps,
    })
}
