//! ECI/PCI from the second eigenvector of the normalized economy-similarity
//! matrix.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::metrics::vector::{ComplexityVector, Metric, Normalization};
use crate::specialization::SpecializationMatrix;

const ROW_SUM_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-8;
const GAP_TOL: f64 = 1e-10;

/// ECI/PCI plus eigen diagnostics.
#[derive(Debug, Clone)]
pub struct EciOutcome {
    /// Z-scored economy complexity.
    pub eci: ComplexityVector,
    /// Z-scored activity complexity.
    pub pci: ComplexityVector,
    /// The selected (second largest) eigenvalue.
    pub eigenvalue: f64,
    /// Gap between the selected eigenvalue and its nearest neighbor.
    pub gap: f64,
    /// Max-norm residual of the eigenpair on the similarity matrix.
    pub residual: f64,
}

/// The row-stochastic economy-similarity matrix
/// W[c][c'] = sum_p M_cp M_c'p / (M_c M_p).
pub fn economy_similarity(spec: &SpecializationMatrix) -> DMatrix<f64> {
    let m = &spec.entries;
    let n = m.nrows();
    let k = m.ncols();
    // W = D_c^-1 M D_p^-1 M^T
    let mut scaled = m.clone();
    for j in 0..k {
        let up = spec.col_marginals[j];
        for i in 0..n {
            scaled[(i, j)] /= up;
        }
    }
    let mut w = m * scaled.transpose();
    for i in 0..n {
        let div = spec.row_marginals[i];
        for j in 0..n {
            w[(i, j)] /= div;
        }
    }
    w
}

/// Compute ECI (economies) and PCI (activities) for one pruned
/// specialization matrix.
///
/// The similarity matrix is diagonally similar to a symmetric matrix, so the
/// spectrum is obtained through a symmetric eigendecomposition and mapped
/// back; the residual of the recovered eigenpair is then checked on the
/// similarity matrix itself. The eigenvector sign is fixed so that ECI
/// correlates non-negatively with diversity.
pub fn eci(spec: &SpecializationMatrix) -> Result<EciOutcome> {
    let n = spec.n_economies();
    let k = spec.n_activities();
    if n < 3 || k < 3 {
        return Err(Error::Degenerate(format!(
            "ECI needs at least 3 economies and 3 activities, got {n}x{k}"
        )));
    }
    if spec.row_marginals.iter().any(|&d| d < 1.0) || spec.col_marginals.iter().any(|&u| u < 1.0)
    {
        return Err(Error::Degenerate(
            "specialization matrix must be pruned (all marginals >= 1)".into(),
        ));
    }

    let w = economy_similarity(spec);
    for i in 0..n {
        let s: f64 = w.row(i).sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::Numerical(format!(
                "similarity row {i} sums to {s}, expected 1"
            )));
        }
    }

    // Symmetrize: S = D^{1/2} W D^{-1/2} with D = diag(diversity).
    let sqrt_div: Vec<f64> = spec.row_marginals.iter().map(|d| d.sqrt()).collect();
    let mut s = w.clone();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] *= sqrt_div[i] / sqrt_div[j];
        }
    }
    // Enforce exact symmetry before the decomposition.
    let s = (&s + s.transpose()) * 0.5;
    let eig = s.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambda2 = eig.eigenvalues[order[1]];
    let gap_up = eig.eigenvalues[order[0]] - lambda2;
    let gap_down = lambda2 - eig.eigenvalues[order[2]];
    let gap = gap_up.min(gap_down);
    if gap < GAP_TOL {
        return Err(Error::EigenDegeneracy { gap, tol: GAP_TOL });
    }

    // Map the symmetric eigenvector back to an eigenvector of W.
    let u = eig.eigenvectors.column(order[1]);
    let mut v = DVector::from_fn(n, |i, _| u[i] / sqrt_div[i]);

    let residual = (&w * &v - &v * lambda2).abs().max() / v.abs().max();
    if residual > RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }

    // Sign convention: diversified economies score high.
    if pearson(v.as_slice(), &spec.row_marginals) < 0.0 {
        v.neg_mut();
    }

    let raw: BTreeMap<String, f64> = spec
        .economies
        .iter()
        .cloned()
        .zip(v.iter().copied())
        .collect();
    let eci_vec = ComplexityVector::new(
        spec.dimension.clone(),
        spec.period,
        Metric::Eci,
        raw,
        Normalization::Raw,
    )
    .zscore()?;

    // PCI: one activity-side averaging pass over the converged economy ECI.
    let eci_by_row: Vec<f64> = spec
        .economies
        .iter()
        .map(|e| eci_vec.get(e).unwrap())
        .collect();
    let mut pci_raw = BTreeMap::new();
    for (j, activity) in spec.activities.iter().enumerate() {
        let mut sum = 0.0;
        for i in 0..n {
            sum += spec.entries[(i, j)] * eci_by_row[i];
        }
        pci_raw.insert(activity.clone(), sum / spec.col_marginals[j]);
    }
    let pci_vec = ComplexityVector::new(
        spec.dimension.clone(),
        spec.period,
        Metric::Pci,
        pci_raw,
        Normalization::Raw,
    )
    .zscore()?;

    Ok(EciOutcome {
        eci: eci_vec,
        pci: pci_vec,
        eigenvalue: lambda2,
        gap,
        residual,
    })
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}
