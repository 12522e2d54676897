//! Ordinary least squares with period fixed effects and classical
//! (homoskedastic) standard errors.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::econ::dist::t_two_sided;
use crate::econ::panel::PanelDataset;
use crate::error::{Error, Result};

/// Relative singular-value cutoff for rank decisions.
const RANK_TOL: f64 = 1e-10;
/// A fit whose RSS is this far below TSS is treated as an interpolation.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub spec_id: String,
    /// Coefficients for `intercept`, each regressor, and `period:<label>` dummies.
    pub coefficients: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    pub p_values: BTreeMap<String, f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n_obs: usize,
    pub n_params: usize,
    pub rss: f64,
    pub tss: f64,
    pub residuals: Vec<f64>,
    /// (economy, period label) identity of each observation, for nesting checks.
    pub obs_keys: Vec<(String, String)>,
    pub regressor_names: Vec<String>,
    pub complexity_terms: Vec<String>,
    /// True when the model interpolates the data (RSS ~ 0); SEs are then 0.
    pub degenerate: bool,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients.get(name).copied()
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.p_values.get(name).copied()
    }
}

/// Build the design matrix: intercept, regressors in panel order, then
/// period dummies for every label but the first.
pub(crate) fn design(panel: &PanelDataset) -> (DMatrix<f64>, DVector<f64>, Vec<String>) {
    let n = panel.n_obs();
    let dummy_labels: Vec<&String> = panel.period_labels.iter().skip(1).collect();
    let mut names = vec!["intercept".to_string()];
    names.extend(panel.regressor_names.iter().cloned());
    names.extend(dummy_labels.iter().map(|l| format!("period:{l}")));

    let k = names.len();
    let mut x = DMatrix::zeros(n, k);
    let mut y = DVector::zeros(n);
    for (i, obs) in panel.observations.iter().enumerate() {
        x[(i, 0)] = 1.0;
        for (j, name) in panel.regressor_names.iter().enumerate() {
            x[(i, j + 1)] = obs.regressors[name];
        }
        for (j, label) in dummy_labels.iter().enumerate() {
            x[(i, 1 + panel.regressor_names.len() + j)] =
                if &obs.period_label == *label { 1.0 } else { 0.0 };
        }
        y[i] = obs.y;
    }
    (x, y, names)
}

/// Identify (approximately) collinear columns by sequential projection.
fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut culprits = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).clone_owned();
        let norm0 = col.norm();
        let mut resid = col;
        for b in &basis {
            let proj = b.dot(&resid);
            resid -= b * proj;
        }
        if resid.norm() <= RANK_TOL.sqrt() * norm0.max(1.0) {
            culprits.push(names[j].clone());
        } else {
            let norm = resid.norm();
            basis.push(resid / norm);
        }
    }
    culprits
}

/// Least-squares fit of a panel with period fixed effects.
///
/// Coefficients solve the normal equations through an SVD; standard errors
/// are sqrt(s^2 diag((X'X)^-1)) with s^2 = RSS/(n-k); p-values are two-sided
/// Student-t with n-k degrees of freedom.
pub fn ols(panel: &PanelDataset) -> Result<RegressionFit> {
    let (x, y, names) = design(panel);
    let n = x.nrows();
    let k = x.ncols();
    if n <= k {
        return Err(Error::Estimation(format!(
            "model `{}`: {n} observations for {k} parameters",
            panel.spec_id
        )));
    }

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > RANK_TOL * smax)
        .count();
    if rank < k {
        return Err(Error::RankDeficient {
            columns: collinear_columns(&x, &names),
        });
    }

    let beta = svd
        .solve(&y, RANK_TOL * smax)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let fitted = &x * &beta;
    let resid = &y - &fitted;
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    if tss <= 0.0 {
        return Err(Error::Degenerate(format!(
            "model `{}`: dependent variable is constant",
            panel.spec_id
        )));
    }
    let r_squared = 1.0 - rss / tss;
    let dof = (n - k) as f64;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / dof;

    let degenerate = rss <= DEGENERATE_TOL * tss;
    let s2 = rss / dof;

    // diag((X'X)^-1) via the SVD: sum_j V[i,j]^2 / sigma_j^2.
    let v_t = svd.v_t.as_ref().expect("computed above");
    let mut coefficients = BTreeMap::new();
    let mut std_errors = BTreeMap::new();
    let mut p_values = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        let mut xtx_inv_ii = 0.0;
        for j in 0..k {
            let s = svd.singular_values[j];
            xtx_inv_ii += (v_t[(j, i)] / s).powi(2);
        }
        let b = beta[i];
        let se = if degenerate { 0.0 } else { (s2 * xtx_inv_ii).sqrt() };
        let p = if se > 0.0 {
            t_two_sided(b / se, dof)
        } else if b.abs() > 0.0 {
            0.0
        } else {
            1.0
        };
        coefficients.insert(name.clone(), b);
        std_errors.insert(name.clone(), se);
        p_values.insert(name.clone(), p);
    }

    Ok(RegressionFit {
        spec_id: panel.spec_id.clone(),
        coefficients,
        std_errors,
        p_values,
        r_squared,
        adj_r_squared,
        n_obs: n,
        n_params: k,
        rss,
        tss,
        residuals: resid.iter().copied().collect(),
        obs_keys: panel
            .observations
            .iter()
            .map(|o| (o.economy.clone(), o.period_label.clone()))
            .collect(),
        regressor_names: panel.regressor_names.clone(),
        complexity_terms: panel.complexity_terms.clone(),
        degenerate,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::econ::panel::PanelObservation;

    pub(crate) fn panel_from(
        rows: &[(&str, &str, f64, &[(&str, f64)])],
        regressors: &[&str],
    ) -> PanelDataset {
        let observations: Vec<PanelObservation> = rows
            .iter()
            .map(|(e, p, y, regs)| PanelObservation {
                economy: e.to_string(),
                period_label: p.to_string(),
                y: *y,
                regressors: regs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            })
            .collect();
        let mut labels: Vec<String> = observations
            .iter()
            .map(|o| o.period_label.clone())
            .collect();
        labels.sort();
        labels.dedup();
        PanelDataset {
            spec_id: "test".into(),
            observations,
            regressor_names: regressors.iter().map(|s| s.to_string()).collect(),
            complexity_terms: vec![],
            period_labels: labels,
        }
    }

    #[test]
    fn exact_line_is_interpolated() {
        let rows: Vec<(&str, &str, f64, &[(&str, f64)])> = vec![
            ("A", "P", 3.0, &[("x", 1.0)]),
            ("B", "P", 5.0, &[("x", 2.0)]),
            ("C", "P", 7.0, &[("x", 3.0)]),
            ("D", "P", 9.0, &[("x", 4.0)]),
        ];
        let fit = ols(&panel_from(&rows, &["x"])).unwrap();
        assert!((fit.coefficient("intercept").unwrap() - 1.0).abs() < 1e-10);
        assert!((fit.coefficient("x").unwrap() - 2.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.degenerate);
        assert_eq!(fit.std_errors["x"], 0.0);
    }

    #[test]
    fn regressing_y_on_itself() {
        let rows: Vec<(&str, &str, f64, &[(&str, f64)])> = vec![
            ("A", "P", 1.0, &[("x", 1.0)]),
            ("B", "P", 4.0, &[("x", 4.0)]),
            ("C", "P", 2.5, &[("x", 2.5)]),
        ];
        let fit = ols(&panel_from(&rows, &["x"])).unwrap();
        assert!(fit.coefficient("intercept").unwrap().abs() < 1e-10);
        assert!((fit.coefficient("x").unwrap() - 1.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_column_is_rank_error() {
        let rows: Vec<(&str, &str, f64, &[(&str, f64)])> = vec![
            ("A", "P", 1.0, &[("x", 1.0), ("x2", 1.0)]),
            ("B", "P", 2.0, &[("x", 2.0), ("x2", 2.0)]),
            ("C", "P", 3.0, &[("x", 3.0), ("x2", 3.0)]),
            ("D", "P", 4.5, &[("x", 4.0), ("x2", 4.0)]),
        ];
        match ols(&panel_from(&rows, &["x", "x2"])) {
            Err(Error::RankDeficient { columns }) => {
                assert!(columns.contains(&"x2".to_string()), "{columns:?}");
            }
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn too_few_observations_is_error() {
        let rows: Vec<(&str, &str, f64, &[(&str, f64)])> = vec![
            ("A", "P", 1.0, &[("x", 1.0)]),
            ("B", "P", 2.0, &[("x", 2.0)]),
        ];
        assert!(matches!(
            ols(&panel_from(&rows, &["x"])),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn fit_invariant_to_dummy_reference() {
        // Same data, but period labels renamed so the sorted-first (reference)
        // period changes. Fitted quantities must agree.
        let mk = |p1: &'static str, p2: &'static str| {
            let rows: Vec<(&str, &str, f64, &[(&str, f64)])> = vec![
                ("A", p1, 1.2, &[("x", 0.1)]),
                ("B", p1, 2.3, &[("x", 0.9)]),
                ("C", p1, 1.9, &[("x", 0.5)]),
                ("A", p2, 2.2, &[("x", 0.2)]),
                ("B", p2, 3.6, &[("x", 1.1)]),
                ("C", p2, 2.7, &[("x", 0.4)]),
            ];
            panel_from(&rows, &["x"])
        };
        let f1 = ols(&mk("P1", "P2")).unwrap();
        let f2 = ols(&mk("Z9", "P2")).unwrap(); // reference flips to P2
        assert!((f1.r_squared - f2.r_squared).abs() < 1e-9);
        assert!((f1.rss - f2.rss).abs() < 1e-9);
        assert!((f1.coefficient("x").unwrap() - f2.coefficient("x").unwrap()).abs() < 1e-9);
    }
}
