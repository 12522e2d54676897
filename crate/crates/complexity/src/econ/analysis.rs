//! Post-estimation diagnostics: the composite complexity index implied by a
//! fitted model, and correlations between regressors conditional on controls.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::econ::ols::RegressionFit;
use crate::econ::panel::PanelDataset;
use crate::error::{Error, Result};

/// Composite complexity score per observation: the fitted model's complexity
/// contribution sum_t beta_t * x_t, keyed by (economy, period label).
pub fn composite_eci(
    fit: &RegressionFit,
    panel: &PanelDataset,
) -> Result<BTreeMap<(String, String), f64>> {
    if fit.complexity_terms.is_empty() {
        return Err(Error::Estimation(format!(
            "model `{}` has no complexity terms to combine",
            fit.spec_id
        )));
    }
    let mut betas = Vec::with_capacity(fit.complexity_terms.len());
    for term in &fit.complexity_terms {
        let b = fit.coefficient(term).ok_or_else(|| {
            Error::Estimation(format!(
                "model `{}` lacks a coefficient for `{term}`",
                fit.spec_id
            ))
        })?;
        betas.push((term, b));
    }
    let mut out = BTreeMap::new();
    for obs in &panel.observations {
        let mut score = 0.0;
        for (term, b) in &betas {
            let x = obs.regressors.get(*term).ok_or_else(|| {
                Error::Estimation(format!(
                    "observation ({}, {}) lacks regressor `{term}`",
                    obs.economy, obs.period_label
                ))
            })?;
            score += b * x;
        }
        out.insert((obs.economy.clone(), obs.period_label.clone()), score);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ConditionalCorrelation {
    pub var_a: String,
    pub var_b: String,
    pub controls: Vec<String>,
    pub correlation: f64,
    pub n_obs: usize,
}

fn residualize(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let beta = svd
        .solve(y, 1e-10 * smax)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(y - x * beta)
}

/// Pearson correlation between `var_a` and `var_b` after partialling out the
/// intercept, the named controls, and the period fixed effects from both
/// (Frisch-Waugh residual-on-residual correlation).
pub fn conditional_correlation(
    panel: &PanelDataset,
    var_a: &str,
    var_b: &str,
    controls: &[String],
) -> Result<ConditionalCorrelation> {
    for v in [var_a, var_b].iter().copied().chain(controls.iter().map(|s| s.as_str())) {
        if !panel.regressor_names.iter().any(|r| r == v) {
            return Err(Error::Config(format!("unknown panel column `{v}`")));
        }
    }
    if var_a == var_b || controls.iter().any(|c| c == var_a || c == var_b) {
        return Err(Error::Config(
            "conditional correlation variables and controls must be distinct".into(),
        ));
    }

    let n = panel.n_obs();
    let dummy_labels: Vec<&String> = panel.period_labels.iter().skip(1).collect();
    let k = 1 + controls.len() + dummy_labels.len();
    if n <= k + 1 {
        return Err(Error::Estimation(format!(
            "conditional correlation: {n} observations for {k} partialled columns"
        )));
    }
    let mut x = DMatrix::zeros(n, k);
    let mut a = DVector::zeros(n);
    let mut b = DVector::zeros(n);
    for (i, obs) in panel.observations.iter().enumerate() {
        x[(i, 0)] = 1.0;
        for (j, c) in controls.iter().enumerate() {
            x[(i, 1 + j)] = obs.regressors[c];
        }
        for (j, label) in dummy_labels.iter().enumerate() {
            x[(i, 1 + controls.len() + j)] = if &obs.period_label == *label { 1.0 } else { 0.0 };
        }
        a[i] = obs.regressors[var_a];
        b[i] = obs.regressors[var_b];
    }

    let ra = residualize(&a, &x)?;
    let rb = residualize(&b, &x)?;
    let na = ra.norm();
    let nb = rb.norm();
    if na <= 1e-12 || nb <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "`{}` is fully explained by the controls",
            if na <= 1e-12 { var_a } else { var_b }
        )));
    }
    Ok(ConditionalCorrelation {
        var_a: var_a.to_string(),
        var_b: var_b.to_string(),
        controls: controls.to_vec(),
        correlation: ra.dot(&rb) / (na * nb),
        n_obs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::ols::ols;
    use crate::econ::panel::PanelObservation;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel_with(
        rows: Vec<(String, String, f64, Vec<(&str, f64)>)>,
        regressors: &[&str],
        complexity: &[&str],
    ) -> PanelDataset {
        let observations: Vec<PanelObservation> = rows
            .into_iter()
            .map(|(e, p, y, regs)| PanelObservation {
                economy: e,
                period_label: p,
                y,
                regressors: regs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            })
            .collect();
        let mut labels: Vec<String> = observations.iter().map(|o| o.period_label.clone()).collect();
        labels.sort();
        labels.dedup();
        PanelDataset {
            spec_id: "test".into(),
            observations,
            regressor_names: regressors.iter().map(|s| s.to_string()).collect(),
            complexity_terms: complexity.iter().map(|s| s.to_string()).collect(),
            period_labels: labels,
        }
    }

    #[test]
    fn composite_is_coefficient_weighted_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<(String, String, f64, Vec<(&str, f64)>)> = (0..20)
            .map(|i| {
                let x1: f64 = rng.gen();
                let x2: f64 = rng.gen();
                let y = 2.0 * x1 - 1.0 * x2 + 0.1 * (rng.gen::<f64>() - 0.5);
                (format!("E{i:02}"), "P".to_string(), y, vec![("x1", x1), ("x2", x2)])
            })
            .collect();
        let panel = panel_with(rows, &["x1", "x2"], &["x1", "x2"]);
        let fit = ols(&panel).unwrap();
        let composite = composite_eci(&fit, &panel).unwrap();
        let obs = &panel.observations[0];
        let expect = fit.coefficient("x1").unwrap() * obs.regressors["x1"]
            + fit.coefficient("x2").unwrap() * obs.regressors["x2"];
        let got = composite[&(obs.economy.clone(), obs.period_label.clone())];
        assert!((got - expect).abs() < 1e-12);
        assert_eq!(composite.len(), panel.n_obs());
    }

    #[test]
    fn conditional_correlation_removes_common_driver() {
        // a and b are both linear in the control z plus independent noise:
        // raw correlation is strong, conditional correlation near zero.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<(String, String, f64, Vec<(&str, f64)>)> = (0..200)
            .map(|i| {
                let z: f64 = rng.gen();
                let a = 3.0 * z + 0.1 * (rng.gen::<f64>() - 0.5);
                let b = -2.0 * z + 0.1 * (rng.gen::<f64>() - 0.5);
                (format!("E{i:03}"), "P".to_string(), 0.0, vec![("a", a), ("b", b), ("z", z)])
            })
            .collect();
        let panel = panel_with(rows, &["a", "b", "z"], &[]);
        let raw = conditional_correlation(&panel, "a", "b", &[]).unwrap();
        let cond = conditional_correlation(&panel, "a", "b", &["z".to_string()]).unwrap();
        assert!(raw.correlation < -0.9);
        assert!(cond.correlation.abs() < 0.2);
    }

    #[test]
    fn perfect_conditional_correlation_is_one() {
        let rows: Vec<(String, String, f64, Vec<(&str, f64)>)> = (0..10)
            .map(|i| {
                let a = i as f64;
                (format!("E{i:02}"), "P".to_string(), 0.0, vec![("a", a), ("b", 2.0 * a + 1.0)])
            })
            .collect();
        let panel = panel_with(rows, &["a", "b"], &[]);
        let c = conditional_correlation(&panel, "a", "b", &[]).unwrap();
        assert!((c.correlation - 1.0).abs() < 1e-10);
    }

    #[test]
    fn control_explained_variable_is_degenerate() {
        let rows: Vec<(String, String, f64, Vec<(&str, f64)>)> = (0..10)
            .map(|i| {
                let z = i as f64;
                (format!("E{i:02}"), "P".to_string(), 0.0, vec![("a", 2.0 * z), ("b", z * z), ("z", z)])
            })
            .collect();
        let panel = panel_with(rows, &["a", "b", "z"], &[]);
        assert!(matches!(
            conditional_correlation(&panel, "a", "b", &["z".to_string()]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn no_complexity_terms_is_error() {
        let rows: Vec<(String, String, f64, Vec<(&str, f64)>)> = (0..6)
            .map(|i| {
                let x = i as f64;
                (format!("E{i:02}"), "P".to_string(), x, vec![("x", x)])
            })
            .collect();
        let panel = panel_with(rows, &["x"], &[]);
        let fit = ols(&panel).unwrap();
        assert!(composite_eci(&fit, &panel).is_err());
    }
}
