//! Selection among candidate multidimensional models against a baseline.

use serde::Serialize;

use crate::econ::ols::RegressionFit;
use crate::econ::wald::wald_f;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub spec_id: String,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub wald_f: f64,
    pub wald_p: f64,
    /// (term, coefficient, p-value) for every complexity term in the model.
    pub complexity_terms: Vec<(String, f64, f64)>,
    pub eligible: bool,
    /// Empty when eligible; otherwise why the candidate was excluded.
    pub exclusion_reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub baseline_id: String,
    /// Spec id of the winner; the baseline id when no candidate qualifies.
    pub selected_id: String,
    pub alpha: f64,
    pub candidates: Vec<CandidateReport>,
}

impl SelectionReport {
    pub fn selected(&self) -> Option<&CandidateReport> {
        self.candidates.iter().find(|c| c.spec_id == self.selected_id)
    }
}

/// Pick the candidate with the highest R^2 among those that (a) improve
/// significantly on the baseline by a Wald F test at level `alpha` and
/// (b) have every complexity coefficient individually significant at
/// `alpha`. Falls back to the baseline when no candidate qualifies.
///
/// All fits must share the same estimation sample, and the baseline's
/// regressors must be nested in every candidate's.
pub fn select_multidimensional_model(
    baseline: &RegressionFit,
    candidates: &[RegressionFit],
    alpha: f64,
) -> Result<SelectionReport> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Config(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    if candidates.is_empty() {
        return Err(Error::Config("no candidate models supplied".into()));
    }

    let mut reports = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let wald = wald_f(baseline, cand)?;
        let mut terms = Vec::new();
        let mut reasons: Vec<String> = Vec::new();
        for term in &cand.complexity_terms {
            let b = cand.coefficient(term).ok_or_else(|| {
                Error::Estimation(format!(
                    "model `{}` lacks a coefficient for complexity term `{term}`",
                    cand.spec_id
                ))
            })?;
            let p = cand.p_value(term).expect("present with coefficient");
            if p >= alpha {
                reasons.push(format!("`{term}` insignificant (p = {p:.4})"));
            }
            terms.push((term.clone(), b, p));
        }
        if terms.is_empty() {
            reasons.push("no complexity terms".into());
        }
        if wald.p_value >= alpha {
            reasons.push(format!(
                "no significant improvement over baseline (Wald p = {:.4})",
                wald.p_value
            ));
        }
        reports.push(CandidateReport {
            spec_id: cand.spec_id.clone(),
            r_squared: cand.r_squared,
            adj_r_squared: cand.adj_r_squared,
            wald_f: wald.f_statistic,
            wald_p: wald.p_value,
            complexity_terms: terms,
            eligible: reasons.is_empty(),
            exclusion_reason: reasons.join("; "),
        });
    }

    // Highest R^2 among the eligible; ties break by candidate order.
    let selected_id = reports
        .iter()
        .filter(|r| r.eligible)
        .max_by(|a, b| a.r_squared.total_cmp(&b.r_squared))
        .map(|r| r.spec_id.clone())
        .unwrap_or_else(|| baseline.spec_id.clone());

    Ok(SelectionReport {
        baseline_id: baseline.spec_id.clone(),
        selected_id,
        alpha,
        candidates: reports,
    })
}
