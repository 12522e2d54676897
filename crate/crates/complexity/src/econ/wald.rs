//! Wald F test for nested least-squares models.

use crate::econ::dist::f_survival;
use crate::econ::ols::RegressionFit;
use crate::error::{Error, Result};

/// RSS below this fraction of TSS makes the F statistic meaningless; the
/// result is then capped and flagged.
const NEAR_ZERO_RSS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WaldResult {
    pub f_statistic: f64,
    pub p_value: f64,
    /// Number of restrictions (regressors dropped in the restricted model).
    pub restrictions: usize,
    pub denominator_dof: f64,
    /// True when the unrestricted RSS is numerically zero and the statistic
    /// was capped rather than computed.
    pub capped: bool,
}

/// F = ((RSS_r - RSS_u)/q) / (RSS_u/(n-k_u)) for restricted model nested in
/// the unrestricted one; both fits must use the same observations.
pub fn wald_f(restricted: &RegressionFit, unrestricted: &RegressionFit) -> Result<WaldResult> {
    if restricted.obs_keys != unrestricted.obs_keys {
        return Err(Error::Estimation(format!(
            "Wald test `{}` vs `{}`: estimation samples differ",
            restricted.spec_id, unrestricted.spec_id
        )));
    }
    let extra: Vec<&String> = unrestricted
        .regressor_names
        .iter()
        .filter(|r| !restricted.regressor_names.contains(r))
        .collect();
    let missing: Vec<&String> = restricted
        .regressor_names
        .iter()
        .filter(|r| !unrestricted.regressor_names.contains(r))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Estimation(format!(
            "Wald test: restricted model `{}` has regressors absent from `{}`: {missing:?}",
            restricted.spec_id, unrestricted.spec_id
        )));
    }
    let q = extra.len();
    if q == 0 {
        // Identical regressor sets: zero restrictions, trivially accepted.
        return Ok(WaldResult {
            f_statistic: 0.0,
            p_value: 1.0,
            restrictions: 0,
            denominator_dof: (unrestricted.n_obs - unrestricted.n_params) as f64,
            capped: false,
        });
    }

    let dof = (unrestricted.n_obs - unrestricted.n_params) as f64;
    if dof <= 0.0 {
        return Err(Error::Estimation(
            "Wald test: unrestricted model has no residual degrees of freedom".into(),
        ));
    }
    if unrestricted.rss <= NEAR_ZERO_RSS * unrestricted.tss {
        return Ok(WaldResult {
            f_statistic: f64::INFINITY,
            p_value: 0.0,
            restrictions: q,
            denominator_dof: dof,
            capped: true,
        });
    }
    let f = ((restricted.rss - unrestricted.rss) / q as f64) / (unrestricted.rss / dof);
    let f = f.max(0.0); // guard tiny negative rounding
    Ok(WaldResult {
        f_statistic: f,
        p_value: f_survival(f, q as f64, dof),
        restrictions: q,
        denominator_dof: dof,
        capped: false,
    })
}
