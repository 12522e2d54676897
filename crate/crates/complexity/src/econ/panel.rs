//! Declarative model specs and panel assembly: listwise-complete
//! observations, pooled min-max scaling of complexity regressors, exact
//! interaction products, and period labels for the fixed effects.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A declarative regression specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    /// Name of the dependent-variable block this model uses.
    pub depvar: String,
    /// Complexity regressor columns (one per dimension), by column name.
    #[serde(default)]
    pub dimensions: Vec<String>,
    /// Interaction sets over the dimension columns, e.g. [["ECI (trade)", "ECI (technology)"]].
    #[serde(default)]
    pub interactions: Vec<Vec<String>>,
    /// Control columns, by name.
    #[serde(default)]
    pub controls: Vec<String>,
    /// When true, complexity columns are replaced by their instrumented
    /// counterparts at panel-build time.
    #[serde(default)]
    pub instrumented: bool,
}

impl ModelSpec {
    /// Display name of an interaction column.
    pub fn interaction_name(factors: &[String]) -> String {
        factors.join(" x ")
    }

    /// All complexity term names (mains plus interactions).
    pub fn complexity_terms(&self) -> Vec<String> {
        let mut terms = self.dimensions.clone();
        terms.extend(self.interactions.iter().map(|f| Self::interaction_name(f)));
        terms
    }
}

/// One merged regression observation.
#[derive(Debug, Clone)]
pub struct PanelObservation {
    pub economy: String,
    pub period_label: String,
    pub y: f64,
    pub regressors: BTreeMap<String, f64>,
}

/// A fully assembled estimation sample.
#[derive(Debug, Clone)]
pub struct PanelDataset {
    pub spec_id: String,
    pub observations: Vec<PanelObservation>,
    /// Regressor order: dimensions, interactions, controls.
    pub regressor_names: Vec<String>,
    pub complexity_terms: Vec<String>,
    /// Sorted period labels; the first is the dummy reference.
    pub period_labels: Vec<String>,
}

impl PanelDataset {
    pub fn n_obs(&self) -> usize {
        self.observations.len()
    }

    /// The same observations with a subset of regressors (for nested models).
    pub fn subset(&self, spec_id: &str, regressors: &[String]) -> Result<PanelDataset> {
        for r in regressors {
            if !self.regressor_names.contains(r) {
                return Err(Error::Config(format!("unknown regressor `{r}` in subset")));
            }
        }
        let observations = self
            .observations
            .iter()
            .map(|o| PanelObservation {
                economy: o.economy.clone(),
                period_label: o.period_label.clone(),
                y: o.y,
                regressors: o
                    .regressors
                    .iter()
                    .filter(|(k, _)| regressors.contains(k))
                    .map(|(k, v)| (k.clone(), *v))
                    .collect(),
            })
            .collect();
        Ok(PanelDataset {
            spec_id: spec_id.to_string(),
            observations,
            regressor_names: regressors.to_vec(),
            complexity_terms: self
                .complexity_terms
                .iter()
                .filter(|t| regressors.contains(t))
                .cloned()
                .collect(),
            period_labels: self.period_labels.clone(),
        })
    }
}

/// Raw column data for panel assembly, keyed by (economy, period label).
#[derive(Debug, Clone, Default)]
pub struct ColumnSet {
    pub y: BTreeMap<(String, String), f64>,
    /// Complexity columns in the normalization handed in (typically z-scored
    /// ECI); min-max is applied over the pooled estimation sample here.
    pub complexity: BTreeMap<String, BTreeMap<(String, String), f64>>,
    pub controls: BTreeMap<String, BTreeMap<(String, String), f64>>,
}

/// Assemble the listwise-complete estimation sample for one model spec.
///
/// An (economy, period) enters only if the dependent variable, every
/// dimension column, and every control are present and finite. Complexity
/// columns are min-max scaled over the pooled surviving sample, then
/// interaction columns are formed as exact products.
pub fn build_panel(spec: &ModelSpec, columns: &ColumnSet) -> Result<PanelDataset> {
    for d in &spec.dimensions {
        if !columns.complexity.contains_key(d) {
            return Err(Error::Config(format!("missing complexity column `{d}`")));
        }
    }
    for c in &spec.controls {
        if !columns.controls.contains_key(c) {
            return Err(Error::Config(format!("missing control column `{c}`")));
        }
    }
    for factors in &spec.interactions {
        for f in factors {
            if !spec.dimensions.contains(f) {
                return Err(Error::Config(format!(
                    "interaction factor `{f}` is not an included dimension"
                )));
            }
        }
    }

    // Listwise completion over base columns.
    let mut keys: Vec<(String, String)> = columns
        .y
        .iter()
        .filter(|((_, _), v)| v.is_finite())
        .map(|(k, _)| k.clone())
        .filter(|k| {
            spec.dimensions
                .iter()
                .all(|d| columns.complexity[d].get(k).is_some_and(|v| v.is_finite()))
                && spec
                    .controls
                    .iter()
                    .all(|c| columns.controls[c].get(k).is_some_and(|v| v.is_finite()))
        })
        .collect();
    keys.sort_by(|a, b| (&a.1, &a.0).cmp(&(&b.1, &b.0)));
    if keys.is_empty() {
        return Err(Error::Degenerate(format!(
            "model `{}`: no listwise-complete observations",
            spec.id
        )));
    }

    // Pooled min-max per complexity column over the estimation sample.
    let mut scaled: BTreeMap<String, BTreeMap<(String, String), f64>> = BTreeMap::new();
    for d in &spec.dimensions {
        let col = &columns.complexity[d];
        let vals: Vec<f64> = keys.iter().map(|k| col[k]).collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            return Err(Error::Degenerate(format!(
                "complexity column `{d}` is constant over the estimation sample"
            )));
        }
        scaled.insert(
            d.clone(),
            keys.iter()
                .map(|k| (k.clone(), (col[k] - min) / (max - min)))
                .collect(),
        );
    }

    let mut regressor_names = spec.dimensions.clone();
    let interaction_names: Vec<String> = spec
        .interactions
        .iter()
        .map(|f| ModelSpec::interaction_name(f))
        .collect();
    regressor_names.extend(interaction_names.iter().cloned());
    regressor_names.extend(spec.controls.iter().cloned());

    let mut observations = Vec::with_capacity(keys.len());
    let mut labels: BTreeSet<String> = BTreeSet::new();
    for key in &keys {
        let mut regressors = BTreeMap::new();
        for d in &spec.dimensions {
            regressors.insert(d.clone(), scaled[d][key]);
        }
        for (factors, name) in spec.interactions.iter().zip(&interaction_names) {
            let product = factors.iter().map(|f| scaled[f][key]).product::<f64>();
            regressors.insert(name.clone(), product);
        }
        for c in &spec.controls {
            regressors.insert(c.clone(), columns.controls[c][key]);
        }
        labels.insert(key.1.clone());
        observations.push(PanelObservation {
            economy: key.0.clone(),
            period_label: key.1.clone(),
            y: columns.y[key],
            regressors,
        });
    }

    Ok(PanelDataset {
        spec_id: spec.id.clone(),
        observations,
        regressor_names,
        complexity_terms: spec.complexity_terms(),
        period_labels: labels.into_iter().collect(),
    })
}
