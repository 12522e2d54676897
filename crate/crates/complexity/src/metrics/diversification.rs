//! Concentration and intensity measures computed from raw output shares.

use std::collections::BTreeMap;

use log::warn;

use crate::error::{Error, Result};
use crate::ingest::{AuxTable, OutputPanel};
use crate::metrics::vector::{ComplexityVector, Metric, Normalization};

fn shares_by_economy(panel: &OutputPanel, period: i32) -> BTreeMap<String, Vec<f64>> {
    let mut by_economy: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in panel.for_year(period) {
        by_economy.entry(r.economy.clone()).or_default().push(r.value);
    }
    by_economy
}

/// Herfindahl-Hirschman index: sum of squared activity shares per economy.
pub fn hhi(panel: &OutputPanel, period: i32) -> Result<ComplexityVector> {
    concentration(panel, period, Metric::Hhi, |shares| {
        shares.iter().map(|s| s * s).sum()
    })
}

/// Shannon entropy of activity shares (natural log, 0 log 0 = 0).
pub fn entropy(panel: &OutputPanel, period: i32) -> Result<ComplexityVector> {
    concentration(panel, period, Metric::Entropy, |shares| {
        -shares
            .iter()
            .filter(|s| **s > 0.0)
            .map(|s| s * s.ln())
            .sum::<f64>()
    })
}

fn concentration(
    panel: &OutputPanel,
    period: i32,
    metric: Metric,
    f: impl Fn(&[f64]) -> f64,
) -> Result<ComplexityVector> {
    let mut scores = BTreeMap::new();
    for (economy, values) in shares_by_economy(panel, period) {
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            warn!("{metric}: economy {economy} has zero total output in {period}; dropped");
            continue;
        }
        let shares: Vec<f64> = values.iter().map(|v| v / total).collect();
        scores.insert(economy, f(&shares));
    }
    if scores.is_empty() {
        return Err(Error::Degenerate(format!(
            "no economy with positive output in period {period}"
        )));
    }
    Ok(ComplexityVector::new(
        panel.dimension.clone(),
        period,
        metric,
        scores,
        Normalization::Raw,
    ))
}

/// Production intensity: natural log of total output per capita.
pub fn intensity(panel: &OutputPanel, aux: &AuxTable, period: i32) -> Result<ComplexityVector> {
    let mut scores = BTreeMap::new();
    for (economy, values) in shares_by_economy(panel, period) {
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            warn!("intensity: economy {economy} has zero output in {period}; dropped");
            continue;
        }
        let Some(row) = aux.get(&economy, period) else {
            warn!("intensity: no population data for ({economy}, {period}); dropped");
            continue;
        };
        if row.population <= 0.0 {
            warn!("intensity: non-positive population for ({economy}, {period}); dropped");
            continue;
        }
        scores.insert(economy, (total / row.population).ln());
    }
    if scores.is_empty() {
        return Err(Error::Degenerate(format!(
            "no economy with positive output and population in period {period}"
        )));
    }
    Ok(ComplexityVector::new(
        panel.dimension.clone(),
        period,
        Metric::Intensity,
        scores,
        Normalization::Raw,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AuxRow, DimensionId, OutputRecord};

    fn panel_from(cells: &[(&str, &str, f64)]) -> OutputPanel {
        OutputPanel::new(
            DimensionId::new("trade").unwrap(),
            cells
                .iter()
                .map(|(e, a, v)| OutputRecord {
                    economy: e.to_string(),
                    activity: a.to_string(),
                    year: 2014,
                    value: *v,
                    citations_recent: None,
                })
                .collect(),
        )
    }

    #[test]
    fn hhi_examples() {
        let panel = panel_from(&[
            ("ONE", "X", 7.0),
            ("UNI", "A", 1.0),
            ("UNI", "B", 1.0),
            ("UNI", "C", 1.0),
            ("UNI", "D", 1.0),
            ("MIX", "A", 5.0),
            ("MIX", "B", 3.0),
            ("MIX", "C", 2.0),
        ]);
        let h = hhi(&panel, 2014).unwrap();
        assert!((h.get("ONE").unwrap() - 1.0).abs() < 1e-12);
        assert!((h.get("UNI").unwrap() - 0.25).abs() < 1e-12);
        assert!((h.get("MIX").unwrap() - 0.38).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let panel = panel_from(&[
            ("ONE", "X", 7.0),
            ("UNI", "A", 1.0),
            ("UNI", "B", 1.0),
            ("UNI", "C", 1.0),
            ("UNI", "D", 1.0),
            ("TWO", "A", 5.0),
            ("TWO", "B", 5.0),
        ]);
        let e = entropy(&panel, 2014).unwrap();
        assert!(e.get("ONE").unwrap().abs() < 1e-12);
        assert!((e.get("UNI").unwrap() - 4.0f64.ln()).abs() < 1e-12);
        assert!((e.get("TWO").unwrap() - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn intensity_examples() {
        let panel = panel_from(&[("BIG", "X", 1e9), ("DBL", "X", 1e9)]);
        let mut aux = AuxTable::default();
        aux.insert("BIG", 2014, AuxRow { population: 1e6, total_exports: 0.0 });
        aux.insert("DBL", 2014, AuxRow { population: 2e6, total_exports: 0.0 });
        let v = intensity(&panel, &aux, 2014).unwrap();
        assert!((v.get("BIG").unwrap() - 1000f64.ln()).abs() < 1e-12);
        // doubling population lowers the score by ln 2
        assert!((v.get("BIG").unwrap() - v.get("DBL").unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_output_economy_is_dropped() {
        let panel = panel_from(&[("POS", "X", 5.0), ("NIL", "X", 0.0)]);
        let mut aux = AuxTable::default();
        aux.insert("POS", 2014, AuxRow { population: 1e6, total_exports: 0.0 });
        aux.insert("NIL", 2014, AuxRow { population: 1e6, total_exports: 0.0 });
        let v = intensity(&panel, &aux, 2014).unwrap();
        assert!(v.get("NIL").is_none());
        let h = hhi(&panel, 2014).unwrap();
        assert!(h.get("NIL").is_none());
    }
}
