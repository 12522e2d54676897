//! Dependent-variable constructions from per-economy-year series.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

/// A per-economy-year scalar series (GDP per capita, population, emissions...).
#[derive(Debug, Clone, Default)]
pub struct YearSeries {
    values: BTreeMap<(String, i32), f64>,
}

impl YearSeries {
    pub fn insert(&mut self, economy: impl Into<String>, year: i32, value: f64) {
        self.values.insert((economy.into(), year), value);
    }

    pub fn get(&self, economy: &str, year: i32) -> Option<f64> {
        self.values.get(&(economy.to_string(), year)).copied()
    }

    pub fn economies(&self) -> BTreeSet<String> {
        self.values.keys().map(|(e, _)| e.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Load from CSV with header `economy,year,value`.
    pub fn load_csv(path: &Path) -> Result<YearSeries> {
        let display = path.display().to_string();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Csv {
            path: display.clone(),
            source: e,
        })?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Csv {
                path: display.clone(),
                source: e,
            })?
            .clone();
        let idx = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Schema {
                    path: display.clone(),
                    column: name.into(),
                })
        };
        let (ie, iy, iv) = (idx("economy")?, idx("year")?, idx("value")?);
        let mut series = YearSeries::default();
        for (rowno, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Csv {
                path: display.clone(),
                source: e,
            })?;
            let year: i32 = rec[iy].trim().parse().map_err(|_| Error::Validation {
                path: display.clone(),
                row: rowno + 1,
                message: format!("cannot parse `{}` as year", &rec[iy]),
            })?;
            let value: f64 = rec[iv].trim().parse().map_err(|_| Error::Validation {
                path: display.clone(),
                row: rowno + 1,
                message: format!("cannot parse `{}` as value", &rec[iv]),
            })?;
            series.insert(rec[ie].trim().to_string(), year, value);
        }
        Ok(series)
    }
}

/// Annualized growth over `horizon` years from `start`:
/// 100 * (1/h) * ln(v_{start+h} / v_start). Economies missing either
/// endpoint, or with a non-positive endpoint, are skipped with a warning.
pub fn growth_depvar(
    series: &YearSeries,
    start: i32,
    horizon: i32,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for economy in series.economies() {
        let (Some(v0), Some(v1)) = (
            series.get(&economy, start),
            series.get(&economy, start + horizon),
        ) else {
            warn!("growth: {economy} missing an endpoint for {start}+{horizon}; skipped");
            continue;
        };
        if v0 <= 0.0 || v1 <= 0.0 {
            warn!("growth: {economy} has non-positive endpoint; skipped");
            continue;
        }
        out.insert(economy, 100.0 / horizon as f64 * (v1 / v0).ln());
    }
    out
}

/// Arithmetic mean over the available years of each inclusive panel range,
/// keyed by (economy, "start-end"). Pairs without observations are skipped.
pub fn panel_average_depvar(
    series: &YearSeries,
    panels: &[(i32, i32)],
) -> Result<BTreeMap<(String, String), f64>> {
    for w in panels.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(Error::Config(format!(
                "panels must be non-overlapping and ordered: {:?} then {:?}",
                w[0], w[1]
            )));
        }
    }
    let mut out = BTreeMap::new();
    for &(start, end) in panels {
        if end < start {
            return Err(Error::Config(format!("invalid panel range {start}-{end}")));
        }
        let label = format!("{start}-{end}");
        for economy in series.economies() {
            let vals: Vec<f64> = (start..=end)
                .filter_map(|y| series.get(&economy, y))
                .collect();
            if vals.is_empty() {
                warn!("panel average: ({economy}, {label}) has no observations; skipped");
                continue;
            }
            out.insert(
                (economy.clone(), label.clone()),
                vals.iter().sum::<f64>() / vals.len() as f64,
            );
        }
    }
    Ok(out)
}

/// Per-economy-year emission intensity: ln(GHG / (GDP_pc * POP)).
/// Rows with a missing or non-positive input are skipped with a warning.
pub fn emission_intensity_depvar(
    ghg: &YearSeries,
    gdp_pc: &YearSeries,
    pop: &YearSeries,
) -> YearSeries {
    let mut out = YearSeries::default();
    for ((economy, year), g) in &ghg.values {
        let (Some(gdp), Some(p)) = (gdp_pc.get(economy, *year), pop.get(economy, *year)) else {
            warn!("emission intensity: ({economy}, {year}) missing GDP or population; skipped");
            continue;
        };
        if *g <= 0.0 || gdp <= 0.0 || p <= 0.0 {
            warn!("emission intensity: ({economy}, {year}) has non-positive input; skipped");
            continue;
        }
        out.insert(economy.clone(), *year, (g / (gdp * p)).ln());
    }
    out
}
