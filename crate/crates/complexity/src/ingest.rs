//! Loading of long-form output data (one CSV per dimension) and the
//! country/activity eligibility filters applied before any metric is computed.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Short identifier for one dimension of output data ("trade", "technology", ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimensionId(String);

impl DimensionId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Config("dimension name must be non-empty".into()));
        }
        Ok(DimensionId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for DimensionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which family of activity-level filters applies to a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimensionKind {
    Trade,
    Technology,
    Research,
    Generic,
}

impl DimensionKind {
    /// Default mapping from conventional dimension names.
    pub fn infer(name: &str) -> Self {
        match name {
            "trade" => DimensionKind::Trade,
            "technology" => DimensionKind::Technology,
            "research" => DimensionKind::Research,
            _ => DimensionKind::Generic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub economy: String,
    pub activity: String,
    pub year: i32,
    pub value: f64,
    /// Citations over the trailing window, research dimension only.
    pub citations_recent: Option<f64>,
}

/// Long-form output observations for one dimension, deduplicated and sorted.
#[derive(Debug, Clone)]
pub struct OutputPanel {
    pub dimension: DimensionId,
    pub records: Vec<OutputRecord>,
}

impl OutputPanel {
    pub fn new(dimension: DimensionId, mut records: Vec<OutputRecord>) -> Self {
        records.sort_by(|a, b| {
            (&a.economy, &a.activity, a.year).cmp(&(&b.economy, &b.activity, b.year))
        });
        OutputPanel { dimension, records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All years present in the panel, ascending.
    pub fn years(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.records.iter().map(|r| r.year).collect();
        set.into_iter().collect()
    }

    /// Records for one year.
    pub fn for_year(&self, year: i32) -> impl Iterator<Item = &OutputRecord> {
        self.records.iter().filter(move |r| r.year == year)
    }
}

/// Per-economy-period auxiliary data (population and total exports).
#[derive(Debug, Clone, Default)]
pub struct AuxTable {
    rows: BTreeMap<(String, i32), AuxRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct AuxRow {
    pub population: f64,
    pub total_exports: f64,
}

impl AuxTable {
    pub fn get(&self, economy: &str, year: i32) -> Option<&AuxRow> {
        self.rows.get(&(economy.to_string(), year))
    }

    pub fn insert(&mut self, economy: impl Into<String>, year: i32, row: AuxRow) {
        self.rows.insert((economy.into(), year), row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Load from CSV with header `economy,year,population,total_exports`.
    pub fn load_csv(path: &Path) -> Result<AuxTable> {
        let display = path.display().to_string();
        let mut reader = csv::Reader::from_path(path).map_err(|e| wrap_csv(&display, e))?;
        let headers = reader.headers().map_err(|e| wrap_csv(&display, e))?.clone();
        let idx = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Schema {
                    path: display.clone(),
                    column: name.into(),
                })
        };
        let (ie, iy, ip, ix) = (
            idx("economy")?,
            idx("year")?,
            idx("population")?,
            idx("total_exports")?,
        );
        let mut table = AuxTable::default();
        for (rowno, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| wrap_csv(&display, e))?;
            let row = rowno + 1;
            let year = parse_field::<i32>(&display, row, "year", &rec[iy])?;
            let population = parse_field::<f64>(&display, row, "population", &rec[ip])?;
            let total_exports = parse_field::<f64>(&display, row, "total_exports", &rec[ix])?;
            table.insert(
                rec[ie].trim().to_string(),
                year,
                AuxRow {
                    population,
                    total_exports,
                },
            );
        }
        Ok(table)
    }
}

/// Eligibility thresholds. Defaults follow the conventions of the complexity
/// literature: countries above one million inhabitants, more than one billion
/// USD of exports, more than 4 patent applications and more than 30
/// publications; activity-level floors per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EligibilityRule {
    pub min_population: f64,
    pub min_total_exports: f64,
    pub min_patent_applications: f64,
    pub min_publications: f64,
    pub min_world_product_exports: f64,
    pub min_patent_class_applications: f64,
    pub research_doc_floor: f64,
    pub research_citation_floor: f64,
    pub min_category_publications: f64,
}

impl Default for EligibilityRule {
    fn default() -> Self {
        EligibilityRule {
            min_population: 1e6,
            min_total_exports: 1e9,
            min_patent_applications: 4.0,
            min_publications: 30.0,
            min_world_product_exports: 5e5,
            min_patent_class_applications: 5.0,
            research_doc_floor: 3.0,
            research_citation_floor: 400.0,
            min_category_publications: 30.0,
        }
    }
}

impl EligibilityRule {
    /// A rule that filters nothing.
    pub fn none() -> Self {
        EligibilityRule {
            min_population: 0.0,
            min_total_exports: 0.0,
            min_patent_applications: 0.0,
            min_publications: 0.0,
            min_world_product_exports: 0.0,
            min_patent_class_applications: 0.0,
            research_doc_floor: 0.0,
            research_citation_floor: 0.0,
            min_category_publications: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.min_population,
            self.min_total_exports,
            self.min_patent_applications,
            self.min_publications,
            self.min_world_product_exports,
            self.min_patent_class_applications,
            self.research_doc_floor,
            self.research_citation_floor,
            self.min_category_publications,
        ];
        if all.iter().any(|t| *t < 0.0 || !t.is_finite()) {
            return Err(Error::Config(
                "eligibility thresholds must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Strict "above threshold" test; a zero threshold filters nothing.
fn exceeds(value: f64, threshold: f64) -> bool {
    threshold == 0.0 || value > threshold
}

/// Inclusive "at least threshold" test; a zero threshold filters nothing.
fn at_least(value: f64, threshold: f64) -> bool {
    threshold == 0.0 || value >= threshold
}

fn wrap_csv(path: &str, e: csv::Error) -> Error {
    Error::Csv {
        path: path.into(),
        source: e,
    }
}

fn parse_field<T: std::str::FromStr>(path: &str, row: usize, col: &str, raw: &str) -> Result<T> {
    raw.trim().parse::<T>().map_err(|_| Error::Validation {
        path: path.into(),
        row,
        message: format!("cannot parse `{}` as {}", raw, col),
    })
}

/// Load a long-form output CSV with header `economy,activity,year,value`
/// and an optional `citations_recent` column. Duplicate keys are summed,
/// negative values are rejected with the offending row number.
pub fn load_output_csv(path: &Path, dimension: DimensionId) -> Result<OutputPanel> {
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| wrap_csv(&display, e))?;
    let headers = reader.headers().map_err(|e| wrap_csv(&display, e))?.clone();
    let idx = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema {
                path: display.clone(),
                column: name.into(),
            })
    };
    let (ie, ia, iy, iv) = (idx("economy")?, idx("activity")?, idx("year")?, idx("value")?);
    let ic = headers.iter().position(|h| h.trim() == "citations_recent");

    let mut merged: BTreeMap<(String, String, i32), (f64, Option<f64>)> = BTreeMap::new();
    for (rowno, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| wrap_csv(&display, e))?;
        let row = rowno + 1;
        let year = parse_field::<i32>(&display, row, "year", &rec[iy])?;
        let value = parse_field::<f64>(&display, row, "value", &rec[iv])?;
        if value < 0.0 || !value.is_finite() {
            return Err(Error::Validation {
                path: display.clone(),
                row,
                message: format!("value must be non-negative and finite, got {}", value),
            });
        }
        let citations = match ic {
            Some(i) if !rec[i].trim().is_empty() => {
                Some(parse_field::<f64>(&display, row, "citations_recent", &rec[i])?)
            }
            _ => None,
        };
        let key = (rec[ie].trim().to_string(), rec[ia].trim().to_string(), year);
        let entry = merged.entry(key).or_insert((0.0, None));
        entry.0 += value;
        if let Some(c) = citations {
            entry.1 = Some(entry.1.unwrap_or(0.0) + c);
        }
    }

    let records = merged
        .into_iter()
        .map(|((economy, activity, year), (value, citations_recent))| OutputRecord {
            economy,
            activity,
            year,
            value,
            citations_recent,
        })
        .collect();
    Ok(OutputPanel::new(dimension, records))
}

/// Apply the country/activity eligibility filters for one dimension.
///
/// Economy-period pairs failing the population or total-export thresholds are
/// removed outright; technology and research panels additionally require a
/// minimum own-dimension output. Activity filters are then applied per
/// dimension kind. Because activity-level drops can push an economy's own
/// totals below threshold, the two passes iterate to a fixed point, which
/// makes the whole operation idempotent.
pub fn apply_eligibility(
    panel: &OutputPanel,
    aux: &AuxTable,
    rule: &EligibilityRule,
    kind: DimensionKind,
) -> Result<OutputPanel> {
    rule.validate()?;
    if *rule == EligibilityRule::none() {
        return Ok(panel.clone());
    }
    if aux.is_empty() {
        return Err(Error::Config(
            "auxiliary table is empty; cannot evaluate eligibility".into(),
        ));
    }

    // Research pair-level floors are value-rewrites, applied once up front.
    let mut records: Vec<OutputRecord> = panel
        .records
        .iter()
        .filter(|r| {
            if kind != DimensionKind::Research {
                return true;
            }
            if !at_least(r.value, rule.research_doc_floor) {
                return false;
            }
            match r.citations_recent {
                Some(c) => at_least(c, rule.research_citation_floor),
                None => true, // citation floor needs the optional column
            }
        })
        .cloned()
        .collect();
    if kind == DimensionKind::Research
        && rule.research_citation_floor > 0.0
        && panel.records.iter().all(|r| r.citations_recent.is_none())
    {
        warn!(
            "dimension {}: no citations_recent column; citation floor skipped",
            panel.dimension
        );
    }

    let mut warned_missing_aux: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = records.len();

        // Economy-period filters.
        let mut own_total: BTreeMap<(String, i32), f64> = BTreeMap::new();
        for r in &records {
            *own_total.entry((r.economy.clone(), r.year)).or_default() += r.value;
        }
        records.retain(|r| {
            let aux_row = match aux.get(&r.economy, r.year) {
                Some(a) => a,
                None => {
                    if warned_missing_aux.insert(format!("{}:{}", r.economy, r.year)) {
                        warn!(
                            "no auxiliary data for ({}, {}); economy dropped for that period",
                            r.economy, r.year
                        );
                    }
                    return false;
                }
            };
            if !exceeds(aux_row.population, rule.min_population) {
                return false;
            }
            if !exceeds(aux_row.total_exports, rule.min_total_exports) {
                return false;
            }
            let total = own_total[&(r.economy.clone(), r.year)];
            match kind {
                DimensionKind::Technology => exceeds(total, rule.min_patent_applications),
                DimensionKind::Research => exceeds(total, rule.min_publications),
                _ => true,
            }
        });

        // Activity-period filters.
        let mut activity_total: BTreeMap<(String, i32), f64> = BTreeMap::new();
        for r in &records {
            *activity_total
                .entry((r.activity.clone(), r.year))
                .or_default() += r.value;
        }
        records.retain(|r| {
            let total = activity_total[&(r.activity.clone(), r.year)];
            match kind {
                DimensionKind::Trade => at_least(total, rule.min_world_product_exports),
                DimensionKind::Technology => exceeds(total, rule.min_patent_class_applications),
                DimensionKind::Research => at_least(total, rule.min_category_publications),
                DimensionKind::Generic => true,
            }
        });

        if records.len() == before {
            break;
        }
    }

    Ok(OutputPanel::new(panel.dimension.clone(), records))
}
