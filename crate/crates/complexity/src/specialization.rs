//! Revealed comparative advantage and the binary specialization matrix for
//! one dimension-period.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ingest::{DimensionId, OutputPanel};

/// Dense RCA matrix R_cp for one dimension-period.
#[derive(Debug, Clone)]
pub struct RcaMatrix {
    pub dimension: DimensionId,
    pub period: i32,
    pub economies: Vec<String>,
    pub activities: Vec<String>,
    pub values: DMatrix<f64>,
}

/// Binary specialization matrix M_cp with marginals.
#[derive(Debug, Clone)]
pub struct SpecializationMatrix {
    pub dimension: DimensionId,
    pub period: i32,
    pub economies: Vec<String>,
    pub activities: Vec<String>,
    pub entries: DMatrix<f64>,
    /// Diversity: number of activities each economy is specialized in.
    pub row_marginals: Vec<f64>,
    /// Ubiquity: number of economies specialized in each activity.
    pub col_marginals: Vec<f64>,
}

impl SpecializationMatrix {
    pub fn n_economies(&self) -> usize {
        self.economies.len()
    }

    pub fn n_activities(&self) -> usize {
        self.activities.len()
    }

    /// Emit as long-form CSV `economy,activity,value` with 0/1 values.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
        );
        let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
        writeln!(out, "economy,activity,value").map_err(io_err)?;
        for (i, economy) in self.economies.iter().enumerate() {
            for (j, activity) in self.activities.iter().enumerate() {
                writeln!(out, "{},{},{}", economy, activity, self.entries[(i, j)] as u8)
                    .map_err(io_err)?;
            }
        }
        Ok(())
    }
}

/// Compute R_cp = X_cp X / (X_c X_p) for one period. Economies and activities
/// with a zero marginal are dropped before the division.
pub fn compute_rca(panel: &OutputPanel, period: i32) -> Result<RcaMatrix> {
    let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
    for r in panel.for_year(period) {
        *cells
            .entry((r.economy.clone(), r.activity.clone()))
            .or_default() += r.value;
    }
    if cells.is_empty() {
        return Err(Error::Degenerate(format!(
            "no records for dimension {} in period {}",
            panel.dimension, period
        )));
    }

    let mut row_tot: BTreeMap<String, f64> = BTreeMap::new();
    let mut col_tot: BTreeMap<String, f64> = BTreeMap::new();
    for ((e, a), v) in &cells {
        *row_tot.entry(e.clone()).or_default() += v;
        *col_tot.entry(a.clone()).or_default() += v;
    }
    let economies: Vec<String> = row_tot
        .iter()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, _)| k.clone())
        .collect();
    let activities: Vec<String> = col_tot
        .iter()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, _)| k.clone())
        .collect();
    let total: f64 = cells.values().sum();
    if total <= 0.0 || economies.is_empty() || activities.is_empty() {
        return Err(Error::Degenerate(format!(
            "all output values are zero for dimension {} in period {}",
            panel.dimension, period
        )));
    }

    let e_index: BTreeMap<&str, usize> = economies
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    let a_index: BTreeMap<&str, usize> = activities
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();

    let mut values = DMatrix::zeros(economies.len(), activities.len());
    for ((e, a), v) in &cells {
        if *v == 0.0 {
            continue;
        }
        let (Some(&i), Some(&j)) = (e_index.get(e.as_str()), a_index.get(a.as_str())) else {
            continue;
        };
        values[(i, j)] = v * total / (row_tot[e] * col_tot[a]);
    }

    Ok(RcaMatrix {
        dimension: panel.dimension.clone(),
        period,
        economies,
        activities,
        values,
    })
}

/// Binarize at `threshold` (inclusive), then iteratively prune all-zero rows
/// and columns until every marginal is at least one. RCA values are fixed
/// before pruning; pruning only removes empty rows/columns.
pub fn binarize(rca: &RcaMatrix, threshold: f64) -> Result<SpecializationMatrix> {
    if threshold <= 0.0 {
        return Err(Error::Config(format!(
            "binarization threshold must be positive, got {threshold}"
        )));
    }
    let m = rca.values.map(|v| if v >= threshold { 1.0 } else { 0.0 });

    let mut keep_rows: Vec<usize> = (0..m.nrows()).collect();
    let mut keep_cols: Vec<usize> = (0..m.ncols()).collect();
    loop {
        let new_rows: Vec<usize> = keep_rows
            .iter()
            .copied()
            .filter(|&i| keep_cols.iter().any(|&j| m[(i, j)] > 0.0))
            .collect();
        let new_cols: Vec<usize> = keep_cols
            .iter()
            .copied()
            .filter(|&j| new_rows.iter().any(|&i| m[(i, j)] > 0.0))
            .collect();
        let stable = new_rows.len() == keep_rows.len() && new_cols.len() == keep_cols.len();
        keep_rows = new_rows;
        keep_cols = new_cols;
        if stable {
            break;
        }
    }
    if keep_rows.is_empty() || keep_cols.is_empty() {
        return Err(Error::Degenerate(format!(
            "no specialization at threshold {threshold}: pruning removed every row"
        )));
    }

    let entries = DMatrix::from_fn(keep_rows.len(), keep_cols.len(), |i, j| {
        m[(keep_rows[i], keep_cols[j])]
    });
    let economies: Vec<String> = keep_rows.iter().map(|&i| rca.economies[i].clone()).collect();
    let activities: Vec<String> = keep_cols
        .iter()
        .map(|&j| rca.activities[j].clone())
        .collect();
    let row_marginals: Vec<f64> = (0..entries.nrows()).map(|i| entries.row(i).sum()).collect();
    let col_marginals: Vec<f64> = (0..entries.ncols())
        .map(|j| entries.column(j).sum())
        .collect();

    Ok(SpecializationMatrix {
        dimension: rca.dimension.clone(),
        period: rca.period,
        economies,
        activities,
        entries,
        row_marginals,
        col_marginals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DimensionId, OutputPanel, OutputRecord};

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
    fn diagonal_matrix_rca() {
        let panel = panel_from(&[("A", "X", 10.0), ("B", "Y", 10.0)]);
        let rca = compute_rca(&panel, 2014).unwrap();
        assert_eq!(rca.values[(0, 0)], 2.0);
        assert_eq!(rca.values[(0, 1)], 0.0);
        assert_eq!(rca.values[(1, 1)], 2.0);
    }

    #[test]
    fn uniform_matrix_rca_is_one() {
        let panel = panel_from(&[
            ("A", "X", 5.0),
            ("A", "Y", 5.0),
            ("B", "X", 5.0),
            ("B", "Y", 5.0),
        ]);
        let rca = compute_rca(&panel, 2014).unwrap();
        for v in rca.values.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_evaluated_rca() {
        // X = [[4,1],[1,4]]: total 10, marginals all 5 -> R = [[1.6,0.4],[0.4,1.6]]
        let panel = panel_from(&[
            ("A", "X", 4.0),
            ("A", "Y", 1.0),
            ("B", "X", 1.0),
            ("B", "Y", 4.0),
        ]);
        let rca = compute_rca(&panel, 2014).unwrap();
        assert!((rca.values[(0, 0)] - 1.6).abs() < 1e-12);
        assert!((rca.values[(0, 1)] - 0.4).abs() < 1e-12);
        assert!((rca.values[(1, 0)] - 0.4).abs() < 1e-12);
        assert!((rca.values[(1, 1)] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn empty_period_errors() {
        let panel = panel_from(&[("A", "X", 1.0)]);
        assert!(matches!(
            compute_rca(&panel, 1999),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn binarize_threshold_inclusive() {
        let panel = panel_from(&[
            ("A", "X", 10.0),
            ("B", "Y", 10.0),
        ]);
        let rca = compute_rca(&panel, 2014).unwrap();
        let spec = binarize(&rca, 1.0).unwrap();
        assert_eq!(spec.entries[(0, 0)], 1.0);
        assert_eq!(spec.entries[(0, 1)], 0.0);
        assert_eq!(spec.row_marginals, vec![1.0, 1.0]);
        assert_eq!(spec.col_marginals, vec![1.0, 1.0]);
    }

    #[test]
    fn boundary_rca_at_one_is_specialized() {
        let mut rca = RcaMatrix {
            dimension: DimensionId::new("trade").unwrap(),
            period: 2014,
            economies: vec!["A".into(), "B".into()],
            activities: vec!["X".into(), "Y".into()],
            values: DMatrix::from_row_slice(2, 2, &[1.0, 0.99, 0.99, 1.0]),
        };
        let spec = binarize(&rca, 1.0).unwrap();
        assert_eq!(spec.entries, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        // uniform R of ones: all specialized, no pruning
        rca.values = DMatrix::from_element(2, 2, 1.0);
        let spec = binarize(&rca, 1.0).unwrap();
        assert!(spec.entries.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn pruning_everything_is_degenerate() {
        let rca = RcaMatrix {
            dimension: DimensionId::new("trade").unwrap(),
            period: 2014,
            economies: vec!["A".into()],
            activities: vec!["X".into()],
            values: DMatrix::from_element(1, 1, 0.5),
        };
        assert!(matches!(binarize(&rca, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rca_scale_invariance() {
        let base = [("A", "X", 4.0), ("A", "Y", 1.0), ("B", "X", 1.0), ("B", "Y", 4.0)];
        let scaled: Vec<(&str, &str, f64)> =
            base.iter().map(|(e, a, v)| (*e, *a, v * 137.5)).collect();
        let r1 = compute_rca(&panel_from(&base), 2014).unwrap();
        let r2 = compute_rca(&panel_from(&scaled), 2014).unwrap();
        assert!((&r1.values - &r2.values).abs().max() < 1e-12);
    }
}
