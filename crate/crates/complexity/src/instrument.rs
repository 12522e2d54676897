//! Similarity-based instrumental variable: per economy, the average
//! complexity of its most structurally similar peers.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ingest::DimensionId;
use crate::metrics::ComplexityVector;
use crate::specialization::SpecializationMatrix;

/// Pairwise specialization-overlap scores
/// phi[c][c'] = |common specializations| / max(diversity_c, diversity_c').
#[derive(Debug, Clone)]
pub struct SimilarityScores {
    pub dimension: DimensionId,
    pub period: i32,
    pub economies: Vec<String>,
    pub entries: DMatrix<f64>,
}

/// Neighbor lists and instrumented scores.
#[derive(Debug, Clone)]
pub struct InstrumentMap {
    pub dimension: DimensionId,
    pub period: i32,
    pub entries: Vec<InstrumentEntry>,
}

#[derive(Debug, Clone)]
pub struct InstrumentEntry {
    pub economy: String,
    pub neighbors: Vec<String>,
    pub score: f64,
    /// True when fewer than the requested k candidates were available.
    pub flagged: bool,
}

impl InstrumentMap {
    pub fn get(&self, economy: &str) -> Option<&InstrumentEntry> {
        self.entries.iter().find(|e| e.economy == economy)
    }

    /// CSV `economy,n1,..,nk,instrumented_eci`, sorted by economy.
    pub fn write_csv(&self, path: &Path, k: usize) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
        );
        let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
        let headers: Vec<String> = (1..=k).map(|i| format!("n{i}")).collect();
        writeln!(out, "economy,{},instrumented_eci", headers.join(",")).map_err(io_err)?;
        for e in &self.entries {
            let mut cols: Vec<String> = e.neighbors.clone();
            cols.resize(k, String::new());
            writeln!(out, "{},{},{}", e.economy, cols.join(","), e.score).map_err(io_err)?;
        }
        Ok(())
    }
}

/// Compute the pairwise similarity matrix from a pruned specialization
/// matrix. Symmetric, entries in [0, 1], diagonal 1.
pub fn similarity(spec: &SpecializationMatrix) -> SimilarityScores {
    let m = &spec.entries;
    let n = m.nrows();
    let overlap = m * m.transpose();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        overlap[(i, j)] / spec.row_marginals[i].max(spec.row_marginals[j])
    });
    SimilarityScores {
        dimension: spec.dimension.clone(),
        period: spec.period,
        economies: spec.economies.clone(),
        entries,
    }
}

/// Replace each economy's score with the mean score of its `k` most similar
/// other economies. Ties at the selection boundary break by code order; an
/// economy with fewer than `k` candidates uses all of them and is flagged.
pub fn instrument_eci(
    sim: &SimilarityScores,
    scores: &ComplexityVector,
    k: usize,
) -> Result<InstrumentMap> {
    if k == 0 {
        return Err(Error::Config("neighbor count k must be positive".into()));
    }
    for economy in &sim.economies {
        if scores.get(economy).is_none() {
            return Err(Error::Config(format!(
                "score vector does not cover economy {economy}"
            )));
        }
    }

    let n = sim.economies.len();
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        // Candidates: every other economy, ranked by descending similarity,
        // ties broken by ascending code.
        let mut candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        candidates.sort_by(|&a, &b| {
            sim.entries[(i, b)]
                .total_cmp(&sim.entries[(i, a)])
                .then_with(|| sim.economies[a].cmp(&sim.economies[b]))
        });
        let take = k.min(candidates.len());
        let chosen = &candidates[..take];
        let mean = chosen
            .iter()
            .map(|&j| scores.get(&sim.economies[j]).unwrap())
            .sum::<f64>()
            / take.max(1) as f64;
        entries.push(InstrumentEntry {
            economy: sim.economies[i].clone(),
            neighbors: chosen.iter().map(|&j| sim.economies[j].clone()).collect(),
            score: mean,
            flagged: take < k,
        });
    }
    entries.sort_by(|a, b| a.economy.cmp(&b.economy));
    Ok(InstrumentMap {
        dimension: sim.dimension.clone(),
        period: sim.period,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DimensionId;
    use crate::metrics::{Metric, Normalization};
    use nalgebra::DMatrix;

    fn spec_from(rows: &[&[f64]]) -> SpecializationMatrix {
        let n = rows.len();
        let kk = rows[0].len();
        let entries = DMatrix::from_fn(n, kk, |i, j| rows[i][j]);
        SpecializationMatrix {
            dimension: DimensionId::new("trade").unwrap(),
            period: 2014,
            economies: (0..n).map(|i| format!("E{i:02}")).collect(),
            activities: (0..kk).map(|j| format!("A{j:02}")).collect(),
            row_marginals: (0..n).map(|i| entries.row(i).sum()).collect(),
            col_marginals: (0..kk).map(|j| entries.column(j).sum()).collect(),
            entries,
        }
    }

    fn scores_for(sim: &SimilarityScores, vals: &[f64]) -> ComplexityVector {
        ComplexityVector::new(
            sim.dimension.clone(),
            sim.period,
            Metric::Eci,
            sim.economies
                .iter()
                .cloned()
                .zip(vals.iter().copied())
                .collect(),
            Normalization::ZScore,
        )
    }

    #[test]
    fn identical_rows_have_similarity_one() {
        let row: &[f64] = &[1.0, 0.0, 1.0];
        let spec = spec_from(&[row, row, &[0.0, 1.0, 0.0]]);
        let sim = similarity(&spec);
        assert_eq!(sim.entries[(0, 1)], 1.0);
        assert_eq!(sim.entries[(0, 2)], 0.0); // disjoint sets
        assert_eq!(sim.entries[(0, 0)], 1.0);
    }

    #[test]
    fn partial_overlap_formula() {
        // c in {A,B}, c' in {A}: 1 / max(2,1) = 0.5
        let spec = spec_from(&[&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        let sim = similarity(&spec);
        assert_eq!(sim.entries[(0, 1)], 0.5);
        assert_eq!(sim.entries[(1, 0)], 0.5);
    }

    #[test]
    fn symmetry_and_bounds() {
        let spec = spec_from(&[
            &[1.0, 1.0, 0.0, 1.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[1.0, 0.0, 1.0, 1.0],
            &[0.0, 1.0, 0.0, 1.0],
        ]);
        let sim = similarity(&spec);
        for i in 0..4 {
            for j in 0..4 {
                let v = sim.entries[(i, j)];
                assert!((0.0..=1.0).contains(&v));
                assert_eq!(v, sim.entries[(j, i)]);
            }
        }
    }

    #[test]
    fn averaging_over_all_three_neighbors() {
        let spec = spec_from(&[
            &[1.0, 1.0, 1.0, 0.0],
            &[1.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        let sim = similarity(&spec);
        let scores = scores_for(&sim, &[0.5, 1.0, 0.0, -1.0]);
        let map = instrument_eci(&sim, &scores, 3).unwrap();
        let e0 = map.get("E00").unwrap();
        assert_eq!(e0.neighbors.len(), 3);
        assert!((e0.score - (1.0 + 0.0 + -1.0) / 3.0).abs() < 1e-12);
        assert!(!e0.flagged);
    }

    #[test]
    fn identical_economies_share_instrument() {
        let row: &[f64] = &[1.0, 1.0, 0.0];
        let spec = spec_from(&[row, row, row, row]);
        let sim = similarity(&spec);
        let scores = scores_for(&sim, &[2.0, 2.0, 2.0, 2.0]);
        let map = instrument_eci(&sim, &scores, 3).unwrap();
        for e in &map.entries {
            assert!((e.score - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fewer_candidates_than_k_is_flagged() {
        let spec = spec_from(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let sim = similarity(&spec);
        let scores = scores_for(&sim, &[1.0, -1.0]);
        let map = instrument_eci(&sim, &scores, 3).unwrap();
        let e0 = map.get("E00").unwrap();
        assert_eq!(e0.neighbors.len(), 1);
        assert!(e0.flagged);
        assert_eq!(e0.score, -1.0);
    }

    #[test]
    fn own_score_never_enters_instrument() {
        let spec = spec_from(&[
            &[1.0, 1.0, 0.0],
            &[1.0, 0.0, 1.0],
            &[0.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0],
        ]);
        let sim = similarity(&spec);
        let base = scores_for(&sim, &[0.1, 0.2, 0.3, 0.4]);
        let map1 = instrument_eci(&sim, &base, 2).unwrap();
        let shifted = scores_for(&sim, &[99.0, 0.2, 0.3, 0.4]);
        let map2 = instrument_eci(&sim, &shifted, 2).unwrap();
        // E00's own instrument must be unchanged by its own score.
        assert_eq!(map1.get("E00").unwrap().score, map2.get("E00").unwrap().score);
    }
}
