//! Per-economy (or per-activity) score vectors and their normalizations.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::DimensionId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Eci,
    Pci,
    Fitness,
    Hhi,
    Entropy,
    Intensity,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Metric::Eci => "eci",
            Metric::Pci => "pci",
            Metric::Fitness => "fitness",
            Metric::Hhi => "hhi",
            Metric::Entropy => "entropy",
            Metric::Intensity => "intensity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Raw,
    ZScore,
    MinMax,
    Log,
}

/// Scores for one metric over economies or activities, sorted by code.
#[derive(Debug, Clone)]
pub struct ComplexityVector {
    pub dimension: DimensionId,
    pub period: i32,
    pub metric: Metric,
    pub scores: BTreeMap<String, f64>,
    pub normalization: Normalization,
}

impl ComplexityVector {
    pub fn new(
        dimension: DimensionId,
        period: i32,
        metric: Metric,
        scores: BTreeMap<String, f64>,
        normalization: Normalization,
    ) -> Self {
        ComplexityVector {
            dimension,
            period,
            metric,
            scores,
            normalization,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, code: &str) -> Option<f64> {
        self.scores.get(code).copied()
    }

    fn values(&self) -> Vec<f64> {
        self.scores.values().copied().collect()
    }

    /// Z-score transform: mean 0, sample standard deviation 1.
    pub fn zscore(&self) -> Result<ComplexityVector> {
        let vals = self.values();
        let n = vals.len();
        if n < 2 {
            return Err(Error::Degenerate(
                "z-score needs at least two scores".into(),
            ));
        }
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        if var <= 0.0 {
            return Err(Error::Degenerate("z-score of a constant vector".into()));
        }
        let sd = var.sqrt();
        let scores = self
            .scores
            .iter()
            .map(|(k, v)| (k.clone(), (v - mean) / sd))
            .collect();
        Ok(ComplexityVector {
            scores,
            normalization: Normalization::ZScore,
            ..self.clone()
        })
    }

    /// Max-min transform onto [0, 1]; strictly order-preserving.
    pub fn minmax(&self) -> Result<ComplexityVector> {
        let vals = self.values();
        if vals.len() < 2 {
            return Err(Error::Degenerate(
                "min-max needs at least two scores".into(),
            ));
        }
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            return Err(Error::Degenerate("min-max of a constant vector".into()));
        }
        let scores = self
            .scores
            .iter()
            .map(|(k, v)| (k.clone(), (v - min) / (max - min)))
            .collect();
        Ok(ComplexityVector {
            scores,
            normalization: Normalization::MinMax,
            ..self.clone()
        })
    }

    /// Natural-log transform; every score must be positive.
    pub fn log(&self) -> Result<ComplexityVector> {
        if self.scores.values().any(|v| *v <= 0.0) {
            return Err(Error::Degenerate(
                "log transform requires strictly positive scores".into(),
            ));
        }
        let scores = self
            .scores
            .iter()
            .map(|(k, v)| (k.clone(), v.ln()))
            .collect();
        Ok(ComplexityVector {
            scores,
            normalization: Normalization::Log,
            ..self.clone()
        })
    }

    /// Emit as CSV `code,score`, sorted by code, full precision.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
        );
        let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
        writeln!(out, "code,score").map_err(io_err)?;
        for (code, score) in &self.scores {
            writeln!(out, "{},{}", code, fmt_full(*score)).map_err(io_err)?;
        }
        Ok(())
    }
}

/// Shortest round-trippable decimal representation.
fn fmt_full(v: f64) -> String {
    let mut buf = ryu_style(v);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_style(v: f64) -> String {
    // `{}` on f64 prints the shortest representation that round-trips.
    format!("{}", v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(vals: &[(&str, f64)]) -> ComplexityVector {
        ComplexityVector::new(
            DimensionId::new("trade").unwrap(),
            2014,
            Metric::Eci,
            vals.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            Normalization::Raw,
        )
    }

    #[test]
    fn zscore_contract() {
        let z = vector(&[("A", 1.0), ("B", 5.0), ("C", 9.0)]).zscore().unwrap();
        let vals: Vec<f64> = z.scores.values().copied().collect();
        let mean = vals.iter().sum::<f64>() / 3.0;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
        assert!(mean.abs() < 1e-12);
        assert!((sd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minmax_examples() {
        let m = vector(&[("A", 2.0), ("B", 4.0), ("C", 6.0)]).minmax().unwrap();
        assert_eq!(m.get("A"), Some(0.0));
        assert_eq!(m.get("B"), Some(0.5));
        assert_eq!(m.get("C"), Some(1.0));

        let m = vector(&[("A", -1.2247), ("B", 0.0), ("C", 1.2247)])
            .minmax()
            .unwrap();
        assert!((m.get("B").unwrap() - 0.5).abs() < 1e-12);

        let m = vector(&[("A", 3.0), ("B", 7.0)]).minmax().unwrap();
        assert_eq!(m.get("A"), Some(0.0));
        assert_eq!(m.get("B"), Some(1.0));
    }

    #[test]
    fn minmax_constant_is_degenerate() {
        assert!(vector(&[("A", 1.0), ("B", 1.0)]).minmax().is_err());
    }

    #[test]
    fn minmax_preserves_order() {
        let v = vector(&[("A", -0.3), ("B", 2.2), ("C", 0.7), ("D", 1.1)]);
        let m = v.minmax().unwrap();
        let mut pairs: Vec<(&String, f64)> = v.scores.iter().map(|(k, s)| (k, *s)).collect();
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        let ranked: Vec<f64> = pairs.iter().map(|(k, _)| m.get(k).unwrap()).collect();
        assert!(ranked.windows(2).all(|w| w[0] < w[1]));
    }
}
