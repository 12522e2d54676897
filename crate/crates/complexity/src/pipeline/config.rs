//! Run configuration: TOML grammar, validation, and stage gating.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::econ::ModelSpec;
use crate::error::{Error, Result};
use crate::ingest::DimensionId;
use crate::metrics::Metric;

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Specialize,
    Metrics,
    Instrument,
    Regress,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Specialize => "specialize",
            Stage::Metrics => "metrics",
            Stage::Instrument => "instrument",
            Stage::Regress => "regress",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionConfig {
    pub id: String,
    /// Long-form CSV `economy,activity,year,value[,citations_recent]`.
    pub output: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelConfig {
    pub start: i32,
    pub end: i32,
}

impl PanelConfig {
    pub fn label(&self) -> String {
        format!("{}-{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DepvarConfig {
    /// Annualized log growth of `series` over each panel range.
    Growth { series: PathBuf },
    /// Mean of `series` over the available years of each panel range.
    PanelAverage { series: PathBuf },
    /// ln(GHG / (GDP_pc * POP)), panel-averaged.
    EmissionIntensity {
        ghg: PathBuf,
        gdp_pc: PathBuf,
        population: PathBuf,
    },
}

impl DepvarConfig {
    pub fn paths(&self) -> Vec<&PathBuf> {
        match self {
            DepvarConfig::Growth { series } | DepvarConfig::PanelAverage { series } => {
                vec![series]
            }
            DepvarConfig::EmissionIntensity {
                ghg,
                gdp_pc,
                population,
            } => vec![ghg, gdp_pc, population],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ControlTransform {
    #[default]
    None,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ControlTiming {
    /// Value at the panel's first year.
    #[default]
    Start,
    /// Mean over the panel's year range.
    Average,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlConfig {
    pub name: String,
    pub series: PathBuf,
    #[serde(default)]
    pub transform: ControlTransform,
    #[serde(default)]
    pub at: ControlTiming,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentConfig {
    /// Number of most-similar neighbors averaged into the instrument.
    pub neighbors: usize,
}

impl Default for InstrumentConfig {
    fn default() -> Self {
        InstrumentConfig { neighbors: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        // Near-nested matrices converge only polynomially, so the default
        // favors robustness over the last two digits; tighten per run when
        // the extra precision matters.
        FitnessConfig {
            tolerance: 1e-8,
            max_iterations: 500_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Model id whose regressors every candidate must nest.
    pub baseline: String,
    pub candidates: Vec<String>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationConfig {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub controls: Vec<String>,
}

fn default_metrics() -> Vec<Metric> {
    vec![
        Metric::Eci,
        Metric::Fitness,
        Metric::Hhi,
        Metric::Entropy,
    ]
}

fn default_rca_threshold() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub dimensions: Vec<DimensionConfig>,
    /// Economy-year auxiliary table `economy,year,population,total_exports`.
    #[serde(default)]
    pub aux: Option<PathBuf>,
    /// Eligibility thresholds; omit the block to skip filtering entirely.
    #[serde(default)]
    pub eligibility: Option<crate::ingest::EligibilityRule>,
    #[serde(default = "default_rca_threshold")]
    pub rca_threshold: f64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub fitness: FitnessConfig,
    pub panels: Vec<PanelConfig>,
    #[serde(default)]
    pub depvars: BTreeMap<String, DepvarConfig>,
    #[serde(default)]
    pub controls: Vec<ControlConfig>,
    #[serde(default)]
    pub instrument: InstrumentConfig,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub selection: Option<SelectionConfig>,
    #[serde(default)]
    pub correlations: Vec<CorrelationConfig>,
    /// Raw TOML text of the loaded file, echoed into the output tree for
    /// provenance. Not part of the configuration grammar.
    #[serde(skip)]
    pub source_text: String,
}

impl RunConfig {
    /// Parse and validate a TOML run configuration. Relative paths are
    /// resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.source_text = text;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        resolve(&mut self.out_dir);
        for d in &mut self.dimensions {
            resolve(&mut d.output);
        }
        if let Some(aux) = &mut self.aux {
            resolve(aux);
        }
        for d in self.depvars.values_mut() {
            match d {
                DepvarConfig::Growth { series } | DepvarConfig::PanelAverage { series } => {
                    resolve(series)
                }
                DepvarConfig::EmissionIntensity {
                    ghg,
                    gdp_pc,
                    population,
                } => {
                    resolve(ghg);
                    resolve(gdp_pc);
                    resolve(population);
                }
            }
        }
        for c in &mut self.controls {
            resolve(&mut c.series);
        }
    }

    /// Fail fast on anything wrong before computation starts.
    pub fn validate(&self) -> Result<()> {
        if self.dimensions.is_empty() {
            return Err(Error::Config("at least one dimension is required".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for d in &self.dimensions {
            DimensionId::new(&d.id)?;
            if !ids.insert(&d.id) {
                return Err(Error::Config(format!("duplicate dimension id `{}`", d.id)));
            }
        }
        if self.panels.is_empty() {
            return Err(Error::Config("at least one panel range is required".into()));
        }
        for w in self.panels.windows(2) {
            if w[0].end >= w[1].start {
                return Err(Error::Config(format!(
                    "panel ranges must be ordered and non-overlapping: {} then {}",
                    w[0].label(),
                    w[1].label()
                )));
            }
        }
        for p in &self.panels {
            if p.end <= p.start {
                return Err(Error::Config(format!("invalid panel range {}", p.label())));
            }
        }
        if !(self.rca_threshold > 0.0) {
            return Err(Error::Config("rca_threshold must be positive".into()));
        }
        if self.instrument.neighbors == 0 {
            return Err(Error::Config("instrument.neighbors must be positive".into()));
        }
        if self.eligibility.is_some() && self.aux.is_none() {
            return Err(Error::Config(
                "eligibility filtering requires an aux table".into(),
            ));
        }

        // Every referenced input path must exist up front.
        let mut paths: Vec<&PathBuf> = self.dimensions.iter().map(|d| &d.output).collect();
        if let Some(aux) = &self.aux {
            paths.push(aux);
        }
        for d in self.depvars.values() {
            paths.extend(d.paths());
        }
        for c in &self.controls {
            paths.push(&c.series);
        }
        for p in paths {
            if !p.exists() {
                return Err(Error::Config(format!(
                    "input path does not exist: {}",
                    p.display()
                )));
            }
        }

        // Model references must resolve.
        let mut model_ids = std::collections::BTreeSet::new();
        for m in &self.models {
            if m.id.is_empty() {
                return Err(Error::Config("model id must be non-empty".into()));
            }
            if !model_ids.insert(&m.id) {
                return Err(Error::Config(format!("duplicate model id `{}`", m.id)));
            }
            if !self.depvars.contains_key(&m.depvar) {
                return Err(Error::Config(format!(
                    "model `{}` references unknown dependent variable `{}`",
                    m.id, m.depvar
                )));
            }
            for d in &m.dimensions {
                self.parse_column(d).ok_or_else(|| {
                    Error::Config(format!(
                        "model `{}`: unknown complexity column `{d}` \
                         (expected `<metric>:<dimension>`)",
                        m.id
                    ))
                })?;
            }
            for c in &m.controls {
                if !self.controls.iter().any(|cc| &cc.name == c) {
                    return Err(Error::Config(format!(
                        "model `{}` references unknown control `{c}`",
                        m.id
                    )));
                }
            }
        }
        if let Some(sel) = &self.selection {
            for id in std::iter::once(&sel.baseline).chain(&sel.candidates) {
                if !self.models.iter().any(|m| &m.id == id) {
                    return Err(Error::Config(format!(
                        "selection references unknown model `{id}`"
                    )));
                }
            }
            if !(0.0 < sel.alpha && sel.alpha < 1.0) {
                return Err(Error::Config(format!(
                    "selection.alpha must lie in (0, 1), got {}",
                    sel.alpha
                )));
            }
            if sel.candidates.is_empty() {
                return Err(Error::Config("selection.candidates is empty".into()));
            }
        }
        Ok(())
    }

    /// Split a complexity column name `<metric>:<dimension>`.
    pub fn parse_column(&self, name: &str) -> Option<(Metric, String)> {
        let (metric, dim) = name.split_once(':')?;
        let metric = match metric {
            "eci" => Metric::Eci,
            "fitness" => Metric::Fitness,
            "hhi" => Metric::Hhi,
            "entropy" => Metric::Entropy,
            "intensity" => Metric::Intensity,
            _ => return None,
        };
        if !self.dimensions.iter().any(|d| d.id == dim) {
            return None;
        }
        if !self.metrics.contains(&metric) {
            return None;
        }
        Some((metric, dim.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        p
    }

    fn minimal_toml() -> &'static str {
        r#"
out_dir = "out"
seed = 7

[[dimensions]]
id = "trade"
output = "trade.csv"

[[panels]]
start = 2000
end = 2010
"#
    }

    #[test]
    fn minimal_config_loads() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "trade.csv", "economy,activity,year,value\n");
        let cfg_path = write_file(dir.path(), "run.toml", minimal_toml());
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.dimensions.len(), 1);
        assert!(cfg.out_dir.ends_with("out"));
        assert!(cfg.dimensions[0].output.is_absolute() || cfg.dimensions[0].output.exists());
    }

    #[test]
    fn missing_input_path_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = write_file(dir.path(), "run.toml", minimal_toml());
        // trade.csv not written
        assert!(matches!(RunConfig::load(&cfg_path), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_model_depvar_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "trade.csv", "economy,activity,year,value\n");
        let toml = format!(
            "{}\n[[models]]\nid = \"m1\"\ndepvar = \"growth\"\n",
            minimal_toml()
        );
        let cfg_path = write_file(dir.path(), "run.toml", &toml);
        assert!(matches!(RunConfig::load(&cfg_path), Err(Error::Config(_))));
    }

    #[test]
    fn column_parsing() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "trade.csv", "economy,activity,year,value\n");
        let cfg_path = write_file(dir.path(), "run.toml", minimal_toml());
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert_eq!(
            cfg.parse_column("eci:trade"),
            Some((Metric::Eci, "trade".to_string()))
        );
        assert_eq!(cfg.parse_column("eci:tech"), None); // unknown dimension
        assert_eq!(cfg.parse_column("magic:trade"), None); // unknown metric
        assert_eq!(cfg.parse_column("intensity:trade"), None); // metric not enabled
    }

    #[test]
    fn overlapping_panels_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "trade.csv", "economy,activity,year,value\n");
        let toml = format!("{}\n[[panels]]\nstart = 2005\nend = 2015\n", minimal_toml());
        let cfg_path = write_file(dir.path(), "run.toml", &toml);
        assert!(RunConfig::load(&cfg_path).is_err());
    }
}
