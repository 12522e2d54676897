//! End-to-end run orchestration: ingest -> specialize -> metrics ->
//! instrument -> regress, with a hash manifest for reproducibility.

pub mod config;
pub mod fixture;
pub mod table;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::econ::{
    self, build_panel, composite_eci, conditional_correlation, growth_depvar, ols,
    select_multidimensional_model, ColumnSet, ModelSpec, RegressionFit, YearSeries,
};
use crate::error::{Error, Result};
use crate::ingest::{
    apply_eligibility, load_output_csv, AuxTable, DimensionId, DimensionKind, OutputPanel,
};
use crate::instrument::{instrument_eci, similarity};
use crate::metrics::{eci, entropy, fitness, hhi, intensity, ComplexityVector, Metric};
use crate::specialization::{binarize, compute_rca, SpecializationMatrix};

pub use config::{RunConfig, Stage};

type ColumnKey = (String, String); // (economy, period label)

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub stages: Vec<String>,
    /// Relative path and SHA-256 of every emitted artifact.
    pub files: Vec<ManifestEntry>,
    pub selected_model: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

/// Bookkeeping for emitted files, hashed as they are produced.
struct Artifacts {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Artifacts {
    fn record(&mut self, path: &Path) -> Result<()> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let rel = path
            .strip_prefix(&self.root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        self.entries.push(ManifestEntry {
            path: rel,
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        Ok(())
    }
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn stage_err(stage: Stage, e: Error) -> Error {
    log::error!("stage {} failed: {e}", stage.name());
    e
}

/// Execute the pipeline up to and including `upto`, writing per-stage
/// artifacts plus a manifest under the configured output directory.
pub fn run_pipeline(cfg: &RunConfig, upto: Stage) -> Result<RunReport> {
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    ensure_dir(&out)?;
    let mut artifacts = Artifacts {
        root: out.clone(),
        entries: Vec::new(),
    };
    let mut stages = Vec::new();

    // ---- ingest ------------------------------------------------------
    let aux: Option<AuxTable> = match &cfg.aux {
        Some(path) => Some(AuxTable::load_csv(path).map_err(|e| stage_err(Stage::Ingest, e))?),
        None => None,
    };
    let mut panels_by_dim: BTreeMap<String, OutputPanel> = BTreeMap::new();
    ensure_dir(&out.join("ingest"))?;
    for d in &cfg.dimensions {
        let run = || -> Result<OutputPanel> {
            let id = DimensionId::new(&d.id)?;
            let mut panel = load_output_csv(&d.output, id)?;
            if let Some(rule) = &cfg.eligibility {
                let aux = aux.as_ref().expect("validated");
                panel = apply_eligibility(&panel, aux, rule, DimensionKind::infer(&d.id))?;
            }
            let path = out.join("ingest").join(format!("{}.csv", d.id));
            write_panel_csv(&panel, &path)?;
            Ok(panel)
        };
        let panel = run().map_err(|e| stage_err(Stage::Ingest, e))?;
        artifacts.record(&out.join("ingest").join(format!("{}.csv", d.id)))?;
        info!("ingest: dimension {} has {} records", d.id, panel.len());
        panels_by_dim.insert(d.id.clone(), panel);
    }
    stages.push(Stage::Ingest.name().to_string());
    if upto == Stage::Ingest {
        return finish(cfg, &out, artifacts, stages, None);
    }

    // ---- specialize --------------------------------------------------
    ensure_dir(&out.join("specialize"))?;
    let mut specs: BTreeMap<(String, String), SpecializationMatrix> = BTreeMap::new();
    for d in &cfg.dimensions {
        for p in &cfg.panels {
            let label = p.label();
            let run = || -> Result<SpecializationMatrix> {
                let rca = compute_rca(&panels_by_dim[&d.id], p.start)?;
                binarize(&rca, cfg.rca_threshold)
            };
            let spec = run().map_err(|e| stage_err(Stage::Specialize, e))?;
            let path = out
                .join("specialize")
                .join(format!("{}_{}.csv", d.id, label));
            spec.write_csv(&path)
                .map_err(|e| stage_err(Stage::Specialize, e))?;
            artifacts.record(&path)?;
            specs.insert((d.id.clone(), label), spec);
        }
    }
    stages.push(Stage::Specialize.name().to_string());
    if upto == Stage::Specialize {
        return finish(cfg, &out, artifacts, stages, None);
    }

    // ---- metrics -----------------------------------------------------
    // Columns keyed "<metric>:<dimension>" -> (economy, label) -> value.
    ensure_dir(&out.join("metrics"))?;
    let mut columns: BTreeMap<String, BTreeMap<ColumnKey, f64>> = BTreeMap::new();
    let store =
        |columns: &mut BTreeMap<String, BTreeMap<ColumnKey, f64>>,
         name: String,
         label: &str,
         vector: &ComplexityVector| {
            let col = columns.entry(name).or_default();
            for (economy, v) in &vector.scores {
                col.insert((economy.clone(), label.to_string()), *v);
            }
        };
    for d in &cfg.dimensions {
        for p in &cfg.panels {
            let label = p.label();
            let spec = &specs[&(d.id.clone(), label.clone())];
            for metric in &cfg.metrics {
                let run = || -> Result<Vec<(String, ComplexityVector)>> {
                    Ok(match metric {
                        Metric::Eci => {
                            let outcome = eci(spec)?;
                            vec![
                                (format!("eci:{}", d.id), outcome.eci),
                                (format!("pci:{}", d.id), outcome.pci),
                            ]
                        }
                        Metric::Fitness => {
                            let outcome = fitness(
                                spec,
                                cfg.fitness.tolerance,
                                cfg.fitness.max_iterations,
                            )?;
                            vec![(format!("fitness:{}", d.id), outcome.log_fitness)]
                        }
                        Metric::Hhi => {
                            vec![(
                                format!("hhi:{}", d.id),
                                hhi(&panels_by_dim[&d.id], p.start)?,
                            )]
                        }
                        Metric::Entropy => {
                            vec![(
                                format!("entropy:{}", d.id),
                                entropy(&panels_by_dim[&d.id], p.start)?,
                            )]
                        }
                        Metric::Intensity => {
                            let aux = aux.as_ref().ok_or_else(|| {
                                Error::Config(
                                    "intensity metric requires an aux table".into(),
                                )
                            })?;
                            vec![(
                                format!("intensity:{}", d.id),
                                intensity(&panels_by_dim[&d.id], aux, p.start)?,
                            )]
                        }
                        Metric::Pci => vec![], // emitted alongside eci
                    })
                };
                for (name, vector) in run().map_err(|e| stage_err(Stage::Metrics, e))? {
                    let path = out.join("metrics").join(format!(
                        "{}_{}.csv",
                        name.replace(':', "_"),
                        label
                    ));
                    vector
                        .write_csv(&path)
                        .map_err(|e| stage_err(Stage::Metrics, e))?;
                    artifacts.record(&path)?;
                    store(&mut columns, name, &label, &vector);
                }
            }
        }
    }
    stages.push(Stage::Metrics.name().to_string());
    if upto == Stage::Metrics {
        return finish(cfg, &out, artifacts, stages, None);
    }

    // ---- instrument --------------------------------------------------
    // Instrumented ECI columns "iv_eci:<dimension>".
    ensure_dir(&out.join("instrument"))?;
    if cfg.metrics.contains(&Metric::Eci) {
        for d in &cfg.dimensions {
            for p in &cfg.panels {
                let label = p.label();
                let spec = &specs[&(d.id.clone(), label.clone())];
                let mut run = || -> Result<()> {
                    let sim = similarity(spec);
                    let eci_col = &columns[&format!("eci:{}", d.id)];
                    let scores = ComplexityVector::new(
                        spec.dimension.clone(),
                        p.start,
                        Metric::Eci,
                        spec.economies
                            .iter()
                            .filter_map(|e| {
                                eci_col
                                    .get(&(e.clone(), label.clone()))
                                    .map(|v| (e.clone(), *v))
                            })
                            .collect(),
                        crate::metrics::Normalization::ZScore,
                    );
                    let map = instrument_eci(&sim, &scores, cfg.instrument.neighbors)?;
                    let path = out
                        .join("instrument")
                        .join(format!("{}_{}.csv", d.id, label));
                    map.write_csv(&path, cfg.instrument.neighbors)?;
                    let col = columns.entry(format!("iv_eci:{}", d.id)).or_default();
                    for e in &map.entries {
                        col.insert((e.economy.clone(), label.clone()), e.score);
                        if e.flagged {
                            warn!(
                                "instrument: {} ({label}) had fewer than {} neighbors",
                                e.economy, cfg.instrument.neighbors
                            );
                        }
                    }
                    Ok(())
                };
                run().map_err(|e| stage_err(Stage::Instrument, e))?;
                artifacts.record(&out.join("instrument").join(format!("{}_{}.csv", d.id, label)))?;
            }
        }
    }
    stages.push(Stage::Instrument.name().to_string());
    if upto == Stage::Instrument {
        return finish(cfg, &out, artifacts, stages, None);
    }

    // ---- regress -----------------------------------------------------
    let selected = regress_stage(cfg, &out, &columns, &mut artifacts)
        .map_err(|e| stage_err(Stage::Regress, e))?;
    stages.push(Stage::Regress.name().to_string());
    finish(cfg, &out, artifacts, stages, selected)
}

/// Build dependent-variable and control columns, fit every model, emit one
/// table per dependent variable, then run selection, composite scores, and
/// conditional correlations on a common estimation sample.
fn regress_stage(
    cfg: &RunConfig,
    out: &Path,
    columns: &BTreeMap<String, BTreeMap<ColumnKey, f64>>,
    artifacts: &mut Artifacts,
) -> Result<Option<String>> {
    if cfg.models.is_empty() {
        info!("regress: no models configured; nothing to do");
        return Ok(None);
    }
    ensure_dir(&out.join("tables"))?;

    // Dependent variables keyed (economy, label).
    let mut depvars: BTreeMap<String, BTreeMap<ColumnKey, f64>> = BTreeMap::new();
    for (name, dv) in &cfg.depvars {
        let values = match dv {
            config::DepvarConfig::Growth { series } => {
                let series = YearSeries::load_csv(series)?;
                let mut map = BTreeMap::new();
                for p in &cfg.panels {
                    let g = growth_depvar(&series, p.start, p.end - p.start);
                    for (economy, v) in g {
                        map.insert((economy, p.label()), v);
                    }
                }
                map
            }
            config::DepvarConfig::PanelAverage { series } => {
                let series = YearSeries::load_csv(series)?;
                let ranges: Vec<(i32, i32)> =
                    cfg.panels.iter().map(|p| (p.start, p.end)).collect();
                econ::panel_average_depvar(&series, &ranges)?
            }
            config::DepvarConfig::EmissionIntensity {
                ghg,
                gdp_pc,
                population,
            } => {
                let intensity = econ::emission_intensity_depvar(
                    &YearSeries::load_csv(ghg)?,
                    &YearSeries::load_csv(gdp_pc)?,
                    &YearSeries::load_csv(population)?,
                );
                let ranges: Vec<(i32, i32)> =
                    cfg.panels.iter().map(|p| (p.start, p.end)).collect();
                econ::panel_average_depvar(&intensity, &ranges)?
            }
        };
        depvars.insert(name.clone(), values);
    }

    // Control columns keyed (economy, label).
    let mut controls: BTreeMap<String, BTreeMap<ColumnKey, f64>> = BTreeMap::new();
    for c in &cfg.controls {
        let series = YearSeries::load_csv(&c.series)?;
        let mut map = BTreeMap::new();
        for p in &cfg.panels {
            for economy in series.economies() {
                let raw = match c.at {
                    config::ControlTiming::Start => series.get(&economy, p.start),
                    config::ControlTiming::Average => {
                        let vals: Vec<f64> = (p.start..=p.end)
                            .filter_map(|y| series.get(&economy, y))
                            .collect();
                        if vals.is_empty() {
                            None
                        } else {
                            Some(vals.iter().sum::<f64>() / vals.len() as f64)
                        }
                    }
                };
                let Some(raw) = raw else { continue };
                let value = match c.transform {
                    config::ControlTransform::None => raw,
                    config::ControlTransform::Log => {
                        if raw <= 0.0 {
                            warn!(
                                "control `{}`: non-positive value for {economy} ({}); skipped",
                                c.name,
                                p.label()
                            );
                            continue;
                        }
                        raw.ln()
                    }
                };
                map.insert((economy.clone(), p.label()), value);
            }
        }
        controls.insert(c.name.clone(), map);
    }

    // Per-model fits (each on its own listwise-complete sample).
    let column_set = |spec: &ModelSpec| -> Result<ColumnSet> {
        let y = depvars
            .get(&spec.depvar)
            .ok_or_else(|| Error::Config(format!("unknown dependent variable `{}`", spec.depvar)))?
            .clone();
        let mut complexity = BTreeMap::new();
        for name in &spec.dimensions {
            let source = if spec.instrumented && name.starts_with("eci:") {
                let iv = format!("iv_{name}");
                columns.get(&iv).ok_or_else(|| {
                    Error::Config(format!(
                        "instrumented column `{iv}` unavailable; run the instrument stage"
                    ))
                })?
            } else {
                columns.get(name).ok_or_else(|| {
                    Error::Config(format!("complexity column `{name}` unavailable"))
                })?
            };
            complexity.insert(name.clone(), source.clone());
        }
        let mut ctrl = BTreeMap::new();
        for name in &spec.controls {
            ctrl.insert(
                name.clone(),
                controls
                    .get(name)
                    .ok_or_else(|| Error::Config(format!("unknown control `{name}`")))?
                    .clone(),
            );
        }
        Ok(ColumnSet {
            y,
            complexity,
            controls: ctrl,
        })
    };

    let mut fits: Vec<RegressionFit> = Vec::new();
    for spec in &cfg.models {
        let panel = build_panel(spec, &column_set(spec)?)?;
        fits.push(ols(&panel)?);
    }

    // One table per dependent variable, columns in config order.
    let mut by_depvar: BTreeMap<&String, Vec<RegressionFit>> = BTreeMap::new();
    for (spec, fit) in cfg.models.iter().zip(&fits) {
        by_depvar.entry(&spec.depvar).or_default().push(fit.clone());
    }
    for (depvar, group) in &by_depvar {
        let stem = out.join("tables").join(depvar);
        table::emit_table(group, depvar, &stem)?;
        artifacts.record(&stem.with_extension("txt"))?;
        artifacts.record(&stem.with_extension("csv"))?;
    }

    // Selection, composite, correlations all use one common sample: the
    // union model's listwise-complete panel.
    let mut selected_id = None;
    if let Some(sel) = &cfg.selection {
        let member_ids: Vec<&String> =
            std::iter::once(&sel.baseline).chain(&sel.candidates).collect();
        let members: Vec<&ModelSpec> = member_ids
            .iter()
            .map(|id| cfg.models.iter().find(|m| &&m.id == id).expect("validated"))
            .collect();
        let depvar = &members[0].depvar;
        if members.iter().any(|m| &m.depvar != depvar) {
            return Err(Error::Config(
                "selection members must share a dependent variable".into(),
            ));
        }
        let mut union = ModelSpec {
            id: "union".into(),
            depvar: depvar.clone(),
            dimensions: vec![],
            interactions: vec![],
            controls: vec![],
            instrumented: false,
        };
        for m in &members {
            for d in &m.dimensions {
                if !union.dimensions.contains(d) {
                    union.dimensions.push(d.clone());
                }
            }
            for i in &m.interactions {
                if !union.interactions.contains(i) {
                    union.interactions.push(i.clone());
                }
            }
            for c in &m.controls {
                if !union.controls.contains(c) {
                    union.controls.push(c.clone());
                }
            }
        }
        let union_panel = build_panel(&union, &column_set(&union)?)?;
        let refit = |m: &ModelSpec| -> Result<RegressionFit> {
            let mut names = m.dimensions.clone();
            names.extend(m.interactions.iter().map(|f| ModelSpec::interaction_name(f)));
            names.extend(m.controls.iter().cloned());
            ols(&union_panel.subset(&m.id, &names)?)
        };
        let baseline_fit = refit(members[0])?;
        let candidate_fits: Vec<RegressionFit> = members[1..]
            .iter()
            .map(|m| refit(m))
            .collect::<Result<_>>()?;
        let report = select_multidimensional_model(&baseline_fit, &candidate_fits, sel.alpha)?;
        let path = out.join("selection.json");
        write_json(&path, &report)?;
        artifacts.record(&path)?;
        info!("selection: chose `{}`", report.selected_id);

        // Composite complexity from the winning model (if any qualified).
        if report.selected_id != report.baseline_id {
            let winner = members
                .iter()
                .find(|m| m.id == report.selected_id)
                .expect("selected id comes from members");
            let fit = refit(winner)?;
            let mut names = winner.dimensions.clone();
            names.extend(
                winner
                    .interactions
                    .iter()
                    .map(|f| ModelSpec::interaction_name(f)),
            );
            names.extend(winner.controls.iter().cloned());
            let panel = union_panel.subset(&winner.id, &names)?;
            let composite = composite_eci(&fit, &panel)?;
            let path = out.join("composite.csv");
            let mut w = std::io::BufWriter::new(
                std::fs::File::create(&path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?,
            );
            let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
            writeln!(w, "economy,period,composite").map_err(io_err)?;
            for ((economy, label), v) in &composite {
                writeln!(w, "{economy},{label},{v}").map_err(io_err)?;
            }
            drop(w);
            artifacts.record(&path)?;
        }
        selected_id = Some(report.selected_id);

        // Conditional correlations, evaluated on the union sample.
        if !cfg.correlations.is_empty() {
            let path = out.join("correlations.csv");
            let mut w = std::io::BufWriter::new(
                std::fs::File::create(&path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?,
            );
            let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
            writeln!(w, "a,b,controls,correlation,n_obs").map_err(io_err)?;
            for c in &cfg.correlations {
                let r = conditional_correlation(&union_panel, &c.a, &c.b, &c.controls)?;
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    c.a,
                    c.b,
                    c.controls.join("|"),
                    r.correlation,
                    r.n_obs
                )
                .map_err(io_err)?;
            }
            drop(w);
            artifacts.record(&path)?;
        }
    } else if !cfg.correlations.is_empty() {
        warn!("correlations configured without a selection block; skipped");
    }

    Ok(selected_id)
}

fn write_panel_csv(panel: &OutputPanel, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
    );
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    writeln!(out, "economy,activity,year,value").map_err(io_err)?;
    for r in &panel.records {
        writeln!(out, "{},{},{},{}", r.economy, r.activity, r.year, r.value).map_err(io_err)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("json serialization: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path.display().to_string(), e))
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    seed: u64,
    stages: &'a [String],
    files: &'a [ManifestEntry],
}

fn finish(
    cfg: &RunConfig,
    out: &Path,
    mut artifacts: Artifacts,
    stages: Vec<String>,
    selected_model: Option<String>,
) -> Result<RunReport> {
    // Echo the configuration as written (relative paths intact) so the
    // output tree is identical wherever the run happens to live on disk.
    let echo_path = out.join("config_echo.toml");
    std::fs::write(&echo_path, cfg.source_text.as_bytes())
        .map_err(|e| Error::io(echo_path.display().to_string(), e))?;
    artifacts.record(&echo_path)?;

    artifacts.entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest_path = out.join("manifest.json");
    write_json(
        &manifest_path,
        &Manifest {
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            stages: &stages,
            files: &artifacts.entries,
        },
    )?;
    Ok(RunReport {
        stages,
        files: artifacts.entries,
        selected_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::fixture::{write_fixture, FixtureOptions};

    #[test]
    fn small_fixture_runs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = write_fixture(dir.path(), &FixtureOptions::small(42)).unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        let report = run_pipeline(&cfg, Stage::Regress).unwrap();
        assert_eq!(
            report.stages,
            vec!["ingest", "specialize", "metrics", "instrument", "regress"]
        );
        assert!(cfg.out_dir.join("manifest.json").exists());
        assert!(cfg.out_dir.join("tables/growth.txt").exists());
        assert!(cfg.out_dir.join("selection.json").exists());
        // Every manifest entry must point at an existing file.
        for f in &report.files {
            assert!(cfg.out_dir.join(&f.path).exists(), "{} missing", f.path);
        }
    }

    #[test]
    fn metrics_only_run_writes_no_regression_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = write_fixture(dir.path(), &FixtureOptions::small(7)).unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        let report = run_pipeline(&cfg, Stage::Metrics).unwrap();
        assert_eq!(report.stages.last().unwrap(), "metrics");
        assert!(!cfg.out_dir.join("tables").exists());
        assert!(!cfg.out_dir.join("selection.json").exists());
    }
}
