//! Deterministic synthetic data generator: writes output CSVs, auxiliary
//! tables, a GDP series, and a ready-to-run TOML configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FixtureOptions {
    pub economies: usize,
    pub activities: usize,
    pub dimensions: usize,
    pub seed: u64,
}

impl FixtureOptions {
    pub fn small(seed: u64) -> Self {
        FixtureOptions {
            economies: 6,
            activities: 8,
            dimensions: 3,
            seed,
        }
    }
}

const PANELS: [(i32, i32); 2] = [(2000, 2010), (2011, 2021)];

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
    ))
}

/// Generate a complete fixture under `dir` and return the config path.
///
/// Economies carry a latent capability and activities a latent difficulty;
/// an economy emits output in an activity with probability rising in
/// capability and falling in difficulty, which yields the nested-ish
/// specialization structure the metrics expect. GDP growth loads on
/// capability, so complexity regressors carry real signal.
pub fn write_fixture(dir: &Path, opt: &FixtureOptions) -> Result<PathBuf> {
    if opt.economies < 4 || opt.activities < 4 || opt.dimensions == 0 {
        return Err(Error::Config(
            "fixture needs >= 4 economies, >= 4 activities, >= 1 dimension".into(),
        ));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);

    let economies: Vec<String> = (0..opt.economies).map(|i| format!("E{i:03}")).collect();
    let activities: Vec<String> = (0..opt.activities).map(|j| format!("A{j:04}")).collect();
    let capability: Vec<f64> = (0..opt.economies).map(|_| rng.gen_range(0.15..1.0)).collect();
    let difficulty: Vec<f64> = (0..opt.activities).map(|_| rng.gen::<f64>()).collect();
    let dim_names: Vec<String> = (0..opt.dimensions)
        .map(|d| match d {
            0 => "trade".to_string(),
            1 => "technology".to_string(),
            2 => "research".to_string(),
            other => format!("dim{other}"),
        })
        .collect();

    // Output CSVs: one per dimension, rows for each panel-start year.
    let io = |p: &Path, e: std::io::Error| Error::io(p.display().to_string(), e);
    for (d, name) in dim_names.iter().enumerate() {
        let path = dir.join(format!("{name}.csv"));
        let mut out = create(&path)?;
        writeln!(out, "economy,activity,year,value").map_err(|e| io(&path, e))?;
        for year in PANELS.iter().map(|(s, _)| *s) {
            for (i, economy) in economies.iter().enumerate() {
                for (j, activity) in activities.iter().enumerate() {
                    // A strongly nested base structure (capability beats
                    // difficulty) keeps the similarity spectrum well
                    // separated even on tiny fixtures; a small wobble makes
                    // the dimensions distinct but correlated.
                    let wobble = 0.2 * rng.gen::<f64>() - 0.1 + 0.02 * d as f64;
                    let base = if capability[i] > 0.75 * difficulty[j] { 0.9 } else { 0.08 };
                    let p = (base + wobble).clamp(0.02, 0.98);
                    if rng.gen::<f64>() < p {
                        let value = (1.0 + 99.0 * rng.gen::<f64>()) * 1e6;
                        writeln!(out, "{economy},{activity},{year},{value:.2}")
                            .map_err(|e| io(&path, e))?;
                    }
                }
            }
        }
    }

    // Auxiliary table (population, total exports) for every relevant year.
    let aux_path = dir.join("aux.csv");
    let mut aux = create(&aux_path)?;
    writeln!(aux, "economy,year,population,total_exports").map_err(|e| io(&aux_path, e))?;
    let populations: Vec<f64> = (0..opt.economies)
        .map(|_| 2e6 + 9.8e7 * rng.gen::<f64>())
        .collect();
    for year in PANELS.iter().flat_map(|(s, e)| [*s, *e]) {
        for (i, economy) in economies.iter().enumerate() {
            let exports = 2e9 * (1.0 + capability[i]) * (1.0 + 0.1 * rng.gen::<f64>());
            writeln!(aux, "{economy},{year},{:.0},{exports:.2}", populations[i])
                .map_err(|e| io(&aux_path, e))?;
        }
    }

    // GDP per capita: growth loads on capability plus noise.
    let gdp_path = dir.join("gdp_pc.csv");
    let mut gdp = create(&gdp_path)?;
    writeln!(gdp, "economy,year,value").map_err(|e| io(&gdp_path, e))?;
    for (i, economy) in economies.iter().enumerate() {
        let mut level = 1500.0 * (2.0 * capability[i]).exp();
        let mut year_level: Vec<(i32, f64)> = Vec::new();
        let mut years: Vec<i32> = PANELS.iter().flat_map(|(s, e)| [*s, *e]).collect();
        years.sort();
        years.dedup();
        let mut prev = years[0];
        for year in years {
            let gap = (year - prev) as f64;
            let rate = 0.01 + 0.03 * capability[i] + 0.01 * (rng.gen::<f64>() - 0.5);
            level *= (rate * gap).exp();
            year_level.push((year, level));
            prev = year;
        }
        for (year, v) in year_level {
            writeln!(gdp, "{economy},{year},{v:.4}").map_err(|e| io(&gdp_path, e))?;
        }
    }

    // Run configuration exercising every stage.
    let dim_blocks: String = dim_names
        .iter()
        .map(|n| format!("[[dimensions]]\nid = \"{n}\"\noutput = \"{n}.csv\"\n"))
        .collect::<Vec<_>>()
        .join("\n");
    let panel_blocks: String = PANELS
        .iter()
        .map(|(s, e)| format!("[[panels]]\nstart = {s}\nend = {e}\n"))
        .collect::<Vec<_>>()
        .join("\n");
    let d0 = &dim_names[0];
    let candidates: Vec<String> = dim_names.iter().map(|n| format!("\"m_{n}\"")).collect();
    let model_blocks: String = dim_names
        .iter()
        .map(|n| {
            format!(
                "[[models]]\nid = \"m_{n}\"\ndepvar = \"growth\"\n\
                 dimensions = [\"eci:{n}\"]\ncontrols = [\"log gdp\"]\n"
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let pair_block = if dim_names.len() >= 2 {
        let d1 = &dim_names[1];
        format!(
            "[[models]]\nid = \"m_pair\"\ndepvar = \"growth\"\n\
             dimensions = [\"eci:{d0}\", \"eci:{d1}\"]\n\
             interactions = [[\"eci:{d0}\", \"eci:{d1}\"]]\ncontrols = [\"log gdp\"]\n"
        )
    } else {
        String::new()
    };
    let pair_candidate = if dim_names.len() >= 2 {
        ", \"m_pair\""
    } else {
        ""
    };
    let correlation_block = if dim_names.len() >= 2 {
        format!(
            "[[correlations]]\na = \"eci:{d0}\"\nb = \"eci:{}\"\ncontrols = [\"log gdp\"]\n",
            dim_names[1]
        )
    } else {
        String::new()
    };
    let config_text = format!(
        "out_dir = \"out\"\nseed = {seed}\nmetrics = [\"eci\", \"fitness\", \"hhi\", \"entropy\"]\n\n\
         {dim_blocks}\n\
         aux = \"aux.csv\"\n\n\
         {panel_blocks}\n\
         [depvars.growth]\nkind = \"growth\"\nseries = \"gdp_pc.csv\"\n\n\
         [[controls]]\nname = \"log gdp\"\nseries = \"gdp_pc.csv\"\ntransform = \"log\"\nat = \"start\"\n\n\
         [instrument]\nneighbors = 3\n\n\
         [[models]]\nid = \"baseline\"\ndepvar = \"growth\"\ncontrols = [\"log gdp\"]\n\n\
         {model_blocks}\n{pair_block}\n\
         [selection]\nbaseline = \"baseline\"\ncandidates = [{candidates}{pair_candidate}]\nalpha = 0.05\n\n\
         {correlation_block}",
        seed = opt.seed,
        candidates = candidates.join(", "),
    );
    // `aux` is a top-level value and must precede table blocks in TOML; move it up.
    let config_text = {
        let mut lines: Vec<&str> = config_text.lines().collect();
        if let Some(pos) = lines.iter().position(|l| l.starts_with("aux = ")) {
            let line = lines.remove(pos);
            lines.insert(2, line);
        }
        lines.join("\n") + "\n"
    };
    let config_path = dir.join("run.toml");
    let mut cfg = create(&config_path)?;
    cfg.write_all(config_text.as_bytes())
        .map_err(|e| io(&config_path, e))?;
    Ok(config_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::config::RunConfig;

    #[test]
    fn fixture_config_validates() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = write_fixture(dir.path(), &FixtureOptions::small(42)).unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert_eq!(cfg.dimensions.len(), 3);
        assert_eq!(cfg.models.len(), 5); // baseline + 3 single + pair
        assert!(cfg.selection.is_some());
    }

    #[test]
    fn fixture_is_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        write_fixture(d1.path(), &FixtureOptions::small(9)).unwrap();
        write_fixture(d2.path(), &FixtureOptions::small(9)).unwrap();
        for name in ["trade.csv", "aux.csv", "gdp_pc.csv", "run.toml"] {
            assert_eq!(
                std::fs::read(d1.path().join(name)).unwrap(),
                std::fs::read(d2.path().join(name)).unwrap(),
                "{name} differs between identical seeds"
            );
        }
        let d3 = tempfile::tempdir().unwrap();
        write_fixture(d3.path(), &FixtureOptions::small(10)).unwrap();
        assert_ne!(
            std::fs::read(d1.path().join("trade.csv")).unwrap(),
            std::fs::read(d3.path().join("trade.csv")).unwrap()
        );
    }
}
