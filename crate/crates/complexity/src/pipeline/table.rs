//! Regression table rendering: one aligned text table plus one lossless CSV
//! per fit set.

use std::io::Write;
use std::path::Path;

use crate::econ::RegressionFit;
use crate::error::{Error, Result};

/// Significance stars: * p<0.1, ** p<0.05, *** p<0.01.
fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

fn is_period_dummy(name: &str) -> bool {
    name.starts_with("period:")
}

/// Row order: regressors in the order they first appear across fits
/// (complexity terms and controls), then the constant. Period dummies are
/// estimated but summarized in the notes line rather than listed.
fn term_rows(fits: &[RegressionFit]) -> Vec<String> {
    let mut rows: Vec<String> = Vec::new();
    for fit in fits {
        for name in &fit.regressor_names {
            if !rows.contains(name) {
                rows.push(name.clone());
            }
        }
    }
    rows.push("intercept".into());
    rows
}

/// Write `<stem>.txt` (3-decimal, starred, SEs in parentheses) and
/// `<stem>.csv` (full precision, long format) for fits sharing a dependent
/// variable.
pub fn emit_table(fits: &[RegressionFit], title: &str, stem: &Path) -> Result<()> {
    if fits.is_empty() {
        return Err(Error::Estimation("cannot emit a table of zero fits".into()));
    }
    let rows = term_rows(fits);

    // Text table.
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(fits.iter().map(|f| f.spec_id.clone()));
    grid.push(header);
    for term in &rows {
        let label = if term == "intercept" { "Constant" } else { term };
        let mut coef_row = vec![label.to_string()];
        let mut se_row = vec![String::new()];
        for fit in fits {
            match (fit.coefficient(term), fit.std_errors.get(term)) {
                (Some(b), Some(se)) => {
                    coef_row.push(format!("{b:.3}{}", stars(fit.p_values[term])));
                    se_row.push(format!("({se:.3})"));
                }
                _ => {
                    coef_row.push(String::new());
                    se_row.push(String::new());
                }
            }
        }
        grid.push(coef_row);
        grid.push(se_row);
    }
    let mut push_stat = |label: &str, values: Vec<String>| {
        let mut row = vec![label.to_string()];
        row.extend(values);
        grid.push(row);
    };
    push_stat(
        "Observations",
        fits.iter().map(|f| f.n_obs.to_string()).collect(),
    );
    push_stat(
        "R2",
        fits.iter().map(|f| format!("{:.3}", f.r_squared)).collect(),
    );
    push_stat(
        "Adjusted R2",
        fits.iter()
            .map(|f| format!("{:.3}", f.adj_r_squared))
            .collect(),
    );

    let widths: Vec<usize> = (0..grid[0].len())
        .map(|c| grid.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let txt_path = stem.with_extension("txt");
    let mut txt = std::io::BufWriter::new(
        std::fs::File::create(&txt_path)
            .map_err(|e| Error::io(txt_path.display().to_string(), e))?,
    );
    let io_err = |e: std::io::Error| Error::io(txt_path.display().to_string(), e);
    writeln!(txt, "{title}").map_err(io_err)?;
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    writeln!(txt, "{}", "=".repeat(total)).map_err(io_err)?;
    for (i, row) in grid.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                if c == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        writeln!(txt, "{}", line.join("  ").trim_end()).map_err(io_err)?;
        if i == 0 {
            writeln!(txt, "{}", "-".repeat(total)).map_err(io_err)?;
        }
    }
    writeln!(txt, "{}", "-".repeat(total)).map_err(io_err)?;
    writeln!(
        txt,
        "Period fixed effects included in every column. \
         Standard errors in parentheses. * p<0.1, ** p<0.05, *** p<0.01."
    )
    .map_err(io_err)?;

    // Lossless CSV, long format.
    let csv_path = stem.with_extension("csv");
    let mut csv = std::io::BufWriter::new(
        std::fs::File::create(&csv_path)
            .map_err(|e| Error::io(csv_path.display().to_string(), e))?,
    );
    let io_err = |e: std::io::Error| Error::io(csv_path.display().to_string(), e);
    writeln!(csv, "model,term,coefficient,std_error,p_value").map_err(io_err)?;
    for fit in fits {
        for (term, b) in &fit.coefficients {
            if is_period_dummy(term) {
                continue;
            }
            writeln!(
                csv,
                "{},{},{},{},{}",
                fit.spec_id,
                escape(term),
                b,
                fit.std_errors[term],
                fit.p_values[term]
            )
            .map_err(io_err)?;
        }
        writeln!(csv, "{},Observations,{},,", fit.spec_id, fit.n_obs).map_err(io_err)?;
        writeln!(csv, "{},R2,{},,", fit.spec_id, fit.r_squared).map_err(io_err)?;
        writeln!(csv, "{},AdjustedR2,{},,", fit.spec_id, fit.adj_r_squared).map_err(io_err)?;
    }
    Ok(())
}

fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
