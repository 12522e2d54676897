//! The fitness-complexity fixed point: coupled nonlinear iteration over a
//! binary specialization matrix, with per-step mean normalization.

use std::collections::BTreeMap;

use log::warn;

use crate::error::{Error, Result};
use crate::metrics::vector::{ComplexityVector, Metric, Normalization};
use crate::specialization::SpecializationMatrix;

/// Floor applied to fitness values so 1/F stays finite.
pub const FITNESS_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FitnessOutcome {
    /// Raw economy fitness, mean 1.
    pub fitness: ComplexityVector,
    /// Raw activity complexity, mean 1.
    pub activity_complexity: ComplexityVector,
    /// Natural log of the economy fitness (the regression-ready variant).
    pub log_fitness: ComplexityVector,
    pub iterations: usize,
}

/// Iterate F~_c = sum_p M_cp Q_p and Q~_p = 1 / sum_c M_cp (1/F_c), each
/// renormalized by its mean every step, from F = Q = 1. Stops once both
/// vectors move less than `tol` in max norm, so the returned pair satisfies
/// both equations to `tol`.
pub fn fitness(
    spec: &SpecializationMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<FitnessOutcome> {
    if tol <= 0.0 {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    if spec.row_marginals.iter().any(|&d| d < 1.0) || spec.col_marginals.iter().any(|&u| u < 1.0)
    {
        return Err(Error::Degenerate(
            "specialization matrix must be pruned (all marginals >= 1)".into(),
        ));
    }

    let m = &spec.entries;
    let n = m.nrows();
    let k = m.ncols();
    let mut f = vec![1.0f64; n];
    let mut q = vec![1.0f64; k];
    let mut clamp_warned = false;
    let mut residual = f64::INFINITY;

    for iter in 0..max_iter {
        let (f_next, q_next) = step(spec, &f, &q, &mut clamp_warned);
        let df = max_abs_diff(&f_next, &f);
        let dq = max_abs_diff(&q_next, &q);
        f = f_next;
        q = q_next;
        residual = df.max(dq);
        if residual < tol {
            return Ok(build_outcome(spec, f, q, iter + 1));
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

/// One Jacobi update of the coupled equations, both sides computed from the
/// previous iterate, each renormalized to mean 1.
fn step(
    spec: &SpecializationMatrix,
    f: &[f64],
    q: &[f64],
    clamp_warned: &mut bool,
) -> (Vec<f64>, Vec<f64>) {
    let m = &spec.entries;
    let n = m.nrows();
    let k = m.ncols();

    let mut f_t = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..k {
            s += m[(i, j)] * q[j];
        }
        f_t[i] = s;
    }
    let mut q_t = vec![0.0; k];
    for j in 0..k {
        let mut s = 0.0;
        for i in 0..n {
            s += m[(i, j)] / f[i];
        }
        q_t[j] = 1.0 / s;
    }

    normalize_mean(&mut f_t);
    normalize_mean(&mut q_t);
    for v in f_t.iter_mut() {
        if *v < FITNESS_CLAMP {
            if !*clamp_warned {
                warn!(
                    "fitness below {FITNESS_CLAMP:.0e} clamped during iteration (dimension {})",
                    spec.dimension
                );
                *clamp_warned = true;
            }
            *v = FITNESS_CLAMP;
        }
    }
    (f_t, q_t)
}

/// The fixed-point residual of a candidate (F, Q) pair: how far one more
/// update moves each vector, in max norm. Exposed for verification.
pub fn fixed_point_residual(spec: &SpecializationMatrix, f: &[f64], q: &[f64]) -> f64 {
    let mut warned = true;
    let (f_next, q_next) = step(spec, f, q, &mut warned);
    max_abs_diff(&f_next, f).max(max_abs_diff(&q_next, q))
}

fn normalize_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x /= mean;
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn build_outcome(
    spec: &SpecializationMatrix,
    f: Vec<f64>,
    q: Vec<f64>,
    iterations: usize,
) -> FitnessOutcome {
    let f_scores: BTreeMap<String, f64> =
        spec.economies.iter().cloned().zip(f.iter().copied()).collect();
    let q_scores: BTreeMap<String, f64> = spec
        .activities
        .iter()
        .cloned()
        .zip(q.iter().copied())
        .collect();
    let fitness = ComplexityVector::new(
        spec.dimension.clone(),
        spec.period,
        Metric::Fitness,
        f_scores,
        Normalization::Raw,
    );
    let log_fitness = fitness.log().expect("fitness values are clamped positive");
    let activity_complexity = ComplexityVector::new(
        spec.dimension.clone(),
        spec.period,
        Metric::Fitness,
        q_scores,
        Normalization::Raw,
    );
    FitnessOutcome {
        fitness,
        activity_complexity,
        log_fitness,
        iterations,
    }
}
