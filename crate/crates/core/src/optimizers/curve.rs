use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instances::Family;

use super::{run, OptError, Optimizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Suboptimality,
    Distance,
}

/// Worst case over a parameter grid of the Monte-Carlo mean error.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub optimizer: String,
    pub metric: Metric,
    pub seeds: usize,
    /// Per step, the largest mean over the grid.
    pub worst_mean: Vec<f64>,
    /// Standard error of that mean (0 for a single seed).
    pub worst_stderr: Vec<f64>,
    /// Grid parameter attaining the maximum.
    pub worst_param: Vec<f64>,
    /// Cumulative component gradient evaluations after each step.
    pub touches: Vec<u64>,
    /// Mean curve for every grid parameter, in grid order.
    pub per_param_mean: Vec<Vec<f64>>,
}

/// Mean and standard error. The mean is accumulated around the first
/// sample, so identical samples give back that sample exactly.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let x0 = xs[0];
    let mean = x0 + xs.iter().map(|x| x - x0).sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every `(parameter, seed)` cell in parallel and aggregates in a
/// fixed order, so the result does not depend on the worker count.
pub fn expected_error_curve(
    opt: &Optimizer,
    family: &Family,
    grid: &[f64],
    iterations: usize,
    seeds: usize,
    metric: Metric,
) -> Result<Curve, OptError> {
    if grid.is_empty() {
        return Err(OptError::EmptyGrid);
    }
    if seeds == 0 {
        return Err(OptError::NoSeeds);
    }
    let instances = grid
        .iter()
        .map(|&p| family.instantiate(p))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|g| (0..seeds as u64).map(move |s| (g, s)))
        .collect();
    let records = cells
        .par_iter()
        .map(|&(g, s)| run(opt, &instances[g], iterations, s))
        .collect::<Result<Vec<_>, _>>()?;
    let touches = records[0].touches.clone();
    let mut curve = Curve {
        optimizer: opt.name().to_string(),
        metric,
        seeds,
        worst_mean: vec![f64::NEG_INFINITY; iterations + 1],
        worst_stderr: vec![0.0; iterations + 1],
        worst_param: vec![grid[0]; iterations + 1],
        touches,
        per_param_mean: Vec::with_capacity(grid.len()),
    };
    let mut samples = vec![0.0; seeds];
    for (g, chunk) in records.chunks(seeds).enumerate() {
        let mut means = Vec::with_capacity(iterations + 1);
        for k in 0..=iterations {
            for (x, r) in samples.iter_mut().zip(chunk) {
                *x = match metric {
                    Metric::Suboptimality => r.suboptimality[k],
                    Metric::Distance => r.distance[k],
                };
            }
            let (m, se) = mean_stderr(&samples);
            if m > curve.worst_mean[k] {
                curve.worst_mean[k] = m;
                curve.worst_stderr[k] = se;
                curve.worst_param[k] = grid[g];
            }
            means.push(m);
        }
        curve.per_param_mean.push(means);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::{make_optimizer, OptParams};

    fn toy_gd() -> (Optimizer, Family) {
        let p = OptParams {
            l: Some(4.0),
            mu: Some(1.0),
            n: Some(1),
            ..Default::default()
        };
        (
            make_optimizer("gd", &p).unwrap(),
            Family::Toy { mu: 1.0, l: 4.0 },
        )
    }

    #[test]
    fn deterministic_schedule_ignores_seed_count() {
        let (gd, fam) = toy_gd();
        let grid = fam.grid(9);
        let a = expected_error_curve(&gd, &fam, &grid, 30, 1, Metric::Distance).unwrap();
        let b = expected_error_curve(&gd, &fam, &grid, 30, 100, Metric::Distance).unwrap();
        assert_eq!(a.worst_mean, b.worst_mean);
        assert!(b.worst_stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn worst_dominates_each_parameter() {
        let (gd, fam) = toy_gd();
        let grid = fam.grid(5);
        let c = expected_error_curve(&gd, &fam, &grid, 20, 1, Metric::Suboptimality).unwrap();
        for per in &c.per_param_mean {
            assert!(per.iter().zip(&c.worst_mean).all(|(a, w)| a <= w));
        }
        assert!(expected_error_curve(&gd, &fam, &[], 5, 1, Metric::Distance).is_err());
        assert!(expected_error_curve(&gd, &fam, &grid, 5, 0, Metric::Distance).is_err());
    }
}
