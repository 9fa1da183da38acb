//! Analyses shared by the commands: bound sandwiches, envelope audits and
//! the log-linear fits behind the convergence figure.

use rayon::prelude::*;
use serde::Serialize;

use crate::approx_bounds::{
    fsm_rate_envelope, fsm_value_envelope, l1_lb, l2_weighted_lb, maxnorm_lb,
    rlm_distance_envelope, sqrt_ratio, RateEnvelope,
};
use crate::approx_oracle::{best_l1, best_uniform, best_weighted_l2};
use crate::instances::{nesterov_chain, Family, Instance};
use crate::optimizers::{expected_error_curve, make_optimizer, run, Metric, OptParams, Optimizer};

use super::config::Fig1Section;
use super::HarnessError;

// ---------------------------------------------------------------------------
// sandwiches

/// One comparison of a brute-force approximation error with its
/// closed-form lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub norm: &'static str,
    pub case: String,
    pub k: u32,
    pub lower: f64,
    pub achieved: f64,
}

impl SandwichRow {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.achieved >= self.lower * (1.0 - rel_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichOptions {
    pub k_max: u32,
    pub uniform_grid: usize,
    pub l1_grid: usize,
    /// Multiplies the uniform lower bound. Anything other than 1 corrupts
    /// the bound, which the check must notice.
    pub maxnorm_scale: f64,
}

/// Targets `1/(x + c)` on `[a, b]` for the uniform norm.
pub const UNIFORM_CASES: [(&str, f64, f64, f64); 2] = [
    ("toy kappa=4", 1.0, 4.0, 0.0),
    ("toy kappa=100", 1.0, 100.0, 0.0),
];

/// `(L, mu, alpha)` for the L1 norm: target `1/(x + alpha)` on
/// `[-(L-mu)/2, (L-mu)/2]`. The scalar family after centering, the
/// finite-sum family at `n = 8, kappa = 100` (the shift is the sum of the
/// other `n - 1` parameters at their lower end plus the diagonal), and the
/// regularized family at `lambda n = 1`.
pub fn l1_cases() -> [(&'static str, f64, f64, f64); 3] {
    [
        ("toy kappa=4", 4.0, 1.0, 2.5),
        (
            "fsm n=8 kappa=100",
            100.0,
            1.0,
            0.5 * (8.0 * 101.0 - 7.0 * 99.0),
        ),
        ("rlm lambda*n=1", 2.0, 0.0, 2.0),
    ]
}

pub const L2_ALPHAS: [f64; 3] = [-0.9, -0.5, -0.1];

enum Job {
    Uniform(usize, u32),
    L1(usize, u32),
    L2(usize, u32),
}

pub fn sandwich_rows(opts: &SandwichOptions) -> Result<Vec<SandwichRow>, HarnessError> {
    let ks = 0..=opts.k_max;
    let mut jobs = Vec::new();
    for i in 0..UNIFORM_CASES.len() {
        jobs.extend(ks.clone().map(|k| Job::Uniform(i, k)));
    }
    for i in 0..l1_cases().len() {
        jobs.extend(ks.clone().map(|k| Job::L1(i, k)));
    }
    for i in 0..L2_ALPHAS.len() {
        jobs.extend(ks.clone().map(|k| Job::L2(i, k)));
    }
    jobs.par_iter()
        .map(|job| -> Result<SandwichRow, HarnessError> {
            Ok(match *job {
                Job::Uniform(i, k) => {
                    let (name, a, b, c) = UNIFORM_CASES[i];
                    let fit = best_uniform(|x| 1.0 / (x + c), a, b, k as usize, opts.uniform_grid)?;
                    SandwichRow {
                        norm: "uniform",
                        case: name.into(),
                        k,
                        lower: opts.maxnorm_scale * maxnorm_lb(a, b, c, k)?,
                        achieved: fit.error,
                    }
                }
                Job::L1(i, k) => {
                    let (name, l, mu, alpha) = l1_cases()[i];
                    let h = 0.5 * (l - mu);
                    let fit = best_l1(|x| 1.0 / (x + alpha), -h, h, k as usize, opts.l1_grid)?;
                    SandwichRow {
                        norm: "l1",
                        case: name.into(),
                        k,
                        lower: l1_lb(l, mu, alpha, k)?,
                        achieved: fit.error,
                    }
                }
                Job::L2(i, k) => {
                    let alpha = L2_ALPHAS[i];
                    SandwichRow {
                        norm: "weighted_l2",
                        case: format!("alpha={alpha}"),
                        k,
                        lower: l2_weighted_lb(alpha, k)?,
                        achieved: best_weighted_l2(alpha, k as usize)?.error,
                    }
                }
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// envelopes

/// Lower envelope on the worst-case error, as a function of cumulative
/// component touches.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    /// `prefactor * fsm_ratio^(t/n)`.
    FiniteSum {
        kappa: f64,
        n: usize,
        prefactor: f64,
    },
    Rate(RateEnvelope),
    /// Uniform Chebyshev bound for `1/eta` on `[mu, L]` at degree `t`.
    Chebyshev {
        mu: f64,
        l: f64,
    },
    /// Nothing to check, e.g. a finite sum with `kappa = 1`.
    Zero,
}

impl Envelope {
    pub fn at(&self, touches: u64) -> f64 {
        match self {
            Envelope::FiniteSum {
                kappa,
                n,
                prefactor,
            } => fsm_rate_envelope(*kappa, *n, touches as usize, *prefactor).unwrap_or(0.0),
            Envelope::Rate(r) => r.at(touches as f64),
            Envelope::Chebyshev { mu, l } => {
                maxnorm_lb(*mu, *l, 0.0, touches as u32).unwrap_or(0.0)
            }
            Envelope::Zero => 0.0,
        }
    }
}

/// The envelope each family is audited against and the error it bounds.
pub fn family_envelope(
    family: &Family,
    prefactor: Option<f64>,
) -> Result<(Envelope, Metric), HarnessError> {
    match *family {
        Family::Fsm { n, l, mu, r, .. } => {
            if l == mu {
                return Ok((Envelope::Zero, Metric::Suboptimality));
            }
            let prefactor = match prefactor {
                Some(p) => p,
                None => fsm_value_envelope(l, mu, n, r)?.prefactor,
            };
            Ok((
                Envelope::FiniteSum {
                    kappa: l / mu,
                    n,
                    prefactor,
                },
                Metric::Suboptimality,
            ))
        }
        Family::Rlm { n, lambda, .. } => {
            let mut env = rlm_distance_envelope(n, lambda)?;
            if let Some(p) = prefactor {
                env.prefactor = p;
            }
            Ok((Envelope::Rate(env), Metric::Distance))
        }
        Family::Toy { mu, l } if l > mu => Ok((Envelope::Chebyshev { mu, l }, Metric::Distance)),
        Family::Toy { .. } => Ok((Envelope::Zero, Metric::Distance)),
        _ => Err(HarnessError::Config(format!(
            "no envelope is defined for the {} family",
            family.name()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub k: usize,
    pub touches: u64,
    pub mean: f64,
    pub stderr: f64,
    pub worst_param: f64,
    pub envelope: f64,
}

impl AuditRow {
    /// Mean less three standard errors.
    pub fn empirical(&self) -> f64 {
        self.mean - 3.0 * self.stderr
    }

    pub fn margin(&self) -> f64 {
        self.empirical() - self.envelope
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub optimizer: String,
    pub metric: Metric,
    pub rows: Vec<AuditRow>,
}

impl Audit {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.margin() < 0.0).count()
    }
}

pub fn envelope_audit(
    opt: &Optimizer,
    family: &Family,
    grid: &[f64],
    iterations: usize,
    seeds: usize,
    prefactor: Option<f64>,
) -> Result<Audit, HarnessError> {
    let (env, metric) = family_envelope(family, prefactor)?;
    let c = expected_error_curve(opt, family, grid, iterations, seeds, metric)?;
    let rows = (0..=iterations)
        .map(|k| AuditRow {
            k,
            touches: c.touches[k],
            mean: c.worst_mean[k],
            stderr: c.worst_stderr[k],
            worst_param: c.worst_param[k],
            envelope: env.at(c.touches[k]),
        })
        .collect();
    Ok(Audit {
        optimizer: opt.name().to_string(),
        metric,
        rows,
    })
}

// ---------------------------------------------------------------------------
// convergence figure

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Least squares for `ln y = intercept + slope k` over `k` in
/// `[start, end]`, skipping values at or below `floor`.
pub fn log_linear_fit(y: &[f64], start: usize, end: usize, floor: f64) -> Option<LogLinearFit> {
    let pts: Vec<(f64, f64)> = (start..=end.min(y.len().saturating_sub(1)))
        .filter(|&k| y[k] > floor && y[k].is_finite())
        .map(|k| (k as f64, y[k].ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LogLinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Curve {
    pub name: String,
    pub suboptimality: Vec<f64>,
    /// Fit over the full window.
    pub fit: Option<LogLinearFit>,
    /// Fit over the slope window.
    pub slope_fit: Option<LogLinearFit>,
    /// First iteration with error at most `1e-10`.
    pub crossing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Result {
    pub kappa: f64,
    pub d: usize,
    /// `2 ln((sqrt(kappa)-1)/(sqrt(kappa)+1))`, the per-step log-rate of an
    /// accelerated method in function value.
    pub target_slope: f64,
    pub curves: Vec<Fig1Curve>,
}

impl Fig1Result {
    pub fn curve(&self, name: &str) -> Option<&Fig1Curve> {
        self.curves.iter().find(|c| c.name == name)
    }
}

pub const FIG1_METHODS: [&str; 4] = ["gd", "agd", "hb", "lbfgs"];

pub fn fig1_analysis(cfg: &Fig1Section) -> Result<Fig1Result, HarnessError> {
    let l = cfg.kappa * cfg.mu;
    let inst = Instance::Quadratic(nesterov_chain(cfg.d, l, cfg.mu)?);
    let params = OptParams {
        memory: Some(cfg.memory),
        ..OptParams::for_instance(&inst)
    };
    let curves = FIG1_METHODS
        .par_iter()
        .map(|name| -> Result<Fig1Curve, HarnessError> {
            let opt = make_optimizer(name, &params)?;
            let rec = run(&opt, &inst, cfg.iterations, 0)?;
            let y = rec.suboptimality;
            Ok(Fig1Curve {
                name: name.to_string(),
                fit: log_linear_fit(&y, cfg.fit_start, cfg.fit_end, cfg.floor),
                slope_fit: log_linear_fit(&y, cfg.fit_start, cfg.slope_end, cfg.floor),
                crossing: y.iter().position(|&e| e <= 1e-10),
                suboptimality: y,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Fig1Result {
        kappa: cfg.kappa,
        d: cfg.d,
        target_slope: 2.0 * sqrt_ratio(cfg.kappa).ln(),
        curves,
    })
}
