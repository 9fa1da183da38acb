//! Oblivious schedules run with polynomial iterates.
//!
//! The lifted models have entries affine in the instance parameters, so
//! each oracle answer raises the degree by at most one. The checks below
//! run after every step rather than at the end, so a violation names the
//! step where it happened.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::instances::{Family, InstanceError};
use crate::optimizers::{Executor, OptError, Optimizer};
use crate::polynomials::{Degree, MultiPoly, PolyError, PolyVector, UniPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("`{0}` is not oblivious and cannot be traced")]
    NotOblivious(String),
    #[error("degree invariant broken after step {step}: {detail}")]
    DegreeViolation { step: usize, detail: String },
    #[error("parameter {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("empty grid")]
    EmptyGrid,
    #[error(transparent)]
    Optimizer(#[from] OptError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Gradient descent with step `1/L` on `f(w) = eta w^2/2 - w`, from 0.
pub fn trace_gd_toy(k: usize, l: &BigRational) -> UniPoly {
    let inv_l = BigRational::one() / l;
    // w <- (1 - eta/L) w + 1/L
    let contraction = UniPoly::from_coeffs(vec![BigRational::one(), -inv_l.clone()]);
    let shift = UniPoly::constant(inv_l);
    let mut w = UniPoly::zero();
    for _ in 0..k {
        w = &(&contraction * &w) + &shift;
    }
    w
}

/// Polynomial iterates of one traced run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub optimizer: String,
    pub family: Family,
    pub steps: usize,
    pub seed: u64,
    /// Every tracked point; entry 0 is the reported iterate.
    pub points: Vec<PolyVector>,
    /// Largest total degree over all points after each step.
    pub degree_history: Vec<usize>,
    /// Cumulative component (or dual coordinate) touches after each step.
    pub touch_history: Vec<Vec<u64>>,
}

impl Trace {
    pub fn iterate(&self) -> &PolyVector {
        &self.points[0]
    }
}

fn degree(d: Degree) -> usize {
    d.finite().unwrap_or(0)
}

fn violation(step: usize, detail: String) -> TraceError {
    TraceError::DegreeViolation { step, detail }
}

/// Checks every tracked point after `step` steps, given cumulative
/// touches per component.
fn check_degrees(
    family: &Family,
    step: usize,
    points: &[PolyVector],
    touches: &[u64],
) -> Result<(), TraceError> {
    for (idx, p) in points.iter().enumerate() {
        let total = degree(p.max_total_degree());
        if total > step {
            return Err(violation(
                step,
                format!("point {idx} has total degree {total}"),
            ));
        }
        match family {
            Family::Fsm { n, .. } => {
                for j in 0..*n {
                    let dj = degree(p.max_degree_in(j));
                    if dj as u64 > touches[j] {
                        return Err(violation(
                            step,
                            format!(
                                "point {idx} has degree {dj} in eta_{j} after {} touches",
                                touches[j]
                            ),
                        ));
                    }
                }
            }
            Family::Smooth { .. } => {
                if let Some(e) = p.entries.iter().position(|e| !e.constant_term().is_zero()) {
                    return Err(violation(
                        step,
                        format!("point {idx} entry {e} has a nonzero constant term"),
                    ));
                }
            }
            Family::Rlm { n, .. } => {
                // The budget is on the degree in each sin(psi_j), summed over
                // pairs, bounded by the touches of that pair's coordinates.
                let mut sum = 0;
                for j in 0..n / 2 {
                    let dj = degree(p.max_degree_in(j));
                    let t = touches[2 * j] + touches[2 * j + 1];
                    if dj as u64 > t {
                        return Err(violation(
                            step,
                            format!(
                                "point {idx} has degree {dj} in sin(psi_{j}) after {t} touches"
                            ),
                        ));
                    }
                    sum += dj;
                }
                if sum > step {
                    return Err(violation(
                        step,
                        format!("point {idx} has per-variable degree sum {sum}"),
                    ));
                }
            }
            Family::Toy { .. } | Family::Chain { .. } => {}
        }
    }
    Ok(())
}

/// Runs `k` steps of an oblivious schedule on the lifted family,
/// checking the degree invariants after every step.
pub fn trace_oblivious(
    opt: &Optimizer,
    family: &Family,
    k: usize,
    seed: u64,
) -> Result<Trace, TraceError> {
    let schedule = opt
        .schedule()
        .ok_or_else(|| TraceError::NotOblivious(opt.name().to_string()))?;
    let model = family.lifted_model()?;
    let mut ex = Executor::new(&model, schedule, seed)?;
    let to_vectors = |pts: &[Vec<MultiPoly>]| -> Vec<PolyVector> {
        pts.iter().map(|p| PolyVector::new(p.clone(), k)).collect()
    };
    let mut degree_history = vec![0];
    let mut touch_history = vec![ex.log().touches.clone()];
    for step in 1..=k {
        ex.step()?;
        let pts = to_vectors(ex.points());
        check_degrees(family, step, &pts, &ex.log().touches)?;
        degree_history.push(
            pts.iter()
                .map(|p| degree(p.max_total_degree()))
                .max()
                .unwrap_or(0),
        );
        touch_history.push(ex.log().touches.clone());
    }
    Ok(Trace {
        optimizer: opt.name().to_string(),
        family: family.clone(),
        steps: k,
        seed,
        points: to_vectors(ex.points()),
        degree_history,
        touch_history,
    })
}

/// `max_p |trace(p) - w*(p)|` over the grid of swept parameters.
pub fn trace_sup_error(
    trace: &PolyVector,
    family: &Family,
    grid: &[f64],
) -> Result<f64, TraceError> {
    if grid.is_empty() {
        return Err(TraceError::EmptyGrid);
    }
    let (lo, hi) = family.parameter_range();
    let mut worst: f64 = 0.0;
    for &p in grid {
        if !(lo <= p && p <= hi) {
            return Err(TraceError::OutOfRange { value: p, lo, hi });
        }
        let w = trace.eval_f64(&family.parameter_point(p))?;
        let target = family.minimizer_at(p)?;
        let e = w
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(e);
    }
    Ok(worst)
}

/// First `k_max` GD and AGD iterates on the toy family with the target
/// `1/eta`, sampled on `points` equispaced parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Data {
    pub eta: Vec<f64>,
    /// `gd[k-1][i]` is the `k`-th GD iterate at `eta[i]`.
    pub gd: Vec<Vec<f64>>,
    pub agd: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub gd_polys: Vec<UniPoly>,
    pub agd_polys: Vec<UniPoly>,
}

impl Fig2Data {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["eta".to_string()];
        h.extend((1..=self.gd.len()).map(|k| format!("gd_k{k}")));
        h.extend((1..=self.agd.len()).map(|k| format!("agd_k{k}")));
        h.push("target".into());
        h
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.eta.len())
            .map(|i| {
                let mut r = vec![self.eta[i]];
                r.extend(self.gd.iter().map(|c| c[i]));
                r.extend(self.agd.iter().map(|c| c[i]));
                r.push(self.target[i]);
                r
            })
            .collect()
    }

    /// `max_i |iterate_k(eta_i) - 1/eta_i|` for GD and AGD.
    pub fn sup_errors(&self, k: usize) -> (f64, f64) {
        let err = |col: &[f64]| {
            col.iter()
                .zip(&self.target)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        (err(&self.gd[k - 1]), err(&self.agd[k - 1]))
    }
}

pub fn fig2_data(l: f64, mu: f64, k_max: usize, points: usize) -> Result<Fig2Data, TraceError> {
    use crate::optimizers::{make_optimizer, OptParams};
    if k_max == 0 || points < 2 {
        return Err(TraceError::EmptyGrid);
    }
    let family = Family::Toy { mu, l };
    let params = OptParams {
        l: Some(l),
        mu: Some(mu),
        n: Some(1),
        ..Default::default()
    };
    let polys = |name: &str| -> Result<Vec<UniPoly>, TraceError> {
        let opt = make_optimizer(name, &params)?;
        (1..=k_max)
            .map(|k| {
                let t = trace_oblivious(&opt, &family, k, 0)?;
                Ok(t.iterate().entries[0].to_uni().expect("one indeterminate"))
            })
            .collect()
    };
    let gd_polys = polys("gd")?;
    let agd_polys = polys("agd")?;
    let eta = family.grid(points);
    let sample = |ps: &[UniPoly]| {
        ps.iter()
            .map(|p| eta.iter().map(|&x| p.eval_f64(x)).collect())
            .collect()
    };
    Ok(Fig2Data {
        target: eta.iter().map(|x| 1.0 / x).collect(),
        gd: sample(&gd_polys),
        agd: sample(&agd_polys),
        eta,
        gd_polys,
        agd_polys,
    })
}
