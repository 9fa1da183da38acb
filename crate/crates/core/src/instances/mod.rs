//! Parametrised quadratic hard instances.
//!
//! Each family is built by one generic constructor over [`Scalar`], so the
//! same code yields a numeric model (`f64` parameters) and a symbolic lift
//! (`MultiPoly` parameters) whose entries are affine in the indeterminates.
//! Closed-form minimizers and optimal values accompany every numeric
//! instance.

mod matrix;

pub use matrix::SymMatrix;

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polynomials::{MultiPoly, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("family `{0}` has no symbolic parameter")]
    NotParametrised(&'static str),
}

fn domain<T>(msg: impl Into<String>) -> Result<T, InstanceError> {
    Err(InstanceError::Domain(msg.into()))
}

/// `f_j(w) = 1/2 w^T H_j w - b_j^T w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component<S> {
    pub hessian: SymMatrix<S>,
    pub linear: Vec<S>,
}

/// Which oracle procedures a model answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleFamily {
    /// First-order and steepest coordinate-descent queries on components.
    Primal,
    /// Coordinate queries on a single dual objective.
    Dual,
}

/// Average of quadratic components, `F = (1/n) sum_j f_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel<S: Scalar> {
    pub ctx: S::Ctx,
    pub dim: usize,
    pub family: OracleFamily,
    pub components: Vec<Component<S>>,
}

impl<S: Scalar> QuadraticModel<S> {
    pub fn n(&self) -> usize {
        self.components.len()
    }

    /// `H_j w - b_j`.
    pub fn component_gradient(&self, j: usize, w: &[S]) -> Vec<S> {
        let c = &self.components[j];
        c.hessian
            .matvec(&self.ctx, w)
            .into_iter()
            .zip(&c.linear)
            .map(|(hw, b)| hw.sub(b))
            .collect()
    }

    /// Numeric image under an entrywise map (typically evaluation at a
    /// parameter point).
    pub fn map<T: Scalar>(&self, ctx: T::Ctx, f: &impl Fn(&S) -> T) -> QuadraticModel<T> {
        QuadraticModel {
            ctx,
            dim: self.dim,
            family: self.family,
            components: self
                .components
                .iter()
                .map(|c| Component {
                    hessian: c.hessian.map(f),
                    linear: c.linear.iter().map(f).collect(),
                })
                .collect(),
        }
    }
}

impl QuadraticModel<f64> {
    /// Average Hessian applied to `v`.
    pub fn hessian_apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let inv = 1.0 / self.n() as f64;
        for c in &self.components {
            for (o, x) in out.iter_mut().zip(c.hessian.matvec(&(), v)) {
                *o += inv * x;
            }
        }
        out
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = self.hessian_apply(w);
        let inv = 1.0 / self.n() as f64;
        for c in &self.components {
            for (gi, b) in g.iter_mut().zip(&c.linear) {
                *gi -= inv * b;
            }
        }
        g
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        let hw = self.hessian_apply(w);
        let inv = 1.0 / self.n() as f64;
        let lin: f64 = self
            .components
            .iter()
            .map(|c| inv * dot(&c.linear, w))
            .sum();
        0.5 * dot(w, &hw) - lin
    }

    /// `F(w) - F(w*) = 1/2 (w - w*)^T H (w - w*)`, exact for quadratics and
    /// free of the cancellation in `F(w) - F*`.
    pub fn excess(&self, w: &[f64], minimizer: &[f64]) -> f64 {
        let e: Vec<f64> = w.iter().zip(minimizer).map(|(a, b)| a - b).collect();
        0.5 * dot(&e, &self.hessian_apply(&e))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

// ---------------------------------------------------------------------------
// generic constructors

/// `f(w) = eta w^2 / 2 - w`.
pub fn toy_model<S: Scalar>(ctx: S::Ctx, eta: S) -> QuadraticModel<S> {
    let one = S::from_f64(&ctx, 1.0);
    QuadraticModel {
        dim: 1,
        family: OracleFamily::Primal,
        components: vec![Component {
            hessian: SymMatrix::ScaledIdentity { dim: 1, scale: eta },
            linear: vec![one],
        }],
        ctx,
    }
}

/// Component `j` has the leading block `[[(L+mu)/2, eta_j], [eta_j, (L+mu)/2]]`
/// and `mu` on the rest of the diagonal; every component shares
/// `b = (R mu/sqrt2, R mu/sqrt2, 0, ..)`.
pub fn fsm_model<S: Scalar>(
    ctx: S::Ctx,
    etas: Vec<S>,
    l: f64,
    mu: f64,
    r: f64,
    d: usize,
) -> QuadraticModel<S> {
    let mid = S::from_f64(&ctx, 0.5 * (l + mu));
    let q = r * mu / SQRT_2;
    let mut linear = vec![S::zero(&ctx); d];
    linear[0] = S::from_f64(&ctx, q);
    linear[1] = S::from_f64(&ctx, q);
    let components = etas
        .into_iter()
        .map(|eta| Component {
            hessian: SymMatrix::Blocks {
                blocks: vec![[mid.clone(), eta, mid.clone()]],
                tail: vec![S::from_f64(&ctx, mu); d - 2],
            },
            linear: linear.clone(),
        })
        .collect();
    QuadraticModel {
        dim: d,
        family: OracleFamily::Primal,
        components,
        ctx,
    }
}

/// `g(x) = (eta/2) |x|^2 - R eta x_1`.
pub fn smooth_model<S: Scalar>(ctx: S::Ctx, eta: S, r: f64, d: usize) -> QuadraticModel<S> {
    let mut linear = vec![S::zero(&ctx); d];
    linear[0] = eta.scale(r);
    QuadraticModel {
        dim: d,
        family: OracleFamily::Primal,
        components: vec![Component {
            hessian: SymMatrix::ScaledIdentity { dim: d, scale: eta },
            linear,
        }],
        ctx,
    }
}

/// Dual objective `D(a) = 1/2 a^T Q a - (1/n) 1^T a` with
/// `Q = (1/n)(I + G/(lambda n))`, `G` the Gram matrix of the data vectors.
/// Only `sin(psi_j)` enters `Q`, once per coordinate pair.
pub fn rlm_dual_model<S: Scalar>(
    ctx: S::Ctx,
    sines: Vec<S>,
    lambda: f64,
    n: usize,
) -> QuadraticModel<S> {
    let nf = n as f64;
    let ln = lambda * nf;
    let diag = S::from_f64(&ctx, (1.0 + 1.0 / ln) / nf);
    let blocks = sines
        .into_iter()
        .map(|s| [diag.clone(), s.scale(1.0 / (ln * nf)), diag.clone()])
        .collect();
    QuadraticModel {
        dim: n,
        family: OracleFamily::Dual,
        components: vec![Component {
            hessian: SymMatrix::Blocks {
                blocks,
                tail: Vec::new(),
            },
            linear: vec![S::from_f64(&ctx, 1.0 / nf); n],
        }],
        ctx,
    }
}

/// Chain quadratic
/// `F(w) = (mu(kappa-1)/8)(w_1^2 + sum (w_i - w_{i+1})^2 - 2 w_1) + (mu/2)|w|^2`.
///
/// Its Hessian is `(mu(kappa-1)/4) A + mu I` with `A = tridiag(-1, 2, -1)`
/// except `A_dd = 1`; the spectrum lies strictly inside `[mu, L]` and
/// fills it as `d` grows.
pub fn chain_model(d: usize, l: f64, mu: f64) -> QuadraticModel<f64> {
    let kappa = l / mu;
    let c = mu * (kappa - 1.0) / 4.0;
    let mut diag = vec![2.0 * c + mu; d];
    diag[d - 1] = c + mu;
    let mut linear = vec![0.0; d];
    linear[0] = c;
    QuadraticModel {
        ctx: (),
        dim: d,
        family: OracleFamily::Primal,
        components: vec![Component {
            hessian: SymMatrix::Tridiagonal {
                diag,
                off: vec![-c; d - 1],
            },
            linear,
        }],
    }
}

// ---------------------------------------------------------------------------
// numeric instances

/// Serializable description from which an instance can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum InstanceDescription {
    Toy {
        eta: f64,
        mu: f64,
        l: f64,
    },
    Fsm {
        etas: Vec<f64>,
        l: f64,
        mu: f64,
        r: f64,
        d: usize,
    },
    Smooth {
        eta: f64,
        l: f64,
        r: f64,
        d: usize,
    },
    Rlm {
        psis: Vec<f64>,
        lambda: f64,
        n: usize,
    },
    Chain {
        d: usize,
        l: f64,
        mu: f64,
    },
}

impl InstanceDescription {
    pub fn build(&self) -> Result<Instance, InstanceError> {
        Ok(match self {
            InstanceDescription::Toy { eta, mu, l } => {
                Instance::Quadratic(toy_instance(*eta, *mu, *l)?)
            }
            InstanceDescription::Fsm { etas, l, mu, r, d } => {
                Instance::Quadratic(fsm_instance(etas, *l, *mu, *r, *d)?)
            }
            InstanceDescription::Smooth { eta, l, r, d } => {
                Instance::Quadratic(smooth_instance(*eta, *l, *r, *d)?)
            }
            InstanceDescription::Rlm { psis, lambda, n } => {
                Instance::Rlm(rlm_instance(psis, *lambda, *n)?)
            }
            InstanceDescription::Chain { d, l, mu } => {
                Instance::Quadratic(nesterov_chain(*d, *l, *mu)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticInstance {
    pub description: InstanceDescription,
    pub model: QuadraticModel<f64>,
    /// Certified bounds `mu I <= H_j <= L I` for every component.
    pub mu: f64,
    pub l: f64,
    pub minimizer: Vec<f64>,
    pub optimal_value: f64,
}

pub fn toy_instance(eta: f64, mu: f64, l: f64) -> Result<QuadraticInstance, InstanceError> {
    if !(mu > 0.0 && mu <= eta && eta <= l) {
        return domain(format!(
            "need 0 < mu <= eta <= L, got eta={eta} mu={mu} L={l}"
        ));
    }
    Ok(QuadraticInstance {
        description: InstanceDescription::Toy { eta, mu, l },
        model: toy_model((), eta),
        mu,
        l,
        minimizer: vec![1.0 / eta],
        optimal_value: -0.5 / eta,
    })
}

fn check_fsm(etas: &[f64], l: f64, mu: f64, d: usize) -> Result<(), InstanceError> {
    if d < 2 {
        return domain(format!("the finite-sum family needs d >= 2, got {d}"));
    }
    if !(l >= mu && mu > 0.0) {
        return domain(format!("need L >= mu > 0, got L={l} mu={mu}"));
    }
    if etas.is_empty() {
        return domain("need at least one component");
    }
    let half = 0.5 * (l - mu);
    if let Some(e) = etas.iter().find(|e| !(e.abs() <= half)) {
        return domain(format!("|eta| must not exceed (L-mu)/2 = {half}, got {e}"));
    }
    Ok(())
}

pub fn fsm_instance(
    etas: &[f64],
    l: f64,
    mu: f64,
    r: f64,
    d: usize,
) -> Result<QuadraticInstance, InstanceError> {
    check_fsm(etas, l, mu, d)?;
    let minimizer = fsm_minimizer(etas, l, mu, r, d)?;
    let optimal_value = -r * mu / SQRT_2 * minimizer[0];
    Ok(QuadraticInstance {
        description: InstanceDescription::Fsm {
            etas: etas.to_vec(),
            l,
            mu,
            r,
            d,
        },
        model: fsm_model((), etas.to_vec(), l, mu, r, d),
        mu,
        l,
        minimizer,
        optimal_value,
    })
}

/// `(R mu/(sqrt2 ((L+mu)/2 + mean eta)), same, 0, .., 0)`.
pub fn fsm_minimizer(
    etas: &[f64],
    l: f64,
    mu: f64,
    r: f64,
    d: usize,
) -> Result<Vec<f64>, InstanceError> {
    check_fsm(etas, l, mu, d)?;
    let mean = etas.iter().sum::<f64>() / etas.len() as f64;
    let v = r * mu / (SQRT_2 * (0.5 * (l + mu) + mean));
    let mut w = vec![0.0; d];
    w[0] = v;
    w[1] = v;
    Ok(w)
}

/// The two parameter vectors used by the separation argument: every
/// entry at `-(L-mu)/2`, and the same with entry `j` moved to `+(L-mu)/2`.
pub fn fsm_separation_pair(n: usize, l: f64, mu: f64, j: usize) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * (l - mu);
    let low = vec![-half; n];
    let mut high = low.clone();
    high[j] = half;
    (low, high)
}

/// `2R / |n(kappa+1)/(kappa-1) - n + 2|`, the distance between the
/// minimizers of the two vectors from [`fsm_separation_pair`].
pub fn fsm_minimizer_separation(
    n: usize,
    kappa: f64,
    r: f64,
    j: usize,
) -> Result<f64, InstanceError> {
    if !(kappa > 3.0) {
        return domain(format!("separation bound needs kappa > 3, got {kappa}"));
    }
    if j >= n {
        return domain(format!("component {j} out of range for n = {n}"));
    }
    let nf = n as f64;
    let sep = 2.0 * r / (nf * (kappa + 1.0) / (kappa - 1.0) - nf + 2.0).abs();
    debug_assert!(sep >= 2.0 * r / (nf + 2.0));
    Ok(sep)
}

pub fn smooth_instance(
    eta: f64,
    l: f64,
    r: f64,
    d: usize,
) -> Result<QuadraticInstance, InstanceError> {
    if !(eta > 0.0 && eta <= l) || d == 0 {
        return domain(format!(
            "need 0 < eta <= L and d >= 1, got eta={eta} L={l} d={d}"
        ));
    }
    let mut minimizer = vec![0.0; d];
    minimizer[0] = r;
    Ok(QuadraticInstance {
        description: InstanceDescription::Smooth { eta, l, r, d },
        model: smooth_model((), eta, r, d),
        mu: eta,
        l: eta,
        minimizer,
        optimal_value: -0.5 * r * r * eta,
    })
}

pub fn nesterov_chain(d: usize, l: f64, mu: f64) -> Result<QuadraticInstance, InstanceError> {
    if d < 2 || !(l > mu && mu > 0.0) {
        return domain(format!(
            "need d >= 2 and L > mu > 0, got d={d} L={l} mu={mu}"
        ));
    }
    let model = chain_model(d, l, mu);
    let (diag, off) = match &model.components[0].hessian {
        SymMatrix::Tridiagonal { diag, off } => (diag.clone(), off.clone()),
        _ => unreachable!(),
    };
    let minimizer = solve_tridiagonal(&diag, &off, &model.components[0].linear);
    let optimal_value = -0.5 * dot(&model.components[0].linear, &minimizer);
    Ok(QuadraticInstance {
        description: InstanceDescription::Chain { d, l, mu },
        model,
        mu,
        l,
        minimizer,
        optimal_value,
    })
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        c[i] = if i + 1 < n { off[i] / m } else { 0.0 };
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlmInstance {
    pub description: InstanceDescription,
    pub psis: Vec<f64>,
    pub lambda: f64,
    pub n: usize,
    pub dual: QuadraticModel<f64>,
    pub dual_minimizer: Vec<f64>,
    pub dual_optimum: f64,
}

fn check_rlm(psis: &[f64], lambda: f64, n: usize) -> Result<(), InstanceError> {
    if n == 0 || n % 2 == 1 {
        return domain(format!("the regularized family needs an even n, got {n}"));
    }
    if psis.len() != n / 2 {
        return domain(format!("need n/2 = {} angles, got {}", n / 2, psis.len()));
    }
    if !(lambda > 0.0) {
        return domain(format!("lambda must be positive, got {lambda}"));
    }
    if let Some(p) = psis.iter().find(|p| !(p.abs() <= FRAC_PI_2 + 1e-15)) {
        return domain(format!("angles must lie in [-pi/2, pi/2], got {p}"));
    }
    Ok(())
}

pub fn rlm_instance(psis: &[f64], lambda: f64, n: usize) -> Result<RlmInstance, InstanceError> {
    check_rlm(psis, lambda, n)?;
    let dual = rlm_dual_model((), psis.iter().map(|p| p.sin()).collect(), lambda, n);
    let dual_minimizer = rlm_dual_minimizer(psis, lambda, n)?;
    let dual_optimum = -0.5 / n as f64 * dual_minimizer.iter().sum::<f64>();
    Ok(RlmInstance {
        description: InstanceDescription::Rlm {
            psis: psis.to_vec(),
            lambda,
            n,
        },
        psis: psis.to_vec(),
        lambda,
        n,
        dual,
        dual_minimizer,
        dual_optimum,
    })
}

/// Coordinate pair `j` equals `lambda n / (lambda n + 1 + sin psi_j)`.
pub fn rlm_dual_minimizer(psis: &[f64], lambda: f64, n: usize) -> Result<Vec<f64>, InstanceError> {
    check_rlm(psis, lambda, n)?;
    let ln = lambda * n as f64;
    Ok(psis
        .iter()
        .flat_map(|p| {
            let v = ln / (ln + 1.0 + p.sin());
            [v, v]
        })
        .collect())
}

/// Distance between the dual minimizers with every angle at `-pi/2` and
/// the same with the first angle moved to `+pi/2`; equals
/// `2 sqrt2 / (lambda n + 2)`.
pub fn rlm_minimizer_separation(n: usize, lambda: f64) -> Result<f64, InstanceError> {
    let low = vec![-FRAC_PI_2; n / 2];
    let mut high = low.clone();
    if high.is_empty() {
        return domain("need n >= 2");
    }
    high[0] = FRAC_PI_2;
    let a = rlm_dual_minimizer(&low, lambda, n)?;
    let b = rlm_dual_minimizer(&high, lambda, n)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

impl RlmInstance {
    /// `x_i = cos psi e_i + sin psi e_{i+1}` for the first coordinate of
    /// each pair, `e_i` for the second.
    pub fn data_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let mut x = vec![0.0; self.n];
                if i % 2 == 0 {
                    let p = self.psis[i / 2];
                    x[i] = p.cos();
                    x[i + 1] = p.sin();
                } else {
                    x[i] = 1.0;
                }
                x
            })
            .collect()
    }

    /// `P(w) = (1/n) sum 1/2 (<x_i, w> + 1)^2 + (lambda/2) |w|^2`.
    pub fn primal_value(&self, w: &[f64]) -> f64 {
        let nf = self.n as f64;
        let loss: f64 = self
            .data_vectors()
            .iter()
            .map(|x| 0.5 * (dot(x, w) + 1.0).powi(2))
            .sum();
        loss / nf + 0.5 * self.lambda * dot(w, w)
    }

    pub fn dual_value(&self, alpha: &[f64]) -> f64 {
        self.dual.value(alpha)
    }

    /// Primal point paired with a dual point, `w = -(1/(lambda n)) sum a_i x_i`.
    pub fn primal_from_dual(&self, alpha: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.n];
        let s = -1.0 / (self.lambda * self.n as f64);
        for (a, x) in alpha.iter().zip(self.data_vectors()) {
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi += s * a * xi;
            }
        }
        w
    }
}

/// Either kind of numeric instance. Runs report errors against the
/// closed-form minimizer of whichever objective the oracles answer for.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Quadratic(QuadraticInstance),
    Rlm(RlmInstance),
}

impl Instance {
    pub fn model(&self) -> &QuadraticModel<f64> {
        match self {
            Instance::Quadratic(q) => &q.model,
            Instance::Rlm(r) => &r.dual,
        }
    }

    pub fn minimizer(&self) -> &[f64] {
        match self {
            Instance::Quadratic(q) => &q.minimizer,
            Instance::Rlm(r) => &r.dual_minimizer,
        }
    }

    pub fn description(&self) -> &InstanceDescription {
        match self {
            Instance::Quadratic(q) => &q.description,
            Instance::Rlm(r) => &r.description,
        }
    }

    pub fn suboptimality(&self, w: &[f64]) -> f64 {
        self.model().excess(w, self.minimizer())
    }

    pub fn distance(&self, w: &[f64]) -> f64 {
        w.iter()
            .zip(self.minimizer())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

// ---------------------------------------------------------------------------
// parametrised families

/// A one-parameter slice through a family, as used for worst-case sweeps:
/// the swept parameter is the scalar `eta` (toy, smooth), the entry
/// `coordinate` of the eta vector with the rest at `-(L-mu)/2` (fsm), or
/// the angle of pair `block` with the rest at 0 (rlm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Toy {
        mu: f64,
        l: f64,
    },
    Fsm {
        n: usize,
        d: usize,
        l: f64,
        mu: f64,
        r: f64,
        coordinate: usize,
    },
    Smooth {
        l: f64,
        r: f64,
        d: usize,
    },
    Rlm {
        n: usize,
        lambda: f64,
        block: usize,
    },
    Chain {
        d: usize,
        l: f64,
        mu: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Toy { .. } => "toy",
            Family::Fsm { .. } => "fsm",
            Family::Smooth { .. } => "smooth",
            Family::Rlm { .. } => "rlm",
            Family::Chain { .. } => "chain",
        }
    }

    pub fn parameter_range(&self) -> (f64, f64) {
        match *self {
            Family::Toy { mu, l } => (mu, l),
            Family::Fsm { l, mu, .. } => (-0.5 * (l - mu), 0.5 * (l - mu)),
            Family::Smooth { l, .. } => (0.0, l),
            Family::Rlm { .. } => (-FRAC_PI_2, FRAC_PI_2),
            Family::Chain { .. } => (0.0, 0.0),
        }
    }

    /// `points` equispaced parameters covering the range. The smooth
    /// family's open end at 0 is excluded.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let (lo, hi) = self.parameter_range();
        match (self, points) {
            (Family::Chain { .. }, _) | (_, 0) => vec![lo],
            (Family::Smooth { .. }, p) => (1..=p).map(|i| hi * i as f64 / p as f64).collect(),
            (_, 1) => vec![hi],
            (_, p) => (0..p)
                .map(|i| lo + (hi - lo) * i as f64 / (p - 1) as f64)
                .collect(),
        }
    }

    /// Full parameter vector at swept value `p`, in the order of the
    /// symbolic lift's indeterminates. For rlm these are `sin(psi_j)`.
    pub fn parameter_point(&self, p: f64) -> Vec<f64> {
        match *self {
            Family::Toy { .. } | Family::Smooth { .. } => vec![p],
            Family::Fsm {
                n,
                l,
                mu,
                coordinate,
                ..
            } => {
                let mut v = vec![-0.5 * (l - mu); n];
                v[coordinate] = p;
                v
            }
            Family::Rlm { n, block, .. } => {
                let mut v = vec![0.0; n / 2];
                v[block] = p.sin();
                v
            }
            Family::Chain { .. } => Vec::new(),
        }
    }

    pub fn instantiate(&self, p: f64) -> Result<Instance, InstanceError> {
        let desc = match *self {
            Family::Toy { mu, l } => InstanceDescription::Toy { eta: p, mu, l },
            Family::Fsm { d, l, mu, r, .. } => InstanceDescription::Fsm {
                etas: self.parameter_point(p),
                l,
                mu,
                r,
                d,
            },
            Family::Smooth { l, r, d } => InstanceDescription::Smooth { eta: p, l, r, d },
            Family::Rlm { n, lambda, block } => {
                let mut psis = vec![0.0; n / 2];
                if block >= psis.len() {
                    return domain(format!("block {block} out of range"));
                }
                psis[block] = p;
                InstanceDescription::Rlm { psis, lambda, n }
            }
            Family::Chain { d, l, mu } => InstanceDescription::Chain { d, l, mu },
        };
        if let Family::Fsm { n, coordinate, .. } = *self {
            if coordinate >= n {
                return domain(format!("coordinate {coordinate} out of range for n = {n}"));
            }
        }
        desc.build()
    }

    /// The model with its parameters as polynomial indeterminates.
    pub fn lifted_model(&self) -> Result<QuadraticModel<MultiPoly>, InstanceError> {
        Ok(match *self {
            Family::Toy { .. } => toy_model(1, MultiPoly::var(1, 0)),
            Family::Fsm { n, d, l, mu, r, .. } => {
                check_fsm(&vec![0.0; n], l, mu, d)?;
                fsm_model(
                    n,
                    (0..n).map(|j| MultiPoly::var(n, j)).collect(),
                    l,
                    mu,
                    r,
                    d,
                )
            }
            Family::Smooth { r, d, .. } => smooth_model(1, MultiPoly::var(1, 0), r, d),
            Family::Rlm { n, lambda, .. } => {
                check_rlm(&vec![0.0; n / 2], lambda, n)?;
                let m = n / 2;
                rlm_dual_model(m, (0..m).map(|j| MultiPoly::var(m, j)).collect(), lambda, n)
            }
            Family::Chain { .. } => return Err(InstanceError::NotParametrised("chain")),
        })
    }

    /// Minimizer at swept value `p`.
    pub fn minimizer_at(&self, p: f64) -> Result<Vec<f64>, InstanceError> {
        Ok(self.instantiate(p)?.minimizer().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{solve, symmetric_eigenvalues};

    #[test]
    fn toy_values() {
        let t = toy_instance(2.0, 1.0, 4.0).unwrap();
        assert_eq!(t.minimizer, vec![0.5]);
        assert_eq!(t.optimal_value, -0.25);
        assert_eq!(t.model.gradient(&t.minimizer), vec![0.0]);
        assert!(toy_instance(5.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn fsm_blocks_stay_in_spectrum() {
        let (l, mu) = (10.0, 1.0);
        for &eta in &[-4.5, -1.0, 0.0, 2.0, 4.5] {
            let inst = fsm_instance(&[eta, -eta], l, mu, 1.0, 5).unwrap();
            for c in &inst.model.components {
                let ev = symmetric_eigenvalues(c.hessian.to_dense(&()));
                assert!(ev[0] >= mu - 1e-12 && ev[ev.len() - 1] <= l + 1e-12);
            }
        }
        assert!(fsm_instance(&[5.0], l, mu, 1.0, 4).is_err());
        assert!(fsm_instance(&[0.0], l, mu, 1.0, 1).is_err());
    }

    #[test]
    fn fsm_minimizer_matches_linear_solve() {
        let etas = [-4.5, 1.25, 3.0, -0.5];
        let inst = fsm_instance(&etas, 10.0, 1.0, 1.0, 4).unwrap();
        let h: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                let mut e = vec![0.0; 4];
                e[i] = 1.0;
                inst.model.hessian_apply(&e)
            })
            .collect();
        let b: Vec<f64> = inst.model.gradient(&[0.0; 4]).iter().map(|g| -g).collect();
        let w = solve(h, b).unwrap();
        for (a, b) in w.iter().zip(&inst.minimizer) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(norm(&inst.model.gradient(&inst.minimizer)) < 1e-12);
        assert!((inst.model.value(&inst.minimizer) - inst.optimal_value).abs() < 1e-12);
    }

    #[test]
    fn low_parameters_give_r_over_sqrt2() {
        let (lo, _) = fsm_separation_pair(3, 10.0, 1.0, 0);
        let w = fsm_minimizer(&lo, 10.0, 1.0, 2.0, 3).unwrap();
        assert!((w[0] - 2.0 / SQRT_2).abs() < 1e-15);
        assert_eq!(w[2], 0.0);
        assert!(fsm_minimizer_separation(8, 3.0, 1.0, 0).is_err());
    }

    #[test]
    fn smooth_minimizer_ignores_eta() {
        for &eta in &[0.1, 0.5, 1.0] {
            let s = smooth_instance(eta, 1.0, 2.0, 3).unwrap();
            assert_eq!(s.minimizer, vec![2.0, 0.0, 0.0]);
            assert_eq!(s.model.gradient(&[0.0; 3]), vec![-2.0 * eta, 0.0, 0.0]);
            assert!((s.model.value(&s.minimizer) + 2.0 * eta).abs() < 1e-15);
        }
    }

    #[test]
    fn chain_spectrum_and_minimizer() {
        let inst = nesterov_chain(30, 100.0, 1.0).unwrap();
        let h = inst.model.components[0].hessian.to_dense(&());
        let ev = symmetric_eigenvalues(h);
        assert!(ev[0] >= 1.0 - 1e-12 && ev[29] <= 100.0 + 1e-9);
        assert!(norm(&inst.model.gradient(&inst.minimizer)) < 1e-10);
    }

    #[test]
    fn rlm_dual_structure() {
        let inst = rlm_instance(&[0.0; 50], 0.01, 100).unwrap();
        assert!(inst.dual_minimizer.iter().all(|&a| (a - 0.5).abs() < 1e-15));
        for x in inst.data_vectors() {
            assert!((norm(&x) - 1.0).abs() < 1e-15);
        }
        assert!(rlm_instance(&[0.0; 2], 0.1, 5).is_err());
    }

    #[test]
    fn description_round_trip() {
        let d = InstanceDescription::Fsm {
            etas: vec![0.5, -1.0],
            l: 4.0,
            mu: 1.0,
            r: 1.0,
            d: 3,
        };
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"family\":\"fsm\""));
        let back: InstanceDescription = serde_json::from_str(&s).unwrap();
        assert_eq!(back.build().unwrap(), d.build().unwrap());
    }
}
