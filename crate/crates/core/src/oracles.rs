//! Oracle procedures with call accounting.
//!
//! Every query is answered by a pure function of the model, the query
//! point, and the query parameters. Query parameters are real numbers
//! independent of the instance, so the same `answer` serves numeric runs
//! and symbolic traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{OracleFamily, QuadraticModel};
use crate::polynomials::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("index {index} out of range for {what} of size {size}")]
    Index {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("zero diagonal entry at coordinate {0}")]
    ZeroDiagonal(usize),
    #[error("diagonal entry at coordinate {0} is not invertible in the coefficient ring")]
    NotInvertible(usize),
    #[error("{query} queries need a {needed:?} oracle, instance provides {got:?}")]
    Family {
        query: &'static str,
        needed: OracleFamily,
        got: OracleFamily,
    },
    #[error("non-finite query parameter")]
    NonFinite,
}

/// Real linear map on `R^d`, stored by structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LinearMap {
    Zero,
    Scaled(f64),
    Diagonal(Vec<f64>),
    Dense(Vec<Vec<f64>>),
}

impl LinearMap {
    pub fn is_zero(&self) -> bool {
        match self {
            LinearMap::Zero => true,
            LinearMap::Scaled(c) => *c == 0.0,
            LinearMap::Diagonal(v) => v.iter().all(|&x| x == 0.0),
            LinearMap::Dense(m) => m.iter().flatten().all(|&x| x == 0.0),
        }
    }

    fn check(&self, dim: usize) -> Result<(), OracleError> {
        let finite = |x: &f64| x.is_finite();
        match self {
            LinearMap::Zero => Ok(()),
            LinearMap::Scaled(c) => finite(c).then_some(()).ok_or(OracleError::NonFinite),
            LinearMap::Diagonal(v) => {
                if v.len() != dim {
                    return Err(OracleError::Shape {
                        expected: dim,
                        got: v.len(),
                    });
                }
                v.iter()
                    .all(finite)
                    .then_some(())
                    .ok_or(OracleError::NonFinite)
            }
            LinearMap::Dense(m) => {
                if m.len() != dim {
                    return Err(OracleError::Shape {
                        expected: dim,
                        got: m.len(),
                    });
                }
                if let Some(r) = m.iter().find(|r| r.len() != dim) {
                    return Err(OracleError::Shape {
                        expected: dim,
                        got: r.len(),
                    });
                }
                m.iter()
                    .flatten()
                    .all(finite)
                    .then_some(())
                    .ok_or(OracleError::NonFinite)
            }
        }
    }

    /// `self * v`, or `None` for the zero map.
    pub fn apply<S: Scalar>(&self, ctx: &S::Ctx, v: &[S]) -> Option<Vec<S>> {
        match self {
            LinearMap::Zero => None,
            LinearMap::Scaled(c) => Some(v.iter().map(|x| x.scale(*c)).collect()),
            LinearMap::Diagonal(d) => Some(v.iter().zip(d).map(|(x, c)| x.scale(*c)).collect()),
            LinearMap::Dense(m) => Some(
                m.iter()
                    .map(|row| {
                        row.iter()
                            .zip(v)
                            .filter(|(c, _)| **c != 0.0)
                            .fold(S::zero(ctx), |acc, (c, x)| acc.add(&x.scale(*c)))
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleQuery {
    /// `A (H_j w - b_j) + B w + C`.
    FirstOrder {
        a: LinearMap,
        b: LinearMap,
        c: Option<Vec<f64>>,
        component: usize,
    },
    /// Exact line minimum of component `j` along coordinate `i`.
    SteepestCd { coordinate: usize, component: usize },
    /// `alpha + t (grad D(alpha))_j e_j`.
    DualGradStep { step: f64, coordinate: usize },
    /// Exact minimum of the dual along coordinate `j`.
    DualExactCd { coordinate: usize },
}

impl OracleQuery {
    pub fn variant(&self) -> &'static str {
        match self {
            OracleQuery::FirstOrder { .. } => "first_order",
            OracleQuery::SteepestCd { .. } => "steepest_cd",
            OracleQuery::DualGradStep { .. } => "dual_grad_step",
            OracleQuery::DualExactCd { .. } => "dual_exact_cd",
        }
    }

    /// The component whose data the answer reads, if any. A first-order
    /// query with `A = 0` is a plain linear combination and reads nothing.
    pub fn touched(&self) -> Option<usize> {
        match self {
            OracleQuery::FirstOrder { a, component, .. } => (!a.is_zero()).then_some(*component),
            OracleQuery::SteepestCd { component, .. } => Some(*component),
            OracleQuery::DualGradStep { coordinate, .. }
            | OracleQuery::DualExactCd { coordinate } => Some(*coordinate),
        }
    }

    /// `w` scaled by `c`, touching nothing.
    pub fn scaled(c: f64) -> Self {
        OracleQuery::FirstOrder {
            a: LinearMap::Zero,
            b: LinearMap::Scaled(c),
            c: None,
            component: 0,
        }
    }

    /// `a grad f_j(w) + b w`.
    pub fn gradient_step(a: f64, b: f64, component: usize) -> Self {
        OracleQuery::FirstOrder {
            a: LinearMap::Scaled(a),
            b: if b == 0.0 {
                LinearMap::Zero
            } else {
                LinearMap::Scaled(b)
            },
            c: None,
            component,
        }
    }
}

fn check_index(what: &'static str, index: usize, size: usize) -> Result<(), OracleError> {
    if index < size {
        Ok(())
    } else {
        Err(OracleError::Index { what, index, size })
    }
}

fn need(
    model_family: OracleFamily,
    needed: OracleFamily,
    query: &'static str,
) -> Result<(), OracleError> {
    if model_family == needed {
        Ok(())
    } else {
        Err(OracleError::Family {
            query,
            needed,
            got: model_family,
        })
    }
}

/// Answers one query at point `w`.
pub fn answer<S: Scalar>(
    model: &QuadraticModel<S>,
    w: &[S],
    q: &OracleQuery,
) -> Result<Vec<S>, OracleError> {
    let d = model.dim;
    if w.len() != d {
        return Err(OracleError::Shape {
            expected: d,
            got: w.len(),
        });
    }
    let ctx = &model.ctx;
    match q {
        OracleQuery::FirstOrder { a, b, c, component } => {
            need(model.family, OracleFamily::Primal, "first-order")?;
            check_index("components", *component, model.n())?;
            a.check(d)?;
            b.check(d)?;
            let mut out = if a.is_zero() {
                vec![S::zero(ctx); d]
            } else {
                let g = model.component_gradient(*component, w);
                a.apply(ctx, &g).unwrap_or_else(|| vec![S::zero(ctx); d])
            };
            if let Some(bw) = b.apply(ctx, w) {
                out = out.iter().zip(&bw).map(|(x, y)| x.add(y)).collect();
            }
            if let Some(c) = c {
                if c.len() != d {
                    return Err(OracleError::Shape {
                        expected: d,
                        got: c.len(),
                    });
                }
                if !c.iter().all(|x| x.is_finite()) {
                    return Err(OracleError::NonFinite);
                }
                out = out
                    .iter()
                    .zip(c)
                    .map(|(x, ci)| x.add(&S::from_f64(ctx, *ci)))
                    .collect();
            }
            Ok(out)
        }
        OracleQuery::SteepestCd {
            coordinate,
            component,
        } => {
            need(model.family, OracleFamily::Primal, "coordinate-descent")?;
            check_index("components", *component, model.n())?;
            check_index("coordinates", *coordinate, d)?;
            coordinate_minimum(model, *component, *coordinate, w)
        }
        OracleQuery::DualGradStep { step, coordinate } => {
            need(model.family, OracleFamily::Dual, "dual")?;
            check_index("coordinates", *coordinate, d)?;
            if !step.is_finite() {
                return Err(OracleError::NonFinite);
            }
            let c = &model.components[0];
            let gj = c
                .hessian
                .row_dot(ctx, *coordinate, w)
                .sub(&c.linear[*coordinate]);
            let mut out = w.to_vec();
            out[*coordinate] = w[*coordinate].add(&gj.scale(*step));
            Ok(out)
        }
        OracleQuery::DualExactCd { coordinate } => {
            need(model.family, OracleFamily::Dual, "dual")?;
            check_index("coordinates", *coordinate, d)?;
            coordinate_minimum(model, 0, *coordinate, w)
        }
    }
}

fn coordinate_minimum<S: Scalar>(
    model: &QuadraticModel<S>,
    component: usize,
    i: usize,
    w: &[S],
) -> Result<Vec<S>, OracleError> {
    let c = &model.components[component];
    let hii = c.hessian.diag(i);
    if hii.is_zero() {
        return Err(OracleError::ZeroDiagonal(i));
    }
    let gi = c.hessian.row_dot(&model.ctx, i, w).sub(&c.linear[i]);
    let t = gi.div_exact(&hii).ok_or(OracleError::NotInvertible(i))?;
    let mut out = w.to_vec();
    out[i] = w[i].sub(&t);
    Ok(out)
}

/// Query and touch accounting for a single run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CallLog {
    pub variants: BTreeMap<&'static str, u64>,
    /// Component gradient evaluations, per component.
    pub touches: Vec<u64>,
    /// Whether every query came from a schedule that sees only the
    /// iteration counter and its random stream.
    pub oblivious: bool,
    /// Most components read by a single query. At most one for every
    /// query this crate defines.
    pub max_touched_per_query: usize,
}

impl CallLog {
    pub fn new(components: usize, oblivious: bool) -> Self {
        CallLog {
            variants: BTreeMap::new(),
            touches: vec![0; components],
            oblivious,
            max_touched_per_query: 0,
        }
    }

    pub fn record_query(&mut self, q: &OracleQuery) {
        *self.variants.entry(q.variant()).or_default() += 1;
        self.max_touched_per_query = self
            .max_touched_per_query
            .max(q.touched().is_some() as usize);
    }

    pub fn record_touch(&mut self, component: usize) {
        self.touches[component] += 1;
    }

    pub fn total_queries(&self) -> u64 {
        self.variants.values().sum()
    }

    pub fn total_touches(&self) -> u64 {
        self.touches.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("variant,count\n");
        for (v, c) in &self.variants {
            let _ = writeln!(s, "{v},{c}");
        }
        s.push_str("component,touches\n");
        for (j, t) in self.touches.iter().enumerate() {
            let _ = writeln!(s, "{j},{t}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{fsm_instance, rlm_instance, toy_instance, Family};
    use crate::polynomials::MultiPoly;

    fn fsm() -> QuadraticModel<f64> {
        fsm_instance(&[1.5, -2.0, 4.0], 10.0, 1.0, 1.0, 4)
            .unwrap()
            .model
    }

    #[test]
    fn first_order_special_cases() {
        let m = fsm();
        let w = [0.3, -0.7, 1.1, 2.0];
        let g = m.component_gradient(1, &w);
        let raw = OracleQuery::FirstOrder {
            a: LinearMap::Scaled(1.0),
            b: LinearMap::Zero,
            c: None,
            component: 1,
        };
        assert_eq!(answer(&m, &w, &raw).unwrap(), g);
        let ident = OracleQuery::scaled(1.0);
        assert_eq!(answer(&m, &w, &ident).unwrap(), w.to_vec());
        let step = OracleQuery::gradient_step(-0.1, 1.0, 1);
        let got = answer(&m, &w, &step).unwrap();
        for i in 0..4 {
            assert!((got[i] - (w[i] - 0.1 * g[i])).abs() < 1e-15);
        }
        let bad = OracleQuery::FirstOrder {
            a: LinearMap::Diagonal(vec![1.0; 3]),
            b: LinearMap::Zero,
            c: None,
            component: 0,
        };
        assert!(matches!(
            answer(&m, &w, &bad),
            Err(OracleError::Shape { .. })
        ));
        assert!(answer(&m, &w[..3], &ident).is_err());
    }

    #[test]
    fn steepest_cd_matches_projection_form() {
        let m = fsm();
        let w = [0.3, -0.7, 1.1, 2.0];
        for j in 0..3 {
            for i in 0..4 {
                let q = OracleQuery::SteepestCd {
                    coordinate: i,
                    component: j,
                };
                let got = answer(&m, &w, &q).unwrap();
                let h = m.components[j].hessian.to_dense(&());
                let b = &m.components[j].linear;
                let row: f64 = (0..4).map(|c| h[i][c] * w[c]).sum();
                let mut want = w.to_vec();
                want[i] = w[i] - row / h[i][i] + b[i] / h[i][i];
                for c in 0..4 {
                    assert!((got[c] - want[c]).abs() < 1e-14);
                }
                assert!(m.component_gradient(j, &got)[i].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn steepest_cd_on_toy_is_not_polynomial() {
        let lifted = Family::Toy { mu: 1.0, l: 4.0 }.lifted_model().unwrap();
        let w = vec![MultiPoly::zero(1)];
        let q = OracleQuery::SteepestCd {
            coordinate: 0,
            component: 0,
        };
        assert_eq!(answer(&lifted, &w, &q), Err(OracleError::NotInvertible(0)));
        let numeric = toy_instance(2.0, 1.0, 4.0).unwrap().model;
        assert_eq!(answer(&numeric, &[0.0], &q).unwrap(), vec![0.5]);
    }

    #[test]
    fn dual_queries() {
        let r = rlm_instance(&[0.0; 4], 0.1, 8).unwrap();
        let a0 = vec![0.0; 8];
        let q = OracleQuery::DualExactCd { coordinate: 3 };
        let got = answer(&r.dual, &a0, &q).unwrap();
        let qjj = r.dual.components[0].hessian.diag(3);
        assert!((got[3] - (1.0 / 8.0) / qjj).abs() < 1e-15);
        assert!(r.dual.gradient(&got)[3].abs() < 1e-12);
        let id = OracleQuery::DualGradStep {
            step: 0.0,
            coordinate: 5,
        };
        assert_eq!(answer(&r.dual, &got, &id).unwrap(), got);
        let primal = OracleQuery::scaled(1.0);
        assert!(matches!(
            answer(&r.dual, &a0, &primal),
            Err(OracleError::Family { .. })
        ));
        assert!(matches!(
            answer(&fsm(), &[0.0; 4], &q),
            Err(OracleError::Family { .. })
        ));
    }

    #[test]
    fn call_log_csv() {
        let mut log = CallLog::new(2, true);
        let q = OracleQuery::gradient_step(-1.0, 1.0, 1);
        log.record_query(&q);
        log.record_touch(1);
        log.record_query(&OracleQuery::scaled(2.0));
        assert_eq!(log.total_queries(), 2);
        assert_eq!(log.max_touched_per_query, 1);
        assert_eq!(
            log.to_csv(),
            "variant,count\nfirst_order,2\ncomponent,touches\n0,0\n1,1\n"
        );
    }
}
