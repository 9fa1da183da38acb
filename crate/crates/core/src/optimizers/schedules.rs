//! The oblivious methods as query schedules.
//!
//! Every schedule sees only the step counter and its random stream. Step
//! sizes and momenta are the usual constant choices for each method.

use crate::instances::OracleFamily;
use crate::oracles::OracleQuery;

use super::rng::{Sampling, StreamRng};
use super::{Schedule, Step, Term, Update};

fn grad(a: f64, b: f64, j: usize) -> OracleQuery {
    OracleQuery::gradient_step(a, b, j)
}

fn keep(source: usize, c: f64) -> Term {
    Term {
        source,
        query: OracleQuery::scaled(c),
    }
}

fn at(source: usize, query: OracleQuery) -> Term {
    Term { source, query }
}

/// `sum_j O(source; a/n, b/n, j)`, i.e. `a grad F + b w`.
fn full(source: usize, a: f64, b: f64, n: usize) -> Vec<Term> {
    let nf = n as f64;
    (0..n)
        .map(|j| at(source, grad(a / nf, b / nf, j)))
        .collect()
}

pub(crate) fn momentum(kappa: f64) -> f64 {
    let s = kappa.sqrt();
    (s - 1.0) / (s + 1.0)
}

#[derive(Debug, Clone)]
pub struct Gd {
    pub step: f64,
    pub n: usize,
}

impl Schedule for Gd {
    fn name(&self) -> &str {
        "gd"
    }
    fn tracked_points(&self) -> usize {
        1
    }
    fn step(&self, _k: usize, _rng: &mut StreamRng) -> Step {
        vec![Update {
            target: 0,
            terms: full(0, -self.step, 1.0, self.n),
        }]
    }
}

/// Constant-momentum accelerated gradient. Point 0 is `x`, point 1 the
/// extrapolated `y`:
/// `x+ = y - grad F(y)/L`, `y+ = x+ + beta (x+ - x)`.
#[derive(Debug, Clone)]
pub struct Agd {
    pub step: f64,
    pub beta: f64,
    pub n: usize,
}

impl Schedule for Agd {
    fn name(&self) -> &str {
        "agd"
    }
    fn tracked_points(&self) -> usize {
        2
    }
    fn step(&self, _k: usize, _rng: &mut StreamRng) -> Step {
        let b = self.beta;
        let mut y = full(1, -(1.0 + b) * self.step, 1.0 + b, self.n);
        y.push(keep(0, -b));
        vec![
            Update {
                target: 0,
                terms: full(1, -self.step, 1.0, self.n),
            },
            Update {
                target: 1,
                terms: y,
            },
        ]
    }
}

/// Heavy ball. Point 1 holds the previous iterate.
#[derive(Debug, Clone)]
pub struct HeavyBall {
    pub step: f64,
    pub beta: f64,
    pub n: usize,
}

impl Schedule for HeavyBall {
    fn name(&self) -> &str {
        "hb"
    }
    fn tracked_points(&self) -> usize {
        2
    }
    fn step(&self, _k: usize, _rng: &mut StreamRng) -> Step {
        let mut x = full(0, -self.step, 1.0 + self.beta, self.n);
        x.push(keep(1, -self.beta));
        vec![
            Update {
                target: 0,
                terms: x,
            },
            Update {
                target: 1,
                terms: vec![keep(0, 1.0)],
            },
        ]
    }
}

/// Stochastic gradient with step `2 / (2L + mu k)`.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub l: f64,
    pub mu: f64,
    pub n: usize,
    pub sampling: Sampling,
}

impl Schedule for Sgd {
    fn name(&self) -> &str {
        "sgd"
    }
    fn tracked_points(&self) -> usize {
        1
    }
    fn step(&self, k: usize, rng: &mut StreamRng) -> Step {
        let j = rng.component(self.n, self.sampling);
        let gamma = 2.0 / (2.0 * self.l + self.mu * k as f64);
        vec![Update {
            target: 0,
            terms: vec![at(0, grad(-gamma, 1.0, j))],
        }]
    }
}

/// Stochastic average gradient. Points `1..=n` are the stored component
/// gradients, initialised at zero.
#[derive(Debug, Clone)]
pub struct Sag {
    pub step: f64,
    pub n: usize,
    pub sampling: Sampling,
}

impl Schedule for Sag {
    fn name(&self) -> &str {
        "sag"
    }
    fn tracked_points(&self) -> usize {
        self.n + 1
    }
    fn step(&self, _k: usize, rng: &mut StreamRng) -> Step {
        let j = rng.component(self.n, self.sampling);
        let c = self.step / self.n as f64;
        // w+ = w - (step/n)(grad f_j(w) + sum_{i != j} y_i)
        let mut w = vec![at(0, grad(-c, 1.0, j))];
        w.extend((0..self.n).filter(|&i| i != j).map(|i| keep(i + 1, -c)));
        vec![
            Update {
                target: 0,
                terms: w,
            },
            Update {
                target: j + 1,
                terms: vec![at(0, grad(1.0, 0.0, j))],
            },
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Saga {
    pub step: f64,
    pub n: usize,
    pub sampling: Sampling,
}

impl Schedule for Saga {
    fn name(&self) -> &str {
        "saga"
    }
    fn tracked_points(&self) -> usize {
        self.n + 1
    }
    fn step(&self, _k: usize, rng: &mut StreamRng) -> Step {
        let j = rng.component(self.n, self.sampling);
        let g = self.step;
        let c = g / self.n as f64;
        // w+ = w - g (grad f_j(w) - y_j + mean y)
        let mut w = vec![at(0, grad(-g, 1.0, j))];
        if g - c != 0.0 {
            w.push(keep(j + 1, g - c));
        }
        w.extend((0..self.n).filter(|&i| i != j).map(|i| keep(i + 1, -c)));
        vec![
            Update {
                target: 0,
                terms: w,
            },
            Update {
                target: j + 1,
                terms: vec![at(0, grad(1.0, 0.0, j))],
            },
        ]
    }
}

/// Variance-reduced gradient. Each epoch spends `n` steps building the
/// snapshot gradient one component at a time (point 1 is the snapshot,
/// point 2 the running mean gradient) and then takes `epoch` inner steps.
#[derive(Debug, Clone)]
pub struct Svrg {
    pub step: f64,
    pub n: usize,
    pub epoch: usize,
    pub sampling: Sampling,
}

impl Schedule for Svrg {
    fn name(&self) -> &str {
        "svrg"
    }
    fn tracked_points(&self) -> usize {
        3
    }
    fn step(&self, k: usize, rng: &mut StreamRng) -> Step {
        let nf = self.n as f64;
        let phase = k % (self.n + self.epoch);
        if phase == 0 {
            return vec![
                Update {
                    target: 1,
                    terms: vec![keep(0, 1.0)],
                },
                Update {
                    target: 2,
                    terms: vec![at(0, grad(1.0 / nf, 0.0, 0))],
                },
            ];
        }
        if phase < self.n {
            return vec![Update {
                target: 2,
                terms: vec![keep(2, 1.0), at(1, grad(1.0 / nf, 0.0, phase))],
            }];
        }
        let j = rng.component(self.n, self.sampling);
        let e = self.step;
        vec![Update {
            target: 0,
            terms: vec![at(0, grad(-e, 1.0, j)), at(1, grad(e, 0.0, j)), keep(2, -e)],
        }]
    }
}

/// Dual coordinate ascent with exact coordinate steps.
#[derive(Debug, Clone)]
pub struct Sdca {
    pub n: usize,
    pub sampling: Sampling,
}

impl Schedule for Sdca {
    fn name(&self) -> &str {
        "sdca"
    }
    fn tracked_points(&self) -> usize {
        1
    }
    fn family(&self) -> OracleFamily {
        OracleFamily::Dual
    }
    fn step(&self, _k: usize, rng: &mut StreamRng) -> Step {
        let j = rng.component(self.n, self.sampling);
        vec![Update {
            target: 0,
            terms: vec![at(0, OracleQuery::DualExactCd { coordinate: j })],
        }]
    }
}

/// SDCA without duality, using `F = (1/n) sum phi_j + (mu/2)|w|^2` with
/// `phi_j = f_j - (mu/2)|w|^2`. Points `1..=n` are the pseudo-dual
/// vectors, kept so that `w = (1/(mu n)) sum alpha_j`.
#[derive(Debug, Clone)]
pub struct SdcaPrimal {
    pub step: f64,
    pub mu: f64,
    pub n: usize,
    pub sampling: Sampling,
}

impl Schedule for SdcaPrimal {
    fn name(&self) -> &str {
        "sdca_primal"
    }
    fn tracked_points(&self) -> usize {
        self.n + 1
    }
    fn step(&self, _k: usize, rng: &mut StreamRng) -> Step {
        let i = rng.component(self.n, self.sampling);
        let e = self.step;
        let s = e * self.mu * self.n as f64;
        // v = grad f_i(w) - mu w + alpha_i
        vec![
            Update {
                target: i + 1,
                terms: vec![at(0, grad(-s, s * self.mu, i)), keep(i + 1, 1.0 - s)],
            },
            Update {
                target: 0,
                terms: vec![at(0, grad(-e, 1.0 + e * self.mu, i)), keep(i + 1, -e)],
            },
        ]
    }
}

/// Exact coordinate minimisation on one component per step.
#[derive(Debug, Clone)]
pub struct Cd {
    pub n: usize,
    pub d: usize,
    /// `None` for the cyclic order: coordinate `k mod d`, component
    /// `(k / d) mod n`.
    pub random: Option<Sampling>,
}

impl Schedule for Cd {
    fn name(&self) -> &str {
        if self.random.is_some() {
            "cd_random"
        } else {
            "cd_cyclic"
        }
    }
    fn tracked_points(&self) -> usize {
        1
    }
    fn step(&self, k: usize, rng: &mut StreamRng) -> Step {
        let (i, j) = match self.random {
            Some(s) => {
                let i = rng.uniform(self.d);
                (i, rng.component(self.n, s))
            }
            None => (k % self.d, (k / self.d) % self.n),
        };
        vec![Update {
            target: 0,
            terms: vec![at(
                0,
                OracleQuery::SteepestCd {
                    coordinate: i,
                    component: j,
                },
            )],
        }]
    }
}
