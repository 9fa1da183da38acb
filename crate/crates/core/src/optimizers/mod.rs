//! Optimizers as oracle-query schedules, plus an L-BFGS reference.
//!
//! An oblivious method is a [`Schedule`]: at step `k` it emits, for each
//! tracked point it moves, a list of `(source point, query)` terms whose
//! answers are summed. The schedule never sees a point or an answer; it
//! gets the step counter and its own random stream, nothing else. The
//! same [`Executor`] runs a schedule on a numeric model or on a symbolic
//! lift.

mod curve;
mod lbfgs;
mod rng;
pub mod schedules;

pub use curve::{expected_error_curve, Curve, Metric};
pub use lbfgs::run_lbfgs;
pub use rng::{Sampling, StreamRng};

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{Instance, OracleFamily, QuadraticModel};
use crate::oracles::{answer, CallLog, OracleError, OracleQuery};
use crate::polynomials::Scalar;
use schedules::*;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error("unknown optimizer `{0}`")]
    UnknownOptimizer(String),
    #[error("optimizer `{name}` needs parameter `{param}`")]
    MissingParameter { name: String, param: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("`{name}` runs on a {needed:?} oracle, instance provides {got:?}")]
    Incompatible {
        name: String,
        needed: OracleFamily,
        got: OracleFamily,
    },
    #[error("`{0}` is not oblivious")]
    NotOblivious(String),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("need at least one seed")]
    NoSeeds,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Instance(#[from] crate::instances::InstanceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub source: usize,
    pub query: OracleQuery,
}

/// New value of `target`: the sum of the answers of its terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Update {
    pub target: usize,
    pub terms: Vec<Term>,
}

/// Updates in one step are applied simultaneously; points not listed keep
/// their value. Point 0 is the reported iterate.
pub type Step = Vec<Update>;

pub trait Schedule: Send + Sync {
    fn name(&self) -> &str;
    fn tracked_points(&self) -> usize;
    fn family(&self) -> OracleFamily {
        OracleFamily::Primal
    }
    fn step(&self, k: usize, rng: &mut StreamRng) -> Step;
}

pub const OPTIMIZER_NAMES: [&str; 12] = [
    "gd",
    "agd",
    "hb",
    "sgd",
    "sag",
    "saga",
    "svrg",
    "sdca",
    "sdca_primal",
    "cd_cyclic",
    "cd_random",
    "lbfgs",
];

/// Constants a method may need. Unused fields are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptParams {
    pub l: Option<f64>,
    pub mu: Option<f64>,
    /// Number of components (primal) or dual coordinates.
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub memory: Option<usize>,
    /// SVRG inner steps per epoch; defaults to `2n`.
    pub epoch: Option<usize>,
    #[serde(default)]
    pub sampling: Sampling,
}

impl OptParams {
    /// Constants read off an instance.
    pub fn for_instance(inst: &Instance) -> Self {
        match inst {
            Instance::Quadratic(q) => OptParams {
                l: Some(q.l),
                mu: Some(q.mu),
                n: Some(q.model.n()),
                d: Some(q.model.dim),
                ..Default::default()
            },
            Instance::Rlm(r) => OptParams {
                n: Some(r.n),
                d: Some(r.n),
                ..Default::default()
            },
        }
    }
}

pub enum Optimizer {
    Oblivious(Box<dyn Schedule>),
    Lbfgs { memory: usize },
}

impl std::fmt::Debug for Optimizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Optimizer {
    pub fn name(&self) -> &str {
        match self {
            Optimizer::Oblivious(s) => s.name(),
            Optimizer::Lbfgs { .. } => "lbfgs",
        }
    }

    pub fn is_oblivious(&self) -> bool {
        matches!(self, Optimizer::Oblivious(_))
    }

    pub fn family(&self) -> OracleFamily {
        match self {
            Optimizer::Oblivious(s) => s.family(),
            Optimizer::Lbfgs { .. } => OracleFamily::Primal,
        }
    }

    pub fn schedule(&self) -> Option<&dyn Schedule> {
        match self {
            Optimizer::Oblivious(s) => Some(s.as_ref()),
            Optimizer::Lbfgs { .. } => None,
        }
    }
}

pub fn make_optimizer(name: &str, p: &OptParams) -> Result<Optimizer, OptError> {
    let missing = |param| OptError::MissingParameter {
        name: name.to_string(),
        param,
    };
    let l = || p.l.ok_or_else(|| missing("l"));
    let mu = || p.mu.ok_or_else(|| missing("mu"));
    let n = || p.n.filter(|&n| n > 0).ok_or_else(|| missing("n"));
    let d = || p.d.filter(|&d| d > 0).ok_or_else(|| missing("d"));
    let positive = |x: f64, what: &str| {
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(OptError::InvalidParameter(format!(
                "{what} must be positive, got {x}"
            )))
        }
    };
    let sampling = p.sampling;
    let s: Box<dyn Schedule> = match name {
        "gd" => Box::new(Gd {
            step: 1.0 / positive(l()?, "L")?,
            n: n()?,
        }),
        "agd" => {
            let (l, mu) = (positive(l()?, "L")?, positive(mu()?, "mu")?);
            Box::new(Agd {
                step: 1.0 / l,
                beta: momentum(l / mu),
                n: n()?,
            })
        }
        "hb" => {
            let (l, mu) = (positive(l()?, "L")?, positive(mu()?, "mu")?);
            Box::new(HeavyBall {
                step: 4.0 / (l.sqrt() + mu.sqrt()).powi(2),
                beta: momentum(l / mu).powi(2),
                n: n()?,
            })
        }
        "sgd" => Box::new(Sgd {
            l: positive(l()?, "L")?,
            mu: positive(mu()?, "mu")?,
            n: n()?,
            sampling,
        }),
        "sag" => Box::new(Sag {
            step: 1.0 / (16.0 * positive(l()?, "L")?),
            n: n()?,
            sampling,
        }),
        "saga" => Box::new(Saga {
            step: 1.0 / (3.0 * positive(l()?, "L")?),
            n: n()?,
            sampling,
        }),
        "svrg" => {
            let n = n()?;
            Box::new(Svrg {
                step: 0.1 / positive(l()?, "L")?,
                n,
                epoch: p.epoch.unwrap_or(2 * n),
                sampling,
            })
        }
        "sdca" => Box::new(Sdca { n: n()?, sampling }),
        "sdca_primal" => {
            let (l, mu, n) = (positive(l()?, "L")?, positive(mu()?, "mu")?, n()?);
            let smooth = (l - mu).max(f64::MIN_POSITIVE);
            Box::new(SdcaPrimal {
                step: (1.0 / (4.0 * smooth)).min(1.0 / (4.0 * mu * n as f64)),
                mu,
                n,
                sampling,
            })
        }
        "cd_cyclic" => Box::new(Cd {
            n: n()?,
            d: d()?,
            random: None,
        }),
        "cd_random" => Box::new(Cd {
            n: n()?,
            d: d()?,
            random: Some(sampling),
        }),
        "lbfgs" => {
            let memory = p
                .memory
                .filter(|&m| m > 0)
                .ok_or_else(|| missing("memory"))?;
            return Ok(Optimizer::Lbfgs { memory });
        }
        other => return Err(OptError::UnknownOptimizer(other.to_string())),
    };
    Ok(Optimizer::Oblivious(s))
}

/// Runs a schedule on a model over any scalar ring.
pub struct Executor<'a, S: Scalar> {
    model: &'a QuadraticModel<S>,
    schedule: &'a dyn Schedule,
    rng: StreamRng,
    points: Vec<Vec<S>>,
    log: CallLog,
    k: usize,
    /// Answer every query with zero; used to audit obliviousness.
    spoof: bool,
    /// Component gradient evaluations in the most recent step.
    last_touches: usize,
}

impl<'a, S: Scalar> Executor<'a, S> {
    pub fn new(
        model: &'a QuadraticModel<S>,
        schedule: &'a dyn Schedule,
        seed: u64,
    ) -> Result<Self, OptError> {
        if schedule.family() != model.family {
            return Err(OptError::Incompatible {
                name: schedule.name().to_string(),
                needed: schedule.family(),
                got: model.family,
            });
        }
        let components = match model.family {
            OracleFamily::Primal => model.n(),
            OracleFamily::Dual => model.dim,
        };
        Ok(Executor {
            points: vec![vec![S::zero(&model.ctx); model.dim]; schedule.tracked_points()],
            rng: StreamRng::new(seed),
            log: CallLog::new(components, true),
            k: 0,
            spoof: false,
            last_touches: 0,
            model,
            schedule,
        })
    }

    pub fn with_spoofed_answers(mut self) -> Self {
        self.spoof = true;
        self
    }

    pub fn step(&mut self) -> Result<Step, OptError> {
        let step = self.schedule.step(self.k, &mut self.rng);
        let ctx = &self.model.ctx;
        let mut new_values = Vec::with_capacity(step.len());
        // A gradient of component j at a given point is evaluated once per
        // step however many terms reuse it.
        let mut evaluated = BTreeSet::new();
        for u in &step {
            let mut acc = vec![S::zero(ctx); self.model.dim];
            for t in &u.terms {
                self.log.record_query(&t.query);
                if let Some(c) = t.query.touched() {
                    evaluated.insert((t.source, c));
                }
                if self.spoof {
                    continue;
                }
                let a = answer(self.model, &self.points[t.source], &t.query)?;
                for (x, y) in acc.iter_mut().zip(&a) {
                    *x = x.add(y);
                }
            }
            new_values.push((u.target, acc));
        }
        for (target, v) in new_values {
            self.points[target] = v;
        }
        for &(_, c) in &evaluated {
            self.log.record_touch(c);
        }
        self.last_touches = evaluated.len();
        self.k += 1;
        Ok(step)
    }

    pub fn iterate(&self) -> &[S] {
        &self.points[0]
    }

    pub fn points(&self) -> &[Vec<S>] {
        &self.points
    }

    pub fn log(&self) -> &CallLog {
        &self.log
    }

    pub fn steps_taken(&self) -> usize {
        self.k
    }

    pub fn last_step_touches(&self) -> usize {
        self.last_touches
    }

    pub fn into_log(self) -> CallLog {
        self.log
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub optimizer: String,
    /// `F(w_k) - F*` for `k = 0..=K`; entry 0 is the initial error.
    pub suboptimality: Vec<f64>,
    /// `|w_k - w*|`.
    pub distance: Vec<f64>,
    /// Cumulative component gradient evaluations after each step.
    pub touches: Vec<u64>,
    pub seed: u64,
    pub log: CallLog,
    pub wall_clock: Duration,
    /// Reported iterates, when requested.
    pub iterates: Option<Vec<Vec<f64>>>,
}

/// Runs `iterations` steps from zero.
pub fn run(
    opt: &Optimizer,
    inst: &Instance,
    iterations: usize,
    seed: u64,
) -> Result<RunRecord, OptError> {
    run_with(opt, inst, iterations, seed, false)
}

pub fn run_with(
    opt: &Optimizer,
    inst: &Instance,
    iterations: usize,
    seed: u64,
    keep_iterates: bool,
) -> Result<RunRecord, OptError> {
    let model = inst.model();
    let start = Instant::now();
    let mut rec = RunRecord {
        optimizer: opt.name().to_string(),
        suboptimality: Vec::with_capacity(iterations + 1),
        distance: Vec::with_capacity(iterations + 1),
        touches: Vec::with_capacity(iterations + 1),
        seed,
        log: CallLog::default(),
        wall_clock: Duration::ZERO,
        iterates: keep_iterates.then(Vec::new),
    };
    let mut observe = |w: &[f64], touches: u64| {
        rec.suboptimality.push(inst.suboptimality(w));
        rec.distance.push(inst.distance(w));
        rec.touches.push(touches);
        if let Some(it) = rec.iterates.as_mut() {
            it.push(w.to_vec());
        }
    };
    let log = match opt {
        Optimizer::Oblivious(s) => {
            let mut ex = Executor::new(model, s.as_ref(), seed)?;
            observe(ex.iterate(), 0);
            for _ in 0..iterations {
                ex.step()?;
                observe(ex.iterate(), ex.log().total_touches());
            }
            ex.into_log()
        }
        Optimizer::Lbfgs { memory } => {
            if model.family != OracleFamily::Primal {
                return Err(OptError::Incompatible {
                    name: "lbfgs".into(),
                    needed: OracleFamily::Primal,
                    got: model.family,
                });
            }
            run_lbfgs(model, *memory, iterations, &mut observe)?
        }
    };
    rec.log = log;
    rec.wall_clock = start.elapsed();
    Ok(rec)
}

/// Re-runs a schedule with every answer replaced by zero and checks that
/// the emitted queries are identical to those of the real run.
pub fn audit_obliviousness(
    opt: &Optimizer,
    inst: &Instance,
    iterations: usize,
    seed: u64,
) -> Result<bool, OptError> {
    let s = opt
        .schedule()
        .ok_or_else(|| OptError::NotOblivious(opt.name().to_string()))?;
    let model = inst.model();
    let mut real = Executor::new(model, s, seed)?;
    let mut spoofed = Executor::new(model, s, seed)?.with_spoofed_answers();
    for _ in 0..iterations {
        if real.step()? != spoofed.step()? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{fsm_instance, nesterov_chain, rlm_instance, toy_instance};

    fn params(inst: &Instance) -> OptParams {
        OptParams {
            memory: Some(5),
            ..OptParams::for_instance(inst)
        }
    }

    #[test]
    fn unknown_and_missing() {
        assert!(matches!(
            make_optimizer("newton", &OptParams::default()),
            Err(OptError::UnknownOptimizer(_))
        ));
        let p = OptParams {
            l: Some(1.0),
            n: Some(1),
            ..Default::default()
        };
        assert!(matches!(
            make_optimizer("agd", &p),
            Err(OptError::MissingParameter { param: "mu", .. })
        ));
        assert!(matches!(
            make_optimizer("lbfgs", &p),
            Err(OptError::MissingParameter {
                param: "memory",
                ..
            })
        ));
    }

    #[test]
    fn zero_iterations_records_initial_error() {
        let inst = Instance::Quadratic(toy_instance(2.0, 1.0, 4.0).unwrap());
        for name in OPTIMIZER_NAMES.iter().filter(|n| **n != "sdca") {
            let opt = make_optimizer(name, &params(&inst)).unwrap();
            let r = run(&opt, &inst, 0, 1).unwrap();
            assert_eq!(r.suboptimality, vec![0.25]);
            assert_eq!(r.distance, vec![0.5]);
        }
    }

    #[test]
    fn gd_on_toy_follows_closed_form() {
        let inst = Instance::Quadratic(toy_instance(4.0, 1.0, 4.0).unwrap());
        let opt = make_optimizer("gd", &params(&inst)).unwrap();
        let r = run(&opt, &inst, 5, 0).unwrap();
        // eta = L: one step lands on the minimizer.
        assert!(r.distance[1..].iter().all(|&e| e == 0.0));
        let inst = Instance::Quadratic(toy_instance(2.0, 1.0, 4.0).unwrap());
        let r = run(&opt, &inst, 10, 0).unwrap();
        for k in 0..=10 {
            assert!((r.distance[k] - 0.5 * 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn incompatible_family() {
        let inst = Instance::Rlm(rlm_instance(&[0.0; 2], 0.1, 4).unwrap());
        let opt = make_optimizer(
            "gd",
            &OptParams {
                l: Some(1.0),
                n: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            run(&opt, &inst, 3, 0),
            Err(OptError::Incompatible { .. })
        ));
        let toy = Instance::Quadratic(toy_instance(2.0, 1.0, 4.0).unwrap());
        let sdca = make_optimizer(
            "sdca",
            &OptParams {
                n: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            run(&sdca, &toy, 3, 0),
            Err(OptError::Incompatible { .. })
        ));
    }

    #[test]
    fn every_primal_method_converges_on_fsm() {
        let inst = Instance::Quadratic(fsm_instance(&[1.0, -2.0, 3.5], 10.0, 1.0, 1.0, 4).unwrap());
        // Coordinate minimisation on one component at a time settles into a
        // cycle around the minimizer of the average, so it is left out.
        for name in OPTIMIZER_NAMES
            .iter()
            .filter(|n| !matches!(**n, "sdca" | "cd_cyclic" | "cd_random"))
        {
            let opt = make_optimizer(name, &params(&inst)).unwrap();
            let r = run(&opt, &inst, 3000, 11).unwrap();
            let last = *r.suboptimality.last().unwrap();
            assert!(last < 1e-4 * r.suboptimality[0], "{name}: {last}");
            assert!(r.log.max_touched_per_query <= 1);
            assert_eq!(r.touches.len(), 3001);
        }
    }

    #[test]
    fn touches_per_step() {
        let inst = Instance::Quadratic(fsm_instance(&[0.0; 4], 10.0, 1.0, 1.0, 4).unwrap());
        let p = params(&inst);
        let per_step = |name: &str| {
            let r = run(&make_optimizer(name, &p).unwrap(), &inst, 12, 0).unwrap();
            r.touches
                .windows(2)
                .map(|w| w[1] - w[0])
                .collect::<Vec<_>>()
        };
        assert!(per_step("gd").iter().all(|&t| t == 4));
        assert!(per_step("agd").iter().all(|&t| t == 4));
        assert!(per_step("sag").iter().all(|&t| t == 1));
        assert!(per_step("sdca_primal").iter().all(|&t| t == 1));
        assert_eq!(per_step("svrg")[..6], [1, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn sdca_decreases_dual_monotonically() {
        let inst = Instance::Rlm(rlm_instance(&[0.3, -1.0, 1.2], 0.05, 6).unwrap());
        let opt = make_optimizer("sdca", &params(&inst)).unwrap();
        for seed in 0..10 {
            let r = run(&opt, &inst, 2000, seed).unwrap();
            assert!(r.suboptimality.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            assert!(*r.suboptimality.last().unwrap() < 1e-10);
        }
    }

    #[test]
    fn schedules_are_oblivious() {
        let inst = Instance::Quadratic(fsm_instance(&[1.0, -2.0], 10.0, 1.0, 1.0, 3).unwrap());
        for name in OPTIMIZER_NAMES
            .iter()
            .filter(|n| !matches!(**n, "sdca" | "lbfgs"))
        {
            let opt = make_optimizer(name, &params(&inst)).unwrap();
            assert!(audit_obliviousness(&opt, &inst, 50, 4).unwrap(), "{name}");
        }
        let lbfgs = make_optimizer("lbfgs", &params(&inst)).unwrap();
        assert!(matches!(
            audit_obliviousness(&lbfgs, &inst, 5, 0),
            Err(OptError::NotOblivious(_))
        ));
    }

    #[test]
    fn lbfgs_terminates_on_chain() {
        let inst = Instance::Quadratic(nesterov_chain(40, 100.0, 1.0).unwrap());
        let opt = make_optimizer(
            "lbfgs",
            &OptParams {
                memory: Some(100),
                ..params(&inst)
            },
        )
        .unwrap();
        let r = run(&opt, &inst, 60, 0).unwrap();
        assert!(r.suboptimality[50] < 1e-12, "{:?}", &r.suboptimality[40..]);
        assert!(!r.log.oblivious);
    }
}
