use std::collections::VecDeque;

use crate::instances::{dot, QuadraticModel};
use crate::oracles::{answer, CallLog, OracleQuery};

use super::OptError;

/// Full gradient through `n` first-order queries, logged.
fn full_gradient(
    model: &QuadraticModel<f64>,
    w: &[f64],
    log: &mut CallLog,
) -> Result<Vec<f64>, OptError> {
    let n = model.n();
    let mut g = vec![0.0; model.dim];
    for j in 0..n {
        let q = OracleQuery::gradient_step(1.0 / n as f64, 0.0, j);
        log.record_query(&q);
        log.record_touch(j);
        for (gi, a) in g.iter_mut().zip(answer(model, w, &q)?) {
            *gi += a;
        }
    }
    Ok(g)
}

/// Limited-memory BFGS with exact line search along each direction.
///
/// The step length `-g.p / p.Hp` reads the current gradient, so the
/// method is not oblivious. `Hp` comes from one extra gradient at
/// `w + p`, and the new gradient follows from linearity. `observe` is
/// called with the iterate and cumulative touches after every iteration.
pub fn run_lbfgs(
    model: &QuadraticModel<f64>,
    memory: usize,
    iterations: usize,
    observe: &mut dyn FnMut(&[f64], u64),
) -> Result<CallLog, OptError> {
    let mut log = CallLog::new(model.n(), false);
    let mut w = vec![0.0; model.dim];
    observe(&w, 0);
    if iterations == 0 {
        return Ok(log);
    }
    let mut g = full_gradient(model, &w, &mut log)?;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    for _ in 0..iterations {
        let gg = dot(&g, &g);
        if gg == 0.0 || !gg.is_finite() {
            observe(&w, log.total_touches());
            continue;
        }
        // Two-loop recursion for p = -H_k g.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = pairs
            .back()
            .map(|(s, y, _)| dot(s, y) / dot(y, y))
            .unwrap_or(1.0);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut p: Vec<f64> = q.iter().map(|x| -x).collect();
        if dot(&p, &g) >= 0.0 {
            p = g.iter().map(|x| -x).collect();
        }
        let probe: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a + b).collect();
        let g_probe = full_gradient(model, &probe, &mut log)?;
        let hp: Vec<f64> = g_probe.iter().zip(&g).map(|(a, b)| a - b).collect();
        let curv = dot(&p, &hp);
        if !(curv > 0.0) {
            observe(&w, log.total_touches());
            continue;
        }
        let t = -dot(&g, &p) / curv;
        let s: Vec<f64> = p.iter().map(|x| t * x).collect();
        let y: Vec<f64> = hp.iter().map(|x| t * x).collect();
        for (wi, si) in w.iter_mut().zip(&s) {
            *wi += si;
        }
        for (gi, yi) in g.iter_mut().zip(&y) {
            *gi += yi;
        }
        let sy = dot(&s, &y);
        if sy > 0.0 {
            if pairs.len() == memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        observe(&w, log.total_touches());
    }
    Ok(log)
}
