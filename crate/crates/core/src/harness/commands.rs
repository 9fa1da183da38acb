use std::fmt::Write as _;
use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::json;

use crate::approx_bounds::{
    identity_checks, l2_weighted_exact, smooth_bound_packaged, theorem_bounds, TheoremFamily,
};
use crate::approx_oracle::best_weighted_l2;
use crate::instances::{
    fsm_instance, fsm_minimizer_separation, nesterov_chain, rlm_instance, rlm_minimizer_separation,
    Family, Instance,
};
use crate::optimizers::{
    audit_obliviousness, expected_error_curve, make_optimizer, run_with, Metric, Optimizer,
    Sampling,
};
use crate::oracles::{answer, OracleQuery};
use crate::polynomials::{rational_from_f64, sgn_u_moment, UniPoly};
use crate::symbolic_trace::{fig2_data, trace_gd_toy, trace_oblivious, trace_sup_error};

use super::checks::*;
use super::config::ExperimentConfig;
use super::output::{fmt_f64, line_plot, Series, Table};
use super::{Artifact, CommandReport, HarnessError, Status};

fn artifact(name: impl Into<String>, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents,
    }
}

fn optimizers(cfg: &ExperimentConfig) -> Result<Vec<Optimizer>, HarnessError> {
    let p = cfg.opt_params();
    cfg.experiment
        .optimizers
        .iter()
        .map(|name| make_optimizer(name, &p).map_err(HarnessError::from))
        .collect()
}

/// Iteration lower bounds for every family at the configured parameters.
pub fn cmd_bounds(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let p = cfg.problem_params();
    let mut t = Table::new(&["family", "bound", "raw", "rate_term"], "iterations");
    let mut summary = String::new();
    for (name, fam) in [
        ("toy", TheoremFamily::Toy),
        ("fsm", TheoremFamily::Fsm),
        ("smooth", TheoremFamily::Smooth),
        ("rlm", TheoremFamily::Rlm),
    ] {
        match theorem_bounds(&p, fam) {
            Ok(b) => {
                t.push(vec![
                    name.into(),
                    fmt_f64(b.value),
                    fmt_f64(b.raw),
                    fmt_f64(b.rate_term),
                ]);
                let _ = writeln!(summary, "{name:>16}: {:.4}", b.value);
            }
            Err(e) => {
                let _ = writeln!(summary, "{name:>16}: skipped ({e})");
            }
        }
    }
    if let Ok(v) = smooth_bound_packaged(&p) {
        t.push(vec![
            "smooth_packaged".into(),
            fmt_f64(v),
            fmt_f64(v),
            fmt_f64(v),
        ]);
        let _ = writeln!(summary, "{:>16}: {v:.4}", "smooth_packaged");
    }
    Ok(CommandReport {
        artifacts: vec![artifact("bounds.csv", t.to_csv(&cfg.hash()))],
        summary,
        status: Status::Pass,
    })
}

fn sandwich_options(cfg: &ExperimentConfig, maxnorm_scale: f64) -> SandwichOptions {
    SandwichOptions {
        k_max: cfg.grid.k_max as u32,
        uniform_grid: cfg.grid.uniform,
        l1_grid: cfg.grid.l1,
        maxnorm_scale,
    }
}

/// Brute-force approximation errors against their lower bounds.
pub fn cmd_approx_check(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let rows = sandwich_rows(&sandwich_options(cfg, 1.0))?;
    let mut t = Table::new(
        &["norm", "case", "k", "lower_bound", "achieved", "ratio"],
        "k: polynomial degree; errors in the stated norm",
    );
    let mut failed = Vec::new();
    for r in &rows {
        t.push(vec![
            r.norm.into(),
            r.case.clone(),
            r.k.to_string(),
            fmt_f64(r.lower),
            fmt_f64(r.achieved),
            fmt_f64(r.achieved / r.lower),
        ]);
        if !r.holds(1e-9) {
            failed.push(format!("{} {} k={}", r.norm, r.case, r.k));
        }
    }
    let summary = if failed.is_empty() {
        format!("{} comparisons, all above their lower bounds\n", rows.len())
    } else {
        format!(
            "{} of {} below the bound: {}\n",
            failed.len(),
            rows.len(),
            failed.join("; ")
        )
    };
    Ok(CommandReport {
        artifacts: vec![artifact("approx_check.csv", t.to_csv(&cfg.hash()))],
        summary,
        status: if failed.is_empty() {
            Status::Pass
        } else {
            Status::CheckFailed
        },
    })
}

/// Symbolic iterates of each configured schedule, as polynomial JSON and
/// evaluated on the parameter grid.
pub fn cmd_trace(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let family = cfg.family();
    let k = cfg.experiment.iterations;
    let grid = family.grid(cfg.grid.points);
    let mut artifacts = Vec::new();
    let mut summary = String::new();
    for opt in optimizers(cfg)? {
        let trace = trace_oblivious(&opt, &family, k, 0)?;
        let it = trace.iterate();
        let doc = json!({
            "optimizer": opt.name(),
            "family": family,
            "steps": k,
            "seed": 0,
            "degree_history": trace.degree_history,
            "iterate": it.entries.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
        });
        artifacts.push(artifact(
            format!("trace_{}.json", opt.name()),
            serde_json::to_string_pretty(&doc).expect("json") + "\n",
        ));
        let mut header = vec!["param".to_string()];
        header.extend((0..it.len()).map(|i| format!("w_{i}")));
        header.push("error".into());
        let mut t = Table {
            header,
            units: "param: swept instance parameter; error: euclidean distance to the minimizer"
                .into(),
            rows: Vec::new(),
        };
        for &p in &grid {
            let w = it
                .eval_f64(&family.parameter_point(p))
                .map_err(crate::symbolic_trace::TraceError::from)?;
            let target = family.minimizer_at(p)?;
            let e = w
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let mut row = vec![p];
            row.extend(&w);
            row.push(e);
            t.push_f64(&row);
        }
        artifacts.push(artifact(
            format!("trace_{}.csv", opt.name()),
            t.to_csv(&cfg.hash()),
        ));
        let sup = trace_sup_error(it, &family, &grid)?;
        let _ = writeln!(
            summary,
            "{:>12}: degree {} after {k} steps, sup error {sup:.6e}",
            opt.name(),
            trace.degree_history.last().copied().unwrap_or(0)
        );
    }
    Ok(CommandReport {
        artifacts,
        summary,
        status: Status::Pass,
    })
}

/// First four GD and AGD iterate polynomials on the scalar family.
pub fn cmd_fig2(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let (l, mu) = (cfg.l(), cfg.problem.mu);
    let data = fig2_data(l, mu, 4, cfg.grid.fig2)?;
    let header: Vec<String> = data.header();
    let mut t = Table {
        header,
        units: "eta: curvature; other columns: iterate value".into(),
        rows: Vec::new(),
    };
    for r in data.rows() {
        t.push_f64(&r);
    }
    let mut series = Vec::new();
    let labels: Vec<String> = (1..=4)
        .map(|k| format!("gd k={k}"))
        .chain((1..=4).map(|k| format!("agd k={k}")))
        .collect();
    for (i, col) in data.gd.iter().chain(&data.agd).enumerate() {
        series.push(Series {
            label: &labels[i],
            x: &data.eta,
            y: col,
        });
    }
    series.push(Series {
        label: "1/eta",
        x: &data.eta,
        y: &data.target,
    });
    let svg = line_plot("GD and AGD iterates against 1/eta", &series, false);
    let mut summary = String::from("k  gd_sup_error  agd_sup_error\n");
    for k in 1..=4 {
        let (g, a) = data.sup_errors(k);
        let _ = writeln!(summary, "{k}  {g:.6e}  {a:.6e}");
    }
    Ok(CommandReport {
        artifacts: vec![
            artifact("fig2.csv", t.to_csv(&cfg.hash())),
            artifact("fig2.svg", svg),
        ],
        summary,
        status: Status::Pass,
    })
}

/// GD, AGD, heavy ball and L-BFGS on the chain quadratic.
pub fn cmd_fig1(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let res = fig1_analysis(&cfg.fig1)?;
    let mut header = vec!["k"];
    header.extend(res.curves.iter().map(|c| c.name.as_str()));
    let mut t = Table::new(&header, "k: iteration; columns: F(w_k) - F*");
    for k in 0..=cfg.fig1.iterations {
        let mut row = vec![k as f64];
        row.extend(res.curves.iter().map(|c| c.suboptimality[k]));
        t.push_f64(&row);
    }
    let ks: Vec<f64> = (0..=cfg.fig1.iterations).map(|k| k as f64).collect();
    let series: Vec<Series> = res
        .curves
        .iter()
        .map(|c| Series {
            label: &c.name,
            x: &ks,
            y: &c.suboptimality,
        })
        .collect();
    let svg = line_plot(
        &format!("chain quadratic, d={}, kappa={}", res.d, res.kappa),
        &series,
        true,
    );
    let mut summary = format!("target log-slope {:.4}\n", res.target_slope);
    for c in &res.curves {
        let fmt = |f: Option<LogLinearFit>| match f {
            Some(f) => format!("slope {:.4} r2 {:.4}", f.slope, f.r2),
            None => "no fit".into(),
        };
        let _ = writeln!(
            summary,
            "{:>6}: window {}, slope window {}, 1e-10 reached at {}",
            c.name,
            fmt(c.fit),
            fmt(c.slope_fit),
            c.crossing
                .map(|k| k.to_string())
                .unwrap_or_else(|| "never".into())
        );
    }
    Ok(CommandReport {
        artifacts: vec![
            artifact("fig1.csv", t.to_csv(&cfg.hash())),
            artifact("fig1.svg", svg),
        ],
        summary,
        status: Status::Pass,
    })
}

fn metric_unit(m: Metric) -> &'static str {
    match m {
        Metric::Suboptimality => "F(w_k) - F*",
        Metric::Distance => "|w_k - w*|",
    }
}

/// Worst-case Monte-Carlo error curves over the parameter grid.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let family = cfg.family();
    let grid = family.grid(cfg.grid.points);
    let e = &cfg.experiment;
    let mut artifacts = Vec::new();
    let mut summary = String::new();
    for opt in optimizers(cfg)? {
        let c = expected_error_curve(&opt, &family, &grid, e.iterations, e.seeds, e.metric)?;
        let mut t = Table::new(
            &["k", "err_mean", "err_stderr", "worst_eta"],
            format!(
                "k: step; err: {}; worst_eta: maximising parameter",
                metric_unit(e.metric)
            ),
        );
        for k in 0..=e.iterations {
            t.push_f64(&[
                k as f64,
                c.worst_mean[k],
                c.worst_stderr[k],
                c.worst_param[k],
            ]);
        }
        artifacts.push(artifact(
            format!("run_{}.csv", opt.name()),
            t.to_csv(&cfg.hash()),
        ));
        let _ = writeln!(
            summary,
            "{:>12}: final worst mean {:.6e} (stderr {:.2e})",
            opt.name(),
            c.worst_mean[e.iterations],
            c.worst_stderr[e.iterations]
        );
    }
    Ok(CommandReport {
        artifacts,
        summary,
        status: Status::Pass,
    })
}

/// Audits every configured optimizer against the family's envelope.
pub fn cmd_envelope(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let family = cfg.family();
    let grid = family.grid(cfg.grid.points);
    let e = &cfg.experiment;
    let mut artifacts = Vec::new();
    let mut summary = String::new();
    let mut violations = 0;
    for opt in optimizers(cfg)? {
        let audit = envelope_audit(
            &opt,
            &family,
            &grid,
            e.iterations,
            e.seeds,
            cfg.envelope.prefactor,
        )?;
        let mut t = Table::new(
            &["k", "empirical_worst", "envelope", "margin"],
            format!(
                "k: step; empirical_worst: worst mean {} less 3 stderr; margin: empirical_worst - envelope",
                metric_unit(audit.metric)
            ),
        );
        for r in &audit.rows {
            t.push_f64(&[r.k as f64, r.empirical(), r.envelope, r.margin()]);
        }
        artifacts.push(artifact(
            format!("envelope_{}.csv", opt.name()),
            t.to_csv(&cfg.hash()),
        ));
        let v = audit.violations();
        violations += v;
        let tightest = audit
            .rows
            .iter()
            .filter(|r| r.envelope > 0.0)
            .map(|r| r.empirical() / r.envelope)
            .fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            summary,
            "{:>12}: {v} violations, smallest empirical/envelope ratio {tightest:.4e}",
            opt.name()
        );
    }
    Ok(CommandReport {
        artifacts,
        summary,
        status: if violations == 0 {
            Status::Pass
        } else {
            Status::EnvelopeViolation
        },
    })
}

/// With- and without-replacement sampling side by side. Reported, not
/// asserted.
pub fn cmd_sampling_compare(cfg: &ExperimentConfig) -> Result<CommandReport, HarnessError> {
    let family = cfg.family();
    let grid = family.grid(cfg.grid.points);
    let e = &cfg.experiment;
    let mut artifacts = Vec::new();
    let mut summary = String::new();
    for name in &e.optimizers {
        let curve = |s: Sampling| -> Result<_, HarnessError> {
            let p = crate::optimizers::OptParams {
                sampling: s,
                ..cfg.opt_params()
            };
            let opt = make_optimizer(name, &p)?;
            Ok(expected_error_curve(
                &opt,
                &family,
                &grid,
                e.iterations,
                e.seeds,
                e.metric,
            )?)
        };
        let with = curve(Sampling::WithReplacement)?;
        let without = curve(Sampling::WithoutReplacement)?;
        let mut t = Table::new(
            &["k", "with_replacement", "without_replacement", "ratio"],
            format!("k: step; columns: worst mean {}", metric_unit(e.metric)),
        );
        let mut max_ratio: f64 = 0.0;
        for k in 0..=e.iterations {
            let (a, b) = (with.worst_mean[k], without.worst_mean[k]);
            let ratio = if b > 0.0 { a / b } else { f64::NAN };
            if ratio.is_finite() {
                max_ratio = max_ratio.max(ratio.max(1.0 / ratio));
            }
            t.push_f64(&[k as f64, a, b, ratio]);
        }
        artifacts.push(artifact(
            format!("sampling_{name}.csv"),
            t.to_csv(&cfg.hash()),
        ));
        let _ = writeln!(
            summary,
            "{name:>12}: largest ratio either way {max_ratio:.4}"
        );
    }
    Ok(CommandReport {
        artifacts,
        summary,
        status: Status::Pass,
    })
}

// ---------------------------------------------------------------------------
// verify-all

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = Box<dyn Fn() -> Result<(), String> + Send + Sync>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Options for [`verify_all`]. `maxnorm_scale` corrupts the uniform lower
/// bound, to show the sandwich check notices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub maxnorm_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { maxnorm_scale: 1.0 }
    }
}

fn binomial_gd(k: usize, l: &BigRational) -> UniPoly {
    // (1/L) sum_i (-1)^i C(k, i+1) (eta/L)^i
    let mut coeffs = Vec::with_capacity(k);
    let mut binom = BigRational::from_integer(k.into());
    let mut lpow = l.clone();
    for i in 0..k {
        let sign = if i % 2 == 0 { 1 } else { -1 };
        coeffs.push(&binom * BigRational::from_integer(sign.into()) / &lpow);
        binom *= BigRational::new((k - i - 1).into(), (i + 2).into());
        lpow *= l;
    }
    UniPoly::from_coeffs(coeffs)
}

fn checks(opts: VerifyOptions) -> Vec<(&'static str, &'static str, CheckFn)> {
    let scale = opts.maxnorm_scale;
    vec![
        (
            "polynomials",
            "sign_pattern_orthogonality",
            Box::new(|| {
                for k in 1..=10 {
                    for j in 0..k {
                        let m = sgn_u_moment(k, j);
                        ensure(m.abs() <= 1e-10, || format!("k={k} j={j}: {m:e}"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "polynomials",
            "gd_trace_binomial_form",
            Box::new(|| {
                for l in [1i64, 4, 10] {
                    let l = BigRational::from_integer(l.into());
                    for k in 0..=12 {
                        ensure(trace_gd_toy(k, &l) == binomial_gd(k, &l), || {
                            format!("L={l} k={k}")
                        })?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "approx_bounds",
            "ratio_and_sign_integral_identities",
            Box::new(|| {
                for u in [1.1, 1.25, 2.0, 10.0, 1e6] {
                    let r = identity_checks(u, &[]).map_err(|e| e.to_string())?;
                    ensure(r.ratio_identity_residual <= 1e-12, || {
                        format!("u={u}: {:e}", r.ratio_identity_residual)
                    })?;
                }
                for u in [1.5, 2.0, 5.0] {
                    let r = identity_checks(u, &[1, 2, 3, 4, 5, 6]).map_err(|e| e.to_string())?;
                    for (k, res) in r.sign_integral_residuals {
                        ensure(res <= 1e-6, || format!("u={u} k={k}: {res:e}"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "approx_bounds",
            "weighted_l2_closed_form",
            Box::new(|| {
                for alpha in [-0.9, -0.5, -0.1] {
                    for k in 0..=8u32 {
                        let solved = best_weighted_l2(alpha, k as usize)
                            .map_err(|e| e.to_string())?
                            .error;
                        let closed = l2_weighted_exact(alpha, k).map_err(|e| e.to_string())?;
                        ensure((solved - closed).abs() <= 1e-9 * closed.max(1e-300), || {
                            format!("alpha={alpha} k={k}: {solved:e} vs {closed:e}")
                        })?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "approx_oracle",
            "bound_sandwiches",
            Box::new(move || {
                let rows = sandwich_rows(&SandwichOptions {
                    k_max: 8,
                    uniform_grid: crate::approx_oracle::DEFAULT_UNIFORM_GRID,
                    l1_grid: crate::approx_oracle::DEFAULT_L1_GRID,
                    maxnorm_scale: scale,
                })
                .map_err(|e| e.to_string())?;
                match rows.iter().find(|r| !r.holds(1e-9)) {
                    Some(r) => Err(format!(
                        "{} {} k={}: {:e} < {:e}",
                        r.norm, r.case, r.k, r.achieved, r.lower
                    )),
                    None => Ok(()),
                }
            }),
        ),
        (
            "approx_oracle",
            "corrupted_bound_is_detected",
            Box::new(|| {
                let rows = sandwich_rows(&SandwichOptions {
                    k_max: 4,
                    uniform_grid: 1025,
                    l1_grid: 257,
                    maxnorm_scale: 1.5,
                })
                .map_err(|e| e.to_string())?;
                ensure(rows.iter().any(|r| !r.holds(1e-9)), || {
                    "a 1.5x bound went unnoticed".into()
                })
            }),
        ),
        (
            "instances",
            "minimizers_solve_the_normal_equations",
            Box::new(|| {
                let fsm = fsm_instance(&[-4.5, 0.5, 2.0, 4.5], 10.0, 1.0, 1.0, 5)
                    .map_err(|e| e.to_string())?;
                let chain = nesterov_chain(60, 100.0, 1.0).map_err(|e| e.to_string())?;
                for inst in [fsm, chain] {
                    let n = crate::instances::norm(&inst.model.gradient(&inst.minimizer));
                    ensure(n <= 1e-10, || {
                        format!("{:?}: gradient norm {n:e}", inst.description)
                    })?;
                }
                let rlm = rlm_instance(&[0.4, -1.2, 1.5], 0.1, 6).map_err(|e| e.to_string())?;
                let g = rlm.dual.gradient(&rlm.dual_minimizer);
                ensure(g.iter().all(|x| x.abs() <= 1e-12), || {
                    "dual gradient at dual minimizer".into()
                })?;
                let w = rlm.primal_from_dual(&rlm.dual_minimizer);
                let gap = rlm.primal_value(&w) + rlm.dual_optimum;
                ensure(gap.abs() <= 1e-12, || format!("duality gap {gap:e}"))
            }),
        ),
        (
            "instances",
            "chain_spectrum_within_curvature_bounds",
            Box::new(|| {
                let (l, mu) = (200.0, 1.0);
                let chain = nesterov_chain(40, l, mu).map_err(|e| e.to_string())?;
                let h = chain.model.components[0].hessian.to_dense(&());
                let ev = crate::linalg::symmetric_eigenvalues(h);
                let (lo, hi) = (ev[0], ev[ev.len() - 1]);
                ensure(lo >= mu * (1.0 - 1e-9) && hi <= l * (1.0 + 1e-9), || {
                    format!("eigenvalues span [{lo}, {hi}]")
                })
            }),
        ),
        (
            "instances",
            "minimizer_separations",
            Box::new(|| {
                let s = fsm_minimizer_separation(8, 100.0, 1.0, 0).map_err(|e| e.to_string())?;
                ensure(s >= 0.2 && (s - 0.9246).abs() < 1e-3, || {
                    format!("fsm separation {s}")
                })?;
                let r = rlm_minimizer_separation(100, 0.01).map_err(|e| e.to_string())?;
                let want = 2.0 * 2f64.sqrt() / 3.0;
                ensure((r - want).abs() <= 1e-12, || {
                    format!("rlm separation {r} vs {want}")
                })
            }),
        ),
        (
            "oracles",
            "coordinate_step_zeroes_partial_derivative",
            Box::new(|| {
                let inst =
                    fsm_instance(&[1.5, -3.0], 10.0, 1.0, 1.0, 4).map_err(|e| e.to_string())?;
                let w = [0.3, -1.0, 0.25, 2.0];
                for j in 0..2 {
                    for i in 0..4 {
                        let q = OracleQuery::SteepestCd {
                            coordinate: i,
                            component: j,
                        };
                        let out = answer(&inst.model, &w, &q).map_err(|e| e.to_string())?;
                        let d = inst.model.component_gradient(j, &out)[i];
                        ensure(d.abs() <= 1e-12, || format!("i={i} j={j}: {d:e}"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "optimizers",
            "schedules_ignore_answers",
            Box::new(|| {
                let inst = Instance::Quadratic(
                    fsm_instance(&[1.0, -2.0, 0.0], 10.0, 1.0, 1.0, 3)
                        .map_err(|e| e.to_string())?,
                );
                let p = crate::optimizers::OptParams::for_instance(&inst);
                for name in [
                    "gd",
                    "agd",
                    "hb",
                    "sgd",
                    "sag",
                    "saga",
                    "svrg",
                    "sdca_primal",
                    "cd_cyclic",
                    "cd_random",
                ] {
                    let opt = make_optimizer(name, &p).map_err(|e| e.to_string())?;
                    let ok = audit_obliviousness(&opt, &inst, 60, 9).map_err(|e| e.to_string())?;
                    ensure(ok, || format!("{name} changed its queries"))?;
                }
                Ok(())
            }),
        ),
        (
            "optimizers",
            "gd_contraction_on_scalar_family",
            Box::new(|| {
                let fam = Family::Toy { mu: 1.0, l: 4.0 };
                let gd = make_optimizer(
                    "gd",
                    &crate::optimizers::OptParams {
                        l: Some(4.0),
                        n: Some(1),
                        ..Default::default()
                    },
                )
                .map_err(|e| e.to_string())?;
                let rate: f64 = 1.0 - 2.0 / (1.0 + 4.0);
                for eta in fam.grid(33) {
                    let inst = fam.instantiate(eta).map_err(|e| e.to_string())?;
                    let rec = run_with(&gd, &inst, 200, 0, false).map_err(|e| e.to_string())?;
                    for (k, d) in rec.distance.iter().enumerate() {
                        let bound = rate.powf(k as f64 / 2.0) / eta;
                        ensure(*d <= bound * (1.0 + 1e-12) + 1e-15, || {
                            format!("eta={eta} k={k}: {d:e} > {bound:e}")
                        })?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "symbolic_trace",
            "degree_budgets",
            Box::new(|| {
                let fsm = Family::Fsm {
                    n: 3,
                    d: 4,
                    l: 10.0,
                    mu: 1.0,
                    r: 1.0,
                    coordinate: 0,
                };
                let p = crate::optimizers::OptParams {
                    l: Some(10.0),
                    mu: Some(1.0),
                    n: Some(3),
                    d: Some(4),
                    ..Default::default()
                };
                for name in ["gd", "sgd", "sag", "svrg", "cd_cyclic"] {
                    let opt = make_optimizer(name, &p).map_err(|e| e.to_string())?;
                    trace_oblivious(&opt, &fsm, 6, 1).map_err(|e| format!("{name}: {e}"))?;
                }
                let smooth = Family::Smooth {
                    l: 1.0,
                    r: 1.0,
                    d: 3,
                };
                let sp = crate::optimizers::OptParams {
                    l: Some(1.0),
                    mu: Some(0.1),
                    n: Some(1),
                    d: Some(3),
                    ..Default::default()
                };
                for name in ["gd", "agd", "hb"] {
                    let opt = make_optimizer(name, &sp).map_err(|e| e.to_string())?;
                    trace_oblivious(&opt, &smooth, 8, 0).map_err(|e| format!("{name}: {e}"))?;
                }
                let rlm = Family::Rlm {
                    n: 6,
                    lambda: 0.1,
                    block: 0,
                };
                let sdca = make_optimizer(
                    "sdca",
                    &crate::optimizers::OptParams {
                        n: Some(6),
                        ..Default::default()
                    },
                )
                .map_err(|e| e.to_string())?;
                trace_oblivious(&sdca, &rlm, 12, 2).map_err(|e| format!("sdca: {e}"))?;
                Ok(())
            }),
        ),
        (
            "symbolic_trace",
            "trace_agrees_with_float_run",
            Box::new(|| {
                let fam = Family::Fsm {
                    n: 3,
                    d: 4,
                    l: 10.0,
                    mu: 1.0,
                    r: 1.0,
                    coordinate: 1,
                };
                let p = crate::optimizers::OptParams {
                    l: Some(10.0),
                    mu: Some(1.0),
                    n: Some(3),
                    d: Some(4),
                    ..Default::default()
                };
                let opt = make_optimizer("saga", &p).map_err(|e| e.to_string())?;
                let trace = trace_oblivious(&opt, &fam, 6, 5).map_err(|e| e.to_string())?;
                for eta in [-4.5, -1.0, 0.75, 4.5] {
                    let point: Vec<BigRational> = fam
                        .parameter_point(eta)
                        .iter()
                        .map(|&x| rational_from_f64(x).expect("finite"))
                        .collect();
                    let exact = trace.iterate().eval(&point).map_err(|e| e.to_string())?;
                    let inst = fam.instantiate(eta).map_err(|e| e.to_string())?;
                    let rec = run_with(&opt, &inst, 6, 5, true).map_err(|e| e.to_string())?;
                    let float = &rec.iterates.expect("kept")[6];
                    for (a, b) in exact.iter().zip(float) {
                        let a = crate::polynomials::rational_to_f64(a);
                        ensure((a - b).abs() <= 1e-9, || format!("eta={eta}: {a} vs {b}"))?;
                    }
                }
                Ok(())
            }),
        ),
    ]
}

/// Runs every check and reports a pass/fail table with timings.
pub fn verify_all(opts: VerifyOptions) -> Vec<CheckOutcome> {
    checks(opts)
        .into_par_iter()
        .map(|(module, name, f)| {
            let start = Instant::now();
            let res = f();
            CheckOutcome {
                module,
                name,
                passed: res.is_ok(),
                detail: res.err().unwrap_or_default(),
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn cmd_verify_all(opts: VerifyOptions) -> Result<CommandReport, HarnessError> {
    let outcomes = verify_all(opts);
    let mut t = Table::new(
        &["module", "check", "status", "seconds"],
        "seconds: wall clock",
    );
    let mut summary = String::new();
    let mut modules: Vec<&str> = outcomes.iter().map(|o| o.module).collect();
    modules.dedup();
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        t.push(vec![
            o.module.into(),
            o.name.into(),
            status.into(),
            format!("{:.3}", o.seconds),
        ]);
        let _ = writeln!(
            summary,
            "{status}  {:<15} {:<42} {:>8.3}s{}",
            o.module,
            o.name,
            o.seconds,
            if o.passed {
                String::new()
            } else {
                format!("  ({})", o.detail)
            }
        );
    }
    summary.push('\n');
    for m in modules {
        let (pass, total) = outcomes
            .iter()
            .filter(|o| o.module == m)
            .fold((0, 0), |(p, t), o| (p + o.passed as usize, t + 1));
        let _ = writeln!(summary, "{m:<15} {pass}/{total} passed");
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    if !failed.is_empty() {
        let _ = writeln!(summary, "failing: {}", failed.join(", "));
    }
    Ok(CommandReport {
        artifacts: vec![artifact("verify_all.csv", t.to_csv("none"))],
        summary,
        status: if failed.is_empty() {
            Status::Pass
        } else {
            Status::CheckFailed
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(src: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(src).unwrap()
    }

    #[test]
    fn verify_all_passes_and_notices_a_corrupted_bound() {
        let ok = verify_all(VerifyOptions::default());
        let failed: Vec<_> = ok.iter().filter(|o| !o.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
        let bad = verify_all(VerifyOptions { maxnorm_scale: 1.5 });
        let sandwich = bad.iter().find(|o| o.name == "bound_sandwiches").unwrap();
        assert!(!sandwich.passed);
    }

    #[test]
    fn envelope_command_writes_one_row_per_step() {
        let cfg = small(
            "[experiment]\nfamily = \"fsm\"\noptimizers = [\"saga\"]\niterations = 20\nseeds = 4\n[grid]\npoints = 3\n",
        );
        let rep = cmd_envelope(&cfg).unwrap();
        assert_eq!(rep.status, Status::Pass);
        let csv = rep.artifact("envelope_saga.csv").unwrap();
        assert!(csv.starts_with("# config_hash="));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 21);
    }

    #[test]
    fn run_output_is_independent_of_thread_count() {
        let cfg = small("[experiment]\nfamily = \"fsm\"\noptimizers = [\"sgd\"]\niterations = 15\nseeds = 6\n[grid]\npoints = 5\n");
        let a = cmd_run(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| cmd_run(&cfg).unwrap());
        assert_eq!(a.artifacts, b.artifacts);
    }

    #[test]
    fn trace_command_emits_json_and_grid() {
        let cfg = small("[experiment]\nfamily = \"toy\"\noptimizers = [\"gd\"]\niterations = 3\n[problem]\nl = 4.0\n[grid]\npoints = 5\n");
        let rep = cmd_trace(&cfg).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(rep.artifact("trace_gd.json").unwrap()).unwrap();
        assert_eq!(v["steps"], 3);
        assert_eq!(rep.artifact("trace_gd.csv").unwrap().lines().count(), 2 + 5);
    }

    #[test]
    fn bounds_and_fig2_commands_run() {
        let cfg = ExperimentConfig::default();
        let b = cmd_bounds(&cfg).unwrap();
        assert!(b.artifact("bounds.csv").unwrap().contains("\nfsm,"));
        let mut cfg = cfg;
        cfg.grid.fig2 = 65;
        let f = cmd_fig2(&cfg).unwrap();
        assert!(f.artifact("fig2.svg").unwrap().contains("<svg"));
    }
}
