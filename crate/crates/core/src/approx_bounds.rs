//! Closed-form lower bounds on polynomial approximation errors, the rate
//! envelopes they induce for oblivious methods, and the scalar identities
//! the bounds rely on.
//!
//! Every function is pure and checks its domain, returning
//! [`BoundError::Domain`] instead of producing NaN.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polynomials::chebyshev_u_zeros;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
}

fn domain<T>(msg: impl Into<String>) -> Result<T, BoundError> {
    Err(BoundError::Domain(msg.into()))
}

/// `u - sqrt(u^2 - 1)` without cancellation for large `u`.
pub fn chebyshev_ratio(u: f64) -> f64 {
    1.0 / (u + (u * u - 1.0).sqrt())
}

/// `(sqrt(x) - 1) / (sqrt(x) + 1)` for `x >= 1`.
pub fn sqrt_ratio(x: f64) -> f64 {
    let s = x.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// Best uniform error of degree-`k` polynomials against `1/(x - c)` on
/// `[-1, 1]`: `(c - sqrt(c^2 - 1))^k / (c^2 - 1)`.
pub fn chebyshev_lb_inf(c: f64, k: u32) -> Result<f64, BoundError> {
    if !(c > 1.0) {
        return domain(format!("c must exceed 1, got {c}"));
    }
    Ok(chebyshev_ratio(c).powi(k as i32) / (c * c - 1.0))
}

/// Lower bound on the uniform error of degree-`k` polynomials against
/// `1/(x + c)` on `[a, b]`.
pub fn maxnorm_lb(a: f64, b: f64, c: f64, k: u32) -> Result<f64, BoundError> {
    if !(b > a && a > 0.0 && c > -a) {
        return domain(format!("need b > a > 0 and c > -a, got a={a} b={b} c={c}"));
    }
    let width = b - a;
    let sum = b + a + 2.0 * c;
    let prefactor = 2.0 * width / (sum * sum - width * width);
    Ok(prefactor * sqrt_ratio((b + c) / (a + c)).powi(k as i32))
}

/// Lower bound on `min_p int |p(x) - 1/(x + alpha)| dx` over
/// `[-(L-mu)/2, (L-mu)/2]`, with `p` of degree at most `k - 1`.
///
/// Substituting `x = (L-mu)/2 * t` turns the target into `1/(u - t)` on
/// `[-1, 1]` with `u = 2 alpha/(L-mu)`. The bound is only sound while
/// `u + sqrt(u^2-1) <= 4`, i.e. `u <= 17/8`; past that point the best
/// constant (`k = 1`) already beats it. See [`l1_lb_is_sound`].
pub fn l1_lb(l: f64, mu: f64, alpha: f64, k: u32) -> Result<f64, BoundError> {
    if !(l > mu) {
        return domain(format!("need L > mu, got L={l} mu={mu}"));
    }
    if !(alpha > (l - mu) / 2.0) {
        return domain(format!("need alpha > (L-mu)/2, got alpha={alpha}"));
    }
    let r = (2.0 * alpha + l - mu) / (2.0 * alpha + mu - l);
    Ok(sqrt_ratio(r).powi(k as i32))
}

/// Whether [`l1_lb`] is a valid lower bound for every `k` at these
/// parameters.
pub fn l1_lb_is_sound(l: f64, mu: f64, alpha: f64) -> bool {
    let u = 2.0 * alpha / (l - mu);
    u > 1.0 && u + (u * u - 1.0).sqrt() <= 4.0
}

fn check_alpha(alpha: f64) -> Result<(), BoundError> {
    if alpha > -1.0 && alpha < 0.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (-1, 0), got {alpha}"))
    }
}

/// `1 / (e^2 (k+2)^(2(alpha+1)+2))`.
pub fn l2_weighted_lb(alpha: f64, k: u32) -> Result<f64, BoundError> {
    check_alpha(alpha)?;
    let delta = 2.0 * (alpha + 1.0) + 2.0;
    Ok(1.0 / (E * E * (k as f64 + 2.0).powf(delta)))
}

/// Exact optimum of `min_s int_0^1 x (s(x) x - 1)^2 x^alpha dx` over
/// `s` of degree at most `k - 1`, from the Cauchy-determinant ratio:
/// `(alpha+2) (prod_{j<=k} j/(j+alpha+1))^2 / (k+alpha+2)^2`.
pub fn l2_weighted_exact(alpha: f64, k: u32) -> Result<f64, BoundError> {
    check_alpha(alpha)?;
    let prod: f64 = (1..=k)
        .map(|j| j as f64 / (j as f64 + alpha + 1.0))
        .product();
    let tail = k as f64 + alpha + 2.0;
    Ok((alpha + 2.0) * prod * prod / (tail * tail))
}

/// Geometric curve `prefactor * ratio^(k * per_iteration_exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEnvelope {
    pub prefactor: f64,
    pub ratio: f64,
    pub per_iteration_exponent: f64,
}

impl RateEnvelope {
    pub fn new(
        prefactor: f64,
        ratio: f64,
        per_iteration_exponent: f64,
    ) -> Result<Self, BoundError> {
        if !(prefactor >= 0.0 && (0.0..1.0).contains(&ratio) && per_iteration_exponent > 0.0) {
            return domain(format!(
                "envelope needs prefactor >= 0, ratio in [0,1), exponent > 0; got {prefactor}, {ratio}, {per_iteration_exponent}"
            ));
        }
        Ok(RateEnvelope {
            prefactor,
            ratio,
            per_iteration_exponent,
        })
    }

    /// Value after `k` steps; `0^0` is taken as 1.
    pub fn at(&self, k: f64) -> f64 {
        if k == 0.0 {
            return self.prefactor;
        }
        self.prefactor * self.ratio.powf(k * self.per_iteration_exponent)
    }
}

/// Contraction ratio of the finite-sum envelope,
/// `(sqrt(1+(kappa-1)/n) - 1) / (sqrt(1+(kappa-1)/n) + 1)`.
pub fn fsm_ratio(kappa: f64, n: usize) -> Result<f64, BoundError> {
    if !(kappa >= 1.0) || n == 0 {
        return domain(format!("need kappa >= 1 and n >= 1, got {kappa}, {n}"));
    }
    Ok(sqrt_ratio(1.0 + (kappa - 1.0) / n as f64))
}

/// `prefactor * fsm_ratio(kappa, n)^(k/n)`.
pub fn fsm_rate_envelope(
    kappa: f64,
    n: usize,
    k: usize,
    prefactor: f64,
) -> Result<f64, BoundError> {
    let ratio = fsm_ratio(kappa, n)?;
    if k == 0 {
        return Ok(prefactor);
    }
    Ok(prefactor * ratio.powf(k as f64 / n as f64))
}

/// Finite-sum envelope in function value:
/// `(mu/2) (n R mu / (sqrt2 (L-mu)))^2 * ratio^(2k/n)`.
pub fn fsm_value_envelope(l: f64, mu: f64, n: usize, r: f64) -> Result<RateEnvelope, BoundError> {
    if !(l > mu && mu > 0.0) {
        return domain(format!("need L > mu > 0, got L={l} mu={mu}"));
    }
    let dist = n as f64 * r * mu / (std::f64::consts::SQRT_2 * (l - mu));
    let ratio = fsm_ratio(l / mu, n)?;
    RateEnvelope::new(0.5 * mu * dist * dist, ratio, 2.0 / n as f64)
}

/// Dual-distance envelope for the regularized-loss family:
/// `(n lambda/2) * ratio^(2k/n)` with
/// `ratio = sqrt_ratio(2/(lambda n) + 1)`.
pub fn rlm_distance_envelope(n: usize, lambda: f64) -> Result<RateEnvelope, BoundError> {
    if !(lambda > 0.0) || n == 0 {
        return domain(format!("need lambda > 0 and n >= 1, got {lambda}, {n}"));
    }
    let ln = lambda * n as f64;
    RateEnvelope::new(0.5 * ln, sqrt_ratio(2.0 / ln + 1.0), 2.0 / n as f64)
}

/// Smallest `k` with `eps >= c * sqrt_ratio((L+alpha)/(mu+alpha))^k`,
/// in the relaxed form `(1/2) sqrt((L+alpha)/(mu+alpha) - 1) (ln c + ln(1/eps))`.
pub fn iteration_lb_from_rate(
    l: f64,
    mu: f64,
    alpha: f64,
    c: f64,
    eps: f64,
) -> Result<f64, BoundError> {
    if !(l > mu && mu > 0.0 && alpha >= 0.0 && c > 0.0 && eps > 0.0) {
        return domain(format!(
            "need L > mu > 0, alpha >= 0, c > 0, eps > 0; got L={l} mu={mu} alpha={alpha} c={c} eps={eps}"
        ));
    }
    if eps >= c {
        return Ok(0.0);
    }
    let x = (l + alpha) / (mu + alpha);
    Ok(0.5 * (x - 1.0).sqrt() * (c.ln() - eps.ln()))
}

/// Scalar problem description shared by the iteration-complexity bounds.
/// Unused fields may stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub l: Option<f64>,
    pub mu: Option<f64>,
    pub n: Option<usize>,
    /// Minimizer scale; for the scalar family this is `|x*|`.
    pub r: Option<f64>,
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
    /// Weight exponent in `(-1, 0)` for the smooth family.
    pub alpha: Option<f64>,
}

impl ProblemParams {
    pub fn kappa(&self) -> Option<f64> {
        Some(self.l? / self.mu?)
    }

    /// `2(alpha+1) + 2`, in `(2, 4)`.
    pub fn delta(&self) -> Option<f64> {
        Some(2.0 * (self.alpha? + 1.0) + 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremFamily {
    Toy,
    Fsm,
    Smooth,
    Rlm,
}

/// An iteration lower bound. `value` is clamped at zero, `raw` is the
/// unclamped expression, and `rate_term` is the logarithmic arm before
/// any `max` with a counting term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremBound {
    pub value: f64,
    pub raw: f64,
    pub rate_term: f64,
}

fn need<T: Copy>(v: Option<T>, name: &'static str) -> Result<T, BoundError> {
    v.ok_or(BoundError::MissingParameter(name))
}

/// Iteration-complexity lower bound for the selected family.
pub fn theorem_bounds(
    p: &ProblemParams,
    family: TheoremFamily,
) -> Result<TheoremBound, BoundError> {
    let eps = need(p.eps, "eps")?;
    if !(eps > 0.0) {
        return domain("eps must be positive");
    }
    let log_inv_eps = -eps.ln();
    let (raw, rate_term) = match family {
        TheoremFamily::Toy => {
            let (l, mu, x) = (need(p.l, "L")?, need(p.mu, "mu")?, need(p.r, "R")?);
            check_l_mu(l, mu)?;
            let kappa = l / mu;
            let t = 0.25
                * (kappa - 1.0).sqrt()
                * ((mu / 2.0).ln() + 2.0 * (x.abs() * (l - mu) / (2.0 * l)).ln() + log_inv_eps);
            (t, t)
        }
        TheoremFamily::Fsm => {
            let (l, mu, n, r) = (
                need(p.l, "L")?,
                need(p.mu, "mu")?,
                need(p.n, "n")?,
                need(p.r, "R")?,
            );
            check_l_mu(l, mu)?;
            let nf = n as f64;
            let kappa = l / mu;
            let scale = nf * r * mu / (std::f64::consts::SQRT_2 * (l - mu));
            let t = 0.25
                * (nf * (kappa - 1.0)).sqrt()
                * ((mu / 2.0).ln() + 2.0 * scale.ln() + log_inv_eps);
            (nf.max(t), t)
        }
        TheoremFamily::Smooth => {
            let (l, r, alpha) = (need(p.l, "L")?, need(p.r, "R")?, need(p.alpha, "alpha")?);
            check_alpha(alpha)?;
            let t =
                (l * r * r * (alpha + 1.0) / (E * E * eps)).powf(1.0 / (2.0 * alpha + 4.0)) - 2.0;
            (t, t)
        }
        TheoremFamily::Rlm => {
            let (n, lambda) = (need(p.n, "n")?, need(p.lambda, "lambda")?);
            if !(lambda > 0.0) {
                return domain("lambda must be positive");
            }
            let nf = n as f64;
            let t = 0.125
                * (2.0 * nf / lambda).sqrt()
                * ((nf * nf * lambda * lambda / 8.0).ln() + log_inv_eps);
            ((nf / 2.0).max(t), t)
        }
    };
    Ok(TheoremBound {
        value: raw.max(0.0),
        raw,
        rate_term,
    })
}

/// The smooth-family bound in its headline packaging,
/// `(L (delta - 2) / eps)^(1/delta)`. It hides constants and `R`, so it is
/// not numerically interchangeable with the explicit form.
pub fn smooth_bound_packaged(p: &ProblemParams) -> Result<f64, BoundError> {
    let (l, eps, alpha) = (
        need(p.l, "L")?,
        need(p.eps, "eps")?,
        need(p.alpha, "alpha")?,
    );
    check_alpha(alpha)?;
    let delta = 2.0 * (alpha + 1.0) + 2.0;
    Ok((l * (delta - 2.0) / eps).powf(1.0 / delta))
}

fn check_l_mu(l: f64, mu: f64) -> Result<(), BoundError> {
    if l > mu && mu > 0.0 {
        Ok(())
    } else {
        domain(format!("need L > mu > 0, got L={l} mu={mu}"))
    }
}

/// Residuals of the scalar identities behind the approximation bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub u: f64,
    /// `|(u - sqrt(u^2-1)) - (1 - s)/(1 + s)|` with `s = sqrt((u-1)/(u+1))`.
    pub ratio_identity_residual: f64,
    /// `(k, |numeric integral - closed form|)` per requested `k`.
    pub sign_integral_residuals: Vec<(u32, f64)>,
}

/// `int_{-1}^{1} sgn(sin(k arccos x)) / (u - x) dx` by adaptive Simpson
/// quadrature on each interval of constant sign.
pub fn sign_weighted_cauchy_integral(u: f64, k: u32) -> f64 {
    let f = |x: f64| 1.0 / (u - x);
    // sin(k arccos x) vanishes at x = cos(j pi / k); those are the roots
    // of U_{k-1}. Positive next to x = 1.
    let mut knots = vec![1.0];
    if k >= 1 {
        knots.extend(chebyshev_u_zeros(k as usize - 1));
    }
    knots.push(-1.0);
    let mut sign = 1.0;
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += sign * adaptive_simpson(&f, w[1], w[0], 1e-13, 48);
        sign = -sign;
    }
    if k == 0 {
        // sgn(sin 0) = 0
        return 0.0;
    }
    total
}

/// `2 ln((z^k + 1)/(z^k - 1))` with `z = u + sqrt(u^2 - 1)`.
pub fn sign_weighted_cauchy_closed_form(u: f64, k: u32) -> f64 {
    let zk = (u + (u * u - 1.0).sqrt()).powi(k as i32);
    2.0 * ((zk + 1.0) / (zk - 1.0)).ln()
}

pub fn identity_checks(u: f64, ks: &[u32]) -> Result<IdentityReport, BoundError> {
    if !(u > 1.0) {
        return domain(format!("u must exceed 1, got {u}"));
    }
    let lhs = chebyshev_ratio(u);
    let s = ((u - 1.0) / (u + 1.0)).sqrt();
    // 1 - s = (1 - s^2)/(1 + s) = (2/(u+1))/(1 + s)
    let one_minus_s = (2.0 / (u + 1.0)) / (1.0 + s);
    let rhs = one_minus_s / (1.0 + s);
    let sign_integral_residuals = ks
        .iter()
        .map(|&k| {
            let num = sign_weighted_cauchy_integral(u, k);
            (k, (num - sign_weighted_cauchy_closed_form(u, k)).abs())
        })
        .collect();
    Ok(IdentityReport {
        u,
        ratio_identity_residual: (lhs - rhs).abs(),
        sign_integral_residuals,
    })
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn chebyshev_values() {
        assert!(close(chebyshev_lb_inf(2.0, 0).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(close(
            chebyshev_lb_inf(2.0, 1).unwrap(),
            (2.0 - 3f64.sqrt()) / 3.0,
            1e-15
        ));
        assert!(chebyshev_lb_inf(1e6, 0).unwrap() < 1e-11);
        assert!(chebyshev_lb_inf(1.0, 0).is_err());
    }

    #[test]
    fn maxnorm_values() {
        assert!(close(maxnorm_lb(1.0, 4.0, 0.0, 0).unwrap(), 0.375, 1e-15));
        assert!(close(maxnorm_lb(1.0, 4.0, 0.0, 1).unwrap(), 0.125, 1e-15));
        for k in 0..10 {
            let r =
                maxnorm_lb(1.0, 4.0, 0.0, k + 1).unwrap() / maxnorm_lb(1.0, 4.0, 0.0, k).unwrap();
            assert!(close(r, 1.0 / 3.0, 1e-14));
        }
        assert!(maxnorm_lb(4.0, 1.0, 0.0, 0).is_err());
        assert!(maxnorm_lb(1.0, 4.0, -1.0, 0).is_err());
    }

    #[test]
    fn maxnorm_reduces_to_chebyshev_after_affine_map() {
        // 1/(x + c) on [a, b] is (2/(b-a)) / (t + u) on [-1, 1] with
        // u = (b + a + 2c)/(b - a)
        let (a, b, c) = (1.0, 4.0, 0.5);
        let u = (b + a + 2.0 * c) / (b - a);
        for k in 0..8 {
            let via_cheb = 2.0 / (b - a) * chebyshev_lb_inf(u, k).unwrap();
            assert!(close(maxnorm_lb(a, b, c, k).unwrap(), via_cheb, 1e-13));
        }
    }

    #[test]
    fn l1_values() {
        assert!(close(l1_lb(4.0, 1.0, 2.5, 0).unwrap(), 1.0, 1e-15));
        assert!(close(l1_lb(4.0, 1.0, 2.5, 1).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(l1_lb(4.0, 1.0, 1e6, 1).unwrap() < 1e-5);
        assert!(l1_lb(4.0, 1.0, 1.5, 1).is_err());
        assert!(l1_lb_is_sound(4.0, 1.0, 2.5));
        assert!(!l1_lb_is_sound(4.0, 1.0, 15.0));
    }

    #[test]
    fn l2_values() {
        assert!(close(
            l2_weighted_lb(-0.5, 0).unwrap(),
            1.0 / (8.0 * E * E),
            1e-15
        ));
        assert!(close(l2_weighted_lb(-0.5, 0).unwrap(), 0.016917, 1e-4));
        assert!(close(l2_weighted_lb(-0.9, 0).unwrap(), 0.02945, 1e-3));
        assert!(close(l2_weighted_lb(-0.5, 4).unwrap(), 6.26e-4, 1e-3));
        assert!(close(l2_weighted_exact(-0.5, 0).unwrap(), 2.0 / 3.0, 1e-15));
        assert!(close(
            l2_weighted_exact(-0.5, 1).unwrap(),
            0.106_666_666_666_666_67,
            1e-14
        ));
        assert!(l2_weighted_lb(0.0, 1).is_err());
        assert!(l2_weighted_exact(-1.0, 1).is_err());
    }

    #[test]
    fn l2_exact_dominates_bound_and_decreases() {
        for &alpha in &[-0.95, -0.9, -0.5, -0.1, -0.01] {
            let mut prev = f64::INFINITY;
            for k in 0..30 {
                let ex = l2_weighted_exact(alpha, k).unwrap();
                assert!(ex >= l2_weighted_lb(alpha, k).unwrap());
                assert!(ex < prev);
                prev = ex;
            }
        }
    }

    #[test]
    fn fsm_envelope_values() {
        let v = fsm_rate_envelope(101.0, 100, 100, 1.0).unwrap();
        assert!(close(v, 3.0 - 2.0 * 2f64.sqrt(), 1e-14));
        assert!(close(v, 0.17157, 1e-4));
        assert_eq!(fsm_rate_envelope(1.0, 5, 3, 2.0).unwrap(), 0.0);
        for k in 0..20 {
            let single = fsm_rate_envelope(9.0, 1, k, 1.0).unwrap();
            assert!(close(single, 0.5f64.powi(k as i32), 1e-14));
        }
    }

    #[test]
    fn envelope_is_nonincreasing() {
        let e = fsm_value_envelope(100.0, 1.0, 8, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..300 {
            let v = e.at(k as f64);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn iteration_bound_values() {
        let v = iteration_lb_from_rate(4.0, 1.0, 0.0, 1.0, (-2.0f64).exp()).unwrap();
        assert!(close(v, 3f64.sqrt(), 1e-14));
        assert_eq!(
            iteration_lb_from_rate(4.0, 1.0, 0.0, 0.3, 0.3).unwrap(),
            0.0
        );
        let a = iteration_lb_from_rate(4.0, 1.0, 0.0, 1.0, (-3.0f64).exp()).unwrap();
        let b = iteration_lb_from_rate(4.0, 1.0, 0.0, 1.0, (-6.0f64).exp()).unwrap();
        assert!(close(b, 2.0 * a, 1e-14));
    }

    #[test]
    fn theorem_values() {
        // (L R^2 (alpha+1) / (e^2 eps))^(1/3) - 2 = 4 when the bracket is 216
        let p = ProblemParams {
            l: Some(1.0),
            r: Some(1.0),
            alpha: Some(-0.5),
            eps: Some(0.5 / (E * E * 216.0)),
            ..Default::default()
        };
        let b = theorem_bounds(&p, TheoremFamily::Smooth).unwrap();
        assert!(close(b.value, 4.0, 1e-12));

        let p = ProblemParams {
            l: Some(2.0),
            mu: Some(1.0),
            n: Some(1000),
            r: Some(1.0),
            eps: Some(0.5),
            ..Default::default()
        };
        assert_eq!(
            theorem_bounds(&p, TheoremFamily::Fsm).unwrap().value,
            1000.0
        );

        // choose eps so that the bracketed logarithm equals 1
        let (n, lambda) = (100.0f64, 0.01f64);
        let eps = (n * n * lambda * lambda / 8.0) / E;
        let p = ProblemParams {
            n: Some(100),
            lambda: Some(lambda),
            eps: Some(eps),
            ..Default::default()
        };
        let b = theorem_bounds(&p, TheoremFamily::Rlm).unwrap();
        assert!(close(b.rate_term, 20000f64.sqrt() / 8.0, 1e-12));
        assert!(close(b.rate_term, 17.68, 1e-3));
        assert_eq!(b.value, 50.0);
    }

    #[test]
    fn theorem_clamps_and_reports_missing() {
        let p = ProblemParams {
            l: Some(4.0),
            mu: Some(1.0),
            r: Some(1.0),
            eps: Some(10.0),
            ..Default::default()
        };
        let b = theorem_bounds(&p, TheoremFamily::Toy).unwrap();
        assert!(b.raw < 0.0);
        assert_eq!(b.value, 0.0);
        let p = ProblemParams {
            eps: Some(0.1),
            ..Default::default()
        };
        assert_eq!(
            theorem_bounds(&p, TheoremFamily::Rlm),
            Err(BoundError::MissingParameter("n"))
        );
    }

    #[test]
    fn identity_examples() {
        let r = identity_checks(1.25, &[1, 2]).unwrap();
        assert!(close(chebyshev_ratio(1.25), 0.5, 1e-15));
        assert!(r.ratio_identity_residual < 1e-15);
        let r = identity_checks(2.0, &[1]).unwrap();
        assert!(r.sign_integral_residuals[0].1 < 1e-6);
        assert!(identity_checks(1e6, &[]).unwrap().ratio_identity_residual <= 1e-12);
        assert!(identity_checks(1.0, &[]).is_err());
    }
}
