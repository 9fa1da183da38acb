//! Brute-force best polynomial approximation, used as ground truth for
//! the closed-form bounds in [`crate::approx_bounds`].
//!
//! * [`best_uniform`]: discrete minimax on a Chebyshev grid by the Remez
//!   multiple-exchange iteration, then the winner's sup is re-measured on a
//!   10x finer grid with local refinement.
//! * [`best_l1`]: trapezoid-discretized L1 fit solved exactly as a linear
//!   program by walking edges between interpolation vertices.
//! * [`best_weighted_l2`]: normal equations in exact rational arithmetic.
//!
//! Degree conventions follow the bounds they are compared with:
//! `best_uniform(.., k, ..)` fits degree `<= k`, while `best_l1` and
//! `best_weighted_l2` take `k` coefficients (degree `<= k - 1`).

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::linalg;
use crate::polynomials::{rational_from_f64, rational_to_f64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("target is not finite at x = {0}")]
    NonFinite(f64),
    #[error("refusing k = {k}: Gram matrix too ill-conditioned beyond k = {max}")]
    IllConditioned { k: usize, max: usize },
    #[error("solver failure: {0}")]
    Internal(String),
}

/// Largest `k` accepted by [`best_weighted_l2`].
pub const MAX_L2_TERMS: usize = 12;
pub const DEFAULT_UNIFORM_GRID: usize = 4097;
pub const DEFAULT_L1_GRID: usize = 8193;

/// A polynomial on `[a, b]` stored in the Chebyshev basis of the mapped
/// variable `t = (2x - a - b)/(b - a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebFit {
    pub a: f64,
    pub b: f64,
    pub cheb: Vec<f64>,
}

impl ChebFit {
    fn map(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn eval(&self, x: f64) -> f64 {
        cheb_eval(&self.cheb, self.map(x))
    }

    /// Coefficients in the monomial basis of `x`, lowest degree first.
    pub fn monomial_coefficients(&self) -> Vec<f64> {
        let n = self.cheb.len();
        if n == 0 {
            return Vec::new();
        }
        // T_j in powers of t, then substitute t = s x + o.
        let mut t_prev = vec![1.0];
        let mut t_cur = vec![0.0, 1.0];
        let mut in_t = vec![0.0; n];
        for (j, &c) in self.cheb.iter().enumerate() {
            let tj = match j {
                0 => t_prev.clone(),
                1 => t_cur.clone(),
                _ => {
                    let mut next = vec![0.0; j + 1];
                    for (i, &v) in t_cur.iter().enumerate() {
                        next[i + 1] += 2.0 * v;
                    }
                    for (i, &v) in t_prev.iter().enumerate() {
                        next[i] -= v;
                    }
                    t_prev = std::mem::replace(&mut t_cur, next);
                    t_cur.clone()
                }
            };
            for (i, &v) in tj.iter().enumerate() {
                in_t[i] += c * v;
            }
        }
        let s = 2.0 / (self.b - self.a);
        let o = -(self.a + self.b) / (self.b - self.a);
        let mut out = vec![0.0; n];
        let mut power = vec![1.0];
        for &c in &in_t {
            for (i, &v) in power.iter().enumerate() {
                out[i] += c * v;
            }
            let mut next = vec![0.0; power.len() + 1];
            for (i, &v) in power.iter().enumerate() {
                next[i] += o * v;
                next[i + 1] += s * v;
            }
            power = next;
        }
        out
    }
}

fn cheb_eval(c: &[f64], t: f64) -> f64 {
    // Clenshaw
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

fn cheb_row(t: f64, m: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(m);
    for j in 0..m {
        row.push(match j {
            0 => 1.0,
            1 => t,
            _ => 2.0 * t * row[j - 1] - row[j - 2],
        });
    }
    row
}

/// Result of a brute-force fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    /// Error of the returned polynomial measured on a 10x finer grid (with
    /// local refinement for the sup norm). This is at least the continuous
    /// optimum up to rounding, so it is the safe side of a lower-bound check.
    pub error: f64,
    /// Optimal value of the discretized problem on the working grid.
    pub grid_error: f64,
    pub poly: ChebFit,
    pub iterations: usize,
}

impl Fit {
    pub fn coefficients(&self) -> Vec<f64> {
        self.poly.monomial_coefficients()
    }
}

fn check_interval(a: f64, b: f64, grid: usize, need: usize) -> Result<(), ApproxError> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(ApproxError::Domain(format!(
            "need finite b > a, got [{a}, {b}]"
        )));
    }
    if grid < need {
        return Err(ApproxError::Domain(format!(
            "grid {grid} below minimum {need}"
        )));
    }
    Ok(())
}

fn sample(f: &impl Fn(f64) -> f64, xs: &[f64]) -> Result<Vec<f64>, ApproxError> {
    xs.iter()
        .map(|&x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ApproxError::NonFinite(x))
            }
        })
        .collect()
}

/// Chebyshev extreme points of `[-1, 1]`, ascending.
fn cheb_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -((i as f64) * PI / (n as f64 - 1.0)).cos())
        .collect()
}

fn nearest_index(ts: &[f64], t: f64) -> usize {
    match ts.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i == ts.len() => ts.len() - 1,
        Err(i) => {
            if (ts[i] - t).abs() < (ts[i - 1] - t).abs() {
                i
            } else {
                i - 1
            }
        }
    }
}

/// Indices near `targets`, forced strictly increasing.
fn spread_indices(ts: &[f64], targets: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = targets.iter().map(|&t| nearest_index(ts, t)).collect();
    for i in 1..idx.len() {
        if idx[i] <= idx[i - 1] {
            idx[i] = idx[i - 1] + 1;
        }
    }
    let n = ts.len();
    for i in (0..idx.len()).rev() {
        let cap = n - (idx.len() - i);
        if idx[i] > cap {
            idx[i] = cap;
        }
        if i + 1 < idx.len() && idx[i] >= idx[i + 1] {
            idx[i] = idx[i + 1] - 1;
        }
    }
    idx
}

/// Best uniform approximation of `f` on `[a, b]` by polynomials of degree
/// at most `k`, over a `grid`-point Chebyshev grid.
pub fn best_uniform(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    k: usize,
    grid: usize,
) -> Result<Fit, ApproxError> {
    check_interval(a, b, grid, 8 * (k + 1))?;
    let ts = cheb_grid(grid);
    let xs: Vec<f64> = ts
        .iter()
        .map(|&t| 0.5 * (a + b) + 0.5 * (b - a) * t)
        .collect();
    let fs = sample(&f, &xs)?;
    let scale = fs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let m = k + 1;
    let rows: Vec<Vec<f64>> = ts.iter().map(|&t| cheb_row(t, m)).collect();

    let initial: Vec<f64> = (0..=m)
        .map(|j| -((j as f64) * PI / (m as f64)).cos())
        .collect();
    let mut reference = spread_indices(&ts, &initial);
    let mut cheb = vec![0.0; m];
    let mut resid = vec![0.0; grid];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let sys: Vec<Vec<f64>> = reference
            .iter()
            .enumerate()
            .map(|(r, &i)| {
                let mut row = rows[i].clone();
                row.push(if r % 2 == 0 { 1.0 } else { -1.0 });
                row
            })
            .collect();
        let rhs: Vec<f64> = reference.iter().map(|&i| fs[i]).collect();
        let sol = linalg::solve(sys, rhs)
            .ok_or_else(|| ApproxError::Internal("singular reference system".into()))?;
        let level = sol[m].abs();
        cheb.copy_from_slice(&sol[..m]);
        for i in 0..grid {
            resid[i] = fs[i] - cheb_eval(&cheb, ts[i]);
        }
        let (imax, rmax) = resid
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, r)| {
                if r.abs() > bv {
                    (i, r.abs())
                } else {
                    (bi, bv)
                }
            });
        if rmax <= level * (1.0 + 1e-13) + 1e-14 * scale || iterations >= 200 {
            break;
        }
        // one extremum per run of constant sign
        let mut extrema: Vec<usize> = Vec::new();
        let mut run_sign = 0.0;
        for (i, r) in resid.iter().enumerate() {
            let s = if *r > 0.0 {
                1.0
            } else if *r < 0.0 {
                -1.0
            } else {
                0.0
            };
            if s == 0.0 {
                continue;
            }
            if s != run_sign {
                extrema.push(i);
                run_sign = s;
            } else {
                let last = extrema.last_mut().unwrap();
                if r.abs() > resid[*last].abs() {
                    *last = i;
                }
            }
        }
        if extrema.len() < m + 1 {
            // alternation lost; fall back to a single swap of the worst point
            let pos = nearest_index(
                &reference.iter().map(|&i| ts[i]).collect::<Vec<_>>(),
                ts[imax],
            );
            reference[pos] = imax;
            reference.sort_unstable();
            reference.dedup();
            if reference.len() != m + 1 {
                return Err(ApproxError::Internal("reference collapsed".into()));
            }
            continue;
        }
        while extrema.len() > m + 1 {
            let first = resid[extrema[0]].abs();
            let last = resid[*extrema.last().unwrap()].abs();
            if first < last {
                extrema.remove(0);
            } else {
                extrema.pop();
            }
        }
        reference = extrema;
    }
    let grid_error = resid.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    let poly = ChebFit { a, b, cheb };
    let error = refined_sup(&f, &poly, 10 * grid).max(grid_error);
    Ok(Fit {
        error,
        grid_error,
        poly,
        iterations,
    })
}

/// Sup of `|f - p|` on a Chebyshev grid of `n` points, with golden-section
/// refinement around the largest local maxima.
fn refined_sup(f: &impl Fn(f64) -> f64, p: &ChebFit, n: usize) -> f64 {
    let (a, b) = (p.a, p.b);
    let xs: Vec<f64> = cheb_grid(n)
        .into_iter()
        .map(|t| 0.5 * (a + b) + 0.5 * (b - a) * t)
        .collect();
    let err = |x: f64| (f(x) - p.eval(x)).abs();
    let es: Vec<f64> = xs.iter().map(|&x| err(x)).collect();
    let mut best = es.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| es[i] >= es[i - 1] && es[i] >= es[i + 1])
        .collect();
    peaks.sort_by(|&i, &j| es[j].total_cmp(&es[i]));
    for &i in peaks.iter().take(64) {
        let (mut lo, mut hi) = (xs[i - 1], xs[i + 1]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut fc, mut fd) = (err(c), err(d));
        for _ in 0..60 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = err(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = err(d);
            }
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// Trapezoid nodes and weights on a uniform grid.
fn trapezoid(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / (n as f64 - 1.0);
    let xs = (0..n).map(|i| a + h * i as f64).collect();
    let ws = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    (xs, ws)
}

/// Best L1 approximation of `f` on `[a, b]` by polynomials with `k`
/// coefficients (degree `<= k - 1`; `k = 0` means the zero polynomial).
pub fn best_l1(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    k: usize,
    grid: usize,
) -> Result<Fit, ApproxError> {
    check_interval(a, b, grid, 8 * (k + 1))?;
    let (xs, ws) = trapezoid(a, b, grid);
    let fs = sample(&f, &xs)?;
    let map = |x: f64| (2.0 * x - a - b) / (b - a);
    let m = k;
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| cheb_row(map(x), m)).collect();
    let objective = |r: &[f64]| r.iter().zip(&ws).map(|(r, w)| w * r.abs()).sum::<f64>();
    let scale = objective(&fs).max(1e-300);

    let mut cheb = vec![0.0; m];
    let mut iterations = 0;
    if m > 0 {
        // start from interpolation at first-kind Chebyshev nodes
        let targets: Vec<f64> = (0..m)
            .map(|j| -(((2 * j + 1) as f64) * PI / (2.0 * m as f64)).cos())
            .collect();
        let ts: Vec<f64> = xs.iter().map(|&x| map(x)).collect();
        let mut active = spread_indices(&ts, &targets);
        let mut in_active = vec![false; grid];
        loop {
            iterations += 1;
            in_active.iter_mut().for_each(|v| *v = false);
            active.iter().for_each(|&i| in_active[i] = true);
            let basis: Vec<Vec<f64>> = active.iter().map(|&i| rows[i].clone()).collect();
            let rhs: Vec<f64> = active.iter().map(|&i| fs[i]).collect();
            cheb = linalg::solve(basis.clone(), rhs)
                .ok_or_else(|| ApproxError::Internal("singular interpolation vertex".into()))?;
            let resid: Vec<f64> = (0..grid)
                .map(|i| {
                    if in_active[i] {
                        0.0
                    } else {
                        fs[i] - dot(&rows[i], &cheb)
                    }
                })
                .collect();
            if iterations >= 20_000 {
                break;
            }
            // edge directions: columns of the inverse interpolation matrix
            let mut best: Option<(f64, usize, f64, Vec<f64>)> = None;
            for p in 0..m {
                let mut e = vec![0.0; m];
                e[p] = 1.0;
                let dir = linalg::solve(basis.clone(), e)
                    .ok_or_else(|| ApproxError::Internal("singular edge system".into()))?;
                for s in [1.0, -1.0] {
                    let mut slope = ws[active[p]];
                    for i in 0..grid {
                        if in_active[i] {
                            continue;
                        }
                        let ai = s * dot(&rows[i], &dir);
                        let r = resid[i];
                        slope += if r > 0.0 {
                            -ws[i] * ai
                        } else if r < 0.0 {
                            ws[i] * ai
                        } else {
                            ws[i] * ai.abs()
                        };
                    }
                    if best.as_ref().is_none_or(|b| slope < b.0) {
                        best = Some((slope, p, s, dir.clone()));
                    }
                }
            }
            let (slope0, p, s, dir) = best.unwrap();
            if slope0 >= -1e-13 * scale {
                break;
            }
            // exact line search: weighted median over the kinks
            let mut kinks: Vec<(f64, usize, f64)> = (0..grid)
                .filter(|&i| !in_active[i])
                .filter_map(|i| {
                    let ai = s * dot(&rows[i], &dir);
                    let t = resid[i] / ai;
                    (ai != 0.0 && t > 0.0).then(|| (t, i, 2.0 * ws[i] * ai.abs()))
                })
                .collect();
            kinks.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut slope = slope0;
            let mut entering = None;
            for (_, i, jump) in kinks {
                slope += jump;
                if slope >= 0.0 {
                    entering = Some(i);
                    break;
                }
            }
            let entering =
                entering.ok_or_else(|| ApproxError::Internal("unbounded L1 edge".into()))?;
            active[p] = entering;
        }
    }
    let resid: Vec<f64> = (0..grid).map(|i| fs[i] - dot(&rows[i], &cheb)).collect();
    let grid_error = objective(&resid);
    let poly = ChebFit { a, b, cheb };
    let fine = 10 * (grid - 1) + 1;
    let (fx, fw) = trapezoid(a, b, fine);
    let error = fx
        .iter()
        .zip(&fw)
        .map(|(&x, w)| w * (f(x) - poly.eval(x)).abs())
        .sum();
    Ok(Fit {
        error,
        grid_error,
        poly,
        iterations,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solution of the weighted least-squares problem
/// `min_s int_0^1 x (s(x) x - 1)^2 x^alpha dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Fit {
    /// Squared weighted error, rounded from the exact rational value.
    pub error: f64,
    pub exact_error: BigRational,
    /// Coefficients of `s`, lowest degree first.
    pub coefficients: Vec<f64>,
}

/// Exact normal-equation solve over the basis `x^i`, `i = 1..=k`, with
/// Gram entries `1/(i + j + alpha + 2)` and target the constant 1.
pub fn best_weighted_l2(alpha: f64, k: usize) -> Result<L2Fit, ApproxError> {
    if !(alpha > -1.0 && alpha < 0.0) {
        return Err(ApproxError::Domain(format!(
            "alpha must lie in (-1, 0), got {alpha}"
        )));
    }
    if k > MAX_L2_TERMS {
        return Err(ApproxError::IllConditioned {
            k,
            max: MAX_L2_TERMS,
        });
    }
    let alpha_q = rational_from_f64(alpha).map_err(|e| ApproxError::Domain(e.to_string()))?;
    let two = BigRational::from_integer(2.into());
    let inner =
        |p: usize| BigRational::one() / (BigRational::from_integer(p.into()) + &alpha_q + &two);
    let gram: Vec<Vec<BigRational>> = (1..=k)
        .map(|i| (1..=k).map(|j| inner(i + j)).collect())
        .collect();
    let rhs: Vec<BigRational> = (1..=k).map(inner).collect();
    let sol = linalg::solve_rational(gram, rhs.clone())
        .ok_or_else(|| ApproxError::Internal("singular Gram matrix".into()))?;
    let mut exact_error = inner(0);
    for (x, r) in sol.iter().zip(&rhs) {
        exact_error -= x * r;
    }
    Ok(L2Fit {
        error: rational_to_f64(&exact_error),
        exact_error,
        coefficients: sol.iter().map(rational_to_f64).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_fit_of_reciprocal() {
        let fit = best_uniform(|x| 1.0 / x, 1.0, 4.0, 0, DEFAULT_UNIFORM_GRID).unwrap();
        assert!((fit.grid_error - 0.375).abs() < 1e-12);
        assert!((fit.error - 0.375).abs() < 1e-12);
        assert!((fit.coefficients()[0] - 0.625).abs() < 1e-12);
    }

    #[test]
    fn polynomials_are_reproduced() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let fit = best_uniform(p, -2.0, 3.0, 3, 257).unwrap();
        assert!(fit.error <= 1e-9);
        let c = fit.coefficients();
        assert!(
            (c[0] - 1.0).abs() < 1e-9 && (c[1] + 2.0).abs() < 1e-9 && (c[3] - 0.5).abs() < 1e-9
        );
        let fit = best_l1(p, -2.0, 3.0, 4, 257).unwrap();
        assert!(fit.error <= 1e-9);
    }

    #[test]
    fn uniform_matches_chebyshev_value() {
        // the closed form is the exact optimum for 1/(x - c)
        let want = crate::approx_bounds::chebyshev_lb_inf(2.0, 1).unwrap();
        let fit = best_uniform(|x| 1.0 / (x - 2.0), -1.0, 1.0, 1, DEFAULT_UNIFORM_GRID).unwrap();
        assert!(fit.error >= want * (1.0 - 1e-12));
        assert!(fit.grid_error <= want * (1.0 + 1e-12));
        assert!((fit.error - want).abs() < 1e-6 * want);
    }

    #[test]
    fn l1_zero_polynomial_integral() {
        let fit = best_l1(|x| 1.0 / (x + 2.5), -1.5, 1.5, 0, DEFAULT_L1_GRID).unwrap();
        assert!((fit.error - 4f64.ln()).abs() < 1e-7);
        let zero = best_l1(|_| 0.0, -1.0, 1.0, 3, 257).unwrap();
        assert_eq!(zero.error, 0.0);
    }

    #[test]
    fn l1_best_constant_is_the_median_value() {
        // f increasing, so the best constant is f at the midpoint
        let f = |x: f64| 1.0 / (x + 2.5);
        let fit = best_l1(f, -1.5, 1.5, 1, DEFAULT_L1_GRID).unwrap();
        assert!((fit.coefficients()[0] - f(0.0)).abs() < 1e-3);
        let exact = (2.5f64 * 2.5 / (2.5 * 2.5 - 1.5 * 1.5)).ln();
        assert!((fit.error - exact).abs() < 1e-7);
        assert!(fit.error >= 1.0 / 3.0);
    }

    #[test]
    fn l2_small_cases() {
        let fit = best_weighted_l2(-0.5, 0).unwrap();
        assert!((fit.error - 2.0 / 3.0).abs() < 1e-15);
        let fit = best_weighted_l2(-0.5, 1).unwrap();
        assert!((fit.error - 0.106_666_666_666_666_67).abs() < 1e-12);
        assert!(matches!(
            best_weighted_l2(-0.5, 13),
            Err(ApproxError::IllConditioned { .. })
        ));
    }
}
