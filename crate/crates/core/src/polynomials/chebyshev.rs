use std::f64::consts::PI;

use super::{int, UniPoly};

/// Chebyshev polynomial of the second kind, `U_0 = 1`, `U_1 = 2x`,
/// `U_{k+1} = 2x U_k - U_{k-1}`.
pub fn chebyshev_u(k: usize) -> UniPoly {
    let two_x = UniPoly::monomial(int(2), 1);
    let mut prev = UniPoly::one();
    if k == 0 {
        return prev;
    }
    let mut cur = two_x.clone();
    for _ in 1..k {
        let next = &(&two_x * &cur) - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Roots of `U_k`, `cos(j*pi/(k+1))` for `j = 1..=k`, strictly decreasing.
pub fn chebyshev_u_zeros(k: usize) -> Vec<f64> {
    (1..=k)
        .map(|j| (j as f64 * PI / (k as f64 + 1.0)).cos())
        .collect()
}

/// `int_{-1}^{1} x^j sgn(U_k(x)) dx`, integrated exactly piece by piece
/// between consecutive roots. The sign is `+` next to 1 and alternates
/// at each root moving left.
pub fn sgn_u_moment(k: usize, j: usize) -> f64 {
    let antiderivative = |x: f64| x.powi(j as i32 + 1) / (j as f64 + 1.0);
    let mut knots = vec![1.0];
    knots.extend(chebyshev_u_zeros(k));
    knots.push(-1.0);
    let mut sign = 1.0;
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += sign * (antiderivative(w[0]) - antiderivative(w[1]));
        sign = -sign;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_closed_forms() {
        assert_eq!(chebyshev_u(0), UniPoly::one());
        assert_eq!(chebyshev_u(2), UniPoly::from_i64(&[-1, 0, 4]));
        assert_eq!(chebyshev_u(3), UniPoly::from_i64(&[0, -4, 0, 8]));
    }

    #[test]
    fn trigonometric_form_agrees() {
        for k in 0..=12usize {
            let u = chebyshev_u(k);
            for i in 0..50 {
                let x = -0.98 + 1.96 * i as f64 / 49.0;
                let theta = x.acos();
                let want = ((k as f64 + 1.0) * theta).sin() / theta.sin();
                assert!((u.eval_f64(x) - want).abs() <= 1e-10, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn roots_are_decreasing_and_vanish() {
        assert!(chebyshev_u_zeros(0).is_empty());
        for k in 1..=10 {
            let z = chebyshev_u_zeros(k);
            assert_eq!(z.len(), k);
            assert!(z.windows(2).all(|w| w[0] > w[1]));
            let u = chebyshev_u(k);
            assert!(z.iter().all(|&x| u.eval_f64(x).abs() < 1e-9));
        }
    }

    #[test]
    fn sign_pattern_starts_positive_near_one() {
        for k in 1..=10 {
            let u = chebyshev_u(k);
            let z = chebyshev_u_zeros(k);
            let mut knots = vec![1.0];
            knots.extend(&z);
            knots.push(-1.0);
            for (m, w) in knots.windows(2).enumerate() {
                let mid = 0.5 * (w[0] + w[1]);
                let expected = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(u.eval_f64(mid).signum(), expected, "k={k} piece {m}");
            }
        }
    }

    #[test]
    fn sign_is_orthogonal_to_lower_degrees() {
        for k in 1..=10 {
            for j in 0..k {
                assert!(sgn_u_moment(k, j).abs() <= 1e-10, "k={k} j={j}");
            }
            // the first monomial that is not annihilated
            assert!(sgn_u_moment(k, k).abs() > 1e-6, "k={k}");
        }
    }
}
