use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{rational_to_f64, Degree, PolyError, UniPoly};

type Exponent = Vec<u32>;

/// Sparse multivariate polynomial in a fixed number of indeterminates.
///
/// Terms are keyed by exponent vectors of length `nvars`; zero
/// coefficients are never stored, so the zero polynomial has no terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exponent, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The `i`-th indeterminate.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(
            i < nvars,
            "variable {i} out of range for {nvars} indeterminates"
        );
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, BigRational::one());
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, merging
    /// repeated exponents and dropping zeros.
    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, BigRational)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::ArityMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            p.accumulate(e, c);
        }
        Ok(p)
    }

    fn accumulate(&mut self, e: Exponent, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Coefficient of the monomial with exponent `e`.
    pub fn coeff(&self, e: &[u32]) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.nvars])
    }

    /// Constant value if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Largest total degree over the stored terms.
    pub fn total_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum::<usize>())
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// Largest exponent of indeterminate `var` over the stored terms.
    pub fn degree_in(&self, var: usize) -> Degree {
        self.terms
            .keys()
            .map(|e| e[var] as usize)
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    fn check_same(&self, rhs: &Self) -> Result<(), PolyError> {
        if self.nvars == rhs.nvars {
            Ok(())
        } else {
            Err(PolyError::IndeterminateMismatch {
                left: self.nvars,
                right: rhs.nvars,
            })
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_same(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.accumulate(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_same(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.accumulate(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_same(rhs)?;
        if let Some(c) = rhs.as_constant() {
            return Ok(self.scale(&c));
        }
        if let Some(c) = self.as_constant() {
            return Ok(rhs.scale(&c));
        }
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.accumulate(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation with coefficients rounded to `f64`.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(rational_to_f64(c), |t, (&k, &x)| t * x.powi(k as i32))
            })
            .sum())
    }

    /// Univariate view; `None` unless there is exactly one indeterminate.
    pub fn to_uni(&self) -> Option<UniPoly> {
        if self.nvars != 1 {
            return None;
        }
        let n = self.total_degree().finite().map_or(0, |d| d + 1);
        let mut coeffs = vec![BigRational::zero(); n];
        for (e, c) in &self.terms {
            coeffs[e[0] as usize] = c.clone();
        }
        Some(UniPoly::from_coeffs(coeffs))
    }

    pub fn from_uni(p: &UniPoly) -> Self {
        let mut out = Self::zero(1);
        for (k, c) in p.coeffs().iter().enumerate() {
            out.accumulate(vec![k as u32], c.clone());
        }
        out
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self, PolyError> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| PolyError::Json(format!("bad integer {s:?}: {e}")))
        };
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            let den = parse(&t.den)?;
            if den.is_zero() {
                return Err(PolyError::Json("zero denominator".into()));
            }
            terms.push((t.exp.clone(), BigRational::new(parse(&t.num)?, den)));
        }
        Self::from_terms(j.vars, terms)
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({self})", self.nvars)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{v}")?,
                    _ => write!(f, "*x{v}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Serialized form: `{"vars": n, "terms": [{"exp": [..], "num": "..", "den": ".."}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: String,
    pub den: String,
}

/// A vector of polynomials sharing one indeterminate set, together with
/// the degree budget its producer promised to respect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVector {
    pub entries: Vec<MultiPoly>,
    pub budget: usize,
}

impl PolyVector {
    pub fn new(entries: Vec<MultiPoly>, budget: usize) -> Self {
        PolyVector { entries, budget }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest total degree over all entries.
    pub fn max_total_degree(&self) -> Degree {
        self.entries
            .iter()
            .map(MultiPoly::total_degree)
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    /// Largest degree in indeterminate `var` over all entries.
    pub fn max_degree_in(&self, var: usize) -> Degree {
        self.entries
            .iter()
            .map(|p| p.degree_in(var))
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    /// Sum over indeterminates of the largest per-indeterminate degree.
    pub fn per_variable_degree_sum(&self) -> usize {
        let nvars = self.entries.first().map_or(0, MultiPoly::nvars);
        (0..nvars)
            .filter_map(|v| self.max_degree_in(v).finite())
            .sum()
    }

    /// Sum of the entries' total degrees (zero entries count as 0).
    pub fn entry_degree_sum(&self) -> usize {
        self.entries
            .iter()
            .filter_map(|p| p.total_degree().finite())
            .sum()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.entries.iter().map(|p| p.eval_f64(point)).collect()
    }

    pub fn eval(&self, point: &[BigRational]) -> Result<Vec<BigRational>, PolyError> {
        self.entries.iter().map(|p| p.eval(point)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::int;

    #[test]
    fn mismatched_indeterminates_are_rejected() {
        let a = MultiPoly::var(2, 0);
        let b = MultiPoly::var(3, 0);
        assert_eq!(
            a.checked_add(&b),
            Err(PolyError::IndeterminateMismatch { left: 2, right: 3 })
        );
        assert!(a.eval(&[int(1)]).is_err());
    }

    #[test]
    fn cancellation_leaves_no_stored_zero() {
        let x = MultiPoly::var(2, 0);
        let d = x.checked_sub(&x).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.num_terms(), 0);
        assert_eq!(d.total_degree(), Degree::NegInfinity);
    }

    #[test]
    fn json_round_trip() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let p = x
            .checked_mul(&y)
            .unwrap()
            .scale(&BigRational::new(3.into(), 7.into()))
            .checked_add(&MultiPoly::constant(2, int(-5)))
            .unwrap();
        let s = serde_json::to_string(&p.to_json()).unwrap();
        assert!(s.contains("\"num\":\"3\""));
        let back: PolyJson = serde_json::from_str(&s).unwrap();
        assert_eq!(MultiPoly::from_json(&back).unwrap(), p);
    }

    #[test]
    fn per_variable_budget_versus_entry_sum() {
        // entries x0^2 and x0*x1: per-variable sum 2 + 1, entry sum 2 + 2
        let x0 = MultiPoly::var(2, 0);
        let x1 = MultiPoly::var(2, 1);
        let v = PolyVector::new(
            vec![x0.checked_mul(&x0).unwrap(), x0.checked_mul(&x1).unwrap()],
            4,
        );
        assert_eq!(v.per_variable_degree_sum(), 3);
        assert_eq!(v.entry_degree_sum(), 4);
        assert_eq!(v.max_total_degree(), Degree::Finite(2));
    }
}
