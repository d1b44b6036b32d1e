//! Exact univariate polynomial and rational-function arithmetic over the
//! integers, with Maclaurin expansion of rational series.

use crate::{Error, Result};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A polynomial with exact integer coefficients, stored in ascending
/// degree. The zero polynomial is the empty coefficient list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Polynomial::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial c·z^k.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Polynomial::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// gcd of all coefficients, nonnegative; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Polynomial::new(coeffs)
    }

    /// Exact division; panics if the division is not exact. Used only on
    /// divisors known to divide (gcd factors).
    pub(crate) fn div_exact(&self, d: &Polynomial) -> Polynomial {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut rem = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        let lead = d.coeffs.last().unwrap().clone();
        let n = rem.len() - 1;
        assert!(n >= dd, "inexact polynomial division");
        let mut q = vec![BigInt::zero(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let (c, r) = rem[k + dd].div_rem(&lead);
            assert!(r.is_zero(), "inexact polynomial division");
            q[k] = c.clone();
            for (i, dc) in d.coeffs.iter().enumerate() {
                let v = &rem[k + i] - dc * &c;
                rem[k + i] = v;
            }
        }
        assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
        Polynomial::new(q)
    }

    /// gcd over Z, primitive with positive leading coefficient (up to the
    /// content gcd of the inputs).
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() {
            return other.normalize_sign();
        }
        if other.is_zero() {
            return self.normalize_sign();
        }
        let ca = self.content();
        let cb = other.content();
        let cg = ca.gcd(&cb);
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        // Primitive pseudo-remainder sequence.
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.normalize_sign().scale(&cg)
    }

    fn primitive_part(&self) -> Polynomial {
        let c = self.content();
        if c.is_zero() || c.is_one() {
            self.clone()
        } else {
            Polynomial::new(self.coeffs.iter().map(|x| x / &c).collect())
        }
    }

    fn normalize_sign(&self) -> Polynomial {
        if self.leading().is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Pseudo-remainder of self by d (lead(d)^k · self mod d).
    fn pseudo_rem(&self, d: &Polynomial) -> Polynomial {
        let dd = d.coeffs.len() - 1;
        let lead = d.coeffs.last().unwrap().clone();
        let mut rem = self.clone();
        while let Some(n) = rem.degree() {
            if n < dd {
                break;
            }
            let c = rem.leading();
            rem = rem.scale(&lead);
            let sub = d.shift(n - dd).scale(&c);
            rem = &rem - &sub;
            // Degree must have dropped.
            if rem.degree().map_or(false, |m| m >= n) {
                rem.coeffs.truncate(n);
                rem = Polynomial::new(rem.coeffs);
            }
        }
        rem
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Polynomial::new(coeffs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Polynomial::new(coeffs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let v = &coeffs[i + j] + a * b;
                coeffs[i + j] = v;
            }
        }
        Polynomial::new(coeffs)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{}", a)?,
                1 if a.is_one() => write!(f, "z")?,
                1 => write!(f, "{}z", a)?,
                _ if a.is_one() => write!(f, "z^{}", k)?,
                _ => write!(f, "{}z^{}", a, k)?,
            }
            first = false;
        }
        Ok(())
    }
}

/// One additive term of a cone-decomposition form: numerator polynomial over
/// a product of factors (1 − z^{a_j}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredTerm {
    pub numerator: Polynomial,
    pub factor_exponents: Vec<usize>,
}

/// A rational function p(z)/q(z) in reduced form, expandable as a power
/// series at z = 0. Optionally carries a structured cone-decomposition
/// form; the structured form is informational and never used for equality.
#[derive(Debug, Clone)]
pub struct RationalSeries {
    num: Polynomial,
    den: Polynomial,
    structured: Option<Vec<StructuredTerm>>,
}

impl PartialEq for RationalSeries {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}
impl Eq for RationalSeries {}

impl RationalSeries {
    /// Build num/den, reducing to lowest terms. Rejects a zero denominator
    /// and a reduced denominator with zero constant term.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let mut f = RationalSeries { num, den, structured: None };
        f.reduce_in_place();
        if f.den.constant_term().is_zero() {
            return Err(Error::NotExpandable);
        }
        Ok(f)
    }

    pub fn zero() -> Self {
        RationalSeries { num: Polynomial::zero(), den: Polynomial::one(), structured: Some(vec![]) }
    }

    pub fn one() -> Self {
        RationalSeries { num: Polynomial::one(), den: Polynomial::one(), structured: None }
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        RationalSeries { num: p, den: Polynomial::one(), structured: None }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn structured_form(&self) -> Option<&[StructuredTerm]> {
        self.structured.as_deref()
    }

    pub fn with_structured(mut self, terms: Vec<StructuredTerm>) -> Self {
        self.structured = Some(terms);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Reduce to lowest terms and normalize the denominator constant term
    /// to be positive. Idempotent.
    pub fn reduce(mut self) -> Self {
        self.reduce_in_place();
        self
    }

    fn reduce_in_place(&mut self) {
        if self.num.is_zero() {
            self.den = Polynomial::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree().map_or(false, |d| d > 0) || !g.content().is_one() {
            self.num = self.num.div_exact(&g);
            self.den = self.den.div_exact(&g);
        }
        let cn = self.num.content();
        let cd = self.den.content();
        let c = cn.gcd(&cd);
        if !c.is_one() {
            self.num = Polynomial::new(self.num.coeffs.iter().map(|x| x / &c).collect());
            self.den = Polynomial::new(self.den.coeffs.iter().map(|x| x / &c).collect());
        }
        // Sign convention: lowest nonzero denominator coefficient positive.
        let lowest = self.den.coeffs.iter().find(|c| !c.is_zero());
        if lowest.map_or(false, |c| c.is_negative()) {
            self.num = -std::mem::replace(&mut self.num, Polynomial::zero());
            self.den = -std::mem::replace(&mut self.den, Polynomial::one());
        }
    }

    pub fn add(&self, rhs: &RationalSeries) -> RationalSeries {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        let structured = match (&self.structured, &rhs.structured) {
            (Some(a), Some(b)) => {
                let mut t = a.clone();
                t.extend(b.iter().cloned());
                Some(t)
            }
            _ => None,
        };
        let mut f = RationalSeries { num, den, structured };
        f.reduce_in_place();
        f
    }

    pub fn sub(&self, rhs: &RationalSeries) -> RationalSeries {
        let num = &(&self.num * &rhs.den) - &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        let mut f = RationalSeries { num, den, structured: None };
        f.reduce_in_place();
        f
    }

    pub fn mul(&self, rhs: &RationalSeries) -> RationalSeries {
        let structured = match (&self.structured, &rhs.structured) {
            (Some(a), Some(b)) => {
                let mut t = Vec::new();
                for x in a {
                    for y in b {
                        let mut fe = x.factor_exponents.clone();
                        fe.extend(y.factor_exponents.iter().copied());
                        fe.sort_unstable();
                        t.push(StructuredTerm {
                            numerator: &x.numerator * &y.numerator,
                            factor_exponents: fe,
                        });
                    }
                }
                Some(t)
            }
            _ => None,
        };
        let mut f = RationalSeries {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
            structured,
        };
        f.reduce_in_place();
        f
    }

    /// First n Maclaurin coefficients, exact.
    pub fn expand(&self, n: usize) -> Result<Vec<BigInt>> {
        let d0 = self.den.constant_term();
        if d0.is_zero() {
            return Err(Error::NotExpandable);
        }
        let mut out = Vec::with_capacity(n);
        for r in 0..n {
            // d0 * c_r = num_r - sum_{k=1..r} den_k * c_{r-k}
            let mut acc = self.num.coeff(r);
            for k in 1..=r {
                let dk = self.den.coeff(k);
                if !dk.is_zero() {
                    acc -= &dk * &out[r - k];
                }
            }
            let (q, rem) = acc.div_rem(&d0);
            if !rem.is_zero() {
                return Err(Error::InvariantBreach(
                    "non-integer coefficient in series expansion".into(),
                ));
            }
            out.push(q);
        }
        Ok(out)
    }

    /// f(z)/(1 − z): converts a sphere series into the cumulative series.
    pub fn cumulative(&self) -> RationalSeries {
        let den = &self.den * &Polynomial::from_i64(&[1, -1]);
        let mut f = RationalSeries { num: self.num.clone(), den, structured: None };
        f.reduce_in_place();
        f
    }
}

impl fmt::Display for RationalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Wire form: `{"num": [...], "den": [...]}`, ascending coefficients.
#[derive(Serialize, Deserialize)]
pub struct SeriesJson {
    pub num: Vec<serde_json::Number>,
    pub den: Vec<serde_json::Number>,
}

fn coeffs_to_json(p: &Polynomial) -> Vec<serde_json::Number> {
    p.coeffs()
        .iter()
        .map(|c| {
            c.to_string()
                .parse::<serde_json::Number>()
                .expect("integer literal is a valid JSON number")
        })
        .collect()
}

fn coeffs_from_json(v: &[serde_json::Number]) -> Result<Vec<BigInt>> {
    v.iter()
        .map(|n| {
            n.to_string()
                .parse::<BigInt>()
                .map_err(|_| Error::Malformed(format!("non-integer coefficient {n}")))
        })
        .collect()
}

impl RationalSeries {
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson { num: coeffs_to_json(&self.num), den: coeffs_to_json(&self.den) }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        RationalSeries::new(
            Polynomial::new(coeffs_from_json(&j.num)?),
            Polynomial::new(coeffs_from_json(&j.den)?),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> Polynomial {
        Polynomial::from_i64(c)
    }

    fn rs(num: &[i64], den: &[i64]) -> RationalSeries {
        RationalSeries::new(poly(num), poly(den)).unwrap()
    }

    #[test]
    fn poly_add_cancellation() {
        assert_eq!(&poly(&[1, 1]) + &poly(&[1, -1]), poly(&[2]));
    }

    #[test]
    fn poly_mul_difference_of_squares() {
        assert_eq!(&poly(&[1, 1]) * &poly(&[1, -1]), poly(&[1, 0, -1]));
    }

    #[test]
    fn poly_mul_zero_annihilates() {
        assert_eq!(&Polynomial::zero() * &poly(&[1, 1]), Polynomial::zero());
    }

    #[test]
    fn ratfun_common_denominator_add() {
        let a = rs(&[1], &[1, -1]);
        let b = rs(&[0, 1], &[1, -1]);
        assert_eq!(a.add(&b), rs(&[1, 1], &[1, -1]));
    }

    #[test]
    fn ratfun_mul_squares_denominator() {
        let a = rs(&[1], &[1, -1]);
        assert_eq!(a.mul(&a), rs(&[1], &[1, -2, 1]));
    }

    #[test]
    fn ratfun_self_subtraction_is_zero() {
        let f = rs(&[3, 1, 4], &[1, 5, 9]);
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn reduce_cancels_common_factor() {
        // (1 - z^2)/(1 - z) -> (1 + z)/1
        assert_eq!(rs(&[1, 0, -1], &[1, -1]), rs(&[1, 1], &[1]));
    }

    #[test]
    fn reduce_removes_content() {
        assert_eq!(rs(&[2, -2], &[2]), rs(&[1, -1], &[1]));
    }

    #[test]
    fn reduce_is_idempotent_on_reduced() {
        let f = rs(&[1, 1], &[1, -1]);
        assert_eq!(f.clone().reduce(), f);
    }

    #[test]
    fn expand_geometric() {
        let f = rs(&[1], &[1, -1]);
        let c = f.expand(4).unwrap();
        assert_eq!(c, vec![1, 1, 1, 1].into_iter().map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn expand_matches_long_division_oracle() {
        // Long-division oracle for (1+z)/(1-z): compute coefficients by
        // synthetic division directly.
        let f = rs(&[1, 1], &[1, -1]);
        let n = 8;
        let mut oracle = Vec::new();
        // num - (running quotient)*(den), one coefficient at a time.
        let num = [1i64, 1];
        let den = [1i64, -1];
        let mut q: Vec<i64> = Vec::new();
        for r in 0..n {
            let mut acc = if r < num.len() { num[r] } else { 0 };
            for k in 1..=r.min(den.len() - 1) {
                acc -= den[k] * q[r - k];
            }
            q.push(acc / den[0]);
            oracle.push(BigInt::from(q[r]));
        }
        assert_eq!(f.expand(n).unwrap(), oracle);
        assert_eq!(oracle[..4], [1, 2, 2, 2].map(BigInt::from));
    }

    #[test]
    fn expand_z2_ball_series() {
        // Brute-force count of Z^2 l1-balls: |B(r)| = 2r^2 + 2r + 1.
        let f = rs(&[1, 2, 1], &[1, -3, 3, -1]);
        let c = f.expand(4).unwrap();
        let oracle: Vec<BigInt> = (0..4i64)
            .map(|r| {
                let mut count = 0;
                for x in -10..=10i64 {
                    for y in -10..=10i64 {
                        if x.abs() + y.abs() <= r {
                            count += 1;
                        }
                    }
                }
                BigInt::from(count)
            })
            .collect();
        assert_eq!(c, oracle);
        assert_eq!(c, [1, 5, 13, 25].map(BigInt::from));
    }

    #[test]
    fn non_expandable_rejected() {
        let r = RationalSeries::new(poly(&[1]), poly(&[0, 1]));
        assert!(matches!(r, Err(Error::NotExpandable)));
        assert!(matches!(
            RationalSeries::new(poly(&[1]), Polynomial::zero()),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn cumulative_basics() {
        assert_eq!(RationalSeries::one().cumulative(), rs(&[1], &[1, -1]));
        assert_eq!(rs(&[1, 1], &[1]).cumulative(), rs(&[1, 1], &[1, -1]));
    }

    #[test]
    fn equality_via_cross_multiplication() {
        let a = rs(&[1, 2, 1], &[1, -1]);
        let b = rs(&[2, 4, 2], &[2, -2]);
        assert_eq!(a, b);
        let cross_l = &(a.numerator().clone()) * b.denominator();
        let cross_r = &(b.numerator().clone()) * a.denominator();
        assert_eq!(cross_l, cross_r);
    }

    #[test]
    fn json_round_trip() {
        let f = rs(&[1, 1], &[1, 0, -7]);
        let j = serde_json::to_string(&f.to_json()).unwrap();
        let back: SeriesJson = serde_json::from_str(&j).unwrap();
        assert_eq!(RationalSeries::from_json(&back).unwrap(), f);
    }
}
