use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::{int, to_f64, Rational};

/// Float coefficients below this magnitude are treated as cancelled.
pub const APPROX_ZERO: f64 = 1e-9;

/// A series coefficient: exact while it stays rational, float after the first irrational step.
#[derive(Clone, Debug)]
pub enum Coeff {
    Exact(Rational),
    Approx(f64),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Coeff::Exact(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Coeff::Exact(int(n))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact(r) => r.is_zero(),
            Coeff::Approx(v) => v.abs() < APPROX_ZERO,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Coeff::Exact(r) => Some(r),
            Coeff::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coeff::Exact(r) => to_f64(r),
            Coeff::Approx(v) => *v,
        }
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.to_f64() > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Real power `self^r`, exact when the result is rational.
    pub fn powr(&self, r: &Rational) -> Result<Coeff> {
        if r.is_integer() {
            let e = r.to_integer().to_i64().ok_or_else(|| Error::Truncation("exponent overflow".into()))?;
            return match self {
                Coeff::Exact(c) => {
                    if c.is_zero() && e < 0 {
                        return Err(Error::Precondition("zero to a negative power".into()));
                    }
                    let p = crate::expr::pow_rat(c, e.unsigned_abs() as u32);
                    Ok(Coeff::Exact(if e < 0 { p.recip() } else { p }))
                }
                Coeff::Approx(v) => Ok(Coeff::Approx(v.powi(e as i32))),
            };
        }
        let den = r.denom().to_u32().ok_or_else(|| Error::Truncation("exponent overflow".into()))?;
        let v = self.to_f64();
        if v < 0.0 && den % 2 == 0 {
            return Err(Error::Precondition("even root of a negative coefficient".into()));
        }
        if let Coeff::Exact(c) = self {
            if let Some(root) = exact_root(c, den) {
                return Coeff::Exact(root).powr(&Rational::from_integer(r.numer().clone()));
            }
        }
        let mag = v.abs().powf(to_f64(r));
        Ok(Coeff::Approx(if v < 0.0 { -mag } else { mag }))
    }

    pub fn sqrt(&self) -> Result<Coeff> {
        self.powr(&Rational::new(1.into(), 2.into()))
    }

    fn close_to(&self, other: &Coeff) -> bool {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= APPROX_ZERO * (1.0 + a.abs().max(b.abs()))
            }
        }
    }
}

fn exact_root(c: &Rational, k: u32) -> Option<Rational> {
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(k);
        (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
    };
    Some(Rational::new(root(c.numer())?, root(c.denom())?))
}

impl PartialEq for Coeff {
    fn eq(&self, other: &Self) -> bool {
        self.close_to(other)
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::Exact(r)
    }
}

impl From<f64> for Coeff {
    fn from(v: f64) -> Self {
        Coeff::Approx(v)
    }
}

macro_rules! coeff_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for &Coeff {
            type Output = Coeff;
            fn $m(self, rhs: &Coeff) -> Coeff {
                match (self, rhs) {
                    (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a $op b),
                    _ => Coeff::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $tr for Coeff {
            type Output = Coeff;
            fn $m(self, rhs: Coeff) -> Coeff {
                (&self).$m(&rhs)
            }
        }
    };
}
coeff_op!(Add, add, +);
coeff_op!(Sub, sub, -);
coeff_op!(Mul, mul, *);
coeff_op!(Div, div, /);

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        match self {
            Coeff::Exact(a) => Coeff::Exact(-a),
            Coeff::Approx(v) => Coeff::Approx(-v),
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(r) => write!(f, "{r}"),
            Coeff::Approx(v) => write!(f, "{v:.6}~"),
        }
    }
}

fn rmin(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if a < b { a } else { b }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Generalized power series `sum c_k t^{e_k} + O(t^T)` in one variable, `t > 0`.
///
/// `trunc == None` means the series is exact (a finite sum).
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries {
    terms: Vec<(Rational, Coeff)>,
    trunc: Option<Rational>,
}

impl PuiseuxSeries {
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            trunc: None,
        }
    }

    pub fn monomial(c: Coeff, e: Rational) -> Self {
        Self::from_terms(vec![(e, c)], None)
    }

    pub fn monomial_int(c: i64, e: i64) -> Self {
        Self::monomial(Coeff::int(c), int(e))
    }

    /// Sorts, merges equal exponents, drops zeros and anything at or beyond `trunc`.
    pub fn from_terms(mut terms: Vec<(Rational, Coeff)>, trunc: Option<Rational>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rational, Coeff)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc = &*lc + &c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(e, c)| !c.is_zero() && trunc.as_ref().is_none_or(|t| e < t));
        Self { terms: merged, trunc }
    }

    pub fn terms(&self) -> &[(Rational, Coeff)] {
        &self.terms
    }

    pub fn truncation(&self) -> Option<&Rational> {
        self.trunc.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn has_approx(&self) -> bool {
        self.terms.iter().any(|(_, c)| !c.is_exact())
    }

    /// True when no nonzero term is known (the series is `O(t^T)` or zero).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Rational, &Coeff)> {
        self.terms.first().map(|(e, c)| (e, c))
    }

    pub fn valuation(&self) -> Option<Rational> {
        self.terms.first().map(|(e, _)| e.clone())
    }

    /// Lower bound on the true valuation: the leading exponent, or the truncation order.
    fn order_bound(&self) -> Option<Rational> {
        self.valuation().or_else(|| self.trunc.clone())
    }

    pub fn coeff_at(&self, e: &Rational) -> Coeff {
        self.terms
            .iter()
            .find(|(x, _)| x == e)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Coeff::zero)
    }

    pub fn cap(&self, limit: &Rational) -> Self {
        Self::from_terms(self.terms.clone(), rmin(self.trunc.clone(), Some(limit.clone())))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(terms, rmin(self.trunc.clone(), other.trunc.clone()))
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            trunc: self.trunc.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self {
                terms: vec![],
                trunc: self.trunc.clone(),
            };
        }
        Self::from_terms(
            self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
            self.trunc.clone(),
        )
    }

    pub fn scale_rat(&self, c: &Rational) -> Self {
        self.scale(&Coeff::Exact(c.clone()))
    }

    /// Multiplies by `t^e`.
    pub fn shift(&self, e: &Rational) -> Self {
        Self {
            terms: self.terms.iter().map(|(x, c)| (x + e, c.clone())).collect(),
            trunc: self.trunc.as_ref().map(|t| t + e),
        }
    }

    pub fn mul(&self, other: &Self, limit: &Rational) -> Self {
        let mut terms = Vec::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                if &e < limit {
                    terms.push((e, c1 * c2));
                }
            }
        }
        let t1 = match (&self.trunc, other.order_bound()) {
            (Some(t), Some(v)) => Some(t + v),
            _ => None,
        };
        let t2 = match (&other.trunc, self.order_bound()) {
            (Some(t), Some(v)) => Some(t + v),
            _ => None,
        };
        let trunc = rmin(rmin(t1, t2), Some(limit.clone()));
        Self::from_terms(terms, trunc)
    }

    pub fn pow_u32(&self, e: u32, limit: &Rational) -> Self {
        let mut acc = Self::monomial(Coeff::one(), Rational::zero());
        for _ in 0..e {
            acc = acc.mul(self, limit);
        }
        acc.cap(limit)
    }

    /// `self^r` for a rational `r`, expanded up to `t^limit`.
    pub fn powr(&self, r: &Rational, limit: &Rational) -> Result<Self> {
        if r.is_zero() {
            return Ok(Self::monomial(Coeff::one(), Rational::zero()).cap(limit));
        }
        if r.is_integer() && r.is_positive() {
            return Ok(self.pow_u32(r.to_integer().to_u32().unwrap_or(u32::MAX), limit));
        }
        let (e0, c0) = match self.leading() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => return Err(Error::Truncation("power of a series with no known leading term".into())),
        };
        let lead = c0.powr(r)?;
        let base_exp = &e0 * r;
        let rel_limit = limit - &base_exp;
        // u = self / (c0 t^e0) - 1
        let inv = Coeff::one() / c0.clone();
        let u = Self::from_terms(
            self.terms[1..]
                .iter()
                .map(|(e, c)| (e - &e0, c * &inv))
                .collect(),
            self.trunc.as_ref().map(|t| t - &e0),
        );
        let mut sum = Self::monomial(Coeff::one(), Rational::zero()).cap(&rel_limit);
        if let Some(uv) = u.order_bound() {
            if uv.is_positive() && uv < rel_limit {
                let mut term = Self::monomial(Coeff::one(), Rational::zero());
                let mut k = 1i64;
                loop {
                    let factor = (r - int(k - 1)) / int(k);
                    term = term.mul(&u, &rel_limit).scale_rat(&factor);
                    if term.is_zero() && term.trunc.as_ref().is_none_or(|t| *t >= rel_limit) {
                        break;
                    }
                    sum = sum.add(&term);
                    if &uv * int(k + 1) >= rel_limit {
                        break;
                    }
                    k += 1;
                }
                sum = sum.cap(&rel_limit);
            }
        }
        Ok(sum.scale(&lead).shift(&base_exp))
    }

    pub fn sqrt(&self, limit: &Rational) -> Result<Self> {
        self.powr(&Rational::new(1.into(), 2.into()), limit)
    }

    /// `self(inner(s))` for an inner series with positive valuation.
    pub fn compose(&self, inner: &Self, limit: &Rational) -> Result<Self> {
        let v = inner
            .valuation()
            .filter(|v| v.is_positive())
            .ok_or_else(|| Error::Precondition("inner series must vanish at 0".into()))?;
        let mut acc = Self::zero();
        for (e, c) in &self.terms {
            if e * &v >= *limit {
                break;
            }
            acc = acc.add(&inner.powr(e, limit)?.scale(c));
        }
        let trunc = rmin(self.trunc.as_ref().map(|t| t * &v), Some(limit.clone()));
        Ok(Self::from_terms(acc.terms, rmin(acc.trunc, trunc)))
    }

    /// Series reversion: for `s = self(t)` with positive leading coefficient,
    /// returns `t(s)` known up to `s^limit`.
    pub fn reverse(&self, limit: &Rational) -> Result<Self> {
        let (e, c) = match self.leading() {
            Some((e, c)) if e.is_positive() && c.signum() > 0 => (e.clone(), c.clone()),
            _ => return Err(Error::Precondition("reversion needs a positive leading term".into())),
        };
        let inv_e = e.recip();
        let head = Self::monomial((Coeff::one() / c.clone()).powr(&inv_e)?, inv_e.clone());
        let normalized = self.shift(&-&e).scale(&(Coeff::one() / c));
        let inner_limit = limit - &inv_e;
        let w = normalized.powr(&-&inv_e, &(&inner_limit * &e + int(1)))?;
        let mut psi = head.cap(limit);
        for _ in 0..200 {
            let next = head.mul(&w.compose(&psi, &inner_limit)?, limit);
            if next.terms == psi.terms {
                return Ok(next);
            }
            psi = next;
        }
        Err(Error::Truncation("series reversion did not stabilise".into()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * t.powf(to_f64(e)))
            .sum()
    }

    /// Least common denominator of the exponents.
    pub fn ramification(&self) -> BigInt {
        self.terms
            .iter()
            .fold(BigInt::one(), |acc, (e, _)| acc.lcm(e.denom()))
    }

    /// Drops float noise by comparing against another series term by term.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*t^{e}")?;
        }
        if let Some(t) = &self.trunc {
            write!(f, " + O(t^{t})")?;
        }
        Ok(())
    }
}

impl serde::Serialize for PuiseuxSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    #[test]
    fn exact_powers_stay_exact() {
        assert_eq!(Coeff::int(9).sqrt().unwrap(), Coeff::int(3));
        assert!(Coeff::int(9).sqrt().unwrap().is_exact());
        assert!(!Coeff::int(3).sqrt().unwrap().is_exact());
        assert_eq!(Coeff::int(-8).powr(&rat(1, 3)).unwrap(), Coeff::int(-2));
        assert!(Coeff::int(-4).sqrt().is_err());
    }

    #[test]
    fn sqrt_of_one_plus_t() {
        // sqrt(1 + t) = 1 + t/2 - t^2/8 + t^3/16 + ...
        let s = PuiseuxSeries::from_terms(vec![(int(0), Coeff::int(1)), (int(1), Coeff::int(1))], None);
        let r = s.sqrt(&int(4)).unwrap();
        let expect = [rat(1, 1), rat(1, 2), rat(-1, 8), rat(1, 16)];
        for (k, c) in expect.iter().enumerate() {
            assert_eq!(r.coeff_at(&int(k as i64)), Coeff::Exact(c.clone()));
        }
        assert_eq!(r.truncation(), Some(&int(4)));
    }

    #[test]
    fn reversion_inverts() {
        // s = t + t^2  =>  t = s - s^2 + 2 s^3 - 5 s^4 + ...
        let phi = PuiseuxSeries::from_terms(vec![(int(1), Coeff::int(1)), (int(2), Coeff::int(1))], None);
        let psi = phi.reverse(&int(5)).unwrap();
        let expect = [(1, 1), (2, -1), (3, 2), (4, -5)];
        for (e, c) in expect {
            assert_eq!(psi.coeff_at(&int(e)), Coeff::int(c), "coefficient of s^{e}");
        }
        let back = phi.compose(&psi, &int(5)).unwrap();
        assert!(back.approx_eq(&PuiseuxSeries::monomial_int(1, 1).cap(&int(5))));
    }

    #[test]
    fn fractional_reversion() {
        // s = 3 t^2  =>  t = (s/3)^(1/2)
        let phi = PuiseuxSeries::monomial_int(3, 2);
        let psi = phi.reverse(&int(3)).unwrap();
        let (e, c) = psi.leading().unwrap();
        assert_eq!(e, &rat(1, 2));
        assert!((c.to_f64() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mul_truncation_bookkeeping() {
        let a = PuiseuxSeries::from_terms(vec![(int(1), Coeff::int(1))], Some(int(3)));
        let b = PuiseuxSeries::from_terms(vec![(int(2), Coeff::int(2))], None);
        let p = a.mul(&b, &int(100));
        assert_eq!(p.truncation(), Some(&int(5)));
        assert_eq!(p.terms().len(), 1);
    }
}
