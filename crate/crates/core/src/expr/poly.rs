use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerator/denominator pairs: fall back on a scaled division.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Order of vanishing along an axis. `Infinite` sorts after every finite order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(m) => Some(m),
            Order::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Order::Finite(_))
    }
}

impl Add for Order {
    type Output = Order;
    fn add(self, rhs: Order) -> Order {
        match (self, rhs) {
            (Order::Finite(a), Order::Finite(b)) => Order::Finite(a + b),
            _ => Order::Infinite,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(m) => write!(f, "{m}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Order::Finite(m) => s.serialize_u32(*m),
            Order::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|m| Order::Finite(m as u32))
                .ok_or_else(|| serde::de::Error::custom("order must be a natural number")),
            serde_json::Value::String(s) if s == "inf" => Ok(Order::Infinite),
            _ => Err(serde::de::Error::custom("expected a natural number or \"inf\"")),
        }
    }
}

/// Bivariate polynomial with exact rational coefficients; `x^i y^j` is keyed by `(i, j)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(Rational::one(), 0, 1)
    }

    pub fn monomial(c: Rational, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in it {
            p.add_term(i, j, c);
        }
        p
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(terms: &[(i64, u32, u32)]) -> Self {
        Self::from_terms(terms.iter().map(|&(c, i, j)| ((i, j), int(c))))
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).min()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(0, 0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Drops every term of total degree above `n`.
    pub fn truncate(&self, n: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i + j <= n)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i + j == d)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn mul_truncated(&self, other: &Self, n: u32) -> Self {
        let mut out = Self::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &other.terms {
                if i1 + i2 + j1 + j2 <= n {
                    out.add_term(i1 + i2, j1 + j2, c1 * c2);
                }
            }
        }
        out
    }

    pub fn partial_derivative(&self, axis: Axis) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            match axis {
                Axis::X if i > 0 => out.add_term(i - 1, j, c * int(i as i64)),
                Axis::Y if j > 0 => out.add_term(i, j - 1, c * int(j as i64)),
                _ => {}
            }
        }
        out
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * pow_rat(x, i) * pow_rat(y, j);
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| to_f64(c) * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    /// Coefficients of `p` restricted to the axis, i.e. of `p(0, y)` (axis Y) or `p(x, 0)` (axis X).
    pub fn restrict_to_axis(&self, axis: Axis) -> Vec<(u32, Rational)> {
        self.terms
            .iter()
            .filter_map(|(&(i, j), c)| match axis {
                Axis::Y if i == 0 => Some((j, c.clone())),
                Axis::X if j == 0 => Some((i, c.clone())),
                _ => None,
            })
            .collect()
    }

    /// Least exponent with a nonzero coefficient in the restriction to `axis`.
    pub fn order_along_axis(&self, axis: Axis) -> Order {
        self.restrict_to_axis(axis)
            .into_iter()
            .map(|(m, _)| m)
            .min()
            .map(Order::Finite)
            .unwrap_or(Order::Infinite)
    }

    /// Substitutes polynomials for `x` and `y`, dropping terms of total degree above `trunc`.
    pub fn substitute(&self, sx: &Poly2, sy: &Poly2, trunc: Option<u32>) -> Poly2 {
        let cap = trunc.unwrap_or(u32::MAX);
        let max_i = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let mul = |a: &Poly2, b: &Poly2| match trunc {
            Some(n) => a.mul_truncated(b, n),
            None => a * b,
        };
        let mut xp = vec![Poly2::one()];
        for k in 0..max_i as usize {
            let next = mul(&xp[k], sx);
            xp.push(next);
        }
        let mut yp = vec![Poly2::one()];
        for k in 0..max_j as usize {
            let next = mul(&yp[k], sy);
            yp.push(next);
        }
        let mut out = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            let term = mul(&xp[i as usize], &yp[j as usize]).scale(c);
            out = &out + &term;
        }
        if trunc.is_some() {
            out.truncate(cap)
        } else {
            out
        }
    }

    /// Float copy of the terms for fast repeated evaluation.
    pub fn to_f64_terms(&self) -> Vec<(i32, i32, f64)> {
        self.terms
            .iter()
            .map(|(&(i, j), c)| (i as i32, j as i32, to_f64(c)))
            .collect()
    }
}

pub(crate) fn pow_rat(x: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: Poly2) -> Poly2 {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        -&self
    }
}

fn fmt_monomial(i: u32, j: u32) -> String {
    let part = |v: &str, e: u32| match e {
        0 => None,
        1 => Some(v.to_string()),
        _ => Some(format!("{v}^{e}")),
    };
    [part("x", i), part("y", j)]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join("*")
}

/// Canonical form: terms by ascending total degree, then descending power of x.
impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(i, j)| (i + j, std::cmp::Reverse(i)));
        for (n, (i, j)) in keys.into_iter().enumerate() {
            let c = &self.terms[&(i, j)];
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono = fmt_monomial(i, j);
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{a}*{mono}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_examples() {
        let p = Poly2::from_int_terms(&[(1, 1, 1), (1, 0, 3)]);
        assert_eq!(p.order_along_axis(Axis::Y), Order::Finite(3));
        let xy = Poly2::from_int_terms(&[(1, 1, 1)]);
        assert_eq!(xy.order_along_axis(Axis::Y), Order::Infinite);
        let y2 = Poly2::from_int_terms(&[(1, 0, 2)]);
        assert_eq!(y2.order_along_axis(Axis::Y), Order::Finite(2));
    }

    #[test]
    fn derivative_and_eval() {
        let p = Poly2::from_int_terms(&[(1, 1, 1), (1, 0, 3)]);
        let d = p.partial_derivative(Axis::Y);
        assert_eq!(d, Poly2::from_int_terms(&[(1, 1, 0), (3, 0, 2)]));
        let xy = Poly2::from_int_terms(&[(1, 1, 1)]);
        assert_eq!(xy.eval(&int(1), &int(2)), int(2));
    }

    #[test]
    fn display_is_canonical() {
        let p = Poly2::from_terms([((1, 1), int(1)), ((0, 3), rat(3, 2)), ((2, 0), int(-1))]);
        assert_eq!(p.to_string(), "-x^2 + x*y + 3/2*y^3");
        assert_eq!(Poly2::zero().to_string(), "0");
    }

    #[test]
    fn infinite_order_sorts_last() {
        assert!(Order::Finite(100) < Order::Infinite);
        assert_eq!(Order::Finite(2) + Order::Finite(3), Order::Finite(5));
    }
}
