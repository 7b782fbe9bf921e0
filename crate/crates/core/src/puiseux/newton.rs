use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::series::{Coeff, PuiseuxSeries};
use crate::error::{Error, Result};
use crate::expr::{int, Poly2, Rational};
use crate::numeric;

/// Which variable a branch expresses as a series in the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `x = phi(y)`, `y = sign * t`.
    XofY,
    /// `y = phi(x)`, `x = sign * t`.
    YofX,
}

/// A real half-branch of a plane curve through the origin.
#[derive(Clone, Debug, Serialize)]
pub struct PuiseuxBranch {
    pub orientation: Orientation,
    /// The independent variable equals `sign * t`, `t >= 0`.
    pub sign: i32,
    /// The dependent variable as a series in `t`.
    pub series: PuiseuxSeries,
    pub multiplicity: u32,
    pub truncated: bool,
    pub precision_loss: bool,
}

impl PuiseuxBranch {
    /// `(x(t), y(t))`.
    pub fn xy(&self) -> (PuiseuxSeries, PuiseuxSeries) {
        let indep = PuiseuxSeries::monomial(Coeff::int(self.sign as i64), int(1));
        match self.orientation {
            Orientation::XofY => (self.series.clone(), indep),
            Orientation::YofX => (indep, self.series.clone()),
        }
    }

    pub fn point(&self, t: f64) -> (f64, f64) {
        let d = self.series.eval(t);
        let s = self.sign as f64 * t;
        match self.orientation {
            Orientation::XofY => (d, s),
            Orientation::YofX => (s, d),
        }
    }

    /// Leading exponent of the dependent series; `None` when it is identically zero.
    pub fn leading_exponent(&self) -> Option<Rational> {
        self.series.valuation()
    }
}

/// Real half-branches plus the number of complex (non-real) solutions met along the way.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BranchSet {
    pub real: Vec<PuiseuxBranch>,
    pub nonreal: u32,
}

/// A polynomial in a dependent variable `d` with Puiseux coefficients in `t`.
#[derive(Clone, Debug)]
struct BiSeries {
    terms: BTreeMap<(u32, Rational), Coeff>,
    trunc: Option<Rational>,
}

impl BiSeries {
    fn from_poly(p: &Poly2, orientation: Orientation, sign: i32) -> Self {
        let mut terms = BTreeMap::new();
        for (&(i, j), c) in p.terms() {
            let (dep, ind) = match orientation {
                Orientation::XofY => (i, j),
                Orientation::YofX => (j, i),
            };
            let mut c = c.clone();
            if sign < 0 && ind % 2 == 1 {
                c = -c;
            }
            terms.insert((dep, int(ind as i64)), Coeff::Exact(c));
        }
        Self { terms, trunc: None }
    }

    fn min_dep(&self) -> Option<u32> {
        self.terms.keys().map(|(i, _)| *i).min()
    }

    /// `p(c t^g + d, t)`, dropping exponents at or beyond `cap`.
    fn shift(&self, c: &Coeff, g: &Rational, cap: &Rational) -> Self {
        let mut out: BTreeMap<(u32, Rational), Coeff> = BTreeMap::new();
        let mut trunc = self.trunc.clone();
        let max_i = self.terms.keys().map(|(i, _)| *i).max().unwrap_or(0);
        let mut cpow = vec![Coeff::one()];
        for k in 1..=max_i {
            cpow.push(&cpow[k as usize - 1] * c);
        }
        for ((i, j), a) in &self.terms {
            let mut binom = BigInt::one();
            for k in 0..=*i {
                // term d^k from choosing c t^g (i - k) times
                if k > 0 {
                    binom = binom * BigInt::from(i - k + 1) / BigInt::from(k);
                }
                let e = j + g * int((i - k) as i64);
                if &e >= cap {
                    if trunc.as_ref().is_none_or(|t| t > cap) {
                        trunc = Some(cap.clone());
                    }
                    continue;
                }
                let coef = &(a * &cpow[(i - k) as usize]) * &Coeff::Exact(Rational::from_integer(binom.clone()));
                let slot = out.entry((k, e)).or_insert_with(Coeff::zero);
                *slot = &*slot + &coef;
            }
        }
        out.retain(|(_, e), c| !c.is_zero() && trunc.as_ref().is_none_or(|t| e < t));
        Self { terms: out, trunc }
    }

    fn divide_dep(&self, k: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|((i, j), c)| ((i - k, j.clone()), c.clone()))
                .collect(),
            trunc: self.trunc.clone(),
        }
    }
}

struct Edge {
    slope: Rational,
    start: (u32, Rational),
    end: (u32, Rational),
}

/// Lower-left hull edges of the Newton polygon, steepest first.
fn newton_edges(p: &BiSeries) -> Vec<Edge> {
    let mut best: BTreeMap<u32, Rational> = BTreeMap::new();
    for (i, j) in p.terms.keys() {
        let e = best.entry(*i).or_insert_with(|| j.clone());
        if j < e {
            *e = j.clone();
        }
    }
    let Some(j0) = best.get(&0).cloned() else {
        return Vec::new();
    };
    let mut cur = (0u32, j0);
    let mut edges = Vec::new();
    loop {
        let mut choice: Option<(Rational, u32)> = None;
        for (i, j) in best.range(cur.0 + 1..) {
            if j >= &cur.1 {
                continue;
            }
            let g = (&cur.1 - j) / int((i - cur.0) as i64);
            match &choice {
                Some((bg, _)) if &g < bg => {}
                Some((bg, _)) if &g == bg => choice = Some((g, *i)),
                _ => choice = Some((g, *i)),
            }
        }
        let Some((g, i_end)) = choice else { break };
        let end = (i_end, best[&i_end].clone());
        edges.push(Edge {
            slope: g,
            start: cur.clone(),
            end: end.clone(),
        });
        cur = end;
    }
    edges
}

/// Real nonzero roots (with multiplicity) of `sum coeffs[k] c^k`, and the number of non-real roots.
fn char_roots(coeffs: &[Coeff]) -> (Vec<(Coeff, u32)>, u32) {
    let degree = coeffs.len() as u32 - 1;
    let floats: Vec<f64> = coeffs.iter().map(|c| c.to_f64()).collect();
    let numeric = numeric::real_roots(&floats);
    let exact: Option<Vec<Rational>> = coeffs.iter().map(|c| c.exact().cloned()).collect();
    let mut roots = Vec::new();
    let mut count = 0;
    for (r, m) in numeric {
        count += m;
        if r.abs() < 1e-300 {
            continue;
        }
        let root = exact
            .as_ref()
            .and_then(|ex| rationalize(ex, r).map(|q| (Coeff::Exact(q.clone()), exact_multiplicity(ex, &q))))
            .or_else(|| binomial_root(coeffs, r).map(|c| (c, m)))
            .unwrap_or((Coeff::Approx(r), m));
        roots.push(root);
    }
    let real: u32 = roots.iter().map(|(_, m)| *m).sum::<u32>().max(count);
    (roots, degree.saturating_sub(real))
}

fn eval_exact(c: &[Rational], x: &Rational) -> Rational {
    c.iter().rev().fold(Rational::zero(), |acc, a| acc * x + a)
}

fn exact_multiplicity(c: &[Rational], x: &Rational) -> u32 {
    let mut poly = c.to_vec();
    let mut m = 0;
    while poly.len() > 1 && eval_exact(&poly, x).is_zero() {
        // synthetic division by (c - x)
        let n = poly.len() - 1;
        let mut q = vec![Rational::zero(); n];
        let mut acc = Rational::zero();
        for k in (0..n).rev() {
            acc = &acc * x + &poly[k + 1];
            q[k] = acc.clone();
        }
        poly = q;
        m += 1;
    }
    m.max(1)
}

/// Finds a rational root near `r` among continued-fraction convergents.
fn rationalize(c: &[Rational], r: f64) -> Option<Rational> {
    let lead = c.last()?;
    let den_bound = lead
        .numer()
        .abs()
        .to_f64()
        .unwrap_or(f64::MAX)
        * c.iter().map(|a| a.denom().to_f64().unwrap_or(1.0)).fold(1.0, f64::max);
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut x = r;
    for _ in 0..40 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        let cand = Rational::new(h2.clone(), k2.clone());
        if eval_exact(c, &cand).is_zero() {
            return Some(cand);
        }
        if k2.to_f64().unwrap_or(f64::MAX) > den_bound.max(1e6) {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a;
        if frac.abs() < 1e-15 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

/// `a c^k + b = 0` with exact data: the root as an exact power when possible.
fn binomial_root(coeffs: &[Coeff], r: f64) -> Option<Coeff> {
    let nz: Vec<usize> = (0..coeffs.len()).filter(|&k| !coeffs[k].is_zero()).collect();
    if nz.len() != 2 || nz[0] != 0 {
        return None;
    }
    let k = nz[1];
    let v = (-&(&coeffs[0] / &coeffs[k])).powr(&Rational::new(1.into(), (k as i64).into())).ok()?;
    Some(if r < 0.0 && k % 2 == 0 { -&v } else { v })
}

struct Raw {
    terms: Vec<(Rational, Coeff)>,
    multiplicity: u32,
    truncated: bool,
    stop: Option<Rational>,
}

#[allow(clippy::too_many_arguments)]
fn expand(
    p: &BiSeries,
    prefix: &[(Rational, Coeff)],
    last: &Rational,
    limit: &Rational,
    cap: &Rational,
    out: &mut Vec<Raw>,
    nonreal: &mut u32,
) {
    let Some(i0) = p.min_dep() else {
        out.push(Raw {
            terms: prefix.to_vec(),
            multiplicity: 1,
            truncated: true,
            stop: p.trunc.clone(),
        });
        return;
    };
    let q = if i0 > 0 {
        out.push(Raw {
            terms: prefix.to_vec(),
            multiplicity: i0,
            truncated: p.trunc.is_some(),
            stop: p.trunc.clone(),
        });
        p.divide_dep(i0)
    } else {
        p.clone()
    };
    let edges: Vec<Edge> = newton_edges(&q).into_iter().filter(|e| &e.slope > last).collect();
    let remaining = edges.last().map(|e| e.end.0).unwrap_or(0);
    for e in &edges {
        let val = &e.slope * int(e.start.0 as i64) + &e.start.1;
        let unknown = q.trunc.as_ref().is_some_and(|t| &val >= t);
        if unknown || &e.slope >= limit {
            out.push(Raw {
                terms: prefix.to_vec(),
                multiplicity: remaining - e.start.0,
                truncated: true,
                stop: Some(if unknown { e.slope.clone() } else { limit.clone() }),
            });
            return;
        }
        let width = e.end.0 - e.start.0;
        let coeffs: Vec<Coeff> = (0..=width)
            .map(|k| {
                let j = &e.start.1 - &e.slope * int(k as i64);
                q.terms
                    .get(&(e.start.0 + k, j))
                    .cloned()
                    .unwrap_or_else(Coeff::zero)
            })
            .collect();
        let (roots, nr) = char_roots(&coeffs);
        *nonreal += nr;
        for (c, _) in roots {
            let child = q.shift(&c, &e.slope, cap);
            let mut pre = prefix.to_vec();
            pre.push((e.slope.clone(), c));
            expand(&child, &pre, &e.slope, limit, cap, out, nonreal);
        }
    }
}

/// Real half-branches of `p = 0` through the origin, with the dependent variable
/// chosen by `orientation`, expanded up to exponent `limit`.
///
/// Branches lying on the independent axis itself (e.g. `x = 0` for `YofX`) are not
/// representable in that orientation and are skipped.
pub fn newton_puiseux(p: &Poly2, orientation: Orientation, limit: &Rational) -> Result<BranchSet> {
    if p.is_zero() {
        return Err(Error::Precondition("zero polynomial".into()));
    }
    if !p.constant_term().is_zero() {
        return Err(Error::Precondition("curve does not pass through the origin".into()));
    }
    let (dmax, jmax) = p.terms().fold((0u32, 0u32), |(d, j), (&(a, b), _)| match orientation {
        Orientation::XofY => (d.max(a), j.max(b)),
        Orientation::YofX => (d.max(b), j.max(a)),
    });
    let cap = limit * int(dmax as i64 + 1) + int(jmax as i64 + 1);
    let mut set = BranchSet::default();
    for sign in [1, -1] {
        let bi = BiSeries::from_poly(p, orientation, sign);
        let mut raw = Vec::new();
        expand(&bi, &[], &Rational::zero(), limit, &cap, &mut raw, &mut set.nonreal);
        for r in raw {
            let series = PuiseuxSeries::from_terms(r.terms, if r.truncated { r.stop } else { None });
            set.real.push(PuiseuxBranch {
                orientation,
                sign,
                precision_loss: series.has_approx(),
                series,
                multiplicity: r.multiplicity,
                truncated: r.truncated,
            });
        }
    }
    Ok(set)
}

/// Real solutions `d(t) -> 0` of `sum_k coeffs[k].1 * d^coeffs[k].0 = 0`, `t > 0`,
/// where the coefficients are series in `t`.
pub fn solve_dependent(coeffs: &[(u32, PuiseuxSeries)], limit: &Rational) -> Result<BranchSet> {
    let mut terms: BTreeMap<(u32, Rational), Coeff> = BTreeMap::new();
    let mut trunc: Option<Rational> = None;
    for (k, s) in coeffs {
        for (e, c) in s.terms() {
            let slot = terms.entry((*k, e.clone())).or_insert_with(Coeff::zero);
            *slot = &*slot + c;
        }
        if let Some(t) = s.truncation() {
            if trunc.as_ref().is_none_or(|u| t < u) {
                trunc = Some(t.clone());
            }
        }
    }
    terms.retain(|(_, e), c| !c.is_zero() && trunc.as_ref().is_none_or(|t| e < t));
    let dmax = coeffs.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let jmax = terms.keys().map(|(_, e)| e.clone()).max().unwrap_or_else(Rational::zero);
    let cap = limit * int(dmax as i64 + 1) + jmax + int(1);
    let bi = BiSeries { terms, trunc };
    let mut raw = Vec::new();
    let mut set = BranchSet::default();
    expand(&bi, &[], &Rational::zero(), limit, &cap, &mut raw, &mut set.nonreal);
    for r in raw {
        let series = PuiseuxSeries::from_terms(r.terms, if r.truncated { r.stop } else { None });
        set.real.push(PuiseuxBranch {
            orientation: Orientation::YofX,
            sign: 1,
            precision_loss: series.has_approx(),
            series,
            multiplicity: r.multiplicity,
            truncated: r.truncated,
        });
    }
    Ok(set)
}

/// Half-branches of `p = 0`, each reported once: graphs `y(x)` with leading exponent
/// at least 1, and graphs `x(y)` tangent to the y-axis.
pub fn curve_half_branches(p: &Poly2, limit: &Rational) -> Result<BranchSet> {
    let one = Rational::one();
    let a = newton_puiseux(p, Orientation::YofX, limit)?;
    let b = newton_puiseux(p, Orientation::XofY, limit)?;
    let mut real: Vec<PuiseuxBranch> = a
        .real
        .into_iter()
        .filter(|br| br.leading_exponent().is_none_or(|e| e >= one))
        .collect();
    real.extend(
        b.real
            .into_iter()
            .filter(|br| br.leading_exponent().is_none_or(|e| e > one)),
    );
    Ok(BranchSet {
        real,
        nonreal: a.nonreal.min(b.nonreal),
    })
}

/// `p(x(t), y(t))` for a branch, known up to `t^limit`.
pub fn residual(p: &Poly2, br: &PuiseuxBranch, limit: &Rational) -> PuiseuxSeries {
    let (sx, sy) = br.xy();
    let mut acc = PuiseuxSeries::zero();
    for (&(i, j), c) in p.terms() {
        acc = acc.add(&sx.pow_u32(i, limit).mul(&sy.pow_u32(j, limit), limit).scale_rat(c));
    }
    acc.cap(limit)
}

/// Least common multiple of the exponent denominators of all branches.
pub fn ramification(set: &BranchSet) -> BigInt {
    set.real
        .iter()
        .fold(BigInt::one(), |acc, b| acc.lcm(&b.series.ramification()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_poly, rat};

    #[test]
    fn sigma_of_g5() {
        let p = parse_poly("x + 3*y^2").unwrap();
        let set = newton_puiseux(&p, Orientation::XofY, &int(12)).unwrap();
        assert_eq!(set.real.len(), 2);
        for b in &set.real {
            assert_eq!(b.series, PuiseuxSeries::monomial_int(-3, 2));
            assert!(!b.truncated);
        }
    }

    #[test]
    fn cusp_ramification() {
        let p = parse_poly("x^2 - y^3").unwrap();
        let set = newton_puiseux(&p, Orientation::XofY, &int(6)).unwrap();
        // y = t gives x = +-t^(3/2); y = -t gives nothing real
        assert_eq!(set.real.len(), 2);
        assert_eq!(set.nonreal, 2);
        for b in &set.real {
            assert_eq!(b.sign, 1);
            assert_eq!(b.leading_exponent(), Some(rat(3, 2)));
        }
        assert_eq!(ramification(&set), BigInt::from(2));
    }

    #[test]
    fn double_line() {
        let p = parse_poly("y^2").unwrap();
        let set = newton_puiseux(&p, Orientation::YofX, &int(6)).unwrap();
        assert_eq!(set.real.len(), 2);
        assert!(set.real.iter().all(|b| b.multiplicity == 2 && b.series.is_zero() && !b.truncated));
    }

    #[test]
    fn irrational_branch_goes_float() {
        let p = parse_poly("y^2 - 2*x^2 - x^3").unwrap();
        let set = newton_puiseux(&p, Orientation::YofX, &int(5)).unwrap();
        assert_eq!(set.real.len(), 4);
        for b in &set.real {
            assert!(b.precision_loss);
            let r = residual(&p, b, &int(5));
            assert!(r.is_zero(), "{r}");
        }
    }

    #[test]
    fn half_branches_once() {
        let p = parse_poly("x*y").unwrap();
        let set = curve_half_branches(&p, &int(6)).unwrap();
        assert_eq!(set.real.len(), 4);
    }
}
