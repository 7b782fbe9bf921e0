use num_traits::{One, Signed};

use super::series::{Coeff, PuiseuxSeries};
use crate::error::{Error, Result};
use crate::expr::{int, Rational};

/// A real arc germ `t -> gamma(t)` in R^4.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ArcGerm {
    pub coords: [PuiseuxSeries; 4],
    /// True when the parameter is the distance to the origin to leading order.
    pub normalized: bool,
}

impl ArcGerm {
    pub fn new(coords: [PuiseuxSeries; 4]) -> Self {
        Self {
            coords,
            normalized: false,
        }
    }

    pub fn from_monomials(data: [(i64, i64); 4]) -> Self {
        Self::new(data.map(|(c, e)| {
            if c == 0 {
                PuiseuxSeries::zero()
            } else {
                PuiseuxSeries::monomial_int(c, e)
            }
        }))
    }

    /// Smallest leading exponent over the coordinates.
    pub fn valuation(&self) -> Option<Rational> {
        self.coords.iter().filter_map(|c| c.valuation()).min()
    }

    pub fn truncation(&self) -> Option<Rational> {
        self.coords.iter().filter_map(|c| c.truncation().cloned()).min()
    }

    pub fn eval(&self, t: f64) -> [f64; 4] {
        self.coords.each_ref().map(|c| c.eval(t))
    }

    /// Unit tangent direction: the coefficients at the leading exponent.
    pub fn tangent(&self) -> Option<[f64; 4]> {
        let v = self.valuation()?;
        let d = self.coords.each_ref().map(|c| c.coeff_at(&v).to_f64());
        Some(crate::numeric::normalize4(d))
    }

    pub fn has_approx(&self) -> bool {
        self.coords.iter().any(|c| c.has_approx())
    }
}

/// Reparametrizes `a` by the distance to the origin, keeping terms below `s^limit`.
pub fn reparametrize_by_distance(a: &ArcGerm, limit: &Rational) -> Result<ArcGerm> {
    let e = a
        .valuation()
        .filter(|e| e.is_positive())
        .ok_or_else(|| Error::Precondition("arc has no nonzero leading term".into()))?;
    let t_limit = limit * &e;
    let sq_limit = &t_limit + &e;
    let mut norm2 = PuiseuxSeries::zero();
    for c in &a.coords {
        norm2 = norm2.add(&c.mul(c, &sq_limit));
    }
    let norm = norm2.sqrt(&t_limit)?;
    let psi = norm.reverse(&(e.recip() + limit - Rational::one()))?;
    let mut coords = a.coords.clone();
    for c in coords.iter_mut() {
        *c = c.compose(&psi, limit)?;
    }
    Ok(ArcGerm {
        coords,
        normalized: true,
    })
}

/// Leading exponent of `|a(t) - b(t)|` for two distance-parametrized arcs.
pub fn outer_contact_order(a: &ArcGerm, b: &ArcGerm) -> Result<Rational> {
    if !a.normalized || !b.normalized {
        return Err(Error::Precondition("contact order needs distance-parametrized arcs".into()));
    }
    let diffs: Vec<PuiseuxSeries> = (0..4).map(|k| a.coords[k].sub(&b.coords[k])).collect();
    let lead = diffs.iter().filter_map(|d| d.valuation()).min();
    let known = diffs.iter().filter_map(|d| d.truncation().cloned()).min();
    match (lead, known) {
        (None, _) => Err(Error::Indistinguishable),
        (Some(l), Some(t)) if l >= t => Err(Error::Indistinguishable),
        (Some(l), _) => Ok(l),
    }
}

/// Arc `t -> (t, 0, 0, 0)` rotated into the direction `(cos th, sin th)` of the first two axes,
/// plus a higher-order bump in the third coordinate. Used for tests and synthetic fixtures.
pub fn planar_arc(cos: Rational, sin: Rational, bump: Option<(Rational, Rational)>) -> ArcGerm {
    let lin = |c: Rational| PuiseuxSeries::monomial(Coeff::Exact(c), int(1));
    let z3 = match bump {
        Some((c, e)) => PuiseuxSeries::monomial(Coeff::Exact(c), e),
        None => PuiseuxSeries::zero(),
    };
    ArcGerm::new([lin(cos), lin(sin), z3, PuiseuxSeries::zero()])
}
