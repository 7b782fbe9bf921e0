//! Exact bivariate polynomials, map germs and the germ file format.

mod parse;
mod poly;

use std::fmt;

use num_traits::Zero;

pub use parse::parse_poly;
pub use poly::{int, rat, to_f64, Axis, Order, Poly2, Rational};
pub(crate) use poly::pow_rat;

use crate::error::{Error, Result};
use crate::puiseux::PuiseuxSeries;

/// A polynomial map germ `F: (R^2,0) -> (R^4,0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MapGerm {
    components: [Poly2; 4],
}

impl MapGerm {
    pub fn new(components: [Poly2; 4]) -> Result<Self> {
        for (k, c) in components.iter().enumerate() {
            if !c.constant_term().is_zero() {
                return Err(Error::NotBasedAtOrigin(k + 1));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Poly2; 4] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &Poly2 {
        &self.components[k]
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().filter_map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn numeric(&self) -> NumericMap {
        NumericMap {
            comps: [0, 1, 2, 3].map(|k| self.components[k].to_f64_terms()),
        }
    }

    /// Applies a linear target change `z <- a z`.
    pub fn apply_target_linear(&self, a: &[[Rational; 4]; 4]) -> MapGerm {
        let components = [0, 1, 2, 3].map(|r| {
            let mut acc = Poly2::zero();
            for c in 0..4 {
                acc = &acc + &self.components[c].scale(&a[r][c]);
            }
            acc
        });
        MapGerm { components }
    }

    /// Applies a linear source change `(x, y) <- b (x, y)`.
    pub fn apply_source_linear(&self, b: &[[Rational; 2]; 2]) -> MapGerm {
        let sx = &Poly2::x().scale(&b[0][0]) + &Poly2::y().scale(&b[0][1]);
        let sy = &Poly2::x().scale(&b[1][0]) + &Poly2::y().scale(&b[1][1]);
        let components = [0, 1, 2, 3].map(|k| self.components[k].substitute(&sx, &sy, None));
        MapGerm { components }
    }
}

impl fmt::Display for MapGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Parses `"c1, c2, c3, c4"` into a germ.
pub fn parse_map(text: &str) -> Result<MapGerm> {
    let comps = parse::parse_components(text)?;
    if comps.len() != 4 {
        return Err(Error::Syntax {
            pos: text.len(),
            msg: format!("expected 4 components, found {}", comps.len()),
        });
    }
    let arr: [Poly2; 4] = comps.try_into().expect("length checked");
    MapGerm::new(arr)
}

/// Parses a germ file: `# comment` lines, blank lines, and exactly one `map: ...` line.
pub fn parse_germ_file(text: &str) -> Result<MapGerm> {
    let mut found: Option<MapGerm> = None;
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let Some(rest) = t.strip_prefix("map:") else {
            return Err(Error::Input(format!("line {}: expected `map:` or a `#` comment", lineno + 1)));
        };
        if found.is_some() {
            return Err(Error::Input(format!("line {}: more than one map", lineno + 1)));
        }
        found = Some(parse_map(rest)?);
    }
    found.ok_or_else(|| Error::Input("no `map:` line".into()))
}

pub fn to_germ_file(m: &MapGerm, comment: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s.push_str(&format!("map: {m}\n"));
    s
}

/// Substitutes series `(x(t), y(t))` into `p`, exact modulo `t^n`.
pub fn compose_truncated(p: &Poly2, subst: (&PuiseuxSeries, &PuiseuxSeries), n: u32) -> PuiseuxSeries {
    let limit = int(n as i64);
    let (sx, sy) = subst;
    let mut acc = PuiseuxSeries::zero();
    for (&(i, j), c) in p.terms() {
        let term = sx
            .pow_u32(i, &limit)
            .mul(&sy.pow_u32(j, &limit), &limit)
            .scale_rat(c);
        acc = acc.add(&term);
    }
    acc.cap(&limit)
}

/// Serializes a rational as its `p/q` string.
pub fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn ser_opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl serde::Serialize for Poly2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl serde::Serialize for MapGerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Float evaluation of a germ and its Jacobian.
#[derive(Clone, Debug)]
pub struct NumericMap {
    comps: [Vec<(i32, i32, f64)>; 4],
}

impl NumericMap {
    pub fn eval(&self, x: f64, y: f64) -> [f64; 4] {
        self.comps.each_ref().map(|c| {
            c.iter()
                .map(|&(i, j, a)| a * x.powi(i) * y.powi(j))
                .sum()
        })
    }

    /// Rows are components, columns are `d/dx`, `d/dy`.
    pub fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 4] {
        self.comps.each_ref().map(|c| {
            let mut dx = 0.0;
            let mut dy = 0.0;
            for &(i, j, a) in c {
                if i > 0 {
                    dx += a * i as f64 * x.powi(i - 1) * y.powi(j);
                }
                if j > 0 {
                    dy += a * j as f64 * x.powi(i) * y.powi(j - 1);
                }
            }
            [dx, dy]
        })
    }
}

pub fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dist4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}
