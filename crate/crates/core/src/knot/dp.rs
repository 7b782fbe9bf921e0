//! Double points of the projected surface: divided differences and their certification.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::expr::{to_f64, Poly2, Rational};

/// Polynomial with exact coefficients in `(x, y, u)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly3 {
    terms: BTreeMap<[u32; 3], Rational>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(c: Rational, e: [u32; 3]) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn add_term(&mut self, e: [u32; 3], c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `p(x, y)` read in the variables `(x, y)` or `(x, u)`.
    pub fn from_poly2(p: &Poly2, second_is_u: bool) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in p.terms() {
            let e = if second_is_u { [i, 0, j] } else { [i, j, 0] };
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * k);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term([a[0] + b[0], a[1] + b[1], a[2] + b[2]], ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::monomial(Rational::one(), [0, 0, 0]);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Degree in the variable `var` (0 = x, 1 = y, 2 = u).
    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    /// Coefficient of `x^k` as a polynomial in `(y, u)`.
    pub fn x_coefficient(&self, k: u32) -> Poly3 {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[0] == k {
                out.add_term([0, e[1], e[2]], c.clone());
            }
        }
        out
    }

    /// Replaces `x` by a polynomial.
    pub fn substitute_x(&self, sx: &Poly3) -> Poly3 {
        let mut out = Self::zero();
        let mut cache: BTreeMap<u32, Poly3> = BTreeMap::new();
        for (e, c) in &self.terms {
            let px = cache.entry(e[0]).or_insert_with(|| sx.pow(e[0])).clone();
            out = out.add(&px.mul(&Self::monomial(c.clone(), [0, e[1], e[2]])));
        }
        out
    }

    /// Exchanges `y` and `u`.
    pub fn swap_yu(&self) -> Poly3 {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term([e[0], e[2], e[1]], c.clone());
        }
        out
    }

    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn homogeneous_part(&self, d: u32) -> Poly3 {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() == d {
                out.add_term(*e, c.clone());
            }
        }
        out
    }

    pub fn eval(&self, v: &[Rational; 3]) -> Rational {
        let mut s = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..3 {
                for _ in 0..e[k] {
                    t *= &v[k];
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_f64(&self, v: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| to_f64(c) * v[0].powi(e[0] as i32) * v[1].powi(e[1] as i32) * v[2].powi(e[2] as i32))
            .sum()
    }

    pub fn gradient_f64(&self, v: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (e, c) in &self.terms {
            let c = to_f64(c);
            for k in 0..3 {
                if e[k] == 0 {
                    continue;
                }
                let mut t = c * e[k] as f64;
                for m in 0..3 {
                    let p = if m == k { e[m] - 1 } else { e[m] };
                    t *= v[m].powi(p as i32);
                }
                g[k] += t;
            }
        }
        g
    }
}

impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["x", "y", "u"];
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono: Vec<String> = (0..3)
                .filter(|&m| e[m] > 0)
                .map(|m| if e[m] == 1 { names[m].to_string() } else { format!("{}^{}", names[m], e[m]) })
                .collect();
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{a}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for Poly3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `(p(x, u) - p(x, y)) / (u - y)`, expanded monomial by monomial.
pub fn divided_difference(p: &Poly2) -> Poly3 {
    let mut out = Poly3::zero();
    for (&(i, j), c) in p.terms() {
        for a in 0..j {
            out.add_term([i, a, j - 1 - a], c.clone());
        }
    }
    out
}

/// `H_d(y, u) = y^d + y^(d-1) u + ... + u^d`.
pub fn complete_form(d: u32) -> Poly3 {
    let mut out = Poly3::zero();
    for a in 0..=d {
        out.add_term([0, a, d - a], Rational::one());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublePointSystem {
    pub dp: [Poly3; 2],
    /// `q - 1`, with `q` the order of the third projected slot along the y-axis.
    pub initial_form_degree: Option<u32>,
}

impl DoublePointSystem {
    pub fn from_slots(p: &Poly2, q: &Poly2) -> Self {
        let ord = q.order_along_axis(crate::expr::Axis::Y).finite();
        Self {
            dp: [divided_difference(p), divided_difference(q)],
            initial_form_degree: ord.map(|q| q.saturating_sub(1)),
        }
    }

    pub fn eval_f64(&self, v: [f64; 3]) -> [f64; 2] {
        [self.dp[0].eval_f64(v), self.dp[1].eval_f64(v)]
    }
}

/// Eliminates `x` from the system when one equation is `c x + b(y, u)` with `c` constant.
pub fn eliminate_x(sys: &DoublePointSystem) -> Option<Poly3> {
    for (k, eq) in sys.dp.iter().enumerate() {
        if eq.degree_in(0) != 1 {
            continue;
        }
        let c = eq.x_coefficient(1);
        let Some((e, c0)) = c.terms().next() else { continue };
        if c.terms().count() != 1 || *e != [0, 0, 0] {
            continue;
        }
        let sx = eq.x_coefficient(0).scale(&-(Rational::one() / c0));
        return Some(sys.dp[1 - k].substitute_x(&sx));
    }
    None
}

/// Minimum of `|h|` on the unit circle, with padding for the sampling step; `None` when
/// the form is not certified definite.
pub fn definite_margin(h: &Poly3, samples: usize) -> Option<f64> {
    let d = h.lowest_degree()?;
    if d % 2 == 1 {
        return None;
    }
    let step = std::f64::consts::TAU / samples as f64;
    let mut min = f64::INFINITY;
    let mut sign = 0.0;
    for k in 0..samples {
        let th = step * k as f64;
        let v = h.eval_f64([0.0, th.cos(), th.sin()]);
        if sign == 0.0 {
            sign = v.signum();
        }
        if v * sign <= 0.0 {
            return None;
        }
        min = min.min(v.abs());
    }
    // |dh/dtheta| <= d * sum |c| on the unit circle
    let lip = d as f64 * h.terms().map(|(_, c)| to_f64(c).abs()).sum::<f64>();
    let margin = min - lip * step / 2.0;
    (margin > 0.0).then_some(margin)
}

/// Radius of a ball in `(y, u)` without solutions of the eliminated equation other than
/// the origin, when the initial form is definite.
pub fn certification_radius(sys: &DoublePointSystem) -> Option<f64> {
    let d = sys.initial_form_degree?;
    if d % 2 == 1 {
        return None;
    }
    let g = eliminate_x(sys)?;
    if g.lowest_degree()? != d {
        return None;
    }
    let margin = definite_margin(&g.homogeneous_part(d), 1024)?;
    let top = g.terms().map(|(e, _)| e.iter().sum::<u32>()).max().unwrap_or(d);
    let bounds: Vec<(i32, f64)> = (d + 1..=top)
        .map(|k| {
            let s: f64 = g.homogeneous_part(k).terms().map(|(_, c)| to_f64(c).abs()).sum();
            ((k - d) as i32, s)
        })
        .collect();
    // |tail(r)| <= sum_k C_k r^k and |y|^a |u|^b <= r^(a+b) on the circle of radius r
    let excess = |rho: f64| bounds.iter().map(|&(e, s)| s * rho.powi(e)).sum::<f64>();
    let mut rho = 1.0f64;
    while excess(rho) >= margin / 2.0 {
        rho /= 2.0;
        if rho < 1e-12 {
            return None;
        }
    }
    Some(rho)
}

/// True only when no double point other than the origin exists in a verified ball.
pub fn certify_no_double_points(sys: &DoublePointSystem) -> bool {
    certification_radius(sys).is_some()
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for r in 0..3 {
            mk[r][k] = b[r];
        }
        *o = det(&mk) / d;
    }
    Some(out)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DoublePointSearch {
    /// Solutions `(x, y, u)` with `y < u`.
    pub points: Vec<[f64; 3]>,
    pub starts: usize,
    pub non_converged: usize,
}

/// Damped Newton from a spread of starts on the sphere `|(x, y, u)| = ball`.
pub fn find_double_points(sys: &DoublePointSystem, ball: f64) -> DoublePointSearch {
    let starts = 400;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut out = DoublePointSearch {
        starts,
        ..Default::default()
    };
    let scale = |v: [f64; 3]| {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        r.max(1e-300)
    };
    for k in 0..starts {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / starts as f64;
        let s = (1.0 - z * z).sqrt();
        let th = golden * k as f64;
        let mut v = [ball * z, ball * s * th.cos(), ball * s * th.sin()];
        let mut converged = false;
        for _ in 0..60 {
            let f = sys.eval_f64(v);
            let sph = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - ball * ball;
            let res = [f[0], f[1], sph];
            let norm = res.iter().map(|r| r * r).sum::<f64>().sqrt();
            if norm < 1e-13 * ball.max(1e-3) {
                converged = true;
                break;
            }
            let g0 = sys.dp[0].gradient_f64(v);
            let g1 = sys.dp[1].gradient_f64(v);
            let j = [g0, g1, [2.0 * v[0], 2.0 * v[1], 2.0 * v[2]]];
            let Some(step) = solve3(j, res) else { break };
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-4 {
                let w = [v[0] - t * step[0], v[1] - t * step[1], v[2] - t * step[2]];
                let fw = sys.eval_f64(w);
                let sw = w[0] * w[0] + w[1] * w[1] + w[2] * w[2] - ball * ball;
                let nw = (fw[0] * fw[0] + fw[1] * fw[1] + sw * sw).sqrt();
                if nw < norm {
                    v = w;
                    accepted = true;
                    break;
                }
                t /= 2.0;
            }
            if !accepted {
                break;
            }
        }
        if !converged {
            out.non_converged += 1;
            continue;
        }
        // Degenerate roots on the diagonal converge slowly and land just off it.
        if (v[1] - v[2]).abs() <= 1e-4 * scale(v) {
            continue;
        }
        let p = if v[1] < v[2] { v } else { [v[0], v[2], v[1]] };
        if !out
            .points
            .iter()
            .any(|q| (0..3).all(|i| (q[i] - p[i]).abs() <= 1e-6 * ball))
        {
            out.points.push(p);
        }
    }
    out.points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn divided_difference_examples() {
        let m = parse_map("x, x*y + y^3, y^5, 0").unwrap();
        let sys = DoublePointSystem::from_slots(m.component(1), m.component(2));
        let want = Poly3::monomial(Rational::one(), [1, 0, 0]).add(&complete_form(2));
        assert_eq!(sys.dp[0], want);
        assert_eq!(sys.dp[1], complete_form(4));
        assert_eq!(sys.initial_form_degree, Some(4));
        let y2 = Poly2::from_int_terms(&[(1, 0, 2)]);
        assert_eq!(divided_difference(&y2).to_string(), "u + y");
    }

    #[test]
    fn certification() {
        let m = parse_map("x, x*y, y^3, 0").unwrap();
        let sys = DoublePointSystem::from_slots(m.component(1), m.component(2));
        assert!(certify_no_double_points(&sys));
        assert!(find_double_points(&sys, 0.1).points.is_empty());

        let odd = parse_map("x, x*y, y^4, 0").unwrap();
        let sys = DoublePointSystem::from_slots(odd.component(1), odd.component(2));
        assert!(!certify_no_double_points(&sys));
    }

    #[test]
    fn solver_finds_constructed_roots() {
        // x = 0, y u = r^2 / 4 has solutions on the sphere of radius r
        let r = 0.1;
        let sys = DoublePointSystem {
            dp: [
                Poly3::monomial(Rational::one(), [1, 0, 0]),
                Poly3::monomial(Rational::one(), [0, 1, 1]).add(&Poly3::monomial(
                    crate::expr::rat(-1, 400),
                    [0, 0, 0],
                )),
            ],
            initial_form_degree: None,
        };
        let found = find_double_points(&sys, r);
        assert!(!found.points.is_empty());
        for p in &found.points {
            assert!(p[0].abs() < 1e-9 && (p[1] * p[2] - r * r / 4.0).abs() < 1e-9);
        }
    }
}
