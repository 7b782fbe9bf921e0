//! Corank, 2-jet orbits and the prenormal form `(x, F2, F3, F4)`.

use num_traits::{One, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::{Axis, MapGerm, NumericMap, Order, Poly2, Rational};
use crate::linalg;

/// The four 2-jet orbits of corank-1 germs, plus everything else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum JetOrbit {
    /// `(x, y^2, xy, 0)`
    Crosscap,
    /// `(x, y^2, 0, 0)`
    Parabolic,
    /// `(x, xy, 0, 0)`
    Shear,
    /// `(x, 0, 0, 0)`
    Degenerate,
    NotCorank1,
}

impl std::fmt::Display for JetOrbit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            JetOrbit::Crosscap => "CROSSCAP",
            JetOrbit::Parabolic => "PARABOLIC",
            JetOrbit::Shear => "SHEAR",
            JetOrbit::Degenerate => "DEGENERATE",
            JetOrbit::NotCorank1 => "NOT_CORANK1",
        };
        f.write_str(s)
    }
}

/// Linear parts at the origin: rows are components, columns `d/dx`, `d/dy`.
pub fn differential(m: &MapGerm) -> Vec<Vec<Rational>> {
    m.components()
        .iter()
        .map(|c| vec![c.coeff(1, 0), c.coeff(0, 1)])
        .collect()
}

pub fn corank(m: &MapGerm) -> u32 {
    2 - linalg::rank(&differential(m)) as u32
}

fn permutation_to_front(k: usize) -> [[Rational; 4]; 4] {
    let order: Vec<usize> = std::iter::once(k).chain((0..4).filter(|&i| i != k)).collect();
    std::array::from_fn(|r| std::array::from_fn(|c| if order[r] == c { Rational::one() } else { Rational::zero() }))
}

/// Moves a slot with nonzero linear part to the front and makes its linear part `x`.
fn linear_front(m: &MapGerm) -> Option<([[Rational; 4]; 4], [[Rational; 2]; 2], MapGerm)> {
    let k = (0..4).find(|&k| {
        let c = m.component(k);
        !c.coeff(1, 0).is_zero() || !c.coeff(0, 1).is_zero()
    })?;
    let perm = permutation_to_front(k);
    let g = m.apply_target_linear(&perm);
    let (a, b) = (g.component(0).coeff(1, 0), g.component(0).coeff(0, 1));
    let z = Rational::zero();
    let src = if !a.is_zero() {
        [[a.recip(), -(&b / &a)], [z.clone(), Rational::one()]]
    } else {
        [[z.clone(), Rational::one()], [b.recip(), z]]
    };
    let g = g.apply_source_linear(&src);
    Some((perm, src, g))
}

/// Classifies the 2-jet up to linear source and target changes.
pub fn classify_2jet(m: &MapGerm) -> JetOrbit {
    if corank(m) != 1 {
        return JetOrbit::NotCorank1;
    }
    let (_, _, g) = linear_front(m).expect("corank 1 has a linear part");
    // The remaining linear parts are multiples of x; z_i - l_i z_1 removes them, and
    // z_i - a_i z_1^2 removes x^2. Neither touches the xy and y^2 coefficients, except
    // through the quadratic part of slot 1 scaled by l_i.
    let front = g.component(0);
    let w: Vec<Vec<Rational>> = (1..4)
        .map(|i| {
            let c = g.component(i);
            let l = c.coeff(1, 0);
            vec![
                c.coeff(1, 1) - &l * front.coeff(1, 1),
                c.coeff(0, 2) - &l * front.coeff(0, 2),
            ]
        })
        .collect();
    match linalg::rank(&w) {
        2 => JetOrbit::Crosscap,
        1 if w.iter().any(|v| !v[1].is_zero()) => JetOrbit::Parabolic,
        1 => JetOrbit::Shear,
        _ => JetOrbit::Degenerate,
    }
}

/// One recorded step of the normalization.
#[derive(Clone, Debug, PartialEq)]
pub enum CoordinateChange {
    /// `z <- a z`.
    TargetLinear([[Rational; 4]; 4]),
    /// `(x, y) <- b (x, y)`.
    SourceLinear([[Rational; 2]; 2]),
    /// `(x, y) <- (sx(x, y), sy(x, y))`, truncated.
    SourceSubstitution { x: Poly2, y: Poly2 },
    /// `z_slot <- z_slot - by(z_1)`, where `by` is a polynomial in `x` read as `z_1`.
    TargetShift { slot: usize, by: Poly2 },
}

fn matrix_strings<const R: usize, const C: usize>(m: &[[Rational; C]; R]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect()
}

impl Serialize for CoordinateChange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        match self {
            CoordinateChange::TargetLinear(a) => {
                map.serialize_entry("kind", "target_linear")?;
                map.serialize_entry("matrix", &matrix_strings(a))?;
            }
            CoordinateChange::SourceLinear(b) => {
                map.serialize_entry("kind", "source_linear")?;
                map.serialize_entry("matrix", &matrix_strings(b))?;
            }
            CoordinateChange::SourceSubstitution { x, y } => {
                map.serialize_entry("kind", "source_substitution")?;
                map.serialize_entry("x", &x.to_string())?;
                map.serialize_entry("y", &y.to_string())?;
            }
            CoordinateChange::TargetShift { slot, by } => {
                map.serialize_entry("kind", "target_shift")?;
                map.serialize_entry("slot", &(slot + 1))?;
                map.serialize_entry("by", &by.to_string().replace('x', "z1"))?;
            }
        }
        map.end()
    }
}

/// A truncated map `(x, F2, F3, F4)` with `F_i(x, 0) = 0` and `p < q <= r`.
#[derive(Clone, Debug)]
pub struct PrenormalForm {
    pub series: [Poly2; 4],
    pub degree: u32,
    pub changes: Vec<CoordinateChange>,
    /// `(p, q, r)`: orders of slots 2, 3, 4 on the y-axis.
    pub orders: [Order; 3],
    pub corank: u32,
    /// Linear part of the total target change: new coordinates are `target_linear * old`.
    pub target_linear: [[Rational; 4]; 4],
    /// True when no term was dropped, so the slots equal the transformed germ exactly.
    pub exact: bool,
    pub notices: Vec<String>,
}

impl PrenormalForm {
    pub fn p(&self) -> u32 {
        self.orders[0].finite().expect("p is finite by construction")
    }

    pub fn q(&self) -> Order {
        self.orders[1]
    }

    pub fn r(&self) -> Order {
        self.orders[2]
    }

    pub fn slot(&self, k: usize) -> &Poly2 {
        &self.series[k]
    }

    pub fn numeric(&self) -> NumericMap {
        MapGerm::new(self.series.clone())
            .expect("prenormal slots vanish at 0")
            .numeric()
    }

    pub fn as_germ(&self) -> MapGerm {
        MapGerm::new(self.series.clone()).expect("prenormal slots vanish at 0")
    }
}

/// Applies recorded changes to `m`, truncating at total degree `n`.
pub fn replay(m: &MapGerm, changes: &[CoordinateChange], n: u32) -> [Poly2; 4] {
    let mut comps: [Poly2; 4] = m.components().clone().map(|c| c.truncate(n));
    for ch in changes {
        comps = match ch {
            CoordinateChange::TargetLinear(a) => {
                let g = MapGerm::new(comps.clone()).expect("based at 0");
                g.apply_target_linear(a).components().clone()
            }
            CoordinateChange::SourceLinear(b) => {
                let g = MapGerm::new(comps.clone()).expect("based at 0");
                g.apply_source_linear(b).components().clone().map(|c| c.truncate(n))
            }
            CoordinateChange::SourceSubstitution { x, y } => comps.map(|c| c.substitute(x, y, Some(n))),
            CoordinateChange::TargetShift { slot, by } => {
                let shift = by.substitute(&comps[0], &Poly2::zero(), Some(n));
                let mut out = comps.clone();
                out[*slot] = &out[*slot] - &shift;
                out
            }
        };
    }
    comps
}

fn identity4() -> [[Rational; 4]; 4] {
    linalg::to_array4(&linalg::identity(4))
}

fn mul4(a: &[[Rational; 4]; 4], b: &[[Rational; 4]; 4]) -> [[Rational; 4]; 4] {
    let av: Vec<Vec<Rational>> = a.iter().map(|r| r.to_vec()).collect();
    let bv: Vec<Vec<Rational>> = b.iter().map(|r| r.to_vec()).collect();
    linalg::to_array4(&linalg::matmul(&av, &bv))
}

fn leading_y_coeff(p: &Poly2) -> Option<(u32, Rational)> {
    p.restrict_to_axis(Axis::Y).into_iter().min_by_key(|(m, _)| *m)
}

/// Brings a corank <= 1 germ to the form `(x, F2, F3, F4)` modulo degree `n`.
pub fn prenormalize(m: &MapGerm, n: u32) -> Result<PrenormalForm> {
    let cr = corank(m);
    if cr == 2 {
        return Err(Error::Precondition("prenormal form needs corank at most 1".into()));
    }
    let mut changes = Vec::new();
    let mut notices = Vec::new();
    let (perm, src, g) = linear_front(m).expect("corank < 2 has a linear part");
    changes.push(CoordinateChange::TargetLinear(perm.clone()));
    changes.push(CoordinateChange::SourceLinear(src));
    let mut total = perm;

    let mut comps: [Poly2; 4] = g.components().clone().map(|c| c.truncate(n));
    let h = &comps[0] - &Poly2::x();
    if !h.is_zero() {
        let (xx, yy) = (Poly2::x(), Poly2::y());
        let mut phi = xx.clone();
        for _ in 0..=n {
            let next = &xx - &h.substitute(&phi, &yy, Some(n));
            if next == phi {
                break;
            }
            phi = next;
        }
        comps = comps.map(|c| c.substitute(&phi, &yy, Some(n)));
        changes.push(CoordinateChange::SourceSubstitution { x: phi, y: yy });
    }
    debug_assert_eq!(comps[0], Poly2::x());

    let mut shift_lin = identity4();
    for i in 1..4 {
        let by = Poly2::from_terms(
            comps[i]
                .restrict_to_axis(Axis::X)
                .into_iter()
                .map(|(k, c)| ((k, 0), c)),
        );
        if by.is_zero() {
            continue;
        }
        shift_lin[i][0] = -by.coeff(1, 0);
        comps[i] = &comps[i] - &by;
        changes.push(CoordinateChange::TargetShift { slot: i, by });
    }
    total = mul4(&shift_lin, &total);

    let mut rounds = 0;
    loop {
        let mut idx = [1usize, 2, 3];
        idx.sort_by_key(|&i| (comps[i].order_along_axis(Axis::Y), i));
        if idx != [1, 2, 3] {
            let mut p = identity4();
            for (dst, &srcslot) in idx.iter().enumerate() {
                for c in 0..4 {
                    p[dst + 1][c] = if c == srcslot { Rational::one() } else { Rational::zero() };
                }
            }
            let old = comps.clone();
            for (dst, &srcslot) in idx.iter().enumerate() {
                comps[dst + 1] = old[srcslot].clone();
            }
            changes.push(CoordinateChange::TargetLinear(p.clone()));
            total = mul4(&p, &total);
        }
        let o2 = comps[1].order_along_axis(Axis::Y);
        let o3 = comps[2].order_along_axis(Axis::Y);
        if !(o2.is_finite() && o2 == o3) || rounds >= 5 {
            if o2.is_finite() && o2 == o3 {
                notices.push("coincident orders p = q could not be separated".into());
            }
            break;
        }
        // p == q: cancel the leading y^p term of slot 3 against slot 2.
        let (_, a) = leading_y_coeff(&comps[1]).expect("finite order");
        let (_, b) = leading_y_coeff(&comps[2]).expect("finite order");
        let lam = &b / &a;
        let mut mix = identity4();
        mix[2][1] = -lam.clone();
        comps[2] = &comps[2] - &comps[1].scale(&lam);
        changes.push(CoordinateChange::TargetLinear(mix.clone()));
        total = mul4(&mix, &total);
        notices.push(format!("slot 3 mixed with slot 2 by factor {lam} to separate p < q"));
        rounds += 1;
    }

    let orders = [1, 2, 3].map(|i| comps[i].order_along_axis(Axis::Y));
    let exact = m.degree() <= n && !changes.iter().any(|c| matches!(c, CoordinateChange::SourceSubstitution { .. }));
    match orders[0] {
        Order::Infinite if exact => {
            return Err(Error::Degenerate("F(0, y) vanishes identically; no finite order p".into()))
        }
        Order::Infinite => {
            return Err(Error::Truncation(format!(
                "F(0, y) vanishes modulo degree {n}; order p is at least {n}"
            )))
        }
        Order::Finite(p) if p >= n => {
            return Err(Error::Truncation(format!("order p = {p} is not below the truncation degree {n}")))
        }
        _ => {}
    }
    Ok(PrenormalForm {
        series: comps,
        degree: n,
        changes,
        orders,
        corank: cr,
        target_linear: total,
        exact,
        notices,
    })
}

/// Orders of the shear normal form `(x, xy + P1, Q, R)` on the y-axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShearOrders {
    /// Slot (1-based, in prenormal order) carrying the `xy` term.
    pub p_slot: usize,
    pub p: Order,
    pub q: Order,
    pub r: Order,
    /// True when `ord P < ord Q` and `ord P < ord R`.
    pub violates_claim1: bool,
}

/// Rewrites a shear-orbit prenormal form as `(x, xy + P1, Q, R)` and compares orders.
pub fn shear_orders(f: &PrenormalForm) -> Result<ShearOrders> {
    let k = (1..4)
        .find(|&i| !f.series[i].coeff(1, 1).is_zero())
        .ok_or_else(|| Error::Shape("no slot carries an xy term".into()))?;
    if (1..4).any(|i| !f.series[i].coeff(0, 2).is_zero()) {
        return Err(Error::Shape("a y^2 term is present: not the shear orbit".into()));
    }
    let c = f.series[k].coeff(1, 1);
    let p_poly = f.series[k].scale(&c.recip());
    let others: Vec<Poly2> = (1..4)
        .filter(|&i| i != k)
        .map(|i| &f.series[i] - &p_poly.scale(&f.series[i].coeff(1, 1)))
        .collect();
    let p = p_poly.order_along_axis(Axis::Y);
    let mut qr = [others[0].order_along_axis(Axis::Y), others[1].order_along_axis(Axis::Y)];
    qr.sort();
    Ok(ShearOrders {
        p_slot: k + 1,
        p,
        q: qr[0],
        r: qr[1],
        violates_claim1: p.is_finite() && p < qr[0] && p < qr[1],
    })
}

/// Random invertible rational matrices for invariance testing.
pub fn random_invertible<R: rand::Rng, const D: usize>(rng: &mut R) -> [[Rational; D]; D] {
    loop {
        let m: [[Rational; D]; D] =
            std::array::from_fn(|_| std::array::from_fn(|_| Rational::new(rng.gen_range(-5..=5).into(), rng.gen_range(1..=4).into())));
        let rows: Vec<Vec<Rational>> = m.iter().map(|r| r.to_vec()).collect();
        if linalg::rank(&rows) == D {
            return m;
        }
    }
}

/// Canonical representative of an orbit.
pub fn orbit_representative(o: JetOrbit) -> Option<MapGerm> {
    let text = match o {
        JetOrbit::Crosscap => "x, y^2, x*y, 0",
        JetOrbit::Parabolic => "x, y^2, 0, 0",
        JetOrbit::Shear => "x, x*y, 0, 0",
        JetOrbit::Degenerate => "x, 0, 0, 0",
        JetOrbit::NotCorank1 => return None,
    };
    Some(crate::expr::parse_map(text).expect("valid literal"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn corank_examples() {
        assert_eq!(corank(&parse_map("x, y, 0, 0").unwrap()), 0);
        assert_eq!(corank(&parse_map("x, y^2, x*y, 0").unwrap()), 1);
        let g6 = parse_map("x^2 - y^2, 2*x*y, x^3 - 3*x*y^2, 3*x^2*y - y^3").unwrap();
        assert_eq!(corank(&g6), 2);
    }

    #[test]
    fn orbit_examples() {
        let c = |s: &str| classify_2jet(&parse_map(s).unwrap());
        assert_eq!(c("x, y^2, x*y, 0"), JetOrbit::Crosscap);
        assert_eq!(c("x, x*y + y^3, y^5, 0"), JetOrbit::Shear);
        assert_eq!(c("x + y^2, 3*y^2 + x*y, 0, 0"), JetOrbit::Parabolic);
        assert_eq!(c("x, x^2, 0, 0"), JetOrbit::Degenerate);
        assert_eq!(c("x, y, 0, 0"), JetOrbit::NotCorank1);
    }

    #[test]
    fn prenormal_examples() {
        let f = prenormalize(&parse_map("x, x*y, y^3, 0").unwrap(), 8).unwrap();
        assert_eq!(f.orders, [Order::Finite(3), Order::Infinite, Order::Infinite]);
        assert_eq!(f.series[1], Poly2::from_int_terms(&[(1, 0, 3)]));

        let f = prenormalize(&parse_map("x, y^2, x*y, 0").unwrap(), 8).unwrap();
        assert_eq!(f.orders, [Order::Finite(2), Order::Infinite, Order::Infinite]);

        let m = parse_map("x + x^2, y^2, 0, 0").unwrap();
        let f = prenormalize(&m, 8).unwrap();
        assert_eq!(f.series[0], Poly2::x());
        assert_eq!(f.p(), 2);
        assert_eq!(replay(&m, &f.changes, 8), f.series);
    }

    #[test]
    fn ties_are_separated() {
        let m = parse_map("x, x*y + y^3, 2*y^3 + y^5, 0").unwrap();
        let f = prenormalize(&m, 10).unwrap();
        assert_eq!(f.orders, [Order::Finite(3), Order::Finite(5), Order::Infinite]);
        assert_eq!(replay(&m, &f.changes, 10), f.series);
    }

    #[test]
    fn degenerate_and_corank_two() {
        assert!(matches!(prenormalize(&parse_map("x, 0, 0, 0").unwrap(), 8), Err(Error::Degenerate(_))));
        let g6 = parse_map("x^2 - y^2, 2*x*y, x^3 - 3*x*y^2, 3*x^2*y - y^3").unwrap();
        assert!(prenormalize(&g6, 8).is_err());
    }

    #[test]
    fn claim1_orders() {
        let f = prenormalize(&parse_map("x, x*y + y^3, y^5, 0").unwrap(), 12).unwrap();
        let s = shear_orders(&f).unwrap();
        assert!(s.violates_claim1);
        let f = prenormalize(&parse_map("x, x*y, y^3, 0").unwrap(), 12).unwrap();
        assert!(!shear_orders(&f).unwrap().violates_claim1);
    }
}
