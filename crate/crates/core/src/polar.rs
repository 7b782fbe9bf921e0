//! Polar curve, discriminant, polar triangles and the width/height comparison.

use std::cmp::Ordering;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{compose_truncated, int, ser_opt_rational, ser_rational, to_f64, Axis, Order, Rational};
use crate::germ::PrenormalForm;
use crate::numeric;
use crate::puiseux::{
    curve_half_branches, outer_contact_order, reparametrize_by_distance, solve_dependent, ArcGerm, Coeff,
    PuiseuxBranch, PuiseuxSeries,
};

/// Exponent bound for distance-parametrized discriminant arcs.
pub const ARC_PRECISION: i64 = 4;

#[derive(Clone, Debug, Serialize)]
pub struct PolarTriangle {
    pub boundary: [ArcGerm; 2],
    #[serde(serialize_with = "ser_rational")]
    pub width: Rational,
    #[serde(serialize_with = "ser_opt_rational")]
    pub height_lower_bound: Option<Rational>,
    pub height_numeric: Option<f64>,
    /// Number of preimages of a generic point of the sector.
    pub fiber_count: u32,
    /// Arc inside the sector used for fiber counting and height measurement.
    pub test_arc: ArcGerm,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarData {
    pub sigma: Vec<PuiseuxBranch>,
    /// Discriminant arcs in the parameter of `sigma`.
    pub delta_raw: Vec<ArcGerm>,
    /// Discriminant arcs parametrized by distance, duplicates removed.
    pub delta: Vec<ArcGerm>,
    pub triangles: Vec<PolarTriangle>,
    pub notices: Vec<String>,
}

/// Critical locus of `(x, y) -> (x, F2(x, y))`: real half-branches of `dF2/dy = 0`.
pub fn polar_curve(f: &PrenormalForm) -> Result<Vec<PuiseuxBranch>> {
    if f.p() % 2 == 0 {
        return Err(Error::Precondition("the tangent cone is a half-plane".into()));
    }
    let d = f.slot(1).partial_derivative(Axis::Y);
    if !d.constant_term().is_zero() {
        return Ok(Vec::new());
    }
    Ok(curve_half_branches(&d, &int(f.degree as i64))?.real)
}

fn image_arc(f: &PrenormalForm, br: &PuiseuxBranch) -> Result<ArcGerm> {
    let (x, y) = br.xy();
    let l = int(ARC_PRECISION);
    let scale = x.valuation().unwrap_or_else(|| int(f.p() as i64));
    let tlim = (&l * &scale).ceil().to_integer();
    let n: u32 = num_traits::ToPrimitive::to_u32(&tlim).unwrap_or(64) + 1;
    let mut z2 = compose_truncated(f.slot(1), (&x, &y), n);
    let mut z1 = x.cap(&int(n as i64));
    if !f.exact {
        let v = [x.valuation(), y.valuation()].into_iter().flatten().min().unwrap_or_else(|| int(1));
        let cap = int(f.degree as i64 + 1) * v;
        z1 = z1.cap(&cap);
        z2 = z2.cap(&cap);
    }
    Ok(ArcGerm::new([z1, z2, PuiseuxSeries::zero(), PuiseuxSeries::zero()]))
}

/// Discriminant arcs `(x, F2)(sigma(t))`: raw, and distance-parametrized without duplicates.
pub fn discriminant_arcs(f: &PrenormalForm, sigma: &[PuiseuxBranch]) -> Result<(Vec<ArcGerm>, Vec<ArcGerm>)> {
    let mut raw = Vec::new();
    let mut normalized: Vec<ArcGerm> = Vec::new();
    for br in sigma {
        let arc = image_arc(f, br)?;
        let n = reparametrize_by_distance(&arc, &int(ARC_PRECISION))?;
        if !normalized.iter().any(|m| same_arc(m, &n)) {
            normalized.push(n);
        }
        raw.push(arc);
    }
    Ok((raw, normalized))
}

/// Distance-parametrized discriminant arcs.
pub fn discriminant(f: &PrenormalForm, sigma: &[PuiseuxBranch]) -> Result<Vec<ArcGerm>> {
    Ok(discriminant_arcs(f, sigma)?.1)
}

fn same_arc(a: &ArcGerm, b: &ArcGerm) -> bool {
    (0..4).all(|k| a.coords[k].approx_eq(&b.coords[k]))
}

fn angle(a: &ArcGerm) -> f64 {
    let t = a.tangent().expect("nonzero arc");
    t[1].atan2(t[0])
}

/// Orders arcs by tangent angle, then counterclockwise across a shared tangent.
fn arc_order(a: &ArcGerm, b: &ArcGerm) -> Ordering {
    let (ta, tb) = (angle(a), angle(b));
    if (ta - tb).abs() > 1e-9 {
        return ta.partial_cmp(&tb).unwrap();
    }
    let (s, c) = ta.sin_cos();
    let normal = |g: &ArcGerm| {
        g.coords[0]
            .scale(&Coeff::Approx(-s))
            .add(&g.coords[1].scale(&Coeff::Approx(c)))
    };
    match normal(a).sub(&normal(b)).leading() {
        Some((_, coef)) if coef.signum() > 0 => Ordering::Greater,
        Some(_) => Ordering::Less,
        None => Ordering::Equal,
    }
}

fn rational_approx(v: f64) -> Rational {
    Rational::new(((v * 1e6).round() as i64).into(), 1_000_000.into())
}

fn ray_arc(phi: f64) -> ArcGerm {
    let (s, c) = phi.sin_cos();
    let mk = |v: f64| {
        let r = rational_approx(v);
        if r.is_zero() {
            PuiseuxSeries::zero()
        } else {
            PuiseuxSeries::monomial(Coeff::Exact(r), int(1))
        }
    };
    let mut a = ArcGerm::new([mk(c), mk(s), PuiseuxSeries::zero(), PuiseuxSeries::zero()]);
    a.normalized = true;
    a
}

fn midpoint_arc(a: &ArcGerm, b: &ArcGerm) -> ArcGerm {
    let half = Coeff::Exact(Rational::new(1.into(), 2.into()));
    let mut m = ArcGerm::new(std::array::from_fn(|k| a.coords[k].add(&b.coords[k]).scale(&half)));
    m.normalized = true;
    m
}

/// Real solutions `y(s)` of `F2(v1(s), y) = v2(s)` over a test arc.
pub fn fiber_branches(f: &PrenormalForm, test: &ArcGerm) -> Result<Vec<PuiseuxBranch>> {
    let limit = int(ARC_PRECISION);
    let v1 = &test.coords[0];
    let mut by_power: std::collections::BTreeMap<u32, PuiseuxSeries> = Default::default();
    for (&(i, j), c) in f.slot(1).terms() {
        let term = v1.pow_u32(i, &int(4 * ARC_PRECISION)).scale_rat(c);
        let e = by_power.entry(j).or_insert_with(PuiseuxSeries::zero);
        *e = e.add(&term);
    }
    let e = by_power.entry(0).or_insert_with(PuiseuxSeries::zero);
    *e = e.sub(&test.coords[1]);
    let coeffs: Vec<(u32, PuiseuxSeries)> = by_power.into_iter().collect();
    let set = solve_dependent(&coeffs, &limit)?;
    if let Some(b) = set.real.iter().find(|b| b.truncated && b.multiplicity > 1) {
        return Err(Error::AmbiguousFiber(format!(
            "{} solutions agree up to s^{}",
            b.multiplicity,
            b.series.truncation().map(|t| t.to_string()).unwrap_or_default()
        )));
    }
    Ok(set.real)
}

fn fiber_count(f: &PrenormalForm, test: &ArcGerm) -> Result<u32> {
    Ok(fiber_branches(f, test)?.iter().map(|b| b.multiplicity).sum())
}

/// Sectors between consecutive discriminant arcs with more than one preimage.
pub fn build_triangles(f: &PrenormalForm, delta: &[ArcGerm]) -> Result<(Vec<PolarTriangle>, Vec<String>)> {
    let mut notices = Vec::new();
    let mut arcs: Vec<ArcGerm> = delta.to_vec();
    arcs.sort_by(arc_order);
    let k = arcs.len();
    let mut out = Vec::new();
    if k < 2 {
        return Ok((out, notices));
    }
    let tau = std::f64::consts::TAU;
    for i in 0..k {
        let (a, b) = (&arcs[i], &arcs[(i + 1) % k]);
        let mut dth = (angle(b) - angle(a)).rem_euclid(tau);
        if dth > tau - 1e-9 {
            dth = 0.0;
        }
        if dth < 1e-9 && i == k - 1 {
            dth = tau;
        }
        let test = if dth > 1e-9 {
            ray_arc(angle(a) + dth / 2.0)
        } else {
            midpoint_arc(a, b)
        };
        let count = fiber_count(f, &test)?;
        if count <= 1 {
            continue;
        }
        let width = match outer_contact_order(a, b) {
            Ok(w) => w,
            Err(Error::Indistinguishable) => {
                notices.push(format!("sector {i}: boundary arcs coincide up to truncation; dropped"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut tri = PolarTriangle {
            boundary: [a.clone(), b.clone()],
            width,
            height_lower_bound: None,
            height_numeric: None,
            fiber_count: count,
            test_arc: test,
        };
        match height_lower_bound(f, &tri) {
            Ok(h) => tri.height_lower_bound = Some(h),
            Err(Error::Shape(msg)) => notices.push(format!("sector {i}: height bound unavailable ({msg})")),
            Err(e) => return Err(e),
        }
        out.push(tri);
    }
    Ok((out, notices))
}

/// Lower bound for the height of a polar triangle of a germ `(x, c xy + P1, Q, R)`
/// with `P1, Q, R` of order at least 3.
pub fn height_lower_bound(f: &PrenormalForm, _t: &PolarTriangle) -> Result<Rational> {
    shear_shape(f)?;
    Ok(height_bound_formula(f.p(), f.q()))
}

fn shear_shape(f: &PrenormalForm) -> Result<()> {
    let s = f.slot(1);
    if s.coeff(1, 1).is_zero() {
        return Err(Error::Shape("slot 2 has no xy term".into()));
    }
    let low = s.terms().any(|(&(i, j), _)| i + j < 2 || (i + j == 2 && (i, j) != (1, 1)));
    let rest_low = (2..4).any(|k| f.slot(k).lowest_degree().is_some_and(|d| d < 3));
    if low || rest_low {
        return Err(Error::Shape("higher slots must have order at least 3".into()));
    }
    Ok(())
}

/// `min(3, min over a in 1..n of min(q/a, (2a+1)/a, (2+a)/a))`.
pub fn height_bound_formula(n: u32, q: Order) -> Rational {
    let mut best = int(3);
    for a in 1..n.max(2) {
        let a = int(a as i64);
        let mut cands = vec![(int(2) * &a + int(1)) / &a, (int(2) + &a) / &a];
        if let Order::Finite(q) = q {
            cands.push(int(q as i64) / &a);
        }
        for c in cands {
            if c < best {
                best = c;
            }
        }
    }
    best
}

/// Newton refinement of a root of the univariate `y -> F2(x, y) - z2`.
fn refine_root(coeffs: &[f64], mut y: f64) -> f64 {
    let d: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
    for _ in 0..60 {
        let fy = numeric::horner(coeffs, y);
        let dy = numeric::horner(&d, y);
        if dy == 0.0 {
            break;
        }
        let step = fy / dy;
        y -= step;
        if step.abs() <= 1e-16 * (1.0 + y.abs()) {
            break;
        }
    }
    y
}

/// Log-log slope of the smallest distance between fiber images over the test arc.
pub fn height_numeric(f: &PrenormalForm, t: &PolarTriangle, radii: &[f64]) -> Result<f64> {
    let branches = fiber_branches(f, &t.test_arc)?;
    if branches.len() < 2 {
        return Err(Error::InsufficientSeparation("fewer than two fiber points".into()));
    }
    let map = f.numeric();
    let deg = f.slot(1).terms().map(|(&(_, j), _)| j).max().unwrap_or(0) as usize;
    let mut dists = Vec::new();
    for &s in radii {
        let v = t.test_arc.eval(s);
        let mut poly = vec![0.0; deg + 1];
        for (&(i, j), c) in f.slot(1).terms() {
            poly[j as usize] += to_f64(c) * v[0].powi(i as i32);
        }
        poly[0] -= v[1];
        let pts: Vec<[f64; 4]> = branches
            .iter()
            .map(|b| {
                let y = refine_root(&poly, b.series.eval(s));
                map.eval(v[0], y)
            })
            .collect();
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.min(crate::expr::dist4(&pts[i], &pts[j]));
            }
        }
        if !(best > 1e-300) {
            return Err(Error::InsufficientSeparation(format!("fiber points coincide at radius {s:e}")));
        }
        dists.push(best);
    }
    Ok(numeric::loglog_slope(radii, &dists))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", content = "triangle", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HeightWidth {
    Pass,
    Fail(usize),
    NotApplicable,
}

/// Fails when some triangle's height bound exceeds its width.
pub fn height_width_test(data: &PolarData) -> HeightWidth {
    if data.triangles.is_empty() {
        return HeightWidth::NotApplicable;
    }
    for (i, t) in data.triangles.iter().enumerate() {
        if t.height_lower_bound.as_ref().is_some_and(|h| h > &t.width) {
            return HeightWidth::Fail(i);
        }
    }
    HeightWidth::Pass
}

/// Full polar analysis; `radii` enables numeric heights.
pub fn polar_data(f: &PrenormalForm, radii: Option<&[f64]>) -> Result<PolarData> {
    let sigma = polar_curve(f)?;
    let (delta_raw, delta) = discriminant_arcs(f, &sigma)?;
    let (mut triangles, mut notices) = build_triangles(f, &delta)?;
    if let Some(r) = radii {
        for (i, t) in triangles.iter_mut().enumerate() {
            match height_numeric(f, t, r) {
                Ok(h) => t.height_numeric = Some(h),
                Err(e) => notices.push(format!("triangle {i}: numeric height unavailable ({e})")),
            }
        }
    }
    if !f.exact {
        notices.push(format!("map truncated at degree {}", f.degree));
    }
    Ok(PolarData {
        sigma,
        delta_raw,
        delta,
        triangles,
        notices,
    })
}

/// Leading `(exponent, coefficient)` of each coordinate of an arc.
pub fn leading_data(a: &ArcGerm) -> [Option<(Rational, f64)>; 4] {
    a.coords
        .each_ref()
        .map(|c| c.leading().map(|(e, v)| (e.clone(), v.to_f64())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_map, rat};
    use crate::germ::prenormalize;

    fn pf(s: &str) -> PrenormalForm {
        prenormalize(&parse_map(s).unwrap(), 12).unwrap()
    }

    #[test]
    fn g5_polar_data() {
        let f = pf("x, x*y + y^3, y^5, 0");
        let sigma = polar_curve(&f).unwrap();
        assert_eq!(sigma.len(), 2);
        for b in &sigma {
            assert_eq!(b.series, PuiseuxSeries::monomial_int(-3, 2));
        }
        let (raw, delta) = discriminant_arcs(&f, &sigma).unwrap();
        assert_eq!(raw[0].coords[0], PuiseuxSeries::monomial_int(-3, 2).cap(&raw[0].coords[0].truncation().cloned().unwrap()));
        assert_eq!(delta.len(), 2);
        let data = polar_data(&f, Some(&[1e-1, 1e-2, 1e-3])).unwrap();
        assert_eq!(data.triangles.len(), 1);
        let t = &data.triangles[0];
        assert_eq!(t.width, rat(3, 2));
        assert_eq!(t.fiber_count, 3);
        assert_eq!(t.height_lower_bound, Some(int(2)));
        assert_eq!(height_width_test(&data), HeightWidth::Fail(0));
    }

    #[test]
    fn bound_formula_examples() {
        assert_eq!(height_bound_formula(3, Order::Finite(5)), int(2));
        assert_eq!(height_bound_formula(3, Order::Infinite), int(2));
        assert_eq!(height_bound_formula(5, Order::Finite(7)), rat(3, 2));
    }

    #[test]
    fn fold_free_and_smooth() {
        let f = pf("x, x*y, y^3, 0");
        let sigma = polar_curve(&f).unwrap();
        assert!(sigma.iter().all(|b| b.series.is_zero() && b.multiplicity == 2));
        let data = polar_data(&f, None).unwrap();
        assert!(data.triangles.is_empty());
        assert_eq!(height_width_test(&data), HeightWidth::NotApplicable);

        let smooth = pf("x, y, 0, 0");
        assert!(polar_curve(&smooth).unwrap().is_empty());
        assert!(polar_curve(&pf("x, y^2, x*y, 0")).is_err());
    }
}
