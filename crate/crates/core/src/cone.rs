//! Tangent cone of the image: plane or half-plane, plus sampled secant directions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{to_f64, Axis, MapGerm, NumericMap, Rational};
use crate::germ::{self, PrenormalForm};
use crate::linalg;
use crate::numeric::{bisect, dot, normalize4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConeKind {
    Plane,
    HalfPlane,
}

/// A plane, or the half-plane `{ s b0 + t b1 : t >= 0 }`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeType {
    pub kind: ConeKind,
    /// Orthonormal basis of the carrier plane. For a half-plane `basis[0]` spans the
    /// boundary line and `basis[1]` points inside.
    pub basis: [[f64; 4]; 2],
    pub boundary_direction: Option<[f64; 4]>,
}

fn gram_schmidt(a: [f64; 4], b: [f64; 4]) -> [[f64; 4]; 2] {
    let e0 = normalize4(a);
    let d = dot(&b, &e0);
    let e1 = normalize4(std::array::from_fn(|k| b[k] - d * e0[k]));
    [e0, e1]
}

fn column(m: &[Vec<Rational>], c: usize) -> [f64; 4] {
    std::array::from_fn(|r| to_f64(&m[r][c]))
}

/// Cone of the image of a prenormalized germ, in the original target coordinates.
pub fn tangent_cone(f: &PrenormalForm) -> ConeType {
    let a: Vec<Vec<Rational>> = f.target_linear.iter().map(|r| r.to_vec()).collect();
    let inv = linalg::inverse(&a).expect("coordinate changes are invertible");
    let (u, v) = (column(&inv, 0), column(&inv, 1));
    let half = f.p() % 2 == 0;
    let lead = f
        .slot(1)
        .restrict_to_axis(Axis::Y)
        .into_iter()
        .min_by_key(|(m, _)| *m)
        .map(|(_, c)| to_f64(&c))
        .unwrap_or(1.0);
    let [e0, mut e1] = gram_schmidt(u, v);
    if half && lead < 0.0 {
        e1 = e1.map(|x| -x);
    }
    ConeType {
        kind: if half { ConeKind::HalfPlane } else { ConeKind::Plane },
        basis: [e0, e1],
        boundary_direction: half.then_some(e0),
    }
}

/// Tangent cone straight from a germ; corank 0 uses the image of the differential.
pub fn tangent_cone_of(m: &MapGerm, n: u32) -> Result<ConeType> {
    match germ::corank(m) {
        0 => {
            let d = germ::differential(m);
            Ok(ConeType {
                kind: ConeKind::Plane,
                basis: gram_schmidt(column(&d, 0), column(&d, 1)),
                boundary_direction: None,
            })
        }
        1 => Ok(tangent_cone(&germ::prenormalize(m, n)?)),
        _ => Err(Error::Precondition("tangent cone needs corank at most 1".into())),
    }
}

/// Angle between a unit vector and the cone.
pub fn angular_distance(cone: &ConeType, v: &[f64; 4]) -> f64 {
    let a = dot(v, &cone.basis[0]);
    let b = dot(v, &cone.basis[1]);
    let inplane = (a * a + b * b).sqrt().min(1.0);
    match cone.kind {
        ConeKind::HalfPlane if b < 0.0 => a.abs().min(1.0).acos(),
        _ => inplane.acos(),
    }
}

/// First source radius along direction `(c, s)` where `|F| = r`.
pub(crate) fn ray_hit(map: &NumericMap, c: f64, s: f64, r: f64) -> Option<f64> {
    let g = |rho: f64| crate::expr::norm4(&map.eval(rho * c, rho * s)) - r;
    let mut hi = r * 1e-3;
    while g(hi) < 0.0 {
        hi *= 1.5;
        if hi > 1e3 {
            return None;
        }
    }
    let lo = hi / 1.5;
    Some(bisect(g, if lo < r * 1e-3 { 0.0 } else { lo }, hi, 200))
}

/// Source points on the level curve `|F| = r`, refined until consecutive image
/// directions differ by less than `gap` radians.
pub(crate) fn level_curve(map: &NumericMap, r: f64, samples: usize, gap: f64) -> Vec<(f64, [f64; 2], [f64; 4])> {
    let point = |th: f64| -> Option<(f64, [f64; 2], [f64; 4])> {
        let (s, c) = th.sin_cos();
        let rho = ray_hit(map, c, s, r)?;
        let p = [rho * c, rho * s];
        Some((th, p, map.eval(p[0], p[1])))
    };
    let n = samples.max(8);
    let mut pts: Vec<_> = (0..n)
        .filter_map(|k| point(std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    let budget = 200_000;
    loop {
        let mut inserted = Vec::new();
        let m = pts.len();
        for k in 0..m {
            let (a, b) = (&pts[k], &pts[(k + 1) % m]);
            let mut tb = b.0;
            if k + 1 == m {
                tb += std::f64::consts::TAU;
            }
            let da = normalize4(a.2);
            let db = normalize4(b.2);
            let ang = dot(&da, &db).clamp(-1.0, 1.0).acos();
            if ang > gap && tb - a.0 > 1e-13 {
                if let Some(p) = point(0.5 * (a.0 + tb)) {
                    inserted.push(p);
                }
            }
        }
        if inserted.is_empty() || pts.len() + inserted.len() > budget {
            break;
        }
        pts.extend(inserted);
        for p in pts.iter_mut() {
            p.0 = p.0.rem_euclid(std::f64::consts::TAU);
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    pts
}

/// Unit secant directions `F(p) / |F(p)|` over level curves at each radius, sorted.
pub fn secant_directions(m: &MapGerm, radii: &[f64], samples_per_radius: usize) -> Vec<[f64; 4]> {
    let map = m.numeric();
    let mut out: Vec<[f64; 4]> = radii
        .iter()
        .flat_map(|&r| level_curve(&map, r, samples_per_radius, 0.05))
        .map(|(_, _, z)| normalize4(z))
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Largest angular gap between directions of a set of unit vectors inside a plane.
pub fn max_gap_in_plane(cone: &ConeType, dirs: &[[f64; 4]]) -> f64 {
    let mut angles: Vec<f64> = dirs
        .iter()
        .map(|v| dot(v, &cone.basis[1]).atan2(dot(v, &cone.basis[0])))
        .collect();
    if angles.is_empty() {
        return std::f64::consts::TAU;
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut gap = angles[0] + std::f64::consts::TAU - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn cone_examples() {
        let cc = tangent_cone_of(&parse_map("x, y^2, x*y, 0").unwrap(), 12).unwrap();
        assert_eq!(cc.kind, ConeKind::HalfPlane);
        assert!((cc.basis[0][0].abs() - 1.0).abs() < 1e-12);
        assert!((cc.basis[1][1] - 1.0).abs() < 1e-12);

        let sh = tangent_cone_of(&parse_map("x, x*y, y^3, 0").unwrap(), 12).unwrap();
        assert_eq!(sh.kind, ConeKind::Plane);

        let sm = tangent_cone_of(&parse_map("x, y, 0, 0").unwrap(), 12).unwrap();
        assert_eq!(sm.kind, ConeKind::Plane);
        assert!(angular_distance(&sm, &[0.0, 1.0, 0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn crosscap_secants_stay_in_half_plane() {
        let m = parse_map("x, y^2, x*y, 0").unwrap();
        let cone = tangent_cone_of(&m, 12).unwrap();
        let dirs = secant_directions(&m, &[1e-4], 64);
        let worst = dirs.iter().map(|d| angular_distance(&cone, d)).fold(0.0, f64::max);
        assert!(worst < 1e-2, "{worst}");
    }

    #[test]
    fn smooth_secants_fill_circle() {
        let m = parse_map("x, y, 0, 0").unwrap();
        let cone = tangent_cone_of(&m, 12).unwrap();
        let dirs = secant_directions(&m, &[1e-2], 64);
        assert!(max_gap_in_plane(&cone, &dirs) < 0.2);
    }
}
