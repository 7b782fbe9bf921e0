use germkit::cone::{angular_distance, max_gap_in_plane, secant_directions, tangent_cone_of, ConeKind, ConeType};
use germkit::expr::{int, rat, Rational};
use germkit::germ::{prenormalize, replay};
use germkit::linalg::{identity, inverse, matmul, to_array4};
use germkit::polar::{polar_curve, polar_data};
use germkit::verdict::{analyze, AnalysisConfig, EmbeddingStatus};
use germkit::{parse_map, MapGerm};
use proptest::prelude::*;

/// Rational rotation `(I - S)(I + S)^-1` from a skew-symmetric `S`.
fn cayley(s: [i64; 6]) -> [[Rational; 4]; 4] {
    let mut m = vec![vec![int(0); 4]; 4];
    let mut k = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            m[i][j] = rat(s[k], 3);
            m[j][i] = rat(-s[k], 3);
            k += 1;
        }
    }
    let id = identity(4);
    let plus: Vec<Vec<Rational>> = (0..4).map(|i| (0..4).map(|j| &id[i][j] + &m[i][j]).collect()).collect();
    let minus: Vec<Vec<Rational>> = (0..4).map(|i| (0..4).map(|j| &id[i][j] - &m[i][j]).collect()).collect();
    to_array4(&matmul(&minus, &inverse(&plus).expect("I + S is invertible")))
}

fn rotate(v: [f64; 4], r: &[[Rational; 4]; 4]) -> [f64; 4] {
    std::array::from_fn(|i| (0..4).map(|j| germkit::expr::to_f64(&r[i][j]) * v[j]).sum())
}

fn same_cone(a: &ConeType, b: &ConeType) -> bool {
    let in_plane = |v: &[f64; 4], c: &ConeType| {
        let p: f64 = (0..2).map(|k| germkit::numeric::dot(v, &c.basis[k]).powi(2)).sum();
        (p - 1.0).abs() < 1e-9
    };
    a.kind == b.kind
        && a.basis.iter().all(|v| in_plane(v, b))
        && match a.kind {
            ConeKind::Plane => true,
            ConeKind::HalfPlane => germkit::numeric::dot(&a.basis[1], &b.basis[1]) > 1.0 - 1e-9,
        }
}

/// `(x, x y + y^n + h, y^(n+1) + k, 0)` with `h, k` of order above the leading terms.
fn shear_germ(n: u32, h: i64, k: i64) -> MapGerm {
    parse_map(&format!("x, x*y + y^{n} + {h}*x^2*y^2, y^{} + {k}*x^3, 0", n + 1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replay_reproduces_prenormal_series(n in 3u32..7, h in -3i64..=3, k in -3i64..=3, s in prop::array::uniform6(-3i64..=3)) {
        let m = shear_germ(n, h, k).apply_target_linear(&cayley(s));
        let f = prenormalize(&m, 10).unwrap();
        let again = replay(&m, &f.changes, f.degree);
        for slot in 0..4 {
            prop_assert_eq!(again[slot].truncate(f.degree), f.series[slot].truncate(f.degree));
        }
    }

    #[test]
    fn even_order_gives_half_plane_and_not_ne(n in 1u32..5, h in -3i64..=3, k in -3i64..=3) {
        let m = shear_germ(2 * n, h, k);
        let cone = tangent_cone_of(&m, 12).unwrap();
        prop_assert_eq!(cone.kind, ConeKind::HalfPlane);
        let r = analyze(&m, &AnalysisConfig::default());
        prop_assert_eq!(r.verdict.status, EmbeddingStatus::NotNe);
    }

    #[test]
    fn cone_commutes_with_rotations(n in 2u32..6, s in prop::array::uniform6(-3i64..=3)) {
        let m = shear_germ(n, 1, 1);
        let r = cayley(s);
        let base = tangent_cone_of(&m, 12).unwrap();
        let turned = tangent_cone_of(&m.apply_target_linear(&r), 12).unwrap();
        let moved = ConeType {
            kind: base.kind,
            basis: base.basis.map(|v| rotate(v, &r)),
            boundary_direction: base.boundary_direction.map(|v| rotate(v, &r)),
        };
        prop_assert!(same_cone(&moved, &turned), "{:?} vs {:?}", moved, turned);
    }

    #[test]
    fn secants_lie_in_cone(h in -2i64..=2, k in -2i64..=2, cc in any::<bool>()) {
        // For shear germs the third slot tilts secants by about r^((q - p) / p); q >= 3p keeps
        // that below the tolerance at this radius.
        let m = if cc {
            parse_map(&format!("x, y^2 + {h}*x*y^2, x*y + {k}*y^3, 0")).unwrap()
        } else {
            parse_map(&format!("x, x*y + y^3 + {h}*x^2*y, y^9 + {k}*x^2, 0")).unwrap()
        };
        let cone = tangent_cone_of(&m, 12).unwrap();
        let worst = secant_directions(&m, &[1e-4], 128)
            .iter()
            .map(|d| angular_distance(&cone, d))
            .fold(0.0, f64::max);
        prop_assert!(worst < 5e-2, "{}", worst);
    }

    #[test]
    fn smooth_rotations_are_never_not_ne(s in prop::array::uniform6(-3i64..=3)) {
        let m = parse_map("x, y, 0, 0").unwrap().apply_target_linear(&cayley(s));
        let r = analyze(&m, &AnalysisConfig::default());
        prop_assert_ne!(r.verdict.status, EmbeddingStatus::NotNe);
    }

    #[test]
    fn height_bound_at_least_one(n in 1i64..4, q in 1i64..4) {
        let (n, q) = (2 * n + 1, 2 * n + 1 + q);
        let f = prenormalize(&parse_map(&format!("x, x*y + y^{n}, y^{q}, 0")).unwrap(), 12).unwrap();
        let data = polar_data(&f, None).unwrap();
        for t in &data.triangles {
            prop_assert!(t.height_lower_bound.clone().unwrap() >= int(1));
        }
    }
}

#[test]
fn fixture_height_numeric_respects_bound() {
    let f = prenormalize(&parse_map("x, x*y + y^3, y^5, 0").unwrap(), 12).unwrap();
    let data = polar_data(&f, Some(&germkit::numeric::log_spaced(1e-1, 1e-3, 5))).unwrap();
    let t = &data.triangles[0];
    let b = germkit::expr::to_f64(t.height_lower_bound.as_ref().unwrap());
    assert!(t.height_numeric.unwrap() >= b - 0.15);
}

#[test]
fn plane_secants_cover_circle() {
    for text in ["x, y, 0, 0", "x, x*y, y^3, 0", "x, x*y + y^5, y^7, 0"] {
        let m = parse_map(text).unwrap();
        let cone = tangent_cone_of(&m, 12).unwrap();
        let dirs = secant_directions(&m, &[1e-4], 256);
        assert!(max_gap_in_plane(&cone, &dirs) < 0.2, "{text}");
    }
}

#[test]
fn discriminant_matches_pushed_polar_points() {
    for n in [3, 5, 7] {
        let f = prenormalize(&parse_map(&format!("x, x*y + y^{n}, y^{}, 0", n + 2)).unwrap(), 12).unwrap();
        let sigma = polar_curve(&f).unwrap();
        let data = polar_data(&f, None).unwrap();
        let mut checked = 0;
        for (br, arc) in sigma.iter().zip(&data.delta_raw) {
            for k in 1..=400 {
                let t = 0.15 * k as f64 / 400.0;
                let want = arc.eval(t);
                if (want[0] * want[0] + want[1] * want[1]).sqrt() > 1e-2 {
                    continue;
                }
                let (x, y) = br.point(t);
                let got = [x, f.slot(1).eval_f64(x, y)];
                assert!((got[0] - want[0]).abs() < 1e-6 && (got[1] - want[1]).abs() < 1e-6, "n={n} t={t}");
                checked += 1;
            }
        }
        assert!(checked >= 100, "n={n}: {checked}");
    }
}
