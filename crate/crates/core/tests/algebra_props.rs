use germkit::expr::{rat, Axis, Order, Poly2};
use germkit::germ::{classify_2jet, corank, orbit_representative, random_invertible, JetOrbit};
use germkit::{parse_map, MapGerm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn poly(max_deg: u32) -> impl Strategy<Value = Poly2> {
    prop::collection::vec((0..=max_deg, 0..=max_deg, -9i64..=9, 1i64..=4), 0..6).prop_map(|ts| {
        let mut p = Poly2::zero();
        for (i, j, n, d) in ts {
            p.add_term(i, j, rat(n, d));
        }
        p
    })
}

fn vanishing_poly() -> impl Strategy<Value = Poly2> {
    poly(4).prop_map(|p| &p - &Poly2::constant(p.constant_term()))
}

fn germ() -> impl Strategy<Value = MapGerm> {
    [vanishing_poly(), vanishing_poly(), vanishing_poly(), vanishing_poly()]
        .prop_map(|c| MapGerm::new(c).unwrap())
}

proptest! {
    #[test]
    fn ring_laws(a in poly(3), b in poly(3), c in poly(3)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Poly2::one(), a.clone());
    }

    #[test]
    fn evaluation_is_a_ring_map(a in poly(3), b in poly(3), x in -9i64..=9, y in -9i64..=9, d in 1i64..5) {
        let (x, y) = (rat(x, d), rat(y, d + 1));
        prop_assert_eq!((&a * &b).eval(&x, &y), a.eval(&x, &y) * b.eval(&x, &y));
        prop_assert_eq!((&a + &b).eval(&x, &y), a.eval(&x, &y) + b.eval(&x, &y));
    }

    #[test]
    fn derivative_is_linear_and_leibniz(a in poly(3), b in poly(3)) {
        for axis in [Axis::X, Axis::Y] {
            prop_assert_eq!((&a + &b).partial_derivative(axis), &a.partial_derivative(axis) + &b.partial_derivative(axis));
            prop_assert_eq!(
                (&a * &b).partial_derivative(axis),
                &(&a.partial_derivative(axis) * &b) + &(&a * &b.partial_derivative(axis))
            );
        }
    }

    #[test]
    fn parse_print_round_trip(m in germ()) {
        let text = m.to_string();
        prop_assert_eq!(parse_map(&text).unwrap(), m);
    }

    #[test]
    fn order_is_additive(a in poly(4), b in poly(4)) {
        for axis in [Axis::X, Axis::Y] {
            let lhs = (&a * &b).order_along_axis(axis);
            let rhs = a.order_along_axis(axis) + b.order_along_axis(axis);
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn jet_orbit_invariant(seed in any::<u64>(), k in 0usize..4) {
        let o = [JetOrbit::Crosscap, JetOrbit::Parabolic, JetOrbit::Shear, JetOrbit::Degenerate][k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_invertible::<_, 4>(&mut rng);
        let b = random_invertible::<_, 2>(&mut rng);
        let m = orbit_representative(o).unwrap().apply_source_linear(&b).apply_target_linear(&a);
        prop_assert_eq!(corank(&m), 1);
        prop_assert_eq!(classify_2jet(&m), o);
    }

    #[test]
    fn higher_order_terms_do_not_change_the_jet(k in 0usize..4, extra in prop::collection::vec((0u32..3, 0u32..3, -5i64..=5), 4)) {
        let o = [JetOrbit::Crosscap, JetOrbit::Parabolic, JetOrbit::Shear, JetOrbit::Degenerate][k];
        let rep = orbit_representative(o).unwrap();
        let mut comps = rep.components().clone();
        for (slot, (i, j, c)) in extra.into_iter().enumerate() {
            // degree at least 3
            comps[slot].add_term(i + 1, j + 2, rat(c, 1));
        }
        prop_assert_eq!(classify_2jet(&MapGerm::new(comps).unwrap()), o);
    }
}

#[test]
fn axis_order_examples() {
    let p = |s: &str| germkit::expr::parse_poly(s).unwrap();
    assert_eq!(p("x*y + y^3").order_along_axis(Axis::Y), Order::Finite(3));
    assert_eq!(p("x*y").order_along_axis(Axis::Y), Order::Infinite);
    assert_eq!(p("y^2").order_along_axis(Axis::Y), Order::Finite(2));
}

#[test]
fn parse_errors() {
    assert!(parse_map("x, y, 1 + x, 0").is_err());
    assert!(parse_map("x, y, z, 0").is_err());
    assert!(parse_map("x, y, (x").is_err());
    assert!(parse_map("x, y, 0").is_err());
}
