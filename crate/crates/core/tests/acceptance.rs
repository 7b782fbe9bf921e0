//! Acceptance criteria. Each prints one PASS/FAIL line; the test fails if any criterion does.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use germkit::cone::{angular_distance, secant_directions, tangent_cone, ConeKind};
use germkit::expr::{int, rat, Poly2};
use germkit::germ::{classify_2jet, orbit_representative, prenormalize, random_invertible, JetOrbit};
use germkit::knot::diagram::{bracket, normalized_bracket, GaussCode, Laurent, MAX_CROSSINGS};
use germkit::knot::dp::divided_difference;
use germkit::knot::{knot_report, KnotConfig, KnotVerdict};
use germkit::metric::{arc_criterion_estimate, sample_mesh, ArcPairs};
use germkit::numeric::log_spaced;
use germkit::polar::{height_width_test, leading_data, polar_data, HeightWidth};
use germkit::puiseux::{outer_contact_order, reparametrize_by_distance, ArcGerm, Coeff, PuiseuxSeries};
use germkit::verdict::{analyze, AnalysisConfig, Certificate, EmbeddingStatus};
use germkit::{parse_map, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c1_jet_orbits() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ok = 0;
    let orbits = [JetOrbit::Crosscap, JetOrbit::Parabolic, JetOrbit::Shear, JetOrbit::Degenerate];
    for o in orbits {
        let rep = orbit_representative(o).unwrap();
        for _ in 0..50 {
            let a = random_invertible::<_, 4>(&mut rng);
            let b = random_invertible::<_, 2>(&mut rng);
            let m = rep.apply_source_linear(&b).apply_target_linear(&a);
            ok += (classify_2jet(&m) == o) as usize;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok == 200 && secs < 5.0, format!("{ok}/200 in {secs:.2}s"))
}

fn c2_cone_dichotomy() -> Outcome {
    let mut kinds_ok = 0;
    let mut worst = 0.0f64;
    let mut per_n = Vec::new();
    for n in 2..=9u32 {
        let m = parse_map(&format!("x, x*y + y^{n}, 0, 0")).unwrap();
        let f = prenormalize(&m, 12).unwrap();
        let cone = tangent_cone(&f);
        let want = if n % 2 == 0 { ConeKind::HalfPlane } else { ConeKind::Plane };
        kinds_ok += (cone.kind == want) as usize;
        let dev = secant_directions(&m, &[1e-4], 256)
            .iter()
            .map(|d| angular_distance(&cone, d))
            .fold(0.0, f64::max);
        worst = worst.max(dev);
        per_n.push(format!("n={n}:{dev:.3}"));
    }
    outcome(
        kinds_ok == 8 && worst <= 5e-2,
        format!("kinds {kinds_ok}/8, max secant deviation {worst:.4} rad ({})", per_n.join(" ")),
    )
}

fn c3_discriminant_width() -> Outcome {
    let mut bad = Vec::new();
    for n in [3i64, 5, 7, 9] {
        let m = parse_map(&format!("x, x*y + y^{n}, y^{}, 0", n + 2)).unwrap();
        let f = prenormalize(&m, 12).unwrap();
        let data = match polar_data(&f, None) {
            Ok(d) => d,
            Err(e) => {
                bad.push(format!("n={n}: {e}"));
                continue;
            }
        };
        let lead_ok = !data.delta_raw.is_empty()
            && data.delta_raw.iter().all(|a| {
                let l = leading_data(a);
                matches!((&l[0], &l[1]), (Some((e0, c0)), Some((e1, c1)))
                    if *e0 == int(n - 1) && *e1 == int(n) && *c0 != 0.0 && *c1 != 0.0)
            });
        let width_ok = data.triangles.len() == 1 && data.triangles[0].width == rat(n, n - 1);
        if !(lead_ok && width_ok) {
            bad.push(format!(
                "n={n}: leading {lead_ok}, widths {:?}",
                data.triangles.iter().map(|t| t.width.to_string()).collect::<Vec<_>>()
            ));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "n = 3,5,7,9 exact".into() } else { bad.join("; ") })
}

fn c4_height_bound() -> Outcome {
    let m = parse_map("x, x*y + y^3, y^5, 0").unwrap();
    let f = prenormalize(&m, 12).unwrap();
    let radii = log_spaced(1e-1, 1e-3, 5);
    let data = polar_data(&f, Some(&radii)).unwrap();
    let t = &data.triangles[0];
    let report = analyze(&m, &AnalysisConfig::default());
    let bound_ok = t.height_lower_bound == Some(int(2)) && t.width == rat(3, 2);
    let verdict_ok = report.verdict.status == EmbeddingStatus::NotNe
        && report.verdict.certificate == Some(Certificate::Claim1Order)
        && height_width_test(&data) == HeightWidth::Fail(0);
    let slope = t.height_numeric.unwrap_or(f64::NAN);
    let slope_ok = (slope - 2.0).abs() <= 0.15;
    outcome(
        bound_ok && verdict_ok && slope_ok,
        format!(
            "bound {:?} width {} verdict {:?}/{:?}, numeric slope {slope:.3} (target 2.0 +- 0.15)",
            t.height_lower_bound.as_ref().map(|r| r.to_string()),
            t.width,
            report.verdict.status,
            report.verdict.certificate
        ),
    )
}

fn c5_arc_criterion() -> Outcome {
    let radii = log_spaced(1e-1, 1e-3, 5);
    let run = |text: &str| {
        let m = parse_map(text).unwrap();
        let start = Instant::now();
        let e = arc_criterion_estimate(&m, &ArcPairs::Random(64), &radii, 64, 0).unwrap();
        (e.growth_exponent, start.elapsed().as_secs_f64())
    };
    let (g6, t6) = run("x^2 - y^2, 2*x*y, x^3 - 3*x*y^2, 3*x^2*y - y^3");
    let (sm, ts) = run("x, y, 0, 0");
    let pass = (g6 - 0.5).abs() <= 0.1 && sm.abs() <= 0.1 && t6 < 30.0 && ts < 30.0;
    outcome(pass, format!("cusp {g6:.3} ({t6:.1}s), smooth {sm:.3} ({ts:.1}s)"))
}

fn c6_knot_trivial() -> Outcome {
    let m = parse_map("x, x*y, y^3, 0").unwrap();
    let f = prenormalize(&m, 12).unwrap();
    let r = knot_report(&m, Some(&f), &KnotConfig::default()).unwrap();
    let cert_ok = r.certified && r.verdict == KnotVerdict::TrivialCertified && r.double_points.is_empty();
    let forced = knot_report(
        &m,
        Some(&f),
        &KnotConfig {
            force_numeric: true,
            ..KnotConfig::default()
        },
    )
    .unwrap();
    let crossings = forced.diagram.as_ref().map(|d| d.reduced_crossings);
    outcome(
        cert_ok && crossings == Some(0),
        format!("certified {} verdict {:?}, forced diagram reduced crossings {crossings:?}", r.certified, r.verdict),
    )
}

/// Bracket by direct enumeration of smoothings on the Gauss code. At a crossing with
/// under passage `i` and over passage `j`, the oriented smoothing joins edge `i-1` to `j`
/// and `j-1` to `i`; the other joins `i-1` to `j-1` and `i` to `j`. The A-smoothing is
/// the oriented one at positive crossings.
fn oracle_bracket(code: &GaussCode) -> BTreeMap<i32, i64> {
    let n = code.passages.len();
    let c = code.crossings();
    let mut under = vec![0; c];
    let mut over = vec![0; c];
    for (k, p) in code.passages.iter().enumerate() {
        if p.over {
            over[p.crossing] = k;
        } else {
            under[p.crossing] = k;
        }
    }
    let mut total: BTreeMap<i32, i64> = BTreeMap::new();
    for state in 0u32..(1 << c) {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut a_minus_b = 0i32;
        for x in 0..c {
            let (i, j) = (under[x], over[x]);
            let (ip, jp) = ((i + n - 1) % n, (j + n - 1) % n);
            let a = state >> x & 1 == 0;
            a_minus_b += if a { 1 } else { -1 };
            let oriented = a == (code.signs[x] > 0);
            let pairs = if oriented { [(ip, j), (jp, i)] } else { [(ip, jp), (i, j)] };
            for (u, v) in pairs {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                parent[ru] = rv;
            }
        }
        let loops = (0..n).filter(|&k| find(&mut parent, k) == k).count();
        // A^(a-b) (-A^2 - A^-2)^(loops-1)
        let mut poly: BTreeMap<i32, i64> = BTreeMap::from([(a_minus_b, 1)]);
        for _ in 1..loops {
            let mut next = BTreeMap::new();
            for (&e, &v) in &poly {
                *next.entry(e + 2).or_insert(0) -= v;
                *next.entry(e - 2).or_insert(0) -= v;
            }
            poly = next;
        }
        for (e, v) in poly {
            *total.entry(e).or_insert(0) += v;
        }
    }
    total.retain(|_, v| *v != 0);
    total
}

fn laurent_map(l: &Laurent) -> BTreeMap<i32, i64> {
    l.terms().filter(|&(_, c)| c != 0).collect()
}

fn c7_knot_nontrivial() -> Outcome {
    let m = parse_map("x^2 - y^2, 2*x*y, x^3 - 3*x*y^2, 3*x^2*y - y^3").unwrap();
    let r = match knot_report(&m, None, &KnotConfig::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("knot report failed: {e}")),
    };
    let Some(d) = r.diagram.as_ref() else {
        return outcome(false, "no diagram");
    };
    let lib = bracket(&d.reduced).map(|b| laurent_map(&b));
    let oracle = oracle_bracket(&d.reduced);
    let unknot_norm = BTreeMap::from([(0, 1)]);
    let norm = normalized_bracket(&d.reduced).map(|b| laurent_map(&b));
    let pass = d.reduced_crossings == 3
        && lib.as_ref() == Some(&oracle)
        && norm.as_ref().is_some_and(|b| *b != unknot_norm)
        && r.verdict == KnotVerdict::Nontrivial;
    outcome(
        pass,
        format!(
            "{} crossings, bracket {}, oracle agrees {}, verdict {:?}",
            d.reduced_crossings,
            d.bracket.as_ref().map_or("-".into(), |b| b.to_string()),
            lib.as_ref() == Some(&oracle),
            r.verdict
        ),
    )
}

fn random_poly(rng: &mut ChaCha8Rng) -> Poly2 {
    let mut p = Poly2::zero();
    for _ in 0..rng.gen_range(1..6) {
        let (i, j) = (rng.gen_range(0..4), rng.gen_range(1..6));
        p.add_term(i, j, rat(rng.gen_range(-9..=9), rng.gen_range(1..5)));
    }
    p
}

fn dd_exactness(rng: &mut ChaCha8Rng) -> usize {
    let mut failures = 0;
    for _ in 0..100 {
        let p = random_poly(rng);
        let d = divided_difference(&p);
        let r = |rng: &mut ChaCha8Rng| rat(rng.gen_range(-20..=20), rng.gen_range(1..7));
        let (x, y) = (r(rng), r(rng));
        let mut u = r(rng);
        if u == y {
            u += int(1);
        }
        let lhs = d.eval(&[x.clone(), y.clone(), u.clone()]) * (&u - &y);
        let rhs = p.eval(&x, &u) - p.eval(&x, &y);
        failures += (lhs != rhs) as usize;
    }
    failures
}

fn series(terms: &[(Rational, i64)]) -> PuiseuxSeries {
    PuiseuxSeries::from_terms(terms.iter().map(|(e, c)| (e.clone(), Coeff::Exact(int(*c)))).collect(), None)
}

/// Arcs `t -> (t, sum c_k t^(e_k), 0, 0)` sharing a tangent; contact orders are the first
/// exponent where the second coordinates differ.
fn isosceles(rng: &mut ChaCha8Rng) -> usize {
    let exps: Vec<Rational> = [rat(3, 2), int(2), rat(5, 2), int(3)].into();
    let mut failures = 0;
    for _ in 0..100 {
        let arcs: Vec<ArcGerm> = (0..3)
            .map(|_| {
                let terms: Vec<(Rational, i64)> =
                    exps.iter().map(|e| (e.clone(), rng.gen_range(-1..=1))).collect();
                let mut terms = terms;
                terms.push((int(4), rng.gen_range(1..1000)));
                let a = ArcGerm::new([series(&[(int(1), 1)]), series(&terms), PuiseuxSeries::zero(), PuiseuxSeries::zero()]);
                reparametrize_by_distance(&a, &int(6)).unwrap()
            })
            .collect();
        let tord = |i: usize, j: usize| outer_contact_order(&arcs[i], &arcs[j]);
        let (Ok(ab), Ok(bc), Ok(ac)) = (tord(0, 1), tord(1, 2), tord(0, 2)) else {
            continue;
        };
        let mut v = [ab, bc, ac];
        v.sort();
        failures += (v[0] != v[1]) as usize;
    }
    failures
}

fn inner_at_least_outer(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut queries = 0;
    let mut failures = 0;
    for text in ["x, y, 0, 0", "x, x*y, y^3, 0", "x, y^2, x*y, 0"] {
        let mesh = sample_mesh(&parse_map(text).unwrap(), 0.1, 24).unwrap();
        for _ in 0..40 {
            let n = mesh.vertices.len();
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let Ok(inner) = mesh.inner_distance(a, b) else { continue };
            queries += 1;
            failures += (inner < mesh.outer_distance(a, b) * (1.0 - 1e-12)) as usize;
        }
    }
    (queries, failures)
}

fn trefoil() -> GaussCode {
    use germkit::knot::diagram::Passage;
    let seq = [1i64, -2, 3, -1, 2, -3];
    GaussCode {
        passages: seq
            .iter()
            .map(|&s| Passage {
                crossing: (s.unsigned_abs() - 1) as usize,
                over: s > 0,
            })
            .collect(),
        signs: vec![-1, -1, -1],
    }
}

fn reidemeister_walk(rng: &mut ChaCha8Rng) -> usize {
    let mut code = trefoil();
    let target = normalized_bracket(&code).unwrap();
    let mut failures = 0;
    for _ in 0..200 {
        let room = code.crossings() + 2 <= MAX_CROSSINGS;
        let next = match rng.gen_range(0..4) {
            0 if room => {
                let edge = rng.gen_range(0..code.passages.len().max(1));
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                Some(code.insert_r1(edge, rng.gen_bool(0.5), sign))
            }
            1 if room => {
                let sites = code.r2_insertion_sites();
                (!sites.is_empty()).then(|| code.insert_r2(sites[rng.gen_range(0..sites.len())]))
            }
            2 => {
                let sites = code.r1_sites();
                (!sites.is_empty()).then(|| code.apply_r1(sites[rng.gen_range(0..sites.len())]))
            }
            _ => {
                let sites = code.r2_sites();
                (!sites.is_empty()).then(|| code.apply_r2(sites[rng.gen_range(0..sites.len())]))
            }
        };
        let Some(next) = next else { continue };
        let ok = next.validate().is_ok() && normalized_bracket(&next).as_ref() == Some(&target);
        failures += (!ok) as usize;
        code = next;
    }
    failures
}

fn c8_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dd = dd_exactness(&mut rng);
    let iso = isosceles(&mut rng);
    let (queries, io) = inner_at_least_outer(&mut rng);
    let rm = reidemeister_walk(&mut rng);
    outcome(
        dd + iso + io + rm == 0 && queries > 0,
        format!("divided differences {dd}, isosceles {iso}, inner<outer {io}/{queries}, Reidemeister {rm} failures"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("jet-orbit invariance", c1_jet_orbits),
        ("cone dichotomy", c2_cone_dichotomy),
        ("discriminant cusp and width", c3_discriminant_width),
        ("height bound", c4_height_bound),
        ("arc-criterion oracle", c5_arc_criterion),
        ("knot triviality", c6_knot_trivial),
        ("nontrivial detection", c7_knot_nontrivial),
        ("property suites", c8_properties),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "acceptance {}: {tag} {name}: {}", k + 1, o.detail);
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
