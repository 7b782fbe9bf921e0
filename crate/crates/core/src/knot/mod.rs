//! Link of the image on a small sphere: stable projection, double points, diagram and
//! bracket polynomial.

pub mod diagram;
pub mod dp;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::level_curve;
use crate::error::{Error, Result};
use crate::expr::{int, norm4, rat, to_f64, MapGerm, Poly2, Rational};
use crate::germ::PrenormalForm;
use crate::numeric::{dot, normalize4};

pub use diagram::{bracket, normalized_bracket, GaussCode, Laurent, Passage, R2Site, MAX_CROSSINGS};
pub use dp::{
    certification_radius, certify_no_double_points, complete_form, divided_difference, eliminate_x,
    find_double_points, DoublePointSearch, DoublePointSystem, Poly3,
};

/// Smallest accepted angle between the kernel direction and the tangent plane, and
/// smallest accepted angle between sheets at a double point.
pub const MIN_MARGIN: f64 = 1e-3;

/// Attempts with a jittered plane before a diagram is declared non-generic.
pub const DIAGRAM_ATTEMPTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Coordinates of the prenormal form.
    Prenormal,
    Original,
}

/// Projection `R^4 -> R^3` along `direction`.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionChoice {
    pub direction: [f64; 4],
    pub frame: Frame,
    /// Smallest transversality margin; absent when no prenormal form was available.
    pub stability_evidence: Option<f64>,
    pub trials: usize,
    #[serde(skip)]
    kernel: Option<[Rational; 4]>,
}

fn projected_slots(f: &PrenormalForm, v: &[Rational; 4]) -> (Poly2, Poly2) {
    let k = if !v[3].is_zero() { 3 } else { 2 };
    let rest: Vec<usize> = (1..4).filter(|&i| i != k).collect();
    let pr = |i: usize| f.slot(i) - &f.slot(k).scale(&(&v[i] / &v[k]));
    let (a, b) = (pr(rest[0]), pr(rest[1]));
    // P carries the xy term, so its divided difference is linear in x
    if a.coeff(1, 1).is_zero() && !b.coeff(1, 1).is_zero() {
        (b, a)
    } else {
        (a, b)
    }
}

fn sheet_normal(p: &Poly2, q: &Poly2, x: f64, y: f64) -> [f64; 3] {
    let px = p.partial_derivative(crate::expr::Axis::X).eval_f64(x, y);
    let py = p.partial_derivative(crate::expr::Axis::Y).eval_f64(x, y);
    let qx = q.partial_derivative(crate::expr::Axis::X).eval_f64(x, y);
    let qy = q.partial_derivative(crate::expr::Axis::Y).eval_f64(x, y);
    // (1, px, qx) x (0, py, qy)
    let n = [px * qy - qx * py, -qy, py];
    let l = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt().max(1e-300);
    n.map(|c| c / l)
}

/// Radii of the spheres searched for double points.
const SEARCH_BALLS: [f64; 3] = [0.1, 0.025, 0.00625];

fn stability(f: &PrenormalForm, v: &[Rational; 4]) -> (f64, DoublePointSystem, Vec<[f64; 3]>) {
    let vf = v.clone().map(|c| to_f64(&c));
    let len = norm4(&vf);
    let transverse = ((vf[2] * vf[2] + vf[3] * vf[3]).sqrt() / len).min(1.0).asin();
    let (p, q) = projected_slots(f, v);
    let sys = DoublePointSystem::from_slots(&p, &q);
    let mut points = Vec::new();
    for ball in SEARCH_BALLS {
        points.extend(find_double_points(&sys, ball).points);
    }
    let mut margin = transverse;
    for d in &points {
        let (a, b) = (sheet_normal(&p, &q, d[0], d[1]), sheet_normal(&p, &q, d[0], d[2]));
        let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        margin = margin.min((c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt());
    }
    (margin, sys, points)
}

/// Picks a kernel direction with zero first component, transverse to the tangent plane
/// and with transverse sheets at every detected double point. A zero slot is projected
/// out first.
pub fn choose_stable_projection(f: &PrenormalForm, trials: usize, seed: u64) -> Result<ProjectionChoice> {
    Ok(stable_projection_with_system(f, trials, seed)?.0)
}

fn stable_projection_with_system(
    f: &PrenormalForm,
    trials: usize,
    seed: u64,
) -> Result<(ProjectionChoice, DoublePointSystem, Vec<[f64; 3]>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials.max(1) {
        let v: [Rational; 4] = if trial == 0 && f.slot(3).is_zero() {
            [int(0), int(0), int(0), int(1)]
        } else {
            let mut pick = || rat(rng.gen_range(-16..=16), 16);
            let (a, b) = (pick(), pick());
            let mut c = pick();
            if c.is_zero() {
                c = int(1);
            }
            [int(0), a, b, c]
        };
        let (margin, sys, points) = stability(f, &v);
        if margin > MIN_MARGIN {
            let dir = normalize4(v.clone().map(|c| to_f64(&c)));
            let choice = ProjectionChoice {
                direction: dir,
                frame: Frame::Prenormal,
                stability_evidence: Some(margin),
                trials: trial + 1,
                kernel: Some(v),
            };
            return Ok((choice, sys, points));
        }
    }
    Err(Error::ExhaustedTrials(trials))
}

/// Divided-difference system of the projected map `(x, P, Q)`.
pub fn double_point_system(f: &PrenormalForm, proj: &ProjectionChoice) -> Result<DoublePointSystem> {
    let v = proj
        .kernel
        .as_ref()
        .ok_or_else(|| Error::Precondition("projection was not chosen for a prenormal form".into()))?;
    let (p, q) = projected_slots(f, v);
    let sys = DoublePointSystem::from_slots(&p, &q);
    for (k, src) in [&p, &q].into_iter().enumerate() {
        let lhs = Poly3::from_poly2(src, true).sub(&Poly3::from_poly2(src, false));
        let uy = Poly3::monomial(int(1), [0, 0, 1]).sub(&Poly3::monomial(int(1), [0, 1, 0]));
        if lhs != uy.mul(&sys.dp[k]) {
            return Err(Error::Precondition("divided difference is not exact".into()));
        }
    }
    Ok(sys)
}

/// Closed curve `F(gamma) = link` on the sphere of radius `epsilon`.
#[derive(Clone, Debug, Serialize)]
pub struct LinkCurve {
    pub epsilon: f64,
    #[serde(skip)]
    pub points: Vec<[f64; 4]>,
    #[serde(skip)]
    pub source: Vec<[f64; 2]>,
    pub vertices: usize,
    pub max_sphere_error: f64,
    pub components: usize,
    /// Smallest second singular value of the Jacobian along the source curve.
    pub min_rank_margin: f64,
}

/// Traces the source curve `|F| = epsilon` and its image.
pub fn extract_link(m: &MapGerm, epsilon: f64, resolution: usize) -> Result<LinkCurve> {
    if epsilon <= 0.0 {
        return Err(Error::Input("epsilon must be positive".into()));
    }
    let map = m.numeric();
    let pts = level_curve(&map, epsilon, resolution.max(16), 0.05);
    if pts.len() < 3 {
        return Err(Error::Degenerate("image does not reach the sphere".into()));
    }
    let mut rank_margin = f64::INFINITY;
    for (_, s, _) in &pts {
        let j = map.jacobian(s[0], s[1]);
        let a: [f64; 4] = std::array::from_fn(|k| j[k][0]);
        let b: [f64; 4] = std::array::from_fn(|k| j[k][1]);
        let (aa, bb, ab) = (dot(&a, &a), dot(&b, &b), dot(&a, &b));
        let tr = aa + bb;
        let det = (aa * bb - ab * ab).max(0.0);
        let low = (tr / 2.0 - ((tr * tr / 4.0 - det).max(0.0)).sqrt()).max(0.0).sqrt();
        rank_margin = rank_margin.min(low);
    }
    let max_err = pts.iter().map(|p| (norm4(&p.2) - epsilon).abs()).fold(0.0, f64::max);
    Ok(LinkCurve {
        epsilon,
        vertices: pts.len(),
        source: pts.iter().map(|p| p.1).collect(),
        points: pts.into_iter().map(|p| p.2).collect(),
        max_sphere_error: max_err,
        components: 1,
        min_rank_margin: rank_margin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KnotVerdict {
    TrivialCertified,
    TrivialNumeric,
    Nontrivial,
    Unknown,
}

impl KnotVerdict {
    pub fn is_trivial(self) -> bool {
        matches!(self, KnotVerdict::TrivialCertified | KnotVerdict::TrivialNumeric)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagramReport {
    pub attempts: usize,
    pub raw_crossings: usize,
    pub gauss_code: Vec<i64>,
    pub signs: Vec<i8>,
    pub reduced_code: Vec<i64>,
    pub reduced_signs: Vec<i8>,
    pub reduced_crossings: usize,
    pub writhe: i32,
    pub bracket: Option<Laurent>,
    pub normalized_bracket: Option<Laurent>,
    pub verdict: KnotVerdict,
    #[serde(skip)]
    pub reduced: GaussCode,
    #[serde(skip)]
    pub svg: String,
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let minor = |skip_col: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip_col).collect();
        let r = |i: usize, j: usize| m[i][cols[j]];
        r(1, 0) * (r(2, 1) * r(3, 2) - r(2, 2) * r(3, 1)) - r(1, 1) * (r(2, 0) * r(3, 2) - r(2, 2) * r(3, 0))
            + r(1, 2) * (r(2, 0) * r(3, 1) - r(2, 1) * r(3, 0))
    };
    (0..4).map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * m[0][c] * minor(c)).sum()
}

fn complement_basis(d: [f64; 4]) -> [[f64; 4]; 3] {
    let d = normalize4(d);
    let mut basis: Vec<[f64; 4]> = vec![d];
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for i in 0..4 {
                e[i] -= c * b[i];
            }
        }
        if norm4(&e) > 1e-6 {
            basis.push(normalize4(e));
        }
        if basis.len() == 4 {
            break;
        }
    }
    let det = det4(&[basis[0], basis[1], basis[2], basis[3]]);
    if det < 0.0 {
        basis[3] = basis[3].map(|c| -c);
    }
    [basis[1], basis[2], basis[3]]
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let mut q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let l = norm4(&q);
    q = q.map(|c| c / l);
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Maps the link to R^3 by stereographic projection from the pole `epsilon * direction`,
/// then to a generic plane; the discarded third coordinate decides over and under.
pub fn diagram_and_invariant(link: &LinkCurve, direction: [f64; 4], seed: u64) -> Result<DiagramReport> {
    if link.components != 1 {
        return Err(Error::Precondition("diagram needs a single closed curve".into()));
    }
    let frame = complement_basis(direction);
    let d = normalize4(direction);
    // stereographic projection from the pole epsilon * d keeps the knot type
    let space: Vec<[f64; 3]> = link
        .points
        .iter()
        .map(|z| {
            let k = link.epsilon / (link.epsilon - dot(z, &d)).max(1e-300);
            [k * dot(z, &frame[0]), k * dot(z, &frame[1]), k * dot(z, &frame[2])]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b6e6f74);
    let mut last = None;
    for attempt in 0..DIAGRAM_ATTEMPTS {
        let r = random_rotation(&mut rng);
        let rotated: Vec<[f64; 3]> = space
            .iter()
            .map(|p| std::array::from_fn(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2]))
            .collect();
        let plane: Vec<[f64; 2]> = rotated.iter().map(|p| [p[0], p[1]]).collect();
        let height: Vec<f64> = rotated.iter().map(|p| p[2]).collect();
        match diagram::gauss_code_of_polyline(&plane, &height) {
            Ok((code, _)) => {
                let reduced = code.reduce();
                let br = bracket(&reduced);
                let nb = normalized_bracket(&reduced);
                let verdict = if reduced.crossings() == 0 {
                    KnotVerdict::TrivialNumeric
                } else {
                    match &nb {
                        None => KnotVerdict::Unknown,
                        Some(f) if *f == Laurent::one() => KnotVerdict::TrivialNumeric,
                        Some(_) => KnotVerdict::Nontrivial,
                    }
                };
                return Ok(DiagramReport {
                    attempts: attempt + 1,
                    raw_crossings: code.crossings(),
                    gauss_code: code.signed_sequence(),
                    signs: code.signs.clone(),
                    reduced_code: reduced.signed_sequence(),
                    reduced_signs: reduced.signs.clone(),
                    reduced_crossings: reduced.crossings(),
                    writhe: reduced.writhe(),
                    bracket: br,
                    normalized_bracket: nb,
                    verdict,
                    reduced,
                    svg: diagram::svg(&plane, &height),
                });
            }
            Err(e @ Error::NonGeneric(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::NonGeneric("no generic plane found".into())))
}

#[derive(Clone, Debug)]
pub struct KnotConfig {
    pub epsilon: f64,
    pub resolution: usize,
    pub seed: u64,
    pub trials: usize,
    /// Runs the diagram path even when the double-point set is certified empty.
    pub force_numeric: bool,
}

impl Default for KnotConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            resolution: 64,
            seed: 0,
            trials: 16,
            force_numeric: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KnotReport {
    pub projection: Option<ProjectionChoice>,
    pub double_point_system: Option<DoublePointSystem>,
    pub certified: bool,
    pub certification_radius: Option<f64>,
    pub double_points: Vec<[f64; 3]>,
    pub link: Option<LinkCurve>,
    pub diagram: Option<DiagramReport>,
    pub verdict: KnotVerdict,
    pub assumptions: Vec<String>,
    pub notices: Vec<String>,
}

/// Knot analysis: certification through the double-point system when a prenormal form is
/// available, otherwise (or when forced) the numeric diagram of the link.
pub fn knot_report(m: &MapGerm, f: Option<&PrenormalForm>, cfg: &KnotConfig) -> Result<KnotReport> {
    let mut report = KnotReport {
        projection: None,
        double_point_system: None,
        certified: false,
        certification_radius: None,
        double_points: Vec::new(),
        link: None,
        diagram: None,
        verdict: KnotVerdict::Unknown,
        assumptions: vec![
            "injectivity of the germ is checked only numerically".into(),
            "isolated singularity is checked only numerically".into(),
        ],
        notices: Vec::new(),
    };
    let (germ, direction) = match f {
        Some(f) => {
            let (proj, _, points) = stable_projection_with_system(f, cfg.trials, cfg.seed)?;
            let sys = double_point_system(f, &proj)?;
            report.certification_radius = certification_radius(&sys);
            report.certified = report.certification_radius.is_some();
            report.double_points = points;
            if report.certified && !report.double_points.is_empty() {
                report
                    .notices
                    .push("double points found outside the certified ball".into());
            }
            let dir = proj.direction;
            report.projection = Some(proj);
            report.double_point_system = Some(sys);
            if report.certified {
                report.verdict = KnotVerdict::TrivialCertified;
                if !cfg.force_numeric {
                    return Ok(report);
                }
            }
            (f.as_germ(), dir)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            report.projection = Some(ProjectionChoice {
                direction: normalize4(d),
                frame: Frame::Original,
                stability_evidence: None,
                trials: 1,
                kernel: None,
            });
            (m.clone(), normalize4(d))
        }
    };
    let link = extract_link(&germ, cfg.epsilon, cfg.resolution)?;
    if link.min_rank_margin <= 1e-9 {
        report
            .notices
            .push("Jacobian drops rank on the link preimage; the singularity may not be isolated".into());
    }
    let diagram = match diagram_and_invariant(&link, direction, cfg.seed) {
        Ok(d) => d,
        Err(Error::NonGeneric(msg)) => {
            report.notices.push(format!(
                "no generic diagram after {DIAGRAM_ATTEMPTS} planes ({msg}); the link may not be embedded"
            ));
            if !report.certified {
                report.verdict = KnotVerdict::Unknown;
            }
            report.link = Some(link);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    if !report.certified {
        report.verdict = diagram.verdict;
    } else if !diagram.verdict.is_trivial() {
        report
            .notices
            .push("numeric diagram disagrees with the certified triviality".into());
    }
    report.link = Some(link);
    report.diagram = Some(diagram);
    Ok(report)
}

impl ProjectionChoice {
    pub fn kernel(&self) -> Option<&[Rational; 4]> {
        self.kernel.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;
    use crate::germ::prenormalize;

    #[test]
    fn smooth_link_is_round() {
        let m = parse_map("x, y, 0, 0").unwrap();
        let link = extract_link(&m, 0.1, 64).unwrap();
        assert!(link.max_sphere_error < 1e-8);
        let d = diagram_and_invariant(&link, [0.0, 0.0, 0.0, 1.0], 0).unwrap();
        assert_eq!(d.reduced_crossings, 0);
        assert_eq!(d.verdict, KnotVerdict::TrivialNumeric);
    }

    #[test]
    fn shear_certified_and_numeric() {
        let m = parse_map("x, x*y, y^3, 0").unwrap();
        let f = prenormalize(&m, 12).unwrap();
        let mut cfg = KnotConfig::default();
        let r = knot_report(&m, Some(&f), &cfg).unwrap();
        assert_eq!(r.verdict, KnotVerdict::TrivialCertified);
        assert!(r.double_points.is_empty());
        cfg.force_numeric = true;
        let r = knot_report(&m, Some(&f), &cfg).unwrap();
        let d = r.diagram.unwrap();
        assert_eq!(d.reduced_crossings, 0);
    }

    #[test]
    fn cusp_link_is_trefoil() {
        let m = parse_map("x^2 - y^2, 2*x*y, x^3 - 3*x*y^2, 3*x^2*y - y^3").unwrap();
        for seed in 0..4 {
            let cfg = KnotConfig { seed, ..Default::default() };
            let r = knot_report(&m, None, &cfg).unwrap();
            let d = r.diagram.unwrap();
            assert_eq!(d.reduced_crossings, 3);
            assert_eq!(r.verdict, KnotVerdict::Nontrivial);
        }
    }
}
