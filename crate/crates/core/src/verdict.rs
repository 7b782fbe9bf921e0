//! The decision pipeline: jet, cone, order condition, polar height/width, arc criterion
//! and knot, combined into one report.

use serde::Serialize;
use serde_json::json;

use crate::cone::{self, ConeKind, ConeType};
use crate::error::{Error, Result};
use crate::expr::{MapGerm, Order};
use crate::germ::{self, JetOrbit, PrenormalForm, ShearOrders};
use crate::knot::{self, KnotConfig, KnotReport, KnotVerdict};
use crate::metric::{self, ArcEstimate, ArcPairs};
use crate::numeric::log_spaced;
use crate::polar::{self, HeightWidth, PolarData};

/// Growth exponents below this in absolute value count as a bounded ratio.
pub const BOUNDED_GROWTH: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisConfig {
    pub degree: u32,
    pub radii: Vec<f64>,
    pub resolution: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub arc_pairs: usize,
    pub projection_trials: usize,
    /// Runs the knot diagram even when triviality is certified.
    pub force_numeric_knot: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            degree: 12,
            radii: log_spaced(1e-1, 1e-3, 5),
            resolution: 64,
            seed: 0,
            epsilon: 0.1,
            arc_pairs: 64,
            projection_trials: 16,
            force_numeric_knot: false,
        }
    }
}

/// Outcome of one pipeline stage.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage<T> {
    Ok { result: T },
    Skipped { reason: String },
    Failed { error: String, exit_code: i32 },
}

impl<T> Stage<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Stage::Ok { result } => Some(result),
            _ => None,
        }
    }

    fn skipped(reason: impl Into<String>) -> Self {
        Stage::Skipped { reason: reason.into() }
    }

    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(result) => Stage::Ok { result },
            Err(e) => Stage::Failed {
                exit_code: e.exit_code(),
                error: e.to_string(),
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Stage::Failed { exit_code, .. } => *exit_code,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EmbeddingStatus {
    NotNe,
    LikelyNe,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certificate {
    HalfPlane,
    JetOrbit,
    Claim1Order,
    HeightWidth,
    Numeric,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingVerdict {
    pub status: EmbeddingStatus,
    pub certificate: Option<Certificate>,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct JetReport {
    pub corank: u32,
    pub orbit: JetOrbit,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrenormalSummary {
    pub slots: Vec<String>,
    /// Orders of slots 2, 3, 4 along the y-axis.
    pub orders: [Order; 3],
    pub degree: u32,
    pub exact: bool,
    pub notices: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub input: String,
    pub jet: JetReport,
    pub prenormal: Stage<PrenormalSummary>,
    pub cone: Stage<ConeType>,
    pub shear: Stage<ShearOrders>,
    pub polar: Stage<PolarData>,
    pub height_width: HeightWidth,
    pub arc_criterion: Stage<ArcEstimate>,
    pub knot: Stage<KnotReport>,
    pub verdict: EmbeddingVerdict,
    pub warnings: Vec<String>,
}

impl Report {
    /// Largest exit code among failed stages: 2 for degenerate input, 3 for truncation and limits.
    pub fn exit_code(&self) -> i32 {
        [
            self.prenormal.exit_code(),
            self.cone.exit_code(),
            self.shear.exit_code(),
            self.polar.exit_code(),
            self.arc_criterion.exit_code(),
            self.knot.exit_code(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }
}

fn summary(f: &PrenormalForm) -> PrenormalSummary {
    PrenormalSummary {
        slots: f.series.iter().map(|p| p.to_string()).collect(),
        orders: f.orders,
        degree: f.degree,
        exact: f.exact,
        notices: f.notices.clone(),
    }
}

fn polar_evidence(polar: &Stage<PolarData>) -> serde_json::Value {
    match polar.ok() {
        Some(d) => serde_json::Value::Array(
            d.triangles
                .iter()
                .map(|t| {
                    json!({
                        "width": t.width.to_string(),
                        "height_lower_bound": t.height_lower_bound.as_ref().map(|h| h.to_string()),
                        "height_numeric": t.height_numeric,
                    })
                })
                .collect(),
        ),
        None => serde_json::Value::Null,
    }
}

/// Runs every stage in order; a stage that cannot run is reported as skipped or failed and
/// the later stages carry on with what is available.
pub fn analyze(m: &MapGerm, cfg: &AnalysisConfig) -> Report {
    let corank = germ::corank(m);
    let orbit = germ::classify_2jet(m);
    let mut warnings = Vec::new();

    let pre: Option<Result<PrenormalForm>> = (corank <= 1).then(|| germ::prenormalize(m, cfg.degree));
    let prenormal = match &pre {
        None => Stage::skipped("corank 2: no prenormal form"),
        Some(Ok(f)) => Stage::Ok { result: summary(f) },
        Some(Err(e)) => Stage::from_result(Err(e.clone())),
    };
    let f: Option<&PrenormalForm> = pre.as_ref().and_then(|r| r.as_ref().ok());

    let cone: Stage<ConeType> = match (corank, f) {
        (0, _) => Stage::from_result(cone::tangent_cone_of(m, cfg.degree)),
        (1, Some(f)) => Stage::Ok {
            result: cone::tangent_cone(f),
        },
        (1, None) => Stage::skipped("prenormal form unavailable"),
        _ => Stage::skipped("tangent cone needs corank at most 1"),
    };

    let shear: Stage<ShearOrders> = match (orbit, f) {
        (JetOrbit::Shear, Some(f)) => Stage::from_result(germ::shear_orders(f)),
        (JetOrbit::Shear, None) => Stage::skipped("prenormal form unavailable"),
        _ => Stage::skipped("order condition applies to the shear orbit only"),
    };

    let half_plane = cone.ok().is_some_and(|c| c.kind == ConeKind::HalfPlane);
    let polar: Stage<PolarData> = match f {
        _ if half_plane => Stage::skipped("tangent cone is a half-plane"),
        Some(f) => Stage::from_result(polar::polar_data(f, Some(&cfg.radii))),
        None => Stage::skipped("prenormal form unavailable"),
    };
    let height_width = polar.ok().map_or(HeightWidth::NotApplicable, polar::height_width_test);

    let mut verdict: Option<EmbeddingVerdict> = None;
    let not_ne = |c: Certificate, details: serde_json::Value| EmbeddingVerdict {
        status: EmbeddingStatus::NotNe,
        certificate: Some(c),
        details,
    };
    if half_plane {
        let p = f.map(|f| f.p());
        verdict = Some(not_ne(
            Certificate::HalfPlane,
            json!({ "p": p, "reason": "order of the first slot along the y-axis is even" }),
        ));
    }
    if verdict.is_none() && matches!(orbit, JetOrbit::Crosscap | JetOrbit::Parabolic) {
        verdict = Some(not_ne(Certificate::JetOrbit, json!({ "orbit": orbit })));
    }
    if verdict.is_none() {
        if let Some(s) = shear.ok().filter(|s| s.violates_claim1) {
            verdict = Some(not_ne(
                Certificate::Claim1Order,
                json!({
                    "p_slot": s.p_slot,
                    "orders": [s.p, s.q, s.r],
                    "polar_triangles": polar_evidence(&polar),
                }),
            ));
        }
    }
    if verdict.is_none() {
        if let HeightWidth::Fail(i) = height_width {
            verdict = Some(not_ne(
                Certificate::HeightWidth,
                json!({ "triangle": i, "polar_triangles": polar_evidence(&polar) }),
            ));
        }
    }

    let arc_criterion: Stage<ArcEstimate> = if verdict.is_some() {
        Stage::skipped("a symbolic obstruction was found")
    } else {
        Stage::from_result(metric::arc_criterion_estimate(
            m,
            &ArcPairs::Random(cfg.arc_pairs),
            &cfg.radii,
            cfg.resolution,
            cfg.seed,
        ))
    };
    let verdict = verdict.unwrap_or_else(|| match arc_criterion.ok() {
        Some(e) => EmbeddingVerdict {
            status: if e.growth_exponent.abs() < BOUNDED_GROWTH {
                EmbeddingStatus::LikelyNe
            } else {
                EmbeddingStatus::Inconclusive
            },
            certificate: Some(Certificate::Numeric),
            details: json!({ "k_estimate": e.k_estimate, "growth_exponent": e.growth_exponent }),
        },
        None => EmbeddingVerdict {
            status: EmbeddingStatus::Inconclusive,
            certificate: None,
            details: json!({ "reason": "no obstruction and no numeric evidence" }),
        },
    });

    let kcfg = KnotConfig {
        epsilon: cfg.epsilon,
        resolution: cfg.resolution,
        seed: cfg.seed,
        trials: cfg.projection_trials,
        force_numeric: cfg.force_numeric_knot,
    };
    let knot = if corank <= 1 && f.is_none() {
        Stage::skipped("prenormal form unavailable")
    } else {
        Stage::from_result(knot::knot_report(m, f, &kcfg))
    };

    if verdict.status == EmbeddingStatus::LikelyNe && orbit == JetOrbit::Shear {
        match knot.ok().map(|k| k.verdict) {
            Some(KnotVerdict::Nontrivial) => warnings.push(
                "contradiction: normal embedding forces local flatness and a trivial link, but the link is knotted; \
                 this is evidence against normal embedding"
                    .into(),
            ),
            Some(v) if v.is_trivial() => {}
            _ => warnings.push("local flatness cross-check unavailable: knot type undetermined".into()),
        }
    }

    Report {
        input: m.to_string(),
        jet: JetReport { corank, orbit },
        prenormal,
        cone,
        shear,
        polar,
        height_width,
        arc_criterion,
        knot,
        verdict,
        warnings,
    }
}

/// Parses and analyzes germ file text.
pub fn analyze_text(text: &str, cfg: &AnalysisConfig) -> Result<Report> {
    let m = crate::expr::parse_germ_file(text)?;
    if cfg.radii.len() < 4 {
        return Err(Error::Input("need at least 4 radii".into()));
    }
    Ok(analyze(&m, cfg))
}
