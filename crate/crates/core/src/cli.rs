//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_germ_file, MapGerm};
use crate::germ;
use crate::knot::{self, KnotConfig};
use crate::metric::{self, ArcPairs};
use crate::numeric::log_spaced;
use crate::polar;
use crate::verdict::{self, AnalysisConfig, Report};

pub const SCHEMA_ID: &str = "germkit-report/1";

#[derive(Parser, Debug)]
#[command(name = "germkit", version, about = "Lipschitz geometry of map germs (R^2,0) -> (R^4,0)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Series truncation degree.
    #[arg(long, default_value_t = 12)]
    degree: u32,
    /// Log-spaced radii `a:b:k`.
    #[arg(long, default_value = "1e-1:1e-3:5", value_parser = parse_radii)]
    radii: Radii,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Radius of the sphere cutting out the link.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full pipeline; writes the JSON report.
    Analyze {
        germ: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// 2-jet orbit.
    Jet { germ: PathBuf },
    /// Tangent cone of the image.
    Cone {
        germ: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Polar curve, discriminant and polar triangles.
    Polar {
        germ: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Knot type of the link.
    Knot {
        germ: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Draw the diagram even when triviality is certified.
        #[arg(long)]
        force_numeric: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Arc-criterion estimate of the inner/outer distance ratio.
    ArcTest {
        germ: PathBuf,
        #[arg(long, default_value_t = 64)]
        pairs: usize,
        /// Writes the mesh as `v`/`e` lines.
        #[arg(long)]
        mesh_dump: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs every `.germ` file of a directory and prints a summary table.
    Corpus {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone)]
struct Radii(Vec<f64>);

fn parse_radii(s: &str) -> std::result::Result<Radii, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, k] = parts.as_slice() else {
        return Err("expected a:b:k".into());
    };
    let a: f64 = a.parse().map_err(|_| format!("bad radius `{a}`"))?;
    let b: f64 = b.parse().map_err(|_| format!("bad radius `{b}`"))?;
    let k: usize = k.parse().map_err(|_| format!("bad count `{k}`"))?;
    if !(a > 0.0 && b > 0.0 && k >= 2) {
        return Err("radii must be positive and k >= 2".into());
    }
    Ok(Radii(log_spaced(a, b, k)))
}

impl Common {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            degree: self.degree,
            radii: self.radii.0.clone(),
            resolution: self.resolution,
            seed: self.seed,
            epsilon: self.epsilon,
            ..AnalysisConfig::default()
        }
    }
}

/// Top-level JSON document written by `analyze`.
#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub input: InputEcho,
    pub config: AnalysisConfig,
    pub report: Report,
}

#[derive(Debug, Serialize)]
pub struct InputEcho {
    pub file: String,
    pub germ: String,
}

pub fn report_document(file: &str, m: &MapGerm, cfg: &AnalysisConfig) -> ReportDocument {
    ReportDocument {
        schema: SCHEMA_ID,
        tool: "germkit",
        version: env!("CARGO_PKG_VERSION"),
        input: InputEcho {
            file: file.to_string(),
            germ: m.to_string(),
        },
        config: cfg.clone(),
        report: verdict::analyze(m, cfg),
    }
}

fn read_germ(path: &Path) -> Result<MapGerm> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_germ_file(&text)
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Io(e.to_string()))
}

/// One row of the corpus summary.
#[derive(Debug, Serialize)]
pub struct CorpusRow {
    pub file: String,
    pub orbit: String,
    pub status: String,
    pub certificate: String,
    pub knot: String,
    pub exit_code: i32,
}

fn corpus_row(path: &Path, cfg: &AnalysisConfig) -> CorpusRow {
    let file = file_label(path);
    match read_germ(path) {
        Ok(m) => {
            let r = verdict::analyze(&m, cfg);
            let name = |v: &dyn erased::Named| v.name();
            CorpusRow {
                file,
                orbit: name(&r.jet.orbit),
                status: name(&r.verdict.status),
                certificate: r.verdict.certificate.map_or("-".into(), |c| name(&c)),
                knot: r.knot.ok().map_or("-".into(), |k| name(&k.verdict)),
                exit_code: r.exit_code(),
            }
        }
        Err(e) => CorpusRow {
            file,
            orbit: "-".into(),
            status: format!("ERROR: {e}"),
            certificate: "-".into(),
            knot: "-".into(),
            exit_code: e.exit_code(),
        },
    }
}

mod erased {
    /// Serialized name of a unit enum variant.
    pub trait Named {
        fn name(&self) -> String;
    }

    impl<T: serde::Serialize> Named for T {
        fn name(&self) -> String {
            match serde_json::to_value(self) {
                Ok(serde_json::Value::String(s)) => s,
                Ok(v) => v.to_string(),
                Err(_) => "?".into(),
            }
        }
    }
}

pub fn corpus_table(rows: &[CorpusRow]) -> String {
    let mut out = format!(
        "{:<24} {:<12} {:<13} {:<13} {:<18}\n",
        "file", "orbit", "status", "certificate", "knot"
    );
    for r in rows {
        out += &format!(
            "{:<24} {:<12} {:<13} {:<13} {:<18}\n",
            r.file, r.orbit, r.status, r.certificate, r.knot
        );
    }
    out
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    match cli.command {
        Command::Analyze { germ, out: path, svg, common } => {
            let m = read_germ(&germ)?;
            let mut cfg = common.config();
            if cfg.radii.len() < 4 {
                return Err(Error::Input("need at least 4 radii".into()));
            }
            cfg.force_numeric_knot = svg.is_some();
            let doc = report_document(&file_label(&germ), &m, &cfg);
            let json = to_json(&doc)?;
            match path {
                Some(p) => {
                    write_file(&p, &json)?;
                    let v = &doc.report.verdict;
                    let cert = v.certificate.map_or("-".into(), |c| erased::Named::name(&c));
                    writeln!(out, "{} {}", erased::Named::name(&v.status), cert).map_err(io)?;
                }
                None => out.write_all(json.as_bytes()).map_err(io)?,
            }
            if let Some(p) = svg {
                let d = doc.report.knot.ok().and_then(|k| k.diagram.as_ref());
                match d {
                    Some(d) => write_file(&p, &d.svg)?,
                    None => return Err(Error::Input("no knot diagram available for SVG output".into())),
                }
            }
            Ok(doc.report.exit_code())
        }
        Command::Jet { germ } => {
            let m = read_germ(&germ)?;
            let orbit = germ::classify_2jet(&m);
            let name = erased::Named::name(&orbit);
            if orbit == germ::JetOrbit::NotCorank1 {
                writeln!(out, "{name} (corank {})", germ::corank(&m)).map_err(io)?;
            } else {
                writeln!(out, "{name}").map_err(io)?;
            }
            Ok(0)
        }
        Command::Cone { germ, common } => {
            let m = read_germ(&germ)?;
            let c = crate::cone::tangent_cone_of(&m, common.degree)?;
            out.write_all(to_json(&c)?.as_bytes()).map_err(io)?;
            Ok(0)
        }
        Command::Polar { germ, common } => {
            let m = read_germ(&germ)?;
            let f = germ::prenormalize(&m, common.degree)?;
            let data = polar::polar_data(&f, Some(&common.radii.0))?;
            let hw = polar::height_width_test(&data);
            let v = serde_json::json!({ "polar": data, "height_width": hw });
            out.write_all(to_json(&v)?.as_bytes()).map_err(io)?;
            Ok(0)
        }
        Command::Knot {
            germ,
            svg,
            force_numeric,
            common,
        } => {
            let m = read_germ(&germ)?;
            let f = match germ::corank(&m) {
                2 => None,
                _ => Some(germ::prenormalize(&m, common.degree)?),
            };
            let cfg = KnotConfig {
                epsilon: common.epsilon,
                resolution: common.resolution,
                seed: common.seed,
                force_numeric: force_numeric || svg.is_some(),
                ..KnotConfig::default()
            };
            let r = knot::knot_report(&m, f.as_ref(), &cfg)?;
            out.write_all(to_json(&r)?.as_bytes()).map_err(io)?;
            if let (Some(p), Some(d)) = (svg, r.diagram.as_ref()) {
                write_file(&p, &d.svg)?;
            }
            Ok(0)
        }
        Command::ArcTest {
            germ,
            pairs,
            mesh_dump,
            common,
        } => {
            let m = read_germ(&germ)?;
            let e = metric::arc_criterion_estimate(
                &m,
                &ArcPairs::Random(pairs),
                &common.radii.0,
                common.resolution,
                common.seed,
            )?;
            out.write_all(to_json(&e)?.as_bytes()).map_err(io)?;
            if let Some(p) = mesh_dump {
                let rmax = common.radii.0.iter().copied().fold(0.0, f64::max);
                let mesh = metric::sample_mesh(&m, rmax, common.resolution)?;
                let file = std::fs::File::create(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                mesh.dump(std::io::BufWriter::new(file)).map_err(io)?;
            }
            Ok(0)
        }
        Command::Corpus { dir, out: path, common } => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "germ"))
                .collect();
            files.sort();
            let cfg = common.config();
            let rows: Vec<CorpusRow> = std::thread::scope(|s| {
                let handles: Vec<_> = files.iter().map(|p| s.spawn(|| corpus_row(p, &cfg))).collect();
                handles.into_iter().map(|h| h.join().expect("corpus worker panicked")).collect()
            });
            let table = corpus_table(&rows);
            out.write_all(table.as_bytes()).map_err(io)?;
            if let Some(p) = path {
                write_file(&p, &to_json(&rows)?)?;
            }
            Ok(rows.iter().map(|r| r.exit_code).max().unwrap_or(0))
        }
    }
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
