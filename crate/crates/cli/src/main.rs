use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gj_facets::additivity::{additive_face_report, minimality_test, FaceClass, Minimality};
use gj_facets::catalog::{self, LiftedFunction};
use gj_facets::covering::{covering, covering_in_limits};
use gj_facets::perturbation::{extremality_certificate, lipschitz_epsilon, scaling_epsilon};
use gj_facets::pwl::Side;
use gj_facets::verify::{self, ClaimReport, LiftedOptions};
use gj_facets::{parse_qnum, Error};
use gjf::diagram::{render_svg, DiagramData, DiagramSpec};
use gjf::input::{load, Loaded};

const SCHEMA: &str = "gjf/1";

#[derive(Parser)]
#[command(
    name = "gjf",
    version,
    about = "Exact checks for Gomory-Johnson cut-generating functions"
)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Minus,
    At,
    Plus,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Minus => Side::Minus,
            SideArg::At => Side::At,
            SideArg::Plus => Side::Plus,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaceFormat {
    Text,
    Json,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Psi,
    KzhSlacks,
    KzhRank,
    Lifted,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Value (or one-sided limit) at a point.
    Eval {
        func: String,
        x: String,
        #[arg(long, value_enum, default_value = "at")]
        side: SideArg,
    },
    /// One-sided limit at a point.
    Limit {
        func: String,
        x: String,
        #[arg(long, value_enum)]
        side: SideArg,
    },
    Minimality {
        func: String,
    },
    /// Additive faces and limit cones of ΔP.
    AdditiveFaces {
        func: String,
        #[arg(long, value_enum, default_value = "text")]
        format: FaceFormat,
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Covering {
        func: String,
        /// Also use additivities that hold only in the limit.
        #[arg(long)]
        in_limits: bool,
    },
    /// Rank of the perturbation system after covering and refinement.
    PerturbationRank {
        func: String,
        #[arg(long)]
        in_limits: bool,
    },
    Epsilon {
        #[command(subcommand)]
        kind: EpsilonKind,
    },
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Samples per coset class on the additive faces (lifted suite).
        #[arg(long)]
        samples: Option<usize>,
    },
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// SVG of ΔP plus a JSON sidecar next to it.
    Diagram {
        func: String,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        no_additive: bool,
        #[arg(long)]
        no_cones: bool,
        #[arg(long)]
        color_by_nf: bool,
    },
}

#[derive(Subcommand)]
enum EpsilonKind {
    Lipschitz { func: String, perturbation: String },
    Scaling { func: String, perturbation: String },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List,
    Export {
        name: String,
        #[arg(long, value_enum, default_value = "text")]
        format: ExportFormat,
    },
}

/// Text and JSON forms of a result, and whether it counts as a failure.
struct Output {
    text: String,
    json: Value,
    failed: bool,
}

impl Output {
    fn ok(text: impl Into<String>, json: Value) -> Self {
        Output {
            text: text.into(),
            json,
            failed: false,
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NotMinimal(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(out) => {
            if cli.json {
                let mut v = out.json;
                if let Value::Object(m) = &mut v {
                    m.insert("schema".into(), json!(SCHEMA));
                }
                emit(&serde_json::to_string_pretty(&v).expect("json"));
            } else if !out.text.is_empty() {
                emit(out.text.trim_end());
            }
            ExitCode::from(if out.failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

// A closed pipe (`gjf ... | head`) is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn qnum_arg(text: &str) -> gj_facets::Result<gj_facets::QNum> {
    parse_qnum(text)
}

fn run(cmd: &Cmd) -> gj_facets::Result<Output> {
    match cmd {
        Cmd::Eval { func, x, side } => eval(func, x, (*side).into()),
        Cmd::Limit { func, x, side } => {
            let side: Side = (*side).into();
            if side == Side::At {
                return Err(Error::Other(
                    "limit needs --side minus or --side plus".into(),
                ));
            }
            eval(func, x, side)
        }
        Cmd::Minimality { func } => {
            let pi = load(func)?.pwl()?;
            let m = minimality_test(&pi);
            let text = match &m {
                Minimality::Minimal => format!("{}: minimal", pi.name),
                Minimality::NotMinimal { witness, all } => {
                    let mut t = format!("{}: not minimal\n  witness: {witness}", pi.name);
                    for v in all.iter().skip(1) {
                        t.push_str(&format!("\n  also: {v}"));
                    }
                    t
                }
            };
            Ok(Output {
                text,
                json: json!({ "function": pi.name, "minimality": m }),
                failed: !m.is_minimal(),
            })
        }
        Cmd::AdditiveFaces {
            func,
            format,
            output,
        } => additive_faces(func, *format, output.as_ref()),
        Cmd::Covering { func, in_limits } => {
            let pi = load(func)?.pwl()?;
            let (cx, report) = additive_face_report(&pi);
            let cov = if *in_limits {
                covering_in_limits(&cx, &report)
            } else {
                covering(&cx, &report)
            };
            let mut text = format!("{}: {} covered components\n", pi.name, cov.components.len());
            for (k, c) in cov.components.iter().enumerate() {
                let ivs: Vec<String> = c
                    .intervals
                    .iter()
                    .map(|i| format!("({}, {})", i.lo, i.hi))
                    .collect();
                text.push_str(&format!("  component {k}: {}\n", ivs.join(" ")));
            }
            let un: Vec<String> = cov
                .uncovered
                .iter()
                .map(|i| format!("({}, {})", i.lo, i.hi))
                .collect();
            text.push_str(&format!(
                "  uncovered: {}",
                if un.is_empty() {
                    "none".into()
                } else {
                    un.join(" ")
                }
            ));
            Ok(Output::ok(
                text,
                json!({ "function": pi.name, "covering": cov }),
            ))
        }
        Cmd::PerturbationRank { func, in_limits } => {
            let pi = load(func)?.pwl()?;
            let cert = extremality_certificate(&pi, *in_limits)?;
            let rank = match cert.rank {
                Some(r) => format!("rank {r}"),
                None => "rank not computed while intervals remain uncovered".to_string(),
            };
            let text = format!(
                "{}: {} variables, {rank}, {} components, {} uncovered intervals{}",
                pi.name,
                cert.variables,
                cert.components,
                cert.uncovered.len(),
                if cert.certifies_extreme() {
                    "; no nonzero perturbation"
                } else {
                    ""
                }
            );
            Ok(Output::ok(
                text,
                json!({ "function": pi.name, "certificate": cert, "certifies_extreme": cert.certifies_extreme() }),
            ))
        }
        Cmd::Epsilon { kind } => epsilon(kind),
        Cmd::Verify { suite, samples } => {
            let mut opts = LiftedOptions::default();
            if let Some(n) = samples {
                opts.samples_per_class = *n;
            }
            let run_one = |s: Suite| -> ClaimReport {
                let t = Instant::now();
                let r = match s {
                    Suite::Psi => verify::verify_psi_separation(),
                    Suite::KzhSlacks => verify::verify_kzh_claim_slacks(),
                    Suite::KzhRank => verify::verify_kzh_perturbation_rank(),
                    Suite::Lifted => verify::verify_lifted_with(&LiftedFunction::new(), &opts),
                    Suite::All => unreachable!(),
                };
                eprintln!("{}: {:.2} s", r.claim, t.elapsed().as_secs_f64());
                r
            };
            let reports: Vec<ClaimReport> = match suite {
                Suite::All => [Suite::Psi, Suite::KzhSlacks, Suite::KzhRank, Suite::Lifted]
                    .into_iter()
                    .map(run_one)
                    .collect(),
                s => vec![run_one(*s)],
            };
            let failed = reports.iter().any(|r| !r.is_verified());
            let text = reports
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output {
                text,
                json: json!({ "reports": reports }),
                failed,
            })
        }
        Cmd::Catalog { cmd } => match cmd {
            CatalogCmd::List => {
                let text = catalog::CATALOG_NAMES.join("\n");
                Ok(Output::ok(
                    text,
                    json!({ "functions": catalog::CATALOG_NAMES }),
                ))
            }
            CatalogCmd::Export { name, format } => {
                let pi = catalog::by_name(name)?;
                let text = match format {
                    ExportFormat::Text => pi.to_text(),
                    ExportFormat::Json => serde_json::to_string_pretty(&pi).expect("json"),
                };
                Ok(Output::ok(text, json!({ "function": pi })))
            }
        },
        Cmd::Diagram {
            func,
            output,
            no_additive,
            no_cones,
            color_by_nf,
        } => {
            let (pi, note) = match load(func)? {
                Loaded::Pwl(p) => (p, None),
                Loaded::Lifted(lf) => (
                    lf.base.clone(),
                    Some("kzh_lifted drawn through its piecewise linear base kzh".to_string()),
                ),
            };
            let spec = DiagramSpec {
                show_additive: !no_additive,
                show_limit_cones: !no_cones,
                color_by_nf: *color_by_nf,
                note: note.clone(),
            };
            let data = DiagramData::build(&pi, note);
            let sidecar = output.with_extension("json");
            write_file(output, &render_svg(&data, &spec))?;
            write_file(&sidecar, &data.to_json())?;
            Ok(Output::ok(
                format!("wrote {} and {}", output.display(), sidecar.display()),
                json!({ "svg": output, "sidecar": sidecar }),
            ))
        }
    }
}

fn write_file(path: &PathBuf, contents: &str) -> gj_facets::Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Other(format!("cannot write {}: {e}", path.display())))
}

fn eval(func: &str, x: &str, side: Side) -> gj_facets::Result<Output> {
    let x = qnum_arg(x)?;
    let v = match load(func)? {
        Loaded::Pwl(pi) => pi.limit(&x, side),
        Loaded::Lifted(lf) => {
            if side != Side::At {
                // the lifted function has no one-sided limits on the special intervals
                return Err(Error::NotPiecewiseLinear);
            }
            lf.eval(&x)
        }
    };
    Ok(Output::ok(
        v.to_string(),
        json!({ "x": x, "side": side, "value": v }),
    ))
}

fn additive_faces(
    func: &str,
    format: FaceFormat,
    output: Option<&PathBuf>,
) -> gj_facets::Result<Output> {
    let pi = load(func)?.pwl()?;
    let data = DiagramData::build(&pi, None);
    let contents = match format {
        FaceFormat::Svg => render_svg(&data, &DiagramSpec::default()),
        FaceFormat::Json => data.to_json(),
        FaceFormat::Text => {
            let mut t = String::new();
            for f in data.faces.iter().filter(|f| f.class == FaceClass::Additive) {
                t.push_str(&format!("additive {}\n", f.name));
            }
            for lc in &data.limit_cones {
                t.push_str(&format!(
                    "limit {} on {}\n",
                    data.faces[lc.face].name, data.faces[lc.sub].name
                ));
            }
            t
        }
    };
    match output {
        Some(path) => {
            write_file(path, &contents)?;
            Ok(Output::ok(
                format!("wrote {}", path.display()),
                json!({ "output": path }),
            ))
        }
        None => {
            let counts = json!({
                "additive": data.faces.iter().filter(|f| f.class == FaceClass::Additive).count(),
                "limit_cones": data.limit_cones.len(),
            });
            let json = match format {
                FaceFormat::Json => serde_json::from_str(&contents).expect("own json"),
                _ => counts,
            };
            Ok(Output::ok(contents, json))
        }
    }
}

fn epsilon(kind: &EpsilonKind) -> gj_facets::Result<Output> {
    match kind {
        EpsilonKind::Lipschitz { func, perturbation } => {
            let pi = load(func)?.pwl()?;
            let pibar = load(perturbation)?.pwl()?;
            let e = lipschitz_epsilon(&pi, &pibar)?;
            let text = match &e.epsilon {
                Some(eps) => format!(
                    "epsilon = {eps}\n  m = {}\n  M = {}\n  C = {}",
                    e.m, e.big_m, e.c
                ),
                None => format!(
                    "epsilon unbounded (perturbation has no slack)\n  m = {}",
                    e.m
                ),
            };
            Ok(Output::ok(text, json!({ "lipschitz": e })))
        }
        EpsilonKind::Scaling { func, perturbation } => {
            let pi = load(func)?.pwl()?;
            let pibar = load(perturbation)?.pwl()?;
            let eps = scaling_epsilon(&pi, &pibar)?;
            Ok(Output::ok(
                format!("epsilon = {eps}"),
                json!({ "epsilon": eps }),
            ))
        }
    }
}
