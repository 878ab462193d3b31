use std::fs;
use std::path::Path;

use hypocone::cones::{
    cone_g0, hn_membership_in, hn_sample_def1, ConeSampling, CovectorFamily, CovectorPath, Def1Outcome,
    LimitOptions, Subspace,
};
use hypocone::estimates::{growth_report, TorusModel};
use hypocone::frame::{Frame, Point};
use hypocone::metric::{cc_distance, cone_convergence_check, horizontal_flow, SolverOptions};
use hypocone::model::{parse_model, parse_operator, ModelFile};
use hypocone::rational::{fmt_q, parse_q, to_f64, Q};
use hypocone::symbols::{
    check_max_hypoelliptic, injectivity_margin, symbol, HypoOptions, NCPoly, RepCatalog, Representation,
    SymbolOperator,
};
use num_complex::Complex;
use serde_json::json;

use crate::{CliError, Command, Global};

type Out = Result<Vec<u8>, CliError>;

fn load_model(g: &Global) -> Result<ModelFile, CliError> {
    let path = g.model.as_ref().ok_or_else(|| CliError::usage("--model is required"))?;
    let text = fs::read_to_string(path).map_err(|e| CliError {
        code: 2,
        message: format!("cannot read model {}: {e}", path.display()),
    })?;
    Ok(parse_model(&text)?)
}

fn load_operator(path: &Path, frame: &Frame) -> Result<NCPoly, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError {
        code: 2,
        message: format!("cannot read operator {}: {e}", path.display()),
    })?;
    Ok(parse_operator(&text, frame.dimension(), frame.generators())?)
}

fn point(s: &str, frame: &Frame) -> Result<Point, CliError> {
    let p = Point::parse(s).map_err(|e| CliError::usage(format!("bad point {s:?}: {e}")))?;
    if p.dim() != frame.dimension() {
        return Err(CliError::usage(format!(
            "point {s:?} has {} coordinates, the model has {}",
            p.dim(),
            frame.dimension()
        )));
    }
    Ok(p)
}

fn vector(s: &str, len: usize) -> Result<Vec<f64>, CliError> {
    let v = s
        .split(',')
        .map(|c| parse_q(c).map(|q| to_f64(&q)))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| CliError::usage(format!("bad vector {s:?}: {e}")))?;
    if v.len() != len {
        return Err(CliError::usage(format!("vector {s:?} needs {len} entries")));
    }
    Ok(v)
}

fn rows(s: &str, len: usize) -> Result<Vec<Vec<f64>>, CliError> {
    s.split(';').filter(|r| !r.trim().is_empty()).map(|r| vector(r, len)).collect()
}

fn exact_rows(s: &str, len: usize) -> Result<Option<Vec<Vec<Q>>>, CliError> {
    let mut out = Vec::new();
    for r in s.split(';').filter(|r| !r.trim().is_empty()) {
        let Ok(v) = r.split(',').map(parse_q).collect::<Result<Vec<Q>, _>>() else {
            return Ok(None);
        };
        if v.len() != len {
            return Err(CliError::usage(format!("row {r:?} needs {len} entries")));
        }
        out.push(v);
    }
    Ok(Some(out))
}

fn single_k(g: &Global, default: usize) -> Result<usize, CliError> {
    match &g.k {
        None => Ok(default),
        Some(s) => s
            .trim()
            .parse()
            .ok()
            .filter(|k| *k > 0)
            .ok_or_else(|| CliError::usage(format!("--K expects a positive integer, got {s:?}"))),
    }
}

fn k_list(g: &Global) -> Result<Vec<usize>, CliError> {
    let s = g.k.as_deref().unwrap_or("8,16,24,32");
    s.split(',')
        .map(|k| k.trim().parse::<usize>().ok().filter(|k| *k > 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CliError::usage(format!("--K expects positive integers, got {s:?}")))
}

fn solver_options(g: &Global) -> SolverOptions {
    let d = SolverOptions::default();
    SolverOptions {
        steps: g.steps.unwrap_or(d.steps),
        restarts: g.restarts.unwrap_or(d.restarts),
        endpoint_tol: g.tol.unwrap_or(d.endpoint_tol),
        seed: g.seed,
        ..d
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Out {
    w.into_inner().map_err(|e| CliError::usage(e.to_string()))
}

fn describe_rows(s: &Subspace) -> String {
    match s.exact() {
        Some(rows) => rows
            .iter()
            .map(|r| r.iter().map(fmt_q).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";"),
        None => s
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| format!("{x:.9}")).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn parse_rep(s: &str, frame: &Frame, k: usize) -> Result<Representation, CliError> {
    let bad = || CliError::usage(format!("bad representation {s:?}; use char:a,b or schrodinger:+1"));
    let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "char" => {
            let mu = arg.split(',').map(parse_q).collect::<Result<Vec<Q>, _>>().map_err(|_| bad())?;
            if mu.len() != frame.generators() {
                return Err(CliError::usage(format!("character needs {} entries", frame.generators())));
            }
            Ok(Representation::character(mu))
        }
        "schrodinger" => {
            let eps = match arg.trim() {
                "+1" | "1" => 1,
                "-1" => -1,
                _ => return Err(bad()),
            };
            let hall = frame.basis();
            if hall.generators() != 2 || hall.step() < 2 {
                return Err(CliError::usage("Schrodinger representations need two generators and step >= 2"));
            }
            Ok(Representation::schrodinger(eps, k))
        }
        _ => Err(bad()),
    }
}

fn fmt_complex(z: &Complex<Q>) -> String {
    let re = fmt_q(&z.re);
    if z.im == Q::from_integer(0.into()) {
        return re;
    }
    let im = fmt_q(&z.im);
    if im.starts_with('-') {
        format!("{re}{im}i")
    } else {
        format!("{re}+{im}i")
    }
}

pub fn run(cmd: &Command, g: &Global) -> Out {
    let model = load_model(g)?;
    let frame = &model.frame;
    let hall = frame.basis();
    match cmd {
        Command::Basis => {
            let words: Vec<_> = (0..hall.dim())
                .map(|k| json!({"index": k + 1, "label": hall.label(k), "degree": hall.degree(k)}))
                .collect();
            let mut consts = Vec::new();
            for (&(i, j), terms) in hall.bracket_table() {
                for (k, c) in terms {
                    consts.push(json!({"i": i + 1, "j": j + 1, "k": k + 1, "c": fmt_q(c)}));
                }
            }
            let v = json!({
                "generators": hall.generators(),
                "step": hall.step(),
                "dimension": hall.dim(),
                "graded_dimensions": hall.graded_dims(),
                "words": words,
                "structure_constants": consts,
            });
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::usage(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Command::Brackets => {
            let mut w = csv_writer();
            w.write_record(["index", "label", "degree", "field"])?;
            for k in 0..hall.dim() {
                w.write_record([
                    (k + 1).to_string(),
                    hall.label(k),
                    hall.degree(k).to_string(),
                    frame.anchor(k).to_string(),
                ])?;
            }
            finish(w)
        }
        Command::Cones { point: p } => {
            let x = point(p, frame)?;
            let cone = cone_g0(frame, &x, &ConeSampling::default())?;
            let mut w = csv_writer();
            w.write_record(["stratum", "subspace", "dim", "basis", "subalgebra", "residual", "approaches"])?;
            for m in &cone.members {
                w.write_record([
                    m.stratum.clone(),
                    m.subspace.describe(hall),
                    m.subspace.dim().to_string(),
                    describe_rows(&m.subspace),
                    m.subalgebra.to_string(),
                    format!("{:.3e}", m.residual),
                    m.approaches.join("|"),
                ])?;
            }
            for d in &cone.divergent {
                eprintln!("divergent approach {}: {}", d.path, d.reason);
            }
            if !cone.closure_ok() {
                eprintln!("warning: sampled cone is not closed under the sampled conjugations");
            }
            finish(w)
        }
        Command::Hn { point: p, functional } => {
            let x = point(p, frame)?;
            let xi = vector(functional, hall.dim())?;
            let tol = g.tol.unwrap_or(1e-7);
            let cone = cone_g0(frame, &x, &ConeSampling::default())?;
            let def2 = hn_membership_in(hall, &cone, &xi, tol)?;
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut def1 = Vec::new();
            let mut def1_member = norm == 0.0;
            for m in &cone.members {
                let cp = CovectorPath {
                    path: m.path().clone(),
                    covector: CovectorFamily::Projected(xi.clone()),
                };
                match hn_sample_def1(frame, &cp, &LimitOptions::default())? {
                    Def1Outcome::Converged { limit, residual, .. } => {
                        let gap = limit.iter().zip(&xi).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                        let hit = gap <= 1e-6 * norm.max(1.0);
                        def1_member |= hit;
                        def1.push(json!({
                            "path": m.path().to_string(),
                            "limit": limit,
                            "residual": residual,
                            "attains_functional": hit,
                        }));
                    }
                    Def1Outcome::Diverged(d) => def1.push(json!({"path": d.path, "diverged": d.reason})),
                }
            }
            let v = json!({
                "point": x.to_string(),
                "functional": xi,
                "def2": {
                    "member": def2.member,
                    "defect": def2.defect,
                    "witness": def2.witness.map(|i| cone.members[i].subspace.describe(hall)),
                    "orbit_element": def2.orbit_element,
                },
                "def1": {"member": def1_member, "paths": def1},
            });
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::usage(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Command::Symbol { op, point: p, rep } => {
            let x = point(p, frame)?;
            let op = load_operator(op, frame)?;
            let rep = parse_rep(rep, frame, single_k(g, 64)?)?;
            let s = symbol(hall, &op, &x, &rep)?;
            let margin = injectivity_margin(&s, 0.5);
            let mut w = csv_writer();
            match &s {
                SymbolOperator::Scalar { exact: Some(v), .. } => {
                    w.write_record(["value", "margin"])?;
                    w.write_record([fmt_complex(v), fmt_f(margin)])?;
                }
                _ => {
                    w.write_record(["index", "re", "im", "margin"])?;
                    for (i, z) in s.interior_eigenvalues(0.5).iter().enumerate() {
                        w.write_record([i.to_string(), fmt_f(z.re), fmt_f(z.im), fmt_f(margin)])?;
                    }
                }
            }
            finish(w)
        }
        Command::HypoCheck { op, grid } => {
            let op = load_operator(op, frame)?;
            let pts = match model.grids.get(grid) {
                Some(p) => p.clone(),
                None => grid
                    .split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| point(s, frame))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let catalog = RepCatalog::builtin(hall, single_k(g, 64)?);
            let opts = HypoOptions {
                tol: g.tol.unwrap_or(1e-6),
                ..HypoOptions::default()
            };
            let report = check_max_hypoelliptic(frame, &op, &pts, &catalog, &opts)?;
            let mut w = csv_writer();
            w.write_record(["point", "strata", "tested", "excluded", "min_margin", "worst", "verdict"])?;
            for v in &report.points {
                let verdict = if v.hypoelliptic {
                    format!("maximal hypoelliptic at {}", v.point)
                } else {
                    format!("NOT maximal hypoelliptic at {}", v.point)
                };
                w.write_record([
                    v.point.to_string(),
                    v.strata.join("|"),
                    v.margins.len().to_string(),
                    v.excluded.len().to_string(),
                    fmt_f(v.min_margin),
                    v.worst().map_or(String::new(), |m| m.rep.clone()),
                    verdict,
                ])?;
            }
            eprintln!(
                "global verdict: {}",
                if report.hypoelliptic { "maximal hypoelliptic on the grid" } else { "NOT maximal hypoelliptic" }
            );
            finish(w)
        }
        Command::CcDist { from, to, trajectory } => {
            let x = point(from, frame)?;
            let y = point(to, frame)?;
            let d = cc_distance(frame, &x, &y, &solver_options(g))?;
            if let Some(path) = trajectory {
                let tr = horizontal_flow(frame, &x, &d.controls, solver_options(g).substeps)?;
                let mut w = csv_writer();
                let mut head = vec!["step".to_string(), "t".to_string()];
                head.extend((1..=frame.dimension()).map(|i| format!("x{i}")));
                head.extend((1..=frame.generators()).map(|i| format!("u{i}")));
                w.write_record(&head)?;
                let steps = d.controls.steps();
                for (i, s) in tr.samples.iter().enumerate() {
                    let mut rec = vec![i.to_string(), fmt_f(i as f64 / steps as f64)];
                    rec.extend(s.iter().map(|v| fmt_f(*v)));
                    if i < steps {
                        rec.extend(d.controls.row(i).iter().map(|v| fmt_f(*v)));
                    } else {
                        rec.extend((0..frame.generators()).map(|_| String::new()));
                    }
                    w.write_record(&rec)?;
                }
                fs::write(path, finish(w)?)?;
            }
            let mut w = csv_writer();
            w.write_record(["value", "residual", "converged", "restarts", "converged_restarts"])?;
            w.write_record([
                fmt_f(d.value),
                format!("{:.3e}", d.residual),
                d.converged.to_string(),
                d.restarts.to_string(),
                d.converged_restarts.to_string(),
            ])?;
            finish(w)
        }
        Command::ConeCheck {
            point: p,
            subspace,
            directions,
            t,
        } => {
            let x = point(p, frame)?;
            let dim = hall.dim();
            let h = match subspace {
                Some(s) => match exact_rows(s, dim)? {
                    Some(r) => Subspace::from_exact(dim, r)?,
                    None => Subspace::from_rows(dim, &rows(s, dim)?)?,
                },
                None => {
                    let cone = cone_g0(frame, &x, &ConeSampling::default())?;
                    cone.members
                        .into_iter()
                        .find(|m| m.approaches.iter().any(|a| a == "fixed"))
                        .map(|m| m.subspace)
                        .ok_or_else(|| CliError::usage("no limit along the fixed path; pass --subspace"))?
                }
            };
            let dirs = match directions {
                Some(s) => rows(s, dim)?,
                None => (0..dim)
                    .map(|k| (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
                    .collect(),
            };
            let ts: Vec<f64> = t
                .split(',')
                .map(|v| parse_q(v).map(|q| to_f64(&q)))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::usage(format!("bad --t: {e}")))?;
            let table = cone_convergence_check(frame, &x, &h, &dirs, &ts, &solver_options(g))?;
            let mut w = csv_writer();
            w.write_record(["direction", "t", "ratio", "reference", "residual", "error"])?;
            let opt = |v: Option<f64>| v.map_or(String::new(), fmt_f);
            for c in &table.cells {
                let dir = table.directions[c.direction]
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                w.write_record([
                    dir,
                    c.t.to_string(),
                    opt(c.ratio),
                    opt(c.reference),
                    opt(c.residual),
                    c.error.clone().unwrap_or_default(),
                ])?;
            }
            let bytes = finish(w)?;
            if let Some(c) = table.cells.iter().find(|c| c.error.is_some()) {
                return Err(CliError {
                    code: 3,
                    message: format!(
                        "cell t={} failed: {}\n{}",
                        c.t,
                        c.error.clone().unwrap_or_default(),
                        String::from_utf8_lossy(&bytes)
                    ),
                });
            }
            let slack = 10.0 * solver_options(g).endpoint_tol;
            for i in 0..dirs.len() {
                if !table.decreasing(i, slack) {
                    eprintln!("note: residuals for direction {} do not decrease with t", i + 1);
                }
            }
            Ok(bytes)
        }
        Command::Estimate { op, test } => {
            let torus = TorusModel::new(frame.clone())?;
            let d = load_operator(op, frame)?;
            let p = load_operator(test, frame)?;
            let report = growth_report(&torus, &p, &d, &k_list(g)?)?;
            let mut out = format!("# {}\n", report.header).into_bytes();
            let mut w = csv_writer();
            w.write_record(["K", "C_K", "spillover", "slope", "classification"])?;
            for r in &report.rows {
                w.write_record([
                    r.cutoff.to_string(),
                    fmt_f(r.constant),
                    fmt_f(r.spillover),
                    format!("{:.6}", report.slope),
                    report.classification.to_string(),
                ])?;
            }
            out.extend(finish(w)?);
            Ok(out)
        }
    }
}
