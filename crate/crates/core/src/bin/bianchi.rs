//! Command-line front end: list models and checks, run verification
//! tiers, classify four-dimensional shrinkers, and dump tensors at a
//! point.
//!
//! Exit codes: 0 when everything requested passed (or a definite
//! classification was reached), 1 when a check failed or a model is not a
//! (rigid) soliton, 2 on usage or model errors.

use bianchi::curvature::{
    bach_from_parts, curvature_bundle, d_tensor_from_parts,
};
use bianchi::geometry::ModelSpec;
use bianchi::models::{builtin_models, find_model, load_model, sample_points, ModelError};
use bianchi::tensor::TensorJet;
use bianchi::verify::{
    classify_model, list_checks, reports_to_json, reports_to_text, run_ids, CheckReport,
    PointWorkspace, Tier,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bianchi",
    version,
    about = "Numeric verification of curvature identities on gradient shrinking Ricci soliton charts"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ListKind {
    Models,
    Checks,
}

#[derive(Subcommand)]
enum Cmd {
    /// List builtin models or registered checks.
    List {
        kind: ListKind,
        /// Restrict the check listing to one tier.
        #[arg(long)]
        tier: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run identity checks over a seeded sample plan.
    Verify {
        /// Builtin model name or path to a model file.
        #[arg(long)]
        model: String,
        /// Tier to run: A, B, C or all.
        #[arg(long)]
        tier: Option<String>,
        /// Explicit check id; repeatable.
        #[arg(long = "check")]
        checks: Vec<String>,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tolerance override for every selected check.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a four-dimensional model against the rigid shrinker cases.
    Classify {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the components of a named tensor at a point.
    Tensor {
        #[arg(long)]
        model: String,
        /// One of: riemann ricci scalar weyl cotton bach dtensor
        /// div1rm..div4rm div1w..div4w soliton_residual
        #[arg(long)]
        tensor: String,
        /// Coordinate assignment, e.g. x1=1,x2=0,x3=0,x4=0
        #[arg(long)]
        point: String,
        /// Suppress components at or below this magnitude.
        #[arg(long, default_value_t = 1e-12)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::List {
            kind,
            tier,
            format,
            out,
        } => cmd_list(kind, tier, format, out),
        Cmd::Verify {
            model,
            tier,
            checks,
            points,
            seed,
            tol,
            format,
            out,
        } => cmd_verify(&model, tier, checks, points, seed, tol, format, out),
        Cmd::Classify {
            model,
            points,
            seed,
            tol,
            format,
            out,
        } => cmd_classify(&model, points, seed, tol, format, out),
        Cmd::Tensor {
            model,
            tensor,
            point,
            threshold,
            format,
            out,
        } => cmd_tensor(&model, &tensor, &point, threshold, format, out),
    }
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), String> {
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(&path, format!("{text}\n"))
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
    }
}

fn resolve_model(selector: &str) -> Result<ModelSpec, String> {
    match find_model(selector) {
        Ok(entry) => Ok(entry.spec),
        Err(ModelError::UnknownModel(_)) => {
            let path = Path::new(selector);
            if path.exists() {
                load_model(path).map_err(|e| format!("model file `{selector}`: {e}"))
            } else {
                Err(format!(
                    "`{selector}` is neither a builtin model nor an existing file"
                ))
            }
        }
        Err(e) => Err(e.to_string()),
    }
}

fn parse_tiers(tier: &str) -> Result<Vec<Tier>, String> {
    if tier.eq_ignore_ascii_case("all") {
        return Ok(vec![Tier::A, Tier::B, Tier::C]);
    }
    tier.parse::<Tier>().map(|t| vec![t])
}

fn cmd_list(
    kind: ListKind,
    tier: Option<String>,
    format: Format,
    out: Option<PathBuf>,
) -> Result<ExitCode, String> {
    let tiers = match &tier {
        Some(t) => Some(parse_tiers(t)?),
        None => None,
    };
    let text = match kind {
        ListKind::Models => {
            let models = builtin_models();
            match format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = models
                        .iter()
                        .map(|e| {
                            serde_json::json!({
                                "name": e.spec.name,
                                "dimension": e.spec.dim,
                                "coordinates": e.spec.coords,
                                "lambda": e.spec.lambda,
                                "shrinker": e.is_shrinker(),
                                "expected_class": e.spec.expected_class,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&rows).unwrap()
                }
                Format::Text => {
                    let mut s = format!(
                        "{:<16} {:>3}  {:<9} {:<18} coordinates\n",
                        "name", "dim", "shrinker", "expected"
                    );
                    for e in &models {
                        s.push_str(&format!(
                            "{:<16} {:>3}  {:<9} {:<18} {}\n",
                            e.spec.name,
                            e.spec.dim,
                            if e.is_shrinker() { "yes" } else { "no" },
                            e.spec.expected_class.as_deref().unwrap_or("-"),
                            e.spec.coords.join(","),
                        ));
                    }
                    s.pop();
                    s
                }
            }
        }
        ListKind::Checks => {
            let checks: Vec<_> = list_checks()
                .into_iter()
                .filter(|c| tiers.as_ref().is_none_or(|ts| ts.contains(&c.tier)))
                .collect();
            match format {
                Format::Json => serde_json::to_string_pretty(&checks).unwrap(),
                Format::Text => {
                    let mut s = format!("{:<22} {:<4} {:>8}  description\n", "id", "tier", "tol");
                    for c in &checks {
                        s.push_str(&format!(
                            "{:<22} {:<4} {:>8.0e}  {}\n",
                            c.id, c.tier, c.default_tol, c.description
                        ));
                    }
                    s.pop();
                    s
                }
            }
        }
    };
    emit(&text, out)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    model: &str,
    tier: Option<String>,
    checks: Vec<String>,
    points: usize,
    seed: u64,
    tol: Option<f64>,
    format: Format,
    out: Option<PathBuf>,
) -> Result<ExitCode, String> {
    if points < 1 {
        return Err("--points must be at least 1".into());
    }
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err("--tol must be positive".into());
        }
    }
    if tier.is_none() && checks.is_empty() {
        return Err("nothing to run: pass --tier or at least one --check".into());
    }
    let spec = resolve_model(model)?;
    let mut ids: Vec<String> = checks;
    if let Some(t) = &tier {
        for t in parse_tiers(t)? {
            ids.extend(
                list_checks()
                    .into_iter()
                    .filter(|c| c.tier == t)
                    .map(|c| c.id),
            );
        }
    }
    ids.sort();
    ids.dedup();
    let plan = sample_points(&spec, points, seed).map_err(|e| e.to_string())?;
    let reports = run_ids(&ids, &spec, &plan, tol).map_err(|e| e.to_string())?;

    let text = match format {
        Format::Json => reports_to_json(&reports),
        Format::Text => {
            let mut s = format!(
                "model {}  points {}  seed {}\n",
                spec.name, points, seed
            );
            s.push_str(&reports_to_text(&reports));
            s.push_str(&summary_line(&reports));
            s
        }
    };
    emit(&text, out)?;
    let failed = reports.iter().any(|r| r.is_applicable() && !r.pass);
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn summary_line(reports: &[CheckReport]) -> String {
    let passed = reports.iter().filter(|r| r.is_applicable() && r.pass).count();
    let failed = reports.iter().filter(|r| r.is_applicable() && !r.pass).count();
    let na = reports.iter().filter(|r| !r.is_applicable()).count();
    format!("{passed} passed, {failed} failed, {na} not applicable")
}

fn cmd_classify(
    model: &str,
    points: usize,
    seed: u64,
    tol: f64,
    format: Format,
    out: Option<PathBuf>,
) -> Result<ExitCode, String> {
    if points < 1 {
        return Err("--points must be at least 1".into());
    }
    if !(tol > 0.0) {
        return Err("--tol must be positive".into());
    }
    let spec = resolve_model(model)?;
    let plan = sample_points(&spec, points, seed).map_err(|e| e.to_string())?;
    let result = classify_model(&spec, &plan, tol).map_err(|e| e.to_string())?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&result).unwrap(),
        Format::Text => {
            let mut s = format!("verdict: {}\n", result.verdict);
            if let Some(r) = result.r_over_lambda {
                s.push_str(&format!("R/lambda: {r:.6}\n"));
            }
            if let Some(eigs) = &result.ricci_eigenvalues_over_lambda {
                let rendered: Vec<String> = eigs.iter().map(|e| format!("{e:.6}")).collect();
                s.push_str(&format!(
                    "Ricci eigenvalues / lambda: ({})\n",
                    rendered.join(", ")
                ));
            }
            s.push_str(&format!(
                "max soliton residual: {:.3e}\nmax |grad R|: {:.3e}\n|Ric|^2 - lambda R gap: {:.3e}",
                result.diagnostics.soliton_residual,
                result.diagnostics.max_grad_r,
                result.diagnostics.ric2_gap,
            ));
            s
        }
    };
    emit(&text, out)?;
    Ok(if result.verdict.is_definite() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_point(spec: &ModelSpec, text: &str) -> Result<Vec<f64>, String> {
    let mut point = vec![f64::NAN; spec.dim];
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("bad point component `{part}`, expected name=value"))?;
        let idx = spec
            .coords
            .iter()
            .position(|c| c == name.trim())
            .ok_or_else(|| format!("unknown coordinate `{}`", name.trim()))?;
        point[idx] = value
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{}` for `{}`", value.trim(), name.trim()))?;
    }
    for (i, v) in point.iter().enumerate() {
        if v.is_nan() {
            return Err(format!("point is missing coordinate `{}`", spec.coords[i]));
        }
        let (lo, hi) = spec.domain[i];
        if *v < lo || *v > hi {
            return Err(format!(
                "coordinate `{}` = {v} outside the domain [{lo}, {hi}]",
                spec.coords[i]
            ));
        }
    }
    Ok(point)
}

fn cmd_tensor(
    model: &str,
    tensor: &str,
    point_text: &str,
    threshold: f64,
    format: Format,
    out: Option<PathBuf>,
) -> Result<ExitCode, String> {
    let spec = resolve_model(model)?;
    let point = parse_point(&spec, point_text)?;
    let ws = PointWorkspace::new(&spec, &point).map_err(|e| e.to_string())?;
    let t = named_tensor(&ws, tensor)?;
    let norm_sq = if t.rank() == 0 {
        let v = t.as_scalar().value();
        v * v
    } else {
        ws.ctx.norm_sq(&t).value()
    };

    let text = match format {
        Format::Json => {
            let dims = vec![spec.dim; t.rank()];
            let values: Vec<f64> = t.components().iter().map(|j| j.value()).collect();
            serde_json::to_string_pretty(&serde_json::json!({
                "model": spec.name,
                "tensor": tensor,
                "point": point,
                "shape": dims,
                "components": nest(&values, spec.dim, t.rank()),
                "norm_sq": norm_sq,
            }))
            .unwrap()
        }
        Format::Text => {
            let mut s = String::new();
            if t.rank() == 0 {
                s.push_str(&format!("{tensor} = {}\n", t.as_scalar().value()));
            } else {
                let mut any = false;
                let mut idx = vec![0usize; t.rank()];
                loop {
                    let v = t.get(&idx).value();
                    if v.abs() > threshold {
                        any = true;
                        let labels: Vec<&str> =
                            idx.iter().map(|&i| spec.coords[i].as_str()).collect();
                        s.push_str(&format!("{tensor}[{}] = {v}\n", labels.join(",")));
                    }
                    let mut k = t.rank();
                    loop {
                        if k == 0 {
                            idx.clear();
                            break;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < spec.dim {
                            break;
                        }
                        idx[k] = 0;
                    }
                    if idx.is_empty() {
                        break;
                    }
                }
                if !any {
                    s.push_str(&format!("all components zero (threshold {threshold:e})\n"));
                }
            }
            s.push_str(&format!("|T|^2 = {norm_sq}"));
            s
        }
    };
    emit(&text, out)?;
    Ok(ExitCode::SUCCESS)
}

/// Dense nested-array rendering of tensor components.
fn nest(values: &[f64], dim: usize, rank: usize) -> serde_json::Value {
    if rank == 0 {
        return serde_json::json!(values[0]);
    }
    let stride = values.len() / dim;
    let parts: Vec<serde_json::Value> = (0..dim)
        .map(|i| nest(&values[i * stride..(i + 1) * stride], dim, rank - 1))
        .collect();
    serde_json::Value::Array(parts)
}

fn named_tensor(ws: &PointWorkspace, name: &str) -> Result<TensorJet, String> {
    let fail = |e: bianchi::geometry::GeomError| e.to_string();
    Ok(match name {
        "riemann" => ws.curv().map_err(fail)?.riemann.clone(),
        "ricci" => ws.curv().map_err(fail)?.ricci.clone(),
        "scalar" => TensorJet::scalar(ws.curv().map_err(fail)?.scalar.clone()),
        "weyl" => ws.weyl().map_err(fail)?.clone(),
        "cotton" => ws.cotton().map_err(fail)?.clone(),
        "bach" => {
            let bundle = ws.curv().map_err(fail)?;
            bach_from_parts(&ws.ctx, bundle, ws.weyl().map_err(fail)?).map_err(fail)?
        }
        "dtensor" => {
            let bundle = ws.curv().map_err(fail)?;
            d_tensor_from_parts(
                &ws.ctx.metric,
                bundle,
                ws.grad_r().map_err(fail)?,
                ws.grad_f_cov().map_err(fail)?,
            )
            .map_err(fail)?
        }
        "div1rm" | "div2rm" | "div3rm" | "div4rm" => {
            let level = name.as_bytes()[3] - b'0';
            ws.rm_chain().map_err(fail)?.level(level as usize).clone()
        }
        "div1w" | "div2w" | "div3w" | "div4w" => {
            let level = name.as_bytes()[3] - b'0';
            ws.w_chain().map_err(fail)?.level(level as usize).clone()
        }
        "soliton_residual" => {
            let bundle = curvature_bundle(&ws.ctx).map_err(fail)?;
            let lam = ws
                .ctx
                .lambda()
                .ok_or_else(|| "model has no potential".to_string())?;
            let hess = ws.ctx.hessian_f().map_err(fail)?;
            bundle.ricci.add(&hess).sub(&ws.ctx.metric.scaled(lam))
        }
        other => {
            return Err(format!(
                "unknown tensor `{other}`; expected one of riemann ricci scalar weyl cotton \
                 bach dtensor div1rm..div4rm div1w..div4w soliton_residual"
            ))
        }
    })
}
