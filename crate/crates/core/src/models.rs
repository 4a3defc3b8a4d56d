//! Catalog of exact gradient shrinking soliton charts and non-soliton test
//! metrics, the model-file loader, domain-aware point sampling, and the
//! soliton-equation residual.
//!
//! Catalog normalization: every shrinker uses lambda = 1/2, so the flat
//! chart carries f = |x|^2/4 and sphere factors have radius^2 = (k-1)/lambda
//! for a k-dimensional factor. Sphere charts use nested polar angles with
//! domains kept well away from the coordinate singularities; the sampler
//! additionally shrinks each interval by the per-coordinate margin.

use crate::curvature::curvature_bundle;
use crate::expr::{parse_expression, print_expression, Expr};
use crate::geometry::{cholesky, metric_values, GeomError, ModelSpec, PointContext};
use crate::tensor::TensorJet;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file is not valid JSON at line {line}, column {column}: {msg}")]
    Json {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("cannot parse {entry}: {source}")]
    ExprParse {
        entry: String,
        source: crate::expr::ParseError,
    },
    #[error("metric[{i}][{j}] and metric[{j}][{i}] are not identical expressions")]
    AsymmetricMetric { i: usize, j: usize },
    #[error("potential given without lambda")]
    MissingLambda,
    #[error("{0}")]
    BadShape(String),
    #[error("coordinate `{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("domain for `{coord}` is invalid: [{lo}, {hi}]")]
    BadDomain { coord: String, lo: f64, hi: f64 },
    #[error("metric fails positive definiteness at spot-check point {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("margins exceed the domain box for coordinate `{0}`")]
    EmptyDomain(String),
    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Expected classification constants for a catalog shrinker, in units of
/// lambda.
#[derive(Clone, Debug, PartialEq)]
pub struct SolitonConstants {
    pub r_over_lambda: f64,
    pub ricci_eigs_over_lambda: Vec<f64>,
}

/// A catalog model plus, for shrinkers, its expected constants.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub spec: ModelSpec,
    pub constants: Option<SolitonConstants>,
}

impl CatalogEntry {
    pub fn is_shrinker(&self) -> bool {
        self.constants.is_some()
    }
}

fn build(
    name: &str,
    coords: &[&str],
    metric_rows: &[&[&str]],
    potential: Option<&str>,
    lambda: Option<f64>,
    domain: &[(f64, f64)],
    margins: &[f64],
    expected_class: Option<&str>,
) -> ModelSpec {
    let metric = metric_rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|src| parse_expression(src, coords).expect("catalog expression"))
                .collect()
        })
        .collect();
    ModelSpec {
        name: name.into(),
        dim: coords.len(),
        coords: coords.iter().map(|s| s.to_string()).collect(),
        metric,
        potential: potential.map(|src| parse_expression(src, coords).expect("catalog potential")),
        lambda,
        domain: domain.to_vec(),
        margins: margins.to_vec(),
        expected_class: expected_class.map(|s| s.to_string()),
    }
}

fn diag_rows(entries: &[String]) -> Vec<Vec<String>> {
    let n = entries.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        entries[i].clone()
                    } else {
                        "0".to_string()
                    }
                })
                .collect()
        })
        .collect()
}

fn build_diag(
    name: &str,
    coords: &[&str],
    entries: &[String],
    potential: Option<&str>,
    lambda: Option<f64>,
    domain: &[(f64, f64)],
    margins: &[f64],
    expected_class: Option<&str>,
) -> ModelSpec {
    let rows = diag_rows(entries);
    let row_refs: Vec<Vec<&str>> = rows
        .iter()
        .map(|r| r.iter().map(|s| s.as_str()).collect())
        .collect();
    let slices: Vec<&[&str]> = row_refs.iter().map(|r| r.as_slice()).collect();
    build(
        name,
        coords,
        &slices,
        potential,
        lambda,
        domain,
        margins,
        expected_class,
    )
}

const POLAR_DOMAIN: (f64, f64) = (0.4, 2.74);
const AZIMUTH_DOMAIN: (f64, f64) = (0.3, 6.0);
const ANGLE_MARGIN: f64 = 0.01;

/// Nested-sine diagonal entries for a round sphere factor of squared
/// radius `rr` over angle coordinate names `angles`.
fn sphere_entries(rr: f64, angles: &[String]) -> Vec<String> {
    let mut entries = Vec::with_capacity(angles.len());
    let mut prefix = format!("{rr}");
    for (k, a) in angles.iter().enumerate() {
        entries.push(prefix.clone());
        if k + 1 < angles.len() {
            prefix = format!("{prefix}*sin({a})^2");
        }
    }
    entries
}

/// Round n-sphere shrinker: Einstein with Ric = lambda g, radius^2 =
/// (n-1)/lambda, potential identically zero.
pub fn sphere_model(n: usize, lambda: f64) -> CatalogEntry {
    assert!(n >= 2);
    let rr = (n as f64 - 1.0) / lambda;
    let names: Vec<String> = (0..n)
        .map(|k| {
            if k + 1 < n {
                format!("psi{}", k + 1)
            } else {
                "phi".to_string()
            }
        })
        .collect();
    let coords: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let entries = sphere_entries(rr, &names);
    let mut domain = vec![POLAR_DOMAIN; n - 1];
    domain.push(AZIMUTH_DOMAIN);
    let margins = vec![ANGLE_MARGIN; n];
    let spec = build_diag(
        &format!("sphere{n}"),
        &coords,
        &entries,
        Some("0"),
        Some(lambda),
        &domain,
        &margins,
        if n == 4 { Some("Einstein") } else { None },
    );
    CatalogEntry {
        spec,
        constants: Some(SolitonConstants {
            r_over_lambda: n as f64,
            ricci_eigs_over_lambda: vec![1.0; n],
        }),
    }
}

/// Round cylinder shrinker R x S^{n-1} with sphere radius^2 =
/// (n-2)/lambda and potential lambda t^2 / 2.
pub fn cylinder_model(n: usize, lambda: f64) -> CatalogEntry {
    assert!(n >= 3);
    let rr = (n as f64 - 2.0) / lambda;
    let mut names: Vec<String> = vec!["t".to_string()];
    for k in 0..n - 1 {
        if k + 2 < n {
            names.push(format!("psi{}", k + 1));
        } else {
            names.push("phi".to_string());
        }
    }
    let coords: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut entries = vec!["1".to_string()];
    entries.extend(sphere_entries(rr, &names[1..]));
    let mut domain = vec![(-2.0, 2.0)];
    domain.extend(vec![POLAR_DOMAIN; n - 2]);
    domain.push(AZIMUTH_DOMAIN);
    let mut margins = vec![0.0];
    margins.extend(vec![ANGLE_MARGIN; n - 1]);
    let potential = format!("{}*t^2", lambda / 2.0);
    let name = if n == 4 {
        "cylinder_r1s3".to_string()
    } else {
        format!("cylinder{n}")
    };
    let spec = build_diag(
        &name,
        &coords,
        &entries,
        Some(&potential),
        Some(lambda),
        &domain,
        &margins,
        if n == 4 { Some("RxS3") } else { None },
    );
    let mut eigs = vec![0.0];
    eigs.extend(vec![1.0; n - 1]);
    CatalogEntry {
        spec,
        constants: Some(SolitonConstants {
            r_over_lambda: (n - 1) as f64,
            ricci_eigs_over_lambda: eigs,
        }),
    }
}

/// The built-in catalog. Shrinkers come with expected constants; the
/// non-soliton test metrics exercise the general-metric identities where
/// the divergence chains do not vanish.
pub fn builtin_models() -> Vec<CatalogEntry> {
    let lambda = 0.5;
    let mut out = Vec::new();

    // Flat Gaussian shrinker on R^4
    let coords = ["x1", "x2", "x3", "x4"];
    let spec = build_diag(
        "gaussian4",
        &coords,
        &vec!["1".to_string(); 4],
        Some("(x1^2 + x2^2 + x3^2 + x4^2)/4"),
        Some(lambda),
        &[(-2.0, 2.0); 4],
        &[0.0; 4],
        Some("Gaussian_R4"),
    );
    out.push(CatalogEntry {
        spec,
        constants: Some(SolitonConstants {
            r_over_lambda: 0.0,
            ricci_eigs_over_lambda: vec![0.0; 4],
        }),
    });

    // R^2 x S^2 with sphere radius sqrt(2)
    let coords = ["x", "y", "theta", "phi"];
    let spec = build_diag(
        "product_r2s2",
        &coords,
        &[
            "1".to_string(),
            "1".to_string(),
            "2".to_string(),
            "2*sin(theta)^2".to_string(),
        ],
        Some("(x^2 + y^2)/4"),
        Some(lambda),
        &[(-2.0, 2.0), (-2.0, 2.0), POLAR_DOMAIN, AZIMUTH_DOMAIN],
        &[0.0, 0.0, ANGLE_MARGIN, ANGLE_MARGIN],
        Some("R2xS2"),
    );
    out.push(CatalogEntry {
        spec,
        constants: Some(SolitonConstants {
            r_over_lambda: 2.0,
            ricci_eigs_over_lambda: vec![0.0, 0.0, 1.0, 1.0],
        }),
    });

    out.push(cylinder_model(4, lambda)); // cylinder_r1s3
    out.push(sphere_model(4, lambda)); // sphere4
    out.push(sphere_model(3, lambda));
    out.push(sphere_model(5, lambda));
    out.push(cylinder_model(3, lambda));
    out.push(cylinder_model(5, lambda));

    // Warped non-soliton test metric diag(1, phi^2, phi^2, phi^2),
    // phi = 1 + t^2/10
    let coords = ["t", "x", "y", "z"];
    let phi2 = "(1 + t^2/10)^2".to_string();
    let spec = build_diag(
        "warped_test",
        &coords,
        &["1".to_string(), phi2.clone(), phi2.clone(), phi2.clone()],
        None,
        None,
        &[(-1.5, 1.5); 4],
        &[0.0; 4],
        Some("NotASoliton"),
    );
    out.push(CatalogEntry {
        spec,
        constants: None,
    });

    // Flat metric plus small smooth bumps; fully generic curvature,
    // positive definite by diagonal dominance on its box.
    let coords = ["x1", "x2", "x3", "x4"];
    let spec = build(
        "random_perturb",
        &coords,
        &[
            &[
                "1 + 0.08*sin(x1)*cos(x2)",
                "0.03*sin(x1 + 2*x2)",
                "0.02*x4*cos(x3)",
                "0.01*x2*sin(x4)",
            ],
            &[
                "0.03*sin(x1 + 2*x2)",
                "1 + 0.06*exp(-(x1^2 + x3^2)/4)",
                "0.02*exp(-x2^2/2)*sin(x4)",
                "0.015*x1*x3",
            ],
            &[
                "0.02*x4*cos(x3)",
                "0.02*exp(-x2^2/2)*sin(x4)",
                "1 + 0.05*sin(x2 + x3)",
                "0.025*cos(x1 + x4)",
            ],
            &[
                "0.01*x2*sin(x4)",
                "0.015*x1*x3",
                "0.025*cos(x1 + x4)",
                "1 + 0.07*cos(x4)*sin(x1)",
            ],
        ],
        None,
        None,
        &[(-1.0, 1.0); 4],
        &[0.0; 4],
        Some("NotASoliton"),
    );
    out.push(CatalogEntry {
        spec,
        constants: None,
    });

    // 3-dimensional warped test metric dt^2 + phi(t)^2 (dx^2 + dy^2)
    let coords = ["t", "x", "y"];
    let phi2 = "(1 + t^2/10)^2".to_string();
    let spec = build_diag(
        "warped3",
        &coords,
        &["1".to_string(), phi2.clone(), phi2],
        None,
        None,
        &[(-1.5, 1.5); 3],
        &[0.0; 3],
        None,
    );
    out.push(CatalogEntry {
        spec,
        constants: None,
    });

    out.sort_by(|a, b| a.spec.name.cmp(&b.spec.name));
    out
}

/// Looks up a builtin model by name.
pub fn find_model(name: &str) -> Result<CatalogEntry, ModelError> {
    builtin_models()
        .into_iter()
        .find(|e| e.spec.name == name)
        .ok_or_else(|| ModelError::UnknownModel(name.to_string()))
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Deterministic sample plan over the margin-shrunk domain box.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
}

/// Draws `count` seeded-uniform points inside the domain box shrunk by the
/// per-coordinate margins. A single-point plan returns the box center.
pub fn sample_points(m: &ModelSpec, count: usize, seed: u64) -> Result<SamplePlan, ModelError> {
    assert!(count >= 1, "sample plans need at least one point");
    let mut boxes = Vec::with_capacity(m.dim);
    for (c, (&(lo, hi), &margin)) in m.domain.iter().zip(m.margins.iter()).enumerate() {
        let (slo, shi) = (lo + margin, hi - margin);
        if slo > shi {
            return Err(ModelError::EmptyDomain(m.coords[c].clone()));
        }
        boxes.push((slo, shi));
    }
    let points = if count == 1 {
        vec![boxes.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                boxes
                    .iter()
                    .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect()
            })
            .collect()
    };
    Ok(SamplePlan {
        count,
        seed,
        points,
    })
}

// ---------------------------------------------------------------------------
// Soliton residual
// ---------------------------------------------------------------------------

/// `Ric + Hess f - lambda g` as a (0,2) tensor jet; the max-abs of its
/// order-0 part is the gate every catalog shrinker must pass.
pub fn soliton_residual(m: &ModelSpec, p: &[f64]) -> Result<TensorJet, ModelError> {
    let ctx = PointContext::new(m, p, 2)?;
    Ok(soliton_residual_in(&ctx)?)
}

/// Residual from a prepared context (shares jets with other checks).
pub fn soliton_residual_in(ctx: &PointContext) -> Result<TensorJet, GeomError> {
    let lambda = ctx.lambda().ok_or(GeomError::MissingPotential)?;
    if ctx.potential.is_none() {
        return Err(GeomError::MissingPotential);
    }
    let bundle = curvature_bundle(ctx)?;
    let hess = ctx.hessian_f()?;
    Ok(bundle
        .ricci
        .add(&hess)
        .sub(&ctx.metric.scaled(lambda)))
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

/// On-disk model schema; expression strings use the engine grammar.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    name: String,
    dimension: usize,
    coordinates: Vec<String>,
    metric: Vec<Vec<String>>,
    potential: Option<String>,
    lambda: Option<f64>,
    domain: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    margins: Option<BTreeMap<String, f64>>,
}

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn model_from_file(file: ModelFile) -> Result<ModelSpec, ModelError> {
    let n = file.dimension;
    if n < 2 {
        return Err(ModelError::BadShape(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    if file.coordinates.len() != n {
        return Err(ModelError::BadShape(format!(
            "expected {n} coordinates, got {}",
            file.coordinates.len()
        )));
    }
    for (i, c) in file.coordinates.iter().enumerate() {
        if !valid_identifier(c) {
            return Err(ModelError::BadIdentifier(c.clone()));
        }
        if file.coordinates[..i].contains(c) {
            return Err(ModelError::DuplicateCoordinate(c.clone()));
        }
    }
    let coords: Vec<&str> = file.coordinates.iter().map(|s| s.as_str()).collect();

    if file.metric.len() != n || file.metric.iter().any(|row| row.len() != n) {
        return Err(ModelError::BadShape(format!(
            "metric must be a {n} x {n} matrix"
        )));
    }
    let mut metric: Vec<Vec<Expr>> = Vec::with_capacity(n);
    for (i, row) in file.metric.iter().enumerate() {
        let mut out = Vec::with_capacity(n);
        for (j, src) in row.iter().enumerate() {
            out.push(
                parse_expression(src, &coords).map_err(|source| ModelError::ExprParse {
                    entry: format!("metric[{i}][{j}]"),
                    source,
                })?,
            );
        }
        metric.push(out);
    }
    for i in 0..n {
        for j in i + 1..n {
            if metric[i][j] != metric[j][i] {
                return Err(ModelError::AsymmetricMetric { i, j });
            }
        }
    }

    let potential = match &file.potential {
        Some(src) => Some(
            parse_expression(src, &coords).map_err(|source| ModelError::ExprParse {
                entry: "potential".into(),
                source,
            })?,
        ),
        None => None,
    };
    if potential.is_some() && file.lambda.is_none() {
        return Err(ModelError::MissingLambda);
    }

    let mut domain = Vec::with_capacity(n);
    let mut margins = Vec::with_capacity(n);
    for c in &file.coordinates {
        let [lo, hi] = *file
            .domain
            .get(c)
            .ok_or_else(|| ModelError::BadShape(format!("domain missing coordinate `{c}`")))?;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(ModelError::BadDomain {
                coord: c.clone(),
                lo,
                hi,
            });
        }
        domain.push((lo, hi));
        let margin = file
            .margins
            .as_ref()
            .and_then(|m| m.get(c).copied())
            .unwrap_or(0.0);
        if margin < 0.0 {
            return Err(ModelError::BadDomain {
                coord: c.clone(),
                lo: margin,
                hi: margin,
            });
        }
        margins.push(margin);
    }

    let spec = ModelSpec {
        name: file.name,
        dim: n,
        coords: file.coordinates,
        metric,
        potential,
        lambda: file.lambda,
        domain,
        margins,
        expected_class: None,
    };

    // Positive-definiteness spot-check on a fixed 16-point plan.
    let plan = sample_points(&spec, 16, 0)?;
    for p in &plan.points {
        let vals = metric_values(&spec, p)?;
        if cholesky(&vals, n).is_none() {
            return Err(ModelError::NotPositiveDefinite { point: p.clone() });
        }
    }
    Ok(spec)
}

fn model_to_file(m: &ModelSpec) -> ModelFile {
    let coords = m.coord_refs();
    ModelFile {
        name: m.name.clone(),
        dimension: m.dim,
        coordinates: m.coords.clone(),
        metric: m
            .metric
            .iter()
            .map(|row| row.iter().map(|e| print_expression(e, &coords)).collect())
            .collect(),
        potential: m.potential.as_ref().map(|e| print_expression(e, &coords)),
        lambda: m.lambda,
        domain: m
            .coords
            .iter()
            .zip(m.domain.iter())
            .map(|(c, &(lo, hi))| (c.clone(), [lo, hi]))
            .collect(),
        margins: if m.margins.iter().all(|&x| x == 0.0) {
            None
        } else {
            Some(
                m.coords
                    .iter()
                    .zip(m.margins.iter())
                    .map(|(c, &v)| (c.clone(), v))
                    .collect(),
            )
        },
    }
}

/// Parses and validates a model from JSON text.
pub fn model_from_json(text: &str) -> Result<ModelSpec, ModelError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Json {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    model_from_file(file)
}

/// Serializes a model to the interchange JSON format.
pub fn model_to_json(m: &ModelSpec) -> String {
    serde_json::to_string_pretty(&model_to_file(m)).expect("model serialization")
}

/// Loads and validates a model file.
pub fn load_model(path: &Path) -> Result<ModelSpec, ModelError> {
    let text = std::fs::read_to_string(path)?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use approx::assert_relative_eq;

    #[test]
    fn catalog_contains_required_models() {
        let names: Vec<String> = builtin_models()
            .into_iter()
            .map(|e| e.spec.name)
            .collect();
        for want in [
            "gaussian4",
            "cylinder_r1s3",
            "product_r2s2",
            "sphere4",
            "sphere3",
            "sphere5",
            "cylinder3",
            "cylinder5",
            "warped_test",
            "random_perturb",
            "warped3",
        ] {
            assert!(names.iter().any(|n| n == want), "missing {want}");
        }
    }

    #[test]
    fn every_catalog_shrinker_passes_the_residual_gate() {
        for entry in builtin_models() {
            if !entry.is_shrinker() {
                continue;
            }
            let plan = sample_points(&entry.spec, 25, 11).unwrap();
            for p in &plan.points {
                let res = soliton_residual(&entry.spec, p).unwrap();
                assert!(
                    res.max_abs() <= 1e-9,
                    "{} residual {} at {:?}",
                    entry.spec.name,
                    res.max_abs(),
                    p
                );
            }
        }
    }

    #[test]
    fn gaussian_residual_is_tiny_at_spec_point() {
        let m = find_model("gaussian4").unwrap().spec;
        let res = soliton_residual(&m, &[1.0, 2.0, 0.0, -1.0]).unwrap();
        assert!(res.max_abs() <= 1e-12);
    }

    #[test]
    fn warped_metric_with_zero_potential_is_not_a_soliton() {
        let m = find_model("warped_test").unwrap().spec;
        let fake = m.with_potential(Expr::Num(0.0), 0.5);
        let res = soliton_residual(&fake, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(
            res.max_abs() >= 0.1,
            "warped residual {} should be large",
            res.max_abs()
        );
    }

    #[test]
    fn product_residual_at_many_points() {
        let m = find_model("product_r2s2").unwrap().spec;
        let plan = sample_points(&m, 100, 7).unwrap();
        for p in &plan.points {
            let res = soliton_residual(&m, p).unwrap();
            assert!(res.max_abs() <= 1e-9);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_box() {
        let m = find_model("cylinder_r1s3").unwrap().spec;
        let a = sample_points(&m, 40, 9).unwrap();
        let b = sample_points(&m, 40, 9).unwrap();
        assert_eq!(a.points, b.points);
        for p in &a.points {
            for (c, (&x, (&(lo, hi), &margin))) in p
                .iter()
                .zip(m.domain.iter().zip(m.margins.iter()))
                .enumerate()
            {
                assert!(
                    x >= lo + margin && x <= hi - margin,
                    "coord {c} out of box"
                );
            }
        }
    }

    #[test]
    fn single_point_plan_is_box_center() {
        let m = find_model("gaussian4").unwrap().spec;
        let plan = sample_points(&m, 1, 123).unwrap();
        assert_eq!(plan.points, vec![vec![0.0; 4]]);
    }

    #[test]
    fn sphere_chart_sampling_avoids_singularities() {
        let m = find_model("sphere4").unwrap().spec;
        let plan = sample_points(&m, 200, 3).unwrap();
        for p in &plan.points {
            for &angle in &p[..3] {
                assert!(angle.sin().abs() >= 1e-3);
            }
        }
    }

    #[test]
    fn margins_exceeding_box_report_empty_domain() {
        let mut m = find_model("gaussian4").unwrap().spec;
        m.margins = vec![5.0; 4];
        assert!(matches!(
            sample_points(&m, 10, 0),
            Err(ModelError::EmptyDomain(_))
        ));
    }

    #[test]
    fn model_json_round_trips_to_equal_spec() {
        let m = find_model("cylinder_r1s3").unwrap().spec;
        let json = model_to_json(&m);
        let back = model_from_json(&json).unwrap();
        // expected_class is catalog metadata, not part of the file format
        let mut reference = m.clone();
        reference.expected_class = None;
        assert_eq!(back, reference);
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let text = r#"{
            "name": "bad", "dimension": 2, "coordinates": ["x", "y"],
            "metric": [["1", "x"], ["0", "1"]],
            "potential": null, "lambda": null,
            "domain": {"x": [-1, 1], "y": [-1, 1]}
        }"#;
        assert!(matches!(
            model_from_json(text),
            Err(ModelError::AsymmetricMetric { i: 0, j: 1 })
        ));
    }

    #[test]
    fn potential_without_lambda_is_rejected() {
        let text = r#"{
            "name": "bad", "dimension": 2, "coordinates": ["x", "y"],
            "metric": [["1", "0"], ["0", "1"]],
            "potential": "x^2/4", "lambda": null,
            "domain": {"x": [-1, 1], "y": [-1, 1]}
        }"#;
        assert!(matches!(model_from_json(text), Err(ModelError::MissingLambda)));
    }

    #[test]
    fn indefinite_metric_fails_spot_check() {
        let text = r#"{
            "name": "bad", "dimension": 2, "coordinates": ["x", "y"],
            "metric": [["x", "0"], ["0", "1"]],
            "potential": null, "lambda": null,
            "domain": {"x": [-2, 2], "y": [-1, 1]}
        }"#;
        assert!(matches!(
            model_from_json(text),
            Err(ModelError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn expression_errors_carry_entry_context() {
        let text = r#"{
            "name": "bad", "dimension": 2, "coordinates": ["x", "y"],
            "metric": [["1", "0"], ["0", "1 + bogus"]],
            "potential": null, "lambda": null,
            "domain": {"x": [-1, 1], "y": [-1, 1]}
        }"#;
        match model_from_json(text) {
            Err(ModelError::ExprParse { entry, .. }) => assert_eq!(entry, "metric[1][1]"),
            other => panic!("expected ExprParse, got {other:?}"),
        }
    }

    #[test]
    fn scalar_curvature_ratio_matches_catalog_constants() {
        for entry in builtin_models() {
            let Some(constants) = entry.constants.clone() else {
                continue;
            };
            let m = &entry.spec;
            let lambda = m.lambda.unwrap();
            let p = m.box_center();
            let ctx = PointContext::new(m, &p, 2).unwrap();
            let bundle = curvature_bundle(&ctx).unwrap();
            assert_relative_eq!(
                bundle.scalar.value() / lambda,
                constants.r_over_lambda,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn ricci_norm_identity_on_catalog_shrinkers() {
        // |Ric|^2 = lambda R on every constant-scalar shrinker
        for entry in builtin_models() {
            if !entry.is_shrinker() {
                continue;
            }
            let m = &entry.spec;
            let lambda = m.lambda.unwrap();
            let plan = sample_points(m, 10, 5).unwrap();
            for p in &plan.points {
                let ctx = PointContext::new(m, p, 2).unwrap();
                let bundle = curvature_bundle(&ctx).unwrap();
                let ric2 = ctx.norm_sq(&bundle.ricci).value();
                let want = lambda * bundle.scalar.value();
                assert!(
                    (ric2 - want).abs() / (1.0 + want.abs()) <= 1e-8,
                    "{}: |Ric|^2 = {ric2}, lambda R = {want}",
                    m.name
                );
            }
        }
    }
}
