//! Four-dimensional shrinker classification.
//!
//! A rigid 4-d shrinker has constant scalar curvature quantized to
//! R/lambda in {0, 2, 3, 4} (the value 1 never occurs), satisfies
//! |Ric|^2 = lambda R, and has a Ricci eigenvalue tuple determined by the
//! ratio. The pipeline below gates on the soliton-equation residual, the
//! constancy of R, the quantized ratio, the norm identity and the
//! eigenvalue snap, in that order, and reports the first failure.

use super::{CheckReport, CheckSpec, VerifyError};
use crate::curvature::curvature_bundle;
use crate::geometry::{cholesky, residual_scalar, GeomError, ModelSpec, PointContext};
use crate::models::{soliton_residual_in, SamplePlan};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Einstein,
    #[serde(rename = "Gaussian_R4")]
    GaussianR4,
    R2xS2,
    RxS3,
    NotRigidOrUnknown,
    NotASoliton,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Einstein => "Einstein",
            Verdict::GaussianR4 => "Gaussian_R4",
            Verdict::R2xS2 => "R2xS2",
            Verdict::RxS3 => "RxS3",
            Verdict::NotRigidOrUnknown => "NotRigidOrUnknown",
            Verdict::NotASoliton => "NotASoliton",
        })
    }
}

impl Verdict {
    /// Definite verdicts identify a rigid model.
    pub fn is_definite(self) -> bool {
        !matches!(self, Verdict::NotRigidOrUnknown | Verdict::NotASoliton)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Max soliton-equation residual over the plan.
    pub soliton_residual: f64,
    /// Max |grad R| over the plan.
    pub max_grad_r: f64,
    /// Max normalized gap in |Ric|^2 = lambda R.
    pub ric2_gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub r_over_lambda: Option<f64>,
    /// Sorted eigenvalues at the first sample point, in units of lambda.
    pub ricci_eigenvalues_over_lambda: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

/// Eigenvalue tuple (sorted ascending) for each admissible ratio.
fn case_tuple(ratio: usize) -> Option<[f64; 4]> {
    let tuple = match ratio {
        0 => [0.0, 0.0, 0.0, 0.0],
        2 => [0.0, 0.0, 1.0, 1.0],
        3 => [0.0, 1.0, 1.0, 1.0],
        4 => [1.0, 1.0, 1.0, 1.0],
        _ => return None,
    };
    debug_assert_eq!(tuple.iter().sum::<f64>() as usize, ratio);
    Some(tuple)
}

fn verdict_for(ratio: usize) -> Verdict {
    match ratio {
        0 => Verdict::GaussianR4,
        2 => Verdict::R2xS2,
        3 => Verdict::RxS3,
        4 => Verdict::Einstein,
        _ => unreachable!("ratio gated before verdict lookup"),
    }
}

struct PointData {
    residual: f64,
    grad_r: f64,
    scalar: f64,
    ric2_gap: f64,
    eigs: Vec<f64>,
}

fn point_data(m: &ModelSpec, p: &[f64], lambda: f64) -> Result<PointData, GeomError> {
    let ctx = PointContext::new(m, p, 3)?;
    let bundle = curvature_bundle(&ctx)?;
    let res = soliton_residual_in(&ctx)?;
    let grad_r = ctx.norm_sq(&ctx.gradient_cov(&bundle.scalar)?).value().max(0.0).sqrt();
    let n = m.dim;
    let a: Vec<f64> = bundle.ricci.components().iter().map(|j| j.value()).collect();
    let b: Vec<f64> = ctx.metric.components().iter().map(|j| j.value()).collect();
    let eigs = generalized_symmetric_eigs(&a, &b, n).ok_or_else(|| {
        GeomError::NotPositiveDefinite { point: p.to_vec() }
    })?;
    let ric2 = ctx.norm_sq(&bundle.ricci).value();
    Ok(PointData {
        residual: res.max_abs(),
        grad_r,
        scalar: bundle.scalar.value(),
        ric2_gap: residual_scalar(ric2, lambda * bundle.scalar.value()),
        eigs,
    })
}

/// Classifies a 4-dimensional gradient shrinking soliton chart against the
/// rigid cases. Errors on wrong dimension or missing potential.
pub fn classify_dim4(
    m: &ModelSpec,
    plan: &SamplePlan,
    tol: f64,
) -> Result<ClassificationResult, VerifyError> {
    if m.dim != 4 {
        return Err(VerifyError::Dimension(m.dim));
    }
    if !m.has_potential() {
        return Err(VerifyError::MissingPotential);
    }
    let lambda = m.lambda.unwrap();

    let data: Vec<PointData> = plan
        .points
        .par_iter()
        .map(|p| {
            point_data(m, p, lambda).map_err(|source| VerifyError::Geometry {
                check: "C.classify_dim4".into(),
                point: p.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;

    let gate = data.iter().fold(0.0f64, |acc, d| acc.max(d.residual));
    let max_grad_r = data.iter().fold(0.0f64, |acc, d| acc.max(d.grad_r));
    let ric2_gap = data.iter().fold(0.0f64, |acc, d| acc.max(d.ric2_gap));
    let mean_scalar = data.iter().map(|d| d.scalar).sum::<f64>() / data.len() as f64;
    let ratio = mean_scalar / lambda;
    let first_eigs: Vec<f64> = data[0].eigs.iter().map(|e| e / lambda).collect();

    let diagnostics = Diagnostics {
        soliton_residual: gate,
        max_grad_r,
        ric2_gap,
    };
    let finish = |verdict| ClassificationResult {
        verdict,
        r_over_lambda: Some(ratio),
        ricci_eigenvalues_over_lambda: Some(first_eigs.clone()),
        diagnostics: diagnostics.clone(),
    };

    // (1) the chart must satisfy the soliton equation at all
    if gate > tol {
        return Ok(finish(Verdict::NotASoliton));
    }
    // (2) rigid shrinkers have constant scalar curvature
    if max_grad_r > tol * lambda {
        return Ok(finish(Verdict::NotRigidOrUnknown));
    }
    // (3) quantized ratio; 1 is excluded outright
    let nearest = (0..=4usize).min_by(|&a, &b| {
        (ratio - a as f64)
            .abs()
            .partial_cmp(&(ratio - b as f64).abs())
            .unwrap()
    }).unwrap();
    if (ratio - nearest as f64).abs() > 0.05 || nearest == 1 {
        return Ok(finish(Verdict::NotRigidOrUnknown));
    }
    // (4) the norm identity pins |Ric|^2 to lambda R
    if ric2_gap > tol {
        return Ok(finish(Verdict::NotRigidOrUnknown));
    }
    // (5) eigenvalues must snap to the case tuple at every point
    let tuple = case_tuple(nearest).expect("nearest gated to admissible ratios");
    for d in &data {
        for (e, want) in d.eigs.iter().zip(tuple.iter()) {
            if (e / lambda - want).abs() > 0.05 {
                return Ok(finish(Verdict::NotRigidOrUnknown));
            }
        }
    }
    Ok(finish(verdict_for(nearest)))
}

/// CLI-facing wrapper: a chart without a potential is simply not a
/// gradient soliton rather than an error.
pub fn classify_model(
    m: &ModelSpec,
    plan: &SamplePlan,
    tol: f64,
) -> Result<ClassificationResult, VerifyError> {
    match classify_dim4(m, plan, tol) {
        Ok(r) => Ok(r),
        Err(VerifyError::MissingPotential) => Ok(ClassificationResult {
            verdict: Verdict::NotASoliton,
            r_over_lambda: None,
            ricci_eigenvalues_over_lambda: None,
            diagnostics: Diagnostics::default(),
        }),
        Err(e) => Err(e),
    }
}

/// Builds the tier-C report row for the runner.
pub(super) fn classifier_report(
    check: &CheckSpec,
    model: &ModelSpec,
    plan: &SamplePlan,
    tol: Option<f64>,
) -> CheckReport {
    let tolerance = tol.unwrap_or(check.default_tol);
    match classify_model(model, plan, tolerance) {
        Ok(result) => {
            let verdict = result.verdict.to_string();
            let pass = match &model.expected_class {
                Some(expected) => *expected == verdict,
                None => true,
            };
            CheckReport {
                check_id: check.id.to_string(),
                model: model.name.clone(),
                points: plan.points.len(),
                max_residual: result.diagnostics.soliton_residual,
                mean_residual: result.diagnostics.soliton_residual,
                argmax_point: None,
                pass,
                tolerance,
                max_witness: result.diagnostics.max_grad_r,
                verdict: Some(verdict),
            }
        }
        Err(e) => CheckReport {
            check_id: check.id.to_string(),
            model: model.name.clone(),
            points: plan.points.len(),
            max_residual: f64::INFINITY,
            mean_residual: f64::INFINITY,
            argmax_point: None,
            pass: false,
            tolerance,
            max_witness: 0.0,
            verdict: Some(format!("error: {e}")),
        },
    }
}

// ---------------------------------------------------------------------------
// Small symmetric eigensolver
// ---------------------------------------------------------------------------

/// Eigenvalues of the pencil (A, B) for symmetric A and positive definite
/// B, via Cholesky reduction and cyclic Jacobi; sorted ascending.
pub fn generalized_symmetric_eigs(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let l = cholesky(b, n)?;
    // y = L^{-1} a, column by column
    let mut y = a.to_vec();
    for col in 0..n {
        for i in 0..n {
            let mut s = y[i * n + col];
            for k in 0..i {
                s -= l[i * n + k] * y[k * n + col];
            }
            y[i * n + col] = s / l[i * n + i];
        }
    }
    // c = y L^{-T}: solve row-wise against the same factor
    let mut c = vec![0.0; n * n];
    for r in 0..n {
        for i in 0..n {
            let mut s = y[r * n + i];
            for k in 0..i {
                s -= l[i * n + k] * c[r * n + k];
            }
            c[r * n + i] = s / l[i * n + i];
        }
    }
    Some(jacobi_eigenvalues(&c, n))
}

fn jacobi_eigenvalues(m0: &[f64], n: usize) -> Vec<f64> {
    let mut a = m0.to_vec();
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a[i * n + j].abs());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-30 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cth = 1.0 / (t * t + 1.0).sqrt();
                let sth = t * cth;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cth * akp - sth * akq;
                    a[k * n + q] = sth * akp + cth * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cth * apk - sth * aqk;
                    a[q * n + k] = sth * apk + cth * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{find_model, sample_points};
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // symmetric matrix with eigenvalues 1, 2, 4
        let a = [
            2.0, 1.0, 0.0, //
            1.0, 3.0, 1.0, //
            0.0, 1.0, 2.0,
        ];
        let eigs = jacobi_eigenvalues(&a, 3);
        assert_relative_eq!(eigs[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(eigs[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(eigs[2], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn generalized_eigs_respect_the_metric() {
        // A = diag(2, 6), B = diag(1, 2): pencil eigenvalues 2 and 3
        let a = [2.0, 0.0, 0.0, 6.0];
        let b = [1.0, 0.0, 0.0, 2.0];
        let eigs = generalized_symmetric_eigs(&a, &b, 2).unwrap();
        assert_relative_eq!(eigs[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(eigs[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn catalog_four_dim_shrinkers_classify_correctly() {
        let cases = [
            ("gaussian4", Verdict::GaussianR4, 0.0),
            ("product_r2s2", Verdict::R2xS2, 2.0),
            ("cylinder_r1s3", Verdict::RxS3, 3.0),
            ("sphere4", Verdict::Einstein, 4.0),
        ];
        for (name, want, ratio) in cases {
            let m = find_model(name).unwrap().spec;
            let plan = sample_points(&m, 20, 5).unwrap();
            let out = classify_dim4(&m, &plan, 1e-8).unwrap();
            assert_eq!(out.verdict, want, "{name}");
            assert!(
                (out.r_over_lambda.unwrap() - ratio).abs() <= 0.05,
                "{name} ratio {:?}",
                out.r_over_lambda
            );
            let eigs = out.ricci_eigenvalues_over_lambda.unwrap();
            let constants = find_model(name).unwrap().constants.unwrap();
            let mut want_eigs = constants.ricci_eigs_over_lambda.clone();
            want_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (e, w) in eigs.iter().zip(want_eigs.iter()) {
                assert!((e - w).abs() <= 0.05, "{name}: eigs {eigs:?}");
            }
        }
    }

    #[test]
    fn warped_metric_is_not_a_soliton() {
        let m = find_model("warped_test").unwrap().spec;
        let plan = sample_points(&m, 5, 0).unwrap();
        assert!(matches!(
            classify_dim4(&m, &plan, 1e-8),
            Err(VerifyError::MissingPotential)
        ));
        let out = classify_model(&m, &plan, 1e-8).unwrap();
        assert_eq!(out.verdict, Verdict::NotASoliton);
    }

    #[test]
    fn warped_metric_with_fake_potential_fails_the_gate() {
        let m = find_model("warped_test").unwrap().spec;
        let fake = m.with_potential(crate::expr::Expr::Num(0.0), 0.5);
        let plan = sample_points(&fake, 5, 0).unwrap();
        let out = classify_dim4(&fake, &plan, 1e-8).unwrap();
        assert_eq!(out.verdict, Verdict::NotASoliton);
        assert!(out.diagnostics.soliton_residual > 0.05);
    }

    #[test]
    fn dimension_other_than_four_is_an_error() {
        let m = find_model("sphere3").unwrap().spec;
        let plan = sample_points(&m, 3, 0).unwrap();
        assert!(matches!(
            classify_dim4(&m, &plan, 1e-8),
            Err(VerifyError::Dimension(3))
        ));
    }
}
