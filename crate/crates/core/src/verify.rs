//! Check registry, the runner that evaluates identities over sample plans,
//! and the four-dimensional shrinker classifier.
//!
//! Checks come in three tiers: A holds identities valid on every metric,
//! B identities valid on gradient shrinking solitons (gated on the model
//! carrying a potential), and C the dimension-4 classification pipeline.
//! Every check reports the normalized residual
//! `max|lhs - rhs| / (1 + max(|lhs|, |rhs|))` over the sampled points, plus
//! a witness magnitude so callers can confirm the identity was exercised
//! with nonzero terms rather than as `0 = 0`.

mod classify;
mod registry;

pub use classify::{classify_dim4, classify_model, ClassificationResult, Diagnostics, Verdict};
pub use registry::registry;

use crate::curvature::{curvature_bundle, weyl_tensor, CurvatureBundle};
use crate::divchain::{div_chain_from, DivergenceChain, Family};
use crate::geometry::{covariant_derivative, GeomError, ModelSpec, PointContext};
use crate::jet::Jet;
use crate::models::SamplePlan;
use crate::tensor::TensorJet;
use once_cell::unsync::OnceCell;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Metric-jet order used by the runner: two orders for curvature plus four
/// divergences.
pub const ENGINE_ORDER: usize = 6;

/// Default residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
    #[error("check {check} is not applicable to model {model}")]
    NotApplicable { check: String, model: String },
    #[error("check {check} failed at point {point:?}: {source}")]
    Geometry {
        check: String,
        point: Vec<f64>,
        source: GeomError,
    },
    #[error("classification needs dimension 4, model has {0}")]
    Dimension(usize),
    #[error("model has no potential, not a gradient soliton")]
    MissingPotential,
    #[error(transparent)]
    Model(#[from] crate::models::ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    A,
    B,
    C,
}

impl std::fmt::Display for Tier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tier::A => "A",
            Tier::B => "B",
            Tier::C => "C",
        })
    }
}

impl std::str::FromStr for Tier {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Tier::A),
            "B" | "b" => Ok(Tier::B),
            "C" | "c" => Ok(Tier::C),
            other => Err(format!("unknown tier `{other}`")),
        }
    }
}

/// Residual plus the magnitude of a designated nonzero term, which the
/// acceptance suite uses as a triviality guard.
#[derive(Clone, Copy, Debug)]
pub struct Eval {
    pub residual: f64,
    pub witness: f64,
}

pub(crate) fn ev(residual: f64, witness: f64) -> Eval {
    Eval { residual, witness }
}

type EvalFn = fn(&PointWorkspace) -> Result<Eval, GeomError>;

/// One registered identity check.
pub struct CheckSpec {
    pub id: &'static str,
    pub tier: Tier,
    pub description: &'static str,
    pub requires_potential: bool,
    pub min_dim: usize,
    pub exact_dim: Option<usize>,
    pub default_tol: f64,
    pub(crate) eval: EvalFn,
}

impl CheckSpec {
    pub fn applicable(&self, m: &ModelSpec) -> bool {
        if self.requires_potential && !m.has_potential() {
            return false;
        }
        if m.dim < self.min_dim {
            return false;
        }
        if let Some(d) = self.exact_dim {
            if m.dim != d {
                return false;
            }
        }
        true
    }
}

/// Serializable check metadata for listings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckInfo {
    pub id: String,
    pub tier: Tier,
    pub description: String,
    pub requires_potential: bool,
    pub min_dim: usize,
    pub exact_dim: Option<usize>,
    pub default_tol: f64,
}

/// All registered checks, sorted by id.
pub fn list_checks() -> Vec<CheckInfo> {
    registry()
        .iter()
        .map(|c| CheckInfo {
            id: c.id.to_string(),
            tier: c.tier,
            description: c.description.to_string(),
            requires_potential: c.requires_potential,
            min_dim: c.min_dim,
            exact_dim: c.exact_dim,
            default_tol: c.default_tol,
        })
        .collect()
}

pub fn find_check(id: &str) -> Option<&'static CheckSpec> {
    registry().iter().find(|c| c.id == id)
}

// ---------------------------------------------------------------------------
// Per-point workspace
// ---------------------------------------------------------------------------

/// Lazily computed per-point quantities shared by all check evaluators.
/// Everything derives from one order-6 metric jet pass.
pub struct PointWorkspace<'m> {
    pub ctx: PointContext<'m>,
    curv: OnceCell<CurvatureBundle>,
    weyl: OnceCell<TensorJet>,
    nabla_ric: OnceCell<TensorJet>,
    nabla2_ric: OnceCell<TensorJet>,
    grad_r: OnceCell<TensorJet>,
    hess_r: OnceCell<TensorJet>,
    grad_f_cov: OnceCell<TensorJet>,
    grad_f_vec: OnceCell<TensorJet>,
    rm_chain: OnceCell<DivergenceChain>,
    w_chain: OnceCell<DivergenceChain>,
    cotton: OnceCell<TensorJet>,
    rm_dot_ric: OnceCell<TensorJet>,
    ric_sq: OnceCell<TensorJet>,
    var2_rm: OnceCell<(TensorJet, TensorJet)>,
    var2_w: OnceCell<(TensorJet, TensorJet)>,
}

impl<'m> PointWorkspace<'m> {
    pub fn new(model: &'m ModelSpec, point: &[f64]) -> Result<Self, GeomError> {
        let ctx = PointContext::new(model, point, ENGINE_ORDER)?;
        Ok(PointWorkspace {
            ctx,
            curv: OnceCell::new(),
            weyl: OnceCell::new(),
            nabla_ric: OnceCell::new(),
            nabla2_ric: OnceCell::new(),
            grad_r: OnceCell::new(),
            hess_r: OnceCell::new(),
            grad_f_cov: OnceCell::new(),
            grad_f_vec: OnceCell::new(),
            rm_chain: OnceCell::new(),
            w_chain: OnceCell::new(),
            cotton: OnceCell::new(),
            rm_dot_ric: OnceCell::new(),
            ric_sq: OnceCell::new(),
            var2_rm: OnceCell::new(),
            var2_w: OnceCell::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.ctx.dim()
    }

    pub fn nf(&self) -> f64 {
        self.ctx.dim() as f64
    }

    pub fn lambda(&self) -> Result<f64, GeomError> {
        self.ctx.lambda().ok_or(GeomError::MissingPotential)
    }

    pub fn curv(&self) -> Result<&CurvatureBundle, GeomError> {
        self.curv.get_or_try_init(|| curvature_bundle(&self.ctx))
    }

    pub fn weyl(&self) -> Result<&TensorJet, GeomError> {
        self.weyl.get_or_try_init(|| {
            let b = self.curv()?;
            weyl_tensor(b, &self.ctx.metric, &self.ctx.inv_metric)
        })
    }

    /// ∇Ric with the derivative slot first.
    pub fn nabla_ric(&self) -> Result<&TensorJet, GeomError> {
        self.nabla_ric.get_or_try_init(|| {
            let b = self.curv()?;
            covariant_derivative(&b.ricci, &self.ctx.christoffel)
        })
    }

    /// ∇∇Ric, outer derivative first.
    pub fn nabla2_ric(&self) -> Result<&TensorJet, GeomError> {
        self.nabla2_ric
            .get_or_try_init(|| covariant_derivative(self.nabla_ric()?, &self.ctx.christoffel))
    }

    /// ∇R as a covector.
    pub fn grad_r(&self) -> Result<&TensorJet, GeomError> {
        self.grad_r.get_or_try_init(|| {
            let b = self.curv()?;
            self.ctx.gradient_cov(&b.scalar)
        })
    }

    /// ∇∇R.
    pub fn hess_r(&self) -> Result<&TensorJet, GeomError> {
        self.hess_r.get_or_try_init(|| {
            let b = self.curv()?;
            self.ctx.hessian_scalar(&b.scalar)
        })
    }

    pub fn grad_f_cov(&self) -> Result<&TensorJet, GeomError> {
        self.grad_f_cov.get_or_try_init(|| self.ctx.grad_f_cov())
    }

    pub fn grad_f_vec(&self) -> Result<&TensorJet, GeomError> {
        self.grad_f_vec.get_or_try_init(|| self.ctx.grad_f_vec())
    }

    pub fn rm_chain(&self) -> Result<&DivergenceChain, GeomError> {
        self.rm_chain.get_or_try_init(|| {
            let b = self.curv()?;
            div_chain_from(&b.riemann, &self.ctx, Family::Riemann, 4)
        })
    }

    pub fn w_chain(&self) -> Result<&DivergenceChain, GeomError> {
        self.w_chain
            .get_or_try_init(|| div_chain_from(self.weyl()?, &self.ctx, Family::Weyl, 4))
    }

    pub fn cotton(&self) -> Result<&TensorJet, GeomError> {
        self.cotton.get_or_try_init(|| {
            crate::curvature::cotton_from_parts(&self.ctx.metric, self.nabla_ric()?, self.grad_r()?)
        })
    }

    /// `q_{ik} = R_{ijkl} Ric^{jl}`.
    pub fn rm_dot_ric(&self) -> Result<&TensorJet, GeomError> {
        self.rm_dot_ric.get_or_try_init(|| {
            let b = self.curv()?;
            let ric_up = b.ricci.raise_all(&self.ctx.inv_metric);
            let n = self.n();
            let rm = &b.riemann;
            Ok(TensorJet::from_fn(
                n,
                &[crate::tensor::Slot::Cov, crate::tensor::Slot::Cov],
                |idx| {
                    let (i, k) = (idx[0], idx[1]);
                    let mut acc: Option<Jet> = None;
                    for j in 0..n {
                        for l in 0..n {
                            let t = rm.get(&[i, j, k, l]).mul(ric_up.get(&[j, l]));
                            acc = Some(match acc {
                                None => t,
                                Some(prev) => prev.add(&t),
                            });
                        }
                    }
                    acc.unwrap()
                },
            ))
        })
    }

    /// `(Ric^2)_{ik} = R_{ij} R^j_k`.
    pub fn ric_sq(&self) -> Result<&TensorJet, GeomError> {
        self.ric_sq.get_or_try_init(|| {
            let b = self.curv()?;
            let mixed = b.ricci.raise(1, &self.ctx.inv_metric)?;
            let n = self.n();
            let ric = &b.ricci;
            Ok(TensorJet::from_fn(
                n,
                &[crate::tensor::Slot::Cov, crate::tensor::Slot::Cov],
                |idx| {
                    let (i, k) = (idx[0], idx[1]);
                    let mut acc: Option<Jet> = None;
                    for j in 0..n {
                        let t = mixed.get(&[i, j]).mul(ric.get(&[j, k]));
                        acc = Some(match acc {
                            None => t,
                            Some(prev) => prev.add(&t),
                        });
                    }
                    acc.unwrap()
                },
            ))
        })
    }

    pub fn var2_rm(&self) -> Result<&(TensorJet, TensorJet), GeomError> {
        self.var2_rm.get_or_try_init(|| {
            let b = self.curv()?;
            crate::divchain::div2_ordering_variants_from(&b.riemann, &self.ctx)
        })
    }

    pub fn var2_w(&self) -> Result<&(TensorJet, TensorJet), GeomError> {
        self.var2_w
            .get_or_try_init(|| crate::divchain::div2_ordering_variants_from(self.weyl()?, &self.ctx))
    }

    /// `(div Ric)_k = g^{ab} ∇_a R_{bk}`.
    pub fn div_ric(&self) -> Result<TensorJet, GeomError> {
        Ok(self.nabla_ric()?.contract(0, 1, Some(&self.ctx.inv_metric))?)
    }

    pub fn norm_sq_value(&self, t: &TensorJet) -> f64 {
        self.ctx.norm_sq(t).value()
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Result of one check over one sample plan. The serialized schema is
/// exactly the eight fields below; rows with `points == 0` mean the check
/// was not applicable to the model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub model: String,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub argmax_point: Option<Vec<f64>>,
    pub pass: bool,
    pub tolerance: f64,
    /// Largest witness magnitude seen; not part of the wire schema.
    #[serde(skip, default)]
    pub max_witness: f64,
    /// Classifier verdict for tier-C rows; not part of the wire schema.
    #[serde(skip, default)]
    pub verdict: Option<String>,
}

impl CheckReport {
    pub fn not_applicable(check: &CheckSpec, model: &ModelSpec, tol: Option<f64>) -> CheckReport {
        CheckReport {
            check_id: check.id.to_string(),
            model: model.name.clone(),
            points: 0,
            max_residual: 0.0,
            mean_residual: 0.0,
            argmax_point: None,
            pass: true,
            tolerance: tol.unwrap_or(check.default_tol),
            max_witness: 0.0,
            verdict: None,
        }
    }

    pub fn is_applicable(&self) -> bool {
        self.points > 0
    }
}

/// Serializes reports as the fixed JSON array schema.
pub fn reports_to_json(reports: &[CheckReport]) -> String {
    serde_json::to_string_pretty(reports).expect("report serialization")
}

/// Aligned plain-text rendering of the same data.
pub fn reports_to_text(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    let id_w = reports
        .iter()
        .map(|r| r.check_id.len())
        .chain(std::iter::once(5))
        .max()
        .unwrap();
    out.push_str(&format!(
        "{:<id_w$}  {:<6}  {:>6}  {:>12}  {:>12}  {:>9}  note\n",
        "check", "status", "points", "max_residual", "mean_residual", "tolerance",
    ));
    for r in reports {
        let status = if !r.is_applicable() {
            "n/a"
        } else if r.pass {
            "pass"
        } else {
            "FAIL"
        };
        let note = match &r.verdict {
            Some(v) => format!("verdict={v}"),
            None if !r.is_applicable() => "not applicable".to_string(),
            None => String::new(),
        };
        out.push_str(&format!(
            "{:<id_w$}  {:<6}  {:>6}  {:>12.3e}  {:>12.3e}  {:>9.1e}  {}\n",
            r.check_id, status, r.points, r.max_residual, r.mean_residual, r.tolerance, note,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

fn evaluate_checks(
    model: &ModelSpec,
    checks: &[&'static CheckSpec],
    plan: &SamplePlan,
    tol: Option<f64>,
) -> Result<Vec<CheckReport>, VerifyError> {
    let mut reports: Vec<CheckReport> = Vec::with_capacity(checks.len());
    let applicable: Vec<&'static CheckSpec> = checks
        .iter()
        .copied()
        .filter(|c| c.applicable(model) && c.tier != Tier::C)
        .collect();

    // Evaluate every applicable non-classifier check at every point; the
    // per-point workspace is shared across checks, and reductions run in
    // point order so reports are deterministic.
    let per_point: Vec<Result<Vec<Eval>, (Vec<f64>, String, GeomError)>> = plan
        .points
        .par_iter()
        .map(|p| {
            let ws = PointWorkspace::new(model, p)
                .map_err(|e| (p.clone(), "<workspace>".to_string(), e))?;
            applicable
                .iter()
                .map(|c| (c.eval)(&ws).map_err(|e| (p.clone(), c.id.to_string(), e)))
                .collect()
        })
        .collect();

    let mut evals: Vec<Vec<Eval>> = Vec::with_capacity(plan.points.len());
    for row in per_point {
        match row {
            Ok(v) => evals.push(v),
            Err((point, check, source)) => {
                return Err(VerifyError::Geometry {
                    check,
                    point,
                    source,
                })
            }
        }
    }

    for (ci, check) in applicable.iter().enumerate() {
        let tolerance = tol.unwrap_or(check.default_tol);
        let mut max_residual = f64::NEG_INFINITY;
        let mut argmax = 0usize;
        let mut sum = 0.0;
        let mut max_witness = 0.0f64;
        for (pi, row) in evals.iter().enumerate() {
            let e = row[ci];
            if e.residual > max_residual {
                max_residual = e.residual;
                argmax = pi;
            }
            sum += e.residual;
            max_witness = max_witness.max(e.witness);
        }
        reports.push(CheckReport {
            check_id: check.id.to_string(),
            model: model.name.clone(),
            points: plan.points.len(),
            max_residual,
            mean_residual: sum / plan.points.len() as f64,
            argmax_point: Some(plan.points[argmax].clone()),
            pass: max_residual <= tolerance,
            tolerance,
            max_witness,
            verdict: None,
        });
    }

    for check in checks {
        if check.tier == Tier::C && check.applicable(model) {
            reports.push(classify::classifier_report(check, model, plan, tol));
        }
    }

    for check in checks {
        if !check.applicable(model) {
            reports.push(CheckReport::not_applicable(check, model, tol));
        }
    }

    reports.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(reports)
}

/// Runs a single check; inapplicable checks are an error here (the tier
/// and id runners report them as rows instead).
pub fn run_check(
    id: &str,
    model: &ModelSpec,
    plan: &SamplePlan,
    tol: Option<f64>,
) -> Result<CheckReport, VerifyError> {
    let check = find_check(id).ok_or_else(|| VerifyError::UnknownCheck(id.to_string()))?;
    if !check.applicable(model) {
        return Err(VerifyError::NotApplicable {
            check: id.to_string(),
            model: model.name.clone(),
        });
    }
    let reports = evaluate_checks(model, &[check], plan, tol)?;
    Ok(reports.into_iter().next().unwrap())
}

/// Runs every check of a tier; inapplicable checks appear as
/// not-applicable rows rather than being silently skipped.
pub fn run_tier(
    tier: Tier,
    model: &ModelSpec,
    plan: &SamplePlan,
    tol: Option<f64>,
) -> Result<Vec<CheckReport>, VerifyError> {
    let checks: Vec<&'static CheckSpec> =
        registry().iter().filter(|c| c.tier == tier).collect();
    evaluate_checks(model, &checks, plan, tol)
}

/// Runs an explicit list of check ids (explicitly requested inapplicable
/// checks are reported as rows, not errors).
pub fn run_ids(
    ids: &[String],
    model: &ModelSpec,
    plan: &SamplePlan,
    tol: Option<f64>,
) -> Result<Vec<CheckReport>, VerifyError> {
    let mut checks = Vec::with_capacity(ids.len());
    for id in ids {
        checks.push(find_check(id).ok_or_else(|| VerifyError::UnknownCheck(id.clone()))?);
    }
    checks.sort_by_key(|c| c.id);
    checks.dedup_by_key(|c| c.id);
    evaluate_checks(model, &checks, plan, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{find_model, sample_points};

    #[test]
    fn registry_matches_golden_manifest() {
        let ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        let golden = vec![
            "A.bianchi2c",
            "A.bianchi_traced",
            "A.div_w_vs_cotton",
            "A.grad_r_cs",
            "A.weyl_dim3",
            "A.weyl_tracefree",
            "B.c6_33",
            "B.c6_34",
            "B.c6_35",
            "B.c6_36",
            "B.c6_37",
            "B.d_identity",
            "B.grad_r_ric_bound",
            "B.p2_10",
            "B.p2_12",
            "B.p2_13",
            "B.p2_14",
            "B.p2_15",
            "B.p2_3",
            "B.p2_5",
            "B.p2_7",
            "B.p2_8",
            "B.p2_9",
            "B.p6_30",
            "B.p6_31",
            "B.p6_32",
            "B.r_nonneg",
            "B.radial_flat",
            "B.rem2_1_order",
            "B.rem2_1_sym",
            "B.rem8_39",
            "B.rem8_40",
            "B.ric2_lambda_r",
            "B.rigid_div3rm_radial",
            "B.rigid_div3w_radial",
            "B.rigid_div4rm",
            "B.rigid_div4w",
            "B.soliton_gate",
            "B.thm5_1",
            "C.classify_dim4",
        ];
        assert_eq!(ids, golden);
        assert!(ids.len() >= 25);
    }

    #[test]
    fn check_ids_are_unique_and_sorted() {
        let ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn tier_b_checks_declare_potential_requirement() {
        for c in registry() {
            if c.tier == Tier::B {
                assert!(
                    c.requires_potential,
                    "{} must gate on the potential",
                    c.id
                );
            }
        }
    }

    #[test]
    fn unknown_check_is_an_error() {
        let m = find_model("gaussian4").unwrap().spec;
        let plan = sample_points(&m, 1, 0).unwrap();
        assert!(matches!(
            run_check("B.nonsense", &m, &plan, None),
            Err(VerifyError::UnknownCheck(_))
        ));
    }

    #[test]
    fn tier_b_check_on_potential_free_model_is_not_applicable() {
        let m = find_model("warped_test").unwrap().spec;
        let plan = sample_points(&m, 1, 0).unwrap();
        assert!(matches!(
            run_check("B.p2_13", &m, &plan, None),
            Err(VerifyError::NotApplicable { .. })
        ));
        // ... but requesting it through run_ids reports a row
        let rows = run_ids(&["B.p2_13".to_string()], &m, &plan, None).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(!rows[0].is_applicable());
        assert!(rows[0].pass);
    }

    #[test]
    fn reports_serialize_with_fixed_field_names() {
        let m = find_model("gaussian4").unwrap().spec;
        let plan = sample_points(&m, 2, 3).unwrap();
        let rows = run_ids(&["A.bianchi2c".to_string()], &m, &plan, None).unwrap();
        let json = reports_to_json(&rows);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let row = &parsed.as_array().unwrap()[0];
        let mut keys: Vec<&str> = row.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        keys.sort_unstable();
        let mut want = vec![
            "check_id",
            "model",
            "points",
            "max_residual",
            "mean_residual",
            "argmax_point",
            "pass",
            "tolerance",
        ];
        want.sort_unstable();
        assert_eq!(keys, want);
        // and the array round-trips
        let back: Vec<CheckReport> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), rows.len());
        assert_eq!(back[0].check_id, rows[0].check_id);
    }

    #[test]
    fn runner_is_deterministic() {
        let m = find_model("product_r2s2").unwrap().spec;
        let plan = sample_points(&m, 12, 7).unwrap();
        let a = run_tier(Tier::B, &m, &plan, None).unwrap();
        let b = run_tier(Tier::B, &m, &plan, None).unwrap();
        assert_eq!(reports_to_json(&a), reports_to_json(&b));
    }
}
