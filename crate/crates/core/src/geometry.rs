//! Charts, metric and inverse-metric jets, the Levi-Civita connection,
//! covariant differentiation, gradients, Hessians and the drift Laplacian.
//!
//! Index conventions (see also `docs/CONVENTIONS.md`): the covariant
//! derivative slot is PREPENDED, so `(∇T)_{a i1..ik} = ∂_a T_{i1..ik} -
//! Σ_s Γ^m_{a i_s} T_{..m..}` and iterated derivatives read outermost
//! first, matching the usual leftmost-nabla notation.

use crate::expr::{evaluate, Expr};
use crate::jet::{jet_evaluate, jet_table, Jet};
use crate::tensor::{Slot, SlotError, TensorJet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("domain error in scalar evaluation: {0}")]
    Eval(#[from] crate::expr::EvalError),
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("jet order exhausted, cannot take another derivative")]
    OrderExhausted,
    #[error("model has no potential")]
    MissingPotential,
    #[error("operation needs dimension {needs}, chart has {got}")]
    Dimension { needs: usize, got: usize },
    #[error("slot error: {0}")]
    Slot(#[from] SlotError),
    #[error("degenerate 2-plane")]
    DegeneratePlane,
}

/// An explicit Riemannian chart: coordinates, metric component
/// expressions, optional soliton data, and the sampling box.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    /// Symmetric n x n matrix of component expressions.
    pub metric: Vec<Vec<Expr>>,
    pub potential: Option<Expr>,
    pub lambda: Option<f64>,
    /// Closed sampling interval per coordinate.
    pub domain: Vec<(f64, f64)>,
    /// Singularity-avoidance margin per coordinate; the sampler shrinks
    /// the domain box by these before drawing points.
    pub margins: Vec<f64>,
    /// Catalog label for models with a known classification.
    pub expected_class: Option<String>,
}

impl ModelSpec {
    pub fn coord_refs(&self) -> Vec<&str> {
        self.coords.iter().map(|s| s.as_str()).collect()
    }

    /// Center of the margin-shrunk sampling box.
    pub fn box_center(&self) -> Vec<f64> {
        self.domain
            .iter()
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// Copy equipped with a different potential/lambda pair.
    pub fn with_potential(&self, potential: Expr, lambda: f64) -> ModelSpec {
        let mut out = self.clone();
        out.potential = Some(potential);
        out.lambda = Some(lambda);
        out
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some() && self.lambda.is_some()
    }
}

/// Cholesky factor of a symmetric matrix in row-major order, if positive
/// definite.
pub(crate) fn cholesky(mat: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = mat[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Dense inverse by Gauss-Jordan with partial pivoting; charts are tiny.
fn invert_dense(mat: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = mat.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let d = a[col * n + col];
        for k in 0..n {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for row in 0..n {
            if row != col {
                let factor = a[row * n + col];
                if factor != 0.0 {
                    for k in 0..n {
                        a[row * n + k] -= factor * a[col * n + k];
                        inv[row * n + k] -= factor * inv[col * n + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Jets of the metric components at `p`, checked positive definite.
pub fn metric_jet(m: &ModelSpec, p: &[f64], r: usize) -> Result<TensorJet, GeomError> {
    let n = m.dim;
    let mut jets: Vec<Jet> = Vec::with_capacity(n * n);
    for row in &m.metric {
        for e in row {
            jets.push(jet_evaluate(e, p, r)?);
        }
    }
    let order0: Vec<f64> = jets.iter().map(|j| j.value()).collect();
    if cholesky(&order0, n).is_none() {
        return Err(GeomError::NotPositiveDefinite { point: p.to_vec() });
    }
    let mut it = jets.into_iter();
    Ok(TensorJet::from_fn(n, &[Slot::Cov, Slot::Cov], |_| {
        it.next().unwrap()
    }))
}

/// Jet of the matrix inverse of a (0,2) metric jet, to the same order.
///
/// Works degree by degree through the product rule on `g g^{-1} = I`:
/// `∂^γ(g^{-1}) = -g0^{-1} Σ_{0<α<=γ} C(γ,α) (∂^α g)(∂^{γ-α} g^{-1})`.
pub fn inverse_metric_jet(g: &TensorJet) -> Result<TensorJet, GeomError> {
    let n = g.dim();
    assert_eq!(g.slots(), &[Slot::Cov, Slot::Cov]);
    let order = g.order();
    let table = jet_table(n, order);
    let len = table.len();
    let sample = g.get(&[0, 0]);
    let center: Arc<[f64]> = Arc::from(sample.center());

    let order0: Vec<f64> = {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                v[i * n + j] = g.get(&[i, j]).value();
            }
        }
        v
    };
    if cholesky(&order0, n).is_none() {
        return Err(GeomError::NotPositiveDefinite {
            point: sample.center().to_vec(),
        });
    }
    let g0_inv = invert_dense(&order0, n).ok_or_else(|| GeomError::NotPositiveDefinite {
        point: sample.center().to_vec(),
    })?;

    // inv[c][i*n+j] = coefficient c of (g^{-1})_{ij}
    let mut inv = vec![vec![0.0f64; n * n]; len];
    inv[0].copy_from_slice(&g0_inv);
    let graw: Vec<&[f64]> = (0..n * n)
        .map(|k| g.components()[k].raw())
        .collect();
    let mut rhs = vec![0.0f64; n * n];
    for out in 1..len {
        rhs.iter_mut().for_each(|x| *x = 0.0);
        for &(ia, ib, w) in table.mul_pairs(out) {
            // skip the α = 0 term; it holds the unknown ∂^γ g^{-1}
            if ia == 0 {
                continue;
            }
            let dg = &graw; // ∂^α g lives at coefficient ia
            let prev = &inv[ib as usize];
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += dg[i * n + k][ia as usize] * prev[k * n + j];
                    }
                    rhs[i * n + j] += w * s;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += g0_inv[i * n + k] * rhs[k * n + j];
                }
                inv[out][i * n + j] = -s;
            }
        }
    }

    Ok(TensorJet::from_fn(n, &[Slot::Con, Slot::Con], |idx| {
        let k = idx[0] * n + idx[1];
        let coeffs = inv.iter().map(|c| c[k]).collect();
        Jet::from_raw(center.clone(), table.clone(), coeffs)
    }))
}

/// Christoffel symbols of the Levi-Civita connection as jets; symmetric in
/// the lower pair, one jet order below the metric.
#[derive(Clone, Debug)]
pub struct ChristoffelJet {
    /// Slots (Con, Cov, Cov) indexed as Γ^k_{ij}.
    inner: TensorJet,
}

impl ChristoffelJet {
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet {
        self.inner.get(&[k, i, j])
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn as_tensor(&self) -> &TensorJet {
        &self.inner
    }
}

/// Γ^k_{ij} = 1/2 g^{kl} (∂_i g_{jl} + ∂_j g_{il} - ∂_l g_{ij}) from metric
/// jets of order >= 1.
pub fn christoffel_from_metric(
    g: &TensorJet,
    g_inv: &TensorJet,
) -> Result<ChristoffelJet, GeomError> {
    if g.order() == 0 {
        return Err(GeomError::OrderExhausted);
    }
    let n = g.dim();
    // ∂_i g_{jl} as jets of order r-1
    let mut dg = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                dg.push(g.get(&[j, l]).derivative(i));
            }
        }
    }
    let at = |i: usize, j: usize, l: usize| &dg[(i * n + j) * n + l];
    let gi = g_inv.truncated(g.order() - 1);
    let inner = TensorJet::from_fn(n, &[Slot::Con, Slot::Cov, Slot::Cov], |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc: Option<Jet> = None;
        for l in 0..n {
            let sum = at(i, j, l).add(at(j, i, l)).sub(at(l, i, j));
            let term = sum.mul(gi.get(&[k, l]));
            acc = Some(match acc {
                None => term,
                Some(prev) => prev.add(&term),
            });
        }
        acc.unwrap().scaled(0.5)
    });
    Ok(ChristoffelJet { inner })
}

/// Standalone Christoffel computation; consumes one metric-jet order, so
/// the metric is requested at `r + 1`.
pub fn christoffel_jet(m: &ModelSpec, p: &[f64], r: usize) -> Result<ChristoffelJet, GeomError> {
    let g = metric_jet(m, p, r + 1)?;
    let g_inv = inverse_metric_jet(&g)?;
    christoffel_from_metric(&g, &g_inv)
}

/// Covariant derivative of a fully covariant tensor; the derivative slot
/// is prepended and the output is one jet order lower.
pub fn covariant_derivative(t: &TensorJet, gamma: &ChristoffelJet) -> Result<TensorJet, GeomError> {
    if t.order() == 0 {
        return Err(GeomError::OrderExhausted);
    }
    assert!(
        t.is_fully_covariant(),
        "covariant_derivative expects a fully covariant tensor; raise/lower first"
    );
    let n = t.dim();
    let rank = t.rank();
    let out_order = t.order() - 1;
    // connections usually carry a higher order than the tensor; truncate
    // once here instead of on every product
    let gamma = gamma.as_tensor().truncated(out_order);
    let t_trunc = t.truncated(out_order);
    let mut slots = Vec::with_capacity(rank + 1);
    slots.push(Slot::Cov);
    slots.extend_from_slice(t.slots());
    let out = TensorJet::from_fn(n, &slots, |idx| {
        let a = idx[0];
        let inner = &idx[1..];
        let mut acc = t.get(inner).derivative(a);
        let mut src: Vec<usize> = inner.to_vec();
        for (s, &is) in inner.iter().enumerate() {
            for m in 0..n {
                let gam = gamma.get(&[m, a, is]);
                src[s] = m;
                acc = acc.sub(&gam.mul(t_trunc.get(&src)));
            }
            src[s] = is;
        }
        acc
    });
    Ok(out)
}

/// Everything order-bearing the engine needs at one point, computed once:
/// metric, inverse metric and connection jets plus the potential jet.
pub struct PointContext<'m> {
    pub model: &'m ModelSpec,
    pub point: Vec<f64>,
    pub center: Arc<[f64]>,
    pub metric: TensorJet,
    pub inv_metric: TensorJet,
    pub christoffel: ChristoffelJet,
    pub potential: Option<Jet>,
}

impl<'m> PointContext<'m> {
    pub fn new(model: &'m ModelSpec, point: &[f64], order: usize) -> Result<Self, GeomError> {
        let metric = metric_jet(model, point, order)?;
        let inv_metric = inverse_metric_jet(&metric)?;
        let christoffel = christoffel_from_metric(&metric, &inv_metric)?;
        let potential = match &model.potential {
            Some(f) => Some(jet_evaluate(f, point, order)?),
            None => None,
        };
        Ok(PointContext {
            model,
            point: point.to_vec(),
            center: Arc::from(point),
            metric,
            inv_metric,
            christoffel,
            potential,
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    pub fn lambda(&self) -> Option<f64> {
        self.model.lambda
    }

    /// Gradient covector of a scalar jet (plain partials).
    pub fn gradient_cov(&self, s: &Jet) -> Result<TensorJet, GeomError> {
        if s.order() == 0 {
            return Err(GeomError::OrderExhausted);
        }
        Ok(TensorJet::from_fn(self.dim(), &[Slot::Cov], |idx| {
            s.derivative(idx[0])
        }))
    }

    /// Gradient vector: covector raised with the inverse metric.
    pub fn gradient_vec(&self, s: &Jet) -> Result<TensorJet, GeomError> {
        Ok(self.gradient_cov(s)?.raise(0, &self.inv_metric)?)
    }

    /// Covariant Hessian ∇∇s of a scalar jet.
    pub fn hessian_scalar(&self, s: &Jet) -> Result<TensorJet, GeomError> {
        let grad = self.gradient_cov(s)?;
        covariant_derivative(&grad, &self.christoffel)
    }

    pub fn grad_f_cov(&self) -> Result<TensorJet, GeomError> {
        let f = self.potential.as_ref().ok_or(GeomError::MissingPotential)?;
        self.gradient_cov(f)
    }

    pub fn grad_f_vec(&self) -> Result<TensorJet, GeomError> {
        let f = self.potential.as_ref().ok_or(GeomError::MissingPotential)?;
        self.gradient_vec(f)
    }

    pub fn hessian_f(&self) -> Result<TensorJet, GeomError> {
        let f = self.potential.as_ref().ok_or(GeomError::MissingPotential)?;
        self.hessian_scalar(f)
    }

    /// Rough Laplacian Δ T = g^{ab} ∇_a ∇_b T (contracts the two prepended
    /// derivative slots).
    pub fn laplacian(&self, t: &TensorJet) -> Result<TensorJet, GeomError> {
        let d1 = covariant_derivative(t, &self.christoffel)?;
        let d2 = covariant_derivative(&d1, &self.christoffel)?;
        Ok(d2.contract(0, 1, Some(&self.inv_metric))?)
    }

    /// Directional derivative ∇_v T for a contravariant direction v.
    pub fn nabla_dir(&self, t: &TensorJet, v: &TensorJet) -> Result<TensorJet, GeomError> {
        let d1 = covariant_derivative(t, &self.christoffel)?;
        Ok(d1.contract_vec(0, v)?)
    }

    /// Drift Laplacian Δ_f T = Δ T - ∇_{∇f} T.
    pub fn weighted_laplacian(&self, t: &TensorJet) -> Result<TensorJet, GeomError> {
        let gf = self.grad_f_vec()?;
        let lap = self.laplacian(t)?;
        let drift = self.nabla_dir(t, &gf)?;
        Ok(lap.sub(&drift))
    }

    /// Δ_f of a scalar jet.
    pub fn weighted_laplacian_scalar(&self, s: &Jet) -> Result<Jet, GeomError> {
        let t = self.weighted_laplacian(&TensorJet::scalar(s.clone()))?;
        Ok(t.as_scalar().clone())
    }

    /// Squared norm of a covariant tensor under the chart metric.
    pub fn norm_sq(&self, t: &TensorJet) -> Jet {
        t.norm_sq(&self.inv_metric)
    }
}

/// Covariant Hessian of an explicit scalar expression at a point.
pub fn hessian(
    f: &Expr,
    m: &ModelSpec,
    p: &[f64],
    r: usize,
) -> Result<TensorJet, GeomError> {
    let ctx = PointContext::new(m, p, r)?;
    let fj = jet_evaluate(f, p, r)?;
    ctx.hessian_scalar(&fj)
}

/// Drift Laplacian of a covariant tensor against the model potential.
pub fn weighted_laplacian(
    t: &TensorJet,
    m: &ModelSpec,
    p: &[f64],
) -> Result<TensorJet, GeomError> {
    let ctx = PointContext::new(m, p, t.order().max(2))?;
    ctx.weighted_laplacian(t)
}

/// Evaluates the metric at order 0 into a row-major matrix.
pub fn metric_values(m: &ModelSpec, p: &[f64]) -> Result<Vec<f64>, GeomError> {
    let n = m.dim;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = evaluate(&m.metric[i][j], p)?;
        }
    }
    Ok(out)
}

/// Max-abs order-0 entry of `lhs - rhs` over all components, normalized by
/// `1 + max(|lhs|, |rhs|)`; the residual measure used everywhere.
pub fn residual(lhs: &TensorJet, rhs: &TensorJet) -> f64 {
    let gap = lhs.sub(rhs).max_abs();
    gap / (1.0 + lhs.max_abs().max(rhs.max_abs()))
}

pub fn residual_scalar(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use approx::assert_relative_eq;

    fn polar_plane() -> ModelSpec {
        let coords = ["rho", "theta"];
        ModelSpec {
            name: "polar".into(),
            dim: 2,
            coords: coords.iter().map(|s| s.to_string()).collect(),
            metric: vec![
                vec![
                    parse_expression("1", &coords).unwrap(),
                    parse_expression("0", &coords).unwrap(),
                ],
                vec![
                    parse_expression("0", &coords).unwrap(),
                    parse_expression("rho^2", &coords).unwrap(),
                ],
            ],
            potential: None,
            lambda: None,
            domain: vec![(0.5, 3.0), (0.2, 6.0)],
            margins: vec![0.0, 0.0],
            expected_class: None,
        }
    }

    fn flat4() -> ModelSpec {
        let coords = ["x1", "x2", "x3", "x4"];
        let zero = parse_expression("0", &coords).unwrap();
        let one = parse_expression("1", &coords).unwrap();
        let metric = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| if i == j { one.clone() } else { zero.clone() })
                    .collect()
            })
            .collect();
        ModelSpec {
            name: "flat4".into(),
            dim: 4,
            coords: coords.iter().map(|s| s.to_string()).collect(),
            metric,
            potential: Some(parse_expression("(x1^2+x2^2+x3^2+x4^2)/4", &coords).unwrap()),
            lambda: Some(0.5),
            domain: vec![(-2.0, 2.0); 4],
            margins: vec![0.0; 4],
            expected_class: None,
        }
    }

    /// Round 2-sphere factor in polar angles, radius squared rr.
    fn sphere2(rr: f64) -> ModelSpec {
        let coords = ["theta", "phi"];
        ModelSpec {
            name: "s2".into(),
            dim: 2,
            coords: coords.iter().map(|s| s.to_string()).collect(),
            metric: vec![
                vec![
                    parse_expression(&format!("{rr}"), &coords).unwrap(),
                    parse_expression("0", &coords).unwrap(),
                ],
                vec![
                    parse_expression("0", &coords).unwrap(),
                    parse_expression(&format!("{rr}*sin(theta)^2"), &coords).unwrap(),
                ],
            ],
            potential: None,
            lambda: None,
            domain: vec![(0.4, 2.7), (0.3, 6.0)],
            margins: vec![0.0, 0.0],
            expected_class: None,
        }
    }

    #[test]
    fn polar_metric_jet_values() {
        let m = polar_plane();
        let g = metric_jet(&m, &[2.0, 1.0], 2).unwrap();
        let gtt = g.get(&[1, 1]);
        assert_relative_eq!(gtt.coefficient(&[0, 0]).unwrap(), 4.0);
        assert_relative_eq!(gtt.coefficient(&[1, 0]).unwrap(), 4.0);
        assert_relative_eq!(gtt.coefficient(&[2, 0]).unwrap(), 2.0);
        assert_relative_eq!(g.get(&[0, 1]).value(), 0.0);
    }

    #[test]
    fn polar_inverse_metric_jet() {
        let m = polar_plane();
        let g = metric_jet(&m, &[2.0, 1.0], 3).unwrap();
        let gi = inverse_metric_jet(&g).unwrap();
        assert_relative_eq!(gi.get(&[1, 1]).value(), 0.25);
        // ∂_rho g^{theta theta} = -2/rho^3 = -0.25 at rho = 2
        assert_relative_eq!(
            gi.get(&[1, 1]).coefficient(&[1, 0]).unwrap(),
            -0.25,
            epsilon = 1e-13
        );
        assert_relative_eq!(gi.get(&[0, 0]).value(), 1.0);
    }

    #[test]
    fn inverse_contracts_to_identity_as_jets() {
        let m = polar_plane();
        let g = metric_jet(&m, &[1.7, 2.3], 4).unwrap();
        let gi = inverse_metric_jet(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc: Option<Jet> = None;
                for k in 0..2 {
                    let term = gi.get(&[i, k]).mul(g.get(&[k, j]));
                    acc = Some(match acc {
                        None => term,
                        Some(p) => p.add(&term),
                    });
                }
                let id = acc.unwrap();
                let want0 = if i == j { 1.0 } else { 0.0 };
                for (_, v) in id.coefficients() {
                    let _ = v;
                }
                assert!((id.value() - want0).abs() < 1e-12);
                assert!(
                    id.coefficients()
                        .skip(1)
                        .all(|(_, v)| v.abs() < 1e-10),
                    "derivative of g g^{{-1}} should vanish"
                );
            }
        }
    }

    #[test]
    fn identity_metric_inverts_to_identity() {
        let m = flat4();
        let g = metric_jet(&m, &[0.3, -0.4, 1.0, 0.2], 3).unwrap();
        let gi = inverse_metric_jet(&g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(gi.get(&[i, j]).value(), want);
                assert!(gi.get(&[i, j]).coefficients().skip(1).all(|(_, v)| v == 0.0));
            }
        }
    }

    #[test]
    fn flat_christoffels_vanish() {
        let m = flat4();
        let gamma = christoffel_jet(&m, &[0.5, 0.5, -0.5, 0.0], 3).unwrap();
        assert!(gamma.as_tensor().max_abs() < 1e-14);
    }

    #[test]
    fn polar_christoffels_match_hand_values() {
        let m = polar_plane();
        let gamma = christoffel_jet(&m, &[2.0, 1.0], 3).unwrap();
        // Γ^rho_{theta theta} = -rho, Γ^theta_{rho theta} = 1/rho
        assert_relative_eq!(gamma.gamma(0, 1, 1).value(), -2.0, epsilon = 1e-13);
        assert_relative_eq!(gamma.gamma(1, 0, 1).value(), 0.5, epsilon = 1e-13);
        assert_relative_eq!(gamma.gamma(1, 1, 0).value(), 0.5, epsilon = 1e-13);
        assert_relative_eq!(gamma.gamma(0, 0, 0).value(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn sphere_christoffel_at_pi_third() {
        let m = sphere2(4.0);
        let theta = std::f64::consts::FRAC_PI_3;
        let gamma = christoffel_jet(&m, &[theta, 1.0], 3).unwrap();
        // Γ^theta_{phi phi} = -sin(theta) cos(theta)
        let want = -(theta.sin() * theta.cos());
        assert_relative_eq!(gamma.gamma(0, 1, 1).value(), want, epsilon = 1e-12);
        assert_relative_eq!(want, -0.4330127018922193, epsilon = 1e-12);
    }

    #[test]
    fn christoffel_symmetric_in_lower_indices() {
        let m = sphere2(2.0);
        let gamma = christoffel_jet(&m, &[1.1, 2.0], 4).unwrap();
        let n = 2;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let a = gamma.gamma(k, i, j).value();
                    let b = gamma.gamma(k, j, i).value();
                    assert_eq!(a, b, "torsion at ({k},{i},{j})");
                }
            }
        }
    }

    #[test]
    fn metric_compatibility() {
        for (m, p) in [
            (polar_plane(), vec![1.3, 0.8]),
            (sphere2(4.0), vec![1.0, 2.0]),
        ] {
            let ctx = PointContext::new(&m, &p, 4).unwrap();
            let nabla_g = covariant_derivative(&ctx.metric, &ctx.christoffel).unwrap();
            assert!(
                nabla_g.max_abs() <= 1e-10,
                "∇g = {} on {}",
                nabla_g.max_abs(),
                m.name
            );
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let m = flat4();
        let ctx = PointContext::new(&m, &[1.0, 0.0, 0.0, 0.0], 3).unwrap();
        let c = Jet::constant(ctx.center.clone(), 3, 7.5);
        let grad = ctx.gradient_cov(&c).unwrap();
        assert_eq!(grad.max_abs(), 0.0);
    }

    #[test]
    fn gaussian_hessian_is_half_metric() {
        let m = flat4();
        let ctx = PointContext::new(&m, &[1.0, -0.3, 0.7, 0.1], 4).unwrap();
        let hess = ctx.hessian_f().unwrap();
        let target = ctx.metric.scaled(0.5);
        assert!(residual(&hess, &target) < 1e-13);
    }

    #[test]
    fn raised_gradient_on_flat_chart() {
        let m = flat4();
        let ctx = PointContext::new(&m, &[1.0, 0.0, 0.0, 0.0], 3).unwrap();
        let gf = ctx.grad_f_vec().unwrap();
        assert_relative_eq!(gf.get(&[0]).value(), 0.5);
        for i in 1..4 {
            assert_relative_eq!(gf.get(&[i]).value(), 0.0);
        }
    }

    #[test]
    fn hessian_is_symmetric_on_curved_chart() {
        let coords = ["theta", "phi"];
        let mut m = sphere2(4.0);
        m.potential = Some(parse_expression("sin(theta)*cos(phi)", &coords).unwrap());
        m.lambda = Some(0.5);
        let ctx = PointContext::new(&m, &[1.2, 0.9], 4).unwrap();
        let h = ctx.hessian_f().unwrap();
        let ht = h.swap_slots(0, 1);
        assert!(residual(&h, &ht) <= 1e-10);
    }

    #[test]
    fn weighted_laplacian_of_constant_vanishes() {
        let m = flat4();
        let ctx = PointContext::new(&m, &[0.4, 0.2, -0.7, 1.1], 4).unwrap();
        let c = Jet::constant(ctx.center.clone(), 4, 3.0);
        let out = ctx.weighted_laplacian_scalar(&c).unwrap();
        assert_eq!(out.value(), 0.0);
    }

    #[test]
    fn missing_potential_is_reported() {
        let m = polar_plane();
        let ctx = PointContext::new(&m, &[1.5, 1.0], 3).unwrap();
        assert!(matches!(ctx.grad_f_vec(), Err(GeomError::MissingPotential)));
    }

    #[test]
    fn order_exhaustion_is_reported() {
        let m = polar_plane();
        let ctx = PointContext::new(&m, &[1.5, 1.0], 2).unwrap();
        let scalar = TensorJet::scalar(Jet::constant(ctx.center.clone(), 0, 1.0));
        assert!(matches!(
            covariant_derivative(&scalar, &ctx.christoffel),
            Err(GeomError::OrderExhausted)
        ));
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        let coords = ["x", "y"];
        let m = ModelSpec {
            name: "bad".into(),
            dim: 2,
            coords: coords.iter().map(|s| s.to_string()).collect(),
            metric: vec![
                vec![
                    parse_expression("x", &coords).unwrap(),
                    parse_expression("0", &coords).unwrap(),
                ],
                vec![
                    parse_expression("0", &coords).unwrap(),
                    parse_expression("1", &coords).unwrap(),
                ],
            ],
            potential: None,
            lambda: None,
            domain: vec![(-2.0, 2.0), (-2.0, 2.0)],
            margins: vec![0.0, 0.0],
            expected_class: None,
        };
        assert!(matches!(
            metric_jet(&m, &[-1.0, 0.0], 2),
            Err(GeomError::NotPositiveDefinite { .. })
        ));
    }
}
