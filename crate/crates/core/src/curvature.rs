//! Curvature tensors on a chart: Riemann, Ricci, scalar and sectional
//! curvature, plus the conformal family (Weyl, Cotton, Bach) and the
//! soliton 3-tensor combining Ricci, scalar curvature and the potential.
//!
//! Sign convention: with `R^m_{jkl} = ∂_k Γ^m_{jl} - ∂_l Γ^m_{jk} +
//! Γ^m_{ks} Γ^s_{jl} - Γ^m_{ls} Γ^s_{jk}` and `R_{ijkl} = g_{im} R^m_{jkl}`,
//! the Ricci trace is `R_{jl} = g^{ik} R_{ijkl}`, round spheres carry
//! positive curvature, and the contracted second Bianchi identity reads
//! `∇_l R_{ijkl} = ∇_j R_{ik} - ∇_i R_{jk}`. A startup self-test pins this
//! down as an executable axiom; see [`convention_self_test`].

use crate::geometry::{
    covariant_derivative, residual, GeomError, ModelSpec, PointContext,
};
use crate::jet::Jet;
use crate::tensor::{Slot, TensorJet};
use once_cell::sync::Lazy;

/// Riemann, Ricci and scalar curvature jets at a point.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    /// Fully covariant R_{ijkl}.
    pub riemann: TensorJet,
    /// R_{jl} = g^{ik} R_{ijkl}.
    pub ricci: TensorJet,
    /// R = g^{jl} R_{jl}.
    pub scalar: Jet,
}

/// Weyl, Cotton and (when defined) Bach and soliton 3-tensor jets.
#[derive(Clone, Debug)]
pub struct ConformalBundle {
    pub weyl: TensorJet,
    pub cotton: TensorJet,
    /// Defined for n >= 4 only.
    pub bach: Option<TensorJet>,
    /// Defined only when the model carries a potential.
    pub d_tensor: Option<TensorJet>,
}

/// Curvature jets from the connection; costs two metric-jet orders.
pub fn curvature_bundle(ctx: &PointContext) -> Result<CurvatureBundle, GeomError> {
    if ctx.christoffel.order() == 0 {
        return Err(GeomError::OrderExhausted);
    }
    let n = ctx.dim();
    let gamma = ctx.christoffel.as_tensor();

    // ∂_a Γ^m_{jl}, one order below the connection
    let mut dgamma = Vec::with_capacity(n * n * n * n);
    for a in 0..n {
        for m in 0..n {
            for j in 0..n {
                for l in 0..n {
                    dgamma.push(gamma.get(&[m, j, l]).derivative(a));
                }
            }
        }
    }
    let dg = |a: usize, m: usize, j: usize, l: usize| -> &Jet {
        &dgamma[((a * n + m) * n + j) * n + l]
    };

    let upper = TensorJet::from_fn(n, &[Slot::Con, Slot::Cov, Slot::Cov, Slot::Cov], |idx| {
        let (m, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = dg(k, m, j, l).sub(dg(l, m, j, k));
        for s in 0..n {
            acc = acc.add(&gamma.get(&[m, k, s]).mul(gamma.get(&[s, j, l])));
            acc = acc.sub(&gamma.get(&[m, l, s]).mul(gamma.get(&[s, j, k])));
        }
        acc
    });

    let riemann = upper.lower(0, &ctx.metric)?;
    let ricci = riemann.contract(0, 2, Some(&ctx.inv_metric))?;
    let scalar = ricci
        .contract(0, 1, Some(&ctx.inv_metric))?
        .as_scalar()
        .clone();
    Ok(CurvatureBundle {
        riemann,
        ricci,
        scalar,
    })
}

/// Sectional curvature of the plane spanned by contravariant `u`, `v`:
/// `K = R(u,v,u,v) / (|u|^2 |v|^2 - <u,v>^2)`.
pub fn sectional_curvature(
    m: &ModelSpec,
    p: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<f64, GeomError> {
    let ctx = PointContext::new(m, p, 2)?;
    let bundle = curvature_bundle(&ctx)?;
    sectional_from_bundle(&ctx, &bundle, u, v)
}

pub fn sectional_from_bundle(
    ctx: &PointContext,
    bundle: &CurvatureBundle,
    u: &[f64],
    v: &[f64],
) -> Result<f64, GeomError> {
    let n = ctx.dim();
    let g = |i: usize, j: usize| ctx.metric.get(&[i, j]).value();
    let mut uu = 0.0;
    let mut vv = 0.0;
    let mut uv = 0.0;
    for i in 0..n {
        for j in 0..n {
            uu += g(i, j) * u[i] * u[j];
            vv += g(i, j) * v[i] * v[j];
            uv += g(i, j) * u[i] * v[j];
        }
    }
    if uu <= 0.0 || vv <= 0.0 {
        return Err(GeomError::DegeneratePlane);
    }
    // Gram determinant of the normalized pair
    let gram = 1.0 - (uv * uv) / (uu * vv);
    if gram <= 1e-12 {
        return Err(GeomError::DegeneratePlane);
    }
    let mut ruvuv = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    ruvuv += bundle.riemann.get(&[i, j, k, l]).value()
                        * u[i]
                        * v[j]
                        * u[k]
                        * v[l];
                }
            }
        }
    }
    Ok(ruvuv / (uu * vv - uv * uv))
}

/// Weyl tensor `W = Rm - (g ∧ Ric)/(n-2) + R (g ∧ g)/((n-1)(n-2))` in the
/// Kulkarni-Nomizu pattern fixed by the Ricci trace pair (slots 1 and 3).
pub fn weyl_tensor(
    bundle: &CurvatureBundle,
    g: &TensorJet,
    _g_inv: &TensorJet,
) -> Result<TensorJet, GeomError> {
    let n = g.dim();
    if n < 3 {
        return Err(GeomError::Dimension { needs: 3, got: n });
    }
    let c1 = 1.0 / (n as f64 - 2.0);
    let c2 = 1.0 / ((n as f64 - 1.0) * (n as f64 - 2.0));
    let rm = &bundle.riemann;
    let ric = &bundle.ricci;
    let r = &bundle.scalar;
    let g = &g.truncated(rm.order());
    Ok(TensorJet::from_fn(
        n,
        &[Slot::Cov, Slot::Cov, Slot::Cov, Slot::Cov],
        |idx| {
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            let ric_part = g
                .get(&[i, k])
                .mul(ric.get(&[j, l]))
                .sub(&g.get(&[i, l]).mul(ric.get(&[j, k])))
                .sub(&g.get(&[j, k]).mul(ric.get(&[i, l])))
                .add(&g.get(&[j, l]).mul(ric.get(&[i, k])));
            let gg_part = g
                .get(&[i, k])
                .mul(g.get(&[j, l]))
                .sub(&g.get(&[i, l]).mul(g.get(&[j, k])))
                .mul(r);
            rm.get(&[i, j, k, l])
                .sub(&ric_part.scaled(c1))
                .add(&gg_part.scaled(c2))
        },
    ))
}

/// Cotton tensor from precomputed `∇Ric` and `∇R`:
/// `C_{ijk} = ∇_i R_{jk} - ∇_j R_{ik} - (g_{jk} ∇_i R - g_{ik} ∇_j R)/(2(n-1))`.
pub fn cotton_from_parts(
    g: &TensorJet,
    nabla_ric: &TensorJet,
    grad_r: &TensorJet,
) -> Result<TensorJet, GeomError> {
    let n = g.dim();
    if n < 3 {
        return Err(GeomError::Dimension { needs: 3, got: n });
    }
    let c = 1.0 / (2.0 * (n as f64 - 1.0));
    Ok(TensorJet::from_fn(
        n,
        &[Slot::Cov, Slot::Cov, Slot::Cov],
        |idx| {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let anti = nabla_ric.get(&[i, j, k]).sub(nabla_ric.get(&[j, i, k]));
            let trace = g
                .get(&[j, k])
                .mul(grad_r.get(&[i]))
                .sub(&g.get(&[i, k]).mul(grad_r.get(&[j])));
            anti.sub(&trace.scaled(c))
        },
    ))
}

/// Cotton tensor of a model at a point.
pub fn cotton_tensor(m: &ModelSpec, p: &[f64]) -> Result<TensorJet, GeomError> {
    let ctx = PointContext::new(m, p, 3)?;
    let bundle = curvature_bundle(&ctx)?;
    let nabla_ric = covariant_derivative(&bundle.ricci, &ctx.christoffel)?;
    let grad_r = ctx.gradient_cov(&bundle.scalar)?;
    cotton_from_parts(&ctx.metric, &nabla_ric, &grad_r)
}

/// Bach tensor from a precomputed Weyl jet:
/// `B_{ij} = ∇_k ∇_l W_{ikjl}/(n-3) + R_{kl} W_{ikjl}/(n-2)`.
pub fn bach_from_parts(
    ctx: &PointContext,
    bundle: &CurvatureBundle,
    weyl: &TensorJet,
) -> Result<TensorJet, GeomError> {
    let n = ctx.dim();
    if n < 4 {
        return Err(GeomError::Dimension { needs: 4, got: n });
    }
    let c1 = 1.0 / (n as f64 - 3.0);
    let c2 = 1.0 / (n as f64 - 2.0);

    // ∇∇W slots: (outer, inner, i, k, j, l)
    let d1 = covariant_derivative(weyl, &ctx.christoffel)?;
    let d2 = covariant_derivative(&d1, &ctx.christoffel)?;
    // ∇_k .. contracts the outer slot with W's slot named k (position 3)
    let step1 = d2.contract(0, 3, Some(&ctx.inv_metric))?;
    // remaining slots (inner, i, j, l): ∇_l contracts inner with l
    let term1 = step1.contract(0, 3, Some(&ctx.inv_metric))?;

    let ric_up = bundle.ricci.raise_all(&ctx.inv_metric);
    let term2 = TensorJet::from_fn(n, &[Slot::Cov, Slot::Cov], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc: Option<Jet> = None;
        for k in 0..n {
            for l in 0..n {
                let t = weyl.get(&[i, k, j, l]).mul(ric_up.get(&[k, l]));
                acc = Some(match acc {
                    None => t,
                    Some(prev) => prev.add(&t),
                });
            }
        }
        acc.unwrap()
    });

    Ok(term1.scaled(c1).add(&term2.scaled(c2)))
}

/// Bach tensor of a model at a point (n >= 4).
pub fn bach_tensor(m: &ModelSpec, p: &[f64]) -> Result<TensorJet, GeomError> {
    if m.dim < 4 {
        return Err(GeomError::Dimension {
            needs: 4,
            got: m.dim,
        });
    }
    let ctx = PointContext::new(m, p, 4)?;
    let bundle = curvature_bundle(&ctx)?;
    let weyl = weyl_tensor(&bundle, &ctx.metric, &ctx.inv_metric)?;
    bach_from_parts(&ctx, &bundle, &weyl)
}

/// Soliton 3-tensor from precomputed parts:
/// `D_{ijk} = (R_{jk} ∇_i f - R_{ik} ∇_j f)/(n-2)
///          + (g_{jk} ∇_i R - g_{ik} ∇_j R)/(2(n-1)(n-2))
///          - R (g_{jk} ∇_i f - g_{ik} ∇_j f)/((n-1)(n-2))`.
pub fn d_tensor_from_parts(
    g: &TensorJet,
    bundle: &CurvatureBundle,
    grad_r: &TensorJet,
    grad_f: &TensorJet,
) -> Result<TensorJet, GeomError> {
    let n = g.dim();
    if n < 3 {
        return Err(GeomError::Dimension { needs: 3, got: n });
    }
    let nf = n as f64;
    let c1 = 1.0 / (nf - 2.0);
    let c2 = 1.0 / (2.0 * (nf - 1.0) * (nf - 2.0));
    let c3 = 1.0 / ((nf - 1.0) * (nf - 2.0));
    let ric = &bundle.ricci;
    let r = &bundle.scalar;
    Ok(TensorJet::from_fn(
        n,
        &[Slot::Cov, Slot::Cov, Slot::Cov],
        |idx| {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let t1 = ric
                .get(&[j, k])
                .mul(grad_f.get(&[i]))
                .sub(&ric.get(&[i, k]).mul(grad_f.get(&[j])));
            let t2 = g
                .get(&[j, k])
                .mul(grad_r.get(&[i]))
                .sub(&g.get(&[i, k]).mul(grad_r.get(&[j])));
            let t3 = g
                .get(&[j, k])
                .mul(grad_f.get(&[i]))
                .sub(&g.get(&[i, k]).mul(grad_f.get(&[j])))
                .mul(r);
            t1.scaled(c1).add(&t2.scaled(c2)).sub(&t3.scaled(c3))
        },
    ))
}

/// Soliton 3-tensor of a model at a point; needs the potential.
pub fn d_tensor(m: &ModelSpec, p: &[f64]) -> Result<TensorJet, GeomError> {
    let ctx = PointContext::new(m, p, 3)?;
    let bundle = curvature_bundle(&ctx)?;
    let grad_r = ctx.gradient_cov(&bundle.scalar)?;
    let grad_f = ctx.grad_f_cov()?;
    d_tensor_from_parts(&ctx.metric, &bundle, &grad_r, &grad_f)
}

/// Divergence of the Ricci tensor, `(div Ric)_k = g^{ab} ∇_a R_{bk}`.
pub fn div_ricci(ctx: &PointContext, nabla_ric: &TensorJet) -> Result<TensorJet, GeomError> {
    Ok(nabla_ric.contract(0, 1, Some(&ctx.inv_metric))?)
}

/// Assembles the whole conformal family at a point: Weyl and Cotton always
/// (n >= 3), Bach when n >= 4, the soliton 3-tensor when the model carries
/// a potential.
pub fn conformal_bundle(m: &ModelSpec, p: &[f64]) -> Result<ConformalBundle, GeomError> {
    let ctx = PointContext::new(m, p, 4)?;
    let bundle = curvature_bundle(&ctx)?;
    let weyl = weyl_tensor(&bundle, &ctx.metric, &ctx.inv_metric)?;
    let nabla_ric = covariant_derivative(&bundle.ricci, &ctx.christoffel)?;
    let grad_r = ctx.gradient_cov(&bundle.scalar)?;
    let cotton = cotton_from_parts(&ctx.metric, &nabla_ric, &grad_r)?;
    let bach = if m.dim >= 4 {
        Some(bach_from_parts(&ctx, &bundle, &weyl)?)
    } else {
        None
    };
    let d_tensor = if m.has_potential() {
        let grad_f = ctx.grad_f_cov()?;
        Some(d_tensor_from_parts(&ctx.metric, &bundle, &grad_r, &grad_f)?)
    } else {
        None
    };
    Ok(ConformalBundle {
        weyl,
        cotton,
        bach,
        d_tensor,
    })
}

static CONVENTION_OK: Lazy<Result<(), String>> = Lazy::new(run_convention_self_test);

/// Verifies once per process that the curvature sign convention satisfies
/// the contracted second Bianchi identity with the expected signs and that
/// round spheres come out positively curved. Panics downstream code may
/// rely on the convention, so a failure is an engine defect.
pub fn convention_self_test() -> Result<(), String> {
    CONVENTION_OK.clone()
}

fn run_convention_self_test() -> Result<(), String> {
    use crate::expr::parse_expression;
    // Round 2-sphere of radius 2: sectional curvature must be +1/4.
    let coords = ["theta", "phi"];
    let sphere = ModelSpec {
        name: "selftest_sphere".into(),
        dim: 2,
        coords: coords.iter().map(|s| s.to_string()).collect(),
        metric: vec![
            vec![
                parse_expression("4", &coords).unwrap(),
                parse_expression("0", &coords).unwrap(),
            ],
            vec![
                parse_expression("0", &coords).unwrap(),
                parse_expression("4*sin(theta)^2", &coords).unwrap(),
            ],
        ],
        potential: None,
        lambda: None,
        domain: vec![(0.4, 2.7), (0.3, 6.0)],
        margins: vec![0.0, 0.0],
        expected_class: None,
    };
    let k = sectional_curvature(&sphere, &[1.1, 0.7], &[1.0, 0.0], &[0.0, 1.0])
        .map_err(|e| format!("self-test sectional curvature failed: {e}"))?;
    if (k - 0.25).abs() > 1e-10 {
        return Err(format!("sphere sectional curvature {k}, expected 0.25"));
    }

    // Generic warped 4-metric: contracted second Bianchi with our signs.
    let coords = ["t", "x", "y", "z"];
    let phi2 = "(1 + t^2/10)^2";
    let zero = parse_expression("0", &coords).unwrap();
    let warped = ModelSpec {
        name: "selftest_warped".into(),
        dim: 4,
        coords: coords.iter().map(|s| s.to_string()).collect(),
        metric: (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        if i != j {
                            zero.clone()
                        } else if i == 0 {
                            parse_expression("1", &coords).unwrap()
                        } else {
                            parse_expression(phi2, &coords).unwrap()
                        }
                    })
                    .collect()
            })
            .collect(),
        potential: None,
        lambda: None,
        domain: vec![(-1.5, 1.5); 4],
        margins: vec![0.0; 4],
        expected_class: None,
    };
    let p = [0.9, 0.1, -0.4, 0.7];
    let ctx = PointContext::new(&warped, &p, 3)
        .map_err(|e| format!("self-test context failed: {e}"))?;
    let bundle = curvature_bundle(&ctx).map_err(|e| format!("self-test curvature: {e}"))?;
    let nabla_rm = covariant_derivative(&bundle.riemann, &ctx.christoffel)
        .map_err(|e| format!("self-test ∇Rm: {e}"))?;
    let div_rm = nabla_rm
        .contract(0, 4, Some(&ctx.inv_metric))
        .map_err(|e| format!("self-test div Rm: {e}"))?;
    let nabla_ric = covariant_derivative(&bundle.ricci, &ctx.christoffel)
        .map_err(|e| format!("self-test ∇Ric: {e}"))?;
    let n = 4;
    let rhs = TensorJet::from_fn(n, &[Slot::Cov, Slot::Cov, Slot::Cov], |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        nabla_ric.get(&[j, i, k]).sub(nabla_ric.get(&[i, j, k]))
    });
    let res = residual(&div_rm, &rhs);
    if res > 1e-9 {
        return Err(format!(
            "contracted Bianchi residual {res} breaks the sign convention"
        ));
    }
    if div_rm.max_abs() < 1e-4 {
        return Err("self-test metric has degenerate divergence; no signal".into());
    }
    Ok(())
}
