//! The check registry: every identity the engine certifies, as an
//! evaluator over a per-point workspace.
//!
//! Evaluators return the normalized residual together with a witness
//! magnitude (one designated term of the identity) so runs can prove the
//! check exercised genuine cancellation. Checks whose identities are
//! inequalities report `max(0, lhs - rhs)` unnormalized.

use super::{ev, CheckSpec, Eval, PointWorkspace, Tier};
use crate::curvature::{d_tensor_from_parts, sectional_from_bundle};
use crate::divchain::div4_w_alt_ordering_from;
use crate::geometry::{residual, residual_scalar, GeomError};
use crate::jet::Jet;
use crate::tensor::{Slot, TensorJet};
use once_cell::sync::Lazy;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const COV2: [Slot; 2] = [Slot::Cov, Slot::Cov];
const COV3: [Slot; 3] = [Slot::Cov, Slot::Cov, Slot::Cov];

fn weyl_coeffs(n: f64) -> (f64, f64) {
    ((n - 3.0) / (n - 2.0), (n - 3.0) / (2.0 * (n - 1.0) * (n - 2.0)))
}

// --- Tier A -----------------------------------------------------------------

fn eval_bianchi2c(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lhs = ws.rm_chain()?.level(1);
    let nr = ws.nabla_ric()?;
    let rhs = TensorJet::from_fn(ws.n(), &COV3, |idx| {
        nr.get(&[idx[1], idx[0], idx[2]])
            .sub(nr.get(&[idx[0], idx[1], idx[2]]))
    });
    Ok(ev(residual(lhs, &rhs), lhs.max_abs()))
}

fn eval_bianchi_traced(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lhs = ws.grad_r()?;
    let rhs = ws.div_ric()?.scaled(2.0);
    Ok(ev(residual(lhs, &rhs), lhs.max_abs()))
}

fn eval_grad_r_cs(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let l = ws.norm_sq_value(ws.grad_r()?);
    let r = ws.nf() * ws.norm_sq_value(ws.nabla_ric()?);
    Ok(ev((l - r).max(0.0), r))
}

fn eval_weyl_tracefree(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let w = ws.weyl()?;
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in a + 1..4 {
            worst = worst.max(
                w.contract(a, b, Some(&ws.ctx.inv_metric))?.max_abs(),
            );
        }
    }
    Ok(ev(worst / (1.0 + w.max_abs()), w.max_abs()))
}

fn eval_weyl_dim3(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let w = ws.weyl()?;
    let rm = &ws.curv()?.riemann;
    Ok(ev(w.max_abs() / (1.0 + rm.max_abs()), rm.max_abs()))
}

fn eval_div_w_vs_cotton(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lhs = ws.w_chain()?.level(1);
    let cotton = ws.cotton()?;
    let (c1, _) = weyl_coeffs(ws.nf());
    let rhs = TensorJet::from_fn(ws.n(), &COV3, |idx| {
        cotton.get(&[idx[1], idx[0], idx[2]]).scaled(c1)
    });
    Ok(ev(residual(lhs, &rhs), lhs.max_abs()))
}

// --- Tier B: soliton equation and first-order facts -------------------------

fn eval_soliton_gate(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let hess = ws.ctx.hessian_f()?;
    let res = b.ricci.add(&hess).sub(&ws.ctx.metric.scaled(lam));
    Ok(ev(res.max_abs(), lam))
}

fn eval_r_nonneg(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let r = ws.curv()?.scalar.value();
    Ok(ev((-r).max(0.0), r))
}

fn eval_radial_flat(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let gf_vec = ws.grad_f_vec()?;
    let gf_cov = ws.grad_f_cov()?;
    let n = ws.n();
    let mut norm2 = 0.0;
    for a in 0..n {
        norm2 += gf_vec.get(&[a]).value() * gf_cov.get(&[a]).value();
    }
    if norm2 <= 1e-12 {
        // degenerate radial direction, nothing to test
        return Ok(ev(0.0, norm2));
    }
    let bundle = ws.curv()?;
    let g0: Vec<f64> = ws.ctx.metric.components().iter().map(|j| j.value()).collect();
    let v: Vec<f64> = (0..n).map(|a| gf_vec.get(&[a]).value()).collect();
    // deterministic per-point directions
    let mut seed = 0x9E37_79B9_7F4A_7C15u64;
    for &x in &ws.ctx.point {
        seed = seed.rotate_left(13) ^ x.to_bits().wrapping_mul(0xBF58_476D_1CE4_E5B9);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut found = 0;
    let mut attempts = 0;
    while found < 8 && attempts < 64 {
        attempts += 1;
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut dot = 0.0;
        for i in 0..n {
            for j in 0..n {
                dot += g0[i * n + j] * raw[i] * v[j];
            }
        }
        let e: Vec<f64> = (0..n).map(|i| raw[i] - dot / norm2 * v[i]).collect();
        let mut e2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                e2 += g0[i * n + j] * e[i] * e[j];
            }
        }
        if e2 < 1e-6 {
            continue;
        }
        let sec = sectional_from_bundle(&ws.ctx, bundle, &e, &v)?;
        worst = worst.max(sec.abs());
        found += 1;
    }
    Ok(ev(worst, norm2))
}

fn eval_ric2_lambda_r(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let ric2 = ws.norm_sq_value(&b.ricci);
    Ok(ev(residual_scalar(ric2, lam * b.scalar.value()), ric2))
}

fn eval_p2_3(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let b = ws.curv()?;
    let lhs = b.riemann.contract_vec(3, ws.grad_f_vec()?)?;
    let rhs = ws.rm_chain()?.level(1);
    Ok(ev(residual(&lhs, rhs), lhs.max_abs().max(rhs.max_abs())))
}

fn eval_p2_5(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let b = ws.curv()?;
    let lhs = b.ricci.contract_vec(1, ws.grad_f_vec()?)?;
    let rhs = ws.div_ric()?;
    Ok(ev(residual(&lhs, &rhs), rhs.max_abs()))
}

fn eval_p2_7(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let b = ws.curv()?;
    let lhs = ws.grad_r()?;
    let rhs = b.ricci.contract_vec(0, ws.grad_f_vec()?)?.scaled(2.0);
    Ok(ev(residual(lhs, &rhs), rhs.max_abs()))
}

fn eval_p2_8(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let lap = ws.nabla2_ric()?.contract(0, 1, Some(&ws.ctx.inv_metric))?;
    let drift = ws.nabla_ric()?.contract_vec(0, ws.grad_f_vec()?)?;
    let lhs = lap.sub(&drift);
    let rhs = b
        .ricci
        .scaled(2.0 * lam)
        .sub(&ws.rm_dot_ric()?.scaled(2.0));
    Ok(ev(residual(&lhs, &rhs), b.ricci.scaled(2.0 * lam).max_abs()))
}

fn eval_p2_9(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let lap_r = ws
        .hess_r()?
        .contract(0, 1, Some(&ws.ctx.inv_metric))?
        .as_scalar()
        .value();
    let drift = ws
        .grad_r()?
        .contract_vec(0, ws.grad_f_vec()?)?
        .as_scalar()
        .value();
    let lhs = lap_r - drift;
    let r = b.scalar.value();
    let rhs = 2.0 * lam * r - 2.0 * ws.norm_sq_value(&b.ricci);
    Ok(ev(residual_scalar(lhs, rhs), (2.0 * lam * r).abs()))
}

fn eval_p2_10(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let ric2_jet = ws.ctx.norm_sq(&b.ricci);
    let lap = ws
        .ctx
        .hessian_scalar(&ric2_jet)?
        .contract(0, 1, Some(&ws.ctx.inv_metric))?
        .as_scalar()
        .value();
    let drift = ws
        .ctx
        .gradient_cov(&ric2_jet)?
        .contract_vec(0, ws.grad_f_vec()?)?
        .as_scalar()
        .value();
    let lhs = lap - drift;
    let ric_up = b.ricci.raise_all(&ws.ctx.inv_metric);
    let q = ws.rm_dot_ric()?;
    let n = ws.n();
    let mut rm_ric_ric = 0.0;
    for i in 0..n {
        for k in 0..n {
            rm_ric_ric += q.get(&[i, k]).value() * ric_up.get(&[i, k]).value();
        }
    }
    let ric2 = ric2_jet.value();
    let grad_ric2 = ws.norm_sq_value(ws.nabla_ric()?);
    let rhs = 4.0 * lam * ric2 - 4.0 * rm_ric_ric + 2.0 * grad_ric2;
    Ok(ev(residual_scalar(lhs, rhs), 4.0 * lam * ric2))
}

fn eval_p2_12(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let f = ws.ctx.potential.as_ref().ok_or(GeomError::MissingPotential)?;
    let nf2 = ws.ctx.norm_sq(ws.grad_f_cov()?);
    let combo = b.scalar.add(&nf2).sub(&f.scaled(2.0 * lam));
    let lhs = ws.ctx.gradient_cov(&combo)?;
    let grad_nf2 = ws.ctx.gradient_cov(&nf2)?;
    let witness = ws
        .grad_r()?
        .max_abs()
        .max(grad_nf2.max_abs())
        .max(ws.grad_f_cov()?.max_abs() * 2.0 * lam);
    Ok(ev(lhs.max_abs() / (1.0 + witness), witness))
}

// --- Tier B: divergence chains of Rm -----------------------------------------

fn eval_p2_13(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let lhs = ws.rm_chain()?.level(2);
    let drift_ric = ws.nabla_ric()?.contract_vec(0, ws.grad_f_vec()?)?;
    let rhs = b
        .ricci
        .scaled(2.0 * lam)
        .add(&drift_ric)
        .sub(&ws.hess_r()?.scaled(0.5))
        .sub(ws.ric_sq()?)
        .sub(ws.rm_dot_ric()?);
    Ok(ev(residual(lhs, &rhs), b.ricci.scaled(2.0 * lam).max_abs()))
}

/// `-R_{ijkl} ∇^k R^{jl}` as a covector; shared by two checks.
fn rm_grad_ric_contraction(ws: &PointWorkspace) -> Result<TensorJet, GeomError> {
    let b = ws.curv()?;
    let up = ws.nabla_ric()?.raise_all(&ws.ctx.inv_metric);
    let n = ws.n();
    let rm = &b.riemann;
    Ok(TensorJet::from_fn(n, &[Slot::Cov], |idx| {
        let i = idx[0];
        let mut acc: Option<Jet> = None;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let t = rm.get(&[i, j, k, l]).mul(up.get(&[k, j, l]));
                    acc = Some(match acc {
                        None => t,
                        Some(prev) => prev.add(&t),
                    });
                }
            }
        }
        acc.unwrap().neg()
    }))
}

fn eval_p2_14(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lhs = ws.rm_chain()?.level(3);
    let rhs = rm_grad_ric_contraction(ws)?;
    Ok(ev(residual(lhs, &rhs), lhs.max_abs().max(rhs.max_abs())))
}

/// The three scalar terms of the fourth-divergence expansion:
/// `(∇_l R_{jk} ∇_k R_{jl}, |∇Ric|^2, R_{ijkl} ∇_i ∇_k R_{jl})`.
fn div4_rm_terms(ws: &PointWorkspace) -> Result<(f64, f64, f64), GeomError> {
    let b = ws.curv()?;
    let x = ws.nabla_ric()?;
    let y = x.raise_all(&ws.ctx.inv_metric);
    let n = ws.n();
    let mut term1 = 0.0;
    for a in 0..n {
        for bb in 0..n {
            for c in 0..n {
                term1 += y.get(&[a, bb, c]).value() * x.get(&[c, bb, a]).value();
            }
        }
    }
    let term2 = ws.norm_sq_value(x);
    let h = ws.nabla2_ric()?.raise_all(&ws.ctx.inv_metric);
    let mut term3 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    term3 += b.riemann.get(&[i, j, k, l]).value() * h.get(&[i, k, j, l]).value();
                }
            }
        }
    }
    Ok((term1, term2, term3))
}

fn eval_p2_15(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let lhs = ws.rm_chain()?.level(4).as_scalar().value();
    let (t1, t2, t3) = div4_rm_terms(ws)?;
    Ok(ev(residual_scalar(lhs, t1 - t2 - t3), t2))
}

fn eval_thm5_1(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let chain = ws.rm_chain()?;
    let lhs = chain
        .level(3)
        .contract_vec(0, ws.grad_f_vec()?)?
        .as_scalar()
        .value();
    let div_rm_sq = ws.norm_sq_value(chain.level(1));
    Ok(ev(residual_scalar(lhs, -0.5 * div_rm_sq), div_rm_sq))
}

fn eval_rem2_1_order(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (a, b) = ws.var2_rm()?;
    Ok(ev(residual(a, b), a.max_abs()))
}

fn eval_rem2_1_sym(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (a, _) = ws.var2_rm()?;
    Ok(ev(residual(a, &a.swap_slots(0, 1)), a.max_abs()))
}

// --- Tier B: Weyl chains ------------------------------------------------------

fn eval_p6_30(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (c1, c2) = weyl_coeffs(ws.nf());
    let lhs = ws.w_chain()?.level(2);
    let rm2 = ws.rm_chain()?.level(2);
    let hess_r = ws.hess_r()?;
    let lap_r = hess_r
        .contract(0, 1, Some(&ws.ctx.inv_metric))?
        .as_scalar()
        .clone();
    let g = &ws.ctx.metric;
    let rhs = TensorJet::from_fn(ws.n(), &COV2, |idx| {
        let (i, k) = (idx[0], idx[1]);
        let trace_part = g.get(&[i, k]).mul(&lap_r).sub(hess_r.get(&[k, i]));
        rm2.get(&[i, k]).scaled(c1).sub(&trace_part.scaled(c2))
    });
    Ok(ev(residual(lhs, &rhs), lhs.max_abs().max(rhs.max_abs())))
}

/// `(Ric ∇R)_i = R_{ik} ∇^k R`.
fn ric_grad_r(ws: &PointWorkspace) -> Result<TensorJet, GeomError> {
    let b = ws.curv()?;
    let up = ws.grad_r()?.raise(0, &ws.ctx.inv_metric)?;
    Ok(b.ricci.contract_vec(1, &up)?)
}

fn eval_p6_31(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (c1, c2) = weyl_coeffs(ws.nf());
    let lhs = ws.w_chain()?.level(3);
    let rhs = ws
        .rm_chain()?
        .level(3)
        .scaled(c1)
        .add(&ric_grad_r(ws)?.scaled(c2));
    Ok(ev(residual(lhs, &rhs), lhs.max_abs().max(rhs.max_abs())))
}

/// `R_{ik} ∇_i ∇_k R` fully contracted, at order zero.
fn ric_dot_hess_r(ws: &PointWorkspace) -> Result<f64, GeomError> {
    let b = ws.curv()?;
    let up = b.ricci.raise_all(&ws.ctx.inv_metric);
    let hess = ws.hess_r()?;
    let n = ws.n();
    let mut out = 0.0;
    for i in 0..n {
        for k in 0..n {
            out += up.get(&[i, k]).value() * hess.get(&[i, k]).value();
        }
    }
    Ok(out)
}

fn eval_p6_32(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (c1, c2) = weyl_coeffs(ws.nf());
    let lhs = ws.w_chain()?.level(4).as_scalar().value();
    let rm4 = ws.rm_chain()?.level(4).as_scalar().value();
    let grad_r2 = ws.norm_sq_value(ws.grad_r()?);
    let rhs = c1 * rm4 + c2 * (0.5 * grad_r2 + ric_dot_hess_r(ws)?);
    Ok(ev(residual_scalar(lhs, rhs), lhs.abs().max(rhs.abs())))
}

fn eval_c6_33(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (c1, c2) = weyl_coeffs(ws.nf());
    let lhs = ws.w_chain()?.level(1);
    let nr = ws.nabla_ric()?;
    let gr = ws.grad_r()?;
    let g = &ws.ctx.metric;
    let rhs = TensorJet::from_fn(ws.n(), &COV3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let anti = nr.get(&[j, i, k]).sub(nr.get(&[i, j, k]));
        let trace = g
            .get(&[i, k])
            .mul(gr.get(&[j]))
            .sub(&g.get(&[j, k]).mul(gr.get(&[i])));
        anti.scaled(c1).sub(&trace.scaled(c2))
    });
    Ok(ev(residual(lhs, &rhs), lhs.max_abs().max(rhs.max_abs())))
}

fn eval_c6_34(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let nf = ws.nf();
    let (c1, c2) = weyl_coeffs(nf);
    let lam = ws.lambda()?;
    let b = ws.curv()?;
    let lhs = ws.w_chain()?.level(2);
    let drift_ric = ws.nabla_ric()?.contract_vec(0, ws.grad_f_vec()?)?;
    let bracket = b
        .ricci
        .scaled(2.0 * lam)
        .add(&drift_ric)
        .sub(ws.ric_sq()?)
        .sub(ws.rm_dot_ric()?);
    let drift_r = ws
        .grad_r()?
        .contract_vec(0, ws.grad_f_vec()?)?
        .as_scalar()
        .value();
    let scalar_part =
        drift_r + 2.0 * lam * b.scalar.value() - 2.0 * ws.norm_sq_value(&b.ricci);
    let rhs = bracket
        .scaled(c1)
        .sub(&ws.hess_r()?.scaled((nf - 3.0) / (2.0 * (nf - 1.0))))
        .sub(&ws.ctx.metric.scaled(c2 * scalar_part));
    Ok(ev(residual(lhs, &rhs), bracket.scaled(c1).max_abs()))
}

fn eval_c6_35(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (c1, c2) = weyl_coeffs(ws.nf());
    let lhs = ws.w_chain()?.level(3);
    let rhs = rm_grad_ric_contraction(ws)?
        .scaled(c1)
        .add(&ric_grad_r(ws)?.scaled(c2));
    Ok(ev(residual(lhs, &rhs), lhs.max_abs().max(rhs.max_abs())))
}

fn eval_c6_36(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (c1, c2) = weyl_coeffs(ws.nf());
    let lhs = ws.w_chain()?.level(4).as_scalar().value();
    let (t1, t2, t3) = div4_rm_terms(ws)?;
    let grad_r2 = ws.norm_sq_value(ws.grad_r()?);
    let rhs = c1 * (t1 - t2 - t3) + c2 * (0.5 * grad_r2 + ric_dot_hess_r(ws)?);
    Ok(ev(residual_scalar(lhs, rhs), t2))
}

fn eval_c6_37(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let nf = ws.nf();
    let lhs = ws
        .w_chain()?
        .level(3)
        .contract_vec(0, ws.grad_f_vec()?)?
        .as_scalar()
        .value();
    let div_rm_sq = ws.norm_sq_value(ws.rm_chain()?.level(1));
    let grad_r2 = ws.norm_sq_value(ws.grad_r()?);
    let rhs = -(nf - 3.0) / (2.0 * (nf - 2.0)) * div_rm_sq
        + (nf - 3.0) / (4.0 * (nf - 1.0) * (nf - 2.0)) * grad_r2;
    Ok(ev(residual_scalar(lhs, rhs), div_rm_sq))
}

fn eval_grad_r_ric_bound(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let b = ws.curv()?;
    let l = ws.norm_sq_value(ws.grad_r()?);
    let nf2 = ws.norm_sq_value(ws.grad_f_cov()?);
    let r = 4.0 * ws.norm_sq_value(&b.ricci) * nf2;
    Ok(ev((l - r).max(0.0), r))
}

fn eval_d_identity(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let b = ws.curv()?;
    let d = d_tensor_from_parts(&ws.ctx.metric, b, ws.grad_r()?, ws.grad_f_cov()?)?;
    let w_f = ws.weyl()?.contract_vec(3, ws.grad_f_vec()?)?;
    let rhs = ws.cotton()?.add(&w_f);
    Ok(ev(residual(&d, &rhs), d.max_abs()))
}

fn eval_rem8_39(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let alt = div4_w_alt_ordering_from(ws.weyl()?, &ws.ctx)?;
    let canonical = ws.w_chain()?.level(4).as_scalar().value();
    Ok(ev(residual_scalar(alt, -canonical), canonical.abs()))
}

fn eval_rem8_40(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let (a, b) = ws.var2_w()?;
    Ok(ev(residual(a, b), a.max_abs()))
}

// --- Tier B: model-level rigidity consistency ---------------------------------

fn eval_rigid_div4rm(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let v = ws.rm_chain()?.level(4).as_scalar().value();
    Ok(ev(v.abs(), ws.curv()?.riemann.max_abs()))
}

fn eval_rigid_div3rm_radial(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let v = ws
        .rm_chain()?
        .level(3)
        .contract_vec(0, ws.grad_f_vec()?)?
        .as_scalar()
        .value();
    Ok(ev(v.abs(), ws.curv()?.riemann.max_abs()))
}

fn eval_rigid_div4w(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let v = ws.w_chain()?.level(4).as_scalar().value();
    Ok(ev(v.abs(), ws.weyl()?.max_abs()))
}

fn eval_rigid_div3w_radial(ws: &PointWorkspace) -> Result<Eval, GeomError> {
    let v = ws
        .w_chain()?
        .level(3)
        .contract_vec(0, ws.grad_f_vec()?)?
        .as_scalar()
        .value();
    Ok(ev(v.abs(), ws.weyl()?.max_abs()))
}

fn eval_classifier_stub(_ws: &PointWorkspace) -> Result<Eval, GeomError> {
    // tier C runs through the classifier, not per-point evaluation
    Ok(ev(0.0, 0.0))
}

// --- registry -----------------------------------------------------------------

struct Entry {
    id: &'static str,
    tier: Tier,
    description: &'static str,
    requires_potential: bool,
    min_dim: usize,
    exact_dim: Option<usize>,
    default_tol: f64,
    eval: fn(&PointWorkspace) -> Result<Eval, GeomError>,
}

static REGISTRY: Lazy<Vec<CheckSpec>> = Lazy::new(|| {
    crate::curvature::convention_self_test()
        .expect("curvature sign convention self-test failed");
    let entries = [
        Entry {
            id: "A.bianchi2c",
            tier: Tier::A,
            description: "contracted second Bianchi identity: div Rm equals the antisymmetrized Ricci derivative",
            requires_potential: false,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-9,
            eval: eval_bianchi2c,
        },
        Entry {
            id: "A.bianchi_traced",
            tier: Tier::A,
            description: "traced Bianchi identity: grad R = 2 div Ric",
            requires_potential: false,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-9,
            eval: eval_bianchi_traced,
        },
        Entry {
            id: "A.div_w_vs_cotton",
            tier: Tier::A,
            description: "div W equals (n-3)/(n-2) times the Cotton tensor",
            requires_potential: false,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-9,
            eval: eval_div_w_vs_cotton,
        },
        Entry {
            id: "A.grad_r_cs",
            tier: Tier::A,
            description: "trace bound |grad R|^2 <= n |grad Ric|^2",
            requires_potential: false,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-10,
            eval: eval_grad_r_cs,
        },
        Entry {
            id: "A.weyl_dim3",
            tier: Tier::A,
            description: "Weyl tensor vanishes identically in dimension 3",
            requires_potential: false,
            min_dim: 3,
            exact_dim: Some(3),
            default_tol: 1e-9,
            eval: eval_weyl_dim3,
        },
        Entry {
            id: "A.weyl_tracefree",
            tier: Tier::A,
            description: "every metric trace of the Weyl tensor vanishes",
            requires_potential: false,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-9,
            eval: eval_weyl_tracefree,
        },
        Entry {
            id: "B.c6_33",
            tier: Tier::B,
            description: "div W written through the soliton Ricci derivative and grad R",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_c6_33,
        },
        Entry {
            id: "B.c6_34",
            tier: Tier::B,
            description: "div^2 W in closed soliton form (curvature products and Hessian of R)",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_c6_34,
        },
        Entry {
            id: "B.c6_35",
            tier: Tier::B,
            description: "div^3 W equals the curvature-gradient contraction plus the Ric grad R term",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_c6_35,
        },
        Entry {
            id: "B.c6_36",
            tier: Tier::B,
            description: "div^4 W in closed soliton form",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_c6_36,
        },
        Entry {
            id: "B.c6_37",
            tier: Tier::B,
            description: "radial div^3 W equals the |div Rm|^2 and |grad R|^2 combination",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_c6_37,
        },
        Entry {
            id: "B.d_identity",
            tier: Tier::B,
            description: "soliton 3-tensor decomposition D = C + W(.,.,.,grad f)",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_d_identity,
        },
        Entry {
            id: "B.grad_r_ric_bound",
            tier: Tier::B,
            description: "gradient bound |grad R|^2 <= 4 |Ric|^2 |grad f|^2",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-10,
            eval: eval_grad_r_ric_bound,
        },
        Entry {
            id: "B.p2_10",
            tier: Tier::B,
            description: "drift Laplacian of |Ric|^2 via curvature contractions",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_10,
        },
        Entry {
            id: "B.p2_12",
            tier: Tier::B,
            description: "R + |grad f|^2 - 2 lambda f has vanishing gradient",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_12,
        },
        Entry {
            id: "B.p2_13",
            tier: Tier::B,
            description: "div^2 Rm via the soliton equation (five-term cancellation)",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_13,
        },
        Entry {
            id: "B.p2_14",
            tier: Tier::B,
            description: "div^3 Rm equals -Rm contracted with grad Ric",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_14,
        },
        Entry {
            id: "B.p2_15",
            tier: Tier::B,
            description: "div^4 Rm in closed soliton form",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_15,
        },
        Entry {
            id: "B.p2_3",
            tier: Tier::B,
            description: "Rm contracted with grad f equals div Rm",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_3,
        },
        Entry {
            id: "B.p2_5",
            tier: Tier::B,
            description: "Ric contracted with grad f equals div Ric",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_5,
        },
        Entry {
            id: "B.p2_7",
            tier: Tier::B,
            description: "grad R = 2 Ric(grad f, .)",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_7,
        },
        Entry {
            id: "B.p2_8",
            tier: Tier::B,
            description: "drift Laplacian of Ric via curvature contraction",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_8,
        },
        Entry {
            id: "B.p2_9",
            tier: Tier::B,
            description: "drift Laplacian of R equals 2 lambda R - 2 |Ric|^2",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p2_9,
        },
        Entry {
            id: "B.p6_30",
            tier: Tier::B,
            description: "div^2 W against div^2 Rm and the Hessian of R",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p6_30,
        },
        Entry {
            id: "B.p6_31",
            tier: Tier::B,
            description: "div^3 W against div^3 Rm and Ric grad R",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p6_31,
        },
        Entry {
            id: "B.p6_32",
            tier: Tier::B,
            description: "div^4 W against div^4 Rm, |grad R|^2 and the Ricci Hessian trace",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_p6_32,
        },
        Entry {
            id: "B.r_nonneg",
            tier: Tier::B,
            description: "scalar curvature of a shrinker is nonnegative",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-10,
            eval: eval_r_nonneg,
        },
        Entry {
            id: "B.radial_flat",
            tier: Tier::B,
            description: "sectional curvature of planes containing grad f vanishes on rigid models",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_radial_flat,
        },
        Entry {
            id: "B.rem2_1_order",
            tier: Tier::B,
            description: "both derivative orderings of div^2 Rm agree on solitons",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rem2_1_order,
        },
        Entry {
            id: "B.rem2_1_sym",
            tier: Tier::B,
            description: "div^2 Rm is a symmetric 2-tensor on solitons",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rem2_1_sym,
        },
        Entry {
            id: "B.rem8_39",
            tier: Tier::B,
            description: "alternative slot ordering of div^4 W equals minus the canonical one",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rem8_39,
        },
        Entry {
            id: "B.rem8_40",
            tier: Tier::B,
            description: "both derivative orderings of div^2 W agree on solitons",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rem8_40,
        },
        Entry {
            id: "B.ric2_lambda_r",
            tier: Tier::B,
            description: "|Ric|^2 = lambda R on constant-scalar shrinkers",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_ric2_lambda_r,
        },
        Entry {
            id: "B.rigid_div3rm_radial",
            tier: Tier::B,
            description: "radial div^3 Rm vanishes on rigid catalog models",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rigid_div3rm_radial,
        },
        Entry {
            id: "B.rigid_div3w_radial",
            tier: Tier::B,
            description: "radial div^3 W vanishes on rigid catalog models",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rigid_div3w_radial,
        },
        Entry {
            id: "B.rigid_div4rm",
            tier: Tier::B,
            description: "div^4 Rm vanishes on rigid catalog models",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rigid_div4rm,
        },
        Entry {
            id: "B.rigid_div4w",
            tier: Tier::B,
            description: "div^4 W vanishes on rigid catalog models",
            requires_potential: true,
            min_dim: 3,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_rigid_div4w,
        },
        Entry {
            id: "B.soliton_gate",
            tier: Tier::B,
            description: "soliton equation residual Ric + Hess f - lambda g",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-9,
            eval: eval_soliton_gate,
        },
        Entry {
            id: "B.thm5_1",
            tier: Tier::B,
            description: "radial div^3 Rm equals -|div Rm|^2 / 2",
            requires_potential: true,
            min_dim: 2,
            exact_dim: None,
            default_tol: 1e-8,
            eval: eval_thm5_1,
        },
        Entry {
            id: "C.classify_dim4",
            tier: Tier::C,
            description: "four-dimensional shrinker classification pipeline",
            requires_potential: false,
            min_dim: 4,
            exact_dim: Some(4),
            default_tol: 1e-8,
            eval: eval_classifier_stub,
        },
    ];
    let mut out: Vec<CheckSpec> = entries
        .into_iter()
        .map(|e| CheckSpec {
            id: e.id,
            tier: e.tier,
            description: e.description,
            requires_potential: e.requires_potential,
            min_dim: e.min_dim,
            exact_dim: e.exact_dim,
            default_tol: e.default_tol,
            eval: e.eval,
        })
        .collect();
    out.sort_by_key(|c| c.id);
    out
});

/// All registered checks, sorted by id.
pub fn registry() -> &'static [CheckSpec] {
    &REGISTRY
}
