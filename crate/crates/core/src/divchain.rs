//! Iterated covariant divergences of the Riemann and Weyl tensors up to
//! fourth order, radial contractions with the potential gradient, and the
//! alternative index orderings of the second divergence.
//!
//! Canonical ordering for a rank-4 curvature tensor T_{ijkl}: level one
//! contracts the new derivative against slot l, level two against slot j,
//! level three against slot k, level four against slot i, i.e.
//! `div^4 T = ∇_i ∇_k ∇_j ∇_l T_{ijkl}`. Each level is derive-then-contract
//! on the already contracted previous level (legal because the connection
//! is metric); only the ordering variants build the full second covariant
//! derivative.

use crate::curvature::{curvature_bundle, weyl_tensor};
use crate::geometry::{covariant_derivative, GeomError, ModelSpec, PointContext};
use crate::tensor::TensorJet;

/// Which rank-4 curvature tensor a chain divergates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Riemann,
    Weyl,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Riemann => "rm",
            Family::Weyl => "w",
        }
    }
}

/// All divergence levels of one family at one point; `levels[k]` holds
/// div^{k+1} with ranks 3, 2, 1, 0.
#[derive(Clone, Debug)]
pub struct DivergenceChain {
    pub family: Family,
    pub levels: Vec<TensorJet>,
}

impl DivergenceChain {
    pub fn level(&self, k: usize) -> &TensorJet {
        assert!((1..=self.levels.len()).contains(&k));
        &self.levels[k - 1]
    }
}

/// Applies `pattern.len()` rounds of prepend-∇-then-contract; `pattern[k]`
/// names the slot of the current tensor the new derivative contracts.
pub fn chained_divergence(
    base: &TensorJet,
    ctx: &PointContext,
    pattern: &[usize],
) -> Result<Vec<TensorJet>, GeomError> {
    let mut levels = Vec::with_capacity(pattern.len());
    let mut cur = base.clone();
    for &slot in pattern {
        let d = covariant_derivative(&cur, &ctx.christoffel)?;
        cur = d.contract(0, slot + 1, Some(&ctx.inv_metric))?;
        levels.push(cur.clone());
    }
    Ok(levels)
}

const CANONICAL_PATTERN: [usize; 4] = [3, 1, 1, 0];

/// Base tensor of a family from a prepared context.
pub fn family_tensor(ctx: &PointContext, family: Family) -> Result<TensorJet, GeomError> {
    let bundle = curvature_bundle(ctx)?;
    match family {
        Family::Riemann => Ok(bundle.riemann),
        Family::Weyl => weyl_tensor(&bundle, &ctx.metric, &ctx.inv_metric),
    }
}

/// Chain in canonical ordering from a prepared context and base tensor.
pub fn div_chain_from(
    base: &TensorJet,
    ctx: &PointContext,
    family: Family,
    depth: usize,
) -> Result<DivergenceChain, GeomError> {
    assert!((1..=4).contains(&depth), "depth must be 1..=4");
    let levels = chained_divergence(base, ctx, &CANONICAL_PATTERN[..depth])?;
    Ok(DivergenceChain { family, levels })
}

/// Divergence chain of a model at a point, metric jets sized to the depth.
pub fn div_chain(
    m: &ModelSpec,
    p: &[f64],
    family: Family,
    depth: usize,
) -> Result<DivergenceChain, GeomError> {
    assert!((1..=4).contains(&depth), "depth must be 1..=4");
    let ctx = PointContext::new(m, p, 2 + depth)?;
    let base = family_tensor(&ctx, family)?;
    div_chain_from(&base, &ctx, family, depth)
}

/// Third divergence contracted with the potential gradient,
/// `div^3 T (∇f)`.
pub fn div3_radial(m: &ModelSpec, p: &[f64], family: Family) -> Result<f64, GeomError> {
    let ctx = PointContext::new(m, p, 5)?;
    let base = family_tensor(&ctx, family)?;
    let chain = div_chain_from(&base, &ctx, family, 3)?;
    div3_radial_from(&chain, &ctx)
}

pub fn div3_radial_from(chain: &DivergenceChain, ctx: &PointContext) -> Result<f64, GeomError> {
    let gf = ctx.grad_f_vec()?;
    let s = chain.level(3).contract_vec(0, &gf)?;
    Ok(s.as_scalar().value())
}

/// Both orderings of the second divergence, computed from the full second
/// covariant derivative of the rank-4 tensor (a rank-6 jet): the canonical
/// `∇_j ∇_l T_{ijkl}` and the swapped `∇_l ∇_j T_{ijkl}`.
pub fn div2_ordering_variants(
    m: &ModelSpec,
    p: &[f64],
    family: Family,
) -> Result<(TensorJet, TensorJet), GeomError> {
    let ctx = PointContext::new(m, p, 4)?;
    let base = family_tensor(&ctx, family)?;
    div2_ordering_variants_from(&base, &ctx)
}

pub fn div2_ordering_variants_from(
    base: &TensorJet,
    ctx: &PointContext,
) -> Result<(TensorJet, TensorJet), GeomError> {
    let d1 = covariant_derivative(base, &ctx.christoffel)?;
    let d2 = covariant_derivative(&d1, &ctx.christoffel)?;
    // d2 slots: (outer, inner, i, j, k, l)
    let gi = &ctx.inv_metric;
    // ∇_j ∇_l: inner derivative pairs with l, outer with j
    let canonical = d2
        .contract(1, 5, Some(gi))?
        // remaining: (outer, i, j, k)
        .contract(0, 2, Some(gi))?;
    // ∇_l ∇_j: inner derivative pairs with j, outer with l
    let swapped = d2
        .contract(1, 3, Some(gi))?
        // remaining: (outer, i, k, l)
        .contract(0, 3, Some(gi))?;
    Ok((canonical, swapped))
}

/// Fourth Weyl divergence in the alternative slot ordering
/// `∇_k ∇_j ∇_l ∇_i W_{ikjl}`; on shrinking solitons this equals
/// `-div^4 W` in the canonical ordering.
pub fn div4_w_alt_ordering(m: &ModelSpec, p: &[f64]) -> Result<f64, GeomError> {
    let ctx = PointContext::new(m, p, 6)?;
    let base = family_tensor(&ctx, Family::Weyl)?;
    div4_w_alt_ordering_from(&base, &ctx)
}

pub fn div4_w_alt_ordering_from(base: &TensorJet, ctx: &PointContext) -> Result<f64, GeomError> {
    // Writing W's slots as (i,k,j,l), the divergences contract innermost
    // ∇_i against slot 0, then ∇_l against slot 2 of (k,j,l), then ∇_j
    // against slot 1 of (k,j), then ∇_k.
    let levels = chained_divergence(base, ctx, &[0, 2, 1, 0])?;
    Ok(levels[3].as_scalar().value())
}
