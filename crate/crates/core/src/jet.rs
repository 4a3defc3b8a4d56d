//! Truncated Taylor data (jets) of scalar fields at a point.
//!
//! A [`Jet`] of order `r` holds every raw partial derivative `∂^α` with
//! `|α| <= r`, stored against a shared [`JetTable`] that fixes the
//! multi-index enumeration for a (dimension, order) pair. Arithmetic is
//! exact truncation: products use the multivariate Leibniz rule, and the
//! elementary functions compose a univariate Taylor sequence with the
//! zero-constant part of the argument. Derivatives to the engine's cap
//! come out at full double precision, which finite differences cannot do
//! for sixth-order towers.
//!
//! The enumeration is graded (total degree ascending, lexicographic within
//! a degree), so a lower-order table is a prefix of a higher-order one and
//! truncation is a slice copy. Multiplication pair lists are enumerated in
//! canonical index order, which makes coefficients of degree `<= r-1`
//! bitwise identical whether computed at order `r` or `r-1`.

use crate::expr::{pow_checked, EvalError, Expr, Func};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Hard cap on jet order; curvature work needs at most 6.
pub const MAX_ORDER: usize = 8;

/// Enumeration tables for multi-indices of a fixed dimension and order.
pub struct JetTable {
    dim: usize,
    order: usize,
    /// Multi-indices in graded-lex order; `midx[0]` is the zero index.
    midx: Vec<Box<[u8]>>,
    lookup: HashMap<Box<[u8]>, u32>,
    /// `mul[out]` lists `(ia, ib, w)` with `midx[ia] + midx[ib] = midx[out]`
    /// and `w` the product of binomial coefficients of the split.
    mul: Vec<Vec<(u32, u32, f64)>>,
    /// `deriv[c][i]` = index of `midx[i] + e_c`, or `u32::MAX` past the cap.
    deriv: Vec<Vec<u32>>,
    /// Offset of the first multi-index of each total degree (length order+2).
    degree_start: Vec<usize>,
}

impl JetTable {
    fn build(dim: usize, order: usize) -> JetTable {
        assert!(dim >= 1, "jet dimension must be at least 1");
        assert!(order <= MAX_ORDER, "jet order {order} exceeds cap {MAX_ORDER}");
        let mut midx: Vec<Box<[u8]>> = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(midx.len());
            let mut idx = vec![0u8; dim];
            emit_degree(&mut idx, 0, d as u8, &mut midx);
        }
        degree_start.push(midx.len());

        let lookup: HashMap<Box<[u8]>, u32> = midx
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();

        let mul = midx
            .iter()
            .map(|gamma| {
                let mut pairs = Vec::new();
                for (ia, alpha) in midx.iter().enumerate() {
                    if alpha.iter().zip(gamma.iter()).all(|(a, g)| a <= g) {
                        let beta: Box<[u8]> =
                            gamma.iter().zip(alpha.iter()).map(|(g, a)| g - a).collect();
                        let ib = lookup[&beta];
                        let w: f64 = gamma
                            .iter()
                            .zip(alpha.iter())
                            .map(|(&g, &a)| binomial(g, a))
                            .product();
                        pairs.push((ia as u32, ib, w));
                    }
                }
                pairs
            })
            .collect();

        let deriv = (0..dim)
            .map(|c| {
                midx.iter()
                    .map(|m| {
                        if m.iter().map(|&x| x as usize).sum::<usize>() >= order {
                            u32::MAX
                        } else {
                            let mut up = m.clone();
                            up[c] += 1;
                            lookup[&up]
                        }
                    })
                    .collect()
            })
            .collect();

        JetTable {
            dim,
            order,
            midx,
            lookup,
            mul,
            deriv,
            degree_start,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.midx.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_indices(&self) -> impl Iterator<Item = &[u8]> {
        self.midx.iter().map(|m| &**m)
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).map(|&i| i as usize)
    }

    /// Leibniz split list for output coefficient `out`.
    pub(crate) fn mul_pairs(&self, out: usize) -> &[(u32, u32, f64)] {
        &self.mul[out]
    }
}

/// Emits all multi-indices of exact total degree `left` into `out`,
/// lexicographically.
fn emit_degree(idx: &mut Vec<u8>, pos: usize, left: u8, out: &mut Vec<Box<[u8]>>) {
    if pos + 1 == idx.len() {
        idx[pos] = left;
        out.push(idx.clone().into_boxed_slice());
        return;
    }
    for v in 0..=left {
        idx[pos] = v;
        emit_degree(idx, pos + 1, left - v, out);
    }
    idx[pos] = 0;
}

fn binomial(n: u8, k: u8) -> f64 {
    let mut out = 1.0f64;
    for j in 0..k {
        out = out * (n - j) as f64 / (j + 1) as f64;
    }
    out.round()
}

static TABLES: Lazy<Mutex<HashMap<(usize, usize), Arc<JetTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Shared table for the given dimension and order.
pub fn jet_table(dim: usize, order: usize) -> Arc<JetTable> {
    let mut cache = TABLES.lock().unwrap();
    cache
        .entry((dim, order))
        .or_insert_with(|| Arc::new(JetTable::build(dim, order)))
        .clone()
}

/// Raw partial derivatives of a scalar at a point, up to a fixed order.
#[derive(Clone)]
pub struct Jet {
    center: Arc<[f64]>,
    table: Arc<JetTable>,
    /// Raw partials `∂^α`, aligned with `table.midx`.
    coeffs: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Jet(order {}, value {}, {} coeffs)",
            self.order(),
            self.value(),
            self.coeffs.len()
        )
    }
}

impl Jet {
    pub(crate) fn from_raw(center: Arc<[f64]>, table: Arc<JetTable>, coeffs: Vec<f64>) -> Jet {
        debug_assert_eq!(coeffs.len(), table.len());
        Jet {
            center,
            table,
            coeffs,
        }
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn constant(center: Arc<[f64]>, order: usize, v: f64) -> Jet {
        let table = jet_table(center.len(), order);
        let mut coeffs = vec![0.0; table.len()];
        coeffs[0] = v;
        Jet {
            center,
            table,
            coeffs,
        }
    }

    pub fn coordinate(center: Arc<[f64]>, order: usize, coord: usize) -> Jet {
        let table = jet_table(center.len(), order);
        assert!(coord < table.dim, "coordinate index out of range");
        let mut coeffs = vec![0.0; table.len()];
        coeffs[0] = center[coord];
        if order >= 1 {
            let mut e = vec![0u8; table.dim];
            e[coord] = 1;
            coeffs[table.index_of(&e).unwrap()] = 1.0;
        }
        Jet {
            center,
            table,
            coeffs,
        }
    }

    pub fn order(&self) -> usize {
        self.table.order
    }

    pub fn dim(&self) -> usize {
        self.table.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// The order-0 coefficient, i.e. the value of the scalar at the center.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw partial `∂^α` if `|α| <= order`.
    pub fn coefficient(&self, alpha: &[u8]) -> Option<f64> {
        self.table.index_of(alpha).map(|i| self.coeffs[i])
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&[u8], f64)> {
        self.table
            .multi_indices()
            .zip(self.coeffs.iter().copied())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Copy truncated to a lower (or equal) order.
    pub fn truncated(&self, order: usize) -> Jet {
        assert!(order <= self.order());
        if order == self.order() {
            return self.clone();
        }
        let table = jet_table(self.dim(), order);
        Jet {
            center: self.center.clone(),
            coeffs: self.coeffs[..table.len()].to_vec(),
            table,
        }
    }

    /// Jet of `∂_c self`, one order lower.
    pub fn derivative(&self, c: usize) -> Jet {
        assert!(
            self.order() >= 1,
            "cannot differentiate an order-0 jet"
        );
        let out_table = jet_table(self.dim(), self.order() - 1);
        let map = &self.table.deriv[c];
        let coeffs = (0..out_table.len())
            .map(|i| self.coeffs[map[i] as usize])
            .collect();
        Jet {
            center: self.center.clone(),
            table: out_table,
            coeffs,
        }
    }

    fn align(&self, rhs: &Jet) -> (Jet, Jet) {
        debug_assert_eq!(self.dim(), rhs.dim());
        debug_assert_eq!(&*self.center, &*rhs.center);
        let r = self.order().min(rhs.order());
        (self.truncated(r), rhs.truncated(r))
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let (mut a, b) = self.align(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        let (mut a, b) = self.align(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Jet {
        self.scaled(-1.0)
    }

    pub fn scaled(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn add_scaled(&self, rhs: &Jet, s: f64) -> Jet {
        let (mut a, b) = self.align(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += s * y;
        }
        a
    }

    /// Leibniz product, truncated to the smaller order of the factors.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        let (a, b) = self.align(rhs);
        let table = a.table.clone();
        let mut coeffs = vec![0.0; table.len()];
        for (out, pairs) in coeffs.iter_mut().zip(table.mul.iter()) {
            let mut acc = 0.0;
            for &(ia, ib, w) in pairs {
                acc += w * a.coeffs[ia as usize] * b.coeffs[ib as usize];
            }
            *out = acc;
        }
        Jet {
            center: a.center,
            table,
            coeffs,
        }
    }

    /// `self^m` for integer `m >= 0` by repeated multiplication (exact at
    /// zero base, unlike the binomial-series route).
    pub fn powi(&self, m: u32) -> Jet {
        let mut out = Jet::constant(self.center.clone(), self.order(), 1.0);
        let mut base = self.clone();
        let mut m = m;
        while m > 0 {
            if m & 1 == 1 {
                out = out.mul(&base);
            }
            m >>= 1;
            if m > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Composition `g(self)` given the univariate Taylor coefficients
    /// `cs[k] = g^(k)(value)/k!`. Coefficients of total degree `< k`
    /// receive no contribution from `w^k`, keeping low-order output
    /// independent of the truncation order.
    fn compose(&self, cs: &[f64]) -> Jet {
        let r = self.order();
        debug_assert_eq!(cs.len(), r + 1);
        let table = self.table.clone();
        let mut out = vec![0.0; table.len()];
        out[0] = cs[0];
        if r == 0 {
            return Jet {
                center: self.center.clone(),
                table,
                coeffs: out,
            };
        }
        let mut w = self.clone();
        w.coeffs[0] = 0.0;
        let mut wpow = w.clone();
        for k in 1..=r {
            if k > 1 {
                wpow = wpow.mul(&w);
            }
            for i in table.degree_start[k]..table.len() {
                out[i] += cs[k] * wpow.coeffs[i];
            }
        }
        Jet {
            center: self.center.clone(),
            table,
            coeffs: out,
        }
    }

    pub fn inverse(&self) -> Result<Jet, EvalError> {
        let u0 = self.value();
        if u0 == 0.0 {
            return Err(EvalError::DivByZero);
        }
        let r = self.order();
        let mut cs = vec![0.0; r + 1];
        cs[0] = 1.0 / u0;
        for k in 1..=r {
            cs[k] = -cs[k - 1] / u0;
        }
        Ok(self.compose(&cs))
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet, EvalError> {
        Ok(self.mul(&rhs.inverse()?))
    }

    pub fn exp(&self) -> Jet {
        let r = self.order();
        let mut cs = vec![0.0; r + 1];
        cs[0] = self.value().exp();
        for k in 1..=r {
            cs[k] = cs[k - 1] / k as f64;
        }
        self.compose(&cs)
    }

    pub fn ln(&self) -> Result<Jet, EvalError> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(EvalError::LogDomain { arg: u0 });
        }
        let r = self.order();
        let mut cs = vec![0.0; r + 1];
        cs[0] = u0.ln();
        if r >= 1 {
            cs[1] = 1.0 / u0;
            for k in 2..=r {
                cs[k] = -cs[k - 1] * (k - 1) as f64 / (k as f64 * u0);
            }
        }
        Ok(self.compose(&cs))
    }

    pub fn sin(&self) -> Jet {
        self.circular(false)
    }

    pub fn cos(&self) -> Jet {
        self.circular(true)
    }

    fn circular(&self, cos_first: bool) -> Jet {
        let r = self.order();
        let (s0, c0) = self.value().sin_cos();
        // Derivative cycle of sin: (sin, cos, -sin, -cos); cos starts one
        // step along.
        let cycle = [s0, c0, -s0, -c0];
        let shift = if cos_first { 1 } else { 0 };
        let mut cs = vec![0.0; r + 1];
        let mut fact = 1.0;
        for (k, c) in cs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *c = cycle[(k + shift) % 4] / fact;
        }
        self.compose(&cs)
    }

    pub fn tan(&self) -> Result<Jet, EvalError> {
        let r = self.order();
        let t0 = self.value().tan();
        if !t0.is_finite() {
            return Err(EvalError::NonFinite);
        }
        // T' = 1 + T^2 drives the coefficient recurrence.
        let mut cs = vec![0.0; r + 1];
        cs[0] = t0;
        for k in 0..r {
            let mut conv = if k == 0 { 1.0 } else { 0.0 };
            for i in 0..=k {
                conv += cs[i] * cs[k - i];
            }
            cs[k + 1] = conv / (k + 1) as f64;
        }
        Ok(self.compose(&cs))
    }

    pub fn sinh(&self) -> Jet {
        self.hyperbolic(false)
    }

    pub fn cosh(&self) -> Jet {
        self.hyperbolic(true)
    }

    fn hyperbolic(&self, cosh_first: bool) -> Jet {
        let r = self.order();
        let u0 = self.value();
        let pair = [u0.sinh(), u0.cosh()];
        let shift = if cosh_first { 1 } else { 0 };
        let mut cs = vec![0.0; r + 1];
        let mut fact = 1.0;
        for (k, c) in cs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *c = pair[(k + shift) % 2] / fact;
        }
        self.compose(&cs)
    }

    pub fn sqrt(&self) -> Result<Jet, EvalError> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(EvalError::SqrtDomain { arg: u0 });
        }
        self.powf_positive(0.5)
    }

    /// Real power with constant exponent. Integer exponents in `[-64, 64]`
    /// go through exact repeated multiplication; other exponents need a
    /// strictly positive base.
    pub fn powf(&self, e: f64) -> Result<Jet, EvalError> {
        if e == e.trunc() && e.abs() <= 64.0 {
            let m = e as i64;
            return if m >= 0 {
                Ok(self.powi(m as u32))
            } else {
                Ok(self.inverse()?.powi((-m) as u32))
            };
        }
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(EvalError::PowDomain { base: u0, exp: e });
        }
        self.powf_positive(e)
    }

    fn powf_positive(&self, e: f64) -> Result<Jet, EvalError> {
        let u0 = self.value();
        let r = self.order();
        let mut cs = vec![0.0; r + 1];
        cs[0] = pow_checked(u0, e)?;
        for k in 1..=r {
            cs[k] = cs[k - 1] * (e - (k - 1) as f64) / (k as f64 * u0);
        }
        Ok(self.compose(&cs))
    }
}

/// Evaluates `e` into a jet of order `r` at `p`: the coefficient at `α`
/// is exactly `∂^α e` evaluated at `p`, up to floating round-off.
pub fn jet_evaluate(e: &Expr, p: &[f64], r: usize) -> Result<Jet, EvalError> {
    assert!(r <= MAX_ORDER, "jet order {r} exceeds cap {MAX_ORDER}");
    let center: Arc<[f64]> = Arc::from(p);
    let jet = jet_eval_at(e, &center, r)?;
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn jet_eval_at(e: &Expr, center: &Arc<[f64]>, r: usize) -> Result<Jet, EvalError> {
    Ok(match e {
        Expr::Num(v) => Jet::constant(center.clone(), r, *v),
        Expr::Coord(i) => Jet::coordinate(center.clone(), r, *i),
        Expr::Add(a, b) => jet_eval_at(a, center, r)?.add(&jet_eval_at(b, center, r)?),
        Expr::Sub(a, b) => jet_eval_at(a, center, r)?.sub(&jet_eval_at(b, center, r)?),
        Expr::Mul(a, b) => jet_eval_at(a, center, r)?.mul(&jet_eval_at(b, center, r)?),
        Expr::Div(a, b) => jet_eval_at(a, center, r)?.div(&jet_eval_at(b, center, r)?)?,
        Expr::Pow(a, exp) => jet_eval_at(a, center, r)?.powf(*exp)?,
        Expr::Neg(a) => jet_eval_at(a, center, r)?.neg(),
        Expr::Call(f, a) => {
            let u = jet_eval_at(a, center, r)?;
            match f {
                Func::Exp => u.exp(),
                Func::Log => u.ln()?,
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Tan => u.tan()?,
                Func::Sinh => u.sinh(),
                Func::Cosh => u.cosh(),
                Func::Sqrt => u.sqrt()?,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use approx::assert_relative_eq;

    fn jet_of(src: &str, coords: &[&str], p: &[f64], r: usize) -> Jet {
        let e = parse_expression(src, coords).unwrap();
        jet_evaluate(&e, p, r).unwrap()
    }

    #[test]
    fn table_enumeration_is_graded_prefix() {
        let t4 = jet_table(3, 4);
        let t3 = jet_table(3, 3);
        assert_eq!(t3.len(), 20);
        assert_eq!(t4.len(), 35);
        for i in 0..t3.len() {
            assert_eq!(t4.midx[i], t3.midx[i], "prefix property broken at {i}");
        }
        let mut last_deg = 0usize;
        for m in t4.multi_indices() {
            let d: usize = m.iter().map(|&x| x as usize).sum();
            assert!(d >= last_deg, "degrees must ascend");
            last_deg = d;
        }
    }

    #[test]
    fn square_jet_matches_hand_values() {
        let j = jet_of("x^2", &["x"], &[1.0], 2);
        assert_eq!(j.coefficient(&[0]), Some(1.0));
        assert_eq!(j.coefficient(&[1]), Some(2.0));
        assert_eq!(j.coefficient(&[2]), Some(2.0));
    }

    #[test]
    fn sine_jet_at_origin() {
        let j = jet_of("sin(y)", &["y"], &[0.0], 3);
        assert_eq!(j.coefficient(&[0]), Some(0.0));
        assert_relative_eq!(j.coefficient(&[1]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(j.coefficient(&[2]).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(j.coefficient(&[3]).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_partial_of_exp_product() {
        let j = jet_of("exp(x*y)", &["x", "y"], &[1.0, 1.0], 2);
        // ∂x∂y e^{xy} = e^{xy}(1 + xy) -> 2e at (1,1)
        let e = std::f64::consts::E;
        assert_relative_eq!(j.coefficient(&[1, 1]).unwrap(), 2.0 * e, epsilon = 1e-12);
        assert_relative_eq!(j.coefficient(&[0, 0]).unwrap(), e, epsilon = 1e-12);
        assert_relative_eq!(j.coefficient(&[2, 0]).unwrap(), e, epsilon = 1e-12);
    }

    #[test]
    fn order_zero_matches_plain_evaluation() {
        let e = parse_expression("4/(1+x^2+y^2)^2", &["x", "y"]).unwrap();
        let j = jet_evaluate(&e, &[0.0, 0.0], 0).unwrap();
        assert_relative_eq!(j.value(), 4.0);
    }

    #[test]
    fn truncation_is_bitwise_consistent_across_orders() {
        let coords = ["x", "y"];
        let sources = [
            "exp(x*y) + sin(x)^2",
            "4/(1+x^2+y^2)^2",
            "sqrt(1 + x^2)*cos(y)",
            "tan(x/4)/(2 + sin(y))",
            "log(2 + x)*sinh(y)",
            "(1 + x^2/10)^2.5",
        ];
        let p = [0.3, -0.7];
        for src in sources {
            let e = parse_expression(src, &coords).unwrap();
            for r in 1..=6usize {
                let hi = jet_evaluate(&e, &p, r).unwrap();
                let lo = jet_evaluate(&e, &p, r - 1).unwrap();
                let hi_trunc = hi.truncated(r - 1);
                for (a, b) in hi_trunc.coeffs.iter().zip(lo.coeffs.iter()) {
                    assert_eq!(a.to_bits(), b.to_bits(), "{src} at order {r}");
                }
            }
        }
    }

    #[test]
    fn jet_derivative_agrees_with_symbolic_derivative() {
        let coords = ["x", "y"];
        let e = parse_expression("exp(-x^2/4)*sin(2*y) + x*y^3", &coords).unwrap();
        let p = [0.6, -0.4];
        let j = jet_evaluate(&e, &p, 4).unwrap();
        for c in 0..2 {
            let d = crate::expr::differentiate(&e, c);
            let dj = jet_evaluate(&d, &p, 3).unwrap();
            let jd = j.derivative(c);
            for (alpha, v) in jd.coefficients() {
                let w = dj.coefficient(alpha).unwrap();
                assert!(
                    (v - w).abs() <= 1e-10 * (1.0 + w.abs()),
                    "coord {c} alpha {alpha:?}: jet {v} vs symbolic {w}"
                );
            }
        }
    }

    #[test]
    fn high_order_jet_matches_iterated_symbolic_derivative() {
        let coords = ["x"];
        let e = parse_expression("1/(1 + x^2)", &coords).unwrap();
        let p = [0.5];
        let j = jet_evaluate(&e, &p, 6).unwrap();
        let mut d = e.clone();
        for k in 1..=6usize {
            d = crate::expr::differentiate(&d, 0);
            let want = crate::expr::evaluate(&d, &p).unwrap();
            let got = j.coefficient(&[k as u8]).unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "order {k}: jet {got} vs symbolic {want}"
            );
        }
    }

    #[test]
    fn domain_errors_surface() {
        let coords = ["x"];
        let log = parse_expression("log(x)", &coords).unwrap();
        assert!(matches!(
            jet_evaluate(&log, &[-1.0], 2),
            Err(EvalError::LogDomain { .. })
        ));
        let inv = parse_expression("1/x", &coords).unwrap();
        assert!(matches!(
            jet_evaluate(&inv, &[0.0], 2),
            Err(EvalError::DivByZero)
        ));
        let sq = parse_expression("sqrt(x)", &coords).unwrap();
        assert!(matches!(
            jet_evaluate(&sq, &[-2.0], 1),
            Err(EvalError::SqrtDomain { .. })
        ));
    }

    #[test]
    fn integer_power_exact_at_zero_base() {
        let j = jet_of("x^3", &["x"], &[0.0], 4);
        assert_eq!(j.coefficient(&[0]), Some(0.0));
        assert_eq!(j.coefficient(&[1]), Some(0.0));
        assert_eq!(j.coefficient(&[2]), Some(0.0));
        assert_eq!(j.coefficient(&[3]), Some(6.0));
        assert_eq!(j.coefficient(&[4]), Some(0.0));
    }

    proptest::proptest! {
        /// Leibniz: the jet of u*v equals the jet-product of the jets.
        #[test]
        fn product_jets_satisfy_leibniz(
            (ue, ve) in (arb_smooth(), arb_smooth()),
            x in -0.9..0.9f64,
            y in -0.9..0.9f64,
        ) {
            let coords = ["x", "y"];
            let u = parse_expression(&ue, &coords).unwrap();
            let v = parse_expression(&ve, &coords).unwrap();
            let prod = Expr::Mul(Box::new(u.clone()), Box::new(v.clone()));
            let p = [x, y];
            let r = 4;
            let ju = jet_evaluate(&u, &p, r).unwrap();
            let jv = jet_evaluate(&v, &p, r).unwrap();
            let direct = jet_evaluate(&prod, &p, r).unwrap();
            let viajets = ju.mul(&jv);
            let scale = direct.max_abs_coeff().max(viajets.max_abs_coeff());
            for (a, b) in direct.coeffs.iter().zip(viajets.coeffs.iter()) {
                proptest::prop_assert!(
                    (a - b).abs() <= 1e-12 * (1.0 + scale),
                    "{ue} * {ve}: {a} vs {b}"
                );
            }
        }
    }

    use crate::expr::Expr;

    /// Smooth-everywhere expression sources over (x, y).
    fn arb_smooth() -> impl proptest::strategy::Strategy<Value = String> {
        use proptest::prelude::*;
        prop_oneof![
            Just("sin(x)*cos(y)".to_string()),
            Just("exp(x*y/4)".to_string()),
            Just("1 + x^2 + y^2".to_string()),
            Just("x^3 - 2*x*y + y^2".to_string()),
            Just("cosh(x/2) + sinh(y/3)".to_string()),
            Just("4/(2+x^2+y^2)^2".to_string()),
            Just("sqrt(4 + x^2 + y^2)".to_string()),
            Just("log(3 + x + y)".to_string()),
        ]
    }
}
