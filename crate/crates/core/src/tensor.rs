//! Dense multi-indexed arrays of jets with covariant/contravariant slot
//! bookkeeping.
//!
//! Components are stored row-major over the index tuple; with chart
//! dimensions of at most five, dense storage beats symmetry-exploiting
//! schemes on slot-bookkeeping risk and is fast enough per point.

use crate::jet::Jet;
use std::sync::Arc;
use thiserror::Error;

/// Variance of one tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Lower index.
    Cov,
    /// Upper index.
    Con,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlotError {
    #[error("slot {slot} out of range for rank {rank}")]
    OutOfRange { slot: usize, rank: usize },
    #[error("contraction slots must be distinct, got {0}")]
    NotDistinct(usize),
    #[error("contracting two covariant slots needs the inverse metric")]
    NeedsInverseMetric,
    #[error("expected a {expected} slot at position {slot}")]
    WrongVariance { slot: usize, expected: &'static str },
}

/// A tensor field known to finite jet order at one point.
#[derive(Clone, Debug)]
pub struct TensorJet {
    dim: usize,
    slots: Vec<Slot>,
    comps: Vec<Jet>,
}

/// Iterates all rank-`rank` index tuples in row-major order.
pub fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    loop {
        f(&idx);
        let mut k = rank;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dim {
                break;
            }
            idx[k] = 0;
        }
    }
}

impl TensorJet {
    pub fn from_fn(
        dim: usize,
        slots: &[Slot],
        mut f: impl FnMut(&[usize]) -> Jet,
    ) -> TensorJet {
        let mut comps = Vec::with_capacity(dim.pow(slots.len() as u32));
        for_each_index(dim, slots.len(), |idx| comps.push(f(idx)));
        TensorJet {
            dim,
            slots: slots.to_vec(),
            comps,
        }
    }

    pub fn zeros(dim: usize, slots: &[Slot], center: Arc<[f64]>, order: usize) -> TensorJet {
        TensorJet::from_fn(dim, slots, |_| Jet::constant(center.clone(), order, 0.0))
    }

    /// Wraps a single jet as a rank-0 tensor.
    pub fn scalar(jet: Jet) -> TensorJet {
        TensorJet {
            dim: jet.dim(),
            slots: Vec::new(),
            comps: vec![jet],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn order(&self) -> usize {
        self.comps[0].order()
    }

    pub fn is_fully_covariant(&self) -> bool {
        self.slots.iter().all(|s| *s == Slot::Cov)
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut off = 0;
        for &i in idx {
            debug_assert!(i < self.dim);
            off = off * self.dim + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], jet: Jet) {
        let off = self.offset(idx);
        self.comps[off] = jet;
    }

    /// The rank-0 component; panics unless the tensor is a scalar.
    pub fn as_scalar(&self) -> &Jet {
        assert!(self.rank() == 0, "tensor is not a scalar");
        &self.comps[0]
    }

    pub fn components(&self) -> &[Jet] {
        &self.comps
    }

    /// Largest |component value| at order 0.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .fold(0.0, |m, j| m.max(j.value().abs()))
    }

    pub fn add(&self, rhs: &TensorJet) -> TensorJet {
        self.zip(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &TensorJet) -> TensorJet {
        self.zip(rhs, |a, b| a.sub(b))
    }

    pub fn scaled(&self, s: f64) -> TensorJet {
        self.map(|j| j.scaled(s))
    }

    pub fn scaled_jet(&self, s: &Jet) -> TensorJet {
        self.map(|j| j.mul(s))
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> TensorJet {
        TensorJet {
            dim: self.dim,
            slots: self.slots.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    fn zip(&self, rhs: &TensorJet, f: impl Fn(&Jet, &Jet) -> Jet) -> TensorJet {
        assert_eq!(self.dim, rhs.dim);
        assert_eq!(self.slots, rhs.slots, "valence mismatch");
        TensorJet {
            dim: self.dim,
            slots: self.slots.clone(),
            comps: self
                .comps
                .iter()
                .zip(rhs.comps.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Copy truncated to a lower (or equal) jet order.
    pub fn truncated(&self, order: usize) -> TensorJet {
        if order == self.order() {
            return self.clone();
        }
        self.map(|j| j.truncated(order))
    }

    /// Swaps two slots (pure index permutation; variance travels along).
    pub fn swap_slots(&self, a: usize, b: usize) -> TensorJet {
        let mut slots = self.slots.clone();
        slots.swap(a, b);
        let this = self;
        TensorJet::from_fn(self.dim, &slots, |idx| {
            let mut src: Vec<usize> = idx.to_vec();
            src.swap(a, b);
            this.get(&src).clone()
        })
    }

    /// Contracts `slot_a` with `slot_b`. A (Cov, Con) pair traces directly;
    /// a (Cov, Cov) pair needs the inverse metric, a (Con, Con) pair the
    /// metric.
    pub fn contract(
        &self,
        slot_a: usize,
        slot_b: usize,
        pairing: Option<&TensorJet>,
    ) -> Result<TensorJet, SlotError> {
        let rank = self.rank();
        if slot_a >= rank || slot_b >= rank {
            return Err(SlotError::OutOfRange {
                slot: slot_a.max(slot_b),
                rank,
            });
        }
        if slot_a == slot_b {
            return Err(SlotError::NotDistinct(slot_a));
        }
        let (lo, hi) = (slot_a.min(slot_b), slot_a.max(slot_b));
        let direct = self.slots[lo] != self.slots[hi];
        if !direct && pairing.is_none() {
            return Err(SlotError::NeedsInverseMetric);
        }
        // truncate a higher-order pairing once, not per product
        let pairing_store;
        let pairing = match pairing {
            Some(p) if p.order() > self.order() => {
                pairing_store = p.truncated(self.order());
                Some(&pairing_store)
            }
            other => other,
        };
        let mut slots = Vec::with_capacity(rank - 2);
        for (i, s) in self.slots.iter().enumerate() {
            if i != lo && i != hi {
                slots.push(*s);
            }
        }
        let dim = self.dim;
        let out = TensorJet::from_fn(dim, &slots, |idx| {
            let mut src = vec![0usize; rank];
            let mut k = 0;
            for (i, v) in src.iter_mut().enumerate() {
                if i != lo && i != hi {
                    *v = idx[k];
                    k += 1;
                }
            }
            let mut acc: Option<Jet> = None;
            for a in 0..dim {
                for b in 0..dim {
                    let term = if direct {
                        if a != b {
                            continue;
                        }
                        src[lo] = a;
                        src[hi] = a;
                        self.get(&src).clone()
                    } else {
                        src[lo] = a;
                        src[hi] = b;
                        self.get(&src).mul(pairing.unwrap().get(&[a, b]))
                    };
                    acc = Some(match acc {
                        None => term,
                        Some(prev) => prev.add(&term),
                    });
                }
            }
            acc.unwrap()
        });
        Ok(out)
    }

    /// Contracts `slot` against a rank-1 tensor whose variance is dual to
    /// the slot's (vector against Cov slot, covector against Con slot).
    pub fn contract_vec(&self, slot: usize, v: &TensorJet) -> Result<TensorJet, SlotError> {
        let rank = self.rank();
        if slot >= rank {
            return Err(SlotError::OutOfRange { slot, rank });
        }
        assert_eq!(v.rank(), 1);
        if v.slots[0] == self.slots[slot] {
            return Err(SlotError::WrongVariance {
                slot,
                expected: "dual",
            });
        }
        let v_store;
        let v = if v.order() > self.order() {
            v_store = v.truncated(self.order());
            &v_store
        } else {
            v
        };
        let mut slots = self.slots.clone();
        slots.remove(slot);
        let dim = self.dim;
        let out = TensorJet::from_fn(dim, &slots, |idx| {
            let mut src = vec![0usize; rank];
            src[..slot].copy_from_slice(&idx[..slot]);
            src[slot + 1..].copy_from_slice(&idx[slot..]);
            let mut acc: Option<Jet> = None;
            for a in 0..dim {
                src[slot] = a;
                let term = self.get(&src).mul(v.get(&[a]));
                acc = Some(match acc {
                    None => term,
                    Some(prev) => prev.add(&term),
                });
            }
            acc.unwrap()
        });
        Ok(out)
    }

    /// Raises a covariant slot with the inverse metric.
    pub fn raise(&self, slot: usize, g_inv: &TensorJet) -> Result<TensorJet, SlotError> {
        self.flip(slot, g_inv, Slot::Cov)
    }

    /// Lowers a contravariant slot with the metric.
    pub fn lower(&self, slot: usize, g: &TensorJet) -> Result<TensorJet, SlotError> {
        self.flip(slot, g, Slot::Con)
    }

    fn flip(
        &self,
        slot: usize,
        pairing: &TensorJet,
        expect: Slot,
    ) -> Result<TensorJet, SlotError> {
        let rank = self.rank();
        if slot >= rank {
            return Err(SlotError::OutOfRange { slot, rank });
        }
        if self.slots[slot] != expect {
            return Err(SlotError::WrongVariance {
                slot,
                expected: if expect == Slot::Cov {
                    "covariant"
                } else {
                    "contravariant"
                },
            });
        }
        let pairing_store;
        let pairing = if pairing.order() > self.order() {
            pairing_store = pairing.truncated(self.order());
            &pairing_store
        } else {
            pairing
        };
        let mut slots = self.slots.clone();
        slots[slot] = if expect == Slot::Cov {
            Slot::Con
        } else {
            Slot::Cov
        };
        let dim = self.dim;
        let out = TensorJet::from_fn(dim, &slots, |idx| {
            let mut src: Vec<usize> = idx.to_vec();
            let mut acc: Option<Jet> = None;
            for a in 0..dim {
                src[slot] = a;
                let term = self.get(&src).mul(pairing.get(&[idx[slot], a]));
                acc = Some(match acc {
                    None => term,
                    Some(prev) => prev.add(&term),
                });
            }
            acc.unwrap()
        });
        Ok(out)
    }

    /// Raises every covariant slot.
    pub fn raise_all(&self, g_inv: &TensorJet) -> TensorJet {
        let mut out = self.clone();
        for s in 0..self.rank() {
            if out.slots[s] == Slot::Cov {
                out = out.raise(s, g_inv).unwrap();
            }
        }
        out
    }

    /// Full squared norm |T|^2 of a covariant tensor: every slot pair is
    /// contracted with the inverse metric.
    pub fn norm_sq(&self, g_inv: &TensorJet) -> Jet {
        assert!(self.is_fully_covariant(), "norm_sq expects covariant input");
        let sharp = self.raise_all(g_inv);
        let mut acc: Option<Jet> = None;
        for (a, b) in self.comps.iter().zip(sharp.comps.iter()) {
            let term = a.mul(b);
            acc = Some(match acc {
                None => term,
                Some(prev) => prev.add(&term),
            });
        }
        acc.unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::jet_table;
    use approx::assert_relative_eq;

    fn center(p: &[f64]) -> Arc<[f64]> {
        Arc::from(p)
    }

    fn constant_tensor(dim: usize, slots: &[Slot], vals: impl Fn(&[usize]) -> f64) -> TensorJet {
        let c = center(&vec![0.0; dim]);
        // instantiate the table once so orders align
        let _ = jet_table(dim, 2);
        TensorJet::from_fn(dim, slots, |idx| Jet::constant(c.clone(), 2, vals(idx)))
    }

    fn identity_metric(dim: usize, variance: Slot) -> TensorJet {
        constant_tensor(dim, &[variance, variance], |idx| {
            if idx[0] == idx[1] {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn contracting_identity_gives_dimension() {
        let delta = constant_tensor(3, &[Slot::Con, Slot::Cov], |idx| {
            if idx[0] == idx[1] {
                1.0
            } else {
                0.0
            }
        });
        let tr = delta.contract(0, 1, None).unwrap();
        assert_eq!(tr.rank(), 0);
        assert_relative_eq!(tr.as_scalar().value(), 3.0);
    }

    #[test]
    fn covariant_contraction_requires_metric() {
        let t = constant_tensor(2, &[Slot::Cov, Slot::Cov], |_| 1.0);
        assert_eq!(
            t.contract(0, 1, None).unwrap_err(),
            SlotError::NeedsInverseMetric
        );
    }

    #[test]
    fn raise_then_lower_is_identity() {
        let dim = 3;
        // metric diag(1, 2, 4), inverse diag(1, 1/2, 1/4)
        let g = constant_tensor(dim, &[Slot::Cov, Slot::Cov], |idx| {
            if idx[0] == idx[1] {
                [1.0, 2.0, 4.0][idx[0]]
            } else {
                0.0
            }
        });
        let gi = constant_tensor(dim, &[Slot::Con, Slot::Con], |idx| {
            if idx[0] == idx[1] {
                [1.0, 0.5, 0.25][idx[0]]
            } else {
                0.0
            }
        });
        let t = constant_tensor(dim, &[Slot::Cov, Slot::Cov], |idx| {
            (idx[0] * 3 + idx[1]) as f64 + 1.0
        });
        let back = t.raise(1, &gi).unwrap().lower(1, &g).unwrap();
        for (a, b) in t.components().iter().zip(back.components().iter()) {
            assert_relative_eq!(a.value(), b.value(), epsilon = 1e-12);
        }
    }

    #[test]
    fn lower_on_flat_metric_is_componentwise_identity() {
        let g = identity_metric(4, Slot::Cov);
        let v = constant_tensor(4, &[Slot::Con], |idx| idx[0] as f64 + 0.5);
        let lowered = v.lower(0, &g).unwrap();
        assert_eq!(lowered.slots(), &[Slot::Cov]);
        for (a, b) in v.components().iter().zip(lowered.components().iter()) {
            assert_relative_eq!(a.value(), b.value());
        }
    }

    #[test]
    fn swap_slots_permutes_components() {
        let t = constant_tensor(2, &[Slot::Cov, Slot::Cov], |idx| {
            (idx[0] * 2 + idx[1]) as f64
        });
        let s = t.swap_slots(0, 1);
        assert_relative_eq!(s.get(&[0, 1]).value(), t.get(&[1, 0]).value());
        assert_relative_eq!(s.get(&[1, 0]).value(), t.get(&[0, 1]).value());
    }

    #[test]
    fn norm_sq_on_flat_metric_sums_squares() {
        let gi = identity_metric(2, Slot::Con);
        let t = constant_tensor(2, &[Slot::Cov, Slot::Cov], |idx| {
            (idx[0] * 2 + idx[1]) as f64
        });
        // components 0,1,2,3 -> sum of squares 14
        assert_relative_eq!(t.norm_sq(&gi).value(), 14.0);
    }

    #[test]
    fn contract_vec_matches_manual_sum() {
        let t = constant_tensor(2, &[Slot::Cov, Slot::Cov], |idx| {
            (idx[0] * 2 + idx[1]) as f64 + 1.0
        });
        let v = constant_tensor(2, &[Slot::Con], |idx| [2.0, -1.0][idx[0]]);
        let out = t.contract_vec(1, &v).unwrap();
        // row i: t[i,0]*2 + t[i,1]*(-1)
        assert_relative_eq!(out.get(&[0]).value(), 1.0 * 2.0 - 2.0);
        assert_relative_eq!(out.get(&[1]).value(), 3.0 * 2.0 - 4.0);
    }
}
