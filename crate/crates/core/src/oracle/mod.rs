//! Reference implementations and the differential test harness.
//!
//! [`NaiveSet`] and [`SeqOracle`] are the ground truth: plain vectors with
//! explicit linear-time initialization. Traces of operations are generated
//! from a seed ([`gen_trace`]), stored in a line-oriented text format
//! ([`OpTrace`]) and replayed against a subject and its oracle side by side
//! ([`differential_run`]).

mod exhaustive;
mod garbage;
mod run;
mod trace;
pub mod workload;

pub use exhaustive::{exhaustive_segdict, ExhaustiveReport};
pub use garbage::{crafted_fills, crafted_seg_fills, CraftedPattern};
pub use run::{differential_run, Divergence, Report, RunOptions, Subject};
pub use trace::{gen_trace, Op, OpTrace, Profile, Universe};

use crate::wordops::HalfPair;

/// A subset of `{1..n}` as a plain bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveSet {
    bits: Vec<bool>,
    len: usize,
}

impl NaiveSet {
    pub fn new(n: u64) -> Self {
        Self {
            bits: vec![false; n as usize + 1],
            len: 0,
        }
    }

    pub fn universe(&self) -> u64 {
        self.bits.len() as u64 - 1
    }

    pub fn insert(&mut self, elem: u64) {
        let slot = &mut self.bits[elem as usize];
        if !*slot {
            *slot = true;
            self.len += 1;
        }
    }

    pub fn delete(&mut self, elem: u64) {
        let slot = &mut self.bits[elem as usize];
        if *slot {
            *slot = false;
            self.len -= 1;
        }
    }

    pub fn contains(&self, elem: u64) -> bool {
        self.bits.get(elem as usize).copied().unwrap_or(false) && elem != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u64)
    }
}

/// A sequence of `N` cell values, all zero initially.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqOracle {
    values: Vec<HalfPair>,
}

impl SeqOracle {
    pub fn new(cells: u64) -> Self {
        Self {
            values: vec![HalfPair::ZERO; cells as usize],
        }
    }

    pub fn read(&self, i: u64) -> HalfPair {
        self.values[i as usize - 1]
    }

    pub fn write(&mut self, i: u64, x: HalfPair) {
        self.values[i as usize - 1] = x;
    }

    pub fn zeros(&self) -> usize {
        self.values.iter().filter(|v| v.is_zero()).count()
    }

    pub fn nonzero_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| i as u64 + 1)
    }

    pub fn values(&self) -> &[HalfPair] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn naive_set_semantics_exhaustive() {
        // Every sequence of 4 toggles over {1..3} agrees with BTreeSet.
        for code in 0..(6u32.pow(4)) {
            let mut s = NaiveSet::new(3);
            let mut r = BTreeSet::new();
            let mut c = code;
            for _ in 0..4 {
                let (op, elem) = ((c % 6) / 3, (c % 3) as u64 + 1);
                c /= 6;
                if op == 0 {
                    s.insert(elem);
                    r.insert(elem);
                } else {
                    s.delete(elem);
                    r.remove(&elem);
                }
                assert_eq!(s.len(), r.len());
                assert!(s.iter().eq(r.iter().copied()));
                for l in 0..=4 {
                    assert_eq!(s.contains(l), r.contains(&l));
                }
            }
        }
    }

    #[test]
    fn seq_oracle() {
        let mut o = SeqOracle::new(3);
        assert_eq!(o.zeros(), 3);
        o.write(2, HalfPair::new(1, 0));
        assert_eq!(o.nonzero_indices().collect::<Vec<_>>(), vec![2]);
        assert_eq!(o.read(2), HalfPair::new(1, 0));
    }
}
