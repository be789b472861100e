use std::collections::BTreeMap;

use super::SeqOracle;
use crate::bitstore::{BitStore, FillPolicy};
use crate::error::{invalid, Result};
use crate::segdict::{BarrierMode, Mutant, SegDict, WriteCase};
use crate::wordops::HalfPair;

/// Result of an exhaustive search over short write sequences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExhaustiveReport {
    /// Sequences of the maximal length that were run to the end.
    pub sequences: u64,
    /// States compared against the oracle, counting the initial one.
    pub states: u64,
    pub cases: BTreeMap<WriteCase, u64>,
    /// The first failing sequence and what went wrong.
    pub failure: Option<(Vec<(u64, HalfPair)>, String)>,
}

struct Search<'a> {
    alphabet: &'a [HalfPair],
    max_len: usize,
    path: Vec<(u64, HalfPair)>,
    report: ExhaustiveReport,
}

fn compare(d: &SegDict<BitStore>, oracle: &SeqOracle) -> std::result::Result<(), String> {
    d.check_invariants().map_err(|e| e.to_string())?;
    let got = d.values().map_err(|e| e.to_string())?;
    if got != oracle.values() {
        return Err(format!("sequence is {got:?}, expected {:?}", oracle.values()));
    }
    let z = d.nonzero().map_err(|e| e.to_string())?;
    let ok = if oracle.zeros() == oracle.values().len() {
        z == 0
    } else {
        z >= 1 && z <= d.cells() && !oracle.read(z).is_zero()
    };
    if !ok {
        return Err(format!("nonzero() = {z}"));
    }
    let mut listed: Vec<u64> = d.nonzero_indices().take(oracle.values().len() + 1).collect();
    listed.sort_unstable();
    if !listed.iter().copied().eq(oracle.nonzero_indices()) {
        return Err(format!("enumeration gave {listed:?}"));
    }
    Ok(())
}

impl Search<'_> {
    fn dfs(&mut self, d: &SegDict<BitStore>, oracle: &SeqOracle) {
        if self.path.len() == self.max_len {
            self.report.sequences += 1;
            return;
        }
        for i in 1..=d.cells() {
            for &x in self.alphabet {
                if self.report.failure.is_some() {
                    return;
                }
                let mut next = d.clone();
                let mut o = oracle.clone();
                self.path.push((i, x));
                let outcome = next.write(i, x).map_err(|e| e.to_string()).and_then(|case| {
                    *self.report.cases.entry(case).or_default() += 1;
                    o.write(i, x);
                    compare(&next, &o)
                });
                self.report.states += 1;
                match outcome {
                    Ok(()) => self.dfs(&next, &o),
                    Err(msg) => self.report.failure = Some((self.path.clone(), msg)),
                }
                self.path.pop();
            }
        }
    }
}

/// Runs every sequence of up to `max_len` writes `write(i, x)` with `i` in
/// `1..=cells` and `x` from `alphabet`, starting from memory filled per
/// `fill`, and checks the full state after every write.
pub fn exhaustive_segdict(
    cells: u64,
    half_bits: u32,
    mode: BarrierMode,
    fill: &FillPolicy,
    alphabet: &[HalfPair],
    max_len: usize,
    mutant: Option<Mutant>,
) -> Result<ExhaustiveReport> {
    #[cfg(not(feature = "fault-injection"))]
    if mutant.is_some() {
        return invalid("mutants need the fault-injection feature");
    }
    if alphabet.iter().any(|x| !x.fits(half_bits)) {
        return invalid(format!("alphabet value wider than {} bits", 2 * half_bits));
    }
    let d = SegDict::with_fill(cells, half_bits, mode, fill)?;
    #[cfg(feature = "fault-injection")]
    let d = d.with_mutant(mutant);
    let oracle = SeqOracle::new(cells);
    let mut search = Search {
        alphabet,
        max_len,
        path: Vec::with_capacity(max_len),
        report: ExhaustiveReport::default(),
    };
    search.report.states = 1;
    match compare(&d, &oracle) {
        Ok(()) => search.dfs(&d, &oracle),
        Err(msg) => search.report.failure = Some((Vec::new(), msg)),
    }
    Ok(search.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_search_is_clean_and_counts() {
        let alphabet = [HalfPair::ZERO, HalfPair::new(1, 0), HalfPair::new(2, 0)];
        let r = exhaustive_segdict(2, 4, BarrierMode::Hidden, &FillPolicy::Ones, &alphabet, 3, None).unwrap();
        assert!(r.failure.is_none(), "{:?}", r.failure);
        assert_eq!(r.sequences, 6u64.pow(3));
        assert_eq!(r.states, 1 + 6 + 36 + 216);
    }

    #[test]
    fn wide_alphabet_rejected() {
        let r = exhaustive_segdict(
            2,
            4,
            BarrierMode::Hidden,
            &FillPolicy::Ones,
            &[HalfPair::new(16, 0)],
            1,
            None,
        );
        assert!(r.is_err());
    }
}
