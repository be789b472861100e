use std::collections::BTreeMap;
use std::fmt;

use super::trace::{Op, OpTrace, Universe};
use super::{NaiveSet, SeqOracle};
use crate::bitstore::{BitStore, FillPolicy};
use crate::choicedict::{ChoiceDict, Config};
use crate::error::{invalid, Result};
use crate::segdict::{BarrierMode, Mutant, SegDict, WriteCase};

/// Traces longer than this are reported with their failing prefix only.
const SHRINK_LIMIT: usize = 512;

/// The implementation a trace is replayed against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    /// A choice dictionary; needs a [`Universe::Set`] trace.
    Choice(Config),
    /// A bare segment dictionary; needs a [`Universe::Cells`] trace.
    Seg { mode: BarrierMode, fill: FillPolicy },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Run the linear-time representation checks after every op.
    pub check_invariants: bool,
    /// Compare the whole state after every op.
    pub sweep_reads: bool,
    /// Reduce a failing trace to a locally minimal one.
    pub shrink: bool,
    /// Broken write path to install; requires the `fault-injection` feature.
    pub mutant: Option<Mutant>,
}

impl RunOptions {
    /// Invariant checks and shrinking on, sweeps off.
    pub fn thorough() -> Self {
        Self {
            check_invariants: true,
            sweep_reads: false,
            shrink: true,
            mutant: None,
        }
    }

    pub fn with_mutant(mut self, mutant: Option<Mutant>) -> Self {
        self.mutant = mutant;
        self
    }
}

/// First disagreement between subject and oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// Zero-based index of the failing op in the replayed trace.
    pub index: usize,
    pub op: Op,
    pub detail: String,
    /// Shortest failing trace found; its last op fails.
    pub minimal: OpTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub ops_run: usize,
    pub divergence: Option<Divergence>,
    /// How often each case of the segment write procedure ran.
    pub cases: BTreeMap<WriteCase, u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }

    /// One line of `key=value` pairs.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "status={} ops={}",
            if self.passed() { "ok" } else { "diverged" },
            self.ops_run
        );
        if let Some(d) = &self.divergence {
            s.push_str(&format!(" index={} minimal_len={}", d.index, d.minimal.ops.len()));
        }
        for (case, count) in &self.cases {
            s.push_str(&format!(" {}={count}", case_key(case)));
        }
        s
    }
}

fn case_key(case: &WriteCase) -> String {
    match case {
        WriteCase::Unchanged => "unchanged".into(),
        WriteCase::Update => "update".into(),
        WriteCase::Insertion(s, c) => format!("insert.{s:?}.{c:?}").to_lowercase(),
        WriteCase::Deletion(s, c) => format!("delete.{s:?}.{c:?}").to_lowercase(),
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => writeln!(f, "ok: {} ops agree with the oracle", self.ops_run)?,
            Some(d) => {
                let b = match d.minimal.universe {
                    Universe::Cells { half_bits, .. } => half_bits,
                    Universe::Set(_) => 128,
                };
                writeln!(f, "divergence at op {} ({}): {}", d.index, d.op.render(b), d.detail)?;
                writeln!(f, "minimal failing trace ({} ops):", d.minimal.ops.len())?;
                write!(f, "{}", d.minimal)?;
            }
        }
        Ok(())
    }
}

enum Machine {
    Set { dict: ChoiceDict, oracle: NaiveSet },
    Seg { dict: SegDict<BitStore>, oracle: SeqOracle },
}

fn build(universe: Universe, subject: &Subject, mutant: Option<Mutant>) -> Result<Machine> {
    #[cfg(not(feature = "fault-injection"))]
    if mutant.is_some() {
        return invalid("mutants need the fault-injection feature");
    }
    match (universe, subject) {
        (Universe::Set(n), Subject::Choice(config)) => {
            let dict = ChoiceDict::new(n, config)?;
            #[cfg(feature = "fault-injection")]
            let dict = dict.with_mutant(mutant);
            Ok(Machine::Set {
                dict,
                oracle: NaiveSet::new(n),
            })
        }
        (Universe::Cells { cells, half_bits }, Subject::Seg { mode, fill }) => {
            let dict = SegDict::with_fill(cells, half_bits, *mode, fill)?;
            #[cfg(feature = "fault-injection")]
            let dict = dict.with_mutant(mutant);
            Ok(Machine::Seg {
                dict,
                oracle: SeqOracle::new(cells),
            })
        }
        (u, s) => invalid(format!("universe {u} does not fit subject {s:?}")),
    }
}

fn check_op(universe: Universe, op: &Op) -> Result<()> {
    match (universe, op) {
        (Universe::Set(n), Op::Insert(l) | Op::Delete(l) | Op::Contains(l)) if !(1..=n).contains(l) => {
            invalid(format!("element {l} outside 1..={n}"))
        }
        (Universe::Set(_), Op::Insert(_) | Op::Delete(_) | Op::Contains(_) | Op::Choice | Op::IterateAll) => Ok(()),
        (Universe::Cells { cells, half_bits }, Op::Write(i, x)) => {
            if !(1..=cells).contains(i) {
                invalid(format!("cell {i} outside 1..={cells}"))
            } else if !x.fits(half_bits) {
                invalid(format!("value wider than {} bits", 2 * half_bits))
            } else {
                Ok(())
            }
        }
        (Universe::Cells { cells, .. }, Op::Read(i)) if !(1..=cells).contains(i) => {
            invalid(format!("cell {i} outside 1..={cells}"))
        }
        (Universe::Cells { .. }, Op::Read(_) | Op::Nonzero | Op::IterateAll) => Ok(()),
        (u, op) => invalid(format!("{op:?} is not an operation on universe {u}")),
    }
}

/// Outcome of one step: `Err` is a divergence description.
type Step = std::result::Result<(), String>;

fn sorted(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v
}

impl Machine {
    fn step(&mut self, op: &Op, opts: &RunOptions, cases: &mut BTreeMap<WriteCase, u64>) -> Step {
        let e = |err: crate::Error| format!("subject failed: {err}");
        match self {
            Machine::Set { dict, oracle } => {
                match *op {
                    Op::Insert(l) => {
                        dict.insert(l).map_err(e)?;
                        oracle.insert(l);
                    }
                    Op::Delete(l) => {
                        dict.delete(l).map_err(e)?;
                        oracle.delete(l);
                    }
                    Op::Contains(l) => {
                        let got = dict.contains(l).map_err(e)?;
                        if got != oracle.contains(l) {
                            return Err(format!("contains({l}) = {got}, expected {}", !got));
                        }
                    }
                    Op::Choice => {
                        let c = dict.choice().map_err(e)?;
                        if oracle.is_empty() && c != 0 {
                            return Err(format!("choice() = {c} on an empty set"));
                        }
                        if !oracle.is_empty() && !oracle.contains(c) {
                            return Err(format!("choice() = {c} is not a member"));
                        }
                    }
                    Op::IterateAll => {
                        let mut st = dict.iter_reset();
                        let mut got = Vec::new();
                        // One more step than members bounds a runaway iterator.
                        while got.len() <= oracle.len() {
                            match dict.iter_next(&mut st).map_err(e)? {
                                Some(l) => got.push(l),
                                None => break,
                            }
                        }
                        let expected: Vec<u64> = oracle.iter().collect();
                        let got = sorted(got);
                        if got != expected {
                            return Err(format!(
                                "iteration returned {} elements {}, expected {}",
                                got.len(),
                                preview(&got),
                                preview(&expected)
                            ));
                        }
                    }
                    _ => unreachable!("checked before replay"),
                }
                if opts.check_invariants {
                    dict.check_invariants().map_err(|err| err.to_string())?;
                }
                if opts.sweep_reads {
                    for l in 1..=oracle.universe() {
                        if dict.contains(l).map_err(e)? != oracle.contains(l) {
                            return Err(format!("sweep: membership of {l} is wrong"));
                        }
                    }
                }
            }
            Machine::Seg { dict, oracle } => {
                match *op {
                    Op::Write(i, x) => {
                        let case = dict.write(i, x).map_err(e)?;
                        *cases.entry(case).or_default() += 1;
                        oracle.write(i, x);
                    }
                    Op::Read(i) => {
                        let got = dict.read(i).map_err(e)?;
                        let want = oracle.read(i);
                        if got != want {
                            return Err(format!("read({i}) = {got:?}, expected {want:?}"));
                        }
                    }
                    Op::Nonzero => {
                        let z = dict.nonzero().map_err(e)?;
                        let all_zero = oracle.zeros() == oracle.values().len();
                        if all_zero && z != 0 {
                            return Err(format!("nonzero() = {z} on an all-zero sequence"));
                        }
                        if !all_zero && (z == 0 || z > dict.cells() || oracle.read(z).is_zero()) {
                            return Err(format!("nonzero() = {z} does not name a nonzero entry"));
                        }
                    }
                    Op::IterateAll => {
                        let bound = oracle.values().len() + 1;
                        let got = sorted(dict.nonzero_indices().take(bound).collect());
                        let expected: Vec<u64> = oracle.nonzero_indices().collect();
                        if got != expected {
                            return Err(format!(
                                "enumeration returned {}, expected {}",
                                preview(&got),
                                preview(&expected)
                            ));
                        }
                    }
                    _ => unreachable!("checked before replay"),
                }
                if opts.check_invariants {
                    dict.check_invariants().map_err(|err| err.to_string())?;
                }
                if opts.sweep_reads {
                    let got = dict.values().map_err(e)?;
                    if got != oracle.values() {
                        let i = got.iter().zip(oracle.values()).position(|(a, b)| a != b).unwrap_or(0);
                        return Err(format!(
                            "sweep: a_{} = {:?}, expected {:?}",
                            i + 1,
                            got[i],
                            oracle.values()[i]
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn preview(v: &[u64]) -> String {
    if v.len() <= 8 {
        format!("{v:?}")
    } else {
        format!("{:?}..(+{})", &v[..8], v.len() - 8)
    }
}

/// Replays `ops` and returns the first failing index and its description.
fn replay(
    universe: Universe,
    ops: &[Op],
    subject: &Subject,
    opts: &RunOptions,
    cases: &mut BTreeMap<WriteCase, u64>,
) -> Result<Option<(usize, String)>> {
    let mut m = build(universe, subject, opts.mutant)?;
    for (idx, op) in ops.iter().enumerate() {
        if let Err(detail) = m.step(op, opts, cases) {
            return Ok(Some((idx, detail)));
        }
    }
    Ok(None)
}

/// Greedy one-at-a-time removal, latest ops first, keeping the last op.
fn shrink(universe: Universe, mut ops: Vec<Op>, subject: &Subject, opts: &RunOptions) -> Result<Vec<Op>> {
    let mut scratch = BTreeMap::new();
    let mut idx = ops.len().saturating_sub(1);
    while idx > 0 {
        idx -= 1;
        let mut candidate = ops.clone();
        candidate.remove(idx);
        if let Some((fail, _)) = replay(universe, &candidate, subject, opts, &mut scratch)? {
            candidate.truncate(fail + 1);
            ops = candidate;
            idx = idx.min(ops.len().saturating_sub(1));
        }
    }
    Ok(ops)
}

/// Replays `trace` against `subject` and a reference model in lockstep.
///
/// Returns `Err` only if the trace or subject is unusable (ops outside the
/// universe, a subject that cannot be built). Any disagreement, including an
/// error raised by the subject mid-run, is reported as a [`Divergence`].
pub fn differential_run(trace: &OpTrace, subject: &Subject, opts: &RunOptions) -> Result<Report> {
    for op in &trace.ops {
        check_op(trace.universe, op)?;
    }
    let mut report = Report::default();
    match replay(trace.universe, &trace.ops, subject, opts, &mut report.cases)? {
        None => report.ops_run = trace.ops.len(),
        Some((index, detail)) => {
            report.ops_run = index + 1;
            let prefix = trace.ops[..=index].to_vec();
            let minimal = if opts.shrink && prefix.len() <= SHRINK_LIMIT {
                shrink(trace.universe, prefix, subject, opts)?
            } else {
                prefix
            };
            report.divergence = Some(Divergence {
                index,
                op: trace.ops[index],
                detail,
                minimal: OpTrace {
                    universe: trace.universe,
                    seed: trace.seed,
                    ops: minimal,
                },
            });
        }
    }
    Ok(report)
}
