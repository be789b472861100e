//! Adversarial workloads for measuring word accesses per operation.
//!
//! Random updates rarely reach the most expensive write paths, so the
//! workload keeps returning to a few segments, toggles segments at the
//! barrier, and plants mate-field bits that recreate stale pairs.
//! [`worst_insertion`] builds the single most expensive insertion directly.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitstore::{BitStore, FillPolicy};
use crate::choicedict::{ChoiceDict, Config, Layout};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Init,
    Insert,
    Delete,
    Contains,
    Choice,
    IterNext,
}

impl OpKind {
    pub const ALL: [OpKind; 6] = [
        OpKind::Init,
        OpKind::Insert,
        OpKind::Delete,
        OpKind::Contains,
        OpKind::Choice,
        OpKind::IterNext,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OpKind::Init => "init",
            OpKind::Insert => "insert",
            OpKind::Delete => "delete",
            OpKind::Contains => "contains",
            OpKind::Choice => "choice",
            OpKind::IterNext => "iter_next",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accesses and time spent in one kind of operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpStats {
    pub count: u64,
    pub total_accesses: u64,
    pub max_accesses: u64,
    pub nanos: u128,
}

impl OpStats {
    fn record(&mut self, accesses: u64, nanos: u128) {
        self.count += 1;
        self.total_accesses += accesses;
        self.max_accesses = self.max_accesses.max(accesses);
        self.nanos += nanos;
    }

    fn merge(&mut self, other: &OpStats) {
        self.count += other.count;
        self.total_accesses += other.total_accesses;
        self.max_accesses = self.max_accesses.max(other.max_accesses);
        self.nanos += other.nanos;
    }

    pub fn mean_accesses(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_accesses as f64 / self.count as f64
        }
    }

    pub fn mean_nanos(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.nanos as f64 / self.count as f64
        }
    }
}

/// Per-kind statistics of a workload.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AccessReport {
    pub ops: BTreeMap<OpKind, OpStats>,
}

impl AccessReport {
    fn record(&mut self, kind: OpKind, accesses: u64, nanos: u128) {
        self.ops.entry(kind).or_default().record(accesses, nanos);
    }

    pub fn merge(&mut self, other: &AccessReport) {
        for (kind, s) in &other.ops {
            self.ops.entry(*kind).or_default().merge(s);
        }
    }

    /// Maximum accesses per kind.
    pub fn ceilings(&self) -> BTreeMap<OpKind, u64> {
        self.ops.iter().map(|(k, s)| (*k, s.max_accesses)).collect()
    }
}

/// Element `t` (0-based bit) of segment `i`.
fn element(layout: &Layout, i: u64, t: u64) -> u64 {
    (i - 1) * 2 * layout.half_bits as u64 + t + 1
}

fn lowest_in_segment(d: &ChoiceDict, i: u64) -> Option<u64> {
    let seg = d.segments()?;
    let a = seg.read(i).ok()?;
    a.lsb(d.half_bits()).map(|t| element(d.layout(), i, t as u64))
}

/// Toggles the emptiness of a segment at or next to the barrier, or one
/// matched to such a segment. Returns the element and whether to insert it.
fn thrash_target(d: &ChoiceDict, rng: &mut ChaCha8Rng) -> Option<(u64, bool)> {
    let seg = d.segments()?;
    let cells = seg.cells();
    let k = seg.barrier().ok()?;
    let candidates = [
        k.max(1),
        (k + 1).min(cells),
        seg.mate(k.max(1)).ok()?,
        seg.mate((k + 1).min(cells)).ok()?,
        cells,
        seg.nonzero().ok()?.max(1),
        rng.gen_range(1..=cells),
    ];
    let i = candidates[rng.gen_range(0..candidates.len())];
    match lowest_in_segment(d, i) {
        Some(l) => Some((l, false)),
        None => {
            let t = rng.gen_range(0..2 * d.half_bits() as u64);
            Some((element(d.layout(), i, t), true))
        }
    }
}

/// Finds a strong segment right of the barrier and a left segment whose
/// stale mate field names it; returns the insertions that make the right
/// segment's mate field name the left one.
fn spurious_edge_plan(d: &ChoiceDict, rng: &mut ChaCha8Rng) -> Option<Vec<u64>> {
    let seg = d.segments()?;
    let layout = seg.layout();
    let k = seg.barrier().ok()?;
    let cells = seg.cells();
    if k == 0 || k == cells {
        return None;
    }
    let m = layout.mate_bits();
    for _ in 0..32 {
        let i = rng.gen_range(k + 1..=cells);
        if seg.mate(i).ok()? != i {
            continue;
        }
        for _ in 0..32 {
            let j = rng.gen_range(1..=k);
            if d.store().read_bits(layout.upper(j), m).ok()? as u64 != i {
                continue;
            }
            let b = d.half_bits() as u64;
            return Some(
                (0..m as u64)
                    .filter(|t| (j >> t) & 1 == 1)
                    .map(|t| element(d.layout(), i, b + t))
                    .collect(),
            );
        }
    }
    None
}

/// Up to six segments the workload keeps returning to, always including the
/// last one, which `nonzero` consults.
fn segment_pool(d: &ChoiceDict, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let cells = d.layout().cells;
    let mut pool = vec![cells];
    while pool.len() < 6.min(cells as usize) {
        let i = rng.gen_range(1..=cells);
        if !pool.contains(&i) {
            pool.push(i);
        }
    }
    pool
}

/// A low bit, a mate-field bit or any bit of segment `i`.
fn pool_element(d: &ChoiceDict, i: u64, rng: &mut ChaCha8Rng) -> u64 {
    let b = d.half_bits() as u64;
    let m = d.layout().seg.map_or(1, |s| s.mate_bits()) as u64;
    let t = match rng.gen_range(0..3) {
        0 => rng.gen_range(0..4.min(2 * b)),
        1 => b + rng.gen_range(0..m),
        _ => rng.gen_range(0..2 * b),
    };
    element(d.layout(), i, t)
}

/// Runs `ops` adversarial steps on a fresh dictionary and records accesses
/// and wall time per public operation. Iteration steps are recorded one
/// `iter_next` at a time. The init time includes allocating and filling the
/// simulated memory, which is linear in `n`; its access count is not.
pub fn adversarial_run(n: u64, config: &Config, seed: u64, ops: usize) -> Result<AccessReport> {
    let mut report = AccessReport::default();
    let start = Instant::now();
    let mut d = ChoiceDict::new(n, config)?;
    report.record(OpKind::Init, d.store().accesses(), start.elapsed().as_nanos());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = if d.layout().cells > 0 {
        segment_pool(&d, &mut rng)
    } else {
        Vec::new()
    };
    let pick = |d: &ChoiceDict, rng: &mut ChaCha8Rng| {
        if pool.is_empty() || rng.gen_bool(0.1) {
            rng.gen_range(1..=n)
        } else {
            let i = pool[rng.gen_range(0..pool.len())];
            pool_element(d, i, rng)
        }
    };
    let timed = |d: &mut ChoiceDict, kind: OpKind, l: u64, report: &mut AccessReport| -> Result<()> {
        d.store().reset_accesses();
        let t = Instant::now();
        match kind {
            OpKind::Insert => d.insert(l)?,
            OpKind::Delete => d.delete(l)?,
            OpKind::Contains => {
                d.contains(l)?;
            }
            OpKind::Choice => {
                d.choice()?;
            }
            _ => unreachable!("not a single-element op"),
        }
        report.record(kind, d.store().accesses(), t.elapsed().as_nanos());
        Ok(())
    };

    for _ in 0..ops {
        let r: f64 = rng.gen();
        if r < 0.35 {
            match thrash_target(&d, &mut rng) {
                Some((l, true)) => timed(&mut d, OpKind::Insert, l, &mut report)?,
                Some((l, false)) => timed(&mut d, OpKind::Delete, l, &mut report)?,
                None => {
                    let l = pick(&d, &mut rng);
                    timed(&mut d, OpKind::Insert, l, &mut report)?;
                }
            }
        } else if r < 0.45 {
            for l in spurious_edge_plan(&d, &mut rng).unwrap_or_default() {
                timed(&mut d, OpKind::Insert, l, &mut report)?;
            }
        } else if r < 0.65 {
            let l = pick(&d, &mut rng);
            timed(&mut d, OpKind::Insert, l, &mut report)?;
        } else if r < 0.82 {
            let l = pick(&d, &mut rng);
            timed(&mut d, OpKind::Delete, l, &mut report)?;
        } else if r < 0.90 {
            let l = pick(&d, &mut rng);
            timed(&mut d, OpKind::Contains, l, &mut report)?;
        } else if r < 0.97 {
            timed(&mut d, OpKind::Choice, 0, &mut report)?;
        } else {
            let mut st = d.iter_reset();
            for _ in 0..64 {
                d.store().reset_accesses();
                let t = Instant::now();
                let next = d.iter_next(&mut st)?;
                report.record(OpKind::IterNext, d.store().accesses(), t.elapsed().as_nanos());
                if next.is_none() {
                    break;
                }
            }
        }
    }
    Ok(report)
}

/// Accesses of the most expensive insertion, built deterministically.
///
/// The path needs the crossing index `k` matched to `N - 1`, the target `N`
/// matched to a left index, and two left cells with stale mate fields: one
/// naming `k` (severed when `k` is rewritten as a whole cell) and one
/// naming `N` (severed by the final whole-cell write). Returns `None` with
/// fewer than six segments, where the path cannot exist.
pub fn worst_insertion(n: u64, config: &Config) -> Result<Option<u64>> {
    let layout = Layout::for_config(n, config)?;
    let Some(seg) = layout.seg else { return Ok(None) };
    let cells = seg.cells();
    if cells < 6 {
        return Ok(None);
    }
    let m = seg.mate_bits();
    let mut image = BitStore::new(layout.total_bits(), &FillPolicy::Zeros)?;
    image.write_bits(seg.upper(1), m, cells as u128)?;
    image.write_bits(seg.upper(2), m, (cells - 2) as u128)?;
    let config = config.clone().with_fill(FillPolicy::Crafted(image.words().to_vec()));
    let mut d = ChoiceDict::new(n, &config)?;
    let b = layout.half_bits as u64;
    // 3 <-> N, then N-2 <-> N-1 with the lower half of A[N-2] empty and bit
    // 1 of its mate field set, so that its field names 2.
    d.insert(element(&layout, 3, 0))?;
    d.insert(element(&layout, cells - 2, b + 1))?;
    let s = d.segments().expect("segments exist");
    if s.barrier()? != cells - 2 || s.mate(cells)? != 3 || s.mate(cells - 2)? != cells - 1 {
        return Err(Error::Corrupt(
            "worst-case setup did not produce the expected matching".into(),
        ));
    }
    d.store().reset_accesses();
    d.insert(element(&layout, cells, b))?;
    let cost = d.store().accesses();
    d.check_invariants()?;
    Ok(Some(cost))
}

/// Worst accesses per kind over a few fills and seeds, raised by
/// [`worst_insertion`] where it exists.
pub fn ceilings(n: u64, config: &Config, ops: usize) -> Result<BTreeMap<OpKind, u64>> {
    let mut all = AccessReport::default();
    let fills = [FillPolicy::Zeros, FillPolicy::Ones, FillPolicy::Random(n)];
    for (seed, fill) in fills.into_iter().enumerate() {
        all.merge(&adversarial_run(n, &config.clone().with_fill(fill), seed as u64, ops)?);
    }
    let mut c = all.ceilings();
    if let Some(v) = worst_insertion(n, config)? {
        let e = c.entry(OpKind::Insert).or_default();
        *e = (*e).max(v);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choicedict::BPolicy;

    #[test]
    fn worst_insertion_is_the_insert_ceiling() {
        let config = Config::default();
        let worst = worst_insertion(1 << 12, &config).unwrap().unwrap();
        let c = ceilings(1 << 12, &config, 3_000).unwrap();
        assert_eq!(c[&OpKind::Insert], worst);
        assert!(worst_insertion(1 << 8, &config).unwrap().is_none());
    }

    #[test]
    fn report_counts_every_kind() {
        let config = Config::default().with_b_policy(BPolicy::HalfWord);
        let r = adversarial_run(5_000, &config, 1, 2_000).unwrap();
        for kind in OpKind::ALL {
            assert!(r.ops.get(&kind).is_some_and(|s| s.count > 0), "{kind} missing");
        }
        assert_eq!(r.ops[&OpKind::Init].count, 1);
    }
}
