//! A sequence `a_1..a_N` of `2b`-bit values, initially all zero, stored in
//! `2bN + 1` bits (hidden barrier) or `2bN + W` bits (plain barrier) with
//! constant-time initialization, read, write and "find a nonzero entry".
//!
//! # Representation
//!
//! Cells `A[1..N]` of `2b` bits each, plus a barrier `k` that splits the
//! indices into a left part `1..=k` and a right part `k+1..=N`. The upper
//! halves of the cells encode a matching: `i` and `j` are mates iff each
//! one's mate field names the other and exactly one of them is `<= k`.
//!
//! An index is *strong* if it is matched and left of the barrier, or
//! unmatched and right of it; otherwise it is *weak*. The stored sequence is:
//!
//! * `a_i = 0` iff `i` is weak;
//! * strong `i > k`: `a_i = A[i]`;
//! * strong `i <= k`: `a_i = (lower(A[i]), lower(A[mate(i)]))`.
//!
//! `k` always equals the number of zero entries. Initialization only sets
//! `k = N`: every index is then left and unmatched, hence weak, whatever the
//! cells contain.
//!
//! # Hidden barrier
//!
//! In [`BarrierMode::Hidden`] the mate field is only the low `m = ceil(log2(N+1))`
//! bits of the upper half. While `k >= 1`, `k` itself lives in bits `m..2m`
//! of the upper half of `A[1]`, which is left of the barrier and therefore
//! never written as a whole cell. A single flag bit in front of the array
//! records whether `k > 0`.

use std::borrow::{Borrow, BorrowMut};
use std::fmt::Write as _;

use crate::bitstore::{BitStore, FillPolicy, WORD_BITS};
use crate::error::{invalid, Error, Result};
use crate::wordops::{mask, HalfPair};

/// Where the barrier `k` is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BarrierMode {
    /// `k` in a separate word in front of the cells.
    Plain,
    /// `k` inside `A[1]` plus one flag bit in front of the cells.
    Hidden,
}

/// `ceil(log2(x + 1))`, the bit length of `x`.
pub fn bit_len(x: u64) -> u32 {
    u64::BITS - x.leading_zeros()
}

/// Geometry of a segment dictionary inside a [`BitStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegLayout {
    offset: u64,
    cells: u64,
    half_bits: u32,
    mode: BarrierMode,
    mate_bits: u32,
}

impl SegLayout {
    pub fn new(offset: u64, cells: u64, half_bits: u32, mode: BarrierMode) -> Result<Self> {
        if cells == 0 {
            return invalid("segment dictionary needs at least one cell");
        }
        if half_bits == 0 || half_bits > 2 * WORD_BITS {
            return invalid(format!("half width {half_bits} outside 1..={}", 2 * WORD_BITS));
        }
        let m = bit_len(cells);
        let mate_bits = match mode {
            BarrierMode::Plain if half_bits < m => {
                return invalid(format!("b = {half_bits} cannot hold cell indices up to {cells}"));
            }
            BarrierMode::Hidden if half_bits < 2 * m => {
                return invalid(format!(
                    "hidden barrier needs b >= 2*{m}, got b = {half_bits} for {cells} cells"
                ));
            }
            BarrierMode::Plain => half_bits,
            BarrierMode::Hidden => m,
        };
        if cells
            .checked_mul(2 * half_bits as u64)
            .and_then(|a| a.checked_add(offset + 64))
            .is_none()
        {
            return invalid("segment dictionary does not fit in the address space");
        }
        Ok(Self {
            offset,
            cells,
            half_bits,
            mode,
            mate_bits,
        })
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn half_bits(&self) -> u32 {
        self.half_bits
    }

    pub fn mode(&self) -> BarrierMode {
        self.mode
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Width of the mate field at the bottom of each upper half.
    pub fn mate_bits(&self) -> u32 {
        self.mate_bits
    }

    /// Bits in front of the cells: the flag bit or the barrier word.
    pub fn barrier_bits(&self) -> u64 {
        match self.mode {
            BarrierMode::Plain => WORD_BITS as u64,
            BarrierMode::Hidden => 1,
        }
    }

    pub fn array_bits(&self) -> u64 {
        self.cells * 2 * self.half_bits as u64
    }

    /// Exact number of persistent bits.
    pub fn footprint_bits(&self) -> u64 {
        self.barrier_bits() + self.array_bits()
    }

    /// Stored-bit offset of cell `i` (1-based); its lower half starts here.
    #[inline]
    pub fn cell(&self, i: u64) -> u64 {
        self.offset + self.barrier_bits() + (i - 1) * 2 * self.half_bits as u64
    }

    /// Stored-bit offset of the upper half of cell `i`, where its mate field
    /// starts.
    #[inline]
    pub fn upper(&self, i: u64) -> u64 {
        self.cell(i) + self.half_bits as u64
    }

    /// Offset of the hidden barrier inside `A[1]`.
    #[inline]
    pub fn hidden_field(&self) -> u64 {
        self.upper(1) + self.mate_bits as u64
    }
}

/// Deliberately broken variants of the write path, one per step of the
/// procedure. Only installable with the `fault-injection` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutant {
    /// Whole-cell writes right of the barrier leave spurious matching edges.
    SkipSpuriousEdgeSever,
    /// Mate-field writes overwrite the entire upper half, including the
    /// hidden barrier in `A[1]`.
    ClobberHiddenField,
    /// Insertion does not restore the value of the index crossing the barrier.
    SkipCrossingRestore,
    /// Insertion does not rematch `mate(i)` with `mate(k)`.
    SkipInsertRematch,
    /// Insertion does not copy `lower(A[i])` into the new partner.
    SkipLowerCopy,
    /// Deletion does not rematch `mate(i)` with `mate(k+1)`.
    SkipDeleteRematch,
    /// Deletion does not restore the value of `mate(k+1)`.
    SkipDeleteRestore,
    /// `mate` ignores the barrier and accepts any reciprocal pair.
    MateIgnoresBarrier,
    /// `nonzero` returns `N` instead of `mate(N)`.
    NonzeroReturnsLast,
}

impl Mutant {
    pub const ALL: [Mutant; 9] = [
        Mutant::SkipSpuriousEdgeSever,
        Mutant::ClobberHiddenField,
        Mutant::SkipCrossingRestore,
        Mutant::SkipInsertRematch,
        Mutant::SkipLowerCopy,
        Mutant::SkipDeleteRematch,
        Mutant::SkipDeleteRestore,
        Mutant::MateIgnoresBarrier,
        Mutant::NonzeroReturnsLast,
    ];
}

/// Side of the barrier an index was on before a write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

/// Coincidences between `i`, `i' = mate(i)`, the crossing index `k~` and
/// `k' = mate(k~)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coincidence {
    /// `{i, i'}` and `{k~, k'}` are disjoint.
    None,
    /// `i = i' = k~ = k'`.
    AllEqual,
    /// `i = k' != k~ = i'`.
    Crossed,
}

/// What a call to [`SegDict::write`] turned out to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WriteCase {
    /// Zero written over zero.
    Unchanged,
    /// Nonzero written over nonzero.
    Update,
    Insertion(Side, Coincidence),
    Deletion(Side, Coincidence),
}

impl WriteCase {
    /// Every insertion and deletion case the write procedure can reach.
    pub const STRUCTURAL: [WriteCase; 8] = [
        WriteCase::Insertion(Side::Left, Coincidence::None),
        WriteCase::Insertion(Side::Left, Coincidence::AllEqual),
        WriteCase::Insertion(Side::Right, Coincidence::None),
        WriteCase::Insertion(Side::Right, Coincidence::Crossed),
        WriteCase::Deletion(Side::Left, Coincidence::None),
        WriteCase::Deletion(Side::Left, Coincidence::Crossed),
        WriteCase::Deletion(Side::Right, Coincidence::None),
        WriteCase::Deletion(Side::Right, Coincidence::AllEqual),
    ];
}

/// A segment dictionary viewed through some handle to its backing store.
#[derive(Debug, Clone)]
pub struct SegDict<S> {
    layout: SegLayout,
    store: S,
    #[cfg(feature = "fault-injection")]
    mutant: Option<Mutant>,
}

impl SegDict<BitStore> {
    /// Allocates exactly [`SegLayout::footprint_bits`] bits filled per `fill`
    /// and initializes a dictionary over them.
    pub fn with_fill(cells: u64, half_bits: u32, mode: BarrierMode, fill: &FillPolicy) -> Result<Self> {
        let layout = SegLayout::new(0, cells, half_bits, mode)?;
        let store = BitStore::new(layout.footprint_bits(), fill)?;
        Self::init(store, layout)
    }
}

impl<S: Borrow<BitStore>> SegDict<S> {
    /// Views an initialized dictionary without touching memory.
    pub fn attach(store: S, layout: SegLayout) -> Self {
        Self {
            layout,
            store,
            #[cfg(feature = "fault-injection")]
            mutant: None,
        }
    }

    #[cfg(feature = "fault-injection")]
    pub fn with_mutant(mut self, mutant: Option<Mutant>) -> Self {
        self.mutant = mutant;
        self
    }

    #[cfg(feature = "fault-injection")]
    #[inline]
    fn mutated(&self, m: Mutant) -> bool {
        self.mutant == Some(m)
    }

    #[cfg(not(feature = "fault-injection"))]
    #[inline(always)]
    fn mutated(&self, _m: Mutant) -> bool {
        false
    }

    pub fn layout(&self) -> SegLayout {
        self.layout
    }

    pub fn store(&self) -> &BitStore {
        self.store.borrow()
    }

    pub fn into_store(self) -> S {
        self.store
    }

    pub fn cells(&self) -> u64 {
        self.layout.cells
    }

    fn check_index(&self, i: u64) -> Result<()> {
        if i == 0 || i > self.layout.cells {
            return invalid(format!("cell index {i} outside 1..={}", self.layout.cells));
        }
        Ok(())
    }

    // ---- raw cell access ------------------------------------------------

    #[inline]
    fn mate_field(&self, i: u64) -> Result<u128> {
        self.store().read_bits(self.layout.upper(i), self.layout.mate_bits)
    }

    #[inline]
    fn lower(&self, i: u64) -> Result<u128> {
        self.store().read_bits(self.layout.cell(i), self.layout.half_bits)
    }

    #[inline]
    fn whole(&self, i: u64) -> Result<HalfPair> {
        let b = self.layout.half_bits;
        let cell = self.layout.cell(i);
        Ok(HalfPair::new(
            self.store().read_bits(cell, b)?,
            self.store().read_bits(cell + b as u64, b)?,
        ))
    }

    fn hidden_value(&self) -> Result<u64> {
        let m = self.layout.mate_bits;
        Ok(self.store().read_bits(self.layout.hidden_field(), m)? as u64)
    }

    fn flag(&self) -> Result<bool> {
        self.store().read_bit(self.layout.offset)
    }

    /// The barrier as currently stored.
    pub fn barrier(&self) -> Result<u64> {
        let k = match self.layout.mode {
            BarrierMode::Plain => self.store().read_bits(self.layout.offset, WORD_BITS)? as u64,
            BarrierMode::Hidden => {
                if self.flag()? {
                    self.hidden_value()?
                } else {
                    0
                }
            }
        };
        if k > self.layout.cells {
            return Err(Error::Corrupt(format!(
                "barrier {k} exceeds cell count {}",
                self.layout.cells
            )));
        }
        Ok(k)
    }

    // ---- operations with the barrier held in a register ----------------

    fn mate_at(&self, i: u64, k: u64) -> Result<u64> {
        let n = self.layout.cells;
        let field = self.mate_field(i)?;
        if field == 0 || field > n as u128 {
            return Ok(i);
        }
        let j = field as u64;
        let straddles = (i <= k && k < j) || (j <= k && k < i);
        if (straddles || self.mutated(Mutant::MateIgnoresBarrier)) && j != i && self.mate_field(j)? == i as u128 {
            return Ok(j);
        }
        Ok(i)
    }

    fn read_at(&self, i: u64, k: u64) -> Result<HalfPair> {
        let mi = self.mate_at(i, k)?;
        if mi <= k {
            Ok(HalfPair::ZERO)
        } else if i > k {
            self.whole(i)
        } else {
            Ok(HalfPair::new(self.lower(i)?, self.lower(mi)?))
        }
    }

    /// `i` if unmatched, its mate otherwise.
    pub fn mate(&self, i: u64) -> Result<u64> {
        self.check_index(i)?;
        let k = self.barrier()?;
        self.mate_at(i, k)
    }

    pub fn read(&self, i: u64) -> Result<HalfPair> {
        self.check_index(i)?;
        let k = self.barrier()?;
        self.read_at(i, k)
    }

    /// Some `i` with `a_i != 0`, or 0 if the sequence is all zero.
    pub fn nonzero(&self) -> Result<u64> {
        let k = self.barrier()?;
        let n = self.layout.cells;
        if k == n {
            return Ok(0);
        }
        if self.mutated(Mutant::NonzeroReturnsLast) {
            return Ok(n);
        }
        self.mate_at(n, k)
    }

    /// Step of an enumeration of `{i : a_i != 0}`. Start with cursor 0 and
    /// feed back the returned cursor; yields `mate(j)` for `j = k+1..=N`.
    pub fn enumerate_next(&self, cursor: u64) -> Result<Option<(u64, u64)>> {
        let k = self.barrier()?;
        let j = cursor.max(k) + 1;
        if j > self.layout.cells {
            return Ok(None);
        }
        Ok(Some((self.mate_at(j, k)?, j)))
    }

    /// All indices with a nonzero value, in enumeration order.
    pub fn nonzero_indices(&self) -> impl Iterator<Item = u64> + '_ {
        let mut cursor = 0;
        std::iter::from_fn(move || {
            let (i, next) = self.enumerate_next(cursor).ok().flatten()?;
            cursor = next;
            Some(i)
        })
    }

    /// The whole sequence. Linear time; for tests and diagnostics.
    pub fn values(&self) -> Result<Vec<HalfPair>> {
        let k = self.barrier()?;
        (1..=self.layout.cells).map(|i| self.read_at(i, k)).collect()
    }

    /// Verifies every representation invariant in linear time.
    pub fn check_invariants(&self) -> Result<()> {
        let corrupt = |msg: String| Err(Error::Corrupt(msg));
        let n = self.layout.cells;
        if self.layout.mode == BarrierMode::Hidden && self.flag()? {
            let hidden = self.hidden_value()?;
            if hidden == 0 || hidden > n {
                return corrupt(format!("flag set but hidden barrier is {hidden}"));
            }
        }
        let k = self.barrier()?;
        let mut zeros = 0;
        for i in 1..=n {
            let mi = self.mate_at(i, k)?;
            let matched = mi != i;
            if matched {
                if self.mate_at(mi, k)? != i {
                    return corrupt(format!("mate({i}) = {mi} but mate({mi}) != {i}"));
                }
                if (i <= k) == (mi <= k) {
                    return corrupt(format!("mates {i} and {mi} on the same side of k = {k}"));
                }
                if self.mate_field(i)? != mi as u128 || self.mate_field(mi)? != i as u128 {
                    return corrupt(format!("mates {i} and {mi} without reciprocal fields"));
                }
            }
            let strong = (matched && i <= k) || (!matched && i > k);
            let a = self.read_at(i, k)?;
            let expected = match (strong, i > k) {
                (false, _) => HalfPair::ZERO,
                (true, true) => self.whole(i)?,
                (true, false) => HalfPair::new(self.lower(i)?, self.lower(mi)?),
            };
            if a != expected {
                return corrupt(format!("read({i}) disagrees with the storage rule"));
            }
            if strong == a.is_zero() {
                return corrupt(format!(
                    "index {i} is {} but a_{i} {} zero",
                    if strong { "strong" } else { "weak" },
                    if a.is_zero() { "is" } else { "is not" }
                ));
            }
            zeros += a.is_zero() as u64;
        }
        if zeros != k {
            return corrupt(format!("k = {k} but {zeros} entries are zero"));
        }
        let nz = self.nonzero()?;
        if (k == n) != (nz == 0) {
            return corrupt(format!("nonzero() = {nz} with k = {k}, N = {n}"));
        }
        if nz != 0 && self.read_at(nz, k)?.is_zero() {
            return corrupt(format!("nonzero() = {nz} points at a zero entry"));
        }
        Ok(())
    }

    /// Text dump, one line per cell plus a barrier line.
    pub fn dump(&self) -> Result<String> {
        let k = self.barrier()?;
        let b = self.layout.half_bits;
        let mut out = String::new();
        let hidden_on = self.layout.mode == BarrierMode::Hidden && self.flag()?;
        for i in 1..=self.layout.cells {
            let mi = self.mate_at(i, k)?;
            let strong = (mi != i && i <= k) || (mi == i && i > k);
            let hidden = if hidden_on && i == 1 {
                self.hidden_value()?.to_string()
            } else {
                "-".to_string()
            };
            let _ = writeln!(
                out,
                "{i}: lower={} upper(mate={}, hidden={hidden}) [{}] [{}]",
                HalfPair::new(self.lower(i)?, 0).to_hex(b),
                self.mate_field(i)?,
                if strong { "strong" } else { "weak" },
                if i <= k { "left" } else { "right" },
            );
        }
        let flag = match self.layout.mode {
            BarrierMode::Plain => "-".to_string(),
            BarrierMode::Hidden => (self.flag()? as u8).to_string(),
        };
        let _ = writeln!(out, "k={k} flag={flag}");
        Ok(out)
    }
}

impl<S: BorrowMut<BitStore>> SegDict<S> {
    /// Places the barrier at `N`, which makes every entry zero. Touches a
    /// constant number of words whatever `N` is and whatever memory holds.
    pub fn init(store: S, layout: SegLayout) -> Result<Self> {
        let mut d = Self::attach(store, layout);
        d.store_barrier(layout.cells)?;
        Ok(d)
    }

    fn store_mut(&mut self) -> &mut BitStore {
        self.store.borrow_mut()
    }

    fn store_barrier(&mut self, k: u64) -> Result<()> {
        let l = self.layout;
        match l.mode {
            BarrierMode::Plain => self.store_mut().write_bits(l.offset, WORD_BITS, k as u128),
            BarrierMode::Hidden => {
                if k >= 1 {
                    self.store_mut().write_bits(l.hidden_field(), l.mate_bits, k as u128)?;
                }
                self.store_mut().write_bit(l.offset, k >= 1)
            }
        }
    }

    #[inline]
    fn set_mate(&mut self, i: u64, j: u64) -> Result<()> {
        let l = self.layout;
        let width = if self.mutated(Mutant::ClobberHiddenField) {
            l.half_bits
        } else {
            l.mate_bits
        };
        self.store_mut().write_bits(l.upper(i), width, j as u128 & mask(width))
    }

    #[inline]
    fn set_lower(&mut self, i: u64, v: u128) -> Result<()> {
        let l = self.layout;
        self.store_mut().write_bits(l.cell(i), l.half_bits, v)
    }

    fn set_whole(&mut self, i: u64, x: HalfPair) -> Result<()> {
        let l = self.layout;
        let cell = l.cell(i);
        self.store_mut().write_bits(cell, l.half_bits, x.lower)?;
        self.store_mut()
            .write_bits(cell + l.half_bits as u64, l.half_bits, x.upper)
    }

    fn simple_write_at(&mut self, i: u64, x: HalfPair, k: u64) -> Result<()> {
        if i <= k {
            let mi = self.mate_at(i, k)?;
            self.set_lower(i, x.lower)?;
            self.set_lower(mi, x.upper)
        } else {
            self.set_whole(i, x)?;
            // The new upper half may have formed a spurious matching edge.
            let ip = self.mate_at(i, k)?;
            if ip != i && !self.mutated(Mutant::SkipSpuriousEdgeSever) {
                self.set_mate(ip, ip)?;
            }
            Ok(())
        }
    }

    fn check_value(&self, x: &HalfPair) -> Result<()> {
        if !x.fits(self.layout.half_bits) {
            return invalid(format!("value does not fit in {} bits", 2 * self.layout.half_bits));
        }
        Ok(())
    }

    /// Sets `a_i = x` for an `i` that is strong. Writing zero this way, or
    /// writing to a weak index, breaks the representation.
    pub fn simple_write(&mut self, i: u64, x: HalfPair) -> Result<()> {
        self.check_index(i)?;
        self.check_value(&x)?;
        let k = self.barrier()?;
        self.simple_write_at(i, x, k)
    }

    /// Sets `a_i = x` and reports which case of the procedure ran.
    pub fn write(&mut self, i: u64, x: HalfPair) -> Result<WriteCase> {
        self.check_index(i)?;
        self.check_value(&x)?;
        let k0 = self.barrier()?;
        let mut k = k0;
        let x0 = self.read_at(i, k)?;
        let ip = self.mate_at(i, k)?;
        let side = if i <= k0 { Side::Left } else { Side::Right };
        let case;

        if !x.is_zero() {
            if x0.is_zero() {
                // Insertion: index k crosses to the right.
                if k == 0 {
                    return Err(Error::Corrupt(format!("cell {i} reads zero while the barrier is 0")));
                }
                let crossing = k;
                let kp = self.mate_at(crossing, k)?;
                let u = self.read_at(crossing, k)?;
                k -= 1;
                if !self.mutated(Mutant::SkipCrossingRestore) {
                    self.simple_write_at(k + 1, u, k)?;
                }
                if i != kp {
                    if !self.mutated(Mutant::SkipInsertRematch) {
                        self.set_mate(ip, kp)?;
                        self.set_mate(kp, ip)?;
                    }
                    if !self.mutated(Mutant::SkipLowerCopy) {
                        let lo = self.lower(i)?;
                        self.set_lower(kp, lo)?;
                    }
                }
                case = WriteCase::Insertion(side, coincidence(i, ip, crossing, kp));
            } else {
                case = WriteCase::Update;
            }
            self.simple_write_at(i, x, k)?;
        } else if !x0.is_zero() {
            // Deletion: index k+1 crosses to the left.
            if k == self.layout.cells {
                return Err(Error::Corrupt(format!("cell {i} reads nonzero while the barrier is N")));
            }
            let crossing = k + 1;
            let kp = self.mate_at(crossing, k)?;
            let v = self.read_at(kp, k)?;
            k += 1;
            if !self.mutated(Mutant::SkipDeleteRematch) {
                self.set_mate(ip, kp)?;
                self.set_mate(kp, ip)?;
            }
            if kp != i && !self.mutated(Mutant::SkipDeleteRestore) {
                self.simple_write_at(kp, v, k)?;
            }
            case = WriteCase::Deletion(side, coincidence(i, ip, crossing, kp));
        } else {
            case = WriteCase::Unchanged;
        }

        if k != k0 {
            self.store_barrier(k)?;
        }
        Ok(case)
    }
}

fn coincidence(i: u64, ip: u64, crossing: u64, kp: u64) -> Coincidence {
    if i == crossing {
        Coincidence::AllEqual
    } else if i == kp {
        Coincidence::Crossed
    } else {
        debug_assert!(ip != crossing && ip != kp);
        Coincidence::None
    }
}
