//! The choice dictionary over `{1..n}`.
//!
//! The bit vector of the client set is cut into `N = n / 2b` segments of `2b`
//! bits, each kept as one entry of a [`SegDict`], and a tail of
//! `n' = n mod 2b` bits kept in a [`WordDict`]. Element `l <= 2bN` is bit
//! `(l-1) mod 2b` of entry `ceil(l / 2b)`; larger elements live in the tail.
//!
//! Persistent layout, in stored-bit order:
//!
//! ```text
//! [size header][flag bit | barrier word][A[1] .. A[N]][tail]
//! ```
//!
//! With a hidden barrier and no header the total is `2bN + 1 + n' = n + 1`.

use std::fmt;

use crate::bitstore::{BitStore, FillPolicy, WORD_BITS};
use crate::error::{invalid, Error, Result};
use crate::gamma::{gamma_decode, gamma_encode, gamma_read, Endianness, MAX_CODE_BITS};
#[cfg(feature = "fault-injection")]
use crate::segdict::Mutant;
use crate::segdict::{bit_len, BarrierMode, SegDict, SegLayout};
use crate::worddict::{WordDict, WordLayout};

/// How the half width `b` is derived from the word width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BPolicy {
    /// `b = 2W`, the smallest footprint.
    #[default]
    TwoWords,
    /// `b = W`.
    Word,
    /// `b = W/2`, one cell per word.
    HalfWord,
    /// A fixed `b`, mostly for tests that want many small segments.
    Fixed(u32),
}

impl BPolicy {
    pub fn half_bits(&self) -> u32 {
        match *self {
            BPolicy::TwoWords => 2 * WORD_BITS,
            BPolicy::Word => WORD_BITS,
            BPolicy::HalfWord => WORD_BITS / 2,
            BPolicy::Fixed(b) => b,
        }
    }
}

/// Whether the universe size is stored with the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sizing {
    /// `n` is supplied by the owner.
    #[default]
    External,
    /// `n` is kept in front of the body as a self-delimiting code.
    SelfContained(Endianness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub b_policy: BPolicy,
    pub barrier: BarrierMode,
    pub sizing: Sizing,
    /// What the memory holds before initialization.
    pub fill: FillPolicy,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            b_policy: BPolicy::TwoWords,
            barrier: BarrierMode::Hidden,
            sizing: Sizing::External,
            fill: FillPolicy::Zeros,
        }
    }
}

impl Config {
    pub fn with_fill(mut self, fill: FillPolicy) -> Self {
        self.fill = fill;
        self
    }

    pub fn with_b_policy(mut self, b_policy: BPolicy) -> Self {
        self.b_policy = b_policy;
        self
    }

    pub fn with_barrier(mut self, barrier: BarrierMode) -> Self {
        self.barrier = barrier;
        self
    }

    pub fn with_sizing(mut self, sizing: Sizing) -> Self {
        self.sizing = sizing;
        self
    }
}

/// Bit spans of a dictionary for a given `n` and configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: u64,
    pub half_bits: u32,
    pub mode: BarrierMode,
    pub sizing: Sizing,
    pub header_bits: u64,
    /// Flag bit (hidden) or barrier word (plain). Reserved even when there
    /// are no segments so that the footprint formula is uniform.
    pub barrier_bits: u64,
    pub cells: u64,
    pub tail_bits: u64,
    pub seg: Option<SegLayout>,
    pub tail: Option<WordLayout>,
}

impl Layout {
    pub fn new(n: u64, b_policy: BPolicy, mode: BarrierMode, sizing: Sizing) -> Result<Self> {
        if n == 0 {
            return invalid("universe size must be at least 1");
        }
        let b = b_policy.half_bits();
        if b == 0 || b > 2 * WORD_BITS {
            return invalid(format!("half width {b} outside 1..={}", 2 * WORD_BITS));
        }
        let need = match mode {
            BarrierMode::Plain => bit_len(n),
            BarrierMode::Hidden => 2 * bit_len(n),
        };
        if b < need {
            return invalid(format!("b = {b} is too small for n = {n} (need b >= {need})"));
        }
        let seg_bits = 2 * b as u64;
        let cells = n / seg_bits;
        let tail_bits = n % seg_bits;
        let header_bits = match sizing {
            Sizing::External => 0,
            Sizing::SelfContained(_) => 2 * bit_len(n) as u64 - 1,
        };
        let barrier_bits = match mode {
            BarrierMode::Plain => WORD_BITS as u64,
            BarrierMode::Hidden => 1,
        };
        let seg = if cells > 0 {
            Some(SegLayout::new(header_bits, cells, b, mode)?)
        } else {
            None
        };
        let tail = if tail_bits > 0 {
            let offset = header_bits + barrier_bits + cells * seg_bits;
            Some(WordLayout::new(offset, tail_bits as u32, b)?)
        } else {
            None
        };
        Ok(Self {
            n,
            half_bits: b,
            mode,
            sizing,
            header_bits,
            barrier_bits,
            cells,
            tail_bits,
            seg,
            tail,
        })
    }

    pub fn for_config(n: u64, config: &Config) -> Result<Self> {
        Self::new(n, config.b_policy, config.barrier, config.sizing)
    }

    pub fn array_bits(&self) -> u64 {
        self.cells * 2 * self.half_bits as u64
    }

    pub fn total_bits(&self) -> u64 {
        self.header_bits + self.barrier_bits + self.array_bits() + self.tail_bits
    }

    /// Bits covered by segments, `2bN`.
    pub fn segment_span(&self) -> u64 {
        self.array_bits()
    }

    pub fn is_tail_only(&self) -> bool {
        self.cells == 0
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.header_bits > 0 {
            write!(f, "header={} ", self.header_bits)?;
        }
        match self.mode {
            BarrierMode::Hidden => write!(f, "flag={} ", self.barrier_bits)?,
            BarrierMode::Plain => write!(f, "k={} ", self.barrier_bits)?,
        }
        write!(
            f,
            "A={} tail={} total={}",
            self.array_bits(),
            self.tail_bits,
            self.total_bits()
        )
    }
}

/// Phase of an iteration cursor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterPhase {
    Segments,
    Tail,
    Done,
}

/// Iteration cursor packed into one integer `pos` in `0..=n`:
///
/// * `pos < 2bN`: segment phase, outer index `j = pos / 2b + 1` (the barrier
///   position whose mate is being scanned) and bit offset `pos mod 2b`;
/// * `2bN <= pos < n`: tail phase, tail cursor `pos - 2bN`;
/// * `pos = n`: done.
///
/// So it persists in exactly `ceil(log2(n+1))` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IterState {
    pos: u64,
}

impl IterState {
    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Restores a cursor saved with [`IterState::position`].
    pub fn from_position(n: u64, pos: u64) -> Result<Self> {
        if pos > n {
            return invalid(format!("cursor {pos} beyond universe size {n}"));
        }
        Ok(Self { pos })
    }

    /// Bits needed to persist a cursor for universe size `n`.
    pub fn persistent_bits(n: u64) -> u32 {
        bit_len(n)
    }

    pub fn phase(&self, layout: &Layout) -> IterPhase {
        if self.pos < layout.segment_span() {
            IterPhase::Segments
        } else if self.pos < layout.n {
            IterPhase::Tail
        } else {
            IterPhase::Done
        }
    }

    /// Outer barrier index and in-segment offset, in the segment phase.
    pub fn segment_cursor(&self, layout: &Layout) -> Option<(u64, u32)> {
        let span = 2 * layout.half_bits as u64;
        (self.phase(layout) == IterPhase::Segments).then(|| (self.pos / span + 1, (self.pos % span) as u32))
    }

    /// Tail cursor, in the tail phase.
    pub fn tail_cursor(&self, layout: &Layout) -> Option<u64> {
        (self.phase(layout) == IterPhase::Tail).then(|| self.pos - layout.segment_span())
    }
}

enum Slot {
    Segment { index: u64, bit: u32 },
    Tail(u64),
}

/// A choice dictionary over `{1..n}` with its own backing store.
#[derive(Debug, Clone)]
pub struct ChoiceDict {
    layout: Layout,
    store: BitStore,
    #[cfg(feature = "fault-injection")]
    mutant: Option<Mutant>,
}

impl ChoiceDict {
    /// Allocates `footprint` bits of memory filled per `config.fill` and
    /// initializes an empty dictionary in a constant number of word accesses.
    pub fn new(n: u64, config: &Config) -> Result<Self> {
        let layout = Layout::for_config(n, config)?;
        let mut store = BitStore::new(layout.total_bits(), &config.fill)?;
        if let Sizing::SelfContained(e) = layout.sizing {
            let code = gamma_encode(n, e)?;
            store.write_bits(0, code.len, code.stored)?;
        }
        if let Some(seg) = layout.seg {
            SegDict::init(&mut store, seg)?;
        }
        if let Some(tail) = layout.tail {
            WordDict::init(&mut store, tail)?;
        }
        Ok(Self {
            layout,
            store,
            #[cfg(feature = "fault-injection")]
            mutant: None,
        })
    }

    /// Restores a self-contained dictionary from [`ChoiceDict::to_bytes`]
    /// output. Only the size header is decoded; the body is taken as is.
    pub fn from_bytes(bytes: &[u8], config: &Config) -> Result<Self> {
        let Sizing::SelfContained(e) = config.sizing else {
            return invalid("externally sized dictionaries need n; use from_bytes_sized");
        };
        let mut window = [0u8; 16];
        let avail = bytes.len().min(16);
        window[..avail].copy_from_slice(&bytes[..avail]);
        let window = u128::from_le_bytes(window);
        let (n, _) = gamma_decode(window, (avail as u32 * 8).min(MAX_CODE_BITS), e)?;
        Self::from_bytes_sized(n, bytes, config)
    }

    /// Restores a dictionary whose universe size is known to the caller.
    pub fn from_bytes_sized(n: u64, bytes: &[u8], config: &Config) -> Result<Self> {
        let layout = Layout::for_config(n, config)?;
        let store = BitStore::from_bytes(layout.total_bits(), bytes)?;
        if let Sizing::SelfContained(e) = layout.sizing {
            let window = store.read_bits(0, layout.header_bits as u32)?;
            let (stored_n, _) = gamma_decode(window, layout.header_bits as u32, e)?;
            if stored_n != n {
                return Err(Error::Decode(format!("header says n = {stored_n}, expected {n}")));
            }
        }
        store.reset_accesses();
        Ok(Self {
            layout,
            store,
            #[cfg(feature = "fault-injection")]
            mutant: None,
        })
    }

    /// Reads the universe size back from the header of a self-contained
    /// dictionary in constant time.
    pub fn stored_universe(&self) -> Result<Option<u64>> {
        match self.layout.sizing {
            Sizing::External => Ok(None),
            Sizing::SelfContained(e) => {
                let (n, _) = gamma_read(&self.store, 0, e)?;
                Ok(Some(n))
            }
        }
    }

    #[cfg(feature = "fault-injection")]
    pub fn with_mutant(mut self, mutant: Option<Mutant>) -> Self {
        self.mutant = mutant;
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.store.to_bytes()
    }

    pub fn universe(&self) -> u64 {
        self.layout.n
    }

    pub fn half_bits(&self) -> u32 {
        self.layout.half_bits
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn store(&self) -> &BitStore {
        &self.store
    }

    /// Persistent bits in a quiescent state.
    pub fn footprint_bits(&self) -> u64 {
        self.store.capacity_bits()
    }

    /// The segment dictionary, if `N >= 1`.
    pub fn segments(&self) -> Option<SegDict<&BitStore>> {
        let d = SegDict::attach(&self.store, self.layout.seg?);
        #[cfg(feature = "fault-injection")]
        let d = d.with_mutant(self.mutant);
        Some(d)
    }

    fn segments_mut(&mut self) -> Option<SegDict<&mut BitStore>> {
        let seg = self.layout.seg?;
        #[cfg(feature = "fault-injection")]
        let mutant = self.mutant;
        let d = SegDict::attach(&mut self.store, seg);
        #[cfg(feature = "fault-injection")]
        let d = d.with_mutant(mutant);
        Some(d)
    }

    fn tail(&self) -> Option<WordDict<&BitStore>> {
        Some(WordDict::attach(&self.store, self.layout.tail?))
    }

    fn tail_mut(&mut self) -> Option<WordDict<&mut BitStore>> {
        let tail = self.layout.tail?;
        Some(WordDict::attach(&mut self.store, tail))
    }

    fn slot(&self, elem: u64) -> Result<Slot> {
        if elem == 0 || elem > self.layout.n {
            return invalid(format!("element {elem} outside 1..={}", self.layout.n));
        }
        let span = 2 * self.layout.half_bits as u64;
        if elem <= self.layout.segment_span() {
            Ok(Slot::Segment {
                index: (elem - 1) / span + 1,
                bit: ((elem - 1) % span) as u32,
            })
        } else {
            Ok(Slot::Tail(elem - self.layout.segment_span()))
        }
    }

    fn set(&mut self, elem: u64, on: bool) -> Result<()> {
        let b = self.layout.half_bits;
        match self.slot(elem)? {
            Slot::Segment { index, bit } => {
                let mut seg = self.segments_mut().expect("segment slot without segments");
                let a = seg.read(index)?;
                if a.bit(bit, b) != on {
                    seg.write(index, a.with_bit(bit, b, on))?;
                }
                Ok(())
            }
            Slot::Tail(j) => {
                let mut tail = self.tail_mut().expect("tail slot without tail");
                if on {
                    tail.insert(j)
                } else {
                    tail.delete(j)
                }
            }
        }
    }

    pub fn insert(&mut self, elem: u64) -> Result<()> {
        self.set(elem, true)
    }

    pub fn delete(&mut self, elem: u64) -> Result<()> {
        self.set(elem, false)
    }

    pub fn contains(&self, elem: u64) -> Result<bool> {
        match self.slot(elem)? {
            Slot::Segment { index, bit } => {
                let seg = self.segments().expect("segment slot without segments");
                Ok(seg.read(index)?.bit(bit, self.layout.half_bits))
            }
            Slot::Tail(j) => self.tail().expect("tail slot without tail").contains(j),
        }
    }

    /// Some member of the set, or 0 if it is empty. Segments are asked first;
    /// within a segment the smallest element is returned.
    pub fn choice(&self) -> Result<u64> {
        let b = self.layout.half_bits;
        if let Some(seg) = self.segments() {
            let i = seg.nonzero()?;
            if i > 0 {
                let a = seg.read(i)?;
                let Some(bit) = a.lsb(b) else {
                    return Err(Error::Corrupt(format!("nonzero() = {i} but a_{i} = 0")));
                };
                return Ok((i - 1) * 2 * b as u64 + bit as u64 + 1);
            }
        }
        match self.tail() {
            Some(tail) => {
                let c = tail.choice()?;
                Ok(if c > 0 { c + self.layout.segment_span() } else { 0 })
            }
            None => Ok(0),
        }
    }

    pub fn iter_reset(&self) -> IterState {
        IterState::default()
    }

    /// Next element of the iteration, or `None` once all have been returned.
    ///
    /// Every returned element is a member at the time of the call, even if
    /// the set was modified since the reset; elements may then be skipped or
    /// repeated.
    pub fn iter_next(&self, st: &mut IterState) -> Result<Option<u64>> {
        let layout = &self.layout;
        let b = layout.half_bits;
        let span = 2 * b as u64;
        let seg_end = layout.segment_span();

        // At most two segment visits: a fresh segment right of the barrier
        // always holds a nonzero entry.
        for _ in 0..2 {
            let Some((j, offset)) = st.segment_cursor(layout) else {
                break;
            };
            let seg = self.segments().expect("segment phase without segments");
            let k = seg.barrier()?;
            let (j, offset) = if j <= k { (k + 1, 0) } else { (j, offset) };
            if j > layout.cells {
                st.pos = seg_end;
                break;
            }
            let i = seg.mate(j)?;
            let a = seg.read(i)?.clear_below(offset, b);
            if let Some(bit) = a.lsb(b) {
                st.pos = (j - 1) * span + bit as u64 + 1;
                return Ok(Some((i - 1) * span + bit as u64 + 1));
            }
            st.pos = j * span;
        }

        if let Some(cursor) = st.tail_cursor(layout) {
            let tail = self.tail().expect("tail phase without tail");
            return match tail.next_after(cursor)? {
                Some(l) => {
                    st.pos = seg_end + l;
                    Ok(Some(seg_end + l))
                }
                None => {
                    st.pos = layout.n;
                    Ok(None)
                }
            };
        }
        Ok(None)
    }

    /// Whether the iteration has nothing left to return.
    pub fn iter_done(&self, st: &IterState) -> Result<bool> {
        let mut probe = *st;
        Ok(self.iter_next(&mut probe)?.is_none())
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            dict: self,
            state: self.iter_reset(),
        }
    }

    /// Empties the dictionary with the same constant-time initialization as
    /// [`ChoiceDict::new`]; the body is left as it is.
    pub fn clear(&mut self) -> Result<()> {
        if let Some(seg) = self.layout.seg {
            SegDict::init(&mut self.store, seg)?;
        }
        if let Some(tail) = self.layout.tail {
            WordDict::init(&mut self.store, tail)?;
        }
        Ok(())
    }

    /// Runs the segment dictionary's representation checks.
    pub fn check_invariants(&self) -> Result<()> {
        if let Some(seg) = self.segments() {
            seg.check_invariants()?;
        }
        if let (Sizing::SelfContained(_), Some(n)) = (self.layout.sizing, self.stored_universe()?) {
            if n != self.layout.n {
                return Err(Error::Corrupt(format!(
                    "header holds {n}, universe is {}",
                    self.layout.n
                )));
            }
        }
        Ok(())
    }
}

/// Iterator adapter over [`ChoiceDict::iter_next`].
pub struct Iter<'a> {
    dict: &'a ChoiceDict,
    state: IterState,
}

impl Iterator for Iter<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.dict.iter_next(&mut self.state).ok().flatten()
    }
}
