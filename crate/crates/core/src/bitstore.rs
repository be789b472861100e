//! Bit-addressable backing memory.
//!
//! A [`BitStore`] holds exactly `capacity_bits` bits in 64-bit words. Bit `j`
//! of a field read at `offset` is the stored bit `offset + j`, and stored bits
//! are little-endian within words. Every word-level load and store bumps an
//! access counter, which is how the rest of the crate turns "constant time"
//! into an assertion.
//!
//! Memory handed to the dictionary is not assumed to be zeroed. The
//! [`FillPolicy`] decides what garbage a fresh store contains, so tests can run
//! the same workload over zeros, ones, seeded noise or hand-crafted patterns.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Word width in bits.
pub const WORD_BITS: u32 = u64::BITS;

/// Longest field accepted by [`BitStore::read_bits`] and [`BitStore::write_bits`].
pub const MAX_FIELD_BITS: u32 = 2 * WORD_BITS;

/// Initial contents of a freshly created store.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FillPolicy {
    #[default]
    Zeros,
    Ones,
    /// Words drawn from a ChaCha8 stream seeded with the given value.
    Random(u64),
    /// The given words, repeated cyclically. An empty pattern means zeros.
    Crafted(Vec<u64>),
}

impl FillPolicy {
    fn word(&self, index: usize, rng: &mut Option<ChaCha8Rng>) -> u64 {
        match self {
            FillPolicy::Zeros => 0,
            FillPolicy::Ones => u64::MAX,
            FillPolicy::Random(_) => rng.as_mut().map_or(0, |r| r.next_u64()),
            FillPolicy::Crafted(p) if p.is_empty() => 0,
            FillPolicy::Crafted(p) => p[index % p.len()],
        }
    }
}

/// Flat bit memory with an exact budget and an access counter.
#[derive(Debug)]
pub struct BitStore {
    capacity_bits: u64,
    words: Vec<u64>,
    accesses: AtomicU64,
}

impl Clone for BitStore {
    fn clone(&self) -> Self {
        Self {
            capacity_bits: self.capacity_bits,
            words: self.words.clone(),
            accesses: AtomicU64::new(self.accesses.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for BitStore {
    /// Stores compare by capacity and contents; the counter is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.capacity_bits == other.capacity_bits && self.to_bytes() == other.to_bytes()
    }
}

impl Eq for BitStore {}

#[inline]
fn low_mask(len: u32) -> u128 {
    if len >= 128 {
        u128::MAX
    } else {
        (1u128 << len) - 1
    }
}

impl BitStore {
    pub fn new(capacity_bits: u64, fill: &FillPolicy) -> Result<Self> {
        if capacity_bits == 0 {
            return invalid("bit store capacity must be at least one bit");
        }
        let n_words = capacity_bits.div_ceil(WORD_BITS as u64) as usize;
        let mut rng = match fill {
            FillPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
            _ => None,
        };
        let words = (0..n_words).map(|t| fill.word(t, &mut rng)).collect();
        Ok(Self {
            capacity_bits,
            words,
            accesses: AtomicU64::new(0),
        })
    }

    /// Rebuilds a store from the byte image produced by [`BitStore::to_bytes`].
    pub fn from_bytes(capacity_bits: u64, bytes: &[u8]) -> Result<Self> {
        let mut store = Self::new(capacity_bits, &FillPolicy::Zeros)?;
        let needed = capacity_bits.div_ceil(8) as usize;
        if bytes.len() < needed {
            return invalid(format!(
                "byte image holds {} bytes, {} needed for {} bits",
                bytes.len(),
                needed,
                capacity_bits
            ));
        }
        for (t, chunk) in bytes[..needed].chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            store.words[t] = u64::from_le_bytes(buf);
        }
        store.clear_padding();
        Ok(store)
    }

    /// Raw contents, least-significant bit first within each byte. Bits past
    /// the capacity in the final byte are zero.
    pub fn to_bytes(&self) -> Vec<u8> {
        let needed = self.capacity_bits.div_ceil(8) as usize;
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(needed);
        let tail = (self.capacity_bits % 8) as u32;
        if tail != 0 {
            if let Some(last) = out.last_mut() {
                *last &= (1u8 << tail) - 1;
            }
        }
        out
    }

    fn clear_padding(&mut self) {
        let tail = (self.capacity_bits % WORD_BITS as u64) as u32;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    pub fn capacity_bits(&self) -> u64 {
        self.capacity_bits
    }

    /// Word loads plus word stores since the last reset.
    pub fn accesses(&self) -> u64 {
        self.accesses.load(Ordering::Relaxed)
    }

    pub fn reset_accesses(&self) {
        self.accesses.store(0, Ordering::Relaxed);
    }

    #[inline]
    fn touch(&self, n: u64) {
        self.accesses.fetch_add(n, Ordering::Relaxed);
    }

    #[inline]
    fn check_range(&self, offset: u64, len: u32) -> Result<()> {
        if len > MAX_FIELD_BITS {
            return invalid(format!("field of {len} bits exceeds {MAX_FIELD_BITS}"));
        }
        match offset.checked_add(len as u64) {
            Some(end) if end <= self.capacity_bits => Ok(()),
            _ => Err(Error::OutOfBounds {
                offset,
                len,
                capacity: self.capacity_bits,
            }),
        }
    }

    /// Reads `len <= 128` bits starting at `offset`.
    pub fn read_bits(&self, offset: u64, len: u32) -> Result<u128> {
        self.check_range(offset, len)?;
        if len == 0 {
            return Ok(0);
        }
        let first = (offset / WORD_BITS as u64) as usize;
        let shift = (offset % WORD_BITS as u64) as u32;
        let n_words = (shift + len).div_ceil(WORD_BITS) as usize;
        self.touch(n_words as u64);

        let mut acc = (self.words[first] >> shift) as u128;
        for t in 1..n_words {
            let pos = t as u32 * WORD_BITS - shift;
            acc |= (self.words[first + t] as u128) << pos;
        }
        Ok(acc & low_mask(len))
    }

    /// Writes the low `len <= 128` bits of `value` at `offset`, leaving every
    /// other stored bit unchanged.
    pub fn write_bits(&mut self, offset: u64, len: u32, value: u128) -> Result<()> {
        self.check_range(offset, len)?;
        if value & !low_mask(len) != 0 {
            return invalid(format!("value {value:#x} does not fit in {len} bits"));
        }
        if len == 0 {
            return Ok(());
        }
        let first = (offset / WORD_BITS as u64) as usize;
        let shift = (offset % WORD_BITS as u64) as u32;
        let end = shift + len;
        let n_words = end.div_ceil(WORD_BITS) as usize;

        for t in 0..n_words {
            // Bit range of this word covered by the field.
            let lo = if t == 0 { shift } else { 0 };
            let hi = (end - t as u32 * WORD_BITS).min(WORD_BITS);
            let piece = if t == 0 {
                (value << shift) as u64
            } else {
                (value >> (t as u32 * WORD_BITS - shift)) as u64
            };
            let word = &mut self.words[first + t];
            if lo == 0 && hi == WORD_BITS {
                *word = piece;
                self.accesses.fetch_add(1, Ordering::Relaxed);
            } else {
                let mask = (low_mask(hi - lo) as u64) << lo;
                *word = (*word & !mask) | (piece & mask);
                self.accesses.fetch_add(2, Ordering::Relaxed);
            }
        }
        Ok(())
    }

    pub fn read_bit(&self, offset: u64) -> Result<bool> {
        self.read_bits(offset, 1).map(|b| b == 1)
    }

    pub fn write_bit(&mut self, offset: u64, bit: bool) -> Result<()> {
        self.write_bits(offset, 1, bit as u128)
    }

    /// The backing words, including any padding past the capacity.
    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit-by-bit reference model.
    struct RefBits(Vec<bool>);

    impl RefBits {
        fn from_store(s: &BitStore) -> Self {
            let bits = (0..s.capacity_bits())
                .map(|t| (s.words[(t / 64) as usize] >> (t % 64)) & 1 == 1)
                .collect();
            RefBits(bits)
        }
        fn read(&self, offset: u64, len: u32) -> u128 {
            (0..len).fold(0u128, |acc, j| {
                acc | ((self.0[(offset + j as u64) as usize] as u128) << j)
            })
        }
        fn write(&mut self, offset: u64, len: u32, value: u128) {
            for j in 0..len {
                self.0[(offset + j as u64) as usize] = (value >> j) & 1 == 1;
            }
        }
    }

    #[test]
    fn zero_capacity_rejected() {
        assert!(matches!(
            BitStore::new(0, &FillPolicy::Zeros),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn fills() {
        let s = BitStore::new(9, &FillPolicy::Zeros).unwrap();
        assert_eq!(s.capacity_bits(), 9);
        assert_eq!(s.read_bits(0, 9).unwrap(), 0);
        assert_eq!(s.accesses(), 1);

        let s = BitStore::new(64, &FillPolicy::Ones).unwrap();
        assert!((0..64).all(|t| s.read_bit(t).unwrap()));

        let a = BitStore::new(256, &FillPolicy::Random(42)).unwrap();
        let b = BitStore::new(256, &FillPolicy::Random(42)).unwrap();
        assert_eq!(a.words(), b.words());
        let c = BitStore::new(256, &FillPolicy::Random(43)).unwrap();
        assert_ne!(a.words(), c.words());

        let s = BitStore::new(256, &FillPolicy::Crafted(vec![1, 2, 3])).unwrap();
        assert_eq!(s.words(), &[1, 2, 3, 1]);
    }

    #[test]
    fn roundtrip_and_neighbourhood() {
        let mut s = BitStore::new(64, &FillPolicy::Zeros).unwrap();
        assert_eq!(s.read_bits(0, 8).unwrap(), 0);
        s.write_bits(3, 4, 0b1011).unwrap();
        assert_eq!(s.read_bits(3, 4).unwrap(), 0b1011);
        assert_eq!(s.read_bits(2, 6).unwrap(), 0b010110);

        s.write_bits(0, 1, 1).unwrap();
        assert_eq!(s.read_bits(0, 1).unwrap(), 1);

        let mut s = BitStore::new(64, &FillPolicy::Ones).unwrap();
        s.write_bits(8, 8, 0).unwrap();
        assert_eq!(s.read_bits(0, 8).unwrap(), 0xff);
        assert_eq!(s.read_bits(16, 8).unwrap(), 0xff);
    }

    #[test]
    fn interleaved_writes_match_reference() {
        let mut s = BitStore::new(40, &FillPolicy::Random(5)).unwrap();
        let mut r = RefBits::from_store(&s);
        for (off, len, v) in [
            (5, 9, 0x1a5u128),
            (9, 12, 0xabc),
            (5, 3, 0b101),
            (0, 40, 0x12_3456_789a),
        ] {
            s.write_bits(off, len, v).unwrap();
            r.write(off, len, v);
            for o in 0..40 {
                for l in 0..=(40 - o).min(128) as u32 {
                    assert_eq!(s.read_bits(o, l).unwrap(), r.read(o, l));
                }
            }
        }
    }

    #[test]
    fn bounds_and_width_errors() {
        let mut s = BitStore::new(100, &FillPolicy::Zeros).unwrap();
        assert!(matches!(s.read_bits(90, 11), Err(Error::OutOfBounds { .. })));
        assert!(matches!(s.write_bits(100, 1, 0), Err(Error::OutOfBounds { .. })));
        assert!(matches!(s.write_bits(u64::MAX, 2, 0), Err(Error::OutOfBounds { .. })));
        assert!(matches!(s.write_bits(0, 3, 8), Err(Error::InvalidArgument(_))));
        assert!(matches!(s.read_bits(0, 129), Err(Error::InvalidArgument(_))));
        assert!(s.read_bits(0, 100).is_ok());
    }

    #[test]
    fn counter_tracks_word_touches() {
        let mut s = BitStore::new(256, &FillPolicy::Zeros).unwrap();
        s.reset_accesses();
        assert_eq!(s.accesses(), 0);
        s.read_bits(3, 60).unwrap();
        assert_eq!(s.accesses(), 1);
        s.reset_accesses();
        s.read_bits(60, 10).unwrap();
        assert_eq!(s.accesses(), 2);
        s.reset_accesses();
        s.read_bits(1, 128).unwrap();
        assert_eq!(s.accesses(), 3);
        s.reset_accesses();
        // One full word store, one partial word (load + store).
        s.write_bits(64, 70, 0).unwrap();
        assert_eq!(s.accesses(), 3);
        let before = s.accesses();
        s.read_bits(0, 0).unwrap();
        assert_eq!(s.accesses(), before);
    }

    #[test]
    fn bytes_roundtrip() {
        let mut s = BitStore::new(13, &FillPolicy::Ones).unwrap();
        s.write_bits(0, 4, 0b0110).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(bytes, vec![0b1111_0110, 0b0001_1111]);
        let t = BitStore::from_bytes(13, &bytes).unwrap();
        assert_eq!(s, t);
        assert!(BitStore::from_bytes(13, &bytes[..1]).is_err());
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn frame_and_roundtrip(
                seed in any::<u64>(),
                writes in proptest::collection::vec((0u64..300, 0u32..=128, any::<u128>()), 1..40)
            ) {
                let cap = 300u64;
                let mut s = BitStore::new(cap, &FillPolicy::Random(seed)).unwrap();
                let mut r = RefBits::from_store(&s);
                for (off, len, v) in writes {
                    let v = v & low_mask(len);
                    let res = s.write_bits(off, len, v);
                    if off + len as u64 > cap {
                        let oob = matches!(res, Err(Error::OutOfBounds { .. }));
                        prop_assert!(oob);
                        continue;
                    }
                    res.unwrap();
                    r.write(off, len, v);
                    prop_assert_eq!(s.read_bits(off, len).unwrap(), v);
                }
                for t in 0..cap {
                    prop_assert_eq!(s.read_bit(t).unwrap(), r.0[t as usize]);
                }
            }
        }
    }
}
