//! Choice dictionary for a universe of fewer than `2b` elements, kept as a
//! plain bit vector spanning a constant number of words.

use std::borrow::{Borrow, BorrowMut};

use crate::bitstore::{BitStore, MAX_FIELD_BITS};
use crate::error::{invalid, Result};
use crate::wordops::{lsb, mask};

/// Position of a word dictionary inside a [`BitStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordLayout {
    pub offset: u64,
    /// Universe size `m`; element `l` is stored bit `offset + l - 1`.
    pub len: u32,
}

impl WordLayout {
    /// Checks `len < 2b`.
    pub fn new(offset: u64, len: u32, b: u32) -> Result<Self> {
        if len as u64 >= 2 * b as u64 {
            return invalid(format!(
                "word dictionary of {len} bits needs fewer than 2b = {} bits",
                2 * b
            ));
        }
        Ok(Self { offset, len })
    }

    fn chunks(&self) -> impl Iterator<Item = (u32, u32)> {
        let len = self.len;
        (0..len.div_ceil(MAX_FIELD_BITS)).map(move |c| {
            let start = c * MAX_FIELD_BITS;
            (start, (len - start).min(MAX_FIELD_BITS))
        })
    }
}

/// A word dictionary viewed through some handle to its backing store.
#[derive(Debug)]
pub struct WordDict<S> {
    layout: WordLayout,
    store: S,
}

impl<S: Borrow<BitStore>> WordDict<S> {
    /// Views an already initialized region.
    pub fn attach(store: S, layout: WordLayout) -> Self {
        Self { layout, store }
    }

    pub fn layout(&self) -> WordLayout {
        self.layout
    }

    pub fn universe(&self) -> u32 {
        self.layout.len
    }

    pub fn store(&self) -> &BitStore {
        self.store.borrow()
    }

    pub fn into_store(self) -> S {
        self.store
    }

    fn check(&self, elem: u64) -> Result<u64> {
        if elem == 0 || elem > self.layout.len as u64 {
            return invalid(format!("element {elem} outside 1..={}", self.layout.len));
        }
        Ok(self.layout.offset + elem - 1)
    }

    pub fn contains(&self, elem: u64) -> Result<bool> {
        let pos = self.check(elem)?;
        self.store().read_bit(pos)
    }

    /// Smallest member, or 0 when empty.
    pub fn choice(&self) -> Result<u64> {
        for (start, len) in self.layout.chunks() {
            let word = self.store().read_bits(self.layout.offset + start as u64, len)?;
            if word != 0 {
                return Ok(start as u64 + lsb(word)? as u64 + 1);
            }
        }
        Ok(0)
    }

    /// Smallest member greater than `cursor`. Passing back the returned
    /// element walks the set in increasing order.
    pub fn next_after(&self, cursor: u64) -> Result<Option<u64>> {
        if cursor >= self.layout.len as u64 {
            return Ok(None);
        }
        let cursor = cursor as u32;
        for (start, len) in self.layout.chunks() {
            if start + len <= cursor {
                continue;
            }
            let mut word = self.store().read_bits(self.layout.offset + start as u64, len)?;
            if cursor > start {
                word &= !mask(cursor - start);
            }
            if word != 0 {
                return Ok(Some(start as u64 + lsb(word)? as u64 + 1));
            }
        }
        Ok(None)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let mut cursor = 0;
        std::iter::from_fn(move || {
            let next = self.next_after(cursor).ok().flatten()?;
            cursor = next;
            Some(next)
        })
    }
}

impl<S: BorrowMut<BitStore>> WordDict<S> {
    /// Zeroes the region; the set starts empty whatever the memory held.
    pub fn init(mut store: S, layout: WordLayout) -> Result<Self> {
        for (start, len) in layout.chunks() {
            store.borrow_mut().write_bits(layout.offset + start as u64, len, 0)?;
        }
        Ok(Self { layout, store })
    }

    fn store_mut(&mut self) -> &mut BitStore {
        self.store.borrow_mut()
    }

    pub fn insert(&mut self, elem: u64) -> Result<()> {
        let pos = self.check(elem)?;
        self.store_mut().write_bit(pos, true)
    }

    pub fn delete(&mut self, elem: u64) -> Result<()> {
        let pos = self.check(elem)?;
        self.store_mut().write_bit(pos, false)
    }
}
