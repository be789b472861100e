//! Memory images that look like a valid matching before initialization.
//!
//! Random fills almost never contain reciprocal mate fields, so they leave
//! the edge-severing and barrier checks of the write path untested. These
//! images plant fake matchings everywhere.

use crate::bitstore::{BitStore, FillPolicy};
use crate::choicedict::Layout;
use crate::error::Result;
use crate::segdict::{BarrierMode, SegLayout};
use crate::wordops::mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CraftedPattern {
    /// `1<->2`, `3<->4`, ...
    AdjacentPairs,
    /// `i <-> N+1-i`.
    MirrorPairs,
    /// Every field names `N`, and `N` names 1.
    AllToLast,
    /// Every field names its own cell.
    SelfPoint,
}

impl CraftedPattern {
    pub const ALL: [CraftedPattern; 4] = [
        CraftedPattern::AdjacentPairs,
        CraftedPattern::MirrorPairs,
        CraftedPattern::AllToLast,
        CraftedPattern::SelfPoint,
    ];

    fn target(self, i: u64, n: u64) -> u64 {
        match self {
            CraftedPattern::AdjacentPairs => {
                if i % 2 == 1 {
                    if i < n {
                        i + 1
                    } else {
                        i
                    }
                } else {
                    i - 1
                }
            }
            CraftedPattern::MirrorPairs => n + 1 - i,
            CraftedPattern::AllToLast => {
                if i == n {
                    1
                } else {
                    n
                }
            }
            CraftedPattern::SelfPoint => i,
        }
    }
}

/// Writes the pattern over the cells of `seg` inside `store`. Everything
/// outside the mate fields is set to ones or an alternating bit pattern.
fn plant(store: &mut BitStore, seg: &SegLayout, pattern: CraftedPattern) -> Result<()> {
    let b = seg.half_bits();
    let m = seg.mate_bits();
    let junk = 0x5555_5555_5555_5555_5555_5555_5555_5555u128 & mask(b);
    match seg.mode() {
        BarrierMode::Plain => store.write_bits(seg.offset(), 64, u64::MAX as u128)?,
        BarrierMode::Hidden => store.write_bit(seg.offset(), true)?,
    }
    for i in 1..=seg.cells() {
        store.write_bits(seg.cell(i), b, junk)?;
        let field = pattern.target(i, seg.cells()) as u128;
        store.write_bits(seg.upper(i), m, field)?;
        if m < b {
            store.write_bits(seg.upper(i) + m as u64, b - m, mask(b - m))?;
        }
    }
    Ok(())
}

/// One crafted image per pattern for a bare segment dictionary laid out at
/// offset 0.
pub fn crafted_seg_fills(layout: &SegLayout) -> Result<Vec<(CraftedPattern, FillPolicy)>> {
    CraftedPattern::ALL
        .iter()
        .map(|&p| {
            let mut store = BitStore::new(layout.offset() + layout.footprint_bits(), &FillPolicy::Ones)?;
            plant(&mut store, layout, p)?;
            Ok((p, FillPolicy::Crafted(store.words().to_vec())))
        })
        .collect()
}

/// One crafted image per pattern for a whole choice dictionary. With no
/// segments there is nothing to fake and the image is all ones.
pub fn crafted_fills(layout: &Layout) -> Result<Vec<(CraftedPattern, FillPolicy)>> {
    CraftedPattern::ALL
        .iter()
        .map(|&p| {
            let mut store = BitStore::new(layout.total_bits(), &FillPolicy::Ones)?;
            if let Some(seg) = &layout.seg {
                plant(&mut store, seg, p)?;
            }
            Ok((p, FillPolicy::Crafted(store.words().to_vec())))
        })
        .collect()
}
