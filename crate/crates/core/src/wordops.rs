//! Word-level primitives: highest and lowest set bit of a double word, and the
//! lower/upper half split of a cell.

use crate::error::{invalid, Result};

/// Index of the most significant set bit of `x`.
#[inline]
pub fn msb(x: u128) -> Result<u32> {
    if x == 0 {
        return invalid("msb of zero");
    }
    Ok(127 - x.leading_zeros())
}

/// Index of the least significant set bit of `x`.
#[inline]
pub fn lsb(x: u128) -> Result<u32> {
    if x == 0 {
        return invalid("lsb of zero");
    }
    Ok(x.trailing_zeros())
}

#[inline]
pub(crate) fn mask(bits: u32) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

fn check_half_width(b: u32) -> Result<()> {
    if b == 0 || b > 64 {
        return invalid(format!("half width {b} outside 1..=64 for a 128-bit operand"));
    }
    Ok(())
}

/// The `b` least significant bits of the `2b`-bit value `x`.
pub fn lower_half(x: u128, b: u32) -> Result<u128> {
    check_half_width(b)?;
    if x > mask(2 * b) {
        return invalid(format!("{x:#x} is wider than {} bits", 2 * b));
    }
    Ok(x & mask(b))
}

/// The `b` most significant bits of the `2b`-bit value `x`.
pub fn upper_half(x: u128, b: u32) -> Result<u128> {
    check_half_width(b)?;
    if x > mask(2 * b) {
        return invalid(format!("{x:#x} is wider than {} bits", 2 * b));
    }
    Ok(x >> b)
}

/// `lo + hi * 2^b`.
pub fn pack(lo: u128, hi: u128, b: u32) -> Result<u128> {
    check_half_width(b)?;
    if lo > mask(b) || hi > mask(b) {
        return invalid(format!("halves {lo:#x}, {hi:#x} do not fit in {b} bits"));
    }
    Ok(lo | (hi << b))
}

/// A `2b`-bit cell value kept as its two halves, so that cells up to 256 bits
/// wide fit without a bignum type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HalfPair {
    pub lower: u128,
    pub upper: u128,
}

impl HalfPair {
    pub const ZERO: HalfPair = HalfPair { lower: 0, upper: 0 };

    pub const fn new(lower: u128, upper: u128) -> Self {
        Self { lower, upper }
    }

    /// Splits a value of at most `2b <= 128` bits.
    pub fn from_wide(x: u128, b: u32) -> Result<Self> {
        Ok(Self {
            lower: lower_half(x, b)?,
            upper: upper_half(x, b)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.lower == 0 && self.upper == 0
    }

    pub fn fits(&self, b: u32) -> bool {
        self.lower <= mask(b) && self.upper <= mask(b)
    }

    /// Bit `pos` of the `2b`-bit value.
    pub fn bit(&self, pos: u32, b: u32) -> bool {
        if pos < b {
            (self.lower >> pos) & 1 == 1
        } else {
            (self.upper >> (pos - b)) & 1 == 1
        }
    }

    pub fn with_bit(self, pos: u32, b: u32, on: bool) -> Self {
        let (mut lower, mut upper) = (self.lower, self.upper);
        let (half, p) = if pos < b {
            (&mut lower, pos)
        } else {
            (&mut upper, pos - b)
        };
        if on {
            *half |= 1 << p;
        } else {
            *half &= !(1 << p);
        }
        Self { lower, upper }
    }

    /// Clears every bit below position `from` of the `2b`-bit value.
    pub fn clear_below(self, from: u32, b: u32) -> Self {
        if from >= 2 * b {
            Self::ZERO
        } else if from >= b {
            Self::new(0, self.upper & !mask(from - b))
        } else {
            Self::new(self.lower & !mask(from), self.upper)
        }
    }

    /// Least significant set bit of the `2b`-bit value.
    pub fn lsb(&self, b: u32) -> Option<u32> {
        if self.lower != 0 {
            Some(self.lower.trailing_zeros())
        } else if self.upper != 0 {
            Some(b + self.upper.trailing_zeros())
        } else {
            None
        }
    }

    /// Hex rendering of the full `2b`-bit value.
    pub fn to_hex(&self, b: u32) -> String {
        let (lo128, hi128) = if b >= 128 {
            (self.lower, self.upper)
        } else {
            (self.lower | (self.upper << b), self.upper >> (128 - b))
        };
        if hi128 == 0 {
            format!("{lo128:#x}")
        } else {
            format!("{hi128:#x}{lo128:032x}")
        }
    }

    /// Parses decimal (`u128`) or `0x`-prefixed hex of at most `2b` bits.
    pub fn parse(s: &str, b: u32) -> Result<Self> {
        let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            parse_hex_wide(hex)
        } else {
            s.parse::<u128>().ok().map(|v| (v, 0u128))
        };
        let Some((lo128, hi128)) = parsed else {
            return invalid(format!("cannot parse value {s:?}"));
        };
        // (lo128, hi128) is a 256-bit integer; re-split at bit b.
        let lower = lo128 & mask(b);
        let upper = if b >= 128 {
            hi128
        } else {
            (lo128 >> b) | (hi128 << (128 - b))
        };
        let overflow = if b >= 128 { false } else { hi128 >> b != 0 };
        let pair = Self { lower, upper };
        if overflow || !pair.fits(b) {
            return invalid(format!("value {s} does not fit in {} bits", 2 * b));
        }
        Ok(pair)
    }
}

fn parse_hex_wide(hex: &str) -> Option<(u128, u128)> {
    let hex = hex.trim_start_matches('0');
    if hex.is_empty() {
        return Some((0, 0));
    }
    if hex.len() > 64 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let split = hex.len().saturating_sub(32);
    let lo = u128::from_str_radix(&hex[split..], 16).ok()?;
    let hi = if split == 0 {
        0
    } else {
        u128::from_str_radix(&hex[..split], 16).ok()?
    };
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn msb_loop(x: u128) -> u32 {
        (0..128).rev().find(|&j| (x >> j) & 1 == 1).unwrap()
    }

    fn lsb_loop(x: u128) -> u32 {
        (0..128).find(|&j| (x >> j) & 1 == 1).unwrap()
    }

    #[test]
    fn scan_examples() {
        assert_eq!(msb(1).unwrap(), 0);
        assert_eq!(msb(1 << 63).unwrap(), 63);
        assert_eq!(msb(0b1010).unwrap(), 3);
        assert_eq!(lsb(1).unwrap(), 0);
        assert_eq!(lsb(0b1010).unwrap(), 1);
        assert_eq!(lsb(1 << 100).unwrap(), 100);
        assert!(msb(0).is_err());
        assert!(lsb(0).is_err());
    }

    #[test]
    fn scan_exhaustive_16_bits() {
        for x in 1u128..(1 << 16) {
            assert_eq!(msb(x).unwrap(), msb_loop(x));
            assert_eq!(lsb(x).unwrap(), lsb_loop(x));
        }
    }

    #[test]
    fn halves() {
        assert_eq!(pack(5, 0, 8).unwrap(), 5);
        assert_eq!(upper_half(5, 8).unwrap(), 0);
        assert_eq!(upper_half(0x1F0A, 8).unwrap(), 0x1F);
        assert_eq!(lower_half(0x1F0A, 8).unwrap(), 0x0A);
        assert!(pack(256, 0, 8).is_err());
        assert!(upper_half(1 << 16, 8).is_err());
        assert!(lower_half(0, 65).is_err());
    }

    #[test]
    fn pair_bits() {
        let p = HalfPair::ZERO.with_bit(3, 8, true).with_bit(9, 8, true);
        assert_eq!(p, HalfPair::new(0b1000, 0b10));
        assert!(p.bit(9, 8));
        assert_eq!(p.lsb(8), Some(3));
        assert_eq!(p.clear_below(4, 8).lsb(8), Some(9));
        assert_eq!(p.clear_below(10, 8), HalfPair::ZERO);
        assert_eq!(p.with_bit(3, 8, false).with_bit(9, 8, false), HalfPair::ZERO);
    }

    #[test]
    fn pair_text() {
        assert_eq!(HalfPair::new(5, 0).to_hex(8), "0x5");
        assert_eq!(HalfPair::new(0x0a, 0x1f).to_hex(8), "0x1f0a");
        assert_eq!(HalfPair::parse("0x1f0a", 8).unwrap(), HalfPair::new(0x0a, 0x1f));
        assert_eq!(HalfPair::parse("7946", 8).unwrap(), HalfPair::new(0x0a, 0x1f));
        assert!(HalfPair::parse("0x10000", 8).is_err());
        assert!(HalfPair::parse("zz", 8).is_err());
        let wide = HalfPair::new(u128::MAX, 1);
        assert_eq!(HalfPair::parse(&wide.to_hex(128), 128).unwrap(), wide);
    }

    proptest! {
        #[test]
        fn scan_matches_loop(x in 1u128..) {
            let m = msb(x).unwrap();
            prop_assert_eq!(m, msb_loop(x));
            prop_assert_eq!(lsb(x).unwrap(), lsb_loop(x));
            prop_assert!(x >> m == 1);
        }

        #[test]
        fn pack_is_a_bijection(b in 1u32..=64, x in any::<u128>()) {
            let x = x & mask(2 * b);
            let lo = lower_half(x, b).unwrap();
            let hi = upper_half(x, b).unwrap();
            prop_assert_eq!(pack(lo, hi, b).unwrap(), x);
            prop_assert_eq!(HalfPair::from_wide(x, b).unwrap(), HalfPair::new(lo, hi));
        }

        #[test]
        fn pair_text_roundtrip(b in 1u32..=128, lo in any::<u128>(), hi in any::<u128>()) {
            let p = HalfPair::new(lo & mask(b), hi & mask(b));
            prop_assert_eq!(HalfPair::parse(&p.to_hex(b), b).unwrap(), p);
        }
    }
}
