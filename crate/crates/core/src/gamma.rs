//! Self-delimiting size header: Elias' code `0^(L-1) bin(n)` with
//! `L = |bin(n)|`, in a big-endian and a little-endian flavour.
//!
//! Codes are written as text with the most significant character on the
//! left. Big-endian layouts put the first character at the first stored bit.
//! Little-endian layouts put the last character at the first stored bit, and
//! the little-endian code moves the leading `1` of `bin(n)` to the end so that
//! it is still the first set bit a decoder meets. Either way, decoding reads
//! one window and needs one lowest-set-bit scan.

use std::fmt;

use crate::bitstore::BitStore;
use crate::error::{Error, Result};
use crate::segdict::bit_len;
use crate::wordops::{lsb, mask};

/// Longest code: `n < 2^64` gives `L <= 64`.
pub const MAX_CODE_BITS: u32 = 127;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Endianness {
    #[default]
    Big,
    Little,
}

/// An encoded size. `stored` holds the code in storage order: bit `t` is the
/// `t`-th stored bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaCode {
    pub len: u32,
    pub stored: u128,
    pub endianness: Endianness,
}

impl fmt::Display for GammaCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bit = |t: u32| if (self.stored >> t) & 1 == 1 { '1' } else { '0' };
        let s: String = match self.endianness {
            Endianness::Big => (0..self.len).map(bit).collect(),
            Endianness::Little => (0..self.len).rev().map(bit).collect(),
        };
        f.write_str(&s)
    }
}

/// `bits` low bits of `v`, mirrored.
fn reverse_low(v: u128, bits: u32) -> u128 {
    if bits == 0 {
        0
    } else {
        v.reverse_bits() >> (128 - bits)
    }
}

pub fn gamma_encode(n: u64, endianness: Endianness) -> Result<GammaCode> {
    if n == 0 {
        return Err(Error::InvalidArgument("size header encodes n >= 1".into()));
    }
    let l = bit_len(n);
    let n = n as u128;
    let stored = match endianness {
        Endianness::Big => reverse_low(n, l) << (l - 1),
        Endianness::Little => (1u128 << (l - 1)) | ((n & mask(l - 1)) << l),
    };
    Ok(GammaCode {
        len: 2 * l - 1,
        stored,
        endianness,
    })
}

/// Decodes a code starting at bit 0 of `window`, of which only the low
/// `available` bits are meaningful. Returns `(n, bits consumed)`.
pub fn gamma_decode(window: u128, available: u32, endianness: Endianness) -> Result<(u64, u32)> {
    let available = available.min(128);
    let window = window & mask(available);
    let zeros = match lsb(window) {
        Ok(z) => z,
        Err(_) => return Err(Error::Decode(format!("no terminating 1 in {available} bits"))),
    };
    let l = zeros + 1;
    if l > 64 {
        return Err(Error::Decode(format!("{zeros} leading zeros exceed a word")));
    }
    let len = 2 * l - 1;
    if len > available {
        return Err(Error::Decode(format!("code needs {len} bits, {available} available")));
    }
    let n = match endianness {
        Endianness::Big => reverse_low((window >> (l - 1)) & mask(l), l),
        Endianness::Little => ((window >> l) & mask(l - 1)) | (1u128 << (l - 1)),
    };
    Ok((n as u64, len))
}

/// Decodes a code stored at `offset` without knowing its length: one
/// window read of at most `MAX_CODE_BITS` bits, then [`gamma_decode`].
pub fn gamma_read(store: &BitStore, offset: u64, endianness: Endianness) -> Result<(u64, u32)> {
    let available = store.capacity_bits().saturating_sub(offset).min(MAX_CODE_BITS as u64) as u32;
    if available == 0 {
        return Err(Error::Decode(format!("no bits at offset {offset}")));
    }
    let window = store.read_bits(offset, available)?;
    gamma_decode(window, available, endianness)
}

/// Decodes the textual form. Big-endian text is read from the left,
/// little-endian text from the right.
pub fn gamma_decode_str(text: &str, endianness: Endianness) -> Result<(u64, u32)> {
    let chars: Vec<char> = text.chars().collect();
    if chars.iter().any(|&c| c != '0' && c != '1') {
        return Err(Error::Decode(format!("not a bit string: {text:?}")));
    }
    let take = chars.len().min(128);
    let mut window = 0u128;
    for t in 0..take {
        let c = match endianness {
            Endianness::Big => chars[t],
            Endianness::Little => chars[chars.len() - 1 - t],
        };
        window |= ((c == '1') as u128) << t;
    }
    gamma_decode(window, take as u32, endianness)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Builds the code text straight from the definition.
    fn reference_text(n: u64, e: Endianness) -> String {
        let bin = format!("{n:b}");
        let zeros = "0".repeat(bin.len() - 1);
        match e {
            Endianness::Big => format!("{zeros}{bin}"),
            Endianness::Little => format!("{}1{zeros}", &bin[1..]),
        }
    }

    #[test]
    fn known_codes() {
        assert_eq!(gamma_encode(10, Endianness::Big).unwrap().to_string(), "0001010");
        assert_eq!(gamma_encode(1, Endianness::Big).unwrap().to_string(), "1");
        assert_eq!(gamma_encode(10, Endianness::Little).unwrap().to_string(), "0101000");
        assert_eq!(gamma_encode(1, Endianness::Little).unwrap().to_string(), "1");
        assert!(gamma_encode(0, Endianness::Big).is_err());
    }

    #[test]
    fn matches_definition() {
        for e in [Endianness::Big, Endianness::Little] {
            for n in (1..5000).chain([u64::MAX, u64::MAX / 3, 1 << 63]) {
                let code = gamma_encode(n, e).unwrap();
                assert_eq!(code.to_string(), reference_text(n, e), "n = {n}");
                assert_eq!(code.len, 2 * bit_len(n) - 1);
                assert_eq!(gamma_decode(code.stored, code.len, e).unwrap(), (n, code.len));
                assert_eq!(gamma_decode_str(&code.to_string(), e).unwrap(), (n, code.len));
            }
        }
    }

    #[test]
    fn concatenations_split_cleanly() {
        for e in [Endianness::Big, Endianness::Little] {
            for (a, b) in [(1u64, 1u64), (10, 3), (255, 256), (u64::MAX >> 2, 7)] {
                let ca = gamma_encode(a, e).unwrap();
                let cb = gamma_encode(b, e).unwrap();
                let window = ca.stored | (cb.stored << ca.len);
                let total = ca.len + cb.len;
                let (da, used) = gamma_decode(window, total, e).unwrap();
                assert_eq!((da, used), (a, ca.len));
                let (db, _) = gamma_decode(window >> used, total - used, e).unwrap();
                assert_eq!(db, b);
            }
        }
    }

    #[test]
    fn read_from_store_in_constant_accesses() {
        use crate::bitstore::FillPolicy;
        for e in [Endianness::Big, Endianness::Little] {
            for n in [1u64, 2, 10, 1000, 1 << 20, u64::MAX] {
                let code = gamma_encode(n, e).unwrap();
                let mut s = BitStore::new(code.len as u64 + 200, &FillPolicy::Random(n)).unwrap();
                s.write_bits(0, code.len, code.stored).unwrap();
                s.reset_accesses();
                assert_eq!(gamma_read(&s, 0, e).unwrap(), (n, code.len));
                assert_eq!(s.accesses(), 2);
            }
        }
    }

    #[test]
    fn malformed_windows() {
        for e in [Endianness::Big, Endianness::Little] {
            assert!(matches!(gamma_decode(0, 128, e), Err(Error::Decode(_))));
            assert!(matches!(gamma_decode(1 << 70, 128, e), Err(Error::Decode(_))));
            // Code for 10 truncated to 5 bits.
            let c = gamma_encode(10, e).unwrap();
            assert!(matches!(gamma_decode(c.stored, 5, e), Err(Error::Decode(_))));
            assert!(gamma_decode_str("0x1", e).is_err());
        }
    }
}
