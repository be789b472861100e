use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::wordops::{mask, HalfPair};

/// What a trace runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Universe {
    /// A choice dictionary over `{1..n}`.
    Set(u64),
    /// A segment dictionary of `cells` entries of `2 * half_bits` bits.
    Cells { cells: u64, half_bits: u32 },
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Set(n) => write!(f, "{n}"),
            Universe::Cells { cells, half_bits } => write!(f, "cells:{cells}x{half_bits}"),
        }
    }
}

impl FromStr for Universe {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(rest) = s.strip_prefix("cells:") {
            let (c, b) = rest.split_once('x').ok_or("expected cells:<N>x<b>")?;
            let cells = c.parse().map_err(|_| format!("bad cell count {c:?}"))?;
            let half_bits = b.parse().map_err(|_| format!("bad half width {b:?}"))?;
            if cells == 0 || half_bits == 0 {
                return Err("cell count and half width must be positive".into());
            }
            Ok(Universe::Cells { cells, half_bits })
        } else {
            match s.parse() {
                Ok(0) | Err(_) => Err(format!("bad universe size {s:?}")),
                Ok(n) => Ok(Universe::Set(n)),
            }
        }
    }
}

/// One step of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Insert(u64),
    Delete(u64),
    Contains(u64),
    Choice,
    /// Run a whole iteration and compare the collected elements.
    IterateAll,
    Write(u64, HalfPair),
    Read(u64),
    Nonzero,
}

impl Op {
    /// Formats the op; `half_bits` is needed to render written values.
    pub fn render(&self, half_bits: u32) -> String {
        match self {
            Op::Insert(l) => format!("insert {l}"),
            Op::Delete(l) => format!("delete {l}"),
            Op::Contains(l) => format!("contains {l}"),
            Op::Choice => "choice".into(),
            Op::IterateAll => "iterate".into(),
            Op::Write(i, x) => format!("write {i} {}", x.to_hex(half_bits)),
            Op::Read(i) => format!("read {i}"),
            Op::Nonzero => "nonzero".into(),
        }
    }

    fn parse(line: &str, half_bits: u32) -> std::result::Result<Self, String> {
        let mut parts = line.split_whitespace();
        let name = parts.next().ok_or("empty line")?;
        let args: Vec<&str> = parts.collect();
        let want = |count: usize| -> std::result::Result<(), String> {
            if args.len() != count {
                Err(format!("{name} takes {count} argument(s), got {}", args.len()))
            } else {
                Ok(())
            }
        };
        let index = |s: &str| s.parse::<u64>().map_err(|_| format!("bad index {s:?}"));
        Ok(match name {
            "insert" | "delete" | "contains" | "read" => {
                want(1)?;
                let l = index(args[0])?;
                match name {
                    "insert" => Op::Insert(l),
                    "delete" => Op::Delete(l),
                    "contains" => Op::Contains(l),
                    _ => Op::Read(l),
                }
            }
            "choice" | "iterate" | "nonzero" => {
                want(0)?;
                match name {
                    "choice" => Op::Choice,
                    "iterate" => Op::IterateAll,
                    _ => Op::Nonzero,
                }
            }
            "write" => {
                want(2)?;
                let x = HalfPair::parse(args[1], half_bits).map_err(|e| e.to_string())?;
                Op::Write(index(args[0])?, x)
            }
            other => return Err(format!("unknown op {other:?}")),
        })
    }
}

/// A replayable operation sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpTrace {
    pub universe: Universe,
    pub seed: u64,
    pub ops: Vec<Op>,
}

impl OpTrace {
    fn half_bits(&self) -> u32 {
        match self.universe {
            Universe::Cells { half_bits, .. } => half_bits,
            Universe::Set(_) => 128,
        }
    }

    /// Parses the text format. The `universe=... seed=...` header line is
    /// optional when `default_universe` is given.
    pub fn parse(text: &str, default_universe: Option<Universe>) -> Result<Self> {
        let mut universe = default_universe;
        let mut seed = 0;
        let mut ops = Vec::new();
        let mut seen_content = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            if !seen_content && line.starts_with("universe=") {
                seen_content = true;
                for field in line.split_whitespace() {
                    let (key, value) = field
                        .split_once('=')
                        .ok_or_else(|| perr(format!("expected key=value, got {field:?}")))?;
                    match key {
                        "universe" => universe = Some(value.parse().map_err(perr)?),
                        "seed" => {
                            seed = value.parse().map_err(|_| perr(format!("bad seed {value:?}")))?;
                        }
                        other => return Err(perr(format!("unknown header key {other:?}"))),
                    }
                }
                continue;
            }
            seen_content = true;
            let half_bits = match universe {
                Some(Universe::Cells { half_bits, .. }) => half_bits,
                _ => 128,
            };
            ops.push(Op::parse(line, half_bits).map_err(perr)?);
        }
        let universe = universe.ok_or(Error::Parse {
            line: 1,
            msg: "missing universe header".into(),
        })?;
        Ok(Self { universe, seed, ops })
    }
}

impl fmt::Display for OpTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "universe={} seed={}", self.universe, self.seed)?;
        let b = self.half_bits();
        for op in &self.ops {
            writeln!(f, "{}", op.render(b))?;
        }
        Ok(())
    }
}

/// Shape of a generated trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    Uniform,
    InsertHeavy,
    /// Insertions and deletions concentrated at the barrier, driving the
    /// coincidence cases of the write procedure.
    BarrierThrash,
    /// The `seed`-th write sequence in the enumeration over values `{0,1,2}`
    /// (see also [`super::exhaustive_segdict`]).
    ExhaustiveSmall,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(Profile::Uniform),
            "insert-heavy" => Ok(Profile::InsertHeavy),
            "barrier-thrash" => Ok(Profile::BarrierThrash),
            "exhaustive-small" => Ok(Profile::ExhaustiveSmall),
            other => Err(format!("unknown profile {other:?}")),
        }
    }
}

fn random_value(rng: &mut ChaCha8Rng, half_bits: u32) -> HalfPair {
    let m = mask(half_bits);
    let v = match rng.gen_range(0..4) {
        // Small values keep upper halves mostly zero.
        0 => HalfPair::new(rng.gen_range(1..=3), 0),
        // Upper half only: a strong left cell with a zero lower half.
        1 => HalfPair::new(0, rng.gen::<u128>() & m),
        _ => HalfPair::new(rng.gen::<u128>() & m, rng.gen::<u128>() & m),
    };
    if v.is_zero() {
        HalfPair::new(1, 0)
    } else {
        v
    }
}

/// Deterministic trace of `length` ops for `universe`.
pub fn gen_trace(seed: u64, universe: Universe, length: usize, profile: Profile) -> OpTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops = match universe {
        Universe::Set(n) => set_ops(&mut rng, n, length, profile),
        Universe::Cells { cells, half_bits } => cell_ops(&mut rng, cells, half_bits, length, profile, seed),
    };
    OpTrace { universe, seed, ops }
}

fn set_ops(rng: &mut ChaCha8Rng, n: u64, length: usize, profile: Profile) -> Vec<Op> {
    // Whole iterations cost O(n); keep them to a few hundred elements per op
    // on average.
    let iterate_weight = (200.0 / n as f64).min(0.03);
    let pool: Vec<u64> = (0..12).map(|_| rng.gen_range(1..=n)).collect();
    let mut ops = Vec::with_capacity(length);
    let mut live = Vec::new();
    for _ in 0..length {
        let pick = |rng: &mut ChaCha8Rng| match profile {
            Profile::BarrierThrash | Profile::ExhaustiveSmall => pool[rng.gen_range(0..pool.len())],
            _ => rng.gen_range(1..=n),
        };
        // The rest of the mass goes to choice().
        let (w_ins, w_del, w_has) = match profile {
            Profile::InsertHeavy => (0.60, 0.15, 0.15),
            Profile::BarrierThrash => (0.40, 0.40, 0.10),
            _ => (0.35, 0.25, 0.25),
        };
        let r: f64 = rng.gen();
        let op = if r < w_ins {
            let l = pick(rng);
            live.push(l);
            Op::Insert(l)
        } else if r < w_ins + w_del {
            // Deleting a recent insertion makes deletions bite.
            let l = if !live.is_empty() && rng.gen_bool(0.7) {
                live.swap_remove(rng.gen_range(0..live.len()))
            } else {
                pick(rng)
            };
            Op::Delete(l)
        } else if r < w_ins + w_del + w_has {
            Op::Contains(pick(rng))
        } else if r < w_ins + w_del + w_has + iterate_weight {
            Op::IterateAll
        } else {
            Op::Choice
        };
        ops.push(op);
    }
    ops
}

fn cell_ops(rng: &mut ChaCha8Rng, cells: u64, half_bits: u32, length: usize, profile: Profile, seed: u64) -> Vec<Op> {
    if profile == Profile::ExhaustiveSmall {
        // Decode the seed in base 3N: each digit is one write(i, v), v in {0,1,2}.
        let base = 3 * cells;
        let mut code = seed;
        return (0..length)
            .map(|_| {
                let digit = code % base;
                code /= base;
                Op::Write(digit / 3 + 1, HalfPair::new((digit % 3) as u128, 0))
            })
            .collect();
    }
    // The generator tracks the sequence itself so that it knows the barrier,
    // which always equals the number of zero entries.
    let mut seq = super::SeqOracle::new(cells);
    let mut ops = Vec::with_capacity(length);
    for _ in 0..length {
        let r: f64 = rng.gen();
        let op = match profile {
            Profile::BarrierThrash if r < 0.85 => {
                let k = seq.zeros() as u64;
                let i = match rng.gen_range(0..5) {
                    0 | 1 => k.max(1),
                    2 | 3 => (k + 1).min(cells),
                    _ => rng.gen_range(1..=cells),
                };
                let x = if seq.read(i).is_zero() {
                    random_value(rng, half_bits)
                } else {
                    HalfPair::ZERO
                };
                Op::Write(i, x)
            }
            Profile::InsertHeavy if r < 0.7 => {
                let i = rng.gen_range(1..=cells);
                let x = if rng.gen_bool(0.8) {
                    random_value(rng, half_bits)
                } else {
                    HalfPair::ZERO
                };
                Op::Write(i, x)
            }
            _ if r < 0.6 => {
                let i = rng.gen_range(1..=cells);
                let x = if rng.gen_bool(0.5) {
                    random_value(rng, half_bits)
                } else {
                    HalfPair::ZERO
                };
                Op::Write(i, x)
            }
            _ if r < 0.85 => Op::Read(rng.gen_range(1..=cells)),
            _ if r < 0.97 => Op::Nonzero,
            _ => Op::IterateAll,
        };
        if let Op::Write(i, x) = op {
            seq.write(i, x);
        }
        ops.push(op);
    }
    ops
}
