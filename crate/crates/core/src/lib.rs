//! A choice dictionary over `{1..n}` that occupies `n + 1` bits, initializes
//! in constant time over arbitrary memory, and runs insert, delete,
//! membership, choice and iteration steps in constant time.
//!
//! ```
//! use choicedict::{ChoiceDict, Config};
//!
//! let mut d = ChoiceDict::new(1000, &Config::default()).unwrap();
//! assert_eq!(d.footprint_bits(), 1001);
//! d.insert(42).unwrap();
//! d.insert(977).unwrap();
//! assert!(d.contains(42).unwrap());
//! assert_eq!(d.choice().unwrap(), 42);
//! let mut all: Vec<u64> = d.iter().collect();
//! all.sort();
//! assert_eq!(all, vec![42, 977]);
//! ```

pub mod bitstore;
pub mod choicedict;
pub mod error;
pub mod gamma;
pub mod oracle;
pub mod segdict;
pub mod worddict;
pub mod wordops;

pub use bitstore::{BitStore, FillPolicy, WORD_BITS};
pub use choicedict::{BPolicy, ChoiceDict, Config, IterPhase, IterState, Layout, Sizing};
pub use error::{Error, Result};
pub use gamma::{gamma_decode, gamma_decode_str, gamma_encode, gamma_read, Endianness, GammaCode};
pub use segdict::{BarrierMode, Coincidence, Mutant, SegDict, SegLayout, Side, WriteCase};
pub use worddict::{WordDict, WordLayout};
pub use wordops::HalfPair;
