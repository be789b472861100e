//! Configurations and fills shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use choicedict::oracle::workload::{self, OpKind};
use choicedict::{BPolicy, BarrierMode, Config, FillPolicy, Layout, Sizing};

pub const POLICIES: [BPolicy; 5] = [
    BPolicy::TwoWords,
    BPolicy::Word,
    BPolicy::HalfWord,
    BPolicy::Fixed(16),
    BPolicy::Fixed(8),
];

/// Every (b policy, barrier mode) the layout accepts for `n`.
pub fn valid_configs(n: u64) -> Vec<Config> {
    let mut out = Vec::new();
    for policy in POLICIES {
        for mode in [BarrierMode::Hidden, BarrierMode::Plain] {
            if Layout::new(n, policy, mode, Sizing::External).is_ok() {
                out.push(Config::default().with_b_policy(policy).with_barrier(mode));
            }
        }
    }
    out
}

/// Ones, ten random seeds and the crafted fake matchings for `config` at `n`.
pub fn garbage_fills(n: u64, config: &Config) -> Vec<(String, FillPolicy)> {
    let mut fills = vec![("ones".to_string(), FillPolicy::Ones)];
    for seed in 0..10u64 {
        fills.push((format!("random:{seed}"), FillPolicy::Random(0x5eed + seed)));
    }
    let layout = Layout::for_config(n, config).unwrap();
    for (pattern, fill) in choicedict::oracle::crafted_fills(&layout).unwrap() {
        fills.push((format!("crafted:{pattern:?}"), fill));
    }
    fills
}

pub type Ceilings = BTreeMap<OpKind, u64>;

pub fn ceilings(n: u64, config: &Config, ops: usize) -> Ceilings {
    workload::ceilings(n, config, ops).unwrap()
}
