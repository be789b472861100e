mod common;

use choicedict::oracle::{
    differential_run, gen_trace, NaiveSet, OpTrace, Profile, RunOptions, SeqOracle, Subject, Universe,
};
use choicedict::{BarrierMode, ChoiceDict, Config, Endianness, FillPolicy, HalfPair, SegDict, Sizing};
use common::valid_configs;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum SetOp {
    Insert(u64),
    Delete(u64),
    Contains(u64),
    Choice,
    Iterate,
}

fn set_op(n: u64) -> impl Strategy<Value = SetOp> {
    prop_oneof![
        4 => (1..=n).prop_map(SetOp::Insert),
        3 => (1..=n).prop_map(SetOp::Delete),
        2 => (1..=n).prop_map(SetOp::Contains),
        1 => Just(SetOp::Choice),
        1 => Just(SetOp::Iterate),
    ]
}

fn fill() -> impl Strategy<Value = FillPolicy> {
    prop_oneof![
        Just(FillPolicy::Zeros),
        Just(FillPolicy::Ones),
        any::<u64>().prop_map(FillPolicy::Random),
    ]
}

fn case() -> impl Strategy<Value = (u64, usize, FillPolicy, Vec<SetOp>)> {
    (1u64..=700).prop_flat_map(|n| {
        let configs = valid_configs(n).len();
        (Just(n), 0..configs, fill(), prop::collection::vec(set_op(n), 0..120))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn choice_dict_matches_naive_set((n, ci, fill, ops) in case()) {
        let config = valid_configs(n)[ci].clone().with_fill(fill);
        let mut d = ChoiceDict::new(n, &config).unwrap();
        let mut oracle = NaiveSet::new(n);
        for op in ops {
            match op {
                SetOp::Insert(l) => {
                    d.insert(l).unwrap();
                    oracle.insert(l);
                }
                SetOp::Delete(l) => {
                    d.delete(l).unwrap();
                    oracle.delete(l);
                }
                SetOp::Contains(l) => prop_assert_eq!(d.contains(l).unwrap(), oracle.contains(l)),
                SetOp::Choice => {
                    let c = d.choice().unwrap();
                    if oracle.is_empty() {
                        prop_assert_eq!(c, 0);
                    } else {
                        prop_assert!(oracle.contains(c), "choice {} is not a member", c);
                    }
                }
                SetOp::Iterate => {
                    let mut got: Vec<u64> = d.iter().collect();
                    got.sort_unstable();
                    prop_assert_eq!(got, oracle.iter().collect::<Vec<_>>());
                }
            }
            d.check_invariants().unwrap();
        }
    }

    #[test]
    fn segdict_matches_plain_array(
        cells in 1u64..=12,
        mode in prop_oneof![Just(BarrierMode::Hidden), Just(BarrierMode::Plain)],
        fill in fill(),
        writes in prop::collection::vec((1u64..=12, 0u128..4, 0u128..256), 0..80),
    ) {
        let mut d = SegDict::with_fill(cells, 8, mode, &fill).unwrap();
        let mut oracle = SeqOracle::new(cells);
        for (i, lo, hi) in writes {
            let i = (i - 1) % cells + 1;
            // Zero upper halves half of the time so that zeros stay common.
            let x = HalfPair::new(lo, if hi < 128 { 0 } else { hi });
            d.write(i, x).unwrap();
            oracle.write(i, x);
            d.check_invariants().unwrap();
            prop_assert_eq!(d.values().unwrap(), oracle.values().to_vec());
        }
    }
}

#[test]
fn generated_traces_agree_for_self_contained_sizing() {
    for e in [Endianness::Big, Endianness::Little] {
        for n in [1u64, 2, 255, 256, 257, 1_000, 33_000] {
            let config = Config::default()
                .with_sizing(Sizing::SelfContained(e))
                .with_fill(FillPolicy::Ones);
            for profile in [Profile::Uniform, Profile::BarrierThrash] {
                let trace = gen_trace(n, Universe::Set(n), 1_500, profile);
                let r = differential_run(&trace, &Subject::Choice(config.clone()), &RunOptions::thorough()).unwrap();
                assert!(r.passed(), "{e:?} n={n}: {r}");
            }
        }
    }
}

#[test]
fn sweeping_reads_after_every_op_on_cells() {
    for cells in 1..=6u64 {
        for mode in [BarrierMode::Hidden, BarrierMode::Plain] {
            let trace = gen_trace(
                cells,
                Universe::Cells { cells, half_bits: 8 },
                600,
                Profile::BarrierThrash,
            );
            let opts = RunOptions {
                sweep_reads: true,
                ..RunOptions::thorough()
            };
            let r = differential_run(
                &trace,
                &Subject::Seg {
                    mode,
                    fill: FillPolicy::Random(cells),
                },
                &opts,
            )
            .unwrap();
            assert!(r.passed(), "{r}");
        }
    }
}

#[test]
fn rendered_traces_replay_identically() {
    let trace = gen_trace(77, Universe::Set(3_000), 400, Profile::InsertHeavy);
    let text = trace.to_string();
    let back = OpTrace::parse(&text, None).unwrap();
    assert_eq!(back, trace);
    let subject = Subject::Choice(Config::default());
    let a = differential_run(&trace, &subject, &RunOptions::default()).unwrap();
    let b = differential_run(&back, &subject, &RunOptions::default()).unwrap();
    assert_eq!(a.summary(), b.summary());
}
