//! Per-operation word accesses of the segment dictionary do not grow with
//! the number of cells.

use choicedict::oracle::{gen_trace, Op, Profile, Universe};
use choicedict::{BarrierMode, FillPolicy, SegDict};

fn worst(cells: u64, mode: BarrierMode) -> [u64; 4] {
    let mut d = SegDict::with_fill(cells, 64, mode, &FillPolicy::Random(cells)).unwrap();
    let init = d.store().accesses();
    let trace = gen_trace(
        cells,
        Universe::Cells { cells, half_bits: 64 },
        6_000,
        Profile::BarrierThrash,
    );
    let (mut write, mut read, mut nonzero) = (0, 0, 0);
    for op in &trace.ops {
        d.store().reset_accesses();
        match *op {
            Op::Write(i, x) => {
                d.write(i, x).unwrap();
                write = write.max(d.store().accesses());
            }
            Op::Read(i) => {
                d.read(i).unwrap();
                read = read.max(d.store().accesses());
            }
            Op::Nonzero => {
                d.nonzero().unwrap();
                nonzero = nonzero.max(d.store().accesses());
            }
            _ => {}
        }
    }
    [init, write, read, nonzero]
}

#[test]
fn ceilings_do_not_grow_with_cell_count() {
    for mode in [BarrierMode::Hidden, BarrierMode::Plain] {
        let small = worst(1 << 4, mode);
        let mid = worst(1 << 10, mode);
        let large = worst(1 << 16, mode);
        assert_eq!(small[0], large[0], "{mode:?} init");
        for k in 1..4 {
            assert!(
                large[k] <= small[k].max(mid[k]) + 8,
                "{mode:?}: {small:?} {mid:?} {large:?}"
            );
        }
        // Write is a fixed sequence of field accesses.
        assert!(large[1] <= 64, "{mode:?}: write took {}", large[1]);
    }
}
