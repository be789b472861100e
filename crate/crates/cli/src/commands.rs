use std::collections::BTreeMap;
use std::io::Read;
use std::time::Instant;

use choicedict::oracle::workload::{adversarial_run, worst_insertion, AccessReport, OpKind};
use choicedict::oracle::{
    crafted_fills, crafted_seg_fills, differential_run, gen_trace, OpTrace, RunOptions, Subject, Universe,
};
use choicedict::{BarrierMode, ChoiceDict, Config, FillPolicy, Layout, SegLayout, Sizing};

use crate::{BenchArgs, FillArg, GenArgs, LayoutArgs, ReplayArgs, SpaceArgs};

const OK: u8 = 0;
const DIVERGED: u8 = 1;
const USAGE: u8 = 2;

fn read_trace(path: &std::path::Path) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn resolve_fill(
    fill: &FillArg,
    crafted: impl FnOnce() -> choicedict::Result<Vec<(choicedict::oracle::CraftedPattern, FillPolicy)>>,
) -> choicedict::Result<FillPolicy> {
    match fill {
        FillArg::Plain(f) => Ok(f.clone()),
        FillArg::Crafted(p) => Ok(crafted()?
            .into_iter()
            .find(|(q, _)| q == p)
            .map(|(_, f)| f)
            .expect("every pattern is generated")),
    }
}

fn subject_for(trace: &OpTrace, layout: &LayoutArgs, fill: &FillArg) -> choicedict::Result<Subject> {
    match trace.universe {
        Universe::Set(n) => {
            let config = layout.config();
            let fill = resolve_fill(fill, || crafted_fills(&Layout::for_config(n, &config)?))?;
            Ok(Subject::Choice(config.with_fill(fill)))
        }
        Universe::Cells { cells, half_bits } => {
            let config = layout.config();
            if config.sizing != Sizing::External {
                return Err(choicedict::Error::InvalidArgument(
                    "cell traces run on a bare segment dictionary; use --mode hidden or plain".into(),
                ));
            }
            let mode = config.barrier;
            let fill = resolve_fill(fill, || crafted_seg_fills(&SegLayout::new(0, cells, half_bits, mode)?))?;
            Ok(Subject::Seg { mode, fill })
        }
    }
}

pub fn replay(a: &ReplayArgs) -> u8 {
    let text = match read_trace(&a.trace) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", a.trace.display());
            return USAGE;
        }
    };
    let trace = match OpTrace::parse(&text, a.n.map(Universe::Set)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let report = match subject_for(&trace, &a.layout, &a.fill).and_then(|s| {
        let opts = RunOptions::thorough().with_mutant(a.mutant.map(Into::into));
        differential_run(&trace, &s, &opts)
    }) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    if a.machine_readable {
        println!("{}", report.summary());
    } else {
        print!("{report}");
        if !report.to_string().ends_with('\n') {
            println!();
        }
    }
    if report.passed() {
        OK
    } else {
        DIVERGED
    }
}

/// Footprint the mode promises for `n`.
fn expected_footprint(n: u64, config: &Config) -> (u64, &'static str) {
    let bit_len = (64 - n.leading_zeros()) as u64;
    match (config.barrier, config.sizing) {
        (BarrierMode::Hidden, Sizing::External) => (n + 1, "n+1"),
        (BarrierMode::Hidden, Sizing::SelfContained(_)) => (n + 2 * bit_len, "n+2*ceil(log2(n+1))"),
        (BarrierMode::Plain, Sizing::External) => (n + 64, "n+W"),
        (BarrierMode::Plain, Sizing::SelfContained(_)) => (n + 64 + 2 * bit_len - 1, "n+W+2*ceil(log2(n+1))-1"),
    }
}

struct BenchRow {
    n: u64,
    layout: Layout,
    footprint: u64,
    expected: u64,
    formula: &'static str,
    report: AccessReport,
    worst_insert: Option<u64>,
    secs: f64,
}

impl BenchRow {
    fn ceilings(&self) -> BTreeMap<OpKind, u64> {
        let mut c = self.report.ceilings();
        if let Some(w) = self.worst_insert {
            let e = c.entry(OpKind::Insert).or_default();
            *e = (*e).max(w);
        }
        c
    }
}

fn bench_one(n: u64, a: &BenchArgs) -> choicedict::Result<BenchRow> {
    let config = a.layout.config();
    let layout = Layout::for_config(n, &config)?;
    let fill = resolve_fill(&a.fill, || crafted_fills(&layout))?;
    let config = config.with_fill(fill);
    let start = Instant::now();
    let report = adversarial_run(n, &config, a.seed, a.ops as usize)?;
    let worst_insert = worst_insertion(n, &config)?;
    let secs = start.elapsed().as_secs_f64();
    let footprint = ChoiceDict::new(n, &config)?.footprint_bits();
    let (expected, formula) = expected_footprint(n, &config);
    Ok(BenchRow {
        n,
        layout,
        footprint,
        expected,
        formula,
        report,
        worst_insert,
        secs,
    })
}

pub fn bench(a: &BenchArgs) -> u8 {
    let mut rows = Vec::new();
    for &n in &a.n {
        match bench_one(n, a) {
            Ok(r) => rows.push(r),
            Err(e) => {
                eprintln!("error: n={n}: {e}");
                return USAGE;
            }
        }
    }
    let mode = a.layout.mode_name();
    for r in &rows {
        let b = r.layout.half_bits;
        let footprint_ok = r.footprint == r.expected;
        if a.machine_readable {
            println!(
                "n={} b={b} mode={mode} segments={} footprint={} expected={} footprint_ok={footprint_ok} wall_s={:.3}",
                r.n, r.layout.cells, r.footprint, r.expected, r.secs
            );
            for (kind, s) in &r.report.ops {
                println!(
                    "n={} op={kind} count={} max={} mean={:.3} ns_per_op={:.1}",
                    r.n,
                    s.count,
                    s.max_accesses,
                    s.mean_accesses(),
                    s.mean_nanos()
                );
            }
            match r.worst_insert {
                Some(w) => println!("n={} op=insert_worst_path max={w}", r.n),
                None => println!("n={} op=insert_worst_path max=na", r.n),
            }
        } else {
            println!(
                "n={} b={b} mode={mode} segments={} ops={} seed={}",
                r.n, r.layout.cells, a.ops, a.seed
            );
            println!(
                "  footprint {} bits, expected {} = {}: {}",
                r.footprint,
                r.formula,
                r.expected,
                if footprint_ok { "ok" } else { "MISMATCH" }
            );
            println!(
                "  {:<10} {:>9} {:>5} {:>7} {:>9}",
                "op", "count", "max", "mean", "ns/op"
            );
            for (kind, s) in &r.report.ops {
                println!(
                    "  {:<10} {:>9} {:>5} {:>7.2} {:>9.1}",
                    kind.name(),
                    s.count,
                    s.max_accesses,
                    s.mean_accesses(),
                    s.mean_nanos()
                );
            }
            match r.worst_insert {
                Some(w) => println!("  constructed worst insertion: {w} accesses"),
                None => println!("  constructed worst insertion: n/a (fewer than 6 segments)"),
            }
            println!("  wall time {:.3} s", r.secs);
        }
    }

    let ceilings: Vec<BTreeMap<OpKind, u64>> = rows.iter().map(BenchRow::ceilings).collect();
    let mut differing = Vec::new();
    for kind in OpKind::ALL {
        let vals: Vec<u64> = ceilings.iter().map(|c| c.get(&kind).copied().unwrap_or(0)).collect();
        if vals.windows(2).any(|w| w[0] != w[1]) {
            let per: Vec<String> = rows.iter().zip(&vals).map(|(r, v)| format!("{}@{}", v, r.n)).collect();
            differing.push(format!("{kind} {}", per.join(" ")));
        }
    }
    let init_equal = !differing.iter().any(|d| d.starts_with("init "));
    let footprints_ok = rows.iter().all(|r| r.footprint == r.expected);
    if a.machine_readable {
        println!(
            "constant_time={} init_equal={init_equal} footprints_ok={footprints_ok}",
            differing.is_empty()
        );
    } else {
        if differing.is_empty() {
            println!("max accesses equal across all n: ok");
        } else {
            println!("max accesses equal across all n: DIFFERS ({})", differing.join("; "));
            if rows.iter().any(|r| r.worst_insert.is_none() && r.layout.cells > 0) {
                println!("  note: some n have fewer than 6 segments, too few to host the most expensive write paths");
            }
        }
        println!(
            "init accesses equal across all n: {}",
            if init_equal { "ok" } else { "DIFFERS" }
        );
        println!(
            "footprints match formula: {}",
            if footprints_ok { "ok" } else { "MISMATCH" }
        );
    }
    OK
}

pub fn space(a: &SpaceArgs) -> u8 {
    let config = a.layout.config();
    let layout = match Layout::for_config(a.n, &config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    // The accountant is the store the dictionary actually allocates.
    let allocated = match ChoiceDict::new(a.n, &config) {
        Ok(d) => d.footprint_bits(),
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    debug_assert_eq!(allocated, layout.total_bits());
    let mode = a.layout.mode_name();
    if a.machine_readable {
        println!(
            "n={} b={} mode={mode} segments={} {layout}",
            a.n, layout.half_bits, layout.cells
        );
    } else {
        let shape = if layout.is_tail_only() {
            "tail only".to_string()
        } else {
            format!("{} segments of {} bits", layout.cells, 2 * layout.half_bits)
        };
        println!(
            "n={} b={} mode={mode}: {shape}, tail universe {}",
            a.n, layout.half_bits, layout.tail_bits
        );
        println!("{layout}");
    }
    OK
}

pub fn gen(a: &GenArgs) -> u8 {
    print!("{}", gen_trace(a.seed, a.n, a.ops, a.profile));
    OK
}
