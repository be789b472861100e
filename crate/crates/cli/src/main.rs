use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use choicedict::oracle::{CraftedPattern, Profile, Universe};
use choicedict::{BPolicy, BarrierMode, Config, Endianness, FillPolicy, Mutant, Sizing};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "choicedict",
    version,
    about = "Replay traces, benchmark and inspect the n+1-bit choice dictionary"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replay a trace against the dictionary and a naive oracle.
    Replay(ReplayArgs),
    /// Measure word accesses and time per operation over an adversarial workload.
    Bench(BenchArgs),
    /// Print the bit layout for a universe size.
    Space(SpaceArgs),
    /// Write a generated trace to stdout.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone)]
struct LayoutArgs {
    /// Half width b of a segment.
    #[arg(long, value_enum, default_value_t = BPolicyArg::TwoW)]
    b_policy: BPolicyArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Hidden)]
    mode: ModeArg,
    /// Header bit order for --mode self-contained.
    #[arg(long, value_enum, default_value_t = EndianArg::Big)]
    endian: EndianArg,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Trace file; "-" reads stdin.
    #[arg(long)]
    trace: PathBuf,
    /// Universe size for traces without a header line.
    #[arg(long)]
    n: Option<u64>,
    #[command(flatten)]
    layout: LayoutArgs,
    /// Initial memory: zeros, ones, random:SEED or crafted[:PATTERN].
    #[arg(long, default_value = "zeros")]
    fill: FillArg,
    #[arg(long)]
    machine_readable: bool,
    /// Install a broken write path; needs a build with fault injection.
    #[arg(long, value_enum, hide = true)]
    mutant: Option<MutantArg>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated universe sizes; powers of two may be written 2^k.
    #[arg(long, value_delimiter = ',', default_value = "2^10,2^16,2^22", value_parser = parse_size)]
    n: Vec<u64>,
    #[command(flatten)]
    layout: LayoutArgs,
    #[arg(long, default_value = "zeros")]
    fill: FillArg,
    /// Workload steps per universe size.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    ops: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    machine_readable: bool,
}

#[derive(Args, Debug)]
struct SpaceArgs {
    #[arg(long, value_parser = parse_size)]
    n: u64,
    #[command(flatten)]
    layout: LayoutArgs,
    #[arg(long)]
    machine_readable: bool,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Universe: a size n, or cells:NxB for a bare segment dictionary.
    #[arg(long)]
    n: Universe,
    #[arg(long, default_value_t = 1_000)]
    ops: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// uniform, insert-heavy, barrier-thrash or exhaustive-small.
    #[arg(long, default_value = "uniform")]
    profile: Profile,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BPolicyArg {
    #[value(name = "2w")]
    TwoW,
    #[value(name = "w")]
    W,
    #[value(name = "w/2")]
    HalfW,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Hidden,
    Plain,
    SelfContained,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MutantArg {
    SkipSpuriousEdgeSever,
    ClobberHiddenField,
    SkipCrossingRestore,
    SkipInsertRematch,
    SkipLowerCopy,
    SkipDeleteRematch,
    SkipDeleteRestore,
    MateIgnoresBarrier,
    NonzeroReturnsLast,
}

impl From<MutantArg> for Mutant {
    fn from(m: MutantArg) -> Self {
        match m {
            MutantArg::SkipSpuriousEdgeSever => Mutant::SkipSpuriousEdgeSever,
            MutantArg::ClobberHiddenField => Mutant::ClobberHiddenField,
            MutantArg::SkipCrossingRestore => Mutant::SkipCrossingRestore,
            MutantArg::SkipInsertRematch => Mutant::SkipInsertRematch,
            MutantArg::SkipLowerCopy => Mutant::SkipLowerCopy,
            MutantArg::SkipDeleteRematch => Mutant::SkipDeleteRematch,
            MutantArg::SkipDeleteRestore => Mutant::SkipDeleteRestore,
            MutantArg::MateIgnoresBarrier => Mutant::MateIgnoresBarrier,
            MutantArg::NonzeroReturnsLast => Mutant::NonzeroReturnsLast,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EndianArg {
    Big,
    Little,
}

/// Fill as given on the command line. Crafted images depend on the layout,
/// so they are built once `n` is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FillArg {
    Plain(FillPolicy),
    Crafted(CraftedPattern),
}

impl std::str::FromStr for FillArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zeros" => return Ok(FillArg::Plain(FillPolicy::Zeros)),
            "ones" => return Ok(FillArg::Plain(FillPolicy::Ones)),
            "crafted" => return Ok(FillArg::Crafted(CraftedPattern::AdjacentPairs)),
            _ => {}
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed.parse().map_err(|_| format!("bad seed in {s:?}"))?;
            return Ok(FillArg::Plain(FillPolicy::Random(seed)));
        }
        if let Some(p) = s.strip_prefix("crafted:") {
            let pattern = match p {
                "adjacent" => CraftedPattern::AdjacentPairs,
                "mirror" => CraftedPattern::MirrorPairs,
                "all-to-last" => CraftedPattern::AllToLast,
                "self" => CraftedPattern::SelfPoint,
                _ => {
                    return Err(format!(
                        "unknown crafted pattern {p:?} (adjacent, mirror, all-to-last, self)"
                    ))
                }
            };
            return Ok(FillArg::Crafted(pattern));
        }
        Err(format!(
            "unknown fill {s:?} (zeros, ones, random:SEED, crafted[:PATTERN])"
        ))
    }
}

fn parse_size(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix("2^") {
        let k: u32 = k.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
        return 1u64
            .checked_shl(k)
            .filter(|_| k < 64)
            .ok_or_else(|| format!("{s} does not fit in 64 bits"));
    }
    s.replace('_', "").parse().map_err(|_| format!("bad size {s:?}"))
}

impl LayoutArgs {
    fn config(&self) -> Config {
        let b_policy = match self.b_policy {
            BPolicyArg::TwoW => BPolicy::TwoWords,
            BPolicyArg::W => BPolicy::Word,
            BPolicyArg::HalfW => BPolicy::HalfWord,
        };
        let endian = match self.endian {
            EndianArg::Big => Endianness::Big,
            EndianArg::Little => Endianness::Little,
        };
        let (barrier, sizing) = match self.mode {
            ModeArg::Hidden => (BarrierMode::Hidden, Sizing::External),
            ModeArg::Plain => (BarrierMode::Plain, Sizing::External),
            ModeArg::SelfContained => (BarrierMode::Hidden, Sizing::SelfContained(endian)),
        };
        Config::default()
            .with_b_policy(b_policy)
            .with_barrier(barrier)
            .with_sizing(sizing)
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            ModeArg::Hidden => "hidden",
            ModeArg::Plain => "plain",
            ModeArg::SelfContained => "self-contained",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Replay(a) => commands::replay(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Space(a) => commands::space(&a),
        Command::Gen(a) => commands::gen(&a),
    };
    ExitCode::from(code)
}
