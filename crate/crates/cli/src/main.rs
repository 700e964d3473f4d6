//! `svpart`: run, verify and inspect partitioned state-vector simulations.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use svpart::engine::{CommScheme, Schedule};

#[derive(Parser)]
#[command(name = "svpart", version, about = "Partitioned state-vector quantum circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LayoutChoice {
    Identity,
    Auto,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScheduleChoice {
    Threaded,
    Cooperative,
}

impl From<ScheduleChoice> for Schedule {
    fn from(s: ScheduleChoice) -> Self {
        match s {
            ScheduleChoice::Threaded => Schedule::Threaded,
            ScheduleChoice::Cooperative => Schedule::Cooperative,
        }
    }
}

fn parse_scheme(s: &str) -> Result<CommScheme, String> {
    s.parse().map_err(|e: svpart::SimError| e.to_string())
}

/// Exchange scheme for memory sizing; `None` means no exchange buffer.
#[derive(Clone, Copy, Debug)]
struct MemScheme(Option<CommScheme>);

fn parse_mem_scheme(s: &str) -> Result<MemScheme, String> {
    if s.eq_ignore_ascii_case("none") {
        Ok(MemScheme(None))
    } else {
        parse_scheme(s).map(|s| MemScheme(Some(s)))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a circuit file on the distributed engine.
    Run {
        circuit: PathBuf,
        /// Number of ranks (a power of two).
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        /// a, b or chunked:<m>
        #[arg(long, default_value = "b", value_parser = parse_scheme)]
        scheme: CommScheme,
        #[arg(long, value_enum, default_value_t = LayoutChoice::Identity)]
        layout: LayoutChoice,
        #[arg(long, value_enum, default_value_t = ScheduleChoice::Threaded)]
        schedule: ScheduleChoice,
        /// Final amplitudes as `index,re,im` lines; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-gate statistics CSV; defaults to `<out>.stats.csv` when --out is given.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Only write the N largest-magnitude amplitudes (required above 20 qubits).
        #[arg(long)]
        top_amplitudes: Option<usize>,
    },
    /// Run engine and dense oracle side by side and report the largest deviation.
    Verify {
        circuit: PathBuf,
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        #[arg(long, default_value = "b", value_parser = parse_scheme)]
        scheme: CommScheme,
    },
    /// Memory needed per rank and the largest register that fits on a node.
    Mem {
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        /// none, a, b or chunked:<m>
        #[arg(long, default_value = "none", value_parser = parse_mem_scheme)]
        scheme: MemScheme,
        #[arg(long, default_value_t = 1u64 << 37)]
        node_bytes: u64,
        #[arg(long, default_value_t = 16)]
        bytes_per_amplitude: u64,
    },
    /// Rank pairs that exchange data for a gate on one qubit.
    Pairs {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        ranks: usize,
        #[arg(long)]
        qubit: usize,
    },
    /// Time one gate on every qubit and report the communication ratios.
    Bench {
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        #[arg(long, default_value = "b", value_parser = parse_scheme)]
        scheme: CommScheme,
        #[arg(long, default_value = "x")]
        gate: String,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        #[arg(long, value_enum, default_value_t = ScheduleChoice::Threaded)]
        schedule: ScheduleChoice,
        /// Write the per-application CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the configuration and ratio only.
        #[arg(long)]
        dry_run: bool,
    },
    /// Gate histogram and the communication-minimizing qubit layout.
    Layout {
        circuit: PathBuf,
        #[arg(long)]
        ranks: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { circuit, ranks, scheme, layout, schedule, out, stats, top_amplitudes } => {
            commands::run(commands::RunArgs {
                circuit,
                ranks,
                scheme,
                layout,
                schedule: schedule.into(),
                out,
                stats,
                top_amplitudes,
            })
        }
        Command::Verify { circuit, ranks, scheme } => commands::verify(&circuit, ranks, scheme),
        Command::Mem { qubits, ranks, scheme, node_bytes, bytes_per_amplitude } => {
            commands::mem(qubits, ranks, scheme.0, node_bytes, bytes_per_amplitude)
        }
        Command::Pairs { qubits, ranks, qubit } => commands::pairs(qubits, ranks, qubit),
        Command::Bench { qubits, ranks, scheme, gate, repeat, schedule, out, dry_run } => {
            commands::bench(commands::BenchArgs {
                qubits,
                ranks,
                scheme,
                gate,
                repeat,
                schedule: schedule.into(),
                out,
                dry_run,
            })
        }
        Command::Layout { circuit, ranks } => commands::layout(&circuit, ranks),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
