use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use svpart::circuit_file::parse_circuit;
use svpart::dense::{oracle_run, MAX_DENSE_QUBITS};
use svpart::engine::{
    gather_logical, run_circuit_on, time_ratio_secs, CommScheme, DistState, GateStats, RunOptions, Schedule,
};
use svpart::kernel::{ExecMode, ExecStrategy};
use svpart::layout::{communicated_gates, identity_perm, optimize_layout};
use svpart::partition::{comm_pairs, comm_ratio, mem_estimate, needs_comm, PartitionPlan};
use svpart::types::VALIDATION_TOL;
use svpart::{standard_gate, Circuit, SimError};

use crate::output::{state_lines, stats_csv};
use crate::LayoutChoice;

/// Largest register written out in full without `--top-amplitudes`.
const MAX_FULL_DUMP_QUBITS: usize = 20;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Capacity(_) => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult = Result<ExitCode, CliError>;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: 2, message: format!("{}: {e}", path.display()) }
}

fn read_circuit(path: &Path) -> Result<Circuit, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(parse_circuit(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn strategy() -> Result<ExecStrategy, CliError> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    Ok(ExecStrategy::new(ExecMode::ParallelOuter, workers)?)
}

pub struct RunArgs {
    pub circuit: PathBuf,
    pub ranks: usize,
    pub scheme: CommScheme,
    pub layout: LayoutChoice,
    pub schedule: Schedule,
    pub out: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub top_amplitudes: Option<usize>,
}

pub fn run(args: RunArgs) -> CliResult {
    let circuit = read_circuit(&args.circuit)?;
    let n = circuit.num_qubits();
    if n > MAX_FULL_DUMP_QUBITS && args.top_amplitudes.is_none() {
        return Err(CliError {
            code: 3,
            message: format!(
                "{n} qubits exceeds the full-dump limit of {MAX_FULL_DUMP_QUBITS}; pass --top-amplitudes"
            ),
        });
    }
    let plan = PartitionPlan::with_ranks(n, args.ranks)?;
    let layout = match args.layout {
        LayoutChoice::Identity => None,
        LayoutChoice::Auto if plan.rank_bits() == 0 => None,
        LayoutChoice::Auto => Some(optimize_layout(&circuit.gate_histogram(), &plan)?),
    };
    let state = DistState::in_memory(plan)?.with_schedule(args.schedule);
    let opts = RunOptions { scheme: Some(args.scheme), strategy: strategy()?, layout };
    let (state, stats) = run_circuit_on(&circuit, state, &opts)?;
    let result = gather_logical(&state, opts.layout.as_ref())?;
    let lines = state_lines(&result, args.top_amplitudes);

    let stats_path = args.stats.or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".stats.csv");
            PathBuf::from(s)
        })
    });
    match &args.out {
        Some(p) => write_file(p, &lines)?,
        None => print!("{lines}"),
    }
    if let Some(p) = stats_path {
        write_file(&p, &stats_csv(&stats))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(path: &Path, ranks: usize, scheme: CommScheme) -> CliResult {
    let circuit = read_circuit(path)?;
    let n = circuit.num_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(CliError {
            code: 3,
            message: format!("verify is limited to {MAX_DENSE_QUBITS} qubits, circuit has {n}"),
        });
    }
    let plan = PartitionPlan::with_ranks(n, ranks)?;
    let opts = RunOptions { scheme: Some(scheme), strategy: strategy()?, layout: None };
    let (state, _) = run_circuit_on(&circuit, DistState::in_memory(plan)?, &opts)?;
    let got = gather_logical(&state, None)?;
    let want = oracle_run(&circuit)?;
    let dev = got.max_deviation(&want)?;
    println!("max deviation: {dev:e}");
    if dev <= VALIDATION_TOL {
        println!("ok");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAILED (tolerance {VALIDATION_TOL:e})");
        Ok(ExitCode::from(1))
    }
}

pub fn mem(
    qubits: usize,
    ranks: usize,
    scheme: Option<CommScheme>,
    node_bytes: u64,
    bytes_per_amplitude: u64,
) -> CliResult {
    let plan = PartitionPlan::with_ranks(qubits, ranks)?;
    let est = mem_estimate(&plan, scheme, bytes_per_amplitude)?;
    let scheme_name = scheme.map_or_else(|| "none".to_string(), |s| s.to_string());
    println!("qubits               {qubits}");
    println!("ranks                {}", plan.ranks());
    println!("scheme               {scheme_name}");
    println!("bytes_per_amplitude  {bytes_per_amplitude}");
    println!("per_rank_state       {}", est.per_rank_state_bytes);
    println!("per_rank_buffer      {}", est.per_rank_buffer_bytes);
    println!("per_rank_total       {}", est.per_rank_bytes());
    println!("total                {}", est.total_bytes);
    println!("node_bytes           {node_bytes}");
    println!("fits                 {}", est.per_rank_bytes() <= node_bytes);
    println!("max_qubits           {}", est.max_qubits_for(node_bytes));
    Ok(ExitCode::SUCCESS)
}

pub fn pairs(qubits: usize, ranks: usize, qubit: usize) -> CliResult {
    let plan = PartitionPlan::with_ranks(qubits, ranks)?;
    if !needs_comm(&plan, qubit)? {
        println!("no communication");
        return Ok(ExitCode::SUCCESS);
    }
    let mut pairs = comm_pairs(&plan, qubit)?.pairs().to_vec();
    pairs.sort_unstable();
    for (a, b) in pairs {
        println!("{a} <-> {b}");
    }
    Ok(ExitCode::SUCCESS)
}

pub struct BenchArgs {
    pub qubits: usize,
    pub ranks: usize,
    pub scheme: CommScheme,
    pub gate: String,
    pub repeat: usize,
    pub schedule: Schedule,
    pub out: Option<PathBuf>,
    pub dry_run: bool,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

pub fn bench(args: BenchArgs) -> CliResult {
    let plan = PartitionPlan::with_ranks(args.qubits, args.ranks)?;
    let gate = standard_gate(&args.gate)?;
    if args.repeat == 0 {
        return Err(SimError::Validation("--repeat must be at least 1".into()).into());
    }
    if plan.rank_bits() > 0 {
        args.scheme.validate(&plan)?;
    }
    let c = comm_ratio(&plan).map_or_else(|| "n/a".to_string(), |r| r.to_string());
    println!(
        "# qubits = {}, ranks = {}, scheme = {}, gate = {}, repeat = {}",
        args.qubits,
        plan.ranks(),
        args.scheme,
        args.gate.to_ascii_lowercase(),
        args.repeat
    );
    println!("# c = {c}");
    if args.dry_run {
        return Ok(ExitCode::SUCCESS);
    }

    let mut state = DistState::in_memory(plan)?.with_schedule(args.schedule);
    state.reserve_buffers(args.scheme)?;
    let strat = strategy()?;
    let mut rows: Vec<GateStats> = Vec::with_capacity(args.qubits * args.repeat);
    for q in 0..args.qubits {
        for _ in 0..args.repeat {
            rows.push(state.apply_single(&gate, q, args.scheme, strat)?);
        }
    }

    let csv = stats_csv(&rows);
    match &args.out {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }

    println!("# qubit,comm_required,median_wall_time_s,messages_per_rank,bytes_per_rank");
    let mut comm_times = Vec::new();
    let mut local_times = Vec::new();
    for (q, group) in rows.chunks(args.repeat).enumerate() {
        let t = median(group.iter().map(GateStats::wall_time_secs).collect());
        let s = &group[0];
        println!("# {q},{},{t},{},{}", s.comm_required, s.messages_sent_per_rank, s.bytes_sent_per_rank);
        if s.comm_required {
            comm_times.push(t)
        } else {
            local_times.push(t)
        }
    }
    let ratio = if comm_times.is_empty() || local_times.is_empty() {
        None
    } else {
        time_ratio_secs(median(comm_times), median(local_times)).ok()
    };
    match ratio {
        Some(t) => println!("# T = {t:.2}"),
        None => println!("# T = n/a"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn layout(path: &Path, ranks: usize) -> CliResult {
    let circuit = read_circuit(path)?;
    let n = circuit.num_qubits();
    let plan = PartitionPlan::with_ranks(n, ranks)?;
    if plan.rank_bits() == 0 {
        return Err(SimError::Validation("layout needs at least 2 ranks".into()).into());
    }
    let counts = circuit.gate_histogram();
    let before = communicated_gates(&counts, &identity_perm(n)?, &plan);
    let perm = optimize_layout(&counts, &plan)?;
    let after = communicated_gates(&counts, &perm, &plan);
    println!("histogram: {counts:?}");
    println!("phys_to_logical: {:?}", perm.phys_to_logical());
    println!("communicated gates: {before} -> {after}");
    Ok(ExitCode::SUCCESS)
}
