use std::fmt::Write as _;

use svpart::engine::GateStats;
use svpart::StateVector;

pub const STATS_HEADER: &str =
    "gate_index,qubit,control,comm_required,messages_per_rank,bytes_per_rank,wall_time_s";

/// Shortest round-trip decimal; negative zero prints as `0`.
pub fn real(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        x.to_string()
    }
}

/// `index,re,im` lines for the selected indices (all when `top` is `None`).
pub fn state_lines(state: &StateVector, top: Option<usize>) -> String {
    let amps = state.amplitudes();
    let mut indices: Vec<usize> = (0..amps.len()).collect();
    if let Some(keep) = top {
        indices.sort_by(|&a, &b| amps[b].norm_sqr().total_cmp(&amps[a].norm_sqr()).then(a.cmp(&b)));
        indices.truncate(keep);
        indices.sort_unstable();
    }
    let mut out = String::new();
    for j in indices {
        writeln!(out, "{j},{},{}", real(amps[j].re), real(amps[j].im)).unwrap();
    }
    out
}

fn stats_row(index: usize, s: &GateStats) -> String {
    format!(
        "{index},{},{},{},{},{},{}",
        s.qubit,
        s.control.map(|c| c.to_string()).unwrap_or_default(),
        s.comm_required,
        s.messages_sent_per_rank,
        s.bytes_sent_per_rank,
        s.wall_time_secs()
    )
}

pub fn stats_csv<'a>(rows: impl IntoIterator<Item = &'a GateStats>) -> String {
    let mut out = format!("{STATS_HEADER}\n");
    for (i, s) in rows.into_iter().enumerate() {
        out.push_str(&stats_row(i, s));
        out.push('\n');
    }
    out
}
