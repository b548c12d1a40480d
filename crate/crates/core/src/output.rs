//! CSV traces and the key=value run summary.
//!
//! `frames.csv`:
//! `frame_index,t_start,frame_len,mode,scheduled_users,alloc_bits,served_bits`
//! where the last three columns are `;`-joined lists and user ids are 1-based.
//!
//! `queues.csv`: `slot,q_1..q_N,hol_1..hol_N`.
//!
//! Reals are written with 12 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::engine::{FrameRecord, RunSummary, SlotTrace};
use crate::error::{Result, SimError};

pub const FRAMES_HEADER: &str = "frame_index,t_start,frame_len,mode,scheduled_users,alloc_bits,served_bits";

/// Formats `x` rounded to 12 significant digits, without exponent notation.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

pub fn queues_header(num_users: usize) -> String {
    let mut h = String::from("slot");
    for u in 1..=num_users {
        write!(h, ",q_{u}").unwrap();
    }
    for u in 1..=num_users {
        write!(h, ",hol_{u}").unwrap();
    }
    h
}

pub fn frames_csv(frames: &[FrameRecord]) -> String {
    let mut out = String::with_capacity(64 * (frames.len() + 1));
    out.push_str(FRAMES_HEADER);
    out.push('\n');
    for f in frames {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.frame_index,
            f.t_start,
            f.frame_len,
            f.mode.as_str(),
            join(&f.scheduled, |u| (u + 1).to_string()),
            join(&f.allocated_bits, |b| fmt_num(*b)),
            join(&f.served_bits, |b| fmt_num(*b)),
        )
        .unwrap();
    }
    out
}

pub fn queues_csv(trace: &SlotTrace) -> String {
    let n = trace.num_users();
    let mut out = String::with_capacity(trace.len() * (8 + 12 * n));
    out.push_str(&queues_header(n));
    out.push('\n');
    for slot in 0..trace.len() {
        write!(out, "{slot}").unwrap();
        for q in trace.backlog_row(slot) {
            write!(out, ",{}", fmt_num(*q)).unwrap();
        }
        for h in trace.hol_row(slot) {
            write!(out, ",{h}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn summary_text(policy: &str, s: &RunSummary) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").unwrap();
    kv("policy", policy.to_string());
    kv("total_slots", s.total_slots.to_string());
    kv("num_frames", s.num_frames.to_string());
    kv("sum_rate", fmt_num(s.sum_rate));
    if let Some(a) = s.admitted_rate {
        kv("admitted_rate", fmt_num(a));
    }
    kv("stability_slope", fmt_num(s.stability_slope));
    kv("stable", s.is_stable().to_string());
    kv("mean_delay", fmt_num(s.mean_delay()));
    for u in 0..s.time_avg_delay.len() {
        let id = u + 1;
        kv(&format!("delay_{id}"), fmt_num(s.time_avg_delay[u]));
        kv(&format!("mean_queue_{id}"), fmt_num(s.mean_queue[u]));
        kv(&format!("arrival_rate_{id}"), fmt_num(s.arrival_rate(u)));
        kv(&format!("served_rate_{id}"), fmt_num(s.served_rate(u)));
        kv(&format!("final_backlog_{id}"), fmt_num(s.final_backlog[u]));
    }
    out
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(|e| SimError::io(&tmp, e))?;
    file.write_all(contents.as_bytes()).map_err(|e| SimError::io(&tmp, e))?;
    file.sync_all().map_err(|e| SimError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| SimError::io(path, e))
}

fn bad(column: &str, line: usize, what: &str) -> SimError {
    SimError::param(column, format!("line {line}: {what}"))
}

fn parse_list<T: std::str::FromStr>(field: &str, column: &str, line: usize) -> Result<Vec<T>> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|x| x.parse().map_err(|_| bad(column, line, &format!("cannot parse `{x}`"))))
        .collect()
}

fn parse_field<T: std::str::FromStr>(field: &str, column: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| bad(column, line, &format!("cannot parse `{field}`")))
}

/// Parses `frames.csv`. The objective is not part of the schema and reads back as 0.
pub fn parse_frames_csv(text: &str) -> Result<Vec<FrameRecord>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != FRAMES_HEADER {
        return Err(SimError::param(
            "header",
            format!("expected `{FRAMES_HEADER}`, got `{header}`"),
        ));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 2;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(bad("frames.csv", line_no, "expected 7 columns"));
            }
            let scheduled: Vec<usize> = parse_list(cols[4], "scheduled_users", line_no)?;
            Ok(FrameRecord {
                frame_index: parse_field(cols[0], "frame_index", line_no)?,
                t_start: parse_field(cols[1], "t_start", line_no)?,
                frame_len: parse_field(cols[2], "frame_len", line_no)?,
                mode: cols[3].parse().map_err(|_| bad("mode", line_no, cols[3]))?,
                scheduled: scheduled.into_iter().map(|u| u.saturating_sub(1)).collect(),
                allocated_bits: parse_list(cols[5], "alloc_bits", line_no)?,
                served_bits: parse_list(cols[6], "served_bits", line_no)?,
                objective_value: 0.0,
                degenerate: false,
            })
        })
        .collect()
}

/// Parses `queues.csv` back into a slot trace.
pub fn parse_queues_csv(text: &str) -> Result<SlotTrace> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let columns = header.split(',').count();
    if columns < 3 || !(columns - 1).is_multiple_of(2) {
        return Err(SimError::param("header", format!("malformed queues header `{header}`")));
    }
    let n = (columns - 1) / 2;
    if header != queues_header(n) {
        return Err(SimError::param("header", format!("expected `{}`", queues_header(n))));
    }
    let mut trace = SlotTrace::new(n);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != columns {
            return Err(bad("queues.csv", line_no, "wrong column count"));
        }
        let slot: usize = parse_field(cols[0], "slot", line_no)?;
        if slot != i {
            return Err(bad("slot", line_no, "slots must be consecutive from 0"));
        }
        let q = (0..n)
            .map(|u| parse_field(cols[1 + u], &format!("q_{}", u + 1), line_no))
            .collect::<Result<Vec<f64>>>()?;
        let h = (0..n)
            .map(|u| parse_field(cols[1 + n + u], &format!("hol_{}", u + 1), line_no))
            .collect::<Result<Vec<u64>>>()?;
        trace.push(&q, &h);
    }
    Ok(trace)
}
