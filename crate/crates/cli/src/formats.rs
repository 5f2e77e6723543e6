//! CSV readers and writers for traces, events and sweep records.
//!
//! Times are written with 9 decimals. Sample values use the shortest
//! representation that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use adm_core::{Event, EventStream, Polarity, Signal, SweepRecord};

use crate::error::{CliError, Result};

const RATE_KEY: &str = "sample_rate_hz";
const LENGTH_KEY: &str = "source_length";

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Multi-column trace sharing one time base. Every column must have the
/// length of the first.
pub fn format_traces(sample_rate_hz: f64, columns: &[(&str, &[f64])]) -> String {
    let mut out = format!("# {RATE_KEY}={sample_rate_hz}\ntime_s");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let len = columns.first().map_or(0, |c| c.1.len());
    for n in 0..len {
        write!(out, "{:.9}", n as f64 / sample_rate_hz).unwrap();
        for (_, values) in columns {
            write!(out, ",{}", values[n]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn format_trace(signal: &Signal) -> String {
    format_traces(signal.sample_rate_hz(), &[("value", signal.samples())])
}

struct Table {
    meta: Vec<(String, String, usize)>,
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn parse_table(path: &Path, text: &str) -> Result<Table> {
    let mut meta = Vec::new();
    let mut header = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string(), line_no));
            }
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        match header {
            None => header = Some(cells),
            Some(ref h) => {
                if cells.len() != h.len() {
                    return Err(CliError::parse(
                        path,
                        line_no,
                        format!("expected {} columns, found {}", h.len(), cells.len()),
                    ));
                }
                rows.push((line_no, cells));
            }
        }
    }
    let header = header
        .ok_or_else(|| CliError::parse(path, text.lines().count().max(1), "missing header row"))?;
    Ok(Table { meta, header, rows })
}

impl Table {
    fn meta<T: std::str::FromStr>(&self, path: &Path, key: &str) -> Result<T> {
        let (_, v, line) = self
            .meta
            .iter()
            .find(|(k, _, _)| k == key)
            .ok_or_else(|| CliError::parse(path, 1, format!("missing `# {key}=` header")))?;
        v.parse()
            .map_err(|_| CliError::parse(path, *line, format!("bad {key} value `{v}`")))
    }

    fn column(&self, path: &Path, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::parse(path, 1, format!("missing column `{name}`")))
    }
}

fn parse_f64(path: &Path, line: usize, cell: &str) -> Result<f64> {
    cell.parse()
        .map_err(|_| CliError::parse(path, line, format!("not a number: `{cell}`")))
}

/// Reads a trace file; returns its column names (without `time_s`) and the
/// first value column as a signal.
pub fn read_trace(path: &Path) -> Result<(Vec<String>, Signal)> {
    let (names, fs, mut columns) = read_traces(path)?;
    if columns.is_empty() {
        return Err(CliError::parse(path, 1, "no value columns"));
    }
    let signal = Signal::new(columns.swap_remove(0), fs)?;
    Ok((names, signal))
}

/// Reads every value column of a trace file.
pub fn read_traces(path: &Path) -> Result<(Vec<String>, f64, Vec<Vec<f64>>)> {
    let table = parse_table(path, &read_file(path)?)?;
    let fs: f64 = table.meta(path, RATE_KEY)?;
    table.column(path, "time_s")?;
    let names: Vec<String> = table
        .header
        .iter()
        .filter(|h| *h != "time_s")
        .cloned()
        .collect();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| table.column(path, n))
        .collect::<Result<_>>()?;
    let mut columns = vec![Vec::with_capacity(table.rows.len()); names.len()];
    for (line, cells) in &table.rows {
        for (c, &i) in idx.iter().enumerate() {
            columns[c].push(parse_f64(path, *line, &cells[i])?);
        }
    }
    Ok((names, fs, columns))
}

pub fn format_events(events: &EventStream) -> String {
    let mut out = format!(
        "# {LENGTH_KEY}={}\n# {RATE_KEY}={}\ntime_s,polarity\n",
        events.source_length(),
        events.source_sample_rate_hz()
    );
    for e in events.events() {
        writeln!(out, "{:.9},{}", events.time_s(e), e.polarity).unwrap();
    }
    out
}

pub fn read_events(path: &Path) -> Result<EventStream> {
    let table = parse_table(path, &read_file(path)?)?;
    let fs: f64 = table.meta(path, RATE_KEY)?;
    let length: usize = table.meta(path, LENGTH_KEY)?;
    if !(fs.is_finite() && fs > 0.0) {
        return Err(CliError::parse(
            path,
            1,
            format!("bad {RATE_KEY} value `{fs}`"),
        ));
    }
    let t_col = table.column(path, "time_s")?;
    let p_col = table.column(path, "polarity")?;
    let mut events = Vec::with_capacity(table.rows.len());
    let mut previous: Option<usize> = None;
    for (line, cells) in &table.rows {
        let t = parse_f64(path, *line, &cells[t_col])?;
        let position = t * fs;
        let index = position.round();
        if t.is_nan() || t < 0.0 || (position - index).abs() > 1e-3 {
            return Err(CliError::parse(
                path,
                *line,
                format!("time {t} is not on the sample grid"),
            ));
        }
        let index = index as usize;
        if index >= length {
            return Err(CliError::parse(
                path,
                *line,
                format!("sample {index} is past the source length {length}"),
            ));
        }
        if previous.is_some_and(|p| index <= p) {
            return Err(CliError::parse(
                path,
                *line,
                "event times must be strictly increasing",
            ));
        }
        previous = Some(index);
        let polarity: Polarity = cells[p_col].parse().map_err(|_| {
            CliError::parse(path, *line, format!("bad polarity `{}`", cells[p_col]))
        })?;
        events.push(Event { index, polarity });
    }
    Ok(EventStream::new(events, fs, length)?)
}

const SWEEP_HEADER: &str = "v_th,t_rfr_s,rmse,event_count,event_rate_hz";

pub fn format_sweep(records: &[SweepRecord]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.v_th, r.t_rfr_s, r.rmse, r.event_count, r.event_rate_hz
        )
        .unwrap();
    }
    out
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRecord>> {
    let table = parse_table(path, &read_file(path)?)?;
    let cols: Vec<usize> = SWEEP_HEADER
        .split(',')
        .map(|n| table.column(path, n))
        .collect::<Result<_>>()?;
    table
        .rows
        .iter()
        .map(|(line, cells)| {
            let f = |i: usize| parse_f64(path, *line, &cells[cols[i]]);
            Ok(SweepRecord {
                v_th: f(0)?,
                t_rfr_s: f(1)?,
                rmse: f(2)?,
                event_count: cells[cols[3]]
                    .parse()
                    .map_err(|_| CliError::parse(path, *line, "bad event_count"))?,
                event_rate_hz: f(4)?,
            })
        })
        .collect()
}
