use std::path::{Path, PathBuf};

use adm_core::{
    adaptive_encode, detrended_rmse, encode, find_min_rmse, reconstruct, rmse_sweep,
    rmse_sweep_signal, select_gain, EventStream, GainTable, Signal, SweepRecord,
};

use crate::config::{RunConfig, Source};
use crate::error::{CliError, Result};
use crate::formats::{
    format_events, format_sweep, format_trace, format_traces, read_events, read_trace, write_file,
};
use crate::plot::{adaptive_svg, sweep_svg, AdaptiveTraces};

pub const SIGNAL_FILE: &str = "signal.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const RECONSTRUCTION_FILE: &str = "reconstruction.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_SVG: &str = "sweep.svg";
pub const ADAPTIVE_TRACES: &str = "adaptive_traces.csv";
pub const ADAPTIVE_SVG: &str = "adaptive.svg";

/// What a command wrote and the lines it reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn emit(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    write_file(&path, contents)?;
    files.push(path);
    Ok(())
}

fn event_summary(events: &EventStream) -> String {
    format!(
        "{} events ({} UP, {} DN), rate {} Hz",
        events.len(),
        events.up_count(),
        events.dn_count(),
        events.rate_hz()
    )
}

fn gain(config: &RunConfig) -> Result<f64> {
    Ok(select_gain(
        config.adm.gain_code() as i64,
        &GainTable::default(),
    )?)
}

pub fn synth(config: &RunConfig, out: &Path) -> Result<Report> {
    let signal = config.load_signal()?;
    prepare(out)?;
    let mut files = Vec::new();
    emit(out, SIGNAL_FILE, &format_trace(&signal), &mut files)?;
    Ok(Report {
        files,
        lines: vec![format!(
            "{} samples at {} Hz, rms {}",
            signal.len(),
            signal.sample_rate_hz(),
            signal.rms()
        )],
    })
}

pub fn encode_cmd(config: &RunConfig, out: &Path) -> Result<Report> {
    let signal = config.load_signal()?;
    let events = encode(&signal, &config.adm)?;
    prepare(out)?;
    let mut files = Vec::new();
    emit(out, EVENTS_FILE, &format_events(&events), &mut files)?;
    Ok(Report {
        files,
        lines: vec![event_summary(&events)],
    })
}

/// Staircase for `events`; with `original`, also the detrended RMSE against
/// the original after the configured encoder gain.
pub fn decode(
    config: &RunConfig,
    events: &Path,
    original: Option<&Path>,
    out: &Path,
) -> Result<Report> {
    let stream = read_events(events)?;
    let recon_config = config.reconstruction();
    recon_config.validate(stream.source_sample_rate_hz())?;
    let recon = reconstruct(&stream, &recon_config)?;
    let mut lines = vec![format!(
        "{} samples reconstructed from {} events",
        recon.len(),
        stream.len()
    )];
    if let Some(path) = original {
        let (_, original) = read_trace(path)?;
        let scaled = original.scaled(gain(config)?)?;
        let rmse = detrended_rmse(&scaled, &recon, recon_config.highpass_cutoff_hz)?;
        lines.push(format!("rmse {rmse}"));
    }
    prepare(out)?;
    let mut files = Vec::new();
    emit(out, RECONSTRUCTION_FILE, &format_trace(&recon), &mut files)?;
    Ok(Report { files, lines })
}

pub fn sweep(config: &RunConfig, out: &Path) -> Result<(Report, Vec<SweepRecord>)> {
    let grid = config.sweep_grid()?;
    let records = match config.source() {
        Source::Synth(_) => rmse_sweep(&grid)?,
        Source::Trace(_) => rmse_sweep_signal(&config.load_signal()?, &grid)?,
    };
    let best = find_min_rmse(&records)?;
    prepare(out)?;
    let mut files = Vec::new();
    emit(out, SWEEP_CSV, &format_sweep(&records), &mut files)?;
    emit(out, SWEEP_SVG, &sweep_svg(&records), &mut files)?;
    let lines = vec![
        format!("{} cells", records.len()),
        format!(
            "minimum rmse {} at v_th {} t_rfr_s {}",
            best.rmse, best.v_th, best.t_rfr_s
        ),
    ];
    Ok((Report { files, lines }, records))
}

pub fn adaptive(config: &RunConfig, out: &Path) -> Result<Report> {
    let adaptive = config.adaptive.ok_or_else(|| {
        CliError::Config("the adaptive command needs an [adaptive] section".into())
    })?;
    let signal: Signal = config.load_signal()?;
    let (events, output) = adaptive_encode(&signal, &config.adm, &adaptive)?;
    let input = signal.scaled(gain(config)?)?;
    let d = &output.diagnostics;
    let gate: Vec<f64> = d
        .gate
        .as_slice()
        .iter()
        .map(|g| if *g { 1.0 } else { 0.0 })
        .collect();
    let fs = signal.sample_rate_hz();
    let traces = format_traces(
        fs,
        &[
            ("input", input.samples()),
            ("envelope", d.envelope.samples()),
            ("slow", d.slow.samples()),
            ("fast", d.fast.samples()),
            ("gate", &gate),
            ("v_th", output.v_th.samples()),
        ],
    );
    let svg = adaptive_svg(&AdaptiveTraces {
        sample_rate_hz: fs,
        input: input.samples(),
        envelope: d.envelope.samples(),
        slow: d.slow.samples(),
        fast: d.fast.samples(),
        gate: &gate,
        v_th: output.v_th.samples(),
    });
    prepare(out)?;
    let mut files = Vec::new();
    emit(out, ADAPTIVE_TRACES, &traces, &mut files)?;
    emit(out, EVENTS_FILE, &format_events(&events), &mut files)?;
    emit(out, ADAPTIVE_SVG, &svg, &mut files)?;
    Ok(Report {
        files,
        lines: vec![
            event_summary(&events),
            format!(
                "gate high for {} of {} samples",
                d.gate.count_high(),
                signal.len()
            ),
        ],
    })
}
