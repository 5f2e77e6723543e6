//! Standalone SVG figures with the plotted data embedded as polylines.

use std::fmt::Write as _;

use adm_core::SweepRecord;

const WIDTH: f64 = 720.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Panel {
    top: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
    log_x: bool,
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        let (lo, hi, v) = if self.log_x {
            (self.x.0.log10(), self.x.1.log10(), x.log10())
        } else {
            (self.x.0, self.x.1, x)
        };
        let span = if hi > lo { hi - lo } else { 1.0 };
        MARGIN_L + (v - lo) / span * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        let span = if self.y.1 > self.y.0 {
            self.y.1 - self.y.0
        } else {
            1.0
        };
        self.top + self.height - (y - self.y.0) / span * self.height
    }

    fn frame(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let right = WIDTH - MARGIN_R;
        let bottom = self.top + self.height;
        writeln!(
            out,
            r##"<rect x="{MARGIN_L}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            self.top,
            right - MARGIN_L,
            self.height
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{MARGIN_L}" y="{}" font-size="13">{title}</text>"#,
            self.top - 6.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{x_label}</text>"#,
            (MARGIN_L + right) / 2.0,
            bottom + 30.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="14" y="{}" font-size="11" transform="rotate(-90 14 {})" text-anchor="middle">{y_label}</text>"#,
            self.top + self.height / 2.0,
            self.top + self.height / 2.0
        )
        .unwrap();
        for (v, anchor_y) in [(self.y.0, bottom), (self.y.1, self.top + 10.0)] {
            writeln!(
                out,
                r#"<text x="{}" y="{anchor_y}" font-size="10" text-anchor="end">{}</text>"#,
                MARGIN_L - 4.0,
                tick(v)
            )
            .unwrap();
        }
        for (v, anchor) in [(self.x.0, "start"), (self.x.1, "end")] {
            writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="10" text-anchor="{anchor}">{}</text>"#,
                self.px(v),
                bottom + 14.0,
                tick(v)
            )
            .unwrap();
        }
    }

    fn polyline(&self, out: &mut String, points: &[(f64, f64)], color: &str) {
        out.push_str(r#"<polyline fill="none" stroke-width="1.2" stroke=""#);
        out.push_str(color);
        out.push_str(r#"" points=""#);
        for (i, (x, y)) in points.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{:.2},{:.2}", self.px(*x), self.py(*y)).unwrap();
        }
        out.push_str("\"/>\n");
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn document(height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

/// RMSE against threshold, one curve per refractory period, log threshold axis.
pub fn sweep_svg(records: &[SweepRecord]) -> String {
    let mut periods: Vec<f64> = Vec::new();
    for r in records {
        if !periods.contains(&r.t_rfr_s) {
            periods.push(r.t_rfr_s);
        }
    }
    let panel = Panel {
        top: 30.0,
        height: 380.0,
        x: range(records.iter().map(|r| r.v_th)),
        y: (0.0, range(records.iter().map(|r| r.rmse)).1),
        log_x: true,
    };
    let mut body = String::new();
    panel.frame(&mut body, "RMSE vs threshold", "v_th (log)", "RMSE");
    for (i, t) in periods.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.t_rfr_s == *t)
            .map(|r| (r.v_th, r.rmse))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        panel.polyline(&mut body, &pts, color);
        for (x, y) in &pts {
            writeln!(
                body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                panel.px(*x),
                panel.py(*y)
            )
            .unwrap();
        }
        writeln!(
            body,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">t_rfr = {} ms</text>"#,
            WIDTH - MARGIN_R - 110.0,
            panel.top + 16.0 + 14.0 * i as f64,
            t * 1e3
        )
        .unwrap();
    }
    document(460.0, &body)
}

/// Min/max per bucket so long traces keep their extremes at a bounded size.
fn decimate(samples: &[f64], fs: f64, buckets: usize) -> Vec<(f64, f64)> {
    if samples.len() <= 2 * buckets {
        return samples
            .iter()
            .enumerate()
            .map(|(n, v)| (n as f64 / fs, *v))
            .collect();
    }
    let per = samples.len().div_ceil(buckets);
    let mut out = Vec::with_capacity(2 * buckets);
    for (b, chunk) in samples.chunks(per).enumerate() {
        let base = b * per;
        let (mut imin, mut imax) = (0, 0);
        for (i, v) in chunk.iter().enumerate() {
            if *v < chunk[imin] {
                imin = i;
            }
            if *v > chunk[imax] {
                imax = i;
            }
        }
        let (a, c) = if imin <= imax {
            (imin, imax)
        } else {
            (imax, imin)
        };
        out.push(((base + a) as f64 / fs, chunk[a]));
        if c != a {
            out.push(((base + c) as f64 / fs, chunk[c]));
        }
    }
    out
}

pub struct AdaptiveTraces<'a> {
    pub sample_rate_hz: f64,
    pub input: &'a [f64],
    pub envelope: &'a [f64],
    pub slow: &'a [f64],
    pub fast: &'a [f64],
    pub gate: &'a [f64],
    pub v_th: &'a [f64],
}

/// Three rows: input with the ±v_th band, the envelope with both filters,
/// and the gate.
pub fn adaptive_svg(t: &AdaptiveTraces) -> String {
    let fs = t.sample_rate_hz;
    let duration = t.input.len().saturating_sub(1) as f64 / fs;
    let buckets = 1500;
    let neg: Vec<f64> = t.v_th.iter().map(|v| -v).collect();
    let rows = [
        (
            "Input and threshold",
            "amplitude",
            vec![
                (t.input, PALETTE[0]),
                (t.v_th, PALETTE[1]),
                (&neg[..], PALETTE[1]),
            ],
        ),
        (
            "Envelope, slow and fast filters",
            "level",
            vec![
                (t.envelope, "#888"),
                (t.slow, PALETTE[2]),
                (t.fast, PALETTE[4]),
            ],
        ),
        ("Hold gate", "gate", vec![(t.gate, PALETTE[3])]),
    ];
    let mut body = String::new();
    for (i, (title, label, series)) in rows.iter().enumerate() {
        let y = range(series.iter().flat_map(|(s, _)| s.iter().copied()));
        let panel = Panel {
            top: 30.0 + 200.0 * i as f64,
            height: 150.0,
            x: (0.0, duration.max(1.0 / fs)),
            y,
            log_x: false,
        };
        panel.frame(&mut body, title, "time (s)", label);
        for (s, color) in series {
            panel.polyline(&mut body, &decimate(s, fs, buckets), color);
        }
    }
    document(640.0, &body)
}
