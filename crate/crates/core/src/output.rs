//! CSV trajectories, run summaries, scan tables and static SVG plots.
//!
//! Floats are written with `{:.16e}` (17 significant digits), which reads
//! back to the identical `f64`. Missing values are written as `NaN`.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::sim::RunSummary;
use crate::synthesis::ScanRow;
use crate::trajectory::Trajectory;

fn num(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

/// Header for `n` states, `m` inputs, `p` disturbances; tracking runs add
/// the reference and error columns.
pub fn csv_header(n: usize, m: usize, p: usize, tracking: bool) -> String {
    let mut cols = vec!["k".to_string()];
    let mut push = |prefix: &str, count: usize| {
        cols.extend((1..=count).map(|i| format!("{prefix}_{i}")));
    };
    push("x", n);
    push("u", m);
    push("w", p);
    if tracking {
        push("xr", n);
        push("ur", m);
        push("e", n);
    }
    cols.extend(["norm_x", "norm_e", "bound"].map(String::from));
    cols.join(",")
}

/// Writes the trajectory as CSV. A run is treated as tracking when it has a
/// reference state channel.
pub fn write_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    let n = traj.states.first().map_or(0, |x| x.len());
    let m = traj.inputs.first().map_or(0, |u| u.len());
    let p = traj.disturbances.first().map_or(0, |d| d.len());
    let tracking = traj.ref_states.is_some();
    writeln!(w, "{}", csv_header(n, m, p, tracking))?;

    let norm_e = traj.error_norms();
    let bound = traj.bound.unwrap_or(f64::NAN);
    let mut line = String::new();
    for k in 0..traj.len() {
        line.clear();
        let _ = write!(line, "{k}");
        let cells = |v: &nalgebra::DVector<f64>, line: &mut String| {
            for x in v.iter() {
                line.push(',');
                num(line, *x);
            }
        };
        cells(&traj.states[k], &mut line);
        cells(&traj.inputs[k], &mut line);
        cells(&traj.disturbances[k], &mut line);
        if tracking {
            let nan = |d| nalgebra::DVector::from_element(d, f64::NAN);
            let xr = traj.ref_states.as_ref().map(|r| r[k].clone()).unwrap_or_else(|| nan(n));
            let ur = traj.ref_inputs.as_ref().map(|r| r[k].clone()).unwrap_or_else(|| nan(m));
            let e = traj.errors.as_ref().map(|r| r[k].clone()).unwrap_or_else(|| nan(n));
            cells(&xr, &mut line);
            cells(&ur, &mut line);
            cells(&e, &mut line);
        }
        for x in [traj.states[k].norm(), norm_e[k], bound] {
            line.push(',');
            num(&mut line, x);
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn csv_string(traj: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, traj).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Human-readable run summary plus the predicted bounds.
#[derive(Debug, Clone, Default)]
pub struct SummaryReport {
    pub kind: String,
    pub v: usize,
    pub seed: Option<u64>,
    pub b_w: f64,
    /// `gamma(b_w)`; `None` when no certificate exists for this window.
    pub gamma: Option<f64>,
    /// Tracking bound `d` for the realized reference bounds.
    pub d: Option<f64>,
    pub b_xr: Option<f64>,
    pub b_ur: Option<f64>,
    pub spectral_radius: f64,
    pub condition: f64,
    pub extra: Vec<(String, String)>,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |x| format!("{x:.6e}"))
}

impl SummaryReport {
    pub fn render(&self, traj: &Trajectory) -> String {
        let s = RunSummary::of(traj);
        let sup_x = traj.state_norms().into_iter().fold(0.0, f64::max);
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k:<24} {v}");
        };
        kv("kind", self.kind.clone());
        kv("status", if s.diverged { "diverged".into() } else { "ok".into() });
        kv("v", self.v.to_string());
        kv("steps", s.steps.to_string());
        if let Some(seed) = self.seed {
            kv("seed", seed.to_string());
        }
        kv("b_w", format!("{:.6e}", self.b_w));
        kv("spectral_radius", format!("{:.6e}", self.spectral_radius));
        kv("c_psi_psi", format!("{:.6e}", self.condition));
        kv("sup_norm_x", format!("{sup_x:.6e}"));
        kv("sup_norm_e", format!("{:.6e}", s.sup_norm));
        kv("ultimate_norm_e", format!("{:.6e}", s.ultimate_norm));
        kv("final_norm_x", format!("{:.6e}", traj.states.last().map_or(0.0, |x| x.norm())));
        kv("final_norm_e", format!("{:.6e}", s.final_norm));
        kv("gamma_b_w", opt(self.gamma));
        if self.d.is_some() || self.b_xr.is_some() {
            kv("b_xr", opt(self.b_xr));
            kv("b_ur", opt(self.b_ur));
            kv("d", opt(self.d));
            kv("gamma_b_w_plus_d", opt(self.gamma.zip(self.d).map(|(g, d)| g + d)));
        }
        let within = s.bound.map(|b| !s.diverged && s.ultimate_norm <= b);
        kv(
            "within_bound",
            within.map_or_else(|| "n/a".into(), |b| b.to_string()),
        );
        for (k, v) in &self.extra {
            kv(k, v.clone());
        }
        out
    }
}

/// Fixed-width table of a window scan.
pub fn scan_table(rows: &[ScanRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:>13}  {:>13}  {:>13}  {:>8}  {:>13}  {:>13}",
        "v", "psi", "c_psi", "c_psi*psi", "feasible", "c_gamma", "d"
    );
    let f = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
    for r in rows {
        let _ = write!(
            out,
            "{:>4}  {:>13}  {:>13}  {:>13}  {:>8}  {:>13}  {:>13}",
            r.v,
            f(Some(r.psi)),
            f(Some(r.c_psi)),
            f(Some(r.condition)),
            if r.feasible { "yes" } else { "no" },
            f(r.c_gamma),
            f(r.d),
        );
        if let Some(msg) = &r.failure {
            let _ = write!(out, "  ({msg})");
        }
        out.push('\n');
    }
    out
}

/// Scan rows as CSV with full precision.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("v,psi,c_psi,c_psi_psi,feasible,c_gamma,d\n");
    for r in rows {
        let _ = write!(out, "{}", r.v);
        for x in [Some(r.psi), Some(r.c_psi), Some(r.condition)] {
            out.push(',');
            num(&mut out, x.unwrap_or(f64::NAN));
        }
        let _ = write!(out, ",{}", r.feasible as u8);
        for x in [r.c_gamma, r.d] {
            out.push(',');
            num(&mut out, x.unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- SVG

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
    pub dashed: bool,
    pub color: &'static str,
}

impl Series {
    pub fn new(label: impl Into<String>, values: Vec<f64>, color: usize) -> Self {
        Self {
            label: label.into(),
            values,
            dashed: false,
            color: PALETTE[color % PALETTE.len()],
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

/// One panel: a set of series against the sample index.
#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 36.0;

/// "Nice" tick step covering `span` in roughly five intervals.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let nice = if r < 1.5 {
        1.0
    } else if r < 3.0 {
        2.0
    } else if r < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e4 || x.abs() < 1e-2 {
        format!("{x:.1e}")
    } else {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn render_panel(out: &mut String, panel: &Panel, top: f64) {
    let len = panel.series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let finite = panel
        .series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|x| x.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = lo.abs().max(1.0) * 0.5;
        lo -= pad;
        hi += pad;
    }
    let step = tick_step(hi - lo);
    lo = (lo / step).floor() * step;
    hi = (hi / step).ceil() * step;

    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = top + MARGIN_T;
    let y1 = top + PANEL_H - MARGIN_B;
    let kmax = (len.max(2) - 1) as f64;
    let px = |k: usize| x0 + (x1 - x0) * k as f64 / kmax;
    let py = |v: f64| y1 - (y1 - y0) * (v - lo) / (hi - lo);

    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        top + 18.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y1 - y0
    );
    // y ticks
    let ticks = ((hi - lo) / step).round() as usize;
    for i in 0..=ticks {
        // snap accumulated rounding so zero prints as zero
        let t = lo + step * i as f64;
        let t = if t.abs() < 1e-9 * step { 0.0 } else { t };
        let y = py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"##,
            x0,
            x0 - 4.0,
            y + 3.5,
            fmt_tick(t)
        );
    }
    // x ticks
    let xstep = tick_step(kmax).max(1.0);
    let mut k = 0.0;
    while k <= kmax + 1e-9 {
        let x = x0 + (x1 - x0) * k / kmax;
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{y1:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"##,
            y1 + 4.0,
            y1 + 15.0,
            k as usize
        );
        k += xstep;
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">k</text>"#,
        (x0 + x1) / 2.0,
        y1 + 30.0
    );

    for (i, s) in panel.series.iter().enumerate() {
        // split at non-finite samples so gaps stay gaps
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (k, &v) in s.values.iter().enumerate() {
            if v.is_finite() {
                segments.last_mut().expect("non-empty").push((px(k), py(v)));
            } else if !segments.last().expect("non-empty").is_empty() {
                segments.push(Vec::new());
            }
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.3"{dash} points="{}"/>"#,
                s.color,
                pts.join(" ")
            );
        }
        let ly = y0 + 8.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="1.3"{dash}/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            x1 + 10.0,
            x1 + 34.0,
            s.color,
            x1 + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Stacks panels vertically into one SVG 1.1 document.
pub fn render_svg(panels: &[Panel]) -> String {
    let height = PANEL_H * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, PANEL_H * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

/// One panel per state component (reference dashed when present), one per
/// error component for tracking runs, and a norm panel with the bound.
pub fn trajectory_panels(traj: &Trajectory) -> Vec<Panel> {
    let n = traj.states.first().map_or(0, |x| x.len());
    let comp = |v: &[nalgebra::DVector<f64>], i: usize| v.iter().map(|x| x[i]).collect::<Vec<_>>();
    let mut panels = Vec::new();
    for i in 0..n {
        let mut p = Panel {
            title: format!("state x_{}", i + 1),
            series: vec![Series::new(format!("x_{}", i + 1), comp(&traj.states, i), 0)],
        };
        if let Some(r) = &traj.ref_states {
            p.series
                .push(Series::new(format!("xr_{}", i + 1), comp(r, i), 1).dashed());
        }
        panels.push(p);
    }
    if let Some(e) = &traj.errors {
        for i in 0..n {
            panels.push(Panel {
                title: format!("tracking error e_{}", i + 1),
                series: vec![Series::new(format!("e_{}", i + 1), comp(e, i), 2)],
            });
        }
    }
    let label = if traj.errors.is_some() { "|e|" } else { "|x|" };
    let mut norms = Panel {
        title: "norm".into(),
        series: vec![Series::new(label, traj.error_norms(), 3)],
    };
    if let Some(b) = traj.bound {
        norms
            .series
            .push(Series::new("bound", vec![b; traj.len()], 4).dashed());
    }
    panels.push(norms);
    panels
}

pub fn trajectory_svg(traj: &Trajectory) -> String {
    render_svg(&trajectory_panels(traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn small() -> Trajectory {
        let v = |xs: &[f64]| DVector::from_row_slice(xs);
        let mut t = Trajectory::new(
            vec![v(&[1.0, 0.1]), v(&[0.5, 1.0 / 3.0])],
            vec![v(&[-0.25]), v(&[0.0])],
            vec![v(&[0.0, 0.0]), v(&[1e-300, -2.5])],
        );
        t.bound = Some(0.75);
        t
    }

    #[test]
    fn header_layout() {
        assert_eq!(csv_header(2, 1, 2, false), "k,x_1,x_2,u_1,w_1,w_2,norm_x,norm_e,bound");
        assert_eq!(
            csv_header(1, 1, 0, true),
            "k,x_1,u_1,xr_1,ur_1,e_1,norm_x,norm_e,bound"
        );
    }

    #[test]
    fn csv_round_trips_exactly() {
        let t = small();
        let text = csv_string(&t);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), csv_header(2, 1, 2, false));
        let row: Vec<f64> = lines.nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row[0], 1.0);
        assert_eq!(row[2], 1.0 / 3.0);
        assert_eq!(row[4], 1e-300);
        assert_eq!(row[6], t.states[1].norm());
        assert_eq!(row[8], 0.75);
    }

    #[test]
    fn tracking_columns() {
        let mut t = small();
        t.ref_states = Some(t.states.clone());
        t.ref_inputs = Some(t.inputs.clone());
        t.errors = Some(vec![DVector::zeros(2); 2]);
        let text = csv_string(&t);
        let header = text.lines().next().unwrap();
        for col in ["xr_1", "xr_2", "ur_1", "e_1", "e_2"] {
            assert!(header.split(',').any(|c| c == col), "{col}");
        }
        let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
        assert_eq!(last.len(), header.split(',').count());
        assert_eq!(last[last.len() - 2].parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn svg_is_well_formed() {
        let mut t = small();
        t.states[1][0] = f64::NAN;
        let svg = trajectory_svg(&t);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<svg").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn ticks() {
        assert_eq!(tick_step(10.0), 2.0);
        assert_eq!(tick_step(400.0), 100.0);
        assert_eq!(fmt_tick(0.5), "0.5");
        assert_eq!(fmt_tick(1e6), "1.0e6");
    }

    #[test]
    fn summary_mentions_divergence() {
        let mut t = small();
        t.diverged = true;
        let s = SummaryReport::default().render(&t);
        assert!(s.contains("diverged"));
        assert!(s.contains("within_bound             false"));
    }
}
