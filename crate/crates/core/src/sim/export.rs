//! Telemetry output: full-precision CSV and SVG line plots.

use super::run::{Record, TelemetryLog};
use plotters::prelude::*;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("nothing to plot: telemetry log is empty")]
    Empty,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ExportError {
    ExportError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column names, in row order.
pub fn csv_header(zone_count: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["t".into()];
    let mut push = |prefix: &str, names: &[&str]| {
        h.extend(names.iter().map(|n| format!("{prefix}_{n}")));
    };
    push("q", &["eta", "x", "y", "z"]);
    push("omega", &["x", "y", "z"]);
    push("qstar", &["eta", "x", "y", "z"]);
    push("omegastar", &["x", "y", "z"]);
    push("sigma", &["x", "y", "z"]);
    push("eeps", &["x", "y", "z"]);
    push("egoal", &["x", "y", "z"]);
    push("u", &["x", "y", "z"]);
    push("tau", &["x", "y", "z"]);
    push("tauwcmd", &["1", "2", "3", "4"]);
    push("tauw", &["1", "2", "3", "4"]);
    push("hw", &["1", "2", "3", "4"]);
    h.extend((1..=zone_count).map(|j| format!("theta_{j}")));
    h.extend(["torque_sat", "momentum_sat", "sigma_out"].map(String::from));
    h
}

/// One row per record, header first.
pub fn export_csv(log: &TelemetryLog, path: &Path) -> Result<(), ExportError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(csv_header(log.zone_count))
        .map_err(|e| io_err(path, e))?;
    for r in &log.records {
        let mut row: Vec<String> = Vec::with_capacity(45 + r.theta.len());
        row.push(fmt_f64(r.t));
        for group in [
            &r.q[..],
            &r.omega,
            &r.q_star,
            &r.omega_star,
            &r.sigma,
            &r.e_eps,
            &r.e_goal,
            &r.u,
            &r.tau,
            &r.tau_w_cmd,
            &r.tau_w,
            &r.h_w,
            &r.theta,
        ] {
            row.extend(group.iter().map(|&x| fmt_f64(x)));
        }
        for flag in [r.torque_saturated, r.momentum_saturated, r.sigma_outside] {
            row.push(u8::from(flag).to_string());
        }
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a log written by [`export_csv`].
pub fn read_csv(path: &Path) -> Result<TelemetryLog, ExportError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = rd.headers().map_err(|e| io_err(path, e))?.clone();
    let zone_count = header.iter().filter(|h| h.starts_with("theta_")).count();
    let expected = csv_header(zone_count);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(io_err(path, "not a telemetry log (unexpected columns)"));
    }
    let mut records = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(|e| io_err(path, e))?;
        let bad = |what: &str| io_err(path, format!("row {}: bad {what}", line + 1));
        let v: Vec<f64> = row
            .iter()
            .take(42 + zone_count)
            .map(|c| c.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("number"))?;
        let flag = |i: usize| match row.get(42 + zone_count + i) {
            Some("1") => Ok(true),
            Some("0") => Ok(false),
            _ => Err(bad("flag")),
        };
        let a3 = |o: usize| [v[o], v[o + 1], v[o + 2]];
        let a4 = |o: usize| [v[o], v[o + 1], v[o + 2], v[o + 3]];
        records.push(Record {
            t: v[0],
            q: a4(1),
            omega: a3(5),
            q_star: a4(8),
            omega_star: a3(12),
            sigma: a3(15),
            e_eps: a3(18),
            e_goal: a3(21),
            u: a3(24),
            tau: a3(27),
            tau_w_cmd: a4(30),
            tau_w: a4(34),
            h_w: a4(38),
            theta: v[42..42 + zone_count].to_vec(),
            torque_saturated: flag(0)?,
            momentum_saturated: flag(1)?,
            sigma_outside: flag(2)?,
        });
    }
    Ok(TelemetryLog {
        zone_count,
        records,
    })
}

/// A named trace for [`line_plot`].
pub struct Series<'a> {
    pub name: &'a str,
    pub y: Vec<f64>,
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(hi.abs().max(lo.abs()) * 1e-3).max(1e-12);
    (lo - pad, hi + pad)
}

/// Writes a multi-series line chart; `guides` are dashed horizontal reference levels.
pub fn line_plot(
    path: &Path,
    title: &str,
    y_label: &str,
    t: &[f64],
    series: &[Series<'_>],
    guides: &[f64],
) -> Result<(), ExportError> {
    if t.is_empty() {
        return Err(ExportError::Empty);
    }
    let (x0, x1) = (t[0], t[t.len() - 1].max(t[0] + 1e-9));
    let (y0, y1) = span(
        series
            .iter()
            .flat_map(|s| s.y.iter().copied())
            .chain(guides.iter().copied()),
    );
    let root = SVGBackend::new(path, (960, 540)).into_drawing_area();
    let draw = |e| io_err(path, e);
    root.fill(&WHITE).map_err(draw)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(80)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(draw)?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .y_desc(y_label)
        .y_label_formatter(&|v| format!("{v:.2e}"))
        .draw()
        .map_err(draw)?;
    for &g in guides {
        chart
            .draw_series(DashedLineSeries::new(
                [(x0, g), (x1, g)],
                6,
                4,
                BLACK.mix(0.6).stroke_width(1),
            ))
            .map_err(draw)?;
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(
                t.iter().copied().zip(s.y.iter().copied()),
                color.stroke_width(2),
            ))
            .map_err(draw)?
            .label(s.name)
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 16, y)], color.stroke_width(2)));
    }
    if series.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(draw)?;
    }
    root.present().map_err(draw)
}

/// Quaternion, rates, sliding variable, wheel torque and momentum, and boresight clearance
/// plots, written as `<prefix>_<name>.svg`. Returns the files written.
pub fn export_svg_plots(
    log: &TelemetryLog,
    prefix: &Path,
    sigma_bar: f64,
    zone_floors_deg: &[f64],
) -> Result<Vec<PathBuf>, ExportError> {
    if log.records.is_empty() {
        return Err(ExportError::Empty);
    }
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let stem = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = |name: &str| prefix.with_file_name(format!("{stem}_{name}.svg"));
    let t: Vec<f64> = log.records.iter().map(|r| r.t).collect();
    let col = |f: &dyn Fn(&Record) -> f64| -> Vec<f64> {
        log.records.iter().map(f).collect()
    };
    let mut written = Vec::new();

    let p = file("quaternion");
    let names = ["eta", "eps_x", "eps_y", "eps_z"];
    let series: Vec<Series> = (0..4)
        .map(|i| Series {
            name: names[i],
            y: col(&|r| r.q[i]),
        })
        .collect();
    line_plot(&p, "Attitude quaternion", "q", &t, &series, &[])?;
    written.push(p);

    let p = file("omega");
    let axes = ["x", "y", "z"];
    let mut series: Vec<Series> = (0..3)
        .map(|i| Series {
            name: axes[i],
            y: col(&|r| r.omega[i]),
        })
        .collect();
    series.push(Series {
        name: "|omega*|",
        y: col(&|r| r.omega_star.iter().map(|v| v * v).sum::<f64>().sqrt()),
    });
    line_plot(&p, "Body rate", "rad/s", &t, &series, &[])?;
    written.push(p);

    let p = file("sigma");
    let series: Vec<Series> = (0..3)
        .map(|i| Series {
            name: axes[i],
            y: col(&|r| r.sigma[i]),
        })
        .collect();
    line_plot(&p, "Sliding variable", "rad/s", &t, &series, &[-sigma_bar, sigma_bar])?;
    written.push(p);

    let wheels = ["w1", "w2", "w3", "w4"];
    let p = file("wheel_torque");
    let series: Vec<Series> = (0..4)
        .map(|i| Series {
            name: wheels[i],
            y: col(&|r| r.tau_w[i]),
        })
        .collect();
    line_plot(&p, "Wheel torque", "N m", &t, &series, &[])?;
    written.push(p);

    let p = file("wheel_momentum");
    let series: Vec<Series> = (0..4)
        .map(|i| Series {
            name: wheels[i],
            y: col(&|r| r.h_w[i]),
        })
        .collect();
    line_plot(&p, "Wheel momentum", "N m s", &t, &series, &[])?;
    written.push(p);

    if log.zone_count > 0 {
        let p = file("boresight");
        let labels: Vec<String> = (1..=log.zone_count).map(|j| format!("zone {j}")).collect();
        let series: Vec<Series> = (0..log.zone_count)
            .map(|j| Series {
                name: &labels[j],
                y: col(&|r| r.theta[j].to_degrees()),
            })
            .collect();
        line_plot(&p, "Boresight to zone axis", "deg", &t, &series, zone_floors_deg)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_scenario, ScenarioConfig};

    fn short_log() -> TelemetryLog {
        let cfg = ScenarioConfig::default()
            .with_overrides(&["duration=3".into(), "telemetry.stride=7".into()])
            .unwrap();
        run_scenario(&cfg).unwrap().log
    }

    #[test]
    fn csv_round_trips_exactly() {
        let log = short_log();
        // 300 steps at stride 7 plus the final sample
        assert_eq!(log.records.len(), 300 / 7 + 2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log.csv");
        export_csv(&log, &p).unwrap();
        assert_eq!(read_csv(&p).unwrap(), log);
    }

    #[test]
    fn empty_log_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        let log = TelemetryLog {
            zone_count: 2,
            records: vec![],
        };
        export_csv(&log, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("theta_2,torque_sat"));
        assert_eq!(read_csv(&p).unwrap(), log);
        assert!(matches!(
            export_svg_plots(&log, &dir.path().join("x"), 5e-4, &[]),
            Err(ExportError::Empty)
        ));
    }

    #[test]
    fn plots_are_written() {
        let log = short_log();
        let dir = tempfile::tempdir().unwrap();
        let files = export_svg_plots(&log, &dir.path().join("run"), 5e-4, &[15.0; 3]).unwrap();
        assert_eq!(files.len(), 6);
        for f in files {
            let svg = std::fs::read_to_string(&f).unwrap();
            assert!(svg.starts_with("<svg") && svg.contains("<polyline"), "{}", f.display());
        }
    }
}
