//! Benchmark report: CSV serialization and SVG bar charts.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str = "model,task,correlation_score,mse,fit_seconds,predict_seconds,folds,seed";

/// One (model, task) result aggregated over folds.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub task: String,
    pub correlation_score: f64,
    pub mse: f64,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    pub folds: usize,
    pub seed: u64,
    /// Validation rows scored 0 for having zero variance, summed over folds.
    pub zero_variance_rows: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    rows: Vec<ReportRow>,
}

/// Fixed 17-significant-digit rendering; round-trips every finite f64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl EvalReport {
    pub fn new(mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| (&a.task, &a.model).cmp(&(&b.task, &b.model)));
        EvalReport { rows }
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn row(&self, model: &str, task: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.model == model && r.task == task)
    }

    pub fn merge(self, other: EvalReport) -> EvalReport {
        let mut rows = self.rows;
        rows.extend(other.rows);
        EvalReport::new(rows)
    }

    /// `results.csv` contents. Timing columns are 0 unless `with_timings`.
    pub fn to_csv(&self, with_timings: bool) -> String {
        let mut out = String::from(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            let (fit, pred) = if with_timings {
                (format_f64(r.fit_seconds), format_f64(r.predict_seconds))
            } else {
                ("0".to_string(), "0".to_string())
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.model,
                r.task,
                format_f64(r.correlation_score),
                format_f64(r.mse),
                fit,
                pred,
                r.folds,
                r.seed
            );
        }
        out
    }

    /// Wall times only, for the sidecar timings file.
    pub fn timings_csv(&self) -> String {
        let mut out = String::from("model,task,fit_seconds,predict_seconds\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{:.6},{:.6}", r.model, r.task, r.fit_seconds, r.predict_seconds);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<EvalReport> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == RESULTS_HEADER => {}
            Some((_, h)) => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("unexpected header `{h}`"),
                })
            }
            None => return Err(Error::Parse { line: 1, msg: "empty results file".into() }),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 8 fields, found {}", f.len()),
                });
            }
            let num = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("`{s}`: {e}"),
                })
            };
            let int = |s: &str| -> Result<u64> {
                s.trim().parse::<u64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("`{s}`: {e}"),
                })
            };
            rows.push(ReportRow {
                model: f[0].to_string(),
                task: f[1].to_string(),
                correlation_score: num(f[2])?,
                mse: num(f[3])?,
                fit_seconds: num(f[4])?,
                predict_seconds: num(f[5])?,
                folds: int(f[6])? as usize,
                seed: int(f[7])?,
                zero_variance_rows: 0,
            });
        }
        Ok(EvalReport::new(rows))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Correlation,
    Mse,
}

impl Metric {
    fn value(self, r: &ReportRow) -> f64 {
        match self {
            Metric::Correlation => r.correlation_score,
            Metric::Mse => r.mse,
        }
    }

    fn title(self) -> &'static str {
        match self {
            Metric::Correlation => "Correlation Score",
            Metric::Mse => "Mean Squared Error",
        }
    }
}

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Grouped bar chart: one group per task, one bar per model.
pub fn render_bar_chart(report: &EvalReport, metric: Metric) -> String {
    let mut tasks: Vec<&str> = report.rows.iter().map(|r| r.task.as_str()).collect();
    tasks.dedup();
    let mut models: Vec<&str> = report.rows.iter().map(|r| r.model.as_str()).collect();
    models.sort();
    models.dedup();

    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (70.0, 150.0, 50.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;

    let values: Vec<f64> = report.rows.iter().map(|r| metric.value(r)).collect();
    let vmax = values.iter().cloned().fold(0.0f64, f64::max);
    let vmin = values.iter().cloned().fold(0.0f64, f64::min);
    let (lo, hi) = match metric {
        Metric::Correlation => (vmin.min(0.0), 1.0f64.max(vmax)),
        Metric::Mse => (0.0, if vmax > 0.0 { vmax * 1.1 } else { 1.0 }),
    };
    let y_of = |v: f64| top + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="25" text-anchor="middle" font-size="16">{}</text>"#,
        left + plot_w / 2.0,
        metric.title()
    );
    for t in 0..=5 {
        let v = lo + (hi - lo) * t as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"##,
            left + plot_w,
            left - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.2}" stroke="black"/>"#,
        top + plot_h
    );

    let group_w = plot_w / tasks.len().max(1) as f64;
    let bar_w = group_w * 0.8 / models.len().max(1) as f64;
    for (ti, task) in tasks.iter().enumerate() {
        let gx = left + group_w * ti as f64 + group_w * 0.1;
        for (mi, model) in models.iter().enumerate() {
            let Some(r) = report.row(model, task) else { continue };
            let v = metric.value(r);
            let (y0, y1) = (y_of(v.max(lo)), y_of(0.0f64.max(lo)));
            let (y, bh) = if y0 < y1 { (y0, y1 - y0) } else { (y1, y0 - y1) };
            let _ = writeln!(
                s,
                r#"<rect class="bar" data-model="{}" data-task="{}" x="{:.2}" y="{y:.2}" width="{:.2}" height="{bh:.2}" fill="{}"><title>{} / {}: {v:.4}</title></rect>"#,
                escape(model),
                escape(task),
                gx + bar_w * mi as f64,
                bar_w * 0.95,
                PALETTE[mi % PALETTE.len()],
                escape(model),
                escape(task)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            left + group_w * (ti as f64 + 0.5),
            top + plot_h + 20.0,
            escape(task)
        );
    }
    for (mi, model) in models.iter().enumerate() {
        let y = top + 10.0 + 20.0 * mi as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{y:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            w - right + 20.0,
            PALETTE[mi % PALETTE.len()],
            w - right + 38.0,
            y + 10.0,
            escape(model)
        );
    }
    s.push_str("</svg>\n");
    s
}
