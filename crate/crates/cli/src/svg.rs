//! Certificate-versus-empirical tail plots.
//!
//! Plots are drawn from a tail-curve table and nothing else. Every marker
//! carries the table's CSV strings in `data-*` attributes, so a plotted
//! number can always be found verbatim in the CSV.

use std::fmt::Write;

use hoc_core::experiment::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Probabilities below this are drawn on the bottom edge.
const FLOOR: f64 = 1e-7;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    t_min: f64,
    t_max: f64,
    log_min: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        let span = (self.t_max - self.t_min).max(f64::MIN_POSITIVE);
        MARGIN_LEFT + (t - self.t_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, p: f64) -> f64 {
        let lp = p.max(10f64.powf(self.log_min)).log10();
        MARGIN_TOP + lp / self.log_min * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// SVG of the `bound` and `empirical` columns against `t` on a log
/// probability axis. `None` unless the table is a tail curve.
pub fn tail_plot(table: &Table, title: &str) -> Option<String> {
    if !table.is_tail_curve() || table.rows.is_empty() {
        return None;
    }
    let (t, bound, emp, lo, hi) = (0, 1, 2, 3, 4);
    let ts: Vec<f64> = table.rows.iter().map(|r| r[t]).collect();
    let smallest = table
        .rows
        .iter()
        .flat_map(|r| [r[bound], r[emp], r[lo]])
        .filter(|p| *p > 0.0)
        .fold(1.0f64, f64::min)
        .max(FLOOR);
    let frame = Frame {
        t_min: ts[0],
        t_max: ts[ts.len() - 1],
        log_min: smallest.log10().floor().min(-1.0),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));

    // axes and decade gridlines
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(s, r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#);
    for k in 0..=(-frame.log_min as i32) {
        let y = frame.y(10f64.powi(-k));
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/>"##);
        let label = if k == 0 { "1".to_string() } else { format!("1e-{k}") };
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 6.0, y + 4.0);
    }
    for (row, &tv) in ts.iter().enumerate() {
        let x = frame.x(tv);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y1 + 16.0,
            table.cell(row, t)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, (x0 + x1) / 2.0, HEIGHT - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">P(|f - E f| &gt;= t)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    // confidence band, then the two curves
    for (row, &tv) in ts.iter().enumerate() {
        let x = frame.x(tv);
        let _ = writeln!(
            s,
            r##"<line class="ci" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#999" data-t="{}" data-ci-low="{}" data-ci-high="{}"/>"##,
            frame.y(table.rows[row][hi]),
            frame.y(table.rows[row][lo]),
            table.cell(row, t),
            table.cell(row, lo),
            table.cell(row, hi)
        );
    }
    for (col, class, color) in [(bound, "bound", "#c0392b"), (emp, "empirical", "#2c3e50")] {
        let points: Vec<String> = ts
            .iter()
            .enumerate()
            .map(|(row, &tv)| format!("{:.2},{:.2}", frame.x(tv), frame.y(table.rows[row][col])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        for (row, &tv) in ts.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="3" fill="{color}" data-t="{}" data-value="{}"/>"#,
                frame.x(tv),
                frame.y(table.rows[row][col]),
                table.cell(row, t),
                table.cell(row, col)
            );
        }
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" fill="#c0392b">certificate</text>"##,
        x1 - 150.0,
        y0 + 16.0
    );
    let _ = writeln!(s, r##"<text x="{}" y="{}" fill="#2c3e50">empirical</text>"##, x1 - 150.0, y0 + 32.0);
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table::new(
            "tail",
            &["t", "bound", "empirical", "ci_low", "ci_high"],
            vec![
                vec![0.5, 1.0, 0.6, 0.59, 0.61],
                vec![1.0, 0.3, 0.1, 0.09, 0.11],
                vec![4.0, 1e-3, 0.0, 0.0, 3e-6],
            ],
        )
    }

    #[test]
    fn markers_carry_csv_strings() {
        let t = table();
        let svg = tail_plot(&t, "x").unwrap();
        let csv = t.to_csv().unwrap();
        let mut seen = 0;
        for part in svg.split("data-value=\"").skip(1) {
            let v = &part[..part.find('"').unwrap()];
            assert!(csv.contains(v), "{v}");
            seen += 1;
        }
        assert_eq!(seen, 6);
    }

    #[test]
    fn only_tail_curves_are_plotted() {
        let t = Table::new("exp", &["a", "r"], vec![vec![1.0, 2.0]]);
        assert!(tail_plot(&t, "x").is_none());
    }

    #[test]
    fn zero_probability_stays_on_canvas() {
        let svg = tail_plot(&table(), "x").unwrap();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
