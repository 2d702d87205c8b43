//! CSV and SVG emission for sweep reports. Output bytes are deterministic
//! for a fixed report.

use sighom_core::sweep::SweepReport;
use std::fmt::Write as _;

pub const CSV_HEADER: &str =
    "scenario,regime,eps,dofs,grad_norm,jump_norm,scaled_jump_norm,l2_error,active_fraction,iters";

pub fn write_csv(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{}",
            report.scenario,
            report.regime,
            row.eps,
            row.dofs,
            row.grad_norm,
            row.jump_norm,
            row.scaled_jump_norm,
            row.l2_error,
            row.active_fraction,
            row.iterations
        );
    }
    out
}

struct LogAxis {
    lo: f64,
    hi: f64,
}

impl LogAxis {
    fn from(values: impl Iterator<Item = f64>) -> Option<LogAxis> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if v > 0.0 && v.is_finite() {
                lo = lo.min(v.log10());
                hi = hi.max(v.log10());
            }
        }
        if lo.is_finite() {
            if hi - lo < 0.5 {
                lo -= 0.25;
                hi += 0.25;
            }
            Some(LogAxis { lo, hi })
        } else {
            None
        }
    }

    fn pos(&self, v: f64, from: f64, to: f64) -> f64 {
        let t = (v.log10() - self.lo) / (self.hi - self.lo);
        from + t * (to - from)
    }
}

/// Static log-log line chart: eps against the L2 error and against the
/// interface jump norm. No external assets.
pub fn write_svg(report: &SweepReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle">{} (regime {})</text>"#,
        W / 2.0,
        report.scenario,
        report.regime
    );

    let xs = LogAxis::from(report.rows.iter().map(|r| r.eps.to_f64()));
    let ys = LogAxis::from(
        report
            .rows
            .iter()
            .flat_map(|r| [r.l2_error, r.jump_norm].into_iter()),
    );
    let _ = writeln!(
        out,
        r#"<rect x="{ML}" y="{MT}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        W - ML - MR,
        H - MT - MB
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">eps (log)</text>"#,
        W / 2.0,
        H - 12.0
    );

    if let (Some(xa), Some(ya)) = (xs, ys) {
        // decade ticks
        let mut d = xa.lo.floor();
        while d <= xa.hi.ceil() {
            let v = 10f64.powf(d);
            if v.log10() >= xa.lo - 1e-9 && v.log10() <= xa.hi + 1e-9 {
                let x = xa.pos(v, ML, W - MR);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.2}" y1="{MT}" x2="{x:.2}" y2="{:.2}" stroke="#cccccc"/>"##,
                    H - MB
                );
                let _ = writeln!(
                    out,
                    r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d:.0}</text>"#,
                    H - MB + 16.0
                );
            }
            d += 1.0;
        }
        let mut d = ya.lo.floor();
        while d <= ya.hi.ceil() {
            let v = 10f64.powf(d);
            if v.log10() >= ya.lo - 1e-9 && v.log10() <= ya.hi + 1e-9 {
                let y = ya.pos(v, H - MB, MT);
                let _ = writeln!(
                    out,
                    r##"<line x1="{ML}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#cccccc"/>"##,
                    W - MR
                );
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">1e{d:.0}</text>"#,
                    ML - 6.0
                );
            }
            d += 1.0;
        }
        for (values, color, label, offset) in [
            (
                report.rows.iter().map(|r| (r.eps.to_f64(), r.l2_error)).collect::<Vec<_>>(),
                "#1f77b4",
                "l2_error",
                0.0,
            ),
            (
                report.rows.iter().map(|r| (r.eps.to_f64(), r.jump_norm)).collect::<Vec<_>>(),
                "#d62728",
                "jump_norm",
                18.0,
            ),
        ] {
            let pts: Vec<String> = values
                .iter()
                .filter(|(_, v)| *v > 0.0)
                .map(|(e, v)| {
                    format!("{:.2},{:.2}", xa.pos(*e, ML, W - MR), ya.pos(*v, H - MB, MT))
                })
                .collect();
            if !pts.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    pts.join(" ")
                );
                for p in &pts {
                    let (x, y) = p.split_once(',').unwrap();
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#
                    );
                }
            }
            let ly = MT + 16.0 + offset;
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                ML + 10.0,
                ML + 40.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
                ML + 46.0,
                ly + 4.0
            );
        }
    } else {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">no positive data</text>"#,
            W / 2.0,
            H / 2.0
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sighom_core::homogenize::Regime;
    use sighom_core::rational::Rational;
    use sighom_core::sweep::SweepRow;

    fn report(rows: usize) -> SweepReport {
        SweepReport {
            scenario: "t".into(),
            regime: Regime::A,
            rows: (0..rows)
                .map(|i| SweepRow {
                    eps: Rational::new(1, 4 << i),
                    dofs: 100 * (i + 1),
                    grad_norm: 0.25,
                    jump_norm: 0.1 / (i + 1) as f64,
                    scaled_jump_norm: 0.1,
                    l2_error: 0.01 / (i + 1) as f64,
                    active_fraction: 0.5,
                    iterations: 10,
                    interface_energy: 1e-3,
                    energy_defect: 1e-12,
                })
                .collect(),
            failures: vec![],
            limit_l2: 0.07,
            limit_grad: 0.25,
            conductance: Some(2.3),
        }
    }

    #[test]
    fn csv_rows_and_header() {
        let r = report(4);
        let text = write_csv(&r);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("t,A,1/4,100,"));
        // empty report: header only
        let empty = SweepReport { rows: vec![], ..r };
        assert_eq!(write_csv(&empty).lines().count(), 1);
    }

    #[test]
    fn emission_is_deterministic() {
        let r = report(4);
        assert_eq!(write_csv(&r), write_csv(&r));
        assert_eq!(write_svg(&r), write_svg(&r));
    }

    #[test]
    fn svg_handles_zero_data() {
        let mut r = report(3);
        for row in &mut r.rows {
            row.l2_error = 0.0;
            row.jump_norm = 0.0;
        }
        let svg = write_svg(&r);
        assert!(svg.contains("no positive data"));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
