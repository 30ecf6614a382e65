//! Self-contained SVG line chart of reliability curves.

use std::fmt::Write;

use moonrel::ReliabilityCurve;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 210.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const DASHES: &[&str] = &["", "6,3", "2,3", "8,3,2,3"];

/// Plots every curve on shared linear axes, `R ∈ [0, 1]`.
/// A curve whose label is `reference` is drawn solid black.
pub fn render(curves: &[ReliabilityCurve], reference: &str) -> String {
    let t_max = curves
        .iter()
        .filter_map(|c| c.t_grid().last().copied())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + plot_w * t / t_max;
    let y = |r: f64| TOP + plot_h * (1.0 - r);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

    // Grid and ticks.
    for i in 0..=5 {
        let r = f64::from(i) / 5.0;
        let py = y(r);
        writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e0e0e0"/>"##,
            LEFT + plot_w
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{r:.1}</text>"#,
            LEFT - 6.0,
            py + 4.0
        )
        .unwrap();
    }
    for i in 0..=5 {
        let t = t_max * f64::from(i) / 5.0;
        let px = x(t);
        writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##,
            TOP + plot_h
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            tick_label(t)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t (h)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">R(t)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    let mut styled = 0usize;
    for (i, curve) in curves.iter().enumerate() {
        let (color, dash, width) = if curve.label() == reference {
            ("black", "", 2.0)
        } else {
            let k = styled;
            styled += 1;
            (PALETTE[k % PALETTE.len()], DASHES[(k / PALETTE.len()) % DASHES.len()], 1.5)
        };
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let points: Vec<String> = curve
            .t_grid()
            .iter()
            .zip(curve.values())
            .map(|(&t, &r)| format!("{:.2},{:.2}", x(t), y(r.clamp(0.0, 1.0))))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash_attr} points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();

        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="{width}"{dash_attr}/>"#,
            lx + 28.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 34.0,
            ly + 4.0,
            curve.label()
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn tick_label(t: f64) -> String {
    if t == t.round() {
        format!("{t:.0}")
    } else {
        format!("{t:.1}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use moonrel::SolverTag;

    #[test]
    fn draws_reference_in_black() {
        let grid = vec![0.0, 1.0, 2.0];
        let curves = vec![
            ReliabilityCurve::new("2oo3/2oo3".into(), grid.clone(), vec![1.0, 0.9, 0.5], SolverTag::Ctmc),
            ReliabilityCurve::new("1oo1/1oo1".into(), grid, vec![1.0, 0.8, 0.6], SolverTag::Ctmc),
        ];
        let svg = render(&curves, "1oo1/1oo1");
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"<polyline fill="none" stroke="black" stroke-width="2" points="#));
        assert!(svg.contains(">t (h)</text>"));
        assert!(svg.contains(">R(t)</text>"));
        assert!(svg.contains(">2oo3/2oo3</text>"));
    }
}
