//! Minimal static SVG line chart.

use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

/// One polyline per series on a shared y axis starting at zero.
pub fn line_chart(series: &[(&str, &[f64], &str)], first: &str, last: &str) -> String {
    let n = series.iter().map(|s| s.1.len()).max().unwrap_or(0);
    let ymax = series.iter().flat_map(|s| s.1.iter().copied()).fold(0.0, f64::max);
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let x = |i: usize| PAD + if n > 1 { i as f64 * (W - 2.0 * PAD) / (n - 1) as f64 } else { 0.0 };
    let y = |v: f64| H - PAD - v / ymax * (H - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" font-size="12">{first}</text>"#, H - PAD + 20.0);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{last}</text>"#,
        W - PAD,
        H - PAD + 20.0
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{ymax}</text>"#, PAD - 5.0, PAD + 4.0);
    for (k, (name, values, color)) in series.iter().enumerate() {
        let pts: Vec<String> = values.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v))).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            pts.join(" ")
        );
        let ly = PAD - 25.0 + 14.0 * k as f64;
        let _ = writeln!(out, r#"<text x="{}" y="{ly}" font-size="12" fill="{color}">{name}</text>"#, W - PAD - 100.0);
    }
    out.push_str("</svg>\n");
    out
}
