use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::wls::{r_squared, RegressionFit};
use crate::error::Result;
use crate::ids::PlayerId;

/// Plain-text table of standardised and raw coefficients with 95% intervals,
/// followed by an R² line.
pub fn fit_report(fit: &RegressionFit, title: &str) -> String {
    let mut out = format!("{title}\n");
    let _ = writeln!(out, "{:<10} {:>14} {:>30}", "covariate", "standardised", "raw (95% CI)");
    let raw = |c: &super::Coefficient| format!("{:.3} ({:.3}, {:.3})", c.estimate, c.ci_low, c.ci_high);
    for c in &fit.coefficients {
        let std = fit
            .standardised_coefficient(&c.name)
            .map(|s| format!("{:.3}", s.estimate))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{:<10} {:>14} {:>30}", c.name, std, raw(c));
    }
    let _ = writeln!(out, "{:<10} {:>14} {:>30}", "intercept", "-", raw(&fit.intercept));
    match r_squared(fit) {
        Ok(r2) => {
            let _ = writeln!(out, "R^2 = {r2:.3}");
        }
        Err(e) => {
            let _ = writeln!(out, "R^2 undefined: {e}");
        }
    }
    if !fit.dropped.is_empty() {
        let names: Vec<&str> = fit.dropped.iter().map(|d| d.0.as_str()).collect();
        let _ = writeln!(out, "dropped: {}", names.join(", "));
    }
    for n in &fit.notices {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

/// One fitted-versus-estimate point. Marker size is `1/SE²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub player: PlayerId,
    pub estimate: f64,
    pub fitted: f64,
    pub se: f64,
    pub marker_size: f64,
}

pub fn scatter_points(fit: &RegressionFit) -> Vec<ScatterPoint> {
    (0..fit.y.len())
        .map(|i| ScatterPoint {
            player: fit.players.get(i).cloned().unwrap_or_else(|| PlayerId::new(format!("row{i}"))),
            estimate: fit.y[i],
            fitted: fit.fitted[i],
            se: fit.weights[i].recip().sqrt(),
            marker_size: fit.weights[i],
        })
        .collect()
}

pub fn write_scatter_csv<W: Write>(writer: W, fit: &RegressionFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in scatter_points(fit) {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// Static SVG scatter of estimates against fitted values, marker area
/// proportional to `1/SE²`.
pub fn write_scatter_svg<W: Write>(mut writer: W, fit: &RegressionFit, title: &str) -> Result<()> {
    const W: f64 = 480.0;
    const M: f64 = 48.0;
    let pts = scatter_points(fit);
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if lo < hi { (lo, hi) } else { (lo - 1.0, lo + 1.0) }
    };
    let (x0, x1) = span(&mut pts.iter().map(|p| p.fitted));
    let (y0, y1) = span(&mut pts.iter().map(|p| p.estimate));
    let max_w = pts.iter().map(|p| p.marker_size).fold(0.0, f64::max);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| W - M - (y - y0) / (y1 - y0) * (W - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{W}" viewBox="0 0 {W} {W}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{b}" x2="{e}" y2="{b}" stroke="black"/><line x1="{M}" y1="{M}" x2="{M}" y2="{b}" stroke="black"/>"#,
        b = W - M,
        e = W - M
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">fitted</text>"#, W / 2.0, W - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">estimate</text>"#,
        W / 2.0,
        W / 2.0
    );
    for p in &pts {
        let r = 1.0 + 5.0 * (p.marker_size / max_w).sqrt();
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="steelblue" fill-opacity="0.5"><title>{}</title></circle>"#,
            sx(p.fitted),
            sy(p.estimate),
            escape(p.player.as_str())
        );
    }
    s.push_str("</svg>\n");
    writer.write_all(s.as_bytes())?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
