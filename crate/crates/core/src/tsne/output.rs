use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub label: Option<String>,
}

/// `id<TAB>x<TAB>y<TAB>label` rows; the label column is empty when absent.
pub fn write_projection_tsv(points: &[ProjectedPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in points {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", p.id, p.x, p.y, p.label.as_deref().unwrap_or(""));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_projection_tsv(path: impl AsRef<Path>) -> Result<Vec<ProjectedPoint>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = |m: &str| Error::Parse {
            line: i + 1,
            message: m.to_string(),
        };
        if cols.len() < 3 {
            return Err(bad("expected id, x, y"));
        }
        out.push(ProjectedPoint {
            id: cols[0].to_string(),
            x: cols[1].parse().map_err(|_| bad("bad x"))?,
            y: cols[2].parse().map_err(|_| bad("bad y"))?,
            label: cols.get(3).filter(|s| !s.is_empty()).map(|s| s.to_string()),
        });
    }
    Ok(out)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Scatter plot with one color per label and a legend.
pub fn write_projection_svg(points: &[ProjectedPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (size, margin) = (800.0, 40.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let sx = |x: f64| margin + (x - x0) / span * (size - 2.0 * margin);
    let sy = |y: f64| size - margin - (y - y0) / span * (size - 2.0 * margin);

    let mut colors: BTreeMap<&str, &str> = BTreeMap::new();
    for p in points {
        let l = p.label.as_deref().unwrap_or("");
        let next = PALETTE[colors.len() % PALETTE.len()];
        colors.entry(l).or_insert(next);
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for p in points {
        let c = colors[p.label.as_deref().unwrap_or("")];
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}" fill-opacity="0.7"><title>{}</title></circle>"#,
            sx(p.x),
            sy(p.y),
            escape(&p.id)
        );
    }
    for (i, (label, c)) in colors.iter().filter(|(l, _)| !l.is_empty()).enumerate() {
        let y = 20.0 + 18.0 * i as f64;
        let _ = writeln!(svg, r#"<circle cx="15" cy="{y}" r="5" fill="{c}"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="25" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            y + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tsv");
        let pts = vec![
            ProjectedPoint {
                id: "a".into(),
                x: 1.5,
                y: -2.25,
                label: Some("NoRisk".into()),
            },
            ProjectedPoint {
                id: "b".into(),
                x: 0.0,
                y: 3.0,
                label: None,
            },
        ];
        write_projection_tsv(&pts, &path).unwrap();
        assert_eq!(read_projection_tsv(&path).unwrap(), pts);
        write_projection_svg(&pts, dir.path().join("p.svg")).unwrap();
    }
}
