//! JSON, CSV and SVG serializations of pipeline outputs.
//!
//! Every document carries a metadata object: under a `"metadata"` key in
//! JSON, as `#` lines in CSV, and as a leading comment in SVG.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::clustering::ClusterCover;
use crate::cover::Tower;
use crate::error::{Error, Result};
use crate::multiscale::MultiscaleResult;
use crate::nerve::TwoMapperComplex;
use crate::persistence::Barcode;
use crate::simplex::FilteredComplex;

pub type Metadata = Map<String, Value>;

pub fn tower_json(tower: &Tower) -> Value {
    json!({
        "mode": tower.mode,
        "spec": tower.spec,
        "bbox": tower.bbox,
        "levels": tower.levels.iter().map(|l| json!({
            "scale": l.scale,
            "sets": l.sets.iter().map(|s| json!({"index": s.index, "lo": s.lo, "hi": s.hi})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn cluster_cover_json(cc: &ClusterCover, with_members: bool) -> Value {
    json!({
        "scale": cc.scale,
        "resolution": cc.resolution,
        "params": cc.params,
        "nodes": cc.nodes.iter().map(|n| {
            let mut v = json!({
                "id": n.id,
                "index": n.cover_index,
                "local": n.local,
                "size": n.members.len(),
                "noise": n.is_noise,
            });
            if with_members {
                v["members"] = json!(n.members);
            }
            v
        }).collect::<Vec<_>>(),
    })
}

pub fn complex_json(complex: &TwoMapperComplex, betti: &[usize], metadata: &Metadata) -> Value {
    json!({
        "metadata": metadata,
        "vertices": complex.vertices,
        "edges": complex.edges,
        "triangles": complex.triangles,
        "betti": betti,
    })
}

/// Simplices in filtration order with their births.
pub fn filtration_json(filtered: &FilteredComplex, metadata: &Metadata) -> Value {
    json!({
        "metadata": metadata,
        "simplices": filtered.sorted().into_iter()
            .map(|(s, b)| json!({"simplex": s, "birth": b}))
            .collect::<Vec<_>>(),
    })
}

pub fn multiscale_json(result: &MultiscaleResult, metadata: &Metadata) -> Value {
    let stages: Vec<Value> = result
        .stages
        .iter()
        .map(|st| {
            let [v, e, t] = counts(st.simplices.iter().map(|s| s.dim()));
            json!({
                "scale": st.scale,
                "vertices": st.nodes.iter().map(|n| json!({
                    "id": n.id,
                    "index": n.cover_index,
                    "local": n.local,
                    "size": n.members.len(),
                    "reinserted": n.reinserted,
                })).collect::<Vec<_>>(),
                "counts": {"vertices": v, "edges": e, "triangles": t},
            })
        })
        .collect();
    json!({
        "metadata": metadata,
        "mode": result.mode,
        "scales": result.scales,
        "stages": stages,
        "alignments": result.alignments,
        "registry": result.registry,
    })
}

fn counts(dims: impl Iterator<Item = usize>) -> [usize; 3] {
    let mut c = [0; 3];
    for d in dims {
        if d <= 2 {
            c[d] += 1;
        }
    }
    c
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn metadata_lines(metadata: &Metadata) -> Vec<String> {
    metadata.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect()
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn fmt_value(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

/// `dim,birth,death` rows, `inf` for essential classes.
pub fn write_barcode_csv<W: Write>(mut w: W, barcode: &Barcode, metadata: &Metadata) -> std::io::Result<()> {
    for line in metadata_lines(metadata) {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "dim,birth,death")?;
    for i in &barcode.intervals {
        writeln!(w, "{},{},{}", i.dim, fmt_value(i.birth), fmt_value(i.death))?;
    }
    Ok(())
}

const SVG_WIDTH: f64 = 720.0;
const SVG_LEFT: f64 = 60.0;
const SVG_RIGHT: f64 = 30.0;
const SVG_TOP: f64 = 20.0;
const BAR_STEP: f64 = 6.0;
const BAR_HEIGHT: f64 = 4.0;
const GROUP_GAP: f64 = 18.0;
const AXIS_HEIGHT: f64 = 30.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Barcode plot over `scales`. Zero-length intervals are omitted and
/// essential classes run to the right edge.
pub fn barcode_svg(barcode: &Barcode, scales: &[f64], metadata: &Metadata) -> String {
    let lo = scales.first().copied().unwrap_or(0.0);
    let mut hi = scales.last().copied().unwrap_or(1.0);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let span = SVG_WIDTH - SVG_LEFT - SVG_RIGHT;
    let x = |t: f64| SVG_LEFT + span * ((t.min(hi) - lo) / (hi - lo));
    let right = SVG_WIDTH - SVG_RIGHT / 2.0;

    let mut body = String::new();
    let mut y = SVG_TOP;
    for dim in 0..3 {
        let bars: Vec<_> = barcode.of_dim(dim).filter(|i| !i.is_zero_length()).collect();
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" font-family="monospace">H{dim}</text>"#,
            8.0,
            y + 8.0
        );
        for bar in &bars {
            let x1 = if bar.is_infinite() { right } else { x(bar.death) };
            let _ = writeln!(
                body,
                r#"<rect x="{:.2}" y="{:.1}" width="{:.2}" height="{BAR_HEIGHT}" fill="{}"/>"#,
                x(bar.birth),
                y,
                (x1 - x(bar.birth)).max(1.0),
                COLORS[dim]
            );
            y += BAR_STEP;
        }
        if bars.is_empty() {
            y += BAR_STEP;
        }
        y += GROUP_GAP;
    }
    let axis_y = y;
    let _ = writeln!(
        body,
        r#"<line x1="{SVG_LEFT}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="black"/>"#,
        SVG_LEFT + span
    );
    for &t in scales {
        let _ = writeln!(
            body,
            r#"<line x1="{0:.2}" y1="{axis_y:.1}" x2="{0:.2}" y2="{1:.1}" stroke="black"/><text x="{0:.2}" y="{2:.1}" font-size="9" font-family="monospace" text-anchor="middle">{3}</text>"#,
            x(t),
            axis_y + 4.0,
            axis_y + 15.0,
            fmt_value(t)
        );
    }
    let height = axis_y + AXIS_HEIGHT;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{height:.0}" viewBox="0 0 {SVG_WIDTH} {height:.0}">"#
    );
    let meta = metadata_lines(metadata).join("; ").replace("--", "- -");
    let _ = writeln!(out, "<!-- {meta} -->");
    out.push_str(&body);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::Interval;

    fn bars() -> Barcode {
        Barcode {
            intervals: vec![
                Interval { dim: 0, birth: 0.1, death: f64::INFINITY },
                Interval { dim: 1, birth: 0.1, death: 0.3 },
                Interval { dim: 1, birth: 0.2, death: 0.2 },
            ],
        }
    }

    #[test]
    fn csv_rows() {
        let mut meta = Metadata::new();
        meta.insert("seed".into(), json!(7));
        let mut buf = Vec::new();
        write_barcode_csv(&mut buf, &bars(), &meta).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# seed=7\ndim,birth,death\n0,0.1,inf\n1,0.1,0.3\n1,0.2,0.2\n");
    }

    #[test]
    fn svg_skips_zero_length() {
        let svg = barcode_svg(&bars(), &[0.1, 0.2, 0.3], &Metadata::new());
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect").count(), 2);
        assert_eq!(svg, barcode_svg(&bars(), &[0.1, 0.2, 0.3], &Metadata::new()));
    }
}
