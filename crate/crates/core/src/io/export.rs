//! OBJ polylines, SVG diagrams and plain-text reports.

use std::fmt::Write;

use crate::arranger::Arrangement;
use crate::diagram::LinkDiagram;
use crate::invariants::BorromeanCertificate;
use crate::knot::PolygonalKnot;
use crate::scalar::Scalar;

/// One `o` object per component, its vertices, and a closed `l` polyline.
pub fn export_obj<T: Scalar>(link: &[PolygonalKnot<T>]) -> String {
    let mut out = String::new();
    let mut base = 1;
    for (i, k) in link.iter().enumerate() {
        writeln!(out, "o K{}", i + 1).unwrap();
        for p in k.vertices() {
            let [x, y, z] = p.to_f64();
            writeln!(out, "v {x} {y} {z}").unwrap();
        }
        let idx: Vec<String> = (0..k.len())
            .chain([0])
            .map(|j| (base + j).to_string())
            .collect();
        writeln!(out, "l {}", idx.join(" ")).unwrap();
        base += k.len();
    }
    out
}

const COLOURS: [&str; 6] = [
    "#c0392b", "#2471a3", "#229954", "#b7950b", "#7d3c98", "#616a6b",
];
const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

/// Draws the diagram with a gap in the under strand at every crossing and
/// the crossing sign written next to it. Each component is drawn as one
/// `<path>` per stretch between gaps (one closed path if it never passes
/// under).
pub fn export_svg<T: Scalar>(d: &LinkDiagram<T>) -> String {
    let pts: Vec<Vec<[f64; 2]>> = d
        .projected
        .iter()
        .map(|c| c.iter().map(|p| [p[0].as_f64(), p[1].as_f64()]).collect())
        .collect();
    let all = pts.iter().flatten();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in all {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |p: [f64; 2]| {
        [
            MARGIN + (p[0] - lo[0]) * scale,
            SIZE - MARGIN - (p[1] - lo[1]) * scale,
        ]
    };
    let gap = 6.0 / scale;

    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#)
        .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (ci, poly) in pts.iter().enumerate() {
        let colour = COLOURS[ci % COLOURS.len()];
        let cuts: Vec<f64> = d
            .crossings
            .iter()
            .filter(|c| c.under.component == ci)
            .map(|c| arc_position(poly, c.under.edge, c.under.param.as_f64()))
            .collect();
        for stretch in stretches(poly, &cuts, gap) {
            let path: Vec<String> = stretch
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let [x, y] = map(*p);
                    format!("{}{x:.3},{y:.3}", if k == 0 { "M" } else { "L" })
                })
                .collect();
            let close = if cuts.is_empty() { " Z" } else { "" };
            writeln!(
                out,
                r#"<path class="strand" data-component="{ci}" d="{}{close}" fill="none" stroke="{colour}" stroke-width="2.5"/>"#,
                path.join(" ")
            )
            .unwrap();
        }
    }
    for (k, c) in d.crossings.iter().enumerate() {
        let [x, y] = map([c.position[0].as_f64(), c.position[1].as_f64()]);
        let s = if c.sign > 0 { "+" } else { "-" };
        writeln!(
            out,
            r#"<text class="sign" data-crossing="{k}" x="{:.3}" y="{:.3}" font-size="11" font-family="monospace">{s}</text>"#,
            x + 5.0,
            y - 5.0
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn edge_lengths(poly: &[[f64; 2]]) -> Vec<f64> {
    let n = poly.len();
    (0..n)
        .map(|i| (poly[(i + 1) % n][0] - poly[i][0]).hypot(poly[(i + 1) % n][1] - poly[i][1]))
        .collect()
}

fn arc_position(poly: &[[f64; 2]], edge: usize, param: f64) -> f64 {
    let len = edge_lengths(poly);
    len[..edge].iter().sum::<f64>() + param * len[edge]
}

fn point_at(poly: &[[f64; 2]], len: &[f64], mut s: f64) -> [f64; 2] {
    let n = poly.len();
    for i in 0..n {
        if s <= len[i] || i == n - 1 {
            let t = if len[i] > 0.0 {
                (s / len[i]).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        }
        s -= len[i];
    }
    poly[0]
}

/// The closed polyline minus a window of half-width `gap` (arc length)
/// around every cut, as open polylines.
fn stretches(poly: &[[f64; 2]], cuts: &[f64], gap: f64) -> Vec<Vec<[f64; 2]>> {
    let len = edge_lengths(poly);
    let total: f64 = len.iter().sum();
    if cuts.is_empty() {
        return vec![poly.to_vec()];
    }
    let gap = gap.min(total / (4.0 * cuts.len() as f64));
    let mut cuts = cuts.to_vec();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut vertex_pos = Vec::with_capacity(poly.len());
    let mut acc = 0.0;
    for l in &len {
        vertex_pos.push(acc);
        acc += l;
    }
    let mut out = Vec::new();
    for (k, &c) in cuts.iter().enumerate() {
        let start = c + gap;
        let end = if k + 1 < cuts.len() {
            cuts[k + 1] - gap
        } else {
            cuts[0] + total - gap
        };
        if end <= start {
            // two gaps overlap: nothing to draw between them
            continue;
        }
        let mut piece = vec![point_at(poly, &len, start % total)];
        for lap in [0.0, total] {
            for (i, &v) in vertex_pos.iter().enumerate() {
                let s = v + lap;
                if s > start && s < end {
                    piece.push(poly[i]);
                }
            }
        }
        piece.push(point_at(poly, &len, end % total));
        out.push(piece);
    }
    out
}

fn fmt_f(x: f64) -> String {
    format!("{x:.17e}")
}

fn certificate_lines(out: &mut String, c: &BorromeanCertificate) {
    writeln!(out, "certificate:").unwrap();
    writeln!(out, "  lk12: {}", c.lk_12).unwrap();
    writeln!(out, "  lk13: {}", c.lk_13).unwrap();
    writeln!(out, "  lk23: {}", c.lk_23).unwrap();
    match &c.mu123 {
        Ok(m) => writeln!(out, "  mu123: {m}").unwrap(),
        Err(e) => writeln!(out, "  mu123: undefined ({e})").unwrap(),
    }
    for (name, (g, r)) in ["12", "13", "23"]
        .iter()
        .zip(c.gauss.iter().zip(&c.gauss_residuals))
    {
        writeln!(out, "  gauss{name}: {} (residual {})", fmt_f(*g), fmt_f(*r)).unwrap();
    }
    writeln!(out, "  crossings: {}", c.crossings).unwrap();
    let [x, y, z] = c.projection_direction;
    writeln!(out, "  projection: {} {} {}", fmt_f(x), fmt_f(y), fmt_f(z)).unwrap();
    match (&c.bracket, c.bracket_match) {
        (Some(b), Some(m)) => {
            writeln!(out, "  bracket: {b} (matches Borromean rings: {m})").unwrap()
        }
        _ => writeln!(out, "  bracket: not computed").unwrap(),
    }
    writeln!(out, "  verdict: {}", c.verdict).unwrap();
}

/// Plain-text report of a certificate and, when given, the arrangement that
/// produced it. Deterministic: equal inputs give equal bytes.
pub fn report<T: Scalar>(
    certificate: &BorromeanCertificate,
    arrangement: Option<&Arrangement<T>>,
) -> String {
    let mut out = String::new();
    if let Some(a) = arrangement {
        writeln!(out, "arrangement:").unwrap();
        writeln!(out, "  mode: {}", a.mode).unwrap();
        writeln!(out, "  seed: {}", a.seed).unwrap();
        writeln!(
            out,
            "  roles: K1 = input {}, K2 = input {}, K3 = input {}",
            a.roles[0], a.roles[1], a.roles[2]
        )
        .unwrap();
        writeln!(
            out,
            "  retries: shrinks {}, relabels {}, scale growths {}",
            a.stats.shrinks, a.stats.relabels, a.stats.scale_growths
        )
        .unwrap();
        let b = &a.budget;
        writeln!(
            out,
            "  budget: d {} eps_ball {} eps {} delta {} tau {} alpha {} rho {}",
            fmt_f(b.d.as_f64()),
            fmt_f(b.eps_ball.as_f64()),
            fmt_f(b.eps.as_f64()),
            fmt_f(b.delta.as_f64()),
            fmt_f(b.tau.as_f64()),
            fmt_f(b.alpha.as_f64()),
            fmt_f(b.rho.as_f64())
        )
        .unwrap();
        for (i, t) in a.transforms.iter().enumerate() {
            writeln!(out, "component {i}:").unwrap();
            writeln!(out, "  scale: {}", t.scale.as_f64()).unwrap();
            for r in 0..3 {
                let row = [
                    t.rotation.get(r, 0),
                    t.rotation.get(r, 1),
                    t.rotation.get(r, 2),
                ];
                let row: Vec<String> = row.iter().map(|x| fmt_f(x.as_f64())).collect();
                writeln!(out, "  rotation: {}", row.join(" ")).unwrap();
            }
            let tr: Vec<String> = t.translation.to_f64().iter().map(|x| fmt_f(*x)).collect();
            writeln!(out, "  translation: {}", tr.join(" ")).unwrap();
        }
    }
    certificate_lines(&mut out, certificate);
    out
}
