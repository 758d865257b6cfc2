//! Standard small links used as references and negative controls.

use crate::geom::Vec3;
use crate::knot::PolygonalKnot;
use crate::scalar::Scalar;

fn knot<T: Scalar>(pts: &[[f64; 3]]) -> PolygonalKnot<T> {
    PolygonalKnot::new(
        pts.iter()
            .map(|p| Vec3::from_f64(p[0], p[1], p[2]))
            .collect(),
    )
    .expect("fixture polygons are embedded")
}

/// Three mutually perpendicular 2×1 rectangles centred at the origin, each in
/// a coordinate plane.
pub fn borromean_rectangles<T: Scalar>() -> Vec<PolygonalKnot<T>> {
    let (a, b) = (1.0, 0.5);
    vec![
        knot(&[[-a, -b, 0.0], [a, -b, 0.0], [a, b, 0.0], [-a, b, 0.0]]),
        knot(&[[0.0, -a, -b], [0.0, a, -b], [0.0, a, b], [0.0, -a, b]]),
        knot(&[[-b, 0.0, -a], [b, 0.0, -a], [b, 0.0, a], [-b, 0.0, a]]),
    ]
}

/// Two rectangles forming a Hopf link: one pierces the other's disk once.
pub fn hopf<T: Scalar>() -> Vec<PolygonalKnot<T>> {
    vec![
        knot(&[
            [-1.0, -1.0, 0.0],
            [1.0, -1.0, 0.0],
            [1.0, 1.0, 0.0],
            [-1.0, 1.0, 0.0],
        ]),
        knot(&[
            [0.0, 0.0, -1.0],
            [2.0, 0.0, -1.0],
            [2.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
        ]),
    ]
}

/// A triangle translated by `offset`.
pub fn triangle<T: Scalar>(offset: [f64; 3]) -> PolygonalKnot<T> {
    let [x, y, z] = offset;
    knot(&[
        [x, y, z],
        [x + 1.0, y, z + 0.2],
        [x + 0.3, y + 1.0, z - 0.1],
    ])
}

/// Three triangles separated by planes.
pub fn split_triangles<T: Scalar>() -> Vec<PolygonalKnot<T>> {
    vec![
        triangle([0.0, 0.0, 0.0]),
        triangle([5.0, 0.0, 0.0]),
        triangle([0.0, 5.0, 3.0]),
    ]
}

/// Hopf link plus a far-away triangle.
pub fn hopf_plus_split<T: Scalar>() -> Vec<PolygonalKnot<T>> {
    let mut l = hopf();
    l.push(triangle([10.0, 10.0, 10.0]));
    l
}

/// The usual picture of the Borromean rings: three overlapping circles with
/// A over B, B over C and C over A. Seen along `z` the diagram has six
/// crossings and alternates.
pub fn borromean_circles<T: Scalar>(segments: usize) -> Vec<PolygonalKnot<T>> {
    let tau = std::f64::consts::TAU;
    let centres: Vec<[f64; 2]> = (0..3)
        .map(|i| {
            [
                0.6 * (tau * i as f64 / 3.0).cos(),
                0.6 * (tau * i as f64 / 3.0).sin(),
            ]
        })
        .collect();
    let off_circle = |p: [f64; 2], c: [f64; 2]| ((p[0] - c[0]).hypot(p[1] - c[1]) - 1.0).abs();
    (0..3)
        .map(|i| {
            let (over, under) = ((i + 1) % 3, (i + 2) % 3);
            let pts: Vec<[f64; 3]> = (0..segments)
                .map(|k| {
                    let t = tau * (k as f64 + 0.5) / segments as f64;
                    let p = [centres[i][0] + t.cos(), centres[i][1] + t.sin()];
                    let z = if off_circle(p, centres[over]) < off_circle(p, centres[under]) {
                        0.2
                    } else {
                        -0.2
                    };
                    [p[0], p[1], z]
                })
                .collect();
            knot(&pts)
        })
        .collect()
}
