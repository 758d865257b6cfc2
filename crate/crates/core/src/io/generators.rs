//! Test-input generators: regular polygons, random convex unknots and a
//! many-meridian unknot drawn on a fat torus.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Mat3, Vec3};
use crate::knot::{planar_fit, PolygonalKnot};
use crate::scalar::Scalar;

use super::IoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinatePlane {
    Xy,
    Yz,
    Zx,
}

impl std::str::FromStr for CoordinatePlane {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "xy" => Ok(Self::Xy),
            "yz" => Ok(Self::Yz),
            "zx" | "xz" => Ok(Self::Zx),
            _ => Err(format!("unknown plane {s:?} (xy, yz or zx)")),
        }
    }
}

/// Regular `n`-gon inscribed in the circle of the given radius.
pub fn gen_ngon<T: Scalar>(
    n: usize,
    radius: f64,
    plane: CoordinatePlane,
    center: [f64; 3],
) -> Result<PolygonalKnot<T>, IoError> {
    if n < 3 || !(radius > 0.0) || !radius.is_finite() {
        return Err(IoError::InvalidParams(format!(
            "n-gon needs n >= 3 and radius > 0, got {n}, {radius}"
        )));
    }
    let [cx, cy, cz] = center;
    let pts = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            let (a, b) = (radius * t.cos(), radius * t.sin());
            match plane {
                CoordinatePlane::Xy => Vec3::from_f64(cx + a, cy + b, cz),
                CoordinatePlane::Yz => Vec3::from_f64(cx, cy + a, cz + b),
                CoordinatePlane::Zx => Vec3::from_f64(cx + b, cy, cz + a),
            }
        })
        .collect();
    PolygonalKnot::new(pts).map_err(|e| IoError::InvalidParams(e.to_string()))
}

/// Largest distance from a regular inscribed `n`-gon to its circle.
pub fn ngon_tube_bound(n: usize, radius: f64) -> f64 {
    radius * (1.0 - (PI / n as f64).cos())
}

pub const TORUS_MAJOR: f64 = 5.1;
pub const TORUS_MINOR: f64 = 5.0;

/// Point of the torus with core radius 5.1 and tube radius 5: `theta` goes
/// around the `z` axis, `psi` around the tube.
pub fn torus_point(theta: f64, psi: f64) -> [f64; 3] {
    let w = TORUS_MAJOR + TORUS_MINOR * psi.cos();
    [w * theta.cos(), w * theta.sin(), TORUS_MINOR * psi.sin()]
}

/// Half-width in `psi` of the window around the inner equator kept free of
/// meridian arcs.
const CONNECTOR_HALF_WIDTH: f64 = PI / 8.0;

/// An unknot on the torus: `n` arcs of meridians at evenly spaced `theta`,
/// each going the long way round the tube, joined by arcs that cross the
/// inner equator while advancing to the next meridian. The connectors are
/// straight in the `(theta, psi)` chart. Every vertex is an exact sample of
/// [`torus_point`].
pub fn gen_torus_example<T: Scalar>(
    n: usize,
    segments_per_arc: usize,
) -> Result<PolygonalKnot<T>, IoError> {
    if n < 2 || segments_per_arc < 3 {
        return Err(IoError::InvalidParams(format!(
            "torus example needs n >= 2 and segments_per_arc >= 3, got {n}, {segments_per_arc}"
        )));
    }
    let g = CONNECTOR_HALF_WIDTH;
    let m = segments_per_arc;
    let mut pts = Vec::with_capacity(n * 2 * m);
    for k in 0..n {
        let theta = TAU * k as f64 / n as f64;
        let step = TAU / n as f64;
        // meridian from psi = pi + g round through 0 to pi - g
        for j in 0..=m {
            let psi = PI + g + (TAU - 2.0 * g) * j as f64 / m as f64;
            pts.push(torus_point(theta, psi));
        }
        // connector across the inner equator, interior samples only
        for j in 1..m {
            let s = j as f64 / m as f64;
            pts.push(torus_point(theta + step * s, PI - g + 2.0 * g * s));
        }
    }
    let pts = pts
        .into_iter()
        .map(|[x, y, z]| Vec3::from_f64(x, y, z))
        .collect();
    PolygonalKnot::new(pts)
        .map_err(|e| IoError::InvalidParams(format!("torus example not embedded: {e}")))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if let (true, Ok(axis)) = (v.norm() <= 1.0, v.normalized()) {
            return Mat3::rotation(axis, rng.gen_range(0.0..TAU));
        }
    }
}

/// Random unknot with `vertex_count` vertices, deterministic per seed.
///
/// The vertices are those of a convex polygon (points on a random ellipse at
/// sorted random angles); in non-planar mode each is lifted off the plane.
/// The projection to the polygon's plane is then a convex polygon with no
/// crossings, so the result is embedded and unknotted either way. The whole
/// thing is finally rotated and translated at random. A non-planar triangle
/// cannot exist, so three vertices always give a planar knot.
pub fn gen_random_unknot<T: Scalar>(
    seed: u64,
    vertex_count: usize,
    planar: bool,
) -> Result<PolygonalKnot<T>, IoError> {
    if vertex_count < 3 {
        return Err(IoError::InvalidParams(format!(
            "random unknot needs at least 3 vertices, got {vertex_count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = vertex_count;
    loop {
        let a = rng.gen_range(0.5..2.0);
        let b = a * rng.gen_range(0.4..1.0);
        // angles with a minimum gap so no vertex is nearly straight
        let gap = TAU / (4.0 * n as f64);
        let free = TAU - gap * n as f64;
        let mut cuts: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..free)).collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        let start = rng.gen_range(0.0..TAU);
        let lift = if planar {
            0.0
        } else {
            rng.gen_range(0.2..0.8) * b
        };
        let rot = random_rotation(&mut rng);
        let shift = Vec3::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        let pts: Vec<Vec3<f64>> = cuts
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let t = start + c + gap * i as f64;
                let z = if planar {
                    0.0
                } else {
                    rng.gen_range(-lift..lift)
                };
                rot.mul_vec(Vec3::new(a * t.cos(), b * t.sin(), z)) + shift
            })
            .collect();
        let Ok(knot) = PolygonalKnot::new(
            pts.iter()
                .map(|p| Vec3::from_f64(p.x, p.y, p.z))
                .collect::<Vec<Vec3<T>>>(),
        ) else {
            continue;
        };
        if planar || n == 3 || planar_fit(&knot).is_none() {
            return Ok(knot);
        }
    }
}
