//! Role assignment: which knot plays K1, K2, K3 and which edge at the K2
//! corner is the least steep edge `f2`.

use crate::geom::{bounding_diagonal, Vec3};
use crate::knot::{MarkedKnot, PolygonalKnot};
use crate::scalar::Scalar;

use super::{Mode, StageError};

/// Slopes of the two edges at a marked corner, measured inside the corner
/// plane against its horizontal line (the line orthogonal to the extremal
/// direction). Rigid motions that send the direction to `±z` and keep the
/// corner plane through the `y` axis leave these values unchanged, so they
/// can be compared before anything is placed. Order: `(previous, next)`.
pub fn corner_slopes<T: Scalar>(m: &MarkedKnot<T>) -> Result<[T; 2], StageError> {
    let v = m.vertex();
    let (a, b) = m.neighbours();
    let normal = (a - v)
        .cross(b - v)
        .normalized()
        .map_err(|_| StageError::Degenerate("flat corner"))?;
    let h = m
        .direction
        .cross(normal)
        .normalized()
        .map_err(|_| StageError::Degenerate("corner plane"))?;
    let t = normal.cross(h);
    let slope = |p: Vec3<T>| {
        let e = p - v;
        let run = e.dot(h).abs();
        if run == T::zero() {
            T::infinity()
        } else {
            e.dot(t).abs() / run
        }
    };
    Ok([slope(a), slope(b)])
}

/// Extremal directions aimed at each vertex's corner: the outward bisector
/// of the corner and directions swung towards either edge's outward normal
/// (making that edge shallow), each also tilted out of the corner plane.
/// Only directions for which the vertex is a strict maximum, by a margin of
/// a millionth of the knot's size, are kept.
pub fn corner_directions<T: Scalar>(knot: &PolygonalKnot<T>) -> Vec<MarkedKnot<T>> {
    let size = bounding_diagonal(knot.vertices().iter().copied());
    let n = knot.len();
    let mut out = Vec::new();
    for i in 0..n {
        let v = knot.vertex(i);
        let (Ok(a), Ok(b)) = (
            (knot.vertex(i + n - 1) - v).normalized(),
            (knot.vertex(i + 1) - v).normalized(),
        ) else {
            continue;
        };
        let (Ok(o), Ok(normal)) = ((-(a + b)).normalized(), a.cross(b).normalized()) else {
            continue;
        };
        let away = |e: Vec3<T>, other: Vec3<T>| (-(other - e * other.dot(e))).normalized();
        let (Ok(na), Ok(nb)) = (away(a, b), away(b, a)) else {
            continue;
        };
        let mut dirs = vec![o];
        for s in [0.5, 0.9] {
            let s = T::lit(s);
            for edge_normal in [na, nb] {
                if let Ok(d) = (o * (T::one() - s) + edge_normal * s).normalized() {
                    dirs.push(d);
                }
            }
        }
        for d in dirs {
            for tilt in [0.0, 0.5, -0.5] {
                let Ok(d) = (d + normal * T::lit(tilt)).normalized() else {
                    continue;
                };
                let m = MarkedKnot {
                    knot: knot.clone(),
                    v_index: i,
                    direction: d,
                };
                if m.margin() > size * T::lit(1e-6) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Directions that make one edge at a corner nearly horizontal: the normal of
/// a plane through that edge supporting the whole knot (best of a sweep of
/// angles around the edge), tilted down along the edge by a fraction of the
/// clearance so the corner is a strict maximum.
pub fn flat_edge_directions<T: Scalar>(knot: &PolygonalKnot<T>) -> Vec<MarkedKnot<T>> {
    const SWEEP: usize = 48;
    let size = bounding_diagonal(knot.vertices().iter().copied());
    let n = knot.len();
    let mut out = Vec::new();
    for i in 0..n {
        let v = knot.vertex(i);
        for j in [i + n - 1, i + 1] {
            let Ok(e) = (knot.vertex(j) - v).normalized() else {
                continue;
            };
            let p = e.any_perpendicular();
            let q = e.cross(p);
            let mut best: Option<(T, Vec3<T>)> = None;
            for k in 0..SWEEP {
                let phi = T::lit(std::f64::consts::TAU * k as f64 / SWEEP as f64);
                let d = p * phi.cos() + q * phi.sin();
                let gap = (0..n)
                    .filter(|&x| x != i && x != j % n)
                    .map(|x| -d.dot(knot.vertex(x) - v))
                    .fold(T::infinity(), |a, b| a.min(b));
                if gap > T::zero() && best.is_none_or(|(g, _)| gap > g) {
                    best = Some((gap, d));
                }
            }
            let Some((gap, d)) = best else { continue };
            for t in [0.02, 0.1, 0.3] {
                let Ok(d) = (d - e * (T::lit(t) * gap / size)).normalized() else {
                    continue;
                };
                let m = MarkedKnot {
                    knot: knot.clone(),
                    v_index: i,
                    direction: d,
                };
                if m.margin() > size * T::lit(1e-6) {
                    out.push(m);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Labeling {
    /// Input index playing K1, K2, K3.
    pub roles: [usize; 3],
    /// `f2` is the edge from `v2` to its next vertex (else the previous).
    pub f2_next: bool,
    /// `e1` is the edge from `v1` to its next vertex.
    pub e1_next: bool,
    /// Ratio of the next-least slope to the slope of `f2`; above one.
    pub margin: f64,
}

/// Smallest accepted margin ratio: `f2` must be strictly the least steep.
pub const MIN_MARGIN: f64 = 1.0 + 1e-6;

pub(super) const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// All admissible assignments for the given per-knot slopes, best margin
/// first. In rigid mode the planar knots must be K1 and K3.
pub fn rank_assignments(slopes: [[f64; 2]; 3], planar: [bool; 3], mode: Mode) -> Vec<Labeling> {
    let mut out = Vec::new();
    for roles in PERMUTATIONS {
        if mode == Mode::RigidOnly && !(planar[roles[0]] && planar[roles[2]]) {
            continue;
        }
        let (k2, k3) = (slopes[roles[1]], slopes[roles[2]]);
        for (f, f2_next) in [(1, true), (0, false)] {
            let others = k2[1 - f].min(k3[0]).min(k3[1]);
            let margin = others / k2[f];
            if margin > MIN_MARGIN {
                out.push(Labeling {
                    roles,
                    f2_next,
                    e1_next: false,
                    margin,
                });
            }
        }
    }
    out.sort_by(|a, b| b.margin.partial_cmp(&a.margin).expect("finite margins"));
    out
}

/// Best assignment for three marked knots.
pub fn choose_labels<T: Scalar>(
    marked: &[MarkedKnot<T>; 3],
    planar: [bool; 3],
    mode: Mode,
) -> Result<Labeling, StageError> {
    let mut slopes = [[0.0; 2]; 3];
    for (s, m) in slopes.iter_mut().zip(marked) {
        let [a, b] = corner_slopes(m)?;
        *s = [a.as_f64(), b.as_f64()];
    }
    rank_assignments(slopes, planar, mode)
        .into_iter()
        .next()
        .ok_or(StageError::LabelingExhausted)
}
