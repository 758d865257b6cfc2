//! Gauss linking integral of two closed polygons, edge pair by edge pair.
//!
//! For segments `a1a2` and `b1b2` the set of differences `a - b` is a planar
//! parallelogram and the double integral is minus the solid angle it
//! subtends at the origin.

use crate::geom::{bounding_diagonal, segment_distance, Segment, Vec3};
use crate::knot::PolygonalKnot;
use crate::scalar::Scalar;

use super::InvariantError;

/// Signed solid angle at the origin of the polygon `pts` (the spherical
/// polygon its edges project to), oriented by vertex order. Fans over the foot
/// point of the origin on the plane with the given normal, which keeps every
/// triangle well conditioned even when the polygon is far away or nearly
/// edge-on. The fan is exact for any apex, so a normal spoilt by rounding
/// (nearly parallel edges) only costs conditioning.
pub(crate) fn planar_solid_angle<T: Scalar>(pts: &[Vec3<T>], normal: Vec3<T>) -> T {
    let n = match normal.normalized() {
        Ok(n) => n,
        Err(_) => return T::zero(),
    };
    let h = pts[0].dot(n);
    if h == T::zero() {
        return T::zero();
    }
    let foot = n * h;
    let sh = h.signum();
    let two = T::lit(2.0);
    let mut total = T::zero();
    for k in 0..pts.len() {
        let (pk, qk) = (pts[k], pts[(k + 1) % pts.len()]);
        let (p, q) = (pk - foot, qk - foot);
        let (pn, qn) = (pk.norm(), qk.norm());
        let num = sh * n.dot(p.cross(q));
        let den = pn * qn + sh * (n.dot(pk) * qn + n.dot(qk) * pn) + pk.dot(qk);
        total = total + two * num.atan2(den);
    }
    total
}

/// Gauss integral contribution of one edge pair, in units of `4π`.
pub(crate) fn pair_contribution<T: Scalar>(a: &Segment<T>, b: &Segment<T>) -> T {
    let quad = [a.a - b.a, a.b - b.a, a.b - b.b, a.a - b.b];
    let normal = (a.b - a.a).cross(b.a - b.b);
    -planar_solid_angle(&quad, normal) / (T::lit(4.0) * T::PI())
}

/// Real-valued linking number from the closed-form Gauss integral.
///
/// Fails when two edges come closer than the resolution of the coordinates
/// (64 ulps of the bounding-box diagonal); the integral is well conditioned
/// above that, and the certificate cross-checks it against the diagram.
pub fn linking_number_gauss<T: Scalar>(
    a: &PolygonalKnot<T>,
    b: &PolygonalKnot<T>,
) -> Result<T, InvariantError> {
    let diag = bounding_diagonal(a.vertices().iter().chain(b.vertices()).copied());
    let floor = T::lit(64.0) * T::epsilon() * diag.max(T::one());
    let mut min_dist = T::infinity();
    let mut sum = T::zero();
    for ea in a.edges() {
        for eb in b.edges() {
            min_dist = min_dist.min(segment_distance(&ea, &eb));
            sum = sum + pair_contribution(&ea, &eb);
        }
    }
    if min_dist < floor {
        return Err(InvariantError::TooClose(min_dist.as_f64()));
    }
    Ok(sum)
}
