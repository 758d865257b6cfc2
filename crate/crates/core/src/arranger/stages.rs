//! The individual moves of the construction, in order.
//!
//! All three marked vertices start at the origin. K1 is laid in the `xy`
//! plane with `e1` on the `y` axis; K2 hangs below the origin and K3 stands
//! above it, both with their corner planes through the `y` axis. After the
//! planes are made to coincide, a sequence of small moves (translate K2
//! along `f2`, translate K3 into its corner, rotate K3 about a line `l`,
//! translate K2 into the corner of K1) resolves the triple contact at the
//! origin into the Borromean rings.

use crate::geom::{
    point_segment_distance, rotation_about_line, segment_closest_points, segment_distance, Line3,
    Mat3, Segment, SimilarityTransform, Tolerance, Vec3,
};
use crate::knot::{circumradius_about, MarkedKnot, PolygonalKnot};
use crate::scalar::Scalar;

use super::StageError;

pub const K1: usize = 0;
pub const K2: usize = 1;
pub const K3: usize = 2;

/// Which half of the `y` axis carries `e1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisSide {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Placed,
    Oriented,
    Scaled,
    Aligned,
    PerturbedK2,
    PerturbedK3,
    LineChosen,
    RotatedK3,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBudget<T> {
    /// Smallest distance between edges of different knots that do not meet
    /// at the origin, after alignment.
    pub d: T,
    pub eps_ball: T,
    pub eps: T,
    pub delta: T,
    pub tau: T,
    pub alpha: T,
    pub rho: T,
}

impl<T: Scalar> StepBudget<T> {
    pub fn new(eps_ball: T) -> Self {
        let z = T::zero();
        Self {
            d: T::infinity(),
            eps_ball,
            eps: z,
            delta: z,
            tau: z,
            alpha: z,
            rho: z,
        }
    }

    /// Starting value for every translation cap.
    pub fn cap(&self) -> T {
        (self.d / T::lit(4.0)).min(self.eps_ball / T::lit(4.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLine<T> {
    pub line: Line3<T>,
    pub p_e: Vec3<T>,
    pub p_f: Vec3<T>,
}

/// The three knots in role order with their accumulated transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrangementState<T> {
    pub inputs: [PolygonalKnot<T>; 3],
    pub transforms: [SimilarityTransform<T>; 3],
    pub v_index: [usize; 3],
    /// Whether `e_i` runs from `v_i` to the next vertex.
    pub e_next: [bool; 3],
    /// Extremal directions in input coordinates.
    pub directions: [Vec3<T>; 3],
    /// Unit vector in the common plane `P`, orthogonal to `y`, with `z > 0`.
    pub up: Option<Vec3<T>>,
    pub w: Option<Vec3<T>>,
    pub v: Option<Vec3<T>>,
    pub u: Option<Vec3<T>>,
    pub line: Option<AxisLine<T>>,
    pub budget: StepBudget<T>,
    pub stage: Stage,
    /// Contact threshold for the local moves.
    pub tol: T,
}

impl<T: Scalar> ArrangementState<T> {
    pub fn knot(&self, r: usize) -> PolygonalKnot<T> {
        self.inputs[r].transformed(&self.transforms[r])
    }

    pub fn vertex(&self, r: usize) -> Vec3<T> {
        self.transforms[r].apply(self.inputs[r].vertex(self.v_index[r]))
    }

    fn neighbour_index(&self, r: usize, next: bool) -> usize {
        let n = self.inputs[r].len();
        if next {
            (self.v_index[r] + 1) % n
        } else {
            (self.v_index[r] + n - 1) % n
        }
    }

    /// Far endpoint of `e_r` (`e = true`) or `f_r`.
    pub fn far(&self, r: usize, e: bool) -> Vec3<T> {
        let next = self.e_next[r] == e;
        self.transforms[r].apply(self.inputs[r].vertex(self.neighbour_index(r, next)))
    }

    /// Edge index of `e_r` or `f_r` within knot `r`.
    pub fn edge_index(&self, r: usize, e: bool) -> usize {
        let n = self.inputs[r].len();
        if self.e_next[r] == e {
            self.v_index[r]
        } else {
            (self.v_index[r] + n - 1) % n
        }
    }

    /// `e_r` or `f_r` as a segment from the marked vertex outward.
    pub fn corner_edge(&self, r: usize, e: bool) -> Segment<T> {
        Segment {
            a: self.vertex(r),
            b: self.far(r, e),
        }
    }

    fn unit_from_vertex(&self, r: usize, e: bool) -> Result<Vec3<T>, StageError> {
        (self.far(r, e) - self.vertex(r))
            .normalized()
            .map_err(|_| StageError::Degenerate("zero-length corner edge"))
    }

    pub fn segments(&self, r: usize) -> Vec<Segment<T>> {
        self.knot(r).edges().collect()
    }

    pub fn apply(&mut self, r: usize, t: &SimilarityTransform<T>) {
        self.transforms[r] = SimilarityTransform::compose(t, &self.transforms[r]);
    }

    /// Smallest distance from knot `r` to the other two knots over edge pairs
    /// that are not in contact (distance above `tol`).
    pub fn protected_distance(&self, r: usize) -> T {
        let mine = self.segments(r);
        let mut best = T::infinity();
        for o in (0..3).filter(|&o| o != r) {
            for f in self.segments(o) {
                for e in &mine {
                    let d = segment_distance(e, &f);
                    if d > self.tol {
                        best = best.min(d);
                    }
                }
            }
        }
        best
    }

    /// Edge pairs `(edge of a, edge of b)` in contact.
    pub fn contacts(&self, a: usize, b: usize) -> Vec<(usize, usize, Vec3<T>)> {
        let (sa, sb) = (self.segments(a), self.segments(b));
        let mut out = Vec::new();
        for (i, e) in sa.iter().enumerate() {
            for (j, f) in sb.iter().enumerate() {
                let (s, t, d) = segment_closest_points(e, f);
                if d <= self.tol {
                    out.push((i, j, (e.point_at(s) + f.point_at(t)) * T::lit(0.5)));
                }
            }
        }
        out
    }

    pub fn min_distance(&self, a: usize, b: usize) -> T {
        let (sa, sb) = (self.segments(a), self.segments(b));
        sa.iter()
            .flat_map(|e| sb.iter().map(move |f| segment_distance(e, f)))
            .fold(T::infinity(), T::min)
    }

    pub(crate) fn plane_up(&self, r: usize) -> Result<Vec3<T>, StageError> {
        let v = self.vertex(r);
        let n = (self.far(r, true) - v).cross(self.far(r, false) - v);
        let up = Vec3::unit_y()
            .cross(n)
            .normalized()
            .map_err(|_| StageError::Degenerate("corner plane"))?;
        Ok(if up.z < T::zero() { -up } else { up })
    }
}

fn frame<T: Scalar>(x: Vec3<T>, y: Vec3<T>, z: Vec3<T>, origin: Vec3<T>) -> SimilarityTransform<T> {
    let r = Mat3::from_rows(x, y, z);
    SimilarityTransform {
        rotation: r,
        translation: -r.mul_vec(origin),
        scale: T::one(),
    }
}

/// Corner vertex and unit directions along `e` and `f`.
type Corner<T> = (Vec3<T>, Vec3<T>, Vec3<T>);

fn corner<T: Scalar>(m: &MarkedKnot<T>, e_next: bool) -> Result<Corner<T>, StageError> {
    let v = m.vertex();
    let (prev, next) = m.neighbours();
    let (ef, ff) = if e_next { (next, prev) } else { (prev, next) };
    let e = (ef - v)
        .normalized()
        .map_err(|_| StageError::Degenerate("zero-length corner edge"))?;
    let f = (ff - v)
        .normalized()
        .map_err(|_| StageError::Degenerate("zero-length corner edge"))?;
    Ok((v, e, f))
}

/// Rigid motion taking `v1` to the origin, `e1` onto the chosen half of the
/// `y` axis and `f1` into the `xy` plane with positive `x`.
pub fn stage_place_k1<T: Scalar>(
    m: &MarkedKnot<T>,
    e_next: bool,
    side: AxisSide,
) -> Result<SimilarityTransform<T>, StageError> {
    let (v, e, f) = corner(m, e_next)?;
    let y = match side {
        AxisSide::Negative => -e,
        AxisSide::Positive => e,
    };
    let x = (f - e * f.dot(e))
        .normalized()
        .map_err(|_| StageError::Degenerate("collinear corner"))?;
    Ok(frame(x, y, x.cross(y), v))
}

fn place_extremal<T: Scalar>(
    m: &MarkedKnot<T>,
    up: bool,
) -> Result<SimilarityTransform<T>, StageError> {
    let (v, e, f) = corner(m, true)?;
    let d = m
        .direction
        .normalized()
        .map_err(|_| StageError::Degenerate("extremal direction"))?;
    let n = e
        .cross(f)
        .normalized()
        .map_err(|_| StageError::Degenerate("collinear corner"))?;
    let h = d
        .cross(n)
        .normalized()
        .map_err(|_| StageError::Degenerate("direction normal to corner plane"))?;
    // either sign works; keep the one closest to the current y axis so a
    // corner already in place is left alone
    let h = if (h.y, h.x, h.z) < (T::zero(), T::zero(), T::zero()) {
        -h
    } else {
        h
    };
    let z = if up { d } else { -d };
    Ok(frame(h.cross(z), h, z, v))
}

/// `v2` to the origin as the strict top of K2; corner plane through the `y`
/// axis.
pub fn stage_place_k2<T: Scalar>(m: &MarkedKnot<T>) -> Result<SimilarityTransform<T>, StageError> {
    place_extremal(m, true)
}

/// `v3` to the origin as the strict bottom of K3; corner plane through the
/// `y` axis.
pub fn stage_place_k3<T: Scalar>(m: &MarkedKnot<T>) -> Result<SimilarityTransform<T>, StageError> {
    place_extremal(m, false)
}

fn half_turn_z<T: Scalar>() -> SimilarityTransform<T> {
    let (o, z) = (T::one(), T::zero());
    SimilarityTransform::rotation(Mat3::from_rows(
        Vec3::new(-o, z, z),
        Vec3::new(z, -o, z),
        Vec3::new(z, z, o),
    ))
}

/// Turns K2 and K3 about `z` so both upper half-planes lie on the side of
/// negative `x` when `P3` is steeper, positive `x` when `P2` is; with equal
/// steepness K3 is turned onto `P2`.
pub fn orient_halfplanes<T: Scalar>(
    state: &mut ArrangementState<T>,
    eps_angle: T,
) -> Result<(), StageError> {
    let (u2, u3) = (state.plane_up(K2)?, state.plane_up(K3)?);
    if (u2.z - u3.z).abs() <= eps_angle {
        if u2.x * u3.x < T::zero() && u3.x.abs() > eps_angle {
            state.apply(K3, &half_turn_z());
        }
    } else {
        let want_negative = u3.z > u2.z;
        for (r, u) in [(K2, u2), (K3, u3)] {
            let wrong = if want_negative {
                u.x > T::zero()
            } else {
                u.x < T::zero()
            };
            if wrong {
                state.apply(r, &half_turn_z());
            }
        }
    }
    state.stage = Stage::Oriented;
    Ok(())
}

/// Scale factors `(λ1, λ3)` pushing the non-flat parts of K3, then K1, out
/// beyond everything closer in. Never below one.
pub fn scale_factors<T: Scalar>(r2: T, r3: T, eps_ball: T, safety: T) -> (T, T) {
    let k = T::lit(1.01) * safety / eps_ball;
    let l3 = (k * r2).max(T::one());
    let l1 = (k * r2.max(l3 * r3)).max(T::one());
    (l1, l3)
}

pub fn scale_components<T: Scalar>(state: &mut ArrangementState<T>, safety: T) {
    let r2 = circumradius_about(&state.knot(K2), Vec3::zero());
    let r3 = circumradius_about(&state.knot(K3), Vec3::zero());
    let (l1, l3) = scale_factors(r2, r3, state.budget.eps_ball, safety);
    state.apply(K3, &SimilarityTransform::scaling(l3));
    state.apply(K1, &SimilarityTransform::scaling(l1));
    state.stage = Stage::Scaled;
}

/// Rotation about the `y` axis taking the upper half of `P3` onto that of
/// `P2`; points above the `xy` plane lose `x`.
pub fn align_planes<T: Scalar>(state: &mut ArrangementState<T>) -> Result<(), StageError> {
    let (u2, u3) = (state.plane_up(K2)?, state.plane_up(K3)?);
    let beta = u3.z.atan2(u3.x) - u2.z.atan2(u2.x);
    if beta > Tolerance::<T>::relative_factor() || beta.abs() >= T::FRAC_PI_2() {
        return Err(StageError::Degenerate(
            "half-planes not oriented for an acute alignment",
        ));
    }
    state.apply(
        K3,
        &SimilarityTransform::rotation(Mat3::rotation(Vec3::unit_y(), beta)),
    );
    state.up = Some(u2);
    state.stage = Stage::Aligned;
    Ok(())
}

/// Tilts K3 inside `P` by `10·eps_angle` when `e2` is collinear with one of
/// K3's corner edges.
pub fn separate_collinear<T: Scalar>(
    state: &mut ArrangementState<T>,
    eps_angle: T,
) -> Result<bool, StageError> {
    let e2 = state.unit_from_vertex(K2, true)?;
    let collinear = [true, false]
        .iter()
        .map(|&e| state.unit_from_vertex(K3, e))
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .any(|d| e2.cross(*d).norm() <= eps_angle);
    if collinear {
        let up = state
            .up
            .ok_or(StageError::Degenerate("planes not aligned"))?;
        let normal = up.cross(Vec3::unit_y());
        state.apply(
            K3,
            &SimilarityTransform::rotation(Mat3::rotation(normal, T::lit(10.0) * eps_angle)),
        );
    }
    Ok(collinear)
}

/// Translates K2 by `eps·w`, `w` the unit vector along `f2` ending at `v2`.
pub fn perturb_k2<T: Scalar>(state: &mut ArrangementState<T>, theta: T) -> Result<(), StageError> {
    let w = (state.vertex(K2) - state.far(K2, false))
        .normalized()
        .map_err(|_| StageError::Degenerate("f2"))?;
    let eps = (theta * state.budget.cap()).min(T::lit(0.49) * state.protected_distance(K2));
    let mut next = state.clone();
    next.apply(K2, &SimilarityTransform::translation(w * eps));
    let tol = state.tol;
    let f2 = next.corner_edge(K2, false);
    let (_, t, d) =
        segment_closest_points(&next.corner_edge(K2, true), &next.corner_edge(K1, true));
    let crossing = next.corner_edge(K1, true).point_at(t);
    let ok = next.vertex(K2).z > tol
        && point_segment_distance(Vec3::zero(), &f2) <= tol
        && d <= tol
        && crossing.norm() > tol;
    if !ok {
        return Err(StageError::StepTooLarge("perturb_K2"));
    }
    next.w = Some(w);
    next.budget.eps = eps;
    next.stage = Stage::PerturbedK2;
    *state = next;
    Ok(())
}

/// Translates K3 by `delta·v`, `v` pointing out of the corner of K3 along
/// its bisector, so that `e3` and `f3` both cross `f2`. Relabels K3's edges
/// so that `e3` is the one meeting `f2` above the `xy` plane.
pub fn perturb_k3<T: Scalar>(state: &mut ArrangementState<T>, theta: T) -> Result<(), StageError> {
    let bis = state.unit_from_vertex(K3, true)? + state.unit_from_vertex(K3, false)?;
    let v = -bis
        .normalized()
        .map_err(|_| StageError::Degenerate("K3 corner"))?;
    let delta = (theta * state.budget.cap())
        .min(state.budget.eps / T::lit(4.0))
        .min(T::lit(0.49) * state.protected_distance(K3));
    let mut next = state.clone();
    next.apply(K3, &SimilarityTransform::translation(v * delta));
    let tol = next.tol;
    let contacts = next.contacts(K2, K3);
    let f2 = next.edge_index(K2, false);
    let corner3 = [next.edge_index(K3, true), next.edge_index(K3, false)];
    let fail = || StageError::StepTooLarge("perturb_K3");
    if contacts.len() != 2
        || contacts
            .iter()
            .any(|c| c.0 != f2 || !corner3.contains(&c.1))
        || contacts[0].1 == contacts[1].1
    {
        return Err(fail());
    }
    let (v2, v3) = (next.vertex(K2), next.vertex(K3));
    if contacts
        .iter()
        .any(|c| c.2.distance(v2) <= tol || c.2.distance(v3) <= tol)
    {
        return Err(fail());
    }
    let (upper, lower) = if contacts[0].2.z > contacts[1].2.z {
        (contacts[0], contacts[1])
    } else {
        (contacts[1], contacts[0])
    };
    if !(upper.2.z > tol && lower.2.z < -tol) {
        return Err(fail());
    }
    if upper.1 != next.edge_index(K3, true) {
        next.e_next[K3] = !next.e_next[K3];
    }
    next.v = Some(v);
    next.budget.delta = delta;
    next.stage = Stage::PerturbedK3;
    *state = next;
    Ok(())
}

/// Parameters `(a, b)` with `p + a·d = c + b·e` for coplanar lines.
fn line_intersection<T: Scalar>(p: Vec3<T>, d: Vec3<T>, c: Vec3<T>, e: Vec3<T>) -> Option<(T, T)> {
    let n = d.cross(e);
    let nn = n.norm_squared();
    if nn == T::zero() {
        return None;
    }
    let a = (c - p).cross(e).dot(n) / nn;
    let b = (c - p).cross(d).dot(n) / nn;
    Some((a, b))
}

pub const TAU_START: f64 = 0.1;
const LINE_ATTEMPTS: usize = 40;

/// A line in `P` parallel to `f2`, a fraction `tau` of the way from `f2`
/// towards `v3`, meeting `e3` above and `f3` below the `xy` plane.
pub fn choose_line_l<T: Scalar>(
    state: &mut ArrangementState<T>,
    theta: T,
) -> Result<(), StageError> {
    let q0 = state.vertex(K2);
    let dir = (state.far(K2, false) - q0)
        .normalized()
        .map_err(|_| StageError::Degenerate("f2"))?;
    let v3 = state.vertex(K3);
    let rel = v3 - q0;
    let offset = rel - dir * rel.dot(dir);
    if offset.norm() <= state.tol {
        return Err(StageError::NoValidLine);
    }
    let (e3, f3) = (state.corner_edge(K3, true), state.corner_edge(K3, false));
    let mut tau = T::lit(TAU_START) * theta;
    for _ in 0..LINE_ATTEMPTS {
        let p = q0 + offset * tau;
        let hit = |s: &Segment<T>| {
            line_intersection(p, dir, s.a, s.b - s.a)
                .filter(|&(_, b)| b > T::zero() && b < T::one())
                .map(|(_, b)| s.point_at(b))
        };
        if let (Some(p_e), Some(p_f)) = (hit(&e3), hit(&f3)) {
            if p_e.z > state.tol && p_f.z < -state.tol {
                let line = Line3::new(p, dir).map_err(|_| StageError::Degenerate("l"))?;
                state.line = Some(AxisLine { line, p_e, p_f });
                state.budget.tau = tau;
                state.stage = Stage::LineChosen;
                return Ok(());
            }
        }
        tau = tau / T::lit(2.0);
    }
    Err(StageError::NoValidLine)
}

const BISECTION_DEPTH: usize = 24;

/// True when turning `seg` by `alpha` about `axis` cannot bring it within
/// reach of `other`: every point moves at most `alpha` times its distance
/// from the axis. Pieces far from `other` are cleared wholesale; the rest
/// is bisected.
fn rotation_clear<T: Scalar>(
    seg: &Segment<T>,
    other: &Segment<T>,
    axis: &Line3<T>,
    alpha: T,
    depth: usize,
) -> bool {
    let reach = axis.distance_to(seg.a).max(axis.distance_to(seg.b));
    let gap = segment_distance(seg, other);
    if alpha.abs() * reach < T::lit(0.5) * gap {
        return true;
    }
    if depth == 0 || gap == T::zero() {
        return false;
    }
    let m = seg.midpoint();
    rotation_clear(&Segment { a: seg.a, b: m }, other, axis, alpha, depth - 1)
        && rotation_clear(&Segment { a: m, b: seg.b }, other, axis, alpha, depth - 1)
}

pub const ALPHA_START: f64 = 0.25;
const ALPHA_HALVINGS: usize = 60;

/// Rotates K3 about `l` by the largest admissible angle not exceeding
/// `ALPHA_START·theta`, in the sense that decreases the `x` coordinate of
/// `v3`.
pub fn rotate_k3_about_l<T: Scalar>(
    state: &mut ArrangementState<T>,
    theta: T,
) -> Result<(), StageError> {
    let l = state.line.ok_or(StageError::Degenerate("l not chosen"))?;
    let v3 = state.vertex(K3);
    let probe = rotation_about_line(&l.line, T::lit(1e-3)).apply(v3);
    let sign = if probe.x < v3.x { T::one() } else { -T::one() };
    let mine = state.segments(K3);
    let guarded: Vec<(Segment<T>, Segment<T>)> = [K1, K2]
        .iter()
        .flat_map(|&o| state.segments(o))
        .flat_map(|f| mine.iter().map(move |e| (*e, f)))
        .filter(|(e, f)| segment_distance(e, f) > state.tol)
        .collect();
    let mut alpha = T::lit(ALPHA_START) * theta;
    let mut found = false;
    for _ in 0..ALPHA_HALVINGS {
        if guarded
            .iter()
            .all(|(e, f)| rotation_clear(e, f, &l.line, alpha, BISECTION_DEPTH))
        {
            found = true;
            break;
        }
        alpha = alpha / T::lit(2.0);
    }
    if !found {
        return Err(StageError::StepTooLarge("rotate_K3_about_l"));
    }
    let mut next = state.clone();
    next.apply(K3, &rotation_about_line(&l.line, sign * alpha));
    let tol = next.tol;
    let moved = next.vertex(K3);
    let ok =
        moved.x < v3.x - tol && next.min_distance(K2, K3) > tol && next.min_distance(K1, K3) > tol;
    if !ok {
        return Err(StageError::StepTooLarge("rotate_K3_about_l"));
    }
    next.budget.alpha = alpha;
    next.stage = Stage::RotatedK3;
    *state = next;
    Ok(())
}

/// Translates K2 by `rho·u`, `u` the bisector of the corner of K1.
pub fn final_translate_k2<T: Scalar>(
    state: &mut ArrangementState<T>,
    theta: T,
) -> Result<(), StageError> {
    let bis = state.unit_from_vertex(K1, true)? + state.unit_from_vertex(K1, false)?;
    let u = bis
        .normalized()
        .map_err(|_| StageError::Degenerate("K1 corner"))?;
    let rho = (theta * state.budget.cap()).min(T::lit(0.49) * state.protected_distance(K2));
    let mut next = state.clone();
    next.apply(K2, &SimilarityTransform::translation(u * rho));
    let tol = next.tol;
    if !(next.min_distance(K1, K2) > tol
        && next.min_distance(K2, K3) > tol
        && next.min_distance(K1, K3) > tol)
    {
        return Err(StageError::StepTooLarge("final_translate_K2"));
    }
    next.u = Some(u);
    next.budget.rho = rho;
    next.stage = Stage::Done;
    *state = next;
    Ok(())
}
