//! Vector geometry kernel: points, segments, planes, lines and similarity
//! transforms, plus the tolerance-aware predicates the rest of the crate uses.
//!
//! Every type is a plain value generic over [`Scalar`]; nothing here allocates
//! except the convenience constructors that consume iterators.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("segment has zero length")]
    ZeroLengthSegment,
    #[error("direction vector has zero length")]
    ZeroDirection,
    #[error("edge is perpendicular to the reference axis (infinite slope)")]
    PerpendicularEdge,
    #[error("edge endpoint lies {0} away from the plane")]
    EdgeNotInPlane(f64),
    #[error("transform is not a proper similarity: {0}")]
    InvalidTransform(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Self::new(T::lit(x), T::lit(y), T::lit(z))
    }

    pub fn to_f64(self) -> [f64; 3] {
        [self.x.as_f64(), self.y.as_f64(), self.z.as_f64()]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        // hypot-style scaling keeps tiny and huge vectors accurate
        let m = self.x.abs().max(self.y.abs()).max(self.z.abs());
        if m == T::zero() || !m.is_finite() {
            return m;
        }
        let s = self * (T::one() / m);
        m * s.norm_squared().sqrt()
    }

    pub fn normalized(self) -> Result<Self, GeomError> {
        let n = self.norm();
        if !n.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if n == T::zero() {
            return Err(GeomError::ZeroDirection);
        }
        Ok(self * (T::one() / n))
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    /// Any unit vector perpendicular to `self` (which must be nonzero).
    pub fn any_perpendicular(self) -> Self {
        let a = if self.x.abs() <= self.y.abs() && self.x.abs() <= self.z.abs() {
            Self::unit_x()
        } else if self.y.abs() <= self.z.abs() {
            Self::unit_y()
        } else {
            Self::unit_z()
        };
        self.cross(a)
            .normalized()
            .unwrap_or_else(|_| Self::unit_x())
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub rows: [Vec3<T>; 3],
}

impl<T: Scalar> Mat3<T> {
    pub fn from_rows(r0: Vec3<T>, r1: Vec3<T>, r2: Vec3<T>) -> Self {
        Self { rows: [r0, r1, r2] }
    }

    pub fn identity() -> Self {
        Self::from_rows(Vec3::unit_x(), Vec3::unit_y(), Vec3::unit_z())
    }

    pub fn transpose(&self) -> Self {
        let [a, b, c] = self.rows;
        Self::from_rows(
            Vec3::new(a.x, b.x, c.x),
            Vec3::new(a.y, b.y, c.y),
            Vec3::new(a.z, b.z, c.z),
        )
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            self.rows[0].dot(v),
            self.rows[1].dot(v),
            self.rows[2].dot(v),
        )
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let ot = o.transpose();
        let row = |r: Vec3<T>| Vec3::new(r.dot(ot.rows[0]), r.dot(ot.rows[1]), r.dot(ot.rows[2]));
        Self::from_rows(row(self.rows[0]), row(self.rows[1]), row(self.rows[2]))
    }

    pub fn det(&self) -> T {
        self.rows[0].dot(self.rows[1].cross(self.rows[2]))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.rows[r][c]
    }

    /// Right-handed rotation by `angle` about the unit `axis` (Rodrigues).
    pub fn rotation(axis: Vec3<T>, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        let Vec3 { x, y, z } = axis;
        Self::from_rows(
            Vec3::new(c + t * x * x, t * x * y - s * z, t * x * z + s * y),
            Vec3::new(t * x * y + s * z, c + t * y * y, t * y * z - s * x),
            Vec3::new(t * x * z - s * y, t * y * z + s * x, c + t * z * z),
        )
    }

    /// Largest entrywise deviation of `MᵀM` from the identity.
    pub fn orthogonality_error(&self) -> T {
        let p = self.transpose().mul_mat(self);
        let mut worst = T::zero();
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { T::one() } else { T::zero() };
                worst = worst.max((p.get(r, c) - target).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub a: Vec3<T>,
    pub b: Vec3<T>,
}

impl<T: Scalar> Segment<T> {
    pub fn new(a: Vec3<T>, b: Vec3<T>) -> Result<Self, GeomError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if a == b {
            return Err(GeomError::ZeroLengthSegment);
        }
        Ok(Self { a, b })
    }

    pub fn direction(&self) -> Vec3<T> {
        self.b - self.a
    }

    pub fn length(&self) -> T {
        self.direction().norm()
    }

    pub fn point_at(&self, t: T) -> Vec3<T> {
        self.a.lerp(self.b, t)
    }

    pub fn midpoint(&self) -> Vec3<T> {
        self.point_at(T::lit(0.5))
    }

    pub fn reversed(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane<T> {
    pub normal: Vec3<T>,
    pub offset: T,
}

impl<T: Scalar> Plane<T> {
    pub fn from_point_normal(point: Vec3<T>, normal: Vec3<T>) -> Result<Self, GeomError> {
        let normal = normal.normalized()?;
        Ok(Self {
            normal,
            offset: normal.dot(point),
        })
    }

    /// Plane through `origin` spanned by two non-parallel directions.
    pub fn from_point_directions(
        origin: Vec3<T>,
        u: Vec3<T>,
        v: Vec3<T>,
    ) -> Result<Self, GeomError> {
        Self::from_point_normal(origin, u.cross(v))
    }

    pub fn signed_distance(&self, p: Vec3<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    pub fn contains(&self, p: Vec3<T>, eps: T) -> bool {
        self.signed_distance(p).abs() <= eps
    }

    pub fn project(&self, p: Vec3<T>) -> Vec3<T> {
        p - self.normal * self.signed_distance(p)
    }

    /// Angle between this plane and the plane `z = const`, in `[0, π/2]`.
    pub fn tilt_from_horizontal(&self) -> T {
        self.normal.z.abs().min(T::one()).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3<T> {
    pub point: Vec3<T>,
    pub direction: Vec3<T>,
}

impl<T: Scalar> Line3<T> {
    pub fn new(point: Vec3<T>, direction: Vec3<T>) -> Result<Self, GeomError> {
        if !point.is_finite() {
            return Err(GeomError::NonFinite);
        }
        Ok(Self {
            point,
            direction: direction.normalized()?,
        })
    }

    pub fn distance_to(&self, p: Vec3<T>) -> T {
        let r = p - self.point;
        (r - self.direction * r.dot(self.direction)).norm()
    }
}

/// `p ↦ scale · rotation · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
    pub scale: T,
}

impl<T: Scalar> SimilarityTransform<T> {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
            scale: T::one(),
        }
    }

    pub fn translation(t: Vec3<T>) -> Self {
        Self {
            translation: t,
            ..Self::identity()
        }
    }

    pub fn rotation(r: Mat3<T>) -> Self {
        Self {
            rotation: r,
            ..Self::identity()
        }
    }

    pub fn scaling(s: T) -> Self {
        Self {
            scale: s,
            ..Self::identity()
        }
    }

    /// Checks orthogonality and orientation of the rotation part to `tol` per
    /// entry and positivity of the scale.
    pub fn validate(&self, tol: T) -> Result<(), GeomError> {
        if !(self.scale > T::zero()) || !self.scale.is_finite() {
            return Err(GeomError::InvalidTransform(
                "scale must be positive and finite",
            ));
        }
        if !self.translation.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if self.rotation.orthogonality_error() > tol {
            return Err(GeomError::InvalidTransform("rotation is not orthogonal"));
        }
        if (self.rotation.det() - T::one()).abs() > tol {
            return Err(GeomError::InvalidTransform(
                "rotation determinant is not +1",
            ));
        }
        Ok(())
    }

    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) * self.scale + self.translation
    }

    /// Applies only the linear part (for direction vectors).
    pub fn apply_vector(&self, v: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(v) * self.scale
    }

    /// The transform `p ↦ outer(inner(p))`.
    pub fn compose(outer: &Self, inner: &Self) -> Self {
        Self {
            rotation: outer.rotation.mul_mat(&inner.rotation),
            translation: outer.apply(inner.translation),
            scale: outer.scale * inner.scale,
        }
    }

    /// `other ∘ self`: apply `self` first, then `other`.
    pub fn then(&self, other: &Self) -> Self {
        Self::compose(other, self)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        let inv_s = T::one() / self.scale;
        Self {
            rotation: rt,
            translation: -(rt.mul_vec(self.translation) * inv_s),
            scale: inv_s,
        }
    }

    pub fn is_rigid(&self) -> bool {
        self.scale == T::one()
    }
}

pub fn apply<T: Scalar>(t: &SimilarityTransform<T>, p: Vec3<T>) -> Vec3<T> {
    t.apply(p)
}

pub fn compose<T: Scalar>(
    outer: &SimilarityTransform<T>,
    inner: &SimilarityTransform<T>,
) -> SimilarityTransform<T> {
    SimilarityTransform::compose(outer, inner)
}

/// Rigid rotation by `angle` (right-hand rule about `l.direction`) whose
/// fixed-point set is the line `l`.
pub fn rotation_about_line<T: Scalar>(l: &Line3<T>, angle: T) -> SimilarityTransform<T> {
    let r = Mat3::rotation(l.direction, angle);
    SimilarityTransform {
        rotation: r,
        translation: l.point - r.mul_vec(l.point),
        scale: T::one(),
    }
}

/// Parameters `(s, t)` of the closest points `s1(s)`, `s2(t)` and the distance
/// between them.
pub fn segment_closest_points<T: Scalar>(s1: &Segment<T>, s2: &Segment<T>) -> (T, T, T) {
    let zero = T::zero();
    let one = T::one();
    let clamp = |x: T| x.max(zero).min(one);
    let d1 = s1.direction();
    let d2 = s2.direction();
    let r = s1.a - s2.a;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(r);
    let c = d1.dot(r);
    let b = d1.dot(d2);
    let denom = a * e - b * b;
    let (mut s, mut t);
    // near-parallel segments fall back to an endpoint-anchored solution
    if denom > T::epsilon() * a * e {
        s = clamp((b * f - c * e) / denom);
    } else {
        s = zero;
    }
    t = (b * s + f) / e;
    if t < zero {
        t = zero;
        s = clamp(-c / a);
    } else if t > one {
        t = one;
        s = clamp((b - c) / a);
    }
    let mut best = (s, t, s1.point_at(s).distance(s2.point_at(t)));
    if denom <= T::epsilon() * a * e {
        // parallel case: the minimum is attained at one of the four endpoint projections
        for (ss, tt) in [
            (zero, clamp(f / e)),
            (one, clamp((b + f) / e)),
            (clamp(-c / a), zero),
            (clamp((b - c) / a), one),
        ] {
            let d = s1.point_at(ss).distance(s2.point_at(tt));
            if d < best.2 {
                best = (ss, tt, d);
            }
        }
    }
    best
}

/// Minimum Euclidean distance between two closed segments.
pub fn segment_distance<T: Scalar>(s1: &Segment<T>, s2: &Segment<T>) -> T {
    segment_closest_points(s1, s2).2
}

pub fn point_segment_distance<T: Scalar>(p: Vec3<T>, s: &Segment<T>) -> T {
    let d = s.direction();
    let t = ((p - s.a).dot(d) / d.norm_squared())
        .max(T::zero())
        .min(T::one());
    p.distance(s.point_at(t))
}

/// Absolute slope `|rise / run|` of `e` inside `plane`, with the run measured
/// along `reference_axis` and the rise along the in-plane perpendicular.
pub fn slope_in_plane<T: Scalar>(
    e: &Segment<T>,
    plane: &Plane<T>,
    reference_axis: Vec3<T>,
    tol: &Tolerance<T>,
) -> Result<T, GeomError> {
    for p in [e.a, e.b] {
        let off = plane.signed_distance(p).abs();
        if off > tol.eps_geom {
            return Err(GeomError::EdgeNotInPlane(off.as_f64()));
        }
    }
    let d = e.direction();
    let perp = plane.normal.cross(reference_axis);
    let run = d.dot(reference_axis);
    let rise = d.dot(perp);
    if run.abs() <= tol.eps_angle * d.norm() {
        return Err(GeomError::PerpendicularEdge);
    }
    Ok((rise / run).abs())
}

/// Coincidence and angle thresholds threaded through every predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub eps_geom: T,
    pub eps_angle: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(eps_geom: T, eps_angle: T) -> Result<Self, GeomError> {
        if !(eps_geom > T::zero() && eps_angle > T::zero()) {
            return Err(GeomError::InvalidTransform(
                "tolerances must be strictly positive",
            ));
        }
        Ok(Self {
            eps_geom,
            eps_angle,
        })
    }

    /// Relative factor applied to the bounding-box diagonal: `1e-9`, or a
    /// hundred ulps for coarse scalar types.
    pub fn relative_factor() -> T {
        T::lit(1e-9).max(T::epsilon() * T::lit(100.0))
    }

    /// Default tolerance for a point cloud: `eps_geom` relative to the
    /// bounding-box diagonal, `eps_angle` absolute.
    pub fn for_points<I: IntoIterator<Item = Vec3<T>>>(points: I) -> Self {
        let diag = bounding_diagonal(points);
        let f = Self::relative_factor();
        let eps_geom = if diag > T::zero() { diag * f } else { f };
        Self {
            eps_geom,
            eps_angle: f,
        }
    }
}

pub fn bounding_diagonal<T: Scalar, I: IntoIterator<Item = Vec3<T>>>(points: I) -> T {
    let mut it = points.into_iter();
    let Some(first) = it.next() else {
        return T::zero();
    };
    let (mut lo, mut hi) = (first, first);
    for p in it {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (hi - lo).norm()
}

/// Deterministic low-discrepancy sequence of unit vectors. The seed shifts
/// the sequence so distinct seeds explore distinct directions.
#[derive(Debug, Clone)]
pub struct SphereSequence {
    offset: (f64, f64),
    k: u64,
}

impl SphereSequence {
    pub fn new(seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self {
            offset: (rng.gen(), rng.gen()),
            k: 0,
        }
    }

    pub fn next_direction<T: Scalar>(&mut self) -> Vec3<T> {
        // R2 sequence (plastic-number Kronecker lattice) mapped by area-preserving projection
        const G: f64 = 1.324_717_957_244_746;
        let k = self.k as f64 + 1.0;
        self.k += 1;
        let u = (self.offset.0 + k / G).fract();
        let v = (self.offset.1 + k / (G * G)).fract();
        let z = 1.0 - 2.0 * u;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = std::f64::consts::TAU * v;
        Vec3::from_f64(r * phi.cos(), r * phi.sin(), z)
    }
}
