//! Polygonal knots: validation, planarity, and extremal-vertex selection.

use thiserror::Error;

use crate::geom::{
    segment_distance, Plane, Segment, SimilarityTransform, SphereSequence, Tolerance, Vec3,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnotError {
    #[error("a polygonal knot needs at least 3 vertices, got {0}")]
    TooShort(usize),
    #[error("vertex {0} is repeated or collinear with its neighbours")]
    DegenerateVertex(usize),
    #[error("edges {0} and {1} intersect")]
    SelfIntersection(usize, usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
}

/// A closed, embedded polyline. Vertex `i` is joined to vertex `i + 1`
/// (cyclically) by edge `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalKnot<T> {
    vertices: Vec<Vec3<T>>,
}

impl<T: Scalar> PolygonalKnot<T> {
    /// Validates with the default tolerance derived from the vertices' bounding box.
    pub fn new(vertices: Vec<Vec3<T>>) -> Result<Self, KnotError> {
        let tol = Tolerance::for_points(vertices.iter().copied());
        Self::with_tolerance(vertices, &tol)
    }

    pub fn with_tolerance(vertices: Vec<Vec3<T>>, tol: &Tolerance<T>) -> Result<Self, KnotError> {
        validate(&vertices, tol)?;
        Ok(Self { vertices })
    }

    /// Wraps vertices without checking; for images of already valid knots.
    pub(crate) fn from_trusted(vertices: Vec<Vec3<T>>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vec3<T> {
        self.vertices[i % self.vertices.len()]
    }

    pub fn edge(&self, i: usize) -> Segment<T> {
        let n = self.vertices.len();
        Segment {
            a: self.vertices[i % n],
            b: self.vertices[(i + 1) % n],
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment<T>> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn tolerance(&self) -> Tolerance<T> {
        Tolerance::for_points(self.vertices.iter().copied())
    }

    pub fn transformed(&self, t: &SimilarityTransform<T>) -> Self {
        Self::from_trusted(self.vertices.iter().map(|&p| t.apply(p)).collect())
    }

    /// Total length of the polyline.
    pub fn length(&self) -> T {
        self.edges().fold(T::zero(), |acc, e| acc + e.length())
    }

    pub fn centroid(&self) -> Vec3<T> {
        let sum = self.vertices.iter().fold(Vec3::zero(), |acc, &p| acc + p);
        sum * (T::one() / T::from_count(self.vertices.len()))
    }

    pub fn shortest_edge(&self) -> T {
        self.edges().map(|e| e.length()).fold(T::infinity(), T::min)
    }
}

/// Checks the embeddedness contract of a raw vertex cycle.
pub fn validate<T: Scalar>(vertices: &[Vec3<T>], tol: &Tolerance<T>) -> Result<(), KnotError> {
    let n = vertices.len();
    if n < 3 {
        return Err(KnotError::TooShort(n));
    }
    if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
        return Err(KnotError::NonFinite(i));
    }
    for i in 0..n {
        let prev = vertices[(i + n - 1) % n];
        let cur = vertices[i];
        let next = vertices[(i + 1) % n];
        let (a, b) = (cur - prev, next - cur);
        if a.norm() <= tol.eps_geom || b.norm() <= tol.eps_geom {
            return Err(KnotError::DegenerateVertex(i));
        }
        if a.cross(b).norm() <= tol.eps_angle * a.norm() * b.norm() {
            return Err(KnotError::DegenerateVertex(i));
        }
    }
    let edge = |i: usize| Segment {
        a: vertices[i],
        b: vertices[(i + 1) % n],
    };
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segment_distance(&edge(i), &edge(j)) <= tol.eps_geom {
                return Err(KnotError::SelfIntersection(i, j));
            }
        }
    }
    Ok(())
}

/// A knot with a chosen vertex that is the strict maximum of `direction · p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedKnot<T> {
    pub knot: PolygonalKnot<T>,
    pub v_index: usize,
    pub direction: Vec3<T>,
}

impl<T: Scalar> MarkedKnot<T> {
    pub fn vertex(&self) -> Vec3<T> {
        self.knot.vertex(self.v_index)
    }

    /// The two neighbours of the marked vertex: `(previous, next)`.
    pub fn neighbours(&self) -> (Vec3<T>, Vec3<T>) {
        let n = self.knot.len();
        (
            self.knot.vertex((self.v_index + n - 1) % n),
            self.knot.vertex(self.v_index + 1),
        )
    }

    /// Gap between the marked vertex's height and the next highest vertex.
    pub fn margin(&self) -> T {
        extremal_margin(&self.knot, self.v_index, self.direction)
    }

    pub fn transformed(&self, t: &SimilarityTransform<T>) -> Self {
        Self {
            knot: self.knot.transformed(t),
            v_index: self.v_index,
            direction: t.rotation.mul_vec(self.direction),
        }
    }
}

fn extremal_margin<T: Scalar>(knot: &PolygonalKnot<T>, idx: usize, dir: Vec3<T>) -> T {
    let top = dir.dot(knot.vertex(idx));
    knot.vertices()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != idx)
        .map(|(_, p)| top - dir.dot(*p))
        .fold(T::infinity(), T::min)
}

fn argmax_along<T: Scalar>(knot: &PolygonalKnot<T>, dir: Vec3<T>) -> usize {
    let mut best = 0;
    for (i, p) in knot.vertices().iter().enumerate() {
        if dir.dot(*p) > dir.dot(knot.vertex(best)) {
            best = i;
        }
    }
    best
}

const EXTREMAL_CANDIDATES: usize = 4096;
const PREFERRED_CANDIDATES: usize = 64;

/// Picks a direction and the vertex that is its strict global maximum,
/// starting from `+z` and then walking a seeded low-discrepancy sequence.
pub fn find_extremal_vertex<T: Scalar>(knot: &PolygonalKnot<T>, seed: u64) -> MarkedKnot<T> {
    find_extremal_vertex_from(knot, seed, Some(Vec3::unit_z()))
}

/// As [`find_extremal_vertex`] with an explicit first candidate (or none).
///
/// Among the first few candidates, one whose height gap is at least a
/// thousandth of the knot's diameter is preferred; otherwise the first
/// direction with a gap above `eps_geom` wins.
pub fn find_extremal_vertex_from<T: Scalar>(
    knot: &PolygonalKnot<T>,
    seed: u64,
    first: Option<Vec3<T>>,
) -> MarkedKnot<T> {
    let tol = knot.tolerance();
    let diam = tol.eps_geom / Tolerance::<T>::relative_factor();
    let comfortable = diam * T::lit(1e-3);
    let mut seq = SphereSequence::new(seed);
    let mut fallback = None;
    let candidates = first
        .into_iter()
        .chain((0..EXTREMAL_CANDIDATES).map(|_| seq.next_direction()));
    for (k, dir) in candidates.enumerate() {
        let idx = argmax_along(knot, dir);
        let margin = extremal_margin(knot, idx, dir);
        if margin > comfortable {
            return MarkedKnot {
                knot: knot.clone(),
                v_index: idx,
                direction: dir,
            };
        }
        if margin > tol.eps_geom && fallback.is_none() {
            fallback = Some((idx, dir));
        }
        if k >= PREFERRED_CANDIDATES {
            if let Some((idx, dir)) = fallback {
                return MarkedKnot {
                    knot: knot.clone(),
                    v_index: idx,
                    direction: dir,
                };
            }
        }
    }
    // a generic direction always isolates a hull vertex; reaching here means
    // the knot is numerically degenerate, so accept the best margin seen
    let (idx, dir) = fallback.unwrap_or_else(|| {
        let d = Vec3::unit_z();
        (argmax_along(knot, d), d)
    });
    MarkedKnot {
        knot: knot.clone(),
        v_index: idx,
        direction: dir,
    }
}

/// Least-squares plane through the vertices, if every vertex lies within
/// `eps_geom` of it.
pub fn planar_fit<T: Scalar>(knot: &PolygonalKnot<T>) -> Option<Plane<T>> {
    planar_fit_with(knot, &knot.tolerance())
}

pub fn planar_fit_with<T: Scalar>(knot: &PolygonalKnot<T>, tol: &Tolerance<T>) -> Option<Plane<T>> {
    let (plane, residual) = least_squares_plane(knot.vertices())?;
    (residual <= tol.eps_geom).then_some(plane)
}

/// Best-fit plane and the largest vertex residual.
pub fn least_squares_plane<T: Scalar>(points: &[Vec3<T>]) -> Option<(Plane<T>, T)> {
    if points.len() < 3 {
        return None;
    }
    let n = T::from_count(points.len());
    let c = points.iter().fold(Vec3::zero(), |acc, &p| acc + p) * (T::one() / n);
    let mut cov = [[T::zero(); 3]; 3];
    for p in points {
        let d = *p - c;
        for r in 0..3 {
            for k in 0..3 {
                cov[r][k] = cov[r][k] + d[r] * d[k];
            }
        }
    }
    let normal = smallest_eigenvector(cov);
    let plane = Plane::from_point_normal(c, normal).ok()?;
    let residual = points
        .iter()
        .map(|&p| plane.signed_distance(p).abs())
        .fold(T::zero(), T::max);
    Some((plane, residual))
}

/// Cyclic Jacobi sweeps on a symmetric 3x3 matrix.
fn smallest_eigenvector<T: Scalar>(mut a: [[T; 3]; 3]) -> Vec3<T> {
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _ in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off == T::zero() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (akp, akq) = (row[p], row[q]);
                row[p] = c * akp - s * akq;
                row[q] = s * akp + c * akq;
            }
            #[allow(clippy::needless_range_loop)]
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vkp, vkq) = (row[p], row[q]);
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    let mut k = 0;
    for i in 1..3 {
        if a[i][i] < a[k][k] {
            k = i;
        }
    }
    Vec3::new(v[0][k], v[1][k], v[2][k])
}

/// Largest distance from `center` to the polyline (attained at a vertex).
pub fn circumradius_about<T: Scalar>(knot: &PolygonalKnot<T>, center: Vec3<T>) -> T {
    knot.vertices()
        .iter()
        .map(|p| p.distance(center))
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Mat3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    type V = Vec3<f64>;

    fn knot(pts: &[[f64; 3]]) -> Result<PolygonalKnot<f64>, KnotError> {
        PolygonalKnot::new(pts.iter().map(|p| V::from_f64(p[0], p[1], p[2])).collect())
    }

    fn ngon(n: usize, r: f64) -> PolygonalKnot<f64> {
        let pts = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                V::from_f64(r * a.cos(), r * a.sin(), 0.0)
            })
            .collect();
        PolygonalKnot::new(pts).unwrap()
    }

    fn random_star(seed: u64, n: usize) -> PolygonalKnot<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * (i as f64 + rng.gen_range(0.0..0.5)) / n as f64;
                let r = rng.gen_range(0.6..1.0);
                V::from_f64(r * a.cos(), r * a.sin(), rng.gen_range(-0.2..0.2))
            })
            .collect();
        PolygonalKnot::new(pts).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(knot(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).is_ok());
        assert!(matches!(
            knot(&[
                [0.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0]
            ]),
            Err(KnotError::SelfIntersection(_, _))
        ));
        assert_eq!(
            knot(&[
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [2.0, 0.0, 0.0],
                [0.0, 1.0, 0.0]
            ]),
            Err(KnotError::DegenerateVertex(1))
        );
        assert_eq!(
            knot(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            Err(KnotError::TooShort(2))
        );
        assert_eq!(
            knot(&[
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0]
            ]),
            Err(KnotError::DegenerateVertex(1))
        );
    }

    #[test]
    fn vertex_touching_nonadjacent_edge_is_rejected() {
        // vertex 3 sits on edge 0
        let r = knot(&[
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [2.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn extremal_examples() {
        let tri = knot(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]]).unwrap();
        assert_eq!(find_extremal_vertex(&tri, 0).v_index, 2);

        let square = knot(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ])
        .unwrap();
        let m = find_extremal_vertex(&square, 5);
        assert_ne!(m.direction, V::unit_z());
        assert_eq!(argmax_along(&square, m.direction), m.v_index);
        assert!(m.margin() > square.tolerance().eps_geom);
    }

    #[test]
    fn extremal_vertex_beats_every_other_vertex() {
        let k = random_star(7, 20);
        let m = find_extremal_vertex(&k, 7);
        let eps = k.tolerance().eps_geom;
        let top = m.direction.dot(m.vertex());
        for (i, u) in k.vertices().iter().enumerate() {
            if i != m.v_index {
                assert!(top > m.direction.dot(*u) + eps);
            }
        }
        assert_eq!(find_extremal_vertex(&k, 7), m);
    }

    #[test]
    fn planar_fit_examples() {
        let tri = knot(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let p = planar_fit(&tri).unwrap();
        for v in tri.vertices() {
            assert!(p.signed_distance(*v).abs() < 1e-12);
        }
        let g = ngon(12, 1.0);
        let p = planar_fit(&g).unwrap();
        assert!((p.normal.z.abs() - 1.0).abs() < 1e-12 && p.offset.abs() < 1e-12);

        let mut pts = g.vertices().to_vec();
        let eps = g.tolerance().eps_geom;
        pts[4].z = 1000.0 * eps;
        let lifted = PolygonalKnot::new(pts.clone()).unwrap();
        // residual of the least-squares fit, computed independently of the threshold
        let (_, residual) = least_squares_plane(&pts).unwrap();
        assert!(residual > lifted.tolerance().eps_geom);
        assert!(planar_fit(&lifted).is_none());
    }

    #[test]
    fn circumradius_examples() {
        assert!((circumradius_about(&ngon(9, 1.0), V::zero()) - 1.0).abs() < 1e-15);
        let tri = knot(&[[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 4.0, 0.0]]).unwrap();
        assert_eq!(circumradius_about(&tri, V::zero()), 4.0);
        let tri = knot(&[[3.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(circumradius_about(&tri, V::from_f64(0.0, 4.0, 0.0)), 5.0);
    }

    #[test]
    fn circumradius_matches_dense_sampling() {
        let k = random_star(3, 15);
        let c = V::from_f64(0.3, -0.2, 0.5);
        let mut sampled: f64 = 0.0;
        for e in k.edges() {
            for i in 0..=200 {
                sampled = sampled.max(e.point_at(i as f64 / 200.0).distance(c));
            }
        }
        assert!((circumradius_about(&k, c) - sampled).abs() < 1e-9);
    }

    fn arb_similarity() -> impl Strategy<Value = SimilarityTransform<f64>> {
        (
            -1.0..1.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            -3.0..3.0f64,
            -5.0..5.0f64,
            0.01..100.0f64,
        )
            .prop_filter_map("axis", |(x, y, z, a, t, s)| {
                let axis = V::from_f64(x, y, z).normalized().ok()?;
                Some(SimilarityTransform {
                    rotation: Mat3::rotation(axis, a),
                    translation: V::from_f64(t, -t, 2.0 * t),
                    scale: s,
                })
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn validation_is_similarity_invariant(seed in 0u64..1000, t in arb_similarity()) {
            let k = random_star(seed, 12);
            let image = k.transformed(&t);
            prop_assert!(PolygonalKnot::new(image.vertices().to_vec()).is_ok());
        }

        #[test]
        fn planar_fit_is_equivariant(n in 3usize..30, t in arb_similarity()) {
            let g = ngon(n, 1.0);
            let q = planar_fit(&g).unwrap();
            let image = g.transformed(&t);
            let fitted = planar_fit(&image).unwrap();
            let expected_normal = t.rotation.mul_vec(q.normal);
            prop_assert!(expected_normal.cross(fitted.normal).norm() < 1e-9);
            prop_assert!(fitted.signed_distance(t.apply(V::zero())).abs() < 1e-9 * t.scale.max(1.0));
        }

        #[test]
        fn extremal_search_is_reproducible(seed in 0u64..500) {
            let k = random_star(seed, 10);
            prop_assert_eq!(find_extremal_vertex(&k, seed), find_extremal_vertex(&k, seed));
        }
    }
}
