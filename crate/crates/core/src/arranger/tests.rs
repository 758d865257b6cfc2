use proptest::prelude::*;

use super::*;
use crate::geom::{rotation_about_line, segment_distance, Mat3};
use crate::io::gen_random_unknot;
use crate::knot::circumradius_about;

type V = Vec3<f64>;
type K = PolygonalKnot<f64>;

fn ngon(n: usize, r: f64, rot: Mat3<f64>, c: V) -> K {
    let pts = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            rot.mul_vec(V::new(r * t.cos(), r * t.sin(), 0.0)) + c
        })
        .collect();
    PolygonalKnot::new(pts).unwrap()
}

fn twelve_gons() -> Vec<K> {
    vec![
        ngon(12, 1.0, Mat3::identity(), V::zero()),
        ngon(
            12,
            1.0,
            Mat3::rotation(V::unit_x(), 0.7),
            V::new(5.0, 0.0, 0.0),
        ),
        ngon(
            12,
            1.0,
            Mat3::rotation(V::unit_y(), 1.1),
            V::new(0.0, 5.0, 1.0),
        ),
    ]
}

fn random_triple(seed: u64, planar: [bool; 3]) -> Vec<K> {
    (0..3)
        .map(|k| {
            gen_random_unknot(
                seed * 3 + k as u64,
                4 + (seed as usize * 5 + k * 7) % 20,
                planar[k],
            )
            .unwrap()
        })
        .collect()
}

fn random_rotation(seed: u64) -> Mat3<f64> {
    let mut s = crate::geom::SphereSequence::new(seed);
    Mat3::rotation(s.next_direction(), 0.3 + (seed % 17) as f64 * 0.35)
}

fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> K {
    PolygonalKnot::new(vec![
        V::new(a[0], a[1], a[2]),
        V::new(b[0], b[1], b[2]),
        V::new(c[0], c[1], c[2]),
    ])
    .unwrap()
}

fn marked(k: K, v_index: usize, direction: V) -> MarkedKnot<f64> {
    MarkedKnot {
        knot: k,
        v_index,
        direction,
    }
}

fn close(a: V, b: V, eps: f64) -> bool {
    (a - b).norm() <= eps
}

fn is_identity(t: &SimilarityTransform<f64>) -> bool {
    let id = Mat3::<f64>::identity();
    (0..3).all(|r| (0..3).all(|c| (t.rotation.get(r, c) - id.get(r, c)).abs() < 1e-15))
        && t.translation.norm() < 1e-15
        && t.scale == 1.0
}

/// Postconditions of placing K1 with `e1` on the negative `y` axis.
fn k1_placed(m: &MarkedKnot<f64>, t: &SimilarityTransform<f64>, e_next: bool) -> bool {
    let (prev, next) = m.neighbours();
    let (e, f) = if e_next { (next, prev) } else { (prev, next) };
    let (v, e, f) = (t.apply(m.vertex()), t.apply(e), t.apply(f));
    t.scale == 1.0
        && v.norm() < 1e-12
        && e.x.abs() < 1e-12
        && e.z.abs() < 1e-12
        && e.y < 0.0
        && f.z.abs() < 1e-12
        && f.x > 0.0
}

/// Postconditions of placing K2 (`up`) or K3: marked vertex at the origin,
/// strict extremum in `z`, corner plane through the `y` axis.
fn extremal_placed(m: &MarkedKnot<f64>, t: &SimilarityTransform<f64>, up: bool) -> bool {
    let k = m.knot.transformed(t);
    let v = k.vertex(m.v_index);
    let sign = if up { 1.0 } else { -1.0 };
    let strict = k
        .vertices()
        .iter()
        .enumerate()
        .all(|(i, p)| i == m.v_index || sign * p.z < 0.0);
    let (a, b) = (k.vertex(m.v_index + k.len() - 1), k.vertex(m.v_index + 1));
    let normal = a.cross(b).normalized().unwrap();
    t.scale == 1.0 && v.norm() < 1e-12 && strict && normal.y.abs() < 1e-12
}

#[test]
fn k1_already_in_position_is_left_alone() {
    let k = tri([0.0, 0.0, 0.0], [0.0, -1.0, 0.0], [1.0, -1.0, 0.0]);
    let t = stage_place_k1(
        &marked(k, 0, V::new(-1.0, 1.0, 0.0)),
        true,
        AxisSide::Negative,
    )
    .unwrap();
    assert!(is_identity(&t), "{t:?}");
}

#[test]
fn k1_placement_undoes_a_quarter_turn() {
    let k = tri([0.0, 0.0, 0.0], [0.0, -1.0, 0.0], [1.0, -1.0, 0.0]);
    let k = k.transformed(&SimilarityTransform::rotation(Mat3::rotation(
        V::unit_x(),
        std::f64::consts::FRAC_PI_2,
    )));
    let m = marked(k, 0, V::new(-1.0, 0.0, 1.0));
    let t = stage_place_k1(&m, true, AxisSide::Negative).unwrap();
    assert!(k1_placed(&m, &t, true));
    let back = m.knot.transformed(&t);
    assert!(close(back.vertex(2), V::new(1.0, -1.0, 0.0), 1e-12));
}

#[test]
fn placements_meet_postconditions_on_random_knots() {
    for seed in 0..100 {
        let k: K = gen_random_unknot(seed, 3 + seed as usize % 12, seed % 3 == 0).unwrap();
        let m = find_extremal_vertex(&k, seed);
        let e_next = seed % 2 == 0;
        let t1 = stage_place_k1(&m, e_next, AxisSide::Negative).unwrap();
        assert!(k1_placed(&m, &t1, e_next), "seed {seed}");
        assert!(
            extremal_placed(&m, &stage_place_k2(&m).unwrap(), true),
            "seed {seed}"
        );
        assert!(
            extremal_placed(&m, &stage_place_k3(&m).unwrap(), false),
            "seed {seed}"
        );
    }
}

#[test]
fn k2_in_position_is_left_alone() {
    // top corner at the origin, corner plane y-z
    let k = tri([0.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, -1.0, -2.0]);
    let t = stage_place_k2(&marked(k.clone(), 0, V::unit_z())).unwrap();
    assert!(is_identity(&t), "{t:?}");
    let k3 = tri([0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, -1.0, 2.0]);
    let t = stage_place_k3(&marked(k3, 0, -V::unit_z())).unwrap();
    assert!(is_identity(&t), "{t:?}");
}

#[test]
fn flat_corner_is_turned_to_contain_the_y_axis() {
    // corner plane is the xy plane itself, extremal direction tilted out of it
    let k = tri([0.0, 0.0, 0.0], [-1.0, -0.2, 0.0], [-0.3, -1.0, 0.0]);
    let m = marked(k, 0, V::new(1.0, 1.0, 0.5).normalized().unwrap());
    assert!(extremal_placed(&m, &stage_place_k2(&m).unwrap(), true));
    assert!(extremal_placed(&m, &stage_place_k3(&m).unwrap(), false));
}

/// A state with K2 and K3 placed from the first plan, nothing else done.
fn placed(knots: &[K], mode: Mode) -> (ArrangementState<f64>, Plan<f64>) {
    let planar = check_inputs(knots, mode).unwrap();
    let plan = plans(knots, planar, mode, 0, &ArrangeOptions::default()).remove(0);
    let roles = plan.labels.roles;
    let m = |r: usize| &plan.marked[roles[r]];
    let state = ArrangementState {
        inputs: [
            knots[roles[0]].clone(),
            knots[roles[1]].clone(),
            knots[roles[2]].clone(),
        ],
        transforms: [
            SimilarityTransform::identity(),
            stage_place_k2(m(K2)).unwrap(),
            stage_place_k3(m(K3)).unwrap(),
        ],
        v_index: [m(K1).v_index, m(K2).v_index, m(K3).v_index],
        e_next: [plan.labels.e1_next, !plan.labels.f2_next, true],
        directions: [m(K1).direction, m(K2).direction, m(K3).direction],
        up: None,
        w: None,
        v: None,
        u: None,
        line: None,
        budget: StepBudget::new(0.01),
        stage: Stage::Placed,
        tol: 1e-12,
    };
    (state, plan)
}

fn up_of(state: &ArrangementState<f64>, r: usize) -> V {
    state.plane_up(r).unwrap()
}

#[test]
fn orientation_puts_both_upper_half_planes_on_one_side() {
    for seed in 0..30 {
        let (mut s, _) = placed(&random_triple(seed, [false; 3]), Mode::AllowScaling);
        orient_halfplanes(&mut s, 1e-9).unwrap();
        let (u2, u3) = (up_of(&s, K2), up_of(&s, K3));
        if u3.z > u2.z + 1e-9 {
            assert!(u2.x <= 0.0 && u3.x <= 0.0, "seed {seed}");
        } else if u2.z > u3.z + 1e-9 {
            assert!(u2.x >= 0.0 && u3.x >= 0.0, "seed {seed}");
        }
        // only turns about z: heights and the y axis are untouched
        assert!(s.vertex(K2).norm() < 1e-12 && s.vertex(K3).norm() < 1e-12);
    }
}

#[test]
fn orientation_leaves_equal_planes_alone() {
    let (mut s, _) = placed(&twelve_gons(), Mode::RigidOnly);
    s.transforms[K3] = s.transforms[K2];
    s.inputs[K3] = s.inputs[K2].clone();
    s.v_index[K3] = s.v_index[K2];
    let before = s.transforms;
    orient_halfplanes(&mut s, 1e-9).unwrap();
    assert_eq!(before, s.transforms);
}

#[test]
fn scale_factor_examples() {
    let (_, l3) = scale_factors(1.0, 1.0, 0.1, 4.0);
    assert!(l3 >= 40.0);
    let (l1, l3) = scale_factors(1e-6, 1e-6, 0.1, 4.0);
    assert_eq!((l1, l3), (1.0, 1.0));
}

#[test]
fn scaled_k3_clears_k2_outside_the_ball() {
    let (mut s, _) = placed(&random_triple(3, [false; 3]), Mode::AllowScaling);
    orient_halfplanes(&mut s, 1e-9).unwrap();
    let eps = 0.05;
    s.budget.eps_ball = eps;
    let before = s.knot(K3);
    scale_components(&mut s, 4.0);
    let r2 = circumradius_about(&s.knot(K2), V::zero());
    for (p, q) in before.vertices().iter().zip(s.knot(K3).vertices()) {
        if p.norm() > eps {
            assert!(q.norm() > r2);
        }
    }
    let r3 = circumradius_about(&s.knot(K3), V::zero());
    for p in s.knot(K1).vertices() {
        if p.norm() > 1e-12 {
            assert!(p.norm() > r2.max(r3) || p.norm() < eps * s.transforms[K1].scale);
        }
    }
}

#[test]
fn alignment_examples() {
    let plane = |angle: f64| {
        // corner plane through the y axis, upper half towards -x at `angle` from the xy plane
        let up = V::new(-angle.cos(), 0.0, angle.sin());
        PolygonalKnot::new(vec![V::zero(), V::unit_y() + up, -V::unit_y() + up * 2.0]).unwrap()
    };
    let mut s = placed(&twelve_gons(), Mode::RigidOnly).0;
    s.transforms = [SimilarityTransform::identity(); 3];
    s.v_index = [0; 3];
    s.inputs[K2] = plane(std::f64::consts::FRAC_PI_2);
    s.inputs[K3] = plane(std::f64::consts::FRAC_PI_4);
    s.e_next = [true; 3];
    // P2 is the xz plane; P3 leans 45 degrees over to -x
    align_planes(&mut s).unwrap_err();
    s.inputs[K3] = plane(3.0 * std::f64::consts::FRAC_PI_4);
    align_planes(&mut s).unwrap();
    let r = s.transforms[K3].rotation;
    let image = r.mul_vec(V::new(1.0, 0.0, 1.0));
    assert!(image.x < 1.0);
    let n3 = up_of(&s, K3);
    assert!(close(n3, V::unit_z(), 1e-12), "{n3:?}");
    // equal planes: the identity
    s.transforms[K3] = SimilarityTransform::identity();
    s.inputs[K3] = plane(std::f64::consts::FRAC_PI_2);
    align_planes(&mut s).unwrap();
    assert!(is_identity(&s.transforms[K3]));
}

/// A fully prepared state for the first plan.
fn prepared(knots: &[K], mode: Mode) -> ArrangementState<f64> {
    let planar = check_inputs(knots, mode).unwrap();
    let all = plans(knots, planar, mode, 0, &ArrangeOptions::default());
    let first = prepare(knots, &all[0], mode, 4.0);
    first.clone().unwrap_or_else(|e| panic!("{e}"))
}

#[test]
fn aligned_corners_share_a_plane_through_the_y_axis() {
    for seed in 0..20 {
        let s = prepared(
            &random_triple(seed, [true, false, true]),
            Mode::AllowScaling,
        );
        let up = s.up.unwrap();
        let normal = up.cross(V::unit_y());
        assert!(up.y.abs() < 1e-12);
        for r in [K2, K3] {
            for e in [true, false] {
                let d = (s.far(r, e) - s.vertex(r)).normalized().unwrap();
                assert!(d.dot(normal).abs() < 1e-9, "seed {seed}");
            }
        }
    }
}

#[test]
fn zero_steps_are_rejected() {
    let mut s = prepared(&twelve_gons(), Mode::RigidOnly);
    assert_eq!(
        perturb_k2(&mut s, 0.0),
        Err(StageError::StepTooLarge("perturb_K2"))
    );
    perturb_k2(&mut s, 1.0).unwrap();
    assert_eq!(
        perturb_k3(&mut s, 0.0),
        Err(StageError::StepTooLarge("perturb_K3"))
    );
    perturb_k3(&mut s, 1.0).unwrap();
    choose_line_l(&mut s, 1.0).unwrap();
    assert_eq!(
        rotate_k3_about_l(&mut s, 0.0),
        Err(StageError::StepTooLarge("rotate_K3_about_l"))
    );
    rotate_k3_about_l(&mut s, 1.0).unwrap();
    assert_eq!(
        final_translate_k2(&mut s, 0.0),
        Err(StageError::StepTooLarge("final_translate_K2"))
    );
}

#[test]
fn local_moves_meet_their_postconditions() {
    for seed in 0..20 {
        let planar = [seed % 2 == 0, false, true];
        let mode = if seed % 2 == 0 {
            Mode::RigidOnly
        } else {
            Mode::AllowScaling
        };
        let mut s = prepared(&random_triple(seed, planar), mode);
        let tol = s.tol;

        let k2_before = s.transforms[K2];
        perturb_k2(&mut s, 1.0).unwrap();
        assert!(s.vertex(K2).z > tol);
        assert!(point_segment_distance(V::zero(), &s.corner_edge(K2, false)) <= tol);
        let w = s.w.unwrap();
        let shift = s.transforms[K2].translation - k2_before.translation;
        assert!(close(shift, w * s.budget.eps, 1e-15));
        assert!(s.budget.eps > 0.0 && s.budget.eps <= s.budget.d / 2.0);

        perturb_k3(&mut s, 1.0).unwrap();
        let contacts = s.contacts(K2, K3);
        assert_eq!(contacts.len(), 2, "seed {seed}");
        let on = |c: &(usize, usize, V), e: bool| c.1 == s.edge_index(K3, e);
        let upper = contacts.iter().find(|c| on(c, true)).unwrap();
        let lower = contacts.iter().find(|c| on(c, false)).unwrap();
        assert!(upper.2.z > 0.0 && lower.2.z < 0.0);
        assert!(s.budget.delta <= s.budget.eps / 4.0);

        choose_line_l(&mut s, 1.0).unwrap();
        let l = s.line.unwrap();
        let f2 = s.corner_edge(K2, false);
        assert!(
            l.line
                .direction
                .cross(f2.direction().normalized().unwrap())
                .norm()
                < 1e-12
        );
        assert!(l.p_e.z > 0.0 && l.p_f.z < 0.0);
        let v3 = s.vertex(K3);
        let gap = |p: V| {
            (p - f2.a)
                .cross(f2.direction().normalized().unwrap())
                .norm()
        };
        assert!(gap(l.line.point) > 0.0 && gap(l.line.point) < gap(v3));

        let v3_before = s.vertex(K3);
        rotate_k3_about_l(&mut s, 1.0).unwrap();
        assert!(s.vertex(K3).x < v3_before.x);
        let rot = rotation_about_line(&l.line, s.budget.alpha);
        assert!(close(rot.apply(l.p_e), l.p_e, 1e-12) && close(rot.apply(l.p_f), l.p_f, 1e-12));
        assert!(s.min_distance(K2, K3) > tol && s.min_distance(K1, K3) > tol);

        let before = s.transforms[K2];
        final_translate_k2(&mut s, 1.0).unwrap();
        let step = SimilarityTransform::compose(&s.transforms[K2], &before.inverse());
        assert!(is_identity(&SimilarityTransform::translation(V::zero())));
        assert!((0..3).all(|r| (0..3)
            .all(|c| (step.rotation.get(r, c) - if r == c { 1.0 } else { 0.0 }).abs() < 1e-12)));
        assert!(close(step.translation, s.u.unwrap() * s.budget.rho, 1e-12));
        for (a, b) in [(K1, K2), (K1, K3), (K2, K3)] {
            assert!(s.min_distance(a, b) > tol, "seed {seed}");
        }
    }
}

#[test]
fn pairs_apart_after_alignment_stay_apart() {
    for seed in 0..10 {
        let mode = if seed % 2 == 0 {
            Mode::RigidOnly
        } else {
            Mode::AllowScaling
        };
        let mut s = prepared(&random_triple(seed, [true, false, true]), mode);
        let segs = |s: &ArrangementState<f64>| [s.segments(K1), s.segments(K2), s.segments(K3)];
        let start = segs(&s);
        for (stage, theta) in [(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)] {
            run_local(&mut s, stage, theta).unwrap();
        }
        let end = segs(&s);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            for (i, e0) in start[a].iter().enumerate() {
                for (j, f0) in start[b].iter().enumerate() {
                    let d0 = segment_distance(e0, f0);
                    if d0 > s.tol {
                        let d1 = segment_distance(&end[a][i], &end[b][j]);
                        assert!(
                            d1 >= d0 / 16.0,
                            "seed {seed}: pair {a}{b} edges {i},{j}: {d0} -> {d1}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn twelve_gons_arrange_rigidly() {
    let a = arrange(&twelve_gons(), Mode::RigidOnly, 1).unwrap();
    assert!(a.certificate.verdict.is_pass(), "{}", a.certificate.verdict);
    assert!(a.scales().iter().all(|&s| s == 1.0));
}

#[test]
fn triangles_arrange_with_scaling() {
    let knots = vec![
        tri([0.0, 0.0, 0.0], [1.0, 0.1, 0.2], [0.3, 1.2, -0.1]),
        tri([2.0, 1.0, 0.0], [2.5, 2.0, 1.0], [1.0, 1.7, 0.4]),
        tri([-1.0, 0.0, 3.0], [0.0, -1.0, 2.0], [-0.5, 0.5, 1.5]),
    ];
    let a = arrange(&knots, Mode::AllowScaling, 3).unwrap();
    assert!(a.certificate.verdict.is_pass(), "{}", a.certificate.verdict);
    assert!(a.scales().iter().all(|&s| s >= 1.0));
}

#[test]
fn self_intersecting_input_is_rejected() {
    let bow = vec![
        V::new(0.0, 0.0, 0.0),
        V::new(1.0, 1.0, 0.0),
        V::new(1.0, 0.0, 0.0),
        V::new(0.0, 1.0, 0.0),
    ];
    let good: Vec<V> = twelve_gons()[0].vertices().to_vec();
    let r = arrange_vertices(vec![bow, good.clone(), good], Mode::AllowScaling, 0);
    assert!(
        matches!(r, Err(ArrangeError::PreconditionViolated(_))),
        "{r:?}"
    );
}

#[test]
fn rigid_mode_needs_two_planar_knots() {
    let knots = random_triple(5, [true, false, false]);
    assert!(matches!(
        arrange(&knots, Mode::RigidOnly, 0),
        Err(ArrangeError::PreconditionViolated(_))
    ));
    assert!(matches!(
        arrange(&knots[..2], Mode::AllowScaling, 0),
        Err(ArrangeError::PreconditionViolated(_))
    ));
}

#[test]
fn single_precision_never_returns_an_unverified_link() {
    // the nested local moves need about 1e-3 of the corner size, which is
    // below single-precision resolution for typical inputs
    let knots: Vec<PolygonalKnot<f32>> = twelve_gons()
        .iter()
        .map(|k| {
            PolygonalKnot::new(
                k.vertices()
                    .iter()
                    .map(|p| Vec3::new(p.x as f32, p.y as f32, p.z as f32))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    match arrange(&knots, Mode::RigidOnly, 0) {
        Ok(a) => {
            assert!(a.certificate.verdict.is_pass());
            assert!(a.scales().iter().all(|&s| s == 1.0));
        }
        Err(e) => assert!(matches!(e, ArrangeError::RetriesExhausted { .. }), "{e}"),
    }
}

fn distance_multiset(k: &K) -> Vec<f64> {
    let v = k.vertices();
    let mut d: Vec<f64> = (0..v.len())
        .flat_map(|i| (i + 1..v.len()).map(move |j| v[i].distance(v[j])))
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn arrangements_are_congruent_deterministic_and_certified(
        seed in 0u64..10_000,
        planar in prop::array::uniform3(any::<bool>()),
        rigid in any::<bool>(),
        turn in 0u64..1000,
    ) {
        let mut planar = planar;
        if rigid {
            planar[0] = true;
            planar[2] = true;
        }
        let mode = if rigid { Mode::RigidOnly } else { Mode::AllowScaling };
        let knots = random_triple(seed, planar);
        let a = arrange(&knots, mode, seed).unwrap();
        prop_assert!(a.certificate.verdict.is_pass());
        for i in 0..3 {
            let s = a.transforms[i].scale;
            prop_assert!(s >= 1.0);
            if rigid {
                prop_assert_eq!(s, 1.0);
            }
            for (x, y) in distance_multiset(&a.inputs[i]).iter().zip(distance_multiset(&a.arranged[i])) {
                prop_assert!((x * s - y).abs() <= 1e-9 * y.max(1.0));
            }
            for (p, q) in a.inputs[i].vertices().iter().zip(a.arranged[i].vertices()) {
                prop_assert!(a.transforms[i].apply(*p).distance(*q) <= 1e-9 * q.norm().max(1.0));
            }
        }
        prop_assert_eq!(&arrange(&knots, mode, seed).unwrap(), &a);

        // moving an input rigidly changes nothing about success
        let t = SimilarityTransform { rotation: random_rotation(turn), translation: V::new(1.0, -2.0, 0.5), scale: 1.0 };
        let moved: Vec<K> = knots.iter().map(|k| k.transformed(&t)).collect();
        prop_assert!(arrange(&moved, mode, seed).unwrap().certificate.verdict.is_pass());
    }
}
