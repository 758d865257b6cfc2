//! Arranges three polygonal unknots into the Borromean rings by moving each
//! one rigidly (and, when allowed, scaling it up), then certifies the result.

mod labels;
mod stages;
#[cfg(test)]
mod tests;

use std::fmt;

use thiserror::Error;

use crate::geom::{
    bounding_diagonal, point_segment_distance, SimilarityTransform, Tolerance, Vec3,
};
use crate::invariants::{certify_borromean, BorromeanCertificate, DEFAULT_CROSSING_CAP};
use crate::knot::{
    find_extremal_vertex, find_extremal_vertex_from, planar_fit, MarkedKnot, PolygonalKnot,
};
use crate::scalar::Scalar;

use labels::PERMUTATIONS;
pub use labels::{
    choose_labels, corner_directions, corner_slopes, flat_edge_directions, rank_assignments,
    Labeling, MIN_MARGIN,
};
pub use stages::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Rigid motions plus a scale-up of K1 and K3.
    AllowScaling,
    /// Rigid motions only; needs two planar inputs.
    RigidOnly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::AllowScaling => "allow_scaling",
            Mode::RigidOnly => "rigid_only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StageError {
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("no labeling makes f2 strictly the least steep edge")]
    LabelingExhausted,
    #[error("step too large in {0}")]
    StepTooLarge(&'static str),
    #[error("no line separates f2 from v3")]
    NoValidLine,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RetryStats {
    pub shrinks: usize,
    pub relabels: usize,
    pub scale_growths: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArrangeError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("retries exhausted after {} halvings, {} relabels, {} scale growths", stats.shrinks, stats.relabels, stats.scale_growths)]
    RetriesExhausted {
        stats: RetryStats,
        trace: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrangeOptions {
    pub safety: f64,
    pub max_halvings: usize,
    pub max_relabels: usize,
    pub max_scale_growths: usize,
    pub bracket_cap: Option<usize>,
    /// Extremal-vertex candidates tried per knot.
    pub candidates: usize,
}

impl Default for ArrangeOptions {
    fn default() -> Self {
        Self {
            safety: 4.0,
            max_halvings: 40,
            max_relabels: 8,
            max_scale_growths: 4,
            bracket_cap: Some(DEFAULT_CROSSING_CAP),
            candidates: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement<T> {
    pub inputs: Vec<PolygonalKnot<T>>,
    /// Net transform of each input, in input order.
    pub transforms: Vec<SimilarityTransform<T>>,
    pub arranged: Vec<PolygonalKnot<T>>,
    pub certificate: BorromeanCertificate,
    pub stats: RetryStats,
    /// Input index playing K1, K2, K3.
    pub roles: [usize; 3],
    pub budget: StepBudget<T>,
    pub mode: Mode,
    pub seed: u64,
}

impl<T: Scalar> Arrangement<T> {
    pub fn scales(&self) -> Vec<T> {
        self.transforms.iter().map(|t| t.scale).collect()
    }
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z =
        seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Validates raw vertex lists, then arranges them.
pub fn arrange_vertices<T: Scalar>(
    vertices: Vec<Vec<Vec3<T>>>,
    mode: Mode,
    seed: u64,
) -> Result<Arrangement<T>, ArrangeError> {
    let knots = vertices
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            PolygonalKnot::new(v)
                .map_err(|e| ArrangeError::PreconditionViolated(format!("knot {i}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    arrange(&knots, mode, seed)
}

pub fn arrange<T: Scalar>(
    knots: &[PolygonalKnot<T>],
    mode: Mode,
    seed: u64,
) -> Result<Arrangement<T>, ArrangeError> {
    arrange_with(knots, mode, seed, &ArrangeOptions::default())
}

/// One way of running the construction: which candidate vertex of each
/// input is marked and how roles and edges are assigned.
#[derive(Debug, Clone)]
struct Plan<T> {
    marked: [MarkedKnot<T>; 3],
    labels: Labeling,
}

/// Margins above this are all equally good; among them, plans with more
/// room around the marked corners win.
const MARGIN_ENOUGH: f64 = 4.0;
/// Steepest K3 candidates kept per knot when pairing with K2 candidates.
const K3_SHORTLIST: usize = 4;

struct Candidate<T> {
    marked: MarkedKnot<T>,
    slopes: [f64; 2],
    room: f64,
}

fn candidates<T: Scalar>(
    k: &PolygonalKnot<T>,
    i: usize,
    seed: u64,
    opts: &ArrangeOptions,
    flat: bool,
) -> Vec<Candidate<T>> {
    let size = bounding_diagonal(k.vertices().iter().copied());
    let mut marked = Vec::new();
    for c in 0..opts.candidates.max(1) {
        let s = mix(seed, i as u64, c as u64);
        marked.push(if c == 0 {
            find_extremal_vertex(k, s)
        } else {
            find_extremal_vertex_from(k, s, None)
        });
    }
    marked.extend(corner_directions(k));
    if flat {
        marked.extend(flat_edge_directions(k));
    }
    let mut out: Vec<Candidate<T>> = Vec::new();
    for m in marked {
        let Ok([a, b]) = corner_slopes(&m) else {
            continue;
        };
        if out
            .iter()
            .any(|o| o.marked.v_index == m.v_index && o.marked.direction == m.direction)
        {
            continue;
        }
        let room = (corner_feature(&m) / size).as_f64();
        out.push(Candidate {
            marked: m,
            slopes: [a.as_f64(), b.as_f64()],
            room,
        });
    }
    out
}

fn plans<T: Scalar>(
    knots: &[PolygonalKnot<T>],
    planar: [bool; 3],
    mode: Mode,
    seed: u64,
    opts: &ArrangeOptions,
) -> Vec<Plan<T>> {
    let usual = plans_from(knots, planar, mode, seed, opts, false);
    if usual.is_empty() {
        // nearly horizontal edges make f2 admissible against shallow K3
        // corners, but leave little room, so they are a last resort
        plans_from(knots, planar, mode, seed, opts, true)
    } else {
        usual
    }
}

fn plans_from<T: Scalar>(
    knots: &[PolygonalKnot<T>],
    planar: [bool; 3],
    mode: Mode,
    seed: u64,
    opts: &ArrangeOptions,
    flat: bool,
) -> Vec<Plan<T>> {
    let cands: Vec<Vec<Candidate<T>>> = knots
        .iter()
        .enumerate()
        .map(|(i, k)| candidates(k, i, seed, opts, flat))
        .collect();
    // steepest corners first: the smaller of the two slopes bounds f2 from above
    let shortlist: Vec<Vec<usize>> = cands
        .iter()
        .map(|cs| {
            let mut idx: Vec<usize> = (0..cs.len()).collect();
            let key = |j: &usize| cs[*j].slopes[0].min(cs[*j].slopes[1]);
            idx.sort_by(|a, b| {
                key(b)
                    .partial_cmp(&key(a))
                    .expect("finite slopes")
                    .then(a.cmp(b))
            });
            idx.truncate(K3_SHORTLIST);
            idx
        })
        .collect();
    let mut all: Vec<(f64, f64, usize, Plan<T>)> = Vec::new();
    for roles in PERMUTATIONS {
        if mode == Mode::RigidOnly && !(planar[roles[0]] && planar[roles[2]]) {
            continue;
        }
        let Some(k1) = cands[roles[0]].first() else {
            continue;
        };
        for k2 in &cands[roles[1]] {
            for &j3 in &shortlist[roles[2]] {
                let k3 = &cands[roles[2]][j3];
                for (f, f2_next) in [(1, true), (0, false)] {
                    let margin =
                        k2.slopes[1 - f].min(k3.slopes[0]).min(k3.slopes[1]) / k2.slopes[f];
                    if !(margin > MIN_MARGIN) {
                        continue;
                    }
                    let mut marked = [k1.marked.clone(), k2.marked.clone(), k3.marked.clone()];
                    // back to input order
                    let mut by_input = marked.clone();
                    for (r, &inp) in roles.iter().enumerate() {
                        by_input[inp] = std::mem::replace(&mut marked[r], k1.marked.clone());
                    }
                    let room = k1.room.min(k2.room).min(k3.room);
                    let labels = Labeling {
                        roles,
                        f2_next,
                        e1_next: false,
                        margin,
                    };
                    let order = all.len();
                    all.push((
                        margin.min(MARGIN_ENOUGH),
                        room,
                        order,
                        Plan {
                            marked: by_input,
                            labels,
                        },
                    ));
                }
            }
        }
    }
    all.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("finite")
            .then(y.1.partial_cmp(&x.1).expect("finite"))
            .then(x.2.cmp(&y.2))
    });
    all.truncate(opts.max_relabels.max(1));
    all.into_iter().map(|(_, _, _, p)| p).collect()
}

/// Radius of the neighbourhood of the origin where all the local moves
/// happen: an eighth of the smallest corner feature (edge length at the
/// marked vertex, or clearance from the vertex to its knot's other edges).
fn corner_feature<T: Scalar>(m: &MarkedKnot<T>) -> T {
    let v = m.vertex();
    let (a, b) = m.neighbours();
    let n = m.knot.len();
    let mut best = v.distance(a).min(v.distance(b));
    for i in 0..n {
        if i == m.v_index || (i + 1) % n == m.v_index {
            continue;
        }
        best = best.min(point_segment_distance(v, &m.knot.edge(i)));
    }
    best
}

fn check_inputs<T: Scalar>(
    knots: &[PolygonalKnot<T>],
    mode: Mode,
) -> Result<[bool; 3], ArrangeError> {
    if knots.len() != 3 {
        return Err(ArrangeError::PreconditionViolated(format!(
            "expected 3 knots, got {}",
            knots.len()
        )));
    }
    let mut planar = [false; 3];
    for (i, k) in knots.iter().enumerate() {
        let tol = k.tolerance();
        crate::knot::validate(k.vertices(), &tol)
            .map_err(|e| ArrangeError::PreconditionViolated(format!("knot {i}: {e}")))?;
        planar[i] = planar_fit(k).is_some();
    }
    if mode == Mode::RigidOnly && planar.iter().filter(|&&p| p).count() < 2 {
        return Err(ArrangeError::PreconditionViolated(
            "rigid-only arrangement needs at least two planar knots".to_string(),
        ));
    }
    Ok(planar)
}

pub fn arrange_with<T: Scalar>(
    knots: &[PolygonalKnot<T>],
    mode: Mode,
    seed: u64,
    opts: &ArrangeOptions,
) -> Result<Arrangement<T>, ArrangeError> {
    let planar = check_inputs(knots, mode)?;
    let plans = plans(knots, planar, mode, seed, opts);
    let mut stats = RetryStats::default();
    let mut trace = Vec::new();
    if plans.is_empty() {
        trace.push("no labeling with a strictly least steep f2".to_string());
        return Err(ArrangeError::RetriesExhausted { stats, trace });
    }
    let growths = if mode == Mode::AllowScaling {
        opts.max_scale_growths
    } else {
        0
    };
    let mut safety = opts.safety;
    for growth in 0..=growths {
        if growth > 0 {
            safety *= 2.0;
            stats.scale_growths += 1;
            trace.push(format!("safety factor grown to {safety}"));
        }
        for (p, plan) in plans.iter().take(opts.max_relabels.max(1)).enumerate() {
            if p > 0 {
                stats.relabels += 1;
                trace.push(format!("relabel: roles {:?}", plan.labels.roles));
            }
            match run_plan(
                knots,
                plan,
                mode,
                T::lit(safety),
                seed,
                opts,
                &mut stats,
                &mut trace,
            ) {
                Ok((state, certificate)) => {
                    let mut transforms = vec![SimilarityTransform::identity(); 3];
                    for (r, &i) in plan.labels.roles.iter().enumerate() {
                        transforms[i] = state.transforms[r];
                    }
                    let arranged = knots
                        .iter()
                        .zip(&transforms)
                        .map(|(k, t)| k.transformed(t))
                        .collect();
                    return Ok(Arrangement {
                        inputs: knots.to_vec(),
                        transforms,
                        arranged,
                        certificate,
                        stats,
                        roles: plan.labels.roles,
                        budget: state.budget,
                        mode,
                        seed,
                    });
                }
                Err(e) => trace.push(format!("plan {p} abandoned: {e}")),
            }
        }
    }
    Err(ArrangeError::RetriesExhausted { stats, trace })
}

/// Placement, orientation, scaling and alignment: everything before the
/// small moves.
fn prepare<T: Scalar>(
    knots: &[PolygonalKnot<T>],
    plan: &Plan<T>,
    mode: Mode,
    safety: T,
) -> Result<ArrangementState<T>, StageError> {
    let roles = plan.labels.roles;
    let m = |r: usize| &plan.marked[roles[r]];
    let eps_ball = (0..3)
        .map(|r| corner_feature(m(r)))
        .fold(T::infinity(), T::min)
        / T::lit(8.0);
    let mut state = ArrangementState {
        inputs: [
            knots[roles[0]].clone(),
            knots[roles[1]].clone(),
            knots[roles[2]].clone(),
        ],
        transforms: [
            SimilarityTransform::identity(),
            stage_place_k2(m(K2))?,
            stage_place_k3(m(K3))?,
        ],
        v_index: [m(K1).v_index, m(K2).v_index, m(K3).v_index],
        e_next: [plan.labels.e1_next, !plan.labels.f2_next, true],
        directions: [m(K1).direction, m(K2).direction, m(K3).direction],
        up: None,
        w: None,
        v: None,
        u: None,
        line: None,
        budget: StepBudget::new(eps_ball),
        stage: Stage::Placed,
        tol: T::zero(),
    };
    let eps_angle = Tolerance::<T>::relative_factor();
    orient_halfplanes(&mut state, eps_angle)?;
    // e2 meets the y axis on the side f2 leaves from; e1 goes there
    let side = if (state.far(K2, false) - state.vertex(K2)).y > T::zero() {
        AxisSide::Negative
    } else {
        AxisSide::Positive
    };
    state.transforms[K1] = stage_place_k1(m(K1), plan.labels.e1_next, side)?;
    if mode == Mode::AllowScaling {
        scale_components(&mut state, safety);
    }
    align_planes(&mut state)?;
    separate_collinear(&mut state, eps_angle)?;
    let extent = bounding_diagonal((0..3).flat_map(|r| state.knot(r).vertices().to_vec()));
    state.tol = (T::lit(1e-9) * eps_ball).max(T::lit(64.0) * T::epsilon() * extent);
    state.budget.d = (0..3)
        .map(|r| state.protected_distance(r))
        .fold(T::infinity(), T::min);
    Ok(state)
}

const LOCAL_STAGES: [&str; 5] = [
    "perturb_K2",
    "perturb_K3",
    "choose_line_l",
    "rotate_K3_about_l",
    "final_translate_K2",
];

fn run_local<T: Scalar>(
    state: &mut ArrangementState<T>,
    stage: usize,
    theta: T,
) -> Result<(), StageError> {
    match stage {
        0 => perturb_k2(state, theta),
        1 => perturb_k3(state, theta),
        2 => choose_line_l(state, theta),
        3 => rotate_k3_about_l(state, theta),
        _ => final_translate_k2(state, theta),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_plan<T: Scalar>(
    knots: &[PolygonalKnot<T>],
    plan: &Plan<T>,
    mode: Mode,
    safety: T,
    seed: u64,
    opts: &ArrangeOptions,
    stats: &mut RetryStats,
    trace: &mut Vec<String>,
) -> Result<(ArrangementState<T>, BorromeanCertificate), StageError> {
    let start = prepare(knots, plan, mode, safety)?;
    let mut theta = [T::one(); 5];
    let mut snapshots = vec![start];
    let mut halvings = 0;
    let mut stage = 0;
    loop {
        let mut state = snapshots[stage].clone();
        let failed_at = match run_local(&mut state, stage, theta[stage]) {
            Ok(()) if stage + 1 < LOCAL_STAGES.len() => {
                snapshots.truncate(stage + 1);
                snapshots.push(state);
                stage += 1;
                continue;
            }
            Ok(()) => {
                let link: Vec<_> = (0..3).map(|r| state.knot(r)).collect();
                let mut arranged = vec![link[0].clone(); 3];
                for (r, &i) in plan.labels.roles.iter().enumerate() {
                    arranged[i] = link[r].clone();
                }
                match certify_borromean(&arranged, seed, opts.bracket_cap) {
                    Ok(c) if c.verdict.is_pass() => return Ok((state, c)),
                    Ok(c) => trace.push(format!("certificate failed: {}", c.verdict)),
                    Err(e) => trace.push(format!("certificate failed: {e}")),
                }
                theta.iter_mut().for_each(|t| *t = *t / T::lit(2.0));
                0
            }
            Err(StageError::NoValidLine) => {
                trace.push(format!(
                    "{}: {}",
                    LOCAL_STAGES[stage],
                    StageError::NoValidLine
                ));
                theta[1] = theta[1] / T::lit(2.0);
                1
            }
            Err(e @ StageError::StepTooLarge(_)) => {
                trace.push(format!("{}: {e}", LOCAL_STAGES[stage]));
                theta[stage] = theta[stage] / T::lit(2.0);
                stage
            }
            Err(e) => return Err(e),
        };
        halvings += 1;
        stats.shrinks += 1;
        if halvings > opts.max_halvings {
            return Err(StageError::StepTooLarge("halving budget spent"));
        }
        stage = failed_at;
        snapshots.truncate(stage + 1);
    }
}
