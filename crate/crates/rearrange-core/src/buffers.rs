//! Lazy buffer allocation: replays a primitive plan while accumulating pose
//! constraints for buffered objects, binding concrete buffer poses with a
//! sampling or optimization back-end.
//!
//! Constraints only grow while an object stays buffered, so a pose validated
//! once stays valid until a new constraint lands on it; generation reuses
//! such poses bit-identically and only regenerates the rest.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{collides, contained, CheckCounter, Pose, Shape, Workspace};
use crate::model::{sample_contained_pose, ActionKind, Arrangement, Instance};
use crate::primitive::PrimitivePlan;

/// Fresh samples tried per buffer per generation call.
pub const SAMPLE_BUDGET: usize = 100;
/// Random restarts of the feasibility descent.
pub const OPT_RESTARTS: usize = 20;
/// Descent iterations per restart.
pub const OPT_ITERS: usize = 500;
/// Step length applied to the normalized violation gradient, workspace units.
pub const OPT_STEP: f64 = 0.05;
/// Convergence threshold on the largest violation, squared units.
pub const OPT_TOL: f64 = 1e-7;
// Radius padding so converged poses clear the strict collision predicate.
const OPT_MARGIN: f64 = 1e-6;

/// Buffer pose generation back-end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sampling,
    Optimization,
}

/// Buffer poses keyed by object id, covering every object evicted so far.
pub type BufferAssignment = BTreeMap<usize, Pose>;

/// Outcome of replaying a primitive plan through buffer allocation.
#[derive(Debug, Clone)]
pub struct AllocationResult {
    pub buffers: BufferAssignment,
    /// Index of the action whose constraint update could not be satisfied;
    /// `None` when every action was instantiated.
    pub failed_step: Option<usize>,
}

impl AllocationResult {
    pub fn success(&self) -> bool {
        self.failed_step.is_none()
    }
}

#[derive(Debug, Error)]
#[error("optimization back-end supports discs only")]
pub struct UnsupportedShape;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Loc {
    Unmoved,
    Buffered,
    Placed,
}

/// Binds buffer poses for a primitive plan moving `from` to `to`.
pub fn allocate(
    plan: &PrimitivePlan,
    from: &Arrangement,
    to: &Arrangement,
    inst: &Instance,
    backend: Backend,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> AllocationResult {
    allocate_with(plan, from, to, inst, backend, &BTreeMap::new(), rng, counter)
}

/// [`allocate`] with additional per-object obstacles injected into the
/// constraint snapshot at eviction time (used by preprocessing to keep
/// resting buffers off unfilled goal poses).
#[allow(clippy::too_many_arguments)]
pub fn allocate_with(
    plan: &PrimitivePlan,
    from: &Arrangement,
    to: &Arrangement,
    inst: &Instance,
    backend: Backend,
    extra_obstacles: &BTreeMap<usize, Vec<(Shape, Pose)>>,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> AllocationResult {
    let n = inst.n();
    let mut cur: Vec<Pose> = (0..n).map(|i| from.pose(i)).collect();
    let mut state = vec![Loc::Unmoved; n];
    let mut constraints: Vec<Vec<(Shape, Pose)>> = vec![Vec::new(); n];
    // Buffer variables start at random poses; feasibility is not required
    // here, the values only matter through the kept-buffer rule.
    let mut bufs: Vec<Pose> =
        (0..n).map(|i| random_pose(inst.shape(i), &inst.workspace, rng)).collect();
    let mut resident: Vec<usize> = Vec::new();
    let mut ever_buffered = vec![false; n];

    for (t, act) in plan.actions.iter().enumerate() {
        let o = act.object;
        match act.kind {
            ActionKind::SB => {
                let mut snap: Vec<(Shape, Pose)> = (0..n)
                    .filter(|&j| j != o && state[j] != Loc::Buffered)
                    .map(|j| (*inst.shape(j), cur[j]))
                    .collect();
                if let Some(list) = extra_obstacles.get(&o) {
                    snap.extend(list.iter().cloned());
                }
                constraints[o] = snap;
                state[o] = Loc::Buffered;
                resident.push(o);
                ever_buffered[o] = true;
            }
            ActionKind::BG => {
                let goal = to.pose(o);
                let vacated = bufs[o];
                state[o] = Loc::Placed;
                cur[o] = goal;
                resident.retain(|&x| x != o);
                // Remaining residents shared the workspace with o's buffer
                // while it was occupied, so they must keep avoiding it; later
                // evictions may reuse the space freely.
                for &r in &resident {
                    constraints[r].push((*inst.shape(o), goal));
                    constraints[r].push((*inst.shape(o), vacated));
                }
            }
            ActionKind::SG => {
                let goal = to.pose(o);
                state[o] = Loc::Placed;
                cur[o] = goal;
                for &r in &resident {
                    constraints[r].push((*inst.shape(o), goal));
                }
            }
        }
        if resident.is_empty() {
            continue;
        }
        if !generate(backend, &resident, &constraints, &mut bufs, inst, rng, counter) {
            let buffers = (0..n)
                .filter(|&j| ever_buffered[j] && !(act.kind == ActionKind::SB && j == o))
                .map(|j| (j, bufs[j]))
                .collect();
            return AllocationResult { buffers, failed_step: Some(t) };
        }
    }
    let buffers = (0..n).filter(|&j| ever_buffered[j]).map(|j| (j, bufs[j])).collect();
    AllocationResult { buffers, failed_step: None }
}

fn random_pose(shape: &Shape, ws: &Workspace, rng: &mut ChaCha8Rng) -> Pose {
    let theta = match shape {
        Shape::Disc { .. } => 0.0,
        Shape::Rect { .. } => rng.gen_range(0.0..std::f64::consts::TAU),
    };
    Pose::new(rng.gen_range(0.0..ws.width), rng.gen_range(0.0..ws.height), theta)
}

/// Runs one generation pass; on success writes the new poses back.
fn generate(
    backend: Backend,
    resident: &[usize],
    constraints: &[Vec<(Shape, Pose)>],
    bufs: &mut [Pose],
    inst: &Instance,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> bool {
    let found = match backend {
        Backend::Optimization => {
            match optimize_buffers(resident, constraints, bufs, inst, rng, counter) {
                Ok(poses) => poses,
                Err(UnsupportedShape) => {
                    sample_buffers(resident, constraints, bufs, inst, rng, counter)
                }
            }
        }
        Backend::Sampling => sample_buffers(resident, constraints, bufs, inst, rng, counter),
    };
    match found {
        Some(poses) => {
            for (&o, p) in resident.iter().zip(poses) {
                bufs[o] = p;
            }
            true
        }
        None => false,
    }
}

fn pose_ok(
    shape: &Shape,
    pose: &Pose,
    obstacles: &[(Shape, Pose)],
    accepted: &[(usize, Pose)],
    inst: &Instance,
    counter: &CheckCounter,
) -> bool {
    contained(shape, pose, &inst.workspace)
        && obstacles.iter().all(|(s, q)| !collides(shape, pose, s, q, counter))
        && accepted.iter().all(|&(a, q)| !collides(shape, pose, inst.shape(a), &q, counter))
}

/// Samples buffer poses one by one in eviction order; earlier buffers become
/// obstacles for later ones. A current pose satisfying all constraints is
/// kept unchanged and consumes no randomness. Returns poses parallel to
/// `resident`, or `None` when some object exhausts its budget.
pub fn sample_buffers(
    resident: &[usize],
    constraints: &[Vec<(Shape, Pose)>],
    keep: &[Pose],
    inst: &Instance,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> Option<Vec<Pose>> {
    let mut accepted: Vec<(usize, Pose)> = Vec::with_capacity(resident.len());
    for &o in resident {
        let shape = inst.shape(o);
        let mut chosen = None;
        if pose_ok(shape, &keep[o], &constraints[o], &accepted, inst, counter) {
            chosen = Some(keep[o]);
        }
        let mut tries = 0;
        while chosen.is_none() && tries < SAMPLE_BUDGET {
            tries += 1;
            if let Some(p) = sample_contained_pose(shape, &inst.workspace, rng) {
                if pose_ok(shape, &p, &constraints[o], &accepted, inst, counter) {
                    chosen = Some(p);
                }
            }
        }
        match chosen {
            Some(p) => accepted.push((o, p)),
            None => return None,
        }
    }
    Some(accepted.into_iter().map(|(_, p)| p).collect())
}

/// Solves the joint disc feasibility system
/// `(x_i−x_j)² + (y_i−y_j)² ≥ (r_i+r_j)²` over buffer/obstacle and
/// buffer/buffer pairs, with centers clamped inside the workspace, by
/// gradient descent on the violations with random restarts. Converged poses
/// are confirmed against the collision predicates before being returned.
pub fn optimize_buffers(
    resident: &[usize],
    constraints: &[Vec<(Shape, Pose)>],
    keep: &[Pose],
    inst: &Instance,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> Result<Option<Vec<Pose>>, UnsupportedShape> {
    let m = resident.len();
    let ws = &inst.workspace;
    let mut radii = Vec::with_capacity(m);
    let mut obstacles: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(m);
    for &o in resident {
        let Shape::Disc { radius } = *inst.shape(o) else {
            return Err(UnsupportedShape);
        };
        radii.push(radius);
        if radius * 2.0 > ws.width || radius * 2.0 > ws.height {
            return Ok(None);
        }
        let mut obs = Vec::with_capacity(constraints[o].len());
        for (s, q) in &constraints[o] {
            let Shape::Disc { radius: r } = *s else {
                return Err(UnsupportedShape);
            };
            obs.push((q.x, q.y, r));
        }
        obstacles.push(obs);
    }

    let mut xy = vec![(0.0f64, 0.0f64); m];
    for restart in 0..OPT_RESTARTS {
        for i in 0..m {
            let (lo_x, hi_x) = (radii[i], ws.width - radii[i]);
            let (lo_y, hi_y) = (radii[i], ws.height - radii[i]);
            xy[i] = if restart == 0 {
                let p = keep[resident[i]];
                (p.x.clamp(lo_x, hi_x), p.y.clamp(lo_y, hi_y))
            } else {
                (rng.gen_range(lo_x..=hi_x), rng.gen_range(lo_y..=hi_y))
            };
        }
        for _ in 0..OPT_ITERS {
            let mut grad = vec![(0.0f64, 0.0f64); m];
            let mut max_violation = 0.0f64;
            let push = |g: &mut (f64, f64), dx: f64, dy: f64, idx: usize| {
                let d2 = dx * dx + dy * dy;
                if d2 < 1e-18 {
                    let a = idx as f64 * 2.399963229728653;
                    g.0 += a.cos();
                    g.1 += a.sin();
                } else {
                    g.0 += dx;
                    g.1 += dy;
                }
            };
            for i in 0..m {
                for &(ox, oy, or) in &obstacles[i] {
                    let req = radii[i] + or + OPT_MARGIN;
                    let (dx, dy) = (xy[i].0 - ox, xy[i].1 - oy);
                    let v = req * req - (dx * dx + dy * dy);
                    if v > 0.0 {
                        max_violation = max_violation.max(v);
                        push(&mut grad[i], dx, dy, i);
                    }
                }
            }
            for i in 0..m {
                for j in i + 1..m {
                    let req = radii[i] + radii[j] + OPT_MARGIN;
                    let (dx, dy) = (xy[i].0 - xy[j].0, xy[i].1 - xy[j].1);
                    let v = req * req - (dx * dx + dy * dy);
                    if v > 0.0 {
                        max_violation = max_violation.max(v);
                        push(&mut grad[i], dx, dy, i);
                        push(&mut grad[j], -dx, -dy, j);
                    }
                }
            }
            if max_violation < OPT_TOL {
                let poses: Vec<Pose> =
                    xy.iter().map(|&(x, y)| Pose::new(x, y, 0.0)).collect();
                if confirm(resident, &poses, constraints, inst, counter) {
                    return Ok(Some(poses));
                }
                break;
            }
            let norm = grad
                .iter()
                .map(|g| g.0 * g.0 + g.1 * g.1)
                .sum::<f64>()
                .sqrt();
            if norm < 1e-18 {
                break;
            }
            for i in 0..m {
                let x = xy[i].0 + OPT_STEP * grad[i].0 / norm;
                let y = xy[i].1 + OPT_STEP * grad[i].1 / norm;
                xy[i] = (
                    x.clamp(radii[i], ws.width - radii[i]),
                    y.clamp(radii[i], ws.height - radii[i]),
                );
            }
        }
    }
    Ok(None)
}

fn confirm(
    resident: &[usize],
    poses: &[Pose],
    constraints: &[Vec<(Shape, Pose)>],
    inst: &Instance,
    counter: &CheckCounter,
) -> bool {
    for (i, &o) in resident.iter().enumerate() {
        let shape = inst.shape(o);
        if !contained(shape, &poses[i], &inst.workspace) {
            return false;
        }
        for (s, q) in &constraints[o] {
            if collides(shape, &poses[i], s, q, counter) {
                return false;
            }
        }
        for j in i + 1..resident.len() {
            if collides(shape, &poses[i], inst.shape(resident[j]), &poses[j], counter) {
                return false;
            }
        }
    }
    true
}
