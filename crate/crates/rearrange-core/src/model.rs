//! Instances, arrangements, plans, plan validation, instance generation, and
//! the JSON file formats.

use crate::geometry::{collides, contained, CheckCounter, Pose, Shape, Workspace};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use thiserror::Error;

/// Tolerance for pose equality in plan validation and tree bookkeeping.
pub const POSE_TOL: f64 = 1e-6;

/// One movable object: contiguous id plus footprint shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: usize,
    pub shape: Shape,
}

/// A pose for every object, indexed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement(Vec<Pose>);

impl Arrangement {
    pub fn new(poses: Vec<Pose>) -> Self {
        Arrangement(poses)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pose(&self, id: usize) -> Pose {
        self.0[id]
    }

    pub fn set(&mut self, id: usize, pose: Pose) {
        self.0[id] = pose;
    }

    pub fn poses(&self) -> &[Pose] {
        &self.0
    }

    /// Number of ids whose poses differ beyond `tol`.
    pub fn distance(&self, other: &Arrangement, tol: f64) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| !a.approx_eq(b, tol))
            .count()
    }

    /// Sum of center Euclidean distances over all ids.
    pub fn center_distance(&self, other: &Arrangement) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt())
            .sum()
    }
}

impl Serialize for Arrangement {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(Some(self.0.len()))?;
        for (id, pose) in self.0.iter().enumerate() {
            map.serialize_entry(&id.to_string(), pose)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Arrangement {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, Pose> = BTreeMap::deserialize(de)?;
        let n = raw.len();
        let mut poses = vec![None; n];
        for (key, pose) in raw {
            let id: usize = key
                .parse()
                .map_err(|_| D::Error::custom(format!("non-numeric object id {key:?}")))?;
            if id >= n {
                return Err(D::Error::custom(format!(
                    "object id {id} out of range for {n} poses"
                )));
            }
            poses[id] = Some(pose);
        }
        // Length n with no id >= n and no duplicate keys implies 0..n.
        Ok(Arrangement(poses.into_iter().map(|p| p.unwrap()).collect()))
    }
}

/// A rearrangement problem: workspace, objects, start and goal arrangements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub workspace: Workspace,
    pub objects: Vec<ObjectSpec>,
    pub start: Arrangement,
    pub goal: Arrangement,
}

impl Instance {
    /// Builds and fully validates an instance.
    pub fn new(
        workspace: Workspace,
        objects: Vec<ObjectSpec>,
        start: Arrangement,
        goal: Arrangement,
    ) -> Result<Self, ModelError> {
        let inst = Instance { workspace, objects, start, goal };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.objects.len()
    }

    pub fn shape(&self, id: usize) -> &Shape {
        &self.objects[id].shape
    }

    /// Total footprint area divided by workspace area.
    pub fn density(&self) -> f64 {
        self.objects.iter().map(|o| o.shape.area()).sum::<f64>() / self.workspace.area()
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !(self.workspace.width > 0.0 && self.workspace.height > 0.0) {
            return Err(ModelError::Malformed("workspace dimensions must be positive".into()));
        }
        for (i, obj) in self.objects.iter().enumerate() {
            if obj.id != i {
                return Err(ModelError::Malformed(format!(
                    "object ids must be contiguous from 0; found {} at position {i}",
                    obj.id
                )));
            }
            if !obj.shape.is_valid() {
                return Err(ModelError::Malformed(format!("object {i} has a degenerate shape")));
            }
        }
        let scratch = CheckCounter::new();
        if !is_feasible(&self.start, self, &scratch)? {
            return Err(ModelError::Malformed("start arrangement is not feasible".into()));
        }
        if !is_feasible(&self.goal, self, &scratch)? {
            return Err(ModelError::Malformed("goal arrangement is not feasible".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

/// What a plan action does: straight to goal, to a buffer, or buffer to goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    SG,
    SB,
    BG,
}

/// Pick one object and place it at `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub object: usize,
    pub target: Pose,
    pub kind: ActionKind,
}

/// An executable action sequence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<Action>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Arrangement after executing every action from `start`.
    pub fn execute(&self, start: &Arrangement) -> Arrangement {
        let mut cur = start.clone();
        for a in &self.actions {
            cur.set(a.object, a.target);
        }
        cur
    }
}

/// Summary block stored alongside a plan on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub actions: usize,
    pub time_s: f64,
    pub collision_checks: u64,
}

/// On-disk plan file: actions plus solve statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub actions: Vec<Action>,
    pub stats: PlanStats,
}

impl PlanFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization cannot fail")
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// First reason a plan fails validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanViolation {
    #[error("action {step}: unknown object {object}")]
    UnknownObject { step: usize, object: usize },
    #[error("action {step}: kind claims a goal placement but the target is not object {object}'s goal pose")]
    KindMismatch { step: usize, object: usize },
    #[error("action {step}: object {object} leaves the workspace")]
    OutOfWorkspace { step: usize, object: usize },
    #[error("action {step}: objects {a} and {b} collide")]
    Collision { step: usize, a: usize, b: usize },
    #[error("final pose of object {object} does not match the goal")]
    WrongFinalPose { object: usize },
}

/// True iff every footprint is workspace-contained and no pair collides.
pub fn is_feasible(
    arr: &Arrangement,
    inst: &Instance,
    counter: &CheckCounter,
) -> Result<bool, ModelError> {
    if arr.len() != inst.n() {
        return Err(ModelError::Malformed(format!(
            "arrangement has {} poses for {} objects",
            arr.len(),
            inst.n()
        )));
    }
    for i in 0..inst.n() {
        if !contained(inst.shape(i), &arr.pose(i), &inst.workspace) {
            return Ok(false);
        }
    }
    for i in 0..inst.n() {
        for j in (i + 1)..inst.n() {
            if collides(inst.shape(i), &arr.pose(i), inst.shape(j), &arr.pose(j), counter) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Replays `plan` from the start arrangement and reports the first violation:
/// a collision, an out-of-workspace placement, a mislabeled goal action, or a
/// wrong final pose (within [`POSE_TOL`]).
pub fn validate_plan(plan: &Plan, inst: &Instance) -> Result<(), PlanViolation> {
    let scratch = CheckCounter::new();
    let mut cur = inst.start.clone();
    for (step, action) in plan.actions.iter().enumerate() {
        let o = action.object;
        if o >= inst.n() {
            return Err(PlanViolation::UnknownObject { step, object: o });
        }
        if matches!(action.kind, ActionKind::SG | ActionKind::BG)
            && !action.target.approx_eq(&inst.goal.pose(o), POSE_TOL)
        {
            return Err(PlanViolation::KindMismatch { step, object: o });
        }
        cur.set(o, action.target);
        if !contained(inst.shape(o), &action.target, &inst.workspace) {
            return Err(PlanViolation::OutOfWorkspace { step, object: o });
        }
        for other in 0..inst.n() {
            if other != o
                && collides(inst.shape(o), &action.target, inst.shape(other), &cur.pose(other), &scratch)
            {
                return Err(PlanViolation::Collision { step, a: o, b: other });
            }
        }
    }
    for i in 0..inst.n() {
        if !cur.pose(i).approx_eq(&inst.goal.pose(i), POSE_TOL) {
            return Err(PlanViolation::WrongFinalPose { object: i });
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    InvalidParam(String),
    #[error("density {requested} exceeds the rejection-sampling cap {cap}")]
    DensityTooHigh { requested: f64, cap: f64 },
    #[error("no feasible arrangement found within {attempts} placement attempts")]
    Timeout { attempts: u64 },
}

/// Which footprint the random generator uses for every object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeFamily {
    Disc,
    Rect,
}

const MAX_PLACEMENT_ATTEMPTS: u64 = 100_000;
const DARTS_PER_OBJECT: u64 = 1000;
const MAX_RESTARTS: u32 = 100;

/// Generates `n` equal-sized objects at density `rho` with independently
/// sampled feasible start and goal arrangements.
pub fn gen_random(
    n: usize,
    rho: f64,
    family: ShapeFamily,
    ws: Workspace,
    seed: u64,
) -> Result<Instance, GenError> {
    if n == 0 {
        return Err(GenError::InvalidParam("need at least one object".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(GenError::InvalidParam(format!("density {rho} out of (0, 1)")));
    }
    let cap = match family {
        ShapeFamily::Disc => 0.55,
        ShapeFamily::Rect => 0.45,
    };
    if rho > cap {
        return Err(GenError::DensityTooHigh { requested: rho, cap });
    }
    let each = rho * ws.area() / n as f64;
    let shape = match family {
        ShapeFamily::Disc => Shape::Disc { radius: (each / std::f64::consts::PI).sqrt() },
        // 2:1 footprint with the same per-object area.
        ShapeFamily::Rect => {
            let height = (each / 2.0).sqrt();
            Shape::Rect { width: 2.0 * height, height }
        }
    };
    let objects: Vec<ObjectSpec> = (0..n).map(|id| ObjectSpec { id, shape }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = sample_arrangement(&objects, &ws, &mut rng)?;
    let goal = sample_arrangement(&objects, &ws, &mut rng)?;
    Ok(Instance { workspace: ws, objects, start, goal })
}

/// Rejection sampling: per-object restart after 1000 failed darts, full
/// restart after 100 of those, hard cap of 1e5 darts total.
fn sample_arrangement(
    objects: &[ObjectSpec],
    ws: &Workspace,
    rng: &mut ChaCha8Rng,
) -> Result<Arrangement, GenError> {
    let scratch = CheckCounter::new();
    let mut total_darts = 0u64;
    for _restart in 0..MAX_RESTARTS {
        let mut placed: Vec<Pose> = Vec::with_capacity(objects.len());
        let mut aborted = false;
        'objects: for obj in objects {
            for _dart in 0..DARTS_PER_OBJECT {
                if total_darts >= MAX_PLACEMENT_ATTEMPTS {
                    return Err(GenError::Timeout { attempts: MAX_PLACEMENT_ATTEMPTS });
                }
                total_darts += 1;
                let pose = match sample_contained_pose(&obj.shape, ws, rng) {
                    Some(p) => p,
                    None => continue,
                };
                let clear = placed
                    .iter()
                    .zip(objects)
                    .all(|(p, other)| !collides(&obj.shape, &pose, &other.shape, p, &scratch));
                if clear {
                    placed.push(pose);
                    continue 'objects;
                }
            }
            aborted = true;
            break;
        }
        if !aborted {
            return Ok(Arrangement::new(placed));
        }
    }
    Err(GenError::Timeout { attempts: total_darts })
}

/// Uniform pose over the containment region; `None` when the shape cannot fit
/// at the drawn orientation.
pub(crate) fn sample_contained_pose(
    shape: &Shape,
    ws: &Workspace,
    rng: &mut ChaCha8Rng,
) -> Option<Pose> {
    let (ex, ey, theta) = match *shape {
        Shape::Disc { radius } => (radius, radius, 0.0),
        Shape::Rect { width, height } => {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = theta.sin_cos();
            (
                (width * c.abs() + height * s.abs()) / 2.0,
                (width * s.abs() + height * c.abs()) / 2.0,
                theta,
            )
        }
    };
    if 2.0 * ex > ws.width || 2.0 * ey > ws.height {
        // Rotation does not fit; still consumes a dart.
        let _ = rng.gen::<f64>();
        return None;
    }
    let x = rng.gen_range(ex..=ws.width - ex);
    let y = rng.gen_range(ey..=ws.height - ey);
    Some(Pose::new(x, y, theta))
}

/// Workspace span reserved around the grid in units of r: one disc diameter
/// of clear band on each side, so an evicted disc always has room to park.
/// A fixed span fraction instead makes the discs of small grids so large
/// that no buffer pose exists at all.
const LATTICE_MARGIN: f64 = 4.0;

/// Discs on a rows x cols grid with center spacing `2.01 r`; the goal labels
/// are a uniformly random permutation of the grid cells.
pub fn gen_lattice(rows: usize, cols: usize, ws: Workspace, seed: u64) -> Result<Instance, GenError> {
    if rows == 0 || cols == 0 {
        return Err(GenError::InvalidParam("lattice needs at least one row and column".into()));
    }
    // Grid span in units of r: 2r for the end discs plus 2.01r per gap.
    let span_x = 2.0 + 2.01 * (cols - 1) as f64;
    let span_y = 2.0 + 2.01 * (rows - 1) as f64;
    let r = (ws.width / (span_x + LATTICE_MARGIN)).min(ws.height / (span_y + LATTICE_MARGIN));
    let spacing = 2.01 * r;
    let x0 = (ws.width - spacing * (cols - 1) as f64) / 2.0;
    let y0 = (ws.height - spacing * (rows - 1) as f64) / 2.0;
    let n = rows * cols;
    let shape = Shape::Disc { radius: r };
    let objects: Vec<ObjectSpec> = (0..n).map(|id| ObjectSpec { id, shape }).collect();
    let cell = |k: usize| {
        let (row, col) = (k / cols, k % cols);
        Pose::new(x0 + spacing * col as f64, y0 + spacing * row as f64, 0.0)
    };
    let start = Arrangement::new((0..n).map(cell).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
    let goal = Arrangement::new(perm.into_iter().map(cell).collect());
    Ok(Instance { workspace: ws, objects, start, goal })
}

/// Random disc instance at density 0.5 with 5 to 8 objects.
pub fn gen_dense_small(n: usize, ws: Workspace, seed: u64) -> Result<Instance, GenError> {
    if !(5..=8).contains(&n) {
        return Err(GenError::InvalidParam(format!("dense-small takes n in 5..=8, got {n}")));
    }
    gen_random(n, 0.5, ShapeFamily::Disc, ws, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws10() -> Workspace {
        Workspace::new(10.0, 10.0)
    }

    #[test]
    fn random_disc_radius_matches_density() {
        let inst = gen_random(10, 0.5, ShapeFamily::Disc, ws10(), 7).unwrap();
        match *inst.shape(0) {
            Shape::Disc { radius } => {
                assert!((radius - (5.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
                assert!((radius - 1.2616).abs() < 1e-3);
            }
            _ => panic!("expected discs"),
        }
        assert!((inst.density() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn random_rect_density_exact() {
        let inst = gen_random(8, 0.3, ShapeFamily::Rect, ws10(), 3).unwrap();
        assert!((inst.density() - 0.3).abs() < 1e-9);
        match *inst.shape(0) {
            Shape::Rect { width, height } => assert!((width - 2.0 * height).abs() < 1e-12),
            _ => panic!("expected rects"),
        }
    }

    #[test]
    fn generated_arrangements_are_feasible() {
        let scratch = CheckCounter::new();
        for seed in 0..5 {
            let inst = gen_random(12, 0.4, ShapeFamily::Disc, ws10(), seed).unwrap();
            assert!(is_feasible(&inst.start, &inst, &scratch).unwrap());
            assert!(is_feasible(&inst.goal, &inst, &scratch).unwrap());
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = gen_random(9, 0.35, ShapeFamily::Disc, ws10(), 42).unwrap();
        let b = gen_random(9, 0.35, ShapeFamily::Disc, ws10(), 42).unwrap();
        assert_eq!(a, b);
        let c = gen_random(9, 0.35, ShapeFamily::Disc, ws10(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn density_caps_enforced() {
        assert!(matches!(
            gen_random(5, 0.56, ShapeFamily::Disc, ws10(), 0),
            Err(GenError::DensityTooHigh { .. })
        ));
        assert!(matches!(
            gen_random(5, 0.46, ShapeFamily::Rect, ws10(), 0),
            Err(GenError::DensityTooHigh { .. })
        ));
    }

    #[test]
    fn impossible_fit_times_out() {
        // One disc whose diameter exceeds the workspace height: every dart fails.
        let err = gen_random(1, 0.55, ShapeFamily::Disc, Workspace::new(20.0, 5.0), 0);
        assert!(matches!(err, Err(GenError::Timeout { .. })));
    }

    #[test]
    fn lattice_structure() {
        let inst = gen_lattice(3, 5, ws10(), 11).unwrap();
        assert_eq!(inst.n(), 15);
        let r = match *inst.shape(0) {
            Shape::Disc { radius } => radius,
            _ => panic!(),
        };
        // Adjacent cells sit 2.01 r apart.
        let d = inst.start.pose(1).x - inst.start.pose(0).x;
        assert!((d - 2.01 * r).abs() < 1e-9);
        let scratch = CheckCounter::new();
        assert!(is_feasible(&inst.start, &inst, &scratch).unwrap());
        assert!(is_feasible(&inst.goal, &inst, &scratch).unwrap());
        // Goal poses are a permutation of the start cells.
        let mut s: Vec<(u64, u64)> = inst
            .start
            .poses()
            .iter()
            .map(|p| (p.x.to_bits(), p.y.to_bits()))
            .collect();
        let mut g: Vec<(u64, u64)> = inst
            .goal
            .poses()
            .iter()
            .map(|p| (p.x.to_bits(), p.y.to_bits()))
            .collect();
        s.sort_unstable();
        g.sort_unstable();
        assert_eq!(s, g);
    }

    #[test]
    fn lattice_goal_permutation_is_uniform() {
        let mut counts = std::collections::HashMap::new();
        for seed in 0..6000u64 {
            let inst = gen_lattice(1, 3, ws10(), seed).unwrap();
            let key: Vec<u64> = inst.goal.poses().iter().map(|p| p.x.to_bits()).collect();
            *counts.entry(key).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        for &c in counts.values() {
            assert!((850..=1150).contains(&c), "permutation count {c} outside 1000 +/- 150");
        }
    }

    #[test]
    fn dense_small_bounds() {
        assert!(gen_dense_small(4, ws10(), 0).is_err());
        assert!(gen_dense_small(9, ws10(), 0).is_err());
        let inst = gen_dense_small(6, ws10(), 5).unwrap();
        assert!((inst.density() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn instance_round_trip_is_bit_exact() {
        let inst = gen_random(7, 0.3, ShapeFamily::Rect, ws10(), 99).unwrap();
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(inst, back);
        // Poses survive with their exact bit patterns.
        for (a, b) in inst.start.poses().iter().zip(back.start.poses()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.theta.to_bits(), b.theta.to_bits());
        }
    }

    #[test]
    fn instance_json_schema() {
        let inst = gen_random(2, 0.1, ShapeFamily::Disc, ws10(), 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        assert!(v["workspace"]["width"].is_number());
        assert_eq!(v["objects"][0]["id"], 0);
        assert_eq!(v["objects"][0]["shape"]["type"], "disc");
        assert!(v["start"]["0"].is_array());
        assert_eq!(v["start"]["1"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn malformed_arrangement_ids_rejected() {
        let text = r#"{
            "workspace": {"width": 10.0, "height": 10.0},
            "objects": [{"id": 0, "shape": {"type": "disc", "radius": 1.0}}],
            "start": {"1": [5.0, 5.0, 0.0]},
            "goal": {"0": [5.0, 5.0, 0.0]}
        }"#;
        assert!(Instance::from_json(text).is_err());
    }

    #[test]
    fn infeasible_start_rejected() {
        let text = r#"{
            "workspace": {"width": 10.0, "height": 10.0},
            "objects": [
                {"id": 0, "shape": {"type": "disc", "radius": 1.0}},
                {"id": 1, "shape": {"type": "disc", "radius": 1.0}}
            ],
            "start": {"0": [5.0, 5.0, 0.0], "1": [5.5, 5.0, 0.0]},
            "goal": {"0": [2.0, 2.0, 0.0], "1": [8.0, 8.0, 0.0]}
        }"#;
        assert!(matches!(Instance::from_json(text), Err(ModelError::Malformed(_))));
    }

    fn two_disc_instance() -> Instance {
        Instance::new(
            ws10(),
            vec![
                ObjectSpec { id: 0, shape: Shape::Disc { radius: 1.0 } },
                ObjectSpec { id: 1, shape: Shape::Disc { radius: 1.0 } },
            ],
            Arrangement::new(vec![Pose::new(2.0, 2.0, 0.0), Pose::new(8.0, 8.0, 0.0)]),
            Arrangement::new(vec![Pose::new(8.0, 2.0, 0.0), Pose::new(2.0, 8.0, 0.0)]),
        )
        .unwrap()
    }

    #[test]
    fn validate_accepts_a_correct_plan() {
        let inst = two_disc_instance();
        let plan = Plan {
            actions: vec![
                Action { object: 0, target: Pose::new(8.0, 2.0, 0.0), kind: ActionKind::SG },
                Action { object: 1, target: Pose::new(2.0, 8.0, 0.0), kind: ActionKind::SG },
            ],
        };
        assert!(validate_plan(&plan, &inst).is_ok());
    }

    #[test]
    fn validate_reports_first_collision() {
        let inst = two_disc_instance();
        let plan = Plan {
            actions: vec![
                Action { object: 0, target: Pose::new(7.9, 7.9, 0.0), kind: ActionKind::SB },
                Action { object: 1, target: Pose::new(2.0, 8.0, 0.0), kind: ActionKind::SG },
            ],
        };
        assert_eq!(
            validate_plan(&plan, &inst),
            Err(PlanViolation::Collision { step: 0, a: 0, b: 1 })
        );
    }

    #[test]
    fn validate_reports_out_of_workspace() {
        let inst = two_disc_instance();
        let plan = Plan {
            actions: vec![Action {
                object: 0,
                target: Pose::new(9.5, 2.0, 0.0),
                kind: ActionKind::SB,
            }],
        };
        assert_eq!(
            validate_plan(&plan, &inst),
            Err(PlanViolation::OutOfWorkspace { step: 0, object: 0 })
        );
    }

    #[test]
    fn validate_reports_wrong_final_pose() {
        let inst = two_disc_instance();
        let plan = Plan {
            actions: vec![Action {
                object: 0,
                target: Pose::new(8.0, 2.0, 0.0),
                kind: ActionKind::SG,
            }],
        };
        assert_eq!(validate_plan(&plan, &inst), Err(PlanViolation::WrongFinalPose { object: 1 }));
    }

    #[test]
    fn validate_reports_unknown_object_and_kind_mismatch() {
        let inst = two_disc_instance();
        let bad_id = Plan {
            actions: vec![Action { object: 5, target: Pose::new(5.0, 5.0, 0.0), kind: ActionKind::SB }],
        };
        assert_eq!(
            validate_plan(&bad_id, &inst),
            Err(PlanViolation::UnknownObject { step: 0, object: 5 })
        );
        let bad_kind = Plan {
            actions: vec![Action { object: 0, target: Pose::new(5.0, 5.0, 0.0), kind: ActionKind::SG }],
        };
        assert_eq!(
            validate_plan(&bad_kind, &inst),
            Err(PlanViolation::KindMismatch { step: 0, object: 0 })
        );
    }

    #[test]
    fn empty_plan_on_solved_instance_validates() {
        let inst = Instance::new(
            ws10(),
            vec![ObjectSpec { id: 0, shape: Shape::Disc { radius: 1.0 } }],
            Arrangement::new(vec![Pose::new(5.0, 5.0, 0.0)]),
            Arrangement::new(vec![Pose::new(5.0, 5.0, 0.0)]),
        )
        .unwrap();
        assert!(validate_plan(&Plan::default(), &inst).is_ok());
    }

    #[test]
    fn plan_file_round_trip() {
        let pf = PlanFile {
            actions: vec![Action {
                object: 0,
                target: Pose::new(1.25, 3.5, 0.1),
                kind: ActionKind::SB,
            }],
            stats: PlanStats { actions: 1, time_s: 0.25, collision_checks: 42 },
        };
        let back = PlanFile::from_json(&pf.to_json()).unwrap();
        assert_eq!(pf, back);
        let v: serde_json::Value = serde_json::from_str(&pf.to_json()).unwrap();
        assert_eq!(v["actions"][0]["kind"], "SB");
        assert_eq!(v["stats"]["collision_checks"], 42);
    }
}
