//! High-level solvers: one-shot retries, a forward search tree, and
//! bidirectional search trees, with optional unlabeled preprocessing.
//!
//! All randomness flows from one seeded stream, so a (instance, config, seed)
//! triple reproduces its outcome bit for bit, collision-check counts
//! included.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::buffers::{allocate, allocate_with, Backend, BufferAssignment, SAMPLE_BUDGET};
use crate::depgraph::DependencyGraph;
use crate::geometry::{collides, contained, CheckCounter, Pose, Shape};
use crate::model::{
    sample_contained_pose, validate_plan, Action, ActionKind, Arrangement, Instance, Plan,
    POSE_TOL,
};
use crate::primitive::{
    derive_plan, random_order, rbm, tbm, unlabeled_fill, FillStep, PlacementOrder,
    PrimitiveAction, PrimitivePlan,
};

/// Primitive-plan strategy: minimize running buffers, minimize total
/// buffers, or place in a uniformly random order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    Rbm,
    Tbm,
    RandomOrder,
}

/// High-level search framework.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framework {
    OneShot,
    SearchTree,
    Bidirectional,
}

/// Full solver configuration; the algorithmic part round-trips through
/// strings like `RBM-SP-BST-PP`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub primitive: PrimitiveKind,
    pub backend: Backend,
    pub framework: Framework,
    pub preprocess: bool,
    /// Wall-clock budget in seconds, shared by every phase.
    pub max_time: f64,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(primitive: PrimitiveKind, backend: Backend, framework: Framework) -> Self {
        SolverConfig {
            primitive,
            backend,
            framework,
            preprocess: false,
            max_time: 300.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
#[error("unrecognized solver config `{0}`; expected the form RBM-SP-BST-PP")]
pub struct ConfigParseError(pub String);

impl FromStr for SolverConfig {
    type Err = ConfigParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ConfigParseError(s.to_string());
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(err());
        }
        let primitive = match parts[0] {
            "RBM" => PrimitiveKind::Rbm,
            "TBM" => PrimitiveKind::Tbm,
            "RO" => PrimitiveKind::RandomOrder,
            _ => return Err(err()),
        };
        let backend = match parts[1] {
            "SP" => Backend::Sampling,
            "OPT" => Backend::Optimization,
            _ => return Err(err()),
        };
        let framework = match parts[2] {
            "OS" => Framework::OneShot,
            "ST" => Framework::SearchTree,
            "BST" => Framework::Bidirectional,
            _ => return Err(err()),
        };
        let preprocess = match parts.get(3) {
            None => false,
            Some(&"PP") => true,
            Some(_) => return Err(err()),
        };
        let mut cfg = SolverConfig::new(primitive, backend, framework);
        cfg.preprocess = preprocess;
        Ok(cfg)
    }
}

impl fmt::Display for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.primitive {
            PrimitiveKind::Rbm => "RBM",
            PrimitiveKind::Tbm => "TBM",
            PrimitiveKind::RandomOrder => "RO",
        };
        let b = match self.backend {
            Backend::Sampling => "SP",
            Backend::Optimization => "OPT",
        };
        let fw = match self.framework {
            Framework::OneShot => "OS",
            Framework::SearchTree => "ST",
            Framework::Bidirectional => "BST",
        };
        write!(f, "{p}-{b}-{fw}")?;
        if self.preprocess {
            write!(f, "-PP")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    Timeout,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub time_s: f64,
    pub actions: usize,
    pub collision_checks: u64,
    pub tree_nodes: usize,
    pub iterations: usize,
    pub pp_actions: usize,
    pub pp_skipped: bool,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub plan: Option<Plan>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }
}

/// Result of one lazy rearrangement attempt between two arrangements.
#[derive(Debug, Clone)]
pub struct LazyOutcome {
    pub reached: Arrangement,
    pub partial: Vec<Action>,
    pub solved: bool,
}

/// Builds the dependency graph from `from` to `to`, computes a primitive
/// plan, allocates buffers, and instantiates as much of the plan as the
/// allocation supports. On allocation failure the validated prefix still
/// moves some objects, yielding a new solvable state toward the same goal.
pub fn lazy_rearrange(
    from: &Arrangement,
    to: &Arrangement,
    inst: &Instance,
    primitive: PrimitiveKind,
    backend: Backend,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> LazyOutcome {
    let g = DependencyGraph::build(from, to, inst, counter);
    let (order, _) = pick_order(&g, primitive, rng);
    lazy_step(&g, &order, from, to, inst, backend, rng, counter)
}

fn pick_order(
    g: &DependencyGraph,
    primitive: PrimitiveKind,
    rng: &mut ChaCha8Rng,
) -> (PlacementOrder, bool) {
    match primitive {
        PrimitiveKind::Rbm => {
            let r = rbm(g, rng);
            (r.order, !r.fallback)
        }
        PrimitiveKind::Tbm => {
            let r = tbm(g, rng);
            (r.order, !r.fallback)
        }
        PrimitiveKind::RandomOrder => (random_order(g.n(), rng), false),
    }
}

#[allow(clippy::too_many_arguments)]
fn lazy_step(
    g: &DependencyGraph,
    order: &PlacementOrder,
    from: &Arrangement,
    to: &Arrangement,
    inst: &Instance,
    backend: Backend,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> LazyOutcome {
    let pplan = derive_plan(order, g);
    let alloc = allocate(&pplan, from, to, inst, backend, rng, counter);
    let upto = alloc.failed_step.unwrap_or(pplan.actions.len());
    let partial = instantiate(&pplan.actions[..upto], from, to, &alloc.buffers);
    let reached = exec_actions(from, &partial);
    LazyOutcome { reached, partial, solved: alloc.success() }
}

/// Binds primitive actions to concrete target poses, dropping actions whose
/// object already rests at the target.
pub fn instantiate(
    actions: &[PrimitiveAction],
    from: &Arrangement,
    to: &Arrangement,
    buffers: &BufferAssignment,
) -> Vec<Action> {
    let mut cur = from.clone();
    let mut out = Vec::with_capacity(actions.len());
    for pa in actions {
        let target = match pa.kind {
            ActionKind::SB => *buffers
                .get(&pa.object)
                .expect("allocation covers every eviction in the prefix"),
            ActionKind::SG | ActionKind::BG => to.pose(pa.object),
        };
        if cur.pose(pa.object).approx_eq(&target, POSE_TOL) {
            continue;
        }
        out.push(Action { object: pa.object, target, kind: pa.kind });
        cur.set(pa.object, target);
    }
    out
}

fn exec_actions(from: &Arrangement, actions: &[Action]) -> Arrangement {
    let mut cur = from.clone();
    for a in actions {
        cur.set(a.object, a.target);
    }
    cur
}

/// Rewrites action kinds by replaying from the instance start: moves onto
/// the object's goal pose become s→g or b→g depending on where the object
/// currently rests, everything else becomes s→b. No-op moves are dropped.
pub fn relabel(actions: &[Action], inst: &Instance) -> Plan {
    let mut cur = inst.start.clone();
    let mut out = Vec::with_capacity(actions.len());
    for a in actions {
        let o = a.object;
        if cur.pose(o).approx_eq(&a.target, POSE_TOL) {
            continue;
        }
        let kind = if a.target.approx_eq(&inst.goal.pose(o), POSE_TOL) {
            if cur.pose(o).approx_eq(&inst.start.pose(o), POSE_TOL) {
                ActionKind::SG
            } else {
                ActionKind::BG
            }
        } else {
            ActionKind::SB
        };
        out.push(Action { object: o, target: a.target, kind });
        cur.set(o, a.target);
    }
    Plan { actions: out }
}

/// Geometric replay check: every action lands inside the workspace without
/// hitting another object, and the final arrangement matches `to`.
fn transition_ok(
    from: &Arrangement,
    actions: &[Action],
    to: &Arrangement,
    inst: &Instance,
    counter: &CheckCounter,
) -> bool {
    let mut cur = from.clone();
    for a in actions {
        if !contained(inst.shape(a.object), &a.target, &inst.workspace) {
            return false;
        }
        cur.set(a.object, a.target);
        for other in 0..inst.n() {
            if other != a.object
                && collides(
                    inst.shape(a.object),
                    &a.target,
                    inst.shape(other),
                    &cur.pose(other),
                    counter,
                )
            {
                return false;
            }
        }
    }
    cur.distance(to, POSE_TOL) == 0
}

/// Outcome of the unlabeled pre-rearrangement phase.
#[derive(Debug, Clone)]
pub struct PreprocessResult {
    pub mid: Arrangement,
    pub prefix: Vec<Action>,
    /// Some qualifying component could not instantiate its fill plan.
    pub skipped: bool,
    /// Components actually preprocessed.
    pub components: Vec<Vec<usize>>,
}

/// Reshapes every dependency-graph component that contains a cycle but is
/// not itself a single simple cycle. Objects fill goals without regard to
/// labels, leaving the component's remaining labeled problem a disjoint
/// union of chains, lone assignment cycles, and solved objects, so one
/// running buffer at a time suffices from there on. Cycles are broken by
/// resting their last-filled member at a buffer when space permits;
/// otherwise they are left standing and unwound by the main solve.
pub fn preprocess(
    inst: &Instance,
    backend: Backend,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> PreprocessResult {
    let g = DependencyGraph::build(&inst.start, &inst.goal, inst, counter);
    let mut scc_size = vec![0usize; inst.n()];
    for c in g.scc() {
        for &v in &c {
            scc_size[v] = c.len();
        }
    }
    let mut mid = inst.start.clone();
    let mut prefix = Vec::new();
    let mut skipped = false;
    let mut components = Vec::new();
    for comp in g.components() {
        if !comp.iter().any(|&v| scc_size[v] >= 2) {
            continue;
        }
        let single_cycle = comp.iter().all(|&v| {
            let ind = comp.iter().filter(|&&u| g.edge(u, v)).count();
            let outd = comp.iter().filter(|&&u| g.edge(v, u)).count();
            ind == 1 && outd == 1
        });
        if single_cycle {
            continue;
        }
        let shapes_equal =
            comp.windows(2).all(|w| inst.shape(w[0]) == inst.shape(w[1]));
        // An owner sitting on its own goal pose blocks any other filler; the
        // graph cannot express that (no self edges), so pass it separately.
        let self_block: Vec<bool> = comp
            .iter()
            .map(|&o| {
                collides(inst.shape(o), &mid.pose(o), inst.shape(o), &inst.goal.pose(o), counter)
            })
            .collect();
        let fill = unlabeled_fill(&g, &comp, &self_block, shapes_equal, |a, b| {
            inst.shape(a) == inst.shape(b)
        });

        // The fill assigns component objects to component goals bijectively,
        // so cross fills form permutation cycles: executed in full, every
        // member parks exactly on the next member's goal pose, and the
        // packed goal region can starve the remaining search of buffer
        // space. Resting the last-filled member of each cycle at a buffer
        // breaks it into a chain, which unwinds monotonically.
        let fill_time: BTreeMap<usize, usize> = fill
            .steps
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match *s {
                FillStep::Place { object, .. } => Some((object, i)),
                _ => None,
            })
            .collect();
        let target: BTreeMap<usize, usize> = fill.assignment.iter().copied().collect();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut seen = Vec::new();
        for &(first, _) in &fill.assignment {
            if seen.contains(&first) {
                continue;
            }
            let mut cycle = vec![first];
            seen.push(first);
            let mut v = target[&first];
            while v != first {
                cycle.push(v);
                seen.push(v);
                v = target[&v];
            }
            if cycle.len() >= 2 {
                cycles.push(cycle);
            }
        }
        let rested: Vec<usize> = cycles
            .iter()
            .map(|c| *c.iter().max_by_key(|&&o| fill_time[&o]).unwrap())
            .collect();
        let unfilled: Vec<usize> = rested.iter().map(|o| target[o]).collect();
        let mut rest_steps = Vec::with_capacity(fill.steps.len());
        for s in &fill.steps {
            match *s {
                FillStep::Place { object, from_buffer, .. }
                    if rested.contains(&object) =>
                {
                    // Already buffered resters simply stay; fresh ones are
                    // evicted where their fill would have run.
                    if !from_buffer {
                        rest_steps.push(FillStep::Evict { object });
                    }
                }
                _ => rest_steps.push(*s),
            }
        }
        // Resting buffers must clear the goals nobody fills in this phase,
        // except the rester's own (a self move never blocks). Goals filled
        // while a rester sits buffered are covered by the accumulated
        // constraints already.
        let mut extra: BTreeMap<usize, Vec<(Shape, Pose)>> = BTreeMap::new();
        for &j in &rested {
            let list: Vec<(Shape, Pose)> = unfilled
                .iter()
                .filter(|&&owner| owner != j)
                .map(|&owner| (*inst.shape(owner), inst.goal.pose(owner)))
                .collect();
            if !list.is_empty() {
                extra.insert(j, list);
            }
        }

        let mut accepted = bind_fill(&rest_steps, &extra, &mid, inst, backend, rng, counter);
        if accepted.is_none() {
            // Holding a buffer per broken cycle through the whole phase can
            // exhaust free space in crowded components. Leaving the cycles
            // standing is the fallback: the remainder then needs one
            // short-lived buffer per cycle, so accept it only when the
            // filled arrangement still has room for one more footprint.
            if let Some((bound, next)) =
                bind_fill(&fill.steps, &BTreeMap::new(), &mid, inst, backend, rng, counter)
            {
                let roomy = cycle_shapes(&cycles, inst)
                    .iter()
                    .all(|s| pocket_exists(s, &next, inst, rng, counter));
                if roomy {
                    accepted = Some((bound, next));
                }
            }
        }
        match accepted {
            Some((bound, next)) => {
                mid = next;
                prefix.extend(bound);
                components.push(comp);
            }
            None => skipped = true,
        }
    }
    PreprocessResult { mid, prefix, skipped, components }
}

/// Binds one component's fill steps to concrete poses: allocates buffers
/// against the current arrangement, instantiates the actions, and replays
/// them. Allocation reasons about buffers only, so the replay catches any
/// interaction it cannot see.
fn bind_fill(
    steps: &[FillStep],
    extra: &BTreeMap<usize, Vec<(Shape, Pose)>>,
    mid: &Arrangement,
    inst: &Instance,
    backend: Backend,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> Option<(Vec<Action>, Arrangement)> {
    let actions: Vec<PrimitiveAction> = steps
        .iter()
        .map(|s| match *s {
            FillStep::Evict { object } => PrimitiveAction { object, kind: ActionKind::SB },
            FillStep::Place { object, from_buffer, .. } => PrimitiveAction {
                object,
                kind: if from_buffer { ActionKind::BG } else { ActionKind::SG },
            },
        })
        .collect();
    let total = actions.iter().filter(|a| a.kind == ActionKind::SB).count();
    let mut held = 0usize;
    let mut running = 0usize;
    for a in &actions {
        match a.kind {
            ActionKind::SB => {
                held += 1;
                running = running.max(held);
            }
            ActionKind::BG => held -= 1,
            ActionKind::SG => {}
        }
    }
    let pplan = PrimitivePlan { actions, total_buffers: total, running_buffers: running };
    let mut to_arr = mid.clone();
    for s in steps {
        if let FillStep::Place { object, goal_of, .. } = *s {
            to_arr.set(object, inst.goal.pose(goal_of));
        }
    }
    let alloc = allocate_with(&pplan, mid, &to_arr, inst, backend, extra, rng, counter);
    if !alloc.success() {
        return None;
    }
    let bound = instantiate(&pplan.actions, mid, &to_arr, &alloc.buffers);
    let next = exec_actions(mid, &bound);
    if !transition_ok(mid, &bound, &next, inst, counter) {
        return None;
    }
    Some((bound, next))
}

/// One representative shape per assignment cycle, deduplicated. Fillers
/// inherit the shape of the goal they cover, so any member stands for its
/// whole cycle.
fn cycle_shapes(cycles: &[Vec<usize>], inst: &Instance) -> Vec<Shape> {
    let mut shapes: Vec<Shape> = Vec::new();
    for c in cycles {
        let s = *inst.shape(c[0]);
        if !shapes.contains(&s) {
            shapes.push(s);
        }
    }
    shapes
}

/// Whether one more footprint of `shape` fits in the workspace clear of
/// every object in `arr`. Spends well beyond the per-step sampling budget:
/// this stands in for the many resampling rounds the remaining search gets.
fn pocket_exists(
    shape: &Shape,
    arr: &Arrangement,
    inst: &Instance,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
) -> bool {
    for _ in 0..10 * SAMPLE_BUDGET {
        let Some(p) = sample_contained_pose(shape, &inst.workspace, rng) else {
            continue;
        };
        if (0..inst.n())
            .all(|o| !collides(shape, &p, inst.shape(o), &arr.pose(o), counter))
        {
            return true;
        }
    }
    false
}

/// Runs the configured pipeline end to end.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> SolveOutcome {
    let counter = CheckCounter::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let t0 = Instant::now();
    let budget = Duration::from_secs_f64(cfg.max_time.clamp(0.0, 1e9));
    let deadline = t0 + budget;

    let pp = if cfg.preprocess {
        preprocess(inst, cfg.backend, &mut rng, &counter)
    } else {
        PreprocessResult {
            mid: inst.start.clone(),
            prefix: Vec::new(),
            skipped: false,
            components: Vec::new(),
        }
    };

    let (tail, iterations, tree_nodes) = match cfg.framework {
        Framework::OneShot => run_os(inst, &pp.mid, cfg, &mut rng, &counter, deadline),
        Framework::SearchTree => run_st(inst, &pp.mid, cfg, &mut rng, &counter, deadline),
        Framework::Bidirectional => {
            run_bst(inst, &pp.mid, cfg, &mut rng, &counter, deadline)
        }
    };

    let time_s = t0.elapsed().as_secs_f64();
    match tail {
        Some(tail) => {
            let mut all = pp.prefix.clone();
            all.extend(tail);
            let plan = relabel(&all, inst);
            debug_assert!(
                validate_plan(&plan, inst).is_ok(),
                "solved plans must replay cleanly"
            );
            let stats = SolveStats {
                time_s,
                actions: plan.len(),
                collision_checks: counter.count(),
                tree_nodes,
                iterations,
                pp_actions: pp.prefix.len(),
                pp_skipped: pp.skipped,
            };
            SolveOutcome { status: SolveStatus::Solved, plan: Some(plan), stats }
        }
        None => SolveOutcome {
            status: SolveStatus::Timeout,
            plan: None,
            stats: SolveStats {
                time_s,
                actions: 0,
                collision_checks: counter.count(),
                tree_nodes,
                iterations,
                pp_actions: pp.prefix.len(),
                pp_skipped: pp.skipped,
            },
        },
    }
}

/// [`solve`] forced onto the one-shot framework.
pub fn solve_os(inst: &Instance, cfg: &SolverConfig) -> SolveOutcome {
    solve(inst, &SolverConfig { framework: Framework::OneShot, ..cfg.clone() })
}

/// [`solve`] forced onto the forward search tree.
pub fn solve_st(inst: &Instance, cfg: &SolverConfig) -> SolveOutcome {
    solve(inst, &SolverConfig { framework: Framework::SearchTree, ..cfg.clone() })
}

/// [`solve`] forced onto bidirectional search trees.
pub fn solve_bst(inst: &Instance, cfg: &SolverConfig) -> SolveOutcome {
    solve(inst, &SolverConfig { framework: Framework::Bidirectional, ..cfg.clone() })
}

type RunResult = (Option<Vec<Action>>, usize, usize);

// One-shot: repeated independent attempts, failures discarded. Deterministic
// exact orders are computed once; random orders and greedy fallbacks draw
// fresh randomness per attempt.
fn run_os(
    inst: &Instance,
    from: &Arrangement,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
    deadline: Instant,
) -> RunResult {
    let g = DependencyGraph::build(from, &inst.goal, inst, counter);
    let max_attempts = (30 * inst.n()).max(1);
    let mut cached: Option<PlacementOrder> = None;
    for attempt in 1..=max_attempts {
        if Instant::now() >= deadline {
            return (None, attempt - 1, 0);
        }
        let order = match &cached {
            Some(o) => o.clone(),
            None => {
                let (order, deterministic) = pick_order(&g, cfg.primitive, rng);
                if deterministic {
                    cached = Some(order.clone());
                }
                order
            }
        };
        let out = lazy_step(&g, &order, from, &inst.goal, inst, cfg.backend, rng, counter);
        if out.solved {
            return (Some(out.partial), attempt, 0);
        }
    }
    (None, max_attempts, 0)
}

fn run_st(
    inst: &Instance,
    from: &Arrangement,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
    deadline: Instant,
) -> RunResult {
    let mut tree = Tree::rooted(from.clone());
    let mut iterations = 0;
    loop {
        if Instant::now() >= deadline {
            return (None, iterations, tree.len());
        }
        iterations += 1;
        let pick = rng.gen_range(0..tree.len());
        let out = lazy_rearrange(
            &tree.nodes[pick],
            &inst.goal,
            inst,
            cfg.primitive,
            cfg.backend,
            rng,
            counter,
        );
        let idx = if out.partial.is_empty() {
            pick
        } else {
            tree.add(out.reached, pick, out.partial)
        };
        if out.solved {
            return (Some(tree.path_actions(idx)), iterations, tree.len());
        }
    }
}

// Bidirectional search: grow from a random node of the active tree toward
// the other root; if unconnected, pull the nearest node of the other tree
// toward the new arrangement; then the trees trade roles.
fn run_bst(
    inst: &Instance,
    from: &Arrangement,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
    counter: &CheckCounter,
    deadline: Instant,
) -> RunResult {
    let mut active = Tree::rooted(from.clone());
    let mut passive = Tree::rooted(inst.goal.clone());
    let mut swapped = false;
    let mut iterations = 0;
    loop {
        if Instant::now() >= deadline {
            return (None, iterations, active.len() + passive.len());
        }
        iterations += 1;

        let pick = rng.gen_range(0..active.len());
        let target = passive.nodes[0].clone();
        let out = lazy_rearrange(
            &active.nodes[pick],
            &target,
            inst,
            cfg.primitive,
            cfg.backend,
            rng,
            counter,
        );
        let a_idx =
            if out.partial.is_empty() { pick } else { active.add(out.reached, pick, out.partial) };
        if out.solved {
            if let Some(plan) =
                stitch(&active, a_idx, &passive, 0, swapped, from, inst, counter)
            {
                return (Some(plan), iterations, active.len() + passive.len());
            }
        }

        let near = nearest_node(&passive, &active.nodes[a_idx]);
        let target = active.nodes[a_idx].clone();
        let out = lazy_rearrange(
            &passive.nodes[near],
            &target,
            inst,
            cfg.primitive,
            cfg.backend,
            rng,
            counter,
        );
        let b_idx =
            if out.partial.is_empty() { near } else { passive.add(out.reached, near, out.partial) };
        if out.solved {
            if let Some(plan) =
                stitch(&active, a_idx, &passive, b_idx, swapped, from, inst, counter)
            {
                return (Some(plan), iterations, active.len() + passive.len());
            }
        }

        std::mem::swap(&mut active, &mut passive);
        swapped = !swapped;
    }
}

struct Tree {
    nodes: Vec<Arrangement>,
    parents: Vec<usize>,
    edges: Vec<Vec<Action>>,
}

impl Tree {
    fn rooted(root: Arrangement) -> Self {
        Tree { nodes: vec![root], parents: vec![usize::MAX], edges: vec![Vec::new()] }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn add(&mut self, node: Arrangement, parent: usize, edge: Vec<Action>) -> usize {
        self.nodes.push(node);
        self.parents.push(parent);
        self.edges.push(edge);
        self.nodes.len() - 1
    }

    /// Concatenated edge actions from the root down to `idx`.
    fn path_actions(&self, mut idx: usize) -> Vec<Action> {
        let mut chain = Vec::new();
        while self.parents[idx] != usize::MAX {
            chain.push(idx);
            idx = self.parents[idx];
        }
        chain.reverse();
        chain.into_iter().flat_map(|i| self.edges[i].iter().copied()).collect()
    }

    /// Root-to-`idx` edge actions replayed backward: moves from `idx`'s
    /// arrangement back to the root, each action's source and target
    /// swapped, order reversed.
    fn path_actions_reversed(&self, mut idx: usize) -> Vec<Action> {
        let mut out = Vec::new();
        while self.parents[idx] != usize::MAX {
            let parent = self.parents[idx];
            out.extend(reverse_edge(&self.nodes[parent], &self.edges[idx]));
            idx = parent;
        }
        out
    }
}

/// Replays `actions` forward from `from` recording each move's source pose,
/// then emits the moves backward with endpoints swapped.
fn reverse_edge(from: &Arrangement, actions: &[Action]) -> Vec<Action> {
    let mut cur = from.clone();
    let mut sources = Vec::with_capacity(actions.len());
    for a in actions {
        sources.push(cur.pose(a.object));
        cur.set(a.object, a.target);
    }
    actions
        .iter()
        .zip(sources)
        .rev()
        .map(|(a, source)| Action { object: a.object, target: source, kind: ActionKind::SB })
        .collect()
}

/// Joins the start-side root path with the reversed goal-side root path at
/// the connecting nodes, revalidating the result; kinds are rewritten later.
#[allow(clippy::too_many_arguments)]
fn stitch(
    active: &Tree,
    a_idx: usize,
    passive: &Tree,
    b_idx: usize,
    swapped: bool,
    from: &Arrangement,
    inst: &Instance,
    counter: &CheckCounter,
) -> Option<Vec<Action>> {
    let (start_tree, s_idx, goal_tree, g_idx) =
        if swapped { (passive, b_idx, active, a_idx) } else { (active, a_idx, passive, b_idx) };
    let mut plan = start_tree.path_actions(s_idx);
    plan.extend(goal_tree.path_actions_reversed(g_idx));
    if transition_ok(from, &plan, &inst.goal, inst, counter) {
        Some(plan)
    } else {
        None
    }
}

/// Tree node most similar to `target`: fewest mismatched poses, then
/// smallest summed center distance, then earliest insertion.
fn nearest_node(tree: &Tree, target: &Arrangement) -> usize {
    let mut best = 0;
    let mut best_key = (tree.nodes[0].distance(target, POSE_TOL), tree.nodes[0].center_distance(target));
    for (i, node) in tree.nodes.iter().enumerate().skip(1) {
        let key = (node.distance(target, POSE_TOL), node.center_distance(target));
        if key.0 < best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
            best = i;
            best_key = key;
        }
    }
    best
}
