//! Planning engine for tabletop object rearrangement with internal buffers.
//!
//! Objects start and finish inside one shared workspace, moving one at a
//! time by pick and place; displaced objects wait at buffer poses chosen
//! inside the same workspace. The pipeline derives a primitive plan from the
//! start-to-goal dependency graph, binds buffer poses lazily (sampling or
//! local optimization), and wraps the primitive step in one-shot, forward
//! tree, or bidirectional tree search, with an optional unlabeled
//! pre-rearrangement phase for tangled instances.

pub mod buffers;
pub mod depgraph;
pub mod geometry;
pub mod model;
pub mod planner;
pub mod primitive;

pub use buffers::{allocate, AllocationResult, Backend, BufferAssignment};
pub use depgraph::DependencyGraph;
pub use geometry::{CheckCounter, Pose, Shape, Workspace};
pub use model::{
    gen_dense_small, gen_lattice, gen_random, is_feasible, validate_plan, Action,
    ActionKind, Arrangement, GenError, Instance, ObjectSpec, Plan, PlanFile, PlanStats,
    ShapeFamily,
};
pub use planner::{
    solve, Framework, PrimitiveKind, SolveOutcome, SolveStats, SolveStatus, SolverConfig,
};
