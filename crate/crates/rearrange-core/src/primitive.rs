//! Primitive plans: placement orders over the dependency graph, eviction
//! schedules, running/total buffer minimization, brute-force oracles, and the
//! unlabeled fill solver used by preprocessing.
//!
//! A primitive plan ignores buffer geometry: evictions go to abstract
//! buffers. Buffer poses are bound later by the allocation module.

use crate::depgraph::DependencyGraph;
use crate::model::ActionKind;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Components larger than this use randomized greedy ordering instead of the
/// exact subset search.
pub const EXACT_COMPONENT_LIMIT: usize = 20;

/// A bijective placement order over object ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementOrder(Vec<usize>);

impl PlacementOrder {
    pub fn new(order: Vec<usize>) -> Self {
        let n = order.len();
        let mut seen = vec![false; n];
        for &v in &order {
            assert!(v < n && !seen[v], "placement order must be a permutation");
            seen[v] = true;
        }
        PlacementOrder(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One abstract step: which object moves and whether it goes to its goal,
/// to a buffer, or from its buffer to its goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimitiveAction {
    pub object: usize,
    pub kind: ActionKind,
}

/// Eviction-annotated action sequence for a placement order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitivePlan {
    pub actions: Vec<PrimitiveAction>,
    /// Number of objects that visit a buffer.
    pub total_buffers: usize,
    /// Maximum number of concurrently buffered objects.
    pub running_buffers: usize,
}

/// Placement order plus a flag for the randomized-greedy fallback.
#[derive(Debug, Clone)]
pub struct OrderResult {
    pub order: PlacementOrder,
    pub fallback: bool,
}

#[derive(Debug, Error)]
#[error("brute force supports at most 8 objects, got {0}")]
pub struct TooLarge(pub usize);

/// Expands a placement order into actions: before placing `j`, every
/// not-yet-placed, not-yet-evicted object blocking `j`'s target is evicted;
/// evicted objects are placed from their buffers when their turn comes.
pub fn derive_plan(order: &PlacementOrder, g: &DependencyGraph) -> PrimitivePlan {
    let n = g.n();
    assert_eq!(order.len(), n, "order covers every object");
    let mut placed = vec![false; n];
    let mut evicted = vec![false; n];
    let mut actions = Vec::new();
    let mut buffered = 0usize;
    let mut running = 0usize;
    let mut total = 0usize;
    for &j in order.as_slice() {
        for o in 0..n {
            if g.edge(j, o) && !placed[o] && !evicted[o] {
                actions.push(PrimitiveAction { object: o, kind: ActionKind::SB });
                evicted[o] = true;
                buffered += 1;
                total += 1;
                running = running.max(buffered);
            }
        }
        if evicted[j] {
            actions.push(PrimitiveAction { object: j, kind: ActionKind::BG });
            buffered -= 1;
        } else {
            actions.push(PrimitiveAction { object: j, kind: ActionKind::SG });
        }
        placed[j] = true;
    }
    PrimitivePlan { actions, total_buffers: total, running_buffers: running }
}

/// Order minimizing the number of concurrently buffered objects, breaking
/// peak ties toward fewer total evictions. Computed per weakly connected
/// component: exact subset search up to [`EXACT_COMPONENT_LIMIT`] vertices,
/// randomized greedy beyond.
pub fn rbm(g: &DependencyGraph, rng: &mut impl Rng) -> OrderResult {
    let mut order = Vec::with_capacity(g.n());
    let mut fallback = false;
    for comp in g.components() {
        if comp.len() <= EXACT_COMPONENT_LIMIT {
            order.extend(rbm_exact(g, &comp));
        } else {
            fallback = true;
            order.extend(rbm_greedy(g, &comp, rng));
        }
    }
    OrderResult { order: PlacementOrder::new(order), fallback }
}

/// Local adjacency masks for one component.
fn local_out_masks(g: &DependencyGraph, comp: &[usize]) -> Vec<u32> {
    comp.iter()
        .map(|&v| {
            let mut m = 0u32;
            for (li, &u) in comp.iter().enumerate() {
                if g.edge(v, u) {
                    m |= 1 << li;
                }
            }
            m
        })
        .collect()
}

// Exact minimum over all orders of the peak buffered count, then the fewest
// total evictions among peak-optimal orders, with remaining ties broken
// toward the lexicographically smallest order. For placed-set S the pending
// evictions are E(S) = { o not in S : some j in S has an edge to o }; placing
// j next peaks at |E(S + j)| plus one if j itself sits in a buffer.
fn rbm_exact(g: &DependencyGraph, comp: &[usize]) -> Vec<usize> {
    let k = comp.len();
    if k == 1 {
        return comp.to_vec();
    }
    let out = local_out_masks(g, comp);
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    let size = 1usize << k;
    // evicted[S]: objects outside S blocked by something in S.
    let mut evicted = vec![0u32; size];
    for mask in 1..size as u32 {
        let j = mask.trailing_zeros() as usize;
        let prev = mask & (mask - 1);
        evicted[mask as usize] = (evicted[prev as usize] | out[j]) & !mask;
    }
    let peak = |mask: u32, j: usize| -> u32 {
        let e = evicted[mask as usize];
        let after = (e | out[j]) & !(mask | (1 << j));
        after.count_ones() + ((e >> j) & 1)
    };
    // h[S]: best achievable peak over completions from placed-set S.
    let mut h = vec![0u8; size];
    for mask in (0..full).rev() {
        let mut best = u8::MAX;
        for j in 0..k {
            if mask & (1 << j) == 0 {
                let v = (peak(mask, j) as u8).max(h[(mask | (1 << j)) as usize]);
                best = best.min(v);
            }
        }
        h[mask as usize] = best;
    }
    // emin[S]: fewest future fresh evictions over completions that never
    // exceed the optimal peak.
    let budget = h[0];
    let newly = |mask: u32, j: usize| -> u32 {
        (out[j] & !(mask | (1 << j)) & !evicted[mask as usize]).count_ones()
    };
    let mut emin = vec![0u8; size];
    for mask in (0..full).rev() {
        let mut best = u8::MAX;
        for j in 0..k {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                if (peak(mask, j) as u8).max(h[next as usize]) <= budget
                    && emin[next as usize] != u8::MAX
                {
                    best = best.min(newly(mask, j) as u8 + emin[next as usize]);
                }
            }
        }
        emin[mask as usize] = best;
    }
    let mut order = Vec::with_capacity(k);
    let mut mask = 0u32;
    while mask != full {
        for j in 0..k {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                if (peak(mask, j) as u8).max(h[next as usize]) <= budget
                    && emin[next as usize] != u8::MAX
                    && newly(mask, j) as u8 + emin[next as usize] == emin[mask as usize]
                {
                    order.push(comp[j]);
                    mask = next;
                    break;
                }
            }
        }
    }
    order
}

// Greedy order for components too large for the subset search. Evictions are
// confined to a feedback vertex set: whenever no free placement exists, some
// vertex outside the set has all its live blockees inside it (the rest induce
// an acyclic graph), so total evictions never exceed the set size. Within
// that, the step peak is kept low and buffered objects return as soon as
// their blockees are gone.
fn rbm_greedy(g: &DependencyGraph, comp: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let k = comp.len();
    let fvs = greedy_fvs(g, comp, rng);
    let in_fvs: Vec<bool> = comp.iter().map(|v| fvs.binary_search(v).is_ok()).collect();
    let mut placed = vec![false; k];
    let mut evicted = vec![false; k];
    let mut buffered = 0usize;
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, usize, usize)> = None;
        let mut ties: Vec<usize> = Vec::new();
        for j in 0..k {
            if placed[j] {
                continue;
            }
            let mut new_evictions = 0usize;
            let mut outside_fvs = 0usize;
            for o in 0..k {
                if !placed[o] && !evicted[o] && g.edge(comp[j], comp[o]) {
                    new_evictions += 1;
                    outside_fvs += usize::from(!in_fvs[o]);
                }
            }
            let peak = buffered + new_evictions;
            let after = peak - usize::from(evicted[j]);
            match best {
                Some(b) if (outside_fvs, peak, after) > b => {}
                Some(b) if (outside_fvs, peak, after) == b => ties.push(j),
                _ => {
                    best = Some((outside_fvs, peak, after));
                    ties.clear();
                    ties.push(j);
                }
            }
        }
        let j = *ties.choose(rng).unwrap();
        for o in 0..k {
            if !placed[o] && !evicted[o] && g.edge(comp[j], comp[o]) {
                evicted[o] = true;
                buffered += 1;
            }
        }
        if evicted[j] {
            buffered -= 1;
        }
        placed[j] = true;
        order.push(comp[j]);
    }
    order
}

/// Order minimizing the number of objects that ever visit a buffer: an exact
/// minimum feedback vertex set per component (randomized greedy beyond
/// [`EXACT_COMPONENT_LIMIT`]), then a dependency-respecting order that palaces
/// the feedback vertices last.
pub fn tbm(g: &DependencyGraph, rng: &mut impl Rng) -> OrderResult {
    let mut order = Vec::with_capacity(g.n());
    let mut fallback = false;
    for comp in g.components() {
        let fvs = if comp.len() <= EXACT_COMPONENT_LIMIT {
            min_fvs_exact(g, &comp)
        } else {
            fallback = true;
            greedy_fvs(g, &comp, rng)
        };
        order.extend(component_order_with_fvs(g, &comp, &fvs));
    }
    OrderResult { order: PlacementOrder::new(order), fallback }
}

/// Smallest vertex set whose removal leaves the component acyclic, found by
/// exhaustive search in increasing size.
fn min_fvs_exact(g: &DependencyGraph, comp: &[usize]) -> Vec<usize> {
    let k = comp.len();
    let out = local_out_masks(g, comp);
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    let acyclic = |removed: u32| -> bool {
        let mut kept = full & !removed;
        loop {
            let mut progressed = false;
            let mut m = kept;
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                if out[j] & kept == 0 {
                    kept &= !(1 << j);
                    progressed = true;
                }
            }
            if kept == 0 {
                return true;
            }
            if !progressed {
                return false;
            }
        }
    };
    for size in 0..=k as u32 {
        // Masks of the given popcount in increasing numeric order.
        let mut m: u32 = if size == 0 { 0 } else { (1 << size) - 1 };
        loop {
            if m & !full == 0 && acyclic(m) {
                return (0..k).filter(|&j| m & (1 << j) != 0).map(|j| comp[j]).collect();
            }
            if size == 0 || m >= full {
                break;
            }
            // Gosper's hack: next mask with the same popcount.
            let c = m & m.wrapping_neg();
            let r = m + c;
            m = (((r ^ m) >> 2) / c) | r;
        }
    }
    unreachable!("removing every vertex always leaves an acyclic graph");
}

fn greedy_fvs(g: &DependencyGraph, comp: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let k = comp.len();
    let mut kept = vec![true; k];
    let mut fvs = Vec::new();
    loop {
        // Strip vertices that cannot lie on a cycle.
        loop {
            let mut progressed = false;
            for j in 0..k {
                if !kept[j] {
                    continue;
                }
                let outd = (0..k).filter(|&o| kept[o] && g.edge(comp[j], comp[o])).count();
                let ind = (0..k).filter(|&i| kept[i] && g.edge(comp[i], comp[j])).count();
                if outd == 0 || ind == 0 {
                    kept[j] = false;
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        if kept.iter().all(|&x| !x) {
            fvs.sort_unstable();
            return fvs;
        }
        let mut best = 0usize;
        let mut ties: Vec<usize> = Vec::new();
        for j in 0..k {
            if !kept[j] {
                continue;
            }
            let outd = (0..k).filter(|&o| kept[o] && g.edge(comp[j], comp[o])).count();
            let ind = (0..k).filter(|&i| kept[i] && g.edge(comp[i], comp[j])).count();
            let score = outd * ind;
            if score > best {
                best = score;
                ties.clear();
            }
            if score == best {
                ties.push(j);
            }
        }
        let j = *ties.choose(rng).unwrap();
        kept[j] = false;
        fvs.push(comp[j]);
    }
}

/// Non-feedback vertices in an order where each object's blockers are placed
/// first (smallest id on ties), then the feedback vertices ascending.
fn component_order_with_fvs(g: &DependencyGraph, comp: &[usize], fvs: &[usize]) -> Vec<usize> {
    let k = comp.len();
    let in_fvs: Vec<bool> = comp.iter().map(|v| fvs.contains(v)).collect();
    let mut placed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    loop {
        let mut advanced = false;
        for j in 0..k {
            if placed[j] || in_fvs[j] {
                continue;
            }
            let ready = (0..k).all(|o| {
                !g.edge(comp[j], comp[o]) || placed[o] || in_fvs[o]
            });
            if ready {
                placed[j] = true;
                order.push(comp[j]);
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    let mut rest: Vec<usize> = fvs.to_vec();
    rest.sort_unstable();
    order.extend(rest);
    debug_assert_eq!(order.len(), k);
    order
}

/// Uniformly random placement order.
pub fn random_order(n: usize, rng: &mut impl Rng) -> PlacementOrder {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    PlacementOrder(order)
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut arr: Vec<usize> = (0..n).collect();
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    f(&arr);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                arr.swap(0, i);
            } else {
                arr.swap(c[i], i);
            }
            f(&arr);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Minimum running buffers over every placement order; test oracle for small
/// graphs.
pub fn brute_force_mrb(g: &DependencyGraph) -> Result<usize, TooLarge> {
    if g.n() > 8 {
        return Err(TooLarge(g.n()));
    }
    let mut best = usize::MAX;
    for_each_permutation(g.n(), |perm| {
        let plan = derive_plan(&PlacementOrder(perm.to_vec()), g);
        best = best.min(plan.running_buffers);
    });
    Ok(best)
}

/// Minimum total buffers over every placement order; test oracle for small
/// graphs.
pub fn brute_force_tbm(g: &DependencyGraph) -> Result<usize, TooLarge> {
    if g.n() > 8 {
        return Err(TooLarge(g.n()));
    }
    let mut best = usize::MAX;
    for_each_permutation(g.n(), |perm| {
        let plan = derive_plan(&PlacementOrder(perm.to_vec()), g);
        best = best.min(plan.total_buffers);
    });
    Ok(best)
}

/// One abstract step of an unlabeled fill plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillStep {
    /// Object leaves its start pose for a buffer.
    Evict { object: usize },
    /// Object fills the goal pose of `goal_of` (its own or another's).
    Place { object: usize, goal_of: usize, from_buffer: bool },
}

/// Plan filling every goal pose of one component with some same-shaped
/// object, minimizing concurrently buffered objects.
#[derive(Debug, Clone)]
pub struct UnlabeledFill {
    pub steps: Vec<FillStep>,
    /// (object, goal owner) pairs; a bijection over the component.
    pub assignment: Vec<(usize, usize)>,
    pub running_buffers: usize,
}

/// Solves the unlabeled subproblem for one component: goals are filled one by
/// one, the filler chosen per goal. Dependency edges double as the blocking
/// relation (`edge(i, o)` means `o`'s start blocks `i`'s goal pose), except
/// on the diagonal: the graph has no self edges, yet an owner overlapping its
/// own goal blocks any other filler, so `self_block` supplies that term per
/// component member. Guided by a subset table over filled-goal sets when the
/// component is small and uniformly shaped; pure greedy otherwise.
pub fn unlabeled_fill(
    g: &DependencyGraph,
    comp: &[usize],
    self_block: &[bool],
    shapes_equal: bool,
    compat: impl Fn(usize, usize) -> bool,
) -> UnlabeledFill {
    let k = comp.len();
    // block[gi][o] = object o's start blocks goal gi (both component-local).
    let block: Vec<Vec<bool>> = comp
        .iter()
        .enumerate()
        .map(|(gi, &owner)| {
            comp.iter()
                .enumerate()
                .map(|(o, &obj)| if o == gi { self_block[gi] } else { g.edge(owner, obj) })
                .collect()
        })
        .collect();
    let guide = if shapes_equal && k <= EXACT_COMPONENT_LIMIT {
        let masks: Vec<u32> = block
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold(0u32, |m, (lo, &b)| if b { m | (1 << lo) } else { m })
            })
            .collect();
        Some(fill_guide(&masks, k))
    } else {
        None
    };

    let mut moved = vec![false; k];
    let mut buffered = vec![false; k];
    let mut filled = vec![false; k];
    let mut buf_count = 0usize;
    let mut running = 0usize;
    let mut steps = Vec::new();
    let mut assignment = Vec::with_capacity(k);
    let mut filled_mask = 0u32;

    for _ in 0..k {
        let mut best: Option<(usize, (usize, usize, usize, usize))> = None;
        for gi in 0..k {
            if filled[gi] {
                continue;
            }
            let Some((_, evict_count, peak, from_buf)) = fill_choice(
                gi, &block, &moved, &buffered, buf_count, comp, &compat,
            ) else {
                continue;
            };
            let guided = match &guide {
                Some(h) => peak.max(h[(filled_mask | (1 << gi)) as usize] as usize),
                None => peak,
            };
            // Equal-cost goals drain a buffered object first: the longer one
            // sits, the more filled poses its buffer has to dodge.
            let key = (guided, peak, evict_count, usize::from(!from_buf));
            if best.map_or(true, |(_, bk)| key < bk) {
                best = Some((gi, key));
            }
        }
        let gi = best.expect("some goal is always fillable").0;
        let (filler, _, _, _) =
            fill_choice(gi, &block, &moved, &buffered, buf_count, comp, &compat).unwrap();
        // Evict the remaining unmoved blockers, then place the filler.
        for o in 0..k {
            if block[gi][o] && !moved[o] && o != filler {
                steps.push(FillStep::Evict { object: comp[o] });
                moved[o] = true;
                buffered[o] = true;
                buf_count += 1;
                running = running.max(buf_count);
            }
        }
        let from_buffer = buffered[filler];
        steps.push(FillStep::Place { object: comp[filler], goal_of: comp[gi], from_buffer });
        if from_buffer {
            buffered[filler] = false;
            buf_count -= 1;
        }
        moved[filler] = true;
        filled[gi] = true;
        if guide.is_some() {
            filled_mask |= 1 << gi;
        }
        assignment.push((comp[filler], comp[gi]));
    }
    UnlabeledFill { steps, assignment, running_buffers: running }
}

/// Picks the filler for goal `gi`: an unmoved blocker of the goal first (it
/// absorbs one of the goal's own evictions), then a buffered object (so
/// buffers drain rather than sit), then a fresh object. Labels never enter
/// the choice. Returns `(filler local index, evictions, step peak,
/// fills from buffer)`.
fn fill_choice(
    gi: usize,
    block: &[Vec<bool>],
    moved: &[bool],
    buffered: &[bool],
    buf_count: usize,
    comp: &[usize],
    compat: &impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize, usize, bool)> {
    let k = comp.len();
    let z: Vec<usize> = (0..k).filter(|&o| block[gi][o] && !moved[o]).collect();
    let owner = comp[gi];
    if let Some(&f) = z.iter().find(|&&o| compat(comp[o], owner)) {
        return Some((f, z.len() - 1, buf_count + z.len() - 1, false));
    }
    if let Some(f) = (0..k).find(|&o| buffered[o] && compat(comp[o], owner)) {
        return Some((f, z.len(), buf_count + z.len(), true));
    }
    (0..k)
        .find(|&o| !moved[o] && !buffered[o] && compat(comp[o], owner))
        .map(|f| (f, z.len(), buf_count + z.len(), false))
}

// Subset table over filled-goal sets: optimistic completion peaks using a
// floor-clamped buffered-count estimate. Guides goal selection; the true
// state replay above computes the real peaks.
fn fill_guide(block: &[u32], k: usize) -> Vec<u8> {
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    let size = 1usize << k;
    let mut blocked_union = vec![0u32; size];
    for mask in 1..size as u32 {
        let j = mask.trailing_zeros() as usize;
        let prev = mask & (mask - 1);
        blocked_union[mask as usize] = blocked_union[prev as usize] | block[j];
    }
    let mut h = vec![0u8; size];
    for mask in (0..full).rev() {
        let displaced = blocked_union[mask as usize];
        let buffered =
            (displaced.count_ones() as usize).saturating_sub(mask.count_ones() as usize);
        let mut best = u8::MAX;
        for gi in 0..k {
            if mask & (1 << gi) != 0 {
                continue;
            }
            let z = (block[gi] & !displaced & !(1 << gi)).count_ones() as usize
                + usize::from(block[gi] & !displaced & (1 << gi) != 0);
            let peak = buffered + z.saturating_sub(1);
            let v = (peak as u8).max(h[(mask | (1 << gi)) as usize]);
            best = best.min(v);
        }
        h[mask as usize] = best;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn three_cycle() -> DependencyGraph {
        DependencyGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)])
    }

    fn k3() -> DependencyGraph {
        DependencyGraph::from_edges(3, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)])
    }

    #[test]
    fn derive_three_cycle_orders() {
        let g = three_cycle();
        // Placing 2 before 1 frees 1's goal cell, so only 1 is ever evicted.
        let plan = derive_plan(&PlacementOrder::new(vec![0, 2, 1]), &g);
        let kinds: Vec<(usize, ActionKind)> =
            plan.actions.iter().map(|a| (a.object, a.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (1, ActionKind::SB),
                (0, ActionKind::SG),
                (2, ActionKind::SG),
                (1, ActionKind::BG),
            ]
        );
        assert_eq!(plan.total_buffers, 1);
        assert_eq!(plan.running_buffers, 1);

        // Id order must clear 2 out of 1's way first: one more eviction,
        // and both buffers are occupied at once.
        let plan = derive_plan(&PlacementOrder::new(vec![0, 1, 2]), &g);
        let kinds: Vec<(usize, ActionKind)> =
            plan.actions.iter().map(|a| (a.object, a.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (1, ActionKind::SB),
                (0, ActionKind::SG),
                (2, ActionKind::SB),
                (1, ActionKind::BG),
                (2, ActionKind::BG),
            ]
        );
        assert_eq!(plan.total_buffers, 2);
        assert_eq!(plan.running_buffers, 2);
    }

    #[test]
    fn derive_matches_two_buffer_trace() {
        // Objects 0 and 2 both block object 1's target; 1 blocks 0's.
        let g = DependencyGraph::from_edges(3, &[(1, 0), (1, 2), (0, 1)]);
        let plan = derive_plan(&PlacementOrder::new(vec![1, 0, 2]), &g);
        let kinds: Vec<(usize, ActionKind)> =
            plan.actions.iter().map(|a| (a.object, a.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (0, ActionKind::SB),
                (2, ActionKind::SB),
                (1, ActionKind::SG),
                (0, ActionKind::BG),
                (2, ActionKind::BG),
            ]
        );
        assert_eq!(plan.running_buffers, 2);
    }

    #[test]
    fn rbm_on_cycle_and_clique() {
        let plan = derive_plan(&rbm(&three_cycle(), &mut rng(0)).order, &three_cycle());
        assert_eq!(plan.running_buffers, 1);
        let plan = derive_plan(&rbm(&k3(), &mut rng(0)).order, &k3());
        assert_eq!(plan.running_buffers, 2);
    }

    #[test]
    fn monotone_graph_needs_no_buffers() {
        let g = DependencyGraph::from_edges(4, &[(1, 0), (2, 1), (3, 2)]);
        let plan = derive_plan(&rbm(&g, &mut rng(0)).order, &g);
        assert_eq!(plan.running_buffers, 0);
        assert_eq!(plan.actions.len(), 4);
        assert!(plan.actions.iter().all(|a| a.kind == ActionKind::SG));
    }

    #[test]
    fn tbm_evicts_a_minimum_feedback_set() {
        let plan = derive_plan(&tbm(&three_cycle(), &mut rng(0)).order, &three_cycle());
        assert_eq!(plan.total_buffers, 1);
        let plan = derive_plan(&tbm(&k3(), &mut rng(0)).order, &k3());
        assert_eq!(plan.total_buffers, 2);
    }

    #[test]
    fn brute_force_limits() {
        assert!(brute_force_mrb(&DependencyGraph::from_edges(9, &[])).is_err());
        assert_eq!(brute_force_mrb(&three_cycle()).unwrap(), 1);
        assert_eq!(brute_force_mrb(&k3()).unwrap(), 2);
        assert_eq!(brute_force_tbm(&three_cycle()).unwrap(), 1);
        assert_eq!(brute_force_tbm(&k3()).unwrap(), 2);
    }

    #[test]
    fn exact_rbm_matches_brute_force_on_random_graphs() {
        let mut r = rng(17);
        for case in 0..200 {
            let n = 2 + case % 7;
            let p = 0.1 + 0.1 * ((case / 7) % 7) as f64;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && r.gen_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
            let g = DependencyGraph::from_edges(n, &edges);
            let got = derive_plan(&rbm(&g, &mut r).order, &g).running_buffers;
            assert_eq!(got, brute_force_mrb(&g).unwrap(), "graph edges {edges:?}");
        }
    }

    #[test]
    fn exact_rbm_breaks_ties_lexicographically() {
        // Both [0, 2, 1] style orders and others reach the optimum here; the
        // reconstruction must scan ids ascending.
        let g = DependencyGraph::from_edges(3, &[]);
        let res = rbm(&g, &mut rng(0));
        assert_eq!(res.order.as_slice(), &[0, 1, 2]);
        assert!(!res.fallback);
    }

    #[test]
    fn random_order_is_uniform() {
        let mut r = rng(5);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..6000 {
            let o = random_order(3, &mut r);
            *counts.entry(o.as_slice().to_vec()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            assert!((850..=1150).contains(&c));
        }
    }

    #[test]
    fn unlabeled_fill_on_clique_uses_one_buffer() {
        let g = k3();
        let fill = unlabeled_fill(&g, &[0, 1, 2], &[false; 3], true, |_, _| true);
        assert_eq!(fill.running_buffers, 1);
        assert_eq!(fill.assignment.len(), 3);
        let mut objs: Vec<usize> = fill.assignment.iter().map(|&(o, _)| o).collect();
        let mut goals: Vec<usize> = fill.assignment.iter().map(|&(_, g)| g).collect();
        objs.sort_unstable();
        goals.sort_unstable();
        assert_eq!(objs, vec![0, 1, 2]);
        assert_eq!(goals, vec![0, 1, 2]);
        // One eviction, three placements.
        let evictions = fill
            .steps
            .iter()
            .filter(|s| matches!(s, FillStep::Evict { .. }))
            .count();
        assert_eq!(evictions, 1);
    }

    #[test]
    fn unlabeled_fill_greedy_path_matches_on_large_flag() {
        let g = k3();
        // Forcing the greedy path (shapes flagged unequal) still fills all goals.
        let fill = unlabeled_fill(&g, &[0, 1, 2], &[false; 3], false, |_, _| true);
        assert_eq!(fill.assignment.len(), 3);
        assert!(fill.running_buffers <= 2);
    }
}
