//! Dependency graph between two arrangements: edge `i -> j` means object
//! `j`'s current pose blocks object `i`'s target pose, so `j` must move
//! before `i` can be placed.

use crate::geometry::{collides, CheckCounter};
use crate::model::{Arrangement, Instance};

#[derive(Debug, Clone)]
pub struct DependencyGraph {
    n: usize,
    adj: Vec<bool>,
}

impl DependencyGraph {
    /// Pairwise collision test of every target pose against every other
    /// object's current pose: at most `n (n - 1)` checks.
    pub fn build(
        from: &Arrangement,
        to: &Arrangement,
        inst: &Instance,
        counter: &CheckCounter,
    ) -> Self {
        let n = inst.n();
        let mut adj = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    adj[i * n + j] = collides(
                        inst.shape(i),
                        &to.pose(i),
                        inst.shape(j),
                        &from.pose(j),
                        counter,
                    );
                }
            }
        }
        DependencyGraph { n, adj }
    }

    /// Graph with explicit edges, for tests and analysis.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![false; n * n];
        for &(i, j) in edges {
            assert!(i != j && i < n && j < n, "edge ({i}, {j}) out of range");
            adj[i * n + j] = true;
        }
        DependencyGraph { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.edge(i, j))
    }

    pub fn in_degree(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.edge(i, j)).count()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors(i).count()
    }

    /// True iff the graph is acyclic, i.e. the instance is monotone.
    pub fn is_monotone(&self) -> bool {
        self.scc().iter().all(|c| c.len() == 1)
    }

    /// Weakly connected components, each sorted ascending, ordered by their
    /// smallest contained id.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for u in 0..self.n {
                    if comp[u] == usize::MAX && (self.edge(v, u) || self.edge(u, v)) {
                        comp[u] = id;
                        members.push(u);
                        stack.push(u);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Strongly connected components in topological order of the
    /// condensation, each sorted ascending.
    pub fn scc(&self) -> Vec<Vec<usize>> {
        // Iterative Tarjan; emits components sinks-first, so reverse at the end.
        const UNSET: usize = usize::MAX;
        let n = self.n;
        let mut index = vec![UNSET; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut next_index = 0usize;
        let mut comps: Vec<Vec<usize>> = Vec::new();
        // (vertex, next out-neighbor to try)
        let mut work: Vec<(usize, usize)> = Vec::new();
        for root in 0..n {
            if index[root] != UNSET {
                continue;
            }
            work.push((root, 0));
            while let Some(&mut (v, ref mut next)) = work.last_mut() {
                if *next == 0 {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                }
                let mut descended = false;
                while *next < n {
                    let u = *next;
                    *next += 1;
                    if !self.edge(v, u) {
                        continue;
                    }
                    if index[u] == UNSET {
                        work.push((u, 0));
                        descended = true;
                        break;
                    } else if on_stack[u] {
                        low[v] = low[v].min(index[u]);
                    }
                }
                if descended {
                    continue;
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
                work.pop();
                if let Some(&mut (parent, _)) = work.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
        comps.reverse();
        comps
    }

    /// Graphviz dump for debugging.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph deps {\n");
        for i in 0..self.n {
            s.push_str(&format!("  {i};\n"));
        }
        for i in 0..self.n {
            for j in 0..self.n {
                if self.edge(i, j) {
                    s.push_str(&format!("  {i} -> {j};\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}
