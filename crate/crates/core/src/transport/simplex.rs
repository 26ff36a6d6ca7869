//! Primal network simplex for the balanced transportation problem on an
//! implicit complete bipartite graph.
//!
//! Sources `0..m` carry supplies, sinks `0..n` demands; arc costs come from
//! a cost oracle so no per-arc storage is needed (the pricing loop touches
//! `m*n` implicit arcs, state is `O(m+n)`). Pivoting uses block search over
//! the arc ids with a rotating cursor; the basis is the classic spanning
//! tree with parent/child links, and potentials are patched by a constant
//! shift on the re-hung subtree at each pivot.

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Outcome of a solve: basic flows plus dual potentials.
pub struct SimplexSolution {
    /// `(source, sink, mass)` for every basic arc with positive mass.
    pub flows: Vec<(u32, u32, f64)>,
    pub source_pot: Vec<f64>,
    pub sink_pot: Vec<f64>,
    pub pivots: usize,
}

struct Basis {
    m: usize,
    n: usize,
    parent: Vec<u32>,
    /// flow on the tree arc between `v` and `parent[v]`
    flow_up: Vec<f64>,
    pot: Vec<f64>,
    depth: Vec<u32>,
    first_child: Vec<u32>,
    next_sib: Vec<u32>,
    prev_sib: Vec<u32>,
}

impl Basis {
    fn node_count(&self) -> usize {
        self.m + self.n
    }

    fn attach(&mut self, child: u32, parent: u32) {
        self.parent[child as usize] = parent;
        let head = self.first_child[parent as usize];
        self.next_sib[child as usize] = head;
        self.prev_sib[child as usize] = NONE;
        if head != NONE {
            self.prev_sib[head as usize] = child;
        }
        self.first_child[parent as usize] = child;
    }

    fn detach(&mut self, child: u32) {
        let p = self.parent[child as usize];
        let prev = self.prev_sib[child as usize];
        let next = self.next_sib[child as usize];
        if prev != NONE {
            self.next_sib[prev as usize] = next;
        } else {
            self.first_child[p as usize] = next;
        }
        if next != NONE {
            self.prev_sib[next as usize] = prev;
        }
        self.parent[child as usize] = NONE;
    }

    /// Reverse parent pointers along `path[0] -> path[last]` (an ancestor
    /// chain whose last node has already been cut from its parent), making
    /// `path[0]` the root of the component and carrying tree-arc flows to
    /// their new owners.
    fn reroot_along(&mut self, path: &[u32]) {
        for w in path.windows(2) {
            debug_assert_eq!(self.parent[w[0] as usize], w[1]);
            self.detach(w[0]);
        }
        // the arc between path[k] and path[k+1] was owned by path[k]; after
        // reversal it is owned by path[k+1]
        for k in (0..path.len() - 1).rev() {
            self.flow_up[path[k + 1] as usize] = self.flow_up[path[k] as usize];
        }
        for w in path.windows(2) {
            self.attach(w[1], w[0]);
        }
    }

    /// Iterative traversal of the subtree rooted at `root`, applying `f`.
    fn for_subtree<F: FnMut(&mut Basis, u32)>(&mut self, root: u32, mut f: F) {
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            f(self, v);
            let mut c = self.first_child[v as usize];
            while c != NONE {
                stack.push(c);
                c = self.next_sib[c as usize];
            }
        }
    }
}

/// Pricing strategy for the entering-arc search.
#[derive(Debug, Clone, Copy)]
pub enum Pricing {
    /// Block search over all `m*n` arcs.
    Full,
    /// Block search over the `k` cheapest sinks per source, with full
    /// verification sweeps between rounds. Exactness is unaffected: the
    /// solver only terminates on a clean full sweep.
    Neighbors { k: usize },
}

/// Solve the transportation problem. `supplies` and `demands` must balance
/// within 1e-12 (they are renormalized internally to an exact balance).
///
/// `max_pivots` guards non-termination; a typical instance needs a small
/// multiple of `m+n` pivots.
pub fn solve_transport<C: Fn(usize, usize) -> f64>(
    supplies: &[f64],
    demands: &[f64],
    cost: C,
    max_pivots: usize,
) -> Result<SimplexSolution> {
    let arcs = supplies.len() * demands.len();
    let pricing =
        if arcs > 1 << 20 { Pricing::Neighbors { k: 32 } } else { Pricing::Full };
    solve_transport_with(supplies, demands, cost, max_pivots, pricing)
}

/// [`solve_transport`] with an explicit pricing strategy.
pub fn solve_transport_with<C: Fn(usize, usize) -> f64>(
    supplies: &[f64],
    demands: &[f64],
    cost: C,
    max_pivots: usize,
    pricing: Pricing,
) -> Result<SimplexSolution> {
    let m = supplies.len();
    let n = demands.len();
    assert!(m > 0 && n > 0, "empty instance");
    let sum_a: f64 = supplies.iter().sum();
    let sum_b: f64 = demands.iter().sum();
    if (sum_a - sum_b).abs() > 1e-12 * sum_a.max(sum_b).max(1.0) {
        return Err(Error::Infeasible((sum_a - sum_b).abs()));
    }
    // exact balance for the staircase construction
    let scale = sum_a / sum_b;
    let b: Vec<f64> = demands.iter().map(|v| v * scale).collect();
    let a: Vec<f64> = supplies.to_vec();

    let mut basis = northwest_basis(&a, &b);
    init_potentials(&mut basis, &cost);

    let tol = 1e-14;
    let mut pivots = 0usize;

    // local arc pool: either everything or the k cheapest sinks per source
    let local: Vec<u32> = match pricing {
        Pricing::Full => Vec::new(),
        Pricing::Neighbors { k } => nearest_sinks(m, n, &cost, k.min(n)),
    };
    let local_per_source = match pricing {
        Pricing::Full => n,
        Pricing::Neighbors { k } => k.min(n),
    };
    let local_count = m * local_per_source;
    let block = ((local_count as f64).sqrt() as usize).max(64).min(local_count);
    let lookup = |a_idx: usize| -> (usize, usize) {
        let i = a_idx / local_per_source;
        let j = match pricing {
            Pricing::Full => a_idx % local_per_source,
            Pricing::Neighbors { .. } => local[a_idx] as usize,
        };
        (i, j)
    };

    let mut cursor = 0usize;
    let mut sweep_candidates: Vec<(u32, u32)> = Vec::new();
    loop {
        // phase 1: block search over the local pool until locally optimal
        loop {
            let mut entering: Option<(usize, usize, f64)> = None;
            let mut scanned = 0usize;
            while scanned < local_count {
                let mut best_rc = -tol;
                let mut best: Option<(usize, usize)> = None;
                let upto = block.min(local_count - scanned);
                for _ in 0..upto {
                    let (i, j) = lookup(cursor);
                    let rc = cost(i, j) - basis.pot[i] - basis.pot[m + j];
                    if rc < best_rc {
                        best_rc = rc;
                        best = Some((i, j));
                    }
                    cursor += 1;
                    if cursor == local_count {
                        cursor = 0;
                    }
                }
                scanned += upto;
                if let Some((i, j)) = best {
                    entering = Some((i, j, best_rc));
                    break;
                }
            }
            let Some((ei, ej, rc)) = entering else {
                break;
            };
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::SimplexStalled);
            }
            pivot(&mut basis, ei, ej, rc);
        }

        if matches!(pricing, Pricing::Full) {
            break; // the local pool was already everything
        }

        // phase 2: full verification sweep, collecting straggler candidates
        sweep_candidates.clear();
        for i in 0..m {
            let pot_i = basis.pot[i];
            for j in 0..n {
                if cost(i, j) - pot_i - basis.pot[m + j] < -tol {
                    sweep_candidates.push((i as u32, j as u32));
                    if sweep_candidates.len() >= 8192 {
                        break;
                    }
                }
            }
            if sweep_candidates.len() >= 8192 {
                break;
            }
        }
        if sweep_candidates.is_empty() {
            break; // clean full sweep: certified optimal
        }
        // drain: repeatedly pivot the best revalidated candidate
        loop {
            let mut best_rc = -tol;
            let mut best: Option<(usize, usize)> = None;
            for &(i, j) in &sweep_candidates {
                let (i, j) = (i as usize, j as usize);
                let rc = cost(i, j) - basis.pot[i] - basis.pot[m + j];
                if rc < best_rc {
                    best_rc = rc;
                    best = Some((i, j));
                }
            }
            let Some((ei, ej)) = best else {
                break;
            };
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::SimplexStalled);
            }
            pivot(&mut basis, ei, ej, best_rc);
        }
    }

    let mut flows = Vec::new();
    for v in 0..basis.node_count() {
        let p = basis.parent[v];
        if p == NONE {
            continue;
        }
        let f = basis.flow_up[v];
        if f > 0.0 {
            let (src, snk) = if v < m { (v as u32, p - m as u32) } else { (p, v as u32 - m as u32) };
            flows.push((src, snk, f));
        }
    }
    flows.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    Ok(SimplexSolution {
        flows,
        source_pot: basis.pot[..m].to_vec(),
        sink_pot: basis.pot[m..].to_vec(),
        pivots,
    })
}

/// For each source, the `k` sinks with smallest cost, as a flat `m*k` list.
fn nearest_sinks<C: Fn(usize, usize) -> f64>(m: usize, n: usize, cost: &C, k: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(m * k);
    let mut buf: Vec<(f64, u32)> = Vec::with_capacity(n);
    for i in 0..m {
        buf.clear();
        buf.extend((0..n).map(|j| (cost(i, j), j as u32)));
        buf.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
        out.extend(buf[..k].iter().map(|&(_, j)| j));
    }
    out
}

/// Staircase (northwest corner) initial basis: exactly `m+n-1` arcs forming
/// a path in the bipartite node order, degenerate zeros allowed.
fn northwest_basis(a: &[f64], b: &[f64]) -> Basis {
    let m = a.len();
    let n = b.len();
    let total = m + n;
    let mut basis = Basis {
        m,
        n,
        parent: vec![NONE; total],
        flow_up: vec![0.0; total],
        pot: vec![0.0; total],
        depth: vec![0; total],
        first_child: vec![NONE; total],
        next_sib: vec![NONE; total],
        prev_sib: vec![NONE; total],
    };
    // walk the staircase; arcs (i, j) in visiting order form a path, so each
    // new arc attaches the next node to the path head
    let mut i = 0usize;
    let mut j = 0usize;
    let mut rem_a = a[0];
    let mut rem_b = b[0];
    // the first node of the path is source 0 (the root)
    let mut attached_i = vec![false; m];
    let mut attached_j = vec![false; n];
    attached_i[0] = true;
    loop {
        let f = rem_a.min(rem_b);
        let (src, snk) = (i as u32, (m + j) as u32);
        if !attached_j[j] {
            basis.attach(snk, src);
            basis.flow_up[snk as usize] = f;
            attached_j[j] = true;
        } else if !attached_i[i] {
            basis.attach(src, snk);
            basis.flow_up[src as usize] = f;
            attached_i[i] = true;
        }
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (rem_a < rem_b || j == n - 1) && i < m - 1 {
            rem_b -= rem_a;
            i += 1;
            rem_a = a[i];
        } else {
            rem_a -= rem_b;
            j += 1;
            rem_b = b[j];
        }
    }
    // depths from the root
    basis.depth[0] = 0;
    let mut stack = vec![0u32];
    while let Some(v) = stack.pop() {
        let mut c = basis.first_child[v as usize];
        while c != NONE {
            basis.depth[c as usize] = basis.depth[v as usize] + 1;
            stack.push(c);
            c = basis.next_sib[c as usize];
        }
    }
    basis
}

fn init_potentials<C: Fn(usize, usize) -> f64>(basis: &mut Basis, cost: &C) {
    let m = basis.m;
    basis.pot[0] = 0.0;
    let mut stack = vec![0u32];
    while let Some(v) = stack.pop() {
        let mut c = basis.first_child[v as usize];
        while c != NONE {
            let (i, j) = arc_of(m, v, c);
            basis.pot[c as usize] = cost(i, j) - basis.pot[v as usize];
            stack.push(c);
            c = basis.next_sib[c as usize];
        }
    }
}

fn arc_of(m: usize, x: u32, y: u32) -> (usize, usize) {
    if (x as usize) < m {
        (x as usize, y as usize - m)
    } else {
        (y as usize, x as usize - m)
    }
}

/// One simplex pivot with entering arc `(ei, ej)` of reduced cost `rc < 0`.
fn pivot(basis: &mut Basis, ei: usize, ej: usize, rc: f64) {
    let m = basis.m;
    let u = ei as u32;
    let v = (m + ej) as u32;

    // collect paths from both endpoints up to the least common ancestor
    let mut path_u = vec![u];
    let mut path_v = vec![v];
    {
        let mut x = u;
        let mut y = v;
        while basis.depth[x as usize] > basis.depth[y as usize] {
            x = basis.parent[x as usize];
            path_u.push(x);
        }
        while basis.depth[y as usize] > basis.depth[x as usize] {
            y = basis.parent[y as usize];
            path_v.push(y);
        }
        while x != y {
            x = basis.parent[x as usize];
            y = basis.parent[y as usize];
            path_u.push(x);
            path_v.push(y);
        }
        // both now include the LCA as last element
    }

    // arcs on the cycle alternate -delta, +delta starting from each endpoint;
    // the "minus" arcs sit at even positions along both paths
    let mut delta = f64::INFINITY;
    let mut leave: (bool, usize) = (true, 0); // (on u-side, arc index)
    for side in [true, false] {
        let path = if side { &path_u } else { &path_v };
        for k in (0..path.len() - 1).step_by(2) {
            let f = basis.flow_up[path[k] as usize];
            if f < delta {
                delta = f;
                leave = (side, k);
            }
        }
    }

    // apply flow update around the cycle
    for side in [true, false] {
        let path = if side { &path_u } else { &path_v };
        for k in 0..path.len() - 1 {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            basis.flow_up[path[k] as usize] += sign * delta;
        }
    }

    // basis exchange: cut the leaving arc, re-root the cut component at the
    // entering endpoint on that side, and hang it on the other endpoint
    let (on_u_side, k) = leave;
    let (path, enter_node, other_node) =
        if on_u_side { (&path_u, u, v) } else { (&path_v, v, u) };
    let cut_child = path[k];

    basis.detach(cut_child);
    basis.reroot_along(&path[..=k]);
    basis.attach(enter_node, other_node);
    basis.flow_up[enter_node as usize] = delta;

    // potentials in the re-hung component shift by a constant: +rc on the
    // entering endpoint's bipartite side, -rc on the other side
    let enter_is_source = (enter_node as usize) < m;
    let base_depth = basis.depth[other_node as usize] + 1;
    basis.for_subtree(enter_node, |b, w| {
        let w_is_source = (w as usize) < m;
        b.pot[w as usize] += if w_is_source == enter_is_source { rc } else { -rc };
    });
    // recompute depths in the re-hung component
    basis.depth[enter_node as usize] = base_depth;
    let mut stack = vec![enter_node];
    while let Some(x) = stack.pop() {
        let mut c = basis.first_child[x as usize];
        while c != NONE {
            basis.depth[c as usize] = basis.depth[x as usize] + 1;
            stack.push(c);
            c = basis.next_sib[c as usize];
        }
    }
}
