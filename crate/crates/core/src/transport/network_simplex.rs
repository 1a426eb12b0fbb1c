//! Primal network simplex for the balanced transportation problem.
//!
//! Solves `min sum_ij plan[i][j] * cost[i][j]` subject to row sums `mu` and
//! column sums `nu` (both strictly positive, equal total mass). The algorithm
//! is the classic spanning-tree simplex with a block-search pivot rule and an
//! artificial root node, the same formulation used by the LEMON solver family;
//! the tree bookkeeping here is the plain parent/depth representation, which
//! keeps every pivot O(nodes) — ample for the instance sizes this crate
//! solves on the general (non-assignment) path.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const STATE_TREE: u8 = 0;
const STATE_LOWER: u8 = 1;

/// Arc orientation relative to the spanning tree: the predecessor arc of a
/// node either points from the node to its parent (up) or the reverse.
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;

#[derive(Debug, Clone)]
pub struct FlowResult {
    /// Sparse optimal plan as `(row, col, mass)` with positive mass.
    pub plan: Vec<(usize, usize, f64)>,
    /// Optimal objective value.
    pub total_cost: f64,
    /// Simplex pivots performed.
    pub pivots: usize,
}

struct Simplex<'a> {
    n1: usize,
    n2: usize,
    cost: &'a Matrix,
    node_num: usize,
    arc_num: usize,
    art_cost: f64,
    // Per-arc state. Real arcs are `i * n2 + j`; artificial arcs follow,
    // one per non-root node.
    flow: Vec<f64>,
    state: Vec<u8>,
    // Per-node tree structure.
    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    depth: Vec<u32>,
    // Pivot scan position.
    next_arc: usize,
    block_size: usize,
    epsilon: f64,
    // Scratch buffers for the subtree walk, reused across pivots.
    child_offset: Vec<usize>,
    child_list: Vec<usize>,
    stack: Vec<usize>,
}

impl<'a> Simplex<'a> {
    fn arc_source(&self, a: usize) -> usize {
        if a < self.n1 * self.n2 {
            a / self.n2
        } else {
            let u = a - self.n1 * self.n2;
            // Artificial arc of node u: sources point up to the root,
            // demand nodes hang below it.
            if u < self.n1 {
                u
            } else {
                self.node_num - 1
            }
        }
    }

    fn arc_target(&self, a: usize) -> usize {
        if a < self.n1 * self.n2 {
            self.n1 + (a % self.n2)
        } else {
            let u = a - self.n1 * self.n2;
            if u < self.n1 {
                self.node_num - 1
            } else {
                u
            }
        }
    }

    fn arc_cost(&self, a: usize) -> f64 {
        if a < self.n1 * self.n2 {
            self.cost.get(a / self.n2, a % self.n2)
        } else {
            self.art_cost
        }
    }

    fn reduced_cost(&self, a: usize) -> f64 {
        self.arc_cost(a) + self.pi[self.arc_source(a)] - self.pi[self.arc_target(a)]
    }

    fn find_entering(&mut self) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut best_rc = -self.epsilon;
        let mut remaining = self.arc_num;
        let mut in_block = self.block_size;
        let mut a = self.next_arc;
        while remaining > 0 {
            if self.state[a] == STATE_LOWER {
                let rc = self.reduced_cost(a);
                if rc < best_rc {
                    best_rc = rc;
                    best = Some(a);
                }
            }
            a += 1;
            if a == self.arc_num {
                a = 0;
            }
            remaining -= 1;
            in_block -= 1;
            if in_block == 0 {
                if best.is_some() {
                    break;
                }
                in_block = self.block_size;
            }
        }
        if best.is_some() {
            self.next_arc = a;
        }
        best
    }

    /// One simplex pivot on the entering arc. Returns an error when the
    /// cycle carries no opposing arc, which cannot happen on a bounded
    /// transportation polytope and would indicate a numerical breakdown.
    fn pivot(&mut self, entering: usize) -> Result<()> {
        let s = self.arc_source(entering);
        let t = self.arc_target(entering);

        // Apex of the cycle formed by the entering arc.
        let join = {
            let (mut a, mut b) = (s, t);
            while a != b {
                if self.depth[a] >= self.depth[b] {
                    a = self.parent[a];
                } else {
                    b = self.parent[b];
                }
            }
            a
        };

        // Pushing mass s -> t through the entering arc sends the return flow
        // t -> join -> s. Arcs opposing that direction bound the push.
        let mut delta = f64::INFINITY;
        let mut out_node = usize::MAX;
        let mut out_on_source_side = false;
        let mut u = s;
        while u != join {
            if self.pred_dir[u] == DIR_UP && self.flow[self.pred[u]] < delta {
                delta = self.flow[self.pred[u]];
                out_node = u;
                out_on_source_side = true;
            }
            u = self.parent[u];
        }
        let mut u = t;
        while u != join {
            if self.pred_dir[u] == DIR_DOWN && self.flow[self.pred[u]] <= delta {
                delta = self.flow[self.pred[u]];
                out_node = u;
                out_on_source_side = false;
            }
            u = self.parent[u];
        }
        if out_node == usize::MAX {
            return Err(Error::Numerical(
                "network simplex: unbounded pivot cycle".into(),
            ));
        }

        // Apply the flow change around the cycle.
        if delta > 0.0 {
            self.flow[entering] += delta;
            let mut u = s;
            while u != join {
                let arc = self.pred[u];
                self.flow[arc] += if self.pred_dir[u] == DIR_UP { -delta } else { delta };
                u = self.parent[u];
            }
            let mut u = t;
            while u != join {
                let arc = self.pred[u];
                self.flow[arc] += if self.pred_dir[u] == DIR_UP { delta } else { -delta };
                u = self.parent[u];
            }
        }

        let leaving = self.pred[out_node];
        self.flow[leaving] = 0.0;
        self.state[leaving] = STATE_LOWER;
        self.state[entering] = STATE_TREE;

        // Re-hang the detached subtree from the entering arc: reverse parent
        // pointers from the entering endpoint inside the subtree up to the
        // detachment point.
        let q = if out_on_source_side { s } else { t };
        let mut path = Vec::new();
        let mut w = q;
        loop {
            path.push(w);
            if w == out_node {
                break;
            }
            w = self.parent[w];
        }
        for k in (1..path.len()).rev() {
            let upper = path[k];
            let lower = path[k - 1];
            self.parent[upper] = lower;
            self.pred[upper] = self.pred[lower];
            self.pred_dir[upper] = -self.pred_dir[lower];
        }
        let r = if out_on_source_side { t } else { s };
        self.parent[q] = r;
        self.pred[q] = entering;
        self.pred_dir[q] = if q == s { DIR_UP } else { DIR_DOWN };

        // Potentials shift by the entering arc's reduced cost on the moved
        // subtree; depths are recomputed on the same walk.
        let rc = self.arc_cost(entering) + self.pi[s] - self.pi[t];
        let shift = if q == t { rc } else { -rc };
        self.rebuild_children();
        self.stack.clear();
        self.stack.push(q);
        self.depth[q] = self.depth[r] + 1;
        self.pi[q] += shift;
        while let Some(w) = self.stack.pop() {
            let start = self.child_offset[w];
            let end = self.child_offset[w + 1];
            for idx in start..end {
                let c = self.child_list[idx];
                self.depth[c] = self.depth[w] + 1;
                self.pi[c] += shift;
                self.stack.push(c);
            }
        }
        Ok(())
    }

    /// Children adjacency in CSR form, rebuilt after the parent surgery.
    fn rebuild_children(&mut self) {
        let n = self.node_num;
        let root = n - 1;
        self.child_offset.iter_mut().for_each(|c| *c = 0);
        for u in 0..n {
            if u != root {
                self.child_offset[self.parent[u] + 1] += 1;
            }
        }
        for i in 0..n {
            self.child_offset[i + 1] += self.child_offset[i];
        }
        let mut cursor = self.child_offset.clone();
        for u in 0..n {
            if u != root {
                let p = self.parent[u];
                self.child_list[cursor[p]] = u;
                cursor[p] += 1;
            }
        }
    }
}

/// Exact transportation solve. `mu` and `nu` must be strictly positive;
/// their sums may differ by at most a relative 1e-9 (the demand side is
/// rescaled to balance exactly).
pub fn solve_transport(mu: &[f64], nu: &[f64], cost: &Matrix) -> Result<FlowResult> {
    let n1 = mu.len();
    let n2 = nu.len();
    assert_eq!(cost.rows(), n1);
    assert_eq!(cost.cols(), n2);
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("weights", "empty marginal"));
    }

    let sum_mu: f64 = mu.iter().sum();
    let sum_nu: f64 = nu.iter().sum();
    if (sum_mu - sum_nu).abs() > 1e-9 * sum_mu.max(sum_nu) {
        return Err(Error::invalid(
            "weights",
            format!("marginals must balance: {sum_mu} vs {sum_nu}"),
        ));
    }
    let rescale = sum_mu / sum_nu;
    let nu: Vec<f64> = nu.iter().map(|w| w * rescale).collect();

    let node_num = n1 + n2 + 1;
    let root = node_num - 1;
    let real_arcs = n1 * n2;
    let arc_num = real_arcs + n1 + n2;

    let max_abs_cost = cost
        .data()
        .iter()
        .fold(0.0f64, |acc, &c| acc.max(c.abs()));
    let art_cost = (max_abs_cost + 1.0) * node_num as f64;

    let mut sx = Simplex {
        n1,
        n2,
        cost,
        node_num,
        arc_num,
        art_cost,
        flow: vec![0.0; arc_num],
        state: vec![STATE_LOWER; arc_num],
        pi: vec![0.0; node_num],
        parent: vec![root; node_num],
        pred: vec![0; node_num],
        pred_dir: vec![0; node_num],
        depth: vec![1; node_num],
        next_arc: 0,
        block_size: ((arc_num as f64).sqrt().ceil() as usize).max(64),
        epsilon: 1e-10 * (1.0 + max_abs_cost),
        child_offset: vec![0; node_num + 1],
        child_list: vec![0; node_num - 1],
        stack: Vec::with_capacity(node_num),
    };

    // Initial tree: every node hangs off the root through its artificial
    // arc, carrying its full supply or demand.
    sx.parent[root] = root;
    sx.depth[root] = 0;
    sx.pi[root] = 0.0;
    for u in 0..node_num - 1 {
        let art = real_arcs + u;
        sx.pred[u] = art;
        sx.state[art] = STATE_TREE;
        if u < n1 {
            // Supply node: arc u -> root.
            sx.pred_dir[u] = DIR_UP;
            sx.flow[art] = mu[u];
            sx.pi[u] = -art_cost;
        } else {
            // Demand node: arc root -> u.
            sx.pred_dir[u] = DIR_DOWN;
            sx.flow[art] = nu[u - n1];
            sx.pi[u] = art_cost;
        }
    }

    let pivot_limit = 50 * arc_num + 100_000;
    let mut pivots = 0usize;
    while let Some(entering) = sx.find_entering() {
        sx.pivot(entering)?;
        pivots += 1;
        if pivots > pivot_limit {
            return Err(Error::Numerical(format!(
                "network simplex exceeded {pivot_limit} pivots"
            )));
        }
    }

    // A balanced instance must drain the artificial arcs.
    for a in real_arcs..arc_num {
        if sx.flow[a] > 1e-9 * sum_mu {
            return Err(Error::Numerical(
                "network simplex: artificial arc kept positive flow".into(),
            ));
        }
    }

    let mut plan = Vec::new();
    let mut total_cost = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let f = sx.flow[i * n2 + j];
            if f > 0.0 {
                plan.push((i, j, f));
                total_cost += f * cost.get(i, j);
            }
        }
    }
    Ok(FlowResult {
        plan,
        total_cost,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn check_marginals(plan: &[(usize, usize, f64)], mu: &[f64], nu: &[f64]) {
        let mut row = vec![0.0; mu.len()];
        let mut col = vec![0.0; nu.len()];
        for &(i, j, m) in plan {
            row[i] += m;
            col[j] += m;
        }
        for (a, b) in row.iter().zip(mu) {
            assert!((a - b).abs() < 1e-9, "row marginal {a} vs {b}");
        }
        for (a, b) in col.iter().zip(nu) {
            assert!((a - b).abs() < 1e-9, "col marginal {a} vs {b}");
        }
    }

    #[test]
    fn point_mass_to_point_mass() {
        let cost = Matrix::from_rows(&[vec![1.0]]);
        let r = solve_transport(&[1.0], &[1.0], &cost).unwrap();
        assert_eq!(r.plan, vec![(0, 0, 1.0)]);
        assert!((r.total_cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn splits_mass_when_cheaper() {
        // One source, two sinks with different prices: forced split.
        let cost = Matrix::from_rows(&[vec![3.0, 1.0]]);
        let r = solve_transport(&[1.0], &[0.25, 0.75], &cost).unwrap();
        check_marginals(&r.plan, &[1.0], &[0.25, 0.75]);
        assert!((r.total_cost - (0.25 * 3.0 + 0.75)).abs() < 1e-12);
    }

    #[test]
    fn random_instances_have_feasible_optimal_plans() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..50 {
            let n1 = 1 + rng.next_below(8) as usize;
            let n2 = 1 + rng.next_below(8) as usize;
            let mut cost = Matrix::zeros(n1, n2);
            for i in 0..n1 {
                for j in 0..n2 {
                    cost.set(i, j, rng.next_unit_open() * 5.0);
                }
            }
            let mut mu: Vec<f64> = (0..n1).map(|_| rng.next_unit_open()).collect();
            let mut nu: Vec<f64> = (0..n2).map(|_| rng.next_unit_open()).collect();
            let smu: f64 = mu.iter().sum();
            let snu: f64 = nu.iter().sum();
            mu.iter_mut().for_each(|w| *w /= smu);
            nu.iter_mut().for_each(|w| *w /= snu);
            let r = solve_transport(&mu, &nu, &cost).unwrap();
            check_marginals(&r.plan, &mu, &nu);
            // Plan cost consistency.
            let recomputed: f64 = r.plan.iter().map(|&(i, j, m)| m * cost.get(i, j)).sum();
            assert!((recomputed - r.total_cost).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unbalanced_marginals() {
        let cost = Matrix::from_rows(&[vec![1.0]]);
        assert!(solve_transport(&[1.0], &[0.5], &cost).is_err());
    }
}
