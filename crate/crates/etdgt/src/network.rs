//! Communication digraphs, the row-/column-stochastic mixing matrices they
//! induce, and the spectral quantities consumed by the step-size bounds.
//!
//! Edge convention: an edge `(i, j)` means agent `i` receives from agent `j`.
//! Self-loops are never stored; every induced weight matrix adds them.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;

/// A directed communication graph on agents `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    in_neighbors: Vec<Vec<usize>>,
    out_neighbors: Vec<Vec<usize>>,
}

impl DiGraph {
    /// Build a graph, validating endpoints, duplicates, and self-loops
    /// (self-loops are implicit in the weight matrices and must not be
    /// listed as edges).
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidScenario(
                "graph must have at least one node".into(),
            ));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidScenario(format!(
                    "edge ({i}, {j}) has an endpoint outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidScenario(format!(
                    "edge ({i}, {j}) is a self-loop; self-loops are implicit"
                )));
            }
            if !set.insert((i, j)) {
                return Err(Error::InvalidScenario(format!("duplicate edge ({i}, {j})")));
            }
        }
        let mut in_neighbors = vec![Vec::new(); n];
        let mut out_neighbors = vec![Vec::new(); n];
        for &(i, j) in &set {
            in_neighbors[i].push(j);
            out_neighbors[j].push(i);
        }
        Ok(DiGraph {
            n,
            edges: set,
            in_neighbors,
            out_neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Agents that send to `i`.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_neighbors[i]
    }

    /// Agents that receive from `j`.
    pub fn out_neighbors(&self, j: usize) -> &[usize] {
        &self.out_neighbors[j]
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|j| self.out_neighbors[j].len()).collect()
    }
}

/// Which Perron vector / deflation to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Left eigenvector of a row-stochastic matrix.
    Left,
    /// Right eigenvector of a column-stochastic matrix.
    Right,
}

/// Uniform-weight row-stochastic matrix: row i puts 1/(|in-neighbors|+1)
/// on itself and on each in-neighbor.
pub fn build_row_stochastic(graph: &DiGraph) -> Array2<f64> {
    let n = graph.n();
    let mut r = Array2::zeros((n, n));
    for i in 0..n {
        let w = 1.0 / (graph.in_neighbors(i).len() + 1) as f64;
        r[[i, i]] = w;
        for &j in graph.in_neighbors(i) {
            r[[i, j]] = w;
        }
    }
    r
}

/// Uniform-weight column-stochastic matrix: column j puts
/// 1/(|out-neighbors|+1) on itself and on each out-neighbor.
pub fn build_col_stochastic(graph: &DiGraph) -> Array2<f64> {
    let n = graph.n();
    let mut c = Array2::zeros((n, n));
    for j in 0..n {
        let w = 1.0 / (graph.out_neighbors(j).len() + 1) as f64;
        c[[j, j]] = w;
        for &i in graph.out_neighbors(j) {
            c[[i, j]] = w;
        }
    }
    c
}

/// Unit-sum non-negative Perron vector for eigenvalue 1, by power iteration
/// from the uniform start vector. `Side::Left` iterates on the transpose.
///
/// Row-/column-stochasticity preserves the entry sum exactly, so no
/// renormalization is needed inside the loop.
pub fn perron_vector(matrix: &Array2<f64>, side: Side) -> Result<Array1<f64>> {
    const TOL: f64 = 1e-12;
    const FAIL_TOL: f64 = 1e-10;
    const MAX_ITER: usize = 100_000;

    let n = matrix.nrows();
    let mut v = Array1::from_elem(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let next = match side {
            Side::Left => matrix.t().dot(&v),
            Side::Right => matrix.dot(&v),
        };
        residual = v
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if residual < TOL {
            break;
        }
    }
    if residual >= FAIL_TOL {
        return Err(Error::NonConvergence {
            residual,
            iterations: MAX_ITER,
        });
    }
    Ok(v)
}

/// Contraction factor of the deflated mixing matrix: spectral radius of
/// R - 1*pi_R' (left) or C - pi_C*1' (right), plus a 1e-6 safety margin,
/// capped below 1. Stands in for the operator norm of the constructed
/// mixing norm, which can be chosen arbitrarily close to the radius.
pub fn contraction_factor(matrix: &Array2<f64>, perron: &Array1<f64>, side: Side) -> Result<f64> {
    let deflated = deflate(matrix, perron, side);
    let radius = linalg::spectral_radius(&deflated);
    if radius >= 1.0 {
        return Err(Error::DegenerateSpectrum { radius });
    }
    Ok((radius + 1e-6).min((1.0 + radius) / 2.0))
}

/// R - 1*pi' (left) or C - pi*1' (right).
pub fn deflate(matrix: &Array2<f64>, perron: &Array1<f64>, side: Side) -> Array2<f64> {
    let n = matrix.nrows();
    let mut out = matrix.clone();
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] -= match side {
                Side::Left => perron[j],
                Side::Right => perron[i],
            };
        }
    }
    out
}

/// Spanning-tree condition on the pair of mixing graphs: `graph_r` and the
/// transpose of `graph_c` must each contain a spanning tree, with at least
/// one shared root. Returns the shared root set.
///
/// A root of `graph_r` is a node whose information reaches every agent
/// (paths along reversed stored edges). A root of the transposed push graph
/// is a node reached by every agent's pushed mass (paths along stored
/// edges of `graph_c`).
pub fn check_spanning_trees(graph_r: &DiGraph, graph_c: &DiGraph) -> (bool, BTreeSet<usize>) {
    let n = graph_r.n();
    if graph_c.n() != n {
        return (false, BTreeSet::new());
    }
    let mut roots = BTreeSet::new();
    for r in 0..n {
        if reaches_all(graph_r, r, true) && reaches_all(graph_c, r, false) {
            roots.insert(r);
        }
    }
    (!roots.is_empty(), roots)
}

fn reaches_all(graph: &DiGraph, start: usize, via_out: bool) -> bool {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        let next = if via_out {
            graph.out_neighbors(u)
        } else {
            graph.in_neighbors(u)
        };
        for &v in next {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// The pull/push graph pair with its mixing matrices and every derived
/// spectral quantity used downstream.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub graph_r: DiGraph,
    pub graph_c: DiGraph,
    pub r: Array2<f64>,
    pub c: Array2<f64>,
    pub pi_r: Array1<f64>,
    pub pi_c: Array1<f64>,
    pub sigma_r: f64,
    pub sigma_c: f64,
    /// Norm-equivalence constants, >= 1. Computed as the eigenbasis
    /// condition numbers of the deflated matrices: deltas involving the
    /// pull norm come from R's deflation, those involving the push norm
    /// from C's.
    pub delta_rc: f64,
    pub delta_cr: f64,
    pub delta_2r: f64,
    pub delta_2c: f64,
}

impl NetworkModel {
    pub fn build(graph_r: DiGraph, graph_c: DiGraph) -> Result<Self> {
        let (ok, _) = check_spanning_trees(&graph_r, &graph_c);
        if !ok {
            return Err(Error::InvalidScenario(
                "connectivity requirement: the pull graph and transposed push graph do not \
                 share a spanning-tree root"
                    .into(),
            ));
        }
        let r = build_row_stochastic(&graph_r);
        let c = build_col_stochastic(&graph_c);
        let pi_r = perron_vector(&r, Side::Left)?;
        let pi_c = perron_vector(&c, Side::Right)?;
        let sigma_r = contraction_factor(&r, &pi_r, Side::Left)?;
        let sigma_c = contraction_factor(&c, &pi_c, Side::Right)?;
        let kappa_r = linalg::eigenbasis_condition(&deflate(&r, &pi_r, Side::Left))?;
        let kappa_c = linalg::eigenbasis_condition(&deflate(&c, &pi_c, Side::Right))?;
        Ok(NetworkModel {
            graph_r,
            graph_c,
            r,
            c,
            pi_r,
            pi_c,
            sigma_r,
            sigma_c,
            delta_rc: kappa_c,
            delta_cr: kappa_r,
            delta_2r: kappa_r,
            delta_2c: kappa_c,
        })
    }

    pub fn n(&self) -> usize {
        self.graph_r.n()
    }

    /// pi_C' * pi_R, the coupling scalar of the push-pull pair.
    pub fn pi_dot(&self) -> f64 {
        self.pi_c.dot(&self.pi_r)
    }
}
