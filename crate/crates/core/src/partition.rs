//! Vertex placement over `k` workers.
//!
//! The baseline places vertex `v` on worker `v mod k`. [`greedy_redistribute`]
//! then improves the cut by pairwise swaps: for each pair of workers it takes
//! the vertex on either side with the most edges into the other side and
//! swaps the two if that strictly lowers the cut. Swaps keep worker sizes
//! unchanged. Passes over all pairs repeat until one makes no swap.
//!
//! All edges count the same, whatever their kind. Parallel edges (an atom in
//! both bodies of a rule, a rule using its own head) are counted separately.

use thiserror::Error;

use crate::rdg::RdgPrime;

pub type WorkerId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("worker count must be at least {min}, got {k}")]
    TooFewWorkers { k: usize, min: usize },
    #[error("partition covers {partition} vertices but the graph has {graph}")]
    SizeMismatch { partition: usize, graph: usize },
    #[error("vertex {vertex} is assigned to worker {worker}, but k = {k}")]
    WorkerOutOfRange { vertex: usize, worker: WorkerId, k: usize },
}

/// Total map from vertex id to worker id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<WorkerId>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<WorkerId>, k: usize) -> Result<Self, PartitionError> {
        if k == 0 {
            return Err(PartitionError::TooFewWorkers { k, min: 1 });
        }
        if let Some((vertex, &worker)) = assignment.iter().enumerate().find(|(_, &w)| w as usize >= k) {
            return Err(PartitionError::WorkerOutOfRange { vertex, worker, k });
        }
        Ok(Partition { assignment, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn owner(&self, v: usize) -> WorkerId {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[WorkerId] {
        &self.assignment
    }

    /// Number of vertices on each worker.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &w in &self.assignment {
            out[w as usize] += 1;
        }
        out
    }
}

pub fn round_robin(num_vertices: usize, k: usize) -> Result<Partition, PartitionError> {
    if k == 0 {
        return Err(PartitionError::TooFewWorkers { k, min: 1 });
    }
    Partition::new((0..num_vertices).map(|v| (v % k) as WorkerId).collect(), k)
}

/// Undirected multigraph view used for cut computations.
#[derive(Clone, Debug)]
pub struct CutGraph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl CutGraph {
    pub fn from_edges(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); num_vertices];
        let mut list = Vec::new();
        for (a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
            list.push((a, b));
        }
        CutGraph { adj, edges: list }
    }

    pub fn from_rdg(g: &RdgPrime) -> Self {
        Self::from_edges(
            g.num_vertices(),
            g.edges().into_iter().map(|(_, s, d)| (s.index(), d.index())),
        )
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutReport {
    pub cut_size: usize,
    /// `pair[i][j]` = edges between workers `i` and `j`; symmetric, zero diagonal.
    pub pair: Vec<Vec<usize>>,
    /// Per vertex, the number of incident edges leaving its worker.
    pub external_degree: Vec<usize>,
}

fn check_cover(graph: &CutGraph, p: &Partition) -> Result<(), PartitionError> {
    if p.len() != graph.num_vertices() {
        return Err(PartitionError::SizeMismatch {
            partition: p.len(),
            graph: graph.num_vertices(),
        });
    }
    Ok(())
}

pub fn cut_report(graph: &CutGraph, p: &Partition) -> Result<CutReport, PartitionError> {
    check_cover(graph, p)?;
    let k = p.k();
    let mut pair = vec![vec![0; k]; k];
    let mut external_degree = vec![0; graph.num_vertices()];
    let mut cut_size = 0;
    for &(a, b) in &graph.edges {
        let (wa, wb) = (p.owner(a) as usize, p.owner(b) as usize);
        if wa != wb {
            cut_size += 1;
            pair[wa][wb] += 1;
            pair[wb][wa] += 1;
            external_degree[a] += 1;
            external_degree[b] += 1;
        }
    }
    Ok(CutReport {
        cut_size,
        pair,
        external_degree,
    })
}

/// Cut of `p` over every edge of the bipartite dependency graph.
pub fn cut_size(g: &RdgPrime, p: &Partition) -> Result<CutReport, PartitionError> {
    cut_report(&CutGraph::from_rdg(g), p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redistribution {
    pub partition: Partition,
    pub swaps: usize,
    pub passes: usize,
    pub initial_cut: usize,
    pub final_cut: usize,
}

/// Greedy pairwise-swap cut reduction. Requires `k >= 2`.
pub fn redistribute(graph: &CutGraph, p: &Partition) -> Result<Redistribution, PartitionError> {
    check_cover(graph, p)?;
    let k = p.k();
    if k < 2 {
        return Err(PartitionError::TooFewWorkers { k, min: 2 });
    }
    let n = graph.num_vertices();
    let mut owner: Vec<usize> = p.assignment().iter().map(|&w| w as usize).collect();
    // degree[v * k + w] = edges from v to vertices on worker w
    let mut degree = vec![0i64; n * k];
    for (v, nbrs) in graph.adj.iter().enumerate() {
        for &u in nbrs {
            degree[v * k + owner[u]] += 1;
        }
    }
    let initial_cut = cut_report(graph, p)?.cut_size;
    let mut cut = initial_cut as i64;
    let mut swaps = 0;
    let mut passes = 0;

    let best_toward = |owner: &[usize], degree: &[i64], from: usize, to: usize| {
        let mut best: Option<(i64, usize)> = None;
        for v in 0..n {
            if owner[v] != from {
                continue;
            }
            let d = degree[v * k + to];
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, v));
            }
        }
        best.map(|(_, v)| v)
    };

    loop {
        passes += 1;
        let mut swapped = false;
        for i in 0..k {
            for j in i + 1..k {
                while let (Some(u), Some(v)) = (best_toward(&owner, &degree, i, j), best_toward(&owner, &degree, j, i))
                {
                    let shared = graph.adj[u].iter().filter(|&&x| x == v).count() as i64;
                    let delta =
                        degree[u * k + i] - degree[u * k + j] + degree[v * k + j] - degree[v * k + i] + 2 * shared;
                    if delta >= 0 {
                        break;
                    }
                    move_vertex(graph, &mut owner, &mut degree, k, u, j);
                    move_vertex(graph, &mut owner, &mut degree, k, v, i);
                    cut += delta;
                    swaps += 1;
                    swapped = true;
                }
            }
        }
        if !swapped {
            break;
        }
    }

    let partition = Partition::new(owner.iter().map(|&w| w as WorkerId).collect(), k)?;
    debug_assert_eq!(cut as usize, cut_report(graph, &partition)?.cut_size);
    Ok(Redistribution {
        partition,
        swaps,
        passes,
        initial_cut,
        final_cut: cut as usize,
    })
}

fn move_vertex(graph: &CutGraph, owner: &mut [usize], degree: &mut [i64], k: usize, v: usize, to: usize) {
    let from = owner[v];
    for &u in &graph.adj[v] {
        degree[u * k + from] -= 1;
        degree[u * k + to] += 1;
    }
    owner[v] = to;
}

/// [`redistribute`] over the bipartite dependency graph.
pub fn greedy_redistribute(g: &RdgPrime, p: &Partition) -> Result<Redistribution, PartitionError> {
    redistribute(&CutGraph::from_rdg(g), p)
}
