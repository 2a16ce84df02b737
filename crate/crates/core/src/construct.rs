//! LPHVG construction.
//!
//! Nodes `i < j` are linked iff at most `rho` of the samples `x_q`, `i < q < j`,
//! satisfy `x_q >= min(x_i, x_j)`. Intermediates equal to the smaller endpoint
//! block, so a constant series links exactly the pairs with `j - i <= rho + 1`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::series::{Penetrability, TimeSeries};

/// Largest node count accepted by [`VisibilityGraph::adjacency_csv`].
pub const MATRIX_EXPORT_LIMIT: usize = 2000;

/// Undirected simple graph over series indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityGraph {
    rho: Penetrability,
    /// Sorted neighbour lists.
    neighbors: Vec<Vec<usize>>,
}

impl VisibilityGraph {
    /// Build from an undirected edge list. Pairs may come in any order; duplicates and
    /// self-loops are rejected.
    pub fn from_edges(n: usize, rho: Penetrability, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::IndexOutOfRange { i: a, j: b, n });
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param("duplicate edge"));
            }
        }
        Ok(Self { rho, neighbors })
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn rho(&self) -> Penetrability {
        self.rho
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.neighbors.iter().map(Vec::len)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.neighbors.len() && self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Text export, one `i j` line per edge with `i < j`, zero-based, sorted.
    pub fn edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edge_count() * 12);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    /// Dense 0/1 CSV export, refused above [`MATRIX_EXPORT_LIMIT`] nodes.
    pub fn adjacency_csv(&self) -> Result<String> {
        let n = self.node_count();
        if n > MATRIX_EXPORT_LIMIT {
            return Err(Error::MatrixTooLarge {
                n,
                limit: MATRIX_EXPORT_LIMIT,
            });
        }
        let mut out = String::with_capacity(n * n * 2);
        let mut row = vec![b'0'; n];
        for list in &self.neighbors {
            row.iter_mut().for_each(|c| *c = b'0');
            for &j in list {
                row[j] = b'1';
            }
            for (k, c) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push(*c as char);
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Number of connected components (breadth-first).
    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.neighbors[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }
}

fn check_len(series: &TimeSeries) -> Result<()> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: 2,
        });
    }
    Ok(())
}

/// Direct evaluation of the linking rule for one pair.
pub fn penetrable_visible(series: &TimeSeries, i: usize, j: usize, rho: Penetrability) -> Result<bool> {
    let x = series.values();
    if !(i < j && j < x.len()) {
        return Err(Error::IndexOutOfRange { i, j, n: x.len() });
    }
    let floor = x[i].min(x[j]);
    let blockers = x[i + 1..j].iter().filter(|&&q| q >= floor).count();
    Ok(blockers <= rho.get())
}

/// Optimized construction.
///
/// For each node `i` the scan moves right, keeping the `rho + 1` largest
/// intermediates seen so far. A candidate `j` with `x_j >= x_i` is blocked only
/// by intermediates `>= x_i`, of which fewer than `rho + 1` exist while the scan
/// is running. A candidate with `x_j < x_i` is blocked iff the `(rho+1)`-th
/// largest intermediate is `>= x_j`. The scan stops once `rho + 1` values
/// `>= x_i` have been passed, since every later candidate then has at least
/// `rho + 1` blockers.
pub fn build_lphvg(series: &TimeSeries, rho: Penetrability) -> Result<VisibilityGraph> {
    check_len(series)?;
    let x = series.values();
    let n = x.len();
    let cap = rho.get() + 1;
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::with_capacity(4 * cap); n];
    // ascending; top[0] is the smallest of the retained largest intermediates
    let mut top: Vec<f64> = Vec::with_capacity(cap);

    for i in 0..n - 1 {
        let xi = x[i];
        top.clear();
        let mut passed_higher = 0usize;
        for j in i + 1..n {
            let xj = x[j];
            let linked = xj >= xi || top.len() < cap || top[0] < xj;
            if linked {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
            if xj >= xi {
                passed_higher += 1;
                if passed_higher == cap {
                    break;
                }
            }
            insert_bounded(&mut top, cap, xj);
        }
    }
    // Left neighbours of j are pushed in increasing i before its own scan
    // appends the right neighbours, so every list is already sorted.
    Ok(VisibilityGraph { rho, neighbors })
}

fn insert_bounded(top: &mut Vec<f64>, cap: usize, v: f64) {
    if top.len() == cap {
        if v <= top[0] {
            return;
        }
        top.remove(0);
    }
    let pos = top.partition_point(|&t| t < v);
    top.insert(pos, v);
}

/// Exhaustive oracle: every pair tested by a direct blocker count.
pub fn build_lphvg_naive(series: &TimeSeries, rho: Penetrability) -> Result<VisibilityGraph> {
    check_len(series)?;
    let x = series.values();
    let n = x.len();
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let floor = if x[i] < x[j] { x[i] } else { x[j] };
            let blockers = x[i + 1..j].iter().filter(|&&v| v >= floor).count();
            if blockers <= rho.get() {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    Ok(VisibilityGraph { rho, neighbors })
}
