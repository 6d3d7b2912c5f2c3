//! Finite simple undirected graphs, Cartesian products and the distance
//! queries the labelling code is built on.
//!
//! Vertices are indexed `0..n`. Product vertices use a row-major codec over
//! the factor digits with the last coordinate varying fastest, so the slice
//! of a product that fixes every coordinate but the last is a contiguous
//! index range.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// A graph distance, or the marker for an unreachable pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn is_within(self, bound: usize) -> bool {
        matches!(self, Distance::Finite(d) if d <= bound)
    }
}

impl From<Option<usize>> for Distance {
    fn from(d: Option<usize>) -> Self {
        d.map_or(Distance::Infinite, Distance::Finite)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("infinity"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Distance::Finite(d) => s.serialize_u64(*d as u64),
            Distance::Infinite => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|v| Distance::Finite(v as usize))
                .ok_or_else(|| serde::de::Error::custom("distance must be a nonnegative integer")),
            serde_json::Value::String(s) if s == "infinity" => Ok(Distance::Infinite),
            other => Err(serde::de::Error::custom(format!("bad distance {other}"))),
        }
    }
}

/// Finite simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    name: String,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate pairs (in either
    /// orientation) collapse; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return invalid("graph must have at least one vertex");
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u},{v}) has an endpoint outside 0..{n}"));
            }
            if u == v {
                return invalid(format!("self-loop at vertex {u}"));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { name: String::new(), adj })
    }

    /// Trusted constructor; `adj` must already be sorted, symmetric and loop-free.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        debug_assert!(adj.iter().all(|l| l.windows(2).all(|w| w[0] < w[1])));
        Graph { name: String::new(), adj }
    }

    pub fn complete(q: usize) -> Result<Self> {
        if q == 0 {
            return invalid("complete graph needs q >= 1");
        }
        let adj = (0..q).map(|v| (0..q).filter(|&w| w != v).collect()).collect();
        Ok(Graph::from_sorted_adjacency(adj).named(format!("K{q}")))
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Ok(Graph::from_edges(n, &edges)?.named(format!("P{n}")))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return invalid("cycle needs n >= 3");
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Ok(Graph::from_edges(n, &edges)?.named(format!("C{n}")))
    }

    /// Star with `n` vertices: centre 0 joined to `1..n`.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Ok(Graph::from_edges(n, &edges)?.named(format!("S{n}")))
    }

    /// A path `0 - 1 - ... - diameter` with the remaining vertices hung off
    /// vertex 1. For `diameter >= 2` the result has exactly that diameter.
    pub fn broom(order: usize, diameter: usize) -> Result<Self> {
        if diameter < 2 || order < diameter + 1 {
            return invalid(format!(
                "broom needs diameter >= 2 and order >= diameter + 1 (got order {order}, diameter {diameter})"
            ));
        }
        let mut edges: Vec<_> = (1..=diameter).map(|i| (i - 1, i)).collect();
        edges.extend((diameter + 1..order).map(|v| (1, v)));
        Ok(Graph::from_edges(order, &edges)?.named(format!("Broom{order},{diameter}")))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.order();
        self.adj.iter().all(|l| l.len() == n - 1)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.order() {
            return invalid(format!("vertex {v} out of range 0..{}", self.order()));
        }
        Ok(())
    }

    /// BFS distances from `source` for every vertex within `cutoff`.
    pub fn bounded_distances(&self, source: usize, cutoff: usize) -> Result<BTreeMap<usize, usize>> {
        self.check_vertex(source)?;
        let mut bfs = Bfs::new(self.order());
        let mut out = BTreeMap::new();
        bfs.run(self, source, cutoff, |v, d| {
            out.insert(v, d);
        });
        Ok(out)
    }

    /// Unbounded single-source distances.
    pub fn distances_from(&self, source: usize) -> Vec<Distance> {
        let mut dist = vec![Distance::Infinite; self.order()];
        let mut bfs = Bfs::new(self.order());
        bfs.run(self, source, usize::MAX, |v, d| dist[v] = Distance::Finite(d));
        dist
    }

    /// All-pairs distance table. Intended for factors and small graphs only.
    pub fn all_pairs_distances(&self) -> Vec<Vec<Distance>> {
        (0..self.order()).map(|s| self.distances_from(s)).collect()
    }

    /// `G^l`: same vertex set, `u ~ v` iff `1 <= dist(u, v) <= l`.
    pub fn power(&self, l: usize) -> Result<Graph> {
        if l == 0 {
            return invalid("graph power needs l >= 1");
        }
        let mut bfs = Bfs::new(self.order());
        let adj = (0..self.order())
            .map(|s| {
                let mut list = Vec::new();
                bfs.run(self, s, l, |v, d| {
                    if d > 0 {
                        list.push(v);
                    }
                });
                list.sort_unstable();
                list
            })
            .collect();
        let name = if self.name.is_empty() { String::new() } else { format!("{}^{l}", self.name) };
        Ok(Graph::from_sorted_adjacency(adj).named(name))
    }

    /// Largest finite pairwise distance, or `Infinite` for a disconnected graph.
    pub fn diameter(&self) -> Distance {
        let mut bfs = Bfs::new(self.order());
        let mut best = 0;
        for s in 0..self.order() {
            let mut reached = 0;
            bfs.run(self, s, usize::MAX, |_, d| {
                reached += 1;
                best = best.max(d);
            });
            if reached < self.order() {
                return Distance::Infinite;
            }
        }
        Distance::Finite(best)
    }

    /// Subgraph induced on `vertices`; the result's vertex `i` is
    /// `vertices[i]` of `self` after sorting and deduplication.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<InducedSubgraph> {
        if vertices.is_empty() {
            return invalid("induced subgraph needs a nonempty vertex set");
        }
        let mut mapping = vertices.to_vec();
        mapping.sort_unstable();
        mapping.dedup();
        if let Some(&bad) = mapping.iter().find(|&&v| v >= self.order()) {
            return invalid(format!("vertex {bad} out of range 0..{}", self.order()));
        }
        let mut local = vec![usize::MAX; self.order()];
        for (i, &v) in mapping.iter().enumerate() {
            local[v] = i;
        }
        let adj = mapping
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter_map(|&w| (local[w] != usize::MAX).then_some(local[w]))
                    .collect()
            })
            .collect();
        Ok(InducedSubgraph { graph: Graph::from_sorted_adjacency(adj), mapping })
    }
}

#[derive(Debug, Clone)]
pub struct InducedSubgraph {
    pub graph: Graph,
    /// `mapping[i]` is the parent-graph index of local vertex `i`.
    pub mapping: Vec<usize>,
}

/// Reusable breadth-first search scratch space.
#[derive(Debug, Clone)]
pub struct Bfs {
    dist: Vec<usize>,
    queue: VecDeque<usize>,
    touched: Vec<usize>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs { dist: vec![usize::MAX; n], queue: VecDeque::new(), touched: Vec::new() }
    }

    /// Visits every vertex within `cutoff` of `source` (source included, at
    /// distance 0) in nondecreasing distance order.
    pub fn run(&mut self, g: &Graph, source: usize, cutoff: usize, mut visit: impl FnMut(usize, usize)) {
        if self.dist.len() < g.order() {
            self.dist.resize(g.order(), usize::MAX);
        }
        for &v in &self.touched {
            self.dist[v] = usize::MAX;
        }
        self.touched.clear();
        self.queue.clear();

        self.dist[source] = 0;
        self.touched.push(source);
        self.queue.push_back(source);
        while let Some(v) = self.queue.pop_front() {
            let d = self.dist[v];
            visit(v, d);
            if d == cutoff {
                continue;
            }
            for &w in g.neighbors(v) {
                if self.dist[w] == usize::MAX {
                    self.dist[w] = d + 1;
                    self.touched.push(w);
                    self.queue.push_back(w);
                }
            }
        }
    }
}

/// A Cartesian product together with its factors and coordinate codec.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    graph: Graph,
    factors: Vec<Graph>,
    strides: Vec<usize>,
    factor_distances: Vec<Vec<Vec<Distance>>>,
}

impl ProductGraph {
    /// `G_1 □ ... □ G_d` with row-major vertex order.
    pub fn cartesian(factors: Vec<Graph>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("cartesian product needs at least one factor");
        }
        let orders: Vec<usize> = factors.iter().map(Graph::order).collect();
        let mut strides = vec![1usize; orders.len()];
        for i in (0..orders.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1]
                .checked_mul(orders[i + 1])
                .ok_or(Error::Overflow("product order"))?;
        }
        let n = strides[0].checked_mul(orders[0]).ok_or(Error::Overflow("product order"))?;

        let mut adj = Vec::with_capacity(n);
        let mut digits = vec![0usize; orders.len()];
        for v in 0..n {
            let mut list = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                let x = digits[i];
                for &w in f.neighbors(x) {
                    // w != x, so the subtraction stays in range
                    list.push(v + w * strides[i] - x * strides[i]);
                }
            }
            list.sort_unstable();
            adj.push(list);
            // advance the odometer, last digit fastest
            for i in (0..digits.len()).rev() {
                digits[i] += 1;
                if digits[i] < orders[i] {
                    break;
                }
                digits[i] = 0;
            }
        }

        let name = factors
            .iter()
            .map(|f| if f.name.is_empty() { "?" } else { f.name.as_str() })
            .collect::<Vec<_>>()
            .join("x");
        let factor_distances = factors.iter().map(Graph::all_pairs_distances).collect();
        Ok(ProductGraph {
            graph: Graph::from_sorted_adjacency(adj).named(name),
            factors,
            strides,
            factor_distances,
        })
    }

    /// Hamming graph `K_{q_1} □ ... □ K_{q_d}`.
    pub fn hamming(orders: &[usize]) -> Result<Self> {
        if orders.is_empty() {
            return invalid("hamming graph needs at least one order");
        }
        if let Some(&q) = orders.iter().find(|&&q| q < 2) {
            return invalid(format!("hamming orders must be >= 2, got {q}"));
        }
        let factors = orders.iter().map(|&q| Graph::complete(q)).collect::<Result<Vec<_>>>()?;
        let mut pg = ProductGraph::cartesian(factors)?;
        let name = format!(
            "H({})",
            orders.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        );
        pg.graph.name = name;
        Ok(pg)
    }

    pub fn hypercube(d: usize) -> Result<Self> {
        if d == 0 {
            return invalid("hypercube needs d >= 1");
        }
        let mut pg = ProductGraph::hamming(&vec![2; d])?;
        pg.graph.name = format!("Q{d}");
        Ok(pg)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.graph.name = name.into();
        self
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn factors(&self) -> &[Graph] {
        &self.factors
    }

    pub fn orders(&self) -> Vec<usize> {
        self.factors.iter().map(Graph::order).collect()
    }

    pub fn order(&self) -> usize {
        self.graph.order()
    }

    /// True when every factor is a complete graph of order >= 2.
    pub fn is_hamming(&self) -> bool {
        self.factors.iter().all(|f| f.order() >= 2 && f.is_complete())
    }

    pub fn encode(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.factors.len() {
            return invalid(format!("expected {} digits, got {}", self.factors.len(), digits.len()));
        }
        let mut v = 0;
        for (i, (&x, f)) in digits.iter().zip(&self.factors).enumerate() {
            if x >= f.order() {
                return invalid(format!("digit {x} out of range for factor {i} of order {}", f.order()));
            }
            v += x * self.strides[i];
        }
        Ok(v)
    }

    pub fn decode(&self, v: usize) -> Result<Vec<usize>> {
        if v >= self.order() {
            return invalid(format!("vertex {v} out of range 0..{}", self.order()));
        }
        Ok(self.decode_unchecked(v))
    }

    pub(crate) fn decode_unchecked(&self, v: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.factors)
            .map(|(&s, f)| (v / s) % f.order())
            .collect()
    }

    /// Sum of per-factor distances; equals the BFS distance in the product.
    pub fn product_distance(&self, u: usize, v: usize) -> Result<Distance> {
        let n = self.order();
        if u >= n || v >= n {
            return invalid(format!("vertex pair ({u},{v}) out of range 0..{n}"));
        }
        let mut total = 0;
        for (i, (&s, f)) in self.strides.iter().zip(&self.factors).enumerate() {
            let (a, b) = ((u / s) % f.order(), (v / s) % f.order());
            match self.factor_distances[i][a][b] {
                Distance::Finite(d) => total += d,
                Distance::Infinite => return Ok(Distance::Infinite),
            }
        }
        Ok(Distance::Finite(total))
    }

    /// Flat indices of every vertex whose digit `i` lies in `subsets[i]`.
    pub fn box_vertices(&self, subsets: &[Vec<usize>]) -> Result<Vec<usize>> {
        if subsets.len() != self.factors.len() {
            return invalid(format!(
                "expected one vertex subset per factor ({}), got {}",
                self.factors.len(),
                subsets.len()
            ));
        }
        let mut out = vec![0usize];
        for (i, (set, f)) in subsets.iter().zip(&self.factors).enumerate() {
            if set.is_empty() {
                return invalid(format!("vertex subset for factor {i} is empty"));
            }
            if let Some(&x) = set.iter().find(|&&x| x >= f.order()) {
                return invalid(format!("vertex {x} out of range for factor {i}"));
            }
            out = out
                .iter()
                .flat_map(|&base| set.iter().map(move |&x| base + x * self.strides[i]))
                .collect();
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}
