//! Exact computation of `λ`, `nλ`, `σ`, `nσ` and the chromatic number on
//! small graphs by bounded backtracking.
//!
//! Every invariant is found by an upward scan over spans (or moduli) with
//! one decision search per value. Feasibility is not monotone for the
//! no-hole families, so no bisection is attempted. Infinite values are only
//! reported after exhausting a window that provably contains every finite
//! value.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::labelling::{HVector, Labelling};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Invariant {
    Lambda,
    Nlambda,
    Sigma,
    Nsigma,
    Chromatic,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Lambda => "lambda",
            Invariant::Nlambda => "nlambda",
            Invariant::Sigma => "sigma",
            Invariant::Nsigma => "nsigma",
            Invariant::Chromatic => "chromatic",
        };
        f.write_str(s)
    }
}

/// An invariant value; serialized as an integer, `"infinity"` or
/// `"unresolved"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveValue {
    Finite(u64),
    Infinity,
    Unresolved,
}

impl SolveValue {
    pub fn finite(self) -> Option<u64> {
        match self {
            SolveValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `self <= other` with every finite value below infinity. `None` when
    /// either side is unresolved.
    pub fn le(self, other: SolveValue) -> Option<bool> {
        match (self, other) {
            (SolveValue::Unresolved, _) | (_, SolveValue::Unresolved) => None,
            (SolveValue::Finite(a), SolveValue::Finite(b)) => Some(a <= b),
            (_, SolveValue::Infinity) => Some(true),
            (SolveValue::Infinity, SolveValue::Finite(_)) => Some(false),
        }
    }
}

impl fmt::Display for SolveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveValue::Finite(v) => write!(f, "{v}"),
            SolveValue::Infinity => f.write_str("infinity"),
            SolveValue::Unresolved => f.write_str("unresolved"),
        }
    }
}

impl Serialize for SolveValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SolveValue::Finite(v) => s.serialize_u64(*v),
            SolveValue::Infinity => s.serialize_str("infinity"),
            SolveValue::Unresolved => s.serialize_str("unresolved"),
        }
    }
}

impl<'de> Deserialize<'de> for SolveValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(SolveValue::Finite)
                .ok_or_else(|| de::Error::custom("value must be a nonnegative integer")),
            serde_json::Value::String(s) if s == "infinity" => Ok(SolveValue::Infinity),
            serde_json::Value::String(s) if s == "unresolved" => Ok(SolveValue::Unresolved),
            other => Err(de::Error::custom(format!("bad value {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub invariant: Invariant,
    pub value: SolveValue,
    pub witness: Option<Labelling>,
    pub nodes: u64,
    /// Spans (or moduli, for the cyclic families) decided during the scan.
    #[serde(skip)]
    pub spans_tested: Vec<u64>,
}

/// The four labelling families a decision search can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Linear,
    NoHoleLinear,
    Cyclic,
    NoHoleCyclic,
}

impl Family {
    fn is_cyclic(self) -> bool {
        matches!(self, Family::Cyclic | Family::NoHoleCyclic)
    }

    fn is_no_hole(self) -> bool {
        matches!(self, Family::NoHoleLinear | Family::NoHoleCyclic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Maximum number of label assignments tried over a whole invariant
    /// computation.
    pub budget: u64,
    /// Plain exhaustive search: natural vertex order, scans from zero, no
    /// symmetry breaking and no counting prunes.
    pub oracle: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: DEFAULT_BUDGET, oracle: false }
    }
}

struct OutOfBudget;

/// Pairwise requirements in search order.
struct Model {
    n: usize,
    /// `order[i]` is the vertex placed at depth `i`.
    order: Vec<usize>,
    /// For depth `i`: `(j, r)` with `j < i` and requirement `r > 0`.
    back: Vec<Vec<(usize, u64)>>,
    /// Adjacency of the constraint graph (pairs with positive requirement).
    conflict: Vec<Vec<(usize, u64)>>,
}

impl Model {
    fn new(g: &Graph, h: &HVector, natural_order: bool) -> Result<Self> {
        let n = g.order();
        let mut conflict = vec![Vec::new(); n];
        for (u, list) in conflict.iter_mut().enumerate() {
            for (v, d) in g.bounded_distances(u, h.l())? {
                let r = h.requirement(d);
                if v != u && r > 0 {
                    list.push((v, r));
                }
            }
        }
        let order = if natural_order { (0..n).collect() } else { search_order(&conflict) };
        Ok(Model::with_order(conflict, order))
    }

    fn with_order(conflict: Vec<Vec<(usize, u64)>>, order: Vec<usize>) -> Self {
        let n = conflict.len();
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let back = order
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut b: Vec<(usize, u64)> =
                    conflict[v].iter().filter(|&&(w, _)| pos[w] < i).map(|&(w, r)| (pos[w], r)).collect();
                b.sort_unstable();
                b
            })
            .collect();
        Model { n, order, back, conflict }
    }

    fn max_requirement(&self) -> u64 {
        self.conflict.iter().flatten().map(|&(_, r)| r).max().unwrap_or(0)
    }

    fn adjacent(&self) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; self.n]; self.n];
        for (u, list) in self.conflict.iter().enumerate() {
            for &(v, _) in list {
                m[u][v] = true;
            }
        }
        m
    }

    /// Colour count of a first-fit colouring of the constraint graph.
    fn greedy_colours(&self) -> u64 {
        let mut colour = vec![usize::MAX; self.n];
        let mut used = 0;
        for &v in &self.order {
            let taken: Vec<usize> = self.conflict[v].iter().map(|&(w, _)| colour[w]).collect();
            let c = (0..).find(|c| !taken.contains(c)).unwrap_or(0);
            colour[v] = c;
            used = used.max(c + 1);
        }
        used as u64
    }
}

/// Highest constraint degree first, then repeatedly the vertex with most
/// constraints into the placed set.
fn search_order(conflict: &[Vec<(usize, u64)>]) -> Vec<usize> {
    let n = conflict.len();
    let mut placed = vec![false; n];
    let mut links = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (links[v], conflict[v].len(), std::cmp::Reverse(v)))
            .expect("an unplaced vertex remains");
        placed[v] = true;
        order.push(v);
        for &(w, _) in &conflict[v] {
            links[w] += 1;
        }
    }
    order
}

/// Exact maximum clique of the graph given by `adj`, as a vertex list.
fn max_clique(adj: &[Vec<bool>]) -> Vec<usize> {
    fn grow(adj: &[Vec<bool>], current: &mut Vec<usize>, cand: Vec<usize>, best: &mut Vec<usize>) {
        if current.len() > best.len() {
            *best = current.clone();
        }
        for (i, &v) in cand.iter().enumerate() {
            if current.len() + cand.len() - i <= best.len() {
                return;
            }
            let next: Vec<usize> = cand[i + 1..].iter().copied().filter(|&w| adj[v][w]).collect();
            current.push(v);
            grow(adj, current, next, best);
            current.pop();
        }
    }
    let mut best = Vec::new();
    grow(adj, &mut Vec::new(), (0..adj.len()).collect(), &mut best);
    best
}

struct Search<'a> {
    model: &'a Model,
    family: Family,
    /// Number of available labels: span + 1, or the modulus.
    size: u64,
    oracle: bool,
    nodes: &'a mut u64,
    budget: u64,
    labels: Vec<u64>,
    counts: Vec<u32>,
    distinct: u64,
}

impl Search<'_> {
    fn run(&mut self) -> std::result::Result<bool, OutOfBudget> {
        if self.model.n == 0 {
            return Ok(true);
        }
        self.dfs(0)
    }

    fn fits(&self, depth: usize, x: u64) -> bool {
        self.model.back[depth].iter().all(|&(j, r)| {
            let d = x.abs_diff(self.labels[j]);
            let d = if self.family.is_cyclic() { d.min(self.size - d) } else { d };
            d >= r
        })
    }

    fn first_choices(&self) -> u64 {
        if self.oracle {
            self.size
        } else if self.family.is_cyclic() {
            1
        } else {
            // mirror image x -> span - x
            (self.size - 1) / 2 + 1
        }
    }

    /// Lower bound on labels that must still be used for the no-hole
    /// property to be reachable.
    fn still_needed(&self) -> u64 {
        if !self.family.is_cyclic() {
            return self.size - self.distinct;
        }
        if self.distinct == 0 {
            return 0;
        }
        // the final used set is a cyclic arc covering every used label; the
        // shortest such arc leaves out the largest gap
        let k = self.size as usize;
        let used: Vec<usize> = (0..k).filter(|&i| self.counts[i] > 0).collect();
        let mut max_gap = k - used[used.len() - 1] + used[0];
        for w in used.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        let arc = (k + 1 - max_gap) as u64;
        arc - self.distinct
    }

    fn complete_ok(&self) -> bool {
        if !self.family.is_no_hole() {
            return true;
        }
        if !self.family.is_cyclic() {
            return self.distinct == self.size;
        }
        self.still_needed() == 0
    }

    fn dfs(&mut self, depth: usize) -> std::result::Result<bool, OutOfBudget> {
        let limit = if depth == 0 { self.first_choices() } else { self.size };
        for x in 0..limit {
            if !self.fits(depth, x) {
                continue;
            }
            *self.nodes += 1;
            if *self.nodes > self.budget {
                return Err(OutOfBudget);
            }
            self.labels[depth] = x;
            self.counts[x as usize] += 1;
            if self.counts[x as usize] == 1 {
                self.distinct += 1;
            }
            let remaining = (self.model.n - depth - 1) as u64;
            let viable = self.oracle || !self.family.is_no_hole() || self.still_needed() <= remaining;
            let found = viable && if remaining == 0 { self.complete_ok() } else { self.dfs(depth + 1)? };
            if found {
                return Ok(true);
            }
            self.counts[x as usize] -= 1;
            if self.counts[x as usize] == 0 {
                self.distinct -= 1;
            }
        }
        Ok(false)
    }
}

/// Reusable exact solver for one graph and separation vector; the node
/// count accumulates over all calls.
pub struct Solver {
    model: Model,
    h1: u64,
    opts: SolveOptions,
    nodes: u64,
}

impl Solver {
    pub fn new(g: &Graph, h: &HVector, opts: SolveOptions) -> Result<Self> {
        if !h.is_monotone() {
            return invalid(format!("solvers need a nonincreasing separation vector, got {:?}", h.entries()));
        }
        Ok(Solver { model: Model::new(g, h, opts.oracle)?, h1: h.h1(), opts, nodes: 0 })
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// Decision search. `k` is the span for the linear families and the
    /// modulus for the cyclic ones. Returns a witness in input vertex order.
    pub fn feasible(&mut self, family: Family, k: u64) -> Result<Option<Labelling>> {
        self.decide(family, k).map_err(|_| Error::Unresolved { lo: 0, hi: None })
    }

    fn decide(&mut self, family: Family, k: u64) -> std::result::Result<Option<Labelling>, OutOfBudget> {
        let size = if family.is_cyclic() { k } else { k + 1 };
        let n = self.model.n;
        if size == 0 || (family.is_no_hole() && !family.is_cyclic() && size > n as u64) {
            return Ok(None);
        }
        let mut search = Search {
            model: &self.model,
            family,
            size,
            oracle: self.opts.oracle,
            nodes: &mut self.nodes,
            budget: self.opts.budget,
            labels: vec![0; n],
            counts: vec![0; size as usize],
            distinct: 0,
        };
        if !search.run()? {
            return Ok(None);
        }
        let mut labels = vec![0; n];
        for (i, &v) in self.model.order.iter().enumerate() {
            labels[v] = search.labels[i];
        }
        Ok(Some(if family.is_cyclic() {
            Labelling::cyclic(labels, k).expect("labels lie below the modulus")
        } else {
            Labelling::linear(labels)
        }))
    }

    /// Scans `from..=to` and returns the first feasible value with its
    /// witness. `to = None` means the scan is known to terminate.
    fn scan(
        &mut self,
        family: Family,
        from: u64,
        to: u64,
        tested: &mut Vec<u64>,
        bracket: impl Fn(u64) -> Error,
    ) -> Result<Option<(u64, Labelling)>> {
        for k in from..=to {
            tested.push(k);
            match self.decide(family, k) {
                Ok(Some(w)) => return Ok(Some((k, w))),
                Ok(None) => {}
                Err(OutOfBudget) => return Err(bracket(k)),
            }
        }
        Ok(None)
    }

    fn result(&self, invariant: Invariant, value: SolveValue, witness: Option<Labelling>, tested: Vec<u64>) -> SolveResult {
        SolveResult { invariant, value, witness, nodes: self.nodes, spans_tested: tested }
    }

    /// Span any first-fit colouring scaled by `h_1` achieves.
    fn linear_cap(&self) -> u64 {
        self.h1 * self.model.greedy_colours().saturating_sub(1)
    }

    fn lambda_lower(&self) -> u64 {
        if self.opts.oracle {
            return 0;
        }
        let omega = max_clique(&self.model.adjacent()).len() as u64;
        omega.saturating_sub(1).max(self.model.max_requirement())
    }

    pub fn lambda(&mut self) -> Result<SolveResult> {
        let cap = self.linear_cap();
        let mut tested = Vec::new();
        let lo = self.lambda_lower().min(cap);
        match self.scan(Family::Linear, lo, cap, &mut tested, |k| Error::Unresolved { lo: k, hi: Some(cap) })? {
            Some((v, w)) => Ok(self.result(Invariant::Lambda, SolveValue::Finite(v), Some(w), tested)),
            None => unreachable!("a scaled colouring always fits the cap"),
        }
    }

    pub fn sigma(&mut self) -> Result<SolveResult> {
        let lambda = self.lambda()?.value.finite().expect("lambda is finite");
        let step = self.h1.max(1);
        let cap = step * self.model.greedy_colours().max(1);
        let from = if self.opts.oracle { 1 } else { lambda + 1 };
        let mut tested = Vec::new();
        let hi = Some(lambda + step - 1);
        match self.scan(Family::Cyclic, from, cap.max(from), &mut tested, |k| Error::Unresolved { lo: k - 1, hi })? {
            Some((k, w)) => Ok(self.result(Invariant::Sigma, SolveValue::Finite(k - 1), Some(w), tested)),
            None => unreachable!("a scaled colouring is cyclic at k = h_1 times the colour count"),
        }
    }

    pub fn nlambda(&mut self) -> Result<SolveResult> {
        let from = if self.opts.oracle { 0 } else { self.lambda()?.value.finite().expect("lambda is finite") };
        let top = self.model.n as u64 - 1;
        let mut tested = Vec::new();
        if from > top {
            return Ok(self.result(Invariant::Nlambda, SolveValue::Infinity, None, tested));
        }
        match self.scan(Family::NoHoleLinear, from, top, &mut tested, |k| Error::Unresolved { lo: k, hi: None })? {
            Some((v, w)) => Ok(self.result(Invariant::Nlambda, SolveValue::Finite(v), Some(w), tested)),
            None => Ok(self.result(Invariant::Nlambda, SolveValue::Infinity, None, tested)),
        }
    }

    pub fn nsigma(&mut self) -> Result<SolveResult> {
        let Some(nlambda) = self.nlambda()?.value.finite() else {
            return Ok(self.result(Invariant::Nsigma, SolveValue::Infinity, None, Vec::new()));
        };
        let from = if self.opts.oracle {
            1
        } else {
            let sigma = self.sigma()?.value.finite().expect("sigma is finite");
            sigma.max(nlambda) + 1
        };
        let top = nlambda + self.h1 + 1;
        let mut tested = Vec::new();
        let hi = Some(nlambda + self.h1.max(1) - 1);
        match self.scan(Family::NoHoleCyclic, from, top, &mut tested, |k| Error::Unresolved { lo: k - 1, hi })? {
            Some((k, w)) => Ok(self.result(Invariant::Nsigma, SolveValue::Finite(k - 1), Some(w), tested)),
            None => unreachable!("a no-hole linear witness of span s is no-hole cyclic at k = s + h_1"),
        }
    }
}

/// Is there a linear labelling into `{0, ..., k}`?
pub fn feasible_linear(g: &Graph, h: &HVector, k: u64) -> Result<Option<Labelling>> {
    Solver::new(g, h, SolveOptions::default())?.feasible(Family::Linear, k)
}

pub fn lambda_exact(g: &Graph, h: &HVector) -> Result<SolveResult> {
    Solver::new(g, h, SolveOptions::default())?.lambda()
}

pub fn sigma_exact(g: &Graph, h: &HVector) -> Result<SolveResult> {
    Solver::new(g, h, SolveOptions::default())?.sigma()
}

pub fn nlambda_exact(g: &Graph, h: &HVector) -> Result<SolveResult> {
    Solver::new(g, h, SolveOptions::default())?.nlambda()
}

pub fn nsigma_exact(g: &Graph, h: &HVector) -> Result<SolveResult> {
    Solver::new(g, h, SolveOptions::default())?.nsigma()
}

/// Runs the solver for `invariant`; `chromatic` ignores `h`.
pub fn solve(g: &Graph, h: &HVector, invariant: Invariant, opts: SolveOptions) -> Result<SolveResult> {
    if invariant == Invariant::Chromatic {
        return chromatic_with(g, opts);
    }
    let mut s = Solver::new(g, h, opts)?;
    match invariant {
        Invariant::Lambda => s.lambda(),
        Invariant::Nlambda => s.nlambda(),
        Invariant::Sigma => s.sigma(),
        Invariant::Nsigma => s.nsigma(),
        Invariant::Chromatic => unreachable!(),
    }
}

pub fn chromatic_exact(g: &Graph) -> Result<SolveResult> {
    chromatic_with(g, SolveOptions::default())
}

/// Chromatic number. Outside oracle mode a maximum clique is coloured
/// first with fixed colours and later vertices may open at most one new
/// colour. The witness lists colours `0..χ` as a linear labelling.
pub fn chromatic_with(g: &Graph, opts: SolveOptions) -> Result<SolveResult> {
    let ones = HVector::leading(1, 1)?;
    let base = Model::new(g, &ones, true)?;
    let clique = if opts.oracle { Vec::new() } else { max_clique(&base.adjacent()) };
    let model = if opts.oracle {
        base
    } else {
        let mut order = clique.clone();
        let rest = search_order(&base.conflict);
        order.extend(rest.into_iter().filter(|v| !clique.contains(v)));
        Model::with_order(base.conflict, order)
    };
    let n = model.n;
    let mut nodes = 0u64;
    let mut tested = Vec::new();
    let from = if opts.oracle { 1 } else { clique.len().max(1) as u64 };
    let cap = model.greedy_colours().max(1);
    for k in from..=cap {
        tested.push(k);
        let mut colours = vec![0u64; n];
        let found = colour_dfs(&model, k, &clique, opts, &mut colours, 0, 0, &mut nodes)
            .map_err(|_| Error::Unresolved { lo: k, hi: Some(cap) })?;
        if found {
            let mut labels = vec![0; n];
            for (i, &v) in model.order.iter().enumerate() {
                labels[v] = colours[i];
            }
            return Ok(SolveResult {
                invariant: Invariant::Chromatic,
                value: SolveValue::Finite(k),
                witness: Some(Labelling::linear(labels)),
                nodes,
                spans_tested: tested,
            });
        }
    }
    unreachable!("the first-fit colouring fits the cap")
}

#[allow(clippy::too_many_arguments)]
fn colour_dfs(
    model: &Model,
    k: u64,
    clique: &[usize],
    opts: SolveOptions,
    colours: &mut [u64],
    depth: usize,
    opened: u64,
    nodes: &mut u64,
) -> std::result::Result<bool, OutOfBudget> {
    if depth == model.n {
        return Ok(true);
    }
    let choices: Vec<u64> = if depth < clique.len() {
        vec![depth as u64]
    } else if opts.oracle {
        (0..k).collect()
    } else {
        (0..k.min(opened + 1)).collect()
    };
    for c in choices {
        if model.back[depth].iter().any(|&(j, _)| colours[j] == c) {
            continue;
        }
        *nodes += 1;
        if *nodes > opts.budget {
            return Err(OutOfBudget);
        }
        colours[depth] = c;
        if colour_dfs(model, k, clique, opts, colours, depth + 1, opened.max(c + 1), nodes)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Lower bound `|S| - 1` on all four invariants for any `h` with `h_1 >= 1`,
/// valid when the subgraph induced by `S` has diameter at most `l`.
pub fn certificate_check(g: &Graph, s: &[usize], l: usize) -> Result<u64> {
    if s.is_empty() {
        return invalid("certificate vertex set is empty");
    }
    let sub = g.induced_subgraph(s)?;
    let diameter = sub.graph.diameter();
    if !diameter.is_within(l) {
        return Err(Error::CertificateRejected(format!(
            "induced subgraph on {} vertices has diameter {diameter}, more than {l}",
            sub.graph.order()
        )));
    }
    Ok(sub.graph.order() as u64 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labelling::{verify_cyclic, verify_linear};

    fn hv(v: &[u64]) -> HVector {
        HVector::new(v.to_vec()).unwrap()
    }

    fn c(n: usize) -> Graph {
        Graph::cycle(n).unwrap()
    }

    fn value(r: Result<SolveResult>) -> SolveValue {
        r.unwrap().value
    }

    #[test]
    fn decision_examples() {
        let p3 = Graph::path(3).unwrap();
        assert!(feasible_linear(&p3, &hv(&[2, 1]), 2).unwrap().is_none());
        let w = feasible_linear(&p3, &hv(&[2, 1]), 3).unwrap().unwrap();
        assert!(verify_linear(&p3, &hv(&[2, 1]), &w).unwrap().pass);
        let zero = feasible_linear(&c(5), &hv(&[0, 0]), 0).unwrap().unwrap();
        assert_eq!(zero.labels(), &[0; 5]);
    }

    #[test]
    fn invariant_examples() {
        let h21 = hv(&[2, 1]);
        assert_eq!(value(lambda_exact(&c(4), &h21)), SolveValue::Finite(4));
        assert_eq!(value(lambda_exact(&c(5), &hv(&[1, 1, 1]))), SolveValue::Finite(4));
        assert_eq!(value(sigma_exact(&c(4), &h21)), SolveValue::Finite(5));
        assert_eq!(value(nlambda_exact(&c(4), &h21)), SolveValue::Infinity);
        assert_eq!(value(nsigma_exact(&c(4), &h21)), SolveValue::Infinity);
        assert_eq!(value(nsigma_exact(&c(4), &hv(&[1, 1]))), SolveValue::Finite(3));
        assert_eq!(value(nlambda_exact(&Graph::path(3).unwrap(), &hv(&[1, 1]))), SolveValue::Finite(2));
        let k3 = Graph::complete(3).unwrap();
        assert_eq!(value(sigma_exact(&k3, &hv(&[1]))), SolveValue::Finite(2));
        assert_eq!(value(nsigma_exact(&k3, &hv(&[1]))), SolveValue::Finite(2));
        for q in 2..=5 {
            let kq = Graph::complete(q).unwrap();
            assert_eq!(value(nlambda_exact(&kq, &hv(&[2, 1, 1]))), SolveValue::Infinity);
            assert_eq!(value(lambda_exact(&kq, &hv(&[3]))), SolveValue::Finite(3 * (q as u64 - 1)));
        }
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(value(chromatic_exact(&Graph::complete(5).unwrap())), SolveValue::Finite(5));
        assert_eq!(value(chromatic_exact(&c(5))), SolveValue::Finite(3));
        assert_eq!(value(chromatic_exact(&c(5).power(2).unwrap())), SolveValue::Finite(5));
        let opts = SolveOptions { oracle: true, ..Default::default() };
        assert_eq!(chromatic_with(&c(7), opts).unwrap().value, SolveValue::Finite(3));
    }

    #[test]
    fn witnesses_verify() {
        let g = c(6);
        let h = hv(&[2, 1]);
        let lam = lambda_exact(&g, &h).unwrap();
        let w = lam.witness.unwrap();
        assert_eq!(w.span(), lam.value.finite().unwrap());
        assert!(verify_linear(&g, &h, &w).unwrap().pass);
        let sig = sigma_exact(&g, &h).unwrap();
        let w = sig.witness.unwrap();
        assert!(verify_cyclic(&g, &h, &w, w.modulus().unwrap()).unwrap().pass);
        assert_eq!(w.span(), sig.value.finite().unwrap());
    }

    #[test]
    fn oracle_mode_agrees() {
        let opts = SolveOptions { oracle: true, ..Default::default() };
        let h = hv(&[2, 1]);
        for g in [c(4), c(5), Graph::path(4).unwrap(), Graph::star(4).unwrap()] {
            for inv in [Invariant::Lambda, Invariant::Sigma, Invariant::Nlambda, Invariant::Nsigma] {
                let fast = solve(&g, &h, inv, SolveOptions::default()).unwrap().value;
                let slow = solve(&g, &h, inv, opts).unwrap().value;
                assert_eq!(fast, slow, "{inv} on {g:?}");
            }
        }
    }

    #[test]
    fn budget_gives_unresolved() {
        let g = Graph::complete(7).unwrap();
        let opts = SolveOptions { budget: 10, oracle: true };
        let err = solve(&g, &hv(&[2]), Invariant::Lambda, opts).unwrap_err();
        assert!(matches!(err, Error::Unresolved { .. }), "{err}");
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(lambda_exact(&c(4), &hv(&[1, 2])).is_err());
    }

    #[test]
    fn certificate_examples() {
        use crate::graph::ProductGraph;
        let h = ProductGraph::hamming(&[19, 2, 2, 2]).unwrap();
        let s: Vec<usize> = (0..h.order()).filter(|&v| v % 2 == 0).collect();
        assert_eq!(certificate_check(h.graph(), &s, 3).unwrap(), 75);
        assert!(matches!(certificate_check(h.graph(), &s, 2), Err(Error::CertificateRejected(_))));
        assert_eq!(certificate_check(h.graph(), &[5], 1).unwrap(), 0);
        assert!(certificate_check(h.graph(), &[], 1).is_err());
    }

    #[test]
    fn value_json() {
        let r = SolveResult {
            invariant: Invariant::Nsigma,
            value: SolveValue::Infinity,
            witness: None,
            nodes: 3,
            spans_tested: vec![1],
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"invariant":"nsigma","value":"infinity","witness":null,"nodes":3}"#);
        let back: SolveResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back.value, SolveValue::Infinity);
    }
}
