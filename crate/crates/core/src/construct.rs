//! Inductive offset-set construction of a no-hole cyclic
//! `C(q_l, 1, ..., 1)`-labelling of `H = G_1 □ ... □ G_{l-1} □ G` with
//! modulus `N_1 = q_1 ... q_l`.
//!
//! A vertex of `H` is a prefix `(x_1, ..., x_{l-1})` together with a vertex
//! `x` of `G`; fixing `x` gives a *slice*. Slice `x` is labelled by
//!
//! ```text
//! phi(x_1, ..., x_{l-1}, x) = sum_i ((a_i(x) + x_i) mod q_i) * N_{i+1} + (x mod q_l)
//! ```
//!
//! where `a(x)` is the offset vector chosen for that slice. Slice 0 uses the
//! zero offset; every later slice takes the lexicographically first offset
//! that keeps all pairs touching it within distance `l` feasible.
//!
//! Slices are an arrangement of the vertices of `G`. Two slices with the
//! same residue mod `q_l` that are adjacent in `G` can never be separated
//! (some pair of their vertices within distance `l` always gets equal
//! labels), so by default the slices are ordered so that every residue
//! class is an independent set of `G`, keeping the given order when it
//! already has that property.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CandidateViolation, Error, Result};
use crate::graph::{Distance, Graph, ProductGraph};
use crate::labelling::{cyclic_distance_unchecked, Labelling};

/// Mixed-radix digit bounds `q_1, ..., q_l` with suffix products
/// `N_i = q_i ... q_l` and `N_{l+1} = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadixSpec {
    orders: Vec<usize>,
    suffix: Vec<u64>,
}

impl RadixSpec {
    pub fn new(orders: &[usize]) -> Result<Self> {
        if orders.is_empty() {
            return invalid("radix spec needs at least one digit bound");
        }
        if orders.contains(&0) {
            return invalid("digit bounds must be >= 1");
        }
        let mut suffix = vec![1u64; orders.len() + 1];
        for i in (0..orders.len()).rev() {
            suffix[i] = suffix[i + 1]
                .checked_mul(orders[i] as u64)
                .ok_or(Error::Overflow("suffix products"))?;
        }
        Ok(RadixSpec { orders: orders.to_vec(), suffix })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// `[N_1, ..., N_l, N_{l+1}]`.
    pub fn suffix_products(&self) -> &[u64] {
        &self.suffix
    }

    pub fn n1(&self) -> u64 {
        self.suffix[0]
    }

    pub fn encode(&self, digits: &[usize]) -> Result<u64> {
        if digits.len() != self.orders.len() {
            return invalid(format!("expected {} digits, got {}", self.orders.len(), digits.len()));
        }
        let mut v = 0;
        for (i, (&x, &q)) in digits.iter().zip(&self.orders).enumerate() {
            if x >= q {
                return invalid(format!("digit {x} at position {i} exceeds bound {q}"));
            }
            v += x as u64 * self.suffix[i + 1];
        }
        Ok(v)
    }

    pub fn decode(&self, value: u64) -> Result<Vec<usize>> {
        if value >= self.n1() {
            return invalid(format!("value {value} outside 0..{}", self.n1()));
        }
        Ok((0..self.orders.len())
            .map(|i| ((value / self.suffix[i + 1]) % self.orders[i] as u64) as usize)
            .collect())
    }
}

/// `x mod q_l`.
pub fn residue(x: u64, q_l: u64) -> Result<u64> {
    if q_l == 0 {
        return invalid("q_l must be >= 1");
    }
    Ok(x % q_l)
}

/// Ordered offset vectors `a(0), ..., a(t)`, one per slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OffsetSet(Vec<Vec<usize>>);

impl OffsetSet {
    /// `{a(0)}` with `a(0)` the zero vector of length `width`.
    pub fn initial(width: usize) -> Self {
        OffsetSet(vec![vec![0; width]])
    }

    pub fn from_vectors(vectors: Vec<Vec<usize>>) -> Result<Self> {
        match vectors.first() {
            Some(a0) if a0.iter().all(|&x| x == 0) => Ok(OffsetSet(vectors)),
            Some(_) => invalid("a(0) must be the zero vector"),
            None => invalid("offset set needs a(0)"),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, x: usize) -> Option<&[usize]> {
        self.0.get(x).map(Vec::as_slice)
    }

    pub fn vectors(&self) -> &[Vec<usize>] {
        &self.0
    }

    pub fn push(&mut self, a: Vec<usize>) {
        self.0.push(a);
    }

    /// Removes the last offset; `a(0)` is never removed.
    pub fn pop(&mut self) -> Option<Vec<usize>> {
        if self.0.len() > 1 {
            self.0.pop()
        } else {
            None
        }
    }
}

/// An arrangement of the vertices of `g` such that vertices placed at
/// positions congruent mod `q_l` are pairwise non-adjacent. The identity is
/// returned when it qualifies; otherwise the lexicographically first
/// qualifying arrangement, or `None` if there is none.
pub fn residue_class_order(g: &Graph, q_l: usize) -> Option<Vec<usize>> {
    let q = g.order();
    if q_l == 0 {
        return None;
    }
    let identity: Vec<usize> = (0..q).collect();
    if classes_independent(g, &identity, q_l) {
        return Some(identity);
    }
    fn place(g: &Graph, q_l: usize, order: &mut Vec<usize>, used: &mut [bool], budget: &mut u64) -> bool {
        let s = order.len();
        if s == g.order() {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        for v in 0..g.order() {
            if used[v] || (s % q_l..s).step_by(q_l).any(|s2| g.has_edge(order[s2], v)) {
                continue;
            }
            used[v] = true;
            order.push(v);
            if place(g, q_l, order, used, budget) {
                return true;
            }
            order.pop();
            used[v] = false;
        }
        false
    }
    let mut order = Vec::with_capacity(q);
    let mut used = vec![false; q];
    let mut budget = 1_000_000;
    place(g, q_l, &mut order, &mut used, &mut budget).then_some(order)
}

fn classes_independent(g: &Graph, order: &[usize], q_l: usize) -> bool {
    (0..order.len()).all(|s| (s % q_l..s).step_by(q_l).all(|s2| !g.has_edge(order[s], order[s2])))
}

/// Everything the induction needs about `H = G_1 □ ... □ G_{l-1} □ G`.
///
/// The first `l - 1` factors are held in *working order*: a permutation of
/// the input order that puts a minimum-order factor at position `l - 1`.
/// Prefix indices, digit vectors and offsets handled by this type are all in
/// working order; [`construct_labelling`] maps labels back to the input
/// coordinates.
#[derive(Debug, Clone)]
pub struct ConstructionContext {
    prefix: Vec<Graph>,
    last: Graph,
    permutation: Vec<usize>,
    // slice index -> vertex of G
    slice_order: Vec<usize>,
    radix: RadixSpec,
    q_l: u64,
    l: usize,
    prefix_size: usize,
    // input-order prefix index of each working-order prefix index
    to_input_prefix: Vec<usize>,
    // for every prefix p: (p', dist) with dist <= l, sorted by p'
    near: Vec<Vec<(usize, usize)>>,
    last_dist: Vec<Vec<Distance>>,
}

impl ConstructionContext {
    pub fn new(prefix_factors: &[Graph], last: &Graph, q_l: usize) -> Result<Self> {
        let l = prefix_factors.len() + 1;
        if l < 3 {
            return invalid(format!("construction needs l >= 3 (got {l})"));
        }
        if let Some(f) = prefix_factors.iter().chain(std::iter::once(last)).find(|f| f.order() < 2) {
            return invalid(format!("factor {:?} is trivial (order < 2)", f.name()));
        }
        let q = last.order();
        if q_l == 0 || q_l > q {
            return invalid(format!("q_l must satisfy 1 <= q_l <= q = {q} (got {q_l})"));
        }

        let input_orders: Vec<usize> = prefix_factors.iter().map(Graph::order).collect();
        let min = *input_orders.iter().min().expect("l >= 3");
        let argmin = input_orders.iter().rposition(|&o| o == min).expect("min exists");
        let mut permutation: Vec<usize> = (0..l - 1).collect();
        permutation.swap(argmin, l - 2);
        let prefix: Vec<Graph> = permutation.iter().map(|&j| prefix_factors[j].clone()).collect();
        let orders: Vec<usize> = prefix.iter().map(Graph::order).collect();

        let mut radix_orders = orders.clone();
        radix_orders.push(q_l);
        let radix = RadixSpec::new(&radix_orders)?;
        let prefix_size = orders
            .iter()
            .try_fold(1usize, |acc, &o| acc.checked_mul(o))
            .ok_or(Error::Overflow("prefix size"))?;

        // input-order strides
        let mut input_strides = vec![1usize; l - 1];
        for i in (0..l - 2).rev() {
            input_strides[i] = input_strides[i + 1] * input_orders[i + 1];
        }
        let digits: Vec<Vec<usize>> = (0..prefix_size).map(|p| decode_prefix(&orders, p)).collect();
        let to_input_prefix = digits
            .iter()
            .map(|d| d.iter().zip(&permutation).map(|(&x, &j)| x * input_strides[j]).sum())
            .collect();

        let factor_dist: Vec<Vec<Vec<Distance>>> = prefix.iter().map(Graph::all_pairs_distances).collect();
        let near = (0..prefix_size)
            .map(|p| {
                (0..prefix_size)
                    .filter_map(|p2| {
                        let mut total = 0;
                        for (i, table) in factor_dist.iter().enumerate() {
                            total += table[digits[p][i]][digits[p2][i]].finite()?;
                            if total > l {
                                return None;
                            }
                        }
                        Some((p2, total))
                    })
                    .collect()
            })
            .collect();

        let slice_order = residue_class_order(last, q_l).unwrap_or_else(|| (0..q).collect());
        let mut ctx = ConstructionContext {
            prefix,
            last: last.clone(),
            permutation,
            slice_order: Vec::new(),
            radix,
            q_l: q_l as u64,
            l,
            prefix_size,
            to_input_prefix,
            near,
            last_dist: Vec::new(),
        };
        ctx.set_slice_order(slice_order)?;
        Ok(ctx)
    }

    /// Replaces the slice arrangement; `order[s]` is the vertex of `G`
    /// labelled as slice `s`.
    pub fn with_slice_order(mut self, order: Vec<usize>) -> Result<Self> {
        self.set_slice_order(order)?;
        Ok(self)
    }

    fn set_slice_order(&mut self, order: Vec<usize>) -> Result<()> {
        let q = self.last.order();
        let mut seen = vec![false; q];
        if order.len() != q || order.iter().any(|&v| v >= q || std::mem::replace(&mut seen[v], true)) {
            return invalid(format!("slice order must be a permutation of 0..{q}"));
        }
        let dist = self.last.all_pairs_distances();
        self.last_dist = order.iter().map(|&a| order.iter().map(|&b| dist[a][b]).collect()).collect();
        self.slice_order = order;
        Ok(())
    }

    /// `slice_order()[s]` is the vertex of `G` forming slice `s`.
    pub fn slice_order(&self) -> &[usize] {
        &self.slice_order
    }

    /// Whether every residue class of slices is an independent set of `G`.
    pub fn residue_classes_independent(&self) -> bool {
        classes_independent(&self.last, &self.slice_order, self.q_l as usize)
    }

    /// Splits a product after its first `l - 1` factors; `G` is the product
    /// of the remaining ones. Flat vertex indices of `pg` then coincide with
    /// those of the constructed labelling.
    pub fn from_product(pg: &ProductGraph, l: usize, q_l: usize) -> Result<Self> {
        let d = pg.factors().len();
        if l < 3 || l > d {
            return invalid(format!("split point l = {l} must satisfy 3 <= l <= {d}"));
        }
        let prefix = &pg.factors()[..l - 1];
        let rest = &pg.factors()[l - 1..];
        let last = if rest.len() == 1 {
            rest[0].clone()
        } else {
            ProductGraph::cartesian(rest.to_vec())?.into_graph()
        };
        ConstructionContext::new(prefix, &last, q_l)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn q_l(&self) -> u64 {
        self.q_l
    }

    /// Order `q` of the last factor `G`.
    pub fn q(&self) -> usize {
        self.last.order()
    }

    pub fn radix(&self) -> &RadixSpec {
        &self.radix
    }

    /// `permutation()[j]` is the input index of the working-order factor `j`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Prefix factors in working order.
    pub fn prefix_factors(&self) -> &[Graph] {
        &self.prefix
    }

    pub fn last_factor(&self) -> &Graph {
        &self.last
    }

    pub fn prefix_orders(&self) -> &[usize] {
        &self.radix.orders()[..self.l - 1]
    }

    /// Number of offset candidates, `q_1 ... q_{l-1} = N_1 / q_l`.
    pub fn candidate_count(&self) -> usize {
        self.prefix_size
    }

    pub fn n1(&self) -> u64 {
        self.radix.n1()
    }

    /// Operands of `q_1 ... q_{l-1} > 3 (min q_i + 1) q`: returns
    /// `(lhs, rhs, holds)`.
    pub fn sufficient_condition(&self) -> (u128, u128, bool) {
        let lhs = self.prefix_size as u128;
        let min = *self.prefix_orders().iter().min().expect("nonempty") as u128;
        let rhs = 3 * (min + 1) * self.q() as u128;
        (lhs, rhs, lhs > rhs)
    }

    pub fn candidate(&self, index: usize) -> Vec<usize> {
        decode_prefix(self.prefix_orders(), index)
    }

    /// Working-order vertex `(x_1, ..., x_{l-1}, s)`, with `s` a slice
    /// index, to the flat index of the input-order product.
    pub fn input_vertex(&self, digits: &[usize]) -> Result<usize> {
        let (p, s) = self.split_vertex(digits)?;
        Ok(self.flat(p, s))
    }

    fn flat(&self, p: usize, s: usize) -> usize {
        self.to_input_prefix[p] * self.q() + self.slice_order[s]
    }

    fn split_vertex(&self, digits: &[usize]) -> Result<(usize, usize)> {
        if digits.len() != self.l {
            return invalid(format!("vertex needs {} coordinates, got {}", self.l, digits.len()));
        }
        let orders = self.prefix_orders();
        let mut p = 0;
        for (i, (&x, &q)) in digits[..self.l - 1].iter().zip(orders).enumerate() {
            if x >= q {
                return invalid(format!("coordinate {i} = {x} exceeds factor order {q}"));
            }
            p = p * q + x;
        }
        let x = digits[self.l - 1];
        if x >= self.q() {
            return invalid(format!("last coordinate {x} exceeds order {}", self.q()));
        }
        Ok((p, x))
    }

    /// Label of prefix `p` in a slice with offset `a` and residue `r`.
    fn slice_label(&self, a: &[usize], p: usize, r: u64) -> u64 {
        let orders = self.prefix_orders();
        let suffix = self.radix.suffix_products();
        let mut rem = p;
        let mut label = r;
        for i in (0..self.l - 1).rev() {
            let x = rem % orders[i];
            rem /= orders[i];
            label += ((a[i] + x) % orders[i]) as u64 * suffix[i + 1];
        }
        label
    }

    fn slice_labels(&self, a: &[usize], x: usize) -> Vec<u64> {
        let r = x as u64 % self.q_l;
        (0..self.prefix_size).map(|p| self.slice_label(a, p, r)).collect()
    }

    fn check_offset(&self, a: &[usize]) -> Result<()> {
        if a.len() != self.l - 1 || a.iter().zip(self.prefix_orders()).any(|(&z, &q)| z >= q) {
            return invalid(format!("offset {a:?} does not fit the prefix orders {:?}", self.prefix_orders()));
        }
        Ok(())
    }

    /// The label of vertex `(x_1, ..., x_{l-1}, x)` (working order) under
    /// the offsets `offsets`.
    pub fn phi_evaluate(&self, offsets: &OffsetSet, vertex: &[usize]) -> Result<u64> {
        let (p, x) = self.split_vertex(vertex)?;
        let a = offsets
            .get(x)
            .ok_or_else(|| Error::InvalidArgument(format!("slice {x} has no offset yet ({} defined)", offsets.len())))?;
        self.check_offset(a)?;
        Ok(self.slice_label(a, p, x as u64 % self.q_l))
    }

    /// Whether the pair `u, v` (working-order digit vectors, both slices
    /// covered by `offsets`) meets its requirement: separation `q_l` at
    /// distance 1, distinct labels at distance `2..=l`, nothing beyond.
    pub fn slice_pair_ok(&self, offsets: &OffsetSet, u: &[usize], v: &[usize]) -> Result<bool> {
        let (pu, xu) = self.split_vertex(u)?;
        let (pv, xv) = self.split_vertex(v)?;
        if (pu, xu) == (pv, xv) {
            return invalid("slice_pair_ok needs two distinct vertices");
        }
        let Some(dist) = self.distance(pu, xu, pv, xv) else {
            return Ok(true);
        };
        if dist > self.l {
            return Ok(true);
        }
        let lu = self.phi_evaluate(offsets, u)?;
        let lv = self.phi_evaluate(offsets, v)?;
        Ok(cyclic_distance_unchecked(lu, lv, self.n1()) >= self.requirement(dist))
    }

    fn requirement(&self, dist: usize) -> u64 {
        if dist == 1 {
            self.q_l
        } else {
            1
        }
    }

    fn distance(&self, pu: usize, xu: usize, pv: usize, xv: usize) -> Option<usize> {
        let dg = self.last_dist[xu][xv].finite()?;
        let pd = self.near[pu].binary_search_by_key(&pv, |&(p, _)| p).ok().map(|i| self.near[pu][i].1);
        match pd {
            Some(d) => Some(d + dg),
            // prefix pair already beyond l (or unreachable): report something > l
            None => Some(self.l + 1),
        }
    }

    /// First failing pair for offset `z` at slice `t = earlier.len()`, given
    /// the label tables of the earlier slices.
    fn first_violation(&self, earlier: &[Vec<u64>], z: &[usize]) -> Option<CandidateViolation> {
        let t = earlier.len();
        let n1 = self.n1();
        let current = self.slice_labels(z, t);
        for y in (0..=t).rev() {
            let Some(dg) = self.last_dist[t][y].finite() else { continue };
            if dg > self.l {
                continue;
            }
            let other = if y == t { &current } else { &earlier[y] };
            for (p, (near, &here)) in self.near.iter().zip(&current).enumerate() {
                for &(p2, pd) in near {
                    if y == t && p2 <= p {
                        continue;
                    }
                    let dist = pd + dg;
                    if dist > self.l {
                        continue;
                    }
                    let required = self.requirement(dist);
                    let observed = cyclic_distance_unchecked(here, other[p2], n1);
                    if observed < required {
                        return Some(CandidateViolation {
                            candidate: z.to_vec(),
                            u: self.flat(p, t),
                            v: self.flat(p2, y),
                            distance: dist,
                            required,
                            observed,
                        });
                    }
                }
            }
        }
        None
    }

    fn earlier_labels(&self, offsets: &OffsetSet) -> Vec<Vec<u64>> {
        offsets.vectors().iter().enumerate().map(|(x, a)| self.slice_labels(a, x)).collect()
    }

    fn check_step(&self, offsets: &OffsetSet) -> Result<usize> {
        let t = offsets.len();
        if t == 0 {
            return invalid("offset set must already contain a(0)");
        }
        if t >= self.q() {
            return invalid(format!("all {} slices already have offsets", self.q()));
        }
        for a in offsets.vectors() {
            self.check_offset(a)?;
        }
        Ok(t)
    }

    /// Case-1 pre-filter: accepts `z` iff
    /// `|sum_i ((z_i - a_i(y)) mod q_i) N_{i+1}|_{N_1} >= 2 q_l`.
    pub fn case1_filter_psi(&self, a_y: &[usize], z: &[usize]) -> Result<bool> {
        self.check_offset(a_y)?;
        self.check_offset(z)?;
        let suffix = self.radix.suffix_products();
        let psi: u64 = z
            .iter()
            .zip(a_y)
            .zip(self.prefix_orders())
            .enumerate()
            .map(|(i, ((&zi, &ai), &q))| ((zi + q - ai) % q) as u64 * suffix[i + 1])
            .sum();
        Ok(cyclic_distance_unchecked(psi, 0, self.n1()) >= 2 * self.q_l)
    }

    fn passes_psi_filter(&self, offsets: &OffsetSet, t: usize, z: &[usize]) -> bool {
        (0..t).all(|y| {
            !self.last_dist[t][y].is_within(self.l)
                || self.case1_filter_psi(offsets.vectors()[y].as_slice(), z).unwrap_or(false)
        })
    }

    /// Picks `a(t)` for `t = offsets.len()`: the lexicographically smallest
    /// candidate under which every pair touching slice `t` is feasible.
    /// Returns the offset and how many candidates were rejected before it.
    pub fn choose_offset(&self, offsets: &OffsetSet) -> Result<(Vec<usize>, usize)> {
        self.choose_offset_with(offsets, false)
    }

    /// As [`choose_offset`](Self::choose_offset); with `psi_prefilter` set,
    /// candidates rejected by [`case1_filter_psi`](Self::case1_filter_psi)
    /// for any earlier slice within distance `l` are skipped without a pair
    /// sweep. The filter is conservative, so the chosen offset may differ
    /// from the unfiltered one; it is still fully checked.
    pub fn choose_offset_with(&self, offsets: &OffsetSet, psi_prefilter: bool) -> Result<(Vec<usize>, usize)> {
        let t = self.check_step(offsets)?;
        let earlier = self.earlier_labels(offsets);
        match self.next_admissible(offsets, &earlier, 0, psi_prefilter) {
            Some(c) => Ok((self.candidate(c), c)),
            None => Err(self.stuck(&earlier, t)),
        }
    }

    fn next_admissible(&self, offsets: &OffsetSet, earlier: &[Vec<u64>], from: usize, psi_prefilter: bool) -> Option<usize> {
        let t = offsets.len();
        (from..self.prefix_size).into_par_iter().find_first(|&c| {
            let z = self.candidate(c);
            (!psi_prefilter || self.passes_psi_filter(offsets, t, &z)) && self.first_violation(earlier, &z).is_none()
        })
    }

    fn stuck(&self, earlier: &[Vec<u64>], t: usize) -> Error {
        let rejected = (0..self.prefix_size)
            .into_par_iter()
            .filter_map(|c| self.first_violation(earlier, &self.candidate(c)))
            .collect();
        Error::ConstructionStuck { t, rejected }
    }

    /// Number of candidates for `a(t)` that pass the full pair check.
    pub fn admissible_count(&self, offsets: &OffsetSet) -> Result<usize> {
        self.check_step(offsets)?;
        let earlier = self.earlier_labels(offsets);
        Ok((0..self.prefix_size)
            .into_par_iter()
            .filter(|&c| self.first_violation(&earlier, &self.candidate(c)).is_none())
            .count())
    }

    /// Full labelling of `H` in input vertex order for a complete offset set.
    pub fn labelling(&self, offsets: &OffsetSet) -> Result<Labelling> {
        if offsets.len() != self.q() {
            return invalid(format!("need {} offsets, got {}", self.q(), offsets.len()));
        }
        let mut labels = vec![0u64; self.prefix_size * self.q()];
        for (x, a) in offsets.vectors().iter().enumerate() {
            self.check_offset(a)?;
            for (p, label) in self.slice_labels(a, x).into_iter().enumerate() {
                labels[self.flat(p, x)] = label;
            }
        }
        Labelling::cyclic(labels, self.n1())
    }
}

fn decode_prefix(orders: &[usize], mut index: usize) -> Vec<usize> {
    let mut digits = vec![0; orders.len()];
    for i in (0..orders.len()).rev() {
        digits[i] = index % orders[i];
        index /= orders[i];
    }
    digits
}

/// Serializable record of one construction run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub permutation: Vec<usize>,
    pub slice_order: Vec<usize>,
    pub offsets: Vec<Vec<usize>>,
    pub candidates_rejected_per_t: Vec<usize>,
    #[serde(default)]
    pub backtracks: u64,
}

#[derive(Debug, Clone)]
pub struct Construction {
    /// Cyclic labelling with modulus `N_1`, indexed like the input product.
    pub labelling: Labelling,
    /// Offsets in working (permuted) coordinate order.
    pub offsets: OffsetSet,
    pub permutation: Vec<usize>,
    pub slice_order: Vec<usize>,
    /// Candidates rejected before the chosen one, for `t = 1, ..., q - 1`.
    pub rejected_per_t: Vec<usize>,
    /// Dead ends backed out of; zero when the greedy pass succeeded.
    pub backtracks: u64,
    /// Whether `q_1 ... q_{l-1} > 3 (min q_i + 1) q` held, i.e. success was
    /// guaranteed rather than opportunistic.
    pub guaranteed: bool,
}

impl Construction {
    pub fn trace(&self) -> ConstructionTrace {
        ConstructionTrace {
            permutation: self.permutation.clone(),
            slice_order: self.slice_order.clone(),
            offsets: self.offsets.vectors().to_vec(),
            candidates_rejected_per_t: self.rejected_per_t.clone(),
            backtracks: self.backtracks,
        }
    }

    /// The cyclic invariant value `N_1 - 1`.
    pub fn value(&self) -> u64 {
        self.labelling.span()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstructOptions {
    pub psi_prefilter: bool,
    /// Maximum number of dead ends to back out of before giving up. Zero
    /// gives the plain greedy induction.
    pub backtrack_budget: u64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions { psi_prefilter: false, backtrack_budget: 1_000 }
    }
}

/// Runs the induction on a prepared context. Offsets are chosen
/// lexicographically first; when some `a(t)` has no admissible candidate
/// the search backs up depth first and resumes the previous step after its
/// last choice. When the greedy pass succeeds the result is identical to
/// it. On failure the error describes the first dead end met.
pub fn construct_with(ctx: &ConstructionContext, opts: ConstructOptions) -> Result<Construction> {
    let q = ctx.q();
    let mut offsets = OffsetSet::initial(ctx.l() - 1);
    let mut earlier = ctx.earlier_labels(&offsets);
    let mut chosen: Vec<usize> = Vec::with_capacity(q.saturating_sub(1));
    let mut cursor = 0;
    let mut backtracks = 0u64;
    let mut first_dead_end = None;
    while offsets.len() < q {
        let t = offsets.len();
        match ctx.next_admissible(&offsets, &earlier, cursor, opts.psi_prefilter) {
            Some(c) => {
                let a = ctx.candidate(c);
                earlier.push(ctx.slice_labels(&a, t));
                offsets.push(a);
                chosen.push(c);
                cursor = 0;
            }
            None => {
                let dead_end = first_dead_end.get_or_insert_with(|| ctx.stuck(&earlier, t));
                if chosen.is_empty() || backtracks >= opts.backtrack_budget {
                    return Err(std::mem::replace(dead_end, Error::CertificateMissing));
                }
                backtracks += 1;
                offsets.pop();
                earlier.pop();
                cursor = chosen.pop().map_or(0, |c| c + 1);
            }
        }
    }
    Ok(Construction {
        labelling: ctx.labelling(&offsets)?,
        offsets,
        permutation: ctx.permutation().to_vec(),
        slice_order: ctx.slice_order().to_vec(),
        rejected_per_t: chosen,
        backtracks,
        guaranteed: ctx.sufficient_condition().2,
    })
}

/// Builds the labelling of `G_1 □ ... □ G_{l-1} □ G` at separation `q_l`.
/// The sufficient size condition is recorded in the result but not
/// enforced; failure surfaces as [`Error::ConstructionStuck`].
pub fn construct_labelling(prefix_factors: &[Graph], last: &Graph, q_l: usize) -> Result<Construction> {
    let ctx = ConstructionContext::new(prefix_factors, last, q_l)?;
    construct_with(&ctx, ConstructOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ProductGraph;
    use crate::labelling::{verify_cyclic, verify_linear, HVector};

    fn k(q: usize) -> Graph {
        Graph::complete(q).unwrap()
    }

    #[test]
    fn radix_examples() {
        assert_eq!(RadixSpec::new(&[3, 2, 2]).unwrap().suffix_products(), &[12, 4, 2, 1]);
        assert_eq!(RadixSpec::new(&[2; 7]).unwrap().n1(), 128);
        assert_eq!(RadixSpec::new(&[19, 2, 2]).unwrap().n1(), 76);
        assert!(RadixSpec::new(&[2, 0]).is_err());

        let r = RadixSpec::new(&[2, 2, 2]).unwrap();
        assert_eq!(r.encode(&[1, 0, 1]).unwrap(), 5);
        let r = RadixSpec::new(&[3, 2, 2]).unwrap();
        assert_eq!(r.decode(11).unwrap(), vec![2, 1, 1]);
        assert!(r.decode(12).is_err());
        assert!(r.encode(&[3, 0, 0]).is_err());

        let r = RadixSpec::new(&[19, 2, 2]).unwrap();
        for v in 0..r.n1() {
            assert_eq!(r.encode(&r.decode(v).unwrap()).unwrap(), v);
        }
    }

    #[test]
    fn residues() {
        assert_eq!(residue(5, 2).unwrap(), 1);
        assert_eq!(residue(0, 4).unwrap(), 0);
        assert_eq!(residue(7, 3).unwrap(), 1);
        assert!(residue(1, 0).is_err());
    }

    #[test]
    fn phi_examples() {
        // prefix orders (3, 2), q_l = 2, G = K_2
        let ctx = ConstructionContext::new(&[k(3), k(2)], &k(2), 2).unwrap();
        assert_eq!(ctx.permutation(), &[0, 1]);
        let mut a = OffsetSet::initial(2);
        assert_eq!(ctx.phi_evaluate(&a, &[2, 1, 0]).unwrap(), 10);
        a.push(vec![1, 1]);
        assert_eq!(ctx.phi_evaluate(&a, &[2, 0, 1]).unwrap(), 3);
        assert!(ctx.phi_evaluate(&OffsetSet::initial(2), &[0, 0, 1]).is_err());

        // slice 0 labels are distinct multiples of q_l
        let zero = OffsetSet::initial(2);
        let mut seen: Vec<u64> = (0..3)
            .flat_map(|x1| (0..2).map(move |x2| (x1, x2)))
            .map(|(x1, x2)| ctx.phi_evaluate(&zero, &[x1, x2, 0]).unwrap())
            .collect();
        seen.sort();
        assert_eq!(seen, vec![0, 2, 4, 6, 8, 10]);
    }

    #[test]
    fn permutation_moves_minimum_last() {
        let ctx = ConstructionContext::new(&[k(2), k(5), k(3)], &k(2), 2).unwrap();
        assert_eq!(ctx.permutation(), &[2, 1, 0]);
        assert_eq!(ctx.prefix_orders(), &[3, 5, 2]);
    }

    #[test]
    fn slice_pair_examples() {
        let ctx = ConstructionContext::new(&[k(3), k(2)], &k(2), 2).unwrap();
        let mut a = OffsetSet::initial(2);
        assert!(ctx.slice_pair_ok(&a, &[0, 0, 0], &[2, 1, 0]).unwrap());
        // same prefix, adjacent slices, equal offsets: separation 1 < q_l
        a.push(vec![0, 0]);
        assert!(!ctx.slice_pair_ok(&a, &[1, 0, 1], &[1, 0, 0]).unwrap());
        assert!(ctx.slice_pair_ok(&a, &[1, 0, 1], &[1, 0, 1]).is_err());

        // beyond distance l nothing is required
        let far = ConstructionContext::new(&[Graph::path(5).unwrap(), k(2)], &k(2), 2).unwrap();
        let mut a = OffsetSet::initial(2);
        a.push(vec![0, 0]);
        assert!(far.slice_pair_ok(&a, &[0, 0, 1], &[4, 1, 0]).unwrap());
    }

    #[test]
    fn psi_filter_examples() {
        let ctx = ConstructionContext::new(&[k(19), k(2)], &ProductGraph::hamming(&[2, 2]).unwrap().into_graph(), 2)
            .unwrap();
        let a = [3usize, 1];
        assert!(!ctx.case1_filter_psi(&a, &a).unwrap());
        // psi / q_l = 1 and = N_1/q_l - 1 are rejected
        assert!(!ctx.case1_filter_psi(&[0, 0], &[0, 1]).unwrap());
        assert!(!ctx.case1_filter_psi(&[1, 1], &[0, 0]).unwrap());
        let accepted = (0..ctx.candidate_count())
            .filter(|&c| ctx.case1_filter_psi(&[0, 0], &ctx.candidate(c)).unwrap())
            .count();
        assert_eq!(accepted, 38 - 3);
    }

    #[test]
    fn hamming_19_2_2_2() {
        let pg = ProductGraph::hamming(&[19, 2, 2, 2]).unwrap();
        let ctx = ConstructionContext::from_product(&pg, 3, 2).unwrap();
        let (lhs, rhs, holds) = ctx.sufficient_condition();
        assert_eq!((lhs, rhs, holds), (38, 36, true));

        let mut offsets = OffsetSet::initial(2);
        for _ in 1..4 {
            assert!(ctx.admissible_count(&offsets).unwrap() >= 2);
            let (a, _) = ctx.choose_offset(&offsets).unwrap();
            offsets.push(a);
        }
        let c = construct_with(&ctx, ConstructOptions::default()).unwrap();
        assert_eq!(c.offsets, offsets);
        assert_eq!(c.value(), 75);
        assert!(c.labelling.is_no_hole());
        let h = HVector::leading(2, 3).unwrap();
        assert!(verify_cyclic(pg.graph(), &h, &c.labelling, 76).unwrap().pass);
        let lin = c.labelling.to_linear();
        assert!(verify_linear(pg.graph(), &h, &lin).unwrap().pass);
        assert_eq!(lin.span(), 75);
    }

    #[test]
    fn psi_prefilter_still_sound() {
        let pg = ProductGraph::hamming(&[19, 2, 2, 2]).unwrap();
        let ctx = ConstructionContext::from_product(&pg, 3, 2).unwrap();
        let c = construct_with(&ctx, ConstructOptions { psi_prefilter: true, ..Default::default() }).unwrap();
        let h = HVector::leading(2, 3).unwrap();
        assert!(verify_cyclic(pg.graph(), &h, &c.labelling, 76).unwrap().pass);
    }

    #[test]
    fn parameter_errors() {
        assert!(ConstructionContext::new(&[k(3)], &k(2), 1).is_err());
        assert!(ConstructionContext::new(&[k(3), k(3)], &k(2), 3).is_err());
        assert!(ConstructionContext::new(&[k(3), k(3)], &k(2), 0).is_err());
        assert!(ConstructionContext::new(&[k(3), k(1)], &k(2), 1).is_err());
    }

    #[test]
    fn undersized_instance_is_sound() {
        match construct_labelling(&[k(2), k(2)], &k(6), 2) {
            Ok(c) => {
                let pg = ProductGraph::cartesian(vec![k(2), k(2), k(6)]).unwrap();
                let h = HVector::leading(2, 3).unwrap();
                assert!(verify_cyclic(pg.graph(), &h, &c.labelling, c.labelling.modulus().unwrap())
                    .unwrap()
                    .pass);
            }
            Err(Error::ConstructionStuck { t, rejected }) => {
                assert!(t >= 1);
                assert_eq!(rejected.len(), 4);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
