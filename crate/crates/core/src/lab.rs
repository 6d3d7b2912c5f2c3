//! Hypothesis checkers and end-to-end experiments: construct, verify,
//! certify, and repeat on sandwich graphs between the certificate and the
//! full product.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::construct::{construct_with, ConstructOptions, ConstructionContext, ConstructionTrace};
use crate::error::{invalid, Error, Result};
use crate::graph::{Distance, Graph, ProductGraph};
use crate::labelling::{colouring_from_labelling, verify_cyclic, verify_linear, HVector, Labelling, VerificationReport};
use crate::solver::certificate_check;

/// One evaluated inequality with everything needed to recheck it by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub formula: String,
    pub operands: BTreeMap<String, Value>,
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

fn product(xs: &[usize], what: &'static str) -> Result<u128> {
    xs.iter().try_fold(1u128, |acc, &x| acc.checked_mul(x as u128).ok_or(Error::Overflow(what)))
}

fn mul(a: u128, b: u128, what: &'static str) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow(what))
}

fn report(name: &str, formula: &str, operands: Value, lhs: u128, rhs: u128, holds: bool) -> ConditionReport {
    let operands = match operands {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    ConditionReport { name: name.into(), formula: formula.into(), operands, lhs, rhs, holds }
}

/// `q_1 ... q_{l-1} > 3 (min q_i + 1) q` for prefix orders `q_1..q_{l-1}`.
pub fn check_product_condition(prefix: &[usize], q: usize) -> Result<ConditionReport> {
    if prefix.len() < 2 {
        return invalid("the product condition needs l >= 3, i.e. at least two prefix orders");
    }
    let lhs = product(prefix, "prefix order product")?;
    let min = *prefix.iter().min().expect("nonempty") as u128;
    let rhs = mul(3 * (min + 1), q as u128, "product condition bound")?;
    Ok(report(
        "product",
        "q_1*...*q_{l-1} > 3*(min(q_1..q_{l-1})+1)*q",
        json!({ "prefix_orders": prefix, "min": min as u64, "q": q }),
        lhs,
        rhs,
        lhs > rhs,
    ))
}

/// `q_1 ... q_{l-1} > 3 (q_{l-1} + 1) q_l ... q_d` for nonincreasing
/// orders and `3 <= l < d`.
pub fn check_hamming_condition(orders: &[usize], l: usize) -> Result<ConditionReport> {
    let d = orders.len();
    if l < 3 || l >= d {
        return invalid(format!("need 3 <= l < d, got l = {l}, d = {d}"));
    }
    if orders.windows(2).any(|w| w[0] < w[1]) || orders.iter().any(|&q| q < 2) {
        return invalid(format!("orders must be nonincreasing and >= 2, got {orders:?}"));
    }
    let lhs = product(&orders[..l - 1], "hamming prefix product")?;
    let tail = product(&orders[l - 1..], "hamming tail product")?;
    let rhs = mul(3 * (orders[l - 2] as u128 + 1), tail, "hamming condition bound")?;
    Ok(report(
        "hamming",
        "q_1*...*q_{l-1} > 3*(q_{l-1}+1)*q_l*...*q_d",
        json!({ "orders": orders, "l": l }),
        lhs,
        rhs,
        lhs > rhs,
    ))
}

/// `(d + 4 + max(4 - q, 0)) / 2 <= l < d`, reported as
/// `lhs = d + 4 + max(4 - q, 0)` against `rhs = 2 l`.
pub fn check_hypercube_condition(d: usize, q: usize, l: usize) -> Result<ConditionReport> {
    if d < 6 || q < 2 {
        return invalid(format!("need d >= 6 and q >= 2, got d = {d}, q = {q}"));
    }
    let lhs = (d + 4 + 4usize.saturating_sub(q)) as u128;
    let rhs = 2 * l as u128;
    Ok(report(
        "hypercube",
        "(d+4+max(4-q,0))/2 <= l < d",
        json!({ "d": d, "q": q, "l": l, "l_below_d": l < d }),
        lhs,
        rhs,
        lhs <= rhs && l < d,
    ))
}

/// The ball condition `q_1 ... q_l >= sum_{i=1}^{floor(l/2)} e_i(q_1 - 1, ..., q_d - 1)`
/// as printed, together with the ball count `sum + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallReport {
    pub condition: ConditionReport,
    pub ball_count: u128,
    pub holds_with_ball_count: bool,
    /// The printed condition and the ball-count reading disagree.
    pub discrepancy: bool,
}

pub fn necessary_ball_condition(orders: &[usize], l: usize) -> Result<BallReport> {
    let d = orders.len();
    if l < 1 || l > d {
        return invalid(format!("need 1 <= l <= d, got l = {l}, d = {d}"));
    }
    let l0 = l / 2;
    // e[i] = elementary symmetric sum of degree i of (q_j - 1)
    let mut e = vec![0u128; l0 + 1];
    e[0] = 1;
    for &q in orders {
        let w = q.saturating_sub(1) as u128;
        for i in (1..=l0).rev() {
            e[i] = e[i - 1]
                .checked_mul(w)
                .and_then(|x| x.checked_add(e[i]))
                .ok_or(Error::Overflow("ball size"))?;
        }
    }
    let rhs = e[1..].iter().try_fold(0u128, |a, &x| a.checked_add(x)).ok_or(Error::Overflow("ball size"))?;
    let lhs = product(&orders[..l], "ball condition product")?;
    let ball_count = rhs + 1;
    let holds = lhs >= rhs;
    let holds_with_ball_count = lhs >= ball_count;
    Ok(BallReport {
        condition: report(
            "ball",
            "q_1*...*q_l >= sum_{i=1}^{floor(l/2)} sum_{|S|=i} prod_{j in S} (q_j-1)",
            json!({ "orders": orders, "l": l, "l0": l0 }),
            lhs,
            rhs,
            holds,
        ),
        ball_count,
        holds_with_ball_count,
        discrepancy: holds != holds_with_ball_count,
    })
}

/// `q_1 ... q_l >= h + sum_i (q_i - 1)`.
pub fn necessary_neighbor_condition(orders: &[usize], l: usize, h: u64) -> Result<ConditionReport> {
    let d = orders.len();
    if h < 1 || l < 1 || l > d {
        return invalid(format!("need h >= 1 and 1 <= l <= d, got h = {h}, l = {l}, d = {d}"));
    }
    let lhs = product(&orders[..l], "neighbour condition product")?;
    let rhs = h as u128 + orders.iter().map(|&q| q as u128 - 1).sum::<u128>();
    Ok(report(
        "neighbour",
        "q_1*...*q_l >= h + sum_i (q_i-1)",
        json!({ "orders": orders, "l": l, "h": h }),
        lhs,
        rhs,
        lhs >= rhs,
    ))
}

/// Factor generators accepted in instance files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorSpec {
    Complete { n: usize },
    Path { n: usize },
    Cycle { n: usize },
    Star { n: usize },
    Broom { order: usize, diameter: usize },
    Edges { n: usize, edges: Vec<[usize; 2]> },
    /// A Hamming graph used as one (flattened) factor.
    Hamming { orders: Vec<usize> },
    Hypercube { d: usize },
}

impl FactorSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            FactorSpec::Complete { n } => Graph::complete(*n),
            FactorSpec::Path { n } => Graph::path(*n),
            FactorSpec::Cycle { n } => Graph::cycle(*n),
            FactorSpec::Star { n } => Graph::star(*n),
            FactorSpec::Broom { order, diameter } => Graph::broom(*order, *diameter),
            FactorSpec::Edges { n, edges } => {
                let e: Vec<_> = edges.iter().map(|e| (e[0], e[1])).collect();
                Graph::from_edges(*n, &e)
            }
            FactorSpec::Hamming { orders } => Ok(ProductGraph::hamming(orders)?.into_graph()),
            FactorSpec::Hypercube { d } => Ok(ProductGraph::hypercube(*d)?.into_graph()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateSpec {
    /// One vertex subset per factor; the certificate is their product.
    FactorSubsets(Vec<Vec<usize>>),
    Vertices(Vec<usize>),
}

fn default_density() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    pub factors: Vec<FactorSpec>,
    pub l: usize,
    pub h: u64,
    pub q_l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl InstanceSpec {
    /// `H_{q_1,...,q_d}` split after `l - 1` factors.
    pub fn hamming(orders: &[usize], l: usize, h: u64, q_l: usize) -> Self {
        InstanceSpec {
            name: format!("H({})", orders.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
            factors: orders.iter().map(|&n| FactorSpec::Complete { n }).collect(),
            l,
            h,
            q_l,
            certificate: None,
            seed: None,
            density: default_density(),
            samples: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.factors.len();
        if self.l < 3 || self.l > d {
            return invalid(format!("split point l = {} must satisfy 3 <= l <= {d}", self.l));
        }
        if self.h < 1 || self.h > self.q_l as u64 {
            return invalid(format!("need 1 <= h <= q_l, got h = {}, q_l = {}", self.h, self.q_l));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return invalid(format!("density {} outside [0, 1]", self.density));
        }
        Ok(())
    }

    pub fn product(&self) -> Result<ProductGraph> {
        let factors = self.factors.iter().map(FactorSpec::build).collect::<Result<Vec<_>>>()?;
        if let Some((i, f)) = factors.iter().enumerate().find(|(_, f)| f.order() < 2) {
            return invalid(format!("factor {i} ({}) has fewer than 2 vertices", f.name()));
        }
        Ok(ProductGraph::cartesian(factors)?.named(self.name.clone()))
    }

    pub fn hvector(&self) -> Result<HVector> {
        HVector::leading(self.h, self.l)
    }
}

/// A validated certificate vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub source: String,
    #[serde(skip)]
    pub vertices: Vec<usize>,
    pub order: usize,
    pub diameter: Distance,
    pub bound: u64,
}

fn validated(g: &Graph, vertices: Vec<usize>, l: usize, source: &str) -> Result<Certificate> {
    let bound = certificate_check(g, &vertices, l)?;
    let diameter = g.induced_subgraph(&vertices)?.graph.diameter();
    Ok(Certificate { source: source.into(), order: vertices.len(), vertices, diameter, bound })
}

/// The certificate for a split at `l` with separation `q_l`. A supplied
/// specification wins; otherwise Hamming-type products use all of factors
/// `1..l-1`, the first `q_l` vertices of factor `l` and vertex 0 of the
/// rest. Other products have no canonical choice.
pub fn canonical_certificate(
    pg: &ProductGraph,
    l: usize,
    q_l: usize,
    supplied: Option<&CertificateSpec>,
) -> Result<Certificate> {
    let d = pg.factors().len();
    if l < 1 || l > d {
        return invalid(format!("split point l = {l} outside 1..={d}"));
    }
    match supplied {
        Some(CertificateSpec::FactorSubsets(subsets)) => {
            validated(pg.graph(), pg.box_vertices(subsets)?, l, "factor-subsets")
        }
        Some(CertificateSpec::Vertices(vs)) => {
            let mut vs = vs.clone();
            vs.sort_unstable();
            vs.dedup();
            validated(pg.graph(), vs, l, "explicit")
        }
        None if pg.is_hamming() => {
            if q_l < 1 || q_l > pg.factors()[l - 1].order() {
                return invalid(format!("q_l = {q_l} does not fit factor {l}"));
            }
            let subsets: Vec<Vec<usize>> = pg
                .factors()
                .iter()
                .enumerate()
                .map(|(i, f)| match i {
                    i if i < l - 1 => (0..f.order()).collect(),
                    i if i == l - 1 => (0..q_l).collect(),
                    _ => vec![0],
                })
                .collect();
            validated(pg.graph(), pg.box_vertices(&subsets)?, l, "canonical-hamming")
        }
        None => Err(Error::CertificateMissing),
    }
}

/// Admissible orders `q` of `G` for a generated non-Hamming instance:
/// `q_2 ... q_{l-1} q_l <= q` and `3 (q_{l-1} + 1) q < q_1 q_2 ... q_{l-2} q_l`.
pub fn non_hamming_window(q1: usize, middle: &[usize], q_l: usize) -> Result<std::ops::Range<u128>> {
    let Some(&q_last) = middle.last() else {
        return invalid("need at least one middle order (l >= 3)");
    };
    if middle.iter().chain([&q1]).any(|&q| q < q_last) || q_last < 2 {
        return invalid(format!("q_{{l-1}} = {q_last} must be the minimum prefix order and >= 2"));
    }
    let side = mul(3 * q_last as u128, q_last as u128 + 1, "q1 threshold")?;
    if side >= q1 as u128 {
        return invalid(format!("need 3 q_{{l-1}} (q_{{l-1}} + 1) = {side} < q_1 = {q1}"));
    }
    if q_l < 1 || q_l > q_last {
        return invalid(format!("need 1 <= q_l <= q_{{l-1}} = {q_last}, got {q_l}"));
    }
    let lo = mul(product(middle, "window")?, q_l as u128, "window")?;
    let top = mul(mul(q1 as u128, product(&middle[..middle.len() - 1], "window")?, "window")?, q_l as u128, "window")?;
    let step = 3 * (q_last as u128 + 1);
    // largest q with step * q < top
    let hi = top.div_ceil(step);
    if lo >= hi {
        return invalid(format!("empty window: {lo} <= q < {top}/{step}"));
    }
    Ok(lo..hi)
}

/// A graph of order `m` and diameter `l - 1` whose vertices split into
/// `q_l` independent classes.
fn non_hamming_core(middle: &[usize], q_l: usize) -> Result<Graph> {
    let l = middle.len() + 2;
    let m = product(middle, "core order")? as usize * q_l;
    if q_l == 1 {
        return Graph::broom(m, l - 1);
    }
    if l == 3 {
        let part = m / q_l;
        let mut edges = Vec::new();
        for u in 0..m {
            for v in u + 1..m {
                if u / part != v / part {
                    edges.push((u, v));
                }
            }
        }
        return Graph::from_edges(m, &edges);
    }
    let mut orders = middle.to_vec();
    orders.push(q_l);
    Ok(ProductGraph::hamming(&orders)?.into_graph())
}

/// Non-Hamming instance `K_{q_1} □ K_{q_2} □ ... □ K_{q_{l-1}} □ G` where
/// `G` has order `q` and contains a core `G*` of order `q_2 ... q_l` and
/// diameter `l - 1`: complete multipartite for `l = 3`, a Hamming graph for
/// larger `l`, and a broom when `q_l = 1`. Vertices beyond the core hang
/// off core vertex 0. The certificate is `K_{q_1} □ G*`.
pub fn non_hamming_instance(q1: usize, middle: &[usize], q_l: usize, q: Option<usize>, h: u64) -> Result<InstanceSpec> {
    let window = non_hamming_window(q1, middle, q_l)?;
    let q = q.map_or(window.start, |q| q as u128);
    if !window.contains(&q) {
        return invalid(format!("q = {q} outside the window {}..{}", window.start, window.end));
    }
    let q = q as usize;
    let core = non_hamming_core(middle, q_l)?;
    let m = core.order();
    let mut edges: Vec<[usize; 2]> = core.edges().map(|(u, v)| [u, v]).collect();
    edges.extend((m..q).map(|v| [0, v]));
    let l = middle.len() + 2;
    let mut factors = vec![FactorSpec::Complete { n: q1 }];
    factors.extend(middle.iter().map(|&n| FactorSpec::Complete { n }));
    factors.push(FactorSpec::Edges { n: q, edges });
    let mut subsets = vec![(0..q1).collect::<Vec<_>>()];
    subsets.extend(middle.iter().map(|_| vec![0]));
    subsets.push((0..m).collect());
    let name = format!(
        "K{q1}x{}xG{q}",
        middle.iter().map(|q| format!("K{q}")).collect::<Vec<_>>().join("x")
    );
    Ok(InstanceSpec {
        name,
        factors,
        l,
        h,
        q_l,
        certificate: Some(CertificateSpec::FactorSubsets(subsets)),
        seed: None,
        density: default_density(),
        samples: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub product: ConditionReport,
    pub hamming: Option<ConditionReport>,
    pub hypercube: Option<ConditionReport>,
    pub ball: Option<BallReport>,
    pub neighbour: Option<ConditionReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionOutcome {
    pub constructed: Option<u64>,
    /// The sufficient size condition held.
    pub guaranteed: bool,
    pub trace: Option<ConstructionTrace>,
    pub stuck_at: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub pass: bool,
    pub no_hole: bool,
    pub span: u64,
    pub violations: usize,
    pub pairs_checked: u64,
}

impl CheckSummary {
    fn new(r: &VerificationReport, span: u64) -> Self {
        CheckSummary {
            pass: r.pass,
            no_hole: r.no_hole,
            span,
            violations: r.violations.len(),
            pairs_checked: r.total_pairs(),
        }
    }
}

/// Bounds established for one invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantOutcome {
    pub invariant: String,
    pub upper: Option<u64>,
    pub lower: Option<u64>,
    pub value: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChromaticOutcome {
    pub colours: u64,
    pub proper: bool,
    pub pairs_checked: u64,
    /// Order of the certificate clique in `H^l`.
    pub clique: Option<u64>,
    pub value: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub construct_ms: f64,
    pub verify_ms: f64,
    pub certify_ms: f64,
    pub colour_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub instance: String,
    pub orders: Vec<usize>,
    pub n: usize,
    pub l: usize,
    pub h: u64,
    pub q_l: usize,
    /// `q_1 ... q_l - 1`.
    pub target: u64,
    pub conditions: Conditions,
    pub construction: ConstructionOutcome,
    pub cyclic_check: Option<CheckSummary>,
    pub linear_check: Option<CheckSummary>,
    pub certificate: Option<Certificate>,
    pub certificate_error: Option<String>,
    pub invariants: Vec<InvariantOutcome>,
    pub chromatic: Option<ChromaticOutcome>,
    pub reproduced: bool,
    pub timings: Timings,
}

impl ExperimentReport {
    /// Row for the summary table.
    pub fn summary_row(&self) -> SummaryRow {
        SummaryRow {
            instance: self.instance.clone(),
            l: self.l,
            h: self.h,
            condition: self.conditions.product.holds,
            constructed: self.construction.constructed.map_or("stuck".into(), |v| v.to_string()),
            certificate: self.certificate.as_ref().map_or("none".into(), |c| c.bound.to_string()),
            reproduced: self.reproduced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub l: usize,
    pub h: u64,
    pub condition: bool,
    pub constructed: String,
    pub certificate: String,
    pub reproduced: bool,
}

/// Everything an experiment produced, for reuse by sandwich runs.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: ExperimentReport,
    pub product: ProductGraph,
    pub labelling: Option<Labelling>,
    pub certificate: Option<Certificate>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn conditions(spec: &InstanceSpec, pg: &ProductGraph) -> Result<Conditions> {
    let orders = pg.orders();
    let (l, d) = (spec.l, orders.len());
    let q = product(&orders[l - 1..], "last factor order")?;
    let q = usize::try_from(q).map_err(|_| Error::Overflow("last factor order"))?;
    let product = check_product_condition(&orders[..l - 1], q)?;
    let sorted = orders.windows(2).all(|w| w[0] >= w[1]);
    let hamming_type = pg.is_hamming();
    let hamming = (hamming_type && sorted && l < d).then(|| check_hamming_condition(&orders, l)).transpose()?;
    let uniform = orders.iter().all(|&x| x == orders[0]);
    let hypercube =
        (hamming_type && uniform && d >= 6).then(|| check_hypercube_condition(d, orders[0], l)).transpose()?;
    let ball = hamming_type.then(|| necessary_ball_condition(&orders, l)).transpose()?;
    let neighbour = hamming_type.then(|| necessary_neighbor_condition(&orders, l, spec.h)).transpose()?;
    Ok(Conditions { product, hamming, hypercube, ball, neighbour })
}

/// Runs construct, verify and certify on one instance. Only invalid input
/// is an error; a stuck construction or missing certificate is reported.
pub fn run_theorem_experiment(spec: &InstanceSpec) -> Result<Experiment> {
    spec.validate()?;
    let pg = spec.product()?;
    let h = spec.hvector()?;
    let l = spec.l;
    let conditions = conditions(spec, &pg)?;
    let mut timings = Timings::default();

    let t = Instant::now();
    let ctx = ConstructionContext::from_product(&pg, l, spec.q_l)?;
    let n1 = ctx.n1();
    let target = n1 - 1;
    let (construction, labelling) = match construct_with(&ctx, ConstructOptions::default()) {
        Ok(c) => (
            ConstructionOutcome {
                constructed: Some(c.value()),
                guaranteed: c.guaranteed,
                trace: Some(c.trace()),
                stuck_at: None,
                error: None,
            },
            Some(c.labelling),
        ),
        Err(e) => (
            ConstructionOutcome {
                constructed: None,
                guaranteed: ctx.sufficient_condition().2,
                trace: None,
                stuck_at: match &e {
                    Error::ConstructionStuck { t, .. } => Some(*t),
                    _ => None,
                },
                error: Some(e.to_string()),
            },
            None,
        ),
    };
    timings.construct_ms = ms(t);

    let t = Instant::now();
    let (cyclic_check, linear_check) = match &labelling {
        Some(phi) => {
            let cyc = verify_cyclic(pg.graph(), &h, phi, n1)?;
            let lin_phi = phi.to_linear();
            let lin = verify_linear(pg.graph(), &h, &lin_phi)?;
            (Some(CheckSummary::new(&cyc, phi.span())), Some(CheckSummary::new(&lin, lin_phi.span())))
        }
        None => (None, None),
    };
    timings.verify_ms = ms(t);

    let t = Instant::now();
    let (certificate, certificate_error) = match canonical_certificate(&pg, l, spec.q_l, spec.certificate.as_ref()) {
        Ok(c) => (Some(c), None),
        Err(e @ (Error::CertificateMissing | Error::CertificateRejected(_))) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    timings.certify_ms = ms(t);

    let lower = certificate.as_ref().map(|c| c.bound);
    let cyc_ok = cyclic_check.as_ref().filter(|c| c.pass);
    let lin_ok = linear_check.as_ref().filter(|c| c.pass);
    let uppers = [
        ("lambda", lin_ok.map(|c| c.span)),
        ("nlambda", lin_ok.filter(|c| c.no_hole).map(|c| c.span)),
        ("sigma", cyc_ok.map(|c| c.span)),
        ("nsigma", cyc_ok.filter(|c| c.no_hole).map(|c| c.span)),
    ];
    let invariants: Vec<InvariantOutcome> = uppers
        .iter()
        .map(|&(name, upper)| InvariantOutcome {
            invariant: name.into(),
            upper,
            lower,
            value: upper.filter(|&u| Some(u) == lower),
        })
        .collect();

    let t = Instant::now();
    let chromatic = match &labelling {
        Some(phi) => {
            let c = colouring_from_labelling(pg.graph(), l, phi)?;
            let clique = certificate.as_ref().map(|c| c.order as u64);
            let value = (c.proper && clique == Some(c.colours_used)).then_some(c.colours_used);
            Some(ChromaticOutcome {
                colours: c.colours_used,
                proper: c.proper,
                pairs_checked: c.pairs_checked,
                clique,
                value,
            })
        }
        None => None,
    };
    timings.colour_ms = ms(t);

    let reproduced = construction.constructed == Some(target)
        && lower == Some(target)
        && invariants.iter().all(|i| i.value == Some(target));

    let report = ExperimentReport {
        instance: spec.name.clone(),
        orders: pg.orders(),
        n: pg.order(),
        l,
        h: spec.h,
        q_l: spec.q_l,
        target,
        conditions,
        construction,
        cyclic_check,
        linear_check,
        certificate: certificate.clone(),
        certificate_error,
        invariants,
        chromatic,
        reproduced,
        timings,
    };
    Ok(Experiment { report, product: pg, labelling, certificate })
}

/// A graph on all vertices of `h` holding every edge of `h` inside `k`
/// and each other edge of `h` independently with probability `density`.
pub fn sandwich_sample(h: &Graph, k: &[usize], density: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&density) {
        return invalid(format!("density {density} outside [0, 1]"));
    }
    let mut inside = vec![false; h.order()];
    for &v in k {
        if v >= h.order() {
            return invalid(format!("certificate vertex {v} outside the graph"));
        }
        inside[v] = true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = h
        .edges()
        .filter(|&(u, v)| {
            // draw for every edge so the sample does not depend on k
            let keep = rng.random_bool(density);
            (inside[u] && inside[v]) || keep
        })
        .collect();
    Ok(Graph::from_edges(h.order(), &edges)?.named(format!("{}~{seed}", h.name())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichSample {
    pub seed: u64,
    pub edges: usize,
    pub linear_check: CheckSummary,
    pub cyclic_check: CheckSummary,
    /// The labelling restricted to the certificate is a bijection onto
    /// `0..N_1`.
    pub bijection_on_certificate: bool,
    pub certificate_bound: Option<u64>,
    pub colouring_proper: bool,
    pub value: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub base: ExperimentReport,
    pub samples: Vec<SandwichSample>,
    pub reproduced: usize,
    pub all_reproduced: bool,
}

/// Repeats the base experiment on `samples` sandwich graphs with seeds
/// `seed, seed + 1, ...`.
pub fn run_sandwich_experiment(spec: &InstanceSpec, samples: usize, seed: u64) -> Result<SandwichReport> {
    let base = run_theorem_experiment(spec)?;
    let (Some(phi), Some(cert)) = (&base.labelling, &base.certificate) else {
        return invalid("the base experiment produced no labelling or no certificate");
    };
    if !base.report.reproduced {
        return invalid("the base experiment was not reproduced");
    }
    let h = spec.hvector()?;
    let n1 = phi.modulus().expect("constructed labellings are cyclic");
    let target = base.report.target;
    let mut on_k: Vec<u64> = cert.vertices.iter().map(|&v| phi.labels()[v]).collect();
    on_k.sort_unstable();
    let bijection = on_k.iter().copied().eq(0..n1);

    let results: Result<Vec<SandwichSample>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let x = sandwich_sample(base.product.graph(), &cert.vertices, spec.density, s)?;
            let cyc = verify_cyclic(&x, &h, phi, n1)?;
            let lin_phi = phi.to_linear();
            let lin = verify_linear(&x, &h, &lin_phi)?;
            let bound = certificate_check(&x, &cert.vertices, spec.l).ok();
            let colouring = colouring_from_labelling(&x, spec.l, phi)?;
            let linear_check = CheckSummary::new(&lin, lin_phi.span());
            let cyclic_check = CheckSummary::new(&cyc, phi.span());
            let ok = lin.pass
                && lin.no_hole
                && cyc.pass
                && cyc.no_hole
                && linear_check.span == target
                && bijection
                && bound == Some(target)
                && colouring.proper;
            Ok(SandwichSample {
                seed: s,
                edges: x.edge_count(),
                linear_check,
                cyclic_check,
                bijection_on_certificate: bijection,
                certificate_bound: bound,
                colouring_proper: colouring.proper,
                value: ok.then_some(target),
            })
        })
        .collect();
    let samples = results?;
    let reproduced = samples.iter().filter(|s| s.value.is_some()).count();
    Ok(SandwichReport { all_reproduced: reproduced == samples.len(), reproduced, samples, base: base.report })
}

/// Runs independent experiments in parallel, keeping input order.
pub fn run_batch(specs: &[InstanceSpec]) -> Vec<Result<ExperimentReport>> {
    specs.par_iter().map(|s| run_theorem_experiment(s).map(|e| e.report)).collect()
}
