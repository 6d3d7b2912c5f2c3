//! Labellings and the checks for every constraint family: linear
//! `L(h_1,...,h_l)`, cyclic `C(h_1,...,h_l)` and their no-hole variants.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Bfs, Graph};

/// Separation requirements `(h_1, ..., h_l)`; `h_i` applies to pairs at
/// distance exactly `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HVector(Vec<u64>);

impl HVector {
    pub fn new(entries: Vec<u64>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("separation vector needs at least one entry");
        }
        Ok(HVector(entries))
    }

    /// The `l`-tuple `(h, 1, ..., 1)`.
    pub fn leading(h: u64, l: usize) -> Result<Self> {
        if l == 0 {
            return invalid("separation vector needs l >= 1");
        }
        let mut v = vec![1; l];
        v[0] = h;
        Ok(HVector(v))
    }

    pub fn l(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn h1(&self) -> u64 {
        self.0[0]
    }

    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Required separation for a pair at distance `d` (zero when `d` is 0
    /// or beyond `l`).
    pub fn requirement(&self, d: usize) -> u64 {
        if d == 0 || d > self.0.len() {
            0
        } else {
            self.0[d - 1]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelMode {
    Linear,
    Cyclic { k: u64 },
}

/// A total vertex labelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labelling {
    labels: Vec<u64>,
    mode: LabelMode,
}

impl Labelling {
    /// Linear labelling, shifted so that the smallest label is 0.
    pub fn linear(mut labels: Vec<u64>) -> Self {
        if let Some(&min) = labels.iter().min() {
            labels.iter_mut().for_each(|x| *x -= min);
        }
        Labelling { labels, mode: LabelMode::Linear }
    }

    pub fn cyclic(labels: Vec<u64>, k: u64) -> Result<Self> {
        if k == 0 {
            return invalid("cyclic modulus must be >= 1");
        }
        if let Some(&bad) = labels.iter().find(|&&x| x >= k) {
            return invalid(format!("label {bad} outside 0..{k}"));
        }
        Ok(Labelling { labels, mode: LabelMode::Cyclic { k } })
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn mode(&self) -> LabelMode {
        self.mode
    }

    pub fn modulus(&self) -> Option<u64> {
        match self.mode {
            LabelMode::Cyclic { k } => Some(k),
            LabelMode::Linear => None,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The same label map read as a linear labelling.
    pub fn to_linear(&self) -> Labelling {
        Labelling::linear(self.labels.clone())
    }

    /// Max minus min label for linear labellings, `k - 1` for cyclic ones.
    pub fn span(&self) -> u64 {
        match self.mode {
            LabelMode::Cyclic { k } => k - 1,
            LabelMode::Linear => {
                let max = self.labels.iter().max().copied().unwrap_or(0);
                let min = self.labels.iter().min().copied().unwrap_or(0);
                max - min
            }
        }
    }

    pub fn is_no_hole(&self) -> bool {
        match self.mode {
            LabelMode::Linear => no_hole_linear(&self.labels),
            LabelMode::Cyclic { k } => no_hole_cyclic(&self.labels, k),
        }
    }

    /// Labels of `vertices`, in the given order. Linear results are
    /// renormalized.
    pub fn restrict(&self, vertices: &[usize]) -> Result<Labelling> {
        if let Some(&bad) = vertices.iter().find(|&&v| v >= self.labels.len()) {
            return invalid(format!("vertex {bad} is not labelled"));
        }
        let labels = vertices.iter().map(|&v| self.labels[v]).collect();
        Ok(match self.mode {
            LabelMode::Linear => Labelling::linear(labels),
            LabelMode::Cyclic { k } => Labelling { labels, mode: LabelMode::Cyclic { k } },
        })
    }
}

/// `min(|x - y|, k - |x - y|)` for residues `x, y` in `0..k`.
pub fn cyclic_distance(x: u64, y: u64, k: u64) -> Result<u64> {
    if k == 0 || x >= k || y >= k {
        return invalid(format!("residues ({x},{y}) not in 0..{k}"));
    }
    Ok(cyclic_distance_unchecked(x, y, k))
}

#[inline]
pub(crate) fn cyclic_distance_unchecked(x: u64, y: u64, k: u64) -> u64 {
    let d = x.abs_diff(y);
    d.min(k - d)
}

pub fn no_hole_linear(labels: &[u64]) -> bool {
    let used: BTreeSet<u64> = labels.iter().copied().collect();
    match (used.first(), used.last()) {
        (Some(&lo), Some(&hi)) => (hi - lo + 1) as usize == used.len(),
        _ => true,
    }
}

/// True iff the used residues form one cyclic interval of `Z_k`, i.e. the
/// unused residues form at most one run.
pub fn no_hole_cyclic(labels: &[u64], k: u64) -> bool {
    let k = k as usize;
    let mut used = vec![false; k];
    for &x in labels {
        used[x as usize % k] = true;
    }
    if used.iter().all(|&u| u) {
        return true;
    }
    // count starts of unused runs, cyclically
    (0..k).filter(|&i| !used[i] && used[(i + k - 1) % k]).count() <= 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub u: usize,
    pub v: usize,
    pub distance: usize,
    pub required: u64,
    pub observed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
    /// `pairs_checked[i - 1]` counts the pairs found at distance `i`.
    pub pairs_checked: Vec<u64>,
    pub no_hole: bool,
    pub modulus: Option<u64>,
}

impl VerificationReport {
    pub fn total_pairs(&self) -> u64 {
        self.pairs_checked.iter().sum()
    }
}

/// Sweeps every pair within distance `l` via bounded BFS and hands
/// `(u, v, d)` with `u < v` to `check`, which returns the observed
/// separation if the pair violates its requirement.
fn sweep(
    g: &Graph,
    l: usize,
    check: impl Fn(usize, usize, usize) -> Option<Violation> + Sync,
) -> (Vec<Violation>, Vec<u64>) {
    let per_source: Vec<(Vec<Violation>, Vec<u64>)> = (0..g.order())
        .into_par_iter()
        .map_init(
            || Bfs::new(g.order()),
            |bfs, u| {
                let mut bad = Vec::new();
                let mut counts = vec![0u64; l];
                bfs.run(g, u, l, |v, d| {
                    if v > u && d > 0 {
                        counts[d - 1] += 1;
                        if let Some(viol) = check(u, v, d) {
                            bad.push(viol);
                        }
                    }
                });
                (bad, counts)
            },
        )
        .collect();

    let mut violations = Vec::new();
    let mut counts = vec![0u64; l];
    for (bad, c) in per_source {
        violations.extend(bad);
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }
    violations.sort_by_key(|x| (x.u, x.v));
    (violations, counts)
}

fn check_total(g: &Graph, phi: &Labelling) -> Result<()> {
    if phi.len() != g.order() {
        return invalid(format!(
            "labelling covers {} vertices but the graph has {}",
            phi.len(),
            g.order()
        ));
    }
    Ok(())
}

/// Checks `|phi(u) - phi(v)| >= h_i` for every pair at distance `i <= l`.
/// Label values are read as integers whatever the labelling's mode.
pub fn verify_linear(g: &Graph, h: &HVector, phi: &Labelling) -> Result<VerificationReport> {
    check_total(g, phi)?;
    let labels = phi.labels();
    let (violations, pairs_checked) = sweep(g, h.l(), |u, v, d| {
        let required = h.requirement(d);
        let observed = labels[u].abs_diff(labels[v]);
        (observed < required).then_some(Violation { u, v, distance: d, required, observed })
    });
    Ok(VerificationReport {
        pass: violations.is_empty(),
        violations,
        pairs_checked,
        no_hole: no_hole_linear(labels),
        modulus: None,
    })
}

/// Checks `|phi(u) - phi(v)|_k >= h_i` for every pair at distance `i <= l`.
pub fn verify_cyclic(g: &Graph, h: &HVector, phi: &Labelling, k: u64) -> Result<VerificationReport> {
    check_total(g, phi)?;
    if k == 0 {
        return invalid("cyclic modulus must be >= 1");
    }
    let labels = phi.labels();
    if let Some(&bad) = labels.iter().find(|&&x| x >= k) {
        return invalid(format!("label {bad} outside 0..{k}"));
    }
    let (violations, pairs_checked) = sweep(g, h.l(), |u, v, d| {
        let required = h.requirement(d);
        let observed = cyclic_distance_unchecked(labels[u], labels[v], k);
        (observed < required).then_some(Violation { u, v, distance: d, required, observed })
    });
    Ok(VerificationReport {
        pass: violations.is_empty(),
        violations,
        pairs_checked,
        no_hole: no_hole_cyclic(labels, k),
        modulus: Some(k),
    })
}

/// Outcome of reading a labelling as a colouring of `G^l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColouringReport {
    pub proper: bool,
    /// Number of colours offered, `span + 1` of the linear reading.
    pub colours_used: u64,
    pub pairs_checked: u64,
    pub conflicts: Vec<(usize, usize)>,
    /// The colour map; omitted when the colouring is improper.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub colours: Option<Vec<u64>>,
}

/// Uses the labels as colours of `G^l` and checks properness without
/// materializing the power graph.
pub fn colouring_from_labelling(g: &Graph, l: usize, phi: &Labelling) -> Result<ColouringReport> {
    let ones = HVector::leading(1, l)?;
    let linear = phi.to_linear();
    let report = verify_linear(g, &ones, &linear)?;
    let proper = report.pass;
    Ok(ColouringReport {
        proper,
        colours_used: linear.span() + 1,
        pairs_checked: report.total_pairs(),
        conflicts: report.violations.iter().map(|v| (v.u, v.v)).collect(),
        colours: proper.then(|| linear.labels().to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    fn hv(v: &[u64]) -> HVector {
        HVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cyclic_distance_examples() {
        assert_eq!(cyclic_distance(7, 1, 8).unwrap(), 2);
        assert_eq!(cyclic_distance(5, 5, 9).unwrap(), 0);
        assert_eq!(cyclic_distance(0, 3, 4).unwrap(), 1);
        assert!(cyclic_distance(4, 0, 4).is_err());
    }

    #[test]
    fn spans() {
        assert_eq!(Labelling::linear(vec![3, 3, 3]).span(), 0);
        assert_eq!(Labelling::linear((0..76).collect()).span(), 75);
        assert_eq!(Labelling::cyclic(vec![0, 5], 76).unwrap().span(), 75);
        // normalization on ingest
        assert_eq!(Labelling::linear(vec![4, 6]).labels(), &[0, 2]);
    }

    #[test]
    fn linear_verification() {
        let p3 = Graph::path(3).unwrap();
        let r = verify_linear(&p3, &hv(&[2, 1]), &Labelling::linear(vec![2, 0, 3])).unwrap();
        assert!(r.pass);
        assert_eq!(r.pairs_checked, vec![2, 1]);

        let k3 = Graph::complete(3).unwrap();
        let r = verify_linear(&k3, &hv(&[1]), &Labelling::linear(vec![0, 0, 1])).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violations, vec![Violation { u: 0, v: 1, distance: 1, required: 1, observed: 0 }]);

        let r = verify_linear(&c4(), &hv(&[0, 0]), &Labelling::linear(vec![0; 4])).unwrap();
        assert!(r.pass);

        assert!(verify_linear(&k3, &hv(&[1]), &Labelling::linear(vec![0, 1])).is_err());
    }

    #[test]
    fn cyclic_verification() {
        let r = verify_cyclic(&c4(), &hv(&[1, 1]), &Labelling::linear(vec![0, 1, 2, 3]), 4).unwrap();
        assert!(r.pass && r.no_hole);
        assert_eq!(r.total_pairs(), 6);

        let phi = Labelling::linear(vec![0, 3, 1, 4]);
        assert!(verify_cyclic(&c4(), &hv(&[2, 1]), &phi, 6).unwrap().pass);
        let r = verify_cyclic(&c4(), &hv(&[2, 1]), &phi, 5).unwrap();
        assert!(!r.pass);
        assert!(r.violations.iter().any(|v| v.u == 0 && v.v == 3 && v.observed == 1));

        assert!(verify_cyclic(&c4(), &hv(&[1]), &phi, 4).is_err());
    }

    #[test]
    fn no_hole_checks() {
        assert!(no_hole_linear(&[0, 1, 2]));
        assert!(!no_hole_linear(&[0, 2]));
        assert!(no_hole_linear(&[7]));
        assert!(no_hole_cyclic(&[3, 0, 1], 4));
        assert!(!no_hole_cyclic(&[0, 2], 4));
        assert!(no_hole_cyclic(&[0, 1, 2, 3], 4));
    }

    #[test]
    fn restriction() {
        let phi = Labelling::linear(vec![5, 1, 3, 9]);
        assert_eq!(phi.restrict(&[0, 1, 2, 3]).unwrap(), phi);
        let r = phi.restrict(&[0, 2]).unwrap();
        assert_eq!(r.labels(), &[2, 0]);
        assert!(r.span() <= phi.span());
        assert!(phi.restrict(&[4]).is_err());
        let c = Labelling::cyclic(vec![1, 2, 3], 5).unwrap();
        assert_eq!(c.restrict(&[2]).unwrap().modulus(), Some(5));
    }

    #[test]
    fn colourings() {
        let k3 = Graph::complete(3).unwrap();
        let rep = colouring_from_labelling(&k3, 1, &Labelling::linear(vec![0, 1, 2])).unwrap();
        assert!(rep.proper);
        assert_eq!(rep.colours_used, 3);

        let c5 = Graph::cycle(5).unwrap();
        let rep = colouring_from_labelling(&c5, 2, &Labelling::linear(vec![0, 1, 2, 3, 4])).unwrap();
        assert!(rep.proper && rep.pairs_checked == 10);

        let rep = colouring_from_labelling(&c5, 2, &Labelling::linear(vec![0, 1, 2, 3, 0])).unwrap();
        assert!(!rep.proper && rep.colours.is_none());
        assert_eq!(rep.conflicts, vec![(0, 4)]);
    }
}
