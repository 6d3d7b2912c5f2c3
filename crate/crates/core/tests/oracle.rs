//! Independent brute-force oracle: plain enumeration of every label map,
//! with its own distance computation, compared against the solvers.

use cartlabel::graph::Graph;
use cartlabel::labelling::{verify_cyclic, verify_linear, HVector};
use cartlabel::solver::{chromatic_exact, feasible_linear, solve, Invariant, SolveOptions, SolveValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Brute {
    n: usize,
    dist: Vec<Vec<Option<usize>>>,
    h: Vec<u64>,
}

impl Brute {
    fn new(n: usize, edges: &[(usize, usize)], h: &[u64]) -> Self {
        let mut dist = vec![vec![None; n]; n];
        for (v, row) in dist.iter_mut().enumerate() {
            row[v] = Some(0);
        }
        for &(u, v) in edges {
            dist[u][v] = Some(1);
            dist[v][u] = Some(1);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (dist[i][k], dist[k][j]) {
                        if dist[i][j].is_none_or(|c| a + b < c) {
                            dist[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        Brute { n, dist, h: h.to_vec() }
    }

    fn req(&self, u: usize, v: usize) -> u64 {
        match self.dist[u][v] {
            Some(d) if d >= 1 && d <= self.h.len() => self.h[d - 1],
            _ => 0,
        }
    }

    fn ok(&self, x: &[u64], k: Option<u64>) -> bool {
        (0..self.n).all(|u| {
            (u + 1..self.n).all(|v| {
                let d = x[u].abs_diff(x[v]);
                let d = k.map_or(d, |k| d.min(k - d));
                d >= self.req(u, v)
            })
        })
    }

    /// Calls `f` on every map `0..n -> 0..size` until it returns true.
    fn any(&self, size: u64, mut f: impl FnMut(&[u64]) -> bool) -> bool {
        let mut x = vec![0u64; self.n];
        loop {
            if f(&x) {
                return true;
            }
            let mut i = 0;
            loop {
                if i == self.n {
                    return false;
                }
                x[i] += 1;
                if x[i] < size {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    }

    fn lambda(&self) -> u64 {
        (0..).find(|&s| self.any(s + 1, |x| self.ok(x, None))).unwrap()
    }

    fn sigma(&self) -> u64 {
        (1..).find(|&k| self.any(k, |x| self.ok(x, Some(k)))).unwrap() - 1
    }

    fn nlambda(&self) -> Option<u64> {
        (0..self.n as u64).find(|&s| {
            self.any(s + 1, |x| (0..=s).all(|c| x.contains(&c)) && self.ok(x, None))
        })
    }

    fn nsigma(&self) -> Option<u64> {
        let top = self.nlambda()? + self.h[0] + 1;
        let no_hole = |x: &[u64], k: u64| {
            // the unused residues form at most one cyclic run
            let used: Vec<bool> = (0..k).map(|c| x.contains(&c)).collect();
            let starts = (0..k as usize).filter(|&i| !used[i] && used[(i + k as usize - 1) % k as usize]).count();
            starts <= 1
        };
        (1..=top).find(|&k| self.any(k, |x| no_hole(x, k) && self.ok(x, Some(k)))).map(|k| k - 1)
    }
}

fn fin(v: Option<u64>) -> SolveValue {
    v.map_or(SolveValue::Infinity, SolveValue::Finite)
}

fn check_graph(n: usize, edges: &[(usize, usize)], h: &[u64]) {
    let g = Graph::from_edges(n, edges).unwrap();
    let hv = HVector::new(h.to_vec()).unwrap();
    let b = Brute::new(n, edges, h);
    let expected = [
        (Invariant::Lambda, SolveValue::Finite(b.lambda())),
        (Invariant::Sigma, SolveValue::Finite(b.sigma())),
        (Invariant::Nlambda, fin(b.nlambda())),
        (Invariant::Nsigma, fin(b.nsigma())),
    ];
    for oracle in [false, true] {
        let opts = SolveOptions { oracle, ..Default::default() };
        for (inv, want) in expected {
            let r = solve(&g, &hv, inv, opts).unwrap();
            assert_eq!(r.value, want, "{inv} of n={n} {edges:?} h={h:?} oracle={oracle}");
            if let Some(w) = &r.witness {
                let rep = match w.modulus() {
                    Some(k) => verify_cyclic(&g, &hv, w, k).unwrap(),
                    None => verify_linear(&g, &hv, w).unwrap(),
                };
                assert!(rep.pass);
                assert_eq!(Some(w.span()), r.value.finite());
                if matches!(inv, Invariant::Nlambda | Invariant::Nsigma) {
                    assert!(rep.no_hole);
                }
            }
        }
    }
}

fn all_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

#[test]
fn every_graph_up_to_four_vertices() {
    for n in 1..=4 {
        let pairs = all_edges(n);
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            for h in [&[1][..], &[2, 1], &[1, 1], &[3, 1], &[2, 1, 1], &[2, 2]] {
                check_graph(n, &edges, h);
            }
        }
    }
}

#[test]
fn random_five_vertex_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pairs = all_edges(5);
    for _ in 0..30 {
        let edges: Vec<_> = pairs.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        for h in [&[2, 1][..], &[1, 1, 1]] {
            check_graph(5, &edges, h);
        }
    }
}

#[test]
fn decision_values_for_the_path_on_three_vertices() {
    let p3 = Graph::path(3).unwrap();
    let h = HVector::new(vec![2, 1]).unwrap();
    let b = Brute::new(3, &[(0, 1), (1, 2)], &[2, 1]);
    let mut tried = 0;
    assert!(!b.any(3, |x| {
        tried += 1;
        b.ok(x, None)
    }));
    assert_eq!(tried, 27);
    assert!(feasible_linear(&p3, &h, 2).unwrap().is_none());
    assert!(b.ok(&[2, 0, 3], None));
    let w = feasible_linear(&p3, &h, 3).unwrap().unwrap();
    assert!(b.ok(w.labels(), None));
}

#[test]
fn named_small_values() {
    let c4 = [(0, 1), (1, 2), (2, 3), (3, 0)];
    let b = Brute::new(4, &c4, &[2, 1]);
    assert_eq!((b.lambda(), b.sigma(), b.nlambda(), b.nsigma()), (4, 5, None, None));
    assert_eq!(Brute::new(4, &c4, &[1, 1]).nsigma(), Some(3));
    let c5: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
    assert_eq!(Brute::new(5, &c5, &[1, 1, 1]).lambda(), 4);
    assert_eq!(Brute::new(3, &[(0, 1), (1, 2)], &[1, 1]).nlambda(), Some(2));
    let c5sq = Graph::cycle(5).unwrap().power(2).unwrap();
    assert_eq!(Brute::new(5, &all_edges(5), &[1]).lambda() + 1, 5);
    assert_eq!(chromatic_exact(&c5sq).unwrap().value, SolveValue::Finite(5));
}

#[test]
fn deleting_a_vertex_can_destroy_no_hole_labellings() {
    // K2 plus an isolated vertex: the isolated vertex fills the gap
    let h = [2];
    let with = Brute::new(3, &[(0, 1)], &h);
    let without = Brute::new(2, &[(0, 1)], &h);
    assert_eq!((with.nlambda(), with.nsigma()), (Some(2), Some(3)));
    assert_eq!((without.nlambda(), without.nsigma()), (None, None));
    let hv = HVector::new(h.to_vec()).unwrap();
    let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
    let k2 = Graph::complete(2).unwrap();
    let opts = SolveOptions::default();
    assert_eq!(solve(&g, &hv, Invariant::Nlambda, opts).unwrap().value, SolveValue::Finite(2));
    assert_eq!(solve(&k2, &hv, Invariant::Nlambda, opts).unwrap().value, SolveValue::Infinity);
    assert_eq!(solve(&k2, &hv, Invariant::Nsigma, opts).unwrap().value, SolveValue::Infinity);
}
