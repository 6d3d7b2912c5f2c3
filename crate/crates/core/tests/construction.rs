use cartlabel::construct::{construct_with, ConstructOptions, ConstructionContext, ConstructionTrace};
use cartlabel::graph::{Distance, ProductGraph};
use cartlabel::lab::{canonical_certificate, run_theorem_experiment, InstanceSpec};
use cartlabel::labelling::{verify_cyclic, HVector};
use cartlabel::Error;

#[test]
fn same_residue_adjacent_slices_block_the_construction() {
    let pg = ProductGraph::hamming(&[19, 2, 2, 2]).unwrap();
    let ctx = ConstructionContext::from_product(&pg, 3, 2).unwrap();
    assert!(ctx.residue_classes_independent());
    assert_eq!(ctx.slice_order(), &[0, 1, 3, 2]);

    let identity = ConstructionContext::from_product(&pg, 3, 2).unwrap().with_slice_order(vec![0, 1, 2, 3]).unwrap();
    assert!(!identity.residue_classes_independent());
    match construct_with(&identity, ConstructOptions::default()) {
        Err(Error::ConstructionStuck { t, rejected }) => {
            assert_eq!(t, 2);
            assert_eq!(rejected.len(), 38);
        }
        other => panic!("expected a stuck construction, got {other:?}"),
    }
}

#[test]
fn separation_one_at_the_split_is_not_enough() {
    // K19 x K2 x (K2 x K2) with q_l = 1 meets the size condition and has a
    // 38-vertex certificate, but it also contains H(19,2,2) with 76
    // vertices and diameter 3, so 76 labels must differ and 37 is
    // unattainable.
    let pg = ProductGraph::hamming(&[19, 2, 2, 2]).unwrap();
    let ctx = ConstructionContext::from_product(&pg, 3, 1).unwrap();
    assert!(ctx.sufficient_condition().2);
    let cert = canonical_certificate(&pg, 3, 1, None).unwrap();
    assert_eq!(cert.bound, 37);
    let larger = canonical_certificate(&pg, 3, 2, None).unwrap();
    assert_eq!((larger.order, larger.diameter, larger.bound), (76, Distance::Finite(3), 75));
    assert!(matches!(construct_with(&ctx, ConstructOptions::default()), Err(Error::ConstructionStuck { t: 1, .. })));

    let report = run_theorem_experiment(&InstanceSpec::hamming(&[19, 2, 2, 2], 3, 1, 1)).unwrap().report;
    assert!(report.conditions.product.holds);
    assert!(!report.reproduced);
    assert_eq!(report.construction.stuck_at, Some(1));
}

#[test]
fn backtracking_recovers_from_greedy_dead_ends() {
    let pg = ProductGraph::hamming(&[3; 7]).unwrap();
    let ctx = ConstructionContext::from_product(&pg, 6, 3).unwrap();
    let greedy = ConstructOptions { backtrack_budget: 0, ..Default::default() };
    assert!(matches!(construct_with(&ctx, greedy), Err(Error::ConstructionStuck { t: 8, .. })));

    let c = construct_with(&ctx, ConstructOptions::default()).unwrap();
    assert!(c.backtracks > 0);
    assert_eq!(c.value(), 728);
    let h = HVector::leading(3, 6).unwrap();
    let r = verify_cyclic(pg.graph(), &h, &c.labelling, 729).unwrap();
    assert!(r.pass && r.no_hole);
}

#[test]
fn greedy_success_is_unchanged_by_backtracking() {
    let pg = ProductGraph::hamming(&[19, 2, 2, 2]).unwrap();
    let ctx = ConstructionContext::from_product(&pg, 3, 2).unwrap();
    let greedy = construct_with(&ctx, ConstructOptions { backtrack_budget: 0, ..Default::default() }).unwrap();
    let full = construct_with(&ctx, ConstructOptions::default()).unwrap();
    assert_eq!(full.backtracks, 0);
    assert_eq!(greedy.offsets, full.offsets);
    assert_eq!(greedy.labelling, full.labelling);
}

#[test]
fn trace_round_trips_through_json() {
    let pg = ProductGraph::hamming(&[19, 2, 2, 2]).unwrap();
    let ctx = ConstructionContext::from_product(&pg, 3, 2).unwrap();
    let c = construct_with(&ctx, ConstructOptions::default()).unwrap();
    let trace = c.trace();
    assert_eq!(trace.offsets.len(), 4);
    assert_eq!(trace.candidates_rejected_per_t.len(), 3);
    let s = serde_json::to_string(&trace).unwrap();
    assert!(s.starts_with(r#"{"permutation":"#));
    assert_eq!(serde_json::from_str::<ConstructionTrace>(&s).unwrap(), trace);
}

#[test]
fn every_label_appears_exactly_once_on_the_certificate() {
    for (orders, l, ql) in [(vec![19, 2, 2, 2], 3, 2), (vec![2; 8], 7, 2), (vec![40, 2, 3], 3, 3)] {
        let pg = ProductGraph::hamming(&orders).unwrap();
        let ctx = ConstructionContext::from_product(&pg, l, ql).unwrap();
        let c = construct_with(&ctx, ConstructOptions::default()).unwrap();
        let cert = canonical_certificate(&pg, l, ql, None).unwrap();
        let mut on_k: Vec<u64> = cert.vertices.iter().map(|&v| c.labelling.labels()[v]).collect();
        on_k.sort_unstable();
        assert!(on_k.iter().copied().eq(0..ctx.n1()), "{orders:?}");
    }
}
