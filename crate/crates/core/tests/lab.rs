use cartlabel::graph::ProductGraph;
use cartlabel::lab::{
    check_hamming_condition, check_product_condition, necessary_ball_condition, necessary_neighbor_condition,
    run_batch, run_theorem_experiment, non_hamming_instance, FactorSpec, InstanceSpec,
};
use proptest::prelude::*;

#[test]
fn four_way_split_with_a_cube_core_is_out_of_reach() {
    // G* = Q3 splits into two classes of four slices pairwise at distance
    // 2, so their offsets would have to differ in all three prefix
    // coordinates, one of which has only two values
    let spec = non_hamming_instance(19, &[2, 2], 2, None, 2).unwrap();
    assert_eq!(spec.l, 4);
    let r = run_theorem_experiment(&spec).unwrap().report;
    assert!(r.conditions.product.holds);
    assert_eq!(r.certificate.as_ref().map(|c| c.bound), Some(151));
    assert!(r.construction.stuck_at.is_some());
    assert!(!r.reproduced);
}

#[test]
fn wide_window_instance_needs_small_classes() {
    let spec = non_hamming_instance(25, &[2], 2, Some(5), 2).unwrap();
    let r = run_theorem_experiment(&spec).unwrap().report;
    assert!(r.conditions.product.holds);
    assert!(r.certificate.is_some());
    assert!(r.construction.stuck_at.is_some());
    assert!(!r.reproduced);
}

#[test]
fn dominating_vertex_blocks_the_construction() {
    let mut spec = non_hamming_instance(19, &[2], 2, None, 2).unwrap();
    spec.factors[2] = FactorSpec::Star { n: 4 };
    let r = run_theorem_experiment(&spec).unwrap().report;
    assert!(r.conditions.product.holds);
    assert_eq!(r.certificate.as_ref().map(|c| c.bound), Some(75));
    assert!(r.construction.stuck_at.is_some());
    assert!(!r.reproduced);
    assert_eq!(r.summary_row().constructed, "stuck");
}

#[test]
fn batch_reports_keep_order_and_satisfy_necessary_conditions() {
    let specs = vec![
        InstanceSpec::hamming(&[19, 2, 2, 2], 3, 2, 2),
        InstanceSpec::hamming(&[2; 8], 7, 2, 2),
        InstanceSpec::hamming(&[3, 3, 3, 3], 3, 1, 3),
    ];
    let reports: Vec<_> = run_batch(&specs).into_iter().map(Result::unwrap).collect();
    assert_eq!(reports.iter().map(|r| r.n).collect::<Vec<_>>(), vec![152, 256, 81]);
    for r in reports.iter().filter(|r| r.reproduced) {
        assert!(r.conditions.ball.as_ref().unwrap().condition.holds);
        assert!(r.conditions.neighbour.as_ref().unwrap().holds);
    }
    assert!(!reports[2].conditions.product.holds);
    let json = serde_json::to_value(&reports[0]).unwrap();
    assert_eq!(json["conditions"]["product"]["operands"]["prefix_orders"], serde_json::json!([19, 2]));
}

#[test]
fn experiments_reject_invalid_specs() {
    assert!(run_theorem_experiment(&InstanceSpec::hamming(&[19, 2, 2, 2], 2, 1, 2)).is_err());
    assert!(run_theorem_experiment(&InstanceSpec::hamming(&[19, 2, 2, 2], 3, 0, 2)).is_err());
    let mut spec = InstanceSpec::hamming(&[19, 2, 2, 2], 3, 1, 2);
    spec.factors[1] = FactorSpec::Complete { n: 1 };
    assert!(run_theorem_experiment(&spec).is_err());
}

fn sorted_orders() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(2..=30usize, 4..=7).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hamming_condition_is_the_product_condition_at_the_split(orders in sorted_orders(), l in 3..=6usize) {
        prop_assume!(l < orders.len());
        let ham = check_hamming_condition(&orders, l).unwrap();
        let q: usize = orders[l - 1..].iter().product();
        let prod = check_product_condition(&orders[..l - 1], q).unwrap();
        prop_assert_eq!((ham.lhs, ham.rhs, ham.holds), (prod.lhs, prod.rhs, prod.holds));
    }

    #[test]
    fn ball_count_is_one_more_than_the_sum(orders in sorted_orders(), l in 1..=7usize) {
        prop_assume!(l <= orders.len());
        let b = necessary_ball_condition(&orders, l).unwrap();
        prop_assert_eq!(b.ball_count, b.condition.rhs + 1);
        prop_assert_eq!(b.discrepancy, b.condition.lhs == b.condition.rhs);
        let pg_order: u128 = orders.iter().map(|&q| q as u128).product();
        prop_assert!(b.condition.rhs < pg_order);
        let n = necessary_neighbor_condition(&orders, l, 1).unwrap();
        prop_assert_eq!(n.lhs, b.condition.lhs);
    }
}

#[test]
fn hamming_product_certificate_matches_induced_subgraph() {
    let pg = ProductGraph::hamming(&[5, 3, 2, 2]).unwrap();
    let c = cartlabel::lab::canonical_certificate(&pg, 3, 2, None).unwrap();
    assert_eq!(c.order, 5 * 3 * 2);
    assert_eq!(c.bound, 29);
}
