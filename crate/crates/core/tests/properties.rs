mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn z_measurements_commute(case in z_case()) {
        z_commute(case)?;
    }

    #[test]
    fn y_chain_is_order_independent(case in chain_case()) {
        y_chain(case)?;
    }

    #[test]
    fn y_on_bipartite_node_makes_a_clique(case in star_case()) {
        star_clique(case)?;
    }

    #[test]
    fn independent_instances_are_bipartite(case in lattice_case()) {
        independent_bipartite(case)?;
    }

    #[test]
    fn reduced_nodes_are_the_kept_ones(case in plan_case()) {
        kept_nodes_survive(case)?;
    }
}

#[test]
fn skip_edges_can_break_bipartiteness() {
    use raussendorf_purify::lattice::{generate_faulty, GenModel, LatticeGeometry};
    let geometry = LatticeGeometry::new([6, 6, 6], 6).unwrap();
    let broken = (0..20).any(|seed| {
        let inst = generate_faulty(&geometry, &GenModel::skip(0.5, 1.0, seed)).unwrap();
        !two_colorable(inst.graph())
    });
    assert!(broken);
}
