mod common;

use common::*;
use maghom::graph::{complete_graph, cycle_graph, path_graph, Graph};
use maghom::homology::{
    check_lesnotsplit_criterion, cycle_basis, les_consistency_check, verify_vanishing_consequences, HomologyError, Torsion,
    DEFAULT_CAP,
};
use maghom::{compute_homology, enumerate_trails, Theory};
use proptest::prelude::*;

fn betti(g: &Graph, k: usize, l: u32, theory: Theory) -> usize {
    compute_homology(g, &dist(g), k, l, theory, false, DEFAULT_CAP).unwrap().betti
}

#[test]
fn toy_values() {
    let g = toy();
    let mh = compute_homology(&g, &dist(&g), 2, 2, Theory::Mc, true, DEFAULT_CAP).unwrap();
    assert_eq!((mh.dim_source, mh.rank_out, mh.rank_in, mh.betti), (18, 4, 0, 14));
    assert_eq!(mh.torsion, Torsion::Factors(vec![]));
    assert_eq!(betti(&g, 2, 2, Theory::Emc), 6);
}

#[test]
fn derived_values() {
    assert_eq!(betti(&complete_graph(4), 3, 3, Theory::Emc), 24);
    assert_eq!(betti(&cycle_graph(8).unwrap(), 3, 3, Theory::Emc), 0);
    for seed in 0..10 {
        let g = random_graph(seed, 8);
        assert_eq!(betti(&g, 0, 0, Theory::Emc), g.n());
        assert_eq!(betti(&g, 1, 1, Theory::Emc), 2 * g.edge_count());
    }
}

#[test]
fn budget_is_reported() {
    let g = complete_graph(6);
    let err = compute_homology(&g, &dist(&g), 3, 3, Theory::Mc, false, 100).unwrap_err();
    assert!(matches!(err, HomologyError::Budget(_)));
}

#[test]
fn kernel_bases() {
    let g = toy();
    let d = dist(&g);
    let (basis, cycles) = cycle_basis(&g, &d, 2, 2, Theory::Emc).unwrap();
    assert_eq!(cycles.len(), 6);
    for v in &cycles {
        assert_eq!(v.len(), 1);
        assert!(!basis.get(v[0].0).landmarks.contains(&3));
    }
    let c4 = cycle_graph(4).unwrap();
    let (basis, cycles) = cycle_basis(&c4, &dist(&c4), 2, 2, Theory::Emc).unwrap();
    assert_eq!(cycles.len(), 4);
    for v in &cycles {
        assert_eq!(v.iter().map(|e| e.1).collect::<Vec<_>>(), vec![1, -1]);
        let (a, b) = (&basis.get(v[0].0).landmarks, &basis.get(v[1].0).landmarks);
        assert_eq!((a[0], a[2]), (b[0], b[2]));
    }
}

#[test]
fn long_exact_sequence_bookkeeping() {
    let report = les_consistency_check(&relation_graph(), &dist(&relation_graph()), 5).unwrap();
    assert!(report.passed(), "{:?}", report.nodes);
    // iota is not injective in degree 4
    let node = report.nodes.iter().find(|n| n.group == "EMH" && n.k == 4).unwrap();
    assert!(node.kernel_dim > 0);
    for seed in 0..8 {
        let g = random_graph(seed, 6);
        for l in 0..=3 {
            assert!(les_consistency_check(&g, &dist(&g), l).unwrap().passed());
        }
    }
    let tree = Graph::new(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)]).unwrap();
    assert!(les_consistency_check(&tree, &dist(&tree), 2).unwrap().passed());
    let empty = Graph::new(4, &[]).unwrap();
    for l in 1..=3u32 {
        for k in 0..=l as usize + 1 {
            for theory in Theory::ALL {
                assert_eq!(betti(&empty, k, l, theory), 0);
            }
        }
    }
}

#[test]
fn vanishing_consequences() {
    let c8 = cycle_graph(8).unwrap();
    let r = verify_vanishing_consequences(&c8, &dist(&c8), 3).unwrap();
    assert!(r.precondition);
    assert_eq!(r.betti_mh, 16);
    assert_eq!(r.back_and_forth, Some(true));
    assert_eq!(r.mh_equals_two_edges, Some(true));

    let c12 = cycle_graph(12).unwrap();
    let r = verify_vanishing_consequences(&c12, &dist(&c12), 5).unwrap();
    assert_eq!(r.mh_equals_dmh, Some(true));
    assert_eq!(r.betti_dmh, Some(r.betti_mh));

    let r = verify_vanishing_consequences(&toy(), &dist(&toy()), 2).unwrap();
    assert!(!r.precondition);
    assert!(!r.applicable());
}

#[test]
fn split_criterion() {
    let g = relation_graph();
    let v = check_lesnotsplit_criterion(&g, &dist(&g), &[0, 1, 2, 3, 4]).unwrap();
    assert!(v.trivial_in_mh);
    assert!(v.exact_witnesses.contains(&vec![0, 1, 2, 3, 1, 4]));
    assert!(v.consistent());

    let c5 = cycle_graph(5).unwrap();
    let v = check_lesnotsplit_criterion(&c5, &dist(&c5), &[0, 1, 3]).unwrap();
    assert!(v.witnesses.is_empty());
    assert!(!v.trivial_in_mh);

    let g = lower_k_graph();
    let v = check_lesnotsplit_criterion(&g, &dist(&g), &[0, 1, 3, 4]).unwrap();
    assert!(!v.trivial_in_mh);
    assert!(v.consistent());

    let err = check_lesnotsplit_criterion(&toy(), &dist(&toy()), &[0, 1, 2]).unwrap_err();
    assert!(matches!(err, HomologyError::Precondition(_)));
}

#[test]
fn diagonal_eulerian_is_torsion_free() {
    for seed in 0..10 {
        let g = random_graph(seed, 7);
        for k in 1..=3 {
            let r = compute_homology(&g, &dist(&g), k, k as u32, Theory::Emc, true, DEFAULT_CAP).unwrap();
            assert_eq!(r.torsion, Torsion::Factors(vec![]));
            assert_eq!(r.rank_in, 0);
        }
    }
}

#[test]
fn path_graph_has_no_higher_diagonal_homology() {
    let p = path_graph(6);
    assert_eq!(betti(&p, 2, 2, Theory::Emc), 0);
    assert_eq!(betti(&p, 3, 3, Theory::Emc), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euler_characteristic(seed in 0u64..10_000, l in 1u32..=4) {
        let g = random_graph(seed, 7);
        let d = dist(&g);
        for theory in Theory::ALL {
            let mut chi_chain = 0i64;
            let mut chi_homology = 0i64;
            for k in 0..=l as usize {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                chi_chain += sign * enumerate_trails(&g, &d, k, l, theory).len() as i64;
                chi_homology += sign * compute_homology(&g, &d, k, l, theory, false, DEFAULT_CAP).unwrap().betti as i64;
            }
            prop_assert_eq!(chi_chain, chi_homology);
        }
    }

    #[test]
    fn betti_is_relabeling_invariant(seed in 0u64..10_000, shift in 1usize..6) {
        let g = random_graph(seed, 7);
        let n = g.n();
        let perm: Vec<usize> = (0..n).map(|v| (v * (2 * shift + 1) + shift) % n).collect();
        let mut seen = perm.clone();
        seen.sort_unstable();
        prop_assume!(seen == (0..n).collect::<Vec<_>>());
        let h = g.relabel(&perm);
        for (k, l) in [(1, 2), (2, 2), (2, 3), (3, 3)] {
            for theory in Theory::ALL {
                prop_assert_eq!(betti(&g, k, l, theory), betti(&h, k, l, theory));
            }
        }
    }
}
