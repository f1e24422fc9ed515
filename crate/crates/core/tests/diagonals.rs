use heegner_lab::diagonals::{
    conjugation_by_permutation, delta_normalized_subgroups, expected_count, is_delta_normalized, twisted_diagonal,
    FiniteGroup,
};

#[test]
fn psl27_pairs_match_partition_count() {
    let g = FiniteGroup::psl2_7();
    let subs = delta_normalized_subgroups(&g, 2).unwrap();
    assert_eq!(subs.len() as u64, expected_count(2));
    assert!(subs.iter().all(|s| s.certificate.is_some()));
}

#[test]
fn a5_triples_match_partition_count() {
    let g = FiniteGroup::a5();
    let subs = delta_normalized_subgroups(&g, 3).unwrap();
    assert_eq!(subs.len() as u64, expected_count(3));
    assert!(subs.iter().all(|s| s.certificate.is_some()));
    let orders: Vec<usize> = subs.iter().map(|s| s.order).collect();
    assert_eq!(orders.iter().filter(|&&o| o == 60).count(), 7);
    assert_eq!(orders.iter().filter(|&&o| o == 3600).count(), 6);
}

#[test]
fn no_nontrivial_twist_is_normalized() {
    for g in [FiniteGroup::a5(), FiniteGroup::psl2_7()] {
        for auto in g.automorphisms().unwrap() {
            let identity = auto.iter().enumerate().all(|(i, &x)| i == x);
            let h = twisted_diagonal(&g, &auto).unwrap();
            assert_eq!(is_delta_normalized(&g, 2, &h), identity, "{}", g.name);
        }
    }
}

#[test]
fn every_s5_transposition_gives_outer_twist() {
    let g = FiniteGroup::a5();
    for a in 0..5u8 {
        for b in a + 1..5 {
            let mut tau: Vec<u8> = (0..5).collect();
            tau.swap(a as usize, b as usize);
            let auto = conjugation_by_permutation(&g, &tau).unwrap();
            assert!(!g.is_inner(&auto));
            assert!(!is_delta_normalized(&g, 2, &twisted_diagonal(&g, &auto).unwrap()));
        }
    }
}
