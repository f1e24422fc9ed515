//! Agreement between the quaternion model and the elliptic-curve oracle.

use heegner_lab::arith::{gcd_i64, kronecker, Fq2Element};
use heegner_lab::grossgalois::class_set;
use heegner_lab::heckecosets::deg_a;
use heegner_lab::quadratic::{class_number, is_fundamental_discriminant};
use heegner_lab::quaternion::brandt_matrices;
use heegner_lab::ssoracle::{
    hecke_operator_multiset, hecke_orbit_multiset, hilbert_class_poly, reduce_and_roots, supersingular_js, tally,
    ModularPolynomials,
};

/// Pairs each ideal class with the supersingular j-invariant of the same weight;
/// only used for primes where the weights are pairwise distinct.
fn match_by_weight(ell: u64) -> Vec<Fq2Element> {
    let classes = class_set(ell, 1, None).unwrap();
    let ss = supersingular_js(ell).unwrap();
    assert_eq!(classes.len(), ss.len());
    classes
        .weights()
        .iter()
        .map(|&w| {
            let hits: Vec<Fq2Element> = ss
                .js
                .iter()
                .zip(&ss.weights)
                .filter(|(_, &v)| 2 * v == w)
                .map(|(j, _)| *j)
                .collect();
            assert_eq!(hits.len(), 1, "weights do not determine the matching at ell = {ell}");
            hits[0]
        })
        .collect()
}

#[test]
fn hecke_walks_reproduce_brandt_rows() {
    let polys = ModularPolynomials::load(None).unwrap();
    for ell in [11u64, 17, 19, 23] {
        let js = match_by_weight(ell);
        let ns: Vec<u64> = [2u64, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 15, 16, 21]
            .into_iter()
            .filter(|n| n % ell != 0)
            .collect();
        let classes = class_set(ell, 1, None).unwrap();
        let all = brandt_matrices(&classes, &ns).unwrap();
        for &n in &ns {
            let b = all.get(n).unwrap();
            for (i, &j0) in js.iter().enumerate() {
                let t = tally(&hecke_operator_multiset(&polys, j0, n, ell).unwrap());
                let row: Vec<u64> = js.iter().map(|j| t.get(j).copied().unwrap_or(0)).collect();
                assert_eq!(row, b.entries[i], "ell = {ell}, n = {n}, class {i}");
            }
        }
    }
}

#[test]
fn cyclic_walks_have_hecke_degree() {
    let polys = ModularPolynomials::load(None).unwrap();
    let ss = supersingular_js(23).unwrap();
    for n in [2u64, 4, 8, 9, 10, 25, 49] {
        for &j in &ss.js {
            let walk = hecke_orbit_multiset(&polys, j, n, 23).unwrap();
            assert_eq!(walk.len() as u64, deg_a(n));
            assert!(walk.iter().all(|x| ss.contains(x)));
        }
    }
}

#[test]
fn class_polynomial_degrees_up_to_2000() {
    for m in 3..=2000i64 {
        let d = -m;
        if d.rem_euclid(4) > 1 {
            continue;
        }
        let h = hilbert_class_poly(d).unwrap();
        assert_eq!(h.degree(), class_number(d), "D = {d}");
    }
}

#[test]
fn inert_reductions_are_supersingular() {
    for d in (-400i64..-2).filter(|&d| is_fundamental_discriminant(d)) {
        let h = hilbert_class_poly(d).unwrap();
        for ell in [11u64, 23, 47, 59] {
            if gcd_i64(d, ell as i64) != 1 || kronecker(d, ell as i64) != -1 {
                continue;
            }
            let roots = reduce_and_roots(&h, ell).unwrap();
            let ss = supersingular_js(ell).unwrap();
            assert_eq!(roots.len(), h.degree());
            assert!(roots.iter().all(|r| ss.contains(r)), "D = {d}, ell = {ell}");
        }
    }
}
