use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ideals::IdealClasses;
use crate::arith::sigma1;
use crate::enumerate::theta_counts;
use crate::error::{ensure, Error, Result};

pub const MAX_BRANDT_INDEX: u64 = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtMatrix {
    pub m: u64,
    pub entries: Vec<Vec<u64>>,
}

impl BrandtMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn mul(&self, other: &BrandtMatrix) -> Vec<Vec<u64>> {
        let n = self.size();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.entries[i][k] * other.entries[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    /// `w_j B[i][j] = w_i B[j][i]`.
    pub fn weight_symmetric(&self, weights: &[u64]) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| weights[j] * self.entries[i][j] == weights[i] * self.entries[j][i]))
    }
}

/// Brandt matrices of one class set, in the documented JSON layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtMatrices {
    pub ell: u64,
    pub level: u64,
    pub weights: Vec<u64>,
    pub matrices: BTreeMap<u64, Vec<Vec<u64>>>,
}

impl BrandtMatrices {
    pub fn get(&self, m: u64) -> Option<BrandtMatrix> {
        self.matrices.get(&m).map(|e| BrandtMatrix { m, entries: e.clone() })
    }
}

/// Representation numbers `#{beta in I_j conj(I_i) : nrd(beta) = m nrd(I_i) nrd(I_j)}`
/// for all pairs and all `m <= max_m`.
fn pair_thetas(classes: &IdealClasses, max_m: u64) -> Result<Vec<Vec<Vec<u64>>>> {
    let alg = classes.alg();
    let h = classes.len();
    let pairs: Vec<(usize, usize)> = (0..h).flat_map(|i| (i..h).map(move |j| (i, j))).collect();
    let computed: Vec<Result<((usize, usize), Vec<u64>)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let ci = &classes.classes[i];
            let cj = &classes.classes[j];
            let prod = cj.lattice.product(&ci.lattice.conj(), alg);
            let g = prod.scaled_gram(alg, &(&ci.norm * &cj.norm))?;
            let counts = theta_counts(&g, 2 * max_m as i64);
            ensure!(
                counts.iter().skip(1).step_by(2).all(|&c| c == 0),
                Certificate,
                "odd value in a normalized norm form"
            );
            Ok(((i, j), counts.into_iter().step_by(2).collect()))
        })
        .collect();
    let mut out = vec![vec![Vec::new(); h]; h];
    for r in computed {
        let ((i, j), t) = r?;
        out[j][i] = t.clone();
        out[i][j] = t;
    }
    Ok(out)
}

fn check_index(classes: &IdealClasses, m: u64) -> Result<()> {
    let bad = classes.ell() * classes.level();
    ensure!(m >= 1, InvalidInput, "Brandt index must be positive");
    ensure!(
        m <= MAX_BRANDT_INDEX,
        BoundExceeded,
        "Brandt index {m} exceeds {MAX_BRANDT_INDEX}"
    );
    ensure!(
        m.gcd(&bad) == 1,
        InvalidInput,
        "Brandt index {m} is not coprime to ell * N = {bad}"
    );
    Ok(())
}

/// `B(m)` for every `m` in `ms`, sharing one theta computation per class pair.
pub fn brandt_matrices(classes: &IdealClasses, ms: &[u64]) -> Result<BrandtMatrices> {
    for &m in ms {
        check_index(classes, m)?;
    }
    let max_m = ms.iter().copied().max().unwrap_or(1);
    let thetas = pair_thetas(classes, max_m)?;
    let weights = classes.weights();
    let h = classes.len();
    let mut matrices = BTreeMap::new();
    for &m in ms {
        let mut entries = vec![vec![0u64; h]; h];
        for i in 0..h {
            for j in 0..h {
                let count = thetas[i][j][m as usize];
                if count % weights[j] != 0 {
                    return Err(Error::Certificate(format!(
                        "B({m})[{i}][{j}] = {count}/{} is not an integer",
                        weights[j]
                    )));
                }
                entries[i][j] = count / weights[j];
            }
        }
        matrices.insert(m, entries);
    }
    Ok(BrandtMatrices {
        ell: classes.ell(),
        level: classes.level(),
        weights,
        matrices,
    })
}

pub fn brandt_matrix(classes: &IdealClasses, m: u64) -> Result<BrandtMatrix> {
    let all = brandt_matrices(classes, &[m])?;
    Ok(all.get(m).expect("requested index present"))
}

/// Rows of `B(m)` summing to something other than `sigma_1(m)`, as `(row, sum)`.
pub fn row_sum_violations(b: &BrandtMatrix) -> Vec<(usize, u64)> {
    let expect = sigma1(b.m);
    b.row_sums()
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s != expect)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use crate::quaternion::{ideal_classes, maximal_order_for};

    fn classes(ell: u64) -> IdealClasses {
        ideal_classes(&maximal_order_for(ell).unwrap()).unwrap()
    }

    #[test]
    fn b1_is_identity() {
        let c = classes(37);
        let b = brandt_matrix(&c, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.entries[i][j], u64::from(i == j));
            }
        }
    }

    #[test]
    fn ell_11_small_matrices() {
        let c = classes(11);
        let b2 = brandt_matrix(&c, 2).unwrap();
        assert_eq!(b2.entries, vec![vec![1, 2], vec![3, 0]]);
        let b3 = brandt_matrix(&c, 3).unwrap();
        assert_eq!(b3.row_sums(), vec![4, 4]);
        assert!(b3.weight_symmetric(&c.weights()));
    }

    #[test]
    fn index_must_be_coprime() {
        let c = classes(11);
        assert!(brandt_matrix(&c, 22).is_err());
        assert!(brandt_matrix(&c, 0).is_err());
    }

    #[test]
    fn hecke_relations() {
        let c = classes(37);
        let ms: Vec<u64> = (1..=64).filter(|m| m % 37 != 0).collect();
        let all = brandt_matrices(&c, &ms).unwrap();
        let b = |m: u64| all.get(m).unwrap();
        for m in 1..=20u64 {
            for n in 1..=20u64 {
                if m.gcd(&n) == 1 && m * n <= 64 {
                    assert_eq!(b(m).mul(&b(n)), b(m * n).entries, "B({m})B({n})");
                }
            }
        }
        for p in (2..=8u64).filter(|&p| is_prime(p)) {
            let mut pe = p;
            while pe * p <= 64 {
                let lhs = b(p).mul(&b(pe));
                let prev = if pe == p { 1 } else { pe / p };
                let rhs: Vec<Vec<u64>> = b(pe * p)
                    .entries
                    .iter()
                    .zip(&b(prev).entries)
                    .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| x + p * y).collect())
                    .collect();
                assert_eq!(lhs, rhs, "p = {p}, p^e = {pe}");
                pe *= p;
            }
        }
        for m in &ms {
            assert!(row_sum_violations(&b(*m)).is_empty());
            assert!(b(*m).weight_symmetric(&all.weights));
        }
    }

    #[test]
    fn json_layout() {
        let c = classes(11);
        let all = brandt_matrices(&c, &[2, 3]).unwrap();
        let v = serde_json::to_value(&all).unwrap();
        assert_eq!(v["ell"], 11);
        assert_eq!(v["matrices"]["2"], serde_json::json!([[1, 2], [3, 0]]));
    }
}
