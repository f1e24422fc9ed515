//! Exact Z-lattices inside a quaternion algebra.
//!
//! A lattice is stored as an integer matrix in row Hermite normal form over a
//! common positive denominator, so two lattices are equal iff their stored
//! data are equal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{QuatElement, QuaternionAlgebra};
use crate::arith::Rational;
use crate::error::{Error, Result};

/// Row-style Hermite normal form, pivoting on the first `pivot_cols` columns.
///
/// Returns the transformed rows and the rank `r`: rows `0..r` form the HNF
/// (upper staircase, positive pivots, entries above a pivot reduced into
/// `[0, pivot)`); rows `r..` vanish on the pivot columns.
pub fn hnf_rows(mut rows: Vec<Vec<BigInt>>, pivot_cols: usize) -> (Vec<Vec<BigInt>>, usize) {
    let m = rows.len();
    let mut r = 0;
    let mut pivots = Vec::new();
    for col in 0..pivot_cols {
        if r == m {
            break;
        }
        loop {
            let best = (r..m)
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&i, &j| rows[i][col].abs().cmp(&rows[j][col].abs()));
            let Some(best) = best else { break };
            rows.swap(r, best);
            let mut done = true;
            for i in r + 1..m {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[r][col]);
                let (head, tail) = rows.split_at_mut(i);
                sub_mul(&mut tail[0], &head[r], &q);
                if !rows[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r][col].is_zero() {
            continue;
        }
        if rows[r][col].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        pivots.push(col);
        r += 1;
    }
    for (k, &col) in pivots.iter().enumerate() {
        for i in 0..k {
            let q = rows[i][col].div_floor(&rows[k][col]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = rows.split_at_mut(k);
            sub_mul(&mut head[i], &tail[0], &q);
        }
    }
    (rows, r)
}

fn sub_mul(target: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    for (t, s) in target.iter_mut().zip(src) {
        *t -= q * s;
    }
}

/// Integer kernel `{u : u M = 0}` of the rows of `m`.
pub fn left_kernel(m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let aug: Vec<Vec<BigInt>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v = row.clone();
            v.extend((0..rows).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            v
        })
        .collect();
    let (h, r) = hnf_rows(aug, cols);
    h[r..].iter().map(|row| row[cols..].to_vec()).collect()
}

/// A full-rank or lower-rank lattice in `B = Q^4` (coordinates on `1, i, j, k`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuatLattice {
    rows: Vec<[BigInt; 4]>,
    denom: BigInt,
}

impl QuatLattice {
    pub fn from_generators(gens: &[QuatElement]) -> Result<Self> {
        let denom = gens
            .iter()
            .flat_map(|g| g.coords.iter())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let rows: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| {
                g.coords
                    .iter()
                    .map(|c| (c * BigRational::from_integer(denom.clone())).to_integer())
                    .collect()
            })
            .collect();
        let (h, r) = hnf_rows(rows, 4);
        if r == 0 {
            return Err(Error::InvalidInput("lattice generated by zero".into()));
        }
        let rows = h[..r]
            .iter()
            .map(|v| [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()])
            .collect();
        Ok(Self::normalized(rows, denom))
    }

    fn normalized(mut rows: Vec<[BigInt; 4]>, mut denom: BigInt) -> Self {
        let g = rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(denom.clone(), |acc, x| acc.gcd(x));
        if !g.is_one() {
            for r in rows.iter_mut() {
                for x in r.iter_mut() {
                    *x = &*x / &g;
                }
            }
            denom /= g;
        }
        QuatLattice { rows, denom }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> Vec<QuatElement> {
        self.rows
            .iter()
            .map(|r| {
                QuatElement::new(std::array::from_fn(|i| {
                    BigRational::new(r[i].clone(), self.denom.clone())
                }))
            })
            .collect()
    }

    /// Integer coordinates of `x` on the basis, if `x` lies in the lattice.
    pub fn coordinates(&self, x: &QuatElement) -> Option<Vec<BigInt>> {
        let scaled: Vec<BigRational> = x
            .coords
            .iter()
            .map(|c| c * BigRational::from_integer(self.denom.clone()))
            .collect();
        if scaled.iter().any(|c| !c.is_integer()) {
            return None;
        }
        let mut v: Vec<BigInt> = scaled.into_iter().map(|c| c.to_integer()).collect();
        let mut out = Vec::with_capacity(self.rank());
        let mut col = 0;
        for row in &self.rows {
            while col < 4 && row[col].is_zero() {
                if !v[col].is_zero() {
                    return None;
                }
                col += 1;
            }
            let (q, rem) = v[col].div_rem(&row[col]);
            if !rem.is_zero() {
                return None;
            }
            for k in 0..4 {
                v[k] -= &q * &row[k];
            }
            out.push(q);
        }
        v.iter().all(|c| c.is_zero()).then_some(out)
    }

    pub fn contains(&self, x: &QuatElement) -> bool {
        self.coordinates(x).is_some()
    }

    pub fn contains_lattice(&self, other: &QuatLattice) -> bool {
        other.basis().iter().all(|b| self.contains(b))
    }

    pub fn element(&self, coeffs: &[i64]) -> QuatElement {
        let mut acc = QuatElement::zero();
        for (c, b) in coeffs.iter().zip(self.basis()) {
            acc = acc.add(&b.scale(&Rational::from_integer((*c).into())));
        }
        acc
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let gens: Vec<QuatElement> = self.basis().iter().map(|b| b.scale(s)).collect();
        Self::from_generators(&gens).expect("nonzero scaling")
    }

    pub fn conj(&self) -> Self {
        let gens: Vec<QuatElement> = self.basis().iter().map(|b| b.conj()).collect();
        Self::from_generators(&gens).expect("conjugate lattice")
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut gens = self.basis();
        gens.extend(other.basis());
        Self::from_generators(&gens).expect("sum of lattices")
    }

    /// The lattice spanned by all products `x y`.
    pub fn product(&self, other: &Self, alg: &QuaternionAlgebra) -> Self {
        let a = self.basis();
        let b = other.basis();
        let gens: Vec<QuatElement> = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| (x, y)))
            .map(|(x, y)| alg.mul(x, y))
            .collect();
        Self::from_generators(&gens).expect("product of nonzero lattices")
    }

    pub fn left_mul(&self, x: &QuatElement, alg: &QuaternionAlgebra) -> Self {
        let gens: Vec<QuatElement> = self.basis().iter().map(|b| alg.mul(x, b)).collect();
        Self::from_generators(&gens).expect("left multiple")
    }

    pub fn right_mul(&self, x: &QuatElement, alg: &QuaternionAlgebra) -> Self {
        let gens: Vec<QuatElement> = self.basis().iter().map(|b| alg.mul(b, x)).collect();
        Self::from_generators(&gens).expect("right multiple")
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let denom = self.denom.lcm(&other.denom);
        let scale = |l: &QuatLattice| -> Vec<Vec<BigInt>> {
            let f = &denom / &l.denom;
            l.rows.iter().map(|r| r.iter().map(|x| x * &f).collect()).collect()
        };
        let a = scale(self);
        let mut stacked = a.clone();
        stacked.extend(scale(other));
        let ker = left_kernel(&stacked);
        let gens: Vec<Vec<BigInt>> = ker
            .iter()
            .map(|u| (0..4).map(|c| (0..a.len()).map(|i| &u[i] * &a[i][c]).sum()).collect())
            .collect();
        let (h, r) = hnf_rows(gens, 4);
        let rows = h[..r]
            .iter()
            .map(|v| [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()])
            .collect();
        Self::normalized(rows, denom)
    }

    /// Gram matrix of the bilinear form `trd(x conj(y))` on the basis.
    pub fn gram(&self, alg: &QuaternionAlgebra) -> Vec<Vec<Rational>> {
        let b = self.basis();
        b.iter()
            .map(|x| b.iter().map(|y| alg.bilinear(x, y)).collect())
            .collect()
    }

    /// Integer Gram matrix of `trd(x conj(y)) / scale`; errors if not integral.
    pub fn scaled_gram(&self, alg: &QuaternionAlgebra, scale: &Rational) -> Result<Vec<Vec<i64>>> {
        self.gram(alg)
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        let s = v / scale;
                        if !s.is_integer() {
                            return Err(Error::Certificate(format!("Gram entry {v} not divisible by {scale}")));
                        }
                        s.to_integer()
                            .to_i64()
                            .ok_or_else(|| Error::BoundExceeded("Gram entry exceeds i64".into()))
                    })
                    .collect()
            })
            .collect()
    }

    /// `Z`-module generated by the values `nrd(x)`, as a positive rational.
    pub fn norm(&self, alg: &QuaternionAlgebra) -> Rational {
        let b = self.basis();
        let mut vals: Vec<Rational> = b.iter().map(|x| alg.nrd(x)).collect();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                vals.push(alg.bilinear(&b[i], &b[j]));
            }
        }
        rational_gcd(&vals)
    }

    /// `|det(gram)|` as an exact rational.
    pub fn gram_det(&self, alg: &QuaternionAlgebra) -> Rational {
        determinant(&self.gram(alg)).abs()
    }
}

pub fn rational_gcd(vals: &[Rational]) -> Rational {
    let den = vals.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let num = vals.iter().fold(BigInt::zero(), |acc, v| {
        acc.gcd(&(v * BigRational::from_integer(den.clone())).to_integer())
    });
    BigRational::new(num, den)
}

/// Determinant by Gaussian elimination over `Q`.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};

    fn q(c: [i64; 4]) -> QuatElement {
        QuatElement::new(c.map(rat_int))
    }

    #[test]
    fn hnf_is_canonical() {
        let g1 = [
            q([2, 0, 0, 0]),
            q([0, 3, 0, 0]),
            q([1, 1, 0, 0]),
            q([0, 0, 1, 0]),
            q([0, 0, 0, 5]),
        ];
        let g2 = [
            q([1, 1, 0, 0]),
            q([0, 0, 1, 0]),
            q([0, 0, 0, 5]),
            q([1, -2, 0, 0]),
            q([0, 1, 0, 0]),
        ];
        let l1 = QuatLattice::from_generators(&g1).unwrap();
        let l2 = QuatLattice::from_generators(&g2).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(l1.rank(), 4);
    }

    #[test]
    fn coordinates_roundtrip() {
        let half = QuatElement::new([rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)]);
        let l =
            QuatLattice::from_generators(&[q([1, 0, 0, 0]), q([0, 1, 0, 0]), q([0, 0, 1, 0]), half.clone()]).unwrap();
        assert!(l.contains(&half));
        assert!(l.contains(&q([0, 0, 0, 1])));
        assert!(!l.contains(&QuatElement::new([rat(1, 2), rat(0, 1), rat(0, 1), rat(0, 1)])));
        let c = l.coordinates(&q([3, -1, 2, 7])).unwrap();
        let back = l.element(&c.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>());
        assert_eq!(back, q([3, -1, 2, 7]));
    }

    #[test]
    fn intersection_of_sublattices() {
        let a = QuatLattice::from_generators(&[q([2, 0, 0, 0]), q([0, 1, 0, 0]), q([0, 0, 1, 0]), q([0, 0, 0, 1])])
            .unwrap();
        let b = QuatLattice::from_generators(&[q([3, 0, 0, 0]), q([0, 1, 0, 0]), q([0, 0, 2, 0]), q([0, 0, 0, 1])])
            .unwrap();
        let c = a.intersection(&b);
        let expect =
            QuatLattice::from_generators(&[q([6, 0, 0, 0]), q([0, 1, 0, 0]), q([0, 0, 2, 0]), q([0, 0, 0, 1])])
                .unwrap();
        assert_eq!(c, expect);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m: Vec<Vec<BigInt>> = [[1, 2, 3], [4, 5, 6], [7, 8, 9], [2, 4, 6]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let k = left_kernel(&m);
        assert_eq!(k.len(), 2);
        for u in &k {
            for c in 0..3 {
                let s: BigInt = (0..4).map(|i| &u[i] * &m[i][c]).sum();
                assert!(s.is_zero());
            }
        }
    }
}
