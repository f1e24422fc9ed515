//! Definite quaternion algebras over `Q` ramified at one prime, their orders,
//! ideal classes and Brandt matrices.

pub mod brandt;
pub mod ideals;
pub mod lattice;
pub mod order;

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime, kronecker, rat_int, Rational};
use crate::error::{ensure, Result};

pub use brandt::{brandt_matrices, brandt_matrix, BrandtMatrices, BrandtMatrix};
pub use ideals::{expected_mass, ideal_classes, isometric, mass, IdealClass, IdealClasses, RightIdealClass};
pub use lattice::QuatLattice;
pub use order::{eichler_order, eichler_order_for, maximal_order, maximal_order_for, QuatOrder};

/// An element `x0 + x1 i + x2 j + x3 k` with rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuatElement {
    pub coords: [Rational; 4],
}

impl QuatElement {
    pub fn new(coords: [Rational; 4]) -> Self {
        QuatElement { coords }
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        Self::new(c.map(rat_int))
    }

    pub fn zero() -> Self {
        Self::new(std::array::from_fn(|_| Rational::zero()))
    }

    pub fn one() -> Self {
        Self::from_scalar(&Rational::one())
    }

    pub fn from_scalar(s: &Rational) -> Self {
        let mut x = Self::zero();
        x.coords[0] = s.clone();
        x
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(std::array::from_fn(|i| &self.coords[i] + &o.coords[i]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(std::array::from_fn(|i| &self.coords[i] - &o.coords[i]))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(std::array::from_fn(|i| &self.coords[i] * s))
    }

    pub fn conj(&self) -> Self {
        let c = &self.coords;
        Self::new([c[0].clone(), -&c[1], -&c[2], -&c[3]])
    }

    pub fn trd(&self) -> Rational {
        &self.coords[0] * rat_int(2)
    }
}

impl fmt::Display for QuatElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coords;
        write!(f, "{} + {}i + {}j + {}k", c[0], c[1], c[2], c[3])
    }
}

/// The algebra `(a, b | Q)`: `i^2 = a`, `j^2 = b`, `k = ij = -ji`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub a: i64,
    pub b: i64,
    /// The finite ramified prime.
    pub ell: u64,
}

impl QuaternionAlgebra {
    pub fn mul(&self, x: &QuatElement, y: &QuatElement) -> QuatElement {
        let a = rat_int(self.a);
        let b = rat_int(self.b);
        let ab = &a * &b;
        let [x0, x1, x2, x3] = &x.coords;
        let [y0, y1, y2, y3] = &y.coords;
        let z0 = x0 * y0 + &a * (x1 * y1) + &b * (x2 * y2) - &ab * (x3 * y3);
        let z1 = x0 * y1 + x1 * y0 - &b * (x2 * y3) + &b * (x3 * y2);
        let z2 = x0 * y2 + x2 * y0 + &a * (x1 * y3) - &a * (x3 * y1);
        let z3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1;
        QuatElement::new([z0, z1, z2, z3])
    }

    pub fn nrd(&self, x: &QuatElement) -> Rational {
        let a = rat_int(self.a);
        let b = rat_int(self.b);
        let [x0, x1, x2, x3] = &x.coords;
        x0 * x0 - &a * (x1 * x1) - &b * (x2 * x2) + &a * &b * (x3 * x3)
    }

    /// `trd(x conj(y))`; `bilinear(x, x) = 2 nrd(x)`.
    pub fn bilinear(&self, x: &QuatElement, y: &QuatElement) -> Rational {
        let a = rat_int(self.a);
        let b = rat_int(self.b);
        let [x0, x1, x2, x3] = &x.coords;
        let [y0, y1, y2, y3] = &y.coords;
        rat_int(2) * (x0 * y0 - &a * (x1 * y1) - &b * (x2 * y2) + &a * &b * (x3 * y3))
    }

    pub fn inv(&self, x: &QuatElement) -> Option<QuatElement> {
        let n = self.nrd(x);
        (!n.is_zero()).then(|| x.conj().scale(&(Rational::one() / n)))
    }

    /// Primes where the algebra ramifies, sorted; `None` in the list stands for infinity.
    pub fn ramified_places(&self) -> Vec<Option<u64>> {
        let mut primes: Vec<u64> = factorize(2 * self.a.unsigned_abs() * self.b.unsigned_abs())
            .primes()
            .filter(|&p| hilbert_symbol(self.a, self.b, p) == -1)
            .collect();
        primes.sort();
        let mut out: Vec<Option<u64>> = primes.into_iter().map(Some).collect();
        if self.a < 0 && self.b < 0 {
            out.push(None);
        }
        out
    }

    pub fn basis_elements(&self) -> [QuatElement; 4] {
        std::array::from_fn(|i| {
            let mut c = [0i64; 4];
            c[i] = 1;
            QuatElement::from_ints(c)
        })
    }
}

/// The local Hilbert symbol `(a, b)_p` for a prime `p`.
pub fn hilbert_symbol(a: i64, b: i64, p: u64) -> i32 {
    assert!(a != 0 && b != 0, "Hilbert symbol of zero");
    let split = |mut x: i64| {
        let mut v = 0u32;
        while x % p as i64 == 0 {
            x /= p as i64;
            v += 1;
        }
        (v, x)
    };
    let (alpha, u) = split(a);
    let (beta, v) = split(b);
    if p == 2 {
        let eps = |x: i64| ((x - 1) / 2).rem_euclid(2);
        let omega = |x: i64| ((x as i128 * x as i128 - 1) / 8).rem_euclid(2) as i64;
        let e = eps(u) * eps(v) + alpha as i64 * omega(v) + beta as i64 * omega(u);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let pi = p as i64;
        let sign = if (alpha * beta) % 2 == 1 && (pi - 1) / 2 % 2 == 1 {
            -1
        } else {
            1
        };
        let lu = kronecker(u, pi).pow(beta);
        let lv = kronecker(v, pi).pow(alpha);
        sign * lu * lv
    }
}

/// A presentation of the definite algebra ramified exactly at `{ell, oo}`.
pub fn definite_algebra(ell: u64) -> Result<QuaternionAlgebra> {
    ensure!(is_prime(ell), InvalidInput, "ell = {ell} is not prime");
    let l = ell as i64;
    let (a, b) = if ell == 2 {
        (-1, -1)
    } else if ell % 4 == 3 {
        (-1, -l)
    } else if ell % 8 == 5 {
        (-2, -l)
    } else {
        let mut q = 3u64;
        while !(is_prime(q) && q % 4 == 3 && kronecker(-(q as i64), l) == -1) {
            q += 4;
        }
        (-(q as i64), -l)
    };
    let alg = QuaternionAlgebra { a, b, ell };
    ensure!(
        alg.ramified_places() == vec![Some(ell), None],
        Certificate,
        "({a}, {b}) does not ramify exactly at {{{ell}, oo}}"
    );
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_between;
    use proptest::prelude::*;

    #[test]
    fn hamilton_quaternions() {
        let h = definite_algebra(2).unwrap();
        let [_, i, j, k] = h.basis_elements();
        assert_eq!(h.mul(&i, &j), k);
        assert_eq!(h.mul(&j, &i), k.scale(&rat_int(-1)));
        assert_eq!(h.mul(&i, &i), QuatElement::from_ints([-1, 0, 0, 0]));
    }

    #[test]
    fn hilbert_symbol_values() {
        assert_eq!(hilbert_symbol(-1, -1, 2), -1);
        assert_eq!(hilbert_symbol(-1, -3, 3), -1);
        assert_eq!(hilbert_symbol(-1, -3, 2), 1);
        assert_eq!(hilbert_symbol(2, 3, 5), 1);
        assert_eq!(hilbert_symbol(5, 5, 5), 1);
    }

    #[test]
    fn ramification_for_small_primes() {
        for ell in primes_between(2, 400) {
            let alg = definite_algebra(ell).unwrap();
            assert_eq!(alg.ramified_places(), vec![Some(ell), None], "ell = {ell}");
        }
    }

    #[test]
    fn composite_rejected() {
        assert!(definite_algebra(15).is_err());
    }

    fn elem() -> impl Strategy<Value = QuatElement> {
        prop::array::uniform4(-20i64..20).prop_map(QuatElement::from_ints)
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(x in elem(), y in elem(), li in 0usize..5) {
            let alg = definite_algebra([2u64, 5, 11, 17, 41][li]).unwrap();
            let xy = alg.mul(&x, &y);
            prop_assert_eq!(alg.nrd(&xy), alg.nrd(&x) * alg.nrd(&y));
            // x conj(x) = nrd(x)
            prop_assert_eq!(alg.mul(&x, &x.conj()), QuatElement::from_scalar(&alg.nrd(&x)));
            // conj reverses products
            prop_assert_eq!(xy.conj(), alg.mul(&y.conj(), &x.conj()));
        }

        #[test]
        fn associativity(x in elem(), y in elem(), z in elem()) {
            let alg = definite_algebra(17).unwrap();
            prop_assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
        }

        #[test]
        fn hilbert_product_formula(a in -60i64..60, b in -60i64..60) {
            prop_assume!(a != 0 && b != 0);
            let mut prod = if a < 0 && b < 0 { -1 } else { 1 };
            for p in factorize(2 * a.unsigned_abs() * b.unsigned_abs()).primes() {
                prod *= hilbert_symbol(a, b, p);
            }
            prop_assert_eq!(prod, 1);
        }
    }
}
