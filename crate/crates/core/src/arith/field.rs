use std::fmt;

use serde::{Deserialize, Serialize};

use super::{is_prime, least_nonresidue, mul_mod, pow_mod};

/// A finite field given by a context object; elements are plain `Copy` values.
pub trait FiniteField: Clone + fmt::Debug {
    type Elem: Copy + Eq + Ord + std::hash::Hash + fmt::Debug;

    fn characteristic(&self) -> u64;
    /// Number of elements.
    fn order(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: i64) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem>;
    /// The `k`-th element in a fixed enumeration, `0 <= k < order()`.
    fn element(&self, k: u64) -> Self::Elem;

    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.add(a, self.neg(b))
    }

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }

    fn pow(&self, a: Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn elements(&self) -> Box<dyn Iterator<Item = Self::Elem> + '_> {
        Box::new((0..self.order()).map(move |k| self.element(k)))
    }
}

/// The prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        assert!(is_prime(p), "{p} is not prime");
        Fp { p }
    }
}

impl FiniteField for Fp {
    type Elem = u64;

    fn characteristic(&self) -> u64 {
        self.p
    }
    fn order(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_int(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }
    fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }
    fn inv(&self, a: u64) -> Option<u64> {
        (a != 0).then(|| pow_mod(a, self.p - 2, self.p))
    }
    fn element(&self, k: u64) -> u64 {
        k
    }
}

/// An element `a + b t` of `F_{p^2} = F_p(t)`, `t^2 = u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fq2Element {
    pub a: u64,
    pub b: u64,
}

impl Fq2Element {
    pub fn is_rational(&self) -> bool {
        self.b == 0
    }
}

impl fmt::Display for Fq2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}t", self.a, self.b)
        }
    }
}

/// `F_{p^2}` realized as `F_p(t)` with `t^2 = u`, `u` the least non-residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fq2 {
    pub p: u64,
    pub u: u64,
}

impl Fq2 {
    pub fn new(p: u64) -> Self {
        assert!(p > 2 && is_prime(p), "F_p^2 needs an odd prime, got {p}");
        Fq2 {
            p,
            u: least_nonresidue(p),
        }
    }

    pub fn embed(&self, a: u64) -> Fq2Element {
        Fq2Element { a: a % self.p, b: 0 }
    }

    pub fn t(&self) -> Fq2Element {
        Fq2Element { a: 0, b: 1 }
    }

    /// Frobenius `x -> x^p`, i.e. `a + b t -> a - b t`.
    pub fn frobenius(&self, x: Fq2Element) -> Fq2Element {
        Fq2Element {
            a: x.a,
            b: if x.b == 0 { 0 } else { self.p - x.b },
        }
    }
}

impl FiniteField for Fq2 {
    type Elem = Fq2Element;

    fn characteristic(&self) -> u64 {
        self.p
    }
    fn order(&self) -> u64 {
        self.p * self.p
    }
    fn zero(&self) -> Fq2Element {
        Fq2Element { a: 0, b: 0 }
    }
    fn one(&self) -> Fq2Element {
        Fq2Element { a: 1, b: 0 }
    }
    fn from_int(&self, n: i64) -> Fq2Element {
        Fq2Element {
            a: n.rem_euclid(self.p as i64) as u64,
            b: 0,
        }
    }
    fn add(&self, x: Fq2Element, y: Fq2Element) -> Fq2Element {
        Fq2Element {
            a: (x.a + y.a) % self.p,
            b: (x.b + y.b) % self.p,
        }
    }
    fn neg(&self, x: Fq2Element) -> Fq2Element {
        Fq2Element {
            a: (self.p - x.a) % self.p,
            b: (self.p - x.b) % self.p,
        }
    }
    fn mul(&self, x: Fq2Element, y: Fq2Element) -> Fq2Element {
        let p = self.p;
        let bb = mul_mod(mul_mod(x.b, y.b, p), self.u, p);
        Fq2Element {
            a: (mul_mod(x.a, y.a, p) + bb) % p,
            b: (mul_mod(x.a, y.b, p) + mul_mod(x.b, y.a, p)) % p,
        }
    }
    fn inv(&self, x: Fq2Element) -> Option<Fq2Element> {
        // (a + bt)^{-1} = (a - bt) / (a^2 - u b^2)
        let p = self.p;
        let norm = (mul_mod(x.a, x.a, p) + p - mul_mod(self.u, mul_mod(x.b, x.b, p), p)) % p;
        if norm == 0 {
            return None;
        }
        let ninv = pow_mod(norm, p - 2, p);
        Some(Fq2Element {
            a: mul_mod(x.a, ninv, p),
            b: mul_mod((p - x.b) % p, ninv, p),
        })
    }
    fn element(&self, k: u64) -> Fq2Element {
        Fq2Element {
            a: k % self.p,
            b: k / self.p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fq2_is_a_field() {
        for p in [3u64, 5, 7, 11, 13] {
            let f = Fq2::new(p);
            assert_eq!(f.mul(f.t(), f.t()), f.embed(f.u));
            for x in f.elements().skip(1) {
                let y = f.inv(x).unwrap();
                assert_eq!(f.mul(x, y), f.one());
                // Frobenius is the p-th power map
                assert_eq!(f.pow(x, p), f.frobenius(x));
            }
        }
    }

    #[test]
    fn u_is_least_nonresidue() {
        assert_eq!(Fq2::new(7).u, 3);
        assert_eq!(Fq2::new(11).u, 2);
        assert_eq!(Fq2::new(13).u, 2);
        assert_eq!(Fq2::new(17).u, 3);
    }
}
