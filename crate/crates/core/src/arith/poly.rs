use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::FiniteField;
use crate::error::{ensure, Result};

const SPLIT_SEED: u64 = 0x5eed_1e9e;

/// Dense univariate polynomial over a finite field, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly<F: FiniteField> {
    pub field: F,
    coeffs: Vec<F::Elem>,
}

impl<F: FiniteField> Poly<F> {
    pub fn new(field: F, mut coeffs: Vec<F::Elem>) -> Self {
        while coeffs.last().is_some_and(|c| field.is_zero(*c)) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    pub fn from_ints(field: F, coeffs: &[i64]) -> Self {
        let c = coeffs.iter().map(|&n| field.from_int(n)).collect();
        Self::new(field, c)
    }

    pub fn zero(field: F) -> Self {
        Poly {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(field: F, c: F::Elem) -> Self {
        Self::new(field, vec![c])
    }

    /// `X - r`
    pub fn linear(field: F, r: F::Elem) -> Self {
        let one = field.one();
        let nr = field.neg(r);
        Self::new(field, vec![nr, one])
    }

    pub fn x(field: F) -> Self {
        let (z, o) = (field.zero(), field.one());
        Self::new(field, vec![z, o])
    }

    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> F::Elem {
        *self.coeffs.last().expect("zero polynomial has no leading coefficient")
    }

    pub fn eval(&self, x: F::Elem) -> F::Elem {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(f.zero(), |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(f.zero());
                let b = other.coeffs.get(i).copied().unwrap_or(f.zero());
                f.add(a, b)
            })
            .collect();
        Self::new(f.clone(), c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(self.field.neg(self.field.one())))
    }

    pub fn scale(&self, s: F::Elem) -> Self {
        let f = &self.field;
        Self::new(f.clone(), self.coeffs.iter().map(|&c| f.mul(c, s)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field.clone());
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(f.clone(), out)
    }

    pub fn monic(&self) -> Self {
        let inv = self.field.inv(self.lead()).expect("nonzero leading coefficient");
        self.scale(inv)
    }

    /// Euclidean division `self = q * d + r`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let f = &self.field;
        let dd = d.coeffs.len() - 1;
        let inv = f.inv(d.lead()).unwrap();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(f.clone()), self.clone());
        }
        let mut q = vec![f.zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = f.mul(r[i + dd], inv);
            q[i] = c;
            if f.is_zero(c) {
                continue;
            }
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(c, dc));
            }
        }
        r.truncate(dd);
        (Self::new(f.clone(), q), Self::new(f.clone(), r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, mut e: u64, m: &Self) -> Self {
        let mut acc = Self::constant(self.field.clone(), self.field.one()).rem(m);
        let mut base = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }
}

/// Roots of `f` in its coefficient field, with multiplicities, sorted by root.
///
/// Distinct-degree step `gcd(f, X^q - X)`, then equal-degree splitting with a
/// fixed-seed generator so the output is reproducible.
pub fn poly_roots<F: FiniteField>(f: &Poly<F>) -> Result<Vec<(F::Elem, u32)>> {
    ensure!(!f.is_zero(), InvalidInput, "roots of the zero polynomial");
    let field = f.field.clone();
    if f.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let f = f.monic();
    let q = field.order();
    let x = Poly::x(field.clone());
    let xq = x.pow_mod(q, &f);
    let g = f.gcd(&xq.sub(&x));

    let mut roots = Vec::new();
    if g.degree().unwrap_or(0) > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
        split_linear(&g, &mut rng, &mut roots);
    }
    roots.sort();
    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        let lin = Poly::linear(field.clone(), r);
        let mut rest = f.clone();
        let mut mult = 0;
        loop {
            let (qt, rm) = rest.div_rem(&lin);
            if !rm.is_zero() {
                break;
            }
            rest = qt;
            mult += 1;
        }
        out.push((r, mult));
    }
    Ok(out)
}

/// `g` is monic, squarefree and a product of linear factors.
fn split_linear<F: FiniteField>(g: &Poly<F>, rng: &mut ChaCha8Rng, out: &mut Vec<F::Elem>) {
    let field = g.field.clone();
    match g.degree() {
        Some(0) | None => return,
        Some(1) => {
            out.push(field.neg(g.coeffs()[0]));
            return;
        }
        _ => {}
    }
    let q = field.order();
    if q <= 64 || field.characteristic() == 2 {
        for e in field.elements() {
            if field.is_zero(g.eval(e)) {
                out.push(e);
            }
        }
        return;
    }
    loop {
        let a = field.element(rng.gen_range(0..q));
        let shifted = Poly::x(field.clone()).add(&Poly::constant(field.clone(), a));
        let h = shifted
            .pow_mod((q - 1) / 2, g)
            .sub(&Poly::constant(field.clone(), field.one()));
        let d = g.gcd(&h);
        let dd = d.degree().unwrap_or(0);
        if dd > 0 && Some(dd) < g.degree() {
            let (other, _) = g.div_rem(&d);
            split_linear(&d, rng, out);
            split_linear(&other.monic(), rng, out);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{Fp, Fq2};
    use proptest::prelude::*;

    fn brute_roots<F: FiniteField>(f: &Poly<F>) -> Vec<(F::Elem, u32)> {
        let field = f.field.clone();
        let mut out = Vec::new();
        for e in field.elements() {
            let lin = Poly::linear(field.clone(), e);
            let mut rest = f.clone();
            let mut m = 0;
            while rest.eval(e) == field.zero() && !rest.is_zero() {
                rest = rest.div_rem(&lin).0;
                m += 1;
            }
            if m > 0 {
                out.push((e, m));
            }
        }
        out.sort();
        out
    }

    #[test]
    fn linear_root() {
        let f = Poly::from_ints(Fp::new(13), &[-5, 1]);
        assert_eq!(poly_roots(&f).unwrap(), vec![(5, 1)]);
    }

    #[test]
    fn x2_plus_1_over_f11_and_f121() {
        let f = Poly::from_ints(Fp::new(11), &[1, 0, 1]);
        assert!(poly_roots(&f).unwrap().is_empty());
        let k = Fq2::new(11);
        let g = Poly::from_ints(k, &[1, 0, 1]);
        let roots = poly_roots(&g).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, m) in &roots {
            assert_eq!(*m, 1);
            assert_eq!(k.mul(*r, *r), k.from_int(-1));
        }
        assert_eq!(roots, brute_roots(&g));
    }

    #[test]
    fn double_root() {
        let f = Poly::from_ints(Fp::new(7), &[9, -6, 1]);
        assert_eq!(poly_roots(&f).unwrap(), vec![(3, 2)]);
    }

    #[test]
    fn zero_poly_rejected() {
        assert!(poly_roots(&Poly::zero(Fp::new(5))).is_err());
    }

    proptest! {
        #[test]
        fn roots_match_exhaustive_fp(pi in 0usize..8, coeffs in prop::collection::vec(-200i64..200, 1..=9)) {
            let p = [3u64, 5, 7, 13, 31, 67, 89, 101][pi];
            let f = Poly::from_ints(Fp::new(p), &coeffs);
            prop_assume!(!f.is_zero());
            prop_assert_eq!(poly_roots(&f).unwrap(), brute_roots(&f));
        }

        #[test]
        fn roots_match_exhaustive_fq2(pi in 0usize..4, coeffs in prop::collection::vec(-50i64..50, 1..=6)) {
            let p = [3u64, 7, 11, 19][pi];
            let f = Poly::from_ints(Fq2::new(p), &coeffs);
            prop_assume!(!f.is_zero());
            prop_assert_eq!(poly_roots(&f).unwrap(), brute_roots(&f));
        }
    }
}
