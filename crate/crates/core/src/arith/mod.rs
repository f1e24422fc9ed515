//! Exact integer, rational, finite-field and polynomial arithmetic.
//!
//! Everything here works on machine integers (with `u128` intermediates) or
//! on `num` big integers and rationals. Desk-scale sizes only: factorization is
//! trial division, primality is deterministic Miller-Rabin.

mod field;
mod poly;

pub use field::{FiniteField, Fp, Fq2, Fq2Element};
pub use poly::{poly_roots, Poly};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Prime factorization `n = prod p^e`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeFactorization {
    pub factors: Vec<(u64, u32)>,
}

impl PrimeFactorization {
    pub fn recompose(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, u32, u64)> + '_ {
        self.factors.iter().map(|&(p, e)| (p, e, p.pow(e)))
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut m = n + 1;
    while !is_prime(m) {
        m += 1;
    }
    m
}

/// Primes `p` with `lo <= p <= hi`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&p| is_prime(p)).collect()
}

/// Trial division up to the square root; the cofactor left over is prime.
pub fn factorize(n: u64) -> PrimeFactorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    let mut cofactor_prime = is_prime(m);
    while !cofactor_prime && p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
            cofactor_prime = is_prime(m);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        debug_assert!(is_prime(m));
        factors.push((m, 1));
    }
    PrimeFactorization { factors }
}

pub fn sigma1(n: u64) -> u64 {
    factorize(n)
        .factors
        .iter()
        .map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1))
        .product()
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Kronecker symbol `(d/m)`, the standard extension of the Jacobi symbol.
pub fn kronecker(d: i64, m: i64) -> i32 {
    if m == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut m = m;
    if m < 0 {
        m = -m;
        if d < 0 {
            result = -result;
        }
    }
    let mut v = 0;
    while m % 2 == 0 {
        m /= 2;
        v += 1;
    }
    if v > 0 {
        if d % 2 == 0 {
            return 0;
        }
        // (d/2) = 1 if d = +-1 mod 8, -1 if d = +-3 mod 8
        let r = d.rem_euclid(8);
        if v % 2 == 1 && (r == 3 || r == 5) {
            result = -result;
        }
    }
    // Jacobi symbol (d/m) for odd positive m
    let mut a = d.rem_euclid(m);
    let mut n = m;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// `v_q(r)` for nonzero rational `r`.
pub fn rational_valuation(r: &Rational, q: u64) -> Result<i64> {
    ensure!(!r.is_zero(), InvalidInput, "valuation of zero is undefined");
    ensure!(is_prime(q), InvalidInput, "{q} is not prime");
    Ok(int_valuation(r.numer(), q) - int_valuation(r.denom(), q))
}

pub fn int_valuation(n: &BigInt, q: u64) -> i64 {
    let q = BigInt::from(q);
    let mut n = n.abs();
    let mut v = 0;
    if n.is_zero() {
        return i64::MAX;
    }
    loop {
        let (quot, rem) = n.div_rem(&q);
        if !rem.is_zero() {
            return v;
        }
        n = quot;
        v += 1;
    }
}

/// Smallest quadratic non-residue modulo the odd prime `p`.
pub fn least_nonresidue(p: u64) -> u64 {
    assert!(p > 2 && is_prime(p));
    (2..p).find(|&u| kronecker(u as i64, p as i64) == -1).unwrap()
}

/// Square root of `a` modulo the prime `p` (Tonelli-Shanks), if one exists.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let z = least_nonresidue(p);
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Extended Euclid on `i128`: returns `(g, x, y)` with `a x + b y = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

pub fn is_square_free(n: u64) -> bool {
    factorize(n).factors.iter().all(|&(_, e)| e == 1)
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rational_to_pair(r: &Rational) -> Result<(i64, i64)> {
    use num_traits::ToPrimitive;
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(Error::BoundExceeded(format!("{r} does not fit in i64"))),
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_one(r: &Rational) -> bool {
    r.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division_oracle(mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut d = 2;
        while n > 1 {
            if n.is_multiple_of(d) {
                n /= d;
                match out.last_mut() {
                    Some((p, e)) if *p == d => *e += 1,
                    _ => out.push((d, 1)),
                }
            } else {
                d += 1;
            }
        }
        out
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).factors.is_empty());
        assert_eq!(factorize(60).factors, vec![(2, 2), (3, 1), (5, 1)]);
        assert_eq!(factorize(9991).factors, trial_division_oracle(9991));
        assert_eq!(factorize(9991).factors, vec![(97, 1), (103, 1)]);
        assert_eq!(factorize(999_999_937).factors, vec![(999_999_937, 1)]);
    }

    #[test]
    fn recompose_exhaustive() {
        for n in 1..=100_000u64 {
            let f = factorize(n);
            assert_eq!(f.recompose(), n);
            assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.primes().all(is_prime));
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-4, 11), -1);
        assert_eq!(kronecker(-3, 13), 1);
    }

    fn legendre_euler(a: i64, p: u64) -> i32 {
        let r = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
        match r {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in primes_between(3, 200) {
            for d in -60..=60 {
                assert_eq!(kronecker(d, p as i64), legendre_euler(d, p), "({d}/{p})");
            }
        }
    }

    #[test]
    fn kronecker_multiplicative() {
        for d in -50i64..=50 {
            for m in 1i64..=50 {
                for m2 in 1i64..=50 {
                    if m.gcd(&m2) != 1 {
                        continue;
                    }
                    assert_eq!(
                        kronecker(d, m * m2),
                        kronecker(d, m) * kronecker(d, m2),
                        "d={d} m={m} m'={m2}"
                    );
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(rational_valuation(&rat(1, 5), 5).unwrap(), -1);
        assert_eq!(rational_valuation(&rat(50, 1), 5).unwrap(), 2);
        assert_eq!(rational_valuation(&rat(3, 4), 5).unwrap(), 0);
        assert!(rational_valuation(&rat(0, 1), 5).is_err());
    }

    #[test]
    fn sqrt_mod_all_residues() {
        for p in primes_between(3, 150) {
            for a in 0..p {
                match sqrt_mod(a, p) {
                    Some(r) => assert_eq!(mul_mod(r, r, p), a),
                    None => assert_eq!(kronecker(a as i64, p as i64), -1),
                }
            }
        }
    }

    #[test]
    fn sigma_small() {
        assert_eq!(sigma1(1), 1);
        assert_eq!(sigma1(12), 28);
        assert_eq!(sigma1(49), 57);
    }

    proptest! {
        #[test]
        fn miller_rabin_agrees_with_trial_division(n in 1u64..2_000_000) {
            let oracle = n > 1 && trial_division_oracle(n) == vec![(n, 1)];
            prop_assert_eq!(is_prime(n), oracle);
        }
    }
}
