//! Fixed-point complex numbers on big integers: a value is `(re + i im) / 2^bits`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub bits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    pub re: BigInt,
    pub im: BigInt,
}

impl Precision {
    pub fn one(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    pub fn from_int(&self, n: i64) -> BigInt {
        BigInt::from(n) << self.bits
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits
    }

    pub fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a << self.bits).div_floor(b)
    }

    pub fn sqrt(&self, a: &BigInt) -> BigInt {
        (a << self.bits).sqrt()
    }

    /// `arctan(1/x)` for an integer `x > 1`.
    fn arctan_inv(&self, x: i64) -> BigInt {
        let x2 = BigInt::from(x * x);
        let mut power = self.one() / x;
        let mut sum = power.clone();
        let mut k = 1i64;
        while !power.is_zero() {
            power /= &x2;
            let term = &power / (2 * k + 1);
            if k % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
            k += 1;
        }
        sum
    }

    pub fn pi(&self) -> BigInt {
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
        self.arctan_inv(5) * 16 - self.arctan_inv(239) * 4
    }

    pub fn cmul(&self, a: &Complex, b: &Complex) -> Complex {
        Complex {
            re: (&a.re * &b.re - &a.im * &b.im) >> self.bits,
            im: (&a.re * &b.im + &a.im * &b.re) >> self.bits,
        }
    }

    pub fn cdiv(&self, a: &Complex, b: &Complex) -> Complex {
        let den = self.mul(&b.re, &b.re) + self.mul(&b.im, &b.im);
        let num = self.cmul(
            a,
            &Complex {
                re: b.re.clone(),
                im: -&b.im,
            },
        );
        Complex {
            re: self.div(&num.re, &den),
            im: self.div(&num.im, &den),
        }
    }

    pub fn cone(&self) -> Complex {
        Complex {
            re: self.one(),
            im: BigInt::zero(),
        }
    }

    pub fn creal(&self, x: BigInt) -> Complex {
        Complex {
            re: x,
            im: BigInt::zero(),
        }
    }

    /// `exp(z)` by halving the argument, a Taylor series, and repeated squaring.
    pub fn cexp(&self, z: &Complex) -> Complex {
        let half = self.one() >> 1;
        let mut s = 0u32;
        let mut w = z.clone();
        while w.re.abs() > half || w.im.abs() > half {
            w.re >>= 1;
            w.im >>= 1;
            s += 1;
        }
        let mut sum = self.cone();
        let mut term = self.cone();
        let mut k = 1i64;
        loop {
            term = self.cmul(&term, &w);
            term.re /= k;
            term.im /= k;
            if term.re.is_zero() && term.im.is_zero() {
                break;
            }
            sum.re += &term.re;
            sum.im += &term.im;
            k += 1;
        }
        for _ in 0..s {
            sum = self.cmul(&sum, &sum);
        }
        sum
    }

    /// Nearest integer and the distance to it, as a fixed-point value.
    pub fn round(&self, x: &BigInt) -> (BigInt, BigInt) {
        let half = self.one() >> 1;
        let n = (x + &half) >> self.bits;
        let diff: BigInt = x - (&n << self.bits);
        let dist = diff.abs();
        (n, dist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn to_f64(p: &Precision, x: &BigInt) -> f64 {
        (x >> (p.bits - 52)).to_f64().unwrap() / (1u64 << 52) as f64
    }

    #[test]
    fn pi_digits() {
        let p = Precision { bits: 200 };
        let pi = p.pi();
        assert!((to_f64(&p, &pi) - std::f64::consts::PI).abs() < 1e-15);
        // first 31 decimal digits
        let digits: BigInt = (&pi * BigInt::from(10u64).pow(30)) >> 200;
        assert_eq!(digits.to_string(), "3141592653589793238462643383279");
    }

    #[test]
    fn exp_matches_f64() {
        let p = Precision { bits: 128 };
        let z = Complex {
            re: p.from_int(-3) / 2,
            im: p.from_int(5) / 4,
        };
        let e = p.cexp(&z);
        let expect = (-1.5f64).exp();
        assert!((to_f64(&p, &e.re) - expect * 1.25f64.cos()).abs() < 1e-14);
        assert!((to_f64(&p, &e.im) - expect * 1.25f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn division_inverts_multiplication() {
        let p = Precision { bits: 96 };
        let a = Complex {
            re: p.from_int(3),
            im: p.from_int(-7),
        };
        let b = Complex {
            re: p.from_int(2),
            im: p.from_int(5),
        };
        let c = p.cdiv(&p.cmul(&a, &b), &b);
        assert!((&c.re - &a.re).abs() < BigInt::from(1 << 10));
        assert!((&c.im - &a.im).abs() < BigInt::from(1 << 10));
    }
}
