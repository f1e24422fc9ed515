//! Local coset computations at a prime `q`: the Galois representatives `S_n`,
//! Hecke coset representatives `S'_n`, and exact checks that `S_n h[q^e]`
//! sits inside the Hecke double coset of `a(q^e) = diag(q^e, 1)` as pairwise
//! distinct right cosets of `GL_2(Z_q)`.
//!
//! All tests are valuation computations on exact rationals.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{factorize, is_prime, least_nonresidue, rat_int, rational_valuation, Rational};
use crate::error::{ensure, Error, Result};
use crate::quadratic::{d_of_n, splitting_type, ImagQuadField, SplittingType};

/// A 2x2 rational matrix `(a, b; c, d)` read as an element of `GL_2(Q_q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat2Q {
    pub entries: [Rational; 4],
    pub q: u64,
}

impl fmt::Display for Mat2Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.entries;
        write!(f, "({a}, {b}; {c}, {d})")
    }
}

impl Mat2Q {
    pub fn new(q: u64, entries: [Rational; 4]) -> Self {
        Mat2Q { entries, q }
    }

    pub fn from_ints(q: u64, e: [i64; 4]) -> Self {
        Self::new(q, e.map(rat_int))
    }

    pub fn identity(q: u64) -> Self {
        Self::from_ints(q, [1, 0, 0, 1])
    }

    pub fn det(&self) -> Rational {
        let [a, b, c, d] = &self.entries;
        a * d - b * c
    }

    pub fn mul(&self, o: &Mat2Q) -> Mat2Q {
        let [a, b, c, d] = &self.entries;
        let [e, f, g, h] = &o.entries;
        Mat2Q::new(self.q, [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    pub fn inv(&self) -> Result<Mat2Q> {
        let det = self.det();
        ensure!(!det.is_zero(), InvalidInput, "singular matrix {self}");
        let [a, b, c, d] = &self.entries;
        let s = Rational::one() / det;
        Ok(Mat2Q::new(self.q, [d * &s, -(b * &s), -(c * &s), a * &s]))
    }

    fn min_entry_valuation(&self) -> i64 {
        self.entries
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| rational_valuation(x, self.q).expect("nonzero entry"))
            .min()
            .unwrap_or(i64::MAX)
    }

    /// A canonical label of the right coset `M GL_2(Z_q)`.
    ///
    /// Column operations over `Z_q` bring `M` to `(q^a, b; 0, q^d)` with `b`
    /// reduced modulo `q^a Z_q`; the triple `(a, d, b)` is the label.
    pub fn coset_key(&self) -> Result<CosetKey> {
        ensure!(!self.det().is_zero(), InvalidInput, "singular matrix {self}");
        let q = self.q;
        let v = |x: &Rational| -> i64 {
            if x.is_zero() {
                i64::MAX
            } else {
                rational_valuation(x, q).expect("nonzero")
            }
        };
        let [mut a, mut b, mut c, mut d] = self.entries.clone();
        // bottom row pivot in the second column
        if v(&c) < v(&d) {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut c, &mut d);
        }
        // col1 -= (c/d) col2
        let t = &c / &d;
        a -= &t * &b;
        let va = v(&a);
        let vd = v(&d);
        // scale columns by units so the diagonal is a power of q
        let b = &b * qpow(q, vd) / &d;
        Ok(CosetKey {
            a: va,
            d: vd,
            b: reduce_mod_qpow(&b, q, va),
        })
    }

    pub fn same_coset(&self, other: &Mat2Q) -> Result<bool> {
        Ok(self.coset_key()? == other.coset_key()?)
    }
}

/// Label of a right coset of `GL_2(Z_q)`; see [`Mat2Q::coset_key`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetKey {
    pub a: i64,
    pub d: i64,
    pub b: Rational,
}

fn qpow(q: u64, e: i64) -> Rational {
    let base = Rational::from_integer(BigInt::from(q));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        Rational::one() / num_traits::pow(base, (-e) as usize)
    }
}

/// The representative of `x mod q^k Z_q` in `Z[1/q] ∩ [0, q^k)`.
fn reduce_mod_qpow(x: &Rational, q: u64, k: i64) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    let vx = rational_valuation(x, q).expect("nonzero");
    if vx >= k {
        return Rational::zero();
    }
    // x = y / q^s with y a q-integral rational, s >= 0
    let s = (-vx).max(0);
    let y = x * qpow(q, s);
    let m = BigInt::from(q).pow((k + s) as u32);
    let num = y.numer().mod_floor(&m);
    let den = y.denom().mod_floor(&m);
    let den_inv = mod_inverse(&den, &m).expect("denominator is a q-unit");
    let r = (num * den_inv).mod_floor(&m);
    Rational::new(r, BigInt::from(q).pow(s as u32))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// `M in GL_2(Z_q)`: integral entries and unit determinant.
pub fn in_gl2_zq(m: &Mat2Q, q: u64) -> Result<bool> {
    let det = m.det();
    ensure!(!det.is_zero(), InvalidInput, "singular matrix {m}");
    let integral = m
        .entries
        .iter()
        .all(|x| x.is_zero() || rational_valuation(x, q).unwrap() >= 0);
    Ok(integral && rational_valuation(&det, q)? == 0)
}

/// `M in GL_2(Z_q) diag(q^e, 1) GL_2(Z_q)`.
pub fn in_cartan_cell(m: &Mat2Q, q: u64, e: u32) -> Result<bool> {
    let det = m.det();
    ensure!(!det.is_zero(), InvalidInput, "singular matrix {m}");
    let mut mm = m.clone();
    mm.q = q;
    let minv = mm.min_entry_valuation();
    Ok(minv == 0 && rational_valuation(&det, q)? == e as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CosetKind {
    Galois,
    Hecke,
}

/// Generator `w` of the local maximal order of `L` at an inert prime, as a
/// multiplication matrix on the basis `(1, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InertGenerator {
    /// `w = sqrt(u)` with `u` a non-residue (odd `q`): `w = (0, u; 1, 0)`.
    SqrtNonResidue(i64),
    /// `w^2 = w + m` with `m` odd (`q = 2`, `D_L = 5 mod 8`): `w = (0, m; 1, 1)`.
    Omega(i64),
}

impl InertGenerator {
    pub fn for_prime(q: u64, field: &ImagQuadField) -> Result<Self> {
        ensure!(
            splitting_type(field, q) == SplittingType::Inert,
            Hypothesis,
            "{q} is not inert in {field}"
        );
        Ok(if q == 2 {
            InertGenerator::Omega((field.disc() - 1) / 4)
        } else {
            InertGenerator::SqrtNonResidue(least_nonresidue(q) as i64)
        })
    }

    /// The matrix of `x + y w`.
    fn embed(&self, q: u64, x: i64, y: i64) -> Mat2Q {
        match *self {
            InertGenerator::SqrtNonResidue(u) => Mat2Q::from_ints(q, [x, y * u, y, x]),
            InertGenerator::Omega(m) => Mat2Q::from_ints(q, [x, y * m, y, x + y]),
        }
    }
}

/// A list of right coset representatives at `q^e`.
#[derive(Debug, Clone)]
pub struct CosetSet {
    pub q: u64,
    pub e: u32,
    pub splitting: SplittingType,
    pub kind: CosetKind,
    pub reps: Vec<Mat2Q>,
}

impl CosetSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// No two representatives define the same right coset.
    pub fn pairwise_distinct(&self) -> Result<bool> {
        let mut seen = HashMap::new();
        for m in &self.reps {
            if seen.insert(m.coset_key()?, ()).is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn keys(&self) -> Result<Vec<CosetKey>> {
        self.reps.iter().map(|m| m.coset_key()).collect()
    }

    pub fn times(&self, h: &Mat2Q) -> Vec<Mat2Q> {
        self.reps.iter().map(|m| m.mul(h)).collect()
    }
}

/// `h[q^e]`: `(q^e, 1; 0, 1)` at split primes, `diag(q^e, 1)` at inert ones.
pub fn h_matrix(q: u64, e: u32, splitting: SplittingType) -> Result<Mat2Q> {
    let qe = (q as i64).pow(e);
    match splitting {
        SplittingType::Split => Ok(Mat2Q::from_ints(q, [qe, 1, 0, 1])),
        SplittingType::Inert => Ok(Mat2Q::from_ints(q, [qe, 0, 0, 1])),
        SplittingType::Ramified => Err(Error::Hypothesis(format!("{q} ramifies"))),
    }
}

/// `S_n` at `q^e` with the non-residue `u` (odd `q`).
pub fn s_n_reps(q: u64, e: u32, splitting: SplittingType, u: u64) -> Result<CosetSet> {
    ensure!(is_prime(q), InvalidInput, "{q} is not prime");
    let generator = match splitting {
        SplittingType::Inert => {
            ensure!(
                q != 2,
                InvalidInput,
                "at q = 2 use s_n_reps_with (no square-root generator)"
            );
            ensure!(
                crate::arith::kronecker(u as i64, q as i64) == -1,
                InvalidInput,
                "{u} is not a non-residue mod {q}"
            );
            Some(InertGenerator::SqrtNonResidue(u as i64))
        }
        _ => None,
    };
    s_n_reps_with(q, e, splitting, generator)
}

/// `S_n` at `q^e` for the field `L`.
pub fn s_n_reps_for_field(q: u64, e: u32, field: &ImagQuadField) -> Result<CosetSet> {
    let splitting = splitting_type(field, q);
    let generator = match splitting {
        SplittingType::Inert => Some(InertGenerator::for_prime(q, field)?),
        _ => None,
    };
    s_n_reps_with(q, e, splitting, generator)
}

pub fn s_n_reps_with(q: u64, e: u32, splitting: SplittingType, generator: Option<InertGenerator>) -> Result<CosetSet> {
    let qe = (q as i64).pow(e);
    let reps = if e == 0 {
        vec![Mat2Q::identity(q)]
    } else {
        match splitting {
            SplittingType::Split => (1..qe)
                .filter(|a| a % q as i64 != 0)
                .map(|a| Mat2Q::from_ints(q, [a, 0, 0, 1]))
                .collect(),
            SplittingType::Inert => {
                let g = generator.ok_or_else(|| Error::InvalidInput("inert case needs a generator".into()))?;
                let scale = match g {
                    InertGenerator::SqrtNonResidue(u) => u,
                    InertGenerator::Omega(_) => 1,
                };
                let mut reps: Vec<Mat2Q> = (1..=qe).map(|b| g.embed(q, 1, b)).collect();
                let qi = q as i64;
                reps.extend((1..=qe / qi).map(|a| g.embed(q, qi * a * scale, 1)));
                reps
            }
            SplittingType::Ramified => {
                return Err(Error::Hypothesis(format!("{q} ramifies; S_n is not defined there")))
            }
        }
    };
    Ok(CosetSet {
        q,
        e,
        splitting,
        kind: CosetKind::Galois,
        reps,
    })
}

/// Canonical representatives `(q^i, b; 0, q^(e-i))` of `GL_2(Z_q) a(q^e) GL_2(Z_q) / GL_2(Z_q)`.
pub fn hecke_reps(q: u64, e: u32) -> Result<CosetSet> {
    ensure!(is_prime(q), InvalidInput, "{q} is not prime");
    let qi = q as i64;
    let mut reps = Vec::new();
    for i in 0..=e {
        let top = qi.pow(i);
        let bottom = qi.pow(e - i);
        for b in 0..top {
            // primitive: entries not all divisible by q
            if top % qi == 0 && bottom % qi == 0 && b % qi == 0 {
                continue;
            }
            reps.push(Mat2Q::from_ints(q, [top, b, 0, bottom]));
        }
    }
    Ok(CosetSet {
        q,
        e,
        splitting: SplittingType::Split,
        kind: CosetKind::Hecke,
        reps,
    })
}

/// `S'_n`: `S_n h[q^e]`, completed (split case) by the canonical Hecke
/// representatives whose cosets it misses, in canonical order.
pub fn s_prime_n(galois: &CosetSet) -> Result<CosetSet> {
    let (q, e) = (galois.q, galois.e);
    let h = h_matrix(q, e, galois.splitting)?;
    let mut reps = galois.times(&h);
    if galois.splitting == SplittingType::Split {
        let have: std::collections::HashSet<CosetKey> = reps.iter().map(|m| m.coset_key()).collect::<Result<_>>()?;
        for m in hecke_reps(q, e)?.reps {
            if !have.contains(&m.coset_key()?) {
                reps.push(m);
            }
        }
    }
    Ok(CosetSet {
        q,
        e,
        splitting: galois.splitting,
        kind: CosetKind::Hecke,
        reps,
    })
}

/// `deg T_a(n) = prod q^(e-1) (q + 1)`.
pub fn deg_a(n: u64) -> u64 {
    factorize(n)
        .prime_powers()
        .map(|(q, e, _)| q.pow(e - 1) * (q + 1))
        .product()
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LocalReport {
    pub q: u64,
    pub e: u32,
    pub splitting: SplittingType,
    pub s_n: usize,
    pub s_prime_n: usize,
    pub distinct: bool,
    pub contained: bool,
    /// Inert: `S_n h` covers every Hecke coset. Split: the completion has size `2 q^(e-1)`.
    pub hecke_match: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ContainmentReport {
    pub n: u64,
    pub factors: Vec<LocalReport>,
    pub distinct: bool,
    pub contained: bool,
    pub d_num: i64,
    pub d_den: i64,
    /// `#S_n / #S'_n` agrees with the density `d(n)` of the field.
    pub d_matches: bool,
}

/// Checks the local statements at `q^e`.
pub fn verify_local(q: u64, e: u32, field: &ImagQuadField) -> Result<LocalReport> {
    let s = s_n_reps_for_field(q, e, field)?;
    let h = h_matrix(q, e, s.splitting)?;
    let moved = CosetSet {
        reps: s.times(&h),
        kind: CosetKind::Hecke,
        ..s.clone()
    };
    let distinct = moved.pairwise_distinct()?;
    let mut contained = true;
    for m in &moved.reps {
        contained &= in_cartan_cell(m, q, e)?;
    }
    let sp = s_prime_n(&s)?;
    let deg = deg_a(q.pow(e)) as usize;
    let canonical: std::collections::BTreeSet<CosetKey> = hecke_reps(q, e)?.keys()?.into_iter().collect();
    let ours: std::collections::BTreeSet<CosetKey> = sp.keys()?.into_iter().collect();
    let hecke_match = ours == canonical
        && sp.len() == deg
        && match s.splitting {
            SplittingType::Inert => moved.len() == deg,
            _ => sp.len() - s.len() == 2 * q.pow(e - 1) as usize,
        };
    Ok(LocalReport {
        q,
        e,
        splitting: s.splitting,
        s_n: s.len(),
        s_prime_n: sp.len(),
        distinct,
        contained,
        hecke_match,
    })
}

/// The orbit-containment statement for `n`, prime power by prime power.
pub fn verify_orbit_containment(
    n: u64,
    field: &ImagQuadField,
    ell: u64,
    level: Option<u64>,
) -> Result<ContainmentReport> {
    ensure!(n >= 1, InvalidInput, "n must be positive");
    let bad = (ell as i64) * field.disc() * level.unwrap_or(1) as i64;
    ensure!(
        (n as i64).gcd(&bad) == 1,
        Hypothesis,
        "n = {n} must be coprime to ell * N * D_L = {}",
        bad.abs()
    );
    let mut factors = Vec::new();
    let (mut s_total, mut sp_total) = (1u64, 1u64);
    for (q, e, _) in factorize(n).prime_powers() {
        let r = verify_local(q, e, field)?;
        s_total *= r.s_n as u64;
        sp_total *= r.s_prime_n as u64;
        factors.push(r);
    }
    let d = Rational::new(s_total.into(), sp_total.into());
    let expected = d_of_n(n, field)?;
    let (num, den) = crate::arith::rational_to_pair(&d)?;
    Ok(ContainmentReport {
        n,
        distinct: factors.iter().all(|r| r.distinct),
        contained: factors.iter().all(|r| r.contained),
        factors,
        d_num: num,
        d_den: den,
        d_matches: d == expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn field(d: i64) -> ImagQuadField {
        ImagQuadField::new(d).unwrap()
    }

    #[test]
    fn spec_examples_for_s_n() {
        let s = s_n_reps(5, 1, SplittingType::Split, 2).unwrap();
        assert_eq!(s.len(), 4);
        let s = s_n_reps(7, 1, SplittingType::Inert, 3).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.reps[0], Mat2Q::from_ints(7, [1, 3, 1, 1]));
        assert_eq!(s.reps[7], Mat2Q::from_ints(7, [21, 3, 1, 21]));
        let s = s_n_reps(3, 0, SplittingType::Inert, 2).unwrap();
        assert_eq!(s.reps, vec![Mat2Q::identity(3)]);
    }

    #[test]
    fn hecke_rep_counts() {
        assert_eq!(hecke_reps(5, 1).unwrap().len(), 6);
        assert_eq!(hecke_reps(2, 2).unwrap().len(), 6);
        assert_eq!(hecke_reps(3, 1).unwrap().len(), 4);
        for (q, e) in [(2u64, 5u32), (3, 3), (7, 2)] {
            let h = hecke_reps(q, e).unwrap();
            assert_eq!(h.len() as u64, deg_a(q.pow(e)));
            assert!(h.pairwise_distinct().unwrap());
            assert!(h.reps.iter().all(|m| in_cartan_cell(m, q, e).unwrap()));
        }
    }

    #[test]
    fn membership_examples() {
        assert!(in_gl2_zq(&Mat2Q::identity(5), 5).unwrap());
        assert!(!in_gl2_zq(&Mat2Q::new(5, [rat(1, 1), rat(1, 5), rat(0, 1), rat(1, 1)]), 5).unwrap());
        assert!(!in_gl2_zq(&Mat2Q::from_ints(5, [5, 1, 0, 1]), 5).unwrap());
        assert!(in_cartan_cell(&Mat2Q::from_ints(5, [5, 1, 0, 1]), 5, 1).unwrap());
        assert!(!in_cartan_cell(&Mat2Q::from_ints(5, [5, 0, 0, 5]), 5, 1).unwrap());
        assert!(in_cartan_cell(&Mat2Q::from_ints(5, [25, 3, 0, 1]), 5, 2).unwrap());
        assert!(in_gl2_zq(&Mat2Q::from_ints(5, [0, 0, 0, 1]), 5).is_err());
    }

    #[test]
    fn deg_a_values() {
        assert_eq!(deg_a(5), 6);
        assert_eq!(deg_a(12), 24);
        assert_eq!(deg_a(1), 1);
    }

    #[test]
    fn containment_examples() {
        let r = verify_orbit_containment(5, &field(-4), 11, None).unwrap();
        assert!(r.distinct && r.contained && r.d_matches);
        assert_eq!((r.d_num, r.d_den), (2, 3));
        let r = verify_orbit_containment(7, &field(-4), 11, None).unwrap();
        assert!(r.distinct && r.contained);
        assert_eq!((r.d_num, r.d_den), (1, 1));
        let r = verify_orbit_containment(1, &field(-4), 11, None).unwrap();
        assert_eq!((r.d_num, r.d_den), (1, 1));
        assert!(verify_orbit_containment(22, &field(-4), 11, None).is_err());
    }

    #[test]
    fn inert_two_uses_omega() {
        for d in [-3i64, -11] {
            for e in 1..=5 {
                let r = verify_local(2, e, &field(d)).unwrap();
                assert!(r.distinct && r.contained && r.hecke_match, "D = {d}, e = {e}");
            }
        }
    }

    /// Oracle: equivalence through `M1^-1 M2 in GL_2(Z_q)`, pair by pair.
    fn distinct_by_pairs(ms: &[Mat2Q], q: u64) -> bool {
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                let x = ms[i].inv().unwrap().mul(&ms[j]);
                if in_gl2_zq(&x, q).unwrap() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn coset_keys_agree_with_pairwise_oracle() {
        for (q, e, d) in [(5u64, 2u32, -4i64), (3, 2, -4), (7, 1, -3), (2, 3, -7), (2, 2, -3)] {
            let f = field(d);
            let s = s_n_reps_for_field(q, e, &f).unwrap();
            let sp = s_prime_n(&s).unwrap();
            assert_eq!(sp.pairwise_distinct().unwrap(), distinct_by_pairs(&sp.reps, q));
            assert!(distinct_by_pairs(&sp.reps, q));
            // keys identify equal cosets: M and M k for k in GL_2(Z_q)
            let k = Mat2Q::from_ints(q, [2, 1, 1, 1]);
            for m in &sp.reps {
                assert!(m.same_coset(&m.mul(&k)).unwrap());
            }
        }
    }
}
