//! Elliptic-curve side of the supersingular correspondence: supersingular
//! `j`-invariants, Hilbert class polynomials, CM reduction and Hecke walks on
//! `j`-invariants through modular polynomials.

pub mod fixed;
pub mod modpoly;

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, is_prime, kronecker, poly_roots, FiniteField, Fq2, Fq2Element, Poly, Rational};
use crate::error::{ensure, Error, Result};
use crate::grossgalois::simultaneous_reduction;
use crate::quadratic::{class_number, reduced_forms, ImagQuadField};
use crate::quaternion::IdealClasses;
use fixed::{Complex, Precision};
pub use modpoly::ModularPolynomialData;

/// Largest `ell` for which `F_ell`-rational supersingular values are confirmed
/// by exhaustive point counting.
pub const POINT_COUNT_LIMIT: u64 = 2000;
pub const MAX_CLASSPOLY_DISC: i64 = 10_000;
const CLASSPOLY_ATTEMPTS: u32 = 3;
const ROUNDING_GAP_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupersingularSet {
    pub ell: u64,
    pub js: Vec<Fq2Element>,
    /// `|Aut(E)| / 2` for each entry of `js`.
    pub weights: Vec<u64>,
}

impl SupersingularSet {
    pub fn len(&self) -> usize {
        self.js.len()
    }

    pub fn is_empty(&self) -> bool {
        self.js.is_empty()
    }

    pub fn contains(&self, j: &Fq2Element) -> bool {
        self.js.binary_search(j).is_ok()
    }

    pub fn weight_of(&self, j: &Fq2Element) -> Option<u64> {
        self.js.binary_search(j).ok().map(|k| self.weights[k])
    }

    /// `sum 1 / |Aut(E)|`, equal to `(ell - 1) / 24`.
    pub fn mass(&self) -> Rational {
        self.weights
            .iter()
            .map(|&w| Rational::new(BigInt::one(), BigInt::from(2 * w)))
            .sum()
    }
}

fn legendre_table(p: u64) -> Vec<i8> {
    let mut t = vec![-1i8; p as usize];
    t[0] = 0;
    for x in 1..p {
        t[(x * x % p) as usize] = 1;
    }
    t
}

/// Trace of Frobenius of `y^2 = x^3 + a x + b` over `F_p`.
fn frobenius_trace(p: u64, a: u64, b: u64, chi: &[i8]) -> i64 {
    let s: i64 = (0..p)
        .map(|x| {
            let v = ((x * x % p * x) % p + a * x % p + b) % p;
            chi[v as usize] as i64
        })
        .sum();
    -s
}

/// A short Weierstrass model `(a, b)` over `F_p` with `j(E) = j`.
fn curve_with_j(p: u64, j: u64) -> (u64, u64) {
    if j == 0 {
        (0, 1)
    } else if j == 1728 % p {
        (1, 0)
    } else {
        let f = Fq2::new(p);
        let k = f
            .inv(f.embed((1728 + p - j % p) % p))
            .map(|x| f.mul(x, f.embed(j)))
            .expect("j != 1728")
            .a;
        (3 * k % p, 2 * k % p)
    }
}

/// `F_ell`-rational supersingular `j` by exhaustive point counting.
pub fn rational_supersingular_by_count(ell: u64) -> Vec<u64> {
    let chi = legendre_table(ell);
    (0..ell)
        .into_par_iter()
        .filter(|&j| {
            let (a, b) = curve_with_j(ell, j);
            frobenius_trace(ell, a, b, &chi) % ell as i64 == 0
        })
        .collect()
}

/// Supersingular `j` over `F_{ell^2}` from the roots of the Legendre-form Hasse
/// invariant `sum_i C(m, i)^2 lambda^i`, `m = (ell - 1) / 2`.
fn supersingular_by_hasse(ell: u64) -> Result<Vec<Fq2Element>> {
    let f = Fq2::new(ell);
    let m = (ell - 1) / 2;
    let mut binom = vec![1u64; m as usize + 1];
    for i in 1..=m as usize {
        // C(m, i) = C(m, i-1) (m - i + 1) / i mod ell; i < ell so i is invertible
        let num = f.mul(f.embed(binom[i - 1]), f.embed(m - i as u64 + 1));
        binom[i] = f.mul(num, f.inv(f.embed(i as u64)).expect("unit")).a;
    }
    let coeffs: Vec<Fq2Element> = binom.iter().map(|&c| f.mul(f.embed(c), f.embed(c))).collect();
    let hasse = Poly::new(f, coeffs);
    let roots = poly_roots(&hasse)?;
    let total: u32 = roots.iter().map(|r| r.1).sum();
    ensure!(
        total as u64 == m,
        Certificate,
        "Hasse invariant mod {ell} splits into {total} roots over F_ell^2, expected {m}"
    );
    let mut js: Vec<Fq2Element> = roots
        .iter()
        .map(|&(lam, _)| {
            // j = 256 (l^2 - l + 1)^3 / (l^2 (l - 1)^2)
            let l2 = f.mul(lam, lam);
            let num = f.sub(f.add(l2, f.one()), lam);
            let num = f.mul(f.embed(256), f.pow(num, 3));
            let lm1 = f.sub(lam, f.one());
            let den = f.mul(l2, f.mul(lm1, lm1));
            f.mul(num, f.inv(den).expect("lambda not in {0, 1}"))
        })
        .collect();
    js.sort();
    js.dedup();
    Ok(js)
}

pub fn supersingular_js(ell: u64) -> Result<SupersingularSet> {
    ensure!(is_prime(ell), InvalidInput, "ell = {ell} is not prime");
    ensure!(
        ell >= 5,
        InvalidInput,
        "supersingular enumeration needs ell >= 5, got {ell}"
    );
    let js = supersingular_by_hasse(ell)?;
    if ell <= POINT_COUNT_LIMIT {
        let counted = rational_supersingular_by_count(ell);
        let rational: Vec<u64> = js.iter().filter(|j| j.is_rational()).map(|j| j.a).collect();
        ensure!(
            counted == rational,
            Certificate,
            "point counting mod {ell} finds {counted:?}, Hasse invariant gives {rational:?}"
        );
    }
    let weights = js
        .iter()
        .map(|j| {
            if *j == (Fq2Element { a: 0, b: 0 }) {
                3
            } else if *j == (Fq2Element { a: 1728 % ell, b: 0 }) {
                2
            } else {
                1
            }
        })
        .collect();
    let set = SupersingularSet { ell, js, weights };
    let lo = (ell - 1) / 12;
    ensure!(
        (lo..=lo + 2).contains(&(set.len() as u64)),
        Certificate,
        "{} supersingular values mod {ell}, outside [{lo}, {}]",
        set.len(),
        lo + 2
    );
    ensure!(
        set.mass() == Rational::new(BigInt::from(ell - 1), BigInt::from(24)),
        Certificate,
        "supersingular mass mod {ell} is {}, expected ({ell} - 1)/24",
        set.mass()
    );
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HilbertClassPoly {
    pub d: i64,
    /// Lowest degree first; the last entry is 1.
    #[serde(serialize_with = "decimal_strings")]
    pub coeffs: Vec<BigInt>,
}

impl HilbertClassPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `"D c0 c1 ... 1"`.
    pub fn to_line(&self) -> String {
        let mut s = self.d.to_string();
        for c in &self.coeffs {
            s.push(' ');
            s.push_str(&c.to_string());
        }
        s
    }

    pub fn reduce(&self, field: Fq2) -> Poly<Fq2> {
        let ell = BigInt::from(field.p);
        let c = self
            .coeffs
            .iter()
            .map(|c| field.embed(c.mod_floor(&ell).to_u64().expect("reduced")))
            .collect();
        Poly::new(field, c)
    }
}

fn decimal_strings<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

/// `sum_k (-1)^k q^{k(3k-1)/2}` over all integers `k`, i.e. `prod (1 - q^n)`.
fn euler_product(p: &Precision, q: &Complex) -> Complex {
    let mut sum = p.cone();
    let mut k = 1u64;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        let t1 = cpow(p, q, e1);
        if t1.re.is_zero() && t1.im.is_zero() {
            break;
        }
        let t2 = cpow(p, q, e2);
        let sign = if k % 2 == 1 { -1 } else { 1 };
        sum.re += (t1.re + t2.re) * sign;
        sum.im += (t1.im + t2.im) * sign;
        k += 1;
    }
    sum
}

fn cpow(p: &Precision, z: &Complex, mut e: u64) -> Complex {
    let mut acc = p.cone();
    let mut base = z.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = p.cmul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = p.cmul(&base, &base);
        }
    }
    acc
}

/// `j((-b + sqrt(d)) / 2a)` via `j = (256 f + 1)^3 / f`, `f = Delta(2 tau) / Delta(tau)`.
fn j_at_form(p: &Precision, d: i64, a: i64, b: i64, pi: &BigInt) -> Complex {
    let sqrt_d = p.sqrt(&p.from_int(-d));
    // 2 pi i tau = -pi sqrt|d| / a - i pi b / a
    let z = Complex {
        re: -(p.mul(pi, &sqrt_d) / a),
        im: -(pi * b / a),
    };
    let q = p.cexp(&z);
    let q2 = p.cmul(&q, &q);
    let ratio = p.cdiv(&euler_product(p, &q2), &euler_product(p, &q));
    let r24 = cpow(p, &ratio, 24);
    let f = p.cmul(&q, &r24);
    let mut g = f.clone();
    g.re *= 256;
    g.im *= 256;
    g.re += p.one();
    let g3 = p.cmul(&p.cmul(&g, &g), &g);
    p.cdiv(&g3, &f)
}

/// Bits of magnitude: `sum_forms pi sqrt|d| / (a ln 2)` and the largest single term.
fn magnitude_bits(d: i64, forms: &[(i64, i64)]) -> (u32, u32) {
    let base = std::f64::consts::PI * (-d as f64).sqrt() / std::f64::consts::LN_2;
    let terms: Vec<f64> = forms.iter().map(|&(a, _)| base / a as f64).collect();
    let sum: f64 = terms.iter().sum();
    let max = terms.iter().cloned().fold(0.0, f64::max);
    (sum.ceil() as u32 + 1, max.ceil() as u32 + 1)
}

fn classpoly_at(d: i64, forms: &[(i64, i64)], bits: u32) -> Option<Vec<BigInt>> {
    let p = Precision { bits };
    let pi = p.pi();
    let roots: Vec<Complex> = forms.par_iter().map(|&(a, b)| j_at_form(&p, d, a, b, &pi)).collect();
    let mut poly = vec![p.cone()];
    for r in &roots {
        let mut next = vec![
            Complex {
                re: BigInt::zero(),
                im: BigInt::zero()
            };
            poly.len() + 1
        ];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1].re += &c.re;
            next[k + 1].im += &c.im;
            let t = p.cmul(c, r);
            next[k].re -= t.re;
            next[k].im -= t.im;
        }
        poly = next;
    }
    let tol = BigInt::one() << (bits - ROUNDING_GAP_BITS);
    let mut out = Vec::with_capacity(poly.len());
    for c in &poly {
        let (n, dist) = p.round(&c.re);
        if dist >= tol || c.im.abs() >= tol {
            return None;
        }
        out.push(n);
    }
    Some(out)
}

/// The Hilbert class polynomial of the order of discriminant `d`, evaluated
/// from the `q`-expansion at the CM points of the reduced forms and rounded.
/// Every coefficient must lie within `2^-32` of an integer with a vanishing
/// imaginary part; otherwise the precision is doubled, up to three times.
pub fn hilbert_class_poly(d: i64) -> Result<HilbertClassPoly> {
    ensure!(
        d < 0 && d.rem_euclid(4) <= 1,
        InvalidInput,
        "{d} is not a negative discriminant"
    );
    ensure!(
        -d <= MAX_CLASSPOLY_DISC,
        BoundExceeded,
        "|D| = {} exceeds {MAX_CLASSPOLY_DISC}",
        -d
    );
    let forms: Vec<(i64, i64)> = reduced_forms(d).iter().map(|f| (f.a, f.b)).collect();
    let (sum_bits, max_bits) = magnitude_bits(d, &forms);
    let mut bits = 2 * (sum_bits + max_bits) + 256;
    for _ in 0..CLASSPOLY_ATTEMPTS {
        if let Some(coeffs) = classpoly_at(d, &forms, bits) {
            return Ok(HilbertClassPoly { d, coeffs });
        }
        bits *= 2;
    }
    Err(Error::Certificate(format!(
        "class polynomial for D = {d} failed the rounding certificate at {bits} bits"
    )))
}

/// Roots of `H mod ell` in `F_{ell^2}` with multiplicity, sorted. When `ell` is
/// inert in `Q(sqrt D)` every root must be supersingular.
pub fn reduce_and_roots(h: &HilbertClassPoly, ell: u64) -> Result<Vec<Fq2Element>> {
    ensure!(
        is_prime(ell) && ell >= 5,
        InvalidInput,
        "reduction needs a prime ell >= 5, got {ell}"
    );
    let field = Fq2::new(ell);
    let roots = poly_roots(&h.reduce(field))?;
    let multiset: Vec<Fq2Element> = roots
        .iter()
        .flat_map(|&(r, m)| std::iter::repeat_n(r, m as usize))
        .collect();
    if kronecker(h.d, ell as i64) == -1 {
        let ss = supersingular_js(ell)?;
        ensure!(
            multiset.len() == h.degree(),
            Certificate,
            "H_{} mod {ell} has {} roots in F_ell^2, degree {}",
            h.d,
            multiset.len(),
            h.degree()
        );
        if let Some(bad) = multiset.iter().find(|j| !ss.contains(j)) {
            return Err(Error::Certificate(format!(
                "root {bad} of H_{} mod {ell} is not supersingular although {ell} is inert",
                h.d
            )));
        }
    }
    Ok(multiset)
}

/// Modular polynomials for the Hecke walks, loaded once.
#[derive(Debug, Clone)]
pub struct ModularPolynomials {
    table: BTreeMap<u64, ModularPolynomialData>,
}

impl ModularPolynomials {
    pub fn load(dir: Option<&Path>) -> Result<Self> {
        let table = modpoly::SUPPORTED_PRIMES
            .iter()
            .map(|&p| ModularPolynomialData::load(p, dir).map(|d| (p, d)))
            .collect::<Result<_>>()?;
        Ok(ModularPolynomials { table })
    }

    pub fn get(&self, p: u64) -> Option<&ModularPolynomialData> {
        self.table.get(&p)
    }

    /// The `p + 1` targets of `p`-isogenies from `j`, with multiplicity.
    pub fn neighbors(&self, j: Fq2Element, p: u64, field: Fq2) -> Result<Vec<Fq2Element>> {
        let phi = self
            .get(p)
            .ok_or_else(|| Error::InvalidInput(format!("no modular polynomial for p = {p}")))?;
        let roots = poly_roots(&phi.specialize(field, j))?;
        let out: Vec<Fq2Element> = roots
            .iter()
            .flat_map(|&(r, m)| std::iter::repeat_n(r, m as usize))
            .collect();
        ensure!(
            out.len() as u64 == p + 1,
            Hypothesis,
            "Phi_{p}({j}, Y) does not split over F_{}^2 ({} of {} roots); j is not supersingular",
            field.p,
            out.len(),
            p + 1
        );
        Ok(out)
    }

    /// Endpoints of non-backtracking `p`-isogeny walks of length `e` from `j0`:
    /// each step drops one copy of the vertex it came from.
    fn cyclic_walk(&self, j0: Fq2Element, p: u64, e: u32, field: Fq2) -> Result<Vec<Fq2Element>> {
        let mut layer: Vec<(Fq2Element, Option<Fq2Element>)> = vec![(j0, None)];
        let mut cache: BTreeMap<Fq2Element, Vec<Fq2Element>> = BTreeMap::new();
        for _ in 0..e {
            let mut next = Vec::new();
            for (cur, prev) in layer {
                if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(cur) {
                    e.insert(self.neighbors(cur, p, field)?);
                }
                let mut nb = cache[&cur].clone();
                if let Some(pv) = prev {
                    let k = nb
                        .iter()
                        .position(|x| *x == pv)
                        .ok_or_else(|| Error::Certificate(format!("{pv} -> {cur} has no dual edge back")))?;
                    nb.remove(k);
                }
                next.extend(nb.into_iter().map(|x| (x, Some(cur))));
            }
            layer = next;
        }
        Ok(layer.into_iter().map(|(j, _)| j).collect())
    }
}

fn check_walk_index(n: u64, ell: u64) -> Result<()> {
    ensure!(n >= 1, InvalidInput, "Hecke index must be positive");
    for p in factorize(n).primes() {
        ensure!(
            modpoly::SUPPORTED_PRIMES.contains(&p),
            InvalidInput,
            "prime factor {p} of n = {n} is unsupported (modular polynomials exist for 2, 3, 5, 7)"
        );
        ensure!(p != ell, InvalidInput, "n = {n} is divisible by ell = {ell}");
    }
    Ok(())
}

/// `j`-invariants of the targets of cyclic `n`-isogenies from `j0`, with
/// multiplicity. The size is `deg_a(n) = n prod_{p | n} (1 + 1/p)`.
pub fn hecke_orbit_multiset(polys: &ModularPolynomials, j0: Fq2Element, n: u64, ell: u64) -> Result<Vec<Fq2Element>> {
    check_walk_index(n, ell)?;
    let field = Fq2::new(ell);
    let mut current = vec![j0];
    for (p, e, _) in factorize(n).prime_powers() {
        let mut next = Vec::new();
        for j in current {
            next.extend(polys.cyclic_walk(j, p, e, field)?);
        }
        current = next;
    }
    current.sort();
    Ok(current)
}

/// The Hecke operator `T_n` on `j0`: all index-`n` sublattices, i.e. cyclic walks
/// of length `e, e - 2, ...` at each prime power. The size is `sigma_1(n)`, the
/// Brandt row sum.
pub fn hecke_operator_multiset(
    polys: &ModularPolynomials,
    j0: Fq2Element,
    n: u64,
    ell: u64,
) -> Result<Vec<Fq2Element>> {
    check_walk_index(n, ell)?;
    let field = Fq2::new(ell);
    let mut current = vec![j0];
    for (p, e, _) in factorize(n).prime_powers() {
        let mut next = Vec::new();
        for j in current {
            let mut len = e as i64;
            while len >= 0 {
                next.extend(polys.cyclic_walk(j, p, len as u32, field)?);
                len -= 2;
            }
        }
        current = next;
    }
    current.sort();
    Ok(current)
}

/// Counts `(j, multiplicity)` of a multiset.
pub fn tally(js: &[Fq2Element]) -> BTreeMap<Fq2Element, u64> {
    let mut m = BTreeMap::new();
    for j in js {
        *m.entry(*j).or_insert(0) += 1;
    }
    m
}

/// Aggregate counts from both models for one conductor.
#[derive(Debug, Clone, Serialize)]
pub struct CrossReport {
    pub ell: u64,
    pub disc_l: i64,
    pub n: u64,
    pub disc: i64,
    /// `h(n^2 D_L)` from reduced forms.
    pub class_number: usize,
    pub poly_degree: usize,
    /// Rows of the Galois orbit table.
    pub table_rows: usize,
    /// Distinct Gross points in the orbit.
    pub orbit_size: usize,
    /// Roots of `H mod ell` in `F_{ell^2}`, with multiplicity.
    pub root_count: usize,
    pub all_supersingular: bool,
    pub mismatches: Vec<String>,
}

impl CrossReport {
    pub fn consistent(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `deg H_{n^2 D_L}`, `h(n^2 D_L)`, the Galois orbit and the supersingular
/// roots of `H mod ell`. Disagreements are listed, never reconciled.
pub fn cross_check_counts(classes: &IdealClasses, field: &ImagQuadField, n: u64) -> Result<CrossReport> {
    let ell = classes.ell();
    let order = field.order(n)?;
    let disc = order.disc();
    let h = class_number(disc);
    let poly = hilbert_class_poly(disc)?;
    let table = simultaneous_reduction(classes, &order, &[1])?;
    let ss = supersingular_js(ell)?;
    let roots = poly_roots(&poly.reduce(Fq2::new(ell)))?;
    let root_count: usize = roots.iter().map(|r| r.1 as usize).sum();
    let all_supersingular = roots.iter().all(|(r, _)| ss.contains(r));
    let mut mismatches = Vec::new();
    let mut expect = |what: &str, got: usize| {
        if got != h {
            mismatches.push(format!("{what} = {got}, h({disc}) = {h}"));
        }
    };
    expect("deg H", poly.degree());
    expect("table rows", table.entries.len());
    expect("orbit size", table.orbit_size);
    expect("roots in F_ell^2", root_count);
    if !all_supersingular {
        mismatches.push(format!("H_{disc} mod {ell} has an ordinary root"));
    }
    Ok(CrossReport {
        ell,
        disc_l: field.disc(),
        n,
        disc,
        class_number: h,
        poly_degree: poly.degree(),
        table_rows: table.entries.len(),
        orbit_size: table.orbit_size,
        root_count,
        all_supersingular,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_between;

    fn fq(a: u64) -> Fq2Element {
        Fq2Element { a, b: 0 }
    }

    #[test]
    fn small_supersingular_sets() {
        let s11 = supersingular_js(11).unwrap();
        assert_eq!(s11.js, vec![fq(0), fq(1)]);
        assert_eq!(s11.weights, vec![3, 2]);
        assert_eq!(supersingular_js(13).unwrap().js, vec![fq(5)]);
        assert_eq!(supersingular_js(37).unwrap().len(), 3);
        assert!(supersingular_js(3).is_err());
        assert!(supersingular_js(21).is_err());
    }

    #[test]
    fn counts_follow_residue_of_ell_mod_12() {
        for ell in primes_between(5, 400) {
            let s = supersingular_js(ell).unwrap();
            let extra = [0u64, 1, 1, 2][match ell % 12 {
                1 => 0,
                5 => 1,
                7 => 2,
                _ => 3,
            }];
            assert_eq!(s.len() as u64, (ell - 1) / 12 + extra, "ell = {ell}");
            // Frobenius permutes the set
            let f = Fq2::new(ell);
            assert!(s.js.iter().all(|j| s.contains(&f.frobenius(*j))));
        }
    }

    #[test]
    fn known_class_polynomials() {
        let h = |d| hilbert_class_poly(d).unwrap().coeffs;
        let ints = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(h(-3), ints(&[0, 1]));
        assert_eq!(h(-4), ints(&[-1728, 1]));
        assert_eq!(h(-7), ints(&[3375, 1]));
        assert_eq!(h(-8), ints(&[-8000, 1]));
        assert_eq!(h(-163), ints(&[640320i64.pow(3), 1]));
        assert_eq!(h(-15), ints(&[-121287375, 191025, 1]));
        assert_eq!(h(-12), ints(&[-54000, 1]));
        assert_eq!(h(-16), ints(&[-287496, 1]));
        assert_eq!(h(-23)[..2], ints(&[12771880859375, -5151296875])[..]);
    }

    #[test]
    fn class_polynomial_degrees() {
        for d in (3..=600i64).filter(|d| d % 4 == 0 || d % 4 == 3) {
            let h = hilbert_class_poly(-d).unwrap();
            assert_eq!(h.degree(), class_number(-d), "D = {}", -d);
        }
        assert!(hilbert_class_poly(-5).is_err());
        assert!(hilbert_class_poly(-10_003).is_err());
    }

    #[test]
    fn reduction_examples() {
        let r = |d, ell| reduce_and_roots(&hilbert_class_poly(d).unwrap(), ell).unwrap();
        assert_eq!(r(-3, 11), vec![fq(0)]);
        assert_eq!(r(-4, 11), vec![fq(1)]);
        // 13 splits in Q(i): root 1728 = 12 mod 13 is ordinary
        assert_eq!(r(-4, 13), vec![fq(12)]);
        assert!(!supersingular_js(13).unwrap().contains(&fq(12)));
    }

    #[test]
    fn inert_roots_are_supersingular() {
        for ell in [11u64, 23, 47] {
            for d in (3..=400i64).filter(|d| d % 4 == 0 || d % 4 == 3) {
                if kronecker(-d, ell as i64) == -1 {
                    let h = hilbert_class_poly(-d).unwrap();
                    assert_eq!(reduce_and_roots(&h, ell).unwrap().len(), h.degree());
                }
            }
        }
    }

    #[test]
    fn hecke_walks_mod_11() {
        let polys = ModularPolynomials::load(None).unwrap();
        let ss = supersingular_js(11).unwrap();
        assert_eq!(hecke_orbit_multiset(&polys, fq(0), 1, 11).unwrap(), vec![fq(0)]);
        assert_eq!(hecke_orbit_multiset(&polys, fq(0), 2, 11).unwrap(), vec![fq(1); 3]);
        assert_eq!(
            hecke_orbit_multiset(&polys, fq(1), 2, 11).unwrap(),
            vec![fq(0), fq(0), fq(1)]
        );
        for n in [3u64, 4, 5, 6, 7, 8, 9, 10, 12, 14, 16, 25, 27, 49] {
            for j in &ss.js {
                let cyc = hecke_orbit_multiset(&polys, *j, n, 11).unwrap();
                assert_eq!(cyc.len() as u64, crate::heckecosets::deg_a(n), "n = {n}");
                assert!(cyc.iter().all(|x| ss.contains(x)));
                let full = hecke_operator_multiset(&polys, *j, n, 11).unwrap();
                assert_eq!(full.len() as u64, crate::arith::sigma1(n), "n = {n}");
            }
        }
        assert!(hecke_orbit_multiset(&polys, fq(0), 11, 11).is_err());
        assert!(hecke_orbit_multiset(&polys, fq(0), 13, 11).is_err());
    }

    #[test]
    fn cross_model_counts() {
        let classes = crate::quaternion::ideal_classes(&crate::quaternion::maximal_order_for(11).unwrap()).unwrap();
        let f = ImagQuadField::new(-3).unwrap();
        let r1 = cross_check_counts(&classes, &f, 1).unwrap();
        assert!(r1.consistent());
        assert_eq!((r1.class_number, r1.root_count), (1, 1));
        let r5 = cross_check_counts(&classes, &f, 5).unwrap();
        assert!(r5.consistent(), "{:?}", r5.mismatches);
        assert_eq!(r5.class_number, 2);
    }

    #[test]
    fn supersingular_count_matches_class_count() {
        for ell in primes_between(5, 200) {
            let classes =
                crate::quaternion::ideal_classes(&crate::quaternion::maximal_order_for(ell).unwrap()).unwrap();
            assert_eq!(supersingular_js(ell).unwrap().len(), classes.len(), "ell = {ell}");
        }
    }

    #[test]
    fn mass_of_supersingular_set() {
        for ell in primes_between(5, 200) {
            let s = supersingular_js(ell).unwrap();
            assert_eq!(s.mass(), Rational::new(BigInt::from(ell - 1), BigInt::from(24)));
        }
    }
}
