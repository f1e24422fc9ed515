//! Imaginary quadratic fields, orders `O_n = Z + n O_L`, and their class
//! groups realized by reduced positive definite binary quadratic forms.
//!
//! The form `(a, b, c)` of discriminant `D` stands for the proper ideal
//! `[a, (-b + sqrt(D))/2]` of the order of discriminant `D`. Gauss composition
//! of forms is multiplication of these ideal classes.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime, kronecker, rat_int, sqrt_mod, Rational};
use crate::error::{ensure, Error, Result};

/// Largest `|disc|` accepted by [`class_group`].
pub const MAX_CLASS_GROUP_DISC: i64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImagQuadField {
    disc: i64,
}

impl ImagQuadField {
    /// `d` must be a negative fundamental discriminant.
    pub fn new(d: i64) -> Result<Self> {
        ensure!(d < 0, InvalidInput, "discriminant {d} is not negative");
        ensure!(
            is_fundamental_discriminant(d),
            InvalidInput,
            "{d} is not a fundamental discriminant"
        );
        Ok(ImagQuadField { disc: d })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn order(&self, conductor: u64) -> Result<QuadOrder> {
        QuadOrder::new(*self, conductor)
    }
}

impl fmt::Display for ImagQuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt({}))", self.disc)
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let r = d.rem_euclid(4);
    if r == 1 {
        return squarefree_abs(d);
    }
    if r == 0 {
        let m = d / 4;
        let mr = m.rem_euclid(4);
        return (mr == 2 || mr == 3) && squarefree_abs(m);
    }
    false
}

fn squarefree_abs(n: i64) -> bool {
    factorize(n.unsigned_abs()).factors.iter().all(|&(_, e)| e == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadOrder {
    pub field: ImagQuadField,
    pub conductor: u64,
    disc: i64,
}

impl QuadOrder {
    pub fn new(field: ImagQuadField, conductor: u64) -> Result<Self> {
        ensure!(conductor >= 1, InvalidInput, "conductor must be positive");
        let disc = (conductor as i64)
            .checked_mul(conductor as i64)
            .and_then(|n2| n2.checked_mul(field.disc))
            .ok_or_else(|| Error::BoundExceeded(format!("conductor {conductor} too large")))?;
        Ok(QuadOrder { field, conductor, disc })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// Parity `t` of the trace of the standard generator `(t + sqrt(disc))/2`.
    pub fn trace_parity(&self) -> i64 {
        self.disc.rem_euclid(2)
    }
}

/// Positive definite binary quadratic form `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BQForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for BQForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl BQForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BQForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_reduced(&self) -> bool {
        let BQForm { a, b, c } = *self;
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    /// Principal form of discriminant `d`.
    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        BQForm::new(1, b, (b * b - d) / 4)
    }

    /// Inverse class: `(a, -b, c)`, reduced.
    pub fn inverse(&self) -> Self {
        reduce_form(&BQForm::new(self.a, -self.b, self.c)).expect("inverse of a definite form")
    }
}

/// The unique reduced form properly equivalent to `f`.
pub fn reduce_form(f: &BQForm) -> Result<BQForm> {
    ensure!(
        f.disc() < 0 && f.a > 0,
        InvalidInput,
        "form {f} is not positive definite"
    );
    let BQForm { mut a, mut b, mut c } = *f;
    loop {
        // normalize b into (-a, a]
        if b > a || b <= -a {
            let two_a = 2 * a;
            let k = (a - b).div_euclid(two_a);
            let nb = b + k * two_a;
            c += k * (b + k * a);
            b = nb;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        break;
    }
    Ok(BQForm::new(a, b, c))
}

/// Gauss composition (Dirichlet's united forms), followed by reduction.
pub fn compose(f: &BQForm, g: &BQForm) -> BQForm {
    let d = f.disc();
    assert_eq!(d, g.disc(), "composition needs equal discriminants");
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let dd = d as i128;
    let s = (b1 + b2) / 2;
    // e = gcd(a1, a2, s) = x a1 + y a2 + z s
    let (g1, x1, y1) = crate::arith::ext_gcd(a1, a2);
    let (e, u, z) = crate::arith::ext_gcd(g1, s);
    let (x, y) = (u * x1, u * y1);
    let a3 = a1 * a2 / (e * e);
    let num = x * a1 * b2 + y * a2 * b1 + z * (b1 * b2 + dd) / 2;
    debug_assert_eq!(num % e, 0);
    let b3 = (num / e).rem_euclid(2 * a3);
    let c3 = (b3 * b3 - dd) / (4 * a3);
    debug_assert_eq!(b3 * b3 - 4 * a3 * c3, dd);
    reduce_form(&BQForm::new(a3 as i64, b3 as i64, c3 as i64)).expect("composite is definite")
}

/// All primitive reduced forms of discriminant `d < 0`, principal form first.
pub fn reduced_forms(d: i64) -> Vec<BQForm> {
    assert!(d < 0 && d.rem_euclid(4) <= 1);
    let mut out = Vec::new();
    let amax = ((-d) as f64 / 3.0).sqrt() as i64 + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = BQForm::new(a, b, c);
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    out.sort();
    out
}

/// `Pic(O_n)` with its composition table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassGroup {
    pub order: QuadOrder,
    pub elements: Vec<BQForm>,
    /// `table[i][j]` = index of `elements[i] * elements[j]`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

impl ClassGroup {
    pub fn class_number(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, f: &BQForm) -> Option<usize> {
        let r = reduce_form(f).ok()?;
        self.elements.binary_search(&r).ok()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.index_of(&self.elements[i].inverse()).unwrap()
    }
}

pub fn class_group(order: &QuadOrder) -> Result<ClassGroup> {
    let d = order.disc();
    ensure!(
        -d <= MAX_CLASS_GROUP_DISC,
        BoundExceeded,
        "|disc| = {} exceeds {MAX_CLASS_GROUP_DISC}",
        -d
    );
    let elements = reduced_forms(d);
    let identity = elements
        .binary_search(&BQForm::principal(d))
        .map_err(|_| Error::Certificate("principal form missing".into()))?;
    let table = elements
        .iter()
        .map(|f| {
            elements
                .iter()
                .map(|g| {
                    let h = compose(f, g);
                    elements.binary_search(&h).expect("composite form is reduced")
                })
                .collect()
        })
        .collect();
    Ok(ClassGroup {
        order: *order,
        elements,
        table,
        identity,
    })
}

pub fn class_number(d: i64) -> usize {
    reduced_forms(d).len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

pub fn splitting_type(field: &ImagQuadField, p: u64) -> SplittingType {
    debug_assert!(is_prime(p));
    match kronecker(field.disc(), p as i64) {
        1 => SplittingType::Split,
        -1 => SplittingType::Inert,
        _ => SplittingType::Ramified,
    }
}

fn require_coprime(field: &ImagQuadField, n: u64, what: &str) -> Result<()> {
    ensure!(
        (n as i64).gcd(&field.disc()) == 1,
        Hypothesis,
        "{what} = {n} shares a factor with D_L = {}",
        field.disc()
    );
    Ok(())
}

/// Every prime factor of `N` splits in `L`.
pub fn heegner_check(field: &ImagQuadField, level: u64) -> Result<bool> {
    require_coprime(field, level, "N")?;
    Ok(factorize(level)
        .primes()
        .all(|p| splitting_type(field, p) == SplittingType::Split))
}

/// The weak hypothesis: `eps_L(N) = kronecker(D_L, N) = 1`.
pub fn weak_heegner_check(field: &ImagQuadField, level: u64) -> Result<bool> {
    require_coprime(field, level, "N")?;
    Ok(kronecker(field.disc(), level as i64) == 1)
}

/// Local density factor at `p^e`: 1 when inert, `(p-1)/(p+1)` when split.
pub fn local_density(field: &ImagQuadField, p: u64, _e: u32) -> Result<Rational> {
    match splitting_type(field, p) {
        SplittingType::Inert => Ok(rat_int(1)),
        SplittingType::Split => Ok(Rational::new((p as i64 - 1).into(), (p as i64 + 1).into())),
        SplittingType::Ramified => Err(Error::Hypothesis(format!("{p} ramifies in {field}"))),
    }
}

/// `d(n)`: product of the local density factors over `p^e || n`.
pub fn d_of_n(n: u64, field: &ImagQuadField) -> Result<Rational> {
    ensure!(n >= 1, InvalidInput, "n must be positive");
    require_coprime(field, n, "n")?;
    factorize(n)
        .factors
        .iter()
        .try_fold(rat_int(1), |acc, &(p, e)| Ok(acc * local_density(field, p, e)?))
}

/// A reduced form for a prime ideal of norm `p`, with the orientation `b >= 0`
/// before reduction.
pub fn prime_form_above(order: &QuadOrder, p: u64) -> Result<BQForm> {
    ensure!(is_prime(p), InvalidInput, "{p} is not prime");
    ensure!(
        !order.conductor.is_multiple_of(p),
        Hypothesis,
        "{p} divides the conductor {}",
        order.conductor
    );
    let d = order.disc();
    let b = prime_form_b(d, p).ok_or_else(|| Error::Hypothesis(format!("{p} is inert in the order of disc {d}")))?;
    let c = (b * b - d) / (4 * p as i64);
    reduce_form(&BQForm::new(p as i64, b, c))
}

/// Least `b >= 0`, `b <= p`, with `b^2 = d mod 4p`.
pub(crate) fn prime_form_b(d: i64, p: u64) -> Option<i64> {
    let pi = p as i64;
    if p == 2 {
        return (0..=2).find(|b| (b * b - d).rem_euclid(8) == 0);
    }
    let r = sqrt_mod(d.rem_euclid(pi) as u64, p)? as i64;
    // the two solutions mod 2p sum to 2p, so the least one lies in [0, p]
    [r, pi - r, r + pi, 2 * pi - r]
        .into_iter()
        .filter(|b| (b * b - d).rem_euclid(4 * pi) == 0)
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    /// Independent reduction oracle: search equivalent forms via SL2(Z)
    /// matrices with small entries, keep the reduced one.
    fn brute_reduce(f: &BQForm) -> BQForm {
        let mut best = None;
        for p in -6i64..=6 {
            for q in -6i64..=6 {
                for r in -6i64..=6 {
                    for s in -6i64..=6 {
                        if p * s - q * r != 1 {
                            continue;
                        }
                        let a = f.eval(p, r);
                        let c = f.eval(q, s);
                        let b = 2 * f.a * p * q + f.b * (p * s + q * r) + 2 * f.c * r * s;
                        let g = BQForm::new(a, b, c);
                        if g.is_reduced() {
                            best = Some(g);
                        }
                    }
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce_form(&BQForm::new(1, 0, 1)).unwrap(), BQForm::new(1, 0, 1));
        assert_eq!(reduce_form(&BQForm::new(2, 2, 3)).unwrap(), BQForm::new(2, 2, 3));
        assert_eq!(brute_reduce(&BQForm::new(2, 2, 3)), BQForm::new(2, 2, 3));
        assert_eq!(reduce_form(&BQForm::new(3, 2, 1)).unwrap(), BQForm::new(1, 0, 2));
        assert_eq!(brute_reduce(&BQForm::new(3, 2, 1)), BQForm::new(1, 0, 2));
        assert!(reduce_form(&BQForm::new(1, 3, 1)).is_err());
    }

    #[test]
    fn reduction_matches_bruteforce() {
        for a in 1..12 {
            for b in -15..15 {
                for c in 1..12 {
                    let f = BQForm::new(a, b, c);
                    if f.disc() >= 0 {
                        continue;
                    }
                    assert_eq!(reduce_form(&f).unwrap(), brute_reduce(&f), "{f}");
                }
            }
        }
    }

    fn brute_class_number(d: i64) -> usize {
        let mut n = 0;
        let bound = ((-d) as f64 / 3.0).sqrt() as i64 + 1;
        for a in 1..=bound {
            for b in -a..=a {
                for c in a..=(b * b - d) / 4 + 1 {
                    let f = BQForm::new(a, b, c);
                    if f.disc() == d && f.is_reduced() && f.is_primitive() {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn class_group_examples() {
        let g = class_group(&ImagQuadField::new(-4).unwrap().order(1).unwrap()).unwrap();
        assert_eq!(g.elements, vec![BQForm::new(1, 0, 1)]);
        let g = class_group(&ImagQuadField::new(-15).unwrap().order(1).unwrap()).unwrap();
        assert_eq!(g.class_number(), 2);
        assert_eq!(class_number(-3), 1);
    }

    #[test]
    fn class_numbers_match_bruteforce() {
        for d in (-3000i64..=-3).filter(|d| d.rem_euclid(4) <= 1) {
            assert_eq!(class_number(d), brute_class_number(d), "disc {d}");
        }
        for d in [-9_999i64, -9_995, -7_996, -10_000] {
            assert_eq!(class_number(d), brute_class_number(d), "disc {d}");
        }
    }

    #[test]
    fn composition_is_a_group_law() {
        let mut checked = 0;
        for d in (-2000i64..=-3).filter(|d| d.rem_euclid(4) <= 1) {
            let forms = reduced_forms(d);
            let h = forms.len();
            if h > 16 {
                continue;
            }
            let order = QuadOrder {
                field: ImagQuadField { disc: -4 },
                conductor: 1,
                disc: d,
            };
            let g = class_group(&order).unwrap();
            for i in 0..h {
                assert_eq!(g.mul(i, g.identity), i);
                assert_eq!(g.mul(i, g.inverse(i)), g.identity);
                for j in 0..h {
                    assert_eq!(g.mul(i, j), g.mul(j, i));
                }
            }
            if h <= 8 {
                for i in 0..h {
                    for j in 0..h {
                        for k in 0..h {
                            assert_eq!(g.mul(g.mul(i, j), k), g.mul(i, g.mul(j, k)));
                        }
                    }
                }
            }
            checked += 1;
        }
        assert!(checked > 500);
    }

    /// f(x1,y1) g(x2,y2) is represented by the (unreduced-equivalent) composite.
    #[test]
    fn composition_multiplies_represented_values() {
        let f = BQForm::new(2, 1, 3); // disc -23
        let g = BQForm::new(2, -1, 3);
        let h = BQForm::new(3, 1, 2);
        for (u, v) in [(f, f), (f, g), (f, h), (h, h)] {
            let w = compose(&u, &v);
            let m = u.eval(1, 0) * v.eval(0, 1);
            let represented = (-30..=30).any(|x| (-30..=30).any(|y| w.eval(x, y) == m));
            assert!(represented, "{u} * {v} = {w} should represent {m}");
        }
    }

    #[test]
    fn splitting_examples() {
        let l = ImagQuadField::new(-4).unwrap();
        assert_eq!(splitting_type(&l, 5), SplittingType::Split);
        assert_eq!(splitting_type(&l, 11), SplittingType::Inert);
        assert_eq!(splitting_type(&l, 2), SplittingType::Ramified);
    }

    #[test]
    fn heegner_examples() {
        let l = ImagQuadField::new(-4).unwrap();
        assert!(heegner_check(&l, 5).unwrap());
        assert!(!heegner_check(&l, 3).unwrap());
        assert!(heegner_check(&l, 1).unwrap());
        assert!(heegner_check(&l, 2).is_err());
    }

    #[test]
    fn heegner_implies_weak_heegner() {
        for d in [-3i64, -4, -7, -8, -11, -15, -19, -20, -23, -24] {
            let l = ImagQuadField::new(d).unwrap();
            for n in 1..=500u64 {
                if (n as i64).gcd(&d) != 1 {
                    continue;
                }
                if heegner_check(&l, n).unwrap() {
                    assert!(weak_heegner_check(&l, n).unwrap(), "D={d} N={n}");
                }
            }
        }
    }

    #[test]
    fn density_examples() {
        let l = ImagQuadField::new(-4).unwrap();
        assert_eq!(d_of_n(13, &l).unwrap(), rat(6, 7));
        assert_eq!(d_of_n(3, &l).unwrap(), rat(1, 1));
        assert_eq!(d_of_n(39, &l).unwrap(), rat(6, 7));
        assert!(d_of_n(6, &l).is_err());
    }

    #[test]
    fn density_multiplicative() {
        for d in [-3i64, -4, -7] {
            let l = ImagQuadField::new(d).unwrap();
            for m in 1..=100u64 {
                for n in 1..=100u64 {
                    if m.gcd(&n) != 1 || (m * n) as i64 % 2 == 0 && d % 2 == 0 {
                        continue;
                    }
                    if (m as i64 * n as i64).gcd(&d) != 1 {
                        continue;
                    }
                    assert_eq!(
                        d_of_n(m * n, &l).unwrap(),
                        d_of_n(m, &l).unwrap() * d_of_n(n, &l).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn density_one_iff_all_inert() {
        let l = ImagQuadField::new(-3).unwrap();
        for n in 1..=300u64 {
            if n % 3 == 0 {
                continue;
            }
            let all_inert = factorize(n)
                .primes()
                .all(|p| splitting_type(&l, p) == SplittingType::Inert);
            assert_eq!(d_of_n(n, &l).unwrap() == rat(1, 1), all_inert);
        }
    }

    #[test]
    fn prime_form_examples() {
        let o = ImagQuadField::new(-4).unwrap().order(1).unwrap();
        assert_eq!(prime_form_above(&o, 5).unwrap(), BQForm::new(1, 0, 1));
        assert!(matches!(prime_form_above(&o, 3), Err(Error::Hypothesis(_))));
        assert_eq!(prime_form_above(&o, 2).unwrap(), BQForm::new(1, 0, 1));
        let o = ImagQuadField::new(-23).unwrap().order(1).unwrap();
        let f = prime_form_above(&o, 2).unwrap();
        assert_eq!(f, BQForm::new(2, 1, 3));
        let o3 = ImagQuadField::new(-3).unwrap().order(5).unwrap();
        assert!(prime_form_above(&o3, 5).is_err());
    }

    #[test]
    fn prime_forms_represent_p() {
        for d in [-3i64, -4, -7, -15, -23, -47] {
            let o = ImagQuadField::new(d).unwrap().order(1).unwrap();
            for p in crate::arith::primes_between(2, 200) {
                if kronecker(d, p as i64) == -1 {
                    continue;
                }
                let f = prime_form_above(&o, p).unwrap();
                let hit = (-40..=40).any(|x| (-40..=40).any(|y| f.eval(x, y) == p as i64));
                assert!(hit, "{f} should represent {p}");
            }
        }
    }
}
