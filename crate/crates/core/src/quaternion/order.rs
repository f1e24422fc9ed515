use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::lattice::QuatLattice;
use super::{definite_algebra, QuatElement, QuaternionAlgebra};
use crate::arith::{factorize, rat_int, Rational};
use crate::enumerate::vectors_of_value;
use crate::error::{ensure, Error, Result};
use crate::quadratic::{heegner_check, splitting_type, ImagQuadField, SplittingType};

/// An order in a definite quaternion algebra, with its trace-form Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuatOrder {
    pub alg: QuaternionAlgebra,
    pub lattice: QuatLattice,
    pub level: u64,
    /// `trd(e_i conj(e_j))` on the basis; `x^T G x = 2 nrd(x)`.
    pub gram: Vec<Vec<i64>>,
    pub discrd: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderSummary {
    pub ell: u64,
    pub level: u64,
    pub a: i64,
    pub b: i64,
    pub discrd: u64,
    pub basis: Vec<[String; 4]>,
}

impl QuatOrder {
    /// Checks that `lattice` is an order (contains 1, closed, integral).
    pub fn from_lattice(alg: QuaternionAlgebra, lattice: QuatLattice, level: u64) -> Result<Self> {
        ensure!(
            lattice.rank() == 4,
            Certificate,
            "order lattice has rank {}",
            lattice.rank()
        );
        ensure!(
            lattice.contains(&QuatElement::one()),
            Certificate,
            "order does not contain 1"
        );
        ensure!(is_integral(&lattice, &alg), Certificate, "order is not integral");
        let closure = lattice.product(&lattice, &alg);
        ensure!(
            lattice.contains_lattice(&closure),
            Certificate,
            "order not closed under products"
        );
        let gram = lattice.scaled_gram(&alg, &Rational::one())?;
        let discrd = reduced_discriminant(&lattice, &alg)?;
        Ok(QuatOrder {
            alg,
            lattice,
            level,
            gram,
            discrd,
        })
    }

    pub fn ell(&self) -> u64 {
        self.alg.ell
    }

    pub fn basis(&self) -> Vec<QuatElement> {
        self.lattice.basis()
    }

    pub fn contains(&self, x: &QuatElement) -> bool {
        self.lattice.contains(x)
    }

    /// Number of units, i.e. elements of reduced norm 1.
    pub fn unit_count(&self) -> usize {
        vectors_of_value(&self.gram, 2).len()
    }

    /// Units as elements of the algebra.
    pub fn units(&self) -> Vec<QuatElement> {
        vectors_of_value(&self.gram, 2)
            .iter()
            .map(|c| self.lattice.element(c))
            .collect()
    }

    /// Elements with the given reduced trace and norm.
    pub fn elements_with(&self, trace: i64, norm: i64) -> Vec<QuatElement> {
        vectors_of_value(&self.gram, 2 * norm)
            .iter()
            .map(|c| self.lattice.element(c))
            .filter(|x| x.trd() == rat_int(trace))
            .collect()
    }

    pub fn summary(&self) -> OrderSummary {
        OrderSummary {
            ell: self.alg.ell,
            level: self.level,
            a: self.alg.a,
            b: self.alg.b,
            discrd: self.discrd,
            basis: self
                .basis()
                .iter()
                .map(|e| std::array::from_fn(|i| e.coords[i].to_string()))
                .collect(),
        }
    }
}

pub(crate) fn is_integral(l: &QuatLattice, alg: &QuaternionAlgebra) -> bool {
    l.norm(alg).is_integer()
}

/// `sqrt(|det trd(e_i conj(e_j))|)`, which must be an integer.
fn reduced_discriminant(l: &QuatLattice, alg: &QuaternionAlgebra) -> Result<u64> {
    let det = l.gram_det(alg);
    ensure!(det.is_integer(), Certificate, "non-integral Gram determinant {det}");
    let d = det.to_integer();
    let s = d.sqrt();
    ensure!(&s * &s == d, Certificate, "Gram determinant {d} is not a square");
    s.to_u64()
        .ok_or_else(|| Error::BoundExceeded("reduced discriminant exceeds u64".into()))
}

/// `{x : x L ⊆ L}`.
pub fn left_order(l: &QuatLattice, alg: &QuaternionAlgebra) -> QuatLattice {
    let mut acc: Option<QuatLattice> = None;
    for b in l.basis() {
        let inv = alg.inv(&b).expect("nonzero basis element");
        let m = l.right_mul(&inv, alg);
        acc = Some(match acc {
            None => m,
            Some(a) => a.intersection(&m),
        });
    }
    acc.expect("nonempty basis")
}

/// `{x : L x ⊆ L}`.
pub fn right_order(l: &QuatLattice, alg: &QuaternionAlgebra) -> QuatLattice {
    let mut acc: Option<QuatLattice> = None;
    for b in l.basis() {
        let inv = alg.inv(&b).expect("nonzero basis element");
        let m = l.left_mul(&inv, alg);
        acc = Some(match acc {
            None => m,
            Some(a) => a.intersection(&m),
        });
    }
    acc.expect("nonempty basis")
}

/// Smallest ring containing `l` (which must contain 1), or `None` if it is not integral.
fn ring_closure(l: &QuatLattice, alg: &QuaternionAlgebra) -> Option<QuatLattice> {
    let mut cur = l.clone();
    loop {
        if !is_integral(&cur, alg) {
            return None;
        }
        let next = cur.sum(&cur.product(&cur, alg));
        if next == cur {
            return Some(cur);
        }
        cur = next;
    }
}

/// A maximal order, reached by saturating `Z<1, i, j, k>` one prime at a time.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<QuatOrder> {
    let basis = alg.basis_elements();
    let mut lat = QuatLattice::from_generators(&basis)?;
    let target = alg.ell;
    loop {
        let disc = reduced_discriminant(&lat, alg)?;
        if disc == target {
            break;
        }
        ensure!(
            disc % target == 0,
            Certificate,
            "discriminant {disc} lost the ramified prime"
        );
        let p = factorize(disc / target)
            .primes()
            .next()
            .expect("disc > ell has a prime factor");
        lat = enlarge_at(&lat, alg, p)?;
    }
    QuatOrder::from_lattice(alg.clone(), lat, 1)
}

/// An order strictly containing `lat` with index a power of `p`.
fn enlarge_at(lat: &QuatLattice, alg: &QuaternionAlgebra, p: u64) -> Result<QuatLattice> {
    let gram = lat.scaled_gram(alg, &Rational::one())?;
    let basis = lat.basis();
    let traces: Vec<i64> = basis
        .iter()
        .map(|b| b.trd().to_integer().to_i64().expect("small trace"))
        .collect();
    let p = p as i64;
    let modulus = 2 * p * p;
    for code in 1..p.pow(4) {
        let c: Vec<i64> = (0..4).map(|i| (code / p.pow(i)) % p).collect();
        let tr: i64 = c.iter().zip(&traces).map(|(x, t)| x * t).sum();
        if tr % p != 0 {
            continue;
        }
        let val: i128 = crate::enumerate::form_value(&gram, &c);
        if val % modulus as i128 != 0 {
            continue;
        }
        let x = lat.element(&c).scale(&Rational::new(BigInt::one(), BigInt::from(p)));
        let start = lat.sum(&QuatLattice::from_generators(&[x])?);
        if let Some(bigger) = ring_closure(&start, alg) {
            return Ok(bigger);
        }
    }
    Err(Error::Certificate(format!("no integral enlargement at p = {p}")))
}

/// An element of `o` with minimal polynomial `X^2 - tX + m` of discriminant `d`.
pub fn quadratic_element(o: &QuatOrder, d: i64) -> Option<QuatElement> {
    let t = d.rem_euclid(2);
    let m = (t * t - d) / 4;
    o.elements_with(t, m).into_iter().next()
}

/// An Eichler order of level `level` containing an embedded copy of the maximal
/// order of `field`.
///
/// If `o_max` itself has no element generating the field's maximal order, the
/// left orders of its ideal classes are tried in turn.
pub fn eichler_order(o_max: &QuatOrder, level: u64, field: &ImagQuadField) -> Result<QuatOrder> {
    let d = field.disc();
    let ell = o_max.ell();
    ensure!(o_max.discrd == ell, InvalidInput, "expected a maximal order");
    ensure!(level >= 1, InvalidInput, "level must be positive");
    ensure!(
        crate::arith::gcd_i64(level as i64, ell as i64 * d) == 1,
        Hypothesis,
        "level {level} must be coprime to ell * D_L = {}",
        ell as i64 * d
    );
    ensure!(
        heegner_check(field, level)?,
        Hypothesis,
        "not every prime factor of {level} splits in Q(sqrt({d}))"
    );
    if level == 1 {
        return Ok(o_max.clone());
    }
    ensure!(
        splitting_type(field, ell) != SplittingType::Split,
        Hypothesis,
        "{ell} splits in Q(sqrt({d})), so the field does not embed"
    );
    let (host, x) = match quadratic_element(o_max, d) {
        Some(x) => (o_max.clone(), x),
        None => {
            let classes = super::ideal_classes(o_max)?;
            classes
                .classes
                .iter()
                .find_map(|c| quadratic_element(&c.left_order, d).map(|x| (c.left_order.clone(), x)))
                .ok_or_else(|| Error::Certificate(format!("no maximal order contains sqrt({d})")))?
        }
    };
    eichler_with_element(&host, level, &x)
}

/// `R = O ∩ O_L(xO + N O)` for `x` whose minimal polynomial splits mod `level`.
pub fn eichler_with_element(o: &QuatOrder, level: u64, x: &QuatElement) -> Result<QuatOrder> {
    let alg = &o.alg;
    let t = x.trd();
    let m = alg.nrd(x);
    ensure!(
        t.is_integer() && m.is_integer(),
        InvalidInput,
        "element is not integral"
    );
    let (t, m) = (t.to_integer(), m.to_integer());
    let n = BigInt::from(level);
    let r = (0..level)
        .map(BigInt::from)
        .find(|r| ((r * r - &t * r + &m) % &n).is_zero())
        .ok_or_else(|| Error::Hypothesis(format!("minimal polynomial has no root mod {level}")))?;
    let shifted = x.sub(&QuatElement::from_scalar(&Rational::from_integer(r)));
    let mut gens: Vec<QuatElement> = o.basis().iter().map(|b| alg.mul(&shifted, b)).collect();
    gens.extend(o.basis().iter().map(|b| b.scale(&Rational::from_integer(n.clone()))));
    let ideal = QuatLattice::from_generators(&gens)?;
    let lo = left_order(&ideal, alg);
    let r_lat = o.lattice.intersection(&lo);
    let order = QuatOrder::from_lattice(alg.clone(), r_lat, level)?;
    ensure!(
        order.discrd == o.ell() * level,
        Certificate,
        "Eichler order has reduced discriminant {}, expected {}",
        order.discrd,
        o.ell() * level
    );
    ensure!(order.contains(x), Certificate, "embedded element left the order");
    Ok(order)
}

/// The maximal order of the definite algebra ramified at `ell`.
pub fn maximal_order_for(ell: u64) -> Result<QuatOrder> {
    maximal_order(&definite_algebra(ell)?)
}

/// Eichler order of `level` for class-set computations that do not fix a field:
/// uses the first fundamental discriminant satisfying the hypotheses.
pub fn eichler_order_for(ell: u64, level: u64) -> Result<QuatOrder> {
    let o = maximal_order_for(ell)?;
    if level == 1 {
        return Ok(o);
    }
    for d in (3..10_000i64).map(|k| -k) {
        let Ok(field) = ImagQuadField::new(d) else {
            continue;
        };
        if crate::arith::gcd_i64(level as i64, ell as i64 * d) != 1
            || splitting_type(&field, ell) == SplittingType::Split
            || !heegner_check(&field, level)?
        {
            continue;
        }
        return eichler_order(&o, level, &field);
    }
    Err(Error::BoundExceeded(format!("no auxiliary field for level {level}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_order() {
        let o = maximal_order_for(2).unwrap();
        assert_eq!(o.discrd, 2);
        assert_eq!(o.unit_count(), 24);
    }

    #[test]
    fn maximal_orders_have_discriminant_ell() {
        for ell in [3u64, 5, 7, 11, 13, 17, 41, 73, 89, 97, 101] {
            let o = maximal_order_for(ell).unwrap();
            assert_eq!(o.discrd, ell);
            let det = crate::enumerate::integer_det(&o.gram);
            assert_eq!(det, (ell * ell) as i128);
        }
    }

    #[test]
    fn eichler_level_5_in_b11() {
        let o = maximal_order_for(11).unwrap();
        let field = ImagQuadField::new(-4).unwrap();
        let r = eichler_order(&o, 5, &field).unwrap();
        assert_eq!(r.discrd, 55);
        assert_eq!(r.level, 5);
        assert!(quadratic_element(&r, -4).is_some());
    }

    #[test]
    fn eichler_rejects_inert_level() {
        let o = maximal_order_for(11).unwrap();
        let field = ImagQuadField::new(-4).unwrap();
        assert!(matches!(eichler_order(&o, 3, &field), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn level_one_is_the_maximal_order() {
        let o = maximal_order_for(11).unwrap();
        let field = ImagQuadField::new(-4).unwrap();
        assert_eq!(eichler_order(&o, 1, &field).unwrap(), o);
    }
}
