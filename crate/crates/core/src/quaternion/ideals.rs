use std::collections::{HashSet, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use super::lattice::QuatLattice;
use super::order::{left_order, QuatOrder};
use super::{QuatElement, QuaternionAlgebra};
use crate::arith::{factorize, rat_int, Rational};
use crate::enumerate::{find_isometry, short_vectors, theta_counts, vectors_of_value};
use crate::error::{ensure, Error, Result};

/// Number of theta coefficients used to order and prefilter classes.
pub const THETA_PREFIX: usize = 6;

/// A right ideal class of an Eichler order, given by a small representative.
#[derive(Debug, Clone)]
pub struct RightIdealClass {
    pub index: usize,
    pub lattice: QuatLattice,
    pub norm: Rational,
    pub left_order: QuatOrder,
    /// `|O_L(I)^x|`.
    pub weight: u64,
    /// Counts of `x in I` with `nrd(x) / nrd(I) = 1, 2, ..., THETA_PREFIX`.
    pub theta: Vec<u64>,
    /// The same counts for the left order; this is the primary sort key.
    pub order_theta: Vec<u64>,
}

pub type IdealClass = RightIdealClass;

impl RightIdealClass {
    fn new(lattice: QuatLattice, alg: &QuaternionAlgebra, level: u64) -> Result<Self> {
        let norm = lattice.norm(alg);
        let left = QuatOrder::from_lattice(alg.clone(), left_order(&lattice, alg), level)?;
        let weight = left.unit_count() as u64;
        let theta = theta_prefix(&lattice, &norm, alg)?;
        let order_theta = theta_prefix(&left.lattice, &Rational::one(), alg)?;
        Ok(RightIdealClass {
            index: 0,
            lattice,
            norm,
            left_order: left,
            weight,
            theta,
            order_theta,
        })
    }

    /// Integer Gram matrix of `trd(x conj y) / nrd(I)`.
    pub fn normalized_gram(&self, alg: &QuaternionAlgebra) -> Result<Vec<Vec<i64>>> {
        self.lattice.scaled_gram(alg, &self.norm)
    }
}

fn theta_prefix(l: &QuatLattice, norm: &Rational, alg: &QuaternionAlgebra) -> Result<Vec<u64>> {
    let g = l.scaled_gram(alg, norm)?;
    let counts = theta_counts(&g, 2 * THETA_PREFIX as i64);
    Ok((1..=THETA_PREFIX).map(|q| counts[2 * q]).collect())
}

/// The complete list of right ideal classes of an order.
#[derive(Debug, Clone)]
pub struct IdealClasses {
    pub order: QuatOrder,
    pub classes: Vec<RightIdealClass>,
    /// The prime whose neighbors were used to walk the classes.
    pub neighbor_prime: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassSummary {
    pub index: usize,
    pub weight: u64,
    pub norm: String,
    pub theta: Vec<u64>,
    pub basis: Vec<[String; 4]>,
}

impl IdealClasses {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn weights(&self) -> Vec<u64> {
        self.classes.iter().map(|c| c.weight).collect()
    }

    pub fn alg(&self) -> &QuaternionAlgebra {
        &self.order.alg
    }

    pub fn ell(&self) -> u64 {
        self.order.alg.ell
    }

    pub fn level(&self) -> u64 {
        self.order.level
    }

    /// Index of the class containing the right ideal `l`, with `alpha` such
    /// that `l = alpha * I_index`.
    pub fn identify(&self, l: &QuatLattice) -> Result<(usize, QuatElement)> {
        let alg = self.alg();
        let norm = l.norm(alg);
        let theta = theta_prefix(l, &norm, alg)?;
        for c in &self.classes {
            if c.theta != theta {
                continue;
            }
            if let Some(alpha) = find_equivalence(alg, &c.lattice, &c.norm, l, &norm)? {
                return Ok((c.index, alpha));
            }
        }
        Err(Error::Certificate("ideal matches no enumerated class".into()))
    }

    pub fn summaries(&self) -> Vec<ClassSummary> {
        self.classes
            .iter()
            .map(|c| ClassSummary {
                index: c.index,
                weight: c.weight,
                norm: c.norm.to_string(),
                theta: c.theta.clone(),
                basis: c
                    .lattice
                    .basis()
                    .iter()
                    .map(|e| std::array::from_fn(|i| e.coords[i].to_string()))
                    .collect(),
            })
            .collect()
    }
}

/// `alpha` with `J = alpha I`, if the right ideals are equivalent.
pub fn find_equivalence(
    alg: &QuaternionAlgebra,
    i: &QuatLattice,
    ni: &Rational,
    j: &QuatLattice,
    nj: &Rational,
) -> Result<Option<QuatElement>> {
    let prod = j.product(&i.conj(), alg);
    let scale = ni * nj;
    let g = prod.scaled_gram(alg, &scale)?;
    let Some(c) = vectors_of_value(&g, 2).into_iter().next() else {
        return Ok(None);
    };
    let beta = prod.element(&c);
    Ok(Some(beta.scale(&(Rational::one() / ni))))
}

/// `sum 1/w_i`.
pub fn mass(classes: &[RightIdealClass]) -> Rational {
    classes
        .iter()
        .map(|c| Rational::new(1.into(), c.weight.into()))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Eichler's mass `(ell - 1)/24 * prod p^(e-1) (p + 1)` for level `N`.
pub fn expected_mass(ell: u64, level: u64) -> Rational {
    let index: u64 = factorize(level)
        .prime_powers()
        .map(|(p, e, _)| p.pow(e - 1) * (p + 1))
        .product();
    Rational::new((((ell - 1) * index) as i64).into(), 24.into())
}

/// Reduced norm forms of two classes are isometric after scaling by the ideal norms.
pub fn isometric(alg: &QuaternionAlgebra, c1: &RightIdealClass, c2: &RightIdealClass) -> Result<bool> {
    let g1 = c1.normalized_gram(alg)?;
    let g2 = c2.normalized_gram(alg)?;
    let bound = 2 * THETA_PREFIX as i64 + 2;
    if theta_counts(&g1, bound) != theta_counts(&g2, bound) {
        return Ok(false);
    }
    Ok(find_isometry(&g1, &g2).is_some())
}

/// Right ideal classes by breadth-first search over `p`-neighbors, certified by mass.
pub fn ideal_classes(order: &QuatOrder) -> Result<IdealClasses> {
    let alg = &order.alg;
    let ell = alg.ell;
    let level = order.level;
    ensure!(
        ell * level <= 10_000,
        BoundExceeded,
        "ell * N = {} exceeds the desk-scale bound 10^4",
        ell * level
    );
    let p = (2..)
        .find(|&p| crate::arith::is_prime(p) && !(ell * level).is_multiple_of(p))
        .expect("a prime not dividing ell N");
    let target = expected_mass(ell, level);

    let mut found = vec![RightIdealClass::new(order.lattice.clone(), alg, level)?];
    let mut total = mass(&found);
    let mut queue = VecDeque::from([0usize]);
    'bfs: while total < target {
        let Some(cur) = queue.pop_front() else {
            break;
        };
        for nb in neighbors(&found[cur], alg, p)? {
            let nb = reduce_ideal(&nb, alg)?;
            let norm = nb.norm(alg);
            let theta = theta_prefix(&nb, &norm, alg)?;
            let mut known = false;
            for c in found.iter().filter(|c| c.theta == theta) {
                if find_equivalence(alg, &c.lattice, &c.norm, &nb, &norm)?.is_some() {
                    known = true;
                    break;
                }
            }
            if known {
                continue;
            }
            let cls = RightIdealClass::new(nb, alg, level)?;
            total += Rational::new(1.into(), cls.weight.into());
            found.push(cls);
            queue.push_back(found.len() - 1);
            if total >= target {
                break 'bfs;
            }
        }
    }
    ensure!(
        total == target,
        Certificate,
        "class mass {total} differs from Eichler mass {target} (ell = {ell}, N = {level})"
    );
    // stable sort keeps discovery order among equal theta prefixes
    found.sort_by(|a, b| (&a.order_theta, &a.theta).cmp(&(&b.order_theta, &b.theta)));
    for (i, c) in found.iter_mut().enumerate() {
        c.index = i;
    }
    Ok(IdealClasses {
        order: order.clone(),
        classes: found,
        neighbor_prime: p,
    })
}

/// The `p + 1` ideals `P I` with `P` a right ideal of norm `p` of the left order of `I`.
fn neighbors(c: &RightIdealClass, alg: &QuaternionAlgebra, p: u64) -> Result<Vec<QuatLattice>> {
    let o = &c.left_order;
    let basis = o.basis();
    let pi = p as i64;
    let pr = rat_int(pi);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for code in 1..pi.pow(4) {
        let coeffs: Vec<i64> = (0..4).map(|i| (code / pi.pow(i)) % pi).collect();
        if crate::enumerate::form_value(&o.gram, &coeffs) % (2 * pi as i128) != 0 {
            continue;
        }
        let x = o.lattice.element(&coeffs);
        let mut gens: Vec<QuatElement> = basis.iter().map(|b| alg.mul(&x, b)).collect();
        gens.extend(basis.iter().map(|b| b.scale(&pr)));
        let ideal = QuatLattice::from_generators(&gens)?;
        if ideal.norm(alg) != pr || !seen.insert(ideal.clone()) {
            continue;
        }
        out.push(ideal.product(&c.lattice, alg));
    }
    ensure!(
        out.len() as u64 == p + 1,
        Certificate,
        "found {} neighbors at p = {p}, expected {}",
        out.len(),
        p + 1
    );
    Ok(out)
}

/// An equivalent ideal `conj(alpha) J / nrd(J)` with `alpha` a shortest vector of `J`.
fn reduce_ideal(j: &QuatLattice, alg: &QuaternionAlgebra) -> Result<QuatLattice> {
    let norm = j.norm(alg);
    let g = j.scaled_gram(alg, &norm)?;
    let mut bound = 2;
    let best = loop {
        let sv = short_vectors(&g, bound);
        if let Some(v) = sv.iter().min_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0))) {
            break v.0.clone();
        }
        bound *= 2;
        ensure!(bound < 1 << 40, Certificate, "no short vector in a definite lattice");
    };
    let alpha = j.element(&best);
    Ok(j.left_mul(&alpha.conj(), alg).scale(&(Rational::one() / norm)))
}

/// Number of classes from the Eichler class number formula (squarefree level).
pub fn class_number_formula(ell: u64, level: u64) -> Option<u64> {
    if !crate::arith::is_square_free(level) {
        return None;
    }
    let primes: Vec<i64> = factorize(level).primes().map(|p| p as i64).collect();
    let l = ell as i64;
    let idx: i64 = primes.iter().map(|p| p + 1).product();
    let e4: i64 = (1 - crate::arith::kronecker(-4, l) as i64)
        * primes
            .iter()
            .map(|&p| 1 + crate::arith::kronecker(-4, p) as i64)
            .product::<i64>();
    let e3: i64 = (1 - crate::arith::kronecker(-3, l) as i64)
        * primes
            .iter()
            .map(|&p| 1 + crate::arith::kronecker(-3, p) as i64)
            .product::<i64>();
    // h = (ell - 1) idx / 12 + e4 / 4 + e3 / 3, over the common denominator 12
    let num = (l - 1) * idx + 3 * e4 + 4 * e3;
    (num > 0 && num % 12 == 0).then_some((num / 12) as u64)
}
