//! Gross points: optimal embeddings of imaginary quadratic orders into the left
//! orders of the ideal classes, the class-group action on them, and the
//! simultaneous reduction tables built from Galois orbits.

pub mod experiments;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, gcd_i64, is_prime, kronecker, rat_int, Rational};
use crate::enumerate::vectors_of_value;
use crate::error::{ensure, Error, Result};
use crate::quadratic::{class_group, prime_form_above, splitting_type, BQForm, ClassGroup, QuadOrder, SplittingType};
use crate::quaternion::{IdealClasses, QuatElement, QuatLattice};

pub use experiments::{
    c_constant, class_set, hecke_equidist_stats, multi_ell_scan, partition_twists, select_ell, surjectivity_experiment,
    total_variation, vertical_scan, weight_measure, EllCandidate, EllSelection, EquidistReport, EquidistRow,
    ExperimentConfig, MultiEllReport, MultiEllRow,
};

/// An optimal embedding of `O_n` into the left order of an ideal class, stored as
/// the image `y` of `(t + sqrt(n^2 D_L)) / 2`, `t = n^2 D_L mod 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrossPoint {
    pub class_index: usize,
    pub conductor: u64,
    pub disc: i64,
    /// Coordinates of `y` on the basis of the left order, minimal over conjugation
    /// by its unit group.
    pub coords: Vec<i64>,
    #[serde(skip)]
    pub embedding: QuatElement,
}

impl GrossPoint {
    fn key(&self) -> (usize, &[i64]) {
        (self.class_index, &self.coords)
    }
}

impl PartialOrd for GrossPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GrossPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// Trace and norm of the generator `(t + sqrt(disc)) / 2`.
fn generator_trace_norm(disc: i64) -> (i64, i64) {
    let t = disc.rem_euclid(2);
    (t, (t * t - disc) / 4)
}

fn check_inert(classes: &IdealClasses, order: &QuadOrder) -> Result<()> {
    let ell = classes.ell();
    ensure!(
        splitting_type(&order.field, ell) == SplittingType::Inert,
        Hypothesis,
        "ell = {ell} must be inert in {} for supersingular reduction",
        order.field
    );
    let bad = (ell * classes.level()) as i64;
    ensure!(
        gcd_i64(order.conductor as i64, bad) == 1,
        Hypothesis,
        "conductor {} must be coprime to ell * N = {bad}",
        order.conductor
    );
    Ok(())
}

/// The representative of `y` under conjugation by the units of class `k`'s left order.
fn canonical_point(classes: &IdealClasses, k: usize, y: &QuatElement, order: &QuadOrder) -> Result<GrossPoint> {
    let alg = classes.alg();
    let o = &classes.classes[k].left_order;
    let mut best: Option<(Vec<BigInt>, QuatElement)> = None;
    for u in o.units() {
        let z = alg.mul(&alg.mul(&u, y), &u.conj());
        let c = o
            .lattice
            .coordinates(&z)
            .ok_or_else(|| Error::Certificate("conjugated embedding left its order".into()))?;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, z));
        }
    }
    let (c, z) = best.ok_or_else(|| Error::Certificate("order without units".into()))?;
    let coords = c
        .iter()
        .map(|x| x.to_i64())
        .collect::<Option<Vec<i64>>>()
        .ok_or_else(|| Error::BoundExceeded("embedding coordinates exceed i64".into()))?;
    Ok(GrossPoint {
        class_index: k,
        conductor: order.conductor,
        disc: order.disc(),
        coords,
        embedding: z,
    })
}

/// Optimal embeddings of `order` into the left order of class `k`, one per unit
/// conjugacy class, sorted.
fn embeddings_into(classes: &IdealClasses, k: usize, order: &QuadOrder) -> Result<Vec<GrossPoint>> {
    let alg = classes.alg();
    let o = &classes.classes[k].left_order;
    let disc = order.disc();
    let (t, _) = generator_trace_norm(disc);
    // the Gross lattice {2x - trd(x)} carries s = 2y - t with nrd(s) = -disc
    let gross_gens: Vec<QuatElement> = o
        .basis()
        .iter()
        .map(|b| b.scale(&rat_int(2)).sub(&QuatElement::from_scalar(&b.trd())))
        .collect();
    let gross = QuatLattice::from_generators(&gross_gens)?;
    let g = gross.scaled_gram(alg, &Rational::from_integer(1.into()))?;
    let half = Rational::new(1.into(), 2.into());
    let primes: Vec<u64> = factorize(order.conductor).primes().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in vectors_of_value(&g, -2 * disc) {
        let s = gross.element(&v);
        let y = s.add(&QuatElement::from_scalar(&rat_int(t))).scale(&half);
        if !o.contains(&y) {
            continue;
        }
        let optimal = primes.iter().all(|&p| {
            let inv_p = Rational::new(1.into(), BigInt::from(p));
            (0..p as i64).all(|a| !o.contains(&y.add(&QuatElement::from_scalar(&rat_int(a))).scale(&inv_p)))
        });
        if !optimal {
            continue;
        }
        let pt = canonical_point(classes, k, &y, order)?;
        if seen.insert(pt.coords.clone()) {
            out.push(pt);
        }
    }
    out.sort();
    Ok(out)
}

/// All Gross points of conductor `order.conductor`, sorted by class then coordinates.
pub fn optimal_embeddings(classes: &IdealClasses, order: &QuadOrder) -> Result<Vec<GrossPoint>> {
    check_inert(classes, order)?;
    let per_class: Vec<Result<Vec<GrossPoint>>> = (0..classes.len())
        .into_par_iter()
        .map(|k| embeddings_into(classes, k, order))
        .collect();
    let mut out = Vec::new();
    for r in per_class {
        out.extend(r?);
    }
    Ok(out)
}

/// The least Gross point: the first class admitting an optimal embedding, and the
/// least embedding there.
pub fn base_point(classes: &IdealClasses, order: &QuadOrder) -> Result<GrossPoint> {
    check_inert(classes, order)?;
    for k in 0..classes.len() {
        if let Some(pt) = embeddings_into(classes, k, order)?.into_iter().next() {
            return Ok(pt);
        }
    }
    Err(Error::Certificate(format!(
        "no optimal embedding of the order of discriminant {}",
        order.disc()
    )))
}

/// The point `[a] * pt` for the proper ideal `a = [a, (-b + sqrt(disc)) / 2]`
/// attached to `form`: the right ideal `phi(a) I` reidentified with a class
/// representative `alpha I_k`, and the embedding transported to `alpha^-1 y alpha`.
pub fn class_action(classes: &IdealClasses, pt: &GrossPoint, form: &BQForm) -> Result<GrossPoint> {
    ensure!(
        form.disc() == pt.disc,
        InvalidInput,
        "form of discriminant {} acting on a point of discriminant {}",
        form.disc(),
        pt.disc
    );
    ensure!(
        form.a > 0 && form.is_primitive(),
        InvalidInput,
        "form {form} is not primitive positive definite"
    );
    let alg = classes.alg();
    let order = QuadOrder::new(
        crate::quadratic::ImagQuadField::new(fundamental_part(pt.disc, pt.conductor))?,
        pt.conductor,
    )?;
    let (t, _) = generator_trace_norm(pt.disc);
    let y = &pt.embedding;
    let shift = (-form.b - t) / 2;
    let ideal_gens = [
        QuatElement::from_scalar(&rat_int(form.a)),
        y.add(&QuatElement::from_scalar(&rat_int(shift))),
    ];
    let phi_a = QuatLattice::from_generators(&ideal_gens)?;
    let j = phi_a.product(&classes.classes[pt.class_index].lattice, alg);
    let (k, alpha) = classes.identify(&j)?;
    let alpha_inv = alg
        .inv(&alpha)
        .ok_or_else(|| Error::Certificate("zero equivalence element".into()))?;
    let moved = alg.mul(&alg.mul(&alpha_inv, y), &alpha);
    ensure!(
        classes.classes[k].left_order.contains(&moved),
        Certificate,
        "transported embedding is not in the left order of class {k}"
    );
    canonical_point(classes, k, &moved, &order)
}

fn fundamental_part(disc: i64, conductor: u64) -> i64 {
    disc / (conductor as i64 * conductor as i64)
}

/// A twist in `T`: the identity (`1`) or the class of a prime ideal above a
/// non-inert prime `p` (`p`), or its inverse (`-p`).
pub type Twist = i64;

fn twist_form(order: &QuadOrder, twist: Twist) -> Result<BQForm> {
    if twist == 1 {
        return Ok(BQForm::principal(order.disc()));
    }
    let p = twist.unsigned_abs();
    ensure!(
        is_prime(p),
        InvalidInput,
        "twist {twist} is neither 1 nor plus/minus a prime"
    );
    ensure!(
        kronecker(order.disc(), p as i64) != -1,
        Hypothesis,
        "twist prime {p} is inert in the order of discriminant {}",
        order.disc()
    );
    let f = prime_form_above(order, p)?;
    Ok(if twist < 0 { f.inverse() } else { f })
}

/// Reduction classes of the Galois orbit `{sigma nu x[n]}`: rows are indexed by
/// `nu` in `Pic(O_n)` (in the order of the reduced forms), columns by the twists.
#[derive(Debug, Clone, Serialize)]
pub struct GaloisOrbitTable {
    pub ell: u64,
    pub level: u64,
    pub disc_l: i64,
    pub n: u64,
    pub disc: i64,
    pub class_number: usize,
    pub base: GrossPoint,
    pub twists: Vec<Twist>,
    pub forms: Vec<BQForm>,
    pub entries: Vec<Vec<usize>>,
    /// Number of distinct Gross points in the orbit of the base point.
    pub orbit_size: usize,
}

impl GaloisOrbitTable {
    pub fn column(&self, s: usize) -> Vec<usize> {
        self.entries.iter().map(|r| r[s]).collect()
    }

    /// Distinct rows.
    pub fn image(&self) -> BTreeSet<Vec<usize>> {
        self.entries.iter().cloned().collect()
    }
}

/// The orbit `nu -> [nu] x0` over the whole class group, indexed like `cg.elements`.
pub fn galois_orbit(classes: &IdealClasses, cg: &ClassGroup, base: &GrossPoint) -> Result<Vec<GrossPoint>> {
    cg.elements.par_iter().map(|f| class_action(classes, base, f)).collect()
}

pub fn simultaneous_reduction(classes: &IdealClasses, order: &QuadOrder, twists: &[Twist]) -> Result<GaloisOrbitTable> {
    ensure!(!twists.is_empty(), InvalidInput, "the twist set T is empty");
    check_inert(classes, order)?;
    let cg = class_group(order)?;
    let twist_idx = twists
        .iter()
        .map(|&t| {
            ensure!(
                t == 1 || !(classes.ell() * classes.level() * order.conductor).is_multiple_of(t.unsigned_abs()),
                Hypothesis,
                "twist prime {} divides ell * N * n",
                t.unsigned_abs()
            );
            let f = twist_form(order, t)?;
            cg.index_of(&f)
                .ok_or_else(|| Error::Certificate(format!("twist form {f} not in the class group")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let base = base_point(classes, order)?;
    let orbit = galois_orbit(classes, &cg, &base)?;
    let orbit_size = orbit.iter().collect::<BTreeSet<_>>().len();
    ensure!(
        orbit_size == cg.class_number(),
        Certificate,
        "class group of order {} moves the base point to only {orbit_size} points",
        cg.class_number()
    );
    let entries = (0..cg.class_number())
        .map(|nu| twist_idx.iter().map(|&s| orbit[cg.mul(s, nu)].class_index).collect())
        .collect();
    Ok(GaloisOrbitTable {
        ell: classes.ell(),
        level: classes.level(),
        disc_l: order.field.disc(),
        n: order.conductor,
        disc: order.disc(),
        class_number: cg.class_number(),
        base,
        twists: twists.to_vec(),
        forms: cg.elements.clone(),
        entries,
        orbit_size,
    })
}

/// Number of Gross points predicted by Eichler's embedding count for `N = 1`:
/// `h(O_n) (1 - (O_n / ell))`, which is `2 h(O_n)` for inert `ell`.
pub fn expected_point_count(order: &QuadOrder) -> usize {
    crate::quadratic::class_number(order.disc()) * 2
}
