use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simultaneous_reduction, GaloisOrbitTable, Twist};
use crate::arith::{gcd_i64, is_prime, rational_to_f64, rational_to_pair, sigma1, Rational};
use crate::error::{ensure, Error, Result};
use crate::quadratic::{d_of_n, splitting_type, ImagQuadField, SplittingType};
use crate::quaternion::brandt::MAX_BRANDT_INDEX;
use crate::quaternion::{
    brandt_matrices, eichler_order, eichler_order_for, expected_mass, ideal_classes, maximal_order_for, IdealClasses,
};

/// Fewest conductors accepted by [`partition_twists`].
pub const MIN_PARTITION_DATA: usize = 3;
pub const MAX_SELECT_ELL: u64 = 10_000;
/// Largest unit group of an order in a definite quaternion algebra over `Q`.
const MAX_UNITS: i64 = 24;

/// User-supplied bounds for the experiments: the torsion bound `t1`, the fiber
/// bound `t2`, the dimension `dim_a` and the twist count `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub t1: u64,
    pub t2: u64,
    pub dim_a: u64,
    pub r: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            t1: 1,
            t2: 1,
            dim_a: 1,
            r: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.t1 > 0 && self.t2 > 0 && self.dim_a > 0 && self.r > 0,
            InvalidInput,
            "t1, t2, dimA and r must be positive"
        );
        Ok(())
    }

    /// `(t1 r!)^(2 dim_a) t2`.
    pub fn class_bound(&self) -> BigInt {
        let fact: BigInt = (1..=self.r).map(BigInt::from).product();
        (BigInt::from(self.t1) * fact).pow(2 * self.dim_a as u32) * BigInt::from(self.t2)
    }
}

/// Classes of the maximal order (`level = 1`) or of an Eichler order of the given
/// level containing the maximal order of `field`.
pub fn class_set(ell: u64, level: u64, field: Option<&ImagQuadField>) -> Result<IdealClasses> {
    let order = match (level, field) {
        (1, _) => maximal_order_for(ell)?,
        (_, Some(f)) => eichler_order(&maximal_order_for(ell)?, level, f)?,
        (_, None) => eichler_order_for(ell, level)?,
    };
    ideal_classes(&order)
}

/// `w_i^-1 / sum_j w_j^-1`.
pub fn weight_measure(weights: &[u64]) -> Vec<Rational> {
    let inv: Vec<Rational> = weights
        .iter()
        .map(|&w| Rational::new(BigInt::one(), BigInt::from(w)))
        .collect();
    let total: Rational = inv.iter().sum();
    inv.into_iter().map(|x| x / &total).collect()
}

/// `min_i (w_i^-1 / sum_j w_j^-1)^r`.
pub fn c_constant(weights: &[u64], r: u32) -> Result<Rational> {
    ensure!(!weights.is_empty(), InvalidInput, "no classes");
    ensure!(r >= 1, InvalidInput, "r must be positive");
    let m = weight_measure(weights).into_iter().min().expect("nonempty");
    Ok(num_traits::pow(m, r as usize))
}

/// Half the l1 distance.
pub fn total_variation(p: &[Rational], q: &[Rational]) -> Rational {
    let s: Rational = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    s / Rational::from_integer(2.into())
}

fn pair(r: &Rational) -> Result<[i64; 2]> {
    let (a, b) = rational_to_pair(r)?;
    Ok([a, b])
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistRow {
    pub ell: u64,
    pub n: u64,
    pub tv: f64,
    /// `d(n)`, when a field is fixed.
    pub d: Option<[i64; 2]>,
    pub c: [i64; 2],
    /// `1 - d(n) < c`.
    pub in_regime: Option<bool>,
    pub coverage: Option<f64>,
    /// Rows of the Galois orbit table, `|Pic(O_n)|`.
    pub orbit_size: Option<usize>,
    pub target_size: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistReport {
    pub ell: u64,
    pub level: u64,
    pub disc_l: Option<i64>,
    pub weights: Vec<u64>,
    pub weight_measure: Vec<[i64; 2]>,
    pub twists: Vec<Twist>,
    pub partition: Vec<Vec<usize>>,
    /// Number of blocks of the partition.
    pub k: usize,
    pub rows: Vec<EquidistRow>,
}

impl EquidistReport {
    /// Largest TV over rows with prime `n` in `(lo, hi]`.
    pub fn max_tv_over_primes(&self, lo: u64, hi: u64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.n > lo && r.n <= hi && is_prime(r.n))
            .map(|r| r.tv)
            .fold(None, |acc, t| Some(acc.map_or(t, |a: f64| a.max(t))))
    }

    /// Smallest `n` in the run with full coverage.
    pub fn smallest_full_coverage(&self) -> Option<u64> {
        self.rows.iter().find(|r| r.coverage == Some(1.0)).map(|r| r.n)
    }
}

fn sorted_unique(ns: &[u64]) -> Vec<u64> {
    let s: BTreeSet<u64> = ns.iter().copied().collect();
    s.into_iter().collect()
}

/// TV distance between row `x0` of `B(n) / sigma_1(n)` and the weight measure.
pub fn hecke_equidist_stats(classes: &IdealClasses, x0: usize, n_list: &[u64]) -> Result<EquidistReport> {
    ensure!(x0 < classes.len(), InvalidInput, "class index {x0} out of range");
    let ns = sorted_unique(n_list);
    let bad = classes.ell() * classes.level();
    for &n in &ns {
        ensure!(
            n >= 1 && gcd_i64(n as i64, bad as i64) == 1,
            InvalidInput,
            "n = {n} must be positive and coprime to ell * N = {bad}"
        );
        ensure!(
            n <= MAX_BRANDT_INDEX,
            BoundExceeded,
            "n = {n} exceeds {MAX_BRANDT_INDEX}"
        );
    }
    let weights = classes.weights();
    let target = weight_measure(&weights);
    let c = c_constant(&weights, 1)?;
    let all = brandt_matrices(classes, &ns)?;
    let rows = ns
        .iter()
        .map(|&n| {
            let b = all.get(n).expect("computed");
            let s = Rational::from_integer(sigma1(n).into());
            let emp: Vec<Rational> = b.entries[x0]
                .iter()
                .map(|&x| Rational::from_integer(x.into()) / &s)
                .collect();
            Ok(EquidistRow {
                ell: classes.ell(),
                n,
                tv: rational_to_f64(&total_variation(&emp, &target)),
                d: None,
                c: pair(&c)?,
                in_regime: None,
                coverage: None,
                orbit_size: None,
                target_size: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquidistReport {
        ell: classes.ell(),
        level: classes.level(),
        disc_l: None,
        weight_measure: target.iter().map(pair).collect::<Result<_>>()?,
        weights,
        twists: vec![1],
        partition: vec![vec![0]],
        k: 1,
        rows,
    })
}

/// Groups twists whose columns are related by a bijection of classes in every
/// table; others fill the product and stay apart.
pub fn partition_twists(tables: &[GaloisOrbitTable], min_n: usize) -> Result<Vec<Vec<usize>>> {
    ensure!(
        tables.len() >= min_n,
        InvalidInput,
        "need orbit data for at least {min_n} conductors, got {}",
        tables.len()
    );
    let r = tables.first().map_or(0, |t| t.twists.len());
    ensure!(
        tables.iter().all(|t| t.twists.len() == r),
        InvalidInput,
        "tables use different twist sets"
    );
    let linked = |s: usize, u: usize| {
        tables.iter().all(|t| {
            let mut fwd = std::collections::BTreeMap::new();
            let mut bwd = std::collections::BTreeMap::new();
            t.entries.iter().all(|row| {
                *fwd.entry(row[s]).or_insert(row[u]) == row[u] && *bwd.entry(row[u]).or_insert(row[s]) == row[s]
            })
        })
    };
    let mut block: Vec<usize> = (0..r).collect();
    for s in 0..r {
        for u in s + 1..r {
            if block[u] == u && linked(s, u) {
                block[u] = block[s];
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (s, &b) in block.iter().enumerate() {
        match out.iter_mut().find(|blk| block[blk[0]] == b) {
            Some(blk) => blk.push(s),
            None => out.push(vec![s]),
        }
    }
    Ok(out)
}

fn check_conductors(classes: &IdealClasses, field: &ImagQuadField, ns: &[u64]) -> Result<()> {
    let bad = (classes.ell() * classes.level()) as i64 * field.disc();
    for &n in ns {
        ensure!(
            n >= 1 && gcd_i64(n as i64, bad) == 1,
            Hypothesis,
            "n = {n} must be coprime to ell * N * D_L = {bad}"
        );
    }
    Ok(())
}

/// Reduction tables for every `n`, in the order of `ns`.
fn tables_for(
    classes: &IdealClasses,
    field: &ImagQuadField,
    twists: &[Twist],
    ns: &[u64],
) -> Result<Vec<GaloisOrbitTable>> {
    ns.par_iter()
        .map(|&n| simultaneous_reduction(classes, &field.order(n)?, twists))
        .collect()
}

/// Coverage of `prod_i Delta^{T_i}(classes)` by the images of the Galois orbits.
pub fn surjectivity_experiment(
    classes: &IdealClasses,
    field: &ImagQuadField,
    twists: &[Twist],
    n_list: &[u64],
) -> Result<EquidistReport> {
    let ns = sorted_unique(n_list);
    check_conductors(classes, field, &ns)?;
    let tables = tables_for(classes, field, twists, &ns)?;
    let partition = if twists.len() == 1 {
        vec![vec![0]]
    } else {
        partition_twists(&tables, MIN_PARTITION_DATA)?
    };
    let k = partition.len();
    let weights = classes.weights();
    let target_measure = weight_measure(&weights);
    let c = c_constant(&weights, twists.len() as u32)?;
    let h = classes.len() as u64;
    let target_size = h.pow(k as u32);
    let mut rows = Vec::with_capacity(tables.len());
    for t in &tables {
        let d = d_of_n(t.n, field)?;
        let in_regime = Rational::one() - &d < c;
        let hit = t
            .image()
            .into_iter()
            .filter(|row| partition.iter().all(|blk| blk.iter().all(|&s| row[s] == row[blk[0]])))
            .count() as u64;
        let mut counts = vec![0u64; classes.len()];
        for v in t.column(0) {
            counts[v] += 1;
        }
        let total = Rational::from_integer((t.entries.len() as i64).into());
        let emp: Vec<Rational> = counts
            .iter()
            .map(|&x| Rational::from_integer(x.into()) / &total)
            .collect();
        rows.push(EquidistRow {
            ell: classes.ell(),
            n: t.n,
            tv: rational_to_f64(&total_variation(&emp, &target_measure)),
            d: Some(pair(&d)?),
            c: pair(&c)?,
            in_regime: Some(in_regime),
            coverage: Some(hit as f64 / target_size as f64),
            orbit_size: Some(t.entries.len()),
            target_size: Some(target_size),
        });
    }
    Ok(EquidistReport {
        ell: classes.ell(),
        level: classes.level(),
        disc_l: Some(field.disc()),
        weight_measure: target_measure.iter().map(pair).collect::<Result<_>>()?,
        weights,
        twists: twists.to_vec(),
        partition,
        k,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EllCandidate {
    pub ell: u64,
    /// Enumerated class count, absent when the mass bound already rules `ell` out.
    pub classes: Option<usize>,
    /// `floor(24 * mass)`, an upper bound for the class count.
    pub class_upper_bound: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllSelection {
    pub ell: u64,
    pub bound: String,
    pub classes: usize,
    /// Every inert prime tried, in increasing order, ending with the answer.
    pub candidates: Vec<EllCandidate>,
}

/// The least prime `ell`, inert in the field and coprime to `N D_L`, whose class
/// count exceeds `(t1 r!)^(2 dim_a) t2`.
pub fn select_ell(cfg: &ExperimentConfig, field: &ImagQuadField, level: u64) -> Result<EllSelection> {
    cfg.validate()?;
    ensure!(level >= 1, InvalidInput, "level must be positive");
    let bound = cfg.class_bound();
    let mut candidates = Vec::new();
    for ell in (2..=MAX_SELECT_ELL).filter(|&l| is_prime(l)) {
        if splitting_type(field, ell) != SplittingType::Inert || level.is_multiple_of(ell) {
            continue;
        }
        let mass = expected_mass(ell, level);
        let upper = (mass * Rational::from_integer(MAX_UNITS.into())).floor().to_integer();
        let upper_i = i64::try_from(upper.clone()).unwrap_or(i64::MAX);
        if upper <= bound {
            candidates.push(EllCandidate {
                ell,
                classes: None,
                class_upper_bound: upper_i,
            });
            continue;
        }
        let count = class_set(ell, level, Some(field))?.len();
        candidates.push(EllCandidate {
            ell,
            classes: Some(count),
            class_upper_bound: upper_i,
        });
        if BigInt::from(count) > bound {
            return Ok(EllSelection {
                ell,
                bound: bound.to_string(),
                classes: count,
                candidates,
            });
        }
    }
    Err(Error::BoundExceeded(format!(
        "no inert prime ell <= {MAX_SELECT_ELL} has more than {bound} classes"
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairStat {
    pub n: u64,
    pub rows: usize,
    /// Fraction of pairs of Galois conjugates with different reduction vectors.
    pub distinct_fraction: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiEllRow {
    pub ell: u64,
    /// Number of ideal classes.
    pub s: usize,
    /// `t1 / s`.
    pub bound_ratio: [i64; 2],
    pub per_n: Vec<PairStat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiEllReport {
    pub config: ExperimentConfig,
    pub disc_l: i64,
    pub level: u64,
    pub rows: Vec<MultiEllRow>,
    pub ratios_strictly_decreasing: bool,
}

fn distinct_pair_fraction(t: &GaloisOrbitTable) -> Option<f64> {
    let m = t.entries.len();
    if m < 2 {
        return None;
    }
    let mut same = 0u64;
    let mut counts = std::collections::BTreeMap::new();
    for row in &t.entries {
        *counts.entry(row).or_insert(0u64) += 1;
    }
    for c in counts.values() {
        same += c * (c - 1) / 2;
    }
    let total = (m * (m - 1) / 2) as u64;
    Some((total - same) as f64 / total as f64)
}

/// For each `ell`: the class count `s(ell)`, the ratio `t1 / s(ell)`, and how
/// often two Galois conjugates have different reduction vectors.
pub fn multi_ell_scan(
    ells: &[u64],
    field: &ImagQuadField,
    level: u64,
    twists: &[Twist],
    n_list: &[u64],
    cfg: &ExperimentConfig,
) -> Result<MultiEllReport> {
    cfg.validate()?;
    let ells = sorted_unique(ells);
    ensure!(!ells.is_empty(), InvalidInput, "empty prime set");
    let ns = sorted_unique(n_list);
    let rows = ells
        .iter()
        .map(|&ell| {
            ensure!(
                is_prime(ell) && splitting_type(field, ell) == SplittingType::Inert,
                Hypothesis,
                "ell = {ell} must be a prime inert in {field}"
            );
            let classes = class_set(ell, level, Some(field))?;
            check_conductors(&classes, field, &ns)?;
            let tables = tables_for(&classes, field, twists, &ns)?;
            let s = classes.len();
            let ratio = Rational::new(BigInt::from(cfg.t1), BigInt::from(s));
            Ok(MultiEllRow {
                ell,
                s,
                bound_ratio: pair(&ratio)?,
                per_n: tables
                    .iter()
                    .map(|t| PairStat {
                        n: t.n,
                        rows: t.entries.len(),
                        distinct_fraction: distinct_pair_fraction(t),
                    })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratio = |r: &MultiEllRow| Rational::new(r.bound_ratio[0].into(), r.bound_ratio[1].into());
    let ratios_strictly_decreasing = rows.windows(2).all(|w| ratio(&w[1]) < ratio(&w[0]));
    Ok(MultiEllReport {
        config: *cfg,
        disc_l: field.disc(),
        level,
        rows,
        ratios_strictly_decreasing,
    })
}

/// The scan for one `ell` along `n = p, p^2, ..., p^k_max`.
pub fn vertical_scan(
    ell: u64,
    field: &ImagQuadField,
    level: u64,
    twists: &[Twist],
    p: u64,
    k_max: u32,
    cfg: &ExperimentConfig,
) -> Result<MultiEllReport> {
    ensure!(is_prime(p), InvalidInput, "{p} is not prime");
    ensure!(k_max >= 1, InvalidInput, "k_max must be positive");
    let ns: Vec<u64> = (1..=k_max).map(|k| p.pow(k)).collect();
    multi_ell_scan(&[ell], field, level, twists, &ns, cfg)
}
