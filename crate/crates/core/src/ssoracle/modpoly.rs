//! Classical modular polynomials `Phi_p(X, Y)` for `p` in {2, 3, 5, 7}: loading,
//! integrity checks, specialization mod `ell`, and an exact generator from the
//! `q`-expansion of `j`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{FiniteField, Fq2, Fq2Element, Poly, Rational};
use crate::error::{ensure, Error, Result};

pub const SUPPORTED_PRIMES: [u64; 4] = [2, 3, 5, 7];
pub const DATA_ENV: &str = "HEEGNER_LAB_DATA";

const BUNDLED: [(u64, &str); 4] = [
    (2, include_str!("../../data/phi_2.txt")),
    (3, include_str!("../../data/phi_3.txt")),
    (5, include_str!("../../data/phi_5.txt")),
    (7, include_str!("../../data/phi_7.txt")),
];

/// Pairs `(j1, j2)` with `Phi_p(j1, j2) = 0`, from CM curves with known isogenies.
const SPOT_CHECKS: &[(u64, i64, i64)] = &[
    (2, 0, 54000),
    (2, 1728, 1728),
    (2, 1728, 287496),
    (2, -3375, -3375),
    (2, 8000, 8000),
    (3, 0, 0),
    (3, 0, -12288000),
    (3, 8000, 8000),
    (3, -32768, -32768),
    (5, 1728, 1728),
    (5, -32768, -32768),
    (7, 0, 0),
    (7, -3375, -3375),
];

/// `Phi_p` with every coefficient of `X^i Y^j` stored, symmetric in `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularPolynomialData {
    pub p: u64,
    pub coeffs: BTreeMap<(u32, u32), BigInt>,
}

impl ModularPolynomialData {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty modular polynomial file".into()))?;
        let p = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["p", v] => v
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("bad prime {v:?}: {e}")))?,
            _ => return Err(Error::Parse(format!("expected header \"p <prime>\", got {header:?}"))),
        };
        let mut coeffs = BTreeMap::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            ensure!(parts.len() == 3, Parse, "expected \"i j c\", got {line:?}");
            let i: u32 = parts[0].parse().map_err(|e| Error::Parse(format!("{line:?}: {e}")))?;
            let j: u32 = parts[1].parse().map_err(|e| Error::Parse(format!("{line:?}: {e}")))?;
            let c: BigInt = parts[2].parse().map_err(|e| Error::Parse(format!("{line:?}: {e}")))?;
            for key in [(i, j), (j, i)] {
                if let Some(old) = coeffs.insert(key, c.clone()) {
                    ensure!(old == c, Parse, "conflicting coefficients for X^{} Y^{}", key.0, key.1);
                }
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        let data = ModularPolynomialData { p, coeffs };
        data.validate()?;
        Ok(data)
    }

    /// The bundled table, or `<dir>/phi_<p>.txt` when a data directory is given
    /// explicitly or through `HEEGNER_LAB_DATA`.
    pub fn load(p: u64, dir: Option<&Path>) -> Result<Self> {
        ensure!(
            SUPPORTED_PRIMES.contains(&p),
            InvalidInput,
            "no modular polynomial for p = {p} (supported: 2, 3, 5, 7)"
        );
        let dir: Option<PathBuf> = dir
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from));
        let data = match dir {
            Some(d) => {
                let path = d.join(format!("phi_{p}.txt"));
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                Self::parse(&text)?
            }
            None => Self::parse(BUNDLED.iter().find(|(q, _)| *q == p).expect("bundled").1)?,
        };
        ensure!(data.p == p, Parse, "file for p = {p} declares p = {}", data.p);
        Ok(data)
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    /// Symmetry, monic shape, and the CM spot checks.
    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        let top = p as u32 + 1;
        ensure!(
            SUPPORTED_PRIMES.contains(&p),
            Certificate,
            "modular polynomial for unsupported p = {p}"
        );
        for ((i, j), c) in &self.coeffs {
            ensure!(
                self.coeffs.get(&(*j, *i)) == Some(c),
                Certificate,
                "Phi_{p} is not symmetric at X^{i} Y^{j}"
            );
            ensure!(
                *i <= top && *j <= top,
                Certificate,
                "Phi_{p} has a term X^{i} Y^{j} above degree {top}"
            );
            ensure!(
                (*i < top && *j < top) || (*i + *j == top),
                Certificate,
                "Phi_{p} has a mixed term X^{i} Y^{j} of top degree"
            );
        }
        ensure!(
            self.coeffs.get(&(top, 0)) == Some(&BigInt::one()),
            Certificate,
            "Phi_{p} is not monic of degree {top} in X"
        );
        for &(q, a, b) in SPOT_CHECKS.iter().filter(|c| c.0 == p) {
            let v = self.eval_int(&BigInt::from(a), &BigInt::from(b));
            ensure!(
                v.is_zero(),
                Certificate,
                "spot check Phi_{q}({a}, {b}) = {v}, expected 0"
            );
        }
        Ok(())
    }

    pub fn eval_int(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let d = self.degree() as usize;
        let xp = powers(x, d);
        let yp = powers(y, d);
        self.coeffs
            .iter()
            .map(|((i, j), c)| c * &xp[*i as usize] * &yp[*j as usize])
            .sum()
    }

    /// `Phi_p(x, Y)` reduced mod `ell`, as a polynomial in `Y` over `F_{ell^2}`.
    pub fn specialize(&self, field: Fq2, x: Fq2Element) -> Poly<Fq2> {
        let d = self.degree() as usize;
        let ell = BigInt::from(field.p);
        let mut xp = vec![field.one()];
        for k in 1..=d {
            xp.push(field.mul(xp[k - 1], x));
        }
        let mut ys = vec![field.zero(); d + 1];
        for ((i, j), c) in &self.coeffs {
            let cm = c.mod_floor(&ell).to_u64().expect("reduced coefficient");
            let term = field.mul(field.embed(cm), xp[*i as usize]);
            ys[*j as usize] = field.add(ys[*j as usize], term);
        }
        Poly::new(field, ys)
    }

    /// Data-file text: header, then `i j c` with `i <= j`.
    pub fn to_text(&self) -> String {
        let mut out = format!("p {}\n", self.p);
        for ((i, j), c) in &self.coeffs {
            if i <= j {
                out.push_str(&format!("{i} {j} {c}\n"));
            }
        }
        out
    }
}

fn powers(x: &BigInt, d: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::one()];
    for k in 1..=d {
        let next = &v[k - 1] * x;
        v.push(next);
    }
    v
}

/// A Laurent series `q^offset * (c_0 + c_1 q + ...)` truncated to `c.len()` terms.
#[derive(Debug, Clone)]
struct Laurent {
    offset: i64,
    c: Vec<BigInt>,
}

impl Laurent {
    /// Coefficient of `q^e`, or `None` beyond the truncation.
    fn coeff(&self, e: i64) -> Option<BigInt> {
        let k = e - self.offset;
        if k < 0 {
            Some(BigInt::zero())
        } else {
            self.c.get(k as usize).cloned()
        }
    }

    fn mul(&self, o: &Laurent, len: usize) -> Laurent {
        let mut c = vec![BigInt::zero(); len];
        for (a, x) in self.c.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (b, y) in o.c.iter().enumerate().take(len - a) {
                c[a + b] += x * y;
            }
        }
        Laurent {
            offset: self.offset + o.offset,
            c,
        }
    }

    /// `f(q^p)`.
    fn dilate(&self, p: usize, len: usize) -> Laurent {
        let mut c = vec![BigInt::zero(); len];
        for (k, x) in self.c.iter().enumerate() {
            if k * p < len {
                c[k * p] = x.clone();
            }
        }
        Laurent {
            offset: self.offset * p as i64,
            c,
        }
    }
}

/// `j(q) = E_4^3 / Delta` to `len` terms starting at `q^-1`.
fn j_series(len: usize) -> Laurent {
    let sigma3 = |n: usize| -> BigInt {
        (1..=n)
            .filter(|d| n.is_multiple_of(*d))
            .map(|d| BigInt::from(d).pow(3))
            .sum()
    };
    let mut e4: Vec<BigInt> = (0..len)
        .map(|n| if n == 0 { BigInt::one() } else { sigma3(n) * 240 })
        .collect();
    e4.truncate(len);
    let e4 = Laurent { offset: 0, c: e4 };
    let e4_cubed = e4.mul(&e4, len).mul(&e4, len);
    // prod (1 - q^n)^24
    let mut eta24 = vec![BigInt::zero(); len];
    eta24[0] = BigInt::one();
    for n in 1..len {
        for _ in 0..24 {
            for k in (n..len).rev() {
                let t = eta24[k - n].clone();
                eta24[k] -= t;
            }
        }
    }
    // invert the unit power series
    let mut inv = vec![BigInt::zero(); len];
    inv[0] = BigInt::one();
    for k in 1..len {
        let s: BigInt = (1..=k).map(|i| &eta24[i] * &inv[k - i]).sum();
        inv[k] = -s;
    }
    let mut j = e4_cubed.mul(&Laurent { offset: 0, c: inv }, len);
    j.offset = -1;
    j
}

/// Solve `A x = b` exactly; `None` unless the solution is unique.
fn solve_exact(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .into_iter()
        .zip(b)
        .map(|(mut r, v)| {
            r.push(v);
            r
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..cols {
        let r = (pivot_row..rows).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot_row, r);
        let inv = Rational::one() / m[pivot_row][col].clone();
        for x in m[pivot_row].iter_mut() {
            *x *= &inv;
        }
        let prow = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        pivot_row += 1;
    }
    // the remaining equations must be consistent
    if m[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|c| m[c][cols].clone()).collect())
}

/// Computes `Phi_p` from scratch by matching `q`-expansion coefficients of
/// `Phi_p(j(q), j(q^p)) = 0`; the system is overdetermined and must be consistent
/// with an integral solution.
pub fn generate(p: u64) -> Result<ModularPolynomialData> {
    ensure!(
        SUPPORTED_PRIMES.contains(&p),
        InvalidInput,
        "generator supports p in {{2, 3, 5, 7}}, got {p}"
    );
    let pu = p as usize;
    let top = pu + 1;
    let unknowns: Vec<(usize, usize)> = (0..top).flat_map(|i| (i..top).map(move |j| (i, j))).collect();
    let lowest = -((pu * top) as i64);
    let n_eq = 2 * unknowns.len() + 16;
    let highest = lowest + n_eq as i64 - 1;
    // series length covering exponents up to `highest` for all products
    let len = (highest + ((pu + 1) * top) as i64 + 2) as usize;
    let jx = j_series(len);
    let jy = jx.dilate(pu, len);
    let mut unit = vec![BigInt::zero(); len];
    unit[0] = BigInt::one();
    let mut xpow = vec![Laurent { offset: 0, c: unit }];
    let mut ypow = xpow.clone();
    for k in 1..=top {
        xpow.push(xpow[k - 1].mul(&jx, len));
        ypow.push(ypow[k - 1].mul(&jy, len));
    }
    let term = |i: usize, j: usize, e: i64| -> BigInt {
        let (x, y) = (&xpow[i], &ypow[j]);
        let mut s = BigInt::zero();
        for a in x.offset..=e - y.offset {
            let ca = x.coeff(a).expect("series long enough");
            if !ca.is_zero() {
                s += ca * y.coeff(e - a).expect("series long enough");
            }
        }
        s
    };
    let sym = |i: usize, j: usize, e: i64| -> BigInt {
        if i == j {
            term(i, i, e)
        } else {
            term(i, j, e) + term(j, i, e)
        }
    };
    let mut a = Vec::with_capacity(n_eq);
    let mut b = Vec::with_capacity(n_eq);
    for e in lowest..=highest {
        a.push(unknowns.iter().map(|&(i, j)| Rational::from(sym(i, j, e))).collect());
        b.push(Rational::from(-sym(top, 0, e)));
    }
    let sol = solve_exact(a, b)
        .ok_or_else(|| Error::Certificate(format!("q-expansion system for Phi_{p} is not uniquely solvable")))?;
    let mut coeffs = BTreeMap::new();
    coeffs.insert((top as u32, 0), BigInt::one());
    coeffs.insert((0, top as u32), BigInt::one());
    for (&(i, j), c) in unknowns.iter().zip(sol) {
        ensure!(
            c.is_integer(),
            Certificate,
            "Phi_{p} coefficient at X^{i} Y^{j} is not integral: {c}"
        );
        let c = c.to_integer();
        if !c.is_zero() {
            coeffs.insert((i as u32, j as u32), c.clone());
            coeffs.insert((j as u32, i as u32), c);
        }
    }
    let data = ModularPolynomialData { p, coeffs };
    data.validate()?;
    Ok(data)
}

/// Largest coefficient size in decimal digits; a cheap fingerprint for reports.
pub fn max_digits(data: &ModularPolynomialData) -> usize {
    data.coeffs
        .values()
        .map(|c| c.abs().to_string().len())
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_expansion() {
        let j = j_series(6);
        let expect = [1i64, 744, 196884, 21493760, 864299970, 20245856256];
        assert_eq!(j.offset, -1);
        for (c, e) in j.c.iter().zip(expect) {
            assert_eq!(*c, BigInt::from(e));
        }
    }

    #[test]
    fn phi2_generated_matches_classical_form() {
        let phi = generate(2).unwrap();
        let get = |i, j| phi.coeffs.get(&(i, j)).cloned().unwrap_or_default();
        assert_eq!(get(2, 2), BigInt::from(-1));
        assert_eq!(get(2, 1), BigInt::from(1488));
        assert_eq!(get(2, 0), BigInt::from(-162000));
        assert_eq!(get(1, 1), BigInt::from(40773375));
        assert_eq!(get(1, 0), BigInt::from(8748000000i64));
        assert_eq!(get(0, 0), BigInt::from(-157464000000000i64));
    }

    #[test]
    fn bundled_tables_match_generator() {
        for p in SUPPORTED_PRIMES {
            let bundled = ModularPolynomialData::load(p, None).unwrap();
            assert_eq!(bundled, generate(p).unwrap(), "p = {p}");
        }
    }

    #[test]
    fn text_round_trip() {
        let phi = ModularPolynomialData::load(3, None).unwrap();
        assert_eq!(ModularPolynomialData::parse(&phi.to_text()).unwrap(), phi);
    }

    #[test]
    fn corrupted_table_is_rejected() {
        let text = ModularPolynomialData::load(2, None).unwrap().to_text();
        let bad = text.replace("1488", "1489");
        assert!(matches!(ModularPolynomialData::parse(&bad), Err(Error::Certificate(_))));
        assert!(ModularPolynomialData::parse("q 2\n").is_err());
    }

    #[test]
    fn specialization_mod_11() {
        let phi = ModularPolynomialData::load(2, None).unwrap();
        let f = Fq2::new(11);
        // Phi_2(0, Y) = (Y - 1)^3 mod 11
        let s = phi.specialize(f, f.zero());
        let cube = Poly::linear(f, f.one())
            .mul(&Poly::linear(f, f.one()))
            .mul(&Poly::linear(f, f.one()));
        assert_eq!(s, cube);
    }
}
