//! Subgroups of `G^r` normalized by the diagonal copy of a finite group `G`.
//!
//! Elements of `G^r` are encoded as `sum g_i * |G|^i`. Subgroups are kept as sorted
//! index lists. For simple non-abelian `G` every diagonal-normalized subgroup should
//! be a product of diagonals over disjoint blocks of coordinates; the functions here
//! enumerate and certify that by brute force.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Error, Result};

/// Largest group order accepted for `r <= 2`.
pub const MAX_ORDER_R2: usize = 360;
/// Largest group order accepted for `r = 3`.
pub const MAX_ORDER_R3: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    pub name: String,
    table: Vec<Vec<u16>>,
    identity: usize,
    inverse: Vec<usize>,
    pub generators: Vec<usize>,
    /// Permutation images when the group was built from permutations.
    perms: Option<Vec<Vec<u8>>>,
}

fn compose(a: &[u8], b: &[u8]) -> Vec<u8> {
    // (a * b)(x) = a(b(x))
    b.iter().map(|&x| a[x as usize]).collect()
}

fn cycles_to_perm(degree: usize, cycles: &[&[u8]]) -> Vec<u8> {
    let mut p: Vec<u8> = (0..degree as u8).collect();
    for c in cycles {
        for k in 0..c.len() {
            p[c[k] as usize] = c[(k + 1) % c.len()];
        }
    }
    p
}

impl FiniteGroup {
    /// Closure of the given permutations under composition.
    pub fn from_permutations(name: &str, gens: &[Vec<u8>]) -> Result<Self> {
        ensure!(!gens.is_empty(), InvalidInput, "need at least one generator");
        let degree = gens[0].len();
        for g in gens {
            let mut seen = vec![false; degree];
            ensure!(g.len() == degree, InvalidInput, "generators act on different sets");
            for &x in g {
                ensure!(
                    (x as usize) < degree && !seen[x as usize],
                    InvalidInput,
                    "not a permutation: {g:?}"
                );
                seen[x as usize] = true;
            }
        }
        let id: Vec<u8> = (0..degree as u8).collect();
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<u8>, usize> = HashMap::from([(id, 0)]);
        let mut k = 0;
        while k < elems.len() {
            for g in gens {
                let p = compose(&elems[k], g);
                if !index.contains_key(&p) {
                    ensure!(elems.len() < u16::MAX as usize, BoundExceeded, "group too large");
                    index.insert(p.clone(), elems.len());
                    elems.push(p);
                }
            }
            k += 1;
        }
        let table: Vec<Vec<u16>> = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&compose(a, b)] as u16).collect())
            .collect();
        let generators = gens.iter().map(|g| index[g]).collect();
        let mut group = Self::assemble(name, table, 0, generators)?;
        group.perms = Some(elems);
        Ok(group)
    }

    fn assemble(name: &str, table: Vec<Vec<u16>>, identity: usize, generators: Vec<usize>) -> Result<Self> {
        let n = table.len();
        ensure!(n > 0 && identity < n, InvalidInput, "empty table or bad identity");
        for row in &table {
            ensure!(row.len() == n, Parse, "multiplication table is not square");
            ensure!(row.iter().all(|&x| (x as usize) < n), Parse, "table entry out of range");
        }
        for a in 0..n {
            ensure!(
                table[identity][a] as usize == a && table[a][identity] as usize == a,
                InvalidInput,
                "element {identity} is not an identity"
            );
        }
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n).find(|&b| table[a][b] as usize == identity);
            ensure!(b.is_some(), InvalidInput, "element {a} has no inverse");
            inverse[a] = b.unwrap();
        }
        ensure!(
            generators.iter().all(|&g| g < n),
            InvalidInput,
            "generator out of range"
        );
        Ok(Self {
            name: name.to_string(),
            table,
            identity,
            inverse,
            generators,
            perms: None,
        })
    }

    /// Alternating group on five letters, generated by `(0 1 2)` and `(0 1 2 3 4)`.
    pub fn a5() -> Self {
        let gens = [cycles_to_perm(5, &[&[0, 1, 2]]), cycles_to_perm(5, &[&[0, 1, 2, 3, 4]])];
        Self::from_permutations("A5", &gens).expect("A5 generators")
    }

    /// `PSL(2,7)` acting on the projective line over `F_7` (point 7 is infinity),
    /// generated by `z -> z + 1` and `z -> -1/z`.
    pub fn psl2_7() -> Self {
        let translate: Vec<u8> = (0..8u8).map(|z| if z == 7 { 7 } else { (z + 1) % 7 }).collect();
        let invert: Vec<u8> = (0..8u8)
            .map(|z| match z {
                7 => 0,
                0 => 7,
                _ => {
                    let inv = (1..7u8).find(|&w| (z as u32 * w as u32) % 7 == 1).unwrap();
                    (7 - inv) % 7
                }
            })
            .collect();
        Self::from_permutations("PSL(2,7)", &[translate, invert]).expect("PSL(2,7) generators")
    }

    /// Parses `order identity`, a generator line `gens g1 g2 ...`, then `order` rows of
    /// the multiplication table. Lines starting with `#` are ignored.
    pub fn from_table_text(name: &str, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let parse_nums = |l: &str| -> Result<Vec<usize>> {
            l.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect()
        };
        let header = parse_nums(lines.next().ok_or_else(|| Error::Parse("missing header".into()))?)?;
        ensure!(header.len() == 2, Parse, "header must be `order identity`");
        let (n, identity) = (header[0], header[1]);
        ensure!(
            n <= MAX_ORDER_R2,
            BoundExceeded,
            "group order {n} exceeds {MAX_ORDER_R2}"
        );
        let gline = lines
            .next()
            .ok_or_else(|| Error::Parse("missing generator line".into()))?;
        let gens = parse_nums(
            gline
                .strip_prefix("gens")
                .ok_or_else(|| Error::Parse("expected `gens`".into()))?,
        )?;
        let mut table = Vec::with_capacity(n);
        for _ in 0..n {
            let row = parse_nums(lines.next().ok_or_else(|| Error::Parse("table truncated".into()))?)?;
            table.push(row.into_iter().map(|x| x as u16).collect());
        }
        ensure!(lines.next().is_none(), Parse, "trailing data after table");
        let group = Self::assemble(name, table, identity, gens)?;
        ensure!(
            group.spot_check_associative(2000, 1),
            InvalidInput,
            "table is not associative"
        );
        ensure!(
            group.generated_order() == n,
            InvalidInput,
            "generators do not generate the group"
        );
        Ok(group)
    }

    pub fn to_table_text(&self) -> String {
        let mut out = format!("# {}\n{} {}\ngens", self.name, self.order(), self.identity);
        for g in &self.generators {
            write!(out, " {g}").unwrap();
        }
        out.push('\n');
        for row in &self.table {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn permutation(&self, a: usize) -> Option<&[u8]> {
        self.perms.as_ref().map(|p| p[a].as_slice())
    }

    /// Index of a permutation, for groups built from permutations.
    pub fn index_of_permutation(&self, p: &[u8]) -> Option<usize> {
        self.perms.as_ref()?.iter().position(|q| q == p)
    }

    pub fn spot_check_associative(&self, samples: usize, seed: u64) -> bool {
        let n = self.order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).all(|_| {
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))
        })
    }

    fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    fn generated_order(&self) -> usize {
        self.closure(&self.generators).iter().filter(|&&b| b).count()
    }

    /// Smallest subgroup containing `x` and stable under conjugation.
    pub fn normal_closure(&self, x: usize) -> Vec<usize> {
        let set = delta_closure(self, 1, &[x as u32]);
        set.into_iter().map(|e| e as usize).collect()
    }

    /// Normal subgroups, sorted by order.
    pub fn normal_subgroups(&self) -> Vec<Vec<usize>> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::from([vec![self.identity]]);
        for x in 0..self.order() {
            found.insert(self.normal_closure(x));
        }
        // joins of normal subgroups are products, hence normal
        loop {
            let list: Vec<Vec<usize>> = found.iter().cloned().collect();
            let before = found.len();
            for a in &list {
                for b in &list {
                    let gens: Vec<usize> = a.iter().chain(b).copied().collect();
                    let s = self.closure(&gens);
                    found.insert((0..self.order()).filter(|&i| s[i]).collect());
                }
            }
            if found.len() == before {
                break;
            }
        }
        let mut out: Vec<Vec<usize>> = found.into_iter().collect();
        out.sort_by_key(|s| (s.len(), s.clone()));
        out
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Simplicity by scanning normal closures of every element.
    pub fn is_simple(&self) -> bool {
        self.order() > 1
            && (0..self.order()).all(|x| x == self.identity || self.normal_closure(x).len() == self.order())
    }

    /// A pair of elements generating the group, searched in index order.
    pub fn generating_pair(&self) -> Option<(usize, usize)> {
        let n = self.order();
        (0..n).into_par_iter().find_map_first(|x| {
            (0..n)
                .find(|&y| self.closure(&[x, y]).iter().all(|&b| b))
                .map(|y| (x, y))
        })
    }

    /// All automorphisms as image tables, found by trying every assignment of a
    /// generating pair and extending along the Cayley graph.
    pub fn automorphisms(&self) -> Result<Vec<Vec<usize>>> {
        ensure!(
            self.order() <= MAX_ORDER_R2,
            BoundExceeded,
            "order {} exceeds {MAX_ORDER_R2}",
            self.order()
        );
        let (g0, g1) = self
            .generating_pair()
            .ok_or_else(|| Error::Hypothesis(format!("{} is not 2-generated", self.name)))?;
        let n = self.order();
        let (o0, o1) = (self.element_order(g0), self.element_order(g1));
        let mut autos: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .filter(|&x| self.element_order(x) == o0)
            .flat_map_iter(|x| {
                (0..n)
                    .filter(move |&y| self.element_order(y) == o1)
                    .filter_map(move |y| self.extend_hom(&[g0, g1], &[x, y]))
            })
            .collect();
        autos.sort();
        Ok(autos)
    }

    fn extend_hom(&self, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
        let n = self.order();
        let mut map = vec![usize::MAX; n];
        map[self.identity] = self.identity;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(k) = queue.pop_front() {
            for (&g, &im) in gens.iter().zip(images) {
                let target = self.mul(k, g);
                let value = self.mul(map[k], im);
                if map[target] == usize::MAX {
                    map[target] = value;
                    queue.push_back(target);
                } else if map[target] != value {
                    return None;
                }
            }
        }
        let mut hit = vec![false; n];
        for &v in &map {
            if v == usize::MAX || hit[v] {
                return None;
            }
            hit[v] = true;
        }
        Some(map)
    }

    pub fn is_inner(&self, auto: &[usize]) -> bool {
        (0..self.order()).any(|g| (0..self.order()).all(|x| self.conj(g, x) == auto[x]))
    }
}

/// A subgroup of `G^r` with an optional product-of-diagonals certificate. The
/// certificate lists disjoint nonempty blocks of `{1..r}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupDescriptor {
    pub r: usize,
    pub order: usize,
    #[serde(skip)]
    pub elements: Vec<u32>,
    pub certificate: Option<Vec<Vec<usize>>>,
}

fn decode(n: usize, r: usize, mut x: u32) -> [usize; 3] {
    let mut out = [0; 3];
    for slot in out.iter_mut().take(r) {
        *slot = x as usize % n;
        x /= n as u32;
    }
    out
}

fn encode(n: usize, r: usize, t: &[usize; 3]) -> u32 {
    (0..r).rev().fold(0u32, |acc, i| acc * n as u32 + t[i] as u32)
}

fn tuple_mul(g: &FiniteGroup, r: usize, a: u32, b: u32) -> u32 {
    let n = g.order();
    let (x, y) = (decode(n, r, a), decode(n, r, b));
    let mut z = [0; 3];
    for i in 0..r {
        z[i] = g.mul(x[i], y[i]);
    }
    encode(n, r, &z)
}

fn tuple_conj(g: &FiniteGroup, r: usize, c: usize, a: u32) -> u32 {
    let n = g.order();
    let x = decode(n, r, a);
    let mut z = [0; 3];
    for i in 0..r {
        z[i] = g.conj(c, x[i]);
    }
    encode(n, r, &z)
}

fn check_size(g: &FiniteGroup, r: usize) -> Result<()> {
    ensure!((1..=3).contains(&r), InvalidInput, "r must be 1, 2 or 3, got {r}");
    let bound = if r == 3 { MAX_ORDER_R3 } else { MAX_ORDER_R2 };
    ensure!(
        g.order() <= bound,
        BoundExceeded,
        "|G| = {} exceeds {bound} for r = {r}",
        g.order()
    );
    Ok(())
}

fn identity_tuple(g: &FiniteGroup, r: usize) -> u32 {
    encode(g.order(), r, &[g.identity(); 3])
}

/// Smallest subgroup of `G^r` containing `gens` and stable under diagonal conjugation.
/// Right multiplication by the generators plus conjugation by the group generators
/// already gives a subgroup: the reached set is closed under multiplication by every
/// conjugate of every generator.
fn delta_closure(g: &FiniteGroup, r: usize, gens: &[u32]) -> Vec<u32> {
    let total = g.order().pow(r as u32);
    let mut seen = vec![false; total];
    let e = identity_tuple(g, r);
    seen[e as usize] = true;
    let mut queue = VecDeque::from([e]);
    let mut out = vec![e];
    while let Some(x) = queue.pop_front() {
        let next = gens
            .iter()
            .map(|&t| tuple_mul(g, r, x, t))
            .chain(g.generators.iter().map(|&c| tuple_conj(g, r, c, x)));
        for y in next.collect::<Vec<_>>() {
            if !seen[y as usize] {
                seen[y as usize] = true;
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out.sort_unstable();
    out
}

fn plain_closure(g: &FiniteGroup, r: usize, gens: &[u32]) -> Vec<u32> {
    let total = g.order().pow(r as u32);
    let mut seen = vec![false; total];
    let e = identity_tuple(g, r);
    seen[e as usize] = true;
    let mut queue = VecDeque::from([e]);
    let mut out = vec![e];
    while let Some(x) = queue.pop_front() {
        for &t in gens {
            let y = tuple_mul(g, r, x, t);
            if !seen[y as usize] {
                seen[y as usize] = true;
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Whether a sorted element list is a subgroup of `G^r`, by greedily building a
/// generating set from its elements and comparing the generated group.
pub fn is_subgroup(g: &FiniteGroup, r: usize, elements: &[u32]) -> bool {
    let total = g.order().pow(r as u32);
    if elements.iter().any(|&x| x as usize >= total) || elements.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    let mut gens = Vec::new();
    let mut current = vec![identity_tuple(g, r)];
    for &x in elements {
        if current.binary_search(&x).is_err() {
            gens.push(x);
            current = plain_closure(g, r, &gens);
            if current.len() > elements.len() {
                return false;
            }
        }
    }
    current == elements
}

/// Whether `(c,...,c) H (c,...,c)^{-1} = H` for every `c` in `G`.
pub fn is_delta_normalized(g: &FiniteGroup, r: usize, elements: &[u32]) -> bool {
    g.generators.iter().all(|&c| {
        elements
            .iter()
            .all(|&x| elements.binary_search(&tuple_conj(g, r, c, x)).is_ok())
    })
}

/// `prod_i Delta^{T_i}(G)` for disjoint 1-based blocks; coordinates outside every
/// block are trivial.
pub fn product_of_diagonals(g: &FiniteGroup, r: usize, blocks: &[Vec<usize>]) -> Result<Vec<u32>> {
    check_size(g, r)?;
    let mut used = vec![false; r];
    for b in blocks {
        ensure!(!b.is_empty(), InvalidInput, "empty block");
        for &i in b {
            ensure!(
                (1..=r).contains(&i) && !used[i - 1],
                InvalidInput,
                "blocks must be disjoint subsets of 1..{r}"
            );
            used[i - 1] = true;
        }
    }
    let n = g.order();
    let mut out = Vec::with_capacity(n.pow(blocks.len() as u32));
    let mut choice = vec![0usize; blocks.len()];
    loop {
        let mut t = [g.identity(); 3];
        for (b, &c) in blocks.iter().zip(&choice) {
            for &i in b {
                t[i - 1] = c;
            }
        }
        out.push(encode(n, r, &t));
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < n {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// The certificate for `H` if it is a product of untwisted diagonals. The blocks are
/// read off from `H` (trivial coordinates dropped, coordinates grouped when they always
/// agree), so a certificate is unique when it exists.
pub fn is_product_of_diagonals(g: &FiniteGroup, r: usize, elements: &[u32]) -> Result<Option<Vec<Vec<usize>>>> {
    check_size(g, r)?;
    ensure!(
        is_subgroup(g, r, elements),
        InvalidInput,
        "input is not a subgroup of G^{r}"
    );
    let n = g.order();
    let tuples: Vec<[usize; 3]> = elements.iter().map(|&x| decode(n, r, x)).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..r {
        if tuples.iter().all(|t| t[i] == g.identity()) {
            continue;
        }
        match blocks.iter_mut().find(|b| tuples.iter().all(|t| t[i] == t[b[0] - 1])) {
            Some(b) => b.push(i + 1),
            None => blocks.push(vec![i + 1]),
        }
    }
    let candidate = product_of_diagonals(g, r, &blocks)?;
    Ok((candidate == elements).then_some(blocks))
}

fn describe(g: &FiniteGroup, r: usize, elements: Vec<u32>) -> Result<SubgroupDescriptor> {
    let certificate = is_product_of_diagonals(g, r, &elements)?;
    Ok(SubgroupDescriptor {
        r,
        order: elements.len(),
        elements,
        certificate,
    })
}

fn require_simple(g: &FiniteGroup) -> Result<()> {
    ensure!(!g.is_abelian(), Hypothesis, "{} is abelian", g.name);
    ensure!(g.is_simple(), Hypothesis, "{} is not simple", g.name);
    Ok(())
}

/// All subgroups of `G^r` normalized by the diagonal, sorted by order then elements.
///
/// `r = 2` goes through Goursat: projections and kernels of a diagonal-normalized
/// subgroup are normal in `G`, so for simple `G` the candidates are the four products
/// of `{e}` and `G` and the graphs of all automorphisms; each candidate is then tested
/// directly. `r = 1` and `r = 3` use [`delta_normalized_by_closure`].
pub fn delta_normalized_subgroups(g: &FiniteGroup, r: usize) -> Result<Vec<SubgroupDescriptor>> {
    check_size(g, r)?;
    require_simple(g)?;
    if r != 2 {
        return delta_normalized_by_closure(g, r);
    }
    let n = g.order();
    let normal = g.normal_subgroups();
    let mut candidates: Vec<Vec<u32>> = Vec::new();
    for a in &normal {
        for b in &normal {
            let mut prod: Vec<u32> = a
                .iter()
                .flat_map(|&x| b.iter().map(move |&y| encode(n, 2, &[x, y, 0])))
                .collect();
            prod.sort_unstable();
            candidates.push(prod);
        }
    }
    // quotients G/{e} on both sides: graphs of automorphisms
    for auto in g.automorphisms()? {
        let mut graph: Vec<u32> = (0..n).map(|x| encode(n, 2, &[x, auto[x], 0])).collect();
        graph.sort_unstable();
        candidates.push(graph);
    }
    let kept: Vec<Vec<u32>> = candidates
        .into_par_iter()
        .filter(|h| is_delta_normalized(g, 2, h))
        .collect();
    let mut out = kept
        .into_iter()
        .map(|h| describe(g, 2, h))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| (a.order, &a.elements).cmp(&(b.order, &b.elements)));
    out.dedup();
    Ok(out)
}

/// Enumeration without Goursat: every diagonal-normalized subgroup is the join of the
/// diagonal-normal closures of its elements, so compute those closures up to symmetry
/// and close the family under joins.
pub fn delta_normalized_by_closure(g: &FiniteGroup, r: usize) -> Result<Vec<SubgroupDescriptor>> {
    check_size(g, r)?;
    let n = g.order();
    let total = n.pow(r as u32);
    // Diagonal automorphisms and coordinate swaps carry diagonal-normalized subgroups
    // to diagonal-normalized subgroups, so closures are only computed for one element
    // per orbit of the group they generate together with diagonal conjugation.
    let autos = g.automorphisms()?;
    let mut outer: Vec<Vec<usize>> = Vec::new();
    for a in autos.iter().filter(|a| !g.is_inner(a)) {
        let covered = outer.iter().any(|o| {
            let inv = invert_table(o);
            g.is_inner(&a.iter().map(|&x| inv[x]).collect::<Vec<_>>())
        });
        if !covered {
            outer.push(a.clone());
        }
    }
    let mut moves: Vec<Symmetry> = outer.into_iter().map(Symmetry::Auto).collect();
    moves.extend((0..r.saturating_sub(1)).map(Symmetry::Swap));
    let apply = |m: &Symmetry, x: u32| -> u32 {
        let mut t = decode(n, r, x);
        match m {
            Symmetry::Auto(a) => t.iter_mut().take(r).for_each(|c| *c = a[*c]),
            Symmetry::Swap(i) => t.swap(*i, *i + 1),
        }
        encode(n, r, &t)
    };
    let mut seen = vec![false; total];
    let mut reps = Vec::new();
    for x in 0..total as u32 {
        if seen[x as usize] {
            continue;
        }
        reps.push(x);
        let mut stack = vec![x];
        seen[x as usize] = true;
        while let Some(y) = stack.pop() {
            let next = g
                .generators
                .iter()
                .map(|&c| tuple_conj(g, r, c, y))
                .chain(moves.iter().map(|m| apply(m, y)))
                .collect::<Vec<_>>();
            for z in next {
                if !seen[z as usize] {
                    seen[z as usize] = true;
                    stack.push(z);
                }
            }
        }
    }
    let mut closures: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut queue: VecDeque<(Vec<u32>, u32)> = reps
        .par_iter()
        .map(|&x| (delta_closure(g, r, &[x]), x))
        .collect::<Vec<_>>()
        .into();
    while let Some((k, x)) = queue.pop_front() {
        if closures.contains_key(&k) {
            continue;
        }
        for m in &moves {
            let mut image: Vec<u32> = k.iter().map(|&y| apply(m, y)).collect();
            image.sort_unstable();
            queue.push_back((image, apply(m, x)));
        }
        closures.insert(k, x);
    }
    // subgroup -> a few elements generating it as a diagonal-normalized subgroup
    let mut family: BTreeMap<Vec<u32>, Vec<u32>> = closures.iter().map(|(k, &x)| (k.clone(), vec![x])).collect();
    loop {
        let list: Vec<(Vec<u32>, Vec<u32>)> = family.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let joins: Vec<(Vec<u32>, Vec<u32>)> = list
            .par_iter()
            .flat_map_iter(|(a, gens_a)| {
                closures.iter().filter_map(move |(b, &x)| {
                    if b.iter().all(|y| a.binary_search(y).is_ok()) {
                        return None;
                    }
                    let mut gens = gens_a.clone();
                    gens.push(x);
                    Some((delta_closure(g, r, &gens), gens))
                })
            })
            .collect();
        let before = family.len();
        for (k, v) in joins {
            family.entry(k).or_insert(v);
        }
        if family.len() == before {
            break;
        }
    }
    let mut out = family
        .into_keys()
        .map(|h| describe(g, r, h))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| (a.order, &a.elements).cmp(&(b.order, &b.elements)));
    Ok(out)
}

enum Symmetry {
    Auto(Vec<usize>),
    Swap(usize),
}

fn invert_table(a: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// `{(x, phi(x))}` for an automorphism `phi` given as an image table.
pub fn twisted_diagonal(g: &FiniteGroup, auto: &[usize]) -> Result<Vec<u32>> {
    ensure!(
        auto.len() == g.order(),
        InvalidInput,
        "automorphism table has wrong length"
    );
    let n = g.order();
    let mut out: Vec<u32> = (0..n).map(|x| encode(n, 2, &[x, auto[x], 0])).collect();
    out.sort_unstable();
    Ok(out)
}

/// Conjugation by a permutation of the underlying set, restricted to a permutation
/// group it normalizes.
pub fn conjugation_by_permutation(g: &FiniteGroup, tau: &[u8]) -> Result<Vec<usize>> {
    let inv = {
        let mut v = vec![0u8; tau.len()];
        for (i, &t) in tau.iter().enumerate() {
            v[t as usize] = i as u8;
        }
        v
    };
    (0..g.order())
        .map(|x| {
            let p = g
                .permutation(x)
                .ok_or_else(|| Error::InvalidInput(format!("{} has no permutation model", g.name)))?;
            let q = compose(&compose(tau, p), &inv);
            g.index_of_permutation(&q)
                .ok_or_else(|| Error::InvalidInput("permutation does not normalize the group".into()))
        })
        .collect()
}

/// Number of families of pairwise disjoint nonempty subsets of an `r`-set, the
/// empty family included: `sum_j C(r,j) Bell(j)`.
pub fn expected_count(r: usize) -> u64 {
    // Bell triangle
    let mut bell = vec![1u64];
    let mut row = vec![1u64];
    for _ in 0..r {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        bell.push(next[0]);
        row = next;
    }
    let mut binom = 1u64;
    let mut total = 0;
    for (j, b) in bell.iter().enumerate().take(r + 1) {
        total += binom * b;
        binom = binom * (r - j) as u64 / (j as u64 + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_groups() {
        let a5 = FiniteGroup::a5();
        assert_eq!(a5.order(), 60);
        assert!(a5.is_simple() && !a5.is_abelian());
        let psl = FiniteGroup::psl2_7();
        assert_eq!(psl.order(), 168);
        assert!(psl.is_simple());
        assert!(psl.spot_check_associative(5000, 7));
    }

    #[test]
    fn automorphism_counts() {
        // Aut(A5) = S5, Aut(PSL(2,7)) = PGL(2,7)
        let a5 = FiniteGroup::a5();
        let autos = a5.automorphisms().unwrap();
        assert_eq!(autos.len(), 120);
        assert_eq!(autos.iter().filter(|a| a5.is_inner(a)).count(), 60);
        assert_eq!(FiniteGroup::psl2_7().automorphisms().unwrap().len(), 336);
    }

    #[test]
    fn expected_counts() {
        let got: Vec<u64> = (0..=6).map(expected_count).collect();
        assert_eq!(got, vec![1, 2, 5, 15, 52, 203, 877]);
    }

    #[test]
    fn r1_gives_trivial_and_whole_group() {
        let a5 = FiniteGroup::a5();
        let subs = delta_normalized_subgroups(&a5, 1).unwrap();
        assert_eq!(subs.iter().map(|s| s.order).collect::<Vec<_>>(), vec![1, 60]);
        assert_eq!(subs[0].certificate, Some(vec![]));
        assert_eq!(subs[1].certificate, Some(vec![vec![1]]));
    }

    #[test]
    fn a5_pairs_are_products_of_diagonals() {
        let a5 = FiniteGroup::a5();
        let subs = delta_normalized_subgroups(&a5, 2).unwrap();
        assert_eq!(subs.len() as u64, expected_count(2));
        assert!(subs.iter().all(|s| s.certificate.is_some()));
        let certs: BTreeSet<_> = subs.iter().map(|s| s.certificate.clone().unwrap()).collect();
        let expect: BTreeSet<Vec<Vec<usize>>> = [
            vec![],
            vec![vec![1]],
            vec![vec![2]],
            vec![vec![1], vec![2]],
            vec![vec![1, 2]],
        ]
        .into();
        assert_eq!(certs, expect);
        let by_closure = delta_normalized_by_closure(&a5, 2).unwrap();
        assert_eq!(by_closure, subs);
    }

    #[test]
    fn simple_examples_certify() {
        let a5 = FiniteGroup::a5();
        let diag = product_of_diagonals(&a5, 2, &[vec![1, 2]]).unwrap();
        assert_eq!(is_product_of_diagonals(&a5, 2, &diag).unwrap(), Some(vec![vec![1, 2]]));
        let left = product_of_diagonals(&a5, 2, &[vec![1]]).unwrap();
        assert_eq!(is_product_of_diagonals(&a5, 2, &left).unwrap(), Some(vec![vec![1]]));
    }

    #[test]
    fn transposition_twist_is_rejected() {
        let a5 = FiniteGroup::a5();
        let tau = cycles_to_perm(5, &[&[0, 1]]);
        let auto = conjugation_by_permutation(&a5, &tau).unwrap();
        assert!(!a5.is_inner(&auto));
        let h = twisted_diagonal(&a5, &auto).unwrap();
        assert!(is_subgroup(&a5, 2, &h));
        assert!(!is_delta_normalized(&a5, 2, &h));
        assert_eq!(is_product_of_diagonals(&a5, 2, &h).unwrap(), None);
    }

    #[test]
    fn non_subgroup_is_an_error() {
        let a5 = FiniteGroup::a5();
        let bad = vec![identity_tuple(&a5, 2), 5, 17];
        assert!(is_product_of_diagonals(&a5, 2, &bad).is_err());
    }

    #[test]
    fn size_and_hypothesis_errors() {
        let psl = FiniteGroup::psl2_7();
        assert!(matches!(
            delta_normalized_subgroups(&psl, 3),
            Err(Error::BoundExceeded(_))
        ));
        assert!(delta_normalized_subgroups(&psl, 4).is_err());
        let c3 = FiniteGroup::from_permutations("C3", &[cycles_to_perm(3, &[&[0, 1, 2]])]).unwrap();
        assert!(matches!(delta_normalized_subgroups(&c3, 2), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn table_text_round_trip() {
        let a5 = FiniteGroup::a5();
        let back = FiniteGroup::from_table_text("A5", &a5.to_table_text()).unwrap();
        assert_eq!(back.order(), 60);
        assert_eq!(back.table, a5.table);
        let mut text = a5.to_table_text();
        text = text.replacen("\n0 1 ", "\n1 1 ", 1);
        assert!(FiniteGroup::from_table_text("bad", &text).is_err());
    }
}
