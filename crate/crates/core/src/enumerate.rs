//! Short-vector enumeration for positive definite integral quadratic forms.
//!
//! Forms are given by an integer Gram matrix `G`; the value of `x` is
//! `x^T G x`. Bases are LLL-reduced first (floating Gram-Schmidt, exact integer
//! updates), then enumerated with Fincke-Pohst. Every candidate is re-evaluated
//! exactly before it is reported.

type Mat = Vec<Vec<i64>>;

fn value(g: &[Vec<i64>], x: &[i64]) -> i128 {
    let n = x.len();
    let mut s = 0i128;
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        let mut row = 0i128;
        for j in 0..n {
            row += g[i][j] as i128 * x[j] as i128;
        }
        s += x[i] as i128 * row;
    }
    s
}

pub fn form_value(g: &[Vec<i64>], x: &[i64]) -> i128 {
    value(g, x)
}

pub fn bilinear(g: &[Vec<i64>], x: &[i64], y: &[i64]) -> i128 {
    let n = x.len();
    let mut s = 0i128;
    for i in 0..n {
        for j in 0..n {
            s += x[i] as i128 * g[i][j] as i128 * y[j] as i128;
        }
    }
    s
}

fn gram_schmidt(g: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j] as f64;
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * bstar[k];
            }
            mu[i][j] = s / bstar[j];
        }
        let mut s = g[i][i] as f64;
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * bstar[k];
        }
        bstar[i] = s;
    }
    (mu, bstar)
}

/// LLL-reduce the Gram matrix. Returns `(G', T)` with `G' = T G T^T`; the rows
/// of `T` are the reduced basis vectors in the original coordinates.
pub fn lll_gram(g: &[Vec<i64>]) -> (Mat, Mat) {
    let n = g.len();
    let mut g: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut t: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect();
    let to64 = |m: &Vec<Vec<i128>>| -> Mat {
        m.iter()
            .map(|r| {
                r.iter()
                    .map(|&x| i64::try_from(x).expect("LLL entry overflow"))
                    .collect()
            })
            .collect()
    };
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "LLL failed to converge");
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&to64(&g));
            let q = mu[k][j].round() as i128;
            if q == 0 {
                continue;
            }
            // b_k <- b_k - q b_j
            for c in 0..n {
                t[k][c] -= q * t[j][c];
            }
            let gkj = g[k][j];
            let gjj = g[j][j];
            let gkk = g[k][k];
            for i in 0..n {
                if i != k {
                    let v = g[k][i] - q * g[j][i];
                    g[k][i] = v;
                    g[i][k] = v;
                }
            }
            g[k][k] = gkk - 2 * q * gkj + q * q * gjj;
        }
        let (mu, bstar) = gram_schmidt(&to64(&g));
        if bstar[k] < (0.75 - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            t.swap(k, k - 1);
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    (to64(&g), to64(&t))
}

fn cholesky_form(g: &[Vec<i64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut q: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    q
}

enum Target {
    AtMost(i128),
    Exactly(i128),
}

struct Enumerator<'a> {
    q: Vec<Vec<f64>>,
    g: &'a [Vec<i64>],
    target: Target,
    x: Vec<i64>,
    out: Vec<(Vec<i64>, i128)>,
}

impl Enumerator<'_> {
    fn bound(&self) -> f64 {
        match self.target {
            Target::AtMost(b) | Target::Exactly(b) => b as f64,
        }
    }

    fn recurse(&mut self, i: usize, used: f64) {
        let n = self.x.len();
        let center: f64 = -(i + 1..n).map(|j| self.q[i][j] * self.x[j] as f64).sum::<f64>();
        let rem = self.bound() - used;
        let slack = 1e-7 * (1.0 + self.bound().abs());
        if rem < -slack {
            return;
        }
        let r = ((rem.max(0.0) + slack) / self.q[i][i]).sqrt();
        if i == 0 {
            if let Target::Exactly(v) = self.target {
                self.solve_last(v);
                return;
            }
        }
        let lo = (center - r).ceil() as i64;
        let hi = (center + r).floor() as i64;
        for xi in lo..=hi {
            self.x[i] = xi;
            let d = xi as f64 - center;
            let u = used + self.q[i][i] * d * d;
            if i == 0 {
                let val = value(self.g, &self.x);
                if val != 0 {
                    if let Target::AtMost(b) = self.target {
                        if val <= b {
                            self.out.push((self.x.clone(), val));
                        }
                    }
                }
            } else {
                self.recurse(i - 1, u);
            }
        }
        self.x[i] = 0;
    }

    /// Solve `G00 x0^2 + 2 x0 L + C = v` exactly for integer `x0`.
    fn solve_last(&mut self, v: i128) {
        let n = self.x.len();
        let g00 = self.g[0][0] as i128;
        let lin: i128 = (1..n).map(|j| self.g[0][j] as i128 * self.x[j] as i128).sum();
        self.x[0] = 0;
        let c = value(self.g, &self.x) - v;
        // x0 = (-lin +- sqrt(lin^2 - g00 c)) / g00
        let disc = lin * lin - g00 * c;
        if disc < 0 {
            return;
        }
        let s = isqrt(disc);
        if s * s != disc {
            return;
        }
        let mut roots = vec![-lin + s];
        if s != 0 {
            roots.push(-lin - s);
        }
        for num in roots {
            if num % g00 == 0 {
                self.x[0] = (num / g00) as i64;
                if self.x.iter().any(|&c| c != 0) {
                    let val = value(self.g, &self.x);
                    debug_assert_eq!(val, v);
                    self.out.push((self.x.clone(), val));
                }
            }
        }
        self.x[0] = 0;
    }
}

pub fn isqrt(n: i128) -> i128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn run(g: &[Vec<i64>], target: Target) -> Vec<(Vec<i64>, i128)> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    let (gr, t) = lll_gram(g);
    let mut e = Enumerator {
        q: cholesky_form(&gr),
        g: &gr,
        target,
        x: vec![0; n],
        out: Vec::new(),
    };
    e.recurse(n - 1, 0.0);
    let mut out: Vec<(Vec<i64>, i128)> = e
        .out
        .into_iter()
        .map(|(y, v)| {
            let x = (0..n).map(|c| (0..n).map(|r| y[r] * t[r][c]).sum()).collect();
            (x, v)
        })
        .collect();
    out.sort();
    out
}

/// All nonzero `x` with `x^T G x <= bound`, both signs, sorted.
pub fn short_vectors(g: &[Vec<i64>], bound: i64) -> Vec<(Vec<i64>, i64)> {
    run(g, Target::AtMost(bound as i128))
        .into_iter()
        .map(|(x, v)| (x, v as i64))
        .collect()
}

/// All `x` with `x^T G x == target`, both signs, sorted.
pub fn vectors_of_value(g: &[Vec<i64>], target: i64) -> Vec<Vec<i64>> {
    run(g, Target::Exactly(target as i128))
        .into_iter()
        .map(|(x, _)| x)
        .collect()
}

/// `counts[v]` = number of `x` (including zero for `v = 0`) with `x^T G x = v`.
pub fn theta_counts(g: &[Vec<i64>], bound: i64) -> Vec<u64> {
    let mut counts = vec![0u64; bound as usize + 1];
    counts[0] = 1;
    for (_, v) in short_vectors(g, bound) {
        counts[v as usize] += 1;
    }
    counts
}

/// An isometry between two forms: integer matrix `U`, `det U = +-1`, with
/// `U G1 U^T = G2`... returned as the images of the basis of form 2 in form 1.
pub fn find_isometry(g1: &[Vec<i64>], g2: &[Vec<i64>]) -> Option<Mat> {
    let n = g1.len();
    if g2.len() != n {
        return None;
    }
    let (r2, t2) = lll_gram(g2);
    let cands: Vec<Vec<Vec<i64>>> = (0..n).map(|i| vectors_of_value(g1, r2[i][i])).collect();
    let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(n);
    if !backtrack_isometry(g1, &r2, &cands, &mut chosen) {
        return None;
    }
    // images of the reduced basis of g2; pull back to g2's original basis
    let tinv = unimodular_inverse(&t2)?;
    let u: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|c| (0..n).map(|k| tinv[i][k] * chosen[k][c]).sum())
                .collect()
        })
        .collect();
    Some(u)
}

fn backtrack_isometry(g1: &[Vec<i64>], r2: &[Vec<i64>], cands: &[Vec<Vec<i64>>], chosen: &mut Vec<Vec<i64>>) -> bool {
    let k = chosen.len();
    let n = r2.len();
    if k == n {
        return integer_det(chosen).abs() == 1;
    }
    for v in &cands[k] {
        if (0..k).all(|j| bilinear(g1, v, &chosen[j]) == r2[k][j] as i128) {
            chosen.push(v.clone());
            if backtrack_isometry(g1, r2, cands, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

pub fn integer_det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0] as i128,
        _ => (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                    .collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                s * m[0][c] as i128 * integer_det(&minor)
            })
            .sum(),
    }
}

fn unimodular_inverse(t: &[Vec<i64>]) -> Option<Mat> {
    let n = t.len();
    let det = integer_det(t);
    if det.abs() != 1 {
        return None;
    }
    // adjugate / det
    let mut inv = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = t
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != j)
                .map(|(_, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != i)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            inv[i][j] = (s * integer_det(&minor) * det) as i64;
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_short(g: &[Vec<i64>], bound: i64, box_r: i64) -> Vec<(Vec<i64>, i64)> {
        let n = g.len();
        let mut out = Vec::new();
        let mut x = vec![-box_r; n];
        loop {
            let v = value(g, &x);
            if v != 0 && v <= bound as i128 {
                out.push((x.clone(), v as i64));
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                x[i] += 1;
                if x[i] > box_r {
                    x[i] = -box_r;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn d4_root_count() {
        // Hurwitz order, Gram of trd(x conj y): 24 units of value 2
        let g = vec![vec![2, 0, 0, 1], vec![0, 2, 0, 1], vec![0, 0, 2, 1], vec![1, 1, 1, 2]];
        assert_eq!(short_vectors(&g, 2).len(), 24);
        assert_eq!(vectors_of_value(&g, 2).len(), 24);
        assert_eq!(theta_counts(&g, 4), vec![1, 0, 24, 0, 24]);
    }

    #[test]
    fn isometry_of_permuted_form() {
        let g1 = vec![vec![2, 1, 0], vec![1, 4, 1], vec![0, 1, 6]];
        let u = [vec![0, 1, 0], vec![1, 1, 0], vec![0, -1, 1]];
        let g2: Mat = (0..3)
            .map(|i| (0..3).map(|j| bilinear(&g1, &u[i], &u[j]) as i64).collect())
            .collect();
        let w = find_isometry(&g1, &g2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(bilinear(&g1, &w[i], &w[j]), g2[i][j] as i128);
            }
        }
        let g3 = vec![vec![2, 0, 0], vec![0, 4, 0], vec![0, 0, 6]];
        assert!(find_isometry(&g1, &g3).is_none());
    }

    fn random_pd() -> impl Strategy<Value = Mat> {
        prop::collection::vec(-3i64..=3, 9).prop_map(|a| {
            // G = A A^T + I, symmetric positive definite
            let m: Vec<Vec<i64>> = (0..3).map(|i| a[3 * i..3 * i + 3].to_vec()).collect();
            (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| (0..3).map(|k| m[i][k] * m[j][k]).sum::<i64>() + i64::from(i == j))
                        .collect()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn fincke_pohst_matches_box_search(g in random_pd(), bound in 1i64..12) {
            // every value-<=12 vector of A A^T + I has |x_i| <= 12
            let fast = short_vectors(&g, bound);
            let slow = brute_short(&g, bound, 12);
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn exact_value_matches_filter(g in random_pd(), target in 1i64..12) {
            let fast = vectors_of_value(&g, target);
            let slow: Vec<Vec<i64>> = brute_short(&g, target, 12)
                .into_iter().filter(|(_, v)| *v == target).map(|(x, _)| x).collect();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn lll_preserves_the_form(g in random_pd()) {
            let (gr, t) = lll_gram(&g);
            prop_assert_eq!(integer_det(&t).abs(), 1);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(bilinear(&g, &t[i], &t[j]), gr[i][j] as i128);
                }
            }
        }
    }
}
