//! Dense oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spectra_core::chain::{ChainComplex, Combination, Gen};
use spectra_core::exactlinalg::{smith_normal_form, IntMatrix};
use spectra_core::poset::{DownSet, Point, TermTuple};
use spectra_core::spectra::{FiltrationAssignment, GenFilteredComplex};

pub fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant by cofactor expansion along the first row.
pub fn det(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return a[0][0].clone();
    }
    let mut acc = BigInt::zero();
    for j in 0..n {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> =
            a[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = &a[0][j] * det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

/// Invariant factors `d_k = D_k / D_{k−1}`, where `D_k` is the gcd of the
/// `k × k` minors; stops at the rank.
pub fn divisors_from_minors(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut out = Vec::new();
    let mut prev = BigInt::one();
    for k in 1..=rows.min(cols) {
        let mut g = BigInt::zero();
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let m: Vec<Vec<BigInt>> = rs.iter().map(|&r| cs.iter().map(|&c| a[r][c].clone()).collect()).collect();
                g = g.gcd(&det(&m));
            }
        }
        if g.is_zero() {
            break;
        }
        out.push(&g / &prev);
        prev = g;
    }
    out
}

/// Checks `U·A·V = S`, the divisor chain, unimodularity and the
/// gcd-of-minors divisors.
pub fn check_snf(a: &[Vec<BigInt>]) -> Result<(), String> {
    let m = to_matrix(a);
    let snf = smith_normal_form(&m);
    let prod = snf.u.mul(&m).unwrap().mul(&snf.v).unwrap();
    if prod != snf.s {
        return Err("U·A·V ≠ S".into());
    }
    let s = dense(&snf.s);
    for (r, row) in s.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            if r != c && !x.is_zero() {
                return Err(format!("off-diagonal entry at ({r},{c})"));
            }
        }
    }
    let divs = snf.divisors();
    if divs.iter().any(|d| !d.is_positive()) || divs.windows(2).any(|w| !(&w[1] % &w[0]).is_zero()) {
        return Err(format!("not a divisor chain: {divs:?}"));
    }
    if det(&dense(&snf.u)).abs() != BigInt::one() || det(&dense(&snf.v)).abs() != BigInt::one() {
        return Err("U or V is not unimodular".into());
    }
    let oracle = divisors_from_minors(a);
    if divs != oracle {
        return Err(format!("divisors {divs:?} ≠ gcd-of-minors {oracle:?}"));
    }
    Ok(())
}

pub fn random_matrix(r: &mut ChaCha8Rng, max_dim: usize, bound: i64) -> Vec<Vec<BigInt>> {
    let rows = r.gen_range(1..=max_dim);
    let cols = r.gen_range(1..=max_dim);
    (0..rows).map(|_| (0..cols).map(|_| BigInt::from(r.gen_range(-bound..=bound))).collect()).collect()
}

pub fn to_matrix(a: &[Vec<BigInt>]) -> IntMatrix {
    IntMatrix::from_rows(a).expect("rectangular")
}

pub fn dense(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows()).map(|r| m.row(r)).collect()
}

/// Integer kernel of a `rows × cols` matrix given by its columns.
pub fn kernel_of_columns(rows: usize, cols: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let k = cols.len();
    if k == 0 {
        return Vec::new();
    }
    if rows == 0 {
        return (0..k).map(|j| unit(k, j)).collect();
    }
    let a = IntMatrix::from_columns(rows, cols).expect("consistent columns");
    let snf = smith_normal_form(&a);
    (snf.rank..k).map(|j| snf.v.column(j)).collect()
}

pub fn unit(n: usize, j: usize) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); n];
    e[j] = BigInt::one();
    e
}

/// Divisors of `span(num) / (span(num) ∩ span(den))` inside `Z^n`:
/// `Z^t / {a : N a ∈ span(D)}` with `t = |num|`.
pub fn quotient_divisors(num: &[Vec<BigInt>], den: &[Vec<BigInt>], n: usize) -> Vec<BigInt> {
    let t = num.len();
    if t == 0 {
        return Vec::new();
    }
    let mut cols: Vec<Vec<BigInt>> = num.to_vec();
    cols.extend(den.iter().map(|v| v.iter().map(|x| -x).collect()));
    let rel: Vec<Vec<BigInt>> = kernel_of_columns(n, &cols).into_iter().map(|v| v[..t].to_vec()).collect();
    group_from_relations(t, &rel)
}

/// Divisors of `Z^t / span(rel)`, torsion first and then one `0` per free summand.
pub fn group_from_relations(t: usize, rel: &[Vec<BigInt>]) -> Vec<BigInt> {
    if rel.is_empty() {
        return vec![BigInt::zero(); t];
    }
    let snf = smith_normal_form(&IntMatrix::from_columns(t, rel).expect("consistent relations"));
    let mut out: Vec<BigInt> = snf.divisors().into_iter().map(|d| d.abs()).filter(|d| !d.is_one()).collect();
    out.extend(std::iter::repeat(BigInt::zero()).take(t - snf.rank));
    out
}

/// A finite filtered complex with dense differentials: `d[n]` has one
/// column per generator of degree `n`, indexed by generators of degree `n−1`.
#[derive(Clone, Debug)]
pub struct DenseFiltered {
    pub degs: Vec<Vec<Point>>,
    pub d: Vec<Vec<Vec<i64>>>,
}

impl DenseFiltered {
    pub fn points(&self) -> Vec<Point> {
        self.degs.iter().flatten().cloned().collect()
    }

    pub fn top(&self) -> usize {
        self.degs.len() - 1
    }

    pub fn size(&self, n: i32) -> usize {
        if n < 0 || n as usize > self.top() {
            0
        } else {
            self.degs[n as usize].len()
        }
    }

    pub fn gen(&self, n: usize, i: usize) -> Gen {
        Gen::cell(n as u32, i as u64)
    }

    /// Column `j` of `d` in degree `n`.
    pub fn column(&self, n: i32, j: usize) -> Vec<i64> {
        if n <= 0 || n as usize > self.top() {
            vec![0; self.size(n - 1)]
        } else {
            self.d[n as usize][j].clone()
        }
    }

    pub fn filtered(&self, m: usize, display_bound: i64) -> GenFilteredComplex {
        let mut bases = Vec::new();
        let mut table = HashMap::new();
        let mut points = HashMap::new();
        for n in 0..=self.top() {
            let gens: Vec<Gen> = (0..self.size(n as i32)).map(|i| self.gen(n, i)).collect();
            for (i, g) in gens.iter().enumerate() {
                points.insert(g.clone(), self.degs[n][i].clone());
                if n > 0 {
                    let terms: Vec<(Gen, i64)> = self
                        .column(n as i32, i)
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| **c != 0)
                        .map(|(r, c)| (self.gen(n - 1, r), *c))
                        .collect();
                    table.insert(g.clone(), Combination::from_terms(n as i32 - 1, terms).expect("combination"));
                }
            }
            bases.push(gens);
        }
        let complex = ChainComplex::from_table("random", bases, table);
        let points = Arc::new(points);
        let filt = FiltrationAssignment::new(m, Arc::new(move |g: &Gen| points[g].clone()));
        GenFilteredComplex::new(complex, filt, display_bound)
    }

    /// `S[z,s,p,b]_n` computed densely from the definition.
    pub fn term_oracle(&self, t: &TermTuple, n: i32) -> Vec<BigInt> {
        let size = self.size(n);
        if size == 0 {
            return Vec::new();
        }
        let here = |set: &DownSet, i: usize| set.contains(&self.degs[n as usize][i]);
        let in_p: Vec<usize> = (0..size).filter(|&i| here(&t.p, i)).collect();
        // x ∈ F_p with dx ∈ F_z: rows of d outside z must vanish.
        let lower = self.size(n - 1);
        let bad_rows: Vec<usize> = (0..lower).filter(|&r| !t.z.contains(&self.degs[n as usize - 1][r])).collect();
        let cols: Vec<Vec<BigInt>> = in_p
            .iter()
            .map(|&j| {
                let c = self.column(n, j);
                bad_rows.iter().map(|&r| BigInt::from(c[r])).collect()
            })
            .collect();
        let num: Vec<Vec<BigInt>> = kernel_of_columns(bad_rows.len(), &cols)
            .into_iter()
            .map(|k| {
                let mut v = vec![BigInt::zero(); size];
                for (a, &j) in k.iter().zip(&in_p) {
                    v[j] = a.clone();
                }
                v
            })
            .collect();
        let mut den: Vec<Vec<BigInt>> = (0..size).filter(|&i| here(&t.s, i)).map(|i| unit(size, i)).collect();
        for j in 0..self.size(n + 1) {
            // size(n + 1) > 0 only when degree n + 1 exists.
            if t.b.contains(&self.degs[n as usize + 1][j]) {
                den.push(big(&self.column(n + 1, j)));
            }
        }
        quotient_divisors(&num, &den, size)
    }
}

fn random_point_below(r: &mut ChaCha8Rng, p: &[i64]) -> Point {
    p.iter().map(|&x| r.gen_range(0..=x)).collect()
}

/// Random filtered complex over `D(Z^m)`: a sum of elementary complexes
/// `x ↦ k·y` and free cycles, with `deg y ≤ deg x`, conjugated by random
/// filtration-preserving elementary automorphisms.
pub fn random_filtered(r: &mut ChaCha8Rng, m: usize, top: usize, max_gens: usize, coord_bound: i64) -> DenseFiltered {
    let counts: Vec<usize> = (0..=top).map(|_| r.gen_range(1..=max_gens)).collect();
    let mut degs: Vec<Vec<Option<Point>>> = counts.iter().map(|&c| vec![None; c]).collect();
    let mut d: Vec<Vec<Vec<i64>>> = (0..=top)
        .map(|n| if n == 0 { Vec::new() } else { vec![vec![0; counts[n - 1]]; counts[n]] })
        .collect();
    let mut used: Vec<Vec<bool>> = counts.iter().map(|&c| vec![false; c]).collect();
    for n in 1..=top {
        for j in 0..counts[n] {
            if used[n][j] || !r.gen_bool(0.5) {
                continue;
            }
            let free: Vec<usize> = (0..counts[n - 1]).filter(|&i| !used[n - 1][i]).collect();
            if free.is_empty() {
                break;
            }
            let i = free[r.gen_range(0..free.len())];
            let px: Point = (0..m).map(|_| r.gen_range(0..=coord_bound)).collect();
            let py = random_point_below(r, &px);
            let k = [1, 2, -1, 3, -2][r.gen_range(0..5)];
            d[n][j][i] = k;
            degs[n][j] = Some(px);
            degs[n - 1][i] = Some(py);
            used[n][j] = true;
            used[n - 1][i] = true;
        }
    }
    let degs: Vec<Vec<Point>> = degs
        .into_iter()
        .map(|v| v.into_iter().map(|p| p.unwrap_or_else(|| (0..m).map(|_| r.gen_range(0..=coord_bound)).collect())).collect())
        .collect();
    let mut c = DenseFiltered { degs, d };
    for n in 0..=top {
        for _ in 0..4 {
            let size = counts[n];
            if size < 2 {
                break;
            }
            let i = r.gen_range(0..size);
            let j = r.gen_range(0..size);
            if i == j || !spectra_core::poset::point_leq(&c.degs[n][j], &c.degs[n][i]) {
                continue;
            }
            let a = r.gen_range(-2..=2i64);
            c.change_basis(n, i, j, a);
        }
    }
    c
}

impl DenseFiltered {
    /// Conjugates `d` by the automorphism `g_i ↦ g_i + a·g_j` of degree `n`.
    fn change_basis(&mut self, n: usize, i: usize, j: usize, a: i64) {
        // d_n ∘ φ⁻¹ … in coordinates: φ adds a·(row i) to row j of vectors.
        // Columns of d_{n+1} (vectors in degree n): x ↦ φx adds a·x_i to x_j.
        if n < self.top() {
            for col in self.d[n + 1].iter_mut() {
                col[j] += a * col[i];
            }
        }
        // d_n ∘ φ⁻¹: column i becomes d(g_i) − a·d(g_j).
        if n > 0 {
            let cj = self.d[n][j].clone();
            for (x, y) in self.d[n][i].iter_mut().zip(cj) {
                *x -= a * y;
            }
        }
    }

    pub fn d_squared_is_zero(&self) -> bool {
        for n in 2..=self.top() {
            for col in &self.d[n] {
                let mut acc = vec![0i64; self.size(n as i32 - 2)];
                for (k, &c) in col.iter().enumerate() {
                    for (r, x) in self.d[n - 1][k].iter().enumerate() {
                        acc[r] += c * x;
                    }
                }
                if acc.iter().any(|&x| x != 0) {
                    return false;
                }
            }
        }
        true
    }
}

/// A random chain `D_0 ⊆ D_1 ⊆ … ⊆ D_{len−1}` of downsets of `N^m`: sublevel
/// sets of a random positive linear height on the box `[0, coord_bound]^m`,
/// cut at heights of randomly chosen `anchors` so that the layers are
/// populated.
pub fn random_downset_chain(r: &mut ChaCha8Rng, m: usize, len: usize, coord_bound: i64, anchors: &[Point]) -> Vec<DownSet> {
    let w: Vec<i64> = (0..m).map(|_| r.gen_range(1..=3)).collect();
    let height = |x: &[i64]| x.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>();
    let mut levels: Vec<i64> = (0..3).map(|_| height(&anchors[r.gen_range(0..anchors.len())])).collect();
    levels.push(-1);
    levels.push(height(&vec![coord_bound; m]));
    let mut thresholds: Vec<i64> = (0..len).map(|_| levels[r.gen_range(0..levels.len())]).collect();
    thresholds.sort();
    thresholds
        .into_iter()
        .map(|th| {
            let pts: Vec<Point> = spectra_core::poset::grid(m, coord_bound).filter(|x| height(x) <= th).collect();
            DownSet::generated(pts).expect("same arity")
        })
        .collect()
}

/// Divisors of `ker M / im M'` for `A₃ →M' A₂ →M A₁`, each `A_i` given
/// by divisors and each map by its columns.
pub fn middle_homology(a2: &[BigInt], a1: &[BigInt], m_in: &[Vec<BigInt>], m_out: &[Vec<BigInt>]) -> Vec<BigInt> {
    let (k2, k1) = (a2.len(), a1.len());
    if k2 == 0 {
        return Vec::new();
    }
    let mut cols: Vec<Vec<BigInt>> = m_out.to_vec();
    cols.extend(relations(a1));
    let ker: Vec<Vec<BigInt>> = kernel_of_columns(k1, &cols).into_iter().map(|v| v[..k2].to_vec()).collect();
    let mut den: Vec<Vec<BigInt>> = m_in.to_vec();
    den.extend(relations(a2));
    quotient_divisors(&ker, &den, k2)
}

/// `A₁ / im M` for `M : A₂ → A₁`.
pub fn cokernel(a1: &[BigInt], m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let mut rel: Vec<Vec<BigInt>> = m.to_vec();
    rel.extend(relations(a1));
    group_from_relations(a1.len(), &rel)
}

/// `ker M` for `M : A₂ → A₁`.
pub fn kernel(a2: &[BigInt], a1: &[BigInt], m: &[Vec<BigInt>]) -> Vec<BigInt> {
    middle_homology(a2, a1, &[], m)
}

fn relations(a: &[BigInt]) -> Vec<Vec<BigInt>> {
    a.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| {
            let mut e = vec![BigInt::zero(); a.len()];
            e[i] = x.clone();
            e
        })
        .collect()
}

/// Whether every column of `M₁ · M₂` vanishes in `⊕ Z/a_i`.
pub fn composite_vanishes(a: &[BigInt], m1: &[Vec<BigInt>], m2: &[Vec<BigInt>]) -> bool {
    m2.iter().all(|col| {
        let mut acc = vec![BigInt::zero(); a.len()];
        for (k, c) in col.iter().enumerate() {
            for (r, x) in m1[k].iter().enumerate() {
                acc[r] += c * x;
            }
        }
        acc.iter().zip(a).all(|(x, d)| if d.is_zero() { x.is_zero() } else { x.is_multiple_of(d) })
    })
}

/// Columns of `d : C_n → C_{n−1}` in the basis order of `c`.
pub fn boundary_columns(c: &ChainComplex, n: i32) -> Vec<Vec<BigInt>> {
    let here = c.basis(n).expect("finite type");
    let below = c.basis(n - 1).expect("finite type");
    let pos: HashMap<Gen, usize> = below.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
    here.iter()
        .map(|g| {
            let mut v = vec![BigInt::zero(); below.len()];
            for (h, x) in c.differential(g).expect("differential").iter() {
                v[pos[h]] += BigInt::from(x);
            }
            v
        })
        .collect()
}

/// `H_n` from dense boundary matrices `d_n` (`rows` = size of `C_{n−1}`) and `d_{n+1}`.
pub fn dense_homology(size: usize, rows: usize, d_n: &[Vec<BigInt>], d_n1: &[Vec<BigInt>]) -> Vec<BigInt> {
    let cycles = if rows == 0 { (0..size).map(|j| unit(size, j)).collect() } else { kernel_of_columns(rows, d_n) };
    quotient_divisors(&cycles, d_n1, size)
}

/// `H_n(C; Z/k)` as `H_n` of the cone of `k : C → C`, with `k = 0` meaning `Z`.
pub fn cone_homology(c: &ChainComplex, n: i32, k: i64) -> Vec<BigInt> {
    let size = |j: i32| c.basis(j).expect("finite type").len();
    if k == 0 {
        return dense_homology(size(n), size(n - 1), &boundary_columns(c, n), &boundary_columns(c, n + 1));
    }
    // Cone_j = C_j ⊕ C_{j−1}; d(b, 0) = (db, 0), d(0, a) = (k·a, −da).
    let cone_cols = |j: i32| -> Vec<Vec<BigInt>> {
        let (top, low) = (size(j - 1), size(j - 2));
        let mut cols = Vec::new();
        for col in boundary_columns(c, j) {
            let mut v = col;
            v.extend(std::iter::repeat(BigInt::zero()).take(low));
            cols.push(v);
        }
        let lower = boundary_columns(c, j - 1);
        for a in 0..size(j - 1) {
            let mut v = vec![BigInt::zero(); top + low];
            v[a] = BigInt::from(k);
            for (r, x) in lower[a].iter().enumerate() {
                v[top + r] = -x;
            }
            cols.push(v);
        }
        cols
    };
    let cone_size = |j: i32| size(j) + size(j - 1);
    dense_homology(cone_size(n), cone_size(n - 1), &cone_cols(n), &cone_cols(n + 1))
}
