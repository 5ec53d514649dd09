use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// Smith normal form `U · A · V = S` together with `U⁻¹`, which the
/// subquotient machinery needs to name generators.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub s: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
    pub(crate) u_inv: IntMatrix,
}

impl SnfDecomposition {
    /// The nonzero diagonal entries `d_1 | d_2 | … | d_rank`.
    pub fn divisors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s.at(i, i).clone()).collect()
    }

    pub fn u_inverse(&self) -> &IntMatrix {
        &self.u_inv
    }
}

/// Smith normal form with the pivot rule "smallest nonzero absolute value,
/// ties broken by (row, col)".
pub fn smith_normal_form(a: &IntMatrix) -> SnfDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut s = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut u_inv = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut rank = 0;

    for t in 0..m.min(n) {
        loop {
            let Some((pr, pc)) = find_pivot(&s, t) else {
                return SnfDecomposition { s, u, v, rank, u_inv };
            };
            swap_rows(&mut s, &mut u, &mut u_inv, t, pr);
            swap_cols(&mut s, &mut v, t, pc);

            let mut clean = true;
            for i in t + 1..m {
                if s.at(i, t).is_zero() {
                    continue;
                }
                let q = -(s.at(i, t) / s.at(t, t));
                add_row(&mut s, &mut u, &mut u_inv, i, t, &q);
                if !s.at(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if s.at(t, j).is_zero() {
                    continue;
                }
                let q = -(s.at(t, j) / s.at(t, t));
                add_col(&mut s, &mut v, j, t, &q);
                if !s.at(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let p = s.at(t, t).clone();
            let bad_row = (t + 1..m).find(|&i| (t + 1..n).any(|j| !s.at(i, j).is_multiple_of(&p)));
            match bad_row {
                Some(i) => add_row(&mut s, &mut u, &mut u_inv, t, i, &BigInt::from(1)),
                None => break,
            }
        }
        if s.at(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        rank += 1;
    }
    SnfDecomposition { s, u, v, rank, u_inv }
}

fn find_pivot(s: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..s.rows() {
        for j in t..s.cols() {
            let x = s.at(i, j);
            if x.is_zero() {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, bj)) => x.magnitude() < s.at(bi, bj).magnitude(),
            };
            if better {
                best = Some((i, j));
            }
        }
    }
    best
}

fn swap_rows(s: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, a: usize, b: usize) {
    s.swap_rows(a, b);
    u.swap_rows(a, b);
    u_inv.swap_cols(a, b);
}

fn swap_cols(s: &mut IntMatrix, v: &mut IntMatrix, a: usize, b: usize) {
    s.swap_cols(a, b);
    v.swap_cols(a, b);
}

/// row[dst] += k row[src], mirrored on U and (inversely) on U⁻¹.
fn add_row(s: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    s.add_row_multiple(dst, src, k);
    u.add_row_multiple(dst, src, k);
    u_inv.add_col_multiple(src, dst, &-k);
}

fn add_col(s: &mut IntMatrix, v: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    s.add_col_multiple(dst, src, k);
    v.add_col_multiple(dst, src, k);
}
