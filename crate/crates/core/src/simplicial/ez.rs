//! Eilenberg–Zilber reduction `C*(X × Y) ⇒ C*(X) ⊗ C*(Y)` and its twisted
//! version.

use std::sync::Arc;

use super::product::{cartesian_product, make_pair};
use super::{normalized_chain_complex, AbstractSimplex, SGroup, SSet, SimplicialSet, TwistingOperator};
use crate::chain::{tensor_complex, ChainComplex, ChainError, ChainResult, CombinationSum, Gen, Morphism};
use crate::homotopy::{bpl_with_budget, bpl_budget, Perturbation, Reduction};

fn pair_of(g: &Gen) -> ChainResult<(AbstractSimplex, AbstractSimplex)> {
    g.as_simplex()
        .and_then(|s| s.as_pair())
        .map(|(a, b)| (a.clone(), b.clone()))
        .ok_or_else(|| ChainError::Invalid(format!("{g:?} is not a product simplex")))
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn last_faces(x: &dyn SimplicialSet, s: &AbstractSimplex, times: usize) -> AbstractSimplex {
    let mut s = s.clone();
    for _ in 0..times {
        s = x.face(s.dim(), &s);
    }
    s
}

fn faces_at(x: &dyn SimplicialSet, s: &AbstractSimplex, i: usize, times: usize) -> AbstractSimplex {
    let mut s = s.clone();
    for _ in 0..times {
        s = x.face(i, &s);
    }
    s
}

/// All `(p, q)`-shuffles as `(α, β)` with both lists increasing.
fn shuffles(p: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let n = p + q;
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize != p {
            continue;
        }
        let alpha: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let beta: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        out.push((alpha, beta));
    }
    out
}

/// Parity of the shuffle: `Σ_j (α_j − j)` counts inversions.
fn shuffle_sign(alpha: &[usize]) -> usize {
    alpha.iter().enumerate().map(|(j, a)| a - j).sum()
}

fn push_pair(acc: &mut CombinationSum, coeff: i64, a: AbstractSimplex, b: AbstractSimplex) {
    let p = make_pair(a, b);
    if !p.is_degenerate() {
        acc.add_term(coeff, Gen::Simplex(p.geom));
    }
}

/// Alexander–Whitney, shuffle and Shih maps, cached per generator.
pub fn ez_reduction(x: SSet, y: SSet) -> Reduction {
    let prod: SSet = cartesian_product(x.clone(), y.clone());
    let top = normalized_chain_complex(prod);
    let bottom = tensor_complex(&normalized_chain_complex(x.clone()), &normalized_chain_complex(y.clone()));
    ez_maps(x, y, top, bottom).memoized()
}

fn ez_maps(x: SSet, y: SSet, top: ChainComplex, bottom: ChainComplex) -> Reduction {
    let (fx, fy) = (x.clone(), y.clone());
    let f = Morphism::new(
        top.clone(),
        bottom.clone(),
        0,
        Arc::new(move |g: &Gen| {
            let (a, b) = pair_of(g)?;
            let n = a.dim();
            let mut acc = CombinationSum::new(n as i32);
            for i in 0..=n {
                let front = last_faces(fx.as_ref(), &a, n - i);
                let back = faces_at(fy.as_ref(), &b, 0, i);
                if !front.is_degenerate() && !back.is_degenerate() {
                    acc.add_term(1, Gen::tensor(Gen::Simplex(front.geom), Gen::Simplex(back.geom)));
                }
            }
            Ok(acc.finish())
        }),
    );

    let g = Morphism::new(
        bottom.clone(),
        top.clone(),
        0,
        Arc::new(move |t: &Gen| {
            let (u, v) = t
                .as_tensor()
                .ok_or_else(|| ChainError::Invalid(format!("{t:?} is not a tensor generator")))?;
            let (Some(a), Some(b)) = (u.as_simplex(), v.as_simplex()) else {
                return Err(ChainError::Invalid(format!("{t:?} is not a tensor of simplices")));
            };
            let (p, q) = (a.dim(), b.dim());
            let a = AbstractSimplex::nondegenerate(a.clone());
            let b = AbstractSimplex::nondegenerate(b.clone());
            let mut acc = CombinationSum::new((p + q) as i32);
            for (alpha, beta) in shuffles(p, q) {
                let xa = a.degenerate_all(beta.iter().copied());
                let yb = b.degenerate_all(alpha.iter().copied());
                push_pair(&mut acc, sign(shuffle_sign(&alpha)), xa, yb);
            }
            Ok(acc.finish())
        }),
    );

    let (hx, hy) = (x, y);
    let h = Morphism::new(
        top.clone(),
        top.clone(),
        1,
        Arc::new(move |g: &Gen| {
            let (a, b) = pair_of(g)?;
            let n = a.dim();
            let mut acc = CombinationSum::new(n as i32 + 1);
            for q in 0..n {
                let xf = last_faces(hx.as_ref(), &a, q);
                for p in 0..(n - q) {
                    let base = n - p - q;
                    let yf = faces_at(hy.as_ref(), &b, base, p);
                    for (alpha, beta) in shuffles(p + 1, q) {
                        let xa = xf.degenerate_all(std::iter::once(base - 1).chain(beta.iter().map(|j| j + base)));
                        let yb = yf.degenerate_all(alpha.iter().map(|j| j + base));
                        push_pair(&mut acc, sign(base + shuffle_sign(&alpha)), xa, yb);
                    }
                }
            }
            Ok(acc.finish())
        }),
    );
    Reduction { top, bottom, f, g, h }
}

/// `δ(g, b) = (−1)^n [(τ(b)·∂_n g, ∂_n b) − (∂_n g, ∂_n b)]` on `C*(G × B)`.
pub fn twist_perturbation(top: &ChainComplex, group: SGroup, tau: &TwistingOperator, base: SSet) -> Perturbation {
    if tau.is_trivial() {
        return Perturbation::zero(top);
    }
    let tau = tau.clone();
    let delta = Morphism::new(
        top.clone(),
        top.clone(),
        -1,
        Arc::new(move |g: &Gen| {
            let (a, b) = pair_of(g)?;
            let n = a.dim();
            let mut acc = CombinationSum::new(n as i32 - 1);
            if n == 0 {
                return Ok(acc.finish());
            }
            let fa = group.face(n, &a);
            let fb = base.face(n, &b);
            let twisted = group.multiply(&tau.apply(&b), &fa);
            push_pair(&mut acc, sign(n), twisted, fb.clone());
            push_pair(&mut acc, -sign(n), fa, fb);
            Ok(acc.finish())
        }),
    );
    Perturbation::new(delta).expect("degree −1")
}

/// `C*(G ×_τ B) ⇒ C*(G) ⊗_t C*(B)`, with the perturbation of the tensor
/// differential it induces.
pub fn twisted_ez_reduction(
    group: SGroup,
    tau: &TwistingOperator,
    base: SSet,
) -> ChainResult<(Reduction, Perturbation)> {
    let g_set: SSet = group.clone();
    let ez = ez_reduction(g_set, base.clone());
    let delta = twist_perturbation(&ez.top, group, tau, base);
    bpl_with_budget(&ez, &delta, bpl_budget())
}
