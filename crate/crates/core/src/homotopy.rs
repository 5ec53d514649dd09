//! Reductions, equivalences and the perturbation lemmas.

use std::sync::{Arc, OnceLock};

use crate::chain::{
    tensor_cmbn, tensor_complex, ChainComplex, ChainError, ChainResult, Combination, CombinationSum, DiffFn, Gen,
    Morphism,
};

pub const DEFAULT_BPL_BUDGET: usize = 64;

/// Iteration budget for the perturbation series; `SPECTRA_BPL_BUDGET` overrides it.
pub fn bpl_budget() -> usize {
    static BUDGET: OnceLock<usize> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var("SPECTRA_BPL_BUDGET").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_BPL_BUDGET)
    })
}

/// `(f, g, h) : C ⇒ D` with `fg = 1`, `gf + dh + hd = 1`, `fh = 0`,
/// `hg = 0`, `hh = 0`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub top: ChainComplex,
    pub bottom: ChainComplex,
    pub f: Morphism,
    pub g: Morphism,
    pub h: Morphism,
}

impl Reduction {
    pub fn new(top: ChainComplex, bottom: ChainComplex, f: Morphism, g: Morphism, h: Morphism) -> ChainResult<Self> {
        let ok = f.degree == 0
            && g.degree == 0
            && h.degree == 1
            && f.source.same_as(&top)
            && f.target.same_as(&bottom)
            && g.source.same_as(&bottom)
            && g.target.same_as(&top)
            && h.source.same_as(&top)
            && h.target.same_as(&top);
        if !ok {
            return Err(ChainError::ComplexMismatch(format!("maps do not form a reduction {top:?} ⇒ {bottom:?}")));
        }
        Ok(Reduction { top, bottom, f, g, h })
    }

    /// Caches `f`, `g` and `h` per generator.
    pub fn memoized(&self) -> Reduction {
        Reduction {
            top: self.top.clone(),
            bottom: self.bottom.clone(),
            f: self.f.memoized(),
            g: self.g.memoized(),
            h: self.h.memoized(),
        }
    }

    /// Replaces the top complex by one the caller knows to have the same
    /// generators and differential.
    pub(crate) fn with_top(&self, top: &ChainComplex) -> Reduction {
        Reduction {
            top: top.clone(),
            bottom: self.bottom.clone(),
            f: self.f.retarget(top, &self.bottom),
            g: self.g.retarget(&self.bottom, top),
            h: self.h.retarget(top, top),
        }
    }
}

/// `Ĉ ⇒ C` and `Ĉ ⇒ D`, so `C` and `D` have the same homology.
#[derive(Clone, Debug)]
pub struct Equivalence {
    pub left: Reduction,
    pub right: Reduction,
}

impl Equivalence {
    pub fn new(left: Reduction, right: Reduction) -> ChainResult<Self> {
        if !left.top.same_as(&right.top) {
            return Err(ChainError::ComplexMismatch(format!(
                "equivalence legs start at {:?} and {:?}",
                left.top, right.top
            )));
        }
        Ok(Equivalence { left, right })
    }

    pub fn trivial(c: &ChainComplex) -> Self {
        let r = trivial_reduction(c);
        Equivalence { left: r.clone(), right: r }
    }

    pub fn from_reduction(r: Reduction) -> Self {
        Equivalence { left: trivial_reduction(&r.top), right: r }
    }

    pub fn source(&self) -> &ChainComplex {
        &self.left.bottom
    }

    pub fn effective(&self) -> &ChainComplex {
        &self.right.bottom
    }

    pub fn is_trivial(&self) -> bool {
        self.left.top.same_as(&self.left.bottom) && self.right.top.same_as(&self.right.bottom)
    }
}

/// A degree −1 map `δ` with `(d + δ)² = 0`.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub delta: Morphism,
    zero: bool,
}

impl Perturbation {
    pub fn new(delta: Morphism) -> ChainResult<Self> {
        if delta.degree != -1 {
            return Err(ChainError::DegreeMismatch { expected: -1, found: delta.degree });
        }
        Ok(Perturbation { delta, zero: false })
    }

    pub fn zero(c: &ChainComplex) -> Self {
        Perturbation { delta: Morphism::zero(c, c, -1), zero: true }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// The same map viewed on a complex with the same generators.
    pub fn retarget(&self, c: &ChainComplex) -> Self {
        Perturbation { delta: self.delta.retarget(c, c), zero: self.zero }
    }

    /// `δ = d' − d` for two differentials on the same generators.
    pub fn difference(perturbed: &ChainComplex, plain: &ChainComplex) -> Self {
        let (a, b) = (perturbed.diff_fn(), plain.diff_fn());
        let delta = Morphism::new(plain.clone(), plain.clone(), -1, Arc::new(move |g: &Gen| a(g)?.sub(&b(g)?)));
        Perturbation { delta, zero: false }
    }

    /// The complex with differential `d + δ`.
    pub fn perturbed(&self, c: &ChainComplex, label: impl Into<String>) -> ChainComplex {
        if self.zero {
            return c.clone();
        }
        let (d, delta) = (c.diff_fn(), self.delta.clone());
        let diff: DiffFn = Arc::new(move |g: &Gen| d(g)?.add(&delta.on_gen(g)?));
        c.with_differential(label, diff).memoized()
    }
}

pub fn trivial_reduction(c: &ChainComplex) -> Reduction {
    Reduction {
        top: c.clone(),
        bottom: c.clone(),
        f: Morphism::identity(c),
        g: Morphism::identity(c),
        h: Morphism::zero(c, c, 1),
    }
}

/// `C ⇒ D ⇒ E`: `f = f₂f₁`, `g = g₁g₂`, `h = h₁ + g₁h₂f₁`.
pub fn compose_reductions(first: &Reduction, second: &Reduction) -> ChainResult<Reduction> {
    if !first.bottom.same_as(&second.top) {
        return Err(ChainError::ComplexMismatch(format!(
            "cannot compose reductions through {:?} and {:?}",
            first.bottom, second.top
        )));
    }
    let f = second.f.compose(&first.f)?;
    let g = first.g.compose(&second.g)?;
    let (h1, g1, h2, f1) = (first.h.clone(), first.g.clone(), second.h.clone(), first.f.clone());
    let h = Morphism::new(
        first.top.clone(),
        first.top.clone(),
        1,
        Arc::new(move |x: &Gen| {
            let a = h1.on_gen(x)?;
            let b = g1.apply(&h2.apply(&f1.on_gen(x)?)?)?;
            a.add(&b)
        }),
    );
    Ok(Reduction { top: first.top.clone(), bottom: second.bottom.clone(), f, g, h })
}

fn tensor_map(
    a: &Morphism,
    b: &Morphism,
    source: &ChainComplex,
    target: &ChainComplex,
) -> Morphism {
    let (a, b) = (a.clone(), b.clone());
    let deg = a.degree + b.degree;
    let b_odd = b.degree % 2 != 0;
    Morphism::new(
        source.clone(),
        target.clone(),
        deg,
        Arc::new(move |g: &Gen| {
            let (x, y) = g
                .as_tensor()
                .ok_or_else(|| ChainError::Invalid(format!("{g:?} is not a tensor generator")))?;
            let t = tensor_cmbn(&a.on_gen(x)?, &b.on_gen(y)?);
            Ok(if b_odd && x.dim() % 2 != 0 { t.negated() } else { t })
        }),
    )
}

/// `C ⊗ C' ⇒ D ⊗ D'` with `h = h ⊗ 1 + gf ⊗ h'`.
pub fn tensor_reductions(r: &Reduction, s: &Reduction) -> Reduction {
    let top = tensor_complex(&r.top, &s.top);
    let bottom = tensor_complex(&r.bottom, &s.bottom);
    let f = tensor_map(&r.f, &s.f, &top, &bottom);
    let g = tensor_map(&r.g, &s.g, &bottom, &top);
    let h1 = tensor_map(&r.h, &Morphism::identity(&s.top), &top, &top);
    let gf = Morphism::new(r.top.clone(), r.top.clone(), 0, {
        let (g, f) = (r.g.clone(), r.f.clone());
        Arc::new(move |x: &Gen| g.apply(&f.on_gen(x)?))
    });
    let h2 = tensor_map(&gf, &s.h, &top, &top);
    let h = Morphism::new(top.clone(), top.clone(), 1, Arc::new(move |x: &Gen| h1.on_gen(x)?.add(&h2.on_gen(x)?)));
    Reduction { top, bottom, f, g, h }
}

/// Easy perturbation lemma: a perturbation `δ` of the bottom complex lifts
/// to `gδf` on the top, with `f`, `g`, `h` unchanged.
pub fn tpl(r: &Reduction, delta: &Perturbation) -> (Reduction, Perturbation) {
    if delta.is_zero() {
        return (r.clone(), Perturbation::zero(&r.top));
    }
    let bottom = delta.perturbed(&r.bottom, format!("{}ᵟ", r.bottom.label()));
    let (g, d, f) = (r.g.clone(), delta.delta.clone(), r.f.clone());
    let up = Morphism::new(r.top.clone(), r.top.clone(), -1, Arc::new(move |x: &Gen| g.apply(&d.apply(&f.on_gen(x)?)?)))
        .memoized();
    let up = Perturbation { delta: up, zero: false };
    let top = up.perturbed(&r.top, format!("{}ᵟ", r.top.label()));
    let red = Reduction {
        f: r.f.retarget(&top, &bottom),
        g: r.g.retarget(&bottom, &top),
        h: r.h.retarget(&top, &top),
        top,
        bottom,
    };
    let up = Perturbation { delta: up.delta.retarget(&red.top, &red.top), zero: false };
    (red, up)
}

/// `Σ_{i≥0} (−step)^i (x)`, failing when the series is not zero after `budget` terms.
fn series(x: Combination, step: &dyn Fn(&Combination) -> ChainResult<Combination>, budget: usize) -> ChainResult<Combination> {
    let mut acc = CombinationSum::new(x.degree());
    acc.add_scaled(1, &x)?;
    let mut t = x.clone();
    for _ in 0..budget {
        t = step(&t)?.negated();
        if t.is_zero() {
            return Ok(acc.finish());
        }
        acc.add_scaled(1, &t)?;
    }
    Err(ChainError::NilpotencyBudgetExceeded { budget, element: format!("{x:?}") })
}

/// Basic perturbation lemma with the default budget.
pub fn bpl(r: &Reduction, delta: &Perturbation) -> ChainResult<Reduction> {
    Ok(bpl_with_budget(r, delta, bpl_budget())?.0)
}

/// Basic perturbation lemma. Returns the perturbed reduction together with
/// the induced perturbation `fδφg` of the bottom complex.
///
/// With `φ = Σ(−hδ)^i` and `ψ = Σ(−δh)^i`: `f' = fψ`, `g' = φg`, `h' = φh`.
pub fn bpl_with_budget(r: &Reduction, delta: &Perturbation, budget: usize) -> ChainResult<(Reduction, Perturbation)> {
    if delta.is_zero() {
        return Ok((r.clone(), Perturbation::zero(&r.bottom)));
    }
    let top = delta.perturbed(&r.top, format!("{}ᵟ", r.top.label()));
    let (h, d) = (r.h.clone(), delta.delta.clone());
    let phi = {
        let (h, d) = (h.clone(), d.clone());
        Arc::new(move |x: Combination| series(x, &|t| h.apply(&d.apply(t)?), budget))
    };
    let psi = {
        let (h, d) = (h.clone(), d.clone());
        Arc::new(move |x: Combination| series(x, &|t| d.apply(&h.apply(t)?), budget))
    };

    let delta_d = {
        let (f, g, d, phi) = (r.f.clone(), r.g.clone(), d.clone(), phi.clone());
        Morphism::new(
            r.bottom.clone(),
            r.bottom.clone(),
            -1,
            Arc::new(move |y: &Gen| f.apply(&d.apply(&phi(g.on_gen(y)?)?)?)),
        )
        .memoized()
    };
    let delta_d = Perturbation { delta: delta_d, zero: false };
    let bottom = delta_d.perturbed(&r.bottom, format!("{}ᵟ", r.bottom.label()));

    let f = {
        let (f, psi) = (r.f.clone(), psi.clone());
        Morphism::new(top.clone(), bottom.clone(), 0, Arc::new(move |x: &Gen| f.apply(&psi(Combination::from_gen(x.clone()))?)))
            .memoized()
    };
    let g = {
        let (g, phi) = (r.g.clone(), phi.clone());
        Morphism::new(bottom.clone(), top.clone(), 0, Arc::new(move |y: &Gen| phi(g.on_gen(y)?))).memoized()
    };
    let hh = {
        let phi = phi.clone();
        Morphism::new(top.clone(), top.clone(), 1, Arc::new(move |x: &Gen| phi(h.on_gen(x)?))).memoized()
    };
    let delta_d = Perturbation { delta: delta_d.delta.retarget(&bottom, &bottom), zero: false };
    Ok((Reduction { top, bottom, f, g, h: hh }, delta_d))
}

/// Checks the reduction laws on all basis generators in degrees
/// `0..=max_degree`; returns a description of each violation.
pub fn check_reduction_laws(r: &Reduction, max_degree: i32) -> ChainResult<Vec<String>> {
    let mut bad = Vec::new();
    for n in 0..=max_degree {
        for x in r.top.basis(n)?.iter() {
            let c = Combination::from_gen(x.clone());
            let gf = r.g.apply(&r.f.on_gen(x)?)?;
            let hx = r.h.on_gen(x)?;
            let dh = r.top.d(&hx)?;
            let hd = r.h.apply(&r.top.differential(x)?)?;
            if gf.add(&dh)?.add(&hd)? != c {
                bad.push(format!("gf + dh + hd ≠ 1 on {x:?}"));
            }
            if !r.f.apply(&hx)?.is_zero() {
                bad.push(format!("fh ≠ 0 on {x:?}"));
            }
            if !r.h.apply(&hx)?.is_zero() {
                bad.push(format!("hh ≠ 0 on {x:?}"));
            }
            if r.f.apply(&r.top.differential(x)?)? != r.bottom.d(&r.f.on_gen(x)?)? {
                bad.push(format!("fd ≠ df on {x:?}"));
            }
        }
        for y in r.bottom.basis(n)?.iter() {
            let gy = r.g.on_gen(y)?;
            if r.f.apply(&gy)? != Combination::from_gen(y.clone()) {
                bad.push(format!("fg ≠ 1 on {y:?}"));
            }
            if !r.h.apply(&gy)?.is_zero() {
                bad.push(format!("hg ≠ 0 on {y:?}"));
            }
            if r.g.apply(&r.bottom.differential(y)?)? != r.top.d(&gy)? {
                bad.push(format!("gd ≠ dg on {y:?}"));
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// `0 ← a ← b` with `db = a` collapses onto `c` in degree 0.
    fn collapse() -> Reduction {
        let (a, b, c) = (Gen::cell(0, 0), Gen::cell(1, 1), Gen::cell(0, 2));
        let mut bd = HashMap::new();
        bd.insert(b.clone(), Combination::from_gen(a.clone()));
        let top = ChainComplex::from_table("T", vec![vec![a.clone(), c.clone()], vec![b.clone()]], bd);
        let bottom = ChainComplex::from_table("B", vec![vec![c.clone()]], HashMap::new());
        let (a2, b2, c2) = (a.clone(), b.clone(), c.clone());
        let f = Morphism::new(top.clone(), bottom.clone(), 0, Arc::new(move |x: &Gen| {
            Ok(if *x == c2 { Combination::from_gen(c2.clone()) } else { Combination::zero(x.dim()) })
        }));
        let g = Morphism::identity(&bottom).retarget(&bottom, &top);
        let h = Morphism::new(top.clone(), top.clone(), 1, Arc::new(move |x: &Gen| {
            Ok(if *x == a2 { Combination::from_gen(b2.clone()) } else { Combination::zero(x.dim() + 1) })
        }));
        Reduction::new(top, bottom, f, g, h).unwrap()
    }

    #[test]
    fn collapse_is_a_reduction() {
        assert!(check_reduction_laws(&collapse(), 1).unwrap().is_empty());
    }

    #[test]
    fn tensor_and_compose_preserve_laws() {
        let r = collapse();
        let t = tensor_reductions(&r, &r);
        assert!(check_reduction_laws(&t, 2).unwrap().is_empty());
        let c = compose_reductions(&t, &trivial_reduction(&t.bottom)).unwrap();
        assert!(check_reduction_laws(&c, 2).unwrap().is_empty());
    }

    #[test]
    fn compose_rejects_mismatch() {
        let r = collapse();
        assert!(compose_reductions(&r, &r).is_err());
    }
}
