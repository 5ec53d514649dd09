//! Simplicial sets and groups, normalized chains, products and the
//! Eilenberg–Zilber reductions.

mod ez;
mod kspace;
mod product;
mod sphere;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::Mutex;
use smallvec::SmallVec;

use crate::chain::{BasisFn, ChainComplex, Combination, CombinationSum, DiffFn, Gen};

pub use ez::{ez_reduction, twist_perturbation, twisted_ez_reduction};
pub use kspace::{eilenberg_maclane, universal_twisting, KSpace};
pub use product::{cartesian_product, first_component, make_pair, second_component, twisted_product, Product};
pub use sphere::{sphere, Sphere};

/// Canonical degeneracy word: strictly decreasing indices, outermost first.
pub type DegenWord = SmallVec<[u8; 8]>;

/// Digit vector of a simplex of an iterated classifying space.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digits {
    pub dim: u8,
    pub data: SmallVec<[u8; 24]>,
}

/// A nondegenerate geometric simplex.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Geom {
    Cell { dim: u32, id: u32 },
    Digits(Digits),
    /// Pair of simplices of equal dimension without a common degeneracy.
    Pair(Arc<(AbstractSimplex, AbstractSimplex)>),
}

impl Geom {
    pub fn dim(&self) -> usize {
        match self {
            Geom::Cell { dim, .. } => *dim as usize,
            Geom::Digits(d) => d.dim as usize,
            Geom::Pair(p) => p.0.dim(),
        }
    }

    pub fn as_pair(&self) -> Option<(&AbstractSimplex, &AbstractSimplex)> {
        match self {
            Geom::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }
}

impl fmt::Debug for Geom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geom::Cell { dim, id } => write!(f, "σ{dim}.{id}"),
            Geom::Digits(d) => {
                write!(f, "[{}:", d.dim)?;
                for x in &d.data {
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Geom::Pair(p) => write!(f, "({:?}, {:?})", p.0, p.1),
        }
    }
}

/// `η_{i_1} ⋯ η_{i_k} y` with `i_1 > ⋯ > i_k` and `y` nondegenerate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractSimplex {
    pub degens: DegenWord,
    pub geom: Geom,
}

impl fmt::Debug for AbstractSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degens.is_empty() {
            write!(f, "{:?}", self.geom)
        } else {
            write!(f, "η{:?}{:?}", self.degens.as_slice(), self.geom)
        }
    }
}

impl AbstractSimplex {
    pub fn nondegenerate(geom: Geom) -> Self {
        AbstractSimplex { degens: DegenWord::new(), geom }
    }

    pub fn dim(&self) -> usize {
        self.geom.dim() + self.degens.len()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degens.is_empty()
    }

    /// The degeneracy degree: dimension of the underlying nondegenerate simplex.
    pub fn degeneracy_degree(&self) -> usize {
        self.geom.dim()
    }

    /// `η_a` applied to `self`, rewritten into canonical form.
    pub fn degenerate(&self, a: usize) -> Self {
        assert!(a <= self.dim(), "degeneracy index {a} out of range in dimension {}", self.dim());
        AbstractSimplex { degens: push_degeneracy(&self.degens, a as u8), geom: self.geom.clone() }
    }

    /// Applies degeneracies innermost first.
    pub fn degenerate_all(&self, innermost_first: impl IntoIterator<Item = usize>) -> Self {
        let mut out = self.clone();
        for a in innermost_first {
            out = out.degenerate(a);
        }
        out
    }
}

/// Canonical form of `η_a ∘ η_W` using `η_i η_j = η_{j+1} η_i` for `i ≤ j`.
pub fn push_degeneracy(word: &[u8], a: u8) -> DegenWord {
    let mut out = DegenWord::new();
    let mut k = 0;
    while k < word.len() && a <= word[k] {
        out.push(word[k] + 1);
        k += 1;
    }
    out.push(a);
    out.extend_from_slice(&word[k..]);
    out
}

/// Canonicalizes an arbitrary word given outermost first.
pub fn canonical_word(word_outermost_first: &[u8]) -> DegenWord {
    let mut out = DegenWord::new();
    for &a in word_outermost_first.iter().rev() {
        out = push_degeneracy(&out, a);
    }
    out
}

/// Canonical words of length `r` on simplices of dimension `n − r`,
/// landing in dimension `n`: the `r`-subsets of `{0,…,n−1}`, decreasing.
pub fn degeneracy_words(n: usize, r: usize) -> Vec<DegenWord> {
    let mut out = Vec::new();
    let mut cur = DegenWord::new();
    fn rec(start: usize, n: usize, r: usize, cur: &mut DegenWord, out: &mut Vec<DegenWord>) {
        if cur.len() == r {
            let mut w = cur.clone();
            w.reverse();
            out.push(w);
            return;
        }
        for i in start..n {
            cur.push(i as u8);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

pub trait SimplicialSet: Send + Sync {
    fn label(&self) -> String;

    /// `∂_i` of a nondegenerate simplex.
    fn face_geom(&self, i: usize, x: &Geom) -> AbstractSimplex;

    /// Nondegenerate simplices of dimension `n`, when finitely many.
    fn nondegenerate(&self, n: usize) -> Option<Arc<Vec<Geom>>>;

    fn base_point(&self) -> Geom;

    /// `∂_i` of an arbitrary simplex, pushing the face through the
    /// degeneracy word with the simplicial identities.
    fn face(&self, i: usize, x: &AbstractSimplex) -> AbstractSimplex {
        let n = x.dim();
        assert!(n >= 1 && i <= n, "face ∂_{i} undefined in dimension {n}");
        let mut i = i;
        let mut prefix: SmallVec<[u8; 8]> = SmallVec::new();
        for (pos, &w) in x.degens.iter().enumerate() {
            let w = w as usize;
            if i < w {
                prefix.push((w - 1) as u8);
            } else if i == w || i == w + 1 {
                let mut degens = DegenWord::new();
                for &a in prefix.iter() {
                    degens.push(a);
                }
                degens.extend_from_slice(&x.degens[pos + 1..]);
                return AbstractSimplex { degens: canonical_word(&degens), geom: x.geom.clone() };
            } else {
                prefix.push(w as u8);
                i -= 1;
            }
        }
        let mut r = self.face_geom(i, &x.geom);
        for &a in prefix.iter().rev() {
            r = r.degenerate(a as usize);
        }
        r
    }

    /// All simplices of dimension `n`, degenerate ones included.
    fn all_simplices(&self, n: usize) -> Option<Vec<AbstractSimplex>> {
        let mut out = Vec::new();
        for j in 0..=n {
            let nd = self.nondegenerate(j)?;
            if nd.is_empty() {
                continue;
            }
            for w in degeneracy_words(n, n - j) {
                for g in nd.iter() {
                    out.push(AbstractSimplex { degens: w.clone(), geom: g.clone() });
                }
            }
        }
        Some(out)
    }

    /// The base point degenerated to dimension `n`.
    fn base_simplex(&self, n: usize) -> AbstractSimplex {
        let degens: DegenWord = (0..n).rev().map(|i| i as u8).collect();
        AbstractSimplex { degens, geom: self.base_point() }
    }

    /// One vertex and no nondegenerate 1-simplices.
    fn is_one_reduced(&self) -> bool {
        self.nondegenerate(0).is_some_and(|v| v.len() == 1) && self.nondegenerate(1).is_some_and(|e| e.is_empty())
    }

    /// Modulus and degree when this is a built-in `K(Z/ℓ, n)`.
    fn eilenberg_maclane_type(&self) -> Option<(u32, u32)> {
        None
    }
}

pub trait SimplicialGroup: SimplicialSet {
    fn multiply(&self, a: &AbstractSimplex, b: &AbstractSimplex) -> AbstractSimplex;
    fn inverse(&self, a: &AbstractSimplex) -> AbstractSimplex;
    fn identity(&self, n: usize) -> AbstractSimplex {
        self.base_simplex(n)
    }
}

pub type SSet = Arc<dyn SimplicialSet>;
pub type SGroup = Arc<dyn SimplicialGroup>;

type TauFn = Arc<dyn Fn(&AbstractSimplex) -> AbstractSimplex + Send + Sync>;

/// A degree −1 map `τ : B → G` defining a twisted product.
#[derive(Clone)]
pub struct TwistingOperator {
    pub label: String,
    group: SGroup,
    tau: Option<TauFn>,
}

impl fmt::Debug for TwistingOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwistingOperator({})", self.label)
    }
}

impl TwistingOperator {
    pub fn trivial(group: SGroup) -> Self {
        TwistingOperator { label: "trivial".into(), group, tau: None }
    }

    pub fn new(label: impl Into<String>, group: SGroup, tau: TauFn) -> Self {
        TwistingOperator { label: label.into(), group, tau: Some(tau) }
    }

    pub fn is_trivial(&self) -> bool {
        self.tau.is_none()
    }

    pub fn group(&self) -> &SGroup {
        &self.group
    }

    /// `τ(b)` for a simplex `b` of dimension `n ≥ 1`, an element of `G_{n−1}`.
    pub fn apply(&self, b: &AbstractSimplex) -> AbstractSimplex {
        match &self.tau {
            None => self.group.identity(b.dim() - 1),
            Some(f) => f(b),
        }
    }

    /// Precomposes with a simplicial map into the current base.
    pub fn precompose(&self, label: impl Into<String>, map: TauFn) -> Self {
        match &self.tau {
            None => TwistingOperator { label: label.into(), group: self.group.clone(), tau: None },
            Some(f) => {
                let f = f.clone();
                TwistingOperator {
                    label: label.into(),
                    group: self.group.clone(),
                    tau: Some(Arc::new(move |b: &AbstractSimplex| f(&map(b)))),
                }
            }
        }
    }
}

/// Violations of the twisting identities on all simplices of `B` of
/// dimension `1..=max_dim`.
pub fn check_twisting_identities(tau: &TwistingOperator, base: &dyn SimplicialSet, max_dim: usize) -> Vec<String> {
    let g = tau.group();
    let mut bad = Vec::new();
    for n in 1..=max_dim {
        let Some(simplices) = base.all_simplices(n) else {
            bad.push(format!("base has no finite simplex list in dimension {n}"));
            break;
        };
        for b in &simplices {
            let t = tau.apply(b);
            if t.dim() != n - 1 {
                bad.push(format!("τ({b:?}) has dimension {}", t.dim()));
                continue;
            }
            if n >= 2 {
                for i in 0..n - 1 {
                    if g.face(i, &t) != tau.apply(&base.face(i, b)) {
                        bad.push(format!("∂_{i} τ({b:?}) ≠ τ(∂_{i} b)"));
                    }
                }
                let lhs = g.face(n - 1, &t);
                let rhs = g.multiply(&g.inverse(&tau.apply(&base.face(n, b))), &tau.apply(&base.face(n - 1, b)));
                if lhs != rhs {
                    bad.push(format!("∂_{} τ({b:?}) ≠ τ(∂_n b)⁻¹ τ(∂_(n−1) b)", n - 1));
                }
            }
            for i in 0..n {
                if t.degenerate(i) != tau.apply(&b.degenerate(i)) {
                    bad.push(format!("η_{i} τ({b:?}) ≠ τ(η_{i} b)"));
                }
            }
            if tau.apply(&b.degenerate(n)) != g.identity(n) {
                bad.push(format!("τ(η_{n} {b:?}) is not the identity"));
            }
        }
    }
    bad
}

/// Violations of `∂_i∂_j = ∂_{j−1}∂_i (i < j)` and of the `∂_i η_j`
/// identities on all simplices of dimension `≤ max_dim`.
pub fn check_simplicial_identities(x: &dyn SimplicialSet, max_dim: usize) -> Vec<String> {
    let mut bad = Vec::new();
    for n in 0..=max_dim {
        let Some(simplices) = x.all_simplices(n) else {
            bad.push(format!("no finite simplex list in dimension {n}"));
            break;
        };
        for s in &simplices {
            if n >= 2 {
                for j in 0..=n {
                    let dj = x.face(j, s);
                    for i in 0..j {
                        if x.face(i, &dj) != x.face(j - 1, &x.face(i, s)) {
                            bad.push(format!("∂_{i}∂_{j} ≠ ∂_{}∂_{i} on {s:?}", j - 1));
                        }
                    }
                }
            }
            for j in 0..=n {
                let sj = s.degenerate(j);
                for i in 0..=n + 1 {
                    let lhs = x.face(i, &sj);
                    let rhs = if i < j {
                        x.face(i, s).degenerate(j - 1)
                    } else if i == j || i == j + 1 {
                        s.clone()
                    } else {
                        x.face(i - 1, s).degenerate(j)
                    };
                    if lhs != rhs {
                        bad.push(format!("∂_{i}η_{j} identity fails on {s:?}"));
                    }
                }
            }
        }
    }
    bad
}

/// Normalized chain complex: nondegenerate simplices with
/// `d = Σ (−1)^i ∂_i`, degenerate faces dropped.
pub fn normalized_chain_complex(x: SSet) -> ChainComplex {
    let xs = x.clone();
    let diff: DiffFn = Arc::new(move |g: &Gen| {
        let geom = g
            .as_simplex()
            .ok_or_else(|| crate::chain::ChainError::Invalid(format!("{g:?} is not a simplex")))?;
        Ok(simplicial_boundary(xs.as_ref(), geom))
    });
    let cache: Arc<Mutex<HashMap<i32, Arc<Vec<Gen>>>>> = Arc::new(Mutex::new(HashMap::new()));
    let xb = x.clone();
    let basis: BasisFn = Arc::new(move |n: i32| {
        if n < 0 {
            return Some(Arc::new(Vec::new()));
        }
        if let Some(b) = cache.lock().get(&n) {
            return Some(b.clone());
        }
        let nd = xb.nondegenerate(n as usize)?;
        let gens: Arc<Vec<Gen>> = Arc::new(nd.iter().cloned().map(Gen::Simplex).collect());
        cache.lock().insert(n, gens.clone());
        Some(gens)
    });
    ChainComplex::new(format!("C*({})", x.label()), diff, Some(basis))
}

pub(crate) fn simplicial_boundary(x: &dyn SimplicialSet, geom: &Geom) -> Combination {
    let n = geom.dim();
    let mut acc = CombinationSum::new(n as i32 - 1);
    if n == 0 {
        return acc.finish();
    }
    let s = AbstractSimplex::nondegenerate(geom.clone());
    for i in 0..=n {
        let f = x.face(i, &s);
        if !f.is_degenerate() {
            acc.add_term(if i % 2 == 0 { 1 } else { -1 }, Gen::Simplex(f.geom));
        }
    }
    acc.finish()
}

/// Chain generator of a simplex, or `None` when it is degenerate.
pub fn simplex_gen(s: &AbstractSimplex) -> Option<Gen> {
    (!s.is_degenerate()).then(|| Gen::Simplex(s.geom.clone()))
}
