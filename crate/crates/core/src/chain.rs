//! Generators, integer combinations, chain complexes and morphisms.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use parking_lot::Mutex;

use crate::exactlinalg::sparse::{sparse_kernel, SparseVec};
use crate::exactlinalg::{smith_normal_form, BasisDivisors, IntMatrix, LinalgError, SparseSubquotient};
use crate::simplicial::Geom;

pub type Coeff = i64;

/// A basis element of a chain group. Keys are structural, so products and
/// tensor products compare canonically without any registry.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    /// A named cell, used by hand-built complexes.
    Cell { dim: u32, id: u64 },
    /// A nondegenerate simplex of a simplicial set.
    Simplex(Geom),
    /// `a ⊗ b`.
    Tensor(Arc<(Gen, Gen)>),
}

impl Gen {
    pub fn cell(dim: u32, id: u64) -> Gen {
        Gen::Cell { dim, id }
    }

    pub fn tensor(a: Gen, b: Gen) -> Gen {
        Gen::Tensor(Arc::new((a, b)))
    }

    pub fn dim(&self) -> i32 {
        match self {
            Gen::Cell { dim, .. } => *dim as i32,
            Gen::Simplex(g) => g.dim() as i32,
            Gen::Tensor(t) => t.0.dim() + t.1.dim(),
        }
    }

    pub fn as_tensor(&self) -> Option<(&Gen, &Gen)> {
        match self {
            Gen::Tensor(t) => Some((&t.0, &t.1)),
            _ => None,
        }
    }

    pub fn as_simplex(&self) -> Option<&Geom> {
        match self {
            Gen::Simplex(g) => Some(g),
            _ => None,
        }
    }
}

impl fmt::Debug for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Cell { dim, id } => write!(f, "c{dim}:{id}"),
            Gen::Simplex(g) => write!(f, "{g:?}"),
            Gen::Tensor(t) => write!(f, "({:?} ⊗ {:?})", t.0, t.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: i32, found: i32 },
    #[error("complex mismatch: {0}")]
    ComplexMismatch(String),
    #[error("complex `{label}` has no basis in degree {degree}")]
    NotEffective { label: String, degree: i32 },
    #[error("nilpotency budget of {budget} exceeded while evaluating {element}")]
    NilpotencyBudgetExceeded { budget: usize, element: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type ChainResult<T> = Result<T, ChainError>;

fn add_coeff(a: Coeff, b: Coeff) -> Coeff {
    a.checked_add(b).expect("chain coefficient overflow")
}

fn mul_coeff(a: Coeff, b: Coeff) -> Coeff {
    a.checked_mul(b).expect("chain coefficient overflow")
}

/// Finite integer combination of generators of one degree, with terms
/// sorted by generator and no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Combination {
    degree: i32,
    terms: Vec<(Gen, Coeff)>,
}

impl Combination {
    pub fn zero(degree: i32) -> Self {
        Combination { degree, terms: Vec::new() }
    }

    pub fn from_gen(g: Gen) -> Self {
        Combination { degree: g.dim(), terms: vec![(g, 1)] }
    }

    pub fn term(coeff: Coeff, g: Gen) -> Self {
        let degree = g.dim();
        if coeff == 0 {
            return Combination::zero(degree);
        }
        Combination { degree, terms: vec![(g, coeff)] }
    }

    /// Normalizes an arbitrary list of terms; every generator must have the
    /// given degree.
    pub fn from_terms(degree: i32, mut terms: Vec<(Gen, Coeff)>) -> ChainResult<Self> {
        for (g, _) in &terms {
            if g.dim() != degree {
                return Err(ChainError::DegreeMismatch { expected: degree, found: g.dim() });
            }
        }
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Combination { degree, terms: merge_sorted(terms) })
    }

    /// Like `from_terms` for callers that construct terms of the right
    /// degree by design.
    pub(crate) fn collect(degree: i32, mut terms: Vec<(Gen, Coeff)>) -> Self {
        debug_assert!(terms.iter().all(|(g, _)| g.dim() == degree));
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Combination { degree, terms: merge_sorted(terms) }
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Gen, Coeff)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Gen, Coeff)> {
        self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Gen, Coeff)> {
        self.terms.iter().map(|(g, c)| (g, *c))
    }

    pub fn coefficient(&self, g: &Gen) -> Coeff {
        self.terms.binary_search_by(|t| t.0.cmp(g)).map_or(0, |i| self.terms[i].1)
    }

    pub fn scaled(&self, k: Coeff) -> Self {
        if k == 0 {
            return Combination::zero(self.degree);
        }
        Combination { degree: self.degree, terms: self.terms.iter().map(|(g, c)| (g.clone(), mul_coeff(*c, k))).collect() }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1)
    }

    pub fn add(&self, other: &Combination) -> ChainResult<Combination> {
        cmbn_add(self, other)
    }

    pub fn sub(&self, other: &Combination) -> ChainResult<Combination> {
        cmbn_add(self, &other.negated())
    }

    /// Keeps the terms whose generator satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Gen) -> bool) -> Combination {
        Combination { degree: self.degree, terms: self.terms.iter().filter(|(g, _)| keep(g)).cloned().collect() }
    }
}

fn merge_sorted(terms: Vec<(Gen, Coeff)>) -> Vec<(Gen, Coeff)> {
    let mut out: Vec<(Gen, Coeff)> = Vec::with_capacity(terms.len());
    for (g, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == g => last.1 = add_coeff(last.1, c),
            _ => {
                if out.last().is_some_and(|l| l.1 == 0) {
                    out.pop();
                }
                out.push((g, c));
            }
        }
    }
    if out.last().is_some_and(|l| l.1 == 0) {
        out.pop();
    }
    out
}

impl fmt::Debug for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}|", self.degree)?;
        for (i, (g, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}·{g:?}")?;
        }
        write!(f, ">")
    }
}

/// Coefficientwise sum.
pub fn cmbn_add(a: &Combination, b: &Combination) -> ChainResult<Combination> {
    if a.degree != b.degree {
        return Err(ChainError::DegreeMismatch { expected: a.degree, found: b.degree });
    }
    let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() || j < b.terms.len() {
        if j == b.terms.len() || (i < a.terms.len() && a.terms[i].0 < b.terms[j].0) {
            out.push(a.terms[i].clone());
            i += 1;
        } else if i == a.terms.len() || b.terms[j].0 < a.terms[i].0 {
            out.push(b.terms[j].clone());
            j += 1;
        } else {
            let c = add_coeff(a.terms[i].1, b.terms[j].1);
            if c != 0 {
                out.push((a.terms[i].0.clone(), c));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(Combination { degree: a.degree, terms: out })
}

/// Accumulates scaled combinations of one degree.
pub struct CombinationSum {
    degree: i32,
    terms: Vec<(Gen, Coeff)>,
}

impl CombinationSum {
    pub fn new(degree: i32) -> Self {
        CombinationSum { degree, terms: Vec::new() }
    }

    pub fn add_term(&mut self, coeff: Coeff, g: Gen) {
        if coeff != 0 {
            self.terms.push((g, coeff));
        }
    }

    pub fn add_scaled(&mut self, k: Coeff, c: &Combination) -> ChainResult<()> {
        if c.degree != self.degree && !c.is_zero() {
            return Err(ChainError::DegreeMismatch { expected: self.degree, found: c.degree });
        }
        if k == 0 {
            return Ok(());
        }
        self.terms.extend(c.terms.iter().map(|(g, x)| (g.clone(), mul_coeff(*x, k))));
        Ok(())
    }

    pub fn finish(self) -> Combination {
        Combination::collect(self.degree, self.terms)
    }
}

pub type DiffFn = Arc<dyn Fn(&Gen) -> ChainResult<Combination> + Send + Sync>;
pub type BasisFn = Arc<dyn Fn(i32) -> Option<Arc<Vec<Gen>>> + Send + Sync>;
pub type ActionFn = Arc<dyn Fn(&Gen) -> ChainResult<Combination> + Send + Sync>;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// A chain complex given by its differential on generators and, where it
/// is of finite type, a basis per degree.
#[derive(Clone)]
pub struct ChainComplex {
    id: u64,
    label: Arc<str>,
    diff: DiffFn,
    basis: Option<BasisFn>,
}

impl fmt::Debug for ChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainComplex({} #{})", self.label, self.id)
    }
}

impl ChainComplex {
    pub fn new(label: impl Into<String>, diff: DiffFn, basis: Option<BasisFn>) -> Self {
        ChainComplex { id: fresh_id(), label: Arc::from(label.into()), diff, basis }
    }

    /// A finite complex from explicit bases and a table of boundaries.
    pub fn from_table(label: impl Into<String>, bases: Vec<Vec<Gen>>, boundaries: HashMap<Gen, Combination>) -> Self {
        let bases: Vec<Arc<Vec<Gen>>> = bases.into_iter().map(Arc::new).collect();
        let diff: DiffFn = Arc::new(move |g: &Gen| {
            Ok(boundaries.get(g).cloned().unwrap_or_else(|| Combination::zero(g.dim() - 1)))
        });
        let basis: BasisFn = Arc::new(move |n: i32| {
            if n < 0 {
                return Some(Arc::new(Vec::new()));
            }
            Some(bases.get(n as usize).cloned().unwrap_or_else(|| Arc::new(Vec::new())))
        });
        ChainComplex::new(label, diff, Some(basis))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn same_as(&self, other: &ChainComplex) -> bool {
        self.id == other.id
    }

    pub fn differential(&self, g: &Gen) -> ChainResult<Combination> {
        (self.diff)(g)
    }

    pub fn diff_fn(&self) -> DiffFn {
        self.diff.clone()
    }

    pub fn basis_fn(&self) -> Option<BasisFn> {
        self.basis.clone()
    }

    pub fn d(&self, c: &Combination) -> ChainResult<Combination> {
        let mut acc = CombinationSum::new(c.degree() - 1);
        for (g, k) in c.iter() {
            acc.add_scaled(k, &self.differential(g)?)?;
        }
        Ok(acc.finish())
    }

    pub fn has_basis(&self, n: i32) -> bool {
        n < 0 || self.basis.as_ref().is_some_and(|b| b(n).is_some())
    }

    pub fn basis(&self, n: i32) -> ChainResult<Arc<Vec<Gen>>> {
        if n < 0 {
            return Ok(Arc::new(Vec::new()));
        }
        self.basis
            .as_ref()
            .and_then(|b| b(n))
            .ok_or_else(|| ChainError::NotEffective { label: self.label.to_string(), degree: n })
    }

    /// Same basis, new differential.
    pub fn with_differential(&self, label: impl Into<String>, diff: DiffFn) -> ChainComplex {
        ChainComplex::new(label, diff, self.basis.clone())
    }

    /// Caches the differential per generator.
    pub fn memoized(&self) -> ChainComplex {
        let inner = self.diff.clone();
        let cache: Arc<Mutex<HashMap<Gen, Combination>>> = Arc::new(Mutex::new(HashMap::new()));
        let diff: DiffFn = Arc::new(move |g: &Gen| {
            if let Some(c) = cache.lock().get(g) {
                return Ok(c.clone());
            }
            let c = inner(g)?;
            cache.lock().insert(g.clone(), c.clone());
            Ok(c)
        });
        ChainComplex { id: self.id, label: self.label.clone(), diff, basis: self.basis.clone() }
    }

    /// Verifies `d ∘ d = 0` on every basis generator in degrees `0..=max_degree`.
    pub fn check_d_squared(&self, max_degree: i32) -> ChainResult<Vec<Gen>> {
        let mut bad = Vec::new();
        for n in 0..=max_degree {
            for g in self.basis(n)?.iter() {
                if !self.d(&self.differential(g)?)?.is_zero() {
                    bad.push(g.clone());
                }
            }
        }
        Ok(bad)
    }
}

/// A linear map of some degree between chain complexes, given on generators.
#[derive(Clone)]
pub struct Morphism {
    pub source: ChainComplex,
    pub target: ChainComplex,
    pub degree: i32,
    action: ActionFn,
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Morphism({:?} -> {:?}, degree {})", self.source, self.target, self.degree)
    }
}

impl Morphism {
    pub fn new(source: ChainComplex, target: ChainComplex, degree: i32, action: ActionFn) -> Self {
        Morphism { source, target, degree, action }
    }

    pub fn identity(c: &ChainComplex) -> Self {
        Morphism::new(c.clone(), c.clone(), 0, Arc::new(|g: &Gen| Ok(Combination::from_gen(g.clone()))))
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex, degree: i32) -> Self {
        Morphism::new(
            source.clone(),
            target.clone(),
            degree,
            Arc::new(move |g: &Gen| Ok(Combination::zero(g.dim() + degree))),
        )
    }

    pub fn action(&self) -> ActionFn {
        self.action.clone()
    }

    pub fn on_gen(&self, g: &Gen) -> ChainResult<Combination> {
        (self.action)(g)
    }

    /// Linear extension of the action.
    pub fn apply(&self, c: &Combination) -> ChainResult<Combination> {
        let mut acc = CombinationSum::new(c.degree() + self.degree);
        for (g, k) in c.iter() {
            if g.dim() != c.degree() {
                return Err(ChainError::DegreeMismatch { expected: c.degree(), found: g.dim() });
            }
            acc.add_scaled(k, &(self.action)(g)?)?;
        }
        Ok(acc.finish())
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Morphism) -> ChainResult<Morphism> {
        if !other.target.same_as(&self.source) {
            return Err(ChainError::ComplexMismatch(format!(
                "cannot compose {:?} after {:?}",
                self.source, other.target
            )));
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Morphism::new(
            other.source.clone(),
            self.target.clone(),
            self.degree + other.degree,
            Arc::new(move |g: &Gen| a.apply(&b.on_gen(g)?)),
        ))
    }

    /// Same action, relabelled endpoints (used when a differential changes
    /// but the underlying graded module does not).
    pub fn retarget(&self, source: &ChainComplex, target: &ChainComplex) -> Morphism {
        Morphism::new(source.clone(), target.clone(), self.degree, self.action.clone())
    }

    pub fn memoized(&self) -> Morphism {
        let inner = self.action.clone();
        let cache: Arc<Mutex<HashMap<Gen, Combination>>> = Arc::new(Mutex::new(HashMap::new()));
        Morphism::new(
            self.source.clone(),
            self.target.clone(),
            self.degree,
            Arc::new(move |g: &Gen| {
                if let Some(c) = cache.lock().get(g) {
                    return Ok(c.clone());
                }
                let c = inner(g)?;
                cache.lock().insert(g.clone(), c.clone());
                Ok(c)
            }),
        )
    }
}

/// `a ⊗ b` for combinations.
pub fn tensor_cmbn(a: &Combination, b: &Combination) -> Combination {
    let mut terms = Vec::with_capacity(a.len() * b.len());
    for (x, i) in a.iter() {
        for (y, j) in b.iter() {
            terms.push((Gen::tensor(x.clone(), y.clone()), mul_coeff(i, j)));
        }
    }
    Combination::collect(a.degree() + b.degree(), terms)
}

/// `C ⊗ D` with `d(x⊗y) = dx⊗y + (−1)^{|x|} x⊗dy`.
pub fn tensor_complex(c: &ChainComplex, d: &ChainComplex) -> ChainComplex {
    let (cd, dd) = (c.diff_fn(), d.diff_fn());
    let diff: DiffFn = Arc::new(move |g: &Gen| {
        let (x, y) = g
            .as_tensor()
            .ok_or_else(|| ChainError::Invalid(format!("{g:?} is not a tensor generator")))?;
        let mut acc = CombinationSum::new(g.dim() - 1);
        let dx = cd(x)?;
        acc.add_scaled(1, &tensor_cmbn(&dx, &Combination::from_gen(y.clone())))?;
        let dy = dd(y)?;
        let sign = if x.dim() % 2 == 0 { 1 } else { -1 };
        acc.add_scaled(sign, &tensor_cmbn(&Combination::from_gen(x.clone()), &dy))?;
        Ok(acc.finish())
    });
    let basis = match (c.basis_fn(), d.basis_fn()) {
        (Some(bc), Some(bd)) => {
            let cache: Arc<Mutex<HashMap<i32, Arc<Vec<Gen>>>>> = Arc::new(Mutex::new(HashMap::new()));
            let f: BasisFn = Arc::new(move |n: i32| {
                if n < 0 {
                    return Some(Arc::new(Vec::new()));
                }
                if let Some(b) = cache.lock().get(&n) {
                    return Some(b.clone());
                }
                let mut out = Vec::new();
                for i in 0..=n {
                    let left = bc(i)?;
                    let right = bd(n - i)?;
                    for x in left.iter() {
                        for y in right.iter() {
                            out.push(Gen::tensor(x.clone(), y.clone()));
                        }
                    }
                }
                let out = Arc::new(out);
                cache.lock().insert(n, out.clone());
                Some(out)
            });
            Some(f)
        }
        _ => None,
    };
    ChainComplex::new(format!("({} ⊗ {})", c.label(), d.label()), diff, basis)
}

/// Coordinates of the generators of one degree.
pub struct BasisIndex {
    pub gens: Arc<Vec<Gen>>,
    index: HashMap<Gen, u32>,
}

impl BasisIndex {
    pub fn new(gens: Arc<Vec<Gen>>) -> Self {
        let index = gens.iter().enumerate().map(|(i, g)| (g.clone(), i as u32)).collect();
        BasisIndex { gens, index }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn position(&self, g: &Gen) -> Option<u32> {
        self.index.get(g).copied()
    }

    pub fn to_sparse(&self, c: &Combination) -> ChainResult<SparseVec> {
        let mut v: SparseVec = Vec::with_capacity(c.len());
        for (g, k) in c.iter() {
            let i = self
                .position(g)
                .ok_or_else(|| ChainError::Invalid(format!("{g:?} is not a listed basis generator")))?;
            v.push((i, BigInt::from(k)));
        }
        v.sort_unstable_by_key(|p| p.0);
        Ok(v)
    }

    pub fn to_combination(&self, degree: i32, v: &SparseVec) -> Combination {
        let terms = v
            .iter()
            .map(|(i, x)| {
                let k: Coeff = x.try_into().expect("coefficient exceeds the chain coefficient range");
                (self.gens[*i as usize].clone(), k)
            })
            .collect();
        Combination::collect(degree, terms)
    }
}

/// `H_n(C)` as a basis-divisors presentation whose generators are cycles.
pub fn homology(c: &ChainComplex, n: i32) -> ChainResult<BasisDivisors<Combination>> {
    let here = BasisIndex::new(c.basis(n)?);
    let below = BasisIndex::new(c.basis(n - 1)?);
    let above = c.basis(n + 1)?;
    let mut cols = Vec::with_capacity(here.len());
    for g in here.gens.iter() {
        cols.push(below.to_sparse(&c.differential(g)?)?);
    }
    let cycles = sparse_kernel(cols);
    let mut bounds = Vec::with_capacity(above.len());
    for g in above.iter() {
        bounds.push(here.to_sparse(&c.differential(g)?)?);
    }
    let sq = SparseSubquotient::new(cycles, bounds);
    Ok(sq.group().clone().map_generators(|v| here.to_combination(n, &v)))
}

/// Invariant factors of a direct sum of cyclic groups (`0` stands for `Z`).
pub fn invariant_factors(orders: &[BigInt]) -> Vec<BigInt> {
    let k = orders.len();
    let mut m = IntMatrix::zeros(k, k);
    for (i, o) in orders.iter().enumerate() {
        m.set(i, i, o.clone()).expect("in range");
    }
    let snf = smith_normal_form(&m);
    let mut torsion: Vec<BigInt> = snf.divisors().into_iter().filter(|d| *d != BigInt::from(1)).collect();
    torsion.extend(std::iter::repeat(BigInt::zero()).take(k - snf.rank));
    torsion
}

/// `H_n(C; M)` for `M = ⊕ Z/m_i` (entries `0` meaning `Z`), computed by
/// universal coefficients summand by summand. Generators are descriptive
/// labels, since Tor summands have no cycle representative in `C`.
pub fn homology_with_coefficients(c: &ChainComplex, n: i32, m: &[BigInt]) -> ChainResult<BasisDivisors<String>> {
    let hn = homology(c, n)?;
    let hn1 = if n >= 1 { homology(c, n - 1)?.divisors } else { Vec::new() };
    Ok(coefficient_group(&hn.divisors, &hn1, m))
}

/// `A ⊗ M ⊕ Tor(B, M)` for groups given by divisor lists.
pub fn coefficient_group(a: &[BigInt], b: &[BigInt], m: &[BigInt]) -> BasisDivisors<String> {
    use num_integer::Integer;
    let mut orders = Vec::new();
    for x in a {
        for y in m {
            orders.push(x.gcd(y));
        }
    }
    for x in b {
        for y in m {
            if !x.is_zero() && !y.is_zero() {
                orders.push(x.gcd(y));
            }
        }
    }
    let divisors = invariant_factors(&orders);
    let generators = (0..divisors.len()).map(|i| format!("g{i}")).collect();
    BasisDivisors { generators, divisors }
}
