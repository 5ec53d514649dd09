//! Towers of principal fibrations, their multidegree filtrations and the
//! effective-homology pipeline for the Serre spectral system.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::chain::{homology_with_coefficients, ChainError, ChainResult, Gen};
use crate::exactlinalg::BasisDivisors;
use crate::homotopy::{
    bpl_budget, bpl_with_budget, compose_reductions, tensor_reductions, tpl, trivial_reduction, Equivalence,
    Perturbation, Reduction,
};
use crate::poset::{grid, page_tuple_sstar, Point};
use crate::simplicial::{
    check_twisting_identities, ez_reduction, first_component, normalized_chain_complex, second_component,
    twisted_ez_reduction, twisted_product, universal_twisting, AbstractSimplex, KSpace, SGroup, SSet,
    TwistingOperator,
};
use crate::spectra::{FiltrationAssignment, GenFilteredComplex, SpectralTerm};

/// `E_i = G_i ×_{τ_i} E_{i+1}` for `i = m−1, …, 0`, with `E_m = B`.
#[derive(Clone)]
pub struct Tower {
    pub fibers: Vec<SGroup>,
    pub base: SSet,
    pub twists: Vec<TwistingOperator>,
    /// `E_0, …, E_m`.
    spaces: Vec<SSet>,
}

/// Dimension up to which twisting operators are checked at construction.
const TWIST_CHECK_DIM: usize = 3;

impl Tower {
    pub fn new(fibers: Vec<SGroup>, base: SSet, twists: Vec<TwistingOperator>) -> ChainResult<Tower> {
        let m = fibers.len();
        if m == 0 || twists.len() != m {
            return Err(ChainError::Invalid(format!("a tower needs m ≥ 1 fibers and m twists, got {m} and {}", twists.len())));
        }
        for (i, g) in fibers.iter().enumerate().skip(1) {
            if !g.is_one_reduced() {
                return Err(ChainError::Invalid(format!("fiber G_{i} = {} is not 1-reduced", g.label())));
            }
        }
        if !base.is_one_reduced() {
            return Err(ChainError::Invalid(format!("base {} is not 1-reduced", base.label())));
        }
        let mut spaces: Vec<SSet> = vec![base.clone()];
        for i in (0..m).rev() {
            let below = spaces.last().expect("space").clone();
            if !twists[i].is_trivial() {
                let bad = check_twisting_identities(&twists[i], below.as_ref(), TWIST_CHECK_DIM);
                if let Some(first) = bad.first() {
                    return Err(ChainError::Invalid(format!("τ_{i} is not a twisting operator: {first}")));
                }
            }
            spaces.push(twisted_product(fibers[i].clone(), twists[i].clone(), below));
        }
        spaces.reverse();
        Ok(Tower { fibers, base, twists, spaces })
    }

    pub fn m(&self) -> usize {
        self.fibers.len()
    }

    /// `E_i`; `space(0)` is the total space and `space(m)` the base.
    pub fn space(&self, i: usize) -> SSet {
        self.spaces[i].clone()
    }

    pub fn total_space(&self) -> SSet {
        self.space(0)
    }

    /// `X_0, …, X_m`: the fibers followed by the base.
    pub fn factors(&self) -> Vec<SSet> {
        let mut out: Vec<SSet> = self.fibers.iter().map(|g| g.clone() as SSet).collect();
        out.push(self.base.clone());
        out
    }
}

pub fn untwisted_tower(fibers: Vec<SGroup>, base: SSet) -> ChainResult<Tower> {
    let twists = fibers.iter().map(|g| TwistingOperator::trivial(g.clone())).collect();
    Tower::new(fibers, base, twists)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistKind {
    Trivial,
    Universal,
}

/// A tower of Eilenberg–MacLane spaces `K_0, …, K_{m−1}` over `base`.
///
/// A universal twist at level `i` is `τ_univ ∘ pr : E_{i+1} → K_{i+1} → K_i`
/// and needs the projection to be simplicial, so level `i+1` must be
/// untwisted unless it is the base.
pub fn eilenberg_maclane_tower(
    fibers: Vec<Arc<KSpace>>,
    base: SSet,
    base_k: Option<Arc<KSpace>>,
    kinds: &[TwistKind],
) -> ChainResult<Tower> {
    let m = fibers.len();
    if kinds.len() != m {
        return Err(ChainError::Invalid(format!("{m} fibers need {m} twists, got {}", kinds.len())));
    }
    let mut twists = Vec::with_capacity(m);
    for i in 0..m {
        let group: SGroup = fibers[i].clone();
        let tau = match kinds[i] {
            TwistKind::Trivial => TwistingOperator::trivial(group),
            TwistKind::Universal => {
                let next = if i + 1 < m {
                    if kinds[i + 1] != TwistKind::Trivial {
                        return Err(ChainError::Invalid(format!(
                            "a universal twist at level {i} needs an untwisted level {}",
                            i + 1
                        )));
                    }
                    fibers[i + 1].clone()
                } else {
                    base_k.clone().ok_or_else(|| {
                        ChainError::Invalid(format!("a universal twist at level {i} needs an Eilenberg–MacLane base"))
                    })?
                };
                let u = universal_twisting(fibers[i].clone(), next)?;
                if i + 1 < m {
                    u.precompose(u.label.clone(), Arc::new(|s: &AbstractSimplex| first_component(s)))
                } else {
                    u
                }
            }
        };
        twists.push(tau);
    }
    Tower::new(fibers.into_iter().map(|k| k as SGroup).collect(), base, twists)
}

/// Multidegree on `C_*(E_0)`: with `x′_j` the degeneracy degree of the
/// `E_j` component, `(x′_1 − x′_2, …, x′_{m−1} − x′_m, x′_m)`.
pub fn product_multidegree(m: usize) -> FiltrationAssignment {
    FiltrationAssignment::new(
        m,
        Arc::new(move |g: &Gen| {
            let geom = g.as_simplex().expect("simplex generator");
            let mut s = AbstractSimplex::nondegenerate(geom.clone());
            let mut deg = Vec::with_capacity(m);
            for _ in 0..m {
                s = second_component(&s);
                deg.push(s.degeneracy_degree() as i64);
            }
            let mut out: Point = (0..m - 1).map(|j| deg[j] - deg[j + 1]).collect();
            out.push(deg[m - 1]);
            out
        }),
    )
}

/// Multidegree of `g_0 ⊗ (g_1 ⊗ (… ⊗ b))`: `(|g_1|, …, |g_{m−1}|, |b|)`.
pub fn tensor_multidegree(m: usize) -> FiltrationAssignment {
    FiltrationAssignment::new(
        m,
        Arc::new(move |g: &Gen| {
            let mut out = Vec::with_capacity(m);
            let mut t = g;
            for j in 0..m {
                let (a, rest) = t.as_tensor().expect("tensor generator");
                if j > 0 {
                    out.push(a.dim() as i64);
                }
                t = rest;
            }
            out.push(t.dim() as i64);
            out
        }),
    )
}

/// One equivalence per factor `G_0, …, G_{m−1}, B`.
#[derive(Clone)]
pub struct TowerEquivalences {
    pub factors: Vec<Equivalence>,
}

impl TowerEquivalences {
    pub fn trivial(t: &Tower) -> Self {
        TowerEquivalences {
            factors: t.factors().into_iter().map(|x| Equivalence::trivial(&normalized_chain_complex(x))).collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.iter().all(|e| e.is_trivial())
    }
}

/// The reductions built by the pipeline.
pub struct Pipeline {
    /// `C_*(E_0) ⇒ C_*(G_0) ⊗_t (… ⊗_t C_*(B))`.
    pub reduction: Reduction,
    /// The effective bottom complex `D`.
    pub bottom: crate::chain::ChainComplex,
}

/// Builds `C_*(E_i) ⇒ C_*(G_i) ⊗_t (… ⊗_t C_*(B))` from the innermost level out.
fn tensor_levels(t: &Tower) -> ChainResult<Reduction> {
    let m = t.m();
    let mut rho = trivial_reduction(&normalized_chain_complex(t.base.clone()));
    for i in (0..m).rev() {
        let group = t.fibers[i].clone();
        let below = t.space(i + 1);
        let (tez, delta) = if t.twists[i].is_trivial() {
            let ez = ez_reduction(group.clone() as SSet, below);
            let z = Perturbation::zero(&ez.bottom);
            (ez, z)
        } else {
            twisted_ez_reduction(group.clone(), &t.twists[i], below)?
        };
        let id = trivial_reduction(&normalized_chain_complex(group as SSet));
        let second = tensor_reductions(&id, &rho);
        let (second, _) = bpl_with_budget(&second, &delta.retarget(&second.top), bpl_budget())?;
        rho = compose_reductions(&tez, &second.with_top(&tez.bottom))?.memoized();
    }
    Ok(rho)
}

fn nested_tensor(rs: &[Reduction]) -> Reduction {
    match rs {
        [last] => last.clone(),
        [first, rest @ ..] => tensor_reductions(first, &nested_tensor(rest)),
        [] => unreachable!("towers have at least two factors"),
    }
}

/// The pipeline: nested twisted Eilenberg–Zilber reductions, then transport
/// of the twisted tensor differential across the factor equivalences.
pub fn pipeline(t: &Tower, eq: &TowerEquivalences) -> ChainResult<Pipeline> {
    if eq.factors.len() != t.m() + 1 {
        return Err(ChainError::Invalid(format!("{} factor equivalences for {} factors", eq.factors.len(), t.m() + 1)));
    }
    let reduction = tensor_levels(t)?;
    if eq.is_trivial() {
        let bottom = reduction.bottom.clone();
        return Ok(Pipeline { reduction, bottom });
    }
    let lefts: Vec<Reduction> = eq.factors.iter().map(|e| e.left.clone()).collect();
    let rights: Vec<Reduction> = eq.factors.iter().map(|e| e.right.clone()).collect();
    let left = nested_tensor(&lefts);
    let delta = Perturbation::difference(&reduction.bottom, &left.bottom);
    let (_, lifted) = tpl(&left, &delta);
    let right = nested_tensor(&rights);
    let (right, _) = bpl_with_budget(&right, &lifted.retarget(&right.top), bpl_budget())?;
    Ok(Pipeline { reduction, bottom: right.bottom })
}

/// `D` with the tensor multidegree filtration.
pub fn effective_bottom(t: &Tower, eq: &TowerEquivalences, display_bound: i64) -> ChainResult<GenFilteredComplex> {
    let p = pipeline(t, eq)?;
    Ok(GenFilteredComplex::new(p.bottom, tensor_multidegree(t.m()), display_bound))
}

/// `C_*(E_0)` with the product multidegree filtration.
pub fn direct_complex(t: &Tower, display_bound: i64) -> GenFilteredComplex {
    GenFilteredComplex::new(normalized_chain_complex(t.total_space()), product_multidegree(t.m()), display_bound)
}

/// `S*(P;m)_n` of a filtered complex.
pub fn two_page_term(fc: &GenFilteredComplex, p: &[i64], n: i32) -> ChainResult<SpectralTerm> {
    let tuple = page_tuple_sstar(p, fc.m())?;
    fc.term(&tuple, n)
}

/// `H_{p_m}(B; H_{p_{m−1}}(G_{m−1}; … H_{p_0}(G_0)))` with `p_0 = n − |P|`.
pub fn coefficient_homology_oracle(t: &Tower, p: &[i64], n: i32) -> ChainResult<BasisDivisors<String>> {
    if p.len() != t.m() {
        return Err(ChainError::Invalid(format!("point of arity {} for a tower with m = {}", p.len(), t.m())));
    }
    let p0 = n as i64 - p.iter().sum::<i64>();
    if p0 < 0 || p.iter().any(|&x| x < 0) {
        return Ok(BasisDivisors { generators: Vec::new(), divisors: Vec::new() });
    }
    let degrees: Vec<i64> = std::iter::once(p0).chain(p.iter().copied()).collect();
    let mut coeffs = vec![BigInt::from(0)];
    let mut result = BasisDivisors { generators: Vec::new(), divisors: Vec::new() };
    for (x, d) in t.factors().into_iter().zip(degrees) {
        result = homology_with_coefficients(&normalized_chain_complex(x), d as i32, &coeffs)?;
        coeffs = result.divisors.clone();
    }
    Ok(result)
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub point: Point,
    pub degree: i32,
    pub direct: Vec<BigInt>,
    pub effective: Vec<BigInt>,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub compared: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ComparisonReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Points of `N^m` with `|P| ≤ bound`.
pub fn points_up_to(m: usize, bound: i64) -> Vec<Point> {
    grid(m, bound).filter(|p| p.iter().sum::<i64>() <= bound).collect()
}

/// Compares `S*(P;m)_n` on `C_*(E_0)` and on `D` for `|P|, n ≤ bound`.
pub fn direct_vs_effective_check(t: &Tower, eq: &TowerEquivalences, bound: i32) -> ChainResult<ComparisonReport> {
    let direct = direct_complex(t, bound as i64);
    let effective = effective_bottom(t, eq, bound as i64)?;
    compare_two_pages(&direct, &effective, bound)
}

/// Compares the 2-pages of two filtered complexes for `|P|, n ≤ bound`.
pub fn compare_two_pages(a: &GenFilteredComplex, b: &GenFilteredComplex, bound: i32) -> ChainResult<ComparisonReport> {
    let mut report = ComparisonReport { compared: 0, mismatches: Vec::new() };
    for n in 0..=bound {
        for p in points_up_to(a.m(), bound as i64) {
            let x = two_page_term(a, &p, n)?.group.divisors;
            let y = two_page_term(b, &p, n)?.group.divisors;
            report.compared += 1;
            if x != y {
                report.mismatches.push(Mismatch { point: p, degree: n, direct: x, effective: y });
            }
        }
    }
    Ok(report)
}
