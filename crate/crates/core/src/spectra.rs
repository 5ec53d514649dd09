//! Filtrations of chain complexes over `D(Z^m)` and the terms
//! `S[z,s,p,b]_n` of their spectral systems.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use parking_lot::Mutex;

use crate::chain::{ChainComplex, ChainError, ChainResult, Coeff, Combination, Gen};
use crate::exactlinalg::sparse::{accumulate, Echelon, SparseVec};
use crate::exactlinalg::{integer_kernel, subquotient, BasisDivisors, IntMatrix, SparseSubquotient};
use crate::poset::{downset_eq, downset_leq, DownSet, Point, TermTuple};

pub type MultidegreeFn = Arc<dyn Fn(&Gen) -> Point + Send + Sync>;

/// Multidegree of each generator, a point of `N^m`.
#[derive(Clone)]
pub struct FiltrationAssignment {
    pub m: usize,
    multidegree: MultidegreeFn,
}

impl FiltrationAssignment {
    pub fn new(m: usize, multidegree: MultidegreeFn) -> Self {
        FiltrationAssignment { m, multidegree }
    }

    pub fn multidegree(&self, g: &Gen) -> Point {
        (self.multidegree)(g)
    }
}

type Column = Vec<(u32, Coeff)>;

struct Block {
    point: Point,
    start: u32,
    len: u32,
}

/// Basis of one degree, grouped into blocks of equal multidegree.
struct DegreeData {
    gens: Vec<Gen>,
    blocks: Vec<Block>,
}

impl DegreeData {
    fn block_range(&self, b: usize) -> std::ops::Range<u32> {
        let bl = &self.blocks[b];
        bl.start..bl.start + bl.len
    }
}

/// Position of a generator relative to a tuple `(z, s, p, b)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Zone {
    Z,
    SminusZ,
    PminusS,
    BminusP,
    Outside,
}

fn zone(t: &TermTuple, x: &[i64]) -> Zone {
    if t.z.contains(x) {
        Zone::Z
    } else if t.s.contains(x) {
        Zone::SminusZ
    } else if t.p.contains(x) {
        Zone::PminusS
    } else if t.b.contains(x) {
        Zone::BminusP
    } else {
        Zone::Outside
    }
}

/// A chain complex with a multidegree filtration, caching per-degree block
/// structure and differential columns.
pub struct GenFilteredComplex {
    pub complex: ChainComplex,
    pub filtration: FiltrationAssignment,
    /// Box `[0, bound]^m` used to render downsets and to compare downsets
    /// whose inclusion is not decided symbolically.
    pub display_bound: i64,
    degrees: Mutex<HashMap<i32, Arc<DegreeData>>>,
    indices: Mutex<HashMap<i32, Arc<HashMap<Gen, u32>>>>,
    columns: Mutex<HashMap<(i32, usize), Arc<Vec<Column>>>>,
}

impl GenFilteredComplex {
    pub fn new(complex: ChainComplex, filtration: FiltrationAssignment, display_bound: i64) -> Self {
        GenFilteredComplex {
            complex,
            filtration,
            display_bound,
            degrees: Mutex::new(HashMap::new()),
            indices: Mutex::new(HashMap::new()),
            columns: Mutex::new(HashMap::new()),
        }
    }

    pub fn m(&self) -> usize {
        self.filtration.m
    }

    pub fn bound(&self) -> Option<(usize, i64)> {
        Some((self.m(), self.display_bound))
    }

    fn degree(&self, n: i32) -> ChainResult<Arc<DegreeData>> {
        if let Some(d) = self.degrees.lock().get(&n) {
            return Ok(d.clone());
        }
        let basis = self.complex.basis(n)?;
        let mut keyed: Vec<(Point, usize)> = Vec::with_capacity(basis.len());
        for (i, g) in basis.iter().enumerate() {
            let p = self.filtration.multidegree(g);
            if p.len() != self.m() || p.iter().any(|&x| x < 0) {
                return Err(ChainError::Invalid(format!("multidegree {p:?} of {g:?} is not a point of N^{}", self.m())));
            }
            keyed.push((p, i));
        }
        keyed.sort();
        let mut gens = Vec::with_capacity(keyed.len());
        let mut blocks: Vec<Block> = Vec::new();
        for (p, i) in keyed {
            if blocks.last().map_or(true, |b| b.point != p) {
                blocks.push(Block { point: p, start: gens.len() as u32, len: 0 });
            }
            blocks.last_mut().expect("block").len += 1;
            gens.push(basis[i].clone());
        }
        let d = Arc::new(DegreeData { gens, blocks });
        self.degrees.lock().insert(n, d.clone());
        Ok(d)
    }

    fn index(&self, n: i32) -> ChainResult<Arc<HashMap<Gen, u32>>> {
        if let Some(d) = self.indices.lock().get(&n) {
            return Ok(d.clone());
        }
        let data = self.degree(n)?;
        let idx: Arc<HashMap<Gen, u32>> =
            Arc::new(data.gens.iter().enumerate().map(|(i, g)| (g.clone(), i as u32)).collect());
        self.indices.lock().insert(n, idx.clone());
        Ok(idx)
    }

    fn column_of(&self, n: i32, g: &Gen, index: &HashMap<Gen, u32>) -> ChainResult<Column> {
        let dg = self.complex.differential(g)?;
        let mut col = Vec::with_capacity(dg.len());
        for (h, c) in dg.iter() {
            let i = index
                .get(h)
                .ok_or_else(|| ChainError::Invalid(format!("{h:?} in d({g:?}) is not a basis generator of degree {}", n - 1)))?;
            col.push((*i, c));
        }
        col.sort_unstable_by_key(|p| p.0);
        Ok(col)
    }

    fn columns(&self, n: i32, block: usize) -> ChainResult<Arc<Vec<Column>>> {
        if let Some(c) = self.columns.lock().get(&(n, block)) {
            return Ok(c.clone());
        }
        let data = self.degree(n)?;
        let index = self.index(n - 1)?;
        let mut out = Vec::with_capacity(data.blocks[block].len as usize);
        for i in data.block_range(block) {
            out.push(self.column_of(n, &data.gens[i as usize], &index)?);
        }
        let out = Arc::new(out);
        self.columns.lock().insert((n, block), out.clone());
        Ok(out)
    }

    /// Generators of degree `n` whose multidegree lies in `p`.
    pub fn filtration_basis(&self, p: &DownSet, n: i32) -> ChainResult<Vec<Gen>> {
        let data = self.degree(n)?;
        let mut out = Vec::new();
        for (b, bl) in data.blocks.iter().enumerate() {
            if p.contains(&bl.point) {
                out.extend(data.block_range(b).map(|i| data.gens[i as usize].clone()));
            }
        }
        Ok(out)
    }

    /// Generators of degree `n` whose boundary has a term of multidegree
    /// outside `T^m` of their own multidegree.
    pub fn check_compatibility(&self, max_degree: i32) -> ChainResult<Vec<String>> {
        let mut bad = Vec::new();
        for n in 1..=max_degree {
            let data = self.degree(n)?;
            let lower = self.degree(n - 1)?;
            let pos = point_lookup(&lower);
            for (b, bl) in data.blocks.iter().enumerate() {
                let t = DownSet::Lex { p: bl.point.clone(), k: self.m() };
                for (j, col) in self.columns(n, b)?.iter().enumerate() {
                    for (r, _) in col {
                        let q = &lower.blocks[pos[*r as usize]].point;
                        if !t.contains(q) {
                            let g = &data.gens[(bl.start as usize) + j];
                            bad.push(format!("d({g:?}) has a term of multidegree {q:?} ∉ T^m_{:?}", bl.point));
                        }
                    }
                }
            }
        }
        Ok(bad)
    }

    fn zones(&self, t: &TermTuple, n: i32) -> ChainResult<(Arc<DegreeData>, Vec<Zone>, Vec<Zone>)> {
        let data = self.degree(n)?;
        let per_block: Vec<Zone> = data.blocks.iter().map(|b| zone(t, &b.point)).collect();
        let mut per_row = Vec::with_capacity(data.gens.len());
        for (b, bl) in data.blocks.iter().enumerate() {
            per_row.extend(std::iter::repeat(per_block[b]).take(bl.len as usize));
        }
        Ok((data, per_block, per_row))
    }

    /// Whether `d` of a block at `x` provably stays inside `target`.
    fn block_maps_into(&self, x: &Point, target: &DownSet) -> bool {
        let t = DownSet::Lex { p: x.clone(), k: self.m() };
        matches!(downset_leq(&t, target, None), Ok(true))
    }

    fn to_combination(&self, n: i32, v: &SparseVec) -> ChainResult<Combination> {
        let data = self.degree(n)?;
        let mut terms = Vec::with_capacity(v.len());
        for (i, c) in v {
            let c = c.to_i64().ok_or_else(|| ChainError::Invalid(format!("coefficient {c} exceeds 64 bits")))?;
            terms.push((data.gens[*i as usize].clone(), c));
        }
        Combination::from_terms(n, terms)
    }

    fn to_sparse(&self, n: i32, c: &Combination) -> ChainResult<SparseVec> {
        let index = self.index(n)?;
        let mut v = Vec::with_capacity(c.len());
        for (g, k) in c.iter() {
            let i = index
                .get(g)
                .ok_or_else(|| ChainError::Invalid(format!("{g:?} is not a basis generator of degree {n}")))?;
            v.push((*i, BigInt::from(k)));
        }
        Ok(accumulate(v))
    }

    /// Coordinates in `term` of the class of a cycle `c`, or `None` when
    /// `c` does not represent an element of the term.
    pub fn class_coordinates(&self, term: &SpectralTerm, c: &Combination) -> ChainResult<Option<Vec<BigInt>>> {
        let (_, _, zones) = self.zones(&term.tuple, term.degree)?;
        let mut v = Vec::new();
        for (r, x) in self.to_sparse(term.degree, c)? {
            match zones[r as usize] {
                Zone::Z | Zone::SminusZ => {}
                Zone::PminusS => v.push((r, x)),
                _ => return Ok(None),
            }
        }
        Ok(term.quotient.coordinates(v))
    }

    /// `d` of a vector of degree `n`, as a vector of degree `n − 1`.
    fn apply_d(&self, n: i32, v: &SparseVec) -> ChainResult<SparseVec> {
        let data = self.degree(n)?;
        let index = self.index(n - 1)?;
        let mut out = Vec::new();
        for (i, c) in v {
            for (r, x) in self.column_of(n, &data.gens[*i as usize], &index)? {
                out.push((r, c * BigInt::from(x)));
            }
        }
        Ok(accumulate(out))
    }

    /// `S[z,s,p,b]_n`.
    pub fn term(&self, t: &TermTuple, n: i32) -> ChainResult<SpectralTerm> {
        let not_filtration = |what: &str| {
            ChainError::Invalid(format!("d does not respect the filtration ({what}) for {t:?} in degree {n}"))
        };
        let (data_n, blocks_n, zone_n) = self.zones(t, n)?;
        let (_, _, zone_lo) = self.zones(t, n - 1)?;

        // Numerator: π{x ∈ F_p C_n : dx ∈ F_z}, where π forgets F_s.
        let mut l = Echelon::new(false);
        for (b, bl) in data_n.blocks.iter().enumerate() {
            if blocks_n[b] > Zone::SminusZ || self.block_maps_into(&bl.point, &t.z) {
                continue;
            }
            for col in self.columns(n, b)?.iter() {
                let mut v = Vec::new();
                for &(r, c) in col {
                    match zone_lo[r as usize] {
                        Zone::Z => {}
                        Zone::SminusZ => v.push((r, BigInt::from(c))),
                        _ => return Err(not_filtration("d(F_s) ⊄ F_s")),
                    }
                }
                if !v.is_empty() {
                    l.insert(v);
                }
            }
        }
        let mut r_rows: Vec<u32> = Vec::new();
        let mut k = Echelon::new(true);
        for (b, bl) in data_n.blocks.iter().enumerate() {
            if blocks_n[b] != Zone::PminusS {
                continue;
            }
            for (j, col) in self.columns(n, b)?.iter().enumerate() {
                let mut v = Vec::new();
                for &(r, c) in col {
                    match zone_lo[r as usize] {
                        Zone::Z => {}
                        Zone::SminusZ | Zone::PminusS => v.push((r, BigInt::from(c))),
                        _ => return Err(not_filtration("d(F_p) ⊄ F_p")),
                    }
                }
                r_rows.push(bl.start + j as u32);
                k.insert(l.reduce_by_units(v));
            }
        }
        let nr = r_rows.len() as u32;
        for v in l.residual_basis() {
            k.insert(v);
        }
        let numerator: Vec<SparseVec> = k
            .take_kernel()
            .into_iter()
            .map(|tag| tag.into_iter().filter(|(i, _)| *i < nr).map(|(i, c)| (r_rows[i as usize], c)).collect::<SparseVec>())
            .filter(|v| !v.is_empty())
            .collect();

        // Denominator: π d(F_b C_{n+1}) ∩ Z^{p∖s}.
        let zone_arc = Arc::new(zone_n.clone());
        let pri = zone_arc.clone();
        let mut e_den = Echelon::new(false).with_priority(move |r| if pri[r as usize] == Zone::BminusP { 0 } else { 1 });
        if !numerator.is_empty() {
            let (data_hi, blocks_hi, _) = self.zones(t, n + 1)?;
            for (b, bl) in data_hi.blocks.iter().enumerate() {
                if blocks_hi[b] > Zone::BminusP || self.block_maps_into(&bl.point, &t.s) {
                    continue;
                }
                for col in self.columns(n + 1, b)?.iter() {
                    let mut v = Vec::new();
                    for &(r, c) in col {
                        match zone_n[r as usize] {
                            Zone::Z | Zone::SminusZ => {}
                            Zone::PminusS | Zone::BminusP => v.push((r, BigInt::from(c))),
                            Zone::Outside => return Err(not_filtration("d(F_b) ⊄ F_b")),
                        }
                    }
                    if !v.is_empty() {
                        e_den.insert(v);
                    }
                }
            }
        }
        let denominator = e_den.intersect_coordinate_subspace(|r| zone_arc[r as usize] == Zone::BminusP);
        let quotient = SparseSubquotient::new(numerator.clone(), denominator.clone());
        let group = BasisDivisors {
            generators: quotient
                .group()
                .generators
                .iter()
                .map(|v| self.to_combination(n, v))
                .collect::<ChainResult<Vec<_>>>()?,
            divisors: quotient.divisors().to_vec(),
        };
        Ok(SpectralTerm {
            tuple: t.clone(),
            degree: n,
            group,
            numerator_lattice: numerator,
            denominator_lattice: denominator,
            quotient: Arc::new(quotient),
        })
    }

    /// `H_n` of the whole complex: `S[∅, ∅, Z^m, Z^m]_n`.
    pub fn final_group(&self, n: i32) -> ChainResult<SpectralTerm> {
        let t = TermTuple { z: DownSet::Empty, s: DownSet::Empty, p: DownSet::Full, b: DownSet::Full };
        self.term(&t, n)
    }

    /// The class `d[x]` in `to`, for the class in `from` with the given
    /// coordinates. Requires `z₂ ⊆ p₁` and `s₂ ⊆ b₁`.
    pub fn term_differential(&self, from: &SpectralTerm, to: &SpectralTerm, coords: &[BigInt]) -> ChainResult<Vec<BigInt>> {
        let n = from.degree;
        self.check_legal(from, to)?;
        let gens = &from.quotient.group().generators;
        if coords.len() != gens.len() {
            return Err(ChainError::Invalid(format!("{} coordinates for a group with {} generators", coords.len(), gens.len())));
        }
        let mut y = Vec::new();
        for (c, g) in coords.iter().zip(gens) {
            if !c.is_zero() {
                y.extend(g.iter().map(|(r, x)| (*r, x * c)));
            }
        }
        let y = accumulate(y);
        if y.is_empty() {
            return Ok(vec![BigInt::zero(); to.group.divisors.len()]);
        }

        // Lift: add w ∈ F_{s₂} with d(y + w) ∈ F_{z₂}.
        let (_, _, zone_lo) = self.zones(&from.tuple, n - 1)?;
        let dy = self.apply_d(n, &y)?;
        let outside: SparseVec = dy.iter().filter(|(r, _)| zone_lo[*r as usize] != Zone::Z).map(|(r, c)| (*r, -c)).collect();
        let mut dx = dy;
        if !outside.is_empty() {
            let (data_n, blocks_n, _) = self.zones(&from.tuple, n)?;
            let mut e = Echelon::new(true);
            let mut sources = Vec::new();
            for (b, _) in data_n.blocks.iter().enumerate() {
                if blocks_n[b] > Zone::SminusZ {
                    continue;
                }
                for (j, col) in self.columns(n, b)?.iter().enumerate() {
                    sources.push(data_n.blocks[b].start + j as u32);
                    e.insert(
                        col.iter()
                            .filter(|(r, _)| zone_lo[*r as usize] != Zone::Z)
                            .map(|&(r, c)| (r, BigInt::from(c)))
                            .collect(),
                    );
                }
            }
            let tag = e.solve(outside).ok_or_else(|| {
                ChainError::Invalid(format!("class in {:?} has no lift with boundary in z", from.tuple))
            })?;
            let w: SparseVec = accumulate(tag.into_iter().map(|(i, c)| (sources[i as usize], c)).collect());
            let dw = self.apply_d(n, &w)?;
            let mut all = dx;
            all.extend(dw);
            dx = accumulate(all);
        }

        let (_, _, zone_to) = self.zones(&to.tuple, n - 1)?;
        let mut v = Vec::new();
        for (r, c) in dx {
            match zone_to[r as usize] {
                Zone::Z | Zone::SminusZ => {}
                Zone::PminusS => v.push((r, c)),
                _ => return Err(ChainError::Invalid("boundary of the lift escapes p₁".into())),
            }
        }
        to.quotient
            .coordinates(v)
            .ok_or_else(|| ChainError::Invalid(format!("image does not lie in the numerator of {:?}", to.tuple)))
    }

    fn check_legal(&self, from: &SpectralTerm, to: &SpectralTerm) -> ChainResult<()> {
        if to.degree != from.degree - 1 {
            return Err(ChainError::DegreeMismatch { expected: from.degree - 1, found: to.degree });
        }
        if !downset_leq(&from.tuple.z, &to.tuple.p, self.bound())? || !downset_leq(&from.tuple.s, &to.tuple.b, self.bound())?
        {
            return Err(ChainError::Invalid(format!(
                "no differential from {:?} to {:?}: needs z₂ ⊆ p₁ and s₂ ⊆ b₁",
                from.tuple, to.tuple
            )));
        }
        Ok(())
    }

    /// Matrix of the induced differential: column `j` is the image of generator `j`.
    pub fn differential_matrix(&self, from: &SpectralTerm, to: &SpectralTerm) -> ChainResult<Vec<Vec<BigInt>>> {
        self.check_legal(from, to)?;
        let k = from.group.divisors.len();
        (0..k)
            .map(|j| {
                let mut e = vec![BigInt::zero(); k];
                e[j] = BigInt::from(1);
                self.term_differential(from, to, &e)
            })
            .collect()
    }

    /// `(S[s₁,s₂,p₂,b₂]_n, S[z₁,s₁,p₁,p₂]_{n−1})`, the kernel and cokernel
    /// of `S[z₂,s₂,p₂,b₂]_n → S[z₁,s₁,p₁,b₁]_{n−1}` when `z₂ = p₁`, `s₂ = b₁`.
    pub fn kernel_and_cokernel_terms(&self, from: &TermTuple, to: &TermTuple, n: i32) -> ChainResult<(SpectralTerm, SpectralTerm)> {
        if !downset_eq(&from.z, &to.p, self.bound())? || !downset_eq(&from.s, &to.b, self.bound())? {
            return Err(ChainError::Invalid("kernel and cokernel terms need z₂ = p₁ and s₂ = b₁".into()));
        }
        let bound = self.bound();
        let ker = TermTuple::new(to.s.clone(), from.s.clone(), from.p.clone(), from.b.clone(), bound)?;
        let coker = TermTuple::new(to.z.clone(), to.s.clone(), to.p.clone(), from.p.clone(), bound)?;
        Ok((self.term(&ker, n)?, self.term(&coker, n - 1)?))
    }

    /// Homology at the middle of `S₃ → S₂ → S₁` (degrees `n+1, n, n−1`),
    /// against `S[s₁,s₂,p₂,p₃]_n`.
    pub fn homology_of_sequence_check(
        &self,
        t3: &TermTuple,
        t2: &TermTuple,
        t1: &TermTuple,
        n: i32,
    ) -> ChainResult<SequenceReport> {
        let bound = self.bound();
        if !downset_eq(&t3.z, &t2.p, bound)?
            || !downset_eq(&t3.s, &t2.b, bound)?
            || !downset_eq(&t2.z, &t1.p, bound)?
            || !downset_eq(&t2.s, &t1.b, bound)?
        {
            return Err(ChainError::Invalid("tuples do not form a homology-of-sequence pattern".into()));
        }
        let s3 = self.term(t3, n + 1)?;
        let s2 = self.term(t2, n)?;
        let s1 = self.term(t1, n - 1)?;
        let m_in = self.differential_matrix(&s3, &s2)?;
        let m_out = self.differential_matrix(&s2, &s1)?;
        let computed = induced_homology(&s2.group.divisors, &s1.group.divisors, &m_in, &m_out);
        let mid = TermTuple::new(t1.s.clone(), t2.s.clone(), t2.p.clone(), t3.p.clone(), bound)?;
        let expected = self.term(&mid, n)?.group.divisors;
        Ok(SequenceReport { ok: computed == expected, computed, expected })
    }
}

fn point_lookup(data: &DegreeData) -> Vec<usize> {
    let mut out = Vec::with_capacity(data.gens.len());
    for (b, bl) in data.blocks.iter().enumerate() {
        out.extend(std::iter::repeat(b).take(bl.len as usize));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceReport {
    pub computed: Vec<BigInt>,
    pub expected: Vec<BigInt>,
    pub ok: bool,
}

/// A term `S[z,s,p,b]_n` with the data needed to compute differentials.
#[derive(Clone)]
pub struct SpectralTerm {
    pub tuple: TermTuple,
    pub degree: i32,
    pub group: BasisDivisors<Combination>,
    /// Generators of the numerator after projecting away `F_s`.
    pub numerator_lattice: Vec<SparseVec>,
    /// Generators of the projected denominator.
    pub denominator_lattice: Vec<SparseVec>,
    quotient: Arc<SparseSubquotient>,
}

impl std::fmt::Debug for SpectralTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SpectralTerm({:?}, n={}, divisors={:?})", self.tuple, self.degree, self.group.divisors)
    }
}

impl SpectralTerm {
    pub fn divisors(&self) -> &[BigInt] {
        &self.group.divisors
    }
}

/// Divisors of `ker M / im M'` for `A₃ →M' A₂ →M A₁`, where each `A_i` is
/// presented by its divisors and the maps by coordinate matrices (one
/// column per source generator).
pub fn induced_homology(a2: &[BigInt], a1: &[BigInt], m_in: &[Vec<BigInt>], m_out: &[Vec<BigInt>]) -> Vec<BigInt> {
    let k2 = a2.len();
    let k1 = a1.len();
    if k2 == 0 {
        return Vec::new();
    }
    // ker: c with M c ∈ ⊕ a₁ Z.
    let mut cols: Vec<Vec<BigInt>> = m_out.to_vec();
    for (i, a) in a1.iter().enumerate() {
        if !a.is_zero() {
            let mut e = vec![BigInt::zero(); k1];
            e[i] = -a;
            cols.push(e);
        }
    }
    let kernel: Vec<Vec<BigInt>> = if k1 == 0 {
        (0..k2).map(|j| unit_vec(k2, j)).collect()
    } else {
        let mat = IntMatrix::from_columns(k1, &cols).expect("consistent dimensions");
        integer_kernel(&mat).into_iter().map(|v| v[..k2].to_vec()).collect()
    };
    let mut den: Vec<Vec<BigInt>> = m_in.to_vec();
    for (i, a) in a2.iter().enumerate() {
        if !a.is_zero() {
            let mut e = vec![BigInt::zero(); k2];
            e[i] = a.clone();
            den.push(e);
        }
    }
    subquotient(&kernel, &den, k2).expect("consistent dimensions").divisors().to_vec()
}

fn unit_vec(n: usize, j: usize) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); n];
    e[j] = BigInt::from(1);
    e
}
