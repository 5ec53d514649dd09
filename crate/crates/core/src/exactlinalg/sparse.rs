//! Incremental integer echelon form for sparse vectors.
//!
//! Boundary matrices of simplicial complexes are overwhelmingly made of ±1
//! entries, so most pivots can be chosen to be units. Unit pivots are kept
//! fully reduced (every other stored vector vanishes on a unit pivot row);
//! the few vectors without a unit entry form a small Hermite-style residual
//! block that is handled with gcd steps.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type SparseVec = Vec<(u32, BigInt)>;

/// Sums duplicate indices and drops zeros.
pub fn accumulate(mut pairs: Vec<(u32, BigInt)>) -> SparseVec {
    pairs.sort_unstable_by_key(|p| p.0);
    let mut out: SparseVec = Vec::with_capacity(pairs.len());
    for (i, x) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += x,
            _ => {
                if let Some(last) = out.last() {
                    if last.1.is_zero() {
                        out.pop();
                    }
                }
                out.push((i, x));
            }
        }
    }
    if out.last().is_some_and(|l| l.1.is_zero()) {
        out.pop();
    }
    out
}

/// `a + k·b`
pub fn axpy(a: &SparseVec, k: &BigInt, b: &SparseVec) -> SparseVec {
    if k.is_zero() || b.is_empty() {
        return a.clone();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, k * &b[j].1));
            j += 1;
        } else {
            let x = &a[i].1 + k * &b[j].1;
            if !x.is_zero() {
                out.push((a[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale(a: &SparseVec, k: &BigInt) -> SparseVec {
    if k.is_zero() {
        return Vec::new();
    }
    a.iter().map(|(i, x)| (*i, x * k)).collect()
}

pub fn lookup<'a>(v: &'a SparseVec, row: u32) -> Option<&'a BigInt> {
    v.binary_search_by_key(&row, |p| p.0).ok().map(|i| &v[i].1)
}

pub fn to_dense(v: &SparseVec, n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in v {
        out[*i as usize] = x.clone();
    }
    out
}

pub fn from_dense(v: &[BigInt]) -> SparseVec {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i as u32, x.clone())).collect()
}

#[derive(Clone, Debug)]
struct Entry {
    v: SparseVec,
    tag: SparseVec,
    pivot: u32,
}

/// Lattice spanned by inserted vectors, maintained in a unit-reduced
/// echelon form. With tagging enabled every stored vector remembers its
/// expression in the inserted vectors, and inserted vectors that reduce to
/// zero yield a basis of the relation module.
pub struct Echelon {
    tagged: bool,
    priority: Option<Box<dyn Fn(u32) -> u8 + Send + Sync>>,
    units: Vec<Entry>,
    pivot_of: HashMap<u32, usize>,
    residual: BTreeMap<u32, Entry>,
    kernel: Vec<SparseVec>,
    inserted: usize,
}

impl Default for Echelon {
    fn default() -> Self {
        Self::new(false)
    }
}

impl Echelon {
    pub fn new(tagged: bool) -> Self {
        Echelon {
            tagged,
            priority: None,
            units: Vec::new(),
            pivot_of: HashMap::new(),
            residual: BTreeMap::new(),
            kernel: Vec::new(),
            inserted: 0,
        }
    }

    /// Unit pivots are chosen minimizing `(priority(row), row)`.
    pub fn with_priority(mut self, f: impl Fn(u32) -> u8 + Send + Sync + 'static) -> Self {
        self.priority = Some(Box::new(f));
        self
    }

    pub fn rank(&self) -> usize {
        self.units.len() + self.residual.len()
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn is_unit_pivot(&self, row: u32) -> bool {
        self.pivot_of.contains_key(&row)
    }

    pub fn insert(&mut self, v: SparseVec) {
        let tag = if self.tagged { vec![(self.inserted as u32, BigInt::one())] } else { Vec::new() };
        self.inserted += 1;
        self.insert_entry(accumulate(v), tag);
    }

    /// Relations among inserted vectors found so far (only with tagging).
    pub fn kernel(&self) -> &[SparseVec] {
        &self.kernel
    }

    pub fn take_kernel(&mut self) -> Vec<SparseVec> {
        std::mem::take(&mut self.kernel)
    }

    /// A basis of the lattice, with tags.
    pub fn basis_with_tags(&self) -> Vec<(SparseVec, SparseVec)> {
        self.units
            .iter()
            .chain(self.residual.values())
            .map(|e| (e.v.clone(), e.tag.clone()))
            .collect()
    }

    /// Basis vectors with tags and, for unit vectors, their pivot row.
    pub fn basis_with_pivots(&self) -> Vec<(SparseVec, SparseVec, Option<u32>)> {
        self.units
            .iter()
            .map(|e| (e.v.clone(), e.tag.clone(), Some(e.pivot)))
            .chain(self.residual.values().map(|e| (e.v.clone(), e.tag.clone(), None)))
            .collect()
    }

    pub fn basis(&self) -> Vec<SparseVec> {
        self.units.iter().chain(self.residual.values()).map(|e| e.v.clone()).collect()
    }

    /// Basis vectors without a unit pivot; they vanish on all unit pivot rows.
    pub fn residual_basis(&self) -> Vec<SparseVec> {
        self.residual.values().map(|e| e.v.clone()).collect()
    }

    fn choose_unit(&self, v: &SparseVec) -> Option<(u32, bool)> {
        let mut best: Option<(u8, u32, bool)> = None;
        for (r, x) in v {
            if x.magnitude().is_one() {
                let p = self.priority.as_ref().map_or(0, |f| f(*r));
                if best.as_ref().map_or(true, |b| (p, *r) < (b.0, b.1)) {
                    best = Some((p, *r, x.is_negative()));
                }
            }
        }
        best.map(|(_, r, neg)| (r, neg))
    }

    /// Subtracts unit pivot vectors so the result vanishes on pivot rows.
    fn reduce_units(&self, v: SparseVec, tag: SparseVec) -> (SparseVec, SparseVec) {
        let hits: Vec<(usize, BigInt)> =
            v.iter().filter_map(|(r, x)| self.pivot_of.get(r).map(|&i| (i, x.clone()))).collect();
        if hits.is_empty() {
            return (v, tag);
        }
        if hits.len() == 1 {
            let (i, c) = &hits[0];
            let e = &self.units[*i];
            let nv = axpy(&v, &-c, &e.v);
            let nt = if self.tagged { axpy(&tag, &-c, &e.tag) } else { tag };
            return (nv, nt);
        }
        let mut pairs = v;
        let mut tpairs = tag;
        for (i, c) in &hits {
            let e = &self.units[*i];
            let k = -c;
            pairs.extend(e.v.iter().map(|(r, x)| (*r, x * &k)));
            if self.tagged {
                tpairs.extend(e.tag.iter().map(|(r, x)| (*r, x * &k)));
            }
        }
        let tag = if self.tagged { accumulate(tpairs) } else { tpairs };
        (accumulate(pairs), tag)
    }

    fn insert_entry(&mut self, v: SparseVec, tag: SparseVec) {
        let (mut v, mut tag) = self.reduce_units(v, tag);
        loop {
            if v.is_empty() {
                if self.tagged {
                    self.kernel.push(tag);
                }
                return;
            }
            if let Some((r, neg)) = self.choose_unit(&v) {
                if neg {
                    v = scale(&v, &-BigInt::one());
                    tag = scale(&tag, &-BigInt::one());
                }
                self.add_unit(r, v, tag);
                return;
            }
            let lead = v[0].0;
            let Some(w) = self.residual.remove(&lead) else {
                if v[0].1.is_negative() {
                    v = scale(&v, &-BigInt::one());
                    tag = scale(&tag, &-BigInt::one());
                }
                self.residual.insert(lead, Entry { v, tag, pivot: lead });
                return;
            };
            let a = v[0].1.clone();
            let b = w.v[0].1.clone();
            if a.is_multiple_of(&b) {
                let q = -(&a / &b);
                v = axpy(&v, &q, &w.v);
                if self.tagged {
                    tag = axpy(&tag, &q, &w.tag);
                }
                self.residual.insert(lead, w);
                continue;
            }
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y); // x a + y b = g
            let (ag, bg) = (&a / &g, &b / &g);
            let mut new_w = axpy(&scale(&v, &x), &y, &w.v);
            let mut new_wt = if self.tagged { axpy(&scale(&tag, &x), &y, &w.tag) } else { Vec::new() };
            let new_v = axpy(&scale(&w.v, &ag), &-&bg, &v);
            let new_vt = if self.tagged { axpy(&scale(&w.tag, &ag), &-&bg, &tag) } else { Vec::new() };
            if new_w[0].1.is_negative() {
                new_w = scale(&new_w, &-BigInt::one());
                new_wt = scale(&new_wt, &-BigInt::one());
            }
            if let Some((r, neg)) = self.choose_unit(&new_w) {
                if neg {
                    new_w = scale(&new_w, &-BigInt::one());
                    new_wt = scale(&new_wt, &-BigInt::one());
                }
                self.add_unit(r, new_w, new_wt);
                let (rv, rt) = self.reduce_units(new_v, new_vt);
                v = rv;
                tag = rt;
            } else {
                self.residual.insert(lead, Entry { v: new_w, tag: new_wt, pivot: lead });
                v = new_v;
                tag = new_vt;
            }
        }
    }

    /// Installs `v` (with entry 1 at `r`, vanishing on existing pivot rows)
    /// as a unit pivot and clears row `r` from every other stored vector.
    fn add_unit(&mut self, r: u32, v: SparseVec, tag: SparseVec) {
        for e in self.units.iter_mut() {
            if let Some(c) = lookup(&e.v, r) {
                let k = -c.clone();
                e.v = axpy(&e.v, &k, &v);
                if self.tagged {
                    e.tag = axpy(&e.tag, &k, &tag);
                }
            }
        }
        let affected: Vec<u32> =
            self.residual.iter().filter(|(_, e)| lookup(&e.v, r).is_some()).map(|(k, _)| *k).collect();
        let mut moved = Vec::with_capacity(affected.len());
        for k in affected {
            let e = self.residual.remove(&k).expect("residual entry");
            let c = -lookup(&e.v, r).expect("entry at pivot row").clone();
            let nv = axpy(&e.v, &c, &v);
            let nt = if self.tagged { axpy(&e.tag, &c, &tag) } else { Vec::new() };
            moved.push((nv, nt));
        }
        self.pivot_of.insert(r, self.units.len());
        self.units.push(Entry { v, tag, pivot: r });
        for (nv, nt) in moved {
            self.insert_entry(nv, nt);
        }
    }

    /// Remainder of `x` after clearing the unit pivot rows.
    pub fn reduce_by_units(&self, x: SparseVec) -> SparseVec {
        self.reduce_units(accumulate(x), Vec::new()).0
    }

    /// Whether `x` lies in the lattice.
    pub fn contains(&self, x: SparseVec) -> bool {
        self.solve_inner(x, false).is_some()
    }

    /// Expresses `x` as an integer combination of the inserted vectors
    /// (requires tagging).
    pub fn solve(&self, x: SparseVec) -> Option<SparseVec> {
        assert!(self.tagged, "solve requires a tagged echelon");
        self.solve_inner(x, true)
    }

    fn solve_inner(&self, x: SparseVec, want_tag: bool) -> Option<SparseVec> {
        let x = accumulate(x);
        let mut acc: Vec<(u32, BigInt)> = Vec::new();
        let hits: Vec<(usize, BigInt)> =
            x.iter().filter_map(|(r, c)| self.pivot_of.get(r).map(|&i| (i, c.clone()))).collect();
        let mut v = x;
        if !hits.is_empty() {
            let mut pairs = v;
            for (i, c) in &hits {
                let e = &self.units[*i];
                pairs.extend(e.v.iter().map(|(r, y)| (*r, -(y * c))));
                if want_tag {
                    acc.extend(e.tag.iter().map(|(r, y)| (*r, y * c)));
                }
            }
            v = accumulate(pairs);
        }
        while let Some((lead, a)) = v.first().cloned() {
            let w = self.residual.get(&lead)?;
            let b = &w.v[0].1;
            if !a.is_multiple_of(b) {
                return None;
            }
            let q = &a / b;
            v = axpy(&v, &-&q, &w.v);
            if want_tag {
                acc.extend(w.tag.iter().map(|(r, y)| (*r, y * &q)));
            }
        }
        Some(accumulate(acc))
    }

    /// Generators of `L ∩ {x : x_r = 0 for every r with forbidden(r)}`.
    pub fn intersect_coordinate_subspace(&self, forbidden: impl Fn(u32) -> bool) -> Vec<SparseVec> {
        let mut out = Vec::new();
        let mut touching: Vec<&SparseVec> = Vec::new();
        let kept_units = self.units.iter().filter(|e| !forbidden(e.pivot));
        for e in kept_units.chain(self.residual.values()) {
            if e.v.iter().any(|(r, _)| forbidden(*r)) {
                touching.push(&e.v);
            } else {
                out.push(e.v.clone());
            }
        }
        if touching.is_empty() {
            return out;
        }
        let mut rel = Echelon::new(true);
        for v in &touching {
            rel.insert(v.iter().filter(|(r, _)| forbidden(*r)).cloned().collect());
        }
        for k in rel.take_kernel() {
            let mut pairs = Vec::new();
            for (j, c) in &k {
                pairs.extend(touching[*j as usize].iter().map(|(r, x)| (*r, x * c)));
            }
            let v = accumulate(pairs);
            if !v.is_empty() {
                out.push(v);
            }
        }
        out
    }
}

/// Basis of the integer kernel of the matrix with the given sparse columns,
/// as sparse vectors indexed by column.
pub fn sparse_kernel(columns: impl IntoIterator<Item = SparseVec>) -> Vec<SparseVec> {
    let mut e = Echelon::new(true);
    for c in columns {
        e.insert(c);
    }
    e.take_kernel()
}
