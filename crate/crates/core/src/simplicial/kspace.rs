//! `K(Z/ℓ, n)` as the `n`-fold classifying space `W̄ⁿ` of the constant
//! simplicial group `Z/ℓ`.
//!
//! A simplex of `W̄G` in dimension `k` is a tuple `(g_{k−1}, …, g_0)` with
//! `g_j ∈ G_j`, so a `k`-simplex of `W̄ⁿ(Z/ℓ)` is a digit vector of length
//! `C(k, n)`. Faces and degeneracies are linear in the digits and are
//! tabulated once per (level, dimension, index). The exposed structure is
//! the opposite simplicial set (`∂'_i = ∂_{k−i}`, `η'_i = η_{k−i}`), so
//! that twisting happens at the last face.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;
use smallvec::SmallVec;

use super::{AbstractSimplex, DegenWord, Digits, Geom, SimplicialGroup, SimplicialSet, TwistingOperator};
use crate::chain::{ChainError, ChainResult};

type DigitVec = SmallVec<[u8; 24]>;
type Sym = SmallVec<[u32; 2]>;

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Offset and length of the block `g_j` inside a level-`l` simplex of dimension `k`.
fn block(l: usize, k: usize, j: usize) -> (usize, usize) {
    let off: usize = (j + 1..k).map(|t| binomial(t, l - 1)).sum();
    (off, binomial(j, l - 1))
}

fn face_sym(l: usize, k: usize, i: usize, x: &[Sym]) -> Vec<Sym> {
    if l == 0 {
        return x.to_vec();
    }
    let g = |j: usize| {
        let (o, n) = block(l, k, j);
        &x[o..o + n]
    };
    let mut out = Vec::new();
    if i == 0 {
        for j in (0..k - 1).rev() {
            out.extend_from_slice(g(j));
        }
        return out;
    }
    for t in 1..i {
        let j = k - t;
        out.extend(face_sym(l - 1, j, i - t, g(j)));
    }
    if i < k {
        let j = k - i;
        let a = face_sym(l - 1, j, 0, g(j));
        for (u, v) in a.into_iter().zip(g(j - 1)) {
            let mut s = u;
            s.extend_from_slice(v);
            out.push(s);
        }
        for jj in (0..j - 1).rev() {
            out.extend_from_slice(g(jj));
        }
    }
    out
}

fn degen_sym(l: usize, k: usize, i: usize, x: &[Sym]) -> Vec<Sym> {
    if l == 0 {
        return x.to_vec();
    }
    let g = |j: usize| {
        let (o, n) = block(l, k, j);
        &x[o..o + n]
    };
    let mut out = Vec::new();
    for t in 0..i {
        let j = k - 1 - t;
        out.extend(degen_sym(l - 1, j, i - 1 - t, g(j)));
    }
    out.extend(std::iter::repeat_with(Sym::new).take(binomial(k - i, l - 1)));
    for j in (0..k - i).rev() {
        out.extend_from_slice(g(j));
    }
    out
}

/// Each output digit as the list of input digits summed into it.
struct FaceTable(Vec<Sym>);
/// Each output digit as a copied input digit or zero.
struct DegenTable(Vec<Option<u32>>);

type TableKey = (usize, usize, usize);

fn face_table(l: usize, k: usize, i: usize) -> Arc<FaceTable> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<FaceTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().get(&(l, k, i)) {
        return t.clone();
    }
    let input: Vec<Sym> = (0..binomial(k, l) as u32).map(|d| SmallVec::from_slice(&[d])).collect();
    let t = Arc::new(FaceTable(face_sym(l, k, i, &input)));
    debug_assert_eq!(t.0.len(), binomial(k - 1, l));
    cache.lock().insert((l, k, i), t.clone());
    t
}

fn degen_table(l: usize, k: usize, i: usize) -> Arc<DegenTable> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<DegenTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().get(&(l, k, i)) {
        return t.clone();
    }
    let input: Vec<Sym> = (0..binomial(k, l) as u32).map(|d| SmallVec::from_slice(&[d])).collect();
    let syms = degen_sym(l, k, i, &input);
    debug_assert_eq!(syms.len(), binomial(k + 1, l));
    let t = Arc::new(DegenTable(
        syms.into_iter()
            .map(|s| {
                assert!(s.len() <= 1, "degeneracies copy digits");
                s.first().copied()
            })
            .collect(),
    ));
    cache.lock().insert((l, k, i), t.clone());
    t
}

/// Enumeration of nondegenerate simplices is refused above this many digit vectors.
const ENUMERATION_LIMIT: u64 = 1 << 26;

/// The Eilenberg–MacLane space `K(Z/ℓ, n)` for `n ≥ 1`.
pub struct KSpace {
    modulus: u8,
    degree: usize,
    nondegenerate: Mutex<HashMap<usize, Arc<Vec<Geom>>>>,
}

impl std::fmt::Debug for KSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

pub fn eilenberg_maclane(modulus: u32, degree: u32) -> ChainResult<Arc<KSpace>> {
    if !(2..=255).contains(&modulus) {
        return Err(ChainError::Invalid(format!("modulus {modulus} outside 2..=255")));
    }
    if degree == 0 {
        return Err(ChainError::Invalid("K(Z/ℓ, 0) is not supported; degree must be at least 1".into()));
    }
    Ok(Arc::new(KSpace { modulus: modulus as u8, degree: degree as usize, nondegenerate: Mutex::new(HashMap::new()) }))
}

impl KSpace {
    pub fn modulus(&self) -> u32 {
        self.modulus as u32
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of digits of a `k`-simplex.
    pub fn width(&self, k: usize) -> usize {
        binomial(k, self.degree)
    }

    pub fn flat_face(&self, k: usize, i: usize, x: &[u8]) -> DigitVec {
        let t = face_table(self.degree, k, k - i);
        let m = self.modulus as u32;
        t.0.iter().map(|s| (s.iter().map(|&d| x[d as usize] as u32).sum::<u32>() % m) as u8).collect()
    }

    pub fn flat_degeneracy(&self, k: usize, i: usize, x: &[u8]) -> DigitVec {
        let t = degen_table(self.degree, k, k - i);
        t.0.iter().map(|s| s.map_or(0, |d| x[d as usize])).collect()
    }

    fn is_image_of_degeneracy(&self, k: usize, j: usize, x: &[u8]) -> bool {
        let f = self.flat_face(k, j, x);
        self.flat_degeneracy(k - 1, j, &f).as_slice() == x
    }

    /// Canonical form of a `k`-simplex given by its digits.
    pub fn decompose(&self, k: usize, x: &[u8]) -> AbstractSimplex {
        let mut word = DegenWord::new();
        for j in (0..k).rev() {
            if self.is_image_of_degeneracy(k, j, x) {
                word.push(j as u8);
            }
        }
        let mut core: DigitVec = SmallVec::from_slice(x);
        let mut dim = k;
        for &j in &word {
            core = self.flat_face(dim, j as usize, &core);
            dim -= 1;
        }
        AbstractSimplex { degens: word, geom: Geom::Digits(Digits { dim: dim as u8, data: core }) }
    }

    pub fn flatten(&self, s: &AbstractSimplex) -> DigitVec {
        let Geom::Digits(d) = &s.geom else { panic!("{s:?} is not a simplex of {}", self.label()) };
        let mut dim = d.dim as usize;
        let mut x = d.data.clone();
        for &a in s.degens.iter().rev() {
            x = self.flat_degeneracy(dim, a as usize, &x);
            dim += 1;
        }
        x
    }

    fn enumerate_nondegenerate(&self, k: usize) -> Option<Vec<Geom>> {
        let w = self.width(k);
        let total = (self.modulus as u64).checked_pow(w as u32)?;
        if total > ENUMERATION_LIMIT {
            return None;
        }
        let mut out = Vec::new();
        let mut x: DigitVec = SmallVec::from_elem(0, w);
        loop {
            if !(0..k).any(|j| self.is_image_of_degeneracy(k, j, &x)) {
                out.push(Geom::Digits(Digits { dim: k as u8, data: x.clone() }));
            }
            let mut pos = w;
            loop {
                if pos == 0 {
                    return Some(out);
                }
                pos -= 1;
                x[pos] += 1;
                if x[pos] < self.modulus {
                    break;
                }
                x[pos] = 0;
            }
        }
    }
}

impl SimplicialSet for KSpace {
    fn label(&self) -> String {
        format!("K(Z/{},{})", self.modulus, self.degree)
    }

    fn face_geom(&self, i: usize, x: &Geom) -> AbstractSimplex {
        let Geom::Digits(d) = x else { panic!("{x:?} is not a simplex of {}", self.label()) };
        let k = d.dim as usize;
        self.decompose(k - 1, &self.flat_face(k, i, &d.data))
    }

    fn nondegenerate(&self, n: usize) -> Option<Arc<Vec<Geom>>> {
        if let Some(v) = self.nondegenerate.lock().get(&n) {
            return Some(v.clone());
        }
        let v = Arc::new(self.enumerate_nondegenerate(n)?);
        self.nondegenerate.lock().insert(n, v.clone());
        Some(v)
    }

    fn base_point(&self) -> Geom {
        Geom::Digits(Digits { dim: 0, data: SmallVec::new() })
    }

    fn eilenberg_maclane_type(&self) -> Option<(u32, u32)> {
        Some((self.modulus as u32, self.degree as u32))
    }
}

impl SimplicialGroup for KSpace {
    fn multiply(&self, a: &AbstractSimplex, b: &AbstractSimplex) -> AbstractSimplex {
        assert_eq!(a.dim(), b.dim(), "product of simplices of different dimensions");
        let (x, y) = (self.flatten(a), self.flatten(b));
        let m = self.modulus as u16;
        let z: DigitVec = x.iter().zip(&y).map(|(&p, &q)| ((p as u16 + q as u16) % m) as u8).collect();
        self.decompose(a.dim(), &z)
    }

    fn inverse(&self, a: &AbstractSimplex) -> AbstractSimplex {
        let m = self.modulus;
        let z: DigitVec = self.flatten(a).iter().map(|&p| (m - p) % m).collect();
        self.decompose(a.dim(), &z)
    }
}

/// The universal twisting `K(Z/ℓ, n+1) → K(Z/ℓ, n)`: the leading
/// coordinate `g_{k−1}` of a `k`-simplex of `W̄G`.
pub fn universal_twisting(fiber: Arc<KSpace>, base: Arc<KSpace>) -> ChainResult<TwistingOperator> {
    if fiber.modulus != base.modulus || base.degree != fiber.degree + 1 {
        return Err(ChainError::Invalid(format!(
            "no universal twisting from {} to {}",
            base.label(),
            fiber.label()
        )));
    }
    let label = format!("τ: {} → {}", base.label(), fiber.label());
    let g = fiber.clone();
    let tau = Arc::new(move |b: &AbstractSimplex| {
        let k = b.dim();
        let x = base.flatten(b);
        g.decompose(k - 1, &x[..g.width(k - 1)])
    });
    Ok(TwistingOperator::new(label, fiber, tau))
}
