use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;

use super::{degeneracy_words, AbstractSimplex, DegenWord, Geom, SGroup, SSet, SimplicialSet, TwistingOperator};

/// `X × Y`, or `G ×_τ B` when a nontrivial twisting is present.
pub struct Product {
    left: SSet,
    right: SSet,
    twist: Option<TwistingOperator>,
    nondegenerate: Mutex<HashMap<usize, Arc<Vec<Geom>>>>,
}

pub fn cartesian_product(left: SSet, right: SSet) -> Arc<Product> {
    Arc::new(Product { left, right, twist: None, nondegenerate: Mutex::new(HashMap::new()) })
}

/// `G ×_τ B`: the last face is `∂_n(g, b) = (τ(b)·∂_n g, ∂_n b)`.
pub fn twisted_product(group: SGroup, tau: TwistingOperator, base: SSet) -> Arc<Product> {
    let left: SSet = group;
    let twist = (!tau.is_trivial()).then_some(tau);
    Arc::new(Product { left, right: base, twist, nondegenerate: Mutex::new(HashMap::new()) })
}

impl Product {
    pub fn left(&self) -> &SSet {
        &self.left
    }

    pub fn right(&self) -> &SSet {
        &self.right
    }

    pub fn twisting(&self) -> Option<&TwistingOperator> {
        self.twist.as_ref()
    }
}

fn strip(word: &[u8], common: &[u8]) -> DegenWord {
    word.iter()
        .filter(|w| !common.contains(w))
        .map(|&w| w - common.iter().filter(|&&c| c < w).count() as u8)
        .collect()
}

/// Canonical form of the pair `(x, y)`, pulling out common degeneracies.
pub fn make_pair(x: AbstractSimplex, y: AbstractSimplex) -> AbstractSimplex {
    debug_assert_eq!(x.dim(), y.dim());
    let common: DegenWord = x.degens.iter().filter(|w| y.degens.contains(w)).copied().collect();
    if common.is_empty() {
        return AbstractSimplex::nondegenerate(Geom::Pair(Arc::new((x, y))));
    }
    let x2 = AbstractSimplex { degens: strip(&x.degens, &common), geom: x.geom };
    let y2 = AbstractSimplex { degens: strip(&y.degens, &common), geom: y.geom };
    AbstractSimplex { degens: common, geom: Geom::Pair(Arc::new((x2, y2))) }
}

fn component(s: &AbstractSimplex, second: bool) -> AbstractSimplex {
    let (x, y) = s.geom.as_pair().unwrap_or_else(|| panic!("{s:?} is not a product simplex"));
    let c = if second { y } else { x };
    c.degenerate_all(s.degens.iter().rev().map(|&a| a as usize))
}

pub fn first_component(s: &AbstractSimplex) -> AbstractSimplex {
    component(s, false)
}

pub fn second_component(s: &AbstractSimplex) -> AbstractSimplex {
    component(s, true)
}

impl SimplicialSet for Product {
    fn label(&self) -> String {
        match &self.twist {
            None => format!("{}×{}", self.left.label(), self.right.label()),
            Some(_) => format!("{}×τ{}", self.left.label(), self.right.label()),
        }
    }

    fn face_geom(&self, i: usize, x: &Geom) -> AbstractSimplex {
        let (a, b) = x.as_pair().unwrap_or_else(|| panic!("{x:?} is not a product simplex"));
        let n = a.dim();
        let fa = self.left.face(i, a);
        let fb = self.right.face(i, b);
        match &self.twist {
            Some(tau) if i == n => {
                let t = tau.apply(b);
                make_pair(tau.group().multiply(&t, &fa), fb)
            }
            _ => make_pair(fa, fb),
        }
    }

    fn nondegenerate(&self, n: usize) -> Option<Arc<Vec<Geom>>> {
        if let Some(v) = self.nondegenerate.lock().get(&n) {
            return Some(v.clone());
        }
        let mut out = Vec::new();
        for r in 0..=n {
            let xs = self.left.nondegenerate(n - r)?;
            if xs.is_empty() {
                continue;
            }
            for wi in degeneracy_words(n, r) {
                for rr in 0..=(n - r) {
                    let ys = self.right.nondegenerate(n - rr)?;
                    if ys.is_empty() {
                        continue;
                    }
                    for wj in degeneracy_words(n, rr) {
                        if wi.iter().any(|a| wj.contains(a)) {
                            continue;
                        }
                        for x in xs.iter() {
                            for y in ys.iter() {
                                let a = AbstractSimplex { degens: wi.clone(), geom: x.clone() };
                                let b = AbstractSimplex { degens: wj.clone(), geom: y.clone() };
                                out.push(Geom::Pair(Arc::new((a, b))));
                            }
                        }
                    }
                }
            }
        }
        let v = Arc::new(out);
        self.nondegenerate.lock().insert(n, v.clone());
        Some(v)
    }

    fn base_point(&self) -> Geom {
        let a = AbstractSimplex::nondegenerate(self.left.base_point());
        let b = AbstractSimplex::nondegenerate(self.right.base_point());
        Geom::Pair(Arc::new((a, b)))
    }
}
