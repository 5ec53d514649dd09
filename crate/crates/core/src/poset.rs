//! Downsets of `Z^m` and the index tuples of the secondary connection.

use std::cmp::Ordering;
use std::fmt;

use crate::chain::ChainError;

pub type Point = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("index k = {k} outside 1..={m}")]
    BadIndex { k: usize, m: usize },
    #[error("inclusion cannot be decided exactly without a bound: {0}")]
    Incomparable(String),
    #[error("not an inclusion chain z ⊆ s ⊆ p ⊆ b: {0}")]
    InvalidChain(String),
}

impl From<PosetError> for ChainError {
    fn from(e: PosetError) -> Self {
        ChainError::Invalid(e.to_string())
    }
}

fn check_arity(x: &[i64], m: usize) -> Result<(), PosetError> {
    if x.len() != m {
        return Err(PosetError::ArityMismatch { expected: m, found: x.len() });
    }
    Ok(())
}

fn check_k(k: usize, m: usize) -> Result<(), PosetError> {
    if k == 0 || k > m {
        return Err(PosetError::BadIndex { k, m });
    }
    Ok(())
}

/// `φ_k(X) = (x_{k+1}, …, x_m, Σ_{i≤k} x_i, Σ_{2≤i≤k} x_i, …, x_k)`.
pub fn phi_k(x: &[i64], k: usize) -> Result<Point, PosetError> {
    let m = x.len();
    check_k(k, m)?;
    let mut out: Point = x[k..].to_vec();
    let mut tail = vec![0i64; k];
    let mut acc = 0;
    for j in (0..k).rev() {
        acc += x[j];
        tail[j] = acc;
    }
    out.extend(tail);
    Ok(out)
}

pub fn phi_k_inverse(y: &[i64], k: usize) -> Result<Point, PosetError> {
    let m = y.len();
    check_k(k, m)?;
    let (rest, sums) = y.split_at(m - k);
    let mut x: Point = (0..k).map(|j| sums[j] - sums.get(j + 1).copied().unwrap_or(0)).collect();
    x.extend_from_slice(rest);
    Ok(x)
}

pub fn lex_member(x: &[i64], p: &[i64], k: usize) -> Result<bool, PosetError> {
    check_arity(x, p.len())?;
    Ok(phi_k(x, k)?.cmp(&phi_k(p, k)?) != Ordering::Greater)
}

/// `X ≤ Y` coordinatewise.
pub fn point_leq(x: &[i64], y: &[i64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| a <= b)
}

/// Unit vector `e_i` of `Z^m` with `e_0 = 0` and `e_{−1} = −e_m`.
pub fn unit(m: usize, i: i64) -> Point {
    let mut e = vec![0; m];
    match i {
        0 => {}
        -1 => e[m - 1] = -1,
        i if i >= 1 && (i as usize) <= m => e[i as usize - 1] = 1,
        _ => panic!("unit vector e_{i} undefined in Z^{m}"),
    }
    e
}

fn add(a: &[i64], b: &[i64], k: i64) -> Point {
    a.iter().zip(b).map(|(x, y)| x + k * y).collect()
}

#[derive(Clone, PartialEq, Eq)]
pub enum DownSet {
    Empty,
    Full,
    /// `T^k_P = {X : φ_k(X) ≤_lex φ_k(P)}`.
    Lex { p: Point, k: usize },
    /// Union of the cones below an antichain.
    Generated { max_points: Vec<Point> },
}

impl fmt::Debug for DownSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DownSet::Empty => write!(f, "Empty"),
            DownSet::Full => write!(f, "Full"),
            DownSet::Lex { p, k } => write!(f, "T^{k}_{}", render_point(p)),
            DownSet::Generated { max_points } => write!(f, "Gen{}", render_points(max_points)),
        }
    }
}

pub fn t_downset(p: &[i64], k: usize) -> Result<DownSet, PosetError> {
    check_k(k, p.len())?;
    Ok(DownSet::Lex { p: p.to_vec(), k })
}

impl DownSet {
    /// The downset generated by `points`, reduced to its maximal elements.
    pub fn generated(points: Vec<Point>) -> Result<DownSet, PosetError> {
        if let Some(first) = points.first() {
            for q in &points {
                check_arity(q, first.len())?;
            }
        }
        let mut max: Vec<Point> = Vec::new();
        for q in points {
            if max.iter().any(|r| point_leq(&q, r)) {
                continue;
            }
            max.retain(|r| !point_leq(r, &q));
            max.push(q);
        }
        max.sort();
        Ok(if max.is_empty() { DownSet::Empty } else { DownSet::Generated { max_points: max } })
    }

    pub fn arity(&self) -> Option<usize> {
        match self {
            DownSet::Lex { p, .. } => Some(p.len()),
            DownSet::Generated { max_points } => max_points.first().map(|p| p.len()),
            _ => None,
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        match self {
            DownSet::Empty => false,
            DownSet::Full => true,
            DownSet::Lex { p, k } => {
                x.len() == p.len() && phi_k(x, *k).expect("valid k").cmp(&phi_k(p, *k).expect("valid k")) != Ordering::Greater
            }
            DownSet::Generated { max_points } => max_points.iter().any(|q| point_leq(x, q)),
        }
    }

    /// Maximal members with coordinates in `[0, bound]`, sorted.
    pub fn display_generators(&self, m: usize, bound: i64) -> Vec<Point> {
        let members: Vec<Point> = grid(m, bound).filter(|x| self.contains(x)).collect();
        let mut max: Vec<Point> = members
            .iter()
            .filter(|x| !members.iter().any(|y| y != *x && point_leq(x, y)))
            .cloned()
            .collect();
        max.sort();
        max
    }

    /// `((a b) (c d))`, or `NIL` when no point of the bound box is a member.
    pub fn render(&self, m: usize, bound: i64) -> String {
        let g = self.display_generators(m, bound);
        if g.is_empty() {
            "NIL".into()
        } else {
            render_points(&g)
        }
    }
}

pub fn render_point(p: &[i64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(" "))
}

fn render_points(ps: &[Point]) -> String {
    let parts: Vec<String> = ps.iter().map(|p| render_point(p)).collect();
    format!("({})", parts.join(" "))
}

/// All points of `[0, bound]^m` in lexicographic order.
pub fn grid(m: usize, bound: i64) -> impl Iterator<Item = Point> {
    let side = (bound.max(-1) + 1) as u64;
    let total = if side == 0 { 0 } else { side.pow(m as u32) };
    (0..total).map(move |mut idx| {
        let mut p = vec![0i64; m];
        for j in (0..m).rev() {
            p[j] = (idx % side) as i64;
            idx /= side;
        }
        p
    })
}

/// Decides `p ⊆ q`. Exact for pairs of lex downsets with the same `k`,
/// for generated `p` against anything, and for `Empty`/`Full`; otherwise
/// membership is compared on `[0, bound]^m`.
pub fn downset_leq(p: &DownSet, q: &DownSet, bound: Option<(usize, i64)>) -> Result<bool, PosetError> {
    use DownSet::*;
    if let (Some(a), Some(b)) = (p.arity(), q.arity()) {
        check_arity(&vec![0; a], b)?;
    }
    match (p, q) {
        (Empty, _) | (_, Full) => return Ok(true),
        (Full, _) => return Ok(false),
        (_, Empty) => return Ok(false),
        (Lex { p: a, k }, Lex { p: b, k: l }) if k == l => {
            return Ok(phi_k(a, *k)? <= phi_k(b, *k)?);
        }
        (Generated { max_points }, _) => return Ok(max_points.iter().all(|x| q.contains(x))),
        _ => {}
    }
    match bound {
        Some((m, bound)) => Ok(grid(m, bound).all(|x| !p.contains(&x) || q.contains(&x))),
        None => Err(PosetError::Incomparable(format!("{p:?} ⊆ {q:?}"))),
    }
}

pub fn downset_eq(p: &DownSet, q: &DownSet, bound: Option<(usize, i64)>) -> Result<bool, PosetError> {
    Ok(downset_leq(p, q, bound)? && downset_leq(q, p, bound)?)
}

/// Index tuple `(z, s, p, b)` with `z ⊆ s ⊆ p ⊆ b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermTuple {
    pub z: DownSet,
    pub s: DownSet,
    pub p: DownSet,
    pub b: DownSet,
}

impl TermTuple {
    pub fn new(z: DownSet, s: DownSet, p: DownSet, b: DownSet, bound: Option<(usize, i64)>) -> Result<Self, PosetError> {
        for (name, x, y) in [("z ⊆ s", &z, &s), ("s ⊆ p", &s, &p), ("p ⊆ b", &p, &b)] {
            if !downset_leq(x, y, bound)? {
                return Err(PosetError::InvalidChain(format!("{name} fails for {x:?}, {y:?}")));
            }
        }
        Ok(TermTuple { z, s, p, b })
    }

    /// `S[z,s,p,b]` with display lists over `[0, bound]^m`.
    pub fn render(&self, m: usize, bound: i64) -> String {
        format!(
            "S[{},{},{},{}]",
            self.z.render(m, bound),
            self.s.render(m, bound),
            self.p.render(m, bound),
            self.b.render(m, bound)
        )
    }
}

/// `S(P;k) = (T^k_{P−e_k}, T^k_{P+e_{k−1}−e_k}, T^k_P, T^k_{P+e_{k−1}})`.
pub fn page_tuple_s(p: &[i64], k: usize) -> Result<TermTuple, PosetError> {
    let m = p.len();
    check_k(k, m)?;
    let (ek, ek1) = (unit(m, k as i64), unit(m, k as i64 - 1));
    Ok(TermTuple {
        z: t_downset(&add(p, &ek, -1), k)?,
        s: t_downset(&add(&add(p, &ek1, 1), &ek, -1), k)?,
        p: t_downset(p, k)?,
        b: t_downset(&add(p, &ek1, 1), k)?,
    })
}

/// `S*(P;k)`: as `S(P;k)` with `z = T^k_{P+e_{k−1}−2e_k}` and `b = T^k_{P+e_k}`.
pub fn page_tuple_sstar(p: &[i64], k: usize) -> Result<TermTuple, PosetError> {
    let m = p.len();
    check_k(k, m)?;
    let (ek, ek1) = (unit(m, k as i64), unit(m, k as i64 - 1));
    Ok(TermTuple {
        z: t_downset(&add(&add(p, &ek1, 1), &ek, -2), k)?,
        s: t_downset(&add(&add(p, &ek1, 1), &ek, -1), k)?,
        p: t_downset(p, k)?,
        b: t_downset(&add(p, &ek, 1), k)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert_eq!(phi_k(&[3, 2], 2).unwrap(), vec![5, 2]);
        assert_eq!(phi_k(&[3, 2], 1).unwrap(), vec![2, 3]);
        assert_eq!(phi_k_inverse(&[5, 2], 2).unwrap(), vec![3, 2]);
        assert!(phi_k(&[1, 2], 3).is_err());
    }

    #[test]
    fn lex_examples() {
        assert!(lex_member(&[0, 4], &[3, 2], 2).unwrap());
        assert!(!lex_member(&[1, 4], &[3, 2], 2).unwrap());
        assert!(lex_member(&[3, 2], &[3, 2], 2).unwrap());
    }

    #[test]
    fn leq_examples() {
        let a = DownSet::generated(vec![vec![2, 0]]).unwrap();
        let b = DownSet::generated(vec![vec![1, 1]]).unwrap();
        assert!(!downset_leq(&a, &b, None).unwrap());
        assert!(downset_leq(&DownSet::Empty, &a, None).unwrap());
        let t = t_downset(&[3, 2], 2).unwrap();
        let u = t_downset(&[3, 3], 2).unwrap();
        assert!(downset_leq(&t, &u, None).unwrap());
        let v = t_downset(&[3, 3], 1).unwrap();
        assert!(downset_leq(&t, &v, None).is_err());
        assert!(downset_leq(&t, &v, Some((2, 6))).is_ok());
    }

    #[test]
    fn render_matches_transcript_shape() {
        let b = t_downset(&[0, 0, 1], 3).unwrap();
        assert_eq!(b.render(3, 5), "((0 0 1) (0 1 0) (1 0 0))");
        assert_eq!(t_downset(&[0, 0, -1], 3).unwrap().render(3, 5), "NIL");
    }
}
