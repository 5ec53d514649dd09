use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{smith_normal_form, IntMatrix, LinalgError, SnfDecomposition};

/// A finitely generated abelian group `⊕ Z/a_i ⊕ Z^β` with named generators.
///
/// `divisors` lists the torsion orders `a_i > 1` (each dividing the next)
/// followed by one `0` per free summand; `generators[i]` generates the
/// summand with divisor `divisors[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisDivisors<G> {
    pub generators: Vec<G>,
    pub divisors: Vec<BigInt>,
}

impl<G> BasisDivisors<G> {
    pub fn is_zero(&self) -> bool {
        self.divisors.is_empty()
    }

    pub fn betti(&self) -> usize {
        self.divisors.iter().filter(|d| d.is_zero()).count()
    }

    pub fn torsion(&self) -> Vec<BigInt> {
        self.divisors.iter().filter(|d| !d.is_zero()).cloned().collect()
    }

    pub fn map_generators<H>(self, f: impl FnMut(G) -> H) -> BasisDivisors<H> {
        BasisDivisors { generators: self.generators.into_iter().map(f).collect(), divisors: self.divisors }
    }
}

/// Basis of `{x : A x = 0}` over the integers.
pub fn integer_kernel(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(a);
    (snf.rank..a.cols()).map(|j| snf.v.column(j)).collect()
}

fn check_dims(vectors: &[Vec<BigInt>], n: usize) -> Result<(), LinalgError> {
    for v in vectors {
        if v.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    Ok(())
}

/// Generators of `span(a) ∩ span(b)` inside `Z^n`, via the kernel of `[A | −B]`.
pub fn lattice_intersection(
    a: &[Vec<BigInt>],
    b: &[Vec<BigInt>],
    n: usize,
) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    check_dims(a, n)?;
    check_dims(b, n)?;
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let mut cols: Vec<Vec<BigInt>> = a.to_vec();
    cols.extend(b.iter().map(|v| v.iter().map(|x| -x).collect()));
    let block = IntMatrix::from_columns(n, &cols)?;
    let am = IntMatrix::from_columns(n, a)?;
    let mut out = Vec::new();
    for k in integer_kernel(&block) {
        let v = am.mul_vec(&k[..a.len()])?;
        if v.iter().any(|x| !x.is_zero()) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Presentation of `span(num) / (span(num) ∩ span(den))`, retaining what is
/// needed to compute coordinates of further vectors.
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub group: BasisDivisors<Vec<BigInt>>,
    /// Each generator as an integer combination of the numerator generators.
    pub generator_combinations: Vec<Vec<BigInt>>,
    ambient: usize,
    num_count: usize,
    /// SNF of `[N | −D]`, used to solve membership problems.
    block: SnfDecomposition,
    /// Row transformation of the relation lattice, mapping numerator
    /// coefficients to summand coordinates.
    coords: IntMatrix,
    /// For each kept summand: index into the transformed coordinates.
    kept: Vec<usize>,
}

/// `span(num) / (span(den) ∩ span(num))`; the denominator need not lie in the
/// numerator.
pub fn subquotient(num: &[Vec<BigInt>], den: &[Vec<BigInt>], n: usize) -> Result<Subquotient, LinalgError> {
    check_dims(num, n)?;
    check_dims(den, n)?;
    let t = num.len();
    let mut cols: Vec<Vec<BigInt>> = num.to_vec();
    cols.extend(den.iter().map(|v| v.iter().map(|x| -x).collect()));
    let block_m = IntMatrix::from_columns(n, &cols)?;
    let block = smith_normal_form(&block_m);

    // Relations among the numerator generators: c with N c ∈ span(den).
    let relations: Vec<Vec<BigInt>> =
        (block.rank..cols.len()).map(|j| block.v.column(j)[..t].to_vec()).collect();
    let rel = IntMatrix::from_columns(t, &relations)?;
    let rel_snf = smith_normal_form(&rel);

    let mut divisors_t = Vec::new();
    let mut divisors_f = Vec::new();
    let mut kept_t = Vec::new();
    let mut kept_f = Vec::new();
    for i in 0..t {
        if i < rel_snf.rank {
            let d = rel_snf.s.at(i, i).clone();
            if !d.is_one() {
                divisors_t.push(d);
                kept_t.push(i);
            }
        } else {
            divisors_f.push(BigInt::zero());
            kept_f.push(i);
        }
    }
    let kept: Vec<usize> = kept_t.into_iter().chain(kept_f).collect();
    let divisors: Vec<BigInt> = divisors_t.into_iter().chain(divisors_f).collect();

    let nm = IntMatrix::from_columns(n, num)?;
    let mut generator_combinations = Vec::new();
    let mut generators = Vec::new();
    for &i in &kept {
        let c = rel_snf.u_inv.column(i);
        generators.push(nm.mul_vec(&c)?);
        generator_combinations.push(c);
    }
    Ok(Subquotient {
        group: BasisDivisors { generators, divisors },
        generator_combinations,
        ambient: n,
        num_count: t,
        block,
        coords: rel_snf.u,
        kept,
    })
}

impl Subquotient {
    pub fn divisors(&self) -> &[BigInt] {
        &self.group.divisors
    }

    /// Coefficients of the class of `x` on the generators, reduced modulo the
    /// torsion divisors, or `None` when `x ∉ span(num) + span(den)`.
    pub fn coordinates(&self, x: &[BigInt]) -> Result<Option<Vec<BigInt>>, LinalgError> {
        if x.len() != self.ambient {
            return Err(LinalgError::DimensionMismatch { expected: self.ambient, found: x.len() });
        }
        let Some(sol) = solve_with_snf(&self.block, x)? else {
            return Ok(None);
        };
        let c = &sol[..self.num_count];
        let y = self.coords.mul_vec(c)?;
        let out = self
            .kept
            .iter()
            .zip(&self.group.divisors)
            .map(|(&i, d)| if d.is_zero() { y[i].clone() } else { y[i].mod_floor(d) })
            .collect();
        Ok(Some(out))
    }
}

/// Solves `A z = x` for integer `z` given the SNF of `A`.
pub fn solve_with_snf(snf: &SnfDecomposition, x: &[BigInt]) -> Result<Option<Vec<BigInt>>, LinalgError> {
    let y = snf.u.mul_vec(x)?;
    let mut z = vec![BigInt::zero(); snf.v.rows()];
    for (i, yi) in y.iter().enumerate() {
        if i < snf.rank {
            let d = snf.s.at(i, i);
            if !yi.is_multiple_of(d) {
                return Ok(None);
            }
            z[i] = yi / d;
        } else if !yi.is_zero() {
            return Ok(None);
        }
    }
    Ok(Some(snf.v.mul_vec(&z)?))
}

/// Order of the group (`None` when infinite).
pub fn group_order(divisors: &[BigInt]) -> Option<BigInt> {
    let mut acc = BigInt::one();
    for d in divisors {
        if d.is_zero() {
            return None;
        }
        acc *= d.abs();
    }
    Some(acc)
}
