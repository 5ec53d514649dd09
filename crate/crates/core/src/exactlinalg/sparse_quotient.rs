use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::sparse::{accumulate, axpy, Echelon, SparseVec};
use super::{subquotient, BasisDivisors, Subquotient};

/// `span(num) / (span(num) ∩ span(den))` for sparse vectors.
///
/// The denominator is brought into unit-reduced echelon form; reducing the
/// numerator by its unit pivots leaves a small problem on the remaining rows,
/// which is solved densely.
pub struct SparseSubquotient {
    den: Echelon,
    rows: Vec<u32>,
    row_index: HashMap<u32, usize>,
    dense: Subquotient,
    /// Numerator basis vectors with a unit pivot row that the denominator
    /// never touches; each splits off a free summand.
    split: Vec<(u32, SparseVec)>,
    group: BasisDivisors<SparseVec>,
    /// Each generator as a combination of the numerator vectors.
    generator_tags: Vec<SparseVec>,
}

impl SparseSubquotient {
    pub fn new(num: Vec<SparseVec>, den: impl IntoIterator<Item = SparseVec>) -> Self {
        let mut e_den = Echelon::new(false);
        for v in den {
            e_den.insert(v);
        }
        Self::with_denominator(num, e_den)
    }

    pub fn with_denominator(num: Vec<SparseVec>, e_den: Echelon) -> Self {
        let mut e_num = Echelon::new(true);
        for v in &num {
            e_num.insert(e_den.reduce_by_units(v.clone()));
        }
        let den_res = e_den.residual_basis();
        let den_rows: std::collections::HashSet<u32> = den_res.iter().flat_map(|v| v.iter().map(|p| p.0)).collect();

        let mut split = Vec::new();
        let mut split_tags = Vec::new();
        let mut rest = Vec::new();
        for (v, tag, pivot) in e_num.basis_with_pivots() {
            match pivot {
                Some(r) if !den_rows.contains(&r) => {
                    split.push((r, v));
                    split_tags.push(tag);
                }
                _ => rest.push((v, tag)),
            }
        }

        let mut rows: Vec<u32> = rest
            .iter()
            .flat_map(|(v, _)| v.iter().map(|p| p.0))
            .chain(split.iter().flat_map(|(r, v)| v.iter().map(|p| p.0).filter(move |x| x != r)))
            .chain(den_rows.iter().copied())
            .collect();
        rows.sort_unstable();
        rows.dedup();
        let row_index: HashMap<u32, usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let dense_of = |v: &SparseVec| {
            let mut d = vec![BigInt::zero(); rows.len()];
            for (r, x) in v {
                d[row_index[r]] = x.clone();
            }
            d
        };
        let num_dense: Vec<Vec<BigInt>> = rest.iter().map(|(v, _)| dense_of(v)).collect();
        let den_dense: Vec<Vec<BigInt>> = den_res.iter().map(dense_of).collect();
        let dense = subquotient(&num_dense, &den_dense, rows.len()).expect("consistent dimensions");

        let mut tags = Vec::new();
        for comb in &dense.generator_combinations {
            let mut tag = Vec::new();
            for (k, c) in comb.iter().enumerate() {
                if !c.is_zero() {
                    tag.extend(rest[k].1.iter().map(|(j, x)| (*j, x * c)));
                }
            }
            tags.push(accumulate(tag));
        }
        tags.extend(split_tags);
        let mut divisors = dense.divisors().to_vec();
        divisors.extend(split.iter().map(|_| BigInt::zero()));

        let generators = tags
            .iter()
            .map(|tag| {
                let mut vec = Vec::new();
                for (j, c) in tag {
                    vec.extend(num[*j as usize].iter().map(|(r, x)| (*r, x * c)));
                }
                accumulate(vec)
            })
            .collect();
        let group = BasisDivisors { generators, divisors };
        SparseSubquotient { den: e_den, rows, row_index, dense, split, group, generator_tags: tags }
    }

    pub fn group(&self) -> &BasisDivisors<SparseVec> {
        &self.group
    }

    pub fn divisors(&self) -> &[BigInt] {
        &self.group.divisors
    }

    pub fn generator_tags(&self) -> &[SparseVec] {
        &self.generator_tags
    }

    /// Coordinates of the class of `x`, reduced modulo torsion divisors;
    /// `None` when `x ∉ span(num) + span(den)`.
    pub fn coordinates(&self, x: SparseVec) -> Option<Vec<BigInt>> {
        let mut r = self.den.reduce_by_units(x);
        let mut free = Vec::with_capacity(self.split.len());
        for (row, v) in &self.split {
            let c = super::sparse::lookup(&r, *row).cloned().unwrap_or_default();
            if !c.is_zero() {
                r = axpy(&r, &-&c, v);
            }
            free.push(c);
        }
        let mut d = vec![BigInt::zero(); self.rows.len()];
        for (row, v) in r {
            let i = self.row_index.get(&row)?;
            d[*i] = v;
        }
        let mut out = self.dense.coordinates(&d).expect("consistent dimensions")?;
        out.extend(free);
        Some(out)
    }

    pub fn denominator(&self) -> &Echelon {
        &self.den
    }

    /// Unused rows are reported for diagnostics.
    pub fn dense_size(&self) -> usize {
        self.rows.len()
    }
}
