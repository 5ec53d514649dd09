mod common;

use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;
use spectra_core::chain::homology;
use spectra_core::poset::{grid, page_tuple_s, page_tuple_sstar, unit as e_k, DownSet, TermTuple};
use spectra_core::spectra::GenFilteredComplex;

const BOUND: i64 = 2;
/// Downset chains tried per random complex.
const CHAINS: u64 = 20;

fn tuple(c: &[DownSet], i: usize) -> TermTuple {
    TermTuple::new(c[i].clone(), c[i + 1].clone(), c[i + 2].clone(), c[i + 3].clone(), Some((2, BOUND))).unwrap()
}

fn instance(seed: u64) -> (DenseFiltered, GenFilteredComplex) {
    let mut r = rng(seed);
    let c = random_filtered(&mut r, 2, 4, 4, 2);
    assert!(c.d_squared_is_zero());
    let fc = c.filtered(2, BOUND);
    (c, fc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn terms_match_dense_oracle(seed in any::<u64>()) {
        let (c, fc) = instance(seed);
        prop_assert!(fc.check_compatibility(4).unwrap().is_empty());
        for rep in 0..CHAINS {
            let chain = random_downset_chain(&mut rng(seed ^ (rep << 40)), 2, 4, BOUND, &c.points());
            let t = tuple(&chain, 0);
            for n in 0..=4 {
                prop_assert_eq!(fc.term(&t, n).unwrap().group.divisors, c.term_oracle(&t, n), "n={}", n);
            }
        }
    }

    #[test]
    fn kernel_and_cokernel_identities(seed in any::<u64>()) {
        let (c, fc) = instance(seed);
        for (rep, n) in (0..CHAINS).flat_map(|r| (1..=4).map(move |n| (r, n))) {
            let ch = random_downset_chain(&mut rng(seed ^ (rep << 40)), 2, 6, BOUND, &c.points());
            let (to, from) = (tuple(&ch, 0), tuple(&ch, 2));
            let s2 = fc.term(&from, n).unwrap();
            let s1 = fc.term(&to, n - 1).unwrap();
            let m = fc.differential_matrix(&s2, &s1).unwrap();
            let (ker, coker) = fc.kernel_and_cokernel_terms(&from, &to, n).unwrap();
            prop_assert_eq!(kernel(s2.divisors(), s1.divisors(), &m), ker.group.divisors, "ker n={}", n);
            prop_assert_eq!(cokernel(s1.divisors(), &m), coker.group.divisors, "coker n={}", n);
        }
    }

    #[test]
    fn homology_of_sequence_and_d_squared(seed in any::<u64>()) {
        let (c, fc) = instance(seed);
        for (rep, n) in (0..CHAINS).flat_map(|r| (1..=3).map(move |n| (r, n))) {
            let ch = random_downset_chain(&mut rng(seed ^ (rep << 40)), 2, 8, BOUND, &c.points());
            let (t1, t2, t3) = (tuple(&ch, 0), tuple(&ch, 2), tuple(&ch, 4));
            let s3 = fc.term(&t3, n + 1).unwrap();
            let s2 = fc.term(&t2, n).unwrap();
            let s1 = fc.term(&t1, n - 1).unwrap();
            let m_in = fc.differential_matrix(&s3, &s2).unwrap();
            let m_out = fc.differential_matrix(&s2, &s1).unwrap();
            prop_assert!(composite_vanishes(s1.divisors(), &m_out, &m_in), "d∘d ≠ 0 at n={}", n);
            let brute = middle_homology(s2.divisors(), s1.divisors(), &m_in, &m_out);
            let report = fc.homology_of_sequence_check(&t3, &t2, &t1, n).unwrap();
            prop_assert_eq!(&brute, &report.expected, "n={}", n);
            prop_assert!(report.ok);
        }
    }

    #[test]
    fn relative_homology_is_a_term(seed in any::<u64>()) {
        let (c, fc) = instance(seed);
        let s = random_downset_chain(&mut rng(seed ^ 0x7777), 2, 1, BOUND, &c.points()).remove(0);
        let t = TermTuple::new(s.clone(), s, DownSet::Full, DownSet::Full, Some((2, BOUND))).unwrap();
        for n in 0..=4 {
            prop_assert_eq!(fc.term(&t, n).unwrap().group.divisors, c.term_oracle(&t, n));
        }
    }
}

#[test]
fn final_group_is_homology() {
    for seed in 0..20 {
        let (_, fc) = instance(seed);
        for n in 0..=4 {
            assert_eq!(fc.final_group(n).unwrap().group.divisors, homology(&fc.complex, n).unwrap().divisors);
        }
    }
}

#[test]
fn page_terms_match_oracle() {
    for seed in 100..120 {
        let (c, fc) = instance(seed);
        for n in 0..=4 {
            for p in spectra_core::poset::grid(2, 2) {
                for k in 1..=2 {
                    for t in [page_tuple_s(&p, k).unwrap(), page_tuple_sstar(&p, k).unwrap()] {
                        assert_eq!(fc.term(&t, n).unwrap().group.divisors, c.term_oracle(&t, n), "{t:?} n={n}");
                    }
                }
            }
        }
    }
}

#[test]
fn class_coordinates_recover_generators() {
    for seed in 200..210 {
        let (_, fc) = instance(seed);
        let t = TermTuple { z: DownSet::Empty, s: DownSet::Empty, p: DownSet::Full, b: DownSet::Full };
        for n in 0..=4 {
            let term = fc.term(&t, n).unwrap();
            for (i, g) in term.group.generators.iter().enumerate() {
                let coords = fc.class_coordinates(&term, g).unwrap().expect("generator is a class");
                let mut e = vec![BigInt::from(0); term.group.generators.len()];
                e[i] = BigInt::from(1);
                assert_eq!(coords, e);
            }
        }
    }
}

#[test]
fn illegal_differential_is_rejected() {
    let (_, fc) = instance(7);
    let a = TermTuple { z: DownSet::Full, s: DownSet::Full, p: DownSet::Full, b: DownSet::Full };
    let b = TermTuple { z: DownSet::Empty, s: DownSet::Empty, p: DownSet::Empty, b: DownSet::Empty };
    let sa = fc.term(&a, 2).unwrap();
    let sb = fc.term(&b, 1).unwrap();
    assert!(fc.differential_matrix(&sa, &sb).is_err());
}

fn lex1(q: i64) -> DownSet {
    DownSet::Lex { p: vec![q], k: 1 }
}

/// `E^r_p = Z^r_p / (Z^{r−1}_{p−1} + d Z^{r−1}_{p+r−1})` with
/// `Z^r_p = F_p ∩ d⁻¹ F_{p−r}`, for a filtration by a single integer.
fn classical_page(c: &DenseFiltered, r: i64, p: i64, n: i32) -> Vec<BigInt> {
    let size = c.size(n);
    let level = |deg: i32, i: usize| c.degs[deg as usize][i][0];
    // Z^r_p in degree `deg`, as vectors of C_deg.
    let z = |r: i64, p: i64, deg: i32| -> Vec<Vec<BigInt>> {
        if deg < 0 || deg as usize > c.top() {
            return Vec::new();
        }
        let inside: Vec<usize> = (0..c.size(deg)).filter(|&i| level(deg, i) <= p).collect();
        let below = c.size(deg - 1);
        let rows: Vec<usize> = (0..below).filter(|&i| level(deg - 1, i) > p - r).collect();
        let cols: Vec<Vec<BigInt>> = inside.iter().map(|&j| rows.iter().map(|&i| BigInt::from(c.column(deg, j)[i])).collect()).collect();
        let kernel = if rows.is_empty() {
            (0..inside.len()).map(|j| unit(inside.len(), j)).collect()
        } else {
            kernel_of_columns(rows.len(), &cols)
        };
        kernel
            .into_iter()
            .map(|k| {
                let mut v = vec![BigInt::from(0); c.size(deg)];
                for (a, &j) in inside.iter().enumerate() {
                    v[j] += &k[a];
                }
                v
            })
            .collect()
    };
    let num = z(r, p, n);
    let mut den = z(r - 1, p - 1, n);
    for x in z(r - 1, p + r - 1, n + 1) {
        let mut dx = vec![BigInt::from(0); size];
        for j in 0..c.size(n + 1) {
            for (i, y) in c.column(n + 1, j).iter().enumerate() {
                dx[i] += &x[j] * BigInt::from(*y);
            }
        }
        den.push(dx);
    }
    quotient_divisors(&num, &den, size)
}

#[test]
fn classical_filtration_matches_spectral_sequence_oracle() {
    for seed in 300..340 {
        let c = random_filtered(&mut rng(seed), 1, 4, 4, 3);
        let fc = c.filtered(1, 4);
        for r in 1..=3 {
            for p in 0..=4 {
                let t = TermTuple::new(lex1(p - r), lex1(p - 1), lex1(p), lex1(p + r - 1), Some((1, 4))).unwrap();
                for n in 0..=4 {
                    assert_eq!(fc.term(&t, n).unwrap().group.divisors, classical_page(&c, r, p, n), "seed {seed} r={r} p={p} n={n}");
                }
            }
        }
    }
}

fn permuted(c: &DenseFiltered, seed: u64) -> DenseFiltered {
    use rand::seq::SliceRandom;
    let mut r = rng(seed);
    let perms: Vec<Vec<usize>> = (0..=c.top())
        .map(|n| {
            let mut p: Vec<usize> = (0..c.degs[n].len()).collect();
            p.shuffle(&mut r);
            p
        })
        .collect();
    let degs = perms.iter().enumerate().map(|(n, p)| p.iter().map(|&i| c.degs[n][i].clone()).collect()).collect();
    let d = (0..=c.top())
        .map(|n| {
            if n == 0 {
                return c.d[0].clone();
            }
            perms[n].iter().map(|&j| perms[n - 1].iter().map(|&i| c.d[n][j][i]).collect()).collect()
        })
        .collect();
    DenseFiltered { degs, d }
}

#[test]
fn terms_ignore_basis_order() {
    for seed in 400..420 {
        let (c, fc) = instance(seed);
        let pc = permuted(&c, seed);
        assert!(pc.d_squared_is_zero());
        let pfc = pc.filtered(2, BOUND);
        for rep in 0..5 {
            let ch = random_downset_chain(&mut rng(seed ^ (rep << 40)), 2, 4, BOUND, &c.points());
            let t = tuple(&ch, 0);
            for n in 0..=4 {
                assert_eq!(fc.term(&t, n).unwrap().group.divisors, pfc.term(&t, n).unwrap().group.divisors);
            }
        }
    }
}

#[test]
fn lattices_ignore_the_outer_indices() {
    for seed in 500..530 {
        let (c, fc) = instance(seed);
        for rep in 0..CHAINS {
            let ch = random_downset_chain(&mut rng(seed ^ (rep << 40)), 2, 5, BOUND, &c.points());
            let bound = Some((2, BOUND));
            let t = |z: usize, s: usize, p: usize, b: usize| {
                TermTuple::new(ch[z].clone(), ch[s].clone(), ch[p].clone(), ch[b].clone(), bound).unwrap()
            };
            for n in 0..=4 {
                // Enlarging b keeps the numerator; shrinking z keeps the denominator.
                let small_b = fc.term(&t(0, 1, 2, 3), n).unwrap();
                let large_b = fc.term(&t(0, 1, 2, 4), n).unwrap();
                assert_eq!(small_b.numerator_lattice, large_b.numerator_lattice);
                let large_z = fc.term(&t(1, 2, 3, 4), n).unwrap();
                let small_z = fc.term(&t(0, 2, 3, 4), n).unwrap();
                assert_eq!(large_z.denominator_lattice, small_z.denominator_lattice);
            }
        }
    }
}

#[test]
fn page_sequences_compute_the_starred_terms() {
    let mut nonzero = 0;
    for seed in 600..640 {
        let (_, fc) = instance(seed);
        for p in grid(2, BOUND) {
            for k in 1..=2usize {
                let e = e_k(2, k as i64);
                let up: Vec<i64> = p.iter().zip(&e).map(|(a, b)| a + b).collect();
                let down: Vec<i64> = p.iter().zip(&e).map(|(a, b)| a - b).collect();
                let (t3, t2, t1) =
                    (page_tuple_s(&up, k).unwrap(), page_tuple_s(&p, k).unwrap(), page_tuple_s(&down, k).unwrap());
                for n in 1..=3 {
                    let report = fc.homology_of_sequence_check(&t3, &t2, &t1, n).unwrap();
                    assert!(report.ok, "seed {seed} P={p:?} k={k} n={n}");
                    let s3 = fc.term(&t3, n + 1).unwrap();
                    let s2 = fc.term(&t2, n).unwrap();
                    let s1 = fc.term(&t1, n - 1).unwrap();
                    let m_in = fc.differential_matrix(&s3, &s2).unwrap();
                    let m_out = fc.differential_matrix(&s2, &s1).unwrap();
                    if m_in.iter().flatten().any(|x| x != &BigInt::from(0)) {
                        nonzero += 1;
                    }
                    let brute = middle_homology(s2.divisors(), s1.divisors(), &m_in, &m_out);
                    let star = fc.term(&page_tuple_sstar(&p, k).unwrap(), n).unwrap();
                    assert_eq!(brute, star.group.divisors, "seed {seed} P={p:?} k={k} n={n}");
                }
            }
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn zero_differential_kernel_is_the_source() {
    // A complex with d = 0: every term is F_p/F_s and every differential vanishes.
    let c = DenseFiltered {
        degs: vec![vec![vec![0, 0], vec![1, 0]], vec![vec![0, 1]]],
        d: vec![Vec::new(), vec![vec![0, 0]]],
    };
    let fc = c.filtered(2, BOUND);
    let ch = [DownSet::Empty, DownSet::Empty, DownSet::Lex { p: vec![0, 1], k: 2 }, DownSet::Full, DownSet::Full, DownSet::Full];
    let (to, from) = (tuple(&ch, 0), tuple(&ch, 2));
    let s2 = fc.term(&from, 1).unwrap();
    let (ker, _) = fc.kernel_and_cokernel_terms(&from, &to, 1).unwrap();
    assert_eq!(ker.group.divisors, s2.group.divisors);
}
