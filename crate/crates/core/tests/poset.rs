use proptest::prelude::*;
use spectra_core::poset::*;

fn point(m: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-3i64..=3, m)
}

fn box_around(p: &[i64], r: i64) -> Vec<Point> {
    let m = p.len();
    grid(m, 2 * r).map(|x| x.iter().zip(p).map(|(a, c)| a + c - r).collect()).collect()
}

proptest! {
    #[test]
    fn phi_is_a_bijection(m in 1usize..=4, k0 in 0usize..4, x in point(4)) {
        let x = &x[..m];
        let k = 1 + k0 % m;
        prop_assert_eq!(phi_k_inverse(&phi_k(x, k).unwrap(), k).unwrap(), x.to_vec());
        prop_assert_eq!(phi_k(&phi_k_inverse(x, k).unwrap(), k).unwrap(), x.to_vec());
    }

    #[test]
    fn lex_downsets_are_downsets(m in 1usize..=3, k0 in 0usize..3, p in point(3), x in point(3), dx in prop::collection::vec(0i64..=3, 3)) {
        let (p, x) = (&p[..m], &x[..m]);
        let k = 1 + k0 % m;
        let t = t_downset(p, k).unwrap();
        let y: Point = x.iter().zip(&dx).map(|(a, b)| a - b).collect();
        if t.contains(x) {
            prop_assert!(t.contains(&y));
        }
        prop_assert!(t.contains(p));
    }

    #[test]
    fn lex_downsets_are_nested(m in 1usize..=3, k0 in 0usize..3, p in point(3), q in point(3)) {
        let (p, q) = (&p[..m], &q[..m]);
        let k = 1 + k0 % m;
        let (a, b) = (t_downset(p, k).unwrap(), t_downset(q, k).unwrap());
        let ab = downset_leq(&a, &b, None).unwrap();
        let ba = downset_leq(&b, &a, None).unwrap();
        prop_assert!(ab || ba);
        // The symbolic answer agrees with membership on a box around both points.
        let pts: Vec<Point> = box_around(p, 4).into_iter().chain(box_around(q, 4)).collect();
        prop_assert_eq!(ab, pts.iter().all(|x| !a.contains(x) || b.contains(x)));
    }

    #[test]
    fn page_tuples_are_chains(m in 1usize..=3, k0 in 0usize..3, p in point(3)) {
        let p = &p[..m];
        let k = 1 + k0 % m;
        for t in [page_tuple_s(p, k).unwrap(), page_tuple_sstar(p, k).unwrap()] {
            prop_assert!(TermTuple::new(t.z.clone(), t.s.clone(), t.p.clone(), t.b.clone(), None).is_ok());
        }
        let (s, st) = (page_tuple_s(p, k).unwrap(), page_tuple_sstar(p, k).unwrap());
        prop_assert!(downset_leq(&st.z, &s.z, None).unwrap());
        prop_assert!(downset_leq(&s.b, &st.b, None).unwrap());
        prop_assert_eq!(&s.s, &st.s);
        prop_assert_eq!(&s.p, &st.p);
    }

    #[test]
    fn sstar_layer_is_the_point(m in 1usize..=3, k0 in 0usize..3, p in point(3)) {
        let p = &p[..m];
        let k = 1 + k0 % m;
        let t = page_tuple_sstar(p, k).unwrap();
        let layer: Vec<Point> = box_around(p, 3).into_iter().filter(|x| t.p.contains(x) && !t.s.contains(x)).collect();
        prop_assert_eq!(layer, vec![p.to_vec()]);
    }

    #[test]
    fn generated_downsets_are_antichains(pts in prop::collection::vec(point(2), 1..6)) {
        let d = DownSet::generated(pts.clone()).unwrap();
        for x in &pts {
            prop_assert!(d.contains(x));
        }
        if let DownSet::Generated { max_points } = &d {
            for a in max_points {
                for b in max_points {
                    prop_assert!(a == b || !point_leq(a, b));
                }
            }
        }
    }
}

#[test]
fn unit_vector_conventions() {
    assert_eq!(unit(3, 0), vec![0, 0, 0]);
    assert_eq!(unit(3, -1), vec![0, 0, -1]);
    assert_eq!(unit(3, 2), vec![0, 1, 0]);
}

#[test]
fn rendering() {
    let t = page_tuple_sstar(&[0, 0, 2], 3).unwrap();
    let r = t.render(3, 2);
    assert!(r.starts_with("S[") && r.ends_with(']'), "{r}");
    assert_eq!(DownSet::Empty.render(2, 3), "NIL");
    assert_eq!(DownSet::generated(vec![vec![1, 0], vec![0, 1]]).unwrap().render(2, 3), "((0 1) (1 0))");
}

#[test]
fn errors() {
    assert!(matches!(phi_k(&[1, 2], 0), Err(PosetError::BadIndex { .. })));
    assert!(matches!(lex_member(&[1], &[1, 2], 1), Err(PosetError::ArityMismatch { .. })));
    let a = t_downset(&[1, 1], 1).unwrap();
    let b = t_downset(&[1, 1], 2).unwrap();
    assert!(matches!(downset_leq(&a, &b, None), Err(PosetError::Incomparable(_))));
    assert!(TermTuple::new(DownSet::Full, DownSet::Empty, DownSet::Full, DownSet::Full, None).is_err());
}
