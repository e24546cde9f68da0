use intcoh::exactlin::{
    elementary_divisors, hermite_normal_form, homology_of_pair, integer_kernel, integer_kernel_with_coords,
    smith_normal_form,
};
use intcoh::{AbelianInvariants, Error, Int, IntMatrix};
use proptest::prelude::*;

fn im(rows: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_i64(rows)
}

fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

fn check_smith(m: &IntMatrix) {
    let s = smith_normal_form(m);
    let prod = s.u.mul(m).unwrap().mul(&s.v).unwrap();
    assert_eq!(prod, IntMatrix::diagonal(m.rows(), m.cols(), &s.d));
    assert!(s.d.iter().all(|x| !x.is_negative()));
    for w in s.d.windows(2) {
        assert!(w[0].divides(&w[1]), "divisibility chain broken: {:?}", s.d);
    }
    assert_eq!(s.rank, s.d.iter().filter(|x| !x.is_zero()).count());
    assert!(s.u.determinant().is_unit());
    assert!(s.v.determinant().is_unit());
    assert_eq!(s.u.mul(&s.u_inv).unwrap(), IntMatrix::identity(m.rows()));
    assert_eq!(s.v.mul(&s.v_inv).unwrap(), IntMatrix::identity(m.cols()));
    let nz: Vec<Int> = s.d.iter().filter(|x| !x.is_zero()).cloned().collect();
    assert_eq!(elementary_divisors(m), nz);
}

#[test]
fn smith_identity_diag_zero() {
    let s = smith_normal_form(&IntMatrix::identity(3));
    assert_eq!(s.d, ints(&[1, 1, 1]));
    assert_eq!(s.rank, 3);

    let s = smith_normal_form(&im(&[&[2, 0], &[0, 3]]));
    // gcd(2,3)=1 and lcm(2,3)=6
    assert_eq!(s.d, ints(&[1, 6]));
    check_smith(&im(&[&[2, 0], &[0, 3]]));

    let s = smith_normal_form(&IntMatrix::zeros(2, 2));
    assert_eq!(s.d, ints(&[0, 0]));
    assert_eq!(s.rank, 0);

    let s = smith_normal_form(&IntMatrix::zeros(0, 3));
    assert!(s.d.is_empty());
}

#[test]
fn smith_against_determinantal_divisors() {
    // d1 = gcd of entries, d1*d2 = gcd of 2x2 minors, d1*d2*d3 = |det|
    let m = im(&[&[6, 4, 10], &[2, 8, 4], &[14, 2, 0]]);
    check_smith(&m);
    let s = smith_normal_form(&m);
    let det = m.determinant().abs();
    let prod: Int = s.d.iter().product();
    assert_eq!(prod, det);
    let rows = m.dense_rows();
    let mut g = Int::ZERO;
    for r in &rows {
        for v in r {
            g = g.gcd(v);
        }
    }
    assert_eq!(s.d[0], g);
    let mut g2 = Int::ZERO;
    for (i1, i2) in [(0, 1), (0, 2), (1, 2)] {
        for (j1, j2) in [(0, 1), (0, 2), (1, 2)] {
            let minor = &(&rows[i1][j1] * &rows[i2][j2]) - &(&rows[i1][j2] * &rows[i2][j1]);
            g2 = g2.gcd(&minor);
        }
    }
    assert_eq!(&s.d[0] * &s.d[1], g2);
}

#[test]
fn smith_with_big_entries() {
    let big = Int::from(10).pow(30);
    let m = IntMatrix::from_rows(vec![vec![big.clone(), Int::from(3)], vec![Int::from(6), &big + Int::ONE]]);
    check_smith(&m);
}

#[test]
fn homology_pair_examples() {
    let z = IntMatrix::zeros(1, 1);
    assert_eq!(homology_of_pair(&z, &z).unwrap(), AbelianInvariants::free(1));
    let h = homology_of_pair(&z, &im(&[&[12]])).unwrap();
    assert_eq!(h.torsion, ints(&[12]));
    assert_eq!(h.free_rank, 0);
    let h = homology_of_pair(&IntMatrix::identity(2), &IntMatrix::zeros(2, 3)).unwrap();
    assert!(h.is_trivial());
}

#[test]
fn homology_pair_errors() {
    let a = im(&[&[1, 1]]);
    let b = im(&[&[1], &[0]]);
    assert_eq!(homology_of_pair(&a, &b), Err(Error::CompositionNonzero(None)));
    assert!(matches!(homology_of_pair(&a, &im(&[&[1]])), Err(Error::ShapeMismatch(_))));
}

#[test]
fn kernel_examples() {
    let k = integer_kernel(&im(&[&[1, 1]]));
    assert_eq!(k.cols(), 1);
    let col = [k.get(0, 0), k.get(1, 0)];
    assert!(col == [Int::ONE, Int::from(-1)] || col == [Int::from(-1), Int::ONE]);
    assert_eq!(integer_kernel(&IntMatrix::identity(4)).cols(), 0);
    assert_eq!(integer_kernel(&IntMatrix::zeros(2, 2)).cols(), 2);
}

#[test]
fn kernel_is_saturated() {
    // kernel of (2 4) is spanned by (2,-1), not by (4,-2)
    let k = integer_kernel_with_coords(&im(&[&[2, 4]]));
    assert_eq!(k.basis.cols(), 1);
    let g = k.basis.get(0, 0).gcd(&k.basis.get(1, 0));
    assert!(g.is_one());
    assert_eq!(k.coords.mul(&k.basis).unwrap(), IntMatrix::identity(1));
}

#[test]
fn shifted_identity_complex_is_exact() {
    // 0 -> Z^2 -> Z^2 -> 0 with identity in the middle; every middle homology vanishes
    let id = IntMatrix::identity(2);
    let zero_in = IntMatrix::zeros(2, 0);
    assert!(homology_of_pair(&id, &zero_in).unwrap().is_trivial());
    let zero_out = IntMatrix::zeros(0, 2);
    assert!(homology_of_pair(&zero_out, &id).unwrap().is_trivial());
}

#[test]
fn hnf_is_canonical() {
    let a = im(&[&[3, 1], &[0, 5], &[6, 7]]);
    let b = im(&[&[3, 6], &[0, 5], &[3, 1]]);
    // same row lattice: rows of b are integer combinations of rows of a and vice versa
    assert_eq!(hermite_normal_form(&a), hermite_normal_form(&b));
}

fn small_matrix(max_dim: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-9i64..=9, r * c).prop_map(move |v| {
            IntMatrix::from_i64_vec(v.chunks(c).map(|x| x.to_vec()).collect())
        })
    })
}

fn unimodular(n: usize) -> impl Strategy<Value = IntMatrix> {
    proptest::collection::vec((0..n, 0..n, -3i64..=3), 0..3 * n + 1).prop_map(move |ops| {
        let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        for (i, j, q) in ops {
            if i != j {
                for k in 0..n {
                    m[i][k] += q * m[j][k];
                }
            } else {
                m.swap(i, (i + 1) % n);
            }
        }
        IntMatrix::from_i64_vec(m)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smith_properties(m in small_matrix(12)) {
        check_smith(&m);
    }

    #[test]
    fn smith_invariant_under_unimodular(
        (m, p, q) in (1usize..=8, 1usize..=8).prop_flat_map(|(r, c)| {
            (proptest::collection::vec(-9i64..=9, r * c)
                .prop_map(move |v| IntMatrix::from_i64_vec(v.chunks(c).map(|x| x.to_vec()).collect())),
             unimodular(r), unimodular(c))
        })
    ) {
        let d1 = smith_normal_form(&m).d;
        let d2 = smith_normal_form(&p.mul(&m).unwrap().mul(&q).unwrap()).d;
        prop_assert_eq!(d1, d2);
    }

    #[test]
    fn kernel_properties(m in small_matrix(10)) {
        let k = integer_kernel_with_coords(&m);
        prop_assert!(m.mul(&k.basis).unwrap().is_zero());
        prop_assert_eq!(k.coords.mul(&k.basis).unwrap(), IntMatrix::identity(k.basis.cols()));
        let rank = smith_normal_form(&m).rank;
        prop_assert_eq!(k.basis.cols(), m.cols() - rank);
    }

    #[test]
    fn sparse_divisors_match_dense(v in proptest::collection::vec((0usize..30, 0usize..30, -2i64..=2), 0..90)) {
        let m = IntMatrix::from_triplets(30, 30, v.into_iter().map(|(i, j, x)| (i, j, Int::from(x))));
        let dense: Vec<Int> = smith_normal_form(&m).d.into_iter().filter(|x| !x.is_zero()).collect();
        prop_assert_eq!(elementary_divisors(&m), dense);
    }
}
