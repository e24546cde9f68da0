use intcoh::chaincx::FreeChainComplexZ;
use intcoh::{AbelianInvariants, Error, Int, IntMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn im(rows: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_i64(rows)
}

#[test]
fn circle_and_torus() {
    let circle = FreeChainComplexZ::new(vec![1, 1], vec![IntMatrix::zeros(1, 1)]).unwrap();
    circle.verify().unwrap();
    assert_eq!(circle.homology(1).unwrap(), AbelianInvariants::free(1));

    // one vertex, edges a b, one square with boundary a + b - a - b
    let torus = FreeChainComplexZ::new(vec![1, 2, 1], vec![IntMatrix::zeros(1, 2), IntMatrix::zeros(2, 1)]).unwrap();
    assert_eq!(torus.homology(1).unwrap(), AbelianInvariants::free(2));
    assert_eq!(torus.homology(2).unwrap(), AbelianInvariants::free(1));
}

#[test]
fn projective_plane_torsion() {
    // one vertex, one edge a, one square with boundary 2a
    let rp2 = FreeChainComplexZ::new(vec![1, 1, 1], vec![IntMatrix::zeros(1, 1), im(&[&[2]])]).unwrap();
    let h1 = rp2.homology(1).unwrap();
    assert_eq!(h1.torsion, vec![Int::from(2)]);
    assert!(rp2.homology(2).unwrap().is_trivial());
}

#[test]
fn nonzero_composition_is_rejected() {
    let c = FreeChainComplexZ::new(vec![1, 1, 1], vec![im(&[&[1]]), im(&[&[1]])]).unwrap();
    assert_eq!(c.verify(), Err(Error::CompositionNonzero(Some(1))));
    assert!(matches!(c.homology(5), Err(Error::DegreeOutOfRange { .. })));
}

/// A complex with prescribed homology, hidden behind elementary expansions
/// and changes of basis. Returns the complex and its homology.
fn disguised_complex(seed: u64, top: usize) -> (FreeChainComplexZ, Vec<AbelianInvariants>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks = vec![0usize; top + 1];
    // boundary columns as dense vectors: cols[n][i] = boundary of cell i in degree n
    let mut cols: Vec<Vec<Vec<i64>>> = vec![Vec::new(); top + 1];
    let mut expect_free = vec![0usize; top + 1];
    let mut expect_tors: Vec<Vec<i64>> = vec![Vec::new(); top + 1];

    fn add_cell(ranks: &mut [usize], cols: &mut [Vec<Vec<i64>>], n: usize, boundary: Vec<i64>) {
        ranks[n] += 1;
        if n + 1 < cols.len() {
            for c in cols[n + 1].iter_mut() {
                c.push(0);
            }
        }
        cols[n].push(boundary);
    }

    for n in 0..=top {
        for _ in 0..rng.gen_range(0..3) {
            let b = vec![0; if n == 0 { 0 } else { ranks[n - 1] }];
            add_cell(&mut ranks, &mut cols, n, b);
            expect_free[n] += 1;
        }
        if n >= 1 && rng.gen_bool(0.6) {
            let m = rng.gen_range(2..7);
            let lower = if n == 1 { 0 } else { ranks[n - 2] };
            add_cell(&mut ranks, &mut cols, n - 1, vec![0; lower]);
            let mut b = vec![0; ranks[n - 1]];
            *b.last_mut().unwrap() = m;
            add_cell(&mut ranks, &mut cols, n, b);
            expect_tors[n - 1].push(m);
        }
    }
    // elementary expansions: new (n-1)-cell a with ∂a = -∂z, new n-cell b with ∂b = a + z
    for _ in 0..rng.gen_range(3..12) {
        let n = rng.gen_range(1..=top);
        let z: Vec<i64> = (0..ranks[n - 1]).map(|_| rng.gen_range(-2..=2)).collect();
        let mut da = vec![0i64; if n >= 2 { ranks[n - 2] } else { 0 }];
        if n >= 2 {
            for (i, zi) in z.iter().enumerate() {
                for (r, v) in cols[n - 1][i].iter().enumerate() {
                    da[r] -= zi * v;
                }
            }
        }
        add_cell(&mut ranks, &mut cols, n - 1, da);
        let mut db = z.clone();
        db.push(1);
        add_cell(&mut ranks, &mut cols, n, db);
    }
    // changes of basis e_i <- e_i + q e_j
    for _ in 0..rng.gen_range(5..20) {
        let n = rng.gen_range(0..=top);
        if ranks[n] < 2 {
            continue;
        }
        let i = rng.gen_range(0..ranks[n]);
        let j = (i + 1 + rng.gen_range(0..ranks[n] - 1)) % ranks[n];
        let q: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        if n >= 1 {
            let add: Vec<i64> = cols[n][j].iter().map(|v| q * v).collect();
            for (x, a) in cols[n][i].iter_mut().zip(add) {
                *x += a;
            }
        }
        if n < top {
            for c in cols[n + 1].iter_mut() {
                c[j] -= q * c[i];
            }
        }
    }
    let mats = (1..=top)
        .map(|n| {
            let trip = cols[n]
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.iter().enumerate().map(move |(r, v)| (r, i, Int::from(*v))));
            IntMatrix::from_triplets(ranks[n - 1], ranks[n], trip)
        })
        .collect();
    let complex = FreeChainComplexZ::new(ranks, mats).unwrap();
    let homology = (0..=top)
        .map(|n| AbelianInvariants::from_divisors(expect_free[n], expect_tors[n].iter().map(|&m| Int::from(m))))
        .collect::<Vec<_>>();
    // torsion summands of coprime orders merge in the canonical form
    let homology = homology
        .into_iter()
        .map(|h| {
            let g = FreeChainComplexZ::new(
                vec![h.torsion.len(), h.torsion.len()],
                vec![IntMatrix::diagonal(h.torsion.len(), h.torsion.len(), &h.torsion)],
            )
            .unwrap();
            let mut canon = g.homology(0).unwrap();
            canon.free_rank = h.free_rank;
            canon
        })
        .collect();
    (complex, homology)
}

#[test]
fn contraction_trace_pairs_units() {
    let (c, _) = disguised_complex(7, 4);
    let r = c.contract();
    assert!(!r.trace.is_empty());
    for step in &r.trace {
        assert!(step.degree >= 1);
    }
    let total_before: usize = c.ranks().iter().sum();
    let total_after: usize = r.ranks().iter().sum();
    assert_eq!(total_before - total_after, 2 * r.trace.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_preserves_homology(seed in any::<u64>(), top in 1usize..5) {
        let (c, expected) = disguised_complex(seed, top);
        c.verify().unwrap();
        prop_assert_eq!(c.homology_all().unwrap(), expected.clone());
        let r = c.contract();
        r.verify().unwrap();
        prop_assert_eq!(r.homology_all().unwrap(), expected);
        for n in 0..=top {
            prop_assert!(r.rank(n) <= c.rank(n));
        }
        let rr = r.contract();
        prop_assert_eq!(rr.ranks(), r.ranks());
    }
}
