use std::collections::HashSet;

use intcoh::congruence::{generated_index, lift_bottom_row, CongruenceSubgroup, Kind, Subgroup};
use intcoh::sl2z::SL2Z;
use intcoh::Error;
use proptest::prelude::*;

/// Index by brute force: the image of SL2(Z) -> SL2(Z/N) is onto, so
/// [SL2(Z):Γ] is |SL2(Z/N)| divided by the size of the image of Γ.
fn brute_index(kind: Kind, n: i64) -> u64 {
    let mut total = 0u64;
    let mut image = 0u64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if (a * d - b * c - 1).rem_euclid(n) != 0 {
                        continue;
                    }
                    total += 1;
                    let one = 1 % n;
                    let inside = match kind {
                        Kind::Gamma0 => c == 0,
                        Kind::Gamma1 => c == 0 && a == one && d == one,
                        Kind::Principal => c == 0 && b == 0 && a == one && d == one,
                    };
                    image += u64::from(inside);
                }
            }
        }
    }
    total / image
}

#[test]
fn index_matches_brute_force_and_formula() {
    for n in 1..=12 {
        for kind in [Kind::Gamma0, Kind::Gamma1, Kind::Principal] {
            let g = CongruenceSubgroup::new(kind, n).unwrap();
            let expected = brute_index(kind, n);
            assert_eq!(g.index_formula(), expected, "{g}");
            assert_eq!(g.transversal().len() as u64, expected, "{g}");
        }
    }
}

#[test]
fn known_indices() {
    assert_eq!(CongruenceSubgroup::gamma0(39).unwrap().transversal().len(), 56);
    assert_eq!(CongruenceSubgroup::principal(6).unwrap().transversal().len(), 144);
    assert_eq!(CongruenceSubgroup::gamma0(50).unwrap().transversal().len(), 90);
    assert_eq!(CongruenceSubgroup::gamma0(1000).unwrap().transversal().len(), 1800);
    assert_eq!(CongruenceSubgroup::gamma0(11).unwrap().transversal().len(), 12);
}

#[test]
fn invalid_level() {
    assert_eq!(CongruenceSubgroup::gamma0(0), Err(Error::InvalidLevel(0)));
    assert!(matches!(CongruenceSubgroup::principal(-3), Err(Error::InvalidLevel(-3))));
}

#[test]
fn p1_transversal_agrees_with_bfs() {
    for n in [1, 2, 11, 39, 50, 360, 1000, 2500] {
        let g = CongruenceSubgroup::gamma0(n).unwrap();
        let p1 = g.p1_transversal().unwrap();
        assert_eq!(p1.len() as u64, g.index_formula());
        for (k, r) in p1.reps.iter().enumerate() {
            assert_eq!(p1.coset_index(r), k);
        }
    }
    assert!(CongruenceSubgroup::gamma1(5).unwrap().p1_transversal().is_err());
}

#[test]
fn lifted_rows_have_prescribed_residues() {
    for n in [2i64, 7, 12, 30] {
        for c in 0..n {
            for d in 0..n {
                if num_gcd(num_gcd(c, d), n) != 1 {
                    continue;
                }
                let m = lift_bottom_row((c, d), n);
                assert_eq!(m.c().rem_euclid_i64(n), c);
                assert_eq!(m.d().rem_euclid_i64(n), d);
            }
        }
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        num_gcd(b, a % b)
    }
}

fn check_generators(g: &CongruenceSubgroup) -> usize {
    let gens = g.generators();
    for x in &gens {
        assert!(g.member(x), "{x} not in {g}");
    }
    let idx = generated_index(&gens, 200_000).expect("coset enumeration overflowed");
    assert_eq!(idx as u64, g.index_formula(), "{g}: generators span a subgroup of index {idx}");
    gens.len()
}

#[test]
fn generators_generate() {
    for n in 1..=16 {
        for kind in [Kind::Gamma0, Kind::Gamma1, Kind::Principal] {
            check_generators(&CongruenceSubgroup::new(kind, n).unwrap());
        }
    }
    for n in [39, 50, 64, 100] {
        check_generators(&CongruenceSubgroup::gamma0(n).unwrap());
    }
}

#[test]
fn generator_set_has_no_repeats() {
    let g = CongruenceSubgroup::principal(6).unwrap();
    let gens = g.generators();
    let set: HashSet<SL2Z> = gens.iter().cloned().collect();
    assert_eq!(set.len(), gens.len());
    assert!(gens.iter().all(|x| !x.is_identity()));
    // Γ(6) is free of rank 1 + 72/6 = 13, so 13 is also a lower bound
    assert_eq!(gens.len(), 13);
    assert!(check_generators(&CongruenceSubgroup::gamma0(39).unwrap()) <= 18);
    let full = CongruenceSubgroup::full().generators();
    assert_eq!(full.len(), 2);
    assert!(full.contains(&SL2Z::s()) && full.contains(&SL2Z::u()));
}

#[test]
fn cusp_counts() {
    // cusps of Γ₀(N): Σ_{d|N} φ(gcd(d, N/d))
    let phi = |m: i64| (1..=m).filter(|&k| num_gcd(k, m) == 1).count();
    for n in 1..=60i64 {
        let expected: usize = (1..=n).filter(|d| n % d == 0).map(|d| phi(num_gcd(d, n / d))).sum();
        assert_eq!(CongruenceSubgroup::gamma0(n).unwrap().cusp_count(), expected, "Γ₀({n})");
    }
    assert_eq!(CongruenceSubgroup::principal(6).unwrap().cusp_count(), 12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lookup_factors_into_subgroup_times_rep(
        a in -500i64..500, b in -500i64..500, n in 1i64..40, kind in 0usize..3
    ) {
        let kind = [Kind::Gamma0, Kind::Gamma1, Kind::Principal][kind];
        let g = CongruenceSubgroup::new(kind, n).unwrap();
        // a random element as a word in S and T
        let mut m = SL2Z::identity();
        for (i, e) in [a, b, a ^ b].iter().enumerate() {
            m = &(&m * &SL2Z::t().pow(*e)) * &SL2Z::s().pow(i as i64 + 1);
        }
        let tr = g.transversal();
        let (j, gamma) = tr.lookup(&m);
        prop_assert!(g.contains(&gamma));
        prop_assert_eq!(&(&gamma * &tr.reps[j]), &m);
        let perm = tr.permutation(&m);
        let mut sorted = perm.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..tr.len()).collect::<Vec<_>>());
    }
}

#[test]
fn p1_lookup_without_table() {
    // above the table limit the canonical form is computed per lookup
    let g = CongruenceSubgroup::gamma0(2500).unwrap();
    let tr = g.p1_transversal().unwrap();
    for (k, r) in tr.reps.iter().enumerate().step_by(37) {
        let shifted = &(&SL2Z::t().pow(k as i64 % 11) * r) * &SL2Z::identity();
        assert_eq!(tr.coset_index(&shifted), k);
        assert_eq!(tr.coset_index(&r.neg()), k);
    }
}

fn word_matrix(exps: &[i64]) -> SL2Z {
    let mut m = SL2Z::identity();
    for e in exps {
        m = &(&m * &SL2Z::t().pow(*e)) * &SL2Z::s();
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn coset_keys_agree_with_membership(
        x in proptest::collection::vec(-60i64..60, 1..5),
        y in proptest::collection::vec(-60i64..60, 1..5),
        n in prop_oneof![1i64..64, 2040i64..2060, 2990i64..3010],
        kind in 0usize..3,
    ) {
        let kind = [Kind::Gamma0, Kind::Gamma1, Kind::Principal][kind];
        let g = CongruenceSubgroup::new(kind, n).unwrap();
        let (p, q) = (word_matrix(&x), word_matrix(&y));
        let same_coset = g.member(&(&p * &q.inverse()));
        prop_assert_eq!(g.coset_key(&p) == g.coset_key(&q), same_coset);
        // γ·q with γ ∈ Γ(N) ⊆ Γ always lands in the coset of q
        let lower = SL2Z::new(1, 0, n, 1).unwrap();
        let gamma = &(&SL2Z::t().pow(n * x[0]) * &lower.pow(y[0])) * &SL2Z::t().pow(n);
        prop_assert!(g.member(&gamma));
        prop_assert_eq!(g.coset_key(&(&gamma * &q)), g.coset_key(&q));
    }
}
