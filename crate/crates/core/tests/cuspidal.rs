use intcoh::coeffmod::PolynomialModule;
use intcoh::congruence::CongruenceSubgroup;
use intcoh::cuspidal::{cuspidal_cohomology, solve_in_rows, CuspidalSetup};
use intcoh::hecke::{gamma_prime_data, hecke_matrix, HeckeContext, LiftChoice};
use intcoh::{AbelianInvariants, IntMatrix};

/// Genus of X₀(N) from index, elliptic points and cusps.
fn genus(n: i64) -> usize {
    let primes: Vec<i64> = (2..=n).filter(|p| n % p == 0 && (2..*p).all(|d| p % d != 0)).collect();
    let mut index = n;
    for p in &primes {
        index = index / p * (p + 1);
    }
    let legendre = |a: i64, p: i64| -> i64 {
        let r = (1..p).find(|x| (x * x - a).rem_euclid(p) == 0);
        if a.rem_euclid(p) == 0 { 0 } else if r.is_some() { 1 } else { -1 }
    };
    let nu2: i64 = if n % 4 == 0 { 0 } else { primes.iter().map(|&p| if p == 2 { 1 } else { 1 + legendre(-1, p) }).product() };
    let nu3: i64 = if n % 9 == 0 { 0 } else { primes.iter().map(|&p| match p {
        2 => 0,
        3 => 1,
        _ => 1 + legendre(-3, p),
    }).product() };
    let gcd = |mut a: i64, mut b: i64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let phi = |m: i64| (1..=m).filter(|&k| gcd(k, m) == 1).count() as i64;
    let cusps: i64 = (1..=n).filter(|d| n % d == 0).map(|d| phi(gcd(d, n / d))).sum();
    // 12(g − 1) = index − 3ν₂ − 4ν₃ − 6c
    (1 + (index - 3 * nu2 - 4 * nu3 - 6 * cusps) / 12) as usize
}

#[test]
fn gamma0_11_weight_two() {
    let r = cuspidal_cohomology(&CongruenceSubgroup::gamma0(11).unwrap(), 1, PolynomialModule::trivial()).unwrap();
    assert_eq!(r.ambient, AbelianInvariants::free(3));
    assert_eq!(r.boundary, AbelianInvariants::free(2));
    assert_eq!(r.kernel, AbelianInvariants::free(2));
}

#[test]
fn full_group_has_no_cusp_forms() {
    let r = cuspidal_cohomology(&CongruenceSubgroup::full(), 1, PolynomialModule::trivial()).unwrap();
    assert!(r.kernel.is_trivial());
}

#[test]
fn gamma0_39() {
    let g = CongruenceSubgroup::gamma0(39).unwrap();
    // weight 4, i.e. the module of binary quadratic forms
    let r = cuspidal_cohomology(&g, 1, PolynomialModule::new(2)).unwrap();
    assert_eq!(r.kernel, AbelianInvariants::free(24));
    let r = cuspidal_cohomology(&g, 1, PolynomialModule::trivial()).unwrap();
    assert_eq!(r.kernel, AbelianInvariants::free(2 * genus(39)));
}

#[test]
fn weight_two_rank_is_twice_the_genus() {
    for n in [11, 14, 15, 17, 19, 39] {
        let r = cuspidal_cohomology(&CongruenceSubgroup::gamma0(n).unwrap(), 1, PolynomialModule::trivial()).unwrap();
        assert_eq!(r.kernel.free_rank, 2 * genus(n), "Γ₀({n})");
        assert_eq!(r.kernel.free_rank % 2, 0);
    }
}

#[test]
fn restriction_is_a_cochain_map() {
    let s = CuspidalSetup::new(&CongruenceSubgroup::gamma0(15).unwrap(), 1, PolynomialModule::new(2)).unwrap();
    s.chain_map().verify(s.resolution()).unwrap();
    let r0 = s.restriction(0).unwrap();
    let r1 = s.restriction(1).unwrap();
    let lhs = r1.mul(s.full_complex().coboundary(0)).unwrap();
    let rhs = s.boundary_complex().coboundary(0).mul(&r0).unwrap();
    assert_eq!(lhs, rhs);
    assert!(s.restriction(2).is_err());
}

#[test]
fn hecke_preserves_the_cuspidal_lattice() {
    let g = CongruenceSubgroup::gamma0(11).unwrap();
    let s = CuspidalSetup::new(&g, 1, PolynomialModule::trivial()).unwrap();
    let res = s.compute().unwrap();
    let ctx = HeckeContext::with_resolution(&g, 1, PolynomialModule::trivial(), s.resolution().clone()).unwrap();
    assert_eq!(ctx.complex(), s.full_complex());
    let basis = ctx.basis();
    for p in [2u64, 3, 5, 7] {
        let d = gamma_prime_data(&g, &hecke_matrix(p)).unwrap();
        let t = ctx.cochain_operator(&d, LiftChoice::Base).unwrap();
        let tz = basis.coords.mul(&t.mul(&basis.kernel).unwrap()).unwrap();
        let images = tz.mul(&res.kernel_lattice.transpose()).unwrap();
        solve_in_rows(&res.kernel_lattice, &images).unwrap_or_else(|e| panic!("T_{p}: {e}"));
        // the cusp forms carry a_p, the Eisenstein line 1 + p
        let spec = ctx.t(p).unwrap().spectrum();
        assert!(spec.eigenvalues().contains(&intcoh::Int::from(1 + p as i64)));
    }
}

#[test]
fn solve_in_rows_rejects_outside_vectors() {
    let rows = IntMatrix::from_i64(&[&[2, 1], &[0, 3]]);
    let inside = IntMatrix::from_i64(&[&[4], &[5]]);
    assert_eq!(solve_in_rows(&rows, &inside).unwrap(), IntMatrix::from_i64(&[&[2], &[1]]));
    assert!(solve_in_rows(&rows, &IntMatrix::from_i64(&[&[1], &[0]])).is_err());
}
