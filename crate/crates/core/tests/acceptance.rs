//! One line per acceptance criterion, with its time bound. Runs as a plain
//! binary so the lines always appear in the test log.
//!
//! A criterion listed in KNOWN_DEVIATIONS still prints FAIL; it only stops
//! the run from exiting nonzero. Anything else failing is an error.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use intcoh::coeffmod::{action_matrix, hom_complex, PolynomialModule};
use intcoh::congruence::CongruenceSubgroup;
use intcoh::cuspidal::cuspidal_cohomology;
use intcoh::cwdvf::{critical_complex, is_admissible, maximal_dvf, RegularCWComplex};
use intcoh::hecke::{expand_eigenform, hecke_matrix, HeckeContext, LiftChoice};
use intcoh::quadring::{gamma0_index, l_ratio, torsion_ratio, LogBase, QuadIdeal, QuadInt};
use intcoh::resolutions::{restrict_resolution, sl2z_resolution, FreeZGResolution, ModElt};
use intcoh::sl2z::{Mat2, SL2Z};
use intcoh::{AbelianInvariants, Int, IntMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose literal target is not met, each with a ledger entry.
const KNOWN_DEVIATIONS: [(usize, &str); 2] = [
    (3, "free rank 174 as stated; the computed rank is 74, which matches Eichler–Shimura"),
    (9, "0.00913432 is the floor-log10 value 44/4817; the real log10 ratio is 0.0091507"),
];

struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Outcome {
        Outcome { checks: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.checks.push((label.into(), ok));
    }
}

fn criterion(n: usize, title: &str, bound: Duration, body: impl FnOnce(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    body(&mut out);
    let elapsed = start.elapsed();
    let in_time = elapsed <= bound;
    let ok = in_time && out.checks.iter().all(|c| c.1);
    let failed: Vec<&str> = out.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    let mut line = format!(
        "{} {n:>2}. {title} [{:.2} s, bound {} s]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        bound.as_secs()
    );
    if !failed.is_empty() {
        line.push_str(&format!(" -- failed: {}", failed.join("; ")));
    }
    if !in_time {
        line.push_str(" -- over time");
    }
    println!("{line}");
    ok
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn random_sl2z(rng: &mut ChaCha8Rng) -> SL2Z {
    let mut g = SL2Z::identity();
    for _ in 0..rng.gen_range(0..6) {
        g = &g * &SL2Z::s().pow(rng.gen_range(0..4));
        g = &g * &SL2Z::t().pow(rng.gen_range(-8..9));
    }
    &g * &SL2Z::u().pow(rng.gen_range(0..6))
}

/// d h + h d = 1 (1 − ε in degree 0) on `samples` random multiples of
/// generators by elements of the acting group, in degrees below the top.
fn homotopy_holds(r: &FreeZGResolution, element: impl Fn(&mut ChaCha8Rng) -> SL2Z, samples: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..r.max_degree()).all(|n| {
        (0..samples).all(|_| {
            let c = Int::from(rng.gen_range(-3i64..=3));
            let x = ModElt::term(rng.gen_range(0..r.rank(n)), element(&mut rng), c);
            let dh = r.boundary(n + 1, &r.homotopy(n, &x).unwrap());
            let hd = if n == 0 { r.augmentation_section(&x) } else { r.homotopy(n - 1, &r.boundary(n, &x)).unwrap() };
            &dh + &hd == x
        })
    })
}

fn z_mod(orders: &[i64], free: usize) -> AbelianInvariants {
    AbelianInvariants::from_divisors(free, orders.iter().map(|&m| Int::from(m)))
}

/// A random simplicial complex on at most 7 vertices: the closure of random
/// triangles, solid or hollow tetrahedra, and loose edges.
fn random_simplicial(rng: &mut ChaCha8Rng) -> RegularCWComplex {
    let nv = rng.gen_range(4..8);
    let mut simplices: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); 4];
    let mut top = Vec::new();
    let pick = |rng: &mut ChaCha8Rng, k: usize| {
        let mut s: Vec<usize> = rand::seq::index::sample(rng, nv, k).into_vec();
        s.sort();
        s
    };
    for _ in 0..rng.gen_range(0..9) {
        top.push(pick(rng, 3));
    }
    for _ in 0..rng.gen_range(0..7) {
        top.push(pick(rng, 2));
    }
    match rng.gen_range(0..3) {
        0 => top.push(pick(rng, 4)),
        1 => {
            let t = pick(rng, 4);
            for i in 0..4 {
                let mut f = t.clone();
                f.remove(i);
                top.push(f);
            }
        }
        _ => {}
    }
    for v in 0..nv {
        top.push(vec![v]);
    }
    for s in top {
        for mask in 1u32..(1 << s.len()) {
            let face: Vec<usize> = s.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
            simplices[face.len() - 1].insert(face);
        }
    }
    while simplices.last().is_some_and(|s| s.is_empty()) {
        simplices.pop();
    }
    let lists: Vec<Vec<Vec<usize>>> = simplices.into_iter().map(|s| s.into_iter().collect()).collect();
    let index: Vec<HashMap<&Vec<usize>, usize>> =
        lists.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s, i)).collect()).collect();
    let faces = (1..lists.len())
        .map(|k| {
            lists[k]
                .iter()
                .map(|s| {
                    (0..s.len())
                        .map(|i| {
                            let mut f = s.clone();
                            f.remove(i);
                            (index[k - 1][&f], if i % 2 == 0 { 1 } else { -1 })
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    RegularCWComplex::new(lists.iter().map(Vec::len).collect(), faces).unwrap()
}

/// The same complex with the cells of each dimension renumbered.
fn relabel(x: &RegularCWComplex, rng: &mut ChaCha8Rng) -> RegularCWComplex {
    let perms: Vec<Vec<usize>> = x
        .counts()
        .iter()
        .map(|&n| {
            let mut p: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(p.as_mut_slice(), rng);
            p
        })
        .collect();
    let faces = (1..x.counts().len())
        .map(|k| {
            let mut fk = vec![Vec::new(); x.count(k)];
            for i in 0..x.count(k) {
                fk[perms[k][i]] = x.faces(k, i).iter().map(|&(j, s)| (perms[k - 1][j], s)).collect();
            }
            fk
        })
        .collect();
    RegularCWComplex::new(x.counts().to_vec(), faces).unwrap()
}

fn main() {
    let mut results = BTreeMap::new();

    results.insert(1, criterion(1, "Indices of Γ0(39), Γ(6), Γ0(50), Γ0(1000)", secs(1), |o| {
        for (g, n) in [
            (CongruenceSubgroup::gamma0(39), 56),
            (CongruenceSubgroup::principal(6), 144),
            (CongruenceSubgroup::gamma0(50), 90),
            (CongruenceSubgroup::gamma0(1000), 1800),
        ] {
            let g = g.unwrap();
            let t = Instant::now();
            let idx = g.preferred_transversal().len();
            o.check(format!("{g}: {idx} cosets, expected {n}"), idx == n && g.index_formula() == n as u64);
            o.check(format!("{g} under 1 s"), t.elapsed() < secs(1));
        }
    }));

    results.insert(2, criterion(2, "Resolution to degree 6: d² = 0 and dh + hd = 1, SL2(Z), Γ0(11), Γ(6)", secs(30), |o| {
        let r = Arc::new(sl2z_resolution(6).unwrap());
        o.check("SL2(Z) d² = 0", r.verify().is_ok());
        o.check("SL2(Z) homotopy, 1000 per degree", homotopy_holds(&r, random_sl2z, 1000, 1));
        for (i, g) in [CongruenceSubgroup::gamma0(11).unwrap(), CongruenceSubgroup::principal(6).unwrap()].into_iter().enumerate() {
            let tr = Arc::new(g.preferred_transversal());
            let rg = restrict_resolution(r.clone(), tr.clone());
            o.check(format!("{g} d² = 0"), rg.verify().is_ok());
            let elt = |rng: &mut ChaCha8Rng| tr.lookup(&random_sl2z(rng)).1;
            o.check(format!("{g} homotopy, 1000 per degree"), homotopy_holds(&rg, elt, 1000, 2 + i as u64));
        }
    }));

    results.insert(3, criterion(3, "H¹(Γ0(50), P(4)) = Z2 + Z4 + Z120 + Z^174, H⁵ = (Z2)^77", secs(600), |o| {
        let g = CongruenceSubgroup::gamma0(50).unwrap();
        let r = restrict_resolution(Arc::new(sl2z_resolution(6).unwrap()), Arc::new(g.preferred_transversal()));
        let c = hom_complex(&r, &PolynomialModule::new(4));
        let h1 = c.cohomology(1).unwrap();
        o.check(format!("H¹ torsion {:?}", h1.torsion), h1.torsion == z_mod(&[2, 4, 120], 0).torsion);
        o.check(format!("H¹ free rank {} (stated 174)", h1.free_rank), h1.free_rank == 174);
        // 2·dim S_6(Γ0(50)) + dim E_6(Γ0(50)) = 62 + 12
        o.check("H¹ free rank equals the Eichler–Shimura count 74", h1.free_rank == 74);
        let h5 = c.cohomology(5).unwrap();
        o.check(format!("H⁵ = {h5}"), h5 == z_mod(&[2; 77], 0));
    }));

    results.insert(4, criterion(4, "H₅(Γ0(1000), Z) = Z2 after contraction to rank 1 in degree 0", secs(900), |o| {
        let g = CongruenceSubgroup::gamma0(1000).unwrap();
        let r = restrict_resolution(Arc::new(sl2z_resolution(6).unwrap()), Arc::new(g.preferred_transversal()));
        let c = r.tensor_with_z().contract();
        o.check(format!("rank₀ after contraction {}", c.rank(0)), c.rank(0) == 1);
        let h5 = c.homology(5).unwrap();
        o.check(format!("H₅ = {h5}"), h5 == z_mod(&[2], 0));
    }));

    results.insert(5, criterion(5, "Hecke on H¹(Γ0(11), Z): spectra {1+p, a_p, a_p}", secs(120), |o| {
        let ctx = HeckeContext::new(&CongruenceSubgroup::gamma0(11).unwrap(), 1, PolynomialModule::trivial()).unwrap();
        for (p, ap) in [(2u64, -2i64), (3, -1), (5, 1), (7, -2)] {
            let s = ctx.t(p).unwrap().spectrum();
            let mut want = vec![Int::from(1 + p as i64), Int::from(ap), Int::from(ap)];
            want.sort_by(|a, b| b.cmp(a));
            o.check(format!("T{p} eigenvalues {:?}", s.eigenvalues()), s.splits() && s.eigenvalues() == want);
        }
    }));

    results.insert(6, criterion(6, "T2T5 = T5T2 on H¹(Γ(6), Z)", secs(120), |o| {
        let ctx = HeckeContext::new(&CongruenceSubgroup::principal(6).unwrap(), 1, PolynomialModule::trivial()).unwrap();
        o.check(format!("H¹ = {}", ctx.cohomology()), ctx.cohomology() == AbelianInvariants::free(13));
        let t2 = ctx.t(2).unwrap().free;
        let t5 = ctx.t(5).unwrap().free;
        o.check("T2T5 = T5T2", t2.mul(&t5).unwrap() == t5.mul(&t2).unwrap());
        o.check("T2, T5 not scalar", t2 != IntMatrix::identity(13) && t5 != IntMatrix::identity(13));
    }));

    results.insert(7, criterion(7, "Cuspidal H¹: Γ0(39) with P(2) free of rank 24, Γ0(11) with Z is Z²", secs(300), |o| {
        let a = cuspidal_cohomology(&CongruenceSubgroup::gamma0(39).unwrap(), 1, PolynomialModule::new(2)).unwrap();
        o.check(format!("Γ0(39), P(2): {}", a.kernel), a.kernel == AbelianInvariants::free(24));
        let b = cuspidal_cohomology(&CongruenceSubgroup::gamma0(11).unwrap(), 1, PolynomialModule::trivial()).unwrap();
        o.check(format!("Γ0(11), Z: {}", b.kernel), b.kernel == AbelianInvariants::free(2));
    }));

    results.insert(8, criterion(8, "Discrete vector fields: Bing's house, 100 random complexes", secs(60), |o| {
        let x = RegularCWComplex::bings_house();
        let h = x.chain_complex().homology_all().unwrap();
        o.check("Bing's house homology (Z, 0, 0)", h == vec![AbelianInvariants::free(1), AbelianInvariants::trivial(), AbelianInvariants::trivial()]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut min_critical = usize::MAX;
        for _ in 0..20 {
            let y = relabel(&x, &mut rng);
            let v = maximal_dvf(&y);
            o.check("field admissible", is_admissible(&y, &v).unwrap());
            min_critical = min_critical.min(v.critical_count(&y));
        }
        let v = maximal_dvf(&x);
        min_critical = min_critical.min(v.critical_count(&x));
        o.check(format!("fewest critical cells over 21 maximal fields: {min_critical}"), min_critical >= 2);
        let mut agree = 0;
        for _ in 0..100 {
            let y = random_simplicial(&mut rng);
            let v = maximal_dvf(&y);
            let m = critical_complex(&y, &v).unwrap();
            if m.homology_all().unwrap() == y.chain_complex().homology_all().unwrap() {
                agree += 1;
            }
        }
        o.check(format!("critical-complex homology agrees on {agree}/100"), agree == 100);
    }));

    results.insert(9, criterion(9, "Quadratic ring: 41+56i, L-value and torsion ratios", secs(5), |o| {
        let a = QuadIdeal::from_generators(&[QuadInt::new(41, 56, -1).unwrap()]).unwrap();
        o.check(format!("N = {}", a.norm()), a.norm() == Int::from(4817));
        o.check("prime", a.is_prime());
        let idx = gamma0_index(&a).unwrap();
        o.check(format!("index {idx}"), idx == Int::from(4818));
        let l = l_ratio(-1).unwrap();
        o.check(format!("l_ratio {l:.7} within 5e-4 of 0.0161957"), (l - 0.0161957).abs() < 5e-4);
        let h1: Vec<Int> = ["2", "2", "4", "5", "7", "16", "29", "43", "157", "179", "1877", "7741", "22037", "292306033", "4078793513671"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let t = torsion_ratio(&h1, &a.norm(), LogBase::Ten).unwrap();
        o.check(format!("torsion_ratio {t:.8} within 1e-5 of 0.00913432"), (t - 0.00913432).abs() < 1e-5);
    }));

    results.insert(10, criterion(10, "Properties: contraction, tie-break, action law, eigenform recurrences", secs(300), |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut same = true;
        for _ in 0..50 {
            let c = random_simplicial(&mut rng).chain_complex();
            same &= c.contract().homology_all().unwrap() == c.homology_all().unwrap();
        }
        for n in [11, 39] {
            let g = CongruenceSubgroup::gamma0(n).unwrap();
            let c = restrict_resolution(Arc::new(sl2z_resolution(4).unwrap()), Arc::new(g.preferred_transversal())).tensor_with_z();
            same &= c.contract().homology_all().unwrap() == c.homology_all().unwrap();
        }
        o.check("contract() preserves homology", same);

        let ctx = HeckeContext::new(&CongruenceSubgroup::gamma0(11).unwrap(), 1, PolynomialModule::new(2)).unwrap();
        let stable = [2u64, 3, 5].iter().all(|&p| {
            ctx.operator_with(&hecke_matrix(p), LiftChoice::Base).unwrap()
                == ctx.operator_with(&hecke_matrix(p), LiftChoice::Translated).unwrap()
        });
        o.check("Hecke matrices unchanged by the lift tie-break", stable);

        let mut law = true;
        for _ in 0..1000 {
            let mut m = || Mat2::new(rng.gen_range(-9..10), rng.gen_range(-9..10), rng.gen_range(-9..10), rng.gen_range(-9..10));
            let (a, b) = (m(), m());
            let k = rng.gen_range(0..7);
            let lhs = IntMatrix::from_rows(action_matrix(&a.mul(&b), k));
            let rhs = IntMatrix::from_rows(action_matrix(&a, k)).mul(&IntMatrix::from_rows(action_matrix(&b, k))).unwrap();
            law &= lhs == rhs;
        }
        o.check("action_matrix(AB) = action_matrix(A)·action_matrix(B) on 1000 pairs", law);

        // a_p read off the weight-2 Hecke spectra, then extended by the recurrences
        let ctx = HeckeContext::new(&CongruenceSubgroup::gamma0(11).unwrap(), 1, PolynomialModule::trivial()).unwrap();
        let mut ap = BTreeMap::new();
        for p in [2u64, 3, 5, 7] {
            let s = ctx.t(p).unwrap().spectrum();
            let cusp = s.roots.iter().find(|(_, m)| *m == 2).map(|(r, _)| r.clone()).unwrap();
            ap.insert(p, cusp);
        }
        let a = expand_eigenform(&ap, 11, 10).unwrap();
        o.check(
            format!("a4, a8, a9 = {}, {}, {} (a printed expansion shows +1, +2, -3)", a[3], a[7], a[8]),
            (a[3].clone(), a[7].clone(), a[8].clone()) == (Int::from(2), Int::ZERO, Int::from(-2)),
        );
    }));

    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !**ok).map(|(n, _)| *n).collect();
    for (n, why) in KNOWN_DEVIATIONS {
        if failed.contains(&n) {
            println!("note {n:>2}. known deviation: {why}");
        }
    }
    let unexpected: Vec<usize> = failed.iter().copied().filter(|n| KNOWN_DEVIATIONS.iter().all(|d| d.0 != *n)).collect();
    println!("{} of {} criteria pass", results.len() - failed.len(), results.len());
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
