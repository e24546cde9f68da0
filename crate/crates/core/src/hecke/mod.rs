//! Hecke operators T_g = tr∘α∘β on H^n(Γ, P(k)), their spectra, and
//! eigenform coefficients.
//!
//! For Γ' = Γ ∩ gΓg⁻¹ with Γ = ⊔ Γ'u_l and Φ an equivariant chain map over
//! φ(γ) = g⁻¹γg, the operator on cochains is
//! (Tf)(x) = Σ_l ρ(u_l⁻¹ g)·f(Φ(u_l x)).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::coeffmod::{hom_complex, CochainComplexZ, PolynomialModule};
use crate::congruence::{CongruenceSubgroup, CosetKey, Subgroup, Transversal};
use crate::error::{Error, Result};
use crate::exactlin::{integer_kernel_with_coords, smith_normal_form, AbelianInvariants, IntMatrix};
use crate::int::Int;
use crate::resolutions::{restrict_resolution, sl2z_resolution, FreeZGResolution};
use crate::sl2z::{Mat2, SL2Z};

mod chain_map;

pub use chain_map::{equivariant_chain_map, EquivariantChainMap, GroupMap, LiftChoice};
pub(crate) use chain_map::accumulate;

pub const DEFAULT_COSET_BOUND: usize = 1_000_000;

/// The representative diag(n, 1) of the rational matrix diag(1, 1/n).
pub fn hecke_matrix(n: u64) -> Mat2 {
    Mat2::new(n, 0, 0, 1)
}

/// Γ' = Γ ∩ gΓg⁻¹ for an integral g of positive determinant.
#[derive(Clone, Debug)]
pub struct HeckeSubgroup {
    gamma: CongruenceSubgroup,
    g: Mat2,
    adj: Mat2,
    det: Int,
}

impl HeckeSubgroup {
    pub fn new(gamma: CongruenceSubgroup, g: Mat2) -> Result<HeckeSubgroup> {
        let det = g.det();
        if !det.is_positive() {
            return Err(Error::Invalid(format!("{g} must have positive determinant")));
        }
        Ok(HeckeSubgroup { adj: g.adjugate(), gamma, g, det })
    }

    pub fn gamma(&self) -> &CongruenceSubgroup {
        &self.gamma
    }

    pub fn g(&self) -> &Mat2 {
        &self.g
    }

    /// g⁻¹·a·g when it is integral.
    pub fn conjugate(&self, a: &SL2Z) -> Option<SL2Z> {
        let m = self.adj.mul(a.as_mat()).mul(&self.g);
        let n = &self.det;
        if [&m.a, &m.b, &m.c, &m.d].iter().all(|x| n.divides(x)) {
            Some(SL2Z::new(m.a.exact_div(n), m.b.exact_div(n), m.c.exact_div(n), m.d.exact_div(n)).unwrap())
        } else {
            None
        }
    }

    /// Writes adj(g)·a = W·H with W ∈ SL2(Z) and H = [[h0, h1], [0, h2]]
    /// in Hermite form (h0, h2 > 0, 0 ≤ h1 < h2).
    fn hermite_split(&self, a: &SL2Z) -> ([i64; 3], SL2Z) {
        let y = self.adj.mul(a.as_mat());
        let (g0, x, z) = y.a.ext_gcd(&y.c);
        let winv = Mat2::new(x, z, -y.c.exact_div(&g0), y.a.exact_div(&g0));
        let h = winv.mul(&y);
        let (q, b) = h.b.div_mod_floor(&h.d);
        let shift = Mat2::new(1, -q, 0, 1);
        let winv = shift.mul(&winv);
        let w = winv.adjugate().to_sl2z().expect("unimodular by construction");
        let key = [g0.to_i64().unwrap(), b.to_i64().unwrap(), h.d.to_i64().unwrap()];
        (key, w)
    }
}

impl Subgroup for HeckeSubgroup {
    fn contains(&self, a: &SL2Z) -> bool {
        self.gamma.member(a) && self.conjugate(a).is_some_and(|c| self.gamma.member(&c))
    }

    // Γ'a = Γ'b iff ab⁻¹ ∈ Γ and Y_a·Y_b⁻¹ ∈ Γ for Y = adj(g)·(·)
    fn coset_key(&self, a: &SL2Z) -> CosetKey {
        let (h, w) = self.hermite_split(a);
        let mut key = self.gamma.coset_key(a);
        key.push(-1);
        key.extend(h);
        key.extend(self.gamma.coset_key(&w));
        key
    }

    fn name(&self) -> String {
        format!("{} ∩ g{}g⁻¹ (g = {})", self.gamma, self.gamma, self.g)
    }
}

/// Γ, g, Γ' and the right cosets Γ = ⊔ Γ'·u_l.
#[derive(Clone, Debug)]
pub struct HeckeDescriptor {
    pub subgroup: Arc<HeckeSubgroup>,
    pub coset_reps: Vec<SL2Z>,
}

impl HeckeDescriptor {
    pub fn gamma(&self) -> &CongruenceSubgroup {
        self.subgroup.gamma()
    }

    pub fn g(&self) -> &Mat2 {
        self.subgroup.g()
    }

    pub fn index(&self) -> usize {
        self.coset_reps.len()
    }
}

pub fn gamma_prime_data(gamma: &CongruenceSubgroup, g: &Mat2) -> Result<HeckeDescriptor> {
    gamma_prime_data_bounded(gamma, g, DEFAULT_COSET_BOUND)
}

/// Breadth-first search over Γ'\Γ using the generators of Γ and their inverses.
pub fn gamma_prime_data_bounded(gamma: &CongruenceSubgroup, g: &Mat2, bound: usize) -> Result<HeckeDescriptor> {
    let sub = Arc::new(HeckeSubgroup::new(gamma.clone(), g.clone())?);
    let gens = gamma.generators();
    let moves: Vec<SL2Z> = gens.iter().cloned().chain(gens.iter().map(|x| x.inverse())).collect();
    let mut reps = vec![SL2Z::identity()];
    let mut seen: HashMap<CosetKey, usize> = HashMap::from([(sub.coset_key(&SL2Z::identity()), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for m in &moves {
            let u = &reps[k] * m;
            let key = sub.coset_key(&u);
            if seen.contains_key(&key) {
                continue;
            }
            if reps.len() >= bound {
                return Err(Error::IndexTooLarge(bound));
            }
            seen.insert(key, reps.len());
            queue.push_back(reps.len());
            reps.push(u);
        }
    }
    Ok(HeckeDescriptor { subgroup: sub, coset_reps: reps })
}

/// A basis of H^n of a cochain complex adapted to the Smith form of the
/// coboundaries inside the cocycles: y = U·z for kernel coordinates z, the
/// first `rank` coordinates span the saturation of B^n.
#[derive(Clone, Debug)]
pub struct CohomologyBasis {
    pub degree: usize,
    /// columns: a ℤ-basis of Z^n
    pub kernel: IntMatrix,
    /// coords · kernel = 1
    pub coords: IntMatrix,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub divisors: Vec<Int>,
    pub rank: usize,
}

impl CohomologyBasis {
    pub fn new(c: &CochainComplexZ, n: usize) -> Result<CohomologyBasis> {
        if n >= c.top_degree() {
            return Err(Error::DegreeOutOfRange { degree: n, max: c.top_degree().saturating_sub(1) });
        }
        let ker = integer_kernel_with_coords(c.coboundary(n));
        let b = ker.coords.mul(&c.incoming(n))?;
        let s = smith_normal_form(&b);
        Ok(CohomologyBasis {
            degree: n,
            kernel: ker.basis,
            coords: ker.coords,
            u: s.u,
            u_inv: s.u_inv,
            divisors: s.d.into_iter().take(s.rank).collect(),
            rank: s.rank,
        })
    }

    pub fn dimension(&self) -> usize {
        self.kernel.cols()
    }

    pub fn free_rank(&self) -> usize {
        self.dimension() - self.rank
    }

    /// Indices among the y-coordinates carrying nontrivial torsion.
    pub fn torsion_indices(&self) -> Vec<usize> {
        (0..self.rank).filter(|&i| !self.divisors[i].is_unit()).collect()
    }

    pub fn invariants(&self) -> AbelianInvariants {
        AbelianInvariants::from_divisors(self.free_rank(), self.divisors.iter().cloned())
    }

    /// Cocycles representing the free generators then the torsion generators,
    /// as columns in C^n.
    pub fn representatives(&self) -> IntMatrix {
        let cols: Vec<usize> = (self.rank..self.dimension()).chain(self.torsion_indices()).collect();
        let all: Vec<usize> = (0..self.dimension()).collect();
        self.kernel.mul(&self.u_inv.select(&all, &cols)).expect("shapes agree")
    }

    /// The cocycle map `t` : C^n → C^n in y-coordinates. Fails unless t
    /// preserves cocycles and the saturation of the coboundaries.
    pub fn induced(&self, complex: &CochainComplexZ, t: &IntMatrix) -> Result<IntMatrix> {
        let tk = t.mul(&self.kernel)?;
        if self.degree < complex.top_degree() && !complex.coboundary(self.degree).mul(&tk)?.is_zero() {
            return Err(Error::Invalid("cochain map does not preserve cocycles".into()));
        }
        let m = self.u.mul(&self.coords)?.mul(&tk)?.mul(&self.u_inv)?;
        for i in self.rank..m.rows() {
            for j in 0..self.rank {
                if !m.get(i, j).is_zero() {
                    return Err(Error::Invalid("cochain map does not preserve coboundaries".into()));
                }
            }
        }
        Ok(m)
    }

    /// Splits a map in y-coordinates into its free quotient block and its
    /// action on the torsion generators (entries reduced modulo the orders).
    pub fn split(&self, m: &IntMatrix) -> (IntMatrix, IntMatrix) {
        let free: Vec<usize> = (self.rank..self.dimension()).collect();
        let tors = self.torsion_indices();
        let f = m.select(&free, &free);
        let rows: Vec<Vec<Int>> = tors
            .iter()
            .map(|&a| tors.iter().map(|&b| m.get(a, b).rem_euclid(&self.divisors[a])).collect())
            .collect();
        let t = if rows.is_empty() { IntMatrix::zeros(0, 0) } else { IntMatrix::from_rows(rows) };
        (f, t)
    }
}

/// T_g on H^n: the free-quotient block, and the action on torsion generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeckeMatrix {
    pub degree: usize,
    pub g: String,
    pub free: IntMatrix,
    pub torsion_orders: Vec<Int>,
    pub torsion: IntMatrix,
}

impl HeckeMatrix {
    pub fn charpoly(&self) -> Vec<Int> {
        charpoly(&self.free)
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of_polynomial(&self.charpoly())
    }
}

/// Everything fixed by (Γ, n, M): the resolution, its restriction to Γ, the
/// cochain complex and an H^n basis. Operators for different g share it.
pub struct HeckeContext {
    gamma: CongruenceSubgroup,
    degree: usize,
    module: PolynomialModule,
    resolution: Arc<FreeZGResolution>,
    transversal: Arc<Transversal>,
    complex: CochainComplexZ,
    basis: CohomologyBasis,
}

impl HeckeContext {
    /// Uses the resolution from the cubic tree, of length n+1.
    pub fn new(gamma: &CongruenceSubgroup, degree: usize, module: PolynomialModule) -> Result<HeckeContext> {
        let r = Arc::new(sl2z_resolution(degree + 1)?);
        HeckeContext::with_resolution(gamma, degree, module, r)
    }

    pub fn with_resolution(
        gamma: &CongruenceSubgroup,
        degree: usize,
        module: PolynomialModule,
        resolution: Arc<FreeZGResolution>,
    ) -> Result<HeckeContext> {
        if !resolution.has_homotopy() {
            return Err(Error::NoHomotopy);
        }
        if resolution.max_degree() <= degree {
            return Err(Error::DegreeOutOfRange { degree, max: resolution.max_degree().saturating_sub(1) });
        }
        let tr = Arc::new(gamma.preferred_transversal());
        let restricted = restrict_resolution(resolution.clone(), tr.clone());
        let complex = hom_complex(&restricted, &module);
        let basis = CohomologyBasis::new(&complex, degree)?;
        Ok(HeckeContext { gamma: gamma.clone(), degree, module, resolution, transversal: tr, complex, basis })
    }

    pub fn gamma(&self) -> &CongruenceSubgroup {
        &self.gamma
    }

    pub fn complex(&self) -> &CochainComplexZ {
        &self.complex
    }

    pub fn basis(&self) -> &CohomologyBasis {
        &self.basis
    }

    pub fn transversal(&self) -> &Arc<Transversal> {
        &self.transversal
    }

    pub fn module(&self) -> &PolynomialModule {
        &self.module
    }

    pub fn resolution(&self) -> &Arc<FreeZGResolution> {
        &self.resolution
    }

    pub fn cohomology(&self) -> AbelianInvariants {
        self.basis.invariants()
    }

    /// T_g as a map C^n → C^n of cochains.
    pub fn cochain_operator(&self, desc: &HeckeDescriptor, choice: LiftChoice) -> Result<IntMatrix> {
        let n = self.degree;
        let sub = desc.subgroup.clone();
        let sub_tr = Arc::new(Transversal::bfs(sub.clone(), DEFAULT_COSET_BOUND)?);
        let conj = sub.clone();
        let phi: GroupMap = Arc::new(move |x: &SL2Z| conj.conjugate(x).expect("element of Γ'"));
        let map = equivariant_chain_map(self.resolution.clone(), sub_tr.clone(), &self.resolution, phi, n, choice)?;
        let tr = &self.transversal;
        let idx = tr.len();
        let g = desc.g();
        let pre: Vec<Mat2> = desc.coset_reps.iter().map(|u| u.inverse().as_mat().mul(g)).collect();
        let mut acc = HashMap::new();
        for i in 0..self.resolution.rank(n) {
            for (j, t) in tr.reps.iter().enumerate() {
                let row = i * idx + j;
                for (u, p) in desc.coset_reps.iter().zip(&pre) {
                    let (m, gamma) = sub_tr.lookup(&(u * t));
                    let y = map.image(n, i, m).translate(&sub.conjugate(&gamma).expect("element of Γ'"));
                    accumulate(&mut acc, row, &y, &Int::ONE, tr, p, &self.module);
                }
            }
        }
        let dim = self.complex.ranks()[n];
        Ok(IntMatrix::from_triplets(dim, dim, acc.into_iter().map(|((a, b), v)| (a, b, v))))
    }

    pub fn operator(&self, g: &Mat2) -> Result<HeckeMatrix> {
        self.operator_with(g, LiftChoice::Base)
    }

    pub fn operator_with(&self, g: &Mat2, choice: LiftChoice) -> Result<HeckeMatrix> {
        let desc = gamma_prime_data(&self.gamma, g)?;
        let t = self.cochain_operator(&desc, choice)?;
        let m = self.basis.induced(&self.complex, &t)?;
        let (free, torsion) = self.basis.split(&m);
        Ok(HeckeMatrix {
            degree: self.degree,
            g: g.to_string(),
            free,
            torsion_orders: self.basis.torsion_indices().iter().map(|&i| self.basis.divisors[i].clone()).collect(),
            torsion,
        })
    }

    /// T_n for g = diag(n, 1).
    pub fn t(&self, n: u64) -> Result<HeckeMatrix> {
        self.operator(&hecke_matrix(n))
    }
}

pub fn hecke_operator(gamma: &CongruenceSubgroup, degree: usize, g: &Mat2, module: PolynomialModule) -> Result<HeckeMatrix> {
    HeckeContext::new(gamma, degree, module)?.operator(g)
}

pub fn hecke_eigenvalues(
    gamma: &CongruenceSubgroup,
    degree: usize,
    primes: &[u64],
    module: PolynomialModule,
) -> Result<Vec<(u64, Spectrum)>> {
    let ctx = HeckeContext::new(gamma, degree, module)?;
    primes.iter().map(|&p| Ok((p, ctx.t(p)?.spectrum()))).collect()
}

/// det(x·1 − A) by Faddeev–LeVerrier; coefficients from x⁰ up to xⁿ.
pub fn charpoly(a: &IntMatrix) -> Vec<Int> {
    let n = a.rows();
    let a = a.dense_rows();
    let mut c = vec![Int::ZERO; n + 1];
    c[n] = Int::ONE;
    let mut m = vec![vec![Int::ZERO; n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·1
        let mut next = mul_dense(&a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c[n - k + 1];
        }
        m = next;
        let am = mul_dense(&a, &m);
        let tr = (0..n).fold(Int::ZERO, |s, i| s + &am[i][i]);
        c[n - k] = -tr.exact_div(&Int::from(k as i64));
    }
    c
}

fn mul_dense(a: &[Vec<Int>], b: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let n = a.len();
    let mut out = vec![vec![Int::ZERO; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

/// Integer roots of a monic integer polynomial with multiplicities, and the
/// cofactor without integer roots (coefficients from x⁰ up).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Spectrum {
    pub roots: Vec<(Int, usize)>,
    pub residual: Vec<Int>,
}

impl Spectrum {
    pub fn of_polynomial(p: &[Int]) -> Spectrum {
        let mut p = p.to_vec();
        let mut roots = Vec::new();
        let zeros = p.iter().take_while(|c| c.is_zero()).count();
        if zeros > 0 {
            p.drain(..zeros);
            roots.push((Int::ZERO, zeros));
        }
        if p.len() > 1 {
            for d in divisors(&p[0]) {
                for r in [d.clone(), -&d] {
                    let mut mult = 0;
                    while p.len() > 1 {
                        match divide_root(&p, &r) {
                            Some(q) => {
                                p = q;
                                mult += 1;
                            }
                            None => break,
                        }
                    }
                    if mult > 0 {
                        roots.push((r, mult));
                    }
                }
            }
        }
        roots.sort_by(|a, b| b.0.cmp(&a.0));
        Spectrum { roots, residual: p }
    }

    pub fn splits(&self) -> bool {
        self.residual.len() == 1
    }

    /// The rational eigenvalues with multiplicity, largest first.
    pub fn eigenvalues(&self) -> Vec<Int> {
        self.roots.iter().flat_map(|(r, m)| std::iter::repeat_n(r.clone(), *m)).collect()
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.roots.iter().map(|(r, m)| if *m == 1 { r.to_string() } else { format!("{r}^{m}") }).collect();
        write!(f, "{{{}}}", parts.join(", "))?;
        if !self.splits() {
            let coeffs: Vec<String> = self.residual.iter().map(|c| c.to_string()).collect();
            write!(f, " and roots of [{}]", coeffs.join(", "))?;
        }
        Ok(())
    }
}

/// p / (x − r) when r is a root.
fn divide_root(p: &[Int], r: &Int) -> Option<Vec<Int>> {
    let n = p.len() - 1;
    let mut q = vec![Int::ZERO; n];
    let mut carry = Int::ZERO;
    for k in (1..=n).rev() {
        carry = &p[k] + &(&carry * r);
        q[k - 1] = carry.clone();
    }
    (&p[0] + &(&carry * r)).is_zero().then_some(q)
}

/// Positive divisors by trial division up to 10⁶; a cofactor left over after
/// that is treated as prime.
fn divisors(c: &Int) -> Vec<Int> {
    let mut n = c.abs();
    let mut primes: Vec<(Int, u32)> = Vec::new();
    let mut p = Int::from(2);
    while &p * &p <= n && p <= Int::from(1_000_000) {
        let mut e = 0;
        while p.divides(&n) {
            n = n.exact_div(&p);
            e += 1;
        }
        if e > 0 {
            primes.push((p.clone(), e));
        }
        p += Int::ONE;
    }
    if !n.is_one() {
        primes.push((n, 1));
    }
    let mut out = vec![Int::ONE];
    for (p, e) in primes {
        let mut next = Vec::new();
        for d in &out {
            let mut x = d.clone();
            for _ in 0..=e {
                next.push(x.clone());
                x = &x * &p;
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// a_1..a_B of a normalised weight-2 eigenform from its a_p:
/// a_rs = a_r a_s for coprime r, s; a_{p^m} = a_{p^{m−1}} a_p − p a_{p^{m−2}}
/// for p ∤ N; a_{p^m} = a_p^m for p | N.
pub fn expand_eigenform(ap: &BTreeMap<u64, Int>, level: u64, bound: usize) -> Result<Vec<Int>> {
    let mut a = vec![Int::ZERO; bound + 1];
    if bound >= 1 {
        a[1] = Int::ONE;
    }
    for n in 2..=bound {
        let p = (2..=n).find(|p| n % p == 0).unwrap();
        let mut q = n;
        let mut m = 0u32;
        while q % p == 0 {
            q /= p;
            m += 1;
        }
        if q > 1 {
            a[n] = &a[n / q] * &a[q];
            continue;
        }
        let p_coef = ap.get(&(p as u64)).ok_or(Error::MissingPrime(p as u64))?;
        a[n] = if m == 1 {
            p_coef.clone()
        } else if level.is_multiple_of(p as u64) {
            &a[n / p] * p_coef
        } else {
            &(&a[n / p] * p_coef) - &(&a[n / (p * p)] * &Int::from(p as i64))
        };
    }
    Ok(a.into_iter().skip(1).collect())
}
