//! Cuspidal cohomology as the kernel of H^n(Γ, M) → H^n(∂, M), with both
//! sides computed from the Borel–Serre complex and its boundary.
//!
//! For congruence subgroups of SL2(Z) interior and cuspidal cohomology agree,
//! so the kernel is reported as cuspidal.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::coeffmod::{hom_complex, CochainComplexZ, PolynomialModule};
use crate::congruence::{CongruenceSubgroup, Transversal};
use crate::error::{Error, Result};
use crate::exactlin::{hermite_normal_form, homology_of_pair, integer_kernel, AbelianInvariants, IntMatrix};
use crate::hecke::{accumulate, equivariant_chain_map, CohomologyBasis, EquivariantChainMap, GroupMap, LiftChoice};
use crate::int::Int;
use crate::resolutions::{borel_serre_complex, restrict_resolution, wall_resolution, FreeZGResolution};
use crate::sl2z::{Mat2, SL2Z};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CuspidalResult {
    pub degree: usize,
    pub ambient: AbelianInvariants,
    pub boundary: AbelianInvariants,
    /// the induced map between the free quotients, in the bases of both sides
    pub restriction: IntMatrix,
    pub kernel: AbelianInvariants,
    /// rows: a ℤ-basis of the cocycles (in kernel coordinates of the ambient
    /// cocycle lattice) restricting to coboundaries
    pub kernel_lattice: IntMatrix,
}

/// The two resolutions over SL2(Z), the chain map between them, and their
/// cochain complexes over Γ.
pub struct CuspidalSetup {
    degree: usize,
    module: PolynomialModule,
    full: Arc<FreeZGResolution>,
    transversal: Arc<Transversal>,
    map: EquivariantChainMap,
    full_complex: CochainComplexZ,
    boundary_complex: CochainComplexZ,
}

impl CuspidalSetup {
    pub fn new(gamma: &CongruenceSubgroup, degree: usize, module: PolynomialModule) -> Result<CuspidalSetup> {
        let x = borel_serre_complex();
        let (sub, _) = x.boundary_subcomplex().ok_or_else(|| Error::Invalid("no boundary part marked".into()))?;
        let full = Arc::new(wall_resolution(&x, degree + 1, true)?);
        let bdry = Arc::new(wall_resolution(&sub, degree + 1, false)?);
        let id: GroupMap = Arc::new(|g: &SL2Z| g.clone());
        let map = equivariant_chain_map(bdry.clone(), Arc::new(Transversal::trivial()), &full, id, degree, LiftChoice::Base)?;
        let transversal = Arc::new(gamma.preferred_transversal());
        let full_complex = hom_complex(&restrict_resolution(full.clone(), transversal.clone()), &module);
        let boundary_complex = hom_complex(&restrict_resolution(bdry, transversal.clone()), &module);
        Ok(CuspidalSetup { degree, module, full, transversal, map, full_complex, boundary_complex })
    }

    pub fn resolution(&self) -> &Arc<FreeZGResolution> {
        &self.full
    }

    pub fn full_complex(&self) -> &CochainComplexZ {
        &self.full_complex
    }

    pub fn boundary_complex(&self) -> &CochainComplexZ {
        &self.boundary_complex
    }

    pub fn chain_map(&self) -> &EquivariantChainMap {
        &self.map
    }

    /// Restriction of cochains C^m_full → C^m_∂ for m ≤ degree.
    pub fn restriction(&self, m: usize) -> Result<IntMatrix> {
        if m > self.degree {
            return Err(Error::DegreeOutOfRange { degree: m, max: self.degree });
        }
        let tr = &self.transversal;
        let idx = tr.len();
        let one = Mat2::new(1, 0, 0, 1);
        let mut acc = HashMap::new();
        for i in 0..self.map.source().rank(m) {
            let image = self.map.image(m, i, 0);
            for (j, t) in tr.reps.iter().enumerate() {
                accumulate(&mut acc, i * idx + j, &image.translate(t), &Int::ONE, tr, &one, &self.module);
            }
        }
        Ok(IntMatrix::from_triplets(
            self.boundary_complex.ranks()[m],
            self.full_complex.ranks()[m],
            acc.into_iter().map(|((a, b), v)| (a, b, v)),
        ))
    }

    pub fn compute(&self) -> Result<CuspidalResult> {
        let n = self.degree;
        let src = CohomologyBasis::new(&self.full_complex, n)?;
        let dst = CohomologyBasis::new(&self.boundary_complex, n)?;
        let rho = self.restriction(n)?;
        let rk = rho.mul(&src.kernel)?;
        if !self.boundary_complex.coboundary(n).mul(&rk)?.is_zero() {
            return Err(Error::CompositionNonzero(Some(n)));
        }
        let y = dst.u.mul(&dst.coords)?.mul(&rk)?.mul(&src.u_inv)?;
        let src_free: Vec<usize> = (src.rank..src.dimension()).collect();
        let dst_free: Vec<usize> = (dst.rank..dst.dimension()).collect();
        let restriction = y.select(&dst_free, &src_free);

        // cocycles x with ρ(Kx) = δ_∂ w for some w
        let k = src.dimension();
        let stacked = rk.hstack(&self.boundary_complex.incoming(n).neg())?;
        let sol = integer_kernel(&stacked);
        let xs: Vec<usize> = (0..k).collect();
        let all: Vec<usize> = (0..sol.cols()).collect();
        let lattice = hermite_normal_form(&sol.select(&xs, &all).transpose());
        // coboundaries of the ambient complex, in kernel coordinates
        let b = src.coords.mul(&self.full_complex.incoming(n))?;
        let coeffs = solve_in_rows(&lattice, &b)?;
        let kernel = homology_of_pair(&IntMatrix::zeros(0, lattice.rows()), &coeffs)?;
        Ok(CuspidalResult {
            degree: n,
            ambient: src.invariants(),
            boundary: dst.invariants(),
            restriction,
            kernel,
            kernel_lattice: lattice,
        })
    }
}

pub fn cuspidal_cohomology(gamma: &CongruenceSubgroup, degree: usize, module: PolynomialModule) -> Result<CuspidalResult> {
    CuspidalSetup::new(gamma, degree, module)?.compute()
}

/// Coefficients c (ℓ × m) with rowsᵀ·c = b for an echelon row basis `rows`
/// (ℓ × k) and columns b (k × m); fails if some column is outside the lattice.
pub fn solve_in_rows(rows: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix> {
    let l = rows.rows();
    let basis = rows.dense_rows();
    let pivots: Vec<usize> = basis.iter().map(|r| r.iter().position(|x| !x.is_zero()).unwrap()).collect();
    let mut out = vec![vec![Int::ZERO; b.cols()]; l];
    for j in 0..b.cols() {
        let mut v: Vec<Int> = (0..b.rows()).map(|i| b.get(i, j)).collect();
        for (r, &p) in pivots.iter().enumerate() {
            if !basis[r][p].divides(&v[p]) {
                return Err(Error::NonIntegral);
            }
            let c = v[p].exact_div(&basis[r][p]);
            if !c.is_zero() {
                for (x, y) in v.iter_mut().zip(&basis[r]) {
                    *x -= &c * y;
                }
            }
            out[r][j] = c;
        }
        if v.iter().any(|x| !x.is_zero()) {
            return Err(Error::NonIntegral);
        }
    }
    Ok(if l == 0 { IntMatrix::zeros(0, b.cols()) } else { IntMatrix::from_rows(out) })
}
