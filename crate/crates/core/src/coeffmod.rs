//! The modules P(k) of degree-k binary forms, Hom complexes of resolutions
//! into them, and their cohomology.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::chaincx::FreeChainComplexZ;
use crate::error::{Error, Result};
use crate::exactlin::{homology_of_pair, AbelianInvariants, IntMatrix};
use crate::int::Int;
use crate::resolutions::FreeZGResolution;
use crate::sl2z::{Mat2, SL2Z};

/// (k+1)×(k+1) matrix of p ↦ p(dx − by, −cx + ay) on the basis x^k, x^{k−1}y, …, y^k;
/// column j holds the image of x^{k−j}y^j. Multiplicative: M(AB) = M(A)M(B).
pub fn action_matrix(m: &Mat2, k: usize) -> Vec<Vec<Int>> {
    // images of x and y as (coefficient of x, coefficient of y)
    let lx = [m.d.clone(), -&m.b];
    let ly = [-&m.c, m.a.clone()];
    let pow = |l: &[Int; 2], e: usize| -> Vec<Int> {
        // coefficients of x^{e−i} y^i
        let mut p = vec![Int::ONE];
        for _ in 0..e {
            let mut q = vec![Int::ZERO; p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                q[i] += c * &l[0];
                q[i + 1] += c * &l[1];
            }
            p = q;
        }
        p
    };
    let mut cols = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let a = pow(&lx, k - j);
        let b = pow(&ly, j);
        let mut col = vec![Int::ZERO; k + 1];
        for (i, u) in a.iter().enumerate() {
            for (l, v) in b.iter().enumerate() {
                col[i + l] += u * v;
            }
        }
        cols.push(col);
    }
    (0..=k).map(|i| (0..=k).map(|j| cols[j][i].clone()).collect()).collect()
}

/// P(k) with a shared cache of action matrices.
#[derive(Clone, Debug)]
pub struct PolynomialModule {
    k: usize,
    cache: Arc<RwLock<HashMap<SL2Z, Arc<Vec<Vec<Int>>>>>>,
}

impl PolynomialModule {
    pub fn new(k: usize) -> PolynomialModule {
        PolynomialModule { k, cache: Arc::new(RwLock::new(HashMap::new())) }
    }

    pub fn trivial() -> PolynomialModule {
        PolynomialModule::new(0)
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn rank(&self) -> usize {
        self.k + 1
    }

    /// −I acts as (−1)^k.
    pub fn minus_identity_trivial(&self) -> bool {
        self.k.is_multiple_of(2)
    }

    pub fn matrix(&self, g: &SL2Z) -> Arc<Vec<Vec<Int>>> {
        if let Some(m) = self.cache.read().unwrap().get(g) {
            return m.clone();
        }
        let m = Arc::new(action_matrix(g.as_mat(), self.k));
        self.cache.write().unwrap().insert(g.clone(), m.clone());
        m
    }

    pub fn matrix_of(&self, m: &Mat2) -> Vec<Vec<Int>> {
        action_matrix(m, self.k)
    }
}

/// A cochain complex of free abelian groups; `coboundary[n]` : C^n → C^{n+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplexZ {
    ranks: Vec<usize>,
    coboundary: Vec<IntMatrix>,
}

impl CochainComplexZ {
    pub fn new(ranks: Vec<usize>, coboundary: Vec<IntMatrix>) -> Result<CochainComplexZ> {
        if ranks.is_empty() || coboundary.len() + 1 != ranks.len() {
            return Err(Error::ShapeMismatch("need one coboundary between consecutive degrees".into()));
        }
        for (n, m) in coboundary.iter().enumerate() {
            if m.cols() != ranks[n] || m.rows() != ranks[n + 1] {
                return Err(Error::ShapeMismatch(format!("δ^{n} has the wrong shape")));
            }
        }
        Ok(CochainComplexZ { ranks, coboundary })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn top_degree(&self) -> usize {
        self.ranks.len() - 1
    }

    /// δ^n : C^n → C^{n+1} for n < top.
    pub fn coboundary(&self, n: usize) -> &IntMatrix {
        &self.coboundary[n]
    }

    /// δ^{n−1}, the zero map into C^0 when n = 0.
    pub fn incoming(&self, n: usize) -> IntMatrix {
        if n == 0 {
            IntMatrix::zeros(self.ranks[0], 0)
        } else {
            self.coboundary[n - 1].clone()
        }
    }

    pub fn verify(&self) -> Result<()> {
        for n in 1..self.coboundary.len() {
            if !self.coboundary[n].mul(&self.coboundary[n - 1])?.is_zero() {
                return Err(Error::CompositionNonzero(Some(n)));
            }
        }
        Ok(())
    }

    /// H^n for n < top degree (the top needs δ^top, which the truncation lacks).
    pub fn cohomology(&self, n: usize) -> Result<AbelianInvariants> {
        if n >= self.top_degree() {
            return Err(Error::DegreeOutOfRange { degree: n, max: self.top_degree().saturating_sub(1) });
        }
        homology_of_pair(&self.coboundary[n], &self.incoming(n))
    }

    /// The same groups as a chain complex C_m = C^{top−m}.
    pub fn as_chain_complex(&self) -> FreeChainComplexZ {
        let top = self.top_degree();
        let ranks: Vec<usize> = (0..=top).map(|m| self.ranks[top - m]).collect();
        let mats: Vec<IntMatrix> = (1..=top).map(|m| self.coboundary[top - m].clone()).collect();
        FreeChainComplexZ::new(ranks, mats).expect("shapes follow the ranks")
    }
}

/// Hom_{ZΓ}(R_*, M): a cochain is its values on the generators, and
/// (δf)(e_j) = Σ c·ρ(g)·f(e_i) over the terms c·g·e_i of d e_j.
pub fn hom_complex(r: &FreeZGResolution, m: &PolynomialModule) -> CochainComplexZ {
    let w = m.rank();
    let ranks: Vec<usize> = r.ranks().iter().map(|k| k * w).collect();
    let mut cob = Vec::new();
    for n in 0..r.max_degree() {
        let mut acc: HashMap<(usize, usize), Int> = HashMap::new();
        for j in 0..r.rank(n + 1) {
            for (i, g, c) in r.boundary_of(n + 1, j).terms() {
                let rho = m.matrix(g);
                for (a, row) in rho.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        if !v.is_zero() {
                            *acc.entry((j * w + a, i * w + b)).or_insert(Int::ZERO) += c * v;
                        }
                    }
                }
            }
        }
        cob.push(IntMatrix::from_triplets(ranks[n + 1], ranks[n], acc.into_iter().map(|((a, b), v)| (a, b, v))));
    }
    CochainComplexZ::new(ranks, cob).expect("shapes follow the ranks")
}

pub fn cohomology(c: &CochainComplexZ, n: usize) -> Result<AbelianInvariants> {
    c.cohomology(n)
}
