//! Equivariant chain maps between free resolutions, built one generator at a
//! time from the target's contracting homotopy.

use std::collections::HashMap;
use std::sync::Arc;

use crate::coeffmod::PolynomialModule;
use crate::congruence::Transversal;
use crate::error::{Error, Result};
use crate::int::Int;
use crate::resolutions::{FreeZGResolution, ModElt};
use crate::sl2z::{Mat2, SL2Z};

/// Where the degree-0 generators go. Any element of augmentation one will
/// do; the two choices give chain-homotopic maps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LiftChoice {
    #[default]
    Base,
    Translated,
}

pub type GroupMap = Arc<dyn Fn(&SL2Z) -> SL2Z + Send + Sync>;

/// Φ from `source` viewed over H (a subgroup with right transversal
/// `source_tr` in G) to `target`, with Φ(γx) = φ(γ)Φ(x) for γ ∈ H.
pub struct EquivariantChainMap {
    source: Arc<FreeZGResolution>,
    source_tr: Arc<Transversal>,
    phi: GroupMap,
    // images[n][i·|T| + m] = Φ(s_m · e_i)
    images: Vec<Vec<ModElt>>,
}

pub fn equivariant_chain_map(
    source: Arc<FreeZGResolution>,
    source_tr: Arc<Transversal>,
    target: &FreeZGResolution,
    phi: GroupMap,
    degree_max: usize,
    choice: LiftChoice,
) -> Result<EquivariantChainMap> {
    if !target.has_homotopy() {
        return Err(Error::NoHomotopy);
    }
    let top = source.max_degree().min(target.max_degree());
    if degree_max > top {
        return Err(Error::DegreeOutOfRange { degree: degree_max, max: top });
    }
    let idx = source_tr.len();
    let (b, g0) = target.base().clone();
    let zeroth: Vec<ModElt> = (0..source.rank(0))
        .flat_map(|_| source_tr.reps.iter())
        .map(|s| match choice {
            LiftChoice::Base => ModElt::term(b, g0.clone(), 1),
            LiftChoice::Translated => ModElt::term(b, s * &g0, 1),
        })
        .collect();
    let mut map = EquivariantChainMap { source: source.clone(), source_tr: source_tr.clone(), phi, images: vec![zeroth] };
    for n in 1..=degree_max {
        let mut layer = Vec::with_capacity(source.rank(n) * idx);
        for i in 0..source.rank(n) {
            for s in &source_tr.reps {
                let db = source.boundary_of(n, i).translate(s);
                layer.push(target.homotopy(n - 1, &map.apply(n - 1, &db))?);
            }
        }
        map.images.push(layer);
    }
    Ok(map)
}

impl EquivariantChainMap {
    pub fn max_degree(&self) -> usize {
        self.images.len() - 1
    }

    pub fn source(&self) -> &Arc<FreeZGResolution> {
        &self.source
    }

    pub fn source_transversal(&self) -> &Arc<Transversal> {
        &self.source_tr
    }

    /// Φ(s_m · e_i).
    pub fn image(&self, n: usize, i: usize, m: usize) -> &ModElt {
        &self.images[n][i * self.source_tr.len() + m]
    }

    /// Φ_n on a source element written over G; every g must lie in H·s_m.
    pub fn apply(&self, n: usize, x: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        for (i, g, c) in x.terms() {
            let (m, gamma) = self.source_tr.lookup(g);
            out.add_translated(self.image(n, i, m), &(self.phi)(&gamma), c);
        }
        out
    }

    /// Checks d Φ_n = Φ_{n−1} d on every generator s_m e_i.
    pub fn verify(&self, target: &FreeZGResolution) -> Result<()> {
        for n in 1..=self.max_degree() {
            for i in 0..self.source.rank(n) {
                for (m, s) in self.source_tr.reps.iter().enumerate() {
                    let lhs = target.boundary(n, self.image(n, i, m));
                    let rhs = self.apply(n - 1, &self.source.boundary_of(n, i).translate(s));
                    if lhs != rhs {
                        return Err(Error::CompositionNonzero(Some(n)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Accumulates the cochain functional f ↦ ρ(pre)·f(y) into row block `row`,
/// where f ∈ Hom_Γ(R, M) is stored by its values on the generators t_j·e_i of
/// R restricted along `tr`, and y = Σ c·h·e_i is written over G.
pub(crate) fn accumulate(
    acc: &mut HashMap<(usize, usize), Int>,
    row: usize,
    y: &ModElt,
    c0: &Int,
    tr: &Transversal,
    pre: &Mat2,
    module: &PolynomialModule,
) {
    let w = module.rank();
    let idx = tr.len();
    for (i, h, c) in y.terms() {
        let (j, gamma) = tr.lookup(h);
        let col = i * idx + j;
        let c = c * c0;
        if w == 1 {
            *acc.entry((row, col)).or_insert(Int::ZERO) += &c;
            continue;
        }
        let rho = module.matrix_of(&pre.mul(gamma.as_mat()));
        for (a, r) in rho.iter().enumerate() {
            for (b, v) in r.iter().enumerate() {
                if !v.is_zero() {
                    *acc.entry((row * w + a, col * w + b)).or_insert(Int::ZERO) += &c * v;
                }
            }
        }
    }
}
