//! Restriction of a ZG-resolution to a finite-index subgroup Γ: the
//! generator (e_i, t_j) stands for t_j·e_i, and g·e_i = γ·(e_i, t_l) when g = γ·t_l.

use std::sync::Arc;

use super::{FreeZGResolution, HomotopyEval, ModElt};
use crate::congruence::Transversal;
use crate::sl2z::SL2Z;

fn rewrite(tr: &Transversal, x: &ModElt) -> ModElt {
    let idx = tr.len();
    let mut out = ModElt::zero();
    for (i, g, c) in x.terms() {
        let (l, gamma) = tr.lookup(g);
        out.add_term(i * idx + l, &gamma, c);
    }
    out
}

struct Restricted {
    parent: Arc<FreeZGResolution>,
    tr: Arc<Transversal>,
}

impl HomotopyEval for Restricted {
    fn eval(&self, n: usize, gen: usize, g: &SL2Z) -> ModElt {
        let idx = self.tr.len();
        let (i, j) = (gen / idx, gen % idx);
        let h = self.parent.homotopy_on(n, i, &(g * &self.tr.reps[j])).expect("parent homotopy");
        rewrite(&self.tr, &h)
    }
}

/// R viewed as a free ZΓ-resolution; generator i·|T| + j is t_j·e_i.
pub fn restrict_resolution(r: Arc<FreeZGResolution>, tr: Arc<Transversal>) -> FreeZGResolution {
    let idx = tr.len();
    let ranks: Vec<usize> = r.ranks().iter().map(|k| k * idx).collect();
    let mut boundary = vec![Vec::new()];
    for n in 1..=r.max_degree() {
        let mut layer = Vec::with_capacity(ranks[n]);
        for i in 0..r.rank(n) {
            for t in &tr.reps {
                layer.push(rewrite(&tr, &r.boundary_of(n, i).translate(t)));
            }
        }
        boundary.push(layer);
    }
    let name = format!("{} restricted to {}", r.name, tr.subgroup().name());
    let res = FreeZGResolution::new(name, ranks, boundary).expect("restriction keeps shapes");
    let (b, g) = r.base().clone();
    let (l, gamma) = tr.lookup(&g);
    let base = (b * idx + l, gamma);
    if r.has_homotopy() {
        res.with_homotopy(Arc::new(Restricted { parent: r, tr }), base)
    } else {
        res
    }
}
