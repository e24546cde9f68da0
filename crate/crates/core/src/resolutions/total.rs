//! The resolution of Z over Z[SL2(Z)] from the action on the cubic tree:
//! the total complex of a two-column double complex whose columns are
//! induced from the periodic resolutions of 𝒰 ≅ C6 and of Z^ε over 𝒮 ≅ C4.

use std::sync::Arc;

use super::{CyclicStabilizer, FreeZGResolution, HomotopyEval, ModElt};
use crate::error::{Error, Result};
use crate::int::Int;
use crate::sl2z::{tree_homotopy, TreeChain, SL2Z};

/// d^v on a column element of row q.
pub(super) fn column_boundary(stab: &CyclicStabilizer, q: usize, x: &ModElt) -> ModElt {
    let mut out = ModElt::zero();
    let b = stab.boundary(q);
    for (i, g, c) in x.terms() {
        for (h, v) in &b {
            out.add_term(i, &(g * h), &(c * v));
        }
    }
    out
}

/// h^v on a column element of row q.
pub(super) fn column_homotopy(stab: &CyclicStabilizer, q: usize, x: &ModElt) -> ModElt {
    let mut out = ModElt::zero();
    for (i, g, c) in x.terms() {
        for (h, v) in stab.homotopy(q, g) {
            out.add_term(i, &h, &(c * &v));
        }
    }
    out
}

/// Total degree n ≥ 1 has generators x = f¹_{n−1} (index 0) and y = f⁰_n (index 1);
/// degree 0 has only y = f⁰_0.
struct Total {
    u: CyclicStabilizer,
    s: CyclicStabilizer,
    // dh[m] = d^h(f¹_m), a column-0 element of row m
    dh: Vec<ModElt>,
}

/// σ_n = (−1)^{n+1}, the sign of d^h in total degree n.
fn sigma(n: usize) -> Int {
    if n % 2 == 1 {
        Int::ONE
    } else {
        Int::from(-1)
    }
}

impl Total {
    fn new(max_degree: usize) -> Total {
        let u = CyclicStabilizer::u();
        let s = CyclicStabilizer::s_twisted();
        let mut t = Total { u, s, dh: Vec::new() };
        // d^h(f¹_0) lifts the tree boundary (T − 1)e⁰
        let mut d0 = ModElt::term(0, SL2Z::t(), 1);
        d0.add_term(0, &SL2Z::identity(), &Int::from(-1));
        t.dh.push(d0);
        for m in 1..max_degree {
            let dv = column_boundary(&t.s, m, &ModElt::generator(0));
            let z = t.apply_dh(m - 1, &dv);
            t.dh.push(column_homotopy(&t.u, m - 1, &z));
        }
        t
    }

    fn apply_dh(&self, m: usize, x: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        for (_, g, c) in x.terms() {
            out.add_translated(&self.dh[m], g, c);
        }
        out
    }

    fn y_index(n: usize) -> usize {
        usize::from(n > 0)
    }

    fn boundaries(&self, n: usize) -> Vec<ModElt> {
        let f0 = ModElt::generator(0);
        let mut dx = ModElt::zero();
        if n >= 2 {
            dx = column_boundary(&self.s, n - 1, &f0);
        }
        dx.add_scaled(&self.dh[n - 1].map_generators(|_| Self::y_index(n - 1)), &sigma(n));
        let dy = column_boundary(&self.u, n, &f0).map_generators(|_| Self::y_index(n - 1));
        vec![dx, dy]
    }
}

impl HomotopyEval for Total {
    fn eval(&self, n: usize, gen: usize, g: &SL2Z) -> ModElt {
        let x = ModElt::term(0, g.clone(), 1);
        if n == 0 {
            // h^h = ι₁ ∘ (tree homotopy) ∘ π₀
            let mut a = ModElt::zero();
            for (r, c) in tree_homotopy(&TreeChain::vertex(g)).expect("vertex chain").terms() {
                let (w, sign) = self.s.normalise(r);
                a.add_term(0, &w, &(c * &sign));
            }
            let y = &column_homotopy(&self.u, 0, &x) - &column_homotopy(&self.u, 0, &self.apply_dh(0, &a));
            return &a + &y.map_generators(|_| 1);
        }
        if gen == 0 {
            let hx = column_homotopy(&self.s, n - 1, &x);
            let mut y = column_homotopy(&self.u, n, &self.apply_dh(n, &hx));
            y = if sigma(n).is_one() { y } else { y.neg() };
            &hx + &y.map_generators(|_| 1)
        } else {
            column_homotopy(&self.u, n, &x).map_generators(|_| 1)
        }
    }
}

/// The free resolution of Z over Z[SL2(Z)] with ranks 1, 2, 2, … up to `max_degree`.
pub fn sl2z_resolution(max_degree: usize) -> Result<FreeZGResolution> {
    if max_degree == 0 {
        return Err(Error::Invalid("the resolution needs max_degree ≥ 1".into()));
    }
    let t = Total::new(max_degree);
    let mut ranks = vec![1];
    let mut boundary = vec![Vec::new()];
    for n in 1..=max_degree {
        ranks.push(2);
        boundary.push(t.boundaries(n));
    }
    let res = FreeZGResolution::new("SL2(Z)", ranks, boundary)?;
    Ok(res.with_homotopy(Arc::new(t), (0, SL2Z::identity())))
}
