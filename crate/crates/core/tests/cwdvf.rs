use intcoh::cwdvf::{
    critical_complex, dvf_contracting_homotopy, is_admissible, maximal_dvf, Arrow, Chain, DiscreteVectorField,
    RegularCWComplex,
};
use intcoh::{AbelianInvariants, Error, Int};

fn cell(i: usize) -> Chain {
    let mut c = Chain::new();
    c.insert(i, Int::ONE);
    c
}

fn add(a: &Chain, b: &Chain, sign: i64) -> Chain {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(*k).or_insert(Int::ZERO);
        *e += v * sign;
        if e.is_zero() {
            out.remove(k);
        }
    }
    out
}

#[test]
fn bings_house_counts_and_homology() {
    let x = RegularCWComplex::bings_house();
    assert_eq!(x.counts(), &[72, 154, 83]);
    let c = x.chain_complex();
    c.verify().unwrap();
    assert_eq!(c.homology(0).unwrap(), AbelianInvariants::free(1));
    assert!(c.homology(1).unwrap().is_trivial());
    assert!(c.homology(2).unwrap().is_trivial());
    // no free edges: every edge bounds at least two squares
    for e in 0..x.count(1) {
        assert!(x.cofaces(1, e).len() >= 2, "edge {e} is free");
    }
}

#[test]
fn bings_house_text_round_trip() {
    let x = RegularCWComplex::bings_house();
    assert_eq!(RegularCWComplex::parse(&x.to_text()).unwrap(), x);
}

#[test]
fn bings_house_needs_more_than_one_critical_cell() {
    let x = RegularCWComplex::bings_house();
    let v = maximal_dvf(&x);
    assert!(is_admissible(&x, &v).unwrap());
    let crit = v.critical_count(&x);
    assert!(crit >= 2, "critical cells: {crit}");
    let m = critical_complex(&x, &v).unwrap();
    m.verify().unwrap();
    assert_eq!(m.homology(0).unwrap(), AbelianInvariants::free(1));
    assert!(m.homology(1).unwrap().is_trivial());
    assert!(m.homology(2).unwrap().is_trivial());
    assert!(matches!(dvf_contracting_homotopy(&x, &v), Err(Error::NotContracting(_))));
}

#[test]
fn admissibility_examples() {
    let iv = RegularCWComplex::interval();
    let v = DiscreteVectorField::new(&iv, vec![Arrow { dim: 0, source: 1, target: 0 }]).unwrap();
    assert!(is_admissible(&iv, &v).unwrap());
    assert!(is_admissible(&iv, &DiscreteVectorField::empty()).unwrap());

    // circle with two vertices and two edges; v0 -> e0 and v1 -> e1 chase each other
    let c = RegularCWComplex::circle(2);
    let v = DiscreteVectorField::new(
        &c,
        vec![Arrow { dim: 0, source: 0, target: 0 }, Arrow { dim: 0, source: 1, target: 1 }],
    )
    .unwrap();
    assert!(!is_admissible(&c, &v).unwrap());
}

#[test]
fn malformed_arrows_rejected() {
    let iv = RegularCWComplex::interval();
    let twice = DiscreteVectorField::new(
        &iv,
        vec![Arrow { dim: 0, source: 0, target: 0 }, Arrow { dim: 0, source: 1, target: 0 }],
    );
    assert!(matches!(twice, Err(Error::InvalidField(_))));
    let c = RegularCWComplex::circle(3);
    // vertex 2 is not a face of edge 0
    let bad = DiscreteVectorField::new(&c, vec![Arrow { dim: 0, source: 2, target: 0 }]);
    assert!(matches!(bad, Err(Error::InvalidField(_))));
}

#[test]
fn interval_and_circle_fields() {
    let iv = RegularCWComplex::interval();
    let v = maximal_dvf(&iv);
    assert_eq!(v.critical_count(&iv), 1);
    let h = dvf_contracting_homotopy(&iv, &v).unwrap();
    // the critical vertex maps to zero, the other vertex to the edge (with sign)
    assert!(h.on_cell(0, 0).is_empty());
    let mut expect = Chain::new();
    expect.insert(0, Int::ONE);
    assert_eq!(h.on_cell(0, 1), &expect);

    let c = RegularCWComplex::circle(5);
    let v = maximal_dvf(&c);
    let m = critical_complex(&c, &v).unwrap();
    assert_eq!(m.ranks(), &[1, 1]);
    assert_eq!(m.homology(1).unwrap(), AbelianInvariants::free(1));
}

#[test]
fn cubic_tree_homotopy_identities() {
    let x = RegularCWComplex::cubic_tree(6);
    let v = maximal_dvf(&x);
    assert_eq!(v.critical_count(&x), 1);
    let crit = v.critical_cells(&x);
    let base = crit[0][0];
    let h = dvf_contracting_homotopy(&x, &v).unwrap();
    let m = critical_complex(&x, &v).unwrap();
    assert_eq!(m.ranks(), &[1, 0]);
    for vert in 0..x.count(0) {
        // d h (v) = v - base
        let lhs = x.boundary(1, &h.apply(0, &cell(vert)));
        let rhs = add(&cell(vert), &cell(base), -1);
        assert_eq!(lhs, rhs, "vertex {vert}");
    }
    for e in 0..x.count(1) {
        // h d (e) = e since there are no 2-cells
        assert_eq!(h.apply(0, &x.boundary(1, &cell(e))), cell(e));
    }
}
