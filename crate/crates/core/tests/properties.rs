//! Randomized property tests for the core algebraic invariants.

use num_bigint::BigInt;
use proptest::prelude::*;

use gradedval::basefield::El;
use gradedval::expr::parse_element;
use gradedval::fixtures;
use gradedval::gradedfield::GradedElement;
use gradedval::lattice::{lattice_index, Index, Lattice};
use gradedval::matrix::{rat_int, Rat};
use gradedval::zrspace::{nonvaluation_certificate, MembershipTable};

fn rat(n: i64) -> Rat {
    rat_int(n)
}

/// A random element of Q(i)[Z]: up to three homogeneous terms.
fn element_strategy() -> impl Strategy<Value = GradedElement> {
    let term = (-3i64..4, -5i64..6, -5i64..6);
    proptest::collection::vec(term, 0..4).prop_map(|terms| {
        let k = fixtures::qi_z();
        let mut acc = k.zero();
        for (deg, a, b) in terms {
            let c = El::Ext(vec![El::Rat(rat(a)), El::Rat(rat(b))]);
            if k.base.is_zero(&c) {
                continue;
            }
            let m = k.monomial(&[rat(deg)], c).unwrap();
            acc = k.add(&acc, &m).unwrap();
        }
        acc
    })
}

fn homogeneous_strategy() -> impl Strategy<Value = GradedElement> {
    (-3i64..4, -5i64..6, -5i64..6)
        .prop_filter("nonzero", |(_, a, b)| *a != 0 || *b != 0)
        .prop_map(|(deg, a, b)| {
            let k = fixtures::qi_z();
            let c = El::Ext(vec![El::Rat(rat(a)), El::Rat(rat(b))]);
            k.monomial(&[rat(deg)], c).unwrap()
        })
}

fn lex_leq(a: &[Rat], b: &[Rat]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // ring axioms on the graded field
    #[test]
    fn graded_ring_axioms(x in element_strategy(), y in element_strategy(), z in element_strategy()) {
        let k = fixtures::qi_z();
        prop_assert_eq!(k.add(&x, &y).unwrap(), k.add(&y, &x).unwrap());
        prop_assert_eq!(k.mul(&x, &y).unwrap(), k.mul(&y, &x).unwrap());
        prop_assert_eq!(
            k.mul(&x, &k.add(&y, &z).unwrap()).unwrap(),
            k.add(&k.mul(&x, &y).unwrap(), &k.mul(&x, &z).unwrap()).unwrap()
        );
        prop_assert_eq!(
            k.mul(&k.mul(&x, &y).unwrap(), &z).unwrap(),
            k.mul(&x, &k.mul(&y, &z).unwrap()).unwrap()
        );
    }

    // every nonzero homogeneous element is invertible (graded field axiom)
    #[test]
    fn homogeneous_invertible(x in homogeneous_strategy()) {
        let k = fixtures::qi_z();
        let inv = k.invert_homogeneous(&x).unwrap();
        prop_assert_eq!(k.mul(&x, &inv).unwrap(), k.one());
    }

    // valuation laws: v(xy) = v(x) + v(y), v(x + y) >=lex min(v(x), v(y))
    #[test]
    fn valuation_laws(x in homogeneous_strategy(), y in homogeneous_strategy()) {
        let (ap, _) = fixtures::a_plus_minus();
        let vx = ap.gvalue(&x).unwrap().unwrap();
        let vy = ap.gvalue(&y).unwrap().unwrap();
        let prod = ap.parent.mul(&x, &y).unwrap();
        let vp = ap.gvalue(&prod).unwrap().unwrap();
        let sum: Vec<Rat> = vx.iter().zip(&vy).map(|(a, b)| a + b).collect();
        prop_assert_eq!(vp, sum);
        let s = ap.parent.add(&x, &y).unwrap();
        if let Some(vs) = ap.gvalue(&s).unwrap() {
            let min = if lex_leq(&vx, &vy) { &vx } else { &vy };
            prop_assert!(lex_leq(min, &vs));
        }
    }

    // expression round-trip: format then reparse gives the same element
    #[test]
    fn expression_round_trip(x in element_strategy()) {
        let k = fixtures::qi_z();
        if x.is_zero() {
            return Ok(());
        }
        let text = k.format(&x);
        let back = parse_element(&k, &text).unwrap();
        prop_assert_eq!(x, back);
    }

    // lattice index equals |det| for full-rank integer sublattices of Z^2
    #[test]
    fn lattice_index_is_det(a in -4i64..5, b in -4i64..5, c in -4i64..5, d in -4i64..5) {
        prop_assume!(a * d - b * c != 0);
        let sup = Lattice::standard(2);
        let sub = Lattice::new(2, vec![vec![rat(a), rat(b)], vec![rat(c), rat(d)]]).unwrap();
        let idx = lattice_index(&sup, &sub).unwrap();
        prop_assert_eq!(idx, Index::Finite(BigInt::from((a * d - b * c).abs())));
    }

    // genuine valuation traces never produce a certificate
    #[test]
    fn traces_certify_none(p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let l = fixtures::q_z();
        let v = gradedval::gradedvaluation::GradedValuation::new(
            l.clone(),
            gradedval::basefield::valuation::BaseValuation::p_adic(p),
            gradedval::lattice::LatticeHom::zero(l.gamma.clone(), 1),
        ).unwrap();
        let universe = fixtures::rational_universe(&l);
        let t = MembershipTable::trace(l.clone(), universe, &v).unwrap();
        prop_assert!(nonvaluation_certificate(&t, &[], &[], &[]).unwrap().is_none());
    }
}
