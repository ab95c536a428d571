//! Shipped fixtures: the three reference extensions, the three reference
//! automorphism groups, the A/D valuation family over the Gaussian field,
//! and the five/six-point finite models.

use crate::basefield::valuation::{split_prime, BaseValuation, VKind};
use crate::basefield::{BaseField, El};
use crate::error::Result;
use crate::galois::{AutGroup, GradedAutomorphism, Sigma};
use crate::gradedfield::{FieldExtension, GradedField};
use crate::gradedvaluation::{GradedValuation, ValuePoint};
use crate::lattice::{Lattice, LatticeHom};
use crate::matrix::{rat_int, Rat};
use crate::zrspace::{build_model, FiniteModel};
use num_traits::Zero;

pub fn q_z() -> GradedField {
    GradedField::new(BaseField::Rationals, Lattice::standard(1), "u")
}

pub fn qi_z() -> GradedField {
    GradedField::new(BaseField::gaussian(), Lattice::standard(1), "u")
}

pub fn q_2z() -> GradedField {
    GradedField::new(
        BaseField::Rationals,
        Lattice::new(1, vec![vec![rat_int(2)]]).unwrap(),
        "u",
    )
}

pub fn q_4z() -> GradedField {
    GradedField::new(
        BaseField::Rationals,
        Lattice::new(1, vec![vec![rat_int(4)]]).unwrap(),
        "u",
    )
}

pub fn i_el() -> El {
    El::Ext(vec![El::Rat(rat_int(0)), El::Rat(rat_int(1))])
}

/// The three reference extensions: (Q[Z]/Q[2Z]), (Q(i)[Z]/Q[Z]),
/// (Q(i)[Z]/Q[4Z]) with invariants (2,1,2), (1,2,2), (4,2,8).
pub fn shipped_extensions() -> Vec<(String, FieldExtension)> {
    vec![
        (
            "Q[Z]/Q[2Z]".into(),
            FieldExtension::new(q_z(), q_2z()).unwrap(),
        ),
        (
            "Q(i)[Z]/Q[Z]".into(),
            FieldExtension::new(qi_z(), q_z()).unwrap(),
        ),
        (
            "Q(i)[Z]/Q[4Z]".into(),
            FieldExtension::new(qi_z(), q_4z()).unwrap(),
        ),
    ]
}

pub fn conj(parent: &GradedField) -> GradedAutomorphism {
    GradedAutomorphism::new(
        parent.clone(),
        Sigma::GenScale(parent.base.from_i64(-1)),
        vec![parent.base.one()],
    )
    .unwrap()
}

/// The three reference groups: {1, conj} on Q(i)[Z]; <(id, chi(1) = -1)> on
/// Q[Z]; <(id, chi(1) = i)> on Q(i)[Z].
pub fn shipped_groups() -> Vec<(String, AutGroup)> {
    let k = qi_z();
    let l = q_z();
    let chi_minus =
        GradedAutomorphism::new(l.clone(), Sigma::Id, vec![l.base.from_i64(-1)]).unwrap();
    let chi_i = GradedAutomorphism::new(k.clone(), Sigma::Id, vec![i_el()]).unwrap();
    vec![
        ("conj".into(), AutGroup::generate(&k, &[conj(&k)]).unwrap()),
        (
            "chi-minus-one".into(),
            AutGroup::generate(&l, &[chi_minus]).unwrap(),
        ),
        ("chi-i".into(), AutGroup::generate(&k, &[chi_i]).unwrap()),
    ]
}

/// The order-8 pairing example <(id, chi_i), (conj, 1)> on Q(i)[Z].
pub fn pairing_group() -> AutGroup {
    let k = qi_z();
    let chi_i = GradedAutomorphism::new(k.clone(), Sigma::Id, vec![i_el()]).unwrap();
    AutGroup::generate(&k, &[chi_i, conj(&k)]).unwrap()
}

/// The primes of Q(i) over 5, ordered so that index 0 is the one where 2+i
/// has value 1 (the "plus" prime).
pub fn gaussian_five_primes() -> Vec<BaseValuation> {
    let k1 = BaseField::gaussian();
    let two_plus_i = El::Ext(vec![El::Rat(rat_int(2)), El::Rat(rat_int(1))]);
    let mut vals: Vec<BaseValuation> = split_prime(&k1, 5)
        .unwrap()
        .into_iter()
        .map(|d| BaseValuation {
            field: k1.clone(),
            kind: VKind::PrimeIdeal(d),
        })
        .collect();
    vals.sort_by_key(|w| std::cmp::Reverse(w.eval(&two_plus_i).unwrap().unwrap()[0].clone()));
    vals
}

/// A+/A-: the (2+-i)-adic valuations with psi = 0 (rank 1).
pub fn a_plus_minus() -> (GradedValuation, GradedValuation) {
    let k = qi_z();
    let primes = gaussian_five_primes();
    let mk = |v1: BaseValuation| {
        GradedValuation::new(k.clone(), v1, LatticeHom::zero(k.gamma.clone(), 1)).unwrap()
    };
    (mk(primes[0].clone()), mk(primes[1].clone()))
}

/// D+/D-: the rank-2 refinements with psi(1) = (0, 1).
pub fn d_plus_minus() -> (GradedValuation, GradedValuation) {
    let k = qi_z();
    let primes = gaussian_five_primes();
    let mk = |v1: BaseValuation| {
        GradedValuation::new(
            k.clone(),
            v1,
            LatticeHom::new(k.gamma.clone(), 2, vec![vec![rat_int(0), rat_int(1)]]).unwrap(),
        )
        .unwrap()
    };
    (mk(primes[0].clone()), mk(primes[1].clone()))
}

/// The generic point: trivial valuation, psi = 0.
pub fn eta() -> GradedValuation {
    let k = qi_z();
    GradedValuation::new(
        k.clone(),
        BaseValuation::trivial(k.base.clone()),
        LatticeHom::zero(k.gamma.clone(), 1),
    )
    .unwrap()
}

/// E: trivial base valuation with psi(1) = -1.
pub fn e_point() -> GradedValuation {
    let k = qi_z();
    GradedValuation::new(
        k.clone(),
        BaseValuation::trivial(k.base.clone()),
        LatticeHom::new(k.gamma.clone(), 1, vec![vec![rat_int(-1)]]).unwrap(),
    )
    .unwrap()
}

pub fn five_point_model() -> Result<FiniteModel> {
    let (ap, am) = a_plus_minus();
    let (dp, dm) = d_plus_minus();
    let points = vec![
        ValuePoint {
            label: "eta".into(),
            valuation: eta(),
        },
        ValuePoint {
            label: "A+".into(),
            valuation: ap,
        },
        ValuePoint {
            label: "A-".into(),
            valuation: am,
        },
        ValuePoint {
            label: "D+".into(),
            valuation: dp,
        },
        ValuePoint {
            label: "D-".into(),
            valuation: dm,
        },
    ];
    let k = qi_z();
    let group = AutGroup::generate(&k, &[conj(&k)])?;
    build_model(points, &group)
}

pub fn six_point_model() -> Result<FiniteModel> {
    let m = five_point_model()?;
    let mut points = m.points;
    points.push(ValuePoint {
        label: "E".into(),
        valuation: e_point(),
    });
    build_model(points, &m.group)
}

/// The reference certificate universe over Q[Z]: rational constants
/// {+-1, +-5, +-1/5, +-25, +-1/25, +-6, +-6/5} in degree zero.
pub fn rational_universe(k: &GradedField) -> Vec<crate::gradedfield::GradedElement> {
    let consts = [
        (1i64, 1i64),
        (-1, 1),
        (5, 1),
        (-5, 1),
        (1, 5),
        (-1, 5),
        (25, 1),
        (-25, 1),
        (1, 25),
        (-1, 25),
        (6, 1),
        (-6, 1),
        (6, 5),
        (-6, 5),
    ];
    consts
        .iter()
        .map(|&(n, d)| {
            let q = Rat::new(n.into(), d.into());
            k.monomial(
                &vec![Rat::zero(); k.gamma.ambient_dim],
                k.base.from_rat(&q).unwrap(),
            )
            .unwrap()
        })
        .collect()
}

/// The 5-adic valuation with psi = 0 on Q[Z].
pub fn five_adic_on_q_z() -> GradedValuation {
    let l = q_z();
    GradedValuation::new(
        l.clone(),
        BaseValuation::p_adic(5),
        LatticeHom::zero(l.gamma.clone(), 1),
    )
    .unwrap()
}
