//! Finitely generated torsion-free abelian groups realized as lattices in Q^d:
//! grading groups and value groups, with index, membership and homomorphism
//! extension.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, Rat};

pub type Point = Vec<Rat>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub ambient_dim: usize,
    /// Linearly independent vectors in Q^ambient_dim.
    pub basis: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Index {
    Finite(BigInt),
    Infinite,
}

impl Index {
    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            Index::Finite(n) => Some(n),
            Index::Infinite => None,
        }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => write!(f, "infinite"),
        }
    }
}

impl Lattice {
    pub fn new(ambient_dim: usize, basis: Vec<Point>) -> Result<Self> {
        assert!(ambient_dim > 0, "ambient dimension must be positive");
        for v in &basis {
            if v.len() != ambient_dim {
                return Err(Error::Config(format!(
                    "basis vector of length {} in ambient dimension {ambient_dim}",
                    v.len()
                )));
            }
        }
        let l = Lattice { ambient_dim, basis };
        if matrix::rank(&l.basis) != l.basis.len() {
            return Err(Error::Config(
                "lattice basis vectors are linearly dependent".into(),
            ));
        }
        Ok(l)
    }

    /// The standard lattice Z^d.
    pub fn standard(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        Lattice {
            ambient_dim: dim,
            basis,
        }
    }

    /// Rank-0 lattice (the zero group) in Q^dim.
    pub fn zero(dim: usize) -> Self {
        Lattice {
            ambient_dim: dim,
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Rational coordinates of `v` in the basis (None when outside the span).
    pub fn coords(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        if v.len() != self.ambient_dim {
            return None;
        }
        if self.basis.is_empty() {
            return v.iter().all(|x| x.is_zero()).then(Vec::new);
        }
        // columns of the system are the basis vectors
        let a: Vec<Vec<Rat>> = (0..self.ambient_dim)
            .map(|row| self.basis.iter().map(|b| b[row].clone()).collect())
            .collect();
        matrix::solve(&a, v)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.coords(v)
            .map(|c| c.iter().all(|x| x.is_integer()))
            .unwrap_or(false)
    }

    pub fn is_sublattice_of(&self, sup: &Lattice) -> bool {
        self.ambient_dim == sup.ambient_dim && self.basis.iter().all(|b| sup.contains(b))
    }

    /// Point given by integral coordinates in the basis.
    pub fn point(&self, coords: &[BigInt]) -> Point {
        assert_eq!(coords.len(), self.rank());
        let mut p = vec![Rat::zero(); self.ambient_dim];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += Rat::from(c.clone()) * bi;
            }
        }
        p
    }

    /// Integer matrix whose columns are the coordinates of `sub`'s basis in
    /// `self`'s basis. Errors when `sub` is not contained in `self`.
    fn sub_coord_matrix(&self, sub: &Lattice) -> Result<Vec<Vec<BigInt>>> {
        let mut cols = Vec::new();
        for b in &sub.basis {
            let c = self.coords(b).ok_or_else(|| {
                Error::NotASublattice(format!("{b:?} outside the rational span"))
            })?;
            if !c.iter().all(|x| x.is_integer()) {
                return Err(Error::NotASublattice(format!("{b:?} has non-integral coordinates")));
            }
            cols.push(c.iter().map(|x| x.to_integer()).collect::<Vec<BigInt>>());
        }
        // row-major with columns = sub generators
        let rows = self.rank();
        Ok((0..rows)
            .map(|r| cols.iter().map(|c| c[r].clone()).collect())
            .collect())
    }

    /// Representatives in Q^d for the quotient self/sub (finite index only).
    pub fn quotient_representatives(&self, sub: &Lattice) -> Result<Vec<Point>> {
        let m = self.sub_coord_matrix(sub)?;
        if sub.rank() < self.rank() {
            return Err(Error::InfiniteIndex);
        }
        let reps = matrix::coset_representatives(&m);
        Ok(reps.into_iter().map(|r| self.point(&r)).collect())
    }
}

/// #(sup/sub), or Infinite on rank drop.
pub fn lattice_index(sup: &Lattice, sub: &Lattice) -> Result<Index> {
    if sup.ambient_dim != sub.ambient_dim {
        return Err(Error::NotASublattice("ambient dimensions differ".into()));
    }
    let m = sup.sub_coord_matrix(sub)?;
    if sub.rank() < sup.rank() {
        return Ok(Index::Infinite);
    }
    if sub.rank() > sup.rank() {
        return Err(Error::NotASublattice(
            "claimed sublattice has higher rank".into(),
        ));
    }
    let rm: Vec<Vec<Rat>> = m
        .iter()
        .map(|r| r.iter().map(|x| Rat::from(x.clone())).collect())
        .collect();
    let d = matrix::det(&rm);
    debug_assert!(d.is_integer());
    if d.is_zero() {
        return Err(Error::NotASublattice("degenerate coordinate matrix".into()));
    }
    Ok(Index::Finite(d.to_integer().abs()))
}

/// A Q-linear map defined on a lattice, with values in Q^target_dim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeHom {
    pub source: Lattice,
    pub target_dim: usize,
    /// Images of the source basis vectors.
    pub images: Vec<Vec<Rat>>,
}

impl LatticeHom {
    pub fn new(source: Lattice, target_dim: usize, images: Vec<Vec<Rat>>) -> Result<Self> {
        if images.len() != source.rank() || images.iter().any(|v| v.len() != target_dim) {
            return Err(Error::Config("lattice hom image shape mismatch".into()));
        }
        Ok(LatticeHom {
            source,
            target_dim,
            images,
        })
    }

    pub fn zero(source: Lattice, target_dim: usize) -> Self {
        let images = vec![vec![Rat::zero(); target_dim]; source.rank()];
        LatticeHom {
            source,
            target_dim,
            images,
        }
    }

    /// Evaluate on any point of the rational span of the source.
    pub fn apply(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        let c = self
            .source
            .coords(v)
            .ok_or_else(|| Error::FieldMismatch(format!("{v:?} outside lattice span")))?;
        let mut out = vec![Rat::zero(); self.target_dim];
        for (ci, img) in c.iter().zip(&self.images) {
            for (o, x) in out.iter_mut().zip(img) {
                *o += ci * x;
            }
        }
        Ok(out)
    }
}

/// Unique Q-linear extension of `psi` (defined on a finite-index sublattice)
/// to `sup`.
pub fn hom_extend(psi: &LatticeHom, sup: &Lattice) -> Result<LatticeHom> {
    match lattice_index(sup, &psi.source)? {
        Index::Infinite => Err(Error::InfiniteIndex),
        Index::Finite(_) => {
            let images = sup
                .basis
                .iter()
                .map(|b| psi.apply(b))
                .collect::<Result<Vec<_>>>()?;
            LatticeHom::new(sup.clone(), psi.target_dim, images)
        }
    }
}

/// Lex comparison of rational vectors; equal-length inputs required.
pub fn lex_cmp(a: &[Rat], b: &[Rat]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            ord => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

pub fn lex_nonneg(a: &[Rat]) -> bool {
    for x in a {
        if x.is_positive() {
            return true;
        }
        if x.is_negative() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{rat, rat_int};

    fn lat(dim: usize, rows: &[&[(i64, i64)]]) -> Lattice {
        Lattice::new(
            dim,
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn index_2z_in_z() {
        let z = Lattice::standard(1);
        let two_z = lat(1, &[&[(2, 1)]]);
        assert_eq!(
            lattice_index(&z, &two_z).unwrap(),
            Index::Finite(BigInt::from(2))
        );
    }

    #[test]
    fn index_det_oracle() {
        // sup = Z^2, sub = <(2,0),(1,3)> -> 6, frozen from the determinant oracle
        let z2 = Lattice::standard(2);
        let sub = lat(2, &[&[(2, 1), (0, 1)], &[(1, 1), (3, 1)]]);
        assert_eq!(
            lattice_index(&z2, &sub).unwrap(),
            Index::Finite(BigInt::from(6))
        );
    }

    #[test]
    fn index_rank_drop() {
        let z2 = Lattice::standard(2);
        let sub = lat(2, &[&[(1, 1), (0, 1)]]);
        assert_eq!(lattice_index(&z2, &sub).unwrap(), Index::Infinite);
    }

    #[test]
    fn not_a_sublattice() {
        let z = Lattice::standard(1);
        let half = lat(1, &[&[(1, 2)]]);
        assert!(matches!(
            lattice_index(&z, &half),
            Err(Error::NotASublattice(_))
        ));
    }

    #[test]
    fn hom_extend_halves() {
        // psi(2) = 1 on 2Z, extended to Z: psi'(1) = 1/2
        let two_z = lat(1, &[&[(2, 1)]]);
        let psi = LatticeHom::new(two_z, 1, vec![vec![rat_int(1)]]).unwrap();
        let ext = hom_extend(&psi, &Lattice::standard(1)).unwrap();
        assert_eq!(ext.images, vec![vec![rat(1, 2)]]);
    }

    #[test]
    fn hom_extend_identity() {
        let z2 = Lattice::standard(2);
        let psi = LatticeHom::new(
            z2.clone(),
            2,
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
            ],
        )
        .unwrap();
        let ext = hom_extend(&psi, &z2).unwrap();
        assert_eq!(ext.images, psi.images);
    }

    #[test]
    fn hom_extend_denominator_divides_index() {
        // index-3 sublattice <(3,0),(0,1)> of Z^2, psi arbitrary integral matrix
        let sub = lat(2, &[&[(3, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        let psi = LatticeHom::new(
            sub,
            1,
            vec![vec![rat_int(2)], vec![rat_int(5)]],
        )
        .unwrap();
        let ext = hom_extend(&psi, &Lattice::standard(2)).unwrap();
        for img in &ext.images {
            for x in img {
                let d = x.denom();
                assert!(
                    (BigInt::from(3) % d).is_zero() || d == &BigInt::one(),
                    "denominator must divide the index"
                );
            }
        }
    }

    #[test]
    fn index_multiplicative_in_chains() {
        let z = Lattice::standard(2);
        let mid = lat(2, &[&[(2, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        let low = lat(2, &[&[(2, 1), (0, 1)], &[(0, 1), (3, 1)]]);
        let a = lattice_index(&z, &mid).unwrap();
        let b = lattice_index(&mid, &low).unwrap();
        let c = lattice_index(&z, &low).unwrap();
        assert_eq!(
            a.finite().unwrap() * b.finite().unwrap(),
            c.finite().unwrap().clone()
        );
    }

    #[test]
    fn membership_matches_enumeration() {
        // brute-force small integral combinations on a 2x2 case
        let l = lat(2, &[&[(2, 1), (1, 1)], &[(0, 1), (3, 1)]]);
        let mut members = std::collections::HashSet::new();
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                let p: Vec<Rat> = (0..2)
                    .map(|k| rat_int(a) * &l.basis[0][k] + rat_int(b) * &l.basis[1][k])
                    .collect();
                members.insert(format!("{p:?}"));
            }
        }
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                let p = vec![rat_int(x), rat_int(y)];
                let inside = members.contains(&format!("{p:?}"));
                if inside {
                    assert!(l.contains(&p), "{p:?} should be a member");
                }
                if l.contains(&p) && x.abs() <= 4 && y.abs() <= 4 {
                    // members with small coords must appear in the enumeration
                    assert!(inside, "{p:?} claimed member but not enumerated");
                }
            }
        }
    }
}
