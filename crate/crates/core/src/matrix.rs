//! Exact linear algebra over the rationals and the integers, sized for
//! desk-scale lattices (dimensions well under ten).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Row-reduce a copy of `a`, returning (reduced matrix, rank, pivot columns).
fn row_reduce(mut a: Vec<Vec<Rat>>) -> (Vec<Vec<Rat>>, usize, Vec<usize>) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        let inv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = &*x / &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &a[r][j] * &f;
                    a[i][j] = &a[i][j] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    (a, r, pivots)
}

pub fn rank(a: &[Vec<Rat>]) -> usize {
    row_reduce(a.to_vec()).1
}

pub fn det(a: &[Vec<Rat>]) -> Rat {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n), "det of non-square matrix");
    let mut m = a.to_vec();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rat::zero();
        };
        if pr != c {
            m.swap(c, pr);
            d = -d;
        }
        d *= m[c][c].clone();
        let inv = m[c][c].clone();
        for i in (c + 1)..n {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &inv;
                for j in c..n {
                    let t = &m[c][j] * &f;
                    m[i][j] = &m[i][j] - &t;
                }
            }
        }
    }
    d
}

/// Solve `A x = b` for `x` (columns of `a` are the unknowns' coefficients).
/// Returns `None` when the system is inconsistent; free variables are set to 0.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut v = r.clone();
            v.push(bi.clone());
            v
        })
        .collect();
    aug = row_reduce(aug).0;
    let mut x = vec![Rat::zero(); cols];
    for row in &aug {
        let Some(p) = row[..cols].iter().position(|v| !v.is_zero()) else {
            if !row[cols].is_zero() {
                return None;
            }
            continue;
        };
        x[p] = row[cols].clone();
        // back-substitution is already done by full reduction; free vars stay 0,
        // but the pivot row may still reference them: subtract their (zero)
        // contribution, so nothing to do.
        for j in (p + 1)..cols {
            if !row[j].is_zero() && !x[j].is_zero() {
                let t = &row[j] * &x[j];
                x[p] = &x[p] - &t;
            }
        }
    }
    // verify (free-variable interaction makes the above conservative)
    for (row, bi) in a.iter().zip(b) {
        let mut s = Rat::zero();
        for (aij, xj) in row.iter().zip(&x) {
            s += aij * xj;
        }
        if &s != bi {
            return None;
        }
    }
    Some(x)
}

/// Basis of the rational null space of `a`.
pub fn kernel(a: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let (red, _, pivots) = row_reduce(a.to_vec());
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (ri, &p) in pivots.iter().enumerate() {
            v[p] = -red[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}

// ---------------------------------------------------------------------------
// integer matrices
// ---------------------------------------------------------------------------

/// Column-style Hermite reduction: returns (h, u) with `a * u = h`, `u`
/// unimodular; zero columns of `h` are grouped at the end.
pub fn column_hnf(a: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut h = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let col_sub = |h: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        for r in 0..rows {
            let t = &h[r][src] * q;
            h[r][dst] = &h[r][dst] - &t;
        }
        for r in 0..cols {
            let t = &u[r][src] * q;
            u[r][dst] = &u[r][dst] - &t;
        }
    };
    let col_swap = |h: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for r in 0..rows {
            h[r].swap(i, j);
        }
        for r in 0..cols {
            u[r].swap(i, j);
        }
    };
    let mut c = 0;
    for r in 0..rows {
        if c >= cols {
            break;
        }
        loop {
            let nz: Vec<usize> = (c..cols).filter(|&j| !h[r][j].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                col_swap(&mut h, &mut u, c, nz[0]);
                c += 1;
                break;
            }
            let &jmin = nz
                .iter()
                .min_by_key(|&&j| h[r][j].abs())
                .expect("nonempty");
            for &j in &nz {
                if j != jmin {
                    let q = div_round(&h[r][j], &h[r][jmin]);
                    if !q.is_zero() {
                        col_sub(&mut h, &mut u, j, jmin, &q);
                    } else {
                        // force progress: subtract once so magnitudes shrink
                        let one = BigInt::one();
                        let q = if (&h[r][j] * &h[r][jmin]).is_negative() {
                            -one
                        } else {
                            one
                        };
                        col_sub(&mut h, &mut u, j, jmin, &q);
                    }
                }
            }
        }
    }
    (h, u)
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest integer to a/b
    let two = BigInt::from(2);
    let (q, r) = num_integer::Integer::div_mod_floor(a, b);
    if &r * &two >= b.abs() {
        q + BigInt::one()
    } else {
        q
    }
}

/// Basis of the integer kernel {x in Z^n : a x = 0}.
pub fn integer_kernel(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let (h, u) = column_hnf(a);
    let mut out = Vec::new();
    for j in 0..cols {
        if (0..rows).all(|r| h[r][j].is_zero()) {
            out.push((0..cols).map(|r| u[r][j].clone()).collect());
        }
    }
    out
}

/// Smith normal form with left transform tracked: returns (d, pinv) where
/// `a Z^n = pinv * diag(d) * Z^n` (as column lattices), `d` the diagonal.
pub fn snf_with_transform(a: &[Vec<BigInt>]) -> (Vec<BigInt>, Vec<Vec<BigInt>>) {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n));
    let mut m = a.to_vec();
    let mut pinv: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    // row op on m: R_i -= q R_j  =>  pinv column op: C_j += q C_i
    for t in 0..n {
        loop {
            let mut pr = None;
            'search: for i in t..n {
                for j in t..n {
                    if !m[i][j].is_zero() {
                        match pr {
                            None => pr = Some((i, j)),
                            Some((pi, pj)) => {
                                if m[i][j].abs() < m[pi][pj].abs() {
                                    pr = Some((i, j));
                                }
                            }
                        }
                        if m[i][j].abs() == BigInt::one() {
                            pr = Some((i, j));
                            break 'search;
                        }
                    }
                }
            }
            let Some((pi, pj)) = pr else {
                break;
            };
            // move pivot to (t, t)
            if pi != t {
                m.swap(pi, t);
                for r in 0..n {
                    pinv[r].swap(pi, t);
                }
            }
            if pj != t {
                for r in 0..n {
                    m[r].swap(pj, t);
                }
            }
            let mut clean = true;
            for i in (t + 1)..n {
                if !m[i][t].is_zero() {
                    let q = num_integer::Integer::div_floor(&m[i][t], &m[t][t]);
                    if !q.is_zero() {
                        for j in t..n {
                            let s = &m[t][j] * &q;
                            m[i][j] = &m[i][j] - &s;
                        }
                        for r in 0..n {
                            let s = &pinv[r][i] * &q;
                            pinv[r][t] = &pinv[r][t] + &s;
                        }
                    }
                    if !m[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in (t + 1)..n {
                if !m[t][j].is_zero() {
                    let q = num_integer::Integer::div_floor(&m[t][j], &m[t][t]);
                    if !q.is_zero() {
                        for i in t..n {
                            let s = &m[i][t] * &q;
                            m[i][j] = &m[i][j] - &s;
                        }
                    }
                    if !m[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
    }
    let d = (0..n).map(|i| m[i][i].abs()).collect();
    (d, pinv)
}

/// Coset representatives of Z^n / (a Z^n) for a full-rank square integer `a`
/// (columns generate the sublattice). Panics if the index is infinite.
pub fn coset_representatives(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let (d, pinv) = snf_with_transform(a);
    assert!(d.iter().all(|x| !x.is_zero()), "infinite index quotient");
    let mut reps = vec![vec![BigInt::zero(); n]];
    for (i, di) in d.iter().enumerate() {
        let mut next = Vec::new();
        let bound: i64 = di
            .to_string()
            .parse()
            .expect("quotient too large to enumerate");
        for r in &reps {
            for k in 0..bound {
                let mut v = r.clone();
                v[i] = BigInt::from(k);
                next.push(v);
            }
        }
        reps = next;
    }
    // map back through pinv: rep vector r -> pinv * r
    reps.into_iter()
        .map(|r| {
            (0..n)
                .map(|i| (0..n).map(|j| &pinv[i][j] * &r[j]).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rm(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| rat_int(x)).collect())
            .collect()
    }

    fn im(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn det_and_rank() {
        assert_eq!(det(&rm(&[&[2, 0], &[1, 3]])), rat_int(6));
        assert_eq!(rank(&rm(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn solve_unique() {
        let a = rm(&[&[2, 0], &[1, 3]]);
        let b = vec![rat_int(4), rat_int(11)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, vec![rat_int(2), rat_int(3)]);
    }

    #[test]
    fn solve_inconsistent() {
        let a = rm(&[&[1, 1], &[2, 2]]);
        assert!(solve(&a, &[rat_int(1), rat_int(3)]).is_none());
    }

    #[test]
    fn integer_kernel_mod() {
        // kernel of [2 1] over Z: spanned by (1, -2)
        let k = integer_kernel(&im(&[&[2, 1]]));
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert!(v[0].abs() == BigInt::one() || v[1].abs() == BigInt::from(2));
        assert!((&v[0] * BigInt::from(2) + &v[1]).is_zero());
    }

    #[test]
    fn snf_cosets() {
        // lattice generated by columns (2,0),(1,3): index 6
        let a = im(&[&[2, 1], &[0, 3]]);
        let (d, _) = snf_with_transform(&a);
        let prod: BigInt = d.iter().product();
        assert_eq!(prod, BigInt::from(6));
        let reps = coset_representatives(&a);
        assert_eq!(reps.len(), 6);
        // all reps distinct mod the lattice: reduce via rational solve
        for (i, r) in reps.iter().enumerate() {
            for s in reps.iter().skip(i + 1) {
                let diff: Vec<Rat> = r
                    .iter()
                    .zip(s)
                    .map(|(x, y)| Rat::from(x - y))
                    .collect();
                let cols: Vec<Vec<Rat>> = vec![
                    vec![rat_int(2), rat_int(1)],
                    vec![rat_int(0), rat_int(3)],
                ];
                let sol = solve(&cols, &diff).unwrap();
                assert!(
                    !sol.iter().all(|c| c.is_integer()),
                    "duplicate coset representative"
                );
            }
        }
    }
}
