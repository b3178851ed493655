//! Small dense exact linear algebra over Q and Q(i).

use crate::scalar::{GaussRat, Rat};
use num_traits::Zero;

/// Solve A x = b over Q(i) by Gaussian elimination. Returns None if singular.
pub fn solve(a: &[Vec<GaussRat>], b: &[GaussRat]) -> Option<Vec<GaussRat>> {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n) && b.len() == n);
    let mut m: Vec<Vec<GaussRat>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].inv();
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] * &inv;
                for c in col..n {
                    m[r][c] = &m[r][c] - &(&f * &m[col][c]);
                }
                rhs[r] = &rhs[r] - &(&f * &rhs[col]);
            }
        }
    }
    let mut x = Vec::with_capacity(n);
    for r in 0..n {
        x.push(&rhs[r] / &m[r][r]);
    }
    Some(x)
}

/// Invert a rational matrix.
pub fn invert_rat(a: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { crate::scalar::rat_int(1) } else { Rat::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col].clone();
        for c in 0..n {
            m[col][c] = &m[col][c] / &d;
            inv[col][c] = &inv[col][c] / &d;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n {
                    let t = &f * &m[col][c];
                    m[r][c] = &m[r][c] - &t;
                    let t = &f * &inv[col][c];
                    inv[r][c] = &inv[r][c] - &t;
                }
            }
        }
    }
    Some(inv)
}

pub fn mat_vec_rat(a: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn mat_mul_rat(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

/// Nullspace vector for (A - gamma I) x = 0 with x[pivot] = 1, over Q(i).
/// Returns None if the system has no solution of that shape or is degenerate.
pub fn eigenvector_with_unit_entry(
    a: &[Vec<GaussRat>],
    gamma: &GaussRat,
    pivot: usize,
) -> Option<Vec<GaussRat>> {
    let n = a.len();
    // unknowns: x_j for j != pivot; equations: rows != pivot of (A - gamma I) x = 0
    let idx: Vec<usize> = (0..n).filter(|&j| j != pivot).collect();
    let mut m = Vec::with_capacity(n - 1);
    let mut b = Vec::with_capacity(n - 1);
    for &r in &idx {
        let mut row = Vec::with_capacity(n - 1);
        for &j in &idx {
            let mut v = a[r][j].clone();
            if r == j {
                v = &v - gamma;
            }
            row.push(v);
        }
        m.push(row);
        b.push(-&a[r][pivot]);
    }
    let sol = solve(&m, &b)?;
    let mut x = vec![GaussRat::zero(); n];
    x[pivot] = GaussRat::one();
    for (t, &j) in idx.iter().enumerate() {
        x[j] = sol[t].clone();
    }
    // verify the pivot row as well (it was not part of the solve)
    let mut acc = GaussRat::zero();
    for j in 0..n {
        acc = &acc + &(&a[pivot][j] * &x[j]);
    }
    let want = gamma * &x[pivot];
    if acc != want {
        return None;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn solve_2x2() {
        let a = vec![
            vec![GaussRat::from_int(2), GaussRat::from_int(1)],
            vec![GaussRat::from_int(1), GaussRat::from_int(3)],
        ];
        let b = vec![GaussRat::from_int(5), GaussRat::from_int(10)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x[0], GaussRat::from_int(1));
        assert_eq!(x[1], GaussRat::from_int(3));
    }

    #[test]
    fn invert_roundtrip() {
        let a = vec![
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(3), rat_int(5)],
        ];
        let inv = invert_rat(&a).unwrap();
        let prod = mat_mul_rat(&a, &inv);
        assert_eq!(prod[0][0], rat_int(1));
        assert_eq!(prod[0][1], rat_int(0));
        assert_eq!(prod[1][0], rat_int(0));
        assert_eq!(prod[1][1], rat_int(1));
    }
}
