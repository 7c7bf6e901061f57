//! Small dense helpers for the variance formula and the N = 3 matrix checks.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Dense<S> = Vec<Vec<S>>;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve<S: Scalar>(mut a: Dense<S>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()))
            .ok_or(Error::Singular)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = S::one() / a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() * inv.clone();
            for c in col..n {
                if !a[col][c].is_zero() {
                    let d = f.clone() * a[col][c].clone();
                    a[r][c] = a[r][c].clone() - d;
                }
            }
            let d = f * b[col].clone();
            b[r] = b[r].clone() - d;
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            if !a[r][c].is_zero() {
                acc = acc - a[r][c].clone() * x[c].clone();
            }
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x)
}

pub fn matmul<S: Scalar>(a: &Dense<S>, b: &Dense<S>) -> Dense<S> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![S::zero(); m]; n];
    for i in 0..n {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[k][j].is_zero() {
                    out[i][j] = out[i][j].clone() + aik.clone() * b[k][j].clone();
                }
            }
        }
    }
    out
}
