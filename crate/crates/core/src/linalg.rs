//! Small dense linear algebra that works for exact and floating scalars.
//!
//! nalgebra's decompositions need `ComplexField`, which rules out
//! `BigRational`; these routines use partial pivoting by `magnitude`, which
//! is exact-safe and adequate for the well-scaled floating matrices here.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// LU factorisation with row pivoting, `P A = L U` packed in one matrix.
struct Lu<S> {
    lu: DMatrix<S>,
    perm: Vec<usize>,
    swaps: usize,
}

fn factor<S: Scalar>(a: &DMatrix<S>, tol: f64) -> Result<Lu<S>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[(i, k)].magnitude().total_cmp(&lu[(j, k)].magnitude()))
            .expect("non-empty range");
        if lu[(pivot, k)].is_negligible(tol) {
            return Err(Error::Singular(format!("zero pivot in column {k}")));
        }
        if pivot != k {
            lu.swap_rows(pivot, k);
            perm.swap(pivot, k);
            swaps += 1;
        }
        let p = lu[(k, k)].clone();
        for i in k + 1..n {
            let f = lu[(i, k)].clone() / p.clone();
            if f.is_zero() {
                lu[(i, k)] = f;
                continue;
            }
            for j in k + 1..n {
                let v = lu[(i, j)].clone() - f.clone() * lu[(k, j)].clone();
                lu[(i, j)] = v;
            }
            lu[(i, k)] = f;
        }
    }
    Ok(Lu { lu, perm, swaps })
}

impl<S: Scalar> Lu<S> {
    fn solve_col(&self, b: &[S]) -> Vec<S> {
        let n = self.lu.nrows();
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i].clone() - self.lu[(i, j)].clone() * y[j].clone();
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = y[i].clone() - self.lu[(i, j)].clone() * y[j].clone();
            }
            y[i] = y[i].clone() / self.lu[(i, i)].clone();
        }
        y
    }
}

/// Default singularity threshold for floating scalars (ignored when exact).
pub const SINGULAR_TOL: f64 = 1e-300;

pub fn inverse<S: Scalar>(a: &DMatrix<S>) -> Result<DMatrix<S>> {
    let lu = factor(a, SINGULAR_TOL)?;
    let n = a.nrows();
    let mut inv = DMatrix::from_element(n, n, S::zero());
    for j in 0..n {
        let mut e = vec![S::zero(); n];
        e[j] = S::one();
        for (i, v) in lu.solve_col(&e).into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

pub fn determinant<S: Scalar>(a: &DMatrix<S>) -> Result<S> {
    match factor(a, SINGULAR_TOL) {
        Ok(lu) => {
            let mut d = (0..a.nrows()).fold(S::one(), |acc, i| acc * lu.lu[(i, i)].clone());
            if lu.swaps % 2 == 1 {
                d = -d;
            }
            Ok(d)
        }
        Err(Error::Singular(_)) => Ok(S::zero()),
        Err(e) => Err(e),
    }
}

pub fn identity<S: Scalar>(n: usize) -> DMatrix<S> {
    DMatrix::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
}

/// The `n x n` exchange matrix (ones on the anti-diagonal).
pub fn exchange<S: Scalar>(n: usize) -> DMatrix<S> {
    DMatrix::from_fn(n, n, |i, j| if i + j + 1 == n { S::one() } else { S::zero() })
}

/// Assembles `[[a, b], [c, d]]` from equal-sized square blocks.
pub fn block2<S: Scalar>(
    a: &DMatrix<S>,
    b: &DMatrix<S>,
    c: &DMatrix<S>,
    d: &DMatrix<S>,
) -> DMatrix<S> {
    let n = a.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)].clone(),
        (true, false) => b[(i, j - n)].clone(),
        (false, true) => c[(i - n, j)].clone(),
        (false, false) => d[(i - n, j - n)].clone(),
    })
}

pub fn scale<S: Scalar>(a: &DMatrix<S>, k: &S) -> DMatrix<S> {
    a.map(|v| v.clone() * k.clone())
}

/// Largest entrywise magnitude of `a - b`.
pub fn max_abs_diff<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x.clone() - y.clone()).magnitude())
        .fold(0.0, f64::max)
}

pub fn max_abs<S: Scalar>(a: &DMatrix<S>) -> f64 {
    a.iter().map(Scalar::magnitude).fold(0.0, f64::max)
}

/// `M A Mᵀ`, the congruence action on bilinear forms.
pub fn congruence<S: Scalar>(m: &DMatrix<S>, a: &DMatrix<S>) -> DMatrix<S> {
    m * a * m.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn exact_inverse_and_det() {
        let a = DMatrix::from_row_slice(3, 3, &[r(0, 1), r(1, 1), r(2, 1), r(1, 1), r(0, 1), r(3, 1), r(4, 1), r(-3, 1), r(8, 1)]);
        let inv = inverse(&a).unwrap();
        assert_eq!(&a * &inv, identity(3));
        assert_eq!(determinant(&a).unwrap(), r(-2, 1));
        let sing = DMatrix::from_row_slice(2, 2, &[r(1, 1), r(2, 1), r(2, 1), r(4, 1)]);
        assert_eq!(determinant(&sing).unwrap(), r(0, 1));
        assert!(matches!(inverse(&sing), Err(Error::Singular(_))));
    }

    #[test]
    fn complex_inverse_matches_nalgebra() {
        let a = DMatrix::from_fn(4, 4, |i, j| Complex64::new((i * 3 + j) as f64 % 5.0 + 0.3, (i as f64) - (j as f64) * 0.7));
        let ours = inverse(&a).unwrap();
        let theirs = a.clone().try_inverse().unwrap();
        assert!(max_abs_diff(&ours, &theirs) < 1e-12);
    }

    #[test]
    fn exchange_squares_to_identity() {
        let j: DMatrix<BigRational> = exchange(5);
        assert_eq!(&j * &j, identity(5));
    }
}
