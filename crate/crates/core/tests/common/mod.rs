//! Reference computations that share no code with the library routes they check.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttring::toda::{ManufacturedFamily, MetricBlock, RadialGrid, TodaState};

pub type M2 = Matrix2<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Continuous residual `-(1/4)(1/r)(r G' G^{-1})' - T G_{j+1} T^† G_j^{-1} + G_j T^† G_{j-1}^{-1} T`
/// of a closed-form family, from exact derivatives.
pub fn analytic_residual(fam: &ManufacturedFamily, twist: &M2, j: usize, r: f64) -> M2 {
    let n = fam.n();
    let (g, g1, g2) = fam.derivatives(j, r);
    let gi = g.try_inverse().unwrap();
    let a = g1 * gi;
    let flow = -(g2 * gi - a * a + a / Complex64::new(r, 0.0)) * Complex64::new(0.25, 0.0);
    let next = fam.derivatives((j + 1) % n, r).0;
    let prev = fam.derivatives((j + n - 1) % n, r).0;
    flow - twist * next * twist.adjoint() * gi + g * twist.adjoint() * prev.try_inverse().unwrap() * twist
}

/// Multiplies every entry of every interior block by `1 + scale * U(-1, 1)`,
/// then restores hermiticity.
pub fn perturb(state: &TodaState, scale: f64, seed: u64) -> TodaState {
    let mut rng = rng(seed);
    let mut out = state.clone();
    for row in out.blocks.iter_mut() {
        let last = row.len() - 1;
        for b in row[1..last].iter_mut() {
            let mut g = b.g;
            for v in g.iter_mut() {
                *v *= 1.0 + scale * rng.random_range(-1.0..1.0);
            }
            b.g = (g + g.adjoint()) * Complex64::new(0.5, 0.0);
            assert!(b.is_positive_definite());
        }
    }
    out
}

/// Scalar periodic Toda chain in `u = log g` for one diagonal component,
/// solved by dense Newton with a finite-difference Jacobian:
///
/// `-(1/(4 r h^2)) sum_± r_{i±1/2} sinh(u_{i±1} - u_i) - s e^{u_{j+1} - u_j} + s e^{u_j - u_{j-1}} = 0`
///
/// where `s = |T_cc|^2`. `inner[j]`, `outer[j]` are boundary values of `u`.
pub fn scalar_toda_solve(grid: &RadialGrid, inner: &[f64], outer: &[f64], s: f64) -> Vec<Vec<f64>> {
    let n = inner.len();
    let pts = grid.points;
    let m = pts - 2;
    let h = (grid.r_max - grid.r_min) / (pts - 1) as f64;
    let r = |i: usize| grid.r_min + i as f64 * h;
    let unpack = |x: &DVector<f64>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|j| {
                let mut row = vec![inner[j]];
                row.extend((0..m).map(|k| x[j * m + k]));
                row.push(outer[j]);
                row
            })
            .collect()
    };
    let resid = |x: &DVector<f64>| -> DVector<f64> {
        let u = unpack(x);
        DVector::from_fn(n * m, |idx, _| {
            let (j, k) = (idx / m, idx % m);
            let i = k + 1;
            let ri = r(i);
            let flow = (ri + h / 2.0) * (u[j][i + 1] - u[j][i]).sinh() + (ri - h / 2.0) * (u[j][i - 1] - u[j][i]).sinh();
            let up = u[(j + 1) % n][i];
            let dn = u[(j + n - 1) % n][i];
            -flow / (4.0 * ri * h * h) - s * (up - u[j][i]).exp() + s * (u[j][i] - dn).exp()
        })
    };
    let mut x = DVector::from_fn(n * m, |idx, _| {
        let (j, k) = (idx / m, idx % m);
        let f = (k + 1) as f64 / (pts - 1) as f64;
        inner[j] * (1.0 - f) + outer[j] * f
    });
    for _ in 0..100 {
        let f0 = resid(&x);
        if f0.amax() < 1e-13 {
            break;
        }
        let eps = 1e-7;
        let mut jac = DMatrix::zeros(n * m, n * m);
        for col in 0..n * m {
            let mut xp = x.clone();
            xp[col] += eps;
            let mut xm = x.clone();
            xm[col] -= eps;
            jac.set_column(col, &((resid(&xp) - resid(&xm)) / (2.0 * eps)));
        }
        let dx = jac.lu().solve(&(-f0)).expect("nonsingular scalar Jacobian");
        x += dx;
    }
    unpack(&x)
}

/// `x^k mod (x^2 + 2 t x - 1)` over `Z[t]` by stepping `x^k -> x^{k+1}`;
/// returns coefficient lists (ascending in `t`) of `x` and `1`.
pub fn reduce_by_stepping(k: usize) -> (Vec<i128>, Vec<i128>) {
    // x^k = alpha x + beta; x^{k+1} = (beta - 2t alpha) x + alpha.
    let mut alpha = vec![0i128];
    let mut beta = vec![1i128];
    for _ in 0..k {
        let mut next_alpha = vec![0i128; alpha.len().max(beta.len()) + 1];
        for (d, v) in beta.iter().enumerate() {
            next_alpha[d] += v;
        }
        for (d, v) in alpha.iter().enumerate() {
            next_alpha[d + 1] -= 2 * v;
        }
        beta = alpha;
        alpha = next_alpha;
    }
    (trim(alpha), trim(beta))
}

pub fn trim(mut v: Vec<i128>) -> Vec<i128> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

pub fn diag_state_max_offdiag(state: &TodaState) -> f64 {
    state.blocks.iter().flatten().map(MetricBlock::off_diagonal).fold(0.0, f64::max)
}
