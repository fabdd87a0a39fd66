use nalgebra::Matrix2;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type M2 = Matrix2<Complex64>;

/// A hermitian positive-definite `2 x 2` block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricBlock {
    pub g: M2,
}

/// Tolerance on `|g - g^†|` accepted by [`MetricBlock::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl MetricBlock {
    pub fn new(g: M2) -> Result<Self> {
        let block = Self { g };
        let defect = block.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidParams(format!("block is not hermitian (defect {defect:e})")));
        }
        if !block.is_positive_definite() {
            return Err(Error::InvalidParams("block is not positive definite".into()));
        }
        Ok(block)
    }

    /// `[[p, z], [conj z, s]]`.
    pub fn hermitian(p: f64, s: f64, z: Complex64) -> Self {
        Self {
            g: M2::new(re(p), z, z.conj(), re(s)),
        }
    }

    pub fn diagonal(p: f64, s: f64) -> Self {
        Self::hermitian(p, s, Complex64::zero())
    }

    pub fn identity() -> Self {
        Self::diagonal(1.0, 1.0)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self.g - self.g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Real part of the determinant.
    pub fn det(&self) -> f64 {
        self.g.determinant().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let p = self.g[(0, 0)].re;
        let s = self.g[(1, 1)].re;
        let z = self.g[(0, 1)];
        0.5 * (p + s) - (0.25 * (p - s) * (p - s) + z.norm_sqr()).sqrt()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g[(0, 0)].re > 0.0 && self.det() > 0.0 && self.min_eigenvalue() > 0.0
    }

    pub fn off_diagonal(&self) -> f64 {
        self.g[(0, 1)].norm().max(self.g[(1, 0)].norm())
    }

    pub fn inverse(&self) -> Result<M2> {
        invert(&self.g)
    }
}

pub(crate) fn invert(g: &M2) -> Result<M2> {
    g.try_inverse().ok_or_else(|| Error::Singular("metric block".into()))
}

/// Real coordinates of a hermitian block: `(h11, h22, re h12, im h12)`.
pub fn components(h: &M2) -> [f64; 4] {
    [h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)].re, h[(0, 1)].im]
}

/// Hermitian unit directions dual to [`components`].
pub fn hermitian_basis() -> [M2; 4] {
    let z = Complex64::zero();
    let one = re(1.0);
    let i = Complex64::i();
    [
        M2::new(one, z, z, z),
        M2::new(z, z, z, one),
        M2::new(z, one, one, z),
        M2::new(z, i, -i, z),
    ]
}

pub fn from_components(u: &[f64]) -> M2 {
    let z = Complex64::new(u[2], u[3]);
    M2::new(re(u[0]), z, z.conj(), re(u[1]))
}

/// `(m + m^†)/2`, exactly hermitian.
pub fn hermitize(m: &M2) -> M2 {
    (m + m.adjoint()) * re(0.5)
}

/// Principal square root of a hermitian positive-definite block.
pub fn sqrt_hpd(g: &M2) -> M2 {
    let d = g.determinant().re.max(0.0).sqrt();
    let tr = g.trace().re;
    hermitize(&((g + M2::identity() * re(d)) * re(1.0 / (tr + 2.0 * d).sqrt())))
}

/// `exp(x)` for hermitian `x`.
pub fn exp_hermitian(x: &M2) -> M2 {
    let a = 0.5 * x.trace().re;
    let b = x - M2::identity() * re(a);
    let beta = (-b.determinant().re).max(0.0).sqrt();
    let sinhc = if beta < 1e-8 { 1.0 + beta * beta / 6.0 } else { beta.sinh() / beta };
    hermitize(&((M2::identity() * re(beta.cosh()) + b * re(sinhc)) * re(a.exp())))
}

pub fn frobenius(m: &M2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
