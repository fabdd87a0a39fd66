//! Smooth closed-form block families used as manufactured solutions.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::block::{MetricBlock, M2};
use super::grid::RadialGrid;
use super::state::TodaState;
use crate::error::Result;

/// Value with first and second derivative in `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn var(r: f64) -> Self {
        Self { v: r, d1: 1.0, d2: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self { v: c, d1: 0.0, d2: 0.0 }
    }

    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }
}

impl Add for Jet {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Jet {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

impl Mul for Jet {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

/// `offset + amplitude * sin(freq * r + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub offset: f64,
    pub amplitude: f64,
    pub freq: f64,
    pub phase: f64,
}

impl Profile {
    pub fn jet(&self, r: f64) -> Jet {
        let arg = Jet::var(r) * Jet::constant(self.freq) + Jet::constant(self.phase);
        Jet::constant(self.offset) + Jet::constant(self.amplitude) * arg.sin()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `diag(e^q, e^{-q})`.
    Diagonal,
    /// `[[e^q cosh w, sinh w e^{i chi}], [sinh w e^{-i chi}, e^{-q} cosh w]]`, determinant one.
    NonDiagonal,
}

/// Per-block profiles `q_j, w_j, chi_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedFamily {
    pub kind: FamilyKind,
    pub q: Vec<Profile>,
    pub w: Vec<Profile>,
    pub chi: Vec<Profile>,
}

/// Entry jets of a block: `(re, im)` per entry, row-major.
pub type BlockJet = [[(Jet, Jet); 2]; 2];

impl ManufacturedFamily {
    /// A fixed family with `n` blocks whose profiles differ from block to block.
    pub fn standard(kind: FamilyKind, n: usize) -> Self {
        let q = (0..n)
            .map(|j| Profile {
                offset: 0.15 * j as f64 - 0.1,
                amplitude: 0.3,
                freq: 1.0 + 0.25 * j as f64,
                phase: 0.7 * j as f64,
            })
            .collect();
        let w = (0..n)
            .map(|j| Profile {
                offset: 0.2,
                amplitude: 0.25,
                freq: 0.8,
                phase: 0.5 * j as f64 + 1.0,
            })
            .collect();
        let chi = (0..n)
            .map(|j| Profile {
                offset: 0.3 * j as f64,
                amplitude: 0.6,
                freq: 0.5,
                phase: 0.0,
            })
            .collect();
        Self { kind, q, w, chi }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn jets(&self, j: usize, r: f64) -> BlockJet {
        let zero = Jet::constant(0.0);
        let q = self.q[j].jet(r);
        match self.kind {
            FamilyKind::Diagonal => [[(q.exp(), zero), (zero, zero)], [(zero, zero), ((-q).exp(), zero)]],
            FamilyKind::NonDiagonal => {
                let w = self.w[j].jet(r);
                let chi = self.chi[j].jet(r);
                let p = q.exp() * w.cosh();
                let s = (-q).exp() * w.cosh();
                let zr = w.sinh() * chi.cos();
                let zi = w.sinh() * chi.sin();
                [[(p, zero), (zr, zi)], [(zr, -zi), (s, zero)]]
            }
        }
    }

    /// `(G, G', G'')` at `r`.
    pub fn derivatives(&self, j: usize, r: f64) -> (M2, M2, M2) {
        let jets = self.jets(j, r);
        let pick = |f: fn(&Jet) -> f64| {
            M2::from_fn(|a, b| {
                let (re, im) = &jets[a][b];
                Complex64::new(f(re), f(im))
            })
        };
        (pick(|x| x.v), pick(|x| x.d1), pick(|x| x.d2))
    }

    pub fn block(&self, j: usize, r: f64) -> MetricBlock {
        MetricBlock {
            g: self.derivatives(j, r).0,
        }
    }

    pub fn state(&self, grid: RadialGrid) -> Result<TodaState> {
        TodaState::from_fn(self.n(), grid, |j, r| self.block(j, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_matches_finite_differences() {
        let f = |x: Jet| (x.sin() * x.cosh() + (-x).exp()) * x.cos().sinh();
        let r = 0.7;
        let j = f(Jet::var(r));
        let e = 1e-4;
        let v = |x: f64| f(Jet::constant(x)).v;
        assert!((j.d1 - (v(r + e) - v(r - e)) / (2.0 * e)).abs() < 1e-7);
        assert!((j.d2 - (v(r + e) - 2.0 * v(r) + v(r - e)) / (e * e)).abs() < 1e-5);
    }

    #[test]
    fn families_are_valid_metrics() {
        let grid = RadialGrid::new(1.0, 2.0, 33).unwrap();
        for kind in [FamilyKind::Diagonal, FamilyKind::NonDiagonal] {
            let s = ManufacturedFamily::standard(kind, 3).state(grid).unwrap();
            assert!(s.det_drift() < 1e-12);
            assert!(s.hermiticity_drift() == 0.0);
            if kind == FamilyKind::NonDiagonal {
                assert!(s.max_off_diagonal() > 0.1);
            }
        }
    }
}
