//! Periodic Green operators for scalar conductivity.
//!
//! With an isotropic reference medium `z0 I` the operator `Γ¹ = Γ⁰ z0` does
//! not depend on `z0`. At each frequency it is the rank-one projector
//! `conj(ξ) ξᵀ / |ξ|²` onto the effective frequency `ξ`, and zero at the
//! origin. Three choices of `ξ` are provided: the exact angular frequency,
//! the centered-difference (sine) frequency and the forward/backward
//! difference (complex exponential) frequency.
//!
//! On even grids the continuous frequency at the Nyquist index is `+πN/L`
//! for both members of a conjugate pair, so the operator is a projector per
//! frequency but does not map real fields to real fields. Fields are kept
//! complex throughout; the other two variants vanish or are periodic at
//! Nyquist and preserve reality.

use std::str::FromStr;

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Fft2, Grid2D, SpectralVectorField2D, VectorField2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreenVariant {
    Continuous,
    /// Sine-modified frequency, `N/L sin(L ξ / N)`.
    Mueller,
    /// Exponential-modified frequency, `i N/L (exp(-i L ξ / N) - 1)`.
    Willot,
}

impl GreenVariant {
    pub const ALL: [GreenVariant; 3] = [Self::Continuous, Self::Mueller, Self::Willot];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Continuous => "continuous",
            Self::Mueller => "mueller",
            Self::Willot => "willot",
        }
    }
}

impl FromStr for GreenVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Self::Continuous),
            "mueller" => Ok(Self::Mueller),
            "willot" => Ok(Self::Willot),
            other => Err(Error::InvalidArgument(format!("unknown Green operator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveFrequency {
    pub xi: [Complex64; 2],
}

impl EffectiveFrequency {
    pub fn norm_sqr(&self) -> f64 {
        self.xi[0].norm_sqr() + self.xi[1].norm_sqr()
    }
}

fn modify(xi: f64, n: usize, l: f64, variant: GreenVariant) -> Complex64 {
    let h = l / n as f64;
    match variant {
        GreenVariant::Continuous => Complex64::new(xi, 0.0),
        GreenVariant::Mueller => Complex64::new((h * xi).sin() / h, 0.0),
        GreenVariant::Willot => {
            let i = Complex64::new(0.0, 1.0);
            i * ((Complex64::new(0.0, -h * xi)).exp() - 1.0) / h
        }
    }
}

pub fn effective_frequency(
    grid: &Grid2D,
    index: (usize, usize),
    variant: GreenVariant,
) -> Result<EffectiveFrequency> {
    let (m, n) = index;
    if m >= grid.n1() || n >= grid.n2() {
        return Err(Error::IndexOutOfRange {
            m,
            n,
            n1: grid.n1(),
            n2: grid.n2(),
        });
    }
    let (x1, x2) = grid.angular_frequency(m, n);
    Ok(EffectiveFrequency {
        xi: [
            modify(x1, grid.n1(), grid.l1(), variant),
            modify(x2, grid.n2(), grid.l2(), variant),
        ],
    })
}

/// Per-frequency projector `P = conj(ξ) ξᵀ / |ξ|²`, stored as its upper
/// triangle (`p21 = conj(p12)`).
#[derive(Debug, Clone, Copy)]
struct Projector {
    p11: f64,
    p12: Complex64,
    p22: f64,
}

/// Green operator with its frequency tables and transform plan for one grid.
#[derive(Debug, Clone)]
pub struct GreenOperator {
    grid: Grid2D,
    variant: GreenVariant,
    fft: Fft2,
    xi: Vec<[Complex64; 2]>,
    proj: Vec<Projector>,
}

impl GreenOperator {
    pub fn new(grid: Grid2D, variant: GreenVariant) -> Self {
        let mut xi = Vec::with_capacity(grid.len());
        let mut proj = Vec::with_capacity(grid.len());
        for m in 0..grid.n1() {
            for n in 0..grid.n2() {
                let f = effective_frequency(&grid, (m, n), variant).expect("index in range");
                let d = f.norm_sqr();
                let p = if (m == 0 && n == 0) || d == 0.0 {
                    Projector {
                        p11: 0.0,
                        p12: Complex64::new(0.0, 0.0),
                        p22: 0.0,
                    }
                } else {
                    Projector {
                        p11: f.xi[0].norm_sqr() / d,
                        p12: f.xi[0].conj() * f.xi[1] / d,
                        p22: f.xi[1].norm_sqr() / d,
                    }
                };
                xi.push(f.xi);
                proj.push(p);
            }
        }
        Self {
            grid,
            variant,
            fft: Fft2::new(grid),
            xi,
            proj,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn variant(&self) -> GreenVariant {
        self.variant
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    fn check(&self, f: &VectorField2D) -> Result<()> {
        let g = f.grid();
        if g.n1() != self.grid.n1() || g.n2() != self.grid.n2() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: g.len(),
            });
        }
        Ok(())
    }

    /// Applies the projector table to a spectrum in place.
    pub fn project_spectrum(&self, s: &mut SpectralVectorField2D) {
        let [a, b] = s.planes_mut();
        for ((u, v), p) in a.iter_mut().zip(b.iter_mut()).zip(&self.proj) {
            let (x, y) = (*u, *v);
            *u = x * p.p11 + y * p.p12;
            *v = x * p.p12.conj() + y * p.p22;
        }
    }

    /// `Γ¹ f`: compatible, zero-mean part of `f`.
    pub fn apply_gamma1(&self, f: &VectorField2D) -> Result<VectorField2D> {
        self.check(f)?;
        let mut s = self.fft.forward(f)?;
        self.project_spectrum(&mut s);
        self.fft.inverse(s)
    }

    /// `H¹ f = 2 Γ¹ f - f`.
    pub fn apply_h1(&self, f: &VectorField2D) -> Result<VectorField2D> {
        let g = self.apply_gamma1(f)?;
        Ok(g.scale(2.0).axpy(-1.0, f))
    }

    /// Root-mean-square divergence of `sigma`, evaluated spectrally with
    /// this operator's effective frequencies.
    pub fn divergence_residual(&self, sigma: &VectorField2D) -> Result<f64> {
        self.check(sigma)?;
        let s = self.fft.forward(sigma)?;
        let [a, b] = s.planes();
        let total: f64 = a
            .iter()
            .zip(b)
            .zip(&self.xi)
            .skip(1)
            .map(|((u, v), xi)| (xi[0] * u + xi[1] * v).norm_sqr())
            .sum();
        let n = self.grid.len() as f64;
        Ok(total.sqrt() / n)
    }
}

pub fn apply_gamma1(f: &VectorField2D, variant: GreenVariant) -> Result<VectorField2D> {
    GreenOperator::new(*f.grid(), variant).apply_gamma1(f)
}

pub fn apply_h1(f: &VectorField2D, variant: GreenVariant) -> Result<VectorField2D> {
    GreenOperator::new(*f.grid(), variant).apply_h1(f)
}

pub fn divergence_residual(sigma: &VectorField2D, variant: GreenVariant) -> Result<f64> {
    GreenOperator::new(*sigma.grid(), variant).divergence_residual(sigma)
}
