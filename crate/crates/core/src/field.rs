//! Periodic pixel grids, two-component fields and the 2D discrete Fourier
//! transform used by every operator in the crate.
//!
//! Fields are stored as two planes of complex samples, row-major with the
//! first index `i` (along `e1`) as the slow index. Fields built from real
//! data stay real under every operator except the continuous Green operator
//! on even grids, whose Nyquist rows are not paired Hermitian-symmetrically
//! (see [`crate::greens`]); keeping complex storage makes that case exact.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num::complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Rows handed to one rayon task when transforming along the fast axis.
const ROW_CHUNK: usize = 32;

/// Periodic rectangular pixel grid of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n1: usize,
    n2: usize,
    l1: f64,
    l2: f64,
}

impl Grid2D {
    /// Grid with unit cell lengths.
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        Self::with_lengths(n1, n2, 1.0, 1.0)
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn with_lengths(n1: usize, n2: usize, l1: f64, l2: f64) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::InvalidGrid(format!(
                "pixel counts must be at least 2, got {n1}x{n2}"
            )));
        }
        if !(l1 > 0.0 && l1.is_finite() && l2 > 0.0 && l2.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "cell lengths must be positive and finite, got {l1}x{l2}"
            )));
        }
        Ok(Self { n1, n2, l1, l2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    /// Physical coordinates of the center of pixel `(i, j)`.
    pub fn pixel_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            (i as f64 + 0.5) * self.l1 / self.n1 as f64,
            (j as f64 + 0.5) * self.l2 / self.n2 as f64,
        )
    }

    /// Angular frequency attached to the frequency index `(m, n)`.
    ///
    /// Indices above `n/2` are folded to their negative representative; at
    /// even sizes the Nyquist index `n/2` stays positive.
    pub fn angular_frequency(&self, m: usize, n: usize) -> (f64, f64) {
        (
            2.0 * PI * centered(m, self.n1) as f64 / self.l1,
            2.0 * PI * centered(n, self.n2) as f64 / self.l2,
        )
    }
}

/// Centered integer representative of frequency index `m` on `n` samples.
pub fn centered(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Two-component field sampled at pixel centers.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    grid: Grid2D,
    data: [Vec<Complex64>; 2],
}

/// Alias kept for call sites that only ever hold real data.
pub type RealVectorField2D = VectorField2D;

impl VectorField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        let n = grid.len();
        Self {
            grid,
            data: [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]],
        }
    }

    pub fn constant(grid: Grid2D, value: [f64; 2]) -> Self {
        let n = grid.len();
        Self {
            grid,
            data: [
                vec![Complex64::new(value[0], 0.0); n],
                vec![Complex64::new(value[1], 0.0); n],
            ],
        }
    }

    /// Builds a real field from two component planes.
    pub fn from_real(grid: Grid2D, c1: &[f64], c2: &[f64]) -> Result<Self> {
        if c1.len() != grid.len() || c2.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: c1.len().max(c2.len()),
            });
        }
        if c1.iter().chain(c2).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            grid,
            data: [
                c1.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
                c2.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            ],
        })
    }

    pub fn from_complex(grid: Grid2D, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Result<Self> {
        if c1.len() != grid.len() || c2.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: c1.len().max(c2.len()),
            });
        }
        Ok(Self { grid, data: [c1, c2] })
    }

    /// Samples `f(x1, x2)` at every pixel center.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                let (x1, x2) = grid.pixel_center(i, j);
                let v = f(x1, x2);
                let k = grid.index(i, j);
                out.data[0][k] = Complex64::new(v[0], 0.0);
                out.data[1][k] = Complex64::new(v[1], 0.0);
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.data[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c]
    }

    pub fn at(&self, i: usize, j: usize) -> [Complex64; 2] {
        let k = self.grid.index(i, j);
        [self.data[0][k], self.data[1][k]]
    }

    /// Real part of component `c`.
    pub fn real_component(&self, c: usize) -> Vec<f64> {
        self.data[c].iter().map(|v| v.re).collect()
    }

    /// Largest absolute imaginary part over both components.
    pub fn max_imag(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.im.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Pointwise multiplication by a real scalar field.
    pub fn scale_pointwise(&self, weights: &[f64]) -> Self {
        debug_assert_eq!(weights.len(), self.grid.len());
        let mut out = self.clone();
        for plane in out.data.iter_mut() {
            plane.iter_mut().zip(weights).for_each(|(v, w)| *v *= *w);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for plane in out.data.iter_mut() {
            plane.iter_mut().for_each(|v| *v *= s);
        }
        out
    }

    /// Adds the same constant vector to every pixel.
    pub fn add_constant(&self, c: [f64; 2]) -> Self {
        let mut out = self.clone();
        for (plane, &cv) in out.data.iter_mut().zip(&c) {
            plane.iter_mut().for_each(|v| v.re += cv);
        }
        out
    }

    /// Component-wise arithmetic mean, complex.
    pub fn mean_complex(&self) -> [Complex64; 2] {
        let n = self.grid.len() as f64;
        let s1: Complex64 = self.data[0].iter().sum();
        let s2: Complex64 = self.data[1].iter().sum();
        [s1 / n, s2 / n]
    }

    /// Component-wise arithmetic mean of the real parts.
    pub fn mean(&self) -> [f64; 2] {
        let m = self.mean_complex();
        [m[0].re, m[1].re]
    }

    /// Root mean square of the pointwise Euclidean magnitude.
    pub fn l2_norm(&self) -> f64 {
        let n = self.grid.len() as f64;
        let s: f64 = self.data.iter().flatten().map(|v| v.norm_sqr()).sum();
        (s / n).sqrt()
    }

    /// `<conj(self) . other>`: spatial average of the Hermitian pointwise product.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let n = self.grid.len() as f64;
        let s: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.conj() * y))
            .sum();
        s / n
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, q) in out.data.iter_mut().zip(&other.data) {
            p.iter_mut().zip(q).for_each(|(x, y)| *x += y * a);
        }
        out
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (p, q) in out.data.iter_mut().zip(&other.data) {
            p.iter_mut().zip(q).for_each(|(x, y)| *x = f(*x, *y));
        }
        out
    }

}

impl Add for &VectorField2D {
    type Output = VectorField2D;
    fn add(self, rhs: Self) -> VectorField2D {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &VectorField2D {
    type Output = VectorField2D;
    fn sub(self, rhs: Self) -> VectorField2D {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &VectorField2D {
    type Output = VectorField2D;
    fn mul(self, rhs: f64) -> VectorField2D {
        self.scale(rhs)
    }
}

/// Fourier coefficients of a [`VectorField2D`], indexed by frequency `(m, n)`
/// in the same row-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField2D {
    grid: Grid2D,
    data: [Vec<Complex64>; 2],
}

impl SpectralVectorField2D {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.data[c]
    }

    pub fn at(&self, m: usize, n: usize) -> [Complex64; 2] {
        let k = self.grid.index(m, n);
        [self.data[0][k], self.data[1][k]]
    }

    pub fn from_planes(grid: Grid2D, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Result<Self> {
        if c1.len() != grid.len() || c2.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: c1.len().max(c2.len()),
            });
        }
        Ok(Self { grid, data: [c1, c2] })
    }

    pub(crate) fn planes_mut(&mut self) -> &mut [Vec<Complex64>; 2] {
        &mut self.data
    }

    pub(crate) fn planes(&self) -> &[Vec<Complex64>; 2] {
        &self.data
    }
}

/// Transform direction for [`spectral_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Planned 2D transform for one grid size. Forward is the plain DFT sum,
/// inverse carries the `1/(n1 n2)` factor.
#[derive(Clone)]
pub struct Fft2 {
    grid: Grid2D,
    rows_fwd: Arc<dyn Fft<f64>>,
    rows_inv: Arc<dyn Fft<f64>>,
    cols_fwd: Arc<dyn Fft<f64>>,
    cols_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("grid", &self.grid).finish()
    }
}

impl Fft2 {
    pub fn new(grid: Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            rows_fwd: planner.plan_fft_forward(grid.n2),
            rows_inv: planner.plan_fft_inverse(grid.n2),
            cols_fwd: planner.plan_fft_forward(grid.n1),
            cols_inv: planner.plan_fft_inverse(grid.n1),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn forward(&self, f: &VectorField2D) -> Result<SpectralVectorField2D> {
        self.check(&f.grid)?;
        let mut data = f.data.clone();
        for plane in data.iter_mut() {
            self.transform_plane(plane, Direction::Forward);
        }
        Ok(SpectralVectorField2D { grid: self.grid, data })
    }

    pub fn inverse(&self, s: SpectralVectorField2D) -> Result<VectorField2D> {
        self.check(&s.grid)?;
        let mut data = s.data;
        let norm = 1.0 / self.grid.len() as f64;
        for plane in data.iter_mut() {
            self.transform_plane(plane, Direction::Inverse);
            plane.iter_mut().for_each(|v| *v *= norm);
        }
        Ok(VectorField2D { grid: self.grid, data })
    }

    fn check(&self, g: &Grid2D) -> Result<()> {
        if g.n1 != self.grid.n1 || g.n2 != self.grid.n2 {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: g.len(),
            });
        }
        Ok(())
    }

    /// Unnormalized in-place transform of one `n1 x n2` plane.
    pub(crate) fn transform_plane(&self, plane: &mut [Complex64], dir: Direction) {
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        let (rows, cols) = match dir {
            Direction::Forward => (&self.rows_fwd, &self.cols_fwd),
            Direction::Inverse => (&self.rows_inv, &self.cols_inv),
        };
        plane
            .par_chunks_mut(n2 * ROW_CHUNK)
            .for_each(|chunk| rows.process(chunk));
        let mut t = transpose(plane, n1, n2);
        t.par_chunks_mut(n1 * ROW_CHUNK)
            .for_each(|chunk| cols.process(chunk));
        let back = transpose(&t, n2, n1);
        plane.copy_from_slice(&back);
    }
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::new(0.0, 0.0); src.len()];
    const B: usize = 32;
    for ib in (0..rows).step_by(B) {
        for jb in (0..cols).step_by(B) {
            for i in ib..(ib + B).min(rows) {
                for j in jb..(jb + B).min(cols) {
                    dst[j * rows + i] = src[i * cols + j];
                }
            }
        }
    }
    dst
}

/// Either side of a transform.
#[derive(Debug, Clone, PartialEq)]
pub enum Transformed {
    Spectral(SpectralVectorField2D),
    Spatial(VectorField2D),
}

/// Forward: plain DFT sum of the spatial field. Inverse: DFT with the
/// `1/(n1 n2)` normalization.
pub fn forward_transform(f: &VectorField2D) -> Result<SpectralVectorField2D> {
    Fft2::new(f.grid).forward(f)
}

pub fn inverse_transform(s: SpectralVectorField2D) -> Result<VectorField2D> {
    Fft2::new(s.grid).inverse(s)
}

/// Dispatching form of [`forward_transform`] / [`inverse_transform`].
pub fn spectral_transform(input: Transformed, direction: Direction) -> Result<Transformed> {
    match (input, direction) {
        (Transformed::Spatial(f), Direction::Forward) => {
            forward_transform(&f).map(Transformed::Spectral)
        }
        (Transformed::Spectral(s), Direction::Inverse) => {
            inverse_transform(s).map(Transformed::Spatial)
        }
        _ => Err(Error::InvalidArgument(
            "forward expects a spatial field, inverse a spectral one".into(),
        )),
    }
}

pub fn mean(f: &VectorField2D) -> [f64; 2] {
    f.mean()
}

pub fn l2_norm(f: &VectorField2D) -> f64 {
    f.l2_norm()
}
