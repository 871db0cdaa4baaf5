//! Two-phase indicator fields and their binary PGM representation.
//!
//! Phase 1 is the inclusion (conductivity `z`), phase 2 the matrix
//! (conductivity 1). A pixel belongs to a shape iff its center does.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::Grid2D;

/// Largest raster accepted by [`Microstructure::load_pgm`] along either axis.
const MAX_RASTER_SIDE: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MicroKind {
    /// Centered square inclusion of side half the cell (volume fraction 1/4).
    Obnosov,
    /// 2x2 block pattern of half-cell squares.
    Checkerboard,
    /// Four equal disks at the quarter points, volume fraction close to 1/2.
    FourDisks,
}

impl FromStr for MicroKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obnosov" => Ok(Self::Obnosov),
            "checkerboard" => Ok(Self::Checkerboard),
            "four-disks" | "four_disks" => Ok(Self::FourDisks),
            other => Err(Error::InvalidArgument(format!("unknown microstructure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Microstructure {
    grid: Grid2D,
    chi1: Vec<bool>,
    f1: f64,
}

impl Microstructure {
    pub fn from_indicator(grid: Grid2D, chi1: Vec<bool>) -> Result<Self> {
        if chi1.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: chi1.len(),
            });
        }
        let count = chi1.iter().filter(|&&b| b).count();
        let f1 = count as f64 / grid.len() as f64;
        Ok(Self { grid, chi1, f1 })
    }

    /// Homogeneous cell made entirely of one phase.
    pub fn uniform(grid: Grid2D, phase1: bool) -> Self {
        Self::from_indicator(grid, vec![phase1; grid.len()]).expect("length matches grid")
    }

    pub fn generate(kind: MicroKind, n: usize) -> Result<Self> {
        match kind {
            MicroKind::Obnosov => obnosov(n),
            MicroKind::Checkerboard => checkerboard(n),
            MicroKind::FourDisks => four_disks(n),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn chi1(&self) -> &[bool] {
        &self.chi1
    }

    pub fn is_phase1(&self, i: usize, j: usize) -> bool {
        self.chi1[self.grid.index(i, j)]
    }

    pub fn volume_fraction(&self) -> f64 {
        self.f1
    }

    /// Per-pixel value `v1` in phase 1 and `v2` in phase 2.
    pub fn phase_field(&self, v1: f64, v2: f64) -> Vec<f64> {
        self.chi1.iter().map(|&b| if b { v1 } else { v2 }).collect()
    }

    /// Writes a binary PGM: 255 for phase 1, 0 for phase 2, row `i` of the
    /// grid is raster row `i` (top first), width `n2`.
    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(&self.to_pgm_bytes())?;
        Ok(())
    }

    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.grid.n2(), self.grid.n1()).into_bytes();
        out.extend(self.chi1.iter().map(|&b| if b { 255u8 } else { 0 }));
        out
    }

    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_pgm_bytes(&bytes)
    }

    /// Parses a binary PGM with maxval 255; values >= 128 map to phase 1.
    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let magic = next_token(bytes, &mut pos)?;
        if magic != b"P5" {
            return Err(Error::Raster("not a binary PGM (expected magic P5)".into()));
        }
        let width = parse_usize(next_token(bytes, &mut pos)?)?;
        let height = parse_usize(next_token(bytes, &mut pos)?)?;
        let maxval = parse_usize(next_token(bytes, &mut pos)?)?;
        if maxval != 255 {
            return Err(Error::Raster(format!("maxval must be 255, found {maxval}")));
        }
        if width > MAX_RASTER_SIDE || height > MAX_RASTER_SIDE {
            return Err(Error::Raster(format!("raster {width}x{height} is too large")));
        }
        let count = width
            .checked_mul(height)
            .ok_or_else(|| Error::Raster("raster dimensions overflow".into()))?;
        // exactly one whitespace byte separates the header from the payload
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Raster("missing separator after header".into()));
        }
        pos += 1;
        let payload = &bytes[pos..];
        if payload.len() < count {
            return Err(Error::Raster(format!(
                "payload has {} bytes, expected {count}",
                payload.len()
            )));
        }
        let grid = Grid2D::new(height, width)
            .map_err(|e| Error::Raster(format!("unusable raster size: {e}")))?;
        let chi1 = payload[..count].iter().map(|&v| v >= 128).collect();
        Self::from_indicator(grid, chi1)
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Raster("truncated header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_usize(tok: &[u8]) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Raster(format!("bad header field '{}'", String::from_utf8_lossy(tok))))
}

fn obnosov(n: usize) -> Result<Microstructure> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "obnosov cell needs an even n >= 4, got {n}"
        )));
    }
    let grid = Grid2D::square(n)?;
    let side = n / 2;
    let start = (n - side) / 2;
    let inside = |i: usize| i >= start && i < start + side;
    let chi1 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| inside(i) && inside(j))
        .collect();
    Microstructure::from_indicator(grid, chi1)
}

fn checkerboard(n: usize) -> Result<Microstructure> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "checkerboard needs an even n, got {n}"
        )));
    }
    let grid = Grid2D::square(n)?;
    let h = n / 2;
    let chi1 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i < h) == (j < h)))
        .collect();
    Microstructure::from_indicator(grid, chi1)
}

/// Squared distance from a point of the unit cell to the nearest quarter point.
fn quarter_distance2(x1: f64, x2: f64) -> f64 {
    let d = |x: f64| {
        let a = (x - 0.25).abs();
        let b = (x - 0.75).abs();
        a.min(b)
    };
    d(x1).powi(2) + d(x2).powi(2)
}

fn four_disks(n: usize) -> Result<Microstructure> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("four-disk cell needs n >= 8, got {n}")));
    }
    let grid = Grid2D::square(n)?;
    let dist: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (x1, x2) = grid.pixel_center(i, j);
            quarter_distance2(x1, x2)
        })
        .collect();
    let mut sorted = dist.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    // Pixel count inside radius r is a step function of r; scan the achievable
    // counts (breaks between distinct distances) for the one closest to n^2/2.
    let target = grid.len() as f64 / 2.0;
    let max_r2 = 0.25_f64 * 0.25;
    let mut best_count = 0usize;
    let mut best_gap = f64::INFINITY;
    let mut k = 0;
    while k < sorted.len() && sorted[k] < max_r2 {
        let mut end = k + 1;
        while end < sorted.len() && sorted[end] == sorted[k] {
            end += 1;
        }
        let gap = (end as f64 - target).abs();
        if gap < best_gap {
            best_gap = gap;
            best_count = end;
        }
        k = end;
    }
    let r2 = if best_count == 0 {
        0.0
    } else if best_count < sorted.len() {
        0.5 * (sorted[best_count - 1] + sorted[best_count])
    } else {
        sorted[best_count - 1]
    };
    let chi1 = dist.iter().map(|&d| d <= r2).collect();
    Microstructure::from_indicator(grid, chi1)
}
