//! Convergence radii and rates of the three schemes when the singularities
//! of `z̃` lie in `[-β, -1/β]`, and the map of the fastest scheme.

use std::fmt;

use crate::error::{Error, Result};

/// Relative gap under which two rates count as equal.
const TIE_RTOL: f64 = 1e-12;

/// Singularities of the effective conductivity confined to `[-β, -1/β]`.
/// `β = ∞` models the checkerboard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityModel {
    beta: f64,
}

impl SingularityModel {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 1.0 {
            return Err(Error::InvalidArgument(format!("beta must be at least 1, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn checkerboard() -> Self {
        Self { beta: f64::INFINITY }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radii {
    pub rho_b: f64,
    pub rho_ms: f64,
    pub rho_em: f64,
}

/// `ρ/|t|` per scheme; `f64::INFINITY` at `t = 0`. `r_em` is `None` for `z < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple {
    pub r_b: f64,
    pub r_ms: f64,
    pub r_em: Option<f64>,
}

pub fn radii(beta: f64) -> Result<Radii> {
    let beta = SingularityModel::new(beta)?.beta;
    let (rho_b, rho_ms) = if beta.is_infinite() {
        (1.0, 1.0)
    } else if beta == 1.0 {
        (2.0, f64::INFINITY)
    } else {
        (1.0 + 1.0 / beta, (beta + 1.0) / (beta - 1.0))
    };
    Ok(Radii {
        rho_b,
        rho_ms,
        rho_em: 1.0,
    })
}

fn ratio(rho: f64, t: f64) -> f64 {
    if t == 0.0 {
        f64::INFINITY
    } else {
        rho / t.abs()
    }
}

pub fn rates(beta: f64, z: f64) -> Result<RateTriple> {
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be finite, got {z}")));
    }
    let r = radii(beta)?;
    let r_ms = if z == -1.0 {
        0.0
    } else {
        ratio(r.rho_ms, (z - 1.0) / (z + 1.0))
    };
    let r_em = (z >= 0.0).then(|| {
        let s = z.sqrt();
        ratio(r.rho_em, (s - 1.0) / (s + 1.0))
    });
    Ok(RateTriple {
        r_b: ratio(r.rho_b, z - 1.0),
        r_ms,
        r_em,
    })
}

/// Contrasts where two schemes trade places.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// `r_B = r_EM` here; B beats EM below it.
    pub z0: f64,
    /// `(z1, z2)` with `r_EM = r_MS` at both ends and EM faster strictly
    /// inside. `None` while `β < 3`, where MS beats EM for every `z ≠ 1`.
    pub window: Option<(f64, f64)>,
}

pub fn regime_thresholds(beta: f64) -> Result<Thresholds> {
    let beta = SingularityModel::new(beta)?.beta;
    let z0 = if beta.is_infinite() {
        0.0
    } else {
        (((beta + 1.0) / beta).sqrt() - 1.0).powi(2)
    };
    let window = (beta >= 3.0).then(|| {
        if beta.is_infinite() {
            return (0.0, f64::INFINITY);
        }
        let d = (beta - 1.0).powi(2) - 4.0;
        let big = beta - 1.0 + d.max(0.0).sqrt();
        // the small root as 4/big² avoids cancellation
        (4.0 / (big * big), 0.25 * big * big)
    });
    Ok(Thresholds { z0, window })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    B,
    Ms,
    Em,
    Tie,
    Undef,
}

impl Winner {
    pub fn label(&self) -> &'static str {
        match self {
            Self::B => "B",
            Self::Ms => "MS",
            Self::Em => "EM",
            Self::Tie => "TIE",
            Self::Undef => "UNDEF",
        }
    }
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs())
}

/// Scheme with the largest defined rate.
pub fn best_scheme(r: &RateTriple) -> Winner {
    let mut cands: Vec<(Winner, f64)> = vec![(Winner::B, r.r_b), (Winner::Ms, r.r_ms)];
    if let Some(em) = r.r_em {
        cands.push((Winner::Em, em));
    }
    cands.retain(|(_, v)| !v.is_nan());
    let Some(&(w, best)) = cands
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("NaN filtered"))
    else {
        return Winner::Undef;
    };
    if cands.iter().filter(|(_, v)| same(*v, best)).count() > 1 {
        Winner::Tie
    } else {
        w
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() || axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!(
            "{name} axis must be non-empty and strictly increasing"
        )));
    }
    Ok(())
}

/// Fastest scheme per cell, indexed `[beta][z]`.
pub fn best_scheme_grid(beta_axis: &[f64], z_axis: &[f64]) -> Result<Vec<Vec<Winner>>> {
    check_axis("beta", beta_axis)?;
    check_axis("z", z_axis)?;
    beta_axis
        .iter()
        .map(|&beta| {
            z_axis
                .iter()
                .map(|&z| rates(beta, z).map(|r| best_scheme(&r)))
                .collect()
        })
        .collect()
}

/// Pointwise norms of `δL/z0` and `(L - L0)(L + L0)^-1`.
pub fn unconditional_norms(z: f64, z0: f64) -> Result<(f64, f64)> {
    if !(z0 > 0.0) {
        return Err(Error::InvalidArgument(format!("z0 must be positive, got {z0}")));
    }
    if z + z0 == 0.0 {
        return Err(Error::SingularReference(format!("z + z0 vanishes at z = {z}")));
    }
    let norm_z = ((z - z0).abs() / z0).max((1.0 - z0).abs() / z0);
    let norm_w = ((z - z0).abs() / (z + z0).abs()).max((1.0 - z0).abs() / (1.0 + z0));
    Ok((norm_z, norm_w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_examples() {
        let r = radii(3.0).unwrap();
        assert!((r.rho_b - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!((r.rho_ms, r.rho_em), (2.0, 1.0));
        let r = radii(f64::INFINITY).unwrap();
        assert_eq!((r.rho_b, r.rho_ms, r.rho_em), (1.0, 1.0, 1.0));
        let r = radii(1.0).unwrap();
        assert_eq!((r.rho_b, r.rho_ms), (2.0, f64::INFINITY));
        assert!(radii(0.5).is_err());
        assert!(radii(f64::NAN).is_err());
    }

    #[test]
    fn rates_examples() {
        let r = rates(3.0, 0.0).unwrap();
        assert!((r.r_b - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!((r.r_ms, r.r_em), (2.0, Some(1.0)));
        let r = rates(7.0, 1.0).unwrap();
        assert_eq!((r.r_b, r.r_ms, r.r_em), (f64::INFINITY, f64::INFINITY, Some(f64::INFINITY)));
        let r = rates(3.0, 4.0).unwrap();
        assert!((r.r_em.unwrap() - 3.0).abs() < 1e-15);
        assert!((r.r_ms - 10.0 / 3.0).abs() < 1e-15);
        assert!((r.r_b - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(rates(3.0, -0.5).unwrap().r_em, None);
    }

    #[test]
    fn closed_form_rates() {
        for beta in [1.5, 3.0, 8.0] {
            for z in [-0.1, 0.2, 2.0, 30.0] {
                let r = rates(beta, z).unwrap();
                let rb = ((beta + 1.0) / (beta * (z - 1.0))).abs();
                let rms = ((beta + 1.0) * (z + 1.0) / ((beta - 1.0) * (z - 1.0))).abs();
                assert!((r.r_b - rb).abs() <= 1e-12 * rb);
                assert!((r.r_ms - rms).abs() <= 1e-12 * rms);
            }
        }
    }

    #[test]
    fn thresholds_examples() {
        let t = regime_thresholds(3.0).unwrap();
        assert!((t.z0 - 0.023932256574830255).abs() < 1e-15);
        assert_eq!(t.window, Some((1.0, 1.0)));
        let t = regime_thresholds(5.0).unwrap();
        let (z1, z2) = t.window.unwrap();
        assert!((z1 - 0.25 * (4.0 - 12f64.sqrt()).powi(2)).abs() < 1e-12);
        assert!((z1 - 0.07180).abs() < 1e-5 && (z2 - 13.9282).abs() < 1e-4);
        assert_eq!(regime_thresholds(2.0).unwrap().window, None);
        assert!(regime_thresholds(0.9).is_err());
    }

    #[test]
    fn thresholds_equate_rates() {
        for beta in [1.2, 3.0, 4.0, 10.0, 100.0] {
            let t = regime_thresholds(beta).unwrap();
            let r = rates(beta, t.z0).unwrap();
            assert!((r.r_b - r.r_em.unwrap()).abs() <= 1e-10 * r.r_b);
            if let Some((z1, z2)) = t.window.filter(|_| beta > 3.0) {
                for z in [z1, z2] {
                    let r = rates(beta, z).unwrap();
                    assert!((r.r_ms - r.r_em.unwrap()).abs() <= 1e-10 * r.r_ms);
                }
            }
        }
    }

    #[test]
    fn winners() {
        let w = |beta, z| best_scheme(&rates(beta, z).unwrap());
        assert_eq!(w(3.0, 1.0), Winner::Tie);
        assert_eq!(w(2.0, 5.0), Winner::Ms);
        assert_eq!(w(3.0, 0.0), Winner::Ms);
        assert_eq!(w(100.0, 10.0), Winner::Em);
        assert_eq!(w(5.0, 100.0), Winner::Ms);
        assert_eq!(w(5.0, -0.1), Winner::Ms);
        assert_eq!(
            best_scheme(&RateTriple {
                r_b: f64::NAN,
                r_ms: f64::NAN,
                r_em: None
            }),
            Winner::Undef
        );
    }

    #[test]
    fn grid_shape_and_axes() {
        let g = best_scheme_grid(&[1.0, 2.0, 3.0], &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert_eq!((g.len(), g[0].len()), (3, 4));
        assert_eq!(g[2][2], Winner::Tie);
        assert!(best_scheme_grid(&[2.0, 1.0], &[0.0]).is_err());
        assert!(best_scheme_grid(&[], &[0.0]).is_err());
    }

    #[test]
    fn norm_examples() {
        let (nz, _) = unconditional_norms(4.0, 2.5).unwrap();
        assert!((nz - 0.6).abs() < 1e-15);
        let (_, nw) = unconditional_norms(4.0, 2.0).unwrap();
        assert!((nw - 1.0 / 3.0).abs() < 1e-15);
        let (nz, _) = unconditional_norms(1.0, 1.0).unwrap();
        assert_eq!(nz, 0.0);
        assert!(unconditional_norms(1.0, 0.0).is_err());
        assert!(unconditional_norms(-2.0, 2.0).is_err());
    }
}
