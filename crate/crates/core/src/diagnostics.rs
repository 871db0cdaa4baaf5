//! Stopping indicators and the two-resolution knee detector.

use crate::error::{Error, Result};
use crate::greens::GreenVariant;
use crate::microstructure::Microstructure;
use crate::schemes::{IterState, SchemeKind, SchemeOperator, SchemeParams};
use crate::series::{SeriesCoefficients, Source};

/// Default relative deviation that marks the knee.
pub const KNEE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorTriple {
    /// Equilibrium residual of `σ^(k)`.
    pub delta1: f64,
    /// `|ε^(k+1) - ε^(k)|`.
    pub delta2: f64,
    /// `|d_k t^k| |E|`.
    pub coef: f64,
}

/// Indicators of the iterate held in `state` (B/MS: `ε^(k)`; EM: its
/// conforming field). `d_series[k]` must exist.
pub fn indicators(
    state: &IterState,
    params: &SchemeParams,
    micro: &Microstructure,
    variant: GreenVariant,
    d_series: &[f64],
) -> Result<IndicatorTriple> {
    let k = state.k;
    let dk = *d_series.get(k).ok_or_else(|| {
        Error::InvalidArgument(format!("d series has no order-{k} coefficient"))
    })?;
    let op = SchemeOperator::new(*params, micro, variant, state.loading)?;
    let eps = match params.kind {
        SchemeKind::Em => op.em_conforming(&state.eps)?,
        _ => state.eps.clone(),
    };
    let delta1 = op.green().divergence_residual(&op.current(&eps))?;
    let delta2 = match params.kind {
        SchemeKind::Em => {
            let mut s = state.clone();
            op.step_em(&mut s)?;
            (&op.em_conforming(&s.eps)? - &eps).l2_norm()
        }
        _ => {
            let mut s = state.clone();
            op.step_basic(&mut s)?;
            (&s.eps - &eps).l2_norm()
        }
    };
    let e = state.loading;
    Ok(IndicatorTriple {
        delta1,
        delta2,
        coef: (dk * params.t.powi(k as i32)).abs() * e[0].hypot(e[1]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KneeReport {
    /// Last order at which both resolutions agree.
    pub k: usize,
    pub threshold: f64,
    pub coarse_n: usize,
    pub fine_n: usize,
}

/// Finds the first order where the coarse coefficients leave the fine ones
/// by more than `threshold` relative; the knee is the order before it.
pub fn knee_detect(
    coarse: &SeriesCoefficients,
    fine: &SeriesCoefficients,
    threshold: f64,
) -> Result<KneeReport> {
    if coarse.kind != fine.kind || coarse.variant != fine.variant {
        return Err(Error::SeriesMismatch(format!(
            "cannot compare {} / {:?} with {} / {:?}",
            coarse.kind, coarse.variant, fine.kind, fine.variant
        )));
    }
    if coarse.source != Source::Numerical || fine.source != Source::Numerical {
        return Err(Error::SeriesMismatch("knee detection needs numerical series".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let len = coarse.d.len().min(fine.d.len());
    let first = (0..len).find(|&k| {
        let (c, f) = (coarse.d[k], fine.d[k]);
        (c - f).abs() > threshold * f.abs().max(f64::EPSILON)
    });
    let k = match first {
        Some(k) => k.saturating_sub(1),
        None => len - 1,
    };
    Ok(KneeReport {
        k,
        threshold,
        coarse_n: coarse.grid_n,
        fine_n: fine.grid_n,
    })
}
