//! Fixed-point iterations for the Lippmann-Schwinger equation.
//!
//! Three reference media are supported: the matrix (`B`), the arithmetic
//! mean of the phases (`MS`) and their geometric mean (`EM`). The EM scheme
//! iterates on a non-conforming field `e`; the compatible field is recovered
//! as `E - Γ¹(δL/z0 e)`. The EM recursion can also be run on the
//! polarization `τ = (z(x) + z0) e`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::VectorField2D;
use crate::greens::{GreenOperator, GreenVariant};
use crate::microstructure::Microstructure;
use crate::series::SeriesExtractor;

/// Default imposed average field.
pub const E1: [f64; 2] = [1.0, 0.0];

/// Iterates whose increment exceeds this multiple of `|E|` count as diverged.
const BLOW_UP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    B,
    Ms,
    Em,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [Self::B, Self::Ms, Self::Em];

    pub fn name(&self) -> &'static str {
        match self {
            Self::B => "B",
            Self::Ms => "MS",
            Self::Em => "EM",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b" => Ok(Self::B),
            "ms" => Ok(Self::Ms),
            "em" => Ok(Self::Em),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// How the EM recursion is carried out. Both forms produce the same iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmForm {
    #[default]
    Classic,
    Polarization,
}

/// Reference medium, contrast variable and per-phase multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub kind: SchemeKind,
    pub z: f64,
    pub z0: f64,
    pub t: f64,
    /// Phase-1 multiplier: `δL/z0` for B and MS, the `W` value for EM.
    pub m1: f64,
    /// Phase-2 multiplier, same convention as `m1`.
    pub m2: f64,
}

impl SchemeParams {
    pub fn new(kind: SchemeKind, z: f64) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::InvalidArgument(format!("z must be finite, got {z}")));
        }
        let (z0, t) = match kind {
            SchemeKind::B => (1.0, z - 1.0),
            SchemeKind::Ms => {
                if z == -1.0 {
                    return Err(Error::SingularReference(
                        "z = -1 gives a zero arithmetic mean".into(),
                    ));
                }
                ((z + 1.0) / 2.0, (z - 1.0) / (z + 1.0))
            }
            SchemeKind::Em => {
                if z <= 0.0 {
                    return Err(Error::Domain(format!(
                        "the geometric-mean reference needs z > 0, got {z}"
                    )));
                }
                let s = z.sqrt();
                (s, (s - 1.0) / (s + 1.0))
            }
        };
        let (m1, m2) = match kind {
            SchemeKind::B => (z - 1.0, 0.0),
            SchemeKind::Ms | SchemeKind::Em => (t, -t),
        };
        Ok(Self { kind, z, z0, t, m1, m2 })
    }

    /// `δL/z0` in phase 1 and phase 2.
    pub fn zeta(&self) -> (f64, f64) {
        ((self.z - self.z0) / self.z0, (1.0 - self.z0) / self.z0)
    }

    /// `(L - L0)(L + L0)^-1` in phase 1 and phase 2.
    pub fn w(&self) -> (f64, f64) {
        (
            (self.z - self.z0) / (self.z + self.z0),
            (1.0 - self.z0) / (1.0 + self.z0),
        )
    }
}

pub fn scheme_params(kind: SchemeKind, z: f64) -> Result<SchemeParams> {
    SchemeParams::new(kind, z)
}

/// Current iterate: `ε^(k)` for B/MS, `e^(k)` for EM, plus `τ^(k)` when the
/// polarization form is used.
#[derive(Debug, Clone)]
pub struct IterState {
    pub eps: VectorField2D,
    pub tau: Option<VectorField2D>,
    pub k: usize,
    pub loading: [f64; 2],
}

/// Scheme bound to one microstructure, Green operator and loading.
#[derive(Debug, Clone)]
pub struct SchemeOperator {
    params: SchemeParams,
    green: GreenOperator,
    zeta: Vec<f64>,
    w: Vec<f64>,
    /// `z(x)`: `z` in phase 1, 1 in phase 2.
    cond: Vec<f64>,
    loading: [f64; 2],
}

impl SchemeOperator {
    pub fn new(
        params: SchemeParams,
        micro: &Microstructure,
        variant: GreenVariant,
        loading: [f64; 2],
    ) -> Result<Self> {
        Self::with_green(params, micro, GreenOperator::new(*micro.grid(), variant), loading)
    }

    pub fn with_green(
        params: SchemeParams,
        micro: &Microstructure,
        green: GreenOperator,
        loading: [f64; 2],
    ) -> Result<Self> {
        if green.grid() != micro.grid() {
            return Err(Error::DimensionMismatch {
                expected: micro.grid().len(),
                found: green.grid().len(),
            });
        }
        if !(loading[0].is_finite() && loading[1].is_finite()) || loading == [0.0, 0.0] {
            return Err(Error::InvalidArgument(format!(
                "loading must be finite and nonzero, got {loading:?}"
            )));
        }
        let (z1, z2) = params.zeta();
        let (w1, w2) = params.w();
        Ok(Self {
            params,
            zeta: micro.phase_field(z1, z2),
            w: micro.phase_field(w1, w2),
            cond: micro.phase_field(params.z, 1.0),
            green,
            loading,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn green(&self) -> &GreenOperator {
        &self.green
    }

    pub fn loading(&self) -> [f64; 2] {
        self.loading
    }

    fn average(&self) -> VectorField2D {
        VectorField2D::constant(*self.green.grid(), self.loading)
    }

    /// `ε^(0) = E` for B/MS; `e^(0) = 2 z0 / (z(x) + z0) E` for EM, with
    /// `τ^(0) = 2 z0 E` in the polarization form.
    pub fn initial_state(&self, form: EmForm) -> IterState {
        let e = self.average();
        match self.params.kind {
            SchemeKind::B | SchemeKind::Ms => IterState {
                eps: e,
                tau: None,
                k: 0,
                loading: self.loading,
            },
            SchemeKind::Em => {
                let z0 = self.params.z0;
                let weights: Vec<f64> = self.cond.iter().map(|c| 2.0 * z0 / (c + z0)).collect();
                IterState {
                    eps: e.scale_pointwise(&weights),
                    tau: (form == EmForm::Polarization).then(|| e.scale(2.0 * z0)),
                    k: 0,
                    loading: self.loading,
                }
            }
        }
    }

    /// `ε ← E - Γ¹(δL/z0 ε)`.
    pub fn step_basic(&self, state: &mut IterState) -> Result<()> {
        if self.params.kind == SchemeKind::Em {
            return Err(Error::InvalidArgument("step_basic needs a B or MS scheme".into()));
        }
        let g = self.green.apply_gamma1(&state.eps.scale_pointwise(&self.zeta))?;
        state.eps = g.scale(-1.0).add_constant(self.loading);
        state.k += 1;
        Ok(())
    }

    /// One EM step on `e`. Returns the conforming field attached to the
    /// iterate that was stepped from.
    pub fn step_em(&self, state: &mut IterState) -> Result<VectorField2D> {
        if self.params.kind != SchemeKind::Em {
            return Err(Error::InvalidArgument("step_em needs the EM scheme".into()));
        }
        let g = self.green.apply_gamma1(&state.eps.scale_pointwise(&self.zeta))?;
        let conforming = g.scale(-1.0).add_constant(self.loading);
        let r = &state.eps - &conforming;
        let z0 = self.params.z0;
        let weights: Vec<f64> = self.cond.iter().map(|c| 2.0 * z0 / (c + z0)).collect();
        state.eps = state.eps.axpy(-1.0, &r.scale_pointwise(&weights));
        state.k += 1;
        Ok(conforming)
    }

    /// `τ ← -H¹(W τ) + 2 z0 E`, then `e = τ / (z(x) + z0)`.
    pub fn step_em_polarization(&self, state: &mut IterState) -> Result<()> {
        if self.params.kind != SchemeKind::Em {
            return Err(Error::InvalidArgument(
                "step_em_polarization needs the EM scheme".into(),
            ));
        }
        let tau = state
            .tau
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("state carries no polarization field".into()))?;
        let h = self.green.apply_h1(&tau.scale_pointwise(&self.w))?;
        let z0 = self.params.z0;
        let next = h
            .scale(-1.0)
            .add_constant([2.0 * z0 * self.loading[0], 2.0 * z0 * self.loading[1]]);
        let inv: Vec<f64> = self.cond.iter().map(|c| 1.0 / (c + z0)).collect();
        state.eps = next.scale_pointwise(&inv);
        state.tau = Some(next);
        state.k += 1;
        Ok(())
    }

    /// `E - Γ¹(δL/z0 e)`.
    pub fn em_conforming(&self, e: &VectorField2D) -> Result<VectorField2D> {
        let g = self.green.apply_gamma1(&e.scale_pointwise(&self.zeta))?;
        Ok(g.scale(-1.0).add_constant(self.loading))
    }

    /// `σ = z(x) ε`.
    pub fn current(&self, eps: &VectorField2D) -> VectorField2D {
        eps.scale_pointwise(&self.cond)
    }

    /// `<σ>·E / |E|²`.
    pub fn effective_estimate(&self, eps: &VectorField2D) -> f64 {
        let s = self.current(eps).mean();
        let e = self.loading;
        (s[0] * e[0] + s[1] * e[1]) / (e[0] * e[0] + e[1] * e[1])
    }

    /// Returns the conforming field of the current iterate and advances the
    /// state by one step.
    fn advance(&self, state: &mut IterState) -> Result<VectorField2D> {
        match (self.params.kind, state.tau.is_some()) {
            (SchemeKind::B | SchemeKind::Ms, _) => {
                let c = state.eps.clone();
                self.step_basic(state)?;
                Ok(c)
            }
            (SchemeKind::Em, false) => self.step_em(state),
            (SchemeKind::Em, true) => {
                let c = self.em_conforming(&state.eps)?;
                self.step_em_polarization(state)?;
                Ok(c)
            }
        }
    }
}

pub fn step_basic(
    state: &mut IterState,
    params: &SchemeParams,
    micro: &Microstructure,
    variant: GreenVariant,
) -> Result<()> {
    SchemeOperator::new(*params, micro, variant, state.loading)?.step_basic(state)
}

pub fn step_em(
    state: &mut IterState,
    params: &SchemeParams,
    micro: &Microstructure,
    variant: GreenVariant,
) -> Result<()> {
    SchemeOperator::new(*params, micro, variant, state.loading)?
        .step_em(state)
        .map(|_| ())
}

pub fn step_em_polarization(
    state: &mut IterState,
    params: &SchemeParams,
    micro: &Microstructure,
    variant: GreenVariant,
) -> Result<()> {
    SchemeOperator::new(*params, micro, variant, state.loading)?.step_em_polarization(state)
}

pub fn em_conforming(
    e: &VectorField2D,
    params: &SchemeParams,
    micro: &Microstructure,
    variant: GreenVariant,
    loading: [f64; 2],
) -> Result<VectorField2D> {
    SchemeOperator::new(*params, micro, variant, loading)?.em_conforming(e)
}

/// `<z(x) ε>·e1`.
pub fn effective_estimate(eps: &VectorField2D, z: f64, micro: &Microstructure) -> f64 {
    let cond = micro.phase_field(z, 1.0);
    eps.scale_pointwise(&cond).mean()[0]
}

/// Stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    /// Equilibrium residual of the current.
    #[default]
    Div,
    /// Norm of the difference of successive iterates.
    Diff,
    /// `|d_k t^k| |E|` with numerically extracted `d_k`.
    Coef,
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "div" => Ok(Self::Div),
            "diff" => Ok(Self::Diff),
            "coef" => Ok(Self::Coef),
            other => Err(Error::InvalidArgument(format!("unknown criterion '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub variant: GreenVariant,
    pub criterion: Criterion,
    pub tol: f64,
    pub max_iter: usize,
    pub loading: [f64; 2],
    pub em_form: EmForm,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            variant: GreenVariant::Continuous,
            criterion: Criterion::Div,
            tol: 1e-8,
            max_iter: 1000,
            loading: E1,
            em_form: EmForm::Classic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveRow {
    pub k: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub coef: f64,
    pub z_eff: f64,
}

impl SolveRow {
    pub fn indicator(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Div => self.delta1,
            Criterion::Diff => self.delta2,
            Criterion::Coef => self.coef,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Diverged,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIter => "max_iter",
            Self::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub params: SchemeParams,
    pub rows: Vec<SolveRow>,
    pub status: SolveStatus,
}

impl SolveReport {
    /// Last recorded effective estimate.
    pub fn z_eff(&self) -> Option<f64> {
        self.rows.last().map(|r| r.z_eff)
    }

    pub fn iterations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.k)
    }

    /// First iteration at which `c` drops to `tol` or below.
    pub fn first_below(&self, c: Criterion, tol: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.indicator(c) <= tol).map(|r| r.k)
    }
}

/// Runs the scheme until the chosen indicator falls to `tol`.
///
/// Row `k` describes the conforming iterate `ε^(k)`: the equilibrium
/// residual of `z(x) ε^(k)`, the increment `|ε^(k+1) - ε^(k)|`, the
/// coefficient indicator and the effective estimate.
pub fn solve(
    kind: SchemeKind,
    micro: &Microstructure,
    z: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let params = SchemeParams::new(kind, z)?;
    let op = SchemeOperator::new(params, micro, opts.variant, opts.loading)?;
    let mut coeffs = SeriesExtractor::new(kind, micro, op.green(), opts.loading)?;
    let e_norm = opts.loading[0].hypot(opts.loading[1]);

    let mut state = op.initial_state(opts.em_form);
    op.advance(&mut state)?;
    let mut cur = op.advance(&mut state)?;
    let mut rows = Vec::new();
    let mut status = SolveStatus::MaxIter;
    for k in 1..=opts.max_iter {
        let next = op.advance(&mut state)?;
        if !next.is_finite() || !cur.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        let (_, _, d_k) = coeffs.next().expect("extractor is unbounded");
        let row = SolveRow {
            k,
            delta1: op.green().divergence_residual(&op.current(&cur))?,
            delta2: (&next - &cur).l2_norm(),
            coef: (d_k * params.t.powi(k as i32)).abs() * e_norm,
            z_eff: op.effective_estimate(&cur),
        };
        rows.push(row);
        if row.delta2 > BLOW_UP * e_norm || !row.delta1.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        if row.indicator(opts.criterion) <= opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        cur = next;
    }
    Ok(SolveReport { params, rows, status })
}
