//! Contrast-series coefficients of the effective conductivity.
//!
//! Every scheme's iterates are partial sums of a power series in its
//! contrast variable `t`. The coefficients `d_k` of `z̃ = Σ d_k t^k` depend
//! only on the microstructure and are extracted here by repeated application
//! of the scheme's Green operator to a running field. For the square array
//! of square inclusions at volume fraction 1/4 the exact coefficients follow
//! from the closed form `z̃ = √((1 + 3z) / (3 + z))` by taking square roots
//! of power series.

use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::{BigInt, Integer};

use crate::error::{Error, Result};
use crate::field::VectorField2D;
use crate::greens::{GreenOperator, GreenVariant};
use crate::microstructure::Microstructure;
use crate::schemes::{SchemeKind, SchemeParams, E1};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Numerical,
    Analytic,
}

/// `b_0..b_K` and `d_0..d_K` of one scheme.
///
/// `b` expands `z̃ / z0`, `d` expands `z̃`, both in powers of the scheme's `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub kind: SchemeKind,
    pub source: Source,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    /// Pixels per side of the grid the coefficients came from; 0 when analytic.
    pub grid_n: usize,
    pub variant: Option<GreenVariant>,
}

impl SeriesCoefficients {
    /// Highest order held.
    pub fn order(&self) -> usize {
        self.d.len() - 1
    }
}

/// Lazily extracts `(k, b_k, d_k)` for `k = 1, 2, ...`, one transform pair
/// per order.
#[derive(Debug, Clone)]
pub struct SeriesExtractor<'a> {
    kind: SchemeKind,
    green: &'a GreenOperator,
    chi: Vec<f64>,
    field: VectorField2D,
    loading: [f64; 2],
    k: usize,
    b_prev: f64,
    d_prev: f64,
}

impl<'a> SeriesExtractor<'a> {
    pub fn new(
        kind: SchemeKind,
        micro: &Microstructure,
        green: &'a GreenOperator,
        loading: [f64; 2],
    ) -> Result<Self> {
        if green.grid() != micro.grid() {
            return Err(Error::DimensionMismatch {
                expected: micro.grid().len(),
                found: green.grid().len(),
            });
        }
        if loading == [0.0, 0.0] || !(loading[0].is_finite() && loading[1].is_finite()) {
            return Err(Error::InvalidArgument("loading must be finite and nonzero".into()));
        }
        let chi = match kind {
            SchemeKind::B => micro.phase_field(1.0, 0.0),
            SchemeKind::Ms | SchemeKind::Em => micro.phase_field(1.0, -1.0),
        };
        let field = VectorField2D::constant(*micro.grid(), loading).scale_pointwise(&chi);
        Ok(Self {
            kind,
            green,
            chi,
            field,
            loading,
            k: 0,
            b_prev: 1.0,
            d_prev: 1.0,
        })
    }
}

impl Iterator for SeriesExtractor<'_> {
    type Item = (usize, f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.k += 1;
        let e = self.loading;
        let m = self.field.mean();
        let proj = (m[0] * e[0] + m[1] * e[1]) / (e[0] * e[0] + e[1] * e[1]);
        let sign = if self.k % 2 == 1 { 1.0 } else { -1.0 };
        let scale = if self.kind == SchemeKind::Em { 2.0 } else { 1.0 };
        let b = scale * sign * proj;
        let d = match self.kind {
            SchemeKind::B => b,
            SchemeKind::Ms => self.d_prev + b,
            SchemeKind::Em => self.d_prev + b + self.b_prev,
        };
        let next = match self.kind {
            SchemeKind::Em => self.green.apply_h1(&self.field),
            _ => self.green.apply_gamma1(&self.field),
        }
        .expect("grid checked at construction");
        self.field = next.scale_pointwise(&self.chi);
        self.b_prev = b;
        self.d_prev = d;
        Some((self.k, b, d))
    }
}

/// Numerically extracted `b_k, d_k` for `k ≤ order`, loading `e1`.
pub fn numerical_coefficients(
    kind: SchemeKind,
    micro: &Microstructure,
    variant: GreenVariant,
    order: usize,
) -> Result<SeriesCoefficients> {
    numerical_coefficients_with_loading(kind, micro, variant, order, E1)
}

pub fn numerical_coefficients_with_loading(
    kind: SchemeKind,
    micro: &Microstructure,
    variant: GreenVariant,
    order: usize,
    loading: [f64; 2],
) -> Result<SeriesCoefficients> {
    if order == 0 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    let green = GreenOperator::new(*micro.grid(), variant);
    let mut b = vec![1.0];
    let mut d = vec![1.0];
    for (_, bk, dk) in SeriesExtractor::new(kind, micro, &green, loading)?.take(order) {
        b.push(bk);
        d.push(dk);
    }
    Ok(SeriesCoefficients {
        kind,
        source: Source::Numerical,
        b,
        d,
        grid_n: micro.grid().n1(),
        variant: Some(variant),
    })
}

/// Coefficients of `√(Σ a_k x^k)` truncated to the length of `a`.
pub fn sqrt_series(a: &[f64]) -> Result<Vec<f64>> {
    let a0 = *a
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty series".into()))?;
    if !(a0 > 0.0) {
        return Err(Error::Domain(format!("leading coefficient must be positive, got {a0}")));
    }
    let mut b = Vec::with_capacity(a.len());
    b.push(a0.sqrt());
    for k in 1..a.len() {
        let half: f64 = (1..=(k - 1) / 2).map(|i| b[i] * b[k - i]).sum();
        let mid = if k % 2 == 0 { b[k / 2] * b[k / 2] } else { 0.0 };
        b.push((a[k] - 2.0 * half - mid) / (2.0 * b[0]));
    }
    Ok(b)
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// Exact form of [`sqrt_series`]; the leading coefficient must be the
/// square of a positive rational.
pub fn sqrt_series_exact(a: &[BigRational]) -> Result<Vec<BigRational>> {
    let a0 = a
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty series".into()))?;
    if !a0.is_positive() {
        return Err(Error::Domain("leading coefficient must be positive".into()));
    }
    let b0 = rational_sqrt(a0)
        .ok_or_else(|| Error::Domain("leading coefficient is not a rational square".into()))?;
    let two_b0 = &b0 + &b0;
    let mut b = Vec::with_capacity(a.len());
    b.push(b0);
    for k in 1..a.len() {
        let mut s = BigRational::zero();
        for i in 1..=(k - 1) / 2 {
            s += &b[i] * &b[k - i];
        }
        s = &s + &s;
        if k % 2 == 0 {
            s += &b[k / 2] * &b[k / 2];
        }
        b.push((&a[k] - s) / &two_b0);
    }
    Ok(b)
}

fn pow2(e: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::one() << e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn convolve(x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
    (0..x.len())
        .map(|k| (0..=k).map(|i| &x[i] * &y[k - i]).sum())
        .collect()
}

/// `a_k` (squared expansion of `z̃/z0`) and `c_k` (squared expansion of
/// `z̃`) for the square-inclusion cell, orders `0..=order`.
fn obnosov_squares(kind: SchemeKind, order: usize) -> (Vec<BigRational>, Vec<BigRational>) {
    let len = order + 1;
    match kind {
        SchemeKind::B => {
            // (1 + 3t/4) / (1 + t/4)
            let a: Vec<BigRational> = (0..len as i64)
                .map(|k| match k {
                    0 => BigRational::one(),
                    _ => {
                        let v = int(2) * pow2(-2 * k);
                        if k.is_odd() {
                            v
                        } else {
                            -v
                        }
                    }
                })
                .collect();
            (a.clone(), a)
        }
        SchemeKind::Ms => {
            // c: (1 + t/2) / (1 - t/2); a = (1 - t)² c
            let c: Vec<BigRational> = (0..len as i64)
                .map(|k| if k == 0 { BigRational::one() } else { pow2(1 - k) })
                .collect();
            let a = (0..len as i64)
                .map(|k| match k {
                    0 => BigRational::one(),
                    1 => int(-1),
                    2 => BigRational::new(BigInt::from(-1), BigInt::from(2)),
                    _ => pow2(1 - k),
                })
                .collect();
            (a, c)
        }
        SchemeKind::Em => {
            // (1 - t³) / (1 + t³), (1 + t)/(1 - t) and (1 - t)/(1 + t)
            let cubic: Vec<BigRational> = (0..len)
                .map(|k| match k {
                    0 => BigRational::one(),
                    _ if k % 3 == 0 => int(if (k / 3).is_odd() { -2 } else { 2 }),
                    _ => BigRational::zero(),
                })
                .collect();
            let up: Vec<BigRational> = (0..len)
                .map(|k| if k == 0 { BigRational::one() } else { int(2) })
                .collect();
            let down: Vec<BigRational> = (0..len)
                .map(|k| match k {
                    0 => BigRational::one(),
                    _ => int(if k % 2 == 1 { -2 } else { 2 }),
                })
                .collect();
            (convolve(&down, &cubic), convolve(&up, &cubic))
        }
    }
}

/// Exact `b_k` and `d_k` for the square-inclusion cell.
pub fn analytic_obnosov_exact(
    kind: SchemeKind,
    order: usize,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let (a, c) = obnosov_squares(kind, order);
    let b = sqrt_series_exact(&a)?;
    let d = match kind {
        SchemeKind::B => b.clone(),
        _ => sqrt_series_exact(&c)?,
    };
    Ok((b, d))
}

/// Exact `d_k` alone; half the work of [`analytic_obnosov_exact`].
pub fn analytic_obnosov_exact_d(kind: SchemeKind, order: usize) -> Result<Vec<BigRational>> {
    let (a, c) = obnosov_squares(kind, order);
    match kind {
        SchemeKind::B => sqrt_series_exact(&a),
        _ => sqrt_series_exact(&c),
    }
}

/// `d_k` alone in double precision.
pub fn analytic_obnosov_d(kind: SchemeKind, order: usize) -> Result<Vec<f64>> {
    let (a, c) = obnosov_squares_f64(kind, order);
    match kind {
        SchemeKind::B => sqrt_series(&a),
        _ => sqrt_series(&c),
    }
}

fn to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Exact coefficients rounded to double precision.
pub fn analytic_obnosov(kind: SchemeKind, order: usize) -> Result<SeriesCoefficients> {
    let (b, d) = analytic_obnosov_exact(kind, order)?;
    Ok(SeriesCoefficients {
        kind,
        source: Source::Analytic,
        b: to_f64(&b),
        d: to_f64(&d),
        grid_n: 0,
        variant: None,
    })
}

/// Same coefficients as [`analytic_obnosov`] computed in double precision
/// throughout; cheap at high orders.
pub fn analytic_obnosov_f64(kind: SchemeKind, order: usize) -> Result<SeriesCoefficients> {
    let (a, c) = obnosov_squares_f64(kind, order);
    let b = sqrt_series(&a)?;
    let d = match kind {
        SchemeKind::B => b.clone(),
        _ => sqrt_series(&c)?,
    };
    Ok(SeriesCoefficients {
        kind,
        source: Source::Analytic,
        b,
        d,
        grid_n: 0,
        variant: None,
    })
}

fn obnosov_squares_f64(kind: SchemeKind, order: usize) -> (Vec<f64>, Vec<f64>) {
    let len = order + 1;
    let geo = |r: f64, lead: f64| -> Vec<f64> {
        let mut v = Vec::with_capacity(len);
        let mut p = 1.0;
        for k in 0..len {
            if k == 0 {
                v.push(1.0);
            } else {
                v.push(lead * p);
                p *= r;
            }
        }
        v
    };
    let conv = |x: &[f64], y: &[f64]| -> Vec<f64> {
        (0..len).map(|k| (0..=k).map(|i| x[i] * y[k - i]).sum()).collect()
    };
    match kind {
        SchemeKind::B => {
            let a = geo(-0.25, 0.5);
            (a.clone(), a)
        }
        SchemeKind::Ms => {
            let c = geo(0.5, 1.0);
            let sq = [1.0, -2.0, 1.0];
            let a = (0..len)
                .map(|k| (0..=k.min(2)).map(|i| sq[i] * c[k - i]).sum())
                .collect();
            (a, c)
        }
        SchemeKind::Em => {
            let cubic: Vec<f64> = (0..len)
                .map(|k| match k {
                    0 => 1.0,
                    _ if k % 3 == 0 => {
                        if (k / 3) % 2 == 1 {
                            -2.0
                        } else {
                            2.0
                        }
                    }
                    _ => 0.0,
                })
                .collect();
            (conv(&geo(-1.0, -2.0), &cubic), conv(&geo(1.0, 2.0), &cubic))
        }
    }
}

/// `√((1 + 3z) / (3 + z))`, real for `z` outside `[-3, -1/3]`.
pub fn obnosov_exact(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be finite, got {z}")));
    }
    if (-3.0..=-1.0 / 3.0).contains(&z) {
        return Err(Error::BranchCut(z));
    }
    Ok(((1.0 + 3.0 * z) / (3.0 + z)).sqrt())
}

/// Partial sum `Σ_{k≤n} d_k t^k` and its distance to [`obnosov_exact`].
pub fn partial_sum_error(coeffs: &SeriesCoefficients, z: f64, n: usize) -> Result<(f64, f64)> {
    if n > coeffs.order() {
        return Err(Error::InvalidArgument(format!(
            "partial sum of order {n} needs at least {n} coefficients, have {}",
            coeffs.order()
        )));
    }
    let exact = obnosov_exact(z)?;
    let t = SchemeParams::new(coeffs.kind, z)?.t;
    let mut sum = 0.0;
    let mut p = 1.0;
    for dk in &coeffs.d[..=n] {
        sum += dk * p;
        p *= t;
    }
    Ok((sum, (sum - exact).abs()))
}

/// Errors of every partial sum of the `d` series of `kind` at contrast `z`.
pub fn partial_sum_errors(kind: SchemeKind, d: &[f64], z: f64) -> Result<Vec<f64>> {
    let exact = obnosov_exact(z)?;
    let t = SchemeParams::new(kind, z)?.t;
    let mut sum = 0.0;
    let mut p = 1.0;
    Ok(d.iter()
        .map(|dk| {
            sum += dk * p;
            p *= t;
            (sum - exact).abs()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microstructure::MicroKind;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Taylor coefficients of `f` at 0 up to order 2 by central differences.
    fn taylor2(f: impl Fn(f64) -> f64) -> [f64; 3] {
        let h = 1e-3;
        let (fm, f0, fp) = (f(-h), f(0.0), f(h));
        [f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (2.0 * h * h)]
    }

    #[test]
    fn sqrt_series_trivial_inputs() {
        assert_eq!(sqrt_series(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(sqrt_series(&[1.0, 2.0, 1.0, 0.0]).unwrap(), vec![1.0, 1.0, 0.0, 0.0]);
        assert!(sqrt_series(&[0.0, 1.0]).is_err());
        assert!(sqrt_series(&[]).is_err());
        let b = sqrt_series(&[4.0, 4.0, 1.0]).unwrap();
        assert_eq!(b, vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn sqrt_series_exact_matches_float() {
        let a = [q(9, 4), q(1, 3), q(-2, 7), q(5, 1)];
        let exact = sqrt_series_exact(&a).unwrap();
        assert_eq!(exact[0], q(3, 2));
        assert_eq!(exact[1], q(1, 9));
        let f = sqrt_series(&to_f64(&a)).unwrap();
        for (x, y) in to_f64(&exact).iter().zip(&f) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(sqrt_series_exact(&[q(2, 1)]).is_err());
        assert!(sqrt_series_exact(&[q(-1, 1)]).is_err());
    }

    #[test]
    fn brown_low_orders() {
        let (b, d) = analytic_obnosov_exact(SchemeKind::B, 2).unwrap();
        assert_eq!(b, vec![q(1, 1), q(1, 4), q(-3, 32)]);
        assert_eq!(b, d);
        let t = taylor2(|t| ((1.0 + 0.75 * t) / (1.0 + 0.25 * t)).sqrt());
        let s = analytic_obnosov(SchemeKind::B, 2).unwrap();
        for k in 0..3 {
            assert!((s.d[k] - t[k]).abs() < 1e-6, "k = {k}");
        }
    }

    #[test]
    fn eyre_milton_low_orders() {
        let (_, d) = analytic_obnosov_exact(SchemeKind::Em, 2).unwrap();
        assert_eq!(d, vec![q(1, 1), q(1, 1), q(1, 2)]);
        let t = taylor2(|t| ((1.0 + t + t * t) / (1.0 - t + t * t)).sqrt());
        for (k, dk) in to_f64(&d).iter().enumerate() {
            assert!((dk - t[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn moulinec_suquet_low_orders() {
        let s = analytic_obnosov(SchemeKind::Ms, 4).unwrap();
        assert_eq!(s.d, vec![1.0, 0.5, 0.125, 0.0625, 0.0234375]);
    }

    #[test]
    fn b_series_relates_to_d_series() {
        for kind in [SchemeKind::Ms, SchemeKind::Em] {
            let s = analytic_obnosov(kind, 12).unwrap();
            for k in 1..=12 {
                let rebuilt = match kind {
                    SchemeKind::Ms => s.d[k - 1] + s.b[k],
                    _ => s.d[k - 1] + s.b[k] + s.b[k - 1],
                };
                assert!((rebuilt - s.d[k]).abs() < 1e-14, "{kind} k = {k}");
            }
        }
    }

    #[test]
    fn float_and_exact_analytic_agree() {
        for kind in SchemeKind::ALL {
            let a = analytic_obnosov(kind, 40).unwrap();
            let b = analytic_obnosov_f64(kind, 40).unwrap();
            for (x, y) in a.d.iter().zip(&b.d) {
                assert!((x - y).abs() <= 1e-13 * x.abs() || (x - y).abs() < 1e-18, "{kind} {x} {y}");
            }
        }
    }

    #[test]
    fn exact_values() {
        assert_eq!(obnosov_exact(1.0).unwrap(), 1.0);
        assert!((obnosov_exact(0.0).unwrap() - 0.5773502691896257).abs() < 1e-15);
        assert!((obnosov_exact(0.1).unwrap() - 0.6475761258027333).abs() < 1e-15);
        assert!(matches!(obnosov_exact(-1.0), Err(Error::BranchCut(_))));
        assert!(obnosov_exact(-3.0).is_err());
        assert!(obnosov_exact(-0.3).is_ok());
        for z in [0.1, 0.5, 2.0, 10.0] {
            let p = obnosov_exact(z).unwrap() * obnosov_exact(1.0 / z).unwrap();
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_sums() {
        let s = analytic_obnosov(SchemeKind::Ms, 10).unwrap();
        assert_eq!(partial_sum_error(&s, 1.0, 7).unwrap(), (1.0, 0.0));
        assert!(partial_sum_error(&s, 0.5, 11).is_err());
        let errs = partial_sum_errors(s.kind, &s.d, 0.5).unwrap();
        assert!((errs[10] - partial_sum_error(&s, 0.5, 10).unwrap().1).abs() < 1e-16);
        assert!(errs[10] < errs[2]);
    }

    #[test]
    fn numerical_first_orders_are_exact() {
        let m = Microstructure::generate(MicroKind::Obnosov, 32).unwrap();
        let s = numerical_coefficients(SchemeKind::Ms, &m, GreenVariant::Continuous, 4).unwrap();
        assert_eq!(s.grid_n, 32);
        for (x, y) in s.d.iter().zip([1.0, 0.5, 0.125, 0.0625, 0.0234375]) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        let e = numerical_coefficients(SchemeKind::Em, &m, GreenVariant::Continuous, 2).unwrap();
        assert!((e.d[1] - 1.0).abs() < 1e-12 && (e.d[2] - 0.5).abs() < 1e-12);
        let b = numerical_coefficients(SchemeKind::B, &m, GreenVariant::Continuous, 2).unwrap();
        assert!((b.d[1] - 0.25).abs() < 1e-12 && (b.d[2] + 3.0 / 32.0).abs() < 1e-12);
        assert!(numerical_coefficients(SchemeKind::B, &m, GreenVariant::Continuous, 0).is_err());
    }

    #[test]
    fn ms_first_coefficient_is_twice_the_fraction() {
        let m = Microstructure::generate(MicroKind::FourDisks, 16).unwrap();
        let s = numerical_coefficients(SchemeKind::Ms, &m, GreenVariant::Willot, 1).unwrap();
        assert!((s.d[1] - 2.0 * m.volume_fraction()).abs() < 1e-14);
    }
}
