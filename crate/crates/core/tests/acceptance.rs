//! Acceptance suite. Runs every criterion in sequence so timings are not
//! disturbed by concurrent tests, prints one PASS/FAIL line per criterion and
//! then asserts.
//!
//! Two literal clauses cannot be met and are reported as FAIL without
//! failing the run; every other clause of those criteria is still asserted:
//! - 1: the reference column is printed with 9 significant digits, so the
//!   printed values themselves sit up to 4e-9 away from the exact ones.
//! - 5: the quoted `z0(3) = 0.23932` is ten times the value of its own
//!   defining formula, `0.0239323`, which is also where `r_B = r_EM`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::{Duration, Instant};

use neumann_fft::diagnostics::knee_detect;
use neumann_fft::field::{Grid2D, VectorField2D};
use neumann_fft::greens::{GreenOperator, GreenVariant};
use neumann_fft::microstructure::{MicroKind, Microstructure};
use neumann_fft::ratemap::{rates, regime_thresholds};
use neumann_fft::schemes::{
    solve, Criterion, EmForm, SchemeKind, SchemeOperator, SchemeParams, SolveOptions,
    SolveStatus, E1,
};
use neumann_fft::series::{
    analytic_obnosov_d, analytic_obnosov_exact_d, numerical_coefficients, obnosov_exact,
    partial_sum_errors,
};
use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact coefficients for the square-inclusion cell, MS scheme, as printed.
const TABLE_EXACT: [&str; 26] = [
    "1.000000000", "0.500000000", "0.125000000", "0.625000000E-01", "0.234375000E-01",
    "0.117187500E-01", "0.488281250E-02", "0.244140625E-02", "0.106811523E-02",
    "0.534057617E-03", "0.240325928E-03", "0.120162964E-03", "0.550746918E-04",
    "0.275373459E-04", "0.127851963E-04", "0.639259815E-05", "0.299653038E-05",
    "0.149826519E-05", "0.707514118E-06", "0.353757059E-06", "0.168034603E-06",
    "0.840173016E-07", "0.400991667E-07", "0.200495833E-07", "0.960709201E-08",
    "0.480354601E-08",
];

/// Coefficients extracted at 128x128, same scheme, as printed.
const TABLE_NUMERICAL: [f64; 26] = [
    1.000000000, 0.500000000, 0.125000000, 0.625000000E-01, 0.234375000E-01,
    0.117141463E-01, 0.488051063E-02, 0.243735662E-02, 0.106609042E-02, 0.535119341E-03,
    0.240856801E-03, 0.125219714E-03, 0.576030820E-04, 0.342665252E-04, 0.161497831E-04,
    0.133939187E-04, 0.649716274E-05, 0.822353999E-05, 0.407011143E-05, 0.666877547E-05,
    0.332550840E-05, 0.600176714E-05, 0.299895396E-05, 0.559017674E-05, 0.279466942E-05,
    0.527750045E-05,
];

struct Outcome {
    id: u32,
    title: &'static str,
    /// Clauses that must hold.
    required: Vec<(String, bool)>,
    /// Literal clauses known to be unattainable; reported, not asserted.
    documented: Vec<(String, bool)>,
    elapsed: Duration,
    budget: Duration,
}

impl Outcome {
    fn new(id: u32, title: &'static str, budget_ms: u64) -> Self {
        Self {
            id,
            title,
            required: Vec::new(),
            documented: Vec::new(),
            elapsed: Duration::ZERO,
            budget: Duration::from_millis(budget_ms),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.required.push((what.into(), ok));
    }

    fn literal(&mut self, what: impl Into<String>, ok: bool) {
        self.documented.push((what.into(), ok));
    }

    fn required_ok(&self) -> bool {
        self.required.iter().all(|(_, ok)| *ok) && self.elapsed < self.budget
    }

    fn passed(&self) -> bool {
        self.required_ok() && self.documented.iter().all(|(_, ok)| *ok)
    }

    fn report(&self, out: &mut String) {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "criterion {:>2} {verdict}  {} ({:.3?} of {:?})",
            self.id, self.title, self.elapsed, self.budget
        );
        for (what, ok) in &self.required {
            let _ = writeln!(out, "    [{}] {what}", if *ok { "ok" } else { "FAILED" });
        }
        for (what, ok) in &self.documented {
            let tag = if *ok { "ok" } else { "FAILED, documented" };
            let _ = writeln!(out, "    [{tag}] {what}");
        }
        if self.elapsed >= self.budget {
            let _ = writeln!(out, "    [FAILED] runtime over budget");
        }
    }
}

/// Fastest of three runs of `f`, and its last result.
fn best_of_3<T>(mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..3 {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed());
        out = Some(v);
    }
    (out.expect("ran"), best)
}

/// `x` with 9 significant digits in the `0.ddddddddd E-xx` style of the table.
fn table_style(x: f64) -> String {
    if x >= 0.1 {
        return format!("{x:.9}");
    }
    let e = x.log10().floor() as i32 + 1;
    let m = x / 10f64.powi(e);
    let s = format!("{m:.9}");
    // rounding up to 1.000000000 moves the exponent
    let (s, e) = if s.starts_with('1') {
        (format!("{:.9}", m / 10.0), e + 1)
    } else {
        (s, e)
    };
    format!("{s}E-{:02}", -e)
}

fn obnosov(n: usize) -> Microstructure {
    Microstructure::generate(MicroKind::Obnosov, n).unwrap()
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new(1, "exact MS coefficients, 26 orders", 1);
    let (d, t) = best_of_3(|| analytic_obnosov_exact_d(SchemeKind::Ms, 25).unwrap());
    o.elapsed = t;
    let d: Vec<f64> = d.iter().map(|q| q.to_f64().unwrap()).collect();
    let digits = (0..26).filter(|&k| table_style(d[k]) == TABLE_EXACT[k]).count();
    o.check(format!("{digits}/26 printed entries reproduced digit for digit"), digits == 26);
    let rel: Vec<f64> = (0..26)
        .map(|k| {
            let printed: f64 = TABLE_EXACT[k].parse().unwrap();
            (d[k] - printed).abs() / printed
        })
        .collect();
    let worst = rel.iter().cloned().fold(0.0, f64::max);
    let over = rel.iter().filter(|&&r| r > 1e-9).count();
    o.literal(
        format!("within 1e-9 relative of the printed values: {over} entries over, worst {worst:.2e} (9 printed digits)"),
        over == 0,
    );
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new(2, "numerical MS coefficients at 128x128", 5000);
    let m = obnosov(128);
    let t = Instant::now();
    let s = numerical_coefficients(SchemeKind::Ms, &m, GreenVariant::Continuous, 25).unwrap();
    o.elapsed = t.elapsed();
    let exact = analytic_obnosov_d(SchemeKind::Ms, 25).unwrap();
    let low = (0..=4).all(|k| (s.d[k] - exact[k]).abs() <= 1e-12 * exact[k]);
    o.check("orders 0..=4 exact to 1e-12 relative", low);
    let worst = (0..=10)
        .map(|k| (s.d[k] - TABLE_NUMERICAL[k]).abs() / TABLE_NUMERICAL[k])
        .fold(0.0, f64::max);
    o.check(format!("orders <= 10 within 0.5% of the reference: worst {worst:.2e}"), worst <= 5e-3);
    let dev = (s.d[25] - exact[25]).abs() / exact[25];
    o.check(format!("relative deviation at order 25 is {dev:.4e} (>= 10)"), dev >= 10.0);
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new(3, "MS solve at z = 0.1 under refinement", 60_000);
    let exact = obnosov_exact(0.1).unwrap();
    let opts = SolveOptions {
        criterion: Criterion::Diff,
        tol: 1e-8,
        ..SolveOptions::default()
    };
    let t = Instant::now();
    let errs: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| {
            let r = solve(SchemeKind::Ms, &obnosov(n), 0.1, &opts).unwrap();
            assert_eq!(r.status, SolveStatus::Converged);
            (r.z_eff().unwrap() - exact).abs()
        })
        .collect();
    o.elapsed = t.elapsed();
    o.check(
        format!("errors {:.3e} >= {:.3e} >= {:.3e}", errs[0], errs[1], errs[2]),
        errs[0] >= errs[1] && errs[1] >= errs[2],
    );
    o.check("512x512 error below the 128x128 error", errs[2] < errs[0]);
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new(4, "analytic series at z = -0.3 (B) and z = -10 (MS)", 1);
    let ((eb, em), t) = best_of_3(|| {
        let b = analytic_obnosov_d(SchemeKind::B, 500).unwrap();
        let m = analytic_obnosov_d(SchemeKind::Ms, 500).unwrap();
        (
            partial_sum_errors(SchemeKind::B, &b, -0.3).unwrap(),
            partial_sum_errors(SchemeKind::Ms, &m, -10.0).unwrap(),
        )
    });
    o.elapsed = t;
    for (name, e) in [("B, z = -0.3", &eb), ("MS, z = -10", &em)] {
        let ups = e.windows(2).filter(|w| w[1] > w[0]).count();
        o.check(format!("{name}: error nonincreasing over n = 0..500 ({ups} increases)"), ups == 0);
        o.check(format!("{name}: error at n = 500 is {:.3e} (< 1e-3)", e[500]), e[500] < 1e-3);
    }
    o.check(
        format!("B, z = -0.3: error still decreasing at n = 200 ({:.3e} -> {:.3e} at 500)", eb[200], eb[500]),
        eb[500] < eb[200],
    );
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new(5, "rate-map identities", 1000);
    let t = Instant::now();
    let th3 = regime_thresholds(3.0).unwrap();
    o.literal(
        format!("z0(3) = {:.7} within 5e-5 of the quoted 0.23932", th3.z0),
        (th3.z0 - 0.23932).abs() <= 5e-5,
    );
    let r = rates(3.0, th3.z0).unwrap();
    o.check(
        format!("r_B = r_EM at z0(3) = {:.7}", th3.z0),
        (r.r_b - r.r_em.unwrap()).abs() <= 1e-10 * r.r_b,
    );
    o.check("z1(3) = z2(3) = 1", th3.window == Some((1.0, 1.0)));

    let (mut cells, mut skipped, mut bad) = (0, 0, 0);
    for i in 0..200 {
        let beta = 1.01 + (100.0 - 1.01) * i as f64 / 199.0;
        let lo = -1.0 / beta;
        for j in 1..=200 {
            let z = lo + (100.0 - lo) * j as f64 / 200.0;
            let r = rates(beta, z).unwrap();
            if r.r_b.is_infinite() && r.r_ms.is_infinite() {
                skipped += 1;
                continue;
            }
            cells += 1;
            if !(r.r_ms / r.r_b > 1.0) {
                bad += 1;
            }
        }
    }
    o.check(
        format!("r_MS / r_B > 1 on {cells} cells ({skipped} cells at z = 1 skipped, {bad} violations)"),
        bad == 0 && cells + skipped == 40_000,
    );
    let worst = [4.0, 5.0, 10.0, 100.0]
        .iter()
        .map(|&b| {
            let (z1, z2) = regime_thresholds(b).unwrap().window.unwrap();
            (z1 * z2 - 1.0).abs()
        })
        .fold(0.0, f64::max);
    o.check(format!("z1 z2 = 1 for beta in {{4, 5, 10, 100}}: worst {worst:.1e}"), worst <= 1e-12);
    o.elapsed = t.elapsed();
    o
}

fn random_field(grid: Grid2D, rng: &mut ChaCha8Rng) -> VectorField2D {
    let c1: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c2: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    VectorField2D::from_real(grid, &c1, &c2).unwrap()
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new(6, "projector properties on 100 random 32x32 fields", 5000);
    let grid = Grid2D::square(32).unwrap();
    let t = Instant::now();
    for v in GreenVariant::ALL {
        let op = GreenOperator::new(grid, v);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst = [0.0f64; 5];
        for _ in 0..100 {
            let f = random_field(grid, &mut rng);
            let g = random_field(grid, &mut rng);
            let (nf, ng) = (f.l2_norm(), g.l2_norm());
            let pf = op.apply_gamma1(&f).unwrap();
            let pg = op.apply_gamma1(&g).unwrap();
            let ppf = op.apply_gamma1(&pf).unwrap();
            let mean = pf.mean_complex();
            worst[0] = worst[0].max((&ppf - &pf).l2_norm() / nf);
            worst[1] = worst[1].max(mean[0].norm().max(mean[1].norm()));
            worst[2] = worst[2].max(pf.l2_norm() / nf - 1.0);
            worst[3] = worst[3].max((f.inner(&pg) - pf.inner(&g)).norm() / (nf * ng));
            worst[4] = worst[4].max(-f.inner(&pf).re / (nf * nf));
        }
        let names = ["idempotence", "zero mean", "contraction excess", "self-adjointness", "negativity"];
        let line = names
            .iter()
            .zip(worst)
            .map(|(n, w)| format!("{n} {w:.1e}"))
            .collect::<Vec<_>>()
            .join(", ");
        o.check(format!("{}: {line}", v.name()), worst.iter().all(|&w| w <= 1e-10));
    }
    o.elapsed = t.elapsed();
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new(7, "scheme equivalences", 5000);
    let t = Instant::now();

    let m = obnosov(64);
    let p = SchemeParams::new(SchemeKind::Em, 4.0).unwrap();
    let op = SchemeOperator::new(p, &m, GreenVariant::Continuous, E1).unwrap();
    let mut classic = op.initial_state(EmForm::Classic);
    let mut polar = op.initial_state(EmForm::Polarization);
    let mut worst = (&classic.eps - &polar.eps).l2_norm();
    for _ in 0..20 {
        op.step_em(&mut classic).unwrap();
        op.step_em_polarization(&mut polar).unwrap();
        worst = worst.max((&classic.eps - &polar.eps).l2_norm() / classic.eps.l2_norm());
    }
    o.check(format!("EM classic vs polarization, 20 iterations: {worst:.1e}"), worst <= 1e-10);

    let m = obnosov(32);
    for kind in [SchemeKind::B, SchemeKind::Ms] {
        for v in GreenVariant::ALL {
            let p = SchemeParams::new(kind, 0.3).unwrap();
            let op = SchemeOperator::new(p, &m, v, E1).unwrap();
            let green = GreenOperator::new(*m.grid(), v);
            let (z1, z2) = p.zeta();
            let zeta = m.phase_field(z1, z2);
            let mut state = op.initial_state(EmForm::Classic);
            let mut term = VectorField2D::constant(*m.grid(), E1);
            let mut sum = term.clone();
            let mut worst = 0.0f64;
            for _ in 1..=8 {
                term = green.apply_gamma1(&term.scale_pointwise(&zeta)).unwrap().scale(-1.0);
                sum = &sum + &term;
                op.step_basic(&mut state).unwrap();
                worst = worst.max((&state.eps - &sum).l2_norm());
            }
            o.check(
                format!("{kind} / {}: iterate vs truncated series, k <= 8: {worst:.1e}", v.name()),
                worst <= 1e-10,
            );
        }
    }
    o.elapsed = t.elapsed();
    o
}

fn iterations(kind: SchemeKind, m: &Microstructure, z: f64) -> usize {
    let opts = SolveOptions {
        criterion: Criterion::Diff,
        tol: 1e-8,
        max_iter: 5000,
        ..SolveOptions::default()
    };
    let r = solve(kind, m, z, &opts).unwrap();
    assert_eq!(r.status, SolveStatus::Converged, "{kind} at z = {z}");
    r.iterations()
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new(8, "iteration counts follow the rates", 30_000);
    let t = Instant::now();
    let m = obnosov(128);
    let (ms, b) = (iterations(SchemeKind::Ms, &m, 0.5), iterations(SchemeKind::B, &m, 0.5));
    o.check(format!("square inclusion, z = 0.5: MS {ms} < B {b}"), ms < b);
    let c = Microstructure::generate(MicroKind::Checkerboard, 128).unwrap();
    let (em, ms) = (iterations(SchemeKind::Em, &c, 100.0), iterations(SchemeKind::Ms, &c, 100.0));
    o.check(format!("checkerboard, z = 100: EM {em} < MS {ms}"), em < ms);
    o.elapsed = t.elapsed();
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new(9, "indicator ordering, MS at z = 0.1", 10_000);
    let t = Instant::now();
    let opts = SolveOptions {
        criterion: Criterion::Div,
        tol: 1e-6,
        max_iter: 5000,
        ..SolveOptions::default()
    };
    let r = solve(SchemeKind::Ms, &obnosov(128), 0.1, &opts).unwrap();
    o.elapsed = t.elapsed();
    let k = |c| r.first_below(c, 1e-6);
    match (k(Criterion::Div), k(Criterion::Diff), k(Criterion::Coef)) {
        (Some(a), Some(b), Some(c)) => {
            o.check(format!("k(delta1) = {a} >= k(delta2) = {b} >= k(coef) = {c}"), a >= b && b >= c)
        }
        other => o.check(format!("an indicator never reached 1e-6: {other:?}"), false),
    }
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new(10, "knee moves later under refinement", 30_000);
    let t = Instant::now();
    let series = |n| numerical_coefficients(SchemeKind::Ms, &obnosov(n), GreenVariant::Continuous, 40).unwrap();
    let fine = series(512);
    let k64 = knee_detect(&series(64), &fine, 0.05).unwrap().k;
    let k128 = knee_detect(&series(128), &fine, 0.05).unwrap().k;
    o.elapsed = t.elapsed();
    o.check(format!("K(128 vs 512) = {k128} >= K(64 vs 512) - 2 = {}", k64 as i64 - 2), k128 as i64 >= k64 as i64 - 2);
    o.check(format!("K(128 vs 512) = {k128} lies in 12..=20"), (12..=20).contains(&k128));
    o
}

#[test]
fn acceptance() {
    let outcomes = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let mut report = String::from("\n");
    for o in &outcomes {
        o.report(&mut report);
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    let _ = writeln!(report, "{passed}/{} criteria pass in full", outcomes.len());
    // straight to the process stdout so the report survives output capture
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(report.as_bytes());
    let _ = stdout.flush();
    let broken: Vec<u32> = outcomes.iter().filter(|o| !o.required_ok()).map(|o| o.id).collect();
    assert!(broken.is_empty(), "criteria with failing required clauses: {broken:?}");
}
