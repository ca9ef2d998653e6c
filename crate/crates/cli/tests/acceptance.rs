//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, followed by
//! the measured quantity. Run with
//!
//! ```text
//! cargo test -p translab-cli --test acceptance -- --nocapture
//! ```

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;

use nalgebra::{Complex, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use translab::analysis::{default_window, fit_decay};
use translab::dynamics::{default_dt, energy, simulate, TrapezoidalStepper};
use translab::fem::{clamped_free_beam_pencil, string_pencil};
use translab::spectral::{
    aligned_bounds, eigenvalues, grid, neweq_determinant, slowest_mode, ResolventOperator,
};
use translab::{DampingCase, Discretization, StateVector, StructureConfig, SystemPencil};

type Outcome = Result<String, String>;

fn discretize(rho1: f64, rho2: f64, beta: f64, n: usize) -> Discretization {
    Discretization::new(StructureConfig::unit(rho1, rho2, beta), n, n, n).unwrap()
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    StateVector {
        p: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
        q: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
    }
}

fn quad(a: &nalgebra::DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(a * x))
}

fn criterion_1() -> Outcome {
    let regimes = [
        ((1.0, 1.0, 1.0), DampingCase::Ddd),
        ((0.0, 0.0, 0.5), DampingCase::Udu),
        ((0.0, 0.0, 0.0), DampingCase::Conservative),
        ((1.0, 0.0, 0.0), DampingCase::Other),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for ((r1, r2, b), regime) in regimes {
        let d = discretize(r1, r2, b, 20);
        let p = &d.pencil;
        assert_eq!(p.regime, regime);
        let (n, dim) = (p.n(), p.dim());
        for _ in 0..100 {
            let re = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
            let im = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
            // yᴴKy for y = re + i·im and real K
            let (kr, ki) = (&p.k * &re, &p.k * &im);
            let form = Complex::new(re.dot(&kr) + im.dot(&ki), re.dot(&ki) - im.dot(&kr));
            let qdq = quad(&p.d, &re.rows(n, n).into_owned())
                + quad(&p.d, &im.rows(n, n).into_owned());
            let lhs = (form.re + qdq).abs();
            let rhs = form.norm() + qdq + 1.0;
            worst = worst.max(lhs / rhs);
        }
    }
    let msg = format!("max |Re(yᴴKy)+qᴴDq| / (|yᴴKy|+qᴴDq+1) = {worst:.3e} (limit 1e-12)");
    if worst <= 1e-12 { Ok(msg) } else { Err(msg) }
}

fn criterion_2() -> Outcome {
    let d = discretize(1.0, 1.0, 1.0, 20);
    let p = &d.pencil;
    let dt = default_dt(&d.cfg);
    let stepper = TrapezoidalStepper::new(p, dt).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut y = random_state(p.n(), &mut rng);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let next = stepper.step(&y).unwrap();
        let (e0, e1) = (energy(p, &y).unwrap(), energy(p, &next).unwrap());
        let qbar = (&y.q + &next.q) * 0.5;
        let residual = (e1 - e0 + dt * quad(&p.d, &qbar)).abs() / e0.max(e1);
        worst = worst.max(residual);
        y = next;
    }
    let msg = format!("max relative per-step balance residual over 500 steps = {worst:.3e} (limit 1e-9)");
    if worst <= 1e-9 { Ok(msg) } else { Err(msg) }
}

fn criterion_3() -> Outcome {
    let d = discretize(0.0, 0.0, 0.0, 20);
    let p = &d.pencil;
    let stepper = TrapezoidalStepper::new(p, default_dt(&d.cfg)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut y = random_state(p.n(), &mut rng);
    let e0 = energy(p, &y).unwrap();
    for _ in 0..1000 {
        y = stepper.step(&y).unwrap();
    }
    let drift = (energy(p, &y).unwrap() / e0 - 1.0).abs();
    let msg = format!("|E_end/E_0 - 1| after 1000 steps = {drift:.3e} (limit 1e-9)");
    if drift <= 1e-9 { Ok(msg) } else { Err(msg) }
}

fn criterion_4() -> Outcome {
    let pencil = string_pencil(PI, 200, 1.0).unwrap();
    let spectrum = eigenvalues(&pencil).unwrap();
    // μ² + μ + 1 = 0 for the first mode of the unit-speed string on (0, π)
    let half = 3f64.sqrt() / 2.0;
    let mut worst = 0.0f64;
    for oracle in [Complex::new(-0.5, half), Complex::new(-0.5, -half)] {
        let found = spectrum.nearest(oracle).unwrap();
        worst = worst.max((found - oracle).norm());
    }
    let msg = format!("max |μ_h - μ| for -0.5±0.866i = {worst:.3e} (limit 1e-2)");
    if worst <= 1e-2 { Ok(msg) } else { Err(msg) }
}

fn criterion_5() -> Outcome {
    let pencil = clamped_free_beam_pencil(1.0, 100, 0.0).unwrap();
    let lowest = eigenvalues(&pencil)
        .unwrap()
        .eigenvalues
        .iter()
        .filter(|m| m.im > 0.0)
        .map(|m| m.im)
        .fold(f64::INFINITY, f64::min);
    // bisection on 1 + cos κ cosh κ in [1.5, 2]
    let f = |k: f64| 1.0 + k.cos() * k.cosh();
    let (mut lo, mut hi) = (1.5f64, 2.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f(lo) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let rel = (lowest / (kappa * kappa) - 1.0).abs();
    let msg = format!(
        "ω_1 = {lowest:.10}, κ1² = {:.10}, relative error {rel:.3e} (limit 1e-3)",
        kappa * kappa
    );
    if rel <= 1e-3 { Ok(msg) } else { Err(msg) }
}

fn criterion_6() -> Outcome {
    let d = discretize(1.0, 1.0, 1.0, 20);
    let p = &d.pencil;
    let abscissa = eigenvalues(p).unwrap().abscissa;
    if abscissa.is_nan() || abscissa >= 0.0 {
        return Err(format!("abscissa {abscissa:e} is not negative"));
    }
    let mode = slowest_mode(p).unwrap();
    let t_final = 5.0 / abscissa.abs();
    let sim = simulate(p, &mode.real, default_dt(&d.cfg), t_final, 0).unwrap();
    let fit = fit_decay(&sim.trace, default_window(t_final)).unwrap();
    let ratio = fit.alpha / (2.0 * abscissa.abs());
    let msg = format!(
        "abscissa = {abscissa:.6}, α_fit = {:.6}, ratio = {ratio:.4} (band [0.9, 1.1])",
        fit.alpha
    );
    if (0.9..=1.1).contains(&ratio) { Ok(msg) } else { Err(msg) }
}

fn resolvent_sup(pencil: &SystemPencil, lambdas: &[f64]) -> f64 {
    ResolventOperator::new(pencil).unwrap().sweep(lambdas).sup_norm
}

fn criterion_7() -> Outcome {
    let coarse = discretize(0.0, 0.0, 0.5, 20);
    let spectrum = eigenvalues(&coarse.pencil).unwrap();
    let max_re = spectrum.abscissa;
    let gap = spectrum.min_distance_to_imaginary_axis;
    let lambdas = grid(-50.0, 50.0, 2001).unwrap();
    let sup_h = resolvent_sup(&coarse.pencil, &lambdas);
    let sup_h2 = resolvent_sup(&discretize(0.0, 0.0, 0.5, 40).pencil, &lambdas);
    let factor = (sup_h2 / sup_h).max(sup_h / sup_h2);
    let msg = format!(
        "max Re μ = {max_re:.3e}, min |Re μ| = {gap:.3e}, sup_n={{20}} = {sup_h:.6}, \
         sup_n={{40}} = {sup_h2:.6}, change factor {factor:.4} (limit 2)"
    );
    let ok = max_re < 0.0 && gap > 0.0 && sup_h.is_finite() && sup_h2.is_finite() && factor <= 2.0;
    if ok { Ok(msg) } else { Err(msg) }
}

fn criterion_8() -> Outcome {
    let d = discretize(0.0, 0.0, 0.0, 20);
    let spectrum = eigenvalues(&d.pencil).unwrap();
    let anchor = spectrum
        .frequencies()
        .into_iter()
        .find(|w| *w <= 50.0)
        .ok_or("no eigenfrequency in [0, 50]")?;
    let (lo, hi) = aligned_bounds(-50.0, 50.0, 2001, anchor);
    let lambdas = grid(lo, hi, 2001).unwrap();
    let hit = lambdas
        .iter()
        .map(|l| (l - anchor).abs())
        .fold(f64::INFINITY, f64::min);
    let sup = resolvent_sup(&d.pencil, &lambdas);
    let msg = format!(
        "eigenfrequency {anchor:.10}, nearest grid point at distance {hit:.1e}, sup = {sup:.3e} (limit ≥ 1e5)"
    );
    if hit <= 1e-6 && sup >= 1e5 { Ok(msg) } else { Err(msg) }
}

fn criterion_9() -> Outcome {
    let (a0, a1, count) = (1e-6f64, 400.0f64, 10_000);
    let ratio = (a1 / a0).ln();
    let mut min = f64::INFINITY;
    let mut arg = 0.0;
    for k in 0..count {
        // log-grid ending exactly at 400 and excluding 1e-6 itself
        let a = a0 * (ratio * (k + 1) as f64 / count as f64).exp();
        let value = neweq_determinant(a).unwrap();
        let independent = a.sqrt().cosh() + a.sqrt().cos();
        assert!((value - independent).abs() <= 1e-12 * independent);
        if value < min {
            min = value;
            arg = a;
        }
    }
    let msg = format!("min cosh√a + cos√a = {min:.12} at a = {arg:.3e} over 10⁴ log-spaced points (limit > 1)");
    if min > 1.0 { Ok(msg) } else { Err(msg) }
}

fn criterion_10() -> Outcome {
    let base = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = base.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_translab"))
            .args(["verify", "--out-dir"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if status.status.code().is_none() {
            return Err("verify was terminated by a signal".into());
        }
        reports.push(std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?);
    }
    let msg = format!("two verify runs, report.json of {} bytes each", reports[0].len());
    if reports[0] == reports[1] {
        Ok(format!("{msg}: byte-identical"))
    } else {
        Err(format!("{msg}: contents differ"))
    }
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("dissipativity identity", criterion_1),
        ("energy-exact stepping", criterion_2),
        ("conservation", criterion_3),
        ("damped string modes", criterion_4),
        ("clamped-free beam", criterion_5),
        ("DDD exponential decay", criterion_6),
        ("UDU resolvent bound", criterion_7),
        ("conservative resolvent blow-up", criterion_8),
        ("interface determinant", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
