//! Post-processing: exponential fits of energy traces, the time-domain vs
//! frequency-domain cross-check, and the machine-readable verification
//! report.

use std::fmt::Write as _;

use nalgebra::{Complex, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics::{
    self, default_c4, energy, f_bound_constant, lyapunov_f, simulate, step_balance_residual,
    DynamicsError, EnergyTrace, SimOutput, TrapezoidalStepper,
};
use crate::fem::{Discretization, FemError, StateVector, SystemPencil};
use crate::model::DampingCase;
use crate::spectral::{
    self, eigenvalues, eigenvalues_unwhitened, mode_at, ResolventOperator, SpectralError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("energy must be positive inside the fit window (found {0} at t = {1})")]
    NonpositiveEnergy(f64, f64),
    #[error("fit window [{0}, {1}] holds {2} samples; at least 10 are needed")]
    WindowTooSmall(f64, f64, usize),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Least-squares fit `log E ≈ log C - α t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub alpha: f64,
    pub log_c: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// `[0.2 t_final, 0.9 t_final]`.
pub fn default_window(t_final: f64) -> (f64, f64) {
    (0.2 * t_final, 0.9 * t_final)
}

pub fn fit_decay(trace: &EnergyTrace, window: (f64, f64)) -> Result<DecayFit, AnalysisError> {
    let (t0, t1) = window;
    let points: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.energy)
        .filter(|(&t, _)| t >= t0 && t <= t1)
        .map(|(&t, &e)| (t, e))
        .collect();
    if points.len() < 10 {
        return Err(AnalysisError::WindowTooSmall(t0, t1, points.len()));
    }
    if let Some(&(t, e)) = points.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(AnalysisError::NonpositiveEnergy(e, t));
    }
    let n = points.len() as f64;
    let t_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(t, e) in &points {
        let (dx, dy) = (t - t_mean, e.ln() - y_mean);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = points
            .iter()
            .map(|&(t, e)| (e.ln() - intercept - slope * t).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        alpha: -slope,
        log_c: intercept,
        r_squared,
        window,
        samples: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this regime or size.
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }

    fn from_check(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub name: &'static str,
    pub status: Status,
    pub residual: f64,
}

/// Names of every invariant `cross_validate` checks, in report order.
pub const INVARIANTS: [&str; 17] = [
    "dissipativity_identity",
    "s_positive_definite",
    "m_positive_definite",
    "d_positive_semidefinite",
    "d_zero_iff_conservative",
    "energy_balance_per_step",
    "energy_monotone",
    "energy_drift",
    "time_reversal",
    "f_bound",
    "lyapunov_sandwich",
    "lyapunov_nonincreasing",
    "conjugate_symmetry",
    "abscissa_nonpositive",
    "imaginary_axis_free",
    "whitening_consistency",
    "resolvent_lower_bound",
];

/// Name of the decay-rate entry appended after [`INVARIANTS`].
pub const DECAY_RATE: &str = "decay_rate";

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub regime: DampingCase,
    pub counts: (usize, usize, usize),
    pub dofs: usize,
    pub dt: f64,
    pub t_final: f64,
    pub abscissa: f64,
    pub min_distance_to_imaginary_axis: f64,
    /// Slowest eigenvalue the time step resolves (see [`resolved_band`]);
    /// its real part is the decay reference.
    pub slowest_mode: Complex<f64>,
    pub resolved_band: f64,
    pub alpha_fit: f64,
    pub r_squared: f64,
    /// `alpha_fit / (2 |Re slowest_mode|)`; NaN when there is no decay to
    /// fit. Equals `alpha_fit / (2 |abscissa|)` whenever the slowest mode
    /// lies inside the resolved band.
    pub ratio: f64,
    pub c4: f64,
    pub notes: Vec<String>,
    pub invariant_results: Vec<InvariantResult>,
}

impl VerificationReport {
    /// Conjunction over all non-skipped checks.
    pub fn passed(&self) -> bool {
        self.invariant_results
            .iter()
            .all(|r| r.status != Status::Fail)
    }

    pub fn result(&self, name: &str) -> Option<&InvariantResult> {
        self.invariant_results.iter().find(|r| r.name == name)
    }

    /// Flat JSON object; floats at 17 significant digits, non-finite
    /// values as `null`.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n");
        let mut field = |key: &str, value: String| {
            let _ = writeln!(s, "  \"{key}\": {value},");
        };
        field("regime", format!("\"{}\"", self.regime.tag()));
        field("n1", self.counts.0.to_string());
        field("n2", self.counts.1.to_string());
        field("n3", self.counts.2.to_string());
        field("dofs", self.dofs.to_string());
        field("dt", json_number(self.dt));
        field("t_final", json_number(self.t_final));
        field("abscissa", json_number(self.abscissa));
        field(
            "min_distance_to_imaginary_axis",
            json_number(self.min_distance_to_imaginary_axis),
        );
        field("slowest_mode_re", json_number(self.slowest_mode.re));
        field("slowest_mode_im", json_number(self.slowest_mode.im));
        field("resolved_band", json_number(self.resolved_band));
        field("alpha_fit", json_number(self.alpha_fit));
        field("r_squared", json_number(self.r_squared));
        field("ratio", json_number(self.ratio));
        field("c4", json_number(self.c4));
        field("passed", self.passed().to_string());
        let notes: Vec<String> = self.notes.iter().map(|n| json_string(n)).collect();
        field("notes", format!("[{}]", notes.join(", ")));
        s.push_str("  \"invariant_results\": [\n");
        for (i, r) in self.invariant_results.iter().enumerate() {
            let sep = if i + 1 == self.invariant_results.len() { "" } else { "," };
            let _ = writeln!(
                s,
                "    {{\"name\": \"{}\", \"status\": \"{}\", \"residual\": {}}}{}",
                r.name,
                r.status.as_str(),
                json_number(r.residual),
                sep
            );
        }
        s.push_str("  ]\n}\n");
        s
    }
}

pub fn json_number(v: f64) -> String {
    if v == 0.0 {
        format!("{:.16e}", 0.0)
    } else if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn json_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Highest frequency `|Im μ|` whose decay the trapezoidal rule with step
/// `dt` reproduces to about 2%: `0.3 / dt`. The relative rate error of a
/// mode is roughly `(|Im μ| dt / 2)²`.
pub fn resolved_band(dt: f64) -> f64 {
    0.3 / dt
}

/// Acceptance band for `alpha_fit / (2 |abscissa|)`.
pub fn ratio_band(regime: DampingCase) -> (f64, f64) {
    match regime {
        DampingCase::Ddd => (0.9, 1.1),
        _ => (0.8, 1.2),
    }
}

/// Fit windows with `r²` below this are treated as non-exponential
/// (defective slowest mode) and only checked one-sidedly.
pub const MIN_R_SQUARED: f64 = 0.999;

/// One row of a Lyapunov audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovRow {
    pub t: f64,
    pub energy: f64,
    pub cross: f64,
    pub lyapunov: f64,
    /// `min(L - c4 E / 2, 3 c4 E / 2 - L)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovAudit {
    pub c4: f64,
    pub rows: Vec<LyapunovRow>,
    pub sandwich_holds: bool,
    pub nonincreasing: bool,
    pub min_margin: f64,
    /// Largest relative increase of `L` between consecutive rows.
    pub max_increase: f64,
}

/// Evaluates `E`, `F` and `L = c4 E + F` at every snapshot (or at the final
/// state when the run kept none).
pub fn lyapunov_audit(
    pencil: &SystemPencil,
    sim: &SimOutput,
    c4: f64,
) -> Result<LyapunovAudit, AnalysisError> {
    if !(c4 > 0.0) || !c4.is_finite() {
        return Err(DynamicsError::NonpositiveC4(c4).into());
    }
    let last = sim.trace.times.last().copied().unwrap_or(0.0);
    let fallback = [(last, sim.final_state.clone())];
    let states: &[(f64, StateVector)] = if sim.snapshots.is_empty() {
        &fallback
    } else {
        &sim.snapshots
    };
    let mut rows = Vec::with_capacity(states.len());
    for (t, y) in states {
        let e = energy(pencil, y)?;
        let f = lyapunov_f(pencil, y)?;
        let l = c4 * e + f;
        rows.push(LyapunovRow {
            t: *t,
            energy: e,
            cross: f,
            lyapunov: l,
            margin: (l - 0.5 * c4 * e).min(1.5 * c4 * e - l),
        });
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let scale = rows.first().map_or(0.0, |r| r.lyapunov.abs());
    let tol = 1e-12 * scale;
    let sandwich_holds = rows.iter().all(|r| r.margin >= -tol);
    let max_increase = rows
        .windows(2)
        .map(|w| w[1].lyapunov - w[0].lyapunov)
        .fold(0.0f64, f64::max)
        / scale.max(f64::MIN_POSITIVE);
    let nonincreasing = max_increase <= 1e-9;
    Ok(LyapunovAudit {
        c4,
        rows,
        sandwich_holds,
        nonincreasing,
        min_margin,
        max_increase,
    })
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    StateVector {
        p: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
        q: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
    }
}

/// Worst normalized residual of `Re(yᴴ K y) = -qᴴ D q` over `samples`
/// random complex states. Each residual is scaled by
/// `|yᴴ K y| + qᴴ D q + 1`.
pub fn dissipativity_residual(pencil: &SystemPencil, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pencil.n();
    let dim = pencil.dim();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let re = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let im = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        // yᴴ K y with y = re + i im and K real
        let k_re = &pencil.k * &re;
        let k_im = &pencil.k * &im;
        let form = Complex::new(
            re.dot(&k_re) + im.dot(&k_im),
            re.dot(&k_im) - im.dot(&k_re),
        );
        let (q_re, q_im) = (re.rows(n, n), im.rows(n, n));
        let qdq = q_re.dot(&(&pencil.d * q_re)) + q_im.dot(&(&pencil.d * q_im));
        let lhs = (form.re + qdq).abs();
        worst = worst.max(lhs / (form.norm() + qdq + 1.0));
    }
    worst
}

fn check(name: &'static str, ok: bool, residual: f64) -> InvariantResult {
    InvariantResult {
        name,
        status: Status::from_check(ok),
        residual,
    }
}

fn skipped(name: &'static str) -> InvariantResult {
    InvariantResult {
        name,
        status: Status::Skipped,
        residual: f64::NAN,
    }
}

/// Runs slowest mode → simulation → decay fit, compares the fitted rate
/// with the spectral abscissa and evaluates every structural invariant.
pub fn cross_validate(
    disc: &Discretization,
    dt: f64,
    t_final: f64,
) -> Result<VerificationReport, AnalysisError> {
    cross_validate_with(disc, dt, t_final, None)
}

/// [`cross_validate`] with an explicit Lyapunov weight (`None` selects
/// [`default_c4`]).
pub fn cross_validate_with(
    disc: &Discretization,
    dt: f64,
    t_final: f64,
    c4: Option<f64>,
) -> Result<VerificationReport, AnalysisError> {
    let pencil = &disc.pencil;
    let regime = pencil.regime;
    let n = pencil.n();
    let mut notes = Vec::new();
    let mut results = Vec::with_capacity(INVARIANTS.len() + 1);

    // frequency domain
    let spectrum = eigenvalues(pencil)?;
    let scale = spectrum
        .eigenvalues
        .iter()
        .map(|m| m.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let band = resolved_band(dt);
    let abscissa = spectrum.abscissa;
    let mu = spectrum
        .slowest_within(band)
        .ok_or(SpectralError::EmptySpectrum)?;
    if mu.re != abscissa {
        notes.push(format!(
            "slowest eigenvalue lies above the resolved band |Im μ| <= {band:.6e}; \
             decay is compared with the slowest resolved mode {:.6e}{:+.6e}i",
            mu.re, mu.im
        ));
    }
    let mode = mode_at(pencil, mu)?;
    notes.extend(spectrum.warnings.iter().take(3).cloned());

    // time domain
    let steps = dynamics::step_count(dt, t_final);
    let snapshot_every = (steps / 200).max(1);
    let sim = simulate(pencil, &mode.real, dt, t_final, snapshot_every)?;
    let fit = fit_decay(&sim.trace, default_window(t_final))?;
    let decaying = mu.re < -1e-9 * scale;
    let ratio = if decaying {
        fit.alpha / (2.0 * mu.re.abs())
    } else {
        notes.push(format!("no decay to fit: {} regime", regime.tag()));
        f64::NAN
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);

    // assembly
    let diss = dissipativity_residual(pencil, 100, 0xd155);
    results.push(check("dissipativity_identity", diss <= 1e-12, diss));
    results.push(check("s_positive_definite", pencil.s.clone().cholesky().is_some(), 0.0));
    results.push(check("m_positive_definite", pencil.m.clone().cholesky().is_some(), 0.0));
    let d_eigs = pencil.d.clone().symmetric_eigenvalues();
    let d_min = d_eigs.min().min(0.0);
    let d_scale = d_eigs.amax().max(1.0);
    results.push(check(
        "d_positive_semidefinite",
        d_min >= -1e-12 * d_scale,
        -d_min / d_scale,
    ));
    let d_zero = pencil.d.iter().all(|&v| v == 0.0);
    let consistent = d_zero == (regime == DampingCase::Conservative);
    results.push(check(
        "d_zero_iff_conservative",
        consistent,
        if consistent { 0.0 } else { 1.0 },
    ));

    // stepping
    let stepper = TrapezoidalStepper::new(pencil, dt)?;
    let mut worst_balance = 0.0f64;
    let mut y = random_state(n, &mut rng);
    for _ in 0..200 {
        let next = stepper.step(&y)?;
        worst_balance = worst_balance.max(step_balance_residual(pencil, &y, &next, dt)?);
        y = next;
    }
    results.push(check(
        "energy_balance_per_step",
        worst_balance <= 1e-9,
        worst_balance,
    ));
    let uptick = sim.trace.max_uptick();
    results.push(check("energy_monotone", uptick <= 1e-9, uptick));
    let e0 = sim.trace.energy[0];
    let e_end = *sim.trace.energy.last().expect("trace is never empty");
    let drift = e_end / e0 - 1.0;
    if regime == DampingCase::Conservative {
        results.push(check("energy_drift", drift.abs() <= 1e-9, drift.abs()));
    } else {
        results.push(check("energy_drift", drift <= 1e-9, drift.max(0.0)));
    }
    let y = random_state(n, &mut rng);
    let fwd = stepper.step(&y)?;
    let back = TrapezoidalStepper::new(&reversed(pencil), dt)?.step(&fwd)?;
    let reversal = (back.stacked() - y.stacked()).norm() / y.stacked().norm();
    results.push(check("time_reversal", reversal <= 1e-8, reversal));

    // Lyapunov functionals
    let c_f = f_bound_constant(pencil)?;
    let mut worst_f = 0.0f64;
    for _ in 0..100 {
        let y = random_state(n, &mut rng);
        let ratio = lyapunov_f(pencil, &y)?.abs() / (c_f * energy(pencil, &y)?);
        worst_f = worst_f.max(ratio);
    }
    results.push(check("f_bound", worst_f <= 1.0 + 1e-12, worst_f));
    let c4 = match c4 {
        Some(c4) => c4,
        None => default_c4(pencil)?,
    };
    let audit = lyapunov_audit(pencil, &sim, c4)?;
    results.push(check(
        "lyapunov_sandwich",
        audit.sandwich_holds,
        (-audit.min_margin).max(0.0),
    ));
    if regime == DampingCase::Ddd {
        results.push(check(
            "lyapunov_nonincreasing",
            audit.nonincreasing,
            audit.max_increase,
        ));
    } else {
        results.push(skipped("lyapunov_nonincreasing"));
    }

    // spectrum
    let conj = spectrum.conjugation_defect() / scale;
    results.push(check("conjugate_symmetry", conj <= 1e-8, conj));
    results.push(check(
        "abscissa_nonpositive",
        abscissa <= 1e-8 * scale,
        abscissa.max(0.0) / scale,
    ));
    if matches!(regime, DampingCase::Ddd | DampingCase::Udu) {
        let gap = spectrum.min_distance_to_imaginary_axis;
        results.push(check("imaginary_axis_free", gap > 0.0, gap));
    } else {
        results.push(skipped("imaginary_axis_free"));
    }
    if n <= 50 {
        let other = eigenvalues_unwhitened(pencil)?;
        let worst = other
            .iter()
            .map(|m| (spectrum.nearest(*m).expect("nonempty") - m).norm() / scale)
            .fold(0.0, f64::max);
        results.push(check("whitening_consistency", worst <= 1e-8, worst));
    } else {
        results.push(skipped("whitening_consistency"));
    }
    let op = ResolventOperator::new(pencil)?;
    let mut worst_gap = 0.0f64;
    for lambda in spectral::grid(-50.0, 50.0, 41)? {
        let norm = op.norm(lambda);
        let bound = op.inverse_distance(lambda);
        if norm.is_finite() {
            worst_gap = worst_gap.max((bound - norm) / bound);
        }
    }
    results.push(check("resolvent_lower_bound", worst_gap <= 1e-8, worst_gap.max(0.0)));

    // decay rate
    if !decaying {
        results.push(check(DECAY_RATE, fit.alpha.abs() <= 1e-6, fit.alpha.abs()));
    } else {
        let (lo, hi) = ratio_band(regime);
        if fit.r_squared >= MIN_R_SQUARED {
            let miss = (lo - ratio).max(ratio - hi).max(0.0);
            results.push(check(DECAY_RATE, (lo..=hi).contains(&ratio), miss));
        } else {
            // defective or multi-mode decay: only the lower envelope is checked
            notes.push(format!(
                "r² = {:.6} below {MIN_R_SQUARED}: one-sided decay check",
                fit.r_squared
            ));
            let floor = 1.8 * mu.re.abs() * lo;
            results.push(check(
                DECAY_RATE,
                fit.alpha >= floor,
                (floor - fit.alpha).max(0.0),
            ));
        }
    }

    Ok(VerificationReport {
        regime,
        counts: disc.mesh.counts(),
        dofs: n,
        dt,
        t_final,
        abscissa,
        min_distance_to_imaginary_axis: spectrum.min_distance_to_imaginary_axis,
        slowest_mode: mu,
        resolved_band: band,
        alpha_fit: fit.alpha,
        r_squared: fit.r_squared,
        ratio,
        c4,
        notes,
        invariant_results: results,
    })
}

/// The pencil with time reversed (`K → -K`).
fn reversed(pencil: &SystemPencil) -> SystemPencil {
    SystemPencil {
        k: -&pencil.k,
        ..pencil.clone()
    }
}

/// Final time long enough for a mode with real part `abscissa` to lose
/// about `e^{-10}` of its energy, capped to keep runs short.
pub fn suggested_t_final(abscissa: f64) -> f64 {
    if abscissa < 0.0 {
        (5.0 / abscissa.abs()).clamp(1.0, 200.0)
    } else {
        10.0
    }
}

/// [`suggested_t_final`] for the slowest mode resolved by `dt`.
pub fn suggested_t_final_for(pencil: &SystemPencil, dt: f64) -> Result<f64, AnalysisError> {
    let spectrum = eigenvalues(pencil)?;
    let mu = spectrum
        .slowest_within(resolved_band(dt))
        .ok_or(SpectralError::EmptySpectrum)?;
    Ok(suggested_t_final(mu.re))
}
