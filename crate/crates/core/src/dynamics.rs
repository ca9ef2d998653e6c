//! Time integration of `B ẏ = K y` and the energy functionals.
//!
//! The trapezoidal rule is the production stepper: for the midpoint state
//! `ȳ = (y_n + y_{n+1}) / 2` it satisfies
//! `E(y_{n+1}) - E(y_n) = -dt · q̄ᵀ D q̄` exactly, the discrete counterpart of
//! the continuous energy identity. Backward Euler is kept as a reference
//! integrator; it damps energy artificially even without physical damping.

use nalgebra::{DMatrix, DVector, LU};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fem::{StateVector, SystemPencil};
use crate::model::StructureConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("state has {got} unknowns, pencil expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("c4 must be positive (got {0})")]
    NonpositiveC4(f64),
    #[error("time step must be positive and finite (got {0})")]
    NonpositiveStep(f64),
    #[error("final time must be positive and finite (got {0})")]
    NonpositiveDuration(f64),
    #[error("implicit step matrix is singular")]
    SolveFailure,
    #[error("the energy Gram matrix is not positive definite")]
    NotPositiveDefinite,
}

fn check_dims(pencil: &SystemPencil, y: &StateVector) -> Result<(), DynamicsError> {
    let n = pencil.n();
    if y.p.len() != n || y.q.len() != n {
        return Err(DynamicsError::DimensionMismatch {
            expected: n,
            got: y.p.len().max(y.q.len()),
        });
    }
    Ok(())
}

/// `½ (pᵀ S p + qᵀ M q)`.
pub fn energy(pencil: &SystemPencil, y: &StateVector) -> Result<f64, DynamicsError> {
    check_dims(pencil, y)?;
    Ok(0.5 * (quad(&pencil.s, &y.p, &y.p) + quad(&pencil.m, &y.q, &y.q)))
}

/// `xᵀ A z` without forming intermediate outer products.
fn quad(a: &DMatrix<f64>, x: &DVector<f64>, z: &DVector<f64>) -> f64 {
    x.dot(&(a * z))
}

/// Instantaneous energy rate `-qᵀ D q`.
pub fn dissipation(pencil: &SystemPencil, y: &StateVector) -> Result<f64, DynamicsError> {
    check_dims(pencil, y)?;
    Ok(-quad(&pencil.d, &y.q, &y.q))
}

/// Cross functional `pᵀ M q`: the L² pairing of displacement and velocity
/// over all three intervals.
pub fn lyapunov_f(pencil: &SystemPencil, y: &StateVector) -> Result<f64, DynamicsError> {
    check_dims(pencil, y)?;
    Ok(quad(&pencil.m, &y.p, &y.q))
}

/// `c4 · E + F`.
pub fn lyapunov_l(pencil: &SystemPencil, y: &StateVector, c4: f64) -> Result<f64, DynamicsError> {
    if !(c4 > 0.0) || !c4.is_finite() {
        return Err(DynamicsError::NonpositiveC4(c4));
    }
    Ok(c4 * energy(pencil, y)? + lyapunov_f(pencil, y)?)
}

/// Smallest `c` with `|F| ≤ c · E` on every state: `sqrt(λ_max(M, S))`.
pub fn f_bound_constant(pencil: &SystemPencil) -> Result<f64, DynamicsError> {
    let chol = pencil
        .s
        .clone()
        .cholesky()
        .ok_or(DynamicsError::NotPositiveDefinite)?;
    let l = chol.l();
    let mut x = pencil.m.clone();
    l.solve_lower_triangular_mut(&mut x);
    let mut y = x.transpose();
    l.solve_lower_triangular_mut(&mut y);
    let sym = (&y + y.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().max().max(0.0).sqrt())
}

/// Largest `|F| / E` seen over `samples` random states (seeded).
pub fn sampled_f_ratio(pencil: &SystemPencil, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pencil.n();
    let mut best = 0.0f64;
    for _ in 0..samples {
        let y = StateVector {
            p: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            q: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
        };
        let e = 0.5 * (quad(&pencil.s, &y.p, &y.p) + quad(&pencil.m, &y.q, &y.q));
        if e > 0.0 {
            best = best.max(quad(&pencil.m, &y.p, &y.q).abs() / e);
        }
    }
    best
}

/// Default Lyapunov weight: ten times the supremum of `|F| / E`.
pub fn default_c4(pencil: &SystemPencil) -> Result<f64, DynamicsError> {
    let sup = f_bound_constant(pencil)?.max(sampled_f_ratio(pencil, 100, 0x5eed));
    Ok(10.0 * sup)
}

/// Default step: 1e-3 of the period `2 (l2 - l1)` of the slowest string mode.
pub fn default_dt(cfg: &StructureConfig) -> f64 {
    2e-3 * cfg.string_length()
}

fn check_dt(dt: f64) -> Result<(), DynamicsError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::NonpositiveStep(dt));
    }
    Ok(())
}

/// Trapezoidal stepper with its implicit matrix factored once.
#[derive(Debug, Clone)]
pub struct TrapezoidalStepper {
    dt: f64,
    lhs: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rhs: DMatrix<f64>,
}

impl TrapezoidalStepper {
    pub fn new(pencil: &SystemPencil, dt: f64) -> Result<Self, DynamicsError> {
        check_dt(dt)?;
        let half = 0.5 * dt;
        let lhs = (&pencil.b - &pencil.k * half).lu();
        if !lhs.is_invertible() {
            return Err(DynamicsError::SolveFailure);
        }
        Ok(TrapezoidalStepper {
            dt,
            lhs,
            rhs: &pencil.b + &pencil.k * half,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, y: &StateVector) -> Result<StateVector, DynamicsError> {
        let n = self.rhs.nrows() / 2;
        if y.p.len() != n || y.q.len() != n {
            return Err(DynamicsError::DimensionMismatch {
                expected: n,
                got: y.p.len(),
            });
        }
        let b = &self.rhs * y.stacked();
        let next = self.lhs.solve(&b).ok_or(DynamicsError::SolveFailure)?;
        Ok(StateVector::from_stacked(&next))
    }
}

/// Solves `(B - dt/2 K) y' = (B + dt/2 K) y`.
pub fn step_trapezoidal(
    pencil: &SystemPencil,
    y: &StateVector,
    dt: f64,
) -> Result<StateVector, DynamicsError> {
    check_dims(pencil, y)?;
    TrapezoidalStepper::new(pencil, dt)?.step(y)
}

/// Solves `(B - dt K) y' = B y`.
pub fn step_backward_euler(
    pencil: &SystemPencil,
    y: &StateVector,
    dt: f64,
) -> Result<StateVector, DynamicsError> {
    check_dims(pencil, y)?;
    check_dt(dt)?;
    let lhs = (&pencil.b - &pencil.k * dt).lu();
    let next = lhs
        .solve(&(&pencil.b * y.stacked()))
        .ok_or(DynamicsError::SolveFailure)?;
    Ok(StateVector::from_stacked(&next))
}

/// Residual of the midpoint energy balance over one step, relative to the
/// larger of the two energies.
pub fn step_balance_residual(
    pencil: &SystemPencil,
    before: &StateVector,
    after: &StateVector,
    dt: f64,
) -> Result<f64, DynamicsError> {
    let e0 = energy(pencil, before)?;
    let e1 = energy(pencil, after)?;
    let mid = StateVector {
        p: (&before.p + &after.p) * 0.5,
        q: (&before.q + &after.q) * 0.5,
    };
    let rate = dissipation(pencil, &mid)?;
    let scale = e0.max(e1);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((e1 - e0 - dt * rate).abs() / scale)
}

/// Energy `E`, rate `-qᵀDq` and cross term `F` at increasing times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub cross: Vec<f64>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn record(&mut self, pencil: &SystemPencil, t: f64, y: &StateVector) -> Result<(), DynamicsError> {
        self.times.push(t);
        self.energy.push(energy(pencil, y)?);
        self.dissipation.push(dissipation(pencil, y)?);
        self.cross.push(lyapunov_f(pencil, y)?);
        Ok(())
    }

    /// Largest relative one-step energy increase `max(0, E_{k+1}/E_k - 1)`.
    pub fn max_uptick(&self) -> f64 {
        self.energy
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| (w[1] / w[0] - 1.0).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trace: EnergyTrace,
    pub snapshots: Vec<(f64, StateVector)>,
    pub final_state: StateVector,
}

/// Number of steps used to reach `t_final` with step `dt`.
pub fn step_count(dt: f64, t_final: f64) -> usize {
    ((t_final / dt).round() as usize).max(1)
}

/// Trapezoidal integration from `y0` over `[0, t_final]`, recording the
/// trace at every step and a snapshot every `snapshot_every` steps
/// (`0` disables snapshots).
pub fn simulate(
    pencil: &SystemPencil,
    y0: &StateVector,
    dt: f64,
    t_final: f64,
    snapshot_every: usize,
) -> Result<SimOutput, DynamicsError> {
    check_dims(pencil, y0)?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(DynamicsError::NonpositiveDuration(t_final));
    }
    let stepper = TrapezoidalStepper::new(pencil, dt)?;
    let steps = step_count(dt, t_final);
    let mut trace = EnergyTrace::default();
    let mut snapshots = Vec::new();
    let mut y = y0.clone();
    for k in 0..=steps {
        let t = k as f64 * dt;
        if k > 0 {
            y = stepper.step(&y)?;
        }
        trace.record(pencil, t, &y)?;
        if snapshot_every > 0 && k % snapshot_every == 0 {
            snapshots.push((t, y.clone()));
        }
    }
    Ok(SimOutput {
        trace,
        snapshots,
        final_state: y,
    })
}
