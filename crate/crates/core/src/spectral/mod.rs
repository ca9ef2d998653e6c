//! Frequency-domain analysis of the generator pencil `(B, K)`.
//!
//! Eigenvalues of `K x = μ B x` are computed after symmetric whitening:
//! with `B = G Gᵀ` (Cholesky of the diagonal blocks) the pencil becomes the
//! ordinary real matrix `A_h = G⁻¹ K G⁻ᵀ`, whose Euclidean geometry is the
//! discrete energy geometry.

mod oracles;
mod resolvent;

use nalgebra::{Complex, DMatrix, DVector, Schur};
use thiserror::Error;

use crate::fem::{StateVector, SystemPencil};
use crate::model::DampingCase;

pub use oracles::{
    beam_clamped_free_frequencies, clamped_free_root, neweq_determinant,
    string_modes_closed_form,
};
pub use resolvent::{
    aligned_bounds, grid, resolvent_norm, resolvent_sweep, ResolventOperator, ResolventTable,
};

type C = Complex<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("energy Gram matrix is not positive definite")]
    FactorizationFailure,
    #[error("real Schur iteration did not converge")]
    SchurFailure,
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("parameter must be positive (got {0})")]
    NonpositiveParameter(f64),
    #[error("invalid λ grid [{lambda_min}, {lambda_max}] with {steps} points (need min < max, steps >= 2)")]
    InvalidGrid {
        lambda_min: f64,
        lambda_max: f64,
        steps: usize,
    },
    #[error("inverse iteration failed to produce an eigenvector")]
    EigenvectorFailure,
}

/// Lower Cholesky factors of `S` and `M`.
fn factor_blocks(pencil: &SystemPencil) -> Result<(DMatrix<f64>, DMatrix<f64>), SpectralError> {
    let ls = pencil
        .s
        .clone()
        .cholesky()
        .ok_or(SpectralError::FactorizationFailure)?
        .l();
    let lm = pencil
        .m
        .clone()
        .cholesky()
        .ok_or(SpectralError::FactorizationFailure)?
        .l();
    Ok((ls, lm))
}

/// `A_h = G⁻¹ K G⁻ᵀ` with `G = diag(L_S, L_M)`.
///
/// Block form: `[[0, C], [-Cᵀ, -L_M⁻¹ D L_M⁻ᵀ]]` where `C = L_Sᵀ L_M⁻ᵀ`.
pub fn whiten(pencil: &SystemPencil) -> Result<DMatrix<f64>, SpectralError> {
    let n = pencil.n();
    let (ls, lm) = factor_blocks(pencil)?;
    // Cᵀ = L_M⁻¹ L_S
    let mut ct = ls.clone();
    if !lm.solve_lower_triangular_mut(&mut ct) {
        return Err(SpectralError::FactorizationFailure);
    }
    // L_M⁻¹ D L_M⁻ᵀ
    let mut x = pencil.d.clone();
    lm.solve_lower_triangular_mut(&mut x);
    let mut dh = x.transpose();
    lm.solve_lower_triangular_mut(&mut dh);
    let dh = (&dh + dh.transpose()) * 0.5;

    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&ct.transpose());
    a.view_mut((n, 0), (n, n)).copy_from(&(-&ct));
    a.view_mut((n, n), (n, n)).copy_from(&(-dh));
    Ok(a)
}

pub(crate) fn real_schur(a: DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>), SpectralError> {
    let iterations = 1000 * a.nrows().max(1);
    Schur::try_new(a, f64::EPSILON, iterations)
        .map(Schur::unpack)
        .ok_or(SpectralError::SchurFailure)
}

/// Eigenvalues of a real quasi-upper-triangular matrix, block by block.
pub(crate) fn block_eigenvalues(t: &DMatrix<f64>) -> Vec<C> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mean = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let disc = half * half + b * c;
            if disc < 0.0 {
                let im = (-disc).sqrt();
                out.push(C::new(mean, im));
                out.push(C::new(mean, -im));
            } else {
                let r = disc.sqrt();
                out.push(C::new(mean + r, 0.0));
                out.push(C::new(mean - r, 0.0));
            }
            i += 2;
        } else {
            out.push(C::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// Eigenvalues of the generator with summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// All `2N` eigenvalues, sorted by decreasing real part, then by
    /// imaginary part.
    pub eigenvalues: Vec<C>,
    pub abscissa: f64,
    pub min_distance_to_imaginary_axis: f64,
    pub regime: DampingCase,
    /// Clusters of nearly coincident eigenvalues (possibly defective);
    /// their eigenvectors are ill-conditioned.
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    fn from_eigenvalues(mut eigenvalues: Vec<C>, regime: DampingCase) -> Self {
        eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        let abscissa = abscissa_of(&eigenvalues).unwrap_or(f64::NAN);
        let min_distance_to_imaginary_axis = eigenvalues
            .iter()
            .map(|m| m.re.abs())
            .fold(f64::INFINITY, f64::min);
        let scale = eigenvalues.iter().map(|m| m.norm()).fold(0.0, f64::max);
        let mut warnings = Vec::new();
        for (i, a) in eigenvalues.iter().enumerate() {
            for b in &eigenvalues[i + 1..] {
                if (a - b).norm() <= 1e-7 * scale.max(1.0) {
                    warnings.push(format!(
                        "nearly repeated eigenvalue {:.6}{:+.6}i (possibly defective)",
                        a.re, a.im
                    ));
                }
            }
        }
        SpectrumReport {
            eigenvalues,
            abscissa,
            min_distance_to_imaginary_axis,
            regime,
            warnings,
        }
    }

    /// `min |Re μ|` over eigenvalues with `|Im μ| ≤ max_frequency`.
    pub fn min_decay_within(&self, max_frequency: f64) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|m| m.im.abs() <= max_frequency)
            .map(|m| m.re.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalue with the largest real part among those with
    /// `|Im μ| ≤ max_frequency` (upper half plane preferred).
    pub fn slowest_within(&self, max_frequency: f64) -> Option<C> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|m| m.im.abs() <= max_frequency)
            .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
    }

    /// Largest `|μ - conj(ν)|` over the best conjugate partner `ν`.
    pub fn conjugation_defect(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|m| {
                self.eigenvalues
                    .iter()
                    .map(|n| (m.conj() - n).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Eigenvalue closest to `target`.
    pub fn nearest(&self, target: C) -> Option<C> {
        self.eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
    }

    /// Positive imaginary parts, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self
            .eigenvalues
            .iter()
            .filter(|m| m.im > 0.0)
            .map(|m| m.im)
            .collect();
        w.sort_by(f64::total_cmp);
        w
    }
}

pub fn abscissa_of(eigenvalues: &[C]) -> Result<f64, SpectralError> {
    eigenvalues
        .iter()
        .map(|m| m.re)
        .reduce(f64::max)
        .ok_or(SpectralError::EmptySpectrum)
}

pub fn eigenvalues(pencil: &SystemPencil) -> Result<SpectrumReport, SpectralError> {
    let (_, t) = real_schur(whiten(pencil)?)?;
    Ok(SpectrumReport::from_eigenvalues(
        block_eigenvalues(&t),
        pencil.regime,
    ))
}

/// Eigenvalues of `B⁻¹ K` computed without whitening (cross-check route).
pub fn eigenvalues_unwhitened(pencil: &SystemPencil) -> Result<Vec<C>, SpectralError> {
    let lu = pencil.b.clone().lu();
    let a = lu
        .solve(&pencil.k)
        .ok_or(SpectralError::FactorizationFailure)?;
    Ok(a.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_abscissa(report: &SpectrumReport) -> Result<f64, SpectralError> {
    abscissa_of(&report.eigenvalues)
}

/// Eigenpair with the largest real part, normalized to unit energy
/// `½ xᴴ B x = 1`. The phase is chosen so that the real and imaginary
/// parts are energy-orthogonal with the real part carrying the larger
/// share.
#[derive(Debug, Clone)]
pub struct SlowestMode {
    pub mu: C,
    pub vector: DVector<C>,
    pub real: StateVector,
    pub imag: StateVector,
}

pub fn slowest_mode(pencil: &SystemPencil) -> Result<SlowestMode, SpectralError> {
    let report = eigenvalues(pencil)?;
    // first entry has the largest real part; prefer the upper half plane
    let abscissa = spectral_abscissa(&report)?;
    let mu = report
        .eigenvalues
        .iter()
        .copied()
        .filter(|m| m.re == abscissa)
        .max_by(|a, b| a.im.total_cmp(&b.im))
        .ok_or(SpectralError::EmptySpectrum)?;
    mode_at(pencil, mu)
}

/// Eigenpair for a computed eigenvalue `mu`, normalized like
/// [`slowest_mode`].
pub fn mode_at(pencil: &SystemPencil, mu: C) -> Result<SlowestMode, SpectralError> {
    let vector = eigenvector(pencil, mu)?;
    Ok(split_mode(pencil, mu, vector))
}

/// Inverse iteration on `K - σ B` with `σ` at the computed eigenvalue.
pub fn eigenvector(pencil: &SystemPencil, mu: C) -> Result<DVector<C>, SpectralError> {
    let dim = pencil.dim();
    let bc = pencil.b.map(|v| C::new(v, 0.0));
    let kc = pencil.k.map(|v| C::new(v, 0.0));
    let scale = pencil.k.amax().max(pencil.b.amax());
    let mut shift = mu;
    let mut lu = (&kc - &bc * shift).lu();
    let mut nudge = 1e-14 * scale.max(mu.norm());
    while !lu.is_invertible() {
        shift = mu + C::new(nudge, nudge);
        lu = (&kc - &bc * shift).lu();
        nudge *= 10.0;
        if nudge > 1e-6 * scale {
            return Err(SpectralError::EigenvectorFailure);
        }
    }
    let mut x = DVector::from_fn(dim, |i, _| C::new(1.0 + 0.1 * (i % 7) as f64, 0.3));
    for _ in 0..4 {
        let rhs = &bc * &x;
        let next = lu.solve(&rhs).ok_or(SpectralError::EigenvectorFailure)?;
        let norm = next.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(SpectralError::EigenvectorFailure);
        }
        x = next / C::new(norm, 0.0);
    }
    Ok(x)
}

fn split_mode(pencil: &SystemPencil, mu: C, x: DVector<C>) -> SlowestMode {
    let b = &pencil.b;
    let bx = b.map(|v| C::new(v, 0.0)) * &x;
    // xᵀ B x (no conjugate) fixes the phase; xᴴ B x the energy.
    let bilinear: C = x.iter().zip(bx.iter()).map(|(a, b)| a * b).sum();
    let hermitian: f64 = x.iter().zip(bx.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    let phase = C::from_polar(1.0, -0.5 * bilinear.arg());
    let scale = (2.0 / hermitian).sqrt();
    let x = x.map(|v| v * phase * scale);
    let re = DVector::from_iterator(x.len(), x.iter().map(|v| v.re));
    let im = DVector::from_iterator(x.len(), x.iter().map(|v| v.im));
    SlowestMode {
        mu,
        real: StateVector::from_stacked(&re),
        imag: StateVector::from_stacked(&im),
        vector: x,
    }
}

impl SlowestMode {
    /// `‖K x - μ B x‖ / ‖B x‖`.
    pub fn residual(&self, pencil: &SystemPencil) -> f64 {
        let kx = pencil.k.map(|v| C::new(v, 0.0)) * &self.vector;
        let bx = pencil.b.map(|v| C::new(v, 0.0)) * &self.vector;
        (kx - &bx * self.mu).norm() / bx.norm()
    }

    /// `½ xᴴ B x`.
    pub fn energy(&self, pencil: &SystemPencil) -> f64 {
        let re = self.real.stacked();
        let im = self.imag.stacked();
        0.5 * (re.dot(&(&pencil.b * &re)) + im.dot(&(&pencil.b * &im)))
    }
}
