//! Resolvent norms `‖(iλ - A_h)^{-1}‖` in the discrete energy norm.
//!
//! With `B = G Gᵀ` the energy norm of a state `y` is the Euclidean norm of
//! `Gᵀ y`, and the generator in those coordinates is `A_h = G⁻¹ K G⁻ᵀ`.
//! Single evaluations use a dense SVD of `iλ - A_h`. Sweeps reduce `A_h` to
//! real Schur form once (`A_h = Q T Qᵀ` with `Q` orthogonal, so the norm is
//! that of `(iλ - T)^{-1}`) and run Lanczos on `X⁻ᴴ X⁻¹`, `X = iλ - T`,
//! which costs two quasi-triangular solves per iteration.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::fem::SystemPencil;

use super::{whiten, SpectralError};

type C = Complex<f64>;

/// Norm of the resolvent at `iλ` via the smallest singular value of
/// `iλ - A_h`. Returns `+inf` when `iλ` is numerically an eigenvalue.
pub fn resolvent_norm(pencil: &SystemPencil, lambda: f64) -> Result<f64, SpectralError> {
    let a = whiten(pencil)?;
    Ok(dense_resolvent_norm(&a, lambda))
}

pub(crate) fn dense_resolvent_norm(a: &DMatrix<f64>, lambda: f64) -> f64 {
    let n = a.nrows();
    let x = DMatrix::from_fn(n, n, |r, c| {
        let diag = if r == c { C::new(0.0, lambda) } else { C::new(0.0, 0.0) };
        diag - C::new(a[(r, c)], 0.0)
    });
    let sv = x.singular_values();
    let (smin, smax) = sv
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if smin <= smax * f64::EPSILON * n as f64 {
        return f64::INFINITY;
    }
    1.0 / smin
}

/// Uniform grid of resolvent norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventTable {
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    pub sup_norm: f64,
}

impl ResolventTable {
    /// Grid point where the supremum is attained.
    pub fn argmax(&self) -> Option<f64> {
        self.norms
            .iter()
            .zip(&self.lambdas)
            .fold(None, |best: Option<(f64, f64)>, (&n, &l)| match best {
                Some((bn, _)) if bn >= n => best,
                _ => Some((n, l)),
            })
            .map(|(_, l)| l)
    }
}

/// `steps` equally spaced points from `lambda_min` to `lambda_max`.
pub fn grid(lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Vec<f64>, SpectralError> {
    if steps < 2 || !(lambda_min < lambda_max) || !lambda_min.is_finite() || !lambda_max.is_finite()
    {
        return Err(SpectralError::InvalidGrid {
            lambda_min,
            lambda_max,
            steps,
        });
    }
    let h = (lambda_max - lambda_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k == steps - 1 {
                lambda_max
            } else {
                lambda_min + k as f64 * h
            }
        })
        .collect())
}

/// Shifts `[lambda_min, lambda_max]` by less than one grid spacing so that
/// one grid point falls on `anchor`.
pub fn aligned_bounds(lambda_min: f64, lambda_max: f64, steps: usize, anchor: f64) -> (f64, f64) {
    let h = (lambda_max - lambda_min) / (steps.max(2) - 1) as f64;
    let k = ((anchor - lambda_min) / h).round();
    let shift = anchor - (lambda_min + k * h);
    (lambda_min + shift, lambda_max + shift)
}

pub fn resolvent_sweep(
    pencil: &SystemPencil,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
) -> Result<ResolventTable, SpectralError> {
    let lambdas = grid(lambda_min, lambda_max, steps)?;
    let op = ResolventOperator::new(pencil)?;
    Ok(op.sweep(&lambdas))
}

#[derive(Debug, Clone, Copy)]
struct Block {
    start: usize,
    size: usize,
}

/// Schur-reduced generator for repeated resolvent evaluations.
#[derive(Debug, Clone)]
pub struct ResolventOperator {
    t: DMatrix<f64>,
    blocks: Vec<Block>,
    eigenvalues: Vec<C>,
    scale: f64,
}

impl ResolventOperator {
    pub fn new(pencil: &SystemPencil) -> Result<Self, SpectralError> {
        let a = whiten(pencil)?;
        let (_, t) = super::real_schur(a)?;
        Self::from_quasi_triangular(t)
    }

    pub(crate) fn from_quasi_triangular(t: DMatrix<f64>) -> Result<Self, SpectralError> {
        let n = t.nrows();
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && t[(i + 1, i)] != 0.0 {
                if i + 2 < n && t[(i + 2, i + 1)] != 0.0 {
                    return Err(SpectralError::SchurFailure);
                }
                blocks.push(Block { start: i, size: 2 });
                i += 2;
            } else {
                blocks.push(Block { start: i, size: 1 });
                i += 1;
            }
        }
        let eigenvalues = super::block_eigenvalues(&t);
        let scale = t.amax().max(f64::MIN_POSITIVE);
        Ok(ResolventOperator {
            t,
            blocks,
            eigenvalues,
            scale,
        })
    }

    pub fn eigenvalues(&self) -> &[C] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Solves `(z - T) x = b` (or `(z - T)ᴴ x = b` when `adjoint`).
    /// Returns `None` when a diagonal block is numerically singular.
    fn solve(&self, z: C, b: &[C], adjoint: bool) -> Option<Vec<C>> {
        let n = self.dim();
        let t = &self.t;
        let tiny = self.scale * f64::EPSILON * n as f64;
        let mut x = b.to_vec();
        // For the adjoint: (z - T)ᴴ = conj(z) - Tᵀ, lower quasi-triangular.
        let zz = if adjoint { z.conj() } else { z };
        let entry = |r: usize, c: usize| if adjoint { t[(c, r)] } else { t[(r, c)] };

        let order: Box<dyn Iterator<Item = &Block>> = if adjoint {
            Box::new(self.blocks.iter())
        } else {
            Box::new(self.blocks.iter().rev())
        };
        for blk in order {
            let s = blk.start;
            if blk.size == 1 {
                let pivot = zz - entry(s, s);
                if pivot.norm() <= tiny {
                    return None;
                }
                x[s] /= pivot;
                let v = x[s];
                // eliminate the solved unknown from the remaining rows
                if adjoint {
                    for (r, xr) in x.iter_mut().enumerate().take(n).skip(s + 1) {
                        *xr += v * entry(r, s);
                    }
                } else {
                    for (r, xr) in x.iter_mut().enumerate().take(s) {
                        *xr += v * entry(r, s);
                    }
                }
            } else {
                let (a, b12, c21, d) = (
                    zz - entry(s, s),
                    C::from(-entry(s, s + 1)),
                    C::from(-entry(s + 1, s)),
                    zz - entry(s + 1, s + 1),
                );
                let det = a * d - b12 * c21;
                if det.norm() <= tiny * (a.norm() + d.norm() + tiny) {
                    return None;
                }
                let (r0, r1) = (x[s], x[s + 1]);
                let v0 = (d * r0 - b12 * r1) / det;
                let v1 = (a * r1 - c21 * r0) / det;
                x[s] = v0;
                x[s + 1] = v1;
                let rows: Box<dyn Iterator<Item = usize>> = if adjoint {
                    Box::new(s + 2..n)
                } else {
                    Box::new(0..s)
                };
                for r in rows {
                    x[r] += v0 * entry(r, s) + v1 * entry(r, s + 1);
                }
            }
        }
        x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
    }

    /// `‖(iλ - A_h)^{-1}‖₂`, or `+inf` at a numerical eigenvalue.
    pub fn norm(&self, lambda: f64) -> f64 {
        let n = self.dim();
        let z = C::new(0.0, lambda);
        let apply = |v: &[C]| -> Option<Vec<C>> {
            let y = self.solve(z, v, false)?;
            self.solve(z, &y, true)
        };

        // deterministic, generic start vector
        let mut v: Vec<C> = (0..n)
            .map(|i| {
                let s = ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract();
                C::new(1.0 + s, 0.5 - s)
            })
            .collect();
        normalize(&mut v);

        let max_steps = n.min(80);
        let mut basis: Vec<Vec<C>> = Vec::with_capacity(max_steps);
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut previous = 0.0f64;
        let mut ritz = 0.0f64;
        for step in 0..max_steps {
            let Some(mut w) = apply(&v) else {
                return f64::INFINITY;
            };
            let alpha = dot(&v, &w).re;
            basis.push(v.clone());
            alphas.push(alpha);
            // full reorthogonalization (twice is enough)
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            ritz = largest_tridiagonal_eigenvalue(&alphas, &betas);
            let beta = norm2(&w);
            let converged = step >= 2 && (ritz - previous).abs() <= 1e-13 * ritz;
            if converged || beta <= 1e-14 * ritz || step + 1 == max_steps {
                break;
            }
            previous = ritz;
            betas.push(beta);
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / beta;
            }
        }
        if !ritz.is_finite() || ritz <= 0.0 {
            return f64::INFINITY;
        }
        ritz.sqrt()
    }

    pub fn sweep(&self, lambdas: &[f64]) -> ResolventTable {
        #[cfg(feature = "parallel")]
        let norms: Vec<f64> = {
            use rayon::prelude::*;
            lambdas.par_iter().map(|&l| self.norm(l)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let norms: Vec<f64> = lambdas.iter().map(|&l| self.norm(l)).collect();
        let sup_norm = norms.iter().copied().fold(0.0, f64::max);
        ResolventTable {
            lambdas: lambdas.to_vec(),
            norms,
            sup_norm,
        }
    }

    /// `1 / min_j |iλ - μ_j|`, a lower bound for the resolvent norm.
    pub fn inverse_distance(&self, lambda: f64) -> f64 {
        let z = C::new(0.0, lambda);
        let dist = self
            .eigenvalues
            .iter()
            .map(|mu| (z - mu).norm())
            .fold(f64::INFINITY, f64::min);
        1.0 / dist
    }
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [C]) {
    let n = norm2(a);
    for x in a.iter_mut() {
        *x /= n;
    }
}

fn largest_tridiagonal_eigenvalue(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let mut m = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = alphas[i];
        if i + 1 < k {
            m[(i, i + 1)] = betas[i];
            m[(i + 1, i)] = betas[i];
        }
    }
    SymmetricEigen::new(m).eigenvalues.max()
}
