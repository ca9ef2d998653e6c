//! Closed-form reference values used to check the discrete spectra.

use std::f64::consts::PI;

use nalgebra::Complex;

use super::SpectralError;

/// Roots of `μ² + βμ + (kπ/L)² = 0`: the `k`-th mode pair of a damped
/// string with fixed ends. The root with the larger imaginary (or, when
/// both are real, larger real) part comes first.
pub fn string_modes_closed_form(beta: f64, length: f64, k: usize) -> [Complex<f64>; 2] {
    let omega = k as f64 * PI / length;
    let disc = beta * beta - 4.0 * omega * omega;
    let centre = -0.5 * beta;
    if disc < 0.0 {
        let im = 0.5 * (-disc).sqrt();
        [Complex::new(centre, im), Complex::new(centre, -im)]
    } else {
        let half = 0.5 * disc.sqrt();
        [Complex::new(centre + half, 0.0), Complex::new(centre - half, 0.0)]
    }
}

/// `sech κ + cos κ`, which has the sign of `1 + cos κ cosh κ` and does not
/// overflow.
fn clamped_free_characteristic(kappa: f64) -> f64 {
    1.0 / kappa.cosh() + kappa.cos()
}

/// `j`-th positive root (1-based) of `1 + cos κ cosh κ = 0`, bracketed in
/// `((2j-1)π/2 - 1, (2j-1)π/2 + 1)` and bisected to 1e-12.
pub fn clamped_free_root(j: usize) -> f64 {
    assert!(j >= 1, "roots are numbered from 1");
    let centre = (2 * j - 1) as f64 * PI / 2.0;
    let (mut lo, mut hi) = (centre - 1.0, centre + 1.0);
    let mut f_lo = clamped_free_characteristic(lo);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let f_mid = clamped_free_characteristic(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Angular frequencies `(κ_j / L)²` of the first `count` modes of a
/// clamped-free Euler-Bernoulli beam with unit stiffness and density.
pub fn beam_clamped_free_frequencies(length: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| {
            let k = clamped_free_root(j) / length;
            k * k
        })
        .collect()
}

/// `cosh √a + cos √a`, the determinant whose positivity excludes purely
/// imaginary eigenvalues of the undamped beams.
pub fn neweq_determinant(a: f64) -> Result<f64, SpectralError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpectralError::NonpositiveParameter(a));
    }
    let r = a.sqrt();
    Ok(r.cosh() + r.cos())
}
