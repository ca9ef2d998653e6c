//! Local element matrices.
//!
//! Beams use Hermite cubics over `(w_left, θ_left, w_right, θ_right)`; the
//! string uses linear Lagrange elements. Every matrix is produced by
//! Gauss-Legendre quadrature that is exact for its integrand degree.

use nalgebra::DMatrix;

use super::FemError;

/// Which bilinear form to integrate over one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// `∫ φ_i'' φ_j''` on a Hermite element.
    BeamBending,
    /// `∫ φ_i' φ_j'` on a Hermite element (structural damping).
    BeamSlopeGram,
    /// `∫ φ_i φ_j` on a Hermite element.
    BeamMass,
    /// `∫ φ_i' φ_j'` on a P1 element.
    StringStiffness,
    /// `∫ φ_i φ_j` on a P1 element.
    StringMass,
}

impl ElementKind {
    pub fn is_beam(self) -> bool {
        matches!(
            self,
            ElementKind::BeamBending | ElementKind::BeamSlopeGram | ElementKind::BeamMass
        )
    }

    pub fn local_size(self) -> usize {
        if self.is_beam() {
            4
        } else {
            2
        }
    }
}

// Gauss-Legendre rules on [-1, 1].
const GAUSS2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_8, 1.0),
    (0.577_350_269_189_625_8, 1.0),
];
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Hermite cubic basis and its first two x-derivatives at `xi ∈ [0, 1]`.
pub fn hermite_basis(xi: f64, h: f64) -> [[f64; 4]; 3] {
    let (x2, x3) = (xi * xi, xi * xi * xi);
    let value = [
        1.0 - 3.0 * x2 + 2.0 * x3,
        h * (xi - 2.0 * x2 + x3),
        3.0 * x2 - 2.0 * x3,
        h * (x3 - x2),
    ];
    let slope = [
        (6.0 * x2 - 6.0 * xi) / h,
        1.0 - 4.0 * xi + 3.0 * x2,
        (6.0 * xi - 6.0 * x2) / h,
        3.0 * x2 - 2.0 * xi,
    ];
    let curvature = [
        (12.0 * xi - 6.0) / (h * h),
        (6.0 * xi - 4.0) / h,
        (6.0 - 12.0 * xi) / (h * h),
        (6.0 * xi - 2.0) / h,
    ];
    [value, slope, curvature]
}

/// Linear basis and its derivative at `xi ∈ [0, 1]`.
pub fn linear_basis(xi: f64, h: f64) -> [[f64; 2]; 2] {
    [[1.0 - xi, xi], [-1.0 / h, 1.0 / h]]
}

pub fn element_matrix(kind: ElementKind, h: f64) -> Result<DMatrix<f64>, FemError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(FemError::NonpositiveLength(h));
    }
    let size = kind.local_size();
    let mut out = DMatrix::zeros(size, size);
    let rule: &[(f64, f64)] = if kind.is_beam() { &GAUSS4 } else { &GAUSS2 };
    for &(s, weight) in rule {
        let xi = 0.5 * (1.0 + s);
        let jw = 0.5 * weight * h;
        let phi: Vec<f64> = match kind {
            ElementKind::BeamBending => hermite_basis(xi, h)[2].to_vec(),
            ElementKind::BeamSlopeGram => hermite_basis(xi, h)[1].to_vec(),
            ElementKind::BeamMass => hermite_basis(xi, h)[0].to_vec(),
            ElementKind::StringStiffness => linear_basis(xi, h)[1].to_vec(),
            ElementKind::StringMass => linear_basis(xi, h)[0].to_vec(),
        };
        for i in 0..size {
            for j in 0..size {
                out[(i, j)] += jw * phi[i] * phi[j];
            }
        }
    }
    // Quadrature sums are symmetric up to rounding; make it exact.
    for i in 0..size {
        for j in 0..i {
            let avg = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Closed-form element matrices from exact polynomial integration.
    fn closed_form(kind: ElementKind, h: f64) -> DMatrix<f64> {
        let h2 = h * h;
        match kind {
            ElementKind::StringStiffness => {
                DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]) / h
            }
            ElementKind::StringMass => {
                DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) * (h / 6.0)
            }
            ElementKind::BeamBending => {
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        12.0, 6.0 * h, -12.0, 6.0 * h, //
                        6.0 * h, 4.0 * h2, -6.0 * h, 2.0 * h2, //
                        -12.0, -6.0 * h, 12.0, -6.0 * h, //
                        6.0 * h, 2.0 * h2, -6.0 * h, 4.0 * h2,
                    ],
                ) / (h * h2)
            }
            ElementKind::BeamSlopeGram => {
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        36.0, 3.0 * h, -36.0, 3.0 * h, //
                        3.0 * h, 4.0 * h2, -3.0 * h, -h2, //
                        -36.0, -3.0 * h, 36.0, -3.0 * h, //
                        3.0 * h, -h2, -3.0 * h, 4.0 * h2,
                    ],
                ) / (30.0 * h)
            }
            ElementKind::BeamMass => {
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        156.0, 22.0 * h, 54.0, -13.0 * h, //
                        22.0 * h, 4.0 * h2, 13.0 * h, -3.0 * h2, //
                        54.0, 13.0 * h, 156.0, -22.0 * h, //
                        -13.0 * h, -3.0 * h2, -22.0 * h, 4.0 * h2,
                    ],
                ) * (h / 420.0)
            }
        }
    }

    const KINDS: [ElementKind; 5] = [
        ElementKind::BeamBending,
        ElementKind::BeamSlopeGram,
        ElementKind::BeamMass,
        ElementKind::StringStiffness,
        ElementKind::StringMass,
    ];

    #[test]
    fn quadrature_matches_exact_integration() {
        for &h in &[1.0, 0.5, 0.05, 1.0 / 3.0, 2.7] {
            for kind in KINDS {
                let got = element_matrix(kind, h).unwrap();
                let want = closed_form(kind, h);
                let scale = want.amax();
                let err = (&got - &want).amax();
                assert!(err <= 1e-13 * scale, "{kind:?} h={h}: err {err:e}");
                assert_eq!(got, got.transpose());
            }
        }
    }

    #[test]
    fn nonpositive_length_rejected() {
        for h in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                element_matrix(ElementKind::BeamMass, h),
                Err(FemError::NonpositiveLength(_))
            ));
        }
    }

    #[test]
    fn rigid_motions_are_in_kernels() {
        // constant and linear fields have zero curvature; constants zero slope
        let h = 0.4;
        let kb = element_matrix(ElementKind::BeamBending, h).unwrap();
        let linear = nalgebra::DVector::from_vec(vec![0.0, 1.0, h, 1.0]);
        assert!((&kb * &linear).amax() < 1e-12);
        let kg = element_matrix(ElementKind::BeamSlopeGram, h).unwrap();
        let constant = nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        assert!((&kg * &constant).amax() < 1e-12);
    }
}
