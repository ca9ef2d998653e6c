//! Discrete states: interpolation of initial data and point evaluation.

use nalgebra::DVector;

use crate::model::{InitialData, Profile};

use super::element::{hermite_basis, linear_basis};
use super::mesh::{DofMap, Mesh, Segment, SegmentKind};
use super::FemError;

/// Position coefficients `p` and velocity coefficients `q`, both in the
/// global DOF numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub p: DVector<f64>,
    pub q: DVector<f64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        StateVector {
            p: DVector::zeros(n),
            q: DVector::zeros(n),
        }
    }

    /// Splits a stacked `(p, q)` vector of length `2N`.
    pub fn from_stacked(y: &DVector<f64>) -> Self {
        let n = y.len() / 2;
        StateVector {
            p: y.rows(0, n).into_owned(),
            q: y.rows(n, n).into_owned(),
        }
    }

    pub fn stacked(&self) -> DVector<f64> {
        let n = self.p.len();
        let mut y = DVector::zeros(2 * n);
        y.rows_mut(0, n).copy_from(&self.p);
        y.rows_mut(n, n).copy_from(&self.q);
        y
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.q.iter()).all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        StateVector {
            p: &self.p * factor,
            q: &self.q * factor,
        }
    }
}

const MATCH_TOL: f64 = 1e-12;

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Nodal values (and slopes when `with_slopes`) of a profile on a segment.
fn nodal(
    profile: &Profile,
    seg: &Segment,
    with_slopes: bool,
    name: &'static str,
) -> Result<(Vec<f64>, Vec<f64>), FemError> {
    let count = seg.elements + 1;
    match profile {
        Profile::Zero => Ok((vec![0.0; count], vec![0.0; count])),
        Profile::Function { value, slope } => {
            let nodes = seg.nodes();
            let values = nodes.iter().map(|&x| value(x)).collect();
            let slopes = if with_slopes {
                nodes.iter().map(|&x| slope(x)).collect()
            } else {
                vec![0.0; count]
            };
            Ok((values, slopes))
        }
        Profile::Samples { values, slopes } => {
            if values.len() != count {
                return Err(FemError::SampleCountMismatch {
                    component: name,
                    expected: count,
                    got: values.len(),
                });
            }
            let slopes = match slopes {
                Some(s) if s.len() != count => {
                    return Err(FemError::SampleCountMismatch {
                        component: name,
                        expected: count,
                        got: s.len(),
                    })
                }
                Some(s) => s.clone(),
                None if with_slopes => finite_difference_slopes(values, seg.h()),
                None => vec![0.0; count],
            };
            Ok((values.clone(), slopes))
        }
    }
}

fn finite_difference_slopes(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    if n == 2 {
        let s = (f[1] - f[0]) / h;
        return vec![s, s];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Writes one (position or velocity) triple into a coefficient vector.
fn fill(
    (u, v, w): (&Profile, &Profile, &Profile),
    names: [&'static str; 3],
    mesh: &Mesh,
    dofs: &DofMap,
) -> Result<DVector<f64>, FemError> {
    let mut out = DVector::zeros(dofs.total);
    let (u_val, u_slope) = nodal(u, &mesh.beam1, true, names[0])?;
    let (v_val, _) = nodal(v, &mesh.string, false, names[1])?;
    let (w_val, w_slope) = nodal(w, &mesh.beam2, true, names[2])?;

    let n1 = mesh.beam1.elements;
    if !agree(u_val[0], 0.0) || !agree(u_slope[0], 0.0) {
        return Err(FemError::ClampViolation {
            component: names[0],
            at: mesh.beam1.start,
        });
    }
    let n3 = mesh.beam2.elements;
    if !agree(w_val[n3], 0.0) || !agree(w_slope[n3], 0.0) {
        return Err(FemError::ClampViolation {
            component: names[2],
            at: mesh.beam2.end,
        });
    }
    let n2 = mesh.string.elements;
    if !agree(u_val[n1], v_val[0]) {
        return Err(FemError::IncompatibleInterface {
            at: mesh.string.start,
            left: u_val[n1],
            right: v_val[0],
        });
    }
    if !agree(v_val[n2], w_val[0]) {
        return Err(FemError::IncompatibleInterface {
            at: mesh.string.end,
            left: v_val[n2],
            right: w_val[0],
        });
    }

    for (node, idx) in dofs.beam1.iter().enumerate() {
        if let Some(i) = idx[0] {
            out[i] = u_val[node];
        }
        if let Some(i) = idx[1] {
            out[i] = u_slope[node];
        }
    }
    // interior string nodes only; the end values are the beam tips
    for node in 1..n2 {
        out[dofs.string[node]] = v_val[node];
    }
    for (node, idx) in dofs.beam2.iter().enumerate() {
        if let Some(i) = idx[0] {
            out[i] = w_val[node];
        }
        if let Some(i) = idx[1] {
            out[i] = w_slope[node];
        }
    }
    Ok(out)
}

/// Nodal interpolation of initial data: value and slope on the beams,
/// value on the string.
pub fn interpolate(
    data: &InitialData,
    mesh: &Mesh,
    dofs: &DofMap,
) -> Result<StateVector, FemError> {
    let p = fill((&data.u0, &data.v0, &data.w0), ["u0", "v0", "w0"], mesh, dofs)?;
    let q = fill((&data.u1, &data.v1, &data.w1), ["u1", "v1", "w1"], mesh, dofs)?;
    Ok(StateVector { p, q })
}

/// Evaluates a coefficient vector at `x` using the element of `kind`
/// that contains it.
pub fn evaluate_on(
    coeffs: &DVector<f64>,
    mesh: &Mesh,
    dofs: &DofMap,
    kind: SegmentKind,
    x: f64,
) -> Result<f64, FemError> {
    let seg = mesh.segment(kind);
    if !seg.contains(x) {
        return Err(FemError::OutOfDomain(x));
    }
    if coeffs.len() != dofs.total {
        return Err(FemError::DimensionMismatch {
            expected: dofs.total,
            got: coeffs.len(),
        });
    }
    let (k, xi) = seg.locate(x);
    let local = dofs.element_dofs(kind, k);
    let coef = |a: usize| local[a].map_or(0.0, |i| coeffs[i]);
    let value = if kind == SegmentKind::String {
        let phi = linear_basis(xi, seg.h())[0];
        phi[0] * coef(0) + phi[1] * coef(1)
    } else {
        let phi = hermite_basis(xi, seg.h())[0];
        (0..4).map(|a| phi[a] * coef(a)).sum()
    };
    Ok(value)
}

/// Displacement and velocity at `x ∈ [l0, l3]`.
pub fn evaluate_state(
    y: &StateVector,
    mesh: &Mesh,
    dofs: &DofMap,
    x: f64,
) -> Result<(f64, f64), FemError> {
    let kind = if mesh.beam1.contains(x) {
        SegmentKind::Beam1
    } else if mesh.string.contains(x) {
        SegmentKind::String
    } else if mesh.beam2.contains(x) {
        SegmentKind::Beam2
    } else {
        return Err(FemError::OutOfDomain(x));
    };
    Ok((
        evaluate_on(&y.p, mesh, dofs, kind, x)?,
        evaluate_on(&y.q, mesh, dofs, kind, x)?,
    ))
}
