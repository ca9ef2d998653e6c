//! Global assembly of the pencil `(B, K)`.
//!
//! `B = diag(S, M)` is the discrete energy Gram and
//! `K = [[0, S], [-S, -D]]` is the Galerkin matrix of the weak generator
//! form, so `B ẏ = K y` is the semi-discrete system. The force balance and
//! moment-free conditions at the interfaces are natural for this form and
//! never appear explicitly.

use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::model::{classify_damping, DampingCase, StructureConfig};

use super::element::{element_matrix, ElementKind};
use super::mesh::{DofMap, Mesh, SegmentKind};
use super::FemError;

/// Collects element contributions and sums every global entry in a fixed
/// order, independent of the order elements were visited in.
#[derive(Debug)]
pub(crate) struct Assembler {
    size: usize,
    // (row, col, segment, element, value)
    entries: Vec<(usize, usize, u8, usize, f64)>,
}

impl Assembler {
    pub(crate) fn new(size: usize) -> Self {
        Assembler {
            size,
            entries: Vec::new(),
        }
    }

    pub(crate) fn add(
        &mut self,
        segment: u8,
        element: usize,
        dofs: &[Option<usize>],
        local: &DMatrix<f64>,
        scale: f64,
    ) {
        for (a, row) in dofs.iter().enumerate() {
            let Some(row) = *row else { continue };
            for (b, col) in dofs.iter().enumerate() {
                let Some(col) = *col else { continue };
                self.entries
                    .push((row, col, segment, element, scale * local[(a, b)]));
            }
        }
    }

    pub(crate) fn finish(mut self) -> DMatrix<f64> {
        self.entries
            .sort_unstable_by_key(|&(r, c, s, e, _)| (r, c, s, e));
        let mut out = DMatrix::zeros(self.size, self.size);
        for (r, c, _, _, v) in self.entries {
            out[(r, c)] += v;
        }
        out
    }
}

/// The semi-discrete system `B ẏ = K y` on `y = (p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPencil {
    /// Position Gram (bending energy on the beams, tension energy on the string).
    pub s: DMatrix<f64>,
    /// Velocity mass matrix.
    pub m: DMatrix<f64>,
    /// Damping matrix.
    pub d: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub regime: DampingCase,
}

impl SystemPencil {
    pub fn from_blocks(
        s: DMatrix<f64>,
        m: DMatrix<f64>,
        d: DMatrix<f64>,
        regime: DampingCase,
    ) -> Self {
        let n = s.nrows();
        assert!(
            s.is_square() && m.shape() == (n, n) && d.shape() == (n, n),
            "pencil blocks must be square and of equal size"
        );
        let mut b = DMatrix::zeros(2 * n, 2 * n);
        b.view_mut((0, 0), (n, n)).copy_from(&s);
        b.view_mut((n, n), (n, n)).copy_from(&m);
        let mut k = DMatrix::zeros(2 * n, 2 * n);
        k.view_mut((0, n), (n, n)).copy_from(&s);
        k.view_mut((n, 0), (n, n)).copy_from(&(-&s));
        k.view_mut((n, n), (n, n)).copy_from(&(-&d));
        SystemPencil {
            s,
            m,
            d,
            b,
            k,
            regime,
        }
    }

    /// Number of position unknowns `N`.
    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    /// Dimension `2N` of the first-order system.
    pub fn dim(&self) -> usize {
        2 * self.n()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ElementOrder {
    Forward,
    Reversed,
}

pub fn assemble_pencil(
    cfg: &StructureConfig,
    mesh: &Mesh,
    dofs: &DofMap,
) -> Result<SystemPencil, FemError> {
    assemble_ordered(cfg, mesh, dofs, ElementOrder::Forward)
}

pub(crate) fn assemble_ordered(
    cfg: &StructureConfig,
    mesh: &Mesh,
    dofs: &DofMap,
    order: ElementOrder,
) -> Result<SystemPencil, FemError> {
    let n = dofs.total;
    let mut s = Assembler::new(n);
    let mut m = Assembler::new(n);
    let mut d = Assembler::new(n);

    let mut segments = vec![
        (SegmentKind::Beam1, 0u8, cfg.rho1),
        (SegmentKind::String, 1u8, cfg.beta),
        (SegmentKind::Beam2, 2u8, cfg.rho2),
    ];
    if order == ElementOrder::Reversed {
        segments.reverse();
    }

    for (kind, tag, damping) in segments {
        let seg = mesh.segment(kind);
        let h = seg.h();
        let (stiff, mass, damp) = if kind == SegmentKind::String {
            let mass = element_matrix(ElementKind::StringMass, h)?;
            (
                element_matrix(ElementKind::StringStiffness, h)?,
                mass.clone(),
                mass,
            )
        } else {
            (
                element_matrix(ElementKind::BeamBending, h)?,
                element_matrix(ElementKind::BeamMass, h)?,
                element_matrix(ElementKind::BeamSlopeGram, h)?,
            )
        };
        let mut elements: Vec<usize> = (0..seg.elements).collect();
        if order == ElementOrder::Reversed {
            elements.reverse();
        }
        for e in elements {
            let local = dofs.element_dofs(kind, e);
            s.add(tag, e, &local, &stiff, 1.0);
            m.add(tag, e, &local, &mass, 1.0);
            if damping > 0.0 {
                d.add(tag, e, &local, &damp, damping);
            }
        }
    }

    Ok(SystemPencil::from_blocks(
        s.finish(),
        m.finish(),
        d.finish(),
        classify_damping(cfg),
    ))
}

fn isolated_regime(damping: f64) -> DampingCase {
    if damping == 0.0 {
        DampingCase::Conservative
    } else {
        DampingCase::Other
    }
}

/// Damped string `v_tt - v_xx + beta v_t = 0` on `(0, length)` with both
/// ends fixed, as a standalone pencil.
pub fn string_pencil(length: f64, elements: usize, beta: f64) -> Result<SystemPencil, FemError> {
    if elements < 2 {
        return Err(FemError::ZeroElements);
    }
    let h = length / elements as f64;
    let stiff = element_matrix(ElementKind::StringStiffness, h)?;
    let mass = element_matrix(ElementKind::StringMass, h)?;
    let n = elements - 1;
    let index = |node: usize| (node >= 1 && node <= n).then(|| node - 1);
    let (mut s, mut m, mut d) = (Assembler::new(n), Assembler::new(n), Assembler::new(n));
    for e in 0..elements {
        let local = [index(e), index(e + 1)];
        s.add(0, e, &local, &stiff, 1.0);
        m.add(0, e, &local, &mass, 1.0);
        if beta > 0.0 {
            d.add(0, e, &local, &mass, beta);
        }
    }
    Ok(SystemPencil::from_blocks(
        s.finish(),
        m.finish(),
        d.finish(),
        isolated_regime(beta),
    ))
}

/// Beam `u_tt + u_xxxx - rho u_txx = 0` on `(0, length)`, clamped at 0
/// and free at `length`, as a standalone pencil.
pub fn clamped_free_beam_pencil(
    length: f64,
    elements: usize,
    rho: f64,
) -> Result<SystemPencil, FemError> {
    if elements == 0 {
        return Err(FemError::ZeroElements);
    }
    let h = length / elements as f64;
    let bend = element_matrix(ElementKind::BeamBending, h)?;
    let mass = element_matrix(ElementKind::BeamMass, h)?;
    let slope = element_matrix(ElementKind::BeamSlopeGram, h)?;
    let n = 2 * elements;
    let node = |i: usize| -> [Option<usize>; 2] {
        if i == 0 {
            [None, None]
        } else {
            [Some(2 * (i - 1)), Some(2 * (i - 1) + 1)]
        }
    };
    let (mut s, mut m, mut d) = (Assembler::new(n), Assembler::new(n), Assembler::new(n));
    for e in 0..elements {
        let (a, b) = (node(e), node(e + 1));
        let local = [a[0], a[1], b[0], b[1]];
        s.add(0, e, &local, &bend, 1.0);
        m.add(0, e, &local, &mass, 1.0);
        if rho > 0.0 {
            d.add(0, e, &local, &slope, rho);
        }
    }
    Ok(SystemPencil::from_blocks(
        s.finish(),
        m.finish(),
        d.finish(),
        isolated_regime(rho),
    ))
}

/// Writes the nonzero entries of a matrix as `row col value` lines
/// (0-based indices, 17 significant digits).
pub fn write_coordinate<W: Write>(out: &mut W, matrix: &DMatrix<f64>) -> io::Result<()> {
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            let v = matrix[(r, c)];
            if v != 0.0 {
                writeln!(out, "{} {} {:.16e}", r, c, v)?;
            }
        }
    }
    Ok(())
}
