//! Uniform meshes of the three intervals and the global DOF numbering.

use crate::model::StructureConfig;

use super::FemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Beam1,
    String,
    Beam2,
}

/// One interval split into `elements` equal pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: f64,
    pub end: f64,
    pub elements: usize,
}

impl Segment {
    pub fn h(&self) -> f64 {
        (self.end - self.start) / self.elements as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        // exact endpoints, no accumulated drift
        if i == self.elements {
            self.end
        } else {
            self.start + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.elements).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.start <= x && x <= self.end
    }

    /// Element index and local coordinate `xi ∈ [0, 1]` of a point.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.h();
        let raw = ((x - self.start) / h).floor();
        let k = if raw < 0.0 {
            0
        } else {
            (raw as usize).min(self.elements - 1)
        };
        let xi = ((x - self.node(k)) / h).clamp(0.0, 1.0);
        (k, xi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub beam1: Segment,
    pub string: Segment,
    pub beam2: Segment,
}

impl Mesh {
    pub fn segments(&self) -> [&Segment; 3] {
        [&self.beam1, &self.string, &self.beam2]
    }

    pub fn segment(&self, kind: SegmentKind) -> &Segment {
        match kind {
            SegmentKind::Beam1 => &self.beam1,
            SegmentKind::String => &self.string,
            SegmentKind::Beam2 => &self.beam2,
        }
    }

    pub fn start(&self) -> f64 {
        self.beam1.start
    }

    pub fn end(&self) -> f64 {
        self.beam2.end
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.beam1.elements, self.string.elements, self.beam2.elements)
    }
}

pub fn build_mesh(
    cfg: &StructureConfig,
    n1: usize,
    n2: usize,
    n3: usize,
) -> Result<Mesh, FemError> {
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(FemError::ZeroElements);
    }
    let segment = |kind, start, end, elements| Segment {
        kind,
        start,
        end,
        elements,
    };
    Ok(Mesh {
        beam1: segment(SegmentKind::Beam1, cfg.l0, cfg.l1, n1),
        string: segment(SegmentKind::String, cfg.l1, cfg.l2, n2),
        beam2: segment(SegmentKind::Beam2, cfg.l2, cfg.l3, n3),
    })
}

/// Global index of a beam node's (deflection, slope); `None` if clamped.
pub type BeamNodeDofs = [Option<usize>; 2];

/// Global numbering: beam 1 node-major (value before slope), then string
/// interior nodes, then beam 2. The string end nodes reuse the beam tip
/// deflections; the beam tip slopes stay free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub total: usize,
    pub beam1: Vec<BeamNodeDofs>,
    pub string: Vec<usize>,
    pub beam2: Vec<BeamNodeDofs>,
}

impl DofMap {
    /// Shared deflection index at `l1`.
    pub fn left_interface(&self) -> usize {
        self.string[0]
    }

    /// Shared deflection index at `l2`.
    pub fn right_interface(&self) -> usize {
        *self.string.last().expect("string has at least two nodes")
    }

    /// Local DOFs of element `k` in the given segment, in element order.
    pub fn element_dofs(&self, kind: SegmentKind, k: usize) -> Vec<Option<usize>> {
        match kind {
            SegmentKind::Beam1 => beam_element(&self.beam1, k),
            SegmentKind::Beam2 => beam_element(&self.beam2, k),
            SegmentKind::String => vec![Some(self.string[k]), Some(self.string[k + 1])],
        }
    }

    /// Global indices that belong to the given segment (interface
    /// deflections are reported for every segment touching them).
    pub fn segment_dofs(&self, kind: SegmentKind) -> Vec<usize> {
        let mut out: Vec<usize> = match kind {
            SegmentKind::Beam1 => self.beam1.iter().flatten().flatten().copied().collect(),
            SegmentKind::Beam2 => self.beam2.iter().flatten().flatten().copied().collect(),
            SegmentKind::String => self.string.clone(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn beam_element(nodes: &[BeamNodeDofs], k: usize) -> Vec<Option<usize>> {
    vec![nodes[k][0], nodes[k][1], nodes[k + 1][0], nodes[k + 1][1]]
}

pub fn build_dof_map(mesh: &Mesh) -> DofMap {
    let (n1, n2, n3) = mesh.counts();
    let mut next = 0usize;
    let mut take = || {
        let i = next;
        next += 1;
        i
    };

    let mut beam1 = vec![[None, None]];
    for _ in 1..=n1 {
        beam1.push([Some(take()), Some(take())]);
    }
    let left = beam1[n1][0].expect("beam 1 tip deflection is free");

    let mut string = vec![left];
    for _ in 1..n2 {
        string.push(take());
    }

    let mut beam2 = Vec::with_capacity(n3 + 1);
    for _ in 0..n3 {
        beam2.push([Some(take()), Some(take())]);
    }
    beam2.push([None, None]);
    string.push(beam2[0][0].expect("beam 2 tip deflection is free"));

    DofMap {
        total: next,
        beam1,
        string,
        beam2,
    }
}
