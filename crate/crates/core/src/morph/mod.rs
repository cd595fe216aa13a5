//! Rooted isomorphism of triangulation balls, patch embedding and the metric
//! on pointed triangulations.

mod code;
mod embed;
mod metric;

use crate::complex::{interior, Dart, Triangulation, Vertex};

pub use code::{
    automorphism_count, canonical_code, canonical_traversal, traverse, vertex_code,
    AutomorphismCount, CanonicalCode, Traversal,
};
pub use embed::{embed, Embedding};
pub use metric::{delta, delta_hat, sphere_bundle, DeltaHat, SphereBundle};

/// Constraint on the decorations an embedding may see.
#[derive(Clone, Debug, PartialEq)]
pub enum Omega {
    /// Host decorations must equal the patch's own decorations.
    Exact,
    /// Per-dart, per-coordinate closed intervals, indexed by patch dart.
    Box(Vec<Vec<(f64, f64)>>),
    /// Any decoration is permitted.
    Wildcard,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PatchError {
    #[error("marked dart {0} is not a dart of the patch")]
    MarkedOutOfRange(u32),
    #[error("box constraint lists {found} darts, patch has {expected}")]
    BoxDartCount { expected: usize, found: usize },
    #[error("box constraint for dart {dart} has {found} intervals, expected {expected}")]
    BoxDimension {
        dart: String,
        expected: usize,
        found: usize,
    },
    #[error("box constraint for dart {0} has an empty or non-finite interval")]
    BoxInterval(String),
}

/// A finite triangulation with boundary, a marked dart and a decoration
/// constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub tri: Triangulation,
    pub marked: Dart,
    pub omega: Omega,
}

impl Patch {
    pub fn new(tri: Triangulation, marked: Dart, omega: Omega) -> Result<Self, PatchError> {
        if marked.idx() >= tri.num_darts() {
            return Err(PatchError::MarkedOutOfRange(marked.0));
        }
        if let Omega::Box(bounds) = &omega {
            if bounds.len() != tri.num_darts() {
                return Err(PatchError::BoxDartCount {
                    expected: tri.num_darts(),
                    found: bounds.len(),
                });
            }
            for (d, b) in tri.darts().zip(bounds) {
                if b.len() != tri.decoration_dim() {
                    return Err(PatchError::BoxDimension {
                        dart: tri.dart_name(d),
                        expected: tri.decoration_dim(),
                        found: b.len(),
                    });
                }
                if b.iter().any(|&(lo, hi)| !(lo <= hi) || lo.is_nan() || hi.is_nan()) {
                    return Err(PatchError::BoxInterval(tri.dart_name(d)));
                }
            }
        }
        Ok(Self { tri, marked, omega })
    }

    /// Patch consisting of the marked dart alone, with no decoration
    /// constraint. Every pointed triangulation contains it.
    pub fn single_dart(dim: usize) -> Self {
        let tri = Triangulation::single_edge(0, 1, dim, crate::complex::DEFAULT_DEGREE_BOUND);
        let marked = tri.dart_by_labels(0, 1).unwrap();
        Self {
            tri,
            marked,
            omega: Omega::Wildcard,
        }
    }

    /// Whether decoration `value` is allowed on patch dart `d`.
    pub fn permits(&self, d: Dart, value: &[f64]) -> bool {
        match &self.omega {
            Omega::Wildcard => true,
            Omega::Exact => self.tri.decoration(d) == value,
            Omega::Box(bounds) => {
                let b = &bounds[d.idx()];
                b.len() == value.len()
                    && b.iter().zip(value).all(|(&(lo, hi), &x)| lo <= x && x <= hi)
            }
        }
    }

    pub fn interior(&self, n: usize) -> Vec<Vertex> {
        interior(&self.tri, n)
    }

    /// Largest distance from the tail of the marked dart.
    pub fn radius(&self) -> usize {
        let src = self.tri.tail(self.marked);
        self.tri
            .distances(src, usize::MAX)
            .into_iter()
            .filter(|&d| d != u32::MAX)
            .max()
            .unwrap_or(0) as usize
    }
}

/// A triangulation with a distinguished dart.
#[derive(Copy, Clone, Debug)]
pub struct Pointed<'a> {
    pub tri: &'a Triangulation,
    pub root: Dart,
}

impl<'a> Pointed<'a> {
    pub fn new(tri: &'a Triangulation, root: Dart) -> Self {
        assert!(root.idx() < tri.num_darts(), "root is not a dart of tri");
        Self { tri, root }
    }
}
