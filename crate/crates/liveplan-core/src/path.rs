//! CI call graph and call-path algebra.
//!
//! A call path is a simple path (in the graph-theory sense) in the CI call
//! graph. Path `A` is a sub-path of `B` when all vertices of `A` are vertices
//! of `B` and all edges of `A` are edges of `B`; `B` is then a super-path of
//! `A`. A max-path of a set is the member that is a super-path of every
//! member.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::ids::CiId;

/// Directed call graph over configured instances.
///
/// An edge `source -> target` means the source CI calls the target CI; its
/// weight is the tolerance time of the source to the unavailability of the
/// target.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub vertices: BTreeSet<CiId>,
    /// (source, target) -> tolerance time of the source.
    pub edges: BTreeMap<(CiId, CiId), Duration>,
}

impl CallGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, ci: CiId) {
        self.vertices.insert(ci);
    }

    pub fn add_edge(&mut self, source: CiId, target: CiId, tolerance: Duration) {
        self.vertices.insert(source.clone());
        self.vertices.insert(target.clone());
        self.edges.insert((source, target), tolerance);
    }

    pub fn has_edge(&self, source: &CiId, target: &CiId) -> bool {
        self.edges.contains_key(&(source.clone(), target.clone()))
    }

    /// Tolerance times of the CIs that directly depend on `ci`, i.e. the
    /// weights of the edges coming into `ci`.
    pub fn dependent_tolerances<'a>(&'a self, ci: &'a CiId) -> impl Iterator<Item = Duration> + 'a {
        self.edges
            .iter()
            .filter(move |((_, target), _)| target == ci)
            .map(|(_, tol)| *tol)
    }

    /// Minimum tolerance among direct dependents, or `None` when `ci` has no
    /// dependents (unconstrained).
    pub fn min_dependent_tolerance(&self, ci: &CiId) -> Option<Duration> {
        self.dependent_tolerances(ci).min()
    }

    /// CIs that transitively depend on `ci` (walk the edges backwards).
    pub fn transitive_dependents(&self, ci: &CiId) -> BTreeSet<CiId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&CiId> = Vec::new();
        stack.push(ci);
        while let Some(current) = stack.pop() {
            for (source, target) in self.edges.keys() {
                if target == current && !seen.contains(source) && source != ci {
                    seen.insert(source.clone());
                    stack.push(source);
                }
            }
        }
        seen
    }
}

/// A simple path in the call graph, stored as its ordered vertex list.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CallPath {
    vertices: Vec<CiId>,
}

/// Why a vertex list is not a valid call path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathError {
    Empty,
    RepeatedVertex(CiId),
    UnknownVertex(CiId),
    MissingEdge(CiId, CiId),
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::Empty => write!(f, "call path has no vertices"),
            PathError::RepeatedVertex(ci) => write!(f, "call path repeats vertex {ci}"),
            PathError::UnknownVertex(ci) => write!(f, "call path vertex {ci} is not in the call graph"),
            PathError::MissingEdge(a, b) => write!(f, "call graph has no edge {a} -> {b}"),
        }
    }
}

impl core::error::Error for PathError {}

impl CallPath {
    /// Builds a path after checking it is simple and every consecutive pair
    /// is a graph edge. Single-vertex paths have no edges to check.
    pub fn new(vertices: Vec<CiId>, graph: &CallGraph) -> Result<Self, PathError> {
        if vertices.is_empty() {
            return Err(PathError::Empty);
        }
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !graph.vertices.contains(v) {
                return Err(PathError::UnknownVertex(v.clone()));
            }
            if !seen.insert(v.clone()) {
                return Err(PathError::RepeatedVertex(v.clone()));
            }
        }
        for pair in vertices.windows(2) {
            if !graph.has_edge(&pair[0], &pair[1]) {
                return Err(PathError::MissingEdge(pair[0].clone(), pair[1].clone()));
            }
        }
        Ok(Self { vertices })
    }

    /// Builds a path without graph validation. Intended for tests and for
    /// callers that already validated the vertex list.
    pub fn from_vertices_unchecked(vertices: Vec<CiId>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[CiId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, ci: &CiId) -> bool {
        self.vertices.iter().any(|v| v == ci)
    }

    pub fn vertex_set(&self) -> BTreeSet<CiId> {
        self.vertices.iter().cloned().collect()
    }

    pub fn edge_set(&self) -> BTreeSet<(CiId, CiId)> {
        self.vertices
            .windows(2)
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect()
    }

    /// True iff `self` is a sub-path of `other`: vertices(self) are vertices
    /// of `other` and edges(self) are edges of `other`. Every path is a
    /// sub-path of itself.
    pub fn is_sub_path_of(&self, other: &CallPath) -> bool {
        let other_vertices = other.vertex_set();
        if !self.vertices.iter().all(|v| other_vertices.contains(v)) {
            return false;
        }
        let other_edges = other.edge_set();
        self.vertices
            .windows(2)
            .all(|w| other_edges.contains(&(w[0].clone(), w[1].clone())))
    }
}

impl fmt::Display for CallPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.vertices {
            if !first {
                f.write_str("->")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CallPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CallPath[{self}]")
    }
}

/// True iff vertices(a) are vertices of b and edges(a) are edges of b.
pub fn is_sub_path(a: &CallPath, b: &CallPath) -> bool {
    a.is_sub_path_of(b)
}

/// The unique member of `paths` that is a super-path of every member, or
/// `None` when no such member exists.
///
/// Returns an error on an empty input set.
pub fn max_path<'a, I>(paths: I) -> Result<Option<&'a CallPath>, PathError>
where
    I: IntoIterator<Item = &'a CallPath> + Clone,
{
    let mut any = false;
    for candidate in paths.clone() {
        any = true;
        if paths
            .clone()
            .into_iter()
            .all(|p| p.is_sub_path_of(candidate))
        {
            return Ok(Some(candidate));
        }
    }
    if any {
        Ok(None)
    } else {
        Err(PathError::Empty)
    }
}
