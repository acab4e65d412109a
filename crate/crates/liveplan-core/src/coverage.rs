//! Test configuration generation from environment coverage criteria.
//!
//! Each CI along a call path is assigned a mixture: an assignment of a
//! number of occurrences over the CI's boundary environments. The coverage
//! criterion fixes which combinations of per-CI mixtures have to be covered:
//! the full cartesian product, a strength-two covering array, or a
//! strength-one covering array.
//!
//! All generation is referentially transparent: the same input yields a
//! bit-identical output.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::ids::{CiId, EnvId};
use crate::model::{CoverageCriterion, CoverageKind, SystemModel};
use crate::path::CallPath;

/// An assignment of occurrence counts over the boundary environments of one
/// CI; the width is the sum of the counts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mixture {
    occurrences: BTreeMap<EnvId, u32>,
}

impl Mixture {
    pub fn new(occurrences: BTreeMap<EnvId, u32>) -> Self {
        let occurrences = occurrences.into_iter().filter(|(_, n)| *n > 0).collect();
        Self { occurrences }
    }

    pub fn width(&self) -> u32 {
        self.occurrences.values().sum()
    }

    pub fn occurrences(&self) -> &BTreeMap<EnvId, u32> {
        &self.occurrences
    }

    pub fn environments(&self) -> impl Iterator<Item = &EnvId> {
        self.occurrences.keys()
    }
}

impl fmt::Display for Mixture {
    /// `{E1.2}` for single occurrences, `{E1.1:2,E1.2}` for wider mixtures.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (env, count) in &self.occurrences {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            if *count == 1 {
                write!(f, "{env}")?;
            } else {
                write!(f, "{env}:{count}")?;
            }
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Mixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mixture{self}")
    }
}

/// One mixture per CI along a call path: the thing deployed before runs
/// execute and torn down after.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TestConfiguration {
    pub path: CallPath,
    pub assignment: BTreeMap<CiId, Mixture>,
}

impl TestConfiguration {
    pub fn new(path: CallPath, assignment: BTreeMap<CiId, Mixture>) -> Self {
        Self { path, assignment }
    }

    /// The assignment restricted to the given vertices, or `None` when some
    /// vertex is not assigned here.
    pub fn restrict_to(&self, vertices: &[CiId]) -> Option<BTreeMap<CiId, Mixture>> {
        let mut out = BTreeMap::new();
        for v in vertices {
            out.insert(v.clone(), self.assignment.get(v)?.clone());
        }
        Some(out)
    }

    /// True when this configuration assigns every CI of `other` the same
    /// mixture `other` does (vertex-level containment).
    pub fn covers_assignment(&self, other: &BTreeMap<CiId, Mixture>) -> bool {
        other
            .iter()
            .all(|(ci, m)| self.assignment.get(ci) == Some(m))
    }
}

impl fmt::Display for TestConfiguration {
    /// Path-ordered rendering, e.g. `{CI3:{E3.1},CI2:{E2.1},CI5:{E1.2}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for ci in self.path.vertices() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{ci}:")?;
            match self.assignment.get(ci) {
                Some(m) => write!(f, "{m}")?,
                None => f.write_str("{}")?,
            }
        }
        f.write_str("}")
    }
}

impl fmt::Debug for TestConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestConfiguration{self}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverageError {
    /// Mixture width must be at least one.
    ZeroWidth,
    /// The CI has no boundary environments to build mixtures from.
    NoEnvironments(CiId),
    /// No deployable mixture of the requested width exists for the CI.
    NoMixtures(CiId, u32),
}

impl fmt::Display for CoverageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageError::ZeroWidth => write!(f, "mixture width must be at least 1"),
            CoverageError::NoEnvironments(ci) => {
                write!(f, "CI {ci} has no boundary environments")
            }
            CoverageError::NoMixtures(ci, w) => {
                write!(f, "CI {ci} has no deployable mixture of width {w}")
            }
        }
    }
}

impl core::error::Error for CoverageError {}

/// All distinct occurrence assignments over `envs` summing to `width`, in a
/// deterministic canonical order (the lexicographically first environment is
/// exhausted first).
///
/// Mixtures whose occurrence count for an environment exceeds that
/// environment's hosting-node count are excluded: such a mixture could never
/// be deployed.
pub fn enumerate_mixtures(
    envs: &[(EnvId, usize)],
    width: u32,
) -> Result<Vec<Mixture>, CoverageError> {
    if width == 0 {
        return Err(CoverageError::ZeroWidth);
    }
    let mut sorted: Vec<&(EnvId, usize)> = envs.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::new();
    let mut counts: Vec<u32> = Vec::new();
    fill(&sorted, width, &mut counts, &mut out);
    Ok(out)
}

fn fill(envs: &[&(EnvId, usize)], remaining: u32, counts: &mut Vec<u32>, out: &mut Vec<Mixture>) {
    let position = counts.len();
    if position == envs.len() {
        if remaining == 0 {
            let occurrences = envs
                .iter()
                .zip(counts.iter())
                .filter(|(_, c)| **c > 0)
                .map(|((env, _), c)| (env.clone(), *c))
                .collect();
            out.push(Mixture { occurrences });
        }
        return;
    }
    let cap = core::cmp::min(remaining, envs[position].1 as u32);
    for count in (0..=cap).rev() {
        counts.push(count);
        fill(envs, remaining - count, counts, out);
        counts.pop();
    }
}

/// Environment list of one CI as (id, hosting-node count) pairs.
fn environment_sizes(system: &SystemModel, ci: &CiId) -> Vec<(EnvId, usize)> {
    system
        .environments_of(ci)
        .map(|e| (e.id.clone(), e.hosting_nodes.len()))
        .collect()
}

/// Deployable mixtures of `ci` for the given width, in canonical order.
pub fn mixtures_of(
    system: &SystemModel,
    ci: &CiId,
    width: u32,
) -> Result<Vec<Mixture>, CoverageError> {
    let envs = environment_sizes(system, ci);
    if envs.is_empty() {
        return Err(CoverageError::NoEnvironments(ci.clone()));
    }
    let mixtures = enumerate_mixtures(&envs, width)?;
    if mixtures.is_empty() {
        return Err(CoverageError::NoMixtures(ci.clone(), width));
    }
    Ok(mixtures)
}

/// Per-CI mixture lists for every CI on a path.
pub fn path_mixtures(
    system: &SystemModel,
    path: &CallPath,
    width: u32,
) -> Result<Vec<(CiId, Vec<Mixture>)>, CoverageError> {
    path.vertices()
        .iter()
        .map(|ci| Ok((ci.clone(), mixtures_of(system, ci, width)?)))
        .collect()
}

/// The set of test configurations mandated by a coverage criterion for one
/// call path, in a deterministic canonical order.
pub fn generate_configurations(
    path: &CallPath,
    criterion: CoverageCriterion,
    system: &SystemModel,
) -> Result<Vec<TestConfiguration>, CoverageError> {
    let per_ci = path_mixtures(system, path, criterion.width)?;
    let rows = match criterion.kind {
        CoverageKind::AllBeMixturesPaths => product_rows(&per_ci),
        CoverageKind::AllBeMixtures => strength_one_rows(&per_ci),
        CoverageKind::PairwiseBeMixtures => pairwise_rows(&per_ci),
    };
    Ok(rows
        .into_iter()
        .map(|indices| materialize(path, &per_ci, &indices))
        .collect())
}

/// Number of configurations the criterion mandates. Always equals the length
/// of [`generate_configurations`] for the same input.
pub fn configuration_count(
    path: &CallPath,
    criterion: CoverageCriterion,
    system: &SystemModel,
) -> Result<usize, CoverageError> {
    let per_ci = path_mixtures(system, path, criterion.width)?;
    Ok(match criterion.kind {
        CoverageKind::AllBeMixturesPaths => {
            per_ci.iter().map(|(_, ms)| ms.len()).product()
        }
        CoverageKind::AllBeMixtures => {
            per_ci.iter().map(|(_, ms)| ms.len()).max().unwrap_or(0)
        }
        CoverageKind::PairwiseBeMixtures => pairwise_rows(&per_ci).len(),
    })
}

fn materialize(
    path: &CallPath,
    per_ci: &[(CiId, Vec<Mixture>)],
    indices: &[usize],
) -> TestConfiguration {
    let assignment = per_ci
        .iter()
        .zip(indices)
        .map(|((ci, mixtures), idx)| (ci.clone(), mixtures[*idx].clone()))
        .collect();
    TestConfiguration::new(path.clone(), assignment)
}

/// Cartesian product in odometer order: the first CI on the path is the most
/// significant position, the last varies fastest.
fn product_rows(per_ci: &[(CiId, Vec<Mixture>)]) -> Vec<Vec<usize>> {
    let radices: Vec<usize> = per_ci.iter().map(|(_, ms)| ms.len()).collect();
    let total: usize = radices.iter().product();
    let mut rows = Vec::with_capacity(total);
    let mut current = alloc::vec![0usize; radices.len()];
    for _ in 0..total {
        rows.push(current.clone());
        for pos in (0..radices.len()).rev() {
            current[pos] += 1;
            if current[pos] < radices[pos] {
                break;
            }
            current[pos] = 0;
        }
    }
    rows
}

/// Strength-one covering array: as many rows as the largest mixture list,
/// every CI cycling through its mixtures so each appears at least once.
fn strength_one_rows(per_ci: &[(CiId, Vec<Mixture>)]) -> Vec<Vec<usize>> {
    let rows = per_ci.iter().map(|(_, ms)| ms.len()).max().unwrap_or(0);
    (0..rows)
        .map(|r| per_ci.iter().map(|(_, ms)| r % ms.len()).collect())
        .collect()
}

/// Strength-two covering array built greedily: repeatedly emit the candidate
/// row covering the most uncovered mixture pairs, ties broken by canonical
/// row order. Deterministic and seedless; row count is not promised minimal.
fn pairwise_rows(per_ci: &[(CiId, Vec<Mixture>)]) -> Vec<Vec<usize>> {
    if per_ci.len() < 2 {
        // One factor degenerates to its level list.
        return strength_one_rows(per_ci);
    }
    let candidates = product_rows(per_ci);
    let mut uncovered: BTreeSet<(usize, usize, usize, usize)> = BTreeSet::new();
    for i in 0..per_ci.len() {
        for j in (i + 1)..per_ci.len() {
            for mi in 0..per_ci[i].1.len() {
                for mj in 0..per_ci[j].1.len() {
                    uncovered.insert((i, j, mi, mj));
                }
            }
        }
    }
    let pairs_of = |row: &[usize]| -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..row.len() {
            for j in (i + 1)..row.len() {
                out.push((i, j, row[i], row[j]));
            }
        }
        out
    };
    let mut rows = Vec::new();
    while !uncovered.is_empty() {
        let mut best: Option<(usize, &Vec<usize>)> = None;
        for row in &candidates {
            let gain = pairs_of(row)
                .into_iter()
                .filter(|p| uncovered.contains(p))
                .count();
            if gain > best.map_or(0, |(g, _)| g) {
                best = Some((gain, row));
            }
        }
        let (_, row) = best.expect("uncovered pairs imply a candidate with positive gain");
        for p in pairs_of(row) {
            uncovered.remove(&p);
        }
        rows.push(row.clone());
    }
    rows
}
