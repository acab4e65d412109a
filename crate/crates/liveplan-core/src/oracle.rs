//! Independent brute-force verifiers for the engine's optimality claims,
//! plus a disturbance simulator that replays a plan.
//!
//! Nothing here shares code with the engine's decision paths: the order
//! graph, the exhaustive method-selection search, and the exhaustive
//! ordering search recompute their answers from first principles so the
//! engine can be checked against them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::coverage::{Mixture, TestConfiguration};
use crate::ids::{CiId, SiId};
use crate::merging::Grouping;
use crate::methods::{self, CostBreakdown, Method};
use crate::model::Model;
use crate::plan::TestPlan;
use crate::runs::Run;

/// How two test configurations relate under the sub-configuration order:
/// `Less` means every CI of the first appears in the second with an
/// identical mixture (and they differ somewhere).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigOrder {
    Less,
    Greater,
    Equal,
    Incomparable,
}

/// Compares two configuration assignments CI by CI.
pub fn subconfig_compare(
    c1: &BTreeMap<CiId, Mixture>,
    c2: &BTreeMap<CiId, Mixture>,
) -> ConfigOrder {
    let one_in_two = c1.iter().all(|(ci, m)| c2.get(ci) == Some(m));
    let two_in_one = c2.iter().all(|(ci, m)| c1.get(ci) == Some(m));
    match (one_in_two, two_in_one) {
        (true, true) => ConfigOrder::Equal,
        (true, false) => ConfigOrder::Less,
        (false, true) => ConfigOrder::Greater,
        (false, false) => ConfigOrder::Incomparable,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// The instance is bigger than the brute-force cap allows.
    CapExceeded { what: &'static str, size: usize, cap: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::CapExceeded { what, size, cap } => {
                write!(f, "{what} size {size} exceeds the oracle cap {cap}")
            }
        }
    }
}

impl core::error::Error for OracleError {}

/// Default brute-force caps; override per call where the CLI allows it.
pub const DEFAULT_RUN_CAP: usize = 200;
pub const DEFAULT_CI_CAP: usize = 5;
pub const DEFAULT_CASE_CAP: usize = 8;

/// The directed graph of the sub-configuration order over a run set: an
/// edge points from a run to every run with a strictly smaller
/// configuration, so sources are the maximal configurations.
#[derive(Clone, Debug, Default)]
pub struct OrderGraph {
    pub runs: Vec<Run>,
    /// Edge (u, v): run v's configuration is a sub-configuration of run u's.
    pub edges: Vec<(usize, usize)>,
}

impl OrderGraph {
    pub fn build(runs: &[Run]) -> Self {
        let runs: Vec<Run> = runs.to_vec();
        let mut edges = Vec::new();
        for (i, a) in runs.iter().enumerate() {
            for (j, b) in runs.iter().enumerate() {
                if i != j && subconfig_compare(&b.assignment, &a.assignment) == ConfigOrder::Less {
                    edges.push((i, j));
                }
            }
        }
        Self { runs, edges }
    }

    /// Runs with no incoming edge, i.e. no strict super-configuration in the
    /// set.
    pub fn source_indices(&self) -> Vec<usize> {
        (0..self.runs.len())
            .filter(|v| !self.edges.iter().any(|(_, target)| target == v))
            .collect()
    }
}

/// The minimum number of test configurations that must be deployed for all
/// runs to execute: the number of distinct maximal configurations of the
/// run set.
pub fn minimal_config_count(runs: &[Run], cap: usize) -> Result<usize, OracleError> {
    if runs.len() > cap {
        return Err(OracleError::CapExceeded {
            what: "run set",
            size: runs.len(),
            cap,
        });
    }
    let distinct: Vec<&BTreeMap<CiId, Mixture>> = {
        let set: BTreeSet<&BTreeMap<CiId, Mixture>> = runs.iter().map(|r| &r.assignment).collect();
        set.into_iter().collect()
    };
    let maximal = distinct
        .iter()
        .filter(|c| {
            !distinct
                .iter()
                .any(|other| subconfig_compare(c, other) == ConfigOrder::Less)
        })
        .count();
    Ok(maximal)
}

/// Exhaustive test method selection: minimizes total instantiations plus
/// removals over every feasible method tuple, under the same applicability
/// sets and node-claiming resource rule the engine uses. Ties go to the
/// first tuple in preference-order enumeration.
pub fn brute_force_method_selection(
    model: &Model,
    grouping: &Grouping,
    configs: &[TestConfiguration],
    timing: Duration,
    cap: usize,
) -> Result<(BTreeMap<CiId, Method>, u64), OracleError> {
    let path = grouping.max_path.vertices();
    if path.len() > cap {
        return Err(OracleError::CapExceeded {
            what: "path CI count",
            size: path.len(),
            cap,
        });
    }
    let width = grouping.head_coverage.width;
    let applicable: Vec<BTreeSet<Method>> = path
        .iter()
        .map(|ci| {
            methods::applicable_methods(model, ci, width, timing)
                .map(|a| a.methods)
                .unwrap_or_else(|_| [Method::RollingPaths].into_iter().collect())
        })
        .collect();

    let mut best: Option<(BTreeMap<CiId, Method>, u64)> = None;
    let mut tuple: Vec<Method> = Vec::with_capacity(path.len());
    search(
        model,
        grouping,
        configs,
        timing,
        path,
        &applicable,
        &mut tuple,
        &mut best,
    );
    let (assignment, cost) = best.expect("rolling paths is always feasible");
    Ok((assignment, cost))
}

#[allow(clippy::too_many_arguments)]
fn search(
    model: &Model,
    grouping: &Grouping,
    configs: &[TestConfiguration],
    timing: Duration,
    path: &[CiId],
    applicable: &[BTreeSet<Method>],
    tuple: &mut Vec<Method>,
    best: &mut Option<(BTreeMap<CiId, Method>, u64)>,
) {
    if tuple.len() == path.len() {
        if !tuple_feasible(model, path, tuple) {
            return;
        }
        let cost: u64 = path
            .iter()
            .zip(tuple.iter())
            .map(|(ci, method)| {
                let c = methods::deployment_cost(model, grouping, ci, *method, configs, timing);
                c.instantiations + c.removals
            })
            .sum();
        let better = match best {
            None => true,
            Some((_, b)) => cost < *b,
        };
        if better {
            let assignment = path.iter().cloned().zip(tuple.iter().copied()).collect();
            *best = Some((assignment, cost));
        }
        return;
    }
    let position = tuple.len();
    for method in Method::PREFERENCE {
        if applicable[position].contains(&method) {
            tuple.push(method);
            search(model, grouping, configs, timing, path, applicable, tuple, best);
            tuple.pop();
        }
    }
}

/// Same node arithmetic as the engine's ledger: production holds the first
/// `K` nodes of each pool, each flip claims a clone set from the rest, in
/// path order.
fn tuple_feasible(model: &Model, path: &[CiId], tuple: &[Method]) -> bool {
    let mut held: BTreeSet<crate::ids::NodeId> = BTreeSet::new();
    for inst in model.cis().values() {
        held.extend(
            inst.node_pool
                .iter()
                .take(inst.component_count as usize)
                .cloned(),
        );
    }
    let mut free: BTreeSet<crate::ids::NodeId> = model
        .system
        .nodes
        .iter()
        .filter(|n| !held.contains(*n))
        .cloned()
        .collect();
    for (ci, method) in path.iter().zip(tuple) {
        if !method.is_flip() {
            continue;
        }
        let Some(inst) = model.cis().get(ci) else {
            return false;
        };
        let claim: Vec<crate::ids::NodeId> = free
            .iter()
            .filter(|n| inst.node_pool.contains(*n))
            .take(inst.component_count as usize)
            .cloned()
            .collect();
        if claim.len() < inst.component_count as usize {
            return false;
        }
        for n in claim {
            free.remove(&n);
        }
    }
    true
}

/// Smallest `K` such that, for every tuple length `l >= K`, no CI's mixture
/// count exceeds the product of any `l` other CIs' counts. `repetition`
/// decides whether a tuple may repeat an index; without repetition, lengths
/// beyond the index pool are vacuous, so a value always exists.
pub fn compute_k(counts: &[u64], repetition: bool) -> Option<usize> {
    let n = counts.len();
    if n < 2 {
        return None;
    }
    if repetition {
        // The worst tuple of length l is the smallest other count taken l
        // times; a count of one below a bigger count can never catch up.
        let mut k = 1usize;
        for (i, &count) in counts.iter().enumerate() {
            let min_other = counts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| *c)
                .min()
                .expect("n >= 2");
            if min_other <= 1 {
                if count > min_other.max(1) {
                    return None;
                }
                continue;
            }
            let mut need = 1usize;
            let mut product = min_other as u128;
            while product < count as u128 {
                product *= min_other as u128;
                need += 1;
            }
            k = k.max(need);
        }
        return Some(k);
    }
    'k: for k in 1..=n {
        for l in k..n {
            for (i, &count) in counts.iter().enumerate() {
                let mut others: Vec<u64> = counts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, c)| *c)
                    .collect();
                others.sort_unstable();
                let worst: u128 = others.iter().take(l).map(|c| *c as u128).product();
                if (count as u128) > worst {
                    continue 'k;
                }
            }
        }
        return Some(k);
    }
    Some(n)
}

/// Exhaustive best ordering of one grouping's cases: permutes them all,
/// scoring each order by the summed similarity distance over the rolling
/// CIs between consecutive configurations. Returns the minimum score and
/// the first witness in lexicographic permutation order.
pub fn brute_force_best_ordering(
    assignments: &[BTreeMap<CiId, Mixture>],
    rolling: &BTreeSet<CiId>,
    cap: usize,
) -> Result<(u64, Vec<usize>), OracleError> {
    let n = assignments.len();
    if n > cap {
        return Err(OracleError::CapExceeded {
            what: "case count",
            size: n,
            cap,
        });
    }
    if n == 0 {
        return Ok((0, Vec::new()));
    }
    let mut distance = alloc::vec![alloc::vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            distance[i][j] = crate::ordering::masked_distance(
                &assignments[i],
                &assignments[j],
                Some(rolling),
            ) as u64;
        }
    }
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut used = alloc::vec![false; n];
    permute(&distance, &mut order, &mut used, 0, &mut best);
    Ok(best.expect("n > 0"))
}

fn permute(
    distance: &[Vec<u64>],
    order: &mut Vec<usize>,
    used: &mut [bool],
    score: u64,
    best: &mut Option<(u64, Vec<usize>)>,
) {
    let n = used.len();
    // The score only grows, so anything at or past the best is hopeless.
    if let Some((b, _)) = best {
        if score >= *b {
            return;
        }
    }
    if order.len() == n {
        let better = match best {
            None => true,
            Some((b, _)) => score < *b,
        };
        if better {
            *best = Some((score, order.clone()));
        }
        return;
    }
    for next in 0..n {
        if used[next] {
            continue;
        }
        let step = order.last().map(|&last| distance[last][next]).unwrap_or(0);
        used[next] = true;
        order.push(next);
        permute(distance, order, used, score + step, best);
        order.pop();
        used[next] = false;
    }
}

/// Relocation counts and noticeable outage accumulated by replaying a plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DisturbanceReport {
    pub relocations: BTreeMap<CiId, u64>,
    pub noticeable_outage: BTreeMap<SiId, Duration>,
    pub violations: Vec<BudgetViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetViolation {
    pub service_instance: SiId,
    pub accumulated: Duration,
    pub budget: Duration,
}

/// Replays the schedule grouping by grouping:
///
/// - a rolling CI relocates once when its grouping's first configuration
///   deploys and once per transition that changes its mixture;
/// - a flip CI relocates exactly once per grouping;
/// - single-step CIs never relocate.
///
/// A relocation longer than some dependent's tolerance is noticeable: it
/// accrues the relocation time against every SI the CI provides.
pub fn simulate_execution(plan: &TestPlan, model: &Model) -> DisturbanceReport {
    let mut report = DisturbanceReport::default();
    let relocate = |ci: &CiId, report: &mut DisturbanceReport| {
        *report.relocations.entry(ci.clone()).or_default() += 1;
        let Some(iso) = model.isolation.get(ci) else {
            return;
        };
        let noticed = model
            .system
            .call_graph
            .min_dependent_tolerance(ci)
            .map(|tol| iso.relocation_time > tol)
            .unwrap_or(false);
        if noticed {
            if let Some(inst) = model.cis().get(ci) {
                for si in &inst.service_instances {
                    *report
                        .noticeable_outage
                        .entry(si.clone())
                        .or_default() += iso.relocation_time;
                }
            }
        }
    };

    for meta in &plan.metadata.groupings {
        let cases: Vec<&crate::plan::TestCase> = plan.cases_of(&meta.head).collect();
        if cases.is_empty() {
            continue;
        }
        for (ci, method) in &meta.methods {
            match method {
                Method::SingleStep => {}
                Method::BigFlip | Method::SmallFlip => relocate(ci, &mut report),
                Method::RollingPaths => {
                    // Entering the first test configuration.
                    relocate(ci, &mut report);
                    for pair in cases.windows(2) {
                        let before = pair[0].configuration.assignment.get(ci);
                        let after = pair[1].configuration.assignment.get(ci);
                        if before != after {
                            relocate(ci, &mut report);
                        }
                    }
                }
            }
        }
    }

    for (si, accumulated) in &report.noticeable_outage {
        if let Some(budget) = model.outage_budgets.get(si) {
            if accumulated > budget {
                report.violations.push(BudgetViolation {
                    service_instance: si.clone(),
                    accumulated: *accumulated,
                    budget: *budget,
                });
            }
        }
    }

    report
}

/// Total relocations a schedule order costs, per the simulator's transition
/// rule (rolling CIs only, entry relocations excluded). This is the score
/// the ordering oracle minimizes.
pub fn transition_score(
    ordered_assignments: &[BTreeMap<CiId, Mixture>],
    rolling: &BTreeSet<CiId>,
) -> u64 {
    ordered_assignments
        .windows(2)
        .map(|w| crate::ordering::masked_distance(&w[0], &w[1], Some(rolling)) as u64)
        .sum()
}

/// Diagnostic bound check from the method-selection analysis: the engine's
/// rolling-only cost `g` against `opt^exponent`.
pub fn bound_holds(g: u64, opt: u64, exponent: u32) -> bool {
    let opt = opt as u128;
    g as u128 <= opt.saturating_pow(exponent)
}

/// Summed per-CI cost totals of a cost table.
pub fn cost_totals(costs: &BTreeMap<CiId, CostBreakdown>) -> u64 {
    costs.values().map(|c| c.instantiations + c.removals).sum()
}
