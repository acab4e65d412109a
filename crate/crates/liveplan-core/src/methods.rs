//! Live-test method applicability, selection, and the deployment cost model.
//!
//! Four methods isolate test traffic from production: single step (no
//! isolation needed), rolling paths (one path at a time), small flip (two
//! batches over spare nodes with one bulk relocation), and big flip (clone
//! the CI, test the clone, relocate, retire the original). Selection runs
//! per grouping: each CI on the max-path gets exactly one method, preferring
//! single step, then big flip, then small flip, then rolling paths, under a
//! node-count resource ledger.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::coverage::TestConfiguration;
use crate::ids::{AppId, CiId, EnvId, NodeId};
use crate::merging::Grouping;
use crate::model::{ConfiguredInstance, Model};
use crate::runs::CaseLayout;

/// A live-test method, in selection preference order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    SingleStep,
    BigFlip,
    SmallFlip,
    RollingPaths,
}

impl Method {
    pub const PREFERENCE: [Method; 4] = [
        Method::SingleStep,
        Method::BigFlip,
        Method::SmallFlip,
        Method::RollingPaths,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SingleStep => "single_step",
            Method::BigFlip => "big_flip",
            Method::SmallFlip => "small_flip",
            Method::RollingPaths => "rolling_paths",
        }
    }

    pub fn is_flip(self) -> bool {
        matches!(self, Method::BigFlip | Method::SmallFlip)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MethodError {
    /// No method can respect the budgets for this CI.
    NoSafeMethod(CiId),
    /// The isolation matrix has no entry for the CI.
    MissingIsolation(CiId),
    /// The system model has no such CI.
    UnknownCi(CiId),
}

impl fmt::Display for MethodError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodError::NoSafeMethod(ci) => {
                write!(f, "no safe test method exists for CI {ci}")
            }
            MethodError::MissingIsolation(ci) => {
                write!(f, "isolation matrix has no entry for CI {ci}")
            }
            MethodError::UnknownCi(ci) => write!(f, "unknown CI {ci}"),
        }
    }
}

impl core::error::Error for MethodError {}

/// Methods applicable to one CI, plus whether the big flip is the preferred
/// countermeasure (snapshot or relocation would be noticed by a dependent).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodApplicability {
    pub methods: BTreeSet<Method>,
    pub big_flip_preferred: bool,
}

/// Feasibility of the small flip for one CI: some non-empty set `S` of its
/// usable boundary environments must satisfy
///
/// ```text
/// sum over env in S of min(N, |Nodes(env)|)
///     <= |Nodes| - K - floor(timing / coolDownPeriod) * scalingStep
/// ```
///
/// Since every term on the left is positive, the cheapest singleton decides;
/// a negative right-hand side is infeasible.
pub fn small_flip_feasible(
    inst: &ConfiguredInstance,
    envs: &[(EnvId, usize)],
    width: u32,
    timing: Duration,
) -> bool {
    let rhs = spare_nodes(inst, timing);
    let cheapest = envs
        .iter()
        .filter(|(_, hosting)| *hosting > 0)
        .map(|(_, hosting)| core::cmp::min(width as i128, *hosting as i128))
        .min();
    match cheapest {
        Some(lhs) => lhs <= rhs,
        None => false,
    }
}

/// Right-hand side of the feasibility inequality: nodes left after serving
/// components and the scaling actions the test window may trigger.
fn spare_nodes(inst: &ConfiguredInstance, timing: Duration) -> i128 {
    let nodes = inst.node_pool.len() as i128;
    let k = inst.component_count as i128;
    let cool = inst.cool_down.as_millis().max(1);
    let periods = (timing.as_millis() / cool) as i128;
    nodes - k - periods * inst.scaling_step as i128
}

fn environment_sizes(model: &Model, ci: &CiId) -> Vec<(EnvId, usize)> {
    model
        .system
        .environments_of(ci)
        .map(|e| (e.id.clone(), e.hosting_nodes.len()))
        .collect()
}

/// The set of methods that can isolate tests on `ci` without unacceptable
/// outage. `timing` is the grouping's setup-plus-execution total, used by
/// the small-flip feasibility check.
///
/// An empty set is an error: the plan cannot respect the budgets.
pub fn applicable_methods(
    model: &Model,
    ci: &CiId,
    width: u32,
    timing: Duration,
) -> Result<MethodApplicability, MethodError> {
    let inst = model
        .cis()
        .get(ci)
        .ok_or_else(|| MethodError::UnknownCi(ci.clone()))?;
    let iso = model
        .isolation
        .get(ci)
        .ok_or_else(|| MethodError::MissingIsolation(ci.clone()))?;

    let mut methods = BTreeSet::new();
    if !iso.risk {
        methods.insert(Method::SingleStep);
    }

    let min_tolerance = model.system.call_graph.min_dependent_tolerance(ci);
    let unnoticed = |d: Duration| match min_tolerance {
        Some(tol) => d < tol,
        None => true,
    };

    if unnoticed(iso.snapshot_time) && unnoticed(iso.relocation_time) {
        methods.insert(Method::RollingPaths);
        if small_flip_feasible(inst, &environment_sizes(model, ci), width, timing) {
            methods.insert(Method::SmallFlip);
        }
    }

    let isolation_total = iso.snapshot_time + iso.clone_time + iso.relocation_time;
    let within_budget = match model.min_outage_budget(ci) {
        Some(budget) => isolation_total < budget,
        None => true,
    };
    if within_budget {
        methods.insert(Method::BigFlip);
    }

    if methods.is_empty() {
        return Err(MethodError::NoSafeMethod(ci.clone()));
    }

    let noticed = |d: Duration| match min_tolerance {
        Some(tol) => d > tol,
        None => false,
    };
    Ok(MethodApplicability {
        methods,
        big_flip_preferred: noticed(iso.snapshot_time) || noticed(iso.relocation_time),
    })
}

/// The chosen method for every (grouping, CI) pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MethodAssignment {
    pub per_grouping: BTreeMap<AppId, BTreeMap<CiId, Method>>,
}

impl MethodAssignment {
    pub fn method(&self, grouping: &AppId, ci: &CiId) -> Option<Method> {
        self.per_grouping.get(grouping)?.get(ci).copied()
    }

    /// CIs of one grouping assigned the rolling paths method.
    pub fn rolling_cis(&self, grouping: &AppId) -> BTreeSet<CiId> {
        self.per_grouping
            .get(grouping)
            .map(|m| {
                m.iter()
                    .filter(|(_, method)| **method == Method::RollingPaths)
                    .map(|(ci, _)| ci.clone())
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Node bookkeeping for one grouping: production components hold the first
/// `K` nodes of each CI's pool, flips claim clone nodes from what is left.
/// Placement details are out of scope; counting nodes is the contract.
struct ResourceLedger {
    free: BTreeSet<NodeId>,
}

impl ResourceLedger {
    fn new(model: &Model) -> Self {
        let mut held: BTreeSet<NodeId> = BTreeSet::new();
        for inst in model.cis().values() {
            held.extend(
                inst.node_pool
                    .iter()
                    .take(inst.component_count as usize)
                    .cloned(),
            );
        }
        let free = model
            .system
            .nodes
            .iter()
            .filter(|n| !held.contains(*n))
            .cloned()
            .collect();
        Self { free }
    }

    fn can_claim(&self, pool: &BTreeSet<NodeId>, count: usize) -> bool {
        self.free.iter().filter(|n| pool.contains(*n)).count() >= count
    }

    fn claim(&mut self, pool: &BTreeSet<NodeId>, count: usize) {
        let taken: Vec<NodeId> = self
            .free
            .iter()
            .filter(|n| pool.contains(*n))
            .take(count)
            .cloned()
            .collect();
        for n in taken {
            self.free.remove(&n);
        }
    }
}

/// Estimated setup time of one configuration given the (possibly partial)
/// method assignment: snapshot plus clone for flip CIs, snapshot for rolling
/// CIs, nothing for single step. Unassigned risky CIs are estimated as
/// rolling.
fn config_setup_estimate(
    model: &Model,
    path: &[CiId],
    assigned: &BTreeMap<CiId, Method>,
) -> Duration {
    let mut total = Duration::ZERO;
    for ci in path {
        let Some(iso) = model.isolation.get(ci) else {
            continue;
        };
        let method = assigned.get(ci).copied().unwrap_or({
            if iso.risk {
                Method::RollingPaths
            } else {
                Method::SingleStep
            }
        });
        total += match method {
            Method::SingleStep => Duration::ZERO,
            Method::BigFlip | Method::SmallFlip => iso.snapshot_time + iso.clone_time,
            Method::RollingPaths => iso.snapshot_time,
        };
    }
    total
}

/// Setup plus execution total for one grouping's runs under the current
/// partial assignment.
pub fn grouping_timing(
    model: &Model,
    layout: &CaseLayout,
    grouping: &Grouping,
    assigned: &BTreeMap<CiId, Method>,
) -> Duration {
    let setup = config_setup_estimate(model, grouping.max_path.vertices(), assigned);
    let mut total = Duration::ZERO;
    for case in layout.cases_of(&grouping.head) {
        total += setup;
        for app_id in &case.invocations {
            if let Some(app) = model.application(app_id) {
                total += app.execution_time;
            }
        }
    }
    total
}

/// Selects a method for every CI on every grouping's max-path.
///
/// Per grouping: CIs with a single applicable method are fixed first and
/// resources debited; the rest are visited in decreasing order of their
/// mixture count, each getting the most preferred applicable method current
/// resources allow. Resource exhaustion falls back to rolling paths, never
/// to an error.
pub fn select_methods(
    layout: &CaseLayout,
    model: &Model,
) -> Result<MethodAssignment, MethodError> {
    let mut assignment = MethodAssignment::default();

    for grouping in &layout.groupings {
        if layout.cases_of(&grouping.head).next().is_none() {
            continue;
        }
        let mut ledger = ResourceLedger::new(model);
        let mut chosen: BTreeMap<CiId, Method> = BTreeMap::new();
        let width = grouping.head_coverage.width;
        let path = grouping.max_path.vertices();

        // CIs with no choice go first.
        for ci in path {
            let timing = grouping_timing(model, layout, grouping, &chosen);
            let applicability = applicable_methods(model, ci, width, timing)?;
            if applicability.methods.len() == 1 {
                let method = *applicability.methods.iter().next().expect("one method");
                if method.is_flip() {
                    let inst = &model.cis()[ci];
                    ledger.claim(&inst.node_pool, inst.component_count as usize);
                }
                chosen.insert(ci.clone(), method);
            }
        }

        // The rest by descending mixture count; conflicts resolve in favor
        // of the CI with more mixtures.
        let mut remaining: Vec<(usize, &CiId)> = path
            .iter()
            .filter(|ci| !chosen.contains_key(*ci))
            .map(|ci| {
                let count = crate::coverage::mixtures_of(&model.system, ci, width)
                    .map(|ms| ms.len())
                    .unwrap_or(0);
                (count, ci)
            })
            .collect();
        remaining.sort_by(|(ca, a), (cb, b)| cb.cmp(ca).then(a.cmp(b)));

        for (_, ci) in remaining {
            let timing = grouping_timing(model, layout, grouping, &chosen);
            let applicability = applicable_methods(model, ci, width, timing)?;
            let inst = &model.cis()[ci];
            let mut picked = Method::RollingPaths;
            for candidate in Method::PREFERENCE {
                if !applicability.methods.contains(&candidate) {
                    continue;
                }
                if candidate.is_flip()
                    && !ledger.can_claim(&inst.node_pool, inst.component_count as usize)
                {
                    continue;
                }
                picked = candidate;
                break;
            }
            if picked.is_flip() {
                ledger.claim(&inst.node_pool, inst.component_count as usize);
            }
            chosen.insert(ci.clone(), picked);
        }

        assignment
            .per_grouping
            .insert(grouping.head.clone(), chosen);
    }

    Ok(assignment)
}

/// Instantiations, removals, and relocations one (grouping, CI) choice
/// costs, plus the iteration count behind them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostBreakdown {
    pub instantiations: u64,
    pub removals: u64,
    pub relocations: u64,
    pub iteration_count: u64,
}

/// Paths deployable at once: the most constrained CI on the path bounds the
/// parallelism, never below one.
pub fn parallel_capacity(model: &Model, path: &[CiId], width: u32) -> u64 {
    let min = path
        .iter()
        .filter_map(|ci| model.cis().get(ci))
        .map(|inst| (inst.component_count / width.max(1)) as u64)
        .min()
        .unwrap_or(1);
    min.max(1)
}

fn div_ceil(a: u64, b: u64) -> u64 {
    a.div_ceil(b.max(1))
}

/// Configurations whose mixture for `ci` fits on the spare nodes, i.e. the
/// first small-flip batch.
pub fn small_flip_batch1(
    model: &Model,
    ci: &CiId,
    configs: &[TestConfiguration],
    width: u32,
    timing: Duration,
) -> u64 {
    let Some(inst) = model.cis().get(ci) else {
        return 0;
    };
    let spare = spare_nodes(inst, timing);
    let mut batch_envs: BTreeSet<EnvId> = BTreeSet::new();
    let mut used: i128 = 0;
    for (env, hosting) in environment_sizes(model, ci) {
        if hosting == 0 {
            continue;
        }
        let need = core::cmp::min(width as i128, hosting as i128);
        if used + need <= spare {
            used += need;
            batch_envs.insert(env);
        }
    }
    configs
        .iter()
        .filter(|c| {
            c.assignment
                .get(ci)
                .map(|m| m.environments().all(|e| batch_envs.contains(e)))
                .unwrap_or(false)
        })
        .count() as u64
}

/// The cost of testing `ci` with `method` inside one grouping, per the
/// engine's iteration-count model:
///
/// - big flip and single step run `ceil(configs / P)` iterations;
/// - rolling paths runs one iteration per configuration;
/// - small flip splits the configurations into two batches around its bulk
///   relocation.
///
/// Flips instantiate and remove one clone set (`component_count`); rolling
/// pays one instantiation and removal per iteration; every method but single
/// step relocates once per iteration.
pub fn deployment_cost(
    model: &Model,
    grouping: &Grouping,
    ci: &CiId,
    method: Method,
    configs: &[TestConfiguration],
    timing: Duration,
) -> CostBreakdown {
    let config_count = configs.len() as u64;
    let width = grouping.head_coverage.width;
    let p = parallel_capacity(model, grouping.max_path.vertices(), width);
    let cuts = model
        .cis()
        .get(ci)
        .map(|i| i.component_count as u64)
        .unwrap_or(0);

    match method {
        Method::SingleStep => CostBreakdown {
            instantiations: 0,
            removals: 0,
            relocations: 0,
            iteration_count: div_ceil(config_count, p),
        },
        Method::RollingPaths => CostBreakdown {
            instantiations: config_count,
            removals: config_count,
            relocations: config_count,
            iteration_count: config_count,
        },
        Method::BigFlip => {
            let iterations = div_ceil(config_count, p);
            CostBreakdown {
                instantiations: cuts,
                removals: cuts,
                relocations: iterations,
                iteration_count: iterations,
            }
        }
        Method::SmallFlip => {
            let batch1 = small_flip_batch1(model, ci, configs, width, timing);
            let batch2 = config_count.saturating_sub(batch1);
            let iterations = div_ceil(batch1, p) + div_ceil(batch2, p);
            CostBreakdown {
                instantiations: cuts,
                removals: cuts,
                relocations: iterations,
                iteration_count: iterations,
            }
        }
    }
}
