//! Domain types shared by all pipeline stages.
//!
//! Everything here is immutable after validation; the pipeline only ever
//! reads a [`Model`], so shared references can be handed to concurrent
//! callers freely.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use crate::ids::{AppId, CiId, EnvId, FrameworkId, NodeId, SiId, TsiId};
use crate::path::{CallGraph, CallPath};

/// A configured instance and the deployment parameters the planner needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfiguredInstance {
    pub id: CiId,
    /// Number of serving components (the `K` of the small-flip feasibility
    /// check is estimated as this current count).
    pub component_count: u32,
    /// Nodes on which the CI is deployed.
    pub node_pool: BTreeSet<NodeId>,
    /// Minimum period between two consecutive scaling actions.
    pub cool_down: Duration,
    /// Components instantiated or terminated per scaling action.
    pub scaling_step: u32,
    /// Whether test traffic on this CI risks interfering with production.
    pub interference_risk: bool,
    /// Rank used to decide which CIs should endure fewer relocations;
    /// higher means more critical.
    pub criticality: u32,
    /// Service instances this CI provides.
    pub service_instances: BTreeSet<SiId>,
}

/// The maximum collocation under which a component of `owner` can serve in
/// a given location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryEnvironment {
    pub id: EnvId,
    pub owner: CiId,
    /// CIs collocated with the owner's component in this environment.
    pub collocated: BTreeSet<CiId>,
    /// Nodes that can host this environment.
    pub hosting_nodes: BTreeSet<NodeId>,
}

/// Environment coverage criteria for mixtures of a fixed width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoverageKind {
    /// Strength-1 covering array: every mixture of every CI appears.
    AllBeMixtures,
    /// Strength-2 covering array: every mixture pair of every CI pair appears.
    PairwiseBeMixtures,
    /// Full cartesian product of the per-CI mixture sets.
    AllBeMixturesPaths,
}

impl CoverageKind {
    /// Strength rank used when comparing criteria for merging.
    pub fn strength(self) -> u8 {
        match self {
            CoverageKind::AllBeMixtures => 1,
            CoverageKind::PairwiseBeMixtures => 2,
            CoverageKind::AllBeMixturesPaths => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoverageKind::AllBeMixtures => "all_be_mixtures",
            CoverageKind::PairwiseBeMixtures => "pairwise_be_mixtures",
            CoverageKind::AllBeMixturesPaths => "all_be_mixtures_paths",
        }
    }
}

/// A coverage criterion: the kind plus the mixture width `N` it applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoverageCriterion {
    pub kind: CoverageKind,
    pub width: u32,
}

impl CoverageCriterion {
    pub fn new(kind: CoverageKind, width: u32) -> Self {
        Self { kind, width }
    }
}

/// One test case or test design technique from the test suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSuiteItem {
    pub id: TsiId,
    /// Call paths this TSI applies to; application `k` binds the TSI to
    /// `call_paths[k]`.
    pub call_paths: Vec<CallPath>,
    pub coverage: CoverageCriterion,
    /// Estimated duration of one run.
    pub execution_time: Duration,
    pub runtime_framework: FrameworkId,
}

/// A TSI bound to one of its call paths; the unit the merging and ordering
/// stages work with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsiApplication {
    pub id: AppId,
    pub path: CallPath,
    pub coverage: CoverageCriterion,
    pub execution_time: Duration,
    pub runtime_framework: FrameworkId,
}

/// Per-CI isolation cost record (risk flag plus the three operation times).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationEntry {
    pub risk: bool,
    pub snapshot_time: Duration,
    pub clone_time: Duration,
    pub relocation_time: Duration,
}

/// `leading` has to be executed before `following`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrecedencePair {
    pub leading: TsiId,
    pub following: TsiId,
}

/// How a test runtime framework can be deployed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeploymentOption {
    Container,
    Vm,
    ConfigurationManager,
}

impl DeploymentOption {
    /// Precedence used by the wrapup stage: container, then VM, then
    /// configuration manager.
    pub fn precedence(self) -> u8 {
        match self {
            DeploymentOption::Container => 0,
            DeploymentOption::Vm => 1,
            DeploymentOption::ConfigurationManager => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DeploymentOption::Container => "container",
            DeploymentOption::Vm => "vm",
            DeploymentOption::ConfigurationManager => "configuration_manager",
        }
    }
}

/// Deployment alternatives of one framework with their deployment times.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrameworkOptions {
    pub options: BTreeMap<DeploymentOption, Duration>,
}

/// The system side of the validated model: CIs, their boundary environments,
/// and the call graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemModel {
    pub nodes: BTreeSet<NodeId>,
    pub cis: BTreeMap<CiId, ConfiguredInstance>,
    pub environments: BTreeMap<EnvId, BoundaryEnvironment>,
    pub call_graph: CallGraph,
}

impl SystemModel {
    /// Boundary environments of one CI, in id order.
    pub fn environments_of<'a>(
        &'a self,
        ci: &'a CiId,
    ) -> impl Iterator<Item = &'a BoundaryEnvironment> + 'a {
        self.environments.values().filter(move |e| &e.owner == ci)
    }

    pub fn environment_count(&self, ci: &CiId) -> usize {
        self.environments_of(ci).count()
    }

    /// The CI owning a service instance, if any.
    pub fn si_owner(&self, si: &SiId) -> Option<&CiId> {
        self.cis
            .values()
            .find(|ci| ci.service_instances.contains(si))
            .map(|ci| &ci.id)
    }

    /// Default criticality when the input gives none: the number of distinct
    /// SIs provided by CIs that transitively depend on this CI.
    pub fn derived_criticality(&self, ci: &CiId) -> u32 {
        let mut sis: BTreeSet<&SiId> = BTreeSet::new();
        for dep in self.call_graph.transitive_dependents(ci) {
            if let Some(inst) = self.cis.get(&dep) {
                sis.extend(inst.service_instances.iter());
            }
        }
        sis.len() as u32
    }
}

/// Everything the pipeline consumes: the validated system plus the test
/// suite and the input matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model {
    pub system: SystemModel,
    pub items: BTreeMap<TsiId, TestSuiteItem>,
    /// One entry per (TSI, call path) pair, in canonical application-id order.
    pub applications: Vec<TsiApplication>,
    pub isolation: BTreeMap<CiId, IsolationEntry>,
    /// Acceptable noticeable outage per service instance.
    pub outage_budgets: BTreeMap<SiId, Duration>,
    pub frameworks: BTreeMap<FrameworkId, FrameworkOptions>,
    pub precedence: Vec<PrecedencePair>,
    pub objective: String,
}

impl Model {
    pub fn application(&self, id: &AppId) -> Option<&TsiApplication> {
        self.applications.iter().find(|a| &a.id == id)
    }

    /// Acceptable outage of the SIs a CI provides; `None` entries mean the
    /// SI has no budget listed.
    pub fn min_outage_budget(&self, ci: &CiId) -> Option<Duration> {
        let inst = self.cis().get(ci)?;
        inst.service_instances
            .iter()
            .filter_map(|si| self.outage_budgets.get(si))
            .min()
            .copied()
    }

    pub fn cis(&self) -> &BTreeMap<CiId, ConfiguredInstance> {
        &self.system.cis
    }
}

/// Derives boundary environments from a per-node collocation map: nodes of a
/// CI's pool sharing the same collocated-CI set form one environment.
///
/// This is a convenience for inputs that do not list environments explicitly;
/// explicitly supplied environments always win.
pub fn derive_boundary_environments(
    cis: &BTreeMap<CiId, ConfiguredInstance>,
    collocation: &BTreeMap<NodeId, BTreeSet<CiId>>,
) -> Vec<BoundaryEnvironment> {
    let mut envs = Vec::new();
    for (ci_id, inst) in cis {
        let mut by_pattern: BTreeMap<BTreeSet<CiId>, BTreeSet<NodeId>> = BTreeMap::new();
        for node in &inst.node_pool {
            let Some(residents) = collocation.get(node) else {
                continue;
            };
            if !residents.contains(ci_id) {
                continue;
            }
            let mut pattern = residents.clone();
            pattern.remove(ci_id);
            by_pattern.entry(pattern).or_default().insert(node.clone());
        }
        for (k, (pattern, hosting_nodes)) in by_pattern.into_iter().enumerate() {
            envs.push(BoundaryEnvironment {
                id: EnvId::new(alloc::format!("E{}.{}", ci_id.as_str(), k + 1)),
                owner: ci_id.clone(),
                collocated: pattern,
                hosting_nodes,
            });
        }
    }
    envs
}
