//! Input bundle validation: cross-reference resolution, structural
//! invariants, and assembly of the immutable [`Model`].
//!
//! Validation collects every violation instead of stopping at the first;
//! each diagnostic names the offending document and id.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::ids::{AppId, CiId, EnvId, FrameworkId, NodeId, SiId, TsiId};
use crate::model::{
    derive_boundary_environments, BoundaryEnvironment, ConfiguredInstance, CoverageCriterion,
    FrameworkOptions, IsolationEntry, Model, PrecedencePair, SystemModel, TestSuiteItem,
    TsiApplication,
};
use crate::path::{CallGraph, CallPath};

/// Raw configured-instance record before validation; criticality is
/// optional and defaults to the count of transitively dependent SIs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDoc {
    pub id: CiId,
    pub component_count: u32,
    pub node_pool: BTreeSet<NodeId>,
    pub cool_down: Duration,
    pub scaling_step: u32,
    pub interference_risk: bool,
    pub criticality: Option<u32>,
    pub service_instances: BTreeSet<SiId>,
}

/// Raw test-suite-item record; call paths are explicit vertex lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemDoc {
    pub id: TsiId,
    pub call_paths: Vec<Vec<CiId>>,
    pub coverage: CoverageCriterion,
    pub execution_time: Duration,
    pub runtime_framework: FrameworkId,
}

/// Everything the input documents carry, before cross-checking.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InputBundle {
    pub nodes: BTreeSet<NodeId>,
    pub instances: Vec<InstanceDoc>,
    /// Explicit boundary environments; when empty, they are derived from
    /// `collocation` (explicit input always wins).
    pub environments: Vec<BoundaryEnvironment>,
    pub collocation: BTreeMap<NodeId, BTreeSet<CiId>>,
    pub graph_vertices: Vec<CiId>,
    pub graph_edges: Vec<(CiId, CiId, Duration)>,
    pub items: Vec<ItemDoc>,
    pub precedence: Vec<PrecedencePair>,
    pub isolation: Vec<(CiId, IsolationEntry)>,
    pub outage: Vec<(SiId, Duration)>,
    pub frameworks: Vec<(FrameworkId, FrameworkOptions)>,
    pub objective: String,
}

/// One validation diagnostic: the document it came from, the offending id,
/// and what went wrong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub document: String,
    pub subject: String,
    pub message: String,
}

impl ValidationError {
    fn new(document: &str, subject: impl fmt::Display, message: impl Into<String>) -> Self {
        Self {
            document: String::from(document),
            subject: alloc::format!("{subject}"),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.document, self.subject, self.message)
    }
}

impl core::error::Error for ValidationError {}

/// Validates the bundle and assembles the model. Every violation is
/// reported; validation of an already-valid bundle yields no errors.
pub fn validate_inputs(bundle: &InputBundle) -> Result<Model, Vec<ValidationError>> {
    let mut errors: Vec<ValidationError> = Vec::new();

    // Configured instances.
    let mut cis: BTreeMap<CiId, ConfiguredInstance> = BTreeMap::new();
    for doc in &bundle.instances {
        if cis.contains_key(&doc.id) {
            errors.push(ValidationError::new("system.json", &doc.id, "duplicate CI id"));
            continue;
        }
        if doc.component_count < 1 {
            errors.push(ValidationError::new(
                "system.json",
                &doc.id,
                "component_count must be at least 1",
            ));
        }
        if doc.scaling_step < 1 {
            errors.push(ValidationError::new(
                "system.json",
                &doc.id,
                "scaling_step must be at least 1",
            ));
        }
        if doc.cool_down.is_zero() {
            errors.push(ValidationError::new(
                "system.json",
                &doc.id,
                "cool_down must be positive",
            ));
        }
        if doc.node_pool.is_empty() {
            errors.push(ValidationError::new(
                "system.json",
                &doc.id,
                "node_pool must not be empty",
            ));
        }
        if doc.component_count as usize > doc.node_pool.len() {
            errors.push(ValidationError::new(
                "system.json",
                &doc.id,
                "component_count exceeds the node pool size",
            ));
        }
        for node in &doc.node_pool {
            if !bundle.nodes.contains(node) {
                errors.push(ValidationError::new(
                    "system.json",
                    &doc.id,
                    alloc::format!("unresolved node id {node}"),
                ));
            }
        }
        cis.insert(
            doc.id.clone(),
            ConfiguredInstance {
                id: doc.id.clone(),
                component_count: doc.component_count,
                node_pool: doc.node_pool.clone(),
                cool_down: doc.cool_down,
                scaling_step: doc.scaling_step,
                interference_risk: doc.interference_risk,
                criticality: doc.criticality.unwrap_or(0),
                service_instances: doc.service_instances.clone(),
            },
        );
    }

    // Boundary environments: explicit input wins over the derived set.
    let explicit = !bundle.environments.is_empty();
    let env_list: Vec<BoundaryEnvironment> = if explicit {
        bundle.environments.clone()
    } else {
        derive_boundary_environments(&cis, &bundle.collocation)
    };
    let mut environments: BTreeMap<EnvId, BoundaryEnvironment> = BTreeMap::new();
    for env in env_list {
        if environments.contains_key(&env.id) {
            errors.push(ValidationError::new(
                "system.json",
                &env.id,
                "duplicate boundary environment id",
            ));
            continue;
        }
        match cis.get(&env.owner) {
            None => {
                errors.push(ValidationError::new(
                    "system.json",
                    &env.id,
                    alloc::format!("unresolved CI id {}", env.owner),
                ));
                continue;
            }
            Some(owner) => {
                if env.collocated.contains(&env.owner) {
                    errors.push(ValidationError::new(
                        "system.json",
                        &env.id,
                        "owner listed among its own collocated CIs",
                    ));
                }
                for other in &env.collocated {
                    if !cis.contains_key(other) {
                        errors.push(ValidationError::new(
                            "system.json",
                            &env.id,
                            alloc::format!("unresolved CI id {other}"),
                        ));
                    }
                }
                for node in &env.hosting_nodes {
                    if !owner.node_pool.contains(node) {
                        errors.push(ValidationError::new(
                            "system.json",
                            &env.id,
                            alloc::format!("hosting node {node} outside the owner's pool"),
                        ));
                    }
                }
            }
        }
        environments.insert(env.id.clone(), env);
    }

    // Call graph.
    let mut call_graph = CallGraph::new();
    for v in &bundle.graph_vertices {
        if !cis.contains_key(v) {
            errors.push(ValidationError::new(
                "callgraph.json",
                v,
                "unresolved CI id",
            ));
        }
        call_graph.add_vertex(v.clone());
    }
    for (source, target, tolerance) in &bundle.graph_edges {
        for endpoint in [source, target] {
            if !call_graph.vertices.contains(endpoint) {
                errors.push(ValidationError::new(
                    "callgraph.json",
                    endpoint,
                    "edge endpoint is not a graph vertex",
                ));
            }
        }
        call_graph.add_edge(source.clone(), target.clone(), *tolerance);
    }

    // Test suite items and their applications.
    let mut items: BTreeMap<TsiId, TestSuiteItem> = BTreeMap::new();
    let mut applications: Vec<TsiApplication> = Vec::new();
    let framework_ids: BTreeSet<&FrameworkId> = bundle.frameworks.iter().map(|(f, _)| f).collect();
    for doc in &bundle.items {
        if items.contains_key(&doc.id) {
            errors.push(ValidationError::new(
                "testsuite.json",
                &doc.id,
                "duplicate TSI id",
            ));
            continue;
        }
        if doc.call_paths.is_empty() {
            errors.push(ValidationError::new(
                "testsuite.json",
                &doc.id,
                "call_paths must not be empty",
            ));
            continue;
        }
        if doc.coverage.width < 1 {
            errors.push(ValidationError::new(
                "testsuite.json",
                &doc.id,
                "coverage width must be at least 1",
            ));
        }
        if !framework_ids.contains(&doc.runtime_framework) {
            errors.push(ValidationError::new(
                "testsuite.json",
                &doc.id,
                alloc::format!("unresolved framework id {}", doc.runtime_framework),
            ));
        }
        let mut paths = Vec::new();
        let mut bad = false;
        for (index, vertices) in doc.call_paths.iter().enumerate() {
            match CallPath::new(vertices.clone(), &call_graph) {
                Ok(path) => paths.push(path),
                Err(e) => {
                    bad = true;
                    errors.push(ValidationError::new(
                        "testsuite.json",
                        AppId::new(doc.id.clone(), index),
                        alloc::format!("{e}"),
                    ));
                }
            }
        }
        if bad {
            continue;
        }
        for (index, path) in paths.iter().enumerate() {
            applications.push(TsiApplication {
                id: AppId::new(doc.id.clone(), index),
                path: path.clone(),
                coverage: doc.coverage,
                execution_time: doc.execution_time,
                runtime_framework: doc.runtime_framework.clone(),
            });
        }
        items.insert(
            doc.id.clone(),
            TestSuiteItem {
                id: doc.id.clone(),
                call_paths: paths,
                coverage: doc.coverage,
                execution_time: doc.execution_time,
                runtime_framework: doc.runtime_framework.clone(),
            },
        );
    }
    applications.sort_by(|a, b| a.id.cmp(&b.id));

    // Isolation matrix: entries resolve, cover every path CI, and agree
    // with the system's risk flags.
    let mut isolation: BTreeMap<CiId, IsolationEntry> = BTreeMap::new();
    for (ci, entry) in &bundle.isolation {
        if !cis.contains_key(ci) {
            errors.push(ValidationError::new("isolation.json", ci, "unresolved CI id"));
            continue;
        }
        if isolation.insert(ci.clone(), entry.clone()).is_some() {
            errors.push(ValidationError::new(
                "isolation.json",
                ci,
                "duplicate isolation entry",
            ));
        }
        if let Some(inst) = cis.get(ci) {
            if inst.interference_risk != entry.risk {
                errors.push(ValidationError::new(
                    "isolation.json",
                    ci,
                    "risk flag disagrees with the system configuration",
                ));
            }
        }
    }
    let mut path_cis: BTreeSet<&CiId> = BTreeSet::new();
    for app in &applications {
        path_cis.extend(app.path.vertices());
    }
    for ci in path_cis {
        if !isolation.contains_key(ci) {
            errors.push(ValidationError::new(
                "isolation.json",
                ci,
                "no isolation entry for a CI under test",
            ));
        }
    }

    // Outage budgets.
    let all_sis: BTreeSet<&SiId> = cis.values().flat_map(|c| c.service_instances.iter()).collect();
    let mut outage_budgets: BTreeMap<SiId, Duration> = BTreeMap::new();
    for (si, budget) in &bundle.outage {
        if !all_sis.contains(si) {
            errors.push(ValidationError::new("outage.json", si, "unresolved SI id"));
            continue;
        }
        outage_budgets.insert(si.clone(), *budget);
    }

    // Frameworks.
    let mut frameworks: BTreeMap<FrameworkId, FrameworkOptions> = BTreeMap::new();
    for (id, options) in &bundle.frameworks {
        if frameworks.insert(id.clone(), options.clone()).is_some() {
            errors.push(ValidationError::new(
                "frameworks.json",
                id,
                "duplicate framework id",
            ));
        }
    }

    // Precedence: ids resolve and the relation is acyclic.
    for pair in &bundle.precedence {
        for tsi in [&pair.leading, &pair.following] {
            if !items.contains_key(tsi) && !bundle.items.iter().any(|d| &d.id == tsi) {
                errors.push(ValidationError::new(
                    "testsuite.json",
                    tsi,
                    "unresolved TSI id in precedence",
                ));
            }
        }
    }
    if let Some(cycle_member) = precedence_cycle(&bundle.precedence) {
        errors.push(ValidationError::new(
            "testsuite.json",
            cycle_member,
            "precedence cycle",
        ));
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let mut system = SystemModel {
        nodes: bundle.nodes.clone(),
        cis,
        environments,
        call_graph,
    };

    // Default criticality: the number of distinct SIs that transitively
    // depend on the CI.
    let derived: Vec<(CiId, u32)> = bundle
        .instances
        .iter()
        .filter(|d| d.criticality.is_none())
        .map(|d| (d.id.clone(), system.derived_criticality(&d.id)))
        .collect();
    for (ci, criticality) in derived {
        if let Some(inst) = system.cis.get_mut(&ci) {
            inst.criticality = criticality;
        }
    }

    Ok(Model {
        system,
        items,
        applications,
        isolation,
        outage_budgets,
        frameworks,
        precedence: bundle.precedence.clone(),
        objective: bundle.objective.clone(),
    })
}

/// Some TSI on a precedence cycle, if one exists.
fn precedence_cycle(pairs: &[PrecedencePair]) -> Option<TsiId> {
    let mut remaining: BTreeSet<TsiId> = pairs
        .iter()
        .flat_map(|p| [p.leading.clone(), p.following.clone()])
        .collect();
    loop {
        let ready: Vec<TsiId> = remaining
            .iter()
            .filter(|t| {
                !pairs
                    .iter()
                    .any(|p| &p.following == *t && remaining.contains(&p.leading))
            })
            .cloned()
            .collect();
        if ready.is_empty() {
            return remaining.first().cloned();
        }
        for t in ready {
            remaining.remove(&t);
        }
        if remaining.is_empty() {
            return None;
        }
    }
}
