//! Input bundle: a directory of JSON documents describing the system, the
//! call graph, the test suite, and the cost matrices.
//!
//! Field names are part of the published interface; `docs/formats.md`
//! documents every document. Durations are written in seconds as JSON
//! numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use liveplan_core::ids::{CiId, EnvId, FrameworkId, NodeId, SiId, TsiId};
use liveplan_core::model::{
    BoundaryEnvironment, CoverageCriterion, CoverageKind, DeploymentOption, FrameworkOptions,
    IsolationEntry, PrecedencePair,
};
use liveplan_core::validate::{InputBundle, InstanceDoc, ItemDoc};

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

#[derive(Debug, Deserialize, Serialize)]
struct SystemDoc {
    nodes: Vec<String>,
    configured_instances: Vec<CiDoc>,
    #[serde(default)]
    collocation: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct CiDoc {
    id: String,
    component_count: u32,
    node_pool: Vec<String>,
    cool_down_seconds: f64,
    scaling_step: u32,
    interference_risk: bool,
    #[serde(default)]
    criticality: Option<u32>,
    #[serde(default)]
    service_instances: Vec<String>,
    #[serde(default)]
    boundary_environments: Vec<EnvDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct EnvDoc {
    id: String,
    #[serde(default)]
    collocated: Vec<String>,
    hosting_nodes: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
struct CallGraphDoc {
    vertices: Vec<String>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct EdgeDoc {
    source: String,
    target: String,
    tolerance_seconds: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct TestSuiteDoc {
    items: Vec<TsiDoc>,
    #[serde(default)]
    precedence: Vec<PrecedenceDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct TsiDoc {
    id: String,
    call_paths: Vec<Vec<String>>,
    coverage: CoverageDoc,
    execution_time_seconds: f64,
    runtime_framework: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct CoverageDoc {
    kind: String,
    width: u32,
}

#[derive(Debug, Deserialize, Serialize)]
struct PrecedenceDoc {
    leading: String,
    following: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct IsolationDoc {
    entries: Vec<IsolationRow>,
}

#[derive(Debug, Deserialize, Serialize)]
struct IsolationRow {
    ci: String,
    risk: bool,
    snapshot_seconds: f64,
    clone_seconds: f64,
    relocation_seconds: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct OutageDoc {
    #[serde(default)]
    acceptable_outages: Vec<OutageRow>,
}

#[derive(Debug, Deserialize, Serialize)]
struct OutageRow {
    service_instance: String,
    seconds: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct FrameworksDoc {
    frameworks: Vec<FrameworkDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct FrameworkDoc {
    id: String,
    options: Vec<FrameworkOptionDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct FrameworkOptionDoc {
    kind: String,
    deploy_seconds: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct ObjectiveDoc {
    objective: String,
}

fn read_doc<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<T, BundleError> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|source| BundleError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| BundleError::Parse { path, source })
}

fn secs(value: f64) -> Duration {
    Duration::try_from_secs_f64(value.max(0.0)).unwrap_or(Duration::ZERO)
}

/// Parses a coverage kind name; unknown names fall through as an error at
/// validation by mapping to a poison width, so report them here instead.
fn coverage_kind(name: &str) -> Option<CoverageKind> {
    match name {
        "all_be_mixtures" => Some(CoverageKind::AllBeMixtures),
        "pairwise_be_mixtures" => Some(CoverageKind::PairwiseBeMixtures),
        "all_be_mixtures_paths" => Some(CoverageKind::AllBeMixturesPaths),
        _ => None,
    }
}

fn deployment_option(name: &str) -> Option<DeploymentOption> {
    match name {
        "container" => Some(DeploymentOption::Container),
        "vm" => Some(DeploymentOption::Vm),
        "configuration_manager" => Some(DeploymentOption::ConfigurationManager),
        _ => None,
    }
}

/// Loads the seven bundle documents from a directory into the engine's raw
/// input form. Unknown enum names surface as parse errors with the document
/// path.
pub fn load_bundle(dir: &Path) -> Result<InputBundle, BundleError> {
    let system: SystemDoc = read_doc(dir, "system.json")?;
    let callgraph: CallGraphDoc = read_doc(dir, "callgraph.json")?;
    let testsuite: TestSuiteDoc = read_doc(dir, "testsuite.json")?;
    let isolation: IsolationDoc = read_doc(dir, "isolation.json")?;
    let outage: OutageDoc = read_doc(dir, "outage.json")?;
    let frameworks: FrameworksDoc = read_doc(dir, "frameworks.json")?;
    let objective: ObjectiveDoc = read_doc(dir, "objective.json")?;

    let bad_enum = |path: &str, message: String| BundleError::Parse {
        path: dir.join(path),
        source: serde_json::Error::io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            message,
        )),
    };

    let mut environments = Vec::new();
    let mut instances = Vec::new();
    for ci in &system.configured_instances {
        for env in &ci.boundary_environments {
            environments.push(BoundaryEnvironment {
                id: EnvId::from(env.id.as_str()),
                owner: CiId::from(ci.id.as_str()),
                collocated: env.collocated.iter().map(|s| CiId::from(s.as_str())).collect(),
                hosting_nodes: env
                    .hosting_nodes
                    .iter()
                    .map(|s| NodeId::from(s.as_str()))
                    .collect(),
            });
        }
        instances.push(InstanceDoc {
            id: CiId::from(ci.id.as_str()),
            component_count: ci.component_count,
            node_pool: ci.node_pool.iter().map(|s| NodeId::from(s.as_str())).collect(),
            cool_down: secs(ci.cool_down_seconds),
            scaling_step: ci.scaling_step,
            interference_risk: ci.interference_risk,
            criticality: ci.criticality,
            service_instances: ci
                .service_instances
                .iter()
                .map(|s| SiId::from(s.as_str()))
                .collect(),
        });
    }

    let mut items = Vec::new();
    for item in &testsuite.items {
        let kind = coverage_kind(&item.coverage.kind).ok_or_else(|| {
            bad_enum(
                "testsuite.json",
                format!("unknown coverage kind `{}`", item.coverage.kind),
            )
        })?;
        items.push(ItemDoc {
            id: TsiId::from(item.id.as_str()),
            call_paths: item
                .call_paths
                .iter()
                .map(|p| p.iter().map(|v| CiId::from(v.as_str())).collect())
                .collect(),
            coverage: CoverageCriterion::new(kind, item.coverage.width),
            execution_time: secs(item.execution_time_seconds),
            runtime_framework: FrameworkId::from(item.runtime_framework.as_str()),
        });
    }

    let mut framework_list = Vec::new();
    for fw in &frameworks.frameworks {
        let mut options = BTreeMap::new();
        for opt in &fw.options {
            let kind = deployment_option(&opt.kind).ok_or_else(|| {
                bad_enum(
                    "frameworks.json",
                    format!("unknown deployment option `{}`", opt.kind),
                )
            })?;
            options.insert(kind, secs(opt.deploy_seconds));
        }
        framework_list.push((FrameworkId::from(fw.id.as_str()), FrameworkOptions { options }));
    }

    let collocation: BTreeMap<NodeId, BTreeSet<CiId>> = system
        .collocation
        .iter()
        .map(|(node, cis)| {
            (
                NodeId::from(node.as_str()),
                cis.iter().map(|c| CiId::from(c.as_str())).collect(),
            )
        })
        .collect();

    Ok(InputBundle {
        nodes: system.nodes.iter().map(|s| NodeId::from(s.as_str())).collect(),
        instances,
        environments,
        collocation,
        graph_vertices: callgraph
            .vertices
            .iter()
            .map(|s| CiId::from(s.as_str()))
            .collect(),
        graph_edges: callgraph
            .edges
            .iter()
            .map(|e| {
                (
                    CiId::from(e.source.as_str()),
                    CiId::from(e.target.as_str()),
                    secs(e.tolerance_seconds),
                )
            })
            .collect(),
        items,
        precedence: testsuite
            .precedence
            .iter()
            .map(|p| PrecedencePair {
                leading: TsiId::from(p.leading.as_str()),
                following: TsiId::from(p.following.as_str()),
            })
            .collect(),
        isolation: isolation
            .entries
            .iter()
            .map(|row| {
                (
                    CiId::from(row.ci.as_str()),
                    IsolationEntry {
                        risk: row.risk,
                        snapshot_time: secs(row.snapshot_seconds),
                        clone_time: secs(row.clone_seconds),
                        relocation_time: secs(row.relocation_seconds),
                    },
                )
            })
            .collect(),
        outage: outage
            .acceptable_outages
            .iter()
            .map(|row| (SiId::from(row.service_instance.as_str()), secs(row.seconds)))
            .collect(),
        frameworks: framework_list,
        objective: objective.objective,
    })
}
