//! Plan and metrics documents.
//!
//! `plan.json` is a structured execution schedule: a test objective, an
//! ordered list of test cases (each a setup / main / teardown triple over a
//! test configuration), and the metadata explaining grouping, method, and
//! cost decisions. Serialization is canonical: the same plan always renders
//! byte-identically, and `parse` followed by `serialize` is the identity.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use liveplan_core::coverage::{Mixture, TestConfiguration};
use liveplan_core::ids::{AppId, CiId, EnvId, FrameworkId, TsiId};
use liveplan_core::methods::{CostBreakdown, Method};
use liveplan_core::model::DeploymentOption;
use liveplan_core::oracle::DisturbanceReport;
use liveplan_core::path::CallPath;
use liveplan_core::plan::{
    FrameworkChoice, GroupingMeta, PlanMetadata, PlanMetrics, ProcedureDescriptor,
    StructuralRole, TestCase, TestPlan,
};

#[derive(Debug, Error)]
pub enum PlanParseError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("schedule[{index}]: {message}")]
    Invalid { index: usize, message: String },
}

#[derive(Debug, Deserialize, Serialize)]
struct PlanDoc {
    objective: String,
    schedule: Vec<CaseDoc>,
    metadata: MetadataDoc,
}

#[derive(Debug, Deserialize, Serialize)]
struct CaseDoc {
    id: String,
    grouping: String,
    configuration: ConfigDoc,
    setup: ProcedureDoc,
    main: MainDoc,
    teardown: ProcedureDoc,
    structural_role: RoleDoc,
}

#[derive(Debug, Deserialize, Serialize)]
struct ConfigDoc {
    path: Vec<String>,
    assignment: BTreeMap<String, BTreeMap<String, u32>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct ProcedureDoc {
    role: String,
    body: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct MainDoc {
    role: String,
    invocations: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RoleDoc {
    fragment: u32,
    slot: u32,
    flip_batch: Option<u8>,
    relocation_before: bool,
    clone_setup_before: Vec<String>,
    flip_teardown_after: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
struct MetadataDoc {
    groupings: Vec<GroupingDoc>,
    framework_choices: BTreeMap<String, FrameworkChoiceDoc>,
    deployed_configurations: usize,
    method_downgrades: Vec<DowngradeDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct GroupingDoc {
    head: String,
    members: Vec<String>,
    max_path: Vec<String>,
    residual: bool,
    coverage_width: u32,
    methods: BTreeMap<String, String>,
    costs: BTreeMap<String, CostDoc>,
    case_count: usize,
    parallel_capacity: u64,
    small_flip_batch1: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
struct CostDoc {
    instantiations: u64,
    removals: u64,
    relocations: u64,
    iteration_count: u64,
}

#[derive(Debug, Deserialize, Serialize)]
struct FrameworkChoiceDoc {
    framework: String,
    option: String,
    deploy_seconds: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct DowngradeDoc {
    grouping: String,
    ci: String,
}

/// `TSIid-k` application id; the index is everything after the last dash.
fn parse_app_id(s: &str) -> Result<AppId, String> {
    let (tsi, index) = s
        .rsplit_once('-')
        .ok_or_else(|| format!("malformed application id `{s}`"))?;
    let index: usize = index
        .parse()
        .map_err(|_| format!("malformed application id `{s}`"))?;
    Ok(AppId::new(TsiId::from(tsi), index))
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "single_step" => Ok(Method::SingleStep),
        "big_flip" => Ok(Method::BigFlip),
        "small_flip" => Ok(Method::SmallFlip),
        "rolling_paths" => Ok(Method::RollingPaths),
        other => Err(format!("unknown method `{other}`")),
    }
}

fn parse_option(s: &str) -> Result<DeploymentOption, String> {
    match s {
        "container" => Ok(DeploymentOption::Container),
        "vm" => Ok(DeploymentOption::Vm),
        "configuration_manager" => Ok(DeploymentOption::ConfigurationManager),
        other => Err(format!("unknown deployment option `{other}`")),
    }
}

fn config_to_doc(config: &TestConfiguration) -> ConfigDoc {
    ConfigDoc {
        path: config.path.vertices().iter().map(|v| v.0.clone()).collect(),
        assignment: config
            .assignment
            .iter()
            .map(|(ci, m)| {
                (
                    ci.0.clone(),
                    m.occurrences()
                        .iter()
                        .map(|(env, count)| (env.0.clone(), *count))
                        .collect(),
                )
            })
            .collect(),
    }
}

fn config_from_doc(doc: &ConfigDoc) -> TestConfiguration {
    let path = CallPath::from_vertices_unchecked(
        doc.path.iter().map(|v| CiId::from(v.as_str())).collect(),
    );
    let assignment = doc
        .assignment
        .iter()
        .map(|(ci, occurrences)| {
            (
                CiId::from(ci.as_str()),
                Mixture::new(
                    occurrences
                        .iter()
                        .map(|(env, count)| (EnvId::from(env.as_str()), *count))
                        .collect(),
                ),
            )
        })
        .collect();
    TestConfiguration::new(path, assignment)
}

fn plan_to_doc(plan: &TestPlan) -> PlanDoc {
    PlanDoc {
        objective: plan.objective.clone(),
        schedule: plan
            .schedule
            .iter()
            .map(|case| CaseDoc {
                id: case.id.clone(),
                grouping: case.grouping.to_string(),
                configuration: config_to_doc(&case.configuration),
                setup: ProcedureDoc {
                    role: case.setup.role.clone(),
                    body: case.setup.body.clone(),
                },
                main: MainDoc {
                    role: "main".to_string(),
                    invocations: case.main.iter().map(|a| a.to_string()).collect(),
                },
                teardown: ProcedureDoc {
                    role: case.teardown.role.clone(),
                    body: case.teardown.body.clone(),
                },
                structural_role: RoleDoc {
                    fragment: case.structural_role.fragment,
                    slot: case.structural_role.slot,
                    flip_batch: case.structural_role.flip_batch,
                    relocation_before: case.structural_role.relocation_before,
                    clone_setup_before: case
                        .structural_role
                        .clone_setup_before
                        .iter()
                        .map(|c| c.0.clone())
                        .collect(),
                    flip_teardown_after: case
                        .structural_role
                        .flip_teardown_after
                        .iter()
                        .map(|c| c.0.clone())
                        .collect(),
                },
            })
            .collect(),
        metadata: MetadataDoc {
            groupings: plan
                .metadata
                .groupings
                .iter()
                .map(|g| GroupingDoc {
                    head: g.head.to_string(),
                    members: g.members.iter().map(|m| m.to_string()).collect(),
                    max_path: g.max_path.iter().map(|c| c.0.clone()).collect(),
                    residual: g.residual,
                    coverage_width: g.coverage_width,
                    methods: g
                        .methods
                        .iter()
                        .map(|(ci, m)| (ci.0.clone(), m.name().to_string()))
                        .collect(),
                    costs: g
                        .costs
                        .iter()
                        .map(|(ci, c)| {
                            (
                                ci.0.clone(),
                                CostDoc {
                                    instantiations: c.instantiations,
                                    removals: c.removals,
                                    relocations: c.relocations,
                                    iteration_count: c.iteration_count,
                                },
                            )
                        })
                        .collect(),
                    case_count: g.case_count,
                    parallel_capacity: g.parallel_capacity,
                    small_flip_batch1: g.small_flip_batch1,
                })
                .collect(),
            framework_choices: plan
                .metadata
                .framework_choices
                .iter()
                .map(|(tsi, choice)| {
                    (
                        tsi.0.clone(),
                        FrameworkChoiceDoc {
                            framework: choice.framework.0.clone(),
                            option: choice.option.name().to_string(),
                            deploy_seconds: choice.deploy_time.as_secs_f64(),
                        },
                    )
                })
                .collect(),
            deployed_configurations: plan.metadata.deployed_configurations,
            method_downgrades: plan
                .metadata
                .method_downgrades
                .iter()
                .map(|(g, ci)| DowngradeDoc {
                    grouping: g.to_string(),
                    ci: ci.0.clone(),
                })
                .collect(),
        },
    }
}

fn plan_from_doc(doc: &PlanDoc) -> Result<TestPlan, PlanParseError> {
    let invalid = |index: usize, message: String| PlanParseError::Invalid { index, message };
    let mut schedule = Vec::with_capacity(doc.schedule.len());
    for (index, case) in doc.schedule.iter().enumerate() {
        if case.main.invocations.is_empty() {
            return Err(invalid(index, "main must invoke at least one TSI".into()));
        }
        for (role, expected) in [
            (case.setup.role.as_str(), "setup"),
            (case.main.role.as_str(), "main"),
            (case.teardown.role.as_str(), "teardown"),
        ] {
            if role != expected {
                return Err(invalid(
                    index,
                    format!("expected role `{expected}`, found `{role}`"),
                ));
            }
        }
        let main = case
            .main
            .invocations
            .iter()
            .map(|s| parse_app_id(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| invalid(index, m))?;
        schedule.push(TestCase {
            id: case.id.clone(),
            grouping: parse_app_id(&case.grouping).map_err(|m| invalid(index, m))?,
            configuration: config_from_doc(&case.configuration),
            setup: ProcedureDescriptor {
                role: case.setup.role.clone(),
                body: case.setup.body.clone(),
            },
            main,
            teardown: ProcedureDescriptor {
                role: case.teardown.role.clone(),
                body: case.teardown.body.clone(),
            },
            structural_role: StructuralRole {
                fragment: case.structural_role.fragment,
                slot: case.structural_role.slot,
                flip_batch: case.structural_role.flip_batch,
                relocation_before: case.structural_role.relocation_before,
                clone_setup_before: case
                    .structural_role
                    .clone_setup_before
                    .iter()
                    .map(|s| CiId::from(s.as_str()))
                    .collect(),
                flip_teardown_after: case
                    .structural_role
                    .flip_teardown_after
                    .iter()
                    .map(|s| CiId::from(s.as_str()))
                    .collect(),
            },
        });
    }

    let mut groupings = Vec::with_capacity(doc.metadata.groupings.len());
    for g in &doc.metadata.groupings {
        let head = parse_app_id(&g.head).map_err(|m| invalid(0, m))?;
        let members = g
            .members
            .iter()
            .map(|s| parse_app_id(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| invalid(0, m))?;
        let mut methods = BTreeMap::new();
        for (ci, name) in &g.methods {
            methods.insert(
                CiId::from(ci.as_str()),
                parse_method(name).map_err(|m| invalid(0, m))?,
            );
        }
        let costs = g
            .costs
            .iter()
            .map(|(ci, c)| {
                (
                    CiId::from(ci.as_str()),
                    CostBreakdown {
                        instantiations: c.instantiations,
                        removals: c.removals,
                        relocations: c.relocations,
                        iteration_count: c.iteration_count,
                    },
                )
            })
            .collect();
        groupings.push(GroupingMeta {
            head,
            members,
            max_path: g.max_path.iter().map(|s| CiId::from(s.as_str())).collect(),
            residual: g.residual,
            coverage_width: g.coverage_width,
            methods,
            costs,
            case_count: g.case_count,
            parallel_capacity: g.parallel_capacity,
            small_flip_batch1: g.small_flip_batch1,
        });
    }

    let mut framework_choices = BTreeMap::new();
    for (tsi, choice) in &doc.metadata.framework_choices {
        framework_choices.insert(
            TsiId::from(tsi.as_str()),
            FrameworkChoice {
                framework: FrameworkId::from(choice.framework.as_str()),
                option: parse_option(&choice.option).map_err(|m| invalid(0, m))?,
                deploy_time: Duration::try_from_secs_f64(choice.deploy_seconds.max(0.0))
                    .unwrap_or(Duration::ZERO),
            },
        );
    }

    let method_downgrades = doc
        .metadata
        .method_downgrades
        .iter()
        .map(|d| Ok((parse_app_id(&d.grouping)?, CiId::from(d.ci.as_str()))))
        .collect::<Result<Vec<_>, String>>()
        .map_err(|m| invalid(0, m))?;

    Ok(TestPlan {
        objective: doc.objective.clone(),
        schedule,
        metadata: PlanMetadata {
            groupings,
            framework_choices,
            deployed_configurations: doc.metadata.deployed_configurations,
            method_downgrades,
        },
    })
}

/// Renders the plan in its canonical byte form.
pub fn serialize_plan(plan: &TestPlan) -> String {
    let doc = plan_to_doc(plan);
    let mut text = serde_json::to_string_pretty(&doc).expect("plan serializes");
    text.push('\n');
    text
}

/// Parses a plan document, checking the structural schema along the way.
pub fn parse_plan(text: &str) -> Result<TestPlan, PlanParseError> {
    let doc: PlanDoc = serde_json::from_str(text)?;
    plan_from_doc(&doc)
}

#[derive(Debug, Deserialize, Serialize)]
pub struct MetricsDoc {
    pub per_ci: BTreeMap<String, PerCiMetrics>,
    pub fragments: u64,
    pub cases: usize,
    pub deployed_configurations: usize,
    /// Absent when the metrics were derived from a plan alone, without the
    /// input bundle's execution times.
    pub estimated_wall_seconds: Option<f64>,
    pub noticeable_outage_seconds: BTreeMap<String, f64>,
    pub budget_violations: Vec<ViolationDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct PerCiMetrics {
    pub relocations: u64,
    pub instantiations: u64,
    pub removals: u64,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct ViolationDoc {
    pub service_instance: String,
    pub accumulated_seconds: f64,
    pub budget_seconds: f64,
}

/// Builds the metrics document from computed metrics and the simulation
/// report.
pub fn metrics_doc(
    metrics: &PlanMetrics,
    report: &DisturbanceReport,
    with_wall: bool,
) -> MetricsDoc {
    let mut per_ci: BTreeMap<String, PerCiMetrics> = BTreeMap::new();
    let all_cis: std::collections::BTreeSet<&CiId> = metrics
        .relocations
        .keys()
        .chain(metrics.instantiations.keys())
        .chain(metrics.removals.keys())
        .collect();
    for ci in all_cis {
        per_ci.insert(
            ci.0.clone(),
            PerCiMetrics {
                relocations: metrics.relocations.get(ci).copied().unwrap_or(0),
                instantiations: metrics.instantiations.get(ci).copied().unwrap_or(0),
                removals: metrics.removals.get(ci).copied().unwrap_or(0),
            },
        );
    }
    MetricsDoc {
        per_ci,
        fragments: metrics.fragment_count,
        cases: metrics.case_count,
        deployed_configurations: metrics.deployed_configurations,
        estimated_wall_seconds: with_wall.then_some(metrics.estimated_wall.as_secs_f64()),
        noticeable_outage_seconds: report
            .noticeable_outage
            .iter()
            .map(|(si, d)| (si.0.clone(), d.as_secs_f64()))
            .collect(),
        budget_violations: report
            .violations
            .iter()
            .map(|v| ViolationDoc {
                service_instance: v.service_instance.0.clone(),
                accumulated_seconds: v.accumulated.as_secs_f64(),
                budget_seconds: v.budget.as_secs_f64(),
            })
            .collect(),
    }
}

pub fn serialize_metrics(doc: &MetricsDoc) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("metrics serialize");
    text.push('\n');
    text
}
