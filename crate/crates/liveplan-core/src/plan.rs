//! Final test plan assembly: one test case per deployed configuration, each
//! with a setup, a main invocation list, and a teardown, arranged into the
//! structural pattern of the selected test method and wrapped up with the
//! objective and framework deployment choices.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::coverage::TestConfiguration;
use crate::ids::{AppId, CiId, FrameworkId, TsiId};

use crate::methods::{
    grouping_timing, parallel_capacity, CostBreakdown, Method, MethodAssignment,
};
use crate::model::{DeploymentOption, Model};
use crate::ordering::OrderedPlanDraft;
use crate::runs::CaseLayout;

/// A setup or teardown behavior, carried as its body text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcedureDescriptor {
    pub role: String,
    pub body: String,
}

/// Where a test case sits inside its grouping's method pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructuralRole {
    /// Parallel fragment index within the grouping; fragments run
    /// sequentially, cases inside a fragment run together.
    pub fragment: u32,
    /// Position inside the fragment.
    pub slot: u32,
    /// Small-flip batch this case belongs to (1 or 2), when one of the
    /// grouping's CIs uses the small flip.
    pub flip_batch: Option<u8>,
    /// A bulk service relocation precedes this case (the small-flip
    /// batch boundary).
    pub relocation_before: bool,
    /// Big-flip CIs whose clone set is instantiated before this case.
    pub clone_setup_before: Vec<CiId>,
    /// Big-flip CIs relocated onto their clone and retired after this case.
    pub flip_teardown_after: Vec<CiId>,
}

/// One deployed configuration plus the TSI invocations run under it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    /// Head of the grouping that owns this case.
    pub grouping: AppId,
    pub configuration: TestConfiguration,
    pub setup: ProcedureDescriptor,
    pub main: Vec<AppId>,
    pub teardown: ProcedureDescriptor,
    pub structural_role: StructuralRole,
}

/// Grouping facts recorded for explainability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupingMeta {
    pub head: AppId,
    pub members: Vec<AppId>,
    pub max_path: Vec<CiId>,
    pub residual: bool,
    pub coverage_width: u32,
    pub methods: BTreeMap<CiId, Method>,
    pub costs: BTreeMap<CiId, CostBreakdown>,
    pub case_count: usize,
    pub parallel_capacity: u64,
    /// Cases that fit the small-flip first batch, when a CI uses it.
    pub small_flip_batch1: Option<usize>,
}

/// The deployment option chosen for a framework and its deployment time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameworkChoice {
    pub framework: FrameworkId,
    pub option: DeploymentOption,
    pub deploy_time: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlanMetadata {
    pub groupings: Vec<GroupingMeta>,
    /// Chosen runtime framework deployment per test suite item.
    pub framework_choices: BTreeMap<TsiId, FrameworkChoice>,
    pub deployed_configurations: usize,
    /// Small-flip choices revoked during precedence enforcement.
    pub method_downgrades: Vec<(AppId, CiId)>,
}

/// The generated plan: an objective, an ordered schedule of test cases, and
/// the metadata explaining how it came to be.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestPlan {
    pub objective: String,
    pub schedule: Vec<TestCase>,
    pub metadata: PlanMetadata,
}

impl TestPlan {
    pub fn cases_of<'a>(&'a self, grouping: &'a AppId) -> impl Iterator<Item = &'a TestCase> + 'a {
        self.schedule.iter().filter(move |c| &c.grouping == grouping)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanError {
    /// A framework lists no deployment option at all.
    NoDeploymentOption(FrameworkId),
    /// Parallel capacity must be at least one.
    ZeroParallelism,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::NoDeploymentOption(fw) => {
                write!(f, "framework {fw} has no deployment option")
            }
            PlanError::ZeroParallelism => write!(f, "parallel capacity must be at least 1"),
        }
    }
}

impl core::error::Error for PlanError {}

fn deploy_body(config: &TestConfiguration) -> String {
    alloc::format!("deploy {config}")
}

fn remove_body(config: &TestConfiguration) -> String {
    alloc::format!("remove {config}")
}

/// Builds the plan skeleton from the ordered draft: one test case per
/// deployed configuration, mains already ordered, setup and teardown bodies
/// rendered from the configuration. Groupings without cases are dropped.
pub fn build_initial_plan(
    draft: &OrderedPlanDraft,
    layout: &CaseLayout,
    assignment: &MethodAssignment,
    model: &Model,
) -> TestPlan {
    let mut schedule = Vec::new();
    let mut counter = 0usize;
    for case in draft.schedule() {
        counter += 1;
        schedule.push(TestCase {
            id: alloc::format!("tc-{counter:03}"),
            grouping: case.grouping.clone(),
            configuration: case.config.clone(),
            setup: ProcedureDescriptor {
                role: String::from("setup"),
                body: deploy_body(&case.config),
            },
            main: case.invocations.clone(),
            teardown: ProcedureDescriptor {
                role: String::from("teardown"),
                body: remove_body(&case.config),
            },
            structural_role: StructuralRole::default(),
        });
    }

    let mut groupings_meta = Vec::new();
    for head in &draft.grouping_order {
        let Some(grouping) = layout.groupings.iter().find(|g| &g.head == head) else {
            continue;
        };
        let case_count = draft.cases.get(head).map(|c| c.len()).unwrap_or(0);
        if case_count == 0 {
            continue;
        }
        let methods = assignment
            .per_grouping
            .get(head)
            .cloned()
            .unwrap_or_default();
        let configs: Vec<TestConfiguration> = draft
            .cases
            .get(head)
            .into_iter()
            .flatten()
            .map(|c| c.config.clone())
            .collect();
        let timing = grouping_timing(model, layout, grouping, &methods);
        let costs: BTreeMap<CiId, CostBreakdown> = methods
            .iter()
            .map(|(ci, method)| {
                (
                    ci.clone(),
                    crate::methods::deployment_cost(model, grouping, ci, *method, &configs, timing),
                )
            })
            .collect();
        let width = grouping.head_coverage.width;
        let small_flip_batch1 = methods
            .iter()
            .filter(|(_, m)| **m == Method::SmallFlip)
            .map(|(ci, _)| {
                crate::methods::small_flip_batch1(model, ci, &configs, width, timing) as usize
            })
            .min();
        groupings_meta.push(GroupingMeta {
            head: head.clone(),
            members: grouping.members.iter().cloned().collect(),
            max_path: grouping.max_path.vertices().to_vec(),
            residual: grouping.residual,
            coverage_width: width,
            methods,
            costs,
            case_count,
            parallel_capacity: parallel_capacity(model, grouping.max_path.vertices(), width),
            small_flip_batch1,
        });
    }

    let deployed: alloc::collections::BTreeSet<_> = schedule
        .iter()
        .map(|c| c.configuration.assignment.clone())
        .collect();

    TestPlan {
        objective: String::new(),
        schedule,
        metadata: PlanMetadata {
            groupings: groupings_meta,
            framework_choices: BTreeMap::new(),
            deployed_configurations: deployed.len(),
            method_downgrades: Vec::new(),
        },
    }
}

/// Arranges each grouping's cases into its method pattern:
///
/// - single step and big flip chunk the cases into parallel fragments of at
///   most `P`;
/// - any rolling CI forces strictly sequential cases (fragments of one);
/// - a small flip splits the cases into two batches around an explicit bulk
///   relocation;
/// - big-flip CIs get their clone setup before the first case and their
///   relocate-and-retire step after the last.
pub fn apply_method_pattern(plan: &mut TestPlan) -> Result<(), PlanError> {
    let metas: Vec<GroupingMeta> = plan.metadata.groupings.clone();
    for meta in &metas {
        let p = meta.parallel_capacity;
        if p == 0 {
            return Err(PlanError::ZeroParallelism);
        }
        let case_ids: Vec<String> = plan
            .cases_of(&meta.head)
            .map(|c| c.id.clone())
            .collect();
        if case_ids.is_empty() {
            continue;
        }
        let any_rolling = meta.methods.values().any(|m| *m == Method::RollingPaths);
        let big_flip_cis: Vec<CiId> = meta
            .methods
            .iter()
            .filter(|(_, m)| **m == Method::BigFlip)
            .map(|(ci, _)| ci.clone())
            .collect();

        let total = case_ids.len();
        let batch1 = meta.small_flip_batch1.map(|b| b.min(total));

        let width = if any_rolling { 1 } else { p as usize };
        let mut fragment = 0u32;
        let mut slot = 0u32;
        let mut previous_batch: u8 = 1;
        for (index, case_id) in case_ids.iter().enumerate() {
            let batch = match batch1 {
                Some(b) if index >= b && b > 0 => 2u8,
                Some(_) => 1u8,
                None => 1u8,
            };
            let batch_boundary = batch1.is_some() && batch == 2 && previous_batch == 1;
            if slot as usize >= width || batch_boundary {
                fragment += 1;
                slot = 0;
            }
            let case = plan
                .schedule
                .iter_mut()
                .find(|c| &c.id == case_id)
                .expect("case id stable");
            case.structural_role = StructuralRole {
                fragment,
                slot,
                flip_batch: batch1.map(|_| batch),
                relocation_before: batch_boundary,
                clone_setup_before: if index == 0 { big_flip_cis.clone() } else { Vec::new() },
                flip_teardown_after: if index == total - 1 {
                    big_flip_cis.clone()
                } else {
                    Vec::new()
                },
            };
            slot += 1;
            previous_batch = batch;
        }

        // Fragment indices restart per grouping.
        let mut base: Option<u32> = None;
        for case in plan.schedule.iter_mut().filter(|c| c.grouping == meta.head) {
            let b = *base.get_or_insert(case.structural_role.fragment);
            case.structural_role.fragment -= b;
        }
    }
    Ok(())
}

/// Attaches the objective and picks each item's framework deployment: the
/// first available option in the precedence container, VM, configuration
/// manager, regardless of deployment time.
pub fn wrapup(plan: &mut TestPlan, objective: &str, model: &Model) -> Result<(), PlanError> {
    plan.objective = String::from(objective);
    let mut invoked_tsis: alloc::collections::BTreeSet<TsiId> = Default::default();
    for case in &plan.schedule {
        for app in &case.main {
            invoked_tsis.insert(app.tsi.clone());
        }
    }
    for tsi in invoked_tsis {
        let Some(item) = model.items.get(&tsi) else {
            continue;
        };
        let fw = &item.runtime_framework;
        let Some(options) = model.frameworks.get(fw) else {
            return Err(PlanError::NoDeploymentOption(fw.clone()));
        };
        let chosen = options
            .options
            .iter()
            .min_by_key(|(opt, _)| opt.precedence())
            .map(|(opt, time)| (*opt, *time));
        let Some((option, deploy_time)) = chosen else {
            return Err(PlanError::NoDeploymentOption(fw.clone()));
        };
        plan.metadata.framework_choices.insert(
            tsi,
            FrameworkChoice {
                framework: fw.clone(),
                option,
                deploy_time,
            },
        );
    }
    Ok(())
}

/// Cost and duration summary of a plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlanMetrics {
    /// Relocations per CI as the disturbance simulation counts them.
    pub relocations: BTreeMap<CiId, u64>,
    /// Instantiations per CI from the cost model.
    pub instantiations: BTreeMap<CiId, u64>,
    /// Removals per CI from the cost model.
    pub removals: BTreeMap<CiId, u64>,
    pub fragment_count: u64,
    pub case_count: usize,
    pub deployed_configurations: usize,
    pub estimated_wall: Duration,
}

/// Derives the metrics summary: relocations replayed by the simulator, the
/// instantiation and removal totals from the per-grouping cost model, and a
/// wall-clock estimate (fragments run sequentially, cases of a fragment in
/// parallel).
pub fn plan_metrics(plan: &TestPlan, model: &Model) -> PlanMetrics {
    let report = crate::oracle::simulate_execution(plan, model);

    let mut instantiations: BTreeMap<CiId, u64> = BTreeMap::new();
    let mut removals: BTreeMap<CiId, u64> = BTreeMap::new();
    for meta in &plan.metadata.groupings {
        for (ci, cost) in &meta.costs {
            *instantiations.entry(ci.clone()).or_default() += cost.instantiations;
            *removals.entry(ci.clone()).or_default() += cost.removals;
        }
    }

    let mut fragment_count = 0u64;
    let mut wall = Duration::ZERO;
    for meta in &plan.metadata.groupings {
        let cases: Vec<&TestCase> = plan.cases_of(&meta.head).collect();
        let mut fragments: BTreeMap<u32, Duration> = BTreeMap::new();
        for case in cases {
            let setup = case_setup_estimate(model, case, &meta.methods);
            let exec: Duration = case
                .main
                .iter()
                .filter_map(|a| model.application(a))
                .map(|a| a.execution_time)
                .sum();
            let total = setup + exec;
            let entry = fragments.entry(case.structural_role.fragment).or_default();
            if total > *entry {
                *entry = total;
            }
        }
        fragment_count += fragments.len() as u64;
        wall += fragments.values().sum::<Duration>();
    }

    PlanMetrics {
        relocations: report.relocations,
        instantiations,
        removals,
        fragment_count,
        case_count: plan.schedule.len(),
        deployed_configurations: plan.metadata.deployed_configurations,
        estimated_wall: wall,
    }
}

fn case_setup_estimate(
    model: &Model,
    case: &TestCase,
    methods: &BTreeMap<CiId, Method>,
) -> Duration {
    let mut total = Duration::ZERO;
    for ci in case.configuration.path.vertices() {
        let Some(iso) = model.isolation.get(ci) else {
            continue;
        };
        total += match methods.get(ci) {
            Some(Method::SingleStep) | None => Duration::ZERO,
            Some(Method::BigFlip) | Some(Method::SmallFlip) => iso.snapshot_time + iso.clone_time,
            Some(Method::RollingPaths) => iso.snapshot_time,
        };
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec;
    use alloc::vec::Vec;

    use crate::ids::{EnvId, NodeId, SiId, TsiId};
    use crate::model::{
        BoundaryEnvironment, ConfiguredInstance, CoverageCriterion, CoverageKind,
        FrameworkOptions, IsolationEntry, TestSuiteItem, TsiApplication,
    };
    use crate::path::CallPath;
    use crate::pipeline::{generate_with_trace, GenerateOptions};

    fn ci(s: &str) -> CiId {
        CiId::from(s)
    }

    /// Single-CI model tuned so the pipeline selects the wanted method:
    /// risk-free for single step, hopeless budgets for rolling, tight pools
    /// for the small flip.
    fn single_ci_model(
        envs: usize,
        component_count: u32,
        pool_size: usize,
        risk: bool,
        budget_ms: u64,
    ) -> Model {
        let mut model = Model::default();
        let pool: BTreeSet<NodeId> = (0..pool_size)
            .map(|k| NodeId::new(alloc::format!("n{k:02}")))
            .collect();
        model.system.nodes = pool.clone();
        model.system.cis.insert(
            ci("A"),
            ConfiguredInstance {
                id: ci("A"),
                component_count,
                node_pool: pool.clone(),
                cool_down: core::time::Duration::from_secs(1_000_000),
                scaling_step: 1,
                interference_risk: risk,
                criticality: 1,
                service_instances: [SiId::from("A-S")].into_iter().collect(),
            },
        );
        for e in 0..envs {
            let env_id = EnvId::new(alloc::format!("EA.{}", e + 1));
            model.system.environments.insert(
                env_id.clone(),
                BoundaryEnvironment {
                    id: env_id,
                    owner: ci("A"),
                    collocated: Default::default(),
                    hosting_nodes: pool.iter().take(2).cloned().collect(),
                },
            );
        }
        model.system.call_graph.add_vertex(ci("A"));
        model.isolation.insert(
            ci("A"),
            IsolationEntry {
                risk,
                snapshot_time: core::time::Duration::from_millis(400),
                clone_time: core::time::Duration::from_millis(400),
                relocation_time: core::time::Duration::from_millis(300),
            },
        );
        model.outage_budgets.insert(
            SiId::from("A-S"),
            core::time::Duration::from_millis(budget_ms),
        );
        model.frameworks.insert(
            crate::ids::FrameworkId::from("fw"),
            FrameworkOptions {
                options: [(DeploymentOption::Container, core::time::Duration::from_secs(2))]
                    .into_iter()
                    .collect(),
            },
        );
        let path = CallPath::from_vertices_unchecked(vec![ci("A")]);
        let coverage = CoverageCriterion::new(CoverageKind::AllBeMixtures, 1);
        model.applications.push(TsiApplication {
            id: crate::ids::AppId::new(TsiId::from("TC1"), 0),
            path: path.clone(),
            coverage,
            execution_time: core::time::Duration::from_secs(5),
            runtime_framework: crate::ids::FrameworkId::from("fw"),
        });
        model.items.insert(
            TsiId::from("TC1"),
            TestSuiteItem {
                id: TsiId::from("TC1"),
                call_paths: vec![path],
                coverage,
                execution_time: core::time::Duration::from_secs(5),
                runtime_framework: crate::ids::FrameworkId::from("fw"),
            },
        );
        model
    }

    fn fragments_of(plan: &TestPlan) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = Vec::new();
        for case in &plan.schedule {
            let fragment = case.structural_role.fragment as usize;
            while out.len() <= fragment {
                out.push(Vec::new());
            }
            out[fragment].push(case.structural_role.slot);
        }
        out
    }

    #[test]
    fn single_step_chunks_into_parallel_fragments() {
        // Six configurations, parallel capacity three: two fragments of
        // three cases each.
        let model = single_ci_model(6, 3, 8, false, 60_000);
        let (plan, _) = generate_with_trace(&model, &GenerateOptions::default()).unwrap();
        let meta = &plan.metadata.groupings[0];
        assert_eq!(meta.methods[&ci("A")], Method::SingleStep);
        assert_eq!(meta.parallel_capacity, 3);
        let fragments = fragments_of(&plan);
        assert_eq!(fragments.len(), 2);
        assert_eq!(fragments[0], vec![0, 1, 2]);
        assert_eq!(fragments[1], vec![0, 1, 2]);
    }

    #[test]
    fn rolling_runs_strictly_sequentially() {
        // Production holds the whole pool and the budget excludes flips:
        // rolling paths, one case per fragment.
        let model = single_ci_model(3, 4, 4, true, 1_000);
        let (plan, _) = generate_with_trace(&model, &GenerateOptions::default()).unwrap();
        let meta = &plan.metadata.groupings[0];
        assert_eq!(meta.methods[&ci("A")], Method::RollingPaths);
        let fragments = fragments_of(&plan);
        assert_eq!(fragments.len(), 3);
        for f in fragments {
            assert_eq!(f, vec![0]);
        }
    }

    #[test]
    fn small_flip_splits_batches_around_the_relocation() {
        // Five configurations; two spare nodes admit two environments in
        // the first batch, the bulk relocation precedes the rest.
        let model = single_ci_model(5, 2, 4, true, 900);
        let (plan, trace) = generate_with_trace(&model, &GenerateOptions::default()).unwrap();
        let head = crate::ids::AppId::new(TsiId::from("TC1"), 0);
        assert_eq!(
            trace.assignment.method(&head, &ci("A")),
            Some(Method::SmallFlip)
        );
        let meta = &plan.metadata.groupings[0];
        assert_eq!(meta.small_flip_batch1, Some(2));
        let cases: Vec<&TestCase> = plan.cases_of(&head).collect();
        assert_eq!(cases.len(), 5);
        let batches: Vec<Option<u8>> = cases
            .iter()
            .map(|c| c.structural_role.flip_batch)
            .collect();
        assert_eq!(
            batches,
            vec![Some(1), Some(1), Some(2), Some(2), Some(2)]
        );
        let relocations: Vec<bool> = cases
            .iter()
            .map(|c| c.structural_role.relocation_before)
            .collect();
        assert_eq!(relocations, vec![false, false, true, false, false]);
        // Fragment width never exceeds the parallel capacity.
        let p = meta.parallel_capacity as usize;
        for f in fragments_of(&plan) {
            assert!(f.len() <= p);
        }
    }

    #[test]
    fn big_flip_marks_clone_setup_and_teardown() {
        // Risky CI with ample spare nodes and budget: big flip; the clone
        // set comes up before the first case and retires after the last.
        let model = single_ci_model(3, 2, 8, true, 60_000);
        let (plan, _) = generate_with_trace(&model, &GenerateOptions::default()).unwrap();
        let meta = &plan.metadata.groupings[0];
        assert_eq!(meta.methods[&ci("A")], Method::BigFlip);
        let first = &plan.schedule[0];
        let last = plan.schedule.last().unwrap();
        assert_eq!(first.structural_role.clone_setup_before, vec![ci("A")]);
        assert_eq!(last.structural_role.flip_teardown_after, vec![ci("A")]);
        for case in &plan.schedule[1..] {
            assert!(case.structural_role.clone_setup_before.is_empty());
        }
    }

    #[test]
    fn wrapup_prefers_container_then_vm_then_configuration_manager() {
        let combos: [(Vec<(DeploymentOption, u64)>, DeploymentOption); 3] = [
            (
                vec![(DeploymentOption::Container, 2), (DeploymentOption::Vm, 30)],
                DeploymentOption::Container,
            ),
            (
                vec![(DeploymentOption::ConfigurationManager, 10)],
                DeploymentOption::ConfigurationManager,
            ),
            (
                // Precedence outranks deployment time.
                vec![
                    (DeploymentOption::Vm, 30),
                    (DeploymentOption::ConfigurationManager, 5),
                ],
                DeploymentOption::Vm,
            ),
        ];
        for (options, expected) in combos {
            let mut model = single_ci_model(2, 2, 8, false, 60_000);
            model.frameworks.insert(
                crate::ids::FrameworkId::from("fw"),
                FrameworkOptions {
                    options: options
                        .iter()
                        .map(|(o, s)| (*o, core::time::Duration::from_secs(*s)))
                        .collect(),
                },
            );
            let (plan, _) = generate_with_trace(&model, &GenerateOptions::default()).unwrap();
            let choice = &plan.metadata.framework_choices[&TsiId::from("TC1")];
            assert_eq!(choice.option, expected);
        }
    }

    #[test]
    fn framework_without_options_is_a_wrapup_error() {
        let mut model = single_ci_model(2, 2, 8, false, 60_000);
        model.frameworks.insert(
            crate::ids::FrameworkId::from("fw"),
            FrameworkOptions::default(),
        );
        let err = generate_with_trace(&model, &GenerateOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            crate::pipeline::PipelineError::Plan(PlanError::NoDeploymentOption(_))
        ));
    }

    #[test]
    fn setup_and_teardown_bodies_render_the_configuration() {
        let model = single_ci_model(2, 2, 8, false, 60_000);
        let (plan, _) = generate_with_trace(&model, &GenerateOptions::default()).unwrap();
        let case = &plan.schedule[0];
        assert_eq!(case.setup.role, "setup");
        assert_eq!(case.teardown.role, "teardown");
        assert_eq!(case.setup.body, "deploy {A:{EA.1}}");
        assert_eq!(case.teardown.body, "remove {A:{EA.1}}");
        assert!(!case.main.is_empty());
    }

    #[test]
    fn metrics_cover_costs_and_wall_time() {
        let model = single_ci_model(3, 4, 4, true, 1_000);
        let (plan, _) = generate_with_trace(&model, &GenerateOptions::default()).unwrap();
        let metrics = plan_metrics(&plan, &model);
        // Rolling over three configurations: entry plus two transitions.
        assert_eq!(metrics.relocations[&ci("A")], 3);
        assert_eq!(metrics.instantiations[&ci("A")], 3);
        assert_eq!(metrics.case_count, 3);
        assert_eq!(metrics.fragment_count, 3);
        assert!(metrics.estimated_wall > core::time::Duration::ZERO);
    }
}
