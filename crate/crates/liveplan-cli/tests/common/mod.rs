//! Random instance generation shared by the integration suites.
//!
//! Instances are built directly as validated models: a random DAG of CIs
//! with boundary environments, a suite of applications on random simple
//! paths, and cost matrices that keep rolling paths applicable everywhere
//! (so no instance dead-ends in "no safe method").

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use rand_chacha::ChaCha8Rng;
use rand::Rng;

use liveplan_core::ids::{AppId, CiId, EnvId, FrameworkId, NodeId, SiId, TsiId};
use liveplan_core::model::{
    BoundaryEnvironment, ConfiguredInstance, CoverageCriterion, CoverageKind, DeploymentOption,
    FrameworkOptions, IsolationEntry, Model, PrecedencePair, SystemModel, TestSuiteItem,
    TsiApplication,
};
use liveplan_core::path::CallPath;

pub struct InstanceParams {
    pub max_cis: usize,
    pub max_apps: usize,
    pub max_path_len: usize,
    pub max_envs: usize,
    pub kinds: Vec<CoverageKind>,
    pub max_width: u32,
    pub precedence_pairs: usize,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            max_cis: 6,
            max_apps: 6,
            max_path_len: 5,
            max_envs: 3,
            kinds: vec![
                CoverageKind::AllBeMixtures,
                CoverageKind::PairwiseBeMixtures,
                CoverageKind::AllBeMixturesPaths,
            ],
            max_width: 2,
            precedence_pairs: 0,
        }
    }
}

pub fn ci(n: usize) -> CiId {
    CiId::new(format!("CI{n}"))
}

/// A random model within the given bounds. Tolerances are generous and
/// isolation times small, so every CI always has at least rolling paths
/// available.
pub fn random_model(rng: &mut ChaCha8Rng, params: &InstanceParams) -> Model {
    let n_cis = rng.gen_range(2..=params.max_cis.max(2));

    let mut system = SystemModel::default();
    for i in 1..=n_cis {
        let id = ci(i);
        let pool: BTreeSet<NodeId> = (0..4)
            .map(|k| NodeId::new(format!("CI{i}-n{k}")))
            .collect();
        system.nodes.extend(pool.iter().cloned());
        system.cis.insert(
            id.clone(),
            ConfiguredInstance {
                id: id.clone(),
                component_count: rng.gen_range(1..=2),
                node_pool: pool.clone(),
                cool_down: Duration::from_secs(300),
                scaling_step: 1,
                interference_risk: rng.gen_bool(0.5),
                criticality: rng.gen_range(0..5),
                service_instances: [SiId::new(format!("CI{i}-S"))].into_iter().collect(),
            },
        );
        let envs = rng.gen_range(1..=params.max_envs.max(1));
        for e in 0..envs {
            let env_id = EnvId::new(format!("E{i}.{}", e + 1));
            system.environments.insert(
                env_id.clone(),
                BoundaryEnvironment {
                    id: env_id,
                    owner: id.clone(),
                    collocated: BTreeSet::new(),
                    hosting_nodes: pool.iter().take(rng.gen_range(2..=3)).cloned().collect(),
                },
            );
        }
        system.call_graph.add_vertex(id);
    }
    // Random DAG over the index order.
    for i in 1..=n_cis {
        for j in (i + 1)..=n_cis {
            if rng.gen_bool(0.5) {
                system.call_graph.add_edge(
                    ci(i),
                    ci(j),
                    Duration::from_secs(rng.gen_range(50..120)),
                );
            }
        }
    }

    let mut model = Model {
        system,
        objective: "exercise the generated system".into(),
        ..Default::default()
    };
    for i in 1..=n_cis {
        // Risk must agree with the system flag; short times keep rolling
        // paths applicable under the 50s-plus tolerances.
        let risk = model.cis()[&ci(i)].interference_risk;
        model.isolation.insert(
            ci(i),
            IsolationEntry {
                risk,
                snapshot_time: Duration::from_millis(rng.gen_range(50..2_000)),
                clone_time: Duration::from_millis(rng.gen_range(50..2_000)),
                relocation_time: Duration::from_millis(rng.gen_range(10..1_000)),
            },
        );
        model
            .outage_budgets
            .insert(SiId::new(format!("CI{i}-S")), Duration::from_secs(100));
    }
    model.frameworks.insert(
        FrameworkId::from("fw"),
        FrameworkOptions {
            options: [(DeploymentOption::Container, Duration::from_secs(2))]
                .into_iter()
                .collect(),
        },
    );

    // Applications on random simple walks.
    let n_apps = rng.gen_range(1..=params.max_apps.max(1));
    let mut per_tsi: BTreeMap<TsiId, Vec<CallPath>> = BTreeMap::new();
    for t in 0..n_apps {
        let tsi = TsiId::new(format!("TC{}", t % 4 + 1));
        let path = random_walk(rng, &model, n_cis, params.max_path_len);
        per_tsi.entry(tsi).or_default().push(path);
    }
    let mut app_count = 0;
    for (tsi, paths) in per_tsi {
        let kind = params.kinds[rng.gen_range(0..params.kinds.len())];
        let width = rng.gen_range(1..=params.max_width.max(1));
        let coverage = CoverageCriterion::new(kind, width);
        let execution_time = Duration::from_secs(rng.gen_range(5..40));
        for (index, path) in paths.iter().enumerate() {
            model.applications.push(TsiApplication {
                id: AppId::new(tsi.clone(), index),
                path: path.clone(),
                coverage,
                execution_time,
                runtime_framework: FrameworkId::from("fw"),
            });
            app_count += 1;
        }
        model.items.insert(
            tsi.clone(),
            TestSuiteItem {
                id: tsi,
                call_paths: paths,
                coverage,
                execution_time,
                runtime_framework: FrameworkId::from("fw"),
            },
        );
    }
    assert!(app_count >= 1);
    model.applications.sort_by(|a, b| a.id.cmp(&b.id));

    // Random acyclic precedence over the TSI index order.
    let tsis: Vec<TsiId> = model.items.keys().cloned().collect();
    let mut pairs: BTreeSet<PrecedencePair> = BTreeSet::new();
    if tsis.len() >= 2 {
        for _ in 0..params.precedence_pairs {
            let a = rng.gen_range(0..tsis.len() - 1);
            let b = rng.gen_range(a + 1..tsis.len());
            pairs.insert(PrecedencePair {
                leading: tsis[a].clone(),
                following: tsis[b].clone(),
            });
        }
    }
    model.precedence = pairs.into_iter().collect();

    model
}

/// A simple path along the DAG's edges, length capped by `max_len`.
fn random_walk(rng: &mut ChaCha8Rng, model: &Model, n_cis: usize, max_len: usize) -> CallPath {
    let start = rng.gen_range(1..=n_cis);
    let mut vertices = vec![ci(start)];
    let mut current = start;
    while vertices.len() < max_len {
        let successors: Vec<usize> = ((current + 1)..=n_cis)
            .filter(|j| {
                model
                    .system
                    .call_graph
                    .has_edge(&ci(current), &ci(*j))
            })
            .collect();
        if successors.is_empty() || rng.gen_bool(0.35) {
            break;
        }
        current = successors[rng.gen_range(0..successors.len())];
        vertices.push(ci(current));
    }
    CallPath::from_vertices_unchecked(vertices)
}
