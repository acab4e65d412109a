//! Property tests for the engine's structural guarantees: path algebra,
//! mixture enumeration, coverage strength, grouping soundness, run
//! conservation, and the Gray ordering facts.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use proptest::prelude::*;

use liveplan_core::coverage::{
    configuration_count, enumerate_mixtures, generate_configurations, mixtures_of,
};
use liveplan_core::ids::{AppId, CiId, EnvId, FrameworkId, NodeId, SiId, TsiId};
use liveplan_core::merging::merge_call_paths;
use liveplan_core::model::{
    BoundaryEnvironment, ConfiguredInstance, CoverageCriterion, CoverageKind, IsolationEntry,
    Model, SystemModel, TsiApplication,
};
use liveplan_core::oracle::{subconfig_compare, ConfigOrder};
use liveplan_core::ordering::gray_sequence;
use liveplan_core::path::{is_sub_path, max_path, CallPath};
use liveplan_core::pipeline::{generate_with_trace, GenerateOptions};

fn ci(n: usize) -> CiId {
    CiId::new(format!("CI{n}"))
}

/// Line-graph system CI1 -> CI2 -> ... with the given per-CI environment
/// counts; isolation is risk-free so methods never block generation.
fn line_model(env_counts: &[usize], apps: Vec<(usize, usize, usize, CoverageKind, u32)>) -> Model {
    let mut system = SystemModel::default();
    for (idx, envs) in env_counts.iter().enumerate() {
        let id = ci(idx + 1);
        let pool: BTreeSet<NodeId> = (0..4)
            .map(|k| NodeId::new(format!("CI{}-n{k}", idx + 1)))
            .collect();
        system.nodes.extend(pool.iter().cloned());
        system.cis.insert(
            id.clone(),
            ConfiguredInstance {
                id: id.clone(),
                component_count: 1,
                node_pool: pool.clone(),
                cool_down: Duration::from_secs(60),
                scaling_step: 1,
                interference_risk: false,
                criticality: (env_counts.len() - idx) as u32,
                service_instances: [SiId::new(format!("CI{}-S", idx + 1))].into_iter().collect(),
            },
        );
        for e in 0..*envs {
            let env_id = EnvId::new(format!("E{}.{}", idx + 1, e + 1));
            system.environments.insert(
                env_id.clone(),
                BoundaryEnvironment {
                    id: env_id,
                    owner: id.clone(),
                    collocated: Default::default(),
                    hosting_nodes: pool.iter().take(3).cloned().collect(),
                },
            );
        }
        system.call_graph.add_vertex(id);
    }
    for idx in 1..env_counts.len() {
        system
            .call_graph
            .add_edge(ci(idx), ci(idx + 1), Duration::from_secs(100));
    }

    let mut model = Model {
        system,
        ..Default::default()
    };
    for idx in 0..env_counts.len() {
        model.isolation.insert(
            ci(idx + 1),
            IsolationEntry {
                risk: false,
                snapshot_time: Duration::from_millis(100),
                clone_time: Duration::from_millis(100),
                relocation_time: Duration::from_millis(10),
            },
        );
    }
    for (tsi, start, len, kind, width) in apps {
        let vertices: Vec<CiId> = (start..start + len).map(ci).collect();
        let id = AppId::new(TsiId::new(format!("TC{tsi}")), 0);
        model.applications.push(TsiApplication {
            id,
            path: CallPath::from_vertices_unchecked(vertices),
            coverage: CoverageCriterion::new(kind, width),
            execution_time: Duration::from_secs(5),
            runtime_framework: FrameworkId::from("fw"),
        });
    }
    model.applications.sort_by(|a, b| a.id.cmp(&b.id));
    model
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut result = 1u64;
    for i in 0..k.min(n - k) {
        result = result * (n - i) / (i + 1);
    }
    result
}

fn window(vertices: &[CiId], start: usize, len: usize) -> CallPath {
    CallPath::from_vertices_unchecked(vertices[start..start + len].to_vec())
}

proptest! {
    /// Contiguous windows of a line path: sub-path iff containment of the
    /// windows; the relation is a partial order.
    #[test]
    fn sub_path_is_a_partial_order(
        n in 2usize..8,
        a in (0usize..6, 1usize..6),
        b in (0usize..6, 1usize..6),
        c in (0usize..6, 1usize..6),
    ) {
        let vertices: Vec<CiId> = (1..=n).map(ci).collect();
        let clip = |(s, l): (usize, usize)| {
            let s = s % n;
            let l = 1 + l % (n - s).max(1);
            (s, l.min(n - s))
        };
        let (sa, la) = clip(a);
        let (sb, lb) = clip(b);
        let (sc, lc) = clip(c);
        let pa = window(&vertices, sa, la);
        let pb = window(&vertices, sb, lb);
        let pc = window(&vertices, sc, lc);

        // Reflexive.
        prop_assert!(is_sub_path(&pa, &pa));
        // Antisymmetric.
        if is_sub_path(&pa, &pb) && is_sub_path(&pb, &pa) {
            prop_assert_eq!(&pa, &pb);
        }
        // Transitive.
        if is_sub_path(&pa, &pb) && is_sub_path(&pb, &pc) {
            prop_assert!(is_sub_path(&pa, &pc));
        }
        // Windows characterize containment on a line.
        prop_assert_eq!(is_sub_path(&pa, &pb), sb <= sa && sa + la <= sb + lb);
    }

    /// A present max-path is a member and a super-path of every member, and
    /// it is unique.
    #[test]
    fn max_path_is_the_unique_maximal_member(
        n in 2usize..8,
        windows in prop::collection::vec((0usize..6, 1usize..6), 1..6),
    ) {
        let vertices: Vec<CiId> = (1..=n).map(ci).collect();
        let paths: Vec<CallPath> = windows
            .into_iter()
            .map(|(s, l)| {
                let s = s % n;
                let l = 1 + l % (n - s).max(1);
                window(&vertices, s, l.min(n - s))
            })
            .collect();
        match max_path(paths.iter()).unwrap() {
            Some(m) => {
                prop_assert!(paths.contains(m));
                for p in &paths {
                    prop_assert!(is_sub_path(p, m));
                }
                let count = paths
                    .iter()
                    .filter(|cand| paths.iter().all(|p| is_sub_path(p, cand)))
                    .collect::<BTreeSet<_>>()
                    .len();
                prop_assert_eq!(count, 1);
            }
            None => {
                for cand in &paths {
                    prop_assert!(!paths.iter().all(|p| is_sub_path(p, cand)));
                }
            }
        }
    }

    /// Stars and bars: without hosting caps the mixture count is
    /// C(n + w - 1, w); all mixtures are distinct and sum to the width.
    #[test]
    fn mixture_enumeration_matches_the_binomial(envs in 1usize..5, width in 1u32..5) {
        let env_list: Vec<(EnvId, usize)> = (0..envs)
            .map(|e| (EnvId::new(format!("E{e}")), 10))
            .collect();
        let mixtures = enumerate_mixtures(&env_list, width).unwrap();
        let expected = binomial((envs as u64) + (width as u64) - 1, width as u64);
        prop_assert_eq!(mixtures.len() as u64, expected);
        let distinct: BTreeSet<_> = mixtures.iter().collect();
        prop_assert_eq!(distinct.len(), mixtures.len());
        for m in &mixtures {
            prop_assert_eq!(m.width(), width);
        }
    }

    /// The generated configuration list always has the promised count, every
    /// strength guarantee holds, and the rows of one application are
    /// pairwise unordered under the sub-configuration relation.
    #[test]
    fn coverage_counts_strengths_and_lemma_one(
        counts in prop::collection::vec(1usize..4, 1..4),
        kind_pick in 0u8..3,
        width in 1u32..3,
    ) {
        let kind = match kind_pick {
            0 => CoverageKind::AllBeMixtures,
            1 => CoverageKind::PairwiseBeMixtures,
            _ => CoverageKind::AllBeMixturesPaths,
        };
        let model = line_model(&counts, vec![(1, 1, counts.len(), kind, width)]);
        let app = &model.applications[0];
        let criterion = CoverageCriterion::new(kind, width);
        let configs = generate_configurations(&app.path, criterion, &model.system).unwrap();
        prop_assert_eq!(
            configs.len(),
            configuration_count(&app.path, criterion, &model.system).unwrap()
        );

        let vs = app.path.vertices();
        // Strength one: every mixture of every CI appears somewhere.
        for v in vs {
            for m in mixtures_of(&model.system, v, width).unwrap() {
                prop_assert!(configs.iter().any(|c| c.assignment.get(v) == Some(&m)));
            }
        }
        // Strength two where requested.
        if kind != CoverageKind::AllBeMixtures {
            for i in 0..vs.len() {
                for j in (i + 1)..vs.len() {
                    for mi in mixtures_of(&model.system, &vs[i], width).unwrap() {
                        for mj in mixtures_of(&model.system, &vs[j], width).unwrap() {
                            let covered = configs.iter().any(|c| {
                                c.assignment.get(&vs[i]) == Some(&mi)
                                    && c.assignment.get(&vs[j]) == Some(&mj)
                            });
                            prop_assert!(covered);
                        }
                    }
                }
            }
        }
        // The rows of one application never contain each other.
        for (i, a) in configs.iter().enumerate() {
            for b in configs.iter().skip(i + 1) {
                prop_assert_eq!(
                    subconfig_compare(&a.assignment, &b.assignment),
                    ConfigOrder::Incomparable
                );
            }
        }
        // Determinism: regeneration is bit-identical.
        let again = generate_configurations(&app.path, criterion, &model.system).unwrap();
        prop_assert_eq!(configs, again);
    }

    /// Gray sequences: full product, single-distance steps, and (for digits
    /// that actually vary, radix two and up) transition counts that never
    /// decrease toward the less significant digits. A radix-one digit never
    /// changes at all, so it sits outside the monotonicity claim.
    #[test]
    fn gray_sequence_facts(radices in prop::collection::vec(1usize..5, 1..5)) {
        let seq = gray_sequence(&radices);
        let expected: usize = radices.iter().product();
        prop_assert_eq!(seq.len(), expected);
        let distinct: BTreeSet<_> = seq.iter().collect();
        prop_assert_eq!(distinct.len(), expected);
        for w in seq.windows(2) {
            let differing = w[0].iter().zip(&w[1]).filter(|(x, y)| x != y).count();
            prop_assert_eq!(differing, 1);
        }
        let changes: Vec<usize> = (0..radices.len())
            .map(|d| seq.windows(2).filter(|w| w[0][d] != w[1][d]).count())
            .collect();
        for d in 0..radices.len() {
            // Every digit visits all its values: the structural floor.
            prop_assert!(changes[d] >= radices[d] - 1);
        }
        if radices.iter().all(|r| *r >= 2) {
            for pair in changes.windows(2) {
                prop_assert!(pair[0] <= pair[1]);
            }
        }
    }
}

/// Every member of every grouping is a sub-path of the head's path, heads
/// are members, and all applications land somewhere.
#[test]
fn grouping_invariants_over_random_suites() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let cis = rng.gen_range(2..6);
        let counts: Vec<usize> = (0..cis).map(|_| rng.gen_range(1..4)).collect();
        let mut apps = Vec::new();
        let n_apps = rng.gen_range(1..6);
        for t in 0..n_apps {
            let start = rng.gen_range(1..=cis);
            let len = rng.gen_range(1..=(cis - start + 1));
            let kind = match rng.gen_range(0..3) {
                0 => CoverageKind::AllBeMixtures,
                1 => CoverageKind::PairwiseBeMixtures,
                _ => CoverageKind::AllBeMixturesPaths,
            };
            apps.push((t + 1, start, len, kind, rng.gen_range(1..3)));
        }
        let model = line_model(&counts, apps);
        let groupings = merge_call_paths(&model.applications);
        for g in &groupings {
            assert!(g.members.contains(&g.head));
            for m in &g.members {
                let app = model.application(m).unwrap();
                assert!(
                    app.path.is_sub_path_of(&g.max_path),
                    "member {m} not a sub-path of {}",
                    g.head
                );
            }
        }
        for app in &model.applications {
            assert!(groupings.iter().any(|g| g.members.contains(&app.id)));
        }
    }
}

/// The pipeline conserves runs: every mandated (application, configuration)
/// pair appears in the final plan exactly once, and the scheduled case set
/// deploys exactly the distinct maximal run configurations.
#[test]
fn pipeline_conserves_and_minimizes_runs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for round in 0..120 {
        let cis = rng.gen_range(2..5);
        let counts: Vec<usize> = (0..cis).map(|_| rng.gen_range(1..4)).collect();
        let mut apps = Vec::new();
        let n_apps = rng.gen_range(1..5);
        for t in 0..n_apps {
            let start = rng.gen_range(1..=cis);
            let len = rng.gen_range(1..=(cis - start + 1));
            let kind = match rng.gen_range(0..3) {
                0 => CoverageKind::AllBeMixtures,
                1 => CoverageKind::PairwiseBeMixtures,
                _ => CoverageKind::AllBeMixturesPaths,
            };
            apps.push((t + 1, start, len, kind, 1));
        }
        let model = line_model(&counts, apps);
        let (plan, trace) =
            generate_with_trace(&model, &GenerateOptions::default()).expect("pipeline runs");

        for app in &model.applications {
            let mandated = &trace.mandated[&app.id];
            for config in mandated {
                let hosting = plan
                    .schedule
                    .iter()
                    .filter(|case| {
                        case.main.contains(&app.id)
                            && case
                                .configuration
                                .restrict_to(app.path.vertices())
                                .map(|r| r == config.assignment)
                                .unwrap_or(false)
                    })
                    .count();
                assert_eq!(
                    hosting, 1,
                    "round {round}: run {} under {config} hosted {hosting} times",
                    app.id
                );
            }
        }

        // Deployed distinct configurations = maximal run configurations.
        let runs: Vec<liveplan_core::runs::Run> = trace
            .mandated
            .iter()
            .flat_map(|(app, configs)| {
                configs.iter().map(move |c| liveplan_core::runs::Run {
                    app: app.clone(),
                    assignment: c.assignment.clone(),
                })
            })
            .collect();
        let minimum = liveplan_core::oracle::minimal_config_count(&runs, 100_000).unwrap();
        let deployed: BTreeSet<BTreeMap<CiId, _>> = plan
            .schedule
            .iter()
            .map(|c| c.configuration.assignment.clone())
            .collect();
        assert_eq!(deployed.len(), minimum, "round {round}");
    }
}
