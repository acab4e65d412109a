//! Deriving the exact run set and the test-case skeletons each grouping
//! deploys.
//!
//! A run is one TSI application executed under one of its mandated
//! configurations. Runs are hosted by the cases of the groups the
//! application belongs to (a case hosts a run when its configuration
//! restricted to the application's path equals the run's configuration);
//! anything left over lands in the application's residual grouping. A final
//! cleanup pass removes duplicate and dominated deployments, so the deployed
//! configurations end up being exactly the maximal run configurations under
//! the sub-configuration order.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::coverage::{self, CoverageError, Mixture, TestConfiguration};
use crate::ids::{AppId, CiId};
use crate::merging::Grouping;
use crate::model::Model;

/// One TSI application executed under one test configuration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Run {
    pub app: AppId,
    pub assignment: BTreeMap<CiId, Mixture>,
}

/// A test case in the making: a configuration plus the applications invoked
/// under it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseDraft {
    /// Head id of the grouping the case belongs to.
    pub grouping: AppId,
    pub config: TestConfiguration,
    pub invocations: Vec<AppId>,
}

/// The run set partitioned into per-grouping case skeletons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseLayout {
    /// All groupings, including residual ones that ended up empty.
    pub groupings: Vec<Grouping>,
    /// Cases in canonical order: grouping head order, then the head's
    /// configuration generation order (residual cases follow their
    /// application's mandated order).
    pub cases: Vec<CaseDraft>,
}

impl CaseLayout {
    /// Every (application, configuration) run in the layout, derived from
    /// the case invocations.
    pub fn runs(&self, model: &Model) -> Vec<Run> {
        let mut out = Vec::new();
        for case in &self.cases {
            for app_id in &case.invocations {
                let app = model.application(app_id).expect("invoked app exists");
                let assignment = case
                    .config
                    .restrict_to(app.path.vertices())
                    .expect("case config covers the app's path");
                out.push(Run {
                    app: app_id.clone(),
                    assignment,
                });
            }
        }
        out
    }

    /// Number of distinct configurations the layout deploys.
    pub fn deployed_assignment_count(&self) -> usize {
        let distinct: alloc::collections::BTreeSet<&BTreeMap<CiId, Mixture>> =
            self.cases.iter().map(|c| &c.config.assignment).collect();
        distinct.len()
    }

    pub fn cases_of<'a>(&'a self, head: &'a AppId) -> impl Iterator<Item = &'a CaseDraft> + 'a {
        self.cases.iter().filter(move |c| &c.grouping == head)
    }
}

/// Mandated configurations per application, in generation order.
pub fn mandated_configurations(
    model: &Model,
) -> Result<BTreeMap<AppId, Vec<TestConfiguration>>, CoverageError> {
    let mut out = BTreeMap::new();
    for app in &model.applications {
        let configs = coverage::generate_configurations(&app.path, app.coverage, &model.system)?;
        out.insert(app.id.clone(), configs);
    }
    Ok(out)
}

/// Builds the case layout: one case per (grouping, head configuration),
/// every mandated run hosted exactly once, residual cases for runs no
/// existing case covers, and dominated deployments cleaned up.
pub fn required_runs(
    groupings: &[Grouping],
    mandated: &BTreeMap<AppId, Vec<TestConfiguration>>,
    model: &Model,
) -> CaseLayout {
    let mut groupings: Vec<Grouping> = groupings.to_vec();
    groupings.sort_by(|a, b| a.head.cmp(&b.head));

    // Case skeletons for the primary groupings come from the heads'
    // configuration lists; residual groupings materialize cases lazily.
    let mut cases: Vec<CaseDraft> = Vec::new();
    for g in groupings.iter().filter(|g| !g.residual) {
        for config in mandated.get(&g.head).into_iter().flatten() {
            cases.push(CaseDraft {
                grouping: g.head.clone(),
                config: config.clone(),
                invocations: Vec::new(),
            });
        }
    }

    for app in &model.applications {
        let hosting: Vec<AppId> = groupings
            .iter()
            .filter(|g| !g.residual && g.members.contains(&app.id))
            .map(|g| g.head.clone())
            .collect();
        let mut leftovers: Vec<TestConfiguration> = Vec::new();

        for config in mandated.get(&app.id).into_iter().flatten() {
            // First a home among the app's own groups, then any case at all
            // whose configuration covers the run (global de-duplication).
            // Case creation order is canonical, so "first match" is stable.
            let mut host = cases.iter().position(|c| {
                hosting.contains(&c.grouping) && c.config.covers_assignment(&config.assignment)
            });
            if host.is_none() {
                host = cases
                    .iter()
                    .position(|c| c.config.covers_assignment(&config.assignment));
            }
            match host {
                Some(i) => cases[i].invocations.push(app.id.clone()),
                None => leftovers.push(config.clone()),
            }
        }

        if !leftovers.is_empty() {
            if !groupings.iter().any(|g| g.head == app.id) {
                groupings.push(Grouping {
                    head: app.id.clone(),
                    members: [app.id.clone()].into_iter().collect(),
                    max_path: app.path.clone(),
                    head_coverage: app.coverage,
                    residual: true,
                });
                groupings.sort_by(|a, b| a.head.cmp(&b.head));
            }
            for config in leftovers {
                cases.push(CaseDraft {
                    grouping: app.id.clone(),
                    config,
                    invocations: alloc::vec![app.id.clone()],
                });
            }
        }
    }

    cleanup_dominated_cases(&mut cases);

    cases.retain(|c| !c.invocations.is_empty());
    for case in &mut cases {
        case.invocations.sort();
        case.invocations.dedup();
    }

    // Canonical case order: grouping rank, then original position.
    let grouping_rank: BTreeMap<AppId, usize> = groupings
        .iter()
        .enumerate()
        .map(|(i, g)| (g.head.clone(), i))
        .collect();
    let mut indexed: Vec<(usize, CaseDraft)> = cases.into_iter().enumerate().collect();
    indexed.sort_by_key(|(i, c)| (grouping_rank[&c.grouping], *i));
    let cases = indexed.into_iter().map(|(_, c)| c).collect();

    CaseLayout { groupings, cases }
}

/// Merges every case whose configuration is equal to or strictly contained
/// in another case's configuration into that case. Afterwards the deployed
/// configurations form an antichain: exactly the maximal run configurations.
fn cleanup_dominated_cases(cases: &mut Vec<CaseDraft>) {
    loop {
        let mut dominated: Option<(usize, usize)> = None;
        'outer: for i in 0..cases.len() {
            for j in 0..cases.len() {
                if i == j {
                    continue;
                }
                let ci = &cases[i].config.assignment;
                let cj = &cases[j].config;
                let equal = ci == &cj.assignment;
                if (equal && j < i) || (!equal && cj.covers_assignment(ci)) {
                    dominated = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((from, into)) = dominated else {
            break;
        };
        let moved = cases.remove(from);
        let into = if into > from { into - 1 } else { into };
        cases[into].invocations.extend(moved.invocations);
    }
}

/// Human-readable summary used by diagnostics: `TC2-0 under {…}`.
pub fn describe_run(run: &Run) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let _ = write!(s, "{} under {{", run.app);
    let mut first = true;
    for (ci, m) in &run.assignment {
        if !first {
            s.push(',');
        }
        first = false;
        let _ = write!(s, "{ci}:{m}");
    }
    s.push('}');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec;
    use core::time::Duration;

    use crate::ids::{EnvId, FrameworkId, NodeId, SiId, TsiId};
    use crate::merging::merge_call_paths;
    use crate::model::{
        BoundaryEnvironment, ConfiguredInstance, CoverageCriterion, CoverageKind, SystemModel,
        TsiApplication,
    };
    use crate::path::CallPath;

    fn ci(s: &str) -> CiId {
        CiId::from(s)
    }

    /// Linear system CI3 -> CI2 -> CI5 with configurable environment counts.
    fn model_counts(
        chain: &[(&str, usize)],
        apps: Vec<(&str, &[&str], CoverageKind, u32)>,
    ) -> Model {
        let mut system = SystemModel::default();
        for (name, envs) in chain.iter().copied() {
            let id = ci(name);
            let pool: BTreeSet<NodeId> = (0..4)
                .map(|k| NodeId::new(alloc::format!("{name}-n{k}")))
                .collect();
            system.cis.insert(
                id.clone(),
                ConfiguredInstance {
                    id: id.clone(),
                    component_count: 1,
                    node_pool: pool.clone(),
                    cool_down: Duration::from_secs(60),
                    scaling_step: 1,
                    interference_risk: false,
                    criticality: 0,
                    service_instances: [SiId::new(alloc::format!("{name}-S"))]
                        .into_iter()
                        .collect(),
                },
            );
            for e in 0..envs {
                let env_id = EnvId::new(alloc::format!("E{}.{}", &name[2..], e + 1));
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
        for pair in chain.windows(2) {
            system
                .call_graph
                .add_edge(ci(pair[0].0), ci(pair[1].0), Duration::from_secs(10));
        }

        let applications: Vec<TsiApplication> = apps
            .into_iter()
            .map(|(tsi, vertices, kind, width)| TsiApplication {
                id: AppId::new(TsiId::from(tsi), 0),
                path: CallPath::from_vertices_unchecked(
                    vertices.iter().map(|v| ci(v)).collect(),
                ),
                coverage: CoverageCriterion::new(kind, width),
                execution_time: Duration::from_secs(10),
                runtime_framework: FrameworkId::from("fw"),
            })
            .collect();

        Model {
            system,
            applications,
            ..Default::default()
        }
    }

    fn layout_for(model: &Model) -> CaseLayout {
        let groupings = merge_call_paths(&model.applications);
        let mandated = mandated_configurations(model).unwrap();
        required_runs(&groupings, &mandated, model)
    }

    const CHAIN212: &[(&str, usize)] = &[("CI3", 2), ("CI2", 1), ("CI5", 2)];
    const CHAIN222: &[(&str, usize)] = &[("CI3", 2), ("CI2", 2), ("CI5", 2)];

    #[test]
    fn singleton_grouping_runs_its_own_configurations() {
        let model = model_counts(
            CHAIN212,
            vec![("TC1", &["CI3", "CI2", "CI5"], CoverageKind::AllBeMixtures, 1)],
        );
        let layout = layout_for(&model);
        assert_eq!(layout.cases.len(), 2);
        for case in &layout.cases {
            assert_eq!(case.invocations, vec![AppId::new(TsiId::from("TC1"), 0)]);
        }
    }

    #[test]
    fn fully_merged_member_has_no_runs_outside_the_head() {
        let model = model_counts(
            CHAIN212,
            vec![
                ("TC2", &["CI3", "CI2", "CI5"], CoverageKind::AllBeMixtures, 1),
                ("TC4", &["CI2", "CI5"], CoverageKind::AllBeMixtures, 1),
            ],
        );
        let layout = layout_for(&model);
        assert_eq!(layout.cases.len(), 2);
        let tc4 = AppId::new(TsiId::from("TC4"), 0);
        for case in &layout.cases {
            assert!(case.invocations.contains(&tc4));
            assert_eq!(case.grouping, AppId::new(TsiId::from("TC2"), 0));
        }
    }

    #[test]
    fn partial_merge_leaves_exactly_the_uncovered_product_rows() {
        // Head: strength-one rows over the full path cover two of the four
        // product rows the member needs; the other two are residual.
        let model = model_counts(
            CHAIN222,
            vec![
                ("TC1", &["CI3", "CI2", "CI5"], CoverageKind::AllBeMixtures, 1),
                ("TC2", &["CI2", "CI5"], CoverageKind::AllBeMixturesPaths, 1),
            ],
        );
        let layout = layout_for(&model);
        let tc2 = AppId::new(TsiId::from("TC2"), 0);
        let residual_cases: Vec<_> = layout.cases_of(&tc2).collect();
        assert_eq!(residual_cases.len(), 2);
        let runs = layout.runs(&model);
        let tc2_runs: Vec<_> = runs.iter().filter(|r| r.app == tc2).collect();
        // All four product rows appear exactly once.
        assert_eq!(tc2_runs.len(), 4);
        let distinct: BTreeSet<_> = tc2_runs.iter().map(|r| &r.assignment).collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn no_duplicate_runs_across_the_whole_set() {
        let model = model_counts(
            CHAIN222,
            vec![
                ("TC1", &["CI3", "CI2", "CI5"], CoverageKind::AllBeMixtures, 1),
                ("TC2", &["CI2", "CI5"], CoverageKind::AllBeMixturesPaths, 1),
                ("TC3", &["CI5"], CoverageKind::AllBeMixtures, 1),
            ],
        );
        let layout = layout_for(&model);
        let runs = layout.runs(&model);
        let distinct: BTreeSet<_> = runs.iter().collect();
        assert_eq!(distinct.len(), runs.len());
    }

    #[test]
    fn dominated_deployments_are_cleaned_up() {
        // TC1's own product cases over [CI2, CI5] are strictly contained in
        // the pairwise rows of TC2's wider group; after cleanup nothing
        // deploys twice and TC1 rides along in TC2's cases.
        let model = model_counts(
            CHAIN222,
            vec![
                ("TC1", &["CI2", "CI5"], CoverageKind::AllBeMixturesPaths, 1),
                ("TC2", &["CI3", "CI2", "CI5"], CoverageKind::PairwiseBeMixtures, 1),
            ],
        );
        let layout = layout_for(&model);
        let tc1 = AppId::new(TsiId::from("TC1"), 0);
        let tc2 = AppId::new(TsiId::from("TC2"), 0);
        // Strength two over three CIs covers every (CI2, CI5) pair, so every
        // TC1 row is dominated by some TC2 case.
        for case in &layout.cases {
            assert_eq!(case.grouping, tc2, "case {:?} not absorbed", case.config);
        }
        let runs = layout.runs(&model);
        assert_eq!(runs.iter().filter(|r| r.app == tc1).count(), 4);
        let distinct: BTreeSet<_> = layout
            .cases
            .iter()
            .map(|c| &c.config.assignment)
            .collect();
        assert_eq!(distinct.len(), layout.cases.len());
    }
}
